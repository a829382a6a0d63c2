"""Exact mod-p cohomology toolkit for a family of finite p-groups.

The package is organised bottom-up:

- :mod:`cohomoforge.gfp` — exact linear algebra over the prime field F_p,
  including a streaming row-space used for large coboundary solves.
- :mod:`cohomoforge.pcgroup` — finite p-groups given by weighted polycyclic
  presentations, with a collection-based multiplication engine and the
  structural queries built on top of it (centres, centralisers, lower
  central series, elementary abelian subgroups, ...).
- :mod:`cohomoforge.family` — the specific one-parameter family of groups
  G_r of order p^(r+1) studied here, their central covers, and the
  certified construction of the distinguished degree-2 class eta_r.
- :mod:`cohomoforge.cochains` — normalized bar cochains with trivial F_p
  coefficients: differentials, cup products, restrictions, and the bridges
  between 2-cocycles and central extensions.
- :mod:`cohomoforge.extensions` — Yoneda n-extensions and crossed
  2-extensions of F_p-modules, with pushouts, pullbacks, Baer sums,
  splices, and the canonical crossed-diagram witness.
- :mod:`cohomoforge.depth` — depth bounds (Duflot lower bound, rank-style
  upper bound) and the depth-one certification pipeline combining the
  nonzero-product certificate with restriction vanishing.
- :mod:`cohomoforge.cache` / :mod:`cohomoforge.cli` — content-addressed
  certificate cache and the command-line interface.
"""

__version__ = "0.1.0"

__all__ = ["__version__"]
