"""Exact combinatorics of local-unitary-invariant random tensors.

Subpackages, roughly bottom-up:

- perms: permutations, Cayley distance, the non-crossing order and its
  Moebius function, genus, Catalan numbers.
- partitions: set/bipartite partitions, joins, Moebius functions, classical
  moment/cumulant transforms.
- invariants: D-tuples of permutations as trace-invariants, equivalence
  classes, orbit distances, Gram products, numeric trace evaluation.
- melonic: degree theory, melonic recognition, canonical pairings,
  compatibility, orders of dominance.
- weingarten: exact unitary Weingarten functions over symbolic N and the
  Laurent-polynomial / rational-function value types.
- ensembles: exact Gaussian and Wishart moment polynomials, scaling reports,
  the melonic covariance fixed point, and the subadditivity probe.
- transforms: finite-N and first-order asymptotic moment <-> free-cumulant
  transforms, the dominant set, and free additive convolution.
- paired: paired tensors, grouping/ungrouping, paired free cumulants, and
  the three-way asymptotic tensor-freeness checker.
- mc: the Monte Carlo oracle.
- cli: the `tensorfree` command-line surface.
"""

__version__ = "0.1.0"
