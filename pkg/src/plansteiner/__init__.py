"""Approximation algorithms for rooted Steiner problems in planar digraphs.

Library layout: graphs (embedded digraphs, instances, shared primitives),
separator (shortest-path separators), embedding (recursion-tree embedding
and projections), treesolve (tree-side LPs, rounding and DPs), lp (simplex
and the cut relaxation), oracle (exact small-instance solvers), pipeline
(end-to-end solvers), generate/bench/cli (instances and harness).
"""

__version__ = "0.1.0"
