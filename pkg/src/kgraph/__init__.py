"""Rank-k graphs, their Cuntz-Krieger families, and the q -> 0 limit of SU_q(3).

Submodules: ``core`` (graphs, squares, paths), ``textio`` (file format),
``su3`` (the built-in 2-graph), ``graded`` (graded sparse operators),
``qdeform`` (representations of SU_q(3)), ``ck`` (operator checks) and ``cli``.
The package root imports nothing heavy so the CLI can set thread limits first.
"""

__version__ = "0.1.0"
