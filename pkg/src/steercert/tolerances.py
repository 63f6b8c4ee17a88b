"""Numerical tolerances shared by every module.

Dimensions here never exceed a handful, so everything is close to machine
precision. Loosening these hides bugs rather than fixing them.
"""

CONSTRUCTION = 1e-12
DECOMPOSITION = 1e-10
CERTIFICATION = 1e-9
REPORTING = 1e-6

# Schmidt coefficients at or below this are treated as zero.
SCHMIDT_CUTOFF = 1e-9
# Singular values at or below this do not count towards a matrix rank.
RANK_CUTOFF = 1e-9
