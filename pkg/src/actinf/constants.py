"""Numeric conventions shared by the kernels and the inference layers.

Log-space tables never carry ``-inf`` into the hot kernels: zero-probability
factors are clamped to ``NEG_CLAMP`` so that sums and weighted averages stay
IEEE-defined.  Any accumulated log value at or below ``ZERO_LOG_THRESHOLD``
is read back as "impossible cell" by the wrappers.

Mean-field factor entries are floored at ``FACTOR_FLOOR`` before
normalization so coordinate updates can drive them to effective zero without
producing NaN.  Joint masses built from such factors are therefore never
exactly zero; anything at or below ``EFFECTIVE_ZERO`` is treated as exact
zero mass by every accumulation (it contributes nothing and does not count
as support).
"""

# Stand-in for log(0) inside kernels; finite so arithmetic stays defined.
NEG_CLAMP = -1e300

# Accumulated log-probabilities at or below this mark an impossible cell.
ZERO_LOG_THRESHOLD = -1e200

# Floor applied to factor entries before normalization.
FACTOR_FLOOR = 1e-300

# Joint variational mass at or below this is floor dust, not real support.
EFFECTIVE_ZERO = 1e-250

# |sum - 1| within this is considered normalized.
NORM_ATOL = 1e-12

# Deviations below this are silently renormalized; above, rejected.
NORM_REPAIR = 1e-9
