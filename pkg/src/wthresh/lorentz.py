"""Lorentz sequence quasi-norms and tail error curves for finite sequences.

Everything here is finite: a sequence is a 1-D array of complex (or real)
scalars with an implicit exact-zero tail.  ``q = math.inf`` selects the
weak (sup) form of the norm, any finite positive ``q`` the summed form:

    ||a||_{tau,q} = ( sum_m [m^(1/tau) |a*_m|]^q / m )^(1/q)      0 < q < inf
    ||a||_{tau,inf} = sup_m m^(1/tau) |a*_m|

where ``a*`` is the non-increasing magnitude rearrangement.  For ``q = tau``
this coincides with the plain l^tau norm.
"""

import math

import numpy as np

from .errors import ParameterError

__all__ = [
    "rearrange",
    "lorentz_norm",
    "tail_norm",
    "sigma_curve",
    "approx_space_norm",
]

# beyond this length, plain pairwise summation can lose digits against the
# wide dynamic range of the m^(q/tau - 1) factors; fall back to exact fsum
_FSUM_THRESHOLD = 100_000


def _magnitudes(entries):
    c = np.asarray(entries)
    if c.size and not np.all(np.isfinite(c)):
        raise ParameterError("sequence entries must be finite (no NaN/Inf)")
    return np.abs(c).astype(float, copy=False).ravel()


def _check_params(tau, q):
    try:
        tau, q = float(tau), float(q)
    except (TypeError, ValueError):
        raise ParameterError(f"tau/q must be real, got {tau!r}, {q!r}") from None
    if not (math.isfinite(tau) and tau > 0):
        raise ParameterError(f"tau must be a positive finite real, got {tau!r}")
    if not q > 0 or math.isnan(q):
        raise ParameterError(f"q must be positive (math.inf allowed), got {q!r}")
    return tau, q


def rearrange(entries):
    """Non-increasing magnitude rearrangement of a sequence.

    Returns ``(magnitudes, permutation)`` where ``permutation[k]`` is the
    original index of the rank-``k`` magnitude and
    ``magnitudes == |entries|[permutation]``.  Ties keep ascending original
    index (stable), so results are identical across runs and platforms.
    """
    mags = _magnitudes(entries)
    perm = np.argsort(-mags, kind="stable")
    return mags[perm], perm


def _norm_of_sorted(mags, tau, q):
    """Lorentz norm of an already non-increasing magnitude array."""
    n = mags.size
    if n == 0:
        return 0.0
    ranks = np.arange(1, n + 1, dtype=float)
    if math.isinf(q):
        return float(np.max(ranks ** (1.0 / tau) * mags))
    terms = ranks ** (q / tau - 1.0) * mags**q
    total = math.fsum(terms) if n > _FSUM_THRESHOLD else float(np.sum(terms))
    return total ** (1.0 / q)


def lorentz_norm(entries, tau, q=math.inf):
    """Lorentz (tau, q) quasi-norm of a finite sequence.  Empty input gives 0."""
    tau, q = _check_params(tau, q)
    mags, _ = rearrange(entries)
    return _norm_of_sorted(mags, tau, q)


def tail_norm(entries, m, tau, q=math.inf):
    """Lorentz norm of the rearranged sequence with its ``m`` largest entries removed.

    This is the best ``m``-term error in the coefficient domain: zero once
    ``m`` reaches the sequence length.
    """
    tau, q = _check_params(tau, q)
    if m < 0 or int(m) != m:
        raise ParameterError(f"m must be a nonnegative integer, got {m!r}")
    mags, _ = rearrange(entries)
    return _norm_of_sorted(mags[int(m):], tau, q)


def sigma_curve(entries, tau, q, m_max):
    """Tail error curve: entry ``i`` is ``tail_norm(entries, i + 1, tau, q)``.

    The curve is indexed by the number of retained terms m = 1..m_max and is
    non-increasing, reaching exactly zero at m = len(entries).
    """
    tau, q = _check_params(tau, q)
    if m_max < 1 or int(m_max) != m_max:
        raise ParameterError(f"m_max must be a positive integer, got {m_max!r}")
    mags, _ = rearrange(entries)
    return np.array(
        [_norm_of_sorted(mags[m:], tau, q) for m in range(1, int(m_max) + 1)]
    )


def approx_space_norm(curve, base_norm, alpha, q=math.inf):
    """Size of a decay curve in the Lorentz space with tau = 1/alpha, plus a base norm.

    The curve is taken in the given order (curves from :func:`sigma_curve` are
    already non-increasing); entry ``i`` carries rank weight ``(i + 1)**alpha``.
    """
    try:
        alpha, q = float(alpha), float(q)
    except (TypeError, ValueError):
        raise ParameterError(f"alpha/q must be real, got {alpha!r}, {q!r}") from None
    if not (math.isfinite(alpha) and alpha > 0):
        raise ParameterError(f"alpha must be a positive finite real, got {alpha!r}")
    if not q > 0 or math.isnan(q):
        raise ParameterError(f"q must be positive (math.inf allowed), got {q!r}")
    values = np.asarray(curve, dtype=float).ravel()
    if values.size and (not np.all(np.isfinite(values)) or np.any(values < 0)):
        raise ParameterError("curve values must be finite and nonnegative")
    if values.size == 0:
        return float(base_norm)
    ranks = np.arange(1, values.size + 1, dtype=float)
    if math.isinf(q):
        curve_part = float(np.max(ranks**alpha * values))
    else:
        terms = (ranks**alpha * values) ** q / ranks
        total = math.fsum(terms) if values.size > _FSUM_THRESHOLD else float(np.sum(terms))
        curve_part = total ** (1.0 / q)
    return curve_part + float(base_norm)
