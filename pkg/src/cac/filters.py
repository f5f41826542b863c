"""Smooth low-pass filters used to localize the Hermite kernel.

A filter ``H`` maps a nonnegative frequency ratio ``t`` to a weight in
``[0, 1]``.  It equals 1 on ``[0, 1/2]``, 0 on ``[1, inf)``, and decreases
smoothly in between, so truncating a projection sum with weights
``H(sqrt(m)/n)`` keeps low degrees intact and rolls the high ones off
without ringing.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["FilterH", "DEFAULT_FILTER"]


def _bump(v):
    """exp(-a/v) extended by 0 at v <= 0, evaluated with a = 1 (see caller)."""
    out = np.zeros_like(v)
    pos = v > 0.0
    out[pos] = np.exp(-1.0 / v[pos])
    return out


@dataclass(frozen=True)
class FilterH:
    """Infinitely smooth cutoff built from the classic bump-function quotient.

    On the transition band ``t in (1/2, 1)`` let ``u = 2 t - 1`` (so ``u``
    runs over ``(0, 1)``) and set::

        H(t) = f(1 - u) / (f(u) + f(1 - u)),   f(v) = exp(-gain / v)

    which is C-infinity, strictly decreasing on the band, and glues flatly
    to the constant pieces on either side.  ``gain`` shapes the roll-off:
    small values descend early and gently, which suppresses the oscillatory
    sidelobes of the localized kernel far better than steep profiles do.
    The default 0.15 was chosen by scanning the far-field decay of the
    kernel over several degrees and picking the profile with the smallest
    worst-case tail ratio.
    """

    gain: float = 0.15

    def __post_init__(self):
        if not (self.gain > 0.0 and math.isfinite(self.gain)):
            raise ValueError(f"filter gain must be positive and finite, got {self.gain!r}")

    def __call__(self, t):
        """Evaluate at ``t`` (scalar or array, any value >= 0)."""
        arr = np.asarray(t, dtype=float)
        if np.any(arr < 0.0):
            raise ValueError("filter argument must be nonnegative")
        u = 2.0 * np.atleast_1d(arr) - 1.0
        lo = _bump(u / self.gain)
        hi = _bump((1.0 - u) / self.gain)
        with np.errstate(invalid="ignore"):
            mid = hi / (lo + hi)
        out = np.where(u <= 0.0, 1.0, np.where(u >= 1.0, 0.0, mid))
        if arr.ndim == 0:
            return float(out[0])
        return out.reshape(arr.shape)


DEFAULT_FILTER = FilterH()

