"""Winding numbers of planar vector fields along closed contours."""

from dataclasses import dataclass, field

import numpy as np

from ..errors import UnderResolved, ZeroOnContour

MIN_SAMPLES = 64
MAX_INCREMENT = np.pi / 2
ROUNDING_RESIDUE = 0.1


@dataclass(frozen=True)
class LoopSamples:
    """Values ``w1 + i w2`` of a field along a positively oriented closed contour.

    The last sample is joined back to the first; do not repeat it.
    """

    w: np.ndarray
    contour: dict = field(default_factory=dict)

    def __post_init__(self):
        w = np.asarray(self.w)
        if w.ndim == 2 and w.shape[1] == 2:
            w = w[:, 0] + 1j * w[:, 1]
        w = w.astype(complex)
        if w.size < MIN_SAMPLES:
            raise ValueError(f"a loop needs at least {MIN_SAMPLES} samples, got {w.size}")
        object.__setattr__(self, "w", w)

    def increments(self):
        return np.angle(np.roll(self.w, -1) / self.w)


def winding_number(loop: LoopSamples, zero_tol=0.0) -> int:
    """Sum of principal-value angle increments over 2 pi, rounded to an integer."""
    mag = np.abs(loop.w)
    if np.any(mag <= zero_tol):
        raise ZeroOnContour(f"field vanishes on the contour (min |w| = {mag.min():.3g})")
    inc = loop.increments()
    worst = float(np.max(np.abs(inc)))
    if worst >= MAX_INCREMENT:
        raise UnderResolved(f"angular increment {worst:.3f} >= pi/2")
    total = inc.sum() / (2 * np.pi)
    k = int(np.rint(total))
    if abs(total - k) >= ROUNDING_RESIDUE:
        raise UnderResolved(f"winding {total:.4f} is not near an integer")
    return k


def contour_winding(field_fn, gamma, n0=MIN_SAMPLES, max_samples=1 << 15, zero_tol=None,
                    contour=None):
    """Adaptive winding number of ``field_fn(x, y) -> complex`` along ``gamma(t)``, t in [0, 1).

    Starts from ``n0`` uniform parameters (plus any corner parameters in
    ``gamma.breaks``) and bisects every interval whose angular increment is
    at least pi/2, until none remain.  Returns ``(k, samples)``.
    """
    t = np.unique(np.concatenate([np.arange(n0) / n0, getattr(gamma, "breaks", [])]))
    w = np.asarray(field_fn(*gamma(t)), dtype=complex)
    while True:
        scale = float(np.max(np.abs(w)))
        tol = (1e-13 * scale if zero_tol is None else zero_tol)
        if scale == 0 or np.any(np.abs(w) <= tol):
            raise ZeroOnContour(f"field vanishes on the contour (min |w| = {np.abs(w).min():.3g})")
        inc = np.angle(np.roll(w, -1) / w)
        bad = np.flatnonzero(np.abs(inc) >= MAX_INCREMENT * 0.999)
        if bad.size == 0:
            break
        if t.size + bad.size > max_samples:
            raise UnderResolved(f"contour still under-resolved with {t.size} samples")
        t_next = np.append(t[1:], 1.0)
        mids = 0.5 * (t[bad] + t_next[bad])
        w_mid = np.asarray(field_fn(*gamma(mids)), dtype=complex)
        order = np.argsort(np.concatenate([t, mids]), kind="stable")
        t = np.concatenate([t, mids])[order]
        w = np.concatenate([w, w_mid])[order]
    loop = LoopSamples(w, contour or {})
    return winding_number(loop, zero_tol=tol), loop
