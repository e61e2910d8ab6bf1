"""Closed-form solution pairs used as validation fixtures."""

import numpy as np

from ..errors import UnknownName
from .lift import C3Point, MeshPatch


def linear(x, y, alpha=0.0, beta=0.0, gamma=0.0):
    """``u = alpha x + beta``, ``v = alpha y + gamma``: a solution for every a."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    return alpha * x + beta, alpha * y + gamma


def catenoid(x, y):
    """Global a = 0 solution without singular points."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    return y * np.tanh(x), 0.5 * y * y / np.cosh(x) ** 2 - 0.5 * np.cosh(x) ** 2


def catenoid_potential(x, y):
    """``f`` with ``f_y = u`` and ``f_x = v`` for :func:`catenoid`."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    return 0.5 * y * y * np.tanh(x) - x / 4 - np.sinh(2 * x) / 8


def twosheet(x, y):
    """a = 0 solution singular along the whole x-axis (two planes meeting in a curve)."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    return np.abs(y) - 0.5 * np.cosh(2 * x), -y * np.sinh(2 * x)


def harvey_lawson(x, y, a=0.0):
    """The U(1)^2-invariant family written as a pair at moment level ``a >= 0``.

    With ``w = u^2`` the defining relations reduce to
    ``w^2 + (x^2 + 2a) w - y^2 = 0``; then ``u = -sign(y) sqrt(w)`` and
    ``v = x sqrt(x^2 + w + 2a)``.
    """
    x, y = np.asarray(x, float), np.asarray(y, float)
    p = x * x + 2 * a
    # stable positive root of w^2 + p w - y^2 = 0
    q = np.sqrt(p * p + 4 * y * y)
    w = np.where(p > 0, 2 * y * y / np.where(p > 0, p + q, 1.0), (q - p) / 2)
    return -np.sign(y) * np.sqrt(w), x * np.sqrt(x * x + w + 2 * a)


_NAMES = {
    "linear": linear,
    "catenoid": catenoid,
    "twosheet": twosheet,
    "harvey-lawson": harvey_lawson,
}


def analytic_example(name, x, y, **params):
    """Evaluate a named closed-form pair; returns ``(u, v)``."""
    try:
        fn = _NAMES[name]
    except KeyError:
        raise UnknownName(f"unknown example {name!r}; choose from {sorted(_NAMES)}") from None
    return fn(x, y, **params)


def example_names():
    return sorted(_NAMES)


def sampler_hl_arrays(a, r, t2, t3):
    r, t2, t3 = np.broadcast_arrays(*(np.asarray(t, float) for t in (r, t2, t3)))
    z2 = r * np.exp(1j * t2)
    z3 = r * np.exp(1j * t3)
    z1 = np.sqrt(r * r + 2 * a) * np.exp(-1j * (t2 + t3))
    return z1, z2, z3


def sampler_hl(a, r, theta2, theta3) -> C3Point:
    """Point of the level-``a`` member: ``|z1|^2 - 2a = |z2|^2 = |z3|^2``, ``z1 z2 z3`` real >= 0."""
    if a < 0:
        raise ValueError("sampler_hl needs a >= 0")
    z1, z2, z3 = sampler_hl_arrays(a, r, theta2, theta3)
    return C3Point(complex(z1), complex(z2), complex(z3))


def hl_patch(a, r_values, n_theta=16):
    """Structured patch over ``(r, theta2, theta3)``, both angles periodic."""
    r = np.asarray(r_values, float)
    th = 2 * np.pi * np.arange(n_theta) / n_theta
    R, T2, T3 = np.meshgrid(r, th, th, indexing="ij")
    pts = np.stack(sampler_hl_arrays(a, R, T2, T3), axis=-1)
    step = 2 * np.pi / n_theta
    return MeshPatch(pts, (r[1] - r[0], step, step), (False, True, True), (r, th, th), {"a": float(a)})
