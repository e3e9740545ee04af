"""Limiting multicritical correlation kernels.

For a wave pair ``(f, g)`` with ``f^(p) = c x f`` and ``(-1)^p g^(p) = c x g``
the kernel is the formal integral ``int_0^inf f(x+z) g(y+z) dz``.  It is
evaluated in closed (Christoffel-Darboux) form

    K(x, y) = c / (x - y) * sum_{k=1}^{p} (-1)^k f^(p-k)(x) g^(k-1)(y),

and on the diagonal by its limit

    K(x, x) = -x f g - c * sum_{k=1}^{p-1} (-1)^k f^(p-k) g^(k).

For ``p = 2`` this is the Airy kernel and for ``p = 3`` the Pearcey-type
cusp kernel built from ``Ai_3`` and its odd companion.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import roots_legendre

from .hiairy import AiryEvalConfig, kernel_pair

__all__ = [
    "DIAGONAL_THRESHOLD",
    "WaveTable",
    "eval_kernel",
    "diag",
    "kernel_matrix",
    "density_asymptotic",
    "check_identities",
    "projectivity_residual",
]

# Below this separation the diagonal formula replaces the divided difference.
DIAGONAL_THRESHOLD = 1e-6


class WaveTable:
    """Derivatives ``f^(k)``, ``g^(k)`` (``k = 0..p``) tabulated at fixed points."""

    def __init__(self, order: int, points: np.ndarray, config: AiryEvalConfig | None = None):
        self.order = order
        self.pair = kernel_pair(order)
        self.sign = self.pair.sign
        self.points = np.atleast_1d(np.asarray(points, dtype=float))
        self.f = self.pair.phi(self.points, order, config)
        if self.pair.psi_kind == self.pair.phi_kind:
            self.g = self.f
        else:
            self.g = self.pair.psi(self.points, order, config)

    def numerator(self, i: np.ndarray, j: np.ndarray) -> np.ndarray:
        """``c * sum_k (-1)^k f^(p-k)(x_i) g^(k-1)(y_j)`` as an outer array."""
        p = self.order
        out = np.zeros((i.size, j.size))
        for k in range(1, p + 1):
            out += (-1) ** k * np.outer(self.f[p - k, i], self.g[k - 1, j])
        return self.sign * out

    def diagonal(self, i: np.ndarray) -> np.ndarray:
        p = self.order
        x = self.points[i]
        acc = np.zeros(i.size)
        for k in range(1, p):
            acc += (-1) ** k * self.f[p - k, i] * self.g[k, i]
        return -x * self.f[0, i] * self.g[0, i] - self.sign * acc

    def matrix(self, rows: np.ndarray | None = None, cols: np.ndarray | None = None) -> np.ndarray:
        """Kernel values ``K(x_i, x_j)`` for the tabulated points."""
        n = self.points.size
        rows = np.arange(n) if rows is None else np.asarray(rows)
        cols = np.arange(n) if cols is None else np.asarray(cols)
        x = self.points[rows][:, None]
        y = self.points[cols][None, :]
        diff = x - y
        num = self.numerator(rows, cols)
        near = np.abs(diff) < DIAGONAL_THRESHOLD
        safe = np.where(near, 1.0, diff)
        out = num / safe
        if np.any(near):
            ri, ci = np.nonzero(near)
            # Points closer than the threshold: use the diagonal value at the midpoint row.
            out[ri, ci] = self.diagonal(rows[ri])
        return out


def eval_kernel(order: int, x: float, y: float, config: AiryEvalConfig | None = None) -> float:
    """Return ``K_p(x, y)``.

    When ``|x - y|`` is below :data:`DIAGONAL_THRESHOLD` the diagonal formula
    is used at the midpoint.

    >>> round(eval_kernel(2, 0.3, 0.3), 10) == round(diag(2, 0.3), 10)
    True
    """
    x, y = float(x), float(y)
    if not (math.isfinite(x) and math.isfinite(y)):
        raise ValueError("kernel arguments must be finite")
    if abs(x - y) < DIAGONAL_THRESHOLD:
        return diag(order, 0.5 * (x + y), config)
    table = WaveTable(order, np.array([x, y]), config)
    return float(table.numerator(np.array([0]), np.array([1]))[0, 0] / (x - y))


def diag(order: int, x: float, config: AiryEvalConfig | None = None) -> float:
    """Return the one-point density ``K_p(x, x)``."""
    x = float(x)
    if not math.isfinite(x):
        raise ValueError("argument must be finite")
    table = WaveTable(order, np.array([x]), config)
    return float(table.diagonal(np.array([0]))[0])


def kernel_matrix(
    order: int,
    xs: np.ndarray,
    ys: np.ndarray | None = None,
    config: AiryEvalConfig | None = None,
) -> np.ndarray:
    """Kernel values on a product grid ``K(xs[i], ys[j])``."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    if ys is None:
        return WaveTable(order, xs, config).matrix()
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    table = WaveTable(order, np.concatenate([xs, ys]), config)
    n = xs.size
    return table.matrix(np.arange(n), np.arange(n, n + ys.size))


def density_asymptotic(order: int, x: float) -> float:
    """Large-``|x|`` form of the one-point density, including the first oscillatory term.

    Even orders have separate branches for ``x -> +inf`` (exponentially
    small) and ``x -> -inf`` (growing like ``|x|^(1/p)``); odd orders share a
    single symmetric branch.
    """
    p = int(order)
    x = float(x)
    if x == 0.0 or not math.isfinite(x):
        raise ValueError("asymptotic density needs a finite nonzero argument")
    a = abs(x)
    phase = 2.0 * p / (p + 1.0) * a ** (1.0 + 1.0 / p)
    if p % 2 == 1:
        c = math.cos(math.pi / (2 * p))
        return c * a ** (1.0 / p) / math.pi - math.cos(c * phase) / (2 * p * math.pi * c * a)
    if x < 0:
        return a ** (1.0 / p) / math.pi - math.cos(phase) / (2 * p * math.pi * a)
    s = math.sin(math.pi / p)
    return (
        math.exp(-s * phase)
        / (2 * p * math.pi * a)
        * (1.0 / s + math.cos(math.cos(math.pi / p) * phase))
    )


def check_identities(order: int, points: np.ndarray, config: AiryEvalConfig | None = None) -> dict:
    """Residuals of the structural kernel identities at the given points.

    Returns a dictionary with

    * ``diagonal_sum``: ``|sum_k (-1)^k f^(p-k)(x) g^(k-1)(x)|`` (must vanish);
    * ``derivative``: relative error of a central difference of ``K(x, x)``
      against ``-f(x) g(x)``;
    * ``parity`` (odd orders): ``max |K(x, y) - K(-x, -y)|`` over pairs of
      the given points.
    """
    pts = np.atleast_1d(np.asarray(points, dtype=float))
    h = 1e-4
    table = WaveTable(order, np.concatenate([pts, pts + h, pts - h, pts + 2 * h, pts - 2 * h]), config)
    n = pts.size
    idx = np.arange(n)
    diag_sum = np.abs(np.diag(table.numerator(idx, idx)))
    d = table.diagonal(np.arange(5 * n)).reshape(5, n)
    fd = (8.0 * (d[1] - d[2]) - (d[3] - d[4])) / (12.0 * h)
    exact = -table.f[0, idx] * table.g[0, idx]
    deriv = np.abs(fd - exact) / np.maximum(1.0, np.abs(exact))
    out = {"diagonal_sum": float(np.max(diag_sum)), "derivative": float(np.max(deriv))}
    if order % 2 == 1:
        k_plus = kernel_matrix(order, pts)
        k_minus = kernel_matrix(order, -pts)
        out["parity"] = float(np.max(np.abs(k_plus - k_minus)))
    return out


def projectivity_residual(
    order: int, x: float, y: float, T: float, nodes: int | None = None, config: AiryEvalConfig | None = None
) -> float:
    """``|int_{-T}^{T} K(x, z) K(z, y) dz - K(x, y)|`` for even ``p``.

    Gauss-Legendre on ``[-T, T]`` with enough nodes to resolve the
    oscillation of the wave functions at ``-T`` (about ``T^(1/p)`` per unit).
    Odd orders are refused: their kernel decays too slowly for a truncated
    check to mean anything.
    """
    if order % 2 == 1:
        raise ValueError("truncated projectivity is only meaningful for even orders")
    if nodes is None:
        nodes = int(6 * T * (1.0 + T ** (1.0 / order))) + 64
    z, w = roots_legendre(nodes)
    z, w = T * z, T * w
    table = WaveTable(order, np.concatenate([[x, y], z]), config)
    zi = np.arange(2, 2 + nodes)
    left = table.matrix(np.array([0]), zi)[0]
    right = table.matrix(zi, np.array([1]))[:, 0]
    direct = table.matrix(np.array([0]), np.array([1]))[0, 0]
    return float(abs(np.sum(w * left * right) - direct))
