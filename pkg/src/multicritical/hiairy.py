"""Higher-order Airy functions and their derivatives.

For an integer order ``p >= 2`` the functions are defined by contour
integrals of ``exp(c x^{p+1}/(p+1) - x z)`` over contours running between
valleys of the polynomial phase.  Every contour is a union of rays through
the origin, each aligned with a direction of steepest descent of the leading
term, so the integrand decays like ``exp(-r^{p+1}/(p+1))`` along each ray.
The ray integrals are computed with vectorised adaptive Gauss-Kronrod
quadrature (``scipy.integrate.quad_vec``), evaluating all requested
derivatives at all requested arguments in a single pass.

Conventions
-----------
* ``Ai_p`` is real and bounded on the real line.  For even ``p = 2n`` it
  solves ``(-1)^(n-1) f^(p) = z f``; for odd ``p = 2n - 1`` it is even and
  solves ``(-1)^n f^(p) = z f``.
* ``Ait_p`` (written ``ai_tilde``) exists for odd ``p`` only.  It is odd,
  grows on both sides and solves ``(-1)^(n-1) f^(p) = z f``.  For even ``p``
  it is identified with ``Ai_p``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad_vec

__all__ = [
    "AiryEvalConfig",
    "ConvergenceError",
    "WavePair",
    "ai",
    "ai_tilde",
    "ai_derivatives",
    "ai_asymptotic",
    "ode_sign",
    "ode_residual",
    "scaled_wave",
    "kernel_pair",
]

# Decay (in e-folds) demanded of the integrand at the truncation radius.
_TAIL_EFOLDS = 42.0


class ConvergenceError(RuntimeError):
    """Raised when a numerical routine cannot meet its requested tolerance."""


@dataclass(frozen=True)
class AiryEvalConfig:
    """Accuracy and routing options for higher Airy evaluation.

    Attributes
    ----------
    abs_tol, rel_tol:
        Target error of the ray quadrature.
    asymptotic_switch:
        For scalar, underived evaluation (``k == 0``) at ``|z|`` at or
        beyond this radius the leading-order asymptotic form is returned
        when quadrature fails to converge.  Derivatives and the vectorised
        path always use quadrature.
    rotation_angle:
        Angle by which the even-order contour is rotated off the imaginary
        axis.  Must lie in ``(0, pi/(p+1))``; ``None`` selects the
        steepest-descent value ``pi/(2(p+1))``.  Even orders at ``z < 0``
        ignore it and integrate through the real saddle instead.
    """

    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    asymptotic_switch: float = 12.0
    rotation_angle: float | None = None


_DEFAULT = AiryEvalConfig()


def _check_order(order: int) -> None:
    if not isinstance(order, (int, np.integer)) or order < 2:
        raise ValueError(f"order must be an integer >= 2, got {order!r}")


def _half_index(order: int) -> int:
    """Return ``n`` with ``order = 2n`` (even) or ``order = 2n - 1`` (odd)."""
    return order // 2 if order % 2 == 0 else (order + 1) // 2


def ode_sign(order: int, tilde: bool = False) -> int:
    """Sign ``c`` in the ordinary differential equation ``c f^(p) = z f``.

    Examples
    --------
    >>> ode_sign(2), ode_sign(3), ode_sign(3, tilde=True), ode_sign(4)
    (1, 1, -1, -1)
    """
    _check_order(order)
    n = _half_index(order)
    if order % 2 == 0:
        return (-1) ** (n - 1)
    return (-1) ** (n - 1) if tilde else (-1) ** n


_CHUNK = 64


def _ray_integral(
    order: int,
    z: np.ndarray,
    kmax: int,
    angle: float,
    phase_sign: int,
    cfg: AiryEvalConfig,
) -> np.ndarray:
    """Integrate ``(-x)^k exp(c x^{p+1}/(p+1) - x z) dx`` along ``x = r e^{i angle}``.

    Returns a complex array of shape ``(kmax + 1, len(z))``.  Arguments are
    processed in sorted chunks so that each chunk gets its own truncation
    radius and adaptive subdivision.
    """
    if z.size <= _CHUNK:
        return _ray_integral_block(order, z, kmax, angle, phase_sign, cfg)
    order_idx = np.argsort(z, kind="stable")
    out = np.empty((kmax + 1, z.size), dtype=complex)
    for start in range(0, z.size, _CHUNK):
        idx = order_idx[start : start + _CHUNK]
        out[:, idx] = _ray_integral_block(order, z[idx], kmax, angle, phase_sign, cfg)
    return out


def _ray_integral_block(
    order: int,
    z: np.ndarray,
    kmax: int,
    angle: float,
    phase_sign: int,
    cfg: AiryEvalConfig,
) -> np.ndarray:
    direction = np.exp(1j * angle)
    powers = np.arange(kmax + 1)
    zmax = float(np.max(np.abs(z))) if z.size else 0.0

    radius = 1.0
    while (
        radius ** (order + 1) / (order + 1)
        - radius * zmax
        - kmax * math.log1p(radius)
        < _TAIL_EFOLDS
    ):
        radius *= 1.15

    n_out = (kmax + 1) * z.size

    def integrand(r: float) -> np.ndarray:
        x = r * direction
        base = np.exp(phase_sign * x ** (order + 1) / (order + 1) - x * z) * direction
        vals = ((-x) ** powers)[:, None] * base[None, :]
        return np.concatenate([vals.real.ravel(), vals.imag.ravel()])

    val, err = quad_vec(
        integrand,
        0.0,
        radius,
        epsabs=0.1 * cfg.abs_tol,
        epsrel=0.1 * cfg.rel_tol,
        limit=4000,
        norm="max",
    )
    scale = float(np.max(np.abs(val))) if val.size else 0.0
    if not np.all(np.isfinite(val)) or err > max(cfg.abs_tol, cfg.rel_tol * scale):
        raise ConvergenceError(
            f"ray quadrature for order {order} did not converge "
            f"(error estimate {err:.3e})"
        )
    return (val[:n_out] + 1j * val[n_out:]).reshape(kmax + 1, z.size)


def _saddle_integral(order: int, z: np.ndarray, kmax: int, cfg: AiryEvalConfig) -> np.ndarray:
    """``(1/pi) Re int_0^inf (i x)^k exp(i S(x)) dx`` with ``S = x^{p+1}/(p+1) + x z``, even ``p``, ``z < 0``.

    The contour runs along the real axis to the saddle ``x0 = |z|^{1/p}`` and
    leaves it at angle ``pi/(2(p+1))``, where ``Im S`` grows monotonically;
    unlike a fixed ray from the origin, the integrand never exceeds ``x^k``.
    Returns a real array of shape ``(kmax + 1, len(z))``.
    """
    if z.size > _CHUNK:
        order_idx = np.argsort(z, kind="stable")
        out = np.empty((kmax + 1, z.size))
        for start in range(0, z.size, _CHUNK):
            idx = order_idx[start : start + _CHUNK]
            out[:, idx] = _saddle_integral(order, z[idx], kmax, cfg)
        return out
    p1 = order + 1
    x0 = np.abs(z) ** (1.0 / order)
    phi = 0.5 * math.pi / p1
    direction = np.exp(1j * phi)
    radius = np.empty_like(x0)
    for i, a in enumerate(x0):
        r = 1.0
        while r**p1 / p1 - kmax * math.log1p(a + r) < _TAIL_EFOLDS:
            r *= 1.15
        radius[i] = r
    powers = np.arange(kmax + 1)

    def phase(x):
        return np.exp(1j * (x**p1 / p1 + x * z))

    def leg_real(tau: float) -> np.ndarray:
        x = x0 * tau
        vals = ((1j * x)[None, :] ** powers[:, None]) * (phase(x) * x0)[None, :]
        return vals.real.ravel()

    def leg_out(tau: float) -> np.ndarray:
        x = x0 + radius * tau * direction
        vals = ((1j * x)[None, :] ** powers[:, None]) * (phase(x) * radius * direction)[None, :]
        return vals.real.ravel()

    total = np.zeros((kmax + 1) * z.size)
    for leg, limit in ((leg_real, 4000), (leg_out, 4000)):
        val, err = quad_vec(
            leg, 0.0, 1.0, epsabs=0.05 * cfg.abs_tol, epsrel=0.05 * cfg.rel_tol, limit=limit, norm="max"
        )
        scale = float(np.max(np.abs(val))) if val.size else 0.0
        if not np.all(np.isfinite(val)) or err > max(0.5 * cfg.abs_tol, cfg.rel_tol * scale):
            raise ConvergenceError(
                f"saddle-contour quadrature for order {order} did not converge (error estimate {err:.3e})"
            )
        total += val
    return total.reshape(kmax + 1, z.size) / math.pi


def _ai_angle(order: int, cfg: AiryEvalConfig) -> float:
    if order % 2 == 1:
        return 0.5 * math.pi
    limit = math.pi / (order + 1)
    rot = 0.5 * limit if cfg.rotation_angle is None else cfg.rotation_angle
    if not 0.0 < rot < limit:
        raise ValueError(f"rotation_angle must lie in (0, {limit:.6f}) for order {order}")
    return 0.5 * math.pi - rot


def ai_derivatives(
    order: int,
    z: np.ndarray | float,
    kmax: int = 0,
    tilde: bool = False,
    config: AiryEvalConfig | None = None,
) -> np.ndarray:
    """Evaluate ``f^(k)(z)`` for ``k = 0..kmax`` at every real ``z`` by quadrature.

    Parameters
    ----------
    order:
        Order ``p >= 2``.
    z:
        Real argument(s).
    kmax:
        Highest derivative requested.
    tilde:
        Evaluate the unbounded odd companion instead of ``Ai_p`` (odd orders
        only; for even orders this is ``Ai_p`` itself).

    Returns
    -------
    numpy.ndarray
        Real array of shape ``(kmax + 1, len(z))``.
    """
    _check_order(order)
    if kmax < 0:
        raise ValueError("derivative order must be non-negative")
    cfg = config or _DEFAULT
    zz = np.atleast_1d(np.asarray(z, dtype=float))
    if not np.all(np.isfinite(zz)):
        raise ValueError("arguments must be finite reals")
    n = _half_index(order)

    if tilde and order % 2 == 1:
        # Four rays: in along angle phi and out along pi - phi, plus mirrors.
        phase_sign = (-1) ** n
        phi = 0.5 * math.pi - math.pi / (order + 1)
        inner = _ray_integral(order, zz, kmax, phi, phase_sign, cfg)
        outer = _ray_integral(order, zz, kmax, math.pi - phi, phase_sign, cfg)
        return (inner.imag - outer.imag) / math.pi

    phase_sign = (-1) ** (n - 1)
    if order % 2 == 0 and np.any(zz < 0):
        # Oscillatory side: a fixed ray would pass exponentially large values.
        out = np.empty((kmax + 1, zz.size))
        neg = zz < 0
        out[:, neg] = _saddle_integral(order, zz[neg], kmax, cfg)
        if np.any(~neg):
            out[:, ~neg] = _ray_integral(order, zz[~neg], kmax, _ai_angle(order, cfg), phase_sign, cfg).imag / math.pi
        return out
    vals = _ray_integral(order, zz, kmax, _ai_angle(order, cfg), phase_sign, cfg)
    return vals.imag / math.pi


def _scalar(order: int, z: float, k: int, tilde: bool, cfg: AiryEvalConfig) -> float:
    if not np.isfinite(z):
        raise ValueError("argument must be a finite real")
    if k < 0:
        raise ValueError("derivative order must be non-negative")
    try:
        return float(ai_derivatives(order, z, k, tilde, cfg)[k, 0])
    except ConvergenceError:
        # The leading-order form is only a last resort: it is off by percents near nodes.
        if k != 0 or abs(z) < cfg.asymptotic_switch:
            raise
    side = "pos" if z > 0 else "neg"
    if tilde and order % 2 == 1:
        return ai_asymptotic(order, z, "Ait_" + side)
    return ai_asymptotic(order, z, "Ai_" + side)


def ai(order: int, z: float, k: int = 0, config: AiryEvalConfig | None = None) -> float:
    """Return ``Ai_p^(k)(z)``.

    >>> round(ai(2, 0.0), 12)  # classical Airy: 3^(-2/3) / Gamma(2/3)
    0.355028053888
    """
    _check_order(order)
    return _scalar(order, float(z), k, False, config or _DEFAULT)


def ai_tilde(order: int, z: float, k: int = 0, config: AiryEvalConfig | None = None) -> float:
    """Return the ``k``-th derivative of the odd, unbounded companion of ``Ai_p``.

    For even ``order`` this coincides with :func:`ai`.
    """
    _check_order(order)
    return _scalar(order, float(z), k, True, config or _DEFAULT)


def ai_asymptotic(order: int, z: float, which: str) -> float:
    """Leading-order large-``|z|`` form.

    ``which`` is one of ``"Ai_pos"``, ``"Ai_neg"``, ``"Ait_pos"``,
    ``"Ait_neg"``; the suffix selects the side of the real axis and must agree
    with the sign of ``z``.  For even orders the positive-side formula sums
    two saddle contributions; at ``p = 2`` the two saddles coincide and the
    formula is twice the classical Airy tail.
    """
    _check_order(order)
    z = float(z)
    if which not in ("Ai_pos", "Ai_neg", "Ait_pos", "Ait_neg"):
        raise ValueError(f"unknown branch {which!r}")
    if which.endswith("pos") != (z > 0) or z == 0.0:
        raise ValueError(f"branch {which!r} does not match the sign of z={z}")
    p = order
    a = abs(z)
    pref = math.sqrt(2.0 / (p * math.pi)) * a ** (-0.5 + 0.5 / p)
    w = p / (p + 1.0) * a ** (1.0 + 1.0 / p)

    if which.startswith("Ait"):
        if p % 2 == 0:
            return ai_asymptotic(p, z, "Ai_" + which[-3:])
        half = math.pi / (2 * p)
        val = -pref * math.exp(w * math.sin(half)) * math.cos(
            w * math.cos(half) - 0.25 * math.pi - 0.5 * half
        )
        return val if z > 0 else -val

    if p % 2 == 1:
        half = math.pi / (2 * p)
        return pref * math.exp(-w * math.sin(half)) * math.cos(
            w * math.cos(half) - 0.25 * math.pi + 0.5 * half
        )
    if z > 0:
        ang = math.pi / p
        return pref * math.exp(-w * math.sin(ang)) * math.cos(
            w * math.cos(ang) - 0.25 * math.pi + 0.5 * ang
        )
    return pref * math.cos(w - 0.25 * math.pi)


def ode_residual(
    order: int,
    z: np.ndarray | float,
    tilde: bool = False,
    config: AiryEvalConfig | None = None,
) -> np.ndarray:
    """Scaled residual ``|c f^(p) - z f| / max(1, |f|, |f^(p)|)`` of the defining equation."""
    vals = ai_derivatives(order, z, order, tilde, config)
    zz = np.atleast_1d(np.asarray(z, dtype=float))
    c = ode_sign(order, tilde)
    scale = np.maximum(1.0, np.maximum(np.abs(vals[0]), np.abs(vals[order])))
    return np.abs(c * vals[order] - zz * vals[0]) / scale


@dataclass(frozen=True)
class WavePair:
    """Two wave functions together with derivative evaluators.

    ``phi_kind`` and ``psi_kind`` are ``"Ai"`` or ``"Ait"``; ``reflect`` is
    ``-1`` when the argument is mirrored.  ``sign`` is the constant ``c`` in
    ``phi^(p) = c x phi`` and ``(-1)^p psi^(p) = c x psi``.
    """

    order: int
    phi_kind: str
    psi_kind: str
    reflect: int
    sign: int

    def _eval(self, kind: str, x: np.ndarray | float, kmax: int, cfg) -> np.ndarray:
        xx = np.atleast_1d(np.asarray(x, dtype=float))
        vals = ai_derivatives(self.order, self.reflect * xx, kmax, kind == "Ait", cfg)
        if self.reflect == -1:
            vals = vals * ((-1.0) ** np.arange(kmax + 1))[:, None]
        return vals

    def phi(self, x, kmax: int = 0, config: AiryEvalConfig | None = None) -> np.ndarray:
        """Derivatives ``phi^(k)(x)``, ``k = 0..kmax``, shape ``(kmax+1, n)``."""
        return self._eval(self.phi_kind, x, kmax, config)

    def psi(self, x, kmax: int = 0, config: AiryEvalConfig | None = None) -> np.ndarray:
        """Derivatives ``psi^(k)(x)``, ``k = 0..kmax``, shape ``(kmax+1, n)``."""
        return self._eval(self.psi_kind, x, kmax, config)

    @property
    def functions(self) -> tuple[Callable[[float], float], Callable[[float], float]]:
        """Scalar callables ``(phi, psi)``."""
        return (
            lambda x: float(self.phi(x)[0, 0]),
            lambda x: float(self.psi(x)[0, 0]),
        )


def scaled_wave(order: int) -> WavePair:
    """Wave pair normalised so that ``phi^(p) = x phi`` and ``(-1)^p psi^(p) = x psi``.

    * ``p = 2n``: ``phi = psi = Ai_p((-1)^(n-1) x)``;
    * ``p = 4n - 1``: ``(phi, psi) = (Ai_p, Ait_p)``;
    * ``p = 4n - 3``: ``(phi, psi) = (Ait_p, Ai_p)``.

    For ``p = 0 mod 4`` the reflection moves the decaying side of ``Ai_p`` to
    negative arguments; :func:`kernel_pair` gives the variant used for gap
    probabilities.
    """
    _check_order(order)
    n = _half_index(order)
    if order % 2 == 0:
        return WavePair(order, "Ai", "Ai", (-1) ** (n - 1), 1)
    if order % 4 == 3:
        return WavePair(order, "Ai", "Ait", 1, 1)
    return WavePair(order, "Ait", "Ai", 1, 1)


def kernel_pair(order: int) -> WavePair:
    """Wave pair that builds the limiting correlation kernel.

    Even orders use the unreflected, decaying ``Ai_p`` for both slots and
    carry the sign of its differential equation; odd orders coincide with
    :func:`scaled_wave`.
    """
    _check_order(order)
    if order % 2 == 0:
        return WavePair(order, "Ai", "Ai", 1, ode_sign(order))
    return scaled_wave(order)
