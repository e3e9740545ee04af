"""Nonlinear ordinary differential equations for the dressed wave functions.

Single half line ``[s, inf)``
    The endpoint values ``q_k = q_k(s)``, ``p_k = p_k(s)`` (``k < p``) and
    the pairings ``u_k``, ``v_k`` obey the closed first-order system

        q_k' = q_{k+1} - u_k q_0,       p_k' = p_{k+1} - v_k p_0,
        u_k' = -p_0 q_k,                v_k' = -q_0 p_k,

    where ``q_p`` and ``p_p`` are eliminated by the lowering relations.  It is
    integrated backwards from a large ``s0`` where the resolvent is
    negligible.  Eliminating the pairings with the integrals of motion gives
    a single equation of order ``p`` for even ``p`` (the Painleve II
    hierarchy) and a coupled pair for odd ``p``.

Symmetric interval ``[-s, s]`` (odd ``p``)
    The endpoint quantities obey a similar system with an extra coupling
    through ``R = R(-s, s)``; relations between ``u = u_1``, ``v = v_1`` and
    their derivatives are checked against Fredholm data.

Higher derivatives needed by the residual checks are generated by Taylor-mode
differentiation of the first-order system, so a residual measures only how
well the state satisfies the integrals of motion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .fredholm import GapProbabilitySpec, IntervalSet, default_truncation, gap_probability
from .hiairy import ConvergenceError, WavePair, kernel_pair

__all__ = [
    "Jet",
    "taylor_coefficients",
    "SingleIntervalSystem",
    "ODETrajectory",
    "solve_single_interval",
    "solve_even_hierarchy",
    "solve_p3_coupled",
    "hierarchy_residual",
    "residual_coupled",
    "SpacingSystem",
    "spacing_relation_residuals",
]

BLOW_UP = 1e6


class Jet:
    """Truncated Taylor series ``sum_k c_k h^k`` with arithmetic closed under truncation."""

    __slots__ = ("c",)

    def __init__(self, coeffs):
        self.c = np.asarray(coeffs, dtype=float)

    @staticmethod
    def _coerce(other, n):
        if isinstance(other, Jet):
            return other.c[:n] if other.c.size >= n else np.pad(other.c, (0, n - other.c.size))
        out = np.zeros(n)
        out[0] = other
        return out

    def __len__(self):
        return self.c.size

    def __add__(self, other):
        return Jet(self.c + self._coerce(other, self.c.size))

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.c)

    def __sub__(self, other):
        return Jet(self.c - self._coerce(other, self.c.size))

    def __rsub__(self, other):
        return Jet(self._coerce(other, self.c.size) - self.c)

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.c * other)
        n = min(self.c.size, other.c.size)
        return Jet(np.convolve(self.c[:n], other.c[:n])[:n])

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.c / other)
        n = min(self.c.size, other.c.size)
        a, b = self.c[:n], other.c[:n]
        out = np.zeros(n)
        for k in range(n):
            out[k] = (a[k] - np.dot(out[:k], b[k:0:-1])) / b[0]
        return Jet(out)

    def __rtruediv__(self, other):
        return Jet(self._coerce(other, self.c.size)) / self

    def __pow__(self, k: int):
        out = Jet(self._coerce(1.0, self.c.size))
        for _ in range(int(k)):
            out = out * self
        return out

    def derivative(self, k: int) -> float:
        """``k``-th derivative at the expansion point."""
        return float(self.c[k] * math.factorial(k)) if k < self.c.size else 0.0


def taylor_coefficients(
    rhs: Callable[[object, Sequence], Sequence], s0: float, y0: Sequence[float], degree: int
) -> list[Jet]:
    """Taylor jets of the solution of ``y' = rhs(s, y)`` through ``(s0, y0)``.

    ``rhs`` must be written with ring operations only, so that it accepts
    :class:`Jet` arguments.
    """
    dim = len(y0)
    coeffs = np.zeros((dim, degree + 1))
    coeffs[:, 0] = y0
    for k in range(degree):
        s = Jet(np.array([s0, 1.0] + [0.0] * (k - 1))[: k + 1]) if k > 0 else Jet([s0])
        ys = [Jet(coeffs[i, : k + 1]) for i in range(dim)]
        dy = rhs(s, ys)
        for i in range(dim):
            term = dy[i].c[k] if isinstance(dy[i], Jet) else (dy[i] if k == 0 else 0.0)
            coeffs[i, k + 1] = term / (k + 1)
    return [Jet(coeffs[i]) for i in range(dim)]


@dataclass(frozen=True)
class SingleIntervalSystem:
    """First-order system for the half line ``[s, inf)``.

    State layout: ``q_0..q_{p-1}, p_0..p_{p-1}, u_0..u_{p-1}, v_0..v_{p-1}``.
    ``sign`` is the constant ``c`` in ``phi^(p) = c s phi``.
    """

    order: int
    sign: int = 1

    @property
    def dim(self) -> int:
        return 4 * self.order

    def split(self, y):
        p = self.order
        return y[:p], y[p : 2 * p], y[2 * p : 3 * p], y[3 * p : 4 * p]

    def top_q(self, s, q, v):
        p = self.order
        out = self.sign * s * q[0]
        for k in range(1, p + 1):
            out = out - (-1) ** k * q[p - k] * v[k - 1]
        return out

    def top_p(self, s, pp, u):
        p = self.order
        out = (-1) ** p * self.sign * s * pp[0]
        for k in range(1, p + 1):
            out = out - (-1) ** k * u[k - 1] * pp[p - k]
        return out

    def rhs(self, s, y):
        p = self.order
        q, pp, u, v = self.split(y)
        qn = list(q[1:]) + [self.top_q(s, q, v)]
        pn = list(pp[1:]) + [self.top_p(s, pp, u)]
        dq = [qn[k] - u[k] * q[0] for k in range(p)]
        dp = [pn[k] - v[k] * pp[0] for k in range(p)]
        du = [-pp[0] * q[k] for k in range(p)]
        dv = [-q[0] * pp[k] for k in range(p)]
        return dq + dp + du + dv

    def integrals(self, y) -> np.ndarray:
        """``I_0..I_{p-1}`` followed by ``sum_k (-1)^k q_{p-k} p_{k-1}``; all vanish on exact data."""
        p = self.order
        q, pp, u, v = self.split(np.asarray(y, dtype=float))
        out = [u[0] - v[0]]
        for l in range(1, p):
            val = u[l] - (-1) ** l * v[l]
            for k in range(1, l + 1):
                val += (-1) ** k * (u[l - k] * v[k - 1] - q[l - k] * pp[k - 1])
            out.append(val)
        out.append(sum((-1) ** k * q[p - k] * pp[k - 1] for k in range(1, p + 1)))
        return np.array(out)

    def initial_state(self, s0: float, pair: WavePair) -> np.ndarray:
        """Wave-function data at ``s0`` with pairings fixed by the integrals of motion.

        ``u_0 = v_0 = 0``; for ``l >= 1`` the combination of ``u_l`` and
        ``v_l`` appearing in ``I_l`` absorbs the remaining terms, split evenly.
        """
        p = self.order
        f = pair.phi(s0, p - 1)[:, 0]
        g = pair.psi(s0, p - 1)[:, 0]
        u = np.zeros(p)
        v = np.zeros(p)
        for l in range(1, p):
            rest = sum((-1) ** k * (u[l - k] * v[k - 1] - f[l - k] * g[k - 1]) for k in range(1, l + 1))
            u[l] = -0.5 * rest
            v[l] = -0.5 * rest if l % 2 == 1 else 0.5 * rest
        return np.concatenate([f, g, u, v])


@dataclass
class ODETrajectory:
    """Solution of the half-line system on a descending grid of ``s``.

    ``states`` has shape ``(len(s), 4p)``.  For even orders ``log_F`` holds
    ``log F(s)`` obtained from ``(log F)' = u_0``.
    """

    order: int
    sign: int
    s: np.ndarray
    states: np.ndarray
    log_F: np.ndarray | None
    rtol: float
    atol: float
    nfev: int
    message: str
    system: SingleIntervalSystem = field(repr=False, default=None)

    def q(self, k: int = 0) -> np.ndarray:
        return self.states[:, k]

    def p(self, k: int = 0) -> np.ndarray:
        return self.states[:, self.order + k]

    def u(self, k: int = 0) -> np.ndarray:
        return self.states[:, 2 * self.order + k]

    def v(self, k: int = 0) -> np.ndarray:
        return self.states[:, 3 * self.order + k]

    def integrals(self) -> np.ndarray:
        """Integrals of motion at every grid point, shape ``(len(s), p + 1)``."""
        return np.array([self.system.integrals(y) for y in self.states])

    def drift(self) -> float:
        """Largest ``|I_l(s)|`` over the grid, normalised by ``max(1, |state|)``."""
        ints = self.integrals()
        scale = np.maximum(1.0, np.max(np.abs(self.states), axis=1))
        return float(np.max(np.abs(ints) / scale[:, None]))

    def jets(self, index: int, degree: int) -> list[Jet]:
        return taylor_coefficients(self.system.rhs, float(self.s[index]), self.states[index], degree)


def solve_single_interval(
    order: int,
    s0: float,
    s_end: float,
    tol: float = 1e-10,
    n_points: int = 121,
    initial: str = "wave",
) -> ODETrajectory:
    """Integrate the half-line system from ``s0`` down to ``s_end``.

    ``initial="wave"`` starts from the bare wave functions at ``s0`` (the
    resolvent is neglected there).  ``initial="fredholm"`` (even orders only)
    takes the full endpoint state of ``[s0, inf)`` from the Nystrom
    discretisation, which allows a moderate ``s0`` when the wave functions
    decay slowly.

    Raises
    ------
    ConvergenceError
        If ``|q|`` exceeds ``1e6`` (a movable pole) or the integrator fails.
    """
    if s_end >= s0:
        raise ValueError("integration runs towards smaller s: need s_end < s0")
    if order < 2:
        raise ValueError("order must be at least 2")
    pair = kernel_pair(order)
    system = SingleIntervalSystem(order, pair.sign)
    even = order % 2 == 0
    if initial == "wave":
        y0 = system.initial_state(s0, pair)
        log_F0 = 0.0
    elif initial == "fredholm":
        if not even:
            raise ValueError("Fredholm initial data needs an even order")
        res = gap_probability(GapProbabilitySpec(order, IntervalSet.half_line(s0), tol=1e-13), with_aux=True)
        a = res.aux
        y0 = np.concatenate([a.q[:order, 0], a.p[:order, 0], a.u[:order], a.v[:order]])
        log_F0 = math.log(res.F)
    else:
        raise ValueError(f"unknown initial data {initial!r}")
    if even:
        y0 = np.append(y0, log_F0)

    def fun(s, y):
        out = np.array(system.rhs(s, y[: system.dim]))
        if even:
            out = np.append(out, y[2 * order])
        return out

    def blow_up(s, y):
        return BLOW_UP - abs(y[0])

    blow_up.terminal = True
    grid = np.linspace(s0, s_end, n_points)
    sol = solve_ivp(
        fun, (s0, s_end), y0, method="DOP853", t_eval=grid, rtol=tol, atol=tol * 1e-3,
        events=blow_up,
    )
    if sol.status == 1:
        raise ConvergenceError(f"solution blows up near s = {sol.t_events[0][0]:.6g}")
    if sol.status != 0:
        raise ConvergenceError(f"integrator failed: {sol.message}")
    states = sol.y.T
    return ODETrajectory(
        order=order,
        sign=system.sign,
        s=sol.t,
        states=states[:, : system.dim],
        log_F=states[:, -1] if even else None,
        rtol=tol,
        atol=tol * 1e-3,
        nfev=sol.nfev,
        message=sol.message,
        system=system,
    )


def solve_even_hierarchy(
    order: int,
    s0: float | None = None,
    s_end: float = -4.0,
    tol: float = 1e-10,
    n_points: int = 121,
) -> ODETrajectory:
    """Half-line system for ``p`` in ``{2, 4, 6}``; ``q`` solves the corresponding hierarchy member.

    For ``p = 2, 4`` the integration starts from the bare wave functions at
    the point where the one-point density drops below ``1e-16`` (when ``s0``
    is ``None``).  Backward integration of ``p = 6`` from that far out
    amplifies rounding errors beyond the target accuracy, so ``p = 6`` starts
    at ``s0 = 10`` (by default) from Nystrom endpoint data instead.
    """
    if order not in (2, 4, 6):
        raise ValueError("even hierarchy is provided for orders 2, 4 and 6")
    if order == 6:
        return solve_single_interval(order, 10.0 if s0 is None else s0, s_end, tol, n_points, "fredholm")
    if s0 is None:
        s0 = default_truncation(order, 0.0)
    return solve_single_interval(order, s0, s_end, tol, n_points)


def solve_p3_coupled(s0: float = 8.0, s_end: float = 2.0, tol: float = 1e-10, n_points: int = 121) -> ODETrajectory:
    """Twelve-dimensional half-line system for ``p = 3``."""
    return solve_single_interval(3, s0, s_end, tol, n_points)


def _derivs(jet: Jet, n: int) -> list[float]:
    return [jet.derivative(k) for k in range(n + 1)]


def _even_rhs(order: int, c: int, s: float, q: list[float]) -> tuple[float, float]:
    """Right-hand side of the hierarchy member and a magnitude for normalisation."""
    q0 = q[0]
    if order == 2:
        terms = [c * s * q0, 2 * q0**3]
    elif order == 4:
        terms = [c * s * q0, -6 * q0**5, 10 * q0 * q[1] ** 2, 10 * q0**2 * q[2]]
    else:
        terms = [
            c * s * q0, 20 * q0**7, -140 * q0**3 * q[1] ** 2, -70 * q0**4 * q[2],
            42 * q0 * q[2] ** 2, 56 * q0 * q[1] * q[3], 14 * q0**2 * q[4], 70 * q[1] ** 2 * q[2],
        ]
    return sum(terms), max(abs(t) for t in terms)


def _odd_rhs(order: int, s: float, q: list[float], p: list[float]) -> tuple[float, float, float]:
    """Right-hand sides of the coupled pair (for ``q`` and for ``p``) and a magnitude."""
    if order == 3:
        tq = [s * q[0], 6 * p[0] * q[0] * q[1]]
        tp = [-s * p[0], 6 * q[0] * p[0] * p[1]]
    elif order == 5:
        tq = [
            s * q[0], 10 * q[0] * q[1] * p[2], 10 * q[0] * p[1] * q[2], 10 * q[0] * p[0] * q[3],
            -30 * p[0] ** 2 * q[0] ** 2 * q[1], 10 * q[1] ** 2 * p[1], 20 * q[1] * p[0] * q[2],
        ]
        tp = [
            -s * p[0], 10 * p[0] * q[1] * p[2], 10 * p[0] * p[1] * q[2], 10 * p[0] * q[0] * p[3],
            -30 * p[0] ** 2 * q[0] ** 2 * p[1], 10 * p[1] ** 2 * q[1], 20 * p[1] * q[0] * p[2],
        ]
    elif order == 7:
        tq = _p7_terms(s, q, p)
        # The p-equation is the q-equation with q and p exchanged and s -> -s.
        tp = _p7_terms(-s, p, q)
    else:
        raise ValueError("coupled equations are provided for orders 3, 5 and 7")
    return sum(tq), sum(tp), max(abs(t) for t in tq + tp)


def _p7_terms(s, q, p) -> list[float]:
    q0, q1, q2, q3, q4, q5 = q[:6]
    p0, p1, p2, p3, p4, p5 = p[:6]
    inner = (
        s
        + 42 * p2 * q3
        + 14 * (-20 * p0**2 * q1 * q2 + 2 * q2 * p3 + q1 * p4 + 2 * p1 * q4 + p0 * (-20 * p1 * q1**2 + q5))
    )
    return [
        q0 * inner,
        140 * p0**3 * q0**3 * q1,
        -70 * q0**2 * (p1**2 * q1 + 2 * p0 * p1 * q2 + p0 * (2 * q1 * p2 + p0 * q3)),
        14 * (
            -5 * p0**2 * q1**3 + 5 * p1 * q2**2 + 2 * q1**2 * p3
            + q1 * (8 * p2 * q2 + 7 * p1 * q3) + p0 * (5 * q2 * q3 + 3 * q1 * q4)
        ),
    ]


def hierarchy_residual(traj: ODETrajectory) -> np.ndarray:
    """Normalised residual of the scalar equation of order ``p`` along the trajectory.

    Even orders: ``|q^(p) - rhs| / max(1, |q^(p)|, max|term|)``; odd orders
    report the larger residual of the coupled pair.
    """
    p = traj.order
    out = np.zeros(traj.s.size)
    for i, s in enumerate(traj.s):
        jets = traj.jets(i, p)
        q = _derivs(jets[0], p)
        if p % 2 == 0:
            rhs, mag = _even_rhs(p, traj.sign, s, q)
            out[i] = abs(q[p] - rhs) / max(1.0, abs(q[p]), mag)
        else:
            pp = _derivs(jets[p], p)
            rq, rp, mag = _odd_rhs(p, s, q, pp)
            out[i] = max(abs(q[p] - rq), abs(pp[p] - rp)) / max(1.0, abs(q[p]), abs(pp[p]), mag)
    return out


def residual_coupled(order: int, traj: ODETrajectory) -> float:
    """Largest normalised residual of the odd-order coupled pair along ``traj``."""
    if order % 2 == 0 or order not in (3, 5, 7):
        raise ValueError("coupled residuals are provided for orders 3, 5 and 7")
    if traj.order != order:
        raise ValueError(f"trajectory has order {traj.order}, expected {order}")
    return float(np.max(hierarchy_residual(traj)))


@dataclass(frozen=True)
class SpacingSystem:
    """First-order system at the right endpoint of ``[-s, s]`` for odd ``p``.

    State layout: ``q_0..q_{p-1}, p_0..p_{p-1}, u_1, u_3, .., v_1, v_3, ..``
    (even-index pairings vanish by symmetry).  ``parity`` is ``+1`` when
    ``phi`` is even.
    """

    order: int

    @property
    def parity(self) -> int:
        return 1 if self.order % 4 == 3 else -1

    @property
    def n_odd(self) -> int:
        return self.order // 2

    def full_uv(self, y):
        p = self.order
        m = self.n_odd
        u_odd = y[2 * p : 2 * p + m]
        v_odd = y[2 * p + m : 2 * p + 2 * m]
        u = [0.0] * p
        v = [0.0] * p
        for i in range(m):
            u[2 * i + 1] = u_odd[i]
            v[2 * i + 1] = v_odd[i]
        return u, v

    def resolvent(self, s, q, pp):
        p = self.order
        total = q[p - 1] * pp[0]
        for k in range(2, p + 1):
            total = total + q[p - k] * pp[k - 1]
        return self.parity * total / (2 * s)

    def rhs(self, s, y):
        p = self.order
        q, pp = list(y[:p]), list(y[p : 2 * p])
        u, v = self.full_uv(y)
        base = SingleIntervalSystem(p, 1)
        qn = q[1:] + [base.top_q(s, q, v)]
        pn = pp[1:] + [base.top_p(s, pp, u)]
        R = self.resolvent(s, q, pp)
        dq = [qn[k] - u[k] * q[0] + 2 * self.parity * (-1) ** k * R * q[k] for k in range(p)]
        dp = [pn[k] - v[k] * pp[0] - 2 * self.parity * (-1) ** k * R * pp[k] for k in range(p)]
        du = [2 * pp[0] * q[2 * i + 1] for i in range(self.n_odd)]
        dv = [2 * q[0] * pp[2 * i + 1] for i in range(self.n_odd)]
        return dq + dp + du + dv

    def state_from(self, aux) -> np.ndarray:
        p = self.order
        return np.concatenate([aux.q[:p, 1], aux.p[:p, 1], aux.u[1:p:2], aux.v[1:p:2]])


def _xy_fourth(s, x, y, xd1, xd2, xd3, xd4, yd1, yd2, yd3, yd4):
    return (
        (3/2)*s*xd1 - 4*x*yd2 + 2*x - 4*xd1*yd1 - 5/8*xd1**2*y/x + (5/8)*y*yd1**2/x
        + 5*xd1**3/s - xd1**2*yd1/s - 5*xd1*yd1**2/s + yd1**3/s + xd1**3*y/(s*x) +
        xd1**2*xd3/(s*x) - xd1**2*y*yd1/(s*x) - xd1**2*yd3/(s*x) -
        4*xd1*xd2*yd2/(s*x) - 2*xd1*xd3*yd1/(s*x) - xd1*y*yd1**2/(s*x) -
        2*xd2**2*yd1/(s*x) - xd3*yd1**2/(s*x) + y*yd1**3/(s*x) + 3*yd1**2*yd3/(s*x)
        + 6*yd1*yd2**2/(s*x) - xd1**3*xd2/(s*x**2) + 2*xd1**3*yd2/(s*x**2) +
        5*xd1**2*xd2*yd1/(s*x**2) + xd1**2*yd1*yd2/(s*x**2) +
        xd1*xd2*yd1**2/(s*x**2) - 6*xd1*yd1**2*yd2/(s*x**2) - xd2*yd1**3/(s*x**2) -
        yd1**3*yd2/(s*x**2) + (1/2)*xd1**5/(s*x**3) - 2*xd1**4*yd1/(s*x**3) -
        xd1**3*yd1**2/(s*x**3) + 2*xd1**2*yd1**3/(s*x**3) +
        (1/2)*xd1*yd1**4/(s*x**3) + 2*xd1**2*yd2/(s**2*x) + 4*xd1*xd2*yd1/(s**2*x) -
        6*yd1**2*yd2/(s**2*x) + 3*xd1**4*xd2/(s**2*x**2) -
        2*xd1**3*yd1*yd2/(s**2*x**2) - 2*xd1**3*yd1/(s**2*x**2) -
        4*xd1**2*xd2*yd1**2/(s**2*x**2) + 2*xd1*yd1**3*yd2/(s**2*x**2) +
        2*xd1*yd1**3/(s**2*x**2) + xd2*yd1**4/(s**2*x**2) - xd1**6/(s**2*x**3) +
        2*xd1**4*yd1**2/(s**2*x**3) - xd1**2*yd1**4/(s**2*x**3) -
        2*xd1**2*yd1/(s**3*x) + 2*yd1**3/(s**3*x) - xd1**5/(s**3*x**2) +
        2*xd1**3*yd1**2/(s**3*x**2) - xd1*yd1**4/(s**3*x**2)
    )


def _xy_fifth(s, x, y, xd1, xd2, xd3, xd4, yd1, yd2, yd3, yd4):
    return (
        -3/2*s*yd2 - 4*x**2*xd1 - 6*x*xd3 - 8*x*y*yd1 - 12*xd1*xd2 - 4*xd1*y**2 -
        2*y*yd3 + (1/2)*yd1 - xd1**3/x - 2*xd1**2*yd1/x + xd1*xd4/x + xd1*yd1**2/x +
        3*xd2*xd3/x + 2*yd1**3/x - yd1*yd4/x - 3*yd2*yd3/x - 7/2*xd1**2*xd3/x**2 -
        6*xd1*xd2**2/x**2 + 3*xd1*yd1*yd3/x**2 + 3*xd1*yd2**2/x**2 +
        3*xd2*yd1*yd2/x**2 + (1/2)*xd3*yd1**2/x**2 + 9*xd1**3*xd2/x**3 -
        6*xd1**2*yd1*yd2/x**3 - 3*xd1*xd2*yd1**2/x**3 - 3*xd1**5/x**4 +
        3*xd1**3*yd1**2/x**4 + 12*xd1**2*xd2/s - 8*xd1*yd1*yd2/s - 4*xd2*yd1**2/s +
        2*xd1**4/(s*x) - 2*xd1**2*xd4/(s*x) - 4*xd1**2*y*yd2/(s*x) -
        4*xd1**2*yd1**2/(s*x) - 16*xd1*xd2*xd3/(s*x) - 8*xd1*xd2*y*yd1/(s*x) +
        2*xd1*yd1*yd4/(s*x) + 6*xd1*yd2*yd3/(s*x) - 6*xd2**3/(s*x) +
        6*xd2*yd1*yd3/(s*x) + 6*xd2*yd2**2/(s*x) + 4*xd3*yd1*yd2/(s*x) +
        12*y*yd1**2*yd2/(s*x) + 2*yd1**4/(s*x) + 8*xd1**3*xd3/(s*x**2) +
        4*xd1**3*y*yd1/(s*x**2) + 24*xd1**2*xd2**2/(s*x**2) -
        5*xd1**2*yd1*yd3/(s*x**2) - 5*xd1**2*yd2**2/(s*x**2) -
        14*xd1*xd2*yd1*yd2/(s*x**2) - 2*xd1*xd3*yd1**2/(s*x**2) -
        4*xd1*y*yd1**3/(s*x**2) - 2*xd2**2*yd1**2/(s*x**2) - yd1**3*yd3/(s*x**2) -
        3*yd1**2*yd2**2/(s*x**2) - 39/2*xd1**4*xd2/(s*x**3) +
        8*xd1**3*yd1*yd2/(s*x**3) + 7*xd1**2*xd2*yd1**2/(s*x**3) +
        4*xd1*yd1**3*yd2/(s*x**3) + (1/2)*xd2*yd1**4/(s*x**3) +
        (9/2)*xd1**6/(s*x**4) - 3*xd1**4*yd1**2/(s*x**4) -
        3/2*xd1**2*yd1**4/(s*x**4) - 4*xd1**3/s**2 + 4*xd1*yd1**2/s**2 +
        8*xd1**2*xd3/(s**2*x) + 4*xd1**2*y*yd1/(s**2*x) + 18*xd1*xd2**2/(s**2*x) -
        6*xd1*yd1*yd3/(s**2*x) - 6*xd1*yd2**2/(s**2*x) - 12*xd2*yd1*yd2/(s**2*x) -
        2*xd3*yd1**2/(s**2*x) - 4*y*yd1**3/(s**2*x) + 3*xd1**4*xd3/(s**2*x**2) +
        12*xd1**3*xd2**2/(s**2*x**2) - 20*xd1**3*xd2/(s**2*x**2) -
        2*xd1**3*yd1*yd3/(s**2*x**2) - 2*xd1**3*yd2**2/(s**2*x**2) -
        14*xd1**2*xd2*yd1*yd2/(s**2*x**2) - 4*xd1**2*xd3*yd1**2/(s**2*x**2) +
        11*xd1**2*yd1*yd2/(s**2*x**2) - 8*xd1*xd2**2*yd1**2/(s**2*x**2) +
        8*xd1*xd2*yd1**2/(s**2*x**2) + 2*xd1*yd1**3*yd3/(s**2*x**2) +
        6*xd1*yd1**2*yd2**2/(s**2*x**2) + 6*xd2*yd1**3*yd2/(s**2*x**2) +
        xd3*yd1**4/(s**2*x**2) + yd1**3*yd2/(s**2*x**2) - 12*xd1**5*xd2/(s**2*x**3)
        + (11/2)*xd1**5/(s**2*x**3) + 8*xd1**4*yd1*yd2/(s**2*x**3) +
        16*xd1**3*xd2*yd1**2/(s**2*x**3) - 5*xd1**3*yd1**2/(s**2*x**3) -
        8*xd1**2*yd1**3*yd2/(s**2*x**3) - 4*xd1*xd2*yd1**4/(s**2*x**3) -
        1/2*xd1*yd1**4/(s**2*x**3) + 3*xd1**7/(s**2*x**4) -
        6*xd1**5*yd1**2/(s**2*x**4) + 3*xd1**3*yd1**4/(s**2*x**4) -
        18*xd1**2*xd2/(s**3*x) + 12*xd1*yd1*yd2/(s**3*x) + 6*xd2*yd1**2/(s**3*x) -
        11*xd1**4*xd2/(s**3*x**2) + 6*xd1**4/(s**3*x**2) +
        8*xd1**3*yd1*yd2/(s**3*x**2) + 14*xd1**2*xd2*yd1**2/(s**3*x**2) -
        6*xd1**2*yd1**2/(s**3*x**2) - 8*xd1*yd1**3*yd2/(s**3*x**2) -
        3*xd2*yd1**4/(s**3*x**2) + 4*xd1**6/(s**3*x**3) -
        8*xd1**4*yd1**2/(s**3*x**3) + 4*xd1**2*yd1**4/(s**3*x**3) +
        6*xd1**3/(s**4*x) - 6*xd1*yd1**2/(s**4*x) + 3*xd1**5/(s**4*x**2) -
        6*xd1**3*yd1**2/(s**4*x**2) + 3*xd1*yd1**4/(s**4*x**2)
    )


def spacing_relation_residuals(s: float, step: float = 1e-3, order: int = 3) -> dict[str, float]:
    """Check the ``p = 3`` relations between ``u = u_1``, ``v = v_1`` and the endpoint data.

    Finite differences of Fredholm data on ``[-s, s]`` with the given step are
    compared with

    * ``u' = 2 q_1 p`` and ``v' = 2 q p_1`` (key ``uv_derivative``);
    * ``R = u' v' / (2 s (u + v))`` (key ``resolvent``);
    * ``u'' = 2 q_2 p - u (u + v) - 4 R u' + 2 s R`` and
      ``v'' = 2 q p_2 - v (u + v) + 4 R v' + 2 s R`` (key ``second_derivative``;
      the opposite signs of the ``R`` terms follow from differentiating
      ``u' = 2 q_1 p`` and ``v' = 2 q p_1``);
    * ``(log F)'' = u + v - 4 R^2`` (key ``log_F_second``).

    The keys ``informational_y4`` and ``informational_x5`` report the
    residuals of the closed fourth- and fifth-order equations for
    ``x = u + v`` and ``y = u - v``, with derivatives generated by Taylor-mode
    differentiation of the endpoint system.  They are not asserted anywhere.
    """
    if order != 3:
        raise ValueError("the symmetric-interval relations are provided for order 3")
    offsets = np.array([-2, -1, 0, 1, 2]) * step
    auxs, logF = [], []
    for ds in offsets:
        res = gap_probability(GapProbabilitySpec(order, IntervalSet.symmetric(s + ds)), with_aux=True)
        auxs.append(res.aux)
        logF.append(math.log(res.F))
    u = np.array([a.u[1] for a in auxs])
    v = np.array([a.v[1] for a in auxs])
    d1 = lambda f: (f[0] - 8 * f[1] + 8 * f[3] - f[4]) / (12 * step)
    d2 = lambda f: (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * step**2)

    a = auxs[2]
    q, pp = a.q[:, 1], a.p[:, 1]
    R = a.R[0, 1]
    u0, v0 = u[2], v[2]
    du_exact, dv_exact = 2 * q[1] * pp[0], 2 * q[0] * pp[1]
    out: dict[str, float] = {}
    out["uv_derivative"] = max(
        abs(d1(u) - du_exact) / max(1.0, abs(du_exact)), abs(d1(v) - dv_exact) / max(1.0, abs(dv_exact))
    )
    R_uv = du_exact * dv_exact / (2 * s * (u0 + v0))
    out["resolvent"] = abs(R_uv - R) / max(1e-300, abs(R))
    u2 = 2 * q[2] * pp[0] - u0 * (u0 + v0) - 4 * R * du_exact + 2 * s * R
    v2 = 2 * q[0] * pp[2] - v0 * (u0 + v0) + 4 * R * dv_exact + 2 * s * R
    out["second_derivative"] = max(
        abs(d2(u) - u2) / max(1.0, abs(u2)), abs(d2(v) - v2) / max(1.0, abs(v2))
    )
    lf2 = u0 + v0 - 4 * R * R
    out["log_F_second"] = abs(d2(np.array(logF)) - lf2) / max(1.0, abs(lf2))

    system = SpacingSystem(order)
    jets = taylor_coefficients(system.rhs, s, system.state_from(a), 6)
    n = system.n_odd
    uj = jets[2 * order]
    vj = jets[2 * order + n]
    xs = [(uj + vj).derivative(k) for k in range(6)]
    ys = [(uj - vj).derivative(k) for k in range(6)]
    args = (s, xs[0], ys[0], xs[1], xs[2], xs[3], xs[4], ys[1], ys[2], ys[3], ys[4])
    y4 = _xy_fourth(*args)
    x5 = _xy_fifth(*args)
    out["informational_y4"] = abs(ys[4] - y4) / max(1.0, abs(ys[4]))
    out["informational_x5"] = abs(xs[5] - x5) / max(1.0, abs(xs[5]))
    return out
