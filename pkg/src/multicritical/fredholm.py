"""Gap probabilities as Fredholm determinants, with resolvent-derived quantities.

The determinant ``det(1 - K chi_I)`` is discretised with Gauss-Legendre
nodes on every piece of ``I`` (Nystrom method, symmetrised with square-root
weights).  The node count per piece is doubled from 16 until successive
determinants agree.  At the converged order the resolvent
``R = K chi_I (1 - K chi_I)^{-1}`` is extended to the endpoints ``a_j`` by
Nystrom interpolation, yielding

* ``q_k(a_j)``, ``p_k(a_j)``: the wave-function derivatives dressed by the
  resolvent from the left and from the right;
* ``u_k``, ``v_k``: the pairings ``<g | chi (1-K chi)^{-1} | f^(k)>`` and
  ``<g^(k) | (1-chi K)^{-1} chi | f>``;
* ``R(a_i, a_j)`` and the endpoint Hamiltonians ``H_j = R(a_j, a_j)``.

Along the way the module exposes the algebraic relations these quantities
obey (integrals of motion, the Christoffel-Darboux form of the resolvent,
Lax matrices) so that they can be checked against the direct computation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .hiairy import AiryEvalConfig, ConvergenceError
from .kernel import WaveTable

__all__ = [
    "IntervalSet",
    "GapProbabilitySpec",
    "AuxiliaryState",
    "GapResult",
    "SpacingCurve",
    "TailCurve",
    "ExponentFit",
    "gap_probability",
    "auxiliary_state",
    "resolvent",
    "tail_second_derivative_residual",
    "integrals_of_motion",
    "lax_matrices",
    "verify_structure",
    "spacing_curve",
    "tw_tail",
    "fit_exponent",
    "default_truncation",
]


@dataclass(frozen=True)
class IntervalSet:
    """Union of closed intervals ``[a_1, a_2] u [a_3, a_4] u ...``.

    With ``semi_infinite`` the last piece is ``[a_{2m+1}, inf)``; it is
    truncated at ``truncation`` for the quadrature (chosen automatically for
    even orders when left as ``None``) and the truncation point is not an
    endpoint of the set.
    """

    endpoints: tuple[float, ...] = ()
    semi_infinite: bool = False
    truncation: float | None = None

    def __post_init__(self) -> None:
        pts = tuple(float(a) for a in self.endpoints)
        object.__setattr__(self, "endpoints", pts)
        if any(not math.isfinite(a) for a in pts):
            raise ValueError("endpoints must be finite")
        if any(b <= a for a, b in zip(pts, pts[1:])):
            raise ValueError("endpoints must be strictly increasing")
        if self.semi_infinite:
            if len(pts) % 2 != 1:
                raise ValueError("a semi-infinite set needs an odd number of endpoints")
            if self.truncation is not None and self.truncation <= pts[-1]:
                raise ValueError("truncation must exceed the last endpoint")
        elif len(pts) % 2 != 0:
            raise ValueError("a bounded set needs an even number of endpoints")

    @classmethod
    def symmetric(cls, half_width: float) -> "IntervalSet":
        """The interval ``[-s, s]``."""
        if half_width <= 0:
            raise ValueError("half-width must be positive")
        return cls((-half_width, half_width))

    @classmethod
    def half_line(cls, start: float, truncation: float | None = None) -> "IntervalSet":
        """The half line ``[s, inf)``."""
        return cls((start,), semi_infinite=True, truncation=truncation)

    def pieces(self, truncation: float | None = None) -> list[tuple[float, float]]:
        pts = list(self.endpoints)
        if self.semi_infinite:
            t = self.truncation if self.truncation is not None else truncation
            if t is None:
                raise ValueError("semi-infinite set requires a truncation point")
            pts.append(t)
        return [(pts[i], pts[i + 1]) for i in range(0, len(pts), 2)]

    @property
    def is_empty(self) -> bool:
        return len(self.endpoints) == 0


@dataclass(frozen=True)
class GapProbabilitySpec:
    """Order ``p``, interval set and quadrature control.

    ``quad_order`` fixes the number of nodes per piece; when ``None`` the
    count is doubled from ``min_order`` until ``|F_N - F_{N/2}|`` is at most
    ``tol`` and at most ``rel_tol * |F_N|``.
    """

    order: int
    intervals: IntervalSet
    quad_order: int | None = None
    tol: float = 1e-10
    rel_tol: float = 1e-6
    min_order: int = 16
    max_order: int = 1024
    airy: AiryEvalConfig | None = None


@dataclass
class AuxiliaryState:
    """Resolvent-derived quantities at the endpoints.

    Arrays ``q`` and ``p`` have shape ``(order + 1, m)``; row ``k`` holds the
    ``k``-th function at the ``m`` endpoints.  ``u`` and ``v`` have length
    ``order + 1``.  ``R[i, j] = R(a_i, a_j)``; ``H`` is the explicit
    Hamiltonian formula and ``H_resolvent`` the diagonal of ``R``.
    """

    order: int
    sign: int
    endpoints: np.ndarray
    q: np.ndarray
    p: np.ndarray
    u: np.ndarray
    v: np.ndarray
    R: np.ndarray
    H: np.ndarray
    H_resolvent: np.ndarray


@dataclass
class GapResult:
    F: float
    quad_order: int
    delta: float
    aux: AuxiliaryState | None = None
    history: list[tuple[int, float]] = field(default_factory=list)


def default_truncation(order: int, start: float, threshold: float = 1e-16) -> float:
    """Smallest point beyond ``start`` (on a 0.25 grid) where the density falls below ``threshold``."""
    if order % 2 == 1:
        raise ValueError("odd orders have no decaying side; a half line has zero gap probability")
    t = max(start, 0.0) + 1.0
    while True:
        table = WaveTable(order, np.array([t]))
        if abs(table.diagonal(np.array([0]))[0]) < threshold:
            return t
        t += 0.25
        if t > 200:
            raise ConvergenceError("could not locate a truncation point")


def _nodes(pieces: list[tuple[float, float]], n: int) -> tuple[np.ndarray, np.ndarray]:
    x0, w0 = np.polynomial.legendre.leggauss(n)
    xs, ws = [], []
    for a, b in pieces:
        half = 0.5 * (b - a)
        xs.append(0.5 * (a + b) + half * x0)
        ws.append(half * w0)
    return np.concatenate(xs), np.concatenate(ws)


class _Discretisation:
    """Nystrom discretisation at a fixed node count."""

    def __init__(self, spec: GapProbabilitySpec, n: int, truncation: float | None):
        self.spec = spec
        self.order = spec.order
        pieces = spec.intervals.pieces(truncation)
        self.x, self.w = _nodes(pieces, n)
        self.ends = np.array(spec.intervals.endpoints)
        self.table = WaveTable(spec.order, np.concatenate([self.x, self.ends]), spec.airy)
        self.sign = self.table.sign
        nn = self.x.size
        self.node_idx = np.arange(nn)
        self.end_idx = np.arange(nn, nn + self.ends.size)
        self.K = self.table.matrix(self.node_idx, self.node_idx)
        sw = np.sqrt(self.w)
        self.M = np.eye(nn) - sw[:, None] * self.K * sw[None, :]

    def determinant(self) -> float:
        sgn, logdet = np.linalg.slogdet(self.M)
        if sgn <= 0:
            raise ConvergenceError(
                "determinant is not positive at this precision; the interval is too large"
            )
        return float(math.exp(logdet))

    def resolvent(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """``R(x_i, y_j)`` off the grid by Nystrom extension."""
        nn = self.x.size
        pts = np.concatenate([self.x, x, y])
        table = WaveTable(self.order, pts, self.spec.airy)
        ni = np.arange(nn)
        xi = np.arange(nn, nn + x.size)
        yi = np.arange(nn + x.size, nn + x.size + y.size)
        A = np.eye(nn) - self.K * self.w[None, :]
        rho = np.linalg.solve(A, table.matrix(ni, yi))
        return table.matrix(xi, yi) + (table.matrix(xi, ni) * self.w[None, :]) @ rho

    def auxiliary(self) -> AuxiliaryState:
        p = self.order
        x, w = self.x, self.w
        nn = x.size
        ni, ei = self.node_idx, self.end_idx
        table = self.table
        A = np.eye(nn) - self.K * w[None, :]
        At = np.eye(nn) - self.K.T * w[None, :]

        f_nodes = table.f[:, ni].T
        g_nodes = table.g[:, ni].T
        Q = np.linalg.solve(A, f_nodes)
        P = np.linalg.solve(At, g_nodes)

        K_en = table.matrix(ei, ni)
        K_ne = table.matrix(ni, ei)
        q_end = table.f[:, ei] + ((K_en * w[None, :]) @ Q).T
        p_end = table.g[:, ei] + ((K_ne.T * w[None, :]) @ P).T

        u = (w * g_nodes[:, 0]) @ Q
        v = (w * f_nodes[:, 0]) @ P

        rho = np.linalg.solve(A, K_ne)
        R = table.matrix(ei, ei) + (K_en * w[None, :]) @ rho

        aux = AuxiliaryState(
            order=p,
            sign=self.sign,
            endpoints=self.ends.copy(),
            q=q_end,
            p=p_end,
            u=u,
            v=v,
            R=R,
            H=np.zeros(self.ends.size),
            H_resolvent=np.diag(R).copy(),
        )
        aux.H = explicit_hamiltonians(aux)
        return aux


def explicit_hamiltonians(aux: AuxiliaryState) -> np.ndarray:
    """Endpoint Hamiltonians from the closed formula in ``q``, ``p``, ``u``, ``v`` and ``R``."""
    p, c = aux.order, aux.sign
    a = aux.endpoints
    m = a.size
    q, pp, u, v, R = aux.q, aux.p, aux.u, aux.v, aux.R
    H = np.zeros(m)
    for j in range(m):
        val = -a[j] * q[0, j] * pp[0, j]
        for k in range(1, p):
            val -= c * (-1) ** k * q[p - k, j] * pp[k, j]
        for k in range(1, p + 1):
            val += c * (-1) ** k * (
                q[p - k, j] * pp[0, j] * v[k - 1] - q[0, j] * pp[k - 1, j] * u[p - k]
            )
        for l in range(m):
            if l != j:
                val -= (-1) ** (l + 1) * (a[l] - a[j]) * R[j, l] * R[l, j]
        H[j] = val
    return H


def _truncation_for(spec: GapProbabilitySpec) -> float | None:
    iv = spec.intervals
    if not iv.semi_infinite or iv.truncation is not None:
        return None
    return default_truncation(spec.order, iv.endpoints[-1])


def gap_probability(spec: GapProbabilitySpec, with_aux: bool = False) -> GapResult:
    """Probability that no particle lies in ``spec.intervals``.

    Raises
    ------
    ConvergenceError
        If the determinant has not settled by ``max_order`` nodes per piece.
    """
    if spec.intervals.is_empty:
        return GapResult(F=1.0, quad_order=0, delta=0.0)
    if spec.order % 2 == 1 and spec.intervals.semi_infinite:
        raise ValueError("odd orders have no decaying side; use a bounded interval set")
    trunc = _truncation_for(spec)

    if spec.quad_order is not None:
        disc = _Discretisation(spec, spec.quad_order, trunc)
        F = disc.determinant()
        aux = disc.auxiliary() if with_aux else None
        return GapResult(F=F, quad_order=spec.quad_order, delta=float("nan"), aux=aux)

    history: list[tuple[int, float]] = []
    n = spec.min_order
    prev = None
    while n <= spec.max_order:
        disc = _Discretisation(spec, n, trunc)
        F = disc.determinant()
        history.append((n, F))
        if prev is not None:
            delta = abs(F - prev)
            if delta <= spec.tol and delta <= spec.rel_tol * abs(F):
                aux = disc.auxiliary() if with_aux else None
                return GapResult(F=F, quad_order=n, delta=delta, aux=aux, history=history)
        prev = F
        n *= 2
    raise ConvergenceError(
        f"Fredholm determinant did not converge by {spec.max_order} nodes per piece "
        f"(last values {history[-2:]})"
    )


def resolvent(spec: GapProbabilitySpec, x, y) -> np.ndarray:
    """Resolvent kernel ``R = K chi (1 - K chi)^{-1}`` at arbitrary points.

    The quadrature order is the converged order of :func:`gap_probability`
    (or ``spec.quad_order`` when fixed).  Scalars in give a scalar out.
    """
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    ys = np.atleast_1d(np.asarray(y, dtype=float))
    if spec.intervals.is_empty:
        from .kernel import kernel_matrix

        out = kernel_matrix(spec.order, xs, ys)
    else:
        res = gap_probability(spec)
        out = _Discretisation(spec, res.quad_order, _truncation_for(spec)).resolvent(xs, ys)
    if np.ndim(x) == 0 and np.ndim(y) == 0:
        return float(out[0, 0])
    return out


def auxiliary_state(spec: GapProbabilitySpec) -> AuxiliaryState:
    """Endpoint values of ``q_k``, ``p_k``, ``u_k``, ``v_k``, ``R`` and ``H``."""
    res = gap_probability(spec, with_aux=True)
    if res.aux is None:
        raise ValueError("the empty set has no endpoints")
    return res.aux


def integrals_of_motion(aux: AuxiliaryState) -> np.ndarray:
    """``I_l`` for ``l = 0..p``; all vanish identically."""
    p = aux.order
    q, pp, u, v = aux.q, aux.p, aux.u, aux.v
    m = aux.endpoints.size
    signs = np.array([(-1) ** (j + 1) for j in range(m)])
    out = np.zeros(p + 1)
    out[0] = u[0] - v[0]
    for l in range(1, p + 1):
        val = u[l] - (-1) ** l * v[l]
        for k in range(1, l + 1):
            val += (-1) ** k * (u[l - k] * v[k - 1] + np.sum(signs * q[l - k] * pp[k - 1]))
        out[l] = val
    return out


def pq_relation(aux: AuxiliaryState) -> np.ndarray:
    """``sum_k (-1)^k q_{p-k}(a_j) p_{k-1}(a_j)`` per endpoint (vanishes)."""
    p = aux.order
    return np.array(
        [sum((-1) ** k * aux.q[p - k, j] * aux.p[k - 1, j] for k in range(1, p + 1))
         for j in range(aux.endpoints.size)]
    )


def resolvent_cd(aux: AuxiliaryState) -> np.ndarray:
    """Off-diagonal ``R(a_i, a_j)`` rebuilt from the Christoffel-Darboux form (NaN on the diagonal)."""
    p, c = aux.order, aux.sign
    m = aux.endpoints.size
    out = np.full((m, m), np.nan)
    for i in range(m):
        for j in range(m):
            if i != j:
                num = sum((-1) ** k * aux.q[p - k, i] * aux.p[k - 1, j] for k in range(1, p + 1))
                out[i, j] = c * num / (aux.endpoints[i] - aux.endpoints[j])
    return out


def lax_matrices(aux: AuxiliaryState) -> tuple[list[np.ndarray], callable]:
    """Residue matrices ``A_j`` and the polynomial part ``A_inf(x)`` of the Lax matrix."""
    p, c = aux.order, aux.sign
    m = aux.endpoints.size
    mats = []
    for j in range(m):
        A = np.zeros((p, p))
        for k in range(p):
            for kk in range(p):
                A[k, kk] = c * (-1) ** ((j + 1) + p - kk + 1) * aux.q[k, j] * aux.p[p - kk - 1, j]
        mats.append(A)

    def a_inf(x: float) -> np.ndarray:
        A = np.zeros((p, p))
        for k in range(p - 1):
            A[k, 0] = -aux.u[k]
            A[k, k + 1] = 1.0
        A[p - 1, 0] = c * x - aux.u[p - 1] + (-1) ** (p - 1) * aux.v[p - 1]
        for col in range(1, p):
            A[p - 1, col] += -((-1) ** (p - col)) * aux.v[p - col - 1]
        return A

    return mats, a_inf


def _lax_hamiltonians(aux: AuxiliaryState) -> np.ndarray:
    mats, a_inf = lax_matrices(aux)
    a = aux.endpoints
    out = np.zeros(a.size)
    for j in range(a.size):
        val = np.trace(mats[j] @ a_inf(a[j]))
        for l in range(a.size):
            if l != j:
                val += np.trace(mats[j] @ mats[l]) / (a[j] - a[l])
        out[j] = (-1) ** j * val
    return out


def verify_structure(spec: GapProbabilitySpec, fd_step: float = 1e-4) -> dict[str, float]:
    """Residuals of every structural identity at the given interval set.

    Keys
    ----
    ``pq_rel``
        Relative size of ``sum_k (-1)^k q_{p-k} p_{k-1}`` at the endpoints.
    ``iom``
        ``max_l |I_l|`` normalised by ``max(1, |u|, |v|, sum |q p|)``.
    ``resolvent_cd``
        Relative mismatch between Nystrom and Christoffel-Darboux ``R(a_i, a_j)``.
    ``hamiltonian``
        Relative mismatch between the explicit ``H_j`` and ``R(a_j, a_j)``.
    ``closure``
        Mismatch of ``q_p``, ``p_p`` against their lowering formulas.
    ``dlogF``
        Relative error of central differences of ``log F`` against ``(-1)^(j-1) H_j``.
    ``lax_trace``, ``lax_hamiltonian``
        Traces of the residue matrices and of ``A_inf``; Hamiltonians
        recovered from the Lax matrices.
    ``parity``, ``even_uv`` (odd order, symmetric two-endpoint set)
        Endpoint parity relations and the vanishing of ``u_{2k}``, ``v_{2k}``.
    """
    res = gap_probability(spec, with_aux=True)
    aux = res.aux
    if aux is None:
        raise ValueError("the empty set has no structure to verify")
    fixed = replace(spec, quad_order=res.quad_order)
    p, c = aux.order, aux.sign
    a = aux.endpoints
    q, pp, u, v, R = aux.q, aux.p, aux.u, aux.v, aux.R
    out: dict[str, float] = {}

    qp_scale = np.sum(np.abs(q[:p] * pp[p - 1 :: -1][:p]), axis=0) if p else 1.0
    out["pq_rel"] = float(np.max(np.abs(pq_relation(aux)) / np.maximum(1e-300, qp_scale)))

    scale = max(1.0, float(np.max(np.abs(u))), float(np.max(np.abs(v))), float(np.sum(np.abs(q * pp))))
    out["iom"] = float(np.max(np.abs(integrals_of_motion(aux)))) / scale

    if a.size > 1:
        cd = resolvent_cd(aux)
        mask = ~np.isnan(cd)
        out["resolvent_cd"] = float(np.max(np.abs(cd[mask] - R[mask]) / np.maximum(1.0, np.abs(R[mask]))))
    out["hamiltonian"] = float(
        np.max(np.abs(aux.H - aux.H_resolvent) / np.maximum(1.0, np.abs(aux.H_resolvent)))
    )

    closure_q = np.array([
        c * a[j] * q[0, j] - sum((-1) ** k * q[p - k, j] * v[k - 1] for k in range(1, p + 1))
        for j in range(a.size)
    ])
    closure_p = np.array([
        (-1) ** p * c * a[j] * pp[0, j] - sum((-1) ** k * u[k - 1] * pp[p - k, j] for k in range(1, p + 1))
        for j in range(a.size)
    ])
    out["closure"] = float(max(
        np.max(np.abs(closure_q - q[p]) / np.maximum(1.0, np.abs(q[p]))),
        np.max(np.abs(closure_p - pp[p]) / np.maximum(1.0, np.abs(pp[p]))),
    ))

    fd = []
    for j in range(a.size):
        lo, hi = list(a), list(a)
        lo[j] -= fd_step
        hi[j] += fd_step
        f_lo = gap_probability(replace(fixed, intervals=replace(spec.intervals, endpoints=tuple(lo)))).F
        f_hi = gap_probability(replace(fixed, intervals=replace(spec.intervals, endpoints=tuple(hi)))).F
        deriv = (math.log(f_hi) - math.log(f_lo)) / (2 * fd_step)
        target = (-1) ** j * aux.H_resolvent[j]
        fd.append(abs(deriv - target) / max(1.0, abs(target)))
    out["dlogF"] = float(max(fd))

    mats, a_inf = lax_matrices(aux)
    out["lax_trace"] = float(max([abs(np.trace(M)) for M in mats] + [abs(np.trace(a_inf(0.0)))]))
    lax_h = _lax_hamiltonians(aux)
    out["lax_hamiltonian"] = float(
        np.max(np.abs(lax_h - aux.H_resolvent) / np.maximum(1.0, np.abs(aux.H_resolvent)))
    )

    if p % 2 == 1 and a.size == 2 and abs(a[0] + a[1]) < 1e-14 and not spec.intervals.semi_infinite:
        # phi is even when p = 3 mod 4 and odd when p = 1 mod 4; psi has the other parity.
        ks = (-1.0) ** np.arange(p + 1) * (1.0 if p % 4 == 3 else -1.0)
        dq = np.abs(q[:, 1] - ks * q[:, 0])
        dp = np.abs(pp[:, 1] + ks * pp[:, 0])
        sc = max(1.0, float(np.max(np.abs(q))), float(np.max(np.abs(pp))))
        out["parity"] = float(max(np.max(dq), np.max(dp))) / sc
        out["even_uv"] = float(max(np.max(np.abs(u[0::2])), np.max(np.abs(v[0::2])))) / scale
    return out


@dataclass
class SpacingCurve:
    """Gap probability of ``[-s, s]`` and its derivatives on a grid of ``s``.

    ``H`` is the common endpoint Hamiltonian, ``H_prime`` its closed-form
    derivative ``-q p + 2 R^2`` and ``F_second`` the second derivative of
    ``F`` obtained from ``(log F)' = -2H``.
    """

    s: np.ndarray
    F: np.ndarray
    H: np.ndarray
    H_prime: np.ndarray
    F_second: np.ndarray
    aux: list[AuxiliaryState]


def spacing_curve(order: int, s_grid, tol: float = 1e-10, airy: AiryEvalConfig | None = None) -> SpacingCurve:
    """Gap probability and Hamiltonian data of the symmetric interval ``[-s, s]`` (odd orders)."""
    if order % 2 == 0:
        raise ValueError("the symmetric spacing curve is defined for odd orders")
    s_grid = np.atleast_1d(np.asarray(s_grid, dtype=float))
    if np.any(s_grid <= 0):
        raise ValueError("half-widths must be positive")
    Fs, Hs, Hps, F2s, auxs = [], [], [], [], []
    for s in s_grid:
        res = gap_probability(
            GapProbabilitySpec(order, IntervalSet.symmetric(s), tol=tol, airy=airy), with_aux=True
        )
        aux = res.aux
        H = aux.H_resolvent[1]
        Hp = -aux.q[0, 1] * aux.p[0, 1] + 2.0 * aux.R[0, 1] ** 2
        Fs.append(res.F)
        Hs.append(H)
        Hps.append(Hp)
        F2s.append(res.F * (4.0 * H * H - 2.0 * Hp))
        auxs.append(aux)
    return SpacingCurve(s_grid, np.array(Fs), np.array(Hs), np.array(Hps), np.array(F2s), auxs)


@dataclass
class TailCurve:
    """Gap probability of ``[s, inf)`` for even orders.

    ``q`` and ``p`` are the dressed wave functions at ``s``; ``H = R(s, s)``
    satisfies ``(log F)' = H``.
    """

    s: np.ndarray
    F: np.ndarray
    q: np.ndarray
    p: np.ndarray
    H: np.ndarray
    truncation: float


def tw_tail(
    order: int,
    s_grid,
    truncation: float | None = None,
    tol: float = 1e-10,
    airy: AiryEvalConfig | None = None,
) -> TailCurve:
    """Distribution of the largest particle, ``F(s) = det(1 - K chi_[s, T])``."""
    if order % 2 == 1:
        raise ValueError("the largest-particle distribution needs an even order")
    s_grid = np.atleast_1d(np.asarray(s_grid, dtype=float))
    T = truncation if truncation is not None else default_truncation(order, float(np.max(s_grid)))
    if np.any(s_grid >= T):
        raise ValueError("every s must lie below the truncation point")
    # Moving the cut-off by 5 must not change F beyond tolerance.
    s_min = float(np.min(s_grid))
    f_T = gap_probability(GapProbabilitySpec(order, IntervalSet.half_line(s_min, T), tol=tol, airy=airy)).F
    f_T5 = gap_probability(GapProbabilitySpec(order, IntervalSet.half_line(s_min, T + 5.0), tol=tol, airy=airy)).F
    if abs(f_T - f_T5) > max(tol, 1e-10):
        raise ConvergenceError(
            f"F([{s_min}, T]) changes by {abs(f_T - f_T5):.3g} when T={T} moves to T+5; raise the truncation"
        )
    Fs, qs, ps, Hs = [], [], [], []
    for s in s_grid:
        res = gap_probability(
            GapProbabilitySpec(order, IntervalSet.half_line(s, T), tol=tol, airy=airy), with_aux=True
        )
        Fs.append(res.F)
        qs.append(res.aux.q[0, 0])
        ps.append(res.aux.p[0, 0])
        Hs.append(res.aux.H_resolvent[0])
    return TailCurve(s_grid, np.array(Fs), np.array(qs), np.array(ps), np.array(Hs), T)


def tail_second_derivative_residual(order: int, s: float, step: float = 1e-3, tol: float = 1e-12) -> float:
    """``|(log F)'' + q p|`` at ``s`` for the half line, with ``(log F)''`` by central differences.

    The second derivative is taken as a difference of the resolvent
    diagonal ``H = (log F)'`` to avoid cancellation in ``log F``.
    """
    curve = tw_tail(order, [s - step, s + step, s], tol=tol)
    d2 = (curve.H[1] - curve.H[0]) / (2.0 * step)
    return float(abs(d2 + curve.q[2] * curve.p[2]))


@dataclass
class ExponentFit:
    """Least-squares fit ``log(-log F) = exponent * log s + log C``; ``r2`` is the fit quality."""

    exponent: float
    C: float
    s: np.ndarray
    F: np.ndarray
    r2: float = float("nan")


def fit_exponent(
    order: int,
    s_window: tuple[float, float],
    n_points: int = 14,
    F_range: tuple[float, float] = (1e-12, 1e-2),
    airy: AiryEvalConfig | None = None,
) -> ExponentFit:
    """Fit the large-gap decay of ``F([-s, s])`` over grid points with ``F`` in ``F_range``."""
    lo, hi = s_window
    if not 0 < lo < hi:
        raise ValueError("window must satisfy 0 < s_min < s_max")
    s_all = np.linspace(lo, hi, n_points)
    keep_s, keep_F = [], []
    for s in s_all:
        F = gap_probability(GapProbabilitySpec(order, IntervalSet.symmetric(s), airy=airy)).F
        if F_range[0] <= F <= F_range[1]:
            keep_s.append(s)
            keep_F.append(F)
        elif F < F_range[0]:
            # F decreases in s; larger widths would only lose precision.
            break
    if len(keep_s) < 6:
        raise ValueError(
            f"only {len(keep_s)} grid points have F in {F_range}; widen or shift the window"
        )
    s_arr, F_arr = np.array(keep_s), np.array(keep_F)
    xs, ys = np.log(s_arr), np.log(-np.log(F_arr))
    slope, intercept = np.polyfit(xs, ys, 1)
    resid = ys - (slope * xs + intercept)
    r2 = 1.0 - float(np.sum(resid**2)) / float(np.sum((ys - ys.mean()) ** 2))
    return ExponentFit(float(slope), float(math.exp(intercept)), s_arr, F_arr, r2)
