"""Discrete Schur-measure kernel, multicritical tuning and the scaling limit.

A Schur measure is parametrised by two finite lists of Miwa times
``t = (t_1, ..., t_N)`` and ``t_tilde``.  The wave functions

    J(z)  = exp(sum_n t_n z^n - t_tilde_n z^-n)  = sum_m J(m) z^m,
    J~(z) = exp(sum_n t_tilde_n z^n - t_n z^-n) = sum_m J~(m) z^m

are biorthonormal, ``sum_k J(n+k) J~(m+k) = delta_{nm}``, and the kernel on
``Z + 1/2`` is ``K(r, s) = sum_{k>=1} J(r+k-1/2) J~(s+k-1/2)``.

Coefficients come from sampling the generating functions on the unit circle
and inverting with an FFT.  When the generating function varies over many
orders of magnitude on the circle (as for odd-degree multicritical tunings)
the kernel sum cancels catastrophically in double precision; in that case
the coefficients and the kernel sums are computed from the exact Laurent
series in multiprecision arithmetic.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import mpmath
import numpy as np

from .hiairy import ConvergenceError
from .kernel import eval_kernel

__all__ = [
    "MiwaParams",
    "MulticriticalSpec",
    "WaveCoefficients",
    "partition_function",
    "dynamic_range",
    "wave_coeffs",
    "discrete_kernel",
    "kernel_matrix",
    "correlation",
    "biorthonormality_defect",
    "projectivity_defect",
    "multicritical",
    "tuning_report",
    "scaling_error",
    "ScalingErrorTable",
]

# Above this log-ratio max|J|/min|J| on the unit circle the FFT route loses
# more than about five digits in the kernel sum.
_FFT_LOG_RANGE = 12.0
_ALIAS_TOL = 1e-12
_TAIL_TOL = 1e-14


@dataclass(frozen=True)
class MiwaParams:
    """Finite Miwa times ``t_1..t_N`` and ``t_tilde_1..t_tilde_N``."""

    t: tuple[float, ...]
    t_tilde: tuple[float, ...]

    def __post_init__(self):
        t = tuple(float(v) for v in self.t)
        tt = tuple(float(v) for v in self.t_tilde)
        if not t and not tt:
            raise ValueError("Miwa lists must not both be empty")
        if not all(math.isfinite(v) for v in t + tt):
            raise ValueError("Miwa times must be finite")
        n = max(len(t), len(tt))
        object.__setattr__(self, "t", t + (0.0,) * (n - len(t)))
        object.__setattr__(self, "t_tilde", tt + (0.0,) * (n - len(tt)))

    @property
    def size(self) -> int:
        return len(self.t)

    def scaled(self, factor: float) -> "MiwaParams":
        """Times multiplied by ``factor`` (``1/epsilon`` in the scaling limit)."""
        return MiwaParams(tuple(factor * v for v in self.t), tuple(factor * v for v in self.t_tilde))

    def alpha(self, k: int) -> float:
        """``alpha_k = sum_n n^(k+1)/k! (t_n + (-1)^k t_tilde_n)``; ``alpha_0`` is ``beta``."""
        sgn = -1.0 if k % 2 else 1.0
        return math.fsum(
            n ** (k + 1) / math.factorial(k) * (tn + sgn * ttn)
            for n, (tn, ttn) in enumerate(zip(self.t, self.t_tilde), start=1)
        )

    @property
    def beta(self) -> float:
        return self.alpha(0)

    def to_json(self) -> str:
        return json.dumps({"t": list(self.t), "t_tilde": list(self.t_tilde)})

    @classmethod
    def from_json(cls, text: str) -> "MiwaParams":
        data = json.loads(text)
        try:
            return cls(tuple(data["t"]), tuple(data["t_tilde"]))
        except KeyError as exc:
            raise ValueError(f"Miwa document lacks field {exc.args[0]!r}") from None

    @classmethod
    def load(cls, path: str | Path) -> "MiwaParams":
        return cls.from_json(Path(path).read_text())

    @classmethod
    def plancherel(cls, theta: float) -> "MiwaParams":
        return cls((theta,), (theta,))


@dataclass(frozen=True)
class MulticriticalSpec:
    """Outcome of a multicritical tuning."""

    p: int
    alpha_p: float
    beta: float
    residual_alphas: tuple[float, ...]
    params: MiwaParams


def partition_function(params: MiwaParams) -> float:
    """``Z = exp(sum_n n t_n t_tilde_n)``."""
    expo = math.fsum(n * a * b for n, (a, b) in enumerate(zip(params.t, params.t_tilde), start=1))
    if expo > 709.0:
        raise OverflowError(f"partition function exponent {expo:.6g} exceeds the double range")
    return math.exp(expo)


def _log_modulus(params: MiwaParams, theta: np.ndarray) -> np.ndarray:
    """``log |J(e^{i theta})|``."""
    out = np.zeros_like(theta)
    for n, (a, b) in enumerate(zip(params.t, params.t_tilde), start=1):
        out += (a - b) * np.cos(n * theta)
    return out


def dynamic_range(params: MiwaParams) -> float:
    """``log(max |J| / min |J|)`` on the unit circle."""
    theta = np.linspace(0.0, 2.0 * np.pi, 4097)
    lm = _log_modulus(params, theta)
    return float(lm.max() - lm.min())


@dataclass
class WaveCoefficients:
    """Coefficients ``J(n)``, ``J~(n)`` for ``n`` in ``[-N, N]``.

    ``exact`` holds multiprecision values when the series route was used;
    kernel sums then run in that precision.
    """

    N: int
    J: np.ndarray
    J_tilde: np.ndarray
    method: str
    exact: tuple[list, list] | None = None
    dps: int = 15
    grid: int = 0

    def index(self, n: int) -> int:
        if abs(n) > self.N:
            raise IndexError(f"coefficient index {n} outside [-{self.N}, {self.N}]")
        return n + self.N

    def values(self, n: np.ndarray, tilde: bool = False) -> np.ndarray:
        n = np.asarray(n, dtype=int)
        if np.any(np.abs(n) > self.N):
            raise IndexError(f"coefficient index outside [-{self.N}, {self.N}]")
        return (self.J_tilde if tilde else self.J)[n + self.N]


def _fft_coeffs(params: MiwaParams, N: int, grid: int) -> tuple[np.ndarray, np.ndarray]:
    z = np.exp(2j * np.pi * np.arange(grid) / grid)
    expo = np.zeros(grid, dtype=complex)
    expo_t = np.zeros(grid, dtype=complex)
    for n, (a, b) in enumerate(zip(params.t, params.t_tilde), start=1):
        expo += a * z**n - b * z ** (-n)
        expo_t += b * z**n - a * z ** (-n)
    c = np.fft.fft(np.exp(expo)) / grid
    ct = np.fft.fft(np.exp(expo_t)) / grid
    idx = np.arange(-N, N + 1) % grid
    # Real times give real coefficients; the imaginary part is rounding noise.
    return c[idx].real, ct[idx].real


def _exp_series(coeffs: list, n_terms: int) -> list:
    """Taylor coefficients of ``exp(sum_j coeffs[j-1] w^j)`` up to ``w^(n_terms-1)``.

    Uses ``m e_m = sum_j j c_j e_{m-j}``.
    """
    e = [mpmath.mpf(1)] + [mpmath.mpf(0)] * (n_terms - 1)
    for m in range(1, n_terms):
        acc = mpmath.mpf(0)
        for j, c in enumerate(coeffs, start=1):
            if j > m:
                break
            if c:
                acc += j * c * e[m - j]
        e[m] = acc / m
    return e


def _series_length(times: list[float], tol_log: float) -> int:
    """Number of Taylor terms of ``exp(sum t_j w^j)`` on ``|w| = 1`` needed below ``exp(-tol_log)``."""
    scale = sum(abs(v) for v in times)
    m = max(8, int(math.e * scale) + 1)
    while True:
        # Coefficient bound ``scale^m / m!`` via Cauchy on a circle of radius ``m/scale``.
        lb = m * math.log(max(scale, 1e-300)) - math.lgamma(m + 1) if scale > 0 else -math.inf
        if lb < -tol_log:
            return m + 1
        m += 8


def _series_coeffs(params: MiwaParams, N: int, dps: int) -> tuple[list, list]:
    """Exact Laurent coefficients ``J(n)``, ``J~(n)``, ``|n| <= N``, at ``dps`` digits."""
    with mpmath.workdps(dps):
        tol_log = dps * math.log(10.0) + 10.0
        plus_t = [mpmath.mpf(v) for v in params.t]
        minus_t = [-mpmath.mpf(v) for v in params.t_tilde]
        plus_tt = [mpmath.mpf(v) for v in params.t_tilde]
        minus_tt = [-mpmath.mpf(v) for v in params.t]
        out = []
        for pos, neg in ((plus_t, minus_t), (plus_tt, minus_tt)):
            la = max(_series_length([float(v) for v in pos], tol_log), N + 1)
            lb = _series_length([float(v) for v in neg], tol_log)
            la = max(la, N + lb)
            a = _exp_series(pos, la)
            b = _exp_series(neg, lb)
            row = []
            for n in range(-N, N + 1):
                acc = mpmath.mpf(0)
                # J(n) = sum_m a[n+m] b[m]
                for m in range(max(0, -n), lb):
                    if n + m >= la:
                        break
                    acc += a[n + m] * b[m]
                row.append(acc)
            out.append(row)
    return out[0], out[1]


def wave_coeffs(
    params: MiwaParams,
    N: int,
    method: str = "auto",
    grid: int | None = None,
) -> WaveCoefficients:
    """Coefficient table ``J(n)``, ``J~(n)`` for ``|n| <= N``.

    ``method="fft"`` samples on a power-of-two grid of at least ``8N`` points
    and checks aliasing by doubling; ``"series"`` multiplies the Laurent series
    exactly in multiprecision; ``"auto"`` picks the FFT unless the unit-circle
    dynamic range makes the kernel sums lose precision.
    """
    N = int(N)
    if N < 1:
        raise ValueError("N must be at least 1")
    if method not in ("auto", "fft", "series"):
        raise ValueError(f"unknown method {method!r}")
    log_range = dynamic_range(params)
    if method == "auto":
        method = "fft" if log_range <= _FFT_LOG_RANGE else "series"
    if method == "fft":
        g = 8 * N if grid is None else int(grid)
        g = 1 << max(3, (max(g, 8 * N) - 1).bit_length())
        scale = sum(abs(a) + abs(b) for a, b in zip(params.t, params.t_tilde))
        # Grow the grid until the sampled exponential is resolved.
        while g < 4 * scale + 64:
            g *= 2
        J, Jt = _fft_coeffs(params, N, g)
        J2, Jt2 = _fft_coeffs(params, N, 2 * g)
        alias = max(np.max(np.abs(J - J2)), np.max(np.abs(Jt - Jt2)))
        if alias > _ALIAS_TOL:
            raise ConvergenceError(
                f"aliasing check failed (change {alias:.3g} on doubling a grid of {g}); use a larger grid"
            )
        return WaveCoefficients(N, J2, Jt2, "fft", grid=2 * g)
    # The kernel sum cancels terms of size exp(log_range); carry enough digits.
    dps = 30 + int(math.ceil(log_range / math.log(10.0)))
    ex, ext = _series_coeffs(params, N, dps)
    J = np.array([float(v) for v in ex])
    Jt = np.array([float(v) for v in ext])
    return WaveCoefficients(N, J, Jt, "series", exact=(ex, ext), dps=dps)


def _check_half_integer(x: float, name: str) -> int:
    """Return ``x - 1/2`` as an integer after checking ``x`` lies in ``Z + 1/2``."""
    y = float(x) - 0.5
    if abs(y - round(y)) > 1e-9:
        raise ValueError(f"{name}={x} is not a half-integer")
    return int(round(y))


def _kernel_sum(coeffs: WaveCoefficients, r0: int, s0: int, M: int):
    """``sum_{k=1}^M J(r0+k) J~(s0+k)`` with ``r0 = r - 1/2`` and the partial terms."""
    if coeffs.exact is not None:
        ex, ext = coeffs.exact
        with mpmath.workdps(coeffs.dps):
            terms = [ex[coeffs.index(r0 + k)] * ext[coeffs.index(s0 + k)] for k in range(1, M + 1)]
            total = mpmath.fsum(terms)
            tail = max(abs(t) for t in terms[-max(1, M // 4):])
            return float(total), float(tail)
    k = np.arange(1, M + 1)
    terms = coeffs.values(r0 + k) * coeffs.values(s0 + k, tilde=True)
    return float(math.fsum(terms)), float(np.max(np.abs(terms[-max(1, M // 4):])))


def discrete_kernel(coeffs: WaveCoefficients | MiwaParams, r: float, s: float, M: int | None = None) -> float:
    """``K(r, s) = sum_{k=1}^M J(r+k-1/2) J~(s+k-1/2)`` for half-integers ``r``, ``s``.

    The truncation ``M`` defaults to the largest value the coefficient table
    allows; the last quarter of the summed terms must fall below ``1e-14``.
    """
    if isinstance(coeffs, MiwaParams):
        coeffs = wave_coeffs(coeffs, 64 if M is None else 2 * M + 2 * int(abs(r) + abs(s)) + 2)
    r0 = _check_half_integer(r, "r")
    s0 = _check_half_integer(s, "s")
    limit = coeffs.N - max(r0, s0)
    if M is None:
        M = limit
    if M > limit or M < 1:
        raise ConvergenceError(
            f"truncation M={M} needs coefficients up to {max(r0, s0) + M}; table has N={coeffs.N}"
        )
    total, tail = _kernel_sum(coeffs, r0, s0, M)
    if tail > _TAIL_TOL:
        raise ConvergenceError(f"kernel sum not converged at M={M} (tail term {tail:.3g})")
    return total


def kernel_matrix(coeffs: WaveCoefficients, points: list[float], M: int | None = None) -> np.ndarray:
    pts = list(points)
    return np.array([[discrete_kernel(coeffs, a, b, M) for b in pts] for a in pts])


def correlation(coeffs: WaveCoefficients | MiwaParams, W: list[float], M: int | None = None) -> float:
    """``rho_k(W) = det K(w_i, w_j)``."""
    W = [float(w) for w in W]
    if not W:
        raise ValueError("correlation needs at least one point")
    if len(set(W)) != len(W):
        raise ValueError("correlation points must be distinct")
    if isinstance(coeffs, MiwaParams):
        span = int(max(abs(w) for w in W)) + 1
        coeffs = wave_coeffs(coeffs, 64 + span)
    K = kernel_matrix(coeffs, W, M)
    if len(W) == 1:
        return float(K[0, 0])
    return float(np.linalg.det(K))


def biorthonormality_defect(coeffs: WaveCoefficients) -> float:
    """``max |sum_k J(n+k) J~(m+k) - delta_nm|`` over ``|n|, |m| <= N/2``, ``k`` truncated to the table."""
    N = coeffs.N
    half = N // 2
    worst = 0.0
    for n in range(-half, half + 1):
        for m in range(-half, half + 1):
            k = np.arange(-N - min(n, m), N - max(n, m) + 1)
            s = math.fsum(coeffs.values(n + k) * coeffs.values(m + k, tilde=True))
            worst = max(worst, abs(s - (1.0 if n == m else 0.0)))
    return worst


def projectivity_defect(coeffs: WaveCoefficients, points: list[float], M: int) -> float:
    """``max |sum_t K(r, t) K(t, s) - K(r, s)|`` over ``r, s`` in ``points``.

    ``t`` runs over half-integers with ``|t| < T``, where ``T`` is as large as
    the table allows for truncation ``M``.
    """
    pts = [float(x) for x in points]
    lo = max(abs(x) for x in pts)
    T = coeffs.N - M - 1
    if T <= lo:
        raise ConvergenceError("coefficient table too small for the projectivity sum")
    ts = np.arange(-T, T) + 0.5
    left = np.array([[discrete_kernel(coeffs, r, t, M) for t in ts] for r in pts])
    right = np.array([[discrete_kernel(coeffs, t, s, M) for s in pts] for t in ts])
    direct = kernel_matrix(coeffs, pts, M)
    return float(np.max(np.abs(left @ right - direct)))


def multicritical(p: int, alpha_p: float, beta_ratio: float = 6.0) -> MiwaParams:
    """Miwa times with ``alpha_k = 0`` for ``0 < k < p`` and the given ``alpha_p``.

    Even ``p`` uses ``t = t_tilde`` with ``t_1..t_{p/2}`` nonzero: odd
    ``alpha_k`` vanish identically, ``|J| = 1`` on the unit circle, and
    ``p = 2`` gives the Plancherel times ``t = (alpha_2,)``.

    Odd ``p`` cannot use ``t = -t_tilde``: the degenerate critical point at
    ``z = 1`` is then dominated by a simple one at ``z = -1`` and the kernel
    grows exponentially.  Instead all ``2p`` times ``t_n``, ``t_tilde_n``
    (``n <= p``) are fixed by ``alpha_k = 0`` for ``0 < k < 2p``, ``k != p``,
    and ``beta = beta_ratio * |alpha_p|``; the large ``beta`` keeps ``z = 1``
    dominant and the extra vanishing ``alpha_k`` remove the leading
    finite-``epsilon`` corrections.
    """
    p = int(p)
    if p < 2:
        raise ValueError("p must be at least 2")
    alpha_p = float(alpha_p)
    if alpha_p == 0.0 or not math.isfinite(alpha_p):
        raise ValueError("alpha_p must be finite and nonzero")
    if p % 2 == 0:
        m = p // 2
        n = np.arange(1, m + 1, dtype=float)
        ks = list(range(2, p + 1, 2))
        A = np.array([2.0 * n ** (k + 1) / math.factorial(k) for k in ks])
        rhs = np.zeros(m)
        rhs[-1] = alpha_p
        t = np.linalg.solve(A, rhs)
        t = list(t) + [0.0] * (p - m)
        return MiwaParams(tuple(t), tuple(t))
    n = np.arange(1, p + 1, dtype=float)
    # alpha_k for even k involves only t + t_tilde, odd k only t - t_tilde.
    even = list(range(0, 2 * p, 2))
    odd = list(range(1, 2 * p, 2))
    A_sum = np.array([n ** (k + 1) / math.factorial(k) for k in even])
    A_diff = np.array([n ** (k + 1) / math.factorial(k) for k in odd])
    rhs_sum = np.zeros(p)
    rhs_sum[0] = beta_ratio * abs(alpha_p)
    rhs_diff = np.array([alpha_p if k == p else 0.0 for k in odd])
    try:
        s = np.linalg.solve(A_sum, rhs_sum)
        d = np.linalg.solve(A_diff, rhs_diff)
    except np.linalg.LinAlgError:
        raise ValueError("singular tuning system; allow more nonzero times") from None
    return MiwaParams(tuple((s + d) / 2.0), tuple((s - d) / 2.0))


def tuning_report(params: MiwaParams, p: int) -> MulticriticalSpec:
    return MulticriticalSpec(
        p=p,
        alpha_p=params.alpha(p),
        beta=params.beta,
        residual_alphas=tuple(abs(params.alpha(k)) for k in range(1, p)),
        params=params,
    )


@dataclass
class ScalingErrorTable:
    """Scaled lattice kernel against the limit kernel.

    ``error`` compares with the limit kernel at the requested ``(x, y)``;
    ``realized_error`` compares at the points the rounded lattice sites
    actually represent.
    """

    p: int
    epsilon: float
    scale: float
    points: list[tuple[float, float]]
    lattice: list[tuple[float, float]]
    scaled_kernel: np.ndarray
    limit_kernel: np.ndarray
    realized_kernel: np.ndarray
    error: np.ndarray = field(init=False)
    realized_error: np.ndarray = field(init=False)

    def __post_init__(self):
        self.error = np.abs(self.scaled_kernel - self.limit_kernel)
        self.realized_error = np.abs(self.scaled_kernel - self.realized_kernel)

    @property
    def max_error(self) -> float:
        return float(np.max(self.error))

    @property
    def max_realized_error(self) -> float:
        return float(np.max(self.realized_error))


def _round_half(x: float) -> float:
    return math.floor(x) + 0.5


def scaling_error(
    p: int,
    params: MiwaParams,
    epsilon: float,
    points: list[tuple[float, float]],
    method: str = "auto",
) -> ScalingErrorTable:
    """Compare ``(alpha_p/eps)^(1/(p+1)) K(beta/eps + ..x, beta/eps + ..y)`` with the limit kernel.

    The Miwa times are scaled by ``1/epsilon`` and lattice positions are
    rounded to the nearest half-integer.
    """
    alpha_p = params.alpha(p)
    if p % 2 == 1:
        # For alpha_p < 0 the real scaling variable uses (-1)^p alpha_p.
        alpha_p = abs(alpha_p)
    if not alpha_p > 0:
        raise ValueError("scaling needs alpha_p > 0 for even p")
    eps = float(epsilon)
    scale = (alpha_p / eps) ** (1.0 / (p + 1))
    centre = params.beta / eps
    lattice = [(_round_half(centre + scale * x), _round_half(centre + scale * y)) for x, y in points]
    lat_params = params.scaled(1.0 / eps)
    # Wave coefficients decay beyond the largest time-weighted reach; add room for the tail.
    reach = max(abs(v) for pair in lattice for v in pair)
    times = sum(abs(a) + abs(b) for a, b in zip(lat_params.t, lat_params.t_tilde))
    M = int(reach + 2.0 * times + 40)
    N = int(reach + M + 2)
    coeffs = wave_coeffs(lat_params, N, method=method)
    scaled = np.array([scale * discrete_kernel(coeffs, r, s, M) for r, s in lattice])
    limit = np.array([eval_kernel(p, x, y) for x, y in points])
    realized = np.array(
        [eval_kernel(p, (r - centre) / scale, (s - centre) / scale) for r, s in lattice]
    )
    return ScalingErrorTable(p, eps, scale, list(points), lattice, scaled, limit, realized)
