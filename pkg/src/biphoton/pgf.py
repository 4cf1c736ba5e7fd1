"""Probability generating functions for small and large interval widths.

A :class:`Pgf` stores ``ln g`` as a function returning bivariate Taylor
coefficients around an arbitrary expansion point, so that values,
derivatives and count probabilities are all obtained exactly (up to
quadrature error) without finite differences.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from . import _quad, series
from .errors import ContractError, DomainError, NumericError
from .model import BiphotonState, PhiModel, hyperbolic_kernels
from .opcalc import s_blocks

#: Default interval classification thresholds (fractions of delta_t).
SMALL_FRACTION = 1.0 / 20.0
LARGE_FACTOR = 20.0

_TAIL_POLY = np.array([[0.0, 1.0, 0.0],
                       [1.0, -1.0, 0.0],
                       [0.0, 0.0, 0.0]])  # a + b - ab


# ---------------------------------------------------------------------------
# intervals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Interval:
    """Time interval ``[lo, hi]`` in seconds; either end may be infinite."""

    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise DomainError("interval requires lo < hi")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def classify(self, delta_t: float, small_fraction: float = SMALL_FRACTION,
                 large_factor: float = LARGE_FACTOR) -> str:
        """Return ``"small"``, ``"large"`` or ``"intermediate"``."""
        if self.width <= small_fraction * delta_t:
            return "small"
        if self.width >= large_factor * delta_t:
            return "large"
        return "intermediate"

    def intersect(self, other: "Interval"):
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        return Interval(lo, hi) if lo < hi else None

    def minus(self, other: "Interval"):
        """Set difference as a list of intervals (0, 1 or 2 pieces)."""
        out = []
        if other.lo > self.lo:
            out.append((self.lo, min(self.hi, other.lo)))
        if other.hi < self.hi:
            out.append((max(self.lo, other.hi), self.hi))
        return [Interval(a, b) for a, b in out if a < b]

    @classmethod
    def full(cls) -> "Interval":
        return cls(-math.inf, math.inf)


# ---------------------------------------------------------------------------
# Pgf container
# ---------------------------------------------------------------------------

LogSeriesFn = Callable[[float, float, int, int], np.ndarray]


class Pgf:
    """Two-variable PGF ``g(y_A, y_B)`` with an exact derivative contract.

    Parameters
    ----------
    log_series : callable
        ``log_series(y0A, y0B, nA, nB)`` returns the ``(nA+1, nB+1)`` array of
        Taylor coefficients of ``ln g`` in ``(y_A - y0A, y_B - y0B)``.
    provenance : str
        One of ``small``, ``large-joint``, ``decomposed``, ``intermediate``,
        ``coding``, ``product``, ``efficiency``, ``marginal``, ``oracle``.
    max_order : int, optional
        Largest supported derivative order per variable (None: unlimited).
    """

    def __init__(self, log_series: LogSeriesFn, provenance: str,
                 max_order: int | None = None):
        self._fn = log_series
        self.provenance = provenance
        self.max_order = max_order
        self._cache: dict = {}

    # -- core -----------------------------------------------------------------
    def log_coeffs(self, yA: float = 1.0, yB: float = 1.0, nA: int = 0, nB: int = 0):
        """Taylor coefficients of ``ln g`` around ``(yA, yB)``."""
        for y in (yA, yB):
            if not (0.0 <= y <= 1.0):
                raise DomainError("PGF arguments must lie in [0, 1]")
        if self.max_order is not None and max(nA, nB) > self.max_order:
            raise ContractError(f"{self.provenance} PGF supports orders <= {self.max_order}")
        key = (float(yA), float(yB))
        hit = self._cache.get(key)
        if hit is not None and hit.shape[0] > nA and hit.shape[1] > nB:
            return hit[: nA + 1, : nB + 1]
        if hit is not None:
            nA, nB = max(nA, hit.shape[0] - 1), max(nB, hit.shape[1] - 1)
        arr = np.asarray(self._fn(float(yA), float(yB), int(nA), int(nB)), dtype=float)
        self._cache[key] = arr
        return arr

    def taylor(self, yA: float = 0.0, yB: float = 0.0, nA: int = 0, nB: int = 0):
        """Taylor coefficients of ``g`` around ``(yA, yB)``."""
        return series.exp_series(self.log_coeffs(yA, yB, nA, nB))

    def __call__(self, yA: float = 1.0, yB: float = 1.0) -> float:
        return float(np.exp(self.log_coeffs(yA, yB, 0, 0)[0, 0]))

    def log(self, yA: float = 1.0, yB: float = 1.0) -> float:
        return float(self.log_coeffs(yA, yB, 0, 0)[0, 0])

    def derivative(self, order_A: int, order_B: int, yA: float = 0.0, yB: float = 0.0) -> float:
        """``d^{order_A}_A d^{order_B}_B g`` at ``(yA, yB)``."""
        t = self.taylor(yA, yB, order_A, order_B)
        return float(t[order_A, order_B] * math.factorial(order_A) * math.factorial(order_B))

    def pmf(self, n_A: int, n_B: int) -> float:
        """Probability of ``n_A`` counts at A and ``n_B`` at B."""
        if n_A < 0 or n_B < 0:
            raise DomainError("counts must be non-negative")
        return float(self.taylor(0.0, 0.0, n_A, n_B)[n_A, n_B])

    def pmf_table(self, NA: int, NB: int):
        """Array ``p[n_A, n_B]`` for ``n_A <= NA``, ``n_B <= NB``."""
        return self.taylor(0.0, 0.0, NA, NB)

    # -- composition ----------------------------------------------------------------
    def marginal(self, party: str) -> "Pgf":
        """One-party PGF embedded as ``g(y, 1)`` (A) or ``g(1, y)`` (B)."""
        if party not in ("A", "B"):
            raise DomainError("party must be 'A' or 'B'")

        def fn(y0A, y0B, nA, nB):
            out = np.zeros((nA + 1, nB + 1))
            if party == "A":
                out[:, 0] = self.log_coeffs(y0A, 1.0, nA, 0)[:, 0]
            else:
                out[0, :] = self.log_coeffs(1.0, y0B, 0, nB)[0, :]
            return out
        return Pgf(fn, "marginal", self.max_order)

    def __mul__(self, other: "Pgf") -> "Pgf":
        return product(self, other)

    def with_efficiency(self, eta_A: float, eta_B: float) -> "Pgf":
        return apply_efficiency(self, eta_A, eta_B)


def constant_pgf() -> Pgf:
    """The PGF ``g = 1`` (no photons)."""
    return Pgf(lambda y0A, y0B, nA, nB: np.zeros((nA + 1, nB + 1)), "product")


def product(*pgfs: Pgf) -> Pgf:
    """Product of independent PGFs (sum of their logarithms)."""
    orders = [g.max_order for g in pgfs if g.max_order is not None]
    mo = min(orders) if orders else None

    def fn(y0A, y0B, nA, nB):
        return sum((g.log_coeffs(y0A, y0B, nA, nB) for g in pgfs),
                   np.zeros((nA + 1, nB + 1)))
    return Pgf(fn, "product", mo)


def apply_efficiency(g: Pgf, eta_A: float, eta_B: float) -> Pgf:
    """``y -> g(1 - eta_A + eta_A y_A, 1 - eta_B + eta_B y_B)``."""
    for eta in (eta_A, eta_B):
        if not (0.0 <= eta <= 1.0):
            raise DomainError("efficiency must lie in [0, 1]")

    def fn(y0A, y0B, nA, nB):
        F = g.log_coeffs(1 - eta_A + eta_A * y0A, 1 - eta_B + eta_B * y0B, nA, nB)
        sa = eta_A ** np.arange(nA + 1)
        sb = eta_B ** np.arange(nB + 1)
        return F * sa[:, None] * sb[None, :]
    return Pgf(fn, "efficiency", g.max_order)


def pmf(g: Pgf, n_A: int, n_B: int) -> float:
    """Probability ``d^{n_A} d^{n_B} g(0,0) / (n_A! n_B!)``."""
    return g.pmf(n_A, n_B)


def normalized_pmf_table(g: Pgf, tol: float = 1e-6, start: int = 8, max_order: int = 96):
    """Grow a square pmf table until its total deficit is below ``tol``.

    Returns
    -------
    table : ndarray
    deficit : float
        ``1 - sum(table)``.
    """
    n = start
    while True:
        tab = g.pmf_table(n, n)
        deficit = 1.0 - float(tab.sum())
        if abs(deficit) < tol or n >= max_order:
            if abs(deficit) >= tol:
                warnings.warn(f"pmf truncation deficit {deficit:.3e} at order {n}",
                              RuntimeWarning, stacklevel=2)
            return tab, deficit
        n = min(2 * n, max_order)


# ---------------------------------------------------------------------------
# large intervals
# ---------------------------------------------------------------------------

def _chi_bounds(phi: PhiModel, params, interval: Interval):
    X = phi.chi_extent
    lo = max(interval.lo / params.Delta_t, -X)
    hi = min(interval.hi / params.Delta_t, X)
    return lo, hi


def _large_node_data(phi: PhiModel, chi: float, general: bool):
    """Polynomial coefficients and the exact quadratic tail at one chi."""
    k, w = phi.kappa_rule()
    vp = phi(chi, k)
    if general:
        vm = phi(chi, -k)
        S = s_blocks(vp, vm)
        C = series.det_poly_coeffs(S)
        weights = w
        ell = np.abs(vp) ** 2 + np.abs(vm) ** 2
    else:
        pc, _ = hyperbolic_kernels(vp)
        C = np.zeros((k.size, 3, 3))
        C[:, 0, 0] = 1.0
        C[:, 1, 0] = C[:, 0, 1] = 0.5 * pc
        C[:, 1, 1] = -0.5 * pc
        weights = 2.0 * w   # ln det = 2 ln(1 + (a+b-ab) phi_c / 2)
        ell = 2.0 * np.abs(vp) ** 2
    exact = 2.0 * float(phi.kappa_l2(chi))
    return C, weights, [(ell @ w - exact, _TAIL_POLY)]


def _mask_party(C, mode):
    if mode == "A":
        C = C.copy()
        C[..., :, 1:] = 0.0
    elif mode == "B":
        C = C.copy()
        C[..., 1:, :] = 0.0
    return C


def _series_at(node_data, y0A, y0B, nA, nB, mode="joint"):
    C, w, tails = node_data
    a0, b0 = 1.0 - y0A, 1.0 - y0B
    Cs = series.shift_poly(_mask_party(C, mode), a0, b0)
    out = series.log_series(Cs, w, nA, nB)
    for delta, P in tails:
        out = out - delta * series.poly_series(series.shift_poly(_mask_party(P, mode), a0, b0), nA, nB)
    return out


def region_log_series(state: BiphotonState, intervals: Sequence[Interval], y0A, y0B, nA, nB,
                      mode: str = "joint", general: bool | None = None,
                      node_fn=None, epsabs=_quad.ABS_TOL, epsrel=_quad.REL_TOL):
    """``ln g`` Taylor coefficients for a union of large intervals.

    ``ln g = -(ratio/4 pi) int_{region} dchi int dkappa ln Q(chi, kappa)``.
    """
    phi, params = state.phi, state.params
    if general is None:
        general = not phi.symmetric_kappa
    if node_fn is None:
        def node_fn(chi):
            return _large_node_data(phi, chi, general)
    total = np.zeros((nA + 1, nB + 1))
    if phi.scale == 0:
        return total
    for iv in intervals:
        lo, hi = _chi_bounds(phi, params, iv)
        if not hi > lo:
            continue

        def f(c):
            return _series_at(node_fn(float(c)), y0A, y0B, nA, nB, mode).ravel()
        val = _quad.integrate_vec(f, lo, hi, epsabs=epsabs, epsrel=epsrel, what="large-interval PGF")
        total += val.reshape(nA + 1, nB + 1)
    return -params.ratio / (4.0 * np.pi) * total


def pgf_large_joint(state: BiphotonState, interval: Interval | None = None, *,
                    general: bool | None = None, check_width: bool = True) -> Pgf:
    """Joint PGF of a large interval ``I_A = I_B = I``.

    Parameters
    ----------
    state : BiphotonState
    interval : Interval, optional
        Defaults to the full time axis.
    general : bool, optional
        Force the 4x4 determinant path (default: only for kappa-asymmetric models).
    """
    interval = interval or Interval.full()
    if check_width and interval.classify(state.params.delta_t) != "large":
        raise ContractError("pgf_large_joint requires a large interval")

    def fn(y0A, y0B, nA, nB):
        return region_log_series(state, [interval], y0A, y0B, nA, nB, "joint", general)
    return Pgf(fn, "large-joint")


def _region_pgf(state, intervals, mode, general=None, provenance="decomposed"):
    if not intervals:
        return constant_pgf()

    def fn(y0A, y0B, nA, nB):
        return region_log_series(state, intervals, y0A, y0B, nA, nB, mode, general)
    return Pgf(fn, provenance)


def pgf_decompose(state: BiphotonState, I_A: Interval, I_B: Interval, *,
                  general: bool | None = None):
    """Factors ``(g_A^{I_A \\ I_B}, g_B^{I_B \\ I_A}, g_j^{I_A n I_B})``.

    Their product is the joint PGF of two large intervals.
    """
    dt = state.params.delta_t
    for iv in (I_A, I_B):
        if iv.classify(dt) != "large":
            raise ContractError("pgf_decompose requires large intervals")
    inter = I_A.intersect(I_B)
    gA = _region_pgf(state, I_A.minus(I_B), "A", general)
    gB = _region_pgf(state, I_B.minus(I_A), "B", general)
    gj = _region_pgf(state, [inter] if inter else [], "joint", general)
    return gA, gB, gj


# ---------------------------------------------------------------------------
# small intervals
# ---------------------------------------------------------------------------

def _uniform_kappa_grid(phi: PhiModel, x: float):
    h = 0.1
    if abs(x) > 0:
        h = min(h, math.pi / (4.0 * abs(x)))
    K = phi.kappa_cut
    n = int(math.ceil(K / h))
    k = np.linspace(-n * h, n * h, 2 * n + 1)
    w = np.full(k.size, h)
    w[0] = w[-1] = 0.5 * h
    return k, w


def phi_c_transform(phi: PhiModel, chi: float, x: float) -> complex:
    """``int phi_c(chi, kappa) exp(-i kappa x) dkappa``."""
    k, w = _uniform_kappa_grid(phi, x)
    v = phi(chi, k)
    pc, _ = hyperbolic_kernels(v)
    rem = np.sum((pc - 2.0 * np.abs(v) ** 2) * np.exp(-1j * k * x) * w)
    return complex(2.0 * phi.kappa_l2_ft(chi, x) + rem)


def phi_s_transform(phi: PhiModel, chi: float, x: float) -> complex:
    """``int phi_s(chi, kappa) exp(-i kappa x) dkappa``."""
    k, w = _uniform_kappa_grid(phi, x)
    v = phi(chi, k)
    _, ps = hyperbolic_kernels(v)
    rem = np.sum((ps - 2.0 * v) * np.exp(-1j * k * x) * w)
    return complex(2.0 * math.sqrt(2 * math.pi) * phi.time_profile(chi, x) + rem)


_MP = np.array([[1, 1j], [-1j, 1]])
_MM = np.array([[1, -1j], [1j, 1]])
_AP = np.array([[1, -1j], [-1j, -1]])
_AM = np.array([[1, 1j], [1j, -1]])


def _w_block(state: BiphotonState, qa: str, Ta: float, qb: str, Tb: float):
    """2x2 block ``(1/(2 pi delta_t)) int S~_{qa qb}(Ta, Tb) dkappa``."""
    p, phi = state.params, state.phi
    chi = (Ta + Tb) / (2.0 * p.Delta_t)
    x = (Ta - Tb) / p.delta_t
    pref = 1.0 / (2.0 * np.pi * p.delta_t) * 0.25
    if qa == qb:
        fp = phi_c_transform(phi, chi, x)
        fm = phi_c_transform(phi, chi, -x) if not phi.symmetric_kappa else fp
        return pref * (fp * _MP + fm * _MM)
    if qa == "A":
        Ip = phi_s_transform(phi, chi, x)
        return pref * (Ip * _AP + np.conj(Ip) * _AM)
    # BA block: conjugate of the AB integrand with the same phase factor
    Ip = phi_s_transform(phi, chi, -x)
    return np.conj(pref * (Ip * _AP + np.conj(Ip) * _AM))


def small_w_matrix(state: BiphotonState, times_A: Sequence[float], times_B: Sequence[float]):
    """Block matrix ``W`` of the small-interval determinant (2x2 per time)."""
    labels = [("A", t) for t in times_A] + [("B", t) for t in times_B]
    n = len(labels)
    W = np.zeros((2 * n, 2 * n), dtype=complex)
    for i, (qi, ti) in enumerate(labels):
        for j, (qj, tj) in enumerate(labels):
            if j < i:
                continue
            blk = _w_block(state, qi, ti, qj, tj)
            W[2 * i:2 * i + 2, 2 * j:2 * j + 2] = blk
            if j != i:
                W[2 * j:2 * j + 2, 2 * i:2 * i + 2] = blk.conj().T
    return W


def pgf_small(state: BiphotonState, T_A: float, T_B: float, width_A: float, width_B: float,
              *, check_width: bool = True, small_fraction: float = SMALL_FRACTION) -> Pgf:
    """PGF of two small intervals of widths ``width_A``, ``width_B`` at ``T_A``, ``T_B``.

    ``g = det[I + diag(a|I_A| I2, b|I_B| I2) W]^(-1/2)``.
    """
    dt = state.params.delta_t
    for wd in (width_A, width_B):
        if not wd > 0:
            raise DomainError("widths must be positive")
        if check_width and wd > small_fraction * dt:
            raise ContractError("pgf_small requires widths << delta_t")
    W = small_w_matrix(state, [T_A], [T_B])
    D = np.diag([width_A, width_A, width_B, width_B])
    C = series.det_poly_coeffs((D @ W)[None])

    def fn(y0A, y0B, nA, nB):
        Cs = series.shift_poly(C, 1.0 - y0A, 1.0 - y0B)
        return -0.5 * series.log_series(Cs, np.ones(1), nA, nB)
    return Pgf(fn, "small")


def correlation_function(state: BiphotonState, times_A: Sequence[float],
                         times_B: Sequence[float], *, return_imag: bool = False):
    """Normal-ordered correlation density ``<N_A(T_A1)...N_B(T_Bm)>``.

    Uses the block substitution in the small-interval determinant and exact
    mixed derivatives with respect to the ``tau`` variables at 0, assembled
    from cyclic trace cumulants over all set partitions of the time labels.
    """
    for ts in (times_A, times_B):
        if len(set(ts)) != len(ts):
            raise ContractError("times within a party must be distinct")
    n = len(times_A) + len(times_B)
    if n == 0:
        return 1.0
    if state.phi.scale == 0:
        return 0.0
    W = small_w_matrix(state, times_A, times_B)
    blocks = [[W[2 * i:2 * i + 2, 2 * j:2 * j + 2] for j in range(n)] for i in range(n)]
    import itertools

    cum_cache: dict = {}

    def cumulant(B):
        key = tuple(B)
        if key in cum_cache:
            return cum_cache[key]
        first, rest = B[0], B[1:]
        tot = 0.0 + 0.0j
        for perm in itertools.permutations(rest):
            order = (first,) + perm
            M = np.eye(2, dtype=complex)
            for u, v in zip(order, order[1:] + (first,)):
                M = M @ blocks[u][v]
            tot += np.trace(M)
        cum_cache[key] = 0.5 * tot
        return cum_cache[key]

    total = 0.0 + 0.0j
    for part in series.set_partitions(list(range(n))):
        term = 1.0 + 0.0j
        for B in part:
            term *= cumulant(sorted(B))
        total += term
    if return_imag:
        return float(total.real), float(total.imag)
    return float(total.real)
