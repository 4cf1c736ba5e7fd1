"""First-order corrections for intervals of intermediate width.

For an interval border at ``t = 0`` the large-interval PGF miscounts pairs
whose two photons straddle the border.  To first order the correction is a
convolution with the error kernel ``eps~`` in the spectral variable; with the
integral representation

    [N ln(1+M) - M ln(1+N)] / (M - N) = -M N int_0^1 t dt / ((1+tM)(1+tN))

the double spectral integral factorizes, and the whole correction reduces to
tails of one-dimensional transforms,

    int dkappa [D(kappa, 0) - int dkappa' s_Omega(kappa') D(kappa, kappa')]
        = -(w^2/pi) int_0^1 t dt int_{Omega/2}^inf |A~_t(x)|^2 dx,

with ``A_t = phi_c / (1 + t w phi_c)``, ``w = (1 - y)/2`` and
``A~(x) = int A(kappa) exp(-i kappa x) dkappa``.  The correlation PGF has the
same structure with ``C_t = phi_s / (1 + t w phi_c)``.  No removable
singularity has to be treated separately.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import linalg, special

from . import _quad
from . import pgf as _pgf
from .errors import ContractError, DomainError
from .model import BiphotonState, SincGaussianModel, hyperbolic_kernels
from .pgf import Interval, Pgf

_T_NODES = 20
_X_NODES = 8


# ---------------------------------------------------------------------------
# f(M, N)
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _t_rule(n: int = 40):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _f_mn_integral(M, N):
    t, w = _t_rule()
    if np.ndim(M) == 0:
        return -M * N * float(np.sum(w * t / ((1 + t * M) * (1 + t * N))))
    eye = np.eye(M.shape[0])
    acc = np.zeros_like(M, dtype=np.result_type(M, N, float))
    for ti, wi in zip(t, w):
        acc = acc + wi * ti * np.linalg.solve((eye + ti * M) @ (eye + ti * N), eye)
    return -(M @ N) @ acc


def f_mn(M, N, *, rtol: float = 1e-8):
    """``f(M, N) = (M - N)^{-1} [N ln(I + M) - M ln(I + N)]`` for commuting arguments.

    Scalars or square matrices.  Near ``M = N`` the continuous extension is
    evaluated through ``-M N int_0^1 t / ((1 + tM)(1 + tN)) dt``.

    Raises
    ------
    ContractError
        If matrix arguments do not commute.
    """
    if np.ndim(M) == 0 and np.ndim(N) == 0:
        M, N = complex(M) if np.iscomplexobj(M) else float(M), complex(N) if np.iscomplexobj(N) else float(N)
        if min(abs(1 + M), abs(1 + N)) == 0:
            raise DomainError("I + M and I + N must be invertible")
        scale = max(1.0, abs(M), abs(N))
        if abs(M - N) <= rtol * scale:
            return _f_mn_integral(M, N)
        return (N * np.log1p(M) - M * np.log1p(N)) / (M - N)
    M = np.asarray(M)
    N = np.asarray(N)
    scale = max(1.0, np.abs(M).max(), np.abs(N).max())
    if np.abs(M @ N - N @ M).max() > 1e-12 * scale ** 2:
        raise ContractError("f_mn requires commuting arguments")
    eye = np.eye(M.shape[0])
    D = M - N
    if np.linalg.cond(D) > 1.0 / rtol:
        return _f_mn_integral(M, N)
    num = N @ linalg.logm(eye + M) - M @ linalg.logm(eye + N)
    out = np.linalg.solve(D, num)
    return out.real if np.isrealobj(M) and np.isrealobj(N) else out


# ---------------------------------------------------------------------------
# error kernels
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ErrorKernel:
    """Spectral error kernel ``delta(k) - (Omega/pi) sinc(Omega k)``.

    ``kind="interval-border"`` uses ``Omega = |I|/delta_t`` (with the extra
    ``sqrt(2 pi)`` normalization of the interval form);
    ``kind="pulse-width"`` uses ``Omega = 2 Delta_t/delta_t``.
    """

    kind: str
    omega: float

    def __post_init__(self):
        if self.kind not in ("interval-border", "pulse-width"):
            raise DomainError("unknown error-kernel kind")
        if not self.omega > 0:
            raise DomainError("kernel width must be positive")

    @classmethod
    def interval_border(cls, width: float, delta_t: float) -> "ErrorKernel":
        return cls("interval-border", width / delta_t)

    @classmethod
    def pulse_width(cls, ratio: float) -> "ErrorKernel":
        return cls("pulse-width", 2.0 * ratio)

    def sinc_part(self, k):
        """Smooth part ``(Omega/pi) sinc(Omega k)`` (the delta part has unit weight)."""
        k = np.asarray(k, float)
        return self.omega / np.pi * np.sinc(self.omega * k / np.pi)

    def sinc_integral(self, cut: float):
        """``int_{-cut}^{cut}`` of the smooth part and a bound on the rest.

        Returns
        -------
        value : float
        tail_bound : float
            ``|1 - int_{-inf}^{inf}| <= tail_bound`` for the truncated part.
        """
        si, _ = special.sici(self.omega * cut)
        return 2.0 / np.pi * si, 2.0 / (np.pi * self.omega * cut)

    def window(self, x):
        """Inverse transform of the smooth part: indicator of ``|x| < Omega``."""
        return (np.abs(np.asarray(x, float)) < self.omega).astype(float)


# ---------------------------------------------------------------------------
# one-dimensional transforms
# ---------------------------------------------------------------------------

def _x_extent(phi) -> tuple[float, float]:
    """Largest relative time kept and the spacing of kink breakpoints."""
    if isinstance(phi, SincGaussianModel):
        return 6.0, 0.5
    return 4.0 * np.pi / phi.panel_width + 8.0, 1.0


@lru_cache(maxsize=32)
def _kappa_grid(cut: float, xmax: float):
    h = math.pi / (2.0 * xmax)
    n = int(math.ceil(cut / h))
    k = np.arange(-n, n + 1) * h
    w = np.full(k.size, h)
    w[0] = w[-1] = 0.5 * h
    k.setflags(write=False)
    w.setflags(write=False)
    return k, w


def _x_tail_rule(s: float, xmax: float, step: float):
    """Gauss-Legendre nodes on ``[s, xmax]`` with breaks at multiples of ``step``."""
    if s >= xmax:
        return np.zeros(0), np.zeros(0)
    first = math.floor(s / step) * step + step
    breaks = [s] + list(np.arange(first, xmax, step)) + [xmax]
    breaks = np.unique(np.asarray(breaks))
    return _quad.gl_panels(breaks, _X_NODES)


class _BorderCorrection:
    """Taylor coefficients (in ``w``) of the border terms at a given chi."""

    def __init__(self, state: BiphotonState):
        phi = state.phi
        if not phi.symmetric_kappa:
            raise ContractError("intermediate-width corrections require a kappa-symmetric amplitude")
        self.state = state
        self.phi = phi
        self.ratio = state.params.ratio
        self.xmax, self.step = _x_extent(phi)
        self.k, self.wk = _kappa_grid(float(min(phi.kappa_cut, 400.0)), float(self.xmax))
        self.t, self.wt = _quad.gl_panels(np.array([0.0, 1.0]), _T_NODES)

    def support(self) -> float:
        """``|chi|`` beyond which both corrections vanish."""
        return self.xmax / self.ratio

    def _phase(self, x):
        """Matrix ``w_k exp(-i k x)`` so that transforms become one matmul."""
        return np.exp(-1j * np.outer(self.k, x)) * self.wk[:, None]

    def party(self, chi: float, w0: float, order: int):
        """Coefficients of ``T(Omega)`` in ``delta = w - w0``."""
        s = self.ratio * abs(chi)
        x, wx = _x_tail_rule(s, self.xmax, self.step)
        out = np.zeros(order + 1)
        if x.size == 0:
            return out
        v = self.phi(chi, self.k)
        a2 = np.abs(v) ** 2
        pc, _ = hyperbolic_kernels(v)
        lead = 2.0 * np.real(self.phi.kappa_l2_ft(chi, x))
        E = self._phase(x)
        A0 = pc[None, :] / (1.0 + w0 * self.t[:, None] * pc[None, :])
        rows = np.stack([A0 - 2.0 * a2] + [A0 ** (n + 1) for n in range(1, order + 1)], axis=1)
        allF = (rows.reshape(-1, self.k.size) @ E).reshape(self.t.size, order + 1, x.size)
        allF[:, 0] += lead
        acc = np.zeros(order + 1)
        for t, wt, F in zip(self.t, self.wt, allF):
            # |A~|^2 coefficients: G_k = (-t)^k sum_{n+m=k} Re(F_n conj F_m)
            G = np.zeros(order + 1)
            for kk in range(order + 1):
                tot = 0.0
                for n in range(kk + 1):
                    tot += np.real(F[n] * np.conj(F[kk - n])) @ wx
                G[kk] = (-t) ** kk * tot
            acc += wt * t * G
        # multiply by -(w0 + delta)^2 / pi
        w2 = np.zeros(order + 1)
        w2[0] = w0 ** 2
        if order >= 1:
            w2[1] = 2.0 * w0
        if order >= 2:
            w2[2] = 1.0
        for i in range(order + 1):
            out[i] = -sum(w2[j] * acc[i - j] for j in range(i + 1)) / np.pi
        return out

    def correlation(self, chi: float, w0: float, order: int):
        """Coefficients of ``T^G(Omega)`` in ``delta = w - w0``."""
        s = self.ratio * abs(chi)
        x, wx = _x_tail_rule(s, self.xmax, self.step)
        out = np.zeros(order + 1)
        if x.size == 0:
            return out
        xx = np.concatenate([x, -x])
        v = self.phi(chi, self.k)
        pc, ps = hyperbolic_kernels(v)
        lead = 2.0 * math.sqrt(2.0 * math.pi) * self.phi.time_profile(chi, xx)
        E = self._phase(xx)
        den = 1.0 + w0 * self.t[:, None] * pc[None, :]
        rows = np.stack([ps / den - 2.0 * v]
                        + [ps * pc ** n / den ** (n + 1) for n in range(1, order + 1)], axis=1)
        allF = (rows.reshape(-1, self.k.size) @ E).reshape(self.t.size, order + 1, xx.size)
        allF[:, 0] += lead
        acc = np.zeros(order + 1)
        for t, wt, F in zip(self.t, self.wt, allF):
            G = np.zeros(order + 1)
            for kk in range(order + 1):
                tot = 0.0
                for n in range(kk + 1):
                    prod = np.real(F[n] * np.conj(F[kk - n]))
                    tot += (prod[: x.size] + prod[x.size:]) @ wx
                G[kk] = (-t) ** kk * tot
            acc += wt * t * G
        # multiply by -(w0 + delta) / (2 pi)
        for i in range(order + 1):
            out[i] = -(w0 * acc[i] + (acc[i - 1] if i >= 1 else 0.0)) / (2.0 * np.pi)
        return out


def _check_half_line(I: Interval) -> int:
    """+1 for ``[0, inf)``, -1 for ``(-inf, 0]``."""
    if I.lo == 0.0 and math.isinf(I.hi) and I.hi > 0:
        return 1
    if I.hi == 0.0 and math.isinf(I.lo) and I.lo < 0:
        return -1
    raise ContractError("intermediate corrections are implemented for half-line intervals only")


def _chi_range(corr: _BorderCorrection, sign: int):
    X = min(corr.support(), corr.phi.chi_extent)
    return (0.0, X) if sign > 0 else (-X, 0.0)


def _chi_points(corr: _BorderCorrection, lo: float, hi: float):
    pts = np.arange(corr.step, corr.xmax, corr.step) / corr.ratio
    pts = np.concatenate([pts, -pts])
    return [p for p in pts if lo < p < hi]


def _w_to_y(coeffs):
    """Taylor coefficients in ``delta w`` -> in ``delta y`` (``w = (1 - y)/2``)."""
    return coeffs * (-0.5) ** np.arange(len(coeffs))


def border_series(state: BiphotonState, I: Interval, y0: float, order: int,
                  kind: str = "party", *, adaptive: bool = False,
                  chi_nodes: int = 8) -> np.ndarray:
    """``int_I dchi`` of the border term, as Taylor coefficients in ``y - y0``.

    The chi-integrand is smooth between the points where the lower limit of
    the relative-time tail crosses a kink of the transforms, so a fixed
    Gauss-Legendre rule on those panels is used by default; ``adaptive=True``
    switches to adaptive quadrature (slower, used for verification).
    """
    sign = _check_half_line(I)
    corr = _BorderCorrection(state)
    w0 = 0.5 * (1.0 - y0)
    lo, hi = _chi_range(corr, sign)
    if state.phi.scale == 0 or hi <= lo:
        return np.zeros(order + 1)
    fn = corr.party if kind == "party" else corr.correlation
    pts = _chi_points(corr, lo, hi)
    if adaptive:
        val = _quad.integrate_vec(lambda c: fn(float(c), w0, order), lo, hi,
                                  epsabs=1e-11, epsrel=1e-8, points=pts,
                                  what=f"{kind} border correction")
    else:
        chi, wc = _quad.gl_panels(np.unique(np.concatenate([[lo], pts, [hi]])), chi_nodes)
        val = sum(wi * fn(float(ci), w0, order) for ci, wi in zip(chi, wc))
    return _w_to_y(np.asarray(val, dtype=float))


# ---------------------------------------------------------------------------
# PGFs
# ---------------------------------------------------------------------------

_MAX_ORDER = 2


def pgf_party_intermediate(state: BiphotonState, I: Interval, party: str = "A") -> Pgf:
    """One-party PGF of a half-line interval including the border correction.

    The returned PGF depends only on the argument of ``party``; derivative
    orders up to 2 are supported.
    """
    sign = _check_half_line(I)
    if not state.phi.symmetric_kappa:
        raise ContractError("intermediate-width corrections require a kappa-symmetric amplitude")
    if party not in ("A", "B"):
        raise DomainError("party must be 'A' or 'B'")
    c = state.params.ratio / (4.0 * np.pi)
    del sign

    def one(y0, n):
        base = _pgf.region_log_series(state, [I], y0, 1.0, n, 0, mode="A")[:, 0]
        return base + c * border_series(state, I, y0, n, "party")

    def fn(y0A, y0B, nA, nB):
        out = np.zeros((nA + 1, nB + 1))
        if party == "A":
            out[:, 0] = one(y0A, nA)
        else:
            out[0, :] = one(y0B, nB)
        return out
    return Pgf(fn, "intermediate", _MAX_ORDER)


def pgf_correction(state: BiphotonState, I: Interval, party: str | None = None) -> Pgf:
    """Correlation PGF between a half-line at party ``q`` and its complement.

    ``ln g = -(ratio/4 pi) ((1 - y_notq)/2) J(y_q)`` with ``J`` the integrated
    correlation border term.  By default ``q = A`` for ``[0, inf)`` and
    ``q = B`` for ``(-inf, 0]``.
    """
    sign = _check_half_line(I)
    if party is None:
        party = "A" if sign > 0 else "B"
    if party not in ("A", "B"):
        raise DomainError("party must be 'A' or 'B'")
    c = state.params.ratio / (4.0 * np.pi)

    def fn(y0A, y0B, nA, nB):
        yq, yn = (y0A, y0B) if party == "A" else (y0B, y0A)
        nq, nn = (nA, nB) if party == "A" else (nB, nA)
        J = border_series(state, I, yq, nq, "correlation")
        lin = np.zeros(nn + 1)
        lin[0] = -0.5 * c * (1.0 - yn)
        if nn >= 1:
            lin[1] = 0.5 * c
        out = np.outer(J, lin)
        return out if party == "A" else out.T
    return Pgf(fn, "intermediate", _MAX_ORDER)


def _chi_even(phi, n: int = 32) -> bool:
    rng = np.random.default_rng(1)
    chi = rng.uniform(0.0, 2.0, n)
    k = rng.uniform(-10.0, 10.0, n)
    return bool(np.allclose(phi(chi, k), phi(-chi, k), rtol=1e-13, atol=0.0))


def prob_one_each_disjoint(state: BiphotonState, composition: str = "additive"):
    """Probability of exactly one count in ``[0, inf)`` at A and in ``(-inf, 0]`` at B.

    Parameters
    ----------
    state : BiphotonState
    composition : {"additive", "product"}
        ``"additive"``: ``d g_A(0) d g_B(0) + d_A d_B g_A,cor(0,0) + d_A d_B g_B,cor(0,0)``.
        ``"product"``: mixed derivative of the full product
        ``g_A g_B g_A,cor g_B,cor`` (keeps the factors the additive form drops).

    Returns
    -------
    p_uncorrelated : float
        ``d g_A(0) d g_B(0)``.
    p_total : float
        Including the correlation corrections.
    """
    if composition not in ("additive", "product"):
        raise DomainError("composition must be 'additive' or 'product'")
    IA = Interval(0.0, math.inf)
    IB = Interval(-math.inf, 0.0)
    mirror = _chi_even(state.phi)
    gA = pgf_party_intermediate(state, IA, "A")
    cA = pgf_correction(state, IA, "A")
    if mirror:
        # chi -> -chi maps party A on [0, inf) onto party B on (-inf, 0]
        def swap(g):
            return Pgf(lambda a, b, nA, nB: g.log_coeffs(b, a, nB, nA).T,
                       g.provenance, g.max_order)
        gB, cB = swap(gA), swap(cA)
    else:
        gB = pgf_party_intermediate(state, IB, "B")
        cB = pgf_correction(state, IB, "B")
    p_unc = gA.pmf(1, 0) * gB.pmf(0, 1)
    if composition == "additive":
        p_tot = p_unc + cA.pmf(1, 1) + cB.pmf(1, 1)
    else:
        p_tot = _pgf.product(gA, gB, cA, cB).pmf(1, 1)
    return float(p_unc), float(p_tot)
