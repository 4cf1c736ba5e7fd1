"""Joint-amplitude models phi(chi, kappa) and derived single-party quantities.

The joint temporal amplitude of a biphoton is parametrized in the
dimensionless centre-of-mass variable ``chi = (t_A + t_B) / (2 Delta_t)`` and
the dimensionless spectral variable ``kappa`` conjugate to
``(t_A - t_B) / delta_t``.  All closed-form statistics are expressed through
the hyperbolic kernels

.. math::

    \\phi_c = \\cosh(2|\\phi|) - 1, \\qquad
    \\phi_s = \\sinh(2|\\phi|)\\, \\phi / |\\phi| .

Fourier convention (unitary, angular)::

    F[f](x) = (2 pi)^(-1/2) \\int f(kappa) exp(-i kappa x) d kappa
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import optimize, special

from . import _quad
from .errors import ContractError, DomainError, NumericError, ValidityWarning

LN2 = math.log(2.0)
SQRT2PI = math.sqrt(2.0 * math.pi)


# ---------------------------------------------------------------------------
# parameters
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EntanglementParams:
    """Temporal widths of the biphoton.

    Parameters
    ----------
    delta_t : float
        Temporal correlation width (seconds).
    Delta_t : float
        Temporal FWHM of each party's pulse (seconds).
    """

    delta_t: float
    Delta_t: float

    def __post_init__(self):
        if not (self.delta_t > 0 and self.Delta_t > 0):
            raise DomainError("delta_t and Delta_t must be positive")
        if self.Delta_t < self.delta_t * (1 - 1e-12):
            raise DomainError("Delta_t/delta_t must be >= 1")

    @property
    def ratio(self) -> float:
        """Degree of entanglement ``Delta_t / delta_t``."""
        return self.Delta_t / self.delta_t

    @classmethod
    def from_ratio(cls, ratio: float, delta_t: float = 1.0) -> "EntanglementParams":
        return cls(delta_t=delta_t, Delta_t=ratio * delta_t)


# ---------------------------------------------------------------------------
# phi models
# ---------------------------------------------------------------------------

def hyperbolic_kernels(phi):
    """Return ``(phi_c, phi_s)`` for complex amplitude values ``phi``.

    The removable singularity of ``phi_s`` at ``phi = 0`` is evaluated as 0.
    """
    phi = np.asarray(phi, dtype=complex)
    r = np.abs(phi)
    # cosh(2r) - 1 = 2 sinh(r)^2 avoids cancellation for small r
    pc = 2.0 * np.sinh(r) ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(r > 0, np.sinh(2.0 * r) / np.where(r > 0, r, 1.0), 2.0)
    ps = ratio * phi
    return pc, ps


class PhiModel:
    """Base class of joint-amplitude models ``phi(chi, kappa) = scale * shape``.

    Subclasses implement :meth:`shape`.  Numerical defaults are provided for
    every derived quantity; subclasses with closed forms override them.

    Attributes
    ----------
    scale : float
        Dimensionless amplitude ``lambda``.
    symmetric_kappa : bool
        Whether ``phi(chi, kappa) = phi(chi, -kappa)``.
    chi_extent : float
        ``|phi|`` is negligible (below ~1e-16 relative) for ``|chi|`` beyond this.
    kappa_cut : float
        Truncation radius of kappa quadratures.
    panel_width : float
        Width of Gauss-Legendre panels in kappa.
    """

    symmetric_kappa: bool = False
    chi_extent: float = 4.0
    kappa_cut: float = 12.0
    panel_width: float = 1.0
    panel_nodes: int = 16
    #: True when ``shape(chi, kappa) = chi_profile(chi) * kappa_profile(kappa)``.
    separable: bool = False

    def __init__(self, scale: float = 1.0):
        if not scale >= 0:
            raise DomainError("scale must be non-negative")
        self.scale = float(scale)
        self._norm_cache = None

    # -- to implement --------------------------------------------------
    def shape(self, chi, kappa):  # pragma: no cover - abstract
        raise NotImplementedError

    def chi_profile(self, chi):  # pragma: no cover - separable models only
        raise NotImplementedError

    def kappa_profile(self, kappa):  # pragma: no cover - separable models only
        raise NotImplementedError

    # -- basic evaluation ------------------------------------------------
    def __call__(self, chi, kappa):
        return self.scale * np.asarray(self.shape(chi, kappa), dtype=complex)

    def rescaled(self, scale: float) -> "PhiModel":
        """Return a copy with a different scale factor."""
        new = object.__new__(type(self))
        new.__dict__.update(self.__dict__)
        if not scale >= 0:
            raise DomainError("scale must be non-negative")
        new.scale = float(scale)
        new._norm_cache = None
        return new

    def phi_c(self, chi, kappa):
        """``cosh(2|phi|) - 1``."""
        return hyperbolic_kernels(self(chi, kappa))[0]

    def phi_s(self, chi, kappa):
        """``sinh(2|phi|) phi/|phi|`` (0 where ``phi = 0``)."""
        return hyperbolic_kernels(self(chi, kappa))[1]

    # -- quadrature rules --------------------------------------------------
    def kappa_rule(self):
        """Composite Gauss-Legendre rule on ``[-kappa_cut, kappa_cut]``."""
        return _quad.symmetric_rule(float(self.kappa_cut), float(self.panel_width),
                                    int(self.panel_nodes))

    def chi_rule(self, n: int = 24):
        return _quad.symmetric_rule(float(self.chi_extent), 0.5, n)

    # -- kappa-integrated quantities ---------------------------------------
    def kappa_l2_tail(self, chi):
        """``int_{|kappa| > kappa_cut} |phi|^2 dkappa`` (0 for fast-decaying models)."""
        return np.zeros_like(np.asarray(chi, dtype=float))

    def kappa_l2(self, chi):
        """``int |phi(chi, kappa)|^2 dkappa``."""
        chi = np.asarray(chi, dtype=float)
        k, w = self.kappa_rule()
        vals = np.abs(self(chi[..., None], k)) ** 2
        return vals @ w + self.kappa_l2_tail(chi)

    def kappa_l2_ft(self, chi, x):
        """``int |phi(chi, kappa)|^2 exp(-i kappa x) dkappa`` (complex)."""
        chi, x = np.broadcast_arrays(np.asarray(chi, float), np.asarray(x, float))
        k, w = self.kappa_rule()
        vals = np.abs(self(chi[..., None], k)) ** 2
        return np.sum(vals * np.exp(-1j * k * x[..., None]) * w, axis=-1)

    def kappa_l2_cos(self, chi, x):
        """``int |phi|^2 cos(kappa x) dkappa``."""
        return np.real(self.kappa_l2_ft(chi, x))

    def time_profile(self, chi, x):
        """``(2 pi)^(-1/2) int phi(chi, kappa) exp(-i kappa x) dkappa``."""
        chi, x = np.broadcast_arrays(np.asarray(chi, float), np.asarray(x, float))
        k, w = self.kappa_rule()
        vals = self(chi[..., None], k)
        return np.sum(vals * np.exp(-1j * k * x[..., None]) * w, axis=-1) / SQRT2PI

    def time_profile_sq_tail(self, chi, s):
        """``int_s^inf (|F(x)|^2 + |F(-x)|^2) dx`` with ``F = time_profile(chi, .)``."""
        chi = np.atleast_1d(np.asarray(chi, float))
        s = np.broadcast_to(np.asarray(s, float), chi.shape)
        out = np.empty(chi.shape)
        xmax = 4.0 * np.pi / self.panel_width + 8.0
        for idx, (c, s0) in enumerate(zip(chi.ravel(), s.ravel())):
            if s0 >= xmax:
                out.flat[idx] = 0.0
                continue
            x, wx = _quad.gl_panels(np.linspace(s0, xmax, 64), 12)
            f = np.abs(self.time_profile(c, x)) ** 2 + np.abs(self.time_profile(c, -x)) ** 2
            out.flat[idx] = f @ wx
        return out

    def kappa_l2_cos_sq_tail(self, chi, s):
        """``int_s^inf |int |phi|^2 e^{-i kappa x} dkappa|^2 dx`` (even integrand assumed)."""
        chi = np.atleast_1d(np.asarray(chi, float))
        s = np.broadcast_to(np.asarray(s, float), chi.shape)
        out = np.empty(chi.shape)
        xmax = 4.0 * np.pi / self.panel_width + 8.0
        for idx, (c, s0) in enumerate(zip(chi.ravel(), s.ravel())):
            if s0 >= xmax:
                out.flat[idx] = 0.0
                continue
            x, wx = _quad.gl_panels(np.linspace(s0, xmax, 64), 12)
            out.flat[idx] = (np.abs(self.kappa_l2_ft(c, x)) ** 2) @ wx
        return out

    # -- norms -------------------------------------------------------------
    def _numeric_norms(self):
        chi, wc = self.chi_rule()
        k, wk = self.kappa_rule()
        a2 = np.abs(self(chi[:, None], k[None, :])) ** 2
        l2sq = wc @ (a2 @ wk + self.kappa_l2_tail(chi))
        l4 = wc @ ((a2 ** 2) @ wk)
        sup = float(np.sqrt(a2.max()))
        return dict(l2=math.sqrt(l2sq), l4=l4 ** 0.25, sup=sup)

    def numeric_norms(self):
        """L2, L4 and sup norms of ``|phi|`` over the plane by quadrature."""
        return self._numeric_norms()

    @property
    def norms(self):
        """Cached dict with keys ``l2``, ``l4``, ``sup``."""
        if self._norm_cache is None:
            self._norm_cache = self._closed_norms() or self._numeric_norms()
        return self._norm_cache

    def _closed_norms(self):
        return None

    def check_symmetry(self, n: int = 64, seed: int = 0) -> bool:
        """Check ``phi(chi, kappa) = phi(chi, -kappa)`` on random samples."""
        rng = np.random.default_rng(seed)
        chi = rng.uniform(-2, 2, n)
        k = rng.uniform(-10, 10, n)
        a, b = self(chi, k), self(chi, -k)
        return bool(np.allclose(a, b, rtol=1e-12, atol=1e-14 * max(self.scale, 1e-300)))


class SincGaussianModel(PhiModel):
    """``phi = lambda * alpha(chi) * sinc(kappa/2)`` with Gaussian ``alpha``.

    ``sinc`` is the unnormalized ``sin(x)/x``; ``|alpha|^2`` has unit FWHM and
    ``alpha(0) = 1``.  In time, the kernel is the rectangle of width
    ``delta_t`` in ``t_A - t_B``.
    """

    symmetric_kappa = True
    separable = True
    chi_extent = 4.5
    kappa_cut = 800.0
    panel_width = 2.0 * math.pi
    panel_nodes = 20

    def chi_profile(self, chi):
        return np.exp(-2.0 * LN2 * np.asarray(chi, float) ** 2)

    def kappa_profile(self, kappa):
        return np.sinc(np.asarray(kappa, float) / (2.0 * np.pi))

    def shape(self, chi, kappa):
        return self.chi_profile(chi) * self.kappa_profile(kappa)

    # closed forms ----------------------------------------------------------
    def kappa_l2_tail(self, chi):
        # int_{|k|>K} 4 sin^2(k/2)/k^2 dk = 4 int_K^inf (1 - cos k)/k^2 dk
        K = self.kappa_cut
        si, ci = special.sici(K)
        tail_cos = math.cos(K) / K - (math.pi / 2 - si)  # int_K^inf cos k / k^2
        tail = 4.0 * (1.0 / K - tail_cos)
        return self.scale ** 2 * self.chi_profile(chi) ** 2 * tail

    def kappa_l2(self, chi):
        return 2.0 * np.pi * self.scale ** 2 * self.chi_profile(chi) ** 2

    def kappa_l2_ft(self, chi, x):
        tri = np.clip(1.0 - np.abs(np.asarray(x, float)), 0.0, None)
        return (2.0 * np.pi * self.scale ** 2 * self.chi_profile(chi) ** 2 * tri) + 0j

    def kappa_l2_cos(self, chi, x):
        return np.real(self.kappa_l2_ft(chi, x))

    def time_profile(self, chi, x):
        ax = np.abs(np.asarray(x, float))
        box = np.where(ax < 0.5, 1.0, np.where(ax == 0.5, 0.5, 0.0))
        return (SQRT2PI * self.scale * self.chi_profile(chi) * box) + 0j

    def time_profile_sq_tail(self, chi, s):
        # |F|^2 = 2 pi lambda^2 alpha^2 on |x| < 1/2
        length = np.clip(0.5 - np.asarray(s, float), 0.0, None)
        return 2.0 * (2.0 * np.pi * self.scale ** 2 * self.chi_profile(chi) ** 2) * length

    def kappa_l2_cos_sq_tail(self, chi, s):
        c = 2.0 * np.pi * self.scale ** 2 * self.chi_profile(chi) ** 2
        u = np.clip(1.0 - np.asarray(s, float), 0.0, 1.0)
        return c ** 2 * u ** 3 / 3.0

    def _closed_norms(self):
        lam = self.scale
        l2sq = lam ** 2 * math.sqrt(math.pi / (4 * LN2)) * 2 * math.pi
        l4 = lam ** 4 * math.sqrt(math.pi / (8 * LN2)) * 4 * math.pi / 3
        return dict(l2=math.sqrt(l2sq), l4=l4 ** 0.25, sup=lam)


class FunctionPhiModel(PhiModel):
    """Model defined by an arbitrary fast-decaying shape function.

    Parameters
    ----------
    shape_fn : callable
        ``shape_fn(chi, kappa) -> complex`` (broadcasting).
    scale : float
    symmetric_kappa : bool
    chi_extent, kappa_cut : float
        Support radii beyond which the shape is negligible.
    """

    def __init__(self, shape_fn: Callable, scale: float = 1.0, *,
                 symmetric_kappa: bool = False, chi_extent: float = 4.0,
                 kappa_cut: float = 12.0, panel_width: float = 1.0,
                 panel_nodes: int = 16, chi_fn: Optional[Callable] = None,
                 kappa_fn: Optional[Callable] = None):
        super().__init__(scale)
        self._shape_fn = shape_fn
        self.symmetric_kappa = symmetric_kappa
        self.chi_extent = chi_extent
        self.kappa_cut = kappa_cut
        self.panel_width = panel_width
        self.panel_nodes = panel_nodes
        self._chi_fn, self._kappa_fn = chi_fn, kappa_fn
        self.separable = chi_fn is not None and kappa_fn is not None
        if symmetric_kappa and not self.check_symmetry():
            raise ContractError("shape is not symmetric in kappa")

    def shape(self, chi, kappa):
        return self._shape_fn(np.asarray(chi, float), np.asarray(kappa, float))

    def chi_profile(self, chi):
        return self._chi_fn(np.asarray(chi, float))

    def kappa_profile(self, kappa):
        return self._kappa_fn(np.asarray(kappa, float))


def make_sinc_gaussian(lam: float) -> SincGaussianModel:
    """Built-in collinear degenerate model ``lambda alpha(chi) sinc(kappa/2)``.

    Parameters
    ----------
    lam : float
        Scale factor ``lambda >= 0``.
    """
    if not lam >= 0:
        raise DomainError("lambda must be non-negative")
    return SincGaussianModel(lam)


def make_gaussian(lam: float, chirp: float = 0.0, skew: float = 0.0) -> FunctionPhiModel:
    """Doubly Gaussian model with optional phase terms.

    ``phi = lam * exp(-2 ln2 chi^2) * exp(-kappa^2/8) * exp(i (chirp*chi*kappa + skew*kappa^3))``

    ``chirp`` couples the variables (non-separable), ``skew`` breaks the
    kappa-symmetry of ``phi`` while keeping ``|phi|`` even.
    """
    def shape(chi, k):
        return (np.exp(-2 * LN2 * chi ** 2 - k ** 2 / 8.0)
                * np.exp(1j * (chirp * chi * k + skew * k ** 3)))

    sym = chirp == 0 and skew == 0
    sep = chirp == 0
    return FunctionPhiModel(
        shape, lam, symmetric_kappa=sym, chi_extent=4.5, kappa_cut=20.0,
        panel_width=1.0, panel_nodes=16,
        chi_fn=(lambda c: np.exp(-2 * LN2 * c ** 2)) if sep else None,
        kappa_fn=(lambda k: np.exp(-k ** 2 / 8.0) * np.exp(1j * skew * k ** 3)) if sep else None,
    )


# ---------------------------------------------------------------------------
# photon numbers
# ---------------------------------------------------------------------------

def _kappa_integral_phic(phi: PhiModel, chi):
    """``int phi_c(chi, kappa) dkappa`` with the quadratic tail handled exactly."""
    chi = np.asarray(chi, float)
    k, w = phi.kappa_rule()
    v = phi(chi[..., None], k)
    pc, _ = hyperbolic_kernels(v)
    rem = (pc - 2.0 * np.abs(v) ** 2) @ w
    return rem + 2.0 * phi.kappa_l2(chi)


def mean_photon_number(phi: PhiModel, params: EntanglementParams, *,
                       epsabs=_quad.ABS_TOL, epsrel=_quad.REL_TOL) -> float:
    """Mean photon number of one party, ``ratio/(4 pi) int int phi_c``.

    Raises
    ------
    NumericError
        If the adaptive chi-quadrature misses the tolerance.
    """
    if phi.scale == 0:
        return 0.0
    X = phi.chi_extent
    val = _quad.integrate_vec(lambda c: np.atleast_1d(_kappa_integral_phic(phi, c)),
                              -X, X, epsabs=epsabs * 1e-2, epsrel=epsrel * 1e-2,
                              what="mean photon number")
    return float(params.ratio / (4.0 * np.pi) * val[0])


def trace_r2(phi: PhiModel, params: EntanglementParams) -> float:
    """Quadratic-order photon number ``ratio/(2 pi) ||phi||_2^2``."""
    return params.ratio / (2.0 * np.pi) * phi.norms["l2"] ** 2


def calibrate_scale(target_N: float, params: EntanglementParams, template: PhiModel,
                    *, rtol: float = 1e-10) -> PhiModel:
    """Rescale ``template`` so that its mean photon number equals ``target_N``.

    The root is bracketed starting from the quadratic-order inverse and then
    polished with Brent's method.  Exceeding the validity bound only warns.
    """
    if not target_N >= 0:
        raise DomainError("target_N must be non-negative")
    if target_N == 0:
        return template.rescaled(0.0)
    unit = template.rescaled(1.0)
    l2 = unit.norms["l2"]
    lam0 = math.sqrt(2 * math.pi * target_N / params.ratio) / l2

    def f(lam):
        return mean_photon_number(unit.rescaled(lam), params) - target_N

    lo, hi = 0.0, lam0
    fhi = f(hi)
    it = 0
    while fhi < 0:
        lo, hi = hi, hi * 1.5
        fhi = f(hi)
        it += 1
        if it > 60:
            raise NumericError("calibrate_scale: no bracket found")
    # mean photon number grows faster than quadratically, so lam0 is an upper bound
    lam = optimize.brentq(f, lo, hi, xtol=1e-15, rtol=rtol * 1e-2, maxiter=200)
    out = unit.rescaled(lam)
    _warn_validity(params, target_N, out)
    return out


def _warn_validity(params, mean_N, phi):
    if params.ratio < 2:
        return
    from .opcalc import validity
    rep = validity(params, mean_N, phi)
    if not rep.ok:
        warnings.warn(f"mean photon number {mean_N:g} is not << n_max={rep.n_max:.3g}",
                      ValidityWarning, stacklevel=3)


@dataclass(frozen=True)
class BiphotonState:
    """A model together with its widths and implied mean photon number."""

    params: EntanglementParams
    phi: PhiModel
    mean_photons: float = field(default=float("nan"))
    validity: object = None

    @classmethod
    def from_model(cls, phi: PhiModel, params: EntanglementParams) -> "BiphotonState":
        N = mean_photon_number(phi, params)
        rep = None
        if params.ratio >= 2:
            from .opcalc import validity
            rep = validity(params, N, phi)
            if not rep.ok:
                warnings.warn(f"mean photon number {N:g} is not << n_max={rep.n_max:.3g}",
                              ValidityWarning, stacklevel=2)
        return cls(params, phi, N, rep)

    @classmethod
    def calibrated(cls, target_N: float, params: EntanglementParams,
                   template: Optional[PhiModel] = None) -> "BiphotonState":
        """State whose mean photon number (per party) equals ``target_N``."""
        template = template if template is not None else make_sinc_gaussian(1.0)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ValidityWarning)
            phi = calibrate_scale(target_N, params, template)
        return cls.from_model(phi, params)


# ---------------------------------------------------------------------------
# marginals
# ---------------------------------------------------------------------------

def marginal_intensity(state: BiphotonState, t):
    """Photon rate of one party at time ``t`` (per second).

    ``1/(4 pi delta_t) int phi_c(t/Delta_t, kappa) dkappa``
    """
    p = state.params
    t = np.asarray(t, float)
    return _kappa_integral_phic(state.phi, t / p.Delta_t) / (4.0 * np.pi * p.delta_t)


def marginal_spectrum(state: BiphotonState, omega):
    """Spectral density of one party at angular frequency ``omega``.

    ``Delta_t/(4 pi) int phi_c(chi, delta_t omega) dchi``
    """
    p, phi = state.params, state.phi
    omega = np.asarray(omega, float)
    chi, w = phi.chi_rule(32)
    v = phi(chi, (p.delta_t * omega)[..., None])
    pc, _ = hyperbolic_kernels(v)
    return p.Delta_t / (4.0 * np.pi) * (pc @ w)
