"""One-dimensional operator calculus: the S(chi, kappa) field, validity bounds,
Schmidt number and the N_max table."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import optimize, special

from .errors import DomainError, NumericError
from .model import (BiphotonState, EntanglementParams, PhiModel, hyperbolic_kernels,
                    make_sinc_gaussian)

#: Ratio up to which ``<N>`` counts as "much smaller" than ``n_max``.
OK_FRACTION = 0.1

TABLE_RATIOS = (2, 3, 4, 5, 7, 10, 15, 20)

_MP = np.array([[1, 1j], [-1j, 1]])    # [[1, +i], [-i, 1]]
_MM = np.array([[1, -1j], [1j, 1]])    # [[1, -i], [+i, 1]]
_AP = np.array([[1, -1j], [-1j, -1]])  # [[1, -i], [-i, -1]]
_AM = np.array([[1, 1j], [1j, -1]])    # [[1, +i], [+i, -1]]


def s_blocks(phi_plus, phi_minus):
    """Blocks of S from amplitude values at ``+kappa`` and ``-kappa``.

    Parameters
    ----------
    phi_plus, phi_minus : array_like
        ``phi(chi, kappa)`` and ``phi(chi, -kappa)``.

    Returns
    -------
    S : ndarray, shape (..., 4, 4)
        Ordered as (A x, A p, B x, B p).
    """
    pcp, psp = hyperbolic_kernels(phi_plus)
    pcm, psm = hyperbolic_kernels(phi_minus)
    shape = np.broadcast(pcp, pcm).shape
    S = np.zeros(shape + (4, 4), dtype=complex)
    saa = 0.25 * (pcp[..., None, None] * _MP + pcm[..., None, None] * _MM)
    sab = 0.25 * (psp[..., None, None] * _AP + np.conj(psm)[..., None, None] * _AM)
    S[..., :2, :2] = saa
    S[..., 2:, 2:] = saa
    S[..., :2, 2:] = sab
    S[..., 2:, :2] = np.conj(sab)
    return S


def s_matrix(state_or_phi, chi, kappa):
    """Evaluate the 4x4 covariance kernel ``S(chi, kappa)``.

    Parameters
    ----------
    state_or_phi : BiphotonState or PhiModel
    chi, kappa : array_like
        Broadcastable evaluation points.
    """
    phi = state_or_phi.phi if isinstance(state_or_phi, BiphotonState) else state_or_phi
    chi = np.asarray(chi, float)
    kappa = np.asarray(kappa, float)
    return s_blocks(phi(chi, kappa), phi(chi, -kappa))


@dataclass(frozen=True)
class ValidityReport:
    """Validity bounds of the operator-calculus approximation."""

    n_lim: float
    x_max: float
    n_max: float
    ok: bool


def n_lim(ratio: float) -> float:
    return 2.0 * ratio


def _xtilde_equation(x, n):
    # log of cosh(2x)(2x)^n / Gamma(n+1) minus log of min(x, 2x^2)
    lhs = (2 * x + np.log1p(np.exp(-4 * x)) - math.log(2.0)
           + n * np.log(2 * x) - special.gammaln(n + 1))
    return lhs - np.log(np.minimum(x, 2 * x * x))


def x_tilde(ratio: float) -> float:
    """Largest root of ``cosh(2x)(2x)^n/Gamma(n+1) = min(x, 2x^2)``, ``n = 2 ratio``."""
    if not ratio >= 2:
        raise DomainError("n_max requires ratio >= 2")
    n = n_lim(ratio)
    xs = np.linspace(1e-3, 4.0 * n + 10.0, 20000)
    f = _xtilde_equation(xs, n)
    sign = np.sign(f)
    idx = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    if idx.size == 0:
        raise NumericError(f"no root bracket for ratio={ratio}")
    i = idx[-1]
    return optimize.brentq(_xtilde_equation, xs[i], xs[i + 1], args=(n,), xtol=1e-14)


def n_max(ratio: float, phi: PhiModel | None = None) -> float:
    """Upper bound on the mean photon number, ``x~^2 ratio ||phi||_2^2/(2 pi ||phi||_inf^2)``.

    Parameters
    ----------
    ratio : float
        ``Delta_t/delta_t`` (>= 2).
    phi : PhiModel, optional
        Model whose norm ratio enters; defaults to the sinc-Gaussian.
    """
    phi = phi if phi is not None else make_sinc_gaussian(1.0)
    if phi.scale == 0:
        phi = phi.rescaled(1.0)
    nrm = phi.norms
    xt = x_tilde(ratio)
    return xt ** 2 * ratio * nrm["l2"] ** 2 / (2.0 * math.pi * nrm["sup"] ** 2)


def validity(params: EntanglementParams, mean_N: float, phi: PhiModel,
             ok_fraction: float = OK_FRACTION) -> ValidityReport:
    """Evaluate the validity bounds for a state with mean photon number ``mean_N``."""
    ratio = params.ratio
    unit = phi if phi.scale > 0 else phi.rescaled(1.0)
    nrm = unit.norms
    xm = math.sqrt(2 * math.pi * mean_N / ratio) * nrm["sup"] / nrm["l2"]
    nm = n_max(ratio, unit) if ratio >= 2 else float("nan")
    ok = bool(mean_N <= ok_fraction * nm) if ratio >= 2 else False
    return ValidityReport(n_lim=n_lim(ratio), x_max=xm, n_max=nm, ok=ok)


def schmidt_number(state_or_phi, params: EntanglementParams | None = None,
                   numeric: bool = False) -> float:
    """Schmidt number ``K = ratio/(2 pi) (||phi||_2/||phi||_4)^4``."""
    if isinstance(state_or_phi, BiphotonState):
        phi, params = state_or_phi.phi, state_or_phi.params
    else:
        phi = state_or_phi
    unit = phi if phi.scale > 0 else phi.rescaled(1.0)
    nrm = unit.numeric_norms() if numeric else unit.norms
    return params.ratio / (2 * math.pi) * (nrm["l2"] / nrm["l4"]) ** 4


def schmidt_ratio_closed_form() -> float:
    """Closed-form ``K/ratio`` of the sinc-Gaussian model (unnormalized sinc)."""
    return 0.75 * math.sqrt(2 * math.pi / math.log(2))


def n_max_table(ratios: Sequence[float] = TABLE_RATIOS, phi: PhiModel | None = None):
    """List of ``(ratio, n_max)`` pairs."""
    return [(float(r), n_max(r, phi)) for r in ratios]
