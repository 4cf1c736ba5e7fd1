"""Phase-time coding: Franson interference between two unbalanced interferometers.

Each party sends its photon through an unbalanced Mach-Zehnder
interferometer with delay ``tau_q`` and observes one output port during the
middle time slot ``I_m``.  For symmetric phase matching the delay enters
the joint PGF only through the detuning ``tau_A - tau_B`` and the composite
phase ``phase``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import pgf as _pgf
from .errors import ContractError, DomainError, NumericError
from .model import BiphotonState, hyperbolic_kernels
from .pgf import Interval, Pgf

#: Visibility threshold used for the detuning crossing.
VISIBILITY_THRESHOLD = 0.93


@dataclass(frozen=True)
class CodingSetup:
    """Interferometer settings (times in seconds, phase in radians).

    Attributes
    ----------
    tau : float
        Pump pulse delay.
    tau_A, tau_B : float
        Interferometer delays of the two parties.
    phase : float
        Composite phase, reduced to ``[0, 2 pi)``.
    t_plus, t_minus : float
        Beam-splitter outcome transmissions; only ``1/4`` is supported by
        :func:`pgf_coding`.
    """

    tau: float = 0.0
    tau_A: float = 0.0
    tau_B: float = 0.0
    phase: float = 0.0
    t_plus: float = 0.25
    t_minus: float = 0.25

    def __post_init__(self):
        for v in (self.tau, self.tau_A, self.tau_B, self.phase):
            if not math.isfinite(v):
                raise DomainError("setup values must be finite")
        object.__setattr__(self, "phase", float(self.phase) % (2.0 * math.pi))

    @property
    def detuning(self) -> float:
        return self.tau_A - self.tau_B

    @classmethod
    def from_detuning(cls, detuning: float, phase: float = 0.0, tau: float = 0.0):
        """Symmetric split ``tau_A = tau + d/2``, ``tau_B = tau - d/2``."""
        return cls(tau=tau, tau_A=tau + 0.5 * detuning, tau_B=tau - 0.5 * detuning,
                   phase=phase)

    def check(self, Delta_t: float, fraction: float = 1.0 / 20.0):
        """Raise :class:`ContractError` unless all delay differences are small."""
        lim = fraction * Delta_t
        diffs = (self.tau_A - self.tau, self.tau_B - self.tau, self.tau_A - self.tau_B)
        if max(abs(d) for d in diffs) > lim:
            raise ContractError("interferometer delays must differ by much less than Delta_t")
        if self.t_plus != 0.25 or self.t_minus != 0.25:
            raise ContractError("only transmissions t = 1/4 are supported")


def default_window(state: BiphotonState) -> Interval:
    """Middle-slot window ``[-4 Delta_t, 4 Delta_t]``."""
    D = state.params.Delta_t
    return Interval(-4.0 * D, 4.0 * D)


def coding_poly(pc, phase: float, x: float, kappa):
    """Coefficients of ``P^2 - R^2`` in ``a^p b^q``.

    ``P = 1 + (a + b) p1 + ab p2`` and ``R = ab r2``, built from the
    hyperbolic kernel ``pc = phi_c`` at the nodes ``kappa``; ``x`` is the
    detuning in units of ``delta_t``.
    """
    cp, sp = math.cos(phase), math.sin(phase)
    ck = np.cos(x * kappa)
    sk = np.sin(x * kappa)
    p1 = 0.25 * pc
    p2 = (pc / 16.0) * (0.5 * pc - 1.0 - (0.5 * pc + 1.0) * cp * ck)
    r2 = (1.0 / 16.0) * (0.5 * (pc - 2.0)) * pc * sp * sk
    C = np.zeros(np.shape(pc) + (3, 3))
    C[..., 0, 0] = 1.0
    C[..., 1, 0] = C[..., 0, 1] = 2.0 * p1
    C[..., 2, 0] = C[..., 0, 2] = p1 ** 2
    C[..., 1, 1] = 2.0 * p2 + 2.0 * p1 ** 2
    C[..., 2, 1] = C[..., 1, 2] = 2.0 * p1 * p2
    C[..., 2, 2] = p2 ** 2 - r2 ** 2
    return C


def _coding_node_data(state: BiphotonState, setup: CodingSetup):
    phi = state.phi
    x = setup.detuning / state.params.delta_t
    cp = math.cos(setup.phase)
    k, w = phi.kappa_rule()
    ck = np.cos(x * k)
    P1 = np.zeros((3, 3))
    P1[1, 0] = P1[0, 1] = 1.0
    P1[1, 1] = -0.25
    P2 = np.zeros((3, 3))
    P2[1, 1] = -0.25 * cp

    def node(chi):
        v = phi(chi, k)
        pc, _ = hyperbolic_kernels(v)
        C = coding_poly(pc, setup.phase, x, k)
        a2 = np.abs(v) ** 2
        d1 = a2 @ w - float(phi.kappa_l2(chi))
        d2 = (a2 * ck) @ w - float(np.real(phi.kappa_l2_cos(chi, x)))
        return C, w, [(d1, P1), (d2, P2)]
    return node


def pgf_coding(state: BiphotonState, setup: CodingSetup, I_m: Interval | None = None) -> Pgf:
    """Joint PGF of the two monitored interferometer outputs in ``I_m``.

    Raises
    ------
    ContractError
        For kappa-asymmetric models or delays violating the setup invariants.
    """
    if not state.phi.symmetric_kappa:
        raise ContractError("coding PGF requires a kappa-symmetric amplitude")
    setup.check(state.params.Delta_t)
    I_m = I_m or default_window(state)
    node_fn = _coding_node_data(state, setup)

    def fn(y0A, y0B, nA, nB):
        return _pgf.region_log_series(state, [I_m], y0A, y0B, nA, nB, "joint",
                                      node_fn=node_fn)
    return Pgf(fn, "coding")


def prob_exactly_one_pair(state: BiphotonState, setup: CodingSetup,
                          I_m: Interval | None = None) -> float:
    """``p(n_A = 1; n_B = 1) = d_A d_B g(0, 0)``."""
    return pgf_coding(state, setup, I_m).pmf(1, 1)


def multi_pair_probability(g: Pgf, tol: float = 1e-9) -> float:
    """``p(n_A >= 2; n_B >= 2)`` by inclusion-exclusion on a PGF."""
    t00 = g.taylor(0.0, 0.0, 1, 1)
    t01 = g.taylor(0.0, 1.0, 1, 0)
    t10 = g.taylor(1.0, 0.0, 0, 1)
    p = (1.0 + t00[0, 0] + t00[1, 0] + t00[0, 1] + t00[1, 1]
         - t01[0, 0] - t10[0, 0] - t01[1, 0] - t10[0, 1])
    if p < -tol:
        raise NumericError(f"negative multi-pair probability {p:.3e}", achieved=p)
    return float(p)


def prob_multiple_pairs(state: BiphotonState, setup: CodingSetup,
                        I_m: Interval | None = None) -> float:
    """``p(n_A >= 2; n_B >= 2)``."""
    return multi_pair_probability(pgf_coding(state, setup, I_m))


def visibility(state: BiphotonState, detuning: float, I_m: Interval | None = None) -> float:
    """Fringe visibility of the one-pair probability versus the phase."""
    s0 = CodingSetup.from_detuning(detuning, 0.0)
    p0 = prob_exactly_one_pair(state, s0, I_m)
    pp = prob_exactly_one_pair(state, replace(s0, phase=math.pi), I_m)
    if p0 + pp == 0:
        return 0.0
    return float((p0 - pp) / (p0 + pp))


def visibility_crossing(state: BiphotonState, threshold: float = VISIBILITY_THRESHOLD,
                        tol: float = 1e-3, I_m: Interval | None = None):
    """Smallest ``|detuning| / delta_t`` in ``[0, 1]`` where the visibility drops to ``threshold``.

    Bisection on the visibility, assumed monotone in the detuning.  Returns
    ``None`` when the visibility at zero detuning is already below the
    threshold.
    """
    dt = state.params.delta_t

    def f(u):
        return visibility(state, u * dt, I_m) - threshold

    lo, hi = 0.0, 1.0
    flo = f(lo)
    if flo < 0:
        return None
    if f(hi) > 0:
        return None
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
