import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from biphoton import (BiphotonState, ContractError, DomainError, EntanglementParams,
                      make_gaussian)
from biphoton import intermediate as im
from biphoton import pgf
from biphoton.pgf import Interval

HALF_A = Interval(0.0, math.inf)
HALF_B = Interval(-math.inf, 0.0)

# Oracle values (ratio 10, <N> = 2, m = 641): party A on [0, inf) alone and
# one count at A on [0, inf) together with one at B on (-inf, 0].
ORACLE_PARTY_P0 = 0.3831055101128478
ORACLE_PARTY_P1 = 0.35317550018992866
ORACLE_DISJOINT_P11 = 0.12497801953266932


# -- f(M, N) -----------------------------------------------------------------------

def _f_series(M, N):
    # -M N int_0^1 t (1 - t M + t^2 M^2 - ...)(1 - t N + ...) dt to fourth order
    return -M * N * (0.5 - (M + N) / 3 + (M * M + M * N + N * N) / 4
                     - (M ** 3 + M * M * N + M * N * N + N ** 3) / 5)


@given(st.floats(-0.005, 0.005), st.floats(-0.005, 0.005))
def test_f_mn_small_argument_series(M, N):
    # the neglected term is below |M N| * 5 * 0.005^4 / 6
    assert im.f_mn(M, N) == pytest.approx(_f_series(M, N), abs=1e-9 * abs(M * N) + 1e-300)


def _f_quad(M, N):
    val, _ = integrate.quad(lambda t: t / ((1 + t * M) * (1 + t * N)), 0, 1,
                            epsabs=0, epsrel=1e-13)
    return -M * N * val


@given(st.floats(0.0, 20.0), st.floats(0.0, 1.0))
def test_f_mn_matches_integral_representation(M, rel_gap):
    # covers both the closed form (well separated) and the near-diagonal branch
    N = M * (1 + rel_gap) + rel_gap
    assert im.f_mn(M, N) == pytest.approx(_f_quad(M, N), rel=1e-7, abs=1e-300)


def test_f_mn_closed_form():
    M, N = 0.7, 2.3
    ref = (N * math.log1p(M) - M * math.log1p(N)) / (M - N)
    assert im.f_mn(M, N) == pytest.approx(ref, rel=1e-14)
    # the diagonal value from the integral representation
    val, _ = integrate.quad(lambda t: t / (1 + t * M) ** 2, 0, 1)
    assert im.f_mn(M, M) == pytest.approx(-M * M * val, rel=1e-12)
    with pytest.raises(DomainError):
        im.f_mn(-1.0, 0.5)


def test_f_mn_matrices():
    rng = np.random.default_rng(0)
    Q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    m, n = np.array([0.2, 1.5, 3.0]), np.array([0.9, 1.5, 0.1])
    M, N = Q @ np.diag(m) @ Q.T, Q @ np.diag(n) @ Q.T
    ref = Q @ np.diag([im.f_mn(a, b) for a, b in zip(m, n)]) @ Q.T
    assert np.allclose(im.f_mn(M, N), ref, atol=1e-8)
    with pytest.raises(ContractError):
        im.f_mn(M, rng.normal(size=(3, 3)))


# -- error kernels -------------------------------------------------------------------

@pytest.mark.parametrize("kernel", [im.ErrorKernel.interval_border(3.0, 1.0),
                                    im.ErrorKernel.pulse_width(10.0)])
def test_error_kernel_integral(kernel):
    for cut in (1.0, 10.0, 100.0):
        val, bound = kernel.sinc_integral(cut)
        num, _ = integrate.quad(kernel.sinc_part, -cut, cut, limit=2000)
        assert val == pytest.approx(num, rel=1e-8)
        assert abs(1.0 - val) <= bound
    assert kernel.window(0.0) == 1.0 and kernel.window(kernel.omega * 1.01) == 0.0


def test_error_kernel_parameters():
    assert im.ErrorKernel.pulse_width(10.0).omega == 20.0
    assert im.ErrorKernel.interval_border(3.0, 2.0).omega == 1.5
    with pytest.raises(DomainError):
        im.ErrorKernel("other", 1.0)
    with pytest.raises(DomainError):
        im.ErrorKernel("pulse-width", 0.0)


# -- half-line PGFs --------------------------------------------------------------------

@pytest.fixture(scope="module")
def party_pgf(state10_n2):
    return im.pgf_party_intermediate(state10_n2, HALF_A, "A")


def test_party_normalization(party_pgf):
    assert party_pgf(1.0, 1.0) == pytest.approx(1.0, abs=1e-12)
    assert party_pgf(0.3, 0.0) == pytest.approx(party_pgf(0.3, 1.0), rel=1e-14)


def test_party_against_oracle(state10_n2, party_pgf):
    assert party_pgf.pmf(0, 0) == pytest.approx(ORACLE_PARTY_P0, rel=3e-4)
    assert party_pgf.pmf(1, 0) == pytest.approx(ORACLE_PARTY_P1, rel=3e-4)
    # the border correction improves on the large-interval result
    base = pgf.Pgf(lambda a, b, nA, nB: pgf.region_log_series(state10_n2, [HALF_A], a, b,
                                                              nA, nB, "A"), "large-joint")
    assert abs(party_pgf.pmf(1, 0) - ORACLE_PARTY_P1) < abs(base.pmf(1, 0) - ORACLE_PARTY_P1)


def test_party_mean_is_half(state10_n2, party_pgf):
    # the border term only redistributes counts; the mean over a half line is N/2
    assert party_pgf.derivative(1, 0, 1.0, 1.0) == pytest.approx(
        0.5 * state10_n2.mean_photons, rel=1e-6)


def test_derivative_order_limit(party_pgf):
    with pytest.raises(ContractError):
        party_pgf.pmf(3, 0)


def test_half_line_contract(state10_n2):
    with pytest.raises(ContractError):
        im.pgf_party_intermediate(state10_n2, Interval(0.0, 5.0))
    with pytest.raises(DomainError):
        im.pgf_party_intermediate(state10_n2, HALF_A, "C")
    st_ = BiphotonState(EntanglementParams.from_ratio(10.0), make_gaussian(0.2, skew=0.05))
    with pytest.raises(ContractError):
        im.pgf_party_intermediate(st_, HALF_A)


def test_correction_pgf(state10_n2):
    g = im.pgf_correction(state10_n2, HALF_A)
    assert g(1.0, 1.0) == pytest.approx(1.0, abs=1e-14)
    # ln g is linear in the complementary argument
    l0, l5, l1 = (g.log(0.2, y) for y in (0.0, 0.5, 1.0))
    assert l5 == pytest.approx(0.5 * (l0 + l1), rel=1e-12, abs=1e-15)
    assert l1 == 0.0


@pytest.mark.slow
def test_fixed_panels_match_adaptive(state10_n2):
    a = im.border_series(state10_n2, HALF_A, 0.0, 2, "correlation")
    b = im.border_series(state10_n2, HALF_A, 0.0, 2, "correlation", adaptive=True)
    assert np.allclose(a, b, rtol=1e-6, atol=1e-12)


@pytest.fixture(scope="module")
def disjoint(state10_n2):
    return {c: im.prob_one_each_disjoint(state10_n2, c) for c in ("additive", "product")}


def test_disjoint_product_composition_against_oracle(disjoint):
    assert disjoint["product"][1] == pytest.approx(ORACLE_DISJOINT_P11, rel=3e-3)


def test_disjoint_additive_frozen(disjoint):
    p_unc, p_tot = disjoint["additive"]
    assert p_unc == pytest.approx(0.124713458099, rel=1e-7)
    assert p_tot == pytest.approx(0.144790381011, rel=1e-7)
    assert disjoint["product"][0] == p_unc


def test_disjoint_composition_validation(state10_n2):
    with pytest.raises(DomainError):
        im.prob_one_each_disjoint(state10_n2, "other")
