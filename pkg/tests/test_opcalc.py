import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import optimize, special

from biphoton import DomainError, EntanglementParams, make_gaussian, make_sinc_gaussian
from biphoton import opcalc
from biphoton.series import det_poly_coeffs


def _xtilde_direct(ratio):
    """Largest root of the defining equation found without logarithms."""
    n = 2 * ratio

    def f(x):
        return math.cosh(2 * x) * (2 * x) ** n / special.gamma(n + 1) - min(x, 2 * x * x)

    # the left side eventually dominates; scan downwards from there for the last sign change
    xs = np.linspace(1e-3, 4 * n + 10, 40001)
    vals = np.array([f(x) for x in xs])
    idx = np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0][-1]
    return optimize.brentq(f, xs[idx], xs[idx + 1], xtol=1e-14)


@pytest.mark.parametrize("ratio", [2, 3, 5])
def test_x_tilde_against_direct_root(ratio):
    assert opcalc.x_tilde(ratio) == pytest.approx(_xtilde_direct(ratio), rel=1e-10)


def test_n_max_frozen_values():
    # derived from the root of the bound equation and the sinc-Gaussian norm ratio
    expected = {2: 1.44231017928, 3: 4.34665588903, 5: 17.1767367899, 20: 809.819339444}
    for r, v in expected.items():
        assert opcalc.n_max(r) == pytest.approx(v, rel=1e-10)


def test_n_max_monotone_and_table():
    tab = opcalc.n_max_table()
    assert [r for r, _ in tab] == list(opcalc.TABLE_RATIOS)
    vals = [v for _, v in tab]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_n_max_domain():
    with pytest.raises(DomainError):
        opcalc.n_max(1.5)


def test_n_max_depends_on_norm_ratio():
    # ||phi||_2^2/||phi||_inf^2 enters linearly
    g = make_gaussian(1.0)
    s = make_sinc_gaussian(1.0)
    ratio_g = g.norms["l2"] ** 2 / g.norms["sup"] ** 2
    ratio_s = s.norms["l2"] ** 2 / s.norms["sup"] ** 2
    assert opcalc.n_max(5, g) / opcalc.n_max(5, s) == pytest.approx(ratio_g / ratio_s, rel=1e-6)


def test_validity_report():
    p = EntanglementParams.from_ratio(10.0)
    phi = make_sinc_gaussian(1.0)
    rep = opcalc.validity(p, 1.0, phi)
    assert rep.ok and rep.n_lim == 20
    assert not opcalc.validity(p, 50.0, phi).ok
    rep = opcalc.validity(EntanglementParams.from_ratio(1.5), 0.1, phi)
    assert math.isnan(rep.n_max) and not rep.ok


def test_schmidt_closed_form_vs_numeric():
    p = EntanglementParams.from_ratio(10.0)
    phi = make_sinc_gaussian(1.0)
    k_closed = opcalc.schmidt_number(phi, p)
    k_num = opcalc.schmidt_number(phi, p, numeric=True)
    assert k_closed == pytest.approx(k_num, rel=1e-6)
    assert k_closed / p.ratio == pytest.approx(opcalc.schmidt_ratio_closed_form(), rel=1e-12)


def test_schmidt_number_gaussian_closed_form():
    # |phi|^2 = exp(-4 ln2 chi^2 - kappa^2/4): ||.||_2^4/||.||_4^4 = 2 pi/sqrt(ln 2)
    p = EntanglementParams.from_ratio(10.0)
    K = opcalc.schmidt_number(make_gaussian(1.0), p)
    assert K == pytest.approx(p.ratio / math.sqrt(math.log(2.0)), rel=1e-6)


amp = st.complex_numbers(max_magnitude=2.0, allow_nan=False, allow_infinity=False)


@given(amp, amp)
def test_s_blocks_hermitian(a, b):
    S = opcalc.s_blocks(np.array(a), np.array(b))
    assert np.allclose(S, S.conj().T, atol=1e-12)
    pc_a, _ = opcalc.hyperbolic_kernels(a)
    pc_b, _ = opcalc.hyperbolic_kernels(b)
    assert np.trace(S[:2, :2]).real == pytest.approx(0.5 * (pc_a + pc_b), abs=1e-10)


@given(amp)
def test_symmetric_determinant_is_a_square(a):
    # det(I + diag(a,a,b,b) S) = (1 + (a+b) pc/2 - ab pc/2)^2 for phi(kappa) = phi(-kappa)
    S = opcalc.s_blocks(np.array(a), np.array(a))
    C = det_poly_coeffs(S)
    pc, _ = opcalc.hyperbolic_kernels(a)
    q = np.array([[1, pc / 2, 0], [pc / 2, -pc / 2, 0], [0, 0, 0]])
    sq = np.zeros((5, 5))
    for i in range(3):
        for j in range(3):
            sq[i:i + 3, j:j + 3] += q[i, j] * q
    scale = 1 + pc ** 2
    assert np.allclose(C, sq[:3, :3], atol=1e-9 * scale)


def test_s_matrix_accepts_state(state10):
    S1 = opcalc.s_matrix(state10, 0.1, 0.5)
    S2 = opcalc.s_matrix(state10.phi, 0.1, 0.5)
    assert np.array_equal(S1, S2)
