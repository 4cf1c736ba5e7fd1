"""Bivariate truncated power series used for exact PGF differentiation.

Every PGF in this package has the form ``g = exp(L)`` where ``L`` is a
weighted integral (or sum) of logarithms of polynomials in
``a = 1 - y_A`` and ``b = 1 - y_B`` of degree at most two in each variable.
Taylor coefficients of ``L`` around any expansion point are therefore
obtained exactly by the logarithmic-derivative recurrence (see
:func:`biphoton.kernels.log_series_sum`), and those of ``g`` by the
exponential recurrence in :func:`exp_series`.
"""

from __future__ import annotations

import itertools
from math import comb

import numpy as np

from . import kernels


def shift_poly(C, a0: float, b0: float):
    """Re-expand ``Q(a, b)`` in ``dA = y_A - y0_A``, ``dB = y_B - y0_B``.

    With ``a = a0 - dA`` and ``b = b0 - dB``.

    Parameters
    ----------
    C : ndarray, shape (..., 3, 3)
        Coefficients of ``a^p b^q``.
    a0, b0 : float
        ``1 - y0_A`` and ``1 - y0_B``.
    """
    # T[p, r] = coefficient of dA^r in (a0 - dA)^p
    T_a = np.zeros((3, 3))
    T_b = np.zeros((3, 3))
    for p in range(3):
        for r in range(p + 1):
            T_a[p, r] = comb(p, r) * a0 ** (p - r) * (-1) ** r
            T_b[p, r] = comb(p, r) * b0 ** (p - r) * (-1) ** r
    return np.einsum("...pq,pr,qs->...rs", C, T_a, T_b)


def poly_series(P, nA: int, nB: int):
    """Embed a 3x3 polynomial coefficient array into an ``(nA+1, nB+1)`` array."""
    out = np.zeros((nA + 1, nB + 1))
    ma, mb = min(3, nA + 1), min(3, nB + 1)
    out[:ma, :mb] = P[:ma, :mb]
    return out


def log_series(C, w, nA: int, nB: int):
    """``sum_k w_k`` Taylor coefficients of ``ln Q_k`` (already shifted)."""
    return kernels.log_series_sum(C, w, int(nA), int(nB))


def exp_series(F):
    """Taylor coefficients of ``exp(F)`` from those of ``F``."""
    F = np.asarray(F, dtype=float)
    nA, nB = F.shape[0] - 1, F.shape[1] - 1
    G = np.zeros_like(F)
    G[0, 0] = np.exp(F[0, 0])
    for i in range(nA + 1):
        for j in range(nB + 1):
            if i == 0 and j == 0:
                continue
            if i >= 1:
                # i G_ij = sum_{p>=1, q} p F_pq G_{i-p, j-q}
                p = np.arange(1, i + 1)
                acc = 0.0
                for q in range(j + 1):
                    acc += np.dot(p * F[p, q], G[i - p, j - q])
                G[i, j] = acc / i
            else:
                q = np.arange(1, j + 1)
                G[0, j] = np.dot(q * F[0, q], G[0, j - q]) / j
    return G


def det_poly_coeffs(S):
    """Coefficients of ``det(I + diag(a, a, b, b) S)`` in ``a^p b^q``.

    Computed from the 16 principal minors of ``S``.

    Parameters
    ----------
    S : ndarray, shape (..., 4, 4)

    Returns
    -------
    C : ndarray, shape (..., 3, 3), real part of the coefficients
    """
    S = np.asarray(S)
    C = np.zeros(S.shape[:-2] + (3, 3), dtype=complex)
    for r in range(5):
        for J in itertools.combinations(range(4), r):
            p = sum(1 for j in J if j < 2)
            q = r - p
            if r == 0:
                C[..., 0, 0] += 1.0
                continue
            sub = S[..., J, :][..., :, J]
            C[..., p, q] += np.linalg.det(sub)
    return C.real


def set_partitions(items):
    """Generate all set partitions of a list."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        for k in range(len(part)):
            yield part[:k] + [[first] + part[k]] + part[k + 1:]
        yield [[first]] + part
