"""Pure-Python (NumPy) implementations of the hot kernels.

These are the reference implementations; the compiled extension
``biphoton._kernels`` provides the same functions with identical signatures.
"""

import numpy as np


def log_series_sum(C, w, nA, nB):
    """Weighted sum of bivariate Taylor series of ``ln Q`` over nodes.

    Parameters
    ----------
    C : ndarray, shape (n, 3, 3)
        Coefficients ``C[k, p, q]`` of ``Q_k(dA, dB) = sum C[k,p,q] dA^p dB^q``.
        ``C[k, 0, 0]`` must be positive.
    w : ndarray, shape (n,)
        Node weights.
    nA, nB : int
        Maximal orders.

    Returns
    -------
    F : ndarray, shape (nA+1, nB+1)
        ``sum_k w_k [ln Q_k]_{ij}``.
    """
    C = np.ascontiguousarray(C, dtype=float)
    w = np.ascontiguousarray(w, dtype=float)
    n = C.shape[0]
    f = np.zeros((nA + 1, nB + 1, n))
    c00 = C[:, 0, 0]
    f[0, 0] = np.log(c00)
    inv = 1.0 / c00
    for i in range(nA + 1):
        for j in range(nB + 1):
            if i == 0 and j == 0:
                continue
            if i >= 1:
                acc = i * C[:, i, j] if (i <= 2 and j <= 2) else np.zeros(n)
                for p in range(0, min(i, 2) + 1):
                    if p == i:
                        continue  # factor (i - p) vanishes
                    for q in range(0, min(j, 2) + 1):
                        if p == 0 and q == 0:
                            continue
                        acc = acc - C[:, p, q] * (i - p) * f[i - p, j - q]
                f[i, j] = acc * inv / i
            else:
                acc = j * C[:, 0, j] if j <= 2 else np.zeros(n)
                for q in range(1, min(j, 2) + 1):
                    if q == j:
                        continue
                    acc = acc - C[:, 0, q] * (j - q) * f[0, j - q]
                f[0, j] = acc * inv / j
    return f @ w


def cos_transform(values, nodes, weights, x):
    """``sum_k weights_k values_k exp(-i nodes_k x_m)`` for each ``x_m``.

    Parameters
    ----------
    values : ndarray, shape (n,) or (r, n), complex or real
    nodes, weights : ndarray, shape (n,)
    x : ndarray, shape (m,)

    Returns
    -------
    ndarray, shape (m,) or (r, m), complex
    """
    ph = np.exp(-1j * np.outer(nodes, x))
    return (np.asarray(values) * weights) @ ph
