"""Compiled single-site heat-bath updates.

Random numbers are supplied by the caller so that chains stay reproducible
from numpy generators and independent of numba's internal RNG state.
"""

import math

import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def prob_plus(z):
    # P(+1) = 1 / (1 + exp(-z)), z = 2 * beta * m_i, without overflow
    if z >= 0.0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


@njit(cache=True, nogil=True)
def heat_bath_dense(cmat, beta, sigma, local, u, sites):
    n = sigma.shape[0]
    systematic = sites.shape[0] == 0
    for t in range(u.shape[0]):
        i = t % n if systematic else sites[t]
        new = 1 if u[t] < prob_plus(2.0 * beta * local[i]) else -1
        if new != sigma[i]:
            delta = 2.0 * new
            row = cmat[i]
            for j in range(n):
                local[j] += delta * row[j]
            sigma[i] = new


@njit(cache=True, nogil=True)
def heat_bath_csr(indptr, indices, data, beta, sigma, local, u, sites):
    n = sigma.shape[0]
    systematic = sites.shape[0] == 0
    for t in range(u.shape[0]):
        i = t % n if systematic else sites[t]
        new = 1 if u[t] < prob_plus(2.0 * beta * local[i]) else -1
        if new != sigma[i]:
            delta = 2.0 * new
            for k in range(indptr[i], indptr[i + 1]):
                local[indices[k]] += delta * data[k]
            sigma[i] = new


EMPTY_SITES = np.empty(0, dtype=np.int64)
