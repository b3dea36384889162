"""Shared independent oracles for the test suite.

Everything here is deliberately implemented with a different method than the
code under test: Floyd-Warshall instead of BFS, Taylor scaling-and-squaring
instead of eigendecomposition, plain Python loops instead of vectorized
numpy.
"""

import numpy as np
import pytest

INF = 10**9


def floyd_warshall(n, edges):
    """All-pairs shortest hop counts, O(n^3) reference."""
    dist = [[0 if i == j else INF for j in range(n)] for i in range(n)]
    for u, v in edges:
        dist[u][v] = 1
        dist[v][u] = 1
    for k in range(n):
        for i in range(n):
            dik = dist[i][k]
            if dik == INF:
                continue
            for j in range(n):
                alt = dik + dist[k][j]
                if alt < dist[i][j]:
                    dist[i][j] = alt
    return dist


def random_edges(rng, n, p=0.35):
    return [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]


def expm_taylor(a):
    """Matrix exponential by scaling-and-squaring plus a Taylor series."""
    a = np.asarray(a, dtype=complex)
    norm = np.linalg.norm(a, np.inf)
    squarings = max(0, int(np.ceil(np.log2(max(norm, 1e-30)))) + 2)
    m = a / (2 ** squarings)
    out = np.eye(a.shape[0], dtype=complex)
    term = np.eye(a.shape[0], dtype=complex)
    for k in range(1, 30):
        term = term @ m / k
        out = out + term
    for _ in range(squarings):
        out = out @ out
    return out


def embed_by_indices(matrix, support, lam, site_dims):
    """Elementwise embedding oracle via explicit index arithmetic."""
    lam_sorted = sorted(lam)
    sup_sorted = sorted(support)
    dims = [site_dims[v] for v in lam_sorted]
    total = int(np.prod(dims))
    pos = {v: i for i, v in enumerate(lam_sorted)}

    def digits(index):
        out = []
        for d in reversed(dims):
            out.append(index % d)
            index //= d
        return list(reversed(out))

    def sub_index(digs):
        out = 0
        for v in sup_sorted:
            out = out * site_dims[v] + digs[pos[v]]
        return out

    result = np.zeros((total, total), dtype=complex)
    for i in range(total):
        di = digits(i)
        for j in range(total):
            dj = digits(j)
            if all(di[pos[v]] == dj[pos[v]] for v in lam_sorted if v not in support):
                result[i, j] = matrix[sub_index(di), sub_index(dj)]
    return result


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def random_hermitian(rng, dim):
    m = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (m + m.conj().T) / 2.0
