"""Brute-force reference computations, written without numpy reshapes or kron.

These stay deliberately naive so they cannot share a bug with the code under test.
"""

import itertools
import math

import numpy as np


def kron_by_index(a, b):
    """Kronecker product straight from its index definition."""
    ra, ca = a.shape
    rb, cb = b.shape
    out = np.zeros((ra * rb, ca * cb), dtype=complex)
    for ia, ja, ib, jb in itertools.product(range(ra), range(ca), range(rb), range(cb)):
        out[ia * rb + ib, ja * cb + jb] = a[ia, ja] * b[ib, jb]
    return out


def _flat(idx, dims):
    f = 0
    for i, d in zip(idx, dims):
        f = f * d + i
    return f


def partial_trace_by_summation(rho, dims, pos):
    """Reduced matrix over all factors but ``pos`` via explicit double-index sums."""
    kept = [d for i, d in enumerate(dims) if i != pos]
    kept_idx = list(itertools.product(*[range(d) for d in kept]))
    n = len(kept_idx)
    out = np.zeros((n, n), dtype=complex)
    for r, row in enumerate(kept_idx):
        for c, col in enumerate(kept_idx):
            total = 0j
            for t in range(dims[pos]):
                full_row = list(row)
                full_row.insert(pos, t)
                full_col = list(col)
                full_col.insert(pos, t)
                total += rho[_flat(full_row, dims), _flat(full_col, dims)]
            out[r, c] = total
    return out


def conditional_pair(p_r, p_l):
    """p̃_R, p̃_L from the conditional-probability formula."""
    norm = math.sqrt(abs(p_r) ** 2 + abs(p_l) ** 2)
    return p_r / norm, p_l / norm


def detection_branch_weights(pt_r, pt_l):
    """(1/4)(|p̃_R|² ± 2 Re(p̃_R conj p̃_L) + |p̃_L|²) for the + and - branches."""
    base = abs(pt_r) ** 2 + abs(pt_l) ** 2
    cross = 2 * (pt_r * np.conj(pt_l)).real
    return 0.25 * (base + cross), 0.25 * (base - cross)


def random_state(rng, dims):
    n = int(np.prod(dims))
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return v / np.linalg.norm(v)


def random_unitary(rng, n):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))
