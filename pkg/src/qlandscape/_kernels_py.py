"""Pure-numpy density-matrix kernels.

Fallback twin of the compiled extension ``_kernels``; both expose the same
four in-place operations on a C-contiguous complex128 matrix of dimension
2**n.  Qubit 0 is the least significant bit of the basis index.

All functions mutate ``rho`` in place and return None.
"""

import numpy as np


def _blocks_1q(rho, q):
    """View rho as (outer, 2, inner, outer, 2, inner) split at qubit q."""
    dim = rho.shape[0]
    inner = 1 << q
    outer = dim // (2 * inner)
    return rho.reshape(outer, 2, inner, outer, 2, inner)


def apply_1q(rho, u, q):
    """rho <- (U on qubit q) rho (U on qubit q)^dagger, in place."""
    r = _blocks_1q(rho, q)
    uc = u.conj()
    # left multiply, materialized so the in-place write below is safe
    t = [
        [u[a, 0] * r[:, 0, :, :, b, :] + u[a, 1] * r[:, 1, :, :, b, :] for b in (0, 1)]
        for a in (0, 1)
    ]
    for a in (0, 1):
        for b in (0, 1):
            r[:, a, :, :, b, :] = t[a][0] * uc[b, 0] + t[a][1] * uc[b, 1]


def apply_2q(rho, u, q_hi, q_lo):
    """Two-qubit unitary with basis index 2*bit(q_hi) + bit(q_lo), in place.

    ``u`` must already be ordered in the (q_hi, q_lo) tensor basis and
    q_hi > q_lo.
    """
    dim = rho.shape[0]
    il = 1 << q_lo
    im = (1 << q_hi) // (2 * il)
    io = dim // (4 * il * im)
    r = rho.reshape(io, 2, im, 2, il, io, 2, im, 2, il)
    uc = u.conj()

    def block(a, b):
        return r[:, a >> 1, :, a & 1, :, :, b >> 1, :, b & 1, :]

    t = [
        [sum(u[a, c] * block(c, b) for c in range(4)) for b in range(4)]
        for a in range(4)
    ]
    for a in range(4):
        for b in range(4):
            r[:, a >> 1, :, a & 1, :, :, b >> 1, :, b & 1, :] = sum(
                t[a][d] * uc[b, d] for d in range(4)
            )


def damp(rho, q, keep, coh):
    """Single-qubit relaxation toward |0>, in place.

    Excited population is multiplied by ``keep`` (the rest moves to the
    ground block) and coherences to/from the excited level by ``coh``.
    """
    r = _blocks_1q(rho, q)
    r11 = r[:, 1, :, :, 1, :]
    r[:, 0, :, :, 0, :] += (1.0 - keep) * r11
    r11 *= keep
    r[:, 0, :, :, 1, :] *= coh
    r[:, 1, :, :, 0, :] *= coh


def depolarize(rho, q, p):
    """Single-qubit depolarizing mix with probability p, in place."""
    c_stay = 1.0 - 2.0 * p / 3.0
    c_swap = 2.0 * p / 3.0
    c_off = 1.0 - 4.0 * p / 3.0
    r = _blocks_1q(rho, q)
    b00 = r[:, 0, :, :, 0, :].copy()
    b11 = r[:, 1, :, :, 1, :].copy()
    r[:, 0, :, :, 0, :] = c_stay * b00 + c_swap * b11
    r[:, 1, :, :, 1, :] = c_swap * b00 + c_stay * b11
    r[:, 0, :, :, 1, :] *= c_off
    r[:, 1, :, :, 0, :] *= c_off
