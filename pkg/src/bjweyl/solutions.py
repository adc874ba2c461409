"""Generalized eigenvectors, matrix orthogonal polynomials and the
non-homogeneous solver.

The three-term recurrence

    A_{n-1}* u_{n-1} + B_n u_n + A_n u_{n+1} = z u_n

is solved forward from initial data at (0, 1) or at (-1, 0); the index -1
extension uses the convention A_{-1} = -I.  P and Q are the matrix solutions
with initial data (0, I) and (I, 0) at (-1, 0).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .blockcore import BlockMatSeq, BlockVecSeq, JacobiParams

__all__ = [
    "GevSolution",
    "MgevSolution",
    "PolyPair",
    "solve_forward",
    "extend_to_minus_one",
    "compute_PQ",
    "decompose",
    "solve_nonhomogeneous",
    "columns_as_gev_check",
    "recurrence_residual",
]


@dataclass(frozen=True)
class GevSolution:
    z: complex
    seq: BlockVecSeq


@dataclass(frozen=True)
class MgevSolution:
    z: complex
    seq: BlockMatSeq


@dataclass(frozen=True)
class PolyPair:
    """First/second kind matrix orthogonal polynomial values P_n(z), Q_n(z)."""

    z: complex
    P: BlockMatSeq  # start -1
    Q: BlockMatSeq  # start -1
    n_max: int


def _steps(p: JacobiParams, z: complex, c_prev: np.ndarray, c_cur: np.ndarray,
           first_n: int, n_max: int) -> list[np.ndarray]:
    """Run the forward recurrence; c_prev/c_cur sit at indices first_n-1, first_n."""
    d = p.d
    eye = np.eye(d, dtype=complex)
    out = [c_prev, c_cur]
    prev, cur = c_prev, c_cur
    for n in range(first_n, n_max):
        rhs = (z * eye - p.B(n)) @ cur
        if n == 0:
            rhs = rhs + prev  # A_{-1}* = -I
        else:
            rhs = rhs - p.A(n - 1).conj().T @ prev
        nxt = p.solve_A(n, rhs)
        out.append(nxt)
        prev, cur = cur, nxt
    return out


def solve_forward(p: JacobiParams, z: complex, init, mode: str = "from01",
                  matrix: bool = False, n_max: int = 1):
    """Unique (m)gev with the given initial data, terms up to index n_max.

    mode "from01": init = (u_0, u_1), result starts at 0.
    mode "from_minus1": init = (u_{-1}, u_0), result starts at -1 and
    satisfies the extended recurrence (A_{-1} = -I) at n = 0.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    d = p.d
    shape = (d, d) if matrix else (d,)
    c_a = np.asarray(init[0], dtype=complex).reshape(shape)
    c_b = np.asarray(init[1], dtype=complex).reshape(shape)
    if mode == "from01":
        terms = _steps(p, z, c_a, c_b, first_n=1, n_max=n_max)
        start = 0
    elif mode == "from_minus1":
        terms = _steps(p, z, c_a, c_b, first_n=0, n_max=n_max)
        start = -1
    else:
        raise ValueError(f"unknown mode {mode!r}")
    arr = np.stack(terms)
    if matrix:
        return MgevSolution(z, BlockMatSeq(arr, start=start))
    return GevSolution(z, BlockVecSeq(arr, start=start))


def extend_to_minus_one(p: JacobiParams, z: complex, u):
    """Prepend the index -1 term (B_0 - zI) u_0 + A_0 u_1; other terms unchanged."""
    seq = u.seq
    if seq.start != 0:
        raise ValueError("solution already starts at -1")
    eye = np.eye(p.d, dtype=complex)
    t_minus1 = (p.B(0) - z * eye) @ seq.term(0) + p.A(0) @ seq.term(1)
    arr = np.concatenate([t_minus1[None], seq.terms])
    if isinstance(u, MgevSolution):
        return MgevSolution(z, BlockMatSeq(arr, start=-1))
    return GevSolution(z, BlockVecSeq(arr, start=-1))


def compute_PQ(p: JacobiParams, z: complex, n_max: int) -> PolyPair:
    """P and Q up to index n_max, from the (-1, 0) initial data (0, I) / (I, 0)."""
    eye = np.eye(p.d, dtype=complex)
    zero = np.zeros((p.d, p.d), dtype=complex)
    P = solve_forward(p, z, (zero, eye), mode="from_minus1", matrix=True, n_max=n_max)
    Q = solve_forward(p, z, (eye, zero), mode="from_minus1", matrix=True, n_max=n_max)
    return PolyPair(z, P.seq, Q.seq, n_max)


def decompose(u: MgevSolution) -> tuple[np.ndarray, np.ndarray]:
    """The unique (S, T) with U = P(z) S + Q(z) T; S = U_0, T = U_{-1}."""
    if u.seq.start != -1:
        raise ValueError("decompose expects an extended solution starting at -1")
    return u.seq.term(0).copy(), u.seq.term(-1).copy()


def solve_nonhomogeneous(p: JacobiParams, z: complex, F: BlockMatSeq, n_max: int) -> BlockMatSeq:
    """Closed-form solution of the non-homogeneous matrix recurrence.

    Returns S with S_{-1} = S_0 = 0 and
    A_n S_{n+1} + B_n S_n + A_{n-1}* S_{n-1} = z S_n + F_n for n >= 0, via

        S_n = sum_{k<n} (Q_n(z) P_k(conj z)* - P_n(z) Q_k(conj z)*) F_k.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if F.start != 0:
        raise ValueError("F must start at index 0")
    pq_z = compute_PQ(p, z, n_max)
    pq_zb = compute_PQ(p, np.conj(z), n_max)
    d = p.d
    out = np.zeros((n_max + 2, d, d), dtype=complex)  # indices -1..n_max
    for n in range(1, n_max + 1):
        qn, pn = pq_z.Q.term(n), pq_z.P.term(n)
        acc = np.zeros((d, d), dtype=complex)
        for k in range(n):
            kern = qn @ pq_zb.P.term(k).conj().T - pn @ pq_zb.Q.term(k).conj().T
            acc += kern @ F.term(k)
        out[n + 1] = acc
    return BlockMatSeq(out, start=-1)


def recurrence_residual(p: JacobiParams, z: complex, seq) -> float:
    """Max relative residual of the (extended) recurrence over the stored range.

    The residual at n is scaled by max(1, neighboring term norms) because
    solutions can grow exponentially.
    """
    eye = np.eye(p.d, dtype=complex)
    first = 0 if seq.start == -1 else 1
    worst = 0.0
    for n in range(first, seq.last_index):
        lhs = p.B(n) @ seq.term(n) + p.A(n) @ seq.term(n + 1)
        if n == 0 and seq.start == -1:
            lhs = lhs - seq.term(-1)  # A_{-1}* = -I
        elif n >= 1:
            lhs = lhs + p.A(n - 1).conj().T @ seq.term(n - 1)
        res = np.linalg.norm(lhs - z * seq.term(n))
        scale = max(1.0, *(np.linalg.norm(seq.term(m)) for m in (n - 1, n, n + 1) if m >= seq.start))
        worst = max(worst, res / scale)
    return worst


def columns_as_gev_check(p: JacobiParams, u: MgevSolution, v=None) -> dict:
    """Verify each column of U, and optionally the contraction U v, solves the
    vector recurrence; returns the max relative residual."""
    worst = 0.0
    for j in range(p.d):
        col = GevSolution(u.z, u.seq.column(j))
        worst = max(worst, recurrence_residual(p, u.z, col.seq))
    if v is not None:
        v = np.asarray(v, dtype=complex)
        contr = BlockVecSeq(u.seq.terms @ v, start=u.seq.start)
        worst = max(worst, recurrence_residual(p, u.z, contr))
    return {"max_residual": worst}
