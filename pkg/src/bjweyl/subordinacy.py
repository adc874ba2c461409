"""Interpolated-length diagnostics on the real axis: the length function
pairing the P/Q seminorm product with 1/(2 eps), solution-space Gram
matrices, and the nonsubordinacy verdict with its spectral-consequence
report.

The Gram matrix G_t is built from the transfer chain: with c = (u_{-1}, u_0)
the quadratic form c* G_t c equals the squared interpolated seminorm of the
extended solution with that initial data over [0, t].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .blockcore import JacobiParams
from .seminorms import SeminormKind, affine_interp
from .solutions import compute_PQ
from .transfer import transfer_step

__all__ = [
    "JLSample",
    "GramTrajectory",
    "HorizonExhausted",
    "jl_function",
    "gram_nodes",
    "solution_gram",
    "nonsub_diagnostic",
    "spectral_consequence_report",
]

HORIZON_START = 64
HORIZON_CAP = 2 ** 20
DEFAULT_COND_CAP = 1e3


class HorizonExhausted(RuntimeError):
    """The seminorm product stayed below its target up to the horizon cap."""


@dataclass(frozen=True)
class JLSample:
    lam: float
    eps: float
    ell: float
    residual: float  # relative defect of the defining equation


@dataclass(frozen=True)
class GramTrajectory:
    lam: float
    nodes: tuple  # (t, G_t, cond)


def _pq_sq_nodes(p: JacobiParams, lam: float, horizon: int, kind: SeminormKind):
    """Cumulative squared term functionals of P and Q over indices 0..horizon."""
    pq = compute_PQ(p, lam, horizon)

    def nodes(seq):
        if kind is SeminormKind.matrix_norm:
            sq = [np.linalg.norm(seq.term(k), 2) ** 2 for k in range(horizon + 1)]
        elif kind is SeminormKind.matrix_minmod:
            sq = [np.linalg.svd(seq.term(k), compute_uv=False)[-1] ** 2
                  for k in range(horizon + 1)]
        else:
            raise ValueError("length function needs a matrix seminorm variant")
        return np.cumsum(sq)

    return nodes(pq.P), nodes(pq.Q)


def jl_function(p: JacobiParams, lam: float, eps: float,
                variant: SeminormKind = SeminormKind.matrix_norm) -> JLSample:
    """The unique length ell with ||P||_[0,ell] * ||Q||_[0,ell] = 1/(2 eps).

    The product is continuous and strictly increasing in the length, so the
    root is bracketed by doubling the recurrence horizon (64 up to 2^20) and
    then bisected.  Exhausting the horizon raises instead of guessing.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    target = 1.0 / (2.0 * eps)
    horizon = HORIZON_START
    while True:
        pn, qn = _pq_sq_nodes(p, lam, horizon, variant)
        if math.sqrt(pn[-1] * qn[-1]) >= target:
            break
        if horizon >= HORIZON_CAP:
            raise HorizonExhausted(
                f"seminorm product below {target:.6g} up to t = {horizon}")
        horizon *= 2

    def f(t: float) -> float:
        return math.sqrt(affine_interp(pn, t) * affine_interp(qn, t))

    lo, hi = 0.0, float(horizon)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) < target:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-13 * max(1.0, hi):
            break
    ell = 0.5 * (lo + hi)
    residual = abs(f(ell) - target) / target
    return JLSample(float(lam), float(eps), ell, residual)


def _sel_chain(p: JacobiParams, z: complex, n: int) -> list[np.ndarray]:
    """Lower d-block rows of R_0 = I, R_1, ..., R_n."""
    d = p.d
    sel = np.hstack([np.zeros((d, d)), np.eye(d)]).astype(complex)
    out = [sel.copy()]
    r = np.eye(2 * d, dtype=complex)
    for k in range(n):
        r = transfer_step(p, z, k)["T"] @ r
        out.append(r[d:].copy())
    return out


def gram_nodes(p: JacobiParams, z: complex, ts) -> dict:
    """G_t for each requested t >= 0; c* G_t c = ||u(c)||^2 over [0, t].

    Integer nodes accumulate (Sel R_k)*(Sel R_k); fractional parts add the
    next term with the interpolation weight.
    """
    ts = [float(t) for t in ts]
    if any(t < 0 for t in ts):
        raise ValueError("t values must be >= 0")
    top = max(math.floor(t) + 1 for t in ts) if ts else 0
    chain = _sel_chain(p, z, top)
    d = p.d
    cum = np.zeros((top + 1, 2 * d, 2 * d), dtype=complex)
    acc = np.zeros((2 * d, 2 * d), dtype=complex)
    for k in range(top + 1):
        acc = acc + chain[k].conj().T @ chain[k]
        cum[k] = acc
    out = {}
    for t in ts:
        n = math.floor(t)
        g = cum[n].copy()
        frac = t - n
        if frac > 0:
            g = g + frac * (chain[n + 1].conj().T @ chain[n + 1])
        out[t] = g
    return out


COND_SATURATION = 1e16


def _cond(g: np.ndarray) -> float:
    """Condition number of the PSD Gram, clamped at the double-precision
    resolution limit: once the spread passes ~1e16 the small eigenvalue is
    pure rounding, so the value saturates instead of fluctuating."""
    ev = np.linalg.eigvalsh((g + g.conj().T) / 2)
    if ev[-1] <= 0:
        return math.inf
    floor = ev[-1] / COND_SATURATION
    return float(ev[-1] / max(ev[0], floor))


def solution_gram(p: JacobiParams, lam: float, t_nodes) -> GramTrajectory:
    """Gram trajectory at real spectral parameter lam over increasing t nodes."""
    t_nodes = [float(t) for t in t_nodes]
    if any(b <= a for a, b in zip(t_nodes, t_nodes[1:])):
        raise ValueError("t_nodes must be strictly increasing")
    grams = gram_nodes(p, lam, t_nodes)
    nodes = tuple((t, grams[t], _cond(grams[t])) for t in t_nodes)
    return GramTrajectory(float(lam), nodes)


def nonsub_diagnostic(p: JacobiParams, lam: float, t_grid,
                      cap: float = DEFAULT_COND_CAP) -> dict:
    """Condition-number trajectory of G_t with a three-way verdict.

    All unit-initial-data solution seminorm ratios are controlled by
    sqrt(cond G_t), so a trajectory capped over the final decade of the grid
    is evidence that no solution is asymptotically negligible against
    another; sustained monotone growth past the cap is evidence of a
    growing/decaying dichotomy.
    """
    traj = solution_gram(p, lam, t_grid)
    ts = [n[0] for n in traj.nodes]
    conds = [n[2] for n in traj.nodes]
    t_max = ts[-1]
    decade = [i for i, t in enumerate(ts) if t >= t_max / 10.0]
    tail = [conds[i] for i in decade]
    if all(c <= cap for c in tail):
        verdict = "nonsubordinate_evidence"
    elif (tail[-1] > cap
          and all(b >= 0.95 * a for a, b in zip(tail, tail[1:]))):
        # growth must be sustained; the 5% slack absorbs eigenvalue jitter
        # once the trajectory saturates the double-precision clamp
        verdict = "subordinate_evidence"
    else:
        verdict = "inconclusive"
    if len(decade) >= 2 and all(math.isfinite(c) and c > 0 for c in tail):
        dt = ts[decade[-1]] - ts[decade[0]]
        growth = (math.log(tail[-1]) - math.log(tail[0])) / (2.0 * dt) if dt > 0 else 0.0
    else:
        growth = math.nan
    return {
        "lam": float(lam),
        "cond_trajectory": list(zip(ts, conds)),
        "verdict": verdict,
        "cap": float(cap),
        "growth_rate_per_step": growth,
    }


def spectral_consequence_report(p: JacobiParams, lam: float, diagnostic: dict,
                                n_max: int = 32) -> dict:
    """Numerical-evidence report gated on the verdict and the bounded flag.

    Only bounded families are treated as self-adjoint here; for those, a
    capped trajectory supports "no square-summable solution at lam, lam in
    the spectrum but not an eigenvalue", cross-checked against the l2
    dimension estimate at lam.
    """
    from .weyl import gev_l2_dimension

    if diagnostic["verdict"] != "nonsubordinate_evidence":
        return {"claim": None, "reason": f"verdict {diagnostic['verdict']}"}
    if not p.bounded:
        return {"claim": None,
                "reason": "family not flagged bounded; self-adjointness undecided"}
    dim = gev_l2_dimension(p, complex(lam, 0.0), n_max=n_max)
    return {
        "claim": ("numerical evidence: no l2 generalized eigenvector at lam; "
                  "lam in spectrum, not an eigenvalue"),
        "lam": float(lam),
        "cond_cap": diagnostic["cap"],
        "horizon": diagnostic["cond_trajectory"][-1][0],
        "l2_dim_estimate": dim["dim_estimate"],
        "consistent": dim["dim_estimate"] == 0,
    }
