"""Discrete matrix measures: quadrature from finite sections, trace views,
Cauchy transforms and decomposition against a discrete reference.

Only atomic measures are stored.  Atoms carry positive-semidefinite d x d
weights, are kept sorted by location, and locations within
1e-12 * max(1, |lambda|) of each other merge by weight addition (eigensolver
jitter would otherwise split multiplicities).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .blockcore import JacobiParams
from .weyl import finite_section

__all__ = [
    "DiscreteMatrixMeasure",
    "TraceDensityView",
    "quadrature_measure",
    "trace_views",
    "cauchy_transform",
    "density_integral",
    "decompose_vs_reference",
    "diagonal_compose",
]

MERGE_TOL = 1e-12
PSD_TOL = 1e-10


def _merge(pairs, d: int):
    """Sort by location and merge near-coincident atoms."""
    pairs = sorted(pairs, key=lambda a: a[0])
    out: list[tuple[float, np.ndarray]] = []
    for lam, w in pairs:
        w = np.asarray(w, dtype=complex)
        if w.shape != (d, d):
            raise ValueError(f"weight shape {w.shape}, expected ({d}, {d})")
        if out and abs(lam - out[-1][0]) <= MERGE_TOL * max(1.0, abs(lam)):
            out[-1] = (out[-1][0], out[-1][1] + w)
        else:
            out.append((float(lam), w.copy()))
    return out


@dataclass(frozen=True)
class DiscreteMatrixMeasure:
    """Atoms (lambda_k, W_k) with W_k PSD, sorted, duplicates merged."""

    atoms: tuple
    d: int

    @staticmethod
    def from_pairs(pairs, d: int) -> "DiscreteMatrixMeasure":
        merged = _merge(pairs, d)
        for lam, w in merged:
            ev = np.linalg.eigvalsh((w + w.conj().T) / 2)
            herm_defect = np.linalg.norm(w - w.conj().T, 2)
            scale = max(1.0, float(ev[-1]) if len(ev) else 1.0)
            if herm_defect > PSD_TOL * scale or (len(ev) and ev[0] < -PSD_TOL * scale):
                raise ValueError(f"atom at {lam} has a non-PSD weight")
        return DiscreteMatrixMeasure(tuple(merged), d)

    def total_mass(self) -> np.ndarray:
        out = np.zeros((self.d, self.d), dtype=complex)
        for _, w in self.atoms:
            out += w
        return out

    def restrict(self, keep) -> "DiscreteMatrixMeasure":
        """Sub-measure on a subset of atom indices."""
        pairs = [self.atoms[i] for i in sorted(set(keep))]
        return DiscreteMatrixMeasure(tuple(pairs), self.d)


@dataclass(frozen=True)
class TraceDensityView:
    """Per-atom trace t_k and normalized density D_k = W_k / t_k."""

    atoms: tuple  # (lambda_k, t_k, D_k)
    dropped: int  # zero-trace atoms removed (they are the zero measure)


def quadrature_measure(p: JacobiParams, N: int) -> DiscreteMatrixMeasure:
    """Atomic spectral approximation from the N-block section.

    Atoms sit at section eigenvalues; the weight is the outer product of the
    first d-block of the unit eigenvector.  Total mass is the identity.
    """
    d = p.d
    h = finite_section(p, N).H
    evals, evecs = np.linalg.eigh(h)
    pairs = []
    for k in range(len(evals)):
        top = evecs[:d, k]
        pairs.append((float(evals[k]), np.outer(top, top.conj())))
    return DiscreteMatrixMeasure.from_pairs(pairs, d)


def trace_views(m: DiscreteMatrixMeasure) -> TraceDensityView:
    out = []
    dropped = 0
    for lam, w in m.atoms:
        t = float(np.trace(w).real)
        if t <= 0.0:
            dropped += 1
            continue
        out.append((lam, t, w / t))
    return TraceDensityView(tuple(out), dropped)


def cauchy_transform(m: DiscreteMatrixMeasure, z: complex) -> np.ndarray:
    """Sum of W_k / (lambda_k - z); z must stay clear of every atom."""
    out = np.zeros((m.d, m.d), dtype=complex)
    for lam, w in m.atoms:
        gap = abs(lam - z)
        if gap <= 1e-12 * max(1.0, abs(lam)):
            raise ValueError(f"z = {z} collides with the atom at {lam}")
        out += w / (lam - z)
    return out


def density_integral(nu, H) -> DiscreteMatrixMeasure:
    """The matrix measure H d(nu) for a discrete scalar reference.

    nu: list of (location, mass >= 0); H: matching list of PSD matrices.
    """
    if len(nu) != len(H):
        raise ValueError("reference and density lists differ in length")
    d = None
    pairs = []
    for (lam, mass), hk in zip(nu, H):
        hk = np.asarray(hk, dtype=complex)
        if d is None:
            d = hk.shape[0]
        ev = np.linalg.eigvalsh((hk + hk.conj().T) / 2)
        if (np.linalg.norm(hk - hk.conj().T, 2) > PSD_TOL * max(1.0, abs(ev[-1]))
                or ev[0] < -PSD_TOL * max(1.0, abs(ev[-1]))):
            raise ValueError(f"density at {lam} is not PSD")
        if mass < 0:
            raise ValueError(f"negative reference mass at {lam}")
        pairs.append((float(lam), hk * mass))
    if d is None:
        raise ValueError("empty reference")
    return DiscreteMatrixMeasure.from_pairs(pairs, d)


def _match(lam: float, locations) -> bool:
    return any(abs(lam - x) <= MERGE_TOL * max(1.0, abs(lam)) for x in locations)


def decompose_vs_reference(m: DiscreteMatrixMeasure, nu) -> dict:
    """Split m into the part carried by the reference atoms and the rest.

    nu: list of (location, mass) or plain locations.  The two parts add back
    to m atom-by-atom and their traces partition the trace measure.
    """
    locations = [x[0] if isinstance(x, (tuple, list)) else float(x) for x in nu]
    ac, sing = [], []
    for lam, w in m.atoms:
        (ac if _match(lam, locations) else sing).append((lam, w))
    return {
        "ac_part": DiscreteMatrixMeasure(tuple(ac), m.d),
        "sing_part": DiscreteMatrixMeasure(tuple(sing), m.d),
    }


def diagonal_compose(scalar_measures) -> DiscreteMatrixMeasure:
    """Assemble d scalar discrete measures into a diagonal matrix measure.

    Component i becomes the (i, i) marginal; atoms sit at the union of the
    scalar atom locations.
    """
    d = len(scalar_measures)
    pairs = []
    for i, sm in enumerate(scalar_measures):
        for lam, mass in sm:
            if mass < 0:
                raise ValueError(f"negative scalar mass at {lam}")
            w = np.zeros((d, d), dtype=complex)
            w[i, i] = mass
            pairs.append((float(lam), w))
    return DiscreteMatrixMeasure.from_pairs(pairs, d)
