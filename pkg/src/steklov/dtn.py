"""Finite-element discretization of the Steklov problem.

Piecewise-linear cotangent stiffness over the chart triangles (conformally
invariant in two dimensions, so the factor lambda never enters), lumped
boundary mass carrying the lambda-weighted edge lengths, Schur-complement
reduction to a dense discrete Dirichlet-to-Neumann operator on the boundary
degrees of freedom, then a symmetric generalized eigensolve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .errors import (AssemblyError, FactorizationError, InvalidParameterError,
                     SolverError)
from .meshes import SurfaceMesh, boundary_edge_lengths
from .spectra import CLUSTER_RTOL_FEM, Spectrum, make_spectrum

RESIDUAL_RTOL = 1e-10


def assemble_stiffness(mesh: SurfaceMesh) -> sp.csr_matrix:
    """Cotangent-weight stiffness on logical vertices; constants are in the kernel."""
    pts = mesh.vertices
    tri = mesh.triangles
    p0, p1, p2 = pts[tri[:, 0]], pts[tri[:, 1]], pts[tri[:, 2]]
    e0 = p2 - p1
    e1 = p0 - p2
    e2 = p1 - p0
    area2 = e2[:, 0] * (-e1[:, 1]) - e2[:, 1] * (-e1[:, 0])
    if np.any(area2 <= 0):
        raise AssemblyError("degenerate or misoriented chart triangle")
    cots = np.stack([
        -np.einsum("ij,ij->i", e1, e2) / area2,
        -np.einsum("ij,ij->i", e2, e0) / area2,
        -np.einsum("ij,ij->i", e0, e1) / area2,
    ], axis=1)  # cot of the angle at each corner
    lab = mesh.logical[tri]
    rows, cols, vals = [], [], []
    opposite = ((1, 2), (2, 0), (0, 1))
    for corner, (i, j) in enumerate(opposite):
        w = 0.5 * cots[:, corner]
        rows += [lab[:, i], lab[:, j], lab[:, i], lab[:, j]]
        cols += [lab[:, j], lab[:, i], lab[:, i], lab[:, j]]
        vals += [-w, -w, w, w]
    K = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(mesh.n_logical, mesh.n_logical),
    )
    return K.tocsr()


def boundary_mass_vector(mesh: SurfaceMesh, conformal=None) -> np.ndarray:
    """Lumped boundary mass per logical vertex: half of each incident edge length."""
    lam = mesh.conformal_factor if conformal is None else np.asarray(conformal, float)
    uv = mesh.boundary_edge_chart
    mass = np.zeros(mesh.n_logical)
    if len(uv) == 0:
        return mass
    chord = np.linalg.norm(mesh.vertices[uv[:, 0]] - mesh.vertices[uv[:, 1]], axis=1)
    lu = mesh.logical[uv[:, 0]]
    lv = mesh.logical[uv[:, 1]]
    length = chord * 0.5 * (lam[lu] + lam[lv])
    np.add.at(mass, lu, 0.5 * length)
    np.add.at(mass, lv, 0.5 * length)
    return mass


def assemble_boundary_mass(mesh: SurfaceMesh, conformal=None) -> sp.csr_matrix:
    return sp.diags(boundary_mass_vector(mesh, conformal)).tocsr()


def _grounding_pins(K: sp.csr_matrix, boundary_index: np.ndarray) -> np.ndarray:
    """One vertex per connected component that never touches the boundary.

    Such components make the pure-Neumann interior block singular; grounding
    their constant mode is exact because they do not couple to the boundary.
    """
    from scipy.sparse.csgraph import connected_components
    n = K.shape[0]
    on_boundary = np.zeros(n, dtype=bool)
    on_boundary[boundary_index] = True
    _, labels = connected_components(K, directed=False)
    pins = []
    for comp in np.unique(labels):
        members = np.where(labels == comp)[0]
        if not on_boundary[members].any():
            pins.append(members[0])
    return np.asarray(pins, dtype=np.int64)


def schur_dtn(stiffness: sp.spmatrix, boundary_index: np.ndarray) -> np.ndarray:
    """Dense DtN_h = A_bb - A_bi A_ii^{-1} A_ib on the boundary degrees of freedom."""
    n = stiffness.shape[0]
    b = np.asarray(boundary_index, dtype=np.int64)
    interior = np.setdiff1d(np.arange(n), b)
    K = stiffness.tocsr()
    A_bb = K[b][:, b].toarray()
    if interior.size == 0:
        dtn = A_bb
    else:
        A_bi = K[b][:, interior]
        A_ib = K[interior][:, b]
        A_ii = K[interior][:, interior].tolil()
        pins = np.searchsorted(interior, _grounding_pins(K, b))
        for p in pins:
            A_ii[p, :] = 0.0
            A_ii[:, p] = 0.0
            A_ii[p, p] = 1.0
        A_ii = A_ii.tocsc()
        try:
            lu = splu(A_ii)
        except RuntimeError as exc:
            raise FactorizationError(f"interior block factorization failed: {exc}") from exc
        X = lu.solve(A_ib.toarray())
        dtn = A_bb - A_bi @ X
    defect = np.max(np.abs(dtn - dtn.T))
    scale = np.max(np.abs(dtn)) + 1e-300
    if defect > 1e-10 * scale:
        raise FactorizationError(f"DtN symmetry defect {defect / scale:.2e}")
    dtn = 0.5 * (dtn + dtn.T)
    kernel = np.max(np.abs(dtn @ np.ones(len(b))))
    if kernel > 1e-10 * scale * max(len(b), 1):
        raise FactorizationError(f"DtN does not annihilate constants: {kernel / scale:.2e}")
    return dtn


@dataclass(frozen=True)
class DtnOperator:
    """Discrete DtN of one mesh; reusable across boundary-density variations."""

    mesh: SurfaceMesh
    matrix: np.ndarray
    boundary_index: np.ndarray

    def spectrum(self, count: int, conformal=None, want_vectors: bool = False,
                 label: str = "") -> Spectrum:
        b = self.boundary_index
        if not (1 <= count <= len(b)):
            raise InvalidParameterError(
                f"count must lie in [1, {len(b)}] (boundary degrees of freedom)")
        mass = boundary_mass_vector(self.mesh, conformal)[b]
        if np.any(mass <= 0):
            raise AssemblyError("boundary vertex with nonpositive lumped mass")
        s = 1.0 / np.sqrt(mass)
        H = self.matrix * np.outer(s, s)
        H = 0.5 * (H + H.T)
        w, y = scipy.linalg.eigh(H, subset_by_index=[0, count - 1])
        vectors = s[:, None] * y
        resid = self.matrix @ vectors - mass[:, None] * vectors * w[None, :]
        denom = np.linalg.norm(mass[:, None] * vectors, axis=0)
        rel = np.linalg.norm(resid, axis=0) / denom
        if np.any(rel > RESIDUAL_RTOL):
            raise SolverError(f"eigenpair residual {rel.max():.2e} above contract")
        lam = self.mesh.conformal_factor if conformal is None else np.asarray(conformal, float)
        uv = self.mesh.boundary_edge_chart
        chord = np.linalg.norm(self.mesh.vertices[uv[:, 0]] - self.mesh.vertices[uv[:, 1]], axis=1)
        length = float(np.sum(chord * 0.5 * (lam[self.mesh.logical[uv[:, 0]]]
                                             + lam[self.mesh.logical[uv[:, 1]]])))
        return make_spectrum(
            w, length, cluster_rtol=CLUSTER_RTOL_FEM,
            eigenvectors=vectors if want_vectors else None,
            boundary_index=b if want_vectors else None,
            label=label,
        )


def build_dtn(mesh: SurfaceMesh) -> DtnOperator:
    if not mesh.boundary_loops:
        raise InvalidParameterError("mesh has no boundary")
    b = np.unique(np.concatenate([np.asarray(loop) for loop in mesh.boundary_loops]))
    K = assemble_stiffness(mesh)
    return DtnOperator(mesh=mesh, matrix=schur_dtn(K, b), boundary_index=b)


def steklov_spectrum(mesh: SurfaceMesh, count: int, want_vectors: bool = False,
                     label: str = "") -> Spectrum:
    """Smallest `count` discrete Steklov eigenvalues with optional boundary traces."""
    return build_dtn(mesh).spectrum(count, want_vectors=want_vectors, label=label)


def export_eigenvectors(spectrum: Spectrum, mesh: SurfaceMesh, path) -> None:
    """JSON array of boundary traces, one list per eigenvector, in loop order."""
    import json
    if spectrum.eigenvectors is None or spectrum.boundary_index is None:
        raise InvalidParameterError("spectrum carries no eigenvectors")
    pos = {int(v): i for i, v in enumerate(spectrum.boundary_index)}
    order = [pos[v] for loop in mesh.boundary_loops for v in loop]
    traces = spectrum.eigenvectors[order].T
    with open(path, "w") as fh:
        json.dump([[float(x) for x in column] for column in traces], fh)
        fh.write("\n")


def rayleigh_quotient(mesh: SurfaceMesh, trace: np.ndarray) -> float:
    """(f' DtN f) / (f' M f) for a boundary trace f (indexed like boundary_index)."""
    op = build_dtn(mesh)
    f = np.asarray(trace, dtype=float)
    if f.shape != op.boundary_index.shape:
        raise InvalidParameterError("trace must have one value per boundary vertex")
    mass = boundary_mass_vector(mesh)[op.boundary_index]
    denom = float(f @ (mass * f))
    if denom <= 0:
        raise InvalidParameterError("trace has zero boundary norm")
    return float(f @ (op.matrix @ f)) / denom


__all__ = [
    "assemble_stiffness", "assemble_boundary_mass", "boundary_mass_vector",
    "schur_dtn", "DtnOperator", "build_dtn", "steklov_spectrum",
    "rayleigh_quotient", "boundary_edge_lengths", "export_eigenvectors",
]
