"""Numerical experiments: degeneration sweeps, sharpness chains, eigenvalue
bound checks on random metrics, cutoff-energy quadrature, and the comparison
of glued limits against circle-invariant suprema.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import closed_form as cf
from .dtn import assemble_stiffness, build_dtn, steklov_spectrum
from .errors import InvalidParameterError, ResolutionError
from .gluing import (BOUNDARY_NECK, INTERIOR_NECK, Attachment, GluedFamily,
                     build_glued_mesh)
from .meshes import (FlatCylinder, MobiusCylinder, SurfaceMesh, UnitDisk,
                     boundary_edge_lengths, build_disk_mesh,
                     build_log_annulus_mesh, build_spec_mesh)
from .spectra import Spectrum, merge_spectra

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# chain layouts
# ---------------------------------------------------------------------------

def _boundary_anchors(spec) -> tuple[tuple[int, float], tuple[int, float]]:
    """(loop, theta) pair usable as the right/left attachment of a chain link.

    Antipodal in the chart angle, and kept away from the angle-0 seam so the
    refined arcs never wrap the parameter origin.
    """
    if isinstance(spec, UnitDisk):
        return (0, 0.5 * math.pi), (0, 1.5 * math.pi)
    if isinstance(spec, FlatCylinder):
        return (0, 0.5 * math.pi), (0, 1.5 * math.pi)
    if isinstance(spec, MobiusCylinder):
        return (0, 0.5 * math.pi), (0, 1.5 * math.pi)
    raise InvalidParameterError(f"no chain anchors for {type(spec).__name__}")


def chain_family(components, rho: float, neck_kind: str = BOUNDARY_NECK) -> GluedFamily:
    """Linear chain: neck i joins component i to component i+1 at antipodal points."""
    components = tuple(components)
    if len(components) < 2:
        raise InvalidParameterError("a chain needs at least two components")
    pairs = []
    # interior necks land at disk centers for a single link, off-center for chains
    if len(components) == 2:
        interior_right = interior_left = (0.0, 0.0)
    else:
        interior_right, interior_left = (0.35, 0.0), (-0.35, 0.0)
    for i in range(len(components) - 1):
        if neck_kind == BOUNDARY_NECK:
            right = _boundary_anchors(components[i])[0]
            left = _boundary_anchors(components[i + 1])[1]
            pairs.append((Attachment(i, loop=right[0], theta=right[1]),
                          Attachment(i + 1, loop=left[0], theta=left[1])))
        else:
            pairs.append((Attachment(i, point=interior_right),
                          Attachment(i + 1, point=interior_left)))
    return GluedFamily(components, rho, tuple(pairs), neck_kind)


def annulus_self_glued(T: float, rho: float) -> GluedFamily:
    """One flat cylinder glued to itself near two interior points (genus +1)."""
    spec = FlatCylinder(T)
    p1 = (0.5 * math.pi, 0.5 * T)
    p2 = (1.5 * math.pi, 0.5 * T)
    return GluedFamily((spec,), rho,
                       ((Attachment(0, point=p1), Attachment(0, point=p2)),),
                       INTERIOR_NECK)


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    rho: float
    spectrum: Spectrum | None
    boundary_length: float | None
    eigenvalue_errors: tuple[float, ...] | None  # |sigma_j(M_rho) - sigma_j(target)|, j <= k
    neck_fractions: tuple[float, ...] | None     # boundary L^2 mass on the neck, j = 0..k
    failure: str | None = None


@dataclass(frozen=True)
class SweepResult:
    description: str
    k: int
    rho_list: tuple[float, ...]
    target: Spectrum
    rows: tuple[SweepRow, ...]

    def final_relative_error(self, j: int) -> float:
        row = self.rows[-1]
        if row.spectrum is None:
            raise InvalidParameterError(f"last sweep row failed: {row.failure}")
        ref = self.target.eigenvalues[j]
        return abs(row.spectrum.eigenvalues[j] - ref) / abs(ref)


def _neck_fractions(mesh: SurfaceMesh, spectrum: Spectrum, j_max: int) -> tuple[float, ...]:
    """Share of each eigenfunction's boundary L^2 norm carried by the neck sides."""
    tag = mesh.tags.get("neck_boundary", frozenset())
    lengths = boundary_edge_lengths(mesh)
    uv = mesh.logical[mesh.boundary_edge_chart]
    pos = -np.ones(mesh.n_logical, dtype=np.int64)
    pos[spectrum.boundary_index] = np.arange(len(spectrum.boundary_index))
    ua = spectrum.eigenvectors[pos[uv[:, 0]]]
    ub = spectrum.eigenvectors[pos[uv[:, 1]]]
    per_edge = lengths[:, None] * 0.5 * (ua ** 2 + ub ** 2)
    on_neck = np.array([(int(a) in tag) and (int(b) in tag) for a, b in uv])
    total = per_edge.sum(axis=0)
    neck = per_edge[on_neck].sum(axis=0) if on_neck.any() else np.zeros_like(total)
    fractions = neck / total
    return tuple(float(f) for f in fractions[:j_max + 1])


def _component_target(components, resolution: float, count: int) -> Spectrum:
    parts = []
    for spec in components:
        mesh = build_spec_mesh(spec, resolution).mesh
        parts.append(steklov_spectrum(mesh, count, label=type(spec).__name__))
    return merge_spectra(parts)


def _run_sweep(components, k: int, rho_list, resolution: float, neck_kind: str,
               description: str, record_vectors: bool = True) -> SweepResult:
    rho_list = tuple(float(r) for r in rho_list)
    if any(b >= a for a, b in zip(rho_list, rho_list[1:])):
        raise InvalidParameterError("rho list must be strictly decreasing")
    count = max(k + 3, 6)
    target = _component_target(components, resolution, count)
    rows = []
    for rho in rho_list:
        try:
            if len(components) > 1:
                family = chain_family(components, rho, neck_kind)
            elif isinstance(components[0], FlatCylinder):
                family = annulus_self_glued(components[0].T, rho)
            else:
                raise InvalidParameterError(
                    "self-gluing is implemented for the flat cylinder only")
            mesh = build_glued_mesh(family, resolution)
            spec = steklov_spectrum(mesh, count, want_vectors=record_vectors)
            errors = tuple(float(abs(spec.eigenvalues[j] - target.eigenvalues[j]))
                           for j in range(k + 1))
            fractions = (_neck_fractions(mesh, spec, k)
                         if record_vectors and neck_kind == BOUNDARY_NECK else None)
            rows.append(SweepRow(rho, spec.drop_vectors(), spec.boundary_length,
                                 errors, fractions))
        except Exception as exc:  # recorded, sweep continues
            rows.append(SweepRow(rho, None, None, None, None,
                                 failure=f"{type(exc).__name__}: {exc}"))
    return SweepResult(description, k, rho_list, target, tuple(rows))


def glue_sweep(components, k: int, rho_list, resolution: float,
               record_vectors: bool = True) -> SweepResult:
    """Boundary-neck degeneration toward the disjoint union of the components."""
    components = tuple(components)
    if len(components) < 2:
        if rho_list:
            raise InvalidParameterError("a single component admits no boundary neck")
        target = _component_target(components, resolution, max(k + 3, 6))
        return SweepResult("single component", k, (), target, ())
    names = "+".join(type(c).__name__ for c in components)
    return _run_sweep(components, k, rho_list, resolution, BOUNDARY_NECK,
                      f"boundary glue {names}", record_vectors)


def interior_glue_sweep(components, k: int, rho_list, resolution: float,
                        record_vectors: bool = False) -> SweepResult:
    """Interior-neck degeneration; the boundary is untouched at every rho."""
    components = tuple(components)
    names = "+".join(type(c).__name__ for c in components)
    kind = "self interior glue" if len(components) == 1 else "interior glue"
    return _run_sweep(components, k, rho_list, resolution, INTERIOR_NECK,
                      f"{kind} {names}", record_vectors)


def touching_disks_sharpness(k: int, rho: float, resolution: float) -> float:
    """sigma_bar_k of a chain of k unit disks with necks of size rho."""
    if k < 1:
        raise InvalidParameterError("k must be >= 1")
    if k == 1:
        mesh = build_disk_mesh(resolution)
        return steklov_spectrum(mesh, 2).sigma_bar(1)
    family = chain_family([UnitDisk()] * k, rho)
    mesh = build_glued_mesh(family, resolution)
    return steklov_spectrum(mesh, k + 2).sigma_bar(k)


# ---------------------------------------------------------------------------
# glued limits vs circle-invariant suprema
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ComparisonRecord:
    surface_kind: str          # "annulus" | "mobius"
    k: int
    glued_limit: float         # sigma_bar_k of the critical surface + (k-1) disks
    invariant_supremum: float
    margin: float
    verdict: str
    chain_check: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"surface_kind": self.surface_kind, "k": self.k,
                "glued_limit": self.glued_limit,
                "invariant_supremum": self.invariant_supremum,
                "margin": self.margin, "verdict": self.verdict,
                "chain_check": self.chain_check}


def glued_limit_spectrum(surface_kind: str, k: int, count: int = 40) -> Spectrum:
    """Closed-form spectrum of (critical surface) + (k-1) unit disks, disjoint."""
    if surface_kind == "annulus":
        head = cf.spectrum_for(cf.critical_catenoid_metric(), count)
    elif surface_kind == "mobius":
        head = cf.spectrum_for(cf.critical_mobius_metric(), count)
    else:
        raise InvalidParameterError("surface kind must be 'annulus' or 'mobius'")
    parts = [head] + [cf.disk_spectrum(count) for _ in range(k - 1)]
    return merge_spectra(parts)


def noninvariant_comparison(surface_kind: str, k: int) -> ComparisonRecord:
    """Margin of the glued-configuration limit over the invariant supremum (k >= 2)."""
    if k < 2:
        raise InvalidParameterError("the comparison is about k >= 2")
    limit = glued_limit_spectrum(surface_kind, k).sigma_bar(k)
    surface = "cylinder" if surface_kind == "annulus" else "mobius"
    sup = cf.invariant_supremum(surface, k)
    margin = limit - sup.value
    chain: dict = {}
    if surface_kind == "mobius" and k % 2 == 1:
        # odd k = 2l-1: the supremum is squeezed under 2*pi*l*1.77 through t_k
        ell = (k + 1) // 2
        t1 = cf.constant_tk(1).value
        bound = 4.0 * math.pi * ell * 1.2 / t1
        chain = {
            "l": ell,
            "sup": sup.value,
            "tk_bound": bound,
            "coarse_bound": 2.0 * math.pi * ell * 1.77,
            "limit_side": 2.0 * math.pi * (2 * ell + math.sqrt(3.0) - 2.0),
            "holds": bool(sup.value < bound < 2.0 * math.pi * ell * 1.77
                          < 2.0 * math.pi * (2 * ell + math.sqrt(3.0) - 2.0)),
        }
    return ComparisonRecord(
        surface_kind=surface_kind, k=k, glued_limit=limit,
        invariant_supremum=sup.value, margin=margin,
        verdict="pass" if margin > 0 else "fail", chain_check=chain)


# ---------------------------------------------------------------------------
# eigenvalue-bound property checks on random metrics
# ---------------------------------------------------------------------------

def _random_log_density(rng: np.random.Generator, angles: np.ndarray,
                        modes: int = 6, amplitude: float = 0.3) -> np.ndarray:
    a = rng.uniform(-amplitude, amplitude, size=modes)
    b = rng.uniform(-amplitude, amplitude, size=modes)
    log_lam = np.zeros_like(angles)
    for m in range(1, modes + 1):
        log_lam += a[m - 1] * np.cos(m * angles) + b[m - 1] * np.sin(m * angles)
    return np.exp(log_lam)


def bound_check(kind: str, trials: int, seed: int, k_max: int = 5,
                resolution: float | None = None, slack: float = 0.02) -> dict:
    """Seeded random-metric sweep against the normalized-eigenvalue upper bound.

    kind 'hps-disk': sigma_bar_k <= 2*pi*k on the disk; 'karpukhin-annulus':
    sigma_bar_k <= 2*pi*(k+1) on the cylinder.  Reports worst ratios; the
    verdict allows the stated discretization slack.
    """
    if trials < 1:
        raise InvalidParameterError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    rows = []
    if kind == "hps-disk":
        res = resolution or 0.03
        mesh = build_disk_mesh(res)
        op = build_dtn(mesh)
        b_idx = op.boundary_index
        chart_of = _chart_representatives(mesh, b_idx)
        angles = np.arctan2(mesh.vertices[chart_of, 1], mesh.vertices[chart_of, 0])
        bound = lambda k: TWO_PI * k
        for trial in range(trials):
            lam = np.ones(mesh.n_logical)
            lam[b_idx] = _random_log_density(rng, angles)
            try:
                spec = op.spectrum(k_max + 1, conformal=lam)
                ratios = [spec.sigma_bar(k) / bound(k) for k in range(1, k_max + 1)]
                rows.append({"trial": trial, "ratios": ratios, "worst": max(ratios)})
            except Exception as exc:
                rows.append({"trial": trial, "failure": f"{type(exc).__name__}: {exc}"})
    elif kind == "karpukhin-annulus":
        res = resolution or 0.045
        bound = lambda k: TWO_PI * (k + 1)
        for trial in range(trials):
            T = float(rng.uniform(0.6, 3.0))
            mesh = build_spec_mesh(FlatCylinder(T), res).mesh
            op = build_dtn(mesh)
            b_idx = op.boundary_index
            chart_of = _chart_representatives(mesh, b_idx)
            angles = mesh.vertices[chart_of, 0]  # chart x is theta
            lam = np.ones(mesh.n_logical)
            lam[b_idx] = _random_log_density(rng, angles)
            try:
                spec = op.spectrum(k_max + 1, conformal=lam)
                ratios = [spec.sigma_bar(k) / bound(k) for k in range(1, k_max + 1)]
                rows.append({"trial": trial, "T": T, "ratios": ratios, "worst": max(ratios)})
            except Exception as exc:
                rows.append({"trial": trial, "T": T, "failure": f"{type(exc).__name__}: {exc}"})
    else:
        raise InvalidParameterError("kind must be 'hps-disk' or 'karpukhin-annulus'")
    worst = max((r["worst"] for r in rows if "worst" in r), default=math.nan)
    ok = all("worst" in r and r["worst"] <= 1.0 + slack for r in rows)
    return {"kind": kind, "trials": trials, "seed": seed, "k_max": k_max,
            "slack": slack, "rows": rows, "worst_ratio": worst,
            "verdict": "pass" if ok else "fail"}


def _chart_representatives(mesh: SurfaceMesh, logical_ids: np.ndarray) -> np.ndarray:
    rep = np.zeros(mesh.n_logical, dtype=np.int64)
    rep[mesh.logical[::-1]] = np.arange(mesh.n_chart - 1, -1, -1)
    return rep[logical_ids]


# ---------------------------------------------------------------------------
# logarithmic cutoff energy
# ---------------------------------------------------------------------------

def cutoff_energy_law(rho_list, r0: float = 0.5, resolution: float = 0.05) -> dict:
    """P1 quadrature of the transition-annulus energy of the log cutoff.

    The cutoff (log r - log rho)/log(1/sqrt(rho)) rises from 0 at r=rho to 1
    at r=sqrt(rho); its exact Dirichlet energy is 2*pi/log(1/sqrt(rho)).
    """
    rows = []
    for rho in rho_list:
        if not 0 < rho < 1:
            raise InvalidParameterError("rho must lie in (0, 1)")
        r_in, r_out = rho, math.sqrt(rho)
        if r_out > r0:
            raise InvalidParameterError("need sqrt(rho) <= r0")
        n_ang = max(16, int(round(TWO_PI / resolution)))
        n_rad = max(8, int(round(math.log(r_out / r_in) / resolution)))
        mesh = build_log_annulus_mesh(r_in, r_out, n_rad, n_ang)
        K = assemble_stiffness(mesh)
        r = np.linalg.norm(mesh.vertices, axis=1)
        phi = (np.log(r) - math.log(rho)) / math.log(1.0 / r_out)
        phi_log = np.zeros(mesh.n_logical)
        phi_log[mesh.logical] = phi
        energy = float(phi_log @ (K @ phi_log))
        exact = TWO_PI / math.log(1.0 / r_out)
        ratio = energy / exact
        if abs(ratio - 1.0) > 0.02:
            raise ResolutionError(
                f"cutoff energy off by {abs(ratio - 1):.1%} at rho={rho}; refine the mesh")
        rows.append({"rho": rho, "energy": energy, "exact": exact, "ratio": ratio})
    energies = [row["energy"] for row in rows]
    monotone = all(b < a for a, b in zip(energies, energies[1:]))
    return {"rows": rows, "monotone_decreasing": monotone}


def neck_mass_diagnostic(sweep: SweepResult, k: int) -> dict:
    """Per-rho neck boundary-mass fractions of the first k+1 eigenfunctions."""
    for row in sweep.rows:
        if row.failure is None and row.neck_fractions is None:
            raise InvalidParameterError("sweep was run without eigenvector recording")
    table = {j: [row.neck_fractions[j] for row in sweep.rows if row.failure is None]
             for j in range(k + 1)}
    decreasing = {j: bool(vals[-1] <= vals[0] and vals[-1] <= vals[-2])
                  for j, vals in table.items() if len(vals) >= 2}
    return {"fractions": table, "decreasing": decreasing}


# ---------------------------------------------------------------------------
# report files
# ---------------------------------------------------------------------------

def _params_hash(params: dict) -> str:
    canon = json.dumps(params, sort_keys=True, default=str).encode()
    return hashlib.sha1(canon).hexdigest()[:10]


def write_report(outdir, experiment: str, params: dict, rows: list, verdict: str) -> dict:
    """JSON report plus a CSV of the raw rows; names derive from a parameter hash."""
    import csv
    import os
    os.makedirs(outdir, exist_ok=True)
    stem = f"{experiment}-{_params_hash(params)}"
    payload = {"experiment": experiment, "params": params, "rows": rows,
               "verdict": verdict}
    json_path = os.path.join(outdir, stem + ".json")
    with open(json_path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, default=repr)
        fh.write("\n")
    csv_path = os.path.join(outdir, stem + ".csv")
    keys: list[str] = []
    for row in rows:
        for key in row:
            if key not in keys:
                keys.append(key)
    with open(csv_path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=keys, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({key: repr(v) if isinstance(v, float) else v
                             for key, v in row.items()})
    return {"json": json_path, "csv": csv_path}
