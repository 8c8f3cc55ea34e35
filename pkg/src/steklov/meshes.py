"""Triangulated surfaces with chart coordinates, seam identifications, and a
per-vertex conformal factor.

A surface is a union of flat chart pieces; logical vertices are equivalence
classes of chart vertices under the identification list.  The metric is
lambda^2 * (flat chart metric), so in two dimensions the Dirichlet energy is
chart-only and the conformal factor enters solely through boundary lengths.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy.spatial import Delaunay

from .errors import AssemblyError, InvalidParameterError

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# metric descriptions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class UnitDisk:
    """Euclidean unit disk, optionally with a conformal factor field lambda(x, y)."""
    conformal_factor_field: Callable[[float, float], float] | None = None


@dataclass(frozen=True)
class FlatCylinder:
    """Flat cylinder [0, T] x S^1, circumference 2*pi, constant boundary density."""
    T: float
    boundary_density: float = 1.0


@dataclass(frozen=True)
class MobiusCylinder:
    """Moebius band: [0, T] x S^1 with the t=0 circle identified antipodally."""
    T: float
    boundary_density: float = 1.0


# ---------------------------------------------------------------------------
# the mesh container
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SurfaceMesh:
    vertices: np.ndarray              # (nv, 2) chart coordinates
    triangles: np.ndarray             # (nt, 3) chart indices, counterclockwise
    identifications: np.ndarray       # (ni, 2) chart index pairs merged logically
    logical: np.ndarray               # (nv,) chart index -> logical vertex id
    n_logical: int
    conformal_factor: np.ndarray      # (n_logical,) positive
    boundary_loops: tuple[tuple[int, ...], ...]  # ordered logical ids, closed
    boundary_edges: np.ndarray        # (nb, 2) logical endpoints
    boundary_edge_chart: np.ndarray   # (nb, 2) chart endpoints of the unique chart edge
    tags: dict[str, frozenset[int]] = field(default_factory=dict)

    @property
    def n_chart(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_triangles(self) -> int:
        return self.triangles.shape[0]


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


def _union_find_labels(n: int, pairs: np.ndarray) -> tuple[np.ndarray, int]:
    parent = np.arange(n)

    def find(a: int) -> int:
        root = a
        while parent[root] != root:
            root = parent[root]
        while parent[a] != root:
            parent[a], a = root, parent[a]
        return root

    for a, b in pairs:
        ra, rb = find(int(a)), find(int(b))
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    roots = np.fromiter((find(i) for i in range(n)), dtype=np.int64, count=n)
    uniq, labels = np.unique(roots, return_inverse=True)
    return labels, len(uniq)


def _triangle_doubled_areas(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    p0 = vertices[triangles[:, 0]]
    e1 = vertices[triangles[:, 1]] - p0
    e2 = vertices[triangles[:, 2]] - p0
    return e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]


def _degenerate_triangles(vertices: np.ndarray, triangles: np.ndarray,
                          areas2: np.ndarray) -> np.ndarray:
    """Degeneracy relative to each triangle's own edge scale (necks can be tiny)."""
    p0 = vertices[triangles[:, 0]]
    e1 = vertices[triangles[:, 1]] - p0
    e2 = vertices[triangles[:, 2]] - p0
    scale2 = np.maximum(np.einsum("ij,ij->i", e1, e1), np.einsum("ij,ij->i", e2, e2))
    return np.abs(areas2) <= 1e-12 * scale2


def _edge_census(tri_logical: np.ndarray, triangles: np.ndarray):
    """Unique logical edges with adjacency counts and one chart realization each."""
    logical_e = np.concatenate([tri_logical[:, [0, 1]], tri_logical[:, [1, 2]],
                                tri_logical[:, [2, 0]]])
    chart_e = np.concatenate([triangles[:, [0, 1]], triangles[:, [1, 2]],
                              triangles[:, [2, 0]]])
    key = np.sort(logical_e, axis=1)
    uniq, first, counts = np.unique(key, axis=0, return_index=True, return_counts=True)
    return uniq, counts, chart_e[first]


def _walk_loops(boundary_edges: np.ndarray) -> tuple[tuple[int, ...], ...]:
    incident: dict[int, list[int]] = {}
    for eid, (a, b) in enumerate(boundary_edges):
        incident.setdefault(int(a), []).append(eid)
        incident.setdefault(int(b), []).append(eid)
    for v, eids in incident.items():
        if len(eids) != 2:
            raise AssemblyError(f"boundary vertex {v} lies on {len(eids)} boundary edges")
    used = np.zeros(len(boundary_edges), dtype=bool)
    loops = []
    for start_eid in range(len(boundary_edges)):
        if used[start_eid]:
            continue
        a, b = (int(x) for x in boundary_edges[start_eid])
        used[start_eid] = True
        loop = [a, b]
        current = b
        while True:
            nxt = [e for e in incident[current] if not used[e]]
            if not nxt:
                break
            eid = nxt[0]
            used[eid] = True
            u, v = (int(x) for x in boundary_edges[eid])
            current = v if u == current else u
            loop.append(current)
        if loop[0] != loop[-1]:
            raise AssemblyError("boundary walk did not close into a loop")
        loops.append(tuple(loop[:-1]))
    return tuple(loops)


def assemble_mesh(vertices, triangles, identifications, conformal_chart,
                  tags_chart: dict[str, Sequence[int]] | None = None) -> SurfaceMesh:
    """Build a SurfaceMesh from chart data, deriving logical structure and loops."""
    vertices = np.asarray(vertices, dtype=float)
    triangles = np.asarray(triangles, dtype=np.int64).copy()
    identifications = (np.asarray(identifications, dtype=np.int64).reshape(-1, 2)
                       if len(identifications) else np.zeros((0, 2), dtype=np.int64))
    conformal_chart = np.asarray(conformal_chart, dtype=float)
    if vertices.ndim != 2 or vertices.shape[1] != 2:
        raise AssemblyError("vertices must be (nv, 2)")
    if conformal_chart.shape != (vertices.shape[0],):
        raise AssemblyError("conformal factor must be given per chart vertex")

    areas2 = _triangle_doubled_areas(vertices, triangles)
    flip = areas2 < 0
    triangles[flip] = triangles[flip][:, [0, 2, 1]]
    if np.any(_degenerate_triangles(vertices, triangles, areas2)):
        raise AssemblyError("degenerate chart triangle")

    labels, n_logical = _union_find_labels(vertices.shape[0], identifications)
    lam = np.zeros(n_logical)
    np.maximum.at(lam, labels, conformal_chart)
    lam_min = np.full(n_logical, np.inf)
    np.minimum.at(lam_min, labels, conformal_chart)
    if np.any(lam - lam_min > 1e-9 * (np.abs(lam) + 1.0)):
        raise AssemblyError("identified vertices carry unequal conformal factors")
    if np.any(lam <= 0):
        raise AssemblyError("conformal factor must be positive")

    tri_logical = labels[triangles]
    edges, counts, chart_rep = _edge_census(tri_logical, triangles)
    if np.any(counts > 2):
        raise AssemblyError("edge shared by more than two triangles")
    bmask = counts == 1
    boundary_edges = edges[bmask]
    boundary_edge_chart = chart_rep[bmask]
    loops = _walk_loops(boundary_edges) if len(boundary_edges) else ()

    tags = {}
    if tags_chart:
        for name, ids in tags_chart.items():
            tags[name] = frozenset(int(labels[i]) for i in ids)

    return SurfaceMesh(
        vertices=_freeze(vertices),
        triangles=_freeze(triangles),
        identifications=_freeze(identifications),
        logical=_freeze(labels),
        n_logical=n_logical,
        conformal_factor=_freeze(lam),
        boundary_loops=loops,
        boundary_edges=_freeze(boundary_edges),
        boundary_edge_chart=_freeze(boundary_edge_chart),
        tags=tags,
    )


def with_conformal_factor(mesh: SurfaceMesh, lam_logical) -> SurfaceMesh:
    lam = np.asarray(lam_logical, dtype=float)
    if lam.shape != (mesh.n_logical,):
        raise InvalidParameterError("conformal factor must have one value per logical vertex")
    if np.any(lam <= 0):
        raise InvalidParameterError("conformal factor must be positive")
    return replace(mesh, conformal_factor=_freeze(lam.copy()))


# ---------------------------------------------------------------------------
# measurements and validation
# ---------------------------------------------------------------------------

def boundary_edge_lengths(mesh: SurfaceMesh) -> np.ndarray:
    """Physical length of each boundary edge: chart length times mean endpoint lambda."""
    uv = mesh.boundary_edge_chart
    if len(uv) == 0:
        return np.zeros(0)
    chord = np.linalg.norm(mesh.vertices[uv[:, 0]] - mesh.vertices[uv[:, 1]], axis=1)
    lam = mesh.conformal_factor[mesh.logical[uv]]
    return chord * lam.mean(axis=1)


def boundary_length(mesh: SurfaceMesh) -> float:
    return float(boundary_edge_lengths(mesh).sum())


def euler_characteristic(mesh: SurfaceMesh) -> int:
    edges, _, _ = _edge_census(mesh.logical[mesh.triangles], mesh.triangles)
    return mesh.n_logical - len(edges) + mesh.n_triangles


def validate_mesh(mesh: SurfaceMesh) -> list[str]:
    """Re-derive the combinatorial structure and report every invariant violation."""
    report: list[str] = []
    areas2 = _triangle_doubled_areas(mesh.vertices, mesh.triangles)
    bad = _degenerate_triangles(mesh.vertices, mesh.triangles, areas2) | (areas2 < 0)
    if np.any(bad):
        report.append(f"{int(bad.sum())} chart triangles degenerate or misoriented")
    if np.any(mesh.conformal_factor <= 0):
        report.append("conformal factor not strictly positive")
    # equal factors across identified pairs are structural here (one logical
    # slot per class); assemble_mesh rejects unequal chart inputs up front

    edges, counts, _ = _edge_census(mesh.logical[mesh.triangles], mesh.triangles)
    if np.any(counts > 2):
        report.append("edge shared by more than two triangles")
    derived = {tuple(e) for e in edges[counts == 1]}
    stored = set()
    for loop in mesh.boundary_loops:
        for i in range(len(loop)):
            stored.add(tuple(sorted((loop[i], loop[(i + 1) % len(loop)]))))
    if derived != stored:
        missing = len(derived - stored)
        extra = len(stored - derived)
        report.append(f"boundary loops disagree with single-triangle edges "
                      f"({missing} open edges unlisted, {extra} stale loop edges)")
    return report


# ---------------------------------------------------------------------------
# graded 1-D grids
# ---------------------------------------------------------------------------

def _fill_graded(a: float, b: float, h_a: float, h_b: float, h_max: float,
                 growth: float = 0.4) -> np.ndarray:
    """Nodes on [a, b] with end spacings h_a, h_b growing toward h_max."""
    span = b - a
    h_a = min(h_a, h_max)
    h_b = min(h_b, h_max)
    if span <= 1.2 * min(h_a, h_b):
        return np.array([a, b])
    xs = np.linspace(a, b, max(64, int(8 * span / min(h_a, h_b, h_max)) + 1))
    h = np.minimum(h_max, np.minimum(h_a + growth * (xs - a), h_b + growth * (b - xs)))
    w = 1.0 / h
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (w[1:] + w[:-1]) * np.diff(xs))])
    n = max(1, int(round(cum[-1])))
    nodes = np.interp(np.linspace(0.0, cum[-1], n + 1), cum, xs)
    nodes[0], nodes[-1] = a, b
    return nodes


@dataclass(frozen=True)
class _ArcRequest:
    """A pinned uniform subdivision inside a 1-D parameter interval."""
    center: float
    half_width: float
    segments: int


def _parameter_grid(total: float, base_h: float, arcs: Sequence[_ArcRequest]):
    """Grid on [0, total] honoring pinned arcs; returns (nodes, per-arc index lists)."""
    if not arcs:
        n = max(8, int(round(total / base_h)))
        return np.linspace(0.0, total, n + 1), []
    order = sorted(range(len(arcs)), key=lambda i: arcs[i].center)
    prev_end = 0.0
    nodes = [np.array([0.0])]
    spans = []
    prev_h = base_h
    for i in order:
        arc = arcs[i]
        lo, hi = arc.center - arc.half_width, arc.center + arc.half_width
        fine = 2.0 * arc.half_width / arc.segments
        if lo <= prev_end + 1e-12:
            raise InvalidParameterError("refined intervals overlap or touch the chart seam")
        gap = _fill_graded(prev_end, lo, prev_h, fine, base_h)
        nodes.append(gap[1:])
        arc_nodes = np.linspace(lo, hi, arc.segments + 1)
        start = sum(len(x) for x in nodes)
        nodes.append(arc_nodes[1:])
        spans.append((i, start - 1, arc.segments + 1))
        prev_end, prev_h = hi, fine
    if prev_end >= total - 1e-12:
        raise InvalidParameterError("refined interval touches the chart seam")
    nodes.append(_fill_graded(prev_end, total, prev_h, base_h, base_h)[1:])
    grid = np.concatenate(nodes)
    index_lists = [None] * len(arcs)
    for i, start, length in spans:
        index_lists[i] = np.arange(start, start + length)
    return grid, index_lists


# ---------------------------------------------------------------------------
# attachment bookkeeping shared with the gluing module
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ArcSite:
    """Boundary attachment request: loop + angular position, physical half-length rho."""
    loop: int
    theta: float
    rho: float
    segments: int


@dataclass(frozen=True)
class HoleSite:
    """Interior attachment request: chart point and physical rim radius rho."""
    point: tuple[float, float]
    rho: float
    segments: int


@dataclass(frozen=True)
class Interface:
    """Ordered chart vertex chain where a neck glues on, with the local density."""
    site: object  # the ArcSite or HoleSite this chain realizes
    chart_ids: np.ndarray
    lam: float
    kind: str  # "arc" | "rim"


@dataclass(frozen=True)
class Component:
    mesh: SurfaceMesh
    interfaces: tuple[Interface, ...]


def _smoothstep(s: np.ndarray) -> np.ndarray:
    s = np.clip(s, 0.0, 1.0)
    return s * s * (3.0 - 2.0 * s)


def _blend_to_site(lam_chart: np.ndarray, points: np.ndarray, center, lam_p: float,
                   r_flat: float) -> np.ndarray:
    """Flatten the conformal factor to lam_p inside r_flat, untouched outside 2*r_flat."""
    d = np.linalg.norm(points - np.asarray(center), axis=1)
    w = _smoothstep((d - r_flat) / max(r_flat, 1e-300))
    return lam_p * (1.0 - w) + lam_chart * w


def _patch_rings(center, h0: float, resolution: float, r_start: float, keep):
    """Concentric graded point rings around a refinement center.

    Spacing grows ~0.42 * r from h0 up to the background resolution; `keep`
    filters candidate points (inside the domain, outside other exclusions).
    Returns the points and the exclusion radius the patch covers.
    """
    pts = []
    r = r_start
    ring = 0
    while r < 40.0:
        s = min(resolution, max(h0, 0.42 * r))
        n = max(8, int(round(TWO_PI * r / s)))
        offs = (ring % 2) * math.pi / n
        ang = offs + TWO_PI * np.arange(n) / n
        q = np.asarray(center) + r * np.stack([np.cos(ang), np.sin(ang)], axis=1)
        mask = keep(q, s)
        if np.any(mask):
            pts.append(q[mask])
        if s >= 0.98 * resolution and r > 2.0 * resolution:
            break
        r += 1.05 * s
        ring += 1
    return (np.concatenate(pts) if pts else np.zeros((0, 2))), r + 0.55 * resolution


# ---------------------------------------------------------------------------
# disk
# ---------------------------------------------------------------------------

# below this rim radius a structured collar keeps the tiniest triangles away
# from the Delaunay stage, whose lifted-paraboloid predicates lose them
COLLAR_RADIUS = 1e-3


def _ring_points(center, radius: float, m: int) -> np.ndarray:
    ang = TWO_PI * np.arange(m) / m
    return np.asarray(center) + radius * np.stack([np.cos(ang), np.sin(ang)], axis=1)


def _collar_rings(r_rim: float, r_outer: float) -> np.ndarray:
    n = max(2, int(math.ceil(math.log(r_outer / r_rim) / math.log(1.3))))
    return np.geomspace(r_rim, r_outer, n + 1)


def _disk_component(resolution: float, arc_sites: Sequence[ArcSite] = (),
                    hole_sites: Sequence[HoleSite] = (),
                    field: Callable[[float, float], float] | None = None) -> Component:
    base_lam = (lambda xy: np.ones(len(xy))) if field is None else \
        (lambda xy: np.array([field(x, y) for x, y in xy]))

    arc_meta = []
    for site in arc_sites:
        if site.loop != 0:
            raise InvalidParameterError("disk has a single boundary loop")
        p = np.array([math.cos(site.theta), math.sin(site.theta)])
        lam_p = float(base_lam(p[None])[0])
        w = site.rho / lam_p  # chart angle; arclength = angle on the unit circle
        arc_meta.append((site, p, lam_p, w))

    requests = [_ArcRequest(site.theta % TWO_PI, w, site.segments)
                for site, p, lam_p, w in arc_meta]
    angles, arc_index_lists = _parameter_grid(TWO_PI, resolution, requests)
    angles = angles[:-1]  # 2*pi duplicates the angle-0 node on a circle
    boundary_pts = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    n_boundary = len(boundary_pts)

    rim_meta = []
    for site in hole_sites:
        p = np.asarray(site.point, dtype=float)
        lam_p = float(base_lam(p[None])[0])
        r_rim = site.rho / lam_p
        if np.linalg.norm(p) + 2.0 * r_rim >= 1.0:
            from .errors import InvalidGluingError
            raise InvalidGluingError("interior neck disk reaches the boundary")
        r_del = max(r_rim, COLLAR_RADIUS)  # radius the Delaunay stage sees
        rim_meta.append((site, p, lam_p, r_rim, r_del))

    # patches: graded rings around each attachment, then the coarse bulk
    patch_pts = []
    exclusions = []  # (center, radius)
    rim_pts_list = []
    for (site, p, lam_p, w), idxs in zip(arc_meta, arc_index_lists):
        h0 = 2.0 * w / site.segments

        def keep(q, s, _p=p):
            r2 = np.linalg.norm(q, axis=1)
            ok = r2 <= 1.0 - 0.45 * s
            for c, rr in exclusions:
                ok &= np.linalg.norm(q - c, axis=1) > 0.8 * rr
            return ok

        pts, r_excl = _patch_rings(p, h0, resolution, 1.9 * h0, keep)
        patch_pts.append(pts)
        exclusions.append((p, r_excl))
    for site, p, lam_p, r_rim, r_del in rim_meta:
        m = site.segments
        rim_pts_list.append(_ring_points(p, r_del, m))
        h0 = TWO_PI * r_del / m

        def keep(q, s, _p=p, _r=r_del):
            r2 = np.linalg.norm(q, axis=1)
            ok = r2 <= 1.0 - 0.45 * s
            ok &= np.linalg.norm(q - _p, axis=1) > _r + 0.45 * s
            for c, rr in exclusions:
                ok &= np.linalg.norm(q - c, axis=1) > 0.8 * rr
            return ok

        pts, r_excl = _patch_rings(p, h0, resolution, r_del + 1.0 * h0, keep)
        patch_pts.append(pts)
        exclusions.append((p, r_excl + r_del))

    nr = max(3, int(round(1.0 / resolution)))
    bulk = [np.zeros((1, 2))]
    for i in range(1, nr):
        r = i / nr
        n = max(6, int(round(TWO_PI * r / resolution)))
        offs = (i % 2) * math.pi / n
        ang = offs + TWO_PI * np.arange(n) / n
        bulk.append(r * np.stack([np.cos(ang), np.sin(ang)], axis=1))
    bulk_pts = np.concatenate(bulk)
    for c, rr in exclusions:
        bulk_pts = bulk_pts[np.linalg.norm(bulk_pts - c, axis=1) > rr]

    sections = [boundary_pts] + rim_pts_list + [bulk_pts] + patch_pts
    points = np.concatenate([s for s in sections if len(s)])
    rim_id_lists = []
    offset = n_boundary
    for rp in rim_pts_list:
        rim_id_lists.append(np.arange(offset, offset + len(rp)))
        offset += len(rp)

    tri = Delaunay(points)
    if tri.coplanar.size:
        raise AssemblyError("triangulation dropped input points")
    triangles = tri.simplices
    for rim_ids in rim_id_lists:
        inside = np.isin(triangles, rim_ids).all(axis=1)
        triangles = triangles[~inside]

    # structured collars descend from the Delaunay-facing ring to tiny rims
    extra_points, extra_tris = [], []
    true_rim_ids: list[np.ndarray] = []
    n_cursor = len(points)
    for (site, p, lam_p, r_rim, r_del), del_ids in zip(rim_meta, rim_id_lists):
        if r_rim >= r_del:
            true_rim_ids.append(del_ids)
            continue
        m = site.segments
        radii = _collar_rings(r_rim, r_del)
        ring_ids = []
        for r in radii[:-1]:
            extra_points.append(_ring_points(p, r, m))
            ring_ids.append(np.arange(n_cursor, n_cursor + m))
            n_cursor += m
        ring_ids.append(del_ids)
        for inner, outer in zip(ring_ids, ring_ids[1:]):
            a = inner
            b = np.roll(inner, -1)
            c = np.roll(outer, -1)
            d = outer
            extra_tris.append(np.stack([a, b, c], axis=1))
            extra_tris.append(np.stack([a, c, d], axis=1))
        true_rim_ids.append(ring_ids[0])
    if extra_points:
        points = np.concatenate([points] + extra_points)
        triangles = np.concatenate([triangles] + extra_tris)

    lam_chart = base_lam(points)
    for (site, p, lam_p, w), _ in zip(arc_meta, arc_index_lists):
        lam_chart = _blend_to_site(lam_chart, points, p, lam_p, math.sqrt(site.rho) / lam_p)
    for site, p, lam_p, r_rim, r_del in rim_meta:
        lam_chart = _blend_to_site(lam_chart, points, p, lam_p, math.sqrt(site.rho) / lam_p)

    mesh = assemble_mesh(points, triangles, [], lam_chart)
    interfaces = []
    for (site, p, lam_p, w), idxs in zip(arc_meta, arc_index_lists):
        interfaces.append(Interface(site, np.asarray(idxs), lam_p, "arc"))
    for (site, p, lam_p, r_rim, r_del), rim_ids in zip(rim_meta, true_rim_ids):
        interfaces.append(Interface(site, rim_ids, lam_p, "rim"))
    return Component(mesh, tuple(interfaces))


def build_disk_mesh(resolution: float) -> SurfaceMesh:
    """Unit-disk mesh with one boundary loop and lambda = 1."""
    if not (0.0 < resolution < 1.0):
        raise InvalidParameterError("resolution must lie in (0, 1)")
    return _disk_component(resolution).mesh


# ---------------------------------------------------------------------------
# cylinder and Moebius band
# ---------------------------------------------------------------------------

def _grid_mesh(t_nodes: np.ndarray, th_nodes: np.ndarray):
    """Tensor-product triangulation of [t] x [theta]; returns (points, triangles)."""
    n_t, n_th = len(t_nodes), len(th_nodes)
    tt, hh = np.meshgrid(t_nodes, th_nodes, indexing="ij")
    points = np.stack([hh.ravel(), tt.ravel()], axis=1)  # chart x = theta, y = t
    idx = np.arange(n_t * n_th).reshape(n_t, n_th)
    a = idx[:-1, :-1].ravel()
    b = idx[:-1, 1:].ravel()
    c = idx[1:, 1:].ravel()
    d = idx[1:, :-1].ravel()
    triangles = np.concatenate([np.stack([a, b, c], axis=1),
                                np.stack([a, c, d], axis=1)])
    return points, triangles, idx


def _cylinder_component(T: float, density: float, resolution: float,
                        arc_sites: Sequence[ArcSite] = ()) -> Component:
    if T <= 0:
        raise InvalidParameterError("cylinder height T must be positive")
    if density <= 0:
        raise InvalidParameterError("boundary density must be positive")
    requests, fine_by_loop = [], {0: resolution, 1: resolution}
    for site in arc_sites:
        if site.loop not in (0, 1):
            raise InvalidParameterError("cylinder has boundary loops 0 (t=0) and 1 (t=T)")
        w = site.rho / density
        requests.append(_ArcRequest(site.theta % TWO_PI, w, site.segments))
        fine_by_loop[site.loop] = min(fine_by_loop[site.loop], 2.0 * w / site.segments)
    th_nodes, arc_cols = _parameter_grid(TWO_PI, resolution, requests)
    t_nodes = _fill_graded(0.0, T, fine_by_loop[0], fine_by_loop[1], resolution)
    points, triangles, idx = _grid_mesh(t_nodes, th_nodes)
    seam = np.stack([idx[:, 0], idx[:, -1]], axis=1)
    lam_chart = np.full(len(points), density)
    mesh = assemble_mesh(points, triangles, seam, lam_chart)
    interfaces = []
    for site, cols in zip(arc_sites, arc_cols):
        row = 0 if site.loop == 0 else len(t_nodes) - 1
        interfaces.append(Interface(site, idx[row, np.asarray(cols)], density, "arc"))
    return Component(mesh, tuple(interfaces))


def build_cylinder_mesh(T: float, rho_b: float = 1.0, resolution: float = 0.05) -> SurfaceMesh:
    """Flat cylinder [0, T] x S^1 with two boundary circles and lambda = rho_b."""
    return _cylinder_component(T, rho_b, resolution).mesh


def _mobius_component(T: float, density: float, resolution: float,
                      arc_sites: Sequence[ArcSite] = ()) -> Component:
    if T <= 0:
        raise InvalidParameterError("Moebius chart height T must be positive")
    if density <= 0:
        raise InvalidParameterError("boundary density must be positive")
    half_requests = []
    site_half = []
    for site in arc_sites:
        if site.loop != 0:
            raise InvalidParameterError("Moebius band has a single boundary loop (t=T)")
        w = site.rho / density
        theta = site.theta % TWO_PI
        section = int(theta // math.pi)  # the arc must stay inside one half-chart
        center_h = theta - section * math.pi
        if center_h - w <= 0 or center_h + w >= math.pi:
            raise InvalidParameterError("attachment arc crosses a half-chart meridian")
        half_requests.append(_ArcRequest(center_h, w, site.segments))
        site_half.append(section)
    half, arc_cols_half = _parameter_grid(math.pi, resolution, half_requests)
    half = half[:-1]  # the antipodal map needs theta and theta+pi on the same grid
    n_half = len(half)
    th_nodes = np.concatenate([half, half + math.pi, [TWO_PI]])
    fine = min([resolution] + [2.0 * r.half_width / r.segments for r in half_requests])
    t_nodes = _fill_graded(0.0, T, resolution, fine, resolution)
    points, triangles, idx = _grid_mesh(t_nodes, th_nodes)
    seam = np.stack([idx[:, 0], idx[:, -1]], axis=1)
    antipodal = np.stack([idx[0, np.arange(n_half)],
                          idx[0, np.arange(n_half) + n_half]], axis=1)
    lam_chart = np.full(len(points), density)
    mesh = assemble_mesh(points, triangles, np.concatenate([seam, antipodal]), lam_chart)
    interfaces = []
    top = len(t_nodes) - 1
    for site, cols, section in zip(arc_sites, arc_cols_half, site_half):
        cols = np.asarray(cols) + section * n_half
        interfaces.append(Interface(site, idx[top, cols], density, "arc"))
    return Component(mesh, tuple(interfaces))


def build_mobius_mesh(T: float, resolution: float = 0.05,
                      rho_b: float = 1.0) -> SurfaceMesh:
    """Moebius band as [0, T] x S^1 with (0, theta) ~ (0, theta + pi)."""
    return _mobius_component(T, rho_b, resolution).mesh


def build_spec_mesh(spec, resolution: float, arc_sites: Sequence[ArcSite] = (),
                    hole_sites: Sequence[HoleSite] = ()) -> Component:
    """Component mesh for a non-glued metric description."""
    if isinstance(spec, UnitDisk):
        return _disk_component(resolution, arc_sites, hole_sites,
                               field=spec.conformal_factor_field)
    if isinstance(spec, FlatCylinder):
        if hole_sites:
            return _cylinder_holes_component(spec, resolution, arc_sites, hole_sites)
        return _cylinder_component(spec.T, spec.boundary_density, resolution, arc_sites)
    if isinstance(spec, MobiusCylinder):
        if hole_sites:
            raise InvalidParameterError("interior gluing on the Moebius band is not supported")
        return _mobius_component(spec.T, spec.boundary_density, resolution, arc_sites)
    raise InvalidParameterError(f"cannot mesh {type(spec).__name__}")


def _cylinder_holes_component(spec: FlatCylinder, resolution: float,
                              arc_sites: Sequence[ArcSite],
                              hole_sites: Sequence[HoleSite]) -> Component:
    """Cylinder with interior holes: unstructured points + Delaunay in the chart."""
    if arc_sites:
        raise InvalidParameterError("mixed boundary and interior sites are not supported")
    from .errors import InvalidGluingError
    T, density = spec.T, spec.boundary_density
    rim_meta = []
    for site in hole_sites:
        p = np.asarray(site.point, dtype=float)  # chart (theta, t)
        r_rim = site.rho / density
        if not (2.0 * r_rim < p[1] < T - 2.0 * r_rim):
            raise InvalidGluingError("interior neck disk reaches the cylinder boundary")
        if not (2.0 * r_rim < p[0] < TWO_PI - 2.0 * r_rim):
            raise InvalidGluingError("interior neck disk crosses the chart seam")
        rim_meta.append((site, p, r_rim))

    n_th = max(8, int(round(TWO_PI / resolution)))
    n_t = max(2, int(round(T / resolution)))
    th = np.linspace(0.0, TWO_PI, n_th + 1)
    tt = np.linspace(0.0, T, n_t + 1)
    grid_th, grid_t = np.meshgrid(th, tt)
    base = np.stack([grid_th.ravel(), grid_t.ravel()], axis=1)

    rim_pts_list, patch_pts, exclusions = [], [], []
    for site, p, r_rim in rim_meta:
        m = site.segments
        rim_angles = TWO_PI * np.arange(m) / m
        rim_pts_list.append(p + r_rim * np.stack([np.cos(rim_angles), np.sin(rim_angles)], axis=1))
        h0 = TWO_PI * r_rim / m

        def keep(q, s, _p=p, _r=r_rim):
            ok = (q[:, 1] > 0.45 * s) & (q[:, 1] < T - 0.45 * s)
            ok &= (q[:, 0] > 0.45 * s) & (q[:, 0] < TWO_PI - 0.45 * s)
            ok &= np.linalg.norm(q - _p, axis=1) > _r + 0.45 * s
            return ok

        pts, r_excl = _patch_rings(p, h0, resolution, r_rim + h0, keep)
        patch_pts.append(pts)
        exclusions.append((p, r_excl + r_rim))

    keep_base = np.ones(len(base), dtype=bool)
    for c, rr in exclusions:
        keep_base &= np.linalg.norm(base - c, axis=1) > rr
    # the seam columns must survive with identical t-grids on both sides
    keep_base |= (base[:, 0] == 0.0) | (base[:, 0] == TWO_PI)
    base_pts = base[keep_base]

    sections = rim_pts_list + [base_pts] + patch_pts
    points = np.concatenate([s for s in sections if len(s)])
    rim_id_lists, offset = [], 0
    for rp in rim_pts_list:
        rim_id_lists.append(np.arange(offset, offset + len(rp)))
        offset += len(rp)

    tri = Delaunay(points)
    if tri.coplanar.size:
        raise AssemblyError("triangulation dropped input points")
    triangles = tri.simplices
    for rim_ids in rim_id_lists:
        inside = np.isin(triangles, rim_ids).all(axis=1)
        triangles = triangles[~inside]

    # identify the chart seam: vertices at theta=0 and theta=2*pi share t values
    left = np.where(points[:, 0] == 0.0)[0]
    right = np.where(points[:, 0] == TWO_PI)[0]
    left = left[np.argsort(points[left, 1])]
    right = right[np.argsort(points[right, 1])]
    if len(left) != len(right) or not np.allclose(points[left, 1], points[right, 1]):
        raise AssemblyError("cylinder seam columns do not match")
    seam = np.stack([left, right], axis=1)

    lam_chart = np.full(len(points), density)
    mesh = assemble_mesh(points, triangles, seam, lam_chart)
    interfaces = [Interface(site, rim_ids, density, "rim")
                  for (site, p, r_rim), rim_ids in zip(rim_meta, rim_id_lists)]
    return Component(mesh, tuple(interfaces))


# ---------------------------------------------------------------------------
# log-graded planar annulus (radial quadrature mesh)
# ---------------------------------------------------------------------------

def build_log_annulus_mesh(r_in: float, r_out: float, n_radial: int,
                           n_angular: int) -> SurfaceMesh:
    """Planar annulus with geometrically graded radii, lambda = 1."""
    if not (0 < r_in < r_out):
        raise InvalidParameterError("need 0 < r_in < r_out")
    radii = np.geomspace(r_in, r_out, n_radial + 1)
    ang = TWO_PI * np.arange(n_angular) / n_angular
    points = np.concatenate([
        np.stack([r * np.cos(ang), r * np.sin(ang)], axis=1) for r in radii])
    tris = []
    for i in range(n_radial):
        a = i * n_angular + np.arange(n_angular)
        b = i * n_angular + (np.arange(n_angular) + 1) % n_angular
        c = (i + 1) * n_angular + (np.arange(n_angular) + 1) % n_angular
        d = (i + 1) * n_angular + np.arange(n_angular)
        tris.append(np.stack([a, b, c], axis=1))
        tris.append(np.stack([a, c, d], axis=1))
    triangles = np.concatenate(tris)
    return assemble_mesh(points, triangles, [], np.ones(len(points)))


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------

def export_off(mesh: SurfaceMesh, path) -> None:
    """OFF text file of the chart triangulation (z = 0)."""
    lines = ["OFF", f"{mesh.n_chart} {mesh.n_triangles} 0"]
    for x, y in mesh.vertices:
        lines.append(f"{x!r} {y!r} 0.0")
    for a, b, c in mesh.triangles:
        lines.append(f"3 {a} {b} {c}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def export_sidecar(mesh: SurfaceMesh, path) -> None:
    """JSON sidecar: conformal factor, identifications, boundary loops."""
    payload = {
        "conformal_factor": [float(v) for v in mesh.conformal_factor],
        "identifications": [[int(a), int(b)] for a, b in mesh.identifications],
        "boundary_loops": [[int(v) for v in loop] for loop in mesh.boundary_loops],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True)
        fh.write("\n")
