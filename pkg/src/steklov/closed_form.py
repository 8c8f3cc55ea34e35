"""Exact circle-invariant Steklov spectra on the cylinder and Moebius band.

For the flat cylinder [0, T] x S^1 (metric dt^2 + dtheta^2) separation of
variables gives, per Fourier mode n, the eigenvalue families

    even profile  cosh(n(t - T/2)):  sigma = n tanh(nT/2)   (multiplicity 2)
    odd profile   sinh(n(t - T/2)):  sigma = n coth(nT/2)   (multiplicity 2)
    mode 0 linear profile t - T/2:   sigma = 2/T            (multiplicity 1)

The Moebius band is realized as the quotient of [-T, T] x S^1 by
(t, theta) ~ (-t, theta + pi).  Invariant separated solutions force the
t-profile parity to match the mode parity, leaving

    n even (n >= 2), even profile:  sigma = n tanh(nT)      (multiplicity 2)
    n odd,           odd profile:   sigma = n coth(nT)      (multiplicity 2)

and no linear branch (t is not invariant under the deck map).  These formulas
are validated against the finite-element oracle in the test suite before any
experiment relies on them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .errors import BracketError, InvalidParameterError
from .meshes import FlatCylinder, MobiusCylinder
from .spectra import CLUSTER_RTOL_EXACT, Spectrum, make_spectrum

ROOT_TOL = 1e-14
SQRT3 = math.sqrt(3.0)


# ---------------------------------------------------------------------------
# root solving and the transcendental constants
# ---------------------------------------------------------------------------

def solve_bracketed_root(f, a: float, b: float, tol: float = ROOT_TOL) -> float:
    """Root of f in [a, b]; requires a sign change on the bracket."""
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa * fb > 0:
        raise BracketError(f"no sign change on [{a}, {b}]: f(a)={fa}, f(b)={fb}")
    return float(brentq(f, a, b, xtol=tol, rtol=4.0 * np.finfo(float).eps, maxiter=200))


def _coth(t: float) -> float:
    return 1.0 / math.tanh(t)


@dataclass(frozen=True)
class Constant:
    name: str
    equation: str
    value: float
    residual: float

    def as_dict(self) -> dict:
        return {"name": self.name, "equation": self.equation,
                "value": self.value, "residual": self.residual}


@lru_cache(maxsize=None)
def constant_T10() -> Constant:
    """Unique positive solution of t = coth(t), about 1.2."""
    f = lambda t: t - _coth(t)
    root = solve_bracketed_root(f, 1.0, 2.0)
    return Constant("T_{1,0}", "t = coth(t)", root, abs(f(root)))


@lru_cache(maxsize=None)
def constant_Tk1(k: int) -> Constant:
    """Unique positive solution of k tanh(kt) = coth(t); decreasing in k."""
    if k < 2:
        raise InvalidParameterError("T_{k,1} is defined for k >= 2")
    f = lambda t: k * math.tanh(k * t) - _coth(t)
    root = solve_bracketed_root(f, 1e-8, 2.0)
    return Constant(f"T_{{{k},1}}", f"{k} tanh({k} t) = coth(t)", root, abs(f(root)))


@lru_cache(maxsize=None)
def constant_tk(k: int) -> Constant:
    """Unique positive solution of k tanh(kt) = 1.2/t; satisfies k t_k = t_1."""
    if k < 1:
        raise InvalidParameterError("t_k is defined for k >= 1")
    f = lambda t: k * math.tanh(k * t) - 1.2 / t
    root = solve_bracketed_root(f, 1e-8, 3.0)
    c = Constant(f"t_{k}", f"{k} tanh({k} t) = 1.2/t", root, abs(f(root)))
    t1 = root if k == 1 else constant_tk(1).value
    if abs(k * root - t1) > 1e-10:
        raise BracketError(f"identity k*t_k = t_1 violated for k={k}: {k * root} vs {t1}")
    return c


def all_constants(k_max: int = 10) -> list[Constant]:
    out = [constant_T10()]
    out += [constant_Tk1(k) for k in range(2, k_max + 1)]
    out += [constant_tk(k) for k in range(1, k_max + 1)]
    return out


# ---------------------------------------------------------------------------
# eigenvalue branches
# ---------------------------------------------------------------------------

EVEN = "even"          # hyperbolic-tangent family, increasing in T
ODD = "odd"            # hyperbolic-cotangent family, decreasing in T
ZERO_LINEAR = "zero-linear"  # mode-0 non-constant branch, 2/T


@dataclass(frozen=True)
class Branch:
    """One Fourier-mode eigenvalue family at unit boundary density."""

    surface: str      # "cylinder" | "mobius"
    mode: int
    kind: str         # EVEN | ODD | ZERO_LINEAR
    multiplicity: int

    def value(self, T: float) -> float:
        if self.kind == ZERO_LINEAR:
            return 2.0 / T
        half = 0.5 if self.surface == "cylinder" else 1.0
        x = self.mode * T * half
        if self.kind == EVEN:
            return self.mode * math.tanh(x)
        return self.mode * _coth(x)

    @property
    def increasing(self) -> bool:
        return self.kind == EVEN

    def limit(self) -> float:
        """Value as T -> infinity."""
        return 0.0 if self.kind == ZERO_LINEAR else float(self.mode)


def cylinder_branches(n_max: int) -> tuple[Branch, ...]:
    out = [Branch("cylinder", 0, ZERO_LINEAR, 1)]
    for n in range(1, n_max + 1):
        out.append(Branch("cylinder", n, EVEN, 2))
        out.append(Branch("cylinder", n, ODD, 2))
    return tuple(out)


def mobius_branches(n_max: int) -> tuple[Branch, ...]:
    out = []
    for n in range(1, n_max + 1):
        if n % 2 == 0:
            out.append(Branch("mobius", n, EVEN, 2))
        else:
            out.append(Branch("mobius", n, ODD, 2))
    return tuple(out)


def _branches(surface: str, n_max: int) -> tuple[Branch, ...]:
    if surface == "cylinder":
        return cylinder_branches(n_max)
    if surface == "mobius":
        return mobius_branches(n_max)
    raise InvalidParameterError(f"unknown surface kind {surface!r}")


def _unit_density_length(surface: str) -> float:
    return 4.0 * math.pi if surface == "cylinder" else 2.0 * math.pi


def _sorted_branch_values(surface: str, T: float, count: int):
    """Smallest `count` nonzero branch eigenvalues at unit density, with sources."""
    n_max = count + 8
    branches = _branches(surface, n_max)
    entries = []
    for br in branches:
        v = br.value(T)
        entries.extend([(v, br)] * br.multiplicity)
    entries.sort(key=lambda e: e[0])
    head = entries[:count]
    # audit the mode cutoff: the selection must not touch the largest modes,
    # whose values only grow with n
    tail_min = min(v for v, br in entries if br.mode >= n_max)
    if head and head[-1][0] >= tail_min:
        raise InvalidParameterError("mode cutoff too small for requested count")
    return head


def _spectrum_from_branches(surface: str, T: float, rho_b: float, count: int,
                            label: str) -> Spectrum:
    if T <= 0:
        raise InvalidParameterError("chart height T must be positive")
    if rho_b <= 0:
        raise InvalidParameterError("boundary density must be positive")
    if count < 1:
        raise InvalidParameterError("count must be >= 1")
    head = _sorted_branch_values(surface, T, count - 1) if count > 1 else []
    values = np.array([0.0] + [v for v, _ in head]) / rho_b
    length = _unit_density_length(surface) * rho_b
    return make_spectrum(values, length, cluster_rtol=CLUSTER_RTOL_EXACT, label=label)


def cylinder_spectrum(T: float, rho_b: float = 1.0, count: int = 10) -> Spectrum:
    """Smallest `count` Steklov eigenvalues of the flat cylinder, sigma_0 = 0 included."""
    return _spectrum_from_branches("cylinder", T, rho_b, count,
                                   label=f"cylinder T={T:g} rho_b={rho_b:g}")


def mobius_spectrum(T: float, count: int = 10, rho_b: float = 1.0) -> Spectrum:
    """Smallest `count` Steklov eigenvalues of the flat Moebius band."""
    return _spectrum_from_branches("mobius", T, rho_b, count,
                                   label=f"mobius T={T:g} rho_b={rho_b:g}")


def disk_spectrum(count: int = 10) -> Spectrum:
    """Classical unit-disk Steklov spectrum 0, 1, 1, 2, 2, ... with L = 2*pi."""
    if count < 1:
        raise InvalidParameterError("count must be >= 1")
    values = np.array([(j + 1) // 2 for j in range(count)], dtype=float)
    return make_spectrum(values, 2.0 * math.pi, label="disk")


def spectrum_for(spec, count: int) -> Spectrum:
    """Closed-form spectrum of a disk, cylinder or Moebius metric description."""
    from .meshes import UnitDisk
    if isinstance(spec, FlatCylinder):
        return cylinder_spectrum(spec.T, spec.boundary_density, count)
    if isinstance(spec, MobiusCylinder):
        return mobius_spectrum(spec.T, count, spec.boundary_density)
    if isinstance(spec, UnitDisk) and spec.conformal_factor_field is None:
        return disk_spectrum(count)
    raise InvalidParameterError(f"no closed form for {type(spec).__name__}")


def cylinder_sigma2bar_deficit(T: float) -> float:
    """Deficit 4*pi - sigma_bar_2 on the unit-density cylinder, computed stably.

    sigma_2(T) = tanh(T/2) for every T, so the gap equals
    4*pi*(1 - tanh(T/2)) = 8*pi/(exp(T) + 1), positive for all finite T even
    where float64 rounds tanh(T/2) to 1.
    """
    if T <= 0:
        raise InvalidParameterError("chart height T must be positive")
    return 8.0 * math.pi / (math.exp(T) + 1.0)


# ---------------------------------------------------------------------------
# suprema over the invariant family
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SupremumResult:
    surface: str
    k: int
    value: float          # supremum of sigma_bar_k over T
    maximizer_T: float | None
    achieved: bool

    def as_dict(self) -> dict:
        return {"surface": self.surface, "k": self.k, "value": self.value,
                "maximizer_T": self.maximizer_T, "achieved": self.achieved}


def _sigma_k_unit(surface: str, T: float, k: int) -> float:
    return _sorted_branch_values(surface, T, k)[-1][0]


def _limit_sigma_k(surface: str, k: int) -> float:
    """lim_{T->inf} sigma_k(T): sorted limits of the branch values."""
    n_max = k + 8
    vals = []
    for br in _branches(surface, n_max):
        vals.extend([br.limit()] * br.multiplicity)
    vals.sort()
    return vals[k - 1]


def invariant_supremum(surface: str, k: int, *, grid_size: int = 220) -> SupremumResult:
    """sup over T of sigma_bar_k for the circle-invariant family.

    The envelope T -> sigma_k(T) is a minimum over monotone branches, so its
    maximum is either at a branch crossing (located on a coarse log grid,
    narrowed by golden section, then polished by a root solve on the two
    active branches) or approached as T -> infinity, in which case the
    supremum equals the analytic branch limit and is reported as not achieved.
    """
    if k < 1:
        raise InvalidParameterError("k must be >= 1")
    length = _unit_density_length(surface)
    grid = np.logspace(-2.5, 3.0, grid_size)
    env = np.array([_sigma_k_unit(surface, T, k) for T in grid])
    limit = _limit_sigma_k(surface, k)
    best = env.max()
    if best <= limit * (1.0 + 1e-9):
        return SupremumResult(surface, k, length * limit, None, False)

    i = int(np.argmax(env))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, grid_size - 1)]
    f = lambda T: _sigma_k_unit(surface, T, k)
    T_hat = _golden_max(f, lo, hi)

    # identify the two branches meeting at the kink and solve the crossing
    sig = f(T_hat)
    n_max = k + 8
    active = [br for br in _branches(surface, n_max)
              if abs(br.value(T_hat) - sig) <= 1e-5 * sig]
    rising = [br for br in active if br.increasing]
    falling = [br for br in active if not br.increasing]
    if not rising or not falling:
        raise BracketError(f"no branch crossing located near T={T_hat}")
    up, down = rising[0], falling[0]
    diff = lambda T: up.value(T) - down.value(T)
    a, b = T_hat, T_hat
    for _ in range(200):
        if diff(a) <= 0:
            break
        a *= 0.8
    for _ in range(200):
        if diff(b) >= 0:
            break
        b *= 1.25
    T_star = solve_bracketed_root(diff, a, b)
    return SupremumResult(surface, k, length * up.value(T_star), T_star, True)


def _golden_max(f, a: float, b: float, iters: int = 90) -> float:
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(iters):
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = f(x1)
    return 0.5 * (a + b)


# ---------------------------------------------------------------------------
# distinguished metrics
# ---------------------------------------------------------------------------

def critical_catenoid_metric() -> FlatCylinder:
    """Flat-cylinder metric with sigma_1 = sigma_2 = sigma_3 = 1 and L = 4*pi/T_{1,0}.

    Height 2*T_{1,0} puts the linear branch 2/T and the mode-1 tangent branch
    at a triple crossing; density 1/T_{1,0} rescales the common value to 1.
    """
    t10 = constant_T10().value
    return FlatCylinder(T=2.0 * t10, boundary_density=1.0 / t10)


def critical_mobius_metric() -> MobiusCylinder:
    """Moebius metric with sigma_1 = 1 and L = 2*pi*sqrt(3).

    At height T_{2,1} the mode-2 tangent and mode-1 cotangent branches cross
    at sqrt(3); density sqrt(3) rescales the crossing value to 1.
    """
    t21 = constant_Tk1(2).value
    return MobiusCylinder(T=t21, boundary_density=SQRT3)
