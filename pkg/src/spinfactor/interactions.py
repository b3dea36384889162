"""Interaction families on a lattice and their dense operator assembly.

An interaction family is an explicit finite list of Hermitian terms, each
with a small support, a matrix part on that support and a scalar time
coefficient from a built-in family. Assembly embeds terms into the tensor
product over a target region by Kronecker products plus an index
permutation; factor order is always ascending vertex index.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from . import geometry
from .geometry import Lattice, Region, region
from .decay import DecayConstants, DecayProfile, lattice_constants

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = {"sx": SIGMA_X, "sy": SIGMA_Y, "sz": SIGMA_Z}

# Desk-scale memory budget: dense pipelines refuse anything larger.
HILBERT_DIM_CAP = 4096
HERMITICITY_TOL = 1e-13
COEFFICIENT_SAMPLES = 201


class DimensionCapError(ValueError):
    """Requested dense operator exceeds the dimension cap."""


class DuplicateTermWarning(UserWarning):
    """Two terms share the same support and matrix part."""


@dataclass(frozen=True)
class Constant:
    c: float = 1.0

    def __call__(self, t: float) -> float:
        return self.c

    def sup_abs(self, horizon: float, samples: int = COEFFICIENT_SAMPLES) -> float:
        return abs(self.c)

    def scaled(self, factor: float) -> "Constant":
        return Constant(self.c * factor)


@dataclass(frozen=True)
class Ramp:
    c: float = 1.0

    def __call__(self, t: float) -> float:
        return self.c * t

    def sup_abs(self, horizon: float, samples: int = COEFFICIENT_SAMPLES) -> float:
        return abs(self.c) * horizon

    def scaled(self, factor: float) -> "Ramp":
        return Ramp(self.c * factor)


@dataclass(frozen=True)
class Sinusoid:
    c: float = 1.0
    omega: float = 1.0
    phase: float = 0.0

    def __call__(self, t: float) -> float:
        return self.c * math.sin(self.omega * t + self.phase)

    def sup_abs(self, horizon: float, samples: int = COEFFICIENT_SAMPLES) -> float:
        # Grid maximum; linspace includes both endpoints exactly.
        ts = np.linspace(-horizon, horizon, samples)
        return float(np.max(np.abs(self.c * np.sin(self.omega * ts + self.phase))))

    def scaled(self, factor: float) -> "Sinusoid":
        return Sinusoid(self.c * factor, self.omega, self.phase)


Coefficient = Constant | Ramp | Sinusoid


@dataclass(frozen=True, eq=False)
class InteractionTerm:
    """One Hermitian term: coefficient(t) times a matrix on its support."""

    support: Region
    matrix: np.ndarray
    coefficient: Coefficient = Constant(1.0)

    def __post_init__(self):
        object.__setattr__(self, "support", region(self.support))
        if not self.support:
            raise ValueError("interaction term needs a nonempty support")
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("matrix part must be square")
        if np.linalg.norm(m - m.conj().T, 2) > HERMITICITY_TOL:
            raise ValueError("matrix part is not Hermitian")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def at(self, t: float) -> np.ndarray:
        return self.coefficient(t) * self.matrix

    def sup_norm(self, horizon: float, samples: int = COEFFICIENT_SAMPLES) -> float:
        """sup over [-T, T] of the spectral norm of the term."""
        return float(np.linalg.norm(self.matrix, 2)) * self.coefficient.sup_abs(horizon, samples)

    def scaled(self, factor: float) -> "InteractionTerm":
        return InteractionTerm(self.support, self.matrix, self.coefficient.scaled(factor))


@dataclass(frozen=True, eq=False)
class InteractionFamily:
    """Finite list of terms plus per-site Hilbert dimensions and a horizon T."""

    terms: tuple[InteractionTerm, ...]
    site_dims: Mapping[int, int]
    horizon: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        dims = {int(v): int(d) for v, d in dict(self.site_dims).items()}
        for v, d in dims.items():
            if d < 2:
                raise ValueError(f"site {v}: Hilbert dimension must be at least 2")
        object.__setattr__(self, "site_dims", dims)
        if self.horizon <= 0:
            raise ValueError("time horizon must be positive")
        sites = frozenset(dims)
        seen = {}
        for i, term in enumerate(self.terms):
            if not term.support <= sites:
                raise ValueError(f"term {i}: support {sorted(term.support)} outside declared sites")
            expected = self.dim_of(term.support)
            if term.matrix.shape[0] != expected:
                raise ValueError(
                    f"term {i}: matrix dimension {term.matrix.shape[0]} does not match "
                    f"the product of site dimensions {expected}")
            key = (term.support, term.matrix.tobytes())
            if key in seen:
                warnings.warn(
                    f"terms {seen[key]} and {i} share support {sorted(term.support)} "
                    "and matrix part", DuplicateTermWarning, stacklevel=2)
            else:
                seen[key] = i

    @property
    def sites(self) -> Region:
        return frozenset(self.site_dims)

    def dim_of(self, target) -> int:
        out = 1
        for v in region(target):
            out *= self.site_dims[v]
        return out

    def is_time_independent(self) -> bool:
        return all(isinstance(t.coefficient, Constant) for t in self.terms)

    def scaled(self, factor: float) -> "InteractionFamily":
        return InteractionFamily(tuple(t.scaled(factor) for t in self.terms),
                                 self.site_dims, self.horizon)

    def check_time(self, t: float) -> None:
        if abs(t) > self.horizon:
            raise ValueError(f"time {t} outside the horizon [-{self.horizon}, {self.horizon}]")


def uniform_sites(lattice: Lattice, dim: int = 2) -> dict[int, int]:
    return {v: dim for v in range(lattice.vertex_count)}


def _coefficient(c: float, time_profile: Mapping | None) -> Coefficient:
    if time_profile is None:
        return Constant(c)
    family = time_profile.get("family", "constant")
    if family == "constant":
        return Constant(c)
    if family == "ramp":
        return Ramp(c)
    if family == "sinusoid":
        return Sinusoid(c, float(time_profile.get("omega", 1.0)),
                        float(time_profile.get("phase", 0.0)))
    raise ValueError(f"unknown coefficient family {family!r}")


def tfim(lattice: Lattice, h: float, J: float, horizon: float = 1.0,
         time_profile: Mapping | None = None) -> InteractionFamily:
    """Transverse-field Ising model: J zz on every edge plus h x on every site."""
    zz = np.kron(SIGMA_Z, SIGMA_Z)
    terms = [InteractionTerm({u, v}, zz, _coefficient(J, time_profile))
             for u, v in sorted(lattice.edges)]
    terms += [InteractionTerm({x}, SIGMA_X, _coefficient(h, time_profile))
              for x in range(lattice.vertex_count)]
    return InteractionFamily(tuple(terms), uniform_sites(lattice), horizon)


def heisenberg(lattice: Lattice, jx: float, jy: float, jz: float, h: float = 0.0,
               horizon: float = 1.0, time_profile: Mapping | None = None) -> InteractionFamily:
    """Heisenberg exchange on every edge (one term per bond) plus a z field."""
    bond = (jx * np.kron(SIGMA_X, SIGMA_X) + jy * np.kron(SIGMA_Y, SIGMA_Y)
            + jz * np.kron(SIGMA_Z, SIGMA_Z))
    terms = [InteractionTerm({u, v}, bond, _coefficient(1.0, time_profile))
             for u, v in sorted(lattice.edges)]
    if h != 0.0:
        terms += [InteractionTerm({x}, SIGMA_Z, _coefficient(h, time_profile))
                  for x in range(lattice.vertex_count)]
    return InteractionFamily(tuple(terms), uniform_sites(lattice), horizon)


def long_range_zz(lattice: Lattice, coupling: float, alpha: float, h: float = 0.0,
                  horizon: float = 1.0, time_profile: Mapping | None = None) -> InteractionFamily:
    """Algebraically decaying zz pair couplings J (1+d)^(-alpha) on every pair."""
    if alpha <= 0:
        raise ValueError("decay exponent alpha must be positive")
    zz = np.kron(SIGMA_Z, SIGMA_Z)
    terms = []
    n = lattice.vertex_count
    for u in range(n):
        for v in range(u + 1, n):
            d = lattice.distance(u, v)
            if d >= geometry.UNREACHABLE:
                continue
            c = coupling * (1.0 + d) ** (-alpha)
            terms.append(InteractionTerm({u, v}, zz, _coefficient(c, time_profile)))
    if h != 0.0:
        terms += [InteractionTerm({x}, SIGMA_X, _coefficient(h, time_profile))
                  for x in range(n)]
    return InteractionFamily(tuple(terms), uniform_sites(lattice), horizon)


def reorder_factors(matrix: np.ndarray, current_order: list[int],
                    target_order: list[int], site_dims: Mapping[int, int]) -> np.ndarray:
    """Permute the tensor factors of a square operator between site orderings."""
    if sorted(current_order) != sorted(target_order):
        raise ValueError("orderings must contain the same sites")
    if current_order == target_order:
        return matrix
    dims = [site_dims[v] for v in current_order]
    perm = [current_order.index(v) for v in target_order]
    n = len(dims)
    tensor = matrix.reshape(dims + dims)
    tensor = tensor.transpose(perm + [p + n for p in perm])
    dim = int(np.prod(dims))
    return np.ascontiguousarray(tensor).reshape(dim, dim)


def embed(matrix: np.ndarray, support, target, site_dims: Mapping[int, int]) -> np.ndarray:
    """Extend an operator on `support` to `target` by tensoring with identity.

    Factor order of both input and output is ascending vertex index.
    """
    support, target = region(support), region(target)
    if not support <= target:
        raise ValueError(f"support {sorted(support)} not contained in target {sorted(target)}")
    sup = sorted(support)
    rest = sorted(target - support)
    sup_dim = int(np.prod([site_dims[v] for v in sup]))
    if matrix.shape != (sup_dim, sup_dim):
        raise ValueError(f"matrix of shape {matrix.shape} does not act on "
                         f"support {sup} of dimension {sup_dim}")
    target_dim = sup_dim * int(np.prod([site_dims[v] for v in rest], dtype=np.int64))
    if target_dim > HILBERT_DIM_CAP:
        raise DimensionCapError(
            f"target Hilbert dimension {target_dim} exceeds the dense cap {HILBERT_DIM_CAP}")
    if not rest:
        return np.array(matrix, dtype=complex)
    rest_dim = target_dim // sup_dim
    full = np.kron(np.asarray(matrix, dtype=complex), np.eye(rest_dim, dtype=complex))
    return reorder_factors(full, sup + rest, sorted(target), site_dims)


def assemble_hamiltonian(family: InteractionFamily, target, t: float) -> np.ndarray:
    """Sum of all terms supported inside `target`, evaluated at time t."""
    family.check_time(t)
    target = region(target)
    dim = family.dim_of(target)
    if dim > HILBERT_DIM_CAP:
        raise DimensionCapError(
            f"target Hilbert dimension {dim} exceeds the dense cap {HILBERT_DIM_CAP}")
    out = np.zeros((dim, dim), dtype=complex)
    for term in family.terms:
        if term.support <= target:
            c = term.coefficient(t)
            if c != 0.0:
                out += c * embed(term.matrix, term.support, target, family.site_dims)
    return out


def _check_surface_geometry(family: InteractionFamily, lattice: Lattice, X, radius: int, lam):
    X, lam = region(X), region(lam)
    if radius < 1:
        raise ValueError("collar radius R must be at least 1")
    fat = geometry.fattening(lattice, X, radius)
    if not fat <= lam:
        raise ValueError(
            f"Lambda too small: the {radius}-fattening of X reaches {sorted(fat - lam)}")
    return X, lam


def surface_energy(family: InteractionFamily, lattice: Lattice, X, radius: int,
                   lam, t: float) -> np.ndarray:
    """Sum of crossing terms confined to the half collar, on the full annulus.

    The result acts on the tensor factors of the width-2R annulus of the cut
    (ascending vertex order). Terms enter when their support meets both X and
    its complement and fits inside the half-width collar.
    """
    family.check_time(t)
    X, lam = _check_surface_geometry(family, lattice, X, radius, lam)
    patch = geometry.annulus(lattice, X, radius)
    collar = geometry.surface_collar(lattice, X, radius)
    dim = family.dim_of(patch)
    if dim > HILBERT_DIM_CAP:
        raise DimensionCapError(
            f"annulus Hilbert dimension {dim} exceeds the dense cap {HILBERT_DIM_CAP}")
    out = np.zeros((dim, dim), dtype=complex)
    for term in family.terms:
        if geometry.in_surface_family(term.support, X, lam, collar):
            c = term.coefficient(t)
            if c != 0.0:
                out += c * embed(term.matrix, term.support, patch, family.site_dims)
    return out


def crossing_generator(family: InteractionFamily, X, lam, t: float) -> np.ndarray:
    """Minus the sum of all terms whose support meets both sides of the cut.

    Satisfies H(lam) - H(X) - H(lam \\ X) = -K exactly, term by term.
    Degenerate cuts (X empty or X = lam) simply have no crossing terms.
    """
    family.check_time(t)
    X, lam = region(X), region(lam)
    dim = family.dim_of(lam)
    if dim > HILBERT_DIM_CAP:
        raise DimensionCapError(
            f"target Hilbert dimension {dim} exceeds the dense cap {HILBERT_DIM_CAP}")
    out = np.zeros((dim, dim), dtype=complex)
    for term in family.terms:
        if term.support <= lam and geometry.is_crossing(term.support, X, lam):
            c = term.coefficient(t)
            if c != 0.0:
                out -= c * embed(term.matrix, term.support, lam, family.site_dims)
    return out


def crossing_defect(family: InteractionFamily, lattice: Lattice, X, radius: int,
                    lam, t: float) -> np.ndarray:
    """Residual generator after the surface energy cancels collar-confined terms.

    Equals minus the sum of crossing terms not confined to the half collar.
    Computed directly and cross-checked element-wise against the sum of the
    crossing generator and the embedded surface energy.
    """
    family.check_time(t)
    X, lam = _check_surface_geometry(family, lattice, X, radius, lam)
    collar = geometry.surface_collar(lattice, X, radius)
    dim = family.dim_of(lam)
    direct = np.zeros((dim, dim), dtype=complex)
    for term in family.terms:
        if (term.support <= lam and geometry.is_crossing(term.support, X, lam)
                and not term.support <= collar):
            c = term.coefficient(t)
            if c != 0.0:
                direct -= c * embed(term.matrix, term.support, lam, family.site_dims)
    patch = geometry.annulus(lattice, X, radius)
    combined = crossing_generator(family, X, lam, t) + embed(
        surface_energy(family, lattice, X, radius, lam, t), patch, lam, family.site_dims)
    if np.abs(combined - direct).max() > 1e-12:
        raise RuntimeError("internal consistency failure: crossing generator plus "
                           "surface energy differs from the direct excluded-term sum")
    return direct


@dataclass(frozen=True)
class VelocityData:
    """Weighted interaction norm and the propagation velocity it induces."""

    coupling_norm: float
    velocity: float


def coupling_norm(family: InteractionFamily, profile: DecayProfile, lattice: Lattice,
                  constants: DecayConstants | None = None,
                  samples: int = COEFFICIENT_SAMPLES) -> VelocityData:
    """Largest damped-weight-relative pair sum of term norms, and the velocity.

    For each vertex pair (x, y), sums sup_t of the norms of all terms whose
    support contains both, divided by the damped weight at their distance.
    The velocity is twice the norm times the damped convolution constant.
    """
    if constants is None:
        constants = lattice_constants(profile, lattice)
    pair_sums: dict[tuple[int, int], float] = {}
    for term in family.terms:
        sup = term.sup_norm(family.horizon, samples)
        if sup == 0.0:
            continue
        for x in term.support:
            for y in term.support:
                key = (x, y)
                pair_sums[key] = pair_sums.get(key, 0.0) + sup
    best = 0.0
    for (x, y), total in pair_sums.items():
        fw = profile.damped_at(lattice.distance(x, y))
        if fw == 0.0:
            raise ValueError(
                f"sites {x} and {y} interact but sit at unreachable distance; "
                "the damped weight vanishes and the interaction norm diverges")
        best = max(best, total / fw)
    return VelocityData(best, 2.0 * best * constants.damped_conv)
