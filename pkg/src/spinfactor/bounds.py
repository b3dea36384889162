"""Closed-form right-hand sides and dense measurements for every inequality.

Each inequality gets a pure evaluation of its right-hand side from named
constants, a dense measurement of its left-hand side, and a BoundReport
pairing the two with the inputs that produced them. The factorization bound
is additionally capped at 2, the trivial distance between unitaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import geometry
from .geometry import Lattice, UNREACHABLE, region
from .decay import DecayConstants, DecayProfile
from .dynamics import IntegratorSettings, conjugate, integrate_cocycle, spectral_norm
from .interactions import (
    InteractionFamily,
    VelocityData,
    assemble_hamiltonian,
    crossing_defect,
    embed,
    surface_energy,
)

DEFAULT_SLACK = 1e-6
UNITARY_CAP = 2.0


def _exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


@dataclass(frozen=True)
class BoundReport:
    """One measured inequality: lhs, rhs, inputs and the verdict.

    `rhs_cap` is an a-priori cap applied before comparison (the factorization
    error never exceeds 2 by unitarity); None for the other inequalities.
    """

    name: str
    lhs: float
    rhs: float
    satisfied: bool
    slack: float = DEFAULT_SLACK
    rhs_cap: float | None = None
    inputs: dict = field(default_factory=dict)

    def effective_rhs(self) -> float:
        return self.rhs if self.rhs_cap is None else min(self.rhs, self.rhs_cap)

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "satisfied": self.satisfied,
            "slack": self.slack,
            "rhs_cap": self.rhs_cap,
            "inputs": dict(self.inputs),
        }

    @staticmethod
    def from_dict(d: dict) -> "BoundReport":
        return BoundReport(name=d["name"], lhs=d["lhs"], rhs=d["rhs"],
                           satisfied=d["satisfied"], slack=d["slack"],
                           rhs_cap=d["rhs_cap"], inputs=dict(d["inputs"]))


def make_report(name: str, lhs: float, rhs: float, inputs: dict,
                slack: float = DEFAULT_SLACK, rhs_cap: float | None = None) -> BoundReport:
    effective = rhs if rhs_cap is None else min(rhs, rhs_cap)
    return BoundReport(name=name, lhs=float(lhs), rhs=float(rhs),
                       satisfied=bool(lhs <= effective + slack), slack=slack,
                       rhs_cap=rhs_cap, inputs=inputs)


def factorization_rhs(*, boundary_size: int, coupling_norm: float, weight_norm: float,
                      damped_norm: float, damped_conv: float, growth: float,
                      dimension: int, velocity: float, radius: int, dt: float,
                      tail_fn: Callable[[int], float],
                      envelope_fn: Callable[[float], float]) -> float:
    """Bound on the factorization error at collar radius R over a time span dt.

    |bdry| n w |dt| [ 2 tail(R//2)
                      + |bdry| kappa (R//2)^(2 dim) env(R//2) (e^(v |dt|) - 1) ]
    with kappa = growth^2 damped_norm / damped_conv. The collar term vanishes
    when R//2 = 0.
    """
    half = radius // 2
    kappa = growth ** 2 * damped_norm / damped_conv
    collar_term = (boundary_size * kappa * float(half) ** (2 * dimension)
                   * envelope_fn(float(half)) * (_exp(velocity * abs(dt)) - 1.0))
    bracket = 2.0 * tail_fn(half) + collar_term
    return boundary_size * coupling_norm * weight_norm * abs(dt) * bracket


def kappa_constant(constants: DecayConstants) -> float:
    return constants.growth ** 2 * constants.damped_norm / constants.damped_conv


def defect_rhs(*, boundary_size: int, coupling_norm: float, weight_norm: float,
               radius: int, tail_fn: Callable[[int], float]) -> float:
    """Bound on the norm of the residual generator: 2 |bdry| n w tail(R//2)."""
    return 2.0 * boundary_size * coupling_norm * weight_norm * tail_fn(radius // 2)


def defect_sup(family: InteractionFamily, lattice: Lattice, X, radius: int, lam,
               times: Sequence[float]) -> float:
    """Largest residual-generator norm over a grid of times."""
    return max(spectral_norm(crossing_defect(family, lattice, X, radius, lam, t))
               for t in times)


def restriction_rhs(*, boundary_size: int, weight_norm: float, damped_conv: float,
                    growth: float, dimension: int, velocity: float, radius: int,
                    norm_a: float, dt: float,
                    envelope_fn: Callable[[float], float]) -> float:
    """Bound on replacing the full evolution of a collar observable by the
    annulus evolution: (growth w / conv) |A| |bdry| (R//2)^dim env(R//2)
    (e^(v |dt|) - 1)."""
    half = radius // 2
    return (growth * weight_norm / damped_conv * norm_a * boundary_size
            * float(half) ** dimension * envelope_fn(float(half))
            * (_exp(velocity * abs(dt)) - 1.0))


def restriction_gap(family: InteractionFamily, lattice: Lattice, X, radius: int,
                    lam, a_collar: np.ndarray, s: float, r: float,
                    settings: IntegratorSettings,
                    profile: DecayProfile, constants: DecayConstants,
                    velocity: VelocityData) -> tuple[float, float]:
    """Measured vs bounded gap between full and annulus Heisenberg evolution.

    `a_collar` acts on the half-width collar (ascending vertex order). Both
    evolutions are integrated densely; the lhs is the spectral norm of the
    difference after embedding into the common volume.
    """
    X, lam = region(X), region(lam)
    collar = geometry.surface_collar(lattice, X, radius)
    if not collar:
        raise ValueError(f"half collar at radius {radius} is empty; no observable fits")
    expected = family.dim_of(collar)
    if a_collar.shape != (expected, expected):
        raise ValueError(f"observable of shape {a_collar.shape} does not act on the "
                         f"half collar {sorted(collar)} of dimension {expected}")
    patch = geometry.annulus(lattice, X, radius)
    constant = family.is_time_independent()
    full = integrate_cocycle(lambda u: assemble_hamiltonian(family, lam, u),
                             s, r, settings, kind="full", constant_generator=constant)
    annulus_traj = integrate_cocycle(lambda u: assemble_hamiltonian(family, patch, u),
                                     s, r, settings, kind="patch",
                                     constant_generator=constant)
    a_lam = embed(a_collar, collar, lam, family.site_dims)
    a_patch = embed(a_collar, collar, patch, family.site_dims)
    evolved_full = conjugate(full.final, a_lam, "heisenberg")
    evolved_patch = embed(conjugate(annulus_traj.final, a_patch, "heisenberg"),
                          patch, lam, family.site_dims)
    lhs = spectral_norm(evolved_full - evolved_patch)
    rhs = restriction_rhs(
        boundary_size=len(geometry.inner_boundary(lattice, X)),
        weight_norm=constants.weight_norm, damped_conv=constants.damped_conv,
        growth=constants.growth, dimension=constants.dimension,
        velocity=velocity.velocity, radius=radius,
        norm_a=spectral_norm(a_collar), dt=r - s, envelope_fn=profile.envelope)
    return lhs, rhs


def lieb_robinson_rhs(profile: DecayProfile, constants: DecayConstants,
                      velocity: VelocityData, lattice: Lattice, support_a, support_b,
                      norm_a: float, norm_b: float, dt: float) -> float:
    """Commutator bound: (2 |A| |B| / conv) min(1, g(dt) sum of damped weights).

    g(dt) = e^(v |dt|) - 1 for disjoint supports, e^(v |dt|) otherwise; the
    case split keys on the declared supports, not matrix sparsity.
    """
    support_a, support_b = region(support_a), region(support_b)
    pair_sum = sum(profile.damped_at(lattice.distance(x, y))
                   for x in support_a for y in support_b)
    dist = geometry.region_distance(lattice, support_a, support_b)
    g = _exp(velocity.velocity * abs(dt))
    if dist > 0:
        g -= 1.0
    return (2.0 * norm_a * norm_b / constants.damped_conv) * min(1.0, g * pair_sum)


def lieb_robinson_lhs(family: InteractionFamily, lam, support_a, a_matrix: np.ndarray,
                      support_b, b_matrix: np.ndarray, s: float, t: float,
                      settings: IntegratorSettings) -> float:
    """Norm of the commutator of the evolved observable A with B."""
    lam = region(lam)
    a_full = embed(a_matrix, support_a, lam, family.site_dims)
    b_full = embed(b_matrix, support_b, lam, family.site_dims)
    constant = family.is_time_independent()
    full = integrate_cocycle(lambda u: assemble_hamiltonian(family, lam, u),
                             s, t, settings, kind="full", constant_generator=constant)
    evolved = conjugate(full.final, a_full, "heisenberg")
    return spectral_norm(evolved @ b_full - b_full @ evolved)


def surface_norm_rhs(*, collar_size: int, damped_norm: float, coupling_norm: float,
                     radius: int, dimension: int, growth: float,
                     boundary_size: int) -> tuple[float, float]:
    """Tight and growth-constant forms of the surface-energy norm bound.

    Tight: |half collar| damped_norm coupling_norm.
    Growth form: growth damped_norm coupling_norm (R//2)^dim |bdry|.
    """
    half = radius // 2
    tight = collar_size * damped_norm * coupling_norm
    growth_form = (growth * damped_norm * coupling_norm
                   * float(half) ** dimension * boundary_size)
    return tight, growth_form


def surface_norm_sup(family: InteractionFamily, lattice: Lattice, X, radius: int,
                     lam, times: Sequence[float]) -> float:
    """Largest surface-energy norm over a grid of times."""
    return max(spectral_norm(surface_energy(family, lattice, X, radius, lam, t))
               for t in times)
