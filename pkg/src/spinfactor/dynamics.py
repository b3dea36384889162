"""Unitary cocycle integration, conjugation and dense operator norms.

Cocycles solve i dU/dt = H(t) U with U(s, s) = 1. The default stepper is the
midpoint-exponential rule: one Hermitian eigendecomposition per step, which
keeps every step exactly unitary up to roundoff and is exact for
time-independent generators. A classical rk4 stepper is available for
cross-checking. Surface cocycles co-evolve an auxiliary annulus cocycle on
half steps of the same grid so the conjugated surface energy is available at
every midpoint.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import geometry
from .geometry import Lattice, region
from .interactions import (
    InteractionFamily,
    assemble_hamiltonian,
    embed,
    reorder_factors,
    surface_energy,
)

KINDS = ("full", "patch", "surface_right", "surface_left")
SCHEMES = ("midpoint", "rk4")

DENSE_NORM_DIM = 4096


class UnitarityError(RuntimeError):
    """An integrated trajectory drifted off the unitary group."""


class PowerIterationError(RuntimeError):
    """Power iteration for the spectral norm failed to converge."""


@dataclass(frozen=True)
class IntegratorSettings:
    scheme: str = "midpoint"
    steps_per_unit_time: int = 256
    unitarity_tolerance: float = 1e-8
    reproject: bool = False

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; pick one of {SCHEMES}")
        if self.steps_per_unit_time < 16:
            raise ValueError("steps_per_unit_time must be at least 16")
        if self.unitarity_tolerance <= 0:
            raise ValueError("unitarity_tolerance must be positive")


@dataclass(eq=False)
class CocycleTrajectory:
    """A time-gridded unitary path with unitarity diagnostics.

    For forward kinds the k-th unitary is U(grid[k], s); for the left surface
    kind it is the adjoint surface unitary at the k-th grid time, with the
    grid running from t down to s. The first entry is always the identity.
    """

    kind: str
    s: float
    t: float
    grid: np.ndarray
    unitaries: list[np.ndarray]
    unitarity_drift: float
    step_count: int

    @property
    def final(self) -> np.ndarray:
        return self.unitaries[-1]


def hermitian_step(h: np.ndarray, dt: float) -> np.ndarray:
    """exp(-i h dt) for Hermitian h via eigendecomposition."""
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * dt * w)) @ v.conj().T


def polar_project(u: np.ndarray) -> np.ndarray:
    """Nearest unitary in Frobenius norm (polar factor)."""
    w, _, vh = np.linalg.svd(u)
    return w @ vh


def spectral_norm(a: np.ndarray, tol: float = 1e-10, max_iterations: int = 10000) -> float:
    """Largest singular value: dense SVD up to 4096, power iteration above."""
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    if max(a.shape) <= DENSE_NORM_DIM:
        return float(np.linalg.norm(a, 2))
    rng = np.random.default_rng(0)
    v = rng.standard_normal(a.shape[1]) + 1j * rng.standard_normal(a.shape[1])
    v /= np.linalg.norm(v)
    previous = 0.0
    for _ in range(max_iterations):
        w = a.conj().T @ (a @ v)
        estimate = float(np.real(np.vdot(v, w)))
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        if abs(estimate - previous) <= tol * max(estimate, 1.0):
            return math.sqrt(max(estimate, 0.0))
        previous = estimate
    raise PowerIterationError(
        f"power iteration did not converge within {max_iterations} iterations")


def conjugate(u: np.ndarray, a: np.ndarray, direction: str = "heisenberg") -> np.ndarray:
    """Unitary conjugation: "heisenberg" gives U* A U, "adjoint" gives U A U*."""
    if u.shape != a.shape:
        raise ValueError(f"dimension mismatch: unitary {u.shape} vs operator {a.shape}")
    if direction == "heisenberg":
        return u.conj().T @ a @ u
    if direction == "adjoint":
        return u @ a @ u.conj().T
    raise ValueError(f"unknown direction {direction!r}")


def _drift(u: np.ndarray) -> float:
    return float(np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0]), 2))


def _finish(kind: str, s: float, t: float, grid: np.ndarray, unitaries: list[np.ndarray],
            drift: float, steps: int, settings: IntegratorSettings) -> CocycleTrajectory:
    if drift > settings.unitarity_tolerance:
        raise UnitarityError(
            f"unitarity drift {drift:.3e} exceeds tolerance "
            f"{settings.unitarity_tolerance:.3e}; use smaller steps "
            f"(larger steps_per_unit_time) or enable reprojection")
    grid = np.asarray(grid, dtype=float)
    grid.setflags(write=False)
    return CocycleTrajectory(kind, s, t, grid, unitaries, drift, steps)


def _identity_trajectory(kind: str, s: float, dim: int) -> CocycleTrajectory:
    grid = np.array([s], dtype=float)
    grid.setflags(write=False)
    return CocycleTrajectory(kind, s, s, grid, [np.eye(dim, dtype=complex)], 0.0, 0)


def integrate_cocycle(generator, s: float, t: float,
                      settings: IntegratorSettings = IntegratorSettings(),
                      kind: str = "full",
                      constant_generator: bool = False) -> CocycleTrajectory:
    """Integrate i dU/dt = H(t) U from s to t (either direction).

    `generator` maps a time to a Hermitian matrix. With
    `constant_generator=True` it is evaluated once and the one-step map is
    reused, which is bit-identical to re-evaluating a constant generator.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown trajectory kind {kind!r}")
    if t == s:
        return _identity_trajectory(kind, s, generator(s).shape[0])
    steps = max(1, math.ceil(abs(t - s) * settings.steps_per_unit_time))
    delta = (t - s) / steps
    grid = s + delta * np.arange(steps + 1)
    grid[-1] = t
    dim = generator(s + delta / 2).shape[0]
    u = np.eye(dim, dtype=complex)
    unitaries = [u]
    drift = 0.0
    cached_step = None
    if constant_generator and settings.scheme == "midpoint":
        cached_step = hermitian_step(generator(s + delta / 2), delta)
    cached_h = generator(s) if constant_generator else None
    for k in range(steps):
        u0 = s + k * delta
        if settings.scheme == "midpoint":
            step = cached_step if cached_step is not None else hermitian_step(
                generator(u0 + delta / 2), delta)
            u = step @ u
        else:
            h0 = cached_h if cached_h is not None else generator(u0)
            hm = cached_h if cached_h is not None else generator(u0 + delta / 2)
            h1 = cached_h if cached_h is not None else generator(u0 + delta)
            k1 = -1j * (h0 @ u)
            k2 = -1j * (hm @ (u + 0.5 * delta * k1))
            k3 = -1j * (hm @ (u + 0.5 * delta * k2))
            k4 = -1j * (h1 @ (u + delta * k3))
            u = u + (delta / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if settings.reproject:
            u = polar_project(u)
        drift = max(drift, _drift(u))
        unitaries.append(u)
    return _finish(kind, s, t, grid, unitaries, drift, steps, settings)


def integrate_surface_cocycle(family: InteractionFamily, lattice: Lattice, X,
                              radius: int, lam, s: float, t: float,
                              side: str = "right",
                              settings: IntegratorSettings = IntegratorSettings()
                              ) -> CocycleTrajectory:
    """Integrate the surface cocycle driven by the conjugated surface energy.

    Right side: -i d/dt U~(t, s) = tau(t, s)[S(t)] U~(t, s) with U~(s, s) = 1,
    where tau conjugates by the annulus cocycle; the one-step map is
    exp(+i tau[S] dt). Left side: the adjoint surface unitary solves the
    analogous equation in s at fixed t and is integrated from t down to s
    with the same stepper and a negated step. The annulus cocycle is
    co-evolved on half steps of the same grid so the conjugation is available
    at every midpoint (and at the segment ends for rk4).
    """
    if side not in ("right", "left"):
        raise ValueError(f"side must be 'right' or 'left', got {side!r}")
    X, lam = region(X), region(lam)
    shells = geometry.shell_profile(lattice, X)
    if not shells.monotone:
        raise ValueError(f"shell sizes {shells.sizes} are not non-increasing: "
                         "the factorization hypothesis on X fails")
    if not geometry.fattening(lattice, X, radius) <= lam:
        raise ValueError(f"Lambda too small: the {radius}-fattening of X must fit inside it")
    patch = geometry.annulus(lattice, X, radius)
    kind = f"surface_{side}"
    dim = family.dim_of(patch)
    if t == s:
        return _identity_trajectory(kind, s, dim)

    def surf(r: float) -> np.ndarray:
        return surface_energy(family, lattice, X, radius, lam, r)

    def patch_h(r: float) -> np.ndarray:
        return assemble_hamiltonian(family, patch, r)

    constant = family.is_time_independent()
    steps = max(1, math.ceil(abs(t - s) * settings.steps_per_unit_time))
    if side == "right":
        start, delta = s, (t - s) / steps
        # aux = annulus cocycle U_patch(u, s), advanced by left multiplication
        def advance(aux, half_step):
            return half_step @ aux

        def conj_surface(aux, r):
            return aux.conj().T @ surf(r) @ aux
    else:
        start, delta = t, (s - t) / steps
        # aux = annulus cocycle U_patch(t, u); d/du aux = i aux H_patch(u),
        # so each half step multiplies exp(+i H dt) = hermitian_step(H, -dt)
        # from the right.
        def advance(aux, half_step):
            return aux @ half_step

        def conj_surface(aux, r):
            return aux @ surf(r) @ aux.conj().T

    grid = start + delta * np.arange(steps + 1)
    grid[-1] = s if side == "left" else t
    half_sign = 1.0 if side == "right" else -1.0
    cached_half = hermitian_step(patch_h(start), half_sign * delta / 2) if constant else None
    cached_surf = surf(start) if constant else None

    aux = np.eye(dim, dtype=complex)
    u = np.eye(dim, dtype=complex)
    unitaries = [u]
    drift = 0.0
    for k in range(steps):
        u0 = start + k * delta
        mid = u0 + delta / 2
        half0 = cached_half if cached_half is not None else hermitian_step(
            patch_h(u0 + delta / 4), half_sign * delta / 2)
        if settings.scheme == "midpoint":
            aux = advance(aux, half0)
            s_mid = cached_surf if cached_surf is not None else surf(mid)
            g = aux.conj().T @ s_mid @ aux if side == "right" else aux @ s_mid @ aux.conj().T
            u = hermitian_step(-g, delta) @ u
            half1 = cached_half if cached_half is not None else hermitian_step(
                patch_h(u0 + 3 * delta / 4), half_sign * delta / 2)
            aux = advance(aux, half1)
        else:
            g0 = conj_surface(aux, u0)
            aux = advance(aux, half0)
            gm = conj_surface(aux, mid)
            half1 = cached_half if cached_half is not None else hermitian_step(
                patch_h(u0 + 3 * delta / 4), half_sign * delta / 2)
            aux = advance(aux, half1)
            g1 = conj_surface(aux, u0 + delta)
            # dU/du = +i G(u) U
            k1 = 1j * (g0 @ u)
            k2 = 1j * (gm @ (u + 0.5 * delta * k1))
            k3 = 1j * (gm @ (u + 0.5 * delta * k2))
            k4 = 1j * (g1 @ (u + delta * k3))
            u = u + (delta / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if settings.reproject:
            u = polar_project(u)
        drift = max(drift, _drift(u))
        unitaries.append(u)
    return _finish(kind, s, t, grid, unitaries, drift, steps, settings)


def block_product(family: InteractionFamily, x_final: np.ndarray,
                  rest_final: np.ndarray, X, lam) -> np.ndarray:
    """Tensor the two block unitaries and reorder factors to ascending order."""
    X, lam = region(X), region(lam)
    order = sorted(X) + sorted(lam - X)
    return reorder_factors(np.kron(x_final, rest_final), order, sorted(lam),
                           family.site_dims)


@dataclass(frozen=True)
class FactorizationResult:
    """Measured factorization error with its unitarity-equivalent form."""

    side: str
    radius: int
    s: float
    t: float
    error: float
    error_by_unitarity: float
    unitarity_drift: float
    step_count: int
    drifts: dict[str, float]


def factorization_error(family: InteractionFamily, lattice: Lattice, X, radius: int,
                        lam, s: float, t: float, side: str = "right",
                        settings: IntegratorSettings = IntegratorSettings()
                        ) -> FactorizationResult:
    """Spectral-norm distance between the full cocycle and its factorized form.

    Right side compares U(lam) against (U(X) tensor U(rest)) times the
    adjoint of the right surface unitary; left side puts the adjoint of the
    left surface unitary in front of the tensor product. The equivalent
    unitarity form of the error is computed as a cross-check and must agree
    to 1e-10.
    """
    X, lam = region(X), region(lam)
    if radius < 1:
        raise ValueError("collar radius R must be at least 1")
    shells = geometry.shell_profile(lattice, X)
    if not shells.monotone:
        raise ValueError(f"shell sizes {shells.sizes} are not non-increasing: "
                         "the factorization hypothesis on X fails")
    if not geometry.fattening(lattice, X, radius) <= lam:
        raise ValueError(f"Lambda too small: the {radius}-fattening of X must fit inside it")
    rest = lam - X
    constant = family.is_time_independent()
    full = integrate_cocycle(lambda r: assemble_hamiltonian(family, lam, r),
                             s, t, settings, kind="full", constant_generator=constant)
    block_x = integrate_cocycle(lambda r: assemble_hamiltonian(family, X, r),
                                s, t, settings, kind="patch", constant_generator=constant)
    block_rest = integrate_cocycle(lambda r: assemble_hamiltonian(family, rest, r),
                                   s, t, settings, kind="patch", constant_generator=constant)
    product = block_product(family, block_x.final, block_rest.final, X, lam)
    surface = integrate_surface_cocycle(family, lattice, X, radius, lam, s, t,
                                        side, settings)
    # The surface unitary acts on the annulus factors only; embed it into the
    # full volume. The right trajectory carries the surface unitary itself,
    # so the correction factor is its adjoint; the left trajectory integrates
    # the adjoint directly.
    patch = geometry.annulus(lattice, X, radius)
    surface_full = embed(surface.final, patch, lam, family.site_dims)
    if side == "right":
        correction = surface_full.conj().T
        approx = product @ correction
        residual = full.final.conj().T @ product
    else:
        correction = surface_full
        approx = correction @ product
        residual = product @ full.final.conj().T
    error = spectral_norm(full.final - approx)
    error_alt = spectral_norm(residual.conj().T - correction)
    if abs(error - error_alt) > 1e-10:
        raise RuntimeError(
            f"unitarity-equivalent error forms disagree: {error:.12e} vs {error_alt:.12e}")
    drifts = {
        "full": full.unitarity_drift,
        "block_x": block_x.unitarity_drift,
        "block_rest": block_rest.unitarity_drift,
        "surface": surface.unitarity_drift,
    }
    return FactorizationResult(side=side, radius=radius, s=s, t=t, error=error,
                               error_by_unitarity=error_alt,
                               unitarity_drift=max(drifts.values()),
                               step_count=full.step_count, drifts=drifts)


def dump_trajectory(trajectory: CocycleTrajectory, directory) -> Path:
    """Write a trajectory as packed little-endian complex doubles plus a manifest.

    Unitaries are concatenated row-major with interleaved real/imaginary
    8-byte floats; the manifest records grid, kind and drift.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    data = np.stack(trajectory.unitaries).astype("<c16")
    (directory / "unitaries.bin").write_bytes(data.tobytes(order="C"))
    manifest = {
        "kind": trajectory.kind,
        "s": trajectory.s,
        "t": trajectory.t,
        "dim": int(trajectory.unitaries[0].shape[0]),
        "count": len(trajectory.unitaries),
        "step_count": trajectory.step_count,
        "unitarity_drift": trajectory.unitarity_drift,
        "grid": [float(g) for g in trajectory.grid],
        "layout": "row-major, interleaved real/imaginary little-endian float64",
        "file": "unitaries.bin",
    }
    with open(directory / "manifest.json", "w", encoding="utf-8") as fp:
        json.dump(manifest, fp, indent=2)
    return directory


def load_trajectory(directory) -> CocycleTrajectory:
    directory = Path(directory)
    with open(directory / "manifest.json", encoding="utf-8") as fp:
        manifest = json.load(fp)
    raw = (directory / manifest["file"]).read_bytes()
    dim, count = manifest["dim"], manifest["count"]
    data = np.frombuffer(raw, dtype="<c16").reshape(count, dim, dim)
    grid = np.array(manifest["grid"], dtype=float)
    grid.setflags(write=False)
    return CocycleTrajectory(manifest["kind"], manifest["s"], manifest["t"], grid,
                             [np.array(m) for m in data],
                             manifest["unitarity_drift"], manifest["step_count"])
