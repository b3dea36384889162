"""Experiment configuration: a single JSON file, fully validated at load.

The file is a key-value tree with the sections documented in the README
(lattice, model, decay, region, sweep, integrator, observables, output).
Loading builds the lattice, the interaction family and the decay profile,
computes all lattice constants, applies overrides and checks every
hypothesis the sweeps rely on; each failure names the offending key and the
violated requirement. No environment variable affects any numeric result.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import geometry
from .geometry import Lattice, Region, region
from .decay import (
    DecayConstants,
    DecayProfile,
    ExponentialEnvelope,
    PowerLawWeight,
    StretchedExponentialEnvelope,
    lattice_constants,
    validate_profile,
)
from .dynamics import IntegratorSettings
from .interactions import (
    HILBERT_DIM_CAP,
    PAULI,
    Constant,
    InteractionFamily,
    InteractionTerm,
    Ramp,
    Sinusoid,
    VelocityData,
    coupling_norm,
    heisenberg,
    long_range_zz,
    tfim,
    uniform_sites,
)


class ConfigError(ValueError):
    """A configuration file failed validation; the message names the key."""


@dataclass(frozen=True)
class Observable:
    site: int
    name: str
    matrix: np.ndarray


@dataclass(frozen=True)
class ExperimentConfig:
    lattice: Lattice
    family: InteractionFamily
    profile: DecayProfile
    constants: DecayConstants
    velocity: VelocityData
    cut: Region
    sweep_radii: tuple[int, ...]
    sweep_dts: tuple[float, ...]
    sides: tuple[str, ...]
    base_time: float
    settings: IntegratorSettings
    observable_a: Observable | None
    observables_b: tuple[Observable, ...]
    output_dir: str
    seed: int
    r_max: int


_TOP_KEYS = {"lattice", "site_dim", "site_dims", "model", "horizon", "decay",
             "dimension", "region", "sweep", "integrator", "observables",
             "output_dir", "seed"}


def _require(mapping: dict, key: str, section: str):
    if key not in mapping:
        raise ConfigError(f"{section}: missing required key {key!r}")
    return mapping[key]


def _build_lattice(spec: dict) -> Lattice:
    kind = _require(spec, "kind", "lattice")
    if kind == "path":
        return geometry.path(int(_require(spec, "n", "lattice")))
    if kind == "cycle":
        return geometry.cycle(int(_require(spec, "n", "lattice")))
    if kind == "grid":
        return geometry.grid(int(_require(spec, "width", "lattice")),
                             int(_require(spec, "height", "lattice")))
    if kind == "edges":
        return Lattice(int(_require(spec, "n", "lattice")),
                       [tuple(e) for e in _require(spec, "edges", "lattice")])
    raise ConfigError(f"lattice.kind: unknown generator {kind!r}")


def _parse_matrix(rows, where: str) -> np.ndarray:
    try:
        arr = np.array([[complex(entry[0], entry[1]) for entry in row] for row in rows])
    except (TypeError, IndexError) as exc:
        raise ConfigError(f"{where}: matrices are rows of [re, im] pairs ({exc})")
    return arr


def _parse_coefficient(spec, where: str):
    if spec is None:
        return Constant(1.0)
    family = spec.get("family", "constant")
    c = float(spec.get("c", 1.0))
    if family == "constant":
        return Constant(c)
    if family == "ramp":
        return Ramp(c)
    if family == "sinusoid":
        return Sinusoid(c, float(spec.get("omega", 1.0)), float(spec.get("phase", 0.0)))
    raise ConfigError(f"{where}: unknown coefficient family {family!r}")


def _build_family(model: dict, lattice: Lattice, site_dims: dict[int, int],
                  horizon: float) -> InteractionFamily:
    kind = _require(model, "kind", "model")
    profile = model.get("time_profile")
    if kind == "tfim":
        return tfim(lattice, float(_require(model, "h", "model")),
                    float(_require(model, "J", "model")), horizon, profile)
    if kind == "heisenberg":
        return heisenberg(lattice, float(_require(model, "Jx", "model")),
                          float(_require(model, "Jy", "model")),
                          float(_require(model, "Jz", "model")),
                          float(model.get("h", 0.0)), horizon, profile)
    if kind == "long_range_zz":
        return long_range_zz(lattice, float(_require(model, "J", "model")),
                             float(_require(model, "alpha", "model")),
                             float(model.get("h", 0.0)), horizon, profile)
    if kind == "custom":
        terms = []
        for i, spec in enumerate(_require(model, "terms", "model")):
            support = region(_require(spec, "support", f"model.terms[{i}]"))
            matrix = _parse_matrix(_require(spec, "matrix", f"model.terms[{i}]"),
                                   f"model.terms[{i}].matrix")
            coeff = _parse_coefficient(spec.get("coefficient"), f"model.terms[{i}]")
            try:
                terms.append(InteractionTerm(support, matrix, coeff))
            except ValueError as exc:
                raise ConfigError(f"model.terms[{i}]: {exc}")
        return InteractionFamily(tuple(terms), site_dims, horizon)
    raise ConfigError(f"model.kind: unknown model {kind!r}")


def _build_profile(decay_spec: dict) -> DecayProfile:
    weight_spec = _require(decay_spec, "F", "decay")
    family = _require(weight_spec, "family", "decay.F")
    if family != "power_law":
        raise ConfigError(f"decay.F.family: unknown weight family {family!r}")
    weight = PowerLawWeight(float(_require(weight_spec, "p", "decay.F")))
    env_spec = _require(decay_spec, "xi", "decay")
    family = _require(env_spec, "family", "decay.xi")
    if family == "exponential":
        envelope = ExponentialEnvelope(float(_require(env_spec, "a", "decay.xi")))
    elif family == "stretched_exponential":
        envelope = StretchedExponentialEnvelope(
            float(_require(env_spec, "a", "decay.xi")),
            float(_require(env_spec, "theta", "decay.xi")))
    else:
        raise ConfigError(f"decay.xi.family: unknown envelope family {family!r}")
    return DecayProfile(weight, envelope)


def _parse_observable(spec: dict, site: int, lattice: Lattice, where: str) -> Observable:
    name = spec.get("op", "sz")
    if name not in PAULI:
        raise ConfigError(f"{where}.op: unknown single-site operator {name!r}")
    if not 0 <= site < lattice.vertex_count:
        raise ConfigError(f"{where}.site: site {site} outside the lattice")
    return Observable(site=site, name=name, matrix=PAULI[name])


def load_config(path) -> ExperimentConfig:
    """Parse and fully validate an experiment configuration file."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})")
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be an object")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown top-level key(s): {sorted(unknown)}")

    lattice = _build_lattice(_require(raw, "lattice", "config"))

    if "site_dims" in raw:
        site_dims = {int(k): int(v) for k, v in raw["site_dims"].items()}
        missing = lattice.vertices - set(site_dims)
        if missing:
            raise ConfigError(f"site_dims: missing dimensions for sites {sorted(missing)}")
    else:
        site_dims = uniform_sites(lattice, int(raw.get("site_dim", 2)))
    total_dim = 1
    for v in sorted(site_dims):
        total_dim *= site_dims[v]
        if total_dim > HILBERT_DIM_CAP:
            raise ConfigError(
                f"site_dim: total Hilbert dimension exceeds the dense cap "
                f"{HILBERT_DIM_CAP}; reduce the lattice or the site dimensions")

    horizon = float(raw.get("horizon", 1.0))
    if horizon <= 0:
        raise ConfigError("horizon: must be positive")
    try:
        family = _build_family(_require(raw, "model", "config"), lattice,
                               site_dims, horizon)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"model: {exc}")

    decay_spec = _require(raw, "decay", "config")
    profile = _build_profile(decay_spec)
    r_max = int(decay_spec.get("r_max", 20))
    report = validate_profile(profile, r_max)
    if not report.ok:
        raise ConfigError(f"decay.xi: envelope fails the {report.failed_condition} "
                          f"check on the grid 0..{r_max} (violations: "
                          f"{list(report.violations)[:3]})")

    dimension = int(raw.get("dimension", 1))
    if dimension < 1:
        raise ConfigError("dimension: must be a positive integer")

    cut = region(_require(raw, "region", "config"))
    if not cut:
        raise ConfigError("region: X is empty; the cut is undefined")
    if not cut <= lattice.vertices:
        raise ConfigError(f"region: sites {sorted(cut - lattice.vertices)} outside the lattice")
    if cut == lattice.vertices:
        raise ConfigError("region: X covers the whole lattice; the boundary is undefined")
    shells = geometry.shell_profile(lattice, cut)
    if not shells.monotone:
        raise ConfigError(f"region: shell sizes {shells.sizes} are not non-increasing; "
                          "the factorization hypothesis on X fails")

    sweep = _require(raw, "sweep", "config")
    radii = tuple(int(r) for r in _require(sweep, "R", "sweep"))
    if not radii:
        raise ConfigError("sweep.R: grid must be non-empty")
    if any(r < 1 for r in radii):
        raise ConfigError("sweep.R: collar radii must be at least 1")
    dts = tuple(float(d) for d in _require(sweep, "t_minus_s", "sweep"))
    if not dts:
        raise ConfigError("sweep.t_minus_s: grid must be non-empty")
    if any(d < 0 for d in dts):
        raise ConfigError("sweep.t_minus_s: time spans must be non-negative")
    if any(d > 2 * horizon for d in dts):
        raise ConfigError("sweep.t_minus_s: time spans must not exceed twice the horizon")
    side = sweep.get("side", "both")
    if side not in ("right", "left", "both"):
        raise ConfigError(f"sweep.side: must be right, left or both, got {side!r}")
    sides = ("right", "left") if side == "both" else (side,)
    base_time = float(sweep.get("s", 0.0))
    if abs(base_time) > horizon:
        raise ConfigError("sweep.s: base time outside the horizon")
    if any(abs(base_time + d) > horizon for d in dts):
        raise ConfigError("sweep.t_minus_s: s + span leaves the horizon [-T, T]")

    r_top = max(radii)
    try:
        settings = IntegratorSettings(**raw.get("integrator", {}))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"integrator: {exc}")

    constants = lattice_constants(profile, lattice)
    growth = geometry.fat_boundary_constant(lattice, cut, r_top, dimension)
    constants = constants.with_growth(growth, dimension)
    overrides = decay_spec.get("overrides", {})
    if overrides:
        try:
            constants = constants.with_overrides(**{k: float(v) for k, v in overrides.items()})
        except ValueError as exc:
            raise ConfigError(f"decay.overrides: {exc}")
    velocity = coupling_norm(family, profile, lattice, constants)

    observable_a = None
    observables_b: tuple[Observable, ...] = ()
    if "observables" in raw:
        obs = raw["observables"]
        a_spec = _require(obs, "A", "observables")
        observable_a = _parse_observable(a_spec, int(_require(a_spec, "site", "observables.A")),
                                         lattice, "observables.A")
        b_spec = _require(obs, "B", "observables")
        sites = b_spec.get("sites")
        if sites is None:
            sites = [_require(b_spec, "site", "observables.B")]
        observables_b = tuple(_parse_observable(b_spec, int(s), lattice, "observables.B")
                              for s in sites)

    return ExperimentConfig(
        lattice=lattice, family=family, profile=profile, constants=constants,
        velocity=velocity, cut=cut, sweep_radii=radii, sweep_dts=dts, sides=sides,
        base_time=base_time, settings=settings, observable_a=observable_a,
        observables_b=observables_b, output_dir=str(raw.get("output_dir", "out")),
        seed=int(raw.get("seed", 0)), r_max=r_max)
