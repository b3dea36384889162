"""Experiment orchestration: sweeps, report assembly and file emission.

Sweeps are deterministic given a config: cells are visited in a fixed order
and nothing in the physics pipeline draws random numbers. Wall-clock timings
go to the logger only, never into emitted files, so reruns of the same
config are byte-identical.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import geometry
from .bounds import (
    BoundReport,
    defect_rhs,
    defect_sup,
    factorization_rhs,
    kappa_constant,
    lieb_robinson_lhs,
    lieb_robinson_rhs,
    make_report,
    restriction_gap,
    surface_norm_rhs,
    surface_norm_sup,
)
from .config import ExperimentConfig
from .decay import tail_sum
from .dynamics import factorization_error
from .interactions import embed

log = logging.getLogger("spinfactor.harness")

# Grids for sup-over-time measurements. The defect is measured on the swept
# interval, the surface norm over the whole horizon.
DEFECT_TIME_SAMPLES = 9
SURFACE_TIME_SAMPLES = 21

FACTORIZATION_COLUMNS = (
    "R", "t_minus_s", "side", "measured_error", "error_by_unitarity",
    "factorization_rhs", "factorization_satisfied",
    "defect_lhs", "defect_rhs", "defect_satisfied",
    "restriction_lhs", "restriction_rhs", "restriction_satisfied",
    "surface_norm_lhs", "surface_norm_tight_rhs", "surface_norm_growth_rhs",
    "surface_norm_satisfied", "unitarity_drift", "steps",
)

LIEB_ROBINSON_COLUMNS = (
    "separation", "t_minus_s", "site_a", "site_b",
    "commutator_norm", "lieb_robinson_rhs", "satisfied",
)


@dataclass(eq=True)
class FactorizationCell:
    radius: int
    dt: float
    side: str
    measured_error: float
    error_by_unitarity: float
    unitarity_drift: float
    steps: int
    reports: list[BoundReport] = field(default_factory=list)

    def report(self, name: str) -> BoundReport | None:
        for rep in self.reports:
            if rep.name == name:
                return rep
        return None

    @property
    def satisfied(self) -> bool:
        return all(rep.satisfied for rep in self.reports)

    def as_dict(self) -> dict:
        return {
            "R": self.radius,
            "t_minus_s": self.dt,
            "side": self.side,
            "measured_error": self.measured_error,
            "error_by_unitarity": self.error_by_unitarity,
            "unitarity_drift": self.unitarity_drift,
            "steps": self.steps,
            "reports": [rep.as_dict() for rep in self.reports],
        }

    @staticmethod
    def from_dict(d: dict) -> "FactorizationCell":
        return FactorizationCell(
            radius=d["R"], dt=d["t_minus_s"], side=d["side"],
            measured_error=d["measured_error"],
            error_by_unitarity=d["error_by_unitarity"],
            unitarity_drift=d["unitarity_drift"], steps=d["steps"],
            reports=[BoundReport.from_dict(r) for r in d["reports"]])


@dataclass(eq=True)
class LiebRobinsonCell:
    separation: int
    dt: float
    site_a: int
    site_b: int
    reports: list[BoundReport] = field(default_factory=list)

    def report(self, name: str) -> BoundReport | None:
        for rep in self.reports:
            if rep.name == name:
                return rep
        return None

    @property
    def satisfied(self) -> bool:
        return all(rep.satisfied for rep in self.reports)

    def as_dict(self) -> dict:
        return {
            "separation": self.separation,
            "t_minus_s": self.dt,
            "site_a": self.site_a,
            "site_b": self.site_b,
            "reports": [rep.as_dict() for rep in self.reports],
        }

    @staticmethod
    def from_dict(d: dict) -> "LiebRobinsonCell":
        return LiebRobinsonCell(
            separation=d["separation"], dt=d["t_minus_s"],
            site_a=d["site_a"], site_b=d["site_b"],
            reports=[BoundReport.from_dict(r) for r in d["reports"]])


@dataclass(eq=True)
class ExperimentReport:
    kind: str  # "factorization" | "lieb_robinson"
    constants: dict
    cells: list
    all_satisfied: bool

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "constants": dict(self.constants),
            "cells": [cell.as_dict() for cell in self.cells],
            "all_satisfied": self.all_satisfied,
        }

    @staticmethod
    def from_dict(d: dict) -> "ExperimentReport":
        loader = (FactorizationCell.from_dict if d["kind"] == "factorization"
                  else LiebRobinsonCell.from_dict)
        return ExperimentReport(kind=d["kind"], constants=dict(d["constants"]),
                                cells=[loader(c) for c in d["cells"]],
                                all_satisfied=d["all_satisfied"])


def _constants_block(cfg: ExperimentConfig, boundary_size: int) -> dict:
    block = cfg.constants.as_dict()
    block["coupling_norm"] = cfg.velocity.coupling_norm
    block["velocity"] = cfg.velocity.velocity
    block["boundary_size"] = boundary_size
    block["cut"] = sorted(cfg.cut)
    block["seed"] = cfg.seed
    return block


def run_factorization_sweep(cfg: ExperimentConfig) -> ExperimentReport:
    """Measure the factorization error and every bound on the config's grid."""
    lattice, family, profile = cfg.lattice, cfg.family, cfg.profile
    lam = lattice.vertices
    cut = cfg.cut
    boundary = geometry.inner_boundary(lattice, cut)
    boundary_size = len(boundary)
    constants = cfg.constants
    velocity = cfg.velocity
    horizon = family.horizon

    def tail(radius: int) -> float:
        return tail_sum(profile, radius).value

    cells: list[FactorizationCell] = []
    surface_times = np.linspace(-horizon, horizon, SURFACE_TIME_SAMPLES)
    base_inputs = {
        "boundary_size": boundary_size,
        "coupling_norm": velocity.coupling_norm,
        "weight_norm": constants.weight_norm,
        "damped_norm": constants.damped_norm,
        "damped_conv": constants.damped_conv,
        "growth": constants.growth,
        "dimension": constants.dimension,
        "velocity": velocity.velocity,
        "kappa": kappa_constant(constants),
        "provenance": dict(constants.provenance),
    }
    for radius in cfg.sweep_radii:
        collar = geometry.surface_collar(lattice, cut, radius)
        collar_size = len(collar)
        snorm_lhs = surface_norm_sup(family, lattice, cut, radius, lam, surface_times)
        snorm_tight, snorm_growth = surface_norm_rhs(
            collar_size=collar_size, damped_norm=constants.damped_norm,
            coupling_norm=velocity.coupling_norm, radius=radius,
            dimension=constants.dimension, growth=constants.growth,
            boundary_size=boundary_size)
        cut_site = max(boundary)
        for dt in cfg.sweep_dts:
            t = cfg.base_time + dt
            defect_times = np.linspace(cfg.base_time, t, DEFECT_TIME_SAMPLES)
            d_lhs = defect_sup(family, lattice, cut, radius, lam, defect_times)
            d_rhs = defect_rhs(boundary_size=boundary_size,
                               coupling_norm=velocity.coupling_norm,
                               weight_norm=constants.weight_norm,
                               radius=radius, tail_fn=tail)
            restriction = None
            if collar:
                a_collar = embed(np.array([[1, 0], [0, -1]], dtype=complex),
                                 {cut_site}, collar, family.site_dims)
                r_lhs, r_rhs = restriction_gap(
                    family, lattice, cut, radius, lam, a_collar, cfg.base_time, t,
                    cfg.settings, profile, constants, velocity)
                restriction = (r_lhs, r_rhs)
            f_rhs = factorization_rhs(
                boundary_size=boundary_size, coupling_norm=velocity.coupling_norm,
                weight_norm=constants.weight_norm, damped_norm=constants.damped_norm,
                damped_conv=constants.damped_conv, growth=constants.growth,
                dimension=constants.dimension, velocity=velocity.velocity,
                radius=radius, dt=dt, tail_fn=tail, envelope_fn=profile.envelope)
            half = radius // 2
            cell_inputs = dict(base_inputs)
            cell_inputs.update({
                "R": radius, "t_minus_s": dt,
                "tail_at_half_R": tail(half),
                "envelope_at_half_R": profile.envelope(float(half)),
                "collar_size": collar_size,
            })
            for side in cfg.sides:
                started = time.perf_counter()
                result = factorization_error(family, lattice, cut, radius, lam,
                                             cfg.base_time, t, side, cfg.settings)
                reports = [
                    make_report("factorization", result.error, f_rhs,
                                dict(cell_inputs), rhs_cap=2.0),
                    make_report("generator_defect", d_lhs, d_rhs, dict(cell_inputs)),
                    make_report("surface_norm", snorm_lhs, snorm_tight,
                                {**cell_inputs, "growth_form_rhs": snorm_growth}),
                ]
                if restriction is not None:
                    reports.append(make_report(
                        "restriction", restriction[0], restriction[1],
                        {**cell_inputs, "observable_site": cut_site}))
                cells.append(FactorizationCell(
                    radius=radius, dt=dt, side=side,
                    measured_error=result.error,
                    error_by_unitarity=result.error_by_unitarity,
                    unitarity_drift=result.unitarity_drift,
                    steps=result.step_count, reports=reports))
                log.info("cell R=%d dt=%.3g side=%s: error=%.3e rhs=%.3e (%.2fs)",
                         radius, dt, side, result.error, f_rhs,
                         time.perf_counter() - started)
    all_ok = all(cell.satisfied for cell in cells)
    return ExperimentReport("factorization", _constants_block(cfg, boundary_size),
                            cells, all_ok)


def run_lr_sweep(cfg: ExperimentConfig) -> ExperimentReport:
    """Commutator norm against the propagation bound per (separation, span)."""
    if cfg.observable_a is None or not cfg.observables_b:
        from .config import ConfigError
        raise ConfigError("observables: the propagation sweep needs declared A and B")
    lattice, family, profile = cfg.lattice, cfg.family, cfg.profile
    lam = lattice.vertices
    a = cfg.observable_a
    boundary_size = len(geometry.inner_boundary(lattice, cfg.cut))
    cells: list[LiebRobinsonCell] = []
    for b in cfg.observables_b:
        separation = lattice.distance(a.site, b.site)
        for dt in cfg.sweep_dts:
            started = time.perf_counter()
            t = cfg.base_time + dt
            lhs = lieb_robinson_lhs(family, lam, {a.site}, a.matrix, {b.site},
                                    b.matrix, cfg.base_time, t, cfg.settings)
            rhs = lieb_robinson_rhs(profile, cfg.constants, cfg.velocity, lattice,
                                    {a.site}, {b.site}, 1.0, 1.0, dt)
            inputs = {
                "site_a": a.site, "site_b": b.site, "op_a": a.name, "op_b": b.name,
                "separation": separation, "t_minus_s": dt,
                "damped_conv": cfg.constants.damped_conv,
                "velocity": cfg.velocity.velocity,
                "provenance": dict(cfg.constants.provenance),
            }
            cells.append(LiebRobinsonCell(
                separation=separation, dt=dt, site_a=a.site, site_b=b.site,
                reports=[make_report("lieb_robinson", lhs, rhs, inputs)]))
            log.info("lr cell sep=%d dt=%.3g: lhs=%.3e rhs=%.3e (%.2fs)",
                     separation, dt, lhs, rhs, time.perf_counter() - started)
    all_ok = all(cell.satisfied for cell in cells)
    return ExperimentReport("lieb_robinson", _constants_block(cfg, boundary_size),
                            cells, all_ok)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _factorization_row(cell: FactorizationCell) -> list[str]:
    fact = cell.report("factorization")
    defect = cell.report("generator_defect")
    restriction = cell.report("restriction")
    snorm = cell.report("surface_norm")
    values = [
        cell.radius, cell.dt, cell.side, cell.measured_error,
        cell.error_by_unitarity,
        fact.rhs if fact else None, fact.satisfied if fact else None,
        defect.lhs if defect else None, defect.rhs if defect else None,
        defect.satisfied if defect else None,
        restriction.lhs if restriction else None,
        restriction.rhs if restriction else None,
        restriction.satisfied if restriction else None,
        snorm.lhs if snorm else None, snorm.rhs if snorm else None,
        snorm.inputs.get("growth_form_rhs") if snorm else None,
        snorm.satisfied if snorm else None,
        cell.unitarity_drift, cell.steps,
    ]
    return [_fmt(v) for v in values]


def _lr_row(cell: LiebRobinsonCell) -> list[str]:
    rep = cell.report("lieb_robinson")
    values = [cell.separation, cell.dt, cell.site_a, cell.site_b,
              rep.lhs if rep else None, rep.rhs if rep else None,
              rep.satisfied if rep else None]
    return [_fmt(v) for v in values]


def write_csv(report: ExperimentReport, path: Path) -> None:
    if report.kind == "factorization":
        columns, row_of = FACTORIZATION_COLUMNS, _factorization_row
    else:
        columns, row_of = LIEB_ROBINSON_COLUMNS, _lr_row
    with open(path, "w", newline="", encoding="utf-8") as fp:
        writer = csv.writer(fp, lineterminator="\n")
        writer.writerow(columns)
        for cell in report.cells:
            writer.writerow(row_of(cell))


def write_json(report: ExperimentReport, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fp:
        json.dump(report.as_dict(), fp, indent=2)
        fp.write("\n")


def load_report(path) -> ExperimentReport:
    with open(path, encoding="utf-8") as fp:
        return ExperimentReport.from_dict(json.load(fp))


# ---------------------------------------------------------------------------
# SVG emission: hand-rolled so the output is deterministic (no timestamps,
# no generator metadata), one polyline per series.

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
            "#e377c2", "#17becf")
_LOG_FLOOR = 1e-16


def _svg_plot(series: list[dict], xlabel: str, ylabel: str, title: str) -> str:
    width, height = 720, 480
    left, right, top, bottom = 70, 240, 40, 50
    plot_w, plot_h = width - left - right, height - top - bottom
    xs_all = [x for s in series for x in s["xs"]]
    ys_all = [math.log10(max(y, _LOG_FLOOR)) for s in series for y in s["ys"]]
    if not xs_all:
        xs_all, ys_all = [0.0, 1.0], [0.0, 1.0]
    x_lo, x_hi = min(xs_all), max(xs_all)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    y_lo, y_hi = math.floor(min(ys_all)), math.ceil(max(ys_all))
    if y_hi == y_lo:
        y_hi = y_lo + 1

    def px(x: float) -> float:
        return left + (x - x_lo) / (x_hi - x_lo) * plot_w

    def py(y: float) -> float:
        return top + (y_hi - y) / (y_hi - y_lo) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<title>{title}</title>',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{left}" y="{top}" width="{plot_w}" height="{plot_h}" '
        'fill="none" stroke="#333333"/>',
        f'<text x="{left + plot_w / 2:.2f}" y="{height - 12}" text-anchor="middle" '
        f'font-size="13">{xlabel}</text>',
        f'<text x="18" y="{top + plot_h / 2:.2f}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 18 {top + plot_h / 2:.2f})">{ylabel}</text>',
        f'<text x="{left + plot_w / 2:.2f}" y="24" text-anchor="middle" '
        f'font-size="14">{title}</text>',
    ]
    for tick in sorted(set(xs_all)):
        parts.append(f'<line x1="{px(tick):.2f}" y1="{top + plot_h}" '
                     f'x2="{px(tick):.2f}" y2="{top + plot_h + 5}" stroke="#333333"/>')
        parts.append(f'<text x="{px(tick):.2f}" y="{top + plot_h + 20}" '
                     f'text-anchor="middle" font-size="11">{tick:g}</text>')
    for level in range(int(y_lo), int(y_hi) + 1):
        parts.append(f'<line x1="{left - 5}" y1="{py(level):.2f}" x2="{left}" '
                     f'y2="{py(level):.2f}" stroke="#333333"/>')
        parts.append(f'<text x="{left - 9}" y="{py(level) + 4:.2f}" text-anchor="end" '
                     f'font-size="11">1e{level:+d}</text>')
    for i, s in enumerate(series):
        color = _PALETTE[i % len(_PALETTE)]
        points = " ".join(
            f"{px(x):.2f},{py(math.log10(max(y, _LOG_FLOOR))):.2f}"
            for x, y in zip(s["xs"], s["ys"]))
        parts.append(f'<polyline points="{points}" fill="none" stroke="{color}" '
                     'stroke-width="1.5"/>')
        ly = top + 16 + 16 * i
        parts.append(f'<line x1="{width - right + 12}" y1="{ly - 4}" '
                     f'x2="{width - right + 34}" y2="{ly - 4}" stroke="{color}" '
                     'stroke-width="1.5"/>')
        parts.append(f'<text x="{width - right + 40}" y="{ly}" '
                     f'font-size="11">{s["label"]}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render_svg(report: ExperimentReport) -> str:
    series = []
    if report.kind == "factorization":
        dts = sorted({cell.dt for cell in report.cells})
        sides = []
        for cell in report.cells:
            if cell.side not in sides:
                sides.append(cell.side)
        for dt in dts:
            for side in sides:
                chosen = [c for c in report.cells if c.dt == dt and c.side == side]
                chosen.sort(key=lambda c: c.radius)
                if not chosen:
                    continue
                series.append({"label": f"error dt={dt:g} {side}",
                               "xs": [c.radius for c in chosen],
                               "ys": [c.measured_error for c in chosen]})
                series.append({"label": f"bound dt={dt:g} {side}",
                               "xs": [c.radius for c in chosen],
                               "ys": [c.report("factorization").rhs for c in chosen]})
        return _svg_plot(series, "collar radius R", "log10 value",
                         "factorization error vs bound")
    dts = sorted({cell.dt for cell in report.cells})
    for dt in dts:
        chosen = sorted([c for c in report.cells if c.dt == dt],
                        key=lambda c: c.separation)
        series.append({"label": f"commutator dt={dt:g}",
                       "xs": [c.separation for c in chosen],
                       "ys": [c.report("lieb_robinson").lhs for c in chosen]})
        series.append({"label": f"bound dt={dt:g}",
                       "xs": [c.separation for c in chosen],
                       "ys": [c.report("lieb_robinson").rhs for c in chosen]})
    return _svg_plot(series, "separation", "log10 value",
                     "commutator norm vs propagation bound")


def write_svg(report: ExperimentReport, path: Path) -> None:
    path.write_text(render_svg(report), encoding="utf-8")


def emit(report: ExperimentReport, formats, outdir) -> list[Path]:
    """Write the report in the requested formats; returns the paths written."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    base = report.kind
    known = {"csv", "json", "svg"}
    formats = list(formats)
    unknown = set(formats) - known
    if unknown:
        raise ValueError(f"unknown emission format(s): {sorted(unknown)}")
    written = []
    if "json" in formats:
        target = outdir / f"{base}.json"
        write_json(report, target)
        written.append(target)
    if "csv" in formats:
        target = outdir / f"{base}.csv"
        write_csv(report, target)
        written.append(target)
    if "svg" in formats:
        target = outdir / f"{base}.svg"
        write_svg(report, target)
        written.append(target)
    return written
