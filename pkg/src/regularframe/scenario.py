"""Scenario files: schema validation, dispatch to the pipelines, and output writing.

A scenario is a JSON object with a ``kind`` and kind-specific fields. Every
randomized draw comes from ``numpy.random.Generator(numpy.random.Philox(seed))``
so a scenario and its seed fix the report byte for byte (apart from the
``timestamp`` field).
"""
from __future__ import annotations

import copy
import csv
import datetime as _dt
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Callable

import jsonschema
import numpy as np

from .chart import GeodesicConfig, build_regular_chart, cover_region
from .errors import ConfigError, RegularFrameError, SchemaError
from .fock import (
    CategoryRegistry,
    ParticleSystem,
    TruncatedFock,
    free_hamiltonian,
    gamma,
    smeared_field,
    transport_representation,
    validate_particle_system,
)
from .interpolation import InterpolatedMetric, TransitionFunction, t_line, verify_interpolation
from .kg import GridSpec, evolve_series, kg_norm2
from .mass_shell import Ball, Box, dual_lattice, j_transform, l2_norm, packet_from_spec, shell_measure, synthesize
from .metrics import FAMILIES, MINKOWSKI, ConstantMetric, Minkowski, SpacetimePoint, metric_from_spec
from .report import Check, Report, dumps
from .transport import TransportScenario, gram_matrix, packet_family, round_trip

KINDS = ("chart", "interpolate", "evolve", "transport", "shell", "fock", "suite")

_pos = {"type": "number", "exclusiveMinimum": 0}
_num = {"type": "number"}
_vec4 = {"type": "array", "items": _num, "minItems": 4, "maxItems": 4}
_interval = {"type": "array", "items": _num, "minItems": 2, "maxItems": 2}

_METRIC = {
    "type": "object",
    "required": ["family"],
    "properties": {
        "family": {"enum": sorted(FAMILIES)},
        "params": {"type": "object"},
        "domain": {"type": "array", "items": _interval, "minItems": 4, "maxItems": 4},
    },
}
_GRID = {
    "type": "object",
    "required": ["n", "L"],
    "properties": {
        "n": {"type": "integer", "minimum": 16},
        "L": _pos,
        "dim": {"enum": [1, 3]},
        "dt": _pos,
        "cfl": _pos,
    },
    "additionalProperties": False,
}
_PACKET = {
    "type": "object",
    "properties": {
        "modes": {"type": "array", "items": {"type": "object", "required": ["p"]}},
        "m": {"type": "number", "minimum": 0},
        "center": {}, "width": _pos, "p0": {}, "amplitude": _num,
    },
}


def _kind(name, required, props):
    return {"if": {"properties": {"kind": {"const": name}}, "required": ["kind"]},
            "then": {"required": required, "properties": props}}


SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": list(KINDS)},
        "name": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0},
        "tolerances": {"type": "object", "additionalProperties": _pos},
    },
    "allOf": [
        _kind("chart", ["metric"], {
            "metric": _METRIC, "center": _vec4, "rcap": _pos, "step": _pos,
            "lattice_density": {"type": "integer", "minimum": 2},
            "check_density": {"type": "integer", "minimum": 1},
            "export_density": {"type": "integer", "minimum": 1},
            "christoffel_mode": {"enum": ["analytic", "fd"]},
            "closed_form": {"type": "boolean"},
            "expect_radius": {"type": "number"},
            "cover": {"type": "object", "required": ["region"], "properties": {
                "region": {"type": "array", "items": _interval, "minItems": 4, "maxItems": 4},
                "density": {"type": "integer", "minimum": 2}}},
        }),
        _kind("interpolate", ["metric", "t1", "t2"], {
            "metric": _METRIC, "t1": _num, "t2": _num,
            "lattice": {"type": "object", "properties": {
                "samples": {"type": "integer", "minimum": 1}, "t": _interval, "x": _interval}},
            "line_points": {"type": "integer", "minimum": 2},
            "fd_step": _pos,
            "expect": {"type": "object", "required": ["point", "g"], "properties": {"point": _vec4}},
        }),
        _kind("evolve", ["metric", "mass", "grid", "packet"], {
            "metric": _METRIC, "mass": {"type": "number", "minimum": 0}, "grid": _GRID, "packet": _PACKET,
            "times": {"type": "array", "items": _num, "minItems": 1},
            "t0": _num, "refine": {"type": "integer", "minimum": 1},
        }),
        _kind("transport", ["metric", "t1", "t2", "m", "grid"], {
            "metric": _METRIC, "t1": _num, "t2": _num, "m": {"type": "number", "minimum": 0}, "grid": _GRID,
            "t_start": _num, "t_end": _num, "refine": {"type": "integer", "minimum": 1},
            "basis": {"type": "object", "properties": {
                "k": {"type": "integer", "minimum": 2}, "width": _pos,
                "centers": {"type": "array", "items": _num}, "momenta": {"type": "array", "items": _num}}},
            "round_trip": {"type": "boolean"},
        }),
        _kind("shell", [], {
            "m": {"type": "number", "minimum": 0},
            "ball": {"type": "number", "minimum": 0},
            "box": {"type": "array", "items": {"type": "array", "items": _num, "minItems": 3, "maxItems": 3},
                    "minItems": 2, "maxItems": 2},
            "expected": _num,
            "asymptotic": {"type": "object", "required": ["m"], "properties": {"m": _pos, "ball": _pos, "box": {
                "type": "array", "items": {"type": "array", "items": _num, "minItems": 3, "maxItems": 3},
                "minItems": 2, "maxItems": 2}}},
            "chain": {"type": "object", "properties": {
                "count": {"type": "integer", "minimum": 1},
                "masses": {"type": "array", "items": {"type": "number", "minimum": 0}},
                "grid": _GRID}},
        }),
        _kind("fock", ["system", "modes", "cutoff"], {
            "system": {"type": "array", "items": {"type": "object", "required": ["name"]}},
            "modes": {"oneOf": [{"type": "integer", "minimum": 1},
                                {"type": "array", "items": {"type": "array", "items": _num}}]},
            "cutoff": {"type": "integer", "minimum": 1},
            "checks": {"type": "array", "items": {"enum": ["ccr", "gamma", "spectrum", "registry"]}},
            "samples": {"type": "integer", "minimum": 1},
            "probe": {"type": "object", "required": ["particle", "mode", "n", "expected"]},
        }),
        _kind("suite", [], {"entries": {"type": "array", "items": {"type": ["object", "string"]}}}),
    ],
}

_VALIDATOR = jsonschema.Draft202012Validator(SCHEMA)


def _location(path) -> str:
    loc = "$"
    for p in path:
        loc += f"[{p}]" if isinstance(p, int) else f".{p}"
    return loc


def validate(scenario: Any, source: str = "<scenario>") -> dict:
    """Raise :class:`SchemaError` with a JSON-path location on the first violation."""
    err = jsonschema.exceptions.best_match(_VALIDATOR.iter_errors(scenario))
    if err is not None:
        loc = _location(err.absolute_path)
        raise SchemaError(f"{source}: {loc}: {err.message}", loc)
    if scenario["kind"] in ("interpolate", "transport") and not scenario["t1"] < scenario["t2"]:
        raise SchemaError(f"{source}: $.t2: window needs t1 < t2", "$.t2")
    return scenario


def load_scenario(path) -> dict:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}", f"{path}:{exc.lineno}") from None
    except OSError as exc:
        raise SchemaError(f"{path}: {exc.strerror}", str(path)) from None
    return validate(data, str(path))


def rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=int(seed)))


@dataclass
class Outcome:
    report: Report
    series: dict[str, list[dict]] = field(default_factory=dict)


def _tol(s, name, default):
    return float(s.get("tolerances", {}).get(name, default))


def _grid(g: dict) -> GridSpec:
    return GridSpec(float(g["L"]), int(g["n"]), int(g.get("dim", 1)), g.get("dt"), float(g.get("cfl", 0.25)))


def _max_dev(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


# ---- per-kind pipelines -------------------------------------------------------

def run_chart(s: dict, rng) -> Outcome:
    field_ = metric_from_spec(s["metric"])
    cfg = GeodesicConfig(step=s.get("step", 0.1), r_cap=s.get("rcap", 1.0),
                         lattice_density=s.get("lattice_density", 9),
                         christoffel_mode=s.get("christoffel_mode", "analytic"))
    report = Report("chart")
    chart = build_regular_chart(field_, SpacetimePoint.from_array(s.get("center", [0.0] * 4)), cfg)
    report.add(Check.below("origin_minkowski", _max_dev(chart.origin_metric(), MINKOWSKI), _tol(s, "origin", 1e-10)))
    fractions = np.linspace(-0.8, 0.8, s.get("check_density", 5))
    reg = chart.check(fractions)
    report.add(Check.flag("pulled_metric_regular", reg.passed))
    if s.get("closed_form"):
        if not isinstance(field_, (Minkowski, ConstantMetric)):
            raise ConfigError("closed_form law applies to flat metrics only")
        Z = chart.sample_points(fractions)
        c = (2.0 * chart.r / math.pi) / (1.0 + Z * Z)
        law = np.einsum("ni,nj,ij->nij", c, c, MINKOWSKI)
        got = chart.pulled_metric.evaluate_points(Z)
        report.add(Check.below("closed_form_law", _max_dev(got, law), _tol(s, "closed_form", 1e-10)))
    if "expect_radius" in s:
        report.add(Check.below("radius_error", abs(chart.r - s["expect_radius"]), _tol(s, "radius", 2e-3)))
    report.data["chart"] = chart.export(s.get("export_density", 3))
    report.data["regularity"] = reg.summary()
    if "cover" in s:
        cov = cover_region(field_, s["cover"]["region"], cfg, density=s["cover"].get("density", 5))
        report.add(Check.at_least("cover_fraction", cov.coverage, 1.0))
        report.data["cover"] = {"n_charts": len(cov.charts), "lattice_points": int(len(cov.lattice)),
                                "centers": [c.center.as_array().tolist() for c in cov.charts]}
    return Outcome(report)


def run_interpolate(s: dict, rng) -> Outcome:
    base = metric_from_spec(s["metric"])
    tf = TransitionFunction(s["t1"], s["t2"])
    lat = s.get("lattice", {})
    n = int(lat.get("samples", 1000))
    span = tf.t2 - tf.t1
    tlo, thi = lat.get("t", [tf.t1 - span, tf.t2 + span])
    xlo, xhi = lat.get("x", [-1.0, 1.0])
    pts = np.column_stack([rng.uniform(tlo, thi, n), rng.uniform(xlo, xhi, (n, 3))])
    line = t_line(tf, s.get("line_points", 50))
    report = verify_interpolation(base, tf, np.vstack([pts, line]), h=s.get("fd_step", 1e-3),
                                  c1_tol=_tol(s, "c1", 1e-4), end_tol=_tol(s, "end", 1e-12))
    gi = InterpolatedMetric(base, tf)
    if "expect" in s:
        got = gi.evaluate(SpacetimePoint.from_array(s["expect"]["point"]))
        report.add(Check.below("expected_value", _max_dev(got, s["expect"]["g"]), _tol(s, "expect", 1e-12)))
    G = gi.evaluate_points(line)
    rows = [{"t": float(p[0]), **{f"g{i}{j}": float(g[i, j]) for i in range(4) for j in range(4)}}
            for p, g in zip(line, G)]
    return Outcome(report, {"tline": rows})


def _drift_run(metric, m, grid, packet, t0, times):
    F = packet_from_spec(packet, grid, m)
    start = synthesize(F, grid, t0)
    n0 = kg_norm2(start, metric, grid)
    rows, drift = [], 0.0
    for st in evolve_series(start, metric, m, grid, times):
        nk = kg_norm2(st, metric, grid)
        d = abs(nk - n0) / abs(n0) if n0 else 0.0
        drift = max(drift, d)
        rows.append({"t": st.t, "norm": nk, "relative_drift": d})
    return drift, rows


def run_evolve(s: dict, rng) -> Outcome:
    metric = metric_from_spec(s["metric"])
    m = float(s["mass"])
    t0 = float(s.get("t0", 0.0))
    times = sorted(s.get("times", [t0 + 0.5, t0 + 1.0, t0 + 1.5, t0 + 2.0]))
    grid = _grid(s["grid"])
    report = Report("evolve")
    table, series = [], []
    for level in range(int(s.get("refine", 1))):
        drift, series = _drift_run(metric, m, grid, s["packet"], t0, times)
        table.append({"n": grid.n, "h": grid.h, "dt": grid.dt, "drift": drift})
        grid = grid.refine(2)
    report.add(Check.below("norm_drift", table[-1]["drift"], _tol(s, "drift", 1e-6)))
    if len(table) > 1:
        orders = [math.log2(a["drift"] / b["drift"]) if b["drift"] > 0 else math.inf
                  for a, b in zip(table, table[1:])]
        for row, o in zip(table[1:], orders):
            row["order"] = o
        report.add(Check.at_least("observed_order", min(orders), _tol(s, "order", 1.8)))
    report.tables["refinement"] = table
    return Outcome(report, {"norm": series, "refinement": table})


def run_transport(s: dict, rng) -> Outcome:
    base = metric_from_spec(s["metric"])
    m = float(s["m"])
    b = s.get("basis", {})
    k = int(b.get("k", 5))

    def basis(grid):
        return packet_family(grid, m, k=k, width=b.get("width", 1.5), centers=b.get("centers"), momenta=b.get("momenta"))

    grid = _grid(s["grid"])
    t_start, t_end = float(s.get("t_start", 0.0)), float(s.get("t_end", s["t2"] + 0.5))
    report = Report("transport")
    table, res, sc = [], None, None
    for _ in range(int(s.get("refine", 1))):
        sc = TransportScenario(base, s["t1"], s["t2"], grid, m, basis(grid), t_start, t_end)
        res = gram_matrix(sc)
        table.append({"n": grid.n, "h": grid.h, "dt": grid.dt, "defect": res.defect, "boundary": res.boundary})
        grid = grid.refine(2)
    report.add(Check.below("gram_defect", table[-1]["defect"], _tol(s, "gram", 5e-3)))
    report.add(Check.below("boundary_fraction", table[-1]["boundary"], _tol(s, "boundary", 1e-8)))
    if len(table) > 1:
        dec = all(b_["defect"] < a["defect"] for a, b_ in zip(table, table[1:]))
        report.add(Check.flag("defect_strictly_decreasing", dec))
    if s.get("round_trip", True):
        report.add(Check.below("round_trip", round_trip(sc.basis[0], sc), _tol(s, "round_trip", 1e-5)))
    report.tables["convergence"] = table
    report.data["gram_before"] = res.before
    report.data["gram_after"] = res.after
    return Outcome(report, {"convergence": table})


def run_shell(s: dict, rng) -> Outcome:
    report = Report("shell")
    m = float(s.get("m", 0.0))
    tol = _tol(s, "measure", 1e-6)
    if "ball" in s or "box" in s:
        region = Ball(s["ball"]) if "ball" in s else Box(tuple(s["box"][0]), tuple(s["box"][1]))
        val = shell_measure(region, m, tol=min(tol, 1e-8))
        report.data["measure"] = val
        if "expected" in s:
            report.add(Check.below("measure_error", abs(val - s["expected"]), tol))
    if "asymptotic" in s:
        a = s["asymptotic"]
        if "box" in a:
            region = Box(tuple(a["box"][0]), tuple(a["box"][1]))
            vol = float(np.prod(np.subtract(region.hi, region.lo)))
        else:
            R = float(a.get("ball", 1.0))
            region, vol = Ball(R), 4.0 * math.pi * R**3 / 3.0
        # mu_m(B) ~ vol(B) / m for m much larger than the box
        scaled = shell_measure(region, a["m"], tol=1e-10 / a["m"]) * a["m"]
        report.add(Check.below("asymptotic_relative_error", abs(scaled - vol) / vol, _tol(s, "asymptotic", 1e-4)))
    if "chain" in s:
        c = s["chain"]
        grid = _grid(c.get("grid", {"n": 32, "L": 8.0}))
        j_err = k_err = 0.0
        for mass in c.get("masses", [0.5, 1.0, 2.0]):
            momenta, dp = dual_lattice(grid, mass)
            for _ in range(int(c.get("count", 20))):
                f = rng.standard_normal(len(momenta)) + 1j * rng.standard_normal(len(momenta))
                nf = l2_norm(f, dp)
                F = j_transform(f, momenta, mass, dp)
                nj = F.norm()
                state = synthesize(F, grid, 0.0)
                nk = math.sqrt(kg_norm2(state, Minkowski(), grid))
                j_err = max(j_err, abs(nf - nj) / nf)
                k_err = max(k_err, abs(nj - nk) / nj)
        report.add(Check.below("j_step", j_err, _tol(s, "j_step", 1e-10)))
        report.add(Check.below("k_step", k_err, _tol(s, "k_step", 1e-8)))
    return Outcome(report)


def _random_unitary(rng, n):
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def _block_unitary(rng, fock: TruncatedFock):
    """One independent unitary per particle on its own modes."""
    U = np.zeros((fock.n_slots, fock.n_slots), dtype=np.complex128)
    K = len(fock.momenta)
    for i, _ in enumerate(fock.system.particles):
        U[i * K:(i + 1) * K, i * K:(i + 1) * K] = _random_unitary(rng, K)
    return U


def _spectrum(A):
    A = A.toarray() if hasattr(A, "toarray") else np.asarray(A)
    if np.allclose(A, A.conj().T, atol=1e-12):
        return np.sort(np.linalg.eigvalsh(A))
    return np.sort(np.linalg.svd(A, compute_uv=False))


def _fock_ccr(fock: TruncatedFock) -> dict[str, float]:
    P = fock.guarded_projector()
    I = np.eye(fock.dim)
    a = [fock.annihilator(i) for i in range(fock.n_slots)]
    ad = [fock.creator(i) for i in range(fock.n_slots)]
    guarded = plain = 0.0
    for j in range(fock.n_slots):
        for k in range(fock.n_slots):
            sign = 1.0 if fock.stats[j] == fock.stats[k] == "fermion" else -1.0
            mixed = (a[j] @ ad[k] + sign * ad[k] @ a[j]).toarray() - (j == k) * I
            guarded = max(guarded, float(np.abs(mixed @ P.toarray()).max()))
            pair = (a[j] @ a[k] + sign * a[k] @ a[j]).toarray()
            plain = max(plain, float(np.abs(pair).max()))
    H, N = free_hamiltonian(fock), fock.number()
    return {"ladder_guarded": guarded, "annihilators": plain,
            "hamiltonian_number_commutator": float(np.abs((H @ N - N @ H).toarray()).max())}


def run_fock(s: dict, rng) -> Outcome:
    system = ParticleSystem.from_json(s["system"])
    report = Report("fock")
    report.data["system"] = validate_particle_system(system)
    modes = s["modes"]
    momenta = np.arange(modes, dtype=float) if isinstance(modes, int) else np.asarray(modes, dtype=float)
    fock = TruncatedFock(system, momenta, s["cutoff"])
    report.data["dimension"] = fock.dim
    checks = s.get("checks", ["ccr", "gamma", "spectrum", "registry"])
    samples = int(s.get("samples", 3))
    tol = _tol(s, "algebra", 1e-10)
    if "ccr" in checks:
        for name, val in _fock_ccr(fock).items():
            report.add(Check.below(name, val, tol))
    if "gamma" in checks:
        fun = uni = vac = ident = 0.0
        I = np.eye(fock.dim)
        ident = _max_dev(gamma(fock, np.eye(fock.n_slots)), I)
        for _ in range(samples):
            U, V = _block_unitary(rng, fock), _block_unitary(rng, fock)
            GU = gamma(fock, U)
            fun = max(fun, _max_dev(GU @ gamma(fock, V), gamma(fock, U @ V)))
            uni = max(uni, _max_dev(GU.conj().T @ GU, I))
            vac = max(vac, _max_dev(GU[:, 0], I[:, 0]))
        report.add(Check.below("gamma_identity", ident, tol))
        report.add(Check.below("gamma_functoriality", fun, tol))
        report.add(Check.below("gamma_unitarity", uni, tol))
        report.add(Check.below("gamma_vacuum", vac, tol))
    if "spectrum" in checks:
        A0 = free_hamiltonian(fock)
        p = system.particles[0].name
        h = rng.standard_normal(len(fock.momenta))
        Phi = smeared_field(fock, p, h)
        spec_tol = _tol(s, "spectrum", 1e-9)
        eig = comm = 0.0
        for _ in range(samples):
            W = gamma(fock, _block_unitary(rng, fock))
            tr = transport_representation(W, [A0, Phi])
            eig = max(eig, tr.spectrum_defects[0])
            before = (A0 @ Phi - Phi @ A0).toarray()
            after = tr.operators[0] @ tr.operators[1] - tr.operators[1] @ tr.operators[0]
            comm = max(comm, _max_dev(_spectrum(before), _spectrum(after)))
        report.add(Check.below("hamiltonian_spectrum", eig, spec_tol))
        report.add(Check.below("commutator_spectrum", comm, spec_tol))
    if "probe" in s:
        pr = s["probe"]
        occ = [0] * fock.n_slots
        occ[fock.slot(pr["particle"], pr["mode"])] = pr["n"]
        v = fock.state(occ)
        val = float(np.real(v.conj() @ (free_hamiltonian(fock) @ v)))
        report.data["probe_energy"] = val
        report.add(Check.below("probe_energy", abs(val - pr["expected"]), _tol(s, "probe", 1e-12)))
    if "registry" in checks:
        reg = CategoryRegistry()
        for e in (0.0, 1.0, 2.0):
            reg.add_theory(e, {"masses": {q.name: q.mass for q in system.particles}})
        U01, U12 = _random_unitary(rng, fock.dim), _random_unitary(rng, fock.dim)
        reg.add_morphism(0.0, 0.0, np.eye(fock.dim))
        reg.add_morphism(0.0, 1.0, U01)
        reg.add_morphism(1.0, 2.0, U12)
        reg.add_morphism(0.0, 2.0, U12 @ U01)
        report.extend(reg.check_groupoid(tol).checks)
    return Outcome(report)


RUNNERS: dict[str, Callable[[dict, np.random.Generator], Outcome]] = {
    "chart": run_chart, "interpolate": run_interpolate, "evolve": run_evolve, "transport": run_transport,
    "shell": run_shell, "fock": run_fock,
}


# ---- orchestration ----------------------------------------------------------

def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def run(scenario: dict, seed: int | None = None, threads: int = 1, base_dir: Path | None = None) -> Outcome:
    """Validate and execute a scenario; pipeline errors become a failing ``pipeline_error`` check.

    Configuration errors propagate so the caller can map them to a usage exit code.
    """
    s = validate(copy.deepcopy(scenario))
    if seed is not None:
        s["seed"] = int(seed)
    s.setdefault("seed", 0)
    if s["kind"] == "suite":
        return _run_entries(_resolve_entries(s.get("entries", []), base_dir or Path.cwd()), s, threads)
    try:
        out = RUNNERS[s["kind"]](s, rng_for(s["seed"]))
    except ConfigError:
        raise
    except RegularFrameError as exc:
        out = Outcome(Report(s["kind"]))
        out.report.add(Check.flag(f"pipeline_error: {type(exc).__name__}: {exc}", False))
    out.report.scenario = s
    out.report.timestamp = _now()
    return out


def _resolve_entries(entries, base_dir: Path) -> list[tuple[str, dict]]:
    out = []
    for i, e in enumerate(entries):
        if isinstance(e, str):
            p = (base_dir / e)
            out.append((p.name, load_scenario(p)))
        else:
            out.append((e.get("name", f"entry{i:03d}"), validate(e, f"$.entries[{i}]")))
    return out


def _run_entries(named: list[tuple[str, dict]], s: dict, threads: int) -> Outcome:
    seed = s.get("seed", 0)

    def one(item):
        name, sc = item
        sc = dict(sc)
        sc.setdefault("seed", seed)
        return name, run(sc)

    if threads > 1 and len(named) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, named))
    else:
        results = [one(item) for item in named]
    report = Report("suite", scenario={k: v for k, v in s.items() if k != "entries"})
    series = {}
    entries = []
    for name, out in results:
        for c in out.report.checks:
            report.add(Check(f"{name}/{c.name}", c.measured, c.tolerance, c.passed, c.relation))
        for tname, rows in out.report.tables.items():
            report.tables[f"{name}/{tname}"] = rows
        for sname, rows in out.series.items():
            series[f"{Path(name).stem}.{sname}"] = rows
        d = out.report.to_dict()
        d.pop("timestamp", None)
        entries.append({"name": name, **d})
    report.data["entries"] = entries
    report.timestamp = _now()
    return Outcome(report, series)


def suite(directory, seed: int | None = None, threads: int = 1) -> Outcome:
    """Run every ``*.json`` scenario in ``directory`` in filename order and aggregate."""
    directory = Path(directory)
    if not directory.is_dir():
        raise SchemaError(f"{directory}: not a directory", str(directory))
    named = [(p.name, load_scenario(p)) for p in sorted(directory.glob("*.json"))]
    return _run_entries(named, {"kind": "suite", "seed": 0 if seed is None else int(seed),
                                "directory": directory.name}, threads)


def acceptance_dir() -> Path:
    return Path(str(resources.files("regularframe") / "scenarios" / "acceptance"))


def report_json(report: Report) -> str:
    return dumps(report.to_dict())


def strip_timestamp(text: str) -> str:
    d = json.loads(text)
    d.pop("timestamp", None)
    return json.dumps(d, sort_keys=True)


def write_outputs(outcome: Outcome, out: Path) -> list[Path]:
    """Write the JSON report to ``out`` and each series to ``<stem>.<series>.csv`` beside it."""
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(report_json(outcome.report))
    written = [out]
    for name, rows in outcome.series.items():
        if not rows:
            continue
        path = out.with_name(f"{out.stem}.{name.replace('/', '_')}.csv")
        cols = list(dict.fromkeys(k for r in rows for k in r))
        with path.open("w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=cols)
            w.writeheader()
            for r in rows:
                w.writerow({k: repr(float(v)) if isinstance(v, (float, np.floating)) else v for k, v in r.items()})
        written.append(path)
    return written


def thread_count(flag: int | None) -> int:
    if flag is not None:
        return max(1, int(flag))
    env = os.environ.get("REGULARFRAME_THREADS")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        raise ConfigError(f"REGULARFRAME_THREADS must be an integer, got {env!r}") from None
