"""Scenario files, bundled presets, and the command-line front end.

Scenario files are JSON documents validated against a strict schema (unknown
keys are rejected) before any numeric invariant is checked, so error messages
carry a JSON path.  The bundled presets reproduce the three demonstration
cases: case1 runs the time-based law over the switching digraphs with no
attacks, case2 adds a periodic DoS schedule that satisfies the frequency and
duty budgets, and case3 runs the event-triggered law in the same attack
environment.

Exit codes: 0 success, 2 validation failure, 3 divergence, 4 I/O error.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import os
import sys
import tempfile
from dataclasses import dataclass

import numpy as np
import jsonschema

from .attack import (AttackBudget, AttackSchedule, attack_metrics,
                     check_duration_condition, check_frequency_condition)
from .controller import AlgorithmParams, TriggerParams
from .cost import CostSpec, centralized_optimum
from .errors import DivergenceError, ResoptError, ValidationError
from .graph import GraphProcess, WeightedDigraph
from .plant import AgentModel
from .sim import InitialCondition, Scenario, convergence_report, final_spread, run

_matrix_schema = {"type": "array", "minItems": 1,
                  "items": {"type": "array", "minItems": 1,
                            "items": {"type": "number"}}}
_vector_schema = {"type": "array", "minItems": 1, "items": {"type": "number"}}

SCENARIO_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["agents", "costs", "graph_process", "algorithm", "params", "sim"],
    "properties": {
        "agents": {
            "type": "array", "minItems": 1,
            "items": {
                "type": "object", "additionalProperties": False,
                "required": ["A", "B", "C", "K"],
                "properties": {name: _matrix_schema
                               for name in ("A", "B", "C", "K", "U", "W", "X")},
            },
        },
        "costs": {
            "type": "array", "minItems": 1,
            "items": {
                "type": "object", "additionalProperties": False,
                "required": ["kind", "parameters"],
                "properties": {
                    "kind": {"enum": ["exp_pair", "quartic", "log_quadratic",
                                      "custom_polynomial"]},
                    "parameters": _vector_schema,
                    "dimension": {"type": "integer", "minimum": 1},
                },
            },
        },
        "graph_process": {
            "type": "object", "additionalProperties": False,
            "required": ["weights", "generator", "initial_distribution"],
            "properties": {
                "weights": {"type": "array", "minItems": 1, "items": _matrix_schema},
                "generator": _matrix_schema,
                "initial_distribution": _vector_schema,
            },
        },
        "attacks": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "intervals": {"type": "array",
                              "items": {"type": "array", "minItems": 2,
                                        "maxItems": 2,
                                        "items": {"type": "number"}}},
                "periodic": {
                    "type": "object", "additionalProperties": False,
                    "required": ["period", "active", "phase"],
                    "properties": {"period": {"type": "number"},
                                   "active": {"type": "number"},
                                   "phase": {"type": "number"}},
                },
                "duty": {"type": "number", "minimum": 0.0, "maximum": 1.0},
                "budget": {
                    "type": "object", "additionalProperties": False,
                    "required": ["lambda_a", "lambda_b", "mu", "eta_star"],
                    "properties": {name: {"type": "number"}
                                   for name in ("lambda_a", "lambda_b", "mu",
                                                "eta_star", "n0", "t0",
                                                "kappa_star")},
                },
            },
        },
        "algorithm": {"enum": ["attack_free", "time_based", "event_based"]},
        "params": {
            "type": "object", "additionalProperties": False,
            "required": ["alpha", "beta"],
            "properties": {
                "alpha": {"type": "number"},
                "beta": {"type": "number"},
                "trigger": {
                    "type": "object", "additionalProperties": False,
                    "required": ["sigma_g", "sigma_h", "theta_g", "theta_h",
                                 "delta_g", "delta_h", "k_g", "k_h",
                                 "eta_g0", "eta_h0", "dwell_kappa"],
                    "properties": {name: {"type": "number"}
                                   for name in ("sigma_g", "sigma_h", "theta_g",
                                                "theta_h", "delta_g", "delta_h",
                                                "k_g", "k_h", "eta_g0", "eta_h0",
                                                "dwell_kappa")},
                },
            },
        },
        "sim": {
            "type": "object", "additionalProperties": False,
            "required": ["horizon", "step", "seed"],
            "properties": {
                "horizon": {"type": "number"},
                "step": {"type": "number"},
                "seed": {"type": "integer"},
                "initial": {
                    "type": "object", "additionalProperties": False,
                    "properties": {
                        "mode": {"enum": ["random", "explicit"]},
                        "low": {"type": "number"},
                        "high": {"type": "number"},
                        "states": {
                            "type": "array",
                            "items": {"type": "object",
                                      "additionalProperties": False,
                                      "required": ["x", "rho", "z"],
                                      "properties": {"x": _vector_schema,
                                                     "rho": _vector_schema,
                                                     "z": _vector_schema}},
                        },
                    },
                },
            },
        },
        "outputs": {
            "type": "object", "additionalProperties": False,
            "properties": {name: {"type": "string"}
                           for name in ("trajectory", "report", "events",
                                        "conditions")},
        },
    },
}


@dataclass
class LoadedScenario:
    scenario: Scenario
    budget: AttackBudget | None
    raw: dict


@dataclass
class RunOutputs:
    trajectory_csv: str
    report_csv: str
    events_csv: str | None
    conditions_csv: str


def validate_document(doc: dict) -> None:
    """Schema-check a scenario document, reporting the offending JSON path."""
    validator = jsonschema.Draft202012Validator(SCENARIO_SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        path = "$" + "".join(f"[{p!r}]" if isinstance(p, int) else f".{p}"
                             for p in err.absolute_path)
        raise ValidationError(f"scenario schema violation at {path}: {err.message}")


def _build_schedule(doc: dict, horizon: float) -> AttackSchedule | None:
    attacks = doc.get("attacks")
    if attacks is None:
        return None
    has_intervals = "intervals" in attacks
    has_periodic = "periodic" in attacks
    if has_intervals and has_periodic:
        raise ValidationError("attacks: give either intervals or a periodic template")
    if "duty" in attacks and not has_periodic:
        raise ValidationError("attacks.duty only applies to a periodic template")
    if has_periodic:
        tpl = dict(attacks["periodic"])
        if "duty" in attacks:
            tpl["active"] = attacks["duty"] * tpl["period"]
        return AttackSchedule.periodic(period=tpl["period"], active=tpl["active"],
                                       phase=tpl["phase"], horizon=horizon)
    if has_intervals:
        return AttackSchedule(intervals=tuple(tuple(iv) for iv in attacks["intervals"]),
                              horizon=horizon)
    return None


def _build_budget(doc: dict) -> AttackBudget | None:
    budget = doc.get("attacks", {}).get("budget") if doc.get("attacks") else None
    if budget is None:
        return None
    return AttackBudget(lambda_a=budget["lambda_a"], lambda_b=budget["lambda_b"],
                        mu=budget["mu"], eta_star=budget["eta_star"],
                        n0=budget.get("n0", 1.0), t0=budget.get("t0", 0.0),
                        kappa_star=budget.get("kappa_star", 0.0))


def build_scenario(doc: dict) -> LoadedScenario:
    """Construct a validated Scenario (plus budget) from a scenario document."""
    validate_document(doc)
    try:
        agents = tuple(
            AgentModel.build(spec["A"], spec["B"], spec["C"], spec["K"],
                             spec.get("U"), spec.get("W"), spec.get("X"))
            for spec in doc["agents"])
        costs = tuple(
            CostSpec(kind=spec["kind"], parameters=tuple(spec["parameters"]),
                     dimension=spec.get("dimension", 1))
            for spec in doc["costs"])
        gp = doc["graph_process"]
        process = GraphProcess(
            graphs=tuple(WeightedDigraph(np.asarray(w, dtype=float))
                         for w in gp["weights"]),
            generator=np.asarray(gp["generator"], dtype=float),
            initial_distribution=np.asarray(gp["initial_distribution"], dtype=float))
        simdoc = doc["sim"]
        horizon = float(simdoc["horizon"])
        schedule = _build_schedule(doc, horizon)
        init_doc = simdoc.get("initial", {"mode": "random"})
        if init_doc.get("mode", "random") == "explicit":
            initial = InitialCondition(
                mode="explicit",
                states=tuple((s["x"], s["rho"], s["z"])
                             for s in init_doc.get("states", ())))
        else:
            initial = InitialCondition(mode="random",
                                       low=init_doc.get("low", -10.0),
                                       high=init_doc.get("high", 10.0))
        params_doc = doc["params"]
        trigger_doc = params_doc.get("trigger")
        trigger = TriggerParams(**trigger_doc) if trigger_doc else None
        scenario = Scenario(
            agents=agents, costs=costs, graph_process=process,
            attack_schedule=schedule, algorithm=doc["algorithm"],
            params=AlgorithmParams(alpha=params_doc["alpha"],
                                   beta=params_doc["beta"]),
            horizon=horizon, step=float(simdoc["step"]),
            seed=int(simdoc["seed"]), initial=initial, trigger=trigger)
    except KeyError as exc:
        raise ValidationError(f"scenario document is missing {exc}") from exc
    return LoadedScenario(scenario=scenario, budget=_build_budget(doc), raw=doc)


def load_scenario(path: str) -> Scenario:
    """Load and fully validate a scenario file."""
    return load_scenario_file(path).scenario


def load_scenario_file(path: str, overrides=()) -> LoadedScenario:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path} is not valid JSON: {exc}") from exc
    for key, value in overrides:
        _apply_override(doc, key, value)
    return build_scenario(doc)


def _apply_override(doc: dict, dotted: str, value):
    parts = dotted.split(".")
    node = doc
    for part in parts[:-1]:
        if part not in node or not isinstance(node[part], dict):
            node[part] = {}
        node = node[part]
    node[parts[-1]] = value


def parse_override(text: str):
    if "=" not in text:
        raise ValidationError(f"override {text!r} must look like key=value")
    key, raw = text.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key, value


# ---------------------------------------------------------------------------
# Bundled presets.
#
# The communication topologies rotate among three strongly connected sparse
# digraphs (a forward ring, a backward ring, and the full exchange graph)
# with coupling weight 200.  Every agent keeps at least one in-neighbour in
# every topology: the first agent's cost is unbounded below, so any topology
# that isolates an agent for a couple of seconds lets its local descent
# escape in finite time (see README).  Attack bursts are 1 s long for the
# same reason - an isolated descent escapes in about 1.8 s from the optimum.
# ---------------------------------------------------------------------------

GRAPH_WEIGHT = 200.0

_AGENT_DOCS = [
    {"A": [[0.0, 1.0], [0.0, 0.0]],
     "B": [[0.0, 1.0], [1.0, -2.0]],
     "C": [[1.0, 1.0]],
     "K": [[3.0, 5.0], [1.5, 1.0]],
     "U": [[1.0], [0.5]], "W": [[1.5], [0.5]], "X": [[0.5], [0.5]]},
    {"A": [[0.0, -1.0], [1.0, -2.0]],
     "B": [[1.0, 0.0], [3.0, -1.0]],
     "C": [[-1.0, 1.0]],
     "K": [[0.75, -1.0], [1.25, -4.0]],
     "U": [[-0.5], [0.0]], "W": [[-0.5], [-2.0]], "X": [[-0.5], [0.5]]},
    {"A": [[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.5, 1.0, -2.0]],
     "B": [[1.0, 0.0], [0.0, 1.0], [1.0, 0.0]],
     "C": [[1.0, -1.0, 1.0]],
     "K": [[2.167, 1.0, 0.333], [0.0, 3.0, 1.0]],
     "U": [[-1.0], [0.0]], "W": [[0.0], [-1.0]], "X": [[0.0], [-1.0], [0.0]]},
]

_COST_DOCS = [
    {"kind": "exp_pair", "parameters": [-2.0, -0.5, 0.5, 0.3]},
    {"kind": "quartic", "parameters": [1.0, 2.0, 2.0]},
    {"kind": "log_quadratic", "parameters": [0.5, 1.0]},
]

_GENERATOR = [[-0.1, 0.02, 0.08], [0.3, -0.5, 0.2], [0.1, 0.1, -0.2]]

# The raw initial-distribution vector [0.5882, 0.1500, 0.3235] sums to
# 1.0617; it is stored normalized so it is a probability vector.
_RAW_DIST = (0.5882, 0.1500, 0.3235)
_INITIAL_DISTRIBUTION = [v / sum(_RAW_DIST) for v in _RAW_DIST]


def _graph_docs(weight: float = GRAPH_WEIGHT):
    ring_fwd = [[0.0, 0.0, weight],
                [weight, 0.0, 0.0],
                [0.0, weight, 0.0]]
    ring_bwd = [[0.0, weight, 0.0],
                [0.0, 0.0, weight],
                [weight, 0.0, 0.0]]
    full = [[0.0, weight, weight],
            [weight, 0.0, weight],
            [weight, weight, 0.0]]
    return [ring_fwd, ring_bwd, full]


_CASE23_ATTACKS = {
    "periodic": {"period": 100.0, "active": 1.0, "phase": 43.0},
    "budget": {"lambda_a": 0.6, "lambda_b": 0.5, "mu": 148.4131591025766,
               "eta_star": 0.05, "n0": 1.0, "t0": 1.0, "kappa_star": 0.0},
}

_TRIGGER = {"sigma_g": 1e4, "sigma_h": 1e4, "theta_g": 1e-6, "theta_h": 1e-6,
            "delta_g": 0.0, "delta_h": 0.0, "k_g": 0.05, "k_h": 0.05,
            "eta_g0": 1.0, "eta_h0": 1.0, "dwell_kappa": 0.1}

PRESET_NAMES = ("case1", "case2", "case3")


def preset(name: str) -> dict:
    """The bundled scenario document for case1, case2, or case3."""
    if name not in PRESET_NAMES:
        raise ValidationError(f"unknown preset {name!r}; expected one of {PRESET_NAMES}")
    doc = {
        "agents": json.loads(json.dumps(_AGENT_DOCS)),
        "costs": json.loads(json.dumps(_COST_DOCS)),
        "graph_process": {
            "weights": _graph_docs(),
            "generator": json.loads(json.dumps(_GENERATOR)),
            "initial_distribution": list(_INITIAL_DISTRIBUTION),
        },
        "algorithm": "time_based",
        "params": {"alpha": 2.0, "beta": 1.0},
        "sim": {"horizon": 15.0, "step": 1e-3, "seed": 1,
                "initial": {"mode": "random", "low": -10.0, "high": 10.0}},
    }
    if name in ("case2", "case3"):
        doc["attacks"] = json.loads(json.dumps(_CASE23_ATTACKS))
        doc["sim"]["horizon"] = 210.0
        doc["sim"]["seed"] = 7
    if name == "case3":
        doc["algorithm"] = "event_based"
        doc["params"]["trigger"] = dict(_TRIGGER)
        doc["attacks"]["budget"]["kappa_star"] = _TRIGGER["dwell_kappa"]
    return doc


def preset_scenario(name: str) -> LoadedScenario:
    return build_scenario(preset(name))


# ---------------------------------------------------------------------------
# CSV emission
# ---------------------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _write_atomic(path: str, lines) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            for line in lines:
                fh.write(line)
                fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def trajectory_header(scenario: Scenario) -> list:
    cols = ["t"]
    q = scenario.q
    for i, model in enumerate(scenario.agents, start=1):
        cols += [f"x{i}_{k}" for k in range(1, model.n + 1)]
        cols += [f"y{i}"] if q == 1 else [f"y{i}_{d}" for d in range(1, q + 1)]
        cols += [f"rho{i}"] if q == 1 else [f"rho{i}_{d}" for d in range(1, q + 1)]
        cols += [f"z{i}"] if q == 1 else [f"z{i}_{d}" for d in range(1, q + 1)]
        cols += [f"u{i}_{k}" for k in range(1, model.p + 1)]
        cols += [f"eta_g{i}", f"eta_h{i}"]
    cols += ["r_state", "attack_active"]
    return cols


def _trajectory_lines(scenario: Scenario, traj):
    yield ",".join(trajectory_header(scenario))
    q = scenario.q
    n_rows = traj.times.shape[0]
    for row in range(n_rows):
        parts = [_fmt(traj.times[row])]
        for i in range(scenario.n_agents):
            s0, s1 = traj.state_slices[i]
            u0, u1 = traj.input_slices[i]
            c0, c1 = i * q, (i + 1) * q
            parts += [_fmt(v) for v in traj.x[row, s0:s1]]
            parts += [_fmt(v) for v in traj.y[row, c0:c1]]
            parts += [_fmt(v) for v in traj.rho[row, c0:c1]]
            parts += [_fmt(v) for v in traj.z[row, c0:c1]]
            parts += [_fmt(v) for v in traj.u[row, u0:u1]]
            parts += [_fmt(traj.eta_g[row, i]), _fmt(traj.eta_h[row, i])]
        parts += [str(int(traj.r_state[row])), _fmt(bool(traj.attack_on[row]))]
        yield ",".join(parts)


def _report_lines(scenario: Scenario, traj, report, diverged_at):
    n = scenario.n_agents
    header = ["theta_star", "final_error", "fitted_rate", "final_spread",
              "diverged", "divergence_time"]
    for i in range(1, n + 1):
        header += [f"events{i}", f"min_gap{i}", f"mean_gap{i}"]
    yield ",".join(header)
    parts = [_fmt(report.theta_star), _fmt(report.final_error),
             _fmt(report.fitted_rate), _fmt(final_spread(traj)),
             "1" if diverged_at is not None else "0",
             _fmt(diverged_at) if diverged_at is not None else "nan"]
    for stats in report.trigger_stats:
        parts += [str(stats.count), _fmt(stats.min_gap), _fmt(stats.mean_gap)]
    yield ",".join(parts)


def _events_lines(traj):
    yield "agent,time,status"
    rows = []
    for i, times in enumerate(traj.events, start=1):
        rows += [(float(t), i, "success") for t in times]
    for i, times in enumerate(traj.blocked_attempts, start=1):
        rows += [(float(t), i, "blocked") for t in times]
    for t, i, status in sorted(rows):
        yield f"{i},{_fmt(t)},{status}"


def _conditions_lines(scenario: Scenario, budget: AttackBudget | None):
    header = ("variant,window_t1,window_t2,n_attacks,attacked_time,frequency,"
              "duty,t_f_star,tightest_t_f,frequency_pass,t_a_star,"
              "tightest_t_a,duration_pass")
    yield header
    schedule = scenario.attack_schedule or AttackSchedule.empty(scenario.horizon)
    window = (0.0, scenario.horizon)
    metrics = attack_metrics(schedule, *window)
    variants = [("plain", False)]
    if scenario.algorithm == "event_based":
        variants.append(("inflated", True))
    for label, event_variant in variants:
        base = [label, _fmt(window[0]), _fmt(window[1]), str(metrics.count),
                _fmt(metrics.total_duration), _fmt(metrics.frequency),
                _fmt(metrics.total_duration / (window[1] - window[0]))]
        if budget is None:
            yield ",".join(base + [""] * 6)
            continue
        freq = check_frequency_condition(schedule, budget, window,
                                         event_variant=event_variant)
        dur = check_duration_condition(schedule, budget, window,
                                       event_variant=event_variant)
        yield ",".join(base + [_fmt(freq.threshold), _fmt(freq.tightest),
                               "1" if freq.passed else "0",
                               _fmt(dur.threshold), _fmt(dur.tightest),
                               "1" if dur.passed else "0"])


def write_outputs(loaded: LoadedScenario, out_dir: str, traj, report,
                  diverged_at=None) -> RunOutputs:
    os.makedirs(out_dir, exist_ok=True)
    names = loaded.raw.get("outputs", {})
    scenario = loaded.scenario
    traj_path = os.path.join(out_dir, names.get("trajectory", "trajectory.csv"))
    report_path = os.path.join(out_dir, names.get("report", "report.csv"))
    conditions_path = os.path.join(out_dir, names.get("conditions", "conditions.csv"))
    _write_atomic(traj_path, _trajectory_lines(scenario, traj))
    _write_atomic(report_path, _report_lines(scenario, traj, report, diverged_at))
    _write_atomic(conditions_path, _conditions_lines(scenario, loaded.budget))
    events_path = None
    if scenario.algorithm == "event_based":
        events_path = os.path.join(out_dir, names.get("events", "events.csv"))
        _write_atomic(events_path, _events_lines(traj))
    return RunOutputs(trajectory_csv=traj_path, report_csv=report_path,
                      events_csv=events_path, conditions_csv=conditions_path)


def run_command(scenario_path: str, out_dir: str, overrides=()) -> RunOutputs:
    """Load, simulate, and emit the CSV outputs.

    On divergence the truncated trajectory and a flagged report are still
    written before the DivergenceError (with ``.outputs`` attached) is
    re-raised for the caller to turn into exit code 3.
    """
    loaded = load_scenario_file(scenario_path, overrides)
    theta_star = centralized_optimum(list(loaded.scenario.costs), 1e-12)
    try:
        traj = run(loaded.scenario)
        diverged_at = None
    except DivergenceError as exc:
        traj = exc.trajectory
        diverged_at = exc.time
    report = convergence_report(traj, theta_star)
    outputs = write_outputs(loaded, out_dir, traj, report, diverged_at)
    if diverged_at is not None:
        err = DivergenceError(diverged_at, traj)
        err.outputs = outputs
        raise err
    return outputs


def sweep_command(scenario_path: str, out_dir: str, param: str, values,
                  overrides=(), max_workers: int = 4) -> str:
    """Fan out one run per parameter value and merge a summary, sorted by name."""
    os.makedirs(out_dir, exist_ok=True)
    key = param if "." in param else f"params.{param}"
    jobs = []
    for value in values:
        label = f"{param}={value:g}" if isinstance(value, float) else f"{param}={value}"
        jobs.append((label, tuple(overrides) + ((key, value),)))

    def one(job):
        label, ovr = job
        sub = os.path.join(out_dir, label)
        loaded = load_scenario_file(scenario_path, ovr)
        theta_star = centralized_optimum(list(loaded.scenario.costs), 1e-12)
        try:
            traj = run(loaded.scenario)
            diverged_at = None
        except DivergenceError as exc:
            traj, diverged_at = exc.trajectory, exc.time
        rep = convergence_report(traj, theta_star)
        write_outputs(loaded, sub, traj, rep, diverged_at)
        return label, rep.final_error, rep.fitted_rate, diverged_at is not None

    with concurrent.futures.ThreadPoolExecutor(max_workers=max_workers) as pool:
        rows = list(pool.map(one, jobs))
    rows.sort(key=lambda r: r[0])
    summary = os.path.join(out_dir, "sweep.csv")
    lines = ["name,final_error,fitted_rate,diverged"]
    lines += [f"{name},{_fmt(err)},{_fmt(rate)},{'1' if div else '0'}"
              for name, err, rate, div in rows]
    _write_atomic(summary, lines)
    return summary


def check_command(scenario_path: str, overrides=()) -> int:
    """Validate a scenario and print its attack-condition report, no simulation."""
    loaded = load_scenario_file(scenario_path, overrides)
    for line in _conditions_lines(loaded.scenario, loaded.budget):
        print(line)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="resopt",
                                     description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate a scenario file")
    p_run.add_argument("scenario")
    p_run.add_argument("--out", required=True)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY=VALUE")

    p_preset = sub.add_parser("preset", help="write a bundled scenario file")
    p_preset.add_argument("name", choices=PRESET_NAMES)
    p_preset.add_argument("--out", required=True)

    p_sweep = sub.add_parser("sweep", help="run a scenario across parameter values")
    p_sweep.add_argument("scenario")
    p_sweep.add_argument("--param", required=True)
    p_sweep.add_argument("--values", required=True)
    p_sweep.add_argument("--out", required=True)
    p_sweep.add_argument("--set", dest="overrides", action="append", default=[],
                         metavar="KEY=VALUE")

    p_check = sub.add_parser("check", help="validate and report conditions only")
    p_check.add_argument("scenario")
    p_check.add_argument("--set", dest="overrides", action="append", default=[],
                         metavar="KEY=VALUE")

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            overrides = [parse_override(o) for o in args.overrides]
            if args.seed is not None:
                overrides.append(("sim.seed", args.seed))
            outputs = run_command(args.scenario, args.out, overrides)
            print(f"wrote {outputs.trajectory_csv}")
            return 0
        if args.command == "preset":
            doc = preset(args.name)
            _write_atomic(args.out, [json.dumps(doc, indent=2)])
            print(f"wrote {args.out}")
            return 0
        if args.command == "sweep":
            overrides = [parse_override(o) for o in args.overrides]
            values = [json.loads(v) for v in args.values.split(",")]
            summary = sweep_command(args.scenario, args.out, args.param, values,
                                    overrides)
            print(f"wrote {summary}")
            return 0
        if args.command == "check":
            overrides = [parse_override(o) for o in args.overrides]
            return check_command(args.scenario, overrides)
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ResoptError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
