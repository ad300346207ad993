"""Command-line front end: solve thresholds, emit value grids, run checks.

Subcommands
    solve       print the threshold report (optionally write it as JSON)
    value-grid  write a CSV of x, g, Lambda, value and perturbed values
    verify      run Monte Carlo and generator-residual checks, emit JSON

Configs are single JSON files; the schema lives in docs/config.md.  Exit
codes: 0 success, 2 config or flag validation failure, 3 solver failure,
4 verification failure (the report is still written).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConvergenceFailure,
    InfeasibleThresholds,
    InvalidInitialDistribution,
    InvalidSubgenerator,
    LevyStopError,
)
from .levy_model import LevyModel, build_model
from .multi_stage import (
    MultiStageSpec,
    lambda_cluster,
    merge_stages,
    multi_stage,
    perturbed_value,
    solve_cluster_threshold,
    solve_partition,
)
from .one_stage import DEFAULT_A_MAX, ROOT_XTOL, StageSpec
from .payoffs import exp_cap, g_eval, linear_floor, reward, simple, weighted_sum
from .scale_fn import IMAG_TOL, first_passage_functionals, make_context
from .verify import (
    generator_residual,
    sim_config,
    simulate_strategy,
    simulate_two_sided,
)

log = logging.getLogger("levystop")

_LOG_LEVELS = {
    "error": logging.ERROR,
    "warn": logging.WARNING,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}

# verify-report acceptance bounds
_Z_LIMIT = 3.0
_RESIDUAL_REL_ABOVE = 1e-4
_RESIDUAL_BELOW = 1e-6

_F_VARIANTS = ("simple", "linear", "exponential")


class ConfigError(Exception):
    """Config or flag rejected; the message starts with the field path."""

    def __init__(self, path: str, msg: str):
        super().__init__(f"{path}: {msg}")
        self.path = path


# ---------------------------------------------------------------------------
# config loading


def _as_dict(val, path):
    if not isinstance(val, dict):
        raise ConfigError(path, "expected a JSON object")
    return val

def _as_list(val, path):
    if not isinstance(val, list):
        raise ConfigError(path, "expected a JSON array")
    return val

def _require(obj, key, path):
    if key not in obj:
        raise ConfigError(f"{path}.{key}", "missing required field")
    return obj[key]

def _num(val, path, minimum=None, exclusive=False):
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(path, "expected a number")
    val = float(val)
    if not math.isfinite(val):
        raise ConfigError(path, "must be finite")
    if minimum is not None:
        if exclusive and not val > minimum:
            raise ConfigError(path, f"must be > {minimum}")
        if not exclusive and not val >= minimum:
            raise ConfigError(path, f"must be >= {minimum}")
    return val

def _int(val, path, minimum):
    if isinstance(val, bool) or not isinstance(val, int):
        raise ConfigError(path, "expected an integer")
    if val < minimum:
        raise ConfigError(path, f"must be >= {minimum}")
    return val

def _no_unknown(obj, allowed, path):
    for key in obj:
        if key not in allowed:
            raise ConfigError(f"{path}.{key}" if path else key, "unknown field")


def _parse_model(obj, path="model"):
    obj = _as_dict(obj, path)
    _no_unknown(obj, {"mu", "sigma", "lambda", "alpha", "T"}, path)
    mu = _num(_require(obj, "mu", path), f"{path}.mu")
    sigma = _num(
        _require(obj, "sigma", path), f"{path}.sigma", minimum=0.0, exclusive=True
    )
    lamb = _num(_require(obj, "lambda", path), f"{path}.lambda", minimum=0.0)

    has_jump = "alpha" in obj or "T" in obj
    if lamb > 0 and not has_jump:
        raise ConfigError(f"{path}.alpha", "required when lambda > 0")
    if has_jump:
        alpha_raw = _as_list(_require(obj, "alpha", path), f"{path}.alpha")
        t_raw = _as_list(_require(obj, "T", path), f"{path}.T")
        alpha = [_num(v, f"{path}.alpha[{i}]") for i, v in enumerate(alpha_raw)]
        T = []
        for i, row in enumerate(t_raw):
            row = _as_list(row, f"{path}.T[{i}]")
            if len(row) != len(t_raw):
                raise ConfigError(f"{path}.T[{i}]", "matrix must be square")
            T.append([_num(v, f"{path}.T[{i}][{j}]") for j, v in enumerate(row)])
    else:
        # jump part unused at lambda = 0; any valid phase data will do
        alpha, T = [1.0], [[-1.0]]

    try:
        model = build_model(mu, sigma, lamb, alpha, T)
    except InvalidInitialDistribution as exc:
        raise ConfigError(f"{path}.alpha", str(exc)) from exc
    except InvalidSubgenerator as exc:
        raise ConfigError(f"{path}.T", str(exc)) from exc
    except LevyStopError as exc:
        raise ConfigError(path, str(exc)) from exc
    return model, (alpha if has_jump else None), (T if has_jump else None)


def _parse_reward(obj, path):
    obj = _as_dict(obj, path)
    _no_unknown(obj, {"K", "b", "terms"}, path)
    K = _num(_require(obj, "K", path), f"{path}.K")
    b = _num(obj.get("b", 0.0), f"{path}.b")
    terms = []
    for j, term in enumerate(_as_list(obj.get("terms", []), f"{path}.terms")):
        term = _as_dict(term, f"{path}.terms[{j}]")
        _no_unknown(term, {"a", "c"}, f"{path}.terms[{j}]")
        terms.append(
            (
                _num(_require(term, "a", f"{path}.terms[{j}]"), f"{path}.terms[{j}].a"),
                _num(_require(term, "c", f"{path}.terms[{j}]"), f"{path}.terms[{j}].c"),
            )
        )
    try:
        return reward(K, b, terms)
    except LevyStopError as exc:
        raise ConfigError(path, str(exc)) from exc


def _parse_running_atom(obj, path):
    """One running-payoff entry -> (atom, weight, normalized params dict)."""
    obj = _as_dict(obj, path)
    _no_unknown(obj, {"variant", "params", "weight"}, path)
    variant = _require(obj, "variant", path)
    if variant not in _F_VARIANTS:
        raise ConfigError(f"{path}.variant", f"expected one of {_F_VARIANTS}")
    weight = _num(_require(obj, "weight", path), f"{path}.weight", minimum=0.0)
    params = _as_dict(_require(obj, "params", path), f"{path}.params")
    ppath = f"{path}.params"
    try:
        if variant == "simple":
            _no_unknown(params, {"breakpoints", "values"}, ppath)
            breakpoints = [
                _num(v, f"{ppath}.breakpoints[{i}]")
                for i, v in enumerate(
                    _as_list(_require(params, "breakpoints", ppath), f"{ppath}.breakpoints")
                )
            ]
            values = [
                _num(v, f"{ppath}.values[{i}]")
                for i, v in enumerate(
                    _as_list(_require(params, "values", ppath), f"{ppath}.values")
                )
            ]
            atom = simple(breakpoints, values)
            norm = {"breakpoints": breakpoints, "values": values}
        elif variant == "linear":
            _no_unknown(params, {"b1", "b2", "b3"}, ppath)
            b1 = _num(_require(params, "b1", ppath), f"{ppath}.b1")
            b2 = _num(_require(params, "b2", ppath), f"{ppath}.b2")
            b3_raw = params.get("b3", "-inf")
            if b3_raw == "-inf" or b3_raw is None:
                b3 = -math.inf
            else:
                b3 = _num(b3_raw, f"{ppath}.b3")
            atom = linear_floor(b1, b2, b3)
            norm = {"b1": b1, "b2": b2, "b3": "-inf" if b3 == -math.inf else b3}
        else:
            _no_unknown(params, {"L", "B"}, ppath)
            L = _num(_require(params, "L", ppath), f"{ppath}.L")
            B = _num(_require(params, "B", ppath), f"{ppath}.B")
            atom = exp_cap(L, B)
            norm = {"L": L, "B": B}
    except ConfigError:
        raise
    except LevyStopError as exc:
        raise ConfigError(ppath, str(exc)) from exc
    return atom, weight, {"variant": variant, "params": norm}


def _difference_weights(entries, mode):
    """Per-stage (atom, weight) in difference form.

    In cumulative mode entry m holds F_m = sum_{k>=m} f_k; recovering the
    differences needs every consecutive pair to share the same atom with a
    nonincreasing weight, since the closed payoff families are not stable
    under arbitrary subtraction.
    """
    if mode == "difference":
        return [(atom, w) for atom, w, _ in entries]
    out = []
    for i, (atom, w, _) in enumerate(entries):
        if i + 1 < len(entries):
            atom_next, w_next, _ = entries[i + 1]
            if atom_next != atom:
                raise ConfigError(
                    f"stages[{i + 1}].f",
                    "cumulative mode needs every stage to share one atom "
                    "(same variant and params) so differences stay in-family",
                )
            if w_next > w:
                raise ConfigError(
                    f"stages[{i + 1}].f.weight",
                    "cumulative weights must be nonincreasing across stages",
                )
            out.append((atom, w - w_next))
        else:
            out.append((atom, w))
    return out


@dataclass
class Problem:
    model: LevyModel
    r: float
    spec: MultiStageSpec
    a_max: float
    root_tol: float
    imag_tol: float
    x_min: float
    x_max: float
    n_points: int
    sim: object  # SimConfig | None
    normalized: dict


def _parse_problem(raw) -> Problem:
    raw = _as_dict(raw, "config")
    _no_unknown(
        raw,
        {"model", "r", "stages", "solver", "output", "simulate", "running_payoff_mode"},
        "",
    )
    model, alpha_norm, t_norm = _parse_model(_require(raw, "model", "config"))
    r = _num(_require(raw, "r", "config"), "r", minimum=0.0, exclusive=True)

    mode = raw.get("running_payoff_mode", "difference")
    if mode not in ("difference", "cumulative"):
        raise ConfigError(
            "running_payoff_mode", "expected 'difference' or 'cumulative'"
        )

    stages_raw = _as_list(_require(raw, "stages", "config"), "stages")
    if not stages_raw:
        raise ConfigError("stages", "at least one stage required")
    rewards, entries = [], []
    for i, st in enumerate(stages_raw):
        st = _as_dict(st, f"stages[{i}]")
        _no_unknown(st, {"g", "f"}, f"stages[{i}]")
        rewards.append(_parse_reward(_require(st, "g", f"stages[{i}]"), f"stages[{i}].g"))
        entries.append(_parse_running_atom(_require(st, "f", f"stages[{i}]"), f"stages[{i}].f"))
    diffs = _difference_weights(entries, mode)
    stages = [
        StageSpec(f=weighted_sum([(w, atom)]), g=g)
        for (atom, w), g in zip(diffs, rewards)
    ]
    spec = multi_stage(stages)

    solver = _as_dict(raw.get("solver", {}), "solver")
    _no_unknown(solver, {"a_max", "root_tol", "imag_tol"}, "solver")
    a_max = _num(solver.get("a_max", DEFAULT_A_MAX), "solver.a_max", minimum=1.0, exclusive=True)
    root_tol = _num(solver.get("root_tol", ROOT_XTOL), "solver.root_tol", minimum=0.0, exclusive=True)
    if root_tol > 1e-3:
        raise ConfigError("solver.root_tol", "must be <= 1e-3")
    imag_tol = _num(solver.get("imag_tol", IMAG_TOL), "solver.imag_tol", minimum=0.0, exclusive=True)

    output = _as_dict(_require(raw, "output", "config"), "output")
    _no_unknown(output, {"x_min", "x_max", "n_points"}, "output")
    x_min = _num(_require(output, "x_min", "output"), "output.x_min")
    x_max = _num(_require(output, "x_max", "output"), "output.x_max")
    if x_max <= x_min:
        raise ConfigError("output.x_max", "must exceed output.x_min")
    n_points = _int(_require(output, "n_points", "output"), "output.n_points", minimum=2)

    sim = None
    sim_norm = None
    if "simulate" in raw:
        sobj = _as_dict(raw["simulate"], "simulate")
        _no_unknown(sobj, {"n_paths", "dt", "horizon", "seed", "antithetic"}, "simulate")
        n_paths = _int(_require(sobj, "n_paths", "simulate"), "simulate.n_paths", minimum=1)
        dt = _num(_require(sobj, "dt", "simulate"), "simulate.dt", minimum=0.0, exclusive=True)
        horizon = _num(_require(sobj, "horizon", "simulate"), "simulate.horizon", minimum=0.0, exclusive=True)
        seed = _int(sobj.get("seed", 0), "simulate.seed", minimum=0)
        antithetic = sobj.get("antithetic", False)
        if not isinstance(antithetic, bool):
            raise ConfigError("simulate.antithetic", "expected a boolean")
        try:
            sim = sim_config(
                n_paths=n_paths, dt=dt, horizon=horizon, seed=seed, antithetic=antithetic
            )
        except LevyStopError as exc:
            raise ConfigError("simulate", str(exc)) from exc
        sim_norm = {
            "n_paths": n_paths,
            "dt": dt,
            "horizon": horizon,
            "seed": seed,
            "antithetic": antithetic,
        }

    model_norm = {"mu": model.mu, "sigma": model.sigma, "lambda": model.lamb}
    if alpha_norm is not None:
        model_norm["alpha"] = alpha_norm
        model_norm["T"] = t_norm
    normalized = {
        "model": model_norm,
        "r": r,
        "running_payoff_mode": "difference",
        "stages": [
            {
                "g": {
                    "K": g.K,
                    "b": g.b,
                    "terms": [{"a": a, "c": c} for a, c in g.terms],
                },
                "f": {**fnorm, "weight": w},
            }
            for ((atom, w), g, (_, _, fnorm)) in zip(diffs, rewards, entries)
        ],
        "solver": {"a_max": a_max, "root_tol": root_tol, "imag_tol": imag_tol},
        "output": {"x_min": x_min, "x_max": x_max, "n_points": n_points},
    }
    if sim_norm is not None:
        normalized["simulate"] = sim_norm

    return Problem(
        model=model,
        r=r,
        spec=spec,
        a_max=a_max,
        root_tol=root_tol,
        imag_tol=imag_tol,
        x_min=x_min,
        x_max=x_max,
        n_points=n_points,
        sim=sim,
        normalized=normalized,
    )


def load_config(path) -> Problem:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON in {path}: {exc}") from exc
    return _parse_problem(raw)


# ---------------------------------------------------------------------------
# shared solving and formatting


def _solve(problem):
    """Context, memoized per-cluster resolver, and the solved partition."""
    ctx = make_context(problem.model, r=problem.r, imag_tol=problem.imag_tol)
    cache, visited = {}, []

    def resolver(cluster):
        key = tuple(cluster)
        if key not in cache:
            cache[key] = solve_cluster_threshold(
                problem.spec, ctx, key, a_max=problem.a_max, xtol=problem.root_tol
            )
            visited.append((key, cache[key]))
            log.info("cluster %s -> threshold %r", set(key), cache[key])
        return cache[key]

    partition = solve_partition(problem.spec, ctx, resolver=resolver)
    return ctx, resolver, partition, visited


def _fmt_threshold(a: float) -> str:
    if a == math.inf:
        return "+inf (stop immediately)"
    if a == -math.inf:
        return "-inf (never stop)"
    return repr(float(a))


def _json_num(v):
    v = float(v)
    if v == math.inf:
        return "+inf"
    if v == -math.inf:
        return "-inf"
    return v


def _fmt_cluster(cluster) -> str:
    return "{" + ",".join(str(m) for m in cluster) + "}"


def _write_text(path, text):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# subcommands


def cmd_solve(problem: Problem, args) -> int:
    ctx, resolver, partition, visited = _solve(problem)
    M = problem.spec.M
    singles = [resolver((m,)) for m in range(1, M + 1)]
    per_stage = partition.per_stage_thresholds

    lines = [f"stages: {M}"]
    if M == 1:
        lines.append(f"A* = {_fmt_threshold(singles[0])}")
    else:
        for m, a in enumerate(singles, start=1):
            lines.append(f"A*_{m} = {_fmt_threshold(a)}")
    lines.append("visited clusters:")
    for cluster, a in visited:
        lines.append(f"  {_fmt_cluster(cluster)} -> {_fmt_threshold(a)}")
    lines.append(
        "partition: " + " ".join(_fmt_cluster(c) for c in partition.clusters)
    )
    lines.append(
        "per-stage thresholds: " + " ".join(_fmt_threshold(a) for a in per_stage)
    )
    print("\n".join(lines))

    if args.out is not None:
        report = {
            "M": M,
            "per_stage_singletons": [_json_num(a) for a in singles],
            "visited_clusters": [
                {"cluster": list(c), "threshold": _json_num(a)} for c, a in visited
            ],
            "partition": {
                "clusters": [list(c) for c in partition.clusters],
                "thresholds": [_json_num(a) for a in partition.thresholds],
            },
            "per_stage_thresholds": [_json_num(a) for a in per_stage],
        }
        _write_text(args.out, json.dumps(report, indent=2) + "\n")
    return 0


def _parse_vector(text, M, flag):
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != M:
        raise ConfigError(flag, f"expected {M} comma-separated numbers, got {len(parts)}")
    try:
        return [float(p) for p in parts]
    except ValueError as exc:
        raise ConfigError(flag, f"not a number: {exc}") from exc


def cmd_value_grid(problem: Problem, args) -> int:
    ctx, _, partition, _ = _solve(problem)
    M = problem.spec.M
    per_stage = np.asarray(partition.per_stage_thresholds)
    deltas = [
        _parse_vector(text, M, f"--perturb[{k}]")
        for k, text in enumerate(args.perturb or [])
    ]
    perturbed = []
    for k, d in enumerate(deltas):
        thr = per_stage + np.asarray(d)
        if np.any(np.diff(thr) > 0.0):
            raise ConfigError(
                f"--perturb[{k}]", f"thresholds {thr.tolist()} are not nonincreasing"
            )
        perturbed.append(thr)

    if M == 1:
        lam_cols = ["lambda"]
    else:
        lam_cols = [f"lambda_{i + 1}" for i in range(len(partition.clusters))]
    header = (
        ["x", "g"]
        + lam_cols
        + ["value"]
        + [f"perturbed_{k + 1}" for k in range(len(perturbed))]
    )

    xs = np.linspace(problem.x_min, problem.x_max, problem.n_points)
    rows = []
    for x in xs:
        x = float(x)
        g_sum = sum(g_eval(st.g, x) for st in problem.spec.stages)
        lams = [
            lambda_cluster(problem.spec, ctx, cluster, x)
            for cluster in partition.clusters
        ]
        val = perturbed_value(problem.spec, ctx, per_stage, x)
        row = [x, g_sum, *lams, val]
        for thr in perturbed:
            row.append(perturbed_value(problem.spec, ctx, thr, x))
        rows.append(row)

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) for v in row])
    _write_text(args.out, buf.getvalue())
    return 0


def cmd_verify(problem: Problem, args) -> int:
    if problem.sim is None:
        raise ConfigError("simulate", "section required for verify")
    ctx, _, partition, _ = _solve(problem)
    M = problem.spec.M
    solved = np.asarray(partition.per_stage_thresholds, dtype=float)

    cfg = problem.sim
    if args.seed is not None:
        cfg = sim_config(
            n_paths=cfg.n_paths,
            dt=cfg.dt,
            horizon=cfg.horizon,
            seed=args.seed,
            antithetic=cfg.antithetic,
        )

    override = None
    if args.thresholds is not None:
        override = np.asarray(_parse_vector(args.thresholds, M, "--thresholds"))
        if np.any(np.diff(override) > 0.0):
            raise ConfigError(
                "--thresholds", f"{override.tolist()} is not nonincreasing"
            )
    used = solved if override is None else override

    x0 = problem.x_min + 0.75 * (problem.x_max - problem.x_min)
    a_top = float(used[0])
    if math.isfinite(a_top) and x0 <= a_top:
        # starting at or below the first trigger stops immediately and the
        # comparison degenerates; lift the start into the continuation region
        x0 = a_top + 0.25 * (problem.x_max - a_top) if problem.x_max > a_top else a_top + 0.5
    analytic = perturbed_value(problem.spec, ctx, used, x0)
    est = simulate_strategy(
        problem.model, problem.r, list(problem.spec.stages), used, x0, cfg
    )
    z = 0.0 if est.std_error == 0.0 else (est.mean - analytic) / est.std_error
    strategy_pass = abs(z) <= _Z_LIMIT
    report = {
        "strategy": {
            "x0": x0,
            "thresholds": [_json_num(a) for a in used],
            "override": override is not None,
            "mc_mean": est.mean,
            "mc_std_error": est.std_error,
            "n_paths": est.n,
            "truncation_bound": est.truncation_bound,
            "analytic": analytic,
            "z": z,
            "pass": strategy_pass,
        }
    }

    fx, fb = 1.0, 2.0
    up, down = simulate_two_sided(problem.model, problem.r, fx, fb, cfg)
    ident = first_passage_functionals(ctx, fx, fb)
    z_up = 0.0 if up.std_error == 0.0 else (up.mean - ident.up) / up.std_error
    z_down = 0.0 if down.std_error == 0.0 else (down.mean - ident.down) / down.std_error
    fluct_pass = abs(z_up) <= _Z_LIMIT and abs(z_down) <= _Z_LIMIT
    report["fluctuation"] = {
        "x": fx,
        "b": fb,
        "up": {
            "mc_mean": up.mean,
            "mc_std_error": up.std_error,
            "analytic": ident.up,
            "z": z_up,
        },
        "down": {
            "mc_mean": down.mean,
            "mc_std_error": down.std_error,
            "analytic": ident.down,
            "z": z_down,
        },
        "pass": fluct_pass,
    }

    top = merge_stages(problem.spec, partition.clusters[0])
    a_top = partition.thresholds[0]
    if math.isfinite(a_top):
        above = np.linspace(a_top + 0.1, a_top + 5.0, 20)
        below = np.linspace(a_top - 5.0, a_top - 0.1, 20)
        max_rel = 0.0
        for x in above:
            res = generator_residual(top, ctx, a_top, float(x))
            uval = perturbed_value(problem.spec, ctx, solved, float(x))
            max_rel = max(max_rel, abs(res) / (1.0 + abs(uval)))
        max_below = -math.inf
        for x in below:
            max_below = max(max_below, generator_residual(top, ctx, a_top, float(x)))
        residual_pass = max_rel <= _RESIDUAL_REL_ABOVE and max_below <= _RESIDUAL_BELOW
        report["generator_residual"] = {
            "threshold": _json_num(a_top),
            "max_rel_above": max_rel,
            "max_signed_below": max_below,
            "skipped": False,
            "pass": residual_pass,
        }
    else:
        residual_pass = True
        report["generator_residual"] = {
            "threshold": _json_num(a_top),
            "skipped": True,
            "pass": True,
        }

    dominance_pass = True
    if override is not None:
        optimal = perturbed_value(problem.spec, ctx, solved, x0)
        margin = 1e-8 * (1.0 + abs(optimal))
        dominance_pass = optimal >= analytic - margin
        report["dominance"] = {
            "analytic_optimal": optimal,
            "analytic_override": analytic,
            "optimal_strictly_larger": optimal > analytic,
            "pass": dominance_pass,
        }

    ok = strategy_pass and fluct_pass and residual_pass and dominance_pass
    report["pass"] = ok
    text = json.dumps(report, indent=2) + "\n"
    sys.stdout.write(text)
    if args.out is not None:
        _write_text(args.out, text)
    return 0 if ok else 4


# ---------------------------------------------------------------------------
# entry point


def _setup_logging():
    raw = os.environ.get("LEVYSTOP_LOG", "warn").lower()
    level = _LOG_LEVELS.get(raw)
    if level is None:
        print(f"LEVYSTOP_LOG: unknown level {raw!r}, using warn", file=sys.stderr)
        level = logging.WARNING
    logging.basicConfig(stream=sys.stderr, format="%(levelname)s %(message)s")
    log.setLevel(level)


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="levystop",
        description="Optimal stopping thresholds for spectrally negative "
        "Levy processes with phase-type jumps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="path to a JSON problem config")
        p.add_argument("--out", default=None, help="write the result to this file")
        p.add_argument(
            "--echo-config",
            action="store_true",
            help="validate, print the normalized config as JSON, and exit",
        )

    p_solve = sub.add_parser("solve", help="solve thresholds and print a report")
    common(p_solve)

    p_grid = sub.add_parser("value-grid", help="emit a CSV value grid")
    common(p_grid)
    p_grid.add_argument(
        "--perturb",
        action="append",
        metavar="D1,...,DM",
        help="extra value column with per-stage thresholds shifted by this "
        "vector; repeatable",
    )

    p_verify = sub.add_parser("verify", help="Monte Carlo and residual checks")
    common(p_verify)
    p_verify.add_argument("--seed", type=int, default=None, help="override simulate.seed")
    p_verify.add_argument(
        "--thresholds",
        metavar="A1,...,AM",
        default=None,
        help="simulate this per-stage threshold vector instead of the solved one",
    )

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    _setup_logging()
    try:
        problem = load_config(args.config)
        if args.echo_config:
            print(json.dumps(problem.normalized, indent=2))
            return 0
        if args.command == "solve":
            return cmd_solve(problem, args)
        if args.command == "value-grid":
            return cmd_value_grid(problem, args)
        return cmd_verify(problem, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except InfeasibleThresholds as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ConvergenceFailure as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 3
    except LevyStopError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
