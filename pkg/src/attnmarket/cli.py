"""Command-line interface: scenario ingestion, dispatch, report emission.

Exit codes: 0 success, 1 input error, 2 condition failure, 3 runtime
limit.  All emitted CSV files are byte-deterministic for a fixed
(scenario, command, seed) triple; numbers are written in shortest
round-trip decimal form.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np
import yaml

from .conditions import check_assumption2, check_mnat_concave, check_substitutes
from .decision import DecisionProblem
from .environment import ComponentSpace, JointPrior
from .equilibrium import aon_rates, marginal_prices
from .errors import (
    AssumptionViolated,
    AttnMarketError,
    BudgetExceeded,
    ConditionNotVerified,
    RoundLimitExceeded,
    ScenarioError,
)
from .gaussian import (
    CorrelatedScenario,
    GaussianScenario,
    bridge_mc_check,
    bridge_schedule,
    correlation_threshold,
    gaussian_rates,
    gaussian_receiver_payoff,
    large_n_gaussian,
    payoff_at_alpha,
    symmetry_gap,
)
from .largemarket import (
    decision_error_curve,
    default_environment,
    fit_exponential_rate,
    residual_value_curve,
)
from .simulate import (
    FixedOrder,
    RandomOrder,
    _Runner,
    episode_rng,
    equilibrium_policies,
)

SCHEMA_VERSION = 1
OUT_ENV_VAR = "ATTNMARKET_OUT"

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_CONDITION = 2
EXIT_RUNTIME = 3


def fmt(x) -> str:
    """Shortest round-trip decimal for floats; plain str otherwise."""
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return str(x)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


# -- scenario files -------------------------------------------------------------


@dataclass
class Scenario:
    name: str
    description: str
    cost: float | None
    prior: JointPrior | None
    dp: DecisionProblem | None
    gaussian: dict | None
    simulation: dict = field(default_factory=dict)

    @property
    def finite(self) -> bool:
        return self.prior is not None


def _need(mapping, key, where):
    if key not in mapping:
        raise ScenarioError(f"missing '{key}' in {where}")
    return mapping[key]


def _positive(value, where):
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise ScenarioError(f"{where} must be a number, got {value!r}") from None
    if out <= 0:
        raise ScenarioError(f"{where} must be positive, got {out}")
    return out


def _row_sum_check(row, where):
    total = float(np.sum(row))
    if abs(total - 1.0) > 1e-9:
        raise ScenarioError(f"{where} sums to {total!r}, not 1")


def load_scenario(path) -> Scenario:
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except FileNotFoundError:
        raise ScenarioError(f"scenario file not found: {path}") from None
    except yaml.YAMLError as exc:
        raise ScenarioError(f"invalid YAML in {path}: {exc}") from None
    if not isinstance(raw, dict):
        raise ScenarioError("scenario file must be a mapping")
    version = raw.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ScenarioError(
            f"schema_version must be {SCHEMA_VERSION}, got {version!r}")

    has_finite = "components" in raw
    has_gaussian = "gaussian" in raw
    if has_finite == has_gaussian:
        raise ScenarioError(
            "exactly one of a finite environment (components/prior/decision) "
            "or a gaussian block must be present")

    cost = raw.get("cost")
    if cost is not None:
        cost = _positive(cost, "cost")

    prior = dp = gaussian = None
    if has_finite:
        if cost is None:
            raise ScenarioError("missing 'cost' for a finite environment")
        prior, dp = _parse_finite(raw)
    else:
        gaussian = _parse_gaussian(_need(raw, "gaussian", "scenario"))

    simulation = raw.get("simulation") or {}
    if not isinstance(simulation, dict):
        raise ScenarioError("'simulation' must be a mapping")
    return Scenario(
        name=str(raw.get("name", os.path.basename(str(path)))),
        description=str(raw.get("description", "")),
        cost=cost,
        prior=prior,
        dp=dp,
        gaussian=gaussian,
        simulation=simulation,
    )


def _parse_finite(raw):
    comp = _need(raw, "components", "scenario")
    state_values = comp.get("state") or ["-"]
    senders = _need(comp, "senders", "components")
    if not isinstance(senders, list) or not senders:
        raise ScenarioError("components.senders must list at least one sender")
    spaces = [ComponentSpace(0, tuple(state_values))]
    for i, values in enumerate(senders, start=1):
        if not isinstance(values, list) or not values:
            raise ScenarioError(f"components.senders[{i - 1}] must be a "
                                "non-empty list of values")
        spaces.append(ComponentSpace(i, tuple(values)))
    shape = tuple(s.size for s in spaces)

    prior_block = _need(raw, "prior", "scenario")
    if ("dense" in prior_block) == ("product" in prior_block):
        raise ScenarioError("prior must have exactly one of 'dense' or 'product'")
    if "dense" in prior_block:
        flat = np.asarray(prior_block["dense"], dtype=float).ravel()
        if flat.size != int(np.prod(shape)):
            raise ScenarioError(
                f"prior.dense has {flat.size} entries, expected "
                f"{int(np.prod(shape))} (row-major over state x senders)")
        _row_sum_check(flat, "prior.dense")
        mass = flat.reshape(shape)
    else:
        product = prior_block["product"]
        marginal = np.asarray(_need(product, "state", "prior.product"),
                              dtype=float)
        if marginal.shape != (shape[0],):
            raise ScenarioError("prior.product.state length must match the "
                                "state value list")
        _row_sum_check(marginal, "prior.product.state")
        conds = _need(product, "conditionals", "prior.product")
        if len(conds) != len(senders):
            raise ScenarioError("prior.product.conditionals needs one matrix "
                                "per sender")
        mass = marginal.reshape((shape[0],) + (1,) * len(senders))
        for i, rows in enumerate(conds, start=1):
            table = np.asarray(rows, dtype=float)
            if table.shape != (shape[0], shape[i]):
                raise ScenarioError(
                    f"prior.product.conditionals[{i - 1}] must be "
                    f"{shape[0]} rows x {shape[i]} values")
            for r in range(shape[0]):
                _row_sum_check(
                    table[r],
                    f"prior.product.conditionals[{i - 1}] row {r}")
            block_shape = [1] * len(shape)
            block_shape[0] = shape[0]
            block_shape[i] = shape[i]
            mass = mass * table.reshape(block_shape)
    try:
        prior = JointPrior(spaces, mass)
    except ValueError as exc:
        raise ScenarioError(f"invalid prior: {exc}") from None

    decision = _need(raw, "decision", "scenario")
    actions = _need(decision, "actions", "decision")
    if not isinstance(actions, list) or not actions:
        raise ScenarioError("decision.actions must be a non-empty list")
    utility = _need(decision, "utility", "decision")
    if ("by_state" in utility) == ("by_joint" in utility):
        raise ScenarioError(
            "decision.utility must have exactly one of 'by_state' or 'by_joint'")
    if "by_state" in utility:
        table = []
        for a in actions:
            row = _need(utility["by_state"], a, "decision.utility.by_state")
            row = np.asarray(row, dtype=float)
            if row.shape != (shape[0],):
                raise ScenarioError(
                    f"utility.by_state[{a!r}] must list one value per "
                    "state realization")
            table.append(row)
        dp = DecisionProblem.from_state_table(actions, np.stack(table),
                                              len(shape))
    else:
        blocks = []
        for a in actions:
            row = np.asarray(
                _need(utility["by_joint"], a, "decision.utility.by_joint"),
                dtype=float).ravel()
            if row.size != int(np.prod(shape)):
                raise ScenarioError(
                    f"utility.by_joint[{a!r}] has {row.size} entries, "
                    f"expected {int(np.prod(shape))}")
            blocks.append(row.reshape(shape))
        dp = DecisionProblem(actions, np.stack(blocks))
    return prior, dp


def _parse_gaussian(block) -> dict:
    if not isinstance(block, dict):
        raise ScenarioError("'gaussian' must be a mapping")
    p0 = _positive(_need(block, "p0", "gaussian"), "gaussian.p0")
    p = [_positive(x, "gaussian.p[]") for x in _need(block, "p", "gaussian")]
    out = {"p0": p0, "p": tuple(p)}
    if "pc" in block:
        out["pc"] = _positive(block["pc"], "gaussian.pc")
        if len(p) != 2:
            raise ScenarioError("a correlated gaussian block needs exactly "
                                "two senders")
    if "alpha" in block:
        alpha = float(block["alpha"])
        if not 0.0 <= alpha <= 1.0:
            raise ScenarioError("gaussian.alpha must lie in [0, 1]")
        out["alpha"] = alpha
    return out


# -- run reports ----------------------------------------------------------------


@dataclass
class RunReport:
    command: str
    scenario: str
    condition_reports: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    files: list = field(default_factory=list)
    wall_clock: float = 0.0

    def to_dict(self) -> dict:
        # wall clock stays out: reports must be byte-stable across reruns
        return {
            "command": self.command,
            "scenario": self.scenario,
            "conditions": {k: v.to_dict() for k, v in
                           self.condition_reports.items()},
            "summary": self.summary,
            "files": [os.path.basename(f) for f in self.files],
        }

    def write(self, out_dir):
        path = os.path.join(out_dir, "report.json")
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        self.files.append(path)
        return path


def _out_dir(args) -> str:
    out = args.out or os.environ.get(OUT_ENV_VAR) or "out"
    os.makedirs(out, exist_ok=True)
    return out


def _print_conditions(reports):
    print(f"{'condition':<14} {'holds':<6} {'margin':>12}  witnesses")
    for name, rep in reports.items():
        margin = "n/a" if rep.margin == np.inf else f"{rep.margin:.6g}"
        print(f"{name:<14} {str(rep.holds):<6} {margin:>12}  "
              f"{len(rep.witnesses)}")
        for w in rep.witnesses[:3]:
            print(f"    {w}")


# -- commands -------------------------------------------------------------------


def cmd_check(args) -> int:
    scenario = load_scenario(args.scenario)
    if not scenario.finite:
        raise ScenarioError("'check' needs a finite environment block")
    seed = args.seed if args.seed is not None else 0
    start = time.perf_counter()
    reports = {
        "assumption2": check_assumption2(scenario.dp, scenario.prior,
                                         scenario.cost),
        "substitutes": check_substitutes(scenario.dp, scenario.prior,
                                         samples=args.su_samples,
                                         seed=seed),
        "mnat_concave": check_mnat_concave(scenario.dp, scenario.prior),
    }
    report = RunReport("check", scenario.name, reports,
                       wall_clock=time.perf_counter() - start)
    _print_conditions(reports)
    if args.out:
        report.write(_out_dir(args))
        print(f"report: {report.files[-1]}")
    print(f"wall clock: {report.wall_clock:.3f}s")
    return EXIT_OK if all(r.holds for r in reports.values()) else EXIT_CONDITION


def _solve_finite(scenario, args, out):
    seed = args.seed if args.seed is not None else 0
    profile = aon_rates(scenario.dp, scenario.prior, scenario.cost,
                        force=args.force, substitutes_samples=args.su_samples,
                        seed=seed)
    files = []
    path = os.path.join(out, "profile.csv")
    write_csv(path, ["state_id", "revealed_set", "realization", "sender", "rate"],
              [(r["state_id"], r["revealed_set"], r["realization"],
                r["sender"], r["rate"]) for r in profile.rows()])
    files.append(path)

    path = os.path.join(out, "payoffs.csv")
    rows = [("expected_visits", i, v)
            for i, v in sorted(profile.sender_payoffs.items())]
    rows.append(("receiver_payoff", "", profile.receiver_payoff))
    rows.append(("cost", "", profile.cost))
    write_csv(path, ["quantity", "sender", "value"], rows)
    files.append(path)

    path = os.path.join(out, "prices.csv")
    prices = marginal_prices(scenario.dp, scenario.prior)
    write_csv(path, ["sender", "price"], sorted(prices.items()))
    files.append(path)

    summary = {
        "equilibrium": profile.equilibrium,
        "states": len(profile.graph),
        "sender_payoffs": {str(i): v for i, v in
                           sorted(profile.sender_payoffs.items())},
        "receiver_payoff": profile.receiver_payoff,
        "prices": {str(i): v for i, v in sorted(prices.items())},
    }
    return profile.reports, summary, files


def _solve_gaussian(scenario, args, out):
    g = scenario.gaussian
    if scenario.cost is None:
        raise ScenarioError("missing 'cost' for a gaussian scenario")
    s = GaussianScenario(g["p0"], g["p"], scenario.cost)
    rates = gaussian_rates(s)
    payoff = gaussian_receiver_payoff(s)
    files = []
    path = os.path.join(out, "gaussian_rates.csv")
    write_csv(path, ["sender", "precision", "rate", "expected_visits"],
              [(i + 1, s.p[i], rates[i], 1.0 / rates[i])
               for i in range(len(s.p))])
    files.append(path)
    path = os.path.join(out, "gaussian_payoffs.csv")
    write_csv(path, ["quantity", "value"], [
        ("receiver_payoff", payoff),
        ("total_precision", s.total_precision),
        ("cost", s.c),
    ])
    files.append(path)
    summary = {"rates": [float(r) for r in rates], "receiver_payoff": payoff}
    if "pc" in g:
        cs = CorrelatedScenario(g["p0"], g["p"][0], g["p"][1], g["pc"],
                                g.get("alpha", 0.0), scenario.cost)
        threshold = correlation_threshold(cs.p0, cs.p1, cs.p2)
        path = os.path.join(out, "correlation.csv")
        write_csv(path,
                  ["pc", "threshold", "payoff_independent",
                   "payoff_correlated", "prefers_correlation"],
                  [(cs.pc, threshold, payoff_at_alpha(cs, 0),
                    payoff_at_alpha(cs, 1),
                    payoff_at_alpha(cs, 1) > payoff_at_alpha(cs, 0))])
        files.append(path)
        summary["correlation_threshold"] = threshold
    return {}, summary, files


def cmd_solve(args) -> int:
    scenario = load_scenario(args.scenario)
    out = _out_dir(args)
    start = time.perf_counter()
    if scenario.finite:
        reports, summary, files = _solve_finite(scenario, args, out)
    else:
        reports, summary, files = _solve_gaussian(scenario, args, out)
    report = RunReport("solve", scenario.name, reports, summary, files,
                       time.perf_counter() - start)
    report.write(out)
    for f in report.files:
        print(f"wrote {f}")
    print(f"wall clock: {report.wall_clock:.3f}s")
    return EXIT_OK


def _receiver_policy(spec: str, n: int):
    if spec == "lowest":
        return FixedOrder()
    if spec == "random":
        return RandomOrder()
    if spec.startswith("perm:"):
        try:
            order = tuple(int(tok) for tok in spec[5:].split(","))
        except ValueError:
            raise ScenarioError(f"bad permutation spec {spec!r}") from None
        if sorted(order) != list(range(1, n + 1)):
            raise ScenarioError(
                f"receiver order {order} must permute senders 1..{n}")
        return FixedOrder(order)
    raise ScenarioError(f"unknown receiver order {spec!r}")


def cmd_simulate(args) -> int:
    scenario = load_scenario(args.scenario)
    if not scenario.finite:
        raise ScenarioError("'simulate' needs a finite environment block")
    sim = scenario.simulation
    replications = args.replications or int(sim.get("replications", 10_000))
    seed = args.seed if args.seed is not None else int(sim.get("seed", 0))
    order = args.receiver_order or str(sim.get("receiver_order", "lowest"))
    round_cap = args.round_cap or int(sim.get("round_cap", 10 ** 6))
    if replications < 1:
        raise ScenarioError("replications must be at least 1")

    out = _out_dir(args)
    start = time.perf_counter()
    profile = aon_rates(scenario.dp, scenario.prior, scenario.cost,
                        force=args.force, substitutes_samples=args.su_samples,
                        seed=seed)
    n = scenario.prior.n_senders
    policies = equilibrium_policies(profile)
    receiver = _receiver_policy(order, n)

    runner = _Runner(scenario.dp, scenario.prior, scenario.cost, policies,
                     receiver, graph=profile.graph, round_cap=round_cap)
    visit_cols = [f"visits_{i}" for i in range(1, n + 1)]
    episode_rows = []
    trace_rows = []
    traced = args.trace_episodes or 0
    visits = np.empty((replications, n))
    payoffs = np.empty(replications)
    for k in range(replications):
        trace = runner.play(episode_rng(seed, k), record=k < traced)
        for i in range(1, n + 1):
            visits[k, i - 1] = trace.visits[i]
        payoffs[k] = trace.payoff
        episode_rows.append(
            (k, trace.total_rounds, trace.cost, trace.action, trace.payoff)
            + tuple(trace.visits[i] for i in range(1, n + 1)))
        for rec in trace.rounds:
            offers = "|".join(f"{i}={fmt(r)}" for i, r in rec.offers)
            trace_rows.append((k, rec.round, offers, rec.choice,
                               "" if rec.message is None else rec.message,
                               rec.node_id))

    files = []
    path = os.path.join(out, "episodes.csv")
    write_csv(path, ["episode", "rounds", "cost", "action", "payoff"]
              + visit_cols, episode_rows)
    files.append(path)
    if traced:
        path = os.path.join(out, "trace.csv")
        write_csv(path, ["episode", "round", "offers", "choice", "message",
                         "state_id"], trace_rows)
        files.append(path)

    root = replications ** 0.5
    rows = []
    for i in range(1, n + 1):
        theory = profile.sender_payoffs[i]
        emp = float(visits[:, i - 1].mean())
        se = float(visits[:, i - 1].std(ddof=1) / root) if replications > 1 else 0.0
        rows.append((f"visits_{i}", i, theory, emp, se))
    theory = profile.receiver_payoff
    emp = float(payoffs.mean())
    se = float(payoffs.std(ddof=1) / root) if replications > 1 else 0.0
    rows.append(("receiver_payoff", "", theory, emp, se))
    path = os.path.join(out, "summary.csv")
    write_csv(path, ["quantity", "sender", "theory", "empirical", "stderr"],
              rows)
    files.append(path)

    summary = {
        "replications": replications,
        "seed": seed,
        "receiver_order": order,
        "equilibrium": profile.equilibrium,
        "theory_vs_empirical": [
            {"quantity": q, "theory": t, "empirical": e, "stderr": s}
            for q, _, t, e, s in rows],
    }
    report = RunReport("simulate", scenario.name, profile.reports, summary,
                       files, time.perf_counter() - start)
    report.write(out)

    print(f"{'quantity':<18} {'theory':>12} {'empirical':>12} {'stderr':>10}")
    for q, _, t, e, s in rows:
        print(f"{q:<18} {t:>12.6f} {e:>12.6f} {s:>10.6f}")
    for f in report.files:
        print(f"wrote {f}")
    print(f"wall clock: {report.wall_clock:.3f}s")
    return EXIT_OK


def cmd_sweep(args) -> int:
    out = _out_dir(args)
    start = time.perf_counter()
    files = []
    summary = {}
    kind = args.sweep_kind
    if kind == "large-n" and args.finite:
        env = default_environment(accuracy=args.accuracy,
                                  abstain_utility=args.abstain)
        ns = range(1, args.n_max + 1)
        residual = residual_value_curve(env, ns, allow_sampling=True,
                                        seed=args.seed)
        errors = decision_error_curve(env, ns, allow_sampling=True,
                                      seed=args.seed)
        path = os.path.join(out, "large_market.csv")
        write_csv(path, ["n", "residual_value", "scaled_residual",
                         "decision_error", "mode"],
                  [(rv.n, rv.value, rv.scaled, de.value, rv.mode)
                   for rv, de in zip(residual, errors)])
        files.append(path)
        fit = fit_exponential_rate(residual)
        summary = {
            "n_max": args.n_max,
            "terminal_scaled_residual": residual[-1].scaled,
            "terminal_decision_error": errors[-1].value,
            "fit": {"kappa": fit.kappa, "rho": fit.rho,
                    "r_squared": fit.r_squared, "decaying": fit.decaying},
        }
    elif kind == "large-n":
        rows = large_n_gaussian(args.p0, args.precision, args.cost,
                                range(1, args.n_max + 1))
        path = os.path.join(out, "large_n.csv")
        write_csv(path, ["n", "mse_term", "attention_cost", "total"],
                  [(r["n"], r["mse_term"], r["attention_cost"], r["total"])
                   for r in rows])
        files.append(path)
        summary = {"n_max": args.n_max, "terminal_total": rows[-1]["total"]}
    elif kind == "alpha":
        rows = []
        for pc in args.pc:
            cs = CorrelatedScenario(args.p0, args.p1, args.p2, pc, 0.0,
                                    args.cost)
            p0_payoff = payoff_at_alpha(cs, 0)
            p1_payoff = payoff_at_alpha(cs, 1)
            rows.append((pc, correlation_threshold(args.p0, args.p1, args.p2),
                         p0_payoff, p1_payoff, p1_payoff > p0_payoff))
        path = os.path.join(out, "alpha.csv")
        write_csv(path, ["pc", "threshold", "payoff_independent",
                         "payoff_correlated", "prefers_correlation"], rows)
        files.append(path)
        summary = {"threshold": rows[0][1]}
    elif kind == "symmetry":
        rep = symmetry_gap(args.p0, args.total_precision, args.senders,
                           args.cost, args.grid_step)
        path = os.path.join(out, "symmetry.csv")
        write_csv(path, ["allocation", "payoff", "is_best", "is_symmetric"],
                  [("|".join(fmt(p) for p in alloc), payoff,
                    payoff >= rep.best_payoff - 1e-15,
                    alloc == rep.symmetric_allocation)
                   for alloc, payoff in rep.allocations])
        files.append(path)
        summary = {
            "symmetric_payoff": rep.symmetric_payoff,
            "best_payoff": rep.best_payoff,
            "symmetric_is_max": rep.symmetric_is_max,
        }
    elif kind == "bridge":
        schedule = bridge_schedule(args.precision, args.cost,
                                   args.grid_points)
        if args.mc_samples:
            chk = bridge_mc_check(args.precision, args.cost,
                                  samples=args.mc_samples, seed=args.seed,
                                  grid_points=args.grid_points)
            rows = [(t, v, e, s) for t, v, e, s in
                    zip(schedule.times, schedule.variances, chk.empirical,
                        chk.stderr)]
            header = ["t", "posterior_variance", "empirical_mse", "stderr"]
            summary = {"within_3se": chk.within, "max_z": chk.max_z}
        else:
            rows = list(zip(schedule.times, schedule.variances))
            header = ["t", "posterior_variance"]
            summary = {"final_time": schedule.final_time}
        path = os.path.join(out, "bridge.csv")
        write_csv(path, header, rows)
        files.append(path)
    else:
        raise ScenarioError(f"unknown sweep kind {kind!r}")

    report = RunReport("sweep", kind, {}, summary, files,
                       time.perf_counter() - start)
    report.write(out)
    for f in report.files:
        print(f"wrote {f}")
    print(f"wall clock: {report.wall_clock:.3f}s")
    return EXIT_OK


# -- argument parsing -----------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> _Parser:
    parser = _Parser(prog="attnmarket",
                     description="Attention-competition equilibria: check, "
                                 "solve, simulate, sweep.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, scenario=True):
        if scenario:
            p.add_argument("--scenario", required=True,
                           help="scenario file (YAML)")
        p.add_argument("--out", default=None,
                       help=f"output directory (default ${OUT_ENV_VAR} or ./out)")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--su-samples", type=int, default=20,
                       help="sampled garbled beliefs per sender for the "
                            "substitutes check")

    p = sub.add_parser("check", help="verify structural conditions")
    common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("solve", help="construct the equilibrium profile")
    common(p)
    p.add_argument("--force", action="store_true",
                   help="build the profile even if conditions fail")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("simulate", help="Monte Carlo verification")
    common(p)
    p.add_argument("--force", action="store_true")
    p.add_argument("--replications", type=int, default=None)
    p.add_argument("--receiver-order", default=None,
                   help="lowest | random | perm:i,j,...")
    p.add_argument("--round-cap", type=int, default=None)
    p.add_argument("--trace-episodes", type=int, default=0,
                   help="emit a per-round trace.csv for the first N episodes")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="closed-form curve sweeps")
    p.add_argument("--sweep-kind", required=True,
                   choices=["large-n", "alpha", "symmetry", "bridge"])
    p.add_argument("--out", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--p0", type=float, default=1.0)
    p.add_argument("--p1", type=float, default=1.0)
    p.add_argument("--p2", type=float, default=1.0)
    p.add_argument("--pc", type=float, action="append", default=None)
    p.add_argument("--precision", type=float, default=1.0)
    p.add_argument("--cost", type=float, default=0.01)
    p.add_argument("--n-max", type=int, default=50)
    p.add_argument("--senders", type=int, default=2)
    p.add_argument("--total-precision", type=float, default=2.0)
    p.add_argument("--grid-step", type=float, default=0.05)
    p.add_argument("--grid-points", type=int, default=11)
    p.add_argument("--mc-samples", type=int, default=0)
    p.add_argument("--finite", action="store_true",
                   help="large-n on the finite conditionally-iid default "
                        "environment instead of the gaussian closed form")
    p.add_argument("--accuracy", type=float, default=0.6)
    p.add_argument("--abstain", type=float, default=0.55)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "pc", None) is None and getattr(args, "sweep_kind", "") == "alpha":
        args.pc = [0.4, 0.6]
    try:
        code = args.func(args)
    except ScenarioError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        code = EXIT_INPUT
    except (ConditionNotVerified, AssumptionViolated) as exc:
        print(f"condition failure: {exc}", file=sys.stderr)
        code = EXIT_CONDITION
    except (RoundLimitExceeded, BudgetExceeded) as exc:
        print(f"runtime limit: {exc}", file=sys.stderr)
        code = EXIT_RUNTIME
    except AttnMarketError as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = EXIT_INPUT
    return code


if __name__ == "__main__":
    sys.exit(main())
