"""Structural condition checks: residual values worth one visit, the
substitutes inequality, and discrete concavity of the coalition value.

The substitutes inequality quantifies over a continuum of beliefs; we
verify it exactly at every exact-revelation belief (the ones traversed by
equilibrium play) and probe off-path robustness at seeded random garbled
beliefs.  Both layers are reported separately in the witness list.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .decision import (
    DecisionProblem,
    coalition_value,
    expected_residual_value,
    full_reveal_value,
    full_reveal_value_given,
)
from .environment import (
    Belief,
    Experiment,
    JointPrior,
    condition_on_components,
    no_direct_info,
    update,
)
from .errors import SubsetSpaceTooLarge

INEQ_TOL = 1e-10
MAX_SUBSET_SENDERS = 20


@dataclass
class ConditionReport:
    """Outcome of one structural check."""

    name: str
    holds: bool
    margin: float
    witnesses: list = field(default_factory=list)
    checked: int = 0
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "holds": self.holds,
            "margin": self.margin,
            "checked": self.checked,
            "witnesses": [dict(w) for w in self.witnesses],
            "note": self.note,
        }


def _other_assignments(prior: JointPrior, sender: int):
    """Positive-mass realizations of all senders except one, with weights."""
    n = prior.n_senders
    others = [j for j in range(1, n + 1) if j != sender]
    axes = tuple(k for k in range(n + 1) if k not in others)
    marg = prior.mass.sum(axis=axes) if others else np.ones(())
    for combo in itertools.product(*[range(prior.spaces[j].size) for j in others]):
        w = float(marg[combo]) if others else 1.0
        if w <= 0.0:
            continue
        yield {j: prior.spaces[j].values[v] for j, v in zip(others, combo)}, w


def check_assumption2(dp: DecisionProblem, prior: JointPrior,
                      cost: float) -> ConditionReport:
    """Every sender's component must be worth more than one visit at every
    positive-mass realization of the competitors' components.  With a
    single sender this reduces to the monopoly condition c < vbar."""
    if cost <= 0.0:
        raise ValueError("attention cost must be positive")
    report = ConditionReport("assumption2", holds=True, margin=np.inf)
    for i in range(1, prior.n_senders + 1):
        for assignment, _ in _other_assignments(prior, i):
            value = full_reveal_value_given(dp, prior, i, assignment)
            slack = value - cost
            report.checked += 1
            report.margin = min(report.margin, slack)
            if slack <= INEQ_TOL:
                report.holds = False
                report.witnesses.append({
                    "sender": i,
                    "given": dict(assignment),
                    "residual_value": value,
                    "cost": cost,
                })
    return report


def _revealed_beliefs(prior: JointPrior, sender: int):
    """All beliefs mu'(w_S) with the sender outside S, including the prior."""
    n = prior.n_senders
    others = [j for j in range(1, n + 1) if j != sender]
    for r in range(len(others) + 1):
        for S in itertools.combinations(others, r):
            if not S:
                yield {}, prior.belief()
                continue
            axes = tuple(k for k in range(n + 1) if k not in S)
            marg = prior.mass.sum(axis=axes)
            for combo in itertools.product(*[range(prior.spaces[j].size) for j in S]):
                if marg[combo] <= 0.0:
                    continue
                assignment = {j: prior.spaces[j].values[v] for j, v in zip(S, combo)}
                yield assignment, condition_on_components(prior, assignment)


def _garbled_belief(prior: JointPrior, sender: int, rng) -> Belief | None:
    """A random belief formed by composed binary-channel garblings of
    components other than the given sender."""
    n = prior.n_senders
    others = [j for j in range(1, n + 1) if j != sender
              and prior.spaces[j].size > 1]
    if not others:
        return None
    belief = prior.belief()
    for _ in range(rng.integers(1, 4)):
        j = int(rng.choice(others))
        space = prior.spaces[j]
        split = int(rng.integers(1, space.size))
        one_values = set(rng.choice(space.size, size=split, replace=False))
        exp = Experiment.binary_channel(
            space, {space.values[v] for v in one_values},
            flip_prob=float(rng.uniform(0.05, 0.45)),
        )
        dist = belief.marginal(j) @ exp.kernel
        message = exp.messages[int(rng.choice(2, p=dist / dist.sum()))]
        belief = update(belief, exp, message)
    return belief


def check_substitutes(dp: DecisionProblem, prior: JointPrior,
                      samples: int = 0, seed: int = 0) -> ConditionReport:
    """Verify that each sender's component is weakly more valuable the less
    competitors have revealed.

    Layer one checks every exact-revelation belief exhaustively; layer two
    checks ``samples`` random garbled beliefs per sender (each certified to
    carry no direct information from that sender).
    """
    report = ConditionReport("substitutes", holds=True, margin=np.inf)
    report.note = ("exact on all revelation beliefs; "
                   f"{samples} sampled garbled beliefs per sender")
    rng = np.random.default_rng(seed)
    for i in range(1, prior.n_senders + 1):
        checks = [("revealed", a, b) for a, b in _revealed_beliefs(prior, i)]
        for _ in range(samples):
            belief = _garbled_belief(prior, i, rng)
            if belief is None:
                continue
            assert no_direct_info(belief, prior, i)
            checks.append(("garbled", None, belief))
        for layer, assignment, belief in checks:
            lhs = full_reveal_value(dp, belief, i)
            rhs = expected_residual_value(dp, belief, i)
            slack = lhs - rhs
            if -INEQ_TOL <= slack < 0.0:
                slack = 0.0  # equality up to rounding
            report.checked += 1
            report.margin = min(report.margin, slack)
            if slack < -INEQ_TOL:
                report.holds = False
                report.witnesses.append({
                    "sender": i,
                    "layer": layer,
                    "revealed": dict(assignment) if assignment is not None else None,
                    "value_now": lhs,
                    "expected_residual_value": rhs,
                })
    return report


def check_mnat_concave(dp: DecisionProblem, prior: JointPrior) -> ConditionReport:
    """Discrete (M-natural) concavity of the coalition value by exhaustive
    enumeration of subset pairs."""
    n = prior.n_senders
    if n > MAX_SUBSET_SENDERS:
        raise SubsetSpaceTooLarge(
            f"{n} senders exceed the exhaustive enumeration limit "
            f"of {MAX_SUBSET_SENDERS}"
        )
    senders = list(range(1, n + 1))
    f = {}
    for r in range(n + 1):
        for S in itertools.combinations(senders, r):
            f[frozenset(S)] = coalition_value(dp, prior, S)
    report = ConditionReport("mnat_concave", holds=True, margin=np.inf)
    subsets = list(f.keys())
    for S, T in itertools.product(subsets, subsets):
        for s in S - T:
            lhs = f[S] + f[T]
            candidates = [f[S - {s}] + f[T | {s}]]
            candidates += [f[(S - {s}) | {t}] + f[(T | {s}) - {t}]
                           for t in T - S]
            rhs = max(candidates)
            slack = rhs - lhs
            if -INEQ_TOL <= slack < 0.0:
                slack = 0.0  # equality up to rounding
            report.checked += 1
            report.margin = min(report.margin, slack)
            if slack < -INEQ_TOL:
                report.holds = False
                report.witnesses.append({
                    "S": sorted(S),
                    "T": sorted(T),
                    "moved": s,
                    "lhs": lhs,
                    "rhs": rhs,
                })
    if report.checked == 0:
        report.margin = 0.0
        report.note = "no subset triples to check"
    return report
