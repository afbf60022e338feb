"""All-or-nothing equilibrium objects: the reachable belief graph, the
monopoly rate, multi-sender rate tables, payoffs, and marginal-contribution
prices.

Equilibrium play only ever reveals components exactly, so the belief state
space is the finite set of pairs (revealed senders, their values).  Rates
and payoffs are materialized as tables over this graph.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .conditions import check_assumption2, check_substitutes
from .decision import (
    DecisionProblem,
    coalition_value,
    expected_conditioned_value,
    expected_residual_value,
    full_reveal_value,
    _stopping_value,
)
from .environment import Belief, JointPrior, condition_on_components, merge_senders
from .errors import AssumptionViolated, ConditionNotVerified, UnknownComponent


@dataclass(frozen=True)
class StateNode:
    """One reachable belief state: a set of revealed senders with values."""

    id: int
    revealed: tuple        # sorted sender indices
    values: tuple          # value labels aligned with ``revealed``

    @property
    def assignment(self) -> dict:
        return dict(zip(self.revealed, self.values))

    def label(self) -> str:
        if not self.revealed:
            return "prior"
        return ",".join(f"{i}={v}" for i, v in zip(self.revealed, self.values))


class StateGraph:
    """Reachable exact-revelation states of an environment, with lazy
    beliefs, stopping values, and revelation transitions."""

    def __init__(self, prior: JointPrior, dp: DecisionProblem):
        self.prior = prior
        self.dp = dp
        self.nodes: list[StateNode] = []
        self._index: dict = {}
        self._beliefs: dict = {}
        self._values: dict = {}
        self._transitions: dict = {}
        senders = list(range(1, prior.n_senders + 1))
        for r in range(len(senders) + 1):
            for S in itertools.combinations(senders, r):
                if S:
                    axes = tuple(k for k in range(prior.mass.ndim) if k not in S)
                    marg = prior.mass.sum(axis=axes)
                else:
                    marg = None
                for combo in itertools.product(*[range(prior.spaces[j].size)
                                                 for j in S]):
                    if S and marg[combo] <= 0.0:
                        continue
                    values = tuple(prior.spaces[j].values[v]
                                   for j, v in zip(S, combo))
                    node = StateNode(len(self.nodes), S, values)
                    self._index[(S, values)] = node.id
                    self.nodes.append(node)

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def root(self) -> StateNode:
        return self.nodes[0]

    def node_id(self, revealed, values) -> int:
        key = (tuple(revealed), tuple(values))
        if key not in self._index:
            raise KeyError(f"no reachable state {key}")
        return self._index[key]

    def unrevealed(self, node_id: int) -> tuple:
        node = self.nodes[node_id]
        return tuple(i for i in range(1, self.prior.n_senders + 1)
                     if i not in node.revealed)

    def belief(self, node_id: int) -> Belief:
        if node_id not in self._beliefs:
            node = self.nodes[node_id]
            if node.revealed:
                self._beliefs[node_id] = condition_on_components(
                    self.prior, node.assignment)
            else:
                self._beliefs[node_id] = self.prior.belief()
        return self._beliefs[node_id]

    def stopping_value(self, node_id: int) -> float:
        if node_id not in self._values:
            self._values[node_id] = _stopping_value(
                self.dp, self.belief(node_id).mass)
        return self._values[node_id]

    def transitions(self, node_id: int, sender: int):
        """Positive-probability revelations of one sender's component:
        list of (value label, probability, child node id)."""
        key = (node_id, sender)
        if key not in self._transitions:
            node = self.nodes[node_id]
            if sender in node.revealed:
                raise UnknownComponent(
                    f"sender {sender} already revealed at state {node_id}")
            marg = self.belief(node_id).marginal(sender)
            new_revealed = tuple(sorted(node.revealed + (sender,)))
            out = []
            for v, p in enumerate(marg):
                if p <= 0.0:
                    continue
                value = self.prior.spaces[sender].values[v]
                assignment = dict(node.assignment)
                assignment[sender] = value
                values = tuple(assignment[i] for i in new_revealed)
                out.append((value, float(p), self._index[(new_revealed, values)]))
            self._transitions[key] = out
        return self._transitions[key]


@dataclass
class EquilibriumProfile:
    """AoN rate table over the reachable graph plus theoretical payoffs.

    ``sender_payoffs[i]`` is sender ``i``'s expected visit count and
    ``receiver_payoff`` the receiver's expected utility net of attention
    costs.  ``equilibrium`` is False when the structural conditions were
    overridden with ``force``.
    """

    graph: StateGraph
    cost: float
    rates: dict = field(default_factory=dict)       # (node_id, sender) -> prob
    sender_payoffs: dict = field(default_factory=dict)
    receiver_payoff: float = 0.0
    equilibrium: bool = True
    reports: dict = field(default_factory=dict)

    def rate(self, node_id: int, sender: int) -> float:
        return self.rates[(node_id, sender)]

    def rate_table(self, sender: int) -> dict:
        return {nid: r for (nid, s), r in self.rates.items() if s == sender}

    def rows(self):
        """Profile rows (state id, revealed set, realization, sender, rate)
        for serialization."""
        for (nid, sender), rate in sorted(self.rates.items()):
            node = self.graph.nodes[nid]
            yield {
                "state_id": nid,
                "revealed_set": "|".join(str(i) for i in node.revealed),
                "realization": "|".join(str(v) for v in node.values),
                "sender": sender,
                "rate": rate,
            }


def monopoly_rate(dp: DecisionProblem, prior: JointPrior, cost: float) -> float:
    """Revelation probability that extracts the full surplus from a single
    sender: cost divided by the value of her information."""
    if prior.n_senders != 1:
        raise UnknownComponent("monopoly rate needs exactly one sender")
    value = full_reveal_value(dp, prior.belief(), 1)
    if cost >= value:
        raise AssumptionViolated(
            f"cost {cost} is not below the information value {value}")
    return cost / value


def aon_rates(dp: DecisionProblem, prior: JointPrior, cost: float, *,
              force: bool = False, substitutes_samples: int = 0,
              seed: int = 0) -> EquilibriumProfile:
    """Construct the all-or-nothing equilibrium profile.

    Rates are set at every reachable state so that each unrevealed sender
    is indifferent between being consulted now and only after all
    competitors have revealed.  Unless ``force`` is given, the residual
    value and substitutes conditions are verified first.
    """
    ass2 = check_assumption2(dp, prior, cost)
    subs = check_substitutes(dp, prior, samples=substitutes_samples, seed=seed)
    reports = {"assumption2": ass2, "substitutes": subs}
    if not force:
        if not ass2.holds:
            raise AssumptionViolated(
                f"residual value below cost at {len(ass2.witnesses)} "
                f"realizations (first: {ass2.witnesses[0]})")
        if not subs.holds:
            raise ConditionNotVerified(
                "substitutes condition fails; pass force=True to build a "
                "non-equilibrium profile", reports=reports)

    graph = StateGraph(prior, dp)
    profile = EquilibriumProfile(
        graph=graph, cost=cost,
        equilibrium=ass2.holds and subs.holds,
        reports=reports,
    )
    for node in graph.nodes:
        remaining = graph.unrevealed(node.id)
        if not remaining:
            continue
        belief = graph.belief(node.id)
        for i in remaining:
            residual = expected_residual_value(dp, belief, i)
            profile.rates[(node.id, i)] = (
                cost / residual if residual > 0.0 else float("inf"))

    root_belief = prior.belief()
    everyone = tuple(range(1, prior.n_senders + 1))
    for i in everyone:
        profile.sender_payoffs[i] = (
            expected_residual_value(dp, root_belief, i) / cost)
    profile.receiver_payoff = (
        expected_conditioned_value(dp, prior, everyone)
        - cost * sum(profile.sender_payoffs.values()))
    return profile


def marginal_prices(dp: DecisionProblem, prior: JointPrior) -> dict:
    """Marginal-contribution price of each sender in the one-shot exchange:
    f(N) - f(N minus i)."""
    everyone = tuple(range(1, prior.n_senders + 1))
    f_all = coalition_value(dp, prior, everyone)
    return {
        i: f_all - coalition_value(dp, prior,
                                   tuple(j for j in everyone if j != i))
        for i in everyone
    }


def merge_environment(prior: JointPrior, dp: DecisionProblem,
                      first: int = 1, second: int = 2):
    """Environment where two senders are replaced by one holding the
    product component (for concentration comparisons)."""
    merged_prior, to_original = merge_senders(prior, first, second)
    old_index = {}
    for k, space in enumerate(prior.spaces):
        old_index[k] = {v: j for j, v in enumerate(space.values)}
    u_full = np.broadcast_to(
        dp.utility, (len(dp.actions),) + prior.mass.shape)
    new_u = np.empty((len(dp.actions),) + merged_prior.mass.shape)
    grids = [s.values for s in merged_prior.spaces]
    for combo in itertools.product(*[range(len(g)) for g in grids]):
        joint = tuple(g[v] for g, v in zip(grids, combo))
        orig = to_original(joint)
        idx = tuple(old_index[k][v] for k, v in enumerate(orig))
        new_u[(slice(None),) + combo] = u_full[(slice(None),) + idx]
    return merged_prior, DecisionProblem(dp.actions, new_u)
