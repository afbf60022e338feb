"""Decision problems and the value of information.

All expectations here are exact enumerations; nothing is sampled.  The
utility table may either cover the full joint space or carry size-1 axes
for components it does not depend on (numpy broadcasting fills them in),
which keeps payoff-component-only problems cheap even on fine grids.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .environment import (
    Belief,
    Experiment,
    JointPrior,
    condition_on_components,
    message_distribution,
    update,
)
from .errors import UnknownComponent

VALUE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class DecisionProblem:
    """Finite action set with a real-valued utility table.

    ``utility[a]`` is an array over the joint state space; axes where the
    utility does not vary may have size 1 and are broadcast against beliefs.
    """

    actions: tuple
    utility: np.ndarray

    def __init__(self, actions, utility):
        actions = tuple(actions)
        if len(actions) == 0:
            raise ValueError("need at least one action")
        arr = np.asarray(utility, dtype=float)
        if arr.ndim < 2 or arr.shape[0] != len(actions):
            raise ValueError("utility table must have one block per action")
        if not np.all(np.isfinite(arr)):
            raise ValueError("utility table must be finite and fully populated")
        arr.flags.writeable = False
        object.__setattr__(self, "actions", actions)
        object.__setattr__(self, "utility", arr)

    @classmethod
    def from_state_table(cls, actions, table, n_components):
        """Utility that depends only on the payoff component, broadcast over
        all sender components."""
        arr = np.asarray(table, dtype=float)
        if arr.ndim != 2:
            raise ValueError("state table must be actions x payoff-values")
        arr = arr.reshape(arr.shape + (1,) * (n_components - 1))
        return cls(actions, arr)


@dataclass(frozen=True)
class ValueReport:
    stopping_value: float
    full_info_value: float
    optimal_action: object

    def __post_init__(self):
        if self.full_info_value < self.stopping_value - VALUE_TOL:
            raise ValueError("full-information value below stopping value")


def _check_table(dp: DecisionProblem, mass: np.ndarray):
    if dp.utility.ndim != mass.ndim + 1:
        raise ValueError(
            f"utility table has {dp.utility.ndim - 1} component axes, "
            f"environment has {mass.ndim}"
        )
    np.broadcast_shapes(dp.utility.shape[1:], mass.shape)


def _expected_utilities(dp: DecisionProblem, mass: np.ndarray) -> np.ndarray:
    """E[u(a, omega)] per action under an (unnormalized) mass array."""
    _check_table(dp, mass)
    u = dp.utility
    collapse = tuple(k for k in range(mass.ndim)
                     if u.shape[1 + k] == 1 and mass.shape[k] > 1)
    if collapse:
        mass = mass.sum(axis=collapse, keepdims=True)
    axes = tuple(range(1, mass.ndim + 1))
    return (u * mass[None, ...]).sum(axis=axes)


def _stopping_value(dp: DecisionProblem, mass: np.ndarray) -> float:
    return float(_expected_utilities(dp, mass).max())


def stopping_utility(dp: DecisionProblem, belief: Belief) -> ValueReport:
    """Best expected utility from acting now; ties broken by lowest action
    index."""
    eu = _expected_utilities(dp, belief.mass)
    best = int(np.argmax(eu))
    return ValueReport(
        stopping_value=float(eu[best]),
        full_info_value=full_info_utility(dp, belief),
        optimal_action=dp.actions[best],
    )


def full_info_utility(dp: DecisionProblem, belief: Belief) -> float:
    """Expected utility when the exact state will be learned before acting."""
    _check_table(dp, belief.mass)
    best = dp.utility.max(axis=0)  # broadcast axes stay size 1
    return float((best * belief.mass).sum())


def experiment_value(dp: DecisionProblem, belief: Belief,
                     experiment: Experiment) -> float:
    """Expected stopping-utility gain from observing one experiment."""
    dist = message_distribution(belief, experiment)
    total = 0.0
    for m, prob in zip(experiment.messages, dist):
        if prob <= 0.0:
            continue
        post = update(belief, experiment, m)
        total += prob * _stopping_value(dp, post.mass)
    return total - _stopping_value(dp, belief.mass)


def full_reveal_value(dp: DecisionProblem, belief: Belief, sender: int) -> float:
    """Value of learning one sender's component exactly at this belief."""
    belief._check_component(sender)
    return (expected_conditioned_value(dp, belief, (sender,))
            - _stopping_value(dp, belief.mass))


def full_reveal_value_given(dp: DecisionProblem, prior: JointPrior,
                            sender: int, assignment: dict) -> float:
    """Residual value of a sender's component after conditioning the prior
    on exact values of other components."""
    if sender in assignment:
        raise UnknownComponent(f"sender {sender} is already conditioned on")
    belief = condition_on_components(prior, assignment) if assignment else prior.belief()
    return full_reveal_value(dp, belief, sender)


def expected_conditioned_value(dp: DecisionProblem, source, subset) -> float:
    """E over realizations of the subset's components of the stopping
    utility after conditioning on them:  E_{w_S}[ U(mu'(w_S)) ].

    The empty subset gives the current stopping utility.
    """
    mass = source.mass
    _check_table(dp, mass)
    subset = tuple(sorted(set(subset)))
    n = mass.ndim
    for k in subset:
        if not (1 <= k < n):
            raise UnknownComponent(f"sender index {k} out of range")
    if not subset:
        return _stopping_value(dp, mass)

    u = dp.utility
    if all(u.shape[1 + k] == 1 for k in subset):
        # utility constant in the conditioned components: score every
        # realization with one matrix product
        rest = tuple(k for k in range(n) if k not in subset)
        m = mass.transpose(subset + rest).reshape(
            int(np.prod([mass.shape[k] for k in subset])), -1)
        u_mat = np.broadcast_to(u, (u.shape[0],) + tuple(
            1 if k in subset else mass.shape[k] for k in range(n)
        )).reshape(u.shape[0], -1)
        eu = m @ u_mat.T                       # realizations x actions
        weights = m.sum(axis=1)
        return float(np.where(weights > 0, eu.max(axis=1), 0.0).sum())

    # general table: loop over subset realizations
    total = 0.0
    index = [slice(None)] * n
    for combo in itertools.product(*[range(mass.shape[k]) for k in subset]):
        for k, v in zip(subset, combo):
            index[k] = v
        sub = mass[tuple(index)]
        if sub.sum() <= 0.0:
            continue
        u_index = [slice(None)] * (n + 1)
        for k, v in zip(subset, combo):
            u_index[1 + k] = v if u.shape[1 + k] > 1 else 0
        u_sub = u[tuple(u_index)]
        eu = (u_sub * sub[None, ...]).sum(axis=tuple(range(1, sub.ndim + 1)))
        total += float(eu.max())
    return total


def coalition_value(dp: DecisionProblem, prior: JointPrior, subset) -> float:
    """Ex-ante expected increase in stopping utility from learning exactly
    the components in the subset; zero for the empty set."""
    base = _stopping_value(dp, prior.mass)
    return expected_conditioned_value(dp, prior, subset) - base


def expected_residual_value(dp: DecisionProblem, source, sender: int) -> float:
    """E over the other senders' components of the residual value of this
    sender's component:  E_{w_{-i}}[ vbar(w_i | w_{-i}) ]."""
    n = source.mass.ndim
    if not (1 <= sender < n):
        raise UnknownComponent(f"sender index {sender} out of range")
    everyone = tuple(range(1, n))
    others = tuple(k for k in everyone if k != sender)
    return (expected_conditioned_value(dp, source, everyone)
            - expected_conditioned_value(dp, source, others))
