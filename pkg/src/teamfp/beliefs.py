"""Belief profiles, weighted empirical-average updates, and step-size schedules.

One belief vector is kept per team: every observer outside a team shares the
same initialization and step sizes, so their beliefs coincide forever and a
single vector per team suffices (homogeneous beliefs).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .game import TeamStructure

SIMPLEX_TOL = 1e-12
SCHEDULE_TOL = 1e-12


def onehot(n: int, j: int) -> np.ndarray:
    v = np.zeros(n)
    v[j] = 1.0
    return v


def update_belief(pi: np.ndarray, observed: int, alpha: float) -> np.ndarray:
    """One weighted empirical-average step toward the observed joint action.

    Returns ``(1 - alpha) * pi + alpha * onehot(observed)``, renormalized to
    cancel floating-point drift over long runs.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"step size {alpha} outside [0, 1]")
    out = (1.0 - alpha) * pi
    out[observed] += alpha
    out /= out.sum()
    return out


def update_belief_inplace(pi: np.ndarray, observed: int, alpha: float) -> None:
    """In-place variant of :func:`update_belief` for hot loops."""
    pi *= 1.0 - alpha
    pi[observed] += alpha
    pi /= pi.sum()


@dataclass
class BeliefProfile:
    """One simplex vector per team over that team's joint actions."""

    vectors: list

    @staticmethod
    def uniform(structure: TeamStructure) -> "BeliefProfile":
        return BeliefProfile([
            np.full(structure.team_size(m), 1.0 / structure.team_size(m))
            for m in range(structure.num_teams)
        ])

    @staticmethod
    def point_mass(structure: TeamStructure, joints) -> "BeliefProfile":
        return BeliefProfile([
            onehot(structure.team_size(m), joints[m])
            for m in range(structure.num_teams)
        ])

    def copy(self) -> "BeliefProfile":
        return BeliefProfile([v.copy() for v in self.vectors])

    def __getitem__(self, m: int) -> np.ndarray:
        return self.vectors[m]

    def __len__(self) -> int:
        return len(self.vectors)

    def check(self, tol: float = SIMPLEX_TOL) -> bool:
        return all(
            np.all(v >= -tol) and abs(v.sum() - 1.0) <= tol for v in self.vectors
        )


def marginalize(pi: np.ndarray, sizes, subset) -> np.ndarray:
    """Marginal of a team belief onto an agent subset.

    ``sizes`` are the per-agent action-set sizes (agent 0 least significant in
    the joint index); ``subset`` is a nonempty iterable of agent positions.
    The result is indexed mixed-radix over the subset in ascending agent
    order, least-significant first.
    """
    subset = sorted(set(subset))
    if not subset:
        raise ValueError("agent subset must be nonempty")
    if any(j < 0 or j >= len(sizes) for j in subset):
        raise ValueError(f"subset {subset} out of range for {len(sizes)} agents")
    n = len(sizes)
    # Tensor axes run most-significant-first (reverse of agent order).
    tensor = pi.reshape(tuple(reversed(sizes)))
    drop = tuple(n - 1 - j for j in range(n) if j not in subset)
    return tensor.sum(axis=drop).reshape(-1)


@dataclass(frozen=True)
class StepSchedule:
    """Step-size family for the belief updates.

    ``harmonic``/``harmonic-offset``: alpha_k = 1 / (k + 1 + offset) ** power.
    ``custom``: explicit table, constant-extended past its end.
    """

    kind: str = "harmonic"
    offset: int = 0
    power: float = 1.0
    table: tuple = field(default=())

    @staticmethod
    def harmonic(offset: int = 0, power: float = 1.0) -> "StepSchedule":
        kind = "harmonic-offset" if offset else "harmonic"
        return StepSchedule(kind=kind, offset=offset, power=power)

    @staticmethod
    def custom(values) -> "StepSchedule":
        return StepSchedule(kind="custom", table=tuple(float(v) for v in values))

    def alpha(self, k: int) -> float:
        if self.kind in ("harmonic", "harmonic-offset"):
            return 1.0 / float(k + 1 + self.offset) ** self.power
        if not self.table:
            raise ValueError("custom schedule has no table")
        return self.table[min(k, len(self.table) - 1)]

    def asymptotic_certified(self) -> bool:
        """Whether the family satisfies the stochastic-approximation conditions by construction.

        1/(k+1+o)^p has a divergent sum iff p <= 1 and a convergent square sum
        iff p > 1/2; the ratio alpha_k / alpha_{k+1} tends to 1 for any p.
        Custom tables cannot be certified from a finite prefix.
        """
        if self.kind in ("harmonic", "harmonic-offset"):
            return 0.5 < self.power <= 1.0
        return False


@dataclass
class ScheduleReport:
    ok: bool
    issues: list
    tail_ratio: float
    asymptotic: str  # "certified" | "uncertified" | "unverifiable"

    def __bool__(self):
        return self.ok


def check_schedule(schedule: StepSchedule, n: int = 1000) -> ScheduleReport:
    """Prefix checks of the step-size conditions on k < n.

    Verifies range, monotone decay, and the no-recency-bias inequality
    ``alpha_k - alpha_{k+1} >= alpha_k * alpha_{k+1}``.  The divergence /
    square-summability / ratio-to-one conditions are asymptotic: they are
    certified only for the built-in harmonic family and flagged unverifiable
    for custom tables.
    """
    if n < 2:
        raise ValueError("need a prefix of at least 2 steps")
    alphas = np.array([schedule.alpha(k) for k in range(n)])
    issues = []
    if np.any(alphas < -SCHEDULE_TOL) or np.any(alphas > 1.0 + SCHEDULE_TOL):
        issues.append("step size leaves [0, 1] on the prefix")
    diffs = alphas[:-1] - alphas[1:]
    if np.any(diffs < -SCHEDULE_TOL):
        issues.append("step size is not nonincreasing on the prefix")
    if np.any(diffs < alphas[:-1] * alphas[1:] - SCHEDULE_TOL):
        issues.append("no-recency-bias condition alpha_k - alpha_{k+1} >= alpha_k*alpha_{k+1} fails")
    if schedule.kind == "custom":
        asymptotic = "unverifiable"
    elif schedule.asymptotic_certified():
        asymptotic = "certified"
    else:
        asymptotic = "uncertified"
        issues.append("family parameters fail the asymptotic step-size conditions")
    tail_ratio = float(alphas[-2] / alphas[-1]) if alphas[-1] > 0 else float("inf")
    return ScheduleReport(not issues, issues, tail_ratio, asymptotic)
