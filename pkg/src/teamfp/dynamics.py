"""Learning dynamics: Team-FP, its independent variant, and SFP/MWU baselines.

A run is strictly sequential and deterministic given (seed, config, game):
the PRNG is a counter-based Philox generator keyed by the seed, and teams and
agents are always visited in ascending index order.  Per-trial streams are
derived as ``seed XOR trial``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .beliefs import BeliefProfile, StepSchedule, update_belief_inplace
from .game import MultiTeamGame, agent_payoff_vs
from .metrics import lyapunov, tng

VARIANTS = ("team-fp", "independent-team-fp", "sfp", "mwu")


@dataclass(frozen=True)
class DynamicsConfig:
    variant: str = "team-fp"
    tau: float = 0.1
    delta: float = 0.5          # independent variant only
    eta: float = 0.05           # mwu only
    schedule: StepSchedule = field(default_factory=StepSchedule.harmonic)
    seed: int = 0
    iterations: int = 100_000
    stride: int = 100
    via_potential: bool = False  # force payoff evaluation through the team potential

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.tau <= 0:
            raise ValueError("temperature must be positive")
        if self.variant == "independent-team-fp" and not 0.0 < self.delta < 1.0:
            raise ValueError("update probability delta must lie in (0, 1)")
        if self.variant == "mwu" and self.eta <= 0:
            raise ValueError("mwu learning rate must be positive")
        if self.stride < 1:
            raise ValueError("metric stride must be >= 1")
        if self.iterations < 0:
            raise ValueError("iteration count must be nonnegative")


def smoothed_best_response(q: np.ndarray, tau: float) -> np.ndarray:
    """Softmax of q / tau with max subtraction; the entropy-regularized best response."""
    if tau <= 0:
        raise ValueError("temperature must be positive")
    z = np.asarray(q, dtype=np.float64)
    e = np.exp((z - z.max()) / tau)
    return e / e.sum()


def sample_index(p: np.ndarray, rng) -> int:
    """Inverse-CDF sample from a probability vector, one uniform draw."""
    c = np.cumsum(p)
    j = int(np.searchsorted(c, rng.random() * c[-1], side="right"))
    return min(j, len(p) - 1)


def make_rng(seed: int):
    return np.random.Generator(np.random.Philox(key=seed & 0xFFFFFFFFFFFFFFFF))


def product_distribution(dists) -> np.ndarray:
    """Dense joint distribution of independent per-agent distributions (agent 0 least significant)."""
    v = np.asarray(dists[0])
    for d in dists[1:]:
        v = np.outer(d, v).ravel()
    return v


def _einsum_spec(n_agents: int, keep: int) -> str:
    # Tensor axes run most-significant-first (agent n-1 down to agent 0).
    letters = [chr(ord("a") + j) for j in range(n_agents)]
    tensor = "".join(letters[n_agents - 1 - t] for t in range(n_agents))
    operands = [tensor] + [letters[j] for j in range(n_agents) if j != keep]
    return ",".join(operands) + "->" + letters[keep]


def mixed_own_payoff(game: MultiTeamGame, m: int, i: int, member_dists, opp_dense,
                     via_potential: bool = False) -> np.ndarray:
    """Agent (m, i)'s expected payoff per own action when everyone mixes independently.

    Teammates play the marginals in ``member_dists``; each opponent team l
    plays the dense joint vector ``opp_dense[l]``.
    """
    st = game.structure
    sizes = st.teams[m]
    use_payoff = not via_potential and game.has_payoffs(m, i)
    b = np.zeros(st.team_size(m))
    for l in game.opponents(m):
        table = game.payoffs[(m, i)][l] if use_payoff else game.potentials[(m, l)]
        b += table @ opp_dense[l]
    if len(sizes) == 1:
        return b
    tensor = b.reshape(tuple(reversed(sizes)))
    mates = [np.asarray(member_dists[j]) for j in range(len(sizes)) if j != i]
    return np.einsum(_einsum_spec(len(sizes), i), tensor, *mates)


@dataclass
class DynamicsState:
    """Mutable per-run state advanced one step at a time."""

    k: int
    last_joint: list                  # joint-action index per team
    last_actions: list                # decoded per-agent tuple per team
    beliefs: BeliefProfile            # joint empirical average per team
    rng: np.random.Generator
    marginals: list = None            # sfp: per team, per agent empirical marginal
    mwu_x: list = None                # mwu: per team, per agent current mixed strategy
    mwu_avg: list = None              # mwu: running averages of mwu_x


def initial_state(game: MultiTeamGame, config: DynamicsConfig, rng=None) -> DynamicsState:
    st = game.structure
    rng = rng if rng is not None else make_rng(config.seed)
    last_joint = [int(rng.integers(st.team_size(m))) for m in range(st.num_teams)]
    last_actions = [st.decode(m, last_joint[m]) for m in range(st.num_teams)]
    state = DynamicsState(0, last_joint, last_actions, BeliefProfile.uniform(st), rng)
    if config.variant == "sfp":
        state.marginals = [[np.full(n, 1.0 / n) for n in st.teams[m]] for m in range(st.num_teams)]
    elif config.variant == "mwu":
        state.mwu_x = [[np.full(n, 1.0 / n) for n in st.teams[m]] for m in range(st.num_teams)]
        state.mwu_avg = [[x.copy() for x in xs] for xs in state.mwu_x]
    return state


def _inertial_step(game: MultiTeamGame, state: DynamicsState, config: DynamicsConfig,
                   delta, stationary) -> None:
    """Shared core of team_fp_step / independent_team_fp_step.

    ``delta is None`` selects the classical rule (exactly one uniformly chosen
    updater per team); otherwise every agent resamples independently with
    probability delta.  Updaters respond to teammates' stage-(k-1) actions and
    the current opponent beliefs; non-updaters repeat their action.
    """
    st = game.structure
    rng = state.rng
    alpha = config.schedule.alpha(state.k)
    beliefs = state.beliefs.vectors
    for m in range(st.num_teams):
        if stationary is not None and m in stationary:
            j = sample_index(stationary[m], rng)
            state.last_joint[m] = j
            state.last_actions[m] = st.decode(m, j)
            continue
        prev = state.last_actions[m]
        actions = list(prev)
        if delta is None:
            i = int(rng.integers(st.num_agents(m)))
            q = agent_payoff_vs(game, m, i, prev, beliefs, via_potential=config.via_potential)
            actions[i] = sample_index(smoothed_best_response(q, config.tau), rng)
        else:
            for i in range(st.num_agents(m)):
                if rng.random() < delta:
                    q = agent_payoff_vs(game, m, i, prev, beliefs, via_potential=config.via_potential)
                    actions[i] = sample_index(smoothed_best_response(q, config.tau), rng)
        state.last_actions[m] = tuple(actions)
        state.last_joint[m] = st.encode(m, actions)
    # Beliefs track every team's realized action each step, whether or not it changed.
    for m in range(st.num_teams):
        update_belief_inplace(beliefs[m], state.last_joint[m], alpha)
    state.k += 1


def team_fp_step(game: MultiTeamGame, state: DynamicsState, config: DynamicsConfig,
                 stationary=None) -> DynamicsState:
    _inertial_step(game, state, config, None, stationary)
    return state


def independent_team_fp_step(game: MultiTeamGame, state: DynamicsState, config: DynamicsConfig,
                             stationary=None) -> DynamicsState:
    _inertial_step(game, state, config, config.delta, stationary)
    return state


def sfp_step(game: MultiTeamGame, state: DynamicsState, config: DynamicsConfig,
             stationary=None) -> DynamicsState:
    """Smoothed fictitious play: per-agent beliefs about every other individual agent.

    Every agent plays a fresh smoothed best response each step (no inertia, no
    teammate-last-action coupling) against the product of the empirical
    marginals of all other agents.
    """
    if stationary:
        raise ValueError("sfp supports self-play only")
    st = game.structure
    rng = state.rng
    alpha = config.schedule.alpha(state.k)
    opp_dense = [product_distribution(state.marginals[m]) for m in range(st.num_teams)]
    played = []
    for m in range(st.num_teams):
        actions = []
        for i in range(st.num_agents(m)):
            q = mixed_own_payoff(game, m, i, state.marginals[m], opp_dense,
                                 via_potential=config.via_potential)
            actions.append(sample_index(smoothed_best_response(q, config.tau), rng))
        played.append(tuple(actions))
    for m in range(st.num_teams):
        for i, a in enumerate(played[m]):
            update_belief_inplace(state.marginals[m][i], a, alpha)
        state.last_actions[m] = played[m]
        state.last_joint[m] = st.encode(m, played[m])
    state.k += 1
    return state


def mwu_step(game: MultiTeamGame, state: DynamicsState, config: DynamicsConfig,
             stationary=None) -> DynamicsState:
    """Full-information expected-payoff multiplicative weights with constant rate.

    Each agent exponentiates its expected payoff vector against all other
    agents' current mixed strategies; running averages of the iterates are
    kept for metric evaluation.
    """
    if stationary:
        raise ValueError("mwu supports self-play only")
    st = game.structure
    eta = config.eta
    opp_dense = [product_distribution(state.mwu_x[m]) for m in range(st.num_teams)]
    new_x = []
    for m in range(st.num_teams):
        xs = []
        for i in range(st.num_agents(m)):
            q = mixed_own_payoff(game, m, i, state.mwu_x[m], opp_dense,
                                 via_potential=config.via_potential)
            w = state.mwu_x[m][i] * np.exp(eta * (q - q.max()))
            xs.append(w / w.sum())
        new_x.append(xs)
    state.mwu_x = new_x
    weight = 1.0 / (state.k + 2)
    for m in range(st.num_teams):
        for i in range(st.num_agents(m)):
            avg = state.mwu_avg[m][i]
            avg += weight * (new_x[m][i] - avg)
    state.k += 1
    return state


STEP_FUNCTIONS = {
    "team-fp": team_fp_step,
    "independent-team-fp": independent_team_fp_step,
    "sfp": sfp_step,
    "mwu": mwu_step,
}


def team_strategies(game: MultiTeamGame, state: DynamicsState, config: DynamicsConfig,
                    stationary=None) -> list:
    """Team-level joint strategy per team, as used by the metrics.

    Team-FP variants: the joint empirical averages (the beliefs).  SFP / MWU:
    the product of member marginal averages, materialized densely.  Teams held
    to a fixed stationary strategy report that strategy exactly.
    """
    if config.variant == "sfp":
        out = [product_distribution(state.marginals[m]) for m in range(game.num_teams)]
    elif config.variant == "mwu":
        out = [product_distribution(state.mwu_avg[m]) for m in range(game.num_teams)]
    else:
        out = [state.beliefs[m] for m in range(game.num_teams)]
    if stationary:
        out = list(out)
        for m, vec in stationary.items():
            out[m] = vec
    return out


@dataclass
class RunRecord:
    """Sampled metric trajectory of one trial."""

    iterations: np.ndarray
    tng_teams: np.ndarray      # shape (rows, num_teams)
    tng_total: np.ndarray
    lyapunov: np.ndarray
    seed: int = 0
    trial: int = 0


def run(game: MultiTeamGame, config: DynamicsConfig, mode: str = "self-play",
        stationary=None, trial: int = 0) -> RunRecord:
    """Advance the configured dynamic for ``config.iterations`` steps.

    ``mode`` is ``self-play`` or ``vs-stationary``; the latter requires
    ``stationary``, a mapping from opponent team index to a fixed simplex
    vector, and only the remaining team(s) learn.  Metrics are sampled at
    iteration 0, every ``config.stride`` steps, and at the final iteration.
    """
    if mode == "self-play":
        stationary = None
    elif mode == "vs-stationary":
        if not stationary:
            raise ValueError("vs-stationary mode needs fixed opponent strategies")
        if config.variant not in ("team-fp", "independent-team-fp"):
            raise ValueError("vs-stationary mode supports the team-fp variants only")
        stationary = {m: np.asarray(v, dtype=np.float64) for m, v in stationary.items()}
        for m, v in stationary.items():
            if v.shape != (game.structure.team_size(m),):
                raise ValueError(f"stationary strategy for team {m} has wrong length")
    else:
        raise ValueError(f"unknown mode {mode!r}")

    step = STEP_FUNCTIONS[config.variant]
    state = initial_state(game, config, make_rng(config.seed ^ trial))
    iters, gaps, totals, lyaps = [], [], [], []

    def record():
        strategies = team_strategies(game, state, config, stationary)
        per_team, total = tng(game, strategies)
        iters.append(state.k)
        gaps.append(per_team)
        totals.append(total)
        lyaps.append(lyapunov(game, strategies, config.tau))

    record()
    for k in range(config.iterations):
        step(game, state, config, stationary)
        if state.k % config.stride == 0 or state.k == config.iterations:
            record()
    return RunRecord(np.array(iters), np.array(gaps), np.array(totals), np.array(lyaps),
                     seed=config.seed, trial=trial)
