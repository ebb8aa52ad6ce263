"""Finite-horizon multi-team Markov games and their Team-FP learners.

The environment couples per-state stage games (all sharing one team
structure) through a transition kernel over the full joint-action profile.
Global joint actions are indexed mixed-radix over teams, team 0 least
significant.  Learners keep per-(state, stage) beliefs, last actions, and
Q-tables; model-based and model-free update rules differ only in the Q
target and its gating.

Two PRNG streams are used per run: one for the environment (initial state
and transitions) and one for the agents (updater choice and action
sampling).  This keeps the agent stream identical to the repeated-game
dynamics when |S| = 1 and H = 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .beliefs import StepSchedule
from .dynamics import make_rng, sample_index, smoothed_best_response
from .game import (MultiTeamGame, TeamStructure, own_action_rows,
                   validate_potential, validate_zero_sum)

ENV_STREAM_SALT = 0x9E3779B97F4A7C15
KERNEL_TOL = 1e-12


@dataclass
class MarkovTeamGame:
    """Finite-horizon multi-team Markov game with ZSPTG stage games.

    ``kernel[s, a, s_next]`` is the transition probability under the global
    joint action a; ``stage_games[s]`` carries the per-state potentials and
    optional agent payoffs.
    """

    horizon: int
    stage_games: list
    kernel: np.ndarray
    p0: np.ndarray

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if not self.stage_games:
            raise ValueError("need at least one state")
        st = self.stage_games[0].structure
        for g in self.stage_games:
            if g.structure != st:
                raise ValueError("all stage games must share one team structure")
        # hot-loop caches
        self._structure = st
        self._num_teams = st.num_teams
        self._team_strides = tuple(np.cumprod(
            [1] + [st.team_size(m) for m in range(st.num_teams - 1)]).tolist())
        self._decode_tables = [
            tuple(st.decode(m, j) for j in range(st.team_size(m)))
            for m in range(st.num_teams)
        ]
        self._own_rows = {}
        S, A = self.num_states, self.num_joint_actions
        self.kernel = np.ascontiguousarray(self.kernel, dtype=np.float64)
        self.p0 = np.ascontiguousarray(self.p0, dtype=np.float64)
        if self.kernel.shape != (S, A, S):
            raise ValueError(f"kernel shape {self.kernel.shape}, want {(S, A, S)}")
        if self.p0.shape != (S,):
            raise ValueError("initial distribution length mismatch")
        if np.any(np.abs(self.kernel.sum(axis=2) - 1.0) > KERNEL_TOL) or np.any(self.kernel < 0):
            raise ValueError("kernel rows must be probability distributions")
        if abs(self.p0.sum() - 1.0) > KERNEL_TOL or np.any(self.p0 < 0):
            raise ValueError("initial distribution must lie on the simplex")
        self._phi_dense = {}
        self._reward_dense = {}

    @property
    def structure(self) -> TeamStructure:
        return self._structure

    @property
    def num_states(self) -> int:
        return len(self.stage_games)

    @property
    def num_teams(self) -> int:
        return self._num_teams

    @property
    def num_joint_actions(self) -> int:
        return self.structure.total_size()

    def team_strides(self) -> tuple[int, ...]:
        return self._team_strides

    def own_rows(self, m: int, i: int) -> np.ndarray:
        """(team_size, |A^i|) table of own_action_rows per team joint index."""
        key = (m, i)
        if key not in self._own_rows:
            st = self.structure
            table = np.stack([
                own_action_rows(st, m, i, self._decode_tables[m][j])
                for j in range(st.team_size(m))
            ])
            table.setflags(write=False)
            self._own_rows[key] = table
        return self._own_rows[key]

    def global_encode(self, joints) -> int:
        return sum(j * s for j, s in zip(joints, self.team_strides()))

    def global_decode(self, a: int) -> tuple[int, ...]:
        out = []
        for m in range(self.num_teams):
            size = self.structure.team_size(m)
            out.append(a % size)
            a //= size
        return tuple(out)

    def phi_dense(self, m: int) -> np.ndarray:
        """Team-m stage potential over (state, global joint action)."""
        if m not in self._phi_dense:
            st = self.structure
            M = self.num_teams
            sizes = [st.team_size(t) for t in range(M)]
            out = np.zeros((self.num_states, self.num_joint_actions))
            for s, g in enumerate(self.stage_games):
                dense = np.zeros(tuple(reversed(sizes)))
                for l in g.opponents(m):
                    dense += np.moveaxis(
                        g.potentials[(m, l)].reshape(sizes[m], sizes[l], *[1] * (M - 2)),
                        (0, 1), (M - 1 - m, M - 1 - l))
                out[s] = dense.reshape(-1)
            out.setflags(write=False)
            self._phi_dense[m] = out
        return self._phi_dense[m]

    def reward_dense(self, m: int, i: int) -> np.ndarray:
        """Agent (m, i)'s stage reward over (state, global joint action)."""
        key = (m, i)
        if key not in self._reward_dense:
            if not any(g.has_payoffs(m, i) for g in self.stage_games):
                self._reward_dense[key] = self.phi_dense(m)
            else:
                st = self.structure
                M = self.num_teams
                sizes = [st.team_size(t) for t in range(M)]
                out = np.zeros((self.num_states, self.num_joint_actions))
                for s, g in enumerate(self.stage_games):
                    dense = np.zeros(tuple(reversed(sizes)))
                    for l in g.opponents(m):
                        table = g.payoffs[(m, i)][l] if g.has_payoffs(m, i) else g.potentials[(m, l)]
                        dense += np.moveaxis(
                            table.reshape(sizes[m], sizes[l], *[1] * (M - 2)),
                            (0, 1), (M - 1 - m, M - 1 - l))
                    out[s] = dense.reshape(-1)
                out.setflags(write=False)
                self._reward_dense[key] = out
        return self._reward_dense[key]

    def q_groups(self):
        """Agents sharing a Q-table: whole teams under identical-interest rewards.

        Returns (keys, key_of) where keys lists table keys and key_of maps
        (team, agent) to its key.  Agents with explicit payoff tables get
        their own table; otherwise all members of a team share one, since
        their rewards coincide with the team potential.
        """
        keys = []
        key_of = {}
        for m in range(self.num_teams):
            team_has_payoffs = any(
                g.has_payoffs(m, i) for g in self.stage_games
                for i in range(self.structure.num_agents(m)))
            if team_has_payoffs:
                for i in range(self.structure.num_agents(m)):
                    keys.append((m, i))
                    key_of[(m, i)] = (m, i)
            else:
                keys.append((m, 0))
                for i in range(self.structure.num_agents(m)):
                    key_of[(m, i)] = (m, 0)
        return keys, key_of

    def validate(self) -> bool:
        return all(validate_potential(g).ok and validate_zero_sum(g).ok
                   for g in self.stage_games)


@dataclass(frozen=True)
class MarkovConfig:
    variant: str = "team-fp"            # team-fp | independent-team-fp
    algorithm: str = "model-based"      # model-based | model-free
    tau: float = 0.1
    delta: float = 0.5
    schedule: StepSchedule = field(default_factory=StepSchedule.harmonic)
    seed: int = 0
    episodes: int = 10_000
    stride: int = 100
    q_init: str = "zeros"               # zeros | rewards

    def __post_init__(self):
        if self.variant not in ("team-fp", "independent-team-fp"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.algorithm not in ("model-based", "model-free"):
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.q_init not in ("zeros", "rewards"):
            raise ValueError(f"unknown q_init {self.q_init!r}")
        if self.tau <= 0:
            raise ValueError("temperature must be positive")


@dataclass
class MGLearnerState:
    k: int
    beliefs: list            # per team: (S, H, |A^m|) empirical averages
    q: dict                  # q-group key -> (S, H, A_total)
    last_joint: np.ndarray   # (S, H, num_teams) team joint actions
    counts_sh: np.ndarray    # (S, H) visits strictly before the current episode
    counts_sha: np.ndarray   # (S, H, A_total) realized-(s,a) counts (model-free gating)
    rng_agent: np.random.Generator
    rng_env: np.random.Generator
    key_of: dict


def initial_mg_state(mg: MarkovTeamGame, config: MarkovConfig, trial: int = 0) -> MGLearnerState:
    st = mg.structure
    S, H, A = mg.num_states, mg.horizon, mg.num_joint_actions
    rng_agent = make_rng(config.seed ^ trial)
    rng_env = make_rng((config.seed ^ trial) ^ ENV_STREAM_SALT)
    beliefs = [np.full((S, H, st.team_size(m)), 1.0 / st.team_size(m))
               for m in range(mg.num_teams)]
    keys, key_of = mg.q_groups()
    q = {}
    for key in keys:
        if config.q_init == "rewards":
            q[key] = np.repeat(mg.reward_dense(*key)[:, None, :], H, axis=1).copy()
        else:
            q[key] = np.zeros((S, H, A))
    last = np.empty((S, H, mg.num_teams), dtype=np.int64)
    for s in range(S):
        for h in range(H):
            for m in range(mg.num_teams):
                last[s, h, m] = int(rng_agent.integers(st.team_size(m)))
    return MGLearnerState(0, beliefs, q, last, np.zeros((S, H), dtype=np.int64),
                          np.zeros((S, H, A), dtype=np.int64), rng_agent, rng_env, key_of)


def _team_value_vector(mg: MarkovTeamGame, q_row: np.ndarray, m: int, beliefs_sh) -> np.ndarray:
    """Contract a dense Q row over opponent-team axes, leaving team m's joint axis."""
    M = mg.num_teams
    sizes = [mg.structure.team_size(t) for t in range(M)]
    if M == 2:
        l = 1 - m
        grid = q_row.reshape(sizes[1], sizes[0])
        return grid @ beliefs_sh[0] if m == 1 else beliefs_sh[1] @ grid
    tensor = q_row.reshape(tuple(reversed(sizes)))
    letters = [chr(ord("a") + t) for t in range(M)]
    sub = "".join(letters[M - 1 - t] for t in range(M))
    operands = ",".join([sub] + [letters[l] for l in range(M) if l != m])
    return np.einsum(operands + "->" + letters[m], tensor,
                     *[beliefs_sh[l] for l in range(M) if l != m])


def _stage_step(mg: MarkovTeamGame, state: MGLearnerState, config: MarkovConfig,
                s: int, h: int) -> int:
    """One Team-FP stage interaction at (s, h); returns the realized global action."""
    st = mg.structure
    rng = state.rng_agent
    beliefs_sh = [state.beliefs[l][s, h] for l in range(mg.num_teams)]
    independent = config.variant == "independent-team-fp"
    for m in range(mg.num_teams):
        joint = int(state.last_joint[s, h, m])
        prev = mg._decode_tables[m][joint]
        actions = list(prev)
        vals_cache = {}

        def payoff_vector(i):
            key = state.key_of[(m, i)]
            if key not in vals_cache:
                vals_cache[key] = _team_value_vector(mg, state.q[key][s, h], m, beliefs_sh)
            return vals_cache[key][mg.own_rows(m, i)[joint]]

        if independent:
            for i in range(st.num_agents(m)):
                if rng.random() < config.delta:
                    p = smoothed_best_response(payoff_vector(i), config.tau)
                    actions[i] = sample_index(p, rng)
        else:
            i = int(rng.integers(st.num_agents(m)))
            p = smoothed_best_response(payoff_vector(i), config.tau)
            actions[i] = sample_index(p, rng)
        state.last_joint[s, h, m] = st.encode(m, actions)
    return mg.global_encode(state.last_joint[s, h])


def _all_values(mg: MarkovTeamGame, state: MGLearnerState) -> dict:
    """v(s, h) for every Q group: Q at the current own-team action vs current beliefs."""
    st = mg.structure
    S, H, M = mg.num_states, mg.horizon, mg.num_teams
    sizes = [st.team_size(t) for t in range(M)]
    out = {}
    for key, Q in state.q.items():
        m = key[0]
        Qr = Q.reshape((S, H) + tuple(reversed(sizes)))
        if M == 2:
            l = 1 - m
            if m == 0:
                team_vals = np.einsum("shba,shb->sha", Qr, state.beliefs[1])
            else:
                team_vals = np.einsum("shba,sha->shb", Qr, state.beliefs[0])
        else:
            letters = [chr(ord("a") + t) for t in range(M)]
            sub = "YZ" + "".join(letters[M - 1 - t] for t in range(M))
            operands = ",".join([sub] + ["YZ" + letters[l] for l in range(M) if l != m])
            team_vals = np.einsum(operands + "->YZ" + letters[m], Qr,
                                  *[state.beliefs[l] for l in range(M) if l != m])
        own = state.last_joint[:, :, m][..., None]
        out[key] = np.take_along_axis(team_vals, own, axis=2)[..., 0]
    return out


def _belief_update(state: MGLearnerState, mg: MarkovTeamGame, s: int, h: int, alpha: float):
    for l in range(mg.num_teams):
        row = state.beliefs[l][s, h]
        row *= 1.0 - alpha
        row[state.last_joint[s, h, l]] += alpha
        row /= row.sum()


def run_episode(mg: MarkovTeamGame, state: MGLearnerState, config: MarkovConfig) -> list:
    """One episode: play H stages, then apply the gated belief and Q updates.

    Model-based targets back up the full expected continuation through the
    known kernel at every action; model-free targets bootstrap from the
    realized next state and update only the realized (s, a) entry, with its
    own visit-count step size.  Values v are computed for all (state, stage)
    pairs with the pre-update tables; the visit indicator gates the updates.
    Returns the realized trajectory [(s, a_global)] per stage.
    """
    H = mg.horizon
    s = sample_index(mg.p0, state.rng_env)
    traj = []
    for h in range(H):
        a = _stage_step(mg, state, config, s, h)
        traj.append((s, a))
        if h < H - 1:
            s = sample_index(mg.kernel[s, a], state.rng_env)

    values = _all_values(mg, state)
    model_free = config.algorithm == "model-free"
    for h in range(H):
        s_h, a_h = traj[h]
        alpha = config.schedule.alpha(int(state.counts_sh[s_h, h]))
        for key, Q in state.q.items():
            if model_free:
                target = mg.reward_dense(*key)[s_h, a_h]
                if h < H - 1:
                    target += values[key][traj[h + 1][0], h + 1]
                alpha_q = config.schedule.alpha(int(state.counts_sha[s_h, h, a_h]))
                Q[s_h, h, a_h] += alpha_q * (target - Q[s_h, h, a_h])
            else:
                target = mg.reward_dense(*key)[s_h].copy()
                if h < H - 1:
                    target += mg.kernel[s_h] @ values[key][:, h + 1]
                Q[s_h, h] += alpha * (target - Q[s_h, h])
        _belief_update(state, mg, s_h, h, alpha)
    for h in range(H):
        s_h, a_h = traj[h]
        state.counts_sh[s_h, h] += 1
        state.counts_sha[s_h, h, a_h] += 1
    state.k += 1
    return traj


def best_response_dp(mg: MarkovTeamGame, opponents: dict, m: int):
    """Exact best response of team m against fixed (state, stage)-Markov opponents.

    Backward induction over stages; ties break toward the lowest joint-action
    index.  Returns (value under p0, deterministic strategy of shape (S, H)).
    """
    S, H, A = mg.num_states, mg.horizon, mg.num_joint_actions
    phi = mg.phi_dense(m)
    V = np.zeros(S)
    strategy = np.zeros((S, H), dtype=np.int64)
    for h in range(H - 1, -1, -1):
        W = phi.copy()
        if h < H - 1:
            W += (mg.kernel.reshape(S * A, S) @ V).reshape(S, A)
        vals = np.stack([
            _team_value_vector(mg, W[s], m, [opponents.get(l, np.empty(0)) if l == m
                                             else opponents[l][s, h]
                                             for l in range(mg.num_teams)])
            for s in range(S)
        ])
        strategy[:, h] = np.argmax(vals, axis=1)
        V = vals.max(axis=1)
    return float(mg.p0 @ V), strategy


def policy_value(mg: MarkovTeamGame, strategies: list, m: int) -> float:
    """Exact expected cumulative team-m potential under a full strategy profile."""
    S, H = mg.num_states, mg.horizon
    phi = mg.phi_dense(m)
    d = mg.p0.copy()
    total = 0.0
    for h in range(H):
        dense = np.stack([
            _joint_dense([strategies[l][s, h] for l in range(mg.num_teams)])
            for s in range(S)
        ])
        total += float(np.sum(d * np.einsum("sa,sa->s", phi, dense)))
        if h < H - 1:
            d = np.einsum("s,sa,sap->p", d, dense, mg.kernel)
    return total


def _joint_dense(team_vectors) -> np.ndarray:
    v = np.asarray(team_vectors[0])
    for t in team_vectors[1:]:
        v = np.outer(t, v).ravel()
    return v


def mg_tng(mg: MarkovTeamGame, strategies: list) -> tuple[np.ndarray, float]:
    """Per-team and total Markov-game team-Nash gap at a (state, stage)-Markov profile."""
    gaps = np.empty(mg.num_teams)
    for m in range(mg.num_teams):
        opponents = {l: strategies[l] for l in range(mg.num_teams) if l != m}
        best, _ = best_response_dp(mg, opponents, m)
        gaps[m] = best - policy_value(mg, strategies, m)
    return gaps, float(gaps.sum())


@dataclass
class MGRunRecord:
    episodes: np.ndarray
    tng_teams: np.ndarray
    tng_total: np.ndarray
    seed: int = 0
    trial: int = 0


def run_mg(mg: MarkovTeamGame, config: MarkovConfig, trial: int = 0) -> MGRunRecord:
    """Run episodes of the configured learner, sampling the MG team-Nash gap.

    The metric is evaluated at the learners' belief profile, the empirical
    average of play at each (state, stage).
    """
    state = initial_mg_state(mg, config, trial)
    eps, gaps, totals = [], [], []

    def record():
        per_team, total = mg_tng(mg, state.beliefs)
        eps.append(state.k)
        gaps.append(per_team)
        totals.append(total)

    record()
    for _ in range(config.episodes):
        run_episode(mg, state, config)
        if state.k % config.stride == 0 or state.k == config.episodes:
            record()
    return MGRunRecord(np.array(eps), np.array(gaps), np.array(totals),
                       seed=config.seed, trial=trial)
