"""Seeded generators for the game families used in the experiments.

All generators are deterministic in their seed (counter-based Philox) and
every zero-sum family enforces the pairwise identity
``potentials[(l, m)] = -potentials[(m, l)].T`` structurally, which implies the
pointwise zero-sum property.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import make_rng
from .game import MultiTeamGame, TeamStructure
from .markov import MarkovTeamGame

DEFAULT_RANGE = (-1.0, 1.0)


def phi_bar(game: MultiTeamGame) -> float:
    """Largest absolute pairwise-potential entry (the independent-variant rate constant)."""
    return max(float(np.max(np.abs(t))) for t in game.potentials.values())


def _uniform(rng, shape, entry_range):
    lo, hi = entry_range
    return rng.uniform(lo, hi, size=shape)


def _agent_action_columns(structure: TeamStructure, m: int) -> list:
    """Per-agent action value at every team joint index (for table lifting)."""
    size = structure.team_size(m)
    cols = []
    for i, n in enumerate(structure.teams[m]):
        stride = structure.strides(m)[i]
        cols.append((np.arange(size) // stride) % n)
    return cols


def random_zsptg(team_actions, entry_range=DEFAULT_RANGE, seed: int = 0,
                 dummy_payoffs: bool = False) -> MultiTeamGame:
    """Random zero-sum potential team game with i.i.d. uniform pairwise tables.

    With ``dummy_payoffs`` each agent receives an explicit payoff equal to the
    team potential plus a random term that is constant in the agent's own
    action, exercising the non-identical-payoff case without affecting the
    dynamics.
    """
    st = TeamStructure.of(team_actions)
    rng = make_rng(seed)
    potentials = {}
    for m in range(st.num_teams):
        for l in range(m + 1, st.num_teams):
            table = _uniform(rng, (st.team_size(m), st.team_size(l)), entry_range)
            potentials[(m, l)] = table
            potentials[(l, m)] = -table.T
    payoffs = {}
    if dummy_payoffs:
        for m in range(st.num_teams):
            cols = _agent_action_columns(st, m)
            strides = st.strides(m)
            for i in range(st.num_agents(m)):
                # collapse the own-action coordinate so the dummy term cannot
                # change under unilateral deviations
                base = np.arange(st.team_size(m)) - cols[i] * strides[i]
                per_opp = {}
                for l in range(st.num_teams):
                    if l == m:
                        continue
                    noise = _uniform(rng, (st.team_size(m), st.team_size(l)), DEFAULT_RANGE)
                    per_opp[l] = potentials[(m, l)] + noise[base]
                payoffs[(m, i)] = per_opp
    return MultiTeamGame(st, potentials, payoffs, zero_sum=True)


@dataclass(frozen=True)
class LocalPayoff:
    """One networked local payoff term owned by an agent.

    ``scope`` lists the (team, agent) pairs the term depends on, in the axis
    order of ``table``.  The owner's team earns the term positively; when the
    scope reaches into one other team, that team earns it negatively.
    """

    owner: tuple
    scope: tuple
    table: np.ndarray


def networked_game(team_actions, local_payoffs) -> MultiTeamGame:
    """Compile networked local payoffs into pairwise potential tables.

    Follows the two-team construction where a team's potential is the sum of
    its members' local payoffs minus the other teams' local payoffs.  With
    more than two teams each term's scope must stay within the owner's team
    plus at most one other team, so the minus side has a unique recipient and
    the pairwise antisymmetry (hence the zero-sum property) is preserved.
    Own-team-only terms are supported for two-team games only.
    """
    st = TeamStructure.of(team_actions)
    M = st.num_teams
    potentials = {}
    for m in range(M):
        for l in range(M):
            if m != l:
                potentials[(m, l)] = np.zeros((st.team_size(m), st.team_size(l)))
    cols = [_agent_action_columns(st, m) for m in range(M)]
    for lp in local_payoffs:
        m = lp.owner[0]
        teams_in_scope = sorted({t for t, _ in lp.scope})
        if teams_in_scope == [m]:
            others = [l for l in range(M) if l != m]
            if len(others) != 1:
                raise ValueError(
                    "own-team-only local payoffs need a unique opposing team "
                    "(two-team games); split the term across cross-team scopes instead")
            l = others[0]
        else:
            cross = [t for t in teams_in_scope if t != m]
            if len(cross) != 1:
                raise ValueError(f"scope {lp.scope} spans more than two teams")
            l = cross[0]
        # table axes follow scope order; fancy-index with broadcast rows/cols
        idx = []
        for t, a in lp.scope:
            idx.append(cols[m][a][:, None] if t == m else cols[l][a][None, :])
        lifted = np.asarray(lp.table)[tuple(idx)]
        lifted = np.broadcast_to(lifted, (st.team_size(m), st.team_size(l)))
        potentials[(m, l)] = potentials[(m, l)] + lifted
        potentials[(l, m)] = potentials[(l, m)] - lifted.T
    return MultiTeamGame(st, potentials, zero_sum=True)


def random_networked_game(team_actions, edges_per_pair: int = 6, seed: int = 0,
                          entry_range=DEFAULT_RANGE) -> MultiTeamGame:
    """Random sparse cross-team network with one random table per edge.

    Edges connect uniformly chosen agents from each team pair; each edge's
    local payoff depends on its two endpoints only, so payoffs are local to
    1-hop neighborhoods.
    """
    st = TeamStructure.of(team_actions)
    rng = make_rng(seed)
    local = []
    for m in range(st.num_teams):
        for l in range(m + 1, st.num_teams):
            for _ in range(edges_per_pair):
                i = int(rng.integers(st.num_agents(m)))
                j = int(rng.integers(st.num_agents(l)))
                table = _uniform(rng, (st.teams[m][i], st.teams[l][j]), entry_range)
                local.append(LocalPayoff((m, i), ((m, i), (l, j)), table))
    return networked_game(team_actions, local)


def large_network_game(seed: int = 0, agents_per_team: int = 9, num_teams: int = 3,
                       edges_per_pair: int = 12) -> MultiTeamGame:
    """Desk-scale analogue of the large networked experiment: 3 teams x 9 binary agents."""
    team_actions = [[2] * agents_per_team for _ in range(num_teams)]
    return random_networked_game(team_actions, edges_per_pair=edges_per_pair, seed=seed)


def airport_game(gates: int = 6, intruders: int = 3, cost: float = 0.2,
                 seed: int = 0) -> MultiTeamGame:
    """Airport security game: one defending chief versus a team of intruders.

    Team 0 is the defender (one agent; actions = defend gate g, or the last
    action, stand down).  Team 1 holds the intruders (actions = attack gate
    g, or the last action, stay idle).  An intruder earns +1 for attacking an
    undefended gate, -1 for attacking the defended gate, 0 when idle; the
    attacker potential is the sum of intruder gains minus the defense cost,
    and the defender potential is its negation.  The payoff magnitudes and
    the cost are design choices; only the gain/lose structure is fixed.
    """
    if gates < 1 or intruders < 1 or cost < 0:
        raise ValueError("need gates >= 1, intruders >= 1, cost >= 0")
    del seed  # deterministic construction; kept for generator-interface symmetry
    n = gates + 1
    st = TeamStructure.of([[n], [n] * intruders])
    defender_acts = np.arange(n)
    attacker_cols = _agent_action_columns(st, 1)
    phi_attack = np.zeros((st.team_size(1), n))
    for i in range(intruders):
        a_i = attacker_cols[i][:, None]
        gain = np.where(a_i == gates, 0.0,
                        np.where(a_i == defender_acts[None, :], -1.0, 1.0))
        phi_attack += gain
    phi_attack -= (defender_acts[None, :] < gates).astype(float) * cost
    potentials = {
        (1, 0): phi_attack,
        (0, 1): -phi_attack.T,
    }
    payoffs = {}
    for i in range(intruders):
        a_i = attacker_cols[i][:, None]
        gain = np.where(a_i == gates, 0.0,
                        np.where(a_i == defender_acts[None, :], -1.0, 1.0))
        payoffs[(1, i)] = {0: gain.astype(float)}
    return MultiTeamGame(st, potentials, payoffs, zero_sum=True)


def two_by_n_game(seed: int = 0, opponent_team=(2, 2, 2),
                  entry_range=DEFAULT_RANGE) -> MultiTeamGame:
    """General-sum test game: a lone two-action agent versus a three-agent team.

    Each team has its own random potential with no zero-sum coupling; the
    per-team potential property still holds (identical interest within each
    team), so the game is flagged non-zero-sum.
    """
    st = TeamStructure.of([[2], list(opponent_team)])
    rng = make_rng(seed)
    potentials = {
        (0, 1): _uniform(rng, (st.team_size(0), st.team_size(1)), entry_range),
        (1, 0): _uniform(rng, (st.team_size(1), st.team_size(0)), entry_range),
    }
    return MultiTeamGame(st, potentials, zero_sum=False)


def potential_of_potentials(seed: int = 0, team_actions=((2, 2, 2, 2), (2, 2, 2, 2)),
                            entry_range=DEFAULT_RANGE) -> MultiTeamGame:
    """Two teams whose potentials are identical instead of summing to zero."""
    st = TeamStructure.of(team_actions)
    rng = make_rng(seed)
    table = _uniform(rng, (st.team_size(0), st.team_size(1)), entry_range)
    potentials = {(0, 1): table, (1, 0): table.T}
    return MultiTeamGame(st, potentials, zero_sum=False)


def random_mg(team_actions=((2, 2), (2, 2)), num_states: int = 2, horizon: int = 10,
              seed: int = 0, entry_range=DEFAULT_RANGE,
              dummy_payoffs: bool = False) -> MarkovTeamGame:
    """Random finite-horizon Markov team game with ZSPTG stage games.

    One random zero-sum stage game per state; transition-kernel rows are
    uniform-Dirichlet; the initial distribution is uniform.
    """
    rng = make_rng(seed)
    stage_games = [
        random_zsptg(team_actions, entry_range, seed=int(rng.integers(2**63)),
                     dummy_payoffs=dummy_payoffs)
        for _ in range(num_states)
    ]
    A = stage_games[0].structure.total_size()
    kernel = rng.dirichlet(np.ones(num_states), size=(num_states, A))
    p0 = np.full(num_states, 1.0 / num_states)
    return MarkovTeamGame(horizon, stage_games, kernel, p0)


@dataclass(frozen=True)
class GenSpec:
    """Declarative generator request, as accepted by the CLI ``gen`` subcommand."""

    family: str
    seed: int = 0
    team_actions: tuple = ((2, 2, 2, 2), (2, 2, 2, 2))
    entry_range: tuple = DEFAULT_RANGE
    dummy_payoffs: bool = False
    gates: int = 6
    intruders: int = 3
    cost: float = 0.2
    edges_per_pair: int = 12
    num_states: int = 2
    horizon: int = 10

    FAMILIES = ("random-zsptg", "networked", "airport", "two-by-n",
                "potential-of-potentials", "large-network", "random-mg")

    def build(self):
        if self.family == "random-zsptg":
            return random_zsptg(self.team_actions, self.entry_range, self.seed,
                                self.dummy_payoffs)
        if self.family == "networked":
            return random_networked_game(self.team_actions, self.edges_per_pair, self.seed,
                                         self.entry_range)
        if self.family == "airport":
            return airport_game(self.gates, self.intruders, self.cost, self.seed)
        if self.family == "two-by-n":
            return two_by_n_game(self.seed)
        if self.family == "potential-of-potentials":
            return potential_of_potentials(self.seed)
        if self.family == "large-network":
            return large_network_game(self.seed, edges_per_pair=self.edges_per_pair)
        if self.family == "random-mg":
            return random_mg(self.team_actions, self.num_states, self.horizon, self.seed,
                             self.entry_range, self.dummy_payoffs)
        raise ValueError(f"unknown family {self.family!r}")
