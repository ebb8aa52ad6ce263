"""Multi-team games with pairwise-separable team potentials.

A game is a collection of teams, each a tuple of agents with finite action
sets.  Cross-team interaction is stored as one dense matrix per ordered team
pair, mapping (own joint action, opponent joint action) to a real value.  Team
joint actions are indexed in mixed radix, least-significant agent first.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

POTENTIAL_TOL = 1e-9
DEFAULT_VALIDATION_CAP = 2**20


class ValidationCapExceeded(RuntimeError):
    """Raised when a brute-force validator is asked to scan too large a game."""


@dataclass(frozen=True)
class TeamStructure:
    """Team/agent layout: ``teams[m][i]`` is the action-set size of agent i of team m."""

    teams: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.teams) < 1:
            raise ValueError("need at least one team")
        for members in self.teams:
            if len(members) < 1:
                raise ValueError("every team needs at least one agent")
            if any(n < 1 for n in members):
                raise ValueError("action-set sizes must be >= 1")

    @staticmethod
    def of(teams) -> "TeamStructure":
        return TeamStructure(tuple(tuple(int(n) for n in members) for members in teams))

    @property
    def num_teams(self) -> int:
        return len(self.teams)

    def num_agents(self, m: int) -> int:
        return len(self.teams[m])

    def team_size(self, m: int) -> int:
        """Number of joint actions of team m."""
        size = 1
        for n in self.teams[m]:
            size *= n
        return size

    def total_size(self) -> int:
        """Number of full joint action profiles across all teams."""
        size = 1
        for m in range(self.num_teams):
            size *= self.team_size(m)
        return size

    def strides(self, m: int) -> tuple[int, ...]:
        """Mixed-radix strides of team m, agent 0 least significant."""
        out = []
        s = 1
        for n in self.teams[m]:
            out.append(s)
            s *= n
        return tuple(out)

    def encode(self, m: int, actions) -> int:
        """Pack per-agent actions of team m into a joint-action index."""
        idx = 0
        for a, n, s in zip(actions, self.teams[m], self.strides(m)):
            if not 0 <= a < n:
                raise IndexError(f"action {a} out of range for size {n}")
            idx += a * s
        return idx

    def decode(self, m: int, index: int) -> tuple[int, ...]:
        """Unpack a joint-action index of team m into per-agent actions."""
        if not 0 <= index < self.team_size(m):
            raise IndexError(f"joint index {index} out of range for team {m}")
        out = []
        for n in self.teams[m]:
            out.append(index % n)
            index //= n
        return tuple(out)


@dataclass
class ValidationReport:
    ok: bool
    violations: list = field(default_factory=list)
    message: str = ""

    def __bool__(self):
        return self.ok


@dataclass
class MultiTeamGame:
    """Multi-team game with pairwise potential tables and optional agent payoffs.

    ``potentials[(m, l)]`` is the |A^m| x |A^l| table of the m-vs-l potential
    component; the team-m potential at a full profile is the sum over l != m.
    ``payoffs[(m, i)][l]`` is agent (m, i)'s pairwise payoff table against team
    l, same shape as the potential table.  When an agent has no payoff entry,
    its payoff is the team potential (identical-interest case).

    Tables are marked read-only after construction; the object is safe to
    share across concurrent runs.
    """

    structure: TeamStructure
    potentials: dict
    payoffs: dict = field(default_factory=dict)
    zero_sum: bool = True

    def __post_init__(self):
        M = self.structure.num_teams
        for m in range(M):
            for l in range(M):
                if m == l:
                    continue
                if (m, l) not in self.potentials:
                    raise ValueError(f"missing potential table for pair ({m},{l})")
        for (m, l), table in self.potentials.items():
            table = np.ascontiguousarray(table, dtype=np.float64)
            shape = (self.structure.team_size(m), self.structure.team_size(l))
            if table.shape != shape:
                raise ValueError(f"potential table ({m},{l}) has shape {table.shape}, want {shape}")
            if not np.all(np.isfinite(table)):
                raise ValueError(f"potential table ({m},{l}) has non-finite entries")
            table.setflags(write=False)
            self.potentials[(m, l)] = table
        for (m, i), per_opp in self.payoffs.items():
            for l, table in per_opp.items():
                table = np.ascontiguousarray(table, dtype=np.float64)
                shape = (self.structure.team_size(m), self.structure.team_size(l))
                if table.shape != shape:
                    raise ValueError(f"payoff table ({m},{i}) vs {l} has shape {table.shape}, want {shape}")
                if not np.all(np.isfinite(table)):
                    raise ValueError(f"payoff table ({m},{i}) vs {l} has non-finite entries")
                table.setflags(write=False)
                per_opp[l] = table

    @property
    def num_teams(self) -> int:
        return self.structure.num_teams

    def opponents(self, m: int):
        return [l for l in range(self.num_teams) if l != m]

    def has_payoffs(self, m: int, i: int) -> bool:
        return (m, i) in self.payoffs

    def max_abs_potential(self) -> float:
        """Largest pairwise-potential magnitude, the phi-bar constant of the TNG bounds."""
        return max(float(np.max(np.abs(t))) for t in self.potentials.values())


def phi_m(game: MultiTeamGame, m: int, joint) -> float:
    """Team-m potential at the full profile ``joint`` (one joint index per team)."""
    total = 0.0
    am = joint[m]
    for l in game.opponents(m):
        total += game.potentials[(m, l)][am, joint[l]]
    return float(total)


def phi_m_vector(game: MultiTeamGame, m: int, beliefs) -> np.ndarray:
    """Expected team-m potential against ``beliefs`` for every own joint action.

    ``beliefs`` holds one simplex vector per team (entry m is ignored).
    Returns sum over opponents l of ``potentials[(m, l)] @ beliefs[l]``.
    """
    out = np.zeros(game.structure.team_size(m))
    for l in game.opponents(m):
        out += game.potentials[(m, l)] @ beliefs[l]
    return out


def phi_m_vs_beliefs(game: MultiTeamGame, m: int, own: int, beliefs) -> float:
    """Expected team-m potential of own joint action ``own`` against opponent beliefs."""
    total = 0.0
    for l in game.opponents(m):
        total += game.potentials[(m, l)][own] @ beliefs[l]
    return float(total)


def own_action_rows(structure: TeamStructure, m: int, i: int, teammate_actions) -> np.ndarray:
    """Team-m joint indices spanned by agent i's actions with teammates fixed.

    ``teammate_actions`` is the full per-agent action tuple of team m; slot i is
    ignored.
    """
    strides = structure.strides(m)
    base = 0
    for j, a in enumerate(teammate_actions):
        if j != i:
            base += a * strides[j]
    return base + strides[i] * np.arange(structure.teams[m][i])


def agent_payoff_vs(game: MultiTeamGame, m: int, i: int, teammate_actions, beliefs,
                    via_potential: bool = False) -> np.ndarray:
    """Agent (m, i)'s expected payoff for each own action.

    Teammates play the fixed actions in ``teammate_actions``; opponent teams
    play their belief vectors.  With ``via_potential`` (or when the agent has
    no payoff tables) the team potential is evaluated instead; the induced
    smoothed best response is identical either way because unilateral
    deviations shift payoff and potential by the same amount.
    """
    rows = own_action_rows(game.structure, m, i, teammate_actions)
    q = np.zeros(len(rows))
    use_payoff = not via_potential and game.has_payoffs(m, i)
    for l in game.opponents(m):
        table = game.payoffs[(m, i)][l] if use_payoff else game.potentials[(m, l)]
        q += table[rows] @ beliefs[l]
    return q


def _check_cap(game: MultiTeamGame, cap: int):
    total = game.structure.total_size()
    if total > cap:
        raise ValidationCapExceeded(
            f"game has {total} joint profiles, above the brute-force cap {cap}; "
            "validation is desk-scale only")


def validate_potential(game: MultiTeamGame, cap: int = DEFAULT_VALIDATION_CAP,
                       tol: float = POTENTIAL_TOL, max_violations: int = 100) -> ValidationReport:
    """Exhaustively check the potential property for every unilateral deviation.

    For every agent, every pair of own actions with teammates fixed, and every
    opponent profile, the payoff difference must equal the potential
    difference.  The per-opponent differences are separable, so the extreme
    total discrepancy over opponent profiles is the sum of per-team extremes;
    checking those extremes is equivalent to the full profile scan.
    """
    _check_cap(game, cap)
    st = game.structure
    violations = []
    for m in range(st.num_teams):
        opponents = game.opponents(m)
        for i in range(st.num_agents(m)):
            if not game.has_payoffs(m, i):
                continue  # identical interest: Eq-by-construction
            n_i = st.teams[m][i]
            if n_i < 2:
                continue
            for am in range(st.team_size(m)):
                actions = st.decode(m, am)
                rows = own_action_rows(st, m, i, actions)
                for dev in range(n_i):
                    if dev == actions[i]:
                        continue
                    hi = lo = 0.0
                    worst = []
                    for l in opponents:
                        diff = (game.payoffs[(m, i)][l][rows[dev]] - game.payoffs[(m, i)][l][am]) \
                            - (game.potentials[(m, l)][rows[dev]] - game.potentials[(m, l)][am])
                        hi += float(np.max(diff))
                        lo += float(np.min(diff))
                        worst.append((l, int(np.argmax(np.abs(diff)))))
                    mag = max(abs(hi), abs(lo))
                    if mag > tol:
                        violations.append({
                            "team": m, "agent": i, "joint": am, "deviation": dev,
                            "opponent_profile": worst, "discrepancy": mag,
                        })
                        if len(violations) >= max_violations:
                            return ValidationReport(False, violations, "max violations reached")
    return ValidationReport(not violations, violations)


def validate_zero_sum(game: MultiTeamGame, cap: int = DEFAULT_VALIDATION_CAP,
                      tol: float = POTENTIAL_TOL) -> ValidationReport:
    """Check that team potentials sum to zero at every profile.

    With pairwise tables it suffices that ``potentials[(l, m)] == -potentials[(m, l)].T``
    for every pair: the pointwise sum at any profile is then a sum of zero
    matrices, so the pairwise identity implies the pointwise zero-sum property.
    """
    _check_cap(game, cap)
    violations = []
    M = game.num_teams
    for m in range(M):
        for l in range(m + 1, M):
            residual = game.potentials[(l, m)] + game.potentials[(m, l)].T
            mag = float(np.max(np.abs(residual)))
            if mag > tol:
                violations.append({"pair": (m, l), "max_residual": mag})
    return ValidationReport(not violations, violations)


def zero_sum_pointwise(game: MultiTeamGame, cap: int = DEFAULT_VALIDATION_CAP,
                       tol: float = POTENTIAL_TOL) -> bool:
    """Direct profile-by-profile zero-sum check, for cross-validating the matrix test."""
    _check_cap(game, cap)
    st = game.structure
    M = st.num_teams
    sizes = [st.team_size(m) for m in range(M)]
    total = np.zeros(sizes)
    for m in range(M):
        for l in range(m + 1, M):
            pair = game.potentials[(m, l)] + game.potentials[(l, m)].T
            shape = [1] * M
            shape[m] = sizes[m]
            shape[l] = sizes[l]
            total += pair.reshape(shape)
    return bool(np.max(np.abs(total)) <= tol)


def coarsen_permutation(structure: TeamStructure, m: int, groups) -> tuple[tuple[int, ...], np.ndarray]:
    """Super-agent sizes and index map for one team under a grouping.

    ``groups`` partitions the member positions of team m.  Returns the new
    per-group action-set sizes and ``perm`` with ``perm[new_index] = old_index``.
    """
    members = list(range(structure.num_agents(m)))
    flat = [j for g in groups for j in g]
    if sorted(flat) != members:
        raise ValueError(f"groups {groups} do not partition team {m} members {members}")
    sizes = []
    for g in groups:
        size = 1
        for j in g:
            size *= structure.teams[m][j]
        sizes.append(size)
    team_size = structure.team_size(m)
    perm = np.empty(team_size, dtype=np.int64)
    new = TeamStructure.of([sizes])
    for x in range(team_size):
        group_idx = new.decode(0, x)
        actions = [0] * structure.num_agents(m)
        for g, gi in zip(groups, group_idx):
            for j in g:
                actions[j] = gi % structure.teams[m][j]
                gi //= structure.teams[m][j]
        perm[x] = structure.encode(m, actions)
    return tuple(sizes), perm


def coarsen_game(game: MultiTeamGame, grouping) -> MultiTeamGame:
    """Merge agents into super-agents acting as single decision makers.

    ``grouping[m]`` partitions team m's member positions into groups; each
    group becomes one agent whose action set is the product of its members'.
    Potential tables are re-indexed under the induced bijection, so potential
    values are preserved pointwise.  Super-agents keep identical-interest
    payoffs (they respond to the team potential directly).
    """
    st = game.structure
    if len(grouping) != st.num_teams:
        raise ValueError("grouping must cover every team")
    sizes = []
    perms = []
    for m in range(st.num_teams):
        s, perm = coarsen_permutation(st, m, grouping[m])
        sizes.append(s)
        perms.append(perm)
    new_structure = TeamStructure.of(sizes)
    potentials = {}
    for (m, l), table in game.potentials.items():
        potentials[(m, l)] = table[np.ix_(perms[m], perms[l])]
    return MultiTeamGame(new_structure, potentials, zero_sum=game.zero_sum)
