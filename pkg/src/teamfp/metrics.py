"""Exact team-Nash-gap evaluation and the Lyapunov diagnostic."""

from __future__ import annotations

import numpy as np
from scipy.special import logsumexp

from .game import MultiTeamGame, phi_m_vector


def tng(game: MultiTeamGame, strategies) -> tuple[np.ndarray, float]:
    """Per-team and total team-Nash gap at a team-strategy profile.

    The expected team potential is linear in the own-team strategy, so the
    best deviation is attained at a pure joint action: with
    ``b = sum_l potentials[(m, l)] @ strategies[l]`` the gap of team m is
    ``max(b) - strategies[m] . b``.  Exact, no sampling.
    """
    gaps = np.empty(game.num_teams)
    for m in range(game.num_teams):
        b = phi_m_vector(game, m, strategies)
        gaps[m] = np.max(b) - strategies[m] @ b
    return gaps, float(gaps.sum())


def lyapunov(game: MultiTeamGame, strategies, tau: float) -> float:
    """Sum over teams of the entropy-regularized best-response value.

    Equals ``sum_m tau * log sum_a exp(b_m(a) / tau)``, evaluated with
    log-sum-exp stabilization.  On zero-sum games this dominates the total
    team-Nash gap and exceeds it by at most ``tau * sum_m log |A_m|``.
    """
    if tau <= 0:
        raise ValueError("temperature must be positive")
    total = 0.0
    for m in range(game.num_teams):
        b = phi_m_vector(game, m, strategies)
        total += tau * logsumexp(b / tau)
    return float(total)
