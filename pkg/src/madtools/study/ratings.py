"""Aggregate preference records into win rates and Elo-scale ratings.

The rating fit is a Bradley-Terry model solved by minorization-maximization
rather than sequential Elo updates: the result is deterministic and
independent of record order, which sequential updates are not.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Criterion, PreferenceRecord

ELO_ANCHOR = 1500.0
ELO_SCALE = 400.0 / math.log(10.0)
# half a pseudo-game per pair keeps every strength finite and identifiable
PAIR_PRIOR_GAMES = 0.5
MM_TOL = 1e-10
MM_MAX_ITER = 100_000


@dataclass(frozen=True)
class ModelRating:
    model: str
    elo: float
    wins: int
    ties: int
    losses: int


@dataclass(frozen=True)
class PairRate:
    model_a: str
    model_b: str
    n: int
    a_pref: float
    b_pref: float
    no_pref: float


@dataclass(frozen=True)
class RatingTable:
    criterion: Criterion
    models: tuple[ModelRating, ...]
    pair_rates: tuple[PairRate, ...]


def win_rates(records: list[PreferenceRecord], criterion: Criterion,
              models: tuple[str, ...] | None = None) -> list[PairRate]:
    """Per-pair preference fractions; |rating| >= 1 counts as a preference."""
    from itertools import combinations

    recs = [r for r in records if r.criterion is criterion]
    if models is None:
        names = sorted({r.model_a for r in recs} | {r.model_b for r in recs})
    else:
        names = sorted(models)
    out = []
    for a, b in combinations(names, 2):
        sub = [r for r in recs if r.model_a == a and r.model_b == b]
        n = len(sub)
        if n == 0:
            out.append(PairRate(a, b, 0, 0.0, 0.0, 0.0))
            continue
        a_n = sum(1 for r in sub if r.rating <= -1)
        b_n = sum(1 for r in sub if r.rating >= 1)
        out.append(PairRate(a, b, n, a_n / n, b_n / n, (n - a_n - b_n) / n))
    return out


def _win_matrix(records: list[PreferenceRecord], criterion: Criterion,
                index: dict[str, int]) -> np.ndarray:
    n = len(index)
    w = np.zeros((n, n), dtype=np.float64)
    for r in records:
        if r.criterion is not criterion:
            continue
        a, b = index[r.model_a], index[r.model_b]
        if r.rating <= -1:
            w[a, b] += abs(r.rating)  # strength 2 counts as a double win
        elif r.rating >= 1:
            w[b, a] += r.rating
        else:
            w[a, b] += 0.5
            w[b, a] += 0.5
    return w


def fit_ratings(records: list[PreferenceRecord], criterion: Criterion,
                models: tuple[str, ...] | None = None) -> RatingTable:
    """Bradley-Terry MM fit mapped to the Elo scale, anchored at mean 1500.

    Preferences become weighted game outcomes (strong = 2 wins, plain = 1,
    none = half each); every pair additionally gets PAIR_PRIOR_GAMES split
    evenly, so uncovered models sit exactly at the anchor. Iteration stops
    when the largest relative strength change is below MM_TOL.
    """
    if models is None:
        names = sorted({r.model_a for r in records} | {r.model_b for r in records})
    else:
        names = sorted(models)
    if len(names) < 2:
        raise ValueError("rating fit needs at least 2 models")
    index = {m: i for i, m in enumerate(names)}
    n = len(names)

    w = _win_matrix(records, criterion, index)
    prior = (PAIR_PRIOR_GAMES / 2.0) * (np.ones((n, n)) - np.eye(n))
    w = w + prior

    s = np.ones(n)
    games = w + w.T
    total_wins = w.sum(axis=1)
    for _ in range(MM_MAX_ITER):
        denom = (games / (s[:, None] + s[None, :])).sum(axis=1)
        s_new = total_wins / denom
        s_new = s_new / np.exp(np.mean(np.log(s_new)))  # geometric mean 1
        done = np.max(np.abs(s_new - s) / s) < MM_TOL
        s = s_new
        if done:
            break

    elo = ELO_ANCHOR + ELO_SCALE * np.log(s)  # mean log s is 0 by normalization

    side = {m: {"wins": 0, "ties": 0, "losses": 0} for m in names}
    for r in records:
        if r.criterion is not criterion:
            continue
        if r.rating <= -1:
            side[r.model_a]["wins"] += 1
            side[r.model_b]["losses"] += 1
        elif r.rating >= 1:
            side[r.model_b]["wins"] += 1
            side[r.model_a]["losses"] += 1
        else:
            side[r.model_a]["ties"] += 1
            side[r.model_b]["ties"] += 1

    ratings = tuple(
        ModelRating(model=m, elo=float(elo[index[m]]),
                    wins=side[m]["wins"], ties=side[m]["ties"], losses=side[m]["losses"])
        for m in names
    )
    return RatingTable(
        criterion=criterion,
        models=ratings,
        pair_rates=tuple(win_rates(records, criterion, models=tuple(names))),
    )
