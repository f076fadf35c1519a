"""Recruitment-tree growth with a seeded branching process.

Growth model (a modelling choice, not taken from the mechanism literature):
synchronous Galton-Watson generations. Before round 1 the planner (depth 0)
recruits the first generation from ``offspring_pmf``. In round ``r`` every
agent of generation ``r`` (depth ``r``) tries the task with probability
``exec_prob`` (or the per-depth override); if any succeed, the one with the
smallest node id wins and the process stops. Otherwise each of them recruits
a number of children drawn from ``offspring_pmf``, forming generation
``r + 1``. The process also stops on extinction, after ``max_rounds``, or
once the tree has reached ``population_cap`` nodes.

Randomness: numpy ``PCG64`` seeded by ``SeedSequence([seed, run_index])``.
"""

from __future__ import annotations

import enum
import hashlib
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .attacks import CollapseMove, SybilMove
from .errors import ParameterOutOfRange
from .mechanisms import Mechanism
from .properties import ChainSums
from .rational import RationalLike, fmt, to_rational

__all__ = [
    "Strategy",
    "SimConfig",
    "RecruitmentTree",
    "SimMetrics",
    "Overlay",
    "BatchResult",
    "grow_tree",
    "run_batch",
    "strategic_overlay",
    "make_rng",
]

QUANTILES = (0.05, 0.25, 0.5, 0.75, 0.95)


class Strategy(str, enum.Enum):
    HONEST = "honest"
    SYBIL_IF_PROFITABLE = "sybil_if_profitable"
    COLLAPSE_IF_PROFITABLE = "collapse_if_profitable"


@dataclass(frozen=True)
class SimConfig:
    offspring_pmf: Mapping[int, float]
    exec_prob: float = 0.1
    exec_by_depth: Mapping[int, float] = field(default_factory=dict)
    max_rounds: int = 1000
    population_cap: int = 1_000_000
    sybil_cost: Fraction = Fraction(0)
    sybil_n_max: int = 10
    strategy: Strategy = Strategy.HONEST
    seed: int = 0

    def __post_init__(self) -> None:
        pmf = {int(k): float(v) for k, v in dict(self.offspring_pmf).items()}
        if not pmf or min(pmf) < 0 or any(v < 0 for v in pmf.values()):
            raise ParameterOutOfRange("offspring_pmf needs nonnegative counts and probabilities")
        if abs(sum(pmf.values()) - 1.0) > 1e-9:
            raise ParameterOutOfRange(f"offspring_pmf sums to {sum(pmf.values())}, not 1")
        object.__setattr__(self, "offspring_pmf", dict(sorted(pmf.items())))
        overrides = {int(k): float(v) for k, v in dict(self.exec_by_depth).items()}
        for q in [self.exec_prob, *overrides.values()]:
            if not 0.0 <= q <= 1.0:
                raise ParameterOutOfRange(f"execution probability {q} outside [0, 1]")
        object.__setattr__(self, "exec_by_depth", dict(sorted(overrides.items())))
        if self.max_rounds < 1 or self.population_cap < 1 or self.sybil_n_max < 1:
            raise ParameterOutOfRange("max_rounds, population_cap and sybil_n_max must be >= 1")
        cost = to_rational(self.sybil_cost)
        if cost < 0:
            raise ParameterOutOfRange("sybil_cost must be nonnegative")
        object.__setattr__(self, "sybil_cost", cost)
        object.__setattr__(self, "strategy", Strategy(self.strategy))

    def exec_prob_at(self, depth: int) -> float:
        return self.exec_by_depth.get(depth, self.exec_prob)

    def to_dict(self) -> dict:
        return {
            "offspring_pmf": {str(k): v for k, v in self.offspring_pmf.items()},
            "exec_prob": self.exec_prob,
            "exec_by_depth": {str(k): v for k, v in self.exec_by_depth.items()},
            "max_rounds": self.max_rounds,
            "population_cap": self.population_cap,
            "sybil_cost": fmt(self.sybil_cost),
            "sybil_n_max": self.sybil_n_max,
            "strategy": self.strategy.value,
            "seed": self.seed,
        }

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


@dataclass(frozen=True)
class RecruitmentTree:
    """Node 0 is the planner; ``parents[i]`` recruited node ``i``."""

    parents: tuple[int, ...]
    winner: Optional[int] = None

    @property
    def size(self) -> int:
        return len(self.parents)

    def depth(self, node: int) -> int:
        d = 0
        while node != 0:
            node = self.parents[node]
            d += 1
        return d

    @property
    def winning_chain(self) -> tuple[int, ...]:
        """Nodes from depth 1 down to the winner; empty if nobody executed."""
        if self.winner is None:
            return ()
        chain = []
        node = self.winner
        while node != 0:
            chain.append(node)
            node = self.parents[node]
        return tuple(reversed(chain))

    def payments(self, mech: Mechanism) -> dict[int, Fraction]:
        """Honest payment to every node; zero off the winning chain and for the planner."""
        pay = {node: Fraction(0) for node in range(self.size)}
        chain = self.winning_chain
        for k, node in enumerate(chain, start=1):
            pay[node] = mech.reward(k, len(chain))
        return pay


@dataclass(frozen=True)
class Overlay:
    """A manipulation applied to a completed tree.

    ``coalition`` lists the real agents acting together (the attacker alone
    for a sybil attack); ``net_gain`` is their combined payment change minus
    sybil creation cost. ``deltas`` covers every other chain agent.
    """

    strategy: Strategy
    realized_t: int
    reported_t: int
    move: Optional[Union[SybilMove, CollapseMove]] = None
    gain: Fraction = Fraction(0)
    net_gain: Fraction = Fraction(0)
    coalition: tuple[int, ...] = ()
    deltas: Mapping[int, Fraction] = field(default_factory=dict)


@dataclass(frozen=True)
class SimMetrics:
    completed: bool
    rounds_elapsed: int
    tree_size: int
    t: Optional[int] = None
    reported_t: Optional[int] = None
    total_payout: Optional[Fraction] = None
    leaf_reward: Optional[Fraction] = None
    sybils: int = 0
    collapsed: int = 0

    def csv_row(self, run: int) -> str:
        def opt(v):
            return "" if v is None else str(v)

        return ",".join([
            str(run),
            "true" if self.completed else "false",
            str(self.rounds_elapsed),
            opt(self.t),
            opt(self.total_payout),
            opt(self.leaf_reward),
            str(self.tree_size),
        ])


def make_rng(seed: int, run_index: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, run_index])))


def _grow(config: SimConfig, rng: np.random.Generator) -> tuple[RecruitmentTree, int]:
    counts = np.array(list(config.offspring_pmf), dtype=np.int64)
    probs = np.array(list(config.offspring_pmf.values()), dtype=float)
    probs = probs / probs.sum()
    parents: list[int] = [-1]

    def recruit(frontier: Sequence[int]) -> list[int]:
        kids = rng.choice(counts, size=len(frontier), p=probs)
        new_parents = np.repeat(np.asarray(frontier, dtype=np.int64), kids).tolist()
        room = config.population_cap - len(parents)
        new_parents = new_parents[: max(room, 0)]
        first = len(parents)
        parents.extend(new_parents)
        return list(range(first, len(parents)))

    frontier = recruit([0])
    rounds = 0
    winner = None
    while frontier and rounds < config.max_rounds:
        rounds += 1
        hits = rng.random(len(frontier)) < config.exec_prob_at(rounds)
        if hits.any():
            winner = frontier[int(np.argmax(hits))]
            break
        if len(parents) >= config.population_cap:
            break
        frontier = recruit(frontier)
    return RecruitmentTree(tuple(parents), winner), rounds


def grow_tree(
    config: SimConfig, mech: Mechanism, run_index: int = 0
) -> tuple[RecruitmentTree, SimMetrics]:
    """One seeded run: grow, pick the winner, apply the strategy, and pay."""
    tree, rounds = _grow(config, make_rng(config.seed, run_index))
    if tree.winner is None:
        return tree, SimMetrics(False, rounds, tree.size)
    t = len(tree.winning_chain)
    mech.require(t)
    overlay = strategic_overlay(
        tree, mech, config.strategy, config.sybil_cost, config.sybil_n_max
    )
    reported = overlay.reported_t
    sybils = reported - t if isinstance(overlay.move, SybilMove) else 0
    return tree, SimMetrics(
        completed=True,
        rounds_elapsed=rounds,
        tree_size=tree.size,
        t=t,
        reported_t=reported,
        total_payout=mech.chain_total(reported),
        leaf_reward=mech.reward(reported, reported),
        sybils=sybils,
        collapsed=t - reported,
    )


def _greedy_sybil(
    sums: ChainSums, k: int, t: int, cost: Fraction, n_cap: int
) -> tuple[int, Fraction]:
    """Add fakes one at a time while the net gain still rises."""
    base = sums.r(k, t)
    n, net = 0, Fraction(0)
    while n < n_cap:
        nxt = sums.segment(t + n + 1, k, k + n + 1) - base - (n + 1) * cost
        if nxt <= net:
            break
        n, net = n + 1, nxt
    return n, net


def strategic_overlay(
    tree: RecruitmentTree,
    mech: Mechanism,
    strategy: Strategy | str,
    sybil_cost: RationalLike = 0,
    n_max: int = 10,
) -> Overlay:
    """Apply one profitable manipulation by winning-chain agents, if any exists.

    Sybil: each chain agent grows fakes greedily (stop when the next fake no
    longer raises its net gain); the agent with the largest positive net gain
    acts, ties going to the deeper agent. Collapse: among profitable
    collapses the longest one acts, then the larger gain, then the shallower
    top node.
    """
    strategy = Strategy(strategy)
    chain = tree.winning_chain
    if not chain:
        raise ParameterOutOfRange("strategic_overlay needs a completed tree")
    t = len(chain)
    honest = Overlay(strategy, t, t)
    if strategy is Strategy.HONEST:
        return honest
    sums = ChainSums(mech)

    if strategy is Strategy.SYBIL_IF_PROFITABLE:
        cost = to_rational(sybil_cost)
        n_cap = n_max if mech.t_max is None else min(n_max, mech.t_max - t)
        best = None
        for k in range(1, t + 1):
            n, net = _greedy_sybil(sums, k, t, cost, n_cap)
            if n and net > 0 and (best is None or net >= best[2]):
                best = (k, n, net)
        if best is None:
            return honest
        k, n, net = best
        t2 = t + n
        deltas = {}
        for j, node in enumerate(chain, start=1):
            if j < k:
                deltas[node] = sums.r(j, t2) - sums.r(j, t)
            elif j > k:
                deltas[node] = sums.r(j + n, t2) - sums.r(j, t)
        gain = sums.segment(t2, k, k + n) - sums.r(k, t)
        return Overlay(strategy, t, t2, SybilMove(k, t, n), gain, net, (chain[k - 1],), deltas)

    best = None
    for k in range(1, t):
        for p in range(1, t - k + 1):
            gain = sums.r(k, t - p) - sums.segment(t, k, k + p)
            if gain <= 0:
                continue
            key = (p, gain, -k)
            if best is None or key > best[0]:
                best = (key, k, p, gain)
    if best is None:
        return honest
    _, k, p, gain = best
    t2 = t - p
    deltas = {}
    for j, node in enumerate(chain, start=1):
        if j < k:
            deltas[node] = sums.r(j, t2) - sums.r(j, t)
        elif j > k + p:
            deltas[node] = sums.r(j - p, t2) - sums.r(j, t)
    return Overlay(
        strategy, t, t2, CollapseMove(k, t, p), gain, gain, tuple(chain[k - 1 : k + p]), deltas
    )


@dataclass(frozen=True)
class BatchResult:
    config: SimConfig
    mechanism: str
    metrics: tuple[SimMetrics, ...]

    @property
    def runs(self) -> int:
        return len(self.metrics)

    @property
    def completed(self) -> list[SimMetrics]:
        return [m for m in self.metrics if m.completed]

    @property
    def completion_rate(self) -> float:
        return len(self.completed) / self.runs

    def _mean(self, values: list) -> Optional[float]:
        return float(np.mean([float(v) for v in values])) if values else None

    @property
    def mean_rounds(self) -> Optional[float]:
        return self._mean([m.rounds_elapsed for m in self.completed])

    @property
    def mean_total_payout(self) -> Optional[float]:
        return self._mean([m.total_payout for m in self.completed])

    @property
    def mean_leaf_reward(self) -> Optional[float]:
        return self._mean([m.leaf_reward for m in self.completed])

    @property
    def t_histogram(self) -> dict[int, int]:
        hist: dict[int, int] = {}
        for m in self.completed:
            hist[m.t] = hist.get(m.t, 0) + 1
        return dict(sorted(hist.items()))

    def quantiles(self) -> dict[str, Optional[list[float]]]:
        done = self.completed
        series = {
            "rounds_elapsed": [m.rounds_elapsed for m in done],
            "t": [m.t for m in done],
            "total_payout": [float(m.total_payout) for m in done],
            "leaf_reward": [float(m.leaf_reward) for m in done],
        }
        return {
            name: (np.quantile(np.asarray(v, dtype=float), QUANTILES).tolist() if v else None)
            for name, v in series.items()
        }

    def to_dict(self) -> dict:
        return {
            "config_digest": self.config.digest(),
            "mechanism": self.mechanism,
            "runs": self.runs,
            "completion_rate": self.completion_rate,
            "mean_rounds": self.mean_rounds,
            "t_histogram": {str(t): c for t, c in self.t_histogram.items()},
            "mean_total_payout": self.mean_total_payout,
            "mean_leaf_reward": self.mean_leaf_reward,
            "quantiles": {"levels": list(QUANTILES), **self.quantiles()},
        }

    def per_run_csv(self) -> str:
        out = io.StringIO()
        out.write("run,completed,rounds,t,total_payout,leaf_reward,tree_size\n")
        for i, m in enumerate(self.metrics):
            out.write(m.csv_row(i) + "\n")
        return out.getvalue()


def run_batch(
    config: SimConfig, mech: Mechanism, runs: int, threads: int = 1, start: int = 0
) -> BatchResult:
    """Independent runs ``start .. start+runs-1``; aggregation follows run index order."""
    if runs < 1:
        raise ParameterOutOfRange("runs must be >= 1")
    indices = range(start, start + runs)

    def one(i: int) -> SimMetrics:
        return grow_tree(config, mech, i)[1]

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            metrics = tuple(pool.map(one, indices))
    else:
        metrics = tuple(one(i) for i in indices)
    return BatchResult(config, mech.describe(), metrics)
