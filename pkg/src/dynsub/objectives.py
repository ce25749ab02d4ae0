"""Concrete submodular objectives and the multilinear extension.

Fractional points are plain dicts element -> probability in [0, 1];
omitted coordinates are 0.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass

import numpy as np

from dynsub import _kernels
from dynsub.oracle import CountedOracle, EnumerationBudgetError

BRUTE_FORCE_SUPPORT = 20


class CoverageFunction:
    """Weighted coverage: f(S) = total weight of union of covers(e), e in S."""

    def __init__(self, universe, covers):
        # universe: list of (item, weight); covers: element id -> iterable of items
        self.universe = [(item, float(w)) for item, w in universe]
        self.weights = {item: w for item, w in self.universe}
        if len(self.weights) != len(self.universe):
            raise ValueError("duplicate universe items")
        if any(w < 0 for w in self.weights.values()):
            raise ValueError("negative item weight")
        self.covers = {int(e): frozenset(items) for e, items in covers.items()}
        known = set(self.weights)
        for e, items in self.covers.items():
            if not items <= known:
                raise ValueError(f"element {e} covers unknown items")
        self.ground = frozenset(self.covers)

    def __call__(self, S):
        hit = set()
        for e in S:
            hit |= self.covers[e]
        # summed in universe order so equal sets give bit-identical values
        return sum(w for item, w in self.universe if item in hit)

    def as_oracle(self) -> CountedOracle:
        return CountedOracle(self, self.ground)

    def dump(self, path) -> None:
        items = [item for item, _ in self.universe]
        with open(path, "w") as fh:
            fh.write(f"coverage {len(self.covers)} {len(items)}\n")
            # weight lines first, in universe order, so a reload keeps the
            # exact summation order (values stay bit-identical)
            for item, w in self.universe:
                fh.write(f"w {item} {w!r}\n")
            for e in sorted(self.covers):
                fh.write(f"e {e} : " + " ".join(sorted(self.covers[e])) + "\n")

    @classmethod
    def load(cls, path) -> "CoverageFunction":
        covers = {}
        weights = {}
        items_seen = []
        with open(path) as fh:
            header = fh.readline().split()
            if len(header) != 3 or header[0] != "coverage":
                raise ValueError("bad coverage header")
            for line in fh:
                tok = line.split()
                if not tok:
                    continue
                if tok[0] == "e":
                    if tok[2] != ":":
                        raise ValueError(f"bad element line: {line!r}")
                    eid = int(tok[1])
                    covers[eid] = set(tok[3:])
                    for it in tok[3:]:
                        if it not in weights:
                            weights[it] = 1.0
                            items_seen.append(it)
                elif tok[0] == "w":
                    item, w = tok[1], float(tok[2])
                    if item not in weights:
                        items_seen.append(item)
                    weights[item] = w
                else:
                    raise ValueError(f"bad line: {line!r}")
        universe = [(it, weights[it]) for it in items_seen]
        return cls(universe, covers)


class ModularFunction:
    """f(S) = sum of per-element weights."""

    def __init__(self, weights):
        self.weights = {int(e): float(w) for e, w in weights.items()}
        self.ground = frozenset(self.weights)

    def __call__(self, S):
        return sum(self.weights[e] for e in S)

    def as_oracle(self) -> CountedOracle:
        return CountedOracle(self, self.ground)


def random_coverage(n_elements: int, n_items: int, seed: int,
                    max_cover: int = 4, weighted: bool = False) -> CoverageFunction:
    """Seeded random coverage instance; every element covers >= 1 item."""
    rng = random.Random(seed)
    items = [f"u{j}" for j in range(n_items)]
    universe = [(it, rng.uniform(0.5, 2.0) if weighted else 1.0) for it in items]
    covers = {}
    for e in range(n_elements):
        size = rng.randint(1, min(max_cover, n_items))
        covers[e] = set(rng.sample(items, size))
    return CoverageFunction(universe, covers)


@dataclass
class EstimatorBudget:
    kappa: float | None = None
    delta: float | None = None
    samples: int | None = None

    def __post_init__(self):
        if self.samples is not None:
            if self.samples < 1:
                raise ValueError("samples must be >= 1")
            return
        if self.kappa is None or self.delta is None:
            raise ValueError("give (kappa, delta) or an explicit sample count")
        if self.kappa <= 0:
            raise ValueError("kappa must be > 0")
        if not 0 < self.delta < 1:
            raise ValueError("delta must be in (0, 1)")

    def n_samples(self, value_range: float) -> int:
        if self.samples is not None:
            return self.samples
        if value_range <= 0:
            return 1
        # Hoeffding: n >= range^2/(2 kappa^2) * ln(2/delta)
        return max(1, math.ceil(
            value_range ** 2 / (2.0 * self.kappa ** 2) * math.log(2.0 / self.delta)))


def _validate_point(x):
    for e, p in x.items():
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"coordinate {e} = {p} outside [0,1]")


def plus_direction(x, S, step: float):
    """x' with coordinates in S raised by step, clamped at 1."""
    if not 0.0 < step <= 1.0:
        raise ValueError("step must be in (0, 1]")
    out = dict(x)
    for e in S:
        out[e] = min(out.get(e, 0.0) + step, 1.0)
    return out


def multilinear_exact(f, x) -> float:
    """Exact multilinear extension F(x).

    Closed form for CoverageFunction; otherwise f must be a callable
    set -> value and |support(x)| <= 20 (brute-force over subsets).
    """
    _validate_point(x)
    if isinstance(f, CoverageFunction):
        total = 0.0
        for item, w in f.universe:
            miss = 1.0
            for e in sorted(f.covers):
                if item in f.covers[e]:
                    miss *= 1.0 - x.get(e, 0.0)
            total += w * (1.0 - miss)
        return total

    support = sorted(e for e, p in x.items() if p > 0.0)
    if len(support) > BRUTE_FORCE_SUPPORT:
        raise EnumerationBudgetError(
            f"support {len(support)} exceeds brute-force cutoff {BRUTE_FORCE_SUPPORT}")
    evaluate = f.eval if isinstance(f, CountedOracle) else f
    total = 0.0
    for r in range(len(support) + 1):
        for tup in itertools.combinations(support, r):
            inside = set(tup)
            prob = 1.0
            for e in support:
                prob *= x[e] if e in inside else 1.0 - x[e]
            if prob > 0.0:
                total += prob * evaluate(frozenset(tup))
    return total


def multilinear_estimate(oracle: CountedOracle, x, budget: EstimatorBudget,
                         seed: int) -> float:
    """Mean of f over n_s independent samples S ~ x.

    Consumes exactly n_s counted queries (plus one for the value range
    when the budget is (kappa, delta)-specified).  Deterministic given
    seed; the coverage fast path runs through the batch kernel and
    charges the oracle in bulk.
    """
    _validate_point(x)
    if budget.samples is not None:
        n_s = budget.samples
    else:
        value_range = oracle.eval(oracle.ground)
        n_s = budget.n_samples(value_range)

    support = sorted(e for e, p in x.items() if p > 0.0)
    # degenerate distribution: every sample is the same set
    if all(x[e] >= 1.0 for e in support):
        v = oracle.eval(frozenset(support))
        oracle.add_count(n_s - 1)
        return v

    probs = np.array([x[e] for e in support], dtype=np.float64)
    rng = np.random.default_rng(seed)
    draws = rng.random((n_s, len(support)))
    samples = (draws < probs[None, :]).astype(np.uint8)

    inner = oracle._inner
    if isinstance(inner, CoverageFunction):
        items = [item for item, _ in inner.universe]
        weights = np.array([w for _, w in inner.universe], dtype=np.float64)
        cover = np.zeros((len(items), len(support)), dtype=np.uint8)
        for j, e in enumerate(support):
            cov = inner.covers[e]
            for i, item in enumerate(items):
                if item in cov:
                    cover[i, j] = 1
        values = _kernels.coverage_batch_eval(weights, cover, samples)
        oracle.add_count(n_s)
        return math.fsum(values.tolist()) / n_s

    values = []
    for row in samples:
        S = frozenset(e for e, bit in zip(support, row) if bit)
        values.append(oracle.eval(S))
    return math.fsum(values) / n_s
