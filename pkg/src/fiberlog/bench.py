"""Synthetic corpora and the scaling benchmark for multi-constraint queries.

A generated corpus has K fibers ``@Bench@World<i>`` of roughly N/K entities
each.  Every fiber carries an ``is_a`` DAG (edges only point to higher
rank) and ``has_feature`` records arranged as a funnel: a designated list of
m features, where exactly ``planted_answers`` entities hold all m and the
rest hold only a prefix of the list.  Some features are reached through an
intermediate concept, so constraint checks must follow ``has_feature``
transitively.
"""

from __future__ import annotations

import csv
import json
import math
import random
import statistics
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import InvalidSpec
from .inference import Constraint, multi_constraint
from .lattice import DomainPath
from .store import FourTuple, KnowledgeBase

FEATURE_REL = "has_feature"
INDIRECT_SHARE = 0.3
VIA_PER_FEATURE = 3


@dataclass(frozen=True)
class GenSpec:
    n_entities: int
    n_fibers: int = 1
    edges_per_entity: float = 2.0
    feature_pool: int = 0
    planted_answers: int = 0
    seed: int = 0
    constraints: int = 4
    retention: float = 0.08

    def __post_init__(self):
        if self.n_fibers < 1 or self.n_entities < self.n_fibers:
            raise InvalidSpec("need N >= K >= 1")
        if self.edges_per_entity < 0:
            raise InvalidSpec("edges_per_entity must be non-negative")
        if not 0 < self.retention < 1:
            raise InvalidSpec("retention must lie strictly between 0 and 1")
        if self.planted_answers < 0 or self.constraints < 1:
            raise InvalidSpec("planted_answers >= 0 and constraints >= 1 required")
        if self.planted_answers:
            if self.feature_pool < self.constraints:
                raise InvalidSpec("feature_pool must cover the designated constraints")
            smallest = self.n_entities // self.n_fibers
            if self.planted_answers + self.constraints - 1 > smallest:
                raise InvalidSpec("fibers too small for the planted funnel")

    @classmethod
    def from_json(cls, obj: dict) -> GenSpec:
        try:
            return cls(**obj)
        except TypeError as exc:
            raise InvalidSpec(str(exc)) from None


@dataclass
class Corpus:
    spec: GenSpec
    records: list[FourTuple]
    target: DomainPath
    constraints: list[Constraint]
    planted: set[str] = field(default_factory=set)
    funnel: list[int] = field(default_factory=list)

    def lines(self) -> list[str]:
        return [json.dumps(t.to_json(), separators=(",", ":")) for t in self.records]

    def to_jsonl(self) -> str:
        return "".join(line + "\n" for line in self.lines())

    def kb(self) -> KnowledgeBase:
        return KnowledgeBase(self.records)


def feature_name(i: int) -> str:
    return f"Feature{i:03d}"


def _funnel_sizes(n: int, planted: int, m: int, retention: float) -> list[int]:
    """Planned candidate counts after 0..m constraints, strictly decreasing."""
    sizes = [n]
    for k in range(1, m):
        floor_k = planted + (m - k)
        sizes.append(min(sizes[-1] - 1, max(floor_k, round(n * retention**k))))
    sizes.append(planted)
    return sizes


def _gen_fiber(spec: GenSpec, rng: random.Random, index: int, size: int):
    domain = DomainPath(("Bench", f"World{index}"))
    names = [f"Entity{j:05d}" for j in range(size)]
    out: list[FourTuple] = []

    whole = int(spec.edges_per_entity)
    frac = spec.edges_per_entity - whole
    for j in range(size - 1):
        k = whole + (1 if rng.random() < frac else 0)
        k = min(k, size - 1 - j)
        for target in rng.sample(range(j + 1, size), k):
            out.append(FourTuple(names[j], "is_a", domain, names[target]))

    planted: set[str] = set()
    m = spec.constraints
    if spec.planted_answers:
        order = list(range(size))
        rng.shuffle(order)
        sizes = _funnel_sizes(size, spec.planted_answers, m, spec.retention)
        # an entity at position p of the shuffled order holds the first j features,
        # where j is the deepest funnel stage that still contains p
        for pos, j_ent in enumerate(order):
            held = sum(1 for s in sizes[1:] if pos < s)
            name = names[j_ent]
            if held == m:
                planted.add(name)
            for fi in range(held):
                feat = feature_name(fi)
                if fi >= 1 and rng.random() < INDIRECT_SHARE:
                    via = f"Via{feat}_{rng.randrange(VIA_PER_FEATURE)}"
                    out.append(FourTuple(name, FEATURE_REL, domain, via))
                    out.append(FourTuple(via, FEATURE_REL, domain, feat))
                else:
                    out.append(FourTuple(name, FEATURE_REL, domain, feat))
    noise = list(range(m, spec.feature_pool)) if spec.planted_answers else list(range(spec.feature_pool))
    if noise:
        for name in names:
            for fi in rng.sample(noise, min(len(noise), rng.randrange(3))):
                out.append(FourTuple(name, FEATURE_REL, domain, feature_name(fi)))
    return domain, out, planted


def generate(spec: GenSpec) -> Corpus:
    rng = random.Random(spec.seed)
    base, extra = divmod(spec.n_entities, spec.n_fibers)
    records: set[FourTuple] = set()
    target = None
    planted: set[str] = set()
    for i in range(spec.n_fibers):
        size = base + (1 if i < extra else 0)
        domain, recs, answers = _gen_fiber(spec, rng, i, size)
        records.update(recs)
        if i == 0:
            target, planted = domain, answers
    constraints = [Constraint(FEATURE_REL, feature_name(i)) for i in range(spec.constraints)]
    funnel = []
    if spec.planted_answers:
        funnel = _funnel_sizes(base + (1 if extra else 0), spec.planted_answers, spec.constraints, spec.retention)
    return Corpus(spec, sorted(records, key=FourTuple.sort_key), target, constraints, planted, funnel)


# fitting

def _r2(y, pred) -> float:
    y, pred = np.asarray(y, float), np.asarray(pred, float)
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    return 1.0 - ss_res / ss_tot if ss_tot > 0 else (1.0 if ss_res == 0 else 0.0)


def fit_power(x, y) -> dict:
    """Least-squares fit of log y = log a + b log x."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    b, a = np.polyfit(lx, ly, 1)
    return {"exponent": float(b), "coef": float(math.exp(a)), "r2_log": _r2(ly, a + b * lx)}


def fit_proportional(x, y) -> dict:
    """Least-squares fit of y = a * x through the origin."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    a = float(x @ y / (x @ x))
    pred = a * x
    return {"coef": a, "r2": _r2(y, pred), "sse": float(np.sum((y - pred) ** 2))}


def fit_linear(x, y) -> dict:
    x, y = np.asarray(x, float), np.asarray(y, float)
    b, a = np.polyfit(x, y, 1)
    pred = a + b * x
    return {"slope": float(b), "intercept": float(a), "r2": _r2(y, pred), "sse": float(np.sum((y - pred) ** 2))}


def fit_exponential(m, y, base: float) -> dict:
    """Fit y = a * base**m with ``a`` chosen by least squares in log space."""
    m, y = np.asarray(m, float), np.asarray(y, float)
    log_a = float(np.mean(np.log(y) - m * math.log(base)))
    pred = np.exp(log_a + m * math.log(base))
    return {"coef": math.exp(log_a), "base": base, "r2": _r2(y, pred), "sse": float(np.sum((y - pred) ** 2))}


# timing

def time_query(corpus: Corpus, repeats: int) -> list[float]:
    kb = corpus.kb()
    samples = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        found, _ = multi_constraint(kb, corpus.target, corpus.constraints)
        samples.append(time.perf_counter() - t0)
    if corpus.planted and found != corpus.planted:
        raise AssertionError("multi-constraint query missed the planted answers")
    return samples


DEFAULT_GRID = {
    "n_entities": 10_000,
    "n_fibers": [1, 10, 100],
    "m_values": [1, 2, 4, 8],
    "m_sweep_fibers": 10,
    "edges_per_entity": 2.0,
    "feature_pool": 16,
    "planted_answers": 4,
    "retention": 0.08,
    "seed": 7,
}


def _spec(grid: dict, n_fibers: int, m: int) -> GenSpec:
    return GenSpec(
        n_entities=grid["n_entities"],
        n_fibers=n_fibers,
        edges_per_entity=grid["edges_per_entity"],
        feature_pool=max(grid["feature_pool"], m),
        planted_answers=grid["planted_answers"],
        seed=grid["seed"],
        constraints=m,
        retention=grid["retention"],
    )


def measure_scaling(grid: Optional[dict] = None, m: int = 4, repeats: int = 5) -> dict:
    """Time multi-constraint queries across fiber sizes and constraint counts.

    Sweeps K at fixed N and m, then m at fixed K.  Each grid point reports
    the median of ``repeats`` runs; fits are ordinary least squares.
    """
    g = dict(DEFAULT_GRID)
    g.update(grid or {})
    rows = []

    size_points = []
    for k in g["n_fibers"]:
        corpus = generate(_spec(g, k, m))
        samples = time_query(corpus, repeats)
        nk = g["n_entities"] / k
        size_points.append((nk, statistics.median(samples)))
        rows.extend({"sweep": "fiber_size", "n_fibers": k, "n_per_fiber": nk, "m": m, "repeat": i, "seconds": s}
                    for i, s in enumerate(samples))

    m_points = []
    k = g["m_sweep_fibers"]
    nk = g["n_entities"] / k
    for mm in g["m_values"]:
        corpus = generate(_spec(g, k, mm))
        samples = time_query(corpus, repeats)
        m_points.append((mm, statistics.median(samples), corpus.funnel))
        rows.extend({"sweep": "constraints", "n_fibers": k, "n_per_fiber": nk, "m": mm, "repeat": i, "seconds": s}
                    for i, s in enumerate(samples))

    xs, ts = [p[0] for p in size_points], [p[1] for p in size_points]
    ms, tm = [p[0] for p in m_points], [p[1] for p in m_points]
    report = {
        "grid": g,
        "m": m,
        "repeats": repeats,
        "fiber_size": [{"n_per_fiber": x, "median_seconds": t} for x, t in size_points],
        "constraints": [{"m": x, "median_seconds": t, "planned_funnel": f} for x, t, f in m_points],
        "fits": {
            "size_power": fit_power(xs, ts),
            "size_vs_m_nk2": fit_proportional([m * x * x for x in xs], ts),
            "m_linear": fit_linear(ms, tm),
            "m_exponential": fit_exponential(ms, tm, nk),
        },
        "rows": rows,
    }
    return report


def write_report(report: dict, out_dir, figures: bool = True) -> dict:
    """Write ``scaling.json``, ``scaling.csv`` and (optionally) PNG figures."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"json": out / "scaling.json", "csv": out / "scaling.csv"}
    summary = {k: v for k, v in report.items() if k != "rows"}
    paths["json"].write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    with open(paths["csv"], "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["sweep", "n_fibers", "n_per_fiber", "m", "repeat", "seconds"])
        writer.writeheader()
        writer.writerows(report["rows"])
    if figures:
        from .plotting import plot_scaling

        paths.update(plot_scaling(report, out))
    return {k: str(v) for k, v in paths.items()}


def spec_dict(spec: GenSpec) -> dict:
    return asdict(spec)
