"""End-to-end counterfactual search for one query or a batch of queries."""
from __future__ import annotations

import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np

from .classifier import Classifier, CountingClassifier
from .core import LabeledDataset, MtsInstance, Subsequence, as_array, hamming, substitute_window
from .distances import DistanceKind, distance_fn
from .errors import StructuralError, UndefinedMetricError
from .moea import MaskCandidate, active_objectives, binary_sampling, das_dennis, dedupe, nsga3_evolve
from .nun import NunResult, find_nun
from .subsequence import NaiveResult, find_subsequence, naive_stage

PLACEMENTS = ("center", "start", "scan-best-of-three")


@dataclass(frozen=True)
class EngineConfig:
    theta: float = 0.51
    alpha: float = 0.5
    pop_size: int = 30
    generations: int = 50
    pc: float = 0.9
    pm: float | None = None  # None: 1 / (window cells)
    partitions: int = 6
    distance: str = "l2"
    objective_mode: str = "co_sp_pr"
    seed: int = 0
    use_weights: bool = True
    window_placement: str = "center"
    nun_distance: str = "l2"

    def __post_init__(self):
        for name in ("theta", "alpha", "pc"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise StructuralError(f"{name} must lie in [0, 1], got {v}")
        if self.pm is not None and not 0.0 <= self.pm <= 1.0:
            raise StructuralError(f"pm must lie in [0, 1], got {self.pm}")
        if self.pop_size < 2:
            raise StructuralError("pop_size must be at least 2")
        if self.generations < 1:
            raise StructuralError("generations must be at least 1")
        if self.partitions < 1:
            raise StructuralError("partitions must be at least 1")
        object.__setattr__(self, "distance", DistanceKind.parse(self.distance).value)
        object.__setattr__(self, "nun_distance", DistanceKind.parse(self.nun_distance).value)
        object.__setattr__(self, "objective_mode", self.objective_mode.lower())
        active_objectives(self.objective_mode)
        if self.window_placement not in PLACEMENTS:
            raise StructuralError(f"window_placement must be one of {PLACEMENTS}")
        if self.theta < 0.5:
            warnings.warn(
                f"theta={self.theta} < 0.5: the target class need not be the argmax; "
                "counterfactuals are filtered on their predicted class",
                stacklevel=3,
            )

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(eq=False)
class Counterfactual:
    instance: MtsInstance
    m1: float
    m2: float
    m3: float
    window: Subsequence
    genome: np.ndarray
    proba: np.ndarray
    origin: str  # "naive" or "k=<window length>"


@dataclass(eq=False)
class CounterfactualReport:
    query: MtsInstance
    query_class: int
    nun_id: str | None
    target_class: int | None
    ces: list[Counterfactual] = field(default_factory=list)
    best_index: int | None = None
    call_counts: dict[str, int] = field(default_factory=dict)
    wall_time: float = 0.0
    probes: list[tuple[int, bool]] = field(default_factory=list)
    c0_hamming: int | None = None
    status: str = "ok"  # ok | no_nun | no_counterfactual

    @property
    def query_id(self) -> str:
        return self.query.id

    @property
    def best(self) -> Counterfactual | None:
        return None if self.best_index is None else self.ces[self.best_index]

    @property
    def accepted_lengths(self) -> list[int]:
        return [k for k, ok in self.probes if ok]


def select_best(scores, alpha: float) -> int:
    """Index maximizing ``alpha*m1 + (1-alpha)*(1-m2)``; ties go to the lower index."""
    s = np.asarray(scores, dtype=np.float64).reshape(-1, 2)
    if len(s) == 0:
        raise StructuralError("cannot select from an empty counterfactual set")
    weighted = alpha * s[:, 0] + (1.0 - alpha) * (1.0 - s[:, 1])
    return int(np.argmax(weighted))


class _Search:
    """State shared by the probes of one explain call."""

    def __init__(self, classifier: Classifier, query: MtsInstance, nun: NunResult, config: EngineConfig):
        self.classifier = classifier
        self.query = query
        self.nun = nun
        self.config = config
        self.target = nun.target_class
        self.cells = query.t * query.d
        self.dist = distance_fn(config.distance)
        self.active = active_objectives(config.objective_mode)

    def evaluator(self, window: Subsequence):
        def evaluate(genome: np.ndarray) -> MaskCandidate:
            decoded = substitute_window(self.query, self.nun.nun, window, genome)
            proba = self.classifier.predict_proba(decoded)
            m1 = float(proba[self.target])
            m2 = hamming(decoded, self.query) / self.cells
            m3 = self.dist(self.query, decoded)
            return MaskCandidate(np.asarray(genome, dtype=bool), np.array([m1, m2, m3]),
                                 m1 >= self.config.theta, decoded, proba)

        return evaluate

    def window_for(self, k: int, weights: np.ndarray | None) -> Subsequence:
        t = self.query.t
        if weights is not None:
            return find_subsequence(weights, k)
        placement = self.config.window_placement
        if placement == "start":
            return Subsequence(0, k - 1)
        center = Subsequence((t - k) // 2, (t - k) // 2 + k - 1)
        if placement == "center":
            return center
        options = [Subsequence(0, k - 1), center, Subsequence(t - k, t - 1)]
        ones = np.ones((k, self.query.d), dtype=bool)
        conf = [self.evaluator(w)(ones).m1 for w in options]
        return options[int(np.argmax(conf))]

    def probe(self, k: int, weights: np.ndarray | None) -> tuple[Subsequence, list[MaskCandidate]]:
        """Run NSGA-III in the length-``k`` window; the RNG depends only on (seed, k)."""
        cfg = self.config
        window = self.window_for(k, weights)
        rng = np.random.default_rng([cfg.seed, k])
        evaluate = self.evaluator(window)
        refs = das_dennis(len(self.active), cfg.partitions)
        initial = [evaluate(g) for g in binary_sampling(k, self.query.d, cfg.pop_size, rng)]
        pm = cfg.pm if cfg.pm is not None else 1.0 / (k * self.query.d)
        survivors, _ = nsga3_evolve(
            initial, evaluate, refs, cfg.generations, cfg.pop_size, cfg.pc, pm, cfg.theta, rng, self.active
        )
        survivors = [c for c in survivors if int(np.argmax(c.proba)) == self.target]
        return window, survivors


def _record(c: MaskCandidate, window: Subsequence, origin: str) -> Counterfactual:
    return Counterfactual(c.decoded, c.m1, c.m2, c.m3, window, c.genome, c.proba, origin)


def explain(
    classifier: Classifier,
    query,
    reference: LabeledDataset,
    config: EngineConfig | None = None,
    reference_proba: np.ndarray | None = None,
) -> CounterfactualReport:
    """Search counterfactuals for ``query`` against ``reference``.

    Returns a report whose ``status`` is ``"no_nun"`` (and whose CE list is
    empty) when no nearest unlike neighbor passes the confidence filter.
    """
    config = config or EngineConfig()
    start = time.perf_counter()
    if not isinstance(query, MtsInstance):
        query = MtsInstance(as_array(query), id="query")
    if query.shape != reference.shape:
        raise StructuralError(f"query shape {query.shape} != reference shape {reference.shape}")
    if query.t < 2:
        raise StructuralError("series must have at least 2 time steps")
    counter = CountingClassifier(classifier)
    counts: dict[str, int] = {}

    query_proba = counter.predict_proba(query)
    query_class = int(np.argmax(query_proba))
    nun = find_nun(counter, query, reference, config.theta, config.nun_distance,
                   reference_proba=reference_proba, query_proba=query_proba)
    counts["nun"] = counter.calls
    report = CounterfactualReport(query, query_class, None, None, call_counts=counts)
    if nun is None:
        report.status = "no_nun"
        report.wall_time = time.perf_counter() - start
        return report
    report.nun_id = nun.nun.id
    report.target_class = nun.target_class

    weights = None
    if config.use_weights and reference.weights is not None:
        weights = reference.weights_for(nun.nun.id)
        if weights is None:
            raise StructuralError(f"no feature weights for NUN {nun.nun.id!r}")

    search = _Search(counter, query, nun, config)
    ces: list[Counterfactual] = []
    if weights is not None:
        naive: NaiveResult = naive_stage(counter, query, nun, weights, config.theta)
        report.c0_hamming = hamming(naive.c0, query)
        if int(np.argmax(naive.proba)) == nun.target_class:
            genome = np.ones((naive.length, query.d), dtype=bool)
            m2 = report.c0_hamming / search.cells
            ces.append(Counterfactual(naive.c0, naive.confidence, m2, search.dist(query, naive.c0),
                                      naive.window, genome, naive.proba, "naive"))
        high = naive.length
    else:
        high = query.t // 2
    counts["naive"] = counter.calls - counts["nun"]

    low = 1
    while low <= high:
        k = (low + high) // 2
        if k < 2:
            # a one-step window is not a subsequence
            low = k + 1
            continue
        window, survivors = search.probe(k, weights)
        report.probes.append((k, bool(survivors)))
        if survivors:
            ces.extend(_record(c, window, f"k={k}") for c in survivors)
            high = k - 1
        else:
            low = k + 1
    counts["search"] = counter.calls - counts["nun"] - counts["naive"]

    seen, unique = set(), []
    for ce in ces:
        key = ce.instance.values.tobytes()
        if key not in seen:
            seen.add(key)
            unique.append(ce)
    report.ces = unique
    if unique:
        report.best_index = select_best([(c.m1, c.m2) for c in unique], config.alpha)
    else:
        report.status = "no_counterfactual"
    report.wall_time = time.perf_counter() - start
    return report


def reselect(report: CounterfactualReport, alpha: float) -> CounterfactualReport:
    """Copy of ``report`` with the best CE chosen under a different ``alpha``."""
    best = select_best([(c.m1, c.m2) for c in report.ces], alpha) if report.ces else None
    return replace(report, best_index=best)


@dataclass
class BatchResult:
    reports: list[CounterfactualReport]
    summary: "object"  # metrics.MetricsSummary
    errors: dict[str, str] = field(default_factory=dict)


def explain_batch(
    classifier: Classifier,
    test: LabeledDataset,
    reference: LabeledDataset,
    config: EngineConfig | None = None,
    parallel: int = 1,
    ynn_mode: str = "prose",
    scope: str = "all",
) -> BatchResult:
    """Explain every test instance with seed ``config.seed + index``, then aggregate metrics.

    Failures of single instances are kept as failed reports so coverage can
    count them. Reports are returned in test order regardless of ``parallel``.
    """
    from .metrics import summarize

    config = config or EngineConfig()
    if len(test) == 0:
        raise UndefinedMetricError("coverage is undefined for an empty test set")
    reference_proba = np.stack([classifier.predict_proba(r) for r in reference.instances])

    def run(i: int) -> CounterfactualReport:
        cfg = replace(config, seed=config.seed + i)
        return explain(classifier, test.instances[i], reference, cfg, reference_proba)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        if parallel > 1:
            with ThreadPoolExecutor(max_workers=parallel) as pool:
                reports = list(pool.map(run, range(len(test))))
        else:
            reports = [run(i) for i in range(len(test))]
    summary = summarize(classifier, reports, reference, attempted=len(test), ynn_mode=ynn_mode, scope=scope)
    errors = {r.query_id: r.status for r in reports if r.status != "ok"}
    return BatchResult(reports, summary, errors)


def linear_scan_lengths(
    classifier: Classifier,
    query: MtsInstance,
    reference: LabeledDataset,
    config: EngineConfig,
    lengths: Sequence[int],
) -> dict[int, bool]:
    """Feasibility of each window length under the same seeded probes the binary search uses."""
    nun = find_nun(classifier, query, reference, config.theta, config.nun_distance)
    if nun is None:
        return {}
    weights = reference.weights_for(nun.nun.id) if config.use_weights else None
    search = _Search(classifier, query, nun, config)
    return {k: bool(search.probe(k, weights)[1]) for k in lengths}
