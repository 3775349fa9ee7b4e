"""Monte-Carlo detectors built on the sieve.

Every detector runs independent trials. A trial fixes a bipartition and a
label budget r, samples a random evaluation point and evaluates the sieve
polynomial. A nonzero value proves a (k, l)-tree exists; the answer is NO
only if every trial evaluated to zero.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from itertools import combinations, islice
from typing import Iterable, Iterator, NamedTuple, Optional

import numpy as np

from treesieve.coloring import (
    FractionalColoring,
    ProperColoring,
    VectorColoring,
    greedy_coloring,
    hyperplane_bipartition,
    sample_independent_set,
)
from treesieve.graph import Bipartition, Graph, induced_subgraph
from treesieve.matching import matching_size
from treesieve.models import (
    DEFAULT_ALPHA,
    Answer,
    DetectionPlan,
    Schedule,
    Strategy,
    TrialRecord,
    Verdict,
)
from treesieve.sieve import EvaluationPoint, SieveInstance, evaluate_P, evaluate_weighted, has_weight_at_least

logger = logging.getLogger(__name__)

_BIPARTITION_STREAM = 0
_POINT_STREAM = 1
_SUBSET_STREAM = 2


class TrialJob(NamedTuple):
    """Everything a worker needs to run one trial besides the graph."""
    trial: int
    side: tuple[int, ...]
    k: int
    l: int
    r: int
    seed: int
    weight_cap: Optional[int] = None


def trial_rng(seed: int, *stream: int) -> np.random.Generator:
    """Generator for one substream; identical for identical (seed, stream)."""
    return np.random.default_rng([seed, *stream])


def derive_seed(seed: int, *keys: int) -> int:
    """Independent 64-bit seed for a sub-run."""
    return int(np.random.SeedSequence([seed, *keys]).generate_state(1, dtype=np.uint64)[0])


def run_job(g: Graph, job: TrialJob) -> TrialRecord:
    inst = SieveInstance(graph=g, part=Bipartition(side=job.side), k=job.k, l=job.l, r=job.r)
    point = EvaluationPoint.sample(g, job.r, trial_rng(job.seed, job.trial, _POINT_STREAM))
    if job.weight_cap is None:
        nonzero = evaluate_P(inst, point) != 0
    else:
        nonzero = has_weight_at_least(evaluate_weighted(inst, point, job.weight_cap), job.weight_cap)
    logger.debug("trial %d (r=%d, |V1|=%d): %s", job.trial, job.r, job.side.count(1), nonzero)
    return TrialRecord(trial=job.trial, r=job.r, v1_size=job.side.count(1), nonzero=nonzero)


_worker_graph: Optional[Graph] = None


def _init_worker(g: Graph) -> None:
    global _worker_graph
    _worker_graph = g


def _run_in_worker(job: TrialJob) -> TrialRecord:
    return run_job(_worker_graph, job)


def run_trials(g: Graph, jobs: Iterable[TrialJob], workers: int = 1, detail: Optional[dict] = None) -> Verdict:
    """Run trials in order until one evaluates nonzero.

    With several workers the jobs are submitted to a process pool and read
    back in trial order, so the verdict and log match a sequential run.
    """
    records: list[TrialRecord] = []
    hit: Optional[int] = None
    if workers > 1:
        jobs = list(jobs)
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker, initargs=(g,)) as pool:
            futures = [pool.submit(_run_in_worker, job) for job in jobs]
            for future in futures:
                record = future.result()
                records.append(record)
                if record.nonzero:
                    hit = record.trial
                    break
            for future in futures:
                future.cancel()
    else:
        for job in jobs:
            record = run_job(g, job)
            records.append(record)
            if record.nonzero:
                hit = record.trial
                break
    return Verdict(
        answer=Answer.YES if hit is not None else Answer.NO,
        trials_run=len(records),
        first_hit_trial=hit,
        r_used=max((rec.r for rec in records), default=0),
        strategy_detail=detail or {},
        trial_log=records,
    )


def schedule_params(k: int, l: int, epsilon: float) -> Schedule:
    """t = floor((1/4 + eps)k), r = k - t + ceil(l/2), trials = ceil(2^(k+1) / C(k-1, 2t))."""
    if not 0 <= epsilon < 0.25:
        raise ValueError(f"epsilon={epsilon} outside [0, 1/4)")
    t = math.floor((Fraction(1, 4) + Fraction(str(epsilon))) * k)
    t = min(t, max(k - 1, 0) // 2)
    r = k - t + -(-l // 2)
    trials = -(-(2 ** (k + 1)) // math.comb(k - 1, 2 * t))
    return Schedule(t=t, r=r, trials=trials)


def clamp_budget(r: int, k: int, l: int) -> int:
    """Fit r into [l, k + l - 1]; no (k, l)-tree has more labellable elements."""
    return max(l, min(r, k + l - 1))


def decided_verdict(yes: bool, reason: str, **detail) -> Verdict:
    """Verdict settled without running any trial."""
    return Verdict(
        answer=Answer.YES if yes else Answer.NO,
        trials_run=0,
        first_hit_trial=0 if yes else None,
        r_used=0,
        strategy_detail={"decided_by": reason, **detail},
    )


def _trivial(g: Graph, plan: DetectionPlan) -> Optional[Verdict]:
    if plan.k > g.n:
        return decided_verdict(False, "k exceeds n")
    if plan.k == 1:
        return decided_verdict(False, "single vertex has no leaves")
    if plan.k == 2:
        return decided_verdict(g.m > 0, "edge count")
    return None


def _trial_count(plan: DetectionPlan, base: int) -> int:
    return plan.trials if plan.trials is not None else base * plan.confidence_boost


def _jobs(plan: DetectionPlan, r: int, sides: Iterable[tuple[int, ...]], count: int, **extra) -> Iterator[TrialJob]:
    for trial, side in enumerate(islice(sides, count)):
        yield TrialJob(trial=trial, side=side, k=plan.k, l=plan.l, r=r, seed=plan.seed, **extra)


def detect_tree_random(g: Graph, plan: DetectionPlan) -> Verdict:
    """Uniform random bipartitions on the schedule of ``schedule_params``."""
    if (verdict := _trivial(g, plan)) is not None:
        return verdict
    schedule = schedule_params(plan.k, plan.l, plan.epsilon)
    r = clamp_budget(plan.r_override or schedule.r, plan.k, plan.l)
    count = _trial_count(plan, schedule.trials)
    logger.info("random strategy: t=%d r=%d trials=%d", schedule.t, r, count)
    sides = (
        Bipartition.random(g.n, trial_rng(plan.seed, trial, _BIPARTITION_STREAM)).side
        for trial in range(count)
    )
    detail = {"t": schedule.t, "scheduled_trials": count}
    return run_trials(g, _jobs(plan, r, sides, count), plan.workers, detail)


def color_budget(d: int, k: int, l: int) -> tuple[int, Fraction]:
    """Number of color classes x to put in V1 and the resulting bound on |la|.

    Both integers around (d + (l/k)(d-1))/2 are tried and the smaller bound
    wins; ties go to the value rounded half away from zero.
    """
    if d == 1:
        return 1, Fraction(k)

    def bound(x: int) -> Fraction:
        return (1 - Fraction(x * (d - x), d * (d - 1))) * k + (1 - Fraction(x, d)) * l

    mid = Fraction(d * k + l * (d - 1), 2 * k)
    rounded = math.floor(mid + Fraction(1, 2))
    candidates = sorted({min(max(x, 0), d) for x in (math.floor(mid), math.ceil(mid))})
    x = min(candidates, key=lambda c: (bound(c), c != rounded))
    return x, bound(x)


def detect_tree_colored(g: Graph, coloring: ProperColoring, plan: DetectionPlan) -> Verdict:
    """V1 is the union of x color classes; every x-subset of colors is one trial."""
    coloring.validate_for(g)
    if (verdict := _trivial(g, plan)) is not None:
        return verdict
    d = coloring.d
    x, bound = color_budget(d, plan.k, plan.l)
    r = clamp_budget(plan.r_override or math.ceil(bound), plan.k, plan.l)
    total = math.comb(d, x)
    sampled = total > plan.color_subset_cap
    if sampled:
        logger.warning(
            "C(%d,%d)=%d color subsets exceed cap %d; sampling instead", d, x, total, plan.color_subset_cap
        )
        rng = trial_rng(plan.seed, 0, _SUBSET_STREAM)
        subsets = [tuple(sorted(int(c) + 1 for c in rng.choice(d, x, replace=False)))
                   for _ in range(plan.color_subset_cap)]
    else:
        subsets = list(combinations(range(1, d + 1), x))
    classes = coloring.classes()

    def sides() -> Iterator[tuple[int, ...]]:
        for _ in range(plan.confidence_boost):
            for subset in subsets:
                yield Bipartition.from_v1(g.n, (v for c in subset for v in classes[c - 1])).side

    count = plan.trials if plan.trials is not None else len(subsets) * plan.confidence_boost
    logger.info("color strategy: d=%d x=%d bound=%s r=%d", d, x, bound, r)
    detail = {"d": d, "x": x, "bound": float(bound), "subsets": len(subsets), "sampled": sampled}
    return run_trials(g, _jobs(plan, r, sides(), count), plan.workers, detail)


def _comb(n: int, t: int) -> int:
    return math.comb(n, t) if n >= 0 else 0


def fractional_bound(a: int, b: int, t: int, k: int, l: int) -> Fraction:
    """Average |la| when V1 holds the vertices avoiding a random t-subset of colors."""
    total = math.comb(a, t)
    avoid_one = Fraction(_comb(a - b, t), total)
    avoid_both = Fraction(_comb(a - 2 * b, t), total)
    return (1 - (avoid_one - avoid_both)) * k + (1 - avoid_one) * l


def sampler_budget(p: float, k: int, l: int) -> int:
    p = Fraction(str(p))
    return math.ceil((1 - p) * k + p * l) + 1


def detect_tree_fractional(g: Graph, fc: Optional[FractionalColoring], plan: DetectionPlan) -> Verdict:
    """Fractional coloring file mode, or independent-set sampler mode when ``fc`` is None."""
    if fc is not None:
        fc.validate_for(g)
    if (verdict := _trivial(g, plan)) is not None:
        return verdict
    if fc is None:
        r = clamp_budget(plan.r_override or sampler_budget(plan.sampler_p, plan.k, plan.l), plan.k, plan.l)
        count = _trial_count(plan, r + 1)

        def sampled_sides() -> Iterator[tuple[int, ...]]:
            for trial in range(count):
                independent = sample_independent_set(g, trial_rng(plan.seed, trial, _BIPARTITION_STREAM))
                yield tuple(2 if v in independent else 1 for v in range(g.n))

        logger.info("independent-set sampler: p=%s r=%d trials=%d", plan.sampler_p, r, count)
        detail = {"mode": "sampler", "p": plan.sampler_p}
        return run_trials(g, _jobs(plan, r, sampled_sides(), count), plan.workers, detail)

    t = plan.fractional_t
    if t > fc.a:
        raise ValueError(f"fractional_t={t} exceeds a={fc.a}")
    bound = fractional_bound(fc.a, fc.b, t, plan.k, plan.l)
    r = clamp_budget(plan.r_override or math.ceil(bound), plan.k, plan.l)
    subsets = list(combinations(range(1, fc.a + 1), t))

    def sides() -> Iterator[tuple[int, ...]]:
        for _ in range(plan.confidence_boost):
            for subset in subsets:
                chosen = set(subset)
                yield tuple(1 if not (fc.colorset[v] & chosen) else 2 for v in range(g.n))

    count = plan.trials if plan.trials is not None else len(subsets) * plan.confidence_boost
    logger.info("fractional coloring (%d:%d): t=%d bound=%s r=%d", fc.a, fc.b, t, bound, r)
    detail = {"mode": "file", "a": fc.a, "b": fc.b, "t": t, "bound": float(bound)}
    return run_trials(g, _jobs(plan, r, sides(), count), plan.workers, detail)


def vector_budget(value: float, k: int, l: int) -> int:
    """ceil((k+l)/2 + (1 - arccos(-1/(value-1))/pi)(k-1)/2)."""
    cosine = max(-1.0, min(1.0, -1.0 / (value - 1.0)))
    coefficient = 1.0 - math.acos(cosine) / math.pi
    return math.ceil((k + l) / 2 + coefficient * (k - 1) / 2 - 1e-9)


def detect_tree_vector(g: Graph, vc: VectorColoring, plan: DetectionPlan) -> Verdict:
    """Random hyperplane rounding of a vector coloring, one hyperplane per trial."""
    vc.validate_for(g)
    if (verdict := _trivial(g, plan)) is not None:
        return verdict
    budget = vector_budget(vc.value, plan.k, plan.l)
    r = clamp_budget(plan.r_override or budget, plan.k, plan.l)
    count = _trial_count(plan, budget + 1)
    sides = (
        hyperplane_bipartition(vc, trial_rng(plan.seed, trial, _BIPARTITION_STREAM)).side
        for trial in range(count)
    )
    logger.info("vector strategy: value=%s budget=%d trials=%d", vc.value, budget, count)
    detail = {"value": vc.value, "budget": budget}
    return run_trials(g, _jobs(plan, r, sides, count), plan.workers, detail)


def detect_tree_fixed(g: Graph, part: Bipartition, plan: DetectionPlan) -> Verdict:
    """One given bipartition with fresh evaluation points per trial."""
    if part.n != g.n:
        raise ValueError(f"partition covers {part.n} vertices, graph has {g.n}")
    if (verdict := _trivial(g, plan)) is not None:
        return verdict
    r = clamp_budget(plan.r_override or plan.k + plan.l - 1, plan.k, plan.l)
    count = _trial_count(plan, 1)
    sides = (part.side for _ in range(count))
    return run_trials(g, _jobs(plan, r, sides, count), plan.workers, {"v1_size": len(part.v1)})


def detect_tree(
    g: Graph,
    plan: DetectionPlan,
    coloring: Optional[ProperColoring] = None,
    fractional: Optional[FractionalColoring] = None,
    vectors: Optional[VectorColoring] = None,
    partition: Optional[Bipartition] = None,
) -> Verdict:
    """Dispatch on ``plan.strategy``."""
    if plan.strategy is Strategy.RANDOM:
        return detect_tree_random(g, plan)
    if plan.strategy is Strategy.COLOR:
        if coloring is None:
            coloring = greedy_coloring(g)
            logger.info("no coloring given; greedy coloring uses %d colors", coloring.d)
        return detect_tree_colored(g, coloring, plan)
    if plan.strategy is Strategy.FRACTIONAL:
        return detect_tree_fractional(g, fractional, plan)
    if plan.strategy is Strategy.VECTOR:
        if vectors is None:
            raise ValueError("vector strategy needs a vector coloring")
        return detect_tree_vector(g, vectors, plan)
    if partition is None:
        raise ValueError("bipartition strategy needs a partition")
    return detect_tree_fixed(g, partition, plan)


def kpath(g: Graph, k: int, plan: DetectionPlan, **inputs) -> Verdict:
    """Path on k vertices: a (k, 2)-tree."""
    if k < 1:
        raise ValueError(f"k={k} must be positive")
    if k > g.n:
        return decided_verdict(False, "k exceeds n")
    if k == 1:
        return decided_verdict(True, "vertex count")
    if k == 2:
        return decided_verdict(g.m > 0, "edge count")
    return detect_tree(g, plan.model_copy(update={"k": k, "l": 2}), **inputs)


def hamiltonicity(g: Graph, plan: DetectionPlan, **inputs) -> Verdict:
    if g.n == 0:
        return decided_verdict(False, "empty graph")
    return kpath(g, g.n, plan, **inputs)


class SplitPlan(NamedTuple):
    """Random split used by the matching-plus-tree strategy for one leaf count."""
    matching: int
    tree_k: int
    tree_l: int
    p: Fraction
    repetitions: int


def split_plan(k: int, l: int) -> Optional[SplitPlan]:
    """Parameters for witnesses with k internal vertices and l leaves, or None if unusable.

    Repeatedly trimming a leaf and its parent off a minimal witness leaves a
    (3s+4, s+2)-tree, s = k - l, and a disjoint matching of 2l - k - 2 edges.
    """
    matching = 2 * l - k - 2
    if matching < 1:
        return None
    s = k - l
    tree_k, tree_l = 3 * s + 4, s + 2
    p = Fraction(2 * matching, 2 * matching + tree_k)
    success = p ** (2 * matching) * (1 - p) ** tree_k
    return SplitPlan(matching, tree_k, tree_l, p, math.ceil(1 / success))


def split_probability(gamma: float) -> float:
    """Asymptotic matching-side probability (4g-2)/(1+g) for leaf ratio g = l/k."""
    return (4 * gamma - 2) / (1 + gamma)


def split_repetitions(gamma: float, k: int) -> float:
    """Asymptotic repetition count for leaf ratio ``gamma``; inf when it overflows a float."""
    exponent = (4 * gamma - 2) * k * math.log((1 + gamma) / (4 * gamma - 2))
    if gamma < 1:
        exponent += 3 * (1 - gamma) * k * math.log((1 + gamma) / (3 * (1 - gamma)))
    try:
        return math.exp(exponent)
    except OverflowError:
        return math.inf


def leaf_cap(k: int, max_degree: int) -> int:
    """Witness leaf bound k - (k-2)/(max_degree-1) in graphs of bounded degree."""
    if max_degree < 2:
        return k
    return min(k, math.floor(k - Fraction(k - 2, max_degree - 1)))


def _split_trial(g: Graph, plan: DetectionPlan, split: SplitPlan, rep: int, seed: int) -> tuple[bool, int]:
    rng = trial_rng(seed, rep, _BIPARTITION_STREAM)
    on_matching_side = rng.random(g.n) < float(split.p)
    matching_vertices = [v for v in range(g.n) if on_matching_side[v]]
    tree_vertices = [v for v in range(g.n) if not on_matching_side[v]]
    sub, _ = induced_subgraph(g, matching_vertices)
    if matching_size(sub, trial_rng(seed, rep, _POINT_STREAM)) < split.matching:
        return False, 0
    tree_graph, _ = induced_subgraph(g, tree_vertices)
    tree_plan = plan.model_copy(update={
        "k": split.tree_k, "l": split.tree_l, "strategy": Strategy.RANDOM,
        "trials": None, "r_override": None, "seed": derive_seed(seed, rep),
    })
    verdict = detect_tree_random(tree_graph, tree_plan)
    return verdict.yes, verdict.trials_run


def kist(g: Graph, k: int, plan: DetectionPlan, alpha: float = DEFAULT_ALPHA) -> Verdict:
    """Spanning tree with at least k internal vertices.

    Small leaf counts search for a (k+l, l)-tree directly. Large leaf counts
    split the vertices at random and look for a large matching on one side and
    a small tree on the other, which together extend to a witness.
    """
    if g.n == 0:
        return decided_verdict(False, "empty graph")
    if k <= 0:
        return decided_verdict(g.is_connected(), "connectivity")
    if g.n < 2 or not g.is_connected():
        return decided_verdict(False, "no spanning tree with internal vertices")
    if k > g.n - 2:
        return decided_verdict(False, "a spanning tree has at least two leaves")
    if k == 1:
        return decided_verdict(True, "connected with at least three vertices")

    cap = min(k, g.n - k, leaf_cap(k, g.max_degree))
    threshold = math.floor(alpha * k)
    trials_run = 0
    last_r = 0
    splits: list[dict] = []
    for l in range(2, cap + 1):
        split = split_plan(k, l) if l > threshold else None
        seed = derive_seed(plan.seed, l)
        if split is None:
            tree_plan = plan.model_copy(update={"k": k + l, "l": l, "strategy": Strategy.RANDOM, "seed": seed})
            verdict = detect_tree_random(g, tree_plan)
            trials_run += verdict.trials_run
            last_r = verdict.r_used or last_r
            if verdict.yes:
                return Verdict(
                    answer=Answer.YES, trials_run=trials_run, first_hit_trial=trials_run - 1, r_used=last_r,
                    strategy_detail={"strategy": "tree", "l": l, "leaf_cap": cap},
                )
            continue
        repetitions = plan.trials if plan.trials is not None else split.repetitions * plan.confidence_boost
        splits.append({
            "l": l, "p": float(split.p), "repetitions": repetitions,
            "asymptotic_p": split_probability(l / k), "asymptotic_repetitions": split_repetitions(l / k, k),
        })
        logger.info("split strategy l=%d: matching %d, (%d,%d)-tree, p=%s, %d repetitions",
                    l, split.matching, split.tree_k, split.tree_l, split.p, repetitions)
        for rep in range(repetitions):
            found, used = _split_trial(g, plan, split, rep, seed)
            trials_run += 1 + used
            if found:
                return Verdict(
                    answer=Answer.YES, trials_run=trials_run, first_hit_trial=trials_run - 1, r_used=last_r,
                    strategy_detail={
                        "strategy": "split", "l": l, "repetition": rep, "leaf_cap": cap, "splits": splits,
                    },
                )
    return Verdict(
        answer=Answer.NO, trials_run=trials_run, r_used=last_r,
        strategy_detail={"leaf_cap": cap, "alpha": alpha, "splits": splits},
    )
