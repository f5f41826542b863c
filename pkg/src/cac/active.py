"""Multiscale cautious active clustering.

One level of the loop, at degree ``n`` and threshold ``theta``:

1. threshold the squared-kernel density field at ``theta`` of its sample
   maximum to get the confident candidate members;
2. join members closer than ``eta/2`` (``eta = c / (n * theta)``) and take
   connected components;
3. a component whose known labels agree propagates that label to all its
   members; a component with no known label adopts a nearby previously
   labeled point if one sits within ``eta/2``, otherwise queries the oracle
   at its density mode; a component with *conflicting* labels triggers a
   global escalation ``theta <- tau * theta`` and the level is retried
   (bounded; on exhaustion the component is split by nearest labeled point
   and the event recorded as degraded confidence).

Levels advance ``n`` by ``step`` up to ``n_max``, reusing all labels.  The
final level's members form the confident set; everything else is classified
by the witness functions built from it.  All iteration is index-ordered, so
a fixed oracle reproduces runs byte for byte.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist

from .density import density_field, support_set
from .errors import BudgetExhausted, ConfigError
from .evaluation import Scorecard, accuracy_suite, micro_f
from .graphs import build_eta_graph, component_mode, connected_components
from .hermite import KernelConfig
from .witness import WitnessModel, classify_batch

__all__ = [
    "LabelOracle",
    "TruthOracle",
    "ReplayOracle",
    "CallbackOracle",
    "Schedule",
    "ActiveState",
    "RunReport",
    "eta_for",
    "median_nearest_neighbor",
    "default_eta_constant",
    "run_level",
    "run",
]

#: Multiple of the median nearest-neighbor spacing used for the default
#: graph scale at the first level: eta_start/2 = (NEIGHBOR_SCALE/2) * medNN.
#: Calibrated on the bundled generators -- small multiples leave half the
#: points isolated (the graph shatters), large ones bridge true gaps; the
#: workable window on every bundled fixture contains 32.
NEIGHBOR_SCALE = 32.0


# ---------------------------------------------------------------------------
# oracles
# ---------------------------------------------------------------------------

class LabelOracle:
    """Source of ground-truth labels, queried by sample index.

    Repeated queries of one index always return the same label and are
    free; the query count is the number of distinct indices asked and
    never goes down.  Subclasses implement :meth:`_lookup`.
    """

    def __init__(self, budget: Optional[int] = None):
        self._answers: dict[int, int] = {}
        self.budget = budget

    @property
    def query_count(self) -> int:
        return len(self._answers)

    @property
    def queried_indices(self) -> list[int]:
        return sorted(self._answers)

    def query(self, index: int) -> int:
        index = int(index)
        if index in self._answers:
            return self._answers[index]
        if self.budget is not None and self.query_count >= self.budget:
            raise BudgetExhausted(
                f"label budget of {self.budget} exhausted at point {index}")
        label = int(self._lookup(index))
        self._answers[index] = label
        return label

    def _lookup(self, index: int) -> int:
        raise NotImplementedError


class TruthOracle(LabelOracle):
    """Answers from a full ground-truth label table."""

    def __init__(self, labels, budget: Optional[int] = None):
        super().__init__(budget)
        self.labels = np.asarray(labels, dtype=int)

    def _lookup(self, index: int) -> int:
        if not 0 <= index < self.labels.shape[0]:
            raise IndexError(f"point {index} outside the dataset")
        return int(self.labels[index])


class ReplayOracle(LabelOracle):
    """Answers from a prerecorded ``index,label`` script.

    A query outside the script is a budget failure: the scripted session
    has nothing more to say.
    """

    def __init__(self, script: dict[int, int], budget: Optional[int] = None):
        super().__init__(budget)
        self.script = {int(k): int(v) for k, v in script.items()}

    @classmethod
    def from_file(cls, path, budget: Optional[int] = None) -> "ReplayOracle":
        script: dict[int, int] = {}
        with open(path) as fh:
            for line_no, line in enumerate(fh, 1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                try:
                    idx_s, lab_s = line.split(",")
                    script[int(idx_s)] = int(lab_s)
                except ValueError:
                    raise ValueError(
                        f"{path}: line {line_no}: expected 'index,label', "
                        f"got {line!r}") from None
        return cls(script, budget)

    def _lookup(self, index: int) -> int:
        if index not in self.script:
            raise BudgetExhausted(
                f"replay script has no label for point {index}")
        return self.script[index]


class CallbackOracle(LabelOracle):
    """Delegates each fresh query to a callable (interactive sessions)."""

    def __init__(self, fn, budget: Optional[int] = None):
        super().__init__(budget)
        self._fn = fn

    def _lookup(self, index: int) -> int:
        return int(self._fn(index))


# ---------------------------------------------------------------------------
# schedule and state
# ---------------------------------------------------------------------------

def eta_for(n: float, theta: float, c: float) -> float:
    """Graph scale at one level: ``c / (n * theta)``."""
    if not (n > 0 and theta > 0 and c > 0):
        raise ValueError("n, theta and c must all be positive")
    return c / (n * theta)


def median_nearest_neighbor(points) -> float:
    """Median over points of the distance to their nearest other point."""
    pts = np.asarray(points, dtype=float)
    if pts.shape[0] < 2:
        return 0.0
    d = cdist(pts, pts)
    np.fill_diagonal(d, np.inf)
    return float(np.median(d.min(axis=1)))


@dataclass(frozen=True)
class Schedule:
    """Loop parameters: degree range, threshold escalation, graph scale.

    ``eta_constant`` left as None is calibrated from the data at run time
    via :func:`default_eta_constant`, so ``eta`` at the first level is a
    fixed multiple of the typical point spacing.
    """

    n_start: float
    n_max: float
    step: float = 1.0
    theta_init: float = 0.1
    tau: float = 1.3
    eta_constant: Optional[float] = None
    max_escalations_per_level: int = 20
    query_budget: Optional[int] = None

    def __post_init__(self):
        if not (1.0 <= self.n_start <= self.n_max):
            raise ConfigError(
                f"need 1 <= n_start <= n_max, got {self.n_start}, {self.n_max}")
        if not self.step > 0:
            raise ConfigError(f"step must be positive, got {self.step}")
        if not 0.0 < self.theta_init < 1.0:
            raise ConfigError(
                f"theta_init must lie in (0, 1), got {self.theta_init}")
        if not self.tau > 1.0:
            raise ConfigError(f"tau must exceed 1, got {self.tau}")
        if self.eta_constant is not None and not self.eta_constant > 0:
            raise ConfigError("eta_constant must be positive")
        if self.max_escalations_per_level < 0:
            raise ConfigError("max_escalations_per_level must be >= 0")
        if self.query_budget is not None and self.query_budget < 0:
            raise ConfigError("query_budget must be nonnegative")


def default_eta_constant(points, schedule: Schedule) -> float:
    """Data-calibrated ``c`` with ``eta = c/(n theta)``: at the first level
    ``eta`` equals ``NEIGHBOR_SCALE`` median nearest-neighbor spacings."""
    med = median_nearest_neighbor(points)
    if med == 0.0:
        med = 1.0      # degenerate datasets (single point, duplicates)
    return NEIGHBOR_SCALE * med * schedule.n_start * schedule.theta_init


@dataclass
class ActiveState:
    """Mutable loop state threaded through the levels.

    ``labeled`` maps queried index -> oracle label (never shrinks);
    ``predicted`` is the current f-hat with 0 meaning unassigned; ``flags``
    records how each component of the last completed level was resolved.
    """

    labeled: dict = field(default_factory=dict)
    predicted: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    n: float = 0.0
    theta: float = 0.0
    eta: float = 0.0
    eta_constant: float = 1.0
    flags: dict = field(default_factory=dict)
    confident: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    history: list = field(default_factory=list)
    degraded: bool = False
    reassignment_log: list = field(default_factory=list)
    component_of: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    level_components: list = field(default_factory=list)

    @classmethod
    def fresh(cls, M: int, schedule: Schedule, eta_constant: float) -> "ActiveState":
        return cls(
            labeled={},
            predicted=np.zeros(M, dtype=int),
            n=schedule.n_start,
            theta=schedule.theta_init,
            eta=eta_for(schedule.n_start, schedule.theta_init, eta_constant),
            eta_constant=eta_constant,
            flags={},
            confident=np.zeros(0, dtype=int),
            history=[],
            component_of=np.full(M, -1, dtype=int),
        )


# ---------------------------------------------------------------------------
# one level
# ---------------------------------------------------------------------------

def _component_labels(comp_members, labeled: dict) -> dict[int, int]:
    """Known labels inside a component: anchor index -> label, index order."""
    return {int(i): labeled[int(i)] for i in comp_members if int(i) in labeled}


def _propagate(state: ActiveState, members, label: int, reassigned: list) -> None:
    """Assign ``label`` to ``members``; oracle-labeled points are immune,
    overwrites of earlier predictions are logged."""
    for i in np.asarray(members, dtype=int):
        i = int(i)
        if i in state.labeled:
            continue
        old = int(state.predicted[i])
        if old != 0 and old != label:
            reassigned.append({"index": i, "from": old, "to": int(label)})
        state.predicted[i] = label


def run_level(state: ActiveState, points, field, oracle: LabelOracle,
              schedule: Schedule) -> ActiveState:
    """Run one degree level to completion and advance ``n`` by ``step``.

    The density field is fixed for the level; only the threshold moves
    during escalation.  Budget errors propagate with the state attached --
    every query already made stays in ``state.labeled``.
    """
    pts = np.asarray(points, dtype=float)
    n = state.n
    escalations = 0
    while True:
        state.eta = eta_for(n, state.theta, state.eta_constant)
        members = support_set(field, state.theta).members
        graph = build_eta_graph(pts, members, state.eta)
        comps = connected_components(graph)
        conflicted = any(
            len(set(_component_labels(c.members, state.labeled).values())) > 1
            for c in comps)
        if not conflicted:
            break
        if escalations >= schedule.max_escalations_per_level:
            break             # terminal: split the holdouts below
        escalations += 1
        state.theta = min(state.theta * schedule.tau, 1.0)

    queries: list[dict] = []
    adoptions = 0
    splits: list[int] = []
    reassigned: list[dict] = []
    state.flags = {}
    state.component_of[:] = -1
    member_set = set(int(i) for i in members)
    dropped = np.array(
        [i for i in sorted(state.labeled) if i not in member_set], dtype=int)

    for comp in comps:
        state.component_of[np.asarray(comp.members, dtype=int)] = comp.id
        anchors = _component_labels(comp.members, state.labeled)
        distinct = sorted(set(anchors.values()))
        if len(distinct) == 1:
            _propagate(state, comp.members, distinct[0], reassigned)
            state.flags[comp.id] = "agreed"
        elif len(distinct) == 0:
            label = None
            if dropped.size:
                # a previously labeled point that fell below the threshold
                # still carries ground truth; reuse it if it sits within
                # graph range of this component instead of spending a query
                d = cdist(pts[dropped], pts[comp.members])
                nearest = d.min(axis=1)
                best = int(np.lexsort((dropped, nearest))[0])
                if nearest[best] < state.eta / 2.0:
                    label = state.labeled[int(dropped[best])]
                    adoptions += 1
                    state.flags[comp.id] = "adopted"
            if label is None:
                mode = component_mode(comp, field)
                try:
                    if (schedule.query_budget is not None
                            and oracle.query_count >= schedule.query_budget):
                        raise BudgetExhausted(
                            f"query budget {schedule.query_budget} reached "
                            f"before component {comp.id}")
                    label = oracle.query(mode)
                except BudgetExhausted as exc:
                    exc.state = state
                    raise
                state.labeled[int(mode)] = int(label)
                state.predicted[int(mode)] = int(label)
                queries.append({"index": int(mode), "label": int(label)})
                state.flags[comp.id] = "queried"
            _propagate(state, comp.members, int(label), reassigned)
        else:
            # escalation could not separate this component: divide it among
            # its labeled points by plain distance and mark the run degraded
            anchor_idx = np.array(sorted(anchors), dtype=int)
            d = cdist(pts[comp.members], pts[anchor_idx])
            owner = anchor_idx[np.argmin(d, axis=1)]
            for i, a in zip(comp.members, owner):
                _propagate(state, [int(i)], state.labeled[int(a)], reassigned)
            splits.append(comp.id)
            state.flags[comp.id] = "split"
            state.degraded = True

    state.confident = np.asarray(members, dtype=int)
    state.level_components.append([np.asarray(c.members, dtype=int) for c in comps])
    state.reassignment_log.extend(reassigned)
    state.history.append({
        "n": float(n),
        "theta_final": float(state.theta),
        "eta": float(state.eta),
        "components": int(len(comps)),
        "queries": queries,
        "escalations": int(escalations),
        "confident_count": int(len(members)),
        "adoptions": int(adoptions),
        "splits": [int(s) for s in splits],
        "reassignments": int(len(reassigned)),
    })
    state.n = n + schedule.step
    return state


# ---------------------------------------------------------------------------
# full run
# ---------------------------------------------------------------------------

@dataclass
class RunReport:
    """Everything a finished (or budget-stopped) run produced.

    ``to_json`` emits the deterministic serialized form: identical inputs
    give byte-identical documents (no timestamps, sorted keys).
    """

    dataset_name: str
    levels: list
    assignments: np.ndarray
    confident: np.ndarray
    query_total: int
    queries: list
    degraded: bool
    witness_ties: int
    scores: Optional[Scorecard]
    schedule: dict
    config: dict
    complete: bool
    points: np.ndarray = None
    truth: Optional[np.ndarray] = None

    @property
    def predicted(self) -> np.ndarray:
        return self.assignments

    @property
    def confident_mask(self) -> np.ndarray:
        mask = np.zeros(self.assignments.shape[0], dtype=bool)
        mask[self.confident] = True
        return mask

    def to_payload(self) -> dict:
        payload = {
            "dataset": self.dataset_name,
            "schedule": self.schedule,
            "kernel": self.config,
            "levels": self.levels,
            "assignments": [int(v) for v in self.assignments],
            "confident": [int(v) for v in self.confident],
            "query_total": int(self.query_total),
            "queries": self.queries,
            "degraded": bool(self.degraded),
            "witness_ties": int(self.witness_ties),
            "complete": bool(self.complete),
        }
        if self.scores is not None:
            payload["scores"] = {
                "micro_f": self.scores.micro_f,
                "accuracy": self.scores.accuracy,
                "worst_class_accuracy": self.scores.worst_class_accuracy,
                "per_cluster_f": list(self.scores.per_cluster_f),
                "confident_accuracy": self.scores.confident_accuracy,
                "confident_fraction": self.scores.confident_fraction,
                "unassigned_count": self.scores.unassigned_count,
            }
        return payload

    def to_json(self) -> str:
        return json.dumps(self.to_payload(), sort_keys=True, indent=2) + "\n"


def _config_payload(config: KernelConfig) -> dict:
    return {
        "q": int(config.q),
        "sigma": float(config.sigma),
        "filter_gain": float(config.filter.gain),
        "loc_exponent": float(config.loc_exponent),
    }


def _schedule_payload(schedule: Schedule, eta_constant: float) -> dict:
    return {
        "n_start": float(schedule.n_start),
        "n_max": float(schedule.n_max),
        "step": float(schedule.step),
        "theta_init": float(schedule.theta_init),
        "tau": float(schedule.tau),
        "eta_constant": float(eta_constant),
        "max_escalations_per_level": int(schedule.max_escalations_per_level),
        "query_budget": (None if schedule.query_budget is None
                         else int(schedule.query_budget)),
    }


def _finalize(state: ActiveState, points, config: KernelConfig,
              schedule: Schedule, eta_constant: float, truth,
              dataset_name: str, complete: bool) -> RunReport:
    pts = np.asarray(points, dtype=float)
    ties_total = 0
    if complete and state.confident.size:
        final_n = state.history[-1]["n"] if state.history else schedule.n_max
        level_config = replace(config, n=final_n)
        conf_labels = state.predicted[state.confident]
        class_ids = [int(k) for k in np.unique(conf_labels) if k > 0]
        if class_ids:
            class_sets = tuple(
                state.confident[conf_labels == k] for k in class_ids)
            model = WitnessModel(class_sets=class_sets, config=level_config,
                                 K=len(class_ids))
            conf_set = set(int(i) for i in state.confident)
            rest = np.array([
                i for i in range(pts.shape[0])
                if i not in conf_set and i not in state.labeled
            ], dtype=int)
            if rest.size:
                raw, _margins, ties = classify_batch(pts[rest], model, pts)
                # raw is a position into class_ids, offset back to labels
                state.predicted[rest] = np.array(class_ids, dtype=int)[raw - 1]
                ties_total = int(np.sum(ties))
    scores = None
    if truth is not None:
        scores = accuracy_suite(state.predicted, truth, state.confident)
    all_queries = [q for rec in state.history for q in rec["queries"]]
    return RunReport(
        dataset_name=dataset_name,
        levels=list(state.history),
        assignments=state.predicted.copy(),
        confident=state.confident.copy(),
        query_total=len(state.labeled),
        queries=all_queries,
        degraded=state.degraded,
        witness_ties=ties_total,
        scores=scores,
        schedule=_schedule_payload(schedule, eta_constant),
        config=_config_payload(config),
        complete=complete,
        points=pts,
        truth=None if truth is None else np.asarray(truth, dtype=int),
    )


def _level_scores(state: ActiveState, truth) -> dict:
    """Quality snapshot after one level: the clusters scored by micro-F are
    this level's graph components (the confident sets, one per component)."""
    t = np.asarray(truth, dtype=int)
    label_sets = [np.flatnonzero(t == k) for k in np.unique(t)]
    clusters = [c for c in state.level_components[-1] if c.size]
    conf = state.confident
    correct = state.predicted == t
    return {
        "accuracy": float(np.mean(correct)),
        "confident_accuracy": (
            float(np.mean(correct[conf])) if conf.size else 0.0),
        "micro_f": micro_f(clusters, label_sets) if clusters else 0.0,
    }


def run(points, oracle: LabelOracle, schedule: Schedule, config: KernelConfig,
        truth=None, dataset_name: str = "data",
        level_hook=None) -> tuple[RunReport, ActiveState]:
    """Full multiscale run: levels from ``n_start`` to ``n_max``, then
    witness classification of everything outside the final confident set.

    Labels carry across levels; a component containing one is not
    re-queried unless its labels conflict.  When ``truth`` is given each
    level record also carries accuracy and micro-F snapshots (the oracle
    never sees it).  ``level_hook(state)`` runs after every level --
    progress display for the serve mode.  On budget exhaustion the
    partially labeled state and report are attached to the raised
    :class:`BudgetExhausted`.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 1:
        raise ValueError("points must be a nonempty (M, q) array")
    if pts.shape[1] != config.q:
        raise ValueError(
            f"points have dimension {pts.shape[1]}, config expects {config.q}")
    eta_constant = (schedule.eta_constant if schedule.eta_constant is not None
                    else default_eta_constant(pts, schedule))
    state = ActiveState.fresh(pts.shape[0], schedule, eta_constant)
    try:
        while state.n <= schedule.n_max + 1e-9:
            level_config = replace(config, n=state.n)
            field = density_field(pts, level_config)
            run_level(state, pts, field, oracle, schedule)
            if truth is not None:
                state.history[-1]["scores"] = _level_scores(state, truth)
            if level_hook is not None:
                level_hook(state)
    except BudgetExhausted as exc:
        exc.state = state
        exc.report = _finalize(state, pts, config, schedule, eta_constant,
                               truth, dataset_name, complete=False)
        raise
    report = _finalize(state, pts, config, schedule, eta_constant, truth,
                       dataset_name, complete=True)
    return report, state
