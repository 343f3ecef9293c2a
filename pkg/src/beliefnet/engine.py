"""Cycle dynamics: one input per cycle, bounded by a time budget.

A cycle creates the input, links it preferentially (first linking), then spends
the remaining budget on two-step random walks from the input, each followed by
a consistency check of the two endpoints. Ejections trigger a blacklist-driven
self-consistency test. At the end of the cycle a fixed number of random edges
is forgotten.

Time charges: one step per walk+link, one step per post-walk consistency check
(both killing tests together), one step per killing test inside first linking
and inside the self-consistency test. Building the U edges of first linking is
free.

Random draws happen in this order, all from the single per-run generator:
input attributes (fitness, then a, b, c when random); for each first-linking
attempt, per edge a target draw followed by a sign draw; for each structuring
step, the two hops and then the sign of the new edge; finally one draw per
forgotten edge.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .config import RND, Override, SimConfig
from .network import (
    SignedNetwork,
    VertexAttrs,
    draw_sign,
    forget_edges,
    killing,
    sample_attachment_targets,
    sign_probs_from_counts,
    weighted_neighbor,
)


class TimeBudget:
    __slots__ = ("remaining",)

    def __init__(self, remaining: int):
        if remaining < 0:
            raise ValueError("budget must be non-negative")
        self.remaining = remaining

    def charge(self) -> bool:
        """Consume one step; False (and no change) if nothing is left."""
        if self.remaining <= 0:
            return False
        self.remaining -= 1
        return True

    @property
    def exhausted(self) -> bool:
        return self.remaining <= 0

    def __repr__(self) -> str:
        return f"TimeBudget({self.remaining})"


class Outcome(enum.Enum):
    LINKED = "linked"
    NO_OP = "no-op"
    RELINKED = "relinked"  # input was reset and first linking succeeded again
    INPUT_EJECTED = "input-ejected"
    OTHERS_EJECTED = "others-ejected"
    BUDGET_EXHAUSTED = "budget-exhausted"


@dataclass
class SCTResult:
    removed: list[int]
    completed: bool  # blacklist emptied before the budget ran out
    tests: int


@dataclass
class CycleContext:
    """Mutable state shared by the steps of one cycle."""

    net: SignedNetwork
    config: SimConfig
    rng: random.Random
    budget: TimeBudget
    removed: list[int] = field(default_factory=list)
    sct_runs: int = 0
    last_sct_complete: bool | None = None


@dataclass(frozen=True)
class CycleReport:
    cycle: int
    ordinal: int
    attached: bool
    time_used: int
    removed: tuple[int, ...]
    n_vertices: int
    n_edges: int
    forgotten: int = 0
    sct_runs: int = 0
    last_sct_complete: bool | None = None

    @property
    def removed_count(self) -> int:
        return len(self.removed)


@dataclass
class SimulationResult:
    network: SignedNetwork
    reports: list[CycleReport]
    config: SimConfig


TRACE_COLUMNS = ("cycle", "attached", "time_used", "removed_count", "n_vertices", "n_edges")


def trace_rows(reports: Iterable[CycleReport]) -> list[tuple]:
    return [(r.cycle, int(r.attached), r.time_used, r.removed_count, r.n_vertices, r.n_edges) for r in reports]


# -- input creation --------------------------------------------------------


def _draw_fitness(source, rng: random.Random) -> float:
    return rng.random() if source == RND else float(source)


def _draw_counts(source, rng: random.Random) -> tuple[float, float, float]:
    if source == RND:
        return (rng.random(), rng.random(), rng.random())
    return tuple(source)


def make_input(
    net: SignedNetwork,
    config: SimConfig,
    ordinal: int,
    rng: random.Random,
    override: Override | None = None,
) -> tuple[int, VertexAttrs]:
    """Create the input vertex for ``ordinal`` (id == ordinal) with degree 0."""
    fitness = _draw_fitness(config.fitness, rng)
    counts = _draw_counts(config.sign_counts, rng)
    if override is not None:
        if override.fitness is not None:
            fitness = _draw_fitness(override.fitness, rng)
        if override.sign_counts is not None:
            counts = _draw_counts(override.sign_counts, rng)
    g, h = sign_probs_from_counts(counts)
    attrs = VertexAttrs(fitness, g, h, ordinal)
    net.add_vertex(ordinal, attrs)
    return ordinal, attrs


# -- first linking ---------------------------------------------------------


def first_linking(ctx: CycleContext, i: int) -> bool:
    """Link ``i`` to up to U preferential targets until it passes a killing test.

    Every attempt costs one step for the killing test. A failed attempt clears
    the edges of ``i`` and starts over with fresh targets and signs. If the
    budget runs out first, ``i`` is deleted and False is returned.
    """
    net, rng, budget = ctx.net, ctx.rng, ctx.budget
    attrs = net.attrs(i)
    u = ctx.config.u
    while budget.remaining > 0:
        for t in sample_attachment_targets(net, i, u, rng):
            net.add_edge(i, t, draw_sign(attrs, rng))
        budget.charge()
        if not killing(net, i):
            return True
        ctx.removed.extend(net.clear_edges(i))
    ctx.removed.extend(net.remove_vertex(i))
    return False


# -- structuring and checking ---------------------------------------------


def structuring_step(ctx: CycleContext, i: int) -> Outcome:
    """One fitness-weighted two-step walk from ``i``, a link, and a check."""
    net, rng, budget = ctx.net, ctx.rng, ctx.budget
    if not budget.charge():
        return Outcome.BUDGET_EXHAUSTED
    n1 = weighted_neighbor(net, i, rng)
    if n1 is None:
        return Outcome.NO_OP
    n2 = weighted_neighbor(net, n1, rng, exclude=i)
    if n2 is None or net.has_edge(i, n2):
        return Outcome.NO_OP
    net.add_edge(i, n2, draw_sign(net.attrs(i), rng))
    return checking(ctx, i, n2)


def _by_fitness(net: SignedNetwork, ids: Iterable[int]) -> list[int]:
    return sorted(ids, key=lambda v: (-net.fitness(v), v))


def _reset_input(ctx: CycleContext, i: int) -> Outcome:
    ctx.removed.extend(ctx.net.clear_edges(i))
    if first_linking(ctx, i):
        return Outcome.RELINKED
    return Outcome.INPUT_EJECTED


def _eject_other(ctx: CycleContext, i: int, n2: int) -> Outcome:
    net = ctx.net
    seeds = _by_fitness(net, net.positive_neighbors(n2))
    ctx.removed.extend(net.remove_vertex(n2))
    res = self_consistency_test(net, seeds, ctx.budget)
    ctx.removed.extend(res.removed)
    ctx.sct_runs += 1
    ctx.last_sct_complete = res.completed
    if i not in net:
        return Outcome.INPUT_EJECTED
    return Outcome.OTHERS_EJECTED


def checking(ctx: CycleContext, i: int, n2: int) -> Outcome:
    """Killing tests on the input and the walk endpoint, then the four cases.

    1. neither fails: structuring continues;
    2. only the input fails: its edges are cleared and first linking restarts;
    3. only ``n2`` fails: ``n2`` is removed and its positive neighbours are
       re-tested by the self-consistency test;
    4. both fail: the one with fewer edges goes (the input on ties) and case 2
       or 3 follows.
    """
    net, budget = ctx.net, ctx.budget
    # both killing tests together cost one step; ejections pay per test
    if not budget.charge():
        return Outcome.BUDGET_EXHAUSTED
    kill_i = killing(net, i)
    kill_n2 = killing(net, n2)
    if not kill_i and not kill_n2:
        return Outcome.LINKED
    if kill_i and kill_n2:
        if net.degree(i) <= net.degree(n2):
            return _reset_input(ctx, i)
        return _eject_other(ctx, i, n2)
    if kill_i:
        return _reset_input(ctx, i)
    return _eject_other(ctx, i, n2)


def self_consistency_test(net: SignedNetwork, start: int | Sequence[int], budget: TimeBudget) -> SCTResult:
    """Blacklist cascade: test the front, remove it if it fails, queue its positive neighbours.

    ``start`` is either a single vertex or an initial blacklist. Queued
    neighbours of an ejected vertex are ordered by decreasing fitness (ties by
    id) and never duplicated; a vertex dropped after passing may be queued
    again later. Each killing test costs one step.
    """
    queue = [start] if isinstance(start, int) else list(dict.fromkeys(start))
    queued = set(queue)
    removed: list[int] = []
    tests = 0
    head = 0
    while head < len(queue):
        v = queue[head]
        if v not in net:
            head += 1
            queued.discard(v)
            continue
        if not budget.charge():
            return SCTResult(removed, False, tests)
        head += 1
        queued.discard(v)
        tests += 1
        if not killing(net, v):
            continue
        positives = net.positive_neighbors(v)
        gone = net.remove_vertex(v)
        removed.extend(sorted(gone, key=lambda x: x != v))
        for w in _by_fitness(net, (w for w in positives if w not in gone)):
            if w not in queued:
                queued.add(w)
                queue.append(w)
    return SCTResult(removed, True, tests)


# -- cycles and runs -------------------------------------------------------


def _bootstrap(net, config, ordinal, rng, cycle, override) -> CycleReport:
    """Seed an empty network: a lone vertex first, then a positively linked pair.

    A lone edge would otherwise be forgotten at the end of the cycle that made
    it, and growth could never start. Seeding costs no time and skips
    forgetting.
    """
    seeds = net.vertices()
    i, _ = make_input(net, config, ordinal, rng, override)
    if seeds:
        net.add_edge(seeds[0], i, 1)
    return CycleReport(cycle, ordinal, True, 0, (), net.number_of_vertices, net.number_of_edges)


def run_cycle(
    net: SignedNetwork,
    config: SimConfig,
    ordinal: int,
    rng: random.Random,
    cycle: int | None = None,
    override: Override | None = None,
) -> CycleReport:
    e = override.e if override is not None and override.e is not None else config.e
    if cycle is None:
        cycle = ordinal - config.first_ordinal
    if net.number_of_vertices <= 1 and net.number_of_edges == 0:
        return _bootstrap(net, config, ordinal, rng, cycle, override)
    ctx = CycleContext(net, config, rng, TimeBudget(e))
    i, _ = make_input(net, config, ordinal, rng, override)
    attached = first_linking(ctx, i)
    if attached:
        while ctx.budget.remaining > 0 and i in net and net.degree(i) > 0:
            outcome = structuring_step(ctx, i)
            if outcome is Outcome.INPUT_EJECTED:
                break
    forgotten = forget_edges(net, config.f_forget, rng, ctx.removed) if config.f_forget else 0
    return CycleReport(
        cycle=cycle,
        ordinal=ordinal,
        attached=attached and i in net,
        time_used=e - ctx.budget.remaining,
        removed=tuple(ctx.removed),
        n_vertices=net.number_of_vertices,
        n_edges=net.number_of_edges,
        forgotten=forgotten,
        sct_runs=ctx.sct_runs,
        last_sct_complete=ctx.last_sct_complete,
    )


def run_simulation(
    config: SimConfig,
    network: SignedNetwork | None = None,
    on_cycle: Callable[[SignedNetwork, CycleReport], None] | None = None,
    rng: random.Random | None = None,
) -> SimulationResult:
    """Process ``config.n_points`` inputs, starting from ``network`` if given.

    The network is mutated in place when supplied. Ordinals (and vertex ids)
    start at ``config.first_ordinal``.
    """
    config.validate()
    if rng is None:
        rng = random.Random(config.seed)
    if network is None:
        network = SignedNetwork(H=config.h, capacity=config.first_ordinal + config.n_points)
    else:
        network.H = config.h
    overrides = config.override_map()
    reports = []
    for k in range(config.n_points):
        ordinal = config.first_ordinal + k
        rep = run_cycle(network, config, ordinal, rng, cycle=k, override=overrides.get(ordinal))
        reports.append(rep)
        if on_cycle is not None:
            on_cycle(network, rep)
    return SimulationResult(network, reports, config)
