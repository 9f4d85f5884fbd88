"""Lifting low-level traces to high-level activities via activity patterns.

Each selected local process model becomes an activity pattern: its net plus
a lifecycle role map (transitions consuming from the initial place mark the
start of an occurrence, transitions feeding the final place mark its
completion). Patterns are composed into one abstraction model, the trace is
aligned against that model, and every matched pattern occurrence is
replaced by one high-level event.

Alignment move costs: synchronous and silent model moves are free, log
moves and visible model moves cost one. Minimum total cost alone does not
pin down the occurrence structure, so ties break lexicographically: first
fewest gap moves (log moves of an activity that belongs to a pattern with
an occurrence currently open; an occurrence is meant to be one contiguous
run of the trace projected onto its pattern's activities, so skipping a
matching event mid-occurrence is the anomaly), then fewest visible model
moves (do not invent pattern behavior out of stray events when an equally
cheap explanation without model moves exists).

An occurrence whose completing transition had to be inserted as a visible
model move is not reported as a high-level event: its matched events are
demoted back to plain low-level events. Occurrences that complete silently
(and-joins, loop exits) or synchronously are reported, anchored at their
last synchronous move.
"""

import heapq
from dataclasses import dataclass, field

from .errors import PatternError, SearchLimitError
from .eventlog import COMPLETE, START, Event, EventLog, Trace
from .lpm import LocalProcessModel, ProcessTree
from .petrinet import (DEFAULT_STATE_LIMIT, AcceptingPetriNet, Marking,
                       PetriNet, Replay)

INTERLEAVING = "interleaving"
PARALLEL = "parallel"

SYNC = "sync"
LOG = "log"
MODEL = "model"
TAU = "tau"


def derive_lifecycle(apn: AcceptingPetriNet) -> dict[str, str]:
    """Role map for a pattern net: consumers of the initial place(s) start an
    occurrence, producers into the final place(s) complete it; a transition
    doing both counts as complete."""
    initial_places = {p for p, c in apn.initial.items() if c}
    final_places = {p for p, c in apn.final.items() if c}
    starts: set[str] = set()
    completes: set[str] = set()
    for src, dst in apn.net.arcs:
        if src in initial_places:
            starts.add(dst)
        if dst in final_places:
            completes.add(src)
    if not completes:
        raise PatternError("pattern net has no transition feeding its final place")
    roles = {t: START for t in starts - completes}
    roles.update({t: COMPLETE for t in completes})
    return roles


@dataclass
class ActivityPattern:
    name: str
    net: AcceptingPetriNet
    lifecycle: dict[str, str]
    tree: ProcessTree | None = None

    @property
    def activities(self) -> frozenset[str]:
        return frozenset(self.net.alphabet())


def make_pattern(name: str, model: LocalProcessModel) -> ActivityPattern:
    return ActivityPattern(name=name, net=model.net,
                           lifecycle=derive_lifecycle(model.net), tree=model.tree)


def patterns_from_models(models, prefix: str = "LPM_") -> list[ActivityPattern]:
    """Name selected models LPM_1, LPM_2, ... in ranking order."""
    return [make_pattern(f"{prefix}{i}", m) for i, m in enumerate(models, start=1)]


@dataclass
class AlignmentMove:
    kind: str
    log_index: int | None = None
    transition: str | None = None
    activity: str | None = None


@dataclass
class Alignment:
    moves: list[AlignmentMove]
    cost: int
    # (total cost, gap moves, visible model moves)
    cost_vector: tuple[int, int, int]


@dataclass
class AbstractionModel:
    net: AcceptingPetriNet
    patterns: list[ActivityPattern]
    composition: str
    instance_tags: dict[str, tuple[str, str | None]] = field(default_factory=dict)
    open_taus: dict[str, str] = field(default_factory=dict)
    close_taus: dict[str, str] = field(default_factory=dict)

    @property
    def pattern_alphabet(self) -> frozenset[str]:
        return frozenset().union(*(p.activities for p in self.patterns)) \
            if self.patterns else frozenset()

    def transition_tags(self) -> dict[str, str]:
        """Annotation strings for PNML export."""
        out = {}
        for t, (name, role) in self.instance_tags.items():
            out[t] = f"pattern={name};role={role if role else '-'}"
        for t, name in self.open_taus.items():
            out[t] = f"pattern={name};role=open"
        for t, name in self.close_taus.items():
            out[t] = f"pattern={name};role=close"
        return out


def _embed(pattern: ActivityPattern, places, transitions, arcs, labels, tags):
    """Copy a pattern net with prefixed ids; returns (initial places, final places)."""
    prefix = pattern.name + "__"
    for p in pattern.net.net.places:
        places.add(prefix + p)
    for t in pattern.net.net.transitions:
        tid = prefix + t
        transitions.add(tid)
        label = pattern.net.net.labels.get(t)
        if label is not None:
            labels[tid] = label
        tags[tid] = (pattern.name, pattern.lifecycle.get(t))
    for src, dst in pattern.net.net.arcs:
        arcs.add((prefix + src, prefix + dst))
    for name, marking in (("initial", pattern.net.initial), ("final", pattern.net.final)):
        for p, c in marking.items():
            if c > 1:
                raise PatternError(
                    f"pattern {pattern.name} has a multi-token {name} marking; "
                    "composition needs one token per place")
    init = [prefix + p for p, c in sorted(pattern.net.initial.items()) if c]
    fin = [prefix + p for p, c in sorted(pattern.net.final.items()) if c]
    if not init or not fin:
        raise PatternError(f"pattern {pattern.name} needs non-empty initial and final markings")
    return init, fin


def compose(patterns: list[ActivityPattern], composition: str = INTERLEAVING) -> AbstractionModel:
    """Build the abstraction model net.

    interleaving: one global loop choosing one pattern occurrence at a time;
    parallel: per-pattern loops running concurrently (occurrences of the
    same pattern stay sequential, different patterns may overlap). Both
    allow zero occurrences.
    """
    if not patterns:
        raise ValueError("compose needs at least one pattern")
    names = [p.name for p in patterns]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate pattern names: {names}")
    if composition not in (INTERLEAVING, PARALLEL):
        raise ValueError(f"unknown composition {composition!r}")

    places: set[str] = {"src", "snk"}
    transitions: set[str] = set()
    arcs: set[tuple[str, str]] = set()
    labels: dict[str, str] = {}
    tags: dict[str, tuple[str, str | None]] = {}
    open_taus: dict[str, str] = {}
    close_taus: dict[str, str] = {}

    def wire_loop(hub: str, pattern: ActivityPattern):
        init, fin = _embed(pattern, places, transitions, arcs, labels, tags)
        t_open = f"open__{pattern.name}"
        t_close = f"close__{pattern.name}"
        transitions.add(t_open)
        transitions.add(t_close)
        open_taus[t_open] = pattern.name
        close_taus[t_close] = pattern.name
        arcs.add((hub, t_open))
        for p in init:
            arcs.add((t_open, p))
        for p in fin:
            arcs.add((p, t_close))
        arcs.add((t_close, hub))

    if composition == INTERLEAVING:
        places.add("hub")
        transitions.update(("begin", "end"))
        arcs.update({("src", "begin"), ("begin", "hub"), ("hub", "end"), ("end", "snk")})
        for pattern in patterns:
            wire_loop("hub", pattern)
    else:
        transitions.update(("begin", "end"))
        arcs.update({("src", "begin"), ("end", "snk")})
        for pattern in patterns:
            hub = f"hub__{pattern.name}"
            places.add(hub)
            arcs.add(("begin", hub))
            arcs.add((hub, "end"))
            wire_loop(hub, pattern)

    apn = AcceptingPetriNet(net=PetriNet(places=places, transitions=transitions,
                                         arcs=arcs, labels=labels),
                            initial={"src": 1}, final={"snk": 1})
    apn.validate()
    return AbstractionModel(net=apn, patterns=list(patterns), composition=composition,
                            instance_tags=tags, open_taus=open_taus, close_taus=close_taus)


# ---------------------------------------------------------------- aligner

class _GapOracle:
    """Per-marking set of gap-protected activities.

    A token inside a pattern's embedded subnet means an occurrence of that
    pattern is open; logging one of its activities at that point would split
    the occurrence, which segmentation semantics forbid (occurrences are
    contiguous runs of the trace projected onto the pattern's activities).
    """

    def __init__(self, model: AbstractionModel, rp: Replay):
        self._rp = rp
        self._subnets: list[tuple[tuple[int, ...], frozenset[str]]] = []
        for pat in model.patterns:
            prefix = pat.name + "__"
            idx = tuple(i for i, p in enumerate(rp.places) if p.startswith(prefix))
            self._subnets.append((idx, pat.activities))
        self._cache: dict[int, frozenset[str]] = {}

    def __call__(self, mid: int) -> frozenset[str]:
        got = self._cache.get(mid)
        if got is None:
            m = self._rp._marks[mid]
            acts: set[str] = set()
            for idx, alpha in self._subnets:
                if any(m[i] for i in idx):
                    acts.update(alpha)
            got = frozenset(acts)
            self._cache[mid] = got
        return got


def align_words(events: list[str], apn: AcceptingPetriNet,
                state_limit: int = DEFAULT_STATE_LIMIT,
                replay: Replay | None = None,
                gap_oracle=None) -> Alignment:
    """Minimum-cost alignment of an activity sequence against a net.

    Lexicographically minimizes (total cost, gap moves, visible model
    moves); deterministic expansion order sync, tau, log, visible model.
    gap_oracle maps a marking id to the activities whose log move counts
    as a gap move there (none without an oracle, as for plain nets).
    """
    rp = replay if replay is not None else Replay(apn, state_limit=state_limit)
    n = len(events)
    alphabet = set(rp.by_label)
    # admissible heuristic: events the net cannot ever mirror must be log moves
    foreign_suffix = [0] * (n + 1)
    for i in range(n - 1, -1, -1):
        foreign_suffix[i] = foreign_suffix[i + 1] + (0 if events[i] in alphabet else 1)

    start = (0, rp.initial_id)
    goal = (n, rp.final_id)
    dist: dict[tuple[int, int], tuple[int, int, int]] = {start: (0, 0, 0)}
    parent: dict[tuple[int, int], tuple[tuple[int, int], AlignmentMove]] = {}
    counter = 0
    heap = [((foreign_suffix[0], 0, 0), 0, start)]
    settled: set[tuple[int, int]] = set()

    while heap:
        _, _, state = heapq.heappop(heap)
        if state in settled:
            continue
        settled.add(state)
        if state == goal:
            break
        if len(settled) > state_limit:
            raise SearchLimitError(f"state limit {state_limit} exceeded during alignment")
        pos, mid = state
        c, gp, mv = dist[state]

        def push(nxt, vec, move):
            nonlocal counter
            if nxt in settled:
                return
            old = dist.get(nxt)
            if old is None or vec < old:
                dist[nxt] = vec
                parent[nxt] = (state, move)
                counter += 1
                prio = (vec[0] + foreign_suffix[nxt[0]], vec[1], vec[2])
                heapq.heappush(heap, (prio, counter, nxt))

        enabled = rp.enabled_ts(mid)
        if pos < n:
            event = events[pos]
            for t in enabled:
                if rp.labels[t] == event:
                    push((pos + 1, rp.fire_t(mid, t)),
                         (c, gp, mv),
                         AlignmentMove(SYNC, log_index=pos,
                                       transition=rp.transitions[t], activity=event))
        for t in enabled:
            if rp.labels[t] is None:
                push((pos, rp.fire_t(mid, t)),
                     (c, gp, mv),
                     AlignmentMove(TAU, transition=rp.transitions[t]))
        if pos < n:
            gap = 1 if gap_oracle is not None and events[pos] in gap_oracle(mid) else 0
            push((pos + 1, mid),
                 (c + 1, gp + gap, mv),
                 AlignmentMove(LOG, log_index=pos, activity=events[pos]))
        for t in enabled:
            if rp.labels[t] is not None:
                push((pos, rp.fire_t(mid, t)),
                     (c + 1, gp, mv + 1),
                     AlignmentMove(MODEL, transition=rp.transitions[t],
                                   activity=rp.labels[t]))

    if goal not in dist or goal not in settled:
        raise SearchLimitError("alignment search exhausted without reaching the final marking")
    moves: list[AlignmentMove] = []
    state = goal
    while state != start:
        prev, move = parent[state]
        moves.append(move)
        state = prev
    moves.reverse()
    vec = dist[goal]
    return Alignment(moves=moves, cost=vec[0], cost_vector=vec)


def align(trace, model: AbstractionModel | AcceptingPetriNet,
          state_limit: int = DEFAULT_STATE_LIMIT) -> Alignment:
    """Align a trace (its complete-lifecycle events) against a model.

    Given an AbstractionModel, gap moves are tracked so occurrences stay
    contiguous; a plain net aligns on cost and model moves alone.
    """
    if isinstance(trace, Trace):
        events = [e.activity for e in trace.events if e.is_complete()]
    else:
        events = list(trace)
    if isinstance(model, AbstractionModel):
        rp = Replay(model.net, state_limit=state_limit)
        return align_words(events, model.net, state_limit=state_limit,
                           replay=rp, gap_oracle=_GapOracle(model, rp))
    return align_words(events, model, state_limit=state_limit)


# ------------------------------------------------------------- abstraction

@dataclass
class _Instance:
    pattern: str
    sync_indices: list[int] = field(default_factory=list)
    start_sync: int | None = None
    complete_sync: int | None = None
    complete_modeled: bool = False


def abstract_trace(trace: Trace, model: AbstractionModel, keep_foreign: bool = False,
                   state_limit: int = DEFAULT_STATE_LIMIT,
                   replay: Replay | None = None, gap_oracle=None) -> Trace:
    """Replace matched pattern occurrences by high-level events.

    Emits one complete event per reported occurrence (and a start event
    when the occurrence's starting transition fired synchronously). Log
    moves over pattern activities stay as low-level events; events of
    demoted occurrences stay too. Foreign events (outside every pattern
    alphabet) are dropped unless keep_foreign is set.
    """
    if replay is None:
        replay = Replay(model.net, state_limit=state_limit)
    if gap_oracle is None:
        gap_oracle = _GapOracle(model, replay)
    originals = [e for e in trace.events if e.is_complete()]
    words = [e.activity for e in originals]
    alignment = align_words(words, model.net, state_limit=state_limit,
                            replay=replay, gap_oracle=gap_oracle)
    alphabet = model.pattern_alphabet

    emitted: list[tuple[int, int, Event]] = []
    order = 0

    def emit(index: int, event: Event):
        nonlocal order
        emitted.append((index, order, event))
        order += 1

    open_instances: dict[str, _Instance] = {}

    def finalize(inst: _Instance):
        if not inst.sync_indices:
            return
        if inst.complete_modeled:
            for i in inst.sync_indices:
                emit(i, originals[i])
            return
        if inst.start_sync is not None:
            emit(inst.start_sync, Event(activity=inst.pattern, lifecycle=START))
        emit(max(inst.sync_indices), Event(activity=inst.pattern, lifecycle=COMPLETE))

    for move in alignment.moves:
        if move.kind == LOG:
            if move.activity in alphabet or keep_foreign:
                emit(move.log_index, originals[move.log_index])
            continue
        t = move.transition
        if t in model.open_taus:
            name = model.open_taus[t]
            if name in open_instances:
                raise PatternError(f"overlapping occurrences of pattern {name}")
            open_instances[name] = _Instance(pattern=name)
        elif t in model.close_taus:
            inst = open_instances.pop(model.close_taus[t], None)
            if inst is not None:
                finalize(inst)
        elif t in model.instance_tags:
            name, role = model.instance_tags[t]
            inst = open_instances.get(name)
            if inst is None:
                continue
            if move.kind == SYNC:
                inst.sync_indices.append(move.log_index)
                if role == START and inst.start_sync is None:
                    inst.start_sync = move.log_index
                if role == COMPLETE:
                    inst.complete_sync = move.log_index
            elif move.kind == MODEL and role == COMPLETE:
                inst.complete_modeled = True

    for inst in open_instances.values():
        finalize(inst)

    emitted.sort(key=lambda item: (item[0], item[1]))
    return Trace(case_id=trace.case_id, events=[e for _, _, e in emitted])


def abstract_log(log: EventLog, model: AbstractionModel, keep_foreign: bool = False,
                 state_limit: int = DEFAULT_STATE_LIMIT) -> EventLog:
    rp = Replay(model.net, state_limit=state_limit)
    oracle = _GapOracle(model, rp)
    return EventLog(traces=[abstract_trace(t, model, keep_foreign=keep_foreign,
                                           state_limit=state_limit, replay=rp,
                                           gap_oracle=oracle)
                            for t in log])
