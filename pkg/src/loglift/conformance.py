"""Model quality against a log: expansion, fitness, precision, F-score.

A high-level model is expanded by splicing each pattern-named transition
into a fresh copy of that pattern's net, so the expanded model speaks the
low-level alphabet again and can be scored against the original log.

Fitness is alignment-based: per trace 1 - cost / (|trace| + shortest
visible run of the net), averaged over the log. Precision is escaping
edges over the prefix automaton of the aligned model runs: at every
visited state, visible labels the model enables but the log never takes
there count against it.
"""

from collections import Counter
from dataclasses import dataclass, field

from .abstraction import MODEL, SYNC, TAU, align_words
from .errors import PatternError
from .eventlog import EventLog
from .petrinet import (DEFAULT_STATE_LIMIT, AcceptingPetriNet, PetriNet,
                       Replay, min_visible_run_length)


@dataclass
class QualityReport:
    fitness: float
    precision: float
    f_score: float
    trace_costs: list[int] = field(default_factory=list)

    def to_kv(self) -> str:
        return (f"fitness={self.fitness:.6f}\n"
                f"precision={self.precision:.6f}\n"
                f"f_score={self.f_score:.6f}\n"
                "trace_costs=" + ",".join(str(c) for c in self.trace_costs) + "\n")


def f_score(fitness: float, precision: float) -> float:
    if fitness + precision == 0:
        return 0.0
    return 2 * fitness * precision / (fitness + precision)


def expand_model(high_net: AcceptingPetriNet,
                 patterns) -> AcceptingPetriNet:
    """Replace every transition labeled with a pattern name by a copy of
    that pattern's net, wired in through silent transitions. Labels that
    match no pattern (retained low-level activities) stay as they are."""
    by_name = {p.name: p for p in patterns}
    high = high_net.net
    replaced = {t for t in high.transitions if high.labels.get(t) in by_name}

    places = set(high.places)
    transitions = set(high.transitions) - replaced
    labels = {t: lab for t, lab in high.labels.items() if t not in replaced}
    arcs = {(a, b) for a, b in high.arcs if a not in replaced and b not in replaced}

    for t in sorted(replaced):
        pattern = by_name[high.labels[t]]
        prefix = t + "__"
        sub = pattern.net
        for marking in (sub.initial, sub.final):
            if any(c > 1 for c in marking.values()):
                raise PatternError(
                    f"pattern {pattern.name} has a multi-token marking; "
                    "expansion needs one token per place")
        for p in sub.net.places:
            places.add(prefix + p)
        for tt in sub.net.transitions:
            transitions.add(prefix + tt)
            lab = sub.net.labels.get(tt)
            if lab is not None:
                labels[prefix + tt] = lab
        for a, b in sub.net.arcs:
            arcs.add((prefix + a, prefix + b))
        t_in, t_out = prefix + "in", prefix + "out"
        if t_in in high.transitions or t_out in high.transitions:
            raise PatternError(f"transition id {t_in!r}/{t_out!r} already taken")
        transitions.update((t_in, t_out))
        for p in high.preset(t):
            arcs.add((p, t_in))
        for p, c in sorted(sub.initial.items()):
            if c:
                arcs.add((t_in, prefix + p))
        for p, c in sorted(sub.final.items()):
            if c:
                arcs.add((prefix + p, t_out))
        for p in high.postset(t):
            arcs.add((t_out, p))

    apn = AcceptingPetriNet(net=PetriNet(places=places, transitions=transitions,
                                         arcs=arcs, labels=labels),
                            initial=dict(high_net.initial), final=dict(high_net.final))
    apn.validate()
    return apn


def _distinct_words(log: EventLog) -> Counter:
    return Counter(tuple(e.activity for e in t.events if e.is_complete()) for t in log)


def fitness(log: EventLog, net: AcceptingPetriNet,
            state_limit: int = DEFAULT_STATE_LIMIT) -> float:
    return evaluate(log, net, state_limit=state_limit).fitness


def precision(log: EventLog, net: AcceptingPetriNet,
              state_limit: int = DEFAULT_STATE_LIMIT) -> float:
    return evaluate(log, net, state_limit=state_limit).precision


def evaluate(log: EventLog, net: AcceptingPetriNet,
             state_limit: int = DEFAULT_STATE_LIMIT) -> QualityReport:
    """Fitness, precision, and F-score in one pass (alignments are shared)."""
    words = _distinct_words(log)
    if not words:
        return QualityReport(fitness=1.0, precision=1.0, f_score=1.0)
    rp = Replay(net, state_limit=state_limit)
    t_index = {name: i for i, name in enumerate(rp.transitions)}
    minlen = min_visible_run_length(net, state_limit=state_limit)

    # prefix automaton of aligned model runs: a state per distinct visible
    # prefix, holding the markings seen there, the labels taken onward, and
    # how many traces passed through
    children: dict[tuple[int, str], int] = {}
    marks: list[set[int]] = [set()]
    taken: list[set[str]] = [set()]
    weight: list[int] = [0]

    cost_of: dict[tuple[str, ...], int] = {}
    fit_sum = 0.0
    total = 0
    for word, mult in words.items():
        alignment = align_words(list(word), net, state_limit=state_limit, replay=rp)
        cost_of[word] = alignment.cost
        denom = len(word) + minlen
        fit_sum += mult * (1.0 - alignment.cost / denom if denom else 1.0)
        total += mult

        state = 0
        mid = rp.initial_id
        weight[0] += mult
        marks[0].add(mid)
        for move in alignment.moves:
            if move.kind == TAU:
                mid = rp.fire_t(mid, t_index[move.transition])
                continue
            if move.kind not in (SYNC, MODEL):
                continue
            t = t_index[move.transition]
            label = rp.labels[t]
            taken[state].add(label)
            nxt = children.get((state, label))
            if nxt is None:
                nxt = len(marks)
                children[(state, label)] = nxt
                marks.append(set())
                taken.append(set())
                weight.append(0)
            state = nxt
            mid = rp.fire_t(mid, t)
            weight[state] += mult
            marks[state].add(mid)

    escaping = 0
    enabled_total = 0
    for state in range(len(marks)):
        enabled: set[str] = set()
        for mid in marks[state]:
            for closed in rp.closure_of(mid):
                enabled.update(rp.enabled_visible_labels(closed))
        escaping += weight[state] * len(enabled - taken[state])
        enabled_total += weight[state] * len(enabled)

    fit = fit_sum / total
    prec = 1.0 - escaping / enabled_total if enabled_total else 1.0
    costs = [cost_of[tuple(e.activity for e in t.events if e.is_complete())]
             for t in log]
    return QualityReport(fitness=fit, precision=prec,
                         f_score=f_score(fit, prec), trace_costs=costs)
