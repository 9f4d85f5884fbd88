"""Labeled Petri nets with accepting (initial/final) markings.

Transitions either carry an activity label or are silent. Acceptance of a
word means: some firing sequence from the initial marking reaches exactly
the final marking and its sequence of labels (silent firings dropped)
equals the word. All searches that could diverge on unbounded nets are
guarded by a state limit and raise SearchLimitError when they hit it, so
"could not decide" is never reported as "no".

Nets are treated as immutable after construction.
"""

import heapq
from collections import deque
from dataclasses import dataclass, field

from .errors import LogliftError, SearchLimitError

DEFAULT_STATE_LIMIT = 100_000

Marking = dict[str, int]


def marking_key(marking: Marking) -> tuple[tuple[str, int], ...]:
    """Canonical hashable form of a marking; zero entries are dropped."""
    return tuple(sorted((p, c) for p, c in marking.items() if c))


@dataclass
class PetriNet:
    places: set[str]
    transitions: set[str]
    arcs: set[tuple[str, str]]
    labels: dict[str, str] = field(default_factory=dict)

    def validate(self) -> None:
        if self.places & self.transitions:
            raise ValueError(f"place/transition ids overlap: {self.places & self.transitions}")
        for src, dst in self.arcs:
            ok = (src in self.places and dst in self.transitions) or \
                 (src in self.transitions and dst in self.places)
            if not ok:
                raise ValueError(f"arc ({src!r}, {dst!r}) does not connect a place and a transition")
        for t, label in self.labels.items():
            if t not in self.transitions:
                raise ValueError(f"label on unknown transition {t!r}")
            if not label:
                raise ValueError(f"empty label on transition {t!r}")

    def label_of(self, transition: str) -> str | None:
        """Activity label, or None for a silent transition."""
        return self.labels.get(transition)

    def preset(self, node: str) -> set[str]:
        return {src for src, dst in self.arcs if dst == node}

    def postset(self, node: str) -> set[str]:
        return {dst for src, dst in self.arcs if src == node}


@dataclass
class AcceptingPetriNet:
    net: PetriNet
    initial: Marking
    final: Marking

    def validate(self) -> None:
        self.net.validate()
        for name, marking in (("initial", self.initial), ("final", self.final)):
            for p, c in marking.items():
                if p not in self.net.places:
                    raise ValueError(f"{name} marking on unknown place {p!r}")
                if c < 0:
                    raise ValueError(f"{name} marking has negative count on {p!r}")

    def alphabet(self) -> set[str]:
        return set(self.net.labels.values())


# ------------------------------------------------------- firing (dict API)

def enabled(net: PetriNet, marking: Marking) -> set[str]:
    """Transitions whose every input place carries a token."""
    out = set()
    for t in net.transitions:
        if all(marking.get(p, 0) >= 1 for p in net.preset(t)):
            out.add(t)
    return out


def fire(net: PetriNet, marking: Marking, transition: str) -> Marking:
    """Fire one transition; raises ValueError if it is not enabled."""
    if transition not in net.transitions:
        raise ValueError(f"unknown transition {transition!r}")
    pre = net.preset(transition)
    if not all(marking.get(p, 0) >= 1 for p in pre):
        raise ValueError(f"transition {transition!r} is not enabled")
    out = dict(marking)
    for p in pre:
        out[p] -= 1
        if out[p] == 0:
            del out[p]
    for p in net.postset(transition):
        out[p] = out.get(p, 0) + 1
    return out


# -------------------------------------------------------- dense replay core

class Replay:
    """Index-based firing engine for one accepting net.

    Markings are dense count tuples interned to small integers; sets of
    markings (used when replaying a word against all its possible runs at
    once) are interned frozensets of those integers. The per-net caches
    make repeated replays over the same net cheap.
    """

    def __init__(self, apn: AcceptingPetriNet, state_limit: int = DEFAULT_STATE_LIMIT):
        net = apn.net
        self.apn = apn
        self.state_limit = state_limit
        self.places = sorted(net.places)
        self._pidx = {p: i for i, p in enumerate(self.places)}
        self.transitions = sorted(net.transitions)
        self._tidx = {t: i for i, t in enumerate(self.transitions)}
        n = len(self.transitions)
        self.pre = [[] for _ in range(n)]
        self.post = [[] for _ in range(n)]
        for src, dst in net.arcs:
            if src in self._pidx:
                self.pre[self._tidx[dst]].append(self._pidx[src])
            else:
                self.post[self._tidx[src]].append(self._pidx[dst])
        self.labels = [net.labels.get(t) for t in self.transitions]
        self.tau_ts = [t for t in range(n) if self.labels[t] is None]
        self.by_label: dict[str, list[int]] = {}
        for t in range(n):
            if self.labels[t] is not None:
                self.by_label.setdefault(self.labels[t], []).append(t)

        self.initial = self._dense(apn.initial)
        self.final = self._dense(apn.final)

        # interning tables
        self._mark_ids: dict[tuple[int, ...], int] = {}
        self._marks: list[tuple[int, ...]] = []
        self._closure: dict[int, frozenset[int]] = {}
        self._set_ids: dict[frozenset[int], int] = {}
        self._sets: list[frozenset[int]] = []
        self._set_accepting: list[bool] = []
        self._set_step: dict[tuple[int, str], int] = {}
        self._enabled_vis: dict[int, tuple[str, ...]] = {}
        self._enabled: dict[int, list[int]] = {}

        self.initial_id = self.intern(self.initial)
        self.final_id = self.intern(self.final)
        self.empty_set_id = self._intern_set(frozenset())
        self.start_set_id = self._intern_set(self.closure_of(self.initial_id))

    # -- markings

    def _dense(self, marking: Marking) -> tuple[int, ...]:
        counts = [0] * len(self.places)
        for p, c in marking.items():
            counts[self._pidx[p]] = c
        return tuple(counts)

    def to_marking(self, mid: int) -> Marking:
        return {self.places[i]: c for i, c in enumerate(self._marks[mid]) if c}

    def intern(self, dense: tuple[int, ...]) -> int:
        mid = self._mark_ids.get(dense)
        if mid is None:
            if len(self._marks) >= self.state_limit:
                raise SearchLimitError(
                    f"state limit {self.state_limit} exceeded while exploring markings")
            mid = len(self._marks)
            self._mark_ids[dense] = mid
            self._marks.append(dense)
        return mid

    def enabled_ts(self, mid: int) -> list[int]:
        cached = self._enabled.get(mid)
        if cached is None:
            m = self._marks[mid]
            cached = [t for t in range(len(self.transitions))
                      if all(m[p] >= 1 for p in self.pre[t])]
            self._enabled[mid] = cached
        return cached

    def fire_t(self, mid: int, t: int) -> int:
        m = list(self._marks[mid])
        for p in self.pre[t]:
            m[p] -= 1
        for p in self.post[t]:
            m[p] += 1
        return self.intern(tuple(m))

    def closure_of(self, mid: int) -> frozenset[int]:
        """All markings reachable from mid by silent firings (mid included)."""
        cached = self._closure.get(mid)
        if cached is not None:
            return cached
        seen = {mid}
        queue = deque([mid])
        while queue:
            cur = queue.popleft()
            m = self._marks[cur]
            for t in self.tau_ts:
                if all(m[p] >= 1 for p in self.pre[t]):
                    nxt = self.fire_t(cur, t)
                    if nxt not in seen:
                        seen.add(nxt)
                        queue.append(nxt)
        result = frozenset(seen)
        self._closure[mid] = result
        return result

    # -- marking sets (subset construction over visible steps)

    def _intern_set(self, mset: frozenset[int]) -> int:
        sid = self._set_ids.get(mset)
        if sid is None:
            sid = len(self._sets)
            self._set_ids[mset] = sid
            self._sets.append(mset)
            self._set_accepting.append(self.final_id in mset)
        return sid

    def step(self, sid: int, activity: str) -> int:
        """Advance a closed marking set by one visible event; empty set = dead."""
        key = (sid, activity)
        cached = self._set_step.get(key)
        if cached is not None:
            return cached
        nxt: set[int] = set()
        ts = self.by_label.get(activity, ())
        for mid in self._sets[sid]:
            m = self._marks[mid]
            for t in ts:
                if all(m[p] >= 1 for p in self.pre[t]):
                    nxt.update(self.closure_of(self.fire_t(mid, t)))
        out = self._intern_set(frozenset(nxt))
        self._set_step[key] = out
        return out

    def accepting(self, sid: int) -> bool:
        return self._set_accepting[sid]

    def replay_word(self, word) -> bool:
        sid = self.start_set_id
        for a in word:
            sid = self.step(sid, a)
            if sid == self.empty_set_id:
                return False
        return self._set_accepting[sid]

    def enabled_visible_labels(self, mid: int) -> tuple[str, ...]:
        cached = self._enabled_vis.get(mid)
        if cached is None:
            m = self._marks[mid]
            labels = {self.labels[t] for t in range(len(self.transitions))
                      if self.labels[t] is not None and all(m[p] >= 1 for p in self.pre[t])}
            cached = tuple(sorted(labels))
            self._enabled_vis[mid] = cached
        return cached


# ------------------------------------------------------------- acceptance

def accepts(apn: AcceptingPetriNet, word, step_bound: int | None = None,
            state_limit: int = DEFAULT_STATE_LIMIT) -> bool:
    """Decide whether the net accepts the word.

    With a step_bound, only firing sequences of at most that many
    transitions (silent ones included) are considered; the bound must not
    be smaller than the word. Without one, the search is exhaustive over
    the reachable state space, guarded by state_limit.
    """
    word = list(word)
    if step_bound is not None and step_bound < len(word):
        raise ValueError(f"step_bound {step_bound} smaller than word length {len(word)}")
    rp = Replay(apn, state_limit=state_limit)
    target = (rp.final_id, len(word))
    start = (rp.initial_id, 0)
    if start == target:
        return True
    seen = {start}
    frontier = [start]
    steps = 0
    while frontier:
        steps += 1
        if step_bound is not None and steps > step_bound:
            return False
        nxt = []
        for mid, pos in frontier:
            for t in rp.enabled_ts(mid):
                label = rp.labels[t]
                if label is None:
                    new = (rp.fire_t(mid, t), pos)
                elif pos < len(word) and label == word[pos]:
                    new = (rp.fire_t(mid, t), pos + 1)
                else:
                    continue
                if new == target:
                    return True
                if new not in seen:
                    if len(seen) >= state_limit:
                        raise SearchLimitError(
                            f"state limit {state_limit} exceeded while deciding acceptance")
                    seen.add(new)
                    nxt.append(new)
        frontier = nxt
    return False


def language_upto(apn: AcceptingPetriNet, max_visible_len: int,
                  state_limit: int = DEFAULT_STATE_LIMIT) -> set[tuple[str, ...]]:
    """All accepted words of at most the given visible length.

    Test oracle and analysis helper; enumeration is breadth-first over
    (marking, word) pairs with the same state-limit guard as accepts().
    """
    rp = Replay(apn, state_limit=state_limit)
    seen: set[tuple[int, tuple[str, ...]]] = set()
    out: set[tuple[str, ...]] = set()
    start = (rp.initial_id, ())
    queue = deque([start])
    seen.add(start)
    while queue:
        mid, word = queue.popleft()
        if mid == rp.final_id:
            out.add(word)
        for t in rp.enabled_ts(mid):
            label = rp.labels[t]
            if label is None:
                new = (rp.fire_t(mid, t), word)
            elif len(word) < max_visible_len:
                new = (rp.fire_t(mid, t), word + (label,))
            else:
                continue
            if new not in seen:
                if len(seen) >= state_limit:
                    raise SearchLimitError(
                        f"state limit {state_limit} exceeded while enumerating the language")
                seen.add(new)
                queue.append(new)
    return out


def min_visible_run_length(apn: AcceptingPetriNet,
                           state_limit: int = DEFAULT_STATE_LIMIT) -> int:
    """Length of the shortest accepted word (silent firings are free)."""
    rp = Replay(apn, state_limit=state_limit)
    dist = {rp.initial_id: 0}
    heap = [(0, rp.initial_id)]
    while heap:
        d, mid = heapq.heappop(heap)
        if mid == rp.final_id:
            return d
        if d > dist.get(mid, float("inf")):
            continue
        for t in rp.enabled_ts(mid):
            cost = 0 if rp.labels[t] is None else 1
            nxt = rp.fire_t(mid, t)
            nd = d + cost
            if nd < dist.get(nxt, float("inf")):
                dist[nxt] = nd
                heapq.heappush(heap, (nd, nxt))
    raise LogliftError("final marking is not reachable from the initial marking")
