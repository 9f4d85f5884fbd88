"""Local process models: small behavioral patterns discovered from a log.

A local process model (LPM) is a process tree over at most a handful of
activities, together with its Petri net form and a support value: the
number of events covered when each trace is projected onto the model's
activities and split into accepted runs (gamma segments) and leftover
noise (lambda segments), maximizing the covered events.

Trees use operators seq, xor, and, loop(body, redo); loop means body once,
then zero or more redo-body rounds. xor/and children are kept sorted and
nested same-operator children are flattened, so equal-language duplicates
produced during search collapse to one canonical form.
"""

from collections import Counter
from dataclasses import dataclass, field

from .errors import LogliftError
from .eventlog import EventLog, Trace
from .petrinet import (DEFAULT_STATE_LIMIT, AcceptingPetriNet, PetriNet,
                       Replay)

SEQ, XOR, AND, LOOP = "seq", "xor", "and", "loop"
_OP_RANK = {SEQ: "0", XOR: "1", AND: "2", LOOP: "3"}


@dataclass(frozen=True)
class ProcessTree:
    op: str | None = None
    label: str | None = None
    children: tuple["ProcessTree", ...] = ()

    def is_leaf(self) -> bool:
        return self.op is None

    def is_silent(self) -> bool:
        return self.op is None and self.label is None

    def activities(self) -> frozenset[str]:
        if self.op is None:
            return frozenset() if self.label is None else frozenset([self.label])
        return frozenset().union(*(c.activities() for c in self.children))

    def node_count(self) -> int:
        return 1 + sum(c.node_count() for c in self.children)

    def sort_key(self) -> str:
        """Canonical serialization used for ordering and deduplication.

        Operators are coded by their rank digit (seq < xor < and < loop) so
        ties between equal-support models resolve in that operator order.
        """
        if self.op is None:
            return "~" if self.label is None else self.label
        return _OP_RANK[self.op] + "(" + ",".join(c.sort_key() for c in self.children) + ")"

    def to_text(self) -> str:
        """Readable form, parseable back with parse_tree."""
        if self.op is None:
            if self.label is None:
                return "tau"
            return _quote(self.label)
        return self.op + "(" + ",".join(c.to_text() for c in self.children) + ")"

    def __str__(self) -> str:
        return self.to_text()


def leaf(label: str) -> ProcessTree:
    if not label:
        raise ValueError("activity leaf needs a non-empty label")
    return ProcessTree(label=label)


def tau() -> ProcessTree:
    return ProcessTree()


def _operator(op: str, children, commutative: bool) -> ProcessTree:
    flat: list[ProcessTree] = []
    for c in children:
        if c.op == op and op != LOOP:
            flat.extend(c.children)
        else:
            flat.append(c)
    if not flat:
        raise ValueError(f"{op} needs at least one child")
    if len(flat) == 1:
        return flat[0]
    if commutative:
        flat.sort(key=ProcessTree.sort_key)
    return ProcessTree(op=op, children=tuple(flat))


def seq(*children: ProcessTree) -> ProcessTree:
    return _operator(SEQ, children, commutative=False)


def xor(*children: ProcessTree) -> ProcessTree:
    return _operator(XOR, children, commutative=True)


def and_(*children: ProcessTree) -> ProcessTree:
    return _operator(AND, children, commutative=True)


def loop(body: ProcessTree, redo: ProcessTree) -> ProcessTree:
    return ProcessTree(op=LOOP, children=(body, redo))


_BARE = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_:+-.")


def _quote(label: str) -> str:
    if label and set(label) <= _BARE and label not in ("tau", "seq", "xor", "and", "loop"):
        return label
    return "'" + label.replace("'", "''") + "'"


def parse_tree(text: str) -> ProcessTree:
    """Parse a tree expression like "seq(a, xor(b, 'odd name'), tau)"."""
    pos = 0

    def skip_ws():
        nonlocal pos
        while pos < len(text) and text[pos].isspace():
            pos += 1

    def parse_node() -> ProcessTree:
        nonlocal pos
        skip_ws()
        if pos >= len(text):
            raise ValueError(f"unexpected end of tree expression: {text!r}")
        if text[pos] == "'":
            pos += 1
            out = []
            while True:
                if pos >= len(text):
                    raise ValueError(f"unterminated quote in tree expression: {text!r}")
                if text[pos] == "'":
                    if pos + 1 < len(text) and text[pos + 1] == "'":
                        out.append("'")
                        pos += 2
                        continue
                    pos += 1
                    break
                out.append(text[pos])
                pos += 1
            return leaf("".join(out))
        start = pos
        while pos < len(text) and text[pos] in _BARE:
            pos += 1
        word = text[start:pos]
        if not word:
            raise ValueError(f"unexpected character {text[pos]!r} at {pos} in {text!r}")
        skip_ws()
        if word in (SEQ, XOR, AND, LOOP) and pos < len(text) and text[pos] == "(":
            pos += 1
            children = [parse_node()]
            skip_ws()
            while pos < len(text) and text[pos] == ",":
                pos += 1
                children.append(parse_node())
                skip_ws()
            if pos >= len(text) or text[pos] != ")":
                raise ValueError(f"expected ')' at {pos} in {text!r}")
            pos += 1
            if word == LOOP:
                if len(children) != 2:
                    raise ValueError("loop takes exactly (body, redo)")
                return loop(*children)
            return _operator(word, children, commutative=word in (XOR, AND))
        if word == "tau":
            return tau()
        return leaf(word)

    node = parse_node()
    skip_ws()
    if pos != len(text):
        raise ValueError(f"trailing input at {pos} in {text!r}")
    return node


def check_lpm_tree(tree: ProcessTree, max_activities: int = 5) -> None:
    """Validate the structural limits for a pattern tree."""
    labels = [t.label for t in _walk_leaves(tree) if t.label is not None]
    if len(labels) != len(set(labels)):
        raise ValueError(f"duplicate activity leaves in {tree}")
    if not labels:
        raise ValueError(f"pattern tree {tree} has no activity leaves")
    if len(labels) > max_activities:
        raise ValueError(f"{tree} exceeds {max_activities} activities")


def _walk_leaves(tree: ProcessTree):
    if tree.op is None:
        yield tree
    else:
        for c in tree.children:
            yield from _walk_leaves(c)


# ----------------------------------------------------------- tree to net

def tree_to_net(tree: ProcessTree) -> AcceptingPetriNet:
    """Compile a process tree into an accepting workflow net.

    One source and one sink place, a single token each in the initial and
    final marking. Loops get a private entry place so a redo cannot leak
    the token back into a sibling branch.
    """
    places: set[str] = set()
    transitions: set[str] = set()
    arcs: set[tuple[str, str]] = set()
    labels: dict[str, str] = {}
    counter = [0]

    def new_place() -> str:
        counter[0] += 1
        p = f"p{counter[0]}"
        places.add(p)
        return p

    def new_transition(label: str | None) -> str:
        counter[0] += 1
        t = f"t{counter[0]}" if label is not None else f"tau{counter[0]}"
        transitions.add(t)
        if label is not None:
            labels[t] = label
        return t

    def build(node: ProcessTree, pin: str, pout: str) -> None:
        if node.op is None:
            t = new_transition(node.label)
            arcs.add((pin, t))
            arcs.add((t, pout))
        elif node.op == SEQ:
            cur = pin
            for child in node.children[:-1]:
                mid = new_place()
                build(child, cur, mid)
                cur = mid
            build(node.children[-1], cur, pout)
        elif node.op == XOR:
            for child in node.children:
                build(child, pin, pout)
        elif node.op == AND:
            split = new_transition(None)
            join = new_transition(None)
            arcs.add((pin, split))
            arcs.add((join, pout))
            for child in node.children:
                entry = new_place()
                exit_ = new_place()
                arcs.add((split, entry))
                arcs.add((exit_, join))
                build(child, entry, exit_)
        elif node.op == LOOP:
            body, redo = node.children
            enter = new_transition(None)
            start = new_place()
            mid = new_place()
            leave = new_transition(None)
            arcs.add((pin, enter))
            arcs.add((enter, start))
            arcs.add((mid, leave))
            arcs.add((leave, pout))
            build(body, start, mid)
            build(redo, mid, start)
        else:
            raise ValueError(f"unknown operator {node.op!r}")

    source = new_place()
    sink = new_place()
    build(tree, source, sink)
    apn = AcceptingPetriNet(net=PetriNet(places=places, transitions=transitions,
                                         arcs=arcs, labels=labels),
                            initial={source: 1}, final={sink: 1})
    apn.validate()
    return apn


# ------------------------------------------------------------ the model

@dataclass
class LocalProcessModel:
    net: AcceptingPetriNet
    tree: ProcessTree | None = None
    support: int = 0
    rank: int | None = None

    @property
    def activities(self) -> frozenset[str]:
        return frozenset(self.net.alphabet())

    @property
    def key(self) -> str:
        """Stable identity used for ordering ties and caching."""
        if self.tree is not None:
            return self.tree.sort_key()
        return "|".join(sorted(self.net.net.labels.values()))

    def __str__(self) -> str:
        body = self.tree.to_text() if self.tree is not None else self.key
        return f"LPM(rank={self.rank}, support={self.support}, {body})"


def make_lpm(tree: ProcessTree, support: int = 0, rank: int | None = None,
             max_activities: int = 5) -> LocalProcessModel:
    check_lpm_tree(tree, max_activities=max_activities)
    return LocalProcessModel(net=tree_to_net(tree), tree=tree, support=support, rank=rank)


@dataclass
class LpmRanking:
    models: list[LocalProcessModel] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.models)

    def __iter__(self):
        return iter(self.models)

    def __getitem__(self, i):
        return self.models[i]


# ---------------------------------------------------------- segmentation

@dataclass
class Segmentation:
    """A split of a projected trace into accepted runs and leftovers.

    gammas are [start, end) ranges into the projected trace, in order and
    non-overlapping; every gamma is a word accepted by the model. The
    lambda segments are the gaps (first and last may be empty).
    """
    projected: list[str]
    gammas: list[tuple[int, int]]

    @property
    def lambdas(self) -> list[tuple[int, int]]:
        bounds = [0]
        for s, e in self.gammas:
            bounds.extend((s, e))
        bounds.append(len(self.projected))
        return [(bounds[i], bounds[i + 1]) for i in range(0, len(bounds), 2)]

    @property
    def gamma_events(self) -> list[str]:
        return [a for s, e in self.gammas for a in self.projected[s:e]]

    def gamma_words(self) -> list[list[str]]:
        return [self.projected[s:e] for s, e in self.gammas]

    def lambda_words(self) -> list[list[str]]:
        return [self.projected[s:e] for s, e in self.lambdas]

    def coverage(self) -> int:
        return sum(e - s for s, e in self.gammas)


def _complete_activities(trace) -> list[str]:
    if isinstance(trace, Trace):
        return [e.activity for e in trace.events if e.is_complete()]
    return list(trace)


def _accepted_ends(projected: list[str], rp: Replay) -> list[list[int]]:
    """ends[i] = all j with projected[i:j] accepted, ascending; empty runs excluded."""
    m = len(projected)
    ends: list[list[int]] = []
    start_sid = rp.start_set_id
    dead = rp.empty_set_id
    step = rp.step
    accepting = rp._set_accepting
    for i in range(m):
        out = []
        sid = start_sid
        for j in range(i, m):
            sid = step(sid, projected[j])
            if sid == dead:
                break
            if accepting[sid]:
                out.append(j + 1)
        ends.append(out)
    return ends


def _coverage_dp(ends: list[list[int]], m: int) -> list[int]:
    """best[p] = max events coverable by accepted runs within projected[p:]."""
    best = [0] * (m + 1)
    for p in range(m - 1, -1, -1):
        b = best[p + 1]
        for j in ends[p]:
            v = (j - p) + best[j]
            if v > b:
                b = v
        best[p] = b
    return best


def _best_coverage(projected: list[str], rp: Replay) -> list[int]:
    return _coverage_dp(_accepted_ends(projected, rp), len(projected))


def segment(trace, lpm: LocalProcessModel, state_limit: int = DEFAULT_STATE_LIMIT,
            replay: Replay | None = None) -> Segmentation:
    """Split a trace (projected onto the model's activities) into accepted
    runs and leftover segments, maximizing the events inside accepted runs.

    Among maximal splits, runs start as early as possible (a run is always
    preferred over skipping at the same position, shortest first).
    """
    rp = replay if replay is not None else Replay(lpm.net, state_limit=state_limit)
    acts = lpm.activities
    projected = [a for a in _complete_activities(trace) if a in acts]
    m = len(projected)
    ends = _accepted_ends(projected, rp)
    best = _coverage_dp(ends, m)
    gammas: list[tuple[int, int]] = []
    p = 0
    while p < m:
        taken = None
        for j in ends[p]:
            if (j - p) + best[j] == best[p]:
                taken = j
                break
        if taken is None:
            p += 1
        else:
            gammas.append((p, taken))
            p = taken
    return Segmentation(projected=projected, gammas=gammas)


def support(log: EventLog, lpm: LocalProcessModel,
            state_limit: int = DEFAULT_STATE_LIMIT) -> int:
    """Total events covered by accepted runs, summed over the whole log."""
    rp = Replay(lpm.net, state_limit=state_limit)
    acts = lpm.activities
    projections = Counter()
    for trace in log:
        projections[tuple(a for a in _complete_activities(trace) if a in acts)] += 1
    total = 0
    for projected, count in projections.items():
        total += _best_coverage(list(projected), rp)[0] * count
    return total


# -------------------------------------------------------------- discovery

def discover_lpms(log: EventLog, max_activities: int = 4, beam_width: int = 50,
                  min_support: int = 1, max_results: int = 20,
                  state_limit: int = DEFAULT_STATE_LIMIT) -> LpmRanking:
    """Beam search over pattern trees, ranked by support.

    Seeds are single-activity leaves for every activity occurring at least
    min_support times. Each round keeps the beam_width best trees of the
    current size and grows each by replacing one activity leaf x with
    op(x, y) or op(y, x) for op in {seq, xor, and, loop} and every eligible
    activity y not yet in the tree. All evaluated candidates compete for
    the final ranking; ties by support break toward fewer activities, then
    fewer nodes, then the canonical serialization.
    """
    if not isinstance(log, EventLog) or len(log) == 0:
        raise LogliftError("LPM discovery needs a non-empty event log")
    freqs: Counter[str] = Counter()
    traces_acts: list[list[str]] = []
    for trace in log:
        acts = _complete_activities(trace)
        traces_acts.append(acts)
        freqs.update(acts)
    eligible = sorted(a for a, n in freqs.items() if n >= min_support)
    if not eligible:
        raise LogliftError(f"no activity reaches min_support={min_support}")

    def evaluate(tree: ProcessTree) -> int:
        acts = tree.activities()
        rp = Replay(tree_to_net(tree), state_limit=state_limit)
        projections = Counter()
        for acts_list in traces_acts:
            projections[tuple(a for a in acts_list if a in acts)] += 1
        total = 0
        for projected, count in projections.items():
            total += _best_coverage(list(projected), rp)[0] * count
        return total

    pool: dict[str, tuple[ProcessTree, int]] = {}
    current: list[tuple[ProcessTree, int]] = []
    for a in eligible:
        t = leaf(a)
        s = freqs[a]
        pool[t.sort_key()] = (t, s)
        current.append((t, s))

    def order_key(entry: tuple[ProcessTree, int]):
        tree, s = entry
        return (-s, len(tree.activities()), tree.node_count(), tree.sort_key())

    for _size in range(2, max_activities + 1):
        current.sort(key=order_key)
        beam = current[:beam_width]
        nxt: list[tuple[ProcessTree, int]] = []
        for tree, _s in beam:
            have = tree.activities()
            for x in sorted(have):
                for y in eligible:
                    if y in have:
                        continue
                    for variant in (seq(leaf(x), leaf(y)), seq(leaf(y), leaf(x)),
                                    xor(leaf(x), leaf(y)), and_(leaf(x), leaf(y)),
                                    loop(leaf(x), leaf(y)), loop(leaf(y), leaf(x))):
                        candidate = _replace_leaf(tree, x, variant)
                        key = candidate.sort_key()
                        if key in pool:
                            continue
                        s = evaluate(candidate)
                        pool[key] = (candidate, s)
                        nxt.append((candidate, s))
        if not nxt:
            break
        current = nxt

    ranked = sorted(pool.values(), key=order_key)[:max_results]
    models = [LocalProcessModel(net=tree_to_net(t), tree=t, support=s, rank=i + 1)
              for i, (t, s) in enumerate(ranked)]
    return LpmRanking(models=models)


def _replace_leaf(tree: ProcessTree, label: str, replacement: ProcessTree) -> ProcessTree:
    if tree.op is None:
        return replacement if tree.label == label else tree
    children = tuple(_replace_leaf(c, label, replacement) for c in tree.children)
    if tree.op == LOOP:
        return ProcessTree(op=LOOP, children=children)
    return _operator(tree.op, children, commutative=tree.op in (XOR, AND))


# -------------------------------------------------------------- diversity

def jaccard(a: frozenset, b: frozenset) -> float:
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)


def diversity(ranking: LpmRanking, i: int) -> float:
    """Diversity of the i-th model (1-based) against all earlier models."""
    if i < 1 or i > len(ranking):
        raise IndexError(f"rank {i} out of range 1..{len(ranking)}")
    if i == 1:
        return 1.0
    acts = ranking[i - 1].activities
    return 1.0 - max(jaccard(acts, ranking[j].activities) for j in range(i - 1))


def filter_diverse(ranking: LpmRanking, t_div: float, k: int | None = None,
                   order: str = "topk_then_filter") -> list[LocalProcessModel]:
    """Keep models whose activity sets differ enough from those already kept.

    A model is dropped when 1 - max Jaccard similarity against the *kept*
    predecessors is <= t_div; the first model always stays. With
    topk_then_filter the ranking is cut to k first; with filter_then_topk
    the whole ranking is filtered and the first k survivors returned.
    """
    if not 0.0 <= t_div <= 1.0:
        raise ValueError(f"t_div must be in [0, 1], got {t_div}")
    if order not in ("topk_then_filter", "filter_then_topk"):
        raise ValueError(f"unknown filter order {order!r}")
    if k is not None and k < 1:
        raise ValueError(f"k must be >= 1, got {k}")

    candidates = list(ranking)
    if order == "topk_then_filter" and k is not None:
        candidates = candidates[:k]
    kept: list[LocalProcessModel] = []
    for model in candidates:
        if not kept:
            kept.append(model)
            continue
        div = 1.0 - max(jaccard(model.activities, m.activities) for m in kept)
        if div > t_div:
            kept.append(model)
    if order == "filter_then_topk" and k is not None:
        kept = kept[:k]
    return kept


# ------------------------------------------------------------ persistence

INDEX_FILE = "index.tsv"


def save_ranking(ranking: LpmRanking, dirpath: str) -> None:
    """Write one PNML per model plus an index.tsv with the ranking metadata."""
    import os

    from .pnml import save_pnml
    os.makedirs(dirpath, exist_ok=True)
    lines = ["rank\tsupport\tdiversity\tactivities\ttree\tfile"]
    for i, model in enumerate(ranking, start=1):
        fname = f"lpm_{i}.pnml"
        save_pnml(model.net, os.path.join(dirpath, fname))
        div = diversity(ranking, i)
        tree_text = model.tree.to_text() if model.tree is not None else "-"
        acts = ",".join(sorted(model.activities))
        lines.append(f"{i}\t{model.support}\t{div:.6f}\t{acts}\t{tree_text}\t{fname}")
    with open(os.path.join(dirpath, INDEX_FILE), "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_ranking(dirpath: str) -> LpmRanking:
    import os

    from .pnml import parse_pnml
    index_path = os.path.join(dirpath, INDEX_FILE)
    if not os.path.exists(index_path):
        raise LogliftError(f"no {INDEX_FILE} in {dirpath}")
    models: list[LocalProcessModel] = []
    with open(index_path, "r", encoding="utf-8") as fh:
        rows = fh.read().splitlines()
    for row in rows[1:]:
        if not row.strip():
            continue
        parts = row.split("\t")
        if len(parts) != 6:
            raise LogliftError(f"bad index line in {index_path}: {row!r}")
        rank_s, support_s, _div, _acts, tree_text, fname = parts
        if tree_text != "-":
            tree = parse_tree(tree_text)
            net = tree_to_net(tree)
        else:
            tree = None
            net = parse_pnml(os.path.join(dirpath, fname))
        models.append(LocalProcessModel(net=net, tree=tree,
                                        support=int(support_s), rank=int(rank_s)))
    return LpmRanking(models=models)
