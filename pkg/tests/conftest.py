"""Shared fixtures: the running-example pattern, small log builders, and
the enumeration helpers used by the oracle-equivalence tests."""

import itertools

import pytest

from loglift import (Event, EventLog, Trace, and_, leaf, loop, make_lpm,
                     parse_tree, seq, tau, xor)

N1_TEXT = "seq(xor(A,loop(B,tau)),C)"

# Running example trace; X is foreign to the pattern.
GOLDEN = list("ABXBCCABCBBXAC")

GOLDEN_GAMMAS = [["B", "B", "C"], ["B", "C"], ["A", "C"]]
GOLDEN_LAMBDAS = [["A"], ["C", "A"], ["B", "B"], []]
GOLDEN_ABSTRACTED = ["A", "H", "C", "A", "H", "B", "B", "H"]


def mk_trace(word, case_id="c1", lifecycle=None):
    return Trace(case_id=case_id,
                 events=[Event(activity=a, lifecycle=lifecycle) for a in word])


def mk_log(words):
    return EventLog(traces=[mk_trace(w, case_id=f"c{i}")
                            for i, w in enumerate(words, start=1)])


@pytest.fixture(scope="session")
def n1_lpm():
    return make_lpm(parse_tree(N1_TEXT))


def all_words(alphabet, max_len):
    """Every word up to max_len over the alphabet, shortest first."""
    out = [()]
    for length in range(1, max_len + 1):
        out.extend(itertools.product(alphabet, repeat=length))
    return out


def tree_size(t):
    return 1 + sum(tree_size(c) for c in t.children)


def enumerate_pattern_trees(budget=5, alphabet=("a", "b", "c"), max_activities=3):
    """All canonical pattern trees within the node budget.

    Leaves are the alphabet letters and tau; operators are seq/xor/and with
    two or three children and binary loop. The constructors canonicalize
    (flatten, sort commutative children, collapse single-child operators),
    so deduplication by the text form is enough.
    """
    from loglift.lpm import check_lpm_tree

    by_size = {1: [leaf(x) for x in alphabet] + [tau()]}
    seen = {str(t) for t in by_size[1]}
    trees = list(by_size[1])

    def consider(t, s, level):
        if tree_size(t) != s or str(t) in seen:
            return
        seen.add(str(t))
        level.append(t)
        trees.append(t)

    for s in range(2, budget + 1):
        level = []
        for i in range(1, s - 1):
            j = s - 1 - i
            for a in by_size.get(i, []):
                for b in by_size.get(j, []):
                    for ctor in (seq, xor, and_, loop):
                        try:
                            consider(ctor(a, b), s, level)
                        except ValueError:
                            pass
        for i in range(1, s - 2):
            for j in range(1, s - 1 - i):
                k = s - 1 - i - j
                for a in by_size.get(i, []):
                    for b in by_size.get(j, []):
                        for c in by_size.get(k, []):
                            for ctor in (seq, xor, and_):
                                try:
                                    consider(ctor(a, b, c), s, level)
                                except ValueError:
                                    pass
        by_size[s] = level

    valid = []
    for t in trees:
        try:
            check_lpm_tree(t, max_activities=max_activities)
        except ValueError:
            continue
        valid.append(t)
    return valid


def coverage_oracle(projected, language):
    """Best event coverage by non-overlapping contiguous runs from language."""
    n = len(projected)
    word = tuple(projected)
    best = [0] * (n + 1)
    for p in range(n - 1, -1, -1):
        b = best[p + 1]
        for j in range(p + 1, n + 1):
            if word[p:j] in language:
                v = (j - p) + best[j]
                if v > b:
                    b = v
        best[p] = b
    return best[0]
