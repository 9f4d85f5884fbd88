"""Process trees, pattern nets, segmentation, LPM mining and filtering."""

import random

import pytest

from loglift import (LocalProcessModel, LogliftError, LpmRanking, and_,
                     discover_lpms, diversity, filter_diverse, jaccard,
                     language_upto, leaf, load_ranking, loop, make_lpm,
                     parse_tree, save_ranking, segment, seq, support, tau,
                     tree_to_net, xor)
from loglift.lpm import check_lpm_tree
from conftest import (GOLDEN, GOLDEN_GAMMAS, GOLDEN_LAMBDAS, N1_TEXT, mk_log,
                      mk_trace)


# ----------------------------------------------------------------- trees

def test_tree_text_round_trip():
    for text in ("a", "tau", "seq(a,b)", "xor(a,tau)", "loop(b,tau)",
                 "seq(xor(loop(B,tau),A),C)", "seq(and(a,b),c)",
                 "loop(seq(a,b),xor(c,tau))"):
        assert str(parse_tree(text)) == text
    # non-canonical spellings parse to the same tree as their canonical form
    assert parse_tree(N1_TEXT) == parse_tree("seq(xor(loop(B,tau),A),C)")


def test_constructors_canonicalize():
    assert str(seq(seq(leaf("a"), leaf("b")), leaf("c"))) == "seq(a,b,c)"
    assert str(xor(leaf("b"), leaf("a"))) == str(xor(leaf("a"), leaf("b")))
    assert str(and_(leaf("b"), leaf("a"))) == "and(a,b)"
    # single-child operators collapse
    assert str(seq(leaf("a"))) == "a"


def test_parse_tree_quoted_labels():
    t = parse_tree("seq('odd name',b)")
    assert t.children[0].label == "odd name"
    assert str(parse_tree(str(t))) == str(t)


def test_parse_tree_errors():
    for bad in ("", "seq(", "seq(a,)", "loop(a)", "loop(a,b,c)", "a b", "(a)"):
        with pytest.raises(ValueError):
            parse_tree(bad)


def test_check_lpm_tree_limits():
    with pytest.raises(ValueError):
        check_lpm_tree(parse_tree("seq(a,a)"))
    with pytest.raises(ValueError):
        check_lpm_tree(parse_tree("tau"))
    with pytest.raises(ValueError):
        check_lpm_tree(parse_tree("seq(a,b,c)"), max_activities=2)
    check_lpm_tree(parse_tree("seq(a,b,c)"), max_activities=3)


def test_tree_to_net_languages():
    cases = {
        "seq(a,b)": {("a", "b")},
        "xor(a,b)": {("a",), ("b",)},
        "and(a,b)": {("a", "b"), ("b", "a")},
        "xor(a,tau)": {(), ("a",)},
        "loop(a,b)": {("a",), ("a", "b", "a"), ("a", "b", "a", "b", "a")},
        N1_TEXT: {("A", "C"), ("B", "C"), ("B", "B", "C"),
                  ("B", "B", "B", "C"), ("B", "B", "B", "B", "C")},
    }
    for text, expected in cases.items():
        apn = tree_to_net(parse_tree(text))
        assert language_upto(apn, 5) == expected, text


def test_tree_to_net_is_a_workflow_net():
    apn = tree_to_net(parse_tree(N1_TEXT))
    apn.validate()
    assert sum(apn.initial.values()) == 1
    assert sum(apn.final.values()) == 1


# ----------------------------------------------------------- segmentation

def test_segment_golden(n1_lpm):
    s = segment(GOLDEN, n1_lpm)
    assert s.projected == [a for a in GOLDEN if a != "X"]
    assert s.gamma_words() == GOLDEN_GAMMAS
    assert s.lambda_words() == GOLDEN_LAMBDAS
    assert s.gamma_events == [a for g in GOLDEN_GAMMAS for a in g]
    assert s.coverage() == 7


def test_segment_accepts_trace_objects(n1_lpm):
    s = segment(mk_trace(GOLDEN), n1_lpm)
    assert s.gamma_words() == GOLDEN_GAMMAS


def test_segment_empty_and_foreign_only(n1_lpm):
    assert segment([], n1_lpm).gammas == []
    s = segment(list("XYZ"), n1_lpm)
    assert s.projected == []
    assert s.gammas == []


def test_segment_prefers_early_runs():
    lpm = make_lpm(parse_tree("seq(a,b)"))
    s = segment(list("abab"), lpm)
    assert s.gammas == [(0, 2), (2, 4)]


def test_segment_gammas_are_accepted_and_disjoint(n1_lpm):
    rng = random.Random(5)
    lang = language_upto(n1_lpm.net, 8)
    for _ in range(200):
        word = [rng.choice("ABCX") for _ in range(rng.randrange(0, 10))]
        s = segment(word, n1_lpm)
        prev_end = 0
        for start, end in s.gammas:
            assert prev_end <= start < end
            prev_end = end
            assert tuple(s.projected[start:end]) in lang


def test_support_counts_covered_events(n1_lpm):
    log = mk_log([GOLDEN, "AC", "XY"])
    assert support(log, n1_lpm) == 7 + 2 + 0


# ------------------------------------------------------------- discovery

def test_discover_lpms_finds_planted_pattern():
    log = mk_log(["abcx", "xabc", "abyc", "abc"] * 5)
    ranking = discover_lpms(log, max_activities=3, beam_width=20,
                            max_results=10)
    assert len(ranking) >= 1
    assert ranking[0].rank == 1
    trees = [str(m.tree) for m in ranking]
    assert "seq(a,b,c)" in trees[:3]
    supports = [m.support for m in ranking]
    assert supports == sorted(supports, reverse=True)


def test_discover_lpms_respects_min_support():
    log = mk_log(["ab"] * 3 + ["cd"])
    ranking = discover_lpms(log, max_activities=2, beam_width=10,
                            max_results=10, min_support=3)
    # c and d occur once each, below the threshold, so no model uses them
    assert len(ranking) > 0
    for model in ranking:
        assert model.tree.activities() <= {"a", "b"}
    with pytest.raises(LogliftError, match="min_support=5"):
        discover_lpms(log, max_activities=2, min_support=5)


def test_discover_lpms_empty_log():
    with pytest.raises(LogliftError, match="non-empty"):
        discover_lpms(mk_log([]), max_activities=3)


# ------------------------------------------------------ diversity filter

def _lpm_with_acts(acts, support_value=0, rank=None):
    children = [leaf(a) for a in sorted(acts)]
    tree = children[0] if len(children) == 1 else seq(*children)
    return make_lpm(tree, support=support_value, rank=rank)


def test_jaccard_basics():
    assert jaccard(frozenset("ab"), frozenset("ab")) == 1.0
    assert jaccard(frozenset("ab"), frozenset("cd")) == 0.0
    assert jaccard(frozenset(), frozenset()) == 1.0
    assert jaccard(frozenset("ab"), frozenset("bc")) == pytest.approx(1 / 3)


def test_diversity_against_earlier_models():
    ranking = LpmRanking(models=[_lpm_with_acts("ab"), _lpm_with_acts("bc"),
                                 _lpm_with_acts("ab")])
    assert diversity(ranking, 1) == 1.0
    assert diversity(ranking, 2) == pytest.approx(2 / 3)
    assert diversity(ranking, 3) == 0.0
    with pytest.raises(IndexError):
        diversity(ranking, 4)


def test_filter_diverse_drops_duplicates():
    ranking = LpmRanking(models=[_lpm_with_acts("ab"), _lpm_with_acts("ab"),
                                 _lpm_with_acts("cd")])
    kept = filter_diverse(ranking, 0.0)
    assert [sorted(m.activities) for m in kept] == [["a", "b"], ["c", "d"]]


def test_filter_diverse_orders():
    ranking = LpmRanking(models=[_lpm_with_acts("ab"), _lpm_with_acts("ab"),
                                 _lpm_with_acts("cd"), _lpm_with_acts("ef")])
    # top-2 slice first: the duplicate dies, one survivor
    assert len(filter_diverse(ranking, 0.5, k=2, order="topk_then_filter")) == 1
    # filter first, then take 2 survivors
    kept = filter_diverse(ranking, 0.5, k=2, order="filter_then_topk")
    assert [sorted(m.activities) for m in kept] == [["a", "b"], ["c", "d"]]


def test_filter_diverse_validates_arguments():
    ranking = LpmRanking(models=[_lpm_with_acts("ab")])
    with pytest.raises(ValueError):
        filter_diverse(ranking, -0.1)
    with pytest.raises(ValueError):
        filter_diverse(ranking, 1.1)
    with pytest.raises(ValueError):
        filter_diverse(ranking, 0.5, k=0)
    with pytest.raises(ValueError):
        filter_diverse(ranking, 0.5, order="sideways")


# ------------------------------------------------------------ persistence

def test_ranking_save_load_round_trip(tmp_path):
    models = [make_lpm(parse_tree("seq(a,b,c)"), support=9, rank=1),
              make_lpm(parse_tree("and(d,e)"), support=4, rank=2)]
    save_ranking(LpmRanking(models=models), str(tmp_path / "lpms"))
    back = load_ranking(str(tmp_path / "lpms"))
    assert len(back) == 2
    assert [m.rank for m in back] == [1, 2]
    assert [m.support for m in back] == [9, 4]
    assert [str(m.tree) for m in back] == ["seq(a,b,c)", "and(d,e)"]
    assert language_upto(back[0].net, 3) == {("a", "b", "c")}
    index = (tmp_path / "lpms" / "index.tsv").read_text()
    assert index.splitlines()[0] == "rank\tsupport\tdiversity\tactivities\ttree\tfile"


def test_load_ranking_missing_dir(tmp_path):
    with pytest.raises(LogliftError):
        load_ranking(str(tmp_path / "nothing"))
