import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from veech import words
from veech.words import Letter, WordParams

E2 = "UDUDZUDDUDUZDU"
LENGTHS = [2, 14, 142, 2558, 86974, 5740286, 746237182]
THETAS = [2, 4, 24, 336, 10080, 624960]

letters = st.text(alphabet="UDZ", max_size=40)


def concat_recursion(k, params=words.DEFAULT_PARAMS):
    """Independent string route: e_{j+1} = e_j^m Z e_j conj(e_j)^m Z conj(e_j)."""
    w = "UD"
    for j in range(1, k):
        m = params.m(j)
        c = w.translate(str.maketrans("UD", "DU"))
        w = w * m + "Z" + w + c * m + "Z" + c
    return w


def direct_theta(w):
    vals = {"U": 1, "D": -1, "Z": 0}
    return sum((-1) ** i * vals[ch] for i, ch in enumerate(w))


def test_first_words():
    assert words.build_elementary(1) == "UD"
    assert words.build_elementary(2) == E2
    assert words.build_elementary(2).startswith("UD" * 2)


@pytest.mark.parametrize("k", range(1, 6))
def test_build_matches_concatenation(k):
    assert words.build_elementary(k) == concat_recursion(k)


def test_length_and_theta_tables():
    assert [words.length_of(k) for k in range(1, 8)] == LENGTHS
    assert [words.theta_of_elementary(k) for k in range(1, 7)] == THETAS


def test_lengths_exceed_int64_exactly():
    n10 = words.length_of(10)
    assert n10 == 2 * (2 ** 9 + 1) * words.length_of(9) + 2
    assert words.length_of(12) > 2 ** 63


def test_cap_exceeded_carries_length():
    with pytest.raises(words.CapExceededError) as info:
        words.build_elementary(7)
    assert "746237182" in str(info.value)


def test_letter_at_examples():
    assert words.letter_at(1, 0) is Letter.UP
    assert words.letter_at(2, 4) is Letter.ZERO
    assert words.letter_at(2, 13) is Letter.UP
    with pytest.raises(IndexError):
        words.letter_at(2, 14)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, LENGTHS[4] - 1))
def test_letter_at_agrees_with_materialized(i):
    assert words.letter_at(5, i).value == words.build_elementary(5)[i]


@settings(max_examples=50, deadline=None)
@given(st.integers(0, LENGTHS[6] - 2000), st.integers(0, 2000))
def test_letters_range_matches_letter_at(start, size):
    block = words.letters_range(7, start, start + size)
    assert len(block) == size
    for j in range(0, size, max(1, size // 7)):
        assert words.from_signs(block[j:j + 1]) == words.letter_at(7, start + j).value


def test_letters_range_prefix_of_materialized():
    e6 = words.build_elementary(6)
    assert words.from_signs(words.letters_range(7, 0, len(e6))) == e6


def test_conjugate():
    assert words.conjugate("UD") == "DU"
    assert words.conjugate("") == ""
    assert words.theta(words.conjugate(E2)) == -4


@given(letters)
def test_conjugate_involution_and_theta_sign(w):
    assert words.conjugate(words.conjugate(w)) == w
    assert words.theta(words.conjugate(w)) == -words.theta(w)
    assert words.theta(w) == direct_theta(w)


@given(letters, letters)
def test_theta_concatenation(w, v):
    assert words.theta(w + v) == words.theta(w) + (-1) ** len(w) * words.theta(v)


def test_theta_examples():
    assert words.theta("UD") == 2
    assert words.theta("") == 0
    assert words.theta(E2 + "Z") == words.theta(E2)


def test_count_subwords_examples():
    assert words.count_subwords("UDUD", "UD") == 2
    assert words.count_subwords(E2, "UD") == 4
    assert list(words.occurrences(E2, "UD")) == [0, 2, 5, 8]
    assert words.count_subwords("UD", "UDU") == 0
    with pytest.raises(words.WordError):
        words.count_subwords("UD", "")


@given(letters, st.text(alphabet="UDZ", min_size=1, max_size=4))
def test_count_subwords_bound(w, v):
    assert words.count_subwords(w, v) <= max(0, len(w) - len(v) + 1)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.text(alphabet="UDZ", min_size=1, max_size=8), min_size=1, max_size=6),
       st.text(alphabet="UDZ", min_size=1, max_size=4))
def test_concatenation_count_bounds(parts, v):
    total = sum(words.count_subwords(p, v) for p in parts)
    joined = words.count_subwords("".join(parts), v)
    assert total <= joined <= total + (len(parts) - 1) * (len(v) - 1)


def test_count_enclosure_contains_direct_counts():
    rng = np.random.default_rng(3)
    e6 = words.build_elementary(6)
    patterns = {"Z", "UD", "ZU", "UDZ"}
    while len(patterns) < 100:
        n = int(rng.integers(1, 9))
        start = int(rng.integers(0, len(e6) - n))
        patterns.add(e6[start:start + n])
    for k in range(1, 7):
        ek = words.build_elementary(k)
        bar = words.conjugate(ek)
        for v in patterns:
            enc = words.count_enclosure(v, k)
            assert enc.e_count[0] <= words.count_subwords(ek, v) <= enc.e_count[1]
            assert enc.bar_count[0] <= words.count_subwords(bar, v) <= enc.bar_count[1]


def test_count_enclosure_exact_at_base():
    enc = words.count_enclosure("UD", 3, base_level=3)
    assert enc.e_count[0] == enc.e_count[1] == words.count_subwords(words.build_elementary(3), "UD")


def test_count_enclosure_slack_growth():
    v = "UDZ"
    prev = words.count_enclosure(v, 2, base_level=2)
    for k in range(3, 7):
        cur = words.count_enclosure(v, k, base_level=2)
        m = words.DEFAULT_PARAMS.m(k - 1)
        grow = (cur.e_count[1] - cur.e_count[0]) - 2 * (m + 1) * (prev.e_count[1] - prev.e_count[0])
        assert grow <= (2 * m + 3) * (len(v) - 1)
        prev = cur


def test_phi_frequency():
    zero = Fraction(words.count_subwords(E2, "Z"), 14)
    assert zero == Fraction(2, 14)
    encs = [words.phi_frequency(ch) for ch in "UDZ"]
    assert sum(e.lower for e in encs) <= 1 <= sum(e.upper for e in encs)
    e6 = words.build_elementary(6)
    enc = words.phi_frequency("UD")
    assert Fraction(words.count_subwords(e6, "UD"), len(e6)) in enc
    assert Fraction(words.count_subwords(words.conjugate(e6), "UD"), len(e6)) in enc
    with pytest.raises(words.PatternNotInLanguageError):
        words.phi_frequency("UUU")


def test_c_estimate():
    assert words.c_estimate(K=2).ratio == Fraction(4, 14)
    est = words.c_estimate(K=6)
    assert est.ratio == Fraction(624960, 5740286)
    assert 0 < est.lower <= float(est.ratio) == est.upper
    assert abs(float(est.ratio) - 0.108873) < 1e-6


def test_c_estimate_bracket_shrinks_and_nests():
    prev = words.c_estimate(K=3)
    for K in range(4, 8):
        cur = words.c_estimate(K=K)
        assert cur.lower >= prev.lower - 1e-15
        assert cur.upper <= prev.upper + 1e-15
        prev = cur


def test_is_in_language():
    assert words.is_in_language("UD", K=1)
    assert all(words.is_in_language(ch, K=2) for ch in "UDZ")
    # UU occurs in e_3 (e_2 ends in DU and is followed by e_2, which starts UD)
    assert words.is_in_language("UU", K=6)
    assert not words.is_in_language("UUU", K=6)
    assert not words.is_in_language("ZZ", K=6)


def test_language_monotone_and_prefix():
    for k in range(1, 6):
        assert words.build_elementary(k + 1).startswith(words.build_elementary(k))
    rng = np.random.default_rng(0)
    e5 = words.build_elementary(5)
    for _ in range(50):
        i = int(rng.integers(0, len(e5) - 10))
        w = e5[i:i + int(rng.integers(1, 10))]
        found = [words.is_in_language(w, K=K) for K in range(1, 7)]
        assert found == sorted(found)


def test_sofic_graph_accepts_language():
    g1 = words.sofic_graph(1)
    e3 = words.build_elementary(3)
    # every L(Y) word up to length |e_2|, sampled exhaustively from e_3
    for n in range(1, 15):
        for i in range(len(e3) - n + 1):
            assert words.sofic_member(e3[i:i + n], g1)
    e4 = words.build_elementary(4)
    g2 = words.sofic_graph(2)
    for i in range(0, len(e4) - 40, 7):
        assert words.sofic_member(e4[i:i + 40], g2)


def test_sofic_rejections():
    g1 = words.sofic_graph(1)
    assert not words.sofic_member("ZZ", g1)
    assert words.sofic_member("", g1)
    assert words.sofic_rejects("UUU") == 1
    assert words.sofic_rejects(E2) == 0


def test_factorization_examples():
    f = words.elementary_factorization(words.build_elementary(2), 2)
    assert f.inner == (words.build_elementary(2),) and not f.head and not f.tail
    f1 = words.elementary_factorization(E2, 1)
    allowed = {"UD", "DU", "UDZ", "DUZ"}
    assert f1.join() == E2
    assert all(u in allowed for u in f1.inner)
    with pytest.raises(words.NotInSoficLanguageError):
        words.elementary_factorization("ZZ", 1)


def test_factorization_extremal_lengths():
    rng = np.random.default_rng(11)
    e6 = words.build_elementary(6)
    for _ in range(1000):
        n = int(rng.integers(1, 60))
        i = int(rng.integers(0, len(e6) - n))
        w = e6[i:i + n]
        f = words.elementary_factorization(w, 2)
        assert f.join() == w
        assert len(f.head) <= 14 and len(f.tail) <= 14


def test_minimality_check():
    assert words.minimality_check("UD", 1)
    for k in (1, 2, 3):
        assert words.minimality_check("U", k)
    with pytest.raises(words.PatternNotInLanguageError):
        words.minimality_check("UUU", 1)


def test_subword_complexity_subexponential():
    e6 = words.build_elementary(6)
    assert words.subword_complexity("UDUD", 2) == 2
    counts = [words.subword_complexity(e6, n) for n in (8, 16, 32, 64)]
    assert counts == sorted(counts)
    for n, c in zip((8, 16, 32, 64), counts):
        assert c <= words.sofic_word_count_bound(2, n)
        assert math.log(c) / n < math.log(3)


def test_custom_params():
    p = WordParams(prefix=(3, 5), name="custom")
    assert words.build_elementary(3, p) == concat_recursion(3, p)
    assert words.length_of(3, p) == len(concat_recursion(3, p))
    assert words.theta_of_elementary(3, p) == words.theta(concat_recursion(3, p))
    with pytest.raises(words.WordError):
        WordParams(prefix=(1,))
