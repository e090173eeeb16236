"""Interval coding: static allocator, threshold events, codebooks.

The oracle is an independent allocator written the dumb way: fractions
for arithmetic, a linear scan over all binary words for the largest
contained binary interval.
"""

import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from kolmo.codes import index_word, is_prefix_free, kraft_sum
from kolmo.exact_arith import Dyadic, ONE, ZERO
from kolmo.fixtures import load_fixture
from kolmo.prefix_vm import Outcome, run
from kolmo.semimeasures import MixtureSpec, MonotoneApproximator
from kolmo.sf_coder import (
    AllocationOverflowError,
    AuxMismatchError,
    build_codebook,
    codebook_to_machine,
    coding_gap_report_machine,
    coding_gap_report_mixture,
    decode,
    format_codebook,
    machine_mass_stream,
    parse_codebook,
    per_condition_schedule,
    psi_discretize,
    shannon_fano,
)


def dy(n, e=0):
    return Dyadic(n, e)


def oracle_largest_word(lo: Fraction, hi: Fraction, max_len=20):
    """Linear scan over all binary words by (length, value)."""
    for k in range(max_len + 1):
        for m in range(1 << k):
            wlo = Fraction(m, 1 << k)
            whi = Fraction(m + 1, 1 << k)
            if lo <= wlo and whi <= hi:
                return format(m, "b").zfill(k) if k else ""
    return None


def oracle_allocate(masses):
    """Independent left-to-right allocator over exact fractions."""
    cursor = Fraction(0)
    out = []
    for sym, p in masses:
        f = p.to_fraction()
        out.append((sym, oracle_largest_word(cursor, cursor + f)))
        cursor += f
    return out


class TestShannonFano:
    def test_halving_masses(self):
        book = shannon_fano([("a", dy(1, 1)), ("b", dy(1, 2)), ("c", dy(1, 2))])
        assert [(s, w) for s, w, _ in book.entries] == [("a", "0"), ("b", "10"), ("c", "11")]

    def test_single_full_mass(self):
        book = shannon_fano([("a", ONE)])
        assert book.codeword("a") == ""

    def test_three_eighths_example(self):
        book = shannon_fano([("a", dy(3, 3)), ("b", dy(3, 3)), ("c", dy(1, 2))])
        assert [(s, w) for s, w, _ in book.entries] == [("a", "00"), ("b", "10"), ("c", "11")]
        for _, w, _ in book.entries:
            assert len(w) == 2

    def test_oversum_rejected(self):
        with pytest.raises(AllocationOverflowError):
            shannon_fano([("a", dy(3, 2)), ("b", dy(1, 1))])

    def test_duplicate_symbols_rejected(self):
        with pytest.raises(ValueError):
            shannon_fano([("a", dy(1, 2)), ("a", dy(1, 2))])

    def test_matches_oracle_randomized(self):
        rng = random.Random(2024)
        for _ in range(120):
            masses = random_mass_list(rng, max_symbols=12, exp=8)
            book = shannon_fano(masses)
            assert [(s, w) for s, w, _ in book.entries] == oracle_allocate(masses)

    def test_plus_two_bound_and_kraft(self):
        rng = random.Random(7)
        for _ in range(120):
            masses = random_mass_list(rng, max_symbols=16, exp=10)
            book = shannon_fano(masses)
            words = [w for _, w, _ in book.entries]
            assert is_prefix_free(words)
            assert kraft_sum(words) <= ONE
            for (_, w, _), (_, p) in zip(book.entries, masses):
                assert len(w) <= p.ceil_log2_reciprocal() + 2


def random_mass_list(rng, max_symbols, exp):
    n = rng.randint(1, max_symbols)
    budget = 1 << exp
    masses = []
    for i in range(n):
        if budget == 0:
            break
        hi = max(1, budget // max(1, (n - i)))
        take = rng.randint(1, hi)
        budget -= take
        masses.append((f"s{i}", dy(take, exp)))
    return masses


def staircase_phi(levels):
    """levels: {(x_index, y_index): [dyadic, ...]} nondecreasing over t."""

    def fn(x, y, t):
        seq = levels.get((x, y), ())
        if not seq:
            return ZERO
        return seq[min(t, len(seq)) - 1]

    return MonotoneApproximator(fn)


class TestPsiDiscretize:
    def test_single_jump_single_event(self):
        phi = staircase_phi({(1, 1): [dy(1, 1)]})
        evs = list(psi_discretize(phi, per_condition_schedule(1, 8)))
        assert [(e.x, e.mass) for e in evs] == [("", dy(1, 1))]

    def test_climbing_staircase(self):
        phi = staircase_phi({(1, 1): [dy(1, 3), dy(1, 2), dy(1, 1)]})
        evs = list(psi_discretize(phi, per_condition_schedule(1, 10)))
        assert [e.mass for e in evs] == [dy(1, 3), dy(1, 2), dy(1, 1)]
        total = sum((e.mass for e in evs), ZERO)
        assert total == dy(7, 3)
        assert total < dy(1, 1) + dy(1, 1)

    def test_zero_stream_no_events(self):
        phi = MonotoneApproximator.constant(ZERO)
        assert list(psi_discretize(phi, per_condition_schedule(1, 8))) == []

    def test_skipped_brackets_are_not_emitted(self):
        phi = staircase_phi({(1, 1): [dy(5, 3)]})   # jumps straight into [1/2, 1)
        evs = list(psi_discretize(phi, per_condition_schedule(1, 8)))
        assert [e.mass for e in evs] == [dy(1, 1)]

    def test_masses_strictly_increase_per_point(self):
        phi = staircase_phi({(1, 1): [dy(1, 3), dy(3, 3), dy(3, 2), dy(7, 3)]})
        evs = list(psi_discretize(phi, per_condition_schedule(1, 12)))
        masses = [e.mass for e in evs]
        assert masses == sorted(set(masses), key=lambda d: d.to_fraction())

    def test_non_monotone_stream_raises(self):
        phi = MonotoneApproximator(lambda x, y, t: dy(1, 1) if t == 1 else dy(1, 2))
        with pytest.raises(Exception):
            list(psi_discretize(phi, per_condition_schedule(1, 6)))


monotone_staircases = st.lists(
    st.integers(1, 1 << 10), min_size=1, max_size=8
).map(lambda raw: [dy(v, 10) for v in sorted(raw)])


class TestPsiProperties:
    @given(monotone_staircases)
    def test_sum_strictly_below_twice_sup(self, seq):
        phi = staircase_phi({(1, 1): seq})
        evs = list(psi_discretize(phi, per_condition_schedule(1, len(seq) + 2)))
        total = sum((e.mass for e in evs), ZERO)
        sup = seq[-1]
        assert total < sup + sup

    @given(monotone_staircases)
    def test_masses_distinct_increasing_and_bracket_sup(self, seq):
        phi = staircase_phi({(1, 1): seq})
        evs = list(psi_discretize(phi, per_condition_schedule(1, len(seq) + 2)))
        masses = [e.mass for e in evs]
        assert len(set(masses)) == len(masses)
        for a, b in zip(masses, masses[1:]):
            assert a < b
        # the last event's bracket contains the supremum
        sup = seq[-1]
        assert masses[-1] <= sup < masses[-1] + masses[-1]

    @given(monotone_staircases)
    def test_events_are_replayable(self, seq):
        phi = staircase_phi({(1, 1): seq})
        for ev in psi_discretize(phi, per_condition_schedule(1, len(seq) + 2)):
            v = seq[min(ev.t, len(seq)) - 1]
            assert ev.mass <= v < ev.mass + ev.mass


class TestBuildCodebook:
    def test_worked_example(self):
        phi = staircase_phi({(1, 1): [dy(1, 1)], (2, 1): [ZERO, dy(1, 2)]})
        book = build_codebook(phi, "", 10)
        assert [(s, w, str(iv.lo), str(iv.hi)) for s, w, iv, _ in book.entries] == [
            ("", "00", "0/2^0", "1/2^2"),
            ("0", "010", "1/2^2", "3/2^3"),
        ]

    def test_point_mass(self):
        phi = staircase_phi({(1, 1): [ONE]})
        book = build_codebook(phi, "", 8)
        assert book.codeword("") == "0"

    def test_roundtrip_and_misses(self):
        phi = staircase_phi({(1, 1): [dy(1, 2), dy(1, 1)], (2, 1): [dy(1, 2)]})
        book = build_codebook(phi, "", 12)
        for sym in book.symbols():
            assert decode(book, book.codeword(sym), "") == sym
        assert decode(book, "111111", "") is None
        word = book.codeword("")
        assert decode(book, word[:-1], "") is None
        with pytest.raises(AuxMismatchError):
            decode(book, word, "1")

    def test_shorter_codewords_come_from_later_events(self):
        phi = staircase_phi({(1, 1): [dy(1, 3), dy(1, 2), dy(1, 1)]})
        book = build_codebook(phi, "", 12)
        lengths = [len(w) for _, w, _, _ in book.entries]
        assert lengths == sorted(lengths, reverse=True)
        assert book.codeword("") == min((w for _, w, _, _ in book.entries), key=len)

    def test_overflow_is_hard_error(self):
        phi = MonotoneApproximator(lambda x, y, t: ONE)   # every x claims 1/2
        with pytest.raises(AllocationOverflowError):
            build_codebook(phi, "", 12)

    def test_max_events_truncates_prefix_of_the_stream(self):
        phi_full = staircase_phi({(1, 1): [dy(1, 3), dy(1, 2), dy(1, 1)], (2, 1): [dy(1, 2)]})
        full = build_codebook(phi_full, "", 12)
        phi_cut = staircase_phi({(1, 1): [dy(1, 3), dy(1, 2), dy(1, 1)], (2, 1): [dy(1, 2)]})
        cut = build_codebook(phi_cut, "", 12, max_events=2)
        assert len(cut.entries) == 2
        assert cut.entries == full.entries[:2]

    def test_text_roundtrip(self):
        phi = staircase_phi({(1, 1): [dy(1, 2), dy(1, 1)], (3, 1): [dy(1, 3)]})
        book = build_codebook(phi, "", 12)
        text = format_codebook(book)
        again = parse_codebook(text)
        assert [(s, w, iv) for s, w, iv, _ in again.entries] == [
            (s, w, iv) for s, w, iv, _ in book.entries
        ]
        assert format_codebook(again) == text


def random_staircase_mixture(rng, max_symbols=8, exp=6, max_levels=5):
    """Random final masses with sum <= 1, each approached by a random
    nondecreasing dyadic staircase."""
    targets = random_mass_list(rng, max_symbols, exp)
    levels = {}
    for i, (sym, target) in enumerate(targets):
        n_levels = rng.randint(1, max_levels)
        seq = sorted(
            (dy(rng.randint(1, target.num << max(0, exp - target.exp)), exp) for _ in range(n_levels - 1)),
            key=lambda d: d.to_fraction(),
        )
        seq = [min(v, target) for v in seq] + [target]
        levels[(i + 1, 1)] = seq
    return targets, levels


def oracle_codebook(levels, max_stage):
    """Independent event-coder: fractions everywhere, thresholds found by
    scanning powers of two, codewords by the linear word scan."""
    entries = []
    cursor = Fraction(0)
    best = {}
    for s in range(2, max_stage + 1):
        for x in range(1, s):
            t = s - x
            seq = levels.get((x, 1), ())
            if not seq:
                continue
            v = seq[min(t, len(seq)) - 1].to_fraction()
            if v == 0:
                continue
            k = 0
            while Fraction(1, 2**k) > v:
                k += 1
            threshold = Fraction(1, 2**k)
            if best.get(x, Fraction(0)) < threshold:
                word = oracle_largest_word(cursor, cursor + threshold / 2)
                entries.append((index_word(x), word))
                cursor += threshold / 2
            best[x] = max(best.get(x, Fraction(0)), v)
    return entries


class TestBounds:
    def test_matches_independent_allocator(self):
        rng = random.Random(424242)
        for trial in range(60):
            targets, levels = random_staircase_mixture(rng)
            book = build_codebook(staircase_phi(levels), "", 40)
            got = [(sym, word) for sym, word, _, _ in book.entries]
            assert got == oracle_codebook(levels, 40), trial

    def test_factor_eight_and_roundtrip_randomized(self):
        from kolmo.exact_arith import BinaryInterval

        rng = random.Random(31337)
        for trial in range(80):
            targets, levels = random_staircase_mixture(rng)
            phi = staircase_phi(levels)
            book = build_codebook(phi, "", 40)
            words = [w for _, w, _, _ in book.entries]
            assert is_prefix_free(words)
            assert kraft_sum(words) <= ONE
            for _, word, iv, _ in book.entries:
                binary = BinaryInterval(word)
                assert iv.contains(binary.interval())
                assert binary.length + binary.length >= iv.length
            for i, (sym_name, target) in enumerate(targets):
                sym = index_word(i + 1)
                word = book.codeword(sym)
                assert word is not None, trial
                # 2^-|p| >= sup/8, i.e. |p| <= ceil(log2 1/sup) + 3
                assert Dyadic.pow2(len(word)) * dy(8) >= target, (trial, sym_name)
                assert len(word) <= target.ceil_log2_reciprocal() + 3
                assert decode(book, word, "") == sym

    def test_psi_sum_below_twice_sup(self):
        rng = random.Random(1234)
        for trial in range(80):
            targets, levels = random_staircase_mixture(rng)
            phi = staircase_phi(levels)
            sums = {}
            for ev in psi_discretize(phi, per_condition_schedule(1, 40)):
                key = ev.x
                sums[key] = sums.get(key, ZERO) + ev.mass
            for i, (_, target) in enumerate(targets):
                sym = index_word(i + 1)
                assert sums[sym] < target + target, trial


class TestDecoderMachine:
    def test_compiled_decoder_matches_lookup(self):
        phi = staircase_phi({(1, 1): [dy(1, 2), dy(1, 1)], (2, 1): [dy(1, 3)], (5, 1): [dy(1, 3)]})
        book = build_codebook(phi, "", 16)
        machine = codebook_to_machine(book)
        for sym, word, _, _ in book.entries:
            r = run(machine, word, "", 10_000)
            assert r.kind is Outcome.HALTED and r.output == sym, (sym, word)
        # non-codewords diverge
        for bad in ("1111111111", book.entries[0][1] + "0"):
            if decode(book, bad, "") is None:
                assert run(machine, bad, "", 10_000).kind is not Outcome.HALTED

    def test_compiled_decoder_respects_budget_example(self):
        phi = staircase_phi({(1, 1): [ONE]})
        book = build_codebook(phi, "", 8)
        machine = codebook_to_machine(book)
        r = run(machine, "0", "", 100)
        assert r.kind is Outcome.HALTED and r.output == ""


class TestGapReports:
    def test_copy2_rows(self):
        rows = coding_gap_report_machine(load_fixture("copy2"), "", 60, 6, 60)
        assert len(rows) == 4
        for row in rows:
            assert row.k_bits == 2
            assert row.q_mass == dy(1, 2)   # 1/4
            assert row.k_vs_q_ok
            assert row.code_bound_ok
            assert row.k_bits - row.neg_log_q_ceil == 0

    def test_point_mass_mixture_row(self):
        from kolmo.semimeasures import ConditionalSemimeasure

        table = ConditionalSemimeasure({(1, 1): ONE}, stage=6)
        spec = MixtureSpec(((0, table),))
        (row,) = coding_gap_report_mixture(spec, "", 6)
        assert row.code_len == 1 and row.neg_log_m_ceil == 0
        assert row.code_len - row.neg_log_m_ceil == 1   # within the +3 allowance
        assert row.code_bound_ok

    def test_machine_stream_feeds_codebook(self):
        m = load_fixture("echo1")
        phi = machine_mass_stream(m, 30, 6)
        book = build_codebook(phi, "", 40)
        for sym in ("0", "1"):
            word = book.codeword(sym)
            assert word is not None
            assert Dyadic.pow2(len(word)) * dy(8) >= dy(1, 1)
