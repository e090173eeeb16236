"""Machine model, description format, enumeration, and the dovetailer.

Fixture behavior is cross-checked two independent ways: direct per-word
runs and the shared-prefix search must report the same accepted set.
"""

from pathlib import Path

import pytest

from kolmo.codes import bar_encode, is_prefix_free, nat_to_string, word_index
from kolmo.fixtures import fixture_names, load_fixture
from kolmo.prefix_vm import (
    HALT,
    Outcome,
    PrefixMachine,
    MachineFormatError,
    decode_description,
    dovetail,
    encode_description,
    enumerate_machines,
    halting_programs,
    machine_description,
    machine_to_text,
    parse_machine_text,
    run,
    universal_run,
)

GOLDEN = Path(__file__).parent / "golden"


def all_words(max_len):
    yield ""
    for n in range(1, max_len + 1):
        for v in range(1 << n):
            yield format(v, "b").zfill(n)


def accepted_by_direct_runs(m, aux, max_len, budget):
    """Independent oracle: run every word separately."""
    out = {}
    for w in all_words(max_len):
        r = run(m, w, aux, budget)
        if r.kind is Outcome.HALTED:
            out[w] = r.output
    return out


class TestRun:
    def test_halt_now(self):
        m = load_fixture("halt_now")
        assert run(m, "", "", 10) == run(m, "", "1", 10)
        r = run(m, "", "", 10)
        assert r.kind is Outcome.HALTED and r.output == "" and r.bits_read == 0

    def test_copy2(self):
        m = load_fixture("copy2")
        r = run(m, "10", "", 100)
        assert (r.kind, r.output, r.bits_read) == (Outcome.HALTED, "10", 2)
        assert run(m, "1", "", 100).kind is Outcome.PAST_END

    def test_budget_one_on_looper(self):
        looper = parse_machine_text("states 1\n0 - * * -> 0 0 S S . .\n")
        assert run(looper, "", "", 1).kind is Outcome.OUT_OF_FUEL

    def test_tape_walking_looper_is_cut_short(self):
        # marches right writing 1s forever; the translation-invariant
        # snapshot never repeats, the stationary blank pattern does not
        # apply, but a genuine repeat of the all-blank window does
        walker = parse_machine_text("states 1\n0 - * * -> 0 0 R S . .\n")
        assert run(walker, "", "", 10**6).kind is Outcome.OUT_OF_FUEL

    def test_early_halt_reports_consumed_prefix(self):
        m = load_fixture("copy2")
        r = run(m, "101", "", 100)
        assert r.kind is Outcome.PAST_END
        assert r.output == "10" and r.bits_read == 2

    def test_extension_stability(self):
        extensions = [w for w in all_words(3) if w]
        for name in ("halt_now", "echo1", "copy2", "ident"):
            m = load_fixture(name)
            for w, x in accepted_by_direct_runs(m, "", 5, 200).items():
                for ext in extensions:
                    r = run(m, w + ext, "", 200)
                    assert r.kind is Outcome.PAST_END
                    assert r.output == x and r.bits_read == len(w)

    def test_determinism(self):
        m = load_fixture("ident")
        a = [run(m, w, "1", 100) for w in all_words(4)]
        b = [run(m, w, "1", 100) for w in all_words(4)]
        assert a == b


class TestHaltingPrograms:
    def test_matches_direct_runs(self):
        for name in fixture_names():
            m = load_fixture(name)
            for aux in ("", "1"):
                expect = accepted_by_direct_runs(m, aux, 6, 300)
                got = {l.program: l.output for l in halting_programs(m, aux, 6, 300)}
                assert got == expect, name

    def test_prefix_free_by_construction(self):
        for name in fixture_names():
            m = load_fixture(name)
            assert is_prefix_free(l.program for l in halting_programs(m, "", 7, 300))

    def test_ident_accepts_exactly_bar_codes(self):
        m = load_fixture("ident")
        got = {l.program: l.output for l in halting_programs(m, "", 7, 300)}
        expect = {bar_encode(nat_to_string(n)): nat_to_string(n) for n in range(15)}
        assert got == expect


class TestDovetail:
    def test_halt_now_single_event(self):
        m = load_fixture("halt_now")
        evs = dovetail(m, "", 5)
        assert len(evs) == 1
        assert (evs[0].program, evs[0].output, evs[0].stage) == ("", "", 2)

    def test_copy2_four_events(self):
        evs = dovetail(load_fixture("copy2"), "", 12)
        assert [(e.program, e.output) for e in evs] == [
            ("00", "00"), ("01", "01"), ("10", "10"), ("11", "11"),
        ]

    def test_event_list_monotone_in_stage(self):
        m = load_fixture("ident")
        prev = []
        for s in range(1, 40):
            evs = dovetail(m, "", s)
            assert evs[: len(prev)] == prev
            prev = evs

    def test_schedulers_agree(self):
        for name in fixture_names():
            m = load_fixture(name)
            for aux in ("", "1"):
                assert dovetail(m, aux, 60) == dovetail(m, aux, 60, "staged"), name

    def test_schedulers_agree_on_enumerated(self):
        for i in list(range(1, 30)) + [117, 118, 200]:
            m = enumerate_machines(i)
            assert dovetail(m, "", 40) == dovetail(m, "", 40, "staged"), i

    def test_stage_arithmetic(self):
        # the j-th program in length-lex order halting after c steps is
        # reported at stage j + c
        m = load_fixture("echo1")
        evs = dovetail(m, "", 10)
        for e in evs:
            assert e.stage == word_index(e.program) + 2   # echo1 halts in 2 steps


class TestEnumeration:
    def test_golden_first_100(self):
        want = (GOLDEN / "machine_descriptions.txt").read_text().splitlines()
        got = [machine_description(i) for i in range(1, 101)]
        assert got == want

    def test_roundtrip(self):
        for i in range(1, 101):
            d = machine_description(i)
            m = decode_description(d)
            assert m == enumerate_machines(i)
            assert encode_description(m) == d

    def test_first_machines_are_headers_only(self):
        for i in range(1, 9):
            m = enumerate_machines(i)
            assert m.n_states == i and m.entries == ()

    def test_machine_9_halts_immediately(self):
        r = run(enumerate_machines(9), "", "", 10)
        assert r.kind is Outcome.HALTED and r.output == ""

    def test_invalid_descriptions_rejected(self):
        assert decode_description("0000") is None                  # bad length
        assert decode_description("000" + "1" + "0" * 19) is None  # state 4 of 1
        assert decode_description("000" + "0001111" + "0" * 13) is None  # next=15


class TestUniversal:
    def test_agrees_with_direct_run_exhaustively(self):
        for i in range(1, 21):
            m = enumerate_machines(i)
            prefix = bar_encode(nat_to_string(i))
            for aux in ("", "1"):
                for p in all_words(6):
                    direct = run(m, p, aux, 64)
                    via_u = universal_run(prefix + p, aux, 64)
                    assert via_u.kind == direct.kind, (i, p, aux)
                    if direct.kind is Outcome.HALTED:
                        assert via_u.output == direct.output
                        assert via_u.bits_read == len(prefix) + len(p)

    def test_unparseable_index(self):
        assert universal_run("111", "", 10).kind is Outcome.PAST_END
        assert universal_run("0", "", 10).kind is Outcome.PAST_END   # index 0

    def test_prefix_freeness_of_universal_programs(self):
        programs = []
        for i in range(9, 12):
            prefix = bar_encode(nat_to_string(i))
            for leaf in halting_programs(enumerate_machines(i), "", 4, 64):
                programs.append(prefix + leaf.program)
        assert is_prefix_free(programs)


class TestTextFormat:
    def test_roundtrip_through_text(self):
        for name in fixture_names():
            m = load_fixture(name)
            again = parse_machine_text(machine_to_text(m))
            assert again.n_states == m.n_states
            assert dict(again.entries) == dict(m.entries)

    def test_rejects_duplicate_keys(self):
        bad = "states 1\n0 - $ 0 -> H 0 S S . .\n0 - $ 0 -> 0 0 S S . .\n"
        with pytest.raises(MachineFormatError):
            parse_machine_text(bad)

    def test_rejects_out_of_range_state(self):
        with pytest.raises(MachineFormatError):
            parse_machine_text("states 1\n1 - $ 0 -> H 0 S S . .\n")

    def test_model_allows_more_than_8_states_but_format_does_not(self):
        big = PrefixMachine(9, (((8, 2, 2, 0), (HALT, 0, 0, 0, None, False)),))
        with pytest.raises(MachineFormatError):
            encode_description(big)
        assert big.digest()   # text digest still works


def random_machine(seed, max_states=3, max_entries=14):
    import random

    from kolmo.prefix_vm import HALT, MARKER, NO_BIT

    r = random.Random(seed)
    n = r.randint(1, max_states)
    entries = []
    keys = set()
    for _ in range(r.randint(1, max_entries)):
        key = (r.randrange(n), r.choice([0, 1, NO_BIT]), r.choice([0, 1, MARKER]), r.randrange(2))
        if key in keys:
            continue
        keys.add(key)
        val = (
            r.choice([HALT] + list(range(n))),
            r.randrange(2),
            r.choice([-1, 0, 1]),
            r.choice([-1, 0, 1]),
            r.choice([None, 0, 1]),
            r.random() < 0.5,
        )
        entries.append((key, val))
    return PrefixMachine(n, tuple(entries))


class TestRandomMachineDifferential:
    """The shared-prefix search, the literal per-word runner, and the two
    dovetail schedulers must agree on arbitrary transition tables, not
    just on the shipped fixtures."""

    def test_tree_matches_direct_runs(self):
        for seed in range(150):
            m = random_machine(seed)
            for aux in ("", "10"):
                direct = accepted_by_direct_runs(m, aux, 6, 200)
                tree = {l.program: l.output for l in halting_programs(m, aux, 6, 200)}
                assert direct == tree, (seed, aux)
                assert is_prefix_free(tree)

    def test_schedulers_agree_on_random_machines(self):
        for seed in range(80):
            m = random_machine(seed)
            assert dovetail(m, "", 120) == dovetail(m, "", 120, "staged"), seed
