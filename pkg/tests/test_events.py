"""Increasing events: built-in predicates, connectivity, parsing,
canonical names, and the executable monotonicity checker."""

import numpy as np
import pytest

from rinterlace import (
    EVENT_KINDS,
    Configuration,
    IncreasingEvent,
    InvalidInputError,
    build_event,
    check_monotone,
    connected,
    empty_configuration,
    evaluate,
    interlacement_set,
    parse_event,
    sample_configuration,
    vacant_set,
)

from fixtures import PATH_ENDPOINTS, four_trace_configuration, slab_lattice


def make_event(text, lattice):
    return build_event(parse_event(text), lattice)


def fmt_site(site):
    return "(" + ",".join(str(c) for c in site) + ")"


class TestBuiltinPredicates:
    def test_nonempty_on_empty_configuration(self, box222_eq):
        ev = make_event("nonempty", box222_eq.lattice)
        assert evaluate(ev, empty_configuration(box222_eq.lattice)) is False

    def test_nonempty_any_trace(self, box222_eq):
        rng = np.random.default_rng(71)
        ev = make_event("nonempty", box222_eq.lattice)
        for _ in range(50):
            c = sample_configuration(box222_eq, 1.0 / box222_eq.capacity, rng)
            assert evaluate(ev, c) == (len(interlacement_set(c)) > 0)

    def test_two_point_single_spanning_trace(self):
        lattice = slab_lattice()
        from fixtures import _trace
        from rinterlace import LevelPoint

        path = [(k, 0, 0) for k in range(5)]
        c = Configuration(lattice, 1.0, (LevelPoint(0.5, _trace(path)),))
        ev = make_event("two_point v=(0,0,0) z=(4,0,0)", lattice)
        assert evaluate(ev, c) is True

    def test_two_point_four_trace_fixture(self):
        lattice, c = four_trace_configuration()
        v, z = PATH_ENDPOINTS
        ev = make_event(f"two_point v={fmt_site(v)} z={fmt_site(z)}", lattice)
        assert evaluate(ev, c) is True

    def test_two_point_endpoints_must_be_occupied(self):
        lattice, c = four_trace_configuration()
        # (4,4,0) is in G but in no trace
        ev = make_event("two_point v=(0,0,0) z=(4,4,0)", lattice)
        assert evaluate(ev, c) is False

    def test_site_visited(self):
        lattice, c = four_trace_configuration()
        assert evaluate(make_event("site x=(1,0,0)", lattice), c) is True
        assert evaluate(make_event("site x=(4,4,0)", lattice), c) is False

    def test_full_cover(self, box222_eq):
        rng = np.random.default_rng(72)
        ev = make_event("full_cover", box222_eq.lattice)
        all_sites = frozenset(box222_eq.lattice.sites)
        seen = {True: 0, False: 0}
        for _ in range(300):
            c = sample_configuration(box222_eq, 3.0 / box222_eq.capacity, rng)
            result = evaluate(ev, c)
            assert result == (interlacement_set(c) == all_sites)
            seen[result] += 1
        assert seen[True] > 0 and seen[False] > 0


class TestConnected:
    def test_degenerate_endpoint_convention(self):
        # v == z connects exactly when v is occupied (length-0 path).
        assert connected({(0, 0, 0)}, (0, 0, 0), (0, 0, 0)) is True
        assert connected({(1, 0, 0)}, (0, 0, 0), (0, 0, 0)) is False

    def test_adjacent_pair(self):
        occupied = {(0, 0, 0), (1, 0, 0)}
        assert connected(occupied, (0, 0, 0), (1, 0, 0)) is True

    def test_diagonal_not_connected(self):
        occupied = {(0, 0, 0), (1, 1, 0)}
        assert connected(occupied, (0, 0, 0), (1, 1, 0)) is False

    def test_path_with_detour(self):
        occupied = {(0, 0, 0), (0, 1, 0), (1, 1, 0), (2, 1, 0), (2, 0, 0)}
        assert connected(occupied, (0, 0, 0), (2, 0, 0)) is True

    def test_broken_path(self):
        occupied = {(0, 0, 0), (0, 1, 0), (2, 1, 0), (2, 0, 0)}
        assert connected(occupied, (0, 0, 0), (2, 0, 0)) is False


class TestEventProperties:
    def test_two_point_symmetric(self, box444_eq):
        rng = np.random.default_rng(73)
        lattice = box444_eq.lattice
        fwd = make_event("two_point v=(0,0,0) z=(3,3,3)", lattice)
        rev = make_event("two_point v=(3,3,3) z=(0,0,0)", lattice)
        for _ in range(200):
            c = sample_configuration(box444_eq, 2.0 / box444_eq.capacity, rng)
            assert evaluate(fwd, c) == evaluate(rev, c)

    def test_builtins_factor_through_occupied_set(self, box222_eq):
        # two configurations with equal occupied sets but different traces
        # get identical verdicts from every built-in
        rng = np.random.default_rng(74)
        lattice = box222_eq.lattice
        events = [
            make_event("nonempty", lattice),
            make_event("two_point v=(0,0,0) z=(1,1,1)", lattice),
            make_event("site x=(0,0,0)", lattice),
            make_event("full_cover", lattice),
        ]
        found = 0
        attempts = 0
        while found < 20 and attempts < 3000:
            attempts += 1
            c1 = sample_configuration(box222_eq, 2.0 / box222_eq.capacity, rng)
            c2 = sample_configuration(box222_eq, 2.0 / box222_eq.capacity, rng)
            same_set = interlacement_set(c1) == interlacement_set(c2)
            different_traces = [p.trace for p in c1.points] != [
                p.trace for p in c2.points
            ]
            if same_set and different_traces:
                found += 1
                for ev in events:
                    assert evaluate(ev, c1) == evaluate(ev, c2)
        assert found == 20


class TestParsing:
    def test_kinds_catalog(self):
        assert EVENT_KINDS == ("nonempty", "two_point", "site_visited", "full_cover")

    def test_bare_kinds(self):
        assert parse_event("nonempty").kind == "nonempty"
        assert parse_event("full_cover").kind == "full_cover"

    def test_two_point_with_sites(self):
        spec = parse_event("two_point v=(0,0,0) z=(3,1,2)")
        assert spec.kind == "two_point"
        assert spec.sites == ((0, 0, 0), (3, 1, 2))

    def test_site_alias(self):
        spec = parse_event("site x=(1,1,1)")
        assert spec.kind == "site_visited"
        assert spec.sites == ((1, 1, 1),)

    def test_whitespace_tolerated(self):
        spec = parse_event("  two_point   v=(0,0,0)   z=(1,0,0) ")
        assert spec.sites[1] == (1, 0, 0)

    def test_unknown_kind_rejected(self):
        with pytest.raises(InvalidInputError, match="kind"):
            parse_event("does_not_exist")

    def test_missing_parameter_rejected(self):
        with pytest.raises(InvalidInputError):
            parse_event("two_point v=(0,0,0)")
        with pytest.raises(InvalidInputError):
            parse_event("site")

    def test_malformed_site_rejected(self):
        with pytest.raises(InvalidInputError):
            parse_event("site x=oops")
        with pytest.raises(InvalidInputError):
            parse_event("site x")

    def test_unexpected_parameter_rejected(self):
        with pytest.raises(InvalidInputError):
            parse_event("nonempty v=(0,0,0)")


class TestBuild:
    def test_parameter_site_must_be_member(self, box222_eq):
        with pytest.raises(InvalidInputError):
            build_event(parse_event("site x=(9,9,9)"), box222_eq.lattice)
        with pytest.raises(InvalidInputError):
            build_event(
                parse_event("two_point v=(0,0,0) z=(9,9,9)"), box222_eq.lattice
            )

    def test_wrong_dimension_site_rejected_at_build(self, box222_eq):
        # a 2-tuple parses as plain data but can never be a member of a
        # three-dimensional set
        with pytest.raises(InvalidInputError):
            build_event(parse_event("site x=(1,2)"), box222_eq.lattice)

    def test_canonical_names(self, box222_eq):
        lattice = box222_eq.lattice
        assert make_event("nonempty", lattice).name == "nonempty"
        assert (
            make_event("two_point v=(0,0,0) z=(1,1,1)", lattice).name
            == "two_point v=(0,0,0) z=(1,1,1)"
        )
        assert make_event("site x=(1,0,1)", lattice).name == "site x=(1,0,1)"
        assert make_event("full_cover", lattice).name == "full_cover"

    def test_name_reparses_to_same_spec(self, box222_eq):
        lattice = box222_eq.lattice
        for text in [
            "nonempty",
            "two_point v=(0,0,0) z=(1,1,1)",
            "site x=(1,0,1)",
            "full_cover",
        ]:
            ev = make_event(text, lattice)
            assert parse_event(ev.name) == ev.spec


class TestMonotoneChecker:
    def test_builtins_have_no_violations(self, box222_eq):
        rng = np.random.default_rng(75)
        lattice = box222_eq.lattice
        u = 1.0 / box222_eq.capacity
        for text in [
            "nonempty",
            "two_point v=(0,0,0) z=(1,1,1)",
            "site x=(0,0,0)",
            "full_cover",
        ]:
            report = check_monotone(
                make_event(text, lattice), box222_eq, u, 500, rng
            )
            assert report.violations == 0
            assert report.trials == 500

    def test_decreasing_event_caught(self, singleton_eq):
        # A vacant-set event is decreasing: adding a trace can only shrink
        # the vacant set, so the checker must see true -> false flips.
        rng = np.random.default_rng(76)
        broken = IncreasingEvent(
            "vacant_nonempty",
            predicate=lambda c: len(vacant_set(c)) > 0,
        )
        report = check_monotone(
            broken, singleton_eq, 0.5 / singleton_eq.capacity, 200, rng
        )
        assert report.violations > 0
