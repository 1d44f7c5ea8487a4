"""Invariants checked over generated placements."""
import itertools

from hypothesis import given, settings, strategies as st

from vepc_grouping.engine import Scenario, run_analytic
from vepc_grouping.grouping import (
    apply_grouping, merge_segments, paper_rules, proposed_placement,
)
from vepc_grouping.model import EntityKind, PathClass, Placement, Site, classify_path
from vepc_grouping.procedures import Condition, default_catalog, expand_procedure
from vepc_grouping.profile import TABLE3_PROFILE, RateMode, derive_baseline_rates, table_calibrated_rates

from helpers import ENTITIES, relabel, reference_network

ALL = list(EntityKind)


@st.composite
def placements(draw):
    n_seg = draw(st.integers(1, len(ENTITIES)))
    seg_of = draw(st.lists(st.integers(0, n_seg - 1), min_size=len(ENTITIES), max_size=len(ENTITIES)))
    host_of = draw(st.lists(st.integers(0, 3), min_size=n_seg, max_size=n_seg))
    lan_of = draw(st.lists(st.integers(0, 2), min_size=len(ENTITIES), max_size=len(ENTITIES)))
    return Placement("gen", {
        e: Site(f"s{s}", f"h{host_of[s]}", f"l{lan}") for e, s, lan in zip(ENTITIES, seg_of, lan_of)
    })


pairs = st.tuples(st.sampled_from(ALL), st.sampled_from(ALL)).filter(lambda p: p[0] != p[1])


@settings(max_examples=500)
@given(placements(), pairs, st.randoms(use_true_random=False))
def test_classification_symmetric_and_relabel_invariant(placement, pair, rnd):
    a, b = pair
    cls = classify_path(placement, a, b)
    assert cls == classify_path(placement, b, a)
    assert classify_path(relabel(placement, rnd), a, b) == cls


@settings(max_examples=100)
@given(placements())
def test_every_pair_gets_exactly_one_class(placement):
    for a, b in itertools.combinations(ALL, 2):
        ext = a.external or b.external
        sa, sb = placement.site(a), placement.site(b)
        same = lambda attr: not ext and getattr(sa, attr) == getattr(sb, attr)
        predicates = {
            PathClass.EXTERNAL: ext,
            PathClass.INTERNAL: same("segment"),
            PathClass.INTRA_HOST_INTRA_LAN: not ext and not same("segment") and same("host") and same("lan"),
            PathClass.INTRA_HOST_INTER_LAN: not ext and not same("segment") and same("host") and not same("lan"),
            PathClass.INTER_HOST: not ext and not same("host"),
        }
        assert sum(predicates.values()) == 1
        assert predicates[classify_path(placement, a, b)]


@settings(max_examples=300)
@given(placements(), st.sampled_from(list(RateMode)))
def test_conservation(placement, mode):
    rates = table_calibrated_rates() if mode is RateMode.TABLE_CALIBRATED else derive_baseline_rates(TABLE3_PROFILE)
    g = apply_grouping(rates, placement, paper_rules(mode), TABLE3_PROFILE)
    for iface, rate in rates.rates.items():
        share = g.network.get(iface, 0) + g.internal.get(iface, 0) - g.added.get(iface, 0)
        assert share == rate
        assert g.network.get(iface, 0) == 0 or g.internal.get(iface, 0) == 0
    assert all(v >= 0 for v in [*g.network.values(), *g.internal.values()])


@settings(max_examples=300)
@given(placements())
def test_matches_reference_oracle(placement):
    g = apply_grouping(table_calibrated_rates(), placement, paper_rules())
    assert dict(g.network) == reference_network(placement)


@settings(max_examples=100)
@given(placements(), st.randoms(use_true_random=False))
def test_grouping_idempotent_and_relabel_invariant(placement, rnd):
    rates, rules = table_calibrated_rates(), paper_rules()
    first = apply_grouping(rates, placement, rules)
    assert apply_grouping(rates, placement, rules) == first
    assert apply_grouping(rates, relabel(placement, rnd), rules) == first


@settings(max_examples=200)
@given(placements())
def test_merging_two_segments_never_increases_network(placement):
    rates, rules = table_calibrated_rates(), paper_rules()
    before = apply_grouping(rates, placement, rules).network_total
    for s1, s2 in itertools.combinations(sorted(placement.segments()), 2):
        merged = merge_segments(placement, [[s1, s2]])
        assert apply_grouping(rates, merged, rules).network_total <= before


@settings(max_examples=200)
@given(st.randoms(use_true_random=False))
def test_refinements_of_proposed_carry_at_least_as_much(rnd):
    proposed = proposed_placement()
    hosts = {}
    assignments = {}
    for e, site in sorted(proposed.assignments.items(), key=lambda kv: kv[0].value):
        seg = f"{site.segment}.{rnd.randrange(3)}"
        # a split-off segment either stays on the parent host or moves to its own
        hosts.setdefault(seg, rnd.choice([site.host, f"h-{seg}"]))
        assignments[e] = Site(seg, hosts[seg], site.lan)
    refined = Placement("refined", assignments)

    def total(p):
        return run_analytic(Scenario("s", TABLE3_PROFILE, p, paper_rules())).network_total

    assert total(proposed) <= total(refined)


@settings(max_examples=100)
@given(placements(), st.randoms(use_true_random=False), st.sampled_from(default_catalog()))
def test_procedure_breakdowns(placement, rnd, proc):
    with_prepaid = expand_procedure(proc, placement, prepaid=True)
    without = expand_procedure(proc, placement, prepaid=False)
    guarded = sum(s.count for s in proc.steps if s.condition is Condition.PREPAID_ONLY)
    assert with_prepaid.total == without.total + guarded
    assert with_prepaid.total == sum(s.count for s, _ in with_prepaid.per_step)
    relabeled = expand_procedure(proc, relabel(placement, rnd), prepaid=True)
    assert (relabeled.network_transactions, relabeled.internal_transactions) == (
        with_prepaid.network_transactions, with_prepaid.internal_transactions)

