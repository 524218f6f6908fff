from fractions import Fraction

import pytest

from sci_workbench import integration as ig
from sci_workbench import spectral as sp
from sci_workbench.core import check_locality, evaluate_tower, run_algorithm
from sci_workbench.errors import PlanGap, ProblemMismatch, TagIncompatible
from sci_workbench.reductions import (
    Decoder,
    DecoderClass,
    PlanEntry,
    QueryPlan,
    Reduction,
    compose,
    decoder_compose_class,
    identity_reduction,
    pullback_algorithm,
    pullback_tower,
    structural_feasibility,
    verify_reduction,
)


@pytest.fixture
def unit_problem():
    return ig.make_problem(ig.interval(0, 1))


@pytest.fixture
def chain():
    return tuple(ig.make_problem(ig.interval(0, 2**k)) for k in range(3))  # [0,1],[0,2],[0,4]


class TestIdentity:
    def test_verifies_with_zero_discrepancy(self, unit_problem):
        report = verify_reduction(identity_reduction(unit_problem))
        assert report.passed and report.max_discrepancy == 0.0

    def test_identity_on_spectral_source(self, spectral_source):
        report = verify_reduction(identity_reduction(spectral_source))
        assert report.passed and report.max_discrepancy == 0.0

    def test_identity_on_every_shipped_problem(self, default_catalog):
        for entry in default_catalog.entries:
            samples = min(20, 2 * len(entry.problem.inputs))
            report = verify_reduction(identity_reduction(entry.problem), samples)
            assert report.passed, entry.problem.name

    def test_unit_law_pointwise(self, chain):
        affine = ig.affine_reduction(chain[1], chain[0])
        composed = compose(identity_reduction(chain[0]), affine)
        f = ig.polynomial(0, 1)
        assert composed.encoder(f) == affine.encoder(f)
        qid = ("ev", Fraction(3, 2))
        assert composed.plan.entry(qid).source_ids == affine.plan.entry(qid).source_ids
        assert composed.plan.entry(qid).combine((Fraction(1),)) == affine.plan.entry(qid).combine(
            (Fraction(1),)
        )


class TestCompose:
    def test_affine_chain_plan(self, chain):
        r1 = ig.affine_reduction(chain[1], chain[0])
        r2 = ig.affine_reduction(chain[2], chain[1])
        composed = compose(r1, r2)
        entry = composed.plan.entry(("ev", Fraction(1)))
        assert entry.source_ids == (("ev", Fraction(1, 4)),)
        assert entry.combine((Fraction(1),)) == Fraction(1, 4)
        assert verify_reduction(composed).passed

    def test_width_law_blockwise_sum(self, chain):
        r1 = ig.affine_reduction(chain[1], chain[0])
        r2 = ig.affine_reduction(chain[2], chain[1])
        composed = compose(r1, r2)
        for x in (Fraction(0), Fraction(1), Fraction(7, 2)):
            outer = r2.plan.entry(("ev", x))
            total = sum(r1.plan.entry(mid).width for mid in outer.source_ids)
            assert composed.plan.entry(("ev", x)).width == total == 1

    def test_width_law_with_wider_blocks(self, chain):
        # same affine simulation, but each query is answered twice and averaged
        base = ig.affine_reduction(chain[1], chain[0])

        def doubled_rule(qid):
            entry = base.plan.rule(qid)
            if entry is None:
                return None
            sid = entry.source_ids[0]
            return PlanEntry(
                (sid, sid), lambda vals, _e=entry: _e.combine(((vals[0] + vals[1]) / 2,))
            )

        doubled = Reduction(
            "doubled-affine", base.source, base.target, base.encoder, base.decoder,
            QueryPlan("doubled", doubled_rule),
        )
        assert verify_reduction(doubled).passed
        composed = compose(doubled, ig.affine_reduction(chain[2], chain[1]))
        entry = composed.plan.entry(("ev", Fraction(2)))
        assert entry.width == 2
        assert verify_reduction(composed).passed

    def test_problem_mismatch(self, chain):
        r1 = ig.affine_reduction(chain[1], chain[0])
        with pytest.raises(ProblemMismatch):
            compose(r1, r1)

    def test_transitivity_on_samples(self, chain):
        r1 = ig.affine_reduction(chain[1], chain[0])
        r2 = ig.affine_reduction(chain[2], chain[1])
        assert verify_reduction(r1).passed
        assert verify_reduction(r2).passed
        assert verify_reduction(compose(r1, r2)).passed


class TestVerify:
    def test_affine_reductions_pass(self, chain):
        for target in chain[1:]:
            report = verify_reduction(ig.affine_reduction(target, chain[0]), 100)
            assert report.passed
            assert report.target_failures == report.query_failures == 0

    def test_corrupted_combiner_counted(self, chain):
        good = ig.affine_reduction(chain[1], chain[0])

        def corrupt_rule(qid):
            entry = good.plan.rule(qid)
            if entry is None:
                return None
            return PlanEntry(entry.source_ids, lambda vals, _e=entry: 2 * _e.combine(vals))

        bad = Reduction(
            "corrupted", good.source, good.target, good.encoder, good.decoder,
            QueryPlan("corrupted", corrupt_rule),
        )
        report = verify_reduction(bad)
        assert not report.passed
        assert report.query_failures > 0
        assert report.target_failures == 0

    def test_stabilization_forward_mixed_blocks(self, spectral_source):
        domain = spectral_source.params["domain"]
        stabilizer = sp.StabilizerSpec.certify(sp.constant_diagonal(5), domain)
        forward, _ = sp.stabilization_reductions(
            domain, stabilizer, spectral_source.inputs.members, source=spectral_source
        )
        assert verify_reduction(forward).passed
        mixed = forward.plan.entry(("nu", 1, 1, 1, 2))
        assert mixed.combine((Fraction(99),)) == 0


class TestPullback:
    def test_rectangle_stage_simplifies(self, chain):
        reduction = ig.affine_reduction(chain[1], chain[0])
        stage = ig.rectangle_tower(ig.interval(0, 2)).stage((4,))
        pulled = pullback_algorithm(reduction, stage)
        f = ig.polynomial(0, 0, 1)
        value, trace = run_algorithm(pulled, chain[0], f)
        native, _ = run_algorithm(ig.rectangle_tower(ig.interval(0, 1)).stage((4,)), chain[0], f)
        assert value == native
        assert trace.ids == tuple(("ev", Fraction(j, 4)) for j in range(4))

    def test_constant_algorithm_pullback(self, chain):
        reduction = ig.affine_reduction(chain[1], chain[0])
        from sci_workbench.core import constant_algorithm

        const = constant_algorithm("c", ("ev", Fraction(1)), Fraction(7))
        value, trace = run_algorithm(pullback_algorithm(reduction, const), chain[0], ig.polynomial(1))
        assert value == Fraction(7)
        assert len(trace) == 1

    def test_trace_width_is_block_sum(self, chain):
        reduction = ig.affine_reduction(chain[1], chain[0])
        stage = ig.rectangle_tower(ig.interval(0, 2)).stage((8,))
        _, trace = run_algorithm(pullback_algorithm(reduction, stage), chain[0], ig.polynomial(1))
        widths = sum(
            reduction.plan.entry(("ev", Fraction(j, 4))).width for j in range(8)
        )
        assert len(trace) == widths == 8

    def test_tower_pullback_height_and_values(self, chain):
        reduction = ig.affine_reduction(chain[1], chain[0])
        pulled = pullback_tower(reduction, ig.rectangle_tower(ig.interval(0, 2)))
        native = ig.rectangle_tower(ig.interval(0, 1))
        assert pulled.height == native.height == 1
        for f in (ig.polynomial(1), ig.polynomial(0, 1), ig.polynomial("1/2", 0, "1/3")):
            for n in (1, 2, 5, 16):
                assert evaluate_tower(pulled, (n,), chain[0], f) == evaluate_tower(
                    native, (n,), chain[0], f
                )

    def test_height0_pullback_stays_height0(self):
        problem = ig.make_problem(ig.interval(0, 0))
        pulled = pullback_tower(identity_reduction(problem), ig.degenerate_algorithm(0))
        assert pulled.height == 0
        assert evaluate_tower(pulled, (), problem, ig.polynomial(5)) == 0

    def test_pullback_preserves_locality(self, chain, rng):
        reduction = ig.affine_reduction(chain[1], chain[0])
        pulled = pullback_algorithm(reduction, ig.rectangle_tower(ig.interval(0, 2)).stage((3,)))
        members = chain[0].inputs.members
        for _ in range(25):
            a, b = rng.choice(members), rng.choice(members)
            assert check_locality(pulled, chain[0], a, b).passed

    def test_plan_gap(self, chain):
        reduction = ig.affine_reduction(chain[1], chain[0])
        from sci_workbench.core import constant_algorithm

        outside = constant_algorithm("bad", ("ev", Fraction(9)), 0)  # 9 not in [0, 2]
        with pytest.raises(PlanGap):
            run_algorithm(pullback_algorithm(reduction, outside), chain[0], ig.polynomial(1))

    def test_spectral_backward_pullback_decides_stabilized(self, spectral_source):
        domain = spectral_source.params["domain"]
        stabilizer = sp.StabilizerSpec.certify(sp.constant_diagonal(5), domain)
        pairs = spectral_source.inputs.members
        stabilized = sp.stabilized_problem(domain, stabilizer, pairs)
        _, backward = sp.stabilization_reductions(
            domain, stabilizer, pairs, source=spectral_source, stabilized=stabilized
        )
        pulled = pullback_tower(backward, sp.decision_tower(domain))
        assert pulled.height == 2
        for pair in stabilized.inputs.members[:10]:
            spec, window = pair[0].first, pair[1]
            stages = sp.stabilization_stages(spec, window)
            assert evaluate_tower(pulled, stages, stabilized, pair) == stabilized.target(pair)


class TestStructuralFeasibility:
    def test_empty_source_family_infeasible(self):
        from sci_workbench.degrees import counterexample_pair

        p0, p1 = counterexample_pair()
        assert structural_feasibility(p0, p1).infeasible

    def test_nonempty_source_unknown(self, unit_problem, spectral_source):
        assert structural_feasibility(unit_problem, spectral_source).verdict == "unknown"

    def test_empty_target_vacuous(self):
        from sci_workbench.degrees import counterexample_pair

        p0, _ = counterexample_pair()
        assert structural_feasibility(p0, p0).verdict == "unknown"


class TestDecoderClasses:
    @pytest.mark.parametrize(
        "a,b,expected",
        [
            (DecoderClass.CONT, DecoderClass.CONT, DecoderClass.CONT),
            (DecoderClass.BOR, DecoderClass.BOR, DecoderClass.BOR),
            (DecoderClass.CONT, DecoderClass.BOR, DecoderClass.BOR),
            (DecoderClass.BOR, DecoderClass.CONT, DecoderClass.BOR),
            (DecoderClass.ID, DecoderClass.ID, DecoderClass.ID),
        ],
    )
    def test_table(self, a, b, expected):
        assert decoder_compose_class(a, b) is expected

    def test_id_needs_same_space(self):
        with pytest.raises(TagIncompatible):
            decoder_compose_class(DecoderClass.ID, DecoderClass.ID, same_space=False)

    @pytest.mark.parametrize("other", [DecoderClass.CONT, DecoderClass.BOR])
    def test_id_mixes_with_nothing_else(self, other):
        with pytest.raises(TagIncompatible):
            decoder_compose_class(DecoderClass.ID, other)
        with pytest.raises(TagIncompatible):
            decoder_compose_class(other, DecoderClass.ID)
