import random

import pytest
from gmpy2 import mpq
from hypothesis import given, settings, strategies as st

from chordbench.geometry import INF, GeometryError, Point, combined
from chordbench.instances import gen_ig, gen_lb, random_convex_chain
from chordbench.oracle import (BEST, LEFTMOST, RANDOM, RIGHTMOST, WORST, AdversaryOracle,
                               AdversaryState, DeltaComb, ExactComb, Instance, InstanceError,
                               PrefixFamily, StateError, adversary_hd_answer,
                               adversary_hd_finalize, admissible, certificate_ok, comb_delta,
                               comb_exact)

Q = mpq
P = lambda x, y: Point(Q(x), Q(y))


def brute_min(points, lam):
    return min(combined(p, lam) for p in points)


class TestInstance:
    def test_sorted_and_bounded(self):
        inst = Instance((P(2, 1), P(1, 2)), 2)
        assert inst.points == (P(1, 2), P(2, 1))
        with pytest.raises(InstanceError):
            Instance((P(8, 1),), 2)
        with pytest.raises(InstanceError):
            Instance((), 2)

    def test_rational_mode_rejects_floats(self):
        with pytest.raises(InstanceError):
            Instance((Point(1.0, 2.0),), 2)

    def test_pareto_and_envelope(self):
        inst = Instance((P(1, 4), P(2, 2), P(3, 3), P(4, 1), P(3, "3/2")), 3)
        assert inst.pareto == [P(1, 4), P(2, 2), P(3, "3/2"), P(4, 1)]
        assert inst.envelope == [P(1, 4), P(2, 2), P(4, 1)]


class TestExactComb:
    @given(st.integers(0, 10 ** 6), st.integers(1, 10 ** 4))
    @settings(max_examples=100)
    def test_minimizes(self, seed, lam_den):
        inst = random_convex_chain(random.Random(seed), 12, dominated=3)
        lam = Q(seed % 997 + 1, lam_den)
        q = comb_exact(inst, lam)
        assert combined(q, lam) == brute_min(inst.points, lam)

    def test_axis_directions_and_ties(self):
        # a dominated point ties with a at lam = +inf
        inst = Instance((P(1, 3), P(1, 4), P(2, 2), P(3, 2), P(4, 1)), 3)
        # traversal order is x ascending, then y descending, at every slope
        assert comb_exact(inst, INF, LEFTMOST) == P(1, 4)
        assert comb_exact(inst, INF, RIGHTMOST) == P(1, 3)
        assert comb_exact(inst, Q(0), LEFTMOST) == P(4, 1)
        assert comb_exact(Instance((P(2, 1), P(3, 1)), 2), Q(0), RIGHTMOST) == P(3, 1)
        # h = 4 for both (1, 3) and (2, 2)
        assert comb_exact(inst, Q(1), LEFTMOST) == P(1, 3)
        assert comb_exact(inst, Q(1), RIGHTMOST) == P(2, 2)

    def test_negative_slope_rejected(self):
        with pytest.raises(GeometryError):
            comb_exact(Instance((P(1, 1),), 1), Q(-1))

    def test_call_count_and_log(self, ig43):
        orc = ExactComb(ig43)
        orc.answer(INF)
        orc.answer(Q(0))
        assert orc.call_count == 2
        assert [q for _, q in orc.log] == [P(1, 2), P(2, 1)]

    def test_float_fast_path_matches(self):
        import numpy as np
        rng = np.random.default_rng(5)
        xs, ys = 1 + rng.random(500), 1 + rng.random(500)
        fast = Instance.from_arrays(xs, ys, 2, {})
        slow = Instance(tuple(Point(float(x), float(y)) for x, y in zip(xs, ys)), 2, mode="float")
        for lam in (0.0, 0.3, 1.0, 7.5, INF):
            assert comb_exact(fast, lam) == comb_exact(slow, lam) == min(
                slow.points, key=lambda p: (combined(p, lam), p.x, -p.y))


class TestDeltaComb:
    inst = gen_ig(1, 1, 6, 5)

    @pytest.mark.parametrize("policy", [BEST, WORST, RANDOM])
    def test_answers_are_admissible(self, policy):
        delta = Q(1, 4)
        orc = DeltaComb(self.inst, delta, policy, seed=3)
        for i in range(1, 40):
            lam = Q(i, 8)
            q = orc.answer(lam)
            assert combined(q, lam) <= (1 + delta) * brute_min(self.inst.points, lam)
            assert certificate_ok(self.inst.points, q, lam, delta)

    def test_worst_is_worst(self):
        lam = Q(1)
        pool = admissible(self.inst, lam, Q(1, 2))
        q = comb_delta(self.inst, lam, Q(1, 2), WORST)
        assert combined(q, lam) == max(combined(p, lam) for p in pool)

    def test_random_is_seeded(self):
        a = [DeltaComb(self.inst, Q(1), RANDOM, seed=9).answer(Q(i, 3)) for i in range(1, 9)]
        b = [DeltaComb(self.inst, Q(1), RANDOM, seed=9).answer(Q(i, 3)) for i in range(1, 9)]
        assert a == b

    def test_zero_delta_is_exact(self):
        assert comb_delta(self.inst, Q(1, 3), 0, WORST) == comb_exact(self.inst, Q(1, 3))

    def test_certificate_rejects_bad_answer(self):
        pts = [P(1, 2), P("3/2", 1), P(2, 1)]
        assert not certificate_ok(pts, P(1, 2), Q(1))
        assert certificate_ok(pts, P("3/2", 1), Q(1))
        assert certificate_ok(pts, P(1, 2), Q(1), delta=Q(1, 5))


class TestAdversary:
    def test_first_answer(self):
        st_ = AdversaryState(4)
        q = adversary_hd_answer(st_, Q(1, 2))
        assert q == Point(Q(0), Q(1, 16))
        assert st_.certified_error() == 1 - Q(1, 8)

    def test_infinity_and_clamping(self):
        st_ = AdversaryState(4)
        assert adversary_hd_answer(st_, INF) == st_.A
        q1 = adversary_hd_answer(st_, Q(1))
        assert adversary_hd_answer(st_, Q(2)) == q1
        assert st_.clamped == 1 and len(st_.committed) == 1

    def test_answers_are_consistent_with_final_instance(self):
        orc = AdversaryOracle(6)
        lams = [INF, Q(0), Q(1), Q(1, 3), Q(1, 10), Q(1, 50)]
        answers = [orc.answer(l) for l in lams]
        inst = orc.finalize()
        for lam, q in zip(lams, answers):
            assert q in inst.point_set
            assert combined(q, lam) == brute_min(inst.points, lam)

    def test_finalize_locks(self):
        st_ = AdversaryState(3)
        with pytest.raises(StateError):
            adversary_hd_finalize(st_)
        adversary_hd_answer(st_, Q(1))
        adversary_hd_finalize(st_)
        with pytest.raises(StateError):
            adversary_hd_answer(st_, Q(1, 2))

    def test_exact_and_rounded_agree_early(self):
        for prec in (None, 64):
            st_ = AdversaryState(5, precision=prec)
            for lam in (Q(1), Q(1, 2), Q(1, 4)):
                adversary_hd_answer(st_, lam)
            assert st_.certified_error() > Q(1, 2)

    def test_finalized_cardinality(self):
        # a, q_1, q_2, q_3, q_3* and b
        st_ = AdversaryState(4)
        for lam in (Q(1), Q(1, 2), Q(1, 4)):
            adversary_hd_answer(st_, lam)
        assert len(adversary_hd_finalize(st_)) == 6

    def test_k_too_small(self):
        with pytest.raises(ValueError):
            AdversaryState(1)


class TestPrefixFamily:
    inst = gen_lb(Q(1, 2 ** 16), 16)

    def test_matches_exact_comb_on_each_member(self):
        v = self.inst.envelope
        j = len(v) - 3
        fam = PrefixFamily(v, j)
        rng = random.Random(1)
        lams = list(fam.upper[1:]) + [Q(rng.randint(1, 10 ** 6), rng.randint(1, 10 ** 6))
                                      * rng.choice([1, 1000, Q(1, 10 ** 6)]) for _ in range(200)]
        for ell in range(1, j + 1):
            pts = fam.instance_points(ell)
            member = Instance(tuple(pts), self.inst.m)
            for lam in lams:
                q = fam.answer(ell, lam)
                assert q == comb_exact(member, lam, RIGHTMOST)

    def test_cells(self):
        v = self.inst.envelope
        fam = PrefixFamily(v, 2)
        assert fam.cell(INF) == 0
        assert fam.cell(Q(0)) == 4
        assert fam.cell(fam.upper[1]) == 1

    def test_range_checks(self):
        v = self.inst.envelope
        with pytest.raises(ValueError):
            PrefixFamily(v, len(v))
        fam = PrefixFamily(v, 2)
        with pytest.raises(ValueError):
            fam.answer(3, Q(1))
