"""Tests for the composition engine: measures, pairing, forced zeros,
and contradiction certificates."""

import json
import math

import numpy as np
import pytest

from hvnogo.hilbert import (
    ATOL,
    ONE,
    PLUS,
    ZERO,
    Ket,
    Observable,
    born_prob,
    build_pbr_basis,
    computational_basis_observable,
    pbr_observable,
    tensor,
)
from hvnogo.models import BellModel, KsModel, ket_from_bloch
from hvnogo.nogo import (
    CompositeHiddenState,
    ContradictionCertificate,
    TrackingError,
    WitnessSearchError,
    compose_pi_c,
    compose_pi_ctr,
    forced_zero_outcomes,
    run_contradiction,
    tracking_set_measure,
    verify_certificate,
)
from hvnogo.ontology import SpherePoint

KS = KsModel()
BELL = BellModel()

# hidden state associated with |0> (z > 0) and tracking |+> (x > 0)
LAM_BOTH = SpherePoint(np.array([0.8, 0.0, 0.6]))
# hidden state associated with |0> but failing to track |+> (x < 0)
LAM_ZERO_ONLY = SpherePoint(np.array([-0.8, 0.0, 0.6]))


def state_at_angle(theta):
    return ket_from_bloch(np.array([math.sin(theta), 0.0, math.cos(theta)]))


class TestTrackingSetMeasure:
    def test_half_overlap_ks(self):
        est = tracking_set_measure(KS, ZERO, PLUS, 100_000, 1)
        assert est.target == pytest.approx(0.5, abs=ATOL)
        assert est.stderr == pytest.approx(0.0016, abs=3e-4)
        assert abs(est.value - 0.5) <= 0.005
        assert not est.degenerate

    def test_half_overlap_bell_despite_zero_association_overlap(self):
        est = tracking_set_measure(BELL, ZERO, PLUS, 100_000, 1)
        assert abs(est.value - 0.5) <= 0.005
        assert est.set_size > 0
        # no sampled hidden state is associated with the other ket
        lam = BELL.sample(ZERO, 5)
        assert not BELL.is_associated(lam, PLUS)

    def test_orthogonal_states_flagged_degenerate(self):
        est = tracking_set_measure(KS, ZERO, ONE, 20_000, 2)
        assert est.degenerate
        assert est.value <= 3.0 * max(est.stderr, 1e-6)

    def test_identical_states_flagged_degenerate(self):
        est = tracking_set_measure(KS, ZERO, ZERO, 5_000, 3)
        assert est.degenerate and est.value == 1.0

    def test_cos_squared_pi_over_8_overlap(self):
        # analytic overlap of |0> with the pi/4 polar state: cos^2(pi/8)
        phi = state_at_angle(math.pi / 4)
        target = 0.8535533905932737
        est = tracking_set_measure(KS, ZERO, phi, 100_000, 4)
        assert est.target == pytest.approx(target, abs=1e-12)
        assert abs(est.value - target) <= 3.0 * est.stderr + 1e-3

    def test_convergence_over_100_seeds(self):
        # spec invariant: within 4 stderr in >= 99% of seeded runs per
        # overlap point, for both shipped models
        for model in (KS, BELL):
            for overlap in (0.1, 0.25, 0.5, 0.75, 0.9):
                phi = state_at_angle(2.0 * math.acos(math.sqrt(overlap)))
                hits = sum(
                    tracking_set_measure(model, ZERO, phi, 1000, seed).within(4.0)
                    for seed in range(100)
                )
                assert hits >= 99, (model.name, overlap, hits)

    def test_determinism(self):
        a = tracking_set_measure(KS, ZERO, PLUS, 5000, 77)
        b = tracking_set_measure(KS, ZERO, PLUS, 5000, 77)
        assert (a.value, a.stderr, a.set_size) == (b.value, b.stderr, b.set_size)

    def test_rejects_bad_sample_count(self):
        with pytest.raises(ValueError, match="positive"):
            tracking_set_measure(KS, ZERO, PLUS, 0, 1)


class TestComposition:
    def test_full_pair_gives_four_products(self):
        composite = compose_pi_ctr((KS, LAM_BOTH, (ZERO, PLUS)), (KS, LAM_BOTH, (ZERO, PLUS)))
        assert len(composite.tracked_products) == 4

    def test_single_kets_give_single_product(self):
        composite = compose_pi_ctr((KS, LAM_BOTH, (ZERO,)), (KS, LAM_BOTH, (PLUS,)))
        assert composite.tracked_products == ((ZERO, PLUS),)

    def test_failed_tracking_rejected_with_witness(self):
        with pytest.raises(TrackingError) as err:
            compose_pi_ctr((KS, LAM_ZERO_ONLY, (ZERO, PLUS)), (KS, LAM_BOTH, (ZERO, PLUS)))
        assert not err.value.report.tracks
        assert err.value.report.witnesses

    def test_empty_kets_rejected(self):
        with pytest.raises(ValueError, match="at least one"):
            compose_pi_ctr((KS, LAM_BOTH, ()), (KS, LAM_BOTH, (PLUS,)))

    def test_composite_requires_products(self):
        with pytest.raises(ValueError, match="at least one"):
            CompositeHiddenState(LAM_BOTH, LAM_BOTH, ())

    def test_association_based_composition(self):
        composite = compose_pi_c((KS, LAM_BOTH, (ZERO, PLUS)), (KS, LAM_BOTH, (ZERO, PLUS)))
        assert len(composite.tracked_products) == 4

    def test_association_based_composition_rejects_unassociated(self):
        south = SpherePoint(np.array([0.0, 0.0, -1.0]))
        with pytest.raises(ValueError, match="associated"):
            compose_pi_c((KS, south, (ZERO,)), (KS, LAM_BOTH, (PLUS,)))


class TestForcedZeroOutcomes:
    def setup_method(self):
        self.obs = pbr_observable(build_pbr_basis(ZERO, PLUS))
        self.full = compose_pi_ctr((KS, LAM_BOTH, (ZERO, PLUS)), (KS, LAM_BOTH, (ZERO, PLUS)))

    def test_full_composite_forces_all_four(self):
        forced = forced_zero_outcomes(self.full, self.obs)
        assert set(forced) == {1.0, 2.0, 3.0, 4.0}
        for k, entry in forced.items():
            assert entry.born <= ATOL

    def test_single_pair_forces_exactly_its_outcome(self):
        single = compose_pi_ctr((KS, LAM_BOTH, (ZERO,)), (KS, LAM_BOTH, (PLUS,)))
        forced = forced_zero_outcomes(single, self.obs)
        assert set(forced) == {2.0}

    def test_identity_observable_forces_nothing(self):
        trivial = Observable(((7.0, np.eye(4)),), dim=4)
        assert forced_zero_outcomes(self.full, trivial) == {}

    def test_monotone_under_removing_tracked_kets(self):
        single = compose_pi_ctr((KS, LAM_BOTH, (ZERO,)), (KS, LAM_BOTH, (PLUS,)))
        assert set(forced_zero_outcomes(single, self.obs)) <= set(
            forced_zero_outcomes(self.full, self.obs)
        )

    def test_born_table_has_one_zero_per_row_and_column(self):
        states = {1: ZERO, 2: PLUS}
        pairs = [(1, 1), (1, 2), (2, 1), (2, 2)]
        table = np.array([
            [born_prob(self.obs, tensor(states[x], states[y]), k)
             for k in self.obs.eigenvalues]
            for x, y in pairs
        ])
        zero_mask = table <= ATOL
        assert (zero_mask.sum(axis=0) == 1).all()
        assert (zero_mask.sum(axis=1) == 1).all()

    def test_requires_dim_4(self):
        with pytest.raises(ValueError, match="dim-4"):
            forced_zero_outcomes(self.full, Observable(((1.0, np.eye(2)),), dim=2))


class TestRunContradiction:
    @pytest.mark.parametrize("model", [KS, BELL])
    def test_shipped_models_yield_contradiction(self, model):
        cert = run_contradiction(model, model, ZERO, PLUS, seed=7)
        assert cert.verdict
        assert len(cert.forced_zero) == 4
        assert cert.response_sum == 0.0
        assert cert.unforced == ()
        assert cert.max_product_overlap <= ATOL
        assert cert.gram_deviation <= ATOL

    def test_same_model_reuses_witness(self):
        cert = run_contradiction(KS, KsModel(), ZERO, PLUS, seed=3)
        assert (cert.witness_left.vec == cert.witness_right.vec).all()

    def test_heterogeneous_models(self):
        cert = run_contradiction(KS, BELL, ZERO, PLUS, seed=5)
        assert cert.verdict
        assert cert.model_left == "ks" and cert.model_right == "bell"

    def test_orthogonal_preparations_rejected(self):
        with pytest.raises(ValueError, match="2\\^-1/2"):
            run_contradiction(KS, KS, ZERO, ONE, seed=1)

    def test_negative_control_computational_basis(self):
        cert = run_contradiction(KS, KS, ZERO, PLUS, seed=7,
                                 observable=computational_basis_observable(4))
        assert not cert.verdict
        assert cert.response_sum == 1.0
        assert 1.0 in cert.unforced

    def test_witness_search_budget_exhaustion(self):
        class NeverTracksModel(KsModel):
            name = "never"

            def respond(self, lam, observable):
                if set(observable.eigenvalues) == {1.0, 0.0}:
                    return 1.0
                return super().respond(lam, observable)

            def respond_batch(self, lams, observable):
                if set(observable.eigenvalues) == {1.0, 0.0}:
                    return np.ones(len(lams))
                return super().respond_batch(lams, observable)

        with pytest.raises(WitnessSearchError, match="no witness"):
            run_contradiction(NeverTracksModel(), NeverTracksModel(), ZERO, PLUS,
                              seed=1, budget=256)

    def test_determinism(self):
        a = run_contradiction(KS, KS, ZERO, PLUS, seed=11)
        b = run_contradiction(KS, KS, ZERO, PLUS, seed=11)
        assert a.to_dict() == b.to_dict()


class TestCertificateSoundness:
    def test_reverification_from_object(self):
        cert = run_contradiction(KS, KS, ZERO, PLUS, seed=7)
        check = verify_certificate(cert)
        assert check["ok"]
        assert check["max_born_recomputed"] <= ATOL
        assert check["verdict_recomputed"] == cert.verdict

    def test_reverification_through_json_round_trip(self):
        cert = run_contradiction(BELL, BELL, ZERO, PLUS, seed=9)
        blob = json.dumps(cert.to_dict())
        check = verify_certificate(json.loads(blob))
        assert check["ok"]
        assert check["max_born_recomputed"] <= ATOL
        assert check["max_born_discrepancy"] <= ATOL

    def test_verdict_recomputable_from_forced_zero_alone(self):
        cert = run_contradiction(KS, KS, ZERO, PLUS, seed=13)
        forced = {f.eigenvalue for f in cert.forced_zero}
        assert (forced == set(cert.eigenvalues)) == cert.verdict

    def test_tampered_certificate_detected(self):
        cert = run_contradiction(KS, KS, ZERO, PLUS, seed=7)
        data = cert.to_dict()
        # claim an outcome is forced by a product that does not annihilate it
        data["forced_zero"][0]["x"] = 2
        data["forced_zero"][0]["y"] = 2
        check = verify_certificate(data)
        assert not check["ok"]
        assert check["max_born_recomputed"] > ATOL

    def test_certificate_type_rejects_inconsistent_verdict(self):
        cert = run_contradiction(KS, KS, ZERO, PLUS, seed=7)
        data = cert.to_dict()
        data["verdict"] = False
        with pytest.raises(ValueError, match="verdict"):
            ContradictionCertificate.from_dict(data)

    def test_certificate_type_rejects_nonzero_forcing_probability(self):
        cert = run_contradiction(KS, KS, ZERO, PLUS, seed=7)
        data = cert.to_dict()
        data["forced_zero"][0]["born"] = 1e-6
        with pytest.raises(ValueError, match="zero threshold"):
            ContradictionCertificate.from_dict(data)
