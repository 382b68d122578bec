"""Acceptance suite: one test per criterion, at stated sizes and tolerances.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one pass/fail line
per criterion; the whole module stays within a couple of minutes on a laptop.
"""

import json
import math

import numpy as np
import pytest

from hvnogo.cli import RunConfig, run
from hvnogo.hilbert import (
    ATOL,
    PLUS,
    ZERO,
    born_prob,
    build_pbr_basis,
    computational_basis_observable,
    spin_observable,
)
from hvnogo.models import (
    BellModel,
    FaultyProjectorModel,
    KsModel,
    bloch_from_ket,
    ket_from_bloch,
    tilted_axis,
)
from hvnogo.nogo import run_contradiction, tracking_set_measure, verify_certificate
from hvnogo.ontology import (
    check_assumption_a,
    check_born_reproduction,
    random_ket,
    random_observable,
    tracks,
)

BORN_ANGLES_DEG = (0, 30, 45, 60, 90, 120, 180)
LEMMA_OVERLAPS = (0.1, 0.25, 0.5, 0.75, 0.9)


def state_at_angle(theta):
    return ket_from_bloch(np.array([math.sin(theta), 0.0, math.cos(theta)]))


def report(line):
    print(f"ACCEPTANCE {line}")


def test_criterion_1_pbr_basis_residuals():
    basis = build_pbr_basis(ZERO, PLUS)
    ortho = basis.max_product_overlap()
    gram = basis.gram_deviation()
    assert ortho <= 1e-12
    assert gram <= 1e-12
    report(f"1 PASS: basis residuals ortho={ortho:.2e} gram={gram:.2e} (<= 1e-12)")


def test_criterion_2_born_reproduction():
    ks, bell = KsModel(), BellModel()
    axis = bloch_from_ket(ZERO)

    worst_ks = 0.0
    for deg in BORN_ANGLES_DEG:
        alpha = math.radians(deg)
        obs = spin_observable(tilted_axis(axis, alpha))
        rep = check_born_reproduction(ks, ZERO, obs)
        by_k = {o.eigenvalue: o for o in rep.outcomes}
        analytic = math.cos(alpha / 2) ** 2
        worst_ks = max(worst_ks, abs(by_k[1.0].estimate - analytic),
                       rep.max_abs_deviation())
    rng = np.random.default_rng(2024)
    for _ in range(100):
        psi = random_ket(2, rng)
        obs = random_observable(2, rng)
        worst_ks = max(worst_ks, check_born_reproduction(ks, psi, obs).max_abs_deviation())
    assert worst_ks <= 1e-6

    worst_bell = 0.0
    for deg in BORN_ANGLES_DEG:
        obs = spin_observable(tilted_axis(axis, math.radians(deg)))
        worst_bell = max(worst_bell,
                         check_born_reproduction(bell, ZERO, obs).max_abs_deviation())
    rng = np.random.default_rng(2025)
    for _ in range(100):
        psi = random_ket(2, rng)
        obs = random_observable(2, rng)
        worst_bell = max(worst_bell,
                         check_born_reproduction(bell, psi, obs).max_abs_deviation())
    assert worst_bell <= 1e-12
    report(f"2 PASS: Born reproduction ks<= {worst_ks:.2e} (1e-6), "
           f"bell <= {worst_bell:.2e} (1e-12)")


def test_criterion_3_lemma_measure():
    half = {}
    for model in (KsModel(), BellModel()):
        est = tracking_set_measure(model, ZERO, PLUS, 100_000, 31)
        assert est.within(4.0), (model.name, est)
        assert est.stderr == pytest.approx(0.0016, abs=4e-4)
        half[model.name] = est
        for i, overlap in enumerate(LEMMA_OVERLAPS):
            phi = state_at_angle(2.0 * math.acos(math.sqrt(overlap)))
            sweep_est = tracking_set_measure(model, ZERO, phi, 100_000, 310 + i)
            assert sweep_est.within(4.0), (model.name, overlap, sweep_est)
    report("3 PASS: tracking-set measure at overlap 1/2: "
           f"ks={half['ks'].value:.4f}, bell={half['bell'].value:.4f} "
           f"(target 0.5, 4*stderr bound); 5-point sweep passed for both models")


def test_criterion_4_tracking_necessity():
    for model in (KsModel(), BellModel()):
        lams = model.sample_batch(PLUS, 10_000, 41)
        failures = sum(1 for lam in lams if not tracks(model, lam, PLUS).tracks)
        assert failures == 0, model.name
    report("4 PASS: 10^4 sampled hidden states all track their state, both models")


def test_criterion_5_assumption_a():
    for model in (KsModel(), BellModel()):
        violations = check_assumption_a(model, 10_000, 51)
        assert violations == [], model.name
    faults = check_assumption_a(FaultyProjectorModel(), 200, 52)
    assert len(faults) >= 1
    report(f"5 PASS: zero projector-rule violations in 10^4 trials per model; "
           f"faulty fixture flagged {len(faults)} times")


def test_criterion_6_theorem_certificate(tmp_path):
    for model in (KsModel(), BellModel()):
        cert = run_contradiction(model, model, ZERO, PLUS, seed=61)
        assert cert.verdict
        assert len(cert.forced_zero) == 4
        assert cert.response_sum == 0.0
        path = tmp_path / f"certificate_{model.name}.json"
        path.write_text(json.dumps(cert.to_dict(), indent=2))
        check = verify_certificate(json.loads(path.read_text()))
        assert check["ok"]
        assert check["max_born_recomputed"] <= 1e-12
        assert check["max_born_discrepancy"] <= 1e-12
    report("6 PASS: contradiction certificates verdict=true 4/4 forced, "
           "response_sum=0, file re-verification residuals <= 1e-12 (ks and bell)")


def test_criterion_7_negative_control():
    cert = run_contradiction(KsModel(), KsModel(), ZERO, PLUS, seed=71,
                             observable=computational_basis_observable(4))
    assert cert.verdict is False
    assert cert.response_sum == 1.0
    report("7 PASS: computational-basis observable yields verdict=false "
           f"(unforced outcomes: {sorted(cert.unforced)})")


def test_criterion_8_determinism():
    # every command's report must reproduce its numeric fields byte-for-byte
    # under a fixed seed; only the timing block may differ
    configs = []
    for command, overrides in (
        ("born", {"model": "ks"}),
        ("lemma", {"model": "bell", "overlap": 0.5, "n_samples": 20_000}),
        ("assumption-a", {"model": "ks", "trials": 2000}),
        ("tracking", {"model": "bell", "n_samples": 2000}),
        ("certificate", {"model": "ks"}),
        ("sweep", {"model": "ks", "angles": (0.5, 1.0, 2.0), "n_samples": 5000}),
    ):
        cfg = RunConfig(command=command, seed=88)
        for key, value in overrides.items():
            setattr(cfg, key, value)
        configs.append(cfg)

    for cfg in configs:
        first = run(cfg).to_json(include_timings=False)
        second = run(cfg).to_json(include_timings=False)
        assert first == second, f"report for {cfg.command} not reproducible"
    report("8 PASS: byte-identical JSON numeric fields across consecutive runs "
           "for all six commands")
