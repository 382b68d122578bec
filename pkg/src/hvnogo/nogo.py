"""Composition engine: tracking-set measures, paired hidden states, and
contradiction certificates.

The pipeline is: estimate the measure of hidden states that track a second
preparation besides their own; pair such hidden states across two subsystems
(composition is legal only when every claimed tracked state passes its
tracking check); then confront the pair with a maximal product-space
measurement whose outcomes are each Born-forbidden for one tracked product.
If every outcome is forced to zero response the pair cannot respond at all,
and the certificate records the full numeric evidence for independent
re-checking.

Every stage is a pure function of (models, states, seed); Monte Carlo
sampling can be partitioned across workers by seed streams and aggregated
order-independently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hilbert import (
    ATOL,
    Ket,
    Observable,
    PbrBasis,
    build_pbr_basis,
    born_prob,
    fix_phase,
    inner,
    orthogonal_complement_2d,
    pbr_observable,
    projector_observable,
    tensor,
)
from .ontology import (
    BellPoint,
    HiddenState,
    OntologicalModel,
    SeedLike,
    SpherePoint,
    tracks,
)

_SQRT2_INV = 2 ** -0.5

PAIR_LABELS = ((1, 1), (1, 2), (2, 1), (2, 2))


class TrackingError(ValueError):
    """A claimed tracked ket failed its tracking check."""

    def __init__(self, message: str, report):
        super().__init__(message)
        self.report = report


class WitnessSearchError(RuntimeError):
    """Rejection sampling exhausted its budget without finding a witness."""


@dataclass(frozen=True)
class MeasureEstimate:
    """Monte Carlo estimate of the tracking-set measure against its target."""

    value: float
    stderr: float
    n_samples: int
    target: float
    seed: int
    degenerate: bool = False
    set_size: int = 0

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise ValueError(f"value must lie in [0, 1], got {self.value!r}")
        if self.stderr < 0.0:
            raise ValueError("stderr must be nonnegative")

    def within(self, n_stderr: float = 4.0) -> bool:
        return abs(self.value - self.target) <= n_stderr * self.stderr


@dataclass(frozen=True)
class CompositeHiddenState:
    """A pair of subsystem hidden states plus the product states it tracks."""

    left: HiddenState
    right: HiddenState
    tracked_products: tuple

    def __post_init__(self):
        if not self.tracked_products:
            raise ValueError("a composite must track at least one product state")


@dataclass(frozen=True)
class Forcing:
    """Why one outcome is forced to zero response: the tracked product state
    for which its Born probability vanishes."""

    product: tuple
    born: float


@dataclass(frozen=True)
class ForcedOutcome:
    eigenvalue: float
    x: int
    y: int
    born: float


@dataclass(frozen=True)
class ContradictionCertificate:
    """Auditable record that a composed hidden state has no available outcome.

    Self-contained: the prepared states, witnesses, measurement eigenbasis,
    and per-outcome forcing entries carry enough numeric data to recompute
    every residual from scratch (see ``verify_certificate``).
    """

    model_left: str
    model_right: str
    state_one: Ket
    state_two: Ket
    witness_left: HiddenState
    witness_right: HiddenState
    basis_kets: tuple
    eigenvalues: tuple
    max_product_overlap: float
    gram_deviation: float
    forced_zero: tuple
    unforced: tuple
    response_sum: float
    verdict: bool
    seed: int
    samples_used: int

    def __post_init__(self):
        all_forced = len(self.unforced) == 0
        if self.verdict != all_forced:
            raise ValueError("verdict must hold exactly when every outcome is forced")
        for entry in self.forced_zero:
            if entry.born > ATOL:
                raise ValueError(
                    f"forcing entry for outcome {entry.eigenvalue} cites Born "
                    f"probability {entry.born!r} above the zero threshold {ATOL}"
                )

    def to_dict(self) -> dict:
        return {
            "model_left": self.model_left,
            "model_right": self.model_right,
            "state_one": _ket_to_list(self.state_one),
            "state_two": _ket_to_list(self.state_two),
            "witness_left": _hidden_to_dict(self.witness_left),
            "witness_right": _hidden_to_dict(self.witness_right),
            "basis": [_ket_to_list(k) for k in self.basis_kets],
            "eigenvalues": list(self.eigenvalues),
            "max_product_overlap": self.max_product_overlap,
            "gram_deviation": self.gram_deviation,
            "forced_zero": [
                {"eigenvalue": f.eigenvalue, "x": f.x, "y": f.y, "born": f.born}
                for f in self.forced_zero
            ],
            "unforced": list(self.unforced),
            "response_sum": self.response_sum,
            "verdict": self.verdict,
            "seed": self.seed,
            "samples_used": self.samples_used,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ContradictionCertificate":
        return cls(
            model_left=data["model_left"],
            model_right=data["model_right"],
            state_one=_ket_from_list(data["state_one"]),
            state_two=_ket_from_list(data["state_two"]),
            witness_left=_hidden_from_dict(data["witness_left"]),
            witness_right=_hidden_from_dict(data["witness_right"]),
            basis_kets=tuple(_ket_from_list(k) for k in data["basis"]),
            eigenvalues=tuple(float(k) for k in data["eigenvalues"]),
            max_product_overlap=float(data["max_product_overlap"]),
            gram_deviation=float(data["gram_deviation"]),
            forced_zero=tuple(
                ForcedOutcome(float(f["eigenvalue"]), int(f["x"]), int(f["y"]), float(f["born"]))
                for f in data["forced_zero"]
            ),
            unforced=tuple(float(k) for k in data["unforced"]),
            response_sum=float(data["response_sum"]),
            verdict=bool(data["verdict"]),
            seed=int(data["seed"]),
            samples_used=int(data["samples_used"]),
        )


def _ket_to_list(ket: Ket) -> list:
    return [[z.real, z.imag] for z in ket.amplitudes]


def _ket_from_list(pairs) -> Ket:
    return Ket(np.array([complex(re, im) for re, im in pairs]))


def _hidden_to_dict(lam: HiddenState) -> dict:
    if isinstance(lam, SpherePoint):
        return {"type": "sphere", "vec": [float(x) for x in lam.vec]}
    if isinstance(lam, BellPoint):
        return {"type": "bell", "ket": _ket_to_list(lam.ket), "u": lam.u}
    raise TypeError(f"unknown hidden state {type(lam).__name__}")


def _hidden_from_dict(data: dict) -> HiddenState:
    if data["type"] == "sphere":
        return SpherePoint(np.array(data["vec"], dtype=float))
    if data["type"] == "bell":
        return BellPoint(_ket_from_list(data["ket"]), float(data["u"]))
    raise ValueError(f"unknown hidden state type {data['type']!r}")


def tracking_set_measure(
    model: OntologicalModel,
    psi: Ket,
    phi: Ket,
    n: int,
    seed: int,
) -> MeasureEstimate:
    """Estimate the measure of hidden states for ``psi`` that also track ``phi``.

    Samples n hidden states from the density for ``psi`` and counts the
    fraction whose response to the projector onto the complement of ``phi``
    is 0 (the qubit criterion for tracking ``phi``); the target is the squared
    overlap of the two states. Set members are additionally re-verified
    through the tracking predicate. Inputs with squared overlap at 0 or 1 are
    allowed but flagged degenerate.
    """
    if psi.dim != 2 or phi.dim != 2 or model.dim != 2:
        raise ValueError("tracking-set measure is defined on qubit models")
    if n <= 0:
        raise ValueError("n must be positive")
    target = abs(inner(psi, phi)) ** 2
    degenerate = target <= ATOL or target >= 1.0 - ATOL

    perp_obs = projector_observable(orthogonal_complement_2d(phi))
    lams = model.sample_batch(psi, n, seed)
    responses = model.respond_batch(lams, perp_obs)
    in_set = responses == 0.0
    count = int(in_set.sum())
    value = count / n
    stderr = math.sqrt(value * (1.0 - value) / n)

    # re-verify membership: every member through the batched form of the
    # qubit tracking criterion, plus literal tracks() spot checks (capped so
    # n = 1e5 runs stay inside the acceptance budget)
    members = [lam for lam, hit in zip(lams, in_set) if hit]
    if members:
        recheck = model.respond_batch(members, perp_obs)
        bad = recheck == 1.0
        if bad.any() or any(
            not tracks(model, lam, phi).tracks for lam in members[:16]
        ):
            raise RuntimeError(
                "internal inconsistency: a set member failed its tracking check"
            )

    return MeasureEstimate(
        value=value,
        stderr=stderr,
        n_samples=n,
        target=target,
        seed=seed if isinstance(seed, int) else -1,
        degenerate=degenerate,
        set_size=count,
    )


def compose_pi_ctr(left, right) -> CompositeHiddenState:
    """Pair two subsystem hidden states under the tracking composition rule.

    Each side is a triple (model, hidden state, tracked kets). Every claimed
    tracked ket must pass its tracking check, otherwise composition is
    rejected with the failing report attached. The composite tracks the full
    Cartesian product of the two tracked families.
    """
    (left_model, left_lam, left_kets) = left
    (right_model, right_lam, right_kets) = right
    if not left_kets or not right_kets:
        raise ValueError("each side must claim at least one tracked ket")
    for side, model, lam, kets in (
        ("left", left_model, left_lam, left_kets),
        ("right", right_model, right_lam, right_kets),
    ):
        for ket in kets:
            report = tracks(model, lam, ket)
            if not report.tracks:
                raise TrackingError(
                    f"{side} hidden state does not track one of its claimed kets "
                    f"(witnesses: {report.witnesses})",
                    report,
                )
    products = tuple((a, b) for a in left_kets for b in right_kets)
    return CompositeHiddenState(left=left_lam, right=right_lam, tracked_products=products)


def compose_pi_c(left, right) -> CompositeHiddenState:
    """Association-based composition: a thin wrapper over the tracking rule.

    Inputs must be associated (not merely tracked); association implies
    tracking, and the conclusions of the two composition rules coincide.
    """
    for side, (model, lam, kets) in (("left", left), ("right", right)):
        for ket in kets:
            if not model.is_associated(lam, ket):
                raise ValueError(f"{side} hidden state is not associated with a claimed ket")
    return compose_pi_ctr(left, right)


def forced_zero_outcomes(composite: CompositeHiddenState, observable: Observable) -> dict:
    """Outcomes whose response is forced to zero by some tracked product state.

    An outcome is forced exactly when one of the composite's tracked products
    assigns it Born probability at or below the zero threshold; the first such
    product (in tracked order) is recorded as the forcing state.
    """
    if observable.dim != 4:
        raise ValueError(f"expected a dim-4 observable, got dim {observable.dim}")
    forced = {}
    for k in observable.eigenvalues:
        for a, b in composite.tracked_products:
            p = born_prob(observable, tensor(a, b), k)
            if p <= ATOL:
                forced[k] = Forcing(product=(a, b), born=p)
                break
    return forced


def _eigenkets(observable: Observable) -> tuple:
    """Unit eigenvectors of a maximal (all rank-1) observable, phase-fixed."""
    kets = []
    for k, proj in observable.outcomes:
        trace = float(np.real(np.trace(proj)))
        if abs(trace - 1.0) > 1e-9:
            raise ValueError(
                f"certificate requires a maximal measurement; outcome {k} has rank {trace:.3f}"
            )
        col = int(np.argmax(np.real(np.diagonal(proj))))
        v = proj[:, col]
        kets.append(Ket(fix_phase(v / np.linalg.norm(v))))
    return tuple(kets)


def _pairing_residuals(basis_kets, one: Ket, two: Ket) -> tuple:
    states = {1: one, 2: two}
    overlap = 0.0
    for ket, (x, y) in zip(basis_kets, PAIR_LABELS):
        overlap = max(overlap, abs(inner(ket, tensor(states[x], states[y]))))
    mat = np.array([k.amplitudes for k in basis_kets])
    gram = mat.conj() @ mat.T
    return overlap, float(np.max(np.abs(gram - np.eye(len(basis_kets)))))


def _find_witness(model, one: Ket, two: Ket, seed, budget: int):
    """Rejection-sample the tracking set: keep a hidden state for ``one`` whose
    response to the complement projector of ``two`` is 0 and which tracks ``two``."""
    perp_obs = projector_observable(orthogonal_complement_2d(two))
    rng = np.random.default_rng(seed)
    used = 0
    while used < budget:
        batch = min(4096, budget - used)
        lams = model.sample_batch(one, batch, rng)
        responses = model.respond_batch(lams, perp_obs)
        for i in np.flatnonzero(responses == 0.0):
            lam = lams[int(i)]
            if tracks(model, lam, two).tracks:
                return lam, used + int(i) + 1
        used += batch
    raise WitnessSearchError(
        f"no witness found for model {model.name!r} within {budget} samples"
    )


def run_contradiction(
    model_left: OntologicalModel,
    model_right: OntologicalModel,
    one: Ket,
    two: Ket,
    seed: int,
    observable: Observable | None = None,
    budget: int = 100_000,
) -> ContradictionCertificate:
    """Full pipeline: witness search, composition, and the forced-zero audit.

    Requires |<1|2>| = 2^-1/2. With the default measurement (the four-state
    basis built from the preparations) the expected verdict for a
    quantum-consistent deterministic model is True: all four outcomes forced,
    response sum 0. Passing a different dim-4 maximal ``observable`` runs the
    same audit against it (the negative-control path).
    """
    if one.dim != 2 or two.dim != 2:
        raise ValueError("preparation states must be qubit kets")
    overlap = abs(inner(one, two))
    if abs(overlap - _SQRT2_INV) > 1e-9:
        raise ValueError(
            f"|<1|2>| must equal 2^-1/2 within 1e-9, got {overlap!r} "
            "(orthogonal or general-overlap preparations are rejected)"
        )

    left_ss, right_ss = np.random.SeedSequence(seed).spawn(2)
    witness_left, used_left = _find_witness(model_left, one, two, left_ss, budget)
    if model_right == model_left:
        # same model on both slots: reuse the single witness as (lambda, lambda)
        witness_right, used_right = witness_left, 0
    else:
        witness_right, used_right = _find_witness(model_right, one, two, right_ss, budget)

    composite = compose_pi_ctr(
        (model_left, witness_left, (one, two)),
        (model_right, witness_right, (one, two)),
    )

    if observable is None:
        observable = pbr_observable(build_pbr_basis(one, two))
    basis_kets = _eigenkets(observable)
    max_overlap, gram_dev = _pairing_residuals(basis_kets, one, two)

    forced = forced_zero_outcomes(composite, observable)
    label_of = {id(one): 1, id(two): 2}
    entries = []
    for k in observable.eigenvalues:
        if k in forced:
            a, b = forced[k].product
            entries.append(ForcedOutcome(k, label_of[id(a)], label_of[id(b)], forced[k].born))
    unforced = tuple(k for k in observable.eigenvalues if k not in forced)
    response_sum = 0.0 if not unforced else 1.0

    return ContradictionCertificate(
        model_left=model_left.name,
        model_right=model_right.name,
        state_one=one,
        state_two=two,
        witness_left=witness_left,
        witness_right=witness_right,
        basis_kets=basis_kets,
        eigenvalues=tuple(observable.eigenvalues),
        max_product_overlap=max_overlap,
        gram_deviation=gram_dev,
        forced_zero=tuple(entries),
        unforced=unforced,
        response_sum=response_sum,
        verdict=not unforced,
        seed=seed,
        samples_used=used_left + used_right,
    )


def verify_certificate(certificate) -> dict:
    """Independently re-check a certificate from its own stored numbers.

    Accepts a ``ContradictionCertificate`` or its dict form. Rebuilds the
    measurement from the stored eigenbasis, recomputes every forcing entry's
    Born probability, and recomputes the verdict from outcome coverage alone.
    """
    if isinstance(certificate, dict):
        certificate = ContradictionCertificate.from_dict(certificate)

    proj_outs = tuple(
        (k, np.outer(ket.amplitudes, ket.amplitudes.conj()))
        for k, ket in zip(certificate.eigenvalues, certificate.basis_kets)
    )
    observable = Observable(proj_outs, dim=4)
    states = {1: certificate.state_one, 2: certificate.state_two}

    max_born = 0.0
    max_discrepancy = 0.0
    for entry in certificate.forced_zero:
        product = tensor(states[entry.x], states[entry.y])
        p = born_prob(observable, product, entry.eigenvalue)
        max_born = max(max_born, p)
        max_discrepancy = max(max_discrepancy, abs(p - entry.born))

    forced_set = {entry.eigenvalue for entry in certificate.forced_zero}
    verdict_recomputed = forced_set == set(certificate.eigenvalues)
    overlap, gram_dev = _pairing_residuals(
        certificate.basis_kets, certificate.state_one, certificate.state_two
    )

    ok = (
        max_born <= ATOL
        and verdict_recomputed == certificate.verdict
        and certificate.response_sum == (0.0 if verdict_recomputed else 1.0)
        and set(certificate.unforced) == set(certificate.eigenvalues) - forced_set
    )
    return {
        "ok": bool(ok),
        "max_born_recomputed": max_born,
        "max_born_discrepancy": max_discrepancy,
        "verdict_recomputed": verdict_recomputed,
        "max_product_overlap": overlap,
        "gram_deviation": gram_dev,
    }
