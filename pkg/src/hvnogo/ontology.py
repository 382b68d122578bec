"""Ontological-model framework: hidden states, response functions, and checkers.

A model assigns each preparable quantum state a family of complete hidden
states with a probability density, plus a deterministic response function
mapping (hidden state, observable) to an eigenvalue. The checkers here probe
the three structural requirements a model must meet: reproducing Born
statistics, tracking every state it is associated with, and the one-way
projector rule (if the spectral projector for an eigenvalue responds 0, the
observable must not take that eigenvalue).

Models are immutable and sampling takes explicit seeds, so parallel callers
can partition the seed space; nothing here touches global random state.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .hilbert import ATOL, Ket, Observable, orthogonal_complement_2d, projector_observable

SeedLike = Union[int, np.random.SeedSequence, np.random.Generator]


def as_rng(seed: SeedLike) -> np.random.Generator:
    """Coerce an int, SeedSequence, or Generator to a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True, eq=False)
class SpherePoint:
    """Hidden state living on the unit sphere."""

    vec: np.ndarray

    def __post_init__(self):
        arr = np.array(self.vec, dtype=float)
        if arr.shape != (3,):
            raise ValueError(f"expected a 3-vector, got shape {arr.shape}")
        norm = math.sqrt(arr[0] ** 2 + arr[1] ** 2 + arr[2] ** 2)
        if abs(norm - 1.0) > ATOL:
            raise ValueError(f"sphere point must be unit norm within {ATOL}, got {norm!r}")
        arr.setflags(write=False)
        object.__setattr__(self, "vec", arr)


@dataclass(frozen=True, eq=False)
class BellPoint:
    """Hidden state carrying the prepared ket itself plus a unit-interval value."""

    ket: Ket
    u: float

    def __post_init__(self):
        if not 0.0 <= self.u <= 1.0:
            raise ValueError(f"u must lie in [0, 1], got {self.u!r}")


HiddenState = Union[SpherePoint, BellPoint]


@dataclass(frozen=True)
class TrackingReport:
    """Outcome of a tracking check for one (hidden state, quantum state) pair."""

    tracks: bool
    tested_observables: int
    witnesses: tuple = ()
    method: str = "analytic-2d"

    def __post_init__(self):
        if self.tracks != (len(self.witnesses) == 0):
            raise ValueError("tracks must be true exactly when the witness list is empty")


class OntologicalModel(ABC):
    """Deterministic hidden-variables model for systems of a fixed dimension.

    Response functions never read a quantum state except what is stored
    inside the hidden state itself, and always return an eigenvalue of the
    measured observable (responses are 0/1-valued, so exactly one outcome
    fires per call).
    """

    dim: int
    name: str

    @abstractmethod
    def is_associated(self, lam: HiddenState, psi: Ket) -> bool:
        """Whether preparing ``psi`` can produce ``lam``."""

    @abstractmethod
    def density(self, lam: HiddenState, psi: Ket) -> float:
        """Probability density of ``lam`` under preparation of ``psi``.

        Densities are with respect to the model's own parameterization of its
        hidden-state space (e.g. uniform sphere measure, Lebesgue on [0, 1]).
        """

    @abstractmethod
    def sample(self, psi: Ket, seed: SeedLike) -> HiddenState:
        """Draw one hidden state from the density for ``psi``."""

    @abstractmethod
    def respond(self, lam: HiddenState, observable: Observable) -> float:
        """Deterministic measurement response: the eigenvalue obtained."""

    def sample_batch(self, psi: Ket, n: int, seed: SeedLike) -> list:
        rng = as_rng(seed)
        return [self.sample(psi, rng) for _ in range(n)]

    def respond_batch(self, lams: Sequence[HiddenState], observable: Observable) -> np.ndarray:
        return np.array([self.respond(lam, observable) for lam in lams])

    def born_quadrature(self, psi: Ket, observable: Observable) -> dict:
        """Per-eigenvalue (estimate, error bound) for the response integral."""
        raise NotImplementedError(f"{self.name} does not provide a quadrature scheme")

    def __repr__(self) -> str:
        return f"{type(self).__name__}(dim={self.dim})"


def random_ket(dim: int, rng: np.random.Generator) -> Ket:
    """Haar-random ket (rotation-invariant), phase-fixed for determinism."""
    from .hilbert import fix_phase

    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return Ket(fix_phase(z / np.linalg.norm(z)))


def random_observable(dim: int, rng: np.random.Generator) -> Observable:
    """Maximal observable on a Haar-random orthonormal frame, eigenvalues 1..dim."""
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    q = q * (np.diagonal(r) / np.abs(np.diagonal(r)))
    outs = []
    for i in range(dim):
        v = q[:, i]
        outs.append((float(i + 1), np.outer(v, v.conj())))
    return Observable(tuple(outs), dim=dim)


def respond_distribution(model: OntologicalModel, lam: HiddenState, observable: Observable) -> dict:
    """Response probabilities over the spectrum; deterministic, so one 1 and rest 0."""
    if observable.dim != model.dim:
        raise ValueError(f"observable dim {observable.dim} does not match model dim {model.dim}")
    winner = model.respond(lam, observable)
    dist = {k: (1 if k == winner else 0) for k in observable.eigenvalues}
    if sum(dist.values()) != 1:
        raise RuntimeError(f"response of {model.name} did not land in the spectrum: {winner}")
    return dist


def tracks(
    model: OntologicalModel,
    lam: HiddenState,
    psi: Ket,
    n_observables: int = 64,
    seed: SeedLike = 0,
) -> TrackingReport:
    """Check that every Born-zero outcome for ``psi`` has zero response under ``lam``.

    For qubits this is decidable: an outcome has Born probability zero exactly
    when its projector is the rank-1 projector onto the state orthogonal to
    ``psi``, so one response settles the predicate (method ``analytic-2d``).
    In higher dimensions a sampled family of annihilating projectors is used
    instead: sound for refutation, sampled for confirmation.
    """
    if psi.dim != model.dim:
        raise ValueError(f"state dim {psi.dim} does not match model dim {model.dim}")

    if model.dim == 2:
        perp = orthogonal_complement_2d(psi)
        obs = projector_observable(perp)
        witnesses = ()
        if model.respond(lam, obs) == 1.0:
            witnesses = ((_describe_projector(perp), 1.0),)
        return TrackingReport(
            tracks=not witnesses,
            tested_observables=1,
            witnesses=witnesses,
            method="analytic-2d",
        )

    rng = as_rng(seed)
    witnesses = []
    for _ in range(n_observables):
        chi = _random_ket_orthogonal_to(psi, rng)
        obs = projector_observable(chi)
        if model.respond(lam, obs) == 1.0:
            witnesses.append((_describe_projector(chi), 1.0))
    return TrackingReport(
        tracks=not witnesses,
        tested_observables=n_observables,
        witnesses=tuple(witnesses),
        method="sampled",
    )


def _random_ket_orthogonal_to(psi: Ket, rng: np.random.Generator) -> Ket:
    while True:
        z = rng.standard_normal(psi.dim) + 1j * rng.standard_normal(psi.dim)
        z = z - np.vdot(psi.amplitudes, z) * psi.amplitudes
        norm = np.linalg.norm(z)
        if norm > 1e-6:
            from .hilbert import fix_phase

            return Ket(fix_phase(z / norm))


def _describe_projector(ket: Ket) -> str:
    entries = ", ".join(f"{z.real:.12g}{z.imag:+.12g}j" for z in ket.amplitudes)
    return f"rank-1 projector onto [{entries}]"


@dataclass(frozen=True)
class OutcomeEstimate:
    """One outcome's response-integral estimate against its Born value."""

    eigenvalue: float
    estimate: float
    error: float
    born: float
    deviation: float


@dataclass(frozen=True)
class BornReport:
    scheme: str
    outcomes: tuple
    n_samples: int | None = None
    seed: int | None = None

    def max_abs_deviation(self) -> float:
        return max(abs(o.deviation) for o in self.outcomes)


def check_born_reproduction(
    model: OntologicalModel,
    psi: Ket,
    observable: Observable,
    scheme: str = "quadrature",
    n: int | None = None,
    seed: SeedLike | None = None,
) -> BornReport:
    """Estimate the per-outcome response integral and compare with Born values.

    ``scheme`` is ``"quadrature"`` (model-supplied, deterministic error bound)
    or ``"montecarlo"`` (requires ``n`` and ``seed``; the reported error is the
    sample standard deviation over sqrt(n)).
    """
    from .hilbert import born_prob

    if psi.dim != observable.dim or psi.dim != model.dim:
        raise ValueError("model, state, and observable dimensions must agree")

    if scheme == "quadrature":
        estimates = model.born_quadrature(psi, observable)
        outs = []
        for k in observable.eigenvalues:
            est, err = estimates[k]
            born = born_prob(observable, psi, k)
            outs.append(OutcomeEstimate(k, est, err, born, est - born))
        return BornReport(scheme="quadrature", outcomes=tuple(outs))

    if scheme == "montecarlo":
        if not n:
            raise ValueError("montecarlo scheme requires n >= 1 samples")
        if seed is None:
            raise ValueError("montecarlo scheme requires a seed")
        lams = model.sample_batch(psi, n, seed)
        responses = model.respond_batch(lams, observable)
        outs = []
        for k in observable.eigenvalues:
            hits = (responses == k).astype(float)
            est = float(hits.mean())
            stderr = float(np.std(hits, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
            born = born_prob(observable, psi, k)
            outs.append(OutcomeEstimate(k, est, stderr, born, est - born))
        return BornReport(
            scheme="montecarlo",
            outcomes=tuple(outs),
            n_samples=n,
            seed=seed if isinstance(seed, int) else None,
        )

    raise ValueError(f"unknown scheme {scheme!r}; expected 'quadrature' or 'montecarlo'")


@dataclass(frozen=True)
class AssumptionViolation:
    """Record of a projector-rule breach: the projector responded 0 yet the
    observable still returned its eigenvalue."""

    trial: int
    psi: Ket
    lam: HiddenState
    observable: Observable
    eigenvalue: float


def check_assumption_a(model: OntologicalModel, trials: int, seed: SeedLike) -> list:
    """Randomized search for projector-rule violations; empty list means none found.

    Each trial draws a random state, a hidden state from its density, and a
    random maximal observable, then measures every spectral projector as its
    own two-outcome observable and cross-checks against the full response.
    """
    if trials <= 0:
        raise ValueError("trials must be positive")
    rng = as_rng(seed)
    eye = np.eye(model.dim)
    violations = []
    for trial in range(trials):
        psi = random_ket(model.dim, rng)
        lam = model.sample(psi, rng)
        obs = random_observable(model.dim, rng)
        winner = model.respond(lam, obs)
        for k, proj in obs.outcomes:
            proj_obs = Observable(((1.0, proj), (0.0, eye - proj)), dim=model.dim)
            if model.respond(lam, proj_obs) == 0.0 and winner == k:
                violations.append(AssumptionViolation(trial, psi, lam, obs, k))
    return violations
