"""The two deterministic hidden-variables models shipped with the toolkit.

``KsModel`` is the hemisphere model for qubits: a hidden state is a point on
the unit sphere, preparation of a state populates the open hemisphere around
its Bloch vector with density (lambda . n)/pi, and a spin measurement fires
the outcome whose axis has positive dot product with lambda.

``BellModel`` is the ontic interval model: a hidden state carries the
prepared ket itself plus a uniform value u in [0, 1], and measurement
outcomes are read off a partition of [0, 1] into intervals whose lengths are
Born probabilities. Distinct quantum states never share a hidden state, which
is what makes this model the interesting stress case for composition.

Both models are stateless rule sets; samplers take explicit seeds.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate

from .hilbert import Ket, Observable, fix_phase, inner
from .ontology import BellPoint, OntologicalModel, SeedLike, SpherePoint, as_rng

_TAU = 2.0 * math.pi


def bloch_from_ket(psi: Ket) -> np.ndarray:
    """Bloch vector (x, y, z) of a qubit state."""
    if psi.dim != 2:
        raise ValueError(f"expected a qubit ket, got dim {psi.dim}")
    a, b = psi.amplitudes
    cross = np.conj(a) * b
    return np.array([2.0 * cross.real, 2.0 * cross.imag, abs(a) ** 2 - abs(b) ** 2])


def ket_from_bloch(n: np.ndarray) -> Ket:
    """Qubit state with the given unit Bloch vector, standard phase convention."""
    n = np.asarray(n, dtype=float)
    if n.shape != (3,) or abs(np.linalg.norm(n) - 1.0) > 1e-9:
        raise ValueError("Bloch vector must be a unit 3-vector")
    theta = math.acos(min(1.0, max(-1.0, n[2])))
    phi = math.atan2(n[1], n[0])
    amps = np.array([math.cos(theta / 2), math.sin(theta / 2) * np.exp(1j * phi)])
    return Ket(fix_phase(amps))


def orthonormal_frame(n: np.ndarray) -> tuple:
    """Deterministic right-handed frame (e1, e2) completing the unit vector n."""
    n = np.asarray(n, dtype=float)
    helper = np.array([0.0, 0.0, 1.0]) if abs(n[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    e1 = np.cross(helper, n)
    e1 = e1 / np.linalg.norm(e1)
    e2 = np.cross(n, e1)
    return e1, e2


def tilted_axis(n: np.ndarray, alpha: float) -> np.ndarray:
    """Unit axis at polar angle ``alpha`` from ``n``, in a deterministic plane."""
    e1, _ = orthonormal_frame(n)
    return math.cos(alpha) * np.asarray(n, dtype=float) + math.sin(alpha) * e1


def _bloch_axis(proj: np.ndarray) -> np.ndarray:
    """Bloch axis of a rank-1 qubit projector P = (I + m.sigma)/2."""
    z01 = proj[0, 1]
    return np.array([2.0 * z01.real, -2.0 * z01.imag, (proj[0, 0] - proj[1, 1]).real])


def _rank(proj: np.ndarray) -> int:
    return int(round(float(np.real(np.trace(proj)))))


def _lex_orientation(m: np.ndarray, tol: float = 1e-9) -> int:
    """Sign of the first component of m that is decisively nonzero; antipodal-odd."""
    for x in m:
        if x > tol:
            return 1
        if x < -tol:
            return -1
    return 0


def _prob(proj: np.ndarray, amplitudes: np.ndarray) -> float:
    p = float(np.real(np.vdot(amplitudes, proj @ amplitudes)))
    return min(1.0, max(0.0, p))


def _split_qubit_outcomes(observable: Observable):
    """Classify a qubit observable into rank-1 outcomes plus an optional full-rank one."""
    rank1 = []
    full = None
    for k, proj in observable.outcomes:
        r = _rank(proj)
        if r == 1:
            rank1.append((k, proj, _bloch_axis(proj)))
        elif r == 2:
            full = k
        # rank-0 outcomes are possible but can never fire
    return rank1, full


def ks_sample(psi: Ket, seed: SeedLike) -> SpherePoint:
    """Draw a sphere point with density (lambda . n)/pi on the hemisphere around psi.

    Inverse-CDF in the polar angle: cos(theta) = sqrt(v) with v uniform,
    azimuth uniform, frame aligned to the Bloch vector of psi.
    """
    rng = as_rng(seed)
    n = bloch_from_ket(psi)
    e1, e2 = orthonormal_frame(n)
    v = rng.random()
    while v == 0.0:  # keep the support strictly inside the open hemisphere
        v = rng.random()
    cos_t = math.sqrt(v)
    sin_t = math.sqrt(1.0 - v)
    phi = _TAU * rng.random()
    vec = cos_t * n + sin_t * (math.cos(phi) * e1 + math.sin(phi) * e2)
    return SpherePoint(vec)


def bell_sample(psi: Ket, seed: SeedLike) -> BellPoint:
    """Draw the ontic hidden state (psi itself, u uniform on the unit interval)."""
    rng = as_rng(seed)
    return BellPoint(psi, float(rng.random()))


class KsModel(OntologicalModel):
    """Hemisphere model for qubits; overlapping supports for nonorthogonal states."""

    dim = 2
    name = "ks"

    def is_associated(self, lam, psi: Ket) -> bool:
        self._check_payload(lam)
        return float(lam.vec @ bloch_from_ket(psi)) > 0.0

    def density(self, lam, psi: Ket) -> float:
        self._check_payload(lam)
        d = float(lam.vec @ bloch_from_ket(psi))
        return d / math.pi if d > 0.0 else 0.0

    def sample(self, psi: Ket, seed: SeedLike) -> SpherePoint:
        return ks_sample(psi, seed)

    def sample_batch(self, psi: Ket, n: int, seed: SeedLike) -> list:
        rng = as_rng(seed)
        nvec = bloch_from_ket(psi)
        e1, e2 = orthonormal_frame(nvec)
        v = rng.random(n)
        while True:
            bad = v == 0.0
            if not bad.any():
                break
            v[bad] = rng.random(int(bad.sum()))
        cos_t = np.sqrt(v)
        sin_t = np.sqrt(1.0 - v)
        phi = _TAU * rng.random(n)
        vecs = (
            np.outer(cos_t, nvec)
            + np.outer(sin_t * np.cos(phi), e1)
            + np.outer(sin_t * np.sin(phi), e2)
        )
        return [SpherePoint(row) for row in vecs]

    def respond(self, lam, observable: Observable) -> float:
        self._check_payload(lam)
        if observable.dim != 2:
            raise ValueError(f"KsModel governs dim 2, got observable of dim {observable.dim}")
        rank1, full = _split_qubit_outcomes(observable)
        if not rank1:
            return full
        (k1, _, m1), (k2, _, m2) = rank1
        d1 = float(lam.vec @ m1)
        d2 = float(lam.vec @ m2)
        if d1 > d2:
            return k1
        if d2 > d1:
            return k2
        # boundary set lambda.m = 0 has measure zero; break the tie by axis
        # orientation so the projector rule stays exact there
        return k1 if _lex_orientation(m1) > 0 else k2

    def respond_batch(self, lams, observable: Observable) -> np.ndarray:
        rank1, full = _split_qubit_outcomes(observable)
        if not rank1:
            return np.full(len(lams), full)
        (k1, _, m1), (k2, _, m2) = rank1
        mat = np.array([lam.vec for lam in lams])
        d1 = mat @ m1
        d2 = mat @ m2
        out = np.where(d1 > d2, k1, k2)
        ties = d1 == d2
        if ties.any():
            out[ties] = k1 if _lex_orientation(m1) > 0 else k2
        return out

    def born_quadrature(self, psi: Ket, observable: Observable) -> dict:
        """Response integral over the hemisphere, one outcome at a time.

        The azimuthal direction is resolved exactly into arcs on which the
        response is constant (the response itself is evaluated at each arc
        midpoint), leaving a smooth 1-D polar integral handled adaptively.
        """
        nvec = bloch_from_ket(psi)
        e1, e2 = orthonormal_frame(nvec)
        rank1, full = _split_qubit_outcomes(observable)
        results = {}
        if full is not None:
            results[full] = (1.0, 0.0) if not rank1 else (0.0, 0.0)
        for k, _, m in rank1:
            mz = float(m @ nvec)
            mx = float(m @ e1)
            my = float(m @ e2)
            alpha = math.atan2(math.hypot(mx, my), mz)
            phi0 = math.atan2(my, mx)

            def lam_at(theta, phi):
                vec = (
                    math.cos(theta) * nvec
                    + math.sin(theta) * (math.cos(phi) * e1 + math.sin(phi) * e2)
                )
                return SpherePoint(vec / np.linalg.norm(vec))

            def integrand(theta, k=k, alpha=alpha, phi0=phi0):
                if theta <= 0.0:
                    theta = 1e-12
                a_part = math.cos(theta) * math.cos(alpha)
                b_part = math.sin(theta) * math.sin(alpha)
                arcs = []
                if b_part < 1e-15:
                    arcs.append((_TAU, 0.0))
                else:
                    x = -a_part / b_part
                    if x <= -1.0:
                        arcs.append((_TAU, phi0))
                    elif x >= 1.0:
                        arcs.append((_TAU, phi0 + math.pi))
                    else:
                        phic = math.acos(x)
                        arcs.append((2.0 * phic, phi0))
                        arcs.append((_TAU - 2.0 * phic, phi0 + math.pi))
                width = 0.0
                for measure, midpoint in arcs:
                    if measure <= 0.0:
                        continue
                    if self.respond(lam_at(theta, midpoint), observable) == k:
                        width += measure
                return (math.cos(theta) / math.pi) * width * math.sin(theta)

            kinks = [t for t in (math.pi / 2 - alpha, alpha - math.pi / 2) if 0.0 < t < math.pi / 2]
            est, err = integrate.quad(
                integrand, 0.0, math.pi / 2, points=sorted(kinks) or None,
                limit=200, epsabs=1e-10, epsrel=1e-10,
            )
            results[k] = (min(1.0, max(0.0, est)), err)
        return results

    @staticmethod
    def _check_payload(lam):
        if not isinstance(lam, SpherePoint):
            raise TypeError(f"KsModel expects SpherePoint hidden states, got {type(lam).__name__}")

    def __eq__(self, other):
        return type(other) is KsModel

    def __hash__(self):
        return hash(type(self))


class BellModel(OntologicalModel):
    """Ontic interval model; no two distinct quantum states share a hidden state."""

    name = "bell"

    def __init__(self, dim: int = 2):
        if dim < 2:
            raise ValueError("BellModel requires dim >= 2")
        self.dim = dim

    def is_associated(self, lam, psi: Ket) -> bool:
        self._check_payload(lam)
        # ket equality up to global phase
        return abs(inner(lam.ket, psi)) > 1.0 - 1e-12

    def density(self, lam, psi: Ket) -> float:
        return 1.0 if self.is_associated(lam, psi) else 0.0

    def sample(self, psi: Ket, seed: SeedLike) -> BellPoint:
        self._check_dim(psi.dim)
        return bell_sample(psi, seed)

    def sample_batch(self, psi: Ket, n: int, seed: SeedLike) -> list:
        self._check_dim(psi.dim)
        rng = as_rng(seed)
        return [BellPoint(psi, float(u)) for u in rng.random(n)]

    def respond(self, lam, observable: Observable) -> float:
        self._check_payload(lam)
        self._check_dim(observable.dim)
        for lo, hi, k in self._interval_layout(lam.ket, observable):
            if lo <= lam.u < hi:
                return k
        # u == 1 (or accumulated rounding): the last interval is closed
        return self._interval_layout(lam.ket, observable)[-1][2]

    def respond_batch(self, lams, observable: Observable) -> np.ndarray:
        if not len(lams):
            return np.array([])
        first = lams[0].ket
        if not all(lam.ket is first for lam in lams):
            return super().respond_batch(lams, observable)
        layout = self._interval_layout(first, observable)
        his = np.array([hi for _, hi, _ in layout])
        ks = np.array([k for _, _, k in layout])
        us = np.array([lam.u for lam in lams])
        idx = np.searchsorted(his, us, side="right")
        idx = np.minimum(idx, len(ks) - 1)
        return ks[idx]

    def born_quadrature(self, psi: Ket, observable: Observable) -> dict:
        """Exact integral over u: sum of interval lengths, response checked per segment."""
        self._check_dim(psi.dim)
        self._check_dim(observable.dim)
        results = {k: [0.0, 0.0] for k in observable.eigenvalues}
        for lo, hi, _ in self._interval_layout(psi, observable):
            if hi <= lo:
                continue
            k = self.respond(BellPoint(psi, (lo + hi) / 2), observable)
            results[k][0] += hi - lo
        return {k: (v[0], v[1]) for k, v in results.items()}

    def _interval_layout(self, ket: Ket, observable: Observable) -> list:
        """Consecutive right-open intervals of Born length, one per outcome.

        For qubits the layout is anchored by axis orientation: the outcome
        whose projector axis is lexicographically positive always owns the
        leading interval, so the interval a projector occupies is the same
        whether it is measured standalone or inside a larger observable (this
        is what keeps the projector rule exact). In higher dimensions the
        intervals follow descending eigenvalue order.
        """
        amps = ket.amplitudes
        if self.dim == 2:
            rank1, full = _split_qubit_outcomes(observable)
            if not rank1:
                return [(0.0, 1.0, full)]
            (ka, pa, ma), (kb, pb, _) = rank1
            if _lex_orientation(ma) > 0:
                first_k, first_p, second_k = ka, pa, kb
            else:
                first_k, first_p, second_k = kb, pb, ka
            p_first = _prob(first_p, amps)
            return [(0.0, p_first, first_k), (p_first, 1.0, second_k)]

        ordered = sorted(observable.outcomes, key=lambda item: -item[0])
        layout = []
        cursor = 0.0
        for k, proj in ordered:
            p = _prob(proj, amps)
            layout.append((cursor, cursor + p, k))
            cursor += p
        lo, _, k = layout[-1]
        layout[-1] = (lo, 1.0, k)
        return layout

    def _check_payload(self, lam):
        if not isinstance(lam, BellPoint):
            raise TypeError(f"BellModel expects BellPoint hidden states, got {type(lam).__name__}")
        self._check_dim(lam.ket.dim)

    def _check_dim(self, dim: int):
        if dim != self.dim:
            raise ValueError(f"BellModel instance governs dim {self.dim}, got {dim}")

    def __eq__(self, other):
        return type(other) is BellModel and other.dim == self.dim

    def __hash__(self):
        return hash((type(self), self.dim))


class FaultyProjectorModel(KsModel):
    """Deliberately broken variant: inverts responses to standalone projector
    measurements (eigenvalues {1, 0}), for validating violation detectors."""

    name = "faulty"

    def respond(self, lam, observable: Observable) -> float:
        value = super().respond(lam, observable)
        if set(observable.eigenvalues) == {1.0, 0.0}:
            return 1.0 - value
        return value

    def respond_batch(self, lams, observable: Observable) -> np.ndarray:
        values = super().respond_batch(lams, observable)
        if set(observable.eigenvalues) == {1.0, 0.0}:
            return 1.0 - values
        return values

    def __eq__(self, other):
        return type(other) is FaultyProjectorModel

    def __hash__(self):
        return hash(type(self))


def get_model(name: str, dim: int = 2) -> OntologicalModel:
    """Look up a shipped model by name ("ks" or "bell")."""
    if name == "ks":
        if dim != 2:
            raise ValueError("the ks model governs dim 2 only")
        return KsModel()
    if name == "bell":
        return BellModel(dim=dim)
    raise ValueError(f"unknown model {name!r}; expected 'ks' or 'bell'")
