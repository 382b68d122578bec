"""Finite-dimensional complex Hilbert-space arithmetic.

Kets and discrete observables are small immutable numpy-backed values and
every operation is a pure function, so everything here is safe to share
across threads. The four-state product-orthogonal basis used by the no-go
pipeline is constructed here as well.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

# Noise floor for double-precision spectral arithmetic; a Born probability at
# or below this is treated as exactly zero.
ATOL = 1e-12

_SQRT2_INV = 2 ** -0.5

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex)
    arr.setflags(write=False)
    return arr


def fix_phase(amplitudes: np.ndarray) -> np.ndarray:
    """Rescale by a global phase so the first nonzero amplitude is real positive."""
    for z in np.asarray(amplitudes, dtype=complex):
        if abs(z) > ATOL:
            return amplitudes * (z.conjugate() / abs(z))
    return amplitudes


@dataclass(frozen=True, eq=False)
class Ket:
    """Unit-norm complex amplitude vector over a finite-dimensional space."""

    amplitudes: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.amplitudes, dtype=complex)
        if arr.ndim != 1 or arr.size < 2:
            raise ValueError(f"ket must be a 1-D vector of dim >= 2, got shape {arr.shape}")
        norm = np.linalg.norm(arr)
        if abs(norm - 1.0) > ATOL:
            raise ValueError(f"ket must be unit norm within {ATOL}, got norm {norm!r}")
        object.__setattr__(self, "amplitudes", _frozen(arr))

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @classmethod
    def normalized(cls, values: Iterable[complex]) -> "Ket":
        """Build a ket from arbitrary nonzero amplitudes by rescaling to unit norm."""
        arr = np.asarray(list(values), dtype=complex)
        norm = np.linalg.norm(arr)
        if norm == 0:
            raise ValueError("cannot normalize the zero vector")
        return cls(arr / norm)

    def __repr__(self) -> str:
        entries = ", ".join(f"{z:.6g}" for z in self.amplitudes)
        return f"Ket([{entries}])"


ZERO = Ket(np.array([1.0, 0.0]))
ONE = Ket(np.array([0.0, 1.0]))
PLUS = Ket(np.array([_SQRT2_INV, _SQRT2_INV]))
MINUS = Ket(np.array([_SQRT2_INV, -_SQRT2_INV]))


@dataclass(frozen=True, eq=False)
class Observable:
    """Discrete Hermitian observable given as a spectral decomposition.

    ``outcomes`` is an ordered sequence of ``(eigenvalue, projector)`` pairs.
    Projectors must be Hermitian idempotents, mutually orthogonal, and sum to
    the identity; eigenvalues must be pairwise distinct.
    """

    outcomes: tuple
    dim: int

    def __post_init__(self):
        outs = []
        for eigval, proj in self.outcomes:
            p = np.asarray(proj, dtype=complex)
            if p.shape != (self.dim, self.dim):
                raise ValueError(f"projector shape {p.shape} does not match dim {self.dim}")
            outs.append((float(eigval), _frozen(p)))
        object.__setattr__(self, "outcomes", tuple(outs))
        self._validate()

    def _validate(self):
        eigvals = [k for k, _ in self.outcomes]
        if len(set(eigvals)) != len(eigvals):
            raise ValueError(f"eigenvalues must be pairwise distinct, got {eigvals}")
        eye = np.eye(self.dim)
        total = np.zeros((self.dim, self.dim), dtype=complex)
        for k, p in self.outcomes:
            if not np.allclose(p, p.conj().T, rtol=0, atol=ATOL):
                raise ValueError(f"projector for eigenvalue {k} is not Hermitian within {ATOL}")
            if not np.allclose(p @ p, p, rtol=0, atol=ATOL):
                raise ValueError(f"projector for eigenvalue {k} is not idempotent within {ATOL}")
            total += p
        for i, (ki, pi) in enumerate(self.outcomes):
            for kj, pj in self.outcomes[i + 1:]:
                if not np.allclose(pi @ pj, 0.0, rtol=0, atol=ATOL):
                    raise ValueError(f"projectors for {ki} and {kj} are not orthogonal within {ATOL}")
        if not np.allclose(total, eye, rtol=0, atol=ATOL):
            raise ValueError(f"projectors must sum to the identity within {ATOL}")

    @property
    def eigenvalues(self) -> tuple:
        return tuple(k for k, _ in self.outcomes)

    def projector(self, eigenvalue: float) -> np.ndarray:
        for k, p in self.outcomes:
            if k == float(eigenvalue):
                return p
        raise ValueError(f"eigenvalue {eigenvalue} is not in the spectrum {self.eigenvalues}")

    def __repr__(self) -> str:
        return f"Observable(dim={self.dim}, eigenvalues={self.eigenvalues})"


def inner(a: Ket, b: Ket) -> complex:
    """Inner product, conjugate-linear in ``a`` and linear in ``b``."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def tensor(a: Ket, b: Ket) -> Ket:
    """Tensor product with Kronecker ordering, ``a``'s index major."""
    return Ket(np.kron(a.amplitudes, b.amplitudes))


def born_prob(observable: Observable, psi: Ket, eigenvalue: float) -> float:
    """Born probability of measuring ``eigenvalue`` on a system prepared in ``psi``."""
    if psi.dim != observable.dim:
        raise ValueError(f"dimension mismatch: ket dim {psi.dim} vs observable dim {observable.dim}")
    proj = observable.projector(eigenvalue)
    p = float(np.real(np.vdot(psi.amplitudes, proj @ psi.amplitudes)))
    return min(1.0, max(0.0, p))


def orthogonal_complement_2d(phi: Ket) -> Ket:
    """The qubit state orthogonal to ``phi``, first nonzero amplitude real positive."""
    if phi.dim != 2:
        raise ValueError(f"expected a qubit ket, got dim {phi.dim}")
    a, b = phi.amplitudes
    perp = np.array([-np.conj(b), np.conj(a)])
    return Ket(fix_phase(perp))


def projector_observable(ket: Ket) -> Observable:
    """Two-outcome observable measuring the rank-1 projector onto ``ket``: 1 hit, 0 miss."""
    p = np.outer(ket.amplitudes, ket.amplitudes.conj())
    return Observable(((1.0, p), (0.0, np.eye(ket.dim) - p)), dim=ket.dim)


def spin_observable(axis: Sequence[float]) -> Observable:
    """Qubit observable with eigenvalues +1/-1 along a unit Bloch axis."""
    m = np.asarray(axis, dtype=float)
    if m.shape != (3,) or abs(np.linalg.norm(m) - 1.0) > 1e-9:
        raise ValueError("axis must be a unit 3-vector")
    sigma = m[0] * PAULI_X + m[1] * PAULI_Y + m[2] * PAULI_Z
    plus = (np.eye(2) + sigma) / 2
    minus = (np.eye(2) - sigma) / 2
    return Observable(((1.0, plus), (-1.0, minus)), dim=2)


def computational_basis_observable(dim: int) -> Observable:
    """Maximal observable in the computational basis, eigenvalues 1..dim."""
    outs = []
    for i in range(dim):
        p = np.zeros((dim, dim), dtype=complex)
        p[i, i] = 1.0
        outs.append((float(i + 1), p))
    return Observable(tuple(outs), dim=dim)


@dataclass(frozen=True, eq=False)
class PbrBasis:
    """Orthonormal dim-4 basis with each element orthogonal to one product state.

    ``kets`` are ordered (xi_11, xi_12, xi_21, xi_22); ket ``xi_xy`` is
    orthogonal to the product of source state ``x`` with source state ``y``.
    """

    kets: tuple
    source_states: tuple

    PAIRS = ((1, 1), (1, 2), (2, 1), (2, 2))

    def __post_init__(self):
        if len(self.kets) != 4 or any(k.dim != 4 for k in self.kets):
            raise ValueError("basis must consist of four dim-4 kets")
        one, two = self.source_states
        if one.dim != 2 or two.dim != 2:
            raise ValueError("source states must be qubit kets")
        ortho = self.max_product_overlap()
        gram = self.gram_deviation()
        if ortho > ATOL or gram > ATOL:
            raise ValueError(
                f"basis invariants violated: max |<xi|x,y>| = {ortho:.3e}, "
                f"Gram deviation = {gram:.3e} (tolerance {ATOL})"
            )

    def max_product_overlap(self) -> float:
        """Largest |<xi_xy|x,y>| over the four pairings; zero for a valid basis."""
        one, two = self.source_states
        states = {1: one, 2: two}
        residual = 0.0
        for ket, (x, y) in zip(self.kets, self.PAIRS):
            residual = max(residual, abs(inner(ket, tensor(states[x], states[y]))))
        return residual

    def gram_deviation(self) -> float:
        """Max entrywise deviation of the basis Gram matrix from the identity."""
        mat = np.array([k.amplitudes for k in self.kets])
        gram = mat.conj() @ mat.T
        return float(np.max(np.abs(gram - np.eye(4))))


def build_pbr_basis(one: Ket, two: Ket) -> PbrBasis:
    """Construct the four-state basis for two qubit preparations with overlap 2^-1/2.

    Only the post-conditions are normative: the returned kets form an
    orthonormal basis of the dim-4 product space and each is orthogonal to its
    paired product state. The construction rephases ``two`` to a real positive
    overlap, builds matched orthocomplements, and symmetrizes.
    """
    if one.dim != 2 or two.dim != 2:
        raise ValueError("preparation states must be qubit kets")
    overlap = inner(one, two)
    if abs(abs(overlap) - _SQRT2_INV) > 1e-9:
        raise ValueError(
            f"|<1|2>| must equal 2^-1/2 within 1e-9 (got {abs(overlap)!r}); "
            "general overlaps are out of scope"
        )

    a = one.amplitudes
    b = two.amplitudes * np.exp(-1j * np.angle(overlap))
    c = float(np.real(np.vdot(a, b)))
    # Orthocomplements phased so <a_perp|b> and <a|b_perp> are real positive,
    # which pins <a_perp|b_perp> = -c and makes the Gram matrix state-independent.
    a_perp = b - c * a
    a_perp = a_perp / np.linalg.norm(a_perp)
    b_perp = a - c * b
    b_perp = b_perp / np.linalg.norm(b_perp)

    def sym(u, v, w, z):
        return fix_phase((np.kron(u, v) + np.kron(w, z)) * _SQRT2_INV)

    kets = (
        Ket(sym(a, a_perp, a_perp, a)),
        Ket(sym(a, b_perp, a_perp, b)),
        Ket(sym(b, a_perp, b_perp, a)),
        Ket(sym(b, b_perp, b_perp, b)),
    )
    try:
        return PbrBasis(kets=kets, source_states=(one, two))
    except ValueError as exc:
        raise RuntimeError(f"basis construction failed to meet invariants: {exc}") from exc


def pbr_observable(basis: PbrBasis) -> Observable:
    """Maximal dim-4 observable with the basis kets as eigenstates, eigenvalues 1..4."""
    outs = []
    for label, ket in enumerate(basis.kets, start=1):
        outs.append((float(label), np.outer(ket.amplitudes, ket.amplitudes.conj())))
    return Observable(tuple(outs), dim=4)
