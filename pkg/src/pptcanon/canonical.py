"""Canonical block form for states on 2x2x2xN systems.

A canonical form is a quadruple (a, b, c, d) of NxN matrices in which a, b, c
are normal, a commutes with b, c and their adjoints, b commutes with c and its
adjoint, and d is Hermitian PSD. The state they generate is an 8Nx8N Gram
matrix: block (i, j) is sqrt(d) W_i^dag W_j sqrt(d), where W_i is the word in
a, b, c attached to block index i. Block indices follow the composite index of
the three qubit subsystems (index = 4*a_bit + 2*b_bit + c_bit), and the word
carries one factor per zero bit: c for the first subsystem, b for the second,
a for the third, multiplied in that order. Block row 7 of the generated state
therefore reads [sqrt(d) cba sqrt(d) cb ... sqrt(d) a sqrt(d)] up to the
gauge, which is what extraction exploits.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import (
    BlockMismatchError,
    CommutationError,
    DimensionMismatchError,
    NotPositiveSemidefiniteError,
    RankHypothesisError,
)
from .spectral import DEFAULT_TOL, commutator, sqrt_psd
from .tensor import SystemShape, local_transform, psd_check, rank_kernel


class BlockAddress(NamedTuple):
    """Bit triple addressing one block row/column of the 8x8 block grid."""

    a_bit: int
    b_bit: int
    c_bit: int

    @property
    def index(self) -> int:
        return 4 * self.a_bit + 2 * self.b_bit + self.c_bit

    @classmethod
    def from_index(cls, index: int) -> "BlockAddress":
        if not 0 <= index < 8:
            raise DimensionMismatchError(f"block index {index} outside 0..7")
        return cls(index >> 2 & 1, index >> 1 & 1, index & 1)


@dataclass
class CanonicalForm:
    """Matrix quadruple (a, b, c, d) generating a canonical state."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        mats = []
        for name in ("a", "b", "c", "d"):
            m = np.ascontiguousarray(np.asarray(getattr(self, name), dtype=np.complex128))
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise DimensionMismatchError(f"{name} must be square, got shape {m.shape}")
            mats.append(m)
        n = mats[0].shape[0]
        for name, m in zip(("a", "b", "c", "d"), mats):
            if m.shape[0] != n:
                raise DimensionMismatchError(
                    f"{name} has side {m.shape[0]}, expected {n} to match a"
                )
            object.__setattr__(self, name, m)

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @property
    def shape(self) -> SystemShape:
        return SystemShape((2, 2, 2, self.n))


def word_matrix(cf: CanonicalForm, address) -> np.ndarray:
    """Word in (a, b, c) attached to a block address.

    Each zero bit contributes one factor: the first subsystem's bit pulls in
    c, the second b, the third a, multiplied left to right in that order, so
    address (1, 1, 1) gives the identity and (0, 0, 0) gives c b a.
    """
    addr = address if isinstance(address, BlockAddress) else None
    if addr is None:
        if isinstance(address, (int, np.integer)):
            addr = BlockAddress.from_index(int(address))
        else:
            addr = BlockAddress(*address)
    for bit in addr:
        if bit not in (0, 1):
            raise DimensionMismatchError(f"block address bits must be 0 or 1, got {addr}")
    w = np.eye(cf.n, dtype=np.complex128)
    if addr.a_bit == 0:
        w = w @ cf.c
    if addr.b_bit == 0:
        w = w @ cf.b
    if addr.c_bit == 0:
        w = w @ cf.a
    return w


_RELATION_PAIRS = (
    ("[a,a†]", "a", "a†"),
    ("[b,b†]", "b", "b†"),
    ("[c,c†]", "c", "c†"),
    ("[b,a]", "b", "a"),
    ("[b,a†]", "b", "a†"),
    ("[c,a]", "c", "a"),
    ("[c,a†]", "c", "a†"),
    ("[c,b]", "c", "b"),
    ("[c,b†]", "c", "b†"),
)


@dataclass
class CommutationReport:
    """Residuals of every relation a canonical form must satisfy.

    Each commutator residual is compared against tol times the product of the
    operand norms; the Hermiticity residual of d against tol times norm(d).
    """

    residuals: dict[str, float]
    bounds: dict[str, float]
    passed: bool

    def worst(self) -> tuple[str, float, float]:
        """Relation with the largest residual relative to its bound."""
        name = max(
            self.residuals,
            key=lambda k: self.residuals[k] / self.bounds[k] if self.bounds[k] > 0 else 0.0,
        )
        return name, self.residuals[name], self.bounds[name]


def check_commutation(cf: CanonicalForm, tol: float = DEFAULT_TOL) -> CommutationReport:
    """Measure all nine commutation relations among (a, b, c) plus the
    Hermiticity of d."""
    ops = {
        "a": cf.a,
        "b": cf.b,
        "c": cf.c,
        "a†": cf.a.conj().T,
        "b†": cf.b.conj().T,
        "c†": cf.c.conj().T,
    }
    norms = {name: float(np.linalg.norm(m)) for name, m in ops.items()}
    residuals = {}
    bounds = {}
    for relation, x, y in _RELATION_PAIRS:
        residuals[relation] = float(np.linalg.norm(commutator(ops[x], ops[y])))
        bounds[relation] = tol * norms[x] * norms[y]
    residuals["d=d†"] = float(np.linalg.norm(cf.d - cf.d.conj().T))
    bounds["d=d†"] = tol * float(np.linalg.norm(cf.d))
    passed = all(residuals[k] <= bounds[k] for k in residuals)
    return CommutationReport(residuals=residuals, bounds=bounds, passed=passed)


def _require_commutation(cf: CanonicalForm, tol: float) -> None:
    report = check_commutation(cf, tol=tol)
    if not report.passed:
        raise CommutationError(*report.worst())


def build_canonical_222n(cf: CanonicalForm, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Assemble the 8Nx8N state generated by a canonical form.

    The state is returned as the Gram matrix of the eight gauged words
    [W_0 sqrt(d) | ... | W_7 sqrt(d)], which makes it exactly Hermitian and
    PSD with rank equal to rank(d).

    Raises:
        CommutationError: the quadruple violates a required relation at tol.
        NotPositiveSemidefiniteError: d is not PSD at tol.
    """
    _require_commutation(cf, tol)
    root = sqrt_psd(cf.d, tol=tol)
    stacked = np.hstack([word_matrix(cf, i) @ root for i in range(8)])
    return stacked.conj().T @ stacked


def build_canonical_22n(a, b, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Assemble the 4Nx4N state generated by a commuting pair (a, b).

    This is the two-qubit analogue of build_canonical_222n with block row 3
    reading [b a, b, a, 1] and no weight matrix.
    """
    am = np.ascontiguousarray(np.asarray(a, dtype=np.complex128))
    bm = np.ascontiguousarray(np.asarray(b, dtype=np.complex128))
    if am.ndim != 2 or am.shape[0] != am.shape[1] or am.shape != bm.shape:
        raise DimensionMismatchError(
            f"a and b must be square and equal-sized, got {am.shape} and {bm.shape}"
        )
    norm_a = float(np.linalg.norm(am))
    norm_b = float(np.linalg.norm(bm))
    checks = (
        ("[a,a†]", commutator(am, am.conj().T), norm_a * norm_a),
        ("[b,b†]", commutator(bm, bm.conj().T), norm_b * norm_b),
        ("[b,a]", commutator(bm, am), norm_b * norm_a),
        ("[b,a†]", commutator(bm, am.conj().T), norm_b * norm_a),
    )
    for relation, comm, scale in checks:
        res = float(np.linalg.norm(comm))
        if res > tol * scale:
            raise CommutationError(relation, res, tol * scale)
    eye = np.eye(am.shape[0], dtype=np.complex128)
    stacked = np.hstack([bm @ am, bm, am, eye])
    return stacked.conj().T @ stacked


def _block(m: np.ndarray, n: int, i: int, j: int) -> np.ndarray:
    return m[i * n : (i + 1) * n, j * n : (j + 1) * n]


@dataclass
class CanonicalExtraction:
    """Canonical form read off a state, together with the gauge that was
    applied to the last subsystem to expose it.

    ``gauge`` is the inverse PSD square root of ``cf.d``; applying it to the
    input via local_transform yields the state whose blocks are the bare word
    products W_i^dag W_j.
    """

    cf: CanonicalForm
    gauge: np.ndarray


def extract_canonical(rho, n: int, tol: float = DEFAULT_TOL) -> CanonicalExtraction:
    """Recognize a state as canonical and read off its generating quadruple.

    The corner block at block address (1,1,1) is taken as d. Gauging the last
    subsystem by d^(-1/2) normalizes that corner to the identity, after which
    block row 7 holds the words themselves and a, b, c can be read from the
    blocks at column addresses (1,1,0), (1,0,1) and (0,1,1). The candidate is
    then fully verified: the nine commutation relations must hold and all 64
    blocks of the gauged state must match the word products.

    Args:
        rho: Hermitian PSD matrix of side 8*n.
        n: declared rank (side of the canonical form matrices).
        tol: relative tolerance for every check involved.

    Raises:
        RankHypothesisError: rho or its corner block does not have rank n.
        CommutationError: the block reads violate a commutation relation.
        BlockMismatchError: some gauged block deviates from its word product.
        NotPositiveSemidefiniteError: rho is not Hermitian PSD at tol.
    """
    a = np.asarray(rho, dtype=np.complex128)
    if a.ndim != 2 or a.shape != (8 * n, 8 * n):
        raise DimensionMismatchError(f"state has shape {a.shape}, expected {(8 * n, 8 * n)}")
    base = psd_check(a, tol=tol)
    if not base.is_psd:
        raise NotPositiveSemidefiniteError(
            f"state is not Hermitian PSD (hermitian={base.is_hermitian}, "
            f"min eigenvalue={base.min_eigenvalue:.3e})"
        )
    rank = rank_kernel(a, tol=tol).rank
    if rank != n:
        raise RankHypothesisError(f"state has rank {rank}, expected {n}")
    corner = np.ascontiguousarray(_block(a, n, 7, 7))
    corner_rank = rank_kernel(corner, tol=tol).rank
    if corner_rank != n:
        raise RankHypothesisError(f"corner block has rank {corner_rank}, expected {n}")

    gauge = sqrt_psd(corner, tol=tol, inverse=True)
    eye2 = np.eye(2, dtype=np.complex128)
    gauged = local_transform(a, SystemShape((2, 2, 2, n)), (eye2, eye2, eye2, gauge), tol=tol)

    cf = CanonicalForm(
        a=_block(gauged, n, 7, 6),
        b=_block(gauged, n, 7, 5),
        c=_block(gauged, n, 7, 3),
        d=corner,
    )
    _require_commutation(cf, tol)

    words = [word_matrix(cf, i) for i in range(8)]
    bound = tol * float(np.linalg.norm(gauged))
    mismatches = []
    for i in range(8):
        for j in range(8):
            res = float(np.linalg.norm(_block(gauged, n, i, j) - words[i].conj().T @ words[j]))
            if res > bound:
                mismatches.append(((i, j), res))
    if mismatches:
        mismatches.sort(key=lambda item: -item[1])
        raise BlockMismatchError(mismatches, bound)
    return CanonicalExtraction(cf=cf, gauge=gauge)


@dataclass
class KernelFamilyReport:
    """Residuals of the seven structural kernel families of a canonical state.

    Each family contributes N vectors supported on one block address plus the
    reference address (1,1,1); residuals are reported relative to
    norm(rho) * norm(vector). ``span_dimension`` is the numerical rank of the
    stacked 7N vectors.
    """

    residuals: dict[int, float]
    max_residual: float
    span_dimension: int
    passed: bool


def verify_kernel_family(rho, cf: CanonicalForm, tol: float = DEFAULT_TOL) -> KernelFamilyReport:
    """Check that the seven word families annihilate the state.

    For block address t < 7 with word W the family is |t>|h> - |7> M|h> over
    basis vectors h, where M = d^(-1/2) W d^(1/2) accounts for the weight
    gauge; with d = 1 this reduces to the bare words. A valid canonical state
    of rank N is annihilated by all 7N vectors and they span its full kernel.

    Raises:
        SingularMatrixError: d is singular, so the gauge does not exist.
    """
    n = cf.n
    a = np.asarray(rho, dtype=np.complex128)
    if a.shape != (8 * n, 8 * n):
        raise DimensionMismatchError(f"state has shape {a.shape}, expected {(8 * n, 8 * n)}")
    root = sqrt_psd(cf.d, tol=tol)
    root_inv = sqrt_psd(cf.d, tol=tol, inverse=True)
    fro = float(np.linalg.norm(a))
    eye = np.eye(n, dtype=np.complex128)
    residuals: dict[int, float] = {}
    stacked = np.zeros((8 * n, 7 * n), dtype=np.complex128)
    for t in range(7):
        family = np.zeros((8 * n, n), dtype=np.complex128)
        family[t * n : (t + 1) * n] = eye
        family[7 * n :] = -(root_inv @ word_matrix(cf, t) @ root)
        stacked[:, t * n : (t + 1) * n] = family
        image = a @ family
        col_norms = np.linalg.norm(family, axis=0)
        image_norms = np.linalg.norm(image, axis=0)
        residuals[t] = float(np.max(image_norms / (fro * col_norms))) if fro > 0 else 0.0
    gram = stacked.conj().T @ stacked
    span = rank_kernel(gram, tol=tol).rank
    max_residual = max(residuals.values())
    return KernelFamilyReport(
        residuals=residuals,
        max_residual=max_residual,
        span_dimension=span,
        passed=max_residual <= tol and span == 7 * n,
    )
