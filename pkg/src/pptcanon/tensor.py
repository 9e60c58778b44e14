"""Multipartite operators on tensor products of finite-dimensional systems.

Subsystem 0 is the leftmost tensor factor and varies slowest: the composite
index of basis state ``|i_0 ... i_{k-1}>`` is ``sum(i_s * prod(dims[s+1:]))``,
which is numpy's row-major convention, so a state on ``dims`` reshapes to a
``dims + dims`` tensor whose first half indexes rows and second half columns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DimensionMismatchError,
    NotPositiveSemidefiniteError,
    SingularMatrixError,
)
from .spectral import DEFAULT_TOL, hermitian_eig


@dataclass(frozen=True)
class SystemShape:
    """Ordered subsystem dimensions of a composite system."""

    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims:
            raise DimensionMismatchError("shape needs at least one subsystem")
        if any(d < 1 for d in dims):
            raise DimensionMismatchError(f"subsystem dimensions must be positive: {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def total(self) -> int:
        return math.prod(self.dims)

    def __len__(self) -> int:
        return len(self.dims)

    def drop(self, subsystem: int) -> "SystemShape":
        """Shape with one subsystem removed (after projecting it out)."""
        if not 0 <= subsystem < len(self.dims):
            raise DimensionMismatchError(f"no subsystem {subsystem} in {self.dims}")
        rest = self.dims[:subsystem] + self.dims[subsystem + 1 :]
        if not rest:
            return SystemShape((1,))
        return SystemShape(rest)


def _coerce_shape(shape) -> SystemShape:
    if isinstance(shape, SystemShape):
        return shape
    return SystemShape(tuple(shape))


def _as_matrix(m, what: str = "matrix") -> np.ndarray:
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise DimensionMismatchError(f"{what} must be two-dimensional, got shape {a.shape}")
    return a


def _as_state(rho, shape: SystemShape) -> np.ndarray:
    a = _as_matrix(rho, "state")
    side = shape.total
    if a.shape != (side, side):
        raise DimensionMismatchError(
            f"state has shape {a.shape} but subsystem dimensions {shape.dims} "
            f"require {side}x{side}"
        )
    return a


def kron(a, b) -> np.ndarray:
    """Kronecker product in the row-major index convention."""
    return np.kron(_as_matrix(a, "left factor"), _as_matrix(b, "right factor"))


def partial_transpose(rho, shape, subsystems: int | Iterable[int]) -> np.ndarray:
    """Transpose the given subsystems of a state, leaving the rest alone."""
    sh = _coerce_shape(shape)
    a = _as_state(rho, sh)
    if isinstance(subsystems, (int, np.integer)):
        subsystems = (int(subsystems),)
    subset = sorted(set(int(s) for s in subsystems))
    k = len(sh)
    for s in subset:
        if not 0 <= s < k:
            raise DimensionMismatchError(f"no subsystem {s} in shape {sh.dims}")
    t = a.reshape(sh.dims + sh.dims)
    axes = list(range(2 * k))
    for s in subset:
        axes[s], axes[k + s] = axes[k + s], axes[s]
    return np.ascontiguousarray(t.transpose(axes).reshape(a.shape))


def partial_projection(rho, shape, subsystem: int, vector) -> np.ndarray:
    """Contract one subsystem with a fixed vector: <v|_s rho |v>_s.

    The result acts on the remaining subsystems in their original order. No
    normalization is applied, so the output scales with |v|^2.
    """
    sh = _coerce_shape(shape)
    a = _as_state(rho, sh)
    if not 0 <= subsystem < len(sh):
        raise DimensionMismatchError(f"no subsystem {subsystem} in shape {sh.dims}")
    d = sh.dims[subsystem]
    v = np.asarray(vector, dtype=np.complex128).reshape(-1)
    if v.shape != (d,):
        raise DimensionMismatchError(
            f"projection vector has length {v.shape[0]}, subsystem {subsystem} has dimension {d}"
        )
    pre = math.prod(sh.dims[:subsystem])
    post = math.prod(sh.dims[subsystem + 1 :])
    t = a.reshape(pre, d, post, pre, d, post)
    out = np.einsum("aibcjd,i,j->abcd", t, v.conj(), v)
    side = pre * post
    return np.ascontiguousarray(out.reshape(side, side))


def local_transform(rho, shape, ops: Sequence, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Apply one invertible operator per subsystem: (L_0 x ... x L_k) rho (...)^dag.

    Raises:
        SingularMatrixError: an operator is singular at the working tolerance.
        DimensionMismatchError: operator count or sizes do not match the shape.
    """
    sh = _coerce_shape(shape)
    a = _as_state(rho, sh)
    if len(ops) != len(sh):
        raise DimensionMismatchError(
            f"got {len(ops)} operators for {len(sh)} subsystems"
        )
    mats = []
    for s, op in enumerate(ops):
        m = _as_matrix(op, f"operator for subsystem {s}")
        d = sh.dims[s]
        if m.shape != (d, d):
            raise DimensionMismatchError(
                f"operator for subsystem {s} has shape {m.shape}, expected {d}x{d}"
            )
        gram = m.conj().T @ m
        if rank_kernel(gram, tol=tol).rank < d:
            raise SingularMatrixError(f"operator for subsystem {s} is singular at tolerance")
        mats.append(m)
    full = mats[0]
    for m in mats[1:]:
        full = np.kron(full, m)
    return full @ a @ full.conj().T


@dataclass
class PsdReport:
    """Outcome of a positive-semidefiniteness check.

    ``min_eigenvalue`` is computed from the Hermitian part of the input and is
    meaningful even when ``is_hermitian`` is False.
    """

    is_hermitian: bool
    min_eigenvalue: float
    is_psd: bool


def psd_check(m, tol: float = DEFAULT_TOL) -> PsdReport:
    """Check Hermiticity and positive semidefiniteness, both relative to the
    Frobenius norm of the input."""
    a = _as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatchError(f"matrix must be square, got shape {a.shape}")
    fro = float(np.linalg.norm(a))
    hermitian = float(np.linalg.norm(a - a.conj().T)) <= tol * fro
    lo = float(hermitian_eig(0.5 * (a + a.conj().T), tol=tol).eigenvalues[0])
    return PsdReport(
        is_hermitian=hermitian,
        min_eigenvalue=lo,
        is_psd=hermitian and lo >= -tol * fro,
    )


@dataclass
class RankKernelReport:
    """Numerical rank of a Hermitian matrix and an orthonormal kernel basis.

    ``kernel_basis`` holds the basis as columns; its width is the kernel
    dimension (side minus rank).
    """

    rank: int
    kernel_basis: np.ndarray


def rank_kernel(m, tol: float = DEFAULT_TOL) -> RankKernelReport:
    """Count eigenvalues of a Hermitian matrix above ``tol * norm(m)`` in
    modulus; the rest span the reported kernel.

    Raises:
        NotHermitianError: the input is not Hermitian at tol.
    """
    a = _as_matrix(m)
    ed = hermitian_eig(a, tol=tol)
    threshold = tol * float(np.linalg.norm(a))
    keep = np.abs(ed.eigenvalues) > threshold
    kernel = np.ascontiguousarray(ed.vectors[:, ~keep])
    return RankKernelReport(rank=int(np.count_nonzero(keep)), kernel_basis=kernel)


@dataclass
class BipartitionSpectrum:
    """Smallest partial-transpose eigenvalue across one bipartition, labelled
    by the subsystems that were transposed."""

    subsystems: tuple[int, ...]
    min_eigenvalue: float


@dataclass
class PptReport:
    """Partial-transpose test over every inequivalent bipartition."""

    entries: list[BipartitionSpectrum]
    threshold: float
    is_ppt: bool


def bipartition_representatives(count: int) -> list[tuple[int, ...]]:
    """One transposition subset per inequivalent bipartition of ``count``
    subsystems.

    Transposing a subset and transposing its complement give states with equal
    spectra, so only one of each pair is listed: the smaller subset, with ties
    between equal-sized halves broken toward the one containing subsystem 0.
    """
    subsets = []
    for size in range(1, count // 2 + 1):
        for bits in range(1 << count):
            subset = tuple(s for s in range(count) if bits >> s & 1)
            if len(subset) != size:
                continue
            if 2 * size == count and 0 not in subset:
                continue
            subsets.append(subset)
    return subsets


def is_ppt(rho, shape, tol: float = DEFAULT_TOL) -> PptReport:
    """Test whether a state stays PSD under every partial transpose.

    The input must itself be a valid PSD state; a non-PSD input raises rather
    than reporting NPT, since the test would be meaningless.

    Raises:
        NotPositiveSemidefiniteError: rho is not PSD (or not Hermitian) at tol.
    """
    sh = _coerce_shape(shape)
    a = _as_state(rho, sh)
    base = psd_check(a, tol=tol)
    if not base.is_psd:
        raise NotPositiveSemidefiniteError(
            "input is not a valid PSD state "
            f"(hermitian={base.is_hermitian}, min eigenvalue={base.min_eigenvalue:.3e})"
        )
    threshold = -tol * float(np.linalg.norm(a))
    entries = []
    for subset in bipartition_representatives(len(sh)):
        pt = partial_transpose(a, sh, subset)
        lo = float(hermitian_eig(pt, tol=tol).eigenvalues[0])
        entries.append(BipartitionSpectrum(subsystems=subset, min_eigenvalue=lo))
    return PptReport(
        entries=entries,
        threshold=threshold,
        is_ppt=all(e.min_eigenvalue >= threshold for e in entries),
    )
