"""Eigensolvers for Hermitian matrices and commuting normal families.

The package does all of its spectral work through one deterministic primitive:
a cyclic complex Jacobi eigensolver. Rotations sweep the strict upper triangle
in row-major order and each rotation annihilates one off-diagonal entry, so for
a fixed input the sequence of floating-point operations is fixed and repeated
calls produce bitwise-identical decompositions. Families of commuting normal
matrices are diagonalized jointly by eigensolving a random Hermitian mixture of
their Hermitian and skew-Hermitian parts and verifying the residuals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .errors import (
    CommutationError,
    ConvergenceError,
    DimensionMismatchError,
    NotHermitianError,
    NotPositiveSemidefiniteError,
    SingularMatrixError,
)

# Relative tolerance used by every check in the package unless overridden.
# All comparisons are made against the Frobenius norm of the operands.
DEFAULT_TOL = 1e-9

# Off-diagonal mass at which a Jacobi iteration is declared converged,
# relative to the Frobenius norm of the input and scaled with its side.
_JACOBI_STOP = 1e-15

_DEFAULT_MAX_SWEEPS = 60


@dataclass
class EigenDecomposition:
    """Spectral decomposition of a Hermitian matrix.

    Attributes:
        eigenvalues: real eigenvalues in ascending order.
        vectors: unitary matrix whose k-th column is the eigenvector for
            eigenvalues[k], with its largest-modulus component real positive.
    """

    eigenvalues: np.ndarray
    vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        """Return sum of eigenvalue * vector * vector^dagger."""
        return (self.vectors * self.eigenvalues) @ self.vectors.conj().T


@dataclass
class JointEigenDecomposition:
    """Common eigenbasis of a family of commuting normal matrices.

    Attributes:
        basis: unitary matrix of common eigenvectors (columns).
        eigenvalues: one complex array per input matrix; eigenvalues[j][k] is
            the eigenvalue of input j on column k of the basis.
    """

    basis: np.ndarray
    eigenvalues: list[np.ndarray]


def commutator(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return x @ y - y @ x


def _as_square(m, what: str) -> np.ndarray:
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatchError(f"{what} must be a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a.view(np.float64))):
        raise ValueError(f"{what} contains non-finite entries")
    return a


@numba.njit(cache=True)
def _jacobi_sweeps(h, v, stop_off, max_sweeps):  # pragma: no cover - jit body
    """Run cyclic Jacobi sweeps in place on ``h``, accumulating rotations in
    ``v``. Returns the number of sweeps used, or -1 when the off-diagonal
    mass is still above ``stop_off`` after ``max_sweeps`` sweeps."""
    n = h.shape[0]
    # Entries this small cannot lift the off-diagonal mass above the stop
    # threshold even if every pair sits exactly at the floor.
    skip_floor = stop_off / (4.0 * n)
    for sweep in range(max_sweeps):
        off2 = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                x = h[i, j]
                off2 += 2.0 * (x.real * x.real + x.imag * x.imag)
        if math.sqrt(off2) <= stop_off:
            return sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                hpq = h[p, q]
                mag = abs(hpq)
                if mag <= skip_floor:
                    continue
                # Unitary 2x2 rotation R = [[c, s], [-s*conj(u), c*conj(u)]]
                # with u the phase of h[p, q], chosen so that (R^dag h R)[p, q]
                # vanishes and the smaller rotation angle is taken.
                u = hpq / mag
                app = h[p, p].real
                aqq = h[q, q].real
                tau = (aqq - app) / (2.0 * mag)
                if tau >= 0.0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                su = s * u
                suc = s * np.conj(u)
                cuc = c * np.conj(u)
                for k in range(n):
                    hkp = h[k, p]
                    hkq = h[k, q]
                    h[k, p] = c * hkp - suc * hkq
                    h[k, q] = s * hkp + cuc * hkq
                for k in range(n):
                    hpk = h[p, k]
                    hqk = h[q, k]
                    h[p, k] = c * hpk - su * hqk
                    h[q, k] = s * hpk + c * u * hqk
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - suc * vkq
                    v[k, q] = s * vkp + cuc * vkq
                h[p, p] = complex(app - t * mag, 0.0)
                h[q, q] = complex(aqq + t * mag, 0.0)
                h[p, q] = 0.0
                h[q, p] = 0.0
    off2 = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            x = h[i, j]
            off2 += 2.0 * (x.real * x.real + x.imag * x.imag)
    if math.sqrt(off2) <= stop_off:
        return max_sweeps
    return -1


def hermitian_eig(
    m, tol: float = DEFAULT_TOL, max_sweeps: int = _DEFAULT_MAX_SWEEPS
) -> EigenDecomposition:
    """Diagonalize a Hermitian matrix with cyclic Jacobi rotations.

    Args:
        m: square matrix with ``norm(m - m^dag) <= tol * norm(m)``.
        tol: relative tolerance for the Hermiticity check.
        max_sweeps: sweep budget before giving up.

    Returns:
        EigenDecomposition with ascending eigenvalues and phase-fixed
        eigenvector columns.

    Raises:
        NotHermitianError: the input deviates from its adjoint beyond tol.
        ConvergenceError: the sweep budget was exhausted.
    """
    a = _as_square(m, "matrix")
    fro = np.linalg.norm(a)
    if np.linalg.norm(a - a.conj().T) > tol * fro:
        raise NotHermitianError(
            f"matrix deviates from Hermitian by {np.linalg.norm(a - a.conj().T):.3e} "
            f"(allowed {tol * fro:.3e})"
        )
    n = a.shape[0]
    work = np.ascontiguousarray(0.5 * (a + a.conj().T))
    vectors = np.eye(n, dtype=np.complex128)
    stop_off = n * _JACOBI_STOP * np.linalg.norm(work)
    if _jacobi_sweeps(work, vectors, stop_off, max_sweeps) < 0:
        raise ConvergenceError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")
    values = np.diag(work).real.copy()
    order = np.argsort(values, kind="stable")
    values = values[order]
    vectors = np.ascontiguousarray(vectors[:, order])
    for k in range(n):
        col = vectors[:, k]
        lead = int(np.argmax(np.abs(col)))
        mag = abs(col[lead])
        if mag > 0.0:
            col *= np.conj(col[lead]) / mag
            col[lead] = mag
    return EigenDecomposition(eigenvalues=values, vectors=vectors)


def _check_commuting_normal(ms: list[np.ndarray], norms: list[float], tol: float) -> None:
    for i, m in enumerate(ms):
        bound = tol * norms[i] * norms[i]
        res = float(np.linalg.norm(commutator(m, m.conj().T)))
        if res > bound:
            raise CommutationError(f"[m{i}, m{i}^dag]", res, bound)
    for i in range(len(ms)):
        for j in range(i + 1, len(ms)):
            bound = tol * norms[i] * norms[j]
            res = float(np.linalg.norm(commutator(ms[i], ms[j])))
            if res > bound:
                raise CommutationError(f"[m{i}, m{j}]", res, bound)


def simultaneous_diagonalize(
    mats,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    max_retries: int = 8,
) -> JointEigenDecomposition:
    """Find one unitary basis that diagonalizes every matrix in the family.

    The family must consist of pairwise commuting normal matrices; both
    properties are verified up front against ``tol`` times the product of the
    operand Frobenius norms. A random real mixture of the Hermitian and
    skew-Hermitian parts of all matrices is eigensolved and its basis is
    accepted once the off-diagonal residual of every conjugated input is
    within tolerance. Degenerate mixtures are rare but possible, so the
    mixture is redrawn (deterministically from ``seed``) up to
    ``max_retries`` times.

    Raises:
        CommutationError: the family fails a normality or commutation check.
        ConvergenceError: no acceptable basis after all redraws.
    """
    ms = [np.ascontiguousarray(_as_square(m, f"family member {i}")) for i, m in enumerate(mats)]
    if not ms:
        raise DimensionMismatchError("family must contain at least one matrix")
    n = ms[0].shape[0]
    for i, m in enumerate(ms):
        if m.shape[0] != n:
            raise DimensionMismatchError(
                f"family member {i} has side {m.shape[0]}, expected {n}"
            )
    norms = [float(np.linalg.norm(m)) for m in ms]
    _check_commuting_normal(ms, norms, tol)

    herm = [0.5 * (m + m.conj().T) for m in ms]
    skew = [(m - m.conj().T) * (-0.5j) for m in ms]
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))
    worst = (0.0, -1)
    for _ in range(max_retries + 1):
        alpha = rng.standard_normal(len(ms))
        beta = rng.standard_normal(len(ms))
        mix = np.zeros((n, n), dtype=np.complex128)
        for j in range(len(ms)):
            mix += alpha[j] * herm[j] + beta[j] * skew[j]
        basis = hermitian_eig(mix, tol=tol).vectors
        values: list[np.ndarray] = []
        ok = True
        for j, m in enumerate(ms):
            t = basis.conj().T @ m @ basis
            diag = np.diag(t).copy()
            res = float(np.linalg.norm(t - np.diag(diag)))
            if res > tol * norms[j]:
                ok = False
                if res > worst[0]:
                    worst = (res, j)
                break
            values.append(diag)
        if ok:
            return JointEigenDecomposition(basis=basis, eigenvalues=values)
    res, j = worst
    raise ConvergenceError(
        f"no common eigenbasis after {max_retries + 1} mixtures "
        f"(worst off-diagonal residual {res:.3e} on member {j}); "
        "the mixture spectrum may be accidentally degenerate"
    )


def sqrt_psd(d, tol: float = DEFAULT_TOL, inverse: bool = False) -> np.ndarray:
    """Hermitian square root (or inverse square root) of a PSD matrix.

    Eigenvalues in ``[-tol * norm(d), 0)`` are clipped to zero before the
    root is formed. With ``inverse=True`` the smallest eigenvalue must exceed
    ``tol * norm(d)``.

    Raises:
        NotHermitianError: input is not Hermitian at tol.
        NotPositiveSemidefiniteError: an eigenvalue is negative beyond tol.
        SingularMatrixError: inverse requested for a singular input.
    """
    ed = hermitian_eig(d, tol=tol)
    fro = float(np.linalg.norm(np.asarray(d)))
    if ed.eigenvalues[0] < -tol * fro:
        raise NotPositiveSemidefiniteError(
            f"smallest eigenvalue {ed.eigenvalues[0]:.3e} is below {-tol * fro:.3e}"
        )
    values = np.clip(ed.eigenvalues, 0.0, None)
    if inverse:
        if values[0] <= tol * fro:
            raise SingularMatrixError(
                f"matrix is singular at tolerance (min eigenvalue {values[0]:.3e})"
            )
        w = 1.0 / np.sqrt(values)
    else:
        w = np.sqrt(values)
    root = (ed.vectors * w) @ ed.vectors.conj().T
    return 0.5 * (root + root.conj().T)
