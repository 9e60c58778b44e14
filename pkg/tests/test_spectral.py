"""Unit tests for the Jacobi eigensolver, joint diagonalization and sqrt_psd.

Eigenvalue correctness is checked against closed-form characteristic roots
for 2x2 and 3x3 inputs and against the LAPACK solver as an independent
reference for larger sizes.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pptcanon.errors import (
    CommutationError,
    DimensionMismatchError,
    NotHermitianError,
    NotPositiveSemidefiniteError,
    SingularMatrixError,
)
from pptcanon.spectral import (
    hermitian_eig,
    simultaneous_diagonalize,
    sqrt_psd,
)


def random_hermitian(rng, n):
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return z + z.conj().T


def roots_2x2(h):
    # characteristic polynomial x^2 - tr x + det has roots
    # tr/2 +- sqrt((a-d)^2/4 + |b|^2)
    half_gap = (h[0, 0] - h[1, 1]).real / 2.0
    disc = math.sqrt(half_gap**2 + abs(h[0, 1]) ** 2)
    mid = (h[0, 0] + h[1, 1]).real / 2.0
    return np.array([mid - disc, mid + disc])


def roots_3x3(h):
    # trigonometric solution of the characteristic cubic
    q = np.trace(h).real / 3.0
    b = h - q * np.eye(3)
    p = math.sqrt(max(np.trace(b @ b).real / 6.0, 0.0))
    if p == 0.0:
        return np.array([q, q, q])
    det_b = (
        b[0, 0] * (b[1, 1] * b[2, 2] - b[1, 2] * b[2, 1])
        - b[0, 1] * (b[1, 0] * b[2, 2] - b[1, 2] * b[2, 0])
        + b[0, 2] * (b[1, 0] * b[2, 1] - b[1, 1] * b[2, 0])
    )
    r = min(1.0, max(-1.0, (det_b / p**3).real / 2.0))
    phi = math.acos(r) / 3.0
    top = q + 2.0 * p * math.cos(phi)
    bottom = q + 2.0 * p * math.cos(phi + 2.0 * math.pi / 3.0)
    return np.array(sorted([bottom, 3.0 * q - top - bottom, top]))


class TestHermitianEig:
    @pytest.mark.parametrize("seed", range(25))
    def test_matches_closed_form_2x2(self, seed):
        h = random_hermitian(np.random.default_rng(seed), 2)
        got = hermitian_eig(h).eigenvalues
        assert np.max(np.abs(got - roots_2x2(h))) < 1e-12 * max(1.0, np.linalg.norm(h))

    @pytest.mark.parametrize("seed", range(25))
    def test_matches_closed_form_3x3(self, seed):
        h = random_hermitian(np.random.default_rng(seed), 3)
        got = hermitian_eig(h).eigenvalues
        assert np.max(np.abs(got - roots_3x3(h))) < 1e-10 * max(1.0, np.linalg.norm(h))

    @pytest.mark.parametrize("n", [1, 2, 5, 9, 16, 31])
    def test_matches_lapack_reference(self, n):
        h = random_hermitian(np.random.default_rng(n), n)
        got = hermitian_eig(h).eigenvalues
        want = np.linalg.eigvalsh(h)
        assert np.max(np.abs(got - want)) < 1e-12 * max(1.0, np.linalg.norm(h))

    def test_diagonal_input_is_exact(self):
        ed = hermitian_eig(np.diag([3.0, 1.0, 2.0]).astype(complex))
        assert np.array_equal(ed.eigenvalues, [1.0, 2.0, 3.0])
        assert np.array_equal(np.abs(ed.vectors), np.eye(3)[:, [1, 2, 0]])

    def test_vectors_unitary_and_reconstruct(self):
        h = random_hermitian(np.random.default_rng(5), 12)
        ed = hermitian_eig(h)
        n = h.shape[0]
        assert np.linalg.norm(ed.vectors.conj().T @ ed.vectors - np.eye(n)) < 1e-12
        assert np.linalg.norm(ed.reconstruct() - h) < 1e-12 * np.linalg.norm(h)

    def test_eigenvalues_ascending(self):
        h = random_hermitian(np.random.default_rng(8), 10)
        values = hermitian_eig(h).eigenvalues
        assert np.all(np.diff(values) >= 0)

    def test_phase_convention(self):
        # largest-modulus component of each eigenvector is real positive
        ed = hermitian_eig(random_hermitian(np.random.default_rng(9), 7))
        for k in range(7):
            col = ed.vectors[:, k]
            lead = int(np.argmax(np.abs(col)))
            assert col[lead].imag == 0.0
            assert col[lead].real > 0.0

    def test_bitwise_deterministic(self):
        h = random_hermitian(np.random.default_rng(10), 9)
        first = hermitian_eig(h)
        second = hermitian_eig(h.copy())
        assert first.eigenvalues.tobytes() == second.eigenvalues.tobytes()
        assert first.vectors.tobytes() == second.vectors.tobytes()

    def test_zero_and_scalar(self):
        assert np.array_equal(hermitian_eig(np.zeros((3, 3))).eigenvalues, np.zeros(3))
        ed = hermitian_eig(np.array([[-2.5]]))
        assert ed.eigenvalues[0] == -2.5
        assert ed.vectors[0, 0] == 1.0

    def test_rejects_non_hermitian(self):
        with pytest.raises(NotHermitianError):
            hermitian_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_rejects_non_square(self):
        with pytest.raises(DimensionMismatchError):
            hermitian_eig(np.zeros((2, 3)))

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            hermitian_eig(np.array([[np.nan, 0.0], [0.0, 1.0]]))

    @settings(deadline=None)
    @given(seed=st.integers(0, 10**6), n=st.integers(1, 8))
    def test_reconstruction_property(self, seed, n):
        h = random_hermitian(np.random.default_rng(seed), n)
        ed = hermitian_eig(h)
        scale = max(1.0, np.linalg.norm(h))
        assert np.linalg.norm(ed.reconstruct() - h) < 1e-11 * scale
        assert abs(np.sum(ed.eigenvalues) - np.trace(h).real) < 1e-11 * scale


class TestSimultaneousDiagonalize:
    def _planted(self, n, seed, count=3):
        rng = np.random.default_rng(seed)
        z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        basis = np.linalg.qr(z)[0]
        spectra = [
            rng.standard_normal(n) + 1j * rng.standard_normal(n) for _ in range(count)
        ]
        mats = [(basis * vals) @ basis.conj().T for vals in spectra]
        return mats, spectra

    @pytest.mark.parametrize("n", [1, 2, 3, 5, 8])
    def test_recovers_planted_spectra(self, n):
        mats, spectra = self._planted(n, seed=40 + n)
        joint = simultaneous_diagonalize(mats, seed=1)
        key = lambda t: tuple(p for v in t for p in (v.real, v.imag))
        planted = sorted(zip(*spectra), key=key)
        got = sorted(zip(*joint.eigenvalues), key=key)
        err = max(abs(p - g) for pt, gt in zip(planted, got) for p, g in zip(pt, gt))
        assert err < 1e-9

    def test_columns_are_joint_eigenvectors(self):
        mats, _ = self._planted(4, seed=77)
        joint = simultaneous_diagonalize(mats, seed=2)
        for m, values in zip(mats, joint.eigenvalues):
            for k in range(4):
                col = joint.basis[:, k]
                assert np.linalg.norm(m @ col - values[k] * col) < 1e-10

    def test_basis_unitary(self):
        mats, _ = self._planted(5, seed=13)
        joint = simultaneous_diagonalize(mats, seed=0)
        assert np.linalg.norm(joint.basis.conj().T @ joint.basis - np.eye(5)) < 1e-12

    def test_handles_degenerate_member(self):
        # one fully degenerate matrix must not spoil the common basis
        mats, _ = self._planted(4, seed=21, count=2)
        family = [np.eye(4, dtype=complex)] + mats
        joint = simultaneous_diagonalize(family, seed=3)
        assert np.max(np.abs(joint.eigenvalues[0] - 1.0)) < 1e-10

    def test_zero_family(self):
        joint = simultaneous_diagonalize([np.zeros((3, 3), dtype=complex)])
        assert np.max(np.abs(joint.eigenvalues[0])) == 0.0

    def test_rejects_non_commuting(self):
        sx = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
        sz = np.diag([1.0, -1.0]).astype(complex)
        with pytest.raises(CommutationError) as info:
            simultaneous_diagonalize([sx, sz])
        assert "[m0, m1]" in str(info.value)

    def test_rejects_non_normal(self):
        jordan = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
        with pytest.raises(CommutationError) as info:
            simultaneous_diagonalize([jordan])
        assert "dag" in str(info.value)

    def test_rejects_empty_and_mismatched(self):
        with pytest.raises(DimensionMismatchError):
            simultaneous_diagonalize([])
        with pytest.raises(DimensionMismatchError):
            simultaneous_diagonalize([np.eye(2, dtype=complex), np.eye(3, dtype=complex)])

    def test_bitwise_deterministic(self):
        mats, _ = self._planted(4, seed=99)
        first = simultaneous_diagonalize(mats, seed=5)
        second = simultaneous_diagonalize([m.copy() for m in mats], seed=5)
        assert first.basis.tobytes() == second.basis.tobytes()
        for a, b in zip(first.eigenvalues, second.eigenvalues):
            assert a.tobytes() == b.tobytes()


class TestSqrtPsd:
    def test_diagonal_is_exact(self):
        root = sqrt_psd(np.diag([4.0, 9.0]).astype(complex))
        assert np.array_equal(root, np.diag([2.0, 3.0]).astype(complex))

    @pytest.mark.parametrize("n", [1, 3, 6])
    def test_squares_back(self, n):
        rng = np.random.default_rng(n)
        z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        psd = z @ z.conj().T
        root = sqrt_psd(psd)
        assert np.linalg.norm(root @ root - psd) < 1e-10 * np.linalg.norm(psd)
        assert np.linalg.norm(root - root.conj().T) == 0.0

    def test_inverse_inverts(self):
        rng = np.random.default_rng(3)
        z = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        psd = z @ z.conj().T + 0.5 * np.eye(4)
        root = sqrt_psd(psd)
        inv_root = sqrt_psd(psd, inverse=True)
        assert np.linalg.norm(root @ inv_root - np.eye(4)) < 1e-9

    def test_clips_tiny_negative_eigenvalue(self):
        rng = np.random.default_rng(6)
        z = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        basis = np.linalg.qr(z)[0]
        d = (basis * np.array([1.0, 0.5, -1e-12])) @ basis.conj().T
        root = sqrt_psd(d)
        values = np.linalg.eigvalsh(root)
        assert values[0] >= 0.0

    def test_rejects_indefinite(self):
        with pytest.raises(NotPositiveSemidefiniteError):
            sqrt_psd(np.diag([1.0, -1.0]).astype(complex))

    def test_inverse_rejects_singular(self):
        with pytest.raises(SingularMatrixError):
            sqrt_psd(np.diag([1.0, 0.0]).astype(complex), inverse=True)

    def test_rejects_non_hermitian(self):
        with pytest.raises(NotHermitianError):
            sqrt_psd(np.array([[1.0, 1.0], [0.0, 1.0]]))
