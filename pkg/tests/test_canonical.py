"""Unit tests for the canonical block form: words, builders, extraction and
kernel families.

The N=1 case is fully scalar, so every block is a product of complex numbers
that can be written down by hand; those values anchor the conventions all the
larger tests rely on.
"""

import numpy as np
import pytest

from pptcanon.canonical import (
    BlockAddress,
    CanonicalForm,
    build_canonical_22n,
    build_canonical_222n,
    check_commutation,
    extract_canonical,
    verify_kernel_family,
    word_matrix,
)
from pptcanon.errors import (
    BlockMismatchError,
    CommutationError,
    DimensionMismatchError,
    NotPositiveSemidefiniteError,
    RankHypothesisError,
    SingularMatrixError,
)
from pptcanon.instances import random_commuting_family, random_instance
from pptcanon.spectral import sqrt_psd
from pptcanon.tensor import partial_projection, rank_kernel


def scalar_cf(alpha, beta, gamma, delta=1.0):
    return CanonicalForm(
        a=np.array([[alpha]], dtype=complex),
        b=np.array([[beta]], dtype=complex),
        c=np.array([[gamma]], dtype=complex),
        d=np.array([[delta]], dtype=complex),
    )


def diagonal_cf(a_diag, b_diag, c_diag, d_diag=None):
    n = len(a_diag)
    d = np.eye(n, dtype=complex) if d_diag is None else np.diag(d_diag).astype(complex)
    return CanonicalForm(
        a=np.diag(a_diag).astype(complex),
        b=np.diag(b_diag).astype(complex),
        c=np.diag(c_diag).astype(complex),
        d=d,
    )


class TestBlockAddress:
    def test_index_layout(self):
        assert BlockAddress(1, 1, 1).index == 7
        assert BlockAddress(1, 0, 1).index == 5
        assert BlockAddress(0, 1, 1).index == 3

    @pytest.mark.parametrize("index", range(8))
    def test_round_trip(self, index):
        assert BlockAddress.from_index(index).index == index

    def test_rejects_bad_index(self):
        with pytest.raises(DimensionMismatchError):
            BlockAddress.from_index(8)


class TestWordMatrix:
    def test_scalar_words(self):
        # one factor per zero bit: index 0 carries all three, index 7 none
        cf = scalar_cf(2.0, 3.0, 5.0)
        words = [word_matrix(cf, i)[0, 0] for i in range(8)]
        assert words == [30.0, 15.0, 10.0, 5.0, 6.0, 3.0, 2.0, 1.0]

    def test_factor_order(self):
        # the word multiplies c, then b, then a
        rng = np.random.default_rng(0)
        mats = [rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)) for _ in range(3)]
        cf = CanonicalForm(a=mats[0], b=mats[1], c=mats[2], d=np.eye(3))
        got = word_matrix(cf, BlockAddress(0, 0, 0))
        assert np.allclose(got, mats[2] @ mats[1] @ mats[0])

    def test_accepts_tuple_address(self):
        cf = scalar_cf(2.0, 3.0, 5.0)
        assert word_matrix(cf, (1, 0, 1))[0, 0] == 3.0

    def test_rejects_bad_bits(self):
        with pytest.raises(DimensionMismatchError):
            word_matrix(scalar_cf(1, 1, 1), (0, 2, 0))


class TestCheckCommutation:
    def test_diagonal_family_passes(self):
        report = check_commutation(diagonal_cf([1.0, 2.0], [3.0, 4.0], [5.0, 6.0]))
        assert report.passed
        assert set(report.residuals) == {
            "[a,a†]", "[b,b†]", "[c,c†]", "[b,a]", "[b,a†]",
            "[c,a]", "[c,a†]", "[c,b]", "[c,b†]", "d=d†",
        }

    def test_flags_violation(self):
        sx = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
        sz = np.diag([1.0, -1.0]).astype(complex)
        cf = CanonicalForm(a=sx, b=sz, c=np.eye(2), d=np.eye(2))
        report = check_commutation(cf)
        assert not report.passed
        name, residual, bound = report.worst()
        assert name in ("[b,a]", "[b,a†]")
        assert residual > bound

    def test_flags_non_hermitian_d(self):
        cf = CanonicalForm(
            a=np.eye(2), b=np.eye(2), c=np.eye(2),
            d=np.array([[1.0, 1.0], [0.0, 1.0]], dtype=complex),
        )
        report = check_commutation(cf)
        assert not report.passed
        assert report.residuals["d=d†"] > report.bounds["d=d†"]


class TestBuild222n:
    def test_scalar_state_by_hand(self):
        alpha, beta, gamma, delta = 0.5 - 0.25j, -0.75j, 0.25 + 0.5j, 1.75
        cf = scalar_cf(alpha, beta, gamma, delta)
        words = np.array(
            [
                gamma * beta * alpha, gamma * beta, gamma * alpha, gamma,
                beta * alpha, beta, alpha, 1.0,
            ]
        )
        want = delta * np.outer(words.conj(), words)
        got = build_canonical_222n(cf)
        assert np.linalg.norm(got - want) < 1e-14

    def test_blocks_follow_word_products(self):
        family = random_commuting_family(3, seed=5)
        rng = np.random.default_rng(6)
        z = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        basis = np.linalg.qr(z)[0]
        d = (basis * np.array([0.6, 1.1, 1.9])) @ basis.conj().T
        cf = CanonicalForm(a=family.a, b=family.b, c=family.c, d=0.5 * (d + d.conj().T))
        rho = build_canonical_222n(cf)
        root = sqrt_psd(cf.d)
        for i in range(8):
            for j in range(8):
                want = root @ word_matrix(cf, i).conj().T @ word_matrix(cf, j) @ root
                got = rho[3 * i : 3 * i + 3, 3 * j : 3 * j + 3]
                assert np.linalg.norm(got - want) < 1e-12

    def test_exactly_hermitian_psd_with_structured_kernel(self):
        bundle = random_instance(3, seed=9, d_mode="random_pd")
        rho = bundle.rho
        assert np.array_equal(rho, rho.conj().T)
        report = rank_kernel(rho)
        assert report.rank == 3
        assert report.kernel_basis.shape[1] == 21

    def test_zero_family_is_corner_projector(self):
        rho = build_canonical_222n(scalar_cf(0.0, 0.0, 0.0))
        want = np.zeros((8, 8), dtype=complex)
        want[7, 7] = 1.0
        assert np.array_equal(rho, want)

    def test_rejects_non_commuting(self):
        sx = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
        sz = np.diag([1.0, -1.0]).astype(complex)
        cf = CanonicalForm(a=sx, b=sz, c=np.eye(2), d=np.eye(2))
        with pytest.raises(CommutationError):
            build_canonical_222n(cf)

    def test_rejects_indefinite_d(self):
        cf = diagonal_cf([1.0], [1.0], [1.0], d_diag=[-1.0])
        with pytest.raises(NotPositiveSemidefiniteError):
            build_canonical_222n(cf)

    def test_rejects_mismatched_sides(self):
        with pytest.raises(DimensionMismatchError):
            CanonicalForm(a=np.eye(2), b=np.eye(3), c=np.eye(2), d=np.eye(2))


class TestBuild22n:
    def test_block_row_holds_the_words(self):
        a = np.diag([0.5, -0.25]).astype(complex)
        b = np.diag([0.75j, 0.5]).astype(complex)
        rho = build_canonical_22n(a, b)
        eye = np.eye(2, dtype=complex)
        for j, want in enumerate((b @ a, b, a, eye)):
            got = rho[6:8, 2 * j : 2 * j + 2]
            assert np.linalg.norm(got - want) < 1e-14

    def test_rank_and_kernel_dimensions(self):
        # diagonal pair of size 2: rank 2, kernel dimension 6
        rho = build_canonical_22n(np.diag([0.3, 0.9]), np.diag([0.2, -0.4]))
        report = rank_kernel(rho)
        assert report.rank == 2
        assert report.kernel_basis.shape[1] == 6

    def test_rejects_non_commuting(self):
        sx = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
        sz = np.diag([1.0, -1.0]).astype(complex)
        with pytest.raises(CommutationError):
            build_canonical_22n(sx, sz)


class TestExtractCanonical:
    @pytest.mark.parametrize("d_mode", ["identity", "random_pd"])
    @pytest.mark.parametrize("n", [1, 2, 4])
    def test_round_trip(self, n, d_mode):
        bundle = random_instance(n, seed=100 + n, d_mode=d_mode)
        extraction = extract_canonical(bundle.rho, n)
        truth = bundle.ground_truth.cf
        for name in "abcd":
            got = getattr(extraction.cf, name)
            want = getattr(truth, name)
            assert np.linalg.norm(got - want) < 1e-10 * max(1.0, np.linalg.norm(want))

    def test_gauge_is_inverse_root_of_corner(self):
        bundle = random_instance(3, seed=42, d_mode="random_pd")
        extraction = extract_canonical(bundle.rho, 3)
        product = extraction.gauge @ extraction.cf.d @ extraction.gauge
        assert np.linalg.norm(product - np.eye(3)) < 1e-10

    def test_corner_matches_iterated_projection(self):
        bundle = random_instance(2, seed=17, d_mode="random_pd")
        reduced = bundle.rho
        dims = [2, 2, 2, 2]
        for _ in range(3):
            reduced = partial_projection(reduced, tuple(dims), 0, [0.0, 1.0])
            dims.pop(0)
        assert np.array_equal(reduced, bundle.rho[14:, 14:])
        assert np.array_equal(reduced, extract_canonical(bundle.rho, 2).cf.d)

    def test_rejects_wrong_rank(self):
        with pytest.raises(RankHypothesisError, match="rank 8"):
            extract_canonical(np.eye(8, dtype=complex) / 8.0, 1)

    def test_rejects_rank_deficient_corner(self):
        rho = np.zeros((16, 16), dtype=complex)
        rho[0, 0] = rho[1, 1] = 0.5
        with pytest.raises(RankHypothesisError, match="corner"):
            extract_canonical(rho, 2)

    def test_rejects_non_psd(self):
        rho = np.diag([1.0] + [0.0] * 6 + [-1.0]).astype(complex)
        with pytest.raises(NotPositiveSemidefiniteError):
            extract_canonical(rho, 1)

    def test_rejects_non_commuting_block_reads(self):
        # assemble a Gram state whose block row 7 holds non-commuting reads
        sx = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
        sz = np.diag([1.0, -1.0]).astype(complex)
        eye = np.eye(2, dtype=complex)
        blocks = [eye, eye, eye, eye, eye, sz, sx, eye]
        stacked = np.hstack(blocks)
        rho = stacked.conj().T @ stacked
        with pytest.raises(CommutationError):
            extract_canonical(rho, 2)

    def test_rejects_block_mismatch(self):
        # consistent reads in block row 7 but a wrong word elsewhere
        a = np.diag([0.5, 0.25]).astype(complex)
        b = np.diag([0.75, -0.5]).astype(complex)
        c = np.diag([0.3, 0.8]).astype(complex)
        eye = np.eye(2, dtype=complex)
        blocks = [np.zeros((2, 2), dtype=complex), c @ b, c @ a, c, b @ a, b, a, eye]
        stacked = np.hstack(blocks)
        rho = stacked.conj().T @ stacked
        with pytest.raises(BlockMismatchError) as info:
            extract_canonical(rho, 2)
        worst_block = info.value.mismatches[0][0]
        assert 0 in worst_block

    def test_rejects_wrong_side(self):
        with pytest.raises(DimensionMismatchError):
            extract_canonical(np.eye(12, dtype=complex), 2)


class TestVerifyKernelFamily:
    @pytest.mark.parametrize("d_mode", ["identity", "random_pd"])
    def test_families_annihilate(self, d_mode):
        bundle = random_instance(3, seed=23, d_mode=d_mode)
        report = verify_kernel_family(bundle.rho, bundle.ground_truth.cf)
        assert report.passed
        assert report.max_residual < 1e-12
        assert report.span_dimension == 21

    def test_wrong_form_fails(self):
        bundle = random_instance(2, seed=31)
        cf = bundle.ground_truth.cf
        swapped = CanonicalForm(a=cf.b, b=cf.a, c=cf.c, d=cf.d)
        report = verify_kernel_family(bundle.rho, swapped)
        assert not report.passed
        assert report.max_residual > 1e-3

    def test_rejects_singular_d(self):
        cf = diagonal_cf([0.5], [0.5], [0.5], d_diag=[0.0])
        rho = np.zeros((8, 8), dtype=complex)
        with pytest.raises(SingularMatrixError):
            verify_kernel_family(rho, cf)


class TestGaugedProjection:
    def test_projection_matches_two_qubit_form(self):
        # after gauging the corner to the identity, projecting the first
        # qubit onto |1> leaves the 4Nx4N state generated by (a, b)
        bundle = random_instance(3, seed=77, d_mode="random_pd")
        cf = bundle.ground_truth.cf
        eye2 = np.eye(2, dtype=complex)
        gauge = sqrt_psd(cf.d, inverse=True)
        from pptcanon.tensor import local_transform

        gauged = local_transform(bundle.rho, bundle.shape, (eye2, eye2, eye2, gauge))
        projected = partial_projection(gauged, bundle.shape, 0, [0.0, 1.0])
        want = build_canonical_22n(cf.a, cf.b)
        assert np.max(np.abs(projected - want)) < 1e-11
