"""Seeded acceptance suite covering the whole pipeline.

Each criterion exercises one contract of the package on a deterministic
instance set and reports pass/fail with a short diagnostic. The full
configuration sweeps ranks 1 through 6 with 50 instances each (half identity
weight, half random positive definite weight); the quick configuration trims
this to ranks 1 through 3 with 12 instances each so it can run in seconds.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .canonical import build_canonical_22n, build_canonical_222n, extract_canonical, verify_kernel_family
from .errors import CommutationError
from .instances import (
    ghz_werner,
    matrix_from_json,
    matrix_to_json,
    random_commuting_family,
    random_instance,
)
from .separability import (
    CertificationStatus,
    certify_separability,
    decompose_canonical,
    reconstruct_decomposition,
)
from .spectral import hermitian_eig, simultaneous_diagonalize, sqrt_psd
from .tensor import SystemShape, is_ppt, kron, local_transform, partial_projection, rank_kernel


@dataclass(frozen=True)
class SuiteConfig:
    """Instance plan for one run of the suite."""

    n_values: tuple[int, ...]
    instances_per_mode: int
    budget: int
    name: str


FULL_CONFIG = SuiteConfig(n_values=(1, 2, 3, 4, 5, 6), instances_per_mode=25, budget=200, name="full")
QUICK_CONFIG = SuiteConfig(n_values=(1, 2, 3), instances_per_mode=6, budget=200, name="quick")

_D_MODES = ("identity", "random_pd")


@dataclass
class CriterionResult:
    index: int
    name: str
    passed: bool
    detail: str
    seconds: float


def _instance_seed(n: int, i: int) -> int:
    return 1000 * n + i


def _rel_err(x: np.ndarray, y: np.ndarray) -> float:
    scale = float(np.linalg.norm(y))
    return float(np.linalg.norm(x - y)) / (scale if scale > 0 else 1.0)


@dataclass
class _Suite:
    """Caches the instance set so the criteria share one build."""

    config: SuiteConfig
    _plain: dict = field(default_factory=dict)
    _disguised: dict = field(default_factory=dict)

    def plain(self):
        if not self._plain:
            for n in self.config.n_values:
                for mode in _D_MODES:
                    for i in range(self.config.instances_per_mode):
                        seed = _instance_seed(n, i)
                        self._plain[(n, mode, i)] = random_instance(n, seed, d_mode=mode)
        return self._plain

    def disguised(self):
        if not self._disguised:
            for n in self.config.n_values:
                for mode in _D_MODES:
                    for i in range(self.config.instances_per_mode):
                        seed = _instance_seed(n, i)
                        self._disguised[(n, mode, i)] = random_instance(
                            n, seed, d_mode=mode, disguise=True
                        )
        return self._disguised


def _criterion_round_trip(suite: _Suite) -> CriterionResult:
    start = time.perf_counter()
    worst = 0.0
    count = 0
    for (n, _mode, _i), bundle in suite.plain().items():
        extraction = extract_canonical(bundle.rho, n)
        truth = bundle.ground_truth.cf
        got = extraction.cf
        err = max(
            _rel_err(got.a, truth.a),
            _rel_err(got.b, truth.b),
            _rel_err(got.c, truth.c),
            _rel_err(got.d, truth.d),
        )
        worst = max(worst, err)
        count += 1
    elapsed = time.perf_counter() - start
    passed = worst <= 1e-8 and elapsed < 30.0
    return CriterionResult(
        index=1,
        name="canonical round trip",
        passed=passed,
        detail=f"{count} instances, max rel err {worst:.2e}, {elapsed:.1f}s",
        seconds=elapsed,
    )


def _criterion_ppt_rank(suite: _Suite) -> CriterionResult:
    start = time.perf_counter()
    ok = True
    detail = ""
    worst_eig = 0.0
    for (n, mode, i), bundle in suite.plain().items():
        report = is_ppt(bundle.rho, bundle.shape, tol=1e-10)
        worst_eig = min(worst_eig, min(e.min_eigenvalue for e in report.entries))
        rk = rank_kernel(bundle.rho)
        kernel_dim = rk.kernel_basis.shape[1]
        if not report.is_ppt or rk.rank != n or kernel_dim != 7 * n:
            ok = False
            detail = (
                f"n={n} {mode} #{i}: ppt={report.is_ppt} rank={rk.rank} kernel={kernel_dim}"
            )
            break
    elapsed = time.perf_counter() - start
    if ok:
        detail = f"all bipartitions PSD (worst eigenvalue {worst_eig:.2e}), ranks and kernels exact"
    return CriterionResult(2, "PPT, rank and kernel dimension", ok, detail, elapsed)


def _criterion_kernel_families(suite: _Suite) -> CriterionResult:
    start = time.perf_counter()
    worst = 0.0
    ok = True
    detail = ""
    for (n, mode, i), bundle in suite.plain().items():
        report = verify_kernel_family(bundle.rho, bundle.ground_truth.cf, tol=1e-10)
        worst = max(worst, report.max_residual)
        if not report.passed:
            ok = False
            detail = (
                f"n={n} {mode} #{i}: residual {report.max_residual:.2e}, "
                f"span {report.span_dimension} of {7 * n}"
            )
            break
    elapsed = time.perf_counter() - start
    if ok:
        detail = f"max residual {worst:.2e}, spans complete"
    return CriterionResult(3, "kernel families annihilate the state", ok, detail, elapsed)


def _criterion_decompose(suite: _Suite) -> CriterionResult:
    start = time.perf_counter()
    worst = 0.0
    for (n, _mode, i), bundle in suite.plain().items():
        cf = bundle.ground_truth.cf
        decomposition = decompose_canonical(cf, seed=_instance_seed(n, i))
        recon = reconstruct_decomposition(decomposition)
        worst = max(worst, _rel_err(recon, build_canonical_222n(cf)))
    elapsed = time.perf_counter() - start
    return CriterionResult(
        4,
        "decomposition reconstructs the state",
        worst <= 1e-8,
        f"max rel err {worst:.2e}",
        elapsed,
    )


def _criterion_certify_disguised(suite: _Suite) -> CriterionResult:
    start = time.perf_counter()
    worst = 0.0
    ok = True
    detail = ""
    for (n, mode, i), bundle in suite.disguised().items():
        result = certify_separability(
            bundle.rho, n, budget=suite.config.budget, seed=_instance_seed(n, i)
        )
        if result.status is not CertificationStatus.CERTIFIED:
            ok = False
            detail = f"n={n} {mode} #{i}: {result.status.value} ({result.diagnostic})"
            break
        recon = reconstruct_decomposition(result.certificate.decomposition)
        err = _rel_err(recon, bundle.rho)
        worst = max(worst, err, result.certificate.residual)
    elapsed = time.perf_counter() - start
    if ok:
        ok = worst <= 1e-7
        detail = f"all certified, max residual {worst:.2e}"
    return CriterionResult(5, "disguised instances certified", ok, detail, elapsed)


def _criterion_ghz(_suite: _Suite) -> CriterionResult:
    start = time.perf_counter()
    noisy = kron(ghz_werner(0.9), np.array([[1.0, 0.0], [0.0, 0.0]], dtype=np.complex128))
    result = certify_separability(noisy, 2)
    rejected = result.status is CertificationStatus.NOT_PPT
    shape3 = SystemShape((2, 2, 2))
    fully_mixed_ppt = is_ppt(ghz_werner(0.0), shape3).is_ppt
    lo, hi = 0.0, 1.0
    lo_ppt = is_ppt(ghz_werner(lo), shape3).is_ppt
    hi_ppt = is_ppt(ghz_werner(hi), shape3).is_ppt
    bracket = lo_ppt and not hi_ppt
    while hi - lo > 1e-3:
        mid = 0.5 * (lo + hi)
        if is_ppt(ghz_werner(mid), shape3).is_ppt:
            lo = mid
        else:
            hi = mid
    threshold = 0.5 * (lo + hi)
    elapsed = time.perf_counter() - start
    passed = rejected and fully_mixed_ppt and bracket
    return CriterionResult(
        6,
        "noisy GHZ control",
        passed,
        f"p=0.9 rejected={rejected}, p=0 PPT={fully_mixed_ppt}, threshold p={threshold:.4f}",
        elapsed,
    )


def _eig2_roots(h: np.ndarray) -> np.ndarray:
    tr = (h[0, 0] + h[1, 1]).real
    disc = math.sqrt(((h[0, 0] - h[1, 1]).real / 2.0) ** 2 + abs(h[0, 1]) ** 2)
    return np.array([tr / 2.0 - disc, tr / 2.0 + disc])


def _det3(m: np.ndarray) -> complex:
    return (
        m[0, 0] * (m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1])
        - m[0, 1] * (m[1, 0] * m[2, 2] - m[1, 2] * m[2, 0])
        + m[0, 2] * (m[1, 0] * m[2, 1] - m[1, 1] * m[2, 0])
    )


def _eig3_roots(h: np.ndarray) -> np.ndarray:
    # Trigonometric closed form for the roots of the characteristic cubic of
    # a 3x3 Hermitian matrix.
    q = float(np.trace(h).real) / 3.0
    b = h - q * np.eye(3)
    p2 = float(np.trace(b @ b).real) / 6.0
    p = math.sqrt(max(p2, 0.0))
    if p == 0.0:
        return np.array([q, q, q])
    r = (_det3(b) / (p**3)).real / 2.0
    r = min(1.0, max(-1.0, r))
    phi = math.acos(r) / 3.0
    big = q + 2.0 * p * math.cos(phi)
    small = q + 2.0 * p * math.cos(phi + 2.0 * math.pi / 3.0)
    mid = 3.0 * q - big - small
    return np.array(sorted([small, mid, big]))


def _criterion_spectral(_suite: _Suite) -> CriterionResult:
    start = time.perf_counter()
    rng = np.random.default_rng(11)
    failures = []
    for k in range(200):
        z = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        h = z + z.conj().T
        got = hermitian_eig(h).eigenvalues
        want = _eig2_roots(h)
        if np.max(np.abs(got - want)) > 1e-8 * max(1.0, float(np.linalg.norm(h))):
            failures.append(f"2x2 case {k}")
            break
    for k in range(200):
        z = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        h = z + z.conj().T
        got = hermitian_eig(h).eigenvalues
        want = _eig3_roots(h)
        if np.max(np.abs(got - want)) > 1e-8 * max(1.0, float(np.linalg.norm(h))):
            failures.append(f"3x3 case {k}")
            break
    for n in (2, 3, 4, 5, 6):
        family = random_commuting_family(n, seed=300 + n)
        joint = simultaneous_diagonalize([family.a, family.b, family.c], seed=300 + n)
        planted = sorted(zip(*(family.eigenvalues[j] for j in range(3))), key=_triple_key)
        recovered = sorted(zip(*(joint.eigenvalues[j] for j in range(3))), key=_triple_key)
        err = max(
            abs(p - r)
            for planted_t, recovered_t in zip(planted, recovered)
            for p, r in zip(planted_t, recovered_t)
        )
        if err > 1e-8:
            failures.append(f"joint diagonalization n={n} err {err:.2e}")
    sx = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
    sz = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=np.complex128)
    try:
        simultaneous_diagonalize([sx, sz])
        failures.append("non-commuting pair was accepted")
    except CommutationError:
        pass
    for n in (2, 4, 7):
        z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        psd = z @ z.conj().T
        root = sqrt_psd(psd)
        if _rel_err(root @ root, psd) > 1e-8:
            failures.append(f"sqrt square-back n={n}")
    elapsed = time.perf_counter() - start
    return CriterionResult(
        7,
        "eigensolver against closed forms",
        not failures,
        "; ".join(failures) if failures else "2x2/3x3 roots, planted spectra, rejection, sqrt all good",
        elapsed,
    )


def _triple_key(triple):
    return tuple(part for value in triple for part in (value.real, value.imag))


def _criterion_projection(suite: _Suite) -> CriterionResult:
    start = time.perf_counter()
    worst = 0.0
    eye2 = np.eye(2, dtype=np.complex128)
    e1 = np.array([0.0, 1.0], dtype=np.complex128)
    for (n, _mode, _i), bundle in suite.plain().items():
        cf = bundle.ground_truth.cf
        gauge = sqrt_psd(cf.d, inverse=True)
        gauged = local_transform(bundle.rho, bundle.shape, (eye2, eye2, eye2, gauge))
        projected = partial_projection(gauged, bundle.shape, 0, e1)
        expected = build_canonical_22n(cf.a, cf.b)
        scale = max(1.0, float(np.max(np.abs(expected))))
        worst = max(worst, float(np.max(np.abs(projected - expected))) / scale)
    elapsed = time.perf_counter() - start
    return CriterionResult(
        8,
        "gauged projection matches the two-qubit form",
        worst <= 1e-9,
        f"max entry deviation {worst:.2e}",
        elapsed,
    )


def _criterion_serialization(_suite: _Suite) -> CriterionResult:
    start = time.perf_counter()
    rng = np.random.default_rng(23)
    ok = True
    detail = "100 matrices round-tripped bitwise"
    for k in range(100):
        pick = k % 3
        if pick == 0:
            dims = (int(rng.integers(1, 13)),)
        elif pick == 1:
            dims = (2, int(rng.integers(1, 7)))
        else:
            dims = (2, 2, int(rng.integers(1, 4)))
        side = math.prod(dims)
        m = rng.standard_normal((side, side)) + 1j * rng.standard_normal((side, side))
        # sprinkle exact integers and signed zeros to stress the grammar
        m[rng.uniform(size=m.shape) < 0.25] = float(rng.integers(-3, 4))
        if side > 1:
            m[0, 1] = complex(-0.0, 0.0)
        text = matrix_to_json(m, dims)
        back, shape = matrix_from_json(text)
        again = matrix_to_json(back, shape.dims)
        if back.tobytes() != m.tobytes() or shape.dims != dims or again != text:
            ok = False
            detail = f"case {k} with dims {dims} did not round trip"
            break
    elapsed = time.perf_counter() - start
    return CriterionResult(9, "matrix files round trip bitwise", ok, detail, elapsed)


_CRITERIA = (
    _criterion_round_trip,
    _criterion_ppt_rank,
    _criterion_kernel_families,
    _criterion_decompose,
    _criterion_certify_disguised,
    _criterion_ghz,
    _criterion_spectral,
    _criterion_projection,
)


def run_suite(quick: bool = False) -> list[CriterionResult]:
    """Run the acceptance criteria and return one result per criterion.

    Quick mode runs criteria 1 through 8 on the reduced configuration; the
    full mode adds the serialization criterion.
    """
    config = QUICK_CONFIG if quick else FULL_CONFIG
    suite = _Suite(config=config)
    results = [criterion(suite) for criterion in _CRITERIA]
    if not quick:
        results.append(_criterion_serialization(suite))
    return results
