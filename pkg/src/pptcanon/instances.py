"""Seeded instance generators and the matrix file grammar.

Randomness is drawn from PCG64 generators keyed by (seed, stream) pairs, one
stream per purpose, so adding draws for one purpose never perturbs another
and every artifact is reproducible from its seed alone.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .canonical import CanonicalForm, build_canonical_222n
from .errors import MatrixFormatError
from .tensor import SystemShape, local_transform

# Stream identifiers; each purpose owns one so draws never interleave.
_BASIS_STREAM = 1
_EIGENVALUE_STREAM = 2
_WEIGHT_STREAM = 3
_DISGUISE_STREAM = 4
_UNITARY_STREAM = 5


def _generator(seed: int, stream: int) -> np.random.Generator:
    seed = int(seed)
    if seed < 0:
        raise ValueError(f"seed must be nonnegative, got {seed}")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, stream])))


def haar_from_generator(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary drawn from an existing generator.

    QR of a complex Ginibre matrix, with the R diagonal phases pushed into Q
    so the distribution is exactly Haar rather than QR-convention dependent.
    """
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r).copy()
    mags = np.abs(diag)
    phases = np.where(mags > 0, diag / np.where(mags > 0, mags, 1.0), 1.0)
    return q * phases


def haar_unitary(n: int, seed: int) -> np.ndarray:
    """Haar-distributed n x n unitary, reproducible from the seed."""
    if n < 1:
        raise ValueError(f"dimension must be positive, got {n}")
    return haar_from_generator(n, _generator(seed, _UNITARY_STREAM))


@dataclass
class CommutingFamily:
    """Commuting normal triple with its planted spectral data."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    basis: np.ndarray
    eigenvalues: tuple[np.ndarray, np.ndarray, np.ndarray]


def random_commuting_family(n: int, seed: int, scale: float = 1.0) -> CommutingFamily:
    """Draw three commuting normal matrices with a shared Haar eigenbasis.

    Eigenvalues are uniform on the complex disk of radius ``scale``.
    """
    if n < 1:
        raise ValueError(f"dimension must be positive, got {n}")
    basis = haar_from_generator(n, _generator(seed, _BASIS_STREAM))
    rng = _generator(seed, _EIGENVALUE_STREAM)
    spectra = []
    for _ in range(3):
        radius = scale * np.sqrt(rng.uniform(0.0, 1.0, n))
        angle = rng.uniform(0.0, 2.0 * np.pi, n)
        spectra.append(radius * np.exp(1j * angle))
    mats = [(basis * vals) @ basis.conj().T for vals in spectra]
    return CommutingFamily(
        a=mats[0],
        b=mats[1],
        c=mats[2],
        basis=basis,
        eigenvalues=(spectra[0], spectra[1], spectra[2]),
    )


@dataclass
class GroundTruth:
    """Generating data of an instance: the canonical form and, for disguised
    instances, the local operators that were applied."""

    cf: CanonicalForm
    disguise_ops: Optional[list[np.ndarray]]


@dataclass
class InstanceBundle:
    """A generated state together with how it was made."""

    rho: np.ndarray
    shape: SystemShape
    label: str
    seed: int
    ground_truth: Optional[GroundTruth]


def random_instance(
    n: int,
    seed: int,
    d_mode: str = "identity",
    disguise: bool = False,
) -> InstanceBundle:
    """Generate a canonical instance, optionally hidden by local operators.

    ``d_mode`` selects the weight matrix: "identity", or "random_pd" for a
    random positive definite d with eigenvalues uniform in [0.5, 2]. With
    ``disguise`` the state is conjugated by one invertible operator per
    subsystem (Haar unitaries with singular values uniform in [0.8, 1.25]),
    which preserves both PPT-ness and separability.
    """
    family = random_commuting_family(n, seed)
    if d_mode == "identity":
        d = np.eye(n, dtype=np.complex128)
    elif d_mode == "random_pd":
        rng = _generator(seed, _WEIGHT_STREAM)
        frame = haar_from_generator(n, rng)
        weights = rng.uniform(0.5, 2.0, n)
        d = (frame * weights) @ frame.conj().T
        d = 0.5 * (d + d.conj().T)
    else:
        raise ValueError(f"unknown d_mode {d_mode!r}")
    cf = CanonicalForm(a=family.a, b=family.b, c=family.c, d=d)
    rho = build_canonical_222n(cf)
    shape = SystemShape((2, 2, 2, n))
    label = "canonical"
    ops = None
    if disguise:
        rng = _generator(seed, _DISGUISE_STREAM)
        ops = []
        for dim in shape.dims:
            u = haar_from_generator(dim, rng)
            singular_values = rng.uniform(0.8, 1.25, dim)
            ops.append(u * singular_values)
        rho = local_transform(rho, shape, ops)
        label = "disguised"
    return InstanceBundle(rho=rho, shape=shape, label=label, seed=int(seed), ground_truth=GroundTruth(cf=cf, disguise_ops=ops))


def ghz_werner(p: float) -> np.ndarray:
    """Mixture of the three-qubit GHZ projector with white noise.

    Returns p |GHZ><GHZ| + (1 - p)/8 * identity on (2, 2, 2).
    """
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"mixing parameter must lie in [0, 1], got {p}")
    ghz = np.zeros(8, dtype=np.complex128)
    ghz[0] = 1.0 / math.sqrt(2.0)
    ghz[7] = 1.0 / math.sqrt(2.0)
    return p * np.outer(ghz, ghz.conj()) + (1.0 - p) / 8.0 * np.eye(8, dtype=np.complex128)


def format_float(x: float) -> str:
    """Shortest decimal form that parses back to exactly the same double.

    Integral values are written without a fraction part ("1", not "1.0");
    negative zero keeps its sign. repr covers everything else with round-trip
    precision.
    """
    x = float(x)
    if x == 0.0:
        return "-0.0" if math.copysign(1.0, x) < 0 else "0"
    if x == int(x) and abs(x) <= 2**53:
        return str(int(x))
    return repr(x)


def matrix_to_json(m, dims) -> str:
    """Serialize one matrix to the file grammar, newline terminated.

    The text form is {"dims": [...], "matrix": [[[re, im], ...], ...]} with
    the matrix stored row-major, one [re, im] pair per entry, and no spaces.
    """
    shape = SystemShape(tuple(dims))
    a = np.asarray(m, dtype=np.complex128)
    side = shape.total
    if a.shape != (side, side):
        raise MatrixFormatError(
            f"matrix has shape {a.shape} but dims {shape.dims} require {side}x{side}"
        )
    rows = []
    for i in range(side):
        cells = ",".join(
            f"[{format_float(a[i, j].real)},{format_float(a[i, j].imag)}]" for j in range(side)
        )
        rows.append(f"[{cells}]")
    dims_text = ",".join(str(d) for d in shape.dims)
    return '{"dims":[' + dims_text + '],"matrix":[' + ",".join(rows) + "]}\n"


def _reject_constant(name: str):
    raise MatrixFormatError(f"non-finite number {name!r} is not allowed")


def _as_real(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise MatrixFormatError(f"{where} must be a number, got {value!r}")
    return float(value)


def matrix_from_json(text: str) -> tuple[np.ndarray, SystemShape]:
    """Parse the matrix file grammar back into an array and its shape."""
    try:
        obj = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise MatrixFormatError(f"not valid JSON: {exc}") from exc
    if not isinstance(obj, dict) or set(obj) != {"dims", "matrix"}:
        raise MatrixFormatError('top level must be an object with keys "dims" and "matrix"')
    dims = obj["dims"]
    if not isinstance(dims, list) or not dims:
        raise MatrixFormatError('"dims" must be a nonempty list of positive integers')
    for d in dims:
        if isinstance(d, bool) or not isinstance(d, int) or d < 1:
            raise MatrixFormatError(f'"dims" must contain positive integers, got {d!r}')
    shape = SystemShape(tuple(dims))
    side = shape.total
    rows = obj["matrix"]
    if not isinstance(rows, list) or len(rows) != side:
        raise MatrixFormatError(f'"matrix" must be a list of {side} rows')
    out = np.empty((side, side), dtype=np.complex128)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != side:
            raise MatrixFormatError(f"row {i} must be a list of {side} entries")
        for j, cell in enumerate(row):
            if not isinstance(cell, list) or len(cell) != 2:
                raise MatrixFormatError(f"entry ({i},{j}) must be a [re, im] pair")
            re = _as_real(cell[0], f"entry ({i},{j}) real part")
            im = _as_real(cell[1], f"entry ({i},{j}) imaginary part")
            if not (math.isfinite(re) and math.isfinite(im)):
                raise MatrixFormatError(f"entry ({i},{j}) is not finite")
            out[i, j] = complex(re, im)
    return out, shape


def save_matrix(path, m, dims) -> None:
    """Write a matrix file; the output is byte-deterministic."""
    text = matrix_to_json(m, dims)
    with open(path, "wb") as fh:
        fh.write(text.encode("ascii"))


def load_matrix(path) -> tuple[np.ndarray, SystemShape]:
    """Read a matrix file written by save_matrix."""
    with open(path, "rb") as fh:
        text = fh.read().decode("utf-8")
    return matrix_from_json(text)
