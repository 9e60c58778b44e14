"""Command line front end.

Exit codes: 0 success (and PPT/verified where that is the question), 2 for an
NPT or otherwise invalid state, 3 when a structural hypothesis fails (wrong
rank, extraction failure, inconclusive frame search), 64 for usage errors and
74 for I/O or file format problems.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .canonical import extract_canonical
from .errors import (
    CanonicalExtractionError,
    CommutationError,
    DimensionMismatchError,
    MatrixFormatError,
    NotPositiveSemidefiniteError,
)
from .instances import format_float, load_matrix, random_instance, save_matrix
from .selftest import run_suite
from .separability import (
    CertificationStatus,
    ProductDecomposition,
    ProductTerm,
    certify_separability,
    reconstruct_decomposition,
)
from .tensor import is_ppt, psd_check, rank_kernel

EX_OK = 0
EX_NPT = 2
EX_HYPOTHESIS = 3
EX_USAGE = 64
EX_IOERR = 74

_CERT_FORMAT = "pptcanon-certificate-1"
_TRUTH_FORMAT = "pptcanon-instance-1"
_CF_FORMAT = "pptcanon-canonical-1"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _nonneg_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be nonnegative, got {value}")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be positive, got {value}")
    return value


def _emit_json(value, parts: list[str]) -> None:
    if value is None:
        parts.append("null")
    elif isinstance(value, str):
        parts.append(json.dumps(value))
    elif isinstance(value, bool):
        parts.append("true" if value else "false")
    elif isinstance(value, (int, np.integer)):
        parts.append(str(int(value)))
    elif isinstance(value, float):
        parts.append(format_float(value))
    elif isinstance(value, dict):
        parts.append("{")
        for i, (key, item) in enumerate(value.items()):
            if i:
                parts.append(",")
            parts.append(json.dumps(str(key)))
            parts.append(":")
            _emit_json(item, parts)
        parts.append("}")
    elif isinstance(value, (list, tuple)):
        parts.append("[")
        for i, item in enumerate(value):
            if i:
                parts.append(",")
            _emit_json(item, parts)
        parts.append("]")
    else:
        raise TypeError(f"cannot serialize {type(value).__name__}")


def _write_doc(path, doc) -> None:
    parts: list[str] = []
    _emit_json(doc, parts)
    parts.append("\n")
    with open(path, "wb") as fh:
        fh.write("".join(parts).encode("ascii"))


def _read_doc(path) -> dict:
    with open(path, "rb") as fh:
        text = fh.read().decode("utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MatrixFormatError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise MatrixFormatError("top level must be an object")
    return doc


def _pairs(arr) -> list:
    a = np.asarray(arr, dtype=np.complex128)
    if a.ndim == 1:
        return [[float(z.real), float(z.imag)] for z in a]
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def _vector_from_pairs(obj, length: int, where: str) -> np.ndarray:
    if not isinstance(obj, list) or len(obj) != length:
        raise MatrixFormatError(f"{where} must be a list of {length} [re, im] pairs")
    out = np.empty(length, dtype=np.complex128)
    for i, cell in enumerate(obj):
        if not isinstance(cell, list) or len(cell) != 2:
            raise MatrixFormatError(f"{where}[{i}] must be a [re, im] pair")
        out[i] = complex(float(cell[0]), float(cell[1]))
    return out


def _derive_n(side: int, declared) -> int:
    if declared is not None:
        if side != 8 * declared:
            raise _UsageError(
                f"state of side {side} is inconsistent with n={declared} (needs side {8 * declared})"
            )
        return declared
    if side % 8 != 0:
        raise _UsageError(f"state of side {side} does not live on a 2x2x2xN system")
    return side // 8


def _cmd_gen(args) -> int:
    bundle = random_instance(args.n, args.seed, d_mode=args.d_mode, disguise=args.disguise)
    save_matrix(args.out, bundle.rho, bundle.shape.dims)
    truth_path = args.truth if args.truth else args.out + ".truth.json"
    truth = bundle.ground_truth
    doc = {
        "format": _TRUTH_FORMAT,
        "label": bundle.label,
        "seed": bundle.seed,
        "n": args.n,
        "d_mode": args.d_mode,
        "cf": {
            "a": _pairs(truth.cf.a),
            "b": _pairs(truth.cf.b),
            "c": _pairs(truth.cf.c),
            "d": _pairs(truth.cf.d),
        },
        "disguise_ops": None
        if truth.disguise_ops is None
        else [_pairs(op) for op in truth.disguise_ops],
    }
    _write_doc(truth_path, doc)
    print(f"state: {args.out}")
    print(f"truth: {truth_path}")
    print(f"label: {bundle.label}, n={args.n}, seed={args.seed}")
    return EX_OK


def _cmd_check(args) -> int:
    m, shape = load_matrix(args.file)
    report = psd_check(m)
    print(f"dims: {list(shape.dims)}")
    print(f"hermitian: {'yes' if report.is_hermitian else 'no'}")
    print(f"min eigenvalue: {report.min_eigenvalue:.6e}")
    if not report.is_psd:
        print("verdict: not a valid PSD state")
        return EX_NPT
    print(f"rank: {rank_kernel(m).rank}")
    ppt = is_ppt(m, shape)
    for entry in ppt.entries:
        subsystems = ",".join(str(s) for s in entry.subsystems)
        print(f"transpose {{{subsystems}}}: min eigenvalue {entry.min_eigenvalue:.6e}")
    print(f"verdict: {'PPT' if ppt.is_ppt else 'NPT'}")
    return EX_OK if ppt.is_ppt else EX_NPT


def _cmd_canonize(args) -> int:
    m, shape = load_matrix(args.file)
    n = _derive_n(shape.total, args.n)
    try:
        extraction = extract_canonical(m, n)
    except (CanonicalExtractionError, CommutationError, NotPositiveSemidefiniteError) as exc:
        print(f"not canonical: {exc}", file=sys.stderr)
        return EX_HYPOTHESIS
    cf = extraction.cf
    doc = {
        "format": _CF_FORMAT,
        "n": n,
        "a": _pairs(cf.a),
        "b": _pairs(cf.b),
        "c": _pairs(cf.c),
        "d": _pairs(cf.d),
        "gauge": _pairs(extraction.gauge),
    }
    _write_doc(args.out, doc)
    print(f"canonical form: {args.out} (n={n})")
    return EX_OK


def _cmd_decompose(args) -> int:
    m, shape = load_matrix(args.file)
    n = _derive_n(shape.total, args.n)
    try:
        result = certify_separability(m, n, tol=args.tol, budget=args.budget, seed=args.seed)
    except NotPositiveSemidefiniteError as exc:
        print(f"invalid state: {exc}", file=sys.stderr)
        return EX_NPT
    if result.status is CertificationStatus.NOT_PPT:
        print(f"NPT: {result.diagnostic}", file=sys.stderr)
        return EX_NPT
    if result.status is CertificationStatus.HYPOTHESIS_NOT_MET:
        print(f"hypothesis not met: {result.diagnostic}", file=sys.stderr)
        return EX_HYPOTHESIS
    cert = result.certificate
    doc = {
        "format": _CERT_FORMAT,
        "n": n,
        "seed": cert.seed,
        "tol": cert.tol,
        "residual": cert.residual,
        "terms": [
            {
                "psi": _pairs(term.psi),
                "phi": _pairs(term.phi),
                "omega": _pairs(term.omega),
                "g": _pairs(term.g),
            }
            for term in cert.decomposition.terms
        ],
        "local_ops": [_pairs(op) for op in cert.local_ops],
        "ppt": {
            "threshold": result.ppt.threshold,
            "bipartitions": [
                {"subsystems": list(entry.subsystems), "min_eigenvalue": entry.min_eigenvalue}
                for entry in result.ppt.entries
            ],
        },
    }
    _write_doc(args.out, doc)
    print(f"certificate: {args.out}")
    print(f"terms: {len(cert.decomposition.terms)}")
    print(f"residual: {cert.residual:.6e}")
    return EX_OK


def _decomposition_from_doc(doc: dict) -> tuple[ProductDecomposition, int, float]:
    if doc.get("format") != _CERT_FORMAT:
        raise MatrixFormatError(f'certificate must declare format "{_CERT_FORMAT}"')
    n = doc.get("n")
    if not isinstance(n, int) or n < 1:
        raise MatrixFormatError('certificate field "n" must be a positive integer')
    terms_doc = doc.get("terms")
    if not isinstance(terms_doc, list):
        raise MatrixFormatError('certificate field "terms" must be a list')
    terms = []
    for k, term in enumerate(terms_doc):
        if not isinstance(term, dict):
            raise MatrixFormatError(f"term {k} must be an object")
        terms.append(
            ProductTerm(
                psi=_vector_from_pairs(term.get("psi"), 2, f"term {k} psi"),
                phi=_vector_from_pairs(term.get("phi"), 2, f"term {k} phi"),
                omega=_vector_from_pairs(term.get("omega"), 2, f"term {k} omega"),
                g=_vector_from_pairs(term.get("g"), n, f"term {k} g"),
            )
        )
    tol = doc.get("tol")
    if not isinstance(tol, (int, float)) or isinstance(tol, bool) or tol <= 0:
        raise MatrixFormatError('certificate field "tol" must be a positive number')
    return ProductDecomposition(terms=terms), n, float(tol)


def _cmd_verify(args) -> int:
    m, shape = load_matrix(args.state)
    decomposition, n, stored_tol = _decomposition_from_doc(_read_doc(args.certificate))
    if shape.total != 8 * n:
        raise _UsageError(
            f"state of side {shape.total} does not match certificate n={n}"
        )
    tol = args.tol if args.tol is not None else stored_tol
    recon = reconstruct_decomposition(decomposition, n)
    scale = float(np.linalg.norm(m))
    residual = float(np.linalg.norm(m - recon)) / scale if scale > 0 else float(
        np.linalg.norm(recon)
    )
    print(f"terms: {len(decomposition.terms)}")
    print(f"residual: {residual:.6e}")
    print(f"tolerance: {tol:.6e}")
    if residual <= tol:
        print("verdict: verified")
        return EX_OK
    print("verdict: residual exceeds tolerance")
    return 1


def _cmd_selftest(args) -> int:
    results = run_suite(quick=args.quick)
    width = max(len(r.name) for r in results)
    all_passed = True
    for r in results:
        flag = "PASS" if r.passed else "FAIL"
        print(f"{r.index}  {r.name:<{width}}  {flag}  {r.seconds:7.2f}s  {r.detail}")
        all_passed = all_passed and r.passed
    print(f"overall: {'PASS' if all_passed else 'FAIL'}")
    return EX_OK if all_passed else 1


def _build_parser() -> _Parser:
    parser = _Parser(prog="pptcanon", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a seeded instance")
    gen.add_argument("--n", type=_positive_int, required=True, help="rank of the instance")
    gen.add_argument("--seed", type=_nonneg_int, default=0)
    gen.add_argument("--d-mode", choices=("identity", "random_pd"), default="identity")
    gen.add_argument("--disguise", action="store_true", help="hide the instance with local operators")
    gen.add_argument("--out", required=True, help="state file to write")
    gen.add_argument("--truth", help="ground truth file (default: OUT.truth.json)")
    gen.set_defaults(handler=_cmd_gen)

    check = sub.add_parser("check", help="PSD, rank and PPT report for a state file")
    check.add_argument("file")
    check.set_defaults(handler=_cmd_check)

    canonize = sub.add_parser("canonize", help="extract the canonical form of a state")
    canonize.add_argument("file")
    canonize.add_argument("--n", type=_positive_int, help="expected rank (default: side/8)")
    canonize.add_argument("--out", required=True, help="canonical form file to write")
    canonize.set_defaults(handler=_cmd_canonize)

    decompose = sub.add_parser("decompose", help="certify separability of a state")
    decompose.add_argument("file")
    decompose.add_argument("--n", type=_positive_int, help="expected rank (default: side/8)")
    decompose.add_argument("--tol", type=float, default=1e-7)
    decompose.add_argument("--budget", type=_nonneg_int, default=200)
    decompose.add_argument("--seed", type=_nonneg_int, default=0)
    decompose.add_argument("--out", required=True, help="certificate file to write")
    decompose.set_defaults(handler=_cmd_decompose)

    verify = sub.add_parser("verify", help="check a certificate against a state file")
    verify.add_argument("state")
    verify.add_argument("certificate")
    verify.add_argument("--tol", type=float, help="override the certificate tolerance")
    verify.set_defaults(handler=_cmd_verify)

    selftest = sub.add_parser("selftest", help="run the acceptance suite")
    selftest.add_argument("--quick", action="store_true", help="reduced sizes, a few seconds")
    selftest.set_defaults(handler=_cmd_selftest)
    return parser


def run(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.handler(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EX_USAGE
    except DimensionMismatchError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EX_USAGE
    except (MatrixFormatError, OSError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EX_IOERR


def entry() -> None:
    raise SystemExit(run())
