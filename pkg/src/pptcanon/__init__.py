"""Canonical forms and separable decompositions for PPT states on 2x2x2xN
systems.

The package recognizes states generated by a commuting quadruple (a, b, c, d)
of NxN matrices, extracts the quadruple back out of a state, certifies PPT
across all bipartitions, and turns the canonical structure into an explicit
separable decomposition with N product terms.
"""

from .canonical import (
    BlockAddress,
    CanonicalExtraction,
    CanonicalForm,
    CommutationReport,
    KernelFamilyReport,
    build_canonical_222n,
    build_canonical_22n,
    check_commutation,
    extract_canonical,
    verify_kernel_family,
    word_matrix,
)
from .errors import (
    BlockMismatchError,
    CanonicalExtractionError,
    CommutationError,
    ConvergenceError,
    DimensionMismatchError,
    MatrixFormatError,
    NotHermitianError,
    NotPositiveSemidefiniteError,
    PptcanonError,
    RankHypothesisError,
    SingularMatrixError,
)
from .instances import (
    CommutingFamily,
    GroundTruth,
    InstanceBundle,
    format_float,
    ghz_werner,
    haar_from_generator,
    haar_unitary,
    load_matrix,
    matrix_from_json,
    matrix_to_json,
    random_commuting_family,
    random_instance,
    save_matrix,
)
from .separability import (
    CertificationResult,
    CertificationStatus,
    ProductDecomposition,
    ProductTerm,
    SeparabilityCertificate,
    certify_separability,
    decompose_canonical,
    find_product_basis,
    reconstruct_decomposition,
)
from .spectral import (
    DEFAULT_TOL,
    EigenDecomposition,
    JointEigenDecomposition,
    hermitian_eig,
    simultaneous_diagonalize,
    sqrt_psd,
)
from .tensor import (
    BipartitionSpectrum,
    PptReport,
    PsdReport,
    RankKernelReport,
    SystemShape,
    bipartition_representatives,
    is_ppt,
    kron,
    local_transform,
    partial_projection,
    partial_transpose,
    psd_check,
    rank_kernel,
)

__version__ = "0.1.0"
