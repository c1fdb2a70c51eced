"""GF(2) linear algebra, digital nets, interlacing and t-value checks."""

from .gf2 import BitMatrix, rank
from .matrixfile import (
    MATRIX_DIR_ENV,
    file_checksum,
    format_matrices,
    load_matrices,
    load_net,
    manifest,
    matrix_dir,
    net_matrix_path,
    parse_matrices,
    save_matrices,
)
from .nets import (
    MAX_PRECISION,
    GeneratingMatrixSet,
    PointSet,
    check_equidistribution,
    deinterlace,
    digit_vector,
    generate_digital_net,
    interlace,
    interlace_matrices,
    level_vectors,
    sequence_to_net,
    sequence_to_net_matrices,
)
from .tvalue import count_selections, verify_order_sigma_t

__all__ = [
    "BitMatrix",
    "GeneratingMatrixSet",
    "MATRIX_DIR_ENV",
    "MAX_PRECISION",
    "PointSet",
    "check_equidistribution",
    "count_selections",
    "deinterlace",
    "digit_vector",
    "file_checksum",
    "format_matrices",
    "generate_digital_net",
    "interlace",
    "interlace_matrices",
    "level_vectors",
    "load_matrices",
    "load_net",
    "manifest",
    "matrix_dir",
    "net_matrix_path",
    "parse_matrices",
    "rank",
    "save_matrices",
    "sequence_to_net",
    "sequence_to_net_matrices",
    "verify_order_sigma_t",
]
