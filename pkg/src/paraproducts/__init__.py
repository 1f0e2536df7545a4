"""Wavelet paraproducts of H^1 and BMO functions on finite dyadic grids."""

from .errors import (
    AtomError,
    ConfigurationError,
    DomainError,
    FilterError,
    GeometryError,
    GridFormatError,
    LevelError,
    NumericalError,
    ParaproductError,
)
from .grid import Box, DyadicCube, GridFunction, dilate_cube, inner_product, integrate, read_grid, write_grid
from .filters import DEFAULT_FILTER, FilterPair, filter_catalog_csv, load_filter, make_filter
from .wavelet import WaveletCoeffs, dwt_forward, dwt_inverse, labels, project, projections, synthesize
from .spaces import (
    GrandMaximalParams,
    NormReport,
    bmo_plus_norm,
    bmo_wavelet_norm,
    check_scalar_log_inequality,
    grand_maximal,
    h1_square_norm,
    hlog_norm,
    holder_product_bound,
    lp_norm,
    luxemburg_log_norm,
    theta,
)
from .paraproduct import (
    ProductSplit,
    bilinear_B,
    cz_matrix_constant,
    molecule_remainder,
    neighbor_offsets,
    p_delta,
    paraproduct_split,
    pi3_l1_bound,
    s0,
)
from .atoms import (
    AtomicDecomposition,
    PsiAtom,
    atomic_decompose,
    classical_atom_pairing,
    pi2_atom_split,
    validate_psi_atom,
)
from .divcurl import (
    MultiplierOperator,
    VectorField,
    divcurl_product,
    hilbert_transform,
    potential_fields,
    riesz_transform,
)
from .config import RunConfig
from .corpus import CorpusSpec, gen_corpus
from .selfcheck import run_selfcheck

__version__ = "0.1.0"
