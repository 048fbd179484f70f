"""Spectra, determinants, spanning trees and zeta functions of self-similar
fractal graphs, computed by spectral decimation and checked against exact
linear algebra on the level-n graphs."""
from .decimation import SpectrumMultiset, preimage_set, preimages, spectrum
from .determinants import (FactoredReal, complexity_constant, det_expansion, discrete_det,
                           spanning_trees)
from .graphs import build_graph, laplacian
from .models import MODEL_NAMES, ModelSpec, RationalMap, builtin_model, validate_spec
from .oracle import char_poly, dense_spectrum, matrix_tree_count, pseudo_det
from .zeta import (SeriesEval, complex_dimensions, mellin_check, poly_zeta, poly_zeta_at0,
                   regularized_det, spectral_zeta, spectral_zeta_truncated)

__version__ = "0.1.0"

__all__ = [
    "MODEL_NAMES", "ModelSpec", "RationalMap", "builtin_model", "validate_spec",
    "build_graph", "laplacian",
    "SpectrumMultiset", "preimages", "preimage_set", "spectrum",
    "FactoredReal", "discrete_det", "spanning_trees", "complexity_constant", "det_expansion",
    "char_poly", "pseudo_det", "dense_spectrum", "matrix_tree_count",
    "SeriesEval", "poly_zeta", "poly_zeta_at0", "spectral_zeta", "spectral_zeta_truncated",
    "regularized_det", "complex_dimensions", "mellin_check",
]
