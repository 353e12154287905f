"""Filtered chain complexes with weighted exact triangles and
fragmentation, interleaving and bottleneck pseudo-metrics."""

from .complexes import FilteredComplex, e1, e2, interval_complex
from .field_linalg import SparseMatrix, reduce_columns, solve_masked
from .morphisms import (FilteredChainMap, BudgetExceeded, cone, compose,
                        eta, find_homotopy, hom_complex, identity_map,
                        is_chain_map, map_from_entries, map_shift,
                        min_homotopy_shift, shift_map, spectral_invariant,
                        translate_map, zero_map)
from .persistence import (Bar, Barcode, barcode, bottleneck, interleaving,
                          interleaving_bruteforce, normal_form,
                          persistence_dims)

__all__ = [
    "Bar", "Barcode", "BudgetExceeded", "FilteredChainMap",
    "FilteredComplex", "SparseMatrix", "barcode", "bottleneck", "cone",
    "compose", "e1", "e2", "eta", "find_homotopy", "hom_complex",
    "identity_map", "interleaving", "interleaving_bruteforce",
    "interval_complex", "is_chain_map", "map_from_entries", "map_shift",
    "min_homotopy_shift", "normal_form", "persistence_dims",
    "reduce_columns", "shift_map", "solve_masked", "spectral_invariant",
    "translate_map", "zero_map",
]
