"""Transfer-operator numerics on discretized symbolic spaces.

Pressure, spectral radius, Perron eigendata, equilibrium measures,
entropy diagnostics and inverse-temperature scans for weighted
prepend-and-sum operators with locally constant potentials.
"""

from ._kernels import BACKEND, HAS_NUMBA
from .config import check_cylinder_count, cylinder_cap, set_cylinder_cap
from .errors import ConfigError, NumericError, ResourceCapError
from .measures import (
    CylinderMeasure,
    EntropyReport,
    check_eigenmeasure,
    check_intertwine,
    check_invariance,
    equilibrium_measure,
    extend_eigenmeasure,
    extend_equilibrium,
    integral_term,
    invariance_defect,
    marginalize,
    product_measure,
    relative_entropy,
    specific_entropy,
    variational_gap,
)
from .potential import (
    Potential,
    RenewalTail,
    VariationPotential,
    builtin_constant,
    builtin_ising,
    builtin_renewal,
    builtin_xy,
    scale,
    truncate,
)
from .scan import PressureCurve, pressure_curve
from .space import (
    SymbolSpace,
    enumerate_cylinders,
    finite_space,
    gauss_legendre_space,
    index_word,
    prepend,
    shift,
    space_from_json,
    space_to_json,
    uniform_space,
    word_index,
)
from .spectral import (
    PressureEstimate,
    SpectralData,
    gelfand_radius,
    perron_eigendata,
    power_iterate,
    pressure_bracket,
    xi_sequence,
)
from .transfer import (
    CylinderFunction,
    TransferKernel,
    apply_transfer,
    brute_force_iterate,
    build_kernel,
    iterate_one,
    lift,
    ones_function,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "HAS_NUMBA",
    "ConfigError",
    "CylinderFunction",
    "CylinderMeasure",
    "EntropyReport",
    "NumericError",
    "Potential",
    "PressureCurve",
    "PressureEstimate",
    "RenewalTail",
    "ResourceCapError",
    "SpectralData",
    "SymbolSpace",
    "TransferKernel",
    "VariationPotential",
    "apply_transfer",
    "brute_force_iterate",
    "build_kernel",
    "builtin_constant",
    "builtin_ising",
    "builtin_renewal",
    "builtin_xy",
    "check_eigenmeasure",
    "check_intertwine",
    "check_invariance",
    "check_cylinder_count",
    "cylinder_cap",
    "enumerate_cylinders",
    "equilibrium_measure",
    "extend_eigenmeasure",
    "extend_equilibrium",
    "finite_space",
    "gauss_legendre_space",
    "index_word",
    "gelfand_radius",
    "integral_term",
    "invariance_defect",
    "iterate_one",
    "lift",
    "marginalize",
    "ones_function",
    "perron_eigendata",
    "power_iterate",
    "prepend",
    "pressure_bracket",
    "pressure_curve",
    "product_measure",
    "relative_entropy",
    "scale",
    "set_cylinder_cap",
    "shift",
    "space_from_json",
    "space_to_json",
    "specific_entropy",
    "truncate",
    "uniform_space",
    "variational_gap",
    "word_index",
    "xi_sequence",
]
