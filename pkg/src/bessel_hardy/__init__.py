"""Bessel heat semigroups, power-weight measures, admissible coverings and local
Hardy-space atoms, with numerical checks of the kernel conditions."""

__version__ = "0.1.0"

from .errors import (BesselHardyError, BesselOverflowError, ConfigError, DomainError, PoleError,
                     QuadratureError)
from .specfun import bessel_i, bessel_i_eval, bessel_i_reduced, bessel_i_scaled, gamma_fn
from .measure import (Flavor, NuVector, measure_ball_comparable, measure_ball_exact,
                      measure_ball_multidim_comparable, measure_cuboid, measure_interval)
from .cuboid import Cuboid
from .kernel import Branch, KernelSpec, k_conjugated_1d, kernel_product, w_classical_1d, w_exotic_1d
from .covering import (BoxProduct, CylinderCovering, DyadicCovering, PartitionOfUnity, check_covering,
                       make_covering)
from .grid import GridFunction
from .atoms import Atom, AtomicDecomposition, localize_and_decompose, mean_split, validate_atom
from .quadrature import QuadratureSpec
from .maximal import apply_semigroup, h1_norm_estimate, maximal_function, maximal_norm

__all__ = [n for n in dir() if not n.startswith("_")]
