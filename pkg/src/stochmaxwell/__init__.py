"""Energy-preserving operator splitting for 3D stochastic Maxwell equations.

Two time integrators (Splitting I and II) built from periodic compact
differences, implicit-midpoint line sweeps and an exact pointwise rotation for
the multiplicative Stratonovich noise.
"""

from .circulant import (
    CirculantSpectra,
    LineSystemParams,
    apply_stencil,
    circulant_spectra,
    compact_derivative,
    solve_pair_line,
    solve_pair_lines,
)
from .diagnostics import (
    OrderTable,
    convergence_orders,
    discrete_energy,
    fit_order,
    l2_error,
    mean_square_error,
)
from .grid import FieldState, Grid, Line, Medium, build_grid, init_fields, line_view, write_line
from .noise import (
    BasisTables,
    NoiseSpec,
    apply_rotation,
    coarsen_path,
    increments,
    precompute_basis,
    sample_increment,
)
from .steppers import MethodId, StageDescriptor, Sweep, deterministic_stage, evolve, step

__version__ = "0.1.0"
