"""Periodic lattice, medium constants and the six-component field state."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

COMPONENTS = ("E1", "E2", "E3", "H1", "H2", "H3")
AXES = ("x", "y", "z")


def component_index(component: Union[str, int]) -> int:
    if isinstance(component, (int, np.integer)):
        if not 0 <= component < 6:
            raise ValueError(f"component index {component} out of range 0..5")
        return int(component)
    try:
        return COMPONENTS.index(component)
    except ValueError:
        raise ValueError(f"unknown component {component!r}; expected one of {COMPONENTS}") from None


def axis_index(axis: Union[str, int]) -> int:
    if isinstance(axis, (int, np.integer)):
        if not 0 <= axis < 3:
            raise ValueError(f"axis index {axis} out of range 0..2")
        return int(axis)
    try:
        return AXES.index(axis)
    except ValueError:
        raise ValueError(f"unknown axis {axis!r}; expected one of {AXES}") from None


@dataclass(frozen=True)
class Grid:
    """Uniform periodic lattice on a box.

    Node ``i`` sits at ``x_L + i*h_x`` for ``i = 0..I-1``; node ``I`` is identified
    with node 0, so ``h_x = (x_R - x_L) / I``.
    """

    bounds: tuple[tuple[float, float], tuple[float, float], tuple[float, float]]
    counts: tuple[int, int, int]
    tau: float
    N: int = 1

    @property
    def steps(self) -> tuple[float, float, float]:
        return tuple((hi - lo) / n for (lo, hi), n in zip(self.bounds, self.counts))

    @property
    def h_x(self) -> float:
        return self.steps[0]

    @property
    def h_y(self) -> float:
        return self.steps[1]

    @property
    def h_z(self) -> float:
        return self.steps[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.counts

    @property
    def cell_volume(self) -> float:
        hx, hy, hz = self.steps
        return hx * hy * hz

    def nodes(self, axis: Union[str, int]) -> np.ndarray:
        a = axis_index(axis)
        lo, _ = self.bounds[a]
        return lo + np.arange(self.counts[a]) * self.steps[a]

    def mesh(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return np.meshgrid(self.nodes(0), self.nodes(1), self.nodes(2), indexing="ij")


@dataclass(frozen=True)
class Medium:
    eps: float = 1.0
    mu: float = 1.0
    lam: float = 0.0
    delta: float = 1e-12

    def __post_init__(self):
        if not (self.eps >= self.delta and self.mu >= self.delta):
            raise ValueError(f"eps and mu must be >= {self.delta} (got eps={self.eps}, mu={self.mu})")
        if not np.isfinite(self.lam):
            raise ValueError("lambda must be finite")


def build_grid(bounds, counts: Sequence[int], tau: float, N: int = 1) -> Grid:
    """Validate and build a :class:`Grid`.

    ``bounds`` is either one ``(lo, hi)`` pair used for all three axes or three pairs.
    Counts must be odd and at least 3: the compact averaging matrix has eigenvalues
    ``1 + cos(2*pi*k/n)``, which vanish at ``k = n/2`` when ``n`` is even.
    """
    bounds = np.asarray(bounds, dtype=float)
    if bounds.shape == (2,):
        bounds = np.tile(bounds, (3, 1))
    if bounds.shape != (3, 2):
        raise ValueError(f"bounds must be one (lo, hi) pair or three of them, got shape {bounds.shape}")
    counts = tuple(int(c) for c in counts)
    if len(counts) != 3:
        raise ValueError("counts must have three entries")
    for name, n in zip(AXES, counts):
        if n < 3 or n % 2 == 0:
            raise ValueError(
                f"point count along {name} is {n}; counts must be odd and >= 3 because the "
                "averaging matrix A is singular for even sizes (eigenvalue 1 + cos(pi) = 0)"
            )
    for name, (lo, hi) in zip(AXES, bounds):
        if not hi > lo:
            raise ValueError(f"bounds along {name} are not ordered: ({lo}, {hi})")
    if not tau > 0:
        raise ValueError(f"time step tau must be positive, got {tau}")
    if int(N) < 0:
        raise ValueError(f"number of steps N must be non-negative, got {N}")
    b = tuple((float(lo), float(hi)) for lo, hi in bounds)
    return Grid(bounds=b, counts=counts, tau=float(tau), N=int(N))


@dataclass
class FieldState:
    """Six scalar lattice functions stacked as ``data[c, i, j, k]`` in COMPONENTS order."""

    data: np.ndarray

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim != 4 or self.data.shape[0] != 6:
            raise ValueError(f"field data must have shape (6, I, J, K), got {self.data.shape}")

    @classmethod
    def zeros(cls, grid: Grid) -> "FieldState":
        return cls(np.zeros((6,) + grid.shape))

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.data.shape[1:]

    @property
    def E(self) -> np.ndarray:
        return self.data[:3]

    @property
    def H(self) -> np.ndarray:
        return self.data[3:]

    def __getitem__(self, component) -> np.ndarray:
        return self.data[component_index(component)]

    def __setitem__(self, component, values) -> None:
        self.data[component_index(component)] = values

    def copy(self) -> "FieldState":
        return FieldState(self.data.copy())

    def at(self, component, i: int, j: int, k: int) -> float:
        """Periodic accessor: indices are taken modulo the axis counts."""
        I, J, K = self.shape
        return float(self.data[component_index(component), i % I, j % J, k % K])

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.data).all())


@dataclass
class Line:
    component: int
    axis: int
    transverse: tuple[int, int]
    values: np.ndarray


def paper_wave(x, y, z):
    e1 = np.cos(4 * np.pi * (x + y + z))
    s3 = np.sqrt(3.0)
    return e1, -2 * e1, e1, s3 * e1, np.zeros_like(e1), -s3 * e1


Selector = Union[str, tuple, Callable]


def init_fields(grid: Grid, selector: Selector = "paper-wave") -> FieldState:
    """Initial field state.

    ``selector`` is ``"paper-wave"``, ``"zero"``, ``("constant", value, component)``
    or a callable ``f(x, y, z)`` returning the six component arrays.
    """
    state = FieldState.zeros(grid)
    if isinstance(selector, str):
        if selector == "zero":
            return state
        if selector == "paper-wave":
            selector = paper_wave
        else:
            raise ValueError(f"unknown initial-field selector {selector!r}")
    elif isinstance(selector, tuple):
        if len(selector) != 3 or selector[0] != "constant":
            raise ValueError("tuple selector must be ('constant', value, component)")
        state[selector[2]] = float(selector[1])
        return state
    x, y, z = grid.mesh()
    values = selector(x, y, z)
    for c, v in enumerate(values):
        state.data[c] = np.broadcast_to(v, grid.shape)
    return state


def _line_index(shape, axis: int, transverse) -> tuple:
    a, b = transverse
    others = [n for ax, n in enumerate(shape) if ax != axis]
    if not (0 <= a < others[0] and 0 <= b < others[1]):
        raise IndexError(f"transverse indices {transverse} out of range for axis {AXES[axis]} on shape {shape}")
    idx = [a, b]
    idx.insert(axis, slice(None))
    return tuple(idx)


def line_view(state: FieldState, component, axis, transverse: tuple[int, int]) -> Line:
    """Copy out one line of ``component`` along ``axis``.

    ``transverse`` holds the two fixed indices in axis order, e.g. ``(j, k)`` for x.
    """
    c, ax = component_index(component), axis_index(axis)
    idx = _line_index(state.shape, ax, transverse)
    return Line(c, ax, (int(transverse[0]), int(transverse[1])), state.data[c][idx].copy())


def write_line(state: FieldState, line: Line) -> None:
    idx = _line_index(state.shape, line.axis, line.transverse)
    n = state.shape[line.axis]
    values = np.asarray(line.values, dtype=np.float64)
    if values.shape != (n,):
        raise ValueError(f"line length {values.shape} does not match axis count {n}")
    state.data[line.component][idx] = values
