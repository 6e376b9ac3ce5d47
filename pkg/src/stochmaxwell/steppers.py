"""Splitting Method I and II time steps built from line sweeps and a pointwise rotation."""

from __future__ import annotations

import enum
from concurrent.futures import Executor
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Optional

import numpy as np

from .circulant import LineSystemParams, solve_pair_lines
from .grid import AXES, COMPONENTS, FieldState, Grid, Medium, component_index
from .noise import apply_rotation


class MethodId(str, enum.Enum):
    SplittingI = "I"
    SplittingII = "II"

    @classmethod
    def parse(cls, value) -> "MethodId":
        if isinstance(value, cls):
            return value
        v = str(value).strip()
        for m in cls:
            if v in (m.value, m.name):
                return m
        raise ValueError(f"unknown method {value!r}; expected 'I' or 'II'")


@dataclass(frozen=True)
class Sweep:
    axis: int
    e_comp: int
    h_comp: int
    sign: int

    def __str__(self):
        return f"{AXES[self.axis]}:({COMPONENTS[self.e_comp]},{COMPONENTS[self.h_comp]}){'+' if self.sign > 0 else '-'}"


@dataclass(frozen=True)
class StageDescriptor:
    sweeps: tuple[Sweep, ...]

    def __post_init__(self):
        written = [c for sw in self.sweeps for c in (sw.e_comp, sw.h_comp)]
        if len(written) != len(set(written)):
            raise ValueError(f"stage writes a component in more than one sweep: {[str(s) for s in self.sweeps]}")

    @property
    def written(self) -> frozenset[int]:
        return frozenset(c for sw in self.sweeps for c in (sw.e_comp, sw.h_comp))


def _sw(axis: str, e: str, h: str, sign: int) -> Sweep:
    return Sweep(AXES.index(axis), component_index(e), component_index(h), sign)


# curl_+ then curl_- pieces
SPLITTING_I = (
    StageDescriptor((_sw("x", "E3", "H2", +1), _sw("y", "E1", "H3", +1), _sw("z", "E2", "H1", +1))),
    StageDescriptor((_sw("x", "E2", "H3", -1), _sw("y", "E3", "H1", -1), _sw("z", "E1", "H2", -1))),
)

# one coordinate direction per stage; the remaining pair is frozen
SPLITTING_II = (
    StageDescriptor((_sw("x", "E2", "H3", -1), _sw("x", "E3", "H2", +1))),
    StageDescriptor((_sw("y", "E3", "H1", -1), _sw("y", "E1", "H3", +1))),
    StageDescriptor((_sw("z", "E1", "H2", -1), _sw("z", "E2", "H1", +1))),
)

STAGES = {MethodId.SplittingI: SPLITTING_I, MethodId.SplittingII: SPLITTING_II}


def _run_sweep(data: np.ndarray, sweep: Sweep, grid: Grid, medium: Medium, tau: float):
    # data has a leading component axis, so lattice axis a is array axis a
    c = tau / (2 * grid.steps[sweep.axis])
    params = LineSystemParams(sweep.sign, c, medium.eps, medium.mu)
    return solve_pair_lines(data[sweep.e_comp], data[sweep.h_comp], sweep.axis, params)


def deterministic_stage(
    state: FieldState,
    descriptor: StageDescriptor,
    grid: Grid,
    medium: Medium,
    tau: Optional[float] = None,
    executor: Optional[Executor] = None,
) -> FieldState:
    """Apply one deterministic substage in place and return ``state``.

    Sweeps write disjoint component pairs, so they may run concurrently on
    ``executor``; results are written back in descriptor order.
    """
    tau = grid.tau if tau is None else tau
    if tau == 0:
        return state
    data = state.data
    if executor is None or len(descriptor.sweeps) == 1:
        results = [_run_sweep(data, sw, grid, medium, tau) for sw in descriptor.sweeps]
    else:
        futures = [executor.submit(_run_sweep, data, sw, grid, medium, tau) for sw in descriptor.sweeps]
        results = [f.result() for f in futures]
    for sw, (e_new, h_new) in zip(descriptor.sweeps, results):
        data[sw.e_comp] = e_new
        data[sw.h_comp] = h_new
    return state


def step(
    method,
    state: FieldState,
    noise_increment: np.ndarray,
    grid: Grid,
    medium: Medium,
    tau: Optional[float] = None,
    executor: Optional[Executor] = None,
) -> FieldState:
    """Advance ``state`` by one time step in place: deterministic stages, then rotation."""
    method = MethodId.parse(method)
    if np.shape(noise_increment) != state.shape:
        raise ValueError(f"noise increment shape {np.shape(noise_increment)} does not match lattice {state.shape}")
    for stage in STAGES[method]:
        deterministic_stage(state, stage, grid, medium, tau=tau, executor=executor)
    apply_rotation(state, noise_increment, medium)
    return state


class HookError(RuntimeError):
    pass


@dataclass
class EvolveResult:
    state: FieldState
    outputs: dict[str, list]


def evolve(
    method,
    state0: FieldState,
    noise_path: Iterable[np.ndarray],
    grid: Grid,
    medium: Medium,
    hooks: Optional[Mapping[str, Callable[[int, FieldState], object]]] = None,
    n_steps: Optional[int] = None,
    tau: Optional[float] = None,
    executor: Optional[Executor] = None,
) -> EvolveResult:
    """Apply ``step`` once per increment of ``noise_path``.

    Each hook is called as ``hook(n, state)`` at every step boundary ``n = 0..N``
    and its return values are collected under the hook's name. ``state0`` is
    not modified.
    """
    method = MethodId.parse(method)
    hooks = dict(hooks or {})
    state = state0.copy()
    outputs: dict[str, list] = {name: [] for name in hooks}

    def observe(n):
        for name, hook in hooks.items():
            try:
                outputs[name].append(hook(n, state))
            except Exception as exc:
                raise HookError(f"hook {name!r} failed at step {n}: {exc}") from exc

    observe(0)
    n = 0
    for dW in noise_path:
        if n_steps is not None and n >= n_steps:
            break
        step(method, state, dW, grid, medium, tau=tau, executor=executor)
        n += 1
        if not state.is_finite():
            raise FloatingPointError(f"non-finite field values after step {n}")
        observe(n)
    if n_steps is not None and n < n_steps:
        raise ValueError(f"noise path supplied {n} increments but {n_steps} steps were requested")
    return EvolveResult(state, outputs)
