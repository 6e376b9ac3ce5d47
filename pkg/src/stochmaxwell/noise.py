"""Truncated Karhunen-Loeve Q-Wiener increments and the exact stochastic rotation.

Increments follow

    dW[i,j,k] = 2*sqrt(2*tau) * sum_{m,l,q=1..M} eta[m,l,q] sin(m pi x_i) sin(l pi y_j) sin(q pi z_k) xi[m,l,q]

with ``eta = (m^3 + l^3 + q^3)^(-1/2)`` and iid standard normal ``xi``.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Optional

import numpy as np

from .grid import FieldState, Grid, Medium


@dataclass(frozen=True)
class NoiseSpec:
    M: int = 10
    seed: int = 0
    path_id: int = 0

    def __post_init__(self):
        if self.M < 1:
            raise ValueError(f"truncation level M must be >= 1, got {self.M}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.path_id < 0:
            raise ValueError("path_id must be non-negative")


@dataclass(frozen=True)
class BasisTables:
    M: int
    sin_x: np.ndarray  # (M, I): sin(m pi x_i), m = 1..M
    sin_y: np.ndarray  # (M, J)
    sin_z: np.ndarray  # (M, K)
    eta: np.ndarray  # (M, M, M)


def eta_coefficients(M: int) -> np.ndarray:
    m = np.arange(1, M + 1, dtype=np.float64)
    cubes = m[:, None, None] ** 3 + m[None, :, None] ** 3 + m[None, None, :] ** 3
    return 1.0 / np.sqrt(cubes)


def precompute_basis(grid: Grid, M: int = 10) -> BasisTables:
    """Sine tables at the grid nodes and the mode weights; the 2*sqrt(2) factor is left out."""
    if M < 1:
        raise ValueError(f"truncation level M must be >= 1, got {M}")
    m = np.arange(1, M + 1, dtype=np.float64)[:, None]
    tables = [np.sin(m * np.pi * grid.nodes(a)[None, :]) for a in range(3)]
    return BasisTables(M, *tables, eta_coefficients(M))


def step_generator(seed: int, path_id: int, step: int) -> np.random.Generator:
    """Independent Philox stream keyed by ``(seed, path_id, step)``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(path_id), int(step)))
    return np.random.Generator(np.random.Philox(ss))


def draw_modes(rng: np.random.Generator, M: int) -> np.ndarray:
    # C order of an (M, M, M) block is the lexicographic (m, l, q) order
    return rng.standard_normal((M, M, M))


def assemble(tables: BasisTables, coeff: np.ndarray) -> np.ndarray:
    """Sum ``coeff[m,l,q] * sx[m,i] * sy[l,j] * sz[q,k]`` by three successive contractions."""
    t = np.tensordot(coeff, tables.sin_z, axes=([2], [0]))  # (m, l, k)
    t = np.tensordot(t, tables.sin_y, axes=([1], [0]))  # (m, k, j)
    t = np.tensordot(t, tables.sin_x, axes=([0], [0]))  # (k, j, i)
    return np.ascontiguousarray(t.transpose(2, 1, 0))


def sample_increment(rng, tables: BasisTables, tau: float, xi: Optional[np.ndarray] = None) -> np.ndarray:
    """One increment field. ``xi`` overrides the Gaussian draw (test hook)."""
    if xi is None:
        xi = draw_modes(rng, tables.M)
    xi = np.broadcast_to(np.asarray(xi, dtype=np.float64), (tables.M,) * 3)
    return 2 * np.sqrt(2 * tau) * assemble(tables, tables.eta * xi)


def increments(spec: NoiseSpec, tables: BasisTables, tau: float, n_steps: int, start: int = 0) -> Iterator[np.ndarray]:
    """Increments for steps ``start .. start+n_steps-1`` of the path ``(seed, path_id)``."""
    for n in range(start, start + n_steps):
        yield sample_increment(step_generator(spec.seed, spec.path_id, n), tables, tau)


def coarse_increments(spec: NoiseSpec, tables: BasisTables, tau_fine: float, n_coarse: int, ratio: int) -> Iterator[np.ndarray]:
    """Coarse increments of a path sampled at ``tau_fine``, each the sum of ``ratio`` fine ones.

    The field is linear in the Gaussian block, so the fine draws are summed in
    mode space before one assembly.
    """
    if ratio < 1:
        raise ValueError(f"coarsening ratio must be >= 1, got {ratio}")
    for n in range(n_coarse):
        xi = np.zeros((tables.M,) * 3)
        for f in range(ratio * n, ratio * n + ratio):
            xi += draw_modes(step_generator(spec.seed, spec.path_id, f), tables.M)
        yield sample_increment(None, tables, tau_fine, xi=xi)


def coarsen_path(fine_increments, ratio: int) -> np.ndarray:
    """Sum consecutive blocks of ``ratio`` increments along the leading axis."""
    fine = np.asarray(fine_increments, dtype=np.float64)
    if ratio < 1:
        raise ValueError(f"coarsening ratio must be >= 1, got {ratio}")
    if fine.shape[0] % ratio:
        raise ValueError(f"{fine.shape[0]} fine increments are not divisible by ratio {ratio}")
    return fine.reshape((fine.shape[0] // ratio, ratio) + fine.shape[1:]).sum(axis=1)


def increment_variance(tables: BasisTables, tau: float, node: tuple[int, int, int]) -> float:
    """Exact variance of the increment at one node: ``8 tau sum eta^2 prod sin^2``."""
    i, j, k = node
    w = tables.eta**2 * (
        tables.sin_x[:, i, None, None] ** 2 * tables.sin_y[None, :, j, None] ** 2 * tables.sin_z[None, None, :, k] ** 2
    )
    return float(8 * tau * w.sum())


def apply_rotation(state: FieldState, increment: np.ndarray, medium: Medium) -> FieldState:
    """Exact flow of the noise substep, in place.

    With ``phi = lam * dW / sqrt(eps*mu)`` each pair ``(E_a, H_a)`` is rotated::

        E' = cos(phi) E - sqrt(mu/eps) sin(phi) H
        H' = sqrt(eps/mu) sin(phi) E + cos(phi) H
    """
    if np.shape(increment) != state.shape:
        raise ValueError(f"increment shape {np.shape(increment)} does not match lattice {state.shape}")
    if medium.lam == 0:
        return state
    phi = medium.lam * np.asarray(increment) / np.sqrt(medium.eps * medium.mu)
    cos, sin = np.cos(phi), np.sin(phi)
    r_me, r_em = np.sqrt(medium.mu / medium.eps), np.sqrt(medium.eps / medium.mu)
    E, H = state.E.copy(), state.H
    state.data[:3] = cos * E - r_me * sin * H
    state.data[3:] = r_em * sin * E + cos * H
    return state


_MAGIC = b"SMXWINC1"
_HEADER = struct.Struct("<8sQQIdIIII")  # magic, seed, path_id, M, tau, I, J, K, N


def dump_increments(path, increments_array: np.ndarray, spec: NoiseSpec, tau: float) -> None:
    """Binary dump: fixed little-endian header followed by float64 increments in C order."""
    arr = np.ascontiguousarray(increments_array, dtype="<f8")
    if arr.ndim != 4:
        raise ValueError("increments must have shape (N, I, J, K)")
    N, I, J, K = arr.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, spec.seed, spec.path_id, spec.M, tau, I, J, K, N))
        fh.write(arr.tobytes())


def load_increments(path) -> tuple[np.ndarray, NoiseSpec, float]:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated increment file")
    magic, seed, path_id, M, tau, I, J, K, N = _HEADER.unpack_from(raw)
    if magic != _MAGIC:
        raise ValueError(f"{path}: not an increment dump (bad magic {magic!r})")
    arr = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    if arr.size != N * I * J * K:
        raise ValueError(f"{path}: payload has {arr.size} values, header promises {N * I * J * K}")
    return arr.reshape(N, I, J, K).astype(np.float64), NoiseSpec(M, seed, path_id), tau
