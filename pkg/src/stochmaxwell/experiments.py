"""Experiment drivers: energy traces, multi-path runs, temporal order table, oracle checks."""

from __future__ import annotations

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .circulant import LineSystemParams, pair_residual, solve_pair_line
from .config import ExperimentConfig
from .dense import dense_solve_pair_line, dense_stage, matrix_property_report
from .diagnostics import convergence_orders, discrete_energy, fit_order, l2_error, mean_square_error
from .grid import FieldState, Grid, Medium, build_grid, init_fields
from .noise import NoiseSpec, coarse_increments, increments, precompute_basis
from .steppers import SPLITTING_I, SPLITTING_II, deterministic_stage, evolve

log = logging.getLogger(__name__)


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if v is None:
        return ""
    return str(v)


def emit_csv(header: Sequence[str], rows: Iterable[Sequence], path) -> Path:
    """Write a rectangular table: UTF-8, header row, LF endings, floats at 17 significant digits."""
    path = Path(path)
    rows = list(rows)
    for r in rows:
        if len(r) != len(header):
            raise ValueError(f"row {r!r} has {len(r)} fields, header has {len(header)}")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for r in rows:
                w.writerow([_fmt(v) for v in r])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


@dataclass
class RunResult:
    files: list[Path] = field(default_factory=list)
    summary: list[str] = field(default_factory=list)
    failures: list[str] = field(default_factory=list)
    data: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.failures


def _grid(cfg: ExperimentConfig, tau: float, N: int) -> Grid:
    return build_grid(cfg.bounds, cfg.counts, tau, N)


def _map(fn: Callable, items: list, threads: int) -> list:
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def energy_trace(method, grid: Grid, medium: Medium, spec: NoiseSpec, state0: FieldState | None = None) -> np.ndarray:
    """Discrete energy at t_n = n*tau, n = 0..N, along one noise path."""
    tables = precompute_basis(grid, spec.M)
    state0 = init_fields(grid) if state0 is None else state0
    res = evolve(
        method, state0, increments(spec, tables, grid.tau, grid.N), grid, medium,
        hooks={"energy": lambda n, s: discrete_energy(s, grid, medium)}, n_steps=grid.N,
    )
    return np.asarray(res.outputs["energy"])


def relative_drift(trace: np.ndarray) -> float:
    h0 = trace[0]
    dev = np.abs(trace - h0).max()
    return float(dev / h0) if h0 > 0 else float(dev)


def _lam_tag(lam: float) -> str:
    return format(lam, "g")


def run_energy(cfg: ExperimentConfig, error_columns: bool = False) -> RunResult:
    grid = _grid(cfg, cfg.tau, cfg.n_steps)
    jobs = [(m, lam) for m in cfg.methods for lam in cfg.lambdas]

    def job(args):
        m, lam = args
        return energy_trace(m, grid, Medium(cfg.eps, cfg.mu, lam), NoiseSpec(cfg.M, cfg.seed, 0))

    traces = _map(job, jobs, cfg.threads)
    res = RunResult()
    t = np.arange(grid.N + 1) * grid.tau
    prefix = "energy_error" if error_columns else "energy"
    worst = 0.0
    for (m, lam), tr in zip(jobs, traces):
        if error_columns:
            rows = zip(t, tr - tr[0])
            header = ["t", "dH"]
        else:
            rows = zip(t, tr)
            header = ["t", "H"]
        res.files.append(emit_csv(header, rows, Path(cfg.out) / f"{prefix}_method-{m}_lambda-{_lam_tag(lam)}.csv"))
        drift = relative_drift(tr)
        worst = max(worst, drift)
        res.data[(m, lam)] = tr
        line = f"method {m} lambda {_lam_tag(lam)}: H0 = {tr[0]:.15g}, max relative energy drift = {drift:.3e}"
        res.summary.append(line)
        if not drift <= cfg.energy_tol:
            res.failures.append(f"{line} exceeds {cfg.energy_tol:g}")
    res.summary.append(f"{cfg.experiment}: worst relative drift {worst:.3e} (tolerance {cfg.energy_tol:g})")
    return res


def run_paths(cfg: ExperimentConfig) -> RunResult:
    grid = _grid(cfg, cfg.tau, cfg.n_steps)
    lam = cfg.lambdas[0]
    medium = Medium(cfg.eps, cfg.mu, lam)
    res = RunResult()
    t = np.arange(grid.N + 1) * grid.tau
    for m in cfg.methods:
        traces = _map(lambda p: energy_trace(m, grid, medium, NoiseSpec(cfg.M, cfg.seed, p)), list(range(cfg.n_paths)), cfg.threads)
        header = ["t"] + [f"H_path{p}" for p in range(cfg.n_paths)] + [f"dH_path{p}" for p in range(cfg.n_paths)]
        cols = [t] + traces + [tr - tr[0] for tr in traces]
        res.files.append(emit_csv(header, zip(*cols), Path(cfg.out) / f"paths_method-{m}_lambda-{_lam_tag(lam)}.csv"))
        for p, tr in enumerate(traces):
            drift = relative_drift(tr)
            line = f"method {m} path {p}: max relative energy drift = {drift:.3e}"
            res.summary.append(line)
            if not drift <= cfg.energy_tol:
                res.failures.append(f"{line} exceeds {cfg.energy_tol:g}")
        res.data[m] = traces
    return res


def path_errors(cfg: ExperimentConfig, path_id: int) -> dict[str, list[float]]:
    """L2 errors at T of each method and tau against Splitting I at tau_ref, one noise path."""
    n_ref = round(cfg.T / cfg.tau_ref)
    grid = _grid(cfg, cfg.tau_ref, n_ref)
    medium = Medium(cfg.eps, cfg.mu, cfg.lambdas[0])
    tables = precompute_basis(grid, cfg.M)
    spec = NoiseSpec(cfg.M, cfg.seed, path_id)
    state0 = init_fields(grid)
    ref = evolve("I", state0, increments(spec, tables, cfg.tau_ref, n_ref), grid, medium, n_steps=n_ref).state
    out = {}
    for m in cfg.methods:
        errs = []
        for tau in cfg.taus:
            r = round(tau / cfg.tau_ref)
            n = round(cfg.T / tau)
            path = coarse_increments(spec, tables, cfg.tau_ref, n, r)
            st = evolve(m, state0, path, grid, medium, n_steps=n, tau=tau).state
            errs.append(l2_error(st, ref, grid))
        out[m] = errs
    return out


def run_order(cfg: ExperimentConfig) -> RunResult:
    per_path = _map(lambda p: path_errors(cfg, p), list(range(cfg.n_paths)), cfg.threads)
    res = RunResult()
    for m in cfg.methods:
        samples = np.array([pp[m] for pp in per_path])  # (paths, taus)
        mse = [mean_square_error(samples[:, j]) for j in range(len(cfg.taus))]
        table = convergence_orders([e.value for e in mse], cfg.taus, [e.stderr for e in mse])
        res.files.append(emit_csv(["tau", "error", "order", "stderr"], table.rows(), Path(cfg.out) / f"order_method-{m}.csv"))
        fit = fit_order(cfg.taus, table.errors)
        res.data[m] = {"table": table, "fit": fit, "samples": samples}
        line = (
            f"method {m}: fitted order {fit.slope:.3f} +/- {fit.halfwidth:.3f} "
            f"(rows: {', '.join('-' if o is None else f'{o:.2f}' for o in table.orders)})"
        )
        res.summary.append(line)
        if not cfg.order_min <= fit.slope <= cfg.order_max:
            res.failures.append(f"{line} outside [{cfg.order_min}, {cfg.order_max}]")
    return res


def oracle_rows(sizes: Sequence[int], seed: int = 0, n_cases: int = 50) -> list[tuple]:
    """Rows ``(check, n, value, tolerance, pass)`` for the dense-oracle suite."""
    rows = []
    rng = np.random.default_rng(seed)
    for n in sizes:
        rep = matrix_property_report(n)
        rows.append(("calA_symmetric", n, 0.0, 0.0, rep.calA_symmetric))
        rows.append(("calA_positive_definite", n, rep.min_eigenvalue, 0.0, rep.calA_positive_definite))
        rows.append(("calA_eigenvalues_match", n, rep.eigenvalue_mismatch, 1e-12, rep.eigenvalue_mismatch <= 1e-12))
        rows.append(("calB_skew", n, 0.0, 0.0, rep.calB_skew))
        rows.append(("calA_inv_calB_skew", n, rep.skew_defect, 1e-12, bool(rep.calA_inv_calB_skew)))
        worst, worst_res = 0.0, 0.0
        for _ in range(n_cases):
            e, h = rng.standard_normal(n), rng.standard_normal(n)
            p = LineSystemParams(int(rng.choice([-1, 1])), float(rng.uniform(0, 10)), float(rng.uniform(0.5, 4)), float(rng.uniform(0.5, 4)))
            x, y = solve_pair_line(e, h, p)
            xd, yd = dense_solve_pair_line(e, h, p)
            worst = max(worst, float(np.abs(x - xd).max()), float(np.abs(y - yd).max()))
            scale = 1 + max(np.abs(e).max(), np.abs(h).max())
            worst_res = max(worst_res, pair_residual(e, h, x, y, p) / scale)
        rows.append(("line_solve_vs_dense", n, worst, 1e-12, worst <= 1e-12))
        rows.append(("line_solve_residual", n, worst_res, 1e-12, worst_res <= 1e-12))
    for n in (3, 5):
        grid = build_grid([0, 1], (n, n, n), 0.1)
        worst = 0.0
        for case in range(n_cases):
            state = FieldState(rng.standard_normal((6, n, n, n)))
            medium = Medium(float(rng.uniform(0.5, 4)), float(rng.uniform(0.5, 4)))
            tau = float(rng.uniform(0, 1))
            stage = (SPLITTING_I + SPLITTING_II)[case % 5]
            fast = deterministic_stage(state.copy(), stage, grid, medium, tau=tau)
            slow = dense_stage(state, stage, grid, medium, tau=tau)
            worst = max(worst, float(np.abs(fast.data - slow.data).max()))
        rows.append(("stage_vs_dense", n, worst, 1e-12, worst <= 1e-12))
    rep = matrix_property_report(4)
    rows.append(("even_size_reported_singular", 4, rep.min_eigenvalue, 0.0, not rep.calA_positive_definite))
    return rows


def run_oracle(cfg: ExperimentConfig) -> RunResult:
    rows = oracle_rows(cfg.oracle_sizes, seed=cfg.seed)
    res = RunResult()
    res.files.append(emit_csv(["check", "n", "value", "tolerance", "pass"], rows, Path(cfg.out) / "oracle_check.csv"))
    failed = [r for r in rows if not r[4]]
    res.summary.append(f"oracle-check: {len(rows) - len(failed)}/{len(rows)} checks pass")
    res.failures.extend(f"{r[0]} n={r[1]}: value {r[2]} tolerance {r[3]}" for r in failed)
    res.data["rows"] = rows
    return res


def run_experiment(cfg: ExperimentConfig) -> RunResult:
    """Run one configured experiment, write its CSVs and the resolved-config sidecar."""
    out = Path(cfg.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        sidecar = out / f"{cfg.experiment}_config.json"
        sidecar.write_text(cfg.to_json() + "\n", encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write to output directory {out}: {exc}") from exc
    runner = {
        "energy": run_energy,
        "energy-error": lambda c: run_energy(c, error_columns=True),
        "paths": run_paths,
        "order": run_order,
        "oracle-check": run_oracle,
    }[cfg.experiment]
    log.info("running %s into %s", cfg.experiment, out)
    res = runner(cfg)
    res.files.insert(0, sidecar)
    return res
