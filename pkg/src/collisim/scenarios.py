"""Named experiments: run, compare, and report.

Each scenario produces trajectory CSV files and a two-part report
(human-readable ``report.txt``, machine-readable ``report.kv``) in its
output directory, plus a `ComparisonReport` with pass/fail checks at the
scenario's documented tolerances.  Outputs are deterministic: rerunning
a config yields byte-identical files.

Comparisons between stroboscopic and continuous-time trajectories avoid
interpolation error by integrating the master equation with a step that
divides the collision duration, so the integrator lands exactly on the
collision times.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .collision import PropagatorChoice, closed_evolution, run_collisions
from .config import ScenarioConfig, sweep_point_config
from .errors import ConfigError
from .lindblad import (
    LindbladGenerator,
    generator_effective_qubit,
    generator_qutrit_two_bath,
    integrate,
    steady_residual,
)
from .model import (
    ModelParams,
    TRIPARTITE_SPACE,
    basis_index,
    build_h_eff,
    build_h_prime,
    derive_rates,
    steady_state_qubit,
)
from .operators import DensityOperator, density_operator, trace_distance
from .trajectory import Trajectory

# Fraction of a relaxation margin used when defaulting the collision count:
# enough steps that Gamma * n * tau >= 5, with a floor wide enough to show
# the developed dynamics.
RELAXATION_TARGET = 5.0
MIN_DEFAULT_STEPS = 300

# dt is chosen as tau/k with the smallest k giving dt * rate_scale <= this,
# a 5x margin under the integrator's stability guard.
DT_MARGIN = 0.02

CSV_HEADER = "step,t_in_inverse_g,p0,p1,p2,source"


@dataclass(frozen=True)
class CheckResult:
    """One tolerance check: ``value`` compared against ``threshold``."""

    name: str
    value: float
    threshold: float
    comparison: str  # "<=" or ">="
    passed: bool


@dataclass(frozen=True)
class ComparisonReport:
    """Deterministically ordered scenario outcome."""

    scenario: str
    checks: tuple[CheckResult, ...]
    metrics: tuple[tuple[str, float], ...]
    trace_distances: tuple[tuple[float, float], ...] = ()

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def _check(name: str, value: float, threshold: float, comparison: str = "<=") -> CheckResult:
    ok = value <= threshold if comparison == "<=" else value >= threshold
    return CheckResult(name, float(value), float(threshold), comparison, bool(ok))


@dataclass(frozen=True)
class MetricsFragment:
    max_abs_dev: tuple[float, float, float]
    mean_abs_dev: tuple[float, float, float]
    final_window_a: tuple[float, float, float]
    final_window_b: tuple[float, float, float]

    @property
    def max_dev(self) -> float:
        return max(self.max_abs_dev)


def metrics(a: Trajectory, b: Trajectory, *, allow_resample: bool = False) -> MetricsFragment:
    """Per-level population deviations between two trajectories.

    Requires a common time grid; with ``allow_resample`` the second
    trajectory is sampled at the times of the first by nearest-step
    matching (intended for a fine master-equation grid against coarse
    collision times -- the match must be exact to within grid rounding).
    """
    pops_a = a.populations
    if len(a) == len(b) and np.allclose(a.times, b.times, rtol=0, atol=1e-9):
        pops_b = b.populations
    elif allow_resample:
        idx = np.searchsorted(b.times, a.times)
        idx = np.clip(idx, 0, len(b) - 1)
        left = np.maximum(idx - 1, 0)
        choose_left = np.abs(b.times[left] - a.times) < np.abs(b.times[idx] - a.times)
        idx = np.where(choose_left, left, idx)
        scale = np.maximum(1.0, np.abs(a.times))
        if np.any(np.abs(b.times[idx] - a.times) > 1e-6 * scale):
            raise ValueError("trajectories do not share sample times even after matching")
        pops_b = b.populations[idx]
    else:
        raise ValueError("trajectories are on different grids; resampling not permitted")
    dev = np.abs(pops_a - pops_b)
    return MetricsFragment(
        max_abs_dev=tuple(float(v) for v in dev.max(axis=0)),
        mean_abs_dev=tuple(float(v) for v in dev.mean(axis=0)),
        final_window_a=tuple(float(v) for v in a.final_window_mean()),
        final_window_b=tuple(float(v) for v in b.final_window_mean()),
    )


# ---------------------------------------------------------------------------
# building blocks shared by the scenarios


def initial_system_state(cfg: ScenarioConfig) -> DensityOperator:
    if cfg.initial_state == "ground_S":
        pops = (1.0, 0.0, 0.0)
    else:
        pops = cfg.initial_populations
    return density_operator(np.diag(pops).astype(complex), (("S", 3),))


def model_params(cfg: ScenarioConfig, n_steps: int = 1) -> ModelParams:
    return ModelParams(
        delta=cfg.delta,
        x1=cfg.x1 if cfg.x1 is not None else 0.0,
        x2=cfg.x2 if cfg.x2 is not None else 0.0,
        tau=cfg.effective_tau() if cfg.scenario != "verify-elimination" else 1.0,
        n_steps=n_steps,
        g=cfg.g,
        omega_a1=cfg.omega_a1,
        omega_a2=cfg.omega_a2,
    )


def default_collision_count(p: ModelParams, relaxation_rate: float) -> int:
    """Steps so the run covers ``RELAXATION_TARGET`` relaxation units."""
    if relaxation_rate <= 0:
        return MIN_DEFAULT_STEPS
    return max(MIN_DEFAULT_STEPS, math.ceil(RELAXATION_TARGET / (relaxation_rate * p.tau)))


def me_substep_count(tau: float, gen: LindbladGenerator) -> int:
    """Integer divisions of tau so the master-equation step obeys the margin."""
    return max(1, math.ceil(tau * gen.rate_scale / DT_MARGIN))


def propagator_choice(cfg: ScenarioConfig) -> PropagatorChoice:
    return PropagatorChoice(cfg.propagator, cfg.substeps)


def _embed_qubit(mat: np.ndarray) -> np.ndarray:
    out = np.zeros((3, 3), dtype=complex)
    out[:2, :2] = mat
    return out


def subsample(traj: Trajectory, every: int) -> Trajectory:
    """Every ``every``-th entry, with step indices renumbered to match."""
    if every == 1:
        return traj
    snaps = tuple((s // every, rho) for s, rho in traj.snapshots if s % every == 0)
    return Trajectory(
        steps=traj.steps[::every] // every,
        times=traj.times[::every],
        populations=traj.populations[::every],
        snapshots=snaps,
    )


def _snapshot_trace_distances(a: Trajectory, b: Trajectory) -> tuple[tuple[float, float], ...]:
    """Trace distances between full states at matched snapshot steps."""
    b_snaps = dict(b.snapshots)
    out = []
    for step, rho in a.snapshots:
        other = b_snaps.get(step)
        if other is None:
            continue
        mat_b = other.matrix if other.dim == 3 else _embed_qubit(other.matrix)
        t = float(a.times[np.searchsorted(a.steps, step)])
        out.append((t, trace_distance(rho.matrix, mat_b)))
    return tuple(out)


# ---------------------------------------------------------------------------
# the scenarios


def run_verify_elimination(cfg: ScenarioConfig) -> tuple[ComparisonReport, dict[str, Trajectory]]:
    """Closed-evolution agreement between the original and eliminated-level
    Hamiltonians on the two-ancilla excitation-exchange protocol."""
    p = model_params(cfg)
    rates = derive_rates(p)
    alpha = rates.alpha
    t_grid = np.linspace(0.0, cfg.alpha_t_max / alpha, cfg.n_grid)

    idx = basis_index(1, 0, 0)
    sigma0 = np.zeros((12, 12), dtype=complex)
    sigma0[idx, idx] = 1.0
    joint = density_operator(sigma0, TRIPARTITE_SPACE)

    stride = max(1, cfg.n_grid // 100)
    orig = closed_evolution(joint, build_h_prime(p), t_grid, snapshot_stride=stride)
    eff = closed_evolution(joint, build_h_eff(p), t_grid, snapshot_stride=stride)

    frag = metrics(orig, eff)
    max_p2 = float(np.max(orig.populations[:, 2]))
    cos_defect = float(np.max(np.abs(eff.populations[:, 0] - np.cos(alpha * t_grid) ** 2)))

    ratio = 50.0 * p.g / p.delta
    dev_tol = 0.02 * ratio**2
    p2_tol = 6.0 * (p.g / p.delta) ** 2
    checks = (
        _check("max_dev_p0", frag.max_abs_dev[0], dev_tol),
        _check("max_dev_p1", frag.max_abs_dev[1], dev_tol),
        _check("max_p2_orig", max_p2, p2_tol),
        _check("effective_p0_cosine_defect", cos_defect, 1e-9),
    )
    report = ComparisonReport(
        scenario=cfg.scenario,
        checks=checks,
        metrics=(
            ("alpha", alpha),
            ("t_max_in_inverse_g", float(t_grid[-1])),
            ("max_dev_p0", frag.max_abs_dev[0]),
            ("max_dev_p1", frag.max_abs_dev[1]),
            ("max_p2_orig", max_p2),
            ("effective_p0_cosine_defect", cos_defect),
        ),
        trace_distances=_snapshot_trace_distances(orig, eff),
    )
    return report, {"orig": orig, "eff": eff}


def _collision_run(cfg: ScenarioConfig, relaxation_rate_of) -> tuple[ModelParams, Trajectory]:
    p = model_params(cfg)
    n = cfg.n_steps if cfg.n_steps is not None else default_collision_count(
        p, relaxation_rate_of(p))
    p = model_params(cfg, n_steps=n)
    traj = run_collisions(initial_system_state(cfg), p, "original", propagator_choice(cfg),
                          snapshot_stride=cfg.snapshot_stride)
    return p, traj


def run_collision_vs_me(cfg: ScenarioConfig) -> tuple[ComparisonReport, dict[str, Trajectory]]:
    """Exact collision dynamics against the effective-qubit master equation."""
    p, exact = _collision_run(cfg, lambda p: derive_rates(p).capital_gamma)
    rates = derive_rates(p)
    gen = generator_effective_qubit(rates)

    rho0 = initial_system_state(cfg)
    if abs(rho0.populations[2]) > 0:
        raise ConfigError(
            "collision-vs-me requires zero initial top-level population "
            "(the master equation describes the effective qubit)"
        )
    rho0_q = density_operator(np.array(rho0.matrix[:2, :2]), (("S", 2),))

    k = me_substep_count(p.tau, gen)
    me_stride = cfg.snapshot_stride * k
    me_full = integrate(gen, rho0_q, p.n_steps * p.tau, p.tau / k, snapshot_stride=me_stride)
    me = subsample(me_full, k)
    frag = metrics(exact, me)
    max_p2 = float(np.max(exact.populations[:, 2]))

    checks = (
        _check("max_abs_dev", frag.max_dev, 0.05),
    )
    report = ComparisonReport(
        scenario=cfg.scenario,
        checks=checks,
        metrics=(
            ("alpha_tau", rates.alpha * p.tau),
            ("capital_gamma", rates.capital_gamma),
            ("n_steps", float(p.n_steps)),
            ("max_dev_p0", frag.max_abs_dev[0]),
            ("max_dev_p1", frag.max_abs_dev[1]),
            ("max_dev_p2", frag.max_abs_dev[2]),
            ("max_p2_exact", max_p2),
            ("final_p0_exact", frag.final_window_a[0]),
            ("final_p1_exact", frag.final_window_a[1]),
            ("final_p0_me", frag.final_window_b[0]),
            ("final_p1_me", frag.final_window_b[1]),
        ),
        trace_distances=_snapshot_trace_distances(exact, me),
    )
    return report, {"orig": exact, "me5": me}


def run_negative_temperature(cfg: ScenarioConfig) -> tuple[ComparisonReport, dict[str, Trajectory]]:
    """Population-inverted steady state from collisions and from the
    analytic fixed point of the effective-qubit equation."""
    def relax(p):
        r = derive_rates(p)
        return r.capital_gamma * (1.0 + math.exp(r.x_s))

    p, exact = _collision_run(cfg, relax)
    rates = derive_rates(p)
    gen = generator_effective_qubit(rates)
    analytic = steady_state_qubit(rates.x_s)
    residual = steady_residual(gen, analytic)
    target = _embed_qubit(analytic.matrix)
    approach = tuple(
        (float(exact.times[np.searchsorted(exact.steps, step)]),
         trace_distance(snap.matrix, target))
        for step, snap in exact.snapshots
    )

    final = exact.final_window_mean()
    p1_analytic = float(analytic.populations[1])
    inversion_expected = rates.x_s < 0
    inversion_seen = final[1] > final[0]

    checks = (
        _check("final_p1_error", abs(final[1] - p1_analytic), 0.02),
        _check("steady_state_residual", residual, 1e-12),
        _check("inversion_matches_sign", float(inversion_seen == inversion_expected), 1.0, ">="),
    )
    report = ComparisonReport(
        scenario=cfg.scenario,
        checks=checks,
        metrics=(
            ("x_s", rates.x_s),
            ("capital_gamma", rates.capital_gamma),
            ("n_steps", float(p.n_steps)),
            ("final_p0_collisions", float(final[0])),
            ("final_p1_collisions", float(final[1])),
            ("analytic_p0", float(analytic.populations[0])),
            ("analytic_p1", p1_analytic),
            ("steady_state_residual", residual),
        ),
        trace_distances=approach,
    )
    return report, {"orig": exact}


def run_beyond_far_off(cfg: ScenarioConfig) -> tuple[ComparisonReport, dict[str, Trajectory]]:
    """Exact collision dynamics against the qutrit two-bath master equation
    in the short-collision, modest-detuning regime."""
    def relax(p):
        gamma1 = p.g**2 * p.tau / (1.0 + math.exp(p.x1))
        gamma2 = p.g**2 * p.tau / (1.0 + math.exp(p.x2))
        return gamma1 + gamma2

    p, exact = _collision_run(cfg, relax)
    gen = generator_qutrit_two_bath(p)
    k = me_substep_count(p.tau, gen)
    me_stride = cfg.snapshot_stride * k
    me_full = integrate(gen, initial_system_state(cfg), p.n_steps * p.tau, p.tau / k,
                        snapshot_stride=me_stride)
    me = subsample(me_full, k)
    frag = metrics(exact, me)

    checks = (
        _check("max_abs_dev", frag.max_dev, 0.05),
    )
    report = ComparisonReport(
        scenario=cfg.scenario,
        checks=checks,
        metrics=(
            ("g_tau", p.g * p.tau),
            ("delta_tau", p.delta * p.tau),
            ("n_steps", float(p.n_steps)),
            ("max_dev_p0", frag.max_abs_dev[0]),
            ("max_dev_p1", frag.max_abs_dev[1]),
            ("max_dev_p2", frag.max_abs_dev[2]),
            ("final_p0_exact", frag.final_window_a[0]),
            ("final_p1_exact", frag.final_window_a[1]),
            ("final_p2_exact", frag.final_window_a[2]),
        ),
        trace_distances=_snapshot_trace_distances(exact, me),
    )
    return report, {"orig": exact, "me10": me}


_RUNNERS = {
    "verify-elimination": run_verify_elimination,
    "collision-vs-me": run_collision_vs_me,
    "negative-temperature": run_negative_temperature,
    "beyond-far-off": run_beyond_far_off,
}


# ---------------------------------------------------------------------------
# file output


def _format_float(x: float) -> str:
    return f"{x:.12g}"


def write_trajectory_csv(path: Path, traj: Trajectory, source: str):
    """CSV schema: step, t_in_inverse_g, p0, p1, p2, source."""
    lines = [CSV_HEADER]
    for i in range(len(traj)):
        row = [str(int(traj.steps[i])), _format_float(traj.times[i])]
        row += [_format_float(v) for v in traj.populations[i]]
        row.append(source)
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n")


def write_report_files(out_dir: Path, report: ComparisonReport):
    kv_lines = [f"scenario = {report.scenario}", f"passed = {str(report.passed).lower()}"]
    txt_lines = [f"scenario: {report.scenario}", ""]
    for name, value in report.metrics:
        kv_lines.append(f"{name} = {_format_float(value)}")
        txt_lines.append(f"  {name:<32s} {_format_float(value)}")
    txt_lines.append("")
    for c in report.checks:
        status = "PASS" if c.passed else "FAIL"
        kv_lines.append(f"check.{c.name} = {status.lower()}")
        txt_lines.append(
            f"  [{status}] {c.name}: {_format_float(c.value)} {c.comparison} {_format_float(c.threshold)}"
        )
    if report.trace_distances:
        kv_lines.append(f"trace_distance_max = {_format_float(max(d for _, d in report.trace_distances))}")
        txt_lines.append("")
        txt_lines.append("  trace distance (t, value):")
        for t, d in report.trace_distances:
            txt_lines.append(f"    {_format_float(t):>16s}  {_format_float(d)}")
    txt_lines.append("")
    txt_lines.append(f"result: {'PASS' if report.passed else 'FAIL'}")
    (out_dir / "report.kv").write_text("\n".join(kv_lines) + "\n")
    (out_dir / "report.txt").write_text("\n".join(txt_lines) + "\n")


def _prepare_output_dir(cfg: ScenarioConfig, output_dir: str | Path | None) -> Path:
    target = Path(output_dir) if output_dir else Path(cfg.output_path or f"out/{cfg.scenario}")
    try:
        target.mkdir(parents=True, exist_ok=True)
        probe = target / ".write-probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise ConfigError(f"output path not writable: {target} ({exc})") from exc
    return target


def run_scenario(cfg: ScenarioConfig, output_dir: str | Path | None = None) -> ComparisonReport:
    """Execute a non-sweep scenario and write its trajectory and report files."""
    if cfg.scenario == "sweep":
        raise ConfigError("use run_sweep for sweep configs")
    out_dir = _prepare_output_dir(cfg, output_dir)
    report, trajectories = _RUNNERS[cfg.scenario](cfg)
    for source, traj in trajectories.items():
        write_trajectory_csv(out_dir / f"{source}.csv", traj, source)
    write_report_files(out_dir, report)
    return report


def _run_sweep_point(args: tuple[ScenarioConfig, float, str]) -> tuple[float, ComparisonReport]:
    cfg, value, out_dir = args
    point_cfg = sweep_point_config(cfg, value)
    report = run_scenario(point_cfg, out_dir)
    return value, report


def run_sweep(cfg: ScenarioConfig, output_dir: str | Path | None = None) -> ComparisonReport:
    """Run one scenario per sweep value, one output subdirectory each.

    Points are dispatched to a process pool of config-bounded width and
    assembled in input order, so the index file is deterministic.
    """
    if cfg.scenario != "sweep":
        raise ConfigError("run_sweep requires scenario = sweep")
    out_dir = _prepare_output_dir(cfg, output_dir)

    jobs = []
    for i, value in enumerate(cfg.sweep_values):
        point_dir = out_dir / f"point_{i:03d}_{cfg.sweep_param}_{value:g}"
        jobs.append((cfg, value, str(point_dir)))

    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_run_sweep_point, jobs))
    else:
        results = [_run_sweep_point(job) for job in jobs]

    index_lines = [f"point,{cfg.sweep_param},passed,headline_check,headline_value"]
    checks = []
    metrics_rows: list[tuple[str, float]] = []
    for i, (value, report) in enumerate(results):
        head = report.checks[0]
        index_lines.append(
            f"{i},{_format_float(value)},{str(report.passed).lower()},{head.name},{_format_float(head.value)}"
        )
        checks.append(_check(f"point_{i:03d}_passed", float(report.passed), 1.0, ">="))
        metrics_rows.append((f"point_{i:03d}_{cfg.sweep_param}", float(value)))
        metrics_rows.append((f"point_{i:03d}_{head.name}", head.value))
    (out_dir / "index.csv").write_text("\n".join(index_lines) + "\n")

    report = ComparisonReport(
        scenario=f"sweep({cfg.sweep_scenario})",
        checks=tuple(checks),
        metrics=(("sweep_points", float(len(results))), *metrics_rows),
    )
    write_report_files(out_dir, report)
    return report
