"""Experiment runners behind ``symvort run``.

Each runner receives the resolved config and the output directory, writes its
data files and returns a :class:`RunResult`. Runners never print.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import core, diagnostics, field2d, integrators, observables
from . import io


@dataclass
class RunResult:
    files: list = field(default_factory=list)
    summary: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)
    failed: bool = False
    failure: str | None = None


class RuntimeFailure(RuntimeError):
    """Raised by runners after partial outputs have been written."""

    def __init__(self, message, result):
        super().__init__(message)
        self.result = result


def integrator_config(cfg):
    return integrators.IntegratorConfig(**cfg["integrator"])


def build_system(system_cfg, rng):
    if "random" in system_cfg:
        r = system_cfg["random"]
        strengths = np.ones(r["N"]) if r["equal_strengths"] else None
        return core.random_system(
            r["m"], r["N"], rng, scale=r["scale"], strengths=strengths,
            strength_range=tuple(r["strength_range"]), min_sep=r["min_sep"],
        )
    return core.VortexSystem(system_cfg["m"], system_cfg["strengths"], np.asarray(system_cfg["positions"], dtype=float))


def ensemble_systems(cfg, size):
    """Member ``i`` is drawn from ``default_rng([seed, i])``."""
    system_cfg = cfg["system"]
    if "random" not in system_cfg:
        return [build_system(system_cfg, None)]
    return [build_system(system_cfg, np.random.default_rng([cfg["seed"], i])) for i in range(size)]


def _system_record(sys):
    return {"m": sys.m, "strengths": sys.strengths, "positions": sys.positions}


def _records_path(outdir, name):
    return outdir / f"{name}.jsonl"


# ------------------------------------------------------------------ runners


def run_simulate(cfg, outdir):
    sys = build_system(cfg["system"], np.random.default_rng(cfg["seed"]))
    rec = integrators.integrate(sys, integrator_config(cfg), cfg["horizon"], record_every=cfg["record_every"])
    res = RunResult()
    if cfg["output"]["format"] == "csv":
        path = outdir / "trajectory.csv"
        io.write_trajectory_csv(path, rec)
    else:
        path = _records_path(outdir, "trajectory")
        io.write_records(
            path,
            [
                {"kind": "sample", "t": t, "state": z, "invariants": dict(zip(rec.invariant_names, inv))}
                for t, z, inv in zip(rec.times, rec.states, rec.invariant_series)
            ],
        )
    res.files.append(path.name)
    drift = rec.drift_summary()
    res.extra["drift"] = drift
    res.extra["samples"] = len(rec)
    res.summary.append(f"samples: {len(rec)}  final time: {rec.times[-1]:.6g}")
    res.summary += [f"relative drift {k}: {v:.3e}" for k, v in drift.items()]
    if sys.N == 2:
        d0 = np.linalg.norm(sys.points[0] - sys.points[1])
        final = rec.system()
        d1 = np.linalg.norm(final.points[0] - final.points[1])
        res.extra["separation_change"] = float(abs(d1 - d0))
        res.summary.append(f"separation change: {abs(d1 - d0):.3e}")
    if rec.failed:
        res.failed, res.failure = True, rec.failure
        raise RuntimeFailure(rec.failure, res)
    return res


def run_invariants(cfg, outdir):
    rng = np.random.default_rng(cfg["seed"])
    samples = cfg["samples"] if "random" in cfg["system"] else 1
    records, worst_h, worst_inv = [], 0.0, 0.0
    for i in range(samples):
        sys = build_system(cfg["system"], rng)
        suite = observables.standard_invariants(sys.m)
        table = observables.bracket_table(suite, sys)
        h_row = np.abs(table[-1, :-1]).max() if table.shape[0] > 1 else 0.0
        fam = suite.involutive
        inv = max(
            (abs(observables.poisson_bracket(f, g, sys)) for a, f in enumerate(fam) for g in fam[a + 1:]),
            default=0.0,
        )
        worst_h, worst_inv = max(worst_h, h_row), max(worst_inv, inv)
        records.append(
            {
                "kind": "bracket_table",
                "sample": i,
                "system": _system_record(sys),
                "names": suite.names,
                "table": table,
                "max_abs_H_bracket": h_row,
                "max_abs_involutive_bracket": inv,
            }
        )
    path = _records_path(outdir, "brackets")
    io.write_records(path, records)
    res = RunResult(files=[path.name])
    res.extra.update(max_abs_H_bracket=worst_h, max_abs_involutive_bracket=worst_inv)
    res.summary += [f"samples: {samples}", f"max |{{H, X}}|: {worst_h:.3e}", f"max involutive bracket: {worst_inv:.3e}"]
    return res


def run_two_vortex_oracle(cfg, outdir):
    sys = build_system(cfg["system"], np.random.default_rng(cfg["seed"]))
    if sys.N != 2:
        raise ValueError("two_vortex_oracle needs N=2")
    icfg = integrator_config(cfg)
    half = integrators.IntegratorConfig(icfg.scheme, icfg.dt / 2, icfg.implicit_tol, icfg.implicit_max_iter)
    e1 = diagnostics.oracle_error(sys, icfg, cfg["horizon"], cfg["samples"])
    e2 = diagnostics.oracle_error(sys, half, cfg["horizon"], cfg["samples"])
    sol = diagnostics.two_vortex_solution(sys)
    ratio = e1 / e2 if e2 > 0 else float("inf")
    records = [
        {
            "kind": "closed_form",
            "angular_rate": sol.angular_rate,
            "separation": sol.separation,
            "center": sol.center,
            "drift_velocity": sol.drift_velocity,
            "invariant_plane": sol.invariant_plane,
        },
        {"kind": "oracle_error", "dt": icfg.dt, "error": e1},
        {"kind": "oracle_error", "dt": half.dt, "error": e2},
    ]
    path = _records_path(outdir, "oracle")
    io.write_records(path, records)
    res = RunResult(files=[path.name])
    res.extra.update(error=e1, error_half_dt=e2, ratio=ratio)
    res.summary += [
        f"angular rate: {sol.angular_rate:.10g}",
        f"max state error (dt={icfg.dt:g}): {e1:.3e}",
        f"max state error (dt={half.dt:g}): {e2:.3e}",
        f"error ratio: {ratio:.3f}",
    ]
    return res


def run_lyapunov(cfg, outdir):
    ens = cfg["ensemble"]
    systems = ensemble_systems(cfg, ens["size"])
    reports = diagnostics.lyapunov_ensemble(
        systems, integrator_config(cfg), cfg["horizon"], cfg["renorm_interval"], cfg["burn_in"],
        seed=cfg["seed"], workers=ens.get("workers"),
    )
    records = []
    for i, (sys, rep) in enumerate(zip(systems, reports)):
        records.append({"kind": "mle", "member": i, "mle": rep.mle, "failed": rep.failed, "failure": rep.failure,
                        "system": _system_record(sys)})
        records.append({"kind": "mle_series", "member": i, "times": rep.times, "estimates": rep.convergence_series})
    path = _records_path(outdir, "lyapunov")
    io.write_records(path, records)
    mles = np.array([r.mle for r in reports])
    res = RunResult(files=[path.name])
    res.extra.update(
        mle=mles, mle_min=float(np.nanmin(mles)), mle_median=float(np.nanmedian(mles)), mle_max=float(np.nanmax(mles))
    )
    res.summary += [
        f"members: {len(reports)}",
        f"MLE min/median/max: {np.nanmin(mles):.4f} / {np.nanmedian(mles):.4f} / {np.nanmax(mles):.4f}",
    ]
    failed = [i for i, r in enumerate(reports) if r.failed]
    if failed:
        res.failed, res.failure = True, f"members {failed} failed"
        raise RuntimeFailure(res.failure, res)
    return res


def run_section(cfg, outdir):
    sys = build_system(cfg["system"], np.random.default_rng(cfg["seed"]))
    sec = cfg["section"]
    obs = observables.named(sec["observable"], sys.m)
    chart = [observables.named(name, sys.m) for name in cfg["chart"]]
    crossings = diagnostics.poincare_section(
        sys, integrator_config(cfg), obs, sec["value"], cfg["horizon"], chart=chart, direction=sec["direction"]
    )
    records = [
        {"kind": "crossing", "time": c.time, "chart": list(c.chart), "transversal": c.transversal, "state": c.state.positions}
        for c in crossings
    ]
    path = _records_path(outdir, "section")
    io.write_records(path, records)
    res = RunResult(files=[path.name])
    res.extra["crossings"] = len(crossings)
    res.summary.append(f"crossings: {len(crossings)}")
    if len(chart) == 2 and len(crossings) > 8:
        resid = diagnostics.curve_residual([c.chart for c in crossings])
        res.extra["curve_residual"] = resid
        res.summary.append(f"nearest-neighbour curve residual: {resid:.4f}")
    return res


def run_equivariance(cfg, outdir):
    rng = np.random.default_rng(cfg["seed"])
    sys = build_system(cfg["system"], rng)
    icfg = integrator_config(cfg)
    records, worst = [], 0.0
    for i in range(cfg["samples"]):
        u = diagnostics.random_unitary(sys.m, rng)
        shift = rng.standard_normal(2 * sys.m)
        err = diagnostics.equivariance_error(sys, u, shift, icfg, cfg["horizon"])
        worst = max(worst, err)
        records.append({"kind": "equivariance", "sample": i, "error": err, "unitary": u, "shift": shift})
    path = _records_path(outdir, "equivariance")
    io.write_records(path, records)
    res = RunResult(files=[path.name])
    res.extra["max_error"] = worst
    res.summary.append(f"max |Phi(gz) - g Phi(z)| over {cfg['samples']} motions: {worst:.3e}")
    return res


def run_coplanarity_search(cfg, outdir):
    system_cfg = cfg["system"]
    rng = np.random.default_rng(cfg["seed"])
    records, best, best_sys = [], -1.0, None
    for i in range(cfg["samples"]):
        sys = build_system(system_cfg, rng)
        d = diagnostics.coplanarity_defect(sys)
        records.append({"kind": "coplanarity", "sample": i, "defect": d, "system": _system_record(sys)})
        if d > best:
            best, best_sys = d, sys
    path = _records_path(outdir, "coplanarity")
    io.write_records(path, records)
    res = RunResult(files=[path.name])
    res.extra.update(max_defect=best, witness=_system_record(best_sys))
    res.summary.append(f"max coplanarity defect over {cfg['samples']} samples: {best:.4e}")
    return res


def _initial_grid(cfg, f):
    if "grid_file" in f:
        values, t = io.read_grid(f["grid_file"])
        return field2d.VorticityGrid(values, time=t)
    n = f["n"]
    name = f["preset"]
    if name == "taylor-green":
        return field2d.taylor_green(n)
    if name == "shear":
        return field2d.shear_mode(n)
    if name == "two-mode":
        return field2d.two_mode(n)
    if name == "random":
        return field2d.random_field(n, seed=cfg["seed"], k_peak=f.get("k_peak", 4.0), amplitude=f.get("amplitude", 1.0))
    return field2d.gaussian_dipole(n, f.get("separation", 1.0), f.get("sigma", 0.05), f.get("circulation", 1.0))


def _field_stats(grid, k_max):
    stats = {
        "kind": "field_stats",
        "time": grid.time,
        "energy": field2d.dirichlet_energy(grid),
        "casimirs": field2d.casimirs(grid, k_max),
        "steady_residual": field2d.steady_residual(grid),
        "mean": grid.mean,
    }
    stats["positive_centroid"] = field2d.blob_centroid(grid, 1)
    stats["negative_centroid"] = field2d.blob_centroid(grid, -1)
    return stats


def _rel_change(a, b):
    # absolute change when the initial value vanishes (I_1 of a mean-zero field)
    d = abs(b - a)
    return d / abs(a) if abs(a) > 1e-12 else d


def run_field(cfg, outdir):
    f = cfg["field"]
    grid = field2d.project(_initial_grid(cfg, f))
    records = [_field_stats(grid, f["k_max"])]
    snapdir = outdir / "snapshots"
    res = RunResult()
    writer = io.write_grid_binary if f["snapshot_format"] == "binary" else io.write_grid_csv
    suffix = ".bin" if f["snapshot_format"] == "binary" else ".csv"

    def snapshot(g):
        snapdir.mkdir(exist_ok=True)
        name = f"snapshots/nu_{len(res.files):05d}{suffix}"
        writer(outdir / name, g.values, g.time)
        res.files.append(name)

    every = f["snapshot_every"]
    if every:
        snapshot(grid)

    def callback(g):
        if g.time != grid.time:
            records.append(_field_stats(g, f["k_max"]))
            if every:
                snapshot(g)

    final = field2d.evolve(grid, f["dt"], f["steps"], callback=callback, every=every or max(f["steps"], 1))
    final_path = f"final{suffix}"
    writer(outdir / final_path, final.values, final.time)
    res.files.append(final_path)
    path = _records_path(outdir, "field")
    io.write_records(path, records)
    res.files.append(path.name)
    first, last = records[0], records[-1]
    e_drift = _rel_change(first["energy"], last["energy"])
    c_drift = [_rel_change(a, b) for a, b in zip(first["casimirs"], last["casimirs"])]
    res.extra.update(energy_drift=e_drift, casimir_drift=c_drift, cfl_warning=final.cfl_warning,
                     steady_residual=last["steady_residual"])
    res.summary += [
        f"final time: {final.time:.6g}",
        f"relative energy drift: {e_drift:.3e}",
        "relative Casimir drift: " + ", ".join(f"I{k + 1}={d:.3e}" for k, d in enumerate(c_drift)),
        f"steady residual (final): {last['steady_residual']:.3e}",
        f"CFL warning: {final.cfl_warning}",
    ]
    return res


RUNNERS = {
    "simulate": run_simulate,
    "invariants": run_invariants,
    "two_vortex_oracle": run_two_vortex_oracle,
    "lyapunov": run_lyapunov,
    "section": run_section,
    "equivariance": run_equivariance,
    "coplanarity_search": run_coplanarity_search,
    "field": run_field,
}


def execute(cfg, outdir):
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    return RUNNERS[cfg["kind"]](cfg, outdir)
