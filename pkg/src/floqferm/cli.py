"""Command-line harness: reproducible experiments from JSON configs.

Each run reads one config, executes its task, and writes plot-ready CSV
artifacts plus a manifest (resolved config, seeds, version, wall time)
into the output directory.  Files are written atomically and re-running a
config with the same seed reproduces byte-identical CSV bodies.

Exit codes: 0 success, 2 config error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from . import edge as edge_mod
from . import gaussian, oracle
from .errors import (
    AmbiguousClassification,
    ConfigError,
    DegenerateImaginaryPart,
    FloqfermError,
)
from .fitting import linear_fit
from .model import ModelParams
from .spectrum import (
    QuasiSpectrum,
    build_floquet_matrix,
    classify_phase,
    finite_size_splitting,
    gap_condition,
    quasi_energies,
)

TASKS = ("spectrum", "edge", "dynamics", "phase-diagram", "entanglement", "verify")
ENGINES = ("gaussian", "exact", "both")


@dataclasses.dataclass
class RunConfig:
    task: str
    model: ModelParams
    options: dict = dataclasses.field(default_factory=dict)
    engine: str = "gaussian"

    def __post_init__(self):
        if self.task not in TASKS:
            raise ConfigError(f"unknown task {self.task!r}; choose from {TASKS}")
        if self.engine not in ENGINES:
            raise ConfigError(f"unknown engine {self.engine!r}; choose from {ENGINES}")
        if self.engine in ("exact", "both") and self.model.L > oracle.MAX_SITES:
            raise ConfigError(f"exact engine requires L <= {oracle.MAX_SITES}")
        if self.engine in ("gaussian", "both") and any(j != 0 for j in self.model.j_yy):
            raise ConfigError("gaussian engine requires j_yy = 0")

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        data = dict(data)
        if "task" not in data or "model" not in data:
            raise ConfigError("config needs 'task' and 'model' keys")
        model = ModelParams.from_dict(data.pop("model"))
        known = {"task", "options", "engine"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(model=model, **data)

    def to_dict(self) -> dict:
        return {
            "task": self.task,
            "engine": self.engine,
            "model": self.model.to_dict(),
            "options": self.options,
        }


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


def write_atomic(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def write_csv(path: str, header: list[str], rows: list) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(x) for x in row))
    write_atomic(path, "\n".join(lines) + "\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if np.isfinite(f) else repr(f)
    return obj


def write_json(path: str, payload: dict) -> None:
    write_atomic(path, json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# tasks
# ---------------------------------------------------------------------------


def _spectrum_rows(spec: QuasiSpectrum) -> list:
    rows = []
    mid = spec.mid_gap_index()
    for k, eps in enumerate(spec.pairs):
        i, j = spec.pair_indices[k]
        for value, raw_idx in ((eps, i), (-eps, j)):
            m = spec.raw[raw_idx]
            rows.append(
                (k, value.real, value.imag, 1 if k == mid else 0, m.real, m.imag)
            )
    return rows


_SPECTRUM_HEADER = ["pair_index", "re_eps", "im_eps", "is_mid_gap", "raw_re_m", "raw_im_m"]


def _sweep_tag(value: float) -> str:
    return format(float(value), ".6g").replace("-", "m").replace(".", "p")


def task_spectrum(cfg: RunConfig, out: str, workers: int) -> list[str]:
    opts = cfg.options
    outputs = []
    sweep = opts.get("sweep")
    points = [(None, cfg.model)]
    if sweep:
        par = sweep.get("parameter", "h_y")
        if par not in ("h_y", "beta"):
            raise ConfigError("sweep parameter must be 'h_y' or 'beta'")
        points = [
            (v, dataclasses.replace(cfg.model, **{par: v})) for v in sweep["values"]
        ]
    for value, model in points:
        spec = quasi_energies(build_floquet_matrix(model))
        tag = "" if value is None else f"_{_sweep_tag(value)}"
        path = os.path.join(out, f"spectrum{tag}.csv")
        write_csv(path, _SPECTRUM_HEADER, _spectrum_rows(spec))
        outputs.append(path)
    scan = opts.get("splitting_scan")
    if scan:
        result = finite_size_splitting(cfg.model, scan["sizes"])
        path = os.path.join(out, "splitting.csv")
        write_csv(path, ["L", "min_im"], list(zip(result.sizes, result.min_im)))
        outputs.append(path)
        path = os.path.join(out, "splitting_fit.json")
        write_json(path, result.to_dict())
        outputs.append(path)
    return outputs


def task_edge(cfg: RunConfig, out: str, workers: int) -> list[str]:
    model = cfg.model
    opts = cfg.options
    sign = int(opts.get("sign", -1))
    side = opts.get("side", "left")
    V = build_floquet_matrix(model)
    mode = edge_mod.floquet_kernel_mode(V, sign=sign, side=side)
    report = edge_mod.verify_mode(V, mode)
    rows = []
    for j in range(1, model.L + 1):
        va = mode.coeffs[2 * j - 2]
        vb = mode.coeffs[2 * j - 1]
        rows.append((j, va.real, va.imag, vb.real, vb.imag, mode.pair_norms()[j - 1]))
    outputs = []
    path = os.path.join(out, "edge_mode.csv")
    write_csv(path, ["site", "re_va", "im_va", "re_vb", "im_vb", "pair_norm"], rows)
    outputs.append(path)

    payload = {"defect": report.defect, "slope": report.decay.slope}
    uniform_free = (
        all(j == 0 for j in model.j_xx)
        and all(j == 0 for j in model.j_zz)
        and len(set(model.h_y)) == 1
        and model.disorder.kind == "none"
    )
    if uniform_free:
        lam = edge_mod.contracting_eigenvalue(model.beta, model.h_y[0])
        payload["slope_analytic"] = float(np.log(abs(lam)))
    try:
        payload["eig_min_of_M"] = edge_mod.smallest_m_eigenvalue(model)
    except ConfigError:
        payload["eig_min_of_M"] = None
    path = os.path.join(out, "edge_report.json")
    write_json(path, payload)
    outputs.append(path)

    spec = quasi_energies(V)
    path = os.path.join(out, "spectrum.csv")
    write_csv(path, _SPECTRUM_HEADER, _spectrum_rows(spec))
    outputs.append(path)

    scan = opts.get("m_scan")
    if scan:
        rows = []
        for L in scan["sizes"]:
            rows.append((L, edge_mod.smallest_m_eigenvalue(model.with_size(int(L)))))
        path = os.path.join(out, "m_scan.csv")
        write_csv(path, ["L", "min_eig"], rows)
        outputs.append(path)
    return outputs


def _initial_occupations(model: ModelParams, init: dict) -> list[int]:
    kind = init.get("kind", "fock")
    if kind == "fock":
        occ = init.get("occupations")
        if occ is None or len(occ) != model.L:
            raise ConfigError("fock initial state needs L occupations")
        return [int(o) for o in occ]
    raise ConfigError(f"gaussian engine cannot prepare initial state {kind!r}")


def _initial_dense(model: ModelParams, init: dict) -> oracle.DenseState:
    kind = init.get("kind", "fock")
    if kind == "fock":
        return oracle.y_product_state(_initial_occupations(model, init))
    if kind == "z-product":
        bits = init.get("bits")
        if bits is None or len(bits) != model.L:
            raise ConfigError("z-product initial state needs L bits")
        return oracle.z_product_state(bits)
    if kind == "random-z":
        return oracle.z_product_state(oracle.random_z_bits(model.L, model.seed))
    raise ConfigError(f"unknown initial state kind {kind!r}")


_TRAJ_HEADER = [
    "t",
    "mean_Y",
    "bond_ZZ_mean",
    "parity",
    "entropy_half_cut",
    "dist_to_ss1",
    "dist_to_ss2",
]


def _gaussian_steady_pair(model: ModelParams):
    spec = quasi_energies(build_floquet_matrix(model))
    g = abs(spec.mid_gap_pair().imag)
    tol = max(1e-8, 2.0 * g * (1 + 1e-9) + 1e-12)
    try:
        return (
            gaussian.steady_state(spec, i0_fill=True, i0_tol=tol),
            gaussian.steady_state(spec, i0_fill=False, i0_tol=tol),
        )
    except (DegenerateImaginaryPart, FloqfermError):
        return None, None


def task_dynamics(cfg: RunConfig, out: str, workers: int) -> list[str]:
    model = cfg.model
    opts = cfg.options
    steps = int(opts.get("steps", 100))
    init = opts.get("initial", {})
    outputs = []
    if cfg.engine in ("gaussian", "both"):
        occ = _initial_occupations(model, init)
        state = gaussian.initial_fock_state(occ)
        ss1, ss2 = _gaussian_steady_pair(model)
        rows = [_gaussian_row(0, state, model, ss1, ss2)]
        for t, state in gaussian.evolve(model, state, steps):
            rows.append(_gaussian_row(t, state, model, ss1, ss2))
        path = os.path.join(out, "trajectory_gaussian.csv")
        write_csv(path, _TRAJ_HEADER, rows)
        outputs.append(path)
    if cfg.engine in ("exact", "both"):
        state = _initial_dense(model, init)
        ss_states = _dense_steady_pair(model)
        rows = [_dense_row(0, state, model, ss_states)]
        for t, state in oracle.run_trajectory(model, state, steps):
            rows.append(_dense_row(t, state, model, ss_states))
        path = os.path.join(out, "trajectory_exact.csv")
        write_csv(path, _TRAJ_HEADER + ["mean_Z"], rows)
        outputs.append(path)
    return outputs


def _gaussian_row(t, state, model, ss1, ss2):
    obs = gaussian.observables(state)
    ent = gaussian.entanglement_entropy(state, model.L // 2)
    d1 = gaussian.correlation_distance(state, ss1) if ss1 is not None else float("nan")
    d2 = gaussian.correlation_distance(state, ss2) if ss2 is not None else float("nan")
    return (t, obs.mean_y(), obs.mean_zz(), obs.parity, ent, d1, d2)


def _dense_steady_pair(model: ModelParams):
    if model.L > oracle.MAX_SPECTRUM_SITES or model.disorder.kind == "stochastic":
        return None
    mb = oracle.spectral_decompose(model)
    top = mb.top_indices(2)
    out = []
    for idx in top:
        v = mb.vectors[:, idx] / np.linalg.norm(mb.vectors[:, idx])
        out.append(oracle.measure(oracle.DenseState(v, model.L)).majorana_corr)
    return out


def _dense_row(t, state, model, ss_corr):
    meas = oracle.measure(state)
    ent = oracle.entanglement_entropy(state, model.L // 2)
    if ss_corr is not None:
        d1 = float(np.linalg.norm(meas.majorana_corr - ss_corr[0])) / 2.0
        d2 = float(np.linalg.norm(meas.majorana_corr - ss_corr[1])) / 2.0
    else:
        d1 = d2 = float("nan")
    zz = np.array([meas.zz[j, j + 1] for j in range(model.L - 1)])
    return (t, meas.mean_y(), float(zz.mean()), meas.parity, ent, d1, d2, meas.mean_z())


def _classify_point(args):
    beta, h_y, base_dict, engine, gap_tol, split_tol = args
    if engine == "analytic":
        label = classify_phase(beta, h_y)
        p = gap_condition(beta, h_y)
        return (beta, h_y, 0, label, abs(np.arccosh(max(abs(p), 1.0)) / 2), float("nan"))
    model = ModelParams.from_dict(base_dict)
    model = dataclasses.replace(model, beta=beta, h_y=h_y)
    spec = quasi_energies(build_floquet_matrix(model))
    try:
        label = classify_phase(spectrum=spec, gap_tol=gap_tol, split_tol=split_tol)
    except AmbiguousClassification:
        label = "ambiguous"
    return (
        beta,
        h_y,
        model.L,
        label,
        spec.bulk_im_gap(),
        spec.mid_gap_splitting(),
    )


def _grid_values(spec) -> list[float]:
    if isinstance(spec, dict):
        return list(np.linspace(spec["min"], spec["max"], int(spec["count"])))
    return [float(v) for v in spec]


def task_phase_diagram(cfg: RunConfig, out: str, workers: int) -> list[str]:
    opts = cfg.options
    betas = _grid_values(opts.get("beta_values", {"min": 0.0, "max": 2.5, "count": 20}))
    hs = _grid_values(opts.get("h_y_values", {"min": 0.0, "max": np.pi / 2, "count": 20}))
    engine = opts.get("classifier", "numeric")
    gap_tol = float(opts.get("gap_tol", 1e-3))
    split_tol = float(opts.get("split_tol", 1e-2))
    jobs = [
        (b, h, cfg.model.to_dict(), engine, gap_tol, split_tol) for b in betas for h in hs
    ]
    if workers > 1 and len(jobs) > 8:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_classify_point, jobs, chunksize=8))
    else:
        rows = [_classify_point(j) for j in jobs]
    rows.sort(key=lambda r: (r[0], r[1]))
    path = os.path.join(out, "phase_diagram.csv")
    write_csv(path, ["beta", "h_y", "L", "label", "im_gap", "re_splitting"], rows)
    return [path]


def entropy_scan(model: ModelParams, cuts=None, i0_fill=None, i0_tol: float = 1e-8):
    """Steady-state entropy profile plus log(sin) fit and flatness metrics."""
    spec = quasi_energies(build_floquet_matrix(model))
    state = gaussian.steady_state(
        spec, i0_fill=None if i0_fill is None else bool(i0_fill), i0_tol=i0_tol
    )
    if cuts is None:
        cuts = list(range(1, model.L))
    entropies = [(int(c), gaussian.entanglement_entropy(state, int(c))) for c in cuts]
    cuts_arr = np.array([c for c, _ in entropies], dtype=float)
    s_arr = np.array([s for _, s in entropies])
    window = (cuts_arr >= model.L / 8) & (cuts_arr <= 7 * model.L / 8)
    x = np.log(np.sin(np.pi * cuts_arr[window] / model.L))
    fit = linear_fit(x, s_arr[window])
    mid = float(s_arr[np.abs(cuts_arr - model.L / 2).argmin()])
    report = {
        "beta": model.beta,
        "log_sin_fit": fit.to_dict(),
        "mid_cut_entropy": mid,
        "max_abs_dev_from_mid": float(np.max(np.abs(s_arr[window] - mid))),
    }
    return entropies, report


def task_entanglement(cfg: RunConfig, out: str, workers: int) -> list[str]:
    opts = cfg.options
    betas = opts.get("beta_values")
    models = (
        [cfg.model]
        if betas is None
        else [dataclasses.replace(cfg.model, beta=b) for b in betas]
    )
    outputs = []
    reports = []
    for model in models:
        entropies, report = entropy_scan(
            model,
            cuts=opts.get("cuts"),
            i0_fill=opts.get("i0_fill"),
            i0_tol=float(opts.get("i0_tol", 1e-8)),
        )
        tag = "" if betas is None else f"_{_sweep_tag(model.beta)}"
        path = os.path.join(out, f"entropy_scan{tag}.csv")
        write_csv(path, ["L_A", "S"], entropies)
        outputs.append(path)
        reports.append(report)
    path = os.path.join(out, "entanglement_report.json")
    write_json(path, {"scans": reports})
    outputs.append(path)
    return outputs


def task_verify(cfg: RunConfig, out: str, workers: int) -> list[str]:
    opts = cfg.options
    L = int(opts.get("L", 6))
    steps = int(opts.get("steps", 30))
    model = cfg.model if cfg.model.L == L else cfg.model.with_size(L)
    checks: dict[str, dict] = {}

    def record(name, value, tol):
        checks[name] = {"value": float(value), "tol": float(tol), "pass": bool(value <= tol)}

    occ = [int(b) for b in oracle.random_z_bits(L, model.seed)]
    gs = gaussian.initial_fock_state(occ)
    ds = oracle.y_product_state(occ)
    upd = gaussian.step_matrix(build_floquet_matrix(model))
    for _ in range(steps):
        gs = gaussian.step(gs, update=upd)
        ds = oracle.apply_floquet(ds, model)
    meas = oracle.measure(ds)
    record("corr_matrix", np.abs(gs.majorana_c_matrix() - meas.majorana_corr).max(), 1e-7)
    obs = gaussian.observables(gs)
    record("y_expectations", np.abs(obs.y - meas.y).max(), 1e-7)
    zz_err = max(
        abs(gaussian.string_correlator(gs, j, k) - meas.zz[j - 1, k - 1])
        for j in range(1, L)
        for k in range(j + 1, L + 1)
    )
    record("zz_strings", zz_err, 1e-7)
    record("parity", abs(obs.parity - meas.parity), 1e-7)
    record(
        "half_cut_entropy",
        abs(gaussian.entanglement_entropy(gs, L // 2) - oracle.entanglement_entropy(ds, L // 2)),
        1e-7,
    )
    ode = gaussian.resolve_ode_cubic_sign(L=4, beta=model.beta or 0.8)
    checks["ode_sign"] = {
        "pass": bool(ode["consistent"]),
        "value": ode["chosen_sign"],
        "tol": ode["module_default"],
    }
    ode_state = gs
    map_state = gs
    for _ in range(5):
        map_state = gaussian.step(map_state, update=upd)
        ode_state = gaussian.step_ode(ode_state, model)
    record(
        "ode_map_equivalence",
        gaussian.correlation_distance(map_state, ode_state),
        1e-6,
    )
    all_green = all(c["pass"] for c in checks.values())
    payload = {
        "L": L,
        "steps": steps,
        "checks": checks,
        "all_green": all_green,
        "ode_sign_resolution": ode,
    }
    path = os.path.join(out, "verify.json")
    write_json(path, payload)
    if not all_green:
        raise FloqfermError("verification suite found failing checks (see verify.json)")
    return [path]


_TASK_FN = {
    "spectrum": task_spectrum,
    "edge": task_edge,
    "dynamics": task_dynamics,
    "phase-diagram": task_phase_diagram,
    "entanglement": task_entanglement,
    "verify": task_verify,
}


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------


def run(config: RunConfig, out_dir: str, workers: int = 1) -> dict:
    """Execute a task and write its artifacts plus a manifest."""
    started = time.time()
    os.makedirs(out_dir, exist_ok=True)
    outputs = _TASK_FN[config.task](config, out_dir, workers)
    manifest = {
        "config": config.to_dict(),
        "version": __version__,
        "wall_time_s": time.time() - started,
        "outputs": [os.path.basename(p) for p in outputs],
    }
    write_json(os.path.join(out_dir, "manifest.json"), manifest)
    return manifest


def _apply_overrides(config: RunConfig, args) -> RunConfig:
    model = config.model
    if args.seed is not None:
        disorder = dataclasses.replace(model.disorder, seed=args.seed)
        model = dataclasses.replace(model, seed=args.seed, disorder=disorder)
    engine = args.engine or config.engine
    return dataclasses.replace(config, model=model, engine=engine)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="floqferm",
        description="Nonunitary Floquet chain experiments from a JSON config.",
    )
    parser.add_argument("--config", required=True, help="path to a run config JSON")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument(
        "--workers", type=int, default=os.cpu_count() or 1, help="parallel workers"
    )
    parser.add_argument("--seed", type=int, default=None, help="override config seeds")
    parser.add_argument("--engine", choices=ENGINES, default=None)
    args = parser.parse_args(argv)

    try:
        with open(args.config) as fh:
            raw = json.load(fh)
        config = _apply_overrides(RunConfig.from_dict(raw), args)
    except (OSError, json.JSONDecodeError, ConfigError) as exc:
        _emit_error(args.out, exc)
        return 2
    try:
        run(config, args.out, workers=max(1, args.workers))
    except ConfigError as exc:
        _emit_error(args.out, exc)
        return 2
    except (FloqfermError, np.linalg.LinAlgError) as exc:
        _emit_error(args.out, exc)
        return 3
    return 0


def _emit_error(out_dir: str, exc: Exception) -> None:
    payload = {"error": type(exc).__name__, "message": str(exc)}
    try:
        write_json(os.path.join(out_dir, "error.json"), payload)
    except OSError:
        pass
    print(json.dumps(payload), file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
