"""Command-line interface: trajectories, comparisons, resonance tables, figure data.

Exit codes: 0 success, 1 comparison above threshold, 2 configuration or grid
error, 3 solver error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import exact, oracle, resonance, specfun
from .errors import DomainError, GridMismatchError, IntegrationError, UnresolvedBranchError
from .model import FieldKind, FieldParams, HarmonicField, RotatingField
from .states import Trajectory

EXIT_OK, EXIT_THRESHOLD, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2, 3
COLUMNS = ("tau", "re_cp", "im_cp", "re_cm", "im_cm", "s1", "s2", "s3", "norm_err")
METHODS = ("exact", "ode", "rwa")
FIELDS = tuple(kind.value for kind in FieldKind)
FORMATS = ("csv", "json")


class ConfigError(ValueError):
    """Invalid run configuration."""


@dataclass(frozen=True)
class RunConfig:
    """One simulation run; all frequencies and amplitudes are in units of ``nu``.

    ``delta`` is ``(w0 - w) / nu``; ``nu`` itself only sets the physical time
    unit ``t = tau / nu`` reported in the metadata. ``amplitude`` and ``frequency`` describe the
    ``lp-harmonic`` and ``rabi`` fields; the cnoidal kinds use ``N`` and ``k``.
    """

    field: str = "lp-cnoidal"
    method: str = "exact"
    N: int = 1
    k: float = 0.5
    delta: float = 1.0
    nu: float = 1.0
    omega: float = 0.0
    amplitude: float = 0.5
    frequency: float = 1.0
    tau_min: float = 0.0
    tau_max: float = 10.0
    samples: int = 201
    tol: float = 1e-10
    format: str = "csv"
    out: str | None = None

    def validate(self) -> "RunConfig":
        if self.field not in FIELDS:
            raise ConfigError(f"unknown field {self.field!r}; choose from {', '.join(FIELDS)}")
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; choose from {', '.join(METHODS)}")
        if self.format not in FORMATS:
            raise ConfigError(f"unknown format {self.format!r}")
        if isinstance(self.samples, bool) or int(self.samples) != self.samples or self.samples < 2:
            raise ConfigError("samples must be an integer >= 2")
        if not self.tau_max > self.tau_min:
            raise ConfigError("tau_max must exceed tau_min")
        for name in ("k", "delta", "nu", "omega", "amplitude", "frequency", "tau_min", "tau_max", "tol"):
            if not math.isfinite(float(getattr(self, name))):
                raise ConfigError(f"{name} must be finite")
        if self.field == "soliton" and self.k != 1.0:
            raise ConfigError("the soliton field requires k = 1")
        if self.field == "lp-cnoidal" and self.omega != 0.0:
            raise ConfigError("the lp-cnoidal field requires omega = 0")
        if self.field in ("cnoidal", "lp-cnoidal", "soliton"):
            try:
                self.field_params()
            except DomainError as exc:
                raise ConfigError(str(exc)) from exc
        if self.method == "exact":
            if self.field in ("lp-harmonic", "rabi"):
                raise ConfigError(f"no closed form for the {self.field} field; use --method ode or rwa")
            if not exact.supports_closed_form(self.field_params()):
                raise ConfigError("method=exact requires N in {1, 2}, delta = 0 or k = 1")
        return self

    def field_params(self) -> FieldParams:
        # Everything is dimensionless; nu only labels the physical time unit.
        return FieldParams.from_detuning(self.N, self.k, self.delta, omega=self.omega)

    @property
    def omega0(self) -> float:
        return self.omega + self.delta

    def grid(self) -> np.ndarray:
        return np.linspace(self.tau_min, self.tau_max, int(self.samples))

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(data)


# ---------------------------------------------------------------------------
# Running


def _reference_field(cfg: RunConfig):
    if cfg.field == "lp-harmonic":
        return HarmonicField(cfg.amplitude, cfg.frequency, cfg.omega0)
    if cfg.field == "rabi":
        return RotatingField(cfg.amplitude, cfg.omega, cfg.omega0)
    return cfg.field_params()


def _rwa_parameters(cfg: RunConfig) -> tuple[float, float]:
    """Co-rotating amplitude and drive frequency, both in units of ``nu``."""
    if cfg.field == "rabi":
        return cfg.amplitude, cfg.omega
    if cfg.field == "lp-harmonic":
        return cfg.amplitude / 2.0, cfg.frequency
    if cfg.field == "lp-cnoidal":
        return cfg.N * cfg.k / 2.0, 1.0
    raise ConfigError(f"no rotating-wave reference for the {cfg.field} field")


def rwa_trajectory(a_rot: float, omega: float, omega0: float, tau) -> Trajectory:
    """Rabi solution of a constant co-rotating drive, in dimensionless units."""
    tau = np.asarray(tau, dtype=float)
    detuning = omega0 - omega
    rabi = math.hypot(detuning, 2.0 * a_rot)
    if rabi == 0.0:
        raise DomainError("Rabi frequency vanishes")
    c, s = np.cos(0.5 * rabi * tau), np.sin(0.5 * rabi * tau)
    bp = c - 1j * detuning / rabi * s
    bm = -1j * 2.0 * a_rot / rabi * s
    w = np.exp(-0.5j * omega * tau)
    return Trajectory(tau, bp * w, bm / w, omega0, {"method": "rwa", "rabi_frequency": rabi})


def run(cfg: RunConfig) -> Trajectory:
    cfg.validate()
    grid = cfg.grid()
    if cfg.method == "exact":
        return exact.exact_trajectory(cfg.field_params(), grid)
    if cfg.method == "rwa":
        a_rot, omega = _rwa_parameters(cfg)
        return rwa_trajectory(a_rot, omega, cfg.omega0, grid)
    fld = _reference_field(cfg)
    start = -20.0 if cfg.field == "soliton" else cfg.tau_min
    if start > cfg.tau_min:
        start = cfg.tau_min
    icfg = oracle.IntegratorConfig(tuple(grid), rel_tol=cfg.tol, abs_tol=cfg.tol, start_tau=start)
    return oracle.integrate(fld, icfg)


def trajectory_rows(traj: Trajectory) -> np.ndarray:
    s1, s2, s3 = traj.bloch
    return np.column_stack([
        traj.tau, traj.c_plus.real, traj.c_plus.imag, traj.c_minus.real, traj.c_minus.imag,
        s1, s2, s3, traj.norm_error,
    ])


def _fmt(x: float) -> str:
    return "%.17g" % x


def _plain(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    return value


def render(columns, rows, metadata: dict, fmt: str, params: dict | None = None) -> str:
    """Serialize a table; CSV carries metadata as leading ``#`` lines."""
    if fmt == "json":
        payload = {
            "params": params or {},
            "metadata": {k: _plain(v) for k, v in metadata.items()},
            "columns": {name: [float(v) for v in np.asarray(rows)[:, j]] for j, name in enumerate(columns)},
        }
        return json.dumps(payload, indent=1, sort_keys=True) + "\n"
    buf = io.StringIO()
    for key in sorted(metadata):
        buf.write(f"# {key}: {_plain(metadata[key])}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(float(v)) for v in row])
    return buf.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# Presets


def _fig2_config(delta: float) -> tuple[RunConfig, RunConfig]:
    k = 0.25
    exact_cfg = RunConfig(field="lp-cnoidal", method="exact", N=2, k=k, delta=delta,
                          tau_max=30.0, samples=601)
    harmonic = RunConfig(field="lp-harmonic", method="ode", amplitude=2 * k, frequency=1.0,
                         delta=delta, tau_max=30.0, samples=601)
    return exact_cfg, harmonic


PRESETS = {
    "fig2a": lambda: _fig2_config(0.4),
    "fig2b": lambda: _fig2_config(12.0),
}


# ---------------------------------------------------------------------------
# Commands


def cmd_simulate(args) -> int:
    if args.preset:
        cfg, reference = PRESETS[args.preset]()
        cfg = replace(cfg, format=args.format or "csv", out=args.out)
    else:
        cfg = _config_from_args(args)
        reference = None
    if args.save_config:
        Path(args.save_config).write_text(cfg.to_json() + "\n")
    traj = run(cfg)
    columns, rows = list(COLUMNS), trajectory_rows(traj)
    meta = dict(traj.metadata)
    meta["time"] = f"tau = nu t with nu = {cfg.nu!r}"
    if reference is not None:
        ref = run(reference)
        columns.append("s3_reference")
        rows = np.column_stack([rows, ref.s3])
        meta["reference"] = f"{reference.field}/{reference.method}"
    params = asdict(cfg)
    meta.update({f"param.{k}": v for k, v in params.items() if k not in ("out", "format")})
    _emit(render(columns, rows, meta, cfg.format, params), cfg.out)
    return EXIT_OK


def _load_config(path: str) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return RunConfig.from_json(text)


def cmd_compare(args) -> int:
    if args.preset:
        cfg_a, cfg_b = PRESETS[args.preset]()
    else:
        cfg_a = _load_config(args.config_a) if args.config_a else _config_from_args(args)
        cfg_b = _load_config(args.config_b) if args.config_b else replace(cfg_a, method="ode")
    cfg_a.validate()
    cfg_b.validate()
    if (cfg_a.tau_min, cfg_a.tau_max, cfg_a.samples) != (cfg_b.tau_min, cfg_b.tau_max, cfg_b.samples):
        raise GridMismatchError("the two configurations use different tau grids")
    with ThreadPoolExecutor(max_workers=max(1, args.workers)) as pool:
        traj_a, traj_b = pool.map(run, (cfg_a, cfg_b))
    max_dev = oracle.max_deviation(traj_a, traj_b)
    rms_dev = oracle.rms_deviation(traj_a, traj_b)
    report = {
        "max_abs_ds3": max_dev, "rms_ds3": rms_dev, "threshold": args.threshold,
        "passed": max_dev <= args.threshold, "samples": len(traj_a),
        "a": f"{cfg_a.field}/{cfg_a.method}", "b": f"{cfg_b.field}/{cfg_b.method}",
    }
    if args.residuals:
        rows = np.column_stack([traj_a.tau, traj_a.s3, traj_b.s3, traj_a.s3 - traj_b.s3])
        _emit(render(("tau", "s3_a", "s3_b", "ds3"), rows, report, "csv"), args.residuals)
    sys.stdout.write(json.dumps(report, sort_keys=True) + "\n")
    return EXIT_OK if report["passed"] else EXIT_THRESHOLD


def cmd_resonance(args) -> int:
    if args.kind == "rabi":
        if not args.m:
            raise ConfigError("rabi resonances need --m")
        sols = [resonance.solve_rabi_resonance_k(args.N, m) for m in args.m]
    elif args.kind == "chebyshev":
        sols = resonance.chebyshev_solutions(args.N, args.labeling)
    else:
        if not args.k:
            raise ConfigError("bloch-siegert needs --k")
        sols = [resonance.bloch_siegert_solution(k) for k in args.k]
    columns = ("kind", "N", "index", "k", "value", "residual")
    rows = [sol.as_row() for sol in sols]
    if args.format == "json":
        text = json.dumps(rows, indent=1) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row[c]) if isinstance(row[c], float) else ("" if row[c] is None else row[c]) for c in columns])
        text = buf.getvalue()
    _emit(text, args.out)
    return EXIT_OK


def _figure_panels(fig: str, samples: int) -> list[dict]:
    panels = []
    if fig == "fig1":
        for N, k in ((2, 0.70711), (3, 0.86603)):
            K = specfun.complete_K(k)
            base = RunConfig(field="lp-cnoidal", N=N, k=k, delta=0.0, tau_max=8 * K, samples=samples)
            panels.append({"name": f"N{N}_k{k}", "runs": {"exact": base, "ode": replace(base, method="ode")},
                           "extra": {"s3_chebyshev": lambda g, N=N, k=k: exact.s3_resonant(N, k, g)}})
    elif fig == "fig2":
        for label, delta in (("a", 0.4), ("b", 12.0)):
            ex, ref = _fig2_config(delta)
            ex, ref = replace(ex, samples=samples), replace(ref, samples=samples)
            panels.append({"name": f"{label}_delta{delta}", "runs": {"exact": ex, "ode_harmonic": ref}, "extra": {}})
    elif fig == "fig3":
        for label, m in zip("abcd", (4, 3, 2, 1)):
            k = resonance.solve_rabi_resonance_k(2, m).k
            a = 2 * k
            tau_max = 2 * (2 * math.pi / a)
            ex = RunConfig(field="lp-cnoidal", N=2, k=k, delta=1.0, tau_max=tau_max, samples=samples)
            ref = RunConfig(field="lp-harmonic", method="ode", amplitude=a, frequency=1.0, delta=1.0,
                            tau_max=tau_max, samples=samples)
            panels.append({"name": f"{label}_k{k:.4f}", "runs": {"exact": ex, "ode_harmonic": ref,
                           "rwa": replace(ref, method="rwa")}, "extra": {}})
    else:
        raise ConfigError(f"unknown figure {fig!r}")
    return panels


def cmd_figure(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    panels = _figure_panels(args.id, args.samples)
    jobs = [(p, name, cfg) for p in panels for name, cfg in p["runs"].items()]
    with ThreadPoolExecutor(max_workers=max(1, args.workers)) as pool:
        results = list(pool.map(lambda job: run(job[2]), jobs))
    by_panel: dict = {}
    for (panel, name, cfg), traj in zip(jobs, results):
        by_panel.setdefault(panel["name"], {})[name] = (cfg, traj)
    manifest = {"figure": args.id, "panels": []}
    for panel in panels:
        runs = by_panel[panel["name"]]
        grid = next(iter(runs.values()))[1].tau
        columns = ["tau"] + [f"s3_{name}" for name in runs] + list(panel["extra"])
        data = [grid] + [traj.s3 for _, traj in runs.values()] + [np.asarray(f(grid)) for f in panel["extra"].values()]
        path = out_dir / f"{args.id}_{panel['name']}.csv"
        path.write_text(render(columns, np.column_stack(data), {"figure": args.id, "panel": panel["name"]}, "csv"))
        manifest["panels"].append({
            "name": panel["name"], "file": path.name, "columns": columns,
            "runs": {name: asdict(cfg) for name, (cfg, _) in runs.items()},
        })
    (out_dir / f"{args.id}_manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    sys.stdout.write(f"wrote {len(panels)} panels to {out_dir}\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument parsing


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON run configuration; flags given explicitly override it")
    p.add_argument("--field", choices=FIELDS)
    p.add_argument("--method", choices=METHODS)
    p.add_argument("--N", type=int)
    p.add_argument("--k", type=float)
    p.add_argument("--delta", type=float, help="(w0 - w) / nu")
    p.add_argument("--omega0", type=float, help="alternative to --delta, in units of nu")
    p.add_argument("--omega", type=float, help="rotation frequency in units of nu")
    p.add_argument("--nu", type=float)
    p.add_argument("--amplitude", type=float, help="lp-harmonic / rabi amplitude")
    p.add_argument("--frequency", type=float, help="lp-harmonic frequency in units of nu")
    p.add_argument("--tau-min", type=float)
    p.add_argument("--tau-max", type=float)
    p.add_argument("--samples", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--format", choices=FORMATS)
    p.add_argument("--out")


_FLAG_KEYS = ("field", "method", "N", "k", "delta", "nu", "omega", "amplitude", "frequency",
              "tau_min", "tau_max", "samples", "tol", "format", "out")


def _config_from_args(args) -> RunConfig:
    cfg = _load_config(args.config) if getattr(args, "config", None) else RunConfig()
    updates = {key: getattr(args, key) for key in _FLAG_KEYS if getattr(args, key, None) is not None}
    cfg = replace(cfg, **updates)
    if getattr(args, "omega0", None) is not None:
        if args.delta is not None:
            raise ConfigError("give either --delta or --omega0, not both")
        cfg = replace(cfg, delta=args.omega0 - cfg.omega)
    if "k" not in updates and cfg.field == "soliton":
        cfg = replace(cfg, k=1.0)
    return cfg.validate()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cnoidal", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="write one trajectory as CSV or JSON")
    _add_run_flags(p)
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--save-config", help="also write the resolved configuration as JSON")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="compare S3 of two runs on a shared grid")
    _add_run_flags(p)
    p.add_argument("--config-a")
    p.add_argument("--config-b", help="defaults to run A with --method ode")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--threshold", type=float, default=1e-6)
    p.add_argument("--residuals", help="per-sample residual CSV")
    p.add_argument("--workers", type=int, default=2)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("resonance", help="tabulate resonance conditions")
    p.add_argument("kind", choices=("rabi", "chebyshev", "bloch-siegert"))
    p.add_argument("--N", type=int, default=1)
    p.add_argument("--m", type=int, nargs="+")
    p.add_argument("--k", type=float, nargs="+")
    p.add_argument("--labeling", choices=("chebyshev", "initial"), default="chebyshev")
    p.add_argument("--format", choices=FORMATS, default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_resonance)

    p = sub.add_parser("figure", help="write the datasets behind a figure")
    p.add_argument("id", choices=("fig1", "fig2", "fig3"))
    p.add_argument("--out-dir", default="figures")
    p.add_argument("--samples", type=int, default=601)
    p.add_argument("--workers", type=int, default=4)
    p.set_defaults(func=cmd_figure)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, GridMismatchError, DomainError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG
    except (UnresolvedBranchError, IntegrationError, ArithmeticError) as exc:
        sys.stderr.write(f"solver error: {exc}\n")
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
