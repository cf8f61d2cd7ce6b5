"""Configuration-driven command line front end.

Subcommands: ``trajectory`` (CSV per variant from a JSON config),
``figures`` (CSV bundles for the stock figure presets) and ``verify``
(cross-solver deviation report).  Exit codes: 0 ok, 1 tolerance exceeded,
2 config error, 3 numeric error, 4 truncation error.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .driving import DrivingVariant, delta_g_bar, linear_ramp
from .errors import (
    AnsatzValidityError,
    ConfigError,
    DomainError,
    NumericError,
    TruncationError,
    UnphysicalStateError,
)
from .gaussian import ComplexMoments, Trajectory, evolve
from .oracle import (
    displaced_thermal_density_matrix,
    evolve_fock,
    evolve_mufti,
    mufti_from_moments,
)
from .params import ModelParams, bath_constants

__all__ = ["RunConfig", "main", "cmd_trajectory", "cmd_figures", "cmd_verify"]

SCHEMA_VERSION = 1
ENV_OUT_DIR = "DROSC_OUT_DIR"

EXIT_OK = 0
EXIT_TOLERANCE = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_TRUNCATION = 4

_CSV_COLUMNS = [
    "tau",
    "re_a",
    "im_a",
    "x",
    "p",
    "v_x",
    "v_p",
    "c_xp",
    "energy",
    "entropy",
    "c_energy",
    "c_ss",
    "f_gibbs",
    "f_ss",
]

_VARIANTS = {v.value: v for v in DrivingVariant}


# ---------------------------------------------------------------------------
# configuration


def _require_keys(section: dict, allowed: set, where: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(sorted(unknown))}")


def _get_number(section: dict, key: str, where: str, default=None):
    if key not in section:
        if default is None:
            raise ConfigError(f"missing required key '{key}' in {where}")
        return default
    v = section[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}.{key} must be a number, got {v!r}")
    return float(v)


@dataclass(frozen=True)
class OracleSettings:
    dim: int = 60
    step: Optional[float] = None
    tail_threshold: float = 1e-6
    tol_first: float = 1e-4
    tol_second: float = 1e-4
    tol_mufti: float = 1e-6
    tol_energy: float = 1e-3


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration (strict schema, unknown keys rejected)."""

    params: ModelParams
    variants: tuple
    grid_count: int
    a0: complex
    v_a0: complex
    delta_n0: float
    out_dir: str
    prefix: str
    oracle: OracleSettings

    @staticmethod
    def from_dict(doc: dict) -> "RunConfig":
        if not isinstance(doc, dict):
            raise ConfigError("config root must be an object")
        _require_keys(
            doc,
            {"params", "protocol", "variants", "grid", "initial_state", "output", "oracle"},
            "config",
        )
        for req in ("params", "variants", "grid", "initial_state"):
            if req not in doc:
                raise ConfigError(f"missing required section '{req}'")

        ps = doc["params"]
        _require_keys(ps, {"y", "w", "eta", "script_t", "delta_l"}, "params")
        try:
            params = ModelParams(
                y=_get_number(ps, "y", "params"),
                w=_get_number(ps, "w", "params"),
                eta=_get_number(ps, "eta", "params"),
                script_t=_get_number(ps, "script_t", "params"),
                delta_l=_get_number(ps, "delta_l", "params"),
            )
        except DomainError as exc:
            raise ConfigError(f"params: {exc}") from exc

        proto_doc = doc.get("protocol", {"kind": "linear_ramp"})
        _require_keys(proto_doc, {"kind"}, "protocol")
        if proto_doc.get("kind", "linear_ramp") != "linear_ramp":
            raise ConfigError(
                "protocol.kind must be 'linear_ramp' (generic protocols are "
                "library-level objects, not config entries)"
            )

        variants_doc = doc["variants"]
        if not isinstance(variants_doc, list) or not variants_doc:
            raise ConfigError("variants must be a nonempty list")
        variants = []
        for v in variants_doc:
            if v not in _VARIANTS:
                raise ConfigError(
                    f"unknown variant {v!r}; expected one of {sorted(_VARIANTS)}"
                )
            variants.append(_VARIANTS[v])

        grid_doc = doc["grid"]
        _require_keys(grid_doc, {"count", "spacing"}, "grid")
        count = grid_doc.get("count")
        if not isinstance(count, int) or isinstance(count, bool) or count < 2:
            raise ConfigError("grid.count must be an integer >= 2")
        if grid_doc.get("spacing", "uniform") != "uniform":
            raise ConfigError("grid.spacing must be 'uniform'")

        init_doc = doc["initial_state"]
        _require_keys(init_doc, {"a_re", "a_im", "v_a_re", "v_a_im", "delta_n0"}, "initial_state")
        a0 = complex(
            _get_number(init_doc, "a_re", "initial_state", 0.0),
            _get_number(init_doc, "a_im", "initial_state", 0.0),
        )
        v_a0 = complex(
            _get_number(init_doc, "v_a_re", "initial_state", 0.0),
            _get_number(init_doc, "v_a_im", "initial_state", 0.0),
        )
        delta_n0 = _get_number(init_doc, "delta_n0", "initial_state", 0.0)

        out_doc = doc.get("output", {})
        _require_keys(out_doc, {"dir", "prefix"}, "output")
        out_dir = out_doc.get("dir", "out")
        prefix = out_doc.get("prefix", "traj")
        if not isinstance(out_dir, str) or not isinstance(prefix, str):
            raise ConfigError("output.dir and output.prefix must be strings")

        oracle_doc = doc.get("oracle", {})
        _require_keys(
            oracle_doc,
            {"dim", "step", "tail_threshold", "tol_first", "tol_second", "tol_mufti", "tol_energy"},
            "oracle",
        )
        dim = oracle_doc.get("dim", 60)
        if not isinstance(dim, int) or isinstance(dim, bool) or dim < 2:
            raise ConfigError("oracle.dim must be an integer >= 2")
        oracle = OracleSettings(
            dim=dim,
            step=(_get_number(oracle_doc, "step", "oracle") if "step" in oracle_doc else None),
            tail_threshold=_get_number(oracle_doc, "tail_threshold", "oracle", 1e-6),
            tol_first=_get_number(oracle_doc, "tol_first", "oracle", 1e-4),
            tol_second=_get_number(oracle_doc, "tol_second", "oracle", 1e-4),
            tol_mufti=_get_number(oracle_doc, "tol_mufti", "oracle", 1e-6),
            tol_energy=_get_number(oracle_doc, "tol_energy", "oracle", 1e-3),
        )

        return RunConfig(
            params=params,
            variants=tuple(variants),
            grid_count=count,
            a0=a0,
            v_a0=v_a0,
            delta_n0=delta_n0,
            out_dir=out_dir,
            prefix=prefix,
            oracle=oracle,
        )

    def to_dict(self) -> dict:
        return {
            "params": {
                "y": self.params.y,
                "w": self.params.w,
                "eta": self.params.eta,
                "script_t": self.params.script_t,
                "delta_l": self.params.delta_l,
            },
            "protocol": {"kind": "linear_ramp"},
            "variants": [v.value for v in self.variants],
            "grid": {"count": self.grid_count, "spacing": "uniform"},
            "initial_state": {
                "a_re": self.a0.real,
                "a_im": self.a0.imag,
                "v_a_re": self.v_a0.real,
                "v_a_im": self.v_a0.imag,
                "delta_n0": self.delta_n0,
            },
            "output": {"dir": self.out_dir, "prefix": self.prefix},
            "oracle": {
                "dim": self.oracle.dim,
                **({"step": self.oracle.step} if self.oracle.step is not None else {}),
                "tail_threshold": self.oracle.tail_threshold,
                "tol_first": self.oracle.tol_first,
                "tol_second": self.oracle.tol_second,
                "tol_mufti": self.oracle.tol_mufti,
                "tol_energy": self.oracle.tol_energy,
            },
        }

    def initial_moments(self) -> ComplexMoments:
        c0 = bath_constants(self.params).n_th + self.delta_n0 - abs(self.a0) ** 2
        return ComplexMoments(a_mean=self.a0, v_a=self.v_a0, c_aadag=c0)

    def grid(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.grid_count)

    def resolved_out_dir(self) -> Path:
        return Path(os.environ.get(ENV_OUT_DIR, self.out_dir))


def load_config(path: str) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return RunConfig.from_dict(doc)


# ---------------------------------------------------------------------------
# deterministic file output


def _fmt(x: float) -> str:
    return f"{x:.17e}"


def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=path.suffix)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _trajectory_csv(traj: Trajectory) -> str:
    lines = [",".join(_CSV_COLUMNS)]
    for i in range(len(traj)):
        row = [
            traj.tau_grid[i],
            traj.a_mean[i].real,
            traj.a_mean[i].imag,
            traj.x_mean[i],
            traj.p_mean[i],
            traj.v_x[i],
            traj.v_p[i],
            traj.c_xp[i],
            traj.energy[i],
            traj.entropy[i],
            traj.coherence_energy_basis[i],
            traj.coherence_ss_basis[i],
            traj.fidelity_to_gibbs[i],
            traj.fidelity_to_ss[i],
        ]
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def _sidecar(config_dict: dict, extra: dict | None = None) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "library_version": __version__,
        "config": config_dict,
    }
    if extra:
        doc.update(extra)
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# commands


def cmd_trajectory(config: RunConfig) -> list[Path]:
    """Evolve each requested variant and write one CSV per variant."""
    out_dir = config.resolved_out_dir()
    grid = config.grid()
    init = config.initial_moments()
    proto = linear_ramp(config.params.delta_l)
    written = []
    for variant in config.variants:
        traj = evolve(init, config.params, proto, variant, grid)
        path = out_dir / f"{config.prefix}_{variant.value}.csv"
        _write_atomic(path, _trajectory_csv(traj))
        written.append(path)
    sidecar = out_dir / f"{config.prefix}_config.json"
    _write_atomic(
        sidecar,
        _sidecar(config.to_dict(), {"grid_points": config.grid_count, "spacing": "uniform"}),
    )
    written.append(sidecar)
    return written


_FIG2_INIT = {"a_re": 0.1, "a_im": 0.1, "v_a_re": 0.0, "v_a_im": 0.0, "delta_n0": 2.0}

FIGURE_PRESETS = {
    # caption parameter sets; fig1 needs no thermal or initial-state data
    "fig1": {
        "kind": "delta_g",
        "y": 0.1,
        "w": 4.0,
        "eta": 0.008,
        "delta_l": 10.0,
        "script_t_list": [10.0, 20.0, 200.0, 2000.0],
    },
    "fig2": {
        "kind": "trajectory",
        "y": 0.1,
        "w": 4.0,
        "eta": 0.008,
        "delta_l": 10.0,
        "script_t_list": [2000.0, 200.0, 20.0, 10.0],
        "variants": ["nonadiabatic", "adiabatic"],
        "init": _FIG2_INIT,
    },
    "fig3": {
        "kind": "trajectory",
        "y": 0.1,
        "w": 4.0,
        "eta": 0.008,
        "delta_l": 10.0,
        "script_t_list": [100.0, 20.0, 10.0, 5.0],
        "variants": ["nonadiabatic", "adiabatic"],
        "init": _FIG2_INIT,
    },
    "fig4": {
        "kind": "trajectory",
        "y": 0.1,
        "w": 4.0,
        "eta": 0.008,
        "delta_l": 10.0,
        "script_t_list": [20.0],
        "variants": ["nonadiabatic", "adiabatic"],
        "init": _FIG2_INIT,
    },
    "fig5": {
        "kind": "trajectory",
        "y": 0.1,
        "w": 4.0,
        "eta": 0.008,
        "delta_l": 10.0,
        "script_t_list": [2000.0, 200.0, 20.0, 10.0],
        "variants": ["nonadiabatic", "adiabatic"],
        "init": _FIG2_INIT,
    },
    "appD1": {
        "kind": "trajectory",
        "y": 0.1,
        "w": 4.0,
        "eta": 0.008,
        "delta_l": 10.0,
        "script_t_list": [2000.0, 200.0, 20.0, 10.0],
        "variants": ["nonadiabatic", "weakly_driven"],
        "init": _FIG2_INIT,
    },
    "appD2": {
        "kind": "trajectory",
        "y": 0.1,
        "w": 4.0,
        "eta": 0.008,
        "delta_l": 0.1,
        "script_t_list": [2000.0, 200.0, 20.0, 10.0],
        "variants": ["nonadiabatic", "weakly_driven"],
        "init": _FIG2_INIT,
    },
}

DEFAULT_FIGURE_GRID = 2000


def _script_t_tag(t: float) -> str:
    return f"T{t:g}"


def _figure_curve(preset, script_t, variant_name, grid_count):
    params = ModelParams(
        y=preset["y"],
        w=preset["w"],
        eta=preset["eta"],
        script_t=script_t,
        delta_l=preset["delta_l"],
    )
    proto = linear_ramp(params.delta_l)
    grid = np.linspace(0.0, 1.0, grid_count)
    if preset["kind"] == "delta_g":
        # columns in units of the system frequency: delta_g / omega = delta_g_bar / script_t
        rows = ["tau,dg_re_over_omega,dg_neg_im_over_omega"]
        for tau in grid:
            dg = delta_g_bar(tau, params, proto) / script_t
            rows.append(f"{_fmt(tau)},{_fmt(dg.real)},{_fmt(-dg.imag)}")
        return "\n".join(rows) + "\n"
    init_doc = preset["init"]
    a0 = complex(init_doc["a_re"], init_doc["a_im"])
    c0 = bath_constants(params).n_th + init_doc["delta_n0"] - abs(a0) ** 2
    init = ComplexMoments(
        a_mean=a0, v_a=complex(init_doc["v_a_re"], init_doc["v_a_im"]), c_aadag=c0
    )
    traj = evolve(init, params, proto, _VARIANTS[variant_name], grid)
    return _trajectory_csv(traj)


def cmd_figures(
    figure_id: str,
    out_dir: str,
    *,
    grid_count: int = DEFAULT_FIGURE_GRID,
    overrides: Optional[dict] = None,
    parallel: bool = True,
) -> list[Path]:
    """Emit the CSV bundle for one figure preset into <out_dir>/<figure_id>/."""
    if figure_id not in FIGURE_PRESETS:
        raise ConfigError(
            f"unknown figure id {figure_id!r}; expected one of {sorted(FIGURE_PRESETS)}"
        )
    preset = dict(FIGURE_PRESETS[figure_id])
    applied_overrides = {}
    if overrides:
        for key, val in overrides.items():
            if key not in {"y", "w", "eta", "delta_l"}:
                raise ConfigError(f"figure override not supported: {key}")
            preset[key] = float(val)
            applied_overrides[key] = float(val)

    base = Path(os.environ.get(ENV_OUT_DIR, out_dir)) / figure_id
    jobs = []
    if preset["kind"] == "delta_g":
        for t in preset["script_t_list"]:
            name = f"{figure_id}_{_script_t_tag(t)}.csv"
            jobs.append((name, t, None))
    else:
        for t in preset["script_t_list"]:
            for variant_name in preset["variants"]:
                name = f"{figure_id}_{_script_t_tag(t)}_{variant_name}.csv"
                jobs.append((name, t, variant_name))

    def run_job(job):
        name, t, variant_name = job
        return name, _figure_curve(preset, t, variant_name, grid_count)

    if parallel and len(jobs) > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=4) as pool:
            results = dict(pool.map(run_job, jobs))
    else:
        results = dict(run_job(j) for j in jobs)

    written = []
    for name, _, _ in jobs:  # fixed order for determinism
        path = base / name
        _write_atomic(path, results[name])
        written.append(path)

    manifest = {
        "figure": figure_id,
        "preset": preset,
        "grid_points": grid_count,
        "overrides": applied_overrides,
        "files": [p.name for p in written],
    }
    manifest_path = base / "manifest.json"
    _write_atomic(manifest_path, _sidecar(manifest))
    written.append(manifest_path)
    return written


def cmd_verify(config: RunConfig, *, report=print) -> int:
    """Run all three solvers and report maximum absolute deviations."""
    params = config.params
    proto = linear_ramp(params.delta_l)
    grid = config.grid()
    init = config.initial_moments()
    if abs(init.v_a) != 0.0:
        raise AnsatzValidityError(
            "verify requires V_a(0) = 0 (the product-ansatz oracle covers "
            "displaced thermal states only)"
        )
    o = config.oracle
    failures = []
    for variant in config.variants:
        traj = evolve(init, params, proto, variant, grid)
        fock_init = displaced_thermal_density_matrix(init.a_mean, init.c_aadag, o.dim)
        fock = evolve_fock(
            fock_init,
            params,
            proto,
            variant,
            grid,
            step=o.step,
            tail_threshold=o.tail_threshold,
        )
        mufti = evolve_mufti(
            mufti_from_moments(init.a_mean, init.c_aadag), params, proto, variant, grid,
            step=o.step,
        )

        def moment_devs(ref_traj, other_a, other_v, other_c):
            dx = np.max(np.abs(2 * ref_traj.a_mean.real - 2 * other_a.real))
            dp = np.max(np.abs(2 * ref_traj.a_mean.imag - 2 * other_a.imag))
            dvx = np.max(np.abs(ref_traj.v_x - (2 * other_c + 1 + 2 * other_v.real)))
            dvp = np.max(np.abs(ref_traj.v_p - (2 * other_c + 1 - 2 * other_v.real)))
            dcxp = np.max(np.abs(ref_traj.c_xp - 2 * other_v.imag))
            return dx, dp, dvx, dvp, dcxp

        fx, fp, fvx, fvp, fcxp = moment_devs(traj, fock.a_mean, fock.v_a, fock.c_aadag)
        mx, mp_, mvx, mvp, mcxp = moment_devs(traj, mufti.a_mean, mufti.v_a, mufti.c_aadag)
        lam = params.delta_l * grid
        e_fock = (
            fock.c_aadag
            + np.abs(fock.a_mean) ** 2
            + 0.5
            - lam * fock.a_mean.real
            + 0.25 * lam**2
        )
        fe = np.max(np.abs(traj.energy - e_fock))
        report(f"[{variant.value}] fock:  max |dx|={fx:.3e} |dp|={fp:.3e} "
               f"|dVx|={fvx:.3e} |dVp|={fvp:.3e} |dCxp|={fcxp:.3e} |dE|={fe:.3e} "
               f"(dim={fock.dim}, trace drift {fock.max_trace_drift:.1e}, "
               f"min eig {fock.min_eigenvalue:.1e})")
        report(f"[{variant.value}] mufti: max |dx|={mx:.3e} |dp|={mp_:.3e} "
               f"|dVx|={mvx:.3e} |dVp|={mvp:.3e} |dCxp|={mcxp:.3e}")
        for name, val, tol in [
            ("fock x", fx, o.tol_first),
            ("fock p", fp, o.tol_first),
            ("fock V_x", fvx, o.tol_second),
            ("fock V_p", fvp, o.tol_second),
            ("fock C_xp", fcxp, o.tol_second),
            ("fock energy", fe, o.tol_energy),
            ("mufti x", mx, o.tol_mufti),
            ("mufti p", mp_, o.tol_mufti),
            ("mufti V_x", mvx, o.tol_mufti),
            ("mufti V_p", mvp, o.tol_mufti),
            ("mufti C_xp", mcxp, o.tol_mufti),
        ]:
            if val > tol:
                failures.append(f"{variant.value}: {name} deviation {val:.3e} > {tol:.1e}")
    if failures:
        for f in failures:
            report(f"TOLERANCE EXCEEDED: {f}")
        return EXIT_TOLERANCE
    report("all deviations within tolerance")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing and dispatch


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="drosc",
        description="Driven damped oscillator: trajectories, figure data, cross-solver verification",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p_traj = sub.add_parser("trajectory", help="run trajectories from a JSON config")
    p_traj.add_argument("--config", required=True, help="path to JSON run config")

    p_fig = sub.add_parser("figures", help="emit CSV bundle for a figure preset")
    p_fig.add_argument("figure_id", choices=sorted(FIGURE_PRESETS), metavar="figure_id",
                       help=f"one of {sorted(FIGURE_PRESETS)}")
    p_fig.add_argument("--out", required=True, help="output directory")
    p_fig.add_argument("--grid-count", type=int, default=DEFAULT_FIGURE_GRID)
    p_fig.add_argument("--config", default=None,
                       help="optional JSON config whose params override the preset")
    p_fig.add_argument("--serial", action="store_true", help="disable per-curve parallelism")

    p_ver = sub.add_parser("verify", help="cross-solver verification report")
    p_ver.add_argument("--config", required=True, help="path to JSON run config")
    return ap


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "trajectory":
            config = load_config(args.config)
            written = cmd_trajectory(config)
            for p in written:
                print(p)
            return EXIT_OK
        if args.command == "figures":
            overrides = None
            if args.config is not None:
                cfg = load_config(args.config)
                overrides = {
                    "y": cfg.params.y,
                    "w": cfg.params.w,
                    "eta": cfg.params.eta,
                    "delta_l": cfg.params.delta_l,
                }
            written = cmd_figures(
                args.figure_id,
                args.out,
                grid_count=args.grid_count,
                overrides=overrides,
                parallel=not args.serial,
            )
            for p in written:
                print(p)
            return EXIT_OK
        if args.command == "verify":
            config = load_config(args.config)
            return cmd_verify(config)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TruncationError as exc:
        print(f"truncation error: {exc}", file=sys.stderr)
        return EXIT_TRUNCATION
    except (NumericError, UnphysicalStateError, AnsatzValidityError, DomainError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
