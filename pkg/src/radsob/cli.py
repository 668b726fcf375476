"""Command-line front end.

Subcommands:
    constants   sharp constant and normalisation for (m, p), with the
                scale-invariance spread as a self-check
    model       build a warped model from a curvature spec and verify the
                area/volume comparison chains
    verify      Sobolev-side invariants of the scale family on a model
                (mass and energy lower bounds, decay of the flux averages)
    rigidity    full constant pipeline and two-sided volume verdict
    limits      head/tail mass split at a fixed radius across scales

Reports are deterministic: fixed row order, floats at 12 significant
digits, no timestamps.  Exit codes: 0 all checks pass, 1 a mathematical
check failed, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field

from .model_manifold import ModelManifold, build_model, parse_curvature, verify_volume_chain
from .numerics import DEFAULT_QUADRATURE, OdeError, QuadratureError
from .rigidity import (
    estimated_c_m,
    mass_escape_experiment,
    verify_theorem,
)
from .sobolev import (
    DivergentTailError,
    SobolevUnsupportedError,
    TailBoundError,
    gradient_energy,
    mass_pstar,
    talenti_function,
    verify_decay_conditions,
)
from .talenti import SobolevParams, TalentiProfile, sharp_constant, sharp_constant_detail
from .talenti import sphere_area, unit_ball_volume


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def _round12(x: float) -> float:
    if not math.isfinite(x):
        return x
    return float(f"{x:.12g}")


def _json_ready(obj):
    if isinstance(obj, float):
        return _round12(obj)
    if isinstance(obj, dict):
        return {k: _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    return obj


DEFAULT_LAMBDAS = (1.0,)


@dataclass(frozen=True)
class RunConfig:
    command: str
    m: int = 4
    p: float = 2.0
    lambda_list: tuple = DEFAULT_LAMBDAS
    g_spec: str = "zero"
    t_max: float = 50.0
    step: float = 1e-3
    tol: float = 1e-8
    c_m: str = "estimate"
    gamma: str = "empirical"
    T: float = 1.0
    output: str = "csv"
    out_path: str | None = None

    def to_argv(self) -> list:
        argv = [
            self.command,
            "--m", str(self.m),
            "--p", _fmt(float(self.p)),
            "--lambda", ",".join(_fmt(float(x)) for x in self.lambda_list),
            "--g", self.g_spec,
            "--t-max", _fmt(float(self.t_max)),
            "--step", _fmt(float(self.step)),
            "--tol", _fmt(float(self.tol)),
            "--c-m", self.c_m,
            "--gamma", self.gamma,
            "--T", _fmt(float(self.T)),
            "--output", self.output,
        ]
        if self.out_path is not None:
            argv += ["--out", self.out_path]
        return argv


def _parse_lambda_list(text: str) -> tuple:
    try:
        values = tuple(float(part) for part in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad --lambda list {text!r}: {exc}") from None
    if not values:
        raise argparse.ArgumentTypeError("--lambda list must be non-empty")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="radsob",
        description="Sharp Sobolev constants and volume comparison on radial models",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("constants", "model", "verify", "rigidity", "limits"):
        cmd = sub.add_parser(name)
        cmd.add_argument("--m", type=int, default=4)
        cmd.add_argument("--p", type=float, default=2.0)
        cmd.add_argument("--lambda", dest="lambda_list", type=_parse_lambda_list,
                         default=DEFAULT_LAMBDAS)
        cmd.add_argument("--g", dest="g_spec", default="zero")
        cmd.add_argument("--t-max", dest="t_max", type=float, default=50.0)
        cmd.add_argument("--step", type=float, default=1e-3)
        cmd.add_argument("--tol", type=float, default=1e-8)
        cmd.add_argument("--c-m", dest="c_m", default="estimate")
        cmd.add_argument("--gamma", default="empirical")
        cmd.add_argument("--T", type=float, default=1.0)
        cmd.add_argument("--output", choices=("csv", "json"), default="csv")
        cmd.add_argument("--out", dest="out_path", default=None)
    return parser


def parse_argv(argv) -> RunConfig:
    ns = build_parser().parse_args(argv)
    return RunConfig(
        command=ns.command,
        m=ns.m,
        p=ns.p,
        lambda_list=tuple(ns.lambda_list),
        g_spec=ns.g_spec,
        t_max=ns.t_max,
        step=ns.step,
        tol=ns.tol,
        c_m=ns.c_m,
        gamma=ns.gamma,
        T=ns.T,
        output=ns.output,
        out_path=ns.out_path,
    )


def _config_header(cfg: RunConfig) -> list:
    return [
        f"# command={cfg.command} m={cfg.m} p={_fmt(float(cfg.p))} g={cfg.g_spec}",
        f"# t_max={_fmt(float(cfg.t_max))} step={_fmt(float(cfg.step))} "
        f"tol={_fmt(float(cfg.tol))} lambda={','.join(_fmt(float(x)) for x in cfg.lambda_list)}",
    ]


def _emit(cfg: RunConfig, lines_or_obj) -> None:
    if cfg.output == "json":
        text = json.dumps(_json_ready(lines_or_obj), indent=2) + "\n"
    else:
        text = "\n".join(lines_or_obj) + "\n"
    if cfg.out_path is not None:
        with open(cfg.out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _check_rows_csv(cfg: RunConfig, rows) -> list:
    lines = _config_header(cfg)
    lines.append("check_name,t,lhs,rhs,slack,pass")
    for name, t, lhs, rhs, slack, ok in rows:
        lines.append(",".join([name, _fmt(float(t)), _fmt(float(lhs)),
                               _fmt(float(rhs)), _fmt(float(slack)), _fmt(ok)]))
    return lines


def _check_rows_json(cfg: RunConfig, rows) -> dict:
    return {
        "command": cfg.command,
        "params": {"m": cfg.m, "p": cfg.p},
        "g": cfg.g_spec,
        "checks": [
            {"check_name": name, "t": t, "lhs": lhs, "rhs": rhs, "slack": slack, "pass": ok}
            for name, t, lhs, rhs, slack, ok in rows
        ],
    }


def _build_from_cfg(cfg: RunConfig) -> ModelManifold:
    profile = parse_curvature(cfg.g_spec)
    return build_model(cfg.m, profile, t_max=cfg.t_max, step=cfg.step)


def cmd_constants(cfg: RunConfig) -> int:
    params = SobolevParams(cfg.m, cfg.p)
    lambdas = tuple(sorted(set((1.0, 0.5, 5.0, 20.0)) | set(cfg.lambda_list)))
    detail = sharp_constant_detail(params, DEFAULT_QUADRATURE, lambdas=lambdas)
    rows = [
        ("beta", detail["beta"]),
        ("K", detail["K"]),
        ("spread", detail["spread"]),
        ("omega_m", unit_ball_volume(cfg.m)),
        ("omega_sphere", sphere_area(cfg.m)),
    ]
    rows += [(f"K_at_lambda_{_fmt(lam)}", k) for lam, k in sorted(detail["values"].items())]
    ok = detail["spread"] <= cfg.tol
    if cfg.output == "json":
        payload = {
            "command": "constants",
            "params": {"m": cfg.m, "p": cfg.p, "p_star": params.p_star},
            **{name: value for name, value in rows},
            "pass": ok,
        }
        _emit(cfg, payload)
    else:
        lines = _config_header(cfg) + ["name,value"]
        lines += [f"{name},{_fmt(value)}" for name, value in rows]
        lines.append(f"pass,{_fmt(ok)}")
        _emit(cfg, lines)
    return 0 if ok else 1


def _chain_grid(t_max: float) -> list:
    return [t_max * f for f in (0.01, 0.02, 0.05, 0.1, 0.2, 0.4, 0.8)]


def cmd_model(cfg: RunConfig) -> int:
    model = _build_from_cfg(cfg)
    report = verify_volume_chain(model, _chain_grid(cfg.t_max), slack=cfg.tol)
    rows = [(c.name, c.t, c.lhs, c.rhs, cfg.tol, c.passed) for c in report.rows]
    if cfg.output == "json":
        payload = _check_rows_json(cfg, rows)
        payload["b"] = report.b_used
        payload["pass"] = report.all_pass
        _emit(cfg, payload)
    else:
        lines = _check_rows_csv(cfg, rows)
        lines.insert(2, f"# b={_fmt(float(report.b_used))}")
        lines.append(f"# pass={_fmt(report.all_pass)}")
        _emit(cfg, lines)
    return 0 if report.all_pass else 1


def cmd_verify(cfg: RunConfig) -> int:
    params = SobolevParams(cfg.m, cfg.p)
    model = _build_from_cfg(cfg)
    k = sharp_constant(params)
    k_pow = k ** (-params.p)
    rows = []
    for lam in cfg.lambda_list:
        profile = TalentiProfile.build(params, lam, DEFAULT_QUADRATURE)
        u = talenti_function(profile)
        mass = float(mass_pstar(u, model))
        energy = float(gradient_energy(u, model))
        rows.append(("mass_lower", lam, 1.0, mass,
                     cfg.tol, bool(1.0 <= mass * (1.0 + cfg.tol) + cfg.tol)))
        rows.append(("energy_lower", lam, k_pow, energy,
                     cfg.tol, bool(k_pow <= energy * (1.0 + cfg.tol))))
        r_grid = [r for r in (2.0, 5.0, 10.0, 20.0, 40.0) if r <= 0.9 * cfg.t_max]
        decay = verify_decay_conditions(u, model, r_grid=r_grid)
        s_first = float(decay.flux_rows[0][1])
        s_last = float(decay.flux_rows[-1][1])
        rows.append(("flux_decreasing", lam, s_last, s_first, cfg.tol,
                     bool(decay.flux_decreasing and decay.l1_finite)))
    all_pass = all(r[5] for r in rows)
    if cfg.output == "json":
        payload = _check_rows_json(cfg, rows)
        payload["K"] = k
        payload["pass"] = all_pass
        _emit(cfg, payload)
    else:
        lines = _check_rows_csv(cfg, rows)
        lines.append(f"# pass={_fmt(all_pass)}")
        _emit(cfg, lines)
    return 0 if all_pass else 1


def _rigidity_grid(t_max: float) -> list:
    grid = {t_max * k / 20.0 for k in range(1, 21)}
    grid |= {t for t in (0.5, 1.0, 2.0, 5.0) if t < t_max}
    return sorted(grid)


def cmd_rigidity(cfg: RunConfig) -> int:
    params = SobolevParams(cfg.m, cfg.p)
    model = _build_from_cfg(cfg)
    k = sharp_constant(params)
    if cfg.c_m == "estimate":
        c_m_value, _ = estimated_c_m(model, params)
        c_m_source = "estimate"
    else:
        c_m_value = float(cfg.c_m)
        c_m_source = "user"
    gamma_value = None if cfg.gamma == "empirical" else float(cfg.gamma)
    b = model.profile.b if model.profile is not None else None
    mode = "flat" if b == 0.0 else "curved"
    report = verify_theorem(
        model,
        params,
        c_m_value,
        k,
        mode,
        _rigidity_grid(cfg.t_max),
        gamma_value=gamma_value,
        c_m_source=c_m_source,
        ratio_slack=cfg.tol,
    )
    if cfg.output == "json":
        _emit(cfg, report.to_json_dict())
    else:
        _emit(cfg, _config_header(cfg) + report.to_csv_lines())
    return 0 if report.verdict == "consistent" else 1


def cmd_limits(cfg: RunConfig) -> int:
    params = SobolevParams(cfg.m, cfg.p)
    report = mass_escape_experiment(params, cfg.T, cfg.lambda_list)
    if cfg.output == "json":
        payload = {
            "command": "limits",
            "params": {"m": cfg.m, "p": cfg.p},
            "T": cfg.T,
            "threshold": report.threshold,
            "crossing": report.crossing,
            "rows": [
                {"lambda": lam, "head": head, "tail": tail, "sum": total}
                for lam, head, tail, total in report.rows
            ],
            "pass": report.all_pass,
        }
        _emit(cfg, payload)
    else:
        lines = _config_header(cfg)
        lines.append(f"# T={_fmt(float(cfg.T))} threshold={_fmt(report.threshold)}")
        crossing = "none" if report.crossing is None else _fmt(report.crossing)
        lines.append(f"# crossing={crossing}")
        lines.append("lambda,head,tail,sum")
        for lam, head, tail, total in report.rows:
            lines.append(",".join([_fmt(lam), _fmt(head), _fmt(tail), _fmt(total)]))
        lines.append(f"# pass={_fmt(report.all_pass)}")
        _emit(cfg, lines)
    return 0 if report.all_pass else 1


_DISPATCH = {
    "constants": cmd_constants,
    "model": cmd_model,
    "verify": cmd_verify,
    "rigidity": cmd_rigidity,
    "limits": cmd_limits,
}


def main(argv=None) -> int:
    try:
        cfg = parse_argv(argv if argv is not None else sys.argv[1:])
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _DISPATCH[cfg.command](cfg)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (QuadratureError, OdeError, TailBoundError, DivergentTailError,
            SobolevUnsupportedError) as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
