"""Command-line entry point: ``deformed-llg simulate-q|simulate-alpha|verify|special``.

Exit codes: 0 success, 1 a verification check failed, 2 configuration or I/O
error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import io
import json
import sys
from dataclasses import replace

import numpy as np

from . import __version__
from .config import Method, Mode, RunConfig, SpecialConfig, config_from_dict, config_to_dict, load_object
from .errors import ConfigError, NumericalError
from .llg import LambdaMode, atomic_write, closed_form_alpha, closed_form_q, integrate_q_llg, trajectory_csv
from .plot import emit_plot
from .specfun import DeformationQ, MLParams, gamma_fn, ml, q_exp
from .verification import build_report, run_all

EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3

_EPS = float(np.finfo(float).eps)
# absolute accuracy requested from Mittag-Leffler evaluations in special mode
SPECIAL_ML_MAX_ERROR = 1e-14

COMMANDS = {
    "simulate-q": Mode.SIMULATE_Q,
    "simulate-alpha": Mode.SIMULATE_ALPHA,
    "verify": Mode.VERIFY,
    "special": Mode.SPECIAL,
}

EPILOG = """\
configuration (flat JSON object; "mode" may be omitted, the subcommand sets it):
  simulate_q      q (required), lambda_mode [eigenvalue_matched|explicit_real],
                  lambda (explicit_real only, default 1), gamma_h0, theta0,
                  amplitude (default 1), t_max, n_steps (default 10000), mz0,
                  method [closed_form|rk4], plot
  simulate_alpha  alpha (required, 0 < alpha <= 1.2), omega0, theta0,
                  amplitude, t_max, n_steps, mz0, plot
  special         function [q_exp|q_cos|q_sin|ml|gamma], q, alpha, beta,
                  x_min (-5), x_max (5), n_points (101), imaginary (false)
  every mode      output, report

units: without gamma_h0 / omega0 the precession rate is 2*pi, so time is in
periods; t_max defaults to 20 periods in either case.

exit codes: 0 ok, 1 check failed, 2 config or I/O error, 3 numerical error
"""


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        atomic_write(path, text)


def _write_json(path: str | None, obj: dict) -> None:
    _write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _simulate_q(cfg: RunConfig) -> int:
    sim = cfg.sim_q
    if sim.lambda_mode is LambdaMode.EIGENVALUE_MATCHED and cfg.method is Method.CLOSED_FORM:
        traj = closed_form_q(sim)
    else:
        traj = integrate_q_llg(sim)
    _write_text(cfg.output, trajectory_csv(traj))
    if cfg.plot:
        emit_plot(traj, cfg.plot)
    if cfg.report:
        _write_json(cfg.report, {"config": config_to_dict(cfg), "summary": traj.summary(), "tool_version": __version__})
    return EXIT_OK


def _simulate_alpha(cfg: RunConfig) -> int:
    traj = closed_form_alpha(cfg.sim_alpha)
    _write_text(cfg.output, trajectory_csv(traj))
    if cfg.plot:
        emit_plot(traj, cfg.plot)
    if cfg.report:
        _write_json(cfg.report, {"config": config_to_dict(cfg), "summary": traj.summary(), "tool_version": __version__})
    return EXIT_OK


def _verify(cfg: RunConfig) -> int:
    checks = run_all()
    for c in checks:
        print(c.line(), file=sys.stderr)
    report = build_report(checks, __version__)
    _write_json(cfg.report or cfg.output, report)
    return EXIT_OK if report["overall"] == "pass" else EXIT_CHECK_FAILED


def evaluate_special(sp: SpecialConfig) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Values and absolute accuracy estimates of the requested function on the grid."""
    x = np.linspace(sp.x_min, sp.x_max, sp.n_points)
    z = 1j * x if sp.imaginary else x
    if sp.function == "ml":
        r = ml(MLParams(sp.alpha, sp.beta), z, max_error=SPECIAL_ML_MAX_ERROR)
        return x, np.asarray(r.value, dtype=complex).reshape(x.shape), np.asarray(r.error, dtype=float).reshape(x.shape)
    if sp.function == "gamma":
        if sp.imaginary:
            raise ConfigError("gamma is only available on the real axis")
        v = np.array([gamma_fn(t) for t in x], dtype=complex)
        return x, v, 4 * _EPS * np.abs(v) * np.maximum(1.0, np.abs(x))
    d = DeformationQ(sp.q)
    if sp.function == "q_exp":
        v = np.asarray(q_exp(d, z), dtype=complex).reshape(x.shape)
    else:
        if sp.imaginary:
            raise ConfigError(f"{sp.function} takes a real argument")
        w = np.asarray(q_exp(d, 1j * x), dtype=complex).reshape(x.shape)
        v = (w.real if sp.function == "q_cos" else w.imag).astype(complex)
        v_mod = np.abs(w)
        # the relative rounding error of e_q grows with |log e_q|
        return x, v, 4 * _EPS * v_mod * np.maximum(1.0, np.abs(np.log(v_mod)) + np.abs(np.angle(w)))
    return x, v, 4 * _EPS * np.abs(v) * np.maximum(1.0, np.abs(np.log(np.abs(v))))


def special_csv(x, v, acc) -> str:
    buf = io.StringIO()
    buf.write("x,re,im,accuracy_estimate\n")
    for row in zip(x + 0.0, v.real + 0.0, v.imag + 0.0, acc):
        buf.write(",".join(f"{float(c):.17g}" for c in row) + "\n")
    return buf.getvalue()


def _special(cfg: RunConfig) -> int:
    _write_text(cfg.output, special_csv(*evaluate_special(cfg.special)))
    return EXIT_OK


_RUNNERS = {
    Mode.SIMULATE_Q: _simulate_q,
    Mode.SIMULATE_ALPHA: _simulate_alpha,
    Mode.VERIFY: _verify,
    Mode.SPECIAL: _special,
}


def run(cfg: RunConfig) -> int:
    """Execute a validated configuration and map failures onto exit codes."""
    try:
        return _RUNNERS[cfg.mode](cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="deformed-llg",
        description="Deformed special functions and deformed LLG precession.",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
        p.add_argument("--config", help="JSON configuration file" + (" (optional)" if name == "verify" else ""))
        p.add_argument("--output", help="output file (default: standard output)")
        p.add_argument("--report", help="JSON report file")
    return parser


def load_config(command: str, path: str | None, output: str | None, report: str | None) -> RunConfig:
    """Read the config file for ``command``; ``--output``/``--report`` override the file."""
    mode = COMMANDS[command]
    if path is None:
        if mode is not Mode.VERIFY:
            raise ConfigError(f"{command} needs --config")
        obj: dict = {}
    else:
        try:
            with open(path, encoding="utf-8") as fh:
                obj = load_object(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
    obj.setdefault("mode", mode.value)
    if obj["mode"] != mode.value:
        raise ConfigError(f"config mode {obj['mode']!r} does not match the {command} command")
    cfg = config_from_dict(obj)
    overrides = {k: v for k, v in (("output", output), ("report", report)) if v is not None}
    return replace(cfg, **overrides) if overrides else cfg


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.command, args.config, args.output, args.report)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
