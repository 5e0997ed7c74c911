"""Command-line front end.

    liouville-kernel [--N 1] [--c 0.5+0.3i] ... {residual,kernel,tmatrix,shoot,spectrum,extend,gap,all}

Flags override values from ``--config`` (a JSON object with RunConfig field
names), which override the defaults.  Exit status: 0 when every check
passes, 1 when any fails, 2 on usage errors.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import re
import sys

from .report import COMMANDS, RunConfig, run_suite, to_csv, to_json

_COMPLEX_UNIT = re.compile(r"(^|[+-])[ij]")


def parse_complex(text: str) -> complex:
    """Parse 'a+bi', 'a', 'bi', 'a-bi' (also with j, e.g. '1e3+i')."""
    s = str(text).strip().replace(" ", "").replace("i", "j")
    s = _COMPLEX_UNIT.sub(lambda m: m.group(1) + "1j", s)
    try:
        return complex(s)
    except ValueError:
        raise ValueError(f"cannot parse complex number {text!r}") from None


def _float_list(text: str) -> tuple:
    return tuple(float(v) for v in text.split(",") if v.strip())


def build_parser() -> argparse.ArgumentParser:
    d = RunConfig()
    ap = argparse.ArgumentParser(
        prog="liouville-kernel",
        description="Numerical checks of the bounded kernel of the linearized singular Liouville operator.",
    )
    ap.add_argument("command", choices=COMMANDS, help="check suite to run")
    ap.add_argument("--config", help="JSON file with RunConfig fields")
    ap.add_argument("--N", type=int, help=f"vortex multiplicity (default {d.N})")
    ap.add_argument("--c", help="complex translation, e.g. 0.5+0.3i (default 0)")
    ap.add_argument("--rho", type=float, help=f"ring radius for the T-matrix checks (default {d.rho})")
    ap.add_argument("--rhos", help="comma-separated ring radii for the scaling fit (default 1e-1,3e-2,1e-2,3e-3)")
    ap.add_argument("--K", type=int, help=f"Fourier truncation on the ring (default {d.K})")
    ap.add_argument("--Kmax", type=int, help=f"largest radial mode to shoot (default {d.Kmax})")
    ap.add_argument("--R", type=float, help=f"truncation radius of the disk (default {d.R:g})")
    ap.add_argument("--nr", type=int, help=f"radial nodes of the disk grid (default {d.nr})")
    ap.add_argument("--M", type=int, help="angular mode cutoff (default max(8, 4(N+1)))")
    ap.add_argument("--n-theta", dest="n_theta", type=int, help=f"ring quadrature nodes (default {d.n_theta})")
    ap.add_argument("--tol", type=float, help=f"shooting tolerance (default {d.tol:g})")
    ap.add_argument("--seed", type=int, help=f"seed of the random spot checks (default {d.seed})")
    ap.add_argument("--out", help="output file (default stdout)")
    ap.add_argument("--format", choices=("json", "csv"), help="report format (default json)")
    ap.add_argument("-v", "--verbose", action="store_true", help="log one line per check to stderr")
    return ap


def _coerce(cfg: dict, ap: argparse.ArgumentParser) -> RunConfig:
    try:
        if "c" in cfg:
            cfg["c"] = parse_complex(cfg["c"])
        if isinstance(cfg.get("rhos"), str):
            cfg["rhos"] = _float_list(cfg["rhos"])
        elif "rhos" in cfg:
            cfg["rhos"] = tuple(float(v) for v in cfg["rhos"])
    except ValueError as exc:
        ap.error(str(exc))
    out = RunConfig(**cfg)
    checks = [
        (out.N >= 0, "--N must be non-negative"),
        (out.rho > 0, "--rho must be positive"),
        (len(out.rhos) >= 3 and all(r > 0 for r in out.rhos), "--rhos needs at least 3 positive radii"),
        (out.K >= 1, "--K must be positive"),
        (out.Kmax >= 0, "--Kmax must be non-negative"),
        (out.R > 0, "--R must be positive"),
        (out.nr > 0, "--nr must be positive"),
        (out.M is None or out.M > 0, "--M must be positive"),
        (0 < out.tol < 1, "--tol must lie in (0, 1)"),
        (out.format in ("json", "csv"), "--format must be json or csv"),
    ]
    for ok, msg in checks:
        if not ok:
            ap.error(msg)
    return out


def parse_config(argv=None) -> tuple[RunConfig, bool]:
    """Parse argv (and an optional config file) into a RunConfig.

    Usage errors exit with status 2.
    """
    ap = build_parser()
    args = ap.parse_intermixed_args(argv)
    fields = {f.name for f in dataclasses.fields(RunConfig)}
    cfg = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                loaded = json.load(fh)
        except (OSError, ValueError) as exc:
            ap.error(f"--config: {exc}")
        if not isinstance(loaded, dict):
            ap.error("--config: expected a JSON object")
        unknown = sorted(set(loaded) - fields)
        if unknown:
            ap.error(f"--config: unknown keys {', '.join(unknown)}")
        cfg.update(loaded)
    for name in fields - {"command"}:
        val = getattr(args, name, None)
        if val is not None:
            cfg[name] = val
    cfg["command"] = args.command
    return _coerce(cfg, ap), args.verbose


def main(argv=None) -> int:
    cfg, verbose = parse_config(argv)
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, format="%(message)s")
    report = run_suite(cfg)
    text = to_json(report) if cfg.format == "json" else to_csv(report)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if report.overall_pass else 1


if __name__ == "__main__":
    sys.exit(main())
