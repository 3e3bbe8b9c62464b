"""Command-line experiment runner.

Subcommands: ``solve``, ``sweep``, ``validate``, ``emap``. Exit status 0 on
success, 1 when a check fails, 2 for configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from fractions import Fraction

import numpy as np

from . import __version__
from .experiments import emap_point, reference_spectrum, shared_resolution, solve_cell
from .geometry import PROFILE_KINDS, DomainSpec, GeometryError, ProfileSpec, c_b
from .mesh import MeshError, MeshResolution, build_strip_mesh, required_nx, write_vtk
from .perturb import ConnectingMapError, limit_descriptor
from .steklov import solve_steklov

log = logging.getLogger("steklov_fem")

SWEEP_COLUMNS = ("alpha", "eps", "n", "mu_eps", "mu0", "c_b", "predicted", "ratio", "residual", "dofs", "ms")
SWEEP_SCHEMA_VERSION = 1
EXIT_OK, EXIT_CHECK, EXIT_CONFIG = 0, 1, 2


class ConfigError(ValueError):
    pass


def fmt(x) -> str:
    """17 significant digits (round-trip exact); blanks for None/nan."""
    if x is None or x == "":
        return ""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return ""
    return format(x, ".17g")


def parse_number(text: str) -> float:
    text = text.strip()
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"not a number: {text!r}") from exc


def parse_list(text: str) -> list[float]:
    return [parse_number(t) for t in text.replace(";", ",").split(",") if t.strip()]


def read_config(path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


@dataclass
class SweepConfig:
    profile: str = "triangle-wave"
    amplitude: float = 1.0
    alphas: list = field(default_factory=lambda: [2.0, 1.0, 0.5])
    eps_list: list = field(default_factory=lambda: [1 / 4, 1 / 8, 1 / 16, 1 / 32])
    n_modes: int = 2
    nx_per_period: int = 8
    rows: int = 64
    tol: float = 1e-9
    output: str = "-"
    seed: int = 0
    width: float = 1.0
    depth: float = 1.0
    record_timing: bool = False

    @classmethod
    def from_mapping(cls, values: dict) -> "SweepConfig":
        cfg = cls()
        known = {f.name: f for f in fields(cls)}
        for key, raw in values.items():
            if raw is None:
                continue
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
            current = getattr(cfg, key)
            if isinstance(raw, str):
                if isinstance(current, bool):
                    value = raw.strip().lower() in ("1", "true", "yes", "on")
                elif isinstance(current, list):
                    value = parse_list(raw)
                elif isinstance(current, int):
                    try:
                        value = int(raw)
                    except ValueError as exc:
                        raise ConfigError(f"{key} must be an integer") from exc
                elif isinstance(current, float):
                    value = parse_number(raw)
                else:
                    value = raw.strip()
            else:
                value = raw
            setattr(cfg, key, value)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.profile not in PROFILE_KINDS:
            raise ConfigError(f"profile must be one of {PROFILE_KINDS}")
        if self.n_modes < 1:
            raise ConfigError("n_modes must be >= 1")
        if not self.alphas or any(a <= 0 for a in self.alphas):
            raise ConfigError("alphas must be a nonempty list of positive numbers")
        if not self.eps_list or any(e <= 0 for e in self.eps_list):
            raise ConfigError("eps_list must be a nonempty list of positive numbers")
        for e in self.eps_list:
            p = self.width / e
            if abs(p - round(p)) > 1e-12 * p:
                raise ConfigError(f"w/eps must be an integer (eps={e})")
            if abs(math.log2(e) - round(math.log2(e))) > 1e-12:
                raise ConfigError(f"eps must be dyadic (eps={e})")
        if self.nx_per_period < 8 or self.rows < 1:
            raise ConfigError("nx_per_period must be >= 8 and rows >= 1")
        if self.tol <= 0:
            raise ConfigError("tol must be positive")

    @property
    def profile_spec(self) -> ProfileSpec:
        return ProfileSpec(self.profile, self.amplitude)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("STEKLOV_THREADS", "1")))
    except ValueError:
        return 1


def run_sweep(cfg: SweepConfig) -> list[dict]:
    """Mixed-problem eigenvalues over the (alpha, eps) grid plus the eps = 0 reference.

    Rows: reference first, then alpha outer, eps inner, mode index innermost
    (1-based). Failed cells produce a single row with ``mu_eps = error``.
    """
    profile = cfg.profile_spec
    cb = c_b(profile)
    try:
        base = DomainSpec(1.0, 0.0, profile, cfg.width, cfg.depth)
        for a in cfg.alphas:
            for e in cfg.eps_list:
                DomainSpec(a, e, profile, cfg.width, cfg.depth)
        res = shared_resolution(base, cfg.eps_list, cfg.nx_per_period, cfg.rows)
    except (GeometryError, MeshError) as exc:
        raise ConfigError(str(exc)) from exc
    ref = reference_spectrum(res, profile, cfg.n_modes, cfg.tol, cfg.width, cfg.depth, cfg.seed)
    mu0 = ref.lambdas
    ref_dofs = (res.nx - 1) * res.ny
    rows = []
    for n in range(cfg.n_modes):
        rows.append(dict(alpha=None, eps=0.0, n=n + 1, mu_eps=mu0[n], mu0=mu0[n], c_b=cb, predicted=mu0[n],
                         ratio=1.0, residual=ref.residuals[n], dofs=ref_dofs, ms=None))

    cells = [(a, e) for a in cfg.alphas for e in cfg.eps_list]

    def work(cell):
        a, e = cell
        try:
            return solve_cell(DomainSpec(a, e, profile, cfg.width, cfg.depth), res, cfg.n_modes, cfg.tol, cfg.seed)
        except Exception as exc:  # recorded as an error row
            return exc

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        results = list(pool.map(work, cells))

    for (a, e), result in zip(cells, results):
        if isinstance(result, Exception):
            log.error("cell alpha=%s eps=%s failed: %s", fmt(a), fmt(e), result)
            rows.append(dict(alpha=a, eps=e, n=None, mu_eps="error"))
            continue
        spec, dofs, ms = result
        lim = limit_descriptor(DomainSpec(a, 0.0, profile))
        for n in range(cfg.n_modes):
            pred = lim.predicted(mu0[n])
            rows.append(dict(
                alpha=a, eps=e, n=n + 1, mu_eps=spec.lambdas[n], mu0=mu0[n], c_b=cb, predicted=pred,
                ratio=spec.lambdas[n] / pred if lim.regime != "degeneration" else None,
                residual=spec.residuals[n], dofs=dofs, ms=round(ms) if cfg.record_timing else None,
            ))
    return rows


def degeneration_verdicts(cfg: SweepConfig, rows: list[dict]) -> list[str]:
    """For alpha < 1: is mu_eps strictly decreasing as eps decreases?"""
    out = []
    for a in cfg.alphas:
        if a >= 1:
            continue
        for n in range(1, cfg.n_modes + 1):
            series = sorted(
                ((r["eps"], r["mu_eps"]) for r in rows if r["alpha"] == a and r["n"] == n and r["mu_eps"] != "error"),
                reverse=True,
            )
            vals = [v for _, v in series]
            ok = all(b < a_ for a_, b in zip(vals, vals[1:]))
            out.append(f"alpha={fmt(a)} n={n}: mu_eps strictly decreasing as eps -> 0: {'yes' if ok else 'no'}")
    return out


def sweep_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for r in rows:
        writer.writerow([r[c] if isinstance(r.get(c), str) else fmt(r.get(c)) for c in SWEEP_COLUMNS])
    return buf.getvalue()


def _write(text: str, path) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def cmd_sweep(args) -> int:
    values = read_config(args.config) if args.config else {}
    overrides = {
        "profile": args.profile, "alphas": args.alphas, "eps_list": args.eps_list, "n_modes": args.n_modes,
        "nx_per_period": args.nx_per_period, "rows": args.rows, "tol": args.tol, "output": args.out,
        "seed": args.seed, "record_timing": "true" if args.timing else None,
    }
    values.update({k: v for k, v in overrides.items() if v is not None})
    cfg = SweepConfig.from_mapping(values)
    rows = run_sweep(cfg)
    _write(sweep_csv(rows), cfg.output)
    for line in degeneration_verdicts(cfg, rows):
        print(line, file=sys.stderr)
    if any(r.get("mu_eps") == "error" for r in rows):
        return EXIT_CHECK
    return EXIT_OK


def _profile(args) -> ProfileSpec:
    return ProfileSpec(args.profile, args.amplitude)


def cmd_solve(args) -> int:
    try:
        domain = DomainSpec(args.alpha, args.eps, _profile(args), args.width, args.depth)
        if domain.eps > 0:
            res = MeshResolution.per_period(domain, args.nx_per_period, args.rows)
            res = MeshResolution(required_nx(domain, res.nx), res.ny)
        else:
            res = MeshResolution(args.nx, args.rows)
        mesh = build_strip_mesh(domain, res)
    except (GeometryError, MeshError) as exc:
        raise ConfigError(str(exc)) from exc
    weight = args.weight if args.weight is not None else c_b(domain.profile)
    spec = solve_steklov(mesh, args.mode, args.n_modes, weight=weight, tol=args.tol)
    first = 0 if args.mode == "full" else 1
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("n", "lambda", "residual"))
    for k, (lam, r) in enumerate(zip(spec.lambdas, spec.residuals)):
        w.writerow((k + first, fmt(lam), fmt(r)))
    _write(buf.getvalue(), args.out)
    if args.export_mesh:
        write_vtk(mesh, args.export_mesh)
    return EXIT_OK


EMAP_COLUMNS = ("alpha", "eps", "nx", "ny", "norm_E", "norm_0", "norm_gamma", "target", "rel_gap", "jac_min", "jac_max")


def cmd_emap(args) -> int:
    eps_list = parse_list(args.eps_list)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(EMAP_COLUMNS)
    for e in eps_list:
        try:
            domain = DomainSpec(args.alpha, e, _profile(args))
        except GeometryError as exc:
            raise ConfigError(str(exc)) from exc
        try:
            rec = emap_point(domain, k_hat=args.k_hat)
        except ConnectingMapError as exc:
            log.warning("eps=%s skipped: %s", fmt(e), exc)
            continue
        w.writerow([fmt(getattr(rec, c)) for c in EMAP_COLUMNS])
    _write(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_validate(args) -> int:
    from .validation import run_validate

    report = run_validate(strict=args.strict, coarse_oracle=args.coarse_oracle)
    for check in report:
        print(check.line())
    if args.json:
        _write(json.dumps([c.as_dict() for c in report], indent=2) + "\n", args.json)
    return EXIT_OK if all(c.passed for c in report) else EXIT_CHECK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="steklov-fem", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def profile_args(sp):
        sp.add_argument("--profile", choices=PROFILE_KINDS, default="triangle-wave")
        sp.add_argument("--amplitude", type=float, default=1.0)

    s = sub.add_parser("solve", help="eigenvalues on a single domain")
    s.add_argument("--alpha", type=parse_number, default=1.0)
    s.add_argument("--eps", type=parse_number, default=0.0)
    s.add_argument("--mode", choices=("full", "mixed", "weighted"), default="mixed")
    profile_args(s)
    s.add_argument("--width", type=float, default=1.0)
    s.add_argument("--depth", type=float, default=1.0)
    s.add_argument("--nx-per-period", type=int, default=8)
    s.add_argument("--nx", type=int, default=64, help="columns when eps = 0")
    s.add_argument("--rows", type=int, default=64)
    s.add_argument("--n-modes", type=int, default=4)
    s.add_argument("--weight", type=float, default=None, help="Gamma weight for --mode weighted (default C_b)")
    s.add_argument("--tol", type=float, default=1e-9)
    s.add_argument("--out", default=None)
    s.add_argument("--export-mesh", default=None, metavar="PATH.vtk")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("sweep", help="trichotomy sweep over (alpha, eps)")
    s.add_argument("--config", default=None)
    s.add_argument("--profile", choices=PROFILE_KINDS, default=None)
    s.add_argument("--alphas", default=None)
    s.add_argument("--eps-list", default=None)
    s.add_argument("--n-modes", default=None)
    s.add_argument("--nx-per-period", default=None)
    s.add_argument("--rows", default=None)
    s.add_argument("--tol", default=None)
    s.add_argument("--seed", default=None)
    s.add_argument("--out", default=None)
    s.add_argument("--timing", action="store_true", help="fill the ms column (output no longer byte-reproducible)")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("validate", help="oracle and invariant checks")
    s.add_argument("--strict", action="store_true", help="also run the trichotomy and connecting-map studies")
    s.add_argument("--coarse-oracle", action="store_true", help=argparse.SUPPRESS)
    s.add_argument("--json", default=None, metavar="PATH")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("emap", help="connecting-map norm diagnostics")
    s.add_argument("--alpha", type=parse_number, default=2.0)
    s.add_argument("--eps-list", default="1/4,1/8,1/16,1/32")
    profile_args(s)
    s.add_argument("--k-hat", type=float, default=8.0)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_emap)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
