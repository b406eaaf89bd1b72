"""Command-line front end: solve / verify / converge on flat text configs.

Config format: `key = value` lines with dotted section prefixes, e.g.

    problem.lambda_re = 2.0
    problem.alpha = 3
    phi.preset = sech
    grid.nx = 1024

Outputs are deterministic: identical configs produce byte-identical files.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .fractional import frac_derivative, frac_fourier_path, frac_integral
from .grids import SolutionField, SpatialGrid, TimeGrid, TimeSignal
from .operators import (
    boundary_forcing_freq,
    boundary_forcing_time,
    derivative_jump,
    free_group,
)
from .solver import (
    BlowupSuspected,
    CompatibilityError,
    ProblemSpec,
    SolverConfig,
    SupercriticalError,
    criticality,
    solve_ibvp,
)
from .spectral import extend_half_line, sobolev_norm, smooth_ramp
from .verification import FDConfig, compare_fields, convergence_study, crank_nicolson

_DEFAULTS = {
    "problem.lambda_re": 0.0,
    "problem.lambda_im": 0.0,
    "problem.alpha": 3.0,
    "problem.s": 0.0,
    "problem.T": 1.0,
    "phi.preset": "zero",
    "phi.center": 6.0,
    "phi.width": 1.0,
    "phi.amplitude": 1.0,
    "phi.file": "",
    "f.preset": "zero",
    "f.amplitude": 1.0,
    "f.omega": 6.283185307179586,
    "f.file": "",
    "grid.x_min": -40.0,
    "grid.x_max": 40.0,
    "grid.nx": 1024,
    "grid.nt": 1024,
    "solver.tol": 1e-8,
    "solver.max_iter": 25,
    "solver.ratio_cap": 0.9,
    "solver.delta_crit": 0.1,
    "solver.max_halvings": 8,
    "output.directory": "out",
    "output.formats": "csv,json",
}


class ConfigError(ValueError):
    pass


def parse_config(path):
    """Flat key=value config with dotted sections; '#' starts a comment."""
    cfg = dict(_DEFAULTS)
    seen = set()
    try:
        text = open(path, "r", encoding="utf-8").read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in _DEFAULTS:
            raise ConfigError(f"line {lineno}: unknown key '{key}'")
        default = _DEFAULTS[key]
        try:
            if isinstance(default, float):
                cfg[key] = float(val)
            elif isinstance(default, int):
                cfg[key] = int(val)
            else:
                cfg[key] = val
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}") from exc
        seen.add(key)
    return cfg


def _phi_preset(cfg, x):
    kind = cfg["phi.preset"]
    A = cfg["phi.amplitude"]
    c = cfg["phi.center"]
    w = cfg["phi.width"]
    if kind == "gaussian":
        return lambda xx: A * np.exp(-(((np.asarray(xx) - c) / w) ** 2)) + 0j
    if kind == "sech":
        return lambda xx: A / np.cosh(np.asarray(xx) - c) + 0j
    if kind == "zero":
        return lambda xx: np.zeros_like(np.asarray(xx), dtype=complex)
    if kind == "file":
        data = np.loadtxt(cfg["phi.file"], delimiter=",", ndmin=2)
        if data.shape[0] != len(x):
            raise ConfigError(
                f"phi.file has {data.shape[0]} rows, grid needs {len(x)}"
            )
        vals = data[:, 1] + 1j * data[:, 2]
        return lambda xx: np.interp(xx, data[:, 0], vals.real) + 1j * np.interp(
            xx, data[:, 0], vals.imag
        )
    raise ConfigError(f"unknown phi.preset '{kind}'")


def _f_preset(cfg, T, m):
    kind = cfg["f.preset"]
    A = cfg["f.amplitude"]
    if kind == "bump":
        return lambda tt: (
            16.0 * A * np.asarray(tt) ** 2 * np.maximum(T - np.asarray(tt), 0.0) ** 2
            / T**4
            + 0j
        )
    if kind == "sinusoid_windowed":
        om = cfg["f.omega"]
        return lambda tt: (
            A
            * np.sin(om * np.asarray(tt))
            * smooth_ramp(4.0 * np.asarray(tt) / T)
            + 0j
        )
    if kind == "zero":
        return lambda tt: np.zeros_like(np.asarray(tt), dtype=complex)
    if kind == "file":
        data = np.loadtxt(cfg["f.file"], delimiter=",", ndmin=2)
        if data.shape[0] != m + 1:
            raise ConfigError(f"f.file has {data.shape[0]} rows, grid needs {m + 1}")
        vals = data[:, 1] + 1j * data[:, 2]
        return lambda tt: np.interp(tt, data[:, 0], vals.real) + 1j * np.interp(
            tt, data[:, 0], vals.imag
        )
    raise ConfigError(f"unknown f.preset '{kind}'")


def build_problem(cfg):
    """(ProblemSpec, SolverConfig) from a parsed config dict."""
    try:
        sgrid = SpatialGrid(cfg["grid.x_min"], cfg["grid.x_max"], cfg["grid.nx"])
        tgrid = TimeGrid(cfg["problem.T"], cfg["grid.nt"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    x = sgrid.nodes
    xpos = x[x >= 0.0]
    phi_fn = _phi_preset(cfg, xpos)
    f_fn = _f_preset(cfg, cfg["problem.T"], cfg["grid.nt"])
    try:
        spec = ProblemSpec(
            lam=complex(cfg["problem.lambda_re"], cfg["problem.lambda_im"]),
            alpha=cfg["problem.alpha"],
            s=cfg["problem.s"],
            phi=phi_fn(xpos),
            f=TimeSignal(tgrid, f_fn(tgrid.nodes)),
            T=cfg["problem.T"],
            phi_x=xpos,
            phi_fn=phi_fn,
            f_fn=f_fn,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    scfg = SolverConfig(
        sgrid=sgrid,
        tol=cfg["solver.tol"],
        max_iter=cfg["solver.max_iter"],
        ratio_cap=cfg["solver.ratio_cap"],
        delta_crit=cfg["solver.delta_crit"],
        max_halvings=cfg["solver.max_halvings"],
    )
    return spec, scfg


def write_signal(path, t, values):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("t,re,im\n")
        for ti, v in zip(t, values):
            fh.write(f"{ti:.17g},{v.real:.17g},{v.imag:.17g}\n")


def read_signal(path):
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1] + 1j * data[:, 2]


def write_field(path, field: SolutionField):
    x = np.asarray(field.sgrid.nodes)
    t = field.tgrid.nodes
    kind = "whole" if isinstance(field.sgrid, SpatialGrid) else "half"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(
            f"# kind={kind} x_first={x[0]:.17g} x_last={x[-1]:.17g} "
            f"n={len(x)} t_max={t[-1]:.17g} nt={field.tgrid.m}\n"
        )
        for i in range(len(t)):
            row = field.values[i]
            cells = [f"{t[i]:.17g}"]
            for v in row:
                cells.append(f"{v.real:.17g}")
                cells.append(f"{v.imag:.17g}")
            fh.write(",".join(cells) + "\n")


def read_field(path):
    """Returns (x, t, values) from a field CSV."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
    if not header.startswith("#"):
        raise ValueError("missing field header")
    meta = dict(tok.split("=") for tok in header[1:].split())
    n = int(meta["n"])
    data = np.loadtxt(path, delimiter=",", ndmin=2)
    t = data[:, 0]
    vals = data[:, 1::2] + 1j * data[:, 2::2]
    x = np.linspace(float(meta["x_first"]), float(meta["x_last"]), n)
    if meta["kind"] == "whole":
        # whole-line grids exclude the right endpoint
        dx = (float(meta["x_last"]) - float(meta["x_first"])) / (n - 1)
        x = float(meta["x_first"]) + dx * np.arange(n)
    return x, t, vals


def cmd_solve(config_path, out_dir=None):
    cfg = parse_config(config_path)
    spec, scfg = build_problem(cfg)
    out = out_dir or cfg["output.directory"]
    os.makedirs(out, exist_ok=True)
    try:
        field, report = solve_ibvp(spec, scfg)
    except (SupercriticalError, CompatibilityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except BlowupSuspected as exc:
        print(f"blow-up suspected: {exc}", file=sys.stderr)
        with open(os.path.join(out, "report.json"), "w", encoding="utf-8") as fh:
            json.dump(exc.report.as_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        return 2

    write_field(os.path.join(out, "field.csv"), field)
    trace = field.trace_nearest_zero()
    write_signal(os.path.join(out, "trace.csv"), field.tgrid.nodes, trace.values)

    x = scfg.sgrid.nodes
    keep = x >= 0.0
    j0 = scfg.sgrid.index_nearest_zero()
    with open(os.path.join(out, "initial_slice.csv"), "w", encoding="utf-8") as fh:
        fh.write("x,re_u,im_u,re_phi,im_phi\n")
        for xj, uj, pj in zip(x[keep], field.values[0, keep], spec.phi):
            fh.write(
                f"{xj:.17g},{uj.real:.17g},{uj.imag:.17g},"
                f"{pj.real:.17g},{pj.imag:.17g}\n"
            )

    norms = []
    for i in range(field.tgrid.m + 1):
        norms.append(sobolev_norm(field.slice_at(i), spec.s))
    with open(os.path.join(out, "norm_history.csv"), "w", encoding="utf-8") as fh:
        fh.write("t,hs_norm\n")
        for ti, nv in zip(field.tgrid.nodes, norms):
            fh.write(f"{ti:.17g},{nv:.17g}\n")

    with open(os.path.join(out, "report.json"), "w", encoding="utf-8") as fh:
        json.dump(report.as_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"converged in {report.iterates} iterations; outputs in {out}/")
    return 0


def _suite_checks(cfg, spec, scfg):
    """The operator property suite at the config's grids."""
    sgrid = scfg.sgrid
    T = spec.T
    m = spec.f.grid.m
    tgrid = TimeGrid(T, m)
    checks = []

    # canonical smooth data sized to the grids
    x = sgrid.nodes
    w = sgrid.x_max / 10.0
    c = sgrid.x_max / 4.0
    phi_c = np.exp(-(((x - c) / w) ** 2)) + 0j
    from .grids import GridFunction

    phi_g = GridFunction(sgrid, phi_c)
    t = tgrid.nodes
    f_c = TimeSignal(tgrid, 16.0 * t**2 * np.maximum(T - t, 0.0) ** 2 / T**4 + 0j)

    t1, t2 = 0.3 * T, 0.45 * T
    u1 = free_group(phi_g, t1)
    u12 = free_group(u1, t2)
    u_sum = free_group(phi_g, t1 + t2)
    scale = np.linalg.norm(phi_c)
    checks.append(
        (
            "free_group_law",
            float(np.linalg.norm(u12.values - u_sum.values) / scale),
            1e-12,
        )
    )
    checks.append(
        (
            "free_group_unitary",
            abs(np.linalg.norm(u1.values) / scale - 1.0),
            1e-12,
        )
    )

    half = frac_integral(f_c, 0.5)
    twice = frac_integral(half, 0.5)
    whole = frac_integral(f_c, 1.0)
    ns = max(float(np.max(np.abs(whole.values))), 1e-300)
    checks.append(
        (
            "frac_semigroup",
            float(np.max(np.abs(twice.values - whole.values)) / ns),
            1e-5,
        )
    )
    worst = 0.0
    for alpha in (1.0, 0.5, -0.5):
        if alpha > 0:
            ref = frac_integral(f_c, alpha)
        else:
            ref = frac_derivative(f_c, -alpha)
        four = frac_fourier_path(f_c, alpha)
        nsc = max(float(np.max(np.abs(ref.values))), 1e-300)
        worst = max(
            worst, float(np.max(np.abs(four.values - ref.values)) / nsc)
        )
    checks.append(("frac_path_agreement", worst, 1e-3))

    lt = boundary_forcing_time(f_c, sgrid, tgrid)
    lf = boundary_forcing_freq(f_c, sgrid, tgrid)
    num = float(np.sqrt(np.sum(np.abs(lt.values - lf.values) ** 2)))
    den = max(float(np.sqrt(np.sum(np.abs(lt.values) ** 2))), 1e-300)
    checks.append(("representation_equivalence", num / den, 1e-3))

    j0 = sgrid.index_nearest_zero()
    trace = lt.values[:, j0]
    checks.append(
        (
            "boundary_trace",
            float(
                np.max(np.abs(trace - f_c.values))
                / max(np.max(np.abs(f_c.values)), 1e-300)
            ),
            1e-3,
        )
    )

    minus, plus = derivative_jump(f_c, lt)
    h = frac_derivative(f_c, 0.5)
    target = 2.0 * np.exp(-0.25j * np.pi) * h.values
    jump = minus.values - plus.values
    checks.append(
        (
            "derivative_jump",
            float(
                np.max(np.abs(jump - target)) / max(np.max(np.abs(target)), 1e-300)
            ),
            1e-2,
        )
    )
    return checks


def _fd_comparison(cfg, spec, scfg):
    """Integral-equation vs finite-difference solve, with self-convergence
    errors setting the tolerance floor."""
    nx = cfg["grid.nx"]
    nt = cfg["grid.nt"]
    full, _ = solve_ibvp(spec, scfg)

    half_sgrid = SpatialGrid(scfg.sgrid.x_min, scfg.sgrid.x_max, max(16, nx // 2))
    xh = half_sgrid.nodes
    xph = xh[xh >= 0.0]
    tg_h = TimeGrid(spec.T, max(8, nt // 2))
    from .verification import _f_on, _phi_on

    spec_h = ProblemSpec(
        spec.lam, spec.alpha, spec.s, _phi_on(spec, xph),
        TimeSignal(tg_h, _f_on(spec, tg_h.nodes)), spec.T,
        phi_x=xph, phi_fn=spec.phi_fn, f_fn=spec.f_fn,
    )
    cfg_h = SolverConfig(sgrid=half_sgrid, tol=scfg.tol, max_halvings=0)
    half, _ = solve_ibvp(spec_h, cfg_h)
    e_ie = compare_fields(half, full).rel_l2

    fd_full = crank_nicolson(
        spec, FDConfig(nx=max(64, nx), nt=max(64, nt), x_max=scfg.sgrid.x_max)
    )
    fd_half = crank_nicolson(
        spec,
        FDConfig(nx=max(64, nx // 2), nt=max(64, nt // 2), x_max=scfg.sgrid.x_max),
    )
    e_fd = compare_fields(fd_half, fd_full).rel_l2
    tol = max(1e-3, 5.0 * max(e_ie, e_fd))
    rel = compare_fields(full, fd_full).rel_l2
    return rel, tol


def cmd_verify(config_path, out_dir=None):
    cfg = parse_config(config_path)
    spec, scfg = build_problem(cfg)
    out = out_dir or cfg["output.directory"]
    os.makedirs(out, exist_ok=True)
    checks = _suite_checks(cfg, spec, scfg)
    try:
        rel, tol = _fd_comparison(cfg, spec, scfg)
        checks.append(("fd_oracle_agreement", rel, tol))
    except BlowupSuspected:
        checks.append(("fd_oracle_agreement", float("inf"), 1e-3))

    report = []
    failed = []
    for name, value, tol in checks:
        value = float(value)
        tol = float(tol)
        ok = bool(value <= tol)
        report.append({"check": name, "value": value, "tolerance": tol, "pass": ok})
        line = "PASS" if ok else "FAIL"
        print(f"{line} {name}: {value:.3e} (tol {tol:.3e})")
        if not ok:
            failed.append(name)
    with open(os.path.join(out, "verify_report.json"), "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if failed:
        print(f"failed: {', '.join(failed)}", file=sys.stderr)
        return 3
    return 0


def cmd_converge(config_path, levels, out_dir=None):
    cfg = parse_config(config_path)
    spec, scfg = build_problem(cfg)
    out = out_dir or cfg["output.directory"]
    os.makedirs(out, exist_ok=True)
    try:
        result = convergence_study(spec, scfg, levels=levels)
    except BlowupSuspected as exc:
        print(f"blow-up suspected during study: {exc}", file=sys.stderr)
        return 2
    with open(os.path.join(out, "converge.csv"), "w", encoding="utf-8") as fh:
        fh.write("level,nx,nt,error,order\n")
        for k, row in enumerate(result["table"]):
            err = "" if row["error"] is None else f"{row['error']:.17g}"
            order = "" if row["order"] is None else f"{row['order']:.17g}"
            fh.write(f"{k},{row['nx']},{row['nt']},{err},{order}\n")
    if result["flagged"]:
        print(f"warning: {result['reason']}")
    else:
        orders = ", ".join(f"{p:.2f}" for p in result["orders"])
        print(f"observed orders: {orders}")
    return 0


def main(argv=None):
    threads = os.environ.get("HALFLINE_NLS_THREADS")
    if threads:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, threads)

    ap = argparse.ArgumentParser(
        prog="halfline-nls",
        description="Half-line nonlinear Schrodinger IBVP solver",
    )
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("solve", "verify", "converge"):
        p = sub.add_parser(name)
        p.add_argument("config")
        p.add_argument("--out", default=None)
        if name == "converge":
            p.add_argument("--levels", type=int, default=3)
    args = ap.parse_args(argv)

    try:
        if args.command == "solve":
            return cmd_solve(args.config, args.out)
        if args.command == "verify":
            return cmd_verify(args.config, args.out)
        return cmd_converge(args.config, args.levels, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (SupercriticalError, CompatibilityError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
