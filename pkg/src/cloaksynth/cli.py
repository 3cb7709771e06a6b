"""Command-line driver.

    cloaksynth <mode> --config path [--key value ...] [--jobs N]

Modes: validate, scatter, cloak, sweep, density.  Every run writes a JSON
summary plus mode-specific CSV files and figures into the output directory.
Exit codes: 0 ok, 2 config error, 3 solver failure, 4 consistency-check
failure, 5 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import control, farfield, mie_oracle, report
from .config import ConfigError, RunConfig, load_config
from .incident import BCVariant, WaveContext
from .solver import SolverError, SolveReport, boundary_system
from .sphere_grid import CapRegion, build_grid, rotation_to_pole

VALIDATE_TOL = 1e-6


class ConsistencyError(Exception):
    """A physics cross-check exceeded its tolerance."""


def _context(cfg: RunConfig) -> WaveContext:
    variant = (BCVariant.MIXED_IMPEDANCE if cfg.bc_variant == "impedance"
               else BCVariant.MIXED_DIRICHLET)
    return WaveContext(cfg.k, cfg.a, np.asarray(cfg.alpha), cfg.h, variant)


def _cap(cfg: RunConfig) -> CapRegion:
    return CapRegion(np.asarray(cfg.cap_axis), cfg.aperture_rad)


def _off_axis_direction(alpha: np.ndarray) -> np.ndarray:
    """A fixed direction 60 degrees away from alpha for the reciprocity check."""
    rot = rotation_to_pole(alpha)
    # columns of rot.T are the local frame axes; tilt away from alpha
    return rot.T @ np.array([np.sin(np.pi / 3), 0.0, np.cos(np.pi / 3)])


def _write_pattern_csv(path: Path, pattern, grid) -> None:
    values = grid.harmonics(pattern.l_max) @ pattern.a_coeffs
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["theta_rad", "phi_rad", "re_A", "im_A", "abs2_A"])
        for theta, phi, A in zip(grid.theta_flat, grid.phi_flat, values):
            writer.writerow([f"{theta:.17g}", f"{phi:.17g}",
                             f"{A.real:.17g}", f"{A.imag:.17g}",
                             f"{abs(A) ** 2:.17g}"])


def _write_coeff_csv(path: Path, coeffs: np.ndarray) -> None:
    l_max = int(np.sqrt(len(coeffs))) - 1
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["l", "m", "re", "im"])
        for l in range(l_max + 1):
            for m in range(-l, l + 1):
                c = coeffs[l * l + l + m]
                writer.writerow([l, m, f"{c.real:.17g}", f"{c.imag:.17g}"])


def _summary(mode: str, cfg: RunConfig, reports: list[SolveReport], *,
             sigma_before=None, sigma_after=None, reduction_db=None,
             control_norm=None, lambda_used=None, optical=None,
             reciprocity=None, oracle=None) -> dict:
    return {
        "mode": mode,
        "config_echo": cfg.echo(),
        "sigma_before": sigma_before,
        "sigma_after": sigma_after,
        "reduction_db": reduction_db,
        "control_norm": control_norm,
        "lambda_used": lambda_used,
        "solve_reports": [r.as_dict() for r in reports],
        "checks": {
            "optical_residual": optical,
            "reciprocity_residual": reciprocity,
            "oracle_rel_err": oracle,
        },
        "timing_seconds": None,
    }


def run_validate(cfg: RunConfig, out: Path) -> dict:
    """Uniform-boundary solve checked against the separated-variables solution."""
    ctx = _context(cfg)
    l_max = cfg.resolved_l_max()
    grid = build_grid(l_max)
    # a vanishing cap leaves every node under the F' condition, which the
    # Mie series solves exactly
    cap = CapRegion(np.array([0.0, 0.0, 1.0]), 1e-9)
    v, rep = boundary_system(ctx, cap, grid, l_max).solve()
    pattern = farfield.far_field(v)

    if ctx.bc_variant is BCVariant.MIXED_IMPEDANCE:
        sol = mie_oracle.impedance_sphere(cfg.k, cfg.a, cfg.h)
    else:
        sol = mie_oracle.soft_sphere(cfg.k, cfg.a)
    sigma_ref = mie_oracle.mie_sigma(sol)
    sigma_num = farfield.sigma(pattern)
    oracle = abs(sigma_num - sigma_ref) / sigma_ref
    optical = farfield.optical_theorem_residual(pattern, ctx)
    beta = _off_axis_direction(ctx.alpha)
    reciprocity = farfield.reciprocity_residual(ctx, cap, grid, l_max, beta)

    summary = _summary("validate", cfg, [rep], sigma_before=sigma_num,
                       optical=optical, reciprocity=reciprocity, oracle=oracle)
    lossless = np.all(np.imag(np.asarray(cfg.h)) == 0)
    failed = oracle > VALIDATE_TOL or (lossless and optical > VALIDATE_TOL) \
        or reciprocity > VALIDATE_TOL
    if failed:
        raise ConsistencyError(
            f"validate checks failed: oracle {oracle:.3e}, optical {optical:.3e}, "
            f"reciprocity {reciprocity:.3e} against tolerance {VALIDATE_TOL:.1e}")
    return summary


def run_scatter(cfg: RunConfig, out: Path) -> dict:
    ctx = _context(cfg)
    cap = _cap(cfg)
    l_max = cfg.resolved_l_max()
    grid = build_grid(l_max)
    pattern, rep = control.compute_A0(ctx, cap, grid, l_max)

    _write_pattern_csv(out / "pattern.csv", pattern, grid)
    _write_coeff_csv(out / "coeffs.csv", pattern.a_coeffs)
    if cfg.figures:
        report.pattern_figure(pattern, out / "pattern.png")

    beta = _off_axis_direction(ctx.alpha)
    return _summary(
        "scatter", cfg, [rep],
        sigma_before=farfield.sigma(pattern),
        optical=farfield.optical_theorem_residual(pattern, ctx),
        reciprocity=farfield.reciprocity_residual(ctx, cap, grid, l_max, beta))


def _synthesis_setup(cfg: RunConfig):
    ctx = _context(cfg)
    cap = _cap(cfg)
    l_max = cfg.resolved_l_max()
    grid = build_grid(l_max)
    a0, rep0 = control.compute_A0(ctx, cap, grid, l_max)
    basis = control.ControlBasis(cap, cfg.basis_p, cfg.basis_m)
    operator, reports = control.assemble_control_operator(ctx, cap, basis, grid, l_max)
    gram = control.gram_matrix(basis, grid)
    return ctx, cap, grid, l_max, a0, basis, operator, gram, [rep0] + reports


def run_cloak(cfg: RunConfig, out: Path) -> dict:
    ctx, cap, grid, l_max, a0, basis, operator, gram, reports = _synthesis_setup(cfg)
    lam = cfg.lambda_list[0]
    result = control.synthesize(a0, operator, lam, basis, gram)
    after = farfield.FarFieldPattern(ctx.k, a0.a_coeffs + operator @ result.w.g)

    _write_pattern_csv(out / "pattern_before.csv", a0, grid)
    _write_pattern_csv(out / "pattern_after.csv", after, grid)
    _write_coeff_csv(out / "coeffs_before.csv", a0.a_coeffs)
    _write_coeff_csv(out / "coeffs_after.csv", after.a_coeffs)
    if cfg.figures:
        report.cloak_figure(a0, after, out / "cloak.png")

    beta = _off_axis_direction(ctx.alpha)
    return _summary(
        "cloak", cfg, reports,
        sigma_before=result.sigma_before, sigma_after=result.sigma_after,
        reduction_db=result.reduction_db, control_norm=result.control_norm,
        lambda_used=result.lambda_used,
        optical=farfield.optical_theorem_residual(a0, ctx),
        reciprocity=farfield.reciprocity_residual(ctx, cap, grid, l_max, beta))


def run_sweep(cfg: RunConfig, out: Path) -> dict:
    ctx, cap, grid, l_max, a0, basis, operator, gram, reports = _synthesis_setup(cfg)
    lambdas = list(cfg.lambda_list)
    jobs = cfg.jobs if cfg.jobs > 0 else None
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        results = list(pool.map(
            lambda lam: control.synthesize(a0, operator, lam, basis, gram), lambdas))

    with open(out / "sweep.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["lambda", "sigma_after", "reduction_db", "control_norm"])
        for lam, res in zip(lambdas, results):
            writer.writerow([f"{lam:.17g}", f"{res.sigma_after:.17g}",
                             f"{res.reduction_db:.17g}", f"{res.control_norm:.17g}"])
    if cfg.figures:
        report.sweep_figure(lambdas, [r.sigma_after for r in results],
                            [r.control_norm for r in results], out / "sweep.png")

    best = min(results, key=lambda r: r.sigma_after)
    beta = _off_axis_direction(ctx.alpha)
    return _summary(
        "sweep", cfg, reports,
        sigma_before=best.sigma_before, sigma_after=best.sigma_after,
        reduction_db=best.reduction_db, control_norm=best.control_norm,
        lambda_used=best.lambda_used,
        optical=farfield.optical_theorem_residual(a0, ctx),
        reciprocity=farfield.reciprocity_residual(ctx, cap, grid, l_max, beta))


def _seeded_target(cfg: RunConfig, l_max: int) -> np.ndarray:
    """Reproducible band-limited target with smoothly decaying coefficients."""
    rng = np.random.default_rng(cfg.target_seed)
    n = (l_max + 1) ** 2
    coeffs = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    l = np.repeat(np.arange(l_max + 1), 2 * np.arange(l_max + 1) + 1)
    return coeffs * np.exp(-0.5 * l)


def run_density(cfg: RunConfig, out: Path) -> dict:
    ctx = _context(cfg)
    cap = _cap(cfg)
    l_max = cfg.resolved_l_max()
    grid = build_grid(l_max)
    target = farfield.FarFieldPattern(ctx.k, _seeded_target(cfg, l_max))
    pairs = [(p, min(p - 1, cfg.basis_m)) for p in range(1, cfg.basis_p + 1)]
    residuals = control.density_experiment(ctx, cap, grid, l_max, target, pairs)

    basis = control.ControlBasis(cap, cfg.basis_p, cfg.basis_m)
    sizes = [len(basis.column_subset(p, m)) for p, m in pairs]
    with open(out / "density.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["basis_p", "basis_m", "n_columns", "residual"])
        for (p, m), n_cols, r in zip(pairs, sizes, residuals):
            writer.writerow([p, m, n_cols, f"{r:.17g}"])
    if cfg.figures:
        report.density_figure(pairs, residuals, out / "density.png")

    target_norm_sq = float(np.vdot(target.a_coeffs, target.a_coeffs).real)
    return _summary(
        "density", cfg, [],
        sigma_before=target_norm_sq, sigma_after=residuals[-1] ** 2,
        reduction_db=10.0 * np.log10(target_norm_sq / max(residuals[-1] ** 2, 1e-300)))


_RUNNERS = {
    "validate": run_validate,
    "scatter": run_scatter,
    "cloak": run_cloak,
    "sweep": run_sweep,
    "density": run_density,
}


def _parse_overrides(extra: list[str]) -> dict:
    overrides = {}
    i = 0
    while i < len(extra):
        token = extra[i]
        if not token.startswith("--") or i + 1 >= len(extra):
            raise ConfigError(f"expected '--key value' override, got {extra[i:]!r}")
        overrides[token[2:].replace("-", "_")] = extra[i + 1]
        i += 2
    return overrides


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="cloaksynth",
        description="Mixed-boundary sphere scattering and scattering-reduction synthesis")
    parser.add_argument("mode", choices=sorted(_RUNNERS))
    parser.add_argument("--config", help="flat 'key = value' configuration file")
    parser.add_argument("--jobs", type=int, default=None,
                        help="worker threads for sweep synthesis")
    args, extra = parser.parse_known_args(argv)

    started = time.perf_counter()
    try:
        overrides = _parse_overrides(extra)
        cfg = load_config(args.config, overrides, mode=args.mode)
        if args.jobs is not None:
            cfg.jobs = args.jobs
        out = Path(cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        summary = _RUNNERS[args.mode](cfg, out)
        summary["timing_seconds"] = time.perf_counter() - started
        text = json.dumps(summary, indent=2, sort_keys=True)
        (out / "summary.json").write_text(text + "\n")
        print(text)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3
    except ConsistencyError as exc:
        print(f"consistency-check failure: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 5


if __name__ == "__main__":
    sys.exit(main())
