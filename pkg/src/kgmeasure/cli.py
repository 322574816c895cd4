"""Batch front-end: subcommands over a scenario config with deterministic output.

Every subcommand reads one TOML scenario, runs its computations, and writes
``<subcommand>.csv`` (rows: scenario, quantity, value, tolerance, passed)
plus ``<subcommand>_summary.json`` into the output directory.  Outputs are
bit-identical across runs for a fixed config and seed: floats are rendered
with ``repr`` and no timestamps or paths are embedded.  Exit status is 0 iff
every row passed.
"""

from __future__ import annotations

import argparse
import csv
import importlib.resources
import json
import sys
from pathlib import Path

import numpy as np

from .config import ScenarioConfig, load_config
from .errors import KGMeasureError
from .fields import advanced, apply_klein_gordon, commutator_form, retarded
from .instruments import (
    PreInstrument,
    complement_effect,
    cosine_effect,
    noise_statistics,
    povm_decomposition_check,
)
from .lattice import (
    causally_disjoint,
    cone_self_intersects,
    is_causally_convex,
    precedes,
)
from .scattering import scattering_map
from .sorkin import SorkinConfig, charlie_expectations, signaling_gap_green
from .verify import Row, _geq_row, _leq_row, run_all
from .weyl import PhaseSpace, vacuum_state


def default_config_path() -> Path:
    return Path(importlib.resources.files("kgmeasure") / "default.toml")


def _write_outputs(out_dir: Path, subcommand: str, rows: list[Row], seed: int) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / f"{subcommand}.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["scenario", "quantity", "value", "tolerance", "passed"])
        for r in rows:
            writer.writerow([r.scenario, r.quantity, repr(r.value), repr(r.tolerance),
                             "pass" if r.passed else "fail"])
    summary = {
        "subcommand": subcommand,
        "seed": seed,
        "rows": len(rows),
        "failures": sorted(f"{r.scenario}/{r.quantity}" for r in rows if not r.passed),
        "all_passed": all(r.passed for r in rows),
    }
    with open(out_dir / f"{subcommand}_summary.json", "w") as fh:
        json.dump(summary, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _dump_grid(out_dir: Path, name: str, grid: np.ndarray) -> None:
    np.savetxt(out_dir / f"{name}.csv", grid, delimiter=",", fmt="%r")


def _task(cfg: ScenarioConfig, name: str) -> dict:
    return cfg.tasks.get(name, {})


def run_green(cfg: ScenarioConfig, out_dir: Path, scale: float, dump: bool) -> list[Row]:
    names = _task(cfg, "green").get("functions", sorted(cfg.functions))
    rows = []
    for name in names:
        f = cfg.functions[name]
        for kind, solve in (("retarded", retarded), ("advanced", advanced)):
            sol = solve(f, cfg.system)
            res = float(np.max(np.abs(apply_klein_gordon(sol.values, cfg.system) - f.values)[1:-1]))
            rows.append(_leq_row(name, f"{kind}_residual", res, 1e-10 * scale))
            if dump:
                _dump_grid(out_dir, f"{name}_{kind}", sol.values)
    return rows


def run_sorkin(cfg: ScenarioConfig, out_dir: Path, scale: float, dump: bool) -> list[Row]:
    task = _task(cfg, "sorkin")
    f = cfg.functions[task.get("f", "f")]
    g = cfg.functions[task.get("g", "g")]
    h = cfg.functions[task.get("h", "h")]
    scfg = SorkinConfig(cfg.system, f, g, h)
    efg = commutator_form(f, g, cfg.system)
    egh = commutator_form(g, h, cfg.system)
    green = signaling_gap_green(scfg)
    exp = charlie_expectations(scfg)
    rows = [
        Row("sorkin", "E_fg", efg, 0.0, True),
        Row("sorkin", "E_gh", egh, 0.0, True),
        Row("sorkin", "mean_B", exp["mean_B"], 0.0, True),
        Row("sorkin", "mean_BA", exp["mean_BA"], 0.0, True),
        Row("sorkin", "gap", exp["gap"], 0.0, True),
        _leq_row("sorkin", "route_disagreement", abs(green - exp["gap"]), 1e-10 * scale),
        _geq_row("sorkin", "gap_magnitude", abs(green), 1e-3),
    ]
    if dump:
        _dump_grid(out_dir, "retarded_f", retarded(f, cfg.system).values)
        _dump_grid(out_dir, "advanced_h", advanced(h, cfg.system).values)
    return rows


def run_scatter(cfg: ScenarioConfig, out_dir: Path, scale: float, dump: bool,
                rng: np.random.Generator) -> list[Row]:
    from .verify import _perp_data

    task = _task(cfg, "scatter")
    names = task.get("probes", sorted(cfg.probes))
    samples = int(task.get("samples", 5))
    space = PhaseSpace(cfg.system)
    rows = []
    for name in names:
        probe = cfg.probes[name]
        smap = scattering_map(probe.coupling, cfg.system, probe.params)
        rows.append(_leq_row(name, "symplectic_defect", smap.symplectic_defect(), 1e-8 * scale))
        worst = 0.0
        found = 0
        while found < samples:
            d = _perp_data(rng, cfg.spec, space, probe.coupling.zone.region)
            if d is None:
                break
            found += 1
            comb = np.concatenate([d, np.zeros(2 * cfg.spec.n_x)])
            worst = max(worst, float(np.max(np.abs(smap.apply(comb) - comb))))
        rows.append(_leq_row(name, "locality_defect", worst, 1e-9 * scale))
        if dump:
            _dump_grid(out_dir, f"{name}_scattering_matrix", smap.matrix)
    return rows


def run_measure(cfg: ScenarioConfig, out_dir: Path, scale: float,
                rng: np.random.Generator) -> list[Row]:
    names = _task(cfg, "measure").get("probes", sorted(cfg.probes))
    omega = vacuum_state(cfg.system)
    sys_space = omega.space
    rows = []
    for name in names:
        probe = cfg.probes[name]
        sigma = vacuum_state(probe.params)
        smap = scattering_map(probe.coupling, cfg.system, probe.params)
        pre = PreInstrument(sigma, smap)
        probe_space = smap.space.parts[1]
        effect = cosine_effect(probe_space, cfg.functions[probe.effect_function], probe.theta)
        induced = pre.induced(effect)
        stats = noise_statistics(omega, induced)
        rows.append(Row(name, "probability", stats["probability"], 0.0,
                        -1e-10 <= stats["probability"] <= 1 + 1e-10))
        rows.append(Row(name, "variance", stats["variance"], 0.0, True))
        rows.append(Row(name, "dispersion_sq", stats["dispersion_sq"], 0.0, True))
        rows.append(_geq_row(name, "noise", stats["noise"], -1e-10 * scale))
        datas = [rng.normal(scale=0.3, size=sys_space.dim) for _ in range(5)]
        defect = povm_decomposition_check(
            omega.as_functional(), pre, [effect, complement_effect(effect)], datas
        )
        rows.append(_leq_row(name, "povm_additivity", defect, 1e-10 * scale))
    return rows


def run_causal(cfg: ScenarioConfig) -> list[Row]:
    names = _task(cfg, "causal").get("regions", sorted(cfg.regions))
    rows = []
    from .lattice import CouplingZone

    for name in names:
        region = cfg.regions[name]
        rows.append(Row(name, "causally_convex", float(is_causally_convex(region)), 0.0, True))
        rows.append(Row(name, "cone_wraps_lattice", float(cone_self_intersects(region)), 0.0, True))
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            ra, rb = cfg.regions[a], cfg.regions[b]
            rows.append(Row(f"{a}|{b}", "causally_disjoint",
                            float(causally_disjoint(ra, rb)), 0.0, True))
            if not ra.is_empty() and not rb.is_empty():
                rows.append(Row(f"{a}|{b}", "precedes",
                                float(precedes(CouplingZone(ra), CouplingZone(rb))), 0.0, True))
    return rows


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="kgmeasure",
        description="Lattice field causal-structure and measurement-scheme toolkit",
    )
    parser.add_argument("subcommand",
                        choices=["green", "sorkin", "scatter", "measure", "causal", "verify"])
    parser.add_argument("--config", type=Path, default=None,
                        help="scenario TOML (defaults to the bundled scenario)")
    parser.add_argument("--out", type=Path, default=Path("out"),
                        help="output directory for CSV and JSON results")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the seed declared in the config")
    parser.add_argument("--parallel", action="store_true",
                        help="run independent verification suites concurrently")
    parser.add_argument("--tolerance-scale", type=float, default=1.0,
                        help="multiply every pass/fail tolerance by this factor")
    parser.add_argument("--dump-grids", action="store_true",
                        help="also write solver grids as CSV for external plotting")
    args = parser.parse_args(argv)

    config_path = args.config if args.config is not None else default_config_path()
    try:
        cfg = load_config(config_path)
        seed = args.seed if args.seed is not None else cfg.seed
        scale = args.tolerance_scale
        rng = np.random.default_rng(np.random.SeedSequence([seed, 1000]))
        args.out.mkdir(parents=True, exist_ok=True)
        if args.subcommand == "green":
            rows = run_green(cfg, args.out, scale, args.dump_grids)
        elif args.subcommand == "sorkin":
            rows = run_sorkin(cfg, args.out, scale, args.dump_grids)
        elif args.subcommand == "scatter":
            rows = run_scatter(cfg, args.out, scale, args.dump_grids, rng)
        elif args.subcommand == "measure":
            rows = run_measure(cfg, args.out, scale, rng)
        elif args.subcommand == "causal":
            rows = run_causal(cfg)
        else:
            rows = run_all(seed, scale=scale, parallel=args.parallel)
    except KGMeasureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    _write_outputs(args.out, args.subcommand, rows, seed)
    ok = all(r.passed for r in rows)
    for r in rows:
        status = "pass" if r.passed else "FAIL"
        print(f"{status}  {r.scenario:16s} {r.quantity:34s} {r.value!r}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
