"""Command line entry point: ``taxlattice {run,preset,sweep,validate}``."""
from __future__ import annotations

import argparse
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .config import ConfigError, parse_config, parse_dims, parse_fraction
from .scenarios import PRESET_NAMES, SweepSpec, preset, run_sweep
from .simulation import RunResult, run

OUT_DIR_ENV = "TAXLATTICE_OUT_DIR"


def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    with os.fdopen(fd, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _out_dir(args) -> Path:
    return Path(args.out_dir or os.environ.get(OUT_DIR_ENV) or ".")


def _overrides(args) -> dict:
    overrides = {"seed": args.seed, "steps": args.steps}
    if args.dims:
        overrides["width"], overrides["height"] = parse_dims(args.dims)
    return overrides


def _write_result(result: RunResult, out: Path, prefix: str, society: bool) -> None:
    _write_atomic(out / f"{prefix}timeseries.csv", result.timeseries_csv())
    _write_atomic(out / f"{prefix}histogram.csv", result.histogram.to_csv())
    if society:
        _write_atomic(out / f"{prefix}society.csv", result.society.to_csv())


def _summary(label: str, result: RunResult) -> str:
    return (f"{label}: stationary p_noncp={result.stationary_noncompliance():.4f} "
            f"final mean a-field={result.final_mean_a_field:.3f}")


def cmd_run(args) -> int:
    text = Path(args.config).read_text() if args.config else ""
    config = parse_config(text, **_overrides(args))
    result = run(config)
    _write_result(result, _out_dir(args), "", args.society)
    print(_summary("run", result))
    return 0


def cmd_preset(args) -> int:
    scenario = preset(args.name)
    overrides = {k: v for k, v in _overrides(args).items() if v is not None}
    first_seed = scenario.config.seed if args.seed is None else args.seed
    jobs = []
    for label, config in scenario.variants.items():
        for k in range(args.replicas):
            cfg = config.replace(**{**overrides, "seed": first_seed + k})
            jobs.append((label, k, cfg))

    def work(job):
        return job[0], job[1], run(job[2])

    with ThreadPoolExecutor(max_workers=max(1, args.replicas)) as pool:
        results = list(pool.map(work, jobs))
    out = _out_dir(args)
    for label, k, result in results:
        suffix = f"_r{k}" if args.replicas > 1 else ""
        _write_result(result, out, f"{scenario.name}__{label}{suffix}__", args.society)
        print(_summary(f"{scenario.name}/{label}{suffix}", result))
    return 0


def parse_grid(text: str) -> list[float]:
    """``1:5`` (unit step), ``0:1:0.25`` or a comma list ``0,2.5,5``."""
    if ":" in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) == 2:
            parts.append(1.0)
        if len(parts) != 3 or parts[2] <= 0:
            raise ValueError(f"grid ranges look like START:STOP[:STEP], got {text!r}")
        start, stop, step = parts
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        return [start + k * step for k in range(count)]
    return [float(v) for v in text.split(",") if v.strip()]


def cmd_sweep(args) -> int:
    spec = SweepSpec(args.param, parse_grid(args.grid), range(args.seed or 0, (args.seed or 0) + args.replicas))
    changes = {k: v for k, v in _overrides(args).items() if v is not None and k != "seed"}
    if args.dpmin is not None:
        changes["delta_p_min"] = parse_fraction(args.dpmin)
    if args.config:
        spec.base = parse_config(Path(args.config).read_text())
    if changes:
        spec.base = spec.base.replace(**changes)
    result = run_sweep(spec, workers=args.replicas)
    _write_atomic(_out_dir(args) / "sweep.csv", result.to_csv())
    critical = result.critical
    print("critical estimate: " + ("none (no transition in grid)" if critical is None else f"{critical:g}"))
    return 0


def cmd_validate(args) -> int:
    config = parse_config(Path(args.config).read_text())
    print(f"ok: {config.width}x{config.height}, {config.composition.describe()}, steps={config.steps}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="taxlattice", description="Tax compliance on an Ising lattice")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, replicas=True):
        p.add_argument("--seed", type=int)
        p.add_argument("--steps", type=int)
        p.add_argument("--dims", help="WIDTHxHEIGHT, e.g. 256x256")
        p.add_argument("--out-dir", help=f"output directory (default ${OUT_DIR_ENV} or .)")
        if replicas:
            p.add_argument("--replicas", type=int, default=1, help="seeds run concurrently")

    p = sub.add_parser("run", help="run one configuration and write CSVs")
    p.add_argument("config", nargs="?", help="key = value config file")
    p.add_argument("--society", action="store_true", help="also write the final society snapshot")
    common(p, replicas=False)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("preset", help="run a named preset scenario")
    p.add_argument("name", choices=PRESET_NAMES)
    p.add_argument("--society", action="store_true")
    common(p)
    p.set_defaults(func=cmd_preset)

    p = sub.add_parser("sweep", help="sweep one parameter over a grid")
    p.add_argument("--param", required=True, help="dB_max, dp_min or share_a")
    p.add_argument("--grid", required=True, help="START:STOP[:STEP] or comma list")
    p.add_argument("--dpmin", help="perception threshold for every point, e.g. 0.01 or 1%%")
    p.add_argument("--config", help="base config file")
    common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("validate", help="check a config file")
    p.add_argument("config")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "replicas", 1) < 1:
        parser.error("--replicas must be >= 1")
    try:
        return args.func(args)
    except (ConfigError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
