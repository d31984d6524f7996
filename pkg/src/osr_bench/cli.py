"""Command-line surface.

Subcommands: synth, eval, diagnose-attenuation, validate-pack.
Exit codes: 0 success, 2 usage or parameter validation, 3 data error,
4 internal error.

Every output-producing command writes a config echo (the resolved flags
and seed) alongside its outputs and accepts --config to re-run from
that echo byte-identically; explicit flags override echoed values.
validate-pack is read-only and writes nothing.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigError, PackError
from .metrics import DEFAULT_GRID
from .pack import read_pack, write_pack
from .pipeline import MethodFailure, RunConfig, run_eval
from .scoring import VALID_METHODS
from .synth import SynthSpec, generate

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_INTERNAL = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="osr-bench",
        description="Post-hoc open-set recognition scoring and evaluation over feature packs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="generate a synthetic feature pack")
    p_synth.add_argument("--k-known", type=int)
    p_synth.add_argument("--k-unknown", type=int)
    p_synth.add_argument("--dim", type=int)
    p_synth.add_argument("--per-class", type=int)
    p_synth.add_argument("--sep", type=float)
    p_synth.add_argument("--sigma", type=float)
    p_synth.add_argument("--seed", type=int)
    p_synth.add_argument("-o", "--output", required=True, metavar="DIR")
    p_synth.add_argument("--config", metavar="FILE", help="load defaults from a config echo")

    p_eval = sub.add_parser("eval", help="evaluate score methods on a pack")
    p_eval.add_argument("--pack", metavar="DIR")
    p_eval.add_argument("-o", "--output-dir", metavar="DIR")
    p_eval.add_argument("--methods", help="comma list from: " + ",".join(VALID_METHODS))
    p_eval.add_argument("--known-fraction", type=float)
    p_eval.add_argument("--test-fraction", type=float)
    p_eval.add_argument("--val-fraction", type=float)
    p_eval.add_argument("--seed", type=int)
    p_eval.add_argument("--grid", help="comma list of thresholds in [0,1]")
    p_eval.add_argument("--temperature", type=float)
    p_eval.add_argument("--maxlogit-source", choices=["head", "penultimate-max"])
    p_eval.add_argument(
        "--stratified", action=argparse.BooleanOptionalAction, default=None
    )
    p_eval.add_argument("--config", metavar="FILE", help="load defaults from a config echo")

    p_diag = sub.add_parser(
        "diagnose-attenuation",
        help="emit plot-ready weight/Hadamard matrices for one class",
    )
    p_diag.add_argument("--pack", metavar="DIR")
    p_diag.add_argument("--class-id", type=int)
    p_diag.add_argument("--samples", help="comma list of sample ids")
    p_diag.add_argument("-o", "--output", required=True, metavar="FILE")
    p_diag.add_argument("--config", metavar="FILE", help="load defaults from a config echo")

    p_val = sub.add_parser("validate-pack", help="read and validate a pack directory")
    p_val.add_argument("pack", metavar="DIR")

    return parser


def _load_echo(config_path) -> dict:
    if not config_path:
        return {}
    path = Path(config_path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    loaded = json.loads(path.read_text())
    if not isinstance(loaded, dict):
        raise ConfigError(f"config echo is not a JSON object: {path}")
    return loaded


def _picker(loaded: dict):
    def pick(cli_value, key, default=None):
        if cli_value is not None:
            return cli_value
        value = loaded.get(key, default)
        if value is None:
            raise ConfigError(f"--{key.replace('_', '-')} is required (flag or config echo)")
        return value

    return pick


def cmd_synth(args) -> int:
    pick = _picker(_load_echo(args.config))
    spec = SynthSpec(
        k_known=int(pick(args.k_known, "k_known")),
        k_unknown=int(pick(args.k_unknown, "k_unknown")),
        d=int(pick(args.dim, "dim")),
        samples_per_class=int(pick(args.per_class, "per_class")),
        class_sep=float(pick(args.sep, "sep")),
        noise_sigma=float(pick(args.sigma, "sigma")),
        seed=int(pick(args.seed, "seed", 0)),
    )
    pack = generate(spec)
    write_pack(pack, args.output)
    echo = {
        "k_known": spec.k_known,
        "k_unknown": spec.k_unknown,
        "dim": spec.d,
        "per_class": spec.samples_per_class,
        "sep": spec.class_sep,
        "sigma": spec.noise_sigma,
        "seed": spec.seed,
    }
    (Path(args.output) / "synth_config.json").write_text(
        json.dumps(echo, indent=2, sort_keys=True) + "\n"
    )
    print(f"wrote pack: n={pack.n} d={pack.d} K={pack.K} -> {args.output}")
    return EXIT_OK


def _resolve_eval_config(args) -> RunConfig:
    loaded = _load_echo(args.config)

    def pick(cli_value, key, default):
        if cli_value is not None:
            return cli_value
        return loaded.get(key, default)

    methods = pick(args.methods, "methods", list(VALID_METHODS))
    if isinstance(methods, str):
        methods = [m.strip() for m in methods.split(",") if m.strip()]
    grid = pick(args.grid, "grid", list(DEFAULT_GRID))
    if isinstance(grid, str):
        try:
            grid = [float(g) for g in grid.split(",") if g.strip()]
        except ValueError as exc:
            raise ConfigError(f"bad --grid value: {exc}") from exc

    pack = pick(args.pack, "pack", None)
    if pack is None:
        raise ConfigError("--pack is required (flag or config echo)")
    if args.output_dir is None:
        raise ConfigError("--output-dir is required")

    return RunConfig(
        pack=str(pack),
        output_dir=str(args.output_dir),
        methods=list(methods),
        known_fraction=float(pick(args.known_fraction, "known_fraction", 0.75)),
        test_fraction=float(pick(args.test_fraction, "test_fraction", 0.10)),
        val_fraction=float(pick(args.val_fraction, "val_fraction", 0.10)),
        seed=int(pick(args.seed, "seed", 0)),
        grid=grid,
        temperature=float(pick(args.temperature, "temperature", 1.0)),
        maxlogit_source=pick(args.maxlogit_source, "maxlogit_source", "head"),
        stratified=bool(pick(args.stratified, "stratified", False)),
    )


def cmd_eval(args) -> int:
    config = _resolve_eval_config(args)
    results = run_eval(config)
    failures = [r for r in results if isinstance(r, MethodFailure)]
    for result in results:
        if isinstance(result, MethodFailure):
            print(f"{result.method}: FAILED ({type(result.error).__name__}: {result.error})")
        else:
            print(
                f"{result.method}: tau_star={result.table.tau_star:g} "
                f"oosa={result.table.oosa_at_tau_star:.4f} auoscr={result.curve.auoscr:.4f}"
            )
    if failures and len(failures) == len(results):
        # Nothing succeeded; surface the first error's class via exit code.
        return EXIT_DATA if isinstance(failures[0].error, (PackError, OSError)) else EXIT_INTERNAL
    return EXIT_OK


def cmd_diagnose(args) -> int:
    pick = _picker(_load_echo(args.config))
    pack_dir = str(pick(args.pack, "pack"))
    class_id = int(pick(args.class_id, "class_id"))
    samples = str(pick(args.samples, "samples"))

    pack = read_pack(pack_dir)
    if not 0 <= class_id < pack.K:
        raise ConfigError(f"class id {class_id} out of range for K={pack.K}")
    try:
        sample_ids = [int(s) for s in samples.split(",") if s.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad --samples value: {exc}") from exc
    if not sample_ids:
        raise ConfigError("no sample ids given")
    for sid in sample_ids:
        if not 0 <= sid < pack.n:
            raise ConfigError(f"sample id {sid} out of range for n={pack.n}")

    weights = pack.weights[class_id].astype(np.float64)
    order = np.argsort(weights, kind="stable")
    rows = [
        ["weights_sorted"] + [f"{w:.9g}" for w in weights[order]],
        ["sort_index"] + [str(int(i)) for i in order],
    ]
    for sid in sample_ids:
        feats = pack.features[sid].astype(np.float64)
        hadamard = feats * weights
        rows.append([f"hadamard_{sid}"] + [f"{h:.9g}" for h in hadamard[order]])
    for sid in sample_ids:
        feats = pack.features[sid].astype(np.float64)
        rows.append([f"features_{sid}"] + [f"{f:.9g}" for f in feats[order]])

    Path(args.output).write_text("\n".join(",".join(row) for row in rows) + "\n")
    echo = {"pack": pack_dir, "class_id": class_id, "samples": samples}
    Path(str(args.output) + ".config.json").write_text(
        json.dumps(echo, indent=2, sort_keys=True) + "\n"
    )
    print(f"wrote attenuation matrix for class {class_id} -> {args.output}")
    return EXIT_OK


def cmd_validate(args) -> int:
    pack = read_pack(args.pack)
    knowns = int((pack.labels >= 0).sum())
    print(
        f"OK: n={pack.n} d={pack.d} K={pack.K} "
        f"known_samples={knowns} unknown_samples={pack.n - knowns} "
        f"stored_logits={pack.logits_stored}"
    )
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "synth": cmd_synth,
        "eval": cmd_eval,
        "diagnose-attenuation": cmd_diagnose,
        "validate-pack": cmd_validate,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PackError, OSError, json.JSONDecodeError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
