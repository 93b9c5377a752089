"""Command-line interface.

Exit status: 0 success, 2 invalid configuration or parameters, 3 I/O error
or missing artifact, 4 verification failed, 5 artifact schema mismatch.
The master seed can be overridden with the CANYONSIM_SEED environment
variable; ``--seed`` takes precedence over it.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__, kernels
from .artifacts import SchemaMismatchError, dumps_json, satellites_csv
from .errors import ParameterError
from .geometry import generate_canyon, rice_mean
from .simulate import ScenarioConfig

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_VERIFY = 4
EXIT_SCHEMA = 5

SEED_ENV_VAR = "CANYONSIM_SEED"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _u64(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer: {text}")
    return value


def _nu_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {text!r}") from None


def load_config(path: str | None) -> ScenarioConfig:
    if path is None:
        return ScenarioConfig()
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParameterError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ParameterError(f"{path}: expected a JSON object")
    data.pop("schema_version", None)
    return ScenarioConfig.from_dict(data)


def _resolve_seed(config: ScenarioConfig, flag: int | None) -> ScenarioConfig:
    if flag is not None:
        return replace(config, master_seed=flag)
    env = os.environ.get(SEED_ENV_VAR)
    if env:
        try:
            return replace(config, master_seed=_u64(env))
        except argparse.ArgumentTypeError as exc:
            raise ParameterError(f"{SEED_ENV_VAR}: {exc}") from None
    return config


def _say(args, text: str) -> None:
    if not args.quiet:
        print(text)


def cmd_generate(args) -> int:
    config = load_config(args.config)
    nu = args.nu[0] if args.nu else config.canyon.rice_nu
    params = config.canyon
    if args.seed is not None:
        params = replace(params, rng_seed=args.seed)
    params = replace(params, rice_nu=nu)
    geometry = generate_canyon(params)
    text = geometry.to_json()
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text, encoding="utf-8")
    heights = geometry.heights
    _say(
        args,
        f"wrote {out}: {len(heights)} buildings, mean height {heights.mean():.3f} m "
        f"(Rice mean {rice_mean(params.rice_nu, params.rice_sigma):.3f} m), "
        f"min {heights.min():.3f} m, max {heights.max():.3f} m",
    )
    return EXIT_OK


def cmd_sweep(args) -> int:
    from .pipeline import run_pipeline, write_result

    config = _resolve_seed(load_config(args.config), args.seed)
    if args.nu:
        config = replace(config, nu_sweep=args.nu)
    _say(args, f"sweeping {len(config.nu_sweep)} environments (kernels: {kernels.BACKEND}, seed {config.master_seed})")
    result = run_pipeline(config, jobs=args.jobs)
    paths = write_result(result, Path(args.out))
    for s in result.summaries:
        _say(
            args,
            f"  nu={s.nu_h:5.1f} mu={s.mu_h:6.2f}  Ns={s.mean_received_Ns:5.2f}  "
            f"d_m={s.median_delay_dm if s.median_delay_dm is not None else float('nan'):6.2f}  "
            f"reflections/epoch={s.reflections_per_epoch:5.2f}",
        )
    if result.model is not None:
        m = result.model
        _say(args, f"model: d_m = {m.c2:.4f} Ns^2 + {m.c1:.4f} Ns + {m.c0:.4f}  (rms {m.rms_error:.3f} m)")
    _say(args, f"wrote {len(paths)} files to {args.out} in {result.elapsed_s:.1f} s")
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import run_verification

    results = run_verification(Path(args.out), rerun=not args.no_rerun)
    width = max(len(r.name) for r in results)
    print(f"{'id':<4} {'criterion':<{width}}  verdict  observed | bound")
    for r in results:
        print(f"{r.key:<4} {r.name:<{width}}  {'PASS' if r.passed else 'FAIL':<7}  {r.observed} | {r.bound}")
    failed = [r.key for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed" + (f"; failed: {', '.join(failed)}" if failed else ""))
    return EXIT_VERIFY if failed else EXIT_OK


def cmd_satellites(args) -> int:
    config = load_config(args.config)
    times = [
        k * config.repetition_spacing + i * config.sample_period
        for k in range(config.repetitions)
        for i in range(config.sample_count)
    ]
    text = satellites_csv(config.constellation, times)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text, encoding="utf-8")
    _say(args, f"wrote {out}: {len(times)} epochs x {config.constellation.satellite_count} satellites")
    return EXIT_OK


def cmd_default_config(args) -> int:
    text = dumps_json(ScenarioConfig().to_dict())
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="canyonsim",
        description="Single-bounce GNSS multipath simulation in urban canyons.",
        epilog="exit status: 0 ok, 2 config/parameter error, 3 I/O error or missing artifact, "
        "4 verification failed, 5 schema mismatch. "
        f"{SEED_ENV_VAR} overrides the master seed unless --seed is given.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="scenario JSON (defaults to built-in values)")
    common.add_argument("--quiet", action="store_true", help="suppress progress output")

    p = sub.add_parser("generate", parents=[common], help="write one canyon geometry as JSON")
    p.add_argument("--nu", type=_nu_list, metavar="M", help="Rice nu of building heights, meters")
    p.add_argument("--seed", type=_u64, help="geometry RNG seed")
    p.add_argument("--out", required=True, metavar="FILE")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("sweep", parents=[common], help="run the building-height sweep")
    p.add_argument("--out", required=True, metavar="DIR")
    p.add_argument("--seed", type=_u64, help="master seed")
    p.add_argument("--nu", type=_nu_list, metavar="LIST", help="comma-separated nu values, meters")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="check acceptance criteria against a completed sweep")
    p.add_argument("out", metavar="DIR")
    p.add_argument("--no-rerun", action="store_true", help="skip the determinism rerun")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("satellites", parents=[common], help="export satellite ENU states as CSV")
    p.add_argument("--out", required=True, metavar="FILE")
    p.set_defaults(func=cmd_satellites)

    p = sub.add_parser("default-config", help="print the default scenario JSON")
    p.add_argument("--out", metavar="FILE")
    p.set_defaults(func=cmd_default_config)
    return parser


def main(argv=None) -> int:
    from .verify import MissingArtifactError

    args = build_parser().parse_args(argv)
    if getattr(args, "nu", None) is not None and args.command == "generate" and len(args.nu) != 1:
        print("canyonsim: error: generate takes a single --nu value", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except SchemaMismatchError as exc:
        print(f"canyonsim: schema mismatch: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except MissingArtifactError as exc:
        print(f"canyonsim: {exc}", file=sys.stderr)
        return EXIT_IO
    except ParameterError as exc:
        print(f"canyonsim: parameter error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"canyonsim: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
