"""Command-line entry point: run one recipe from a JSON config and emit reports."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .grids import CostRefusalError, UndersampledShellError
from .harness import RECIPES, ConfigError, emit, parse_config, run


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cornerlab",
        description="Deterministic experiment recipes for corner counting forms, "
                    "shell windows, uniformity norms, and identity verification.")
    parser.add_argument("recipe", choices=RECIPES, help="experiment recipe to run")
    parser.add_argument("--config", required=True, help="path to the JSON config")
    parser.add_argument("--out", required=True, help="output directory for the report")
    parser.add_argument("--format", choices=("json", "csv"), default="json",
                        help="json: report.json only; csv: also tables/*.csv")
    parser.add_argument("--seed", type=int, default=None, metavar="u64",
                        help="override the config seed")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = Path(args.config).read_text()
    except OSError as e:
        print(f"error: cannot read config: {e}", file=sys.stderr)
        return 2
    try:
        config = parse_config(text)
        if config.recipe != args.recipe:
            raise ConfigError(
                f"field 'recipe': config says {config.recipe!r}, command line says {args.recipe!r}")
        if args.seed is not None:
            doc = config.to_json_dict()
            doc["seed"] = args.seed
            config = parse_config(doc)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    try:
        report = run(config)
        written = emit(report, args.out, format=args.format)
    except (CostRefusalError, UndersampledShellError, ValueError) as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2
    for a in report.assertions:
        print(f"{'PASS' if a['passed'] else 'FAIL'} {a['name']}: {a['detail']}")
    for path in written:
        print(f"wrote {path}")
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
