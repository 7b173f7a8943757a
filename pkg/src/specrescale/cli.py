"""Command-line entry point: ``specrescale run`` and ``specrescale analyze``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure (partial
outputs kept, manifest marked incomplete).  FFT threads come from the
``SPECRESCALE_THREADS`` environment variable.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .config import load_config, load_preset, parse_fit_range
from .errors import ConfigError, MissingCheckpoint
from .runner import analyze, run

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def _bool(text: str) -> bool:
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected true/false, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="specrescale", description="Successive-rescaling spectral solver")
    p.add_argument("-v", "--verbose", action="store_true", help="log every cycle")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a cascade and write checkpoints and diagnostics")
    src = r.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="INI configuration file")
    src.add_argument("--preset", help="bundled configuration name")
    r.add_argument("--out", help="output directory (overrides [output] directory)")

    a = sub.add_parser("analyze", help="recompute diagnostics from a run's checkpoints")
    a.add_argument("manifest", help="manifest.json or the run directory")
    a.add_argument("--out", help="report directory (default: <run>/analysis)")
    a.add_argument("--fit-range", help="'auto' or 'lo,hi' in local-frame units")
    a.add_argument("--exclude-cycle0", type=_bool, default=None, metavar="BOOL",
                   help="drop cycle 0 from averages (default: as configured)")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            cfg = load_config(args.config) if args.config else load_preset(args.preset)
            manifest = run(cfg, args.out)
            print(f"{manifest.root / 'manifest.json'}")
            if not manifest.complete:
                print(f"run incomplete: {manifest.error}", file=sys.stderr)
                return EXIT_NUMERIC
            print(f"cycles={manifest.ledger['cycles']} total_time={manifest.ledger['total_time']:.9g}")
        else:
            if args.fit_range is not None:
                parse_fit_range(args.fit_range)
            written = analyze(args.manifest, args.out, args.fit_range, args.exclude_cycle0)
            print(f"wrote {len(written)} files to {written[-1].parent}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MissingCheckpoint as exc:
        print(f"missing checkpoint: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
