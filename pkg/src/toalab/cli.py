"""Command-line entry point ``toa``."""
import argparse
import os
import sys
import warnings

from .audit import audit, passed
from .emit import emit
from .report import parse_which, run, summary_lines
from .scenario import FIG2, FIG3, ConfigError, ScenarioConfig

DEFAULT_WHICH = {
    "fig2": "qf,sc",
    "fig3": "qf,w,ms,jn",
    None: "qf,sc,w,ms,jn,expected",
}

EPILOG = """\
environment:
  TOA_SEED  reserved; every computation is deterministic and ignores it

exit status: 0 on success, 1 if an audit check fails, 2 on invalid input
"""


def _parser():
    ap = argparse.ArgumentParser(prog="toa", description="Arrival-time densities for a train of wave packets.",
                                 epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="tabulate densities on the scenario time grid",
                       epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    r.add_argument("--config", metavar="FILE.json", help="JSON object of scenario fields; overrides a preset")
    preset = r.add_mutually_exclusive_group()
    preset.add_argument("--fig2", action="store_const", const="fig2", dest="preset",
                        help="five packets, flux vs semiclassical (default columns qf,sc)")
    preset.add_argument("--fig3", action="store_const", const="fig3", dest="preset",
                        help="ten packets, flux vs exponential models (default columns qf,w,ms,jn)")
    r.add_argument("--which", help="comma-separated subset of qf,sc,w,ms,jn,expected")
    r.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    r.add_argument("--format", choices=("csv", "svg"), default="csv")
    r.add_argument("--quiet", action="store_true", help="suppress the summary on stderr")

    a = sub.add_parser("audit", help="check invariants of every module at one scenario",
                       epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    a.add_argument("--config", metavar="FILE.json")
    return ap


def _config(args, preset=None):
    base = {"fig2": FIG2, "fig3": FIG3}.get(preset, ScenarioConfig())
    if args.config:
        return ScenarioConfig.from_json(args.config, base=base)
    return base


def _cmd_run(args):
    cfg = _config(args, args.preset)
    which = parse_which(args.which or DEFAULT_WHICH[args.preset])
    with warnings.catch_warnings(record=True):
        # notes are carried in the table metadata and echoed below
        warnings.simplefilter("always")
        table = run(cfg, which)
    text = emit(table, args.format, args.out)
    if args.out is None:
        sys.stdout.write(text)
    if not args.quiet:
        for line in summary_lines(table):
            print(line, file=sys.stderr)
        for note in table.metadata["notes"]:
            print(f"note: {note}", file=sys.stderr)
    return 0


def _cmd_audit(args):
    checks = audit(_config(args))
    for c in checks:
        print(c.line())
    counts = {s: sum(c.status == s for c in checks) for s in ("PASS", "FAIL", "OUT_OF_REGIME")}
    print(", ".join(f"{v} {k}" for k, v in counts.items()))
    return 0 if passed(checks) else 1


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_audit(args)
    except BrokenPipeError:
        # reader went away (e.g. piped into head); not an error
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 0
    except (ConfigError, ValueError, OSError) as exc:
        print(f"toa: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
