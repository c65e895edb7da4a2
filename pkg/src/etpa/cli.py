"""Command-line front end: ``etpa run | validate | list-scenarios``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure
(no poling-period root, wavelength outside a Sellmeier range, ...).
"""

import argparse
import json
import logging
import sys

from . import __version__
from .config import SCENARIO_HELP, SCENARIOS, build_config, normalized_echo, resolve_raw
from .errors import ConfigError, EtpaError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

log = logging.getLogger("etpa")


def _add_config_args(p, with_output=True):
    p.add_argument("--config", help="INI configuration file")
    p.add_argument("--scenario", choices=SCENARIOS, help="scenario (overrides [run] scenario)")
    p.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                   help="override one config value; may be repeated")
    p.add_argument("--pump-sigma-nm", type=float, help="shortcut for --set pump.sigma_p=VALUE")
    p.add_argument("--sellmeier-file", help="Sellmeier data file (default: shipped KTP set)")
    p.add_argument("--samples-file", help="sample profile file (default: shipped profiles)")
    p.add_argument("--seed", type=int, help="RNG seed for noise simulations")
    p.add_argument("--threads", type=int, help="worker cap; results do not depend on it")
    if with_output:
        p.add_argument("--output-dir", help="directory for the emitted files")


def build_parser():
    parser = argparse.ArgumentParser(prog="etpa", description="Entangled two-photon absorption simulator")
    parser.add_argument("--version", action="version", version=f"etpa {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_config_args(sub.add_parser("run", help="compute a scenario and write its data files"))
    _add_config_args(sub.add_parser("validate", help="check a configuration without computing"), with_output=False)
    sub.add_parser("list-scenarios", help="print the available scenarios")
    return parser


def _flag_layer(args):
    flags = {}
    if args.pump_sigma_nm is not None:
        flags.setdefault("pump", {})["sigma_p"] = repr(args.pump_sigma_nm)
    if args.sellmeier_file:
        flags.setdefault("crystal", {})["sellmeier_file"] = args.sellmeier_file
    if args.samples_file:
        flags.setdefault("run", {})["samples_file"] = args.samples_file
    return flags


def load_config(args):
    if args.seed is not None and args.seed < 0:
        raise ConfigError("--seed must be >= 0", field="--seed")
    if args.threads is not None and args.threads < 1:
        raise ConfigError("--threads must be >= 1", field="--threads")
    raw = resolve_raw(args.scenario, args.config, args.set, _flag_layer(args))
    return build_config(raw, output_dir=getattr(args, "output_dir", None), seed=args.seed, threads=args.threads)


def cmd_list(_args, out):
    for name in SCENARIOS:
        print(f"{name:<8} {SCENARIO_HELP[name]}", file=out)
    return EXIT_OK


def cmd_validate(args, out):
    cfg = load_config(args)
    print("OK", file=out)
    print(normalized_echo(cfg), end="", file=out)
    return EXIT_OK


def cmd_run(args, out):
    from .scenarios import run_scenario

    cfg = load_config(args)
    log.info("running %s into %s", cfg.scenario, cfg.output_dir)
    summary, manifest = run_scenario(cfg, normalized_echo(cfg))
    print(json.dumps({"scenario": cfg.scenario, "output_dir": str(cfg.output_dir),
                      "files": len(manifest["outputs"])}), file=out)
    return EXIT_OK


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    commands = {"run": cmd_run, "validate": cmd_validate, "list-scenarios": cmd_list}
    try:
        return commands[args.command](args, out)
    except ConfigError as exc:
        where = f" [{exc.field}]" if exc.field else ""
        print(f"config error{where}: {exc}", file=err)
        return EXIT_CONFIG
    except EtpaError as exc:
        print(f"numerical error ({type(exc).__name__}): {exc}", file=err)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"numerical error: {exc}", file=err)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=err)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
