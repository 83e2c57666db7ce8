import argparse
import os
import sys
from contextlib import nullcontext
from typing import List, Optional

# Config & Logging
import config.config as cfg

from controller.command_controller import EXIT_INVALID, Command, CommandController
from schema.scenario import SweepSpec
from utils.errors import ResilienceError
from utils.scenario_loader import list_bundled_scenarios, resolve_scenario


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sdc-ckpt",
        description="Checkpoint-Perioden bei stillen Datenfehlern: Analytik und Monte-Carlo-Simulation",
    )
    parser.add_argument("command", nargs="?", choices=[c.value for c in Command])
    parser.add_argument("--scenario", help="Pfad zu einer YAML-Datei oder Name eines mitgelieferten Szenarios")
    parser.add_argument("--out", help="Ausgabedatei (Standard: stdout)")
    parser.add_argument("--trials", type=int, help=f"Anzahl Läufe (Standard: {cfg.DEFAULT_TRIALS})")
    parser.add_argument("--seed", type=int, help="Seed für die Zufallsströme")
    parser.add_argument("--sweep", help="Sweep-Achse, z.B. T=2000s:20000s:100 oder k=1:20")
    parser.add_argument("--format", dest="fmt", choices=["csv", "json"], help="Ausgabeformat")
    parser.add_argument("--workers", type=int, default=cfg.DEFAULT_WORKERS, help="Prozesse für die Simulation")
    parser.add_argument("--report", help="Markdown-Bericht zusätzlich schreiben (optimize, validate)")
    parser.add_argument("--list-scenarios", action="store_true", help="Mitgelieferte Szenarien auflisten")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logger = cfg.setup_logging("SDC_Checkpoint")

    if args.list_scenarios:
        for name in list_bundled_scenarios():
            print(name)
        return 0
    if not args.command or not args.scenario:
        logger.error("command und --scenario sind erforderlich")
        return EXIT_INVALID
    if args.trials is not None and args.trials < 1:
        logger.error(f"--trials muss >= 1 sein, erhalten {args.trials}")
        return EXIT_INVALID

    try:
        scenario = resolve_scenario(args.scenario)
        sweep = SweepSpec.parse_cli(args.sweep) if args.sweep else None
    except ResilienceError as e:
        logger.error(f"Szenario ungültig: {e}")
        return e.exit_code

    if args.out:
        os.makedirs(os.path.dirname(os.path.abspath(args.out)), exist_ok=True)
    sink_context = open(args.out, "w", encoding="utf-8", newline="") if args.out else nullcontext(sys.stdout)
    with sink_context as sink:
        controller = CommandController(scenario, sink, fmt=args.fmt, trials=args.trials, seed=args.seed,
                                       sweep=sweep, workers=args.workers, report_path=args.report)
        result = controller.run(Command(args.command))
    return result["exit_code"]


if __name__ == "__main__":
    sys.exit(main())
