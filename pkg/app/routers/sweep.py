import logging

from app import settings
from app.harness import load_config, run_experiment, store_records, write_csv
from schemas import Algorithm

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("sweep", help="run a seeded experiment grid from a config file")
    parser.add_argument("config", help="flat key = value config file")
    parser.add_argument("--out", required=True, help="CSV output path")
    parser.add_argument("--summary", default=None, help="fit summary JSON path")
    parser.add_argument("--workers", type=int, default=settings.DEFAULT_WORKERS)
    parser.add_argument("--db", default=None, metavar="URL", help="also store the run in this database")
    parser.set_defaults(handler=run)


def run(args) -> None:
    cfg = load_config(args.config)
    records, report = run_experiment(cfg, workers=max(1, args.workers))
    write_csv(args.out, records)
    print(f"wrote {len(records)} trials to {args.out}")

    if args.summary:
        with open(args.summary, "w") as f:
            f.write(report.json(indent=2) + "\n")
        print(f"wrote fit summary to {args.summary}")

    for fit in report.fits:
        gated = fit.gated
        label = "C" if fit.algorithm == Algorithm.cosamp else "C0, C1"
        value = gated.constant if fit.algorithm == Algorithm.cosamp else (gated.c0, gated.c1)
        print(f"{fit.algorithm.value}: gated {label} = {value} on {gated.train_count} train /"
              f" {gated.test_count} test trials, coverage {gated.coverage};"
              f" exact recovery {fit.exact_recovery_ok}/{fit.exact_recovery_trials}")

    if args.db:
        from database import make_session_factory

        session = make_session_factory(args.db)()
        try:
            run_id = store_records(session, cfg, records)
        finally:
            session.close()
        print(f"stored run {run_id} in {args.db}")
