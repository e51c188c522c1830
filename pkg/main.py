import argparse
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError
from sqlalchemy.exc import SQLAlchemyError

from app import settings
from app.errors import CSRecoveryError
from app.routers import check, recover, ric, snr, sweep, thresholds

# 서브커맨드 등록 순서가 --help 표시 순서
ROUTERS = (ric, recover, sweep, check, thresholds, snr)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="csrecovery",
        description="Sparse recovery with a perturbed decoding matrix: CoSaMP, BPDN and their stability conditions",
    )
    parser.add_argument("--log-level", default=settings.LOG_LEVEL,
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    subparsers = parser.add_subparsers(dest="command", required=True)
    for router in ROUTERS:
        router.register(subparsers)
    return parser


def _first_error(err: ValidationError) -> str:
    first = err.errors()[0]
    where = ".".join(str(loc) for loc in first["loc"])
    return f"{where}: {first['msg']}" if where else first["msg"]


def cli(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse: 사용법 오류는 2, --help 는 0
        return exc.code if isinstance(exc.code, int) else 0

    logging.basicConfig(
        level=args.log_level,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    try:
        args.handler(args)
    except CSRecoveryError as e:
        print(f"error: {e.detail}", file=sys.stderr)
        return e.exit_code
    except ValidationError as e:
        print(f"error: invalid input: {_first_error(e)}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except SQLAlchemyError as e:
        print(f"error: database: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(cli())
