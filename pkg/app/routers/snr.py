from app.errors import InfeasibleSpecError
from app.fixtures import format_float
from app.harness import scaling_study
from app.routers._instance import add_instance_args, load_instance


def register(subparsers) -> None:
    parser = subparsers.add_parser("snr", help="recovery error as the signal is scaled")
    add_instance_args(parser)
    parser.add_argument("--scales", default="0.5,1,2,4", help="comma-separated scale factors")
    parser.set_defaults(handler=run)


def parse_scales(text: str):
    try:
        scales = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise InfeasibleSpecError(f"--scales must be comma-separated numbers, got {text!r}")
    if not scales:
        raise InfeasibleSpecError("--scales is empty")
    return scales


def run(args) -> None:
    inst = load_instance(args)
    rows = scaling_study(inst, parse_scales(args.scales))
    print("scale,signal_norm,err_abs,err_rel")
    for row in rows:
        print(",".join(format_float(v) for v in (row.scale, row.signal_norm, row.err_abs, row.err_rel)))
