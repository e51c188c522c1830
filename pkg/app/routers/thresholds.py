from app.fixtures import format_float
from app.theory import bp_perturbation_limit, cosamp_perturbation_limit


def register(subparsers) -> None:
    parser = subparsers.add_parser("thresholds", help="admissible decoder perturbation limits")
    parser.set_defaults(handler=run)


def run(args) -> None:
    bp = bp_perturbation_limit()
    cs = cosamp_perturbation_limit()
    print("basis pursuit:  sqrt(2)/(1+eps)^2 - 1 > 0   =>  eps < 2^(1/4) - 1")
    print(f"  eps_max = {format_float(bp)}  (about {round(100 * bp)}%)")
    print("cosamp:         1.1/(1+eps)^2 - 1 >= 0      =>  eps <= sqrt(1.1) - 1")
    print(f"  eps_max = {format_float(cs)}  (about {round(100 * cs)}%)")
