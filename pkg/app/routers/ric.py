from app.fixtures import format_float
from app.metrics import perturbation_constants, ric_auto
from app.routers._instance import add_instance_args, fmt_opt, load_instance, ric_seed


def register(subparsers) -> None:
    parser = subparsers.add_parser("ric", help="RIC, ||A||^(s) and perturbation constants")
    add_instance_args(parser)
    parser.add_argument("--order", type=int, default=None, help="order k (default: --s)")
    parser.set_defaults(handler=run)


def run(args) -> None:
    inst = load_instance(args, need_signal=False)
    k = args.order or args.s
    seed = ric_seed(args, k)
    delta = ric_auto(inst.A, k, args.budget, args.samples, seed)
    pc = perturbation_constants(
        inst.A, inst.Phi, k, delta, args.budget,
        mc_samples=args.samples, seed=seed, strict=False,
    )
    print(f"delta_{k} = {format_float(delta.delta)}  ({delta.method.value}, {delta.subsets_examined} subsets)")
    print(f"||A||^({k}) = {format_float(pc.norm_sub)}  ({pc.method.value})")
    print(f"||A||_2 = {format_float(pc.norm_full)}")
    print(f"eps_A = {format_float(pc.eps_full)}")
    print(f"eps^({k})_A = {format_float(pc.eps_sub)}")
    print(f"||A-Phi||_2 = {format_float(pc.abs_full)}")
    print(f"||A-Phi||^({k}) = {format_float(pc.abs_sub)}")
    print(f"kappa^({k})_A = {fmt_opt(pc.kappa)}")
    print(f"gamma_A = {fmt_opt(pc.gamma)}")