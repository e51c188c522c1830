import numpy as np

from app.bpdn import bpdn_solve
from app.cosamp import cosamp_recover
from app.errors import ConditionViolationError
from app.fixtures import format_float
from app.metrics import perturbation_constants, ric_auto, tail_metrics
from app.routers._instance import add_instance_args, load_instance, ric_seed
from app.theory import total_noise_param
from schemas import Algorithm, BpdnConfig, CosampConfig


def register(subparsers) -> None:
    parser = subparsers.add_parser("recover", help="recover one instance, decoding with Phi")
    add_instance_args(parser)
    parser.add_argument("--algorithm", choices=[a.value for a in Algorithm], default="cosamp")
    parser.add_argument("--max-iters", type=int, default=None)
    parser.add_argument("--epsilon", type=float, default=None,
                        help="BPDN radius (default: ||e|| when Phi = A, else eps_{A,s,b})")
    parser.set_defaults(handler=run)


def bpdn_epsilon(inst, args) -> float:
    e_norm = float(np.linalg.norm(inst.e))
    if np.array_equal(inst.A, inst.Phi):
        return e_norm
    seed = ric_seed(args, inst.s)
    delta = ric_auto(inst.A, inst.s, args.budget, args.samples, seed)
    pc = perturbation_constants(
        inst.A, inst.Phi, inst.s, delta, args.budget,
        mc_samples=args.samples, seed=seed, strict=False,
    )
    try:
        return total_noise_param(pc, tail_metrics(inst.x, inst.s), float(np.linalg.norm(inst.b)), e_norm)
    except ConditionViolationError as err:
        raise err.with_context("cannot derive the BPDN radius, pass --epsilon")


def run(args) -> None:
    inst = load_instance(args)
    x_norm = float(np.linalg.norm(inst.x))

    if args.algorithm == Algorithm.cosamp.value:
        cfg = CosampConfig(s=inst.s, **({"max_iters": args.max_iters} if args.max_iters is not None else {}))
        result = cosamp_recover(inst.Phi, inst.y, cfg)
        estimate = result.estimate
        detail = f"stop reason: {result.stop_reason.value}"
    else:
        eps = args.epsilon if args.epsilon is not None else bpdn_epsilon(inst, args)
        cfg = BpdnConfig(epsilon=eps, **({"max_iters": args.max_iters} if args.max_iters is not None else {}))
        result = bpdn_solve(inst.Phi, inst.y, cfg)
        estimate = result.solution
        detail = (
            f"epsilon: {format_float(eps)}\n"
            f"objective: {format_float(result.objective)}\n"
            f"duality gap: {format_float(result.duality_gap)}\n"
            f"constraint slack: {format_float(result.constraint_slack)}"
        )

    err = float(np.linalg.norm(estimate - inst.x))
    print(f"algorithm: {args.algorithm}")
    print(f"error: {format_float(err)}")
    print(f"relative error: {format_float(err / x_norm) if x_norm else 'undefined'}")
    print(f"iterations: {result.iterations}")
    print(f"converged: {'yes' if result.converged else 'no'}")
    print(detail)
