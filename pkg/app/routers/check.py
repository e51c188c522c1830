import numpy as np

from app.errors import ConditionViolationError
from app.fixtures import format_float
from app.linalg import spectral_norm
from app.metrics import perturbation_constants, ric_auto, tail_metrics
from app.routers._instance import add_instance_args, fmt_opt, load_instance, orders, ric_seed
from app.theory import (
    check_bp_conditions,
    check_cosamp_conditions,
    cosamp_bracket,
    total_noise_param,
)


def register(subparsers) -> None:
    parser = subparsers.add_parser("check", help="evaluate the BP and CoSaMP stability conditions")
    add_instance_args(parser)
    parser.set_defaults(handler=run)


def run(args) -> None:
    inst = load_instance(args)
    s = inst.s
    full_norms = (spectral_norm(inst.A), spectral_norm(inst.A - inst.Phi))
    deltas, pcs = {}, {}
    for k in orders(s):
        seed = ric_seed(args, k)
        deltas[k] = ric_auto(inst.A, k, args.budget, args.samples, seed)
        pcs[k] = perturbation_constants(
            inst.A, inst.Phi, k, deltas[k], args.budget,
            mc_samples=args.samples, seed=seed, strict=False, full_norms=full_norms,
        )
    tm = tail_metrics(inst.x, s)
    bp = check_bp_conditions(deltas[2 * s], pcs[2 * s], pcs[s], tm)
    cs = check_cosamp_conditions(deltas[4 * s], pcs[4 * s], pcs[s], tm)

    b_norm = float(np.linalg.norm(inst.b))
    e_norm = float(np.linalg.norm(inst.e))
    try:
        eps_total = format_float(total_noise_param(pcs[s], tm, b_norm, e_norm))
    except ConditionViolationError as err:
        eps_total = f"undefined ({err.detail})"
    bracket = cosamp_bracket(inst.x, s, pcs[s], b_norm, e_norm)

    for k in orders(s):
        print(f"delta_{k} = {format_float(deltas[k].delta)} ({deltas[k].method.value}),"
              f" eps^({k})_A = {format_float(pcs[k].eps_sub)}")
    print(f"alpha_s = {format_float(tm.alpha)}, beta_s = {format_float(tm.beta)}")
    print("basis pursuit:")
    print(f"  ric condition: {fmt_opt(bp.bp_ric_ok)} (margin {fmt_opt(bp.bp_ric_margin)})")
    print(f"  tail condition: {fmt_opt(bp.bp_tail_ok)} (margin {fmt_opt(bp.bp_tail_margin)})")
    print(f"  eps_(A,s,b) = {eps_total}")
    print("cosamp:")
    print(f"  ric condition: {fmt_opt(cs.cosamp_ric_ok)} (margin {fmt_opt(cs.cosamp_ric_margin)})")
    print(f"  tail condition: {fmt_opt(cs.cosamp_tail_ok)} (margin {fmt_opt(cs.cosamp_tail_margin)})")
    print(f"  decoder delta_4s bound: {fmt_opt(cs.decoder_ric_bound)}")
    print("  bracket: " + " + ".join(format_float(t) for t in bracket.cosamp_terms)
          + f" = {format_float(bracket.cosamp_total)}")
