"""
서브커맨드 공통 인스턴스 옵션

파일 입력 (--matrix, --phi, --signal, --noise-file) 이 있으면 그것을 쓰고, 없으면
--kind/--m/--d/--s/--seed ... 로 하네스와 같은 방식으로 생성한다.
"""

import argparse
from typing import Tuple

import numpy as np

from app import settings
from app.errors import DimensionError
from app.fixtures import format_float, read_matrix, read_vector
from app.harness import make_instance
from app.linalg import as_vector
from app.seeding import STREAM_RIC, derive_seed
from schemas import EnsembleKind, EnsembleSpec, ProblemInstance, SignalSpec


def add_instance_args(parser: argparse.ArgumentParser) -> None:
    files = parser.add_argument_group("instance from files")
    files.add_argument("--matrix", metavar="FILE", help="encoder A")
    files.add_argument("--phi", metavar="FILE", help="decoder Phi (default: A)")
    files.add_argument("--signal", metavar="FILE", help="signal x")
    files.add_argument("--noise-file", metavar="FILE", help="noise e (default: zero)")

    gen = parser.add_argument_group("generated instance")
    gen.add_argument("--kind", choices=[k.value for k in EnsembleKind], default="gaussian")
    gen.add_argument("--m", type=int, default=25)
    gen.add_argument("--d", type=int, default=50)
    gen.add_argument("--s", type=int, default=3, help="sparsity order")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--eps-target", type=float, default=0.0, help="target eps^(s)_A of Phi")
    gen.add_argument("--noise", type=float, default=0.0, help="||e||_2")
    gen.add_argument("--tail-alpha", type=float, default=0.0)
    gen.add_argument("--tail-beta", type=float, default=0.0)

    parser.add_argument("--budget", type=int, default=settings.DEFAULT_BUDGET,
                        help="largest subset count enumerated exactly")
    parser.add_argument("--samples", type=int, default=settings.DEFAULT_MC_SAMPLES,
                        help="Monte-Carlo subsets past the budget")


def load_instance(args: argparse.Namespace, need_signal: bool = True) -> ProblemInstance:
    if args.matrix is None:
        ensemble = EnsembleSpec(kind=args.kind, m=args.m, d=args.d)
        signal = SignalSpec(d=args.d, s=args.s, tail_alpha=args.tail_alpha, tail_beta=args.tail_beta)
        return make_instance(ensemble, signal, args.eps_target, args.noise, args.seed, args.budget, args.samples)

    A = read_matrix(args.matrix)
    Phi = read_matrix(args.phi) if args.phi else A
    if Phi.shape != A.shape:
        raise DimensionError(f"Phi {Phi.shape} and A {A.shape} differ in shape")
    m, d = A.shape
    if args.signal:
        x = read_vector(args.signal)
    elif need_signal:
        raise DimensionError("--signal FILE is required with --matrix for this command")
    else:
        x = np.zeros(d)
    if x.shape[0] != d:
        raise DimensionError(f"signal has length {x.shape[0]}, A has {d} columns")
    e = read_vector(args.noise_file) if args.noise_file else as_vector(np.zeros(m))
    if e.shape[0] != m:
        raise DimensionError(f"noise has length {e.shape[0]}, A has {m} rows")
    return ProblemInstance(A=A, Phi=Phi, x=x, e=e, s=args.s)


def ric_seed(args: argparse.Namespace, order: int) -> int:
    return derive_seed(args.seed, STREAM_RIC, order)


def orders(s: int) -> Tuple[int, int, int]:
    return s, 2 * s, 4 * s


def fmt_opt(value) -> str:
    if value is None:
        return "undefined"
    if isinstance(value, bool):
        return "yes" if value else "no"
    return format_float(value)
