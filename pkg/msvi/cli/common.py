from __future__ import annotations

import argparse
from typing import Any, Dict

from msvi.core.config import settings
from msvi.core.exceptions import ConfigError
from msvi.models.problem_file import GeneratorSpec
from msvi.services.problems import DEFAULT_ETA_NOISE, GENERATORS


def add_source_flags(parser: argparse.ArgumentParser, allow_file: bool = True) -> None:
    group = parser.add_argument_group("problema")
    if allow_file:
        group.add_argument("--problem", type=str, default=None, help="archivo JSON de problema")
    group.add_argument("--family", choices=sorted(GENERATORS), default=None, help="familia generadora")
    group.add_argument("--seed", type=int, default=0, help="semilla base (repetición t usa seed + t)")
    group.add_argument("--m", type=int, default=10, help="random_affine: átomos")
    group.add_argument("--n0", type=int, default=5, help="random_affine: dimensión de la etapa 0")
    group.add_argument("--n1", type=int, default=5, help="random_affine: dimensión de la etapa 1")
    group.add_argument("--N", type=int, default=3, help="random_walk_socp: etapas")
    group.add_argument("--ell", type=int, default=2, help="random_walk_socp: pasos por etapa")
    group.add_argument(
        "--noisy",
        action="store_true",
        help="random_walk_socp: perturba el objetivo con ruido sembrado (sin solución conocida)",
    )
    group.add_argument("--noise", type=float, default=DEFAULT_ETA_NOISE, help="desvío del ruido de --noisy")


def add_solver_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("solver")
    group.add_argument("--eps", type=float, default=settings.DEFAULT_EPS)
    group.add_argument("--max-iter", dest="max_iter", type=int, default=settings.DEFAULT_MAX_ITER)
    group.add_argument("--alpha", type=float, default=settings.DEFAULT_ALPHA)
    group.add_argument("--beta-scale", dest="beta_scale", type=float, default=settings.DEFAULT_BETA_SCALE)
    group.add_argument("--inner-tol", dest="inner_tol", type=float, default=None, help="PHA: por defecto eps/10")
    group.add_argument(
        "--max-inner-iter", dest="max_inner_iter", type=int, default=settings.PHA_MAX_INNER_ITER
    )
    group.add_argument("--assert-theory", dest="assert_theory", action="store_true")


def generator_params(args: argparse.Namespace) -> Dict[str, Any]:
    if args.family == "random_affine":
        return {"m": args.m, "n0": args.n0, "n1": args.n1}
    if args.family == "random_walk_socp":
        return {"N": args.N, "ell": args.ell, "seed_free": not args.noisy, "noise": args.noise}
    raise ConfigError(f"generador desconocido: {args.family!r}")


def source_fields(args: argparse.Namespace) -> Dict[str, Any]:
    """Campos de RunConfig que describen la fuente del problema."""
    problem = getattr(args, "problem", None)
    if (problem is None) == (args.family is None):
        raise ConfigError("indica exactamente una fuente: --problem o --family")
    if problem is not None:
        return {"problem_path": problem}
    return {"generator": GeneratorSpec(family=args.family, params=generator_params(args), seed=args.seed)}


def solver_fields(args: argparse.Namespace) -> Dict[str, Any]:
    return {
        "eps": args.eps,
        "max_iter": args.max_iter,
        "alpha": args.alpha,
        "beta_scale": args.beta_scale,
        "inner_tol": args.inner_tol,
        "max_inner_iter": args.max_inner_iter,
        "assert_theory": args.assert_theory,
    }
