# msvi/services/problems.py
from __future__ import annotations

import logging
from typing import Any, Callable, Dict, NamedTuple, Optional, Tuple, Type

import numpy as np
from pydantic import BaseModel, ValidationError

from msvi.core.config import settings
from msvi.core.exceptions import ConfigError
from msvi.models.convex_sets import BoxSet, PointwiseSet
from msvi.models.operators import AffineOperator, RankOneOperator
from msvi.models.problems import DEFAULT_ETA_NOISE, ProblemInstance, RandomAffineParams, RandomWalkSocpParams
from msvi.models.prob_space import RandomVector, SampleSpace
from msvi.services.filtration import filtration_from_signals, two_stage

logger = logging.getLogger(__name__)


def gen_random_affine(m: int, n0: int, n1: int, seed: int) -> ProblemInstance:
    """Instancia aleatoria de dos etapas con F(x)(ω_i) = A_i^T A_i x(ω_i) + b_i y C = [-1, 1]^{n0+n1}.

    Orden de sorteo (PCG64): probabilidades, A (m x n x n), b (m x n).
    """
    if m < 1 or n0 < 1 or n1 < 1:
        raise ConfigError(f"tamaños inválidos: m={m}, n0={n0}, n1={n1}")
    rng = np.random.default_rng(seed)
    n = n0 + n1

    # 1) probabilidades con piso 1/(10m)
    raw = rng.random(m)
    probs = 1.0 / (10 * m) + 0.9 * raw / raw.sum()
    probs = probs / probs.sum()
    space = SampleSpace(probabilities=probs)

    # 2) operador monótono M_i = A_i^T A_i
    A = rng.uniform(-1.0, 1.0, size=(m, n, n))
    matrices = np.einsum("mki,mkj->mij", A, A)
    offsets = rng.uniform(-1.0, 1.0, size=(m, n))

    sets = PointwiseSet.uniform(space, (BoxSet.cube(n0), BoxSet.cube(n1)))
    instance = ProblemInstance(
        space=space,
        filtration=two_stage(space, n0, n1),
        sets=sets,
        operator=AffineOperator(space=space, matrices=matrices, offsets=offsets),
        seed=seed,
        family="random_affine",
        params={"m": m, "n0": n0, "n1": n1},
    )
    logger.debug("instancia afín generada | m=%s | n0=%s | n1=%s | seed=%s", m, n0, n1, seed)
    return instance


class RandomWalkTree(NamedTuple):
    """Árbol exacto de caminatas aleatorias: 2^(N ell) átomos equiprobables.

    El átomo a codifica los pasos xi_1..xi_{N ell} en sus bits, del más
    significativo al menos, así que los prefijos comunes son contiguos.
    """

    N: int
    ell: int
    steps: np.ndarray  # m x (N ell), valores ±1
    increments: np.ndarray  # m x N, S_{(i+1) ell} - S_{i ell} (enteros)
    delta_y: np.ndarray  # m x N
    delta: float
    z: np.ndarray  # m x N, Z_i = (1 + Delta)^{N-1-i} Lambda_i
    zeta: np.ndarray  # m, sum_i Z_i
    eta: np.ndarray  # m, estado final con control constante 1

    @property
    def atom_count(self) -> int:
        return int(self.steps.shape[0])


def random_walk_tree(N: int, ell: int) -> RandomWalkTree:
    if N < 1 or ell < 1:
        raise ConfigError(f"tamaños inválidos: N={N}, ell={ell}")
    total = N * ell
    if total > settings.SOCP_MAX_STEPS:
        raise ConfigError(
            f"N*ell={total} supera el tope {settings.SOCP_MAX_STEPS} (2^{total} átomos)"
        )
    m = 2 ** total
    atoms = np.arange(m, dtype=np.int64)
    shifts = np.arange(total - 1, -1, -1, dtype=np.int64)
    steps = (2 * ((atoms[:, None] >> shifts[None, :]) & 1) - 1).astype(np.int64)
    increments = steps.reshape(m, N, ell).sum(axis=2)
    delta_y = increments / np.sqrt(total)
    delta = 1.0 / N
    psi = 1.0 + delta
    lam = -delta + delta_y
    z = lam * psi ** np.arange(N - 1, -1, -1, dtype=float)[None, :]
    zeta = z.sum(axis=1)
    eta = psi ** N + zeta
    return RandomWalkTree(
        N=N, ell=ell, steps=steps, increments=increments, delta_y=delta_y,
        delta=delta, z=z, zeta=zeta, eta=eta,
    )


def simulate_terminal_state(tree: RandomWalkTree, u: np.ndarray) -> np.ndarray:
    """x_{i+1} = x_i + (x_i - u_i) Delta + u_i DeltaY_i con x_0 = 1; devuelve x_N por átomo."""
    controls = np.asarray(u, dtype=float)
    if controls.ndim == 1:
        controls = np.broadcast_to(controls, (tree.atom_count, tree.N))
    x = np.ones(tree.atom_count)
    for i in range(tree.N):
        x = x + (x - controls[:, i]) * tree.delta + controls[:, i] * tree.delta_y[:, i]
    return x


def socp_cost(tree: RandomWalkTree, u: np.ndarray, eta: Optional[np.ndarray] = None) -> float:
    """J(u) = 1/2 E|x_N - eta|^2 (átomos equiprobables)."""
    target = tree.eta if eta is None else np.asarray(eta, dtype=float)
    gap = simulate_terminal_state(tree, u) - target
    return 0.5 * float(np.mean(gap * gap))


def gen_random_walk_socp(
    N: int,
    ell: int,
    seed_free: bool = True,
    seed: int = 0,
    noise: float = DEFAULT_ETA_NOISE,
) -> ProblemInstance:
    """Control óptimo estocástico discretizado por caminatas aleatorias.

    F(u)(ω) = z(ω) z(ω)^T u(ω) - zeta(ω) z(ω) es el gradiente de J, y la VI
    se plantea como -F(u*) ∈ N_{C∩N}(u*). Con seed_free=True el óptimo es
    u* ≡ 1; con seed_free=False el objetivo eta recibe ruido gaussiano
    sembrado y no hay solución conocida.
    """
    tree = random_walk_tree(N, ell)
    m = tree.atom_count
    space = SampleSpace.uniform(m)
    # F_i = sigma(DeltaY_0, ..., DeltaY_{i-1}); los incrementos enteros generan la misma sigma-álgebra
    signals = [tree.increments[:, i] for i in range(N - 1)]
    filtration = filtration_from_signals(space, signals, (1,) * N)

    zeta = tree.zeta
    known: Optional[RandomVector] = RandomVector(space=space, values=np.ones((m, N)), blocks=(1,) * N)
    if not seed_free:
        rng = np.random.default_rng(seed)
        zeta = zeta + noise * rng.standard_normal(m)
        known = None

    instance = ProblemInstance(
        space=space,
        filtration=filtration,
        sets=PointwiseSet.uniform(space, tuple(BoxSet.cube(1, 0.0, 1.0) for _ in range(N))),
        operator=RankOneOperator(space=space, factors=tree.z, offsets=-zeta[:, None] * tree.z),
        known_solution=known,
        seed=seed,
        family="random_walk_socp",
        params={"N": N, "ell": ell, "seed_free": seed_free, "noise": noise},
    )
    logger.debug("instancia SOCP generada | N=%s | ell=%s | atomos=%s | seed_free=%s", N, ell, m, seed_free)
    return instance


def _random_affine(params: RandomAffineParams, seed: int) -> ProblemInstance:
    return gen_random_affine(params.m, params.n0, params.n1, seed)


def _random_walk_socp(params: RandomWalkSocpParams, seed: int) -> ProblemInstance:
    return gen_random_walk_socp(params.N, params.ell, seed_free=params.seed_free, seed=seed, noise=params.noise)


GENERATORS: Dict[str, Tuple[Type[BaseModel], Callable[[Any, int], ProblemInstance]]] = {
    "random_affine": (RandomAffineParams, _random_affine),
    "random_walk_socp": (RandomWalkSocpParams, _random_walk_socp),
}


def validate_params(family: str, params: Dict[str, Any]) -> BaseModel:
    """Valida `params` contra el modelo de la familia; deja pasar el ValidationError."""
    entry = GENERATORS.get(family)
    if entry is None:
        raise ConfigError(f"generador desconocido: {family!r} (disponibles: {', '.join(sorted(GENERATORS))})")
    return entry[0].model_validate(params)


def params_error_field(exc: ValidationError) -> str:
    return ".".join(str(part) for part in exc.errors()[0]["loc"])


def generate(family: str, params: Dict[str, Any], seed: int) -> ProblemInstance:
    try:
        validated = validate_params(family, params)
    except ValidationError as exc:
        err = exc.errors()[0]
        name = params_error_field(exc)
        if err["type"] == "missing":
            raise ConfigError(f"falta el parámetro {name!r} para el generador {family!r}") from exc
        raise ConfigError(f"parámetro {name!r} inválido para el generador {family!r}: {err['msg']}") from exc
    return GENERATORS[family][1](validated, seed)
