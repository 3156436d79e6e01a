import logging
import time
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import Bounds, minimize

from skcvr.errors import NumericalFailure

logger = logging.getLogger(__name__)


@dataclass
class OptimizationConfig:
    ftol: float = 1e-9
    disp: bool = False
    n_max_eval: int = 200
    finite_diff_step: float = 1e-6


@dataclass
class OptimizationResult:
    x: np.ndarray
    value: float
    elapsed_time: float
    success: bool


def maximize_by_optimization(
    fun: Callable[[np.ndarray], float],
    x_seed: np.ndarray,
    bounds: Sequence[Tuple[float, float]],
    config: Optional[OptimizationConfig] = None,
) -> OptimizationResult:
    """maximize a smooth objective inside a box with SLSQP"""
    ts = time.time()
    if config is None:
        config = OptimizationConfig()

    lb = np.array([b[0] for b in bounds])
    ub = np.array([b[1] for b in bounds])

    def objective(x: np.ndarray) -> float:
        value = fun(x)
        if not np.isfinite(value):
            raise NumericalFailure("objective returned {} at {}".format(value, x))
        return -value

    slsqp_option: Dict = {
        "ftol": config.ftol,
        "disp": config.disp,
        "maxiter": config.n_max_eval - 1,
        "eps": config.finite_diff_step,
    }
    res = minimize(
        objective,
        np.clip(x_seed, lb, ub),
        method="SLSQP",
        bounds=Bounds(lb, ub, keep_feasible=True),  # type: ignore
        options=slsqp_option,
    )
    elapsed_time = time.time() - ts
    logger.debug("SLSQP finished: value {} at {} ({})".format(-res.fun, res.x, res.message))
    return OptimizationResult(np.array(res.x), float(-res.fun), elapsed_time, bool(res.success))


def maximize_with_budget(
    fun: Callable[[np.ndarray], float],
    x_seed: Optional[np.ndarray],
    bounds: Sequence[Tuple[float, float]],
    config: Optional[OptimizationConfig] = None,
    n_trial_budget: int = 5,
    seed: int = 0,
) -> OptimizationResult:
    """keep the best of several SLSQP runs, the first from x_seed and the rest from random seeds"""
    ts = time.time()
    rng = np.random.default_rng(seed)
    lb = np.array([b[0] for b in bounds])
    ub = np.array([b[1] for b in bounds])

    best: Optional[OptimizationResult] = None
    for _ in range(n_trial_budget):
        if x_seed is None:
            x_seed = rng.uniform(lb, ub)
        res = maximize_by_optimization(fun, x_seed, bounds, config=config)
        if best is None or (res.value > best.value):
            best = res
        x_seed = None  # the remaining trials start from random seeds

    assert best is not None
    best.elapsed_time = time.time() - ts
    return best


def maximize_scalar_on_grid(
    fun: Callable[[float], float], grid: Sequence[float]
) -> Tuple[float, float]:
    """coarse grid maximization used to seed SLSQP on one-dimensional problems"""
    values = [fun(x) for x in grid]
    i = int(np.argmax(values))
    return float(grid[i]), float(values[i])
