import logging
import multiprocessing
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence, Tuple

import threadpoolctl
from tqdm import tqdm

from skcvr.bounds import DEFAULT_ATTENUATION, nlink_bound, plob, transmissivity
from skcvr.curve import RateCurve, RatePoint
from skcvr.errors import InvalidParameterError

logger = logging.getLogger(__name__)


class RateProtocol(ABC):
    """a protocol whose achievable rate is evaluated point by point along a distance grid

    Concrete protocols are dataclasses so that they can be shipped to worker processes.
    """

    attenuation: float = DEFAULT_ATTENUATION

    @property
    @abstractmethod
    def n_links(self) -> int:
        """number of links, which selects the applicable converse bound"""
        ...

    def evaluate(self, distance: float) -> RatePoint:
        ts = time.time()
        eta = float(transmissivity(distance, self.attenuation))
        point = self._evaluate(distance, eta)
        point.metadata["eta"] = eta
        point.metadata["plob"] = float(plob(eta))
        point.metadata["nlink_bound"] = float(nlink_bound(eta, self.n_links))
        logger.debug(
            "{} at {} km: rate {:.4e} ({:.3f} sec)".format(
                type(self).__name__, distance, point.rate, time.time() - ts
            )
        )
        return point

    @abstractmethod
    def _evaluate(self, distance: float, eta: float) -> RatePoint:
        ...

    def describe(self) -> Dict[str, Any]:
        """configuration echo written next to sweep outputs"""
        return {"protocol": type(self).__name__, "attenuation": self.attenuation}


@dataclass
class SweepConfig:
    n_process: int = 1
    progress: bool = False

    def __post_init__(self):
        if self.n_process < 1:
            raise InvalidParameterError("n_process must be >= 1, got {}".format(self.n_process))


def _evaluate_in_worker(job: Tuple[RateProtocol, float]) -> RatePoint:
    """assume to be used in multi processing"""
    protocol, distance = job
    # prevent numpy from using multi-thread inside each worker
    with threadpoolctl.threadpool_limits(limits=1, user_api="blas"):
        return protocol.evaluate(distance)


def sweep_rate_vs_distance(
    protocol: RateProtocol, distances: Sequence[float], config: Optional[SweepConfig] = None
) -> RateCurve:
    """evaluate a protocol on every distance of the grid, rows ordered as the grid"""
    if config is None:
        config = SweepConfig()
    distances = [float(d) for d in distances]
    if len(distances) == 0:
        return RateCurve()

    ts = time.time()
    if config.n_process > 1 and len(distances) > 1:
        jobs = [(protocol, d) for d in distances]
        with multiprocessing.Pool(min(config.n_process, len(distances))) as pool:
            # imap keeps grid order whatever the completion order
            results = pool.imap(_evaluate_in_worker, jobs)
            points = list(tqdm(results, total=len(jobs), disable=not config.progress))
    else:
        points = [protocol.evaluate(d) for d in tqdm(distances, disable=not config.progress)]
    logger.info(
        "swept {} points of {} in {:.2f} sec".format(
            len(points), type(protocol).__name__, time.time() - ts
        )
    )
    return RateCurve(points)
