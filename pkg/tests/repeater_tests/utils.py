from typing import Tuple

from skcvr.bounds import transmissivity
from skcvr.fock.state import DensityOp
from skcvr.repeater import ChainConfig, PolarGrid, nla_link_state, reverse_modes


def eta_at(distance: float) -> float:
    return float(transmissivity(distance))


def create_small_chain(n_links: int = 2, **kwargs) -> ChainConfig:
    """chain with a coarse grid and low cutoffs so that a full evaluation takes a few seconds"""
    params = dict(
        n_links=n_links,
        chi=0.3,
        gain=1.5,
        cutoff=6,
        corrected_cutoff=4,
        grid=PolarGrid(8, 4),
    )
    params.update(kwargs)
    return ChainConfig(**params)  # type: ignore[arg-type]


def create_link_pair(
    chi: float = 0.3, eta: float = 0.5, gain: float = 1.5, cutoff: int = 8
) -> Tuple[DensityOp, DensityOp]:
    """a link state and its mirror image, ready to be swapped on their inner modes"""
    left = nla_link_state(chi, eta, gain, cutoff)
    return left, reverse_modes(left)
