import logging
from typing import Dict, Sequence, Tuple

import numpy as np

from skcvr.errors import InvalidParameterError
from skcvr.fock.gates import apply_mode_operator, check_modes, displacement_matrix
from skcvr.fock.state import DensityOp, FockArray, State, combine_tails

logger = logging.getLogger(__name__)


def project_photons(state: State, mode: int, n: int) -> Tuple[State, float]:
    """project one mode onto |n> and drop it; the returned state is unnormalized"""
    check_modes(state, [mode])
    if not 0 <= n <= state.cutoffs[mode]:
        raise InvalidParameterError(
            "photon number {} exceeds cutoff {} of mode {}".format(n, state.cutoffs[mode], mode)
        )
    if isinstance(state, FockArray):
        amps = np.take(state.amplitudes, n, axis=mode)
        out_ket = FockArray(amps, state.tail)
        return out_ket, out_ket.norm2()

    t = state.tensor
    t = np.take(t, n, axis=mode + state.n_modes)
    t = np.take(t, n, axis=mode)
    out = DensityOp.from_tensor(t, state.tail)
    return out, out.trace()


def project_pattern(state: State, pattern: Dict[int, int]) -> Tuple[State, float]:
    """project several modes at once; keys are mode indices of the input state"""
    out = state
    for mode in sorted(pattern, reverse=True):
        out, _ = project_photons(out, mode, pattern[mode])
    if isinstance(out, FockArray):
        return out, out.norm2()
    return out, out.trace()


def project_total_photons(state: State, modes: Sequence[int], n: int) -> Tuple[State, float]:
    """non-demolition projection onto total photon number n over the given modes"""
    check_modes(state, modes)
    grids = np.meshgrid(*[np.arange(c + 1) for c in state.cutoffs], indexing="ij")
    total = sum(grids[m] for m in modes)
    mask = (total == n).astype(float)
    if isinstance(state, FockArray):
        out_ket = FockArray(state.amplitudes * mask, state.tail)
        return out_ket, out_ket.norm2()
    flat_mask = mask.reshape(-1)
    out = DensityOp(state.matrix * np.outer(flat_mask, flat_mask), state.cutoffs, state.tail)
    return out, out.trace()


def partial_trace(state: State, modes: Sequence[int]) -> DensityOp:
    """trace out the listed modes"""
    modes = sorted(set(modes))
    if len(modes) == 0:
        if isinstance(state, FockArray):
            return state.to_density()
        return state
    check_modes(state, modes)
    if len(modes) == state.n_modes:
        raise InvalidParameterError("tracing out every mode leaves nothing")
    keep = [m for m in range(state.n_modes) if m not in modes]

    if isinstance(state, FockArray):
        amps = np.moveaxis(state.amplitudes, keep, list(range(len(keep))))
        keep_dims = amps.shape[: len(keep)]
        flat = amps.reshape(int(np.prod(keep_dims)), -1)
        matrix = flat @ flat.conj().T
        return DensityOp(matrix, tuple(d - 1 for d in keep_dims), state.tail)

    t = state.tensor
    n = state.n_modes
    for i, m in enumerate(modes):
        # each trace removes two axes, shifting the column axes of later modes
        current_n = n - i
        row = m - i
        t = np.trace(t, axis1=row, axis2=row + current_n)
    return DensityOp.from_tensor(t, state.tail)


def _diagonal_pair(t: np.ndarray, axis_a: int, axis_b: int) -> np.ndarray:
    moved = np.moveaxis(t, [axis_a, axis_b], [0, 1])
    return np.einsum("nn...->...", moved)


def dual_homodyne_project(
    state: State, modes: Tuple[int, int], gamma: complex
) -> Tuple[State, float]:
    """project two modes onto |gamma> = pi^(-1/2) sum_n D_i(gamma)|n>|n>

    The displacement acts on the first of the two modes. Returns the unnormalized state of the
    remaining modes and the probability density at gamma.
    """
    i, j = modes
    check_modes(state, [i, j])
    c = state.cutoffs[j]
    shift = displacement_matrix(-gamma, c, state.cutoffs[i])
    displaced = apply_mode_operator(state, [i], shift, [c])
    remaining = [m for m in range(state.n_modes) if m not in (i, j)]
    if isinstance(displaced, FockArray):
        amps = _diagonal_pair(displaced.amplitudes, i, j) / np.sqrt(np.pi)
        out_ket = FockArray(amps, state.tail)
        return out_ket, out_ket.norm2()

    n = displaced.n_modes
    t = _diagonal_pair(displaced.tensor, i + n, j + n)
    t = _diagonal_pair(t, i, j) / np.pi
    out = DensityOp.from_tensor(t, state.tail)
    logger.debug("dual homodyne at {} leaves modes {}".format(gamma, remaining))
    return out, out.trace()


def single_mode_marginal(rho: DensityOp, mode: int) -> np.ndarray:
    others = [m for m in range(rho.n_modes) if m != mode]
    if len(others) == 0:
        return rho.matrix
    return partial_trace(rho, others).matrix


def swap_density(left_marginal: np.ndarray, right_marginal: np.ndarray, gamma: complex) -> float:
    """probability density of a dual-homodyne outcome on two independent modes

    left_marginal is displaced by -gamma; both arguments are single-mode density matrices.
    """
    c = right_marginal.shape[0] - 1
    d = displacement_matrix(-gamma, c, left_marginal.shape[0] - 1)
    displaced = d @ left_marginal @ d.conj().T
    return float(np.real(np.sum(displaced * right_marginal)) / np.pi)


def dual_homodyne_swap(
    left: DensityOp,
    right: DensityOp,
    left_mode: int,
    right_mode: int,
    gamma: complex,
) -> Tuple[DensityOp, float]:
    """entanglement swapping of two independent states without forming their product

    left_mode of the left state (displaced by -gamma) and right_mode of the right state are
    projected onto |gamma>. The output modes are the remaining left modes followed by the
    remaining right modes.
    """
    check_modes(left, [left_mode])
    check_modes(right, [right_mode])
    c = right.cutoffs[right_mode]
    displaced = apply_mode_operator(
        left, [left_mode], displacement_matrix(-gamma, c, left.cutoffs[left_mode]), [c]
    )
    assert isinstance(displaced, DensityOp)

    nl = left.n_modes
    nr = right.n_modes
    lt = np.moveaxis(displaced.tensor, [left_mode, left_mode + nl], [-2, -1])
    l_rest = lt.shape[: 2 * (nl - 1)]
    rt = np.moveaxis(right.tensor, [right_mode, right_mode + nr], [0, 1])
    r_rest = rt.shape[2:]
    d2 = (c + 1) ** 2
    product = lt.reshape(-1, d2) @ rt.reshape(d2, -1) / np.pi
    product = product.reshape(l_rest + r_rest)

    # reorder to (left rows, right rows, left cols, right cols)
    kl = nl - 1
    kr = nr - 1
    order = (
        list(range(kl))
        + list(range(2 * kl, 2 * kl + kr))
        + list(range(kl, 2 * kl))
        + list(range(2 * kl + kr, 2 * kl + 2 * kr))
    )
    tail = combine_tails(left.tail, right.tail)
    out = DensityOp.from_tensor(np.transpose(product, order), tail)
    return out, out.trace()
