"""Linear-optical gates on truncated Fock states.

Beamsplitter convention: the gate is generated by theta (a^dag b - a b^dag) with T = cos^2 theta,
so that a^dag -> sqrt(T) a^dag - sqrt(1 - T) b^dag and b^dag -> sqrt(1 - T) a^dag + sqrt(T) b^dag.
In the Heisenberg picture this is a -> sqrt(T) a + sqrt(1 - T) b, which is the symplectic matrix
used by skcvr.gaussian.
"""
import logging
from functools import lru_cache
from typing import Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
from scipy.special import eval_genlaguerre, gammaln

from skcvr.errors import InvalidParameterError, check_unit_interval
from skcvr.fock.state import DensityOp, FockArray, State, combine_tails

logger = logging.getLogger(__name__)

SQUEEZE_PADDING = 40


def _contract_axes(
    t: np.ndarray, axes: Sequence[int], matrix: np.ndarray, out_dims: Tuple[int, ...]
) -> np.ndarray:
    k = len(axes)
    moved = np.moveaxis(t, list(axes), list(range(k)))
    rest_shape = moved.shape[k:]
    in_dim = int(np.prod(moved.shape[:k]))
    flat = moved.reshape(in_dim, -1)
    out = (matrix @ flat).reshape(out_dims + rest_shape)
    return np.moveaxis(out, list(range(k)), list(axes))


def check_modes(state: State, modes: Sequence[int]) -> None:
    if len(set(modes)) != len(modes):
        raise InvalidParameterError("modes must be distinct, got {}".format(modes))
    for m in modes:
        if not 0 <= m < state.n_modes:
            raise InvalidParameterError(
                "mode {} out of range for a {}-mode state".format(m, state.n_modes)
            )


def apply_mode_operator(
    state: State,
    modes: Sequence[int],
    matrix: np.ndarray,
    out_cutoffs: Sequence[int],
    track_leak: bool = False,
) -> State:
    """apply a linear map acting on a subset of modes

    matrix maps the flattened input box of the selected modes onto the flattened output box given
    by out_cutoffs. If track_leak is set, the norm lost by the map is added to the tail (use this
    for maps that are unitary before truncation).
    """
    check_modes(state, modes)
    out_dims = tuple(c + 1 for c in out_cutoffs)
    if isinstance(state, FockArray):
        amps = _contract_axes(state.amplitudes, modes, matrix, out_dims)
        tail = state.tail
        if track_leak:
            leak = max(state.norm2() - float(np.sum(np.abs(amps) ** 2)), 0.0)
            tail = combine_tails(tail, leak)
        return FockArray(amps, tail)

    n = state.n_modes
    t = _contract_axes(state.tensor, modes, matrix, out_dims)
    t = _contract_axes(t, [m + n for m in modes], matrix.conj(), out_dims)
    out = DensityOp.from_tensor(t, state.tail)
    if track_leak:
        leak = max(state.trace() - out.trace(), 0.0)
        out = DensityOp(out.matrix, out.cutoffs, combine_tails(state.tail, leak))
    return out


def _shift(poly: np.ndarray, axis: int) -> np.ndarray:
    """multiply a polynomial in creation operators by the creation operator of one mode"""
    out = np.zeros_like(poly)
    src = [slice(None)] * poly.ndim
    dst = [slice(None)] * poly.ndim
    src[axis] = slice(0, poly.shape[axis] - 1)
    dst[axis] = slice(1, poly.shape[axis])
    out[tuple(dst)] = poly[tuple(src)]
    return out


@lru_cache(maxsize=128)
def _passive_transfer_cached(
    u_bytes: bytes, n_ports: int, in_cutoffs: Tuple[int, ...], out_cutoffs: Tuple[int, ...]
) -> np.ndarray:
    u = np.frombuffer(u_bytes, dtype=complex).reshape(n_ports, n_ports)
    in_dims = tuple(c + 1 for c in in_cutoffs)
    out_dims = tuple(c + 1 for c in out_cutoffs)

    out_index = np.indices(out_dims).reshape(n_ports, -1)
    log_out_fact = 0.5 * gammaln(out_index + 1).sum(axis=0)

    polys = {}
    vac = np.zeros(out_dims, dtype=complex)
    vac[(0,) * n_ports] = 1.0
    transfer = np.zeros((int(np.prod(out_dims)), int(np.prod(in_dims))), dtype=complex)
    for col, occupation in enumerate(np.ndindex(*in_dims)):
        if sum(occupation) == 0:
            poly = vac
        else:
            l_last = max(i for i, n in enumerate(occupation) if n > 0)
            parent = list(occupation)
            parent[l_last] -= 1
            prev = polys[tuple(parent)]
            poly = sum(u[j, l_last] * _shift(prev, j) for j in range(n_ports))
        polys[occupation] = poly
        log_in_fact = 0.5 * float(gammaln(np.array(occupation) + 1).sum())
        transfer[:, col] = poly.reshape(-1) * np.exp(log_out_fact - log_in_fact)
    return transfer


def passive_transfer_matrix(
    unitary: np.ndarray, in_cutoffs: Sequence[int], out_cutoffs: Sequence[int]
) -> np.ndarray:
    """Fock representation of a passive linear-optical unitary

    Input creation operators transform as a_l^dag -> sum_j U[j, l] a_j^dag. Output components
    inside the out_cutoffs box are exact; components outside are dropped.
    """
    u = np.ascontiguousarray(unitary, dtype=complex)
    n_ports = u.shape[0]
    assert u.shape == (n_ports, n_ports)
    if len(in_cutoffs) != n_ports or len(out_cutoffs) != n_ports:
        raise InvalidParameterError("cutoff lists must match the number of ports")
    return _passive_transfer_cached(
        u.tobytes(), n_ports, tuple(int(c) for c in in_cutoffs), tuple(int(c) for c in out_cutoffs)
    )


def apply_passive_unitary(
    state: State,
    modes: Sequence[int],
    unitary: np.ndarray,
    out_cutoffs: Optional[Sequence[int]] = None,
) -> State:
    check_modes(state, modes)
    in_cutoffs = [state.cutoffs[m] for m in modes]
    if out_cutoffs is None:
        out_cutoffs = in_cutoffs
    transfer = passive_transfer_matrix(unitary, in_cutoffs, out_cutoffs)
    return apply_mode_operator(state, modes, transfer, out_cutoffs, track_leak=True)


def beamsplitter_unitary(transmissivity: float) -> np.ndarray:
    c = np.sqrt(transmissivity)
    s = np.sqrt(1.0 - transmissivity)
    return np.array([[c, s], [-s, c]], dtype=complex)


def fourier_unitary(n_ports: int) -> np.ndarray:
    """balanced multiport splitter U[j, l] = omega^(j l) / sqrt(n)"""
    j = np.arange(n_ports)
    return np.exp(2j * np.pi * np.outer(j, j) / n_ports) / np.sqrt(n_ports)


def apply_beamsplitter(
    state: State,
    modes: Tuple[int, int],
    transmissivity: float,
    out_cutoffs: Optional[Sequence[int]] = None,
) -> State:
    check_unit_interval("transmissivity", transmissivity)
    if transmissivity == 1.0 and out_cutoffs is None:
        check_modes(state, modes)
        return state
    return apply_passive_unitary(state, modes, beamsplitter_unitary(transmissivity), out_cutoffs)


def apply_phase(state: State, mode: int, phi: float) -> State:
    cutoff = state.cutoffs[mode]
    matrix = np.diag(np.exp(-1j * phi * np.arange(cutoff + 1)))
    return apply_mode_operator(state, [mode], matrix, [cutoff])


def displacement_matrix(alpha: complex, out_cutoff: int, in_cutoff: int) -> np.ndarray:
    """exact <m|D(alpha)|n> for m <= out_cutoff, n <= in_cutoff"""
    m = np.arange(out_cutoff + 1)[:, None]
    n = np.arange(in_cutoff + 1)[None, :]
    x = abs(alpha) ** 2
    lo = np.minimum(m, n)
    diff = np.abs(m - n)
    log_ratio = 0.5 * (gammaln(lo + 1) - gammaln(lo + diff + 1))
    base = np.where(m >= n, alpha, -np.conj(alpha))
    power = np.power(base.astype(complex), diff)
    lag = eval_genlaguerre(lo, diff, x)
    return np.exp(log_ratio - 0.5 * x) * power * lag


def apply_displacement(
    state: State, mode: int, alpha: complex, out_cutoff: Optional[int] = None
) -> State:
    in_cutoff = state.cutoffs[mode]
    if out_cutoff is None:
        out_cutoff = in_cutoff
    matrix = displacement_matrix(alpha, out_cutoff, in_cutoff)
    return apply_mode_operator(state, [mode], matrix, [out_cutoff], track_leak=True)


def squeezing_matrix(r: float, out_cutoff: int, in_cutoff: int) -> np.ndarray:
    """S(r) = exp(r/2 (a^2 - a^dag^2)) evaluated on a padded space"""
    dim = max(out_cutoff, in_cutoff) + SQUEEZE_PADDING + 1
    a = np.diag(np.sqrt(np.arange(1, dim)), k=1)
    generator = 0.5 * r * (a @ a - a.T @ a.T)
    full = scipy.linalg.expm(generator)
    return full[: out_cutoff + 1, : in_cutoff + 1].astype(complex)


def apply_squeezing(state: State, mode: int, r: float, out_cutoff: Optional[int] = None) -> State:
    in_cutoff = state.cutoffs[mode]
    if out_cutoff is None:
        out_cutoff = in_cutoff
    matrix = squeezing_matrix(r, out_cutoff, in_cutoff)
    return apply_mode_operator(state, [mode], matrix, [out_cutoff], track_leak=True)
