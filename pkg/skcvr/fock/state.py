import logging
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import gammainc, gammaln

from skcvr.errors import InvalidParameterError, InvalidStateError, TruncationWarning

logger = logging.getLogger(__name__)

TAIL_WARNING_THRESHOLD = 1e-6


def report_tail(tail: float, what: str) -> None:
    logger.debug("truncation tail of {}: {:.3e}".format(what, tail))
    if tail > TAIL_WARNING_THRESHOLD:
        warnings.warn(
            "{} drops {:.3e} of probability mass at the requested cutoff".format(what, tail),
            TruncationWarning,
            stacklevel=3,
        )


def combine_tails(*tails: float) -> float:
    kept = 1.0
    for t in tails:
        kept *= 1.0 - t
    return 1.0 - kept


@dataclass(frozen=True)
class FockArray:
    """pure multimode state in a truncated Fock basis

    amplitudes[n_1, ..., n_M] is the amplitude of |n_1, ..., n_M>, with n_i in [0, cutoff_i].
    tail is the probability mass known to be lost by truncation (0 when exact).
    """

    amplitudes: np.ndarray
    tail: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", np.asarray(self.amplitudes, dtype=complex))

    @property
    def cutoffs(self) -> Tuple[int, ...]:
        return tuple(d - 1 for d in self.amplitudes.shape)

    @property
    def n_modes(self) -> int:
        return self.amplitudes.ndim

    @property
    def norm_is_unit(self) -> bool:
        return abs(self.norm2() - 1.0) <= 1e-10

    def norm2(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def normalized(self) -> "FockArray":
        norm2 = self.norm2()
        if norm2 <= 0.0:
            raise InvalidStateError("cannot normalize a zero state")
        return FockArray(self.amplitudes / np.sqrt(norm2), self.tail)

    def vector(self) -> np.ndarray:
        return self.amplitudes.reshape(-1)

    def to_density(self) -> "DensityOp":
        vec = self.vector()
        return DensityOp(np.outer(vec, vec.conj()), self.cutoffs, self.tail)

    def mean_photon_number(self, mode: int) -> float:
        probs = np.abs(np.moveaxis(self.amplitudes, mode, 0)) ** 2
        marginal = probs.reshape(probs.shape[0], -1).sum(axis=1)
        return float(np.arange(len(marginal)).dot(marginal) / marginal.sum())

    def validate(self) -> None:
        norm2 = self.norm2()
        if not 0.0 < norm2 <= 1.0 + 1e-12:
            raise InvalidStateError("squared norm {} is outside (0, 1]".format(norm2))


@dataclass(frozen=True)
class DensityOp:
    """mixed multimode state; matrix is indexed by the row-major flattened Fock basis"""

    matrix: np.ndarray
    cutoffs: Tuple[int, ...]
    tail: float = 0.0

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=complex)
        cutoffs = tuple(int(c) for c in self.cutoffs)
        dim = int(np.prod([c + 1 for c in cutoffs]))
        if matrix.shape != (dim, dim):
            raise InvalidParameterError(
                "matrix shape {} does not match cutoffs {}".format(matrix.shape, cutoffs)
            )
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "cutoffs", cutoffs)

    @classmethod
    def from_tensor(cls, tensor: np.ndarray, tail: float = 0.0) -> "DensityOp":
        n_modes = tensor.ndim // 2
        dims = tensor.shape[:n_modes]
        dim = int(np.prod(dims))
        return cls(tensor.reshape(dim, dim), tuple(d - 1 for d in dims), tail)

    @property
    def dims(self) -> Tuple[int, ...]:
        return tuple(c + 1 for c in self.cutoffs)

    @property
    def n_modes(self) -> int:
        return len(self.cutoffs)

    @property
    def tensor(self) -> np.ndarray:
        return self.matrix.reshape(self.dims + self.dims)

    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))

    def normalized(self) -> "DensityOp":
        tr = self.trace()
        if tr <= 0.0:
            raise InvalidStateError("cannot normalize a state with trace {}".format(tr))
        return DensityOp(self.matrix / tr, self.cutoffs, self.tail)

    def probabilities(self) -> np.ndarray:
        """photon-number distribution, shaped like the mode dimensions"""
        return np.real(np.diag(self.matrix)).reshape(self.dims)

    def validate(self, atol: float = 1e-10) -> None:
        m = self.matrix
        if not np.allclose(m, m.conj().T, atol=atol):
            raise InvalidStateError("density operator is not hermitian")
        tr = self.trace()
        if not 0.0 < tr <= 1.0 + atol:
            raise InvalidStateError("trace {} is outside (0, 1]".format(tr))
        eigvals = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
        if eigvals.min() < -1e-9:
            raise InvalidStateError("negative eigenvalue {:.3e}".format(eigvals.min()))


State = Union[FockArray, DensityOp]


def as_density(state: State) -> DensityOp:
    if isinstance(state, FockArray):
        return state.to_density()
    return state


def _check_cutoff(cutoff: int) -> None:
    if cutoff < 1:
        raise InvalidParameterError("cutoff must be >= 1, got {}".format(cutoff))


def make_tmsv(chi: float, cutoff: int) -> FockArray:
    """sqrt(1 - chi^2) sum_n chi^n |n, n>"""
    _check_cutoff(cutoff)
    if not 0.0 <= chi < 1.0:
        raise InvalidParameterError("chi must be in [0, 1), got {}".format(chi))
    n = np.arange(cutoff + 1)
    amps = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
    amps[n, n] = np.sqrt(1.0 - chi**2) * chi**n
    tail = chi ** (2 * (cutoff + 1))
    report_tail(tail, "TMSV(chi={})".format(chi))
    return FockArray(amps, tail)


def coherent_amplitudes(gamma: complex, cutoff: int) -> np.ndarray:
    n = np.arange(cutoff + 1)
    x = abs(gamma)
    if x == 0.0:
        amps = np.zeros(cutoff + 1, dtype=complex)
        amps[0] = 1.0
        return amps
    log_mag = -0.5 * x**2 + n * np.log(x) - 0.5 * gammaln(n + 1)
    return np.exp(log_mag) * np.exp(1j * n * np.angle(gamma))


def make_coherent(gamma: complex, cutoff: int) -> FockArray:
    _check_cutoff(cutoff)
    tail = float(gammainc(cutoff + 1, abs(gamma) ** 2))
    report_tail(tail, "coherent(gamma={})".format(gamma))
    return FockArray(coherent_amplitudes(gamma, cutoff), tail)


def make_fock(n: int, cutoff: Optional[int] = None) -> FockArray:
    if cutoff is None:
        cutoff = max(n, 1)
    if not 0 <= n <= cutoff:
        raise InvalidParameterError("photon number {} outside [0, {}]".format(n, cutoff))
    amps = np.zeros(cutoff + 1, dtype=complex)
    amps[n] = 1.0
    return FockArray(amps)


def vacuum(cutoffs: Sequence[int]) -> FockArray:
    amps = np.zeros(tuple(c + 1 for c in cutoffs), dtype=complex)
    amps[(0,) * len(cutoffs)] = 1.0
    return FockArray(amps)


def tensor(*states: State) -> State:
    """product state; the result is pure only if every factor is"""
    assert len(states) > 0
    if all(isinstance(s, FockArray) for s in states):
        amps = states[0].amplitudes  # type: ignore[union-attr]
        for s in states[1:]:
            amps = np.multiply.outer(amps, s.amplitudes)  # type: ignore[union-attr]
        return FockArray(amps, combine_tails(*[s.tail for s in states]))

    densities = [as_density(s) for s in states]
    matrix = densities[0].matrix
    cutoffs: Tuple[int, ...] = densities[0].cutoffs
    for d in densities[1:]:
        matrix = np.kron(matrix, d.matrix)
        cutoffs = cutoffs + d.cutoffs
    return DensityOp(matrix, cutoffs, combine_tails(*[d.tail for d in densities]))
