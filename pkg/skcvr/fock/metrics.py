import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
from scipy.special import entr

from skcvr.errors import InvalidStateError
from skcvr.fock.measurement import partial_trace
from skcvr.fock.state import DensityOp, FockArray, State, as_density
from skcvr.gaussian import GaussianState

logger = logging.getLogger(__name__)

EIGENVALUE_CLIP = 1e-12
NEGATIVITY_TOL = 1e-9


def _normalized_eigenvalues(rho: DensityOp) -> np.ndarray:
    m = rho.matrix
    eigvals = np.linalg.eigvalsh(0.5 * (m + m.conj().T)) / rho.trace()
    if eigvals.min() < -NEGATIVITY_TOL:
        raise InvalidStateError("state has negative eigenvalue {:.3e}".format(eigvals.min()))
    eigvals[eigvals < EIGENVALUE_CLIP] = 0.0
    return eigvals


def purity(state: State) -> float:
    if isinstance(state, FockArray):
        return 1.0
    m = state.matrix
    return float(np.real(np.trace(m @ m))) / state.trace() ** 2


def von_neumann_entropy(state: State) -> float:
    """entropy in bits of the normalized state"""
    if isinstance(state, FockArray):
        return 0.0
    return float(np.sum(entr(_normalized_eigenvalues(state))) / np.log(2.0))


def reduced_entropy(state: State, keep: Sequence[int]) -> float:
    discard = [m for m in range(state.n_modes) if m not in keep]
    return von_neumann_entropy(partial_trace(state, discard))


def rci(state: State, a_modes: Sequence[int]) -> float:
    """reverse coherent information S(A) - S(AB)"""
    return reduced_entropy(state, a_modes) - von_neumann_entropy(state)


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    eigvals, eigvecs = scipy.linalg.eigh(0.5 * (m + m.conj().T))
    return (eigvecs * np.sqrt(np.clip(eigvals, 0.0, None))) @ eigvecs.conj().T


def fidelity(state: State, target: State) -> float:
    """squared Uhlmann fidelity of the normalized states"""
    if isinstance(target, FockArray) or isinstance(state, FockArray):
        pure, other = (target, state) if isinstance(target, FockArray) else (state, target)
        assert isinstance(pure, FockArray)
        vec = pure.normalized().vector()
        if isinstance(other, FockArray):
            return float(abs(np.vdot(vec, other.normalized().vector())) ** 2)
        rho = other.normalized().matrix
        return float(np.real(vec.conj() @ rho @ vec))
    rho = state.normalized().matrix
    sigma = target.normalized().matrix
    sqrt_rho = _psd_sqrt(rho)
    inner = sqrt_rho @ sigma @ sqrt_rho
    eigvals = scipy.linalg.eigvalsh(0.5 * (inner + inner.conj().T))
    return min(float(np.sum(np.sqrt(np.clip(eigvals, 0.0, None))) ** 2), 1.0)


@dataclass
class StateMetrics:
    purity: float
    von_neumann_entropy: float
    rci: Optional[float] = None
    fidelity: Optional[float] = None


def state_metrics(
    state: State,
    bipartition: Optional[Tuple[Sequence[int], Sequence[int]]] = None,
    target: Optional[State] = None,
) -> StateMetrics:
    rho = as_density(state)
    entropy = von_neumann_entropy(rho)
    result = StateMetrics(purity(rho), entropy)
    if bipartition is not None:
        a_modes, b_modes = bipartition
        if sorted(list(a_modes) + list(b_modes)) != list(range(rho.n_modes)):
            raise InvalidStateError("bipartition must cover every mode exactly once")
        result.rci = reduced_entropy(rho, a_modes) - entropy
    if target is not None:
        result.fidelity = fidelity(rho, target)
    return result


def _lowering(cutoff: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, cutoff + 1)), k=1).astype(complex)


def covariance_of(state: State) -> GaussianState:
    """first and second quadrature moments of the normalized state

    Only normally ordered moments of lowering operators enter (<a>, <a a>, <a^dag a>), and those
    are exact on a truncated state.
    """
    rho = as_density(state).normalized()
    n = rho.n_modes
    single = [partial_trace(rho, [m for m in range(n) if m != k]).matrix for k in range(n)]
    lowering = [_lowering(c) for c in rho.cutoffs]

    alpha = np.array([np.trace(lowering[k] @ single[k]) for k in range(n)])
    mean = np.zeros(2 * n)
    mean[0::2] = 2.0 * alpha.real
    mean[1::2] = 2.0 * alpha.imag

    second = np.zeros((2 * n, 2 * n))
    for k in range(n):
        a = lowering[k]
        z = np.trace(a @ a @ single[k])
        num = np.real(np.trace(a.conj().T @ a @ single[k]))
        second[2 * k, 2 * k] = 2 * z.real + 2 * num + 1
        second[2 * k + 1, 2 * k + 1] = -2 * z.real + 2 * num + 1
        second[2 * k, 2 * k + 1] = second[2 * k + 1, 2 * k] = 2 * z.imag

    for j in range(n):
        for k in range(j + 1, n):
            pair = partial_trace(rho, [m for m in range(n) if m not in (j, k)]).tensor
            aj, ak = lowering[j], lowering[k]
            # w = <a_j a_k>, u = <a_j^dag a_k>
            w = np.einsum("ab,cd,bdac->", aj, ak, pair)
            u = np.einsum("ba,cd,bdac->", aj.conj(), ak, pair)
            qq = 2 * w.real + 2 * u.real
            pp = -2 * w.real + 2 * u.real
            qp = 2 * (u.imag + w.imag)
            pq = 2 * (w.imag - u.imag)
            block = np.array([[qq, qp], [pq, pp]])
            second[2 * j : 2 * j + 2, 2 * k : 2 * k + 2] = block
            second[2 * k : 2 * k + 2, 2 * j : 2 * j + 2] = block.T

    cov = second - np.outer(mean, mean)
    return GaussianState(mean, 0.5 * (cov + cov.T))
