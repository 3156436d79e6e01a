"""Quantum scissors and noiseless linear amplification.

Closed forms give one heralding click pattern. Every pattern of the n-scissor yields the same
state up to a passive phase correction, so probabilities fold in a multiplicity of n + 1.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.special import gammaln

from skcvr.errors import InvalidParameterError
from skcvr.fock.gates import apply_beamsplitter, apply_passive_unitary, fourier_unitary
from skcvr.fock.measurement import project_pattern
from skcvr.fock.state import (
    DensityOp,
    FockArray,
    State,
    coherent_amplitudes,
    make_fock,
    tensor,
    vacuum,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ScissorSpec:
    order: int
    gain: float
    resource_photons: Optional[int] = None

    def __post_init__(self):
        if self.order < 1:
            raise InvalidParameterError("scissor order must be >= 1, got {}".format(self.order))
        if not (0.0 < self.gain < np.inf):
            raise InvalidParameterError(
                "gain must be positive and finite, got {}".format(self.gain)
            )
        if not 0 <= self.resource <= self.order:
            raise InvalidParameterError(
                "resource photons must be in [0, {}], got {}".format(self.order, self.resource)
            )

    @property
    def resource(self) -> int:
        return self.order if self.resource_photons is None else self.resource_photons

    @property
    def transmissivity_b(self) -> float:
        """T_B = g^2 / (1 + g^2)"""
        return self.gain**2 / (1.0 + self.gain**2)

    @property
    def multiplicity(self) -> int:
        return self.order + 1

    @property
    def prefactor(self) -> float:
        """sqrt(n!) / (n + 1)^(n / 2) (g^2 + 1)^(-n / 2)"""
        n = self.order
        return math.sqrt(math.factorial(n)) / (n + 1) ** (n / 2) / (self.gain**2 + 1) ** (n / 2)


@dataclass(frozen=True)
class TruncatedKet:
    coefficients: np.ndarray
    amplitude_factor: float

    def __post_init__(self):
        coefficients = np.asarray(self.coefficients, dtype=complex)
        if not np.all(np.isfinite(coefficients)):
            raise InvalidParameterError("coefficients must be finite")
        object.__setattr__(self, "coefficients", coefficients)

    @property
    def amplitudes(self) -> np.ndarray:
        return self.amplitude_factor * self.coefficients

    @property
    def norm2(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def state(self) -> FockArray:
        return FockArray(self.amplitudes)

    def normalized(self) -> FockArray:
        return self.state().normalized()


def _as_coefficients(coefficients: Sequence[complex]) -> np.ndarray:
    c = np.asarray(coefficients, dtype=complex)
    if c.ndim != 1 or len(c) == 0:
        raise InvalidParameterError("input must be a non-empty coefficient vector")
    return c


def _padded(c: np.ndarray, length: int) -> np.ndarray:
    out = np.zeros(length, dtype=complex)
    n = min(length, len(c))
    out[:n] = c[:n]
    return out


def nscissor_transform(coefficients: Sequence[complex], spec: ScissorSpec) -> TruncatedKet:
    """single-pattern n-scissor output sqrt(n!)/(n+1)^(n/2) (g^2+1)^(-n/2) g^j c_j, j <= n"""
    c = _as_coefficients(coefficients)
    if spec.resource != spec.order:
        out, _ = scissor_circuit(FockArray(c), 0, spec)
        assert isinstance(out, FockArray)
        return TruncatedKet(out.amplitudes, 1.0)
    j = np.arange(spec.order + 1)
    return TruncatedKet(spec.gain**j * _padded(c, spec.order + 1), spec.prefactor)


def scissor_success_probability(coefficients: Sequence[complex], spec: ScissorSpec) -> float:
    """heralding probability summed over the n + 1 correctable click patterns"""
    return spec.multiplicity * nscissor_transform(coefficients, spec).norm2


def parallel_nla(
    coefficients: Sequence[complex], n_scissors: int, gain: float
) -> Tuple[TruncatedKet, float]:
    """N one-photon scissors in parallel with feed-forward phase correction

    (g^2 + 1)^(-N/2) sum_n N! / ((N - n)! N^n) g^n c_n |n>
    """
    if n_scissors < 1:
        raise InvalidParameterError("n_scissors must be >= 1")
    c = _padded(_as_coefficients(coefficients), n_scissors + 1)
    n = np.arange(n_scissors + 1)
    distortion = np.exp(
        gammaln(n_scissors + 1) - gammaln(n_scissors - n + 1) - n * np.log(n_scissors)
    )
    ket = TruncatedKet(distortion * gain**n * c, (gain**2 + 1) ** (-n_scissors / 2))
    return ket, ket.norm2


def ideal_nla(coefficients: Sequence[complex], gain: float, cutoff: int) -> TruncatedKet:
    """g^(-N) sum_{n<=N} g^n |n><n| + sum_{n>N} |n><n|"""
    c = _as_coefficients(coefficients)
    n = np.arange(len(c))
    scale = gain ** np.minimum(n, cutoff)
    return TruncatedKet(scale * c, float(gain ** (-cutoff)))


def two_scissor_coherent(gamma: complex, gain: float) -> Tuple[TruncatedKet, float]:
    """three-port scissor with a two-photon resource acting on a coherent state

    Output |gamma| (sqrt2/8) (g^2+1)^-1 e^(-|gamma|^2/2)
    (|0> + g gamma |1> + g^2 gamma^2/sqrt2 |2>),
    with the phase of gamma carried by the state. Valid for coherent inputs only.
    """
    x = abs(gamma)
    phase = np.exp(1j * np.angle(gamma)) if x > 0 else 1.0
    coefficients = phase * np.array(
        [1.0, gain * gamma, (gain * gamma) ** 2 / np.sqrt(2.0)], dtype=complex
    )
    factor = x * np.sqrt(2.0) / 8.0 / (gain**2 + 1.0) * np.exp(-0.5 * x**2)
    ket = TruncatedKet(coefficients, float(factor))
    return ket, 4 * ket.norm2


def scissor_fidelity(gamma: complex, spec: ScissorSpec) -> Tuple[float, float]:
    """fidelity of the heralded output with |g gamma> and the heralding probability"""
    c = coherent_amplitudes(gamma, spec.order)
    ket = nscissor_transform(c, spec)
    target = coherent_amplitudes(spec.gain * gamma, spec.order)
    overlap = np.vdot(target, ket.amplitudes)
    return float(abs(overlap) ** 2 / ket.norm2), spec.multiplicity * ket.norm2


def _move_last_mode(state: State, position: int) -> State:
    n = state.n_modes
    if isinstance(state, FockArray):
        return FockArray(np.moveaxis(state.amplitudes, n - 1, position), state.tail)
    t = np.moveaxis(state.tensor, [n - 1, 2 * n - 1], [position, n + position])
    return DensityOp.from_tensor(t, state.tail)


def scissor_circuit(state: State, mode: int, spec: ScissorSpec) -> Tuple[State, float]:
    """linear-optical n-scissor acting on one mode of a state

    The resource |r> is split by T_B into the output mode and mode C. The input mode, C and n - 1
    vacuum ancillas enter an (n + 1)-port Fourier splitter; the heralding pattern is vacuum at the
    input port and single clicks on the other n ports. The output replaces the input mode. The
    returned probability is that of this single pattern.
    """
    n = spec.order
    r = spec.resource
    m = state.n_modes
    resource_cutoff = max(r, 1)
    ancillas = [vacuum([1]) for _ in range(n - 1)]
    parts = [state, make_fock(r, resource_cutoff), vacuum([resource_cutoff])] + ancillas
    joint = tensor(*parts)
    joint = apply_beamsplitter(joint, (m, m + 1), spec.transmissivity_b)
    ports = [mode, m + 1] + list(range(m + 2, m + 1 + n))
    joint = apply_passive_unitary(joint, ports, fourier_unitary(n + 1), [1] * (n + 1))
    pattern = {port: 1 for port in ports}
    pattern[mode] = 0
    out, prob = project_pattern(joint, pattern)
    out = _move_last_mode(out, mode)
    logger.debug("scissor circuit n={} g={} pattern probability {:.6e}".format(n, spec.gain, prob))
    return out, prob


def distill_lossy_tmsv(
    chi: float,
    transmissivity: float,
    order: int = 1,
    gain: float = 1.0,
    tail_tolerance: float = 1e-10,
) -> Tuple[DensityOp, float]:
    """n-scissor on the lossy arm of a TMSV, as a mixture over photons lost to the channel

    |psi_k> = P sqrt(1 - chi^2) sum_{n=k}^{k+order} chi^n g^(n-k) sqrt(C(n, k))
              (1 - T)^(k/2) T^((n-k)/2) |n>|n - k>
    with P the single-pattern scissor prefactor. Returns the single-pattern density operator of
    (A, B) and the heralding probability over all n + 1 patterns.
    Amplitudes use chi^n; writing the TMSV with (-chi)^n only adds the local phase (-1)^n on A.
    """
    if not 0.0 <= chi < 1.0:
        raise InvalidParameterError("chi must be in [0, 1), got {}".format(chi))
    spec = ScissorSpec(order, gain)
    t = transmissivity
    loss_weight = (1.0 - t) * chi**2
    if loss_weight == 0.0:
        k_max = 0
    else:
        k_max = int(np.ceil(np.log(tail_tolerance) / np.log(loss_weight))) + 1
    cutoff_a = k_max + order
    kets = []
    for k in range(k_max + 1):
        amps = np.zeros((cutoff_a + 1, order + 1), dtype=complex)
        for n in range(k, k + order + 1):
            log_binom = gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)
            amps[n, n - k] = (
                chi**n
                * gain ** (n - k)
                * np.exp(0.5 * log_binom)
                * (1.0 - t) ** (0.5 * k)
                * t ** (0.5 * (n - k))
            )
        kets.append(spec.prefactor * np.sqrt(1.0 - chi**2) * amps.reshape(-1))
    vecs = np.array(kets)
    rho = DensityOp(vecs.T @ vecs.conj(), (cutoff_a, order))
    logger.debug("lossy TMSV distillation summed {} loss terms".format(k_max + 1))
    return rho, spec.multiplicity * rho.trace()
