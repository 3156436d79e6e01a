# flake8: noqa

from skcvr.repeater.config import DEFAULT_GAMMA_MAX, ChainConfig, LinkConfig, PolarGrid
from skcvr.repeater.cvqr import (
    ChainBound,
    CVQRResult,
    SwapResult,
    chain_key_rate,
    cvqr_key_rate,
    cvqr_nla_state,
    nested_chain,
    nla_link_state,
    nla_success_probability,
    optimize_chain,
    postselection_probability,
    reverse_modes,
    swap_with_postselection,
)
from skcvr.repeater.interface import RateProtocol, SweepConfig, sweep_rate_vs_distance
from skcvr.repeater.memoryless import (
    RepeaterOutcome,
    ThreeRepeaterResult,
    direct_transmission_rate,
    memoryless_circuit,
    repeater_outcome,
    simple_repeater_key_rate,
    simple_repeater_state,
    three_repeater_chain,
)
from skcvr.repeater.protocols import (
    CVQuantumRepeater,
    DirectTransmission,
    MemorylessRepeater,
    ThreeRepeaterChain,
)
from skcvr.repeater.waiting import (
    chain_rate,
    expected_max_steps,
    simulate_steps,
    three_repeater_rate,
    z_steps,
)
