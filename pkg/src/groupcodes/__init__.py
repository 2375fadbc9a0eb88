"""Achievable-rate functionals and code-ensemble checks for Abelian group codes."""

from .groups import (
    CyclicDecomposition,
    GroupElement,
    GroupSpec,
    Subgroup,
    ThetaVector,
    decompose,
    subgroup,
)
from .measures import (
    ChannelSpec,
    SourceJoint,
    coset_mi_channel,
    coset_mi_channel_chain,
    coset_mi_source,
    entropy,
    mutual_information,
)
from .rates import (
    RateResult,
    WeightVector,
    channel_coding_rate,
    channel_rate_prime_power,
    enumerate_theta_set,
    grid_search,
    induced_theta,
    omega,
    optimize_weights,
    source_coding_rate,
    source_rate_prime_power,
)
from .ensemble import (
    HomomorphismTable,
    InputGroup,
    apply_hom,
    brute_theta_set,
    count_t_theta,
    encode,
    mc_channel_error,
    pair_theta,
    sample_hom,
    solve_congruence,
    t_theta_bound,
    verify_pairwise_law,
)

__all__ = [
    "ChannelSpec",
    "CyclicDecomposition",
    "GroupElement",
    "GroupSpec",
    "HomomorphismTable",
    "InputGroup",
    "RateResult",
    "SourceJoint",
    "Subgroup",
    "ThetaVector",
    "WeightVector",
    "apply_hom",
    "brute_theta_set",
    "channel_coding_rate",
    "channel_rate_prime_power",
    "coset_mi_channel",
    "coset_mi_channel_chain",
    "coset_mi_source",
    "count_t_theta",
    "decompose",
    "encode",
    "entropy",
    "enumerate_theta_set",
    "grid_search",
    "induced_theta",
    "mc_channel_error",
    "mutual_information",
    "omega",
    "optimize_weights",
    "pair_theta",
    "sample_hom",
    "solve_congruence",
    "source_coding_rate",
    "source_rate_prime_power",
    "subgroup",
    "t_theta_bound",
    "verify_pairwise_law",
]

__version__ = "0.1.0"
