"""Commuting-operator to tensor-product models of bipartite quantum correlations."""

from .cesaro import (
    CesaroApproximant,
    DichotomicPair,
    approx_behavior,
    approximant,
    cesaro_identity_residual,
    cesaro_sweep,
    dichotomic_observables,
    gamma1,
    gamma2,
    noise_rate_23,
    noisy_behavior_23,
)
from .eraser import (
    Eraser,
    ErasureProjector,
    KrausChannel,
    Superoperator,
    apply_erasure,
    average_superoperator,
    build_eraser,
    fixed_point_projector,
    measurement_channel,
    superoperator_of,
)
from .models import (
    Behavior,
    CommutingModel,
    Measurement,
    QuansalModel,
    Report,
    Scenario,
    TensorModel,
    behavior_of,
    behavior_of_commuting,
    behavior_of_quansal,
    behavior_of_tensor,
    check_no_signaling,
    chsh_value,
    embed,
    mix_behaviors,
    product_behavior,
    validate_commuting,
    validate_quansal,
    validate_tensor,
)
from .scenarios import brute_force_behavior, gen_block_sum, gen_chsh, gen_tensor_embedded
from .transforms import commuting_to_tensor, post_measurement_states, quansal_of_tensor, quansalize, tensorize

__version__ = "0.1.0"
