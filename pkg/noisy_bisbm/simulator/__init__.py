from .rng import make_rng, derive_seed, RNG_NAME, RNG_VERSION
from .graphs import (
    LatentTruth, PAConfig, sample_bisbm, sample_observations, observations_from_graph,
    nested_graph, preferential_attachment,
)
from .scenarios import Scenario, register, registered, make, block_params, diagonal_blocks
