from .params import (
    Side, Dimensions, ZScoreMatrix, NullParams, AltParams, ModelParams,
    MembershipVector, AdjacencyMatrix, to_values, PI_CLAMP, VARIANCE_FLOOR,
)
from .density import (
    log_null_density, log_alt_density, edge_responsibility,
    log_alt_density_tensor, log_edge_terms, log_marginal_tensor, responsibility_tensor,
)
