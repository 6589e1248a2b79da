from .state import VariationalState, EStepWorkspace, FitOptions, FitResult
from .vem import (
    initialize, workspace, edge_evidence, e_step, m_step, elbo, expected_complete_loglik,
    variational_entropy, posterior_memberships, canonicalize, fit, exact_log_likelihood,
)
