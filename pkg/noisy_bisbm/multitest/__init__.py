from .lvalues import (
    LValueMatrix, DecisionReport, l_values, running_mean_threshold, mfdr_threshold, decide, report,
)
from .baselines import p_from_z, bh, storey_pi0, storey, lfdr_values, lfdr_threshold
from .evaluation import EvalMetrics, evaluate, adjusted_rand_index
