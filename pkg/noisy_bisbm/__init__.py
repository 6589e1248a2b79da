from .exceptions import (
    BisbmError, DimensionError, InputError, ZeroVarianceError, FitError, ConfigError,
    MissingSettingError, MatrixParseError, MatrixValidationError,
)
from .model import (
    Side, Dimensions, ZScoreMatrix, NullParams, AltParams, ModelParams,
    MembershipVector, AdjacencyMatrix,
)
from .simulator import Scenario, register, registered, make
from .inference import FitOptions, FitResult, VariationalState, fit
from .selection import SelectionGrid, SelectionRecord, select_model, icl_score, icl_penalty
from .multitest import (
    LValueMatrix, DecisionReport, EvalMetrics, l_values, mfdr_threshold, decide,
    bh, storey, lfdr_threshold, p_from_z, evaluate,
)
from .stats import PairedData, CorrelationStats, pearson_z, two_sample_z, mclr


__version__ = '0.1.0'


register(
    id='scenario-a',
    entry_point='noisy_bisbm.simulator.scenarios:block_model_scenario',
    kwargs={
        'n1': 150,
        'n2': 200,
        'b1': 3,
        'b2': 3,
        'pi_on': 0.8,
        'pi_off': 0.1,
        'mu_on': 1.,
        'mu_off': 3.,
        'sigma_sq': 1.,
        'sigma0_sq': 1.,
    }
)

register(
    id='scenario-b',
    entry_point='noisy_bisbm.simulator.scenarios:nested_scenario',
    kwargs={
        'n1': 150,
        'n2': 200,
        'mu': 2.,
        'sigma_sq': 1.,
        'sigma0_sq': 1.,
    }
)

register(
    id='scenario-c',
    entry_point='noisy_bisbm.simulator.scenarios:preferential_attachment_scenario',
    kwargs={
        'n1': 150,
        'lam': 0.8,
        'degree_choices': (2, 3, 4, 5, 6),
        'mu': 2.,
        'sigma_sq': 1.,
        'sigma0_sq': 1.,
    }
)

register(
    id='comparison',
    entry_point='noisy_bisbm.simulator.scenarios:comparison_scenario',
    kwargs={
        'n1': 40,
        'n2': 60,
        'b1': 2,
        'b2': 3,
        'pi_on': 0.8,
        'pi_off': 0.1,
        'mu': 3.,
        'sigma_sq': 0.25,
        'sigma0_sq': 1.,
    }
)
