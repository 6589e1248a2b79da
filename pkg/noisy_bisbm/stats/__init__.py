from .correlation import (
    PairedData, CorrelationStats, standardize_columns, correlation_stats,
    pearson_z, two_sample_z, two_sample_stats,
)
from .compositional import mclr
