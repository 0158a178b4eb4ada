"""Temperature-scaling calibration and uncertainty-aware action selection
over discretized action grids, plus a deterministic synthetic benchmark."""

from .action_space import ActionGrid, Metric, coords_of, distance, flat_index, neighborhood
from .calibration import (
    CalibrationSample,
    LogitField,
    ProbField,
    ReliabilityTable,
    TemperatureModel,
    apply_temperature,
    ece,
    entropy,
    fit_temperature,
    nll,
    reliability_bins,
    softmax,
)
from .selection import (
    SelectionConfig,
    SelectionResult,
    gaussian_select,
    greedy_select,
    select,
    ua_select,
    ua_select_fast,
    ua_select_restricted,
)

__version__ = "0.1.0"
