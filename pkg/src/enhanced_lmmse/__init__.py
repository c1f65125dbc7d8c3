"""LMMSE channel estimation that selects its own frequency-correlation model.

Candidates are scored by how well they interpolate each pilot carrier's LS
estimate from the other carriers; the best one drives the LMMSE filter.
"""

__version__ = "0.1.0"

from .channel import (MODELS, ChannelModel, ChannelRealization, OfdmConfig, PilotObservation,
                      apply_cfo, apply_sto, build_cir, cir_to_cfr, get_model, load_model,
                      observe_pilot)
from .correlation import (CorrelationVector, ParameterSet, PowerDelayProfile, StoDistribution,
                          estimate_correlation, model_correlation, pdp_to_correlation,
                          robust_correlation, sto_average_correlation, sto_shift_correlation)
from .errors import ConfigurationError, EstimationFailed, NumericalError, SelectionError
from .estimators import (empirical_mse, hermitian_solve, interpolation_mse_theoretical,
                         lmmse_filter, ls_estimate, mmse_interpolate)
from .selector import (SelectionReport, enhanced_lmmse, evaluation_index_full,
                       evaluation_index_split, select_parameters)
from .theory import (average_gain_bound, empirical_false_comparison,
                     false_comparison_probability, fuzzy_bound)
