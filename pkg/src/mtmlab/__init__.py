"""Multiple-try Metropolis with globally and locally balanced weights."""
from ._accel import BACKEND
from .adaptation import AdaptationConfig, ScaleAdapter, update_scale
from .diagnostics import (
    EstimateWithError,
    convergence_time,
    esjd,
    expected_acceptance_at,
    stationary_acceptance_rate,
    weight_normalization_discrepancy,
)
from .ideal import IdealConfig, ideal_gb_acc_prob, ideal_gb_propose, ideal_lb_sqrt_step
from .mtm import ChainTrace, MtmConfig, MtmStepOutcome, RwmConfig, mtm_step, run_chain
from .targets import Target, make_target, product_laplace, product_normal
from .theory import optimize_speed, prop2_bound, speed, std_normal_cdf, theta
from .weights import BalancingFunction, log_g, log_mean_weight, select_candidate

__version__ = "0.1.0"
