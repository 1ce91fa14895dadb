"""Zero-sum repeated games with public signals: belief-chain solvers,
closed-form discount analysis, and seeded simulation."""

from .beliefs import (Belief, BeliefChain, bayes_update, initial_belief, locate,
                      reduce, signal_marginal)
from .model import (Distribution, GameSpec, Rational, extend_payoff, load_game,
                    save_game, validate)
from .solver import (StationaryProfile, ValueFunction, discounted_value,
                     evaluate_profile, finite_horizon, neyman_gap,
                     shapley_operator, threshold_profile)
from .analytics import (CompactGame, SweepReport, ThresholdGame, compact_payoff,
                        compact_value, derivative_check, f_hat, f_lambda,
                        g_lambda, geometric_transform, optimal_thresholds,
                        r_star, sweep, threshold_value)
from .montecarlo import (SimResult, StrategySpec, informed_eval,
                       informed_profile_value, sample_stopping_time,
                       sample_stopping_times, simulate)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
