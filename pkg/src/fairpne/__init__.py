"""Fair division of indivisible goods with strategic agents.

Round-Robin and Mod-Cut&Choose as mechanisms over reported bids, exact
fairness certificates, and exhaustive search for pure Nash equilibria.
"""
from .core import (Allocation, BidProfile, BudgetExceeded, Instance, ParseError, UsageError,
                   induced_ranking, parse_allocation, parse_bids, parse_instance, ranking_bid,
                   serialize_bids, serialize_instance, value_of)
from .mechanisms import cut_phase, mod_cut_and_choose, round_robin, round_robin_rankings
from .fairness import fairness_report, is_alpha_mms, is_ef, is_ef1, is_efx, is_prop, mms
from .strategy import (mcc_canonical_bid, mcc_construct_pne, mcc_verify_pne, rr_best_response,
                       rr_enumerate_pne, rr_is_pne)
from .constructions import (construct_truthful_equivalent, history_trace, partial_slide,
                            perturb_to_strict)
from .harness import ExperimentConfig, default_config, gen_instances, run_experiment

__version__ = "0.1.0"
