"""Uplink analysis and optimization for user-centric cell-free massive MIMO
with mixed-resolution ADCs: closed-form rates validated by Monte Carlo,
SCA power control, and swarm antenna selection under an energy budget."""

__version__ = "0.1.0"

from .adc_energy import (AdcProfile, EnergyReport, SelectionTensor, ap_energy,
                         impairment_factor, max_system_energy,
                         repair_selection, single_antenna_costs,
                         system_energy)
from .association import Association, select_users, selection_mask
from .config import (EnergyConstants, ScenarioConfig, load_config,
                     normalized_snrs, save_config)
from .experiments import (SCHEMES, SchemeSpec, convergence_study,
                          oracle_study, run_scheme, sweep)
from .network import (ChannelDraw, NetworkInstance, assign_pilots,
                      build_network, draw_channels, effective_gain,
                      large_scale_fading, path_loss_db, place_nodes)
from .power import (Monomial, PosyRatioProblem, PowerOptError, ScaResult,
                    condense_denominator, condense_monomial, condense_problem,
                    p3_objective, sca_loop, solve_condensed_gp)
from .rates import (ClosedFormTerms, Estimate, McTermEstimate, RateBreakdown,
                    closed_form_terms, effective_sum_rate, mc_estimate_terms,
                    rate_coefficients, rate_terms, sree, sum_rate)
from .swarm import (BpsoResult, ExhaustiveResult, Particle, SwarmState,
                    bpso_sca, evaluate_particle, exhaustive_search,
                    init_particles, position_update, velocity_update)

__all__ = [name for name in dir() if not name.startswith("_")]
