"""Exact frequency-domain algebra and causal identification for SVAR process graphs."""

from .ratfield import (NEG_INFINITY, P_ONE, P_Z, P_ZERO, Poly, PoleError,
                       R_ONE, R_Z, R_ZERO, RatFn, const, poly, poly_gcd,
                       poly_lcm, rat)
from .ratlinalg import (RatMatrix, SingularMatrixError, conj_matrix, det,
                        inverse, rank, rank_eval, solve, solve_many)
from .graph import (CyclicGraphError, GraphValidationError, LfhtcCheck,
                    LfhtcOrder, LfhtcTriple, Path, PathSystem, ProcessGraph,
                    TimeSeriesGraph, Trek, TrekSystem, d_separated,
                    enumerate_paths, enumerate_treks, htr,
                    latent_factor_half_treks, lfhtc_check, lfhtc_order,
                    lfhtc_prerequisite_edges, lfhtc_search,
                    minimal_halftrek_subsystem, nonintersecting_path_systems,
                    sided_nonintersecting_trek_systems, t_separated,
                    t_separation_min)
from .svar import (ParameterError, SpectrumBundle, SvarParams,
                   conditional_spectrum, det_path_expansion,
                   det_trek_expansion, generic_rank, internal_spectrum,
                   lag_poly, link_function, path_function,
                   projected_internal_spectrum, sample_stable_params,
                   spectrum, spectrum_trek, transfer_matrix, trek_function,
                   unit_inverse)
from .identify import (Cpdag, IdentificationCertificate, IdentificationStep,
                       LinkRecoveryError, MissingPrerequisiteError,
                       ZeroInstrumentError, discover_cpdag, dsep_ci_oracle,
                       identify_all, identify_instrument, identify_regression,
                       lfhtc_identify_step, recover_lag_coefficients,
                       replay_certificate, spectral_ci_oracle)
from .simulate import (EstimationError, IllConditionedBlockError,
                       SeriesSample, SimulationError, SpectrumEstimate,
                       empirical_ci_test, estimate_spectrum,
                       exact_spectrum_values, simulate_series)

__version__ = "0.1.0"
