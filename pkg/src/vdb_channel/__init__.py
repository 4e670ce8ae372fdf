"""Value-deviation-bounded serial channels.

Integer value distortion of noisy bit channels, constrained search for
benefit-maximizing bit-error probabilities, an analytic I2C pull-up model
and the per-bit adaptation controller.
"""
from .distortion import (brute_force_oracle, distortion_pmf, distortion_pmf_enumerative,
                         distortion_pmf_fast, error_vector_probability,
                         monte_carlo_distortion, simulate_channel)
from .distributions import (ChannelModel, ConstraintTail, DistortionDistribution,
                            IndependentChannel, InputDistribution, WordDependentChannel)
from .errorsets import (ErrorVector, SignedDistortionMultiset, Word, build_error_sets,
                        count_convolution, set_convolve)
from .estimators import (AdaptiveBitLevelSearch, BitIndependentGridSearch, BitLevelGridSearch,
                         DistortionModel)
from .exceptions import (CapacityError, EstimationError, InconsistentMeasurementsError,
                         InfeasibleError, InvalidOperandError, ValidationError)
from .optimizer import (ProbabilityVector, SearchResult, adaptive_search_bit_level, benefit,
                        exhaustive_search_bit_independent, exhaustive_search_bit_level,
                        generate_random_constraint, oracle_tail, satisfies_constraint)

__version__ = "0.1.0"
