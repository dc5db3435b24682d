"""Higher-order entrywise inference for eigenvectors of noisy low-rank symmetric matrices."""
__version__ = "0.1.0"

from .errors import (EigenEdgeError, ConfigError, ShapeError, DomainError, MomentUnavailableError,
                     NumericError, RankError, EigengapError, DegenerateError, ConvergenceError,
                     QualityError, FormatError)
from .linalg import (TruncatedEigen, full_eigh, truncated_spectral, align_signs,
                     symmetric_dilation, eigengap)
from .models import (NoiseSpec, ModelInstance, DenoisingModel, discrete_noise, exponential_noise,
                     bernoulli_noise, custom_noise, build_sbm, build_rank_one_toy,
                     build_graph_rank_one, build_denoising_model, sample_discrete_noise,
                     sample_centered_exponential_noise, sample_bernoulli_graph, noise_moments)
from .estimators import (estimate_P_hat, estimate_D_hat, population_D, bias_vector, bias_correct,
                         variance_plugin, variance_population, studentize, entrywise_inference,
                         EntrywiseInference, denoising_inference)
from .expansion import (first_order_term, second_order_term, angle_expansion, expansion_report,
                        studentized_decomposition)
from .edgeworth import (std_normal, normal_cdf, kappa, population_kappa, empirical_kappa, edgeworth_cdf,
                        EdgeworthCurve, NormalCurve, empirical_edgeworth, denoising_kappa,
                        SmootherScale, smoother_scale)
from .montecarlo import EmpiricalCdf, tv_distance, mc_true_cdf, run_chunks
from .bootstrap import (residual_distribution, bootstrap_context, residual_bootstrap_draw,
                        parametric_graph_draw, bootstrap_cdf)

from .config import RunConfig, parse_config
from .experiments import run_experiment, write_outputs
