"""Fast sparsifying secondary transforms: learning, baselines, and a
desk-scale rate-distortion evaluation harness."""

from .backend import BACKEND
from .baselines import ReducedKernel, klt_gr, klt_learn, lf_sot, lfnst_from_klt
from .codec import (BlockResult, CandidateSet, QuantConfig, TransformCandidate,
                    TransformChoice, anneal_train, candidate_set, dequantize,
                    encode_block_rdo, encode_blocks, fasst_trainer, quantize,
                    rate_model, rd_cost, rdo_cluster, sot_trainer)
from .data import (Dataset, ModeSpec, default_modes, generate_dataset,
                   read_dataset, split, synth_residuals, write_dataset)
from .evaluate import (ComplexityReport, RDCurve, RDPoint, bd_rate,
                       build_rd_curve, complexity_report, correlation_inspect)
from .givens_transform import (FasstKernel, apply_fasst, cross_covariance,
                               factorization_error, factorize_approx,
                               fasst_learn, select_pivot, to_dense)
from .kernel_io import load_kernel, save_kernel
from .linalg import (ConvergenceError, GivensRotation, apply_givens,
                     jacobi_svd, procrustes, svd_2x2)
from .sot import SotModel, hard_threshold, sot_learn, sot_objective
from .transforms import (PrimaryKernel, ScanOrder, apply_primary,
                         extract_lowfreq, learn_scan_order, primary_kernel,
                         reinsert_lowfreq)

__version__ = "0.1.0"
