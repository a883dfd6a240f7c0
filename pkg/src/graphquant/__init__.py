"""Graph quantization: codebooks for attributed graphs under alignment distances."""

from .alignment import (Alignment, AttributeCost, Solver, align_many, edit_distance, heuristic_align,
                        kernel_metric, kernel_of_alignment, length, optimal_kernel, parse_cost)
from .calculus import GeneralizedGradient, fd_check, grad_distance_sq, grad_loss, sq_distance
from .errors import (DimensionMismatch, DiscontinuousDistortion, ExactLimitExceeded, GraphQuantError,
                     InsufficientData, InvalidEdge, NumericalError, OrderExceedsBound, ParseError)
from .graph import AttributedGraph, act, compose, embed, extract, identity, inverse, orbit_equal
from .quantizer import (Codebook, DistortionReport, EncodeResult, Schedule, TrainerConfig, audit_centroid,
                        audit_nearest_neighbor, empirical_distortion, encode, kmeans_fit, sgg_fit)

__version__ = "0.1.0"
