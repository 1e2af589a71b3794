"""Mode-diagram clustering: density peaks separated by robust log-log regression."""

from .clusterer import ClusterResult, adjusted_rand_index, assign_clusters
from .delta import DeltaTable, compute_delta, compute_delta_bruteforce, compute_delta_indexed
from .density import Bandwidth, DensityEstimate, GaussianKDE, auto_bandwidth, kde_at, kde_self
from .diagram import ModeDiagram, bootstrap_diagram, build_diagram, trim_low_density
from .estimator import ModeDiagramClustering
from .points import DataError, PointSet, diameter, pairwise_distance
from .robustfit import RobustFit, ThresholdFunction, fit_robust, mode_diagnostic, select_modes

__version__ = "0.1.0"
