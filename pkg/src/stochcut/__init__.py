"""Vulnerability of stochastic spatial networks to circular geographic cuts."""
from .geometry import (CircularCut, LinkClass, Point, PointInsideDisk, Rectangle, ShadowRegion,
                       SourceInsideDisk, classify_link, segment_intersects_disk, shadow_contains,
                       tangent_points)
from .grid import (AccuracyBudget, DegenerateRec, InfeasibleBudget, IntegrationGrid, SquareClass,
                   classify_square, compute_grid)
from .integrator import DamageBreakdown, GridEvaluator, edcc, evaluate_gamma
from .io import (downsample, export_map, load_budget, load_map, load_model, load_raster,
                 save_raster, synthetic_population)
from .model import (ConcreteNetwork, ConstantCapacity, ConstantLink, CustomCapacity, CustomLink,
                    ExpectedCountOverflow, GaussianHotspots, HomogeneousIntensity, Hotspot,
                    InverseDistanceLink, OutOfDomain, RasterIntensity, StochasticNetworkModel,
                    homogeneous_model, hotspot_model, sample_network)
from .oracle import McEstimate, empirical_tec, pair_class_counts
from .planner import AttackDistribution, SensitivityMap, UnnormalizedDensity, fsl, rcce, worst_cut

__version__ = "0.1.0"
