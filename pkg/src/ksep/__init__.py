"""k-separability of Boolean functions and two-class data."""
from .boolfn import (BooleanFunction, Label, all_functions, complement, constant, from_index,
                     from_vertices, parity, to_index, variable, vertex_coordinates)
from .data import (CVPlan, DataError, LabeledDataset, complexity_index, crossvalidate,
                   from_boolean, load_csv, save_csv)
from .enumeration import (SeparabilityCensus, canonical_directions, census_best, census_fixed,
                          convention_sweep, dedupe, direction_lower_bound,
                          exact_separability_oracle, fractional_grid, perturb,
                          perturbed_canonical, table1_report)
from .learner import (IntervalModel, TrainConfig, fit_interval_model, fit_three_separable,
                      grad_quadratic, interval_network_forward, loss_3sep, loss_quadratic,
                      parity_cos, posterior_estimate)
from .projection import (Direction, ProjectionProfile, ThreeSepParams, margin_score, min_k_over,
                         profile, profile_points)

__version__ = "0.1.0"
