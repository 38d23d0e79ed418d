//! The infiltration benchmark and the experiment drivers built on it: the
//! `(α, n)` robustness cost map, the stochastic refinement study and the
//! side-by-side estimator comparison.

mod compare;
mod convergence;
mod costmap;
mod problem;

pub use compare::{estimator_comparison, ComparisonConfig, ComparisonResult};
pub use convergence::{convergence_study, ConvergenceConfig, ConvergenceRow, ConvergenceStudy};
pub use costmap::{cost_map, table_alphas, table_ns, CostMapCell, CostMapConfig};
pub use problem::{infiltration_problem, InitialCondition, Scenario};
