use serde::{Deserialize, Serialize};

use crate::grid::{CellField, CellGrid};
use crate::solver::FlowProblem;

/// Initial pressure head.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialCondition {
    /// `p(x, z, 0) = -0.4 (1 - exp(-80 z))`.
    Infiltration,
    Constant { value: f64 },
}

impl InitialCondition {
    pub fn value_at(&self, _x: f64, z: f64) -> f64 {
        match *self {
            InitialCondition::Infiltration => -0.4 * (1.0 - (-80.0 * z).exp()),
            InitialCondition::Constant { value } => value,
        }
    }

    /// Sampled at cell centres.
    pub fn field(&self, grid: CellGrid) -> CellField {
        CellField::from_fn(grid, |x, z| self.value_at(x, z))
    }
}

/// A complete forward problem apart from the soil and the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub flow: FlowProblem,
    pub initial: InitialCondition,
    /// [h]
    pub t_final: f64,
}

/// Infiltration into a dry column from a wet bottom boundary.
pub fn infiltration_problem(t_final: f64) -> Scenario {
    Scenario {
        flow: FlowProblem::infiltration(),
        initial: InitialCondition::Infiltration,
        t_final,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::Side;

    #[test]
    fn boundary_and_initial_values() {
        let s = infiltration_problem(0.1);
        assert_eq!(s.initial.value_at(0.3, 0.0), 0.0);
        assert!((s.initial.value_at(0.3, 1.0) + 0.4).abs() < 1e-30);
        assert_eq!(s.flow.boundaries.bottom, Side::Dirichlet(0.1));
        assert_eq!(s.flow.boundaries.top, Side::Dirichlet(-0.4));
        assert_eq!(s.flow.boundaries.left, Side::NoFlux);
        assert_eq!(s.t_final, 0.1);
    }
}
