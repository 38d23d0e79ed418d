use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::CellGrid;
use crate::randfield::Nonlinearity;

/// One level of the estimator hierarchy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelSpec {
    pub level: usize,
    pub grid: CellGrid,
    /// Requested time step; see [`crate::solver::step_plan`].
    pub dt: f64,
    pub theta: Nonlinearity,
    /// Warm-up sample count `N*`.
    pub warmup: usize,
}

/// Geometric hierarchy with linearly marched nonlinearity parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HierarchySpec {
    /// Cells per side on level 0.
    pub coarsest: usize,
    /// Number of levels `L + 1`.
    pub levels: usize,
    /// `Δt_ℓ = dt_ratio · h_ℓ`.
    pub dt_ratio: f64,
    /// Target `(α, n)` on the finest level.
    pub theta_finest: Nonlinearity,
    /// `α_ℓ = α_L - (L - ℓ) ∇α`.
    pub grad_alpha: f64,
    /// `n_ℓ = n_L + (L - ℓ) ∇n`.
    pub grad_n: f64,
    /// Keep the target parameters on the two finest levels.
    pub pin_finest_two: bool,
    /// Explicit per-level `(α, n)`, coarsest first; overrides the marching.
    pub theta_override: Option<Vec<Nonlinearity>>,
    /// Explicit warm-up counts; default `max(4, 64 · 4^{-ℓ})`.
    pub warmup: Option<Vec<usize>>,
}

impl HierarchySpec {
    /// All levels share the target parameters.
    pub fn standard(coarsest: usize, levels: usize, theta: Nonlinearity) -> Self {
        Self {
            coarsest,
            levels,
            dt_ratio: 1.0,
            theta_finest: theta,
            grad_alpha: 0.0,
            grad_n: 0.0,
            pin_finest_two: false,
            theta_override: None,
            warmup: None,
        }
    }
}

pub fn default_warmup(level: usize) -> usize {
    (64usize >> (2 * level.min(31))).max(4)
}

pub fn build_levels(spec: &HierarchySpec) -> Result<Vec<LevelSpec>> {
    if spec.levels == 0 {
        return Err(Error::Config("hierarchy needs at least one level".into()));
    }
    if !(spec.dt_ratio > 0.0) {
        return Err(Error::Config("dt_ratio must be positive".into()));
    }
    if let Some(o) = &spec.theta_override {
        if o.len() != spec.levels {
            return Err(Error::Config(format!(
                "theta_override has {} entries for {} levels",
                o.len(),
                spec.levels
            )));
        }
    }
    if let Some(w) = &spec.warmup {
        if w.len() != spec.levels || w.iter().any(|&n| n < 2) {
            return Err(Error::Config(
                "warmup needs one count >= 2 per level".into(),
            ));
        }
    }
    let last = spec.levels - 1;
    let mut grid = CellGrid::new(spec.coarsest)?;
    let mut out = Vec::with_capacity(spec.levels);
    for l in 0..spec.levels {
        if l > 0 {
            grid = grid.refine(2);
        }
        let theta = match &spec.theta_override {
            Some(o) => o[l],
            None => {
                let mut steps = (last - l) as f64;
                if spec.pin_finest_two {
                    steps = (steps - 1.0).max(0.0);
                }
                Nonlinearity {
                    alpha: spec.theta_finest.alpha - steps * spec.grad_alpha,
                    n: spec.theta_finest.n + steps * spec.grad_n,
                }
            }
        };
        theta.validate().map_err(|e| {
            Error::Config(format!("level {l} nonlinearity ({}, {}): {e}", theta.alpha, theta.n))
        })?;
        let warmup = spec
            .warmup
            .as_ref()
            .map(|w| w[l])
            .unwrap_or_else(|| default_warmup(l));
        out.push(LevelSpec {
            level: l,
            grid,
            dt: spec.dt_ratio * grid.h(),
            theta,
            warmup,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pc() -> HierarchySpec {
        HierarchySpec {
            coarsest: 16,
            levels: 3,
            dt_ratio: 1.0,
            theta_finest: Nonlinearity { alpha: 3.0, n: 1.45 },
            grad_alpha: 0.05,
            grad_n: 0.1,
            pin_finest_two: false,
            theta_override: None,
            warmup: None,
        }
    }

    #[test]
    fn linear_marching() {
        let l = build_levels(&pc()).unwrap();
        assert_eq!(l.iter().map(|l| l.grid.m()).collect::<Vec<_>>(), vec![16, 32, 64]);
        assert!((l[0].theta.alpha - 2.9).abs() < 1e-12);
        assert!((l[0].theta.n - 1.65).abs() < 1e-12);
        assert!((l[1].theta.alpha - 2.95).abs() < 1e-12);
        assert_eq!(l[2].theta, Nonlinearity { alpha: 3.0, n: 1.45 });
        assert_eq!(l.iter().map(|l| l.warmup).collect::<Vec<_>>(), vec![64, 16, 4]);
        assert_eq!(l[2].dt, 1.0 / 64.0);
    }

    #[test]
    fn pinned_finest_levels_share_target() {
        let l = build_levels(&HierarchySpec {
            pin_finest_two: true,
            ..pc()
        })
        .unwrap();
        assert_eq!(l[1].theta, l[2].theta);
        assert!((l[0].theta.n - 1.55).abs() < 1e-12);
    }

    #[test]
    fn standard_hierarchy_is_flat() {
        let theta = Nonlinearity { alpha: 3.0, n: 1.45 };
        let l = build_levels(&HierarchySpec::standard(32, 2, theta)).unwrap();
        assert!(l.iter().all(|l| l.theta == theta));
    }

    #[test]
    fn marching_into_invalid_region_is_rejected() {
        let spec = HierarchySpec {
            theta_finest: Nonlinearity { alpha: 0.05, n: 1.45 },
            ..pc()
        };
        assert!(build_levels(&spec).is_err());
    }
}
