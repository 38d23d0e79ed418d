//! Sample statistics on cell fields and the sample-allocation formula.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{CellField, CellGrid};

/// Discrete `L²(D)` norm `sqrt(Σ v² h²)`.
pub fn l2_norm(field: &CellField) -> f64 {
    field.l2_norm()
}

/// Cell-wise sample mean, summed in sample order.
pub fn mean_field(grid: CellGrid, samples: &[&CellField]) -> Result<CellField> {
    if samples.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let mut acc = vec![0.0; grid.len()];
    for s in samples {
        if s.grid() != grid {
            return Err(Error::Dimension {
                expected: grid.m(),
                found: s.grid().m(),
            });
        }
        for (a, v) in acc.iter_mut().zip(s.values()) {
            *a += v;
        }
    }
    let inv = 1.0 / samples.len() as f64;
    acc.iter_mut().for_each(|a| *a *= inv);
    CellField::from_vec(grid, acc)
}

/// Cell-wise unbiased sample variance (two-pass).
pub fn variance_field(grid: CellGrid, samples: &[&CellField]) -> Result<CellField> {
    if samples.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: samples.len(),
        });
    }
    let mean = mean_field(grid, samples)?;
    let mut acc = vec![0.0; grid.len()];
    for s in samples {
        for ((a, v), m) in acc.iter_mut().zip(s.values()).zip(mean.values()) {
            let d = v - m;
            *a += d * d;
        }
    }
    let inv = 1.0 / (samples.len() - 1) as f64;
    acc.iter_mut().for_each(|a| *a *= inv);
    CellField::from_vec(grid, acc)
}

/// `‖𝒱‖ = Σ_cells h² Var[d]` for per-sample difference fields `d`.
pub fn level_variance(differences: &[&CellField]) -> Result<f64> {
    let first = differences.first().ok_or(Error::InsufficientData { needed: 2, got: 0 })?;
    let grid = first.grid();
    let var = variance_field(grid, differences)?;
    let h2 = grid.h() * grid.h();
    Ok(var.values().iter().sum::<f64>() * h2)
}

/// Lagrange-optimal sample counts
/// `N_ℓ = ceil(ε⁻² (Σ_k sqrt(V_k W_k)) sqrt(V_ℓ / W_ℓ))`, floored at 2.
pub fn optimal_samples(variances: &[f64], costs: &[f64], eps: f64) -> Result<Vec<usize>> {
    if variances.len() != costs.len() {
        return Err(Error::Dimension {
            expected: variances.len(),
            found: costs.len(),
        });
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    if variances.iter().any(|v| !(*v >= 0.0)) || costs.iter().any(|w| !(*w > 0.0)) {
        return Err(Error::InvalidParameter(
            "variances must be non-negative and costs positive".into(),
        ));
    }
    let sum: f64 = variances
        .iter()
        .zip(costs)
        .map(|(v, w)| (v * w).sqrt())
        .sum();
    Ok(variances
        .iter()
        .zip(costs)
        .map(|(v, w)| {
            let n = sum * (v / w).sqrt() / (eps * eps);
            // Absorb representation noise such as 200.00000000000003.
            let n = (n * (1.0 - 1e-12)).ceil();
            (n as usize).max(2)
        })
        .collect())
}

/// Least-squares slope `a` of `log d_ℓ` against `-log h_ℓ`, i.e. `d ≈ C hᵃ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub rate: f64,
    /// `false` when fewer than three points were available and `a = 1` was
    /// assumed.
    pub fitted: bool,
}

pub fn fit_rate(h: &[f64], diffs: &[f64]) -> RateFit {
    let pts: Vec<(f64, f64)> = h
        .iter()
        .zip(diffs)
        .filter(|(h, d)| **h > 0.0 && **d > 0.0)
        .map(|(h, d)| (h.ln(), d.ln()))
        .collect();
    if pts.len() < 3 {
        return RateFit {
            rate: 1.0,
            fitted: false,
        };
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    RateFit {
        rate: sxy / sxx,
        fitted: true,
    }
}

/// Discretization-bias proxy `‖p_ℓ - p_{ℓ-1}‖ / (sᵃ - 1)`.
pub fn bias_proxy(diff_norm: f64, refinement: f64, rate: f64) -> f64 {
    diff_norm / (refinement.powf(rate) - 1.0)
}

/// Mean-squared-error budget: squared bias plus sampling variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MseSplit {
    pub bias: f64,
    pub sampling_variance: f64,
    pub total: f64,
}

pub fn mse_split(bias: f64, sampling_variance: f64) -> MseSplit {
    MseSplit {
        bias,
        sampling_variance,
        total: bias * bias + sampling_variance,
    }
}
