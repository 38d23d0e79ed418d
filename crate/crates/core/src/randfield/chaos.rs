//! Hermite chaos transform from standard normal to bounded marginals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::CellField;

/// Number of Gauss–Hermite nodes used to project onto the chaos basis.
pub const QUADRATURE_NODES: usize = 128;

/// Probabilists' Hermite polynomial `He_j(z)` via `H_{j+1} = z H_j - j H_{j-1}`.
pub fn hermite(j: usize, z: f64) -> f64 {
    let (mut prev, mut cur) = (0.0, 1.0);
    for k in 0..j {
        let next = z * cur - k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `He_0(z), …, He_order(z)`.
pub fn hermite_all(order: usize, z: f64, out: &mut Vec<f64>) {
    out.clear();
    out.push(1.0);
    if order >= 1 {
        out.push(z);
    }
    for k in 1..order {
        let next = z * out[k] - k as f64 * out[k - 1];
        out.push(next);
    }
}

/// Gauss–Hermite rule for `∫ f(x) exp(-x²) dx` (physicists' weight), nodes
/// found by Newton iteration on the orthonormal recurrence.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    const PIM4: f64 = 0.751_125_544_464_942_5; // π^{-1/4}
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let half = n.div_ceil(2);
    let nf = n as f64;
    let mut z = 0.0f64;
    for i in 0..half {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-0.16667),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = PIM4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Target marginal of a transformed field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Marginal {
    StandardNormal,
    Uniform { a: f64, b: f64 },
}

impl Marginal {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Marginal::StandardNormal => Ok(()),
            Marginal::Uniform { a, b } => {
                if a.is_finite() && b.is_finite() && b > a {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!(
                        "uniform({a}, {b}) has no invertible CDF"
                    )))
                }
            }
        }
    }

    /// Inverse CDF.
    pub fn quantile(&self, u: f64) -> f64 {
        match *self {
            Marginal::StandardNormal => {
                // Only reached through the generic projection, which the
                // standard-normal kind bypasses.
                unreachable!("standard normal projection is the identity")
            }
            Marginal::Uniform { a, b } => a + (b - a) * u,
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Marginal::StandardNormal => 0.0,
            Marginal::Uniform { a, b } => 0.5 * (a + b),
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            Marginal::StandardNormal => 1.0,
            Marginal::Uniform { a, b } => (b - a).powi(2) / 12.0,
        }
    }
}

/// Chaos weights `w_j = E[F_Y^{-1}(Φ(Z)) He_j(Z)] / j!`, `j = 0..=order`.
pub fn gpc_weights(marginal: &Marginal, order: usize) -> Result<Vec<f64>> {
    marginal.validate()?;
    if let Marginal::StandardNormal = marginal {
        let mut w = vec![0.0; order + 1];
        if order >= 1 {
            w[1] = 1.0;
        }
        return Ok(w);
    }
    project_quantile(|u| marginal.quantile(u), order)
}

/// Project an arbitrary quantile function onto the Hermite basis.
pub fn project_quantile(quantile: impl Fn(f64) -> f64, order: usize) -> Result<Vec<f64>> {
    let (nodes, weights) = gauss_hermite(QUADRATURE_NODES);
    let mut acc = vec![0.0; order + 1];
    let mut basis = Vec::with_capacity(order + 1);
    let norm = 1.0 / std::f64::consts::PI.sqrt();
    for (x, w) in nodes.iter().zip(&weights) {
        let z = std::f64::consts::SQRT_2 * x;
        let y = quantile(normal_cdf(z));
        if !y.is_finite() {
            return Err(Error::InvalidParameter(
                "quantile function is not finite on the quadrature nodes".into(),
            ));
        }
        hermite_all(order, z, &mut basis);
        for (a, h) in acc.iter_mut().zip(&basis) {
            *a += w * norm * y * h;
        }
    }
    let mut factorial = 1.0;
    for (j, a) in acc.iter_mut().enumerate() {
        if j > 0 {
            factorial *= j as f64;
        }
        *a /= factorial;
    }
    Ok(acc)
}

/// Marginal descriptor together with its chaos weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalSpec {
    pub marginal: Marginal,
    pub weights: Vec<f64>,
}

impl MarginalSpec {
    pub fn new(marginal: Marginal, order: usize) -> Result<Self> {
        Ok(Self {
            marginal,
            weights: gpc_weights(&marginal, order)?,
        })
    }

    pub fn standard_normal() -> Self {
        Self {
            marginal: Marginal::StandardNormal,
            weights: vec![0.0, 1.0],
        }
    }

    pub fn order(&self) -> usize {
        self.weights.len() - 1
    }

    /// `Σ_j w_j He_j(z)`; exact identity for the standard-normal kind.
    pub fn transform(&self, z: f64) -> f64 {
        if let Marginal::StandardNormal = self.marginal {
            return z;
        }
        let mut prev = 0.0;
        let mut cur = 1.0;
        let mut acc = self.weights[0];
        for (k, w) in self.weights.iter().enumerate().skip(1) {
            let next = z * cur - (k - 1) as f64 * prev;
            prev = cur;
            cur = next;
            acc += w * cur;
        }
        acc
    }
}

/// Pointwise chaos transform of a standard-normal field.
pub fn to_nongaussian(z: &CellField, spec: &MarginalSpec) -> CellField {
    let mut out = z.clone();
    for v in out.values_mut() {
        *v = spec.transform(*v);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::CellGrid;
    use crate::seed::rng_from;
    use rand_distr::{Distribution, StandardNormal};

    fn factorial(j: usize) -> f64 {
        (1..=j).map(|k| k as f64).product()
    }

    #[test]
    fn hermite_values() {
        for &z in &[-3.0, -0.5, 0.0, 1.0, 2.0, 7.5] {
            assert_eq!(hermite(0, z), 1.0);
            assert_eq!(hermite(1, z), z);
        }
        assert_eq!(hermite(2, 2.0), 3.0);
        // He_3 = z³ - 3z, He_4 = z⁴ - 6z² + 3 (from the derivative definition).
        for &z in &[-1.7, 0.3, 2.2] {
            assert!((hermite(3, z) - (z * z * z - 3.0 * z)).abs() < 1e-12);
            assert!((hermite(4, z) - (z.powi(4) - 6.0 * z * z + 3.0)).abs() < 1e-12);
        }
        let mut all = Vec::new();
        hermite_all(6, 1.3, &mut all);
        for (j, v) in all.iter().enumerate() {
            assert!((v - hermite(j, 1.3)).abs() < 1e-12);
        }
    }

    #[test]
    fn gauss_hermite_integrates_gaussian_moments() {
        let (x, w) = gauss_hermite(QUADRATURE_NODES);
        let total: f64 = w.iter().sum();
        assert!((total - std::f64::consts::PI.sqrt()).abs() < 1e-12);
        // E[He_j(Z) He_k(Z)] = j! δ_jk under the standard normal.
        for j in 0..8 {
            for k in 0..8 {
                let e: f64 = x
                    .iter()
                    .zip(&w)
                    .map(|(x, w)| {
                        let z = std::f64::consts::SQRT_2 * x;
                        w * hermite(j, z) * hermite(k, z)
                    })
                    .sum::<f64>()
                    / std::f64::consts::PI.sqrt();
                let expect = if j == k { factorial(j) } else { 0.0 };
                assert!((e - expect).abs() < 1e-9 * expect.max(1.0), "({j},{k}) {e}");
            }
        }
    }

    #[test]
    fn hermite_orthogonality_by_monte_carlo() {
        let mut rng = rng_from(11);
        let n = 1_000_000;
        let (mut sum, mut sum2) = (0.0, 0.0);
        for _ in 0..n {
            let z: f64 = StandardNormal.sample(&mut rng);
            let v = hermite(2, z) * hermite(3, z);
            sum += v;
            sum2 += v * v;
        }
        let mean = sum / n as f64;
        let se = ((sum2 / n as f64 - mean * mean) / n as f64).sqrt();
        assert!(mean.abs() < 3.0 * se, "mean {mean} se {se}");
    }

    #[test]
    fn uniform_weights() {
        let w = gpc_weights(&Marginal::Uniform { a: 2.7, b: 3.3 }, 6).unwrap();
        assert!((w[0] - 3.0).abs() < 1e-12);
        let w = gpc_weights(&Marginal::Uniform { a: -1.0, b: 1.0 }, 6).unwrap();
        assert!((w[1] - 1.0 / std::f64::consts::PI.sqrt()).abs() < 1e-10);
        for j in [0, 2, 4, 6] {
            assert!(w[j].abs() < 1e-10, "w[{j}] = {}", w[j]);
        }
        // Parseval: the truncated expansion cannot exceed the target variance.
        let var: f64 = w.iter().enumerate().skip(1).map(|(j, w)| w * w * factorial(j)).sum();
        assert!(var <= 1.0 / 3.0);
    }

    #[test]
    fn uniform_w1_by_monte_carlo() {
        // E[(2Φ(Z) - 1) Z] estimated directly.
        let mut rng = rng_from(12);
        let n = 400_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let z: f64 = StandardNormal.sample(&mut rng);
            sum += (2.0 * normal_cdf(z) - 1.0) * z;
        }
        let mc = sum / n as f64;
        let w = gpc_weights(&Marginal::Uniform { a: -1.0, b: 1.0 }, 3).unwrap();
        assert!((mc - w[1]).abs() < 5e-3);
    }

    #[test]
    fn invalid_marginal() {
        assert!(gpc_weights(&Marginal::Uniform { a: 1.0, b: 1.0 }, 6).is_err());
        assert!(MarginalSpec::new(Marginal::Uniform { a: 2.0, b: 1.0 }, 6).is_err());
    }

    #[test]
    fn standard_normal_is_identity() {
        let spec = MarginalSpec::new(Marginal::StandardNormal, 6).unwrap();
        let g = CellGrid::new(4).unwrap();
        let z = CellField::from_fn(g, |x, z| x - 2.0 * z);
        assert_eq!(to_nongaussian(&z, &spec), z);
    }

    #[test]
    fn uniform_transform_is_monotone_in_the_bulk() {
        // The truncated series is a polynomial, so it turns over in the far
        // tails (beyond |z| ≈ 2.1 at order 6); the bulk must stay increasing.
        let spec = MarginalSpec::new(Marginal::Uniform { a: 2.7, b: 3.3 }, 6).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for k in 0..=400 {
            let z = -2.0 + k as f64 * 0.01;
            let y = spec.transform(z);
            assert!(y > prev, "not increasing at z = {z}");
            prev = y;
        }
    }

    #[test]
    fn uniform_transform_marginal_statistics() {
        let spec = MarginalSpec::new(Marginal::Uniform { a: 2.7, b: 3.3 }, 6).unwrap();
        let mut rng = rng_from(13);
        let n = 1_000_000;
        let (mut sum, mut sum2) = (0.0, 0.0);
        let mut outside = 0usize;
        for _ in 0..n {
            let y = spec.transform(StandardNormal.sample(&mut rng));
            sum += y;
            sum2 += y * y;
            if !(2.7..=3.3).contains(&y) {
                outside += 1;
            }
        }
        let mean = sum / n as f64;
        let se = ((sum2 / n as f64 - mean * mean) / n as f64).sqrt();
        assert!((mean - 3.0).abs() < 3.0 * se, "mean {mean}");
        // Only the polynomial tails leave the support.
        assert!((outside as f64) / (n as f64) < 1e-3, "outside {outside}");
    }
}
