//! Anisotropic Matérn covariance and the modified Bessel function it needs.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Parameter set `(ν, λ_x, λ_z, σ²)` of the anisotropic Matérn kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaternSpec {
    pub nu: f64,
    pub lambda_x: f64,
    pub lambda_z: f64,
    pub variance: f64,
}

impl MaternSpec {
    /// Isotropic preset `(1.0, 0.2, 0.2, 1)`.
    pub const PHI1: MaternSpec = MaternSpec {
        nu: 1.0,
        lambda_x: 0.2,
        lambda_z: 0.2,
        variance: 1.0,
    };

    /// Anisotropic preset `(0.5, 0.1, 0.01, 1)`.
    pub const PHI2: MaternSpec = MaternSpec {
        nu: 0.5,
        lambda_x: 0.1,
        lambda_z: 0.01,
        variance: 1.0,
    };

    pub fn preset(name: &str) -> Option<MaternSpec> {
        match name.to_ascii_lowercase().as_str() {
            "phi1" => Some(Self::PHI1),
            "phi2" => Some(Self::PHI2),
            _ => None,
        }
    }

    /// A zero variance is accepted and yields deterministic (all-zero) fields.
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.nu) {
            return Err(Error::InvalidParameter("Matérn smoothness must be positive".into()));
        }
        if !positive(self.lambda_x) || !positive(self.lambda_z) {
            return Err(Error::InvalidParameter(
                "Matérn correlation lengths must be positive".into(),
            ));
        }
        if !(self.variance.is_finite() && self.variance >= 0.0) {
            return Err(Error::InvalidParameter(
                "Matérn variance must be non-negative".into(),
            ));
        }
        Ok(())
    }

    /// Scaled anisotropic distance between two points.
    pub fn scaled_distance(&self, dx: f64, dz: f64) -> f64 {
        ((dx / self.lambda_x).powi(2) + (dz / self.lambda_z).powi(2)).sqrt()
    }

    /// Covariance at offset `(dx, dz)`.
    pub fn covariance_at(&self, dx: f64, dz: f64) -> f64 {
        let r = self.scaled_distance(dx, dz);
        if r == 0.0 {
            return self.variance;
        }
        let arg = 2.0 * self.nu.sqrt() * r;
        // Far in the tail K_ν underflows; the covariance is zero to machine precision.
        if arg > 700.0 {
            return 0.0;
        }
        let norm = 2f64.powf(1.0 - self.nu) / libm::tgamma(self.nu);
        self.variance * norm * arg.powf(self.nu) * bessel_k(self.nu, arg)
    }
}

/// Matérn covariance between two points `(x, z)`.
pub fn matern_cov(x1: (f64, f64), x2: (f64, f64), spec: &MaternSpec) -> f64 {
    spec.covariance_at(x1.0 - x2.0, x1.1 - x2.1)
}

const CHEB_GAM1: [f64; 7] = [
    -1.142022680371168e0,
    6.5165112670737e-3,
    3.087090173086e-4,
    -3.4706269649e-6,
    6.9437664e-9,
    3.67795e-11,
    -1.356e-13,
];

const CHEB_GAM2: [f64; 8] = [
    1.843740587300905e0,
    -7.68528408447867e-2,
    1.2719271366546e-3,
    -4.9717367042e-6,
    -3.31261198e-8,
    2.423096e-10,
    -1.702e-13,
    -1.49e-15,
];

fn chebyshev(coeffs: &[f64], x: f64) -> f64 {
    let (mut d, mut dd) = (0.0, 0.0);
    let y2 = 2.0 * x;
    for &c in coeffs[1..].iter().rev() {
        let sv = d;
        d = y2 * d - dd + c;
        dd = sv;
    }
    x * d - dd + 0.5 * coeffs[0]
}

/// Modified Bessel function of the second kind `K_ν(x)` for real `ν ≥ 0` and
/// `x > 0` (Temme's series for small `x`, Steed's continued fraction otherwise,
/// followed by upward recurrence in the order).
pub fn bessel_k(nu: f64, x: f64) -> f64 {
    assert!(nu >= 0.0 && x > 0.0, "bessel_k needs nu >= 0 and x > 0");
    const EPS: f64 = f64::EPSILON;
    const MAXIT: usize = 100_000;
    let nl = (nu + 0.5).floor() as usize;
    let mu = nu - nl as f64;
    let mu2 = mu * mu;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;

    let (mut k_mu, mut k_mu1);
    if x < 2.0 {
        let x2 = 0.5 * x;
        let pimu = PI * mu;
        let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
        let d = -x2.ln();
        let e = mu * d;
        let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
        let xx = 8.0 * mu2 - 1.0;
        let gam1 = chebyshev(&CHEB_GAM1, xx);
        let gam2 = chebyshev(&CHEB_GAM2, xx);
        let gampl = gam2 - mu * gam1;
        let gammi = gam2 + mu * gam1;
        let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
        let mut sum = ff;
        let ee = e.exp();
        let mut p = 0.5 * ee / gampl;
        let mut q = 0.5 / (ee * gammi);
        let mut c = 1.0;
        let dd = x2 * x2;
        let mut sum1 = p;
        for i in 1..MAXIT {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi - mu2);
            c *= dd / fi;
            p /= fi - mu;
            q /= fi + mu;
            let del = c * ff;
            sum += del;
            sum1 += c * (p - fi * ff);
            if del.abs() < sum.abs() * EPS {
                break;
            }
        }
        k_mu = sum;
        k_mu1 = sum1 * xi2;
    } else {
        let mut b = 2.0 * (1.0 + x);
        let mut d = 1.0 / b;
        let mut delh = d;
        let mut h = d;
        let mut q1 = 0.0;
        let mut q2 = 1.0;
        let a1 = 0.25 - mu2;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        for i in 1..MAXIT {
            let fi = i as f64;
            a -= 2.0 * fi;
            c = -a * c / (fi + 1.0);
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh = (b * d - 1.0) * delh;
            h += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < EPS {
                break;
            }
        }
        h *= a1;
        k_mu = (PI / (2.0 * x)).sqrt() * (-x).exp() / s;
        k_mu1 = k_mu * (mu + x + 0.5 - h) * xi;
    }
    for i in 1..=nl {
        let next = (mu + i as f64) * xi2 * k_mu1 + k_mu;
        k_mu = k_mu1;
        k_mu1 = next;
    }
    k_mu
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `K_ν(x) = ∫_0^∞ exp(-x cosh t) cosh(ν t) dt`, trapezoidal rule (spectrally
    /// accurate for this smooth, rapidly decaying integrand).
    fn bessel_k_integral(nu: f64, x: f64) -> f64 {
        let step = 1e-3;
        let mut acc = 0.5 * (-x).exp();
        let mut i = 1;
        loop {
            let t = i as f64 * step;
            let v = (-x * t.cosh()).exp() * (nu * t).cosh();
            acc += v;
            if v < 1e-300 || t > 50.0 {
                break;
            }
            i += 1;
        }
        acc * step
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn half_integer_orders_match_closed_forms() {
        for &x in &[0.01, 0.3, 1.0, 1.999, 2.0, 5.0, 20.0, 100.0] {
            let k_half = (PI / (2.0 * x)).sqrt() * (-x).exp();
            assert!(rel(bessel_k(0.5, x), k_half) < 1e-13, "x = {x}");
            let k_three_half = k_half * (1.0 + 1.0 / x);
            assert!(rel(bessel_k(1.5, x), k_three_half) < 1e-13, "x = {x}");
        }
    }

    #[test]
    fn general_orders_match_integral_representation() {
        for &nu in &[0.0, 0.25, 1.0, 1.3, 2.0, 3.7] {
            for &x in &[0.05, 0.5, 1.5, 2.5, 8.0, 30.0] {
                let expect = bessel_k_integral(nu, x);
                assert!(
                    rel(bessel_k(nu, x), expect) < 1e-10,
                    "nu {nu} x {x}: {} vs {expect}",
                    bessel_k(nu, x)
                );
            }
        }
    }

    #[test]
    fn zero_distance_gives_variance() {
        let spec = MaternSpec {
            variance: 2.5,
            ..MaternSpec::PHI1
        };
        assert_eq!(matern_cov((0.3, 0.4), (0.3, 0.4), &spec), 2.5);
        // Continuity of the limit.
        assert!((matern_cov((0.3, 0.4), (0.3 + 1e-7, 0.4), &spec) - 2.5).abs() < 1e-5);
    }

    #[test]
    fn exponential_kernel_for_half_smoothness() {
        let lambda = 0.3;
        let spec = MaternSpec {
            nu: 0.5,
            lambda_x: lambda,
            lambda_z: lambda,
            variance: 1.0,
        };
        for &r in &[0.01, 0.1, 0.25, 0.7] {
            let got = matern_cov((0.0, 0.0), (r * 0.6, r * 0.8), &spec);
            let expect = (-(2f64).sqrt() * r / lambda).exp();
            assert!(rel(got, expect) < 1e-12);
        }
    }

    #[test]
    fn phi2_decays_faster_in_z_than_phi1() {
        for &d in &[0.005, 0.01, 0.05] {
            let c1 = matern_cov((0.5, 0.5), (0.5, 0.5 + d), &MaternSpec::PHI1);
            let c2 = matern_cov((0.5, 0.5), (0.5, 0.5 + d), &MaternSpec::PHI2);
            assert!(c2 < c1, "d = {d}: {c2} !< {c1}");
        }
    }

    #[test]
    fn presets_by_name() {
        assert_eq!(MaternSpec::preset("phi2"), Some(MaternSpec::PHI2));
        assert_eq!(MaternSpec::preset("PHI1"), Some(MaternSpec::PHI1));
        assert_eq!(MaternSpec::preset("phi3"), None);
    }
}
