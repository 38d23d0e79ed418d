//! Van Genuchten–Mualem closures for saturation, moisture content, specific
//! moisture capacity and relative conductivity.
//!
//! All functions take the pressure head `p` in metres; `p >= 0` is the
//! saturated branch.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Van Genuchten parameters of one cell. `m = 1 - 1/n` is always derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VgPoint {
    pub alpha: f64,
    pub n: f64,
    pub theta_s: f64,
    pub theta_r: f64,
}

impl VgPoint {
    pub fn new(alpha: f64, n: f64, theta_s: f64, theta_r: f64) -> Result<Self> {
        let vg = Self {
            alpha,
            n,
            theta_s,
            theta_r,
        };
        vg.validate()?;
        Ok(vg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::InvalidParameter("alpha must be positive".into()));
        }
        if !(self.n.is_finite() && self.n > 1.0) {
            return Err(Error::InvalidParameter("n must exceed 1".into()));
        }
        if !(self.theta_r < self.theta_s) {
            return Err(Error::InvalidParameter("theta_r must be below theta_s".into()));
        }
        Ok(())
    }

    #[inline]
    pub fn m(&self) -> f64 {
        1.0 - 1.0 / self.n
    }

    /// `|αp|^n` and `|αp|^{n-1}` for `p < 0`, `None` on the saturated branch.
    #[inline]
    fn powers(&self, p: f64) -> Option<(f64, f64)> {
        let ap = self.alpha * (-p);
        if p >= 0.0 || ap <= 0.0 {
            return None;
        }
        let l = ap.ln();
        Some(((self.n * l).exp(), ((self.n - 1.0) * l).exp()))
    }

    pub fn saturation(&self, p: f64) -> f64 {
        match self.powers(p) {
            None => 1.0,
            Some((x, _)) => (-self.m() * x.ln_1p()).exp(),
        }
    }

    pub fn moisture(&self, p: f64) -> f64 {
        self.theta_r + (self.theta_s - self.theta_r) * self.saturation(p)
    }

    /// `1 - S`, accurate close to saturation where `saturation` rounds to 1.
    pub fn unsaturation(&self, p: f64) -> f64 {
        match self.powers(p) {
            None => 0.0,
            Some((x, _)) => -(-self.m() * x.ln_1p()).exp_m1(),
        }
    }

    /// Air-filled pore volume `θ_s - θ`, accurate close to saturation.
    pub fn moisture_deficit(&self, p: f64) -> f64 {
        (self.theta_s - self.theta_r) * self.unsaturation(p)
    }

    /// `dθ/dp`.
    pub fn capacity(&self, p: f64) -> f64 {
        match self.powers(p) {
            None => 0.0,
            Some((x, x1)) => {
                let m = self.m();
                (self.theta_s - self.theta_r)
                    * self.alpha
                    * m
                    * self.n
                    * (-(m + 1.0) * x.ln_1p()).exp()
                    * x1
            }
        }
    }

    /// Mualem relative conductivity.
    pub fn rel_conductivity(&self, p: f64) -> f64 {
        match self.powers(p) {
            None => 1.0,
            Some((x, _)) => {
                let m = self.m();
                let l1p = x.ln_1p();
                let sqrt_s = (-0.5 * m * l1p).exp();
                // 1 - S^{1/m} = x/(1+x); the bracket is 1 - (x/(1+x))^m.
                let inner = -(m * (x.ln() - l1p)).exp_m1();
                sqrt_s * inner * inner
            }
        }
    }

    /// All four closures at once, sharing the power evaluations.
    pub fn eval(&self, p: f64) -> VgState {
        match self.powers(p) {
            None => VgState {
                saturation: 1.0,
                moisture: self.theta_s,
                capacity: 0.0,
                rel_conductivity: 1.0,
            },
            Some((x, x1)) => {
                let m = self.m();
                let l1p = x.ln_1p();
                let s = (-m * l1p).exp();
                let inner = -(m * (x.ln() - l1p)).exp_m1();
                VgState {
                    saturation: s,
                    moisture: self.theta_r + (self.theta_s - self.theta_r) * s,
                    capacity: (self.theta_s - self.theta_r)
                        * self.alpha
                        * m
                        * self.n
                        * s
                        / (1.0 + x)
                        * x1,
                    rel_conductivity: s.sqrt() * inner * inner,
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VgState {
    pub saturation: f64,
    pub moisture: f64,
    pub capacity: f64,
    pub rel_conductivity: f64,
}

pub fn saturation(p: f64, vg: &VgPoint) -> f64 {
    vg.saturation(p)
}

pub fn moisture(p: f64, vg: &VgPoint) -> f64 {
    vg.moisture(p)
}

pub fn capacity(p: f64, vg: &VgPoint) -> f64 {
    vg.capacity(p)
}

pub fn rel_conductivity(p: f64, vg: &VgPoint) -> f64 {
    vg.rel_conductivity(p)
}
