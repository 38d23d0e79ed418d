//! FFT moving-average sampling of stationary Gaussian fields.
//!
//! The covariance between cell centres is embedded in a periodic array of side
//! `P = padding · M`, with lags wrapped symmetrically. Its 2-D DFT gives the
//! eigenvalues `λ` of the circulant covariance; the moving-average filter is
//! `sqrt(λ)` and a sample is `IDFT(sqrt(λ) · DFT(y)) / P²` restricted to the
//! physical `M × M` block.

use std::sync::Arc;

use rand_core::RngCore;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::matern::MaternSpec;
use crate::error::{Error, Result};
use crate::grid::{CellField, CellGrid};

/// Entries below this fraction of the largest eigenvalue are treated as roundoff.
pub const CLIP_RELATIVE: f64 = 1e-10;
/// Maximum tolerated fraction of negative spectral mass.
pub const NEGATIVE_MASS_TOLERANCE: f64 = 1e-6;

/// I.i.d. standard normal values on a periodic `n × n` array.
#[derive(Debug, Clone, PartialEq)]
pub struct WhiteNoise {
    n: usize,
    data: Vec<f64>,
}

impl WhiteNoise {
    pub fn draw<R: RngCore + ?Sized>(n: usize, rng: &mut R) -> Self {
        let data = (0..n * n)
            .map(|_| StandardNormal.sample(&mut *rng))
            .collect();
        Self { n, data }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_vec(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::Dimension {
                expected: n * n,
                found: data.len(),
            });
        }
        Ok(Self { n, data })
    }

    pub fn side(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    /// `y_{ℓ-1}^{i,j} = ½ (sum of the four fine entries in block (i,j))`.
    ///
    /// The factor ½ keeps each coarse entry standard normal.
    pub fn upscale(&self) -> Result<WhiteNoise> {
        upscale_noise(self)
    }
}

/// Block-average fine white noise onto the twice coarser periodic array.
pub fn upscale_noise(fine: &WhiteNoise) -> Result<WhiteNoise> {
    let n = fine.n;
    if n % 2 != 0 || n < 2 {
        return Err(Error::Dimension {
            expected: n + 1,
            found: n,
        });
    }
    let nc = n / 2;
    let y = &fine.data;
    let mut out = Vec::with_capacity(nc * nc);
    for j in 0..nc {
        let r0 = 2 * j * n;
        let r1 = r0 + n;
        for i in 0..nc {
            let c = 2 * i;
            out.push(0.5 * (y[r0 + c] + y[r0 + c + 1] + y[r1 + c] + y[r1 + c + 1]));
        }
    }
    Ok(WhiteNoise { n: nc, data: out })
}

struct Fft2 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    /// Unnormalised 2-D transform in place (rows, then columns via transpose).
    fn run(&self, data: &mut [Complex64], inverse: bool) {
        let plan = if inverse { &self.inverse } else { &self.forward };
        let n = self.n;
        plan.process(data);
        transpose(data, n);
        plan.process(data);
        transpose(data, n);
    }
}

fn transpose(data: &mut [Complex64], n: usize) {
    for j in 0..n {
        for i in (j + 1)..n {
            data.swap(j * n + i, i * n + j);
        }
    }
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2").field("n", &self.n).finish()
    }
}

/// Precomputed moving-average filter for one grid and covariance.
#[derive(Debug)]
pub struct FieldSampler {
    grid: CellGrid,
    padding: usize,
    spec: MaternSpec,
    /// `sqrt(λ)` per frequency, real and non-negative.
    factor: Vec<f64>,
    negative_fraction: f64,
    fft: Fft2,
}

impl FieldSampler {
    /// Build with the default padding factor 2.
    pub fn new(grid: CellGrid, spec: MaternSpec) -> Result<Self> {
        Self::with_padding(grid, spec, 2)
    }

    pub fn with_padding(grid: CellGrid, spec: MaternSpec, padding: usize) -> Result<Self> {
        spec.validate()?;
        if padding < 1 {
            return Err(Error::Config("padding factor must be at least 1".into()));
        }
        let p = padding * grid.m();
        let h = grid.h();
        let lag = |k: usize| k.min(p - k) as f64 * h;
        let mut buf: Vec<Complex64> = Vec::with_capacity(p * p);
        for kz in 0..p {
            let dz = lag(kz);
            for kx in 0..p {
                buf.push(Complex64::new(spec.covariance_at(lag(kx), dz), 0.0));
            }
        }
        let fft = Fft2::new(p);
        fft.run(&mut buf, false);

        let max = buf.iter().fold(0.0f64, |acc, c| acc.max(c.re));
        let floor = CLIP_RELATIVE * max;
        let mut negative = 0.0;
        let mut total = 0.0;
        let factor: Vec<f64> = buf
            .iter()
            .map(|c| {
                let v = c.re;
                total += v.abs();
                if v < -floor {
                    negative += -v;
                }
                v.max(0.0).sqrt()
            })
            .collect();
        let negative_fraction = if total > 0.0 { negative / total } else { 0.0 };
        if negative_fraction > NEGATIVE_MASS_TOLERANCE {
            return Err(Error::Embedding {
                fraction: negative_fraction,
                tolerance: NEGATIVE_MASS_TOLERANCE,
                padding,
            });
        }
        Ok(Self {
            grid,
            padding,
            spec,
            factor,
            negative_fraction,
            fft,
        })
    }

    pub fn grid(&self) -> CellGrid {
        self.grid
    }

    pub fn spec(&self) -> &MaternSpec {
        &self.spec
    }

    pub fn padding(&self) -> usize {
        self.padding
    }

    /// Side of the periodic array the white noise must live on.
    pub fn padded_side(&self) -> usize {
        self.padding * self.grid.m()
    }

    pub fn spectral_factor(&self) -> &[f64] {
        &self.factor
    }

    /// Fraction of spectral mass clipped away as negative.
    pub fn negative_fraction(&self) -> f64 {
        self.negative_fraction
    }

    /// Draw matching white noise for this sampler.
    pub fn draw_noise<R: RngCore + ?Sized>(&self, rng: &mut R) -> WhiteNoise {
        WhiteNoise::draw(self.padded_side(), rng)
    }

    /// Periodic covariance vector recovered from the filter, `IDFT(factor²)/P²`.
    pub fn embedded_covariance(&self) -> Vec<f64> {
        let p = self.padded_side();
        let mut buf: Vec<Complex64> = self
            .factor
            .iter()
            .map(|f| Complex64::new(f * f, 0.0))
            .collect();
        self.fft.run(&mut buf, true);
        let scale = 1.0 / (p * p) as f64;
        buf.iter().map(|c| c.re * scale).collect()
    }

    /// Correlated Gaussian field on the physical grid for the given noise.
    pub fn sample_gaussian(&self, noise: &WhiteNoise) -> Result<CellField> {
        let p = self.padded_side();
        if noise.side() != p {
            return Err(Error::Dimension {
                expected: p,
                found: noise.side(),
            });
        }
        let mut buf: Vec<Complex64> = noise
            .values()
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        self.fft.run(&mut buf, false);
        for (c, f) in buf.iter_mut().zip(&self.factor) {
            *c *= *f;
        }
        self.fft.run(&mut buf, true);
        let m = self.grid.m();
        let scale = 1.0 / (p * p) as f64;
        let mut out = Vec::with_capacity(m * m);
        for j in 0..m {
            out.extend(buf[j * p..j * p + m].iter().map(|c| c.re * scale));
        }
        CellField::from_vec(self.grid, out)
    }
}

/// Free-function form of [`FieldSampler::new`].
pub fn build_sampler(grid: CellGrid, spec: MaternSpec) -> Result<FieldSampler> {
    FieldSampler::new(grid, spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from;

    fn phi1_sampler(m: usize) -> FieldSampler {
        FieldSampler::new(CellGrid::new(m).unwrap(), MaternSpec::PHI1).unwrap()
    }

    #[test]
    fn factor_is_real_nonnegative_and_recovers_covariance() {
        let s = phi1_sampler(16);
        assert!(s.spectral_factor().iter().all(|&v| v >= 0.0 && v.is_finite()));
        let p = s.padded_side();
        let h = s.grid().h();
        let cov = s.embedded_covariance();
        for kz in 0..p {
            for kx in 0..p {
                let dx = kx.min(p - kx) as f64 * h;
                let dz = kz.min(p - kz) as f64 * h;
                let expect = MaternSpec::PHI1.covariance_at(dx, dz);
                assert!((cov[kz * p + kx] - expect).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn zero_variance_gives_zero_fields() {
        let spec = MaternSpec {
            variance: 0.0,
            ..MaternSpec::PHI1
        };
        let s = FieldSampler::new(CellGrid::new(8).unwrap(), spec).unwrap();
        assert!(s.spectral_factor().iter().all(|&v| v == 0.0));
        let y = s.draw_noise(&mut rng_from(1));
        assert!(s.sample_gaussian(&y).unwrap().values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_noise_and_linearity() {
        let s = phi1_sampler(8);
        let p = s.padded_side();
        let z = s.sample_gaussian(&WhiteNoise::zeros(p)).unwrap();
        assert!(z.values().iter().all(|&v| v == 0.0));

        let y1 = s.draw_noise(&mut rng_from(3));
        let y2 = s.draw_noise(&mut rng_from(4));
        let sum: Vec<f64> = y1.values().iter().zip(y2.values()).map(|(a, b)| a + b).collect();
        let y12 = WhiteNoise::from_vec(p, sum).unwrap();
        let z1 = s.sample_gaussian(&y1).unwrap();
        let z2 = s.sample_gaussian(&y2).unwrap();
        let z12 = s.sample_gaussian(&y12).unwrap();
        for k in 0..z12.values().len() {
            let lhs = z12.values()[k];
            let rhs = z1.values()[k] + z2.values()[k];
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn fixed_seed_is_bit_identical() {
        let s = phi1_sampler(16);
        let a = s.sample_gaussian(&s.draw_noise(&mut rng_from(99))).unwrap();
        let b = s.sample_gaussian(&s.draw_noise(&mut rng_from(99))).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_mismatched_noise() {
        let s = phi1_sampler(8);
        assert!(s.sample_gaussian(&WhiteNoise::zeros(8)).is_err());
    }

    #[test]
    fn upscale_examples() {
        let y = WhiteNoise::from_vec(4, vec![1.5; 16]).unwrap();
        assert!(upscale_noise(&y).unwrap().values().iter().all(|&v| v == 3.0));

        let checker: Vec<f64> = (0..16)
            .map(|k| if (k / 4 + k % 4) % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let y = WhiteNoise::from_vec(4, checker).unwrap();
        let c = upscale_noise(&y).unwrap();
        assert_eq!(c.side(), 2);
        assert!(c.values().iter().all(|&v| v == 0.0));

        assert!(upscale_noise(&WhiteNoise::zeros(5)).is_err());
    }

    #[test]
    fn upscaled_noise_is_standard_normal() {
        // 10^5 coarse entries.
        let mut rng = rng_from(5);
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        let mut count = 0usize;
        while count < 100_000 {
            let y = WhiteNoise::draw(64, &mut rng);
            for &v in y.upscale().unwrap().values() {
                sum += v;
                sum2 += v * v;
                count += 1;
            }
        }
        let mean = sum / count as f64;
        let var = sum2 / count as f64 - mean * mean;
        assert!(mean.abs() < 0.015, "mean {mean}");
        assert!((0.97..=1.03).contains(&var), "var {var}");
    }
}
