//! Uniform cell-centred grids on the unit square.
//!
//! Cells are indexed `(i, j)` with `i` along x and `j` along z, both starting at
//! zero in memory (the CSV dumps use 1-based indices). Row `j = 0` touches the
//! bottom boundary `z = 0`. Storage is row-major with `i` fastest.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CellGrid {
    m: usize,
}

impl CellGrid {
    pub fn new(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::Config(format!(
                "a grid needs at least 2 cells per direction, got {m}"
            )));
        }
        Ok(Self { m })
    }

    /// Cells per direction.
    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    /// Cell width.
    #[inline]
    pub fn h(&self) -> f64 {
        1.0 / self.m as f64
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.m * self.m
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.m + i
    }

    /// Centre of cell `(i, j)`.
    #[inline]
    pub fn center(&self, i: usize, j: usize) -> (f64, f64) {
        let h = self.h();
        ((i as f64 + 0.5) * h, (j as f64 + 0.5) * h)
    }

    pub fn coarsen(&self, s: usize) -> Result<CellGrid> {
        if s < 2 || self.m % s != 0 || self.m / s < 2 {
            return Err(Error::Config(format!(
                "cannot coarsen a grid of {} cells by a factor {s}",
                self.m
            )));
        }
        CellGrid::new(self.m / s)
    }

    pub fn refine(&self, s: usize) -> CellGrid {
        CellGrid { m: self.m * s }
    }
}

/// Coarsen `grid` by the factor `s`.
pub fn coarsen(grid: &CellGrid, s: usize) -> Result<CellGrid> {
    grid.coarsen(s)
}

/// A scalar value per cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellField {
    grid: CellGrid,
    values: Vec<f64>,
}

impl CellField {
    pub fn zeros(grid: CellGrid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: CellGrid, value: f64) -> Self {
        Self {
            grid,
            values: vec![value; grid.len()],
        }
    }

    pub fn from_vec(grid: CellGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Dimension {
                expected: grid.len(),
                found: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    /// Evaluate `f(x, z)` at every cell centre.
    pub fn from_fn(grid: CellGrid, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let m = grid.m();
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..m {
            for i in 0..m {
                let (x, z) = grid.center(i, j);
                values.push(f(x, z));
            }
        }
        Self { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> CellGrid {
        self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    fn check_same_grid(&self, other: &CellField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::Dimension {
                expected: self.grid.m(),
                found: other.grid.m(),
            });
        }
        Ok(())
    }

    /// `self - other` cell by cell.
    pub fn sub(&self, other: &CellField) -> Result<CellField> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        Ok(CellField {
            grid: self.grid,
            values,
        })
    }

    pub fn add_assign(&mut self, other: &CellField) -> Result<()> {
        self.check_same_grid(other)?;
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += b;
        }
        Ok(())
    }

    /// Discrete L²(𝒟) norm, `sqrt(Σ v² h²)`.
    pub fn l2_norm(&self) -> f64 {
        let h = self.grid.h();
        (self.values.iter().map(|v| v * v).sum::<f64>() * h * h).sqrt()
    }
}

/// Bilinear interpolation from cell centres of `field` onto the finer `target`
/// grid, whose cell count must be an integer multiple of the source's.
///
/// Target centres outside the hull of source centres (the half-cell strip along
/// the boundary) are clamped onto it, which amounts to constant extrapolation
/// in the direction normal to the boundary.
pub fn interpolate_bilinear(field: &CellField, target: CellGrid) -> Result<CellField> {
    let src = field.grid();
    let (mc, mf) = (src.m(), target.m());
    if mf < mc || mf % mc != 0 {
        return Err(Error::Dimension {
            expected: mc * 2,
            found: mf,
        });
    }
    if mf == mc {
        return Ok(field.clone());
    }
    let ratio = (mf / mc) as f64;
    let last = (mc - 1) as f64;
    // Source index coordinate of each target centre along one axis.
    let weights: Vec<(usize, usize, f64)> = (0..mf)
        .map(|i| {
            let xi = ((i as f64 + 0.5) / ratio - 0.5).clamp(0.0, last);
            let i0 = (xi.floor() as usize).min(mc - 2);
            (i0, i0 + 1, xi - i0 as f64)
        })
        .collect();
    let v = field.values();
    let mut out = Vec::with_capacity(target.len());
    for &(j0, j1, tz) in &weights {
        for &(i0, i1, tx) in &weights {
            let a = v[j0 * mc + i0];
            let b = v[j0 * mc + i1];
            let c = v[j1 * mc + i0];
            let d = v[j1 * mc + i1];
            let bottom = a + tx * (b - a);
            let top = c + tx * (d - c);
            out.push(bottom + tz * (top - bottom));
        }
    }
    CellField::from_vec(target, out)
}

/// One level of the spatio-temporal hierarchy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridLevel {
    pub grid: CellGrid,
    pub dt: f64,
}

/// Geometric chain `h_ℓ = s^{-ℓ} h_0` with the time step tied to the cell width
/// by a fixed ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridHierarchy {
    refinement: usize,
    levels: Vec<GridLevel>,
}

impl GridHierarchy {
    /// `levels` is the number of levels `L + 1`; `dt_ratio` is `Δt_ℓ / h_ℓ`
    /// (1 for the usual `Δt_ℓ = h_ℓ` coupling).
    pub fn new(coarsest: CellGrid, levels: usize, refinement: usize, dt_ratio: f64) -> Result<Self> {
        if levels == 0 {
            return Err(Error::Config("a hierarchy needs at least one level".into()));
        }
        if refinement < 2 {
            return Err(Error::Config(format!(
                "refinement factor must be at least 2, got {refinement}"
            )));
        }
        if !(dt_ratio > 0.0) {
            return Err(Error::Config("time step ratio must be positive".into()));
        }
        let mut grid = coarsest;
        let mut out = Vec::with_capacity(levels);
        for _ in 0..levels {
            out.push(GridLevel {
                grid,
                dt: dt_ratio * grid.h(),
            });
            grid = grid.refine(refinement);
        }
        Ok(Self {
            refinement,
            levels: out,
        })
    }

    pub fn refinement(&self) -> usize {
        self.refinement
    }

    pub fn levels(&self) -> &[GridLevel] {
        &self.levels
    }

    pub fn level(&self, l: usize) -> &GridLevel {
        &self.levels[l]
    }

    pub fn finest(&self) -> &GridLevel {
        self.levels.last().expect("hierarchy is never empty")
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }
}
