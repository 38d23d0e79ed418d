//! wasm-bindgen exports for the static demo page in `www/`.
//!
//! Everything runs single threaded; grids are kept small by the page.

use richards_uq::bench::infiltration_problem;
use richards_uq::constitutive::VgPoint;
use richards_uq::randfield::{sample_soil, MaternSpec, Randomize, SoilBaseline, SoilModel, SoilRealization};
use richards_uq::solver::{solve_richards, Medium, SolverSettings};
use richards_uq::{CellField, CellGrid};
use wasm_bindgen::prelude::*;

/// A square field in row-major order, `z` rows from the bottom.
#[wasm_bindgen]
pub struct FieldView {
    m: usize,
    values: Vec<f64>,
    cycles: usize,
    failed: bool,
}

#[wasm_bindgen]
impl FieldView {
    #[wasm_bindgen(getter)]
    pub fn m(&self) -> usize {
        self.m
    }

    #[wasm_bindgen(getter)]
    pub fn values(&self) -> Vec<f64> {
        self.values.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    #[wasm_bindgen(getter)]
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// W-cycles spent; zero for sampled fields.
    #[wasm_bindgen(getter)]
    pub fn cycles(&self) -> usize {
        self.cycles
    }

    #[wasm_bindgen(getter)]
    pub fn failed(&self) -> bool {
        self.failed
    }
}

impl FieldView {
    fn of(field: &CellField) -> Self {
        Self {
            m: field.grid().m(),
            values: field.values().to_vec(),
            cycles: 0,
            failed: false,
        }
    }
}

fn err(e: richards_uq::Error) -> JsError {
    JsError::new(&e.to_string())
}

fn model(alpha: f64, n: f64, phi2: bool, randomize: bool) -> SoilModel {
    SoilModel {
        baseline: SoilBaseline {
            alpha,
            n,
            ..SoilBaseline::default()
        },
        matern: if phi2 { MaternSpec::PHI2 } else { MaternSpec::PHI1 },
        randomize: if randomize { Randomize::All } else { Randomize::None },
        ..SoilModel::default()
    }
}

fn realize(m: usize, alpha: f64, n: f64, phi2: bool, randomize: bool, seed: u64) -> Result<SoilRealization, JsError> {
    let grid = CellGrid::new(m).map_err(err)?;
    sample_soil(grid, &model(alpha, n, phi2, randomize), seed).map_err(err)
}

/// One soil parameter field. `which` indexes `ks, alpha, n, theta_s, theta_r`.
#[wasm_bindgen]
pub fn sample_field(m: usize, which: usize, alpha: f64, n: f64, phi2: bool, seed: u64) -> Result<FieldView, JsError> {
    let soil = realize(m, alpha, n, phi2, true, seed)?;
    let f = match which {
        0 => &soil.ks,
        1 => &soil.alpha,
        2 => &soil.n,
        3 => &soil.theta_s,
        4 => &soil.theta_r,
        _ => return Err(JsError::new("field index must be 0..5")),
    };
    Ok(FieldView::of(f))
}

/// Pressure head after infiltrating for `t_final` hours into one soil sample.
#[wasm_bindgen]
pub fn solve_infiltration(
    m: usize,
    alpha: f64,
    n: f64,
    randomize: bool,
    seed: u64,
    t_final: f64,
) -> Result<FieldView, JsError> {
    let soil = realize(m, alpha, n, false, randomize, seed)?;
    let grid = soil.grid();
    let scenario = infiltration_problem(t_final);
    let p0 = scenario.initial.field(grid);
    let out = solve_richards(
        &p0,
        &Medium::from_soil(&soil),
        &scenario.flow,
        grid.h(),
        t_final,
        &SolverSettings::default(),
    )
    .map_err(err)?;
    let mut view = FieldView::of(&out.pressure);
    view.cycles = out.stats.total_cycles;
    view.failed = out.stats.failed;
    Ok(view)
}

/// Retention and conductivity curves on `points` log-spaced suctions in
/// `[1e-3, 1e2]`, interleaved as `p, θ, K_r`.
#[wasm_bindgen]
pub fn retention_curves(alpha: f64, n: f64, theta_s: f64, theta_r: f64, points: usize) -> Result<Vec<f64>, JsError> {
    let vg = VgPoint::new(alpha, n, theta_s, theta_r).map_err(err)?;
    let points = points.max(2);
    let mut out = Vec::with_capacity(3 * points);
    for i in 0..points {
        let t = i as f64 / (points - 1) as f64;
        let p = -(10f64).powf(-3.0 + 5.0 * t);
        out.extend([p, vg.moisture(p), vg.rel_conductivity(p)]);
    }
    Ok(out)
}
