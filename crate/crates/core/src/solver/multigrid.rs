//! Cell-centred multigrid: lexicographic Gauss–Seidel smoothing, four-cell
//! averaging restriction, piecewise-constant prolongation and rediscretized
//! coarse operators built from arithmetically averaged face coefficients.

use super::system::{InnerSystem, StencilLevel};
use super::SolverSettings;
use crate::error::{Error, Result};
use crate::grid::CellGrid;

/// `sweeps` lexicographic Gauss–Seidel sweeps on `A x = b`.
pub fn smooth_gauss_seidel(level: &StencilLevel, x: &mut [f64], b: &[f64], sweeps: usize) {
    for _ in 0..sweeps {
        level.gauss_seidel_sweep(x, b);
    }
}

/// Coarse face coefficients: each coarse face is the mean of the two fine
/// faces it contains. Reaction terms are averaged over the four children.
pub fn coarsen_coefficients(fine: &StencilLevel) -> Result<StencilLevel> {
    let mf = fine.grid().m();
    let coarse = fine.grid().coarsen(2)?;
    let mc = coarse.m();
    let mut kx = vec![0.0; (mc + 1) * mc];
    let mut kz = vec![0.0; mc * (mc + 1)];
    let mut reaction = vec![0.0; mc * mc];
    for jc in 0..mc {
        for ic in 0..=mc {
            let (i, j) = (2 * ic, 2 * jc);
            kx[jc * (mc + 1) + ic] =
                0.5 * (fine.kx[j * (mf + 1) + i] + fine.kx[(j + 1) * (mf + 1) + i]);
        }
    }
    for jc in 0..=mc {
        for ic in 0..mc {
            let (i, j) = (2 * ic, 2 * jc);
            kz[jc * mc + ic] = 0.5 * (fine.kz[j * mf + i] + fine.kz[j * mf + i + 1]);
        }
    }
    for jc in 0..mc {
        for ic in 0..mc {
            let f = 2 * jc * mf + 2 * ic;
            reaction[jc * mc + ic] = 0.25
                * (fine.reaction[f]
                    + fine.reaction[f + 1]
                    + fine.reaction[f + mf]
                    + fine.reaction[f + mf + 1]);
        }
    }
    StencilLevel::new(coarse, kx, kz, reaction)
}

/// Average fine values over each 2×2 block.
pub fn restrict(fine: &[f64], fine_grid: CellGrid, coarse: &mut [f64]) {
    let mf = fine_grid.m();
    let mc = mf / 2;
    for jc in 0..mc {
        for ic in 0..mc {
            let f = 2 * jc * mf + 2 * ic;
            coarse[jc * mc + ic] = 0.25 * (fine[f] + fine[f + 1] + fine[f + mf] + fine[f + mf + 1]);
        }
    }
}

/// Add the coarse correction to all four children of each coarse cell.
pub fn prolong_add(coarse: &[f64], fine_grid: CellGrid, fine: &mut [f64]) {
    let mf = fine_grid.m();
    let mc = mf / 2;
    for j in 0..mf {
        let row = (j / 2) * mc;
        for i in 0..mf {
            fine[j * mf + i] += coarse[row + i / 2];
        }
    }
}

#[derive(Debug, Clone, Default)]
struct Work {
    x: Vec<f64>,
    b: Vec<f64>,
    r: Vec<f64>,
}

/// Operators on every level (finest first) plus scratch storage.
#[derive(Debug, Clone)]
pub struct MgHierarchy {
    levels: Vec<StencilLevel>,
    work: Vec<Work>,
    settings: SolverSettings,
}

impl MgHierarchy {
    pub fn new(fine: StencilLevel, settings: SolverSettings) -> Result<Self> {
        let mut levels = vec![fine];
        loop {
            let m = levels.last().unwrap().grid().m();
            if m % 2 != 0 || m / 2 < settings.coarsest.max(1) || m / 2 < 1 {
                break;
            }
            let next = coarsen_coefficients(levels.last().unwrap())?;
            levels.push(next);
        }
        let work = levels
            .iter()
            .map(|l| {
                let n = l.grid().len();
                Work {
                    x: vec![0.0; n],
                    b: vec![0.0; n],
                    r: vec![0.0; n],
                }
            })
            .collect();
        Ok(Self {
            levels,
            work,
            settings,
        })
    }

    pub fn levels(&self) -> &[StencilLevel] {
        &self.levels
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    fn cycle(&mut self, l: usize) {
        let s = self.settings;
        if l + 1 == self.levels.len() {
            let w = &mut self.work[l];
            smooth_gauss_seidel(&self.levels[l], &mut w.x, &w.b, s.coarse_sweeps);
            return;
        }
        {
            let w = &mut self.work[l];
            smooth_gauss_seidel(&self.levels[l], &mut w.x, &w.b, s.pre_sweeps);
            self.levels[l].residual(&w.x, &w.b, &mut w.r);
        }
        let (head, tail) = self.work.split_at_mut(l + 1);
        let (fine, coarse) = (&head[l], &mut tail[0]);
        restrict(&fine.r, self.levels[l].grid(), &mut coarse.b);
        coarse.x.iter_mut().for_each(|v| *v = 0.0);
        self.cycle(l + 1);
        self.cycle(l + 1);
        let (head, tail) = self.work.split_at_mut(l + 1);
        prolong_add(&tail[0].x, self.levels[l].grid(), &mut head[l].x);
        let w = &mut self.work[l];
        smooth_gauss_seidel(&self.levels[l], &mut w.x, &w.b, s.post_sweeps);
    }

    /// One W(ν₁,ν₂) cycle for `A x = b` on the finest level, in place.
    pub fn w_cycle(&mut self, x: &mut [f64], b: &[f64]) {
        self.work[0].x.copy_from_slice(x);
        self.work[0].b.copy_from_slice(b);
        self.cycle(0);
        x.copy_from_slice(&self.work[0].x);
    }

    /// `‖b - A x‖_∞` on the finest level.
    pub fn residual_norm(&mut self, x: &[f64], b: &[f64]) -> f64 {
        let w = &mut self.work[0];
        self.levels[0].residual(x, b, &mut w.r)
    }
}

/// Free-function form of [`MgHierarchy::w_cycle`].
pub fn w_cycle(hierarchy: &mut MgHierarchy, rhs: &[f64], iterate: &mut [f64]) {
    hierarchy.w_cycle(iterate, rhs);
}

/// Solve the inner problem from a zero initial guess; returns the update and
/// the number of W-cycles used.
pub fn solve_inner(system: &InnerSystem, settings: &SolverSettings) -> Result<(Vec<f64>, usize)> {
    let n = system.rhs.len();
    let mut x = vec![0.0; n];
    let initial = system.rhs.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if !initial.is_finite() {
        return Err(Error::InnerDivergence {
            cycles: 0,
            residual: initial,
        });
    }
    if initial < settings.eps_mg {
        return Ok((x, 0));
    }
    let mut mg = MgHierarchy::new(system.level.clone(), *settings)?;
    let mut residual = initial;
    for cycle in 1..=settings.max_cycles {
        mg.w_cycle(&mut x, &system.rhs);
        residual = mg.residual_norm(&x, &system.rhs);
        if !residual.is_finite() {
            break;
        }
        if residual < settings.eps_mg {
            return Ok((x, cycle));
        }
    }
    Err(Error::InnerDivergence {
        cycles: settings.max_cycles,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{Boundaries, FlowProblem, Side};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn poisson(m: usize) -> StencilLevel {
        StencilLevel::uniform(CellGrid::new(m).unwrap(), 1.0, 0.0, &FlowProblem::infiltration())
            .unwrap()
    }

    #[test]
    fn exact_solution_is_a_fixed_point() {
        let level = poisson(8);
        let x: Vec<f64> = (0..64).map(|c| (c as f64 * 0.37).sin()).collect();
        let mut b = vec![0.0; 64];
        level.apply(&x, &mut b);
        let mut y = x.clone();
        smooth_gauss_seidel(&level, &mut y, &b, 3);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn one_sweep_matches_hand_update() {
        // 3×3 grid with all sides closed except a reaction term of 1.
        let grid = CellGrid::new(3).unwrap();
        let closed = FlowProblem {
            boundaries: Boundaries {
                left: Side::NoFlux,
                right: Side::NoFlux,
                bottom: Side::NoFlux,
                top: Side::NoFlux,
            },
            gravity: false,
            source: 0.0,
        };
        let level = StencilLevel::uniform(grid, 1.0 / 9.0, 1.0, &closed).unwrap();
        // Off-diagonal links are exactly 1; diagonal = (#neighbours) + 1.
        let b = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0];
        let mut x = [0.0; 9];
        level.gauss_seidel_sweep(&mut x, &b);
        let mut e = [0.0; 9];
        e[0] = 1.0 / 3.0;
        e[1] = (2.0 + e[0]) / 4.0;
        e[2] = (3.0 + e[1]) / 3.0;
        e[3] = (4.0 + e[0]) / 4.0;
        e[4] = (5.0 + e[3] + e[1]) / 5.0;
        e[5] = (6.0 + e[4] + e[2]) / 4.0;
        e[6] = (7.0 + e[3]) / 3.0;
        e[7] = (8.0 + e[6] + e[4]) / 4.0;
        e[8] = (9.0 + e[7] + e[5]) / 3.0;
        for (a, b) in x.iter().zip(&e) {
            assert!((a - b).abs() < 1e-14, "{x:?} vs {e:?}");
        }
    }

    #[test]
    fn constant_coefficients_survive_coarsening() {
        let fine = poisson(16);
        let coarse = coarsen_coefficients(&fine).unwrap();
        assert_eq!(coarse.grid().m(), 8);
        let mc = 8;
        for j in 0..mc {
            assert_eq!(coarse.kx[j * (mc + 1)], 0.0);
            for i in 1..mc {
                assert_eq!(coarse.kx[j * (mc + 1) + i], 1.0);
            }
        }
        assert!(coarse.kz.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn two_fine_faces_average() {
        let grid = CellGrid::new(4).unwrap();
        let mut kx = vec![1.0; 20];
        kx[2] = 1.0; // row 0, face between cells 1 and 2
        kx[5 + 2] = 3.0; // row 1, same face
        let level = StencilLevel::new(grid, kx, vec![1.0; 20], vec![0.0; 16]).unwrap();
        let coarse = coarsen_coefficients(&level).unwrap();
        assert_eq!(coarse.kx[1], 2.0);
    }

    #[test]
    fn three_level_striped_chain_matches_direct_average() {
        let grid = CellGrid::new(8).unwrap();
        let m = 8;
        // Stripes in z: row j has coefficient 1 + j.
        let kx: Vec<f64> = (0..(m + 1) * m).map(|f| 1.0 + (f / (m + 1)) as f64).collect();
        let kz: Vec<f64> = (0..m * (m + 1)).map(|f| 1.0 + (f % m) as f64 * 0.5).collect();
        let level = StencilLevel::new(grid, kx.clone(), kz.clone(), vec![0.0; 64]).unwrap();
        let l1 = coarsen_coefficients(&level).unwrap();
        let l2 = coarsen_coefficients(&l1).unwrap();
        // Direct oracle: a level-2 x-face at (I, J) averages fine rows 4J..4J+4
        // of fine face column 4I.
        for jc in 0..2 {
            for ic in 0..=2 {
                let direct: f64 =
                    (0..4).map(|r| kx[(4 * jc + r) * (m + 1) + 4 * ic]).sum::<f64>() / 4.0;
                assert!((l2.kx[jc * 3 + ic] - direct).abs() < 1e-14);
            }
        }
        for jc in 0..=2 {
            for ic in 0..2 {
                let direct: f64 = (0..4).map(|r| kz[4 * jc * m + 4 * ic + r]).sum::<f64>() / 4.0;
                assert!((l2.kz[jc * 2 + ic] - direct).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn restriction_of_prolongation_is_identity() {
        let grid = CellGrid::new(8).unwrap();
        let coarse: Vec<f64> = (0..16).map(|c| c as f64 - 3.5).collect();
        let mut fine = vec![0.0; 64];
        prolong_add(&coarse, grid, &mut fine);
        let mut back = vec![0.0; 16];
        restrict(&fine, grid, &mut back);
        assert_eq!(back, coarse);
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let level = poisson(16);
        let mut mg = MgHierarchy::new(level.clone(), SolverSettings::default()).unwrap();
        assert_eq!(mg.depth(), 4);
        let mut x = vec![0.0; 256];
        mg.w_cycle(&mut x, &vec![0.0; 256]);
        assert!(x.iter().all(|&v| v == 0.0));
        let sys = InnerSystem {
            level,
            rhs: vec![0.0; 256],
            inflow: 0.0,
        };
        assert_eq!(solve_inner(&sys, &SolverSettings::default()).unwrap().1, 0);
    }

    #[test]
    fn poisson_contraction_per_cycle() {
        let level = poisson(32);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let b: Vec<f64> = (0..1024).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut mg = MgHierarchy::new(level, SolverSettings::default()).unwrap();
        let mut x = vec![0.0; 1024];
        let mut prev = mg.residual_norm(&x, &b);
        for _ in 0..6 {
            mg.w_cycle(&mut x, &b);
            let r = mg.residual_norm(&x, &b);
            assert!(r <= 0.2 * prev, "factor {}", r / prev);
            prev = r;
        }
    }

    #[test]
    fn manufactured_solution_recovered() {
        let grid = CellGrid::new(32).unwrap();
        let m = 32;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let kx: Vec<f64> = (0..(m + 1) * m)
            .map(|f| if f % (m + 1) == 0 || f % (m + 1) == m { 0.0 } else { rng.random_range(0.1..2.0) })
            .collect();
        let kz: Vec<f64> = (0..m * (m + 1)).map(|_| rng.random_range(0.1..2.0)).collect();
        let reaction: Vec<f64> = (0..m * m).map(|_| rng.random_range(0.0..5.0)).collect();
        let level = StencilLevel::new(grid, kx, kz, reaction).unwrap();
        let exact: Vec<f64> = (0..m * m)
            .map(|c| {
                let (x, z) = grid.center(c % m, c / m);
                (3.0 * x).sin() * z * (1.0 - z)
            })
            .collect();
        let mut rhs = vec![0.0; m * m];
        level.apply(&exact, &mut rhs);
        let sys = InnerSystem {
            level,
            rhs,
            inflow: 0.0,
        };
        let settings = SolverSettings {
            eps_mg: 1e-9,
            ..SolverSettings::default()
        };
        let (x, cycles) = solve_inner(&sys, &settings).unwrap();
        assert!(cycles > 0);
        let err = x.iter().zip(&exact).fold(0.0f64, |a, (u, v)| a.max((u - v).abs()));
        assert!(err < 1e-4, "error {err}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn gauss_seidel_error_energy_nonincreasing(seed in any::<u64>()) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let m = 6;
            let grid = CellGrid::new(m).unwrap();
            let kx: Vec<f64> = (0..(m + 1) * m).map(|_| rng.random_range(0.05..3.0)).collect();
            let kz: Vec<f64> = (0..m * (m + 1)).map(|_| rng.random_range(0.05..3.0)).collect();
            let reaction: Vec<f64> = (0..m * m).map(|_| rng.random_range(0.0..2.0)).collect();
            let level = StencilLevel::new(grid, kx, kz, reaction).unwrap();
            let b: Vec<f64> = (0..m * m).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mut x = vec![0.0; m * m];
            let exact = {
                let mut y = vec![0.0; m * m];
                smooth_gauss_seidel(&level, &mut y, &b, 4000);
                y
            };
            let energy = |x: &[f64]| -> f64 {
                // A-norm of the error.
                let e: Vec<f64> = x.iter().zip(&exact).map(|(a, b)| a - b).collect();
                let mut ae = vec![0.0; m * m];
                level.apply(&e, &mut ae);
                e.iter().zip(&ae).map(|(a, b)| a * b).sum::<f64>()
            };
            let mut prev = energy(&x);
            for _ in 0..10 {
                level.gauss_seidel_sweep(&mut x, &b);
                let now = energy(&x);
                prop_assert!(now <= prev * (1.0 + 1e-12) + 1e-20);
                prev = now;
            }
        }
    }
}
