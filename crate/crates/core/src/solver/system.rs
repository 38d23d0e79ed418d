//! Five-point finite-volume systems on cell-centred grids.

use super::{FlowProblem, Side};
use crate::constitutive::VgState;
use crate::error::{Error, Result};
use crate::grid::CellGrid;

/// Stencil of one cell in the sign convention `c > 0`, off-diagonals `<= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FivePoint {
    pub c: f64,
    pub w: f64,
    pub e: f64,
    pub s: f64,
    pub n: f64,
}

/// Diffusion-reaction operator `r u - ∇·(k ∇u)` with homogeneous boundary data.
///
/// Face coefficients live on the faces. Boundary faces hold the value that
/// enters the ghost-eliminated Dirichlet term `2 k / h²`, or zero on closed
/// sides, so the same storage survives coarsening.
#[derive(Debug, Clone, PartialEq)]
pub struct StencilLevel {
    grid: CellGrid,
    /// `(m+1) × m`; entry `j (m+1) + i` is the face left of cell `(i, j)`.
    pub kx: Vec<f64>,
    /// `m × (m+1)`; entry `j m + i` is the face below cell `(i, j)`.
    pub kz: Vec<f64>,
    /// `C / Δt` per cell.
    pub reaction: Vec<f64>,
    // Link weights (non-negative) and diagonal, derived from the above.
    aw: Vec<f64>,
    ae: Vec<f64>,
    as_: Vec<f64>,
    an: Vec<f64>,
    diag: Vec<f64>,
}

impl StencilLevel {
    pub fn new(grid: CellGrid, kx: Vec<f64>, kz: Vec<f64>, reaction: Vec<f64>) -> Result<Self> {
        let m = grid.m();
        for (got, want) in [
            (kx.len(), (m + 1) * m),
            (kz.len(), m * (m + 1)),
            (reaction.len(), m * m),
        ] {
            if got != want {
                return Err(Error::Dimension {
                    expected: want,
                    found: got,
                });
            }
        }
        let mut level = Self {
            grid,
            kx,
            kz,
            reaction,
            aw: vec![0.0; m * m],
            ae: vec![0.0; m * m],
            as_: vec![0.0; m * m],
            an: vec![0.0; m * m],
            diag: vec![0.0; m * m],
        };
        level.build_links()?;
        Ok(level)
    }

    /// Operator with every face coefficient equal to `k` on the given sides.
    pub fn uniform(grid: CellGrid, k: f64, reaction: f64, problem: &FlowProblem) -> Result<Self> {
        let m = grid.m();
        let mut kx = vec![k; (m + 1) * m];
        let mut kz = vec![k; m * (m + 1)];
        let b = &problem.boundaries;
        for j in 0..m {
            if b.left == Side::NoFlux {
                kx[j * (m + 1)] = 0.0;
            }
            if b.right == Side::NoFlux {
                kx[j * (m + 1) + m] = 0.0;
            }
        }
        for i in 0..m {
            if b.bottom == Side::NoFlux {
                kz[i] = 0.0;
            }
            if b.top == Side::NoFlux {
                kz[m * m + i] = 0.0;
            }
        }
        Self::new(grid, kx, kz, vec![reaction; m * m])
    }

    fn build_links(&mut self) -> Result<()> {
        let m = self.grid.m();
        let ih2 = 1.0 / (self.grid.h() * self.grid.h());
        for j in 0..m {
            for i in 0..m {
                let c = j * m + i;
                let west = self.kx[j * (m + 1) + i] * ih2;
                let east = self.kx[j * (m + 1) + i + 1] * ih2;
                let south = self.kz[j * m + i] * ih2;
                let north = self.kz[(j + 1) * m + i] * ih2;
                // Boundary faces sit half a cell away from the centre.
                let wb = if i == 0 { 2.0 } else { 1.0 };
                let eb = if i + 1 == m { 2.0 } else { 1.0 };
                let sb = if j == 0 { 2.0 } else { 1.0 };
                let nb = if j + 1 == m { 2.0 } else { 1.0 };
                self.aw[c] = if i == 0 { 0.0 } else { west };
                self.ae[c] = if i + 1 == m { 0.0 } else { east };
                self.as_[c] = if j == 0 { 0.0 } else { south };
                self.an[c] = if j + 1 == m { 0.0 } else { north };
                let d = wb * west + eb * east + sb * south + nb * north + self.reaction[c];
                if !(d > 0.0) || !d.is_finite() {
                    return Err(Error::SingularSystem { cell: c });
                }
                self.diag[c] = d;
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> CellGrid {
        self.grid
    }

    pub fn stencil(&self, i: usize, j: usize) -> FivePoint {
        let c = self.grid.index(i, j);
        FivePoint {
            c: self.diag[c],
            w: -self.aw[c],
            e: -self.ae[c],
            s: -self.as_[c],
            n: -self.an[c],
        }
    }

    /// `out = A x`.
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let m = self.grid.m();
        for j in 0..m {
            for i in 0..m {
                let c = j * m + i;
                let mut v = self.diag[c] * x[c];
                if i > 0 {
                    v -= self.aw[c] * x[c - 1];
                }
                if i + 1 < m {
                    v -= self.ae[c] * x[c + 1];
                }
                if j > 0 {
                    v -= self.as_[c] * x[c - m];
                }
                if j + 1 < m {
                    v -= self.an[c] * x[c + m];
                }
                out[c] = v;
            }
        }
    }

    /// `r = b - A x`, returning `‖r‖_∞`.
    pub fn residual(&self, x: &[f64], b: &[f64], r: &mut [f64]) -> f64 {
        self.apply(x, r);
        let mut max = 0.0f64;
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
            max = max.max(ri.abs());
        }
        max
    }

    /// One lexicographic Gauss–Seidel sweep.
    pub fn gauss_seidel_sweep(&self, x: &mut [f64], b: &[f64]) {
        let m = self.grid.m();
        for j in 0..m {
            for i in 0..m {
                let c = j * m + i;
                let mut v = b[c];
                if i > 0 {
                    v += self.aw[c] * x[c - 1];
                }
                if i + 1 < m {
                    v += self.ae[c] * x[c + 1];
                }
                if j > 0 {
                    v += self.as_[c] * x[c - m];
                }
                if j + 1 < m {
                    v += self.an[c] * x[c + m];
                }
                x[c] = v / self.diag[c];
            }
        }
    }
}

/// A linearized Picard problem: operator plus right-hand side.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerSystem {
    pub level: StencilLevel,
    pub rhs: Vec<f64>,
    /// Boundary inflow `∫ -q·ν ds` of the current iterate [m²/h].
    pub inflow: f64,
}

#[inline]
fn harmonic(a: f64, b: f64) -> f64 {
    let s = a + b;
    if s > 0.0 {
        2.0 * a * b / s
    } else {
        0.0
    }
}

/// Assemble `(C/Δt) δp - ∇·(K ∇δp) = f̃` at the iterate `p`.
///
/// `states` holds the closures evaluated at `p`, `ks` the saturated
/// conductivity and `theta_old` the moisture of the previous time level.
pub fn assemble_inner(
    grid: CellGrid,
    p: &[f64],
    states: &[VgState],
    ks: &[f64],
    theta_old: &[f64],
    dt: f64,
    problem: &FlowProblem,
) -> Result<InnerSystem> {
    let m = grid.m();
    let h = grid.h();
    let ih2 = 1.0 / (h * h);
    let n = m * m;
    if p.len() != n || states.len() != n || ks.len() != n || theta_old.len() != n {
        return Err(Error::Dimension {
            expected: n,
            found: p.len().min(states.len()).min(ks.len()).min(theta_old.len()),
        });
    }
    let k: Vec<f64> = states
        .iter()
        .zip(ks)
        .map(|(s, ks)| ks * s.rel_conductivity)
        .collect();
    if let Some(c) = k.iter().position(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::SingularSystem { cell: c });
    }

    let b = &problem.boundaries;
    let boundary_k = |side: Side, cell: usize| match side {
        Side::Dirichlet(_) => k[cell],
        Side::NoFlux => 0.0,
    };
    let mut kx = vec![0.0; (m + 1) * m];
    let mut kz = vec![0.0; m * (m + 1)];
    for j in 0..m {
        let row = j * (m + 1);
        kx[row] = boundary_k(b.left, j * m);
        for i in 1..m {
            kx[row + i] = harmonic(k[j * m + i - 1], k[j * m + i]);
        }
        kx[row + m] = boundary_k(b.right, j * m + m - 1);
    }
    for i in 0..m {
        kz[i] = boundary_k(b.bottom, i);
        for j in 1..m {
            kz[j * m + i] = harmonic(k[(j - 1) * m + i], k[j * m + i]);
        }
        kz[m * m + i] = boundary_k(b.top, (m - 1) * m + i);
    }

    let reaction: Vec<f64> = states.iter().map(|s| s.capacity / dt).collect();
    let level = StencilLevel::new(grid, kx, kz, reaction)?;

    // f̃ = -(A p - Dirichlet lift) + ∂K/∂z + f - (θ - θ_old)/Δt
    let mut rhs = vec![0.0; n];
    level.apply(p, &mut rhs);
    let mut inflow = 0.0;
    let lift = |side: Side, face_k: f64, pc: f64, outward: f64, gravity: bool| -> (f64, f64) {
        match side {
            Side::Dirichlet(g) => {
                // Flux into the cell through this face, per unit face length.
                let flux = face_k * (2.0 * (g - pc) / h + if gravity { outward } else { 0.0 });
                (2.0 * face_k * ih2 * g, flux)
            }
            Side::NoFlux => (0.0, 0.0),
        }
    };
    for j in 0..m {
        for i in 0..m {
            let c = j * m + i;
            let pc = p[c];
            // `apply` includes the reaction term, which is not part of the flux.
            let mut v = -rhs[c] + level.reaction[c] * pc;
            if i == 0 {
                let (l, q) = lift(b.left, level.kx[j * (m + 1)], pc, 0.0, false);
                v += l;
                inflow += q * h;
            }
            if i + 1 == m {
                let (l, q) = lift(b.right, level.kx[j * (m + 1) + m], pc, 0.0, false);
                v += l;
                inflow += q * h;
            }
            if j == 0 {
                let (l, q) = lift(b.bottom, level.kz[i], pc, -1.0, problem.gravity);
                v += l;
                inflow += q * h;
            }
            if j + 1 == m {
                let (l, q) = lift(b.top, level.kz[m * m + i], pc, 1.0, problem.gravity);
                v += l;
                inflow += q * h;
            }
            if problem.gravity {
                v += (level.kz[(j + 1) * m + i] - level.kz[j * m + i]) / h;
            }
            v += problem.source;
            v -= (states[c].moisture - theta_old[c]) / dt;
            rhs[c] = v;
        }
    }
    Ok(InnerSystem { level, rhs, inflow })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::VgPoint;

    fn states_from_k(k: &[f64]) -> (Vec<VgState>, Vec<f64>) {
        let st = VgState {
            saturation: 1.0,
            moisture: 0.4,
            capacity: 0.0,
            rel_conductivity: 1.0,
        };
        (vec![st; k.len()], k.to_vec())
    }

    #[test]
    fn homogeneous_stencil_is_five_point_laplacian() {
        let grid = CellGrid::new(4).unwrap();
        let (st, ks) = states_from_k(&[1.0; 16]);
        let p = vec![0.0; 16];
        let sys = assemble_inner(grid, &p, &st, &ks, &[0.4; 16], 0.1, &FlowProblem::infiltration())
            .unwrap();
        let ih2 = 16.0;
        let s = sys.level.stencil(1, 1);
        assert_eq!((s.w, s.e, s.s, s.n), (-ih2, -ih2, -ih2, -ih2));
        assert_eq!(s.c, 4.0 * ih2);
        // Closed left side, Dirichlet bottom with a half-cell ghost distance.
        let corner = sys.level.stencil(0, 0);
        assert_eq!(corner.w, 0.0);
        assert_eq!(corner.s, 0.0);
        assert_eq!(corner.c, ih2 + 2.0 * ih2 + ih2);
    }

    #[test]
    fn harmonic_face_between_unequal_cells() {
        let grid = CellGrid::new(2).unwrap();
        let (st, ks) = states_from_k(&[1.0, 3.0, 1.0, 3.0]);
        let sys = assemble_inner(
            grid,
            &[0.0; 4],
            &st,
            &ks,
            &[0.4; 4],
            1.0,
            &FlowProblem::infiltration(),
        )
        .unwrap();
        let h2 = grid.h() * grid.h();
        assert!((sys.level.stencil(0, 0).e + 1.5 / h2).abs() < 1e-12);
        assert!((sys.level.stencil(1, 0).w + 1.5 / h2).abs() < 1e-12);
    }

    #[test]
    fn interior_rows_sum_to_reaction() {
        let grid = CellGrid::new(6).unwrap();
        let vg = VgPoint::new(1.0, 2.0, 0.5, 0.05).unwrap();
        let p: Vec<f64> = (0..36).map(|c| -0.05 * (c as f64 % 7.0) - 0.01).collect();
        let st: Vec<VgState> = p.iter().map(|&v| vg.eval(v)).collect();
        let ks: Vec<f64> = (0..36).map(|c| 0.1 + 0.01 * c as f64).collect();
        let sys = assemble_inner(grid, &p, &st, &ks, &[0.3; 36], 0.25, &FlowProblem::infiltration())
            .unwrap();
        for j in 1..5 {
            for i in 1..5 {
                let s = sys.level.stencil(i, j);
                let c = grid.index(i, j);
                assert!(s.w <= 0.0 && s.e <= 0.0 && s.s <= 0.0 && s.n <= 0.0);
                let row = s.c + s.w + s.e + s.s + s.n;
                assert!((row - st[c].capacity / 0.25).abs() < 1e-9 * s.c);
            }
        }
    }

    #[test]
    fn hydrostatic_state_has_zero_residual() {
        // p + z constant balances gravity exactly on a saturated column.
        let grid = CellGrid::new(8).unwrap();
        let problem = FlowProblem {
            boundaries: super::super::Boundaries {
                left: Side::NoFlux,
                right: Side::NoFlux,
                bottom: Side::Dirichlet(1.5),
                top: Side::Dirichlet(0.5),
            },
            gravity: true,
            source: 0.0,
        };
        let vg = VgPoint::new(1.0, 2.0, 0.5, 0.05).unwrap();
        let p: Vec<f64> = (0..64).map(|c| 1.5 - grid.center(c % 8, c / 8).1).collect();
        let st: Vec<VgState> = p.iter().map(|&v| vg.eval(v)).collect();
        let theta: Vec<f64> = st.iter().map(|s| s.moisture).collect();
        let sys = assemble_inner(grid, &p, &st, &[0.7; 64], &theta, 0.1, &problem).unwrap();
        assert!(sys.rhs.iter().all(|v| v.abs() < 1e-10), "{:?}", sys.rhs);
        assert!(sys.inflow.abs() < 1e-12);
    }
}
