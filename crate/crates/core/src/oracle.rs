//! Independent Godunov finite-volume reference solver.
//!
//! First-order scheme on a uniform grid with the convex-flux interface
//! formula and outflow boundaries. It shares no code path with the
//! variational solver, which makes it the cross-validation oracle for every
//! inverse construction: agreement of the two solvers in L¹ as dx → 0 is a
//! genuine two-sided check.

use crate::flux::ConvexFlux;
use crate::piecewise::{Piece, PiecewiseProfile};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("grid must contain at least one cell")]
    EmptyGrid,
    #[error("grid spacing must be positive, got {0}")]
    BadSpacing(f64),
    #[error("Courant number must lie in ]0, 1], got {0}")]
    BadCourant(f64),
    #[error("final time must be nonnegative, got {0}")]
    NegativeTime(f64),
}

/// Uniform finite-volume grid of cell averages.
#[derive(Debug, Clone)]
pub struct FvGrid {
    pub x_lo: f64,
    pub dx: f64,
    pub cells: Vec<f64>,
    pub t: f64,
    pub cfl: f64,
}

impl FvGrid {
    pub fn new(x_lo: f64, dx: f64, cells: Vec<f64>, cfl: f64) -> Result<Self, OracleError> {
        if cells.is_empty() {
            return Err(OracleError::EmptyGrid);
        }
        if !(dx > 0.0) {
            return Err(OracleError::BadSpacing(dx));
        }
        if !(cfl > 0.0 && cfl <= 1.0) {
            return Err(OracleError::BadCourant(cfl));
        }
        Ok(FvGrid {
            x_lo,
            dx,
            cells,
            t: 0.0,
            cfl,
        })
    }

    /// Exact cell averages of a profile on [x_lo, x_hi] at spacing dx.
    pub fn from_profile(
        u0: &PiecewiseProfile,
        x_lo: f64,
        x_hi: f64,
        dx: f64,
        cfl: f64,
    ) -> Result<Self, OracleError> {
        if !(dx > 0.0) {
            return Err(OracleError::BadSpacing(dx));
        }
        let n = ((x_hi - x_lo) / dx).round().max(1.0) as usize;
        let dx_eff = (x_hi - x_lo) / n as f64;
        let cells = (0..n)
            .map(|i| {
                let a = x_lo + i as f64 * dx_eff;
                u0.integrate(a, a + dx_eff) / dx_eff
            })
            .collect();
        FvGrid::new(x_lo, dx_eff, cells, cfl)
    }

    pub fn x_hi(&self) -> f64 {
        self.x_lo + self.dx * self.cells.len() as f64
    }

    pub fn total_mass(&self) -> f64 {
        self.cells.iter().sum::<f64>() * self.dx
    }

    fn max_speed(&self, flux: &ConvexFlux) -> f64 {
        // f' is monotone: the extremes live at the extreme cell values.
        let (lo, hi) = self
            .cells
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
                (a.min(v), b.max(v))
            });
        flux.df(lo).abs().max(flux.df(hi).abs())
    }

    /// Stable step size under the grid's Courant number. Degenerate when all
    /// speeds vanish; the caller falls back to cfl·dx.
    pub fn stable_dt(&self, flux: &ConvexFlux) -> f64 {
        let s = self.max_speed(flux);
        if s > 1e-300 {
            self.cfl * self.dx / s
        } else {
            self.cfl * self.dx
        }
    }

    /// Piecewise-constant view of the cell averages.
    pub fn to_profile(&self) -> PiecewiseProfile {
        let pieces = self
            .cells
            .iter()
            .enumerate()
            .map(|(i, &v)| Piece {
                x_lo: self.x_lo + i as f64 * self.dx,
                x_hi: self.x_lo + (i + 1) as f64 * self.dx,
                a: v,
                b: 0.0,
            })
            .collect();
        PiecewiseProfile::new(pieces, self.cells[0], self.cells[self.cells.len() - 1])
            .expect("grid cells are contiguous")
    }
}

/// One Godunov update with step `dt` and outflow (copied ghost) boundaries.
pub fn godunov_step(grid: &FvGrid, flux: &ConvexFlux, dt: f64) -> Result<FvGrid, OracleError> {
    if grid.cells.is_empty() {
        return Err(OracleError::EmptyGrid);
    }
    let n = grid.cells.len();
    let u = &grid.cells;
    let ratio = dt / grid.dx;
    // Interface fluxes F_{i-1/2} for i = 0..n, ghosts copying the edge cells.
    let mut interface = Vec::with_capacity(n + 1);
    interface.push(flux.godunov_flux(u[0], u[0]));
    for i in 1..n {
        interface.push(flux.godunov_flux(u[i - 1], u[i]));
    }
    interface.push(flux.godunov_flux(u[n - 1], u[n - 1]));
    let cells = (0..n)
        .map(|i| u[i] - ratio * (interface[i + 1] - interface[i]))
        .collect();
    let mut next = grid.clone();
    next.cells = cells;
    next.t = grid.t + dt;
    Ok(next)
}

/// March the datum to time `t_final` and return the piecewise-constant
/// result. The grid is padded beyond [a, b] by the maximal wave travel so
/// the outflow boundaries never pollute the window.
pub fn evolve_fv(
    u0: &PiecewiseProfile,
    flux: &ConvexFlux,
    t_final: f64,
    a: f64,
    b: f64,
    dx: f64,
    cfl: f64,
) -> Result<PiecewiseProfile, OracleError> {
    if t_final < 0.0 {
        return Err(OracleError::NegativeTime(t_final));
    }
    let (lo_v, hi_v) = u0.value_range();
    let vmax = flux.df(lo_v).abs().max(flux.df(hi_v).abs());
    let pad = t_final * vmax + 1.0;
    let mut grid = FvGrid::from_profile(u0, a - pad, b + pad, dx, cfl)?;
    while grid.t < t_final {
        let dt = grid.stable_dt(flux).min(t_final - grid.t);
        grid = godunov_step(&grid, flux, dt)?;
    }
    Ok(grid.to_profile())
}
