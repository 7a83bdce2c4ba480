//! Variational forward solvers.
//!
//! The entropy solution of ∂_t u + ∂_x f(u) = 0 admits the representation
//! u(t,x) = g((x − y*)/t) where y* minimizes
//!
//!   s(t,x,y) = t·f*((x−y)/t) + ∫₀^y u₀,
//!
//! and U(t,x) = min_y s(t,x,y) solves the Hamilton–Jacobi equation
//! ∂_t U + f(∂_x U) = 0 with U(0,·) = ∫₀^· u₀. For piecewise-linear data the
//! minimum is attained either at a breakpoint of u₀ or at a stationary point
//! of s, which makes the pointwise evaluation exact up to root-finding
//! tolerance. Taking the smallest (largest) minimizer yields the left (right)
//! trace; both exist and differ exactly at shocks.
//!
//! [`lift_cl_to_hj`] goes the other way: it rebuilds the potential from an
//! evolved state field by integrating along a Lipschitz anchor path.

use crate::flux::{ConvexFlux, FluxError};
use crate::parallel::par_map;
use crate::piecewise::{PiecewisePrimitive, PiecewiseProfile};
use thiserror::Error;

/// Stationary points of s are bracketed on this many sub-samples per piece.
const SUB_SAMPLES: usize = 64;
/// Absolute bisection tolerance on minimizer positions.
const BISECT_TOL: f64 = 1e-12;
/// Two candidates within this relative s-distance count as tied minimizers.
const TIE_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum LaxHopfError {
    #[error(transparent)]
    Flux(#[from] FluxError),
    #[error("time must be strictly positive, got {0}")]
    NonPositiveTime(f64),
    #[error("grid points must be finite and ascending")]
    BadGrid,
    #[error("anchor path is not admissible: {0}")]
    BadPath(String),
}

/// Result of one variational evaluation at (t, x).
#[derive(Debug, Clone, Copy)]
pub struct VariationalState {
    pub t: f64,
    pub x: f64,
    /// Smallest global minimizer of y ↦ s(t,x,y).
    pub minimizer_y: f64,
    /// Largest global minimizer; differs from `minimizer_y` at shocks.
    pub minimizer_y_max: f64,
    /// min_y s(t,x,y), the potential value U(t,x).
    pub value_s: f64,
    /// Left trace g((x − minimizer_y)/t).
    pub state_u: f64,
    /// Right trace g((x − minimizer_y_max)/t).
    pub state_u_right: f64,
}

/// s(t,x,y) = t·f*((x−y)/t) + U₀(y).
///
/// `u0_primitive` is any primitive of the initial datum; a nonzero base or
/// offset shifts s by a constant and leaves the minimizers unchanged.
pub fn s_value(
    u0_primitive: &PiecewisePrimitive,
    flux: &ConvexFlux,
    t: f64,
    x: f64,
    y: f64,
) -> Result<f64, LaxHopfError> {
    if !(t > 0.0) {
        return Err(LaxHopfError::NonPositiveTime(t));
    }
    Ok(t * flux.legendre((x - y) / t)? + u0_primitive.eval(y))
}

/// Minimize y ↦ s(t,x,y) over [y_lo, y_hi].
///
/// Candidates are the interval endpoints, the breakpoints of the datum and
/// the stationary points u₀(y) = g((x−y)/t), bracketed by sign changes on a
/// per-piece sub-grid and bisected to `BISECT_TOL`.
fn minimize_in(
    prim: &PiecewisePrimitive,
    flux: &ConvexFlux,
    t: f64,
    x: f64,
    y_lo: f64,
    y_hi: f64,
) -> Result<VariationalState, LaxHopfError> {
    debug_assert!(y_lo <= y_hi);
    let mut candidates: Vec<f64> = vec![y_lo, y_hi];
    if y_hi - y_lo > 0.0 {
        for piece in prim.profile().segments_in(y_lo, y_hi) {
            candidates.push(piece.x_lo);
            candidates.push(piece.x_hi);
            // h(y) = u₀(y) − g((x−y)/t) is the derivative of s inside the
            // piece; h need not be monotone when u₀ slopes steeply downward.
            let len = piece.x_hi - piece.x_lo;
            let mut prev_y = piece.x_lo;
            let mut prev_h = piece.a - flux.g((x - prev_y) / t)?;
            for k in 1..=SUB_SAMPLES {
                let y = piece.x_lo + len * k as f64 / SUB_SAMPLES as f64;
                let h = piece.a + piece.b * (y - piece.x_lo) - flux.g((x - y) / t)?;
                if h == 0.0 {
                    candidates.push(y);
                } else if prev_h * h < 0.0 {
                    let (mut a, mut b) = (prev_y, y);
                    let mut ha = prev_h;
                    while b - a > BISECT_TOL {
                        let m = 0.5 * (a + b);
                        let hm = piece.a + piece.b * (m - piece.x_lo) - flux.g((x - m) / t)?;
                        if ha * hm <= 0.0 {
                            b = m;
                        } else {
                            a = m;
                            ha = hm;
                        }
                    }
                    candidates.push(0.5 * (a + b));
                }
                prev_y = y;
                prev_h = h;
            }
        }
    }
    candidates.retain(|y| *y >= y_lo && *y <= y_hi);
    candidates.sort_by(|a, b| a.partial_cmp(b).unwrap());
    candidates.dedup();

    let mut s_min = f64::INFINITY;
    let mut values = Vec::with_capacity(candidates.len());
    for &y in &candidates {
        let s = t * flux.legendre((x - y) / t)? + prim.eval(y);
        values.push(s);
        if s < s_min {
            s_min = s;
        }
    }
    let tie = TIE_TOL * (1.0 + s_min.abs());
    let mut y_small = candidates[0];
    let mut y_large = candidates[0];
    let mut found = false;
    for (&y, &s) in candidates.iter().zip(&values) {
        if s <= s_min + tie {
            if !found {
                y_small = y;
                found = true;
            }
            y_large = y;
        }
    }
    Ok(VariationalState {
        t,
        x,
        minimizer_y: y_small,
        minimizer_y_max: y_large,
        value_s: s_min,
        state_u: flux.g((x - y_small) / t)?,
        state_u_right: flux.g((x - y_large) / t)?,
    })
}

fn search_bounds(
    profile: &PiecewiseProfile,
    flux: &ConvexFlux,
) -> Result<(f64, f64), LaxHopfError> {
    let (u_min, u_max) = profile.value_range();
    let (rlo, rhi) = flux.state_range();
    if u_min < rlo || u_max > rhi {
        return Err(FluxError::SpeedOutOfRange {
            lambda: flux.df(u_min.max(u_max)),
            lo: flux.speed_range().0,
            hi: flux.speed_range().1,
        }
        .into());
    }
    Ok((flux.df(u_min), flux.df(u_max)))
}

/// Evaluate the entropy solution at a single point (t, x).
pub fn eval_at(
    u0: &PiecewiseProfile,
    flux: &ConvexFlux,
    t: f64,
    x: f64,
) -> Result<VariationalState, LaxHopfError> {
    if !(t > 0.0) {
        return Err(LaxHopfError::NonPositiveTime(t));
    }
    let prim = u0.primitive(0.0);
    let (l_min, l_max) = search_bounds(u0, flux)?;
    minimize_in(&prim, flux, t, x, x - t * l_max, x - t * l_min)
}

fn check_grid(xs: &[f64]) -> Result<(), LaxHopfError> {
    if xs.iter().any(|x| !x.is_finite()) || xs.windows(2).any(|w| w[0] > w[1]) {
        return Err(LaxHopfError::BadGrid);
    }
    Ok(())
}

/// Entropy solution sampled on an ascending grid: one (left, right) trace
/// pair per grid point.
pub fn evolve_cl_grid(
    u0: &PiecewiseProfile,
    flux: &ConvexFlux,
    t: f64,
    xs: &[f64],
) -> Result<Vec<(f64, f64)>, LaxHopfError> {
    let states = evolve_states(u0, flux, t, xs)?;
    Ok(states
        .into_iter()
        .map(|s| (s.state_u, s.state_u_right))
        .collect())
}

/// Potential U(t,·) = min_y s(t,·,y) on an ascending grid.
///
/// Accepts any primitive of the datum; its base point and offset shift the
/// output by the corresponding constant.
pub fn evolve_hj_grid(
    u0_primitive: &PiecewisePrimitive,
    flux: &ConvexFlux,
    t: f64,
    xs: &[f64],
) -> Result<Vec<f64>, LaxHopfError> {
    if !(t > 0.0) {
        return Err(LaxHopfError::NonPositiveTime(t));
    }
    check_grid(xs)?;
    let (l_min, l_max) = search_bounds(u0_primitive.profile(), flux)?;
    let results = sweep_blocks(xs, |x, bound| {
        let y_lo = (x - t * l_max).max(bound.unwrap_or(f64::NEG_INFINITY));
        minimize_in(u0_primitive, flux, t, x, y_lo, x - t * l_min)
    })?;
    Ok(results.into_iter().map(|s| s.value_s).collect())
}

fn evolve_states(
    u0: &PiecewiseProfile,
    flux: &ConvexFlux,
    t: f64,
    xs: &[f64],
) -> Result<Vec<VariationalState>, LaxHopfError> {
    if !(t > 0.0) {
        return Err(LaxHopfError::NonPositiveTime(t));
    }
    check_grid(xs)?;
    let prim = u0.primitive(0.0);
    let (l_min, l_max) = search_bounds(u0, flux)?;
    sweep_blocks(xs, |x, bound| {
        let y_lo = (x - t * l_max).max(bound.unwrap_or(f64::NEG_INFINITY));
        minimize_in(&prim, flux, t, x, y_lo, x - t * l_min)
    })
}

/// Run `eval` over the grid in parallel blocks. The smallest minimizer is
/// nondecreasing in x (backward characteristics do not cross), so within a
/// block the previous minimizer bounds the next search from below, with a
/// small cushion against roundoff.
fn sweep_blocks<F>(xs: &[f64], eval: F) -> Result<Vec<VariationalState>, LaxHopfError>
where
    F: Fn(f64, Option<f64>) -> Result<VariationalState, LaxHopfError> + Sync,
{
    let n = xs.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    // Fixed block length: the search bounds, and hence every output bit,
    // are independent of how many workers pick up the blocks.
    let block_len = 256;
    let n_blocks = n.div_ceil(block_len);
    let results: Vec<Result<Vec<VariationalState>, LaxHopfError>> = par_map(n_blocks, |bi| {
        let lo = bi * block_len;
        let hi = (lo + block_len).min(n);
        let mut out = Vec::with_capacity(hi - lo);
        let mut bound: Option<f64> = None;
        for &x in &xs[lo..hi] {
            let st = eval(x, bound)?;
            bound = Some(st.minimizer_y - 1e-9 * (1.0 + st.minimizer_y.abs()));
            out.push(st);
        }
        Ok(out)
    });
    let mut flat = Vec::with_capacity(n);
    for block in results {
        flat.extend(block?);
    }
    Ok(flat)
}

/// Evolve and resample into a profile on [a, b].
///
/// The sampling grid is uniform with spacing `dx`, refined wherever a cell
/// carries a downward jump so that every shock ends up as an explicit value
/// mismatch at a node located to ~1e−12. `extra_breaks` forces additional
/// nodes, e.g. at known kink positions of the expected output.
pub fn evolve_to_profile(
    u0: &PiecewiseProfile,
    flux: &ConvexFlux,
    t: f64,
    a: f64,
    b: f64,
    dx: f64,
    extra_breaks: &[f64],
) -> Result<PiecewiseProfile, LaxHopfError> {
    assert!(a < b && dx > 0.0);
    let n = ((b - a) / dx).ceil() as usize;
    let mut xs: Vec<f64> = (0..=n).map(|k| a + (b - a) * k as f64 / n as f64).collect();
    for &e in extra_breaks {
        if e > a && e < b {
            xs.push(e);
        }
    }
    xs.sort_by(|p, q| p.partial_cmp(q).unwrap());
    xs.dedup();
    let traces = evolve_cl_grid(u0, flux, t, &xs)?;
    let samples: Vec<(f64, f64, f64)> = xs
        .iter()
        .zip(&traces)
        .map(|(&x, &(l, r))| (x, l, r))
        .collect();

    // Downward jumps get their own node; smooth compressions must not be
    // chased, only genuine discontinuities. Entropy solutions only jump
    // downward, so increases are left to plain interpolation.
    let refine = JumpRefiner {
        prim: u0.primitive(0.0),
        flux,
        t,
        bounds: search_bounds(u0, flux)?,
        jump_tol: 1e-7 * (1.0 + u0.sup_norm()),
        coarse_tol: 0.03 * (1.0 + u0.sup_norm()),
    };
    let mut refined: Vec<(f64, f64, f64)> = Vec::with_capacity(samples.len());
    refined.push(samples[0]);
    for s in samples.iter().skip(1) {
        let (x0, _, r0) = *refined.last().unwrap();
        let (x1, l1, _) = *s;
        if r0 - l1 > refine.jump_tol && x1 - x0 > 1e-12 {
            refine.locate(x0, r0, x1, l1, 0.0, 48, &mut refined)?;
        }
        refined.push(*s);
    }
    Ok(PiecewiseProfile::from_samples(&refined).expect("grid is ascending"))
}

struct JumpRefiner<'a> {
    prim: PiecewisePrimitive,
    flux: &'a ConvexFlux,
    t: f64,
    bounds: (f64, f64),
    /// Smallest downward step treated as a potential discontinuity.
    jump_tol: f64,
    /// Steps beyond this are pinned down regardless of slope densification.
    coarse_tol: f64,
}

impl JumpRefiner<'_> {
    /// Recurse when the cell's step cannot be explained by a smooth slope:
    /// either it stays large, or halving the cell doubles the local slope
    /// estimate (the signature of a discontinuity). Smooth compressions
    /// keep a roughly constant slope estimate and stop immediately.
    fn should_recurse(&self, step: f64, width: f64, parent_slope: f64) -> bool {
        step > self.jump_tol
            && width > 1e-12
            && (step > self.coarse_tol || step / width > 1.5 * parent_slope)
    }

    #[allow(clippy::too_many_arguments)]
    fn locate(
        &self,
        x0: f64,
        r0: f64,
        x1: f64,
        l1: f64,
        parent_slope: f64,
        depth: usize,
        out: &mut Vec<(f64, f64, f64)>,
    ) -> Result<(), LaxHopfError> {
        if depth == 0 {
            return Ok(());
        }
        let slope = (r0 - l1) / (x1 - x0);
        let m = 0.5 * (x0 + x1);
        let st = minimize_in(
            &self.prim,
            self.flux,
            self.t,
            m,
            m - self.t * self.bounds.1,
            m - self.t * self.bounds.0,
        )?;
        let (ml, mr) = (st.state_u, st.state_u_right);
        if self.should_recurse(r0 - ml, m - x0, slope.max(parent_slope)) {
            self.locate(x0, r0, m, ml, slope, depth - 1, out)?;
        }
        out.push((m, ml, mr));
        if self.should_recurse(mr - l1, x1 - m, slope.max(parent_slope)) {
            self.locate(m, mr, x1, l1, slope, depth - 1, out)?;
        }
        Ok(())
    }
}

/// Lipschitz anchor path for the potential lift.
#[derive(Debug, Clone)]
pub enum Path {
    /// γ ≡ x₀.
    Constant(f64),
    /// Piecewise-linear (time, position) nodes with strictly increasing
    /// times covering the evolution interval.
    Polyline(Vec<(f64, f64)>),
}

impl Path {
    fn validate(&self, t_end: f64) -> Result<(), LaxHopfError> {
        match self {
            Path::Constant(x) if x.is_finite() => Ok(()),
            Path::Constant(x) => Err(LaxHopfError::BadPath(format!("position {x} not finite"))),
            Path::Polyline(nodes) => {
                if nodes.len() < 2 {
                    return Err(LaxHopfError::BadPath("need at least two nodes".into()));
                }
                for w in nodes.windows(2) {
                    let dt = w[1].0 - w[0].0;
                    if !(dt > 0.0) {
                        return Err(LaxHopfError::BadPath(format!(
                            "times must increase strictly, got {} then {}",
                            w[0].0, w[1].0
                        )));
                    }
                    if !((w[1].1 - w[0].1) / dt).is_finite() {
                        return Err(LaxHopfError::BadPath("segment velocity not finite".into()));
                    }
                }
                if nodes[0].0 > 0.0 || nodes[nodes.len() - 1].0 < t_end {
                    return Err(LaxHopfError::BadPath(format!(
                        "nodes must cover [0, {t_end}]"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn position(&self, tau: f64) -> f64 {
        match self {
            Path::Constant(x) => *x,
            Path::Polyline(nodes) => {
                if tau <= nodes[0].0 {
                    return nodes[0].1;
                }
                for w in nodes.windows(2) {
                    if tau <= w[1].0 {
                        let theta = (tau - w[0].0) / (w[1].0 - w[0].0);
                        return w[0].1 + theta * (w[1].1 - w[0].1);
                    }
                }
                nodes[nodes.len() - 1].1
            }
        }
    }

    pub fn velocity(&self, tau: f64) -> f64 {
        match self {
            Path::Constant(_) => 0.0,
            Path::Polyline(nodes) => {
                for w in nodes.windows(2) {
                    if tau <= w[1].0 {
                        return (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
                    }
                }
                0.0
            }
        }
    }

    /// Times where the velocity may jump, clipped to ]0, t_end[.
    fn kink_times(&self, t_end: f64) -> Vec<f64> {
        match self {
            Path::Constant(_) => Vec::new(),
            Path::Polyline(nodes) => nodes
                .iter()
                .map(|n| n.0)
                .filter(|&tau| tau > 0.0 && tau < t_end)
                .collect(),
        }
    }
}

/// Quadrature parameters for the lift.
#[derive(Debug, Clone, Copy)]
pub struct LiftConfig {
    /// Simpson step for the time integral along the path.
    pub dt: f64,
    /// Sampling step for the space integral at the final time.
    pub dx: f64,
}

impl Default for LiftConfig {
    fn default() -> Self {
        LiftConfig { dt: 1e-3, dx: 1e-3 }
    }
}

/// Rebuild the potential from the evolved state field:
///
///   U(t,x) = ∫_{γ(t)}^x u(t,ξ) dξ
///          + ∫₀^t ( γ̇(τ)·u(τ,γ(τ)) − f(u(τ,γ(τ))) ) dτ + c,
///
/// which matches the variational potential with datum ∫_{γ(0)}^· u₀ + c.
/// The time integrand is evaluated through the pointwise variational solver
/// and integrated by composite Simpson split at the path kinks.
pub fn lift_cl_to_hj(
    u0: &PiecewiseProfile,
    flux: &ConvexFlux,
    gamma: &Path,
    c: f64,
    t: f64,
    xs: &[f64],
    cfg: LiftConfig,
) -> Result<Vec<f64>, LaxHopfError> {
    if !(t > 0.0) {
        return Err(LaxHopfError::NonPositiveTime(t));
    }
    check_grid(xs)?;
    gamma.validate(t)?;

    let state_at = |tau: f64| -> Result<f64, LaxHopfError> {
        let x = gamma.position(tau);
        if tau == 0.0 {
            Ok(u0.eval_left(x))
        } else {
            Ok(eval_at(u0, flux, tau, x)?.state_u)
        }
    };

    // Composite Simpson on each smooth stretch of the path. The velocity is
    // constant per stretch and taken from the endpoints, so kink nodes never
    // leak the neighbouring slope into the wrong stretch.
    let mut splits = vec![0.0];
    splits.extend(gamma.kink_times(t));
    splits.push(t);
    let mut time_integral = 0.0;
    for w in splits.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        if !(t1 > t0) {
            continue;
        }
        let velocity = (gamma.position(t1) - gamma.position(t0)) / (t1 - t0);
        let integrand = |tau: f64| -> Result<f64, LaxHopfError> {
            let u = state_at(tau)?;
            Ok(velocity * u - flux.f(u))
        };
        let mut n = ((t1 - t0) / cfg.dt).ceil() as usize;
        n = (n + n % 2).max(2);
        let h = (t1 - t0) / n as f64;
        let mut acc = integrand(t0)? + integrand(t1)?;
        for k in 1..n {
            let weight = if k % 2 == 1 { 4.0 } else { 2.0 };
            acc += weight * integrand(t0 + h * k as f64)?;
        }
        time_integral += acc * h / 3.0;
    }

    // Space integral at the final time against a shock-refined resampling.
    let anchor = gamma.position(t);
    let lo = xs.first().copied().unwrap_or(anchor).min(anchor) - 2.0 * cfg.dx;
    let hi = xs.last().copied().unwrap_or(anchor).max(anchor) + 2.0 * cfg.dx;
    let profile_t = evolve_to_profile(u0, flux, t, lo, hi, cfg.dx, &[])?;
    let prim = PiecewisePrimitive::new(profile_t, anchor, 0.0);
    Ok(xs
        .iter()
        .map(|&x| prim.eval(x) + time_integral + c)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::piecewise::l1_distance;

    fn burgers() -> ConvexFlux {
        ConvexFlux::burgers()
    }

    #[test]
    fn s_quadratic_in_y_for_zero_datum() {
        let u0 = PiecewiseProfile::constant(0.0);
        let prim = u0.primitive(0.0);
        let f = burgers();
        for (x, y) in [(0.3, -1.0), (2.0, 2.0), (-1.0, 0.5)] {
            let s = s_value(&prim, &f, 1.0, x, y).unwrap();
            assert!((s - 0.5 * (x - y) * (x - y)).abs() < 1e-13);
        }
        let st = eval_at(&u0, &f, 1.0, 0.7).unwrap();
        assert_eq!(st.minimizer_y, 0.7);
        assert!(st.value_s.abs() < 1e-13);
    }

    #[test]
    fn s_for_unit_datum_minimized_left_of_x() {
        // s(1, 0, y) = y²/2 + y: minimum at y = −1 with u = g(1) = 1.
        let u0 = PiecewiseProfile::constant(1.0);
        let f = burgers();
        let prim = u0.primitive(0.0);
        let s = s_value(&prim, &f, 1.0, 0.0, -1.0).unwrap();
        assert!((s - (-0.5)).abs() < 1e-13);
        let st = eval_at(&u0, &f, 1.0, 0.0).unwrap();
        assert!((st.minimizer_y + 1.0).abs() < 1e-9);
        assert!((st.state_u - 1.0).abs() < 1e-9);
    }

    #[test]
    fn constants_are_invariant() {
        let u0 = PiecewiseProfile::constant(0.4);
        let f = burgers();
        for t in [0.1, 1.0, 3.0] {
            for x in [-2.0, 0.0, 5.0] {
                let st = eval_at(&u0, &f, t, x).unwrap();
                assert!((st.state_u - 0.4).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn riemann_shock_travels_at_half_speed() {
        let u0 = PiecewiseProfile::step(0.0, 1.0, 0.0);
        let f = burgers();
        let xs: Vec<f64> = (0..=100).map(|k| -1.0 + 2.0 * k as f64 / 100.0).collect();
        let traces = evolve_cl_grid(&u0, &f, 1.0, &xs).unwrap();
        for (&x, &(l, r)) in xs.iter().zip(&traces) {
            if x < 0.5 - 1e-9 {
                assert!((l - 1.0).abs() < 1e-9, "x = {x}, left = {l}");
            }
            if x > 0.5 + 1e-9 {
                assert!((r - 0.0).abs() < 1e-9, "x = {x}, right = {r}");
            }
        }
        // At the shock both traces coexist.
        let st = eval_at(&u0, &f, 1.0, 0.5).unwrap();
        assert!((st.state_u - 1.0).abs() < 1e-9);
        assert!((st.state_u_right - 0.0).abs() < 1e-9);
    }

    #[test]
    fn riemann_rarefaction_is_self_similar() {
        let u0 = PiecewiseProfile::step(0.0, 0.0, 1.0);
        let f = burgers();
        for x in [-0.5, 0.1, 0.5, 0.9, 1.5] {
            let st = eval_at(&u0, &f, 1.0, x).unwrap();
            let exact = x.clamp(0.0, 1.0);
            assert!((st.state_u - exact).abs() < 1e-9, "x = {x}");
        }
    }

    #[test]
    fn hj_of_zero_datum_is_zero() {
        let u0 = PiecewiseProfile::constant(0.0);
        let prim = u0.primitive(0.0);
        let f = burgers();
        let xs = [-1.0, 0.0, 2.0];
        for v in evolve_hj_grid(&prim, &f, 0.7, &xs).unwrap() {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn hj_of_linear_datum_translates() {
        // u₀ ≡ 1 means U₀(x) = x and U(t,x) = x − t/2.
        let u0 = PiecewiseProfile::constant(1.0);
        let prim = u0.primitive(0.0);
        let f = burgers();
        let xs = [-2.0, 0.0, 1.0, 3.0];
        let vals = evolve_hj_grid(&prim, &f, 1.0, &xs).unwrap();
        for (&x, &v) in xs.iter().zip(&vals) {
            assert!((v - (x - 0.5)).abs() < 1e-10);
        }
    }

    #[test]
    fn hj_derivative_matches_cl() {
        // Rarefaction datum; central differences of U against u.
        let u0 = PiecewiseProfile::step(0.0, 0.0, 1.0);
        let prim = u0.primitive(0.0);
        let f = burgers();
        let t = 1.0;
        let h = 1e-4;
        for x in [-0.3, 0.2, 0.6, 1.4] {
            let xs = [x - h, x + h];
            let vals = evolve_hj_grid(&prim, &f, t, &xs).unwrap();
            let du = (vals[1] - vals[0]) / (2.0 * h);
            let u = eval_at(&u0, &f, t, x).unwrap().state_u;
            assert!((du - u).abs() < 1e-6, "x = {x}: {du} vs {u}");
        }
    }

    #[test]
    fn evolve_to_profile_pins_the_shock() {
        let u0 = PiecewiseProfile::step(0.0, 1.0, 0.0);
        let f = burgers();
        let prof = evolve_to_profile(&u0, &f, 1.0, -2.0, 2.0, 1e-2, &[]).unwrap();
        let jumps = prof.jumps();
        assert_eq!(jumps.len(), 1);
        assert!((jumps[0].x - 0.5).abs() < 1e-9, "shock at {}", jumps[0].x);
        let exact = PiecewiseProfile::step(0.5, 1.0, 0.0);
        assert!(l1_distance(&prof, &exact, -2.0, 2.0) < 1e-8);
    }

    #[test]
    fn lift_of_zero_datum_vanishes() {
        let u0 = PiecewiseProfile::constant(0.0);
        let f = burgers();
        let xs = [-1.0, 0.0, 1.0];
        let vals = lift_cl_to_hj(
            &u0,
            &f,
            &Path::Constant(0.0),
            0.0,
            1.0,
            &xs,
            LiftConfig::default(),
        )
        .unwrap();
        for v in vals {
            assert!(v.abs() < 1e-10);
        }
    }

    #[test]
    fn lift_of_unit_datum_matches_closed_form() {
        let u0 = PiecewiseProfile::constant(1.0);
        let f = burgers();
        let xs = [-1.0, 0.0, 0.5, 2.0];
        let vals = lift_cl_to_hj(
            &u0,
            &f,
            &Path::Constant(0.0),
            0.0,
            1.0,
            &xs,
            LiftConfig::default(),
        )
        .unwrap();
        for (&x, &v) in xs.iter().zip(&vals) {
            assert!((v - (x - 0.5)).abs() < 1e-9, "x = {x}: {v}");
        }
    }

    #[test]
    fn lift_agrees_with_variational_potential_across_a_shock() {
        let u0 = PiecewiseProfile::step(0.0, 1.0, 0.0);
        let f = burgers();
        let xs: Vec<f64> = (0..=50).map(|k| -2.0 + 4.0 * k as f64 / 50.0).collect();
        let lifted = lift_cl_to_hj(
            &u0,
            &f,
            &Path::Constant(-2.0),
            0.0,
            1.0,
            &xs,
            LiftConfig::default(),
        )
        .unwrap();
        // Variational potential with the matching datum ∫_{−2}^x u₀.
        let prim = u0.primitive(-2.0);
        let direct = evolve_hj_grid(&prim, &f, 1.0, &xs).unwrap();
        for ((&x, &a), &b) in xs.iter().zip(&lifted).zip(&direct) {
            assert!((a - b).abs() < 1e-5, "x = {x}: lift {a} vs direct {b}");
        }
    }

    #[test]
    fn degenerate_paths_are_rejected() {
        let u0 = PiecewiseProfile::constant(0.0);
        let f = burgers();
        let bad = Path::Polyline(vec![(0.0, 0.0), (0.0, 1.0), (1.0, 1.0)]);
        let err = lift_cl_to_hj(&u0, &f, &bad, 0.0, 1.0, &[0.0], LiftConfig::default());
        assert!(matches!(err, Err(LaxHopfError::BadPath(_))));
        let err = eval_at(&u0, &f, 0.0, 0.0);
        assert!(matches!(err, Err(LaxHopfError::NonPositiveTime(_))));
    }

    #[test]
    fn semigroup_composition_on_shock_and_fan() {
        // Datum with both a compression and a rarefaction.
        let u0 = PiecewiseProfile::from_samples(&[
            (-1.0, 1.0, 1.0),
            (0.0, 1.0, -0.5),
            (1.0, -0.5, -0.5),
        ])
        .unwrap();
        let f = burgers();
        let (t1, t2) = (0.4, 0.6);
        let mid = evolve_to_profile(&u0, &f, t1, -4.0, 4.0, 1e-3, &[]).unwrap();
        let two_step = evolve_to_profile(&mid, &f, t2, -3.0, 3.0, 1e-3, &[]).unwrap();
        let direct = evolve_to_profile(&u0, &f, t1 + t2, -3.0, 3.0, 1e-3, &[]).unwrap();
        let err = l1_distance(&two_step, &direct, -2.5, 2.5);
        assert!(err < 2e-3, "semigroup defect {err}");
    }

    #[test]
    fn output_satisfies_decay_bound() {
        use rand::{Rng, SeedableRng};
        let u0 = PiecewiseProfile::step(0.0, 0.0, 1.0);
        let f = burgers();
        let t = 0.7;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let x = rng.random_range(-2.0..2.0);
            let y: f64 = rng.random_range(1e-6..1.0);
            let a = eval_at(&u0, &f, t, x).unwrap().state_u;
            let b = eval_at(&u0, &f, t, x + y).unwrap().state_u;
            assert!(f.df(b) - f.df(a) <= y / t + 1e-8);
        }
    }

    #[test]
    fn conservation_between_vertical_lines() {
        // Shock datum; mass balance ∫ u(t₂) − ∫ u(t₁) = ∫ f(u(·,a)) − f(u(·,b)).
        let u0 = PiecewiseProfile::step(0.0, 1.0, 0.0);
        let f = burgers();
        let (a, b) = (-2.0, 2.0);
        let (t1, t2) = (0.3, 1.0);
        let p1 = evolve_to_profile(&u0, &f, t1, a - 0.5, b + 0.5, 1e-3, &[]).unwrap();
        let p2 = evolve_to_profile(&u0, &f, t2, a - 0.5, b + 0.5, 1e-3, &[]).unwrap();
        let lhs = p2.integrate(a, b) - p1.integrate(a, b);
        // Simpson in time for the boundary fluxes.
        let n = 800;
        let h = (t2 - t1) / n as f64;
        let mut acc = 0.0;
        for k in 0..=n {
            let tau = t1 + h * k as f64;
            let w = if k == 0 || k == n {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let ua = eval_at(&u0, &f, tau, a).unwrap().state_u_right;
            let ub = eval_at(&u0, &f, tau, b).unwrap().state_u_right;
            acc += w * (f.f(ua) - f.f(ub));
        }
        let rhs = acc * h / 3.0;
        assert!((lhs - rhs).abs() < 1e-5, "balance defect {}", lhs - rhs);
    }

    #[test]
    fn l1_contraction_between_data() {
        let u = PiecewiseProfile::step(0.0, 1.0, 0.0);
        let v = u.add_bump(0.3, -0.5, 0.5);
        let f = burgers();
        let t = 0.8;
        let su = evolve_to_profile(&u, &f, t, -4.0, 4.0, 1e-3, &[]).unwrap();
        let sv = evolve_to_profile(&v, &f, t, -4.0, 4.0, 1e-3, &[]).unwrap();
        let before = l1_distance(&u, &v, -4.0, 4.0);
        let after = l1_distance(&su, &sv, -4.0, 4.0);
        assert!(after <= before + 1e-6, "{after} > {before}");
    }

    #[test]
    fn submodularity_of_s_on_ordered_quadruples() {
        use rand::{Rng, SeedableRng};
        let u0 = PiecewiseProfile::step(0.0, 0.8, -0.2);
        let prim = u0.primitive(0.0);
        let f = burgers();
        let t = 1.0;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..1000 {
            let x1 = rng.random_range(-2.0..1.5);
            let x2 = x1 + rng.random_range(1e-3..1.0);
            let y1 = rng.random_range(-2.0..1.5);
            let y2 = y1 + rng.random_range(1e-3..1.0);
            let lhs =
                s_value(&prim, &f, t, x1, y1).unwrap() + s_value(&prim, &f, t, x2, y2).unwrap();
            let rhs =
                s_value(&prim, &f, t, x1, y2).unwrap() + s_value(&prim, &f, t, x2, y1).unwrap();
            assert!(lhs < rhs, "submodularity margin {}", rhs - lhs);
        }
    }
}
