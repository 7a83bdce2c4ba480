//! Constructing and characterizing the initial data that reach a target.
//!
//! For an attainable target w at horizon T, the set of bounded initial data
//! whose entropy evolution equals w at time T is a convex cone. This module
//! builds its distinguished elements and decides membership:
//!
//! * the extremal datum — the unique extremal point of the cone — via two
//!   independent routes: pullback through the backward-foot map with fan
//!   fill inside each gap, and space-reversed forward evolution;
//! * the shock-prolonged datum, which traces each shock straight back to
//!   time zero at its Rankine–Hugoniot speed;
//! * cone combinations, tent-perturbed families spanning faces of any finite
//!   dimension, and arbitrarily small non-member spoilers;
//! * membership reports in state form (pointwise forced values on
//!   transported intervals plus integral fan inequalities at each jump) and
//!   in potential form (difference quotients through p plus lower envelope
//!   conditions with endpoint equalities).

use crate::flux::ConvexFlux;
use crate::laxhopf::{self, LaxHopfError};
use crate::oleinik::{self, OleinikError, PMap, Partition, SegmentKind};
use crate::piecewise::{l1_distance, Piece, PiecewisePrimitive, PiecewiseProfile};
use serde::Serialize;
use thiserror::Error;

/// Interior sample count per transported segment for the pointwise checks.
const COND_I_SAMPLES: usize = 128;
/// Probe count per jump for the integral fan conditions (Chebyshev spaced).
const COND_II_SAMPLES: usize = 64;
/// Grid used to locate the maximal strict margin inside a gap.
const MARGIN_SCAN: usize = 1024;

#[derive(Debug, Error)]
pub enum InverseError {
    #[error(transparent)]
    Oleinik(#[from] OleinikError),
    #[error(transparent)]
    Solver(#[from] LaxHopfError),
    #[error(transparent)]
    Flux(#[from] crate::flux::FluxError),
    #[error("target has no jump at x = {0}")]
    NotAJump(f64),
    #[error("candidate datum fails the membership conditions")]
    NotAMember,
    #[error("theta must be nonnegative, got {0}")]
    NegativeTheta(f64),
    #[error("family size must be at least 1")]
    EmptyFamily,
    #[error("no strict margin anywhere: the extremal datum is the unique extremal point")]
    NoFace,
}

/// Numerical tolerances for the membership semi-decision.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    /// Pass/fail slack for both membership routes.
    pub membership: f64,
    /// Minimal strict margin required to span a face.
    pub no_face: f64,
    /// Sampling resolution for constructions under non-quadratic fluxes.
    pub dx_out: f64,
}

impl Tolerances {
    /// Closed-form integrals for quadratic fluxes justify a much tighter
    /// membership slack than the sampled general-flux path.
    pub fn for_flux(flux: &ConvexFlux) -> Self {
        let membership = if flux.is_quadratic() { 1e-8 } else { 1e-5 };
        Tolerances {
            membership,
            no_face: 100.0 * membership,
            dx_out: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Route {
    Cl,
    Hj,
}

/// A pointwise violation of the transported-value condition.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CondIFailure {
    /// Location on the target line and its image on the initial line.
    pub x: f64,
    pub y: f64,
    pub left: f64,
    pub right: f64,
    pub expected: f64,
    /// Worst one-sided deviation from the forced value.
    pub deviation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum IiClause {
    /// Integral over the right part of the fan exceeds its bound.
    Upper,
    /// Integral over the left part of the fan falls short.
    Lower,
    /// Saturation across the whole gap is off.
    Balance,
    /// Potential equality at a gap endpoint fails.
    EndpointEquality,
    /// Evolved potential mismatch at an anchor point (continuous targets).
    Anchor,
}

/// A violated fan condition at a jump.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CondIIFailure {
    pub jump_x: f64,
    /// Intermediate state probed (mapped from the gap point for the
    /// potential route).
    pub v: f64,
    pub clause: IiClause,
    /// Slack of the condition; passing requires ≥ −tol.
    pub slack: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FanBalance {
    pub jump_x: f64,
    pub residual: f64,
}

/// Outcome of a membership check, with per-condition diagnostics.
///
/// The verdict is a semi-decision at the stated tolerance: sampled conditions
/// can refute membership but a pass is tolerance-qualified. Violations beyond
/// ten times the tolerance are flagged as certified.
#[derive(Debug, Clone, Serialize)]
pub struct MembershipReport {
    pub verdict: bool,
    pub route: Route,
    pub tol: f64,
    pub condition_i_failures: Vec<CondIFailure>,
    pub condition_ii_failures: Vec<CondIIFailure>,
    pub fan_balance: Vec<FanBalance>,
}

impl MembershipReport {
    fn new(route: Route, tol: f64) -> Self {
        MembershipReport {
            verdict: true,
            route,
            tol,
            condition_i_failures: Vec::new(),
            condition_ii_failures: Vec::new(),
            fan_balance: Vec::new(),
        }
    }

    fn finalize(mut self) -> Self {
        self.verdict =
            self.condition_i_failures.is_empty() && self.condition_ii_failures.is_empty();
        self
    }

    /// True when some violation exceeds ten times the tolerance, separating
    /// genuine refutations from arithmetic noise.
    pub fn certified_fail(&self) -> bool {
        self.condition_i_failures
            .iter()
            .any(|f| f.deviation > 10.0 * self.tol)
            || self
                .condition_ii_failures
                .iter()
                .any(|f| f.slack < -10.0 * self.tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Uniqueness {
    Singleton,
    NonSingleton { jumps: usize },
}

/// An attainable inverse problem: target, flux, horizon, and the derived
/// backward-foot structures.
#[derive(Debug, Clone)]
pub struct InverseProblem {
    target: PiecewiseProfile,
    flux: ConvexFlux,
    horizon: f64,
    pmap: PMap,
    partition: Partition,
    tol: Tolerances,
}

impl InverseProblem {
    /// Validate attainability and precompute the partition.
    pub fn new(
        target: PiecewiseProfile,
        flux: ConvexFlux,
        horizon: f64,
    ) -> Result<Self, InverseError> {
        let tol = Tolerances::for_flux(&flux);
        Self::with_tolerances(target, flux, horizon, tol)
    }

    pub fn with_tolerances(
        target: PiecewiseProfile,
        flux: ConvexFlux,
        horizon: f64,
        tol: Tolerances,
    ) -> Result<Self, InverseError> {
        let pmap = PMap::build(&target, &flux, horizon)?;
        let partition = oleinik::partition(&pmap)?;
        Ok(InverseProblem {
            target,
            flux,
            horizon,
            pmap,
            partition,
            tol,
        })
    }

    pub fn target(&self) -> &PiecewiseProfile {
        &self.target
    }

    pub fn flux(&self) -> &ConvexFlux {
        &self.flux
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn pmap(&self) -> &PMap {
        &self.pmap
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tol
    }

    /// v·f'(v) − f(v), the fan potential driving the integral conditions.
    fn fan_potential(&self, v: f64) -> f64 {
        v * self.flux.df(v) - self.flux.f(v)
    }

    /// The extremal datum via pullback: transported values on each forced
    /// interval, the centered fan g((x̄−y)/T) inside each gap, and upward
    /// jumps at the images of flat stretches.
    ///
    /// Exactly piecewise linear for quadratic fluxes; sampled at `dx_out`
    /// and linearized otherwise.
    pub fn extremal_pullback(&self) -> PiecewiseProfile {
        let t = self.horizon;
        let quadratic = self.flux.is_quadratic();
        // (y0, y1, v0, v1) spans, stitched for exact contiguity afterwards.
        let mut spans: Vec<(f64, f64, f64, f64)> = Vec::new();
        for seg in self.pmap.segments() {
            if seg.kind != SegmentKind::Increasing
                || !seg.x_lo.is_finite()
                || !seg.x_hi.is_finite()
                || !(seg.y_hi > seg.y_lo)
            {
                continue;
            }
            let v_lo = self.target.eval_right(seg.x_lo);
            let v_hi = self.target.eval_left(seg.x_hi);
            if quadratic {
                spans.push((seg.y_lo, seg.y_hi, v_lo, v_hi));
            } else {
                let m = ((seg.y_hi - seg.y_lo) / self.tol.dx_out).ceil().max(1.0) as usize;
                let mut prev_y = seg.y_lo;
                let mut prev_v = v_lo;
                for k in 1..=m {
                    let y = seg.y_lo + (seg.y_hi - seg.y_lo) * k as f64 / m as f64;
                    let v = if k == m {
                        v_hi
                    } else {
                        self.target
                            .eval_left(self.pmap.invert_on_segment(seg, y))
                    };
                    spans.push((prev_y, y, prev_v, v));
                    prev_y = y;
                    prev_v = v;
                }
            }
        }
        for j in self.pmap.jumps() {
            if !(j.gap_width() > 0.0) {
                continue;
            }
            if quadratic {
                spans.push((j.y_left, j.y_right, j.w_left, j.w_right));
            } else {
                let m = (j.gap_width() / self.tol.dx_out).ceil().max(1.0) as usize;
                let mut prev_y = j.y_left;
                let mut prev_v = j.w_left;
                for k in 1..=m {
                    let y = j.y_left + j.gap_width() * k as f64 / m as f64;
                    let v = if k == m {
                        j.w_right
                    } else {
                        self.flux
                            .g((j.x - y) / t)
                            .expect("fan speeds lie inside the flux speed range")
                    };
                    spans.push((prev_y, y, prev_v, v));
                    prev_y = y;
                    prev_v = v;
                }
            }
        }
        spans.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut pieces: Vec<Piece> = Vec::with_capacity(spans.len());
        for &(y0, y1, v0, v1) in &spans {
            let y0 = match pieces.last() {
                // p evaluations at the same x agree bitwise, but stitching
                // keeps the invariant airtight against future flux forms.
                Some(prev) if (y0 - prev.x_hi).abs() <= 1e-9 * (1.0 + y0.abs()) => prev.x_hi,
                _ => y0,
            };
            if y1 - y0 > 0.0 {
                pieces.push(Piece {
                    x_lo: y0,
                    x_hi: y1,
                    a: v0,
                    b: (v1 - v0) / (y1 - y0),
                });
            }
        }
        if pieces.is_empty() && self.target.ext_left != self.target.ext_right {
            // The whole structure collapsed to the image of one flat
            // stretch: the datum is a bare upward step there.
            let y0 = self
                .pmap
                .segments()
                .iter()
                .find(|s| s.kind == SegmentKind::Flat)
                .map(|s| 0.5 * (s.y_lo + s.y_hi))
                .expect("differing extensions with no span imply a flat stretch");
            return PiecewiseProfile::step(y0, self.target.ext_left, self.target.ext_right);
        }
        PiecewiseProfile::new(pieces, self.target.ext_left, self.target.ext_right)
            .expect("pullback spans tile the initial line")
    }

    /// The extremal datum by reversing space: evolve ξ ↦ w(−ξ) forward to
    /// the horizon and reflect back. Sampled at `dx_out` with forced nodes
    /// at every image of a target breakpoint.
    pub fn extremal_reverse(&self) -> Result<PiecewiseProfile, InverseError> {
        let reflected = self.target.reflect();
        // Images of the target breakpoints are exactly the kink and jump
        // locations of the result; forcing nodes there makes the
        // linearization exact for piecewise-linear outputs.
        let mut marks: Vec<f64> = Vec::new();
        for x in self.target.breakpoints() {
            marks.push(self.pmap.eval_left(x));
            marks.push(self.pmap.eval_right(x));
        }
        let (lo, hi) = match (
            marks.iter().cloned().fold(f64::INFINITY, f64::min),
            marks.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        ) {
            (lo, hi) if lo.is_finite() && hi.is_finite() => (lo - 1.0, hi + 1.0),
            _ => (-1.0, 1.0),
        };
        let extra: Vec<f64> = marks.iter().map(|y| -y).collect();
        let evolved = laxhopf::evolve_to_profile(
            &reflected,
            &self.flux,
            self.horizon,
            -hi,
            -lo,
            self.tol.dx_out,
            &extra,
        )?;
        Ok(evolved.reflect())
    }

    /// Prolong the shock at `jump_x` straight back to time zero: the gap is
    /// filled with the two adjacent target states separated at
    /// x̄ − λ♯·T, λ♯ the Rankine–Hugoniot speed of the jump.
    pub fn sharp(&self, jump_x: f64) -> Result<PiecewiseProfile, InverseError> {
        let j = self.find_jump(jump_x)?;
        let (wl, wr) = (j.w_left, j.w_right);
        let lambda_sharp = (self.flux.f(wr) - self.flux.f(wl)) / (wr - wl);
        let x_sharp = j.x - lambda_sharp * self.horizon;
        debug_assert!(j.y_left < x_sharp && x_sharp < j.y_right);
        let base = self.extremal_pullback();
        let insert = vec![
            Piece {
                x_lo: j.y_left,
                x_hi: x_sharp,
                a: wl,
                b: 0.0,
            },
            Piece {
                x_lo: x_sharp,
                x_hi: j.y_right,
                a: wr,
                b: 0.0,
            },
        ];
        Ok(base.splice(j.y_left, j.y_right, insert))
    }

    fn find_jump(&self, jump_x: f64) -> Result<&oleinik::PJump, InverseError> {
        self.pmap
            .jumps()
            .iter()
            .filter(|j| j.gap_width() > 0.0)
            .find(|j| (j.x - jump_x).abs() <= 1e-9 * (1.0 + jump_x.abs()))
            .ok_or(InverseError::NotAJump(jump_x))
    }

    /// Sample points (x, y = p(x)) covering every transported segment.
    fn condition_i_points(&self, u0: &PiecewiseProfile) -> Vec<(f64, f64)> {
        let mut pts = Vec::new();
        let u0_breaks = u0.breakpoints();
        for seg in self.pmap.segments() {
            if seg.kind != SegmentKind::Increasing {
                continue;
            }
            if seg.x_lo.is_finite() && seg.x_hi.is_finite() {
                let len = seg.x_hi - seg.x_lo;
                let delta = (len * 1e-6).max(1e-12);
                for k in 1..=COND_I_SAMPLES {
                    let x = seg.x_lo + len * k as f64 / (COND_I_SAMPLES + 1) as f64;
                    pts.push((x, self.pmap.eval_left(x)));
                }
                for x in [seg.x_lo + delta, seg.x_hi - delta] {
                    pts.push((x, self.pmap.eval_left(x)));
                }
            } else {
                // Constant extension: sample a window reaching past every
                // breakpoint of the candidate.
                let (anchor_x, anchor_y, dir) = if seg.x_hi.is_finite() {
                    (seg.x_hi, seg.y_hi, -1.0)
                } else if seg.x_lo.is_finite() {
                    (seg.x_lo, seg.y_lo, 1.0)
                } else {
                    (0.0, self.pmap.eval_left(0.0), 1.0)
                };
                let mut reach: f64 = 2.0;
                for &y in &u0_breaks {
                    reach = reach.max((y - anchor_y).abs() + 1.0);
                }
                for k in 1..=16 {
                    let y = anchor_y + dir * reach * k as f64 / 16.0;
                    // p has unit slope on a constant stretch.
                    pts.push((anchor_x + (y - anchor_y), y));
                }
            }
            // Breakpoints of the candidate strictly inside the image pin
            // down isolated violations.
            let scale = 1e-12 * (1.0 + seg.y_hi.abs().min(1e12));
            for &y in &u0_breaks {
                if y > seg.y_lo + scale && y < seg.y_hi - scale {
                    let x = self.invert_anywhere(seg, y);
                    pts.push((x, y));
                }
            }
        }
        pts
    }

    fn invert_anywhere(&self, seg: &oleinik::PSegment, y: f64) -> f64 {
        if seg.x_lo.is_finite() && seg.x_hi.is_finite() {
            self.pmap.invert_on_segment(seg, y)
        } else if seg.x_hi.is_finite() {
            seg.x_hi + (y - seg.y_hi)
        } else if seg.x_lo.is_finite() {
            seg.x_lo + (y - seg.y_lo)
        } else {
            y - self.pmap.eval_left(0.0)
        }
    }

    /// State-form membership: transported pointwise values plus the two
    /// integral fan inequalities (with exact piecewise integrals) and the
    /// full-gap saturation at every jump.
    pub fn membership_cl(&self, u0: &PiecewiseProfile) -> MembershipReport {
        let tol = self.tol.membership;
        let mut report = MembershipReport::new(Route::Cl, tol);
        let t = self.horizon;

        for (x, y) in self.condition_i_points(u0) {
            let expected = self.target.eval_left(x);
            let left = u0.eval_left(y);
            let right = u0.eval_right(y);
            let deviation = (left - expected).abs().max((right - expected).abs());
            if deviation > tol {
                report.condition_i_failures.push(CondIFailure {
                    x,
                    y,
                    left,
                    right,
                    expected,
                    deviation,
                });
            }
        }

        for j in self.pmap.jumps() {
            if !(j.gap_width() > 0.0) {
                continue;
            }
            let (wl, wr) = (j.w_left, j.w_right);
            let g_l = self.fan_potential(wl);
            let g_r = self.fan_potential(wr);
            for v in chebyshev_grid(wr, wl, COND_II_SAMPLES) {
                let y_v = j.x - t * self.flux.df(v);
                let upper = u0.integrate(y_v, j.y_right) / t;
                let slack_up = (self.fan_potential(v) - g_r) - upper;
                if slack_up < -tol {
                    report.condition_ii_failures.push(CondIIFailure {
                        jump_x: j.x,
                        v,
                        clause: IiClause::Upper,
                        slack: slack_up,
                    });
                }
                let lower = u0.integrate(j.y_left, y_v) / t;
                let slack_lo = lower - (g_l - self.fan_potential(v));
                if slack_lo < -tol {
                    report.condition_ii_failures.push(CondIIFailure {
                        jump_x: j.x,
                        v,
                        clause: IiClause::Lower,
                        slack: slack_lo,
                    });
                }
            }
            let residual = u0.integrate(j.y_left, j.y_right) / t - (g_l - g_r);
            report.fan_balance.push(FanBalance {
                jump_x: j.x,
                residual,
            });
            if residual.abs() > tol {
                report.condition_ii_failures.push(CondIIFailure {
                    jump_x: j.x,
                    v: wl,
                    clause: IiClause::Balance,
                    slack: -residual.abs(),
                });
            }
        }
        report.finalize()
    }

    /// Potential-form membership for a candidate potential against a target
    /// potential (any primitive of the target plus an offset).
    ///
    /// Checks the difference-quotient condition through p on transported
    /// segments, and at every jump the lower-envelope inequality inside the
    /// gap with equality at both endpoints. The endpoint equalities pin the
    /// additive constant; for jump-free targets the constant is certified
    /// instead by evolving the candidate potential at anchor points.
    pub fn membership_hj(
        &self,
        u0_potential: &PiecewisePrimitive,
        target_potential: &PiecewisePrimitive,
    ) -> MembershipReport {
        let tol = self.tol.membership;
        let mut report = MembershipReport::new(Route::Hj, tol);
        let t = self.horizon;

        for (x, y) in self.condition_i_points(u0_potential.profile()) {
            let expected = self.target.eval_left(x);
            // Exact one-sided limits of (U₀(p(y)) − U₀(p(x)))/(p(y) − p(x)).
            let left = u0_potential.deriv_left(y);
            let right = u0_potential.deriv_right(y);
            let deviation = (left - expected).abs().max((right - expected).abs());
            if deviation > tol {
                report.condition_i_failures.push(CondIFailure {
                    x,
                    y,
                    left,
                    right,
                    expected,
                    deviation,
                });
            }
        }

        let mut any_gap = false;
        for j in self.pmap.jumps() {
            if !(j.gap_width() > 0.0) {
                continue;
            }
            any_gap = true;
            let w_at_jump = target_potential.eval(j.x);
            let envelope = |y: f64| -> f64 {
                let speed = (j.x - y) / t;
                u0_potential.eval(y)
                    + t * self
                        .flux
                        .legendre(speed)
                        .expect("gap speeds lie inside the flux speed range")
            };
            for y in chebyshev_grid(j.y_left, j.y_right, COND_II_SAMPLES) {
                let v = self
                    .flux
                    .g((j.x - y) / t)
                    .expect("gap speeds lie inside the flux speed range");
                let slack = envelope(y) - w_at_jump;
                if slack < -tol {
                    report.condition_ii_failures.push(CondIIFailure {
                        jump_x: j.x,
                        v,
                        clause: IiClause::Upper,
                        slack,
                    });
                }
            }
            for (y, v) in [(j.y_left, j.w_left), (j.y_right, j.w_right)] {
                let slack = -(envelope(y) - w_at_jump).abs();
                if slack < -tol {
                    report.condition_ii_failures.push(CondIIFailure {
                        jump_x: j.x,
                        v,
                        clause: IiClause::EndpointEquality,
                        slack,
                    });
                }
            }
            report.fan_balance.push(FanBalance {
                jump_x: j.x,
                residual: envelope(j.y_right) - envelope(j.y_left),
            });
        }

        // Without any gap the conditions above are insensitive to additive
        // constants; certify the constant by direct variational evaluation.
        if !any_gap && report.condition_i_failures.is_empty() {
            for x_a in self.anchor_points() {
                match laxhopf::evolve_hj_grid(u0_potential, &self.flux, t, &[x_a]) {
                    Ok(vals) => {
                        let slack = -(vals[0] - target_potential.eval(x_a)).abs();
                        if slack < -tol {
                            report.condition_ii_failures.push(CondIIFailure {
                                jump_x: x_a,
                                v: self.target.eval_left(x_a),
                                clause: IiClause::Anchor,
                                slack,
                            });
                        }
                    }
                    Err(_) => report.condition_ii_failures.push(CondIIFailure {
                        jump_x: x_a,
                        v: self.target.eval_left(x_a),
                        clause: IiClause::Anchor,
                        slack: f64::NEG_INFINITY,
                    }),
                }
            }
        }
        report.finalize()
    }

    fn anchor_points(&self) -> Vec<f64> {
        match self.target.domain() {
            Some((lo, hi)) => vec![lo - 1.0, 0.5 * (lo + hi), hi + 1.0],
            None => vec![0.0],
        }
    }

    /// Offset that aligns the candidate's primitive with the target
    /// potential: fixed by the gap-endpoint equality when a jump exists, or
    /// by evolving the potential at an anchor otherwise.
    pub fn consistent_offset(
        &self,
        u0: &PiecewiseProfile,
        target_potential: &PiecewisePrimitive,
    ) -> Result<f64, InverseError> {
        let raw = u0.primitive(0.0);
        if let Some(j) = self.pmap.jumps().iter().find(|j| j.gap_width() > 0.0) {
            let spd = (j.x - j.y_left) / self.horizon;
            let value = raw.eval(j.y_left) + self.horizon * self.flux.legendre(spd)?;
            Ok(target_potential.eval(j.x) - value)
        } else {
            let x_a = self.anchor_points()[0];
            let vals = laxhopf::evolve_hj_grid(&raw, &self.flux, self.horizon, &[x_a])?;
            Ok(target_potential.eval(x_a) - vals[0])
        }
    }

    /// Point of the cone at parameter θ along the ray from the extremal
    /// datum through a member.
    pub fn cone_combination(
        &self,
        member: &PiecewiseProfile,
        theta: f64,
    ) -> Result<PiecewiseProfile, InverseError> {
        if theta < 0.0 {
            return Err(InverseError::NegativeTheta(theta));
        }
        if !self.membership_cl(member).verdict {
            return Err(InverseError::NotAMember);
        }
        let extremal = self.extremal_pullback();
        Ok(extremal.combine(1.0 - theta, member, theta))
    }

    /// Strict margin of the gap envelope above its endpoint value, scanned
    /// on a dense grid. Returns the best (jump, position, margin).
    fn best_gap_margin(&self, u0: &PiecewiseProfile) -> Option<(usize, f64, f64)> {
        let t = self.horizon;
        let prim = u0.primitive(0.0);
        let mut best: Option<(usize, f64, f64)> = None;
        for (idx, j) in self.pmap.jumps().iter().enumerate() {
            if !(j.gap_width() > 0.0) {
                continue;
            }
            let envelope = |y: f64| {
                prim.eval(y)
                    + t * self
                        .flux
                        .legendre((j.x - y) / t)
                        .expect("gap speeds lie inside the flux speed range")
            };
            let base = envelope(j.y_left);
            for k in 1..MARGIN_SCAN {
                let y = j.y_left + j.gap_width() * k as f64 / MARGIN_SCAN as f64;
                let margin = envelope(y) - base;
                if best.is_none_or(|(_, _, m)| margin > m) {
                    best = Some((idx, y, margin));
                }
            }
        }
        best
    }

    /// Build N + 1 members averaging back to the given member with linearly
    /// independent differences, by carving disjoint tent corrections out of
    /// the strict margin inside one gap.
    ///
    /// Fails with [`InverseError::NoFace`] when no strict margin exists —
    /// exactly the case of the extremal datum.
    pub fn tent_family(
        &self,
        member: &PiecewiseProfile,
        n: usize,
    ) -> Result<Vec<PiecewiseProfile>, InverseError> {
        if n == 0 {
            return Err(InverseError::EmptyFamily);
        }
        if !self.membership_cl(member).verdict {
            return Err(InverseError::NotAMember);
        }
        let Some((jump_idx, y_best, eps_max)) = self.best_gap_margin(member) else {
            return Err(InverseError::NoFace);
        };
        if eps_max <= self.tol.no_face {
            return Err(InverseError::NoFace);
        }
        let j = &self.pmap.jumps()[jump_idx];
        let t = self.horizon;
        let prim = member.primitive(0.0);
        let envelope = |y: f64| {
            prim.eval(y)
                + t * self
                    .flux
                    .legendre((j.x - y) / t)
                    .expect("gap speeds lie inside the flux speed range")
        };
        let base = envelope(j.y_left);
        let eps = 0.5 * eps_max;

        // Maximal sub-interval around the best point where the margin stays
        // at or above eps; edges located by bisection on the continuous
        // margin function.
        let margin_ok = |y: f64| envelope(y) - base >= eps;
        let mut lo = y_best;
        let mut step = j.gap_width() / MARGIN_SCAN as f64;
        while lo - step > j.y_left && margin_ok(lo - step) {
            lo -= step;
        }
        let mut hi = y_best;
        while hi + step < j.y_right && margin_ok(hi + step) {
            hi += step;
        }
        for _ in 0..50 {
            step *= 0.5;
            if lo - step > j.y_left && margin_ok(lo - step) {
                lo -= step;
            }
            if hi + step < j.y_right && margin_ok(hi + step) {
                hi += step;
            }
        }
        // Recenter so the whole tent row fits inside the certified interval.
        let y_bar = 0.5 * (lo + hi);
        let eta = 0.5 * (hi - lo);
        debug_assert!(eta > 0.0);

        let slope = eps * n as f64 / eta;
        let half = eta / n as f64;
        let mut family = Vec::with_capacity(n + 1);
        let mut sum_tents: Option<PiecewiseProfile> = None;
        for k in 1..=n {
            let y_k = y_bar + eta / n as f64 * (2.0 * k as f64 - 1.0 - n as f64);
            // Derivative of the tent supported on [y_k − η/N, y_k + η/N].
            let tent_deriv = PiecewiseProfile::new(
                vec![
                    Piece {
                        x_lo: y_k - half,
                        x_hi: y_k,
                        a: slope,
                        b: 0.0,
                    },
                    Piece {
                        x_lo: y_k,
                        x_hi: y_k + half,
                        a: -slope,
                        b: 0.0,
                    },
                ],
                0.0,
                0.0,
            )
            .expect("tent pieces are contiguous");
            family.push(member.sub(&tent_deriv));
            sum_tents = Some(match sum_tents {
                None => tent_deriv,
                Some(acc) => acc.add(&tent_deriv),
            });
        }
        let v0 = member.add(&sum_tents.expect("n >= 1"));
        family.insert(0, v0);
        Ok(family)
    }

    /// Non-member at L¹ distance C/n from a member: a deep notch right of a
    /// gap's left endpoint. The depth exceeds the bound that forces the
    /// lower fan inequality to fail near the endpoint.
    ///
    /// Returns the perturbed datum and the notch depth C.
    pub fn spoiler_negative(
        &self,
        member: &PiecewiseProfile,
        jump_x: f64,
        n: usize,
    ) -> Result<(PiecewiseProfile, f64), InverseError> {
        if n == 0 {
            return Err(InverseError::EmptyFamily);
        }
        let j = self.find_jump(jump_x)?;
        let bound = member.sup_norm() - self.flux.g((j.x - j.y_left) / self.horizon)?;
        let c = bound.max(0.0) + 1.0;
        let width = 1.0 / n as f64;
        Ok((member.add_bump(-c, j.y_left, j.y_left + width), c))
    }

    /// Non-member at L¹ distance 2/n from a member: a unit bump around an
    /// interior point of a transported interval, violating the pointwise
    /// condition there.
    pub fn spoiler_bump(&self, member: &PiecewiseProfile, n: usize) -> PiecewiseProfile {
        let half = 1.0 / n as f64;
        let y0 = self.bump_site(half);
        member.add_bump(1.0, y0 - half, y0 + half)
    }

    fn bump_site(&self, half: f64) -> f64 {
        // Prefer the widest bounded transported interval that fits the bump.
        let mut best: Option<(f64, f64)> = None;
        for i in &self.partition.xi {
            if i.lo.is_finite() && i.hi.is_finite() {
                let len = i.hi - i.lo;
                if len > 2.5 * half && best.is_none_or(|(l, _)| len > l) {
                    best = Some((len, 0.5 * (i.lo + i.hi)));
                }
            }
        }
        if let Some((_, mid)) = best {
            return mid;
        }
        for i in &self.partition.xi {
            if !i.lo.is_finite() && i.hi.is_finite() {
                return i.hi - 1.0 - half;
            }
            if i.lo.is_finite() && !i.hi.is_finite() {
                return i.lo + 1.0 + half;
            }
        }
        0.0
    }

    /// The solution set is a single datum exactly when the target carries no
    /// jump.
    pub fn uniqueness_probe(&self) -> Uniqueness {
        let jumps = self
            .pmap
            .jumps()
            .iter()
            .filter(|j| j.gap_width() > 0.0)
            .count();
        if jumps == 0 {
            Uniqueness::Singleton
        } else {
            Uniqueness::NonSingleton { jumps }
        }
    }

    /// Forward-evolve a candidate and measure the L¹ defect against the
    /// target on [−half_width, half_width].
    pub fn roundtrip_l1(
        &self,
        candidate: &PiecewiseProfile,
        half_width: f64,
        dx: f64,
    ) -> Result<f64, InverseError> {
        let breaks = self.target.breakpoints();
        let evolved = laxhopf::evolve_to_profile(
            candidate,
            &self.flux,
            self.horizon,
            -half_width - 1.0,
            half_width + 1.0,
            dx,
            &breaks,
        )?;
        Ok(l1_distance(&evolved, &self.target, -half_width, half_width))
    }
}

/// Chebyshev-spaced probe grid on [a, b] including both endpoints; the
/// clustering near the ends matches where fan margins vanish quadratically.
fn chebyshev_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut out = Vec::with_capacity(n + 2);
    out.push(a);
    for k in (1..=n).rev() {
        let theta = std::f64::consts::PI * k as f64 / (n + 1) as f64;
        out.push(mid + half * theta.cos());
    }
    out.push(b);
    out
}

/// Gram matrix of the differences v_k − v_0 over [a, b].
pub fn difference_gram(family: &[PiecewiseProfile], a: f64, b: f64) -> Vec<Vec<f64>> {
    let n = family.len().saturating_sub(1);
    let diffs: Vec<PiecewiseProfile> = (1..=n).map(|k| family[k].sub(&family[0])).collect();
    let mut gram = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let v = crate::piecewise::inner_product(&diffs[i], &diffs[j], a, b);
            gram[i][j] = v;
            gram[j][i] = v;
        }
    }
    gram
}

/// Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations.
#[allow(clippy::needless_range_loop)]
pub fn symmetric_eigenvalues(matrix: &[Vec<f64>]) -> Vec<f64> {
    let n = matrix.len();
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    for _ in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[i][j] * a[i][j];
            }
        }
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = 0.5 * (a[q][q] - a[p][p]) / a[p][q];
                let t_val = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t_val * t_val + 1.0).sqrt();
                let s = t_val * c;
                for row in a.iter_mut() {
                    let akp = row[p];
                    let akq = row[q];
                    row[p] = c * akp - s * akq;
                    row[q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eig
}
