//! Exact algebra on piecewise-linear functions with jumps.
//!
//! A [`PiecewiseProfile`] is a bounded function of x made of affine pieces on
//! half-open intervals ]x_lo, x_hi] plus constant extensions on both sides.
//! The half-open convention makes every profile left continuous: the value at
//! a breakpoint is the limit from the left, and jumps are encoded implicitly
//! by a value mismatch between adjacent pieces.
//!
//! Integrals, L¹ distances and L² inner products are closed-form; there is no
//! quadrature error anywhere in this module.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("piece {index}: interval [{x_lo}, {x_hi}] is empty or reversed")]
    EmptyPiece { index: usize, x_lo: f64, x_hi: f64 },
    #[error("piece {index} starts at {got} but previous piece ends at {expected}")]
    NotContiguous { index: usize, got: f64, expected: f64 },
    #[error("non-finite value in profile data")]
    NonFinite,
}

/// One affine piece: value `a + b·(x − x_lo)` on the interval ]x_lo, x_hi].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    #[serde(rename = "x0")]
    pub x_lo: f64,
    #[serde(rename = "x1")]
    pub x_hi: f64,
    pub a: f64,
    pub b: f64,
}

impl Piece {
    /// Value inside the piece (or its affine extension).
    fn value(&self, x: f64) -> f64 {
        self.a + self.b * (x - self.x_lo)
    }

    fn end_value(&self) -> f64 {
        self.value(self.x_hi)
    }
}

/// Evaluation side at a point: left limit, right limit, or the precise
/// (Lebesgue-point) value which exists only where the two coincide.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpPoint {
    pub x: f64,
    pub left: f64,
    pub right: f64,
}

impl JumpPoint {
    pub fn height(&self) -> f64 {
        self.right - self.left
    }
}

/// L∞ piecewise-linear-with-jumps function of x, left continuous, extended by
/// constants outside the covered interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseProfile {
    pieces: Vec<Piece>,
    pub ext_left: f64,
    pub ext_right: f64,
}

impl PiecewiseProfile {
    pub fn new(pieces: Vec<Piece>, ext_left: f64, ext_right: f64) -> Result<Self, ProfileError> {
        if !(ext_left.is_finite() && ext_right.is_finite()) {
            return Err(ProfileError::NonFinite);
        }
        for (i, p) in pieces.iter().enumerate() {
            if ![p.x_lo, p.x_hi, p.a, p.b].iter().all(|v| v.is_finite()) {
                return Err(ProfileError::NonFinite);
            }
            if !(p.x_lo < p.x_hi) {
                return Err(ProfileError::EmptyPiece {
                    index: i,
                    x_lo: p.x_lo,
                    x_hi: p.x_hi,
                });
            }
            if i > 0 && p.x_lo != pieces[i - 1].x_hi {
                return Err(ProfileError::NotContiguous {
                    index: i,
                    got: p.x_lo,
                    expected: pieces[i - 1].x_hi,
                });
            }
        }
        Ok(PiecewiseProfile {
            pieces,
            ext_left,
            ext_right,
        })
    }

    pub fn constant(c: f64) -> Self {
        PiecewiseProfile {
            pieces: Vec::new(),
            ext_left: c,
            ext_right: c,
        }
    }

    /// Step profile: `left` for x ≤ x0, `right` for x > x0.
    pub fn step(x0: f64, left: f64, right: f64) -> Self {
        // A single marker piece carries the breakpoint.
        PiecewiseProfile {
            pieces: vec![Piece {
                x_lo: x0,
                x_hi: x0 + 1.0,
                a: right,
                b: 0.0,
            }],
            ext_left: left,
            ext_right: right,
        }
    }

    /// Continuous piecewise-linear interpolant of the given nodes, extended
    /// by its end values.
    pub fn from_nodes(nodes: &[(f64, f64)]) -> Result<Self, ProfileError> {
        assert!(nodes.len() >= 2, "need at least two nodes");
        let mut pieces = Vec::with_capacity(nodes.len() - 1);
        for w in nodes.windows(2) {
            let ((x0, v0), (x1, v1)) = (w[0], w[1]);
            if !(x0 < x1) {
                return Err(ProfileError::EmptyPiece {
                    index: pieces.len(),
                    x_lo: x0,
                    x_hi: x1,
                });
            }
            pieces.push(Piece {
                x_lo: x0,
                x_hi: x1,
                a: v0,
                b: (v1 - v0) / (x1 - x0),
            });
        }
        PiecewiseProfile::new(pieces, nodes[0].1, nodes[nodes.len() - 1].1)
    }

    /// Profile from point samples carrying one-sided values: between
    /// consecutive sample points the function interpolates right(i) →
    /// left(i+1); mismatched sides at a sample point encode a jump there.
    pub fn from_samples(samples: &[(f64, f64, f64)]) -> Result<Self, ProfileError> {
        assert!(samples.len() >= 2, "need at least two samples");
        let mut pieces = Vec::with_capacity(samples.len() - 1);
        for w in samples.windows(2) {
            let ((x0, _, r0), (x1, l1, _)) = (w[0], w[1]);
            if x1 - x0 <= 0.0 {
                continue;
            }
            pieces.push(Piece {
                x_lo: x0,
                x_hi: x1,
                a: r0,
                b: (l1 - r0) / (x1 - x0),
            });
        }
        PiecewiseProfile::new(pieces, samples[0].1, samples[samples.len() - 1].2)
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Covered interval, if any piece exists.
    pub fn domain(&self) -> Option<(f64, f64)> {
        match (self.pieces.first(), self.pieces.last()) {
            (Some(f), Some(l)) => Some((f.x_lo, l.x_hi)),
            _ => None,
        }
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        let mut xs: Vec<f64> = self.pieces.iter().map(|p| p.x_lo).collect();
        if let Some(last) = self.pieces.last() {
            xs.push(last.x_hi);
        }
        xs
    }

    /// Left limit at x. Left continuity means this is also the value at x.
    pub fn eval_left(&self, x: f64) -> f64 {
        let Some((lo, hi)) = self.domain() else {
            return self.ext_left;
        };
        if x <= lo {
            return self.ext_left;
        }
        if x > hi {
            return self.ext_right;
        }
        // Piece with x_lo < x ≤ x_hi.
        let idx = self.pieces.partition_point(|p| p.x_hi < x);
        let p = &self.pieces[idx.min(self.pieces.len() - 1)];
        p.value(x)
    }

    /// Right limit at x.
    pub fn eval_right(&self, x: f64) -> f64 {
        let Some((lo, hi)) = self.domain() else {
            return self.ext_left;
        };
        if x < lo {
            return self.ext_left;
        }
        if x >= hi {
            return self.ext_right;
        }
        // Piece with x_lo ≤ x < x_hi.
        let idx = self.pieces.partition_point(|p| p.x_hi <= x);
        let p = &self.pieces[idx];
        p.value(x)
    }

    pub fn eval(&self, x: f64, side: Side) -> f64 {
        match side {
            Side::Left => self.eval_left(x),
            Side::Right => self.eval_right(x),
        }
    }

    /// Precise-representative value: defined only where the one-sided limits
    /// agree; `None` flags "not a Lebesgue point".
    pub fn eval_precise(&self, x: f64) -> Option<f64> {
        let l = self.eval_left(x);
        let r = self.eval_right(x);
        (l == r).then_some(l)
    }

    /// All points where the one-sided limits differ by more than `tol`,
    /// including the junctions with the constant extensions.
    pub fn jumps_with_tol(&self, tol: f64) -> Vec<JumpPoint> {
        let mut out = Vec::new();
        let Some((lo, hi)) = self.domain() else {
            return out;
        };
        let mut candidates = vec![lo];
        for p in &self.pieces {
            candidates.push(p.x_hi);
        }
        candidates.push(hi);
        candidates.dedup();
        for x in candidates {
            let left = self.eval_left(x);
            let right = self.eval_right(x);
            if (left - right).abs() > tol {
                out.push(JumpPoint { x, left, right });
            }
        }
        out
    }

    pub fn jumps(&self) -> Vec<JumpPoint> {
        let scale = self.sup_norm().max(1.0);
        self.jumps_with_tol(1e-11 * scale)
    }

    /// Materialized affine segments covering [a, b], including the constant
    /// extensions clipped to that window. Zero-length segments are skipped.
    pub fn segments_in(&self, a: f64, b: f64) -> Vec<Piece> {
        debug_assert!(a <= b);
        let mut out = Vec::new();
        let mut push = |x_lo: f64, x_hi: f64, a0: f64, b0: f64, base: f64| {
            let lo = x_lo.max(a);
            let hi = x_hi.min(b);
            if hi > lo {
                out.push(Piece {
                    x_lo: lo,
                    x_hi: hi,
                    a: a0 + b0 * (lo - base),
                    b: b0,
                });
            }
        };
        match self.domain() {
            None => push(a, b, self.ext_left, 0.0, a),
            Some((lo, hi)) => {
                if a < lo {
                    push(a, lo, self.ext_left, 0.0, a);
                }
                for p in &self.pieces {
                    if p.x_hi <= a || p.x_lo >= b {
                        continue;
                    }
                    push(p.x_lo, p.x_hi, p.a, p.b, p.x_lo);
                }
                if b > hi {
                    push(hi, b, self.ext_right, 0.0, hi);
                }
            }
        }
        out
    }

    /// Exact ∫_a^b of the profile (a ≤ b).
    pub fn integrate(&self, a: f64, b: f64) -> f64 {
        debug_assert!(a <= b, "integrate expects a <= b");
        self.segments_in(a, b)
            .iter()
            .map(|p| {
                let len = p.x_hi - p.x_lo;
                (p.a + 0.5 * p.b * len) * len
            })
            .sum()
    }

    /// Signed primitive ∫_base^x.
    pub fn primitive(&self, base: f64) -> PiecewisePrimitive {
        PiecewisePrimitive::new(self.clone(), base, 0.0)
    }

    pub fn sup_norm(&self) -> f64 {
        let mut m = self.ext_left.abs().max(self.ext_right.abs());
        for p in &self.pieces {
            m = m.max(p.a.abs()).max(p.end_value().abs());
        }
        m
    }

    /// (min, max) over all attained values.
    pub fn value_range(&self) -> (f64, f64) {
        let mut lo = self.ext_left.min(self.ext_right);
        let mut hi = self.ext_left.max(self.ext_right);
        for p in &self.pieces {
            lo = lo.min(p.a).min(p.end_value());
            hi = hi.max(p.a).max(p.end_value());
        }
        (lo, hi)
    }

    /// Total variation on [a, b]: slope contributions plus jump heights.
    pub fn total_variation(&self, a: f64, b: f64) -> f64 {
        let mut tv: f64 = self
            .segments_in(a, b)
            .iter()
            .map(|p| (p.b * (p.x_hi - p.x_lo)).abs())
            .sum();
        for j in self.jumps() {
            if j.x > a && j.x < b {
                tv += (j.right - j.left).abs();
            }
        }
        tv
    }

    /// Pointwise affine combination α·self + β·other, exact on the merged
    /// breakpoint set.
    pub fn combine(&self, alpha: f64, other: &PiecewiseProfile, beta: f64) -> PiecewiseProfile {
        let mut xs: Vec<f64> = self
            .breakpoints()
            .into_iter()
            .chain(other.breakpoints())
            .collect();
        xs.sort_by(|p, q| p.partial_cmp(q).unwrap());
        xs.dedup();
        let ext_left = alpha * self.ext_left + beta * other.ext_left;
        let ext_right = alpha * self.ext_right + beta * other.ext_right;
        if xs.len() < 2 {
            // At most one breakpoint: both inputs are constant (or step-like
            // degenerate); fall back to a step at the lone breakpoint.
            return match xs.first() {
                None => PiecewiseProfile::constant(ext_left),
                Some(&x0) => PiecewiseProfile::step(x0, ext_left, ext_right),
            };
        }
        let mut pieces = Vec::with_capacity(xs.len() - 1);
        for w in xs.windows(2) {
            let (x0, x1) = (w[0], w[1]);
            if !(x0 < x1) {
                continue;
            }
            let a = alpha * self.eval_right(x0) + beta * other.eval_right(x0);
            let end = alpha * self.eval_left(x1) + beta * other.eval_left(x1);
            pieces.push(Piece {
                x_lo: x0,
                x_hi: x1,
                a,
                b: (end - a) / (x1 - x0),
            });
        }
        PiecewiseProfile {
            pieces,
            ext_left,
            ext_right,
        }
    }

    pub fn add(&self, other: &PiecewiseProfile) -> PiecewiseProfile {
        self.combine(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &PiecewiseProfile) -> PiecewiseProfile {
        self.combine(1.0, other, -1.0)
    }

    pub fn scale(&self, alpha: f64) -> PiecewiseProfile {
        self.combine(alpha, &PiecewiseProfile::constant(0.0), 0.0)
    }

    /// self + c·𝟙_{]lo,hi]} (the left-continuous representative of the
    /// indicator bump).
    pub fn add_bump(&self, c: f64, lo: f64, hi: f64) -> PiecewiseProfile {
        assert!(lo < hi, "bump interval must be nondegenerate");
        let bump = PiecewiseProfile {
            pieces: vec![Piece {
                x_lo: lo,
                x_hi: hi,
                a: c,
                b: 0.0,
            }],
            ext_left: 0.0,
            ext_right: 0.0,
        };
        self.add(&bump)
    }

    /// The reflected function x ↦ self(−x) (equal a.e.; one-sided limits
    /// swap orientation).
    pub fn reflect(&self) -> PiecewiseProfile {
        let pieces = self
            .pieces
            .iter()
            .rev()
            .map(|p| Piece {
                x_lo: -p.x_hi,
                x_hi: -p.x_lo,
                a: p.end_value(),
                b: -p.b,
            })
            .collect();
        PiecewiseProfile {
            pieces,
            ext_left: self.ext_right,
            ext_right: self.ext_left,
        }
    }

    /// Replace the profile on ]lo, hi] by the given affine pieces (which must
    /// tile exactly that interval).
    pub fn splice(&self, lo: f64, hi: f64, insert: Vec<Piece>) -> PiecewiseProfile {
        debug_assert!(insert.first().is_none_or(|p| p.x_lo == lo));
        debug_assert!(insert.last().is_none_or(|p| p.x_hi == hi));
        let mut pieces = Vec::new();
        let (dlo, dhi) = self.domain().unwrap_or((lo, hi));
        for p in self.segments_in(dlo.min(lo), lo) {
            pieces.push(p);
        }
        pieces.extend(insert);
        for p in self.segments_in(hi, dhi.max(hi)) {
            pieces.push(p);
        }
        PiecewiseProfile {
            pieces,
            ext_left: self.ext_left,
            ext_right: self.ext_right,
        }
    }
}

/// Merged breakpoints of two profiles restricted to [a, b], with the window
/// edges included.
fn merged_grid(pa: &PiecewiseProfile, pb: &PiecewiseProfile, a: f64, b: f64) -> Vec<f64> {
    let mut xs = vec![a, b];
    for x in pa.breakpoints().into_iter().chain(pb.breakpoints()) {
        if x > a && x < b {
            xs.push(x);
        }
    }
    xs.sort_by(|p, q| p.partial_cmp(q).unwrap());
    xs.dedup();
    xs
}

/// Exact ∫_a^b |pa − pb|: on each merged affine segment the difference is
/// affine, so the only work is splitting at its root.
pub fn l1_distance(pa: &PiecewiseProfile, pb: &PiecewiseProfile, a: f64, b: f64) -> f64 {
    debug_assert!(a <= b);
    let xs = merged_grid(pa, pb, a, b);
    let mut total = 0.0;
    for w in xs.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        let len = x1 - x0;
        if !(len > 0.0) {
            continue;
        }
        let d0 = pa.eval_right(x0) - pb.eval_right(x0);
        let d1 = pa.eval_left(x1) - pb.eval_left(x1);
        if d0 == 0.0 && d1 == 0.0 {
            continue;
        }
        if d0 * d1 >= 0.0 {
            total += 0.5 * (d0.abs() + d1.abs()) * len;
        } else {
            // Affine difference crosses zero inside the segment.
            let root = x0 + len * d0.abs() / (d0.abs() + d1.abs());
            total += 0.5 * d0.abs() * (root - x0) + 0.5 * d1.abs() * (x1 - root);
        }
    }
    total
}

/// Exact ∫_a^b pa·pb (the integrand is piecewise quadratic; Simpson on each
/// merged segment is exact).
pub fn inner_product(pa: &PiecewiseProfile, pb: &PiecewiseProfile, a: f64, b: f64) -> f64 {
    let xs = merged_grid(pa, pb, a, b);
    let mut total = 0.0;
    for w in xs.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        let len = x1 - x0;
        if !(len > 0.0) {
            continue;
        }
        // The midpoint is interior to the merged segment, so sides agree.
        let m = 0.5 * (x0 + x1);
        let q0 = pa.eval_right(x0) * pb.eval_right(x0);
        let qm = pa.eval_left(m) * pb.eval_left(m);
        let q1 = pa.eval_left(x1) * pb.eval_left(x1);
        total += len / 6.0 * (q0 + 4.0 * qm + q1);
    }
    total
}

/// Continuous primitive of a profile: x ↦ offset + ∫_base^x profile.
///
/// Lipschitz with constant ‖profile‖_∞ and differentiable a.e. with
/// derivative equal to the profile; piecewise quadratic in closed form.
#[derive(Debug, Clone)]
pub struct PiecewisePrimitive {
    profile: PiecewiseProfile,
    base: f64,
    offset: f64,
    /// cum[i] = ∫ from first breakpoint to breakpoint i.
    cum: Vec<f64>,
}

impl PiecewisePrimitive {
    pub fn new(profile: PiecewiseProfile, base: f64, offset: f64) -> Self {
        let mut cum = Vec::with_capacity(profile.pieces.len() + 1);
        cum.push(0.0);
        let mut acc = 0.0;
        for p in &profile.pieces {
            let len = p.x_hi - p.x_lo;
            acc += (p.a + 0.5 * p.b * len) * len;
            cum.push(acc);
        }
        PiecewisePrimitive {
            profile,
            base,
            offset,
            cum,
        }
    }

    pub fn profile(&self) -> &PiecewiseProfile {
        &self.profile
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn with_offset(&self, offset: f64) -> Self {
        let mut out = self.clone();
        out.offset = offset;
        out
    }

    /// ∫ from the first breakpoint to x (signed), O(log n).
    fn integral_from_start(&self, x: f64) -> f64 {
        let Some((lo, hi)) = self.profile.domain() else {
            return self.profile.ext_left * x;
        };
        if x <= lo {
            return self.profile.ext_left * (x - lo);
        }
        if x >= hi {
            return self.cum[self.cum.len() - 1] + self.profile.ext_right * (x - hi);
        }
        let pieces = &self.profile.pieces;
        let idx = pieces.partition_point(|p| p.x_hi < x);
        let p = &pieces[idx];
        let len = x - p.x_lo;
        self.cum[idx] + (p.a + 0.5 * p.b * len) * len
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.offset + self.integral_from_start(x) - self.integral_from_start(self.base)
    }

    /// One-sided derivatives: the exact limits of the difference quotient.
    pub fn deriv_left(&self, x: f64) -> f64 {
        self.profile.eval_left(x)
    }

    pub fn deriv_right(&self, x: f64) -> f64 {
        self.profile.eval_right(x)
    }
}
