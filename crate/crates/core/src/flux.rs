//! Uniformly convex flux functions.
//!
//! A [`ConvexFlux`] bundles the flux f, its derivatives f' and f'', the
//! inverse characteristic-speed map g = (f')⁻¹ and the convex conjugate
//! f*(λ) = λ·g(λ) − f(g(λ)). Everything downstream (variational solvers,
//! attainability checks, membership tests) evaluates the flux only through
//! this type.
//!
//! Admissible fluxes are normalized so that f(0) = min f = 0 and satisfy
//! f'' ≥ c > 0 on the declared state range. Inputs are expected already
//! normalized; no automatic translation is applied.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

/// Grid resolution used by the load-time convexity / normalization checks.
const VALIDATION_GRID: usize = 1000;

/// Absolute residual target for Newton inversion of f'.
const NEWTON_TOL: f64 = 1e-12;
const NEWTON_MAX_ITER: usize = 100;

#[derive(Debug, Error)]
pub enum FluxError {
    #[error("speed {lambda} outside admissible range [{lo}, {hi}]")]
    SpeedOutOfRange { lambda: f64, lo: f64, hi: f64 },
    #[error("flux is not uniformly convex on the state range: f''({u}) = {ddf}")]
    NotConvex { u: f64, ddf: f64 },
    #[error("flux is not normalized: expected f(0) = min f = 0, got {detail}")]
    NotNormalized { detail: String },
    #[error("state range [{lo}, {hi}] is degenerate or not finite")]
    BadStateRange { lo: f64, hi: f64 },
    #[error("inversion of f' failed to converge at speed {lambda}")]
    InversionFailed { lambda: f64 },
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum FluxForm {
    /// f(u) = u²/2, the classic quadratic model.
    Burgers,
    /// Polynomial with coefficients `c[k]` for u^k.
    Poly(Vec<f64>),
    /// Arbitrary C² flux supplied as closures (not expressible in JSON).
    Custom {
        f: ScalarFn,
        df: ScalarFn,
        ddf: ScalarFn,
        label: String,
    },
}

/// A uniformly convex flux together with the state interval on which all
/// profiles are expected to live.
///
/// Immutable after construction; cheap to clone and safe to share across
/// threads.
#[derive(Clone)]
pub struct ConvexFlux {
    form: FluxForm,
    state_range: (f64, f64),
    /// Certified lower bound on f'' over the sampled state range.
    convexity_floor: f64,
    /// (f'(u_min), f'(u_max)); f' is increasing so this is the speed range.
    speed_range: (f64, f64),
}

impl fmt::Debug for ConvexFlux {
    fn fmt(&self, fmt: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = match &self.form {
            FluxForm::Burgers => "burgers".to_string(),
            FluxForm::Poly(c) => format!("poly{c:?}"),
            FluxForm::Custom { label, .. } => label.clone(),
        };
        fmt.debug_struct("ConvexFlux")
            .field("form", &label)
            .field("state_range", &self.state_range)
            .field("convexity_floor", &self.convexity_floor)
            .finish()
    }
}

/// JSON representation: `{"type":"burgers"}` or
/// `{"type":"poly","coeffs":[...],"range":[a,b]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum FluxSpec {
    Burgers {
        #[serde(skip_serializing_if = "Option::is_none")]
        range: Option<(f64, f64)>,
    },
    Poly { coeffs: Vec<f64>, range: (f64, f64) },
}

/// Default state range for the quadratic flux; wide enough that every
/// profile built by this crate stays strictly inside it.
const BURGERS_RANGE: (f64, f64) = (-100.0, 100.0);

impl ConvexFlux {
    pub fn burgers() -> Self {
        // Quadratic flux passes every validation identically; skip the grid.
        ConvexFlux {
            form: FluxForm::Burgers,
            state_range: BURGERS_RANGE,
            convexity_floor: 1.0,
            speed_range: BURGERS_RANGE,
        }
    }

    /// Polynomial flux Σ coeffs\[k\]·u^k, validated on `range`.
    pub fn poly(coeffs: Vec<f64>, range: (f64, f64)) -> Result<Self, FluxError> {
        let form = FluxForm::Poly(coeffs);
        Self::validated(form, range)
    }

    /// Flux given by closures for f, f', f''. Used for non-polynomial test
    /// fluxes such as cosh(u) − 1.
    pub fn custom(
        label: &str,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
        ddf: impl Fn(f64) -> f64 + Send + Sync + 'static,
        range: (f64, f64),
    ) -> Result<Self, FluxError> {
        let form = FluxForm::Custom {
            f: Arc::new(f),
            df: Arc::new(df),
            ddf: Arc::new(ddf),
            label: label.to_string(),
        };
        Self::validated(form, range)
    }

    pub fn from_spec(spec: &FluxSpec) -> Result<Self, FluxError> {
        match spec {
            FluxSpec::Burgers { range: None } => Ok(Self::burgers()),
            FluxSpec::Burgers { range: Some(r) } => {
                Self::validated(FluxForm::Burgers, *r)
            }
            FluxSpec::Poly { coeffs, range } => Self::poly(coeffs.clone(), *range),
        }
    }

    pub fn to_spec(&self) -> FluxSpec {
        match &self.form {
            FluxForm::Burgers => FluxSpec::Burgers {
                range: if self.state_range == BURGERS_RANGE {
                    None
                } else {
                    Some(self.state_range)
                },
            },
            FluxForm::Poly(c) => FluxSpec::Poly {
                coeffs: c.clone(),
                range: self.state_range,
            },
            FluxForm::Custom { label, .. } => {
                panic!("custom flux {label:?} has no JSON form")
            }
        }
    }

    fn validated(form: FluxForm, range: (f64, f64)) -> Result<Self, FluxError> {
        let (lo, hi) = range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(FluxError::BadStateRange { lo, hi });
        }
        let mut flux = ConvexFlux {
            form,
            state_range: range,
            convexity_floor: f64::INFINITY,
            speed_range: (0.0, 0.0),
        };
        // Normalization: f(0) = min f = 0 and f ≥ 0 on the range.
        let f0 = flux.f(0.0);
        if f0.abs() > 1e-10 {
            return Err(FluxError::NotNormalized {
                detail: format!("f(0) = {f0}"),
            });
        }
        let mut floor = f64::INFINITY;
        for k in 0..=VALIDATION_GRID {
            let u = lo + (hi - lo) * k as f64 / VALIDATION_GRID as f64;
            let dd = flux.ddf(u);
            if !(dd > 0.0) || !dd.is_finite() {
                return Err(FluxError::NotConvex { u, ddf: dd });
            }
            floor = floor.min(dd);
            let fu = flux.f(u);
            if fu < -1e-9 {
                return Err(FluxError::NotNormalized {
                    detail: format!("f({u}) = {fu} < 0"),
                });
            }
        }
        flux.convexity_floor = floor;
        flux.speed_range = (flux.df(lo), flux.df(hi));
        Ok(flux)
    }

    pub fn f(&self, u: f64) -> f64 {
        match &self.form {
            FluxForm::Burgers => 0.5 * u * u,
            FluxForm::Poly(c) => horner(c, u),
            FluxForm::Custom { f, .. } => f(u),
        }
    }

    pub fn df(&self, u: f64) -> f64 {
        match &self.form {
            FluxForm::Burgers => u,
            FluxForm::Poly(c) => horner_deriv(c, u, 1),
            FluxForm::Custom { df, .. } => df(u),
        }
    }

    pub fn ddf(&self, u: f64) -> f64 {
        match &self.form {
            FluxForm::Burgers => 1.0,
            FluxForm::Poly(c) => horner_deriv(c, u, 2),
            FluxForm::Custom { ddf, .. } => ddf(u),
        }
    }

    pub fn state_range(&self) -> (f64, f64) {
        self.state_range
    }

    pub fn speed_range(&self) -> (f64, f64) {
        self.speed_range
    }

    pub fn convexity_floor(&self) -> f64 {
        self.convexity_floor
    }

    /// For f(u) = q2·u² + q1·u (+ 0) returns (q1, q2). Quadratic fluxes get
    /// closed-form inversion and exact piecewise-linear transport downstream.
    pub fn quadratic_coeffs(&self) -> Option<(f64, f64)> {
        match &self.form {
            FluxForm::Burgers => Some((0.0, 0.5)),
            FluxForm::Poly(c) if c.len() <= 3 => {
                let q1 = c.get(1).copied().unwrap_or(0.0);
                let q2 = c.get(2).copied().unwrap_or(0.0);
                (q2 > 0.0).then_some((q1, q2))
            }
            _ => None,
        }
    }

    pub fn is_quadratic(&self) -> bool {
        self.quadratic_coeffs().is_some()
    }

    /// g(λ) = (f')⁻¹(λ): the state travelling at speed λ.
    ///
    /// Closed form for quadratic fluxes, otherwise safeguarded Newton with a
    /// bisection fallback; the residual |f'(u) − λ| is driven below
    /// 10⁻¹²·max(1, |λ|).
    pub fn g(&self, lambda: f64) -> Result<f64, FluxError> {
        let (slo, shi) = self.speed_range;
        // Small relative slack so exact range endpoints never get rejected.
        let slack = 1e-9 * (1.0 + shi.abs().max(slo.abs()));
        if !(lambda >= slo - slack && lambda <= shi + slack) {
            return Err(FluxError::SpeedOutOfRange {
                lambda,
                lo: slo,
                hi: shi,
            });
        }
        let lambda_c = lambda.clamp(slo, shi);
        if let Some((q1, q2)) = self.quadratic_coeffs() {
            return Ok((lambda_c - q1) / (2.0 * q2));
        }
        let tol = NEWTON_TOL * lambda.abs().max(1.0);
        let (mut a, mut b) = self.state_range;
        let mut u = 0.5 * (a + b);
        for _ in 0..NEWTON_MAX_ITER {
            let r = self.df(u) - lambda_c;
            if r.abs() <= tol {
                return Ok(u);
            }
            // f' is increasing: keep the bracket tight.
            if r > 0.0 {
                b = u;
            } else {
                a = u;
            }
            let step = r / self.ddf(u);
            let next = u - step;
            u = if next > a && next < b {
                next
            } else {
                0.5 * (a + b)
            };
        }
        // Bisection finish: the bracket halves each round.
        for _ in 0..200 {
            let r = self.df(u) - lambda_c;
            if r.abs() <= tol {
                return Ok(u);
            }
            if r > 0.0 {
                b = u;
            } else {
                a = u;
            }
            u = 0.5 * (a + b);
        }
        Err(FluxError::InversionFailed { lambda })
    }

    /// Convex conjugate f*(λ) = λ·g(λ) − f(g(λ)).
    pub fn legendre(&self, lambda: f64) -> Result<f64, FluxError> {
        let u = self.g(lambda)?;
        Ok(lambda * u - self.f(u))
    }

    /// Godunov interface flux for convex f:
    /// min of f on \[a,b\] when a ≤ b, max of f on \[b,a\] otherwise.
    pub fn godunov_flux(&self, a: f64, b: f64) -> f64 {
        if a <= b {
            if self.df(a) >= 0.0 {
                self.f(a)
            } else if self.df(b) <= 0.0 {
                self.f(b)
            } else {
                // Sonic point inside: min f = f(0) = 0 under the
                // normalization, computed rather than assumed.
                self.f(self.g(0.0).unwrap_or(0.0))
            }
        } else {
            self.f(a).max(self.f(b))
        }
    }
}

fn horner(coeffs: &[f64], u: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * u + c)
}

/// Evaluate the `order`-th derivative of the polynomial at u.
fn horner_deriv(coeffs: &[f64], u: f64, order: u32) -> f64 {
    let mut acc = 0.0;
    for (k, &c) in coeffs.iter().enumerate().rev() {
        if (k as u32) < order {
            break;
        }
        let mut factor = 1.0;
        for j in 0..order {
            factor *= (k as u32 - j) as f64;
        }
        acc = acc * u + c * factor;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn cosh_flux() -> ConvexFlux {
        ConvexFlux::custom(
            "cosh(u)-1",
            |u| u.cosh() - 1.0,
            f64::sinh,
            f64::cosh,
            (-2.0, 2.0),
        )
        .unwrap()
    }

    fn quartic_flux() -> ConvexFlux {
        // f(u) = u⁴/12 + u²/2, convex with f'' = u² + 1 ≥ 1.
        ConvexFlux::poly(vec![0.0, 0.0, 0.5, 0.0, 1.0 / 12.0], (-2.0, 2.0)).unwrap()
    }

    #[test]
    fn burgers_g_is_identity() {
        let f = ConvexFlux::burgers();
        assert_eq!(f.g(0.7).unwrap(), 0.7);
    }

    #[test]
    fn quartic_inversion_roundtrip() {
        let f = quartic_flux();
        let lambda = f.df(0.3);
        assert!((f.g(lambda).unwrap() - 0.3).abs() < 1e-10);
    }

    #[test]
    fn cosh_g_matches_asinh() {
        let f = cosh_flux();
        let got = f.g(1.0).unwrap();
        assert!((got - 1.0f64.asinh()).abs() < 1e-10, "got {got}");
        // Independent bisection oracle on sinh(u) = 1.
        let (mut a, mut b) = (0.0f64, 2.0f64);
        for _ in 0..80 {
            let m = 0.5 * (a + b);
            if m.sinh() < 1.0 {
                a = m;
            } else {
                b = m;
            }
        }
        assert!((got - 0.5 * (a + b)).abs() < 1e-10);
    }

    #[test]
    fn g_out_of_range_is_rejected() {
        let f = cosh_flux();
        let err = f.g(100.0).unwrap_err();
        match err {
            FluxError::SpeedOutOfRange { lo, hi, .. } => {
                assert!((lo - (-2.0f64).sinh()).abs() < 1e-12);
                assert!((hi - 2.0f64.sinh()).abs() < 1e-12);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn burgers_legendre_is_half_square() {
        let f = ConvexFlux::burgers();
        for lambda in [-1.0, 0.5, 2.0] {
            assert!((f.legendre(lambda).unwrap() - 0.5 * lambda * lambda).abs() < 1e-12);
        }
    }

    #[test]
    fn legendre_vanishes_at_zero_speed() {
        for f in [ConvexFlux::burgers(), quartic_flux(), cosh_flux()] {
            assert!(f.legendre(0.0).unwrap().abs() < 1e-12, "{f:?}");
        }
    }

    #[test]
    fn cosh_legendre_value() {
        let f = cosh_flux();
        let expected = 1.0f64.asinh() - (2.0f64.sqrt() - 1.0);
        assert!((f.legendre(1.0).unwrap() - expected).abs() < 1e-10);
        // Cross-check against sup_u (λu − f(u)) by grid + local refinement.
        let mut best = f64::NEG_INFINITY;
        let mut best_u = 0.0;
        for k in 0..=4000 {
            let u = -2.0 + 4.0 * k as f64 / 4000.0;
            let v = u - (u.cosh() - 1.0);
            if v > best {
                best = v;
                best_u = u;
            }
        }
        let (mut a, mut b) = (best_u - 1e-3, best_u + 1e-3);
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if 1.0 - m.sinh() > 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        let u = 0.5 * (a + b);
        assert!((f.legendre(1.0).unwrap() - (u - (u.cosh() - 1.0))).abs() < 1e-9);
    }

    #[test]
    fn fenchel_young_inequality_holds() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for f in [ConvexFlux::burgers(), quartic_flux(), cosh_flux()] {
            let (ulo, uhi) = if f.is_quadratic() {
                (-2.0, 2.0)
            } else {
                f.state_range()
            };
            let (slo, shi) = (f.df(ulo), f.df(uhi));
            for _ in 0..10_000 {
                let u = rng.random_range(ulo..uhi);
                let lam = rng.random_range(slo..shi);
                let gap = f.f(u) + f.legendre(lam).unwrap() - lam * u;
                assert!(gap >= -1e-10, "Fenchel-Young violated: {gap}");
                if (lam - f.df(u)).abs() < 1e-9 {
                    assert!(gap.abs() < 1e-8);
                }
            }
            // Equality case probed directly.
            let u = 0.5 * (ulo + uhi) + 0.1;
            let lam = f.df(u);
            let gap = f.f(u) + f.legendre(lam).unwrap() - lam * u;
            assert!(gap.abs() < 1e-8);
        }
    }

    #[test]
    fn legendre_derivative_is_g() {
        for f in [quartic_flux(), cosh_flux()] {
            let (slo, shi) = f.speed_range();
            let h = 1e-6;
            for k in 1..40 {
                let lam = slo + (shi - slo) * k as f64 / 40.0;
                if lam - h < slo || lam + h > shi {
                    continue;
                }
                let fd =
                    (f.legendre(lam + h).unwrap() - f.legendre(lam - h).unwrap()) / (2.0 * h);
                assert!((fd - f.g(lam).unwrap()).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn convexity_floor_certified_on_grid() {
        let f = quartic_flux();
        assert!(f.convexity_floor() >= 1.0 - 1e-12);
        let g = cosh_flux();
        assert!(g.convexity_floor() >= 1.0 - 1e-12);
    }

    #[test]
    fn non_convex_poly_rejected() {
        assert!(matches!(
            ConvexFlux::poly(vec![0.0, 0.0, -0.5], (-1.0, 1.0)),
            Err(FluxError::NotConvex { .. })
        ));
    }

    #[test]
    fn unnormalized_poly_rejected() {
        // f(0) = 1 ≠ 0.
        assert!(matches!(
            ConvexFlux::poly(vec![1.0, 0.0, 0.5], (-1.0, 1.0)),
            Err(FluxError::NotNormalized { .. })
        ));
    }

    #[test]
    fn spec_roundtrip() {
        let spec: FluxSpec = serde_json::from_str(r#"{"type":"burgers"}"#).unwrap();
        let f = ConvexFlux::from_spec(&spec).unwrap();
        assert!(f.is_quadratic());
        let spec2: FluxSpec =
            serde_json::from_str(r#"{"type":"poly","coeffs":[0,0,0.5],"range":[-3,3]}"#)
                .unwrap();
        let f2 = ConvexFlux::from_spec(&spec2).unwrap();
        assert_eq!(f2.quadratic_coeffs(), Some((0.0, 0.5)));
        let back = serde_json::to_string(&f2.to_spec()).unwrap();
        assert!(back.contains("poly"));
    }

    #[test]
    fn strict_convexity_of_conjugate_on_progressions() {
        for f in [ConvexFlux::burgers(), quartic_flux(), cosh_flux()] {
            let (slo, shi) = if f.is_quadratic() {
                (-3.0, 3.0)
            } else {
                f.speed_range()
            };
            for k in 1..20 {
                let mid = slo + (shi - slo) * k as f64 / 20.0;
                let h = (shi - slo) / 100.0;
                if mid - h <= slo || mid + h >= shi {
                    continue;
                }
                let second = f.legendre(mid - h).unwrap() - 2.0 * f.legendre(mid).unwrap()
                    + f.legendre(mid + h).unwrap();
                assert!(second > 0.0, "second difference {second} at {mid}");
            }
        }
    }
}
