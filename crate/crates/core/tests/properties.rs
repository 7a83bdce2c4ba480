//! Cross-module invariants that complement the acceptance criteria: total
//! variation minimality of the extremal datum, fan-mass conservation,
//! route agreement near the tolerance, the refined finite-volume
//! cross-check, and a few randomized algebra properties.

use invlaw::cli::{corpus_generate, CorpusConfig};
use invlaw::flux::ConvexFlux;
use invlaw::inverse::InverseProblem;
use invlaw::laxhopf;
use invlaw::oracle;
use invlaw::piecewise::{l1_distance, PiecewisePrimitive, PiecewiseProfile};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20260808;
const HORIZON: f64 = 1.0;

fn burgers() -> ConvexFlux {
    ConvexFlux::burgers()
}

fn jumpy_corpus(n: usize) -> Vec<PiecewiseProfile> {
    corpus_generate(SEED, 3 * n, &burgers(), &CorpusConfig::default())
        .into_iter()
        .filter(|w| !w.jumps().is_empty())
        .take(n)
        .collect()
}

fn members_of(prob: &InverseProblem) -> Vec<PiecewiseProfile> {
    let mut out = vec![prob.extremal_pullback()];
    if let Some(j) = prob.pmap().jumps().iter().find(|j| j.gap_width() > 0.0) {
        let sharp = prob.sharp(j.x).unwrap();
        out.push(prob.cone_combination(&sharp, 0.5).unwrap());
        out.push(prob.cone_combination(&sharp, 4.0).unwrap());
        out.extend(prob.tent_family(&sharp, 2).unwrap());
        out.push(sharp);
    }
    out
}

/// Window covering every breakpoint of all profiles, with padding.
fn covering_window(profiles: &[PiecewiseProfile]) -> (f64, f64) {
    let mut lo = -1.0f64;
    let mut hi = 1.0f64;
    for p in profiles {
        for x in p.breakpoints() {
            lo = lo.min(x - 1.0);
            hi = hi.max(x + 1.0);
        }
    }
    (lo, hi)
}

#[test]
fn extremal_datum_minimizes_total_variation_across_members() {
    // Observed across the corpus, not a proved statement: the vertex of the
    // cone never exceeds the variation of any other constructed member.
    for w in jumpy_corpus(6) {
        let prob = InverseProblem::new(w, burgers(), HORIZON).unwrap();
        let members = members_of(&prob);
        let (lo, hi) = covering_window(&members);
        let tv_star = members[0].total_variation(lo, hi);
        for (k, m) in members.iter().enumerate().skip(1) {
            let tv = m.total_variation(lo, hi);
            assert!(
                tv_star <= tv + 1e-8,
                "member {k} has smaller variation: {tv} < {tv_star}"
            );
        }
    }
}

#[test]
fn fan_mass_is_conserved_for_every_member() {
    // At each gap the member's mean over the gap matches the bracket of
    // v·f'(v) − f(v) across the jump.
    let flux = burgers();
    for w in jumpy_corpus(6) {
        let prob = InverseProblem::new(w, flux.clone(), HORIZON).unwrap();
        for m in members_of(&prob) {
            for j in prob.pmap().jumps().iter().filter(|j| j.gap_width() > 0.0) {
                let mean = m.integrate(j.y_left, j.y_right) / HORIZON;
                let bracket = (j.w_left * flux.df(j.w_left) - flux.f(j.w_left))
                    - (j.w_right * flux.df(j.w_right) - flux.f(j.w_right));
                assert!(
                    (mean - bracket).abs() < 1e-8,
                    "fan balance residual {:.3e} at jump {}",
                    mean - bracket,
                    j.x
                );
            }
        }
    }
}

#[test]
fn membership_routes_agree_below_tolerance_too() {
    // A perturbation far below the tolerance is invisible to both routes;
    // one safely above is refuted by both. Either way the verdicts agree.
    let prob = InverseProblem::new(
        PiecewiseProfile::step(0.0, 1.0, 0.0),
        burgers(),
        HORIZON,
    )
    .unwrap();
    let u_star = prob.extremal_pullback();
    let w_pot = prob.target().primitive(0.0);
    for height in [1e-12, 1e-3] {
        let candidate = u_star.add_bump(height, 1.5, 1.7);
        let cl = prob.membership_cl(&candidate);
        let offset = prob.consistent_offset(&candidate, &w_pot).unwrap();
        let hj = prob.membership_hj(
            &PiecewisePrimitive::new(candidate.clone(), 0.0, offset),
            &w_pot,
        );
        assert_eq!(cl.verdict, hj.verdict, "route disagreement at {height}");
        assert_eq!(cl.verdict, height < prob.tolerances().membership);
    }
}

#[test]
fn godunov_cross_validation_tightens_with_dx() {
    // Refined grid: the finite-volume evolution of the extremal datum must
    // land within 3e-3 of the target at dx = 2.5e-4.
    let flux = burgers();
    for w in jumpy_corpus(3) {
        let prob = InverseProblem::new(w.clone(), flux.clone(), HORIZON).unwrap();
        let u_star = prob.extremal_pullback();
        let coarse = oracle::evolve_fv(&u_star, &flux, HORIZON, -6.0, 6.0, 1e-3, 0.9).unwrap();
        let fine = oracle::evolve_fv(&u_star, &flux, HORIZON, -6.0, 6.0, 2.5e-4, 0.9).unwrap();
        let d_coarse = l1_distance(&coarse, &w, -5.0, 5.0);
        let d_fine = l1_distance(&fine, &w, -5.0, 5.0);
        assert!(d_coarse <= 1e-2, "coarse defect {d_coarse:.3e}");
        assert!(d_fine <= 3e-3, "fine defect {d_fine:.3e}");
        assert!(d_fine < d_coarse, "refinement must tighten the defect");
    }
}

#[test]
fn one_sided_lipschitz_bound_on_extremal_data() {
    let flux = burgers();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 0x0105);
    for w in jumpy_corpus(5) {
        let prob = InverseProblem::new(w, flux.clone(), HORIZON).unwrap();
        let u_star = prob.extremal_pullback();
        for _ in 0..2000 {
            let x = rng.random_range(-6.0..6.0);
            let y: f64 = rng.random_range(1e-9..3.0);
            let drop = flux.df(u_star.eval_left(x - y)) - flux.df(u_star.eval_left(x));
            assert!(drop <= y / HORIZON + 1e-8, "decay violated by {drop}");
        }
    }
}

#[test]
fn lift_matches_variational_potential_through_moving_anchor() {
    // Same potential from a polyline anchor that crosses the wave region.
    let flux = burgers();
    let u0 = PiecewiseProfile::step(0.0, 1.0, 0.0);
    let path = laxhopf::Path::Polyline(vec![(0.0, -1.5), (0.5, -1.2), (1.0, -1.4)]);
    let xs: Vec<f64> = (0..=60).map(|k| -2.0 + 4.0 * k as f64 / 60.0).collect();
    let lift = laxhopf::lift_cl_to_hj(
        &u0,
        &flux,
        &path,
        0.25,
        1.0,
        &xs,
        laxhopf::LiftConfig::default(),
    )
    .unwrap();
    // Matching datum: ∫_{γ(0)}^x u₀ + c.
    let prim = PiecewisePrimitive::new(u0.clone(), -1.5, 0.25);
    let direct = laxhopf::evolve_hj_grid(&prim, &flux, 1.0, &xs).unwrap();
    for ((&x, &a), &b) in xs.iter().zip(&lift).zip(&direct) {
        assert!((a - b).abs() < 1e-5, "x = {x}: {a} vs {b}");
    }
}

#[test]
fn non_burgers_quadratic_flux_full_battery() {
    // f(u) = u²/4: quadratic but with halved speeds, so transported
    // positions and fan geometry differ from the classic normalization.
    let flux = ConvexFlux::poly(vec![0.0, 0.0, 0.25], (-20.0, 20.0)).unwrap();
    let cfg = CorpusConfig {
        horizon: 1.0,
        ..CorpusConfig::default()
    };
    for w in corpus_generate(SEED ^ 0x25, 6, &flux, &cfg) {
        let prob = InverseProblem::new(w.clone(), flux.clone(), cfg.horizon).unwrap();
        let u_star = prob.extremal_pullback();
        assert!(prob.roundtrip_l1(&u_star, 5.0, 1e-3).unwrap() <= 1e-4);
        let u_rev = prob.extremal_reverse().unwrap();
        assert!(l1_distance(&u_star, &u_rev, -5.0, 5.0) <= 1e-6);
        let w_pot = prob.target().primitive(0.0);
        let offset = prob.consistent_offset(&u_star, &w_pot).unwrap();
        let hj = prob.membership_hj(
            &PiecewisePrimitive::new(u_star.clone(), 0.0, offset),
            &w_pot,
        );
        assert!(prob.membership_cl(&u_star).verdict && hj.verdict);
        if let Some(j) = prob.pmap().jumps().iter().find(|j| j.gap_width() > 0.0) {
            let sharp = prob.sharp(j.x).unwrap();
            assert!(prob.membership_cl(&sharp).verdict);
            assert!(prob.roundtrip_l1(&sharp, 5.0, 1e-3).unwrap() <= 1e-4);
        }
    }
}

#[test]
fn classification_at_the_critical_slope() {
    // Slope exactly 1/T in f'(w) is admissible (a time-zero fan); slightly
    // above is refuted.
    let flux = burgers();
    let critical = PiecewiseProfile::from_nodes(&[(0.0, 0.0), (1.0, 1.0)]).unwrap();
    let pmap = invlaw::oleinik::PMap::build(&critical, &flux, 1.0).unwrap();
    assert!(invlaw::oleinik::check_oleinik(&pmap).admissible);

    let too_steep =
        PiecewiseProfile::from_nodes(&[(0.0, 0.0), (1.0, 1.0 + 1e-6)]).unwrap();
    let pmap = invlaw::oleinik::PMap::build(&too_steep, &flux, 1.0).unwrap();
    let verdict = invlaw::oleinik::check_oleinik(&pmap);
    assert!(!verdict.admissible);
    assert!(verdict.witness.unwrap().margin() < 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quadratic_flux_inversion_identity(q2 in 0.1f64..3.0, u in -5.0f64..5.0) {
        // A linear term would shift min f away from u = 0 and violate the
        // normalization, so admissible quadratics are q2·u².
        let flux = ConvexFlux::poly(vec![0.0, 0.0, q2], (-8.0, 8.0)).unwrap();
        let lam = flux.df(u);
        prop_assert!((flux.g(lam).unwrap() - u).abs() < 1e-10);
        // Fenchel-Young with equality at the matching slope.
        let gap = flux.f(u) + flux.legendre(lam).unwrap() - lam * u;
        prop_assert!(gap.abs() < 1e-9);
    }

    #[test]
    fn constants_are_fixed_points_of_both_solvers(c in -1.5f64..1.5, t in 0.1f64..2.0) {
        let flux = burgers();
        let u0 = PiecewiseProfile::constant(c);
        let st = laxhopf::eval_at(&u0, &flux, t, 0.3).unwrap();
        prop_assert!((st.state_u - c).abs() < 1e-10);
        let fv = oracle::evolve_fv(&u0, &flux, t, -1.0, 1.0, 0.05, 0.9).unwrap();
        prop_assert!((fv.eval_left(0.0) - c).abs() < 1e-12);
    }

    #[test]
    fn corpus_stays_admissible_for_random_seeds(seed in 0u64..10_000) {
        let flux = burgers();
        let cfg = CorpusConfig::default();
        for w in corpus_generate(seed, 3, &flux, &cfg) {
            let pmap = invlaw::oleinik::PMap::build(&w, &flux, cfg.horizon).unwrap();
            prop_assert!(invlaw::oleinik::check_oleinik(&pmap).admissible);
        }
    }
}
