use homns_core::decay::{constant_via_quadrature, corrected_closed_form, sharp_constant};
use homns_core::field::VelocityField;
use homns_core::functionals::{compute_b, weighted_magnitudes, BQuadrature};
use homns_core::inequality::{ckn_conditions, ckn_ratio, log_sobolev_check, Bump, CknSpec, GaussMix};
use homns_core::interp::ProfileInterpolant;
use homns_core::{solve_profile, HomParams, SolverOptions};
use proptest::prelude::*;

const TOL: f64 = 1e-8;

fn solved(p: HomParams) -> Option<homns_core::ThetaProfile> {
    solve_profile(&p, &SolverOptions::default(), TOL).ok()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn reflection_swaps_c1_c2_and_flips_gamma(c1 in -0.5f64..1.0, c2 in -0.5f64..1.0, c3 in 0.0f64..1.5, g in -0.4f64..0.4) {
        let p = HomParams::new(c1, c2, c3, g);
        let (Some(a), Some(b)) = (solved(p), solved(p.reflected())) else { return Err(TestCaseError::reject("outside M")) };
        prop_assert_eq!(a.nodes.len(), b.nodes.len());
        let n = a.nodes.len();
        for i in 0..n {
            prop_assert!((a.nodes[i] + b.nodes[n - 1 - i]).abs() < 1e-15);
            prop_assert!((a.u_values[i] + b.u_values[n - 1 - i]).abs() < 10.0 * TOL);
        }
    }

    #[test]
    fn endpoints_and_origin_value(c1 in -0.5f64..1.0, c2 in -0.5f64..1.0, c3 in -0.5f64..1.5, g in -0.4f64..0.4) {
        let p = HomParams::new(c1, c2, c3, g);
        let Some(prof) = solved(p) else { return Err(TestCaseError::reject("outside M")) };
        let (dm, dp) = prof.endpoint_defects();
        prop_assert!(dm.abs() <= 100.0 * TOL && dp.abs() <= 100.0 * TOL, "{dm} {dp}");
        let it = ProfileInterpolant::new(&prof).unwrap();
        prop_assert!((it.eval(0.0).u - g).abs() <= TOL);
    }

    #[test]
    fn velocity_is_homogeneous_and_swirl_free(theta in 0.05f64..3.09, phi in 0.0f64..6.28, r in 0.1f64..10.0, lambda in 0.2f64..5.0) {
        let prof = solved(HomParams::new(0.0, 0.0, 0.7, 0.2)).unwrap();
        let f = VelocityField::new(&prof).unwrap();
        let x = [r * theta.sin() * phi.cos(), r * theta.sin() * phi.sin(), r * theta.cos()];
        let xl = x.map(|v| v * lambda);
        let (u, ul) = (f.velocity(x).unwrap(), f.velocity(xl).unwrap());
        for i in 0..3 {
            prop_assert!((ul[i] * lambda - u[i]).abs() <= 1e-12 * (1.0 + u[i].abs()));
        }
        let (p, pl) = (f.pressure(x).unwrap(), f.pressure(xl).unwrap());
        prop_assert!((pl * lambda * lambda - p).abs() <= 1e-12 * (1.0 + p.abs()));
        prop_assert_eq!(f.spherical_components(x).unwrap()[2], 0.0);
    }

    #[test]
    fn cone_weights_do_not_see_the_radius(theta in 1e-6f64..3.14, r in 1e-3f64..1e3) {
        let prof = solved(HomParams::new(0.1, 0.0, 0.5, 0.1)).unwrap();
        let f = VelocityField::new(&prof).unwrap();
        let a = weighted_magnitudes(&f, r, theta).unwrap();
        let b = weighted_magnitudes(&f, 2.0 * r, theta).unwrap();
        for i in 0..3 {
            prop_assert!((a[i] - b[i]).abs() <= 1e-13 * a[i].abs().max(1e-300) + 1e-300, "{a:?} {b:?}");
        }
    }

    #[test]
    fn ckn_verdict_is_stable_under_tiny_perturbations(a in 0.0f64..0.99, slot in 0usize..3, sign in prop::bool::ANY, delta in 0.0f64..1e-13) {
        let spec = CknSpec::hardy_family(a).unwrap();
        prop_assert!(ckn_conditions(&spec).overall);
        let d = if sign { delta } else { -delta };
        let mut pa = spec;
        pa.alpha[slot] += d;
        let mut pb = spec;
        pb.beta[slot] += d;
        prop_assert!(ckn_conditions(&pa).overall && ckn_conditions(&pb).overall);
    }

    #[test]
    fn ckn_ratio_is_dilation_invariant(a in 0.0f64..0.99, rho0 in 0.0f64..2.0, s_rho in 0.2f64..2.0, z0 in -2.0f64..2.0, s_z in 0.2f64..2.0, lambda in 0.01f64..100.0) {
        let spec = CknSpec::hardy_family(a).unwrap();
        let b = Bump { rho0, s_rho, z0, s_z };
        let r = ckn_ratio(&spec, &b);
        let rl = ckn_ratio(&spec, &b.dilate(lambda));
        prop_assert!((r - rl).abs() <= 1e-10 * r, "{r} {rl}");
    }

    #[test]
    fn log_sobolev_margin_is_nonnegative(scale in -2.0f64..2.0) {
        let f = GaussMix::gaussian(10f64.powf(scale));
        prop_assert!(log_sobolev_check(&f, &[0.1, 1.0, 10.0]) >= -1e-8);
    }

    #[test]
    fn decay_constant_rises_with_tau(q in 3.01f64..100.0, t1 in 0.01f64..0.98, dt in 1e-3f64..0.01) {
        let a = sharp_constant(q, t1).unwrap();
        let b = sharp_constant(q, t1 + dt).unwrap();
        prop_assert!(b > a);
    }

    #[test]
    fn decay_constant_has_smooth_q_dependence(q in 3.01f64..100.0) {
        let h = 1e-3 * (q - 3.0).min(1.0);
        let f = |x: f64| sharp_constant(x, 0.5).unwrap();
        let d2 = (f(q + h) - 2.0 * f(q) + f(q - h)) / (h * h);
        let d2h = (f(q + 0.5 * h) - 2.0 * f(q) + f(q - 0.5 * h)) / (0.25 * h * h);
        prop_assert!(d2.is_finite() && d2h.is_finite());
        prop_assert!((d2 - d2h).abs() <= 1e-2 * d2.abs().max(1e-6), "{d2} {d2h}");
    }

    #[test]
    fn decay_constant_matches_quadrature(q in 3.2f64..40.0, tau in 0.05f64..0.95) {
        let quad = constant_via_quadrature(q, tau).unwrap();
        let closed = corrected_closed_form(q, tau).unwrap();
        prop_assert!((quad - closed).abs() <= 1e-8 * closed, "{quad} {closed}");
        // the printed product differs from the integral by a q-only factor
        let d = 1.0 / 3.0 - 1.0 / q;
        let factor = q.powf(6.0 / q) * (-6.0 * d).exp() / 9.0;
        let printed = sharp_constant(q, tau).unwrap();
        prop_assert!((printed / quad - factor).abs() <= 1e-8 * factor);
    }
}

#[test]
fn b_error_estimate_covers_refinement() {
    for c3 in [0.1, 0.4] {
        let prof = solved(HomParams::new(0.0, 0.0, c3, 0.2)).unwrap();
        let coarse = compute_b(&prof, &BQuadrature::default()).unwrap();
        let fine = compute_b(&prof, &BQuadrature { panel_counts: [128, 256, 512], ..BQuadrature::default() }).unwrap();
        assert!((coarse.value - fine.value).abs() <= coarse.error_estimate.max(1e-14), "{coarse:?} {fine:?}");
    }
}

#[test]
fn fixed_step_refinement_reduces_residual() {
    let p = HomParams::new(0.0, 0.0, 1.0, 0.3);
    let res = |h: f64| solve_profile(&p, &SolverOptions::fixed_step(h), 1.0).unwrap().max_residual;
    let (a, b) = (res(0.08), res(0.04));
    assert!(a / b >= 4.0, "{a} {b}");
}

#[test]
fn divergence_is_second_order() {
    let prof = solved(HomParams::new(0.2, 0.1, 0.8, 0.1)).unwrap();
    let f = VelocityField::new(&prof).unwrap();
    for x in [[0.6, 0.2, 0.5], [-0.3, 0.8, -0.9]] {
        let (a, b) = (f.divergence(x, 0.02).unwrap().abs(), f.divergence(x, 0.01).unwrap().abs());
        assert!(b < 1e-12 || (a / b > 3.5 && a / b < 4.5), "{a} {b}");
    }
}
