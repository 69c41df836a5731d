use sepmap::dynamics::*;
use sepmap::integrate::IntegratorOptions;
use sepmap::mapbuild::*;
use sepmap::trig::{standard_frequencies, TrigPolynomial};
use std::f64::consts::{FRAC_PI_2, PI, SQRT_2, TAU};

fn opts() -> IntegratorOptions {
    IntegratorOptions::default()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + k as f64 * h);
    }
    s * h / 3.0
}

#[test]
fn melnikov_vanishes_on_balanced_line() {
    for gamma in [0.0, 0.008, 0.08, 0.1, 0.2, 1.0 / 3.0] {
        let (c, p) = duffing_melnikov_closed_form(gamma, 5.0 * gamma / 4.0, &standard_frequencies());
        assert_eq!(c, 0.0);
        assert_eq!(p.constant, 0.0);
    }
}

#[test]
fn melnikov_damping_only() {
    let (c, _) = duffing_melnikov_closed_form(1.0, 0.0, &[1.0]);
    assert!((c + 4.0 / 3.0).abs() < 1e-15);
}

#[test]
fn melnikov_forcing_term_matches_quadrature() {
    let (_, p) = duffing_melnikov_closed_form(0.0, 0.0, &[1.0]);
    let closed = p.eval(&[FRAC_PI_2]);
    assert!((closed - SQRT_2 * PI / (PI / 2.0).cosh()).abs() < 1e-14);
    // defining integral along the upper loop, with the forcing phase referenced to the turning point
    let integrand = |t: f64| duffing_separatrix(t, 1.0)[1] * (t + FRAC_PI_2).cos();
    let quad = simpson(integrand, -40.0, 40.0, 200_000);
    assert!((quad - closed).abs() < 1e-8, "quadrature {quad} vs closed form {closed}");
}

#[test]
fn melnikov_damping_integral_matches_quadrature() {
    let (c, _) = duffing_melnikov_closed_form(1.0, 1.0, &[]);
    let q = simpson(
        |t| {
            let [x, y] = duffing_separatrix(t, 1.0);
            -y * y + x * x * y * y
        },
        -40.0,
        40.0,
        200_000,
    );
    assert!((q - c).abs() < 1e-10);
}

#[test]
fn homoclinic_unperturbed() {
    let h = build_duffing_homoclinic(0.0, opts()).unwrap();
    assert_eq!(h.beta, 0.0);
    assert!(h.splitting.abs() < 1e-10);
    assert!((h.x_turn - SQRT_2).abs() < 1e-8);
}

#[test]
fn homoclinic_shooting_close_to_first_order() {
    let h = build_duffing_homoclinic(0.008, opts()).unwrap();
    assert!(h.splitting.abs() < 1e-10);
    assert!((h.beta - 0.01).abs() <= 5.0 * 0.008 * 0.008, "beta* = {}", h.beta);
    let h2 = build_duffing_homoclinic(0.08, opts()).unwrap();
    assert!(h2.splitting.abs() < 1e-10);
    assert!((h2.beta - 0.1).abs() <= 5.0 * 0.08 * 0.08, "beta* = {}", h2.beta);
}

#[test]
fn homoclinic_rejects_negative_damping() {
    assert!(build_duffing_homoclinic(-0.1, opts()).is_err());
}

#[test]
fn duffing_published_coefficients() {
    let w = standard_frequencies();
    let weak = build_duffing_global_map(0.008, 0.1, &w, BetaChoice::FirstOrder, opts()).unwrap();
    assert!(rel(weak.alpha, 0.9733201532) < 1e-3, "alpha = {}", weak.alpha);
    assert!(rel(weak.rho.cos[0], 9.7591847996) < 1e-2, "A_1 = {}", weak.rho.cos[0]);
    assert!(rel(weak.rho.sin[0], 15.6872106985) < 1e-2, "B_1 = {}", weak.rho.sin[0]);
    let strong = build_duffing_global_map(0.08, 0.1, &w[..1], BetaChoice::FirstOrder, opts()).unwrap();
    assert!(rel(strong.alpha, 0.7629736972) < 1e-3, "alpha = {}", strong.alpha);
    assert!(strong.alpha > 0.0 && strong.alpha <= 1.0);
}

#[test]
fn duffing_alpha_tends_to_one() {
    let g = build_duffing_global_map(0.0, 0.1, &[], BetaChoice::FirstOrder, opts()).unwrap();
    assert!((g.alpha - 1.0).abs() < 1e-6);
}

#[test]
fn duffing_variational_matches_melnikov_at_zero_damping() {
    let r = 0.1;
    let g = build_duffing_global_map(0.0, r, &[], BetaChoice::FirstOrder, opts()).unwrap();
    let m = build_duffing_melnikov(0.0, 0.0, r, &[]).unwrap();
    assert!((g.t_star - (m.s0 + m.s1)).abs() < 1e-8, "{} vs {}", g.t_star, m.s0 + m.s1);
}

#[test]
fn duffing_consistency_degrades_with_damping() {
    let r = 0.1;
    let err = |gamma: f64| {
        let g = build_duffing_global_map(gamma, r, &[], BetaChoice::FirstOrder, opts()).unwrap();
        let m = build_duffing_melnikov(gamma, g.beta, r, &[]).unwrap();
        ((g.t_star - (m.s0 + m.s1)).abs(), (g.alpha - 1.0).abs())
    };
    let (t0, a0) = err(0.0);
    let (t1, a1) = err(0.008);
    let (t2, a2) = err(0.08);
    assert!(t0 < t1 && t1 < t2);
    assert!(a0 < a1 && a1 < a2);
    // alpha u*/v* - 1 = O(gamma)
    assert!(a1 < 10.0 * 0.008 && a2 < 10.0 * 0.08);
}

#[test]
fn duffing_rho_on_phase_grid_matches_two_phase_extraction() {
    let w = [1.0, standard_frequencies()[1]];
    let g = build_duffing_global_map(0.008, 0.1, &w, BetaChoice::FirstOrder, opts()).unwrap();
    let m = 4;
    let values = duffing_rho_on_grid(0.008, 0.1, &w, BetaChoice::FirstOrder, m, opts()).unwrap();
    let mut k = 0;
    for i in 0..m {
        for j in 0..m {
            let th = [TAU * i as f64 / m as f64, TAU * j as f64 / m as f64];
            assert!((values[k] - g.rho.eval(&th)).abs() < 1e-8 * (1.0 + values[k].abs()));
            k += 1;
        }
    }
    let fitted = trig_from_grid(&values, &w, m).unwrap();
    assert!(fitted.constant.abs() < 1e-8);
    for i in 0..2 {
        assert!((fitted.cos[i] - g.rho.cos[i]).abs() < 1e-8 * g.rho.cos[i].abs().max(1.0));
        assert!((fitted.sin[i] - g.rho.sin[i]).abs() < 1e-8 * g.rho.sin[i].abs().max(1.0));
    }
}

#[test]
fn phase_grid_rejects_bad_shapes() {
    assert!(trig_from_grid(&[0.0; 5], &[1.0], 4).is_err());
    assert!(duffing_rho_on_grid(0.0, 0.1, &[1.0], BetaChoice::FirstOrder, 2, opts()).is_err());
}

#[test]
fn hbr_published_coefficients() {
    let w = standard_frequencies();
    let g = build_hbr_global_map(HbrParams::symmetric(0.1).unwrap(), 0.1, &w, opts()).unwrap();
    assert!(rel(g.alpha_x, 0.0000123595) < 1e-2, "alpha_x = {}", g.alpha_x);
    assert!(rel(g.beta_theta, 7.1811476867) < 1e-2, "beta_theta = {}", g.beta_theta);
    assert!(rel(-g.q_s, 0.0091291201) < 1e-2, "q offset = {}", g.q_s);
    assert!(rel(g.rho_x.cos[0], -0.4340559240) < 1e-2, "rho_x A_1 = {}", g.rho_x.cos[0]);
    assert!(rel(g.rho_x.sin[0], 0.7770758314) < 1e-2, "rho_x B_1 = {}", g.rho_x.sin[0]);
}

#[test]
fn hbr_decoupling() {
    let g = build_hbr_global_map(HbrParams::symmetric(0.1).unwrap(), 0.1, &[], opts()).unwrap();
    for (name, v) in [("alpha_q", g.alpha_q), ("beta_q", g.beta_q), ("beta_x", g.beta_x), ("alpha_theta", g.alpha_theta)] {
        assert!(v.abs() < 1e-8, "{name} = {v}");
    }
}

#[test]
fn hbr_melnikov_published_coefficients() {
    let m = build_hbr_melnikov(0.1, &standard_frequencies(), opts()).unwrap();
    assert!(rel(m.xi_i, 0.1147989903) < 1e-3, "Xi_I = {}", m.xi_i);
    assert!(m.b_h >= 0.0 && m.b_h < 1e-8);
    assert!(m.a_x >= 0.0 && m.a_x < 1e-8);
    assert!(rel(m.p_x.cos[0], 0.0490168560) < 1e-2, "P_x A_1 = {}", m.p_x.cos[0]);
    assert!(rel(m.p_x.sin[0], -0.8643742388) < 1e-2, "P_x B_1 = {}", m.p_x.sin[0]);
    assert!(m.tau_bar > m.tau);
}

#[test]
fn hbr_melnikov_rejects_bad_radius() {
    assert!(build_hbr_melnikov(-0.1, &[1.0], opts()).is_err());
    assert!(build_hbr_melnikov(0.0, &[1.0], opts()).is_err());
}

#[test]
fn duffing_comparison_trends() {
    let w = [1.0];
    let by_r = compare_duffing_maps(&[0.0], &[0.02, 0.05, 0.1, 0.2], &w, 64, opts()).unwrap();
    assert!((by_r[2].alpha - 1.0).abs() < 1e-6);
    assert!(by_r.windows(2).all(|p| p[0].gap < p[1].gap), "{by_r:?}");
    assert!(by_r[0].gap < 0.01);
    // at r = 0.1 the O(r) part of the gap is comparable to the O(gamma) part, so the
    // damping trend is checked where the radius contribution is small
    let rows = compare_duffing_maps(&[0.0, 0.008, 0.08], &[0.02], &w, 64, opts()).unwrap();
    assert!(rows[0].gap < rows[1].gap && rows[1].gap < rows[2].gap, "{rows:?}");
}

#[test]
fn hbr_comparison_trends() {
    let rows = compare_hbr_maps(&[0.0, 1e-3, 0.05, 0.1], 0.1, &standard_frequencies(), 16, opts()).unwrap();
    assert!(rows[0].gap < 1e-3 && rows[0].gap_aligned < 1e-3, "{rows:?}");
    assert!(rows.windows(2).all(|p| p[0].gap_aligned < p[1].gap_aligned), "{rows:?}");
    assert!(rows[1].gap_aligned < 1e-2);
    // the unaligned gap is dominated by the phase drift omega (T*(I) - T*(0))
    assert!(rows[1].gap > 10.0 * rows[1].gap_aligned);
    assert!(rows.windows(2).all(|p| p[0].t_star > p[1].t_star));
    assert!((rows[0].alpha_x - rows[0].a_x).abs() < 1e-6);
}

#[test]
fn duffing_radius_error() {
    let params = DuffingParams::new(0.08, 0.1).unwrap();
    let grid: Vec<f64> = (0..=12).map(|k| 0.001 + 0.05 * k as f64).chain([0.1]).collect();
    let rows = section_radius_error_duffing(params, &grid, 0.001, opts()).unwrap();
    assert_eq!(rows[0].error, 0.0);
    let at = |r: f64| rows.iter().find(|row| (row.r - r).abs() < 1e-12).unwrap().error;
    assert!(at(0.1) < at(0.501), "E(0.1) = {}, E(0.5) = {}", at(0.1), at(0.501));
    // refining the grid near r = 0.1 changes E_T by no more than a few grid spacings
    let fine = section_radius_error_duffing(params, &[0.099, 0.1, 0.101], 0.001, opts()).unwrap();
    assert!((fine[0].error - fine[1].error).abs() < 10.0 * 0.001);
    assert!((fine[2].error - fine[1].error).abs() < 10.0 * 0.001);
}

#[test]
fn hbr_radius_error_reference_is_zero() {
    let rows = section_radius_error_hbr(HbrParams::symmetric(0.1).unwrap(), &[0.01, 0.1], 0.01, opts()).unwrap();
    assert_eq!(rows[0].error, 0.0);
    assert!(rows[1].error.is_finite());
    assert!(section_radius_error_hbr(HbrParams::symmetric(0.0).unwrap(), &[0.1], 0.01, opts()).is_err());
}

#[test]
fn trig_polynomial_is_periodic() {
    let mut p = TrigPolynomial::zero(&[1.0, 2.0]);
    p.constant = 0.5;
    p.cos = vec![1.0, -2.0];
    p.sin = vec![0.25, 3.0];
    let th = [0.3, -1.1];
    assert_eq!(p.eval(&th), p.eval(&th));
    assert!((p.eval(&th) - p.eval(&[0.3 + TAU, -1.1])).abs() < 1e-14);
    assert!((p.eval(&th) - p.eval(&[0.3, -1.1 + TAU])).abs() < 1e-14);
}

#[test]
fn builders_reject_invalid_input() {
    assert!(build_duffing_global_map(0.08, -0.1, &[1.0], BetaChoice::FirstOrder, opts()).is_err());
    assert!(build_duffing_global_map(0.08, 0.1, &[0.0], BetaChoice::FirstOrder, opts()).is_err());
    assert!(build_hbr_global_map(HbrParams::symmetric(0.1).unwrap(), f64::NAN, &[1.0], opts()).is_err());
}
