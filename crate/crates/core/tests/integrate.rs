use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sepmap::dynamics::*;
use sepmap::integrate::*;
use sepmap::mapbuild::{build_duffing_global_map, build_hbr_global_map, BetaChoice};
use std::f64::consts::SQRT_2;

fn unforced_duffing() -> DuffingParams {
    DuffingParams::new(0.0, 0.0).unwrap()
}

struct DuffingXy(DuffingParams);

impl Model for DuffingXy {
    fn dim(&self) -> usize {
        2
    }
    fn field(&self, x: &[f64], out: &mut [f64]) {
        let d = duffing_field(&self.0, x[0], x[1], 0.0);
        out[..2].copy_from_slice(&d);
    }
    fn jacobian(&self, x: &[f64], out: &mut [f64]) {
        let j = duffing_jacobian(&self.0, x[0], x[1]);
        out[..2].copy_from_slice(&j[0]);
        out[2..4].copy_from_slice(&j[1]);
    }
    fn forcing_direction(&self, out: &mut [f64]) {
        out[0] = 0.0;
        out[1] = 1.0;
    }
}

#[test]
fn separatrix_flow_closed_form() {
    let m = DuffingXy(unforced_duffing());
    let sys = Extended::new(&m, &[], &[], false);
    let y = integrate_to(&sys, 0.0, &sys.layout.initial(&[SQRT_2, 0.0], &[], 0.0), 1.0, Default::default()).unwrap();
    let c = 1f64.cosh();
    assert!((y[0] - SQRT_2 / c).abs() < 1e-10);
    assert!((y[1] + SQRT_2 * 1f64.sinh() / (c * c)).abs() < 1e-10);
}

#[test]
fn energy_conserved_on_closed_orbits() {
    let m = DuffingXy(unforced_duffing());
    let sys = Extended::new(&m, &[], &[], false);
    // h = -0.1 on the right well: y = 0, x^4/4 - x^2/2 = -0.1
    let x0 = (1.0 + (1.0f64 - 0.4).sqrt()).sqrt();
    let y = integrate_to(&sys, 0.0, &sys.layout.initial(&[x0, 0.0], &[], 0.0), 50.0, Default::default()).unwrap();
    assert!((duffing_hamiltonian(y[0], y[1]) + 0.1).abs() < 1e-9);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let x: f64 = rng.random_range(-1.3..1.3);
        let v: f64 = rng.random_range(-0.5..0.5);
        let h0 = duffing_hamiltonian(x, v);
        let y = integrate_to(&sys, 0.0, &sys.layout.initial(&[x, v], &[], 0.0), 50.0, Default::default()).unwrap();
        assert!((duffing_hamiltonian(y[0], y[1]) - h0).abs() < 1e-9, "from ({x}, {v})");
    }
}

#[test]
fn variational_matrix_matches_finite_differences() {
    let m = DuffingXy(DuffingParams::new(0.08, 0.1).unwrap());
    let f = [1.0, 0.618];
    let sys = Extended::new(&m, &f, &[1.0, 0.7], true);
    let flat = Extended::new(&m, &f, &[1.0, 0.7], false);
    let l = sys.layout;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let o = IntegratorOptions::default();
    for _ in 0..10 {
        let x = [rng.random_range(-1.2..1.2), rng.random_range(-0.6..0.6)];
        let th = [rng.random_range(0.0..6.0), rng.random_range(0.0..6.0)];
        let eps = 0.01;
        let y = integrate_to(&sys, 0.0, &l.initial(&x, &th, eps), 1.0, o).unwrap();
        let mut base = flat.layout.initial(&x, &th, eps);
        let h = 1e-6;
        for col in 0..l.d() {
            base[col] += h;
            let a = integrate_to(&flat, 0.0, &base, 1.0, o).unwrap();
            base[col] -= 2.0 * h;
            let b = integrate_to(&flat, 0.0, &base, 1.0, o).unwrap();
            base[col] += h;
            for row in 0..l.d() {
                let fd = (a[row] - b[row]) / (2.0 * h);
                let v = y[l.phi(row, col)];
                assert!((fd - v).abs() <= 1e-5 * v.abs().max(1.0), "({row},{col}) {fd} vs {v}");
            }
        }
        // angle and eps rows are constant
        for row in 2..l.d() {
            for col in 0..l.d() {
                assert_eq!(y[l.phi(row, col)], if row == col { 1.0 } else { 0.0 });
            }
        }
    }
}

#[test]
fn liouville_and_block_structure() {
    let m = DuffingXy(unforced_duffing());
    let sys = Extended::new(&m, &[1.0], &[1.0], true);
    let l = sys.layout;
    // divergence-free planar flow: the planar block keeps unit determinant
    let y = integrate_to(&sys, 0.0, &l.initial(&[0.8, 0.3], &[0.0], 0.0), 5.0, Default::default()).unwrap();
    let det = y[l.phi(0, 0)] * y[l.phi(1, 1)] - y[l.phi(0, 1)] * y[l.phi(1, 0)];
    assert!((det - 1.0).abs() < 1e-8);
    let sys0 = Extended::new(&m, &[], &[], true);
    let l0 = sys0.layout;
    let y = integrate_to(&sys0, 0.0, &l0.initial(&[0.8, 0.3], &[], 0.0), 5.0, Default::default()).unwrap();
    assert_eq!(y[l0.phi(0, l0.eps())], 0.0);
    assert_eq!(y[l0.phi(1, l0.eps())], 0.0);
}

#[test]
fn angles_advance_linearly() {
    let m = DuffingXy(DuffingParams::new(0.08, 0.1).unwrap());
    let om = [1.0, 0.618_033_988_749_895, 0.730_951_936_469_59];
    let sys = Extended::new(&m, &om, &[1.0; 3], false);
    let t = 37.0;
    let y = integrate_to(&sys, 0.0, &sys.layout.initial(&[0.5, 0.0], &[0.1, 0.2, 0.3], 1e-3), t, Default::default())
        .unwrap();
    for (i, w) in om.iter().enumerate() {
        let th0 = 0.1 * (i + 1) as f64;
        assert!((y[2 + i] - th0 - w * t).abs() < 1e-12 * t);
    }
}

#[test]
fn event_restart_finds_next_crossing() {
    let m = DuffingXy(unforced_duffing());
    let sys = Extended::new(&m, &[], &[], false);
    let o = IntegratorOptions::default();
    let y0 = sys.layout.initial(&[1.2, 0.0], &[], 0.0);
    let (t1, y1) = integrate_to_event(&sys, 0.0, &y0, |_, y| y[1], Crossing::Either, o).unwrap();
    assert!(y1[1].abs() < 1e-12);
    let (t2, y2) = integrate_to_event(&sys, 0.0, &y1, |_, y| y[1], Crossing::Either, o).unwrap();
    assert!(t1 > 0.1 && t2 > 0.1);
    assert!(y2[1].abs() < 1e-12);
    assert!((y2[0] - 1.2).abs() < 1e-10);
}

#[test]
fn published_section_times() {
    let o = IntegratorOptions::default();
    let c = build_duffing_global_map(0.008, 0.1, &[], BetaChoice::FirstOrder, o).unwrap();
    assert!((c.t_star - 7.3752858056).abs() < 1e-9, "{}", c.t_star);
    let c = build_duffing_global_map(0.08, 0.1, &[], BetaChoice::FirstOrder, o).unwrap();
    assert!((c.t_star - 7.3784656185).abs() < 1e-9, "{}", c.t_star);
    let h = build_hbr_global_map(HbrParams::symmetric(0.1).unwrap(), 0.1, &[], o).unwrap();
    assert!((h.t_star - 19.2385452050).abs() < 1e-9, "{}", h.t_star);
}

#[test]
fn escaping_orbit_reports_no_crossing() {
    let m = DuffingXy(unforced_duffing());
    let sys = Extended::new(&m, &[], &[], false);
    let o = IntegratorOptions { t_span_max: 20.0, ..Default::default() };
    let y0 = sys.layout.initial(&[1.0, 0.0], &[], 0.0);
    // the centre is an equilibrium, so x never reaches 2
    let r = integrate_to_event(&sys, 0.0, &y0, |_, y| y[0] - 2.0, Crossing::Rising, o);
    assert!(matches!(r, Err(sepmap::Error::EventNotFound { .. })));
}
