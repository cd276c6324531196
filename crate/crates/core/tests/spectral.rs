use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use sobogeo_core::{grid, MultiplierSymbol, PeriodicField};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn power_law(band: usize, s: f64) -> PeriodicField {
    let mut coeffs = vec![Complex64::new(0.0, 0.0); band + 1];
    for (k, c) in coeffs.iter_mut().enumerate().skip(1) {
        *c = Complex64::new((k as f64).powf(-s), 0.0);
    }
    PeriodicField::from_coeffs(1, band, coeffs).unwrap()
}

// band-limited random field with mild decay so high q stays well scaled
fn field_strategy() -> impl Strategy<Value = PeriodicField> {
    (1usize..3, 1usize..24).prop_flat_map(|(dim, band)| {
        prop::collection::vec(-1.0f64..1.0, dim * (2 * band + 1)).prop_map(move |mut v| {
            let nb = 2 * band + 1;
            for (i, x) in v.iter_mut().enumerate() {
                let k = (i % nb).div_ceil(2);
                *x /= 1.0 + (k * k) as f64;
            }
            PeriodicField::from_real_basis(dim, band, &v).unwrap()
        })
    })
}

#[test]
fn analyze_matches_brute_force_dft() {
    let n = 16;
    let samples: Vec<f64> = grid(n).iter().map(|t| (3.0 * t).sin()).collect();
    let u = PeriodicField::analyze(&samples, 1).unwrap();
    assert_eq!(u.band(), 7);
    for k in -7i64..=7 {
        let mut oracle = Complex64::new(0.0, 0.0);
        for (j, t) in grid(n).iter().enumerate() {
            oracle += samples[j] * Complex64::from_polar(1.0, -(k as f64) * t);
        }
        oracle /= n as f64;
        assert!((u.coeff(k, 0) - oracle).norm() < 1e-14, "k = {k}");
    }
    assert!((u.coeff(3, 0) - Complex64::new(0.0, -0.5)).norm() < 1e-14);
    assert!((u.coeff(-3, 0) - Complex64::new(0.0, 0.5)).norm() < 1e-14);
}

#[test]
fn synthesize_off_grid() {
    let u = PeriodicField::from_scalar_fn(16, |t| (2.0 * t).cos()).unwrap();
    let v = u.synthesize(&[0.7])[0];
    assert!((v - 1.4f64.cos()).abs() < 1e-14);
    assert!((v - 0.169967).abs() < 1e-6);
}

#[test]
fn second_derivative_of_cos3() {
    let u = PeriodicField::from_scalar_fn(32, |t| (3.0 * t).cos()).unwrap();
    let d2 = u.derivative(2);
    let oracle = PeriodicField::from_scalar_fn(32, |t| -9.0 * (3.0 * t).cos()).unwrap();
    assert!(d2.sub(&oracle).unwrap().sup_norm() < 1e-12);
}

#[test]
fn derivative_agrees_with_fourth_order_differences() {
    let f = |t: f64| (t).cos() + 0.5 * (2.0 * t).sin() - 0.2 * (4.0 * t).cos();
    let errors: Vec<f64> = [32usize, 64, 128]
        .iter()
        .map(|&n| {
            let u = PeriodicField::from_scalar_fn(n, f).unwrap();
            let exact = u.derivative(1).samples();
            let s = u.samples();
            let h = 2.0 * PI / n as f64;
            (0..n)
                .map(|j| {
                    let at = |o: i64| s[((j as i64 + o).rem_euclid(n as i64)) as usize];
                    let fd = (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) / (12.0 * h);
                    (fd - exact[j]).abs()
                })
                .fold(0.0, f64::max)
        })
        .collect();
    for w in errors.windows(2) {
        let ratio = w[0] / w[1];
        assert!((12.0..20.0).contains(&ratio), "{errors:?}");
    }
}

#[test]
fn sobolev_inner_closed_forms() {
    for k in 1..5 {
        let u = PeriodicField::from_scalar_fn(32, |t| (k as f64 * t).cos()).unwrap();
        for q in [0.0, 1.0, 2.5] {
            let expected = PI * (1.0 + (k * k) as f64).powf(q);
            assert!(rel(u.sobolev_inner(&u, q).unwrap(), expected) < 1e-12);
        }
    }
    let a = PeriodicField::from_scalar_fn(32, |t| (2.0 * t).cos()).unwrap();
    let b = PeriodicField::from_scalar_fn(32, |t| (3.0 * t).sin()).unwrap();
    assert!(a.sobolev_inner(&b, 2.0).unwrap().abs() < 1e-13);
    let c = PeriodicField::constant(&[1.5, -0.5], 8);
    assert!(rel(c.sobolev_inner(&c, 3.0).unwrap(), 2.0 * PI * 2.5) < 1e-14);
    assert!(c.sobolev_inner(&a, 0.0).is_err());
}

#[test]
fn l2_pairing_matches_quadrature() {
    let u = PeriodicField::from_scalar_fn(64, |t| (t.sin()).exp()).unwrap();
    let v = PeriodicField::from_scalar_fn(64, |t| 1.0 / (2.0 + t.cos())).unwrap();
    let (su, sv) = (u.samples_on(256), v.samples_on(256));
    let quad: f64 = su.iter().zip(&sv).map(|(a, b)| a * b).sum::<f64>() * 2.0 * PI / 256.0;
    assert!(rel(u.sobolev_inner(&v, 0.0).unwrap(), quad) < 1e-12);
}

#[test]
fn multiplier_examples() {
    let u = PeriodicField::from_scalar_fn(32, |t| (3.0 * t).cos() + 0.2).unwrap();
    let id = u.apply_multiplier(&MultiplierSymbol::BesselPower(0.0), false).unwrap();
    assert!(id.sub(&u).unwrap().sup_norm() < 1e-15);
    let c = PeriodicField::from_scalar_fn(32, |t| (3.0 * t).cos()).unwrap();
    let a = c.apply_multiplier(&MultiplierSymbol::InertiaPower(2), false).unwrap();
    assert!(a.sub(&c.scale(100.0)).unwrap().sup_norm() < 1e-12 * 100.0);
    let s = c.apply_multiplier(&MultiplierSymbol::InertiaSum(2), false).unwrap();
    assert!(s.sub(&c.scale(82.0)).unwrap().sup_norm() < 1e-12 * 82.0);
    let bad = MultiplierSymbol::Custom(vec![1.0, 0.0, 2.0]);
    assert!(PeriodicField::zeros(1, 2).apply_multiplier(&bad, false).is_err());
}

#[test]
fn decay_exponent_examples() {
    let s2 = power_law(128, 2.0).decay_exponent(4).unwrap();
    assert!((s2 - 2.0).abs() <= 0.1, "{s2}");
    let s4 = power_law(128, 4.0).decay_exponent(4).unwrap();
    assert!((s4 - 4.0).abs() <= 0.2, "{s4}");
    let s3 = power_law(128, 3.0).decay_exponent(4).unwrap();
    assert!((s3 - 3.0).abs() <= 0.15, "{s3}");
    let cos = PeriodicField::from_scalar_fn(64, f64::cos).unwrap();
    assert_eq!(cos.decay_exponent(4).unwrap(), f64::INFINITY);
    assert!(cos.decay_exponent(3).is_err());
    assert!(PeriodicField::zeros(1, 6).decay_exponent(4).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norm_decomposition_identity(u in field_strategy(), q in 0.5f64..4.0) {
        let lhs = u.sobolev_norm_sq(q).unwrap();
        let rhs = u.sobolev_norm_sq(q - 1.0).unwrap() + u.derivative(1).sobolev_norm_sq(q - 1.0).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.max(1e-300));
    }

    #[test]
    fn norm_is_monotone_in_q(u in field_strategy(), q in -1.0f64..3.0, dq in 0.0f64..2.0) {
        prop_assert!(u.sobolev_norm_sq(q + dq).unwrap() >= u.sobolev_norm_sq(q).unwrap() * (1.0 - 1e-14));
    }

    #[test]
    fn grid_roundtrips(u in field_strategy()) {
        let samples = u.samples();
        let back = PeriodicField::analyze(&samples, u.dim()).unwrap();
        let scale = 1.0 + u.max_coeff_amplitude();
        prop_assert_eq!(back.band(), u.band());
        prop_assert!(back.sub(&u).unwrap().max_coeff_amplitude() <= 1e-12 * scale);
        let again = back.samples();
        let err = samples.iter().zip(&again).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        prop_assert!(err <= 1e-12 * scale);
        let pts = grid(u.grid_size());
        let off = u.synthesize(&pts);
        let err = samples.iter().zip(&off).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        prop_assert!(err <= 1e-12 * scale);
    }

    #[test]
    fn multiplier_roundtrip(u in field_strategy(), n in 1u32..4, q in -2.0f64..3.0) {
        for sym in [MultiplierSymbol::InertiaPower(n), MultiplierSymbol::InertiaSum(n), MultiplierSymbol::BesselPower(q)] {
            let back = u.apply_multiplier(&sym, false).unwrap().apply_multiplier(&sym, true).unwrap();
            prop_assert!(back.sub(&u).unwrap().max_coeff_amplitude() <= 1e-12 * u.max_coeff_amplitude().max(1e-300));
        }
    }

    #[test]
    fn real_basis_roundtrip(u in field_strategy()) {
        let v = PeriodicField::from_real_basis(u.dim(), u.band(), &u.to_real_basis(u.band())).unwrap();
        prop_assert!(v.sub(&u).unwrap().max_coeff_amplitude() <= 1e-15);
    }
}
