use proptest::prelude::*;
use sobogeo_core::{
    compose_field, equivariance_residual, flow_one_parameter, grid, transport_identity_residual, CircleDiffeo,
    EquivariantMapHandle, MultiplierSymbol, PeriodicField, Pointwise,
};

const N: usize = 128;

fn sup_diff(a: &CircleDiffeo, b: &CircleDiffeo) -> f64 {
    a.displacement().sub(b.displacement()).unwrap().sup_norm()
}

fn diffeo(n: usize, f: impl Fn(f64) -> f64) -> CircleDiffeo {
    CircleDiffeo::new(PeriodicField::from_scalar_fn(n, f).unwrap()).unwrap()
}

// displacement of the given band with sup |f′| up to `slope`, on the n-point grid
fn diffeo_strategy(band: usize, n: usize, slope: f64) -> impl Strategy<Value = CircleDiffeo> {
    (prop::collection::vec(-1.0f64..1.0, 2 * band + 1), 0.1f64..1.0).prop_map(move |(v, s)| {
        let mut f = PeriodicField::from_real_basis(1, band, &v).unwrap().with_band(n / 2 - 1);
        let peak = f.derivative(1).sup_norm().max(1e-12);
        f = f.scale(slope * s / peak);
        CircleDiffeo::new(f).unwrap()
    })
}

#[test]
fn compose_field_examples() {
    let u = PeriodicField::from_scalar_fn(64, f64::cos).unwrap();
    assert_eq!(compose_field(&u, &CircleDiffeo::identity(31)).unwrap(), u);

    let alpha = 0.8;
    let rotated = compose_field(&u, &CircleDiffeo::rotation(alpha, 31)).unwrap();
    let oracle = PeriodicField::from_scalar_fn(64, |t| (t + alpha).cos()).unwrap();
    assert!(rotated.sub(&oracle).unwrap().sup_norm() < 1e-14);

    let phi = diffeo(64, |t| 0.1 * t.sin());
    let composed = compose_field(&u, &phi).unwrap();
    let fine: Vec<f64> = (0..640).map(|j| 2.0 * std::f64::consts::PI * j as f64 / 640.0).collect();
    let err = composed
        .synthesize(&fine)
        .iter()
        .zip(&fine)
        .fold(0.0f64, |m, (v, t)| m.max((v - (t + 0.1 * t.sin()).cos()).abs()));
    assert!(err <= 1e-8, "{err}");
}

#[test]
fn compose_examples() {
    let phi = diffeo(N, |t| 0.2 * t.sin() + 0.05 * (3.0 * t).cos());
    let id = CircleDiffeo::identity(N / 2 - 1);
    assert!(sup_diff(&phi.compose(&id).unwrap(), &phi) < 1e-12);
    assert!(sup_diff(&id.compose(&phi).unwrap(), &phi) < 1e-12);

    let (a, b) = (0.3, -1.1);
    let ab = CircleDiffeo::rotation(a, 8).compose(&CircleDiffeo::rotation(b, 8)).unwrap();
    assert!(sup_diff(&ab, &CircleDiffeo::rotation(a + b, 8)) < 1e-14);

    let psi = diffeo(N, |t| -0.15 * (2.0 * t).sin());
    let composed = phi.compose(&psi).unwrap();
    let theta = grid(N);
    let oracle = phi.eval(&psi.eval(&theta));
    let values = composed.eval(&theta);
    let err = values.iter().zip(&oracle).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(err <= 1e-9, "{err}");
}

#[test]
fn invert_examples() {
    let id = CircleDiffeo::identity(15);
    assert!(id.invert().unwrap().is_identity());
    let inv = CircleDiffeo::rotation(0.9, 15).invert().unwrap();
    assert!(sup_diff(&inv, &CircleDiffeo::rotation(-0.9, 15)) < 1e-12);
    let phi = diffeo(N, |t| 0.2 * t.sin());
    let round = phi.compose(&phi.invert().unwrap()).unwrap();
    assert!(round.displacement().sup_norm() <= 1e-9);
}

#[test]
fn rejects_folds() {
    let fold = PeriodicField::from_scalar_fn(32, |t| 1.5 * t.sin()).unwrap();
    assert!(CircleDiffeo::new(fold).is_err());
    assert!(CircleDiffeo::new(PeriodicField::zeros(2, 4)).is_err());
}

#[test]
fn flow_examples() {
    let v = PeriodicField::constant(&[0.4], 15);
    let rot = flow_one_parameter(&v, 1.5, 16).unwrap();
    assert!(sup_diff(&rot, &CircleDiffeo::rotation(0.6, 15)) < 1e-13);
    let x = PeriodicField::from_scalar_fn(32, f64::sin).unwrap();
    assert!(flow_one_parameter(&x, 0.0, 10).unwrap().is_identity());
    assert!(flow_one_parameter(&x, 1.0, 0).is_err());
}

#[test]
fn flow_is_fourth_order() {
    let x = PeriodicField::from_scalar_fn(32, f64::sin).unwrap();
    let reference = flow_one_parameter(&x, 0.5, 200).unwrap();
    let e1 = sup_diff(&flow_one_parameter(&x, 0.5, 5).unwrap(), &reference);
    let e2 = sup_diff(&flow_one_parameter(&x, 0.5, 10).unwrap(), &reference);
    let ratio = e1 / e2;
    assert!((12.0..20.0).contains(&ratio), "{e1:e} {e2:e} {ratio}");
}

#[test]
fn flow_property_and_inverse() {
    let x = PeriodicField::from_scalar_fn(N, |t| 0.3 * t.sin() + 0.1 * (2.0 * t).cos()).unwrap();
    let (s, t) = (0.4, 0.7);
    let whole = flow_one_parameter(&x, s + t, 220).unwrap();
    let split = flow_one_parameter(&x, s, 80).unwrap().compose(&flow_one_parameter(&x, t, 140).unwrap()).unwrap();
    assert!(sup_diff(&whole, &split) <= 1e-9);
    let back = flow_one_parameter(&x, -t, 140).unwrap();
    let inv = flow_one_parameter(&x, t, 140).unwrap().invert().unwrap();
    assert!(sup_diff(&back, &inv) <= 1e-9);
}

#[test]
fn pointwise_maps_are_equivariant() {
    let square = Pointwise::new(1, |v: f64| v * v);
    let u = PeriodicField::from_scalar_fn(N, |t| t.cos() + 0.3 * (2.0 * t).sin()).unwrap();
    let phi = diffeo(N, |t| 0.1 * t.sin());
    assert!(equivariance_residual(&square, &u, &phi, 2.0).unwrap() <= 1e-10);
    let rot = CircleDiffeo::rotation(0.37, N / 2 - 1);
    assert!(equivariance_residual(&square, &u, &rot, 2.0).unwrap() <= 1e-10);
    let id = CircleDiffeo::identity(N / 2 - 1);
    assert_eq!(equivariance_residual(&square, &u, &id, 2.0).unwrap(), 0.0);
}

#[test]
fn transport_identity_examples() {
    let w = PeriodicField::from_scalar_fn(64, |t| t.cos() + 0.2 * (3.0 * t).sin()).unwrap();
    let smoothing =
        EquivariantMapHandle::new(1, 1, |u: &PeriodicField| u.apply_multiplier(&MultiplierSymbol::InertiaPower(1), true));
    assert!(transport_identity_residual(&smoothing, &w, 1e-3, 2.0).unwrap() <= 1e-10);

    let cube = Pointwise::new(1, |v: f64| v * v * v);
    let r1 = transport_identity_residual(&cube, &w, 1e-2, 1.0).unwrap();
    let r2 = transport_identity_residual(&cube, &w, 5e-3, 1.0).unwrap();
    let ratio = r1 / r2;
    assert!((3.9..4.1).contains(&ratio), "{r1:e} {r2:e}");
    assert!(transport_identity_residual(&cube, &w, 0.0, 1.0).is_err());
}

fn check_axioms(a: &CircleDiffeo, b: &CircleDiffeo, c: &CircleDiffeo) -> Result<(), TestCaseError> {
    let left = a.compose(b).unwrap().compose(c).unwrap();
    let right = a.compose(&b.compose(c).unwrap()).unwrap();
    prop_assert!(sup_diff(&left, &right) <= 1e-9);
    let id = CircleDiffeo::identity(a.band());
    prop_assert!(sup_diff(&a.compose(&id).unwrap(), a) <= 1e-9);
    let inv = a.invert().unwrap();
    prop_assert!(a.compose(&inv).unwrap().displacement().sup_norm() <= 1e-9);
    prop_assert!(inv.compose(a).unwrap().displacement().sup_norm() <= 1e-9);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn group_axioms(a in diffeo_strategy(2, N, 0.5), b in diffeo_strategy(2, N, 0.5), c in diffeo_strategy(2, N, 0.5)) {
        check_axioms(&a, &b, &c)?;
    }

    // steeper spectra need a finer grid for the inverse to resolve
    #[test]
    fn group_axioms_band_six(a in diffeo_strategy(6, 512, 0.5), b in diffeo_strategy(6, 512, 0.5), c in diffeo_strategy(6, 512, 0.5)) {
        check_axioms(&a, &b, &c)?;
    }

    #[test]
    fn composition_acts_on_fields(a in diffeo_strategy(4, N, 0.5), b in diffeo_strategy(4, N, 0.5)) {
        let u = PeriodicField::from_scalar_fn(N, |t| (t.sin()).exp()).unwrap();
        let stepwise = u.compose_with(&a).unwrap().compose_with(&b).unwrap();
        let at_once = u.compose_with(&a.compose(&b).unwrap()).unwrap();
        prop_assert!(stepwise.sub(&at_once).unwrap().sup_norm() <= 1e-9);
    }
}
