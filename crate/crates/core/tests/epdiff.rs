use std::f64::consts::PI;

use sobogeo_core::epdiff::{
    euler_arnold_integrate, group_exp, group_exp_at, group_log, inner_product, momentum_conservation_residual,
    momentum_residual_trace, EpdiffOptions, GroupLogOptions,
};
use sobogeo_core::{CircleDiffeo, InertiaOperator, MultiplierSymbol, PeriodicField};

fn sup_diff(a: &CircleDiffeo, b: &CircleDiffeo) -> f64 {
    a.displacement().sub(b.displacement()).unwrap().sup_norm()
}

fn opts(steps: usize) -> EpdiffOptions {
    EpdiffOptions { steps, ..Default::default() }
}

#[test]
fn inner_product_examples() {
    let a = InertiaOperator::power(1);
    for k in 1..4 {
        let u = PeriodicField::from_scalar_fn(32, |t| (k as f64 * t).cos()).unwrap();
        let expected = PI * (1.0 + (k * k) as f64);
        assert!((inner_product(&u, &u, &a).unwrap() - expected).abs() < 1e-12 * expected);
    }
    let u = PeriodicField::from_scalar_fn(32, |t| (t.sin()).exp()).unwrap();
    let v = PeriodicField::from_scalar_fn(32, |t| (2.0 * t).cos() - 0.3 * t.sin()).unwrap();
    let l2 = InertiaOperator::new(MultiplierSymbol::BesselPower(0.0)).unwrap();
    assert!((inner_product(&u, &v, &l2).unwrap() - u.sobolev_inner(&v, 0.0).unwrap()).abs() < 1e-14);
    for a in [InertiaOperator::power(2), InertiaOperator::sum(3)] {
        let (uv, vu) = (inner_product(&u, &v, &a).unwrap(), inner_product(&v, &u, &a).unwrap());
        assert!((uv - vu).abs() <= 1e-12 * uv.abs());
    }
    assert!(InertiaOperator::new(MultiplierSymbol::Custom(vec![1.0, -2.0])).is_err());
}

#[test]
fn constant_velocity_is_a_fixed_point() {
    let v = 0.37;
    let u0 = PeriodicField::constant(&[v], 31);
    let g = euler_arnold_integrate(&u0, &InertiaOperator::power(1), &opts(64)).unwrap();
    for (t, (u, phi)) in g.times.iter().zip(g.velocities.iter().zip(&g.flows)) {
        assert!(u.sub(&u0).unwrap().sup_norm() <= 1e-10);
        assert!(sup_diff(phi, &CircleDiffeo::rotation(t * v, 31)) <= 1e-10);
    }
    assert!(momentum_conservation_residual(&g) <= 1e-14);
    assert_eq!(momentum_residual_trace(&g).len(), g.times.len());
}

#[test]
fn zero_velocity_is_stationary() {
    let u0 = PeriodicField::zeros(1, 15);
    let g = euler_arnold_integrate(&u0, &InertiaOperator::power(1), &opts(32)).unwrap();
    assert!(g.flows.iter().all(|phi| phi.displacement().sup_norm() == 0.0));
    assert_eq!(momentum_conservation_residual(&g), 0.0);
}

#[test]
fn conservation_for_a_moderate_wave() {
    let u0 = PeriodicField::from_scalar_fn(128, |t| 0.3 * t.cos()).unwrap();
    let g = euler_arnold_integrate(&u0, &InertiaOperator::power(1), &EpdiffOptions::default()).unwrap();
    let e0 = 0.5 * PI * 2.0 * 0.09;
    assert!((g.energy_trace[0] - e0).abs() < 1e-12);
    assert!(g.relative_energy_drift() <= 1e-6);
    assert!(momentum_conservation_residual(&g) <= 1e-5, "{}", momentum_conservation_residual(&g));
    assert!(g.flows[0].is_identity());
}

#[test]
fn group_exp_examples() {
    let a = InertiaOperator::power(1);
    assert!(group_exp(&PeriodicField::zeros(1, 15), &a, &opts(32)).unwrap().is_identity());
    let t = 1.7;
    let rot = group_exp(&PeriodicField::constant(&[0.4], 15), &a, &EpdiffOptions { time: t, ..opts(32) }).unwrap();
    assert!(sup_diff(&rot, &CircleDiffeo::rotation(0.4 * t, 15)) <= 1e-12);
}

#[test]
fn rotation_identities() {
    let a = InertiaOperator::power(1);
    let o = opts(200);
    let x0 = PeriodicField::from_scalar_fn(128, |t| 0.5 * t.cos()).unwrap();
    let rho = CircleDiffeo::rotation(0.7, 63);
    let x_rho = x0.compose_with(&rho).unwrap();
    let base = group_exp(&x0, &a, &o).unwrap();

    let at_base = group_exp_at(&rho, &x_rho, &a, &o).unwrap();
    assert!(sup_diff(&at_base, &base.compose(&rho).unwrap()) <= 1e-8);

    let conj = rho.invert().unwrap().compose(&base).unwrap().compose(&rho).unwrap();
    assert!(sup_diff(&group_exp(&x_rho, &a, &o).unwrap(), &conj) <= 1e-8);
}

#[test]
fn right_translation_at_a_general_base() {
    let a = InertiaOperator::power(1);
    let o = opts(200);
    let psi = CircleDiffeo::new(PeriodicField::from_scalar_fn(128, |t| 0.1 * t.sin()).unwrap()).unwrap();
    let x0 = PeriodicField::from_scalar_fn(128, |t| 0.3 * t.cos() + 0.1 * (2.0 * t).sin()).unwrap();
    let lhs = group_exp_at(&psi, &x0.compose_with(&psi).unwrap(), &a, &o).unwrap();
    let rhs = group_exp(&x0, &a, &o).unwrap().compose(&psi).unwrap();
    assert!(sup_diff(&lhs, &rhs) <= 1e-8, "{}", sup_diff(&lhs, &rhs));
}

#[test]
fn scaled_velocity_reproduces_intermediate_flows() {
    let a = InertiaOperator::power(1);
    let x0 = PeriodicField::from_scalar_fn(64, |t| 0.4 * t.cos() - 0.1 * (3.0 * t).sin()).unwrap();
    let g = euler_arnold_integrate(&x0, &a, &opts(200)).unwrap();
    for (i, s) in [(50usize, 0.25), (100, 0.5), (150, 0.75)] {
        assert!((g.times[i] - s).abs() < 1e-14);
        let scaled = group_exp(&x0.scale(s), &a, &opts((200.0 * s) as usize)).unwrap();
        assert!(sup_diff(&scaled, &g.flows[i]) <= 1e-6);
    }
}

#[test]
fn flow_is_fourth_order() {
    let a = InertiaOperator::power(1);
    let x0 = PeriodicField::from_scalar_fn(64, |t| 0.5 * t.cos()).unwrap();
    let reference = group_exp(&x0, &a, &opts(640)).unwrap();
    let e1 = sup_diff(&group_exp(&x0, &a, &opts(20)).unwrap(), &reference);
    let e2 = sup_diff(&group_exp(&x0, &a, &opts(40)).unwrap(), &reference);
    let ratio = e1 / e2;
    assert!((16.0 * 0.6..16.0 * 1.4).contains(&ratio), "{e1:e} {e2:e}");
}

#[test]
fn group_log_examples() {
    let a = InertiaOperator::power(1);
    let lo = GroupLogOptions { basis_band: 6, epdiff: opts(100), ..Default::default() };

    let id = group_log(&CircleDiffeo::identity(31), &a, &lo).unwrap();
    assert!(id.converged && id.iterations == 0 && id.u.sup_norm() == 0.0);

    let rot = group_log(&CircleDiffeo::rotation(0.6, 31), &a, &lo).unwrap();
    assert!(rot.converged);
    assert!(rot.u.sub(&PeriodicField::constant(&[0.6], rot.u.band())).unwrap().sup_norm() <= 1e-10);

    let x0 = PeriodicField::from_scalar_fn(64, |t| 0.3 * t.cos()).unwrap();
    let phi1 = group_exp(&x0, &a, &lo.epdiff).unwrap();
    let report = group_log(&phi1, &a, &lo).unwrap();
    assert!(report.converged);
    let err = report.u.sub(&x0).unwrap().sup_norm() / x0.sup_norm();
    assert!(err <= 1e-6, "{err:e}");
    assert!(report.sigma_min > 0.0);
}
