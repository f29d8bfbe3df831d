use super::*;
use crate::coefficients::{CoefficientSet, Profile};

fn constant(l: f64, m: usize, q: f64) -> CoefficientSet<f64> {
    CoefficientSet::new(
        l,
        m,
        Profile::constant(1.0),
        Profile::constant(1.0),
        Profile::constant(q),
    )
    .unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

#[test]
fn biharmonic_eigenvalues_are_fourth_powers() {
    let spec = solve_spectrum(&constant(std::f64::consts::PI, 2000, 0.0), 4).unwrap();
    for (n, p) in spec.pairs().iter().enumerate() {
        let exact = ((n + 1) as f64).powi(4);
        assert!(rel(p.lambda, exact) < 1e-3, "n={} {}", n + 1, p.lambda);
    }
}

#[test]
fn unit_interval_first_eigenvalue() {
    let spec = solve_spectrum(&constant(1.0, 400, 0.0), 2).unwrap();
    let exact = std::f64::consts::PI.powi(4);
    assert!(rel(spec.mode(1).lambda, exact) < 1e-4);
}

#[test]
fn potential_adds_n_squared() {
    let spec = solve_spectrum(&constant(std::f64::consts::PI, 2000, 1.0), 2).unwrap();
    assert!(rel(spec.mode(1).lambda, 2.0) < 1e-3);
    assert!(rel(spec.mode(2).lambda, 20.0) < 1e-3);
}

#[test]
fn dense_and_banded_paths_agree() {
    let c = CoefficientSet::new(
        1.0,
        160,
        Profile::affine(1.0, 1.0),
        Profile::sine_perturbed(1.0, 0.1, 2.0 * std::f64::consts::PI),
        Profile::constant(0.5),
    )
    .unwrap();
    let a = solve_spectrum_with(&c, 20, EigenMethod::Banded).unwrap();
    let b = solve_spectrum_with(&c, 20, EigenMethod::Dense).unwrap();
    for (pa, pb) in a.pairs().iter().zip(b.pairs()) {
        assert!(rel(pa.lambda, pb.lambda) < 1e-9, "{} {}", pa.lambda, pb.lambda);
        let d = pa
            .phi
            .iter()
            .zip(&pb.phi)
            .map(|(x, y): (&f64, &f64)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(d < 1e-6, "mode {} differs by {d}", pa.index);
    }
}

#[test]
fn eigenfunctions_are_rho_orthonormal() {
    let c = CoefficientSet::new(
        1.0,
        800,
        Profile::affine(1.0, 1.0),
        Profile::exponential(1.0, 0.5),
        Profile::constant(2.0),
    )
    .unwrap();
    let spec = solve_spectrum(&c, 40).unwrap();
    let op = spec.operator();
    for i in 0..spec.len() {
        for j in 0..=i {
            let g = op.inner_rho(spec.pairs()[i].interior(), spec.pairs()[j].interior());
            let want: f64 = if i == j { 1.0 } else { 0.0 };
            assert!((g - want).abs() < 1e-8, "({i},{j}) = {g}");
        }
    }
}

#[test]
fn eigenvalues_converge_at_second_order() {
    let l = std::f64::consts::PI;
    let err = |m| {
        let s = solve_spectrum(&constant(l, m, 0.0), 3).unwrap();
        rel(s.mode(3).lambda, 81.0)
    };
    let (e1, e2) = (err(200), err(400));
    let order = (e1 / e2).log2();
    assert!((order - 2.0).abs() < 0.1, "order {order}");
}

#[test]
fn weyl_count_tracks_gamma() {
    let c = CoefficientSet::new(
        1.0,
        1000,
        Profile::constant(16.0),
        Profile::constant(1.0),
        Profile::constant(0.0),
    )
    .unwrap();
    let spec = solve_spectrum(&c, 10).unwrap();
    // gamma = 2, so mu_n ~ n pi / 2
    let lam = (20.5 * std::f64::consts::PI / 2.0).powi(4);
    assert_eq!(spec.count_below(lam), 20);
}

#[test]
fn constant_case_traces_and_sign_products() {
    let spec = solve_spectrum(&constant(std::f64::consts::PI, 4000, 0.0), 6).unwrap();
    let c = (2.0 / std::f64::consts::PI).sqrt();
    for p in spec.pairs() {
        let n = p.index as f64;
        let sgn = if p.index % 2 == 0 { 1.0 } else { -1.0 };
        assert!(rel(p.dphi_l, c * n * sgn) < 1e-4, "dphi {}", p.dphi_l);
        assert!(rel(p.tflux_l, -c * n.powi(3) * sgn) < 1e-3, "tflux {}", p.tflux_l);
    }
    let report = check_sign_condition(&spec).unwrap();
    assert!(rel(report.products[0], -2.0 / std::f64::consts::PI) < 1e-3);
}

#[test]
fn trace_limit_constant_case() {
    let spec = solve_spectrum(&constant(std::f64::consts::PI, 2000, 0.0), 30).unwrap();
    let r = check_trace_asymptote(&spec).unwrap();
    assert!(rel(r.limit, (2.0 / std::f64::consts::PI).sqrt()) < 1e-10);
    assert!(r.m_hat > 0.0 && r.big_m_hat < 2.0 * r.limit);
}

#[test]
fn asymptotics_constant_case() {
    let spec = solve_spectrum(&constant(std::f64::consts::PI, 2000, 0.0), 30).unwrap();
    let r = check_asymptotics(&spec).unwrap();
    assert!((r.gaps[0] - 3.0).abs() < 1e-3);
    assert!((r.gap_ratios[20] - 2.0).abs() < 0.1);
    assert!(r.beta > 2.9);
}

#[test]
fn asymptotics_need_ten_modes() {
    let spec = solve_spectrum(&constant(1.0, 200, 0.0), 5).unwrap();
    assert!(matches!(
        check_asymptotics(&spec),
        Err(Error::InvalidArgument(_))
    ));
}

#[test]
fn mode_cap_is_enforced() {
    let c = constant(1.0, 160, 0.0);
    assert!(matches!(
        solve_spectrum(&c, 21),
        Err(Error::TooManyModes { max: 20, .. })
    ));
}

#[test]
fn transform_trivial_without_potential() {
    let c = CoefficientSet::new(
        2.0,
        100,
        Profile::constant(1.0),
        Profile::affine(1.0, 0.5),
        Profile::constant(0.0),
    )
    .unwrap();
    let t = leighton_nehari_transform(&c, Anchor::Left).unwrap();
    assert!(t.h.iter().all(|v: &f64| (*v - 1.0).abs() < 1e-14));
    assert!(t.identity_defect() < 1e-12);
}

#[test]
fn transform_cosh() {
    let c = constant(1.0, 2000, 1.0);
    let t = leighton_nehari_transform(&c, Anchor::Left).unwrap();
    let err = t
        .x
        .iter()
        .zip(&t.h)
        .map(|(x, h): (&f64, &f64)| (x.cosh() - h).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-8);
    assert!((t.s[1000] - 0.5f64.sinh() / 1.0f64.sinh()).abs() < 1e-10);
    assert!(t.is_strictly_increasing());
    assert!((t.s[2000] - 1.0).abs() < 1e-10);
    assert!(t.dh.iter().all(|d| *d >= 0.0));
}

#[test]
fn transform_right_anchor() {
    let c = constant(1.0, 1000, 1.0);
    let t = leighton_nehari_transform(&c, Anchor::Right).unwrap();
    // h = cosh(l - x)
    for (x, h) in t.x.iter().zip(&t.h) {
        assert!(((1.0 - x).cosh() - h).abs() < 1e-9);
    }
    assert!((t.h[1000] - 1.0).abs() < 1e-15);
    assert!(t.dh.iter().all(|d| *d <= 0.0));
    assert!(t.is_strictly_increasing());
    assert!(t.s[0].abs() < 1e-15 && (t.s[1000] - 1.0).abs() < 1e-12);
}

#[test]
fn single_precision_spectrum() {
    let c = CoefficientSet::<f32>::unit(std::f32::consts::PI, 200).unwrap();
    let spec = solve_spectrum(&c, 3).unwrap();
    let l2 = spec.mode(2).lambda;
    assert!(((l2 - 16.0) / 16.0).abs() < 1e-2, "{l2} {:?}", spec.lambdas());
}
