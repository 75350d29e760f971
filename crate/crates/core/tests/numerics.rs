//! Structural properties of the discrete operators, norms, phase, weights and resolvent,
//! checked against closed forms computed here.

use laplab::calculus::{decomposition_residual, dl_identity_residual, quadratic_form, FormRequest, GaussianPacket, OperatorSet, StateVector};
use laplab::linalg::C64;
use laplab::model::{builtin_potential, grid_with_spacing, validate_conditions, Params, PotentialModel, RadialGrid};
use laplab::norms::{besov, besov_star, dyadic_profile, tail_class, TailClass, DEFAULT_TAIL_TOL};
use laplab::phase::{build_phase, e2_decomposition_residual, ricatti_residual, Sign};
use laplab::resolvent::{BoundaryCondition, FactoredResolvent, SpectralParam};
use laplab::stats::Verdict;
use laplab::weights::{validate_h, WeightClass, WeightFn};
use laplab::LabError;

const CONDITION1: [&str; 5] = ["free", "short_range_power", "coulomb_like", "log_borderline", "smooth_well"];

fn pot(name: &str) -> PotentialModel {
    builtin_potential(name, &Params::new()).unwrap()
}

fn ops(name: &str, extent: f64, dx: f64) -> OperatorSet {
    OperatorSet::new(&grid_with_spacing(1, extent, dx).unwrap(), &pot(name)).unwrap()
}

fn packet(g: &RadialGrid, c: f64, w: f64, k: f64) -> Vec<C64> {
    GaussianPacket::new(c, w, k).sample(g).values
}

fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[test]
fn registry_rejects_unknown_names_and_parameters() {
    assert!(matches!(builtin_potential("yukawa", &Params::new()), Err(LabError::Unknown { .. })));
    let mut p = Params::new();
    p.insert("beta".into(), 1.0);
    assert!(matches!(builtin_potential("coulomb_like", &p), Err(LabError::Parameter { .. })));
    let mut p = Params::new();
    p.insert("alpha".into(), 1.0);
    assert!(builtin_potential("short_range_power", &p).is_err());
}

#[test]
fn closed_form_potential_samples() {
    let c = pot("coulomb_like");
    assert!((c.v_lr(4.0) + 0.5).abs() < 1e-15);
    assert!((c.w0(4.0) - 2.0 / 16.0).abs() < 1e-15);
    assert!((c.w0_tail(4.0).unwrap() - 0.5).abs() < 1e-15);
    let f = pot("free");
    for r in [1.0, 3.0, 100.0] {
        assert_eq!(f.v(r), 0.0);
        assert_eq!(f.w0(r), 0.0);
    }
}

#[test]
fn analytic_derivatives_match_central_differences() {
    for name in ["coulomb_like", "log_borderline", "wvn_like", "smooth_well", "short_range_power"] {
        let p = pot(name);
        for r in [1.5, 3.7, 12.0, 90.0, 700.0] {
            let h = 1e-5;
            let fd = (p.v_lr(r + h) - p.v_lr(r - h)) / (2.0 * h);
            let scale = p.dv_lr(r).abs().max(1e-8);
            assert!((fd - p.dv_lr(r)).abs() / scale < 1e-5, "{name} at r = {r}: {fd} vs {}", p.dv_lr(r));
        }
    }
}

#[test]
fn envelope_conditions_of_the_builtins() {
    let g = grid_with_spacing(1, 4096.0, 0.5).unwrap();
    for name in CONDITION1 {
        let rep = validate_conditions(&pot(name), &g, 1e-8).unwrap();
        assert_eq!(rep.verdicts.condition1, Verdict::Pass, "{name}");
    }
    let rep = validate_conditions(&pot("wvn_like"), &g, 1e-8).unwrap();
    assert_eq!(rep.verdicts.condition1, Verdict::Fail);
}

#[test]
fn operators_are_hermitian() {
    let o = ops("coulomb_like", 32.0, 0.1);
    let n = o.grid.len();
    for (name, op) in [("P", &o.p), ("A", &o.a), ("H", &o.h)] {
        assert!(op.band.max_asymmetry(0..n, true) < 1e-12, "{name}");
    }
    let u = packet(&o.grid, 1.0, 1.5, 0.7);
    let v = packet(&o.grid, -2.0, 0.9, -0.4);
    let lhs = o.grid.inner(&o.a.apply(&u), &v);
    let rhs = o.grid.inner(&u, &o.a.apply(&v));
    assert!((lhs - rhs).norm() < 1e-12);
}

#[test]
fn decomposition_identity_is_second_order() {
    for name in CONDITION1 {
        let res: Vec<f64> = [0.1, 0.05, 0.025]
            .iter()
            .map(|&dx| {
                let o = ops(name, 64.0, dx);
                let psi = packet(&o.grid, 2.0, 1.2, 0.8);
                let r = decomposition_residual(&o, &psi);
                assert!(!r.boundary_warning);
                r.value
            })
            .collect();
        for w in res.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!((order - 2.0).abs() < 0.2, "{name}: residuals {res:?}");
        }
    }
}

#[test]
fn double_commutator_identity_converges() {
    let mut prev = f64::INFINITY;
    for dx in [0.1, 0.05, 0.025] {
        let o = ops("free", 64.0, dx);
        let g = &o.grid;
        let f = g.map_r(|r| r.powf(0.5));
        let fp = g.map_r(|r| 0.5 * r.powf(-0.5));
        let psi = packet(g, 3.0, 1.5, 1.0);
        let res = dl_identity_residual(&o, &f, &fp, &psi).unwrap().value;
        println!("double commutator residual at dx = {dx}: {res:.3e}");
        assert!(res < prev);
        prev = res;
    }
    assert!(prev < 1e-3);
}

#[test]
fn forms_reduce_to_norms() {
    let o = ops("free", 32.0, 0.05);
    let psi = packet(&o.grid, 0.0, 1.0, 0.3);
    let one = vec![1.0; psi.len()];
    let m = quadratic_form("mult_form", &o, &FormRequest { f: &one, z: None }, &psi).unwrap();
    assert!((m.re - o.grid.norm(&psi).powi(2)).abs() < 1e-12 && m.im.abs() < 1e-14);
    assert!(matches!(quadratic_form("commutator_form", &o, &FormRequest { f: &one, z: None }, &psi), Err(LabError::Refused(_))));
    assert!(matches!(quadratic_form("nope", &o, &FormRequest { f: &one, z: None }, &psi), Err(LabError::Unknown { .. })));
}

#[test]
fn besov_norms_of_a_single_shell() {
    let g = grid_with_spacing(1, 256.0, 0.05).unwrap();
    // supported where 8 <= r < 16, i.e. in the fourth shell
    let psi: Vec<C64> = g.r.iter().map(|&r| if (8.0..16.0).contains(&r) { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }).collect();
    let l2 = g.norm(&psi);
    let p = dyadic_profile(&g, &psi).unwrap();
    assert!((p.besov - 4.0 * l2).abs() < 1e-12);
    assert!((p.besov_star - l2 / 4.0).abs() < 1e-12);
    assert!((p.block_norms[3] - l2).abs() < 1e-12);
}

#[test]
fn besov_inequalities_and_scaling() {
    let g = grid_with_spacing(1, 512.0, 0.1).unwrap();
    for (c, w) in [(0.0, 1.0), (20.0, 5.0), (-100.0, 30.0)] {
        let psi = packet(&g, c, w, 0.5);
        let (b, bs, l2) = (besov(&g, &psi), besov_star(&g, &psi), g.norm(&psi));
        assert!(bs <= l2 * (1.0 + 1e-12) && l2 <= b * (1.0 + 1e-12));
        assert!(l2 * l2 <= b * bs * (1.0 + 1e-12));
        let scaled: Vec<C64> = psi.iter().map(|v| v * C64::new(0.0, -3.0)).collect();
        assert!((besov_star(&g, &scaled) - 3.0 * bs).abs() < 1e-12 * bs.max(1.0));
    }
    assert!(matches!(dyadic_profile(&grid_with_spacing(1, 1.5, 0.1).unwrap(), &vec![C64::new(0.0, 0.0); 31]), Err(LabError::Grid(_))));
}

#[test]
fn tail_classes_of_model_profiles() {
    let g = grid_with_spacing(1, 8192.0, 0.25).unwrap();
    let cases: [(f64, TailClass); 3] = [(-1.0, TailClass::BStar0), (0.0, TailClass::BStarOnly), (0.5, TailClass::Unbounded)];
    for (s, expected) in cases {
        let psi: Vec<C64> = g.r.iter().map(|&r| C64::from_polar(r.powf(s), r)).collect();
        let (class, slope) = tail_class(&dyadic_profile(&g, &psi).unwrap(), DEFAULT_TAIL_TOL).unwrap();
        assert_eq!(class, expected, "r^{s}: slope {slope}");
    }
}

#[test]
fn phase_squares_to_the_energy_outside_the_cutoff() {
    for name in ["free", "coulomb_like", "log_borderline"] {
        let p = pot(name);
        let g = grid_with_spacing(1, 1024.0, 0.5).unwrap();
        let z = C64::new(1.0, 0.01);
        let ph = build_phase(&p, &g, z, Sign::Plus).unwrap();
        for i in g.radial_indices() {
            let r = g.r[i];
            if ph.eta[i] == 1.0 {
                assert!((ph.a[i] * ph.a[i] - (z - p.v_lr(r))).norm() < 1e-12, "{name} at r = {r}");
                assert!(ph.a[i].im > 0.0);
            }
        }
        let minus = build_phase(&p, &g, z.conj(), Sign::Minus).unwrap();
        let worst = ph.a.iter().zip(&minus.a).map(|(a, b)| (a.conj() + b).norm()).fold(0.0, f64::max);
        assert!(worst < 1e-12);
        let fit = ricatti_residual(&ph, &p, &g).fitted_c;
        assert!(fit.is_finite() && fit < 10.0, "{name}: fitted constant {fit}");
    }
    let g = grid_with_spacing(1, 64.0, 0.5).unwrap();
    assert!(matches!(build_phase(&pot("free"), &g, C64::new(1.0, 0.1), Sign::Minus), Err(LabError::Refused(_))));
    assert!(build_phase(&pot("free"), &g, C64::new(-1.0, 0.1), Sign::Plus).is_err());
}

#[test]
fn grid_matched_phase_approaches_the_continuum() {
    let g = grid_with_spacing(1, 64.0, 0.5).unwrap();
    let ph = build_phase(&pot("free"), &g, C64::new(2.0, 0.0), Sign::Plus).unwrap();
    let mut prev = f64::INFINITY;
    for dx in [0.4, 0.2, 0.1, 0.05] {
        let d = max_diff(&ph.grid_matched(dx), &ph.a);
        assert!(d < prev);
        prev = d;
    }
    // a (1 - D^2 a^2 / 8) to leading order: 2^1.5 * 0.05^2 / 8
    assert!((prev - 2f64.powf(1.5) * 0.0025 / 8.0).abs() < 1e-5);
}

#[test]
fn factored_decomposition_residual_is_small() {
    let o = ops("coulomb_like", 128.0, 0.05);
    let ph = build_phase(&o.potential, &o.grid, C64::new(1.0, 0.05), Sign::Plus).unwrap();
    let psi = packet(&o.grid, 40.0, 4.0, 1.0);
    let res = e2_decomposition_residual(&o, &ph, &psi).unwrap();
    println!("factored decomposition residual {:.3e}", res.value);
    assert!(res.value < 1e-2);
}

#[test]
fn weight_validation() {
    let free_w0 = |_: f64| 0.0;
    let ok = validate_h(&WeightFn::power(0.5, WeightClass::HClass, 1024.0), &free_w0, 0.75).unwrap();
    assert_eq!(ok.verdict, Verdict::Pass);
    let steep = validate_h(&WeightFn::power(0.9, WeightClass::HClass, 1024.0), &free_w0, 0.75).unwrap();
    assert_eq!(steep.pointwise, Verdict::Fail);
    assert_eq!(steep.verdict, Verdict::Fail);
    let b1 = validate_h(&WeightFn::power(0.5, WeightClass::HClass, 1024.0), &free_w0, 1.0).unwrap();
    assert_eq!(b1.beta0_below_one, Verdict::Fail);
    let decreasing = validate_h(&WeightFn::power(-0.2, WeightClass::HClass, 1024.0), &free_w0, 0.75).unwrap();
    assert_eq!(decreasing.pointwise, Verdict::Fail);
    // W0 = r^-2: h = r^0.25 leaves r^-1.5, h = r^0.5 leaves exactly 1/r
    let w0 = |r: f64| r.powi(-2);
    let mild = validate_h(&WeightFn::power(0.25, WeightClass::HClass, 4096.0), &w0, 0.75).unwrap();
    assert_eq!((mild.h2w0_little_o, mild.h2w0_integrable), (Verdict::Pass, Verdict::Pass));
    let edge = validate_h(&WeightFn::power(0.5, WeightClass::HClass, 4096.0), &w0, 0.75).unwrap();
    assert_eq!((edge.h2w0_little_o, edge.h2w0_integrable), (Verdict::Fail, Verdict::Fail));
}

#[test]
fn weight_samples_match_their_formula() {
    let w = WeightFn::shifted_power(1.0, -1.4, WeightClass::WClass, 512.0);
    for r in [1.0, 2.5, 17.0, 300.0] {
        let (v, d) = w.eval(r);
        assert!((v - (1.0 + r).powf(-1.4)).abs() < 1e-6 * v);
        assert!((d - (-1.4) * (1.0 + r).powf(-2.4)).abs() < 1e-5 * d.abs());
    }
}

fn resolvent(o: &OperatorSet, lambda: f64, eps: f64) -> FactoredResolvent {
    FactoredResolvent::new(&o.h, &o.grid, SpectralParam::new(lambda, eps, Sign::Plus), BoundaryCondition::Dirichlet).unwrap()
}

#[test]
fn resolvent_adjoint_and_first_identity() {
    let o = ops("coulomb_like", 64.0, 0.05);
    let g = &o.grid;
    let psi = packet(g, 1.0, 1.0, 0.5);
    let phi = packet(g, -3.0, 2.0, -1.0);
    let r1 = resolvent(&o, 1.0, 0.1);
    let r1_bar = FactoredResolvent::new(&o.h, g, SpectralParam::new(1.0, 0.1, Sign::Minus), BoundaryCondition::Dirichlet).unwrap();
    // <R(z) psi, phi> = <psi, R(conj z) phi>
    let lhs = g.inner(&r1.apply(&psi), &phi);
    let rhs = g.inner(&psi, &r1_bar.apply(&phi));
    assert!((lhs - rhs).norm() < 1e-10 * lhs.norm().max(1.0));
    // R(z) - R(w) = (z - w) R(z) R(w)
    let r2 = resolvent(&o, 1.7, 0.3);
    let z = C64::new(1.0, 0.1);
    let w = C64::new(1.7, 0.3);
    let left: Vec<C64> = r1.apply(&psi).iter().zip(r2.apply(&psi)).map(|(a, b)| a - b).collect();
    let right: Vec<C64> = r1.apply(&r2.apply(&psi)).iter().map(|v| (z - w) * v).collect();
    assert!(max_diff(&left, &right) < 1e-9);
}

#[test]
fn resolvent_bound_and_imaginary_sign() {
    for name in CONDITION1 {
        let o = ops(name, 64.0, 0.05);
        let g = &o.grid;
        for eps in [0.5, 0.05] {
            let psi = packet(g, 2.0, 1.5, 0.4);
            let r = resolvent(&o, 1.3, eps);
            let u = r.apply(&psi);
            assert!(g.norm(&u) <= g.norm(&psi) / eps * (1.0 + 1e-10), "{name}");
            // Im <psi, R psi> = eps ||R psi||^2 > 0
            let im = g.inner(&psi, &u).im;
            assert!(im > 0.0 && (im - eps * g.norm(&u).powi(2)).abs() < 1e-8 * im, "{name}");
        }
    }
}

#[test]
fn resolvent_of_zero_is_zero_and_linear() {
    let o = ops("free", 32.0, 0.1);
    let r = resolvent(&o, 1.0, 0.2);
    let zero = vec![C64::new(0.0, 0.0); o.grid.len()];
    assert!(r.apply(&zero).iter().all(|v| *v == C64::new(0.0, 0.0)));
    let psi = StateVector::from_fn(&o.grid, |x| C64::new((-x * x).exp(), 0.0)).values;
    let s = C64::new(2.0, -1.0);
    let scaled: Vec<C64> = psi.iter().map(|v| s * v).collect();
    let a: Vec<C64> = r.apply(&psi).iter().map(|v| s * v).collect();
    assert!(max_diff(&a, &r.apply(&scaled)) < 1e-12);
}
