mod common;

use common::*;
use laplab::calculus::{OperatorSet, StateVector};
use laplab::linalg::C64;
use laplab::model::{builtin_potential, grid_with_spacing, Params};
use laplab::phase::Sign;
use laplab::resolvent::{solve, BoundaryCondition, SpectralParam};
use laplab::sommerfeld::{solve_radiation_bc, RadiationOptions};

fn free_ops(extent: f64, dx: f64) -> OperatorSet {
    let g = grid_with_spacing(1, extent, dx).unwrap();
    let pot = builtin_potential("free", &Params::new()).unwrap();
    OperatorSet::new(&g, &pot).unwrap()
}

fn check_dirichlet(z: SpectralParam, dx: f64, extent: f64) -> f64 {
    let ops = free_ops(extent, dx);
    let g = &ops.grid;
    let psi_f = gaussian(0.5, 0.7, 0.3);
    let psi = StateVector::from_fn(g, &psi_f);
    let res = solve(&ops.h, g, z, &psi.values, BoundaryCondition::Dirichlet).unwrap();
    assert!(!res.failed, "{:?}", res.note);
    let k = decaying_root(z.z());
    let idx: Vec<usize> = (0..g.len()).filter(|&i| g.samples[i].abs() <= 16.0).collect();
    let reference: Vec<C64> = idx.iter().map(|&i| free_convolution(k, &psi_f, -8.0, 9.0, g.samples[i], 4000)).collect();
    let u: Vec<C64> = idx.iter().map(|&i| res.u.values[i]).collect();
    rel_err(&u, &reference, |_| true)
}

#[test]
fn dirichlet_solve_matches_free_kernel() {
    let e1 = check_dirichlet(SpectralParam::new(1.0, 0.5, Sign::Plus), 0.02, 128.0);
    let e2 = check_dirichlet(SpectralParam::new(2.0, 0.01, Sign::Plus), 0.02, 2048.0);
    println!("free kernel errors {e1:.3e} {e2:.3e}");
    assert!(e1 < 1e-3 && e2 < 1e-3);
}

#[test]
fn lower_branch_is_conjugate_for_real_data() {
    let ops = free_ops(64.0, 0.05);
    let g = &ops.grid;
    let psi = StateVector::from_fn(g, |x| C64::new((-x * x).exp(), 0.0));
    let up = solve(&ops.h, g, SpectralParam::new(1.5, 0.3, Sign::Plus), &psi.values, BoundaryCondition::Dirichlet).unwrap();
    let um = solve(&ops.h, g, SpectralParam::new(1.5, 0.3, Sign::Minus), &psi.values, BoundaryCondition::Dirichlet).unwrap();
    let worst = up.u.values.iter().zip(&um.u.values).map(|(a, b)| (a.conj() - b).norm()).fold(0.0, f64::max);
    assert!(worst < 1e-12);
}

#[test]
fn radiation_closure_reproduces_outgoing_kernel() {
    let ops = free_ops(64.0, 0.02);
    let g = &ops.grid;
    let psi_f = gaussian(0.0, 0.6, 0.0);
    let psi = StateVector::from_fn(g, &psi_f);
    for lambda in [1.0, 2.0] {
        let r = solve_radiation_bc(&ops, lambda, Sign::Plus, &psi.values, &RadiationOptions::default()).unwrap();
        assert!(!r.result.failed);
        assert!(r.flux_sign_ok && r.flux_right > 0.0);
        let k = C64::new(lambda.sqrt(), 0.0);
        let reference: Vec<C64> = g.samples.iter().map(|&x| free_convolution(k, &psi_f, -7.0, 7.0, x, 3000)).collect();
        let e = rel_err(&r.result.u.values, &reference, |i| g.samples[i].abs() <= 16.0);
        println!("lambda {lambda}: outgoing error {e:.3e}, u'/u = {}", r.boundary_log_derivative);
        assert!(e < 1e-3);
    }
}
