use laplab::calculus::{GaussianPacket, OperatorSet};
use laplab::linalg::{BandMatrix, C64};
use laplab::model::{builtin_potential, chi, grid_with_spacing, Params};
use laplab::norms::{besov, besov_star};
use laplab::phase::Sign;
use laplab::resolvent::{extrapolate_scalar, BoundaryCondition, FactoredResolvent, SpectralParam};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cutoff_is_a_monotone_partition(t in -1.0f64..3.0, dt in 0.0f64..1.0) {
        let (a, b) = (chi(t), chi(t + dt));
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b <= a);
    }

    #[test]
    fn tridiagonal_solves_have_small_residual(
        diag in prop::collection::vec(3.0f64..6.0, 8..40),
        seed in 0u64..1000,
    ) {
        let n = diag.len();
        let mut m = BandMatrix::zeros(n, 1, 1);
        for i in 0..n {
            let s = ((seed + i as u64) as f64 * 0.77).sin();
            m.set(i, i, C64::new(diag[i], s));
            if i + 1 < n {
                m.set(i, i + 1, C64::new(s, 1.0));
                m.set(i + 1, i, C64::new(-1.0, s));
            }
        }
        let b: Vec<C64> = (0..n).map(|i| C64::new(i as f64, 1.0)).collect();
        let x = m.factor().unwrap().solve(&b);
        let r = m.matvec(&x);
        let worst = r.iter().zip(&b).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(worst < 1e-10);
    }

    #[test]
    fn linear_data_extrapolates_exactly(a in -10.0f64..10.0, b in 0.1f64..5.0, e0 in 0.05f64..1.0, n in 3usize..7) {
        let eps: Vec<f64> = (0..n).map(|j| e0 * 0.5f64.powi(j as i32)).collect();
        let vals: Vec<f64> = eps.iter().map(|e| a + b * e).collect();
        let x = extrapolate_scalar(&eps, &vals).unwrap();
        prop_assert!((x.value - a).abs() < 1e-9 * (1.0 + a.abs()));
    }

    #[test]
    fn besov_norms_are_homogeneous_and_ordered(
        c in -60.0f64..60.0, w in 0.5f64..10.0, k in -2.0f64..2.0, s in 0.01f64..100.0,
    ) {
        let g = grid_with_spacing(1, 128.0, 0.1).unwrap();
        let psi = GaussianPacket::new(c, w, k).sample(&g).values;
        let scaled: Vec<C64> = psi.iter().map(|v| v * s).collect();
        let (bs, b) = (besov_star(&g, &psi), besov(&g, &psi));
        prop_assert!((besov_star(&g, &scaled) - s * bs).abs() <= 1e-10 * s * bs);
        prop_assert!((besov(&g, &scaled) - s * b).abs() <= 1e-10 * s * b);
        let l2 = g.norm(&psi);
        prop_assert!(bs <= l2 * (1.0 + 1e-12) && l2 <= b * (1.0 + 1e-12));
    }

    #[test]
    fn resolvent_norm_is_bounded_by_inverse_distance(lambda in 0.2f64..3.0, eps in 0.01f64..1.0, c in -5.0f64..5.0) {
        let g = grid_with_spacing(1, 32.0, 0.1).unwrap();
        let ops = OperatorSet::new(&g, &builtin_potential("coulomb_like", &Params::new()).unwrap()).unwrap();
        let psi = GaussianPacket::new(c, 1.0, 0.5).sample(&g).values;
        let r = FactoredResolvent::new(&ops.h, &g, SpectralParam::new(lambda, eps, Sign::Plus), BoundaryCondition::Dirichlet).unwrap();
        let u = r.apply(&psi);
        prop_assert!(g.norm(&u) <= g.norm(&psi) / eps * (1.0 + 1e-9));
        prop_assert!(g.inner(&psi, &u).im > 0.0);
    }
}
