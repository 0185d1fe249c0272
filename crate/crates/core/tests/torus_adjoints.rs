use confdirac::chart::MetricChart;
use confdirac::confpower::lookup;
use confdirac::field::ScalarField;
use confdirac::harness::torus::{operator_adjoint, splitting_adjoint, SplittingAdjoint, TorusGrid};
use confdirac::LabError;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn conformally_flat_torus(p: usize, q: usize, seed: u64) -> MetricChart {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    MetricChart::conformally_flat(p, q, ScalarField::random_trig(p + q, 1, 0.05, true, &mut rng))
}

#[test]
fn quadrature_is_exact_for_band_limited_integrands() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let f = ScalarField::random_trig(3, 2, 1.0, false, &mut rng);
    let g = ScalarField::random_trig(3, 2, 1.0, false, &mut rng);
    let chart = MetricChart::flat(0, 3);
    let pair = |size: usize| {
        TorusGrid::new(&chart, size, 2)
            .unwrap()
            .integrate(2, |_, x| {
                let a = f.jet_at(x, 0).value();
                let b = g.jet_at(x, 0).value();
                Ok(vec![a * b.conj(), a * a.conj()])
            })
            .unwrap()
    };
    let coarse = pair(5);
    for size in [8, 10] {
        let fine = pair(size);
        for (c, d) in coarse.iter().zip(&fine) {
            assert!((c - d).norm() <= 1e-12 * d.norm().max(1.0), "{c} vs {d} at grid {size}");
        }
    }
    assert!(coarse[1].im.abs() < 1e-12 && coarse[1].re > 0.0);
}

#[test]
fn grid_below_nyquist_is_rejected() {
    let chart = conformally_flat_torus(0, 3, 1);
    assert!(
        matches!(TorusGrid::new(&chart, 2, 1), Err(LabError::InvalidConfig { field, .. }) if field == "torus_grid")
    );
    let poly = MetricChart::random_perturbed(0, 3, 0.1, 2, &mut ChaCha8Rng::seed_from_u64(1));
    assert!(matches!(TorusGrid::new(&poly, 8, 1), Err(LabError::InvalidConfig { field, .. }) if field == "chart"));
}

#[test]
fn flat_torus_pairings_do_not_change_when_the_grid_doubles() {
    let chart = MetricChart::flat(0, 3);
    let coarse = TorusGrid::new(&chart, 4, 1).unwrap();
    let fine = TorusGrid::new(&chart, 8, 1).unwrap();
    let a = splitting_adjoint(&coarse, SplittingAdjoint::SpinD, 0, 0.3, 1, 5).unwrap();
    let b = splitting_adjoint(&fine, SplittingAdjoint::SpinD, 0, 0.3, 1, 5).unwrap();
    let close = |x: Complex64, y: Complex64| (x - y).norm() <= 1e-12 * y.norm().max(1.0);
    assert!(close(a.lhs, b.lhs) && close(a.rhs, b.rhs), "{a:?} {b:?}");
    assert!(b.residual <= 1e-12);
}

#[test]
fn splitting_operator_adjoints_on_flat_and_conformally_flat_tori() {
    for (p, q) in [(0, 3), (1, 2)] {
        let flat = TorusGrid::new(&MetricChart::flat(p, q), 8, 1).unwrap();
        let curved = TorusGrid::new(&conformally_flat_torus(p, q, 2), 12, 1).unwrap();
        for which in SplittingAdjoint::ALL {
            let r = splitting_adjoint(&flat, which, 0, 0.3, 1, 9).unwrap();
            assert!(r.residual <= 1e-12, "flat ({p},{q}) {}: {}", which.label(), r.residual);
            let r = splitting_adjoint(&curved, which, 0, 0.3, 1, 9).unwrap();
            assert!(r.residual <= 1e-6, "curved ({p},{q}) {}: {}", which.label(), r.residual);
        }
    }
}

#[test]
fn dirac_is_skew_or_symmetric_by_signature_and_p2s_is_self_adjoint() {
    for (p, q) in [(0, 3), (1, 2)] {
        let torus = TorusGrid::new(&conformally_flat_torus(p, q, 6), 12, 1).unwrap();
        let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
        let r = operator_adjoint(&torus, lookup("dirac").unwrap(), sign, 1, 3).unwrap();
        assert!(r.residual <= 1e-6, "dirac ({p},{q}): {}", r.residual);
        let wrong = operator_adjoint(&torus, lookup("dirac").unwrap(), -sign, 1, 3).unwrap();
        assert!(wrong.residual > 1e-3);
        let r = operator_adjoint(&torus, lookup("P2S").unwrap(), 1.0, 1, 3).unwrap();
        assert!(r.residual <= 1e-6, "P2S ({p},{q}): {}", r.residual);
    }
}
