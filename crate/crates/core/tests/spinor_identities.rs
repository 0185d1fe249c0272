#![allow(clippy::needless_range_loop)]

use confdirac::bundle::{relative_residual, sub_sections, Section};
use confdirac::chart::MetricChart;
use confdirac::field::ScalarField;
use confdirac::jet::Jet;
use confdirac::spinor::{random_spinor_fields, SpinGeometry};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn charts(rng: &mut ChaCha8Rng) -> Vec<MetricChart> {
    vec![
        MetricChart::sphere(0, 3, 1.3),
        MetricChart::random_perturbed(0, 3, 0.15, 3, rng),
        MetricChart::random_perturbed(1, 2, 0.15, 3, rng),
        MetricChart::conformally_flat(1, 3, ScalarField::random_real_polynomial(4, 3, 0.3, rng)),
    ]
}

fn point(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-0.3..0.3)).collect()
}

fn spinor(geo: &SpinGeometry, order: usize, rng: &mut ChaCha8Rng) -> Section {
    let f = random_spinor_fields(geo.dim(), geo.n(), 4, rng);
    geo.spinor_from_fields(&f, order).unwrap()
}

#[test]
fn frame_is_orthonormal_to_all_orders() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for chart in charts(&mut rng) {
        let x0 = point(chart.n(), &mut rng);
        let geo = SpinGeometry::new(&chart, &x0, 4).unwrap();
        let n = geo.n();
        for i in 0..n {
            for j in 0..n {
                let mut acc = Jet::zero(n, 4);
                for a in 0..n {
                    for b in 0..n {
                        let t = geo.pack.g.get(&[a, b]).mul_min(&geo.frame.a[i][a]);
                        acc.fma_assign(&t, &geo.frame.a[j][b]).unwrap();
                    }
                }
                let target = if i == j { geo.frame.eps[i] } else { 0.0 };
                assert!(acc.add_constant(-target).max_abs() < 1e-12);
            }
        }
    }
}

#[test]
fn spin_connection_coefficients_are_antisymmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for chart in charts(&mut rng) {
        let geo = SpinGeometry::new(&chart, &point(chart.n(), &mut rng), 4).unwrap();
        let n = geo.n();
        for mu in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let s = geo.omega.get(&[mu, i, j]).add_min(geo.omega.get(&[mu, j, i]));
                    assert!(s.max_abs() < 1e-11, "{}", s.max_abs());
                }
            }
        }
    }
}

#[test]
fn bochner_formula_and_laplacian_routes() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for chart in charts(&mut rng) {
        let geo = SpinGeometry::new(&chart, &point(chart.n(), &mut rng), 5).unwrap();
        let psi = spinor(&geo, 5, &mut rng);
        let lap = geo.laplacian(&psi).unwrap();
        let lap2 = geo.conn.laplacian_coordinate(&geo.pack, &psi).unwrap();
        let lap3 = geo.laplacian_frame(&psi).unwrap();
        assert!(relative_residual(&lap, &lap2) < 1e-11);
        assert!(relative_residual(&lap, &lap3) < 1e-11);
        let d2 = geo.dirac_pow(&psi, 2).unwrap();
        let tau4: Vec<Jet> = psi.iter().map(|c| c.mul_min(&geo.pack.scalar).scale(0.25)).collect();
        let rhs = sub_sections(&tau4, &lap);
        let r = relative_residual(&d2, &rhs);
        assert!(r < 1e-10, "Bochner residual {r}");
    }
}

#[test]
fn spin_curvature_is_half_riemann_two_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for chart in charts(&mut rng) {
        let geo = SpinGeometry::new(&chart, &point(chart.n(), &mut rng), 4).unwrap();
        let psi = spinor(&geo, 4, &mut rng);
        for (mu, nu) in [(0, 1), (1, 2), (0, 2)] {
            let lhs = geo.conn.curvature_on(&psi, mu, nu).unwrap();
            let rhs = geo.half_curvature_action(mu, nu, &psi).unwrap();
            let r = relative_residual(&lhs, &rhs);
            assert!(r < 1e-10, "curvature residual {r}");
        }
    }
}

#[test]
fn contracted_curvature_is_half_ricci() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for chart in charts(&mut rng) {
        let geo = SpinGeometry::new(&chart, &point(chart.n(), &mut rng), 4).unwrap();
        let psi = spinor(&geo, 4, &mut rng);
        for mu in 0..geo.n() {
            let lhs = geo.contracted_curvature(mu, &psi).unwrap();
            let ric: Vec<Jet> = geo.ricci_action(mu, &psi).iter().map(|c| c.scale(0.5)).collect();
            let r = relative_residual(&lhs, &ric);
            assert!(r < 1e-10, "contracted curvature residual {r}");
        }
    }
}

#[test]
fn clifford_skew_symmetry_and_metricity() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for chart in charts(&mut rng) {
        let geo = SpinGeometry::new(&chart, &point(chart.n(), &mut rng), 4).unwrap();
        let n = geo.n();
        let psi = spinor(&geo, 3, &mut rng);
        let phi = spinor(&geo, 3, &mut rng);
        let x: Vec<Jet> = (0..n)
            .map(|_| ScalarField::random_real_polynomial(n, 3, 1.0, &mut rng).jet_at(&geo.x0, 3))
            .collect();
        let a = geo.product(&geo.clifford_vector(&x, &psi), &phi);
        let b = geo
            .product(&psi, &geo.clifford_vector(&x, &phi))
            .scale(geo.rep.sign_p());
        assert!(a.add_min(&b).max_abs() < 1e-12 * a.max_abs().max(1.0));
        for mu in 0..n {
            let lhs = geo.product(&psi, &phi).partial(mu).unwrap();
            let rhs = geo
                .product(&geo.cov(&psi, mu).unwrap(), &phi)
                .add_min(&geo.product(&psi, &geo.cov(&phi, mu).unwrap()));
            assert!(lhs.sub_min(&rhs).max_abs() < 1e-11 * lhs.max_abs().max(1.0));
        }
    }
}

#[test]
fn brackets_agree_with_their_definitions() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for chart in charts(&mut rng) {
        let geo = SpinGeometry::new(&chart, &point(chart.n(), &mut rng), 5).unwrap();
        let psi = spinor(&geo, 4, &mut rng);
        let g = geo.pack.g.clone();
        let dpsi = geo.dirac(&psi).unwrap();
        assert!(relative_residual(&geo.bracket_t_nabla(&g, &psi).unwrap(), &dpsi) < 1e-11);
        let avg: Vec<Jet> = geo
            .bracket_t_nabla(&g, &psi)
            .unwrap()
            .iter()
            .zip(geo.bracket_nabla_t(&g, &psi).unwrap())
            .map(|(a, b)| a.add_min(&b).scale(0.5))
            .collect();
        assert!(relative_residual(&avg, &dpsi) < 1e-11);
        let p = geo.pack.schouten.clone();
        let a = geo.bracket_t_nabla(&p, &psi).unwrap();
        let b = geo.bracket_t_nabla_frame(&p, &psi).unwrap();
        assert!(relative_residual(&a, &b) < 1e-11);
        let c = geo.bracket_nabla_t(&p, &psi).unwrap();
        let d = geo.bracket_nabla_t_direct(&p, &psi).unwrap();
        assert!(relative_residual(&c, &d) < 1e-10);
    }
}

#[test]
fn dirac_commutator_with_functions_and_leibniz() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for chart in charts(&mut rng) {
        let geo = SpinGeometry::new(&chart, &point(chart.n(), &mut rng), 4).unwrap();
        let n = geo.n();
        let psi = spinor(&geo, 4, &mut rng);
        let f = ScalarField::random_polynomial(n, 3, 1.0, &mut rng).jet_at(&geo.x0, 4);
        let fpsi: Vec<Jet> = psi.iter().map(|c| c.mul_min(&f)).collect();
        let lhs = sub_sections(
            &geo.dirac(&fpsi).unwrap(),
            &geo.dirac(&psi)
                .unwrap()
                .iter()
                .map(|c| c.mul_min(&f))
                .collect::<Vec<_>>(),
        );
        let rhs = geo.clifford_vector(&geo.gradient_vector(&f).unwrap(), &psi);
        assert!(relative_residual(&lhs, &rhs) < 1e-11);

        let y: Vec<Jet> = (0..n)
            .map(|_| ScalarField::random_real_polynomial(n, 3, 1.0, &mut rng).jet_at(&geo.x0, 4))
            .collect();
        for mu in 0..n {
            let lhs = geo.cov(&geo.clifford_vector(&y, &psi), mu).unwrap();
            let dy: Vec<Jet> = (0..n)
                .map(|nu| {
                    let mut v = y[nu].partial(mu).unwrap();
                    for lam in 0..n {
                        v = v.add_min(&geo.pack.christoffel.get(&[nu, mu, lam]).mul_min(&y[lam]));
                    }
                    v
                })
                .collect();
            let rhs: Vec<Jet> = geo
                .clifford_vector(&dy, &psi)
                .iter()
                .zip(geo.clifford_vector(&y, &geo.cov(&psi, mu).unwrap()))
                .map(|(a, b)| a.add_min(&b))
                .collect();
            assert!(relative_residual(&lhs, &rhs) < 1e-11);
        }
    }
}

#[test]
fn divergence_identity_vanishes() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for chart in charts(&mut rng) {
        let geo = SpinGeometry::new(&chart, &point(chart.n(), &mut rng), 5).unwrap();
        let psi = spinor(&geo, 4, &mut rng);
        let phi = spinor(&geo, 4, &mut rng);
        for t in [geo.pack.g.clone(), geo.pack.schouten.clone()] {
            let (res, scale) = geo.divergence_identity(&t, &psi, &phi).unwrap();
            assert!(res.max_abs() < 1e-10 * scale.max(1.0), "{}", res.max_abs());
        }
    }
}

#[test]
fn flat_chart_constant_spinor_is_parallel() {
    let geo = SpinGeometry::new(&MetricChart::flat(1, 2), &[0.1, 0.2, 0.3], 3).unwrap();
    let psi: Vec<Jet> = (0..geo.dim())
        .map(|k| Jet::constant(3, 3, Complex64::new(k as f64, 1.0)))
        .collect();
    let d = geo.dirac(&psi).unwrap();
    assert!(d.iter().all(|c| c.max_abs() == 0.0));
}
