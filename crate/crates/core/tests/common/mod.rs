//! Finite-difference oracle for the curvature stack, independent of jet differentiation:
//! only point values of the metric are used.

#![allow(dead_code)]

use confdirac::chart::MetricChart;
use nalgebra::DMatrix;

fn metric_at(chart: &MetricChart, x: &[f64]) -> DMatrix<f64> {
    let n = chart.n();
    let g = chart.metric_jets(x, 0).unwrap();
    DMatrix::from_fn(n, n, |i, j| g.get(&[i, j]).value().re)
}

fn shifted(x: &[f64], i: usize, s: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    y[i] += s;
    y
}

/// `Γ^k_ij` at `x` from central differences of the metric, indexed `[k][i][j]` flattened.
pub fn christoffel_fd(chart: &MetricChart, x: &[f64], h: f64) -> Vec<f64> {
    let n = chart.n();
    let g = metric_at(chart, x);
    let ginv = g.clone().try_inverse().unwrap();
    let dg: Vec<DMatrix<f64>> = (0..n)
        .map(|i| (metric_at(chart, &shifted(x, i, h)) - metric_at(chart, &shifted(x, i, -h))) / (2.0 * h))
        .collect();
    let mut out = vec![0.0; n * n * n];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for l in 0..n {
                    s += 0.5 * ginv[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
                }
                out[(k * n + i) * n + j] = s;
            }
        }
    }
    out
}

/// Ricci tensor `Ric_xy = R^a_{x a y}`-type contraction matching the jet pack's convention,
/// from nested central differences.
pub fn ricci_fd(chart: &MetricChart, x: &[f64], h: f64) -> DMatrix<f64> {
    let n = chart.n();
    let gam = christoffel_fd(chart, x, h);
    let dgam: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let p = christoffel_fd(chart, &shifted(x, i, h), h);
            let m = christoffel_fd(chart, &shifted(x, i, -h), h);
            p.iter().zip(&m).map(|(a, b)| (a - b) / (2.0 * h)).collect()
        })
        .collect();
    let c = |k: usize, i: usize, j: usize| gam[(k * n + i) * n + j];
    let dc = |d: usize, k: usize, i: usize, j: usize| dgam[d][(k * n + i) * n + j];
    // R^l_{kij} = ∂_iΓ^l_{jk} − ∂_jΓ^l_{ik} + Γ^l_{im}Γ^m_{jk} − Γ^l_{jm}Γ^m_{ik}
    let riem = |l: usize, k: usize, i: usize, j: usize| {
        let mut s = dc(i, l, j, k) - dc(j, l, i, k);
        for m in 0..n {
            s += c(l, i, m) * c(m, j, k) - c(l, j, m) * c(m, i, k);
        }
        s
    };
    // Ric(X,Y) = g^{ab} 𝓡(X, a, b, Y) with 𝓡(X,A,B,Y) = g(R(X,A)B, Y), which is R^l_{b x a} g_{l y}
    let g = metric_at(chart, x);
    let ginv = g.clone().try_inverse().unwrap();
    DMatrix::from_fn(n, n, |xx, yy| {
        let mut s = 0.0;
        for a in 0..n {
            for b in 0..n {
                for l in 0..n {
                    s += ginv[(a, b)] * g[(l, yy)] * riem(l, b, xx, a);
                }
            }
        }
        s
    })
}
