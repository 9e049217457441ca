//! Independent inner-product oracles and random admissible test functions.
#![allow(dead_code)]

use rand::Rng;
use rkhs_ocp::field::AnalyticField;
use rkhs_ocp::kernel::{Endpoint, Kernel1D, SpaceSpec, TensorKernel};
use rkhs_ocp::quadrature::gauss_legendre;

/// Dense polynomial in monomials of `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    pub fn eval(&self, x: f64, d: usize) -> f64 {
        let mut acc = 0.0;
        for (p, &c) in self.0.iter().enumerate().skip(d).rev() {
            let f: f64 = ((p - d + 1)..=p).map(|v| v as f64).product();
            acc = acc * x + c * f;
        }
        acc
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![0.0; self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out)
    }
}

/// Random polynomial satisfying every value constraint of `spec`: a random
/// factor of degree `degree` times `(x - a)` and/or `(b - x)`.
pub fn random_admissible(spec: &SpaceSpec, degree: usize, rng: &mut impl Rng) -> Poly {
    let (a, b) = spec.interval();
    let mut p = Poly((0..=degree).map(|_| rng.gen_range(-1.0..1.0)).collect());
    if spec.is_constrained(Endpoint::Left, 0) {
        p = p.mul(&Poly(vec![-a, 1.0]));
    }
    if spec.is_constrained(Endpoint::Right, 0) {
        p = p.mul(&Poly(vec![b, -1.0]));
    }
    p
}

/// Inner product of `W_m`: `sum_{i=1..m} u^(i)(a) v^(i)(a) + int u^(m+1) v^(m+1)`,
/// with the integral split at `breaks`.
pub fn inner_1d(
    m: usize,
    (a, b): (f64, f64),
    u: impl Fn(f64, usize) -> f64,
    v: impl Fn(f64, usize) -> f64,
    breaks: &[f64],
) -> f64 {
    let mut s: f64 = (1..=m).map(|i| u(a, i) * v(a, i)).sum();
    s += rkhs_ocp::quadrature::integrate_piecewise(|x| u(x, m + 1) * v(x, m + 1), a, b, breaks, 12);
    s
}

/// `<f, k(., y)>` for a 1-D kernel.
pub fn reproduce_1d(k: &Kernel1D, f: &Poly, y: f64) -> f64 {
    let spec = k.spec();
    inner_1d(
        spec.order(),
        spec.interval(),
        |x, d| f.eval(x, d),
        |x, d| k.eval(x, y, d, 0).unwrap(),
        &[y],
    )
}

/// `sum_j g_j(x) h_j(t)`.
#[derive(Debug, Clone)]
pub struct Separable(pub Vec<(Poly, Poly)>);

impl Separable {
    pub fn eval(&self, x: f64, t: f64, dx: usize, dt: usize) -> f64 {
        self.0.iter().map(|(g, h)| g.eval(x, dx) * h.eval(t, dt)).sum()
    }
}

pub fn random_tensor_function(k: &TensorKernel, terms: usize, rng: &mut impl Rng) -> Separable {
    Separable(
        (0..terms)
            .map(|_| {
                (
                    random_admissible(k.spatial().spec(), 3, rng),
                    random_admissible(k.temporal().spec(), 2, rng),
                )
            })
            .collect(),
    )
}

/// Tensor-product inner product of `W_2[a, b]` and `W_1[0, T]` written out
/// term by term: point-point, point-line, line-point and area integrals.
pub fn inner_tensor(
    (a, b): (f64, f64),
    (t0, t1): (f64, f64),
    u: &dyn Fn(f64, f64, usize, usize) -> f64,
    v: &dyn Fn(f64, f64, usize, usize) -> f64,
    x_breaks: &[f64],
    t_breaks: &[f64],
) -> f64 {
    let pieces = |lo: f64, hi: f64, breaks: &[f64]| -> Vec<(f64, f64)> {
        let mut cuts = vec![lo];
        cuts.extend(breaks.iter().copied().filter(|&c| c > lo && c < hi));
        cuts.push(hi);
        cuts.windows(2).flat_map(|w| gauss_legendre(10, w[0], w[1])).collect()
    };
    let xq = pieces(a, b, x_breaks);
    let tq = pieces(t0, t1, t_breaks);
    let mut s = 0.0;
    for i in 1..=2 {
        s += u(a, t0, i, 1) * v(a, t0, i, 1);
        s += tq.iter().map(|&(t, w)| w * u(a, t, i, 2) * v(a, t, i, 2)).sum::<f64>();
    }
    s += xq.iter().map(|&(x, w)| w * u(x, t0, 3, 1) * v(x, t0, 3, 1)).sum::<f64>();
    for &(t, wt) in &tq {
        for &(x, wx) in &xq {
            s += wx * wt * u(x, t, 3, 2) * v(x, t, 3, 2);
        }
    }
    s
}

/// `<f, K(., (y, s))>` for a tensor kernel.
pub fn reproduce_tensor(k: &TensorKernel, f: &Separable, y: f64, s: f64) -> f64 {
    let (a, b, t0, t1) = k.rectangle();
    inner_tensor(
        (a, b),
        (t0, t1),
        &|x, t, dx, dt| f.eval(x, t, dx, dt),
        &|x, t, dx, dt| k.eval((x, t), (y, s), dx, dt).unwrap(),
        &[y],
        &[s],
    )
}

/// `x^i (1-x)^j t^k (1-t)^l` with `i, j, k, l >= 2` vanishes with its first
/// derivatives on the whole boundary.
pub fn bubble(i: i32, j: i32, k: i32, l: i32, scale: f64) -> AnalyticField {
    let g = move |x: f64| x.powi(i) * (1.0 - x).powi(j);
    let g1 = move |x: f64| i as f64 * x.powi(i - 1) * (1.0 - x).powi(j) - j as f64 * x.powi(i) * (1.0 - x).powi(j - 1);
    let g2 = move |x: f64| {
        let (a, b) = (i as f64, j as f64);
        a * (a - 1.0) * x.powi(i - 2) * (1.0 - x).powi(j) - 2.0 * a * b * x.powi(i - 1) * (1.0 - x).powi(j - 1)
            + b * (b - 1.0) * x.powi(i) * (1.0 - x).powi(j - 2)
    };
    let h = move |t: f64| t.powi(k) * (1.0 - t).powi(l);
    let h1 = move |t: f64| k as f64 * t.powi(k - 1) * (1.0 - t).powi(l) - l as f64 * t.powi(k) * (1.0 - t).powi(l - 1);
    AnalyticField::new(
        move |x, t| scale * g(x) * h(t),
        move |x, t| scale * g(x) * h1(t),
        move |x, t| scale * g1(x) * h(t),
        move |x, t| scale * g2(x) * h(t),
    )
}
