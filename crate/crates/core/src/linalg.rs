//! Small dense and banded direct solvers.
//!
//! Both factorizations use partial pivoting. The dense factorization also
//! supports transposed solves, which the 1-norm condition estimator needs.

use nalgebra::{DMatrix, DVector};

/// Pivots below `PIVOT_TOL * max|A|` are treated as exact zeros.
pub const PIVOT_TOL: f64 = 1e-14;

/// Row-major dense matrix used by the collocation and kernel solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "row-major data has the wrong length");
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Induced 1-norm (maximum absolute column sum).
    pub fn norm_one(&self) -> f64 {
        let mut sums = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (s, v) in sums.iter_mut().zip(self.row(i)) {
                *s += v.abs();
            }
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularPivot {
    pub column: usize,
    /// Pivot magnitude relative to the largest matrix entry.
    pub relative: f64,
}

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct DenseLu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
    norm_one: f64,
}

impl DenseLu {
    pub fn factor(a: &DenseMatrix) -> Result<Self, SingularPivot> {
        assert_eq!(a.rows, a.cols, "LU needs a square matrix");
        let n = a.rows;
        let scale = a.max_abs();
        let norm_one = a.norm_one();
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        if scale == 0.0 && n > 0 {
            return Err(SingularPivot { column: 0, relative: 0.0 });
        }
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[i * n + k].abs()))
                .fold((k, -1.0), |best, c| if c.1 > best.1 { c } else { best });
            if pmax <= PIVOT_TOL * scale {
                return Err(SingularPivot { column: k, relative: pmax / scale });
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[k * n + k];
            let (upper, lower) = lu.split_at_mut((k + 1) * n);
            let pivot_row = &upper[k * n..(k + 1) * n];
            for row in lower.chunks_exact_mut(n) {
                let l = row[k] / pivot;
                row[k] = l;
                if l != 0.0 {
                    for (r, u) in row[k + 1..].iter_mut().zip(&pivot_row[k + 1..]) {
                        *r -= l * u;
                    }
                }
            }
        }
        Ok(Self { n, lu, perm, norm_one })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = &self.lu[i * n..i * n + i];
            let s: f64 = row.iter().zip(&x[..i]).map(|(l, v)| l * v).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n..(i + 1) * n];
            let s: f64 = row[i + 1..].iter().zip(&x[i + 1..]).map(|(u, v)| u * v).sum();
            x[i] = (x[i] - s) / row[i];
        }
        x
    }

    /// Solves `A^T x = b`.
    pub fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        assert_eq!(b.len(), n);
        // U^T z = b
        let mut z = b.to_vec();
        for i in 0..n {
            z[i] /= self.lu[i * n + i];
            let zi = z[i];
            for j in i + 1..n {
                z[j] -= self.lu[i * n + j] * zi;
            }
        }
        // L^T w = z
        for i in (0..n).rev() {
            let wi = z[i];
            for j in 0..i {
                z[j] -= self.lu[i * n + j] * wi;
            }
        }
        let mut x = vec![0.0; n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = z[i];
        }
        x
    }

    /// Hager-Higham estimate of the 1-norm condition number `||A||_1 ||A^-1||_1`.
    pub fn condition_estimate(&self) -> f64 {
        let n = self.n;
        if n == 0 {
            return 1.0;
        }
        let mut x = vec![1.0 / n as f64; n];
        let mut estimate = 0.0;
        let mut last_j = usize::MAX;
        for _ in 0..5 {
            let y = self.solve(&x);
            estimate = y.iter().map(|v| v.abs()).sum::<f64>();
            let xi: Vec<f64> = y.iter().map(|v| if *v >= 0.0 { 1.0 } else { -1.0 }).collect();
            let z = self.solve_transpose(&xi);
            let (j, zmax) = z
                .iter()
                .enumerate()
                .map(|(j, v)| (j, v.abs()))
                .fold((0, -1.0), |b, c| if c.1 > b.1 { c } else { b });
            let ztx: f64 = z.iter().zip(&x).map(|(a, b)| a * b).sum();
            if zmax <= ztx || j == last_j {
                break;
            }
            x = vec![0.0; n];
            x[j] = 1.0;
            last_j = j;
        }
        // Alternating-sign probe guards against the estimator stalling.
        let alt: Vec<f64> = (0..n)
            .map(|i| {
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                s * (1.0 + i as f64 / (n.max(2) - 1) as f64)
            })
            .collect();
        let y = self.solve(&alt);
        let alt_est = 2.0 * y.iter().map(|v| v.abs()).sum::<f64>() / (3.0 * n as f64);
        self.norm_one * estimate.max(alt_est)
    }
}

/// Scales each row by the reciprocal of its largest magnitude.
///
/// Returns the scale factors that were applied; zero rows are left alone.
pub fn equilibrate_rows(a: &mut DenseMatrix, rhs: &mut [f64]) -> Vec<f64> {
    let mut scales = Vec::with_capacity(a.rows);
    for i in 0..a.rows {
        let m = a.row(i).iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let s = if m > 0.0 { 1.0 / m } else { 1.0 };
        for v in a.row_mut(i) {
            *v *= s;
        }
        rhs[i] *= s;
        scales.push(s);
    }
    scales
}

/// Minimizes `|A x - b|^2 + mu^2 |x|^2` through a QR factorization of the
/// stacked matrix `[A; mu I]`, i.e. solves `(A^T A + mu^2 I) x = A^T b`.
pub fn ridge_solve(a: &DenseMatrix, b: &[f64], mu: f64) -> Option<Vec<f64>> {
    let (m, n) = (a.rows, a.cols);
    let mut stacked = DMatrix::<f64>::zeros(m + n, n);
    for i in 0..m {
        for j in 0..n {
            stacked[(i, j)] = a[(i, j)];
        }
    }
    for j in 0..n {
        stacked[(m + j, j)] = mu;
    }
    let mut rhs = DVector::<f64>::zeros(m + n);
    for i in 0..m {
        rhs[i] = b[i];
    }
    let qr = stacked.qr();
    let qtb = qr.q().transpose() * rhs;
    let r = qr.r();
    r.solve_upper_triangular(&qtb).map(|x| x.iter().copied().collect())
}

/// General band matrix with `kl` sub- and `ku` super-diagonals, factored in
/// place with partial pivoting (fill-in widens the upper band to `kl + ku`).
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self { n, kl, ku, width, data: vec![0.0; n * width] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.kl + self.ku);
        i * self.width + (j + self.kl - i)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.ku {
            return 0.0;
        }
        self.data[self.offset(i, j)]
    }

    /// Adds `v` to entry `(i, j)`; panics if the entry lies outside the band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(
            j + self.kl >= i && j <= i + self.ku,
            "entry ({i}, {j}) outside band kl={} ku={}",
            self.kl,
            self.ku
        );
        let o = self.offset(i, j);
        self.data[o] += v;
    }

    pub fn factor(mut self) -> Result<BandLu, SingularPivot> {
        let n = self.n;
        let scale = self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if scale == 0.0 && n > 0 {
            return Err(SingularPivot { column: 0, relative: 0.0 });
        }
        let reach = self.kl + self.ku;
        let mut piv = vec![0usize; n];
        for k in 0..n {
            let last_row = (k + self.kl).min(n - 1);
            let last_col = (k + reach).min(n - 1);
            let mut p = k;
            let mut pmax = self.data[self.offset(k, k)].abs();
            for i in k + 1..=last_row {
                let v = self.data[self.offset(i, k)].abs();
                if v > pmax {
                    pmax = v;
                    p = i;
                }
            }
            if pmax <= PIVOT_TOL * scale {
                return Err(SingularPivot { column: k, relative: pmax / scale });
            }
            piv[k] = p;
            if p != k {
                for j in k..=last_col {
                    let (ok, op) = (self.offset(k, j), self.offset(p, j));
                    self.data.swap(ok, op);
                }
            }
            let pivot = self.data[self.offset(k, k)];
            for i in k + 1..=last_row {
                let oik = self.offset(i, k);
                let l = self.data[oik] / pivot;
                self.data[oik] = l;
                if l == 0.0 {
                    continue;
                }
                let ok = self.offset(k, k + 1);
                let oi = self.offset(i, k + 1);
                let len = last_col - k;
                for c in 0..len {
                    self.data[oi + c] -= l * self.data[ok + c];
                }
            }
        }
        Ok(BandLu { band: self, piv })
    }
}

#[derive(Debug, Clone)]
pub struct BandLu {
    band: BandMatrix,
    piv: Vec<usize>,
}

impl BandLu {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let a = &self.band;
        let n = a.n;
        let reach = a.kl + a.ku;
        let mut x = b.to_vec();
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                x.swap(k, p);
            }
            let xk = x[k];
            if xk != 0.0 {
                for i in k + 1..=(k + a.kl).min(n - 1) {
                    x[i] -= a.data[a.offset(i, k)] * xk;
                }
            }
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..=(i + reach).min(n - 1) {
                s -= a.data[a.offset(i, j)] * x[j];
            }
            x[i] = s / a.data[a.offset(i, i)];
        }
        x
    }
}
