use super::C64;
use crate::error::{LabError, Result};
use serde::Serialize;

/// Row-major band matrix. Row `i` stores columns `i - kl ..= i + ku`.
#[derive(Clone, Debug, Serialize)]
pub struct BandMatrix {
    pub n: usize,
    pub kl: usize,
    pub ku: usize,
    data: Vec<C64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        BandMatrix {
            n,
            kl,
            ku,
            data: vec![C64::new(0.0, 0.0); n * (kl + ku + 1)],
        }
    }

    pub fn diagonal(values: &[C64]) -> Self {
        let mut m = Self::zeros(values.len(), 0, 0);
        m.data.copy_from_slice(values);
        m
    }

    #[inline]
    fn width(&self) -> usize {
        self.kl + self.ku + 1
    }

    #[inline]
    pub fn in_band(&self, i: usize, j: usize) -> bool {
        j + self.kl >= i && j <= i + self.ku && i < self.n && j < self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        if self.in_band(i, j) {
            self.data[i * self.width() + j + self.kl - i]
        } else {
            C64::new(0.0, 0.0)
        }
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        assert!(self.in_band(i, j), "({i},{j}) outside band");
        let w = self.width();
        self.data[i * w + j + self.kl - i] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: C64) {
        let w = self.width();
        assert!(self.in_band(i, j));
        self.data[i * w + j + self.kl - i] += v;
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.n);
        let w = self.width();
        let mut y = vec![C64::new(0.0, 0.0); self.n];
        for (i, yi) in y.iter_mut().enumerate() {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            let row = &self.data[i * w..(i + 1) * w];
            let mut acc = C64::new(0.0, 0.0);
            for j in lo..=hi {
                acc += row[j + self.kl - i] * x[j];
            }
            *yi = acc;
        }
        y
    }

    /// y = M^H x
    pub fn matvec_adjoint(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.n];
        for (i, &xi) in x.iter().enumerate() {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            for j in lo..=hi {
                y[j] += self.get(i, j).conj() * xi;
            }
        }
        y
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut m = self.clone();
        m.data.iter_mut().for_each(|v| *v *= s);
        m
    }

    /// Sum of two band matrices (band widths widen as needed).
    pub fn plus(&self, other: &BandMatrix) -> BandMatrix {
        assert_eq!(self.n, other.n);
        let kl = self.kl.max(other.kl);
        let ku = self.ku.max(other.ku);
        let mut m = BandMatrix::zeros(self.n, kl, ku);
        for src in [self, other] {
            for i in 0..src.n {
                let lo = i.saturating_sub(src.kl);
                let hi = (i + src.ku).min(src.n - 1);
                for j in lo..=hi {
                    m.add(i, j, src.get(i, j));
                }
            }
        }
        m
    }

    /// Product of two band matrices.
    pub fn times(&self, other: &BandMatrix) -> BandMatrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut m = BandMatrix::zeros(n, self.kl + other.kl, self.ku + other.ku);
        for i in 0..n {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(n - 1);
            for k in lo..=hi {
                let a = self.get(i, k);
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let lo2 = k.saturating_sub(other.kl);
                let hi2 = (k + other.ku).min(n - 1);
                for j in lo2..=hi2 {
                    m.add(i, j, a * other.get(k, j));
                }
            }
        }
        m
    }

    pub fn shift_diagonal(&mut self, s: C64) {
        for i in 0..self.n {
            self.add(i, i, s);
        }
    }

    /// Largest |M_ij - M_ji| over rows in `rows`, with conjugation when `hermitian`.
    pub fn max_asymmetry(&self, rows: std::ops::Range<usize>, hermitian: bool) -> f64 {
        let mut worst: f64 = 0.0;
        for i in rows {
            let lo = i.saturating_sub(self.kl.max(self.ku));
            let hi = (i + self.kl.max(self.ku)).min(self.n - 1);
            for j in lo..=hi {
                let t = if hermitian { self.get(j, i).conj() } else { self.get(j, i) };
                worst = worst.max((self.get(i, j) - t).norm());
            }
        }
        worst
    }

    pub fn norm_one(&self) -> f64 {
        let mut col = vec![0.0; self.n];
        for i in 0..self.n {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            for (j, c) in col.iter_mut().enumerate().take(hi + 1).skip(lo) {
                *c += self.get(i, j).norm();
            }
        }
        col.into_iter().fold(0.0, f64::max)
    }

    pub fn factor(&self) -> Result<BandLu> {
        BandLu::new(self)
    }
}

/// LU factorization with partial pivoting, in the gbtrf layout: U has
/// `kl + ku` superdiagonals after fill-in.
#[derive(Clone, Debug)]
pub struct BandLu {
    n: usize,
    kl: usize,
    kuf: usize,
    u: Vec<C64>,
    l: Vec<C64>,
    piv: Vec<usize>,
}

impl BandLu {
    pub fn new(m: &BandMatrix) -> Result<Self> {
        let n = m.n;
        let kl = m.kl;
        let kuf = m.kl + m.ku;
        let w = kl + kuf + 1;
        // work row i holds columns i-kl ..= i+kuf at offset j + kl - i
        let mut a = vec![C64::new(0.0, 0.0); n * w];
        for i in 0..n {
            let lo = i.saturating_sub(kl);
            let hi = (i + m.ku).min(n - 1);
            for j in lo..=hi {
                a[i * w + j + kl - i] = m.get(i, j);
            }
        }
        let idx = |i: usize, j: usize| i * w + j + kl - i;
        let mut piv = vec![0usize; n];
        let mut l = vec![C64::new(0.0, 0.0); n * kl.max(1)];
        let scale = a.iter().fold(0.0f64, |s, v| s.max(v.norm()));
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = a[idx(k, k)].norm();
            for i in k + 1..=last {
                let v = a[idx(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || best <= scale * 1e-300 {
                return Err(LabError::Singular(format!("zero pivot at column {k}")));
            }
            piv[k] = p;
            let jmax = (k + kuf).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    let (ik, ip) = (idx(k, j), idx(p, j));
                    a.swap(ik, ip);
                }
            }
            let inv = 1.0 / a[idx(k, k)];
            for i in k + 1..=last {
                let f = a[idx(i, k)] * inv;
                l[k * kl.max(1) + (i - k - 1)] = f;
                if f != C64::new(0.0, 0.0) {
                    for j in k + 1..=jmax {
                        let t = a[idx(k, j)];
                        a[idx(i, j)] -= f * t;
                    }
                }
            }
        }
        let mut u = vec![C64::new(0.0, 0.0); n * (kuf + 1)];
        for k in 0..n {
            for j in k..=(k + kuf).min(n - 1) {
                u[k * (kuf + 1) + j - k] = a[idx(k, j)];
            }
        }
        Ok(BandLu { n, kl, kuf, u, l, piv })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn uget(&self, k: usize, j: usize) -> C64 {
        self.u[k * (self.kuf + 1) + j - k]
    }

    #[inline]
    fn lget(&self, k: usize, i: usize) -> C64 {
        self.l[k * self.kl.max(1) + (i - k - 1)]
    }

    /// Solve M x = b.
    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.n;
        let mut x = b.to_vec();
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                x.swap(k, p);
            }
            let xk = x[k];
            for i in k + 1..=(k + self.kl).min(n - 1) {
                x[i] -= self.lget(k, i) * xk;
            }
        }
        for k in (0..n).rev() {
            let mut acc = x[k];
            for j in k + 1..=(k + self.kuf).min(n - 1) {
                acc -= self.uget(k, j) * x[j];
            }
            x[k] = acc / self.uget(k, k);
        }
        x
    }

    /// Solve M^H x = b.
    pub fn solve_adjoint(&self, b: &[C64]) -> Vec<C64> {
        let n = self.n;
        let mut y = b.to_vec();
        for k in 0..n {
            let mut acc = y[k];
            for j in k.saturating_sub(self.kuf)..k {
                acc -= self.uget(j, k).conj() * y[j];
            }
            y[k] = acc / self.uget(k, k).conj();
        }
        for k in (0..n).rev() {
            let mut acc = y[k];
            for i in k + 1..=(k + self.kl).min(n - 1) {
                acc -= self.lget(k, i).conj() * y[i];
            }
            y[k] = acc;
            let p = self.piv[k];
            if p != k {
                y.swap(k, p);
            }
        }
        y
    }

    /// Hager-Higham estimate of ||M^-1||_1.
    pub fn inverse_norm_one_estimate(&self) -> f64 {
        let n = self.n;
        let mut x = vec![C64::new(1.0 / n as f64, 0.0); n];
        let mut est = 0.0;
        let mut last_j = usize::MAX;
        for _ in 0..5 {
            let y = self.solve(&x);
            let new_est: f64 = y.iter().map(|v| v.norm()).sum();
            if new_est <= est && last_j != usize::MAX {
                break;
            }
            est = new_est;
            let xi: Vec<C64> = y
                .iter()
                .map(|v| if v.norm() > 0.0 { v / v.norm() } else { C64::new(1.0, 0.0) })
                .collect();
            let z = self.solve_adjoint(&xi);
            let (j, zmax) = z
                .iter()
                .enumerate()
                .map(|(j, v)| (j, v.norm()))
                .fold((0, 0.0), |acc, t| if t.1 > acc.1 { t } else { acc });
            let ztx: f64 = z.iter().zip(&x).map(|(a, b)| (a.conj() * b).re).sum();
            if zmax <= ztx || j == last_j {
                break;
            }
            last_j = j;
            x.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
            x[j] = C64::new(1.0, 0.0);
        }
        est
    }

    /// Estimate of the smallest singular value via inverse power iteration on (M^H M)^-1.
    pub fn smallest_singular_value(&self, iters: usize) -> f64 {
        let n = self.n;
        let mut v: Vec<C64> = (0..n)
            .map(|i| C64::new(1.0 + 0.3 * ((i * 7919) % 13) as f64, 0.1 * ((i * 31) % 7) as f64))
            .collect();
        let nv = super::norm2(&v);
        v.iter_mut().for_each(|x| *x /= nv);
        let mut sigma_inv = 0.0;
        for _ in 0..iters {
            let y = self.solve(&v);
            let w = self.solve_adjoint(&y);
            let nw = super::norm2(&w);
            if nw == 0.0 {
                return f64::INFINITY;
            }
            sigma_inv = nw.sqrt();
            v = w.into_iter().map(|x| x / nw).collect();
        }
        1.0 / sigma_inv
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_band(n: usize, kl: usize, ku: usize) -> BandMatrix {
        let mut m = BandMatrix::zeros(n, kl, ku);
        for i in 0..n {
            for j in i.saturating_sub(kl)..(i + ku + 1).min(n) {
                let t = (i * 31 + j * 17) as f64;
                m.set(i, j, C64::new((t * 0.37).sin(), (t * 0.11).cos()));
            }
            // keep the matrix comfortably nonsingular
            m.add(i, i, C64::new(4.0, 0.5));
        }
        m
    }

    fn dense(m: &BandMatrix, n: usize) -> Vec<Vec<C64>> {
        (0..n).map(|i| (0..n).map(|j| m.get(i, j)).collect()).collect()
    }

    /// Gaussian elimination with partial pivoting on a dense copy.
    fn dense_solve(mut a: Vec<Vec<C64>>, mut b: Vec<C64>) -> Vec<C64> {
        let n = b.len();
        for c in 0..n {
            let p = (c..n).max_by(|x, y| a[*x][c].norm().partial_cmp(&a[*y][c].norm()).unwrap()).unwrap();
            a.swap(c, p);
            b.swap(c, p);
            for r in c + 1..n {
                let f = a[r][c] / a[c][c];
                for k in c..n {
                    let v = a[c][k];
                    a[r][k] -= f * v;
                }
                let v = b[c];
                b[r] -= f * v;
            }
        }
        let mut x = vec![C64::new(0.0, 0.0); n];
        for r in (0..n).rev() {
            let s: C64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
            x[r] = (b[r] - s) / a[r][r];
        }
        x
    }

    fn rhs(n: usize) -> Vec<C64> {
        (0..n).map(|i| C64::new((i as f64 * 0.7).cos(), (i as f64 * 0.3).sin())).collect()
    }

    #[test]
    fn band_lu_agrees_with_dense_elimination() {
        for (kl, ku) in [(1, 1), (2, 1), (1, 3), (2, 2)] {
            let n = 23;
            let m = sample_band(n, kl, ku);
            let b = rhs(n);
            let x = m.factor().unwrap().solve(&b);
            let y = dense_solve(dense(&m, n), b.clone());
            let err = x.iter().zip(&y).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(err < 1e-12, "kl={kl} ku={ku}: {err}");
        }
    }

    #[test]
    fn adjoint_solve_inverts_the_conjugate_transpose() {
        let n = 19;
        let m = sample_band(n, 2, 1);
        let b = rhs(n);
        let x = m.factor().unwrap().solve_adjoint(&b);
        let back = m.matvec_adjoint(&x);
        let err = back.iter().zip(&b).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12);
    }

    #[test]
    fn matvec_matches_dense_product() {
        let n = 11;
        let m = sample_band(n, 1, 2);
        let x = rhs(n);
        let d = dense(&m, n);
        let y = m.matvec(&x);
        for i in 0..n {
            let s: C64 = (0..n).map(|j| d[i][j] * x[j]).sum();
            assert!((s - y[i]).norm() < 1e-13);
        }
    }

    #[test]
    fn singular_matrix_is_reported() {
        let mut m = BandMatrix::zeros(6, 1, 1);
        for i in 0..5 {
            m.set(i, i, C64::new(1.0, 0.0));
        }
        assert!(matches!(m.factor(), Err(LabError::Singular(_))));
    }

    #[test]
    fn smallest_singular_value_of_a_diagonal() {
        let d: Vec<C64> = [3.0, 0.25, 2.0, 5.0].iter().map(|v| C64::new(*v, 0.0)).collect();
        let s = BandMatrix::diagonal(&d).factor().unwrap().smallest_singular_value(60);
        assert!((s - 0.25).abs() < 1e-8);
    }
}
