//! Small dense linear algebra: row-major matrices, a symmetric eigensolver,
//! thin SVD, Gram-Schmidt and principal angles.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::vector::{dot, norm};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data has wrong length");
        Self { rows, cols, data }
    }

    pub fn from_columns(rows: usize, columns: &[Vec<f64>]) -> Self {
        let cols = columns.len();
        let mut m = Self::zeros(rows, cols);
        for (j, c) in columns.iter().enumerate() {
            assert_eq!(c.len(), rows);
            for (i, &v) in c.iter().enumerate() {
                m.data[i * cols + j] = v;
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `A v`
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `A^T v`
    pub fn t_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.rows, v.len());
        let mut out = vec![0.0; self.cols];
        for (i, &vi) in v.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += a * vi;
            }
        }
        out
    }

    /// `A^T A`
    pub fn gram_cols(&self) -> Matrix {
        let n = self.cols;
        let mut g = Matrix::zeros(n, n);
        for i in 0..self.rows {
            let r = self.row(i);
            for a in 0..n {
                let ra = r[a];
                if ra == 0.0 {
                    continue;
                }
                let grow = &mut g.data[a * n..(a + 1) * n];
                for b in a..n {
                    grow[b] += ra * r[b];
                }
            }
        }
        g.mirror_upper();
        g
    }

    /// `A A^T`
    pub fn gram_rows(&self) -> Matrix {
        let n = self.rows;
        let mut g = Matrix::zeros(n, n);
        for a in 0..n {
            for b in a..n {
                g.data[a * n + b] = dot(self.row(a), self.row(b));
            }
        }
        g.mirror_upper();
        g
    }

    fn mirror_upper(&mut self) {
        let n = self.rows;
        for a in 0..n {
            for b in 0..a {
                self.data[a * n + b] = self.data[b * n + a];
            }
        }
    }

    pub fn frobenius_sq(&self) -> f64 {
        dot(&self.data, &self.data)
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix::from_row_major(
            self.rows,
            self.cols,
            self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        )
    }

    /// Keeps the first `k` columns.
    pub fn leading_columns(&self, k: usize) -> Matrix {
        let k = k.min(self.cols);
        let mut out = Matrix::zeros(self.rows, k);
        for i in 0..self.rows {
            out.data[i * k..(i + 1) * k].copy_from_slice(&self.row(i)[..k]);
        }
        out
    }
}

/// Eigen-decomposition of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymEigen {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Matching unit eigenvectors as columns.
    pub vectors: Matrix,
}

/// Householder tridiagonalization followed by the implicit QL algorithm.
pub fn sym_eigen(a: &Matrix) -> SymEigen {
    assert_eq!(a.rows, a.cols, "sym_eigen needs a square matrix");
    let n = a.rows;
    if n == 0 {
        return SymEigen {
            values: Vec::new(),
            vectors: Matrix::zeros(0, 0),
        };
    }
    // Column-major copy of `a`.
    let mut v = a.transpose().data;
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(n, &mut v, &mut d, &mut e);
    tql2(n, Some(&mut v), &mut d, &mut e);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[j].total_cmp(&d[i]));
    let mut vectors = Matrix::zeros(n, n);
    for (new_j, &old_j) in order.iter().enumerate() {
        for i in 0..n {
            vectors.data[i * n + new_j] = v[old_j * n + i];
        }
    }
    SymEigen {
        values: order.iter().map(|&i| d[i]).collect(),
        vectors,
    }
}

/// The `k` largest eigenpairs of a symmetric matrix, plus all eigenvalues.
///
/// `values` holds every eigenvalue in descending order; `vectors` holds the
/// eigenvectors of the first `min(k, n)`. Eigenvalues come from QL without
/// vector accumulation and the vectors from inverse iteration on the
/// tridiagonal form, which is much cheaper than the full decomposition when
/// `k` is small. Vectors of clustered eigenvalues are re-orthogonalized.
pub fn sym_eigen_top(a: &Matrix, k: usize) -> SymEigen {
    assert_eq!(a.rows, a.cols, "sym_eigen_top needs a square matrix");
    let n = a.rows;
    let k = k.min(n);
    if 4 * k >= n {
        let mut full = sym_eigen(a);
        full.vectors = full.vectors.leading_columns(k);
        return full;
    }
    let mut q = a.transpose().data;
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(n, &mut q, &mut d, &mut e);
    // Tridiagonal: diagonal `d`, off-diagonal `e[i]` between rows i-1 and i.
    let (diag, off) = (d.clone(), e.clone());
    tql2(n, None, &mut d, &mut e);
    let mut values = d;
    values.sort_by(|x, y| y.total_cmp(x));

    let t_norm = (0..n)
        .map(|i| libm::fabs(diag[i]) + libm::fabs(off[i]) + off.get(i + 1).map_or(0.0, |x| libm::fabs(*x)))
        .fold(0.0, f64::max);
    let eps = f64::EPSILON * t_norm.max(f64::MIN_POSITIVE);
    let cluster_gap = 1e-3 * t_norm;

    let mut found: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut cluster_start = 0;
    let mut last_shift = f64::INFINITY;
    for j in 0..k {
        if j > 0 && values[j - 1] - values[j] > cluster_gap {
            cluster_start = j;
        }
        // Coincident shifts would give the same vector; nudge them apart.
        let mut shift = values[j];
        if last_shift - shift < 10.0 * eps {
            shift = last_shift - 10.0 * eps;
        }
        last_shift = shift;
        let lu = TridiagLu::factor(&diag, &off, shift, eps);
        let mut x: Vec<f64> = (0..n).map(|i| 1.0 + libm::fmod(0.618_033_988_749_895 * (i + j + 1) as f64, 1.0)).collect();
        for _ in 0..4 {
            x = lu.solve(&x);
            for prev in &found[cluster_start..j] {
                let c = dot(&x, prev);
                for (xi, p) in x.iter_mut().zip(prev) {
                    *xi -= c * p;
                }
            }
            let nx = norm(&x);
            if nx == 0.0 || !nx.is_finite() {
                break;
            }
            x.iter_mut().for_each(|xi| *xi /= nx);
        }
        found.push(x);
    }

    // Back to the original basis: column-major `q` holds the Householder product.
    let mut vectors = Matrix::zeros(n, k);
    for (j, z) in found.iter().enumerate() {
        for (c, &zc) in z.iter().enumerate() {
            let col = &q[c * n..(c + 1) * n];
            for i in 0..n {
                vectors.data[i * k + j] += col[i] * zc;
            }
        }
    }
    SymEigen { values, vectors }
}

/// `T - shift I` for a symmetric tridiagonal `T`, factored by Gaussian
/// elimination with partial pivoting. `u2` is the fill-in from row swaps.
struct TridiagLu {
    u0: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    mult: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagLu {
    fn factor(diag: &[f64], off: &[f64], shift: f64, tiny: f64) -> Self {
        let n = diag.len();
        let guard = |x: f64| if x == 0.0 { tiny } else { x };
        let sup = |i: usize| if i + 1 < n { off[i + 1] } else { 0.0 };
        let mut lu = Self {
            u0: vec![0.0; n],
            u1: vec![0.0; n],
            u2: vec![0.0; n],
            mult: vec![0.0; n],
            swapped: vec![false; n],
        };
        // Pending row: entries at columns i and i + 1.
        let (mut p0, mut p1) = (diag[0] - shift, sup(0));
        for i in 0..n.saturating_sub(1) {
            let (q0, q1, q2) = (off[i + 1], diag[i + 1] - shift, sup(i + 1));
            if libm::fabs(p0) >= libm::fabs(q0) {
                let p0g = guard(p0);
                let m = q0 / p0g;
                lu.u0[i] = p0g;
                lu.u1[i] = p1;
                lu.mult[i] = m;
                (p0, p1) = (q1 - m * p1, q2);
            } else {
                let m = p0 / q0;
                lu.u0[i] = q0;
                lu.u1[i] = q1;
                lu.u2[i] = q2;
                lu.mult[i] = m;
                lu.swapped[i] = true;
                (p0, p1) = (p1 - m * q1, -m * q2);
            }
        }
        lu.u0[n - 1] = guard(p0);
        lu
    }

    fn solve(&self, y: &[f64]) -> Vec<f64> {
        let n = y.len();
        let mut z = vec![0.0; n];
        let mut pending = y[0];
        for i in 0..n - 1 {
            let next = y[i + 1];
            if self.swapped[i] {
                z[i] = next;
                pending -= self.mult[i] * next;
            } else {
                z[i] = pending;
                pending = next - self.mult[i] * pending;
            }
        }
        z[n - 1] = pending;
        for i in (0..n).rev() {
            let mut acc = z[i];
            if i + 1 < n {
                acc -= self.u1[i] * z[i + 1];
            }
            if i + 2 < n {
                acc -= self.u2[i] * z[i + 2];
            }
            z[i] = acc / self.u0[i];
        }
        z
    }
}

// Both routines keep the working matrix column-major so that the inner loops,
// which run down columns, touch contiguous memory.
fn tred2(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64]) {
    let idx = |i: usize, j: usize| j * n + i;
    for j in 0..n {
        d[j] = v[idx(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += libm::fabs(d[k]);
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[idx(i - 1, j)];
                v[idx(i, j)] = 0.0;
                v[idx(j, i)] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = libm::sqrt(h);
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[idx(j, i)] = f;
                g = e[j] + v[idx(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[idx(k, j)] * d[k];
                    e[k] += v[idx(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[idx(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[idx(i - 1, j)];
                v[idx(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }

    for i in 0..n - 1 {
        v[idx(n - 1, i)] = v[idx(i, i)];
        v[idx(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[idx(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[idx(k, i + 1)] * v[idx(k, j)];
                }
                for k in 0..=i {
                    v[idx(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[idx(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[idx(n - 1, j)];
        v[idx(n - 1, j)] = 0.0;
    }
    v[idx(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

fn tql2(n: usize, mut v: Option<&mut [f64]>, d: &mut [f64], e: &mut [f64]) {
    let idx = |i: usize, j: usize| j * n + i;
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(libm::fabs(d[l]) + libm::fabs(e[l]));
        let mut m = l;
        while m < n - 1 {
            if libm::fabs(e[m]) <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = libm::hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = libm::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(v) = v.as_deref_mut() {
                        for k in 0..n {
                            let h = v[idx(k, i + 1)];
                            v[idx(k, i + 1)] = s * v[idx(k, i)] + c * h;
                            v[idx(k, i)] = c * v[idx(k, i)] - s * h;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if libm::fabs(e[l]) <= eps * tst1 || iter > 64 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
}

/// Right singular vectors and singular values of a dense matrix.
#[derive(Debug, Clone)]
pub struct ThinSvd {
    /// All `min(rows, cols)` singular values, descending.
    pub singular_values: Vec<f64>,
    /// Right singular vectors as columns, ordered like `singular_values`.
    ///
    /// When the matrix is wide, directions whose singular value is
    /// numerically zero are omitted, so this may hold fewer columns.
    pub v: Matrix,
}

/// Thin SVD through the eigen-decomposition of the smaller Gram matrix.
pub fn thin_svd(a: &Matrix) -> ThinSvd {
    thin_svd_top(a, usize::MAX)
}

/// Like [`thin_svd`] but computes at most `k` singular vectors; all
/// singular values are still returned.
pub fn thin_svd_top(a: &Matrix, k: usize) -> ThinSvd {
    let (n, d) = (a.rows, a.cols);
    if n == 0 || d == 0 {
        return ThinSvd {
            singular_values: Vec::new(),
            v: Matrix::zeros(d, 0),
        };
    }
    if d <= n {
        let eig = sym_eigen_top(&a.gram_cols(), k);
        let singular_values = eig.values.iter().map(|&l| libm::sqrt(l.max(0.0))).collect();
        ThinSvd {
            singular_values,
            v: eig.vectors,
        }
    } else {
        let eig = sym_eigen_top(&a.gram_rows(), k);
        let singular_values: Vec<f64> =
            eig.values.iter().map(|&l| libm::sqrt(l.max(0.0))).collect();
        let tol = singular_values[0] * 1e-8;
        let mut columns = Vec::new();
        for (j, &s) in singular_values.iter().enumerate().take(eig.vectors.cols) {
            if s <= tol || s == 0.0 {
                break;
            }
            let u = eig.vectors.column(j);
            let mut vj = a.t_mul_vec(&u);
            for x in vj.iter_mut() {
                *x /= s;
            }
            columns.push(vj);
        }
        let columns = orthonormalize(columns);
        ThinSvd {
            singular_values,
            v: Matrix::from_columns(d, &columns),
        }
    }
}

/// Modified Gram-Schmidt with one re-orthogonalization pass.
///
/// Columns that collapse below `1e-10` of their original norm are dropped.
pub fn orthonormalize(columns: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(columns.len());
    for mut c in columns {
        let original = norm(&c);
        if original == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for q in &out {
                let p = dot(q, &c);
                for (ci, qi) in c.iter_mut().zip(q) {
                    *ci -= p * qi;
                }
            }
        }
        let n = norm(&c);
        if n <= 1e-10 * original {
            continue;
        }
        for ci in c.iter_mut() {
            *ci /= n;
        }
        out.push(c);
    }
    out
}

/// Principal angles (radians, ascending) between the column spans of two
/// matrices with orthonormal columns.
pub fn principal_angles(q1: &Matrix, q2: &Matrix) -> Vec<f64> {
    assert_eq!(q1.rows, q2.rows, "subspaces live in different spaces");
    let m = q1.transpose().matmul(q2);
    let k = m.rows.min(m.cols);
    let svd = thin_svd(&m);
    let mut cosines: Vec<f64> = svd.singular_values.into_iter().take(k).collect();
    cosines.resize(k, 0.0);
    cosines
        .into_iter()
        .map(|c| libm::acos(c.clamp(-1.0, 1.0)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_of_diagonal() {
        let mut a = Matrix::zeros(3, 3);
        a.set(0, 0, 1.0);
        a.set(1, 1, 3.0);
        a.set(2, 2, 2.0);
        let e = sym_eigen(&a);
        assert_eq!(e.values.len(), 3);
        for (got, want) in e.values.iter().zip([3.0, 2.0, 1.0]) {
            assert!((got - want).abs() < 1e-14);
        }
        assert!((e.vectors.get(1, 0).abs() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eigen_2x2() {
        // [[2, 1], [1, 2]] has eigenvalues 3 and 1.
        let a = Matrix::from_row_major(2, 2, vec![2.0, 1.0, 1.0, 2.0]);
        let e = sym_eigen(&a);
        assert!((e.values[0] - 3.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
        let v0 = e.vectors.column(0);
        assert!((v0[0].abs() - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-14);
        assert!((v0[0] - v0[1]).abs() < 1e-14);
    }

    #[test]
    fn one_by_one() {
        let e = sym_eigen(&Matrix::from_row_major(1, 1, vec![4.0]));
        assert_eq!(e.values, vec![4.0]);
        let s = thin_svd(&Matrix::from_row_major(1, 1, vec![-2.0]));
        assert_eq!(s.singular_values, vec![2.0]);
    }

    #[test]
    fn wide_svd_drops_null_directions() {
        // Two identical rows in 3D: rank one.
        let a = Matrix::from_row_major(2, 3, vec![1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        let s = thin_svd(&a);
        assert_eq!(s.singular_values.len(), 2);
        assert!((s.singular_values[0] - core::f64::consts::SQRT_2).abs() < 1e-14);
        assert_eq!(s.v.cols(), 1);
    }

    #[test]
    fn gram_schmidt_drops_dependent_columns() {
        let q = orthonormalize(vec![vec![1.0, 1.0], vec![2.0, 2.0], vec![0.0, 3.0]]);
        assert_eq!(q.len(), 2);
        assert!(dot(&q[0], &q[1]).abs() < 1e-15);
    }

    #[test]
    fn principal_angle_between_axes() {
        let x = Matrix::from_columns(2, &[vec![1.0, 0.0]]);
        let y = Matrix::from_columns(2, &[vec![0.0, 1.0]]);
        let a = principal_angles(&x, &y);
        assert!((a[0] - core::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert!(principal_angles(&x, &x)[0] < 1e-7);
    }

    fn check_top(a: &Matrix, k: usize, tol: f64) {
        let full = sym_eigen(a);
        let top = sym_eigen_top(a, k);
        assert_eq!(top.values, full.values);
        assert_eq!(top.vectors.cols(), k);
        for j in 0..k {
            let v = top.vectors.column(j);
            let av = a.mul_vec(&v);
            let resid: f64 = av.iter().zip(&v).map(|(p, q)| (p - top.values[j] * q).abs()).fold(0.0, f64::max);
            assert!(resid < tol, "residual {resid} for pair {j}");
            for i in 0..j {
                assert!(dot(&v, &top.vectors.column(i)).abs() < tol, "columns {i}, {j} not orthogonal");
            }
        }
    }

    #[test]
    fn top_eigenpairs_of_generic_matrix() {
        // Deterministic pseudo-random symmetric 40x40.
        let n = 40;
        let mut a = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let x = libm::sin((i * 31 + j * 17 + 3) as f64);
                a.set(i, j, x);
                a.set(j, i, x);
            }
        }
        check_top(&a, 6, 1e-10);
    }

    #[test]
    fn top_eigenpairs_with_repeated_values() {
        // Circulant Gram matrices have eigenvalues in equal pairs.
        let n = 48;
        let base: Vec<f64> = (0..n).map(|i| libm::cos(i as f64 * 0.7) + 0.3 * libm::sin(i as f64 * 2.9)).collect();
        let mut rows = Vec::with_capacity(n * n);
        for s in 0..n {
            rows.extend((0..n).map(|i| base[(i + n - s) % n]));
        }
        let g = Matrix::from_row_major(n, n, rows).gram_cols();
        check_top(&g, 7, 1e-9);
    }
}
