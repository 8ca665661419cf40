//! Dense real-matrix kernels for the small sizes this crate needs (≤ 12,
//! plus the 36×36 system behind the Lyapunov solve).

#![allow(clippy::needless_range_loop)]

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::EPS_STAB_REL;

/// Row-major dense matrix.
#[derive(Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::Domain(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite matrix entry {bad}")));
        }
        Ok(Mat { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diag(&vec![1.0; n])
    }

    pub fn diag(d: &[f64]) -> Self {
        let n = d.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Panics on ragged input; meant for literals.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.as_ref().len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.as_ref().len(), c, "ragged rows");
            data.extend_from_slice(row.as_ref());
        }
        Mat::new(r, c, data).expect("finite literal")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.data[k * other.cols + j];
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Mat) -> Mat {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    fn zip_with(&self, other: &Mat, f: impl Fn(f64, f64) -> f64) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// (M + Mᵀ)/2.
    pub fn symmetrized(&self) -> Mat {
        assert!(self.is_square());
        let mut s = self.clone();
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let v = 0.5 * (self[(i, j)] + self[(j, i)]);
                s[(i, j)] = v;
                s[(j, i)] = v;
            }
        }
        s
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    /// Copies the submatrix at the given row and column indices.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Mat {
        let mut out = Mat::zeros(rows.len(), cols.len());
        for (oi, &i) in rows.iter().enumerate() {
            for (oj, &j) in cols.iter().enumerate() {
                out[(oi, oj)] = self[(i, j)];
            }
        }
        out
    }

    /// Symplectic form for `modes` modes: block-diagonal [[0, 1], [−1, 0]].
    pub fn symplectic_form(modes: usize) -> Mat {
        let mut w = Mat::zeros(2 * modes, 2 * modes);
        for k in 0..modes {
            w[(2 * k, 2 * k + 1)] = 1.0;
            w[(2 * k + 1, 2 * k)] = -1.0;
        }
        w
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{:>13.6e} ", self[(i, j)])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

pub fn frobenius_norm(a: &Mat) -> f64 {
    a.data.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Determinant. Closed forms up to 3×3, partial-pivot LU above.
pub fn det(a: &Mat) -> f64 {
    assert!(a.is_square(), "det of non-square matrix");
    let n = a.rows;
    match n {
        0 => 1.0,
        1 => a[(0, 0)],
        2 => a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)],
        3 => {
            a[(0, 0)] * (a[(1, 1)] * a[(2, 2)] - a[(1, 2)] * a[(2, 1)])
                - a[(0, 1)] * (a[(1, 0)] * a[(2, 2)] - a[(1, 2)] * a[(2, 0)])
                + a[(0, 2)] * (a[(1, 0)] * a[(2, 1)] - a[(1, 1)] * a[(2, 0)])
        }
        _ => {
            let mut m = a.clone();
            let mut det = 1.0;
            for k in 0..n {
                let p = (k..n)
                    .max_by(|&x, &y| m[(x, k)].abs().total_cmp(&m[(y, k)].abs()))
                    .unwrap();
                if m[(p, k)] == 0.0 {
                    return 0.0;
                }
                if p != k {
                    swap_rows(&mut m, p, k);
                    det = -det;
                }
                let piv = m[(k, k)];
                det *= piv;
                for i in (k + 1)..n {
                    let f = m[(i, k)] / piv;
                    for j in k..n {
                        m[(i, j)] -= f * m[(k, j)];
                    }
                }
            }
            det
        }
    }
}

fn swap_rows(m: &mut Mat, a: usize, b: usize) {
    let c = m.cols;
    for j in 0..c {
        m.data.swap(a * c + j, b * c + j);
    }
}

const MAX_QR_ITERS: usize = 60;

/// All eigenvalues of a general real square matrix: balancing, reduction to
/// upper Hessenberg form by stabilized elimination, then the shifted
/// double-step QR iteration.
pub fn eigenvalues(a: &Mat) -> Result<Vec<Complex64>> {
    assert!(a.is_square(), "eigenvalues of non-square matrix");
    let n = a.rows;
    let mut h: Vec<Vec<f64>> = (0..n).map(|i| a.data[i * n..(i + 1) * n].to_vec()).collect();
    balance(&mut h);
    hessenberg(&mut h);
    hqr(&mut h)
}

/// Real parts of all eigenvalues, complex pairs contributing twice.
pub fn eigen_real_parts(a: &Mat) -> Result<Vec<f64>> {
    Ok(eigenvalues(a)?.into_iter().map(|z| z.re).collect())
}

fn balance(a: &mut [Vec<f64>]) {
    const RADIX: f64 = 2.0;
    let n = a.len();
    let sqrdx = RADIX * RADIX;
    loop {
        let mut done = true;
        for i in 0..n {
            let (mut r, mut c) = (0.0, 0.0);
            for j in 0..n {
                if j != i {
                    c += a[j][i].abs();
                    r += a[i][j].abs();
                }
            }
            if c != 0.0 && r != 0.0 {
                let mut g = r / RADIX;
                let mut f = 1.0;
                let s = c + r;
                while c < g {
                    f *= RADIX;
                    c *= sqrdx;
                }
                g = r * RADIX;
                while c > g {
                    f /= RADIX;
                    c /= sqrdx;
                }
                if (c + r) / f < 0.95 * s {
                    done = false;
                    let g = 1.0 / f;
                    for j in 0..n {
                        a[i][j] *= g;
                    }
                    for row in a.iter_mut() {
                        row[i] *= f;
                    }
                }
            }
        }
        if done {
            break;
        }
    }
}

fn hessenberg(a: &mut [Vec<f64>]) {
    let n = a.len();
    for m in 1..n.saturating_sub(1) {
        let mut x: f64 = 0.0;
        let mut i = m;
        for j in m..n {
            if a[j][m - 1].abs() > x.abs() {
                x = a[j][m - 1];
                i = j;
            }
        }
        if i != m {
            for j in (m - 1)..n {
                let t = a[i][j];
                a[i][j] = a[m][j];
                a[m][j] = t;
            }
            for row in a.iter_mut() {
                row.swap(i, m);
            }
        }
        if x != 0.0 {
            for i in (m + 1)..n {
                let mut y = a[i][m - 1];
                if y != 0.0 {
                    y /= x;
                    a[i][m - 1] = y;
                    for j in m..n {
                        a[i][j] -= y * a[m][j];
                    }
                    for row in a.iter_mut() {
                        row[m] += y * row[i];
                    }
                }
            }
        }
    }
    // Clear the elimination multipliers stored below the subdiagonal.
    for i in 2..n {
        for j in 0..(i - 1) {
            a[i][j] = 0.0;
        }
    }
}

fn hqr(a: &mut [Vec<f64>]) -> Result<Vec<Complex64>> {
    let n = a.len();
    let mut wr = vec![0.0; n];
    let mut wi = vec![0.0; n];
    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += a[i][j].abs();
        }
    }
    let mut nn = n as isize - 1;
    let mut t = 0.0;
    while nn >= 0 {
        let nu = nn as usize;
        let mut its = 0;
        loop {
            // Find a negligible subdiagonal element.
            let mut l = nu;
            while l >= 1 {
                let mut s = a[l - 1][l - 1].abs() + a[l][l].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[l][l - 1].abs() + s == s {
                    a[l][l - 1] = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = a[nu][nu];
            if l == nu {
                wr[nu] = x + t;
                wi[nu] = 0.0;
                nn -= 1;
                break;
            }
            let mut y = a[nu - 1][nu - 1];
            let mut w = a[nu][nu - 1] * a[nu - 1][nu];
            if l == nu - 1 {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let mut z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    z = p + z.copysign(p);
                    wr[nu - 1] = x + z;
                    wr[nu] = x + z;
                    if z != 0.0 {
                        wr[nu] = x - w / z;
                    }
                    wi[nu - 1] = 0.0;
                    wi[nu] = 0.0;
                } else {
                    wr[nu - 1] = x + p;
                    wr[nu] = x + p;
                    wi[nu - 1] = -z;
                    wi[nu] = z;
                }
                nn -= 2;
                break;
            }
            if its == MAX_QR_ITERS {
                return Err(Error::EigenNoConvergence);
            }
            if its == 10 || its == 20 {
                // Exceptional shift.
                t += x;
                for i in 0..=nu {
                    a[i][i] -= x;
                }
                let s = a[nu][nu - 1].abs() + a[nu - 1][nu - 2].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            let (mut p, mut q, mut r): (f64, f64, f64);
            let mut m = nu - 2;
            loop {
                let z = a[m][m];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / a[m + 1][m] + a[m][m + 1];
                q = a[m + 1][m + 1] - z - rr - ss;
                r = a[m + 2][m + 1];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[m][m - 1].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[m - 1][m - 1].abs() + z.abs() + a[m + 1][m + 1].abs());
                if u + v == v {
                    break;
                }
                m -= 1;
            }
            for i in (m + 2)..=nu {
                a[i][i - 2] = 0.0;
                if i != m + 2 {
                    a[i][i - 3] = 0.0;
                }
            }
            let mut k = m;
            while k < nu {
                if k != m {
                    p = a[k][k - 1];
                    q = a[k + 1][k - 1];
                    r = 0.0;
                    if k + 1 != nu {
                        r = a[k + 2][k - 1];
                    }
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = (p * p + q * q + r * r).sqrt().copysign(p);
                if s != 0.0 {
                    if k == m {
                        if l != m {
                            a[k][k - 1] = -a[k][k - 1];
                        }
                    } else {
                        a[k][k - 1] = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    let z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nu {
                        p = a[k][j] + q * a[k + 1][j];
                        if k + 1 != nu {
                            p += r * a[k + 2][j];
                            a[k + 2][j] -= p * z;
                        }
                        a[k + 1][j] -= p * y;
                        a[k][j] -= p * x;
                    }
                    let mmin = if nu < k + 3 { nu } else { k + 3 };
                    for i in l..=mmin {
                        p = x * a[i][k] + y * a[i][k + 1];
                        if k + 1 != nu {
                            p += z * a[i][k + 2];
                            a[i][k + 2] -= p * r;
                        }
                        a[i][k + 1] -= p * q;
                        a[i][k] -= p;
                    }
                }
                k += 1;
            }
        }
    }
    Ok(wr
        .into_iter()
        .zip(wi)
        .map(|(re, im)| Complex64::new(re, im))
        .collect())
}

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations,
/// ascending. Only the upper triangle is read.
pub fn symmetric_eigenvalues(a: &Mat) -> Vec<f64> {
    assert!(a.is_square());
    let n = a.rows;
    let mut m = a.symmetrized();
    let scale = frobenius_norm(&m).max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[(i, j)] * m[(i, j)];
            }
        }
        if off.sqrt() <= 1e-17 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Eigenvalues of the Hermitian matrix `re + i·im` (`re` symmetric, `im`
/// antisymmetric), ascending. Uses the real 2n×2n embedding
/// [[re, −im], [im, re]], whose spectrum is that of the Hermitian matrix with
/// every eigenvalue doubled.
pub fn hermitian_eigenvalues(re: &Mat, im: &Mat) -> Vec<f64> {
    let n = re.rows;
    let mut big = Mat::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            big[(i, j)] = re[(i, j)];
            big[(i + n, j + n)] = re[(i, j)];
            big[(i, j + n)] = -im[(i, j)];
            big[(i + n, j)] = im[(i, j)];
        }
    }
    let all = symmetric_eigenvalues(&big);
    all.into_iter().step_by(2).collect()
}

/// Stability threshold for a drift matrix: −eps_rel·max|a_ij|.
pub fn stability_margin(a: &Mat, eps_rel: f64) -> f64 {
    -eps_rel * a.max_abs()
}

/// Solves A·V + V·Aᵀ = −D for symmetric V by vectorizing into the
/// n²×n² system (I⊗A + A⊗I)·vec(V) = −vec(D), with one round of iterative
/// refinement.
pub fn lyapunov_solve(a: &Mat, d: &Mat) -> Result<Mat> {
    lyapunov_solve_with_margin(a, d, EPS_STAB_REL)
}

/// [`lyapunov_solve`] with an explicit relative stability margin.
pub fn lyapunov_solve_with_margin(a: &Mat, d: &Mat, eps_rel: f64) -> Result<Mat> {
    assert!(
        a.is_square() && d.is_square() && a.rows == d.rows,
        "lyapunov shape mismatch"
    );
    let n = a.rows;
    let max_re = eigen_real_parts(a)?.into_iter().fold(f64::NEG_INFINITY, f64::max);
    if max_re >= stability_margin(a, eps_rel) {
        return Err(Error::Unstable { max_real_eig: max_re });
    }

    let nn = n * n;
    let mut k = Mat::zeros(nn, nn);
    for i in 0..n {
        for j in 0..n {
            let row = i * n + j;
            for l in 0..n {
                k[(row, l * n + j)] += a[(i, l)];
                k[(row, i * n + l)] += a[(j, l)];
            }
        }
    }
    let lu = Lu::factor(k)?;
    let rhs: Vec<f64> = d.data.iter().map(|v| -v).collect();
    let mut x = lu.solve(&rhs);

    let v = Mat {
        rows: n,
        cols: n,
        data: x.clone(),
    };
    let resid = lyapunov_residual(a, &v, d);
    let corr = lu.solve(&resid.data.iter().map(|r| -r).collect::<Vec<_>>());
    for (xi, ci) in x.iter_mut().zip(corr) {
        *xi += ci;
    }
    Ok(Mat {
        rows: n,
        cols: n,
        data: x,
    }
    .symmetrized())
}

/// A·V + V·Aᵀ + D.
pub fn lyapunov_residual(a: &Mat, v: &Mat, d: &Mat) -> Mat {
    a.matmul(v).add(&v.matmul(&a.transpose())).add(d)
}

struct Lu {
    m: Mat,
    perm: Vec<usize>,
}

impl Lu {
    fn factor(mut m: Mat) -> Result<Lu> {
        let n = m.rows;
        let scale = m.max_abs();
        if scale == 0.0 {
            return Err(Error::SingularSolve);
        }
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&x, &y| m[(x, k)].abs().total_cmp(&m[(y, k)].abs()))
                .unwrap();
            if m[(p, k)].abs() <= 1e-14 * scale {
                return Err(Error::SingularSolve);
            }
            if p != k {
                swap_rows(&mut m, p, k);
                perm.swap(p, k);
            }
            let piv = m[(k, k)];
            for i in (k + 1)..n {
                let f = m[(i, k)] / piv;
                if f == 0.0 {
                    continue;
                }
                m[(i, k)] = f;
                for j in (k + 1)..n {
                    m[(i, j)] -= f * m[(k, j)];
                }
            }
        }
        Ok(Lu { m, perm })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.m.rows;
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = y[i];
            for j in 0..i {
                s -= self.m[(i, j)] * y[j];
            }
            y[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in (i + 1)..n {
                s -= self.m[(i, j)] * y[j];
            }
            y[i] = s / self.m[(i, i)];
        }
        y
    }
}
