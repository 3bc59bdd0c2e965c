//! Small dense linear algebra: Cholesky factorization, SPD solves, a cyclic
//! Jacobi symmetric eigensolver and the symmetric-definite generalized
//! eigenproblem built on them.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Dense row-major matrix.
#[derive(Clone, PartialEq)]
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
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} values, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::Dimension(format!(
                    "row {i} has {} columns, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn column_vector(values: &[f64]) -> Self {
        Self {
            rows: values.len(),
            cols: 1,
            data: values.to_vec(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, values: &[f64]) {
        for (i, v) in values.iter().enumerate() {
            self[(i, j)] = *v;
        }
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Self {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let src = other.row(k);
                for (o, b) in out.row_mut(i).iter_mut().zip(src) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "mul_vec dimension mismatch");
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    pub fn add(&self, other: &Matrix) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        if self.rows != self.cols {
            return false;
        }
        let scale = self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1.0);
        (0..self.rows).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol * scale))
    }

    /// Adds `outer(v, v) * weight` in place.
    pub fn add_outer(&mut self, v: &[f64], weight: f64) {
        let n = v.len();
        debug_assert_eq!((self.rows, self.cols), (n, n));
        for i in 0..n {
            let vi = v[i] * weight;
            for j in 0..n {
                self.data[i * n + j] += vi * v[j];
            }
        }
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Lower-triangular Cholesky factor `L` with `A = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: Matrix,
}

impl Cholesky {
    /// Fails with [`Error::NotPositiveDefinite`] at the first pivot that is
    /// not strictly positive.
    pub fn factor(a: &Matrix) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::Dimension(format!(
                "Cholesky needs a square matrix, got {}x{}",
                n,
                a.ncols()
            )));
        }
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if d <= 0.0 || !d.is_finite() {
                return Err(Error::NotPositiveDefinite { pivot: j });
            }
            let djj = d.sqrt();
            l[(j, j)] = djj;
            for i in j + 1..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / djj;
            }
        }
        Ok(Self { l })
    }

    pub fn lower(&self) -> &Matrix {
        &self.l
    }

    /// Solves `L y = b` in place.
    pub fn forward(&self, b: &mut [f64]) {
        let n = self.l.nrows();
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= self.l[(i, k)] * b[k];
            }
            b[i] = s / self.l[(i, i)];
        }
    }

    /// Solves `Lᵀ x = y` in place.
    pub fn backward(&self, y: &mut [f64]) {
        let n = self.l.nrows();
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= self.l[(k, i)] * y[k];
            }
            y[i] = s / self.l[(i, i)];
        }
    }

    /// Solves `A x = b` for each column of `b`.
    pub fn solve(&self, b: &Matrix) -> Matrix {
        let mut x = Matrix::zeros(b.nrows(), b.ncols());
        for j in 0..b.ncols() {
            let mut col = b.column(j);
            self.forward(&mut col);
            self.backward(&mut col);
            x.set_column(j, &col);
        }
        x
    }
}

/// Solves `A X = B` for symmetric positive definite `A`.
pub fn solve_spd(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.nrows() != b.nrows() {
        return Err(Error::Dimension(format!(
            "A is {}x{} but B has {} rows",
            a.nrows(),
            a.ncols(),
            b.nrows()
        )));
    }
    if !a.is_symmetric(1e-10) {
        return Err(Error::Input("matrix is not symmetric".into()));
    }
    Ok(Cholesky::factor(a)?.solve(b))
}

/// Eigenpairs sorted by nonincreasing eigenvalue; eigenvectors are columns.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

const JACOBI_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. The result is
/// accepted once the off-diagonal Frobenius norm is below 1e-12 of the
/// matrix norm.
pub fn symmetric_eigen(a: &Matrix) -> Result<Eigen> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Dimension("eigendecomposition needs a square matrix".into()));
    }
    let mut a = a.clone();
    // symmetrize away rounding noise
    for i in 0..n {
        for j in 0..i {
            let m = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = m;
            a[(j, i)] = m;
        }
    }
    let mut v = Matrix::identity(n);
    let total = a.frobenius_norm();

    // Sweeps continue past the norm test until no entry is significant
    // against its own diagonal pair; a norm test alone loses the small
    // eigenvectors when the spectrum spans many orders of magnitude.
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotations = 0;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let scale = (a[(p, p)] * a[(q, q)]).abs().sqrt();
                if apq.abs() <= f64::EPSILON * scale || apq.abs() <= f64::EPSILON * f64::EPSILON * total
                {
                    continue;
                }
                rotations += 1;
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate(&mut a, &mut v, p, q, c, s);
            }
        }
        if rotations == 0 {
            break;
        }
    }
    if off_diagonal_norm(&a) > JACOBI_TOL * total * 10.0 {
        return Err(Error::Input("Jacobi iteration did not converge".into()));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &v.column(src));
    }
    Ok(Eigen { values, vectors })
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// Applies the rotation `A <- Jᵀ A J`, `V <- V J` in the (p, q) plane.
fn rotate(a: &mut Matrix, v: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    let n = a.nrows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// Solution of `Sb v = λ Sw v`.
#[derive(Debug, Clone)]
pub struct GeneralizedEigen {
    /// Nonincreasing.
    pub values: Vec<f64>,
    /// `p × m`, columns Sw-orthonormal.
    pub vectors: Matrix,
    /// Whether the ridge had to be added to `Sw`.
    pub regularized: bool,
}

/// Top `m` eigenpairs of the symmetric-definite pencil (Sb, Sw).
///
/// The pencil is reduced to the standard problem `L⁻¹ Sb L⁻ᵀ y = λ y` with
/// `Sw = L Lᵀ`, and `v = L⁻ᵀ y`. When `Sw` is not numerically positive
/// definite, `ridge · trace(Sw)/p · I` is added once before giving up with
/// [`Error::SingularScatter`] naming the failing column index.
pub fn generalized_eigen(sb: &Matrix, sw: &Matrix, m: usize, ridge: f64) -> Result<GeneralizedEigen> {
    let p = sw.nrows();
    if sw.ncols() != p || sb.nrows() != p || sb.ncols() != p {
        return Err(Error::Dimension("Sb and Sw must be square and the same size".into()));
    }
    if m > p {
        return Err(Error::Dimension(format!(
            "requested {m} eigenpairs from a {p}x{p} problem"
        )));
    }

    let (chol, regularized) = match Cholesky::factor(sw) {
        Ok(c) => (c, false),
        Err(_) if ridge > 0.0 => {
            let shift = ridge * sw.trace() / p as f64;
            let shifted = sw.add(&Matrix::identity(p).scale(shift));
            match Cholesky::factor(&shifted) {
                Ok(c) => (c, true),
                Err(Error::NotPositiveDefinite { pivot }) => {
                    return Err(Error::SingularScatter(vec![format!("column {pivot}")]))
                }
                Err(e) => return Err(e),
            }
        }
        Err(Error::NotPositiveDefinite { pivot }) => {
            return Err(Error::SingularScatter(vec![format!("column {pivot}")]))
        }
        Err(e) => return Err(e),
    };

    // C = L⁻¹ Sb L⁻ᵀ, built column by column: first W = L⁻¹ Sb, then
    // C = L⁻¹ Wᵀ (Sb and C symmetric).
    let mut w = Matrix::zeros(p, p);
    for j in 0..p {
        let mut col = sb.column(j);
        chol.forward(&mut col);
        w.set_column(j, &col);
    }
    let wt = w.transpose();
    let mut c = Matrix::zeros(p, p);
    for j in 0..p {
        let mut col = wt.column(j);
        chol.forward(&mut col);
        c.set_column(j, &col);
    }

    let eig = symmetric_eigen(&c)?;
    let mut vectors = Matrix::zeros(p, m);
    for k in 0..m {
        let mut y = eig.vectors.column(k);
        chol.backward(&mut y);
        // deterministic sign: largest-magnitude component positive
        let pivot = y
            .iter()
            .enumerate()
            .fold((0, 0.0_f64), |best, (i, v)| if v.abs() > best.1.abs() + 1e-12 { (i, *v) } else { best });
        if pivot.1 < 0.0 {
            y.iter_mut().for_each(|v| *v = -*v);
        }
        vectors.set_column(k, &y);
    }
    Ok(GeneralizedEigen {
        values: eig.values[..m].to_vec(),
        vectors,
        regularized,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_identity() {
        let b = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]).unwrap();
        let x = solve_spd(&Matrix::identity(3), &b).unwrap();
        assert_eq!(x, b);
    }

    #[test]
    fn solve_diagonal() {
        let x = solve_spd(&Matrix::diag(&[2.0, 8.0]), &Matrix::column_vector(&[2.0, 8.0])).unwrap();
        assert!(x.as_slice().iter().all(|v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn cholesky_reports_pivot() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [2.0, 1.0]]).unwrap();
        assert!(matches!(
            solve_spd(&a, &Matrix::column_vector(&[1.0, 1.0])),
            Err(Error::NotPositiveDefinite { pivot: 1 })
        ));
        let a = Matrix::diag(&[0.0, 1.0]);
        assert!(matches!(
            Cholesky::factor(&a),
            Err(Error::NotPositiveDefinite { pivot: 0 })
        ));
    }

    #[test]
    fn rejects_asymmetric() {
        let a = Matrix::from_rows(&[[2.0, 1.0], [0.0, 2.0]]).unwrap();
        assert!(matches!(
            solve_spd(&a, &Matrix::column_vector(&[1.0, 1.0])),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn toy_generalized_problem() {
        let sw = Matrix::diag(&[2.0, 2.0]);
        let sb = Matrix::from_rows(&[[32.0, 32.0], [32.0, 32.0]]).unwrap();
        let ge = generalized_eigen(&sb, &sw, 2, 0.0).unwrap();
        assert!((ge.values[0] - 32.0).abs() < 1e-12);
        assert!(ge.values[1].abs() < 1e-12);
        let v = ge.vectors.column(0);
        let cos = (v[0] + v[1]) / (norm(&v) * 2f64.sqrt());
        assert!((cos - 1.0).abs() < 1e-12);
        // Sw-normalized: 2 |v|² = 1
        assert!((2.0 * dot(&v, &v) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_between_scatter() {
        let ge = generalized_eigen(&Matrix::zeros(3, 3), &Matrix::identity(3), 3, 0.0).unwrap();
        assert!(ge.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn singular_within_scatter() {
        let sw = Matrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap();
        let sb = Matrix::identity(2);
        assert!(matches!(
            generalized_eigen(&sb, &sw, 1, 0.0),
            Err(Error::SingularScatter(_))
        ));
        let ge = generalized_eigen(&sb, &sw, 1, 1e-8).unwrap();
        assert!(ge.regularized);
        let sw = Matrix::zeros(2, 2);
        assert!(matches!(
            generalized_eigen(&sb, &sw, 1, 1e-8),
            Err(Error::SingularScatter(_))
        ));
    }

    #[test]
    fn jacobi_diagonal_input() {
        let e = symmetric_eigen(&Matrix::diag(&[1.0, 3.0, 2.0])).unwrap();
        assert_eq!(e.values, vec![3.0, 2.0, 1.0]);
        assert_eq!(e.vectors.column(0), vec![0.0, 1.0, 0.0]);
    }
}
