//! Dense complex matrices.
//!
//! [`ComplexMatrix`] stores entries row-major and carries every transform in
//! the crate: target unitaries, noisy copies, averaged (sub-unitary)
//! transforms and the repeated-index sub-matrices fed to permanents.
//!
//! The on-disk form is the JSON document
//! `{"rows": R, "cols": C, "data": [[re, im], ...]}` with `data` row-major.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomStream;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixFile", into = "MatrixFile")]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct MatrixFile {
    rows: usize,
    cols: usize,
    data: Vec<[f64; 2]>,
}

impl TryFrom<MatrixFile> for ComplexMatrix {
    type Error = Error;

    fn try_from(f: MatrixFile) -> Result<Self> {
        let data = f.data.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        ComplexMatrix::new(f.rows, f.cols, data)
    }
}

impl From<ComplexMatrix> for MatrixFile {
    fn from(m: ComplexMatrix) -> Self {
        MatrixFile {
            rows: m.rows,
            cols: m.cols,
            data: m.data.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    /// Builds a matrix from row-major data, rejecting length mismatches and
    /// non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Format(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Format("non-finite matrix entry".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_diag(diag: &[Complex64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from nested rows. Panics on ragged input; intended for
    /// literals in code and tests.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self {
            rows: r,
            cols: c,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Self {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
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

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<Complex64>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn require_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> ComplexMatrix {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(c, r)] = self[(r, c)].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> ComplexMatrix {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(c, r)] = self[(r, c)];
            }
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> ComplexMatrix {
        self.scale(Complex64::new(s, 0.0))
    }

    fn zip_with(&self, other: &ComplexMatrix, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<ComplexMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn try_add(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn try_sub(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> Result<f64> {
        Ok(self.try_sub(other)?.max_abs())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest singular value: square root of the top eigenvalue of a†a.
    pub fn operator_norm(&self) -> f64 {
        if self.data.is_empty() {
            return 0.0;
        }
        let gram = self.dagger().matmul(self).expect("a† a is always conformable");
        let (vals, _) = eig_hermitian_unchecked(&gram);
        vals.last().copied().unwrap_or(0.0).max(0.0).sqrt()
    }

    /// `‖U†U − I‖_op`, or an error for non-square input.
    pub fn unitarity_error(&self) -> Result<f64> {
        let n = self.require_square()?;
        let g = self.dagger().matmul(self)?;
        Ok(g.try_sub(&Self::identity(n))?.operator_norm())
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_error().is_ok_and(|e| e <= tol)
    }

    pub fn require_unitary(&self, tol: f64) -> Result<()> {
        let err = self.unitarity_error()?;
        if err > tol {
            Err(Error::NotUnitary(err))
        } else {
            Ok(())
        }
    }

    /// Determinant by LU factorisation with partial pivoting.
    pub fn determinant(&self) -> Result<Complex64> {
        let n = self.require_square()?;
        let mut a = self.clone();
        let mut det = ONE;
        for k in 0..n {
            let (piv, pmax) = (k..n)
                .map(|r| (r, a[(r, k)].norm()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if pmax == 0.0 {
                return Ok(ZERO);
            }
            if piv != k {
                for c in 0..n {
                    a.data.swap(k * n + c, piv * n + c);
                }
                det = -det;
            }
            let p = a[(k, k)];
            det *= p;
            for r in k + 1..n {
                let f = a[(r, k)] / p;
                if f == ZERO {
                    continue;
                }
                for c in k..n {
                    let v = a[(k, c)];
                    a[(r, c)] -= f * v;
                }
            }
        }
        Ok(det)
    }

    /// Selects rows and columns by index; repetitions are allowed.
    pub fn sub_matrix(&self, row_idx: &[usize], col_idx: &[usize]) -> Result<ComplexMatrix> {
        for &r in row_idx {
            if r >= self.rows {
                return Err(Error::IndexOutOfRange {
                    index: r,
                    dim: self.rows,
                });
            }
        }
        for &c in col_idx {
            if c >= self.cols {
                return Err(Error::IndexOutOfRange {
                    index: c,
                    dim: self.cols,
                });
            }
        }
        let mut data = Vec::with_capacity(row_idx.len() * col_idx.len());
        for &r in row_idx {
            for &c in col_idx {
                data.push(self[(r, c)]);
            }
        }
        Ok(ComplexMatrix {
            rows: row_idx.len(),
            cols: col_idx.len(),
            data,
        })
    }

    /// Contiguous block starting at `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Result<ComplexMatrix> {
        let ri: Vec<usize> = (r0..r0 + rows).collect();
        let ci: Vec<usize> = (c0..c0 + cols).collect();
        self.sub_matrix(&ri, &ci)
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &ComplexMatrix) -> ComplexMatrix {
        let (r, c) = (self.rows * other.rows, self.cols * other.cols);
        let mut out = Self::zeros(r, c);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out[(i * other.rows + k, j * other.cols + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<ComplexMatrix> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of range");
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of range");
        &mut self.data[r * self.cols + c]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_add(rhs).expect("matrix dimensions must agree")
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_sub(rhs).expect("matrix dimensions must agree")
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix dimensions must agree")
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations. Returns eigenvalues in ascending order and the unitary whose
/// columns are the matching eigenvectors, so `h = W diag(λ) W†`.
pub fn eig_hermitian(h: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    h.require_square()?;
    let dev = h.try_sub(&h.dagger())?.max_abs();
    if dev >= 1e-10 {
        return Err(Error::NotHermitian(dev));
    }
    Ok(eig_hermitian_unchecked(h))
}

fn eig_hermitian_unchecked(h: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = h.rows;
    // symmetrise so tiny rounding asymmetries do not stall the sweeps
    let mut a = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = (h[(i, j)] + h[(j, i)].conj()) * 0.5;
        }
    }
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let b = a[(p, q)];
                let bmod = b.norm();
                if bmod <= 1e-300 {
                    continue;
                }
                let phase = b / bmod;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * bmod);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // G = diag(1, conj(phase)) · [[c, s], [-s, c]]
                let g_pp = Complex64::new(c, 0.0);
                let g_pq = Complex64::new(s, 0.0);
                let g_qp = -phase.conj() * s;
                let g_qq = phase.conj() * c;

                for r in 0..n {
                    let ap = a[(r, p)];
                    let aq = a[(r, q)];
                    a[(r, p)] = ap * g_pp + aq * g_qp;
                    a[(r, q)] = ap * g_pq + aq * g_qq;
                }
                for col in 0..n {
                    let ap = a[(p, col)];
                    let aq = a[(q, col)];
                    a[(p, col)] = g_pp.conj() * ap + g_qp.conj() * aq;
                    a[(q, col)] = g_pq.conj() * ap + g_qq.conj() * aq;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);

                for r in 0..n {
                    let vp = v[(r, p)];
                    let vq = v[(r, q)];
                    v[(r, p)] = vp * g_pp + vq * g_qp;
                    v[(r, q)] = vp * g_pq + vq * g_qq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let vals = order.iter().map(|&i| a[(i, i)].re).collect();
    let rows: Vec<usize> = (0..n).collect();
    let vecs = v.sub_matrix(&rows, &order).expect("permutation is in range");
    (vals, vecs)
}

/// Unitary discrete Fourier transform, `F_jk = exp(2πi jk / N) / √N`.
pub fn dft(n: usize) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("DFT dimension must be at least 1".into()));
    }
    let norm = 1.0 / (n as f64).sqrt();
    let mut f = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        for k in 0..n {
            // reduce jk mod n before scaling so large products keep full precision
            let e = ((j * k) % n) as f64 / n as f64;
            f[(j, k)] = Complex64::from_polar(norm, 2.0 * std::f64::consts::PI * e);
        }
    }
    Ok(f)
}

/// Haar-random unitary: QR of a standard complex Ginibre matrix.
///
/// The QR is computed by modified Gram–Schmidt with one reorthogonalisation
/// pass. That construction yields a positive real diagonal in R, which is
/// exactly the phase convention that makes Q Haar-distributed.
pub fn haar_random(m: usize, rng: &mut RandomStream) -> ComplexMatrix {
    let mut z = ComplexMatrix::zeros(m, m);
    for r in 0..m {
        for c in 0..m {
            z[(r, c)] = rng.complex_normal();
        }
    }
    let mut cols: Vec<Vec<Complex64>> = (0..m).map(|c| (0..m).map(|r| z[(r, c)]).collect()).collect();
    for k in 0..m {
        for _pass in 0..2 {
            for j in 0..k {
                let proj: Complex64 = cols[j].iter().zip(&cols[k]).map(|(q, x)| q.conj() * x).sum();
                let qj = cols[j].clone();
                for (x, q) in cols[k].iter_mut().zip(&qj) {
                    *x -= proj * q;
                }
            }
        }
        let norm = cols[k].iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        for x in cols[k].iter_mut() {
            *x /= norm;
        }
    }
    let mut q = ComplexMatrix::zeros(m, m);
    for (c, col) in cols.iter().enumerate() {
        for (r, &x) in col.iter().enumerate() {
            q[(r, c)] = x;
        }
    }
    q
}

/// Block-diagonal assembly of square blocks.
pub fn direct_sum(blocks: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    let mut total = 0;
    for b in blocks {
        total += b.require_square()?;
    }
    let mut out = ComplexMatrix::zeros(total, total);
    let mut off = 0;
    for b in blocks {
        let n = b.rows;
        for r in 0..n {
            for c in 0..n {
                out[(off + r, off + c)] = b[(r, c)];
            }
        }
        off += n;
    }
    Ok(out)
}
