//! Dense complex matrices with the few pieces of linear algebra the rest of
//! the crate needs: products, Kronecker products, Hermitian checks and a
//! Jacobi eigensolver for Hermitian operators.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const C_ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl std::fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.cols + c]
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![C_ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C_ONE;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{}x{} matrix needs {} entries, got {}",
                rows,
                cols,
                rows * cols,
                data.len()
            )));
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    /// Build from nested rows of (re, im) pairs; used by the JSON loaders.
    pub fn from_rows_re_im(rows: &[Vec<[f64; 2]>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Shape("ragged matrix literal".into()));
        }
        let data = rows
            .iter()
            .flat_map(|row| row.iter().map(|&[re, im]| Complex64::new(re, im)))
            .collect();
        ComplexMatrix::from_vec(r, c, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Rank-one projector |v⟩⟨v| (the vector is not normalized here).
    pub fn projector(v: &[Complex64]) -> Self {
        let n = v.len();
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = v[i] * v[j].conj();
            }
        }
        m
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = Complex64::new(x, 0.0);
        }
        m
    }

    pub fn scale(&self, s: Complex64) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C_ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    /// Largest absolute entry of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        for i in 0..self.rows {
            for j in i..self.cols {
                if (self[(i, j)] - self[(j, i)].conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Kronecker product; `(a ⊗ b)[i·p+k, j·q+l] = a[i,j]·b[k,l]`.
    pub fn kron(&self, other: &Self) -> Self {
        let (p, q) = (other.rows, other.cols);
        let mut out = Self::zeros(self.rows * p, self.cols * q);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a == C_ZERO {
                    continue;
                }
                for k in 0..p {
                    for l in 0..q {
                        out[(i * p + k, j * q + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// Eigenvalues (ascending) and a unitary of eigenvectors (columns) of a
    /// Hermitian matrix, by cyclic complex Jacobi rotations.
    pub fn hermitian_eigen(&self) -> (Vec<f64>, ComplexMatrix) {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.clone();
        let mut v = ComplexMatrix::identity(n);
        // Rotations preserve Hermiticity; iterate until off-diagonal mass dies.
        for _sweep in 0..100 {
            let mut off = 0.0;
            for p in 0..n {
                for q in (p + 1)..n {
                    off += a[(p, q)].norm_sqr();
                }
            }
            if off.sqrt() < 1e-14 {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    if apq.norm() < 1e-300 {
                        continue;
                    }
                    let app = a[(p, p)].re;
                    let aqq = a[(q, q)].re;
                    // Phase that makes the off-diagonal element real, then a
                    // real Jacobi rotation on the 2x2 block. The smaller-angle
                    // root keeps |theta| <= pi/4 so sweeps converge.
                    let phase = apq / apq.norm();
                    let g = apq.norm();
                    let tau = (aqq - app) / (2.0 * g);
                    let t = if tau >= 0.0 {
                        1.0 / (tau + (1.0 + tau * tau).sqrt())
                    } else {
                        1.0 / (tau - (1.0 + tau * tau).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    let cp = phase * s;
                    // Columns p and q of A and V: A <- J† A J, V <- V J with
                    // J = [[c, -phase*s], [conj(phase)*s... ]] realized directly.
                    for r in 0..n {
                        let arp = a[(r, p)];
                        let arq = a[(r, q)];
                        a[(r, p)] = arp * c - arq * cp.conj();
                        a[(r, q)] = arp * cp + arq * c;
                    }
                    for col in 0..n {
                        let apc = a[(p, col)];
                        let aqc = a[(q, col)];
                        a[(p, col)] = apc * c - aqc * cp;
                        a[(q, col)] = apc * cp.conj() + aqc * c;
                    }
                    for r in 0..n {
                        let vrp = v[(r, p)];
                        let vrq = v[(r, q)];
                        v[(r, p)] = vrp * c - vrq * cp.conj();
                        v[(r, q)] = vrp * cp + vrq * c;
                    }
                }
            }
        }
        let mut pairs: Vec<(f64, usize)> = (0..n).map(|i| (a[(i, i)].re, i)).collect();
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        let vals: Vec<f64> = pairs.iter().map(|&(val, _)| val).collect();
        let mut vecs = ComplexMatrix::zeros(n, n);
        for (new_col, &(_, old_col)) in pairs.iter().enumerate() {
            for r in 0..n {
                vecs[(r, new_col)] = v[(r, old_col)];
            }
        }
        (vals, vecs)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.hermitian_eigen().0[0]
    }

    /// f(H) for Hermitian H via the spectral decomposition.
    pub fn hermitian_fn(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let (vals, vecs) = self.hermitian_eigen();
        let n = self.rows;
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &lam) in vals.iter().enumerate() {
            let flam = f(lam);
            if flam == 0.0 {
                continue;
            }
            for i in 0..n {
                for j in 0..n {
                    out[(i, j)] += Complex64::new(flam, 0.0) * vecs[(i, k)] * vecs[(j, k)].conj();
                }
            }
        }
        out
    }
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn cr(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}
