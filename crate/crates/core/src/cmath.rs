//! Small dense complex/real linear-algebra helpers.

use num_complex::Complex64;

pub type C64 = Complex64;
pub type CVec = Vec<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Hermitian inner product `a^H b`.
pub fn dot_h(a: &[C64], b: &[C64]) -> C64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(ZERO, |acc, (x, y)| acc + x.conj() * y)
}

pub fn norm_sqr(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

/// `sum_k ||w_k||^2` over a per-subcarrier stack.
pub fn stack_power(w: &[CVec]) -> f64 {
    w.iter().map(|wk| norm_sqr(wk)).sum()
}

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// `A x`.
    pub fn mul_vec(&self, x: &[C64]) -> CVec {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(x).fold(ZERO, |acc, (a, b)| acc + a * b))
            .collect()
    }

    /// `A^H y`.
    pub fn mul_h_vec(&self, y: &[C64]) -> CVec {
        debug_assert_eq!(y.len(), self.rows);
        let mut out = vec![ZERO; self.cols];
        for (r, yr) in y.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(r)) {
                *o += a.conj() * yr;
            }
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = &C64> {
        self.data.iter()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut C64> {
        self.data.iter_mut()
    }
}

/// Dense row-major real matrix; used for switch matrices and LSAP costs.
#[derive(Debug, Clone, PartialEq)]
pub struct RMat {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
}

impl RMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { n_rows: rows, n_cols: cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { n_rows: rows, n_cols: cols, data }
    }

    /// Permutation matrix with `S[i][perm[i]] = 1`.
    pub fn from_permutation(perm: &[usize]) -> Self {
        let mut m = Self::zeros(perm.len(), perm.len());
        for (i, &j) in perm.iter().enumerate() {
            m.set(i, j, 1.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.n_rows
    }

    pub fn cols(&self) -> usize {
        self.n_cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.n_cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.n_cols + c] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// `S^T x` for a complex vector `x`.
    pub fn mul_t_cvec(&self, x: &[C64]) -> CVec {
        debug_assert_eq!(x.len(), self.n_rows);
        let mut out = vec![ZERO; self.n_cols];
        for (r, xr) in x.iter().enumerate() {
            for (c, o) in out.iter_mut().enumerate() {
                let s = self.data[r * self.n_cols + c];
                if s != 0.0 {
                    *o += xr * s;
                }
            }
        }
        out
    }

    /// Column index of the single one in each row, if this is a permutation matrix.
    pub fn as_permutation(&self) -> Option<Vec<usize>> {
        if self.n_rows != self.n_cols {
            return None;
        }
        let n = self.n_rows;
        let mut perm = Vec::with_capacity(n);
        let mut seen = vec![false; n];
        for r in 0..n {
            let mut col = None;
            for c in 0..n {
                match self.get(r, c) {
                    0.0 => {}
                    1.0 if col.is_none() => col = Some(c),
                    _ => return None,
                }
            }
            let c = col?;
            if seen[c] {
                return None;
            }
            seen[c] = true;
            perm.push(c);
        }
        Some(perm)
    }

    pub fn is_permutation(&self) -> bool {
        self.as_permutation().is_some()
    }

    /// Frobenius inner product `sum_ij A_ij B_ij`.
    pub fn frobenius_dot(&self, other: &RMat) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }
}
