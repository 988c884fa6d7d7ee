//! Exact dense matrices over a coefficient ring.
//!
//! Linear algebra (rref, determinant, inverse, kernel) uses the ring's
//! fraction-field division, so it is valid over ℚ and over
//! rational-function coefficients alike. Matrix sizes here are tiny;
//! plain Gauss elimination is exact and fast enough.

use num::BigRational;

use crate::ring::Ring;

#[derive(Debug, Clone, PartialEq)]
pub struct Mat<R: Ring> {
    ring: R,
    nrows: usize,
    ncols: usize,
    data: Vec<R::Elem>,
}

impl<R: Ring> Mat<R> {
    pub fn new(ring: R, nrows: usize, ncols: usize, data: Vec<R::Elem>) -> Self {
        assert_eq!(data.len(), nrows * ncols, "matrix data length mismatch");
        Mat { ring, nrows, ncols, data }
    }

    pub fn zero(ring: R, nrows: usize, ncols: usize) -> Self {
        let data = (0..nrows * ncols).map(|_| ring.zero()).collect();
        Mat { ring, nrows, ncols, data }
    }

    pub fn identity(ring: R, n: usize) -> Self {
        let mut m = Mat::zero(ring, n, n);
        for i in 0..n {
            let one = m.ring.one();
            m.set(i, i, one);
        }
        m
    }

    pub fn ring(&self) -> &R {
        &self.ring
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn at(&self, i: usize, j: usize) -> &R::Elem {
        &self.data[i * self.ncols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: R::Elem) {
        self.data[i * self.ncols + j] = v;
    }

    pub fn entries(&self) -> &[R::Elem] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|e| self.ring.is_zero(e))
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| self.ring.add(a, b))
            .collect();
        Mat { ring: self.ring.clone(), nrows: self.nrows, ncols: self.ncols, data }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.map(|e| self.ring.neg(e))
    }

    pub fn scale(&self, c: &R::Elem) -> Self {
        self.map(|e| self.ring.mul(e, c))
    }

    pub fn map(&self, f: impl Fn(&R::Elem) -> R::Elem) -> Self {
        Mat {
            ring: self.ring.clone(),
            nrows: self.nrows,
            ncols: self.ncols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.ncols, other.nrows, "matrix product shape mismatch");
        let mut out = Mat::zero(self.ring.clone(), self.nrows, other.ncols);
        for i in 0..self.nrows {
            for k in 0..self.ncols {
                let a = self.at(i, k);
                if self.ring.is_zero(a) {
                    continue;
                }
                for j in 0..other.ncols {
                    let t = self.ring.mul(a, other.at(k, j));
                    let v = self.ring.add(out.at(i, j), &t);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// Commutator `[self, other]`.
    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn trace(&self) -> R::Elem {
        let mut acc = self.ring.zero();
        for i in 0..self.nrows.min(self.ncols) {
            acc = self.ring.add(&acc, self.at(i, i));
        }
        acc
    }

    /// Determinant by fraction-field Gauss elimination.
    pub fn det(&self) -> R::Elem {
        assert_eq!(self.nrows, self.ncols);
        let ring = self.ring.clone();
        let n = self.nrows;
        let mut m = self.data.clone();
        let idx = |i: usize, j: usize| i * n + j;
        let mut det = ring.one();
        for col in 0..n {
            let pivot = (col..n).find(|&r| !ring.is_zero(&m[idx(r, col)]));
            let Some(p) = pivot else { return ring.zero() };
            if p != col {
                for j in 0..n {
                    m.swap(idx(p, j), idx(col, j));
                }
                det = ring.neg(&det);
            }
            let pv = m[idx(col, col)].clone();
            det = ring.mul(&det, &pv);
            for r in col + 1..n {
                let factor = ring
                    .exact_div(&m[idx(r, col)], &pv)
                    .expect("pivot is nonzero");
                if ring.is_zero(&factor) {
                    continue;
                }
                for j in col..n {
                    let t = ring.mul(&factor, &m[idx(col, j)]);
                    m[idx(r, j)] = ring.sub(&m[idx(r, j)], &t);
                }
            }
        }
        det
    }

    /// Inverse over the fraction field; `None` when singular.
    pub fn inverse(&self) -> Option<Self> {
        assert_eq!(self.nrows, self.ncols);
        let ring = self.ring.clone();
        let n = self.nrows;
        let mut left = self.data.clone();
        let mut right = Mat::identity(ring.clone(), n).data;
        let idx = |i: usize, j: usize| i * n + j;
        for col in 0..n {
            let pivot = (col..n).find(|&r| !ring.is_zero(&left[idx(r, col)]))?;
            if pivot != col {
                for j in 0..n {
                    left.swap(idx(pivot, j), idx(col, j));
                    right.swap(idx(pivot, j), idx(col, j));
                }
            }
            let pv = left[idx(col, col)].clone();
            let pv_inv = ring.exact_div(&ring.one(), &pv).expect("pivot is nonzero");
            for j in 0..n {
                left[idx(col, j)] = ring.mul(&left[idx(col, j)], &pv_inv);
                right[idx(col, j)] = ring.mul(&right[idx(col, j)], &pv_inv);
            }
            for r in 0..n {
                if r == col || ring.is_zero(&left[idx(r, col)]) {
                    continue;
                }
                let factor = left[idx(r, col)].clone();
                for j in 0..n {
                    let t = ring.mul(&factor, &left[idx(col, j)]);
                    left[idx(r, j)] = ring.sub(&left[idx(r, j)], &t);
                    let t = ring.mul(&factor, &right[idx(col, j)]);
                    right[idx(r, j)] = ring.sub(&right[idx(r, j)], &t);
                }
            }
        }
        Some(Mat { ring, nrows: n, ncols: n, data: right })
    }

    /// Entrywise transport into another ring.
    pub fn transport<S: Ring>(&self, ring: S, f: impl Fn(&R::Elem) -> S::Elem) -> Mat<S> {
        Mat {
            ring,
            nrows: self.nrows,
            ncols: self.ncols,
            data: self.data.iter().map(f).collect(),
        }
    }
}

/// A ℚ-matrix embedded into any coefficient ring.
pub fn embed_q_matrix<R: Ring>(ring: &R, m: &Mat<crate::ring::QRing>) -> Mat<R> {
    m.transport(ring.clone(), |q| ring.from_rational(q))
}

/// Apply a ℚ-matrix (rows × cols) to a vector with entries in an
/// arbitrary ring.
pub fn apply_q_rows<R: Ring>(ring: &R, rows: &[Vec<BigRational>], v: &[R::Elem]) -> Vec<R::Elem> {
    rows.iter()
        .map(|row| {
            assert_eq!(row.len(), v.len());
            let mut acc = ring.zero();
            for (c, x) in row.iter().zip(v) {
                if c == &BigRational::from_integer(0.into()) {
                    continue;
                }
                let t = ring.mul(&ring.from_rational(c), x);
                acc = ring.add(&acc, &t);
            }
            acc
        })
        .collect()
}

/// Row-reduce a ℚ-matrix in place; returns the pivot columns.
pub fn rref_q(m: &mut Vec<Vec<BigRational>>) -> Vec<usize> {
    use num::Zero;
    let nrows = m.len();
    let ncols = if nrows == 0 { 0 } else { m[0].len() };
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        if row >= nrows {
            break;
        }
        let Some(p) = (row..nrows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(p, row);
        let pv = m[row][col].clone();
        for x in m[row].iter_mut() {
            *x = &*x / &pv;
        }
        for r in 0..nrows {
            if r == row || m[r][col].is_zero() {
                continue;
            }
            let factor = m[r][col].clone();
            for c in 0..ncols {
                let t = &factor * &m[row][c];
                m[r][c] -= t;
            }
        }
        pivots.push(col);
        row += 1;
    }
    pivots
}

/// Kernel basis of a ℚ-matrix (columns are unknowns).
pub fn kernel_q(m: &[Vec<BigRational>]) -> Vec<Vec<BigRational>> {
    use num::{One, Zero};
    let ncols = if m.is_empty() { return vec![] } else { m[0].len() };
    let mut red = m.to_vec();
    let pivots = rref_q(&mut red);
    let mut basis = Vec::new();
    let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
    for free in 0..ncols {
        if pivot_set.contains(&free) {
            continue;
        }
        let mut v = vec![BigRational::zero(); ncols];
        v[free] = BigRational::one();
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = -red[r][free].clone();
        }
        basis.push(v);
    }
    basis
}

/// Solves coordinates with respect to a fixed ℚ-column span, over any
/// coefficient ring. Built once per span from exact row reduction.
#[derive(Debug, Clone)]
pub struct SpanSolver {
    /// Row indices of an invertible square subsystem.
    pivot_rows: Vec<usize>,
    /// Inverse of the square subsystem, as rows.
    inv_rows: Vec<Vec<BigRational>>,
    /// The original columns (each of full length), for verification.
    columns: Vec<Vec<BigRational>>,
}

impl SpanSolver {
    /// `columns` must be linearly independent vectors of equal length.
    pub fn new(columns: Vec<Vec<BigRational>>) -> Option<Self> {
        use num::Zero;
        let d = columns.len();
        if d == 0 {
            return Some(SpanSolver { pivot_rows: vec![], inv_rows: vec![], columns });
        }
        let len = columns[0].len();
        // Row-reduce the transpose to find independent coordinate rows.
        let mut t: Vec<Vec<BigRational>> = (0..d)
            .map(|j| (0..len).map(|i| columns[j][i].clone()).collect())
            .collect();
        let pivot_rows = rref_q(&mut t);
        if pivot_rows.len() != d {
            return None; // columns were dependent
        }
        let square: Vec<Vec<BigRational>> = pivot_rows
            .iter()
            .map(|&r| (0..d).map(|j| columns[j][r].clone()).collect())
            .collect();
        let flat: Vec<BigRational> = square.into_iter().flatten().collect();
        let sq = Mat::new(crate::ring::QRing, d, d, flat);
        let inv = sq.inverse()?;
        let inv_rows: Vec<Vec<BigRational>> = (0..d)
            .map(|i| (0..d).map(|j| inv.at(i, j).clone()).collect())
            .collect();
        let _ = BigRational::zero();
        Some(SpanSolver { pivot_rows, inv_rows, columns })
    }

    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    /// Coordinates of `v` in the span; `None` when `v` lies outside.
    pub fn coords<R: Ring>(&self, ring: &R, v: &[R::Elem]) -> Option<Vec<R::Elem>> {
        let sub: Vec<R::Elem> = self.pivot_rows.iter().map(|&r| v[r].clone()).collect();
        let coords = apply_q_rows(ring, &self.inv_rows, &sub);
        // verify: the combination must reproduce v exactly
        for (i, target) in v.iter().enumerate() {
            let mut acc = ring.zero();
            for (j, c) in coords.iter().enumerate() {
                let q = &self.columns[j][i];
                if q == &BigRational::from_integer(0.into()) {
                    continue;
                }
                let t = ring.mul(&ring.from_rational(q), c);
                acc = ring.add(&acc, &t);
            }
            if acc != *target {
                return None;
            }
        }
        Some(coords)
    }
}
