//! Exact linear algebra over the rationals.
//!
//! Everything here goes through Gauss-Jordan elimination on sparse rows. The
//! reducer is incremental so that large constraint systems can be streamed in
//! one row at a time without ever materialising the full matrix.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{format_scalar, Scalar};

/// Sparse vector: strictly increasing indices, no stored zeros.
pub type SparseVec = Vec<(usize, Scalar)>;

pub fn sparse_from_dense(v: &[Scalar]) -> SparseVec {
    v.iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(i, x)| (i, x.clone()))
        .collect()
}

pub fn dense_from_sparse(v: &[(usize, Scalar)], len: usize) -> Vec<Scalar> {
    let mut out = vec![Scalar::zero(); len];
    for (i, x) in v {
        out[*i] = x.clone();
    }
    out
}

/// `target + coef * src`, merged in one pass.
pub fn sparse_axpy(target: &[(usize, Scalar)], coef: &Scalar, src: &[(usize, Scalar)]) -> SparseVec {
    let mut out = Vec::with_capacity(target.len() + src.len());
    let (mut i, mut j) = (0, 0);
    while i < target.len() || j < src.len() {
        let ti = target.get(i).map(|e| e.0).unwrap_or(usize::MAX);
        let sj = src.get(j).map(|e| e.0).unwrap_or(usize::MAX);
        if ti < sj {
            out.push(target[i].clone());
            i += 1;
        } else if sj < ti {
            out.push((sj, coef * &src[j].1));
            j += 1;
        } else {
            let v = &target[i].1 + coef * &src[j].1;
            if !v.is_zero() {
                out.push((ti, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Incremental row echelon form. Each stored pivot row has leading entry 1.
#[derive(Clone, Debug)]
pub struct RowReducer {
    cols: usize,
    pivots: BTreeMap<usize, SparseVec>,
}

impl RowReducer {
    pub fn new(cols: usize) -> Self {
        RowReducer { cols, pivots: BTreeMap::new() }
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Reduces `row` against the current pivots; returns the residue.
    pub fn reduce(&self, mut row: SparseVec) -> SparseVec {
        let mut pos = 0;
        while pos < row.len() {
            let (c, coef) = (row[pos].0, row[pos].1.clone());
            match self.pivots.get(&c) {
                Some(p) => row = sparse_axpy(&row, &-coef, p),
                None => pos += 1,
            }
        }
        row
    }

    /// Adds a row; returns true if the rank grew.
    pub fn insert(&mut self, row: SparseVec) -> bool {
        let mut row = row;
        // leading-entry reduction is enough to decide independence
        loop {
            let Some((c, coef)) = row.first().cloned() else { return false };
            match self.pivots.get(&c) {
                Some(p) => row = sparse_axpy(&row, &-coef, p),
                None => {
                    let inv = coef.recip();
                    let normalized = row.into_iter().map(|(i, x)| (i, x * &inv)).collect();
                    self.pivots.insert(c, normalized);
                    return true;
                }
            }
        }
    }

    pub fn insert_dense(&mut self, row: &[Scalar]) -> bool {
        self.insert(sparse_from_dense(row))
    }

    pub fn pivot_columns(&self) -> Vec<usize> {
        self.pivots.keys().copied().collect()
    }

    /// Fully reduced row echelon form, rows ordered by pivot column.
    pub fn rref_sparse(&self) -> Vec<SparseVec> {
        let cols: Vec<usize> = self.pivots.keys().copied().collect();
        let mut rows: BTreeMap<usize, SparseVec> = self.pivots.clone();
        for &p in cols.iter().rev() {
            let prow = rows[&p].clone();
            for &q in cols.iter().filter(|&&q| q < p) {
                let r = rows.get_mut(&q).unwrap();
                if let Ok(k) = r.binary_search_by_key(&p, |e| e.0) {
                    let coef = -r[k].1.clone();
                    *r = sparse_axpy(r, &coef, &prow);
                }
            }
        }
        rows.into_values().collect()
    }

    pub fn rref(&self) -> Vec<Vec<Scalar>> {
        self.rref_sparse().iter().map(|r| dense_from_sparse(r, self.cols)).collect()
    }

    /// Basis of `{x : R x = 0}`, one vector per free column.
    pub fn nullspace(&self) -> Vec<Vec<Scalar>> {
        let rref = self.rref_sparse();
        let pivot_of: Vec<usize> = rref.iter().map(|r| r[0].0).collect();
        let is_pivot: Vec<bool> = {
            let mut v = vec![false; self.cols];
            for &p in &pivot_of {
                v[p] = true;
            }
            v
        };
        let mut out = Vec::new();
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = vec![Scalar::zero(); self.cols];
            v[free] = Scalar::one();
            for (row, &p) in rref.iter().zip(&pivot_of) {
                if let Ok(k) = row.binary_search_by_key(&free, |e| e.0) {
                    v[p] = -row[k].1.clone();
                }
            }
            out.push(v);
        }
        out
    }
}

/// Dense row-major rational matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![Scalar::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Scalar::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Scalar>>, cols: usize) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch(format!(
                    "row of length {} in a matrix with {cols} columns",
                    r.len()
                )));
            }
            data.extend(r);
        }
        Ok(Matrix { rows: n, cols, data })
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map(|r| r.len()).unwrap_or(0);
        let data = rows.iter().flat_map(|r| r.iter().map(|&x| crate::scalar::int(x))).collect();
        Matrix { rows: rows.len(), cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Scalar {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, x: Scalar) {
        self.data[r * self.cols + c] = x;
    }

    pub fn row(&self, r: usize) -> &[Scalar] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<Scalar>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let b = other.get(k, c);
                    if !b.is_zero() {
                        let v = out.get(r, c) + a * b;
                        out.set(r, c, v);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Scalar]) -> Result<Vec<Scalar>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .fold(Scalar::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect())
    }

    fn reducer(&self) -> RowReducer {
        let mut red = RowReducer::new(self.cols);
        for r in 0..self.rows {
            red.insert_dense(self.row(r));
        }
        red
    }

    pub fn rank(&self) -> usize {
        self.reducer().rank()
    }

    /// Right nullspace `{x : M x = 0}`.
    pub fn nullspace(&self) -> Subspace {
        Subspace::from_spanning(0, self.cols, self.reducer().nullspace())
    }

    pub fn inverse(&self) -> Option<Matrix> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut red = RowReducer::new(2 * n);
        for r in 0..n {
            let mut row = self.row(r).to_vec();
            row.extend((0..n).map(|c| if c == r { Scalar::one() } else { Scalar::zero() }));
            red.insert_dense(&row);
        }
        let rref = red.rref();
        if rref.len() != n || rref.iter().enumerate().any(|(i, r)| !r[i].is_one()) {
            return None;
        }
        let rows = rref.into_iter().map(|r| r[n..].to_vec()).collect();
        Some(Matrix::from_rows(rows, n).expect("square"))
    }

    /// Some `x` with `M x = b`, if one exists.
    pub fn solve(&self, b: &[Scalar]) -> Result<Option<Vec<Scalar>>> {
        if b.len() != self.rows {
            return Err(Error::DimensionMismatch("right-hand side length".into()));
        }
        let mut red = RowReducer::new(self.cols + 1);
        for r in 0..self.rows {
            let mut row = self.row(r).to_vec();
            row.push(b[r].clone());
            red.insert_dense(&row);
        }
        let rref = red.rref_sparse();
        let mut x = vec![Scalar::zero(); self.cols];
        for row in rref {
            let p = row[0].0;
            if p == self.cols {
                return Ok(None);
            }
            if let Some((_, v)) = row.iter().find(|e| e.0 == self.cols) {
                x[p] = v.clone();
            }
        }
        Ok(Some(x))
    }

    pub fn display_rows(&self) -> Vec<Vec<String>> {
        (0..self.rows).map(|r| self.row(r).iter().map(format_scalar).collect()).collect()
    }
}

pub fn rank(m: &Matrix) -> usize {
    m.rank()
}

pub fn nullspace(m: &Matrix) -> Subspace {
    m.nullspace()
}

/// A linear subspace of `Q^ambient`, stored by its reduced row echelon basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    degree: usize,
    ambient: usize,
    basis: Vec<Vec<Scalar>>,
}

impl Subspace {
    pub fn from_spanning(degree: usize, ambient: usize, rows: Vec<Vec<Scalar>>) -> Self {
        let mut red = RowReducer::new(ambient);
        for r in &rows {
            debug_assert_eq!(r.len(), ambient);
            red.insert_dense(r);
        }
        Subspace { degree, ambient, basis: red.rref() }
    }

    pub fn zero(degree: usize, ambient: usize) -> Self {
        Subspace { degree, ambient, basis: Vec::new() }
    }

    pub fn full(degree: usize, ambient: usize) -> Self {
        Subspace { degree, ambient, basis: Matrix::identity(ambient).to_rows() }
    }

    pub fn with_degree(mut self, degree: usize) -> Self {
        self.degree = degree;
        self
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn basis(&self) -> &[Vec<Scalar>] {
        &self.basis
    }

    fn check(&self, other: &Subspace) -> Result<()> {
        if self.ambient != other.ambient || self.degree != other.degree {
            return Err(Error::DimensionMismatch(format!(
                "subspaces of Q^{} (degree {}) and Q^{} (degree {})",
                self.ambient, self.degree, other.ambient, other.degree
            )));
        }
        Ok(())
    }

    pub fn contains(&self, v: &[Scalar]) -> bool {
        let mut red = RowReducer::new(self.ambient);
        for r in &self.basis {
            red.insert_dense(r);
        }
        red.reduce(sparse_from_dense(v)).is_empty()
    }

    /// Vectors orthogonal to the subspace under the standard dot product.
    pub fn annihilator(&self) -> Vec<Vec<Scalar>> {
        let mut red = RowReducer::new(self.ambient);
        for r in &self.basis {
            red.insert_dense(r);
        }
        red.nullspace()
    }

    pub fn intersect(&self, other: &Subspace) -> Result<Subspace> {
        self.check(other)?;
        let mut red = RowReducer::new(self.ambient);
        for r in self.annihilator().iter().chain(other.annihilator().iter()) {
            red.insert_dense(r);
        }
        Ok(Subspace::from_spanning(self.degree, self.ambient, red.nullspace()))
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> Result<bool> {
        self.check(other)?;
        Ok(self.basis.iter().all(|v| other.contains(v)))
    }
}

pub fn subspace_intersect(a: &Subspace, b: &Subspace) -> Result<Subspace> {
    a.intersect(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;
    use proptest::prelude::*;

    fn v(xs: &[i64]) -> Vec<Scalar> {
        xs.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn nullspace_of_rank_one() {
        let m = Matrix::from_i64(&[&[1, 2], &[2, 4]]);
        let ns = m.nullspace();
        assert_eq!(ns.dim(), 1);
        // hand elimination gives span{(-2, 1)}
        assert_eq!(ns, Subspace::from_spanning(0, 2, vec![v(&[-2, 1])]));
        assert_eq!(m.rank(), 1);
    }

    #[test]
    fn identity_rank() {
        for k in 0..6 {
            assert_eq!(Matrix::identity(k).rank(), k);
        }
    }

    #[test]
    fn coordinate_lines_meet_in_zero() {
        let a = Subspace::from_spanning(1, 2, vec![v(&[1, 0])]);
        let b = Subspace::from_spanning(1, 2, vec![v(&[0, 1])]);
        assert!(a.intersect(&b).unwrap().is_zero());
        let c = Subspace::from_spanning(2, 2, vec![v(&[0, 1])]);
        assert!(matches!(a.intersect(&c), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn echelon_form_is_canonical() {
        let a = Subspace::from_spanning(0, 3, vec![v(&[1, 1, 0]), v(&[0, 1, 1])]);
        let b = Subspace::from_spanning(0, 3, vec![v(&[1, 2, 1]), v(&[2, 1, -1]), v(&[1, 0, -1])]);
        assert_eq!(a, b);
    }

    #[test]
    fn inverse_and_solve() {
        let m = Matrix::from_i64(&[&[0, 1], &[-1, 0]]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv).unwrap(), Matrix::identity(2));
        assert!(Matrix::from_i64(&[&[1, 2], &[2, 4]]).inverse().is_none());
        let x = m.solve(&v(&[3, 5])).unwrap().unwrap();
        assert_eq!(m.mul_vec(&x).unwrap(), v(&[3, 5]));
        let sing = Matrix::from_i64(&[&[1, 2], &[2, 4]]);
        assert!(sing.solve(&v(&[1, 0])).unwrap().is_none());
    }

    proptest! {
        #[test]
        fn rank_nullity(entries in proptest::collection::vec(-3i64..4, 12), cols in 1usize..5) {
            let rows = entries.len() / cols;
            let data: Vec<Vec<Scalar>> = entries
                .chunks(cols)
                .take(rows)
                .map(|c| c.iter().map(|&x| int(x)).collect())
                .collect();
            let m = Matrix::from_rows(data, cols).unwrap();
            let ns = m.nullspace();
            prop_assert_eq!(m.rank() + ns.dim(), cols);
            for b in ns.basis() {
                prop_assert!(m.mul_vec(b).unwrap().iter().all(Zero::is_zero));
            }
        }

        #[test]
        fn intersection_is_contained_in_both(
            a in proptest::collection::vec(-2i64..3, 8),
            b in proptest::collection::vec(-2i64..3, 8),
        ) {
            let sa = Subspace::from_spanning(0, 4, a.chunks(4).map(|c| v(c)).collect());
            let sb = Subspace::from_spanning(0, 4, b.chunks(4).map(|c| v(c)).collect());
            let both = sa.intersect(&sb).unwrap();
            prop_assert!(both.is_subspace_of(&sa).unwrap());
            prop_assert!(both.is_subspace_of(&sb).unwrap());
            prop_assert!(both.dim() + 4 >= sa.dim() + sb.dim());
        }
    }
}
