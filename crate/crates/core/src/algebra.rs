//! Finite-dimensional graded-commutative algebras over the rationals.
//!
//! An algebra is given by a basis, ordered by degree, and a dense table of
//! products of basis elements. Construction runs the full validation
//! (unit, graded commutativity, associativity, Poincare duality) so every
//! [`GradedAlgebra`] in circulation is a Poincare algebra.

use std::collections::BTreeMap;
use std::ops::Range;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result, ValidationFailure};
use crate::linalg::{Matrix, SparseVec, Subspace};
use crate::scalar::{format_scalar, sign, Scalar};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisElement {
    pub name: String,
    pub degree: usize,
}

impl BasisElement {
    pub fn new(name: impl Into<String>, degree: usize) -> Self {
        BasisElement { name: name.into(), degree }
    }
}

#[derive(Clone, Debug)]
pub struct GradedAlgebra {
    top: usize,
    basis: Vec<BasisElement>,
    offsets: Vec<usize>,
    index: BTreeMap<String, usize>,
    products: Vec<Vec<SparseVec>>,
    unit: usize,
    orientation: usize,
    id: u64,
}

/// An element of a [`GradedAlgebra`], stored as a coefficient vector over
/// the whole (degree-ordered) basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CohomologyClass {
    algebra: u64,
    coeffs: Vec<Scalar>,
}

impl CohomologyClass {
    pub fn algebra_id(&self) -> u64 {
        self.algebra
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> &Scalar {
        &self.coeffs[i]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn support(&self) -> impl Iterator<Item = (usize, &Scalar)> {
        self.coeffs.iter().enumerate().filter(|(_, x)| !x.is_zero())
    }

    pub fn sparse(&self) -> SparseVec {
        self.support().map(|(i, x)| (i, x.clone())).collect()
    }

    pub fn scale(&self, c: &Scalar) -> CohomologyClass {
        CohomologyClass { algebra: self.algebra, coeffs: self.coeffs.iter().map(|x| x * c).collect() }
    }

    pub fn add(&self, other: &CohomologyClass) -> CohomologyClass {
        assert_eq!(self.algebra, other.algebra, "adding classes of different algebras");
        CohomologyClass {
            algebra: self.algebra,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &CohomologyClass) -> CohomologyClass {
        self.add(&other.scale(&-Scalar::one()))
    }

    pub fn neg(&self) -> CohomologyClass {
        self.scale(&-Scalar::one())
    }
}

fn fingerprint(top: usize, basis: &[BasisElement], products: &[Vec<SparseVec>], orientation: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(top.to_le_bytes());
    for b in basis {
        h.update(b.name.as_bytes());
        h.update([0u8]);
        h.update(b.degree.to_le_bytes());
    }
    for (i, row) in products.iter().enumerate() {
        for (j, p) in row.iter().enumerate() {
            for (k, x) in p {
                h.update(i.to_le_bytes());
                h.update(j.to_le_bytes());
                h.update(k.to_le_bytes());
                h.update(format_scalar(x).as_bytes());
            }
        }
    }
    h.update(orientation.to_le_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().unwrap())
}

/// Poincare check outcome: `failing_degree` is the first `p` whose pairing
/// matrix is non-square or singular.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PoincareStatus {
    pub ok: bool,
    pub failing_degree: Option<usize>,
}

impl GradedAlgebra {
    /// Builds and validates an algebra.
    ///
    /// `products` lists `(left, right, result)` in terms of positions in
    /// `basis`; missing pairs are zero, except products with the unit, which
    /// default to the unit law.
    pub fn new(
        top: usize,
        basis: Vec<BasisElement>,
        products: Vec<(usize, usize, SparseVec)>,
        orientation: usize,
    ) -> Result<Self> {
        let alg = Self::from_parts(top, basis, products, orientation)?;
        alg.validate()?;
        Ok(alg)
    }

    /// Builds without running [`validate`](Self::validate). Structural
    /// problems (duplicate names, bad indices) are still reported.
    pub fn from_parts(
        top: usize,
        basis: Vec<BasisElement>,
        products: Vec<(usize, usize, SparseVec)>,
        orientation: usize,
    ) -> Result<Self> {
        if top % 2 != 0 {
            return Err(Error::Schema(format!("formal dimension {top} is odd")));
        }
        let n = basis.len();
        if let Some(b) = basis.iter().find(|b| b.degree > top) {
            return Err(Error::Schema(format!("basis element {} has degree above {top}", b.name)));
        }
        // stable sort by degree, remember the permutation
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| basis[i].degree);
        let mut new_pos = vec![0; n];
        for (p, &i) in order.iter().enumerate() {
            new_pos[i] = p;
        }
        let sorted: Vec<BasisElement> = order.iter().map(|&i| basis[i].clone()).collect();
        let mut index = BTreeMap::new();
        for (i, b) in sorted.iter().enumerate() {
            if index.insert(b.name.clone(), i).is_some() {
                return Err(Error::Schema(format!("duplicate basis name {:?}", b.name)));
            }
        }
        let mut offsets = vec![0; top + 2];
        for d in 0..=top {
            offsets[d + 1] = offsets[d] + sorted.iter().filter(|b| b.degree == d).count();
        }
        let zeros: Vec<usize> = (0..n).filter(|&i| sorted[i].degree == 0).collect();
        if zeros.len() != 1 {
            return Err(Error::Validation(ValidationFailure::Degree0NotOneDimensional(zeros.len())));
        }
        let unit = zeros[0];
        if orientation >= n {
            return Err(Error::Schema("orientation index out of range".into()));
        }
        let orientation = new_pos[orientation];

        let mut table: Vec<Vec<Option<SparseVec>>> = vec![vec![None; n]; n];
        for (l, r, res) in products {
            if l >= n || r >= n || res.iter().any(|(k, _)| *k >= n) {
                return Err(Error::Schema("product index out of range".into()));
            }
            let (l, r) = (new_pos[l], new_pos[r]);
            let mut v: SparseVec = res
                .into_iter()
                .filter(|(_, x)| !x.is_zero())
                .map(|(k, x)| (new_pos[k], x))
                .collect();
            v.sort_by_key(|e| e.0);
            if v.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::Schema(format!(
                    "repeated result basis in product {}*{}",
                    sorted[l].name, sorted[r].name
                )));
            }
            let want = sorted[l].degree + sorted[r].degree;
            if v.iter().any(|(k, _)| sorted[*k].degree != want) {
                return Err(Error::Validation(ValidationFailure::ProductDegree {
                    left: sorted[l].name.clone(),
                    right: sorted[r].name.clone(),
                }));
            }
            if table[l][r].is_some() {
                return Err(Error::Schema(format!(
                    "product {}*{} listed twice",
                    sorted[l].name, sorted[r].name
                )));
            }
            table[l][r] = Some(v);
        }
        let products: Vec<Vec<SparseVec>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| match table[i][j].take() {
                        Some(v) => v,
                        None if i == unit => vec![(j, Scalar::one())],
                        None if j == unit => vec![(i, Scalar::one())],
                        None => Vec::new(),
                    })
                    .collect()
            })
            .collect();
        let id = fingerprint(top, &sorted, &products, orientation);
        Ok(GradedAlgebra { top, basis: sorted, offsets, index, products, unit, orientation, id })
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    /// Formal dimension `2n`.
    pub fn top(&self) -> usize {
        self.top
    }

    /// Half the formal dimension.
    pub fn half(&self) -> usize {
        self.top / 2
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[BasisElement] {
        &self.basis
    }

    pub fn name(&self, i: usize) -> &str {
        &self.basis[i].name
    }

    pub fn degree_of_index(&self, i: usize) -> usize {
        self.basis[i].degree
    }

    /// Global index range of the degree-`d` basis (empty above the top).
    pub fn range(&self, d: usize) -> Range<usize> {
        if d > self.top {
            let n = self.dim();
            return n..n;
        }
        self.offsets[d]..self.offsets[d + 1]
    }

    pub fn dim_of(&self, d: usize) -> usize {
        self.range(d).len()
    }

    pub fn betti(&self) -> Vec<usize> {
        (0..=self.top).map(|d| self.dim_of(d)).collect()
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.index.get(name).copied().ok_or_else(|| Error::UnknownBasis(name.to_string()))
    }

    pub fn unit_index(&self) -> usize {
        self.unit
    }

    pub fn orientation_index(&self) -> usize {
        self.orientation
    }

    pub fn product(&self, i: usize, j: usize) -> &SparseVec {
        &self.products[i][j]
    }

    pub fn zero(&self) -> CohomologyClass {
        CohomologyClass { algebra: self.id, coeffs: vec![Scalar::zero(); self.dim()] }
    }

    pub fn unit(&self) -> CohomologyClass {
        self.basis_class(self.unit)
    }

    pub fn orientation(&self) -> CohomologyClass {
        self.basis_class(self.orientation)
    }

    pub fn basis_class(&self, i: usize) -> CohomologyClass {
        let mut c = self.zero();
        c.coeffs[i] = Scalar::one();
        c
    }

    pub fn named(&self, name: &str) -> Result<CohomologyClass> {
        Ok(self.basis_class(self.index_of(name)?))
    }

    pub fn class_from_sparse(&self, v: &[(usize, Scalar)]) -> CohomologyClass {
        let mut c = self.zero();
        for (i, x) in v {
            c.coeffs[*i] += x;
        }
        c
    }

    pub fn class_from_terms(&self, terms: &[(&str, Scalar)]) -> Result<CohomologyClass> {
        let mut c = self.zero();
        for (name, x) in terms {
            c.coeffs[self.index_of(name)?] += x;
        }
        Ok(c)
    }

    /// Class with the given coordinates over the degree-`d` basis.
    pub fn class_in_degree(&self, d: usize, coords: &[Scalar]) -> Result<CohomologyClass> {
        let r = self.range(d);
        if coords.len() != r.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} coordinates for the {}-dimensional degree {d}",
                coords.len(),
                r.len()
            )));
        }
        let mut c = self.zero();
        c.coeffs[r].clone_from_slice(coords);
        Ok(c)
    }

    pub fn component(&self, c: &CohomologyClass, d: usize) -> Vec<Scalar> {
        c.coeffs[self.range(d)].to_vec()
    }

    /// Degrees carrying a nonzero component.
    pub fn degrees(&self, c: &CohomologyClass) -> Vec<usize> {
        let mut ds: Vec<usize> = c.support().map(|(i, _)| self.basis[i].degree).collect();
        ds.dedup();
        ds
    }

    /// `Some(d)` when `c` is nonzero and concentrated in degree `d`.
    pub fn homogeneous_degree(&self, c: &CohomologyClass) -> Option<usize> {
        match self.degrees(c).as_slice() {
            [d] => Some(*d),
            _ => None,
        }
    }

    /// Degree of a homogeneous class, with zero allowed at the fallback degree.
    pub fn degree_or(&self, c: &CohomologyClass, fallback: usize) -> Result<usize> {
        match self.degrees(c).as_slice() {
            [] => Ok(fallback),
            [d] => Ok(*d),
            ds => Err(Error::Degree(format!("class is inhomogeneous (degrees {ds:?})"))),
        }
    }

    pub fn owns(&self, c: &CohomologyClass) -> Result<()> {
        if c.algebra != self.id {
            return Err(Error::MismatchedAlgebra);
        }
        Ok(())
    }

    pub(crate) fn cup_sparse(&self, a: &[(usize, Scalar)], b: &[(usize, Scalar)]) -> SparseVec {
        let mut acc: BTreeMap<usize, Scalar> = BTreeMap::new();
        for (i, x) in a {
            for (j, y) in b {
                let xy = x * y;
                for (k, z) in &self.products[*i][*j] {
                    *acc.entry(*k).or_insert_with(Scalar::zero) += &xy * z;
                }
            }
        }
        acc.into_iter().filter(|(_, v)| !v.is_zero()).collect()
    }

    pub fn cup(&self, a: &CohomologyClass, b: &CohomologyClass) -> Result<CohomologyClass> {
        self.owns(a)?;
        self.owns(b)?;
        Ok(self.class_from_sparse(&self.cup_sparse(&a.sparse(), &b.sparse())))
    }

    pub fn power(&self, a: &CohomologyClass, k: usize) -> Result<CohomologyClass> {
        let mut out = self.unit();
        for _ in 0..k {
            out = self.cup(&out, a)?;
        }
        Ok(out)
    }

    /// Coefficient of the orientation generator in `a * b`.
    pub fn pair(&self, a: &CohomologyClass, b: &CohomologyClass) -> Result<Scalar> {
        let p = self.cup(a, b)?;
        Ok(p.coeffs[self.orientation].clone())
    }

    fn pair_basis(&self, i: usize, j: usize) -> Scalar {
        self.products[i][j]
            .iter()
            .find(|(k, _)| *k == self.orientation)
            .map(|(_, x)| x.clone())
            .unwrap_or_else(Scalar::zero)
    }

    /// Matrix of `pair` on `H^p x H^{2n-p}`.
    pub fn pairing_matrix(&self, p: usize) -> Matrix {
        let rows = self.range(p);
        let cols = self.range(self.top.saturating_sub(p));
        let cols = if p > self.top { self.range(p) } else { cols };
        let mut m = Matrix::zeros(rows.len(), cols.len());
        for (r, i) in rows.clone().enumerate() {
            for (c, j) in cols.clone().enumerate() {
                m.set(r, c, self.pair_basis(i, j));
            }
        }
        m
    }

    /// Degrees are scanned from the middle upward, then downward, so the
    /// reported degree is the first failure at or above the middle.
    pub fn is_poincare_algebra(&self) -> PoincareStatus {
        let n = self.half();
        for p in (n..=self.top).chain((0..n).rev()) {
            let m = self.pairing_matrix(p);
            if m.rows() != m.cols() || m.rank() != m.rows() {
                return PoincareStatus { ok: false, failing_degree: Some(p) };
            }
        }
        PoincareStatus { ok: true, failing_degree: None }
    }

    /// Runs every structural check, reporting the first offending item.
    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        let fail = |f| Err(Error::Validation(f));
        for i in 0..n {
            let e = vec![(i, Scalar::one())];
            if self.products[self.unit][i] != e || self.products[i][self.unit] != e {
                return fail(ValidationFailure::Unit { element: self.basis[i].name.clone() });
            }
        }
        for i in 0..n {
            for j in i..n {
                let s = sign(self.basis[i].degree * self.basis[j].degree);
                let swapped: SparseVec =
                    self.products[j][i].iter().map(|(k, x)| (*k, x * &s)).collect();
                if self.products[i][j] != swapped {
                    return fail(ValidationFailure::GradedCommutativity {
                        left: self.basis[i].name.clone(),
                        right: self.basis[j].name.clone(),
                    });
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                let ij = &self.products[i][j];
                for k in 0..n {
                    if self.basis[i].degree + self.basis[j].degree + self.basis[k].degree > self.top {
                        continue;
                    }
                    let left = self.cup_sparse(ij, &[(k, Scalar::one())]);
                    let right = self.cup_sparse(&[(i, Scalar::one())], &self.products[j][k]);
                    if left != right {
                        return fail(ValidationFailure::Associativity {
                            a: self.basis[i].name.clone(),
                            b: self.basis[j].name.clone(),
                            c: self.basis[k].name.clone(),
                        });
                    }
                }
            }
        }
        if self.basis[self.orientation].degree != self.top {
            return fail(ValidationFailure::Orientation(format!(
                "{} has degree {}, not {}",
                self.basis[self.orientation].name, self.basis[self.orientation].degree, self.top
            )));
        }
        if let Some(p) = self.is_poincare_algebra().failing_degree {
            return fail(ValidationFailure::Poincare { degree: p });
        }
        Ok(())
    }

    /// Coordinates of the functional `pair(c, -)` on `H^{2n - deg c}`.
    pub fn poincare_dual(&self, c: &CohomologyClass) -> Result<Vec<Scalar>> {
        self.owns(c)?;
        let d = self.degree_or(c, 0)?;
        let m = self.pairing_matrix(d);
        if m.rows() != m.cols() || m.rank() != m.rows() {
            return Err(Error::SingularPairing(d));
        }
        let coords = self.component(c, d);
        // functional_j = sum_i c_i pair(b_i, b'_j)
        m.transpose().mul_vec(&coords)
    }

    /// Class `c` of degree `2n - q` with `pair(c, b_j) = functional_j` for
    /// the degree-`q` basis `b_j`.
    pub fn poincare_dual_inverse(&self, q: usize, functional: &[Scalar]) -> Result<CohomologyClass> {
        if q > self.top {
            return Err(Error::Degree(format!("degree {q} above the top")));
        }
        let p = self.top - q;
        let m = self.pairing_matrix(p);
        if m.rows() != m.cols() || m.rank() != m.rows() {
            return Err(Error::SingularPairing(p));
        }
        if functional.len() != m.cols() {
            return Err(Error::DimensionMismatch("functional length".into()));
        }
        let x = m.transpose().solve(functional)?.ok_or(Error::SingularPairing(p))?;
        self.class_in_degree(p, &x)
    }

    /// Matrix of `x -> x * gamma` from `H^p`, columns indexed by the source.
    pub fn cup_matrix(&self, gamma: &CohomologyClass, p: usize) -> Result<Matrix> {
        self.owns(gamma)?;
        let g = self.degree_or(gamma, 0)?;
        let src = self.range(p);
        let tgt = self.range(p + g);
        let mut m = Matrix::zeros(tgt.len(), src.len());
        if tgt.is_empty() {
            return Ok(m);
        }
        let gs = gamma.sparse();
        for (c, i) in src.enumerate() {
            for (k, x) in self.cup_sparse(&[(i, Scalar::one())], &gs) {
                m.set(k - tgt.start, c, x);
            }
        }
        Ok(m)
    }

    pub fn kernel_of_cup(&self, gamma: &CohomologyClass, p: usize) -> Result<Subspace> {
        let m = self.cup_matrix(gamma, p)?;
        Ok(m.nullspace().with_degree(p))
    }

    /// Rank of `x -> x * omega^k` from `H^{n-k}` to `H^{n+k}`.
    pub fn lefschetz_rank(&self, omega: &CohomologyClass, k: usize) -> Result<usize> {
        self.require_degree(omega, 2)?;
        if k > self.half() {
            return Ok(0);
        }
        let w = self.power(omega, k)?;
        Ok(self.cup_matrix(&w, self.half() - k)?.rank())
    }

    pub fn is_hard_lefschetz(&self, omega: &CohomologyClass) -> Result<bool> {
        self.require_degree(omega, 2)?;
        let n = self.half();
        for k in 1..=n {
            let (lo, hi) = (self.dim_of(n - k), self.dim_of(n + k));
            if lo != hi || self.lefschetz_rank(omega, k)? != lo {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn require_degree(&self, c: &CohomologyClass, d: usize) -> Result<()> {
        self.owns(c)?;
        let got = self.degree_or(c, d)?;
        if got != d {
            return Err(Error::Degree(format!("expected a degree-{d} class, got degree {got}")));
        }
        Ok(())
    }

    /// Human-readable linear combination.
    pub fn format_class(&self, c: &CohomologyClass) -> String {
        let terms: Vec<String> = c
            .support()
            .map(|(i, x)| {
                if x.is_one() {
                    self.basis[i].name.clone()
                } else {
                    format!("{}:{}", format_scalar(x), self.basis[i].name)
                }
            })
            .collect();
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join(" + ")
        }
    }

    /// Parses `"name + 2/3:name2"`; the empty string and `"0"` are zero.
    pub fn parse_class(&self, s: &str) -> Result<CohomologyClass> {
        let mut c = self.zero();
        let s = s.trim();
        if s.is_empty() || s == "0" {
            return Ok(c);
        }
        for term in s.split('+') {
            let term = term.trim();
            let (coef, name) = match term.split_once(':') {
                Some((k, n)) => (crate::scalar::parse_scalar(k)?, n.trim()),
                None => (Scalar::one(), term),
            };
            c.coeffs[self.index_of(name)?] += coef;
        }
        Ok(c)
    }

    /// Products of basis elements as `(left, right, result)` triples, skipping
    /// implied unit products and zeros.
    pub fn listed_products(&self) -> Vec<(usize, usize, &SparseVec)> {
        let mut out = Vec::new();
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                if i == self.unit || j == self.unit || self.products[i][j].is_empty() {
                    continue;
                }
                out.push((i, j, &self.products[i][j]));
            }
        }
        out
    }

    /// Re-expresses the algebra in a new basis. `new_basis` lists every new
    /// basis element as a homogeneous class of `self`; the degree-0 entry must
    /// be the unit and the top-degree entry becomes the orientation. Returns
    /// the new algebra and the isomorphism `self -> new`.
    pub fn rebase(&self, new_basis: &[(String, CohomologyClass)]) -> Result<(GradedAlgebra, AlgebraMap)> {
        let mut by_degree: Vec<Vec<usize>> = vec![Vec::new(); self.top + 1];
        for (pos, (name, c)) in new_basis.iter().enumerate() {
            self.owns(c)?;
            let d = self
                .homogeneous_degree(c)
                .ok_or_else(|| Error::Degree(format!("new basis element {name} is not homogeneous")))?;
            by_degree[d].push(pos);
        }
        let mut basis = Vec::new();
        let mut old_to_new: Vec<Matrix> = Vec::new();
        let mut new_to_old: Vec<Matrix> = Vec::new();
        for d in 0..=self.top {
            let r = self.range(d);
            if by_degree[d].len() != r.len() {
                return Err(Error::DimensionMismatch(format!(
                    "degree {d} needs {} new basis elements, got {}",
                    r.len(),
                    by_degree[d].len()
                )));
            }
            let mut cmat = Matrix::zeros(r.len(), r.len());
            for (col, &pos) in by_degree[d].iter().enumerate() {
                let (name, c) = &new_basis[pos];
                basis.push(BasisElement::new(name.clone(), d));
                for (row, i) in r.clone().enumerate() {
                    cmat.set(row, col, c.coeffs[i].clone());
                }
            }
            let inv = cmat
                .inverse()
                .ok_or_else(|| Error::DimensionMismatch(format!("new degree-{d} basis is dependent")))?;
            old_to_new.push(inv);
            new_to_old.push(cmat);
        }
        let unit_pos = by_degree[0][0];
        if new_basis[unit_pos].1 != self.unit() {
            return Err(Error::Schema("degree-0 element of a new basis must be the unit".into()));
        }
        // global new index of each new element
        let mut new_offsets = vec![0; self.top + 2];
        for d in 0..=self.top {
            new_offsets[d + 1] = new_offsets[d] + by_degree[d].len();
        }
        let to_new = |v: &SparseVec| -> SparseVec {
            let mut out = Vec::new();
            for d in 0..=self.top {
                let r = self.range(d);
                let local: Vec<Scalar> = (0..r.len())
                    .map(|k| {
                        v.iter().find(|(i, _)| *i == r.start + k).map(|e| e.1.clone()).unwrap_or_else(Scalar::zero)
                    })
                    .collect();
                if local.iter().all(Zero::is_zero) {
                    continue;
                }
                let coords = old_to_new[d].mul_vec(&local).expect("square");
                for (k, x) in coords.into_iter().enumerate() {
                    if !x.is_zero() {
                        out.push((new_offsets[d] + k, x));
                    }
                }
            }
            out
        };
        let elems: Vec<SparseVec> = (0..=self.top)
            .flat_map(|d| by_degree[d].iter().map(|&pos| new_basis[pos].1.sparse()).collect::<Vec<_>>())
            .collect();
        let mut products = Vec::new();
        for (a, ea) in elems.iter().enumerate() {
            for (b, eb) in elems.iter().enumerate() {
                let p = to_new(&self.cup_sparse(ea, eb));
                if !p.is_empty() {
                    products.push((a, b, p));
                }
            }
        }
        let orientation = new_offsets[self.top];
        let alg = GradedAlgebra::new(self.top, basis, products, orientation)?;
        let map = AlgebraMap { source: self.id, target: alg.id, blocks: old_to_new };
        Ok((alg, map))
    }

    /// Graded tensor product with the Koszul sign
    /// `(a x b)(a' x b') = (-1)^{|b||a'|} aa' x bb'`.
    pub fn tensor(&self, other: &GradedAlgebra) -> Result<GradedAlgebra> {
        let join = |a: usize, b: usize| -> String {
            match (a == self.unit, b == other.unit) {
                (true, true) => self.basis[a].name.clone(),
                (true, false) => other.basis[b].name.clone(),
                (false, true) => self.basis[a].name.clone(),
                (false, false) => format!("{}*{}", self.basis[a].name, other.basis[b].name),
            }
        };
        let m = other.dim();
        let idx = |a: usize, b: usize| a * m + b;
        let mut basis = Vec::new();
        for a in 0..self.dim() {
            for b in 0..m {
                basis.push(BasisElement::new(join(a, b), self.basis[a].degree + other.basis[b].degree));
            }
        }
        let mut products = Vec::new();
        for a in 0..self.dim() {
            for b in 0..m {
                for a2 in 0..self.dim() {
                    for b2 in 0..m {
                        let pa = &self.products[a][a2];
                        let pb = &other.products[b][b2];
                        if pa.is_empty() || pb.is_empty() {
                            continue;
                        }
                        let s = sign(other.basis[b].degree * self.basis[a2].degree);
                        let mut res = Vec::new();
                        for (i, x) in pa {
                            for (j, y) in pb {
                                res.push((idx(*i, *j), x * y * &s));
                            }
                        }
                        res.sort_by_key(|e| e.0);
                        products.push((idx(a, b), idx(a2, b2), res));
                    }
                }
            }
        }
        GradedAlgebra::new(
            self.top + other.top,
            basis,
            products,
            idx(self.orientation, other.orientation),
        )
    }
}

/// Degree-preserving linear map between algebras, one matrix per degree
/// (rows indexed by the target basis, columns by the source basis).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraMap {
    source: u64,
    target: u64,
    blocks: Vec<Matrix>,
}

impl AlgebraMap {
    pub fn from_blocks(source: &GradedAlgebra, target: &GradedAlgebra, blocks: Vec<Matrix>) -> Result<Self> {
        if blocks.len() != source.top() + 1 {
            return Err(Error::DimensionMismatch("one block per source degree".into()));
        }
        for (d, b) in blocks.iter().enumerate() {
            if b.cols() != source.dim_of(d) || b.rows() != target.dim_of(d) {
                return Err(Error::DimensionMismatch(format!("block of degree {d}")));
            }
        }
        Ok(AlgebraMap { source: source.id(), target: target.id(), blocks })
    }

    /// The unique linear map sending the listed source classes to the given
    /// images and extended multiplicatively. Every source basis element must
    /// be reachable as a polynomial in the listed classes.
    pub fn from_generator_images(
        source: &GradedAlgebra,
        target: &GradedAlgebra,
        images: &[(CohomologyClass, CohomologyClass)],
    ) -> Result<Self> {
        let mut gens = Vec::new();
        for (g, img) in images {
            source.owns(g)?;
            target.owns(img)?;
            let d = source
                .homogeneous_degree(g)
                .ok_or_else(|| Error::Degree("generator must be a nonzero homogeneous class".into()))?;
            if target.degree_or(img, d)? != d {
                return Err(Error::Degree("generator image changes degree".into()));
            }
            gens.push((d, g.clone(), img.clone()));
        }
        // words in the generators, closed under multiplication up to the top degree
        let mut words: Vec<(usize, CohomologyClass, CohomologyClass)> =
            vec![(0, source.unit(), target.unit())];
        let mut frontier = words.clone();
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for (d, s, t) in &frontier {
                for (gd, g, gi) in &gens {
                    if d + gd > source.top() {
                        continue;
                    }
                    let w = (d + gd, source.cup(s, g)?, target.cup(t, gi)?);
                    if !w.1.is_zero() || !w.2.is_zero() {
                        next.push(w);
                    }
                }
            }
            // keep only words that add rank in the source, plus ones exposing inconsistency
            let mut kept = Vec::new();
            for w in next {
                let same: Vec<&CohomologyClass> =
                    words.iter().chain(kept.iter()).filter(|x: &&(usize, _, _)| x.0 == w.0).map(|x| &x.1).collect();
                let before = independent_rank(source, w.0, &same);
                let mut with = same.clone();
                with.push(&w.1);
                if independent_rank(source, w.0, &with) > before {
                    kept.push(w);
                } else {
                    words.push(w.clone()); // dependent words are still consistency checks
                }
            }
            words.extend(kept.iter().cloned());
            frontier = kept;
        }
        let mut blocks = Vec::new();
        for d in 0..=source.top() {
            let ws: Vec<&(usize, CohomologyClass, CohomologyClass)> = words.iter().filter(|w| w.0 == d).collect();
            let src_dim = source.dim_of(d);
            let tgt_dim = target.dim_of(d);
            // solve X * S = T where S, T have one column per word
            let mut s = Matrix::zeros(ws.len(), src_dim);
            let mut t = Matrix::zeros(ws.len(), tgt_dim);
            for (r, w) in ws.iter().enumerate() {
                for (c, x) in source.component(&w.1, d).into_iter().enumerate() {
                    s.set(r, c, x);
                }
                for (c, x) in target.component(&w.2, d).into_iter().enumerate() {
                    t.set(r, c, x);
                }
            }
            if s.rank() != src_dim {
                return Err(Error::Schema(format!(
                    "generators do not span degree {d} of the source algebra"
                )));
            }
            let mut block = Matrix::zeros(tgt_dim, src_dim);
            for row in 0..tgt_dim {
                let rhs: Vec<Scalar> = (0..ws.len()).map(|r| t.get(r, row).clone()).collect();
                let x = s.solve(&rhs)?.ok_or_else(|| {
                    Error::Validation(ValidationFailure::NotMultiplicative {
                        left: format!("degree {d}"),
                        right: "generator relations".into(),
                    })
                })?;
                for (c, v) in x.into_iter().enumerate() {
                    block.set(row, c, v);
                }
            }
            blocks.push(block);
        }
        let map = AlgebraMap { source: source.id(), target: target.id(), blocks };
        map.check_multiplicative(source, target)?;
        Ok(map)
    }

    pub fn block(&self, d: usize) -> &Matrix {
        &self.blocks[d]
    }

    pub fn blocks(&self) -> &[Matrix] {
        &self.blocks
    }

    pub fn apply(&self, source: &GradedAlgebra, target: &GradedAlgebra, c: &CohomologyClass) -> Result<CohomologyClass> {
        source.owns(c)?;
        if source.id() != self.source || target.id() != self.target {
            return Err(Error::MismatchedAlgebra);
        }
        let mut out = target.zero();
        for d in 0..=source.top().min(target.top()) {
            let comp = source.component(c, d);
            if comp.iter().all(Zero::is_zero) {
                continue;
            }
            let img = self.blocks[d].mul_vec(&comp)?;
            let r = target.range(d);
            for (k, x) in img.into_iter().enumerate() {
                out.coeffs[r.start + k] += x;
            }
        }
        Ok(out)
    }

    pub fn check_multiplicative(&self, source: &GradedAlgebra, target: &GradedAlgebra) -> Result<()> {
        for i in 0..source.dim() {
            for j in 0..source.dim() {
                let (a, b) = (source.basis_class(i), source.basis_class(j));
                let lhs = self.apply(source, target, &source.cup(&a, &b)?)?;
                let rhs = target.cup(&self.apply(source, target, &a)?, &self.apply(source, target, &b)?)?;
                if lhs != rhs {
                    return Err(Error::Validation(ValidationFailure::NotMultiplicative {
                        left: source.name(i).to_string(),
                        right: source.name(j).to_string(),
                    }));
                }
            }
        }
        if self.apply(source, target, &source.unit())? != target.unit() {
            return Err(Error::Validation(ValidationFailure::NotMultiplicative {
                left: "1".into(),
                right: "1".into(),
            }));
        }
        Ok(())
    }

    /// Inverse of an isomorphism.
    pub fn inverse(&self, source: &GradedAlgebra, target: &GradedAlgebra) -> Result<AlgebraMap> {
        let blocks = self
            .blocks
            .iter()
            .map(|b| b.inverse().ok_or_else(|| Error::DimensionMismatch("map is not invertible".into())))
            .collect::<Result<Vec<_>>>()?;
        let _ = source;
        Ok(AlgebraMap { source: target.id(), target: self.source, blocks })
    }
}

fn independent_rank(alg: &GradedAlgebra, d: usize, classes: &[&CohomologyClass]) -> usize {
    let rows: Vec<Vec<Scalar>> = classes.iter().map(|c| alg.component(c, d)).collect();
    if rows.is_empty() {
        return 0;
    }
    Matrix::from_rows(rows, alg.dim_of(d)).expect("uniform").rank()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::scalar::{int, ratio};

    #[test]
    fn cpn_products() {
        let cp2 = corpus::cpn(2);
        let x = cp2.named("x").unwrap();
        assert_eq!(cp2.cup(&x, &x).unwrap(), cp2.named("x^2").unwrap());
        let one = cp2.unit();
        assert_eq!(cp2.cup(&one, &x).unwrap(), x);
        assert_eq!(cp2.pair(&x, &x).unwrap(), int(1));
        assert_eq!(cp2.pair(&one, &cp2.named("x^2").unwrap()).unwrap(), int(1));
        assert_eq!(cp2.pair(&x, &cp2.named("x^2").unwrap()).unwrap(), int(0));
        assert_eq!(cp2.pair(&one, &x).unwrap(), int(0));
        assert_eq!(cp2.pairing_matrix(2), Matrix::from_i64(&[&[1]]));
    }

    #[test]
    fn torus_pairing_is_antisymmetric() {
        let t2 = corpus::torus(2);
        let (e1, e2) = (t2.named("e1").unwrap(), t2.named("e2").unwrap());
        assert_eq!(t2.pair(&e2, &e1).unwrap(), int(-1));
        assert_eq!(t2.pairing_matrix(1), Matrix::from_i64(&[&[0, 1], &[-1, 0]]));
        assert_eq!(corpus::point().pairing_matrix(0), Matrix::from_i64(&[&[1]]));
    }

    #[test]
    fn mismatched_parents_are_rejected() {
        let a = corpus::cpn(2);
        let b = corpus::cpn(3);
        assert!(matches!(a.cup(&a.unit(), &b.unit()), Err(Error::MismatchedAlgebra)));
    }

    #[test]
    fn truncated_ring_fails_poincare_at_degree_two() {
        // Q[x]/x^3 with the degree 4 class dropped
        let alg = GradedAlgebra::from_parts(
            4,
            vec![BasisElement::new("1", 0), BasisElement::new("x", 2)],
            vec![],
            1,
        )
        .unwrap();
        let st = alg.is_poincare_algebra();
        assert!(!st.ok);
        assert_eq!(st.failing_degree, Some(2));
        assert_eq!(alg.pairing_matrix(2).rank(), 0);
        assert!(matches!(alg.validate(), Err(Error::Validation(_))));
    }

    #[test]
    fn mutation_breaks_commutativity() {
        let t2 = corpus::torus(2);
        let (e1, e2) = (t2.index_of("e1").unwrap(), t2.index_of("e2").unwrap());
        let mut prods: Vec<(usize, usize, SparseVec)> =
            t2.listed_products().into_iter().map(|(i, j, v)| (i, j, v.clone())).collect();
        for p in prods.iter_mut() {
            if p.0 == e1 && p.1 == e2 {
                p.2[0].1 = int(2);
            }
        }
        let err = GradedAlgebra::new(2, t2.basis().to_vec(), prods, t2.orientation_index()).unwrap_err();
        assert!(matches!(err, Error::Validation(ValidationFailure::GradedCommutativity { .. })));
    }

    #[test]
    fn poincare_dual_round_trip() {
        for alg in [corpus::cpn(3), corpus::torus(2), corpus::s2xs2(), corpus::kodaira_thurston()] {
            for i in 0..alg.dim() {
                let c = alg.basis_class(i);
                let d = alg.degree_of_index(i);
                let f = alg.poincare_dual(&c).unwrap();
                let back = alg.poincare_dual_inverse(alg.top() - d, &f).unwrap();
                assert_eq!(back, c, "{}", alg.name(i));
            }
        }
        let cp2 = corpus::cpn(2);
        assert_eq!(cp2.poincare_dual(&cp2.orientation()).unwrap(), vec![int(1)]);
        assert_eq!(cp2.poincare_dual(&cp2.named("x^2").unwrap()).unwrap(), vec![int(1)]);
    }

    #[test]
    fn lefschetz_ranks() {
        let cp5 = corpus::cpn(5);
        let x = cp5.named("x").unwrap();
        assert_eq!(cp5.lefschetz_rank(&x, 5).unwrap(), 1);
        assert!(cp5.is_hard_lefschetz(&x).unwrap());
        let t2 = corpus::torus(2);
        let w = t2.named("e1*e2").unwrap();
        assert_eq!(t2.lefschetz_rank(&w, 1).unwrap(), 1);
        let kt = corpus::kodaira_thurston();
        let w = corpus::kodaira_thurston_omega(&kt);
        assert!(!kt.is_hard_lefschetz(&w).unwrap());
        assert!(matches!(cp5.lefschetz_rank(&cp5.unit(), 1), Err(Error::Degree(_))));
    }

    #[test]
    fn kernels_of_cup() {
        let cp2 = corpus::cpn(2);
        assert!(cp2.kernel_of_cup(&cp2.named("x").unwrap(), 0).unwrap().is_zero());
        let t2 = corpus::torus(2);
        let e1 = t2.named("e1").unwrap();
        let k = t2.kernel_of_cup(&e1, 1).unwrap();
        assert_eq!(k, Subspace::from_spanning(1, 2, vec![vec![int(1), int(0)]]));
        assert_eq!(t2.kernel_of_cup(&t2.zero(), 1).unwrap().dim(), 2);
    }

    #[test]
    fn rebase_and_tensor() {
        let t2 = corpus::torus(2);
        let f = t2.parse_class("e1 + e2").unwrap();
        let new = vec![
            ("1".to_string(), t2.unit()),
            ("f".to_string(), f),
            ("g".to_string(), t2.named("e2").unwrap()),
            ("top".to_string(), t2.named("e1*e2").unwrap().scale(&ratio(1, 1))),
        ];
        let (b, iso) = t2.rebase(&new).unwrap();
        iso.check_multiplicative(&t2, &b).unwrap();
        let fg = b.cup(&b.named("f").unwrap(), &b.named("g").unwrap()).unwrap();
        assert_eq!(fg, b.named("top").unwrap());

        let prod = corpus::truncated_polynomial("y", 1, 2).tensor(&corpus::cpn(2)).unwrap();
        assert_eq!(prod.betti(), vec![1, 0, 2, 0, 2, 0, 1]);
    }

    #[test]
    fn parse_and_format_classes() {
        let t2 = corpus::torus(2);
        let c = t2.parse_class("e1 + -1/2:e2").unwrap();
        assert_eq!(t2.format_class(&c), "e1 + -1/2:e2");
        assert!(t2.parse_class("e9").is_err());
    }
}
