//! Generalized Wang homomorphisms: degree `1 - m` derivations of a
//! Poincare algebra, the linear space they span, and their adjoints.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraMap, CohomologyClass, GradedAlgebra};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, RowReducer, SparseVec, Subspace};
use crate::scalar::{sign, Scalar};

/// Sign in the Leibniz rule for an operator of degree `1 - m`.
///
/// `Koszul`: `d(ab) = d(a) b + (-1)^{(m-1)|a|} a d(b)`.
/// `Flipped`: `d(ab) = (-1)^{(m-1)|b|} d(a) b + a d(b)`, the same rule for
/// an operator acting from the right.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LeibnizSign {
    #[default]
    Koszul,
    Flipped,
}

impl LeibnizSign {
    pub fn name(self) -> &'static str {
        match self {
            LeibnizSign::Koszul => "koszul",
            LeibnizSign::Flipped => "flipped",
        }
    }

    /// Signs `(left, right)` multiplying `d(a) b` and `a d(b)`.
    pub fn coefficients(self, m: usize, deg_a: usize, deg_b: usize) -> (Scalar, Scalar) {
        match self {
            LeibnizSign::Koszul => (Scalar::one(), sign((m - 1) * deg_a)),
            LeibnizSign::Flipped => (sign((m - 1) * deg_b), Scalar::one()),
        }
    }
}

impl std::str::FromStr for LeibnizSign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "koszul" => Ok(LeibnizSign::Koszul),
            "flipped" => Ok(LeibnizSign::Flipped),
            other => Err(Error::Schema(format!("unknown Leibniz sign convention {other:?}"))),
        }
    }
}

/// A linear map `H^k -> H^{k-m+1}` for every `k`; `blocks[k]` has one row
/// per target basis element and one column per source basis element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WangMap {
    algebra: u64,
    m: usize,
    blocks: Vec<Matrix>,
}

fn target_dim(alg: &GradedAlgebra, m: usize, k: usize) -> usize {
    if k + 1 >= m {
        alg.dim_of(k + 1 - m)
    } else {
        0
    }
}

impl WangMap {
    pub fn zero(alg: &GradedAlgebra, m: usize) -> Self {
        let blocks = (0..=alg.top()).map(|k| Matrix::zeros(target_dim(alg, m, k), alg.dim_of(k))).collect();
        WangMap { algebra: alg.id(), m, blocks }
    }

    pub fn from_blocks(alg: &GradedAlgebra, m: usize, blocks: BTreeMap<usize, Matrix>) -> Result<Self> {
        let mut w = WangMap::zero(alg, m);
        for (k, b) in blocks {
            if k > alg.top() {
                return Err(Error::Degree(format!("block for source degree {k} above the top")));
            }
            if b.rows() != w.blocks[k].rows() || b.cols() != w.blocks[k].cols() {
                return Err(Error::DimensionMismatch(format!(
                    "block for degree {k} is {}x{}, expected {}x{}",
                    b.rows(),
                    b.cols(),
                    w.blocks[k].rows(),
                    w.blocks[k].cols()
                )));
            }
            w.blocks[k] = b;
        }
        Ok(w)
    }

    /// Map with `d(b) = image` on the listed basis elements and zero elsewhere.
    pub fn from_images(alg: &GradedAlgebra, m: usize, images: &[(&str, CohomologyClass)]) -> Result<Self> {
        let mut w = WangMap::zero(alg, m);
        for (name, img) in images {
            let i = alg.index_of(name)?;
            let k = alg.degree_of_index(i);
            if k + 1 < m {
                if img.is_zero() {
                    continue;
                }
                return Err(Error::Degree(format!("{name} maps to negative degree")));
            }
            let t = k + 1 - m;
            if alg.degree_or(img, t)? != t {
                return Err(Error::Degree(format!("image of {name} must have degree {t}")));
            }
            let col = i - alg.range(k).start;
            for (row, x) in alg.component(img, t).into_iter().enumerate() {
                w.blocks[k].set(row, col, x);
            }
        }
        Ok(w)
    }

    pub fn algebra_id(&self) -> u64 {
        self.algebra
    }

    pub fn base_dimension(&self) -> usize {
        self.m
    }

    pub fn block(&self, k: usize) -> &Matrix {
        &self.blocks[k]
    }

    pub fn blocks(&self) -> &[Matrix] {
        &self.blocks
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.iter().all(Matrix::is_zero)
    }

    /// Number of scalar unknowns of a map with these dimensions.
    pub fn unknown_count(alg: &GradedAlgebra, m: usize) -> usize {
        (0..=alg.top()).map(|k| target_dim(alg, m, k) * alg.dim_of(k)).sum()
    }

    /// Flattened coordinates: blocks in ascending source degree, row-major.
    pub fn flatten(&self) -> Vec<Scalar> {
        self.blocks.iter().flat_map(|b| b.to_rows().into_iter().flatten()).collect()
    }

    pub fn unflatten(alg: &GradedAlgebra, m: usize, v: &[Scalar]) -> Result<Self> {
        if v.len() != Self::unknown_count(alg, m) {
            return Err(Error::DimensionMismatch("flattened Wang map length".into()));
        }
        let mut w = WangMap::zero(alg, m);
        let mut pos = 0;
        for b in w.blocks.iter_mut() {
            for r in 0..b.rows() {
                for c in 0..b.cols() {
                    b.set(r, c, v[pos].clone());
                    pos += 1;
                }
            }
        }
        Ok(w)
    }

    pub fn apply(&self, alg: &GradedAlgebra, c: &CohomologyClass) -> Result<CohomologyClass> {
        alg.owns(c)?;
        if alg.id() != self.algebra {
            return Err(Error::MismatchedAlgebra);
        }
        let mut out = alg.zero();
        for k in 0..=alg.top() {
            if k + 1 < self.m {
                continue;
            }
            let comp = alg.component(c, k);
            if comp.iter().all(Zero::is_zero) {
                continue;
            }
            let img = self.blocks[k].mul_vec(&comp)?;
            out = out.add(&alg.class_in_degree(k + 1 - self.m, &img)?);
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Scalar) -> WangMap {
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                let rows = b.to_rows().into_iter().map(|r| r.into_iter().map(|x| x * c).collect()).collect();
                Matrix::from_rows(rows, b.cols()).expect("same shape")
            })
            .collect();
        WangMap { algebra: self.algebra, m: self.m, blocks }
    }

    pub fn add(&self, other: &WangMap) -> Result<WangMap> {
        if self.algebra != other.algebra || self.m != other.m {
            return Err(Error::MismatchedAlgebra);
        }
        let v: Vec<Scalar> = self.flatten().iter().zip(other.flatten()).map(|(a, b)| a + b).collect();
        let mut out = self.clone();
        let mut pos = 0;
        for b in out.blocks.iter_mut() {
            for r in 0..b.rows() {
                for c in 0..b.cols() {
                    b.set(r, c, v[pos].clone());
                    pos += 1;
                }
            }
        }
        Ok(out)
    }

    /// `phi o d o phi^{-1}` for an isomorphism `phi: source -> target`.
    pub fn conjugate(
        &self,
        source: &GradedAlgebra,
        target: &GradedAlgebra,
        phi: &AlgebraMap,
    ) -> Result<WangMap> {
        if source.id() != self.algebra {
            return Err(Error::MismatchedAlgebra);
        }
        let inv = phi.inverse(source, target)?;
        let mut out = WangMap::zero(target, self.m);
        for k in 0..=source.top() {
            if k + 1 < self.m {
                continue;
            }
            let t = k + 1 - self.m;
            out.blocks[k] = phi.block(t).mul(&self.blocks[k])?.mul(inv.block(k))?;
        }
        Ok(out)
    }
}

/// `d(ab) - s_1 d(a) b - s_2 a d(b)` with the signs of `convention`.
pub fn leibniz_residual(
    alg: &GradedAlgebra,
    d: &WangMap,
    a: &CohomologyClass,
    b: &CohomologyClass,
    convention: LeibnizSign,
) -> Result<CohomologyClass> {
    let da = alg.degree_or(a, 0)?;
    let db = alg.degree_or(b, 0)?;
    let (s1, s2) = convention.coefficients(d.m, da, db);
    let lhs = d.apply(alg, &alg.cup(a, b)?)?;
    let t1 = alg.cup(&d.apply(alg, a)?, b)?.scale(&s1);
    let t2 = alg.cup(a, &d.apply(alg, b)?)?.scale(&s2);
    Ok(lhs.sub(&t1).sub(&t2))
}

/// The space of all Wang maps satisfying the Leibniz rule for base
/// dimension `m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WangSpace {
    algebra: u64,
    m: usize,
    convention: LeibnizSign,
    coords: Subspace,
    basis: Vec<WangMap>,
}

impl WangSpace {
    pub fn from_coordinates(alg: &GradedAlgebra, m: usize, convention: LeibnizSign, coords: Subspace) -> Result<Self> {
        let basis = coords
            .basis()
            .iter()
            .map(|v| WangMap::unflatten(alg, m, v))
            .collect::<Result<Vec<_>>>()?;
        Ok(WangSpace { algebra: alg.id(), m, convention, coords, basis })
    }

    pub fn base_dimension(&self) -> usize {
        self.m
    }

    pub fn convention(&self) -> LeibnizSign {
        self.convention
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn basis(&self) -> &[WangMap] {
        &self.basis
    }

    /// Echelon basis of flattened coordinates.
    pub fn coordinates(&self) -> &Subspace {
        &self.coords
    }

    pub fn algebra_id(&self) -> u64 {
        self.algebra
    }

    pub fn contains(&self, d: &WangMap) -> bool {
        d.algebra == self.algebra && d.m == self.m && self.coords.contains(&d.flatten())
    }

    /// `sum_i coeffs[i] * basis[i]`.
    pub fn combination(&self, alg: &GradedAlgebra, coeffs: &[Scalar]) -> Result<WangMap> {
        if coeffs.len() != self.dim() {
            return Err(Error::DimensionMismatch("combination length".into()));
        }
        let mut v = vec![Scalar::zero(); WangMap::unknown_count(alg, self.m)];
        for (c, b) in coeffs.iter().zip(self.coords.basis()) {
            for (x, y) in v.iter_mut().zip(b) {
                *x += c * y;
            }
        }
        WangMap::unflatten(alg, self.m, &v)
    }

    /// Subspace of those combinations (coordinates over `self.basis()`)
    /// satisfying the given linear rows, re-expressed as a Wang space.
    pub fn restrict(&self, alg: &GradedAlgebra, allowed: &Subspace) -> Result<WangSpace> {
        let rows: Vec<Vec<Scalar>> = allowed
            .basis()
            .iter()
            .map(|c| self.combination(alg, c).map(|w| w.flatten()))
            .collect::<Result<_>>()?;
        let coords = Subspace::from_spanning(0, WangMap::unknown_count(alg, self.m), rows);
        WangSpace::from_coordinates(alg, self.m, self.convention, coords)
    }
}

/// Global index of the unknown for entry `(row, col)` of block `k`.
struct Unknowns {
    offsets: Vec<usize>,
    total: usize,
}

impl Unknowns {
    fn new(alg: &GradedAlgebra, m: usize) -> Self {
        let mut offsets = vec![0; alg.top() + 2];
        for k in 0..=alg.top() {
            offsets[k + 1] = offsets[k] + target_dim(alg, m, k) * alg.dim_of(k);
        }
        Unknowns { total: offsets[alg.top() + 1], offsets }
    }

    fn index(&self, alg: &GradedAlgebra, k: usize, row: usize, col: usize) -> usize {
        self.offsets[k] + row * alg.dim_of(k) + col
    }
}

/// Linear equations (over flattened unknowns) expressing Leibniz on the
/// pair of basis elements `(i, j)`, one per target basis element.
fn leibniz_rows(
    alg: &GradedAlgebra,
    m: usize,
    convention: LeibnizSign,
    unknowns: &Unknowns,
    i: usize,
    j: usize,
) -> Vec<SparseVec> {
    let (di, dj) = (alg.degree_of_index(i), alg.degree_of_index(j));
    if di + dj + 1 < m || di + dj + 1 - m > alg.top() {
        return Vec::new();
    }
    let t = di + dj + 1 - m;
    let tr = alg.range(t);
    let mut rows: Vec<BTreeMap<usize, Scalar>> = vec![BTreeMap::new(); tr.len()];
    let mut add = |out: usize, var: usize, x: Scalar| {
        *rows[out - tr.start].entry(var).or_insert_with(Scalar::zero) += x;
    };
    // d(b_i b_j)
    for (k, p) in alg.product(i, j) {
        let dk = di + dj;
        let col = k - alg.range(dk).start;
        for (row, out) in tr.clone().enumerate() {
            add(out, unknowns.index(alg, dk, row, col), p.clone());
        }
    }
    let (s1, s2) = convention.coefficients(m, di, dj);
    // - s1 d(b_i) b_j
    if di + 1 >= m {
        let src = alg.range(di + 1 - m);
        for (row, r) in src.enumerate() {
            let var = unknowns.index(alg, di, row, i - alg.range(di).start);
            for (out, q) in alg.product(r, j) {
                add(*out, var, -(q * &s1));
            }
        }
    }
    // - s2 b_i d(b_j)
    if dj + 1 >= m {
        let src = alg.range(dj + 1 - m);
        for (row, r) in src.enumerate() {
            let var = unknowns.index(alg, dj, row, j - alg.range(dj).start);
            for (out, q) in alg.product(i, r) {
                add(*out, var, -(q * &s2));
            }
        }
    }
    rows.into_iter()
        .map(|r| r.into_iter().filter(|(_, x)| !x.is_zero()).collect::<SparseVec>())
        .filter(|r| !r.is_empty())
        .collect()
}

/// Solves the Leibniz system on all unordered basis pairs.
pub fn solve_wang_space(alg: &GradedAlgebra, m: usize, convention: LeibnizSign) -> Result<WangSpace> {
    if m < 2 {
        return Err(Error::Degree(format!("base dimension must be at least 2, got {m}")));
    }
    let n = WangMap::unknown_count(alg, m);
    if m > alg.top() + 1 || n == 0 {
        return WangSpace::from_coordinates(alg, m, convention, Subspace::zero(0, n));
    }
    let unknowns = Unknowns::new(alg, m);
    debug_assert_eq!(unknowns.total, n);
    let mut red = RowReducer::new(n);
    for i in 0..alg.dim() {
        for j in i..alg.dim() {
            for row in leibniz_rows(alg, m, convention, &unknowns, i, j) {
                red.insert(row);
                if red.rank() == n {
                    return WangSpace::from_coordinates(alg, m, convention, Subspace::zero(0, n));
                }
            }
        }
    }
    let coords = Subspace::from_spanning(0, n, red.nullspace());
    WangSpace::from_coordinates(alg, m, convention, coords)
}

/// The dual Wang map, carried to cohomology through Poincare duality:
/// `blocks[k]` sends `H^{2n-k+m-1}` to `H^{2n-k}` so that
/// `pair(a, D(g)) = pair(d(a), g)` for `a` in `H^k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WangAdjoint {
    m: usize,
    blocks: Vec<Matrix>,
}

impl WangAdjoint {
    pub fn block(&self, k: usize) -> &Matrix {
        &self.blocks[k]
    }

    /// Homology-side matrix `H_{k-m+1} -> H_k` in dual bases.
    pub fn homology_block(d: &WangMap, k: usize) -> Matrix {
        d.block(k).transpose()
    }

    /// Applies the adjoint to a homogeneous class of degree `2n - k + m - 1`.
    pub fn apply(&self, alg: &GradedAlgebra, g: &CohomologyClass) -> Result<CohomologyClass> {
        let mut out = alg.zero();
        for k in 0..=alg.top() {
            if k + 1 < self.m {
                continue;
            }
            let src = alg.top() + self.m - 1 - k;
            if src > alg.top() {
                continue;
            }
            let comp = alg.component(g, src);
            if comp.iter().all(Zero::is_zero) {
                continue;
            }
            let v = self.blocks[k].mul_vec(&comp)?;
            out = out.add(&alg.class_in_degree(alg.top() - k, &v)?);
        }
        Ok(out)
    }
}

pub fn wang_adjoint(alg: &GradedAlgebra, d: &WangMap) -> Result<WangAdjoint> {
    if d.algebra != alg.id() {
        return Err(Error::MismatchedAlgebra);
    }
    let mut blocks = Vec::new();
    for k in 0..=alg.top() {
        if k + 1 < d.m {
            blocks.push(Matrix::zeros(alg.dim_of(alg.top() - k), 0));
            continue;
        }
        let t = k + 1 - d.m;
        let pk = alg.pairing_matrix(k);
        let pt = alg.pairing_matrix(t);
        let pk_inv = pk.inverse().ok_or(Error::SingularPairing(k))?;
        if pt.rows() != pt.cols() {
            return Err(Error::SingularPairing(t));
        }
        // P_k x = B^T P_t g
        blocks.push(pk_inv.mul(&d.block(k).transpose())?.mul(&pt)?);
    }
    Ok(WangAdjoint { m: d.m, blocks })
}

/// `d(omega)`; for `m = 2` this is the flux of the loop.
pub fn flux_of(alg: &GradedAlgebra, d: &WangMap, omega: &CohomologyClass) -> Result<CohomologyClass> {
    alg.require_degree(omega, 2)?;
    d.apply(alg, omega)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::scalar::int;

    fn t2_maps(t2: &GradedAlgebra) -> (WangMap, WangMap) {
        let one = t2.unit();
        let d1 = WangMap::from_images(
            t2,
            2,
            &[("e1", one.clone()), ("e1*e2", t2.named("e2").unwrap())],
        )
        .unwrap();
        let d2 = WangMap::from_images(
            t2,
            2,
            &[("e2", one), ("e1*e2", t2.named("e1").unwrap().neg())],
        )
        .unwrap();
        (d1, d2)
    }

    #[test]
    fn zero_map_has_zero_residual() {
        let t2 = corpus::torus(2);
        let z = WangMap::zero(&t2, 2);
        for i in 0..t2.dim() {
            for j in 0..t2.dim() {
                let r = leibniz_residual(&t2, &z, &t2.basis_class(i), &t2.basis_class(j), LeibnizSign::Koszul)
                    .unwrap();
                assert!(r.is_zero());
            }
        }
    }

    #[test]
    fn torus_residuals() {
        let t2 = corpus::torus(2);
        let (e1, e2) = (t2.named("e1").unwrap(), t2.named("e2").unwrap());
        let good = WangMap::from_images(&t2, 2, &[("e1", t2.unit()), ("e1*e2", e2.clone())]).unwrap();
        assert!(leibniz_residual(&t2, &good, &e1, &e2, LeibnizSign::Koszul).unwrap().is_zero());
        let bad = WangMap::from_images(&t2, 2, &[("e1", t2.unit()), ("e1*e2", e1.clone())]).unwrap();
        let r = leibniz_residual(&t2, &bad, &e1, &e2, LeibnizSign::Koszul).unwrap();
        assert_eq!(r, e1.sub(&e2));
    }

    #[test]
    fn torus_space_basis() {
        let t2 = corpus::torus(2);
        let w = solve_wang_space(&t2, 2, LeibnizSign::Koszul).unwrap();
        assert_eq!(w.dim(), 2);
        let (d1, d2) = t2_maps(&t2);
        assert_eq!(w.basis(), &[d1, d2]);
    }

    #[test]
    fn even_rings_have_no_wang_maps() {
        for m in 2..=5 {
            assert!(solve_wang_space(&corpus::cpn(2), m, LeibnizSign::Koszul).unwrap().is_zero());
        }
        assert!(solve_wang_space(&corpus::s2xs2(), 3, LeibnizSign::Koszul).unwrap().is_zero());
        let big = solve_wang_space(&corpus::cpn(2), 9, LeibnizSign::Koszul).unwrap();
        assert!(big.is_zero());
    }

    #[test]
    fn flipped_convention_agrees_on_torus() {
        let t2 = corpus::torus(2);
        assert_eq!(solve_wang_space(&t2, 2, LeibnizSign::Flipped).unwrap().dim(), 2);
        assert_eq!("flipped".parse::<LeibnizSign>().unwrap(), LeibnizSign::Flipped);
        assert!("other".parse::<LeibnizSign>().is_err());
    }

    #[test]
    fn adjoint_pairing_identity() {
        let t2 = corpus::torus(2);
        let (d1, _) = t2_maps(&t2);
        let adj = wang_adjoint(&t2, &d1).unwrap();
        for i in 0..t2.dim() {
            for j in 0..t2.dim() {
                let (a, g) = (t2.basis_class(i), t2.basis_class(j));
                let k = t2.degree_of_index(i);
                if k + 1 < 2 || t2.degree_of_index(j) + k != t2.top() + 1 {
                    continue;
                }
                let lhs = t2.pair(&d1.apply(&t2, &a).unwrap(), &g).unwrap();
                let rhs = t2.pair(&a, &adj.apply(&t2, &g).unwrap()).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn flux_of_torus_map() {
        let t2 = corpus::torus(2);
        let (d1, _) = t2_maps(&t2);
        let w = t2.named("e1*e2").unwrap();
        assert_eq!(flux_of(&t2, &d1, &w).unwrap(), t2.named("e2").unwrap());
        assert!(flux_of(&t2, &d1, &t2.named("e1").unwrap()).is_err());
        assert!(flux_of(&t2, &WangMap::zero(&t2, 2), &w).unwrap().is_zero());
    }

    #[test]
    fn flatten_round_trip() {
        let t2 = corpus::torus(2);
        let (d1, d2) = t2_maps(&t2);
        assert_eq!(WangMap::unflatten(&t2, 2, &d1.flatten()).unwrap(), d1);
        let s = d1.add(&d2.scale(&int(3))).unwrap();
        let w = solve_wang_space(&t2, 2, LeibnizSign::Koszul).unwrap();
        assert!(w.contains(&s));
        assert_eq!(w.combination(&t2, &[int(1), int(3)]).unwrap(), s);
    }
}
