//! Cohomology of projectivized normal bundles and of blow-ups along
//! symplectic submanifolds, with the line-class certificates.
//!
//! Notation: `V` has codimension `2k + 2` in `M`, `P_V` is the projectivized
//! normal bundle with tautological generator `xi` (`fiber_integrate(xi^k) =
//! 1`), `f: P_V -> M~` is the exceptional divisor and `J = f_!` its Gysin
//! push-forward. The class `u = J(1)` is dual to `[P_V]` and
//! `f^* u = tau = -xi`. The exceptional basis elements are
//! `v*u^j := J(v tau^{j-1})` for `1 <= j <= k`.

use num_traits::{One, Zero};

use crate::algebra::{AlgebraMap, BasisElement, CohomologyClass, GradedAlgebra};
use crate::error::{Error, Result};
use crate::gw::{GwTable, GwValue, ProblemSpec};
use crate::linalg::{Matrix, SparseVec};
use crate::scalar::{int, is_odd_integer, ratio, Scalar};

#[derive(Clone, Debug)]
pub struct BlowupInput {
    pub ambient: GradedAlgebra,
    pub v_algebra: GradedAlgebra,
    pub codim: usize,
    /// `c_1 .. c_{k+1}` of the normal bundle, in `H*(V)`.
    pub chern: Vec<CohomologyClass>,
    /// Restriction `H*(M) -> H*(V)`.
    pub restriction: AlgebraMap,
    /// `f^* u = tautological_sign * xi`; the geometric value is `-1`.
    pub tautological_sign: i64,
}

impl BlowupInput {
    pub fn k(&self) -> usize {
        (self.codim - 2) / 2
    }

    pub fn validate(&self) -> Result<()> {
        let (m, v) = (&self.ambient, &self.v_algebra);
        if self.codim % 2 != 0 || self.codim < 4 {
            return Err(Error::Degree(format!("codimension {} must be even and at least 4", self.codim)));
        }
        if v.top() + self.codim != m.top() {
            return Err(Error::Degree(format!(
                "dim V + codim = {} differs from dim M = {}",
                v.top() + self.codim,
                m.top()
            )));
        }
        if self.chern.len() != self.k() + 1 {
            return Err(Error::Schema(format!("expected {} Chern classes, got {}", self.k() + 1, self.chern.len())));
        }
        for (i, c) in self.chern.iter().enumerate() {
            v.owns(c)?;
            if let Some(d) = v.homogeneous_degree(c) {
                if d != 2 * (i + 1) {
                    return Err(Error::ChernDegree { index: i + 1, expected: 2 * (i + 1), got: d });
                }
            } else if !c.is_zero() {
                return Err(Error::ChernDegree { index: i + 1, expected: 2 * (i + 1), got: usize::MAX });
            }
        }
        if ![-1, 1].contains(&self.tautological_sign) {
            return Err(Error::Schema("tautological_sign must be 1 or -1".into()));
        }
        self.restriction.check_multiplicative(m, v)
    }
}

/// `H*(P_V)` as a free `H*(V)`-module on `1, xi, ..., xi^k`.
#[derive(Clone, Debug)]
pub struct BundleRing {
    pub v: GradedAlgebra,
    pub k: usize,
    pub chern: Vec<CohomologyClass>,
    pub ring: GradedAlgebra,
    /// `pos[j][b]` is the index of `v_b xi^j`.
    pos: Vec<Vec<usize>>,
}

type Poly = Vec<Vec<Scalar>>;

fn mul_v(v: &GradedAlgebra, a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
    let sa = crate::linalg::sparse_from_dense(a);
    let sb = crate::linalg::sparse_from_dense(b);
    crate::linalg::dense_from_sparse(&v.cup_sparse(&sa, &sb), v.dim())
}

fn bundle_name(v: &GradedAlgebra, b: usize, j: usize) -> String {
    let xi = match j {
        0 => String::new(),
        1 => "xi".into(),
        _ => format!("xi^{j}"),
    };
    match (b == v.unit_index(), j) {
        (true, 0) => "1".into(),
        (true, _) => xi,
        (false, 0) => v.name(b).to_string(),
        (false, _) => format!("{}*{xi}", v.name(b)),
    }
}

/// Reduces powers above `k` with `xi^{k+1} = -sum_{i>=1} c_i xi^{k+1-i}`.
fn reduce_poly(v: &GradedAlgebra, k: usize, chern: &[CohomologyClass], mut p: Poly) -> Poly {
    let nv = v.dim();
    while p.len() > k + 1 {
        let e = p.len() - 1;
        let top = p.pop().unwrap();
        if top.iter().all(Zero::is_zero) {
            continue;
        }
        for (i, c) in chern.iter().enumerate() {
            let i = i + 1;
            if i > e {
                break;
            }
            let t = mul_v(v, &top, c.coeffs());
            for (x, y) in p[e - i].iter_mut().zip(t) {
                *x -= y;
            }
        }
        debug_assert_eq!(p.iter().map(Vec::len).max().unwrap_or(nv), nv);
    }
    p.resize(k + 1, vec![Scalar::zero(); nv]);
    p
}

pub fn projective_bundle_ring(v: &GradedAlgebra, k: usize, chern: &[CohomologyClass]) -> Result<BundleRing> {
    if chern.len() != k + 1 {
        return Err(Error::Schema(format!("expected {} Chern classes", k + 1)));
    }
    for (i, c) in chern.iter().enumerate() {
        v.owns(c)?;
        if !c.is_zero() && v.homogeneous_degree(c) != Some(2 * (i + 1)) {
            return Err(Error::ChernDegree {
                index: i + 1,
                expected: 2 * (i + 1),
                got: v.homogeneous_degree(c).unwrap_or(usize::MAX),
            });
        }
    }
    let nv = v.dim();
    let cidx = |j: usize, b: usize| j * nv + b;
    let mut basis = Vec::new();
    for j in 0..=k {
        for b in 0..nv {
            basis.push(BasisElement::new(bundle_name(v, b, j), v.degree_of_index(b) + 2 * j));
        }
    }
    let mut products = Vec::new();
    for j1 in 0..=k {
        for b1 in 0..nv {
            for j2 in 0..=k {
                for b2 in 0..nv {
                    if b1 == v.unit_index() && j1 == 0 || b2 == v.unit_index() && j2 == 0 {
                        continue;
                    }
                    let mut p: Poly = vec![vec![Scalar::zero(); nv]; j1 + j2 + 1];
                    p[j1 + j2] = crate::linalg::dense_from_sparse(v.product(b1, b2), nv);
                    let p = reduce_poly(v, k, chern, p);
                    let res: SparseVec = p
                        .iter()
                        .enumerate()
                        .flat_map(|(j, row)| {
                            row.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(move |(b, x)| (cidx(j, b), x.clone()))
                        })
                        .collect();
                    if !res.is_empty() {
                        products.push((cidx(j1, b1), cidx(j2, b2), res));
                    }
                }
            }
        }
    }
    let ring = GradedAlgebra::new(v.top() + 2 * k, basis, products, cidx(k, v.orientation_index()))?;
    let pos = (0..=k)
        .map(|j| (0..nv).map(|b| ring.index_of(&bundle_name(v, b, j)).expect("named")).collect())
        .collect();
    Ok(BundleRing { v: v.clone(), k, chern: chern.to_vec(), ring, pos })
}

impl BundleRing {
    pub fn from_poly(&self, p: &[CohomologyClass]) -> Result<CohomologyClass> {
        let raw: Poly = p.iter().map(|c| c.coeffs().to_vec()).collect();
        for c in p {
            self.v.owns(c)?;
        }
        Ok(self.from_raw(reduce_poly(&self.v, self.k, &self.chern, raw)))
    }

    fn from_raw(&self, p: Poly) -> CohomologyClass {
        let mut coeffs = vec![Scalar::zero(); self.ring.dim()];
        for (j, row) in p.iter().enumerate() {
            for (b, x) in row.iter().enumerate() {
                coeffs[self.pos[j][b]] += x;
            }
        }
        self.ring.class_from_sparse(&crate::linalg::sparse_from_dense(&coeffs))
    }

    /// Coefficients in `H*(V)` of `1, xi, ..., xi^k`.
    pub fn to_poly(&self, c: &CohomologyClass) -> Result<Vec<CohomologyClass>> {
        self.ring.owns(c)?;
        Ok((0..=self.k)
            .map(|j| {
                let s: SparseVec = (0..self.v.dim())
                    .filter_map(|b| {
                        let x = c.coeff(self.pos[j][b]);
                        (!x.is_zero()).then(|| (b, x.clone()))
                    })
                    .collect();
                self.v.class_from_sparse(&s)
            })
            .collect())
    }

    pub fn xi(&self) -> CohomologyClass {
        self.ring.basis_class(self.pos[1][self.v.unit_index()])
    }

    pub fn pi_star(&self, v: &CohomologyClass) -> Result<CohomologyClass> {
        self.v.owns(v)?;
        let mut p = vec![self.v.zero(); self.k + 1];
        p[0] = v.clone();
        self.from_poly(&p)
    }

    /// Coefficient of `xi^k`.
    pub fn fiber_integrate(&self, c: &CohomologyClass) -> Result<CohomologyClass> {
        Ok(self.to_poly(c)?.pop().expect("k >= 0"))
    }

    /// Poincare dual in `P_V` of a line in one fiber: `pi^* vol_V * xi^{k-1}`.
    pub fn line_dual(&self) -> CohomologyClass {
        self.ring.basis_class(self.pos[self.k - 1][self.v.orientation_index()])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CertMode {
    /// The intersection number must be exactly 1.
    Strict,
    /// Any odd intersection number is accepted.
    Relaxed,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    /// `<fib f^* alpha * fib f^* beta, [V]>`.
    pub value: Scalar,
    pub certified: bool,
    pub mode: CertMode,
    /// `fib(f^* alpha)` and `fib(f^* beta)` in `H*(V)`.
    pub v_alpha: CohomologyClass,
    pub v_beta: CohomologyClass,
}

#[derive(Clone, Debug)]
pub struct Blowup {
    pub input: BlowupInput,
    pub bundle: BundleRing,
    pub ring: GradedAlgebra,
    tau: CohomologyClass,
    /// Final index of ambient basis element `b`.
    amb: Vec<usize>,
    /// `exc[j-1][b]` is the final index of `v_b u^j`.
    exc: Vec<Vec<usize>>,
}

fn exc_name(v: &GradedAlgebra, b: usize, j: usize) -> String {
    let u = if j == 1 { "u".to_string() } else { format!("u^{j}") };
    if b == v.unit_index() {
        u
    } else {
        format!("{}*{u}", v.name(b))
    }
}

/// `i_* v`: the ambient class with `pair(i_* v, a) = pair_V(v, i^* a)`.
pub fn i_push(inp: &BlowupInput, v: &CohomologyClass) -> Result<CohomologyClass> {
    let (m, va) = (&inp.ambient, &inp.v_algebra);
    let Some(q) = va.homogeneous_degree(v) else { return Ok(m.zero()) };
    let t = m.top() - q - inp.codim;
    let functional: Vec<Scalar> = m
        .range(t)
        .map(|j| {
            let r = inp.restriction.apply(m, va, &m.basis_class(j))?;
            va.pair(v, &r)
        })
        .collect::<Result<_>>()?;
    m.poincare_dual_inverse(t, &functional)
}

pub fn blowup_ring(inp: &BlowupInput) -> Result<Blowup> {
    inp.validate()?;
    let k = inp.k();
    let (m, v) = (&inp.ambient, &inp.v_algebra);
    let bundle = projective_bundle_ring(v, k, &inp.chern)?;
    let p = &bundle.ring;
    let tau = bundle.xi().scale(&int(inp.tautological_sign));

    // sign self-test before anything depends on the convention
    let line = p.pair(&tau, &bundle.line_dual())?;
    if line != int(-1) {
        return Err(Error::SignConvention(format!(
            "[P_V] . A = {} under the chosen tautological sign; expected -1",
            crate::scalar::format_scalar(&line)
        )));
    }

    let (nm, nv) = (m.dim(), v.dim());
    let n = nm + k * nv;
    let ex = |j: usize, b: usize| nm + (j - 1) * nv + b;
    let mut basis: Vec<BasisElement> = m.basis().to_vec();
    for j in 1..=k {
        for b in 0..nv {
            let name = exc_name(v, b, j);
            if m.index_of(&name).is_ok() {
                return Err(Error::Schema(format!("ambient basis already uses the name {name}")));
            }
            basis.push(BasisElement::new(name, v.degree_of_index(b) + 2 * j));
        }
    }

    // J on P-classes, in construction coordinates
    let s = int(inp.tautological_sign);
    let mut j_basis: Vec<Vec<Scalar>> = vec![vec![Scalar::zero(); n]; p.dim()];
    for b in 0..nv {
        for i in 0..k {
            let mut c = j_basis[bundle.pos[i][b]].clone();
            c[ex(i + 1, b)] = if i % 2 == 0 { Scalar::one() } else { s.clone() };
            j_basis[bundle.pos[i][b]] = c;
        }
    }
    let j_lower = |c: &CohomologyClass, j_basis: &Vec<Vec<Scalar>>| -> Vec<Scalar> {
        let mut out = vec![Scalar::zero(); n];
        for (i, x) in c.support() {
            for (o, y) in out.iter_mut().zip(&j_basis[i]) {
                *o += x * y;
            }
        }
        out
    };
    for b in 0..nv {
        // J(v xi^k) = p^* i_* v - sum_{i>=1} J(v c_i xi^{k-i})
        let vb = v.basis_class(b);
        let ip = i_push(inp, &vb)?;
        let mut out = vec![Scalar::zero(); n];
        for (idx, x) in ip.support() {
            out[idx] += x;
        }
        for i in 1..=k {
            let vc = v.cup(&vb, &inp.chern[i - 1])?;
            let mut poly = vec![v.zero(); k + 1];
            poly[k - i] = vc;
            let cls = bundle.from_poly(&poly)?;
            for (o, y) in out.iter_mut().zip(j_lower(&cls, &j_basis)) {
                *o -= y;
            }
        }
        j_basis[bundle.pos[k][b]] = out;
    }
    let jmap = |c: &CohomologyClass| j_lower(c, &j_basis);

    // f^* on construction basis
    let mut f_star: Vec<CohomologyClass> = Vec::with_capacity(n);
    for a in 0..nm {
        f_star.push(bundle.pi_star(&inp.restriction.apply(m, v, &m.basis_class(a))?)?);
    }
    for j in 1..=k {
        for b in 0..nv {
            let mut c = bundle.pi_star(&v.basis_class(b))?;
            for _ in 0..j {
                c = p.cup(&c, &tau)?;
            }
            f_star.push(c);
        }
    }
    // x_e with J(x_e) = e for exceptional e
    let x_of = |e: usize| -> Result<CohomologyClass> {
        let (j, b) = ((e - nm) / nv + 1, (e - nm) % nv);
        let mut c = bundle.pi_star(&v.basis_class(b))?;
        for _ in 1..j {
            c = p.cup(&c, &tau)?;
        }
        Ok(c)
    };

    let mut products = Vec::new();
    for l in 0..n {
        for r in 0..n {
            if l == m.unit_index() || r == m.unit_index() {
                continue;
            }
            let dense: Vec<Scalar> = match (l < nm, r < nm) {
                (true, true) => crate::linalg::dense_from_sparse(m.product(l, r), n),
                (true, false) => jmap(&p.cup(&f_star[l], &x_of(r)?)?),
                (false, true) => jmap(&p.cup(&x_of(l)?, &f_star[r])?),
                (false, false) => jmap(&p.cup(&p.cup(&x_of(l)?, &x_of(r)?)?, &tau)?),
            };
            let sv = crate::linalg::sparse_from_dense(&dense);
            if !sv.is_empty() {
                products.push((l, r, sv));
            }
        }
    }
    let ring = GradedAlgebra::new(m.top(), basis.clone(), products, m.orientation_index())?;
    let final_of: Vec<usize> = basis.iter().map(|b| ring.index_of(&b.name).expect("named")).collect();
    let amb = (0..nm).map(|a| final_of[a]).collect();
    let exc = (1..=k).map(|j| (0..nv).map(|b| final_of[ex(j, b)]).collect()).collect();
    Ok(Blowup { input: inp.clone(), bundle, ring, tau, amb, exc })
}

impl Blowup {
    pub fn k(&self) -> usize {
        self.bundle.k
    }

    pub fn tautological(&self) -> &CohomologyClass {
        &self.tau
    }

    pub fn p_star(&self, a: &CohomologyClass) -> Result<CohomologyClass> {
        self.input.ambient.owns(a)?;
        let s: SparseVec = a.support().map(|(i, x)| (self.amb[i], x.clone())).collect();
        Ok(self.ring.class_from_sparse(&s))
    }

    /// `u = J(1)`, dual to `[P_V]`.
    pub fn u(&self) -> CohomologyClass {
        self.ring.basis_class(self.exc[0][self.input.v_algebra.unit_index()])
    }

    /// `J(a) = t^*(tau_a)`, raising degree by 2.
    pub fn thom_push(&self, a: &CohomologyClass) -> Result<CohomologyClass> {
        let p = &self.bundle.ring;
        p.owns(a)?;
        if let Some(d) = p.homogeneous_degree(a) {
            if d + 2 > self.ring.top() {
                return Err(Error::DegreeOverflow { degree: d + 2, top: self.ring.top() });
            }
        }
        let v = &self.input.v_algebra;
        let k = self.k();
        let poly = self.bundle.to_poly(a)?;
        let mut out = self.ring.zero();
        let s = int(self.input.tautological_sign);
        for (i, coeff) in poly.iter().enumerate() {
            for (b, x) in coeff.support() {
                let term = if i < k {
                    let sign = if i % 2 == 0 { Scalar::one() } else { s.clone() };
                    self.ring.basis_class(self.exc[i][b]).scale(&(x * sign))
                } else {
                    self.top_push(&v.basis_class(b))?.scale(x)
                };
                out = out.add(&term);
            }
        }
        Ok(out)
    }

    fn top_push(&self, vb: &CohomologyClass) -> Result<CohomologyClass> {
        let (v, k) = (&self.input.v_algebra, self.k());
        let mut out = self.p_star(&i_push(&self.input, vb)?)?;
        for i in 1..=k {
            let mut poly = vec![v.zero(); k + 1];
            poly[k - i] = v.cup(vb, &self.input.chern[i - 1])?;
            out = out.sub(&self.thom_push(&self.bundle.from_poly(&poly)?)?);
        }
        Ok(out)
    }

    pub fn pullback_f(&self, c: &CohomologyClass) -> Result<CohomologyClass> {
        self.ring.owns(c)?;
        let (m, v, p) = (&self.input.ambient, &self.input.v_algebra, &self.bundle.ring);
        let mut out = p.zero();
        for a in 0..m.dim() {
            let x = c.coeff(self.amb[a]);
            if !x.is_zero() {
                let r = self.input.restriction.apply(m, v, &m.basis_class(a))?;
                out = out.add(&self.bundle.pi_star(&r)?.scale(x));
            }
        }
        for (j, row) in self.exc.iter().enumerate() {
            for (b, &idx) in row.iter().enumerate() {
                let x = c.coeff(idx);
                if x.is_zero() {
                    continue;
                }
                let mut t = self.bundle.pi_star(&v.basis_class(b))?;
                for _ in 0..=j {
                    t = p.cup(&t, &self.tau)?;
                }
                out = out.add(&t.scale(x));
            }
        }
        Ok(out)
    }

    /// `<alpha, A>` for the line class `A` in a fiber of `P_V`.
    pub fn line_pairing(&self, alpha: &CohomologyClass) -> Result<Scalar> {
        let f = self.pullback_f(alpha)?;
        self.bundle.ring.pair(&f, &self.bundle.line_dual())
    }

    /// `[P_V] . (multiple * A)`.
    pub fn intersection_with_exceptional(&self, multiple: &Scalar) -> Result<Scalar> {
        Ok(self.line_pairing(&self.u())? * multiple)
    }

    /// Poincare dual of the line class, `J(pi^* vol_V xi^{k-1})`.
    pub fn pd_line(&self) -> Result<CohomologyClass> {
        self.thom_push(&self.bundle.line_dual())
    }

    pub fn gw_certificate(&self, alpha: &CohomologyClass, beta: &CohomologyClass, mode: CertMode) -> Result<Certificate> {
        let v = &self.input.v_algebra;
        let va = self.bundle.fiber_integrate(&self.pullback_f(alpha)?)?;
        let vb = self.bundle.fiber_integrate(&self.pullback_f(beta)?)?;
        let value = v.pair(&va, &vb)?;
        let certified = match mode {
            CertMode::Strict => value == int(1),
            CertMode::Relaxed => is_odd_integer(&value),
        };
        Ok(Certificate { value, certified, mode, v_alpha: va, v_beta: vb })
    }

    /// Total degree of nonzero line-class invariants with two insertions.
    pub fn line_degree_sum(&self) -> usize {
        self.ring.top() + 2 * self.k() - 2
    }

    /// `(J(pi^* v xi^{k-1}), J(pi^* w xi^{k-1}))` over dual basis pairs of `V`.
    pub fn a4_family(&self) -> Result<Vec<(CohomologyClass, CohomologyClass)>> {
        let v = &self.input.v_algebra;
        let k = self.k();
        let mut out = Vec::new();
        for b in 0..v.dim() {
            let vb = v.basis_class(b);
            let q = v.degree_of_index(b);
            // dual element w with pair(v_c, w) = delta_{bc}
            let mut functional = vec![Scalar::zero(); v.dim_of(q)];
            functional[b - v.range(q).start] = crate::scalar::sign(q * (v.top() - q));
            let w = v.poincare_dual_inverse(q, &functional)?;
            let lift = |c: &CohomologyClass| -> Result<CohomologyClass> {
                let mut poly = vec![v.zero(); k + 1];
                poly[k - 1] = c.clone();
                self.thom_push(&self.bundle.from_poly(&poly)?)
            };
            out.push((lift(&vb)?, lift(&w)?));
        }
        Ok(out)
    }

    /// All basis pairs `(i, j)`, `i <= j`, whose certificate value is
    /// `+-1` (strict; the sign is absorbed by linearity) or odd (relaxed).
    pub fn certified_basis_pairs(&self, mode: CertMode) -> Result<Vec<(usize, usize, Scalar)>> {
        let d = self.line_degree_sum();
        let mut out = Vec::new();
        for i in 0..self.ring.dim() {
            for j in i..self.ring.dim() {
                if self.ring.degree_of_index(i) + self.ring.degree_of_index(j) != d {
                    continue;
                }
                let c = self.gw_certificate(&self.ring.basis_class(i), &self.ring.basis_class(j), CertMode::Relaxed)?;
                let ok = match mode {
                    CertMode::Strict => c.value == int(1) || c.value == int(-1),
                    CertMode::Relaxed => c.certified,
                };
                if ok {
                    out.push((i, j, c.value));
                }
            }
        }
        Ok(out)
    }

    /// Line-class table holding the given certified basis pairs.
    pub fn line_table(&self, pairs: &[(usize, usize)], mode: CertMode) -> Result<GwTable> {
        let mut entries = Vec::new();
        for &(i, j) in pairs {
            let (a, b) = (self.ring.basis_class(i), self.ring.basis_class(j));
            let c = self.gw_certificate(&a, &b, CertMode::Relaxed)?;
            let ok = match mode {
                CertMode::Strict => c.value == int(1) || c.value == int(-1),
                CertMode::Relaxed => c.certified,
            };
            if !ok {
                return Err(Error::Schema(format!(
                    "pair ({}, {}) is not certified",
                    self.ring.name(i),
                    self.ring.name(j)
                )));
            }
            entries.push((vec![i, j], GwValue::Nonzero));
        }
        GwTable::new(&self.ring, "A", 0, 2, self.line_degree_sum(), false, true, entries)
    }

    /// Matrices of `f^*` (`P_V <- M~`), `pi_*` (`V <- P_V`) and `J`
    /// (`M~ <- P_V`), columns indexed by the source basis.
    pub fn maps(&self) -> Result<(Matrix, Matrix, Matrix)> {
        let (p, v, r) = (&self.bundle.ring, &self.input.v_algebra, &self.ring);
        let cols = |src: usize, f: &dyn Fn(usize) -> Result<CohomologyClass>| -> Result<Vec<Vec<Scalar>>> {
            (0..src).map(|i| Ok(f(i)?.coeffs().to_vec())).collect()
        };
        let f = Matrix::from_rows(cols(r.dim(), &|i| self.pullback_f(&r.basis_class(i)))?, p.dim())?.transpose();
        let pi = Matrix::from_rows(cols(p.dim(), &|i| self.bundle.fiber_integrate(&p.basis_class(i)))?, v.dim())?
            .transpose();
        let j = Matrix::from_rows(
            cols(p.dim(), &|i| {
                let c = p.basis_class(i);
                if p.degree_of_index(i) + 2 > r.top() {
                    Ok(r.zero())
                } else {
                    self.thom_push(&c)
                }
            })?,
            r.dim(),
        )?
        .transpose();
        Ok((f, pi, j))
    }
}

/// `CP^5` blown up along `T^4` with `x -> w`; Chern data trivial unless given.
pub fn cp5_along_t4(chern: Option<[&str; 3]>) -> Result<Blowup> {
    let ambient = crate::corpus::cpn(5);
    let v = crate::corpus::t4_symplectic_basis();
    let restriction =
        AlgebraMap::from_generator_images(&ambient, &v, &[(ambient.named("x")?, v.named("w")?)])?;
    let chern = match chern {
        Some(c) => c.iter().map(|s| v.parse_class(s)).collect::<Result<_>>()?,
        None => vec![v.zero(); 3],
    };
    blowup_ring(&BlowupInput { ambient, v_algebra: v, codim: 6, chern, restriction, tautological_sign: -1 })
}

/// The c-splitting problem for Hamiltonian fibrations with fiber the blow-up
/// of `CP^5` along `T^4`: line-class tables for a line `L` of `CP^5` away
/// from `V` and for the fiber line `A`.
pub fn cp5_blowup_problem(b: &Blowup) -> Result<ProblemSpec> {
    let r = &b.ring;
    let x5 = r.index_of("x^5")?;
    let wu2 = r.index_of("w*u^2")?;
    let phi_l = GwTable::new(r, "L", 0, 2, 20, false, true, vec![(vec![x5, x5], GwValue::Nonzero)])?;
    let phi_a = b.line_table(&[(wu2, wu2)], CertMode::Strict)?;
    let omega = r.named("x")?.sub(&b.u().scale(&ratio(1, 10)));
    let mut spec = ProblemSpec::new(omega);
    spec.tables = vec![phi_l, phi_a];
    spec.hamiltonian = true;
    spec.base_dimensions = vec![4, 5, 6, 7];
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn point_blowup_input(n: usize) -> BlowupInput {
        let ambient = corpus::cpn(n);
        let v = corpus::point();
        let restriction = AlgebraMap::from_generator_images(&ambient, &v, &[(ambient.named("x").unwrap(), v.zero())])
            .unwrap();
        BlowupInput {
            ambient,
            v_algebra: v.clone(),
            codim: 2 * n,
            chern: vec![v.zero(); n],
            restriction,
            tautological_sign: -1,
        }
    }

    #[test]
    fn bundle_over_a_point_is_projective_space() {
        let v = corpus::point();
        let b = projective_bundle_ring(&v, 3, &vec![v.zero(); 4]).unwrap();
        assert_eq!(b.ring.betti(), corpus::cpn(3).betti());
        let xi = b.xi();
        assert!(b.ring.power(&xi, 4).unwrap().is_zero());
        assert_eq!(b.fiber_integrate(&b.ring.power(&xi, 3).unwrap()).unwrap(), v.unit());
        assert!(b.fiber_integrate(&b.pi_star(&v.unit()).unwrap()).unwrap().is_zero());
    }

    #[test]
    fn trivial_bundle_matches_kunneth() {
        let v = corpus::t4_symplectic_basis();
        let b = projective_bundle_ring(&v, 2, &vec![v.zero(); 3]).unwrap();
        let kun = v.tensor(&corpus::truncated_polynomial("xi", 2, 2)).unwrap();
        assert_eq!(b.ring.betti(), kun.betti());
        let w = b.pi_star(&v.named("w").unwrap()).unwrap();
        let top = b.ring.cup(&b.ring.cup(&w, &w).unwrap(), &b.ring.power(&b.xi(), 2).unwrap()).unwrap();
        assert_eq!(b.ring.pair(&top, &b.ring.unit()).unwrap(), int(1));
    }

    #[test]
    fn twisted_bundle_is_poincare() {
        let v = corpus::t4_symplectic_basis();
        let c = vec![v.named("w").unwrap().scale(&int(3)), v.named("vol").unwrap(), v.zero()];
        let b = projective_bundle_ring(&v, 2, &c).unwrap();
        assert!(b.ring.is_poincare_algebra().ok);
        // xi^3 = -c1 xi^2 - c2 xi
        let xi3 = b.ring.power(&b.xi(), 3).unwrap();
        let p = b.to_poly(&xi3).unwrap();
        assert_eq!(p[2], c[0].neg());
        assert_eq!(p[1], c[1].neg());
        let bad = vec![v.named("vol").unwrap(), v.zero(), v.zero()];
        assert!(matches!(projective_bundle_ring(&v, 2, &bad), Err(Error::ChernDegree { index: 1, .. })));
    }

    #[test]
    fn projection_formula() {
        let v = corpus::t4_symplectic_basis();
        let c = vec![v.named("w").unwrap(), v.zero(), v.zero()];
        let b = projective_bundle_ring(&v, 2, &c).unwrap();
        for i in 0..v.dim() {
            for j in 0..b.ring.dim() {
                let vi = v.basis_class(i);
                let lhs = b.fiber_integrate(&b.ring.cup(&b.pi_star(&vi).unwrap(), &b.ring.basis_class(j)).unwrap());
                let rhs = v.cup(&vi, &b.fiber_integrate(&b.ring.basis_class(j)).unwrap()).unwrap();
                assert_eq!(lhs.unwrap(), rhs);
            }
        }
    }

    #[test]
    fn cp5_along_t4_ring() {
        let b = cp5_along_t4(None).unwrap();
        let r = &b.ring;
        assert_eq!(r.betti(), vec![1, 0, 2, 4, 8, 8, 8, 4, 2, 0, 1]);
        assert!(r.is_poincare_algebra().ok);
        let x4 = r.power(&r.named("x").unwrap(), 4).unwrap();
        assert!(r.cup(&b.u(), &x4).unwrap().is_zero());
        assert_eq!(b.intersection_with_exceptional(&int(1)).unwrap(), int(-1));
        assert_eq!(b.intersection_with_exceptional(&int(2)).unwrap(), int(-2));
        assert_eq!(b.line_degree_sum(), 12);
    }

    #[test]
    fn cp5_with_chern_data() {
        let b = cp5_along_t4(Some(["6:w", "15:vol", "0"])).unwrap();
        assert!(b.ring.is_poincare_algebra().ok);
        assert_eq!(b.intersection_with_exceptional(&int(1)).unwrap(), int(-1));
    }

    #[test]
    fn point_blowups() {
        for n in [2, 3] {
            let b = blowup_ring(&point_blowup_input(n)).unwrap();
            assert_eq!(b.ring.dim(), n + 1 + n - 1);
            assert_eq!(b.intersection_with_exceptional(&int(1)).unwrap(), int(-1));
            // u^n = (-1)^{n-1} times the point class
            let un = b.ring.power(&b.u(), n).unwrap();
            let expect = if n % 2 == 1 { int(1) } else { int(-1) };
            assert_eq!(b.ring.pair(&un, &b.ring.unit()).unwrap(), expect);
        }
    }

    #[test]
    fn pullback_is_multiplicative_and_thom_identity() {
        let b = cp5_along_t4(Some(["2:w", "vol", "0"])).unwrap();
        let (r, p) = (&b.ring, &b.bundle.ring);
        for i in 0..r.dim() {
            for j in 0..r.dim() {
                let (a, c) = (r.basis_class(i), r.basis_class(j));
                let lhs = b.pullback_f(&r.cup(&a, &c).unwrap()).unwrap();
                let rhs = p.cup(&b.pullback_f(&a).unwrap(), &b.pullback_f(&c).unwrap()).unwrap();
                assert_eq!(lhs, rhs, "{} {}", r.name(i), r.name(j));
            }
        }
        for i in 0..p.dim() {
            if p.degree_of_index(i) + 2 > r.top() {
                continue;
            }
            let a = p.basis_class(i);
            let lhs = b.pullback_f(&b.thom_push(&a).unwrap()).unwrap();
            assert_eq!(lhs, p.cup(&a, b.tautological()).unwrap());
        }
        assert_eq!(b.thom_push(&p.unit()).unwrap(), b.u());
        assert_eq!(b.pullback_f(&b.u()).unwrap(), b.bundle.xi().neg());
        assert_eq!(b.pullback_f(&r.unit()).unwrap(), p.unit());
        let x = b.p_star(&b.input.ambient.named("x").unwrap()).unwrap();
        assert_eq!(b.pullback_f(&x).unwrap(), b.bundle.pi_star(&b.input.v_algebra.named("w").unwrap()).unwrap());
        // top-degree P_V classes push to classes of the same integral
        let top = p.orientation();
        assert_eq!(r.pair(&b.thom_push(&top).unwrap(), &r.unit()).unwrap(), int(1));
    }

    #[test]
    fn square_of_exceptional_pair_certified() {
        let b = cp5_along_t4(None).unwrap();
        let r = &b.ring;
        let alpha = r.power(&b.u(), b.k()).unwrap();
        let beta = b.pd_line().unwrap().neg();
        let c = b.gw_certificate(&alpha, &beta, CertMode::Strict).unwrap();
        assert!(c.certified);
        assert_eq!(c.v_alpha, b.input.v_algebra.unit());
        assert_eq!(c.v_beta, b.input.v_algebra.orientation());
        // beta pairs with u to 1, i.e. beta is dual to -A
        assert_eq!(r.pair(&beta, &b.u()).unwrap(), int(1));
        let z = b.gw_certificate(&r.unit(), &r.unit(), CertMode::Strict).unwrap();
        assert!(!z.certified && z.value.is_zero());
    }

    #[test]
    fn a4_family_certified() {
        for chern in [None, Some(["6:w", "15:vol", "0"])] {
            let b = cp5_along_t4(chern).unwrap();
            let fam = b.a4_family().unwrap();
            assert_eq!(fam.len(), 16);
            for (a, c) in &fam {
                assert!(b.gw_certificate(a, c, CertMode::Strict).unwrap().certified);
            }
        }
    }

    #[test]
    fn sign_knob_fails_self_test() {
        let mut inp = point_blowup_input(2);
        inp.tautological_sign = 1;
        assert!(matches!(blowup_ring(&inp), Err(Error::SignConvention(_))));
    }

    #[test]
    fn relaxed_mode_accepts_odd_values() {
        let b = cp5_along_t4(None).unwrap();
        let alpha = b.ring.power(&b.u(), 2).unwrap().scale(&int(3));
        let beta = b.pd_line().unwrap().neg();
        assert!(!b.gw_certificate(&alpha, &beta, CertMode::Strict).unwrap().certified);
        assert!(b.gw_certificate(&alpha, &beta, CertMode::Relaxed).unwrap().certified);
    }
}
