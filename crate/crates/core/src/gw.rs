//! Gromov-Witten tables as sparse graded-symmetric multilinear forms, and
//! the linear constraints they impose on Wang maps.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;

use crate::algebra::{CohomologyClass, GradedAlgebra};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, RowReducer, Subspace};
use crate::scalar::{format_scalar, sign, Scalar};
use crate::wang::{solve_wang_space, LeibnizSign, WangMap, WangSpace};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GwValue {
    Exact(Scalar),
    /// Value unknown but asserted nonzero.
    Nonzero,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GwTable {
    pub class_label: String,
    pub genus: usize,
    pub arity: usize,
    pub degree_sum: usize,
    pub flux_free: bool,
    pub image_nonzero: bool,
    algebra: u64,
    /// Keyed by nondecreasing basis-index tuples.
    entries: BTreeMap<Vec<usize>, GwValue>,
}

/// Sorts a tuple of basis indices, returning the Koszul sign of the
/// permutation, or `None` when an odd element repeats (the entry is then
/// forced to vanish).
pub fn canonical_tuple(alg: &GradedAlgebra, tuple: &[usize]) -> Option<(Vec<usize>, Scalar)> {
    let mut t = tuple.to_vec();
    let mut swaps = 0usize;
    for i in 0..t.len() {
        for j in (i + 1..t.len()).rev() {
            if t[j - 1] > t[j] {
                swaps += alg.degree_of_index(t[j - 1]) * alg.degree_of_index(t[j]);
                t.swap(j - 1, j);
            }
        }
    }
    if t.windows(2).any(|w| w[0] == w[1] && alg.degree_of_index(w[0]) % 2 == 1) {
        return None;
    }
    Some((t, sign(swaps)))
}

/// Exact part plus a rational combination of certificate entries.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SymbolicSum {
    pub exact: Scalar,
    pub certs: BTreeMap<Vec<usize>, Scalar>,
}

/// What a symbolic value says about the underlying number.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Determination {
    Zero,
    Exact(Scalar),
    /// Exactly one certificate term with zero exact part.
    CertainlyNonzero,
    Undetermined,
}

impl SymbolicSum {
    pub fn zero() -> Self {
        SymbolicSum { exact: Scalar::zero(), certs: BTreeMap::new() }
    }

    pub fn is_formally_zero(&self) -> bool {
        self.exact.is_zero() && self.certs.is_empty()
    }

    pub fn add_scaled(&mut self, other: &SymbolicSum, c: &Scalar) {
        self.exact += &other.exact * c;
        for (k, v) in &other.certs {
            let e = self.certs.entry(k.clone()).or_insert_with(Scalar::zero);
            *e += v * c;
            if e.is_zero() {
                self.certs.remove(k);
            }
        }
    }

    pub fn determination(&self) -> Determination {
        match (self.exact.is_zero(), self.certs.len()) {
            (true, 0) => Determination::Zero,
            (false, 0) => Determination::Exact(self.exact.clone()),
            (true, 1) => Determination::CertainlyNonzero,
            _ => Determination::Undetermined,
        }
    }

    pub fn describe(&self, alg: &GradedAlgebra) -> String {
        let mut parts = vec![format_scalar(&self.exact)];
        for (t, c) in &self.certs {
            let names: Vec<&str> = t.iter().map(|&i| alg.name(i)).collect();
            parts.push(format!("{}*Phi({})", format_scalar(c), names.join(", ")));
        }
        parts.join(" + ")
    }
}

impl GwTable {
    pub fn new(
        alg: &GradedAlgebra,
        class_label: impl Into<String>,
        genus: usize,
        arity: usize,
        degree_sum: usize,
        flux_free: bool,
        image_nonzero: bool,
        entries: Vec<(Vec<usize>, GwValue)>,
    ) -> Result<Self> {
        if arity == 0 {
            return Err(Error::Schema("table arity must be at least 1".into()));
        }
        let mut table = GwTable {
            class_label: class_label.into(),
            genus,
            arity,
            degree_sum,
            flux_free,
            image_nonzero,
            algebra: alg.id(),
            entries: BTreeMap::new(),
        };
        for (tuple, value) in entries {
            let names = || tuple.iter().map(|&i| alg.name(i).to_string()).collect::<Vec<_>>().join(", ");
            if tuple.len() != arity {
                return Err(Error::ArityMismatch { expected: arity, got: tuple.len() });
            }
            if tuple.iter().any(|&i| i >= alg.dim()) {
                return Err(Error::Schema("table entry index out of range".into()));
            }
            let d: usize = tuple.iter().map(|&i| alg.degree_of_index(i)).sum();
            if d != degree_sum {
                return Err(Error::Schema(format!(
                    "entry ({}) has total degree {d}, table degree_sum is {degree_sum}",
                    names()
                )));
            }
            if value == GwValue::Exact(Scalar::zero()) {
                return Err(Error::Schema(format!("entry ({}) stores an exact zero", names())));
            }
            let Some((canon, s)) = canonical_tuple(alg, &tuple) else {
                return Err(Error::Schema(format!(
                    "entry ({}) repeats an odd class and must vanish by graded symmetry",
                    names()
                )));
            };
            let v = match value {
                GwValue::Exact(x) => GwValue::Exact(x * s),
                GwValue::Nonzero => GwValue::Nonzero,
            };
            if let Some(old) = table.entries.get(&canon) {
                if *old != v {
                    return Err(Error::Schema(format!(
                        "entry ({}) conflicts with an earlier entry under graded symmetry",
                        names()
                    )));
                }
            }
            table.entries.insert(canon, v);
        }
        Ok(table)
    }

    pub fn algebra_id(&self) -> u64 {
        self.algebra
    }

    pub fn entries(&self) -> &BTreeMap<Vec<usize>, GwValue> {
        &self.entries
    }

    pub fn is_exact(&self) -> bool {
        self.entries.values().all(|v| matches!(v, GwValue::Exact(_)))
    }

    pub fn has_certificates(&self) -> bool {
        !self.is_exact()
    }

    /// Value on an ordered basis tuple, with graded symmetry applied.
    pub fn lookup(&self, alg: &GradedAlgebra, tuple: &[usize]) -> Option<(Scalar, &GwValue)> {
        let (canon, s) = canonical_tuple(alg, tuple)?;
        self.entries.get(&canon).map(|v| (s, v))
    }

    /// Sorted degree patterns of the stored entries.
    pub fn degree_patterns(&self, alg: &GradedAlgebra) -> BTreeSet<Vec<usize>> {
        self.entries
            .keys()
            .map(|t| {
                let mut d: Vec<usize> = t.iter().map(|&i| alg.degree_of_index(i)).collect();
                d.sort();
                d
            })
            .collect()
    }

    /// Multilinear expansion on arbitrary homogeneous arguments.
    pub fn evaluate(&self, alg: &GradedAlgebra, args: &[CohomologyClass]) -> Result<SymbolicSum> {
        if args.len() != self.arity {
            return Err(Error::ArityMismatch { expected: self.arity, got: args.len() });
        }
        if alg.id() != self.algebra {
            return Err(Error::MismatchedAlgebra);
        }
        let mut total = 0;
        for a in args {
            alg.owns(a)?;
            if a.is_zero() {
                return Ok(SymbolicSum::zero());
            }
            total += alg.degree_or(a, 0)?;
        }
        if total != self.degree_sum {
            return Ok(SymbolicSum::zero());
        }
        let supports: Vec<Vec<(usize, Scalar)>> = args.iter().map(|a| a.sparse()).collect();
        let mut out = SymbolicSum::zero();
        let mut idx = vec![0usize; args.len()];
        'outer: loop {
            let tuple: Vec<usize> = idx.iter().zip(&supports).map(|(&k, s)| s[k].0).collect();
            if let Some((s, v)) = self.lookup(alg, &tuple) {
                let mut coef = s;
                for (&k, sup) in idx.iter().zip(&supports) {
                    coef *= &sup[k].1;
                }
                match v {
                    GwValue::Exact(x) => out.exact += coef * x,
                    GwValue::Nonzero => {
                        let canon = canonical_tuple(alg, &tuple).expect("stored").0;
                        let e = out.certs.entry(canon.clone()).or_insert_with(Scalar::zero);
                        *e += coef;
                        if e.is_zero() {
                            out.certs.remove(&canon);
                        }
                    }
                }
            }
            for p in (0..idx.len()).rev() {
                idx[p] += 1;
                if idx[p] < supports[p].len() {
                    continue 'outer;
                }
                idx[p] = 0;
            }
            break;
        }
        Ok(out)
    }

    /// Whether this is the genus-0, class-0 triple-product table of `alg`.
    pub fn is_cup_table_of(&self, alg: &GradedAlgebra) -> bool {
        self.class_label == "0"
            && self.genus == 0
            && self.arity == 3
            && !self.image_nonzero
            && alg.id() == self.algebra
            && *self == cup_product_table(alg)
    }
}

/// `Phi_0(a, b, c) = pair(a b, c)` on all basis triples.
pub fn cup_product_table(alg: &GradedAlgebra) -> GwTable {
    let mut entries = Vec::new();
    let n = alg.dim();
    for i in 0..n {
        for j in i..n {
            for k in j..n {
                let (di, dj, dk) = (alg.degree_of_index(i), alg.degree_of_index(j), alg.degree_of_index(k));
                if di + dj + dk != alg.top() {
                    continue;
                }
                if canonical_tuple(alg, &[i, j, k]).is_none() {
                    continue;
                }
                let ab = alg.cup(&alg.basis_class(i), &alg.basis_class(j)).expect("same algebra");
                let v = alg.pair(&ab, &alg.basis_class(k)).expect("same algebra");
                if !v.is_zero() {
                    entries.push((vec![i, j, k], GwValue::Exact(v)));
                }
            }
        }
    }
    GwTable::new(alg, "0", 0, 3, alg.top(), false, false, entries).expect("cup table is consistent")
}

fn residual_signs(alg: &GradedAlgebra, m: usize, tuple: &[CohomologyClass], convention: LeibnizSign) -> Result<Vec<Scalar>> {
    let degs: Vec<usize> = tuple.iter().map(|a| alg.degree_or(a, 0)).collect::<Result<_>>()?;
    Ok((0..tuple.len())
        .map(|i| {
            let s: usize = match convention {
                LeibnizSign::Koszul => degs[..i].iter().sum(),
                LeibnizSign::Flipped => degs[i + 1..].iter().sum(),
            };
            sign((m - 1) * s)
        })
        .collect())
}

/// `sum_i eps_i Phi(a_1, ..., d a_i, ..., a_k)`, with `eps_i` the Koszul sign
/// of moving `d` past the preceding arguments.
pub fn maincoho_residual(
    alg: &GradedAlgebra,
    table: &GwTable,
    d: &WangMap,
    tuple: &[CohomologyClass],
    convention: LeibnizSign,
) -> Result<SymbolicSum> {
    if tuple.len() != table.arity {
        return Err(Error::ArityMismatch { expected: table.arity, got: tuple.len() });
    }
    let m = d.base_dimension();
    let total: usize = tuple.iter().map(|a| alg.degree_or(a, 0)).sum::<Result<usize>>()?;
    if total != table.degree_sum + m - 1 {
        return Err(Error::Degree(format!(
            "tuple degree {total} differs from degree_sum + m - 1 = {}; every term vanishes",
            table.degree_sum + m - 1
        )));
    }
    let signs = residual_signs(alg, m, tuple, convention)?;
    let mut out = SymbolicSum::zero();
    for i in 0..tuple.len() {
        let mut args = tuple.to_vec();
        args[i] = d.apply(alg, &tuple[i])?;
        out.add_scaled(&table.evaluate(alg, &args)?, &signs[i]);
    }
    Ok(out)
}

/// `Phi(d a_1, ..., d a_k)` together with a check of the `ker d = im d`
/// hypothesis under which it must vanish.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvaluationImageCheck {
    pub value: SymbolicSum,
    pub hypothesis_holds: bool,
    /// Degrees where `ker d = im d` fails.
    pub failing_degrees: Vec<usize>,
    pub status: Determination,
}

impl EvaluationImageCheck {
    pub fn passed(&self) -> bool {
        self.status == Determination::Zero
    }
}

/// `ker d = im d` degree by degree.
pub fn kernel_equals_image(alg: &GradedAlgebra, d: &WangMap) -> Result<Vec<usize>> {
    let m = d.base_dimension();
    let mut bad = Vec::new();
    for k in 0..=alg.top() {
        let ker = if k + 1 >= m {
            d.block(k).nullspace()
        } else {
            Subspace::full(k, alg.dim_of(k))
        };
        let src = k + m - 1;
        let im = if src <= alg.top() {
            let b = d.block(src);
            Subspace::from_spanning(k, alg.dim_of(k), b.transpose().to_rows())
        } else {
            Subspace::zero(k, alg.dim_of(k))
        };
        let ker = ker.with_degree(k);
        if !(im.is_subspace_of(&ker)? && im.dim() == ker.dim()) {
            bad.push(k);
        }
    }
    Ok(bad)
}

pub fn evn0_residual(
    alg: &GradedAlgebra,
    d: &WangMap,
    table: &GwTable,
    tuple: &[CohomologyClass],
) -> Result<EvaluationImageCheck> {
    let images: Vec<CohomologyClass> = tuple.iter().map(|a| d.apply(alg, a)).collect::<Result<_>>()?;
    let value = table.evaluate(alg, &images)?;
    let failing = kernel_equals_image(alg, d)?;
    Ok(EvaluationImageCheck {
        status: value.determination(),
        value,
        hypothesis_holds: failing.is_empty(),
        failing_degrees: failing,
    })
}

/// A full c-splitting task.
#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub omega: CohomologyClass,
    /// Empty means `2..=2n+1`.
    pub base_dimensions: Vec<usize>,
    pub tables: Vec<GwTable>,
    pub survivors: Vec<CohomologyClass>,
    pub hamiltonian: bool,
    /// Opt in to rows from the class-0 triple-product table.
    pub include_cup_table: bool,
    /// Wang maps known to arise from actual fibrations.
    pub realized: Vec<WangMap>,
}

impl ProblemSpec {
    pub fn new(omega: CohomologyClass) -> Self {
        ProblemSpec {
            omega,
            base_dimensions: Vec::new(),
            tables: Vec::new(),
            survivors: Vec::new(),
            hamiltonian: false,
            include_cup_table: false,
            realized: Vec::new(),
        }
    }

    pub fn effective_base_dimensions(&self, alg: &GradedAlgebra) -> Vec<usize> {
        if self.base_dimensions.is_empty() {
            (2..=alg.top() + 1).collect()
        } else {
            let mut v = self.base_dimensions.clone();
            v.sort();
            v.dedup();
            v
        }
    }

    pub fn validate(&self, alg: &GradedAlgebra) -> Result<()> {
        alg.require_degree(&self.omega, 2)?;
        for s in &self.survivors {
            alg.owns(s)?;
        }
        for t in &self.tables {
            if t.algebra != alg.id() {
                return Err(Error::MismatchedAlgebra);
            }
        }
        if let Some(&m) = self.base_dimensions.iter().find(|&&m| m < 2) {
            return Err(Error::Degree(format!("base dimension {m} is below 2")));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PipelineConfig {
    pub convention: LeibnizSign,
    pub max_arity: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig { convention: LeibnizSign::Koszul, max_arity: 6 }
    }
}

/// Where a constraint row came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RowSource {
    Survivor { index: usize },
    Hamiltonian { power: usize },
    CupTable { alpha: usize, beta: (usize, usize) },
    Exact { table: usize, tuple: Vec<usize> },
    Certificate { table: usize, tuple: Vec<usize>, entry: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintRow {
    pub source: RowSource,
    /// Coefficients over the basis of the unconstrained Wang space.
    pub coeffs: Vec<Scalar>,
}

#[derive(Clone, Debug)]
pub struct ConstraintSystem {
    pub m: usize,
    pub wang: WangSpace,
    pub rows: Vec<ConstraintRow>,
    /// Allowed coefficient vectors over the Wang basis.
    pub allowed: Subspace,
    pub constrained: WangSpace,
    pub diagnostics: Vec<String>,
    /// Argument pool used for table tuples, as classes.
    pub pool: Vec<CohomologyClass>,
    /// Tuples (pool indices, per table) that produced a row.
    pub row_tuples: Vec<(usize, Vec<usize>)>,
}

/// Classes known to lie in `ker d` before any table is used: basis elements
/// whose image degree is negative, the survivors and, if Hamiltonian, the
/// powers of omega.
fn known_kernel(alg: &GradedAlgebra, spec: &ProblemSpec, m: usize) -> Result<Vec<CohomologyClass>> {
    let mut out: Vec<CohomologyClass> = (0..alg.dim())
        .filter(|&i| alg.degree_of_index(i) + 1 < m)
        .map(|i| alg.basis_class(i))
        .collect();
    let mut extra = spec.survivors.clone();
    if spec.hamiltonian {
        for j in 1..=alg.half() {
            extra.push(alg.power(&spec.omega, j)?);
        }
    }
    for c in extra {
        for d in alg.degrees(&c) {
            let comp = alg.class_in_degree(d, &alg.component(&c, d))?;
            if !comp.is_zero() && !out.contains(&comp) {
                out.push(comp);
            }
        }
    }
    Ok(out)
}

/// Functionals over the Wang basis: `d -> coordinate of d(c)` for every
/// target basis element.
fn image_rows(alg: &GradedAlgebra, basis: &[WangMap], c: &CohomologyClass) -> Result<Vec<Vec<Scalar>>> {
    let images: Vec<CohomologyClass> = basis.iter().map(|d| d.apply(alg, c)).collect::<Result<_>>()?;
    Ok((0..alg.dim()).map(|t| images.iter().map(|im| im.coeff(t).clone()).collect()).collect())
}

fn restrict(f: &[Scalar], allowed: &Subspace) -> Vec<Scalar> {
    allowed.basis().iter().map(|a| f.iter().zip(a).map(|(x, y)| x * y).sum()).collect()
}

fn vanishes_on(f: &[Scalar], allowed: &Subspace) -> bool {
    restrict(f, allowed).iter().all(Zero::is_zero)
}

/// Residual of one tuple as linear forms over the Wang basis.
struct TupleForms {
    exact: Vec<Scalar>,
    certs: BTreeMap<Vec<usize>, Vec<Scalar>>,
}

fn tuple_forms(
    alg: &GradedAlgebra,
    table: &GwTable,
    basis: &[WangMap],
    tuple: &[CohomologyClass],
    convention: LeibnizSign,
) -> Result<TupleForms> {
    let r = basis.len();
    let mut forms = TupleForms { exact: vec![Scalar::zero(); r], certs: BTreeMap::new() };
    for (s, d) in basis.iter().enumerate() {
        let v = maincoho_residual(alg, table, d, tuple, convention)?;
        forms.exact[s] = v.exact;
        for (c, x) in v.certs {
            forms.certs.entry(c).or_insert_with(|| vec![Scalar::zero(); r])[s] = x;
        }
    }
    Ok(forms)
}

/// Enumerates nondecreasing pool-index tuples whose residual can touch a
/// stored entry.
fn admissible_tuples(
    alg: &GradedAlgebra,
    table: &GwTable,
    pool_degrees: &[usize],
    m: usize,
) -> Vec<Vec<usize>> {
    let mut targets: BTreeSet<Vec<usize>> = BTreeSet::new();
    for pat in table.degree_patterns(alg) {
        for i in 0..pat.len() {
            let mut p = pat.clone();
            p[i] += m - 1;
            if p[i] > alg.top() {
                continue;
            }
            p.sort();
            targets.insert(p);
        }
    }
    let mut by_degree: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &d) in pool_degrees.iter().enumerate() {
        by_degree.entry(d).or_default().push(i);
    }
    let mut out = BTreeSet::new();
    for pat in targets {
        let mut cur = Vec::new();
        fill(&pat, 0, &by_degree, &mut cur, &mut out);
    }
    out.into_iter().collect()
}

fn fill(
    pat: &[usize],
    pos: usize,
    by_degree: &BTreeMap<usize, Vec<usize>>,
    cur: &mut Vec<usize>,
    out: &mut BTreeSet<Vec<usize>>,
) {
    if pos == pat.len() {
        out.insert(cur.clone());
        return;
    }
    let Some(cands) = by_degree.get(&pat[pos]) else { return };
    for &c in cands {
        // same degree as the previous slot: keep the multiset nondecreasing
        if pos > 0 && pat[pos - 1] == pat[pos] && c < cur[pos - 1] {
            continue;
        }
        cur.push(c);
        fill(pat, pos + 1, by_degree, cur, out);
        cur.pop();
    }
}

pub fn assemble_constraints(
    alg: &GradedAlgebra,
    spec: &ProblemSpec,
    wang: &WangSpace,
    config: &PipelineConfig,
) -> Result<ConstraintSystem> {
    let m = wang.base_dimension();
    let r = wang.dim();
    let basis = wang.basis();
    let mut rows: Vec<ConstraintRow> = Vec::new();
    let mut diagnostics = Vec::new();
    let mut red = RowReducer::new(r);
    let push = |row: ConstraintRow, red: &mut RowReducer, rows: &mut Vec<ConstraintRow>| {
        if row.coeffs.iter().any(|x| !x.is_zero()) && red.insert_dense(&row.coeffs) {
            rows.push(row);
        }
    };

    if r > 0 {
        for (i, s) in spec.survivors.iter().enumerate() {
            for f in image_rows(alg, basis, s)? {
                push(ConstraintRow { source: RowSource::Survivor { index: i }, coeffs: f }, &mut red, &mut rows);
            }
        }
        if spec.hamiltonian {
            for j in 1..=alg.half() {
                let w = alg.power(&spec.omega, j)?;
                for f in image_rows(alg, basis, &w)? {
                    push(ConstraintRow { source: RowSource::Hamiltonian { power: j }, coeffs: f }, &mut red, &mut rows);
                }
            }
        }
    }

    let kernel = known_kernel(alg, spec, m)?;
    let mut pool: Vec<CohomologyClass> = (0..alg.dim()).map(|i| alg.basis_class(i)).collect();
    for c in &kernel {
        if !pool.contains(c) {
            pool.push(c.clone());
        }
    }
    let pool_degrees: Vec<usize> = pool.iter().map(|c| alg.degree_or(c, 0)).collect::<Result<_>>()?;

    let mut cup_tables = Vec::new();
    let mut gw_tables = Vec::new();
    for (ti, t) in spec.tables.iter().enumerate() {
        if t.arity > config.max_arity {
            diagnostics.push(format!(
                "table {ti} ({}) has arity {} above the cap {}; skipped",
                t.class_label, t.arity, config.max_arity
            ));
        } else if t.image_nonzero {
            gw_tables.push(ti);
        } else if t.is_cup_table_of(alg) {
            if spec.include_cup_table {
                cup_tables.push(ti);
            } else {
                diagnostics.push(format!("table {ti} is the class-0 triple-product table; not opted in, skipped"));
            }
        } else {
            diagnostics.push(format!(
                "table {ti} ({}) does not have i_*A != 0 and is not the class-0 triple-product table; skipped",
                t.class_label
            ));
        }
    }

    if r > 0 {
        for &ti in &cup_tables {
            let t = &spec.tables[ti];
            for a in 0..alg.dim() {
                let da = alg.degree_of_index(a);
                if da + 1 < m {
                    continue;
                }
                let images: Vec<CohomologyClass> =
                    basis.iter().map(|d| d.apply(alg, &alg.basis_class(a))).collect::<Result<_>>()?;
                for (p, b1) in kernel.iter().enumerate() {
                    for (q, b2) in kernel.iter().enumerate().skip(p) {
                        let db = alg.degree_or(b1, 0)? + alg.degree_or(b2, 0)?;
                        if da + 1 - m + db != alg.top() {
                            continue;
                        }
                        let mut f = Vec::with_capacity(r);
                        for im in &images {
                            f.push(t.evaluate(alg, &[im.clone(), b1.clone(), b2.clone()])?.exact);
                        }
                        push(
                            ConstraintRow { source: RowSource::CupTable { alpha: a, beta: (p, q) }, coeffs: f },
                            &mut red,
                            &mut rows,
                        );
                    }
                }
            }
        }
    }

    // forms of every admissible tuple, computed once
    let mut all_forms: Vec<(usize, Vec<usize>, TupleForms)> = Vec::new();
    if r > 0 {
        for &ti in &gw_tables {
            let t = &spec.tables[ti];
            for tup in admissible_tuples(alg, t, &pool_degrees, m) {
                let args: Vec<CohomologyClass> = tup.iter().map(|&i| pool[i].clone()).collect();
                let forms = tuple_forms(alg, t, basis, &args, config.convention)?;
                if forms.exact.iter().all(Zero::is_zero) && forms.certs.is_empty() {
                    continue;
                }
                all_forms.push((ti, tup, forms));
            }
        }
    }

    let mut row_tuples = Vec::new();
    let mut used = vec![false; all_forms.len()];
    let allowed_of = |red: &RowReducer| Subspace::from_spanning(0, r, red.nullspace());
    loop {
        let allowed = allowed_of(&red);
        if allowed.is_zero() {
            break;
        }
        let before = red.rank();
        for (k, (ti, tup, forms)) in all_forms.iter().enumerate() {
            if used[k] {
                continue;
            }
            let live: Vec<(&Vec<usize>, &Vec<Scalar>)> =
                forms.certs.iter().filter(|(_, f)| !vanishes_on(f, &allowed)).collect();
            let exact_live = !vanishes_on(&forms.exact, &allowed);
            let row = match (live.len(), exact_live) {
                (0, true) => Some(ConstraintRow {
                    source: RowSource::Exact { table: *ti, tuple: tup.clone() },
                    coeffs: forms.exact.clone(),
                }),
                (1, false) => Some(ConstraintRow {
                    source: RowSource::Certificate { table: *ti, tuple: tup.clone(), entry: live[0].0.clone() },
                    coeffs: live[0].1.clone(),
                }),
                _ => None,
            };
            if let Some(row) = row {
                used[k] = true;
                row_tuples.push((*ti, tup.clone()));
                push(row, &mut red, &mut rows);
            } else if live.is_empty() && !exact_live {
                // the residual vanishes on the whole allowed space
                used[k] = true;
            }
        }
        if red.rank() == before {
            break;
        }
    }

    let allowed = allowed_of(&red);
    let constrained = wang.restrict(alg, &allowed)?;
    Ok(ConstraintSystem { m, wang: wang.clone(), rows, allowed, constrained, diagnostics, pool, row_tuples })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    CSplit,
    /// Some constrained space is nonzero and no realized map lies in it.
    Inconclusive,
    /// A realized nonzero Wang map survives all constraints.
    Obstructed { m: usize, witness: WangMap },
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::CSplit => "CSplit",
            Verdict::Inconclusive => "Inconclusive",
            Verdict::Obstructed { .. } => "Obstructed",
        }
    }
}

#[derive(Clone, Debug)]
pub struct CsplitReport {
    pub systems: Vec<ConstraintSystem>,
    pub verdict: Verdict,
    /// Base dimensions in `2..=2n+1` that were not examined.
    pub unexamined: Vec<usize>,
}

pub fn csplit_check(alg: &GradedAlgebra, spec: &ProblemSpec, config: &PipelineConfig) -> Result<CsplitReport> {
    spec.validate(alg)?;
    let ms = spec.effective_base_dimensions(alg);
    let mut systems = Vec::new();
    for &m in &ms {
        let w = solve_wang_space(alg, m, config.convention)?;
        systems.push(assemble_constraints(alg, spec, &w, config)?);
    }
    let mut verdict = Verdict::CSplit;
    for sys in &systems {
        if sys.constrained.is_zero() {
            continue;
        }
        if let Some(w) = spec
            .realized
            .iter()
            .find(|d| d.base_dimension() == sys.m && !d.is_zero() && sys.constrained.contains(d))
        {
            verdict = Verdict::Obstructed { m: sys.m, witness: w.clone() };
            break;
        }
        verdict = Verdict::Inconclusive;
    }
    let unexamined = (2..=alg.top() + 1).filter(|m| !ms.contains(m)).collect();
    Ok(CsplitReport { systems, verdict, unexamined })
}

#[derive(Clone, Debug)]
pub struct BlanchardReport {
    pub hard_lefschetz: bool,
    /// Present only when the hard Lefschetz test passes.
    pub report: Option<CsplitReport>,
}

pub fn blanchard_check(alg: &GradedAlgebra, omega: &CohomologyClass, config: &PipelineConfig) -> Result<BlanchardReport> {
    if !alg.is_hard_lefschetz(omega)? {
        return Ok(BlanchardReport { hard_lefschetz: false, report: None });
    }
    let mut spec = ProblemSpec::new(omega.clone());
    spec.tables.push(cup_product_table(alg));
    spec.hamiltonian = true;
    spec.include_cup_table = true;
    Ok(BlanchardReport { hard_lefschetz: true, report: Some(csplit_check(alg, &spec, config)?) })
}

/// Matrix of the linear forms of a system (rows over the Wang basis).
pub fn constraint_matrix(sys: &ConstraintSystem) -> Matrix {
    Matrix::from_rows(sys.rows.iter().map(|r| r.coeffs.clone()).collect(), sys.wang.dim()).expect("uniform rows")
}

impl GwTable {
    /// Unit-coefficient view of a single certificate entry, used in reports.
    pub fn entry_names(&self, alg: &GradedAlgebra, tuple: &[usize]) -> Vec<String> {
        tuple.iter().map(|&i| alg.name(i).to_string()).collect()
    }
}
