//! JSON documents. Every scalar is a `"p/q"` string and every class is a
//! `+`-separated list of `[coeff:]name` terms, as in
//! [`GradedAlgebra::parse_class`].

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraMap, BasisElement, CohomologyClass, GradedAlgebra};
use crate::blowup::{blowup_ring, BlowupInput};
use crate::error::{Error, Result};
use crate::flux::{FluxFreeClass, FluxProblem};
use crate::gw::{GwTable, GwValue, ProblemSpec};
use crate::linalg::Matrix;
use crate::presentation::Presentation;
use crate::scalar::{format_scalar, parse_scalar, serde_str, Scalar};
use crate::wang::{LeibnizSign, WangMap, WangSpace};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisDoc {
    pub name: String,
    pub degree: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDoc {
    pub basis: String,
    #[serde(with = "serde_str")]
    pub coeff: Scalar,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductDoc {
    pub left: String,
    pub right: String,
    pub result: Vec<TermDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraDoc {
    pub formal_dimension: usize,
    pub basis: Vec<BasisDoc>,
    #[serde(default)]
    pub products: Vec<ProductDoc>,
    pub orientation: String,
}

/// A structure-constant table, a presentation, or a blow-up to construct.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlgebraSource {
    Table(AlgebraDoc),
    Presentation { presentation: Presentation },
    Blowup { blowup: Box<Ref<BlowupDoc>> },
}

/// An algebra built from a source, with the files read on the way.
#[derive(Clone, Debug)]
pub struct ResolvedAlgebra {
    pub algebra: GradedAlgebra,
    pub files: Vec<PathBuf>,
    /// Set when the ring is a constructed blow-up, whose products use the
    /// standard multiplicative completion of the additive decomposition.
    pub multiplicative_completion: bool,
}

impl AlgebraDoc {
    pub fn from_algebra(alg: &GradedAlgebra) -> Self {
        AlgebraDoc {
            formal_dimension: alg.top(),
            basis: alg.basis().iter().map(|b| BasisDoc { name: b.name.clone(), degree: b.degree }).collect(),
            products: alg
                .listed_products()
                .into_iter()
                .map(|(l, r, v)| ProductDoc {
                    left: alg.name(l).to_string(),
                    right: alg.name(r).to_string(),
                    result: v.iter().map(|(k, c)| TermDoc { basis: alg.name(*k).to_string(), coeff: c.clone() }).collect(),
                })
                .collect(),
            orientation: alg.name(alg.orientation_index()).to_string(),
        }
    }

    /// Structural build without validation.
    pub fn to_parts(&self) -> Result<GradedAlgebra> {
        let idx: BTreeMap<&str, usize> = self.basis.iter().enumerate().map(|(i, b)| (b.name.as_str(), i)).collect();
        let look = |s: &str| idx.get(s).copied().ok_or_else(|| Error::UnknownBasis(s.to_string()));
        let mut products = Vec::new();
        for p in &self.products {
            let res = p.result.iter().map(|t| Ok((look(&t.basis)?, t.coeff.clone()))).collect::<Result<Vec<_>>>()?;
            products.push((look(&p.left)?, look(&p.right)?, res));
        }
        GradedAlgebra::from_parts(
            self.formal_dimension,
            self.basis.iter().map(|b| BasisElement::new(b.name.clone(), b.degree)).collect(),
            products,
            look(&self.orientation)?,
        )
    }

    pub fn to_algebra(&self) -> Result<GradedAlgebra> {
        let alg = self.to_parts()?;
        alg.validate()?;
        Ok(alg)
    }
}

impl AlgebraSource {
    pub fn to_algebra(&self) -> Result<GradedAlgebra> {
        Ok(self.resolve_in(Path::new("."))?.algebra)
    }

    /// Build the algebra; paths are taken relative to `base`.
    pub fn resolve_in(&self, base: &Path) -> Result<ResolvedAlgebra> {
        let plain = |algebra| ResolvedAlgebra { algebra, files: Vec::new(), multiplicative_completion: false };
        match self {
            AlgebraSource::Table(d) => Ok(plain(d.to_algebra()?)),
            AlgebraSource::Presentation { presentation } => Ok(plain(presentation.expand()?)),
            AlgebraSource::Blowup { blowup } => {
                let (doc, f) = blowup.resolve(base)?;
                let inner = Ref::<BlowupDoc>::inner_base(&f, base);
                let (inp, mut files) = doc.load(&inner)?;
                files.splice(0..0, f);
                Ok(ResolvedAlgebra { algebra: blowup_ring(&inp)?.ring, files, multiplicative_completion: true })
            }
        }
    }
}

impl<T: for<'de> Deserialize<'de> + Clone> Ref<T> {
    /// Directory against which references inside the resolved document are
    /// taken.
    pub fn inner_base(resolved: &Option<PathBuf>, base: &Path) -> PathBuf {
        resolved.as_deref().and_then(Path::parent).unwrap_or(base).to_path_buf()
    }
}

impl Ref<AlgebraSource> {
    pub fn load_algebra(&self, base: &Path) -> Result<ResolvedAlgebra> {
        let (src, f) = self.resolve(base)?;
        let mut r = src.resolve_in(&Self::inner_base(&f, base))?;
        r.files.splice(0..0, f);
        Ok(r)
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(Error::Io)
}

pub fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(Error::Json)
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents serialize");
    s.push('\n');
    s
}

pub fn parse_algebra(text: &str) -> Result<GradedAlgebra> {
    from_json::<AlgebraSource>(text)?.to_algebra()
}

pub fn load_algebra(path: &Path) -> Result<GradedAlgebra> {
    parse_algebra(&read_text(path)?)
}

pub fn dump_algebra(alg: &GradedAlgebra) -> String {
    to_json(&AlgebraDoc::from_algebra(alg))
}

fn dump_matrix(m: &Matrix) -> Vec<Vec<String>> {
    m.to_rows().iter().map(|r| r.iter().map(format_scalar).collect()).collect()
}

fn load_matrix(rows: &[Vec<String>], nrows: usize, ncols: usize) -> Result<Matrix> {
    if rows.len() != nrows || rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::DimensionMismatch(format!("expected a {nrows} x {ncols} block")));
    }
    let parsed = rows
        .iter()
        .map(|r| r.iter().map(|s| parse_scalar(s)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Matrix::from_rows(parsed, ncols)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WangDoc {
    pub base_dimension: usize,
    /// Source degree to row-major matrix `H^k -> H^{k-m+1}`; absent blocks
    /// are zero.
    #[serde(default)]
    pub blocks: BTreeMap<usize, Vec<Vec<String>>>,
}

impl WangDoc {
    pub fn from_map(d: &WangMap) -> Self {
        let blocks = d
            .blocks()
            .iter()
            .enumerate()
            .filter(|(_, b)| b.rows() > 0 && b.cols() > 0)
            .map(|(k, b)| (k, dump_matrix(b)))
            .collect();
        WangDoc { base_dimension: d.base_dimension(), blocks }
    }

    pub fn to_map(&self, alg: &GradedAlgebra) -> Result<WangMap> {
        let m = self.base_dimension;
        let mut blocks = BTreeMap::new();
        for (&k, rows) in &self.blocks {
            if k > alg.top() || k + 1 < m {
                return Err(Error::DimensionMismatch(format!("no block from degree {k} for m = {m}")));
            }
            blocks.insert(k, load_matrix(rows, alg.dim_of(k + 1 - m), alg.dim_of(k))?);
        }
        let mut d = WangMap::zero(alg, m);
        for (k, b) in blocks {
            d = d.add(&WangMap::from_blocks(alg, m, BTreeMap::from([(k, b)]))?)?;
        }
        Ok(d)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WangSpaceDoc {
    pub base_dimension: usize,
    pub convention: LeibnizSign,
    pub dimension: usize,
    pub basis: Vec<WangDoc>,
}

impl WangSpaceDoc {
    pub fn from_space(w: &WangSpace) -> Self {
        WangSpaceDoc {
            base_dimension: w.base_dimension(),
            convention: w.convention(),
            dimension: w.dim(),
            basis: w.basis().iter().map(WangDoc::from_map).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryDoc {
    pub args: Vec<String>,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GwTableDoc {
    pub class_label: String,
    pub genus: usize,
    pub arity: usize,
    pub degree_sum: usize,
    #[serde(default)]
    pub flux_free: bool,
    #[serde(default)]
    pub image_nonzero: bool,
    #[serde(default)]
    pub entries: Vec<EntryDoc>,
}

impl GwTableDoc {
    pub fn from_table(alg: &GradedAlgebra, t: &GwTable) -> Self {
        GwTableDoc {
            class_label: t.class_label.clone(),
            genus: t.genus,
            arity: t.arity,
            degree_sum: t.degree_sum,
            flux_free: t.flux_free,
            image_nonzero: t.image_nonzero,
            entries: t
                .entries()
                .iter()
                .map(|(tup, v)| EntryDoc {
                    args: tup.iter().map(|&i| alg.name(i).to_string()).collect(),
                    value: match v {
                        GwValue::Exact(x) => format_scalar(x),
                        GwValue::Nonzero => "nonzero".into(),
                    },
                })
                .collect(),
        }
    }

    pub fn to_table(&self, alg: &GradedAlgebra) -> Result<GwTable> {
        let mut entries = Vec::new();
        for e in &self.entries {
            let tup = e.args.iter().map(|n| alg.index_of(n)).collect::<Result<Vec<_>>>()?;
            let v = if e.value == "nonzero" { GwValue::Nonzero } else { GwValue::Exact(parse_scalar(&e.value)?) };
            entries.push((tup, v));
        }
        GwTable::new(
            alg,
            self.class_label.clone(),
            self.genus,
            self.arity,
            self.degree_sum,
            self.flux_free,
            self.image_nonzero,
            entries,
        )
    }
}

/// A document embedded inline or referenced by a path relative to the
/// referring file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Ref<T> {
    Path(String),
    Inline(T),
}

impl<T: for<'de> Deserialize<'de> + Clone> Ref<T> {
    pub fn resolve(&self, base: &Path) -> Result<(T, Option<PathBuf>)> {
        match self {
            Ref::Inline(t) => Ok((t.clone(), None)),
            Ref::Path(p) => {
                let full = base.join(p);
                Ok((from_json(&read_text(&full)?)?, Some(full)))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDoc {
    pub algebra: Ref<AlgebraSource>,
    pub omega: String,
    #[serde(default)]
    pub base_dimensions: Vec<usize>,
    #[serde(default)]
    pub tables: Vec<Ref<GwTableDoc>>,
    #[serde(default)]
    pub survivors: Vec<String>,
    #[serde(default)]
    pub hamiltonian: bool,
    #[serde(default)]
    pub include_cup_table: bool,
    #[serde(default)]
    pub realized: Vec<Ref<WangDoc>>,
}

/// A loaded document together with the files it pulled in.
#[derive(Clone, Debug)]
pub struct Loaded<T> {
    pub value: T,
    pub algebra: GradedAlgebra,
    pub files: Vec<PathBuf>,
    pub multiplicative_completion: bool,
}

impl ProblemDoc {
    pub fn load(&self, base: &Path) -> Result<Loaded<ProblemSpec>> {
        let ra = self.algebra.load_algebra(base)?;
        let (alg, mut files) = (ra.algebra, ra.files);
        let mut spec = ProblemSpec::new(alg.parse_class(&self.omega)?);
        spec.base_dimensions = self.base_dimensions.clone();
        spec.hamiltonian = self.hamiltonian;
        spec.include_cup_table = self.include_cup_table;
        for t in &self.tables {
            let (doc, f) = t.resolve(base)?;
            files.extend(f);
            spec.tables.push(doc.to_table(&alg)?);
        }
        for s in &self.survivors {
            spec.survivors.push(alg.parse_class(s)?);
        }
        for r in &self.realized {
            let (doc, f) = r.resolve(base)?;
            files.extend(f);
            spec.realized.push(doc.to_map(&alg)?);
        }
        spec.validate(&alg)?;
        Ok(Loaded { value: spec, algebra: alg, files, multiplicative_completion: ra.multiplicative_completion })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluxClassDoc {
    pub pd_class: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiplicity: Option<String>,
    #[serde(default = "yes")]
    pub dim_moduli_2: bool,
    #[serde(default = "yes")]
    pub image_nonzero: bool,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluxDoc {
    pub algebra: Ref<AlgebraSource>,
    pub omega: String,
    #[serde(default)]
    pub flux_free_classes: Vec<FluxClassDoc>,
    #[serde(rename = "dim_G_Q")]
    pub dim_g_q: usize,
    #[serde(rename = "rank_G")]
    pub rank_g: usize,
}

impl FluxDoc {
    pub fn load(&self, base: &Path) -> Result<Loaded<FluxProblem>> {
        let ra = self.algebra.load_algebra(base)?;
        let alg = ra.algebra;
        let mut classes = Vec::new();
        for c in &self.flux_free_classes {
            classes.push(FluxFreeClass {
                pd_class: alg.parse_class(&c.pd_class)?,
                multiplicity: c.multiplicity.as_deref().map(parse_scalar).transpose()?,
                dim_moduli_2: c.dim_moduli_2,
                image_nonzero: c.image_nonzero,
            });
        }
        let p = FluxProblem {
            omega: alg.parse_class(&self.omega)?,
            flux_free_classes: classes,
            dim_g_q: self.dim_g_q,
            rank_g: self.rank_g,
        };
        Ok(Loaded { value: p, algebra: alg, files: ra.files, multiplicative_completion: ra.multiplicative_completion })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageDoc {
    pub generator: String,
    pub image: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlowupDoc {
    pub ambient: Ref<AlgebraSource>,
    #[serde(rename = "V_algebra")]
    pub v_algebra: Ref<AlgebraSource>,
    pub codim: usize,
    pub chern: Vec<String>,
    pub restriction: Vec<ImageDoc>,
    #[serde(default = "minus_one")]
    pub tautological_sign: i64,
}

fn minus_one() -> i64 {
    -1
}

impl BlowupDoc {
    pub fn load(&self, base: &Path) -> Result<(BlowupInput, Vec<PathBuf>)> {
        let a = self.ambient.load_algebra(base)?;
        let v = self.v_algebra.load_algebra(base)?;
        let mut files = a.files;
        files.extend(v.files);
        let (ambient, v_algebra) = (a.algebra, v.algebra);
        let images: Vec<(CohomologyClass, CohomologyClass)> = self
            .restriction
            .iter()
            .map(|r| Ok((ambient.parse_class(&r.generator)?, v_algebra.parse_class(&r.image)?)))
            .collect::<Result<_>>()?;
        let restriction = AlgebraMap::from_generator_images(&ambient, &v_algebra, &images)?;
        let chern = self.chern.iter().map(|c| v_algebra.parse_class(c)).collect::<Result<_>>()?;
        Ok((
            BlowupInput {
                ambient,
                v_algebra,
                codim: self.codim,
                chern,
                restriction,
                tautological_sign: self.tautological_sign,
            },
            files,
        ))
    }
}

pub fn dump_table(alg: &GradedAlgebra, t: &GwTable) -> String {
    to_json(&GwTableDoc::from_table(alg, t))
}

pub fn dump_wang(d: &WangMap) -> String {
    to_json(&WangDoc::from_map(d))
}

pub fn matrix_doc(m: &Matrix) -> Vec<Vec<String>> {
    dump_matrix(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::gw::cup_product_table;
    use crate::wang::solve_wang_space;

    #[test]
    fn algebra_round_trip() {
        for (_, alg) in corpus::all() {
            let text = dump_algebra(&alg);
            let back = parse_algebra(&text).unwrap();
            assert_eq!(back.id(), alg.id());
            assert_eq!(dump_algebra(&back), text);
        }
    }

    #[test]
    fn presentation_source() {
        let text = r#"{"presentation": {"formal_dimension": 4, "generators": [{"name": "x", "degree": 2}], "orientation": ["x", "x"]}}"#;
        assert_eq!(parse_algebra(text).unwrap().id(), corpus::cpn(2).id());
    }

    #[test]
    fn schema_errors() {
        assert!(matches!(parse_algebra("{"), Err(Error::Json(_))));
        assert!(matches!(parse_algebra(r#"{"formal_dimension": 2}"#), Err(Error::Json(_))));
        let bad = r#"{"formal_dimension": 2, "basis": [{"name": "1", "degree": 0}, {"name": "x", "degree": 2}], "products": [], "orientation": "y"}"#;
        assert!(matches!(parse_algebra(bad), Err(Error::UnknownBasis(_))));
    }

    #[test]
    fn wang_round_trip() {
        let t2 = corpus::torus(2);
        let w = solve_wang_space(&t2, 2, LeibnizSign::Koszul).unwrap();
        for d in w.basis() {
            let doc: WangDoc = from_json(&dump_wang(d)).unwrap();
            assert_eq!(&doc.to_map(&t2).unwrap(), d);
        }
        let bad = WangDoc { base_dimension: 2, blocks: BTreeMap::from([(1, vec![vec!["1".into()]])]) };
        assert!(bad.to_map(&t2).is_err());
    }

    #[test]
    fn table_round_trip() {
        let t2 = corpus::torus(2);
        let t = cup_product_table(&t2);
        let text = dump_table(&t2, &t);
        let back = from_json::<GwTableDoc>(&text).unwrap().to_table(&t2).unwrap();
        assert_eq!(back, t);
        assert_eq!(dump_table(&t2, &back), text);
    }

    #[test]
    fn inline_problem() {
        let text = format!(
            r#"{{"algebra": {}, "omega": "e1*e2", "hamiltonian": true}}"#,
            dump_algebra(&corpus::torus(2))
        );
        let doc: ProblemDoc = from_json(&text).unwrap();
        let l = doc.load(Path::new(".")).unwrap();
        assert!(l.value.hamiltonian && l.files.is_empty());
    }
}
