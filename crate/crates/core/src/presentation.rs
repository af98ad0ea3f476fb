//! Generators-and-relations front end.
//!
//! Monomials in the generators are enumerated up to the formal dimension,
//! the ideal generated by the relations is row-reduced degree by degree, and
//! the non-pivot monomials become the basis of the quotient.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::{BasisElement, CohomologyClass, GradedAlgebra};
use crate::error::{Error, Result};
use crate::linalg::{RowReducer, SparseVec};
use crate::scalar::{serde_str, Scalar};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Generator {
    pub name: String,
    pub degree: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    #[serde(with = "serde_str")]
    pub coeff: Scalar,
    /// Ordered product of generator names; empty is the unit.
    pub monomial: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Presentation {
    pub formal_dimension: usize,
    pub generators: Vec<Generator>,
    /// Each relation is a sum of terms that is set to zero.
    #[serde(default)]
    pub relations: Vec<Vec<Term>>,
    /// Monomial whose class is the orientation generator.
    pub orientation: Vec<String>,
}

type Exps = Vec<usize>;

struct Monomials<'a> {
    gens: &'a [Generator],
}

impl Monomials<'_> {
    fn degree(&self, e: &Exps) -> usize {
        e.iter().zip(self.gens).map(|(k, g)| k * g.degree).sum()
    }

    /// Product of two monomials with its Koszul sign, or `None` if an odd
    /// generator repeats.
    fn mul(&self, a: &Exps, b: &Exps) -> Option<(Exps, bool)> {
        let mut out = a.clone();
        let mut swaps = 0usize;
        for (i, g) in self.gens.iter().enumerate() {
            if g.degree % 2 == 1 && a[i] > 0 {
                // odd generators of b standing before position i must pass over it
                swaps += (0..i).filter(|&j| self.gens[j].degree % 2 == 1 && b[j] > 0).count();
            }
        }
        for i in 0..a.len() {
            out[i] += b[i];
            if self.gens[i].degree % 2 == 1 && out[i] > 1 {
                return None;
            }
        }
        Some((out, swaps % 2 == 1))
    }

    fn name(&self, e: &Exps) -> String {
        let parts: Vec<String> = e
            .iter()
            .zip(self.gens)
            .filter(|(k, _)| **k > 0)
            .map(|(k, g)| if *k == 1 { g.name.clone() } else { format!("{}^{k}", g.name) })
            .collect();
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }

    /// All monomials of total degree at most `top`, grouped by degree, each
    /// group in descending lexicographic exponent order.
    fn enumerate(&self, top: usize) -> Vec<Vec<Exps>> {
        let mut by_degree = vec![Vec::new(); top + 1];
        let mut cur = vec![0; self.gens.len()];
        self.rec(0, top, &mut cur, &mut by_degree);
        for v in by_degree.iter_mut() {
            v.sort_by(|a, b| b.cmp(a));
        }
        by_degree
    }

    fn rec(&self, i: usize, top: usize, cur: &mut Exps, out: &mut Vec<Vec<Exps>>) {
        if i == self.gens.len() {
            out[self.degree(cur)].push(cur.clone());
            return;
        }
        let d = self.gens[i].degree;
        let cap = if d % 2 == 1 { 1 } else { usize::MAX };
        let mut k = 0;
        loop {
            cur[i] = k;
            if self.degree(cur) > top {
                break;
            }
            self.rec(i + 1, top, cur, out);
            k += 1;
            if k > cap || d == 0 {
                break;
            }
        }
        cur[i] = 0;
    }
}

impl Presentation {
    pub fn expand(&self) -> Result<GradedAlgebra> {
        let top = self.formal_dimension;
        if let Some(g) = self.generators.iter().find(|g| g.degree == 0) {
            return Err(Error::Schema(format!("generator {} has degree 0", g.name)));
        }
        let mons = Monomials { gens: &self.generators };
        let gen_index: BTreeMap<&str, usize> =
            self.generators.iter().enumerate().map(|(i, g)| (g.name.as_str(), i)).collect();
        let word = |w: &[String]| -> Result<Option<(Exps, bool)>> {
            let mut acc: (Exps, bool) = (vec![0; self.generators.len()], false);
            for name in w {
                let i = *gen_index.get(name.as_str()).ok_or_else(|| Error::UnknownBasis(name.clone()))?;
                let mut e = vec![0; self.generators.len()];
                e[i] = 1;
                match mons.mul(&acc.0, &e) {
                    Some((m, s)) => acc = (m, acc.1 ^ s),
                    None => return Ok(None),
                }
            }
            Ok(Some(acc))
        };

        let by_degree = mons.enumerate(top);
        let col_of: Vec<BTreeMap<Exps, usize>> = by_degree
            .iter()
            .map(|ms| ms.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect())
            .collect();

        // relations as sparse polynomials, homogeneous
        let mut rels: Vec<(usize, Vec<(Exps, Scalar)>)> = Vec::new();
        for rel in &self.relations {
            let mut terms = Vec::new();
            let mut deg = None;
            for t in rel {
                if let Some((e, s)) = word(&t.monomial)? {
                    let d = mons.degree(&e);
                    if deg.is_some_and(|x| x != d) {
                        return Err(Error::Degree("relation is not homogeneous".into()));
                    }
                    deg = Some(d);
                    terms.push((e, if s { -t.coeff.clone() } else { t.coeff.clone() }));
                }
            }
            if let Some(d) = deg {
                if d <= top {
                    rels.push((d, terms));
                }
            }
        }

        let mut reducers: Vec<RowReducer> = by_degree.iter().map(|ms| RowReducer::new(ms.len())).collect();
        for (rd, terms) in &rels {
            for d in *rd..=top {
                for m in &by_degree[d - rd] {
                    let mut row: BTreeMap<usize, Scalar> = BTreeMap::new();
                    for (e, c) in terms {
                        if let Some((p, s)) = mons.mul(m, e) {
                            let x = if s { -c.clone() } else { c.clone() };
                            *row.entry(col_of[d][&p]).or_insert_with(Scalar::zero) += x;
                        }
                    }
                    reducers[d].insert(row.into_iter().filter(|(_, x)| !x.is_zero()).collect());
                }
            }
        }

        let mut basis = Vec::new();
        let mut basis_of: Vec<BTreeMap<usize, usize>> = Vec::new();
        for d in 0..=top {
            let pivots = reducers[d].pivot_columns();
            let mut map = BTreeMap::new();
            for (c, m) in by_degree[d].iter().enumerate().rev() {
                if !pivots.contains(&c) {
                    map.insert(c, basis.len());
                    basis.push(BasisElement::new(mons.name(m), d));
                }
            }
            basis_of.push(map);
        }
        let normal = |d: usize, col: usize, neg: bool| -> SparseVec {
            let mut v = reducers[d].reduce(vec![(col, if neg { -Scalar::one() } else { Scalar::one() })]);
            v.iter_mut().for_each(|e| e.0 = basis_of[d][&e.0]);
            v.sort_by_key(|e| e.0);
            v
        };

        let mut basis_mons: Vec<(usize, Exps)> = Vec::new();
        for d in 0..=top {
            for (c, m) in by_degree[d].iter().enumerate().rev() {
                if basis_of[d].contains_key(&c) {
                    basis_mons.push((d, m.clone()));
                }
            }
        }
        let mut products = Vec::new();
        for (i, (da, a)) in basis_mons.iter().enumerate() {
            for (j, (db, b)) in basis_mons.iter().enumerate() {
                if da + db > top {
                    continue;
                }
                if let Some((p, s)) = mons.mul(a, b) {
                    let v = normal(da + db, col_of[da + db][&p], s);
                    if !v.is_empty() {
                        products.push((i, j, v));
                    }
                }
            }
        }

        let o = word(&self.orientation)?.ok_or_else(|| Error::Schema("orientation monomial vanishes".into()))?;
        if mons.degree(&o.0) != top {
            return Err(Error::Schema("orientation monomial is not of top degree".into()));
        }
        let ov = normal(top, col_of[top][&o.0], o.1);
        let tops: Vec<usize> = (0..basis.len()).filter(|&i| basis[i].degree == top).collect();
        if tops.len() != 1 || ov.len() != 1 {
            return Err(Error::Schema("top degree must be one-dimensional and contain the orientation".into()));
        }
        let alg = GradedAlgebra::from_parts(top, basis, products, tops[0])?;
        let scale = &ov[0].1;
        if scale.is_one() {
            alg.validate()?;
            return Ok(alg);
        }
        // rescale the top element so the orientation monomial is the generator
        let new_basis: Vec<(String, CohomologyClass)> = (0..alg.dim())
            .map(|i| {
                let c = alg.basis_class(i);
                if i == alg.orientation_index() {
                    (mons.name(&o.0), c.scale(scale))
                } else {
                    (alg.name(i).to_string(), c)
                }
            })
            .collect();
        Ok(alg.rebase(&new_basis)?.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::scalar::int;

    fn t(c: i64, m: &[&str]) -> Term {
        Term { coeff: int(c), monomial: m.iter().map(|s| s.to_string()).collect() }
    }

    fn gen(name: &str, degree: usize) -> Generator {
        Generator { name: name.into(), degree }
    }

    #[test]
    fn cp3_from_truncation() {
        let p = Presentation {
            formal_dimension: 6,
            generators: vec![gen("x", 2)],
            relations: vec![],
            orientation: vec!["x".into(); 3],
        };
        let a = p.expand().unwrap();
        assert_eq!(a.betti(), corpus::cpn(3).betti());
        assert_eq!(a.basis(), corpus::cpn(3).basis());
    }

    #[test]
    fn s2xs2_from_relations() {
        let p = Presentation {
            formal_dimension: 4,
            generators: vec![gen("a", 2), gen("b", 2)],
            relations: vec![vec![t(1, &["a", "a"])], vec![t(1, &["b", "b"])]],
            orientation: vec!["a".into(), "b".into()],
        };
        let a = p.expand().unwrap();
        assert_eq!(a.betti(), vec![1, 0, 2, 0, 1]);
        assert_eq!(a.name(a.orientation_index()), "a*b");
    }

    #[test]
    fn exterior_signs_and_rescaled_orientation() {
        let p = Presentation {
            formal_dimension: 2,
            generators: vec![gen("e1", 1), gen("e2", 1)],
            relations: vec![],
            orientation: vec!["e2".into(), "e1".into()],
        };
        let a = p.expand().unwrap();
        let (e1, e2) = (a.named("e1").unwrap(), a.named("e2").unwrap());
        assert_eq!(a.pair(&e2, &e1).unwrap(), int(1));
    }

    #[test]
    fn cp2_blown_up_at_a_point() {
        // Q[h, e]/(h e, h^2 + e^2), orientation h^2
        let p = Presentation {
            formal_dimension: 4,
            generators: vec![gen("h", 2), gen("e", 2)],
            relations: vec![vec![t(1, &["h", "e"])], vec![t(1, &["h", "h"]), t(1, &["e", "e"])]],
            orientation: vec!["h".into(), "h".into()],
        };
        let a = p.expand().unwrap();
        assert_eq!(a.betti(), vec![1, 0, 2, 0, 1]);
        let e = a.named("e").unwrap();
        assert_eq!(a.pair(&e, &e).unwrap(), int(-1));
    }
}
