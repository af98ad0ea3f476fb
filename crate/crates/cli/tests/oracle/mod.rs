//! Brute-force reference computations on dense structure constants, built
//! straight from algebra documents.

#![allow(dead_code)]

use gwsplit::doc::AlgebraDoc;
use gwsplit::scalar::{int, zero};
use gwsplit::Scalar;

pub struct Dense {
    pub top: usize,
    pub deg: Vec<usize>,
    pub orient: usize,
    /// `mult[i][j][k]`: coefficient of basis `k` in `e_i e_j`.
    pub mult: Vec<Vec<Vec<Scalar>>>,
}

fn sgn(e: usize) -> Scalar {
    if e % 2 == 0 {
        int(1)
    } else {
        int(-1)
    }
}

impl Dense {
    pub fn from_doc(doc: &AlgebraDoc) -> Dense {
        let n = doc.basis.len();
        let pos = |s: &str| doc.basis.iter().position(|b| b.name == s).expect("known basis name");
        let deg: Vec<usize> = doc.basis.iter().map(|b| b.degree).collect();
        let unit = (0..n).find(|&i| deg[i] == 0).expect("a degree-0 element");
        let mut mult = vec![vec![vec![zero(); n]; n]; n];
        let mut listed = vec![vec![false; n]; n];
        for p in &doc.products {
            let (l, r) = (pos(&p.left), pos(&p.right));
            listed[l][r] = true;
            for t in &p.result {
                mult[l][r][pos(&t.basis)] += t.coeff.clone();
            }
        }
        for i in 0..n {
            if !listed[unit][i] {
                mult[unit][i][i] = int(1);
            }
            if !listed[i][unit] {
                mult[i][unit][i] = int(1);
            }
        }
        Dense { top: doc.formal_dimension, deg, orient: pos(&doc.orientation), mult }
    }

    pub fn n(&self) -> usize {
        self.deg.len()
    }

    fn sparse(&self) -> Vec<Vec<Vec<(usize, Scalar)>>> {
        let n = self.n();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).filter(|&k| self.mult[i][j][k] != zero()).map(|k| (k, self.mult[i][j][k].clone())).collect())
                    .collect()
            })
            .collect()
    }

    /// `None` when every axiom holds, else the first failure.
    pub fn check(&self) -> Option<String> {
        let n = self.n();
        if (0..n).filter(|&i| self.deg[i] == 0).count() != 1 {
            return Some("degree 0".into());
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if self.mult[i][j][k] != zero() && self.deg[k] != self.deg[i] + self.deg[j] {
                        return Some(format!("degree of {i}*{j}"));
                    }
                    let s = sgn(self.deg[i] * self.deg[j]);
                    if self.mult[i][j][k] != &self.mult[j][i][k] * &s {
                        return Some(format!("commutativity {i} {j}"));
                    }
                }
            }
        }
        let sp = self.sparse();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    // (e_i e_j) e_k and e_i (e_j e_k), coefficient by coefficient
                    let mut l = vec![zero(); n];
                    let mut r = vec![zero(); n];
                    for (a, c) in &sp[i][j] {
                        for (t, x) in &sp[*a][k] {
                            l[*t] += c * x;
                        }
                    }
                    for (a, c) in &sp[j][k] {
                        for (t, x) in &sp[i][*a] {
                            r[*t] += c * x;
                        }
                    }
                    if l != r {
                        return Some(format!("associativity {i} {j} {k}"));
                    }
                }
            }
        }
        if self.deg[self.orient] != self.top {
            return Some("orientation".into());
        }
        for p in 0..=self.top {
            let rows: Vec<usize> = (0..n).filter(|&i| self.deg[i] == p).collect();
            let cols: Vec<usize> = (0..n).filter(|&i| self.deg[i] == self.top - p).collect();
            if rows.len() != cols.len() {
                return Some(format!("poincare {p}"));
            }
            let m: Vec<Vec<Scalar>> =
                rows.iter().map(|&i| cols.iter().map(|&j| self.mult[i][j][self.orient].clone()).collect()).collect();
            if rank(m) != rows.len() {
                return Some(format!("poincare {p}"));
            }
        }
        None
    }

    /// Dimension of the solution space of the Leibniz equations for a map
    /// of degree `1 - m`.
    pub fn wang_dim(&self, m: usize, koszul: bool) -> usize {
        let n = self.n();
        // unknown (j, i): coefficient of e_j in d(e_i)
        let mut var = vec![vec![None; n]; n];
        let mut count = 0;
        for i in 0..n {
            for j in 0..n {
                if self.deg[i] + 1 >= m && self.deg[j] + m - 1 == self.deg[i] {
                    var[j][i] = Some(count);
                    count += 1;
                }
            }
        }
        let mut el = Eliminator::new(count);
        for a in 0..n {
            for b in 0..n {
                let d = self.deg[a] + self.deg[b];
                // products above the top degree are zero but still constrain d
                if d + 1 < m || d + 1 - m > self.top {
                    continue;
                }
                let (sl, sr) = if koszul {
                    (int(1), sgn((m - 1) * self.deg[a]))
                } else {
                    (sgn((m - 1) * self.deg[b]), int(1))
                };
                for t in (0..n).filter(|&t| self.deg[t] + m - 1 == d) {
                    let mut row = vec![zero(); count];
                    for k in 0..n {
                        if let Some(v) = var[t][k] {
                            row[v] += &self.mult[a][b][k];
                        }
                    }
                    for j in 0..n {
                        if let Some(v) = var[j][a] {
                            row[v] -= &sl * &self.mult[j][b][t];
                        }
                        if let Some(v) = var[j][b] {
                            row[v] -= &sr * &self.mult[a][j][t];
                        }
                    }
                    el.push(row);
                }
            }
        }
        count - el.rank()
    }
}

pub struct Eliminator {
    rows: Vec<(usize, Vec<Scalar>)>,
    width: usize,
}

impl Eliminator {
    pub fn new(width: usize) -> Self {
        Eliminator { rows: Vec::new(), width }
    }

    pub fn push(&mut self, mut row: Vec<Scalar>) {
        assert_eq!(row.len(), self.width);
        for (p, r) in &self.rows {
            if row[*p] != zero() {
                let f = row[*p].clone();
                for c in 0..self.width {
                    if r[c] != zero() {
                        row[c] -= &f * &r[c];
                    }
                }
            }
        }
        if let Some(p) = row.iter().position(|x| *x != zero()) {
            let inv = int(1) / &row[p];
            for x in row.iter_mut() {
                *x *= &inv;
            }
            self.rows.push((p, row));
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }
}

pub fn rank(rows: Vec<Vec<Scalar>>) -> usize {
    let width = rows.first().map_or(0, Vec::len);
    let mut el = Eliminator::new(width);
    for r in rows {
        el.push(r);
    }
    el.rank()
}
