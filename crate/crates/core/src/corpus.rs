//! Builders for the standard example rings.

use crate::algebra::{BasisElement, CohomologyClass, GradedAlgebra};
use crate::linalg::SparseVec;
use crate::scalar::{int, sign};

/// Cohomology of a point.
pub fn point() -> GradedAlgebra {
    truncated_polynomial("x", 0, 2)
}

/// `Q[var]/(var^{n+1})` with `deg var = degree`, basis `1, var, var^2, ...`.
pub fn truncated_polynomial(var: &str, n: usize, degree: usize) -> GradedAlgebra {
    assert!(degree % 2 == 0, "polynomial generators must have even degree");
    let name = |k: usize| match k {
        0 => "1".to_string(),
        1 => var.to_string(),
        _ => format!("{var}^{k}"),
    };
    let basis = (0..=n).map(|k| BasisElement::new(name(k), k * degree)).collect();
    let mut products = Vec::new();
    for i in 1..=n {
        for j in 1..=n - i {
            products.push((i, j, vec![(i + j, int(1))]));
        }
    }
    GradedAlgebra::new(n * degree, basis, products, n).expect("truncated polynomial ring")
}

/// `H*(CP^n) = Q[x]/x^{n+1}`.
pub fn cpn(n: usize) -> GradedAlgebra {
    truncated_polynomial("x", n, 2)
}

/// Exterior algebra on `n` degree-1 generators `{prefix}1..{prefix}n`.
pub fn exterior(prefix: &str, n: usize) -> GradedAlgebra {
    let subsets: Vec<u32> = {
        let mut s: Vec<u32> = (0..1u32 << n).collect();
        s.sort_by_key(|m| (m.count_ones(), (0..32).filter(|i| m >> i & 1 == 1).collect::<Vec<u32>>()));
        s
    };
    let pos = |m: u32| subsets.iter().position(|&x| x == m).unwrap();
    let name = |m: u32| {
        if m == 0 {
            return "1".to_string();
        }
        (0..n).filter(|i| m >> i & 1 == 1).map(|i| format!("{prefix}{}", i + 1)).collect::<Vec<_>>().join("*")
    };
    let basis = subsets.iter().map(|&m| BasisElement::new(name(m), m.count_ones() as usize)).collect();
    let mut products = Vec::new();
    for &a in &subsets {
        for &b in &subsets {
            if a == 0 || b == 0 || a & b != 0 {
                continue;
            }
            // sign of merging: pairs (i in a, j in b) with j < i
            let mut swaps = 0;
            for i in 0..n {
                if a >> i & 1 == 1 {
                    swaps += (b & ((1u32 << i) - 1)).count_ones() as usize;
                }
            }
            products.push((pos(a), pos(b), vec![(pos(a | b), sign(swaps))]));
        }
    }
    GradedAlgebra::new(n, basis, products, pos((1u32 << n) - 1)).expect("exterior algebra")
}

/// `H*(T^n)` with generators `e1..en`.
pub fn torus(n: usize) -> GradedAlgebra {
    exterior("e", n)
}

/// Builds an algebra from named products, adding each product's graded
/// transpose. Unit products are implied.
pub fn from_named(
    top: usize,
    basis: &[(&str, usize)],
    products: &[(&str, &str, &[(i64, &str)])],
    orientation: &str,
) -> crate::Result<GradedAlgebra> {
    let idx = |s: &str| {
        basis
            .iter()
            .position(|b| b.0 == s)
            .ok_or_else(|| crate::Error::UnknownBasis(s.to_string()))
    };
    let mut table: Vec<(usize, usize, SparseVec)> = Vec::new();
    for (l, r, res) in products {
        let (i, j) = (idx(l)?, idx(r)?);
        let v: SparseVec = res.iter().map(|(c, n)| Ok((idx(n)?, int(*c)))).collect::<crate::Result<_>>()?;
        let s = sign(basis[i].1 * basis[j].1);
        if i != j {
            table.push((j, i, v.iter().map(|(k, x)| (*k, x * &s)).collect()));
        }
        table.push((i, j, v));
    }
    GradedAlgebra::new(
        top,
        basis.iter().map(|(n, d)| BasisElement::new(*n, *d)).collect(),
        table,
        idx(orientation)?,
    )
}

/// `H*(S^2 x S^2)` with `a^2 = b^2 = 0`.
pub fn s2xs2() -> GradedAlgebra {
    from_named(
        4,
        &[("1", 0), ("a", 2), ("b", 2), ("a*b", 4)],
        &[("a", "b", &[(1, "a*b")])],
        "a*b",
    )
    .expect("S2 x S2")
}

/// `H*(CP^1 x CP^2)`, generators `y` (from `CP^1`) and `x`.
pub fn cp1xcp2() -> GradedAlgebra {
    truncated_polynomial("y", 1, 2).tensor(&cpn(2)).expect("CP1 x CP2")
}

/// `H*(T^2 x S^2)`, generators `e1, e2` and `s`.
pub fn t2xs2() -> GradedAlgebra {
    torus(2).tensor(&truncated_polynomial("s", 1, 2)).expect("T2 x S2")
}

/// Cohomology of the Kodaira-Thurston nilmanifold, with `de3 = e1 e2`.
pub fn kodaira_thurston() -> GradedAlgebra {
    from_named(
        4,
        &[
            ("1", 0),
            ("e1", 1),
            ("e2", 1),
            ("e4", 1),
            ("e13", 2),
            ("e14", 2),
            ("e23", 2),
            ("e24", 2),
            ("e123", 3),
            ("e134", 3),
            ("e234", 3),
            ("e1234", 4),
        ],
        &[
            ("e1", "e4", &[(1, "e14")]),
            ("e2", "e4", &[(1, "e24")]),
            ("e1", "e23", &[(1, "e123")]),
            ("e2", "e13", &[(-1, "e123")]),
            ("e4", "e13", &[(1, "e134")]),
            ("e4", "e23", &[(1, "e234")]),
            ("e1", "e234", &[(1, "e1234")]),
            ("e2", "e134", &[(-1, "e1234")]),
            ("e4", "e123", &[(-1, "e1234")]),
            ("e13", "e24", &[(-1, "e1234")]),
            ("e14", "e23", &[(1, "e1234")]),
        ],
        "e1234",
    )
    .expect("Kodaira-Thurston")
}

pub fn kodaira_thurston_omega(kt: &GradedAlgebra) -> CohomologyClass {
    kt.parse_class("e14 + e23").expect("KT symplectic class")
}

/// `H*(T^4)` re-based so that `w = e1*e2 + e3*e4` is a basis element and the
/// orientation `vol` equals `w^2`.
pub fn t4_symplectic_basis() -> GradedAlgebra {
    let t4 = torus(4);
    let mut new_basis: Vec<(String, CohomologyClass)> = Vec::new();
    for i in 0..t4.dim() {
        let name = t4.name(i).to_string();
        match (t4.degree_of_index(i), name.as_str()) {
            (2, "e1*e2") => new_basis.push(("w".into(), t4.parse_class("e1*e2 + e3*e4").unwrap())),
            (4, _) => {
                let w = t4.parse_class("e1*e2 + e3*e4").unwrap();
                new_basis.push(("vol".into(), t4.cup(&w, &w).unwrap()));
            }
            _ => new_basis.push((name, t4.basis_class(i))),
        }
    }
    t4.rebase(&new_basis).expect("T4 symplectic basis").0
}

/// The standard symplectic class of each named corpus algebra.
pub fn standard_omega(alg: &GradedAlgebra, name: &str) -> Option<CohomologyClass> {
    let terms: &str = match name {
        n if n.starts_with("cp") && n[2..].chars().all(|c| c.is_ascii_digit()) => "x",
        "torus2" => "e1*e2",
        "torus4" => "e1*e2 + e3*e4",
        "t4_symplectic" => "w",
        "s2xs2" => "a + b",
        "cp1xcp2" => "y + x",
        "t2xs2" => "e1*e2 + s",
        "kodaira_thurston" => "e14 + e23",
        _ => return None,
    };
    alg.parse_class(terms).ok()
}

/// Every bundled algebra under its corpus name.
pub fn all() -> Vec<(String, GradedAlgebra)> {
    let mut out: Vec<(String, GradedAlgebra)> = vec![("point".into(), point())];
    for n in 1..=5 {
        out.push((format!("cp{n}"), cpn(n)));
    }
    out.push(("torus2".into(), torus(2)));
    out.push(("torus4".into(), torus(4)));
    out.push(("t4_symplectic".into(), t4_symplectic_basis()));
    out.push(("s2xs2".into(), s2xs2()));
    out.push(("cp1xcp2".into(), cp1xcp2()));
    out.push(("t2xs2".into(), t2xs2()));
    out.push(("kodaira_thurston".into(), kodaira_thurston()));
    out
}
