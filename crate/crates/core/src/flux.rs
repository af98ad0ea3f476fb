//! Rank bounds for the flux group from cup-product kernels on `H^1`.

use num_traits::Zero;

use crate::algebra::{CohomologyClass, GradedAlgebra};
use crate::error::{Error, Result};
use crate::linalg::Subspace;
use crate::scalar::Scalar;

/// Poincare-dual representative of a flux-free class, with the side
/// conditions the caller asserts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FluxFreeClass {
    pub pd_class: CohomologyClass,
    pub multiplicity: Option<Scalar>,
    pub dim_moduli_2: bool,
    pub image_nonzero: bool,
}

impl FluxFreeClass {
    pub fn new(pd_class: CohomologyClass) -> Self {
        FluxFreeClass { pd_class, multiplicity: None, dim_moduli_2: true, image_nonzero: true }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FluxProblem {
    pub omega: CohomologyClass,
    pub flux_free_classes: Vec<FluxFreeClass>,
    /// Dimension of the rational symplectic Gottlieb group (trusted).
    pub dim_g_q: usize,
    /// Rank of the symplectic Gottlieb group (trusted).
    pub rank_g: usize,
}

/// `ker(- u omega^{n-1}) ∩ ker(- u a_pd)` inside `H^1`.
pub fn flux_subspace(alg: &GradedAlgebra, omega: &CohomologyClass, a_pd: &CohomologyClass) -> Result<Subspace> {
    let k1 = omega_kernel(alg, omega)?;
    let n = alg.half();
    if n >= 1 && !a_pd.is_zero() {
        alg.require_degree(a_pd, 2 * n - 2)?;
    }
    let k2 = alg.kernel_of_cup(a_pd, 1)?;
    k1.intersect(&k2)
}

fn omega_kernel(alg: &GradedAlgebra, omega: &CohomologyClass) -> Result<Subspace> {
    alg.require_degree(omega, 2)?;
    let n = alg.half();
    if n == 0 {
        return Err(Error::Degree("flux bounds need formal dimension at least 2".into()));
    }
    alg.kernel_of_cup(&alg.power(omega, n - 1)?, 1)
}

/// True iff `- u omega^{n-1}` is injective on `H^1`.
pub fn lefschetz_flux_shortcut(alg: &GradedAlgebra, omega: &CohomologyClass) -> Result<bool> {
    Ok(omega_kernel(alg, omega)?.is_zero())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FluxStatus {
    Feasible,
    /// The trusted inputs contradict the bound.
    InfeasibleInputs(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankBound {
    pub lower: usize,
    pub upper: usize,
    /// The smallest subspace found; non-discreteness of the flux group can
    /// only occur in it.
    pub subspace: Subspace,
    /// `dim flux_subspace` per flux-free class; `None` when its multiplicity
    /// is zero and the class carries no information.
    pub per_class: Vec<Option<usize>>,
    pub omega_kernel_dim: usize,
    pub lefschetz_shortcut: bool,
    pub status: FluxStatus,
    pub diagnostics: Vec<String>,
    pub assumptions: Vec<String>,
}

pub fn rank_bound(alg: &GradedAlgebra, p: &FluxProblem) -> Result<RankBound> {
    let base = omega_kernel(alg, &p.omega)?;
    let mut diagnostics = Vec::new();
    let mut assumptions = vec![
        format!("dim G_Q = {} (trusted input)", p.dim_g_q),
        format!("rank G = {} (trusted input)", p.rank_g),
    ];
    let mut best = base.clone();
    let mut per_class = Vec::new();
    for (i, c) in p.flux_free_classes.iter().enumerate() {
        assumptions.push(format!(
            "flux-free class {i}: flux_free = true, dim_moduli_2 = {}, image_nonzero = {} (trusted)",
            c.dim_moduli_2, c.image_nonzero
        ));
        if !(c.dim_moduli_2 && c.image_nonzero) {
            diagnostics.push(format!("flux-free class {i} lacks an asserted side condition; ignored"));
            per_class.push(None);
            continue;
        }
        if c.multiplicity.as_ref().is_some_and(Zero::is_zero) {
            diagnostics.push(format!(
                "flux-free class {i} has multiplicity 0; its kernel is all of H^1 and it gives no constraint"
            ));
            per_class.push(None);
            continue;
        }
        let s = flux_subspace(alg, &p.omega, &c.pd_class)?;
        per_class.push(Some(s.dim()));
        if s.dim() < best.dim() {
            best = s;
        }
    }
    if p.flux_free_classes.is_empty() {
        diagnostics.push("no flux-free classes; the bound uses ker(- u omega^{n-1}) alone".into());
    }
    let shortcut = base.is_zero();
    if shortcut {
        diagnostics.push("ker(- u omega^{n-1}) = 0 on H^1: the flux group is discrete".into());
    }
    let upper = p.dim_g_q + best.dim();
    let b1 = alg.dim_of(1);
    let status = if p.dim_g_q > b1 {
        FluxStatus::InfeasibleInputs(format!("dim G_Q = {} exceeds dim H^1 = {b1}", p.dim_g_q))
    } else if p.rank_g > upper {
        FluxStatus::InfeasibleInputs(format!("rank G = {} exceeds the upper bound {upper}", p.rank_g))
    } else {
        FluxStatus::Feasible
    };
    Ok(RankBound {
        lower: p.rank_g,
        upper,
        subspace: best,
        per_class,
        omega_kernel_dim: base.dim(),
        lefschetz_shortcut: shortcut,
        status,
        diagnostics,
        assumptions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::scalar::int;

    fn problem(omega: CohomologyClass, classes: Vec<FluxFreeClass>, dim_g_q: usize, rank_g: usize) -> FluxProblem {
        FluxProblem { omega, flux_free_classes: classes, dim_g_q, rank_g }
    }

    #[test]
    fn projective_space_is_rigid() {
        let cp3 = corpus::cpn(3);
        let x = cp3.named("x").unwrap();
        let b = rank_bound(&cp3, &problem(x.clone(), vec![], 0, 0)).unwrap();
        assert_eq!((b.lower, b.upper), (0, 0));
        assert!(b.lefschetz_shortcut && lefschetz_flux_shortcut(&cp3, &x).unwrap());
        assert_eq!(b.status, FluxStatus::Feasible);
    }

    #[test]
    fn torus_upper_bound_two() {
        let t2 = corpus::torus(2);
        let w = t2.named("e1*e2").unwrap();
        assert!(flux_subspace(&t2, &w, &t2.unit()).unwrap().is_zero());
        let b = rank_bound(&t2, &problem(w, vec![FluxFreeClass::new(t2.unit())], 2, 2)).unwrap();
        assert_eq!(b.upper, 2);
        assert_eq!(b.status, FluxStatus::Feasible);
    }

    #[test]
    fn infeasible_inputs() {
        let t2 = corpus::torus(2);
        let w = t2.named("e1*e2").unwrap();
        let b = rank_bound(&t2, &problem(w.clone(), vec![], 1, 3)).unwrap();
        assert!(matches!(b.status, FluxStatus::InfeasibleInputs(_)));
        let b = rank_bound(&t2, &problem(w, vec![], 3, 0)).unwrap();
        assert!(matches!(b.status, FluxStatus::InfeasibleInputs(_)));
    }

    #[test]
    fn kodaira_thurston_kernel() {
        // e1 -> e123, e4 -> e234, e2 -> 0 under - u omega
        let kt = corpus::kodaira_thurston();
        let w = corpus::kodaira_thurston_omega(&kt);
        assert!(!lefschetz_flux_shortcut(&kt, &w).unwrap());
        let b = rank_bound(&kt, &problem(w.clone(), vec![], 0, 0)).unwrap();
        assert_eq!(b.omega_kernel_dim, 1);
        assert!(b.subspace.contains(&kt.named("e2").unwrap().coeffs()[1..4]));
        assert!(flux_subspace(&kt, &w, &kt.named("e13").unwrap()).unwrap().is_zero());
        assert_eq!(flux_subspace(&kt, &w, &kt.named("e14").unwrap()).unwrap().dim(), 1);
    }

    #[test]
    fn scaling_and_zero_multiplicity() {
        let kt = corpus::kodaira_thurston();
        let w = corpus::kodaira_thurston_omega(&kt);
        let a = kt.parse_class("e14 + 2:e24").unwrap();
        for c in [int(3), int(-1), crate::scalar::ratio(2, 7)] {
            assert_eq!(flux_subspace(&kt, &w, &a).unwrap(), flux_subspace(&kt, &w, &a.scale(&c)).unwrap());
        }
        let mut f = FluxFreeClass::new(a);
        f.multiplicity = Some(int(0));
        let b = rank_bound(&kt, &problem(w, vec![f], 0, 0)).unwrap();
        assert_eq!(b.per_class, vec![None]);
        assert_eq!(b.upper, 1);
    }

    #[test]
    fn monotone_in_classes() {
        let kt = corpus::kodaira_thurston();
        let w = corpus::kodaira_thurston_omega(&kt);
        let mut p = problem(w, vec![], 1, 0);
        let mut last = rank_bound(&kt, &p).unwrap().upper;
        for name in ["e14", "e13", "e24"] {
            p.flux_free_classes.push(FluxFreeClass::new(kt.named(name).unwrap()));
            let u = rank_bound(&kt, &p).unwrap().upper;
            assert!(u <= last);
            last = u;
        }
    }
}
