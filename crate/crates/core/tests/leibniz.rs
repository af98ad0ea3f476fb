use gwsplit::corpus;
use gwsplit::scalar::int;
use gwsplit::wang::{leibniz_residual, solve_wang_space, LeibnizSign};
use gwsplit::GradedAlgebra;
use proptest::prelude::*;

fn algebras() -> Vec<GradedAlgebra> {
    vec![corpus::torus(2), corpus::torus(4), corpus::t2xs2(), corpus::kodaira_thurston(), corpus::s2xs2()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solved_combinations_satisfy_leibniz(
        which in 0usize..5,
        m in 2usize..6,
        flipped in any::<bool>(),
        coeffs in proptest::collection::vec(-3i64..4, 16),
    ) {
        let alg = &algebras()[which];
        let convention = if flipped { LeibnizSign::Flipped } else { LeibnizSign::Koszul };
        let space = solve_wang_space(alg, m, convention).unwrap();
        let c: Vec<_> = (0..space.dim()).map(|i| int(coeffs[i % coeffs.len()])).collect();
        let d = space.combination(alg, &c).unwrap();
        prop_assert!(space.contains(&d));
        for i in 0..alg.dim() {
            for j in 0..alg.dim() {
                let r = leibniz_residual(alg, &d, &alg.basis_class(i), &alg.basis_class(j), convention).unwrap();
                prop_assert!(r.is_zero(), "residual on ({}, {})", alg.name(i), alg.name(j));
            }
        }
    }
}

#[test]
fn torus_degree_lowering_maps() {
    // contractions along the two generators
    let t2 = corpus::torus(2);
    assert_eq!(solve_wang_space(&t2, 2, LeibnizSign::Koszul).unwrap().dim(), 2);
    for m in 2..=5 {
        assert!(solve_wang_space(&corpus::cpn(2), m, LeibnizSign::Koszul).unwrap().is_zero());
    }
}
