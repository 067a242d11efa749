use cascade_core::benchmarks::general_stochastic;
use cascade_core::{
    conditional_expectation, duality_gap, expectation, solve_adjoint, solve_backward_transpose, AdaptedField,
    ControlField,
};
use proptest::prelude::*;

const NX: usize = 5;
const DEPTH: usize = 4;

fn field(dim: usize, first: usize, last: usize, data: &[f64]) -> AdaptedField<f64> {
    let mut it = data.iter().copied().cycle();
    AdaptedField::from_fn(dim, first, last, |_, _, out| out.iter_mut().for_each(|v| *v = it.next().unwrap())).unwrap()
}

fn values(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn tower_property(data in values(37)) {
        let s = general_stochastic::<f64>(NX, DEPTH, 1.0).unwrap();
        let f = field(3, 0, DEPTH, &data);
        for m in 0..DEPTH {
            let cond = conditional_expectation(&f, m, &s.tree).unwrap();
            let lhs = expectation(&cond, m).unwrap();
            let rhs = expectation(&f, m + 1).unwrap();
            for (a, b) in lhs.iter().zip(&rhs) {
                prop_assert!((a - b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn adjoint_is_linear(a in values(2 * NX), b in values(2 * NX), c in -3.0f64..3.0) {
        let s = general_stochastic::<f64>(NX, DEPTH, 1.0).unwrap();
        let solve = |z: &[f64]| solve_adjoint(z, &s.coeffs, &s.tree, &s.grid, None).unwrap();
        let combo: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + c * y).collect();
        let (za, zb, zc) = (solve(&a), solve(&b), solve(&combo));
        for k in 0..s.tree.nodes_at(DEPTH) {
            for ((x, y), z) in za.node(DEPTH, k).iter().zip(zb.node(DEPTH, k)).zip(zc.node(DEPTH, k)) {
                prop_assert!((x + c * y - z).abs() < 1e-12 * (1.0 + z.abs()));
            }
        }
    }

    #[test]
    fn transpose_duality_on_random_data(z0 in values(2 * NX), yt in values(17), u in values(11)) {
        let s = general_stochastic::<f64>(NX, DEPTH, 1.0).unwrap();
        let y_t = field(2 * NX, DEPTH, DEPTH, &yt);
        let ctrl = ControlField::new(field(NX, 0, DEPTH - 1, &u), &s.subdomains.control, DEPTH).unwrap();
        let back = solve_backward_transpose(&y_t, &ctrl, &s.coeffs, &s.tree, &s.grid).unwrap();
        let adj = solve_adjoint(&z0, &s.coeffs, &s.tree, &s.grid, None).unwrap();
        prop_assert!(duality_gap(&back, &adj, &ctrl, &s.tree, &s.grid).unwrap() < 1e-13);
    }
}
