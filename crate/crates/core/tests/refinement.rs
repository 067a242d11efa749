use cascade_core::benchmarks::{coupled, zero_potential};
use cascade_core::{
    solve_adjoint, solve_backward_direct, solve_backward_transpose, AdaptedField, ControlField, Grid1D, LevelValues,
    ScenarioTree,
};
use std::f64::consts::PI;

// Independent Thomas solve of (I - dt * Laplacian_h) x = rhs, zero Dirichlet data.
fn implicit_heat_step(rhs: &[f64], dt: f64, h: f64) -> Vec<f64> {
    let n = rhs.len();
    let (off, diag) = (-dt / (h * h), 1.0 + 2.0 * dt / (h * h));
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = off / diag;
    d[0] = rhs[0] / diag;
    for j in 1..n {
        let denom = diag - off * c[j - 1];
        c[j] = off / denom;
        d[j] = (rhs[j] - off * d[j - 1]) / denom;
    }
    let mut x = d.clone();
    for j in (0..n - 1).rev() {
        x[j] = d[j] - c[j] * x[j + 1];
    }
    x
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn per_node_copy(values: &[f64], level: usize) -> AdaptedField<f64> {
    let nodes = 1usize << level;
    let data = values.iter().copied().cycle().take(values.len() * nodes).collect();
    AdaptedField::from_levels(values.len(), level, vec![LevelValues::PerNode(data)]).unwrap()
}

#[test]
fn heat_oracle_holds_nodewise_on_the_full_tree() {
    let (depth, nx) = (6, 15);
    let s = zero_potential::<f64>(nx, depth, 1.0).unwrap();
    let (dt, h) = (s.tree.dt(), s.grid.h());
    let y_t = s.grid.sample(|x| (PI * x).sin() + 0.3 * (3.0 * PI * x).sin() + x * (1.0 - x));

    let mut oracle = vec![y_t.clone()];
    for _ in 0..depth {
        let next = implicit_heat_step(oracle.last().unwrap(), dt, h);
        oracle.push(next);
    }
    oracle.reverse();

    let terminal = per_node_copy(&y_t, depth);
    let u = ControlField::zeros(nx, depth);
    for back in [
        solve_backward_direct(&terminal, &u, &s.coeffs, &s.tree, &s.grid).unwrap(),
        solve_backward_transpose(&terminal, &u, &s.coeffs, &s.tree, &s.grid).unwrap(),
    ] {
        for (m, expected) in oracle.iter().enumerate() {
            for k in 0..s.tree.nodes_at(m) {
                assert!(max_diff(back.y().node(m, k), expected) < 1e-12, "m={m} k={k}");
            }
        }
        assert!(back.martingale().max_abs() < 1e-12);
    }

    let z = solve_adjoint(&y_t, &s.coeffs, &s.tree, &s.grid, None).unwrap();
    let mut state = y_t.clone();
    for m in 1..=depth {
        state = implicit_heat_step(&state, dt, h);
        assert!(max_diff(z.node(m, 0), &state) < 1e-12);
    }
}

#[test]
fn direct_and_transpose_differ_at_first_order() {
    let nx = 31;
    let errors: Vec<f64> = [8usize, 16, 32]
        .iter()
        .map(|&depth| {
            let s = zero_potential::<f64>(nx, depth, 1.0).unwrap();
            let y_t = AdaptedField::deterministic(depth, s.grid.sample(|x| (PI * x).sin()));
            let forcing = AdaptedField::from_levels(
                nx,
                0,
                (0..depth).map(|_| LevelValues::Uniform(s.grid.sample(|x| 10.0 * (2.0 * PI * x).sin()))).collect(),
            )
            .unwrap();
            let u = ControlField::new(forcing, &s.subdomains.control, depth).unwrap();
            let d = solve_backward_direct(&y_t, &u, &s.coeffs, &s.tree, &s.grid).unwrap();
            let t = solve_backward_transpose(&y_t, &u, &s.coeffs, &s.tree, &s.grid).unwrap();
            max_diff(d.initial(), t.initial())
        })
        .collect();
    for pair in errors.windows(2) {
        let ratio = pair[0] / pair[1];
        assert!((1.5..=2.5).contains(&ratio), "errors {errors:?}");
    }
}

#[test]
fn adjoint_converges_at_first_order_in_time() {
    let nx = 15;
    let z0: Vec<f64> = Grid1D::<f64>::new(nx)
        .unwrap()
        .sample(|x| (PI * x).sin())
        .into_iter()
        .chain(std::iter::repeat_n(0.0, nx))
        .collect();
    let terminal = |depth: usize| {
        let s = coupled::<f64>(nx, depth, 0.1).unwrap();
        solve_adjoint(&z0, &s.coeffs, &s.tree, &s.grid, None).unwrap().node(depth, 0).to_vec()
    };
    // Successive differences, no reference run; the short horizon keeps dt * lambda_1 small.
    let runs: Vec<Vec<f64>> = [6, 12, 24, 48].iter().map(|&m| terminal(m)).collect();
    let errors: Vec<f64> = runs.windows(2).map(|w| max_diff(&w[0], &w[1])).collect();
    for pair in errors.windows(2) {
        let ratio = pair[0] / pair[1];
        assert!((1.6..=2.4).contains(&ratio), "errors {errors:?}");
    }
}

#[test]
fn tree_construction_is_cheap_for_deterministic_depth() {
    let tree = ScenarioTree::<f64>::new(32, 1.0).unwrap();
    assert_eq!(tree.nodes_at(32), 1usize << 32);
}
