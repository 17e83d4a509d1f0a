mod common;

use common::*;
use dscflow::connection::Side;
use dscflow::pressure::{
    cell_divergence_integral, divergence_field, interface_pressure, pressure_iterate, CellUpdate, PressureSolver,
    PressureSolverConfig,
};
use dscflow::reflection::{reflection_sweep, MaterialProps, SourceField};
use dscflow::sim::Grid;
use dscflow::{BoundaryConditions, Field, FieldState, HexCell, Mesh, Vec3};
use proptest::prelude::*;
use rand::Rng;

fn walled_grid(n: usize) -> Mesh<f64> {
    Grid::new(n, n, 1)
        .build(|i, j, k| Vec3::new(i as f64, j as f64, k as f64), |_, _, _| false, |_, _, _, _, _| "wall")
        .unwrap()
}

/// Random port velocities shared across every interior face; zero on walls.
fn random_ports(mesh: &Mesh<f64>, seed: u64) -> FieldState<f64> {
    let mut r = rng(seed);
    let mut state = FieldState::new(mesh.n_cells(), 0.1);
    for pair in &mesh.interior_faces {
        let u = random_vec(&mut r, 1.0);
        state.set_port_velocity(pair.a.cell, pair.a.face, u);
        state.set_port_velocity(pair.b.cell, pair.b.face, u);
    }
    state
}

fn config(update: CellUpdate, tolerance: f64) -> PressureSolverConfig<f64> {
    PressureSolverConfig { cell_update: update, tolerance, max_iterations: 20_000, ..Default::default() }
}

#[test]
fn divergence_is_six_term_dot_sum() {
    let mut r = rng(51);
    for _ in 0..100 {
        let cell = random_cell(&mut r, 0.2);
        let u: [Vec3<f64>; 6] = std::array::from_fn(|_| random_vec(&mut r, 2.0));
        let mut want = 0.0;
        for f in 0..6 {
            for k in 0..3 {
                want += u[f][k] * cell.face_vectors[f][k];
            }
        }
        assert!((cell_divergence_integral(&cell, &u) - want).abs() < 1e-13);
    }
}

#[test]
fn single_source_residual_never_grows() {
    let mesh = walled_grid(4);
    let bcs = BoundaryConditions::closed_adiabatic(&mesh);
    for update in [CellUpdate::Eliminated, CellUpdate::FaceFixed] {
        let mut state = FieldState::new(mesh.n_cells(), 0.1);
        // cell 5 pushes fluid into cell 6 through their shared face
        state.set_port_velocity(5, 1, Vec3::new(1.0, 0.0, 0.0));
        state.set_port_velocity(6, 0, Vec3::new(1.0, 0.0, 0.0));
        let mut cfg = config(update, 1e-10);
        cfg.relaxation = 1.0;
        let report = pressure_iterate(&mesh, &mut state, 1.0, &bcs, &cfg).unwrap();
        assert!(report.iterations > 1);
        for w in report.residuals.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12), "{update:?}: {:?}", report.residuals);
        }
    }
}

#[test]
fn divergence_free_ports_need_no_iteration() {
    let mesh = walled_grid(4);
    let bcs = BoundaryConditions::closed_adiabatic(&mesh);
    let mut state = FieldState::uniform(mesh.n_cells(), 0.1, 0.0, Vec3::zero(), 3.0);
    let report = pressure_iterate(&mesh, &mut state, 1.0, &bcs, &config(CellUpdate::Eliminated, 1e-8)).unwrap();
    assert!(report.iterations <= 1);
    let p = state.nodes(Field::Pressure);
    assert!(p.iter().all(|x| *x == p[0]));
}

#[test]
fn two_cube_linear_pressure() {
    let a = HexCell::new(0, [0; 8], &CUBE.map(v)).unwrap();
    let b = HexCell::new(1, [0; 8], &CUBE.map(|c| v(c) + Vec3::new(1.0, 0.0, 0.0))).unwrap();
    let p = |x: Vec3<f64>| 3.0 * x[0] - 2.0 * x[1] + 0.5 * x[2] + 1.0;
    let (pa, pb) = (a.face_centers.map(p), b.face_centers.map(p));
    let value = interface_pressure(
        Side { index: 0, cell: &a, face: 1, node: p(a.centroid), ports: &pa },
        Side { index: 1, cell: &b, face: 0, node: p(b.centroid), ports: &pb },
    )
    .unwrap();
    assert!((value - p(Vec3::new(1.0, 0.5, 0.5))).abs() < 1e-14);
}

#[test]
fn direct_and_iterative_solutions_agree() {
    let mesh = jittered_box(6, 2, 0.2, 52);
    let bcs = BoundaryConditions::closed_adiabatic(&mesh);
    let base = random_ports(&mesh, 52);
    let mut direct = base.clone();
    let mut solver = PressureSolver::new(&mesh, &bcs);
    assert!(solver.is_floating());
    let rd = solver.solve(&mesh, &mut direct, 1.0, &config(CellUpdate::Direct, 1e-12)).unwrap();
    let mut sor = base.clone();
    let mut cfg = config(CellUpdate::Eliminated, 1e-12);
    cfg.relaxation = 1.6;
    let rs = pressure_iterate(&mesh, &mut sor, 1.0, &bcs, &cfg).unwrap();
    assert!(rd.iterations < rs.iterations);
    let (pd, ps) = (direct.nodes(Field::Pressure), sor.nodes(Field::Pressure));
    let scale = pd.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    assert_eq!(pd[0], 0.0);
    for (a, b) in pd.iter().zip(ps) {
        assert!((a - b).abs() <= 1e-8 * scale, "{a} vs {b}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// Only pressure differences reach the velocity update.
    #[test]
    fn pressure_level_does_not_move_the_flow(seed in any::<u64>(), level in -1e3..1e3f64) {
        let mesh = jittered_box(3, 2, 0.2, seed);
        let mut r = rng(seed);
        let mut state = random_ports(&mesh, seed);
        let pi = Field::Pressure.index();
        for c in 0..mesh.n_cells() {
            state.port[pi][c] = std::array::from_fn(|_| r.gen_range(-1.0..1.0));
        }
        let mut shifted = state.clone();
        shifted.port[pi].iter_mut().flat_map(|p| p.iter_mut()).for_each(|p| *p += level);
        let props = MaterialProps::nondimensional(0.1, 0.1);
        let q = SourceField::zeros(mesh.n_cells());
        reflection_sweep(&mesh, &mut state, &props, &q, true).unwrap();
        reflection_sweep(&mesh, &mut shifted, &props, &q, true).unwrap();
        for c in 0..mesh.n_cells() {
            let d = (state.velocity(c) - shifted.velocity(c)).norm();
            prop_assert!(d <= 1e-13 * (1.0 + level.abs()) * state.tau / mesh.cells[c].spacing);
        }
    }

    #[test]
    fn solve_balances_every_cell(seed in any::<u64>()) {
        let mesh = jittered_box(4, 2, 0.2, seed);
        let bcs = BoundaryConditions::closed_adiabatic(&mesh);
        let mut state = random_ports(&mesh, seed);
        let report = pressure_iterate(&mesh, &mut state, 1.0, &bcs, &config(CellUpdate::Direct, 1e-10)).unwrap();
        prop_assert!(report.final_residual() <= 1e-10 * report.flux_scale);
        let (before, _) = divergence_field(&mesh, &state);
        dscflow::pressure::project_port_velocities(&mesh, &mut state, 1.0, &bcs);
        let (after, _) = divergence_field(&mesh, &state);
        let worst = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        prop_assert!(worst(&after) <= 1e-9 * worst(&before).max(report.flux_scale));
    }
}
