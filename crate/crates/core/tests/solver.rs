mod common;

use common::{cosh_profile, s_star, t_expr, x_expr};
use frontfix::solver::{front_velocity, init_state, run, s_double_prime_rhs, step};
use frontfix::{Expr, Forcing, Grid, Parameters, RunStatus, State};

fn params(lambda: f64, sigma: f64, b: f64, t_end: f64) -> Parameters {
    Parameters::new(lambda, sigma, b, t_end).unwrap()
}

fn uniform_state(n: usize, s: f64, s_prime: f64, value: impl Fn(f64) -> f64) -> State {
    State {
        t: 0.0,
        s,
        s_prime,
        v: (0..=n).map(|j| value(j as f64 / n as f64)).collect(),
    }
}

#[test]
fn init_state_examples() {
    let grid = Grid::new(64, 1e-3).unwrap();
    let st = init_state(&params(1.0, 1.0, 1.7, 1.0), &x_expr("1"), &grid).unwrap();
    assert_eq!((st.t, st.s, st.s_prime), (0.0, 1.7, 0.0));
    assert_eq!(st.v.len(), 65);

    let st = init_state(&params(1.0, 1.0, 2.0, 1.0), &x_expr("2"), &grid).unwrap();
    assert!((st.s_prime - 2.0).abs() < 1e-14);

    let b = 1.915;
    let st = init_state(&params(1.0, 1.0, b, 1.0), &cosh_profile(2.0, 1.0, b), &grid).unwrap();
    assert!(st.s_prime.abs() <= 1e-3, "{}", st.s_prime);
    assert!((st.v[32] - 2.0 * (1.0f64 * (b - 0.5 * b)).cosh() / b.cosh()).abs() < 1e-14);
}

#[test]
fn init_state_propagates_domain_errors() {
    let grid = Grid::new(16, 1e-3).unwrap();
    assert!(init_state(&params(1.0, 1.0, 1.0, 1.0), &x_expr("sqrt(0.5 - x)"), &grid).is_err());
}

#[test]
fn front_velocity_examples() {
    let p = params(1.0, 1.5, 1.0, 1.0);
    assert_eq!(front_velocity(&uniform_state(16, 1.0, 0.0, |_| 1.5), &p), 0.0);
    assert!((front_velocity(&uniform_state(16, 2.0, 0.0, |_| 2.5), &p) - 2.0).abs() < 1e-14);
    let affine = uniform_state(64, 1.0, 0.0, |xi| 1.5 + xi);
    assert!((front_velocity(&affine, &p) - 0.5).abs() <= 1e-12);
}

#[test]
fn s_double_prime_rhs_examples() {
    let (lambda, sigma) = (2.0, 1.5);
    let p = params(lambda, sigma, 1.0, 1.0);
    let rest = uniform_state(16, 1.0, 0.0, |_| sigma);
    assert!((s_double_prime_rhs(&rest, &p) + lambda * sigma).abs() < 1e-14);
    let empty = uniform_state(16, 1.0, 1.0, |_| 0.0);
    assert!((s_double_prime_rhs(&empty, &p) + (lambda + sigma + lambda * sigma)).abs() < 1e-14);
}

#[test]
fn s_double_prime_rhs_vanishes_at_equilibrium_to_second_order() {
    let s = s_star();
    let p = params(1.0, 1.0, s, 1.0);
    let rhs = |n: usize| {
        let st = init_state(&p, &cosh_profile(2.0, 1.0, s), &Grid::new(n, 1e-3).unwrap()).unwrap();
        s_double_prime_rhs(&st, &p)
    };
    // Leading error: the one-sided v_xi(0) stencil contributes -(2/3) s^2 tanh(s) h^2
    // through -v_xi(0)/s; the trapezoid error in s' is s^2 tanh(s) h^2 / 6, weighted
    // by (v(1) - lambda - sigma).
    let s2th = s * s * s.tanh();
    let v1 = 2.0 / s.cosh();
    let c = -2.0 / 3.0 * s2th + (v1 - 2.0) * s2th / 6.0;
    for n in [64usize, 128] {
        let h2 = (1.0 / n as f64).powi(2);
        let scaled = rhs(n) / h2;
        assert!((scaled - c).abs() <= 0.05 * c.abs(), "n = {n}: {scaled} vs {c}");
    }
}

#[test]
fn one_step_from_equilibrium_stays_close() {
    let s = s_star();
    let p = params(1.0, 1.0, s, 1.0);
    let grid = Grid::new(128, 1e-3).unwrap();
    let st = init_state(&p, &cosh_profile(2.0, 1.0, s), &grid).unwrap();
    let next = step(&st, &p, &grid, &t_expr("2"), &Forcing::none()).unwrap();
    assert!((next.t - 1e-3).abs() < 1e-18);
    assert!((next.s - s).abs() <= grid.dxi().powi(2) + grid.dt);
    assert_eq!(next.v[0], 2.0);
}

#[test]
fn zero_step_returns_state_unchanged() {
    let p = params(1.0, 1.0, 1.0, 1.0);
    let grid = Grid { n_xi: 16, dt: 0.0 };
    let st = uniform_state(16, 1.0, 0.3, |xi| 1.0 + xi * xi);
    assert_eq!(step(&st, &p, &grid, &t_expr("1 + t"), &Forcing::none()).unwrap(), st);
}

#[test]
fn ghost_node_keeps_uniform_field_uniform() {
    // With v uniform and a boundary value decaying exactly like the implicit reaction
    // term, every row of the system stays uniform only if the Neumann closure adds no
    // spurious flux at xi = 1.
    let (lambda, dt) = (1.3f64, 1e-2);
    let kappa = (1.0 + lambda * dt).ln() / dt;
    let f = t_expr(&format!("2*exp(-{kappa:?}*t)"));
    let p = params(lambda, 1.0, 1.0, 1.0);
    let grid = Grid::new(32, dt).unwrap();
    let mut st = uniform_state(32, 1.0, 0.0, |_| 2.0);
    st.s_prime = front_velocity(&st, &p);
    for _ in 0..20 {
        st = step(&st, &p, &grid, &f, &Forcing::none()).unwrap();
        let spread = st.v.iter().map(|v| (v - st.v[0]).abs()).fold(0.0, f64::max);
        assert!(spread <= 1e-13, "spread {spread} at t = {}", st.t);
    }
    assert!(st.s > 1.0, "front should grow while v > sigma");
}

#[test]
fn manufactured_step_matches_exact_field() {
    use frontfix::verify::make_mms_case;
    let s_bar = t_expr("1 + 0.1*t");
    let v_bar = Expr::parse("sin(pi*xi/2)*exp(-t)", &["xi", "t"]).unwrap();
    let case = make_mms_case(&s_bar, &v_bar, &params(1.0, 1.0, 1.0, 1.0)).unwrap();
    let grid = Grid::new(32, 1e-3).unwrap();
    let forcing = case.forcing(grid.n_xi);
    let mut st = init_state(&case.params, &case.phi_derived, &grid).unwrap();
    st.s_prime += forcing.q_at(0.0).unwrap();
    let next = step(&st, &case.params, &grid, &case.f_derived, &forcing).unwrap();
    let err = next
        .v
        .iter()
        .enumerate()
        .map(|(j, v)| (v - v_bar.eval(&[grid.node(j), grid.dt]).unwrap()).abs())
        .fold(0.0, f64::max);
    assert!(err <= grid.dt.powi(2) + grid.dxi().powi(2), "{err}");
    assert!((next.s - s_bar.eval1(grid.dt).unwrap()).abs() <= grid.dt.powi(2) + grid.dxi().powi(2));
}

#[test]
fn equilibrium_run_preserves_front() {
    let s = s_star();
    let p = params(1.0, 1.0, s, 5.0);
    let grid = Grid::new(128, 1e-3).unwrap();
    let r = run(&p, &grid, &t_expr("2"), &cosh_profile(2.0, 1.0, s), &Forcing::none(), &[]).unwrap();
    assert_eq!(r.status, RunStatus::Completed);
    assert_eq!(r.series.len(), 5001);
    assert_eq!(r.series.last().unwrap().t, 5.0);
    let dev = r.series.fronts().iter().map(|x| (x - s).abs()).fold(0.0, f64::max);
    assert!(dev <= 5e-3, "{dev}");
}

#[test]
fn resting_data_shrinks_front_initially() {
    let (lambda, sigma, b) = (1.0, 1.0, 1.2);
    let p = params(lambda, sigma, b, 0.1);
    let r = run(&p, &Grid::new(32, 1e-3).unwrap(), &t_expr("1"), &x_expr("1"), &Forcing::none(), &[]).unwrap();
    let rows = r.series.rows();
    assert_eq!(rows[0].s_prime, 0.0);
    assert!((rows[0].s_dprime_rhs + lambda * sigma * b).abs() < 1e-12);
    assert!(rows[1].s < b);
    assert!(rows.windows(2).all(|w| w[1].s < w[0].s));
}

#[test]
fn zero_horizon_logs_initial_row_only() {
    let p = params(1.0, 1.0, 1.0, 0.0);
    let r = run(&p, &Grid::new(16, 1e-2).unwrap(), &t_expr("1"), &x_expr("1"), &Forcing::none(), &[0.0]).unwrap();
    assert_eq!(r.status, RunStatus::Completed);
    assert_eq!(r.series.len(), 1);
    assert_eq!(r.snapshots.len(), 1);
}

#[test]
fn non_multiple_horizon_ends_exactly() {
    let p = params(1.0, 1.0, 1.0, 0.105);
    let r = run(&p, &Grid::new(16, 1e-2).unwrap(), &t_expr("1"), &x_expr("1"), &Forcing::none(), &[]).unwrap();
    let t = r.series.times();
    assert_eq!(t.len(), 12);
    assert_eq!(*t.last().unwrap(), 0.105);
    assert!(t.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn snapshots_at_requested_times() {
    let s = s_star();
    let p = params(1.0, 1.0, s, 1.0);
    let grid = Grid::new(32, 1e-2).unwrap();
    let r = run(&p, &grid, &t_expr("2"), &cosh_profile(2.0, 1.0, s), &Forcing::none(), &[0.5, 0.0, 1.0, 7.0]).unwrap();
    let got: Vec<(f64, f64)> = r.snapshots.iter().map(|sn| (sn.requested, sn.state.t)).collect();
    assert_eq!(got.len(), 3);
    for (req, t) in got {
        assert!((req - t).abs() < 1e-12, "{req} vs {t}");
    }
}

#[test]
fn collapse_is_a_status() {
    let p = params(1.0, 5.0, 1.0, 5.0);
    let r = run(&p, &Grid::new(32, 1e-3).unwrap(), &t_expr("0.5"), &x_expr("0.5"), &Forcing::none(), &[]).unwrap();
    match r.status {
        RunStatus::FrontCollapse { t, s } => {
            assert!(t > 0.0 && t < 5.0);
            assert!(s < p.s_min);
        }
        other => panic!("{other:?}"),
    }
    assert!(r.series.fronts().iter().all(|s| *s >= p.s_min));
}

#[test]
fn overflowing_boundary_data_diverges() {
    let p = params(1.0, 1.0, 1.0, 1.0);
    let r = run(&p, &Grid::new(16, 1e-2).unwrap(), &t_expr("exp(800*t)"), &x_expr("1"), &Forcing::none(), &[]).unwrap();
    assert!(matches!(r.status, RunStatus::Diverged { .. }), "{:?}", r.status);
    assert!(r.series.rows().iter().all(|row| row.s.is_finite()));
}

#[test]
fn runs_are_bit_identical() {
    let p = params(1.0, 1.0, 1.5, 1.0);
    let f = t_expr("2 + 0.1*sin(t)");
    let phi = x_expr("2 - 0.3*(x - 1.5)^2 + 0.675");
    let grid = Grid::new(48, 2e-3).unwrap();
    let a = run(&p, &grid, &f, &phi, &Forcing::none(), &[0.5]).unwrap();
    let b = run(&p, &grid, &f, &phi, &Forcing::none(), &[0.5]).unwrap();
    assert_eq!(a, b);
}
