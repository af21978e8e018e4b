use std::sync::Arc;

use cs_radial::energy::{j_trunc, rescale_omega};
use cs_radial::grid::norm_l2;
use cs_radial::solver::{
    continuation_in_q, initial_path, mountain_pass, multiplicity_run, newton_refine, nodal_shoot, MinimaxConfig,
};
use cs_radial::verify::{residual_pde, verify};
use cs_radial::{make_grid, Execution, Grading, NonlinearityModel, RadialFunction, RadialGrid};

fn grid() -> Arc<RadialGrid> {
    make_grid(20.0, 1025, Grading::Uniform).unwrap()
}

fn power() -> NonlinearityModel {
    NonlinearityModel::power(2.0, 1.0).unwrap()
}

#[test]
fn newton_needs_no_steps_on_a_solution() {
    let (g, m, cfg) = (grid(), power(), MinimaxConfig::default());
    let sol = nodal_shoot(0.0, &m, &g, 0, &cfg).unwrap();
    assert!(sol.converged, "{}", sol.message);
    let again = newton_refine(&sol.u, 0.0, &m, &cfg).unwrap();
    assert!(again.converged);
    assert_eq!(again.iterations, 0);
    assert_eq!(again.newton_history.len(), 1);
}

#[test]
fn newton_history_decreases_from_a_perturbed_start() {
    let (g, m, cfg) = (grid(), power(), MinimaxConfig::default());
    let sol = nodal_shoot(0.0, &m, &g, 0, &cfg).unwrap();
    let bump = RadialFunction::from_fn(&g, |r| 0.05 * (-r * r).exp());
    let start = sol.u.axpy(1.0, &bump).unwrap();
    let rep = newton_refine(&start, 0.0, &m, &cfg).unwrap();
    assert!(rep.converged, "{}", rep.message);
    assert!(rep.iterations >= 1);
    for w in rep.newton_history.windows(2) {
        assert!(w[1] < w[0], "{:?}", rep.newton_history);
    }
    assert!(norm_l2(&rep.u.axpy(-1.0, &sol.u).unwrap()) < 1e-6);
}

#[test]
fn initial_paths_end_below_zero() {
    let (g, m, cfg) = (grid(), power(), MinimaxConfig::default());
    let path = initial_path(&m, &g, 1, 0.0, &cfg).unwrap();
    assert_eq!(path.profiles[0].sup_norm(), 0.0);
    let energies: Vec<f64> = path
        .profiles
        .iter()
        .map(|u| j_trunc(u, 0.0, &m).unwrap().total)
        .collect();
    assert!(*energies.last().unwrap() < 0.0);
    assert!(energies.iter().cloned().fold(f64::NEG_INFINITY, f64::max) > 0.0);

    let disk = initial_path(&m, &g, 2, 1e-3, &cfg).unwrap();
    assert!(disk.boundary_energy < 0.0);
    // the family is odd
    let e = j_trunc(&disk.profiles[1], 1e-3, &m).unwrap().total;
    let minus = j_trunc(&disk.profiles[1].scale(-1.0), 1e-3, &m).unwrap().total;
    assert!((e - minus).abs() <= 1e-12 * e.abs().max(1.0));
}

#[test]
fn initial_path_rejects_zero_dimension() {
    assert!(initial_path(&power(), &grid(), 0, 0.0, &MinimaxConfig::default()).is_err());
}

#[test]
fn mountain_pass_matches_shooting() {
    let (g, m, cfg) = (grid(), power(), MinimaxConfig::default());
    let mp = mountain_pass(0.0, &m, &g, &cfg).unwrap();
    let ns = nodal_shoot(0.0, &m, &g, 0, &cfg).unwrap();
    assert!(mp.converged && ns.converged);
    assert!(norm_l2(&mp.u.axpy(-1.0, &ns.u).unwrap()) < 1e-6);
    assert!((mp.level - ns.level).abs() < 1e-8 * ns.level);
}

#[test]
fn multiplicity_at_small_coupling() {
    let (g, m, cfg) = (grid(), power(), MinimaxConfig::default());
    let out = multiplicity_run(2e-5, &m, &g, 3, &cfg, Execution::Parallel).unwrap();
    assert!(out.passed(), "{:?}", out.failure);
    for (k, r) in out.reports.iter().enumerate() {
        assert_eq!(r.node_count, k);
        assert!(r.truncation_inactive);
        let v = &r.verification;
        assert!(v.residual_pde_relative < 1e-5 && v.nehari_relative < 1e-5 && v.pohozaev_relative < 1e-5);
    }
    let d = out.distinctness.unwrap();
    assert!(d.flagged.is_empty());
}

#[test]
fn sequential_and_parallel_runs_agree() {
    let (g, m, cfg) = (grid(), power(), MinimaxConfig::default());
    let a = multiplicity_run(2e-5, &m, &g, 2, &cfg, Execution::Sequential).unwrap();
    let b = multiplicity_run(2e-5, &m, &g, 2, &cfg, Execution::Parallel).unwrap();
    for (x, y) in a.reports.iter().zip(&b.reports) {
        assert_eq!(x.u.values(), y.u.values());
        assert_eq!(x.level, y.level);
    }
}

#[test]
fn negated_solution_is_a_solution() {
    let (g, m, cfg) = (grid(), power(), MinimaxConfig::default());
    let q = 2e-5;
    let sol = nodal_shoot(q, &m, &g, 1, &cfg).unwrap();
    assert!(sol.converged);
    let neg = sol.u.scale(-1.0);
    let (a, _) = residual_pde(&sol.u, q, &m);
    let (b, _) = residual_pde(&neg, q, &m);
    assert!((a - b).abs() < 1e-12);
    let ea = j_trunc(&sol.u, q, &m).unwrap().total;
    let eb = j_trunc(&neg, q, &m).unwrap().total;
    assert!((ea - eb).abs() <= 1e-12 * ea.abs());
}

#[test]
fn continuation_walks_forward_and_stops_once() {
    let (g, m, cfg) = (grid(), power(), MinimaxConfig::default());
    let branch = continuation_in_q(&m, &g, 1, 0.0, 1e-3, 6, &cfg).unwrap();
    for w in branch.points.windows(2) {
        assert!(w[1].q > w[0].q);
    }
    let good = branch.points.iter().filter(|p| p.converged && p.truncation_inactive).count();
    assert!(good >= 2);
    // only the last recorded point may be a failure
    assert!(branch.points[..branch.points.len() - 1]
        .iter()
        .all(|p| p.converged && p.truncation_inactive));
    if let (Some(lo), Some(hi)) = (branch.q_last_good, branch.q_star) {
        assert!(lo < hi);
    }
    assert!(branch.to_csv().starts_with("q,level,u0,l2,trunc_inactive,converged\n"));
    assert!(continuation_in_q(&m, &g, 0, 1e-3, 1e-4, 6, &cfg).is_err());
}

#[test]
fn rescaling_transports_a_small_frequency_solution() {
    // ω = 0.05 maps to unit frequency at coupling ω² = 2.5e-3, inside the
    // range where the ground-state branch still exists
    let (omega, p) = (0.05, 2.0);
    let g = make_grid(120.0, 2049, Grading::Uniform).unwrap();
    let cfg = MinimaxConfig::default();
    let src_model = NonlinearityModel::power(p, omega).unwrap();
    let src = nodal_shoot(1.0, &src_model, &g, 0, &cfg).unwrap();
    assert!(src.converged, "{}", src.message);
    let (v, q) = rescale_omega(&src.u, omega, p).unwrap();
    assert!((q - omega * omega).abs() < 1e-15);
    // both residuals sit near rounding, so compare them relative to the size
    // of the terms they balance, which the rescaling leaves invariant
    let src_rel = verify(&src.u, 1.0, &src_model).unwrap().residual_pde_relative;
    let rep = verify(&v, q, &power()).unwrap();
    assert!(
        rep.residual_pde_relative <= 10.0 * src_rel.max(1e-14),
        "{} vs {src_rel}",
        rep.residual_pde_relative
    );
    assert!(rep.q_n_check);
}

#[test]
fn rejects_bad_arguments() {
    let (g, m) = (grid(), power());
    let mut cfg = MinimaxConfig::default();
    assert!(nodal_shoot(-1.0, &m, &g, 0, &cfg).is_err());
    assert!(mountain_pass(f64::NAN, &m, &g, &cfg).is_err());
    cfg.relaxation = 0.0;
    assert!(nodal_shoot(0.0, &m, &g, 0, &cfg).is_err());
}
