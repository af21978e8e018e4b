//! The five subcommands. Each returns `Ok(())` on success, and every output
//! file is written from the calling thread in a fixed order.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Serialize;
use serde_json::json;

use cs_radial::nonlinearity::check_hypotheses;
use cs_radial::nonlocal::gauge_fields;
use cs_radial::solver::{continuation_in_q, mountain_pass, multiplicity_run, nodal_shoot, SolveReport};
use cs_radial::{Execution, NonlinearityModel, RadialFunction, RadialGrid};

use crate::config::{NodesSpec, RunConfig, SolveMethod};
use crate::error::CliError;

/// Relative PDE, Nehari and Pohozaev residuals accepted for a solution.
pub const RESIDUAL_TOL: f64 = 1e-5;

pub struct Run {
    pub config: RunConfig,
    /// Directory of the config file; relative input paths resolve against it.
    pub base_dir: PathBuf,
    pub model: NonlinearityModel,
    pub grid: Arc<RadialGrid>,
    pub out_dir: PathBuf,
    pub exec: Execution,
}

impl Run {
    pub fn new(config: RunConfig, base_dir: PathBuf, out_dir: PathBuf, exec: Execution) -> Result<Self, CliError> {
        let model = config.model.build()?;
        let grid = config.grid.build()?;
        std::fs::create_dir_all(&out_dir).map_err(|source| CliError::Io {
            path: out_dir.clone(),
            source,
        })?;
        Ok(Self {
            config,
            base_dir,
            model,
            grid,
            out_dir,
            exec,
        })
    }

    fn write(&self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.out_dir.join(name);
        std::fs::write(&path, contents).map_err(|source| CliError::Io { path, source })
    }

    fn write_json(&self, name: &str, value: &impl Serialize) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Failed(e.to_string()))?;
        text.push('\n');
        self.write(name, &text)
    }

    fn write_solution(&self, k: usize, r: &SolveReport) -> Result<(), CliError> {
        self.write(&format!("profile_k{k}.csv"), &r.u.to_csv())?;
        self.write_json(&format!("report_k{k}.json"), r)?;
        self.write_json(&format!("verification_k{k}.json"), &r.verification)
    }

    fn solve_one(&self, q: f64, k: usize) -> Result<SolveReport, CliError> {
        let cfg = &self.config.solver;
        let rep = match self.config.method {
            SolveMethod::NodalShoot => nodal_shoot(q, &self.model, &self.grid, k, cfg)?,
            SolveMethod::MountainPass if k == 0 => mountain_pass(q, &self.model, &self.grid, cfg)?,
            SolveMethod::MountainPass => {
                return Err(CliError::Config(format!(
                    "mountain-pass finds the ground state only; got nodes = {k}"
                )))
            }
        };
        Ok(rep)
    }
}

/// Why a report does not count as a verified solution, if it does not.
pub fn rejection(r: &SolveReport) -> Option<String> {
    let v = &r.verification;
    if !r.converged {
        Some(format!("no convergence: {}", r.message))
    } else if !r.truncation_inactive {
        Some(format!("truncation active: qN(u) = {}", v.q_times_n))
    } else if v.residual_pde_relative >= RESIDUAL_TOL {
        Some(format!("relative PDE residual {:e}", v.residual_pde_relative))
    } else if v.nehari_relative >= RESIDUAL_TOL {
        Some(format!("relative Nehari residual {:e}", v.nehari_relative))
    } else if v.pohozaev_relative >= RESIDUAL_TOL {
        Some(format!("relative Pohozaev residual {:e}", v.pohozaev_relative))
    } else {
        None
    }
}

fn fail_on(rejections: Vec<(usize, String)>) -> Result<(), CliError> {
    match rejections.into_iter().next() {
        None => Ok(()),
        Some((k, why)) => Err(CliError::Failed(format!("k = {k}: {why}"))),
    }
}

pub fn solve(run: &Run) -> Result<(), CliError> {
    let q = run.config.single_q()?;
    let nodes = run.config.nodes.list();
    let results: Vec<Result<SolveReport, CliError>> = run.exec.map(&nodes, |&k| run.solve_one(q, k));
    let mut rejections = Vec::new();
    for (&k, res) in nodes.iter().zip(results) {
        let rep = res?;
        run.write_solution(k, &rep)?;
        if let Some(why) = rejection(&rep) {
            rejections.push((k, why));
        }
    }
    fail_on(rejections)
}

pub fn multiplicity(run: &Run) -> Result<(), CliError> {
    let q = run.config.single_q()?;
    let n = match run.config.nodes {
        NodesSpec::One(n) if n >= 1 => n,
        _ => return Err(CliError::Config("multiplicity needs nodes = n >= 1 (solutions k = 0..n-1)".into())),
    };
    let out = multiplicity_run(q, &run.model, &run.grid, n, &run.config.solver, run.exec)?;
    let mut rejections = Vec::new();
    for (k, rep) in out.reports.iter().enumerate() {
        run.write_solution(k, rep)?;
        if let Some(why) = rejection(rep) {
            rejections.push((k, why));
        }
    }
    if let Some(d) = &out.distinctness {
        run.write_json("distinctness.json", d)?;
    }
    if let Some(f) = &out.failure {
        rejections.push((f.k, f.reason.clone()));
        rejections.sort_by_key(|(k, _)| *k);
    }
    let levels: Vec<f64> = out.reports.iter().map(|r| r.level).collect();
    let first = rejections.first().map(|(k, why)| json!({"k": k, "reason": why}));
    run.write_json(
        "multiplicity.json",
        &json!({
            "q": q,
            "n": n,
            "levels": levels,
            "passed": first.is_none(),
            "first_failure": first,
        }),
    )?;
    fail_on(rejections)
}

pub fn sweep(run: &Run) -> Result<(), CliError> {
    let range = run.config.q_range()?;
    let nodes = run.config.nodes.list();
    let cfg = &run.config.solver;
    let branches: Vec<_> = run.exec.map(&nodes, |&k| {
        continuation_in_q(&run.model, &run.grid, k, range.start, range.end, range.steps, cfg)
    });
    let mut index = Vec::new();
    let mut empty = Vec::new();
    for (&k, b) in nodes.iter().zip(branches) {
        let b = b?;
        let file = format!("branch_k{k}.csv");
        run.write(&file, &b.to_csv())?;
        run.write_json(&format!("branch_k{k}.json"), &b)?;
        if b.q_last_good.is_none() {
            empty.push((k, b.failure.clone().unwrap_or_else(|| "no converged point".into())));
        }
        index.push(json!({
            "k": k,
            "file": file,
            "q_star": b.q_star,
            "q_last_good": b.q_last_good,
            "failure": b.failure,
        }));
    }
    run.write_json(
        "sweep.json",
        &json!({"q_start": range.start, "q_end": range.end, "steps": range.steps, "branches": index}),
    )?;
    fail_on(empty)
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

pub fn gauge(run: &Run) -> Result<(), CliError> {
    let u = match &run.config.profile {
        Some(p) => {
            let path = resolve(&run.base_dir, p);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            RadialFunction::from_csv(&run.grid, &text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        }
        None => {
            let k = match run.config.nodes.list().as_slice() {
                [k] => *k,
                _ => return Err(CliError::Config("gauge solves for a single node count".into())),
            };
            let rep = run.solve_one(run.config.single_q()?, k)?;
            run.write_solution(k, &rep)?;
            if let Some(why) = rejection(&rep) {
                return Err(CliError::Failed(format!("k = {k}: {why}")));
            }
            rep.u
        }
    };
    let fields = gauge_fields(&u, &run.config.constants)?;
    run.write("gauge.csv", &fields.to_csv())?;
    let s = fields.summary();
    run.write_json(
        "gauge.json",
        &json!({
            "charge": s.charge,
            "flux": s.flux,
            "kappa": s.kappa,
            "flux_charge_gap": (s.flux + s.charge / s.kappa).abs(),
            "constants": run.config.constants,
        }),
    )
}

pub fn hypotheses(run: &Run) -> Result<(), CliError> {
    let spec = run.config.sample.unwrap_or_default();
    let report = check_hypotheses(&run.model, spec)?;
    let passed = report.all_passed();
    run.write_json(
        "hypotheses.json",
        &json!({"model": run.model.description(), "sample": spec, "report": report, "all_passed": passed}),
    )?;
    if passed {
        Ok(())
    } else {
        Err(CliError::Failed(format!("hypothesis check failed: {report:?}")))
    }
}
