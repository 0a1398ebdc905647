use std::path::Path;

use qinfo_core::experiment::{
    experiment_distribution, lambda_rate_report, lambda_surface, optimize_controls, ExperimentScheme, LambdaRateConfig,
};
use qinfo_core::grid::BlochGrid;
use qinfo_core::linalg::eig_hermitian;
use qinfo_core::measurement::{orientation_average_experiment, selected_information, shannon_mutual, Outcome};
use qinfo_core::montecarlo::nonselected_monte_carlo;
use qinfo_core::states::{
    bell_basis, distinguishable_states, epsilon_by_quadrature, epsilon_operator, mixed_family, overlap_information,
    pure_family, DensityMatrix,
};
use qinfo_core::{ComplexMatrix, VERSION};
use serde_json::{json, Value};

use crate::args::{Command, Family, Grid, RunConfig};
use crate::output::{format_num, pretty, Table};

pub const MIN_N_THETA: usize = 8;
pub const MIN_N_PHI: usize = 16;
/// Largest entry deviation allowed between the closed-form and quadrature
/// incompatibility operators.
pub const EPSILON_QUADRATURE_TOL: f64 = 1e-6;

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Validation(String),
    Tolerance(String),
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Io(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Validation(_) => 3,
            Failure::Tolerance(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Validation(m) | Failure::Tolerance(m) | Failure::Io(m) => m,
        }
    }
}

impl From<qinfo_core::Error> for Failure {
    fn from(e: qinfo_core::Error) -> Self {
        match e {
            qinfo_core::Error::Io(m) => Failure::Io(m),
            other => Failure::Validation(other.to_string()),
        }
    }
}

type CmdResult = std::result::Result<Rendered, Failure>;

/// Command output, plus a tolerance failure to report after it is written.
pub struct Rendered {
    pub text: String,
    pub failure: Option<Failure>,
}

impl Rendered {
    fn ok(text: String) -> Self {
        Rendered { text, failure: None }
    }
}

pub fn run(cfg: &RunConfig, cmd: &Command) -> CmdResult {
    if cfg.n_theta < MIN_N_THETA || cfg.n_phi < MIN_N_PHI {
        return Err(Failure::Usage(format!(
            "resolution must be at least --n-theta {MIN_N_THETA} --n-phi {MIN_N_PHI}, got {} {}",
            cfg.n_theta, cfg.n_phi
        )));
    }
    match cmd {
        Command::Distinguish { dim } => distinguish(cfg, *dim),
        Command::Epsilon { verify_quadrature } => epsilon(cfg, *verify_quadrature),
        Command::LambdaScan {
            gamma1,
            gamma2,
            max_total_rate_t,
            n_t,
            theta_max,
            n_angle,
        } => lambda_scan(cfg, *gamma1, *gamma2, *max_total_rate_t, *n_t, *theta_max, *n_angle),
        Command::Rate {
            gamma1,
            gamma2,
            n_t,
            n_angle,
            t_min,
            t_max,
            theta_min,
            theta_max,
            no_refine,
            trace,
        } => {
            let config = LambdaRateConfig {
                n_t: *n_t,
                n_theta: *n_angle,
                t_range: t_min.zip(*t_max),
                theta_range: (*theta_min, *theta_max),
                refine: !no_refine,
                ..LambdaRateConfig::default()
            };
            rate(*gamma1, *gamma2, &config, *trace)
        }
        Command::Compatible {
            family,
            q,
            chi,
            vartheta,
            orientation_average,
        } => {
            if *orientation_average {
                orientation(cfg, *family, q)
            } else {
                compatible(cfg, *family, q, chi, vartheta)
            }
        }
        Command::Oracle { family, q, samples } => oracle(cfg, *family, q, *samples),
        Command::Experiment {
            scheme,
            optimize,
            budget,
        } => experiment(scheme, optimize.then_some(*budget as usize)),
    }
}

fn base_table(cfg: &RunConfig, columns: &[&'static str]) -> Table {
    let mut t = Table::new(columns);
    t.meta("qinfo", VERSION);
    t.meta("n_theta", cfg.n_theta);
    t.meta("n_phi", cfg.n_phi);
    t
}

fn grid(cfg: &RunConfig) -> Result<BlochGrid, Failure> {
    Ok(BlochGrid::new(cfg.n_theta, cfg.n_phi)?)
}

fn family_state(family: Family, q: f64) -> Result<DensityMatrix, Failure> {
    Ok(match family {
        Family::Pure => pure_family(q)?,
        Family::Mixed => mixed_family(q)?,
    })
}

fn family_name(family: Family) -> &'static str {
    match family {
        Family::Pure => "pure",
        Family::Mixed => "mixed",
    }
}

fn distinguish(cfg: &RunConfig, dim: u64) -> CmdResult {
    let mut t = base_table(cfg, &["dim", "I_bits", "N_states"]);
    t.push(vec![
        dim.into(),
        overlap_information(dim)?.into(),
        distinguishable_states(dim)?.into(),
    ]);
    Ok(Rendered::ok(t.render(cfg.format)))
}

fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    (0..a.rows())
        .flat_map(|r| (0..a.cols()).map(move |c| (r, c)))
        .map(|(r, c)| (a[(r, c)] - b[(r, c)]).norm())
        .fold(0.0, f64::max)
}

fn epsilon(cfg: &RunConfig, verify: bool) -> CmdResult {
    let eps = epsilon_operator();
    let mut eigenvalues = eig_hermitian(&eps)?.eigenvalues;
    eigenvalues.sort_by(|a, b| b.total_cmp(a));
    let min = eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);

    let mut t = base_table(cfg, &["k", "eigenvalue", "bell_expectation"]);
    for (k, (lambda, b)) in eigenvalues.iter().zip(bell_basis()).enumerate() {
        t.push(vec![k.into(), (*lambda).into(), eps.expectation(&b).re.into()]);
    }
    t.meta("min_eigenvalue", format_num(min));
    t.meta("bound", format_num(1.0 / 3.0));

    let mut failure = None;
    if verify {
        let dev = max_abs_diff(&eps, &epsilon_by_quadrature(&grid(cfg)?));
        t.meta("quadrature_deviation", format_num(dev));
        if dev.is_nan() || dev > EPSILON_QUADRATURE_TOL {
            failure = Some(Failure::Tolerance(format!(
                "quadrature operator deviates by {dev:.3e} (tolerance {EPSILON_QUADRATURE_TOL:e})"
            )));
        }
    }
    Ok(Rendered {
        text: t.render(cfg.format),
        failure,
    })
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

fn lambda_scan(
    cfg: &RunConfig,
    gamma1: f64,
    gamma2: f64,
    max_total_rate_t: f64,
    n_t: usize,
    theta_max: f64,
    n_angle: usize,
) -> CmdResult {
    let total = gamma1 + gamma2;
    if !(total > 0.0 && total.is_finite()) {
        return Err(Failure::Validation("gamma1 + gamma2 must be positive".into()));
    }
    if !(max_total_rate_t > 0.0 && max_total_rate_t.is_finite()) {
        return Err(Failure::Validation("--max-total-rate-t must be positive".into()));
    }
    if n_t < 2 || n_angle < 1 {
        return Err(Failure::Validation("need --n-t >= 2 and --n-angle >= 1".into()));
    }
    let ts = linspace(0.0, max_total_rate_t / total, n_t);
    let thetas = linspace(0.0, theta_max, n_angle);
    let surface = lambda_surface(gamma1, gamma2, &ts, &thetas)?;

    let mut t = base_table(cfg, &["t", "total_rate_t", "theta", "I_c", "I_c_clamped"]);
    for p in &surface {
        t.push(vec![
            p.t.into(),
            (total * p.t).into(),
            p.theta.into(),
            p.coherent_information.into(),
            p.clamped.into(),
        ]);
    }
    t.meta("gamma1", gamma1);
    t.meta("gamma2", gamma2);
    Ok(Rendered::ok(t.render(cfg.format)))
}

fn rate(gamma1: f64, gamma2: f64, config: &LambdaRateConfig, trace: bool) -> CmdResult {
    let mut report = lambda_rate_report(gamma1, gamma2, config)?;
    if !trace {
        for v in &mut report.variants {
            v.result.trace.clear();
        }
    }
    let mut value = serde_json::to_value(&report).expect("serializable report");
    value["qinfo"] = json!(VERSION);
    Ok(Rendered::ok(pretty(&value)))
}

fn compatible(cfg: &RunConfig, family: Family, q: &Grid, chi: &Grid, vartheta: &Grid) -> CmdResult {
    let g = grid(cfg)?;
    let mut t = base_table(cfg, &["q", "chi", "vartheta", "I_bits", "n_theta", "n_phi"]);
    t.meta("family", family_name(family));
    for &qv in &q.0 {
        let rho = family_state(family, qv)?;
        for &c in &chi.0 {
            for &v in &vartheta.0 {
                let info = selected_information(&rho, c, v, &g)?;
                t.push(vec![
                    qv.into(),
                    c.into(),
                    v.into(),
                    info.into(),
                    cfg.n_theta.into(),
                    cfg.n_phi.into(),
                ]);
            }
        }
    }
    Ok(Rendered::ok(t.render(cfg.format)))
}

fn orientation(cfg: &RunConfig, family: Family, q: &Grid) -> CmdResult {
    let g = grid(cfg)?;
    let mut t = base_table(
        cfg,
        &["q", "I_nonselected", "I_orientation_average", "n_theta", "n_phi"],
    );
    t.meta("family", family_name(family));
    for &qv in &q.0 {
        let r = orientation_average_experiment(&family_state(family, qv)?, &g)?;
        t.push(vec![
            qv.into(),
            r.nonselected.into(),
            r.orientation_average.into(),
            cfg.n_theta.into(),
            cfg.n_phi.into(),
        ]);
    }
    Ok(Rendered::ok(t.render(cfg.format)))
}

fn oracle(cfg: &RunConfig, family: Family, q: &Grid, samples: usize) -> CmdResult {
    let g = grid(cfg)?;
    let mut t = base_table(cfg, &["q", "I_mc", "std_err", "samples", "seed", "I_quad"]);
    t.meta("family", family_name(family));
    t.meta("seed", cfg.seed);
    for &qv in &q.0 {
        let rho = family_state(family, qv)?;
        let mc = nonselected_monte_carlo(&rho, samples, cfg.seed)?;
        let quad = selected_information(&rho, 0.0, 0.0, &g)?;
        t.push(vec![
            qv.into(),
            mc.mean.into(),
            mc.std_err.into(),
            mc.samples.into(),
            mc.seed.into(),
            quad.into(),
        ]);
    }
    Ok(Rendered::ok(t.render(cfg.format)))
}

fn outcome_label(o: Outcome) -> Value {
    match o {
        Outcome::Discrete(k) => json!(k),
        Outcome::Cell(c) => json!(format!("cell{c}")),
    }
}

fn experiment(path: &Path, budget: Option<usize>) -> CmdResult {
    let scheme = ExperimentScheme::load(path)?;
    let d = experiment_distribution(&scheme)?;
    let table: Vec<Vec<f64>> = (0..d.rows())
        .map(|a| (0..d.cols()).map(|b| d.mass(a, b)).collect())
        .collect();
    let defaults: serde_json::Map<String, Value> = scheme
        .control_names()
        .into_iter()
        .zip(scheme.default_values())
        .map(|(n, v)| (n.to_string(), json!(v)))
        .collect();
    let mut out = json!({
        "qinfo": VERSION,
        "scheme": path.display().to_string(),
        "controls": defaults,
        "information_bits": shannon_mutual(&d),
        "distribution": {
            "rows": d.rows(),
            "cols": d.cols(),
            "labels_a": d.labels_a().iter().map(|&o| outcome_label(o)).collect::<Vec<_>>(),
            "labels_b": d.labels_b().iter().map(|&o| outcome_label(o)).collect::<Vec<_>>(),
            "joint": table,
            "marginal_a": d.marginal_a(),
            "marginal_b": d.marginal_b(),
        },
    });
    if let Some(budget) = budget {
        out["optimization"] = serde_json::to_value(optimize_controls(&scheme, budget)?).expect("serializable result");
    }
    Ok(Rendered::ok(pretty(&out)))
}
