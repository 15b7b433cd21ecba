//! Command-line front end: JSON configs, subcommand dispatch and CSV/JSON
//! result files.
//!
//! Exit codes: 0 success, 2 configuration error, 3 solver failure, 4 band
//! violation under `--assert`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::fluctuation::expansion_terms;
use crate::grid::{Grid, GridFunction};
use crate::mc::{run_distribution_study, run_scaling_study, McSummary, StudyConfig};
use crate::pde::{solve_homogenized_with, solve_semilinear_with, LinearizedOperator, SolveReport};
use crate::randfield::{empirical_correlation, empirical_fourth_moment, sample_potential};
use crate::seed::realization_seed;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_BANDS: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Solve,
    Scaling,
    Distribution,
    FieldCheck,
    Green,
}

impl Subcommand {
    pub fn name(&self) -> &'static str {
        match self {
            Subcommand::Solve => "solve",
            Subcommand::Scaling => "scaling",
            Subcommand::Distribution => "distribution",
            Subcommand::FieldCheck => "field-check",
            Subcommand::Green => "green",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliInvocation {
    pub subcommand: Subcommand,
    pub config_path: PathBuf,
    pub out_dir: PathBuf,
    /// `key=value` pairs with dotted keys, applied after the file is read.
    pub overrides: Vec<String>,
    pub threads: Option<usize>,
    pub seed: Option<u64>,
    pub assert_bands: bool,
}

/// Reads a JSON config, applies overrides and validates the result.
///
/// Override values are parsed as JSON where possible (`epsilons=[0.5,0.25]`,
/// `model.amplitude=0`) and taken as strings otherwise.
pub fn parse_config(path: &Path, overrides: &[String]) -> Result<StudyConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    let cfg: StudyConfig =
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let cfg = apply_overrides(cfg, overrides)?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn apply_overrides(cfg: StudyConfig, overrides: &[String]) -> Result<StudyConfig> {
    if overrides.is_empty() {
        return Ok(cfg);
    }
    let mut doc = serde_json::to_value(&cfg).map_err(|e| Error::Config(e.to_string()))?;
    for item in overrides {
        let (key, raw) = item
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override {item:?} is not key=value")))?;
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        set_path(&mut doc, key, value)?;
    }
    serde_json::from_value(doc).map_err(|e| Error::Config(format!("after overrides: {e}")))
}

fn set_path(doc: &mut Value, key: &str, value: Value) -> Result<()> {
    let mut node = doc;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        if part.is_empty() {
            return Err(Error::Config(format!("override key {key:?} has an empty segment")));
        }
        if node.is_null() {
            *node = Value::Object(Default::default());
        }
        let obj = node
            .as_object_mut()
            .ok_or_else(|| Error::Config(format!("override key {key:?}: {part:?} is not inside an object")))?;
        if i + 1 == parts.len() {
            obj.insert((*part).to_string(), value);
            return Ok(());
        }
        node = obj.entry((*part).to_string()).or_insert(Value::Null);
    }
    unreachable!("split always yields one segment")
}

/// Files written by one invocation and any band violations.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub band_failures: Vec<String>,
}

/// Runs an invocation and maps the outcome to an exit code, reporting
/// problems on standard error.
pub fn run(inv: &CliInvocation) -> i32 {
    match execute(inv) {
        Ok(outcome) => {
            if inv.assert_bands && !outcome.band_failures.is_empty() {
                for f in &outcome.band_failures {
                    eprintln!("band violated: {f}");
                }
                EXIT_BANDS
            } else {
                EXIT_OK
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_solver_failure() {
        EXIT_SOLVER
    } else {
        EXIT_CONFIG
    }
}

/// Loads the config and runs the subcommand, writing into `out_dir`.
pub fn execute(inv: &CliInvocation) -> Result<Outcome> {
    let mut cfg_overrides = inv.overrides.clone();
    if let Some(t) = inv.threads {
        cfg_overrides.push(format!("threads={t}"));
    }
    if let Some(s) = inv.seed {
        cfg_overrides.push(format!("base_seed={s}"));
    }
    let cfg = parse_config(&inv.config_path, &cfg_overrides)?;
    fs::create_dir_all(&inv.out_dir)
        .map_err(|e| Error::Config(format!("cannot create {}: {e}", inv.out_dir.display())))?;
    let out = &inv.out_dir;
    match inv.subcommand {
        Subcommand::Solve => run_solve(&cfg, out),
        Subcommand::Scaling => {
            let summary = run_scaling_study(&cfg)?;
            let mut files = vec![write_summary(out, &summary)?];
            files.push(write_per_epsilon(out, &summary)?);
            Ok(Outcome {
                files,
                band_failures: summary.band_failures(&cfg.bands),
            })
        }
        Subcommand::Distribution => {
            let summary = run_distribution_study(&cfg)?;
            let mut files = vec![write_summary(out, &summary)?];
            files.push(write_samples(out, &summary)?);
            Ok(Outcome {
                files,
                band_failures: summary.band_failures(&cfg.bands),
            })
        }
        Subcommand::FieldCheck => run_field_check(&cfg, out),
        Subcommand::Green => run_green(&cfg, out),
    }
}

pub fn summary_to_json(summary: &McSummary) -> String {
    serde_json::to_string_pretty(summary).expect("summaries contain only finite data") + "\n"
}

pub fn summary_from_json(text: &str) -> Result<McSummary> {
    serde_json::from_str(text).map_err(|e| Error::Config(format!("summary: {e}")))
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Config(format!("cannot write {}: {e}", path.display()))
}

fn write_text(path: PathBuf, text: &str) -> Result<PathBuf> {
    fs::write(&path, text).map_err(|e| io_err(&path, e))?;
    Ok(path)
}

fn write_csv(path: PathBuf, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<PathBuf> {
    let mut w = csv::Writer::from_path(&path).map_err(|e| io_err(&path, e))?;
    w.write_record(header).map_err(|e| io_err(&path, e))?;
    for r in rows {
        w.write_record(&r).map_err(|e| io_err(&path, e))?;
    }
    w.flush().map_err(|e| io_err(&path, e))?;
    Ok(path)
}

fn write_summary(out: &Path, summary: &McSummary) -> Result<PathBuf> {
    write_text(out.join("summary.json"), &summary_to_json(summary))
}

pub const PER_EPSILON_COLUMNS: [&str; 5] = ["epsilon", "mean_sq_error", "std_error", "mean_linf", "n_realizations"];
pub const SAMPLES_COLUMNS: [&str; 3] = ["realization_index", "seed", "x_value"];

fn write_per_epsilon(out: &Path, summary: &McSummary) -> Result<PathBuf> {
    let rows = summary.per_epsilon.iter().map(|p| {
        vec![
            p.epsilon.to_string(),
            p.mean_sq_error.to_string(),
            p.std_error.to_string(),
            p.mean_linf.to_string(),
            p.n_realizations.to_string(),
        ]
    });
    write_csv(out.join("per_epsilon.csv"), &PER_EPSILON_COLUMNS, rows)
}

fn write_samples(out: &Path, summary: &McSummary) -> Result<PathBuf> {
    let d = summary
        .distribution
        .as_ref()
        .expect("distribution study fills the distribution block");
    let rows = d
        .samples
        .iter()
        .zip(&d.seeds)
        .enumerate()
        .map(|(k, (x, s))| vec![k.to_string(), s.to_string(), x.to_string()]);
    write_csv(out.join("samples.csv"), &SAMPLES_COLUMNS, rows)
}

fn node_columns(grid: &Grid) -> Vec<&'static str> {
    ["x", "y", "z"][..grid.dim()].to_vec()
}

fn nodal_rows<'a>(grid: &'a Grid, fields: &'a [&'a GridFunction]) -> impl Iterator<Item = Vec<String>> + 'a {
    (0..grid.interior_count()).map(move |i| {
        let x = grid.coords(i);
        let mut row = vec![i.to_string()];
        row.extend(x[..grid.dim()].iter().map(f64::to_string));
        row.extend(fields.iter().map(|f| f.values()[i].to_string()));
        row
    })
}

/// Norms and solver data of one realization, written by `solve`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub epsilon: f64,
    pub seed: u64,
    pub heterogeneous: SolveReport,
    pub homogenized: SolveReport,
    pub error_l2: f64,
    pub error_linf: f64,
    /// `‖t_i‖_{L²}`, `i = 1..5`.
    pub term_norms: [f64; 5],
    pub identity_defect: f64,
}

fn run_solve(cfg: &StudyConfig, out: &Path) -> Result<Outcome> {
    let grid = cfg.grid()?;
    let model = cfg.potential()?;
    let opts = cfg.solver_options();
    let g = cfg.g.build(&grid);
    let eps = *cfg.epsilons.last().expect("validated ladder is nonempty");
    let seed = realization_seed(cfg.base_seed, 0);
    let sample = sample_potential(&model, &grid, eps, seed)?;
    let (u, hom) = solve_homogenized_with(&grid, model.q_mean, &cfg.nonlinearity, &g, &opts)?;
    let (ue, het) = solve_semilinear_with(&grid, &sample.q_eps, &cfg.nonlinearity, &g, &opts)
        .map_err(|e| Error::Realization {
            seed,
            source: Box::new(e),
        })?;
    let terms = expansion_terms(&grid, model.q_mean, &sample.nu_eps(), &cfg.nonlinearity, &ue, &u)?;
    let xi = ue.sub(&u);
    let summary = SolveSummary {
        epsilon: eps,
        seed,
        heterogeneous: het,
        homogenized: hom,
        error_l2: xi.l2_norm(),
        error_linf: xi.linf_norm(),
        term_norms: [&terms.t1, &terms.t2, &terms.t3, &terms.t4, &terms.t5].map(|t| t.l2_norm()),
        identity_defect: terms.identity_defect(),
    };
    let json = serde_json::to_string_pretty(&summary).expect("finite data") + "\n";
    let mut header = vec!["index"];
    header.extend(node_columns(&grid));
    header.extend(["q_eps", "u_eps", "u", "t1"]);
    let fields = [&sample.q_eps, &ue, &u, &terms.t1];
    let files = vec![
        write_text(out.join("solve.json"), &json)?,
        write_csv(out.join("solution.csv"), &header, nodal_rows(&grid, &fields))?,
    ];
    Ok(Outcome {
        files,
        band_failures: Vec::new(),
    })
}

fn run_green(cfg: &StudyConfig, out: &Path) -> Result<Outcome> {
    let grid = cfg.grid()?;
    let model = cfg.potential()?;
    let g = cfg.g.build(&grid);
    let (u, _) = solve_homogenized_with(&grid, model.q_mean, &cfg.nonlinearity, &g, &cfg.solver_options())?;
    let node = cfg
        .green
        .node
        .clone()
        .unwrap_or_else(|| vec![grid.n() / 2; grid.dim()]);
    let col = LinearizedOperator::around(&grid, model.q_mean, &cfg.nonlinearity, &u).green_column(&node)?;
    let mut header = vec!["index"];
    header.extend(node_columns(&grid));
    header.push("green");
    let fields = [&col];
    let file = write_csv(out.join("green.csv"), &header, nodal_rows(&grid, &fields))?;
    Ok(Outcome {
        files: vec![file],
        band_failures: Vec::new(),
    })
}

pub const FIELD_CHECK_COLUMNS: [&str; 7] =
    ["statistic", "label", "epsilon", "value", "std_error", "expected", "within_3se"];

/// Correlation lags and fourth-moment quadruples checked by `field-check`
/// at the largest `ε` of the ladder.
fn run_field_check(cfg: &StudyConfig, out: &Path) -> Result<Outcome> {
    let grid = cfg.grid()?;
    let model = cfg.potential()?;
    let eps = cfg.epsilons[0];
    let dim = grid.dim();
    let cell = (eps / grid.h()).round() as isize;
    let lags = cfg.field_check.lags.clone().unwrap_or_else(|| {
        let axis = |k: isize| {
            let mut l = vec![0isize; dim];
            l[0] = k;
            l
        };
        vec![axis(0), axis(1), axis(cell)]
    });
    let n = cfg.field_check.n_samples;
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut record = |stat: &str, label: String, value: f64, se: f64, expected: f64| {
        let ok = (value - expected).abs() <= 3.0 * se + 1e-12;
        if !ok {
            failures.push(format!("{stat} {label}: {value:.5} vs {expected:.5} (SE {se:.2e})"));
        }
        rows.push(vec![
            stat.to_string(),
            label,
            eps.to_string(),
            value.to_string(),
            se.to_string(),
            expected.to_string(),
            ok.to_string(),
        ]);
    };

    let corr = empirical_correlation(&model, &grid, eps, &lags, n, cfg.base_seed)?;
    for c in &corr {
        let x: Vec<f64> = c.lag.iter().map(|&l| l as f64 * grid.h() / eps).collect();
        let label = c.lag.iter().map(isize::to_string).collect::<Vec<_>>().join(" ");
        record("correlation", label, c.value, c.std_error, model.correlation(&x));
    }

    if !model.is_long_range() {
        let mid = grid.n() / 2;
        let far = (2 * cell as usize).min(mid - 1);
        let at = |offsets: [usize; 2]| {
            let mut node = vec![mid; dim];
            node[0] = mid + offsets[0] - far;
            if dim > 1 {
                node[1] = mid + offsets[1] - far;
            }
            grid.index_of(&node).expect("quadruple nodes are interior")
        };
        let a = at([0, 0]);
        let b = at([2 * far, 0]);
        let c = at([0, 2 * far]);
        let d = at([2 * far, 2 * far]);
        let quads = [("distinct", [a, b, c, d]), ("equal", [a, a, a, a]), ("paired", [a, a, d, d])];
        for (label, q) in quads {
            let est = empirical_fourth_moment(&model, &grid, eps, q, n, cfg.base_seed)?;
            record("fourth_moment", label.to_string(), est.value, est.std_error, 0.0);
        }
    }
    let file = write_csv(out.join("field_check.csv"), &FIELD_CHECK_COLUMNS, rows)?;
    Ok(Outcome {
        files: vec![file],
        band_failures: failures,
    })
}
