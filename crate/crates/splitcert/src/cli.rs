//! Batch front-end: reproducible experiment commands emitting CSV or JSON
//! tables. Outputs are deterministic for a fixed configuration and seed:
//! grid rows are ordered by index regardless of worker scheduling and
//! numbers carry 17 significant digits.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fritz;
use crate::inflation::certify::{
    extract_witness, rgb4_feasibility, visibility_threshold, Rgb4Options, VisibilityCase,
};
use crate::inflation::simplex::SolverOptions;
use crate::network::{pearl_do_quantum, quantum_behavior};
use crate::scenarios::{instrumental_default, uc_default, FritzParams, Rgb4Params};
use crate::splitting::{interventional_behavior, recover_do, SplitSequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    /// Feasibility scan over the measurement parameter of the four-outcome
    /// triangle family, with and without interventional data.
    Rgb4Scan,
    /// Critical-visibility bisection for the four noise cases.
    Rgb4Noise,
    /// The binary inequality over a bias grid, pipeline vs closed form.
    FritzScan,
    /// Do-conditional recovery demo on the instrumental and unrelated-
    /// confounders scenarios.
    DoDemo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PresetKind {
    /// Single-extra-copy inflation of the split triangle (default).
    Rgb4Fig5,
    /// Same wiring but with one shared re-preparation copy.
    Rgb4Fig5Shared,
    /// Trivial inflation (the joint DAG itself).
    Trivial,
    /// Alias of trivial on the two-split binary triangle.
    Carrot,
}

/// Flag set; every key can also come from a JSON config file, with flags
/// taking precedence.
#[derive(Debug, Parser)]
#[command(
    name = "splitcert",
    about = "Certify nonclassicality in quantum causal networks from observational and latent-splitting data"
)]
pub struct Cli {
    #[arg(long, value_enum)]
    pub command: Option<CommandKind>,
    /// JSON config file; flags override its keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Measurement-parameter grid `start:stop:step`.
    #[arg(long)]
    pub u_grid: Option<String>,
    /// Bias grid `start:stop:step`.
    #[arg(long)]
    pub eps_grid: Option<String>,
    /// Measurement parameter for single-point commands.
    #[arg(long)]
    pub u: Option<f64>,
    /// Source visibility where a single value applies.
    #[arg(long)]
    pub visibility: Option<f64>,
    /// LP feasibility tolerance (certificates verify at 10x this).
    #[arg(long)]
    pub tol_lp: Option<f64>,
    /// Bisection step tolerance for threshold searches.
    #[arg(long)]
    pub tol_bisect: Option<f64>,
    /// Worker threads for grid dispatch.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// Classical sanity-sampling count for fritz-scan.
    #[arg(long)]
    pub sanity: Option<u64>,
    #[arg(long, value_enum)]
    pub preset: Option<PresetKind>,
    /// Pin only the observational table in the LP.
    #[arg(long, default_value_t = false)]
    pub obs_only: bool,
    /// Disable copy-exchange symmetry rows.
    #[arg(long, default_value_t = false)]
    pub no_symmetry: bool,
}

/// File form of the same options.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ConfigFile {
    pub command: Option<CommandKind>,
    pub u_grid: Option<String>,
    pub eps_grid: Option<String>,
    pub u: Option<f64>,
    pub visibility: Option<f64>,
    pub tol_lp: Option<f64>,
    pub tol_bisect: Option<f64>,
    pub jobs: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<String>,
    pub format: Option<OutputFormat>,
    pub sanity: Option<u64>,
    pub preset: Option<PresetKind>,
    pub obs_only: Option<bool>,
    pub no_symmetry: Option<bool>,
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: CommandKind,
    pub u_grid: Vec<f64>,
    pub eps_grid: Vec<f64>,
    pub u: f64,
    pub visibility: f64,
    pub tol_lp: f64,
    pub tol_bisect: f64,
    pub jobs: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub sanity: Option<u64>,
    pub preset: PresetKind,
    pub obs_only: bool,
    pub symmetry: bool,
}

/// Parse a `start:stop:step` grid, inclusive of both ends up to rounding.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Config(format!("grid `{text}` is not start:stop:step")));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| {
            p.parse::<f64>()
                .map_err(|e| Error::Config(format!("bad grid number `{p}`: {e}")))
        })
        .collect::<Result<_>>()?;
    let (start, stop, step) = (nums[0], nums[1], nums[2]);
    if step <= 0.0 || stop < start {
        return Err(Error::Config(format!("grid `{text}` must have step > 0 and stop >= start")));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize;
    let grid: Vec<f64> = (0..=count).map(|i| start + i as f64 * step).collect();
    if grid.is_empty() {
        return Err(Error::Config("empty grid".into()));
    }
    Ok(grid)
}

impl Cli {
    /// Merge flags over the config file over defaults.
    pub fn resolve(&self) -> Result<RunConfig> {
        let file: ConfigFile = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| Error::Config(format!("bad config file: {e}")))?
            }
            None => ConfigFile::default(),
        };
        let command = self
            .command
            .or(file.command)
            .ok_or_else(|| Error::Config("no command given (flag --command or config)".into()))?;
        let u_grid = match self.u_grid.as_deref().or(file.u_grid.as_deref()) {
            Some(g) => parse_grid(g)?,
            None => parse_grid("0.05:0.95:0.05")?,
        };
        let eps_grid = match self.eps_grid.as_deref().or(file.eps_grid.as_deref()) {
            Some(g) => parse_grid(g)?,
            None => parse_grid("0.0:0.5:0.01")?,
        };
        let tol_lp = self.tol_lp.or(file.tol_lp).unwrap_or(1e-9);
        let tol_bisect = self.tol_bisect.or(file.tol_bisect).unwrap_or(1e-4);
        if tol_lp <= 0.0 || tol_bisect <= 0.0 {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        Ok(RunConfig {
            command,
            u_grid,
            eps_grid,
            u: self.u.or(file.u).unwrap_or(0.85),
            visibility: self.visibility.or(file.visibility).unwrap_or(1.0),
            tol_lp,
            tol_bisect,
            jobs: self.jobs.or(file.jobs).unwrap_or(1).max(1),
            seed: self.seed.or(file.seed).unwrap_or(0),
            out: self.out.clone().or(file.out.map(PathBuf::from)),
            format: self.format.or(file.format).unwrap_or(OutputFormat::Csv),
            sanity: self.sanity.or(file.sanity),
            preset: self.preset.or(file.preset).unwrap_or(PresetKind::Rgb4Fig5),
            obs_only: self.obs_only || file.obs_only.unwrap_or(false),
            symmetry: !(self.no_symmetry || file.no_symmetry.unwrap_or(false)),
        })
    }
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn solver_options(cfg: &RunConfig) -> SolverOptions {
    SolverOptions {
        feas_tol: cfg.tol_lp,
        cert_tol: cfg.tol_lp * 10.0,
        ..SolverOptions::default()
    }
}

fn rgb4_options(cfg: &RunConfig, obs_only: bool) -> Rgb4Options {
    Rgb4Options {
        obs_only,
        symmetry: cfg.symmetry,
        shared_repreparation: matches!(cfg.preset, PresetKind::Rgb4Fig5Shared),
        solver: solver_options(cfg),
    }
}

#[derive(Serialize)]
struct ScanRow {
    u: f64,
    status_obs_only: String,
    status_obs_plus_int: String,
    witness_value: Option<f64>,
}

fn cmd_rgb4_scan(cfg: &RunConfig) -> Result<(String, i32)> {
    let rows: Vec<ScanRow> = cfg
        .u_grid
        .par_iter()
        .map(|&u| {
            let params = Rgb4Params::new(u).with_visibilities(
                cfg.visibility,
                cfg.visibility,
                cfg.visibility,
            );
            let status = |r: Result<bool>| match r {
                Ok(true) => "feasible".to_string(),
                Ok(false) => "infeasible".to_string(),
                Err(Error::NumericallyAmbiguous) => "ambiguous".to_string(),
                Err(e) => format!("error({e})"),
            };
            let obs_status = status(
                rgb4_feasibility(&params, &rgb4_options(cfg, true)).map(|(_, v)| v.is_feasible()),
            );
            let (int_status, witness_value) = if cfg.obs_only {
                (obs_status.clone(), None)
            } else {
                let attempt = || -> Result<(String, Option<f64>)> {
                    let (instance, verdict) = rgb4_feasibility(&params, &rgb4_options(cfg, false))?;
                    let value = verdict
                        .certificate()
                        .map(|_| {
                            let witness =
                                extract_witness(&instance.lp, &verdict)?.normalized(2.0);
                            let mut knowns = BTreeMap::new();
                            knowns.insert("obs".to_string(), &instance.obs);
                            knowns.insert("int".to_string(), &instance.int);
                            witness.evaluate(&knowns)
                        })
                        .transpose()?;
                    Ok((
                        if verdict.is_feasible() {
                            "feasible".to_string()
                        } else {
                            "infeasible".to_string()
                        },
                        value,
                    ))
                };
                match attempt() {
                    Ok(pair) => pair,
                    Err(Error::NumericallyAmbiguous) => ("ambiguous".to_string(), None),
                    Err(e) => (format!("error({e})"), None),
                }
            };
            ScanRow {
                u,
                status_obs_only: obs_status,
                status_obs_plus_int: int_status,
                witness_value,
            }
        })
        .collect();

    let ambiguous = rows
        .iter()
        .any(|r| r.status_obs_only == "ambiguous" || r.status_obs_plus_int == "ambiguous");
    let out = match cfg.format {
        OutputFormat::Json => serde_json::to_string_pretty(&rows).expect("rows serialize"),
        OutputFormat::Csv => {
            let mut s = String::from("u,status_obs_only,status_obs_plus_int,witness_value\n");
            for r in rows {
                s.push_str(&format!(
                    "{},{},{},{}\n",
                    fmt(r.u),
                    r.status_obs_only,
                    r.status_obs_plus_int,
                    r.witness_value.map(fmt).unwrap_or_default()
                ));
            }
            s
        }
    };
    Ok((out, if ambiguous { 2 } else { 0 }))
}

#[derive(Serialize)]
struct NoiseRow {
    case: String,
    probe: String,
    v: Option<f64>,
    status: String,
}

fn cmd_rgb4_noise(cfg: &RunConfig) -> Result<(String, i32)> {
    let template = Rgb4Params::new(cfg.u);
    let cases = [
        VisibilityCase::Symmetric,
        VisibilityCase::FreeAlpha,
        VisibilityCase::FreeGamma,
        VisibilityCase::FreeBeta,
    ];
    let results: Vec<(VisibilityCase, Result<crate::inflation::ThresholdResult>)> = cases
        .par_iter()
        .map(|&case| {
            (
                case,
                visibility_threshold(
                    &template,
                    case,
                    &rgb4_options(cfg, cfg.obs_only),
                    0.9,
                    1.0,
                    cfg.tol_bisect,
                ),
            )
        })
        .collect();

    let mut rows = Vec::new();
    let mut ambiguous = false;
    for (case, result) in results {
        match result {
            Ok(r) => {
                for (i, (v, infeasible)) in r.probes.iter().enumerate() {
                    rows.push(NoiseRow {
                        case: case.label().into(),
                        probe: i.to_string(),
                        v: Some(*v),
                        status: if *infeasible { "infeasible" } else { "feasible" }.into(),
                    });
                }
                rows.push(NoiseRow {
                    case: case.label().into(),
                    probe: "critical".into(),
                    v: Some(r.critical),
                    status: "critical".into(),
                });
            }
            Err(Error::NoTransition(why)) => rows.push(NoiseRow {
                case: case.label().into(),
                probe: "result".into(),
                v: None,
                status: format!("no-transition({why})"),
            }),
            Err(Error::NumericallyAmbiguous) => {
                ambiguous = true;
                rows.push(NoiseRow {
                    case: case.label().into(),
                    probe: "result".into(),
                    v: None,
                    status: "ambiguous".into(),
                });
            }
            Err(e) => return Err(e),
        }
    }

    let out = match cfg.format {
        OutputFormat::Json => serde_json::to_string_pretty(&rows).expect("rows serialize"),
        OutputFormat::Csv => {
            let mut s = String::from("case,probe,v,status\n");
            for r in rows {
                s.push_str(&format!(
                    "{},{},{},{}\n",
                    r.case,
                    r.probe,
                    r.v.map(fmt).unwrap_or_default(),
                    r.status
                ));
            }
            s
        }
    };
    Ok((out, if ambiguous { 2 } else { 0 }))
}

#[derive(Serialize)]
struct FritzRow {
    epsilon: f64,
    s_tables: f64,
    s_closed_form: f64,
    violated: bool,
    v_min: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    sanity_min_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sanity_counterexamples: Option<u64>,
}

fn cmd_fritz_scan(cfg: &RunConfig) -> Result<(String, i32)> {
    let rows: Vec<FritzRow> = cfg
        .eps_grid
        .par_iter()
        .map(|&eps| -> Result<FritzRow> {
            let params = FritzParams::new(eps).with_visibility(cfg.visibility);
            let s_tables = fritz::pipeline_s(&params)?;
            let s_closed_form = fritz::closed_form_s(eps, cfg.visibility)?;
            let sanity = match cfg.sanity {
                Some(n) if n > 0 => Some(fritz::classical_sanity(eps, n, cfg.seed)?),
                _ => None,
            };
            Ok(FritzRow {
                epsilon: eps,
                s_tables,
                s_closed_form,
                violated: s_tables < 0.0,
                v_min: fritz::minimum_visibility(eps)?,
                sanity_min_s: sanity.as_ref().map(|r| r.min_s),
                sanity_counterexamples: sanity.as_ref().map(|r| r.counterexamples),
            })
        })
        .collect::<Result<_>>()?;

    let with_sanity = rows.iter().any(|r| r.sanity_min_s.is_some());
    let out = match cfg.format {
        OutputFormat::Json => serde_json::to_string_pretty(&rows).expect("rows serialize"),
        OutputFormat::Csv => {
            let mut s = String::from("epsilon,s_tables,s_closed_form,violated,v_min");
            if with_sanity {
                s.push_str(",sanity_min_s,sanity_counterexamples");
            }
            s.push('\n');
            for r in rows {
                s.push_str(&format!(
                    "{},{},{},{},{}",
                    fmt(r.epsilon),
                    fmt(r.s_tables),
                    fmt(r.s_closed_form),
                    r.violated,
                    fmt(r.v_min)
                ));
                if with_sanity {
                    s.push_str(&format!(
                        ",{},{}",
                        r.sanity_min_s.map(fmt).unwrap_or_default(),
                        r.sanity_counterexamples
                            .map(|c| c.to_string())
                            .unwrap_or_default()
                    ));
                }
                s.push('\n');
            }
            s
        }
    };
    Ok((out, 0))
}

#[derive(Serialize)]
struct DemoRow {
    scenario: String,
    table: String,
    assignment: String,
    p: f64,
}

fn cmd_do_demo(_cfg: &RunConfig) -> Result<(String, i32)> {
    let mut rows: Vec<DemoRow> = Vec::new();
    let mut residuals: Vec<(String, f64)> = Vec::new();

    let mut render = |scenario: &str,
                      strategy: &crate::network::QuantumStrategy,
                      splits: &SplitSequence,
                      target: &str|
     -> Result<()> {
        let obs = quantum_behavior(strategy)?;
        let int = interventional_behavior(strategy, splits)?;
        let recovered = recover_do(strategy, target)?;
        let direct = pearl_do_quantum(strategy, target)?;
        let residual = recovered.max_abs_diff(&direct);

        let mut push = |table: &str, b: &crate::behavior::Behavior| {
            for (outs, conds, p) in b.iter() {
                let mut parts: Vec<String> = b
                    .given()
                    .iter()
                    .zip(&conds)
                    .map(|((n, _), v)| format!("{}={v}", n.to_lowercase()))
                    .collect();
                parts.extend(
                    b.parties()
                        .iter()
                        .zip(&outs)
                        .map(|((n, _), v)| format!("{}={v}", n.to_lowercase())),
                );
                rows.push(DemoRow {
                    scenario: scenario.into(),
                    table: table.into(),
                    assignment: parts.join(";"),
                    p,
                });
            }
        };
        push("obs", &obs);
        push("int", &int);
        push(&format!("do({})", target.to_lowercase()), &recovered);
        residuals.push((scenario.into(), residual));
        Ok(())
    };

    render(
        "instrumental",
        &instrumental_default(),
        &SplitSequence::from_pairs(&[("ρ", "A")])?,
        "A",
    )?;
    render(
        "uc",
        &uc_default(),
        &SplitSequence::from_pairs(&[("γ", "A")])?,
        "B",
    )?;
    {
        // Triangle: the do-conditional is just the observational marginal.
        let strategy = crate::scenarios::rgb4_strategy(&Rgb4Params::new(0.85))?;
        let recovered = recover_do(&strategy, "A")?;
        let direct = pearl_do_quantum(&strategy, "A")?;
        residuals.push(("triangle".into(), recovered.max_abs_diff(&direct)));
    }

    for (scenario, r) in &residuals {
        rows.push(DemoRow {
            scenario: scenario.clone(),
            table: "residual".into(),
            assignment: "max|recovered - direct|".into(),
            p: *r,
        });
    }

    let out = match _cfg.format {
        OutputFormat::Json => serde_json::to_string_pretty(&rows).expect("rows serialize"),
        OutputFormat::Csv => {
            let mut s = String::from("scenario,table,assignment,p\n");
            for r in rows {
                s.push_str(&format!(
                    "{},{},{},{}\n",
                    r.scenario,
                    r.table,
                    r.assignment,
                    fmt(r.p)
                ));
            }
            s
        }
    };
    Ok((out, 0))
}

/// Run a resolved configuration; returns the process exit code.
pub fn run(cfg: &RunConfig) -> i32 {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build();
    let pool = match pool {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot build worker pool: {e}");
            return 1;
        }
    };
    let result = pool.install(|| match cfg.command {
        CommandKind::Rgb4Scan => cmd_rgb4_scan(cfg),
        CommandKind::Rgb4Noise => cmd_rgb4_noise(cfg),
        CommandKind::FritzScan => cmd_fritz_scan(cfg),
        CommandKind::DoDemo => cmd_do_demo(cfg),
    });
    match result {
        Ok((output, code)) => {
            let write_result = match &cfg.out {
                Some(path) => std::fs::write(path, output.as_bytes()).map_err(Error::from),
                None => std::io::stdout()
                    .write_all(output.as_bytes())
                    .map_err(Error::from),
            };
            if let Err(e) = write_result {
                eprintln!("error: {e}");
                return 1;
            }
            code
        }
        Err(e @ (Error::Config(_) | Error::Parse(_) | Error::Io(_))) => {
            eprintln!("error: {e}");
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let g = parse_grid("0.1:0.3:0.1").unwrap();
        assert_eq!(g.len(), 3);
        assert!((g[2] - 0.3).abs() < 1e-12);
        assert!(parse_grid("0.3:0.1:0.1").is_err());
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("nope").is_err());
    }

    #[test]
    fn flags_override_config_file() {
        let dir = std::env::temp_dir().join("splitcert-cli-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("cfg.json");
        std::fs::write(
            &path,
            r#"{"command":"fritz-scan","eps-grid":"0:0.1:0.05","seed":9}"#,
        )
        .unwrap();
        let cli = Cli::parse_from([
            "splitcert",
            "--config",
            path.to_str().unwrap(),
            "--seed",
            "4",
        ]);
        let cfg = cli.resolve().unwrap();
        assert_eq!(cfg.command, CommandKind::FritzScan);
        assert_eq!(cfg.seed, 4);
        assert_eq!(cfg.eps_grid.len(), 3);
    }

    #[test]
    fn missing_command_is_config_error() {
        let cli = Cli::parse_from(["splitcert"]);
        assert!(matches!(cli.resolve(), Err(Error::Config(_))));
    }
}
