use std::fs;
use std::path::Path;

use metaudit_core::audit::{
    diagnose, Estimate, MIN_BILINEARITY_POINTS, MIN_HOCKEY_STICK_POINTS, MIN_UNIFORMITY_POINTS,
};
use metaudit_core::sim::{meta_analysis_plot, run_simulation, to_effect_records, SelectionRule, SimConfig};
use serde_json::{json, Value};

use super::audit::{hockey_json, test_json};
use super::{opt_float, CommandOutput};
use crate::cli::{Format, SimulateArgs};
use crate::input::EFFECTS_HEADER;
use crate::markdown;
use crate::output::{csv_string, ensure_dir, fmt_float, to_json_string, write_file, SCHEMA};
use crate::CliError;

pub const DEFAULT_LOG_SE: f64 = 0.1;
pub const DEFAULT_ID_PREFIX: &str = "sim";

/// A fully resolved simulation run: model settings plus output options.
#[derive(Debug, Clone, PartialEq)]
pub struct SimSettings {
    pub config: SimConfig,
    pub log_se: f64,
    pub id_prefix: String,
}

impl Default for SimSettings {
    fn default() -> Self {
        SimSettings {
            config: SimConfig {
                tests_per_study: 1,
                ..SimConfig::default()
            },
            log_se: DEFAULT_LOG_SE,
            id_prefix: DEFAULT_ID_PREFIX.to_owned(),
        }
    }
}

fn config_error(field: &str, message: impl Into<String>) -> CliError {
    CliError::Config {
        field: field.to_owned(),
        message: message.into(),
    }
}

fn parse_value<T: std::str::FromStr>(field: &str, raw: &str) -> Result<T, CliError> {
    raw.trim()
        .parse()
        .map_err(|_| config_error(field, format!("cannot parse `{}`", raw.trim())))
}

fn parse_selection(raw: &str) -> Result<SelectionRule, CliError> {
    SelectionRule::from_label(raw).ok_or_else(|| {
        config_error(
            "selection",
            format!("unknown rule `{raw}`; expected report-min-p, report-first-significant or report-random"),
        )
    })
}

fn apply(settings: &mut SimSettings, key: &str, raw: &str) -> Result<(), CliError> {
    let c = &mut settings.config;
    match key {
        "n_studies" => c.n_studies = parse_value(key, raw)?,
        "k" | "tests_per_study" => c.tests_per_study = parse_value(key, raw)?,
        "correlation" => c.correlation = parse_value(key, raw)?,
        "effect" | "true_effect" => c.true_effect = parse_value(key, raw)?,
        "selection" | "selection_rule" => c.selection_rule = parse_selection(raw)?,
        "alpha" => c.alpha = parse_value(key, raw)?,
        "censor" | "censor_at_alpha" => c.censor_at_alpha = parse_value(key, raw)?,
        "replicates" => c.replicates = parse_value(key, raw)?,
        "seed" => c.seed = parse_value(key, raw)?,
        "log_se" => settings.log_se = parse_value(key, raw)?,
        "id_prefix" => settings.id_prefix = raw.trim().to_owned(),
        _ => return Err(config_error(key, "unknown setting")),
    }
    Ok(())
}

fn apply_file(settings: &mut SimSettings, path: &Path) -> Result<(), CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Parse {
                path: path.to_path_buf(),
                line: Some(i as u64 + 1),
                column: None,
                message: "expected `key = value`".to_owned(),
            });
        };
        apply(settings, key.trim().replace('-', "_").as_str(), value)?;
    }
    Ok(())
}

/// Merges defaults, then the config file, then command-line flags.
pub fn resolve_config(args: &SimulateArgs) -> Result<SimSettings, CliError> {
    let mut s = SimSettings::default();
    if let Some(path) = &args.config {
        apply_file(&mut s, path)?;
    }
    let c = &mut s.config;
    if let Some(v) = args.n_studies {
        c.n_studies = v;
    }
    if let Some(v) = args.k {
        c.tests_per_study = v;
    }
    if let Some(v) = args.correlation {
        c.correlation = v;
    }
    if let Some(v) = args.effect {
        c.true_effect = v;
    }
    if let Some(v) = &args.selection {
        c.selection_rule = parse_selection(v)?;
    }
    if let Some(v) = args.alpha {
        c.alpha = v;
    }
    if let Some(v) = args.censor {
        c.censor_at_alpha = v;
    }
    if let Some(v) = args.replicates {
        c.replicates = v;
    }
    if let Some(v) = args.seed {
        c.seed = v;
    }
    if let Some(v) = args.log_se {
        s.log_se = v;
    }
    if let Some(v) = &args.id_prefix {
        s.id_prefix = v.clone();
    }
    s.config.validate()?;
    if !(s.log_se.is_finite() && s.log_se > 0.0) {
        return Err(config_error("log_se", "must be positive and finite"));
    }
    Ok(s)
}

fn config_json(s: &SimSettings) -> Value {
    let c = &s.config;
    json!({
        "n_studies": c.n_studies,
        "tests_per_study": c.tests_per_study,
        "correlation": c.correlation,
        "true_effect": c.true_effect,
        "selection_rule": c.selection_rule.label(),
        "alpha": c.alpha,
        "censor_at_alpha": c.censor_at_alpha,
        "replicates": c.replicates,
        "seed": c.seed,
        "log_se": s.log_se,
        "id_prefix": s.id_prefix,
    })
}

/// Writes `simulation.csv`, `summary.json` and `effects.csv` into the output
/// directory.
///
/// `simulation.csv` lists every reported study. `effects.csv` holds the first
/// `n_studies` of them as ratio estimates, ready for `audit`.
pub fn cmd_simulate(args: &SimulateArgs) -> Result<CommandOutput, CliError> {
    let settings = resolve_config(args)?;
    let config = &settings.config;
    let result = run_simulation(config)?;

    let meta = meta_analysis_plot(&result, config);
    let meta_json = match &meta {
        Some(plot) => {
            let d = diagnose(plot)?;
            json!({
                "n": plot.n,
                "pvalues": plot.pvalues(),
                "uniformity": test_json(&d.uniformity, config.alpha, MIN_UNIFORMITY_POINTS),
                "bilinearity": test_json(&d.bilinearity, config.alpha, MIN_BILINEARITY_POINTS),
                "hockey_stick": hockey_json(&d.hockey_stick, MIN_HOCKEY_STICK_POINTS),
            })
        }
        None => Value::Null,
    };
    let mut notes = vec![
        "publication_rate is the fraction of all replicates whose reported p is below alpha.".to_owned(),
        "bias is the mean reported z minus the true effect; absolute_bias uses |z| and |effect|.".to_owned(),
        "test_index in simulation.csv is 0-based.".to_owned(),
    ];
    if config.censor_at_alpha {
        notes.push("Only studies with reported p below alpha were kept.".to_owned());
    }
    let doc = json!({
        "schema": SCHEMA,
        "config": config_json(&settings),
        "publication_rate": result.publication_rate,
        "n_published": result.published.len(),
        "bias": result.bias,
        "absolute_bias": result.absolute_bias,
        "mean_abs_estimate": result.mean_abs_estimate,
        "meta_analysis": meta_json,
        "notes": notes,
    });
    let json_text = to_json_string(&doc);

    let sim_rows: Vec<Vec<String>> = result
        .published
        .iter()
        .map(|r| {
            vec![
                r.replicate.to_string(),
                format!("{}{:07}", settings.id_prefix, r.replicate),
                r.selected.test_index.to_string(),
                fmt_float(r.selected.p),
                fmt_float(r.selected.z),
            ]
        })
        .collect();
    let sim_csv = csv_string(&["replicate", "study_id", "test_index", "p", "z"], &sim_rows);

    let effect_rows: Vec<Vec<String>> = to_effect_records(&result, settings.log_se, &settings.id_prefix)
        .into_iter()
        .take(config.n_studies)
        .filter_map(|r| match r.estimate {
            Estimate::Interval {
                ratio,
                ci_low,
                ci_high,
                confidence_level,
            } => Some(vec![
                r.study_id,
                r.label,
                fmt_float(ratio),
                fmt_float(ci_low),
                fmt_float(ci_high),
                fmt_float(confidence_level),
                "0".to_owned(),
            ]),
            Estimate::NotSignificant => None,
        })
        .collect();
    let effects_csv = csv_string(&EFFECTS_HEADER, &effect_rows);

    ensure_dir(&args.output)?;
    let sim_path = args.output.join("simulation.csv");
    let json_path = args.output.join("summary.json");
    let effects_path = args.output.join("effects.csv");
    write_file(&sim_path, &sim_csv)?;
    write_file(&json_path, &json_text)?;
    write_file(&effects_path, &effects_csv)?;

    let stdout = match args.format {
        Format::Json => json_text,
        Format::Csv => sim_csv,
        Format::Md => markdown::simulate_report(
            &config_json(&settings),
            result.publication_rate,
            result.published.len(),
            &[
                ("bias", opt_float(result.bias)),
                ("absolute_bias", opt_float(result.absolute_bias)),
                ("mean_abs_estimate", opt_float(result.mean_abs_estimate)),
            ],
            &notes,
        ),
    };
    Ok(CommandOutput {
        stdout,
        files: vec![sim_path, json_path, effects_path],
    })
}
