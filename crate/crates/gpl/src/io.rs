//! Text formats for persisted artifacts.
//!
//! - posterior samples CSV: `#`-prefixed metadata lines (seed, model,
//!   sampler, chains, iterations, burnin, prior), an entity-label header
//!   row, then one row per retained draw with chains concatenated in order;
//! - summary CSV and an aligned plain-text table;
//! - theta files (`label value` per line) and prior files (`label a b`);
//! - flat `key=value` config files;
//! - EM fit reports and predictive output CSVs.
//!
//! Floats are written with Rust's shortest round-trip formatting, so
//! rereading a file reproduces the exact bit pattern and identical runs
//! produce byte-identical files. Comment lines start with `#`; parse
//! errors carry 1-based line numbers.

use std::collections::HashMap;
use std::path::Path;

use crate::data::{valid_label, Direction, EntityTable};
use crate::em::EmResult;
use crate::error::{GplError, Result};
use crate::gibbs::{GibbsConfig, PosteriorSamples, PriorSpec, SamplerKind};
use crate::posterior::PosteriorSummary;
use crate::predictive::{BucketCountDist, PredictiveWinProbs};

fn csv_safe(label: &str) -> Result<()> {
    if label.contains([',', '"', '\n', '\r']) {
        return Err(GplError::InvalidParameter(format!(
            "label '{label}' cannot be written to CSV (contains a comma, quote, or line break)"
        )));
    }
    Ok(())
}

fn join_or_single(values: &[f64]) -> String {
    let first = values[0];
    if values.iter().all(|&v| v == first) {
        format!("{first}")
    } else {
        values
            .iter()
            .map(|v| format!("{v}"))
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Serializes retained draws with their provenance metadata.
pub fn write_samples_csv(samples: &PosteriorSamples, direction: Direction) -> Result<String> {
    for label in samples.labels() {
        csv_safe(label)?;
    }
    let cfg = &samples.config;
    let mut out = String::new();
    out.push_str(&format!("# seed: {}\n", cfg.seed));
    out.push_str(&format!("# model: {}\n", direction.as_str()));
    out.push_str(&format!("# sampler: {}\n", cfg.sampler.as_str()));
    out.push_str(&format!("# chains: {}\n", cfg.chains));
    out.push_str(&format!("# iterations: {}\n", cfg.iterations));
    out.push_str(&format!("# burnin: {}\n", cfg.burnin));
    out.push_str(&format!(
        "# prior_a: {}\n",
        join_or_single(samples.prior.a())
    ));
    out.push_str(&format!(
        "# prior_b: {}\n",
        join_or_single(samples.prior.b())
    ));
    out.push_str(&samples.labels().join(","));
    out.push('\n');
    for draw in samples.draws_iter() {
        let row: Vec<String> = draw.iter().map(|v| format!("{v}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(out)
}

fn parse_metadata_value<T: std::str::FromStr>(
    map: &HashMap<String, (String, usize)>,
    key: &str,
) -> Result<Option<T>> {
    match map.get(key) {
        None => Ok(None),
        Some((raw, line)) => raw.parse::<T>().map(Some).map_err(|_| GplError::Parse {
            line: *line,
            msg: format!("invalid value '{raw}' for metadata key '{key}'"),
        }),
    }
}

fn parse_prior_side(
    map: &HashMap<String, (String, usize)>,
    key: &str,
    k: usize,
) -> Result<Vec<f64>> {
    match map.get(key) {
        None => Ok(vec![1.0; k]),
        Some((raw, line)) => {
            let parts: Vec<&str> = raw.split(',').map(str::trim).collect();
            let values: Vec<f64> = parts
                .iter()
                .map(|p| {
                    p.parse::<f64>().map_err(|_| GplError::Parse {
                        line: *line,
                        msg: format!("invalid number '{p}' in '{key}'"),
                    })
                })
                .collect::<Result<_>>()?;
            match values.len() {
                1 => Ok(vec![values[0]; k]),
                n if n == k => Ok(values),
                n => Err(GplError::Parse {
                    line: *line,
                    msg: format!("'{key}' lists {n} values for {k} entities"),
                }),
            }
        }
    }
}

/// Parses a samples CSV back into draws plus the model direction recorded
/// in its metadata (defaulting to the standard model).
pub fn read_samples_csv(text: &str) -> Result<(PosteriorSamples, Direction)> {
    let mut metadata: HashMap<String, (String, usize)> = HashMap::new();
    let mut labels: Option<Vec<String>> = None;
    let mut draws: Vec<f64> = Vec::new();
    let mut rows = 0usize;

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once(':') {
                metadata.insert(key.trim().to_string(), (value.trim().to_string(), line_no));
            }
            continue;
        }
        match &labels {
            None => {
                let header: Vec<String> = line.split(',').map(|s| s.trim().to_string()).collect();
                let mut seen = std::collections::HashSet::new();
                for label in &header {
                    if !valid_label(label) {
                        return Err(GplError::Parse {
                            line: line_no,
                            msg: format!("invalid entity label '{label}' in header"),
                        });
                    }
                    if !seen.insert(label.clone()) {
                        return Err(GplError::Parse {
                            line: line_no,
                            msg: format!("duplicate entity label '{label}' in header"),
                        });
                    }
                }
                labels = Some(header);
            }
            Some(header) => {
                let cells: Vec<&str> = line.split(',').map(str::trim).collect();
                if cells.len() != header.len() {
                    return Err(GplError::Parse {
                        line: line_no,
                        msg: format!(
                            "row has {} values but the header lists {} entities",
                            cells.len(),
                            header.len()
                        ),
                    });
                }
                for cell in cells {
                    let v: f64 = cell.parse().map_err(|_| GplError::Parse {
                        line: line_no,
                        msg: format!("invalid number '{cell}'"),
                    })?;
                    draws.push(v);
                }
                rows += 1;
            }
        }
    }

    let labels = labels.ok_or(GplError::Parse {
        line: 1,
        msg: "missing header row".into(),
    })?;
    let chains: usize =
        parse_metadata_value(&metadata, "chains")?.ok_or_else(|| GplError::Parse {
            line: 1,
            msg: "missing '# chains:' metadata".into(),
        })?;
    let iterations: usize =
        parse_metadata_value(&metadata, "iterations")?.ok_or_else(|| GplError::Parse {
            line: 1,
            msg: "missing '# iterations:' metadata".into(),
        })?;
    if chains == 0 || iterations == 0 {
        return Err(GplError::InvalidParameter(
            "chains and iterations must be >= 1".into(),
        ));
    }
    if rows != chains * iterations {
        return Err(GplError::InvalidParameter(format!(
            "samples CSV has {rows} draw rows but metadata promises {chains} chains x {iterations} iterations"
        )));
    }
    let seed: u64 = parse_metadata_value(&metadata, "seed")?.unwrap_or(1);
    let burnin: usize = parse_metadata_value(&metadata, "burnin")?.unwrap_or(0);
    let sampler = match metadata.get("sampler") {
        None => SamplerKind::General,
        Some((raw, line)) => SamplerKind::parse(raw).map_err(|_| GplError::Parse {
            line: *line,
            msg: format!("unknown sampler '{raw}'"),
        })?,
    };
    let direction = match metadata.get("model") {
        None => Direction::Standard,
        Some((raw, line)) => Direction::parse(raw).map_err(|_| GplError::Parse {
            line: *line,
            msg: format!("unknown model '{raw}'"),
        })?,
    };
    let prior = PriorSpec::per_entity(
        parse_prior_side(&metadata, "prior_a", labels.len())?,
        parse_prior_side(&metadata, "prior_b", labels.len())?,
    )?;
    let cfg = GibbsConfig {
        iterations,
        burnin,
        chains,
        seed,
        sampler,
    };
    Ok((
        PosteriorSamples::from_parts(labels, draws, cfg, prior)?,
        direction,
    ))
}

pub fn read_samples_csv_path(path: impl AsRef<Path>) -> Result<(PosteriorSamples, Direction)> {
    read_samples_csv(&std::fs::read_to_string(path)?)
}

fn opt_to_cell(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x}"),
        None => "NA".into(),
    }
}

/// Machine-readable summary: full-precision values, `NA` for undefined
/// diagnostics.
pub fn write_summary_csv(s: &PosteriorSummary) -> Result<String> {
    let mut out = String::from("entity,mean,ci_low,ci_high,ess,psrf\n");
    for k in 0..s.labels.len() {
        csv_safe(&s.labels[k])?;
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            s.labels[k],
            s.mean[k],
            s.ci_low[k],
            s.ci_high[k],
            opt_to_cell(s.ess[k]),
            opt_to_cell(s.psrf[k]),
        ));
    }
    Ok(out)
}

/// Human-readable summary: 6 decimals for rates, 1 for ESS, 2 for PSRF.
pub fn format_summary_table(s: &PosteriorSummary) -> String {
    let width = s
        .labels
        .iter()
        .map(|l| l.len())
        .max()
        .unwrap_or(6)
        .max("entity".len());
    let mut out = format!(
        "{:width$}  {:>8}  {:>8}  {:>8}  {:>10}  {:>5}\n",
        "entity", "mean", "ci_low", "ci_high", "ess", "psrf"
    );
    for k in 0..s.labels.len() {
        let ess = match s.ess[k] {
            Some(e) => format!("{e:.1}"),
            None => "NA".into(),
        };
        let psrf = match s.psrf[k] {
            Some(r) => format!("{r:.2}"),
            None => "NA".into(),
        };
        out.push_str(&format!(
            "{:width$}  {:>8.6}  {:>8.6}  {:>8.6}  {:>10}  {:>5}\n",
            s.labels[k], s.mean[k], s.ci_low[k], s.ci_high[k], ess, psrf
        ));
    }
    out
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(idx, raw)| {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            None
        } else {
            Some((idx + 1, line))
        }
    })
}

/// Parses `label value` lines (whitespace-separated, `#` comments).
pub fn parse_theta_pairs(text: &str) -> Result<Vec<(String, f64)>> {
    let mut out = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (line, content) in content_lines(text) {
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(GplError::Parse {
                line,
                msg: format!("expected 'label value', found {} tokens", tokens.len()),
            });
        }
        if !valid_label(tokens[0]) {
            return Err(GplError::Parse {
                line,
                msg: format!("invalid label '{}'", tokens[0]),
            });
        }
        if !seen.insert(tokens[0].to_string()) {
            return Err(GplError::Parse {
                line,
                msg: format!("duplicate label '{}'", tokens[0]),
            });
        }
        let value: f64 = tokens[1].parse().map_err(|_| GplError::Parse {
            line,
            msg: format!("invalid number '{}'", tokens[1]),
        })?;
        out.push((tokens[0].to_string(), value));
    }
    Ok(out)
}

/// Orders parsed theta values by the dataset's entity ids; every entity
/// must be covered and no extra labels are allowed.
pub fn align_theta(pairs: &[(String, f64)], entities: &EntityTable) -> Result<Vec<f64>> {
    let mut theta = vec![f64::NAN; entities.len()];
    for (label, value) in pairs {
        match entities.id(label) {
            Some(id) => theta[id] = *value,
            None => return Err(GplError::UnknownEntity(label.clone())),
        }
    }
    for (id, v) in theta.iter().enumerate() {
        if v.is_nan() {
            return Err(GplError::InvalidParameter(format!(
                "no theta given for entity '{}'",
                entities.label(id)
            )));
        }
    }
    Ok(theta)
}

/// Parses `label a b` lines (whitespace-separated, `#` comments).
pub fn parse_prior_pairs(text: &str) -> Result<Vec<(String, f64, f64)>> {
    let mut out = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (line, content) in content_lines(text) {
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.len() != 3 {
            return Err(GplError::Parse {
                line,
                msg: format!("expected 'label a b', found {} tokens", tokens.len()),
            });
        }
        if !valid_label(tokens[0]) {
            return Err(GplError::Parse {
                line,
                msg: format!("invalid label '{}'", tokens[0]),
            });
        }
        if !seen.insert(tokens[0].to_string()) {
            return Err(GplError::Parse {
                line,
                msg: format!("duplicate label '{}'", tokens[0]),
            });
        }
        let a: f64 = tokens[1].parse().map_err(|_| GplError::Parse {
            line,
            msg: format!("invalid number '{}'", tokens[1]),
        })?;
        let b: f64 = tokens[2].parse().map_err(|_| GplError::Parse {
            line,
            msg: format!("invalid number '{}'", tokens[2]),
        })?;
        out.push((tokens[0].to_string(), a, b));
    }
    Ok(out)
}

/// Builds a per-entity prior from parsed `label a b` rows; entities not
/// listed fall back to the given defaults.
pub fn align_prior(
    pairs: &[(String, f64, f64)],
    entities: &EntityTable,
    default_a: f64,
    default_b: f64,
) -> Result<PriorSpec> {
    let mut a = vec![default_a; entities.len()];
    let mut b = vec![default_b; entities.len()];
    for (label, pa, pb) in pairs {
        match entities.id(label) {
            Some(id) => {
                a[id] = *pa;
                b[id] = *pb;
            }
            None => return Err(GplError::UnknownEntity(label.clone())),
        }
    }
    PriorSpec::per_entity(a, b)
}

/// Parses a flat `key=value` config file: full-line `#` comments and blank
/// lines are skipped; later assignments override earlier ones. Pairs are
/// returned in file order.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| GplError::Parse {
            line: idx + 1,
            msg: "expected 'key=value'".into(),
        })?;
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() {
            return Err(GplError::Parse {
                line: idx + 1,
                msg: "empty key".into(),
            });
        }
        out.push((key.to_string(), value.to_string()));
    }
    Ok(out)
}

/// Plain-text fit report: status lines then one `label theta_hat` row per
/// entity at 6 decimals.
pub fn format_em_report(result: &EmResult, labels: &[String]) -> String {
    let mut out = String::new();
    out.push_str(&format!("converged: {}\n", result.converged));
    out.push_str(&format!("iterations: {}\n", result.iterations_used));
    out.push_str(&format!(
        "log_posterior: {}\n",
        result
            .log_posterior_trace
            .last()
            .copied()
            .unwrap_or(f64::NAN)
    ));
    let degenerate = if result.degenerate.is_empty() {
        "none".to_string()
    } else {
        result
            .degenerate
            .iter()
            .map(|&k| labels[k].as_str())
            .collect::<Vec<_>>()
            .join(",")
    };
    out.push_str(&format!("degenerate: {degenerate}\n"));
    let width = labels
        .iter()
        .map(|l| l.len())
        .max()
        .unwrap_or(6)
        .max("entity".len());
    out.push_str(&format!("{:width$}  theta_hat\n", "entity"));
    for (label, theta) in labels.iter().zip(&result.theta_hat) {
        out.push_str(&format!("{label:width$}  {theta:.6}\n"));
    }
    out
}

/// Win-probability table with simulation provenance.
pub fn write_win_probs_csv(
    field_labels: &[&str],
    result: &PredictiveWinProbs,
    seed: u64,
) -> Result<String> {
    let mut out = String::new();
    out.push_str(&format!("# seed: {seed}\n"));
    out.push_str(&format!("# sims: {}\n", result.n_sims));
    out.push_str(&format!(
        "# uniform_fallbacks: {}\n",
        result.uniform_fallbacks
    ));
    out.push_str("entity,win_prob\n");
    for (label, p) in field_labels.iter().zip(&result.probs) {
        csv_safe(label)?;
        out.push_str(&format!("{label},{p}\n"));
    }
    Ok(out)
}

/// Bucket-count histogram in plot-ready long form.
pub fn write_bucket_counts_csv(dist: &BucketCountDist, seed: u64) -> String {
    let mut out = String::new();
    out.push_str(&format!("# seed: {seed}\n"));
    out.push_str(&format!("# sims: {}\n", dist.n_sims));
    out.push_str("buckets,count,frequency\n");
    for (&buckets, &count) in &dist.counts {
        out.push_str(&format!(
            "{buckets},{count},{}\n",
            count as f64 / dist.n_sims as f64
        ));
    }
    out
}

/// Pointwise log-likelihood matrix: one row per ranking, one column per
/// draw, no header beyond the orientation comment.
pub fn write_pointwise_csv(matrix: &[Vec<f64>]) -> String {
    let mut out = String::from("# rows: rankings, columns: draws\n");
    for row in matrix {
        let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
