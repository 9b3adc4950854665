use std::io::Write;

use log::warn;
use serde::{Deserialize, Serialize};

use super::{search_partition, tune_alpha, tune_from, Start, TuneOptions, TuneResult};
use crate::error::Result;
use crate::graph::Graph;
use crate::heuristics::{self, HeuristicId};
use crate::pep::{evaluate, PepSetting, PepStatus};
use crate::spectral::{spectrum_of, AveragingMatrix};

pub const OPTIMAL_LABEL: &str = "optimal";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareOptions {
    pub tune: TuneOptions,
    pub heuristics: Vec<HeuristicId>,
}

impl Default for CompareOptions {
    fn default() -> Self {
        CompareOptions {
            tune: TuneOptions::default(),
            heuristics: HeuristicId::all(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub heuristic: String,
    pub weights: Option<Vec<f64>>,
    pub alpha: Option<f64>,
    #[serde(rename = "E", with = "crate::extended::option")]
    pub value: Option<f64>,
    #[serde(with = "crate::extended::option")]
    pub rho: Option<f64>,
    #[serde(with = "crate::extended::option")]
    pub tau: Option<f64>,
    pub status: Option<PepStatus>,
    /// Eigenvalues of `W` without the consensus eigenvalue, descending.
    pub eigenvalues: Vec<f64>,
    pub error: Option<String>,
}

impl ComparisonRow {
    fn failed(label: &str, eigenvalues: Vec<f64>, err: String) -> Self {
        warn!("{label}: {err}");
        ComparisonRow {
            heuristic: label.to_string(),
            weights: None,
            alpha: None,
            value: None,
            rho: None,
            tau: None,
            status: None,
            eigenvalues,
            error: Some(err),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub setting: PepSetting,
    pub rows: Vec<ComparisonRow>,
    pub optimal: Option<TuneResult>,
}

fn disagreement_spectrum(w: &AveragingMatrix) -> Vec<f64> {
    spectrum_of(w.matrix()).eigenvalues.into_iter().skip(1).collect()
}

fn row_for(setting: &PepSetting, label: &str, w: &AveragingMatrix, opts: &TuneOptions) -> ComparisonRow {
    let eigenvalues = disagreement_spectrum(w);
    let t = match tune_alpha(setting, w, &opts.alpha_grid, &opts.search) {
        Ok(t) => t,
        Err(e) => return ComparisonRow::failed(label, eigenvalues, e.to_string()),
    };
    let status = evaluate(setting, w, t.alpha).ok().map(|r| r.status);
    ComparisonRow {
        heuristic: label.to_string(),
        weights: Some(w.weights().to_vec()),
        alpha: Some(t.alpha),
        value: Some(t.value),
        rho: t.rate.map(|r| r.rho),
        tau: t.rate.map(|r| r.tau),
        status,
        eigenvalues,
        error: None,
    }
}

/// Every heuristic with its own tuned step size, plus the jointly tuned
/// optimum. Per-row failures are recorded in the row.
pub fn compare(setting: &PepSetting, g: &Graph, opts: &CompareOptions) -> Result<Comparison> {
    setting.validate()?;
    let mut rows = Vec::new();
    for id in &opts.heuristics {
        let label = id.label();
        let row = match heuristics::compute(g, id, &opts.tune.heuristic) {
            Ok(h) => row_for(setting, label, &h.matrix, &opts.tune),
            Err(e) => ComparisonRow::failed(label, Vec::new(), e.to_string()),
        };
        rows.push(row);
    }

    let value_of = |label: &str| {
        rows.iter()
            .find(|r| r.heuristic == label)
            .and_then(|r| r.value)
    };
    if let (Some(m), Some(s)) = (value_of(HeuristicId::Metropolis.label()), value_of(HeuristicId::MinSlem.label())) {
        if m > s {
            warn!("Metropolis weights ({m}) are worse than min-SLEM weights ({s}) on this graph");
        }
    }

    // Starts: min-SLEM, Metropolis and the best heuristic, each with its
    // tuned step size.
    let partition = search_partition(g, opts.tune.orbit_tied);
    let mut picks: Vec<&ComparisonRow> = Vec::new();
    for label in [HeuristicId::MinSlem.label(), HeuristicId::Metropolis.label()] {
        if let Some(r) = rows.iter().find(|r| r.heuristic == label && r.value.is_some()) {
            picks.push(r);
        }
    }
    let best_row = rows
        .iter()
        .filter(|r| r.value.is_some())
        .min_by(|a, b| a.value.unwrap().total_cmp(&b.value.unwrap()));
    if let Some(b) = best_row {
        if !picks.iter().any(|p| p.heuristic == b.heuristic) {
            picks.push(b);
        }
    }
    let mut starts: Vec<Start> = picks
        .iter()
        .map(|r| Start {
            label: r.heuristic.clone(),
            weights: partition.reduce_mean(r.weights.as_ref().expect("rows with values carry weights")),
            alpha: r.alpha,
        })
        .collect();
    starts.extend(opts.tune.extra_starts.iter().cloned());

    let optimal = match tune_from(setting, g, &partition, &starts, &opts.tune) {
        Ok(t) => Some(t),
        Err(e) => {
            rows.push(ComparisonRow::failed(OPTIMAL_LABEL, Vec::new(), e.to_string()));
            None
        }
    };
    if let Some(t) = &optimal {
        let row = match crate::spectral::averaging_from_weights(g, &t.weights) {
            Ok(w) => {
                let status = evaluate(setting, &w, t.alpha).ok().map(|r| r.status);
                ComparisonRow {
                    heuristic: OPTIMAL_LABEL.to_string(),
                    weights: Some(t.weights.clone()),
                    alpha: Some(t.alpha),
                    value: Some(t.value),
                    rho: t.rate.map(|r| r.rho),
                    tau: t.rate.map(|r| r.tau),
                    status,
                    eigenvalues: disagreement_spectrum(&w),
                    error: None,
                }
            }
            Err(e) => ComparisonRow::failed(OPTIMAL_LABEL, Vec::new(), e.to_string()),
        };
        rows.push(row);
    }
    Ok(Comparison {
        setting: *setting,
        rows,
        optimal,
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl Comparison {
    pub fn row(&self, label: &str) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.heuristic == label)
    }

    /// Writes `heuristic,alpha,E,rho,tau,eig_2..eig_n`, preceded by the
    /// `config` lines as `#` comments.
    pub fn write_csv<W: Write>(&self, out: W, n: usize, config: &[String]) -> Result<()> {
        let mut out = out;
        for line in config {
            writeln!(out, "# {line}")?;
        }
        let mut wtr = csv::Writer::from_writer(out);
        let mut header: Vec<String> = ["heuristic", "alpha", "E", "rho", "tau"].iter().map(|s| s.to_string()).collect();
        header.extend((2..=n).map(|i| format!("eig_{i}")));
        wtr.write_record(&header).map_err(csv_err)?;
        for r in &self.rows {
            let mut rec = vec![
                r.heuristic.clone(),
                fmt_opt(r.alpha),
                fmt_opt(r.value),
                fmt_opt(r.rho),
                fmt_opt(r.tau),
            ];
            rec.extend((0..n.saturating_sub(1)).map(|i| fmt_opt(r.eigenvalues.get(i).copied())));
            wtr.write_record(&rec).map_err(csv_err)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> crate::error::Error {
    crate::error::Error::Io(std::io::Error::other(e.to_string()))
}
