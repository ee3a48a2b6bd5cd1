//! CSV and JSON emission for experiment results.
//!
//! Every CSV starts with a header row. Floats are written with 17 significant
//! digits so they parse back to the same double; infinities are `inf`/`-inf`
//! and a bound that does not apply is an empty cell.

use std::io;

use serde::{Deserialize, Serialize};

use crate::bounds::{BoundReport, TrendReport};
use crate::error::{Error, Result};
use crate::graphlemma::{FactsReport, LemmaCheck};
use crate::mc::{ExponentFit, McEstimate};

pub fn format_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x:.16e}")
    }
}

fn format_opt(x: Option<f64>) -> String {
    x.map(format_f64).unwrap_or_default()
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn write_table<W: io::Write>(out: W, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(header).map_err(csv_error)?;
    for row in rows {
        writer.write_record(row).map_err(csv_error)?;
    }
    writer.flush().map_err(|e| Error::Io(e.to_string()))
}

fn names(columns: &[&str]) -> Vec<String> {
    columns.iter().map(|c| c.to_string()).collect()
}

const BOUND_COLUMNS: [&str; 5] = ["S", "log_S", "upper", "upper_applicable", "lower"];

fn bound_cells(b: &BoundReport) -> Vec<String> {
    vec![
        format_f64(b.s),
        format_f64(b.log_s),
        format_opt(b.upper.value()),
        b.upper.is_applicable().to_string(),
        format_f64(b.lower),
    ]
}

/// Columns `n, A, S, log_S, upper, upper_applicable, lower`.
pub fn write_bounds_csv<W: io::Write>(out: W, reports: &[BoundReport]) -> Result<()> {
    let mut header = names(&["n", "A"]);
    header.extend(names(&BOUND_COLUMNS));
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|b| {
            let mut row = vec![b.n.to_string(), b.a.to_string()];
            row.extend(bound_cells(b));
            row
        })
        .collect();
    write_table(out, &header, &rows)
}

/// Columns `n, A, trials, errors, p_hat, stderr, stderr_is_placeholder,
/// r2_count, …, rA_count, single_cycle_fraction`, then the bound columns when
/// `bounds` is given (one report per estimate).
pub fn write_mc_csv<W: io::Write>(
    out: W,
    estimates: &[McEstimate],
    bounds: Option<&[BoundReport]>,
) -> Result<()> {
    if let Some(b) = bounds {
        if b.len() != estimates.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} estimates but {} bound reports",
                estimates.len(),
                b.len()
            )));
        }
    }
    let max_a = estimates.iter().map(|e| e.a).max().unwrap_or(2);
    let mut header = names(&[
        "n",
        "A",
        "trials",
        "errors",
        "p_hat",
        "stderr",
        "stderr_is_placeholder",
    ]);
    header.extend((2..=max_a).map(|r| format!("r{r}_count")));
    header.push("single_cycle_fraction".into());
    if bounds.is_some() {
        header.extend(names(&BOUND_COLUMNS));
    }
    let rows: Vec<Vec<String>> = estimates
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let mut row = vec![
                e.n.to_string(),
                e.a.to_string(),
                e.trials.to_string(),
                e.errors.to_string(),
                format_f64(e.p_hat),
                format_f64(e.stderr),
                e.stderr_is_placeholder.to_string(),
            ];
            row.extend((2..=max_a).map(|r| {
                e.r_histogram
                    .get(&r)
                    .map(u64::to_string)
                    .unwrap_or_default()
            }));
            row.push(format_f64(e.single_cycle_fraction));
            if let Some(b) = bounds {
                row.extend(bound_cells(&b[i]));
            }
            row
        })
        .collect();
    write_table(out, &header, &rows)
}

/// One comparison of the lemma or a counting fact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaRow {
    pub k: usize,
    pub r: usize,
    pub trial: u64,
    /// `lemma`, or `fact1` … `fact4`.
    pub check: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl LemmaRow {
    pub fn lemma(trial: u64, check: &LemmaCheck) -> Self {
        Self {
            k: check.k,
            r: check.r,
            trial,
            check: "lemma".into(),
            lhs: check.lhs,
            rhs: check.rhs,
            holds: check.holds,
        }
    }

    /// Fact 1 compares `(N r / n) n` with `N r`, fact 2 the monomial counts,
    /// fact 3 the log-product of all monomials, fact 4 the group sizes.
    pub fn facts(trial: u64, report: &FactsReport) -> Vec<Self> {
        let row = |name: &str, lhs: f64, rhs: f64, holds: bool| Self {
            k: report.k,
            r: report.r,
            trial,
            check: name.into(),
            lhs,
            rhs,
            holds,
        };
        vec![
            row(
                "fact1",
                (report.per_edge_cycles * report.edges) as f64,
                (report.cycles * report.r as u64) as f64,
                report.fact1_holds,
            ),
            row(
                "fact2",
                report.monomials_enumerated as f64,
                report.monomials_expected as f64,
                report.fact2_holds,
            ),
            row(
                "fact3",
                report.log_product_enumerated,
                report.log_product_expected,
                report.fact3_holds,
            ),
            row(
                "fact4",
                report.group_size as f64,
                report.group_size_expected as f64,
                report.fact4_holds,
            ),
        ]
    }
}

/// Columns `k, r, trial, check, lhs, rhs, holds`.
pub fn write_lemma_csv<W: io::Write>(out: W, rows: &[LemmaRow]) -> Result<()> {
    let header = names(&["k", "r", "trial", "check", "lhs", "rhs", "holds"]);
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|row| {
            vec![
                row.k.to_string(),
                row.r.to_string(),
                row.trial.to_string(),
                row.check.clone(),
                format_f64(row.lhs),
                format_f64(row.rhs),
                row.holds.to_string(),
            ]
        })
        .collect();
    write_table(out, &header, &cells)
}

/// One row per grid point; the fit summary repeats on every row.
pub fn write_exponent_csv<W: io::Write>(out: W, fit: &ExponentFit) -> Result<()> {
    let header = names(&[
        "n",
        "trials",
        "errors",
        "p_hat",
        "used_in_fit",
        "slope",
        "intercept",
        "target",
        "relative_error",
        "tolerance",
        "within_tolerance",
    ]);
    let rows: Vec<Vec<String>> = fit
        .points
        .iter()
        .map(|pt| {
            vec![
                pt.n.to_string(),
                pt.trials.to_string(),
                pt.errors.to_string(),
                format_f64(pt.p_hat),
                pt.used_in_fit.to_string(),
                format_f64(fit.slope),
                format_f64(fit.intercept),
                format_f64(fit.target),
                format_f64(fit.relative_error),
                format_f64(fit.tolerance),
                fit.within_tolerance.to_string(),
            ]
        })
        .collect();
    write_table(out, &header, &rows)
}

/// One row per grid point; slope and verdict repeat on every row.
pub fn write_trend_csv<W: io::Write>(out: W, trend: &TrendReport) -> Result<()> {
    let header = names(&[
        "n",
        "A",
        "log_S",
        "evaluation",
        "in_window",
        "slope",
        "verdict",
    ]);
    let first_fitted = trend.points.len() - trend.window;
    let rows: Vec<Vec<String>> = trend
        .points
        .iter()
        .enumerate()
        .map(|(i, pt)| {
            let evaluation = serde_json::to_value(pt.evaluation).expect("unit enum serializes");
            vec![
                pt.n.to_string(),
                pt.a.to_string(),
                format_f64(pt.log_s),
                evaluation.as_str().unwrap_or_default().to_string(),
                (i >= first_fitted).to_string(),
                format_f64(trend.slope),
                trend.verdict.to_string(),
            ]
        })
        .collect();
    write_table(out, &header, &rows)
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))
}

pub fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("json: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::UpperBound;

    fn to_string(f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> String {
        let mut buf = Vec::new();
        f(&mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn floats_round_trip_through_text() {
        for x in [
            0.1,
            1.0 / 3.0,
            1e-300,
            6.02214076e23,
            f64::MIN_POSITIVE,
            -2.5,
        ] {
            assert_eq!(format_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(format_f64(f64::NEG_INFINITY), "-inf");
        assert_eq!(format_f64(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn bounds_csv_layout() {
        let report = BoundReport {
            n: 10,
            a: 2,
            s: 0.25,
            log_s: 0.25f64.ln(),
            upper: UpperBound::NotApplicable,
            lower: 0.0625,
        };
        let text = to_string(|b| write_bounds_csv(b, &[report]));
        let mut lines = text.lines();
        assert_eq!(
            lines.next(),
            Some("n,A,S,log_S,upper,upper_applicable,lower")
        );
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row[0], "10");
        assert_eq!(row[4], "");
        assert_eq!(row[5], "false");
        assert_eq!(row[2].parse::<f64>().unwrap(), 0.25);
    }

    #[test]
    fn lemma_csv_header() {
        let row = LemmaRow {
            k: 4,
            r: 4,
            trial: 0,
            check: "lemma".into(),
            lhs: 1.0,
            rhs: 2.0,
            holds: true,
        };
        let text = to_string(|b| write_lemma_csv(b, &[row]));
        assert!(text.starts_with("k,r,trial,check,lhs,rhs,holds\n4,4,0,lemma,"));
        assert!(text.trim_end().ends_with(",true"));
    }
}
