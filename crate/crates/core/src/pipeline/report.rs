use std::cmp::Ordering;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{AtStage, ErrorClass, PipelineError, Stage};
use crate::baselines::ModelKind;
use crate::corpus::CaseLabel;
use crate::eval::CSV_HEADER;

/// One row of a metrics CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub model: String,
    pub case: String,
    pub fold: Option<usize>,
    pub mae: f64,
    pub rmse: f64,
    pub mape: f64,
    pub r2: f64,
    pub adjusted_r2: f64,
}

const METRICS: [&str; 5] = ["mae", "rmse", "mape", "r2", "adjusted_r2"];

impl MetricsRow {
    fn metric(&self, i: usize) -> f64 {
        [self.mae, self.rmse, self.mape, self.r2, self.adjusted_r2][i]
    }

    fn sort_key(&self) -> (Result<CaseLabel, &str>, Result<ModelKind, &str>, Option<usize>) {
        (
            self.case.parse().map_err(|_| self.case.as_str()),
            self.model.parse().map_err(|_| self.model.as_str()),
            self.fold,
        )
    }

    fn cmp_key(&self, other: &Self) -> Ordering {
        self.sort_key().cmp(&other.sort_key()).then_with(|| {
            (0..5).map(|i| self.metric(i).total_cmp(&other.metric(i))).find(|o| o.is_ne()).unwrap_or(Ordering::Equal)
        })
    }
}

pub fn read_metrics_csv(input: impl Read, name: &str) -> Result<Vec<MetricsRow>, PipelineError> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().at(Stage::Report)?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(PipelineError::new(
            Stage::Report,
            ErrorClass::Data,
            format!(
                "{name}: expected columns {}, found {}",
                CSV_HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    r.deserialize()
        .collect::<Result<Vec<MetricsRow>, _>>()
        .map_err(|e| PipelineError::new(Stage::Report, ErrorClass::Data, format!("{name}: {e}")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergedRow {
    #[serde(flatten)]
    pub row: MetricsRow,
    /// Metrics on which this row is best within its case and fold.
    pub best: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergedReport {
    pub rows: Vec<MergedRow>,
}

/// Merges metric tables: exact duplicates collapse, rows sort by case then
/// model, and the best value of each metric per (case, fold) is flagged
/// (lowest error, highest R²).
pub fn merge_reports(tables: Vec<Vec<MetricsRow>>) -> MergedReport {
    let mut rows: Vec<MetricsRow> = tables.into_iter().flatten().collect();
    rows.sort_by(|a, b| a.cmp_key(b));
    rows.dedup();
    let merged = rows
        .iter()
        .map(|row| {
            let peers = rows.iter().filter(|o| o.case == row.case && o.fold == row.fold);
            let best = (0..5)
                .filter(|&i| {
                    let mut values = peers.clone().map(|o| o.metric(i));
                    let v = row.metric(i);
                    if i < 3 {
                        values.all(|o| v <= o)
                    } else {
                        values.all(|o| v >= o)
                    }
                })
                .map(|i| METRICS[i].to_string())
                .collect();
            MergedRow { row: row.clone(), best }
        })
        .collect();
    MergedReport { rows: merged }
}

impl MergedReport {
    pub fn write_csv(&self, out: impl Write) -> Result<(), PipelineError> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        w.write_record(CSV_HEADER).at(Stage::Report)?;
        for r in &self.rows {
            w.serialize(&r.row).at(Stage::Report)?;
        }
        w.flush().at(Stage::Report)?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Aligned text table; `*` marks the best value per case.
    pub fn to_text(&self) -> String {
        let mut lines = vec![format!(
            "{:<8} {:<9} {:>4}  {:>12} {:>12} {:>12} {:>12} {:>12}",
            "case", "model", "fold", "MAE", "RMSE", "MAPE", "R2", "Adj R2"
        )];
        for r in &self.rows {
            let cell = |i: usize| {
                let mark = if r.best.iter().any(|b| b == METRICS[i]) { "*" } else { " " };
                format!("{:>11.4}{mark}", r.row.metric(i))
            };
            lines.push(format!(
                "{:<8} {:<9} {:>4}  {} {} {} {} {}",
                r.row.case,
                r.row.model,
                r.row.fold.map(|f| f.to_string()).unwrap_or_else(|| "-".into()),
                cell(0),
                cell(1),
                cell(2),
                cell(3),
                cell(4)
            ));
        }
        lines.join("\n") + "\n"
    }
}
