use std::collections::BTreeMap;
use std::io::{Read, Write};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::FeatureError;
use crate::corpus::PaperId;

/// Lower and upper guard bounds applied to normalized values of rows that
/// were not used to fit the statistics.
pub const GUARD_BOUNDS: (f64, f64) = (-1.0, 2.0);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    /// Nullable columns are imputed with 0 and gain a `<name>_missing` flag.
    pub nullable: bool,
}

impl ColumnSpec {
    pub fn required(name: &str) -> Self {
        ColumnSpec { name: name.to_string(), nullable: false }
    }

    pub fn nullable(name: &str) -> Self {
        ColumnSpec { name: name.to_string(), nullable: true }
    }
}

/// One feature family evaluated for a set of papers.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureBlock {
    pub columns: Vec<ColumnSpec>,
    pub rows: BTreeMap<PaperId, Vec<Option<f64>>>,
}

impl FeatureBlock {
    pub fn new(columns: Vec<ColumnSpec>) -> Self {
        FeatureBlock { columns, rows: BTreeMap::new() }
    }

    pub fn insert(&mut self, id: PaperId, values: Vec<f64>) {
        self.rows.insert(id, values.into_iter().map(Some).collect());
    }
}

/// Per-column min/max captured from training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub columns: Vec<String>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl NormStats {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("norm stats serialize")
    }

    pub fn from_json(s: &str) -> Result<Self, FeatureError> {
        Ok(serde_json::from_str(s)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub node_ids: Vec<PaperId>,
    pub columns: Vec<String>,
    pub values: Array2<f64>,
    pub norm_stats: Option<NormStats>,
}

impl FeatureMatrix {
    pub fn n_rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.values.ncols()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Dense copy of the given rows.
    pub fn select_rows(&self, rows: &[usize]) -> Array2<f64> {
        self.values.select(ndarray::Axis(0), rows)
    }

    /// CSV with header `paper_id,<columns...>`; values use shortest
    /// round-trip formatting.
    pub fn write_csv(&self, out: impl Write) -> Result<(), FeatureError> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["paper_id".to_string()];
        header.extend(self.columns.iter().cloned());
        w.write_record(&header)?;
        for (i, id) in self.node_ids.iter().enumerate() {
            let mut row = vec![id.to_string()];
            row.extend(self.values.row(i).iter().map(|v| v.to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(input: impl Read) -> Result<Self, FeatureError> {
        let mut r = csv::Reader::from_reader(input);
        let header = r.headers()?.clone();
        if header.get(0) != Some("paper_id") {
            return Err(FeatureError::Csv(format!("first column must be paper_id, got {:?}", header.get(0))));
        }
        let columns: Vec<String> = header.iter().skip(1).map(String::from).collect();
        let mut node_ids = Vec::new();
        let mut flat = Vec::new();
        for (line, record) in r.records().enumerate() {
            let record = record?;
            let bad = |m: String| FeatureError::Csv(format!("row {}: {m}", line + 2));
            let id = record.get(0).unwrap_or_default();
            node_ids.push(id.parse::<PaperId>().map_err(|_| bad(format!("bad paper id {id:?}")))?);
            if record.len() != columns.len() + 1 {
                return Err(bad(format!("expected {} fields, found {}", columns.len() + 1, record.len())));
            }
            for field in record.iter().skip(1) {
                flat.push(field.parse::<f64>().map_err(|_| bad(format!("bad value {field:?}")))?);
            }
        }
        let values = Array2::from_shape_vec((node_ids.len(), columns.len()), flat)
            .map_err(|e| FeatureError::Csv(e.to_string()))?;
        Ok(FeatureMatrix { node_ids, columns, values, norm_stats: None })
    }
}

/// Joins blocks into one matrix with rows in `node_ids` order. Columns keep
/// block order; every nullable column is followed by its missing flag.
pub fn assemble(node_ids: &[PaperId], blocks: &[FeatureBlock]) -> Result<FeatureMatrix, FeatureError> {
    let mut columns = Vec::new();
    for block in blocks {
        for c in &block.columns {
            columns.push(c.name.clone());
            if c.nullable {
                columns.push(format!("{}_missing", c.name));
            }
        }
    }
    let mut values = Array2::zeros((node_ids.len(), columns.len()));
    for (i, id) in node_ids.iter().enumerate() {
        let mut col = 0;
        for block in blocks {
            let row = block.rows.get(id).ok_or(FeatureError::CoverageGap { paper: *id, block: block_name(block) })?;
            if row.len() != block.columns.len() {
                return Err(FeatureError::CoverageGap { paper: *id, block: block_name(block) });
            }
            for (spec, v) in block.columns.iter().zip(row) {
                match (v, spec.nullable) {
                    (Some(x), _) if !x.is_finite() => {
                        return Err(FeatureError::NonFinite { paper: *id, column: spec.name.clone() })
                    }
                    (Some(x), nullable) => {
                        values[[i, col]] = *x;
                        col += 1;
                        if nullable {
                            col += 1;
                        }
                    }
                    (None, true) => {
                        values[[i, col + 1]] = 1.0;
                        col += 2;
                    }
                    (None, false) => return Err(FeatureError::CoverageGap { paper: *id, block: spec.name.clone() }),
                }
            }
        }
    }
    Ok(FeatureMatrix { node_ids: node_ids.to_vec(), columns, values, norm_stats: None })
}

fn block_name(block: &FeatureBlock) -> String {
    block.columns.first().map(|c| c.name.clone()).unwrap_or_default()
}

/// Min-max statistics of `train_rows`, applied to every row.
pub fn normalize(matrix: &FeatureMatrix, train_rows: &[usize]) -> Result<FeatureMatrix, FeatureError> {
    if train_rows.is_empty() {
        return Err(FeatureError::EmptyTrainRows);
    }
    let m = matrix.n_cols();
    let mut min = vec![f64::INFINITY; m];
    let mut max = vec![f64::NEG_INFINITY; m];
    for &r in train_rows {
        for (j, v) in matrix.values.row(r).iter().enumerate() {
            min[j] = min[j].min(*v);
            max[j] = max[j].max(*v);
        }
    }
    let stats = NormStats { columns: matrix.columns.clone(), min, max };
    apply_norm_stats(matrix, &stats)
}

/// `(x - min) / (max - min)` clamped to [`GUARD_BOUNDS`]; constant columns
/// map to 0.
pub fn apply_norm_stats(matrix: &FeatureMatrix, stats: &NormStats) -> Result<FeatureMatrix, FeatureError> {
    if stats.columns != matrix.columns {
        return Err(FeatureError::ColumnMismatch);
    }
    let mut values = matrix.values.clone();
    for (j, mut col) in values.columns_mut().into_iter().enumerate() {
        let (lo, hi) = (stats.min[j], stats.max[j]);
        let range = hi - lo;
        col.mapv_inplace(|x| if range > 0.0 { ((x - lo) / range).clamp(GUARD_BOUNDS.0, GUARD_BOUNDS.1) } else { 0.0 });
    }
    Ok(FeatureMatrix {
        node_ids: matrix.node_ids.clone(),
        columns: matrix.columns.clone(),
        values,
        norm_stats: Some(stats.clone()),
    })
}

/// Pearson correlation; 0 when either side has zero variance.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        0.0
    } else {
        sab / (saa * sbb).sqrt()
    }
}

/// Columns whose absolute correlation with `targets` over `rows` exceeds
/// `threshold`.
pub fn leaking_columns(matrix: &FeatureMatrix, rows: &[usize], targets: &[f64], threshold: f64) -> Vec<(String, f64)> {
    (0..matrix.n_cols())
        .filter_map(|j| {
            let col: Vec<f64> = rows.iter().map(|&r| matrix.values[[r, j]]).collect();
            let r = pearson(&col, targets);
            (r.abs() > threshold).then(|| (matrix.columns[j].clone(), r))
        })
        .collect()
}
