//! Reading predictions and training labels from CSV or JSON-lines files.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use serde_json::Value;
use thiserror::Error;

use crate::evaluation::{ClassId, EvaluationSet, LabelAlphabet};

pub const DEFAULT_TRUE_COLUMN: &str = "true";
pub const DEFAULT_PRED_COLUMN: &str = "pred";
pub const DEFAULT_LABEL_COLUMN: &str = "label";

#[derive(Debug, Error)]
pub enum InputError {
    #[error("{}: file not found", path.display())]
    NotFound { path: PathBuf },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{}: no data rows", path.display())]
    EmptyInput { path: PathBuf },
    #[error("{}: column '{column}' not found", path.display())]
    ColumnNotFound { path: PathBuf, column: String },
    #[error("{}:{line}: {reason}", path.display())]
    Malformed {
        path: PathBuf,
        line: u64,
        reason: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileFormat {
    Csv,
    JsonLines,
}

impl FileFormat {
    /// `.jsonl`, `.ndjson` and `.json` are JSON-lines; anything else is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext)
                if ["jsonl", "ndjson", "json"].contains(&ext.to_ascii_lowercase().as_str()) =>
            {
                FileFormat::JsonLines
            }
            _ => FileFormat::Csv,
        }
    }
}

/// Where to find the true and predicted label of each test object.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictionsFile {
    pub path: PathBuf,
    pub format: FileFormat,
    pub true_column: String,
    pub pred_column: String,
}

impl PredictionsFile {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        let path = path.into();
        Self {
            format: FileFormat::from_path(&path),
            path,
            true_column: DEFAULT_TRUE_COLUMN.to_owned(),
            pred_column: DEFAULT_PRED_COLUMN.to_owned(),
        }
    }
}

/// One training label per row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainingLabelsFile {
    pub path: PathBuf,
    pub format: FileFormat,
    pub column: String,
}

impl TrainingLabelsFile {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        let path = path.into();
        Self {
            format: FileFormat::from_path(&path),
            path,
            column: DEFAULT_LABEL_COLUMN.to_owned(),
        }
    }
}

fn open(path: &Path) -> Result<File, InputError> {
    File::open(path).map_err(|source| match source.kind() {
        io::ErrorKind::NotFound => InputError::NotFound {
            path: path.to_owned(),
        },
        _ => InputError::Io {
            path: path.to_owned(),
            source,
        },
    })
}

/// Reads `columns` from every data row, returning `(line, values)` pairs.
fn read_rows<R: Read>(
    reader: R,
    format: FileFormat,
    path: &Path,
    columns: &[&str],
    single_column_fallback: bool,
) -> Result<Vec<(u64, Vec<String>)>, InputError> {
    let rows = match format {
        FileFormat::Csv => read_csv(reader, path, columns, single_column_fallback)?,
        FileFormat::JsonLines => read_json_lines(reader, path, columns)?,
    };
    if rows.is_empty() {
        return Err(InputError::EmptyInput {
            path: path.to_owned(),
        });
    }
    Ok(rows)
}

fn read_csv<R: Read>(
    reader: R,
    path: &Path,
    columns: &[&str],
    single_column_fallback: bool,
) -> Result<Vec<(u64, Vec<String>)>, InputError> {
    let malformed = |line: u64, reason: String| InputError::Malformed {
        path: path.to_owned(),
        line,
        reason,
    };
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let headers = csv
        .headers()
        .map_err(|e| malformed(e.position().map_or(1, |p| p.line()), e.to_string()))?
        .clone();
    if headers.is_empty() {
        return Err(InputError::EmptyInput {
            path: path.to_owned(),
        });
    }
    let indices = columns
        .iter()
        .map(|&col| match headers.iter().position(|h| h == col) {
            Some(i) => Ok(i),
            None if single_column_fallback && headers.len() == 1 => Ok(0),
            None => Err(InputError::ColumnNotFound {
                path: path.to_owned(),
                column: col.to_owned(),
            }),
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut rows = Vec::new();
    for result in csv.records() {
        let record =
            result.map_err(|e| malformed(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != headers.len() {
            return Err(malformed(
                line,
                format!("expected {} fields, found {}", headers.len(), record.len()),
            ));
        }
        let mut values = Vec::with_capacity(indices.len());
        for (&i, &col) in indices.iter().zip(columns) {
            let value = &record[i];
            if value.is_empty() {
                return Err(malformed(line, format!("empty value in column '{col}'")));
            }
            values.push(value.to_owned());
        }
        rows.push((line, values));
    }
    Ok(rows)
}

fn read_json_lines<R: Read>(
    reader: R,
    path: &Path,
    fields: &[&str],
) -> Result<Vec<(u64, Vec<String>)>, InputError> {
    let mut rows = Vec::new();
    for (index, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = index as u64 + 1;
        let malformed = |reason: String| InputError::Malformed {
            path: path.to_owned(),
            line: line_no,
            reason,
        };
        let line = line.map_err(|e| malformed(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let object: Value = serde_json::from_str(&line).map_err(|e| malformed(e.to_string()))?;
        let object = object
            .as_object()
            .ok_or_else(|| malformed("expected a JSON object".to_owned()))?;
        let mut values = Vec::with_capacity(fields.len());
        for &field in fields {
            let value = match object.get(field) {
                Some(Value::String(s)) if !s.is_empty() => s.clone(),
                Some(v @ (Value::Number(_) | Value::Bool(_))) => v.to_string(),
                Some(_) => {
                    return Err(malformed(format!(
                        "field '{field}' must be a non-empty string or number"
                    )))
                }
                None => return Err(malformed(format!("missing field '{field}'"))),
            };
            values.push(value);
        }
        rows.push((line_no, values));
    }
    Ok(rows)
}

/// Parses predictions from any reader; `path` is only used in errors.
pub fn parse_predictions_from<R: Read>(
    reader: R,
    file: &PredictionsFile,
    mut alphabet: LabelAlphabet,
) -> Result<EvaluationSet, InputError> {
    let columns = [file.true_column.as_str(), file.pred_column.as_str()];
    let rows = read_rows(reader, file.format, &file.path, &columns, false)?;
    let pairs = rows.iter().map(|(_, v)| (v[0].as_str(), v[1].as_str()));
    // Ids are interned in row order, so the alphabet follows first appearance.
    let records = pairs
        .map(|(truth, pred)| crate::evaluation::PredictionRecord {
            true_label: alphabet.intern(truth),
            predicted_label: alphabet.intern(pred),
        })
        .collect();
    EvaluationSet::new(records, alphabet).map_err(|_| InputError::EmptyInput {
        path: file.path.clone(),
    })
}

/// Parses a predictions file into an evaluation set. Labels not already in
/// `alphabet` are appended in first-appearance order.
pub fn parse_predictions(
    file: &PredictionsFile,
    alphabet: LabelAlphabet,
) -> Result<EvaluationSet, InputError> {
    parse_predictions_from(open(&file.path)?, file, alphabet)
}

pub fn parse_training_labels_from<R: Read>(
    reader: R,
    file: &TrainingLabelsFile,
    alphabet: &mut LabelAlphabet,
) -> Result<Vec<ClassId>, InputError> {
    let rows = read_rows(
        reader,
        file.format,
        &file.path,
        &[file.column.as_str()],
        true,
    )?;
    Ok(rows.iter().map(|(_, v)| alphabet.intern(&v[0])).collect())
}

/// Parses training labels in file order, extending `alphabet` as needed.
pub fn parse_training_labels(
    file: &TrainingLabelsFile,
    alphabet: &mut LabelAlphabet,
) -> Result<Vec<ClassId>, InputError> {
    parse_training_labels_from(open(&file.path)?, file, alphabet)
}
