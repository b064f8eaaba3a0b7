//! Line-oriented input files: judgments and rubric scores.
//!
//! Blank lines and lines starting with `#` are ignored in both formats.

use std::collections::HashSet;
use std::path::Path;

use ahp_eval::criteria::{CriteriaSet, RubricScore};
use ahp_eval::judgment::Saaty;

use crate::error::CliError;

/// One judgment line: `row col intensity`.
#[derive(Debug, Clone, PartialEq)]
pub struct JudgmentLine {
    pub line: usize,
    pub row: String,
    pub col: String,
    pub value: Saaty,
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn known(set: &CriteriaSet, id: &str, path: &Path, line: usize) -> Result<String, CliError> {
    match set.criteria.iter().find(|c| c.id.eq_ignore_ascii_case(id)) {
        Some(c) => Ok(c.id.clone()),
        None => Err(CliError::Input {
            path: path.to_path_buf(),
            line,
            message: format!("unknown criterion `{id}`"),
        }),
    }
}

/// Parses `Ci Cj intensity` lines, where intensity is `1`–`9` or `1/k`.
pub fn parse_judgments(text: &str, set: &CriteriaSet, path: &Path) -> Result<Vec<JudgmentLine>, CliError> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (line, l) in content_lines(text) {
        let err = |message: String| CliError::Input {
            path: path.to_path_buf(),
            line,
            message,
        };
        let fields: Vec<&str> = l.split_whitespace().collect();
        let [row, col, value] = fields[..] else {
            return Err(err(format!("expected `Ci Cj intensity`, found `{l}`")));
        };
        let row = known(set, row, path, line)?;
        let col = known(set, col, path, line)?;
        if row == col {
            return Err(err(format!("`{row}` cannot be compared with itself")));
        }
        let value: Saaty = value.parse().map_err(|e| err(format!("{e}")))?;
        let key = if row < col { (row.clone(), col.clone()) } else { (col.clone(), row.clone()) };
        if !seen.insert(key) {
            return Err(err(format!("pair {row}, {col} appears more than once")));
        }
        out.push(JudgmentLine { line, row, col, value });
    }
    Ok(out)
}

/// Parses `Ci | score | evidence | ref1; ref2` lines. The reference column
/// is optional.
pub fn parse_scores(text: &str, set: &CriteriaSet, path: &Path) -> Result<Vec<RubricScore>, CliError> {
    let mut out: Vec<RubricScore> = Vec::new();
    for (line, l) in content_lines(text) {
        let err = |message: String| CliError::Input {
            path: path.to_path_buf(),
            line,
            message,
        };
        let fields: Vec<&str> = l.splitn(4, '|').map(str::trim).collect();
        if fields.len() < 3 {
            return Err(err(format!("expected `Ci | score | evidence [| refs]`, found `{l}`")));
        }
        let id = known(set, fields[0], path, line)?;
        if out.iter().any(|s| s.criterion_id == id) {
            return Err(err(format!("criterion `{id}` scored more than once")));
        }
        let value: i64 = fields[1]
            .parse()
            .map_err(|_| err(format!("score `{}` is not an integer", fields[1])))?;
        let refs = fields
            .get(3)
            .map(|r| r.split(';').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect())
            .unwrap_or_default();
        let score = RubricScore::new(&id, value, fields[2]).map_err(|e| err(e.to_string()))?;
        out.push(score.with_refs(refs));
    }
    Ok(out)
}
