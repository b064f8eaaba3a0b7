//! Strict parsing of the judgment block in model replies.

use std::collections::HashMap;

use thiserror::Error;

use super::{JudgmentSet, PanelJudgment};
use crate::criteria::CriteriaSet;
use crate::judgment::Saaty;
use crate::matrix::upper_pairs;

const BEGIN: &str = "BEGIN JUDGMENTS";
const END: &str = "END JUDGMENTS";

/// Parse failures. Each variant carries what an automated re-ask needs:
/// the line number within the reply and the offending text or pairs.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("reply has no `{BEGIN}` … `{END}` block")]
    MissingBlock,
    #[error("line {line}: malformed judgment `{span}`: {reason}")]
    MalformedJudgment { line: usize, span: String, reason: String },
    #[error("line {line}: unknown criterion `{id}`")]
    UnknownCriterion { line: usize, id: String },
    #[error("line {line}: pair ({row}, {col}) appears more than once")]
    DuplicatePair { line: usize, row: String, col: String },
    #[error("line {line}: pair ({row}, {col}) was not requested")]
    UnexpectedPair { line: usize, row: String, col: String },
    #[error("incomplete response: missing {}", fmt_pairs(.missing))]
    IncompleteResponse { missing: Vec<(String, String)> },
}

fn fmt_pairs(pairs: &[(String, String)]) -> String {
    pairs.iter().map(|(a, b)| format!("({a}, {b})")).collect::<Vec<_>>().join(", ")
}

impl ParseError {
    /// Short instruction suitable for appending to a re-ask prompt.
    pub fn reask_hint(&self) -> String {
        match self {
            ParseError::MissingBlock => format!("Wrap the judgments between `{BEGIN}` and `{END}` lines."),
            ParseError::MalformedJudgment { span, .. } => {
                format!("`{span}` is not valid; use `<id>, <id>, <k or 1/k>, <rationale>` with k in 1..9.")
            }
            ParseError::UnknownCriterion { id, .. } => format!("`{id}` is not a criterion id."),
            ParseError::DuplicatePair { row, col, .. } => format!("Give ({row}, {col}) only once."),
            ParseError::UnexpectedPair { row, col, .. } => format!("({row}, {col}) is locked; do not include it."),
            ParseError::IncompleteResponse { missing } => format!("Also judge {}.", fmt_pairs(missing)),
        }
    }
}

/// Judgment lines inside the block with their 1-based reply line numbers.
fn block_lines(raw: &str) -> Result<Vec<(usize, &str)>, ParseError> {
    let mut inside = false;
    let mut closed = false;
    let mut out = Vec::new();
    for (no, line) in raw.lines().enumerate() {
        let t = line.trim().trim_matches('`').trim();
        if !inside && t.eq_ignore_ascii_case(BEGIN) {
            inside = true;
            continue;
        }
        if inside && t.eq_ignore_ascii_case(END) {
            closed = true;
            break;
        }
        if inside && !t.is_empty() {
            out.push((no + 1, t));
        }
    }
    if !closed {
        return Err(ParseError::MissingBlock);
    }
    Ok(out)
}

/// Parses every judgment line, orienting pairs to criteria order.
fn parse_lines(raw: &str, set: &CriteriaSet) -> Result<Vec<(usize, PanelJudgment)>, ParseError> {
    let index: HashMap<String, usize> = set
        .criteria
        .iter()
        .enumerate()
        .map(|(i, c)| (c.id.to_ascii_lowercase(), i))
        .collect();
    let mut out = Vec::new();
    for (line, text) in block_lines(raw)? {
        let text = text.strip_prefix("- ").unwrap_or(text);
        let fields: Vec<&str> = text.splitn(4, ',').map(str::trim).collect();
        if fields.len() < 4 {
            return Err(ParseError::MalformedJudgment {
                line,
                span: text.to_string(),
                reason: "expected `<id>, <id>, <intensity>, <rationale>`".into(),
            });
        }
        let lookup = |id: &str| {
            index.get(&id.to_ascii_lowercase()).copied().ok_or_else(|| ParseError::UnknownCriterion {
                line,
                id: id.to_string(),
            })
        };
        let (a, b) = (lookup(fields[0])?, lookup(fields[1])?);
        if a == b {
            return Err(ParseError::MalformedJudgment {
                line,
                span: text.to_string(),
                reason: "a criterion cannot be compared with itself".into(),
            });
        }
        let value: Saaty = fields[2].parse().map_err(|_| ParseError::MalformedJudgment {
            line,
            span: fields[2].to_string(),
            reason: "intensity must be exactly k or 1/k with k in 1..9".into(),
        })?;
        let rationale = fields[3].to_string();
        if rationale.is_empty() {
            return Err(ParseError::MalformedJudgment {
                line,
                span: text.to_string(),
                reason: "rationale is empty".into(),
            });
        }
        let (row, col, value) = if a < b { (a, b, value) } else { (b, a, value.recip()) };
        out.push((
            line,
            PanelJudgment {
                row: set.criteria[row].id.clone(),
                col: set.criteria[col].id.clone(),
                value,
                rationale,
            },
        ));
    }
    Ok(out)
}

fn collect_unique(
    parsed: Vec<(usize, PanelJudgment)>,
) -> Result<HashMap<(String, String), PanelJudgment>, ParseError> {
    let mut by_pair = HashMap::new();
    for (line, j) in parsed {
        let key = (j.row.clone(), j.col.clone());
        if by_pair.contains_key(&key) {
            return Err(ParseError::DuplicatePair {
                line,
                row: key.0,
                col: key.1,
            });
        }
        by_pair.insert(key, j);
    }
    Ok(by_pair)
}

/// Parses a full reply into a complete judgment set.
///
/// Intensities must be written exactly as `k` or `1/k`; a value like `6.5`
/// is rejected rather than rounded. Pairs given in reverse order are
/// reoriented with the reciprocal value.
pub fn parse_response(raw: &str, set: &CriteriaSet) -> Result<JudgmentSet, ParseError> {
    let mut by_pair = collect_unique(parse_lines(raw, set)?)?;
    let n = set.len();
    let mut missing = Vec::new();
    let mut judgments = Vec::with_capacity(n * (n - 1) / 2);
    for (i, j) in upper_pairs(n) {
        let key = (set.criteria[i].id.clone(), set.criteria[j].id.clone());
        match by_pair.remove(&key) {
            Some(judgment) => judgments.push(judgment),
            None => missing.push(key),
        }
    }
    if !missing.is_empty() {
        return Err(ParseError::IncompleteResponse { missing });
    }
    Ok(JudgmentSet {
        source: "panel".to_string(),
        criteria: set.ids(),
        judgments,
        model_metadata: Vec::new(),
    })
}

/// Parses a refinement reply that must cover exactly `requested` pairs
/// (given as `(row, col)` ids in criteria order).
pub fn parse_revisions(
    raw: &str,
    set: &CriteriaSet,
    requested: &[(String, String)],
) -> Result<Vec<PanelJudgment>, ParseError> {
    let parsed = parse_lines(raw, set)?;
    for (line, j) in &parsed {
        if !requested.iter().any(|(r, c)| *r == j.row && *c == j.col) {
            return Err(ParseError::UnexpectedPair {
                line: *line,
                row: j.row.clone(),
                col: j.col.clone(),
            });
        }
    }
    let mut by_pair = collect_unique(parsed)?;
    let mut missing = Vec::new();
    let mut out = Vec::with_capacity(requested.len());
    for key in requested {
        match by_pair.remove(key) {
            Some(j) => out.push(j),
            None => missing.push(key.clone()),
        }
    }
    if !missing.is_empty() {
        return Err(ParseError::IncompleteResponse { missing });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::builtin_ci_criteria;

    fn three() -> CriteriaSet {
        let mut s = builtin_ci_criteria();
        s.criteria.truncate(3);
        s
    }

    #[test]
    fn parses_and_reorients() {
        let raw = "Some preamble\nBEGIN JUDGMENTS\nC1, C2, 3, realism first\nC3, C1, 5, scale, oddly\n- C2, C3, 1/2, fine\nEND JUDGMENTS\ntrailer";
        let js = parse_response(raw, &three()).unwrap();
        assert_eq!(js.judgments.len(), 3);
        assert_eq!(js.judgments[1].row, "C1");
        assert_eq!(js.judgments[1].col, "C3");
        assert_eq!(js.judgments[1].value.to_string(), "1/5");
        assert_eq!(js.judgments[1].rationale, "scale, oddly");
        assert_eq!(js.judgments[2].value.to_string(), "1/2");
    }

    #[test]
    fn decimal_intensity_is_malformed() {
        let raw = "BEGIN JUDGMENTS\nC1, C2, 6.5, hmm\nC1, C3, 3, x\nC2, C3, 3, y\nEND JUDGMENTS";
        match parse_response(raw, &three()).unwrap_err() {
            ParseError::MalformedJudgment { line, span, .. } => {
                assert_eq!(line, 2);
                assert_eq!(span, "6.5");
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn missing_pairs_listed() {
        let raw = "BEGIN JUDGMENTS\nC1, C2, 3, x\nEND JUDGMENTS";
        let err = parse_response(raw, &three()).unwrap_err();
        assert_eq!(
            err,
            ParseError::IncompleteResponse {
                missing: vec![("C1".into(), "C3".into()), ("C2".into(), "C3".into())]
            }
        );
        assert!(err.reask_hint().contains("(C1, C3)"));
    }

    #[test]
    fn structural_errors() {
        assert_eq!(parse_response("C1, C2, 3, x", &three()).unwrap_err(), ParseError::MissingBlock);
        let dup = "BEGIN JUDGMENTS\nC1, C2, 3, x\nC2, C1, 1/3, again\nEND JUDGMENTS";
        assert!(matches!(parse_response(dup, &three()).unwrap_err(), ParseError::DuplicatePair { line: 3, .. }));
        let unknown = "BEGIN JUDGMENTS\nC1, C9, 3, x\nEND JUDGMENTS";
        assert!(matches!(parse_response(unknown, &three()).unwrap_err(), ParseError::UnknownCriterion { .. }));
        let no_reason = "BEGIN JUDGMENTS\nC1, C2, 3, \nEND JUDGMENTS";
        assert!(matches!(parse_response(no_reason, &three()).unwrap_err(), ParseError::MalformedJudgment { .. }));
    }

    #[test]
    fn revisions_must_match_request() {
        let req = vec![("C1".to_string(), "C3".to_string())];
        let ok = parse_revisions("BEGIN JUDGMENTS\nC1, C3, 4, revised\nEND JUDGMENTS", &three(), &req).unwrap();
        assert_eq!(ok[0].value.to_string(), "4");
        let locked = parse_revisions("BEGIN JUDGMENTS\nC1, C2, 4, no\nEND JUDGMENTS", &three(), &req).unwrap_err();
        assert!(matches!(locked, ParseError::UnexpectedPair { .. }));
        let empty = parse_revisions("BEGIN JUDGMENTS\nEND JUDGMENTS", &three(), &req).unwrap_err();
        assert!(matches!(empty, ParseError::IncompleteResponse { .. }));
    }
}
