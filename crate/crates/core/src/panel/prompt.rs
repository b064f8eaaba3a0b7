//! Prompt rendering. Output is a pure function of the request, so identical
//! requests give byte-identical prompts (and identical fixture digests).

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{ElicitationRequest, ExpertRole};
use crate::consistency::{ConsistencyReport, JudgmentDeviation};
use crate::criteria::CriteriaSet;
use crate::matrix::upper_pairs;

pub const SCALE_NOTE: &str = "Use Saaty's 1–9 fundamental scale: 1 = equal importance, 3 = moderate, \
5 = strong, 7 = very strong, 9 = extreme, with 2, 4, 6 and 8 as intermediate values. \
Write k when the first criterion of the pair is the more important one and 1/k when the second is.";

pub const OUTPUT_CONTRACT: &str = "Return your final judgments between the two marker lines below, one line per pair, \
in the order the pairs were listed:\n\
BEGIN JUDGMENTS\n\
<first id>, <second id>, <intensity>, <rationale>\n\
END JUDGMENTS\n\
<intensity> must be exactly one of 1 2 3 4 5 6 7 8 9 1/2 1/3 1/4 1/5 1/6 1/7 1/8 1/9. \
<rationale> is a single line of plain text explaining the judgment. \
After the judgment block, report the weights between BEGIN WEIGHTS and END WEIGHTS, one `<id>, <weight>` line per criterion.";

const SYSTEM_PANEL: &str = "You simulate a multidisciplinary panel of domain experts producing pairwise importance \
judgments for a multi-criteria evaluation. Follow the requested output format exactly.";

/// System and user text for one chat exchange.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prompt {
    pub system: String,
    pub user: String,
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ").replace('|', "/")
}

fn render_criteria_table(set: &CriteriaSet, out: &mut String) {
    out.push_str("| ID | Criterion | Description | CI applicability | Indicators | Anchor 1 | Anchor 3 | Anchor 5 |\n");
    out.push_str("|---|---|---|---|---|---|---|---|\n");
    for c in &set.criteria {
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} | {} | {} | {} |",
            c.id,
            one_line(&c.name),
            one_line(&c.description),
            one_line(&c.ci_applicability),
            one_line(&c.indicators.join("; ")),
            one_line(&c.anchors.low),
            one_line(&c.anchors.mid),
            one_line(&c.anchors.high),
        );
    }
}

fn render_pairs(set: &CriteriaSet, out: &mut String) {
    let n = set.len();
    let count = n * (n - 1) / 2;
    let _ = writeln!(out, "Pairs to judge ({count}):");
    for (i, j) in upper_pairs(n) {
        let (a, b) = (&set.criteria[i], &set.criteria[j]);
        let _ = writeln!(out, "- {} vs {} ({} vs {})", a.id, b.id, a.name, b.name);
    }
}

fn render_task(req: &ElicitationRequest, out: &mut String) {
    let n = req.criteria_set.len();
    let _ = writeln!(
        out,
        "Goal: decide how important each of the {n} criteria below is, relative to each of the others, \
when judging whether a cyber range is suitable for critical-infrastructure (CI) training and assessment.\n"
    );
    out.push_str("Criteria:\n");
    render_criteria_table(&req.criteria_set, out);
    out.push('\n');
    out.push_str("Instructions:\n");
    out.push_str(
        "1. For each pair listed below, reason step-by-step about which criterion matters more from a CI \
perspective and by how much. Consider the effect on realism, operational safety, scalability, \
maintainability, and training effectiveness.\n",
    );
    let _ = writeln!(out, "2. {SCALE_NOTE}");
    let _ = writeln!(
        out,
        "3. When the matrix is complete, check its internal consistency and make sure CoR < {:.2}; \
revise any judgments that break transitivity before answering.",
        req.consistency_threshold
    );
    out.push_str("4. Compute and report the normalized weight vector (weights summing to 1).\n\n");
    render_pairs(&req.criteria_set, out);
    out.push('\n');
    out.push_str("Output format:\n");
    out.push_str(OUTPUT_CONTRACT);
    out.push('\n');
}

/// Single prompt in which the model plays every role.
pub fn build_prompt(req: &ElicitationRequest) -> Prompt {
    let mut user = String::new();
    let _ = writeln!(
        user,
        "Act as a panel of {} experts who deliberate and agree on one judgment per pair. Panel members:",
        req.roles.len()
    );
    for (k, r) in req.roles.iter().enumerate() {
        let _ = writeln!(user, "{}. {}: {}", k + 1, r.title, r.perspective_brief);
    }
    user.push('\n');
    render_task(req, &mut user);
    Prompt {
        system: SYSTEM_PANEL.to_string(),
        user,
    }
}

/// Prompt for one role in multi-call mode.
pub fn build_role_prompt(req: &ElicitationRequest, role: &ExpertRole) -> Prompt {
    let mut user = String::new();
    let _ = writeln!(
        user,
        "You are the {} on an expert panel. Your perspective: {}\n",
        role.title, role.perspective_brief
    );
    render_task(req, &mut user);
    Prompt {
        system: format!(
            "You are a {} producing pairwise importance judgments for a multi-criteria evaluation. \
Follow the requested output format exactly.",
            role.title
        ),
        user,
    }
}

/// Follow-up asking the panel (or one role) to revise only `flagged` pairs.
pub fn build_refinement_prompt(
    req: &ElicitationRequest,
    role: Option<&ExpertRole>,
    report: &ConsistencyReport,
    flagged: &[JudgmentDeviation],
    current: &dyn Fn(&str, &str) -> String,
) -> Prompt {
    let mut user = String::new();
    let system = match role {
        Some(r) => {
            let _ = writeln!(user, "You are the {} on an expert panel. Your perspective: {}\n", r.title, r.perspective_brief);
            build_role_prompt(req, r).system
        }
        None => {
            let names: Vec<&str> = req.roles.iter().map(|r| r.title.as_str()).collect();
            let _ = writeln!(user, "Continue acting as the expert panel ({}).\n", names.join(", "));
            SYSTEM_PANEL.to_string()
        }
    };
    let ratio = report
        .cor
        .map(|c| format!("CoR = {c:.4}"))
        .unwrap_or_else(|| format!("CoI = {:.4}", report.coi));
    let _ = writeln!(
        user,
        "The consistency check on the current judgments gives {ratio}, above the {:.2} threshold. \
These {} judgments deviate most from the priorities implied by the whole matrix:",
        req.consistency_threshold,
        flagged.len()
    );
    for d in flagged {
        let _ = writeln!(
            user,
            "- {}, {}: current {}, implied ratio {:.3}, log deviation {:.3}",
            d.row_label,
            d.col_label,
            current(&d.row_label, &d.col_label),
            d.implied,
            d.deviation
        );
    }
    user.push('\n');
    user.push_str(
        "Revisit only these pairs; every other judgment is locked and must not be repeated. \
Reason step-by-step about each listed pair again, then answer with one line per listed pair, in the order listed:\n",
    );
    user.push_str("BEGIN JUDGMENTS\n<first id>, <second id>, <intensity>, <rationale>\nEND JUDGMENTS\n");
    let _ = writeln!(user, "{SCALE_NOTE}\n");
    user.push_str("Criteria:\n");
    render_criteria_table(&req.criteria_set, &mut user);
    Prompt { system, user }
}
