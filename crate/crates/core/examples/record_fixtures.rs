//! Regenerates the panel replay fixtures under `tests/fixtures/panel`.
//!
//! A synthetic responder answers first-round prompts with a fixed matrix and
//! refinement prompts with values from a target matrix for exactly the
//! pairs it was asked about. Run after any change to prompt text:
//!
//! ```text
//! cargo run -p ahp-eval --example record_fixtures
//! ```

use std::path::PathBuf;

use ahp_eval::judgment::Rational;
use ahp_eval::matrix::{upper_pairs, PairwiseMatrix};
use ahp_eval::panel::{
    elicit_with_gate, ChatClient, ChatRequest, ChatResponse, ElicitationMode, ElicitationRequest, RecordingClient,
    TransportError, DEFAULT_MAX_ROUNDS,
};
use ahp_eval::reference::consensus_matrix;
use ahp_eval::builtin_ci_criteria;
use chrono::{TimeZone, Utc};

struct Synthetic {
    /// First-round matrix per role title (or one entry for the whole panel).
    initial: Vec<(String, PairwiseMatrix)>,
    target: PairwiseMatrix,
}

fn line(m: &PairwiseMatrix, i: usize, j: usize, note: &str) -> String {
    let l = m.labels();
    format!("{}, {}, {}, {note}\n", l[i], l[j], m.entry(i, j))
}

impl ChatClient for Synthetic {
    fn complete(&self, req: &ChatRequest) -> Result<ChatResponse, TransportError> {
        let mut text = String::from("Deliberation summary omitted.\n\nBEGIN JUDGMENTS\n");
        if req.user.contains("Revisit only these pairs") {
            for l in req.user.lines().filter(|l| l.starts_with("- ") && l.contains(": current ")) {
                let ids: Vec<&str> = l[2..].split(':').next().unwrap().split(", ").collect();
                let idx = |id: &str| self.target.labels().iter().position(|x| x == id).unwrap();
                text.push_str(&line(&self.target, idx(ids[0]), idx(ids[1]), "revised after reviewing the implied ratio"));
            }
        } else {
            let m = self
                .initial
                .iter()
                .find(|(role, _)| req.system.contains(role.as_str()))
                .or(self.initial.first())
                .map(|(_, m)| m)
                .unwrap();
            for (i, j) in upper_pairs(m.order()) {
                text.push_str(&line(m, i, j, "judged from the rubric anchors and CI operating constraints"));
            }
        }
        text.push_str("END JUDGMENTS\n");
        Ok(ChatResponse { text, usage: None })
    }
}

fn record(dir: PathBuf, req: &ElicitationRequest, client: Synthetic) {
    if dir.exists() {
        std::fs::remove_dir_all(&dir).unwrap();
    }
    let rec = RecordingClient::new(client, &dir);
    let now = Utc.with_ymd_and_hms(2025, 1, 1, 0, 0, 0).unwrap();
    let out = elicit_with_gate(req, &rec, DEFAULT_MAX_ROUNDS, now).unwrap();
    println!(
        "{}: {} round(s), CoR {:.4}, accepted {}",
        dir.display(),
        out.rounds.len(),
        out.report.cor.unwrap(),
        out.accepted
    );
}

fn main() {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/panel");
    let eq = consensus_matrix();
    let flipped = eq.with_entry(0, 2, Rational::new(1, 7).unwrap()).unwrap();

    let single = ElicitationRequest::new(builtin_ci_criteria());
    record(
        root.join("consistent"),
        &single,
        Synthetic {
            initial: vec![(String::new(), eq.clone())],
            target: eq.clone(),
        },
    );
    record(
        root.join("refine"),
        &single,
        Synthetic {
            initial: vec![(String::new(), flipped)],
            target: eq.clone(),
        },
    );

    let mut multi = ElicitationRequest::new(builtin_ci_criteria());
    multi.mode = ElicitationMode::MultiCall;
    let off_by_one = eq.with_entry(0, 1, Rational::integer(3).unwrap()).unwrap();
    let initial = multi
        .roles
        .iter()
        .enumerate()
        .map(|(k, r)| (r.title.clone(), if k == 1 { off_by_one.clone() } else { eq.clone() }))
        .collect();
    record(root.join("multi"), &multi, Synthetic { initial, target: eq });
}
