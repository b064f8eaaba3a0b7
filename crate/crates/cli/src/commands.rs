//! Subcommand implementations.

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use ahp_eval::consistency::ConsistencyReport;
use ahp_eval::criteria::{chart_data, CriteriaSet, Evaluation, Normalization};
use ahp_eval::matrix::upper_pairs;
use ahp_eval::panel::{
    elicit_with_gate, ChatClient, ElicitationMode, ElicitationRequest, FixtureClient, HttpChatClient, LlmConfig,
    ModelSettings, RecordingClient,
};
use ahp_eval::sensitivity::{analyze, rank_evaluations, SensitivityReport};
use ahp_eval::storage::{self, export_report, Origin, Project, ReportKind, Stage};
use ahp_eval::{builtin_ci_criteria, Saaty, WeightMethod};
use ahp_eval_service::{AppState, ServiceConfig};
use chrono::{DateTime, Utc};

use crate::error::CliError;
use crate::input::{parse_judgments, parse_scores};
use crate::{Cli, Command, KindArg, MethodArg, ModeArg, NormArg, Result};

struct Ctx {
    path: PathBuf,
    now: DateTime<Utc>,
}

impl Ctx {
    fn load(&self) -> Result<Project> {
        storage::load(&self.path).map_err(|source| CliError::Project {
            path: self.path.clone(),
            source,
        })
    }

    fn save(&self, p: &mut Project) -> Result<()> {
        p.touch(self.now);
        storage::save(p, &self.path).map_err(|source| CliError::Project {
            path: self.path.clone(),
            source,
        })
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn run(cli: Cli) -> Result<()> {
    let ctx = Ctx {
        path: cli.project,
        now: cli.now.unwrap_or_else(Utc::now),
    };
    match cli.command {
        Command::Init { name, criteria, force } => init(&ctx, &name, criteria.as_deref(), force),
        Command::Judge { file } => judge(&ctx, file.as_deref()),
        Command::Weights {
            method,
            allow_inconsistent,
            threshold,
        } => weights(&ctx, method, allow_inconsistent, threshold),
        Command::Panel {
            fixtures,
            record,
            mode,
            max_rounds,
            refine_top_k,
            model,
            threshold,
            base_url,
            api_key_env,
            allow_inconsistent,
        } => {
            let mut llm = LlmConfig {
                api_key_env,
                ..LlmConfig::default()
            };
            if let Some(url) = base_url {
                llm.base_url = url;
            }
            let client: Box<dyn ChatClient> = match (fixtures, record) {
                (Some(dir), _) => Box::new(FixtureClient::new(dir)),
                (None, Some(dir)) => Box::new(RecordingClient::new(HttpChatClient::from_env(llm), dir)),
                (None, None) => Box::new(HttpChatClient::from_env(llm)),
            };
            let mut p = ctx.load()?;
            let mut req = ElicitationRequest::new(p.criteria_set.clone());
            req.mode = match mode {
                ModeArg::Single => ElicitationMode::SingleCall,
                ModeArg::Multi => ElicitationMode::MultiCall,
            };
            req.refine_top_k = refine_top_k;
            req.consistency_threshold = threshold;
            req.model = ModelSettings {
                model,
                ..ModelSettings::default()
            };
            panel(&ctx, &mut p, req, client.as_ref(), max_rounds, allow_inconsistent)
        }
        Command::Score {
            alternative,
            file,
            normalization,
        } => score(&ctx, &alternative, &file, normalization),
        Command::Aggregate => aggregate(&ctx),
        Command::Sensitivity { range, steps } => sensitivity(&ctx, range, steps),
        Command::Report { kind, out, chart_out } => report(&ctx, kind, out.as_deref(), chart_out.as_deref()),
        Command::VerifyPaper => verify_paper(),
        Command::Serve {
            config,
            listen,
            data_dir,
            threshold,
            model,
            fixtures,
        } => {
            let mut cfg = ServiceConfig::load(config.as_deref()).map_err(|e| CliError::Validation(e.to_string()))?;
            if let Some(v) = listen {
                cfg.listen = v;
            }
            if let Some(v) = data_dir {
                cfg.data_dir = v;
            }
            if let Some(v) = threshold {
                cfg.consistency_threshold = v;
            }
            if let Some(v) = model {
                cfg.model = v;
            }
            if fixtures.is_some() {
                cfg.fixtures_dir = fixtures;
            }
            serve(cfg)
        }
    }
}

fn init(ctx: &Ctx, name: &str, criteria: Option<&Path>, force: bool) -> Result<()> {
    if ctx.path.exists() && !force {
        return Err(CliError::Validation(format!(
            "{} already exists; pass --force to overwrite",
            ctx.path.display()
        )));
    }
    let set = match criteria {
        None => builtin_ci_criteria(),
        Some(path) => {
            let set: CriteriaSet = serde_json::from_str(&read(path)?).map_err(|e| CliError::Input {
                path: path.to_path_buf(),
                line: e.line(),
                message: e.to_string(),
            })?;
            set.validate().map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
            set
        }
    };
    let mut p = Project::new(name, set, ctx.now);
    ctx.save(&mut p)?;
    println!(
        "created {} with {} criteria ({} judgments needed)",
        ctx.path.display(),
        p.criteria_set.len(),
        p.completeness().1
    );
    Ok(())
}

/// Drops everything derived from the judgments after they change.
fn judgments_changed(p: &mut Project) {
    p.active_weights = None;
    p.evaluations.clear();
    p.sensitivity_reports.clear();
    p.metadata.stage = Stage::Comparing;
}

fn print_report(r: &ConsistencyReport, top: usize) {
    println!("lambda_max  {:.4}", r.lambda_max);
    println!("CoI         {:.5}", r.coi);
    println!("RoI         {:.2}", r.roi);
    match r.cor {
        Some(cor) => println!("CoR         {cor:.4} (threshold {:.2})", r.threshold),
        None => println!("CoR         undefined (RoI is zero)"),
    }
    println!("gate        {}", if r.acceptable { "acceptable" } else { "REJECTED" });
    if !r.acceptable {
        println!("judgments to revisit:");
        for d in r.top(top) {
            println!(
                "  {} vs {}: entered {}, implied {:.3}, log deviation {:.3}",
                d.row_label, d.col_label, d.value, d.implied, d.deviation
            );
        }
    }
}

fn judge(ctx: &Ctx, file: Option<&Path>) -> Result<()> {
    let mut p = ctx.load()?;
    let mut changed = 0;
    match file {
        Some(path) => {
            for j in parse_judgments(&read(path)?, &p.criteria_set, path)? {
                let fresh = p.put_judgment(&j.row, &j.col, j.value, None).map_err(|e| CliError::Input {
                    path: path.to_path_buf(),
                    line: j.line,
                    message: e.to_string(),
                })?;
                changed += usize::from(fresh);
            }
        }
        None => changed = judge_interactive(&mut p)?,
    }
    if changed > 0 {
        judgments_changed(&mut p);
        ctx.save(&mut p)?;
    }
    let (entered, required) = p.completeness();
    println!("{changed} judgment(s) changed; {entered}/{required} entered");
    if entered == required {
        let m = p.draft_matrix()?;
        print_report(&ahp_eval::check(&m)?, 5);
    }
    Ok(())
}

/// Prompts for each missing pair on stdin until every pair is entered or
/// the user enters a blank line.
fn judge_interactive(p: &mut Project) -> Result<usize> {
    let ids = p.criteria_set.ids();
    let stdin = std::io::stdin();
    let mut lines = stdin.lock().lines();
    let mut changed = 0;
    let io = |source| CliError::Io {
        path: PathBuf::from("<stdin>"),
        source,
    };
    println!("intensity 1-9 favours the first criterion, 1/k the second; blank line stops");
    for (i, j) in upper_pairs(ids.len()) {
        let (a, b) = (&ids[i], &ids[j]);
        if p.draft.iter().any(|d| &d.row == a && &d.col == b) {
            continue;
        }
        let name = |id: &str| p.criteria_set.get(id).map(|c| c.name.clone()).unwrap_or_default();
        let (na, nb) = (name(a), name(b));
        loop {
            let (entered, required) = p.completeness();
            print!("[{entered}/{required}] {a} ({na}) vs {b} ({nb}): ");
            std::io::stdout().flush().map_err(io)?;
            let Some(line) = lines.next().transpose().map_err(io)? else {
                println!();
                return Ok(changed);
            };
            let line = line.trim();
            if line.is_empty() {
                return Ok(changed);
            }
            match line.parse::<Saaty>() {
                Ok(v) => {
                    changed += usize::from(p.put_judgment(a, b, v, None)?);
                    break;
                }
                Err(e) => println!("  {e}"),
            }
        }
    }
    Ok(changed)
}

fn print_weights(p: &Project) {
    let Some(aw) = &p.active_weights else { return };
    for (label, w) in aw.weights.labels.iter().zip(&aw.weights.weights) {
        let name = p.criteria_set.get(label).map(|c| c.name.as_str()).unwrap_or("");
        println!("{label:<6} {name:<40} {w:.4}");
    }
    if aw.override_unverified {
        println!("weights are UNVERIFIED: the consistency gate was overridden");
    }
}

fn weights(ctx: &Ctx, method: MethodArg, allow: bool, threshold: f64) -> Result<()> {
    let mut p = ctx.load()?;
    let m = p.draft_matrix()?;
    let k = p.add_matrix(m, threshold, Origin::Manual)?;
    let report = p.matrices[k].report.clone();
    print_report(&report, 5);
    if !report.acceptable && !allow {
        return Err(CliError::Gate(format!(
            "CoR {:.4} exceeds {:.2}; revise the listed judgments or pass --allow-inconsistent",
            report.severity(),
            threshold
        )));
    }
    let method = match method {
        MethodArg::Eigen => WeightMethod::PrincipalEigenvector,
        MethodArg::Geomean => WeightMethod::GeometricMeanRows,
    };
    p.activate_weights(k, method, allow)?;
    p.metadata.stage = if p.score_sheets.is_empty() { Stage::WeightsReady } else { Stage::Scoring };
    ctx.save(&mut p)?;
    println!();
    print_weights(&p);
    Ok(())
}

fn panel(
    ctx: &Ctx,
    p: &mut Project,
    req: ElicitationRequest,
    client: &dyn ChatClient,
    max_rounds: usize,
    allow: bool,
) -> Result<()> {
    let outcome = elicit_with_gate(&req, client, max_rounds, ctx.now)?;
    for r in &outcome.rounds {
        let verdict = if r.report.acceptable { "acceptable" } else { "rejected" };
        println!(
            "round {} ({:?}): CoR {:.4} {verdict}, {} exchange(s), {} pair(s) revised",
            r.round,
            r.kind,
            r.report.severity(),
            r.exchanges.len(),
            r.revised_pairs.len()
        );
    }
    let adopt = outcome.accepted || allow;
    let id = format!("panel-{}", p.transcripts.len() + 1);
    let (accepted, best, severity) = (outcome.accepted, outcome.best_round, outcome.report.severity());
    let judgments = outcome.judgments.judgments.clone();
    p.record_panel_run(&id, req, outcome, ctx.now, adopt);
    if adopt {
        p.draft.clear();
        for j in &judgments {
            p.put_judgment(&j.row, &j.col, j.value, Some(j.rationale.clone()))?;
        }
        judgments_changed(p);
    }
    ctx.save(p)?;
    println!("transcript {id} saved to {}", ctx.path.display());
    if !accepted && !allow {
        return Err(CliError::Gate(format!(
            "no round passed the consistency gate; best was round {best} with CoR {severity:.4} (pass --allow-inconsistent to adopt it)"
        )));
    }
    if adopt {
        println!("adopted round {best} judgments; run `weights` next");
    }
    Ok(())
}

fn score(ctx: &Ctx, alternative: &str, file: &Path, norm: NormArg) -> Result<()> {
    let mut p = ctx.load()?;
    let scores = parse_scores(&read(file)?, &p.criteria_set, file)?;
    let norm = match norm {
        NormArg::Raw => Normalization::Raw,
        NormArg::MinMax => Normalization::MinMax,
    };
    p.set_scores(alternative, scores, norm)
        .map_err(|e| CliError::Validation(format!("{}: {e}", file.display())))?;
    p.evaluations.clear();
    p.sensitivity_reports.clear();
    if matches!(p.metadata.stage, Stage::WeightsReady | Stage::Complete) {
        p.metadata.stage = Stage::Scoring;
    }
    ctx.save(&mut p)?;
    println!("scored {alternative} on {} criteria", p.criteria_set.len());
    Ok(())
}

fn print_evaluations(evals: &[Evaluation]) {
    let ranking = rank_evaluations(evals);
    for e in &ranking.entries {
        let tie = if e.tied { " (tied)" } else { "" };
        println!("{:>2}. {:<24} {:.3}{tie}", e.rank, e.name, e.composite);
    }
    println!("ranking: {}", ranking.order().join(" > "));
}

fn aggregate(ctx: &Ctx) -> Result<()> {
    let mut p = ctx.load()?;
    p.aggregate_all()?;
    p.metadata.stage = Stage::Complete;
    ctx.save(&mut p)?;
    print_evaluations(&p.evaluations);
    if p.active_weights.as_ref().is_some_and(|a| a.override_unverified) {
        println!("composites use UNVERIFIED weights");
    }
    Ok(())
}

fn print_sensitivity(r: &SensitivityReport) {
    println!("baseline: {}", r.baseline.order().join(" > "));
    if r.reversal_events.is_empty() {
        println!("no rank reversals within ±{}", r.range);
    }
    for e in &r.reversal_events {
        println!(
            "reversal: {} at delta {:+.6}: {} and {} swap",
            e.criterion, e.delta, e.swapped.0, e.swapped.1
        );
    }
    for c in &r.criticality {
        match c.min_abs_delta {
            Some(d) => println!("critical  {:<6} {d:.6}", c.criterion),
            None => println!("critical  {:<6} none within range", c.criterion),
        }
    }
}

fn sensitivity(ctx: &Ctx, range: f64, steps: usize) -> Result<()> {
    let mut p = ctx.load()?;
    if p.evaluations.is_empty() {
        return Err(CliError::Validation("no evaluations; run `aggregate` first".into()));
    }
    let w = &p.active_weights.as_ref().ok_or_else(|| CliError::Validation("no active weights".into()))?.weights;
    let report = analyze(&p.evaluations, w, range, steps)?;
    print_sensitivity(&report);
    p.sensitivity_reports.push(report);
    ctx.save(&mut p)
}

fn report(ctx: &Ctx, kind: KindArg, out: Option<&Path>, chart_out: Option<&Path>) -> Result<()> {
    let p = ctx.load()?;
    let kind = match kind {
        KindArg::Summary => ReportKind::Summary,
        KindArg::Full => ReportKind::Full,
    };
    let text = export_report(&p, kind)?;
    match out {
        Some(path) => write(path, &text)?,
        None => print!("{text}"),
    }
    if let Some(path) = chart_out {
        let evals: Vec<&Evaluation> = p.evaluations.iter().collect();
        let chart = chart_data(&evals).map_err(|e| CliError::Validation(e.to_string()))?;
        write(path, &serde_json::to_string_pretty(&chart).expect("chart serializes"))?;
    }
    Ok(())
}

fn verify_paper() -> Result<()> {
    let start = std::time::Instant::now();
    let checks = crate::verify::verify_paper();
    for c in &checks {
        println!("{c}");
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    println!(
        "{} of {} checks passed in {:.1} ms",
        checks.len() - failed,
        checks.len(),
        start.elapsed().as_secs_f64() * 1e3
    );
    if failed > 0 {
        return Err(CliError::Other(format!("{failed} check(s) failed")));
    }
    Ok(())
}

fn serve(cfg: ServiceConfig) -> Result<()> {
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Other(e.to_string()))?;
    runtime
        .block_on(ahp_eval_service::serve(AppState::from_config(cfg)))
        .map_err(|e| CliError::Other(format!("server: {e}")))
}
