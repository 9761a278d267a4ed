//! The `tw` command line.
//!
//! Every run ends in one of three exit statuses: 0 when the result is the
//! expected one, 1 when the mathematics came out differently (the full
//! trace is still written), 2 for usage and input errors.

pub mod args;
pub mod config;
pub mod manifest;
pub mod report;

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::Parser;
use num_bigint::BigInt;
use serde::Serialize;
use serde_json::json;

use tw_core::canon::{canonical_form, CanonicalForm};
use tw_core::cases::{CaseTable, PairFile};
use tw_core::filters::FilterSet;
use tw_core::identify::{
    final_slopes, framing_constraint, identify, meridian_candidates, report_json, report_markdown, toroidal_slope_set,
    CaseTag, KnotData,
};
use tw_core::pair::GraphPair;
use tw_core::search::{finish, read_checkpoint, search_s2_from, write_checkpoint, SearchConfig, SearchError};
use tw_core::slope::Slope;
use tw_core::surgery::SurgeryDescription;
use tw_core::template::{load_template, TorusTemplate};
use tw_core::trace::{from_json, to_json, EliminationTrace, SurvivorRecord};
use tw_core::tree::{default_tree, eliminate_high_s, TreeError};
use tw_core::weights::WeightVector;

use args::{CaseArg, Cli, Command, FormatArg};
use config::{parse_range, RunConfig};
use manifest::{verify_manifest, write_manifest, Inputs, RunManifest};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    Unexpected = 1,
    Usage = 2,
}

/// A finished command.
struct Done {
    exit: Exit,
    message: String,
    summary: serde_json::Value,
    resumable: Option<PathBuf>,
}

impl Done {
    fn new(ok: bool, message: String, summary: serde_json::Value) -> Done {
        Done {
            exit: if ok { Exit::Ok } else { Exit::Unexpected },
            message,
            summary,
            resumable: None,
        }
    }
}

/// Usage or input problem; maps to exit 2.
struct Usage(String);

impl<E: std::fmt::Display> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.to_string())
    }
}

struct Ctx {
    cfg: RunConfig,
    out: Option<PathBuf>,
    inputs: Inputs,
    workers: usize,
}

impl Ctx {
    fn template(&mut self) -> Result<Arc<TorusTemplate>, Usage> {
        let text = self.inputs.read("figure2.template")?;
        Ok(Arc::new(load_template(&text)?))
    }

    fn figure8(&mut self, template: &Arc<TorusTemplate>) -> Result<(PairFile, CanonicalForm), Usage> {
        let pf = PairFile::parse(&self.inputs.read("figure8.pair")?)?;
        let pair = pf.to_pair(template)?;
        Ok((pf, canonical_form(&pair)))
    }

    fn write(&self, name: &str, contents: &str) -> Result<(), Usage> {
        if let Some(dir) = &self.out {
            std::fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
            let path = dir.join(name);
            std::fs::write(&path, contents).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
        }
        Ok(())
    }
}

/// Write a line, ignoring a closed pipe.
fn emit(w: &mut impl std::io::Write, text: &str) {
    let _ = writeln!(w, "{text}");
}

fn default_data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("..").join("..").join("data")
}

/// Parse `args` (including the program name) and run. Returns the exit
/// status.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { Exit::Usage as i32 } else { Exit::Ok as i32 };
        }
    };
    let command_line = argv
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join(" ");
    let started = chrono::Utc::now().to_rfc3339();

    let mut cfg = match &cli.global.config {
        Some(p) => match RunConfig::load(p) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return Exit::Usage as i32;
            }
        },
        None => RunConfig::default(),
    };
    let out = cli.global.out.clone().or_else(|| cfg.out.clone());
    let data_dir = cli
        .global
        .data_dir
        .clone()
        .or_else(|| std::env::var_os("TW_DATA_DIR").map(PathBuf::from))
        .or_else(|| cfg.data_dir.clone())
        .unwrap_or_else(default_data_dir);
    let workers = cli.global.workers.or(cfg.workers).unwrap_or(0);
    cfg.out = out.clone();
    cfg.data_dir = Some(data_dir.clone());
    cfg.workers = Some(workers);

    let mut ctx = Ctx {
        cfg,
        out,
        inputs: Inputs::new(data_dir),
        workers,
    };
    let record_manifest = !matches!(cli.command, Command::CheckManifest(_));
    let result = match &cli.command {
        Command::Enumerate(a) => enumerate(&mut ctx, a),
        Command::Eliminate(a) => eliminate(&mut ctx, a),
        Command::Identify(a) => identify_cmd(&mut ctx, a),
        Command::VerifySlopes(a) => verify_slopes(&mut ctx, a),
        Command::Report(a) => report_cmd(&mut ctx, a),
        Command::CheckManifest(a) => check_manifest(&a.dir),
    };
    let done = match result {
        Ok(d) => d,
        Err(Usage(msg)) => {
            eprintln!("error: {msg}");
            return Exit::Usage as i32;
        }
    };
    if !done.message.is_empty() {
        if done.exit == Exit::Ok {
            emit(&mut std::io::stdout(), &done.message);
        } else {
            emit(&mut std::io::stderr(), &done.message);
        }
    }
    if record_manifest {
        if let Some(dir) = &ctx.out {
            let run = RunManifest {
                command: command_line,
                config: ctx.cfg.clone(),
                inputs: ctx.inputs.hashes.clone(),
                started,
                finished: chrono::Utc::now().to_rfc3339(),
                summary: done.summary.clone(),
                exit_status: done.exit as i32,
                resumable: done.resumable.clone(),
            };
            if let Err(e) = std::fs::create_dir_all(dir).map_err(|e| e.to_string()).and_then(|_| write_manifest(dir, run)) {
                eprintln!("error: {e}");
                return Exit::Usage as i32;
            }
        }
    }
    done.exit as i32
}

fn enumerate(ctx: &mut Ctx, a: &args::EnumerateArgs) -> Result<Done, Usage> {
    let s = a.s.or(ctx.cfg.s).unwrap_or(2);
    if s == 0 || s % 2 == 1 {
        return Err(Usage(format!("s must be a positive even integer, got {s}")));
    }
    if s != 2 {
        return Err(Usage(format!(
            "pair enumeration covers s = 2 only (got {s}); use `eliminate --max-s {s}` for s >= 4"
        )));
    }
    let symmetry = !a.no_symmetry && ctx.cfg.symmetry.unwrap_or(true);
    let disabled = if a.disable_rule.is_empty() {
        ctx.cfg.disabled_rules.clone()
    } else {
        a.disable_rule.clone()
    };
    let checkpoint_every = a.checkpoint_every.or(ctx.cfg.checkpoint_every);
    let max_pairs = a.max_pairs.or(ctx.cfg.max_pairs);
    ctx.cfg.s = Some(s);
    ctx.cfg.symmetry = Some(symmetry);
    ctx.cfg.disabled_rules = disabled.clone();
    ctx.cfg.checkpoint_every = checkpoint_every;
    ctx.cfg.max_pairs = max_pairs;

    let template = ctx.template()?;
    let (_, fig8) = ctx.figure8(&template)?;
    let cases = CaseTable::parse(&ctx.inputs.read("figure9.cases")?)?;

    let checkpoint_path = ctx.out.as_ref().map(|d| d.join("checkpoint.json"));
    if (checkpoint_every.is_some() || max_pairs.is_some() || a.resume) && checkpoint_path.is_none() {
        return Err(Usage("checkpointing needs --out".into()));
    }
    if let Some(d) = &ctx.out {
        std::fs::create_dir_all(d).map_err(|e| format!("cannot create {}: {e}", d.display()))?;
    }
    let search = SearchConfig {
        s_values: vec![2],
        filters: FilterSet::without(&disabled),
        symmetry,
        workers: ctx.workers,
        out_dir: ctx.out.clone(),
        checkpoint_every,
        checkpoint_path: if checkpoint_every.is_some() || max_pairs.is_some() {
            checkpoint_path.clone()
        } else {
            None
        },
        max_pairs,
    };
    let resume = if a.resume {
        let p = checkpoint_path.as_ref().expect("checked above");
        Some(read_checkpoint(p)?)
    } else {
        None
    };
    let trace = match search_s2_from(&template, &search, resume) {
        Ok(t) => t,
        Err(SearchError::Budget {
            budget,
            done,
            total,
            checkpoint,
        }) => {
            let p = checkpoint_path.expect("checked above");
            write_checkpoint(&p, &checkpoint)?;
            let partial = finish(*checkpoint, &search);
            ctx.write("trace.json", &to_json(&partial))?;
            ctx.write("report.md", &report::render_report(std::slice::from_ref(&partial)))?;
            let mut d = Done::new(
                false,
                format!("pair budget {budget} reached after {done} of {total} configurations; rerun with --resume"),
                json!({"partial": true, "configurationsDone": done, "configurationsTotal": total}),
            );
            d.resumable = Some(p);
            return Ok(d);
        }
        Err(e) => return Err(Usage(e.to_string())),
    };

    let canon_of = |s: &SurvivorRecord| -> Result<CanonicalForm, Usage> {
        if symmetry {
            return Ok(s.encoding.clone());
        }
        let p = GraphPair::from_id(
            &template,
            &WeightVector::new(2, s.ws.clone()),
            &WeightVector::new(2, s.wt.clone()),
            &s.representative,
        )?;
        Ok(canonical_form(&p))
    };
    let classes: BTreeSet<CanonicalForm> = trace.survivors.iter().map(canon_of).collect::<Result<_, _>>()?;
    let has_fig8 = classes.contains(&fig8);
    let mismatches = if disabled.is_empty() { cases.check(&trace) } else { Vec::new() };
    let ok = if disabled.is_empty() {
        has_fig8 && classes.len() == 1 && (!symmetry || trace.survivors.len() == 1) && mismatches.is_empty()
    } else {
        has_fig8
    };

    ctx.write("trace.json", &to_json(&trace))?;
    ctx.write("report.md", &report::render_report(std::slice::from_ref(&trace)))?;
    ctx.write(
        "survivors.json",
        &(serde_json::to_string_pretty(&trace.survivors).expect("survivors serialize") + "\n"),
    )?;

    let mut msg = format!(
        "s = 2: {} configurations, {} survivor(s) ({} symmetry class(es)); transcribed pair {}",
        trace.summary.enumerated,
        trace.survivors.len(),
        classes.len(),
        if has_fig8 { "found" } else { "NOT found" }
    );
    for m in &mismatches {
        msg.push_str(&format!(
            "\ncase {} {}: expected {}, found {}",
            m.case,
            m.record,
            m.expected,
            m.found.map_or("nothing".into(), |f| f.to_string())
        ));
    }
    let summary = json!({
        "enumerated": trace.summary.enumerated,
        "eliminatedByRule": trace.summary.eliminated_by_rule,
        "survivors": trace.survivors.iter().map(|s| s.id.clone()).collect::<Vec<_>>(),
        "symmetryClasses": classes.iter().map(CanonicalForm::id).collect::<Vec<_>>(),
        "transcribedPair": fig8.id(),
        "transcribedPairFound": has_fig8,
        "caseMismatches": mismatches.len(),
    });
    Ok(Done::new(ok, msg, summary))
}

fn eliminate(ctx: &mut Ctx, a: &args::EliminateArgs) -> Result<Done, Usage> {
    let max_s = a.max_s.or(ctx.cfg.max_s).unwrap_or(12);
    if max_s < 4 || max_s % 2 == 1 {
        return Err(Usage(format!("--max-s must be an even integer >= 4, got {max_s}")));
    }
    ctx.cfg.max_s = Some(max_s);
    let template = ctx.template()?;
    let s_values: Vec<u32> = (4..=max_s).step_by(2).collect();
    let (trace, ok) = match eliminate_high_s(&template, &default_tree(), &s_values, ctx.workers) {
        Ok(t) => (t, true),
        Err(TreeError::CoverageGap { trace, .. }) => (*trace, false),
        Err(e) => return Err(Usage(e.to_string())),
    };
    ctx.write("trace.json", &to_json(&trace))?;
    ctx.write("report.md", &report::render_report(std::slice::from_ref(&trace)))?;
    let gaps = trace.summary.coverage_gaps.unwrap_or(0);
    let mut msg = format!(
        "s in {:?}: {} configurations, {} survivor(s), {} coverage gap(s)",
        s_values, trace.summary.enumerated, trace.summary.survivors, gaps
    );
    if !ok {
        for r in trace.records.iter().filter(|r| r.verdict.rule == tw_core::trace::Outcome::Survivor) {
            msg.push_str(&format!("\ngap: {}", r.id));
        }
    }
    let summary = json!({
        "sValues": s_values,
        "enumerated": trace.summary.enumerated,
        "eliminatedByRule": trace.summary.eliminated_by_rule,
        "survivors": trace.summary.survivors,
        "coverageGaps": gaps,
    });
    Ok(Done::new(ok, msg, summary))
}

fn knot_data(ctx: &mut Ctx) -> Result<KnotData, Usage> {
    Ok(KnotData::from_texts(
        &ctx.inputs.read("figure10.surgery")?,
        &ctx.inputs.read("figure12.surgery")?,
        &ctx.inputs.read("twistscript.figure12")?,
        &ctx.inputs.read("twistscript.final.A")?,
        &ctx.inputs.read("twistscript.final.B")?,
    )?)
}

fn identify_cmd(ctx: &mut Ctx, a: &args::IdentifyArgs) -> Result<Done, Usage> {
    let case = match a.case {
        Some(CaseArg::A) => Some(CaseTag::A),
        Some(CaseArg::B) => Some(CaseTag::B),
        None => match ctx.cfg.case.as_deref() {
            None => None,
            Some("A") | Some("a") => Some(CaseTag::A),
            Some("B") | Some("b") => Some(CaseTag::B),
            Some(other) => return Err(Usage(format!("case must be A or B, got {other:?}"))),
        },
    };
    ctx.cfg.case = case.map(|c| c.to_string());
    let template = ctx.template()?;
    let (_, fig8) = ctx.figure8(&template)?;
    let data = knot_data(ctx)?;

    let survivors: Vec<SurvivorRecord> = match &a.survivors {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| format!("cannot read {}: {e}", p.display()))?;
            serde_json::from_str(&text).map_err(|e| format!("malformed {}: {e}", p.display()))?
        }
        None => {
            let search = SearchConfig {
                workers: ctx.workers,
                ..Default::default()
            };
            search_s2_from(&template, &search, None)?.survivors
        }
    };
    let classes: BTreeSet<CanonicalForm> = survivors
        .iter()
        .map(|s| {
            GraphPair::from_id(
                &template,
                &WeightVector::new(2, s.ws.clone()),
                &WeightVector::new(2, s.wt.clone()),
                &s.representative,
            )
            .map(|p| canonical_form(&p))
        })
        .collect::<Result<_, _>>()?;
    if classes.len() != 1 {
        return Ok(Done::new(
            false,
            format!("expected one surviving pair up to symmetry, found {}", classes.len()),
            json!({"survivorClasses": classes.len()}),
        ));
    }
    let survivor = classes.into_iter().next().expect("one");
    match identify(&survivor, &fig8, &data) {
        Ok(mut r) => {
            if let Some(c) = case {
                r.cases.retain(|x| x.case == c);
            }
            ctx.write("identification.json", &report_json(&r))?;
            ctx.write("report.md", &report_markdown(&r))?;
            let lines: Vec<String> = r
                .cases
                .iter()
                .map(|c| format!("case {}: mu = {}, {}, {}, slopes ({}, {})", c.case, c.meridian, c.equation, c.n_formula, c.alpha, c.beta))
                .collect();
            let msg = format!(
                "{} is {}; {} checkpoints pass\n{}",
                r.survivor,
                r.family,
                r.checkpoints.len(),
                lines.join("\n")
            );
            let summary = json!({
                "survivor": r.survivor,
                "family": r.family,
                "checkpoints": r.checkpoints.len(),
                "cases": r.cases.iter().map(|c| json!({"case": c.case, "alpha": c.alpha.to_string(), "beta": c.beta.to_string()})).collect::<Vec<_>>(),
            });
            Ok(Done::new(true, msg, summary))
        }
        Err(e) => Ok(Done::new(false, format!("identification failed: {e}"), json!({"error": e.to_string()}))),
    }
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
struct SlopeCheck {
    n_range: (i64, i64),
    pq_bound: i64,
    checked_n: usize,
    distance_failures: Vec<String>,
    toroidal_failures: Vec<i64>,
    unattained_a: Vec<i64>,
    unattained_b: Vec<i64>,
    meridian_a: Vec<Slope>,
    meridian_b: Vec<Slope>,
    ok: bool,
}

fn verify_slopes(ctx: &mut Ctx, a: &args::VerifySlopesArgs) -> Result<Done, Usage> {
    let range_text = a.n_range.clone().or(ctx.cfg.n_range.clone()).unwrap_or_else(|| "-50..50".into());
    let (lo, hi) = parse_range(&range_text)?;
    let bound = a.pq_bound.or(ctx.cfg.pq_bound).unwrap_or(200);
    if bound < 1 {
        return Err(Usage(format!("--pq-bound must be positive, got {bound}")));
    }
    ctx.cfg.n_range = Some(range_text);
    ctx.cfg.pq_bound = Some(bound);
    let frame = SurgeryDescription::parse(&ctx.inputs.read("figure12.surgery")?)?;
    let (alpha, beta) = match (frame.tracked.get("alpha"), frame.tracked.get("beta")) {
        (Some(x), Some(y)) => (x.clone(), y.clone()),
        _ => return Err(Usage("figure12.surgery lacks alpha/beta".into())),
    };

    let mut distance_failures = Vec::new();
    let mut toroidal_failures = Vec::new();
    let mut checked = 0;
    for n in lo..=hi {
        if n == 1 {
            continue;
        }
        checked += 1;
        let nb = BigInt::from(n);
        for case in CaseTag::BOTH {
            let (x, y) = final_slopes(&nb, case).map_err(|e| e.to_string())?;
            if x.distance(&y) != 5u32.into() {
                distance_failures.push(format!("{case}: n = {n}"));
            }
        }
        let d = toroidal_slope_set(&nb).distances;
        if (d[0][1], d[0][2], d[1][2]) != (3, 4, 5) {
            toroidal_failures.push(n);
        }
    }
    let mut attained = [BTreeSet::new(), BTreeSet::new()];
    for p in -bound..=bound {
        for q in -bound..=bound {
            if p == 0 || num_integer::Integer::gcd(&p, &q) != 1 {
                continue;
            }
            for (k, case) in CaseTag::BOTH.iter().enumerate() {
                let (sat, n) = framing_constraint(*case, p, q);
                if sat {
                    attained[k].insert(n);
                }
            }
        }
    }
    let unattained = |k: usize| -> Vec<i64> {
        (lo..=hi).filter(|&n| n != 1 && !attained[k].contains(&BigInt::from(n))).collect()
    };
    let meridian = |case: CaseTag| -> Vec<Slope> {
        let (da, db) = case.meridian_distances();
        meridian_candidates(&alpha, &beta, da, db, 100).into_iter().collect()
    };
    let mut r = SlopeCheck {
        n_range: (lo, hi),
        pq_bound: bound,
        checked_n: checked,
        distance_failures,
        toroidal_failures,
        unattained_a: unattained(0),
        unattained_b: unattained(1),
        meridian_a: meridian(CaseTag::A),
        meridian_b: meridian(CaseTag::B),
        ok: false,
    };
    r.ok = r.distance_failures.is_empty()
        && r.toroidal_failures.is_empty()
        && r.unattained_a.is_empty()
        && r.unattained_b.is_empty()
        && r.meridian_a == [Slope::infinity()]
        && r.meridian_b == [Slope::integer(1)];
    let text = serde_json::to_string_pretty(&r).expect("serializes") + "\n";
    ctx.write("verify.json", &text)?;
    let show = |v: &[Slope]| v.iter().map(Slope::to_string).collect::<Vec<_>>().join(", ");
    let mut msg = format!(
        "n in {lo}..{hi} ({} values): distance-5 failures {}, slope-set failures {}, meridians A {{{}}} B {{{}}}",
        r.checked_n,
        r.distance_failures.len(),
        r.toroidal_failures.len(),
        show(&r.meridian_a),
        show(&r.meridian_b)
    );
    for (case, v) in [("A", &r.unattained_a), ("B", &r.unattained_b)] {
        if !v.is_empty() {
            msg.push_str(&format!("\ncase {case}: n not attained with |p|, |q| <= {bound}: {v:?}"));
        }
    }
    let ok = r.ok;
    Ok(Done::new(ok, msg, serde_json::to_value(&r).expect("serializes")))
}

fn report_cmd(ctx: &mut Ctx, a: &args::ReportArgs) -> Result<Done, Usage> {
    let files: Vec<PathBuf> = if a.traces.is_empty() {
        match &ctx.out {
            Some(d) => vec![d.join("trace.json")],
            None => return Err(Usage("no trace files given and no --out directory".into())),
        }
    } else {
        a.traces.clone()
    };
    let mut traces: Vec<EliminationTrace> = Vec::new();
    for f in &files {
        let text = std::fs::read_to_string(f).map_err(|e| format!("cannot read {}: {e}", f.display()))?;
        traces.push(from_json(&text).map_err(|e| format!("{}: {e}", f.display()))?);
    }
    let (name, text) = match a.format {
        FormatArg::Md => ("report.md", report::render_report(&traces)),
        FormatArg::Json => ("report.json", report::render_json(&traces)),
    };
    let enumerated: usize = traces.iter().map(|t| t.summary.enumerated).sum();
    let message = if ctx.out.is_some() {
        ctx.write(name, &text)?;
        format!("{} trace(s), {enumerated} configurations", traces.len())
    } else {
        // The report itself is the output.
        emit(&mut std::io::stdout(), text.trim_end());
        String::new()
    };
    Ok(Done::new(true, message, json!({"traces": files, "enumerated": enumerated})))
}

fn check_manifest(dir: &Path) -> Result<Done, Usage> {
    let bad = verify_manifest(dir)?;
    if bad.is_empty() {
        return Ok(Done::new(true, "all recorded inputs match".into(), json!({})));
    }
    let lines: Vec<String> = bad
        .iter()
        .map(|m| {
            format!(
                "hash mismatch: {} (recorded {}, now {})",
                m.file.display(),
                &m.recorded[..12],
                m.current.as_deref().map_or("missing", |c| &c[..12])
            )
        })
        .collect();
    Ok(Done::new(false, lines.join("\n"), json!({"mismatches": bad.len()})))
}
