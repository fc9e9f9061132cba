//! End-to-end run: load, ingest, saturate, score, build networks, compute
//! metrics, write back and render every output file.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::export::{
    export_edgelist_csv, export_facts, export_graphml, export_pajek, findings_report,
    FindingsReport,
};
use crate::kb::{KnowledgeBase, Schema};
use crate::metrics::{write_back, MetricOptions, MetricsReport};
use crate::network::{build_networks, DerivedNetwork};
use crate::rules::{
    bundled_rules, parse_ruleset, saturate, validate_rules, RuleSet, SaturationStats,
};
use crate::survey::{
    characteristic_values, compute_composite_scores, ingest_responses, load_questionnaire,
    load_responses, IngestionReport, QuestionnaireDef,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExportFormat {
    Pajek,
    Graphml,
    Csv,
    Facts,
}

impl FromStr for ExportFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "pajek" => Ok(ExportFormat::Pajek),
            "graphml" => Ok(ExportFormat::Graphml),
            "csv" => Ok(ExportFormat::Csv),
            "facts" => Ok(ExportFormat::Facts),
            other => Err(format!(
                "unknown format {other:?} (expected pajek, graphml, csv or facts)"
            )),
        }
    }
}

impl fmt::Display for ExportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExportFormat::Pajek => "pajek",
            ExportFormat::Graphml => "graphml",
            ExportFormat::Csv => "csv",
            ExportFormat::Facts => "facts",
        })
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub questionnaire_path: PathBuf,
    pub responses_path: PathBuf,
    /// Bundled rules when `None`.
    pub rules_path: Option<PathBuf>,
    pub qpe_id: String,
    pub output_dir: PathBuf,
    pub symmetrize: bool,
    pub metrics: MetricOptions,
    pub formats: BTreeSet<ExportFormat>,
    pub top_k: usize,
}

impl RunConfig {
    pub fn new(
        questionnaire_path: impl Into<PathBuf>,
        responses_path: impl Into<PathBuf>,
        qpe_id: impl Into<String>,
        output_dir: impl Into<PathBuf>,
    ) -> Self {
        RunConfig {
            questionnaire_path: questionnaire_path.into(),
            responses_path: responses_path.into(),
            rules_path: None,
            qpe_id: qpe_id.into(),
            output_dir: output_dir.into(),
            symmetrize: false,
            metrics: MetricOptions::default(),
            formats: BTreeSet::from([ExportFormat::Pajek]),
            top_k: 3,
        }
    }
}

/// Everything a run produced, before anything touches the disk.
#[derive(Debug, Clone)]
pub struct RunOutputs {
    /// File name -> contents.
    pub files: BTreeMap<String, String>,
    pub networks: Vec<DerivedNetwork>,
    pub reports: Vec<MetricsReport>,
    pub findings: FindingsReport,
    pub ingestion: IngestionReport,
    pub saturation: SaturationStats,
    pub kb: KnowledgeBase,
    pub timings: Vec<(&'static str, Duration)>,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub written: Vec<PathBuf>,
    pub networks: usize,
    pub facts: usize,
    pub ingestion: IngestionReport,
    pub saturation: SaturationStats,
    pub timings: Vec<(&'static str, Duration)>,
}

impl RunSummary {
    pub fn timing_table(&self) -> String {
        let mut out = String::new();
        let total: Duration = self.timings.iter().map(|(_, d)| *d).sum();
        for (stage, d) in &self.timings {
            out.push_str(&format!("{stage:<12} {:>10.3} ms\n", d.as_secs_f64() * 1e3));
        }
        out.push_str(&format!(
            "{:<12} {:>10.3} ms\n",
            "total",
            total.as_secs_f64() * 1e3
        ));
        out
    }
}

/// Parses a rule file, or the bundled rules, and rejects any set with
/// diagnostics.
pub fn load_rules(path: Option<&Path>, schema: &Schema) -> Result<RuleSet> {
    let rules = match path {
        None => bundled_rules(),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            parse_ruleset(&text).map_err(|e| e.in_file(p))?
        }
    };
    let diagnostics = validate_rules(&rules, schema);
    if !diagnostics.is_empty() {
        return Err(Error::InvalidRules(
            diagnostics.iter().map(ToString::to_string).collect(),
        ));
    }
    Ok(rules)
}

/// File-name-safe form of an id.
fn file_stem(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn network_stem(qpe_id: &str, net: &DerivedNetwork) -> String {
    format!("{}_{}", file_stem(qpe_id), file_stem(&net.relation_type))
}

fn json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// Runs every stage in memory.
pub fn compute_run(config: &RunConfig) -> Result<RunOutputs> {
    let mut timings = Vec::new();
    let mut clock = Instant::now();
    let mut lap = |name: &'static str, timings: &mut Vec<(&'static str, Duration)>| {
        let elapsed = clock.elapsed();
        log::debug!("{name} finished in {elapsed:?}");
        timings.push((name, elapsed));
        clock = Instant::now();
    };

    let schema = Schema::bundled();
    let def: QuestionnaireDef = load_questionnaire(&config.questionnaire_path)
        .map_err(|e| e.in_file(&config.questionnaire_path))?;
    let rules = load_rules(config.rules_path.as_deref(), &schema)?;
    let records =
        load_responses(&config.responses_path).map_err(|e| e.in_file(&config.responses_path))?;
    lap("load", &mut timings);

    let qpe = def.qpe(&config.qpe_id);
    let mut kb = KnowledgeBase::new(schema);
    let mut ingestion = ingest_responses(&mut kb, &def, &qpe, &records)
        .map_err(|e| e.in_file(&config.responses_path))?;
    lap("ingest", &mut timings);

    let saturation = saturate(&mut kb, &rules)?;
    lap("saturate", &mut timings);

    let composite = compute_composite_scores(&mut kb, &def, &qpe)?;
    ingestion.partial_scores = composite.partial.clone();
    lap("composite", &mut timings);

    let networks = build_networks(&kb, &config.qpe_id, config.symmetrize)?;
    lap("networks", &mut timings);

    let reports: Vec<MetricsReport> = networks
        .iter()
        .map(|n| MetricsReport::compute(n, &config.metrics))
        .collect();
    for r in &reports {
        write_back(&mut kb, r)?;
    }
    lap("metrics", &mut timings);

    let characteristics = characteristic_values(&kb, &def, &qpe);
    let findings = findings_report(
        &config.qpe_id,
        &reports,
        &composite,
        &characteristics,
        config.top_k,
    );
    let mut files = BTreeMap::new();
    for (net, report) in networks.iter().zip(&reports) {
        let stem = network_stem(&config.qpe_id, net);
        files.insert(format!("{stem}.metrics.json"), report.to_json());
        for f in &config.formats {
            match f {
                ExportFormat::Pajek => files.insert(format!("{stem}.net"), export_pajek(net)),
                ExportFormat::Graphml => {
                    files.insert(format!("{stem}.graphml"), export_graphml(net, report))
                }
                ExportFormat::Csv => {
                    files.insert(format!("{stem}.edges.csv"), export_edgelist_csv(net))
                }
                ExportFormat::Facts => None,
            };
        }
    }
    if config.formats.contains(&ExportFormat::Facts) {
        files.insert("facts.txt".into(), export_facts(&kb));
    }
    files.insert("findings.json".into(), findings.to_json());
    files.insert("ingestion_report.json".into(), json(&ingestion));
    lap("export", &mut timings);

    Ok(RunOutputs {
        files,
        networks,
        reports,
        findings,
        ingestion,
        saturation,
        kb,
        timings,
    })
}

/// Writes `files` into `dir`. On any failure the files written so far are
/// removed again, along with `dir` if this call created it.
pub fn write_outputs(dir: &Path, files: &BTreeMap<String, String>) -> Result<Vec<PathBuf>> {
    let created = !dir.exists();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    for (name, contents) in files {
        let path = dir.join(name);
        if let Err(e) = std::fs::write(&path, contents) {
            for p in &written {
                let _ = std::fs::remove_file(p);
            }
            if created {
                let _ = std::fs::remove_dir(dir);
            }
            return Err(Error::io(path, e));
        }
        written.push(path);
    }
    Ok(written)
}

fn finish(outputs: RunOutputs, dir: &Path, keep: impl Fn(&str) -> bool) -> Result<RunSummary> {
    let files: BTreeMap<String, String> = outputs
        .files
        .into_iter()
        .filter(|(name, _)| keep(name))
        .collect();
    let started = Instant::now();
    let written = write_outputs(dir, &files)?;
    let mut timings = outputs.timings;
    timings.push(("write", started.elapsed()));
    Ok(RunSummary {
        written,
        networks: outputs.networks.len(),
        facts: outputs.kb.len(),
        ingestion: outputs.ingestion,
        saturation: outputs.saturation,
        timings,
    })
}

/// The full pipeline; writes metrics, findings, the ingestion report and
/// the requested graph files.
pub fn cmd_run(config: &RunConfig) -> Result<RunSummary> {
    let outputs = compute_run(config)?;
    finish(outputs, &config.output_dir, |_| true)
}

/// Like [`cmd_run`] but only the requested graph and fact files are
/// written.
pub fn cmd_export(config: &RunConfig) -> Result<RunSummary> {
    let outputs = compute_run(config)?;
    finish(outputs, &config.output_dir, |name| !name.ends_with(".json"))
}

/// Problems found in a questionnaire and rule set, one message each. An
/// empty list means both are usable.
pub fn cmd_validate(questionnaire: Option<&Path>, rules: Option<&Path>) -> Result<Vec<String>> {
    let schema = Schema::bundled();
    let mut problems = Vec::new();
    if let Some(q) = questionnaire {
        if let Err(e) = load_questionnaire(q).map_err(|e| e.in_file(q)) {
            if !e.is_validation() {
                return Err(e);
            }
            problems.push(e.to_string());
        }
    }
    let ruleset = match rules {
        None => Some(bundled_rules()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            match parse_ruleset(&text) {
                Ok(r) => Some(r),
                Err(e) => {
                    problems.push(e.in_file(p).to_string());
                    None
                }
            }
        }
    };
    if let Some(r) = ruleset {
        problems.extend(validate_rules(&r, &schema).iter().map(ToString::to_string));
    }
    Ok(problems)
}
