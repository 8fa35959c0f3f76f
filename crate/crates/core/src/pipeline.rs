//! Stage orchestration: running one extension stage over a file of drawings,
//! sharding, checkpointing, statistics and file verification.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::{self, Write as _};
use std::fs::{self, File, OpenOptions};
use std::io::{BufReader, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Mutex;
use std::time::Instant;

use rayon::prelude::*;

use crate::canonical::{canonical_form, CanonicalCode};
use crate::counting::{parity_ok, stage_name, Stage, StagePlan};
use crate::drawing::{seed_k4, validate, Drawing};
use crate::equivalence::{extend_representatives, ErrorRecord, ErrorSet};
use crate::error::{ExtendError, PipelineError};
use crate::extension::{extend_all, minimality_filter, ExtendOptions};
use crate::format::{parse_drawings, read_drawings, write_drawing_into};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Every extension, deduplicated up to isomorphism.
    Alg1,
    /// One extension per class product, minimality-filtered, not deduplicated.
    Alg2,
}

impl FromStr for Mode {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Mode, PipelineError> {
        match s {
            "alg1" => Ok(Mode::Alg1),
            "alg2" => Ok(Mode::Alg2),
            _ => Err(PipelineError::BadMode(s.to_string())),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Alg1 => "alg1",
            Mode::Alg2 => "alg2",
        })
    }
}

/// Input drawing `j` belongs to shard `j % count`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Shard {
    pub index: usize,
    pub count: usize,
}

impl Shard {
    pub const ALL: Shard = Shard { index: 0, count: 1 };

    pub fn contains(&self, input: usize) -> bool {
        input % self.count == self.index
    }
}

impl FromStr for Shard {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Shard, PipelineError> {
        let bad = || PipelineError::BadShard(s.to_string());
        let (i, k) = s.split_once('/').ok_or_else(bad)?;
        let index: usize = i.trim().parse().map_err(|_| bad())?;
        let count: usize = k.trim().parse().map_err(|_| bad())?;
        if count == 0 || index >= count {
            return Err(bad());
        }
        Ok(Shard { index, count })
    }
}

impl fmt::Display for Shard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.index, self.count)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct StageConfig {
    /// Size of the output drawings.
    pub n: usize,
    pub max_cr: usize,
    pub mode: Mode,
    pub shard: Shard,
    /// Lower the budget to the parity class forced for odd `n`.
    pub parity: bool,
    pub extend: ExtendOptions,
    /// Worker threads; `None` uses every core.
    pub workers: Option<usize>,
}

impl StageConfig {
    pub fn new(n: usize, max_cr: usize) -> StageConfig {
        StageConfig {
            n,
            max_cr,
            mode: Mode::Alg1,
            shard: Shard::ALL,
            parity: true,
            extend: ExtendOptions::default(),
            workers: None,
        }
    }

    pub fn effective_budget(&self) -> usize {
        if self.parity && self.n % 2 == 1 && self.n >= 5 && self.max_cr > 0 {
            if let Ok(false) = parity_ok(self.n, self.max_cr as u64) {
                return self.max_cr - 1;
            }
        }
        self.max_cr
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct StageStats {
    pub n: usize,
    pub max_cr: usize,
    pub mode: String,
    pub shard: String,
    pub inputs: usize,
    /// Extensions produced before deduplication or filtering.
    pub raw: usize,
    pub outputs: usize,
    pub discarded: usize,
    pub errors: usize,
    pub fallbacks: usize,
    /// Summed per-input processing time across workers.
    pub cpu_seconds: f64,
    pub wall_seconds: f64,
    pub histogram: BTreeMap<usize, usize>,
}

impl StageStats {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "stage n={} max_cr={} mode={} shard={}",
            self.n, self.max_cr, self.mode, self.shard
        );
        for (k, v) in [
            ("inputs", self.inputs),
            ("raw", self.raw),
            ("outputs", self.outputs),
            ("discarded", self.discarded),
            ("errors", self.errors),
            ("fallbacks", self.fallbacks),
        ] {
            let _ = writeln!(s, "{k} {v}");
        }
        let _ = writeln!(s, "cpu_seconds {:.3}", self.cpu_seconds);
        let _ = writeln!(s, "wall_seconds {:.3}", self.wall_seconds);
        for (x, c) in &self.histogram {
            let _ = writeln!(s, "hist {x} {c}");
        }
        s
    }

    pub fn parse(text: &str) -> Result<StageStats, String> {
        let mut st = StageStats::default();
        let num = |v: &str| v.parse::<usize>().map_err(|e| format!("{v:?}: {e}"));
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let mut parts = line.split_whitespace();
            let key = parts.next().unwrap();
            let rest: Vec<&str> = parts.collect();
            match (key, rest.as_slice()) {
                ("stage", fields) => {
                    for f in fields {
                        let (k, v) = f.split_once('=').ok_or_else(|| format!("bad field {f:?}"))?;
                        match k {
                            "n" => st.n = num(v)?,
                            "max_cr" => st.max_cr = num(v)?,
                            "mode" => st.mode = v.to_string(),
                            "shard" => st.shard = v.to_string(),
                            _ => return Err(format!("unknown field {k:?}")),
                        }
                    }
                }
                ("inputs", [v]) => st.inputs = num(v)?,
                ("raw", [v]) => st.raw = num(v)?,
                ("outputs", [v]) => st.outputs = num(v)?,
                ("discarded", [v]) => st.discarded = num(v)?,
                ("errors", [v]) => st.errors = num(v)?,
                ("fallbacks", [v]) => st.fallbacks = num(v)?,
                ("cpu_seconds", [v]) => st.cpu_seconds = v.parse().map_err(|e| format!("{e}"))?,
                ("wall_seconds", [v]) => st.wall_seconds = v.parse().map_err(|e| format!("{e}"))?,
                ("hist", [x, c]) => {
                    st.histogram.insert(num(x)?, num(c)?);
                }
                _ => return Err(format!("unrecognized line {line:?}")),
            }
        }
        if st.n == 0 {
            return Err("missing stage line".into());
        }
        Ok(st)
    }
}

#[derive(Clone, Debug, Default)]
pub struct StageResult {
    /// Canonical forms sorted by code.
    pub drawings: Vec<(CanonicalCode, Drawing)>,
    pub errors: ErrorSet,
    pub stats: StageStats,
    /// Inputs that were skipped, with the reason.
    pub input_errors: Vec<String>,
}

impl StageResult {
    pub fn drawings_with(&self, crossings: usize) -> Vec<Drawing> {
        self.drawings
            .iter()
            .filter(|(_, d)| d.crossings() == crossings)
            .map(|(_, d)| d.clone())
            .collect()
    }
}

/// Output of one input drawing.
#[derive(Clone, Debug, Default)]
struct InputOutcome {
    drawings: Vec<(CanonicalCode, Drawing)>,
    errors: ErrorSet,
    raw: usize,
    discarded: usize,
    fallback: bool,
    seconds: f64,
}

fn process_input(base: &Drawing, cfg: &StageConfig) -> Result<InputOutcome, ExtendError> {
    let start = Instant::now();
    let c = cfg.effective_budget();
    let mut out = InputOutcome::default();
    match cfg.mode {
        Mode::Alg1 => {
            let mut seen = HashSet::new();
            for e in extend_all(base, c, cfg.extend)? {
                out.raw += 1;
                let (code, form) = canonical_form(&e.drawing);
                if seen.insert(code.clone()) {
                    out.drawings.push((code, form));
                }
            }
        }
        Mode::Alg2 => {
            let run = extend_representatives(base, c, None, cfg.extend)?;
            let new_vertex = base.n_real() + 1;
            let mut exts = run.extensions;
            if !run.errors.is_empty() {
                // Representatives could not be untangled: fall back to every
                // extension of this base.
                out.fallback = true;
                exts.extend(extend_all(base, c, cfg.extend)?);
            }
            out.errors = run.errors;
            for e in exts {
                out.raw += 1;
                if minimality_filter(&e.drawing, new_vertex, base.crossings()) {
                    out.drawings.push(canonical_form(&e.drawing));
                } else {
                    out.discarded += 1;
                }
            }
        }
    }
    out.seconds = start.elapsed().as_secs_f64();
    Ok(out)
}

fn check_input(d: &Drawing, cfg: &StageConfig) -> Result<(), String> {
    if d.n_real() + 1 != cfg.n {
        return Err(format!("drawing of K_{} cannot extend to K_{}", d.n_real(), cfg.n));
    }
    let report = validate(d);
    if !report.ok() {
        return Err(format!("invalid drawing: {:?}", report.violations));
    }
    Ok(())
}

fn with_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, PipelineError> {
    match workers {
        None => Ok(f()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .map_err(|e| PipelineError::Pool(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// Outcomes merged in input order.
fn assemble(cfg: &StageConfig, outcomes: Vec<InputOutcome>, inputs: usize, wall: f64) -> StageResult {
    let mut stats = StageStats {
        n: cfg.n,
        max_cr: cfg.effective_budget(),
        mode: cfg.mode.to_string(),
        shard: cfg.shard.to_string(),
        inputs,
        wall_seconds: wall,
        ..StageStats::default()
    };
    let mut errors = ErrorSet::default();
    let mut drawings: Vec<(CanonicalCode, Drawing)> = Vec::new();
    let mut unique: BTreeMap<CanonicalCode, Drawing> = BTreeMap::new();
    for o in outcomes {
        stats.raw += o.raw;
        stats.discarded += o.discarded;
        stats.fallbacks += o.fallback as usize;
        stats.cpu_seconds += o.seconds;
        errors.merge(o.errors);
        match cfg.mode {
            Mode::Alg1 => {
                for (code, d) in o.drawings {
                    unique.entry(code).or_insert(d);
                }
            }
            Mode::Alg2 => drawings.extend(o.drawings),
        }
    }
    if cfg.mode == Mode::Alg1 {
        drawings = unique.into_iter().collect();
    } else {
        drawings.sort_by(|a, b| a.0.cmp(&b.0));
    }
    stats.outputs = drawings.len();
    stats.errors = errors.len();
    for (_, d) in &drawings {
        *stats.histogram.entry(d.crossings()).or_default() += 1;
    }
    StageResult {
        drawings,
        errors,
        stats,
        input_errors: Vec::new(),
    }
}

/// Runs a stage over in-memory inputs (the shard's share only).
pub fn run_stage(inputs: &[Drawing], cfg: &StageConfig) -> Result<StageResult, PipelineError> {
    let start = Instant::now();
    let mut input_errors = Vec::new();
    let mine: Vec<&Drawing> = inputs
        .iter()
        .enumerate()
        .filter(|(j, _)| cfg.shard.contains(*j))
        .filter_map(|(j, d)| match check_input(d, cfg) {
            Ok(()) => Some(d),
            Err(e) => {
                input_errors.push(format!("input {j}: {e}"));
                None
            }
        })
        .collect();
    let outcomes: Result<Vec<InputOutcome>, ExtendError> =
        with_pool(cfg.workers, || mine.par_iter().map(|d| process_input(d, cfg)).collect())?;
    let mut result = assemble(cfg, outcomes?, mine.len(), start.elapsed().as_secs_f64());
    result.input_errors = input_errors;
    Ok(result)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn read_drawing_file(path: &Path) -> Result<(Vec<Drawing>, Vec<String>), PipelineError> {
    let f = File::open(path).map_err(io_err(path))?;
    let mut ok = Vec::new();
    let mut bad = Vec::new();
    for (i, r) in read_drawings(BufReader::new(f)).into_iter().enumerate() {
        match r {
            Ok(d) => ok.push(d),
            Err(e) => bad.push(format!("record {i}: {e}")),
        }
    }
    Ok((ok, bad))
}

pub fn write_drawing_file<'a>(path: &Path, ds: impl IntoIterator<Item = &'a Drawing>) -> Result<(), PipelineError> {
    let mut s = String::new();
    for d in ds {
        write_drawing_into(&mut s, d);
    }
    write_atomic(path, &s)
}

fn write_atomic(path: &Path, text: &str) -> Result<(), PipelineError> {
    let tmp = sibling(path, ".tmp");
    fs::write(&tmp, text).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn journal_path(out: &Path) -> PathBuf {
    sibling(out, ".partial")
}

pub fn stats_path(out: &Path) -> PathBuf {
    sibling(out, ".stats")
}

pub fn errors_path(out: &Path) -> PathBuf {
    sibling(out, ".errors")
}

/// Completed inputs recorded in a journal. Each block holds the input's
/// output drawings, its error records as `# E ...` lines, and ends with
/// `# done <input> raw=<r> discarded=<d> fallback=<0|1> secs=<s>`.
fn load_journal(path: &Path) -> BTreeMap<usize, InputOutcome> {
    let Ok(text) = fs::read_to_string(path) else {
        return BTreeMap::new();
    };
    let mut done = BTreeMap::new();
    let mut block = String::new();
    let mut errors = ErrorSet::default();
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("# done ") {
            let mut fields = rest.split_whitespace();
            let parsed = (|| {
                let idx: usize = fields.next()?.parse().ok()?;
                let mut o = InputOutcome::default();
                for f in fields {
                    let (k, v) = f.split_once('=')?;
                    match k {
                        "raw" => o.raw = v.parse().ok()?,
                        "discarded" => o.discarded = v.parse().ok()?,
                        "fallback" => o.fallback = v == "1",
                        "secs" => o.seconds = v.parse().ok()?,
                        _ => return None,
                    }
                }
                let ds: Result<Vec<Drawing>, _> = parse_drawings(&block).into_iter().collect();
                o.drawings = ds.ok()?.into_iter().map(|d| canonical_form(&d)).collect();
                Some((idx, o))
            })();
            if let Some((idx, mut o)) = parsed {
                o.errors = std::mem::take(&mut errors);
                done.insert(idx, o);
            }
            block.clear();
            errors = ErrorSet::default();
        } else if let Some(rec) = line.strip_prefix("# ").and_then(ErrorRecord::parse) {
            errors.push(rec);
        } else {
            block.push_str(line);
            block.push('\n');
        }
    }
    // A trailing block without its marker was cut off and is redone.
    done
}

fn journal_block(idx: usize, o: &InputOutcome) -> String {
    let mut s = String::new();
    for (_, d) in &o.drawings {
        write_drawing_into(&mut s, d);
    }
    for r in o.errors.records() {
        let _ = writeln!(s, "# {r}");
    }
    let _ = writeln!(
        s,
        "# done {idx} raw={} discarded={} fallback={} secs={:.6}",
        o.raw, o.discarded, o.fallback as u8, o.seconds
    );
    s
}

/// Runs a stage from a file, journaling every finished input so that an
/// interrupted run resumes where it stopped. Writes the output, its stats and
/// its error records, then removes the journal.
pub fn run_stage_file(input: &Path, output: &Path, cfg: &StageConfig) -> Result<StageResult, PipelineError> {
    let start = Instant::now();
    let (inputs, mut input_errors) = read_drawing_file(input)?;
    let journal = journal_path(output);
    let mut done = load_journal(&journal);
    // Rewrite the journal with only its complete blocks.
    {
        let mut s = String::new();
        for (idx, o) in &done {
            s.push_str(&journal_block(*idx, o));
        }
        fs::write(&journal, s).map_err(io_err(&journal))?;
    }
    let mut pending = Vec::new();
    let mut total = 0;
    for (j, d) in inputs.iter().enumerate() {
        if !cfg.shard.contains(j) {
            continue;
        }
        match check_input(d, cfg) {
            Ok(()) => {
                total += 1;
                if !done.contains_key(&j) {
                    pending.push(j);
                }
            }
            Err(e) => input_errors.push(format!("input {j}: {e}")),
        }
    }
    let file = OpenOptions::new().append(true).open(&journal).map_err(io_err(&journal))?;
    let file = Mutex::new(file);
    let fresh: Result<Vec<(usize, InputOutcome)>, PipelineError> = with_pool(cfg.workers, || {
        pending
            .par_iter()
            .map(|&j| {
                let o = process_input(&inputs[j], cfg)?;
                let block = journal_block(j, &o);
                let mut f = file.lock().unwrap();
                f.write_all(block.as_bytes())
                    .and_then(|_| f.flush())
                    .map_err(io_err(&journal))?;
                Ok((j, o))
            })
            .collect()
    })?;
    done.extend(fresh?);
    let mut result = assemble(cfg, done.into_values().collect(), total, start.elapsed().as_secs_f64());
    result.input_errors = input_errors;
    write_drawing_file(output, result.drawings.iter().map(|(_, d)| d))?;
    write_atomic(&stats_path(output), &result.stats.to_text())?;
    write_atomic(&errors_path(output), &result.errors.to_text())?;
    fs::remove_file(&journal).map_err(io_err(&journal))?;
    Ok(result)
}

/// Union of shard outputs, deduplicated when every part came from `alg1`.
pub fn merge_outputs(parts: &[PathBuf], output: &Path, dedup: bool) -> Result<StageStats, PipelineError> {
    let mut stats: Option<StageStats> = None;
    let mut unique: BTreeMap<CanonicalCode, Drawing> = BTreeMap::new();
    let mut all: Vec<(CanonicalCode, Drawing)> = Vec::new();
    let mut errors = String::new();
    for part in parts {
        let (ds, bad) = read_drawing_file(part)?;
        if let Some(b) = bad.first() {
            return Err(PipelineError::BadStats {
                path: part.display().to_string(),
                msg: b.clone(),
            });
        }
        for d in ds {
            let (code, form) = canonical_form(&d);
            if dedup {
                unique.entry(code).or_insert(form);
            } else {
                all.push((code, form));
            }
        }
        let sp = stats_path(part);
        if let Ok(text) = fs::read_to_string(&sp) {
            let st = StageStats::parse(&text).map_err(|msg| PipelineError::BadStats {
                path: sp.display().to_string(),
                msg,
            })?;
            stats = Some(match stats {
                None => st,
                Some(mut acc) => {
                    acc.inputs += st.inputs;
                    acc.raw += st.raw;
                    acc.discarded += st.discarded;
                    acc.errors += st.errors;
                    acc.fallbacks += st.fallbacks;
                    acc.cpu_seconds += st.cpu_seconds;
                    acc.wall_seconds = acc.wall_seconds.max(st.wall_seconds);
                    acc
                }
            });
        }
        if let Ok(text) = fs::read_to_string(errors_path(part)) {
            errors.push_str(&text);
        }
    }
    if dedup {
        all = unique.into_iter().collect();
    } else {
        all.sort_by(|a, b| a.0.cmp(&b.0));
    }
    let mut st = stats.unwrap_or_default();
    st.shard = "merged".into();
    st.outputs = all.len();
    st.histogram.clear();
    for (_, d) in &all {
        *st.histogram.entry(d.crossings()).or_default() += 1;
        if st.n == 0 {
            st.n = d.n_real();
        }
    }
    write_drawing_file(output, all.iter().map(|(_, d)| d))?;
    write_atomic(&stats_path(output), &st.to_text())?;
    write_atomic(&errors_path(output), &errors)?;
    Ok(st)
}

/// Rows of drawing set, count and time, one block per stage run.
pub fn stats_table(runs: &[StageStats]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<12} {:>12}  cost of time", "drawings", "# drawings");
    let mut sorted: Vec<&StageStats> = runs.iter().collect();
    sorted.sort_by_key(|r| (r.n, r.max_cr));
    for run in sorted {
        for (i, (x, count)) in run.histogram.iter().enumerate() {
            let name = stage_name(&Stage {
                n: run.n,
                min_crossings: *x as u64,
                max_crossings: *x as u64,
            });
            let time = if i == 0 { format_seconds(run.cpu_seconds) } else { String::new() };
            let _ = writeln!(s, "{name:<12} {count:>12}  {time}");
        }
    }
    s
}

fn format_seconds(secs: f64) -> String {
    if secs < 60.0 {
        format!("{secs:.2} seconds")
    } else if secs < 3600.0 {
        format!("{:.1} minutes", secs / 60.0)
    } else {
        format!("{:.1} hours", secs / 3600.0)
    }
}

/// Every stats file directly inside the given directories.
pub fn collect_stats(dirs: &[PathBuf]) -> Result<Vec<StageStats>, PipelineError> {
    let mut out = Vec::new();
    for dir in dirs {
        let mut files: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(io_err(dir))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "stats"))
            .collect();
        files.sort();
        for f in files {
            let text = fs::read_to_string(&f).map_err(io_err(&f))?;
            out.push(StageStats::parse(&text).map_err(|msg| PipelineError::BadStats {
                path: f.display().to_string(),
                msg,
            })?);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RecordReport {
    pub index: usize,
    pub n: usize,
    pub crossings: usize,
    pub problems: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VerifyReport {
    pub records: Vec<RecordReport>,
    pub parse_errors: Vec<String>,
    /// Crossing-count parities seen per odd `n`.
    pub mixed_parity: Vec<usize>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.parse_errors.is_empty() && self.mixed_parity.is_empty() && self.records.iter().all(|r| r.problems.is_empty())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for e in &self.parse_errors {
            let _ = writeln!(s, "parse error: {e}");
        }
        for r in &self.records {
            for p in &r.problems {
                let _ = writeln!(s, "record {} (K_{}, {} crossings): {p}", r.index, r.n, r.crossings);
            }
        }
        for n in &self.mixed_parity {
            let _ = writeln!(s, "K_{n}: crossing counts of both parities");
        }
        let bad = self.records.iter().filter(|r| !r.problems.is_empty()).count();
        let _ = writeln!(
            s,
            "{} records, {} with problems, {} parse errors: {}",
            self.records.len(),
            bad,
            self.parse_errors.len(),
            if self.ok() { "ok" } else { "FAILED" }
        );
        s
    }
}

pub fn verify_drawing(d: &Drawing) -> Vec<String> {
    let mut problems = Vec::new();
    let report = validate(d);
    if !report.ok() {
        problems.extend(report.violations.iter().map(|v| format!("{v:?}")));
        return problems;
    }
    let pairs = d.crossing_pairs().len();
    if pairs != d.crossings() {
        problems.push(format!("header says {} crossings, found {pairs} crossing pairs", d.crossings()));
    }
    let n = d.n_real();
    if n >= 5 {
        let mut sum = 0;
        for v in 1..=n {
            match d.delete_vertex(v) {
                Ok(sub) => sum += sub.crossings(),
                Err(e) => problems.push(format!("deleting {v}: {e}")),
            }
        }
        if sum != (n - 4) * d.crossings() {
            problems.push(format!(
                "deletions sum to {sum}, expected {} = ({n} - 4) * {}",
                (n - 4) * d.crossings(),
                d.crossings()
            ));
        }
    }
    if n % 2 == 1 && n >= 5 && !parity_ok(n, d.crossings() as u64).unwrap_or(true) {
        problems.push(format!("{} crossings has the wrong parity for K_{n}", d.crossings()));
    }
    problems
}

pub fn verify_text(text: &str) -> VerifyReport {
    let mut report = VerifyReport::default();
    let mut parities: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for (i, r) in parse_drawings(text).into_iter().enumerate() {
        match r {
            Ok(d) => {
                if d.n_real() % 2 == 1 {
                    parities.entry(d.n_real()).or_default().insert(d.crossings() % 2);
                }
                report.records.push(RecordReport {
                    index: i,
                    n: d.n_real(),
                    crossings: d.crossings(),
                    problems: verify_drawing(&d),
                });
            }
            Err(e) => report.parse_errors.push(format!("record {i}: {e}")),
        }
    }
    report.mixed_parity = parities.into_iter().filter(|(_, p)| p.len() > 1).map(|(n, _)| n).collect();
    report
}

pub fn verify_file(path: &Path) -> Result<VerifyReport, PipelineError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    Ok(verify_text(&text))
}

/// Runs the plan's stages from the seed up to `K_{up_to}` in memory. Each
/// stage extends the previous stage's drawings within its crossing range.
pub fn run_chain(plan: &StagePlan, up_to: usize, template: &StageConfig) -> Result<Vec<StageResult>, PipelineError> {
    let mut current = vec![seed_k4()];
    let mut results = Vec::new();
    for n in 5..=up_to {
        let stage = plan.stage(n).copied().unwrap_or(Stage {
            n,
            min_crossings: 0,
            max_crossings: plan.target_cr,
        });
        let cfg = StageConfig {
            n,
            max_cr: stage.max_crossings as usize,
            shard: Shard::ALL,
            ..*template
        };
        let res = run_stage(&current, &cfg)?;
        current = res
            .drawings
            .iter()
            .filter(|(_, d)| (stage.min_crossings..=stage.max_crossings).contains(&(d.crossings() as u64)))
            .map(|(_, d)| d.clone())
            .collect();
        results.push(res);
    }
    Ok(results)
}
