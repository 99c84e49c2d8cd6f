//! Run configuration: algorithm identifiers, per-algorithm search settings
//! and a flat `[section] key = value` config file format that round-trips
//! through text.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use crate::cost::CostModel;
use crate::error::{Error, Result};
use crate::metrics::{DistortionMode, DEFAULT_EXACT_THRESHOLD};
use crate::search::{PruneScope, SearchParams};
use crate::synth::{CoeffDist, EnsembleSpec, MatrixKind, MatrixSharing};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AlgoId {
    Omp,
    Sp,
    AddAomp,
    AdapAomp,
    MulAomp,
}

impl AlgoId {
    pub fn as_str(&self) -> &'static str {
        match self {
            AlgoId::Omp => "omp",
            AlgoId::Sp => "sp",
            AlgoId::AddAomp => "add-aomp",
            AlgoId::AdapAomp => "adap-aomp",
            AlgoId::MulAomp => "mul-aomp",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "omp" => Ok(AlgoId::Omp),
            "sp" => Ok(AlgoId::Sp),
            "add-aomp" => Ok(AlgoId::AddAomp),
            "adap-aomp" => Ok(AlgoId::AdapAomp),
            "mul-aomp" => Ok(AlgoId::MulAomp),
            other => Err(Error::Parse(format!(
                "unknown algorithm '{other}' (expected omp|sp|add-aomp|adap-aomp|mul-aomp)"
            ))),
        }
    }

    pub fn is_tree_search(&self) -> bool {
        matches!(self, AlgoId::AddAomp | AlgoId::AdapAomp | AlgoId::MulAomp)
    }
}

/// Search-parameter knobs shared by the tree-search variants.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgoSettings {
    pub initial_paths: usize,
    pub extensions: usize,
    pub beam_width: usize,
    pub alpha: f64,
    pub beta: f64,
    pub max_iterations: Option<u64>,
    pub residue_stop: Option<f64>,
    pub live_slot_pruning: bool,
}

impl Default for AlgoSettings {
    fn default() -> Self {
        Self {
            initial_paths: 3,
            extensions: 2,
            beam_width: 200,
            alpha: 0.8,
            beta: 1.25,
            max_iterations: None,
            residue_stop: None,
            live_slot_pruning: false,
        }
    }
}

impl AlgoSettings {
    pub fn cost_model(&self, id: AlgoId) -> Option<CostModel> {
        match id {
            AlgoId::AddAomp => Some(CostModel::Additive { beta: self.beta }),
            AlgoId::AdapAomp => Some(CostModel::Adaptive { beta: self.beta }),
            AlgoId::MulAomp => Some(CostModel::Multiplicative { alpha: self.alpha }),
            AlgoId::Omp | AlgoId::Sp => None,
        }
    }

    pub fn search_params(&self, id: AlgoId, sparsity: usize) -> Option<SearchParams> {
        let model = self.cost_model(id)?;
        let mut params = SearchParams::new(sparsity, model).with_geometry(
            self.initial_paths,
            self.extensions,
            self.beam_width,
        );
        if let Some(cap) = self.max_iterations {
            params.max_iterations = cap;
        }
        params.residue_stop = self.residue_stop;
        if self.live_slot_pruning {
            params.prune_scope = PruneScope::LiveSlots;
        }
        Some(params)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgoConfig {
    pub id: AlgoId,
    pub settings: AlgoSettings,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Sparsity,
    ObsLen,
    Alpha,
    Extensions,
    BeamWidth,
    Snr,
}

impl SweepAxis {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepAxis::Sparsity => "K",
            SweepAxis::ObsLen => "M",
            SweepAxis::Alpha => "alpha",
            SweepAxis::Extensions => "B",
            SweepAxis::BeamWidth => "P",
            SweepAxis::Snr => "snr",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "K" => Ok(SweepAxis::Sparsity),
            "M" => Ok(SweepAxis::ObsLen),
            "alpha" => Ok(SweepAxis::Alpha),
            "B" => Ok(SweepAxis::Extensions),
            "P" => Ok(SweepAxis::BeamWidth),
            "snr" => Ok(SweepAxis::Snr),
            other => {
                Err(Error::Parse(format!("unknown sweep axis '{other}' (K|M|alpha|B|P|snr)")))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub ensemble: EnsembleSpec,
    pub algorithms: Vec<AlgoConfig>,
    pub sweep: Option<(SweepAxis, Vec<f64>)>,
    pub output_dir: PathBuf,
    pub jobs: usize,
    /// When false (the default) the trials.csv runtime column is written as
    /// zero so outputs stay byte-identical across runs.
    pub record_runtime: bool,
    pub exact_threshold: f64,
    pub distortion_mode: DistortionMode,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            ensemble: EnsembleSpec {
                signal_len: 256,
                obs_len: 100,
                sparsity: 10,
                coeff_dist: CoeffDist::Uniform,
                matrix_kind: MatrixKind::Gaussian,
                matrix_sharing: MatrixSharing::PerSample,
                trials: 500,
                seed: 0,
                snr_db: None,
                normalize_columns: false,
            },
            algorithms: vec![AlgoConfig { id: AlgoId::MulAomp, settings: AlgoSettings::default() }],
            sweep: None,
            output_dir: PathBuf::from("out"),
            jobs: 1,
            record_runtime: false,
            exact_threshold: DEFAULT_EXACT_THRESHOLD,
            distortion_mode: DistortionMode::DbOfMean,
        }
    }
}

fn dist_str(d: CoeffDist) -> &'static str {
    match d {
        CoeffDist::Uniform => "uniform",
        CoeffDist::Gaussian => "gaussian",
        CoeffDist::Binary => "binary",
    }
}

pub fn parse_dist(s: &str) -> Result<CoeffDist> {
    match s {
        "uniform" => Ok(CoeffDist::Uniform),
        "gaussian" => Ok(CoeffDist::Gaussian),
        "binary" => Ok(CoeffDist::Binary),
        other => Err(Error::Parse(format!(
            "unknown coefficient distribution '{other}' (uniform|gaussian|binary)"
        ))),
    }
}

fn matrix_str(m: MatrixKind) -> &'static str {
    match m {
        MatrixKind::Gaussian => "gaussian",
        MatrixKind::Bernoulli => "bernoulli",
    }
}

pub fn parse_matrix(s: &str) -> Result<MatrixKind> {
    match s {
        "gaussian" => Ok(MatrixKind::Gaussian),
        "bernoulli" => Ok(MatrixKind::Bernoulli),
        other => Err(Error::Parse(format!("unknown matrix kind '{other}' (gaussian|bernoulli)"))),
    }
}

fn sharing_str(m: MatrixSharing) -> &'static str {
    match m {
        MatrixSharing::PerSample => "per_sample",
        MatrixSharing::Shared => "shared",
    }
}

pub fn parse_sharing(s: &str) -> Result<MatrixSharing> {
    match s {
        "per_sample" => Ok(MatrixSharing::PerSample),
        "shared" => Ok(MatrixSharing::Shared),
        other => {
            Err(Error::Parse(format!("unknown matrix sharing '{other}' (per_sample|shared)")))
        }
    }
}

fn mode_str(m: DistortionMode) -> &'static str {
    match m {
        DistortionMode::DbOfMean => "db_of_mean",
        DistortionMode::MeanOfDb => "mean_of_db",
    }
}

fn parse_mode(s: &str) -> Result<DistortionMode> {
    match s {
        "db_of_mean" => Ok(DistortionMode::DbOfMean),
        "mean_of_db" => Ok(DistortionMode::MeanOfDb),
        other => {
            Err(Error::Parse(format!("unknown distortion mode '{other}' (db_of_mean|mean_of_db)")))
        }
    }
}

impl RunConfig {
    /// Canonical text form; `parse_str` of the result reproduces `self`.
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let e = &self.ensemble;
        writeln!(s, "[ensemble]").unwrap();
        writeln!(s, "n = {}", e.signal_len).unwrap();
        writeln!(s, "m = {}", e.obs_len).unwrap();
        writeln!(s, "k = {}", e.sparsity).unwrap();
        writeln!(s, "dist = {}", dist_str(e.coeff_dist)).unwrap();
        writeln!(s, "matrix = {}", matrix_str(e.matrix_kind)).unwrap();
        writeln!(s, "sharing = {}", sharing_str(e.matrix_sharing)).unwrap();
        writeln!(s, "trials = {}", e.trials).unwrap();
        writeln!(s, "seed = {}", e.seed).unwrap();
        if let Some(snr) = e.snr_db {
            writeln!(s, "snr_db = {snr}").unwrap();
        }
        writeln!(s, "normalize_columns = {}", e.normalize_columns).unwrap();

        writeln!(s, "\n[algorithms]").unwrap();
        let ids: Vec<&str> = self.algorithms.iter().map(|a| a.id.as_str()).collect();
        writeln!(s, "algos = {}", ids.join(",")).unwrap();

        let base = AlgoSettings::default();
        let global =
            self.algorithms.first().map(|a| a.settings.clone()).unwrap_or_else(|| base.clone());
        writeln!(s, "\n[search]").unwrap();
        write_settings(&mut s, &global, None);
        for algo in &self.algorithms {
            if algo.settings != global {
                writeln!(s, "\n[search.{}]", algo.id.as_str()).unwrap();
                write_settings(&mut s, &algo.settings, Some(&global));
            }
        }

        if let Some((axis, values)) = &self.sweep {
            writeln!(s, "\n[sweep]").unwrap();
            writeln!(s, "axis = {}", axis.as_str()).unwrap();
            let vals: Vec<String> = values.iter().map(|v| v.to_string()).collect();
            writeln!(s, "values = {}", vals.join(",")).unwrap();
        }

        writeln!(s, "\n[output]").unwrap();
        writeln!(s, "dir = {}", self.output_dir.display()).unwrap();
        writeln!(s, "jobs = {}", self.jobs).unwrap();
        writeln!(s, "record_runtime = {}", self.record_runtime).unwrap();
        writeln!(s, "exact_threshold = {}", self.exact_threshold).unwrap();
        writeln!(s, "distortion_mode = {}", mode_str(self.distortion_mode)).unwrap();
        s
    }

    pub fn parse_str(text: &str) -> Result<Self> {
        let mut section = String::new();
        let mut entries: BTreeMap<(String, String), String> = BTreeMap::new();
        for (lineno, raw_line) in text.lines().enumerate() {
            let line = match raw_line.find('#') {
                Some(idx) => &raw_line[..idx],
                None => raw_line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Parse(format!("line {}: expected 'key = value'", lineno + 1))
            })?;
            entries.insert(
                (section.clone(), key.trim().to_string()),
                value.trim().to_string(),
            );
        }

        let mut config = RunConfig::default();
        let get = |sec: &str, key: &str| entries.get(&(sec.to_string(), key.to_string()));

        {
            let e = &mut config.ensemble;
            if let Some(v) = get("ensemble", "n") {
                e.signal_len = parse_num(v, "ensemble.n")?;
            }
            if let Some(v) = get("ensemble", "m") {
                e.obs_len = parse_num(v, "ensemble.m")?;
            }
            if let Some(v) = get("ensemble", "k") {
                e.sparsity = parse_num(v, "ensemble.k")?;
            }
            if let Some(v) = get("ensemble", "dist") {
                e.coeff_dist = parse_dist(v)?;
            }
            if let Some(v) = get("ensemble", "matrix") {
                e.matrix_kind = parse_matrix(v)?;
            }
            if let Some(v) = get("ensemble", "sharing") {
                e.matrix_sharing = parse_sharing(v)?;
            }
            if let Some(v) = get("ensemble", "trials") {
                e.trials = parse_num(v, "ensemble.trials")?;
            }
            if let Some(v) = get("ensemble", "seed") {
                e.seed = parse_num(v, "ensemble.seed")?;
            }
            if let Some(v) = get("ensemble", "snr_db") {
                e.snr_db = Some(parse_num(v, "ensemble.snr_db")?);
            }
            if let Some(v) = get("ensemble", "normalize_columns") {
                e.normalize_columns = parse_bool(v, "ensemble.normalize_columns")?;
            }
        }

        let mut global = AlgoSettings::default();
        read_settings(&mut global, "search", &get)?;

        let algo_list = get("algorithms", "algos")
            .map(|v| v.as_str())
            .unwrap_or("mul-aomp");
        let mut algorithms = Vec::new();
        for token in algo_list.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let id = AlgoId::parse(token)?;
            let mut settings = global.clone();
            read_settings(&mut settings, &format!("search.{token}"), &get)?;
            algorithms.push(AlgoConfig { id, settings });
        }
        if algorithms.is_empty() {
            return Err(Error::Parse("config must list at least one algorithm".into()));
        }
        config.algorithms = algorithms;

        config.sweep = match (get("sweep", "axis"), get("sweep", "values")) {
            (Some(axis), Some(values)) => {
                let axis = SweepAxis::parse(axis)?;
                let values: Vec<f64> = values
                    .split(',')
                    .map(str::trim)
                    .filter(|t| !t.is_empty())
                    .map(|t| parse_num::<f64>(t, "sweep.values"))
                    .collect::<Result<_>>()?;
                if values.is_empty() {
                    return Err(Error::Parse("sweep.values must be non-empty".into()));
                }
                Some((axis, values))
            }
            (None, None) => None,
            _ => return Err(Error::Parse("sweep needs both 'axis' and 'values'".into())),
        };

        if let Some(v) = get("output", "dir") {
            config.output_dir = PathBuf::from(v);
        }
        if let Some(v) = get("output", "jobs") {
            config.jobs = parse_num(v, "output.jobs")?;
        }
        if let Some(v) = get("output", "record_runtime") {
            config.record_runtime = parse_bool(v, "output.record_runtime")?;
        }
        if let Some(v) = get("output", "exact_threshold") {
            config.exact_threshold = parse_num(v, "output.exact_threshold")?;
        }
        if let Some(v) = get("output", "distortion_mode") {
            config.distortion_mode = parse_mode(v)?;
        }
        Ok(config)
    }
}

fn write_settings(s: &mut String, settings: &AlgoSettings, relative_to: Option<&AlgoSettings>) {
    // In an override section only the deviating keys are written.
    let write_all = relative_to.is_none();
    let base = relative_to.cloned().unwrap_or_default();
    if write_all || settings.initial_paths != base.initial_paths {
        writeln!(s, "i = {}", settings.initial_paths).unwrap();
    }
    if write_all || settings.extensions != base.extensions {
        writeln!(s, "b = {}", settings.extensions).unwrap();
    }
    if write_all || settings.beam_width != base.beam_width {
        writeln!(s, "p = {}", settings.beam_width).unwrap();
    }
    if write_all || settings.alpha != base.alpha {
        writeln!(s, "alpha = {}", settings.alpha).unwrap();
    }
    if write_all || settings.beta != base.beta {
        writeln!(s, "beta = {}", settings.beta).unwrap();
    }
    if let Some(v) = settings.max_iterations {
        if write_all || settings.max_iterations != base.max_iterations {
            writeln!(s, "max_iterations = {v}").unwrap();
        }
    }
    if let Some(v) = settings.residue_stop {
        if write_all || settings.residue_stop != base.residue_stop {
            writeln!(s, "residue_stop = {v}").unwrap();
        }
    }
    if write_all || settings.live_slot_pruning != base.live_slot_pruning {
        writeln!(s, "live_slot_pruning = {}", settings.live_slot_pruning).unwrap();
    }
}

fn read_settings<'a, F>(settings: &mut AlgoSettings, section: &str, get: &F) -> Result<()>
where
    F: Fn(&str, &str) -> Option<&'a String>,
{
    if let Some(v) = get(section, "i") {
        settings.initial_paths = parse_num(v, "search.i")?;
    }
    if let Some(v) = get(section, "b") {
        settings.extensions = parse_num(v, "search.b")?;
    }
    if let Some(v) = get(section, "p") {
        settings.beam_width = parse_num(v, "search.p")?;
    }
    if let Some(v) = get(section, "alpha") {
        settings.alpha = parse_num(v, "search.alpha")?;
    }
    if let Some(v) = get(section, "beta") {
        settings.beta = parse_num(v, "search.beta")?;
    }
    if let Some(v) = get(section, "max_iterations") {
        settings.max_iterations = Some(parse_num(v, "search.max_iterations")?);
    }
    if let Some(v) = get(section, "residue_stop") {
        settings.residue_stop = Some(parse_num(v, "search.residue_stop")?);
    }
    if let Some(v) = get(section, "live_slot_pruning") {
        settings.live_slot_pruning = parse_bool(v, "search.live_slot_pruning")?;
    }
    Ok(())
}

fn parse_num<T: std::str::FromStr>(v: &str, what: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Parse(format!("bad value '{v}' for {what}")))
}

fn parse_bool(v: &str, what: &str) -> Result<bool> {
    match v {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(Error::Parse(format!("bad boolean '{v}' for {what}"))),
    }
}

/// Parses compact generation specs like `N=64,M=32,K=5`.
pub fn parse_gen_spec(s: &str) -> Result<(usize, usize, usize)> {
    let (mut n, mut m, mut k) = (None, None, None);
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("bad gen spec component '{part}'")))?;
        let value: usize = parse_num(value.trim(), key)?;
        match key.trim() {
            "N" | "n" => n = Some(value),
            "M" | "m" => m = Some(value),
            "K" | "k" => k = Some(value),
            other => return Err(Error::Parse(format!("unknown gen spec key '{other}'"))),
        }
    }
    match (n, m, k) {
        (Some(n), Some(m), Some(k)) => Ok((n, m, k)),
        _ => Err(Error::Parse("gen spec must provide N, M and K".into())),
    }
}
