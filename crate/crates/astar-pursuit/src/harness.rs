//! Benchmark execution: runs algorithm suites over seeded ensembles, in
//! parallel when asked, with trial-index-ordered output so results are
//! byte-identical under any worker count.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use crate::baselines::{recover_omp_with, recover_sp, OmpOptions};
use crate::config::{AlgoConfig, AlgoId, RunConfig, SweepAxis};
use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::metrics::{
    misidentified, nmse, summary_csv_row, trial_csv_row, EnsembleSummary, TrialRecord,
    SUMMARY_CSV_HEADER, TRIALS_CSV_HEADER,
};
use crate::search::{recover_astar_omp, SearchTrace, Termination};
use crate::synth::{MatrixSharing, ProblemInstance};

/// Uniform view over one algorithm run, whatever the solver.
#[derive(Debug)]
pub struct AlgoRunOutput {
    pub x_hat: Vector,
    pub support: Vec<usize>,
    pub residue_norm: f64,
    pub iterations: u64,
    pub equivalent_prunes: u64,
    pub converged: bool,
    pub termination: Option<Termination>,
    pub trace: Option<SearchTrace>,
}

pub fn run_algorithm(
    problem: &ProblemInstance,
    algo: &AlgoConfig,
    record_trace: bool,
) -> Result<AlgoRunOutput> {
    match algo.id {
        AlgoId::Omp => {
            let opts = OmpOptions { residue_stop: algo.settings.residue_stop };
            let r = recover_omp_with(problem, problem.sparsity, &opts)?;
            Ok(AlgoRunOutput {
                x_hat: r.x_hat,
                support: r.support,
                residue_norm: r.residue_norm,
                iterations: r.iterations,
                equivalent_prunes: 0,
                converged: true,
                termination: None,
                trace: None,
            })
        }
        AlgoId::Sp => {
            let r = recover_sp(problem, problem.sparsity)?;
            Ok(AlgoRunOutput {
                x_hat: r.x_hat,
                support: r.support,
                residue_norm: r.residue_norm,
                iterations: r.iterations,
                equivalent_prunes: 0,
                converged: true,
                termination: None,
                trace: None,
            })
        }
        AlgoId::AddAomp | AlgoId::AdapAomp | AlgoId::MulAomp => {
            let mut params = algo
                .settings
                .search_params(algo.id, problem.sparsity)
                .expect("tree-search id always yields params");
            params.record_trace = record_trace;
            let r = recover_astar_omp(problem, &params)?;
            Ok(AlgoRunOutput {
                x_hat: r.x_hat,
                support: r.support,
                residue_norm: r.residue_norm,
                iterations: r.iterations,
                equivalent_prunes: r.equivalent_prunes,
                converged: r.terminated_by != Termination::IterationCap,
                termination: Some(r.terminated_by),
                trace: r.trace,
            })
        }
    }
}

pub fn true_support(x_true: &Vector) -> Vec<usize> {
    x_true
        .as_slice()
        .iter()
        .enumerate()
        .filter_map(|(i, &v)| (v != 0.0).then_some(i))
        .collect()
}

fn run_trial(config: &RunConfig, trial: usize, shared: Option<&crate::linalg::Matrix>) -> Result<Vec<TrialRecord>> {
    let problem = config.ensemble.instance(trial, shared)?;
    let x_true = problem
        .x_true
        .as_ref()
        .ok_or_else(|| Error::InvalidParams("benchmark requires ground truth".into()))?
        .clone();
    let support_true = true_support(&x_true);
    let mut records = Vec::with_capacity(config.algorithms.len());
    for algo in &config.algorithms {
        let started = Instant::now();
        let out = run_algorithm(&problem, algo, false)?;
        let runtime = if config.record_runtime {
            started.elapsed().as_secs_f64()
        } else {
            0.0
        };
        let trial_nmse = nmse(x_true.as_slice(), out.x_hat.as_slice())?;
        records.push(TrialRecord {
            trial,
            algo: algo.id.as_str().to_string(),
            sparsity: config.ensemble.sparsity,
            obs_len: config.ensemble.obs_len,
            signal_len: config.ensemble.signal_len,
            nmse: trial_nmse,
            exact: trial_nmse <= config.exact_threshold,
            misidentified: misidentified(&support_true, &out.support),
            iterations: out.iterations,
            equivalent_prunes: out.equivalent_prunes,
            runtime_seconds: runtime,
        });
    }
    Ok(records)
}

#[derive(Debug)]
pub struct BenchmarkOutput {
    /// Trial-major, algorithm order within each trial as configured.
    pub records: Vec<TrialRecord>,
    /// One summary per configured algorithm, in configuration order.
    pub summaries: Vec<EnsembleSummary>,
}

/// Runs `trials x algorithms`. `progress` receives (done, total) after each
/// trial completes (in completion order; the records themselves are ordered
/// by trial index).
pub fn run_benchmark(
    config: &RunConfig,
    progress: &mut (dyn FnMut(usize, usize) + Send),
) -> Result<BenchmarkOutput> {
    config.ensemble.validate()?;
    if config.algorithms.is_empty() {
        return Err(Error::InvalidParams("at least one algorithm is required".into()));
    }
    let shared = match config.ensemble.matrix_sharing {
        MatrixSharing::Shared => Some(config.ensemble.shared_matrix()),
        MatrixSharing::PerSample => None,
    };
    let trials = config.ensemble.trials;
    let jobs = config.jobs.max(1).min(trials.max(1));

    let mut per_trial: Vec<Option<Vec<TrialRecord>>> = (0..trials).map(|_| None).collect();
    if jobs <= 1 {
        for (t, slot) in per_trial.iter_mut().enumerate() {
            *slot = Some(run_trial(config, t, shared.as_ref())?);
            progress(t + 1, trials);
        }
    } else {
        let next = AtomicUsize::new(0);
        let done = AtomicUsize::new(0);
        let slots = Mutex::new(&mut per_trial);
        let failure: Mutex<Option<Error>> = Mutex::new(None);
        let progress = Mutex::new(progress);
        std::thread::scope(|scope| {
            for _ in 0..jobs {
                scope.spawn(|| loop {
                    if failure.lock().unwrap().is_some() {
                        return;
                    }
                    let t = next.fetch_add(1, Ordering::Relaxed);
                    if t >= trials {
                        return;
                    }
                    match run_trial(config, t, shared.as_ref()) {
                        Ok(records) => {
                            slots.lock().unwrap()[t] = Some(records);
                            let finished = done.fetch_add(1, Ordering::Relaxed) + 1;
                            (progress.lock().unwrap())(finished, trials);
                        }
                        Err(e) => {
                            failure.lock().unwrap().get_or_insert(e);
                        }
                    }
                });
            }
        });
        if let Some(e) = failure.into_inner().unwrap() {
            return Err(e);
        }
    }

    let mut records = Vec::with_capacity(trials * config.algorithms.len());
    for slot in per_trial {
        records.extend(slot.expect("every trial ran"));
    }
    let summaries = config
        .algorithms
        .iter()
        .map(|algo| {
            let algo_records: Vec<TrialRecord> =
                records.iter().filter(|r| r.algo == algo.id.as_str()).cloned().collect();
            EnsembleSummary::from_records(&algo_records, config.distortion_mode)
                .expect("trials >= 1")
        })
        .collect();
    Ok(BenchmarkOutput { records, summaries })
}

pub fn write_benchmark_csvs(
    out_dir: &Path,
    output: &BenchmarkOutput,
) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(out_dir)?;
    let trials_path = out_dir.join("trials.csv");
    let mut trials = String::from(TRIALS_CSV_HEADER);
    trials.push('\n');
    for record in &output.records {
        trials.push_str(&trial_csv_row(record));
        trials.push('\n');
    }
    std::fs::write(&trials_path, trials)?;

    let summary_path = out_dir.join("summary.csv");
    let mut summary = String::from(SUMMARY_CSV_HEADER);
    summary.push('\n');
    for s in &output.summaries {
        summary.push_str(&summary_csv_row(s));
        summary.push('\n');
    }
    std::fs::write(&summary_path, summary)?;
    Ok((trials_path, summary_path))
}

/// Applies one sweep-axis value to a base configuration.
pub fn apply_axis(config: &RunConfig, axis: SweepAxis, value: f64) -> RunConfig {
    let mut derived = config.clone();
    match axis {
        SweepAxis::Sparsity => derived.ensemble.sparsity = value as usize,
        SweepAxis::ObsLen => derived.ensemble.obs_len = value as usize,
        SweepAxis::Snr => derived.ensemble.snr_db = Some(value),
        SweepAxis::Alpha => {
            for algo in &mut derived.algorithms {
                algo.settings.alpha = value;
            }
        }
        SweepAxis::Extensions => {
            for algo in &mut derived.algorithms {
                algo.settings.extensions = value as usize;
            }
        }
        SweepAxis::BeamWidth => {
            for algo in &mut derived.algorithms {
                algo.settings.beam_width = value as usize;
            }
        }
    }
    derived
}

pub fn fmt_axis_value(value: f64) -> String {
    if value.fract() == 0.0 && value.abs() < 1e15 {
        format!("{}", value as i64)
    } else {
        format!("{value}")
    }
}

pub struct SweepOutput {
    pub value: f64,
    pub benchmark: BenchmarkOutput,
}

pub fn run_sweep(
    config: &RunConfig,
    progress: &mut (dyn FnMut(usize, usize) + Send),
) -> Result<Vec<SweepOutput>> {
    let (axis, values) = config
        .sweep
        .as_ref()
        .ok_or_else(|| Error::InvalidParams("sweep requires an axis and values".into()))?
        .clone();
    let mut outputs = Vec::with_capacity(values.len());
    for &value in &values {
        let derived = apply_axis(config, axis, value);
        let benchmark = run_benchmark(&derived, progress)?;
        outputs.push(SweepOutput { value, benchmark });
    }
    Ok(outputs)
}

/// Writes per-value `trials.csv`/`summary.csv` under `<axis>=<value>/`
/// directories plus a combined `sweep_summary.csv` with one row per
/// (value, algorithm).
pub fn write_sweep_outputs(
    out_dir: &Path,
    axis: SweepAxis,
    outputs: &[SweepOutput],
) -> Result<PathBuf> {
    std::fs::create_dir_all(out_dir)?;
    let mut combined = format!("axis,value,{SUMMARY_CSV_HEADER}\n");
    for out in outputs {
        let sub = out_dir.join(format!("{}={}", axis.as_str(), fmt_axis_value(out.value)));
        write_benchmark_csvs(&sub, &out.benchmark)?;
        for s in &out.benchmark.summaries {
            combined.push_str(&format!(
                "{},{},{}\n",
                axis.as_str(),
                fmt_axis_value(out.value),
                summary_csv_row(s)
            ));
        }
    }
    let path = out_dir.join("sweep_summary.csv");
    std::fs::write(&path, combined)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::AlgoSettings;

    fn small_config() -> RunConfig {
        let mut config = RunConfig::default();
        config.ensemble.signal_len = 48;
        config.ensemble.obs_len = 24;
        config.ensemble.sparsity = 3;
        config.ensemble.trials = 6;
        config.ensemble.seed = 7;
        config.algorithms = vec![
            AlgoConfig { id: AlgoId::MulAomp, settings: AlgoSettings::default() },
            AlgoConfig { id: AlgoId::Omp, settings: AlgoSettings::default() },
        ];
        config
    }

    #[test]
    fn benchmark_records_are_trial_major_and_complete() {
        let config = small_config();
        let out = run_benchmark(&config, &mut |_, _| {}).unwrap();
        assert_eq!(out.records.len(), 12);
        for (i, record) in out.records.iter().enumerate() {
            assert_eq!(record.trial, i / 2);
            let expected = if i % 2 == 0 { "mul-aomp" } else { "omp" };
            assert_eq!(record.algo, expected);
        }
        assert_eq!(out.summaries.len(), 2);
        assert_eq!(out.summaries[0].trials, 6);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let config = small_config();
        let serial = run_benchmark(&config, &mut |_, _| {}).unwrap();
        let mut parallel_config = config.clone();
        parallel_config.jobs = 4;
        let parallel = run_benchmark(&parallel_config, &mut |_, _| {}).unwrap();
        let serial_rows: Vec<String> = serial.records.iter().map(trial_csv_row).collect();
        let parallel_rows: Vec<String> = parallel.records.iter().map(trial_csv_row).collect();
        assert_eq!(serial_rows, parallel_rows);
    }

    #[test]
    fn csv_files_match_schema() {
        let config = small_config();
        let out = run_benchmark(&config, &mut |_, _| {}).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let (trials_path, summary_path) = write_benchmark_csvs(dir.path(), &out).unwrap();
        let trials = std::fs::read_to_string(trials_path).unwrap();
        let mut lines = trials.lines();
        assert_eq!(lines.next().unwrap(), TRIALS_CSV_HEADER);
        let columns = TRIALS_CSV_HEADER.split(',').count();
        for line in lines {
            assert_eq!(line.split(',').count(), columns);
            // Numeric fields parse.
            let fields: Vec<&str> = line.split(',').collect();
            assert!(fields[5].parse::<f64>().is_ok());
        }
        let summary = std::fs::read_to_string(summary_path).unwrap();
        assert_eq!(summary.lines().next().unwrap(), SUMMARY_CSV_HEADER);
        assert_eq!(summary.lines().count(), 3);
    }

    #[test]
    fn sweep_applies_axis_and_writes_outputs() {
        let mut config = small_config();
        config.ensemble.trials = 3;
        config.sweep = Some((SweepAxis::Sparsity, vec![2.0, 4.0]));
        let outputs = run_sweep(&config, &mut |_, _| {}).unwrap();
        assert_eq!(outputs.len(), 2);
        assert_eq!(outputs[0].benchmark.summaries[0].sparsity, 2);
        assert_eq!(outputs[1].benchmark.summaries[0].sparsity, 4);

        let dir = tempfile::tempdir().unwrap();
        let combined =
            write_sweep_outputs(dir.path(), SweepAxis::Sparsity, &outputs).unwrap();
        assert!(dir.path().join("K=2/trials.csv").exists());
        assert!(dir.path().join("K=4/summary.csv").exists());
        let text = std::fs::read_to_string(combined).unwrap();
        assert_eq!(text.lines().count(), 1 + 2 * 2);
        assert!(text.lines().nth(1).unwrap().starts_with("K,2,"));
    }

    #[test]
    fn apply_axis_touches_the_right_knob() {
        let config = small_config();
        assert_eq!(apply_axis(&config, SweepAxis::Sparsity, 7.0).ensemble.sparsity, 7);
        assert_eq!(apply_axis(&config, SweepAxis::ObsLen, 40.0).ensemble.obs_len, 40);
        assert_eq!(apply_axis(&config, SweepAxis::Snr, 15.0).ensemble.snr_db, Some(15.0));
        let derived = apply_axis(&config, SweepAxis::Alpha, 0.5);
        assert!(derived.algorithms.iter().all(|a| a.settings.alpha == 0.5));
        let derived = apply_axis(&config, SweepAxis::Extensions, 3.0);
        assert!(derived.algorithms.iter().all(|a| a.settings.extensions == 3));
        let derived = apply_axis(&config, SweepAxis::BeamWidth, 1000.0);
        assert!(derived.algorithms.iter().all(|a| a.settings.beam_width == 1000));
    }

    #[test]
    fn timing_flag_records_wall_clock() {
        let mut config = small_config();
        config.ensemble.trials = 2;
        let out = run_benchmark(&config, &mut |_, _| {}).unwrap();
        assert!(out.records.iter().all(|r| r.runtime_seconds == 0.0));
        config.record_runtime = true;
        let out = run_benchmark(&config, &mut |_, _| {}).unwrap();
        assert!(out.records.iter().any(|r| r.runtime_seconds > 0.0));
    }

    #[test]
    fn shared_matrix_mode_runs() {
        let mut config = small_config();
        config.ensemble.matrix_sharing = MatrixSharing::Shared;
        config.ensemble.trials = 3;
        let out = run_benchmark(&config, &mut |_, _| {}).unwrap();
        assert_eq!(out.records.len(), 6);
    }
}
