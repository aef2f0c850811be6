//! CSV and JSON artifacts. Floats are written with 17 significant digits.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Result, SwarmError};
use crate::experiments::{BatchStats, CboLimitRow, ChaosReport, RunResult, SigmaSweepRow};

/// Round-trip exact scientific notation.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SwarmError + '_ {
    move |source| SwarmError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(io_err(path))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    write_text(path, &text)
}

fn run_row(out: &mut String, index: usize, r: &RunResult) {
    let _ = writeln!(
        out,
        "{},{},{},{},{},{}",
        index,
        r.seed,
        r.stop_step,
        fmt_f64(r.linf_error),
        fmt_f64(r.fitness_gap),
        u8::from(r.success)
    );
}

pub fn batch_csv(stats: &BatchStats) -> String {
    let mut out = String::from("run,seed,stop_step,linf_error,fitness_gap,success\n");
    for (i, r) in stats.per_run.iter().enumerate() {
        run_row(&mut out, i, r);
    }
    out
}

pub fn single_csv(r: &RunResult) -> String {
    let mut out = String::from("run,seed,stop_step,linf_error,fitness_gap,success\n");
    run_row(&mut out, 0, r);
    out
}

/// `step,x1,...,xd` rows of the consensus trajectory (native coordinates).
pub fn consensus_history_csv(history: &[Vec<f64>]) -> String {
    let d = history.first().map_or(0, Vec::len);
    let mut out = String::from("step");
    for l in 1..=d {
        let _ = write!(out, ",x{l}");
    }
    out.push('\n');
    for (k, x) in history.iter().enumerate() {
        let _ = write!(out, "{k}");
        for v in x {
            let _ = write!(out, ",{}", fmt_f64(*v));
        }
        out.push('\n');
    }
    out
}

pub fn sigma_sweep_csv(rows: &[SigmaSweepRow]) -> String {
    let mut out = String::from("sigma,success_rate,mean_fitness_gap,mean_linf_error\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_f64(r.sigma),
            fmt_f64(r.success_rate),
            fmt_f64(r.mean_fitness_gap),
            fmt_f64(r.mean_linf_error)
        );
    }
    out
}

pub fn chaos_csv(report: &ChaosReport) -> String {
    let mut out = String::from("N,trial,coupled_error\n");
    for (n, trials) in report.n_values.iter().zip(&report.per_trial) {
        for (t, e) in trials.iter().enumerate() {
            let _ = writeln!(out, "{n},{t},{}", fmt_f64(*e));
        }
    }
    out
}

pub fn cbo_limit_csv(rows: &[CboLimitRow]) -> String {
    let mut out = String::from("eps,sigma_tilde,mean_linf_error,method\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_f64(r.eps),
            fmt_f64(r.sigma_tilde),
            fmt_f64(r.mean_linf_error),
            r.method
        );
    }
    out
}

/// Files written by one invocation.
#[derive(Debug, Clone, Default)]
pub struct Artifacts {
    pub files: Vec<PathBuf>,
}

impl Artifacts {
    pub fn text(&mut self, dir: &Path, name: &str, text: &str) -> Result<()> {
        let path = dir.join(name);
        write_text(&path, text)?;
        self.files.push(path);
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, dir: &Path, name: &str, value: &T) -> Result<()> {
        let path = dir.join(name);
        write_json(&path, value)?;
        self.files.push(path);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 6.16e-5, 1e300, -2.5e-310] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(0.25), "2.5000000000000000e-1");
    }

    #[test]
    fn batch_csv_has_one_row_per_run() {
        let r = RunResult {
            seed: 3,
            final_consensus: vec![0.0],
            stop_step: 10,
            fitness_gap: 0.5,
            linf_error: 0.1,
            success: true,
            consensus_history: None,
            energy_history: None,
        };
        let stats = BatchStats::from_runs(vec![r.clone(), r]);
        let csv = batch_csv(&stats);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "run,seed,stop_step,linf_error,fitness_gap,success");
        assert!(lines[2].starts_with("1,3,10,"));
        assert!(lines[2].ends_with(",1"));
    }
}
