//! Convergence tables and side-by-side comparisons of two runs.

use crate::config::ExperimentConfig;
use crate::experiment::{run_experiment, RunError, RunOutput, Sample};
use crate::output::{fmt_f64, write_run};
use std::io;
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub degree: usize,
    pub elements: usize,
    pub error: f64,
    /// `log(e_prev / e) / log(K / K_prev)` against the previous row of the same degree.
    pub order: Option<f64>,
    pub accepted_steps: usize,
}

/// Runs every `(N, K)` pair; `K` sets the first element count and the others follow the preset's ratio.
pub fn convergence_study(base: &ExperimentConfig, degrees: &[usize], ks: &[usize]) -> Result<Vec<ConvergenceRow>, RunError> {
    let mut rows = Vec::new();
    for &n in degrees {
        let mut prev: Option<(usize, f64)> = None;
        for &k in ks {
            let mut cfg = base.clone();
            cfg.degree = n;
            cfg.elements = scaled_elements(base, k);
            cfg.output.stride = usize::MAX;
            let run = run_experiment(&cfg)?;
            let error = run
                .final_error()
                .ok_or_else(|| RunError::Config(crate::config::ConfigError::Invalid(format!("{} has no exact solution", cfg.name))))?;
            let order = prev.map(|(kp, ep)| (ep / error).ln() / (k as f64 / kp as f64).ln());
            rows.push(ConvergenceRow {
                degree: n,
                elements: k,
                error,
                order,
                accepted_steps: run.record.log.accepted,
            });
            prev = Some((k, error));
        }
    }
    Ok(rows)
}

pub fn scaled_elements(base: &ExperimentConfig, k: usize) -> Vec<usize> {
    match base.elements.as_slice() {
        [kx, ky] => vec![k, (k * ky).div_ceil(*kx).max(2)],
        _ => vec![k],
    }
}

pub fn write_convergence(path: &Path, rows: &[ConvergenceRow]) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(io::Error::other)?;
    w.write_record(["N", "K", "l2_error", "order", "accepted_steps"]).map_err(io::Error::other)?;
    for r in rows {
        w.write_record([
            r.degree.to_string(),
            r.elements.to_string(),
            fmt_f64(r.error),
            r.order.map(fmt_f64).unwrap_or_default(),
            r.accepted_steps.to_string(),
        ])
        .map_err(io::Error::other)?;
    }
    w.flush()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlignedRow {
    pub t: f64,
    pub epsilon_a: f64,
    pub epsilon_b: f64,
    pub error_a: Option<f64>,
    pub error_b: Option<f64>,
}

pub struct Comparison {
    pub a: RunOutput,
    pub b: RunOutput,
    /// Samples of `a` with `b` interpolated linearly in time.
    pub rows: Vec<AlignedRow>,
    /// L² norm of the difference of the two final states.
    pub difference_norm: f64,
}

impl Comparison {
    /// Share of aligned samples (after `t = 0`) where `a` carries strictly less viscosity than `b`.
    pub fn fraction_a_below_b(&self) -> f64 {
        let rows: Vec<&AlignedRow> = self.rows.iter().filter(|r| r.t > 0.0).collect();
        if rows.is_empty() {
            return 0.0;
        }
        rows.iter().filter(|r| r.epsilon_a < r.epsilon_b).count() as f64 / rows.len() as f64
    }

    pub fn summary_line(&self) -> String {
        let err = |r: &RunOutput| r.final_error().map(|e| format!("{e:.4e}")).unwrap_or_else(|| "n/a".into());
        format!(
            "{} vs {}: steps {} / {}, max eps {:.3e} / {:.3e}, final error {} / {}, difference {:.4e}, eps_a < eps_b on {:.0}% of samples",
            self.a.config.name,
            self.b.config.name,
            self.a.record.log.accepted,
            self.b.record.log.accepted,
            self.a.record.max_epsilon(),
            self.b.record.max_epsilon(),
            err(&self.a),
            err(&self.b),
            self.difference_norm,
            100.0 * self.fraction_a_below_b()
        )
    }
}

fn interpolate(samples: &[Sample], t: f64, value: impl Fn(&Sample) -> Option<f64>) -> Option<f64> {
    let i = samples.partition_point(|s| s.t < t);
    if i == 0 {
        return samples.first().and_then(&value);
    }
    if i == samples.len() {
        return samples.last().and_then(&value);
    }
    let (s0, s1) = (&samples[i - 1], &samples[i]);
    let (v0, v1) = (value(s0)?, value(s1)?);
    if s1.t == s0.t {
        return Some(v1);
    }
    let w = (t - s0.t) / (s1.t - s0.t);
    Some(v0 + w * (v1 - v0))
}

pub fn compare_runs(a: &ExperimentConfig, b: &ExperimentConfig) -> Result<Comparison, RunError> {
    let same = a.problem == b.problem
        && a.domain == b.domain
        && a.degree == b.degree
        && a.elements == b.elements
        && a.formulation == b.formulation
        && a.time.t_final == b.time.t_final;
    if !same {
        return Err(RunError::Config(crate::config::ConfigError::Invalid(format!(
            "{} and {} do not share problem, mesh, degree and final time",
            a.name, b.name
        ))));
    }
    let ra = run_experiment(a)?;
    let rb = run_experiment(b)?;
    let sb = &rb.record.samples;
    let rows = ra
        .record
        .samples
        .iter()
        .map(|s| AlignedRow {
            t: s.t,
            epsilon_a: s.max_epsilon,
            epsilon_b: interpolate(sb, s.t, |x| Some(x.max_epsilon)).unwrap_or(0.0),
            error_a: s.l2_error,
            error_b: interpolate(sb, s.t, |x| x.l2_error),
        })
        .collect();
    let diff: Vec<f64> = ra.field.data.iter().zip(&rb.field.data).map(|(x, y)| x - y).collect();
    let difference_norm = ra.disc().l2_norm(&diff);
    Ok(Comparison {
        a: ra,
        b: rb,
        rows,
        difference_norm,
    })
}

/// `aligned.csv`, `summary.csv` and both runs' own artifacts under `a/` and `b/`.
pub fn write_comparison(dir: &Path, cmp: &Comparison) -> io::Result<()> {
    std::fs::create_dir_all(dir)?;
    write_run(&cmp.a, Some(&dir.join("a")))?;
    write_run(&cmp.b, Some(&dir.join("b")))?;
    let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
    let mut w = csv::Writer::from_path(dir.join("aligned.csv")).map_err(io::Error::other)?;
    w.write_record(["t", "max_epsilon_a", "max_epsilon_b", "l2_error_a", "l2_error_b"]).map_err(io::Error::other)?;
    for r in &cmp.rows {
        w.write_record([fmt_f64(r.t), fmt_f64(r.epsilon_a), fmt_f64(r.epsilon_b), opt(r.error_a), opt(r.error_b)])
            .map_err(io::Error::other)?;
    }
    w.flush()?;
    let mut w = csv::Writer::from_path(dir.join("summary.csv")).map_err(io::Error::other)?;
    w.write_record(["key", "a", "b"]).map_err(io::Error::other)?;
    let rows = [
        ("name", cmp.a.config.name.clone(), cmp.b.config.name.clone()),
        ("accepted_steps", cmp.a.record.log.accepted.to_string(), cmp.b.record.log.accepted.to_string()),
        ("max_epsilon", fmt_f64(cmp.a.record.max_epsilon()), fmt_f64(cmp.b.record.max_epsilon())),
        ("final_l2_error", opt(cmp.a.final_error()), opt(cmp.b.final_error())),
        ("difference_norm", fmt_f64(cmp.difference_norm), fmt_f64(cmp.difference_norm)),
        ("fraction_eps_a_below_b", fmt_f64(cmp.fraction_a_below_b()), String::new()),
    ];
    for (k, a, b) in rows {
        w.write_record([k, a.as_str(), b.as_str()]).map_err(io::Error::other)?;
    }
    w.flush()
}
