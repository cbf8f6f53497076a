//! CSV artifacts. Floats carry 17 significant digits; missing values are empty cells.
//!
//! | file            | columns |
//! |-----------------|---------|
//! | `series.csv`    | step, t, max_epsilon, entropy_rate, lemma1_residual, l2_error, r_min, r_max |
//! | `steps.csv`     | step, t, dt, accepted, err_estimate |
//! | `field.csv`     | x, y, then one column per conserved variable |
//! | `schlieren.csv` | x, y, schlieren |
//! | `summary.csv`   | key, value |

use crate::experiment::{RunOutput, Sample};
use crate::schlieren::{plot_points, schlieren};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

pub const SERIES_HEADER: [&str; 8] = [
    "step",
    "t",
    "max_epsilon",
    "entropy_rate",
    "lemma1_residual",
    "l2_error",
    "r_min",
    "r_max",
];

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn csv_err(e: csv::Error) -> io::Error {
    io::Error::other(e)
}

pub fn write_series(path: &Path, samples: &[Sample]) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(SERIES_HEADER).map_err(csv_err)?;
    for s in samples {
        w.write_record([
            s.step.to_string(),
            fmt_f64(s.t),
            fmt_f64(s.max_epsilon),
            fmt_f64(s.entropy_rate),
            fmt_f64(s.lemma1_residual),
            fmt_opt(s.l2_error),
            fmt_opt(s.r_min),
            fmt_opt(s.r_max),
        ])
        .map_err(csv_err)?;
    }
    w.flush()
}

/// Writes every artifact of a run under its output directory and returns that directory.
pub fn write_run(run: &RunOutput, dir: Option<&Path>) -> io::Result<PathBuf> {
    let dir = dir.map(Path::to_path_buf).unwrap_or_else(|| run.config.output.dir.clone());
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("config.toml"), run.config.to_toml())?;
    write_series(&dir.join("series.csv"), &run.record.samples)?;

    let mut w = csv::Writer::from_path(dir.join("steps.csv")).map_err(csv_err)?;
    w.write_record(["step", "t", "dt", "accepted", "err_estimate"]).map_err(csv_err)?;
    for r in &run.record.log.records {
        w.write_record([
            r.step.to_string(),
            fmt_f64(r.t),
            fmt_f64(r.dt),
            u8::from(r.accepted).to_string(),
            fmt_f64(r.error_estimate),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;

    let disc = run.disc();
    let pts = plot_points(disc.mesh.shape, run.config.output.plot_points);
    let columns: Vec<Vec<([f64; 2], f64)>> = (0..disc.num_vars()).map(|i| disc.sample(&run.field, i, &pts)).collect();
    let mut w = csv::Writer::from_path(dir.join("field.csv")).map_err(csv_err)?;
    let mut header = vec!["x".to_string(), "y".to_string()];
    header.extend((0..disc.num_vars()).map(|i| format!("u{i}")));
    w.write_record(&header).map_err(csv_err)?;
    for p in 0..columns[0].len() {
        let x = columns[0][p].0;
        let mut row = vec![fmt_f64(x[0]), fmt_f64(x[1])];
        row.extend(columns.iter().map(|c| fmt_f64(c[p].1)));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;

    if run.config.output.schlieren {
        let mut w = csv::Writer::from_path(dir.join("schlieren.csv")).map_err(csv_err)?;
        w.write_record(["x", "y", "schlieren"]).map_err(csv_err)?;
        for (x, s) in schlieren(disc, &run.field, run.config.output.plot_points) {
            w.write_record([fmt_f64(x[0]), fmt_f64(x[1]), fmt_f64(s)]).map_err(csv_err)?;
        }
        w.flush()?;
    }

    let rec = &run.record;
    let mut w = csv::Writer::from_path(dir.join("summary.csv")).map_err(csv_err)?;
    w.write_record(["key", "value"]).map_err(csv_err)?;
    let rows = [
        ("name", run.config.name.clone()),
        ("accepted_steps", rec.log.accepted.to_string()),
        ("rejected_steps", rec.log.rejected.to_string()),
        ("t_final", fmt_f64(run.t_final)),
        ("max_epsilon", fmt_f64(rec.max_epsilon())),
        ("max_entropy_rate", fmt_f64(rec.max_entropy_rate())),
        ("final_l2_error", fmt_opt(run.final_error())),
        ("wall_seconds", format!("{:.3}", rec.wall_seconds)),
    ];
    for (k, v) in rows {
        w.write_record([k, v.as_str()]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(dir)
}
