//! CSV writers for the CLI. Numbers use Rust's shortest round-trip `Display`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::config::RunConfig;
use crate::diagnostics::{drift_series, DriftSeries, OrderFit, StabilityReport, Trajectory};
use crate::error::{Error, Result};

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Indices kept when writing every `every`-th record; the last is always kept.
pub fn thinned(len: usize, every: usize) -> Vec<usize> {
    let every = every.max(1);
    let mut idx: Vec<usize> = (0..len).step_by(every).collect();
    if len > 0 && idx.last() != Some(&(len - 1)) {
        idx.push(len - 1);
    }
    idx
}

/// `t, <coordinates>, <casimirs>, hamiltonian`.
pub fn write_trajectory<W: Write>(
    w: W,
    traj: &Trajectory,
    coordinate_names: &[String],
    every: usize,
) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["t".to_string()];
    header.extend(coordinate_names.iter().cloned());
    header.extend(traj.casimir_names.iter().cloned());
    header.push("hamiltonian".into());
    out.write_record(&header).map_err(csv_err)?;
    for n in thinned(traj.len(), every) {
        let mut row = vec![traj.times[n].to_string()];
        row.extend(traj.states[n].as_slice().iter().map(f64::to_string));
        if let Some(c) = traj.casimirs.get(n) {
            row.extend(c.iter().map(f64::to_string));
        }
        row.push(traj.hamiltonian[n].to_string());
        out.write_record(&row).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// `step, chord_iters, residual`.
pub fn write_meta<W: Write>(w: W, traj: &Trajectory) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["step", "chord_iters", "residual"]).map_err(csv_err)?;
    for (n, m) in traj.meta.iter().enumerate() {
        out.write_record([n.to_string(), m.chord_iters.to_string(), m.residual.to_string()])
            .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Long format `t, casimir_name, rel_error`.
pub fn write_drift<W: Write>(w: W, traj: &Trajectory, every: usize) -> Result<()> {
    let series = drift_series(traj);
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["t", "casimir_name", "rel_error"]).map_err(csv_err)?;
    for n in thinned(traj.len(), every) {
        for s in &series {
            out.write_record([traj.times[n].to_string(), s.name.clone(), s.values[n].to_string()])
                .map_err(csv_err)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Wide format `t, <method>:<casimir>, …` for runs on one shared grid.
pub fn write_compare<W: Write>(
    w: W,
    times: &[f64],
    runs: &[(String, Vec<DriftSeries>)],
    every: usize,
) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["t".to_string()];
    for (method, series) in runs {
        header.extend(series.iter().map(|s| format!("{method}:{}", s.name)));
    }
    out.write_record(&header).map_err(csv_err)?;
    for n in thinned(times.len(), every) {
        let mut row = vec![times[n].to_string()];
        for (_, series) in runs {
            row.extend(series.iter().map(|s| s.values[n].to_string()));
        }
        out.write_record(&row).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// `dt, mean_error, n`.
pub fn write_order_fit<W: Write>(w: W, fit: &OrderFit) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["dt", "mean_error", "n"]).map_err(csv_err)?;
    for (dt, e) in fit.dts.iter().zip(&fit.errors) {
        out.write_record([dt.to_string(), e.to_string(), fit.n_samples.to_string()])
            .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// `dt, verdict`.
pub fn write_stability<W: Write>(w: W, report: &StabilityReport) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["dt", "verdict"]).map_err(csv_err)?;
    for (dt, v) in &report.verdicts {
        out.write_record([dt.to_string(), v.as_str().to_string()]).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Writes `name` under `dir` with `f`.
pub fn write_file<F>(dir: &Path, name: &str, f: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<()>,
{
    let path = dir.join(name);
    let file = File::create(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    f(&mut w)?;
    w.flush()?;
    Ok(())
}

/// The manifest is the resolved config as TOML, preceded by comment lines
/// with the version, subcommand and summary values, so it can be fed back
/// with `--config` to regenerate the run.
pub fn write_manifest(
    dir: &Path,
    cfg: &RunConfig,
    version: &str,
    command: &str,
    extra: &[(String, String)],
) -> Result<()> {
    write_file(dir, "manifest", |w| {
        writeln!(w, "# version: {version}")?;
        writeln!(w, "# command: {command}")?;
        for (k, v) in extra {
            writeln!(w, "# {k}: {v}")?;
        }
        w.write_all(cfg.to_toml().as_bytes())?;
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::StepMeta;
    use crate::lie::DualVector;

    fn traj() -> Trajectory {
        let mut t = Trajectory::default();
        for n in 0..5 {
            t.push(n as f64 * 0.1, DualVector::new(vec![n as f64, 0.5]), 1.0 / 3.0, StepMeta::default());
        }
        t.casimir_names = vec!["c".into()];
        t.casimirs = (0..5).map(|n| vec![1.0 + n as f64]).collect();
        t
    }

    #[test]
    fn thinning_keeps_last() {
        assert_eq!(thinned(5, 2), vec![0, 2, 4]);
        assert_eq!(thinned(6, 4), vec![0, 4, 5]);
        assert_eq!(thinned(0, 3), Vec::<usize>::new());
    }

    #[test]
    fn trajectory_csv_layout() {
        let mut buf = Vec::new();
        write_trajectory(&mut buf, &traj(), &["a".into(), "b".into()], 2).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,a,b,c,hamiltonian");
        assert_eq!(lines[1], "0,0,0.5,1,0.3333333333333333");
        assert_eq!(lines.len(), 4);
    }

    #[test]
    fn drift_csv_is_long_format() {
        let mut buf = Vec::new();
        write_drift(&mut buf, &traj(), 1).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,casimir_name,rel_error\n0,c,0\n0.1,c,1\n"));
    }
}
