//! CSV writers and histogram extracts.
//!
//! Every CSV has exactly one header row, comma separators, `.` decimals and
//! LF line endings. Floats use Rust's shortest round-trip formatting, so a
//! value read back from a file is bit-identical to the one written.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::ExperimentError;
use crate::state::{ControlField, Trajectory};

/// Buffered CSV file that remembers its path for error messages.
pub struct CsvWriter {
    path: PathBuf,
    out: BufWriter<File>,
}

impl CsvWriter {
    pub fn create(path: &Path, header: &str) -> Result<Self, ExperimentError> {
        let file = File::create(path).map_err(|e| ExperimentError::io(path, e))?;
        let mut w = CsvWriter {
            path: path.to_owned(),
            out: BufWriter::new(file),
        };
        w.line(header)?;
        Ok(w)
    }

    pub fn line(&mut self, record: &str) -> Result<(), ExperimentError> {
        self.out
            .write_all(record.as_bytes())
            .and_then(|_| self.out.write_all(b"\n"))
            .map_err(|e| ExperimentError::io(&self.path, e))
    }

    pub fn finish(mut self) -> Result<PathBuf, ExperimentError> {
        self.out
            .flush()
            .map_err(|e| ExperimentError::io(&self.path, e))?;
        Ok(self.path)
    }
}

fn join<T: std::fmt::Display>(values: impl IntoIterator<Item = T>) -> String {
    let mut s = String::new();
    for (k, v) in values.into_iter().enumerate() {
        if k > 0 {
            s.push(',');
        }
        let _ = write!(s, "{v}");
    }
    s
}

fn component_names(prefix: &str, dim: usize) -> Vec<String> {
    (1..=dim).map(|l| format!("{prefix}_{l}")).collect()
}

/// `step,time,particle_id,x_1..x_d,v_1..v_d`, keeping every
/// `particle_stride`-th particle.
pub fn write_trajectory(
    path: &Path,
    traj: &Trajectory,
    dt: f64,
    particle_stride: usize,
) -> Result<PathBuf, ExperimentError> {
    let d = traj.dim;
    let mut header = vec![
        "step".to_owned(),
        "time".to_owned(),
        "particle_id".to_owned(),
    ];
    header.extend(component_names("x", d));
    header.extend(component_names("v", d));
    let mut w = CsvWriter::create(path, &header.join(","))?;
    for n in 0..=traj.n_steps {
        let (x, v) = (traj.positions(n), traj.velocities(n));
        for i in (0..traj.n_particles).step_by(particle_stride.max(1)) {
            let row = format!(
                "{n},{},{i},{},{}",
                n as f64 * dt,
                join(&x[i * d..(i + 1) * d]),
                join(&v[i * d..(i + 1) * d])
            );
            w.line(&row)?;
        }
    }
    w.finish()
}

/// `step,time,particle_id,u_1..u_d`.
pub fn write_control(
    path: &Path,
    control: &ControlField,
    dt: f64,
    particle_stride: usize,
) -> Result<PathBuf, ExperimentError> {
    let mut header = vec![
        "step".to_owned(),
        "time".to_owned(),
        "particle_id".to_owned(),
    ];
    header.extend(component_names("u", control.dim));
    let mut w = CsvWriter::create(path, &header.join(","))?;
    for n in 0..control.n_steps {
        for i in (0..control.n_particles).step_by(particle_stride.max(1)) {
            w.line(&format!(
                "{n},{},{i},{}",
                n as f64 * dt,
                join(control.at(n, i))
            ))?;
        }
    }
    w.finish()
}

/// Uniform bins over `[lo, hi)`; the last bin is closed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Binning {
    pub lo: f64,
    pub hi: f64,
    pub bins: usize,
}

impl Binning {
    /// Covers `values` padded by 5% of their range on both sides.
    pub fn covering(values: impl IntoIterator<Item = f64>, bins: usize) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() || !hi.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 };
        Binning {
            lo: lo - pad,
            hi: hi + pad,
            bins: bins.max(1),
        }
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.bins as f64
    }

    pub fn edge(&self, k: usize) -> f64 {
        if k == self.bins {
            self.hi
        } else {
            self.lo + k as f64 * self.width()
        }
    }

    pub fn index(&self, value: f64) -> Option<usize> {
        if !(value >= self.lo && value <= self.hi) {
            return None;
        }
        let k = ((value - self.lo) / self.width()) as usize;
        Some(k.min(self.bins - 1))
    }

    /// Header labels `lo:hi`, one per bin.
    pub fn labels(&self) -> Vec<String> {
        (0..self.bins)
            .map(|k| format!("{}:{}", self.edge(k), self.edge(k + 1)))
            .collect()
    }
}

/// One marginal time series: rows are grid steps, columns bins. Bin edges
/// are encoded in the header as `lo:hi`.
pub struct MarginalSeries<'a> {
    pub binning: Binning,
    /// `(step, positions of the binned coordinate, weights)`.
    pub rows: Vec<(usize, Vec<f64>, Vec<f64>)>,
    pub dt: f64,
    pub path: &'a Path,
}

impl MarginalSeries<'_> {
    pub fn write(&self) -> Result<PathBuf, ExperimentError> {
        let header = format!("step,time,{}", self.binning.labels().join(","));
        let mut w = CsvWriter::create(self.path, &header)?;
        for (n, coords, weights) in &self.rows {
            let mut hist = vec![0.0; self.binning.bins];
            for (c, wt) in coords.iter().zip(weights) {
                if let Some(k) = self.binning.index(*c) {
                    hist[k] += wt;
                }
            }
            w.line(&format!("{n},{},{}", *n as f64 * self.dt, join(&hist)))?;
        }
        w.finish()
    }
}

/// Density marginals of a one-dimensional trajectory: particle fraction per
/// bin of `x` (`which = 0`) or `v` (`which = 1`), on one binning shared by
/// all steps.
pub fn write_state_marginal(
    path: &Path,
    traj: &Trajectory,
    dt: f64,
    which: usize,
    bins: usize,
) -> Result<PathBuf, ExperimentError> {
    let pick = |n: usize| -> &[f64] {
        if which == 0 {
            traj.positions(n)
        } else {
            traj.velocities(n)
        }
    };
    let binning = Binning::covering(
        (0..=traj.n_steps).flat_map(|n| pick(n).iter().copied()),
        bins,
    );
    let mass = 1.0 / traj.n_particles as f64;
    let rows = (0..=traj.n_steps)
        .map(|n| (n, pick(n).to_vec(), vec![mass; traj.n_particles]))
        .collect();
    MarginalSeries {
        binning,
        rows,
        dt,
        path,
    }
    .write()
}

/// Control marginals of a one-dimensional run: `Σ |u_i| / N` per bin of the
/// particle's `x` (`which = 0`) or `v` (`which = 1`), for steps with a
/// control.
pub fn write_control_marginal(
    path: &Path,
    traj: &Trajectory,
    control: &ControlField,
    dt: f64,
    which: usize,
    bins: usize,
) -> Result<PathBuf, ExperimentError> {
    let pick = |n: usize| -> &[f64] {
        if which == 0 {
            traj.positions(n)
        } else {
            traj.velocities(n)
        }
    };
    let steps = control.n_steps;
    let binning = Binning::covering((0..steps).flat_map(|n| pick(n).iter().copied()), bins);
    let scale = 1.0 / traj.n_particles as f64;
    let rows = (0..steps)
        .map(|n| {
            let weights = control.step(n).iter().map(|u| scale * u.abs()).collect();
            (n, pick(n).to_vec(), weights)
        })
        .collect();
    MarginalSeries {
        binning,
        rows,
        dt,
        path,
    }
    .write()
}

/// Two-dimensional cell statistics of a planar snapshot: particle fraction,
/// mean velocity (momentum field) and mean control per cell.
pub fn write_planar_histogram(
    path: &Path,
    positions: &[f64],
    velocities: &[f64],
    controls: Option<&[f64]>,
    bins: usize,
) -> Result<PathBuf, ExperimentError> {
    let n = positions.len() / 2;
    let bx = Binning::covering(positions.iter().step_by(2).copied(), bins);
    let by = Binning::covering(positions.iter().skip(1).step_by(2).copied(), bins);
    let cells = bx.bins * by.bins;
    let mut count = vec![0usize; cells];
    let mut vel = vec![0.0; 2 * cells];
    let mut ctl = vec![0.0; 2 * cells];
    for i in 0..n {
        let (Some(kx), Some(ky)) = (bx.index(positions[2 * i]), by.index(positions[2 * i + 1]))
        else {
            continue;
        };
        let c = kx * by.bins + ky;
        count[c] += 1;
        for l in 0..2 {
            vel[2 * c + l] += velocities[2 * i + l];
            if let Some(u) = controls {
                ctl[2 * c + l] += u[2 * i + l];
            }
        }
    }
    let mut w = CsvWriter::create(
        path,
        "ix,iy,x_lo,x_hi,y_lo,y_hi,weight,mean_v_1,mean_v_2,mean_u_1,mean_u_2",
    )?;
    for kx in 0..bx.bins {
        for ky in 0..by.bins {
            let c = kx * by.bins + ky;
            let k = count[c].max(1) as f64;
            w.line(&format!(
                "{kx},{ky},{},{},{},{},{},{},{},{},{}",
                bx.edge(kx),
                bx.edge(kx + 1),
                by.edge(ky),
                by.edge(ky + 1),
                count[c] as f64 / n as f64,
                vel[2 * c] / k,
                vel[2 * c + 1] / k,
                ctl[2 * c] / k,
                ctl[2 * c + 1] / k
            ))?;
        }
    }
    w.finish()
}

/// Phase-space `(x, v)` histogram of a one-dimensional snapshot.
pub fn write_phase_histogram(
    path: &Path,
    x: &[f64],
    v: &[f64],
    bins: usize,
) -> Result<PathBuf, ExperimentError> {
    let bx = Binning::covering(x.iter().copied(), bins);
    let bv = Binning::covering(v.iter().copied(), bins);
    let mut count = vec![0usize; bx.bins * bv.bins];
    for (xi, vi) in x.iter().zip(v) {
        if let (Some(a), Some(b)) = (bx.index(*xi), bv.index(*vi)) {
            count[a * bv.bins + b] += 1;
        }
    }
    let mut w = CsvWriter::create(path, "ix,iv,x_lo,x_hi,v_lo,v_hi,weight")?;
    for a in 0..bx.bins {
        for b in 0..bv.bins {
            w.line(&format!(
                "{a},{b},{},{},{},{},{}",
                bx.edge(a),
                bx.edge(a + 1),
                bv.edge(b),
                bv.edge(b + 1),
                count[a * bv.bins + b] as f64 / x.len() as f64
            ))?;
        }
    }
    w.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binning_pads_and_indexes() {
        let b = Binning::covering([0.0, 10.0], 10);
        assert_eq!((b.lo, b.hi), (-0.5, 10.5));
        assert_eq!(b.index(-0.5), Some(0));
        assert_eq!(b.index(10.5), Some(9));
        assert_eq!(b.index(11.0), None);
        assert_eq!(b.labels().len(), 10);
        let flat = Binning::covering([2.0, 2.0], 4);
        assert_eq!((flat.lo, flat.hi), (1.5, 2.5));
    }

    #[test]
    fn marginal_rows_sum_to_one() {
        let dir = tempfile::tempdir().unwrap();
        let init = crate::state::ParticleState::new(3, 1, vec![0.0, 1.0, 2.0], vec![1.0, 1.0, 1.0]);
        let traj = Trajectory::with_initial(&init, 0);
        let path = dir.path().join("h.csv");
        write_state_marginal(&path, &traj, 0.1, 0, 5).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let row: Vec<f64> = text
            .lines()
            .nth(1)
            .unwrap()
            .split(',')
            .skip(2)
            .map(|s| s.parse().unwrap())
            .collect();
        assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(text.lines().next().unwrap().starts_with("step,time,-0.1:"));
    }
}
