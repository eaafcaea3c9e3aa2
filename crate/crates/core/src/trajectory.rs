//! Simulation output: sampled state/power channels per machine, window
//! bookkeeping, CSV serialization and trajectory comparison.

use std::io::{BufRead, Write};

use crate::error::SimError;

/// Sampled channels of one machine.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ChannelSet {
    pub delta: Vec<f64>,
    pub omega: Vec<f64>,
    pub ep_q: Vec<f64>,
    pub ep_d: Vec<f64>,
    pub p_e: Vec<f64>,
}

/// A sampled multi-machine trajectory. `times` is strictly increasing and
/// every channel has the same length.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub machines: Vec<ChannelSet>,
    /// Start times of the integration macro-steps (SAS windows; empty for
    /// step integrators).
    pub window_starts: Vec<f64>,
    /// Wall time spent per window (s). Not serialized to CSV.
    pub window_wall: Vec<f64>,
    /// Total wall time of the run (s).
    pub total_wall: f64,
}

impl Trajectory {
    pub fn n_machines(&self) -> usize {
        self.machines.len()
    }

    pub fn push_sample(&mut self, t: f64, per_machine: &[(f64, f64, f64, f64, f64)]) {
        self.times.push(t);
        for (ch, &(d, w, eq, ed, pe)) in self.machines.iter_mut().zip(per_machine) {
            ch.delta.push(d);
            ch.omega.push(w);
            ch.ep_q.push(eq);
            ch.ep_d.push(ed);
            ch.p_e.push(pe);
        }
    }

    /// CSV with header `t, delta_i, omega_i, epq_i, epd_i, pe_i` per machine.
    /// Floats are written in shortest round-trip form, so re-loading yields
    /// exactly the stored values.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "t")?;
        for i in 1..=self.n_machines() {
            write!(w, ",delta_{i},omega_{i},epq_{i},epd_{i},pe_{i}")?;
        }
        writeln!(w)?;
        for (row, &t) in self.times.iter().enumerate() {
            write!(w, "{t}")?;
            for ch in &self.machines {
                write!(
                    w,
                    ",{},{},{},{},{}",
                    ch.delta[row], ch.omega[row], ch.ep_q[row], ch.ep_d[row], ch.p_e[row]
                )?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Trajectory, SimError> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| SimError::BadConfig("empty CSV".into()))?
            .map_err(|e| SimError::BadConfig(e.to_string()))?;
        let cols = header.split(',').count();
        if cols < 6 || (cols - 1) % 5 != 0 {
            return Err(SimError::BadConfig(format!(
                "unexpected CSV column count {cols}"
            )));
        }
        let n = (cols - 1) / 5;
        let mut traj = Trajectory {
            machines: vec![ChannelSet::default(); n],
            ..Default::default()
        };
        for line in lines {
            let line = line.map_err(|e| SimError::BadConfig(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let vals: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| SimError::BadConfig(format!("bad CSV number: {e}")))?;
            if vals.len() != cols {
                return Err(SimError::BadConfig("ragged CSV row".into()));
            }
            let per: Vec<(f64, f64, f64, f64, f64)> = (0..n)
                .map(|i| {
                    let o = 1 + 5 * i;
                    (vals[o], vals[o + 1], vals[o + 2], vals[o + 3], vals[o + 4])
                })
                .collect();
            traj.push_sample(vals[0], &per);
        }
        Ok(traj)
    }
}

/// Per-channel maximum absolute differences between two trajectories on
/// their shared sample times.
#[derive(Clone, Debug, Default)]
pub struct TrajectoryError {
    pub max_delta: f64,
    pub max_omega: f64,
    pub max_ep_q: f64,
    pub max_ep_d: f64,
    /// Number of shared time points compared.
    pub compared: usize,
}

impl TrajectoryError {
    /// Max over the angle and speed channels, the error metric used for
    /// window tuning (rad and p.u. treated as commensurate).
    pub fn max_state(&self) -> f64 {
        self.max_delta.max(self.max_omega)
    }

    pub fn max_all(&self) -> f64 {
        self.max_delta
            .max(self.max_omega)
            .max(self.max_ep_q)
            .max(self.max_ep_d)
    }
}

/// Align two trajectories on shared time points (within `1e-9` s) and return
/// the per-channel maximum deviations. Errors if the grids share fewer than
/// two points.
pub fn compare(a: &Trajectory, b: &Trajectory) -> Result<TrajectoryError, SimError> {
    if a.n_machines() != b.n_machines() {
        return Err(SimError::BadConfig(
            "trajectories have different machine counts".into(),
        ));
    }
    let mut err = TrajectoryError::default();
    let mut j = 0usize;
    for (ia, &ta) in a.times.iter().enumerate() {
        while j < b.times.len() && b.times[j] < ta - 1e-9 {
            j += 1;
        }
        if j >= b.times.len() {
            break;
        }
        if (b.times[j] - ta).abs() > 1e-9 {
            continue;
        }
        for (ca, cb) in a.machines.iter().zip(&b.machines) {
            err.max_delta = err.max_delta.max((ca.delta[ia] - cb.delta[j]).abs());
            err.max_omega = err.max_omega.max((ca.omega[ia] - cb.omega[j]).abs());
            err.max_ep_q = err.max_ep_q.max((ca.ep_q[ia] - cb.ep_q[j]).abs());
            err.max_ep_d = err.max_ep_d.max((ca.ep_d[ia] - cb.ep_d[j]).abs());
        }
        err.compared += 1;
        j += 1;
    }
    if err.compared < 2 {
        return Err(SimError::BadConfig(
            "trajectories share fewer than two grid points (misaligned sampling)".into(),
        ));
    }
    Ok(err)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_traj() -> Trajectory {
        let mut t = Trajectory {
            machines: vec![ChannelSet::default(); 2],
            ..Default::default()
        };
        t.push_sample(0.0, &[(0.1, 0.0, 1.0, 0.0, 0.5), (0.2, 0.001, 1.1, -0.1, 0.6)]);
        t.push_sample(
            0.05,
            &[(0.11, 1e-4, 1.0, 0.0, 0.51), (0.21, 0.0011, 1.1, -0.1, 0.61)],
        );
        t
    }

    #[test]
    fn csv_round_trip_exact() {
        let t = sample_traj();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let back = Trajectory::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.times, t.times);
        assert_eq!(back.machines, t.machines);
    }

    #[test]
    fn compare_self_is_zero() {
        let t = sample_traj();
        let e = compare(&t, &t).unwrap();
        assert_eq!(e.max_all(), 0.0);
        assert_eq!(e.compared, 2);
    }

    #[test]
    fn compare_misaligned_grids_rejected() {
        let t = sample_traj();
        let mut shifted = t.clone();
        shifted.times = vec![0.013, 0.029];
        assert!(compare(&t, &shifted).is_err());
    }
}
