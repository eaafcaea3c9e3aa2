//! Network admittance matrices: bus matrix assembly, Kron reduction and the
//! three staged (pre-fault / fault-on / post-fault) reduced matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::ModelError;

pub type CMat = DMatrix<Complex64>;

/// Which staged admittance matrix is active.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    PreFault,
    FaultOn,
    PostFault,
}

/// Reduced complex admittance matrices for the three topology stages plus
/// the event times that separate them.
#[derive(Clone, Debug)]
pub struct StagedNetwork {
    pub y_pre: CMat,
    pub y_fault: CMat,
    pub y_post: CMat,
    /// Fault-on time (s).
    pub t_fault: f64,
    /// Clearing time (s).
    pub t_clear: f64,
}

impl StagedNetwork {
    /// A single-stage network (no event): the same matrix for all stages and
    /// event times pushed past any horizon.
    pub fn eventless(y: CMat) -> Self {
        StagedNetwork {
            y_pre: y.clone(),
            y_fault: y.clone(),
            y_post: y,
            t_fault: f64::INFINITY,
            t_clear: f64::INFINITY,
        }
    }

    pub fn matrix(&self, stage: Stage) -> &CMat {
        match stage {
            Stage::PreFault => &self.y_pre,
            Stage::FaultOn => &self.y_fault,
            Stage::PostFault => &self.y_post,
        }
    }

    /// Stage active on the interval starting at `t` (boundaries belong to
    /// the stage they open).
    pub fn stage_at(&self, t: f64) -> Stage {
        if t < self.t_fault {
            Stage::PreFault
        } else if t < self.t_clear {
            Stage::FaultOn
        } else {
            Stage::PostFault
        }
    }

    pub fn n(&self) -> usize {
        self.y_pre.nrows()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let n = self.n();
        for (m, what) in [
            (&self.y_pre, "y_pre"),
            (&self.y_fault, "y_fault"),
            (&self.y_post, "y_post"),
        ] {
            if m.nrows() != n || m.ncols() != n {
                return Err(ModelError::Dimension {
                    what,
                    expected: n,
                    got: m.nrows().max(m.ncols()),
                });
            }
            // reciprocal network: stage matrices symmetric within 1e-9
            for i in 0..n {
                for j in (i + 1)..n {
                    if (m[(i, j)] - m[(j, i)]).norm() > 1e-9 {
                        return Err(ModelError::InitFailed(format!(
                            "{what} not symmetric at ({i},{j})"
                        )));
                    }
                }
            }
        }
        let eventless = self.t_fault.is_infinite() && self.t_clear.is_infinite();
        if !eventless && !(0.0 <= self.t_fault && self.t_fault < self.t_clear) {
            return Err(ModelError::InitFailed(
                "event times must satisfy 0 <= t_fault < t_clear".into(),
            ));
        }
        Ok(())
    }
}

/// One transmission branch (π model). `tap` is the off-nominal turns ratio
/// on the `from` side; 1.0 for plain lines.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Branch {
    pub from: usize,
    pub to: usize,
    pub r: f64,
    pub x: f64,
    /// Total line charging susceptance.
    #[serde(default)]
    pub b: f64,
    #[serde(default = "default_tap")]
    pub tap: f64,
}

fn default_tap() -> f64 {
    1.0
}

/// Assemble the bus admittance matrix for 1-based bus numbers `1..=n_bus`.
/// `shunts` are (bus, admittance) pairs added on the diagonal.
pub fn build_ybus(n_bus: usize, branches: &[Branch], shunts: &[(usize, Complex64)]) -> CMat {
    let mut y = CMat::zeros(n_bus, n_bus);
    for br in branches {
        let (f, t) = (br.from - 1, br.to - 1);
        let ys = Complex64::new(br.r, br.x).inv();
        let bc = Complex64::new(0.0, br.b / 2.0);
        let tap = Complex64::new(br.tap, 0.0);
        y[(f, f)] += (ys + bc) / (tap * tap);
        y[(t, t)] += ys + bc;
        y[(f, t)] -= ys / tap;
        y[(t, f)] -= ys / tap;
    }
    for &(bus, ys) in shunts {
        y[(bus - 1, bus - 1)] += ys;
    }
    y
}

/// Kron reduction: eliminate every node not in `retained`, returning the
/// Schur complement `Y_rr − Y_re · Y_ee⁻¹ · Y_er`. Port behavior at the
/// retained nodes is preserved.
pub fn kron_reduce(y_bus: &CMat, retained: &[usize]) -> Result<CMat, ModelError> {
    let m = y_bus.nrows();
    let mut keep = vec![false; m];
    for &idx in retained {
        if idx >= m || keep[idx] {
            return Err(ModelError::BadRetainedIndex { index: idx });
        }
        keep[idx] = true;
    }
    let eliminated: Vec<usize> = (0..m).filter(|&i| !keep[i]).collect();
    if eliminated.is_empty() {
        // nothing to eliminate: reorder only
        return Ok(select(y_bus, retained, retained));
    }

    let y_rr = select(y_bus, retained, retained);
    let y_re = select(y_bus, retained, &eliminated);
    let y_er = select(y_bus, &eliminated, retained);
    let y_ee = select(y_bus, &eliminated, &eliminated);

    let lu = y_ee.clone().lu();
    let solved = lu
        .solve(&y_er)
        .ok_or(ModelError::SingularEliminatedBlock { rcond: 0.0 })?;
    // crude condition estimate on the eliminated block
    let rcond = reciprocal_condition_estimate(&y_ee, &lu);
    if rcond < 1e-14 {
        return Err(ModelError::SingularEliminatedBlock { rcond });
    }
    Ok(y_rr - y_re * solved)
}

fn select(y: &CMat, rows: &[usize], cols: &[usize]) -> CMat {
    CMat::from_fn(rows.len(), cols.len(), |i, j| y[(rows[i], cols[j])])
}

fn reciprocal_condition_estimate(a: &CMat, lu: &nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>) -> f64 {
    let n = a.nrows();
    let norm_a = (0..n)
        .map(|i| (0..n).map(|j| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0f64, f64::max);
    // one solve with a ones vector stands in for the inverse norm
    let ones = CMat::from_element(n, 1, Complex64::new(1.0, 0.0));
    match lu.solve(&ones) {
        Some(x) => {
            let norm_x = (0..n).map(|i| x[(i, 0)].norm()).fold(0.0f64, f64::max);
            if norm_x == 0.0 {
                0.0
            } else {
                1.0 / (norm_a * norm_x)
            }
        }
        None => 0.0,
    }
}
