//! Truncated power-series coefficient arrays and their arithmetic.
//!
//! A [`Series`] holds the scaled Taylor coefficients `X(k) = x^(k)(0) / k!`
//! of one variable, anchored at the start of the current time window. All
//! series that belong to the same window share a single truncation order `K`,
//! which keeps convolution bounds trivial.

use serde::{Deserialize, Serialize};

use crate::error::DtError;

/// Coefficient array of one variable's truncated power series.
///
/// `coeffs[k]` is the coefficient of `t^k`; the array has exactly `K + 1`
/// entries. `coeffs[0]` is the value of the represented function at the
/// window anchor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Series {
    coeffs: Vec<f64>,
}

impl Series {
    /// Series of a constant: `c` at order zero, zero everywhere above.
    pub fn constant(c: f64, order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = c;
        Series { coeffs }
    }

    /// All-zero series of the given order.
    pub fn zeros(order: usize) -> Self {
        Series {
            coeffs: vec![0.0; order + 1],
        }
    }

    pub fn from_coeffs(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least order 0");
        Series { coeffs }
    }

    /// Truncation order `K` (the series has `K + 1` coefficients).
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn set_coeff(&mut self, k: usize, value: f64) {
        self.coeffs[k] = value;
    }

    /// Convolution coefficient: `Σ_{m=0..k} X(m) · Y(k−m)`, the DT image of a
    /// product at order `k`.
    pub fn conv(x: &Series, y: &Series, k: usize) -> f64 {
        assert!(
            k <= x.order() && k <= y.order(),
            "conv index {k} out of range (orders {}, {})",
            x.order(),
            y.order()
        );
        conv_slices(&x.coeffs, &y.coeffs, k)
    }

    /// Element-wise linear combination `a·X + b·Y`.
    pub fn axpy(a: f64, x: &Series, b: f64, y: &Series) -> Result<Series, DtError> {
        if x.order() != y.order() {
            return Err(DtError::OrderMismatch {
                left: x.order(),
                right: y.order(),
            });
        }
        let coeffs = x
            .coeffs
            .iter()
            .zip(&y.coeffs)
            .map(|(&xi, &yi)| a * xi + b * yi)
            .collect();
        Ok(Series { coeffs })
    }

    /// Truncated series sum `Σ_{k=0..K} X(k)·t^k` in nested (Horner) form.
    ///
    /// `t` is the offset from the window anchor; accuracy beyond the window
    /// is the caller's responsibility.
    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc.mul_add(t, c))
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }
}

/// Convolution over raw coefficient slices; summed over a contiguous index
/// range in fixed ascending order so that partial sums recombine
/// deterministically (used by the parallel coefficient evaluator).
pub fn conv_range(x: &[f64], y: &[f64], k: usize, m_start: usize, m_end: usize) -> f64 {
    let mut acc = 0.0;
    for m in m_start..m_end {
        acc += x[m] * y[k - m];
    }
    acc
}

fn conv_slices(x: &[f64], y: &[f64], k: usize) -> f64 {
    conv_range(x, y, k, 0, k + 1)
}

/// Coupled sine/cosine series of one rotor angle.
///
/// `sin` and `cos` hold the DTs of `sin δ(t)` and `cos δ(t)`. They are only
/// closed as a pair: each order of one needs the previous orders of the
/// other.
#[derive(Clone, Debug)]
pub struct TrigPair {
    pub sin: Series,
    pub cos: Series,
}

impl TrigPair {
    /// Seed a pair from the anchor angle `delta0`; orders ≥ 1 start at zero
    /// and are filled by [`TrigPair::extend`].
    pub fn seeded(delta0: f64, order: usize) -> Self {
        let mut sin = Series::zeros(order);
        let mut cos = Series::zeros(order);
        sin.set_coeff(0, delta0.sin());
        cos.set_coeff(0, delta0.cos());
        TrigPair { sin, cos }
    }

    /// Compute `(S(k), C(k))` from `S(0..k)`, `C(0..k)` and the angle series
    /// `Δ(0..k)`:
    ///
    /// ```text
    /// S(k) =  (1/k) Σ_{m=0..k−1} C(m)·(k−m)·Δ(k−m)
    /// C(k) = −(1/k) Σ_{m=0..k−1} S(m)·(k−m)·Δ(k−m)
    /// ```
    ///
    /// which is the DT image of `ṡ = c·δ̇`, `ċ = −s·δ̇`. Order 0 is a seed,
    /// not an extension step.
    pub fn extend_at(&self, delta: &Series, k: usize) -> Result<(f64, f64), DtError> {
        if k == 0 {
            return Err(DtError::TrigSeedOrder);
        }
        let mut s = 0.0;
        let mut c = 0.0;
        for m in 0..k {
            let dd = (k - m) as f64 * delta.coeff(k - m);
            s += self.cos.coeff(m) * dd;
            c -= self.sin.coeff(m) * dd;
        }
        let inv_k = 1.0 / k as f64;
        Ok((s * inv_k, c * inv_k))
    }

    /// Extend the pair in place through order `k`.
    pub fn extend(&mut self, delta: &Series, k: usize) -> Result<(), DtError> {
        let (s, c) = self.extend_at(delta, k)?;
        self.sin.set_coeff(k, s);
        self.cos.set_coeff(k, c);
        Ok(())
    }
}
