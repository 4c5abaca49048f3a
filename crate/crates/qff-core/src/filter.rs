//! The complex first-order filter function and its conventional cousin.
//!
//! For a perturbation along axis `i` under a drive of total time `T`, the
//! filter function value at frequency `f` is the complex Pauli 3-vector
//!
//! ```text
//! F_ij(f, T) = (1/T) * integral_0^T R_j(t) exp(i 2 pi f (t - T/2)) dt
//! ```
//!
//! evaluated by midpoint quadrature on the propagation grid. Three
//! conventions are normative here and shared with the space-curve and
//! oracle modules:
//!
//! * time normalization 1/T, so `|F_ij|` reads as rotation efficiency and
//!   the bare system has unit d.c. gain;
//! * trace decomposition with the 1/2 factor (see [`crate::pauli`]);
//! * phase referenced to the sequence center `T/2`, so a real perturbation
//!   `db * cos(2 pi f (t - T/2) + phi)` produces the first-order rotation
//!   vector `db * T * Re[e^{i phi} F_i(f, T)]`.
//!
//! The reported phase of a peak is directly the phase a synchronous control
//! tone must invert to drive that rotation.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::pauli::{Axis, CPauliVec};
use crate::propagate::RotationTrace;
use crate::scalar::Scalar;

/// Filter function evaluated at one frequency.
pub fn filter_function<S: Scalar>(rot: &RotationTrace<S>, f_mhz: S) -> CPauliVec<S> {
    let grid = rot.grid;
    let total = grid.total();
    let half_t = total * S::from_f64_lossy(0.5);
    let two_pi_f = S::from_f64_lossy(2.0) * S::PI() * f_mhz;
    let dt_over_t = grid.dt() / total;
    let mut acc = [Complex::new(S::zero(), S::zero()); 3];
    for (k, r) in rot.midpoint_rows().iter().enumerate() {
        let arg = two_pi_f * (grid.t_mid(k) - half_t);
        let e = Complex::new(arg.cos(), arg.sin());
        acc[0] += e.scale(r.x);
        acc[1] += e.scale(r.y);
        acc[2] += e.scale(r.z);
    }
    CPauliVec::new(
        acc[0].scale(dt_over_t),
        acc[1].scale(dt_over_t),
        acc[2].scale(dt_over_t),
    )
}

/// Per-frequency filter-function values over a sweep grid.
#[derive(Debug, Clone)]
pub struct FilterFunctionSweep<S: Scalar> {
    /// Perturbation axis `i` of `F_ij`.
    pub axis: Axis,
    /// Total drive time `T`, us.
    pub total_time: S,
    /// Sweep frequencies, MHz, increasing.
    pub freqs: Vec<S>,
    /// `F_ij(f, T)` per frequency.
    pub values: Vec<CPauliVec<S>>,
    /// Base frequency of the underlying drive, when known; lets peak
    /// extraction label harmonics.
    pub base_freq: Option<S>,
}

impl<S: Scalar> FilterFunctionSweep<S> {
    /// Attach the drive's base frequency for harmonic labeling.
    pub fn with_base_freq(mut self, base: Option<S>) -> Self {
        self.base_freq = base;
        self
    }

    /// `|F_ij|` for one component across the sweep.
    pub fn gains(&self, j: Axis) -> Vec<S> {
        self.values.iter().map(|v| v.component(j).norm()).collect()
    }

    /// `sqrt(sum_j |F_ij|^2)` across the sweep.
    pub fn combined(&self) -> Vec<S> {
        self.values
            .iter()
            .map(CPauliVec::combined_magnitude)
            .collect()
    }
}

/// Evaluate the filter function on every frequency of a grid.
///
/// Frequencies are independent; they are evaluated in parallel and merged by
/// index, so the result is identical for any thread count.
pub fn sweep<S: Scalar>(rot: &RotationTrace<S>, f_grid: &[S]) -> FilterFunctionSweep<S> {
    let values: Vec<CPauliVec<S>> = f_grid
        .par_iter()
        .map(|&f| filter_function(rot, f))
        .collect();
    FilterFunctionSweep {
        axis: rot.axis,
        total_time: rot.total_time(),
        freqs: f_grid.to_vec(),
        values,
        base_freq: None,
    }
}

/// Phase of one component in degrees, in `(-180, 180]`.
pub fn phase_deg<S: Scalar>(value: &CPauliVec<S>, j: Axis) -> Result<S> {
    let c = value.component(j);
    let mag = c.norm();
    if mag <= S::from_f64_lossy(1e-12) {
        return Err(Error::UndefinedPhase(mag.to_f64_lossy()));
    }
    Ok(normalize_deg(
        c.im.atan2(c.re) * S::from_f64_lossy(180.0) / S::PI(),
    ))
}

pub(crate) fn normalize_deg<S: Scalar>(mut deg: S) -> S {
    let full = S::from_f64_lossy(360.0);
    let half = S::from_f64_lossy(180.0);
    while deg > half {
        deg -= full;
    }
    while deg <= -half {
        deg += full;
    }
    deg
}

/// Amplitude gain in decibels, `20 log10 |F|`.
pub fn gain_db<S: Scalar>(gain: S) -> S {
    S::from_f64_lossy(20.0) * gain.log10()
}

/// Conventional switching-function filter function `|y~(f T)|^2`.
///
/// `segments` lists `(duration, sign)` pieces of the switching function
/// `y(t)`; `y~` is its time-normalized Fourier integral with the same `T/2`
/// centering as the complex filter function. Each segment integrates in
/// closed form, so this is an independent analytic route.
pub fn switching_ff<S: Scalar>(segments: &[(S, S)], f_mhz: S) -> S {
    let total: S = segments.iter().fold(S::zero(), |acc, s| acc + s.0);
    if total <= S::zero() {
        return S::zero();
    }
    let half_t = total * S::from_f64_lossy(0.5);
    let two_pi_f = S::from_f64_lossy(2.0) * S::PI() * f_mhz;
    let mut acc = Complex::new(S::zero(), S::zero());
    let mut start = S::zero();
    for &(len, sign) in segments {
        let mid = start + len * S::from_f64_lossy(0.5);
        let arg = two_pi_f * (mid - half_t);
        let phase = Complex::new(arg.cos(), arg.sin());
        let x = two_pi_f * len * S::from_f64_lossy(0.5);
        acc += phase.scale(sign * len * sinc(x));
        start += len;
    }
    (acc.scale(S::one() / total)).norm_sqr()
}

fn sinc<S: Scalar>(x: S) -> S {
    if x.abs() < S::from_f64_lossy(1e-8) {
        S::one() - x * x / S::from_f64_lossy(6.0)
    } else {
        x.sin() / x
    }
}

/// Tabulated one-sided noise power spectral density.
///
/// Rows are `(f MHz, S(f))` with strictly increasing frequency and
/// non-negative values; queries interpolate linearly.
#[derive(Debug, Clone)]
pub struct PsdTable<S: Scalar> {
    rows: Vec<(S, S)>,
}

impl<S: Scalar> PsdTable<S> {
    pub fn new(rows: Vec<(S, S)>) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::validation("psd", "need at least two rows"));
        }
        for w in rows.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::validation(
                    "psd",
                    "frequencies must be strictly increasing",
                ));
            }
        }
        if rows.iter().any(|&(_, s)| s < S::zero() || !s.is_finite()) {
            return Err(Error::validation(
                "psd",
                "values must be non-negative and finite",
            ));
        }
        Ok(Self { rows })
    }

    pub fn f_min(&self) -> S {
        self.rows[0].0
    }

    pub fn f_max(&self) -> S {
        self.rows[self.rows.len() - 1].0
    }

    /// Linear interpolation inside the covered range.
    pub fn value_at(&self, f: S) -> Option<S> {
        if f < self.f_min() || f > self.f_max() {
            return None;
        }
        let idx = self.rows.partition_point(|&(x, _)| x <= f);
        if idx == 0 {
            return Some(self.rows[0].1);
        }
        if idx >= self.rows.len() {
            return Some(self.rows[self.rows.len() - 1].1);
        }
        let (f0, s0) = self.rows[idx - 1];
        let (f1, s1) = self.rows[idx];
        let w = (f - f0) / (f1 - f0);
        Some(s0 + (s1 - s0) * w)
    }
}

/// PSD-overlap noise susceptibility, split by rotation axis.
#[derive(Debug, Clone, Copy)]
pub struct ChiReport<S: Scalar> {
    /// `chi_j = T^2 * integral S(f) |F_ij(f)|^2 df` per component, rad^2.
    pub per_axis: [S; 3],
    /// Sum over components.
    pub total: S,
    /// True when the sweep extends past the PSD coverage and was clipped.
    pub truncated: bool,
}

/// Overlap a filter-function sweep with a noise PSD by trapezoid over the
/// sweep frequencies inside the PSD coverage.
pub fn psd_overlap<S: Scalar>(
    sweep: &FilterFunctionSweep<S>,
    psd: &PsdTable<S>,
) -> Result<ChiReport<S>> {
    let pts: Vec<(S, [S; 3])> = sweep
        .freqs
        .iter()
        .zip(&sweep.values)
        .filter_map(|(&f, v)| {
            psd.value_at(f).map(|s| {
                (
                    f,
                    [s * v.x.norm_sqr(), s * v.y.norm_sqr(), s * v.z.norm_sqr()],
                )
            })
        })
        .collect();
    if pts.len() < 2 {
        return Err(Error::Domain(
            "sweep and PSD share fewer than two frequencies".into(),
        ));
    }
    let truncated = pts.len() < sweep.freqs.len();
    let half = S::from_f64_lossy(0.5);
    let mut acc = [S::zero(); 3];
    for w in pts.windows(2) {
        let df = w[1].0 - w[0].0;
        for (j, slot) in acc.iter_mut().enumerate() {
            *slot += (w[0].1[j] + w[1].1[j]) * half * df;
        }
    }
    let t2 = sweep.total_time * sweep.total_time;
    let per_axis = [acc[0] * t2, acc[1] * t2, acc[2] * t2];
    Ok(ChiReport {
        per_axis,
        total: per_axis[0] + per_axis[1] + per_axis[2],
        truncated,
    })
}

/// Uniform frequency grid `f_min, f_min + df, ..., <= f_max` (inclusive
/// within half a step).
pub fn frequency_grid<S: Scalar>(f_min: S, f_max: S, df: S) -> Result<Vec<S>> {
    if !(df > S::zero()) {
        return Err(Error::validation("df", "must be positive"));
    }
    if f_max < f_min {
        return Err(Error::validation("fmax", "must be >= fmin"));
    }
    let n = ((f_max - f_min) / df + S::from_f64_lossy(0.5)).to_f64_lossy() as usize;
    Ok((0..=n)
        .map(|k| f_min + df * S::from_usize(k).unwrap())
        .collect())
}
