//! Peak extraction and synchronous two-axis control synthesis.
//!
//! A filter-function peak is an actionable control knob: applying a weak
//! tone `db * cos(2 pi f (t - T/2) - phase)` synchronously with the drive
//! rotates the qubit about the peak's axis with efficiency equal to the
//! peak gain. Peaks are located per component, refined by three-point
//! parabolic interpolation, and qualified by axis purity.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::filter::{normalize_deg, FilterFunctionSweep};
use crate::pauli::Axis;
use crate::scalar::Scalar;

/// Purity a peak needs to count as a clean single-axis control.
pub const PURITY_THRESHOLD: f64 = 0.9;
/// Weak-control amplitude cap as a fraction of the drive amplitude.
pub const WEAK_CONTROL_FRACTION: f64 = 0.05;
/// Largest period count [`synthesize_control`] will try.
pub const MAX_PERIODS: u32 = 10_000;

/// One synchronous control option extracted from a sweep.
#[derive(Debug, Clone, Copy, Serialize)]
#[serde(bound(serialize = "S: Serialize"))]
pub struct ControlSolution<S: Scalar> {
    /// Peak frequency, MHz (parabolically refined).
    pub frequency_mhz: S,
    /// Phase of the peak component at the refined frequency, degrees.
    pub phase_deg: S,
    /// Dominant rotation axis.
    pub axis: Axis,
    /// `|F_ij|` at the peak.
    pub gain: S,
    /// Nearest integer multiple of the drive base frequency, 0 when the
    /// drive is non-harmonic or the peak is off-harmonic.
    pub harmonic_index: u32,
    /// Peak gain over the combined magnitude at the same frequency.
    pub purity: S,
}

impl<S: Scalar> ControlSolution<S> {
    /// Clean single-axis peaks hold at least 90% of the combined magnitude.
    pub fn is_clean(&self) -> bool {
        self.purity >= S::from_f64_lossy(PURITY_THRESHOLD)
    }
}

/// Locate local maxima of every `|F_ij(f)]` above `min_gain`.
///
/// Maxima are refined by fitting a parabola through the three surrounding
/// grid gains (never moving a peak by more than one grid step); phase and
/// purity are evaluated at the refined frequency by quadratic interpolation
/// of the complex values. Results are ordered by descending gain, then by
/// frequency.
pub fn find_peaks<S: Scalar>(
    sweep: &FilterFunctionSweep<S>,
    min_gain: S,
) -> Result<Vec<ControlSolution<S>>> {
    if sweep.freqs.is_empty() {
        return Err(Error::Domain("empty sweep".into()));
    }
    if !(min_gain > S::zero()) || !(min_gain < S::one()) {
        return Err(Error::validation("min_gain", "must lie in (0, 1)"));
    }
    let combined = sweep.combined();
    let mut out = Vec::new();
    for axis in Axis::ALL {
        let gains = sweep.gains(axis);
        for k in 1..gains.len().saturating_sub(1) {
            if !(gains[k] >= min_gain && gains[k] > gains[k - 1] && gains[k] >= gains[k + 1]) {
                continue;
            }
            let (df_frac, gain) = parabolic_refine(gains[k - 1], gains[k], gains[k + 1]);
            let f0 = sweep.freqs[k];
            let step = if df_frac >= S::zero() {
                sweep.freqs[k + 1] - f0
            } else {
                f0 - sweep.freqs[k - 1]
            };
            let f_star = f0 + step * df_frac;

            let phase_deg = interp_phase(sweep, axis, k, df_frac);
            let comb = quad_interp(combined[k - 1], combined[k], combined[k + 1], df_frac);
            let purity = if comb > S::zero() {
                (gain / comb).min(S::one())
            } else {
                S::one()
            };
            let harmonic_index = match sweep.base_freq {
                Some(base) if base > S::zero() => (f_star / base + S::from_f64_lossy(0.5))
                    .floor()
                    .to_f64_lossy()
                    .max(0.0) as u32,
                _ => 0,
            };
            out.push(ControlSolution {
                frequency_mhz: f_star,
                phase_deg,
                axis,
                gain: gain.min(S::one()),
                harmonic_index,
                purity,
            });
        }
    }
    out.sort_by(|a, b| {
        b.gain
            .partial_cmp(&a.gain)
            .unwrap()
            .then(a.frequency_mhz.partial_cmp(&b.frequency_mhz).unwrap())
    });
    Ok(out)
}

/// Vertex offset (in grid steps, clamped to +-1/2) and value of the parabola
/// through three consecutive gains with the middle one largest.
fn parabolic_refine<S: Scalar>(gm: S, g0: S, gp: S) -> (S, S) {
    let denom = gm - g0 - g0 + gp;
    let half = S::from_f64_lossy(0.5);
    if denom >= S::zero() {
        return (S::zero(), g0);
    }
    let mut x = half * (gm - gp) / denom;
    x = x.max(-half).min(half);
    (x, quad_interp(gm, g0, gp, x))
}

/// Quadratic interpolation of a sampled quantity at fractional offset `x`.
fn quad_interp<S: Scalar>(ym: S, y0: S, yp: S, x: S) -> S {
    let half = S::from_f64_lossy(0.5);
    y0 + half * x * (yp - ym) + half * x * x * (yp - y0 - y0 + ym)
}

fn interp_phase<S: Scalar>(sweep: &FilterFunctionSweep<S>, axis: Axis, k: usize, x: S) -> S {
    let cm = sweep.values[k - 1].component(axis);
    let c0 = sweep.values[k].component(axis);
    let cp = sweep.values[k + 1].component(axis);
    let re = quad_interp(cm.re, c0.re, cp.re, x);
    let im = quad_interp(cm.im, c0.im, cp.im, x);
    normalize_deg(im.atan2(re) * S::from_f64_lossy(180.0) / S::PI())
}

/// Pick the two-axis pair with the best worst gain among clean solutions
/// with distinct axes; ties break toward the lower total frequency.
pub fn select_two_axis<S: Scalar>(
    solutions: &[ControlSolution<S>],
) -> Result<(ControlSolution<S>, ControlSolution<S>)> {
    type Best<S> = Option<(S, S, (ControlSolution<S>, ControlSolution<S>))>;
    let clean: Vec<&ControlSolution<S>> = solutions.iter().filter(|s| s.is_clean()).collect();
    let mut best: Best<S> = None;
    for (i, a) in clean.iter().enumerate() {
        for b in clean.iter().skip(i + 1) {
            if a.axis == b.axis {
                continue;
            }
            let min_gain = a.gain.min(b.gain);
            let f_sum = a.frequency_mhz + b.frequency_mhz;
            let better = match &best {
                None => true,
                Some((bg, bf, _)) => min_gain > *bg || (min_gain == *bg && f_sum < *bf),
            };
            if better {
                let pair = if a.gain >= b.gain {
                    (**a, **b)
                } else {
                    (**b, **a)
                };
                best = Some((min_gain, f_sum, pair));
            }
        }
    }
    best.map(|(_, _, pair)| pair)
        .ok_or_else(|| Error::Controllability("no pair of clean peaks with distinct axes".into()))
}

/// Amplitude and period count realizing a Bloch rotation `theta` about the
/// solution axis with a weak synchronous tone.
///
/// Solves `theta = 2 * db * n * t_drive * gain` for the smallest integer
/// `n >= 1` keeping `db` at or below 5% of the drive amplitude
/// `max_drive_amp`; the factor 2 converts the su(2) coefficient to a Bloch
/// angle.
pub fn synthesize_control<S: Scalar>(
    sol: &ControlSolution<S>,
    theta_rad: S,
    t_drive_us: S,
    max_drive_amp: S,
) -> Result<(S, u32)> {
    if !(theta_rad > S::zero()) || theta_rad > S::PI() {
        return Err(Error::validation("theta", "must lie in (0, pi]"));
    }
    if !(t_drive_us > S::zero()) {
        return Err(Error::validation("t_drive", "must be positive"));
    }
    if !(sol.gain > S::zero()) {
        return Err(Error::validation("gain", "must be positive"));
    }
    let cap = S::from_f64_lossy(WEAK_CONTROL_FRACTION) * max_drive_amp;
    if !(cap > S::zero()) {
        return Err(Error::AmplitudeLimit(
            "drive amplitude is zero; weak-control guard unsatisfiable".into(),
        ));
    }
    let two = S::from_f64_lossy(2.0);
    let n_min = (theta_rad / (two * t_drive_us * sol.gain * cap)).ceil();
    let n = n_min.max(S::one()).to_f64_lossy() as u64;
    if n > MAX_PERIODS as u64 {
        return Err(Error::AmplitudeLimit(format!(
            "needs {n} periods (> {MAX_PERIODS}) to stay under the weak-control cap"
        )));
    }
    let n = n as u32;
    let db = theta_rad / (two * S::from_u32(n).unwrap() * t_drive_us * sol.gain);
    Ok((db, n))
}
