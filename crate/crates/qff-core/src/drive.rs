//! Declarative driving-field specifications and their file schema.
//!
//! A [`DriveSpec`] describes the in-phase / quadrature envelope pair
//! `(omega_i(t), omega_q(t))` of a resonant drive, in rad/us, multiplying
//! `sigma_x` and `sigma_y` respectively. Times are microseconds and
//! frequencies megahertz throughout.
//!
//! Unit convention (normative for the whole crate): a constant envelope of
//! amplitude `W` rad/us on `sigma_x` rotates the Bloch vector by `2 W t`
//! radians after `t` us, so a Rabi frequency of `f_R` MHz corresponds to
//! `W = pi * f_R` rad/us.
//!
//! # Drive files
//!
//! Drive files are TOML with a `kind` discriminator and no unit suffixes
//! inside values:
//!
//! ```toml
//! kind = "piecewise"                      # | "harmonics" | "sampled"
//! segments = [                            # durations us, amplitudes rad/us
//!     { duration = 0.4, omega_i = 0.0, omega_q = 0.0 },
//!     { duration = 0.5, omega_i = 3.141592653589793, omega_q = 0.0 },
//! ]
//! ```
//!
//! ```toml
//! kind = "harmonics"
//! base_freq = 1.0                         # MHz
//! periods = 5
//! terms = [{ harmonic = 1, amp_i = 4.44288, amp_q = 0.0 }]  # rad/us
//! ```
//!
//! ```toml
//! kind = "sampled"
//! dt = 0.01                               # us between samples
//! samples = [[0.0, 0.0], [1.5, 0.0]]      # (omega_i, omega_q) rad/us
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::Axis;
use crate::scalar::Scalar;

/// One constant-envelope segment of a piecewise drive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "S: Serialize",
    deserialize = "S: serde::de::DeserializeOwned"
))]
pub struct Segment<S: Scalar> {
    /// Length of the segment, us.
    pub duration: S,
    /// In-phase amplitude (`sigma_x`), rad/us.
    pub omega_i: S,
    /// Quadrature amplitude (`sigma_y`), rad/us.
    pub omega_q: S,
}

/// One cosine term of a harmonic-series drive: contributes
/// `amp * cos(2 pi * harmonic * base_freq * t)` on each quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "S: Serialize",
    deserialize = "S: serde::de::DeserializeOwned"
))]
pub struct HarmonicTerm<S: Scalar> {
    /// Harmonic index `n >= 1` of the base frequency.
    pub harmonic: u32,
    /// In-phase amplitude, rad/us.
    pub amp_i: S,
    /// Quadrature amplitude, rad/us.
    pub amp_q: S,
}

/// Declarative description of a driving field envelope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    tag = "kind",
    rename_all = "snake_case",
    bound(
        serialize = "S: Serialize",
        deserialize = "S: serde::de::DeserializeOwned"
    )
)]
pub enum DriveSpec<S: Scalar> {
    /// Piecewise-constant envelopes.
    Piecewise { segments: Vec<Segment<S>> },
    /// Cosine series on a common base frequency, lasting an integer number
    /// of base periods.
    Harmonics {
        /// Base frequency, MHz.
        base_freq: S,
        /// Total duration in base periods.
        periods: u32,
        terms: Vec<HarmonicTerm<S>>,
    },
    /// Uniformly sampled envelopes at spacing `dt`, linearly interpolated.
    /// Sample `k` sits at `t = k * dt`; duration is `(len - 1) * dt`.
    Sampled { dt: S, samples: Vec<(S, S)> },
}

impl<S: Scalar> DriveSpec<S> {
    /// Constant drive `(omega_i, omega_q)` for `duration` us.
    pub fn constant(omega_i: S, omega_q: S, duration: S) -> Result<Self> {
        let spec = DriveSpec::Piecewise {
            segments: vec![Segment {
                duration,
                omega_i,
                omega_q,
            }],
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Zero drive (free evolution) for `duration` us.
    pub fn free(duration: S) -> Result<Self> {
        Self::constant(S::zero(), S::zero(), duration)
    }

    /// Single-cosine amplitude modulation `amplitude * cos(2 pi t / period)`
    /// on the in-phase quadrature, over an integer number of periods.
    pub fn cosine_modulated(amplitude: S, period: S, periods: u32) -> Result<Self> {
        if period <= S::zero() {
            return Err(Error::validation("period", "must be positive"));
        }
        let spec = DriveSpec::Harmonics {
            base_freq: S::one() / period,
            periods,
            terms: vec![HarmonicTerm {
                harmonic: 1,
                amp_i: amplitude,
                amp_q: S::zero(),
            }],
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Total duration, us.
    pub fn duration(&self) -> S {
        match self {
            DriveSpec::Piecewise { segments } => {
                segments.iter().fold(S::zero(), |acc, s| acc + s.duration)
            }
            DriveSpec::Harmonics {
                base_freq, periods, ..
            } => S::from_u32(*periods).unwrap() / *base_freq,
            DriveSpec::Sampled { dt, samples } => {
                *dt * S::from_usize(samples.len().saturating_sub(1)).unwrap()
            }
        }
    }

    /// Base period for grid construction: one period of the base frequency
    /// for harmonic drives, the full duration otherwise.
    pub fn base_period(&self) -> S {
        match self {
            DriveSpec::Harmonics { base_freq, .. } => S::one() / *base_freq,
            _ => self.duration(),
        }
    }

    /// Base frequency in MHz, when the drive is a harmonic series.
    pub fn base_freq(&self) -> Option<S> {
        match self {
            DriveSpec::Harmonics { base_freq, .. } => Some(*base_freq),
            _ => None,
        }
    }

    /// Envelope value at time `t` (harmonic drives extend periodically).
    pub fn envelope_at(&self, t: S) -> (S, S) {
        match self {
            DriveSpec::Piecewise { segments } => {
                let mut acc = S::zero();
                for seg in segments {
                    acc += seg.duration;
                    if t < acc {
                        return (seg.omega_i, seg.omega_q);
                    }
                }
                segments
                    .last()
                    .map_or((S::zero(), S::zero()), |s| (s.omega_i, s.omega_q))
            }
            DriveSpec::Harmonics {
                base_freq, terms, ..
            } => {
                let two_pi = S::from_f64_lossy(2.0) * S::PI();
                let mut wi = S::zero();
                let mut wq = S::zero();
                for term in terms {
                    let ph = two_pi * S::from_u32(term.harmonic).unwrap() * *base_freq * t;
                    let c = ph.cos();
                    wi += term.amp_i * c;
                    wq += term.amp_q * c;
                }
                (wi, wq)
            }
            DriveSpec::Sampled { dt, samples } => {
                if samples.is_empty() {
                    return (S::zero(), S::zero());
                }
                let pos = (t / *dt).max(S::zero());
                let idx = pos.floor().to_f64_lossy() as usize;
                if idx + 1 >= samples.len() {
                    let last = samples[samples.len() - 1];
                    return (last.0, last.1);
                }
                let frac = pos - S::from_usize(idx).unwrap();
                let (a_i, a_q) = samples[idx];
                let (b_i, b_q) = samples[idx + 1];
                (a_i + (b_i - a_i) * frac, a_q + (b_q - a_q) * frac)
            }
        }
    }

    /// Largest envelope magnitude `sqrt(wi^2 + wq^2)` over the drive, rad/us.
    ///
    /// Exact for piecewise and sampled drives; harmonic drives are scanned
    /// densely over one base period.
    pub fn max_amplitude(&self) -> S {
        match self {
            DriveSpec::Piecewise { segments } => segments
                .iter()
                .map(|s| (s.omega_i * s.omega_i + s.omega_q * s.omega_q).sqrt())
                .fold(S::zero(), S::max),
            DriveSpec::Sampled { samples, .. } => samples
                .iter()
                .map(|(i, q)| (*i * *i + *q * *q).sqrt())
                .fold(S::zero(), S::max),
            DriveSpec::Harmonics { base_freq, .. } => {
                let n = 8192;
                let period = S::one() / *base_freq;
                let mut m = S::zero();
                for k in 0..n {
                    let t = period * S::from_usize(k).unwrap() / S::from_usize(n).unwrap();
                    let (wi, wq) = self.envelope_at(t);
                    m = m.max((wi * wi + wq * wq).sqrt());
                }
                m
            }
        }
    }

    /// Check all structural invariants, naming the offending field.
    pub fn validate(&self) -> Result<()> {
        match self {
            DriveSpec::Piecewise { segments } => {
                if segments.is_empty() {
                    return Err(Error::validation(
                        "segments",
                        "at least one segment required",
                    ));
                }
                for (i, seg) in segments.iter().enumerate() {
                    if !(seg.duration > S::zero()) || !seg.duration.is_finite() {
                        return Err(Error::validation(
                            &format!("segments[{i}].duration"),
                            "must be positive and finite",
                        ));
                    }
                    if !seg.omega_i.is_finite() || !seg.omega_q.is_finite() {
                        return Err(Error::validation(
                            &format!("segments[{i}]"),
                            "amplitudes must be finite",
                        ));
                    }
                }
            }
            DriveSpec::Harmonics {
                base_freq,
                periods,
                terms,
            } => {
                if !(*base_freq > S::zero()) || !base_freq.is_finite() {
                    return Err(Error::validation(
                        "base_freq",
                        "must be positive and finite",
                    ));
                }
                if *periods == 0 {
                    return Err(Error::validation("periods", "must be at least 1"));
                }
                if terms.is_empty() {
                    return Err(Error::validation("terms", "at least one term required"));
                }
                let mut seen = std::collections::BTreeSet::new();
                for (i, term) in terms.iter().enumerate() {
                    if term.harmonic == 0 {
                        return Err(Error::validation(
                            &format!("terms[{i}].harmonic"),
                            "harmonic index must be >= 1",
                        ));
                    }
                    if !seen.insert(term.harmonic) {
                        return Err(Error::validation(
                            &format!("terms[{i}].harmonic"),
                            format!("harmonic {} repeated", term.harmonic),
                        ));
                    }
                    if !term.amp_i.is_finite() || !term.amp_q.is_finite() {
                        return Err(Error::validation(
                            &format!("terms[{i}]"),
                            "amplitudes must be finite",
                        ));
                    }
                }
            }
            DriveSpec::Sampled { dt, samples } => {
                if !(*dt > S::zero()) || !dt.is_finite() {
                    return Err(Error::validation("dt", "must be positive and finite"));
                }
                if samples.len() < 2 {
                    return Err(Error::validation(
                        "samples",
                        "at least two samples required",
                    ));
                }
                for (i, (a, b)) in samples.iter().enumerate() {
                    if !a.is_finite() || !b.is_finite() {
                        return Err(Error::validation(
                            &format!("samples[{i}]"),
                            "amplitudes must be finite",
                        ));
                    }
                }
            }
        }
        if !(self.duration() > S::zero()) {
            return Err(Error::validation(
                "duration",
                "total duration must be positive",
            ));
        }
        Ok(())
    }
}

/// Uniform time grid `t_k = k * dt`, `k = 0..=n_steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid<S: Scalar> {
    dt: S,
    n_steps: usize,
}

impl<S: Scalar> TimeGrid<S> {
    pub fn new(dt: S, n_steps: usize) -> Result<Self> {
        if !(dt > S::zero()) || !dt.is_finite() {
            return Err(Error::validation("dt", "must be positive and finite"));
        }
        if n_steps == 0 {
            return Err(Error::validation("n_steps", "must be at least 1"));
        }
        Ok(Self { dt, n_steps })
    }

    /// Grid spanning `total` us with `n_steps` uniform steps.
    pub fn span(total: S, n_steps: usize) -> Result<Self> {
        if !(total > S::zero()) {
            return Err(Error::validation("total", "must be positive"));
        }
        Self::new(total / S::from_usize(n_steps.max(1)).unwrap(), n_steps)
    }

    /// Grid covering one drive with roughly `steps_per_period` steps per
    /// base period.
    ///
    /// For piecewise drives the step count is raised to the smallest value
    /// that puts every segment boundary on a grid node (rationalizing the
    /// boundary fractions), so that midpoint propagation is exact per
    /// segment. Irrational boundary ratios fall back to the unaligned count.
    pub fn for_drive(spec: &DriveSpec<S>, steps_per_period: usize) -> Result<Self> {
        let total = spec.duration();
        let periods = match spec {
            DriveSpec::Harmonics { periods, .. } => *periods as usize,
            _ => 1,
        };
        let target = steps_per_period.max(1) * periods;
        let n = match spec {
            DriveSpec::Piecewise { segments } => {
                let mut boundaries = Vec::with_capacity(segments.len() - 1);
                let mut acc = S::zero();
                for seg in &segments[..segments.len() - 1] {
                    acc += seg.duration;
                    boundaries.push((acc / total).to_f64_lossy());
                }
                aligned_step_count(&boundaries, target)
            }
            _ => target,
        };
        Self::span(total, n)
    }

    pub fn dt(&self) -> S {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Total duration `n_steps * dt`, us.
    pub fn total(&self) -> S {
        self.dt * S::from_usize(self.n_steps).unwrap()
    }

    /// Node time `t_k`.
    pub fn t(&self, k: usize) -> S {
        self.dt * S::from_usize(k).unwrap()
    }

    /// Midpoint time `t_{k+1/2}` of step `k`.
    pub fn t_mid(&self, k: usize) -> S {
        self.dt * (S::from_usize(k).unwrap() + S::from_f64_lossy(0.5))
    }

    /// Same span with twice the steps.
    pub fn halved(&self) -> Self {
        Self {
            dt: self.dt * S::from_f64_lossy(0.5),
            n_steps: self.n_steps * 2,
        }
    }
}

/// Smallest step count `>= target` for which every boundary fraction is a
/// grid node, via continued-fraction rationalization (denominators capped at
/// 10^6, overall count capped at 2^24).
fn aligned_step_count(fractions: &[f64], target: usize) -> usize {
    const MAX_DEN: u64 = 1_000_000;
    const MAX_N: usize = 1 << 24;
    let mut l: u64 = 1;
    for &f in fractions {
        if let Some((_, den)) = rationalize(f, MAX_DEN) {
            l = lcm(l, den);
            if l as usize > MAX_N {
                return target;
            }
        } else {
            return target;
        }
    }
    let l = l as usize;
    let mult = target.div_ceil(l);
    (mult * l).min(MAX_N)
}

/// Best rational approximation `p/q` of `x` in (0, 1) with `q <= max_den`
/// and `|x - p/q| <= 1e-9`, by continued fractions.
fn rationalize(x: f64, max_den: u64) -> Option<(u64, u64)> {
    if !(0.0..1.0).contains(&x) {
        return None;
    }
    let (mut p0, mut q0, mut p1, mut q1) = (0u64, 1u64, 1u64, 0u64);
    let mut frac = x;
    for _ in 0..64 {
        let a = frac.floor();
        if a >= max_den as f64 {
            break;
        }
        let a_int = a as u64;
        let p2 = a_int.checked_mul(p1)?.checked_add(p0)?;
        let q2 = a_int.checked_mul(q1)?.checked_add(q0)?;
        if q2 > max_den {
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let rem = frac - a;
        if rem.abs() < 1e-12 {
            break;
        }
        frac = 1.0 / rem;
    }
    if q1 == 0 {
        return None;
    }
    ((x - p1 as f64 / q1 as f64).abs() <= 1e-9).then_some((p1, q1))
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// Sample the envelope at every step midpoint of `grid`.
///
/// The grid must not extend past the drive duration (within 1e-9 relative
/// slack for grids built from that duration); harmonic drives accept any
/// grid and extend periodically.
pub fn sample_envelope<S: Scalar>(spec: &DriveSpec<S>, grid: &TimeGrid<S>) -> Result<Vec<(S, S)>> {
    if !matches!(spec, DriveSpec::Harmonics { .. }) {
        let drive_total = spec.duration();
        let slack = S::from_f64_lossy(1e-9) * drive_total.max(S::one());
        if grid.total() > drive_total + slack {
            return Err(Error::DurationMismatch {
                grid_us: grid.total().to_f64_lossy(),
                drive_us: drive_total.to_f64_lossy(),
            });
        }
    }
    Ok((0..grid.n_steps())
        .map(|k| spec.envelope_at(grid.t_mid(k)))
        .collect())
}

/// Hahn echo with finite pulse length: free evolution for `tau/2`, a pi
/// rotation about x of duration `t_pi` (amplitude `pi / (2 t_pi)`), free
/// evolution for `tau/2`.
pub fn build_hahn_echo<S: Scalar>(tau: S, t_pi: S) -> Result<DriveSpec<S>> {
    if !(tau > S::zero()) {
        return Err(Error::validation("tau", "must be positive"));
    }
    if !(t_pi > S::zero()) {
        return Err(Error::validation("t_pi", "must be positive"));
    }
    let half = S::from_f64_lossy(0.5);
    let amp = S::PI() / (S::from_f64_lossy(2.0) * t_pi);
    let spec = DriveSpec::Piecewise {
        segments: vec![
            Segment {
                duration: tau * half,
                omega_i: S::zero(),
                omega_q: S::zero(),
            },
            Segment {
                duration: t_pi,
                omega_i: amp,
                omega_q: S::zero(),
            },
            Segment {
                duration: tau * half,
                omega_i: S::zero(),
                omega_q: S::zero(),
            },
        ],
    };
    spec.validate()?;
    Ok(spec)
}

/// Three-harmonic in-phase drive with spherically parameterized weights:
/// harmonics (1, 3, 5) carry amplitudes
/// `omega * (cos(gamma) cos(delta), cos(gamma) sin(delta), sin(gamma))`.
/// The weight triple has unit Euclidean norm before scaling by `omega`.
pub fn build_three_harmonic<S: Scalar>(
    omega: S,
    gamma: S,
    delta: S,
    base_freq: S,
    periods: u32,
) -> Result<DriveSpec<S>> {
    if !omega.is_finite() {
        return Err(Error::validation("omega", "must be finite"));
    }
    let (h1, h2, h3) = spherical_weights(gamma, delta);
    let spec = DriveSpec::Harmonics {
        base_freq,
        periods,
        terms: vec![
            HarmonicTerm {
                harmonic: 1,
                amp_i: omega * h1,
                amp_q: S::zero(),
            },
            HarmonicTerm {
                harmonic: 3,
                amp_i: omega * h2,
                amp_q: S::zero(),
            },
            HarmonicTerm {
                harmonic: 5,
                amp_i: omega * h3,
                amp_q: S::zero(),
            },
        ],
    };
    spec.validate()?;
    Ok(spec)
}

/// Unit-norm spherical weight triple `(cos g cos d, cos g sin d, sin g)`.
pub fn spherical_weights<S: Scalar>(gamma: S, delta: S) -> (S, S, S) {
    (
        gamma.cos() * delta.cos(),
        gamma.cos() * delta.sin(),
        gamma.sin(),
    )
}

/// Steps per period used by the period root searches below.
const PIN_STEPS: usize = 4096;

/// Smallest period `T > 0` at which the first-order accumulated effect of a
/// z perturbation vanishes for the single-cosine drive
/// `amplitude * cos(2 pi t / T)`.
///
/// The result satisfies `amplitude * T / pi = j_{0,1}` (first zero of the
/// Bessel function J0, about 2.4048) to much better than 1e-4 relative.
pub fn solve_smart_period<S: Scalar>(amplitude: S) -> Result<S> {
    if !(amplitude > S::zero()) {
        return Err(Error::validation("amplitude", "must be positive"));
    }
    first_closing_period(
        |period| DriveSpec::cosine_modulated(amplitude, period, 1),
        "single-cosine drive",
    )
}

/// Smallest period `T > 0` at which the first-order accumulated effect of a
/// z perturbation vanishes for the three-harmonic drive with weight shape
/// `(gamma, delta)` and fixed amplitude scale `omega` rad/us.
///
/// This pins the dimensionless product `omega * T` for a given shape the
/// same way [`solve_smart_period`] pins it for the single cosine.
pub fn pin_three_harmonic_period<S: Scalar>(omega: S, gamma: S, delta: S) -> Result<S> {
    if omega == S::zero() || !omega.is_finite() {
        return Err(Error::validation("omega", "must be nonzero and finite"));
    }
    first_closing_period(
        |period| build_three_harmonic(omega, gamma, delta, S::one() / period, 1),
        "three-harmonic drive",
    )
}

/// Root-find the smallest period where the z component of the first Magnus
/// term over one period changes sign.
fn first_closing_period<S, F>(make: F, what: &str) -> Result<S>
where
    S: Scalar,
    F: Fn(S) -> Result<DriveSpec<S>>,
{
    let a1z = |period: S| -> Result<S> {
        let spec = make(period)?;
        let grid = TimeGrid::span(period, PIN_STEPS)?;
        let trace = crate::propagate::propagate(&spec, &grid)?;
        let rot = crate::propagate::rotation_trace(&trace, Axis::Z);
        let series = crate::magnus::magnus_quadrature(&rot, 1)?;
        Ok(series.terms[0].z)
    };

    // Log-spaced scan for the first sign change, then bisection.
    let t_min = 0.005f64;
    let t_max = 1000.0f64;
    let samples: i32 = 400;
    let mut prev_t = S::from_f64_lossy(t_min);
    let mut prev_v = a1z(prev_t)?;
    let ratio = (t_max / t_min).powf(1.0 / f64::from(samples));
    for k in 1..=samples {
        let t = S::from_f64_lossy(t_min * ratio.powi(k));
        let v = a1z(t)?;
        if prev_v == S::zero() {
            return Ok(prev_t);
        }
        if (prev_v > S::zero()) != (v > S::zero()) {
            let (mut lo, mut hi, mut flo) = (prev_t, t, prev_v);
            for _ in 0..200 {
                let mid = (lo + hi) * S::from_f64_lossy(0.5);
                let fm = a1z(mid)?;
                if (flo > S::zero()) == (fm > S::zero()) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
                if (hi - lo) / hi < S::from_f64_lossy(1e-13) {
                    break;
                }
            }
            return Ok((lo + hi) * S::from_f64_lossy(0.5));
        }
        prev_t = t;
        prev_v = v;
    }
    Err(Error::SearchFailure(format!(
        "no first-order closing period for {what} in [{t_min}, {t_max}] us"
    )))
}

/// Parse a drive file in the documented TOML schema and validate it.
pub fn parse_drive_file<S>(text: &str) -> Result<DriveSpec<S>>
where
    S: Scalar + serde::de::DeserializeOwned,
{
    let spec: DriveSpec<S> = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    spec.validate()?;
    Ok(spec)
}

/// Serialize a drive to the documented TOML schema. Output round-trips
/// through [`parse_drive_file`] to an equal spec.
pub fn serialize_drive_file<S>(spec: &DriveSpec<S>) -> Result<String>
where
    S: Scalar + Serialize,
{
    toml::to_string(spec).map_err(|e| Error::Parse(e.to_string()))
}
