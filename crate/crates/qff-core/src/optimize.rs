//! Derivative-free synthesis of driving fields with Kth-order cancellation.
//!
//! The objective sums the squared dimensionless Magnus norms of one drive
//! period, `sum_k w_k ||A_k||^2 / T^{2k}`, and a seeded Nelder-Mead simplex
//! searches the harmonic parameters. Restarts run sequentially with a fixed
//! RNG stream and stop early once a restart converges, so results are
//! reproducible bit for bit.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::drive::{DriveSpec, HarmonicTerm, TimeGrid};
use crate::error::{Error, Result};
use crate::magnus::magnus_taylor;
use crate::pauli::Axis;
use crate::scalar::Scalar;

/// Objective value at which a search counts as converged.
pub const CONVERGENCE_TARGET: f64 = 1e-8;

/// Internal stop threshold: once in a basin the simplex keeps contracting
/// well past the convergence target, so converged drives also satisfy the
/// much tighter curve-closure check.
const POLISH_TARGET: f64 = 1e-16;

/// How searched parameters map to harmonic amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parameterization {
    /// `(omega, gamma, delta)`: overall scale (rad/us) times the unit-norm
    /// spherical weight triple. Requires exactly three harmonics.
    Spherical,
    /// One amplitude (rad/us) per harmonic.
    RawAmplitudes,
}

/// Search configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound(
    serialize = "S: Serialize",
    deserialize = "S: serde::de::DeserializeOwned"
))]
pub struct OptimizerConfig<S: Scalar> {
    /// Harmonic indices carrying amplitude.
    pub harmonics: Vec<u32>,
    /// Cancellation order `K`.
    pub order: usize,
    /// Per-order weights `w_1..w_K`; empty means all ones.
    #[serde(default)]
    pub weights: Vec<S>,
    pub parameterization: Parameterization,
    /// Base frequency, MHz; the drive period is its inverse.
    pub base_freq: S,
    /// Objective evaluations allowed per restart.
    pub budget: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Propagation resolution for each objective evaluation.
    #[serde(default = "default_steps")]
    pub steps_per_period: usize,
}

fn default_steps() -> usize {
    4096
}

impl<S: Scalar> OptimizerConfig<S> {
    pub fn validate(&self) -> Result<()> {
        if self.order == 0 {
            return Err(Error::validation("order", "must be at least 1"));
        }
        if self.budget < 100 {
            return Err(Error::validation("budget", "must be at least 100"));
        }
        if self.restarts == 0 {
            return Err(Error::validation("restarts", "must be at least 1"));
        }
        if self.harmonics.is_empty() {
            return Err(Error::validation("harmonics", "must be non-empty"));
        }
        if self.parameterization == Parameterization::Spherical && self.harmonics.len() != 3 {
            return Err(Error::validation(
                "harmonics",
                "spherical parameterization needs exactly three harmonics",
            ));
        }
        if !(self.base_freq > S::zero()) {
            return Err(Error::validation("base_freq", "must be positive"));
        }
        if !self.weights.is_empty() {
            if self.weights.len() != self.order {
                return Err(Error::validation("weights", "need one weight per order"));
            }
            if self.weights.iter().any(|w| !(*w > S::zero())) {
                return Err(Error::validation("weights", "must be positive"));
            }
        }
        Ok(())
    }

    fn dim(&self) -> usize {
        match self.parameterization {
            Parameterization::Spherical => 3,
            Parameterization::RawAmplitudes => self.harmonics.len(),
        }
    }

    fn weight(&self, k: usize) -> S {
        if self.weights.is_empty() {
            S::one()
        } else {
            self.weights[k - 1]
        }
    }

    /// Drive period `1 / base_freq`, us.
    pub fn period(&self) -> S {
        S::one() / self.base_freq
    }
}

/// Search outcome.
#[derive(Debug, Clone, Serialize)]
#[serde(bound(serialize = "S: Serialize"))]
pub struct OptimizerResult<S: Scalar> {
    pub params: Vec<S>,
    pub objective: S,
    /// `||A_k||` at the best parameters, us^k, k = 1..K.
    pub term_norms: Vec<S>,
    pub evaluations: usize,
    pub converged: bool,
    /// Dimensionless modulation index `|scale| * T / pi` of the result.
    pub modulation_index: S,
}

/// Build the one-period drive a parameter vector describes.
pub fn build_drive<S: Scalar>(params: &[S], config: &OptimizerConfig<S>) -> Result<DriveSpec<S>> {
    if params.len() != config.dim() {
        return Err(Error::validation(
            "params",
            format!("expected {} parameters, got {}", config.dim(), params.len()),
        ));
    }
    let amps: Vec<S> = match config.parameterization {
        Parameterization::Spherical => {
            let (h1, h2, h3) = crate::drive::spherical_weights(params[1], params[2]);
            vec![params[0] * h1, params[0] * h2, params[0] * h3]
        }
        Parameterization::RawAmplitudes => params.to_vec(),
    };
    let spec = DriveSpec::Harmonics {
        base_freq: config.base_freq,
        periods: 1,
        terms: config
            .harmonics
            .iter()
            .zip(&amps)
            .map(|(&harmonic, &amp_i)| HarmonicTerm {
                harmonic,
                amp_i,
                amp_q: S::zero(),
            })
            .collect(),
    };
    spec.validate()?;
    Ok(spec)
}

/// Weighted squared Magnus norms of one period, `sum_k w_k ||A_k||^2 / T^2k`.
pub fn objective<S: Scalar>(params: &[S], config: &OptimizerConfig<S>) -> Result<S> {
    Ok(objective_with_norms(params, config)?.0)
}

fn objective_with_norms<S: Scalar>(
    params: &[S],
    config: &OptimizerConfig<S>,
) -> Result<(S, Vec<S>)> {
    let spec = build_drive(params, config)?;
    let grid = TimeGrid::span(config.period(), config.steps_per_period)?;
    let series = magnus_taylor(&spec, &grid, Axis::Z, config.order)?;
    let t = config.period();
    let mut acc = S::zero();
    let mut norms = Vec::with_capacity(config.order);
    for k in 1..=config.order {
        let n = series.term(k).norm();
        norms.push(n);
        let scaled = n / t.powi(k as i32);
        acc += config.weight(k) * scaled * scaled;
    }
    Ok((acc, norms))
}

/// Nelder-Mead search with seeded random restarts.
///
/// Restarts draw initial points from the seeded stream and run one after
/// another; the loop stops at the first restart whose best objective falls
/// below [`CONVERGENCE_TARGET`]. Budget exhaustion is reported through
/// `converged = false`, not an error.
pub fn optimize<S: Scalar>(config: &OptimizerConfig<S>) -> Result<OptimizerResult<S>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let dim = config.dim();
    let period = config.period().to_f64_lossy();
    let target = S::from_f64_lossy(CONVERGENCE_TARGET);

    let mut best: Option<(Vec<S>, S)> = None;
    let mut evaluations = 0usize;

    for _ in 0..config.restarts {
        let mut budget = config.budget;

        // best-of-16 random initialization
        let mut x0: Option<(Vec<S>, S)> = None;
        for _ in 0..16 {
            if budget == 0 {
                break;
            }
            let cand = random_point(&mut rng, dim, period, config.parameterization);
            let f = finite_or_inf(objective(&cand, config));
            evaluations += 1;
            budget -= 1;
            if x0.as_ref().is_none_or(|(_, fb)| f < *fb) {
                x0 = Some((cand, f));
            }
        }
        let Some((start, _)) = x0 else { break };

        let scales = simplex_scales(dim, period, config.parameterization);
        let eval = |x: &[S]| finite_or_inf(objective(x, config));
        let (x_best, f_best, used) = nelder_mead(
            &eval,
            &start,
            &scales,
            budget,
            S::from_f64_lossy(POLISH_TARGET),
        );
        evaluations += used;

        if best.as_ref().is_none_or(|(_, fb)| f_best < *fb) {
            best = Some((x_best, f_best));
        }
        if best.as_ref().is_some_and(|(_, fb)| *fb <= target) {
            break;
        }
    }

    let (params, _) =
        best.ok_or_else(|| Error::SearchFailure("no restart produced a point".into()))?;
    // recompute at the best point so the reported objective and norms are
    // exactly the function of the reported parameters
    let (objective_value, term_norms) = objective_with_norms(&params, config)?;
    let scale = match config.parameterization {
        Parameterization::Spherical => params[0],
        Parameterization::RawAmplitudes => {
            params.iter().fold(S::zero(), |acc, a| acc + *a * *a).sqrt()
        }
    };
    let modulation_index = (scale * config.period() / S::PI()).abs();
    Ok(OptimizerResult {
        converged: objective_value <= target,
        params,
        objective: objective_value,
        term_norms,
        evaluations,
        modulation_index,
    })
}

/// Failed or non-finite evaluations rank behind every finite one.
fn finite_or_inf<S: Scalar>(r: Result<S>) -> S {
    match r {
        Ok(v) if v.is_finite() => v,
        _ => S::infinity(),
    }
}

fn random_point<S: Scalar>(
    rng: &mut ChaCha8Rng,
    dim: usize,
    period: f64,
    param: Parameterization,
) -> Vec<S> {
    let amp_scale = std::f64::consts::PI / period; // one modulation-index unit
    match param {
        Parameterization::Spherical => {
            let m: f64 = rng.gen_range(0.5..8.0) * if rng.gen::<bool>() { 1.0 } else { -1.0 };
            let gamma: f64 =
                rng.gen_range(-std::f64::consts::FRAC_PI_2..std::f64::consts::FRAC_PI_2);
            let delta: f64 = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
            vec![
                S::from_f64_lossy(m * amp_scale),
                S::from_f64_lossy(gamma),
                S::from_f64_lossy(delta),
            ]
        }
        Parameterization::RawAmplitudes => (0..dim)
            .map(|_| S::from_f64_lossy(rng.gen_range(-8.0..8.0) * amp_scale))
            .collect(),
    }
}

fn simplex_scales<S: Scalar>(dim: usize, period: f64, param: Parameterization) -> Vec<S> {
    let amp_scale = std::f64::consts::PI / period;
    match param {
        Parameterization::Spherical => vec![
            S::from_f64_lossy(0.5 * amp_scale),
            S::from_f64_lossy(0.3),
            S::from_f64_lossy(0.3),
        ],
        Parameterization::RawAmplitudes => {
            vec![S::from_f64_lossy(0.5 * amp_scale); dim]
        }
    }
}

/// Deterministic Nelder-Mead with standard coefficients; returns the best
/// point, its value and the number of objective evaluations spent.
fn nelder_mead<S: Scalar, F: Fn(&[S]) -> S>(
    f: &F,
    x0: &[S],
    scales: &[S],
    budget: usize,
    target: S,
) -> (Vec<S>, S, usize) {
    let dim = x0.len();
    let mut evals = 0usize;
    let eval = |x: &[S], evals: &mut usize| -> S {
        *evals += 1;
        f(x)
    };

    let mut simplex: Vec<(Vec<S>, S)> = Vec::with_capacity(dim + 1);
    let v0 = eval(x0, &mut evals);
    simplex.push((x0.to_vec(), v0));
    for i in 0..dim {
        if evals >= budget {
            break;
        }
        let mut x = x0.to_vec();
        x[i] += scales[i];
        let v = eval(&x, &mut evals);
        simplex.push((x, v));
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());

    let (alpha, gamma, beta, sigma) = (1.0, 2.0, 0.5, 0.5);
    while evals < budget && simplex[0].1 > target && simplex.len() == dim + 1 {
        let worst = simplex[dim].clone();
        let second = simplex[dim - 1].1;
        let best = simplex[0].1;

        // centroid of all but the worst
        let mut centroid = vec![S::zero(); dim];
        for (x, _) in &simplex[..dim] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += *xi;
            }
        }
        let inv = S::one() / S::from_usize(dim).unwrap();
        for c in centroid.iter_mut() {
            *c *= inv;
        }

        let blend = |a: f64, b: f64| -> Vec<S> {
            let (wa, wb) = (S::from_f64_lossy(a), S::from_f64_lossy(b));
            centroid
                .iter()
                .zip(&worst.0)
                .map(|(c, w)| *c * wa + *w * wb)
                .collect()
        };

        let reflected = blend(1.0 + alpha, -alpha);
        let fr = eval(&reflected, &mut evals);
        if fr < best {
            if evals < budget {
                let expanded = blend(1.0 + alpha * gamma, -alpha * gamma);
                let fe = eval(&expanded, &mut evals);
                simplex[dim] = if fe < fr {
                    (expanded, fe)
                } else {
                    (reflected, fr)
                };
            } else {
                simplex[dim] = (reflected, fr);
            }
        } else if fr < second {
            simplex[dim] = (reflected, fr);
        } else {
            let contracted = if fr < worst.1 {
                blend(1.0 + alpha * beta, -alpha * beta)
            } else {
                blend(1.0 - beta, beta)
            };
            if evals >= budget {
                break;
            }
            let fc = eval(&contracted, &mut evals);
            if fc < worst.1.min(fr) {
                simplex[dim] = (contracted, fc);
            } else {
                // shrink toward the best vertex
                let best_x = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    if evals >= budget {
                        break;
                    }
                    let x: Vec<S> = best_x
                        .iter()
                        .zip(&entry.0)
                        .map(|(b, xi)| *b + (*xi - *b) * S::from_f64_lossy(sigma))
                        .collect();
                    let v = eval(&x, &mut evals);
                    *entry = (x, v);
                }
            }
        }
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());

        // degenerate simplex: stop
        let spread = simplex[dim].1 - simplex[0].1;
        if spread < S::from_f64_lossy(1e-18) {
            break;
        }
    }

    let (x, v) = simplex.swap_remove(0);
    (x, v, evals)
}
