//! Magnus expansion of the interaction-frame propagator in powers of a
//! quasistatic perturbation.
//!
//! With `V(d) = U_drive^dag(T) U_full(T)` the end-of-sequence propagator of
//! `H_drive + d sigma_i`, the series is defined so that
//!
//! ```text
//! V(d) = exp(-i sum_k d^k A_k . sigma) ,
//! ```
//!
//! `A_k` real Pauli 3-vectors with units us^k. Two independent routes
//! compute them:
//!
//! * [`magnus_quadrature`]: the nested-commutator integrals for `k <= 3`,
//!   reduced to cross/outer-product prefix sums over the rotation rows
//!   (one sweep, linear in step count);
//! * [`magnus_taylor`]: exact Taylor coefficients of the discretized
//!   `V(d)` at any order, from propagations at complex strengths
//!   `d_m = rho e^{2 pi i m / M}` on a circle and DFT inversion of
//!   `i log V(d_m)`.
//!
//! The circle route costs `O(K n_steps)` and needs no commutator
//! bookkeeping; the quadrature route exists as an independent cross-check.

use num_complex::Complex;

use crate::drive::{DriveSpec, TimeGrid};
use crate::error::{Error, Result};
use crate::oracle::{simulate_full, PerturbationSpec};
use crate::pauli::{su2_exp, su2_log, Axis, CPauliVec, Mat2c, PauliVec};
use crate::propagate::{drive_generators, fold_final, fold_final_c, RotationTrace};
use crate::scalar::Scalar;

/// How a [`MagnusSeries`] was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MagnusMethod {
    Quadrature,
    TaylorExtraction,
}

/// Magnus terms `A_1..A_K` for one perturbation axis at fixed total time.
#[derive(Debug, Clone)]
pub struct MagnusSeries<S: Scalar> {
    pub axis: Axis,
    /// Total drive time `T`, us.
    pub total_time: S,
    /// `terms[k-1] = A_k`, units us^k.
    pub terms: Vec<PauliVec<S>>,
    pub method: MagnusMethod,
}

impl<S: Scalar> MagnusSeries<S> {
    pub fn order(&self) -> usize {
        self.terms.len()
    }

    /// `A_k` (1-based).
    pub fn term(&self, k: usize) -> &PauliVec<S> {
        &self.terms[k - 1]
    }

    /// `||A_k|| / T^k`, the dimensionless size of each order.
    pub fn normalized_norms(&self) -> Vec<S> {
        self.terms
            .iter()
            .enumerate()
            .map(|(i, a)| a.norm() / self.total_time.powi(i as i32 + 1))
            .collect()
    }

    /// Rotation vector `sum_k d^k A_k` of the truncated series.
    pub fn rotation_vector(&self, delta: S) -> PauliVec<S> {
        let mut acc = PauliVec::zero();
        let mut p = S::one();
        for a in &self.terms {
            p *= delta;
            acc = acc + a.scale(p);
        }
        acc
    }
}

/// Nested-commutator quadrature for `A_1..A_K`, `K <= 3`.
///
/// Written over the rotation rows `r(t)` the integrals collapse to
///
/// ```text
/// A_1 = I r,     A_2 = I r x P,     P(t) = I_{<t} r
/// A_3 = (2/3) [ I r x Q + I (N r - s r) ]
/// ```
///
/// with `Q` the prefix of `r x P`, `N` the prefix of the outer product
/// `r P^T` and `s` the prefix of `r . P`; all prefixes accumulate in one
/// sweep over the step midpoints.
pub fn magnus_quadrature<S: Scalar>(
    rot: &RotationTrace<S>,
    k_max: usize,
) -> Result<MagnusSeries<S>> {
    if k_max == 0 || k_max > 3 {
        return Err(Error::UnsupportedOrder(k_max));
    }
    let dt = rot.grid.dt();
    let half_dt2 = dt * dt * S::from_f64_lossy(0.5);
    let mut a1 = PauliVec::zero();
    let mut a2 = PauliVec::zero();
    let mut a3_first = PauliVec::zero();
    let mut a3_second = PauliVec::zero();

    // prefix integrals up to the *start* of the current step; within-step
    // growth of P, Q, N, s contributes the explicit dt^2/2 terms (those of
    // A2 and of the N r - s r combination cancel exactly)
    let mut p = PauliVec::zero();
    let mut q = PauliVec::zero();
    let mut n = [[S::zero(); 3]; 3];
    let mut s_dot = S::zero();

    for r in rot.midpoint_rows() {
        let r = *r;
        a1 = a1 + r.scale(dt);
        if k_max >= 2 {
            a2 = a2 + r.cross(&p).scale(dt);
        }
        if k_max >= 3 {
            let rxp = r.cross(&p);
            a3_first = a3_first + r.cross(&q).scale(dt) + r.cross(&rxp).scale(half_dt2);
            let ra = r.to_array();
            let nr = PauliVec::new(
                n[0][0] * ra[0] + n[0][1] * ra[1] + n[0][2] * ra[2],
                n[1][0] * ra[0] + n[1][1] * ra[1] + n[1][2] * ra[2],
                n[2][0] * ra[0] + n[2][1] * ra[1] + n[2][2] * ra[2],
            );
            a3_second = a3_second + (nr - r.scale(s_dot)).scale(dt);

            // update third-order prefixes with this step's contribution
            q = q + rxp.scale(dt);
            let pa = p.to_array();
            for (i, ri) in ra.iter().enumerate() {
                for j in 0..3 {
                    n[i][j] += *ri * (pa[j] * dt + ra[j] * half_dt2);
                }
            }
            s_dot += r.dot(&p) * dt + r.dot(&r) * half_dt2;
        }
        p = p + r.scale(dt);
    }

    let mut terms = vec![a1];
    if k_max >= 2 {
        terms.push(a2);
    }
    if k_max >= 3 {
        let two_thirds = S::from_f64_lossy(2.0 / 3.0);
        terms.push((a3_first + a3_second).scale(two_thirds));
    }
    Ok(MagnusSeries {
        axis: rot.axis,
        total_time: rot.total_time(),
        terms,
        method: MagnusMethod::Quadrature,
    })
}

/// Default extraction radius: `rho * T = 0.1` rad.
const DEFAULT_RHO_T: f64 = 0.1;
/// Automatic halvings of the radius on branch risk.
const MAX_RHO_HALVINGS: usize = 6;
/// Residual bound on the inversion's order-zero coefficient.
const INVERSION_TOL: f64 = 1e-8;

/// Taylor extraction of `A_1..A_K` with the default radius.
pub fn magnus_taylor<S: Scalar>(
    spec: &DriveSpec<S>,
    grid: &TimeGrid<S>,
    axis: Axis,
    k_max: usize,
) -> Result<MagnusSeries<S>> {
    let rho = S::from_f64_lossy(DEFAULT_RHO_T) / grid.total();
    magnus_taylor_with_radius(spec, grid, axis, k_max, rho)
}

/// Taylor extraction of `A_1..A_K` at circle radius `rho` (rad/us).
///
/// Propagates `H_drive + d_m sigma_axis` at `M = 2K + 4` complex strengths
/// on the circle of radius `rho`, maps each end propagator through
/// `i log V` to complex Pauli coefficients, and recovers the Taylor
/// coefficients by discrete Fourier inversion. The radius halves
/// automatically (up to 6 times) when a propagator's rotation angle gets
/// within 10% of the log branch cut; the inversion's order-zero
/// coefficient, which vanishes identically for exact data, must stay below
/// 1e-8 or the extraction reports a conditioning failure.
pub fn magnus_taylor_with_radius<S: Scalar>(
    spec: &DriveSpec<S>,
    grid: &TimeGrid<S>,
    axis: Axis,
    k_max: usize,
    rho: S,
) -> Result<MagnusSeries<S>> {
    if k_max == 0 {
        return Err(Error::UnsupportedOrder(0));
    }
    if !(rho > S::zero()) {
        return Err(Error::validation("rho", "must be positive"));
    }
    let drive_gens = drive_generators(spec, grid)?;
    let u_drive_dag = fold_final(&drive_gens).adjoint();

    let mut rho = rho;
    'radius: for attempt in 0..=MAX_RHO_HALVINGS {
        match extract_at_radius(&drive_gens, grid, axis, k_max, rho, &u_drive_dag) {
            Ok(terms) => {
                return Ok(MagnusSeries {
                    axis,
                    total_time: grid.total(),
                    terms,
                    method: MagnusMethod::TaylorExtraction,
                });
            }
            Err(Error::BranchRisk { .. }) if attempt < MAX_RHO_HALVINGS => {
                rho *= S::from_f64_lossy(0.5);
                continue 'radius;
            }
            Err(e) => return Err(e),
        }
    }
    unreachable!("loop returns on success or final error");
}

fn extract_at_radius<S: Scalar>(
    drive_gens: &[PauliVec<S>],
    grid: &TimeGrid<S>,
    axis: Axis,
    k_max: usize,
    rho: S,
    u_drive_dag: &Mat2c<S>,
) -> Result<Vec<PauliVec<S>>> {
    let m_count = 2 * k_max + 4;
    let dt = grid.dt();
    let two_pi = S::from_f64_lossy(2.0) * S::PI();

    let mut logs: Vec<CPauliVec<S>> = Vec::with_capacity(m_count);
    for m in 0..m_count {
        let ang = two_pi * S::from_usize(m).unwrap() / S::from_usize(m_count).unwrap();
        let delta = Complex::new(rho * ang.cos(), rho * ang.sin());
        let step_extra = delta.scale(dt);
        let gens: Vec<CPauliVec<S>> = drive_gens
            .iter()
            .map(|g| {
                let mut cg = g.to_complex();
                match axis {
                    Axis::X => cg.x += step_extra,
                    Axis::Y => cg.y += step_extra,
                    Axis::Z => cg.z += step_extra,
                }
                cg
            })
            .collect();
        let v = *u_drive_dag * fold_final_c(&gens);
        logs.push(su2_log(&v)?);
    }

    // a(d) = sum_{k>=1} d^k A_k with real A_k; invert per component.
    let inv_m = S::one() / S::from_usize(m_count).unwrap();
    let coeff = |k: usize| -> CPauliVec<S> {
        let mut acc = CPauliVec::zero();
        for (m, a) in logs.iter().enumerate() {
            let ang =
                -two_pi * S::from_usize(k * m % m_count).unwrap() / S::from_usize(m_count).unwrap();
            let e = Complex::new(ang.cos(), ang.sin());
            acc = acc.add(&a.scale(e));
        }
        acc.scale(Complex::new(inv_m / rho.powi(k as i32), S::zero()))
    };

    let zero_order = {
        let mut acc = CPauliVec::zero();
        for a in &logs {
            acc = acc.add(a);
        }
        acc.scale(Complex::new(inv_m, S::zero()))
    };
    let residual = zero_order.norm().to_f64_lossy();
    if residual > INVERSION_TOL {
        return Err(Error::Conditioning(residual));
    }

    Ok((1..=k_max).map(|k| coeff(k).re()).collect())
}

/// Frobenius distance between the truncated-series propagator and the exact
/// interaction-frame propagator at quasistatic strength `delta`.
pub fn series_residual<S: Scalar>(
    series: &MagnusSeries<S>,
    spec: &DriveSpec<S>,
    grid: &TimeGrid<S>,
    delta: S,
) -> Result<S> {
    let pert = PerturbationSpec {
        axis: series.axis,
        delta_beta: delta,
        f_mhz: S::zero(),
        phi_deg: S::zero(),
    };
    let exact = simulate_full(spec, &pert, grid)?;
    let predicted = su2_exp(&series.rotation_vector(delta));
    Ok((exact - predicted).norm())
}
