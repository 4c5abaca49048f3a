//! Ground-truth simulator: propagate the drive plus an explicit cosine
//! perturbation and compare against first-order predictions.
//!
//! [`simulate_full`] uses the very same step generators and fold as
//! [`crate::propagate::propagate`], so with `delta_beta = 0` it reproduces
//! the drive propagator bit for bit.

use num_complex::Complex;

use crate::drive::{DriveSpec, TimeGrid};
use crate::error::Result;
use crate::filter::filter_function;
use crate::pauli::{su2_log, Axis, Mat2c, PauliVec};
use crate::propagate::{drive_generators, fold_final, propagate, rotation_trace};
use crate::scalar::Scalar;

/// A real cosine perturbation `db * cos(2 pi f (t - T/2) + phi)` along one
/// axis, phase referenced to the sequence center.
#[derive(Debug, Clone, Copy)]
pub struct PerturbationSpec<S: Scalar> {
    pub axis: Axis,
    /// Amplitude, rad/us.
    pub delta_beta: S,
    /// Frequency, MHz.
    pub f_mhz: S,
    /// Phase, degrees.
    pub phi_deg: S,
}

/// Interaction-frame end propagator `V = U_drive^dag(T) U_full(T)` of the
/// drive plus perturbation.
pub fn simulate_full<S: Scalar>(
    spec: &DriveSpec<S>,
    pert: &PerturbationSpec<S>,
    grid: &TimeGrid<S>,
) -> Result<Mat2c<S>> {
    let drive_gens = drive_generators(spec, grid)?;
    let total = grid.total();
    let half_t = total * S::from_f64_lossy(0.5);
    let two_pi_f = S::from_f64_lossy(2.0) * S::PI() * pert.f_mhz;
    let phi = crate::filter::normalize_deg(pert.phi_deg) * S::PI() / S::from_f64_lossy(180.0);
    let dt = grid.dt();

    let full_gens: Vec<PauliVec<S>> = drive_gens
        .iter()
        .enumerate()
        .map(|(k, g)| {
            let w = pert.delta_beta * (two_pi_f * (grid.t_mid(k) - half_t) + phi).cos() * dt;
            let mut g = *g;
            match pert.axis {
                Axis::X => g.x += w,
                Axis::Y => g.y += w,
                Axis::Z => g.z += w,
            }
            g
        })
        .collect();

    let u_drive = fold_final(&drive_gens);
    let u_full = fold_final(&full_gens);
    Ok(u_drive.adjoint() * u_full)
}

/// Outcome of one first-order comparison.
#[derive(Debug, Clone, Copy)]
pub struct FirstOrderCheck<S: Scalar> {
    /// Rotation vector of the exact propagator, `a = i log V`, rad.
    pub actual: PauliVec<S>,
    /// First-order prediction `db * T * Re[e^{i phi} F_i(f, T)]`, rad.
    pub predicted: PauliVec<S>,
    /// `|| actual - predicted ||`, rad.
    pub residual: S,
}

/// Compare the exact rotation vector against the filter-function
/// prediction on the same grid.
///
/// Valid in the weak regime `db * T <= 0.1` rad, where the contract
/// `residual <= 2 (db T)^2` holds.
pub fn first_order_check<S: Scalar>(
    spec: &DriveSpec<S>,
    pert: &PerturbationSpec<S>,
    grid: &TimeGrid<S>,
) -> Result<FirstOrderCheck<S>> {
    let v = simulate_full(spec, pert, grid)?;
    let a = su2_log(&v)?;
    let actual = a.re();

    let rot = rotation_trace(&propagate(spec, grid)?, pert.axis);
    let ff = filter_function(&rot, pert.f_mhz);
    let phi = crate::filter::normalize_deg(pert.phi_deg) * S::PI() / S::from_f64_lossy(180.0);
    let e = Complex::new(phi.cos(), phi.sin());
    let scale = pert.delta_beta * grid.total();
    let predicted = PauliVec::new((ff.x * e).re, (ff.y * e).re, (ff.z * e).re).scale(scale);

    Ok(FirstOrderCheck {
        actual,
        predicted,
        residual: (actual - predicted).norm(),
    })
}

/// Residual of the first-order prediction; see [`first_order_check`].
pub fn first_order_residual<S: Scalar>(
    spec: &DriveSpec<S>,
    pert: &PerturbationSpec<S>,
    grid: &TimeGrid<S>,
) -> Result<S> {
    Ok(first_order_check(spec, pert, grid)?.residual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::su2_exp;
    use approx::assert_relative_eq;

    const PI: f64 = std::f64::consts::PI;

    #[test]
    fn zero_perturbation_is_identity() {
        let spec = DriveSpec::cosine_modulated(4.0, 1.0, 1).unwrap();
        let grid = TimeGrid::for_drive(&spec, 2000).unwrap();
        let pert = PerturbationSpec {
            axis: Axis::Z,
            delta_beta: 0.0,
            f_mhz: 0.3,
            phi_deg: 10.0,
        };
        let v = simulate_full(&spec, &pert, &grid).unwrap();
        assert!((v - Mat2c::identity()).norm() < 1e-10);
    }

    #[test]
    fn quasistatic_free_evolution_closed_form() {
        let spec = DriveSpec::free(1.0).unwrap();
        let grid = TimeGrid::for_drive(&spec, 2000).unwrap();
        let db = 0.07;
        let pert = PerturbationSpec {
            axis: Axis::Z,
            delta_beta: db,
            f_mhz: 0.0,
            phi_deg: 0.0,
        };
        let v = simulate_full(&spec, &pert, &grid).unwrap();
        let expect = su2_exp(&PauliVec::new(0.0, 0.0, db * 1.0));
        assert!((v - expect).norm() < 1e-12);
    }

    #[test]
    fn dressed_dc_residual_is_quadratic() {
        // integer periods: ||V - I|| = O((db T)^2)
        let spec = DriveSpec::constant(PI, 0.0, 2.0).unwrap();
        let grid = TimeGrid::for_drive(&spec, 4000).unwrap();
        let norms: Vec<f64> = [0.005, 0.01, 0.02]
            .iter()
            .map(|&db| {
                let pert = PerturbationSpec {
                    axis: Axis::Z,
                    delta_beta: db,
                    f_mhz: 0.0,
                    phi_deg: 0.0,
                };
                let v = simulate_full(&spec, &pert, &grid).unwrap();
                (v - Mat2c::identity()).norm()
            })
            .collect();
        let slope = (norms[2] / norms[0]).ln() / 4.0f64.ln();
        assert!(
            (1.8..=2.2).contains(&slope),
            "slope = {slope}, norms {norms:?}"
        );
    }

    #[test]
    fn first_order_bound_on_hahn_enhanced_case() {
        let spec: DriveSpec<f64> = crate::drive::build_hahn_echo(0.8, 0.5).unwrap();
        let grid = TimeGrid::for_drive(&spec, 4000).unwrap();
        let t = grid.total();
        let db = 0.01 / t;
        let pert = PerturbationSpec {
            axis: Axis::Z,
            delta_beta: db,
            f_mhz: 0.54,
            phi_deg: 90.0,
        };
        let check = first_order_check(&spec, &pert, &grid).unwrap();
        assert!(check.residual <= 2e-4, "residual {}", check.residual);
        // the rotation points dominantly along z
        let a = check.actual;
        assert!(a.z.abs() > 0.8 * a.norm(), "a = {a:?}");
    }

    #[test]
    fn zero_delta_zero_residual() {
        let spec = DriveSpec::free(1.0).unwrap();
        let grid = TimeGrid::for_drive(&spec, 500).unwrap();
        let pert = PerturbationSpec {
            axis: Axis::Z,
            delta_beta: 0.0,
            f_mhz: 0.7,
            phi_deg: 45.0,
        };
        let check = first_order_check(&spec, &pert, &grid).unwrap();
        assert_relative_eq!(check.residual, 0.0, epsilon = 1e-13);
    }

    #[test]
    fn shared_stepper_consistency() {
        let spec = DriveSpec::cosine_modulated(5.5, 1.3, 2).unwrap();
        let grid = TimeGrid::for_drive(&spec, 1500).unwrap();
        let pert = PerturbationSpec {
            axis: Axis::Z,
            delta_beta: 0.0,
            f_mhz: 0.0,
            phi_deg: 0.0,
        };
        let v = simulate_full(&spec, &pert, &grid).unwrap();
        // with db = 0 this is U_drive^dag U_drive = I exactly
        assert!((v - Mat2c::identity()).norm() < 1e-13);
    }
}
