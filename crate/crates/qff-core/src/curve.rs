//! Space-curve view of the accumulated perturbation effect.
//!
//! The curve at frequency `f` and phase `phi` integrates the interaction
//! frame rows against a real cosine referenced to the sequence center,
//!
//! ```text
//! r_j(t) = integral_0^t R_j(tau) cos(2 pi f (tau - T/2) + phi) dtau ,
//! ```
//!
//! so `r(T) = T * Re[e^{i phi} F_i(f, T)]` holds term by term against the
//! filter function built on the same grid, and the `f = 0`, `phi = 0` curve
//! is the running first Magnus term. A closed curve means the drive cancels
//! the perturbation to first order.

use num_complex::Complex;

use crate::filter::filter_function;
use crate::propagate::RotationTrace;
use crate::scalar::Scalar;

/// Time-gridded 3D curve of accumulated effect per unit perturbation.
/// Coordinates are in us.
#[derive(Debug, Clone)]
pub struct SpaceCurve<S: Scalar> {
    pub f_mhz: S,
    pub phi_deg: S,
    /// `r(t_k)` for `k = 0..=n_steps`; `r(t_0)` is the origin.
    pub points: Vec<[S; 3]>,
    /// Node times, us.
    pub times: Vec<S>,
}

impl<S: Scalar> SpaceCurve<S> {
    pub fn endpoint(&self) -> [S; 3] {
        *self.points.last().expect("curve has at least the origin")
    }

    pub fn total_time(&self) -> S {
        *self.times.last().expect("curve has at least the origin")
    }

    pub fn endpoint_norm(&self) -> S {
        let [x, y, z] = self.endpoint();
        (x * x + y * y + z * z).sqrt()
    }

    /// Polyline arc length, us.
    pub fn arc_length(&self) -> S {
        self.points
            .windows(2)
            .map(|w| {
                let d = [w[1][0] - w[0][0], w[1][1] - w[0][1], w[1][2] - w[0][2]];
                (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
            })
            .fold(S::zero(), |a, b| a + b)
    }

    /// CSV export: `t_us,x,y,z`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t_us,x,y,z\n");
        for (t, p) in self.times.iter().zip(&self.points) {
            out.push_str(&format!(
                "{},{},{},{}\n",
                t.to_f64_lossy(),
                p[0].to_f64_lossy(),
                p[1].to_f64_lossy(),
                p[2].to_f64_lossy()
            ));
        }
        out
    }
}

/// Accumulate the space curve for one `(f, phi)` pair.
pub fn space_curve<S: Scalar>(rot: &RotationTrace<S>, f_mhz: S, phi_deg: S) -> SpaceCurve<S> {
    let grid = rot.grid;
    let total = grid.total();
    let half_t = total * S::from_f64_lossy(0.5);
    let two_pi_f = S::from_f64_lossy(2.0) * S::PI() * f_mhz;
    // normalize so full turns reproduce phi = 0 exactly
    let phi = crate::filter::normalize_deg(phi_deg) * S::PI() / S::from_f64_lossy(180.0);
    let dt = grid.dt();

    let mut points = Vec::with_capacity(grid.n_steps() + 1);
    let mut times = Vec::with_capacity(grid.n_steps() + 1);
    let mut r = [S::zero(); 3];
    points.push(r);
    times.push(S::zero());
    for (k, row) in rot.midpoint_rows().iter().enumerate() {
        let w = (two_pi_f * (grid.t_mid(k) - half_t) + phi).cos() * dt;
        r[0] += row.x * w;
        r[1] += row.y * w;
        r[2] += row.z * w;
        points.push(r);
        times.push(grid.t(k + 1));
    }
    SpaceCurve {
        f_mhz,
        phi_deg,
        points,
        times,
    }
}

/// Residual of the endpoint identity `r(T) = T * Re[e^{i phi} F_i(f, T)]`.
pub fn curve_ff_consistency<S: Scalar>(rot: &RotationTrace<S>, f_mhz: S, phi_deg: S) -> S {
    let curve = space_curve(rot, f_mhz, phi_deg);
    let [cx, cy, cz] = curve.endpoint();
    let ff = filter_function(rot, f_mhz);
    let phi = crate::filter::normalize_deg(phi_deg) * S::PI() / S::from_f64_lossy(180.0);
    let e = Complex::new(phi.cos(), phi.sin());
    let t = rot.total_time();
    let px = (ff.x * e).re * t;
    let py = (ff.y * e).re * t;
    let pz = (ff.z * e).re * t;
    ((cx - px) * (cx - px) + (cy - py) * (cy - py) + (cz - pz) * (cz - pz)).sqrt()
}

/// Whether the curve returns to the origin: `|r(T)| <= 1e-6 * T`.
pub fn closure_test<S: Scalar>(curve: &SpaceCurve<S>) -> bool {
    curve.endpoint_norm() <= S::from_f64_lossy(1e-6) * curve.total_time()
}
