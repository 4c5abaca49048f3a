//! Exact 2x2 complex-matrix and su(2) primitives.
//!
//! Everything downstream is built on three types: [`Mat2c`] (a dense 2x2
//! complex matrix), [`PauliVec`] (real coefficients of `sigma_x,y,z`), and
//! [`CPauliVec`] (complex coefficients). Matrix exponentials always use the
//! SU(2) closed form `exp(-i a.sigma) = cos|a| I - i sinc|a| (a.sigma)`,
//! which is exact, branch-free and valid for complex `a` as well since
//! `cos` and `sinc` are even entire functions of `|a|`.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;

use crate::scalar::Scalar;

/// Perturbation / decomposition axis label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    /// Unit coefficient vector along this axis.
    pub fn unit<S: Scalar>(self) -> PauliVec<S> {
        match self {
            Axis::X => PauliVec::new(S::one(), S::zero(), S::zero()),
            Axis::Y => PauliVec::new(S::zero(), S::one(), S::zero()),
            Axis::Z => PauliVec::new(S::zero(), S::zero(), S::one()),
        }
    }

    pub fn letter(self) -> char {
        match self {
            Axis::X => 'x',
            Axis::Y => 'y',
            Axis::Z => 'z',
        }
    }
}

impl std::str::FromStr for Axis {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "x" | "X" => Ok(Axis::X),
            "y" | "Y" => Ok(Axis::Y),
            "z" | "Z" => Ok(Axis::Z),
            other => Err(crate::Error::validation(
                "axis",
                format!("expected x, y or z, got `{other}`"),
            )),
        }
    }
}

/// Dense 2x2 complex matrix, row-major `[[a, b], [c, d]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2c<S: Scalar> {
    pub a: Complex<S>,
    pub b: Complex<S>,
    pub c: Complex<S>,
    pub d: Complex<S>,
}

impl<S: Scalar> Mat2c<S> {
    pub fn new(a: Complex<S>, b: Complex<S>, c: Complex<S>, d: Complex<S>) -> Self {
        Self { a, b, c, d }
    }

    pub fn identity() -> Self {
        let one = Complex::new(S::one(), S::zero());
        let zero = Complex::new(S::zero(), S::zero());
        Self::new(one, zero, zero, one)
    }

    pub fn zero() -> Self {
        let zero = Complex::new(S::zero(), S::zero());
        Self::new(zero, zero, zero, zero)
    }

    pub fn sigma_x() -> Self {
        let one = Complex::new(S::one(), S::zero());
        let zero = Complex::new(S::zero(), S::zero());
        Self::new(zero, one, one, zero)
    }

    pub fn sigma_y() -> Self {
        let i = Complex::new(S::zero(), S::one());
        let zero = Complex::new(S::zero(), S::zero());
        Self::new(zero, -i, i, zero)
    }

    pub fn sigma_z() -> Self {
        let one = Complex::new(S::one(), S::zero());
        let zero = Complex::new(S::zero(), S::zero());
        Self::new(one, zero, zero, -one)
    }

    pub fn sigma(axis: Axis) -> Self {
        match axis {
            Axis::X => Self::sigma_x(),
            Axis::Y => Self::sigma_y(),
            Axis::Z => Self::sigma_z(),
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::new(self.a.conj(), self.c.conj(), self.b.conj(), self.d.conj())
    }

    pub fn trace(&self) -> Complex<S> {
        self.a + self.d
    }

    pub fn det(&self) -> Complex<S> {
        self.a * self.d - self.b * self.c
    }

    /// Frobenius norm.
    pub fn norm(&self) -> S {
        (self.a.norm_sqr() + self.b.norm_sqr() + self.c.norm_sqr() + self.d.norm_sqr()).sqrt()
    }

    pub fn scale(&self, s: Complex<S>) -> Self {
        Self::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    /// Rebuild from a Pauli decomposition: `c0 I + cx sx + cy sy + cz sz`.
    pub fn from_pauli(c0: Complex<S>, c: CPauliVec<S>) -> Self {
        let i = Complex::new(S::zero(), S::one());
        Self::new(c0 + c.z, c.x - i * c.y, c.x + i * c.y, c0 - c.z)
    }

    /// Deviation from unitarity, `max |(M^dag M - I)_ij|`.
    pub fn unitarity_defect(&self) -> S {
        let p = self.adjoint() * *self;
        let one = Complex::new(S::one(), S::zero());
        let e = [
            (p.a - one).norm(),
            p.b.norm(),
            p.c.norm(),
            (p.d - one).norm(),
        ];
        e.into_iter().fold(S::zero(), S::max)
    }
}

impl<S: Scalar> Mul for Mat2c<S> {
    type Output = Mat2c<S>;

    fn mul(self, rhs: Self) -> Self {
        Self::new(
            self.a * rhs.a + self.b * rhs.c,
            self.a * rhs.b + self.b * rhs.d,
            self.c * rhs.a + self.d * rhs.c,
            self.c * rhs.b + self.d * rhs.d,
        )
    }
}

impl<S: Scalar> Add for Mat2c<S> {
    type Output = Mat2c<S>;

    fn add(self, rhs: Self) -> Self {
        Self::new(
            self.a + rhs.a,
            self.b + rhs.b,
            self.c + rhs.c,
            self.d + rhs.d,
        )
    }
}

impl<S: Scalar> Sub for Mat2c<S> {
    type Output = Mat2c<S>;

    fn sub(self, rhs: Self) -> Self {
        Self::new(
            self.a - rhs.a,
            self.b - rhs.b,
            self.c - rhs.c,
            self.d - rhs.d,
        )
    }
}

impl<S: Scalar> Neg for Mat2c<S> {
    type Output = Mat2c<S>;

    fn neg(self) -> Self {
        Self::new(-self.a, -self.b, -self.c, -self.d)
    }
}

/// Real coefficients of a traceless Hermitian operator `x sx + y sy + z sz`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PauliVec<S: Scalar> {
    pub x: S,
    pub y: S,
    pub z: S,
}

impl<S: Scalar> PauliVec<S> {
    pub fn new(x: S, y: S, z: S) -> Self {
        Self { x, y, z }
    }

    pub fn zero() -> Self {
        Self::new(S::zero(), S::zero(), S::zero())
    }

    pub fn norm(&self) -> S {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn dot(&self, o: &Self) -> S {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(&self, o: &Self) -> Self {
        Self::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn scale(&self, s: S) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }

    /// Angle to another vector, in degrees; zero vectors give 180.
    pub fn angle_deg(&self, o: &Self) -> S {
        let n = self.norm() * o.norm();
        if n <= S::zero() {
            return S::from_f64_lossy(180.0);
        }
        let c = (self.dot(o) / n).min(S::one()).max(-S::one());
        c.acos() * S::from_f64_lossy(180.0) / S::PI()
    }

    /// The operator `x sx + y sy + z sz`.
    pub fn to_matrix(&self) -> Mat2c<S> {
        Mat2c::from_pauli(Complex::new(S::zero(), S::zero()), self.to_complex())
    }

    pub fn to_complex(&self) -> CPauliVec<S> {
        CPauliVec::new(
            Complex::new(self.x, S::zero()),
            Complex::new(self.y, S::zero()),
            Complex::new(self.z, S::zero()),
        )
    }

    pub fn to_array(&self) -> [S; 3] {
        [self.x, self.y, self.z]
    }
}

impl<S: Scalar> Add for PauliVec<S> {
    type Output = PauliVec<S>;

    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl<S: Scalar> Sub for PauliVec<S> {
    type Output = PauliVec<S>;

    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl<S: Scalar> Neg for PauliVec<S> {
    type Output = PauliVec<S>;

    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

/// Complex coefficients of `sigma_x,y,z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CPauliVec<S: Scalar> {
    pub x: Complex<S>,
    pub y: Complex<S>,
    pub z: Complex<S>,
}

impl<S: Scalar> CPauliVec<S> {
    pub fn new(x: Complex<S>, y: Complex<S>, z: Complex<S>) -> Self {
        Self { x, y, z }
    }

    pub fn zero() -> Self {
        let zero = Complex::new(S::zero(), S::zero());
        Self::new(zero, zero, zero)
    }

    pub fn component(&self, axis: Axis) -> Complex<S> {
        match axis {
            Axis::X => self.x,
            Axis::Y => self.y,
            Axis::Z => self.z,
        }
    }

    /// Euclidean norm over all six real parts.
    pub fn norm(&self) -> S {
        (self.x.norm_sqr() + self.y.norm_sqr() + self.z.norm_sqr()).sqrt()
    }

    /// Quadrature sum of the component magnitudes, `sqrt(sum_j |c_j|^2)`.
    /// Same number as [`CPauliVec::norm`], named for its filter-gain reading.
    pub fn combined_magnitude(&self) -> S {
        self.norm()
    }

    pub fn re(&self) -> PauliVec<S> {
        PauliVec::new(self.x.re, self.y.re, self.z.re)
    }

    pub fn im(&self) -> PauliVec<S> {
        PauliVec::new(self.x.im, self.y.im, self.z.im)
    }

    pub fn conj(&self) -> Self {
        Self::new(self.x.conj(), self.y.conj(), self.z.conj())
    }

    pub fn scale(&self, s: Complex<S>) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }

    /// `a . a` (unconjugated), the square that enters the SU(2) closed form.
    fn self_dot(&self) -> Complex<S> {
        self.x * self.x + self.y * self.y + self.z * self.z
    }
}

/// Trace decomposition `M = c0 I + cx sx + cy sy + cz sz` with
/// `c_j = Tr(M sigma_j) / 2` and `c0 = Tr(M) / 2`.
///
/// The factor 1/2 makes the bare system read with unit d.c. gain downstream;
/// reconstruction through [`Mat2c::from_pauli`] is exact.
pub fn pauli_decompose<S: Scalar>(m: &Mat2c<S>) -> (Complex<S>, CPauliVec<S>) {
    let half = S::from_f64_lossy(0.5);
    let c0 = (m.a + m.d).scale(half);
    let cx = (m.b + m.c).scale(half);
    // Tr(M sy)/2 = i(b - c)/2
    let i = Complex::new(S::zero(), S::one());
    let cy = (i * (m.b - m.c)).scale(half);
    let cz = (m.a - m.d).scale(half);
    (c0, CPauliVec::new(cx, cy, cz))
}

/// `sin(w)/w` as an even entire function of a complex argument.
fn sinc_c<S: Scalar>(w: Complex<S>) -> Complex<S> {
    let w2 = w * w;
    if w.norm() < S::from_f64_lossy(1e-6) {
        // 1 - w^2/6 + w^4/120, exact to rounding at this size
        let one = Complex::new(S::one(), S::zero());
        let c6 = Complex::new(S::from_f64_lossy(1.0 / 6.0), S::zero());
        let c120 = Complex::new(S::from_f64_lossy(1.0 / 120.0), S::zero());
        one - w2 * c6 + w2 * w2 * c120
    } else {
        w.sin() / w
    }
}

/// Closed-form `exp(-i a.sigma)` for real coefficients; exactly unitary up to
/// rounding, with `a = 0` returning the identity.
pub fn su2_exp<S: Scalar>(a: &PauliVec<S>) -> Mat2c<S> {
    su2_exp_c(&a.to_complex())
}

/// Closed-form `exp(-i a.sigma)` for complex coefficients (non-Hermitian
/// generators). `cos` and `sinc` are even in `w = sqrt(a.a)`, so the branch
/// of the square root is immaterial.
pub fn su2_exp_c<S: Scalar>(a: &CPauliVec<S>) -> Mat2c<S> {
    let w = a.self_dot().sqrt();
    let cosw = w.cos();
    let minus_i_sinc = Complex::new(S::zero(), -S::one()) * sinc_c(w);
    let c = a.scale(minus_i_sinc);
    Mat2c::from_pauli(cosw, c)
}

/// Inverse of [`su2_exp_c`] on the principal branch: returns `a` with
/// `V = exp(-i a.sigma)`, assuming `det V = 1`.
///
/// Fails with [`Error::BranchRisk`](crate::Error::BranchRisk) when the
/// rotation angle `|w|` reaches `0.9 pi`, where the principal `acos` can no
/// longer be trusted.
pub fn su2_log<S: Scalar>(v: &Mat2c<S>) -> crate::Result<CPauliVec<S>> {
    let (c0, p) = pauli_decompose(v);
    let w = c0.acos();
    let limit = S::from_f64_lossy(0.9) * S::PI();
    if w.norm() >= limit {
        return Err(crate::Error::BranchRisk {
            angle_rad: w.norm().to_f64_lossy(),
            limit_rad: limit.to_f64_lossy(),
        });
    }
    // V = cos(w) I - i sinc(w) a.sigma  =>  a = i p / sinc(w)
    let i = Complex::new(S::zero(), S::one());
    let s = sinc_c(w);
    Ok(p.scale(i / s))
}

/// `AB - BA`.
pub fn commutator<S: Scalar>(a: &Mat2c<S>, b: &Mat2c<S>) -> Mat2c<S> {
    *a * *b - *b * *a
}
