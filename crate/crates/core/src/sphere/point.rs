use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tolerance for `|w1|^2 + |w2|^2 = 1`.
pub const SPHERE_TOLERANCE: f64 = 1e-12;

/// A point of the unit sphere in C^2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpherePoint {
    w1: Complex64,
    w2: Complex64,
}

impl SpherePoint {
    /// Builds a point, checking membership with [`SPHERE_TOLERANCE`].
    pub fn new(w1: Complex64, w2: Complex64) -> Result<Self> {
        Self::with_tolerance(w1, w2, SPHERE_TOLERANCE)
    }

    pub fn with_tolerance(w1: Complex64, w2: Complex64, tol: f64) -> Result<Self> {
        let n = w1.norm_sqr() + w2.norm_sqr();
        if (n - 1.0).abs() > tol || !n.is_finite() {
            return Err(Error::Domain(format!(
                "|w1|^2 + |w2|^2 = {n} is not 1 within {tol:e}"
            )));
        }
        Ok(Self { w1, w2 })
    }

    /// Projects a nonzero pair onto the sphere.
    pub fn normalize(w1: Complex64, w2: Complex64) -> Result<Self> {
        let n = (w1.norm_sqr() + w2.norm_sqr()).sqrt();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::Domain("cannot normalize the zero vector".into()));
        }
        Ok(Self {
            w1: w1 / n,
            w2: w2 / n,
        })
    }

    /// Point from the four real ambient coordinates `(x1, y1, x2, y2)`, normalized.
    pub fn from_real(x: [f64; 4]) -> Result<Self> {
        Self::normalize(Complex64::new(x[0], x[1]), Complex64::new(x[2], x[3]))
    }

    /// Hopf-torus coordinates: `w1 = cos(chi) e^{i a}`, `w2 = sin(chi) e^{i b}`.
    pub fn from_torus_angles(chi: f64, a: f64, b: f64) -> Self {
        Self {
            w1: Complex64::from_polar(chi.cos(), a),
            w2: Complex64::from_polar(chi.sin(), b),
        }
    }

    /// Point of the Clifford torus `|w1|^2 = |w2|^2 = 1/2`.
    pub fn clifford(a: f64, b: f64) -> Self {
        Self::from_torus_angles(std::f64::consts::FRAC_PI_4, a, b)
    }

    /// Uniformly distributed random point.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let x: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
            if let Ok(p) = Self::from_real(x) {
                return p;
            }
        }
    }

    pub fn w1(&self) -> Complex64 {
        self.w1
    }

    pub fn w2(&self) -> Complex64 {
        self.w2
    }

    pub fn to_real(&self) -> [f64; 4] {
        [self.w1.re, self.w1.im, self.w2.re, self.w2.im]
    }

    /// The circle action `(w1, w2) -> (e^{i phi} w1, e^{i phi} w2)`.
    pub fn rotate(&self, phi: f64) -> Self {
        let e = Complex64::from_polar(1.0, phi);
        Self {
            w1: e * self.w1,
            w2: e * self.w2,
        }
    }

    /// Hermitian product `conj(self) . other`.
    pub fn hermitian(&self, other: &SpherePoint) -> Complex64 {
        self.w1.conj() * other.w1 + self.w2.conj() * other.w2
    }

    /// Euclidean distance in C^2.
    pub fn distance(&self, other: &SpherePoint) -> f64 {
        ((self.w1 - other.w1).norm_sqr() + (self.w2 - other.w2).norm_sqr()).sqrt()
    }

    /// Distance between the circle orbits through the two points.
    pub fn fiber_distance(&self, other: &SpherePoint) -> f64 {
        let h = self.hermitian(other).norm().min(1.0);
        (2.0 * (1.0 - h)).max(0.0).sqrt()
    }
}

impl fmt::Display for SpherePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({:.6}{:+.6}i, {:.6}{:+.6}i)",
            self.w1.re, self.w1.im, self.w2.re, self.w2.im
        )
    }
}

/// A real tangent vector of C^2 stored in complexified form: `(a1, a2)` means
/// `a1 d/dw1 + conj(a1) d/dw1bar + a2 d/dw2 + conj(a2) d/dw2bar`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AmbientVector {
    pub a1: Complex64,
    pub a2: Complex64,
}

impl AmbientVector {
    pub fn new(a1: Complex64, a2: Complex64) -> Self {
        Self { a1, a2 }
    }

    pub fn from_real(v: [f64; 4]) -> Self {
        Self {
            a1: Complex64::new(v[0], v[1]),
            a2: Complex64::new(v[2], v[3]),
        }
    }

    pub fn to_real(&self) -> [f64; 4] {
        [self.a1.re, self.a1.im, self.a2.re, self.a2.im]
    }

    pub fn norm(&self) -> f64 {
        (self.a1.norm_sqr() + self.a2.norm_sqr()).sqrt()
    }

    pub fn scale(&self, k: f64) -> Self {
        Self {
            a1: self.a1 * k,
            a2: self.a2 * k,
        }
    }

    /// `Re(conj(w1) a1 + conj(w2) a2)`, zero for vectors tangent to the sphere at `q`.
    pub fn radial_component(&self, q: &SpherePoint) -> f64 {
        (q.w1().conj() * self.a1 + q.w2().conj() * self.a2).re
    }

    pub fn as_complex(&self) -> CVector {
        CVector([self.a1, self.a2, self.a1.conj(), self.a2.conj()])
    }
}

impl std::ops::Add for AmbientVector {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            a1: self.a1 + o.a1,
            a2: self.a2 + o.a2,
        }
    }
}

impl std::ops::Sub for AmbientVector {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self {
            a1: self.a1 - o.a1,
            a2: self.a2 - o.a2,
        }
    }
}

/// A complexified tangent vector with components along
/// `(d/dw1, d/dw2, d/dw1bar, d/dw2bar)`.
///
/// Real vectors have `c[2] = conj(c[0])` and `c[3] = conj(c[1])`; a (1,0)
/// field such as `W0` has vanishing barred components.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CVector(pub [Complex64; 4]);

impl CVector {
    pub fn dw1(&self) -> Complex64 {
        self.0[0]
    }
    pub fn dw2(&self) -> Complex64 {
        self.0[1]
    }
    pub fn dw1bar(&self) -> Complex64 {
        self.0[2]
    }
    pub fn dw2bar(&self) -> Complex64 {
        self.0[3]
    }

    /// Complex conjugate vector.
    pub fn conj(&self) -> Self {
        CVector([
            self.0[2].conj(),
            self.0[3].conj(),
            self.0[0].conj(),
            self.0[1].conj(),
        ])
    }

    pub fn scale(&self, k: Complex64) -> Self {
        CVector(self.0.map(|c| c * k))
    }

    /// Components along the real coordinate derivatives `(d/dx1, d/dy1, d/dx2, d/dy2)`.
    pub fn real_coordinates(&self) -> [Complex64; 4] {
        // d/dw = (d/dx - i d/dy) / 2, d/dwbar = (d/dx + i d/dy) / 2
        let ih = Complex64::new(0.0, 0.5);
        [
            (self.0[0] + self.0[2]) * 0.5,
            ih * (self.0[2] - self.0[0]),
            (self.0[1] + self.0[3]) * 0.5,
            ih * (self.0[3] - self.0[1]),
        ]
    }

    /// Inverse of [`CVector::real_coordinates`].
    pub fn from_real_coordinates(c: [Complex64; 4]) -> Self {
        let i = Complex64::i();
        CVector([
            c[0] + i * c[1],
            c[2] + i * c[3],
            c[0] - i * c[1],
            c[2] - i * c[3],
        ])
    }

    /// Real part `(v + conj(v)) / 2` as an [`AmbientVector`].
    pub fn real_part(&self) -> AmbientVector {
        let s = *self + self.conj();
        AmbientVector::new(s.0[0] * 0.5, s.0[1] * 0.5)
    }

    /// Imaginary part `(v - conj(v)) / 2i` as an [`AmbientVector`].
    pub fn imag_part(&self) -> AmbientVector {
        let d = *self - self.conj();
        let k = Complex64::new(0.0, -0.5);
        AmbientVector::new(d.0[0] * k, d.0[1] * k)
    }
}

impl std::ops::Add for CVector {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        CVector(std::array::from_fn(|k| self.0[k] + o.0[k]))
    }
}

impl std::ops::Sub for CVector {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        CVector(std::array::from_fn(|k| self.0[k] - o.0[k]))
    }
}
