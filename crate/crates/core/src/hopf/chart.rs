use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sphere::{CVector, SpherePoint};

pub type Vec3 = [f64; 3];

/// The two stereographic charts of the base sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Chart {
    /// `z = w2 / w1`, centered at the image of `(1, 0)`.
    South,
    /// `ζ = w1 / w2 = 1 / z`.
    North,
}

impl Chart {
    pub fn id(self) -> &'static str {
        match self {
            Chart::South => "south",
            Chart::North => "north",
        }
    }

    pub fn from_id(s: &str) -> Result<Self> {
        match s {
            "south" => Ok(Chart::South),
            "north" => Ok(Chart::North),
            other => Err(Error::Chart(format!("unknown chart id {other:?}"))),
        }
    }

    pub fn other(self) -> Self {
        match self {
            Chart::South => Chart::North,
            Chart::North => Chart::South,
        }
    }
}

/// A point of the base sphere in one of the two charts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiemannSpherePoint {
    pub chart: Chart,
    pub coord: Complex64,
}

impl fmt::Display for RiemannSpherePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.chart.id(), self.coord)
    }
}

/// Unit vector in `R³` for a chart coordinate.
pub fn chart_to_unit(chart: Chart, c: Complex64) -> Vec3 {
    let d = 1.0 + c.norm_sqr();
    let n3 = (1.0 - c.norm_sqr()) / d;
    match chart {
        Chart::South => [2.0 * c.re / d, 2.0 * c.im / d, n3],
        Chart::North => [2.0 * c.re / d, -2.0 * c.im / d, -n3],
    }
}

/// Chart coordinate of a unit vector; `None` at the chart's missing point.
pub fn unit_to_chart(chart: Chart, n: Vec3) -> Option<Complex64> {
    match chart {
        Chart::South if 1.0 + n[2] > 1e-300 => Some(Complex64::new(n[0], n[1]) / (1.0 + n[2])),
        Chart::North if 1.0 - n[2] > 1e-300 => Some(Complex64::new(n[0], -n[1]) / (1.0 - n[2])),
        _ => None,
    }
}

/// Chart velocity of a curve through `n` with velocity `v`.
pub fn unit_velocity_to_chart(chart: Chart, n: Vec3, v: Vec3) -> Complex64 {
    match chart {
        Chart::South => {
            let d = 1.0 + n[2];
            Complex64::new(v[0], v[1]) / d - Complex64::new(n[0], n[1]) * v[2] / (d * d)
        }
        Chart::North => {
            let d = 1.0 - n[2];
            Complex64::new(v[0], -v[1]) / d + Complex64::new(n[0], -n[1]) * v[2] / (d * d)
        }
    }
}

/// Velocity in `R³` of a chart curve through `c` with chart velocity `cdot`.
pub fn chart_velocity_to_unit(chart: Chart, c: Complex64, cdot: Complex64) -> Vec3 {
    let d = 1.0 + c.norm_sqr();
    let dd = 2.0 * (c.conj() * cdot).re;
    let n = chart_to_unit(Chart::South, c);
    let v = [
        2.0 * cdot.re / d - n[0] * dd / d,
        2.0 * cdot.im / d - n[1] * dd / d,
        -dd / d - n[2] * dd / d,
    ];
    match chart {
        Chart::South => v,
        Chart::North => [v[0], -v[1], -v[2]],
    }
}

impl RiemannSpherePoint {
    pub fn new(chart: Chart, coord: Complex64) -> Self {
        Self { chart, coord }
    }

    /// The point with south-chart coordinate `z`.
    pub fn from_z(z: Complex64) -> Self {
        Self::new(Chart::South, z)
    }

    /// The point `z = ∞`.
    pub fn infinity() -> Self {
        Self::new(Chart::North, Complex64::new(0.0, 0.0))
    }

    /// Picks the chart in which the coordinate has modulus at most one.
    pub fn from_unit(n: Vec3) -> Self {
        if n[2] >= 0.0 {
            Self::new(Chart::South, unit_to_chart(Chart::South, n).unwrap_or_default())
        } else {
            Self::new(Chart::North, unit_to_chart(Chart::North, n).unwrap_or_default())
        }
    }

    pub fn to_unit(&self) -> Vec3 {
        chart_to_unit(self.chart, self.coord)
    }

    /// Coordinate in the requested chart.
    pub fn in_chart(&self, chart: Chart) -> Result<Complex64> {
        if chart == self.chart {
            return Ok(self.coord);
        }
        if self.coord.norm() < 1e-300 {
            return Err(Error::Chart(format!("{self} has no {} coordinate", chart.id())));
        }
        Ok(self.coord.inv())
    }

    /// Polar angle with `|z| = tan(θ/2)`.
    pub fn theta(&self) -> f64 {
        let t = 2.0 * self.coord.norm().atan();
        match self.chart {
            Chart::South => t,
            Chart::North => std::f64::consts::PI - t,
        }
    }

    /// Great-circle distance to another point.
    pub fn distance(&self, other: &RiemannSpherePoint) -> f64 {
        angle_between(self.to_unit(), other.to_unit())
    }
}

/// The Hopf projection into the better-conditioned chart.
pub fn project(q: &SpherePoint) -> RiemannSpherePoint {
    let (w1, w2) = (q.w1(), q.w2());
    if w1.norm() >= w2.norm() {
        RiemannSpherePoint::new(Chart::South, w2 / w1)
    } else {
        RiemannSpherePoint::new(Chart::North, w1 / w2)
    }
}

/// The Hopf projection as a unit vector `(2 Re(w1bar w2), 2 Im(w1bar w2), |w1|² − |w2|²)`.
pub fn project_unit(q: &SpherePoint) -> Vec3 {
    let (w1, w2) = (q.w1(), q.w2());
    let m = w1.conj() * w2;
    [2.0 * m.re, 2.0 * m.im, w1.norm_sqr() - w2.norm_sqr()]
}

/// `Dp(v)` in the given chart at `q`; only the `dw` components enter since
/// chart coordinates are holomorphic.
pub fn project_vector(chart: Chart, q: &SpherePoint, v: &CVector) -> Result<Complex64> {
    let (w1, w2) = (q.w1(), q.w2());
    let (a1, a2) = (v.dw1(), v.dw2());
    match chart {
        Chart::South if w1.norm() > 1e-12 => Ok((w1 * a2 - w2 * a1) / (w1 * w1)),
        Chart::North if w2.norm() > 1e-12 => Ok((w2 * a1 - w1 * a2) / (w2 * w2)),
        _ => Err(Error::Chart(format!("{q} lies outside the {} chart", chart.id()))),
    }
}

/// The point of the fiber over a base point given by the local section of its chart.
pub fn section(p: &RiemannSpherePoint) -> SpherePoint {
    let s = (1.0 + p.coord.norm_sqr()).sqrt();
    let one = Complex64::new(1.0, 0.0);
    let (w1, w2) = match p.chart {
        Chart::South => (one / s, p.coord / s),
        Chart::North => (p.coord / s, one / s),
    };
    SpherePoint::normalize(w1, w2).expect("section is never zero")
}

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm3(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn scale3(k: f64, a: Vec3) -> Vec3 {
    a.map(|x| k * x)
}

pub fn add3(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn normalize3(a: Vec3) -> Vec3 {
    scale3(1.0 / norm3(a), a)
}

/// Angle between unit vectors, accurate near 0 and π.
pub fn angle_between(a: Vec3, b: Vec3) -> f64 {
    norm3(cross(a, b)).atan2(dot(a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn projection_examples() {
        let p = project(&SpherePoint::new(c(1.0, 0.0), c(0.0, 0.0)).unwrap());
        assert_eq!(p, RiemannSpherePoint::from_z(c(0.0, 0.0)));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let p = project(&SpherePoint::new(c(h, 0.0), c(h, 0.0)).unwrap());
        assert_eq!(p.chart, Chart::South);
        assert_abs_diff_eq!(p.coord.re, 1.0, epsilon = 1e-15);
        let p = project(&SpherePoint::new(c(0.0, 0.0), c(1.0, 0.0)).unwrap());
        assert_eq!(p, RiemannSpherePoint::infinity());
    }

    #[test]
    fn charts_agree_on_overlap() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let q = SpherePoint::random(&mut rng);
            let (w1, w2) = (q.w1(), q.w2());
            let z = w2 / w1;
            let zeta = w1 / w2;
            assert!((zeta - z.inv()).norm() < 1e-12 * (1.0 + zeta.norm()));
            let n = project_unit(&q);
            let a = chart_to_unit(Chart::South, z);
            let b = chart_to_unit(Chart::North, zeta);
            for k in 0..3 {
                assert!((n[k] - a[k]).abs() < 1e-12 && (n[k] - b[k]).abs() < 1e-12);
            }
            let back = RiemannSpherePoint::from_unit(n);
            assert!(back.distance(&project(&q)) < 1e-12);
        }
    }

    #[test]
    fn velocities_round_trip() {
        let z = c(0.3, -0.7);
        let zdot = c(1.1, 0.4);
        for chart in [Chart::South, Chart::North] {
            let n = chart_to_unit(chart, z);
            let v = chart_velocity_to_unit(chart, z, zdot);
            assert_abs_diff_eq!(dot(n, v), 0.0, epsilon = 1e-15);
            let back = unit_velocity_to_chart(chart, n, v);
            assert!((back - zdot).norm() < 1e-14);
            // finite-difference check of the chart parametrization
            let h = 1e-6;
            let np = chart_to_unit(chart, z + zdot * h);
            let nm = chart_to_unit(chart, z - zdot * h);
            for k in 0..3 {
                assert!(((np[k] - nm[k]) / (2.0 * h) - v[k]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn theta_dictionary() {
        assert_abs_diff_eq!(RiemannSpherePoint::from_z(c(1.0, 0.0)).theta(), std::f64::consts::FRAC_PI_2, epsilon = 1e-15);
        assert_eq!(RiemannSpherePoint::infinity().theta(), std::f64::consts::PI);
        let q = SpherePoint::from_torus_angles(0.3, 0.0, 0.0);
        let cos_theta = 2.0 * q.w1().norm_sqr() - 1.0;
        assert_abs_diff_eq!(project(&q).theta().cos(), cos_theta, epsilon = 1e-14);
    }

    #[test]
    fn sections_lie_over_their_point() {
        for p in [RiemannSpherePoint::from_z(c(0.4, 2.0)), RiemannSpherePoint::new(Chart::North, c(-0.2, 0.1))] {
            let q = section(&p);
            assert!(project(&q).distance(&p) < 1e-14);
        }
    }
}
