//! Sampling grids on the 3-sphere.
//!
//! Points are written as `(cos χ e^{iϑ}, sin χ e^{iφ})`. The Clifford torus is
//! `χ = π/4`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, TAU};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sphere::SpherePoint;

/// Smallest number of samples per axis.
pub const MIN_AXIS: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleGrid {
    /// `n + 1` latitudes `χ_i = iπ/(2n)` with `m` angle pairs each. The pair
    /// `(ϑ_j, φ_j) = (2πj/m, 2π(3j mod m)/m)` sweeps both fiber and base.
    Sphere { n: usize, m: usize },
    /// The `n × m` product grid of angles on the Clifford torus.
    Torus { n: usize, m: usize },
    /// Explicit points.
    Points(Vec<SpherePoint>),
}

impl SampleGrid {
    pub fn sphere(n: usize, m: usize) -> Result<Self> {
        check_axes(n, m)?;
        Ok(SampleGrid::Sphere { n, m })
    }

    pub fn torus(n: usize, m: usize) -> Result<Self> {
        check_axes(n, m)?;
        Ok(SampleGrid::Torus { n, m })
    }

    pub fn points(&self) -> Vec<SpherePoint> {
        match self {
            SampleGrid::Sphere { n, m } => {
                let (n, m) = (*n, *m);
                let mut out = Vec::with_capacity((n + 1) * m);
                for i in 0..=n {
                    let chi = FRAC_PI_2 * i as f64 / n as f64;
                    for j in 0..m {
                        let a = TAU * j as f64 / m as f64;
                        let b = TAU * ((3 * j) % m) as f64 / m as f64;
                        out.push(SpherePoint::from_torus_angles(chi, a, b));
                    }
                }
                out
            }
            SampleGrid::Torus { n, m } => {
                let (n, m) = (*n, *m);
                (0..n * m)
                    .map(|k| {
                        let a = TAU * (k / m) as f64 / n as f64;
                        let b = TAU * (k % m) as f64 / m as f64;
                        SpherePoint::from_torus_angles(FRAC_PI_4, a, b)
                    })
                    .collect()
            }
            SampleGrid::Points(p) => p.clone(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            SampleGrid::Sphere { n, m } => (n + 1) * m,
            SampleGrid::Torus { n, m } => n * m,
            SampleGrid::Points(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn check_axes(n: usize, m: usize) -> Result<()> {
    if n < MIN_AXIS || m < MIN_AXIS {
        return Err(Error::Configuration(format!("grid axes must have at least {MIN_AXIS} samples, got {n}x{m}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_grid_contains_the_torus_and_both_circles() {
        let g = SampleGrid::sphere(64, 64).unwrap();
        let pts = g.points();
        assert_eq!(pts.len(), g.len());
        assert_eq!(pts.len(), 65 * 64);
        let on_torus = pts.iter().filter(|q| (q.w1().norm_sqr() - 0.5).abs() < 1e-14).count();
        assert_eq!(on_torus, 64);
        assert!(pts.iter().any(|q| q.w2().norm() == 0.0));
        assert!(pts.iter().any(|q| q.w1().norm() < 1e-15));
    }

    #[test]
    fn torus_grid_is_on_the_torus() {
        let pts = SampleGrid::torus(4, 4).unwrap().points();
        assert_eq!(pts.len(), 16);
        for q in pts {
            assert!((q.w1().norm() - q.w2().norm()).abs() < 1e-15);
        }
    }

    #[test]
    fn tiny_grids_are_rejected() {
        assert!(SampleGrid::sphere(1, 8).is_err());
    }
}
