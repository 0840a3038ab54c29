use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use num_complex::Complex64;

use super::chart::{project, project_vector, Chart};
use crate::error::{Error, Result};
use crate::sphere::{frame_at, SpherePoint};

/// Area forms on the base sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AreaForm {
    /// `ω0 = 4 dx dy / (1 + |z|²)²`, total area `4π`.
    Omega0,
    /// `ω0 / 2`, the curvature form of the Hopf connection.
    HalfOmega0,
    /// `sin θ dθ dφ` with `|z| = tan(θ/2)`.
    SinTheta,
}

/// Integration regions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    /// `|c − center| ≤ radius` in a chart.
    Disk { chart: Chart, center: Complex64, radius: f64 },
    WholeSphere,
}

fn density(form: AreaForm, c: Complex64) -> f64 {
    let rho = c.norm();
    match form {
        AreaForm::Omega0 => 4.0 / (1.0 + rho * rho).powi(2),
        AreaForm::HalfOmega0 => 2.0 / (1.0 + rho * rho).powi(2),
        AreaForm::SinTheta => {
            if rho < 1e-8 {
                return 4.0;
            }
            // dθ dφ = (dθ/dρ)(1/ρ) dx dy
            let theta = 2.0 * rho.atan();
            let dtheta = 2.0 / (1.0 + rho * rho);
            theta.sin() * dtheta / rho
        }
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

fn disk_integral(form: AreaForm, center: Complex64, radius: f64, radial: usize, angular: usize) -> f64 {
    static CACHE: OnceLock<std::sync::Mutex<std::collections::HashMap<usize, (Vec<f64>, Vec<f64>)>>> =
        OnceLock::new();
    let (x, w) = {
        let mut cache = CACHE.get_or_init(Default::default).lock().expect("quadrature cache");
        cache.entry(radial).or_insert_with(|| gauss_legendre(radial)).clone()
    };
    let mut total = 0.0;
    for (xi, wi) in x.iter().zip(&w) {
        let r = 0.5 * radius * (xi + 1.0);
        let ring: f64 = (0..angular)
            .map(|j| density(form, center + Complex64::from_polar(r, TAU * j as f64 / angular as f64)))
            .sum();
        total += wi * r * ring * TAU / angular as f64;
    }
    total * 0.5 * radius
}

/// Area of a region under the chosen form, by polar Gauss–Legendre × trapezoid
/// quadrature refined until successive values agree.
pub fn cap_area(region: Region, form: AreaForm) -> Result<f64> {
    match region {
        Region::WholeSphere => {
            let a = cap_area(Region::Disk { chart: Chart::South, center: Complex64::new(0.0, 0.0), radius: 1.0 }, form)?;
            let b = cap_area(Region::Disk { chart: Chart::North, center: Complex64::new(0.0, 0.0), radius: 1.0 }, form)?;
            Ok(a + b)
        }
        Region::Disk { center, radius, .. } => {
            if !(radius > 0.0 && radius.is_finite() && center.norm().is_finite()) {
                return Err(Error::Quadrature(format!("invalid disk radius {radius}")));
            }
            let (mut radial, mut angular) = (16, 32);
            let mut prev = disk_integral(form, center, radius, radial, angular);
            for _ in 0..8 {
                radial *= 2;
                angular *= 2;
                let next = disk_integral(form, center, radius, radial, angular);
                if (next - prev).abs() <= 1e-13 * next.abs().max(1.0) {
                    return Ok(next);
                }
                prev = next;
            }
            Err(Error::Quadrature(format!(
                "disk of radius {radius} about {center} did not converge"
            )))
        }
    }
}

/// `|<d eta, A ∧ B> − (ω0/2)(Dp A, Dp B)|` maximized over pairs from the
/// horizontal basis `X = 2 Re W0`, `Y = −2 Im W0`.
pub fn structure_equation_residual(q: &SpherePoint) -> Result<f64> {
    let f = frame_at(q);
    let chart = project(q);
    let basis = [f.x().as_complex(), f.y().as_complex(), (f.x() + f.y().scale(0.5)).as_complex()];
    let mut worst: f64 = 0.0;
    for a in 0..basis.len() {
        for b in 0..basis.len() {
            let lhs = f.deta(&basis[a], &basis[b]);
            let u = project_vector(chart.chart, q, &basis[a])?;
            let v = project_vector(chart.chart, q, &basis[b])?;
            let rhs = density(AreaForm::HalfOmega0, chart.coord) * (u.conj() * v).im;
            worst = worst.max((lhs - rhs).norm());
        }
    }
    Ok(worst)
}

/// `|<d eta, T ∧ A>|` for the horizontal basis; zero since `T` is characteristic.
pub fn fiber_contraction(q: &SpherePoint) -> f64 {
    let f = frame_at(q);
    [f.x(), f.y()]
        .iter()
        .map(|a| f.deta(&f.t, &a.as_complex()).norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(5);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(8)).sum();
        assert_abs_diff_eq!(s, 2.0 / 9.0, epsilon = 1e-14);
        assert_abs_diff_eq!(w.iter().sum::<f64>(), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn known_areas() {
        assert_abs_diff_eq!(cap_area(Region::WholeSphere, AreaForm::Omega0).unwrap(), 4.0 * PI, epsilon = 1e-8);
        let unit = Region::Disk { chart: Chart::South, center: Complex64::new(0.0, 0.0), radius: 1.0 };
        assert_abs_diff_eq!(cap_area(unit, AreaForm::HalfOmega0).unwrap(), PI, epsilon = 1e-8);
        assert_abs_diff_eq!(cap_area(unit, AreaForm::SinTheta).unwrap(), 2.0 * PI, epsilon = 1e-8);
    }

    #[test]
    fn off_center_disk_matches_closed_form() {
        // a chart disk is a spherical cap; compare with 2π(1 − cos α)
        let center = Complex64::new(0.4, -0.3);
        let radius = 0.5;
        let a = cap_area(Region::Disk { chart: Chart::North, center, radius }, AreaForm::Omega0).unwrap();
        let near = center * (1.0 - radius / center.norm());
        let far = center * (1.0 + radius / center.norm());
        let na = super::super::chart::chart_to_unit(Chart::North, near);
        let nb = super::super::chart::chart_to_unit(Chart::North, far);
        let alpha = super::super::chart::angle_between(na, nb) / 2.0;
        assert_abs_diff_eq!(a, TAU * (1.0 - alpha.cos()), epsilon = 1e-10);
    }

    #[test]
    fn invalid_disk_is_rejected() {
        let d = Region::Disk { chart: Chart::South, center: Complex64::new(0.0, 0.0), radius: -1.0 };
        assert!(matches!(cap_area(d, AreaForm::Omega0), Err(Error::Quadrature(_))));
    }

    #[test]
    fn structure_equation_on_points() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let q = SpherePoint::new(Complex64::new(h, 0.0), Complex64::new(h, 0.0)).unwrap();
        assert!(structure_equation_residual(&q).unwrap() < 1e-10);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..200 {
            let q = SpherePoint::random(&mut rng);
            assert!(structure_equation_residual(&q).unwrap() < 1e-9);
            assert!(fiber_contraction(&q) < 1e-15);
        }
    }
}
