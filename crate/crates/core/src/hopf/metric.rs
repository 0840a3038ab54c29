use num_complex::Complex64;

use super::basemap::BaseMap;
use super::chart::{cross, dot, norm3, normalize3, RiemannSpherePoint, Vec3};
use crate::cr::{rho_of, InvariantFamilyParams};
use crate::error::{Error, Result};

/// Riemannian metrics on the base sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MetricOnS2 {
    /// `ds0 = 2|dz| / (1 + |z|²)`.
    Round,
    /// `ds1² = λ² dθ² + (sin²θ / λ²) dφ²`.
    Stretched(InvariantFamilyParams),
}

/// Unit vectors along `∂θ` and `(1/sin θ) ∂φ` at `n`; any orthonormal pair at the poles.
pub fn polar_frame(n: Vec3) -> (Vec3, Vec3) {
    let axis = cross([0.0, 0.0, 1.0], n);
    if norm3(axis) < 1e-12 {
        let sign = n[2].signum();
        return ([sign, 0.0, 0.0], [0.0, 1.0, 0.0]);
    }
    let e_phi = normalize3(axis);
    (cross(e_phi, n), e_phi)
}

impl MetricOnS2 {
    /// Lengths of the round unit vectors `e_θ`, `e_φ` in this metric.
    pub fn scales(&self, n: Vec3) -> (f64, f64) {
        match self {
            MetricOnS2::Round => (1.0, 1.0),
            MetricOnS2::Stretched(p) => {
                let l = p.lambda_at(n[2].clamp(-1.0, 1.0).acos());
                (l, 1.0 / l)
            }
        }
    }

    /// Length of a tangent vector at `n`.
    pub fn length(&self, n: Vec3, v: Vec3) -> f64 {
        let (et, ep) = polar_frame(n);
        let (st, sp) = self.scales(n);
        (st * dot(v, et)).hypot(sp * dot(v, ep))
    }

    /// Length from the south-chart expression: `ds0` as `2|dz|/(1+|z|²)` and
    /// `ds1 = (λ²+1)/(λ(1+|z|²)) |dz + ρ (z/zbar) dzbar|`.
    pub fn length_in_chart(&self, z: Complex64, zdot: Complex64) -> f64 {
        let d = 1.0 + z.norm_sqr();
        match self {
            MetricOnS2::Round => 2.0 * zdot.norm() / d,
            MetricOnS2::Stretched(p) => {
                let l = p.lambda_at(2.0 * z.norm().atan());
                let phase = if z.norm() == 0.0 { Complex64::new(0.0, 0.0) } else { z / z.conj() };
                (l * l + 1.0) / (l * d) * (zdot + rho_of(l) * phase * zdot.conj()).norm()
            }
        }
    }

    /// Area density against `sin θ dθ dφ`.
    pub fn area_ratio(&self, n: Vec3) -> f64 {
        let (a, b) = self.scales(n);
        a * b
    }
}

/// Ratio of the singular values of `DF` at `x`, measured in `source` at `x`
/// and in `target` at `F(x)`.
pub fn quotient_dilatation(
    f: &dyn BaseMap,
    source: MetricOnS2,
    target: MetricOnS2,
    x: &RiemannSpherePoint,
) -> Result<f64> {
    let n = x.to_unit();
    let m = f.apply(n);
    let (et, ep) = polar_frame(n);
    let (st, sp) = source.scales(n);
    let (ft, fp) = polar_frame(m);
    let (tt, tp) = target.scales(m);
    let columns = [
        f.differential(n, et.map(|c| c / st)),
        f.differential(n, ep.map(|c| c / sp)),
    ];
    let mat = columns.map(|c| [tt * dot(c, ft), tp * dot(c, fp)]);
    if mat.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateMap(format!("non-finite differential at {x}")));
    }
    let frob = mat.iter().flatten().map(|v| v * v).sum::<f64>();
    let det = (mat[0][0] * mat[1][1] - mat[0][1] * mat[1][0]).abs();
    let disc = (frob * frob - 4.0 * det * det).max(0.0).sqrt();
    let smax = ((frob + disc) / 2.0).sqrt();
    let smin = if smax > 0.0 { det / smax } else { 0.0 };
    if !(smin > 1e-12 * smax) {
        return Err(Error::DegenerateMap(format!("singular differential at {x}")));
    }
    Ok(smax / smin)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hopf::basemap::{AxisRotation, IdentityMap};
    use crate::hopf::chart::{chart_to_unit, chart_velocity_to_unit, Chart};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn stretched(l: f64) -> MetricOnS2 {
        MetricOnS2::Stretched(InvariantFamilyParams::with_lambda(l).unwrap())
    }

    #[test]
    fn identity_dilatation_values() {
        let eq = RiemannSpherePoint::from_z(Complex64::new(0.6, 0.8));
        let k = quotient_dilatation(&IdentityMap, stretched(2.0), MetricOnS2::Round, &eq).unwrap();
        assert_abs_diff_eq!(k, 4.0, epsilon = 1e-10);
        let pole = RiemannSpherePoint::from_z(Complex64::new(0.0, 0.0));
        let k = quotient_dilatation(&IdentityMap, stretched(2.0), MetricOnS2::Round, &pole).unwrap();
        assert_abs_diff_eq!(k, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn dilatation_is_lambda_squared() {
        let p = InvariantFamilyParams::with_lambda(2.0).unwrap();
        // find θ with λ(θ) = 1.5 by bisection on the monotone side of the bump
        let (mut a, mut b) = (std::f64::consts::FRAC_PI_2 - 1.0, std::f64::consts::FRAC_PI_2);
        for _ in 0..100 {
            let m = 0.5 * (a + b);
            if p.lambda_at(m) < 1.5 {
                a = m;
            } else {
                b = m;
            }
        }
        let x = RiemannSpherePoint::from_z(Complex64::new((0.5 * a).tan(), 0.0));
        let k = quotient_dilatation(&IdentityMap, MetricOnS2::Stretched(p), MetricOnS2::Round, &x).unwrap();
        assert_abs_diff_eq!(k, 2.25, epsilon = 1e-9);
    }

    #[test]
    fn rotations_are_conformal_for_both_metrics() {
        let x = RiemannSpherePoint::from_z(Complex64::new(0.3, 0.9));
        let r = AxisRotation { alpha: 1.2 };
        for m in [MetricOnS2::Round, stretched(1.8)] {
            assert_abs_diff_eq!(quotient_dilatation(&r, m, m, &x).unwrap(), 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn chart_form_agrees_with_polar_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for m in [MetricOnS2::Round, stretched(2.0), stretched(1.3)] {
            for _ in 0..200 {
                let z = Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
                let zdot = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                let n = chart_to_unit(Chart::South, z);
                let v = chart_velocity_to_unit(Chart::South, z, zdot);
                assert_abs_diff_eq!(m.length(n, v), m.length_in_chart(z, zdot), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn area_elements_agree() {
        let m = stretched(2.0);
        for k in 1..20 {
            let z = Complex64::new(0.2 * k as f64, 0.1);
            assert_abs_diff_eq!(m.area_ratio(chart_to_unit(Chart::South, z)), 1.0, epsilon = 1e-15);
        }
    }
}
