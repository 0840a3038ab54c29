//! Deformation tensors, the S¹-invariant family built from a polar stretch
//! profile, and dilatation arithmetic.
//!
//! The polar angle on the base sphere is tied to the Hopf chart by
//! `|z| = tan(θ/2)` with `z = w2 / w1`, which on the 3-sphere reads
//! `cos θ = 2|w1|² − 1`. Every profile in `θ` is therefore a radial profile in
//! `r = |w1|` and gets exact jets through [`RadialProfile`].

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{frame_derivatives, FrameVector, RadialProfile, ScalarField};
use crate::jet::Series1;
use crate::sphere::SpherePoint;

/// Default half-width of the stretch bump around the equator, in radians.
pub const DEFAULT_BUMP_WIDTH: f64 = 1.0;

/// Parameters of the invariant family: maximal stretch and bump half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantFamilyParams {
    pub lambda: f64,
    pub bump_width: f64,
}

impl InvariantFamilyParams {
    pub fn new(lambda: f64, bump_width: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda >= 1.0) {
            return Err(Error::InvalidParams(format!("stretch must be finite and >= 1, got {lambda}")));
        }
        if !(bump_width > 0.0 && bump_width < FRAC_PI_2) {
            return Err(Error::InvalidParams(format!(
                "bump width must lie in (0, pi/2), got {bump_width}"
            )));
        }
        Ok(Self { lambda, bump_width })
    }

    pub fn with_lambda(lambda: f64) -> Result<Self> {
        Self::new(lambda, DEFAULT_BUMP_WIDTH)
    }

    /// `λ(θ)` as a Taylor series in `θ`.
    pub fn lambda_series_theta(&self, theta: Series1) -> Series1 {
        let t = (theta.add_constant(-FRAC_PI_2)).scale(1.0 / self.bump_width);
        bump_series(t).scale(self.lambda - 1.0).add_constant(1.0)
    }

    /// `λ(θ)`.
    pub fn lambda_at(&self, theta: f64) -> f64 {
        self.lambda_series_theta(Series1::constant(theta)).value()
    }

    /// `λ` as a Taylor series in `r = |w1|`.
    pub fn lambda_series_r(&self, r: f64) -> Series1 {
        let cos_theta = {
            let s = Series1::variable(r);
            (s * s).scale(2.0).add_constant(-1.0)
        };
        // outside the bump the profile is exactly 1; skip the acos chain
        let theta0 = cos_theta.value().clamp(-1.0, 1.0).acos();
        if ((theta0 - FRAC_PI_2) / self.bump_width).abs() >= 1.0 {
            return Series1::constant(1.0);
        }
        self.lambda_series_theta(cos_theta.acos())
    }

    /// `(λ² − 1)/(λ² + 1)` as a Taylor series in `r`.
    pub fn rho_series_r(&self, r: f64) -> Series1 {
        let l = self.lambda_series_r(r);
        if l.is_constant() {
            return Series1::constant(rho_of(l.value()));
        }
        let l2 = l * l;
        l2.add_constant(-1.0) * l2.add_constant(1.0).recip()
    }

    /// `|ν|` on the Clifford torus, `(Λ² − 1)/(Λ² + 1)`.
    pub fn torus_nu_abs(&self) -> f64 {
        rho_of(self.lambda)
    }
}

/// `(λ² − 1)/(λ² + 1)`.
pub fn rho_of(lambda: f64) -> f64 {
    (lambda * lambda - 1.0) / (lambda * lambda + 1.0)
}

/// `χ(t) = exp(1 − 1/(1 − t²))` on `|t| < 1`, zero outside.
pub fn bump(t: f64) -> f64 {
    bump_series(Series1::constant(t)).value()
}

fn bump_series(t: Series1) -> Series1 {
    if t.value().abs() >= 1.0 {
        return Series1::constant(0.0);
    }
    let one_minus = (t * t).scale(-1.0).add_constant(1.0);
    one_minus.recip().scale(-1.0).add_constant(1.0).exp()
}

/// The pulled-back stretch profile `λ̃ = λ ∘ p` as a scalar field.
pub fn lambda_profile(params: InvariantFamilyParams) -> ScalarField {
    ScalarField::radial(RadialProfile::new(
        format!("lambda(Lambda = {}, width = {})", params.lambda, params.bump_width),
        move |r| params.lambda_series_r(r),
    ))
}

/// A deformation tensor `μ = ν W0 ⊗ psibar`, stored through its coefficient `ν`.
#[derive(Debug, Clone)]
pub struct DeformationTensor {
    nu: ScalarField,
    family: Option<InvariantFamilyParams>,
}

impl DeformationTensor {
    pub fn new(nu: ScalarField) -> Self {
        Self { nu, family: None }
    }

    /// The standard structure, `ν ≡ 0`.
    pub fn standard() -> Self {
        Self::new(ScalarField::constant(0.0))
    }

    /// The invariant family member for the given parameters.
    pub fn invariant_family(params: InvariantFamilyParams) -> Self {
        let mut t = nu_from_lambda(lambda_profile(params));
        t.family = Some(params);
        t
    }

    pub fn field(&self) -> &ScalarField {
        &self.nu
    }

    pub fn family(&self) -> Option<InvariantFamilyParams> {
        self.family
    }

    pub fn value(&self, q: &SpherePoint) -> Result<Complex64> {
        self.nu.value(q)
    }

    pub fn abs(&self, q: &SpherePoint) -> Result<f64> {
        Ok(self.value(q)?.norm())
    }

    /// `(Tν − 4iν)(q)`, zero for an S¹-invariant structure.
    pub fn invariance_residual(&self, q: &SpherePoint) -> Result<Complex64> {
        let d = frame_derivatives(&self.nu, &[&[], &[FrameVector::T]], q)?;
        Ok(d[1] - Complex64::new(0.0, 4.0) * d[0])
    }

    /// `(W0 ν, W0bar ν)` at `q`.
    pub fn frame_gradient(&self, q: &SpherePoint) -> Result<(Complex64, Complex64)> {
        let d = frame_derivatives(&self.nu, &[&[FrameVector::W0], &[FrameVector::W0Bar]], q)?;
        Ok((d[0], d[1]))
    }
}

/// `ν = ((λ̃² − 1)/(λ̃² + 1)) · (w1 w2)/(w1bar w2bar)`.
///
/// Where the radial factor vanishes identically the angular factor is never
/// evaluated, so poles and the axes `w1 = 0`, `w2 = 0` give `ν = 0`.
pub fn nu_from_lambda(lambda_tilde: ScalarField) -> DeformationTensor {
    let l2 = ScalarField::product(lambda_tilde.clone(), lambda_tilde);
    let radial = ScalarField::quotient(
        ScalarField::sum(vec![l2.clone(), ScalarField::constant(-1.0)]),
        ScalarField::sum(vec![l2, ScalarField::constant(1.0)]),
    );
    DeformationTensor::new(ScalarField::product(radial, ScalarField::angular(1, 1)))
}

/// Pointwise dilatation `K = (1 + |μ|)/(1 − |μ|)`.
pub fn dilatation(mu_abs: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&mu_abs) {
        return Err(Error::OrientationViolation(mu_abs));
    }
    Ok((1.0 + mu_abs) / (1.0 - mu_abs))
}

/// Difference between `Dp(−w1bar² (W0bar − ν W0))` and the (0,1) field
/// `∂/∂zbar − ρ (z/zbar) ∂/∂z` of the stretched base metric, at `z = p(q)`.
///
/// For a family tensor `ρ` is computed from `λ(θ)` with `θ = 2 atan |z|`,
/// independently of `ν`; for other tensors `ρ = |ν(q)|`.
pub fn pushforward_consistency(nu: &DeformationTensor, q: &SpherePoint) -> Result<f64> {
    let (w1, w2) = (q.w1(), q.w2());
    if w1.norm() < 1e-12 {
        return Err(Error::Chart("w1 = 0 lies outside the z = w2/w1 chart".into()));
    }
    let nu_q = nu.value(q)?;
    // -w1bar^2 (W0bar - nu W0): dw components come from W0, dwbar from W0bar
    let k = -w1.conj() * w1.conj();
    let dw = [-k * nu_q * w2.conj(), k * nu_q * w1.conj()];
    let dwbar = [k * w2, -k * w1];
    let dz = (w1 * dw[1] - w2 * dw[0]) / (w1 * w1);
    let dzbar = (w1.conj() * dwbar[1] - w2.conj() * dwbar[0]) / (w1.conj() * w1.conj());

    let z = w2 / w1;
    let rho = match nu.family {
        Some(params) => rho_of(params.lambda_at(2.0 * z.norm().atan())),
        None => nu_q.norm(),
    };
    let phase = if z.norm() == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        z / z.conj()
    };
    let target_dz = -rho * phase;
    if rho == 0.0 && dz.norm() == 0.0 {
        return Ok((dzbar - 1.0).norm());
    }
    Ok(((dz - target_dz).norm_sqr() + (dzbar - 1.0).norm_sqr()).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn family(l: f64) -> InvariantFamilyParams {
        InvariantFamilyParams::with_lambda(l).unwrap()
    }

    #[test]
    fn params_are_validated() {
        assert!(InvariantFamilyParams::new(0.5, 1.0).is_err());
        assert!(InvariantFamilyParams::new(2.0, 0.0).is_err());
        assert!(InvariantFamilyParams::new(2.0, 1.6).is_err());
        assert!(InvariantFamilyParams::new(2.0, 1.5).is_ok());
    }

    #[test]
    fn lambda_profile_values() {
        let p = family(2.0);
        assert_abs_diff_eq!(p.lambda_at(FRAC_PI_2), 2.0, epsilon = 1e-15);
        assert_eq!(p.lambda_at(0.0), 1.0);
        assert_eq!(p.lambda_at(std::f64::consts::PI), 1.0);
        let d = p.lambda_series_theta(Series1::variable(FRAC_PI_2)).derivatives();
        assert_abs_diff_eq!(d[1], 0.0, epsilon = 1e-15);
        for k in 0..200 {
            let th = k as f64 * std::f64::consts::PI / 199.0;
            let l = p.lambda_at(th);
            assert!((1.0..=2.0).contains(&l));
        }
    }

    #[test]
    fn lambda_in_r_matches_lambda_in_theta() {
        let p = family(1.7);
        for k in 1..50 {
            let r = k as f64 / 50.0;
            let theta = (2.0 * r * r - 1.0).acos();
            assert_abs_diff_eq!(p.lambda_series_r(r).value(), p.lambda_at(theta), epsilon = 1e-14);
        }
    }

    #[test]
    fn nu_on_torus_and_near_poles() {
        let nu = DeformationTensor::invariant_family(family(2.0));
        let q = SpherePoint::clifford(0.3, -1.1);
        assert_abs_diff_eq!(nu.abs(&q).unwrap(), 0.6, epsilon = 1e-14);
        let pole = SpherePoint::from_torus_angles(0.01, 0.2, 0.5);
        assert_eq!(nu.value(&pole).unwrap(), Complex64::new(0.0, 0.0));
        let axis = SpherePoint::from_torus_angles(FRAC_PI_2, 0.0, 0.5);
        assert_eq!(nu.value(&axis).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn nu_is_invariant() {
        let nu = DeformationTensor::invariant_family(family(2.0));
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..200 {
            let q = SpherePoint::random(&mut rng);
            assert!(nu.invariance_residual(&q).unwrap().norm() < 1e-10);
        }
    }

    #[test]
    fn frame_gradient_vanishes_on_torus() {
        let nu = DeformationTensor::invariant_family(family(2.0));
        let (a, b) = nu.frame_gradient(&SpherePoint::clifford(0.7, 2.0)).unwrap();
        assert!(a.norm() + b.norm() < 1e-9);
    }

    #[test]
    fn dilatation_values() {
        assert_eq!(dilatation(0.0).unwrap(), 1.0);
        assert_abs_diff_eq!(dilatation(0.6).unwrap(), 4.0, epsilon = 1e-15);
        assert_abs_diff_eq!(dilatation(0.5).unwrap(), 3.0, epsilon = 1e-15);
        assert_eq!(dilatation(1.0).unwrap_err(), Error::OrientationViolation(1.0));
    }

    #[test]
    fn pushforward_on_torus_and_pole() {
        let nu = DeformationTensor::invariant_family(family(2.0));
        assert!(pushforward_consistency(&nu, &SpherePoint::clifford(0.4, 1.3)).unwrap() < 1e-10);
        let q = SpherePoint::from_torus_angles(0.05, 0.4, 1.0);
        assert!(pushforward_consistency(&nu, &q).unwrap() < 1e-10);
        let bad = SpherePoint::from_torus_angles(FRAC_PI_2, 0.0, 0.0);
        assert!(matches!(pushforward_consistency(&nu, &bad), Err(Error::Chart(_))));
    }
}
