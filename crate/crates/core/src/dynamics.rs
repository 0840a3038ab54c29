//! Contact Hamiltonian vector fields, their flows with tangent maps, and the
//! Beltrami coefficient of a flow map between two CR structures.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cr::{dilatation, DeformationTensor};
use crate::error::{Error, Result};
use crate::field::{apply_vector_field, Extension, FrameVector, PointJets, ScalarField};
use crate::jet::Jet3;
use crate::sphere::{frame_at, AmbientVector, CVector, SpherePoint};

/// Default RK4 steps per unit flow time.
pub const DEFAULT_STEPS_PER_UNIT: usize = 512;
/// Smallest accepted step density.
pub const MIN_STEPS_PER_UNIT: usize = 16;

pub type Matrix4 = [[f64; 4]; 4];

const IDENTITY: Matrix4 = [
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
];

/// The contact vector field `V = i(W0bar u) W0 − i(W0 u) W0bar + u T` of a
/// real Hamiltonian `u`.
#[derive(Debug, Clone)]
pub struct ContactVectorField {
    u: ScalarField,
}

/// Builds the contact vector field of `u`, rejecting visibly complex Hamiltonians.
pub fn hamiltonian_field(u: ScalarField) -> Result<ContactVectorField> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..8 {
        let q = SpherePoint::random(&mut rng);
        let v = match u.value(&q) {
            Ok(v) => v,
            // singular probes say nothing about reality
            Err(Error::Singularity { .. }) => continue,
            Err(e) => return Err(e),
        };
        if v.im.abs() > 1e-12 * (1.0 + v.re.abs()) {
            return Err(Error::Domain(format!(
                "Hamiltonian must be real, found value {v} at {q}"
            )));
        }
    }
    Ok(ContactVectorField { u })
}

impl ContactVectorField {
    pub fn hamiltonian(&self) -> &ScalarField {
        &self.u
    }

    fn component_jets(&self, x: [f64; 4], order: usize) -> Result<[Jet3; 4]> {
        let pj = PointJets::new(x, order);
        let u = self.u.eval_jet(&pj, Extension::Homogeneous)?.re();
        let wbar_u = apply_vector_field(&u, &pj.real_coefficients(&FrameVector::W0Bar.field()));
        let raw = pj.raw();
        let i = Complex64::i();
        let a1 = (wbar_u * raw[3] + u * raw[0]).scale(i);
        let a2 = (u * raw[1] - wbar_u * raw[2]).scale(i);
        let minus_i = -i;
        Ok([a1.re(), a1.scale(minus_i).re(), a2.re(), a2.scale(minus_i).re()])
    }

    /// `V` in real ambient coordinates at a nonzero point of `C²`.
    pub fn ambient(&self, x: [f64; 4]) -> Result<[f64; 4]> {
        let c = self.component_jets(x, 1)?;
        Ok(c.map(|j| j.value().re))
    }

    /// `V` and its ambient Jacobian `∂V_i/∂x_k`.
    pub fn ambient_with_jacobian(&self, x: [f64; 4]) -> Result<([f64; 4], Matrix4)> {
        let c = self.component_jets(x, 2)?;
        let v = c.map(|j| j.value().re);
        let jac = c.map(|j| j.gradient().map(|g| g.re));
        Ok((v, jac))
    }

    /// `V` at a point of the sphere as a real tangent vector.
    pub fn at(&self, q: &SpherePoint) -> Result<AmbientVector> {
        Ok(AmbientVector::from_real(self.ambient(q.to_real())?))
    }
}

/// Integrator settings for flows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowSettings {
    pub steps_per_unit: usize,
    pub s_max: f64,
}

impl Default for FlowSettings {
    fn default() -> Self {
        Self {
            steps_per_unit: DEFAULT_STEPS_PER_UNIT,
            s_max: 1.0,
        }
    }
}

/// The time-`s` flow `g_s` of a contact vector field.
#[derive(Debug, Clone)]
pub struct FlowMap {
    field: ContactVectorField,
    settings: FlowSettings,
}

/// Image of a point under `g_s` together with the ambient tangent map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowImage {
    pub point: SpherePoint,
    pub tangent: Matrix4,
}

impl FlowImage {
    /// Pushes a (possibly complex) tangent vector at the source point forward,
    /// projected onto the tangent space at the image.
    pub fn push(&self, v: &CVector) -> CVector {
        let c = v.real_coordinates();
        let mut d = [Complex64::new(0.0, 0.0); 4];
        for (i, di) in d.iter_mut().enumerate() {
            for (k, ck) in c.iter().enumerate() {
                *di += ck * self.tangent[i][k];
            }
        }
        let x = self.point.to_real();
        let radial: Complex64 = (0..4).map(|k| d[k] * x[k]).sum();
        for k in 0..4 {
            d[k] -= radial * x[k];
        }
        CVector::from_real_coordinates(d)
    }
}

fn axpy(a: f64, x: &[f64; 4], y: &[f64; 4]) -> [f64; 4] {
    std::array::from_fn(|k| y[k] + a * x[k])
}

fn mat_axpy(a: f64, x: &Matrix4, y: &Matrix4) -> Matrix4 {
    std::array::from_fn(|i| axpy(a, &x[i], &y[i]))
}

fn mat_mul(a: &Matrix4, b: &Matrix4) -> Matrix4 {
    std::array::from_fn(|i| std::array::from_fn(|k| (0..4).map(|j| a[i][j] * b[j][k]).sum()))
}

fn normalize(x: [f64; 4]) -> [f64; 4] {
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    x.map(|v| v / n)
}

impl FlowMap {
    pub fn new(field: ContactVectorField, settings: FlowSettings) -> Result<Self> {
        if settings.steps_per_unit < MIN_STEPS_PER_UNIT {
            return Err(Error::Configuration(format!(
                "rk4_steps_per_unit = {} is below the minimum {MIN_STEPS_PER_UNIT}",
                settings.steps_per_unit
            )));
        }
        if !(settings.s_max > 0.0 && settings.s_max.is_finite()) {
            return Err(Error::Configuration(format!("s_max = {} must be positive", settings.s_max)));
        }
        Ok(Self { field, settings })
    }

    /// Flow of `u` with default settings.
    pub fn of_hamiltonian(u: ScalarField) -> Result<Self> {
        Self::new(hamiltonian_field(u)?, FlowSettings::default())
    }

    pub fn field(&self) -> &ContactVectorField {
        &self.field
    }

    pub fn settings(&self) -> FlowSettings {
        self.settings
    }

    /// Same flow with a different step density.
    pub fn with_steps_per_unit(&self, steps_per_unit: usize) -> Result<Self> {
        Self::new(
            self.field.clone(),
            FlowSettings {
                steps_per_unit,
                ..self.settings
            },
        )
    }

    fn steps(&self, s: f64) -> Result<usize> {
        if !s.is_finite() || s.abs() > self.settings.s_max {
            return Err(Error::Configuration(format!(
                "flow time {s} exceeds s_max = {}",
                self.settings.s_max
            )));
        }
        Ok((s.abs() * self.settings.steps_per_unit as f64).ceil() as usize)
    }

    /// `g_s(q)` without the tangent map.
    pub fn point(&self, q: &SpherePoint, s: f64) -> Result<SpherePoint> {
        let n = self.steps(s)?;
        let mut x = q.to_real();
        if n == 0 {
            return Ok(*q);
        }
        let h = s / n as f64;
        for _ in 0..n {
            let k1 = self.field.ambient(x)?;
            let k2 = self.field.ambient(axpy(h / 2.0, &k1, &x))?;
            let k3 = self.field.ambient(axpy(h / 2.0, &k2, &x))?;
            let k4 = self.field.ambient(axpy(h, &k3, &x))?;
            x = std::array::from_fn(|k| x[k] + h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]));
            x = normalize(x);
        }
        SpherePoint::from_real(x)
    }

    /// `g_s(q)` and the tangent map, integrated jointly with the variational equation.
    pub fn evaluate(&self, q: &SpherePoint, s: f64) -> Result<FlowImage> {
        let n = self.steps(s)?;
        let mut x = q.to_real();
        let mut m = IDENTITY;
        if n == 0 {
            return Ok(FlowImage {
                point: *q,
                tangent: m,
            });
        }
        let h = s / n as f64;
        let rhs = |x: [f64; 4], m: &Matrix4| -> Result<([f64; 4], Matrix4)> {
            let (v, jac) = self.field.ambient_with_jacobian(x)?;
            Ok((v, mat_mul(&jac, m)))
        };
        for _ in 0..n {
            let (k1, l1) = rhs(x, &m)?;
            let (k2, l2) = rhs(axpy(h / 2.0, &k1, &x), &mat_axpy(h / 2.0, &l1, &m))?;
            let (k3, l3) = rhs(axpy(h / 2.0, &k2, &x), &mat_axpy(h / 2.0, &l2, &m))?;
            let (k4, l4) = rhs(axpy(h, &k3, &x), &mat_axpy(h, &l3, &m))?;
            x = std::array::from_fn(|k| x[k] + h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]));
            m = std::array::from_fn(|i| {
                std::array::from_fn(|k| {
                    m[i][k] + h / 6.0 * (l1[i][k] + 2.0 * l2[i][k] + 2.0 * l3[i][k] + l4[i][k])
                })
            });
            x = normalize(x);
        }
        Ok(FlowImage {
            point: SpherePoint::from_real(x)?,
            tangent: m,
        })
    }
}

/// `ν_s = <psi, Dg W0bar> / <psi, Dg W0>`, the standard structure pulled back by `g_s`.
pub fn pulled_back_nu(image: &FlowImage, q: &SpherePoint) -> Result<Complex64> {
    let source = frame_at(q);
    let target = frame_at(&image.point);
    let num = target.psi(&image.push(&source.w0bar));
    let den = target.psi(&image.push(&source.w0));
    if den.norm() < 1e-14 {
        return Err(Error::OrientationDegeneracy {
            context: format!("pullback quotient at {q}"),
            detail: format!("<psi, Dg W0> = {den}"),
        });
    }
    Ok(num / den)
}

/// Beltrami coefficient of `g_s` from the structure `ν` to the standard one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeltramiValue {
    pub mu: Complex64,
    pub nu: Complex64,
    pub nu_s: Complex64,
}

/// `μ = (ν_s − ν)/(1 − conj(ν) ν_s)` at `q`.
pub fn beltrami(flow: &FlowMap, nu: &DeformationTensor, q: &SpherePoint, s: f64) -> Result<Complex64> {
    Ok(beltrami_detail(flow, nu, q, s)?.mu)
}

pub fn beltrami_detail(flow: &FlowMap, nu: &DeformationTensor, q: &SpherePoint, s: f64) -> Result<BeltramiValue> {
    let nu_q = nu.value(q)?;
    if nu_q.norm() >= 1.0 {
        return Err(Error::OrientationViolation(nu_q.norm()));
    }
    let image = flow.evaluate(q, s)?;
    let nu_s = pulled_back_nu(&image, q)?;
    let den = 1.0 - nu_q.conj() * nu_s;
    if den.norm() < 1e-14 {
        return Err(Error::OrientationDegeneracy {
            context: format!("Beltrami quotient at {q}, s = {s}"),
            detail: format!("1 - conj(nu) nu_s = {den}"),
        });
    }
    let mu = (nu_s - nu_q) / den;
    if mu.norm() >= 1.0 {
        return Err(Error::OrientationViolation(mu.norm()));
    }
    Ok(BeltramiValue { mu, nu: nu_q, nu_s })
}

/// Grid maximum of `|μ|` and the resulting dilatation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DilatationSummary {
    pub k: f64,
    pub sup_mu: f64,
    pub index: usize,
    pub point: SpherePoint,
}

/// `K = (1 + sup|μ|)/(1 − sup|μ|)` over grid points; the first maximizer is reported.
pub fn max_dilatation(
    flow: &FlowMap,
    nu: &DeformationTensor,
    points: &[SpherePoint],
    s: f64,
) -> Result<DilatationSummary> {
    if points.is_empty() {
        return Err(Error::Configuration("empty evaluation grid".into()));
    }
    let values: Vec<f64> = points
        .par_iter()
        .enumerate()
        .map(|(index, q)| {
            beltrami(flow, nu, q, s).map(|m| m.norm()).map_err(|e| Error::AtGridPoint {
                index,
                point: q.to_string(),
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;
    let mut index = 0;
    for (k, v) in values.iter().enumerate() {
        if *v > values[index] {
            index = k;
        }
    }
    let sup_mu = values[index];
    Ok(DilatationSummary {
        k: dilatation(sup_mu)?,
        sup_mu,
        index,
        point: points[index],
    })
}

/// `max |<eta, Dg_s X>|` over the horizontal basis `X = 2 Re W0`, `Y = −2 Im W0`.
pub fn contact_defect(flow: &FlowMap, q: &SpherePoint, s: f64) -> Result<f64> {
    let image = flow.evaluate(q, s)?;
    let source = frame_at(q);
    let target = frame_at(&image.point);
    Ok([source.x(), source.y()]
        .iter()
        .map(|v| target.eta(&image.push(&v.as_complex())).norm())
        .fold(0.0, f64::max))
}

/// `sup dist(g_s(U_φ q), U_φ g_s(q))` over points and angles.
pub fn equivariance_defect(flow: &FlowMap, points: &[SpherePoint], s: f64, angles: &[f64]) -> Result<f64> {
    let defects: Vec<f64> = points
        .par_iter()
        .map(|q| {
            let gq = flow.point(q, s)?;
            angles.iter().try_fold(0.0f64, |acc, &phi| {
                let a = flow.point(&q.rotate(phi), s)?;
                Ok(acc.max(a.distance(&gq.rotate(phi))))
            })
        })
        .collect::<Result<_>>()?;
    Ok(defects.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cr::InvariantFamilyParams;
    use crate::sphere::poly::{Poly, W1};
    use approx::assert_abs_diff_eq;

    fn re_w1() -> ScalarField {
        ScalarField::polynomial(Poly::var(W1).real_part())
    }

    #[test]
    fn complex_hamiltonian_is_rejected() {
        let u = ScalarField::polynomial(Poly::var(W1));
        assert!(matches!(hamiltonian_field(u), Err(Error::Domain(_))));
    }

    #[test]
    fn constant_hamiltonian_gives_t() {
        let v = hamiltonian_field(ScalarField::constant(1.0)).unwrap();
        let q = SpherePoint::clifford(0.3, 0.9);
        let a = v.at(&q).unwrap();
        let t = frame_at(&q).t_real();
        assert!((a - t).norm() < 1e-15);
    }

    #[test]
    fn hamiltonian_identity_and_psi_component() {
        let v = hamiltonian_field(re_w1()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let q = SpherePoint::random(&mut rng);
            let f = frame_at(&q);
            let a = v.at(&q).unwrap().as_complex();
            assert_abs_diff_eq!(f.eta(&a).re, q.w1().re, epsilon = 1e-12);
            let wbar_u = crate::field::frame_derivative(&re_w1(), &[FrameVector::W0Bar], &q).unwrap();
            assert!((f.psi(&a) - Complex64::i() * wbar_u).norm() < 1e-12);
        }
    }

    #[test]
    fn diagonal_example() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let q = SpherePoint::new(Complex64::new(h, 0.0), Complex64::new(h, 0.0)).unwrap();
        let a = hamiltonian_field(re_w1()).unwrap().at(&q).unwrap();
        let f = frame_at(&q);
        let w0u = 1.0 / (2.0 * 2f64.sqrt());
        // W0 u = W0bar u = 1/(2 sqrt 2) and u = 1/sqrt 2 at this point
        let direct = f.w0.scale(Complex64::new(0.0, w0u)) - f.w0bar.scale(Complex64::new(0.0, w0u))
            + f.t.scale(Complex64::new(h, 0.0));
        for k in 0..4 {
            assert!((a.as_complex().0[k] - direct.0[k]).norm() < 1e-14);
        }
    }

    #[test]
    fn step_density_is_validated() {
        let v = hamiltonian_field(re_w1()).unwrap();
        let s = FlowSettings {
            steps_per_unit: 8,
            s_max: 1.0,
        };
        assert!(matches!(FlowMap::new(v, s), Err(Error::Configuration(_))));
    }

    #[test]
    fn rotation_flow_is_the_circle_action() {
        let flow = FlowMap::of_hamiltonian(ScalarField::constant(1.0)).unwrap();
        let q = SpherePoint::from_torus_angles(0.4, 0.2, 2.0);
        for s in [0.1, 0.5, 1.0] {
            let g = flow.point(&q, s).unwrap();
            assert!(g.distance(&q.rotate(s)) < 1e-10);
        }
    }

    #[test]
    fn zero_time_is_identity() {
        let flow = FlowMap::of_hamiltonian(re_w1()).unwrap();
        let q = SpherePoint::clifford(0.1, 0.2);
        let img = flow.evaluate(&q, 0.0).unwrap();
        assert_eq!(img.point, q);
        assert_eq!(img.tangent, IDENTITY);
    }

    #[test]
    fn group_law() {
        let flow = FlowMap::of_hamiltonian(re_w1()).unwrap();
        let q = SpherePoint::from_torus_angles(0.9, 0.3, -0.4);
        let a = flow.point(&flow.point(&q, 0.2).unwrap(), 0.1).unwrap();
        let b = flow.point(&q, 0.3).unwrap();
        assert!(a.distance(&b) < 1e-8);
    }

    #[test]
    fn beltrami_at_zero_time_and_for_rotations() {
        let nu = DeformationTensor::invariant_family(InvariantFamilyParams::with_lambda(2.0).unwrap());
        let q = SpherePoint::from_torus_angles(0.7, 0.5, 1.5);
        let flow = FlowMap::of_hamiltonian(re_w1()).unwrap();
        assert_abs_diff_eq!(
            beltrami(&flow, &nu, &q, 0.0).unwrap().norm(),
            nu.abs(&q).unwrap(),
            epsilon = 1e-15
        );
        let rot = FlowMap::of_hamiltonian(ScalarField::constant(1.0)).unwrap();
        for s in [0.1, 0.5, 1.0] {
            let m = beltrami(&rot, &nu, &q, s).unwrap();
            assert_abs_diff_eq!(m.norm(), nu.abs(&q).unwrap(), epsilon = 1e-8);
            assert!(beltrami(&rot, &DeformationTensor::standard(), &q, s).unwrap().norm() < 1e-12);
        }
    }

    #[test]
    fn contact_defect_is_small() {
        let flow = FlowMap::of_hamiltonian(re_w1()).unwrap();
        let q = SpherePoint::from_torus_angles(0.5, 1.0, 0.2);
        assert!(contact_defect(&flow, &q, 0.5).unwrap() < 1e-9);
    }

    #[test]
    fn equivariance_of_invariant_hamiltonian() {
        // |w1|^2 is S1-invariant, so its flow commutes with the circle action
        let u = ScalarField::polynomial(&Poly::var(W1) * &Poly::var(crate::sphere::poly::W1BAR));
        let flow = FlowMap::of_hamiltonian(u).unwrap();
        let pts = [SpherePoint::from_torus_angles(0.3, 0.1, 0.2)];
        assert!(equivariance_defect(&flow, &pts, 0.3, &[0.5, 2.0]).unwrap() < 1e-10);
        let flow = FlowMap::of_hamiltonian(re_w1()).unwrap();
        assert!(equivariance_defect(&flow, &pts, 0.3, &[0.5, 2.0]).unwrap() > 1e-3);
    }
}
