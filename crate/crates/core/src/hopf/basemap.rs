use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use num_complex::Complex64;

use super::chart::{
    add3, angle_between, cross, norm3, normalize3, project_unit, scale3, unit_velocity_to_chart, Chart,
    RiemannSpherePoint, Vec3,
};
use super::curve::BaseCurve;
use super::lift::horizontal_lift;
use crate::dynamics::FlowMap;
use crate::error::{Error, Result};
use crate::sphere::{AmbientVector, SpherePoint};

/// A C¹ self-map of the base sphere, acting on unit vectors of `R³`.
pub trait BaseMap: Send + Sync {
    fn apply(&self, n: Vec3) -> Vec3;
    /// `DF_n(v)` for a tangent vector `v` at `n`.
    fn differential(&self, n: Vec3, v: Vec3) -> Vec3;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityMap;

impl BaseMap for IdentityMap {
    fn apply(&self, n: Vec3) -> Vec3 {
        n
    }

    fn differential(&self, _n: Vec3, v: Vec3) -> Vec3 {
        v
    }
}

/// Rotation by `alpha` about the polar axis, `z ↦ e^{iα} z`.
#[derive(Debug, Clone, Copy)]
pub struct AxisRotation {
    pub alpha: f64,
}

impl AxisRotation {
    fn rotate(&self, v: Vec3) -> Vec3 {
        let (s, c) = self.alpha.sin_cos();
        [c * v[0] - s * v[1], s * v[0] + c * v[1], v[2]]
    }

    /// The unitary `(w1, w2) ↦ (w1, e^{iα} w2)` covering this rotation.
    pub fn cover(&self, q: &SpherePoint) -> SpherePoint {
        SpherePoint::normalize(q.w1(), q.w2() * Complex64::from_polar(1.0, self.alpha)).expect("unitary image")
    }
}

impl BaseMap for AxisRotation {
    fn apply(&self, n: Vec3) -> Vec3 {
        self.rotate(n)
    }

    fn differential(&self, _n: Vec3, v: Vec3) -> Vec3 {
        self.rotate(v)
    }
}

/// Horizontal vector at `q` projecting to the base tangent vector `v`.
pub fn horizontal_lift_vector(q: &SpherePoint, v: Vec3) -> AmbientVector {
    let n = project_unit(q);
    let (w1, w2) = (q.w1(), q.w2());
    // c W0 + conj(c) W0bar has dz = -c / w1^2 and dzeta = c / w2^2
    let c = if w1.norm() >= w2.norm() {
        -w1 * w1 * unit_velocity_to_chart(Chart::South, n, v)
    } else {
        w2 * w2 * unit_velocity_to_chart(Chart::North, n, v)
    };
    AmbientVector::new(c * w2.conj(), -c * w1.conj())
}

/// The base map induced by an S¹-equivariant flow map `g_s`.
pub struct FlowQuotient {
    pub flow: FlowMap,
    pub s: f64,
}

impl FlowQuotient {
    fn image(&self, n: Vec3) -> Result<(SpherePoint, crate::dynamics::FlowImage)> {
        let q = super::chart::section(&RiemannSpherePoint::from_unit(n));
        Ok((q, self.flow.evaluate(&q, self.s)?))
    }
}

impl BaseMap for FlowQuotient {
    fn apply(&self, n: Vec3) -> Vec3 {
        let q = super::chart::section(&RiemannSpherePoint::from_unit(n));
        match self.flow.point(&q, self.s) {
            Ok(p) => project_unit(&p),
            Err(_) => [f64::NAN; 3],
        }
    }

    fn differential(&self, n: Vec3, v: Vec3) -> Vec3 {
        let Ok((q, image)) = self.image(n) else {
            return [f64::NAN; 3];
        };
        let lifted = horizontal_lift_vector(&q, v).as_complex();
        let pushed = image.push(&lifted);
        // Dp in R^3 coordinates by differentiating p along the pushed vector
        let p = image.point;
        let (w1, w2) = (p.w1(), p.w2());
        let (a1, a2) = (pushed.dw1(), pushed.dw2());
        let dm = a1.conj() * w2 + w1.conj() * a2;
        [2.0 * dm.re, 2.0 * dm.im, 2.0 * ((w1.conj() * a1).re - (w2.conj() * a2).re)]
    }
}

/// The lift `f` of a base map `F` through the Hopf fibration, normalized by
/// `f(anchor) = anchor_image`.
///
/// `f(q)` lifts `F` applied to a great-circle path from `p(anchor)` to `p(q)`
/// followed by a circular loop at `p(q)` whose `ω0/2`-area corrects the fiber
/// position to hit `q` exactly.
pub struct EquivariantLift<F: BaseMap> {
    map: Arc<F>,
    anchor: SpherePoint,
    anchor_image: SpherePoint,
    steps: usize,
}

/// Builds the lift of `map` anchored at `(anchor, anchor_image)`.
pub fn lift_base_map<F: BaseMap + 'static>(
    map: F,
    anchor: SpherePoint,
    anchor_image: SpherePoint,
    steps: usize,
) -> Result<EquivariantLift<F>> {
    let target = map.apply(project_unit(&anchor));
    let gap = angle_between(target, project_unit(&anchor_image));
    if !(gap < 1e-9) {
        return Err(Error::PathConstruction(format!(
            "anchor image is not over F(p(anchor)) (gap {gap:e})"
        )));
    }
    Ok(EquivariantLift {
        map: Arc::new(map),
        anchor,
        anchor_image,
        steps,
    })
}

fn some_perpendicular(b: Vec3) -> Vec3 {
    let axis = if b[2].abs() < 0.9 { [0.0, 0.0, 1.0] } else { [1.0, 0.0, 0.0] };
    normalize3(cross(axis, b))
}

/// A loop at `b` whose horizontal lift advances the fiber angle by `beta` (mod 2π).
pub fn phase_loop(b: Vec3, beta: f64) -> Result<Option<BaseCurve>> {
    // lifts of positively oriented loops turn by minus the enclosed area
    let area = (-beta).rem_euclid(TAU);
    if area < 1e-13 || TAU - area < 1e-13 {
        return Ok(None);
    }
    let (cap, positive) = if area <= PI { (area, true) } else { (TAU - area, false) };
    let cos_alpha = 1.0 - cap / PI;
    let alpha = cos_alpha.clamp(-1.0, 1.0).acos();
    let center = add3(scale3(alpha.cos(), b), scale3(alpha.sin(), some_perpendicular(b)));
    Ok(Some(BaseCurve::cap_loop(normalize3(center), b, positive)?))
}

impl<F: BaseMap + 'static> EquivariantLift<F> {
    fn base_path(&self, to: Vec3, via: Option<Vec3>) -> Result<BaseCurve> {
        let from = project_unit(&self.anchor);
        match via {
            Some(w) => BaseCurve::broken_great_circle(from, w, to),
            None => {
                if angle_between(from, to) > PI - 1e-6 {
                    BaseCurve::broken_great_circle(from, some_perpendicular(from), to)
                } else {
                    BaseCurve::great_circle(from, to)
                }
            }
        }
    }

    fn mapped(&self, c: &BaseCurve) -> BaseCurve {
        let m = self.map.clone();
        c.mapped(Arc::new(move |n, v| (m.apply(n), m.differential(n, v))))
    }

    /// `f(q)` along the default path.
    pub fn apply(&self, q: &SpherePoint) -> Result<SpherePoint> {
        self.apply_via(q, None)
    }

    /// `f(q)` along the path through the waypoint `via`.
    pub fn apply_via(&self, q: &SpherePoint, via: Option<Vec3>) -> Result<SpherePoint> {
        let to = project_unit(q);
        let path = self.base_path(to, via)?;
        let e = horizontal_lift(&path, &self.anchor, self.steps)?.end();
        let beta = e.hermitian(q).arg();
        let full = match phase_loop(to, beta)? {
            Some(l) => path.then(&l),
            None => path,
        };
        Ok(horizontal_lift(&self.mapped(&full), &self.anchor_image, 2 * self.steps)?.end())
    }

    /// Distance between `f(q)` computed along the default path and along a
    /// path bent through a waypoint off the great circle.
    pub fn path_independence_defect(&self, q: &SpherePoint) -> Result<f64> {
        let a = project_unit(&self.anchor);
        let b = project_unit(q);
        let mid = add3(a, b);
        let bend = if norm3(mid) > 1e-6 && norm3(cross(a, b)) > 1e-6 {
            normalize3(add3(normalize3(mid), scale3(0.8, normalize3(cross(a, b)))))
        } else {
            some_perpendicular(a)
        };
        let direct = self.apply(q)?;
        let bent = self.apply_via(q, Some(bend))?;
        Ok(direct.distance(&bent))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::ScalarField;
    use crate::sphere::frame_at;
    use approx::assert_abs_diff_eq;

    #[test]
    fn horizontal_vectors_are_horizontal_and_project_correctly() {
        let q = SpherePoint::from_torus_angles(0.6, 0.3, -1.0);
        let n = project_unit(&q);
        let v = normalize3(cross(n, [0.3, 0.1, 0.7]));
        let h = horizontal_lift_vector(&q, v);
        let f = frame_at(&q);
        assert!(f.eta(&h.as_complex()).norm() < 1e-14);
        // first-order check of the projection
        let eps = 1e-7;
        let x = q.to_real();
        let d = h.to_real();
        let moved = SpherePoint::from_real(std::array::from_fn(|k| x[k] + eps * d[k])).unwrap();
        let pm = project_unit(&moved);
        for k in 0..3 {
            assert!(((pm[k] - n[k]) / eps - v[k]).abs() < 1e-5);
        }
    }

    #[test]
    fn phase_loop_turns_the_fiber() {
        let q = SpherePoint::from_torus_angles(0.5, 0.2, 0.9);
        let b = project_unit(&q);
        for beta in [0.7, -2.5, 3.0] {
            let l = phase_loop(b, beta).unwrap().unwrap();
            let lift = horizontal_lift(&l, &q, 4000).unwrap();
            assert!(lift.end().distance(&q.rotate(beta)) < 1e-9);
        }
        assert!(phase_loop(b, 0.0).unwrap().is_none());
    }

    #[test]
    fn identity_lift_is_identity() {
        let anchor = SpherePoint::from_torus_angles(0.4, 0.1, 0.3);
        let f = lift_base_map(IdentityMap, anchor, anchor, 1000).unwrap();
        let q = SpherePoint::from_torus_angles(1.1, -0.7, 2.2);
        let d = f.apply(&q).unwrap().distance(&q);
        assert!(d < 1e-8, "{d}");
    }

    #[test]
    fn rotation_lift_matches_cover() {
        let rot = AxisRotation { alpha: 0.9 };
        let anchor = SpherePoint::from_torus_angles(0.4, 0.1, 0.3);
        let f = lift_base_map(rot, anchor, rot.cover(&anchor), 1000).unwrap();
        let q = SpherePoint::from_torus_angles(0.8, 1.7, -0.4);
        assert!(f.apply(&q).unwrap().distance(&rot.cover(&q)) < 1e-8);
    }

    #[test]
    fn anchor_image_must_lie_over_image() {
        let anchor = SpherePoint::from_torus_angles(0.4, 0.1, 0.3);
        let other = SpherePoint::from_torus_angles(0.9, 0.1, 0.3);
        assert!(lift_base_map(IdentityMap, anchor, other, 100).is_err());
    }

    #[test]
    fn flow_quotient_of_rotation_flow_is_identity() {
        let flow = FlowMap::of_hamiltonian(ScalarField::constant(1.0)).unwrap();
        let fq = FlowQuotient { flow, s: 0.4 };
        let n = normalize3([0.2, -0.5, 0.6]);
        let m = fq.apply(n);
        for k in 0..3 {
            assert_abs_diff_eq!(m[k], n[k], epsilon = 1e-10);
        }
        let v = normalize3(cross(n, [1.0, 0.0, 0.0]));
        let dv = fq.differential(n, v);
        for k in 0..3 {
            assert_abs_diff_eq!(dv[k], v[k], epsilon = 1e-9);
        }
    }
}
