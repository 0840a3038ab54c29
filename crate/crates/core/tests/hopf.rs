use std::f64::consts::PI;

use proptest::prelude::*;

use crlab::hopf::{
    horizontal_lift, project, project_unit, section, wrap_angle, BaseCurve, RiemannSpherePoint, Vec3,
};
use crlab::sphere::SpherePoint;

fn unit(theta: f64, phi: f64) -> Vec3 {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

fn point() -> impl Strategy<Value = SpherePoint> {
    (0.0f64..1.5707, 0.0f64..6.28, 0.0f64..6.28).prop_map(|(chi, a, b)| SpherePoint::from_torus_angles(chi, a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn projection_is_constant_on_fibers(q in point(), phi in 0.0f64..6.28) {
        let a = project_unit(&q);
        let b = project_unit(&q.rotate(phi));
        prop_assert!(a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12));
    }

    #[test]
    fn section_is_a_right_inverse(theta in 0.01f64..3.13, phi in 0.0f64..6.28) {
        let p = RiemannSpherePoint::from_unit(unit(theta, phi));
        prop_assert!(project(&section(&p)).distance(&p) < 1e-12);
    }

    #[test]
    fn cap_phase_is_minus_half_the_area(
        theta in 0.2f64..2.9, phi in 0.0f64..6.28, alpha in 0.1f64..2.5, start in 0.0f64..6.28,
    ) {
        // The cap of angular radius alpha has round area 2π(1 − cos α).
        let center = unit(theta, phi);
        let (e, _) = crlab::hopf::polar_frame(center);
        let through: Vec3 = std::array::from_fn(|i| alpha.cos() * center[i] + alpha.sin() * e[i]);
        let curve = BaseCurve::cap_loop(center, through, true).unwrap();
        let q0 = section(&RiemannSpherePoint::from_unit(through)).rotate(start);
        let lift = horizontal_lift(&curve, &q0, 4000).unwrap();
        let half_area = PI * (1.0 - alpha.cos());
        prop_assert!(wrap_angle(lift.phase + half_area).abs() < 1e-6, "{} vs {}", lift.phase, half_area);
        prop_assert!(lift.legendrian_defect < 1e-8);
        prop_assert!(lift.end().distance(&q0.rotate(lift.phase)) < 1e-8);
    }
}
