use num_complex::Complex64;
use proptest::prelude::*;

use crlab::cr::DeformationTensor;
use crlab::dynamics::{beltrami, contact_defect, equivariance_defect, FlowMap};
use crlab::field::{frame_derivative, FrameVector, ScalarField};
use crlab::sphere::poly::{Poly, W1, W1BAR, W2BAR};
use crlab::sphere::{frame_at, SpherePoint};
use crlab::variation::richardson_abs_slope;

fn point() -> impl Strategy<Value = SpherePoint> {
    (0.05f64..1.52, 0.0f64..6.28, 0.0f64..6.28).prop_map(|(chi, a, b)| SpherePoint::from_torus_angles(chi, a, b))
}

/// `Re(w1² w̄2)`.
fn cubic() -> ScalarField {
    let w1 = Poly::var(W1);
    let p = &(&w1 * &w1) * &Poly::var(W2BAR);
    ScalarField::polynomial(p.real_part())
}

/// `|w1|²`, invariant under the circle action.
fn invariant() -> ScalarField {
    ScalarField::polynomial(&Poly::var(W1) * &Poly::var(W1BAR))
}

#[test]
fn second_frame_derivative_of_the_cubic() {
    // W0bar = w2 d/dw1bar - w1 d/dw2bar applied twice to (w1² w̄2 + w̄1² w2)/2 gives w2³.
    let q = SpherePoint::from_torus_angles(0.4, 1.1, -0.3);
    let d = frame_derivative(&cubic(), &[FrameVector::W0Bar, FrameVector::W0Bar], &q).unwrap();
    assert!((d - q.w2().powi(3)).norm() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn unit_hamiltonian_rotates_the_fibers(q in point(), s in -1.0f64..1.0) {
        let flow = FlowMap::of_hamiltonian(ScalarField::constant(1.0)).unwrap();
        let g = flow.point(&q, s).unwrap();
        let e = Complex64::from_polar(1.0, s);
        prop_assert!((g.w1() - e * q.w1()).norm() < 1e-10);
        prop_assert!((g.w2() - e * q.w2()).norm() < 1e-10);
    }

    #[test]
    fn contact_form_recovers_the_hamiltonian(q in point()) {
        let u = cubic();
        let flow = FlowMap::of_hamiltonian(u.clone()).unwrap();
        let v = flow.field().at(&q).unwrap();
        let eta = frame_at(&q).eta(&v.as_complex());
        prop_assert!((eta - u.value(&q).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn flows_compose_and_invert(q in point(), s in -0.5f64..0.5, t in -0.5f64..0.5) {
        let flow = FlowMap::of_hamiltonian(cubic()).unwrap();
        let two = flow.point(&flow.point(&q, s).unwrap(), t).unwrap();
        let one = flow.point(&q, s + t).unwrap();
        prop_assert!(two.distance(&one) < 1e-8);
        let back = flow.point(&flow.point(&q, s).unwrap(), -s).unwrap();
        prop_assert!(back.distance(&q) < 1e-8);
    }

    #[test]
    fn flows_preserve_the_contact_structure(q in point(), s in -1.0f64..1.0) {
        let flow = FlowMap::of_hamiltonian(cubic()).unwrap();
        prop_assert!(contact_defect(&flow, &q, s).unwrap() < 1e-6);
    }

    #[test]
    fn invariant_hamiltonians_give_equivariant_flows(q in point(), phi in 0.0f64..6.28) {
        let flow = FlowMap::of_hamiltonian(invariant()).unwrap();
        prop_assert!(equivariance_defect(&flow, &[q], 0.7, &[phi]).unwrap() < 1e-9);
    }

    #[test]
    fn standard_structure_dilates_linearly(q in point()) {
        // With nu = 0, |mu(s)| = |W0bar² u| |s| + O(s²), and |W0bar² u| = |w2|³ here.
        let flow = FlowMap::of_hamiltonian(cubic()).unwrap();
        let nu = DeformationTensor::standard();
        let slope = richardson_abs_slope(&flow, &nu, &q, 1e-3).unwrap();
        let want = q.w2().norm().powi(3);
        prop_assert!((slope - want).abs() < 1e-4 * want.max(1e-3), "{slope} vs {want}");
        prop_assert!(beltrami(&flow, &nu, &q, 0.0).unwrap().norm() < 1e-14);
    }
}
