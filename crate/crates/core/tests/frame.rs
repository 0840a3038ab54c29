use approx::assert_abs_diff_eq;
use num_complex::Complex64;
use proptest::prelude::*;

use crlab::hopf::{fiber_contraction, structure_equation_residual};
use crlab::sphere::{frame_at, frame_bracket_identities, orientation_check, AmbientVector, SpherePoint};

fn point() -> impl Strategy<Value = SpherePoint> {
    prop::array::uniform4(-1.0f64..1.0)
        .prop_filter("away from the origin", |x| x.iter().map(|v| v * v).sum::<f64>() > 1e-2)
        .prop_map(|x| SpherePoint::from_real(x.map(|v| v / x.iter().map(|v| v * v).sum::<f64>().sqrt())).unwrap())
}

/// `η(v) = −Im(w1 v̄1 + w2 v̄2)` for a real tangent vector with complex components `(v1, v2)`.
fn eta(q: &SpherePoint, v: &AmbientVector) -> f64 {
    let [x1, y1, x2, y2] = v.to_real();
    let (v1, v2) = (Complex64::new(x1, y1), Complex64::new(x2, y2));
    -(q.w1() * v1.conj() + q.w2() * v2.conj()).im
}

#[test]
fn every_bracket_identity_is_exact() {
    for (name, holds) in frame_bracket_identities() {
        assert!(holds, "{name}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn real_frame_matches_its_complex_components(q in point()) {
        let f = frame_at(&q);
        let (w1, w2) = (q.w1(), q.w2());
        let x = [w2.conj(), -w1.conj()];
        let y = [Complex64::i() * w2.conj(), -Complex64::i() * w1.conj()];
        let t = [Complex64::i() * w1, Complex64::i() * w2];
        for (v, c) in [(f.x(), x), (f.y(), y), (f.t_real(), t)] {
            let r = v.to_real();
            prop_assert!((Complex64::new(r[0], r[1]) - c[0]).norm() < 1e-14);
            prop_assert!((Complex64::new(r[2], r[3]) - c[1]).norm() < 1e-14);
        }
    }

    #[test]
    fn contact_form_kills_the_horizontal_frame(q in point()) {
        let f = frame_at(&q);
        prop_assert!(eta(&q, &f.x()).abs() < 1e-14);
        prop_assert!(eta(&q, &f.y()).abs() < 1e-14);
        prop_assert!((eta(&q, &f.t_real()) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn duality_is_kronecker(q in point()) {
        let m = frame_at(&q).duality_matrix();
        let expected = [[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]];
        for (row, want) in m.iter().zip(expected) {
            for (v, w) in row.iter().zip(want) {
                prop_assert!((v - w).norm() < 1e-12, "{m:?}");
            }
        }
    }

    #[test]
    fn levi_pairing_is_positive(q in point()) {
        assert_abs_diff_eq!(orientation_check(&q), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn structure_equation_holds(q in point()) {
        prop_assert!(structure_equation_residual(&q).unwrap() < 1e-9);
        prop_assert!(fiber_contraction(&q) < 1e-12);
    }
}
