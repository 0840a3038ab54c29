//! Scalar functions on the 3-sphere and their iterated frame derivatives.
//!
//! Every field is evaluated through its degree-zero homogeneous extension
//! `u(w / |w|)`, expanded as a [`Jet3`] around the base point. Frame
//! derivatives apply the polynomial coefficients of `W0`, `W0bar` and `T` to
//! that jet exactly, so words up to length three never nest numerical
//! differentiation.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::jet::{monomial_exponents, taylor_powf, taylor_sqrt, Jet3, Series1, N_MONOMIALS};
use crate::sphere::poly::{Poly, PolyVectorField};
use crate::sphere::SpherePoint;

/// Radial profiles are rejected closer than this to `w1 = 0` unless locally constant.
pub const RADIAL_SINGULAR_RADIUS: f64 = 0.05;

/// Default step for finite-difference jets.
pub const DEFAULT_FD_STEP: f64 = 1e-2;

/// One of the frame fields `W0`, `W0bar`, `T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FrameVector {
    W0,
    W0Bar,
    T,
}

impl FrameVector {
    pub fn field(self) -> PolyVectorField {
        match self {
            FrameVector::W0 => PolyVectorField::w0(),
            FrameVector::W0Bar => PolyVectorField::w0bar(),
            FrameVector::T => PolyVectorField::t(),
        }
    }
}

/// Which extension off the sphere a polynomial uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Extension {
    /// `u(w / |w|)`.
    #[default]
    Homogeneous,
    /// The polynomial itself, unnormalized.
    Raw,
}

/// A function of `r = |w1|` given by its Taylor series at each `r`.
#[derive(Clone)]
pub struct RadialProfile {
    name: String,
    profile: Arc<dyn Fn(f64) -> Series1 + Send + Sync>,
}

impl RadialProfile {
    pub fn new(name: impl Into<String>, profile: impl Fn(f64) -> Series1 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            profile: Arc::new(profile),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn series(&self, r: f64) -> Series1 {
        (self.profile)(r)
    }
}

/// `(w1 / w1bar)^p1 (w2 / w2bar)^p2`, a unit-modulus angular factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AngularMonomial {
    pub p1: i32,
    pub p2: i32,
}

/// A pointwise evaluator differentiated by finite differences.
#[derive(Clone)]
pub struct FdField {
    eval: Arc<dyn Fn(&SpherePoint) -> Complex64 + Send + Sync>,
    pub step: f64,
    pub max_order: usize,
}

impl FdField {
    pub fn new(eval: impl Fn(&SpherePoint) -> Complex64 + Send + Sync + 'static, step: f64) -> Self {
        Self {
            eval: Arc::new(eval),
            step,
            max_order: 3,
        }
    }

    pub fn eval(&self, q: &SpherePoint) -> Complex64 {
        (self.eval)(q)
    }
}

/// A complex-valued function on the 3-sphere.
#[derive(Clone)]
pub enum ScalarField {
    Constant(Complex64),
    Polynomial(Poly),
    Radial(RadialProfile),
    Angular(AngularMonomial),
    Sum(Vec<ScalarField>),
    Product(Box<ScalarField>, Box<ScalarField>),
    Quotient(Box<ScalarField>, Box<ScalarField>),
    Scaled(Complex64, Box<ScalarField>),
    FiniteDifference(FdField),
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarField::Constant(c) => write!(f, "Constant({c})"),
            ScalarField::Polynomial(p) => write!(f, "Polynomial({p})"),
            ScalarField::Radial(r) => write!(f, "Radial({})", r.name),
            ScalarField::Angular(a) => write!(f, "Angular({}, {})", a.p1, a.p2),
            ScalarField::Sum(v) => f.debug_tuple("Sum").field(v).finish(),
            ScalarField::Product(a, b) => f.debug_tuple("Product").field(a).field(b).finish(),
            ScalarField::Quotient(a, b) => f.debug_tuple("Quotient").field(a).field(b).finish(),
            ScalarField::Scaled(c, a) => f.debug_tuple("Scaled").field(c).field(a).finish(),
            ScalarField::FiniteDifference(d) => write!(f, "FiniteDifference(h = {})", d.step),
        }
    }
}

/// Coordinate jets at a base point: raw `(w1, w2, w1bar, w2bar)` and their
/// normalized counterparts `w / |w|`.
pub struct PointJets {
    base: [f64; 4],
    order: usize,
    raw: [Jet3; 4],
    unit: [Jet3; 4],
}

impl PointJets {
    pub fn new(base: [f64; 4], order: usize) -> Self {
        let x: [Jet3; 4] = std::array::from_fn(|k| Jet3::coordinate(base[k], k, order));
        let s = x.iter().fold(Jet3::zero(order), |acc, xk| acc + *xk * *xk);
        let inv = s.compose_real(&taylor_powf(s.value().re, -0.5));
        let n: [Jet3; 4] = std::array::from_fn(|k| x[k] * inv);
        let i = Complex64::i();
        let pair = |c: &[Jet3; 4]| -> [Jet3; 4] {
            let w1 = c[0] + c[1].scale(i);
            let w2 = c[2] + c[3].scale(i);
            [w1, w2, w1.conj(), w2.conj()]
        };
        Self {
            base,
            order,
            raw: pair(&x),
            unit: pair(&n),
        }
    }

    pub fn at(q: &SpherePoint, order: usize) -> Self {
        Self::new(q.to_real(), order)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn base(&self) -> [f64; 4] {
        self.base
    }

    /// Normalized Wirtinger coordinate jets.
    pub fn unit(&self) -> &[Jet3; 4] {
        &self.unit
    }

    /// Raw Wirtinger coordinate jets.
    pub fn raw(&self) -> &[Jet3; 4] {
        &self.raw
    }

    /// Coefficients of a polynomial vector field along `(d/dx1, d/dy1, d/dx2, d/dy2)`.
    pub fn real_coefficients(&self, v: &PolyVectorField) -> [Jet3; 4] {
        let order = self.order;
        let a: [Jet3; 4] = std::array::from_fn(|k| {
            v.coeffs[k].eval_with(&self.raw, |c| Jet3::constant(c, order))
        });
        let ih = Complex64::new(0.0, 0.5);
        [
            (a[0] + a[2]).scale(Complex64::new(0.5, 0.0)),
            (a[2] - a[0]).scale(ih),
            (a[1] + a[3]).scale(Complex64::new(0.5, 0.0)),
            (a[3] - a[1]).scale(ih),
        ]
    }
}

/// Applies a vector field, given by its real-coordinate coefficient jets, to a jet.
pub fn apply_vector_field(jet: &Jet3, coeffs: &[Jet3; 4]) -> Jet3 {
    let mut out = Jet3::zero(jet.order().saturating_sub(1));
    for (k, c) in coeffs.iter().enumerate() {
        out = out + *c * jet.derivative(k);
    }
    out
}

impl ScalarField {
    pub fn constant(c: f64) -> Self {
        ScalarField::Constant(Complex64::new(c, 0.0))
    }

    pub fn polynomial(p: Poly) -> Self {
        ScalarField::Polynomial(p)
    }

    pub fn radial(profile: RadialProfile) -> Self {
        ScalarField::Radial(profile)
    }

    pub fn angular(p1: i32, p2: i32) -> Self {
        ScalarField::Angular(AngularMonomial { p1, p2 })
    }

    pub fn product(a: ScalarField, b: ScalarField) -> Self {
        ScalarField::Product(Box::new(a), Box::new(b))
    }

    pub fn quotient(a: ScalarField, b: ScalarField) -> Self {
        ScalarField::Quotient(Box::new(a), Box::new(b))
    }

    pub fn scaled(c: Complex64, a: ScalarField) -> Self {
        ScalarField::Scaled(c, Box::new(a))
    }

    pub fn sum(terms: Vec<ScalarField>) -> Self {
        ScalarField::Sum(terms)
    }

    /// Value at a point of the sphere.
    pub fn value(&self, q: &SpherePoint) -> Result<Complex64> {
        Ok(self.jet(q, 0)?.value())
    }

    /// Jet of the homogeneous extension at `q`.
    pub fn jet(&self, q: &SpherePoint, order: usize) -> Result<Jet3> {
        self.eval_jet(&PointJets::at(q, order), Extension::Homogeneous)
    }

    /// Jet with an explicit choice of extension for polynomial pieces.
    pub fn jet_with_extension(&self, q: &SpherePoint, order: usize, ext: Extension) -> Result<Jet3> {
        self.eval_jet(&PointJets::at(q, order), ext)
    }

    /// Jet at an arbitrary nonzero ambient point.
    pub fn jet_at(&self, base: [f64; 4], order: usize) -> Result<Jet3> {
        self.eval_jet(&PointJets::new(base, order), Extension::Homogeneous)
    }

    pub fn eval_jet(&self, pj: &PointJets, ext: Extension) -> Result<Jet3> {
        let order = pj.order;
        match self {
            ScalarField::Constant(c) => Ok(Jet3::constant(*c, order)),
            ScalarField::Polynomial(p) => {
                let vars = match ext {
                    Extension::Homogeneous => &pj.unit,
                    Extension::Raw => &pj.raw,
                };
                Ok(p.eval_with(vars, |c| Jet3::constant(c, order)))
            }
            ScalarField::Radial(profile) => {
                let r2 = (pj.unit[0] * pj.unit[2]).re();
                let r = r2.value().re.max(0.0).sqrt();
                let series = profile.series(r);
                if series.is_constant() {
                    return Ok(Jet3::constant(Complex64::new(series.value(), 0.0), order));
                }
                if r < RADIAL_SINGULAR_RADIUS {
                    return Err(Error::Singularity {
                        field: profile.name.clone(),
                        r,
                    });
                }
                let rj = r2.compose_real(&taylor_sqrt(r2.value().re));
                Ok(rj.compose_real(&series.c))
            }
            ScalarField::Angular(m) => {
                let mut acc = Jet3::constant(Complex64::new(1.0, 0.0), order);
                for (p, (w, wb)) in [(m.p1, (0, 2)), (m.p2, (1, 3))] {
                    if p == 0 {
                        continue;
                    }
                    let (w, wb) = (pj.unit[w], pj.unit[wb]);
                    if w.value().norm() < 1e-300 {
                        return Err(Error::Singularity {
                            field: format!("angular monomial ({}, {})", m.p1, m.p2),
                            r: w.value().norm(),
                        });
                    }
                    let mut phase = w * wb.recip();
                    if p < 0 {
                        phase = phase.conj();
                    }
                    for _ in 0..p.unsigned_abs() {
                        acc = acc * phase;
                    }
                }
                Ok(acc)
            }
            ScalarField::Sum(terms) => terms
                .iter()
                .try_fold(Jet3::zero(order), |acc, t| Ok(acc + t.eval_jet(pj, ext)?)),
            ScalarField::Product(a, b) => {
                let ja = a.eval_jet(pj, ext)?;
                if ja.is_zero() {
                    return Ok(Jet3::zero(order));
                }
                Ok(ja * b.eval_jet(pj, ext)?)
            }
            ScalarField::Quotient(a, b) => {
                let ja = a.eval_jet(pj, ext)?;
                if ja.is_zero() {
                    return Ok(Jet3::zero(order));
                }
                let jb = b.eval_jet(pj, ext)?;
                if jb.value().norm() == 0.0 {
                    return Err(Error::Domain("quotient by a vanishing field".into()));
                }
                Ok(ja * jb.recip())
            }
            ScalarField::Scaled(c, a) => Ok(a.eval_jet(pj, ext)?.scale(*c)),
            ScalarField::FiniteDifference(fd) => {
                if order > fd.max_order {
                    return Err(Error::Capability {
                        needed: order,
                        available: fd.max_order,
                    });
                }
                fd_jet(|q| fd.eval(q), pj.base, fd.step).map(|j| j.with_order(order))
            }
        }
    }
}

/// Iterated frame derivative of `u` at `q`.
///
/// The word is read as an operator product: `[W0, W0Bar]` is `W0(W0bar u)`,
/// the rightmost field acting first.
pub fn frame_derivative(u: &ScalarField, word: &[FrameVector], q: &SpherePoint) -> Result<Complex64> {
    Ok(frame_derivatives(u, &[word], q)?[0])
}

/// Several frame derivatives sharing one jet evaluation.
pub fn frame_derivatives(
    u: &ScalarField,
    words: &[&[FrameVector]],
    q: &SpherePoint,
) -> Result<Vec<Complex64>> {
    let order = words.iter().map(|w| w.len()).max().unwrap_or(0);
    if order > 3 {
        return Err(Error::UnsupportedOrder(order));
    }
    let pj = PointJets::at(q, order);
    let jet = u.eval_jet(&pj, Extension::Homogeneous)?;
    Ok(apply_words(&pj, &jet, words))
}

/// Applies frame words to an already-computed jet.
pub fn apply_words(pj: &PointJets, jet: &Jet3, words: &[&[FrameVector]]) -> Vec<Complex64> {
    let coeffs: HashMap<FrameVector, [Jet3; 4]> = [FrameVector::W0, FrameVector::W0Bar, FrameVector::T]
        .into_iter()
        .map(|f| (f, pj.real_coefficients(&f.field())))
        .collect();
    words
        .iter()
        .map(|word| {
            let mut j = *jet;
            for f in word.iter().rev() {
                j = apply_vector_field(&j, &coeffs[f]);
            }
            j.value()
        })
        .collect()
}

/// `(W0 W0bar + W0bar W0) u` at `q`.
pub fn laplacian(u: &ScalarField, q: &SpherePoint) -> Result<Complex64> {
    use FrameVector::*;
    let d = frame_derivatives(u, &[&[W0, W0Bar], &[W0Bar, W0]], q)?;
    Ok(d[0] + d[1])
}

fn stencil(order: u8) -> (&'static [i8], &'static [f64], f64) {
    match order {
        0 => (&[0], &[1.0], 1.0),
        1 => (&[-2, -1, 1, 2], &[1.0, -8.0, 8.0, -1.0], 12.0),
        2 => (&[-2, -1, 0, 1, 2], &[-1.0, 16.0, -30.0, 16.0, -1.0], 12.0),
        _ => (&[-3, -2, -1, 1, 2, 3], &[1.0, -8.0, 13.0, -13.0, 8.0, -1.0], 8.0),
    }
}

/// Fourth-order central finite-difference jet of the homogeneous extension of
/// a pointwise evaluator, up to order three.
pub fn fd_jet(eval: impl Fn(&SpherePoint) -> Complex64, base: [f64; 4], h: f64) -> Result<Jet3> {
    if !(h > 0.0 && h < 0.1) {
        return Err(Error::StepRange(h));
    }
    let mut cache: HashMap<[i8; 4], Complex64> = HashMap::new();
    let mut sample = |o: [i8; 4]| -> Result<Complex64> {
        if let Some(v) = cache.get(&o) {
            return Ok(*v);
        }
        let x: [f64; 4] = std::array::from_fn(|k| base[k] + h * o[k] as f64);
        let v = eval(&SpherePoint::from_real(x)?);
        cache.insert(o, v);
        Ok(v)
    };
    let mut coeffs = [Complex64::new(0.0, 0.0); N_MONOMIALS];
    for (i, c) in coeffs.iter_mut().enumerate() {
        let e = monomial_exponents(i);
        let st = e.map(stencil);
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, wa) in st[0].0.iter().zip(st[0].1) {
            for (b, wb) in st[1].0.iter().zip(st[1].1) {
                for (cc, wc) in st[2].0.iter().zip(st[2].1) {
                    for (d, wd) in st[3].0.iter().zip(st[3].1) {
                        acc += sample([*a, *b, *cc, *d])? * (wa * wb * wc * wd);
                    }
                }
            }
        }
        let mut scale = 1.0;
        for k in 0..4 {
            scale *= st[k].2 * h.powi(e[k] as i32) * (1..=e[k] as u32).product::<u32>() as f64;
        }
        *c = acc / scale;
    }
    Ok(Jet3::from_coefficients(coeffs, 3))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::poly::{GaussRational, W1, W1BAR, W2, W2BAR};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use FrameVector::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn re_w1() -> ScalarField {
        ScalarField::polynomial(Poly::var(W1).real_part())
    }

    fn re_w1sq_w2bar() -> ScalarField {
        let p = &(&Poly::var(W1) * &Poly::var(W1)) * &Poly::var(W2BAR);
        ScalarField::polynomial(p.real_part())
    }

    fn abs_w1_sq() -> ScalarField {
        ScalarField::polynomial(&Poly::var(W1) * &Poly::var(W1BAR))
    }

    #[test]
    fn w0_of_re_w1_on_diagonal() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let q = SpherePoint::new(c(h, 0.0), c(h, 0.0)).unwrap();
        let v = frame_derivative(&re_w1(), &[W0], &q).unwrap();
        assert_abs_diff_eq!(v.re, 1.0 / (2.0 * 2f64.sqrt()), epsilon = 1e-14);
        assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn t_of_re_w1_at_i() {
        let q = SpherePoint::new(c(0.0, 1.0), c(0.0, 0.0)).unwrap();
        let v = frame_derivative(&re_w1(), &[T], &q).unwrap();
        assert_abs_diff_eq!(v.re, -1.0, epsilon = 1e-14);
    }

    #[test]
    fn constants_have_vanishing_derivatives() {
        let u = ScalarField::constant(2.5);
        let q = SpherePoint::clifford(0.3, 1.1);
        for word in [&[W0][..], &[T, W0Bar], &[W0, W0Bar, T]] {
            assert_eq!(frame_derivative(&u, word, &q).unwrap(), c(0.0, 0.0));
        }
        assert_eq!(laplacian(&u, &q).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn long_words_are_rejected() {
        let q = SpherePoint::clifford(0.0, 0.0);
        let err = frame_derivative(&re_w1(), &[W0, W0, W0, W0], &q).unwrap_err();
        assert_eq!(err, Error::UnsupportedOrder(4));
    }

    #[test]
    fn commutator_identity_on_scalars() {
        let u = re_w1sq_w2bar();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let q = SpherePoint::random(&mut rng);
            let d = frame_derivatives(&u, &[&[W0, W0Bar], &[W0Bar, W0], &[T]], &q).unwrap();
            let lhs = d[0] - d[1];
            let rhs = -Complex64::i() * d[2];
            assert!((lhs - rhs).norm() < 1e-10);
        }
    }

    #[test]
    fn extension_independence_for_polynomials() {
        let u = re_w1sq_w2bar();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let words: [&[FrameVector]; 5] = [&[W0], &[W0Bar, W0Bar], &[W0, W0Bar, W0Bar], &[T, W0Bar, W0Bar], &[W0Bar, W0Bar, W0Bar]];
        for _ in 0..20 {
            let q = SpherePoint::random(&mut rng);
            for (ext_a, ext_b) in [(Extension::Homogeneous, Extension::Raw)] {
                let pa = PointJets::at(&q, 3);
                let ja = u.eval_jet(&pa, ext_a).unwrap();
                let jb = u.eval_jet(&pa, ext_b).unwrap();
                let da = apply_words(&pa, &ja, &words);
                let db = apply_words(&pa, &jb, &words);
                for (x, y) in da.iter().zip(&db) {
                    assert!((x - y).norm() < 1e-10, "{x} vs {y}");
                }
            }
        }
    }

    #[test]
    fn leibniz_rule_on_products() {
        let a = re_w1sq_w2bar();
        let b = abs_w1_sq();
        let ab = ScalarField::product(a.clone(), b.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let q = SpherePoint::random(&mut rng);
            for f in [W0, W0Bar, T] {
                let lhs = frame_derivative(&ab, &[f], &q).unwrap();
                let rhs = frame_derivative(&a, &[f], &q).unwrap() * b.value(&q).unwrap()
                    + a.value(&q).unwrap() * frame_derivative(&b, &[f], &q).unwrap();
                assert!((lhs - rhs).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn laplacian_of_real_field_is_real() {
        let u = re_w1sq_w2bar();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let q = SpherePoint::random(&mut rng);
            assert_abs_diff_eq!(laplacian(&u, &q).unwrap().im, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn angular_monomial_has_unit_modulus() {
        let u = ScalarField::angular(1, 1);
        let q = SpherePoint::from_torus_angles(0.4, 0.7, -1.2);
        let v = u.value(&q).unwrap();
        assert_abs_diff_eq!(v.norm(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(v.arg(), 2.0 * (0.7 - 1.2), epsilon = 1e-14);
    }

    #[test]
    fn angular_conjugate_power() {
        let q = SpherePoint::from_torus_angles(0.9, 0.4, 0.1);
        let a = ScalarField::angular(-1, 2).value(&q).unwrap();
        assert_abs_diff_eq!(a.arg(), 2.0 * (-0.4 + 0.2), epsilon = 1e-14);
    }

    #[test]
    fn radial_profile_singularity_is_reported() {
        let u = ScalarField::radial(RadialProfile::new("r", Series1::variable));
        let q = SpherePoint::from_torus_angles(1.55, 0.0, 0.0);
        assert!(matches!(u.jet(&q, 2), Err(Error::Singularity { .. })));
        let flat = ScalarField::radial(RadialProfile::new("flat", |_| Series1::constant(1.0)));
        assert_eq!(flat.value(&q).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn radial_profile_matches_polynomial() {
        // r^2 = |w1|^2 through the profile route and the polynomial route
        let prof = ScalarField::radial(RadialProfile::new("r^2", |r| {
            let s = Series1::variable(r);
            s * s
        }));
        let poly = abs_w1_sq();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..20 {
            let q = SpherePoint::random(&mut rng);
            if q.w1().norm() < 0.1 {
                continue;
            }
            let a = prof.jet(&q, 3).unwrap();
            let b = poly.jet(&q, 3).unwrap();
            for (x, y) in a.coefficients().iter().zip(b.coefficients()) {
                assert!((x - y).norm() < 1e-11);
            }
        }
    }

    #[test]
    fn fd_jet_step_range() {
        let q = [1.0, 0.0, 0.0, 0.0];
        assert_eq!(fd_jet(|_| c(1.0, 0.0), q, 0.2).unwrap_err(), Error::StepRange(0.2));
        assert!(fd_jet(|_| c(1.0, 0.0), q, 0.0).is_err());
    }

    #[test]
    fn fd_jet_of_constant_vanishes() {
        let j = fd_jet(|_| c(3.0, 0.0), SpherePoint::clifford(0.2, 0.4).to_real(), 1e-2).unwrap();
        assert_abs_diff_eq!(j.value().re, 3.0, epsilon = 1e-14);
        for k in 1..N_MONOMIALS {
            assert!(j.coefficients()[k].norm() < 1e-8);
        }
    }

    #[test]
    fn fd_jet_first_partials_of_re_w1() {
        let q = SpherePoint::from_torus_angles(0.5, 0.3, -0.8);
        let p = Poly::var(W1).real_part();
        let fd = fd_jet(|x| p.eval(x), q.to_real(), 1e-2).unwrap();
        let exact = re_w1().jet(&q, 3).unwrap();
        for (a, b) in fd.gradient().iter().zip(exact.gradient()) {
            assert!((a - b).norm() < 1e-7, "{a} vs {b}");
        }
    }

    #[test]
    fn fd_jet_converges_at_fourth_order() {
        let q = SpherePoint::from_torus_angles(0.6, 0.2, 1.3);
        let p = (&Poly::var(W1) * &Poly::var(W2BAR)).scale(GaussRational::int(1, 1))
            + &Poly::var(W2) * &Poly::var(W2);
        let exact = ScalarField::polynomial(p.clone()).jet(&q, 3).unwrap();
        let err = |h: f64| {
            let fd = fd_jet(|x| p.eval(x), q.to_real(), h).unwrap();
            (1..N_MONOMIALS)
                .filter(|&k| monomial_exponents(k).iter().sum::<u8>() <= 2)
                .map(|k| (fd.coefficients()[k] - exact.coefficients()[k]).norm())
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(0.04), err(0.02));
        let slope = (e1 / e2).log2();
        assert!(slope > 3.5 && slope < 4.5, "slope {slope}");
    }

    #[test]
    fn fd_field_capability() {
        let mut fd = FdField::new(|q| q.w1(), 1e-2);
        fd.max_order = 1;
        let u = ScalarField::FiniteDifference(fd);
        let q = SpherePoint::clifford(0.0, 0.0);
        assert!(matches!(u.jet(&q, 2), Err(Error::Capability { needed: 2, available: 1 })));
        assert!(u.jet(&q, 1).is_ok());
    }

    #[test]
    fn fd_field_frame_derivatives_match_exact() {
        let p = &(&Poly::var(W1) * &Poly::var(W1)) * &Poly::var(W2BAR);
        let exact = ScalarField::polynomial(p.clone());
        let fd = ScalarField::FiniteDifference(FdField::new(move |x| p.eval(x), 1e-2));
        let q = SpherePoint::from_torus_angles(0.7, 0.1, 0.9);
        for word in [&[W0Bar, W0Bar][..], &[W0, W0Bar]] {
            let a = frame_derivative(&exact, word, &q).unwrap();
            let b = frame_derivative(&fd, word, &q).unwrap();
            assert!((a - b).norm() < 1e-6);
        }
        let _ = Poly::var(W2);
    }
}
