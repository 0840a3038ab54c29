//! Exact polynomial vector fields on C^2.
//!
//! Polynomials live in the four Wirtinger variables `(w1, w2, w1bar, w2bar)`,
//! treated as independent, with Gaussian-rational coefficients. Vector fields
//! carry one coefficient polynomial per derivation `d/dw1, d/dw2, d/dw1bar,
//! d/dw2bar`, so brackets are computed with no rounding at all.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_rational::Rational64;

use super::point::{CVector, SpherePoint};

/// A Gaussian rational `re + i im`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GaussRational {
    pub re: Rational64,
    pub im: Rational64,
}

impl GaussRational {
    pub fn new(re: Rational64, im: Rational64) -> Self {
        Self { re, im }
    }

    pub fn int(re: i64, im: i64) -> Self {
        Self::new(Rational64::from_integer(re), Rational64::from_integer(im))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Self::new(Rational64::new(num, den), Rational64::from_integer(0))
    }

    pub fn zero() -> Self {
        Self::int(0, 0)
    }

    pub fn one() -> Self {
        Self::int(1, 0)
    }

    pub fn i() -> Self {
        Self::int(0, 1)
    }

    pub fn is_zero(&self) -> bool {
        *self.re.numer() == 0 && *self.im.numer() == 0
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re, -self.im)
    }

    pub fn to_complex(&self) -> Complex64 {
        let f = |r: Rational64| *r.numer() as f64 / *r.denom() as f64;
        Complex64::new(f(self.re), f(self.im))
    }
}

impl Add for GaussRational {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for GaussRational {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.re - o.re, self.im - o.im)
    }
}

impl Mul for GaussRational {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )
    }
}

impl Neg for GaussRational {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.re, -self.im)
    }
}

impl fmt::Display for GaussRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + {}i)", self.re, self.im)
    }
}

/// Exponents of `(w1, w2, w1bar, w2bar)`.
pub type Exponent = [u8; 4];

/// Polynomial in `(w1, w2, w1bar, w2bar)` with exact coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Poly {
    terms: BTreeMap<Exponent, GaussRational>,
}

/// Index of a Wirtinger variable.
pub const W1: usize = 0;
pub const W2: usize = 1;
pub const W1BAR: usize = 2;
pub const W2BAR: usize = 3;

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: GaussRational) -> Self {
        Self::monomial(c, [0; 4])
    }

    pub fn monomial(c: GaussRational, e: Exponent) -> Self {
        let mut p = Self::zero();
        p.insert(e, c);
        p
    }

    /// The coordinate function for variable `k` (see [`W1`], ...).
    pub fn var(k: usize) -> Self {
        let mut e = [0u8; 4];
        e[k] = 1;
        Self::monomial(GaussRational::one(), e)
    }

    fn insert(&mut self, e: Exponent, c: GaussRational) {
        let entry = self.terms.entry(e).or_default();
        *entry = *entry + c;
        if entry.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &GaussRational)> {
        self.terms.iter()
    }

    pub fn degree(&self) -> usize {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&k| k as usize).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn scale(&self, c: GaussRational) -> Self {
        let mut out = Self::zero();
        for (e, v) in &self.terms {
            out.insert(*e, *v * c);
        }
        out
    }

    /// Complex conjugate: swaps `w` with `wbar` and conjugates coefficients.
    pub fn conj(&self) -> Self {
        let mut out = Self::zero();
        for (e, v) in &self.terms {
            out.insert([e[2], e[3], e[0], e[1]], v.conj());
        }
        out
    }

    /// Real part `(p + conj p) / 2`.
    pub fn real_part(&self) -> Self {
        (self.clone() + self.conj()).scale(GaussRational::ratio(1, 2))
    }

    /// `(p − conj p) / 2i`.
    pub fn imag_part(&self) -> Self {
        (self.clone() - self.conj()).scale(GaussRational::new(Rational64::new(0, 1), Rational64::new(-1, 2)))
    }

    /// Wirtinger derivative with respect to variable `k`.
    pub fn derivative(&self, k: usize) -> Self {
        let mut out = Self::zero();
        for (e, v) in &self.terms {
            if e[k] > 0 {
                let mut d = *e;
                d[k] -= 1;
                out.insert(d, *v * GaussRational::int(e[k] as i64, 0));
            }
        }
        out
    }

    /// Evaluates at the given values of `(w1, w2, w1bar, w2bar)` in any ring.
    pub fn eval_with<T>(&self, vars: &[T; 4], lift: impl Fn(Complex64) -> T) -> T
    where
        T: Clone + Add<Output = T> + Mul<Output = T>,
    {
        let mut acc = lift(Complex64::new(0.0, 0.0));
        for (e, v) in &self.terms {
            let mut term = lift(v.to_complex());
            for k in 0..4 {
                for _ in 0..e[k] {
                    term = term * vars[k].clone();
                }
            }
            acc = acc + term;
        }
        acc
    }

    /// Evaluates at a sphere point.
    pub fn eval(&self, q: &SpherePoint) -> Complex64 {
        let vars = [q.w1(), q.w2(), q.w1().conj(), q.w2().conj()];
        self.eval_with(&vars, |c| c)
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(mut self, o: Poly) -> Poly {
        for (e, v) in o.terms {
            self.insert(e, v);
        }
        self
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, o: Poly) -> Poly {
        self + o.scale(-GaussRational::one())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ea, va) in &self.terms {
            for (eb, vb) in &o.terms {
                let e = std::array::from_fn(|k| ea[k] + eb[k]);
                out.insert(e, *va * *vb);
            }
        }
        out
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        const NAMES: [&str; 4] = ["w1", "w2", "w1b", "w2b"];
        let mut first = true;
        for (e, v) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{v}")?;
            for k in 0..4 {
                match e[k] {
                    0 => {}
                    1 => write!(f, "*{}", NAMES[k])?,
                    n => write!(f, "*{}^{}", NAMES[k], n)?,
                }
            }
        }
        Ok(())
    }
}

/// A vector field `sum_k c_k d/dv_k` with polynomial coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PolyVectorField {
    pub coeffs: [Poly; 4],
}

impl PolyVectorField {
    pub fn new(coeffs: [Poly; 4]) -> Self {
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// `W0 = w2bar d/dw1 - w1bar d/dw2`.
    pub fn w0() -> Self {
        Self::new([
            Poly::var(W2BAR),
            Poly::var(W1BAR).scale(-GaussRational::one()),
            Poly::zero(),
            Poly::zero(),
        ])
    }

    /// `W0bar = w2 d/dw1bar - w1 d/dw2bar`.
    pub fn w0bar() -> Self {
        Self::w0().conj()
    }

    /// `T = -2 Im(w1 d/dw1 + w2 d/dw2)`, i.e. `i(w1 d/dw1 + w2 d/dw2) + c.c.`
    pub fn t() -> Self {
        let i = GaussRational::i();
        Self::new([
            Poly::var(W1).scale(i),
            Poly::var(W2).scale(i),
            Poly::var(W1BAR).scale(-i),
            Poly::var(W2BAR).scale(-i),
        ])
    }

    /// `X = 2 Re W0 = W0 + W0bar`.
    pub fn x() -> Self {
        Self::w0() + Self::w0bar()
    }

    /// `Y = -2 Im W0 = i (W0 - W0bar)`.
    pub fn y() -> Self {
        (Self::w0() - Self::w0bar()).scale(GaussRational::i())
    }

    pub fn conj(&self) -> Self {
        let c = &self.coeffs;
        Self::new([c[2].conj(), c[3].conj(), c[0].conj(), c[1].conj()])
    }

    pub fn scale(&self, k: GaussRational) -> Self {
        Self::new(std::array::from_fn(|j| self.coeffs[j].scale(k)))
    }

    /// Derivation of a polynomial along the field.
    pub fn apply(&self, f: &Poly) -> Poly {
        let mut out = Poly::zero();
        for k in 0..4 {
            let d = f.derivative(k);
            if !d.is_zero() && !self.coeffs[k].is_zero() {
                out = out + &self.coeffs[k] * &d;
            }
        }
        out
    }

    /// Exact commutator `[self, other]`.
    pub fn bracket(&self, other: &Self) -> Self {
        Self::new(std::array::from_fn(|j| {
            self.apply(&other.coeffs[j]) - other.apply(&self.coeffs[j])
        }))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Poly::is_zero)
    }

    pub fn eval(&self, q: &SpherePoint) -> CVector {
        CVector(std::array::from_fn(|k| self.coeffs[k].eval(q)))
    }
}

impl Add for PolyVectorField {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let [a0, a1, a2, a3] = self.coeffs;
        let [b0, b1, b2, b3] = o.coeffs;
        Self::new([a0 + b0, a1 + b1, a2 + b2, a3 + b3])
    }
}

impl Sub for PolyVectorField {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + o.scale(-GaussRational::one())
    }
}

impl fmt::Display for PolyVectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const NAMES: [&str; 4] = ["d/dw1", "d/dw2", "d/dw1b", "d/dw2b"];
        for k in 0..4 {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "[{}] {}", self.coeffs[k], NAMES[k])?;
        }
        Ok(())
    }
}

/// The bracket relations of the complex and real frames, evaluated exactly.
///
/// Each entry names the relation and reports whether the two sides agree
/// coefficient by coefficient.
pub fn frame_bracket_identities() -> Vec<(&'static str, bool)> {
    let g = GaussRational::int;
    let (w0, w0b, t) = (PolyVectorField::w0(), PolyVectorField::w0bar(), PolyVectorField::t());
    let (x, y) = (PolyVectorField::x(), PolyVectorField::y());
    vec![
        ("[W0, W0bar] = -i T", w0.bracket(&w0b) == t.scale(g(0, -1))),
        ("[T, W0] = -2i W0", t.bracket(&w0) == w0.scale(g(0, -2))),
        ("[T, W0bar] = 2i W0bar", t.bracket(&w0b) == w0b.scale(g(0, 2))),
        ("[X, Y] = -2 T", x.bracket(&y) == t.scale(g(-2, 0))),
        ("[X, T] = 2 Y", x.bracket(&t) == y.scale(g(2, 0))),
        ("[Y, T] = -2 X", y.bracket(&t) == x.scale(g(-2, 0))),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(re: i64, im: i64) -> GaussRational {
        GaussRational::int(re, im)
    }

    #[test]
    fn commutators_of_the_standard_frame_are_exact() {
        let w0 = PolyVectorField::w0();
        let w0b = PolyVectorField::w0bar();
        let t = PolyVectorField::t();
        assert_eq!(w0.bracket(&w0b), t.scale(g(0, -1)));
        assert_eq!(t.bracket(&w0), w0.scale(g(0, -2)));
        assert_eq!(t.bracket(&w0b), w0b.scale(g(0, 2)));
        assert!(w0.bracket(&w0).is_zero());
    }

    #[test]
    fn all_bracket_identities_hold() {
        for (name, ok) in frame_bracket_identities() {
            assert!(ok, "{name}");
        }
    }

    #[test]
    fn real_frame_commutators_are_exact() {
        let (x, y, t) = (PolyVectorField::x(), PolyVectorField::y(), PolyVectorField::t());
        assert_eq!(x.bracket(&y), t.scale(g(-2, 0)));
        assert_eq!(x.bracket(&t), y.scale(g(2, 0)));
        assert_eq!(y.bracket(&t), x.scale(g(-2, 0)));
    }

    #[test]
    fn derivation_obeys_leibniz() {
        let p = &Poly::var(W1) * &Poly::var(W2BAR);
        let q = Poly::var(W1BAR) + Poly::constant(g(3, 1));
        let w0 = PolyVectorField::w0b_test();
        let lhs = w0.apply(&(&p * &q));
        let rhs = &w0.apply(&p) * &q + &p * &w0.apply(&q);
        assert_eq!(lhs, rhs);
    }

    impl PolyVectorField {
        fn w0b_test() -> Self {
            Self::w0() + Self::t().scale(g(2, -1))
        }
    }

    #[test]
    fn conjugation_is_an_involution() {
        let p = &Poly::var(W1) * &Poly::var(W2BAR).scale(g(1, 2));
        assert_eq!(p.conj().conj(), p);
        let v = PolyVectorField::w0().scale(g(0, 3));
        assert_eq!(v.conj().conj(), v);
    }
}
