use num_complex::Complex64;

use super::point::{AmbientVector, CVector, SpherePoint};

/// The standard frame `{W0, W0bar, T}` at a point, with its dual coframe
/// `{psi, psibar, eta}` and the two-form `d eta`.
///
/// Forms act on complexified vectors by complex-bilinear extension. For the
/// two-form the convention is `(a ^ b)(A, B) = a(A) b(B) - a(B) b(A)`, which
/// gives `d eta = i (dw1 ^ dw1bar + dw2 ^ dw2bar)` and
/// `<d eta, W0 ^ W0bar> = i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FramePacket {
    pub point: SpherePoint,
    pub w0: CVector,
    pub w0bar: CVector,
    pub t: CVector,
}

/// Evaluates the standard frame at `q`.
pub fn frame_at(q: &SpherePoint) -> FramePacket {
    let (w1, w2) = (q.w1(), q.w2());
    let zero = Complex64::new(0.0, 0.0);
    let i = Complex64::i();
    let w0 = CVector([w2.conj(), -w1.conj(), zero, zero]);
    FramePacket {
        point: *q,
        w0,
        w0bar: w0.conj(),
        t: CVector([i * w1, i * w2, -i * w1.conj(), -i * w2.conj()]),
    }
}

impl FramePacket {
    /// `psi = w2 dw1 - w1 dw2`.
    pub fn psi(&self, v: &CVector) -> Complex64 {
        let (w1, w2) = (self.point.w1(), self.point.w2());
        w2 * v.dw1() - w1 * v.dw2()
    }

    /// `psibar = w2bar dw1bar - w1bar dw2bar`.
    pub fn psibar(&self, v: &CVector) -> Complex64 {
        let (w1, w2) = (self.point.w1(), self.point.w2());
        w2.conj() * v.dw1bar() - w1.conj() * v.dw2bar()
    }

    /// `eta = -Im(w1 dw1bar + w2 dw2bar)`.
    pub fn eta(&self, v: &CVector) -> Complex64 {
        let (w1, w2) = (self.point.w1(), self.point.w2());
        let z = w1 * v.dw1bar() + w2 * v.dw2bar();
        let zbar = w1.conj() * v.dw1() + w2.conj() * v.dw2();
        Complex64::new(0.0, 0.5) * (z - zbar)
    }

    /// `<d eta, a ^ b>`.
    pub fn deta(&self, a: &CVector, b: &CVector) -> Complex64 {
        let s = a.dw1() * b.dw1bar() - a.dw1bar() * b.dw1() + a.dw2() * b.dw2bar()
            - a.dw2bar() * b.dw2();
        Complex64::i() * s
    }

    /// `X = 2 Re W0`.
    pub fn x(&self) -> AmbientVector {
        AmbientVector::new(self.w0.dw1(), self.w0.dw2())
    }

    /// `Y = -2 Im W0`.
    pub fn y(&self) -> AmbientVector {
        let i = Complex64::i();
        AmbientVector::new(i * self.w0.dw1(), i * self.w0.dw2())
    }

    /// `T` as a real vector.
    pub fn t_real(&self) -> AmbientVector {
        AmbientVector::new(self.t.dw1(), self.t.dw2())
    }

    /// Six pairings of `{psi, eta}` against `{W0, W0bar, T}` in row order.
    pub fn duality_matrix(&self) -> [[Complex64; 3]; 2] {
        let vs = [self.w0, self.w0bar, self.t];
        [vs.map(|v| self.psi(&v)), vs.map(|v| self.eta(&v))]
    }
}

/// The standard complex structure on the contact plane: multiplication by `i`
/// on the (1,0) components of a real vector.
pub fn j0(v: &AmbientVector) -> AmbientVector {
    let i = Complex64::i();
    AmbientVector::new(i * v.a1, i * v.a2)
}

/// `<d eta, X ^ J0 X>` with `X = 2 Re W0`; positive for the standard structure.
pub fn orientation_check(q: &SpherePoint) -> f64 {
    let f = frame_at(q);
    let x = f.x();
    f.deta(&x.as_complex(), &j0(&x).as_complex()).re
}
