//! Truncated Taylor expansions.
//!
//! [`Jet3`] is a complex polynomial of total degree at most three in the
//! displacement `(dx1, dy1, dx2, dy2)` of the four real ambient coordinates
//! around a base point. Products are truncated, composition with a univariate
//! function uses its Taylor coefficients, and partial derivatives lower the
//! valid order by one. [`Series1`] is the univariate analogue used to build
//! radial and angular profiles.

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use num_complex::Complex64;

/// Highest supported total degree.
pub const MAX_ORDER: usize = 3;
/// Number of monomials of degree at most three in four variables.
pub const N_MONOMIALS: usize = 35;

struct Tables {
    exps: Vec<[u8; 4]>,
    degree: Vec<u8>,
    lookup: [u8; 256],
    // (i, j, k) with monomial_i * monomial_j = monomial_k, sorted by deg k
    products: Vec<(u8, u8, u8)>,
    // products[..product_end[d]] have deg k <= d
    product_end: [usize; 4],
    // per variable: (source, target, factor) for d/dv
    derivs: [Vec<(u8, u8, f64)>; 4],
}

const NONE: u8 = u8::MAX;

fn key(e: &[u8; 4]) -> usize {
    (e[0] as usize) * 64 + (e[1] as usize) * 16 + (e[2] as usize) * 4 + e[3] as usize
}

fn tables() -> &'static Tables {
    static TABLES: OnceLock<Tables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let mut exps = Vec::with_capacity(N_MONOMIALS);
        for d in 0..=MAX_ORDER as u8 {
            for a in (0..=d).rev() {
                for b in (0..=d - a).rev() {
                    for c in (0..=d - a - b).rev() {
                        exps.push([a, b, c, d - a - b - c]);
                    }
                }
            }
        }
        debug_assert_eq!(exps.len(), N_MONOMIALS);
        let degree: Vec<u8> = exps.iter().map(|e| e.iter().sum()).collect();
        let mut lookup = [NONE; 256];
        for (i, e) in exps.iter().enumerate() {
            lookup[key(e)] = i as u8;
        }
        let mut products = Vec::new();
        for i in 0..N_MONOMIALS {
            for j in 0..N_MONOMIALS {
                if degree[i] + degree[j] <= MAX_ORDER as u8 {
                    let e: [u8; 4] = std::array::from_fn(|k| exps[i][k] + exps[j][k]);
                    products.push((i as u8, j as u8, lookup[key(&e)]));
                }
            }
        }
        products.sort_by_key(|&(_, _, k)| degree[k as usize]);
        let mut product_end = [0usize; 4];
        for (d, end) in product_end.iter_mut().enumerate() {
            *end = products
                .iter()
                .take_while(|&&(_, _, k)| degree[k as usize] as usize <= d)
                .count();
        }
        let derivs = std::array::from_fn(|v| {
            let mut out = Vec::new();
            for (i, e) in exps.iter().enumerate() {
                if e[v] > 0 {
                    let mut t = *e;
                    t[v] -= 1;
                    out.push((i as u8, lookup[key(&t)], e[v] as f64));
                }
            }
            out
        });
        Tables {
            exps,
            degree,
            lookup,
            products,
            product_end,
            derivs,
        }
    })
}

/// Index of the monomial with exponents `e` (total degree at most three).
pub fn monomial_index(e: [u8; 4]) -> Option<usize> {
    if e.iter().any(|&k| k > 3) || e.iter().map(|&k| k as usize).sum::<usize>() > MAX_ORDER {
        return None;
    }
    Some(tables().lookup[key(&e)] as usize)
}

/// Exponents of monomial `i`.
pub fn monomial_exponents(i: usize) -> [u8; 4] {
    tables().exps[i]
}

/// A complex Taylor polynomial in the four real ambient coordinates, valid
/// up to total degree `order`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet3 {
    coeffs: [Complex64; N_MONOMIALS],
    order: u8,
}

fn cz() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

impl Jet3 {
    pub fn constant(c: Complex64, order: usize) -> Self {
        let mut coeffs = [cz(); N_MONOMIALS];
        coeffs[0] = c;
        Self {
            coeffs,
            order: order.min(MAX_ORDER) as u8,
        }
    }

    pub fn zero(order: usize) -> Self {
        Self::constant(cz(), order)
    }

    /// The coordinate `x_var = base + d x_var`.
    pub fn coordinate(base: f64, var: usize, order: usize) -> Self {
        let mut j = Self::constant(Complex64::new(base, 0.0), order);
        if order >= 1 {
            let mut e = [0u8; 4];
            e[var] = 1;
            j.coeffs[tables().lookup[key(&e)] as usize] = Complex64::new(1.0, 0.0);
        }
        j
    }

    /// Builds a jet from raw Taylor coefficients.
    pub fn from_coefficients(coeffs: [Complex64; N_MONOMIALS], order: usize) -> Self {
        let mut j = Self {
            coeffs,
            order: order.min(MAX_ORDER) as u8,
        };
        j.truncate();
        j
    }

    fn truncate(&mut self) {
        let t = tables();
        for i in 0..N_MONOMIALS {
            if t.degree[i] > self.order {
                self.coeffs[i] = cz();
            }
        }
    }

    pub fn order(&self) -> usize {
        self.order as usize
    }

    /// Lowers the valid order, discarding higher coefficients.
    pub fn with_order(mut self, order: usize) -> Self {
        self.order = self.order.min(order as u8);
        self.truncate();
        self
    }

    pub fn value(&self) -> Complex64 {
        self.coeffs[0]
    }

    pub fn coefficients(&self) -> &[Complex64; N_MONOMIALS] {
        &self.coeffs
    }

    /// Partial derivative `d^|e| f / dx^e` at the base point.
    pub fn partial(&self, e: [u8; 4]) -> Option<Complex64> {
        let deg: usize = e.iter().map(|&k| k as usize).sum();
        if deg > self.order() {
            return None;
        }
        let i = monomial_index(e)?;
        let fact: f64 = e
            .iter()
            .map(|&k| (1..=k as u32).product::<u32>() as f64)
            .product();
        Some(self.coeffs[i] * fact)
    }

    /// Gradient with respect to the four real coordinates.
    pub fn gradient(&self) -> [Complex64; 4] {
        std::array::from_fn(|v| {
            let mut e = [0u8; 4];
            e[v] = 1;
            self.coeffs[tables().lookup[key(&e)] as usize]
        })
    }

    /// True when every coefficient up to the valid order is exactly zero.
    pub fn is_zero(&self) -> bool {
        let t = tables();
        self.coeffs
            .iter()
            .zip(&t.degree)
            .all(|(c, &d)| d > self.order || (c.re == 0.0 && c.im == 0.0))
    }

    /// True when all non-constant coefficients vanish exactly.
    pub fn is_constant(&self) -> bool {
        self.coeffs[1..].iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    pub fn scale(&self, k: Complex64) -> Self {
        Self {
            coeffs: self.coeffs.map(|c| c * k),
            order: self.order,
        }
    }

    pub fn add_constant(mut self, k: Complex64) -> Self {
        self.coeffs[0] += k;
        self
    }

    pub fn conj(&self) -> Self {
        Self {
            coeffs: self.coeffs.map(|c| c.conj()),
            order: self.order,
        }
    }

    pub fn re(&self) -> Self {
        Self {
            coeffs: self.coeffs.map(|c| Complex64::new(c.re, 0.0)),
            order: self.order,
        }
    }

    /// `d/dx_var`, valid to one order less.
    pub fn derivative(&self, var: usize) -> Self {
        let mut out = Self::zero(self.order().saturating_sub(1));
        let t = tables();
        for &(src, dst, f) in &t.derivs[var] {
            if t.degree[dst as usize] <= out.order {
                out.coeffs[dst as usize] += self.coeffs[src as usize] * f;
            }
        }
        out
    }

    /// `f(self)` for `f` with Taylor coefficients `taylor[k] = f^(k)(a)/k!`
    /// at `a = self.value()`.
    pub fn compose(&self, taylor: &[Complex64; 4]) -> Self {
        let mut delta = *self;
        delta.coeffs[0] = cz();
        let mut acc = Self::constant(taylor[self.order()], self.order());
        for k in (0..self.order()).rev() {
            acc = (acc * delta).add_constant(taylor[k]);
        }
        acc
    }

    /// `f(self)` for a real-analytic `f` with real Taylor coefficients; the
    /// base value must be real.
    pub fn compose_real(&self, taylor: &[f64; 4]) -> Self {
        self.compose(&taylor.map(|t| Complex64::new(t, 0.0)))
    }

    pub fn recip(&self) -> Self {
        self.compose(&taylor_recip_c(self.value()))
    }
}

impl Add for Jet3 {
    type Output = Jet3;
    fn add(self, o: Jet3) -> Jet3 {
        let mut out = Jet3 {
            coeffs: std::array::from_fn(|i| self.coeffs[i] + o.coeffs[i]),
            order: self.order.min(o.order),
        };
        out.truncate();
        out
    }
}

impl Sub for Jet3 {
    type Output = Jet3;
    fn sub(self, o: Jet3) -> Jet3 {
        self + (-o)
    }
}

impl Neg for Jet3 {
    type Output = Jet3;
    fn neg(self) -> Jet3 {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul for Jet3 {
    type Output = Jet3;
    fn mul(self, o: Jet3) -> Jet3 {
        let order = self.order.min(o.order);
        let t = tables();
        let mut coeffs = [cz(); N_MONOMIALS];
        for &(i, j, k) in &t.products[..t.product_end[order as usize]] {
            coeffs[k as usize] += self.coeffs[i as usize] * o.coeffs[j as usize];
        }
        Jet3 { coeffs, order }
    }
}

/// Taylor coefficients of `1/x` at complex `a`.
pub fn taylor_recip_c(a: Complex64) -> [Complex64; 4] {
    let r = a.inv();
    [r, -r * r, r * r * r, -r * r * r * r]
}

/// Taylor coefficients of `1/x` at `a`.
pub fn taylor_recip(a: f64) -> [f64; 4] {
    let r = 1.0 / a;
    [r, -r * r, r * r * r, -r * r * r * r]
}

/// Taylor coefficients of `x^p` at `a > 0`.
pub fn taylor_powf(a: f64, p: f64) -> [f64; 4] {
    [
        a.powf(p),
        p * a.powf(p - 1.0),
        p * (p - 1.0) / 2.0 * a.powf(p - 2.0),
        p * (p - 1.0) * (p - 2.0) / 6.0 * a.powf(p - 3.0),
    ]
}

pub fn taylor_sqrt(a: f64) -> [f64; 4] {
    taylor_powf(a, 0.5)
}

pub fn taylor_exp(a: f64) -> [f64; 4] {
    let e = a.exp();
    [e, e, e / 2.0, e / 6.0]
}

/// Taylor coefficients of `acos` at `|c| < 1`.
pub fn taylor_acos(c: f64) -> [f64; 4] {
    let s = 1.0 - c * c;
    [
        c.acos(),
        -s.powf(-0.5),
        -c * s.powf(-1.5) / 2.0,
        -(1.0 + 2.0 * c * c) * s.powf(-2.5) / 6.0,
    ]
}

/// Univariate truncated Taylor series `sum_k c[k] t^k`, degree at most three.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Series1 {
    pub c: [f64; 4],
}

impl Series1 {
    /// The independent variable at `t0`.
    pub fn variable(t0: f64) -> Self {
        Self {
            c: [t0, 1.0, 0.0, 0.0],
        }
    }

    pub fn constant(v: f64) -> Self {
        Self {
            c: [v, 0.0, 0.0, 0.0],
        }
    }

    /// Series from derivative values `[f, f', f'', f''']`.
    pub fn from_derivatives(d: [f64; 4]) -> Self {
        Self {
            c: [d[0], d[1], d[2] / 2.0, d[3] / 6.0],
        }
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// `[f, f', f'', f''']`.
    pub fn derivatives(&self) -> [f64; 4] {
        [self.c[0], self.c[1], 2.0 * self.c[2], 6.0 * self.c[3]]
    }

    pub fn is_constant(&self) -> bool {
        self.c[1] == 0.0 && self.c[2] == 0.0 && self.c[3] == 0.0
    }

    pub fn scale(&self, k: f64) -> Self {
        Self {
            c: self.c.map(|x| x * k),
        }
    }

    pub fn add_constant(mut self, k: f64) -> Self {
        self.c[0] += k;
        self
    }

    pub fn compose(&self, taylor: &[f64; 4]) -> Self {
        let mut delta = *self;
        delta.c[0] = 0.0;
        let mut acc = Self::constant(taylor[3]);
        for k in (0..3).rev() {
            acc = (acc * delta).add_constant(taylor[k]);
        }
        acc
    }

    pub fn exp(&self) -> Self {
        self.compose(&taylor_exp(self.c[0]))
    }

    pub fn sqrt(&self) -> Self {
        self.compose(&taylor_sqrt(self.c[0]))
    }

    pub fn recip(&self) -> Self {
        self.compose(&taylor_recip(self.c[0]))
    }

    pub fn acos(&self) -> Self {
        self.compose(&taylor_acos(self.c[0]))
    }
}

impl Add for Series1 {
    type Output = Series1;
    fn add(self, o: Series1) -> Series1 {
        Series1 {
            c: std::array::from_fn(|k| self.c[k] + o.c[k]),
        }
    }
}

impl Sub for Series1 {
    type Output = Series1;
    fn sub(self, o: Series1) -> Series1 {
        Series1 {
            c: std::array::from_fn(|k| self.c[k] - o.c[k]),
        }
    }
}

impl Mul for Series1 {
    type Output = Series1;
    fn mul(self, o: Series1) -> Series1 {
        let mut c = [0.0; 4];
        for i in 0..4 {
            for j in 0..4 - i {
                c[i + j] += self.c[i] * o.c[j];
            }
        }
        Series1 { c }
    }
}
