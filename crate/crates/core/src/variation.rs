//! Variation of `|μ_{g_s}|` along contact flows, the symmetry-breaking
//! Hamiltonian, and an audit that checks the analytic expansion coefficients
//! against flow integration.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2, TAU};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::cr::DeformationTensor;
use crate::dynamics::{beltrami_detail, equivariance_defect, max_dilatation, FlowMap, FlowSettings};
use crate::error::{Error, Result};
use crate::field::{apply_words, Extension, FrameVector, PointJets, RadialProfile, ScalarField};
use crate::jet::Series1;
use crate::sphere::SpherePoint;

use FrameVector::{W0Bar, T, W0};

/// `|ν|` below this counts as zero.
pub const NU_ZERO: f64 = 1e-12;
/// Tolerance for `Im(conj(ν) W0bar² u) = 0`.
pub const FIRST_VARIATION_TOLERANCE: f64 = 1e-9;
/// Tolerance for `Tν = 4iν`.
pub const INVARIANCE_TOLERANCE: f64 = 1e-9;

/// `a = i W0bar² u`, the coefficient of `s` in `ν_s`.
pub fn coeff_a(u: &ScalarField, q: &SpherePoint) -> Result<Complex64> {
    let d = crate::field::frame_derivatives(u, &[&[W0Bar, W0Bar]], q)?;
    Ok(Complex64::i() * d[0])
}

/// How `|μ_{g_s}|` leaves `|ν|` to first order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FirstOrder {
    /// `|μ| = |ν| + c s + O(s²)`.
    Linear,
    /// `ν = 0` and `|μ| = c |s| + O(s²)`.
    AbsoluteValue,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FirstVariation {
    pub value: f64,
    pub kind: FirstOrder,
}

/// First-order coefficient of `|μ_{g_s}|` at `q`.
pub fn first_variation(nu: &DeformationTensor, u: &ScalarField, q: &SpherePoint) -> Result<FirstVariation> {
    let n = nu.value(q)?;
    let w = crate::field::frame_derivatives(u, &[&[W0Bar, W0Bar]], q)?[0];
    let m = n.norm();
    if m <= NU_ZERO {
        return Ok(FirstVariation {
            value: w.norm(),
            kind: FirstOrder::AbsoluteValue,
        });
    }
    Ok(FirstVariation {
        value: (1.0 - m * m) / m * (n.conj() * w).im,
        kind: FirstOrder::Linear,
    })
}

/// Frame derivatives of `u` needed for the second-order coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondOrderData {
    pub u: Complex64,
    pub w0: Complex64,
    pub w0bar: Complex64,
    pub t: Complex64,
    pub w0bar2: Complex64,
    pub w0_w0bar: Complex64,
    pub w0bar_w0: Complex64,
    pub w0_w0bar2: Complex64,
    pub w0bar3: Complex64,
    pub t_w0bar2: Complex64,
    pub w0_2: Complex64,
}

impl SecondOrderData {
    pub fn at(u: &ScalarField, q: &SpherePoint) -> Result<Self> {
        let pj = PointJets::at(q, 3);
        let jet = u.eval_jet(&pj, Extension::Homogeneous)?;
        let words: [&[FrameVector]; 11] = [
            &[],
            &[W0],
            &[W0Bar],
            &[T],
            &[W0Bar, W0Bar],
            &[W0, W0Bar],
            &[W0Bar, W0],
            &[W0, W0Bar, W0Bar],
            &[W0Bar, W0Bar, W0Bar],
            &[T, W0Bar, W0Bar],
            &[W0, W0],
        ];
        let d = apply_words(&pj, &jet, &words);
        Ok(Self {
            u: d[0],
            w0: d[1],
            w0bar: d[2],
            t: d[3],
            w0bar2: d[4],
            w0_w0bar: d[5],
            w0bar_w0: d[6],
            w0_w0bar2: d[7],
            w0bar3: d[8],
            t_w0bar2: d[9],
            w0_2: d[10],
        })
    }

    /// `Δu = (W0 W0bar + W0bar W0) u`.
    pub fn laplacian(&self) -> Complex64 {
        self.w0_w0bar + self.w0bar_w0
    }

    /// The coefficient of `s²` in `ν_s`.
    pub fn b(&self) -> Complex64 {
        let i = Complex64::i();
        -0.5 * self.w0bar * self.w0_w0bar2 + 0.5 * self.w0 * self.w0bar3 + 0.5 * i * self.u * self.t_w0bar2
            + 0.5 * i * self.w0bar2 * self.t
            + self.w0bar2 * self.w0_w0bar
            + 2.0 * self.w0bar2 * self.u
    }
}

/// `b`, the coefficient of `s²` in `ν_s`.
pub fn coeff_b(u: &ScalarField, q: &SpherePoint) -> Result<Complex64> {
    Ok(SecondOrderData::at(u, q)?.b())
}

/// Second-order coefficient of `|μ_{g_s}|` at a point where the first-order
/// term vanishes and the structure is circle invariant.
pub fn second_variation(nu: &DeformationTensor, u: &ScalarField, q: &SpherePoint) -> Result<f64> {
    let n = nu.value(q)?;
    let m = n.norm();
    if m <= NU_ZERO {
        return Err(Error::Condition {
            hypothesis: "nu nonzero".into(),
            detail: format!("|nu| = {m:e} at {q}"),
        });
    }
    let d = SecondOrderData::at(u, q)?;
    let first = (n.conj() * d.w0bar2).im;
    if first.abs() > FIRST_VARIATION_TOLERANCE {
        return Err(Error::Condition {
            hypothesis: "first variation vanishes".into(),
            detail: format!("Im(conj(nu) W0bar^2 u) = {first:e} at {q}"),
        });
    }
    let inv = nu.invariance_residual(q)?.norm();
    if inv > INVARIANCE_TOLERANCE {
        return Err(Error::Condition {
            hypothesis: "circle-invariant structure".into(),
            detail: format!("|T nu - 4i nu| = {inv:e} at {q}"),
        });
    }
    let (w0nu, w0barnu) = nu.frame_gradient(q)?;
    let cross = (w0barnu * d.w0 / n - w0nu * d.w0bar / n).re;
    let bracket = (1.0 + m * m) * d.w0bar2.norm_sqr() - (n.conj() * d.w0bar2 * (d.laplacian() + cross)).re;
    Ok((1.0 - m * m) / (2.0 * m) * bracket)
}

/// `(1 + |ν|²)|W0bar² u|² − conj(ν) W0bar²u Δu`, the torus bracket whose sign
/// decides whether the flow lowers the dilatation there.
pub fn torus_bracket(nu: &DeformationTensor, u: &ScalarField, q: &SpherePoint) -> Result<Complex64> {
    let n = nu.value(q)?;
    let d = SecondOrderData::at(u, q)?;
    Ok((1.0 + n.norm_sqr()) * d.w0bar2.norm_sqr() - n.conj() * d.w0bar2 * d.laplacian())
}

/// A smooth window in `r`: `1` on `inner`, `0` outside `outer`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cutoff {
    pub outer: (f64, f64),
    pub inner: (f64, f64),
}

impl Default for Cutoff {
    fn default() -> Self {
        Self {
            outer: (0.45, 0.95),
            inner: (0.55, 0.85),
        }
    }
}

impl Cutoff {
    fn validate(&self) -> Result<()> {
        let (a, b) = self.outer;
        let (c, d) = self.inner;
        let ok = 0.0 < a && a < c && c < FRAC_1_SQRT_2 && FRAC_1_SQRT_2 < d && d < b && b < 1.0;
        if !ok {
            return Err(Error::InvalidParams(format!(
                "cutoff window must satisfy 0 < {a} < {c} < 1/sqrt(2) < {d} < {b} < 1"
            )));
        }
        Ok(())
    }

    /// The window as a Taylor series in `r`.
    pub fn series(&self, r: f64) -> Series1 {
        let (a, b) = self.outer;
        let (c, d) = self.inner;
        if r <= a || r >= b {
            Series1::constant(0.0)
        } else if r >= c && r <= d {
            Series1::constant(1.0)
        } else if r < c {
            smoothstep(Series1::variable(r).add_constant(-a).scale(1.0 / (c - a)))
        } else {
            smoothstep(Series1::variable(r).scale(-1.0).add_constant(b).scale(1.0 / (b - d)))
        }
    }
}

/// `f(x)/(f(x) + f(1 − x))` with `f(x) = exp(−1/x)`, for `0 < x < 1`.
fn smoothstep(x: Series1) -> Series1 {
    let f = |x: Series1| x.recip().scale(-1.0).exp();
    let a = f(x);
    let b = f(x.scale(-1.0).add_constant(1.0));
    a * (a + b).recip()
}

/// `H = (2 + |ν|²)/|ν|` for the torus value of `|ν|`.
pub fn torus_h(nu_abs: f64) -> f64 {
    (2.0 + nu_abs * nu_abs) / nu_abs
}

/// Coefficients `(H/2 − 1, (√2/4) H)` of the breaking Hamiltonian.
pub fn breaking_coefficients(lambda: f64) -> Result<(f64, f64)> {
    if !(lambda > 1.0 && lambda.is_finite()) {
        return Err(Error::InvalidParams(format!("stretch must exceed 1, got {lambda}")));
    }
    let h = torus_h(crate::cr::rho_of(lambda));
    Ok((h / 2.0 - 1.0, SQRT_2 / 4.0 * h))
}

/// `u(r) = (H/2 − 1)(r − √2/2) + (√2/4) H (r − √2/2)²`, cut off away from the torus.
pub fn breaking_hamiltonian(lambda: f64, cutoff: Cutoff) -> Result<ScalarField> {
    cutoff.validate()?;
    let (c1, c2) = breaking_coefficients(lambda)?;
    Ok(ScalarField::radial(RadialProfile::new(
        format!("breaking(Lambda = {lambda})"),
        move |r| {
            let w = cutoff.series(r);
            if w.is_constant() && w.value() == 0.0 {
                return w;
            }
            let x = Series1::variable(r).add_constant(-FRAC_1_SQRT_2);
            (x.scale(c1) + (x * x).scale(c2)) * w
        },
    )))
}

/// Mean of `Im(conj(ν) W0bar² u)` over the Clifford torus by the periodic
/// trapezoid rule on an `n × n` grid, checked against `2n × 2n`.
pub fn torus_mean_first_variation(nu: &DeformationTensor, u: &ScalarField, n: usize) -> Result<f64> {
    if n < 4 {
        return Err(Error::Configuration(format!("torus quadrature needs n >= 4, got {n}")));
    }
    let mean = |n: usize| -> Result<(f64, f64)> {
        let values: Vec<f64> = (0..n * n)
            .into_par_iter()
            .map(|k| {
                let q = SpherePoint::clifford(TAU * (k / n) as f64 / n as f64, TAU * (k % n) as f64 / n as f64);
                let w = crate::field::frame_derivatives(u, &[&[W0Bar, W0Bar]], &q)?[0];
                Ok((nu.value(&q)?.conj() * w).im)
            })
            .collect::<Result<_>>()?;
        let scale = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        Ok((values.iter().sum::<f64>() / (n * n) as f64, scale))
    };
    let (coarse, _) = mean(n)?;
    let (fine, scale) = mean(2 * n)?;
    if (coarse - fine).abs() > 1e-9 * scale.max(1.0) {
        return Err(Error::Quadrature(format!(
            "torus mean changed from {coarse:e} to {fine:e} under refinement"
        )));
    }
    Ok(fine)
}

/// `|μ_{g_s}|(q)` for each `s`.
pub fn mu_abs_samples(flow: &FlowMap, nu: &DeformationTensor, q: &SpherePoint, s: &[f64]) -> Result<Vec<f64>> {
    s.iter().map(|&s| Ok(beltrami_detail(flow, nu, q, s)?.mu.norm())).collect()
}

/// `ν_s(q)` for each `s`.
pub fn nu_s_samples(flow: &FlowMap, nu: &DeformationTensor, q: &SpherePoint, s: &[f64]) -> Result<Vec<Complex64>> {
    s.iter().map(|&s| Ok(beltrami_detail(flow, nu, q, s)?.nu_s)).collect()
}

/// Richardson-extrapolated central slope of `s ↦ |μ_{g_s}|(q)` at 0.
pub fn richardson_slope(flow: &FlowMap, nu: &DeformationTensor, q: &SpherePoint, h: f64) -> Result<f64> {
    let v = mu_abs_samples(flow, nu, q, &[h, -h, h / 2.0, -h / 2.0])?;
    let d1 = (v[0] - v[1]) / (2.0 * h);
    let d2 = (v[2] - v[3]) / h;
    Ok((4.0 * d2 - d1) / 3.0)
}

/// Richardson-extrapolated `|μ_{g_s}|/|s|` as `s → 0⁺`, for points with `ν = 0`.
pub fn richardson_abs_slope(flow: &FlowMap, nu: &DeformationTensor, q: &SpherePoint, h: f64) -> Result<f64> {
    let v = mu_abs_samples(flow, nu, q, &[h, h / 2.0])?;
    Ok(2.0 * (2.0 * v[1] / h) - v[0] / h)
}

/// Least-squares polynomial fit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolyFit {
    /// Coefficients in increasing degree.
    pub coeffs: Vec<f64>,
    /// Root-mean-square residual.
    pub residual: f64,
}

/// Fits `Σ c_k x^k`, `k ≤ degree`, by least squares.
pub fn polynomial_fit(xs: &[f64], ys: &[f64], degree: usize) -> Result<PolyFit> {
    if xs.len() != ys.len() || xs.len() <= degree {
        return Err(Error::Configuration(format!(
            "a degree {degree} fit needs more than {degree} samples, got {}",
            xs.len()
        )));
    }
    // scale the abscissa for conditioning
    let scale = xs.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(f64::MIN_POSITIVE);
    let a = DMatrix::from_fn(xs.len(), degree + 1, |i, k| (xs[i] / scale).powi(k as i32));
    let b = DVector::from_column_slice(ys);
    let sol = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::Configuration(format!("least squares failed: {e}")))?;
    let res = &a * &sol - &b;
    Ok(PolyFit {
        coeffs: sol.iter().enumerate().map(|(k, c)| c / scale.powi(k as i32)).collect(),
        residual: (res.norm_squared() / xs.len() as f64).sqrt(),
    })
}

/// The default symmetric audit grid `±{0.005, 0.01, 0.02, 0.04}`.
pub fn default_s_grid() -> Vec<f64> {
    let half = [0.005, 0.01, 0.02, 0.04];
    half.iter().map(|s| -s).chain(half).collect()
}

/// Degree of the fit used to read off second-order coefficients.
pub const FIT_DEGREE: usize = 3;

/// Analytic and flow-based coefficients at one point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariationReport {
    pub point: SpherePoint,
    pub nu_abs: f64,
    pub first_coeff: f64,
    pub second_coeff: Option<f64>,
    /// Why `second_coeff` is missing, if it is.
    pub second_condition: Option<String>,
    pub fd_fit: PolyFit,
    /// `|fit s² coefficient − analytic| / |analytic|`.
    pub consistency: Option<f64>,
    pub equivariance_defect: f64,
}

/// Variation report at `q` from flow samples on `s_grid`.
pub fn variation_report(
    flow: &FlowMap,
    nu: &DeformationTensor,
    q: &SpherePoint,
    s_grid: &[f64],
    angles: &[f64],
) -> Result<VariationReport> {
    let u = flow.field().hamiltonian();
    let first = first_variation(nu, u, q)?;
    let (second_coeff, second_condition) = match second_variation(nu, u, q) {
        Ok(v) => (Some(v), None),
        Err(Error::Condition { hypothesis, detail }) => (None, Some(format!("{hypothesis}: {detail}"))),
        Err(e) => return Err(e),
    };
    let values = mu_abs_samples(flow, nu, q, s_grid)?;
    let fd_fit = polynomial_fit(s_grid, &values, FIT_DEGREE)?;
    let consistency = second_coeff.map(|c| (fd_fit.coeffs[2] - c).abs() / c.abs());
    let s_max = s_grid.iter().fold(0.0f64, |a, s| a.max(s.abs()));
    let equivariance_defect = equivariance_defect(flow, std::slice::from_ref(q), s_max, angles)?;
    Ok(VariationReport {
        point: *q,
        nu_abs: nu.abs(q)?,
        first_coeff: first.value,
        second_coeff,
        second_condition,
        fd_fit,
        consistency,
        equivariance_defect,
    })
}

/// Sign of a real number as a word.
pub fn sign_word(x: f64) -> &'static str {
    if x > 0.0 {
        "positive"
    } else if x < 0.0 {
        "negative"
    } else {
        "zero"
    }
}

/// Grid supremum of `|μ_{g_s}|` against the torus value of `|ν|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupComparison {
    pub s: f64,
    pub sup_mu: f64,
    pub nu_abs: f64,
}

/// The torus conditions evaluated as printed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrintedConditions {
    /// Largest `|Δu − H Re((w1w2/(w1bar w2bar)) W0² u)|` on the torus grid.
    pub system_first_row_w0: f64,
    /// The same with `W0bar²` in place of `W0²`.
    pub system_first_row_w0bar: f64,
    /// Smallest `|Re((w1w2/(w1bar w2bar)) W0² u)|` on the torus grid.
    pub system_second_row: f64,
    /// Largest `|Im((w1w2/(w1bar w2bar)) W0² u)|` on the sphere grid.
    pub system_third_row: f64,
    /// Polar rows at `r = √2/2` from exact radial derivatives.
    pub polar_rows: [f64; 3],
    /// `∂u/∂r` and `∂²u/∂r²` at `r = √2/2`.
    pub radial_derivatives: [f64; 2],
}

/// Outcome of the symmetry-breaking audit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub lambda: f64,
    pub h: f64,
    pub s_grid: Vec<f64>,
    /// Largest `|Im(conj(ν) W0bar² u)|` over the sphere grid.
    pub first_variation_residual: f64,
    /// `(1+|ν|²)|W0bar²u|² − conj(ν) W0bar²u Δu` at each torus point (real part).
    pub torus_brackets: Vec<f64>,
    pub printed: PrintedConditions,
    pub records: Vec<VariationReport>,
    pub max_consistency_gap: f64,
    /// Sign of the fitted `s²` coefficient, when all torus points agree.
    pub measured_sign: String,
    pub analytic_sign: String,
    /// Sign asserted for the torus bracket by the construction being audited.
    pub reference_sign: String,
    pub sup_vs_nu: Vec<SupComparison>,
    pub equivariance_defect: f64,
}

fn angular_factor(q: &SpherePoint) -> Complex64 {
    let (w1, w2) = (q.w1(), q.w2());
    w1 * w2 / (w1.conj() * w2.conj())
}

/// Audits the symmetry-breaking construction for stretch `lambda`.
///
/// `torus` are the points where second-order coefficients are compared,
/// `sphere` the points where the first-order condition is checked, and
/// `sup_grid` the points over which `sup |μ_{g_s}|` is taken for each `s`.
pub fn breaking_audit(
    params: crate::cr::InvariantFamilyParams,
    s_grid: &[f64],
    torus: &[SpherePoint],
    sphere: &[SpherePoint],
    sup_grid: &[SpherePoint],
    settings: FlowSettings,
) -> Result<AuditReport> {
    let lambda = params.lambda;
    if !(lambda > 1.0) {
        return Err(Error::InvalidParams(format!("the audit needs a stretch above 1, got {lambda}")));
    }
    let nu = DeformationTensor::invariant_family(params);
    let u = breaking_hamiltonian(lambda, Cutoff::default())?;
    let flow = FlowMap::new(crate::dynamics::hamiltonian_field(u.clone())?, settings)?;
    let h = torus_h(params.torus_nu_abs());

    let first_variation_residual = sphere
        .par_iter()
        .map(|q| {
            let d = crate::field::frame_derivatives(&u, &[&[W0Bar, W0Bar]], q)?[0];
            Ok((nu.value(q)?.conj() * d).im.abs())
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);

    let torus_brackets = torus
        .iter()
        .map(|q| Ok(torus_bracket(&nu, &u, q)?.re))
        .collect::<Result<Vec<f64>>>()?;

    let mut row1_w0: f64 = 0.0;
    let mut row1_w0bar: f64 = 0.0;
    let mut row2 = f64::INFINITY;
    for q in torus {
        let d = SecondOrderData::at(&u, q)?;
        let a = angular_factor(q);
        row1_w0 = row1_w0.max((d.laplacian() - h * (a * d.w0_2).re).norm());
        row1_w0bar = row1_w0bar.max((d.laplacian() - h * (a * d.w0bar2).re).norm());
        row2 = row2.min((a * d.w0_2).re.abs());
    }
    let row3 = sphere
        .par_iter()
        .map(|q| {
            let w = crate::field::frame_derivatives(&u, &[&[W0, W0]], q)?[0];
            Ok((angular_factor(q) * w).im.abs())
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .filter(|v| v.is_finite())
        .fold(0.0, f64::max);
    let printed = polar_system_rows(lambda, h).map(|(polar_rows, radial_derivatives)| PrintedConditions {
        system_first_row_w0: row1_w0,
        system_first_row_w0bar: row1_w0bar,
        system_second_row: row2,
        system_third_row: row3,
        polar_rows,
        radial_derivatives,
    })?;

    let angles = [0.7, 2.3];
    let records: Vec<VariationReport> = torus
        .par_iter()
        .enumerate()
        .map(|(index, q)| {
            variation_report(&flow, &nu, q, s_grid, &angles).map_err(|e| Error::AtGridPoint {
                index,
                point: q.to_string(),
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;
    let max_consistency_gap = records
        .iter()
        .map(|r| r.consistency.unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max);
    let agree = |xs: Vec<f64>| -> String {
        let first = xs.first().map(|x| sign_word(*x)).unwrap_or("zero");
        if xs.iter().all(|x| sign_word(*x) == first) {
            first.to_string()
        } else {
            "mixed".to_string()
        }
    };
    let measured_sign = agree(records.iter().map(|r| r.fd_fit.coeffs[2]).collect());
    let analytic_sign = agree(records.iter().map(|r| r.second_coeff.unwrap_or(f64::NAN)).collect());

    let nu_abs = params.torus_nu_abs();
    let sup_vs_nu = s_grid
        .iter()
        .map(|&s| {
            let d = max_dilatation(&flow, &nu, sup_grid, s)?;
            Ok(SupComparison { s, sup_mu: d.sup_mu, nu_abs })
        })
        .collect::<Result<_>>()?;
    let s_max = s_grid.iter().fold(0.0f64, |a, s| a.max(s.abs()));
    let equivariance_defect = equivariance_defect(&flow, torus, s_max, &angles)?;

    Ok(AuditReport {
        lambda,
        h,
        s_grid: s_grid.to_vec(),
        first_variation_residual,
        torus_brackets,
        printed,
        records,
        max_consistency_gap,
        measured_sign,
        analytic_sign,
        reference_sign: "negative".into(),
        sup_vs_nu,
        equivariance_defect,
    })
}

/// Rows of the polar system at `r = √2/2` for the radial Hamiltonian, and its
/// first two radial derivatives there.
pub fn polar_system_rows(lambda: f64, h: f64) -> Result<([f64; 3], [f64; 2])> {
    let u = breaking_hamiltonian(lambda, Cutoff::default())?;
    let ScalarField::Radial(profile) = u else {
        unreachable!("the breaking Hamiltonian is radial")
    };
    let d = profile.series(FRAC_1_SQRT_2).derivatives();
    let (ur, urr) = (d[1], d[2]);
    let r = FRAC_1_SQRT_2;
    // the Hamiltonian does not depend on the angle, so angular terms vanish
    let row1 = (1.0 - r * r * h) * urr + (1.0 / r - 2.0 * r + r * h) * ur;
    let row2 = r * r * urr - r * ur;
    let row3 = 0.0;
    Ok(([row1, row2, row3], [ur, urr]))
}

/// A finitely parameterized family of Hamiltonians.
pub struct HamiltonianFamily {
    pub name: String,
    pub initial: Vec<f64>,
    build: Box<dyn Fn(&[f64]) -> Result<ScalarField> + Send + Sync>,
}

impl HamiltonianFamily {
    pub fn new(
        name: impl Into<String>,
        initial: Vec<f64>,
        build: impl Fn(&[f64]) -> Result<ScalarField> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            initial,
            build: Box::new(build),
        }
    }

    pub fn build(&self, p: &[f64]) -> Result<ScalarField> {
        (self.build)(p)
    }

    /// `{c · u}` for a fixed `u`.
    pub fn multiples(name: impl Into<String>, u: ScalarField) -> Self {
        Self::new(name, vec![0.0], move |p| Ok(ScalarField::scaled(Complex64::new(p[0], 0.0), u.clone())))
    }

    /// The constants `{c}`.
    pub fn constants() -> Self {
        Self::new("constants", vec![0.0], |p| Ok(ScalarField::constant(p[0])))
    }
}

/// One accepted step of the descent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchStep {
    pub params: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResult {
    pub family: String,
    pub best: Vec<f64>,
    pub objective: f64,
    pub trace: Vec<SearchStep>,
    /// Parameter vectors whose objective could not be evaluated.
    pub excluded: Vec<Vec<f64>>,
    pub evaluations: usize,
}

/// Search settings: initial step, number of halvings and evaluation budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchSettings {
    pub step: f64,
    pub min_step: f64,
    pub max_evaluations: usize,
}

impl Default for SearchSettings {
    fn default() -> Self {
        Self {
            step: 0.5,
            min_step: 1e-3,
            max_evaluations: 200,
        }
    }
}

/// Coordinate descent on the grid supremum of `|μ_{g_s}|` over a family.
pub fn hamiltonian_search(
    family: &HamiltonianFamily,
    nu: &DeformationTensor,
    s: f64,
    grid: &[SpherePoint],
    flow_settings: FlowSettings,
    settings: SearchSettings,
) -> Result<SearchResult> {
    let evaluations = std::cell::Cell::new(0);
    let excluded = std::cell::RefCell::new(Vec::new());
    let objective = |p: &[f64]| -> Option<f64> {
        evaluations.set(evaluations.get() + 1);
        let value = family
            .build(p)
            .and_then(crate::dynamics::hamiltonian_field)
            .and_then(|f| FlowMap::new(f, flow_settings))
            .and_then(|flow| max_dilatation(&flow, nu, grid, s))
            .map(|d| d.sup_mu)
            .ok()
            .filter(|v| v.is_finite());
        if value.is_none() {
            excluded.borrow_mut().push(p.to_vec());
        }
        value
    };
    let mut best = family.initial.clone();
    let mut best_value = objective(&best).ok_or_else(|| {
        Error::Configuration(format!("objective is not finite at the initial parameters {best:?}"))
    })?;
    let mut trace = vec![SearchStep { params: best.clone(), objective: best_value }];
    let mut step = settings.step;
    while step >= settings.min_step {
        let mut improved = false;
        for k in 0..best.len() {
            for dir in [1.0, -1.0] {
                let mut p = best.clone();
                p[k] += dir * step;
                if let Some(v) = objective(&p) {
                    if v < best_value {
                        best = p;
                        best_value = v;
                        trace.push(SearchStep { params: best.clone(), objective: v });
                        improved = true;
                        break;
                    }
                }
            }
        }
        if !improved {
            step /= 2.0;
        }
        if evaluations.get() >= settings.max_evaluations {
            break;
        }
    }
    Ok(SearchResult {
        family: family.name.clone(),
        best,
        objective: best_value,
        trace,
        excluded: excluded.into_inner(),
        evaluations: evaluations.get(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cr::InvariantFamilyParams;
    use crate::sphere::poly::{Poly, W1};
    use approx::assert_abs_diff_eq;

    fn family(l: f64) -> DeformationTensor {
        DeformationTensor::invariant_family(InvariantFamilyParams::with_lambda(l).unwrap())
    }

    #[test]
    fn constants_have_no_variation() {
        let u = ScalarField::constant(2.5);
        let q = SpherePoint::clifford(0.3, 1.1);
        assert_eq!(coeff_a(&u, &q).unwrap(), Complex64::new(0.0, 0.0));
        assert!(coeff_b(&u, &q).unwrap().norm() < 1e-12);
        assert_eq!(first_variation(&family(2.0), &u, &q).unwrap().value, 0.0);
        assert_abs_diff_eq!(second_variation(&family(2.0), &u, &q).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn breaking_coefficients_for_stretch_two() {
        let (c1, c2) = breaking_coefficients(2.0).unwrap();
        assert_abs_diff_eq!(c1, 29.0 / 30.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c2, SQRT_2 / 4.0 * 59.0 / 15.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c2, 1.390644, epsilon = 1e-6);
        assert_abs_diff_eq!(torus_h(0.6), 59.0 / 15.0, epsilon = 1e-14);
    }

    #[test]
    fn radial_derivatives_at_the_torus() {
        let (_, d) = polar_system_rows(2.0, torus_h(0.6)).unwrap();
        assert_abs_diff_eq!(d[0], 29.0 / 30.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d[1], FRAC_1_SQRT_2 * 59.0 / 15.0, epsilon = 1e-12);
        let u = breaking_hamiltonian(2.0, Cutoff::default()).unwrap();
        assert_eq!(u.value(&SpherePoint::clifford(0.2, 0.3)).unwrap().norm(), 0.0);
    }

    #[test]
    fn polar_system_holds_at_the_torus() {
        let (rows, _) = polar_system_rows(2.0, torus_h(0.6)).unwrap();
        assert_abs_diff_eq!(rows[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rows[1], FRAC_1_SQRT_2, epsilon = 1e-12);
    }

    #[test]
    fn invalid_cutoffs_are_rejected() {
        let bad = Cutoff { outer: (0.45, 0.95), inner: (0.75, 0.85) };
        assert!(matches!(breaking_hamiltonian(2.0, bad), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn cutoff_is_smooth_and_bounded() {
        let c = Cutoff::default();
        let mut prev = 0.0;
        for k in 0..=200 {
            let r = 0.4 + 0.3 * k as f64 / 200.0;
            let v = c.series(r).value();
            assert!((0.0..=1.0).contains(&v));
            assert!(v >= prev - 1e-15);
            prev = v;
        }
        // derivatives match finite differences inside the ramp
        let r = 0.5;
        let d = c.series(r).derivatives();
        let e = 1e-5;
        let fd = (c.series(r + e).value() - c.series(r - e).value()) / (2.0 * e);
        assert_abs_diff_eq!(d[1], fd, epsilon = 1e-6);
    }

    #[test]
    fn second_variation_checks_its_hypotheses() {
        let u = ScalarField::polynomial(Poly::var(W1).real_part());
        // off the bump the structure is standard
        let pole = SpherePoint::from_torus_angles(0.1, 0.2, 0.3);
        let e = second_variation(&family(2.0), &u, &pole).unwrap_err();
        assert!(matches!(e, Error::Condition { ref hypothesis, .. } if hypothesis == "nu nonzero"));
        let cubic = &(&Poly::var(W1) * &Poly::var(W1)) * &Poly::var(crate::sphere::poly::W2BAR);
        let w = ScalarField::polynomial(cubic.real_part());
        let q = SpherePoint::from_torus_angles(0.7, 0.4, 1.3);
        let e = second_variation(&family(2.0), &w, &q).unwrap_err();
        assert!(matches!(e, Error::Condition { ref hypothesis, .. } if hypothesis == "first variation vanishes"));
        // a non-invariant coefficient fails the last hypothesis
        let skew = DeformationTensor::new(ScalarField::constant(0.3));
        let e = second_variation(&skew, &ScalarField::constant(1.0), &q).unwrap_err();
        assert!(matches!(e, Error::Condition { ref hypothesis, .. } if hypothesis == "circle-invariant structure"));
    }

    #[test]
    fn polynomial_fit_recovers_coefficients() {
        let xs: Vec<f64> = default_s_grid();
        let ys: Vec<f64> = xs.iter().map(|x| 0.6 + 0.1 * x - 2.0 * x * x + 3.0 * x * x * x).collect();
        let f = polynomial_fit(&xs, &ys, 3).unwrap();
        assert_abs_diff_eq!(f.coeffs[0], 0.6, epsilon = 1e-12);
        assert_abs_diff_eq!(f.coeffs[2], -2.0, epsilon = 1e-8);
        assert!(f.residual < 1e-13);
        assert!(polynomial_fit(&xs[..3], &ys[..3], 3).is_err());
    }
}
