use std::f64::consts::PI;

use num_complex::Complex64;

use super::chart::{project_unit, unit_to_chart, unit_velocity_to_chart, Chart, RiemannSpherePoint};
use super::curve::BaseCurve;
use crate::error::{Error, Result};
use crate::sphere::SpherePoint;

/// Switch charts once the coordinate modulus exceeds this.
const CHART_SWITCH: f64 = 2.0;
/// Beyond this modulus a step has jumped too far inside one chart.
const CHART_LIMIT: f64 = 4.0;

/// Default number of RK4 steps for a lift.
pub const DEFAULT_LIFT_STEPS: usize = 10_000;

/// A horizontal lift of a base curve.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftResult {
    pub params: Vec<f64>,
    pub samples: Vec<SpherePoint>,
    /// Fiber angle of each sample against the section of the chart in use there.
    pub phases: Vec<f64>,
    /// Net fiber angle along the curve, measured against the initial chart's
    /// section; for a closed curve the end point is `start` rotated by it.
    pub phase: f64,
    /// `phase` reduced to `(−π, π]`.
    pub phase_class: f64,
    /// `max |<eta, lift'>|`, with the derivative taken by finite differences of the samples.
    pub legendrian_defect: f64,
}

impl LiftResult {
    pub fn end(&self) -> SpherePoint {
        *self.samples.last().expect("a lift has samples")
    }

    /// CSV with columns `t,re_w1,im_w1,re_w2,im_w2,phi`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let _ = w.write_record(["t", "re_w1", "im_w1", "re_w2", "im_w2", "phi"]);
        for ((t, q), phi) in self.params.iter().zip(&self.samples).zip(&self.phases) {
            let row = [*t, q.w1().re, q.w1().im, q.w2().re, q.w2().im, *phi];
            let _ = w.write_record(row.map(|v| v.to_string()));
        }
        String::from_utf8(w.into_inner().expect("in-memory writer")).expect("CSV is UTF-8")
    }
}

/// Reduces an angle to `(−π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

fn section_in(chart: Chart, c: Complex64) -> (Complex64, Complex64) {
    let s = (1.0 + c.norm_sqr()).sqrt();
    let one = Complex64::new(1.0, 0.0);
    match chart {
        Chart::South => (one / s, c / s),
        Chart::North => (c / s, one / s),
    }
}

fn chart_state(curve: &BaseCurve, chart: Chart, t: f64, right: bool) -> Result<(Complex64, Complex64)> {
    let (n, v) = if right { curve.eval_right(t) } else { curve.eval(t) };
    let c = unit_to_chart(chart, n)
        .filter(|c| c.norm() <= CHART_LIMIT)
        .ok_or_else(|| {
            Error::Resampling(format!(
                "curve left the {} chart within one step at t = {t}; use more steps",
                chart.id()
            ))
        })?;
    Ok((c, unit_velocity_to_chart(chart, n, v)))
}

/// `φ' = −Im(conj(c) c') / (1 + |c|²)`: the connection along the local section.
fn connection(c: Complex64, cdot: Complex64) -> f64 {
    -(c.conj() * cdot).im / (1.0 + c.norm_sqr())
}

/// Horizontal lift of `curve` starting at `start`, integrating the fiber angle
/// along the local sections of the two charts with RK4.
pub fn horizontal_lift(curve: &BaseCurve, start: &SpherePoint, steps: usize) -> Result<LiftResult> {
    if steps < 4 {
        return Err(Error::Configuration(format!("a lift needs at least 4 steps, got {steps}")));
    }
    let p0 = curve.start();
    let ps = project_unit(start);
    let gap = super::chart::angle_between(p0, ps);
    if gap > 1e-9 {
        return Err(Error::Domain(format!(
            "start point projects {gap:e} away from the curve's initial point"
        )));
    }
    let first_chart = RiemannSpherePoint::from_unit(p0).chart;
    let mut chart = first_chart;
    let (c0, _) = chart_state(curve, chart, curve.t0, false)?;
    let (a1, a2) = section_in(chart, c0);
    // rotate the section so that it passes through `start`
    let offset = (a1.conj() * start.w1() + a2.conj() * start.w2()).arg();

    let mut phi = 0.0;
    let mut params = Vec::with_capacity(steps + 1);
    let mut samples = Vec::with_capacity(steps + 1);
    let mut phases = Vec::with_capacity(steps + 1);
    let mut push = |t: f64, chart: Chart, c: Complex64, phi: f64| -> Result<()> {
        let (a1, a2) = section_in(chart, c);
        let e = Complex64::from_polar(1.0, phi + offset);
        params.push(t);
        samples.push(SpherePoint::normalize(e * a1, e * a2)?);
        phases.push(phi);
        Ok(())
    };
    push(curve.t0, chart, c0, phi)?;

    // each smooth piece gets its own uniform grid so no step straddles a corner
    let total = curve.t1 - curve.t0;
    let mut pieces = Vec::new();
    let mut first = 0;
    for (a, b) in curve.pieces() {
        let n = ((steps as f64 * (b - a) / total).round() as usize).max(4);
        let h = (b - a) / n as f64;
        pieces.push((first, n, h));
        first += n;
        for k in 0..n {
            let t = a + h * k as f64;
            let (c, _) = chart_state(curve, chart, t, true)?;
            if c.norm() > CHART_SWITCH {
                // alpha_current = e^{i arg c} alpha_other
                phi += c.arg();
                chart = chart.other();
            }
            let g = |t: f64, right: bool| -> Result<f64> {
                let (c, cdot) = chart_state(curve, chart, t, right)?;
                Ok(connection(c, cdot))
            };
            let t_next = if k + 1 == n { b } else { t + h };
            // phi' does not depend on phi, so RK4 reduces to Simpson's rule
            phi += h / 6.0 * (g(t, true)? + 4.0 * g(t + 0.5 * h, false)? + g(t_next, false)?);
            let (c_next, _) = chart_state(curve, chart, t_next, false)?;
            push(t_next, chart, c_next, phi)?;
        }
    }

    let mut phase = phi;
    if chart != first_chart {
        let (c, _) = chart_state(curve, chart, curve.t1, false)?;
        phase += c.arg();
    }

    let legendrian_defect = pieces
        .iter()
        .map(|&(first, n, h)| legendrian_defect(&samples[first..=first + n], h))
        .fold(0.0, f64::max);
    Ok(LiftResult {
        params,
        samples,
        phases,
        phase,
        phase_class: wrap_angle(phase),
        legendrian_defect,
    })
}

fn legendrian_defect(samples: &[SpherePoint], h: f64) -> f64 {
    let n = samples.len();
    let at = |k: usize| [samples[k].w1(), samples[k].w2()];
    let comb = |idx: [usize; 5], w: [f64; 5]| -> [Complex64; 2] {
        let mut out = [Complex64::new(0.0, 0.0); 2];
        for (i, wi) in idx.iter().zip(w) {
            let v = at(*i);
            out[0] += v[0] * wi;
            out[1] += v[1] * wi;
        }
        [out[0] / (12.0 * h), out[1] / (12.0 * h)]
    };
    let mut worst: f64 = 0.0;
    for k in 0..n {
        let d = if k >= 2 && k + 2 < n {
            comb([k - 2, k - 1, k, k + 1, k + 2], [1.0, -8.0, 0.0, 8.0, -1.0])
        } else if k == 0 {
            comb([0, 1, 2, 3, 4], [-25.0, 48.0, -36.0, 16.0, -3.0])
        } else if k == 1 {
            comb([0, 1, 2, 3, 4], [-3.0, -10.0, 18.0, -6.0, 1.0])
        } else if k == n - 1 {
            comb([n - 1, n - 2, n - 3, n - 4, n - 5], [25.0, -48.0, 36.0, -16.0, 3.0])
        } else {
            comb([n - 1, n - 2, n - 3, n - 4, n - 5], [3.0, 10.0, -18.0, 6.0, -1.0])
        };
        let w = at(k);
        let eta = (w[0].conj() * d[0] + w[1].conj() * d[1]).im;
        worst = worst.max(eta.abs());
    }
    worst
}
