use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;

use super::chart::{
    add3, angle_between, chart_to_unit, chart_velocity_to_unit, cross, dot, norm3, normalize3, scale3,
    Chart, RiemannSpherePoint, Vec3,
};
use crate::error::{Error, Result};

/// Evaluator taking the parameter and whether to approach a breakpoint from the right.
type CurveFn = dyn Fn(f64, bool) -> (Vec3, Vec3) + Send + Sync;

/// A piecewise C¹ curve on the base sphere, evaluated as a unit vector in `R³`
/// with its velocity. `breaks` lists interior parameters where the velocity
/// may jump.
#[derive(Clone)]
pub struct BaseCurve {
    eval: Arc<CurveFn>,
    pub t0: f64,
    pub t1: f64,
    pub closed: bool,
    pub breaks: Vec<f64>,
}

impl std::fmt::Debug for BaseCurve {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BaseCurve")
            .field("t0", &self.t0)
            .field("t1", &self.t1)
            .field("closed", &self.closed)
            .finish()
    }
}

impl BaseCurve {
    pub fn from_fn(t0: f64, t1: f64, closed: bool, f: impl Fn(f64) -> (Vec3, Vec3) + Send + Sync + 'static) -> Self {
        Self {
            eval: Arc::new(move |t, _| f(t)),
            t0,
            t1,
            closed,
            breaks: Vec::new(),
        }
    }

    pub fn eval(&self, t: f64) -> (Vec3, Vec3) {
        (self.eval)(t, false)
    }

    /// Evaluation with the one-sided velocity from the right at breakpoints.
    pub fn eval_right(&self, t: f64) -> (Vec3, Vec3) {
        (self.eval)(t, true)
    }

    /// Smooth pieces `[a, b]` covering the parameter range.
    pub fn pieces(&self) -> Vec<(f64, f64)> {
        let mut knots = vec![self.t0];
        knots.extend(self.breaks.iter().copied().filter(|b| *b > self.t0 && *b < self.t1));
        knots.push(self.t1);
        knots.windows(2).map(|w| (w[0], w[1])).collect()
    }

    pub fn start(&self) -> Vec3 {
        self.eval(self.t0).0
    }

    pub fn end(&self) -> Vec3 {
        self.eval(self.t1).0
    }

    /// The constant curve at `n`.
    pub fn constant(n: Vec3) -> Self {
        Self::from_fn(0.0, 1.0, true, move |_| (n, [0.0; 3]))
    }

    /// `|c − center| = radius` in a chart, traversed once on `t ∈ [0, 1]`,
    /// counterclockwise in the chart coordinate when `positive`.
    pub fn chart_circle(chart: Chart, center: Complex64, radius: f64, positive: bool) -> Self {
        let sign = if positive { 1.0 } else { -1.0 };
        Self::from_fn(0.0, 1.0, true, move |t| {
            let e = Complex64::from_polar(1.0, sign * TAU * t);
            let c = center + radius * e;
            let cdot = radius * e * Complex64::new(0.0, sign * TAU);
            (chart_to_unit(chart, c), chart_velocity_to_unit(chart, c, cdot))
        })
    }

    /// The circle about `center` through `through`, starting and ending at `through`.
    ///
    /// When `positive` the enclosed cap around `center` lies on the left, so the
    /// loop is positively oriented as the boundary of that cap.
    pub fn cap_loop(center: Vec3, through: Vec3, positive: bool) -> Result<Self> {
        let alpha = angle_between(center, through);
        if alpha < 1e-12 || alpha > std::f64::consts::PI - 1e-12 {
            return Err(Error::PathConstruction(format!(
                "cap loop through its own center or antipode (radius {alpha})"
            )));
        }
        let e1 = normalize3(add3(through, scale3(-dot(through, center), center)));
        let e2 = cross(center, e1);
        let sign = if positive { 1.0 } else { -1.0 };
        let (ca, sa) = (alpha.cos(), alpha.sin());
        Ok(Self::from_fn(0.0, 1.0, true, move |t| {
            let (s, c) = (sign * TAU * t).sin_cos();
            let n = add3(scale3(ca, center), scale3(sa, add3(scale3(c, e1), scale3(s, e2))));
            let v = scale3(sa * sign * TAU, add3(scale3(-s, e1), scale3(c, e2)));
            (n, v)
        }))
    }

    /// Shortest great-circle arc from `a` to `b` on `t ∈ [0, 1]`.
    pub fn great_circle(a: Vec3, b: Vec3) -> Result<Self> {
        let omega = angle_between(a, b);
        if omega < 1e-15 {
            return Ok(Self::from_fn(0.0, 1.0, false, move |_| (a, [0.0; 3])));
        }
        if omega > std::f64::consts::PI - 1e-9 {
            return Err(Error::PathConstruction("great circle between antipodal points is not unique".into()));
        }
        let e = normalize3(add3(b, scale3(-dot(a, b), a)));
        Ok(Self::from_fn(0.0, 1.0, false, move |t| {
            let (s, c) = (omega * t).sin_cos();
            let n = add3(scale3(c, a), scale3(s, e));
            let v = scale3(omega, add3(scale3(-s, a), scale3(c, e)));
            (n, v)
        }))
    }

    /// Great-circle path from `a` to `b` through `via`.
    pub fn broken_great_circle(a: Vec3, via: Vec3, b: Vec3) -> Result<Self> {
        Ok(Self::great_circle(a, via)?.then(&Self::great_circle(via, b)?))
    }

    /// This curve followed by `next`, reparametrized onto `[0, 2]`.
    pub fn then(&self, next: &BaseCurve) -> Self {
        let (a, b) = (self.clone(), next.clone());
        let closed = norm3(add3(a.start(), scale3(-1.0, b.end()))) < 1e-12;
        let to_unit = |c: &BaseCurve, offset: f64| -> Vec<f64> {
            c.breaks.iter().map(|t| offset + (t - c.t0) / (c.t1 - c.t0)).collect()
        };
        let mut breaks = to_unit(&a, 0.0);
        breaks.push(1.0);
        breaks.extend(to_unit(&b, 1.0));
        Self {
            eval: Arc::new(move |t, right| {
                let first = t < 1.0 || (t == 1.0 && !right);
                let (c, s) = if first { (&a, t) } else { (&b, t - 1.0) };
                let len = c.t1 - c.t0;
                let (n, v) = (c.eval)(c.t0 + s * len, right);
                (n, scale3(len, v))
            }),
            t0: 0.0,
            t1: 2.0,
            closed,
            breaks,
        }
    }

    /// Image of the curve under a map with known differential.
    pub fn mapped(&self, f: Arc<dyn Fn(Vec3, Vec3) -> (Vec3, Vec3) + Send + Sync>) -> Self {
        let c = self.clone();
        Self {
            eval: Arc::new(move |t, right| {
                let (n, v) = (c.eval)(t, right);
                f(n, v)
            }),
            t0: self.t0,
            t1: self.t1,
            closed: self.closed,
            breaks: self.breaks.clone(),
        }
    }

    /// Interpolates sampled points with a piecewise cubic Hermite curve in `R³`
    /// projected back to the sphere.
    pub fn from_samples(params: Vec<f64>, points: Vec<RiemannSpherePoint>, closed: bool) -> Result<Self> {
        if params.len() != points.len() || params.len() < 2 {
            return Err(Error::Resampling("need at least two samples with matching parameters".into()));
        }
        if params.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Resampling("sample parameters must be strictly increasing".into()));
        }
        let xs: Vec<Vec3> = points.iter().map(|p| p.to_unit()).collect();
        let n = xs.len();
        let slope = |i: usize, j: usize| scale3(1.0 / (params[j] - params[i]), add3(xs[j], scale3(-1.0, xs[i])));
        let ds: Vec<Vec3> = (0..n)
            .map(|i| match i {
                0 => slope(0, 1),
                i if i == n - 1 => slope(n - 2, n - 1),
                i => slope(i - 1, i + 1),
            })
            .collect();
        let (t0, t1) = (params[0], params[n - 1]);
        Ok(Self::from_fn(t0, t1, closed, move |t| {
            let k = match params.binary_search_by(|p| p.total_cmp(&t)) {
                Ok(k) => k.min(n - 2),
                Err(k) => k.clamp(1, n - 1) - 1,
            };
            let dt = params[k + 1] - params[k];
            let s = (t - params[k]) / dt;
            let (s2, s3) = (s * s, s * s * s);
            let h = [2.0 * s3 - 3.0 * s2 + 1.0, s3 - 2.0 * s2 + s, -2.0 * s3 + 3.0 * s2, s3 - s2];
            let dh = [6.0 * s2 - 6.0 * s, 3.0 * s2 - 4.0 * s + 1.0, -6.0 * s2 + 6.0 * s, 3.0 * s2 - 2.0 * s];
            let comb = |w: [f64; 4], scale: f64| -> Vec3 {
                std::array::from_fn(|m| {
                    (w[0] * xs[k][m] + w[1] * dt * ds[k][m] + w[2] * xs[k + 1][m] + w[3] * dt * ds[k + 1][m]) * scale
                })
            };
            let p = comb(h, 1.0);
            let dp = comb(dh, 1.0 / dt);
            let r = norm3(p);
            let u = scale3(1.0 / r, p);
            let v = scale3(1.0 / r, add3(dp, scale3(-dot(u, dp), u)));
            (u, v)
        }))
    }

    /// `n + 1` equally spaced samples with chart coordinates.
    pub fn sample(&self, n: usize) -> Vec<(f64, RiemannSpherePoint)> {
        (0..=n)
            .map(|k| {
                let t = self.t0 + (self.t1 - self.t0) * k as f64 / n as f64;
                (t, RiemannSpherePoint::from_unit(self.eval(t).0))
            })
            .collect()
    }

    /// CSV with columns `parameter,chart,re,im`.
    pub fn to_csv(&self, n: usize) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let _ = w.write_record(["parameter", "chart", "re", "im"]);
        for (t, p) in self.sample(n) {
            let _ = w.write_record([t.to_string(), p.chart.id().to_string(), p.coord.re.to_string(), p.coord.im.to_string()]);
        }
        String::from_utf8(w.into_inner().expect("in-memory writer")).expect("CSV is UTF-8")
    }

    /// Reads the CSV written by [`BaseCurve::to_csv`].
    pub fn from_csv(text: &str, closed: bool) -> Result<Self> {
        #[derive(serde::Deserialize)]
        struct Row {
            parameter: f64,
            chart: String,
            re: f64,
            im: f64,
        }
        let mut params = Vec::new();
        let mut points = Vec::new();
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        for (k, row) in reader.deserialize::<Row>().enumerate() {
            let row = row.map_err(|e| Error::Resampling(format!("malformed curve row {}: {e}", k + 2)))?;
            params.push(row.parameter);
            points.push(RiemannSpherePoint::new(Chart::from_id(&row.chart)?, Complex64::new(row.re, row.im)));
        }
        Self::from_samples(params, points, closed)
    }
}
