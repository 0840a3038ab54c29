//! The verification and audit pipelines behind each command.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::config::RunConfig;
use crate::cr::{pushforward_consistency, DeformationTensor, InvariantFamilyParams};
use crate::dynamics::{
    beltrami, contact_defect, hamiltonian_field, max_dilatation, FlowMap, FlowSettings,
};
use crate::error::{Error, Result};
use crate::field::{frame_derivatives, FrameVector, RadialProfile, ScalarField};
use crate::hopf::{
    cap_area, fiber_contraction, horizontal_lift, lift_base_map, quotient_dilatation, section,
    structure_equation_residual, wrap_angle, AreaForm, AxisRotation, BaseCurve, BaseMap, Chart, IdentityMap,
    MetricOnS2, Region, RiemannSpherePoint,
};
use crate::jet::Series1;
use crate::report::{csv_table, Check, Report};
use crate::sphere::poly::{Poly, W1, W2BAR};
use crate::sphere::{frame_at, frame_bracket_identities, orientation_check, SpherePoint};
use crate::variation::{
    breaking_audit, breaking_hamiltonian, coeff_a, coeff_b, first_variation, hamiltonian_search, nu_s_samples,
    polar_system_rows, polynomial_fit, richardson_abs_slope, richardson_slope, sign_word, torus_h,
    torus_mean_first_variation, Cutoff, FirstOrder, HamiltonianFamily, SearchSettings,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Command {
    VerifyFrame,
    VerifyStructureEq,
    Lift,
    Flow,
    Beltrami,
    Variation,
    BreakingAudit,
    Search,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::VerifyFrame,
        Command::VerifyStructureEq,
        Command::Lift,
        Command::Flow,
        Command::Beltrami,
        Command::Variation,
        Command::BreakingAudit,
        Command::Search,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::VerifyFrame => "verify-frame",
            Command::VerifyStructureEq => "verify-structure-eq",
            Command::Lift => "lift",
            Command::Flow => "flow",
            Command::Beltrami => "beltrami",
            Command::Variation => "variation",
            Command::BreakingAudit => "breaking-audit",
            Command::Search => "search",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Configuration(format!("unknown command {s:?}")))
    }
}

/// A report and the CSV files that go with it.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub report: Report,
    /// `(file name, contents)`.
    pub csv: Vec<(String, String)>,
}

impl Output {
    /// Writes `<command>.json` and, when `with_csv`, the CSV files into `dir`.
    pub fn write(&self, dir: &Path, with_csv: bool) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let path = dir.join(format!("{}.json", self.report.command));
        std::fs::write(&path, self.report.to_json())?;
        written.push(path);
        if with_csv {
            for (name, text) in &self.csv {
                let path = dir.join(name);
                std::fs::write(&path, text)?;
                written.push(path);
            }
        }
        Ok(written)
    }
}

/// Runs one command under `config`.
pub fn run(command: Command, config: &RunConfig) -> Result<Output> {
    config.validate()?;
    let (checks, data, csv) = match command {
        Command::VerifyFrame => verify_frame(config)?,
        Command::VerifyStructureEq => verify_structure_eq(config)?,
        Command::Lift => lift(config)?,
        Command::Flow => flow(config)?,
        Command::Beltrami => beltrami_checks(config)?,
        Command::Variation => variation(config)?,
        Command::BreakingAudit => audit(config)?,
        Command::Search => search(config)?,
    };
    Ok(Output {
        report: Report::new(command.name(), config, checks, data),
        csv,
    })
}

type Parts = (Vec<Check>, serde_json::Value, Vec<(String, String)>);

fn rng(config: &RunConfig, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(config.seed);
    r.set_stream(stream);
    r
}

fn random_points(config: &RunConfig, stream: u64, n: usize) -> Vec<SpherePoint> {
    let mut r = rng(config, stream);
    (0..n).map(|_| SpherePoint::random(&mut r)).collect()
}

fn family(config: &RunConfig) -> Result<(InvariantFamilyParams, DeformationTensor)> {
    let p = InvariantFamilyParams::new(config.lambda, config.bump_width)?;
    Ok((p, DeformationTensor::invariant_family(p)))
}

fn flow_settings(config: &RunConfig) -> FlowSettings {
    FlowSettings {
        steps_per_unit: config.steps_per_unit,
        ..FlowSettings::default()
    }
}

fn flow_of(u: ScalarField, config: &RunConfig) -> Result<FlowMap> {
    FlowMap::new(hamiltonian_field(u)?, flow_settings(config))
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    // NaN propagates so that a failed evaluation cannot pass a check
    values.into_iter().fold(0.0, |a, v| if v.is_nan() || a.is_nan() { f64::NAN } else { a.max(v) })
}

fn verify_frame(config: &RunConfig) -> Result<Parts> {
    let mut checks: Vec<Check> = frame_bracket_identities()
        .into_iter()
        .map(|(name, ok)| Check::exact(format!("bracket {name}"), json!({"arithmetic": "exact"}), ok))
        .collect();
    let points = random_points(config, 1, config.random_points);
    let inputs = json!({"random_points": config.random_points, "seed": config.seed});
    let expected = [[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]];
    let duality = max_of(points.iter().map(|q| {
        let m = frame_at(q).duality_matrix();
        max_of((0..2).flat_map(|r| (0..3).map(move |c| (r, c))).map(|(r, c)| (m[r][c] - expected[r][c]).norm()))
    }));
    checks.push(Check::at_most("duality of {psi, eta} and {W0, W0bar, T}", inputs.clone(), duality, config.tol("duality")));
    let levi = max_of(points.iter().map(|q| {
        let f = frame_at(q);
        (f.deta(&f.w0, &f.w0bar) - Complex64::i()).norm()
    }));
    checks.push(Check::at_most("<d eta, W0 ^ W0bar> = i", inputs.clone(), levi, config.tol("duality")));
    let orientation = max_of(points.iter().map(|q| (orientation_check(q) - 2.0).abs()));
    checks.push(Check::at_most("<d eta, X ^ J0 X> = 2", inputs, orientation, config.tol("duality")));
    Ok((checks, json!({}), Vec::new()))
}

fn verify_structure_eq(config: &RunConfig) -> Result<Parts> {
    let points = random_points(config, 2, config.random_points);
    let inputs = json!({"random_points": config.random_points, "seed": config.seed});
    let residuals = points.par_iter().map(structure_equation_residual).collect::<Result<Vec<f64>>>()?;
    let residual = max_of(residuals);
    let contraction = max_of(points.iter().map(fiber_contraction));
    let area = cap_area(Region::WholeSphere, AreaForm::HalfOmega0)?;
    let checks = vec![
        Check::at_most("d eta = p*(omega0 / 2) on horizontal pairs", inputs.clone(), residual, config.tol("structure_equation")),
        Check::at_most("T contracts d eta to zero", inputs, contraction, config.tol("fiber_contraction")),
        Check::reported("total omega0/2 area minus 2 pi", json!({"form": "omega0/2"}), area - TAU),
    ];
    Ok((checks, json!({"half_omega0_total_area": area}), Vec::new()))
}

fn lift(config: &RunConfig) -> Result<Parts> {
    let steps = config.lift_steps;
    let mut checks = Vec::new();

    let circle = BaseCurve::chart_circle(Chart::South, Complex64::new(0.0, 0.0), 1.0, true);
    let start = section(&RiemannSpherePoint::from_z(Complex64::new(1.0, 0.0)));
    let unit = horizontal_lift(&circle, &start, steps)?;
    checks.push(Check::at_most(
        "phase of the lift of |z| = 1 is pi mod 2 pi",
        json!({"steps": steps}),
        wrap_angle(unit.phase - PI).abs(),
        config.tol("lift_phase"),
    ));

    let mut r = rng(config, 3);
    let mut caps = Vec::new();
    let mut cap_error: f64 = 0.0;
    let mut legendrian = unit.legendrian_defect;
    for _ in 0..10 {
        let center = Complex64::from_polar(r.random_range(0.0..1.5), r.random_range(0.0..TAU));
        let radius = r.random_range(0.1..1.0);
        let curve = BaseCurve::chart_circle(Chart::South, center, radius, true);
        let start = section(&RiemannSpherePoint::from_z(center + radius));
        let l = horizontal_lift(&curve, &start, steps)?;
        let area = cap_area(Region::Disk { chart: Chart::South, center, radius }, AreaForm::HalfOmega0)?;
        let err = wrap_angle(l.phase + area).abs();
        cap_error = cap_error.max(err);
        legendrian = legendrian.max(l.legendrian_defect);
        caps.push(json!({
            "center": [center.re, center.im],
            "radius": radius,
            "phase": l.phase,
            "area": area,
            "error": err,
            "legendrian_defect": l.legendrian_defect,
        }));
    }
    checks.push(Check::at_most(
        "phase + omega0/2 area = 0 mod 2 pi on 10 random caps",
        json!({"steps": steps, "caps": 10, "seed": config.seed}),
        cap_error,
        config.tol("cap_phase"),
    ));
    checks.push(Check::at_most(
        "Legendrian defect of every lift",
        json!({"steps": steps, "lifts": 11}),
        legendrian,
        config.tol("legendrian"),
    ));

    let anchor = SpherePoint::from_torus_angles(0.4, 0.1, 0.3);
    let targets = random_points(config, 4, 20);
    let angles = [0.7, 2.0];
    let mut maps = Vec::new();
    let rot = AxisRotation { alpha: 0.9 };
    for (name, lifted) in [
        ("identity", MapLift::measure(IdentityMap, anchor, anchor, |q| *q, &targets, &angles, config)?),
        ("z-axis rotation", MapLift::measure(rot, anchor, rot.cover(&anchor), |q| rot.cover(q), &targets, &angles, config)?),
    ] {
        let inputs = json!({"map": name, "endpoints": targets.len(), "steps": config.lift_map_steps});
        checks.push(Check::at_most(format!("path independence of the {name} lift"), inputs.clone(), lifted.path, config.tol("path_independence")));
        checks.push(Check::at_most(format!("circle equivariance of the {name} lift"), inputs.clone(), lifted.equivariance, config.tol("lift_equivariance")));
        checks.push(
            Check::at_most(format!("{name} lift matches its unitary cover"), inputs, lifted.cover, config.tol("cover_match"))
                .with_note(format!("global fiber rotation {:.3e}", lifted.rotation)),
        );
        maps.push(json!({"map": name, "path_independence": lifted.path, "equivariance": lifted.equivariance, "cover_distance": lifted.cover, "fiber_rotation": lifted.rotation}));
    }

    let data = json!({
        "unit_circle": {"phase": unit.phase, "phase_class": unit.phase_class, "legendrian_defect": unit.legendrian_defect},
        "caps": caps,
        "maps": maps,
    });
    let csv = vec![
        ("lift.csv".to_string(), unit.to_csv()),
        ("curve.csv".to_string(), circle.to_csv(400)),
    ];
    Ok((checks, data, csv))
}

struct MapLift {
    path: f64,
    equivariance: f64,
    cover: f64,
    rotation: f64,
}

impl MapLift {
    fn measure<F: BaseMap + 'static>(
        map: F,
        anchor: SpherePoint,
        anchor_image: SpherePoint,
        cover: impl Fn(&SpherePoint) -> SpherePoint + Sync,
        targets: &[SpherePoint],
        angles: &[f64],
        config: &RunConfig,
    ) -> Result<Self> {
        let f = lift_base_map(map, anchor, anchor_image, config.lift_map_steps)?;
        let per_target = targets
            .par_iter()
            .map(|q| {
                let fq = f.apply(q)?;
                let path = f.path_independence_defect(q)?;
                let eq = angles.iter().try_fold(0.0f64, |acc, &phi| {
                    Ok::<_, Error>(acc.max(f.apply(&q.rotate(phi))?.distance(&fq.rotate(phi))))
                })?;
                Ok((fq, path, eq))
            })
            .collect::<Result<Vec<_>>>()?;
        let rotation = cover(&targets[0]).hermitian(&per_target[0].0).arg();
        let cover_distance = max_of(targets.iter().zip(&per_target).map(|(q, (fq, _, _))| cover(q).rotate(rotation).distance(fq)));
        Ok(Self {
            path: max_of(per_target.iter().map(|t| t.1)),
            equivariance: max_of(per_target.iter().map(|t| t.2)),
            cover: cover_distance,
            rotation,
        })
    }
}

fn beltrami_checks(config: &RunConfig) -> Result<Parts> {
    let (params, nu) = family(config)?;
    let lambda2 = config.lambda * config.lambda;
    let sphere = config.sphere_grid.sphere()?.points();
    let torus = config.torus_grid.torus()?.points();
    let grid_inputs = json!({"grid": "sphere", "size": [config.sphere_grid.n, config.sphere_grid.m], "lambda": config.lambda});
    let mut checks = Vec::new();

    let invariance = sphere.par_iter().map(|q| Ok(nu.invariance_residual(q)?.norm())).collect::<Result<Vec<f64>>>()?;
    checks.push(Check::at_most("T nu = 4i nu on the sphere grid", grid_inputs.clone(), max_of(invariance), config.tol("invariance")));

    let gradient = torus
        .iter()
        .map(|q| {
            let (a, b) = nu.frame_gradient(q)?;
            Ok(a.norm() + b.norm())
        })
        .collect::<Result<Vec<f64>>>()?;
    checks.push(Check::at_most(
        "|W0 nu| + |W0bar nu| on the torus grid",
        json!({"grid": "torus", "size": [config.torus_grid.n, config.torus_grid.m]}),
        max_of(gradient),
        config.tol("torus_gradient"),
    ));

    let abs = sphere.par_iter().map(|q| nu.abs(q)).collect::<Result<Vec<f64>>>()?;
    let sup_nu = max_of(abs.iter().copied());
    checks.push(
        Check::at_most("sup |nu| = (L^2 - 1)/(L^2 + 1)", grid_inputs.clone(), (sup_nu - params.torus_nu_abs()).abs(), config.tol("sup_nu"))
            .with_note(format!("sup |nu| = {sup_nu}")),
    );

    let pushforward = sphere
        .par_iter()
        .filter(|q| q.w1().norm() > 1e-6)
        .map(|q| pushforward_consistency(&nu, q))
        .collect::<Result<Vec<f64>>>()?;
    checks.push(Check::at_most(
        "Dp carries the structure to the stretched base metric",
        grid_inputs.clone(),
        max_of(pushforward),
        config.tol("pushforward"),
    ));

    let identity = flow_of(ScalarField::constant(0.0), config)?;
    let k = max_dilatation(&identity, &nu, &sphere, 0.0)?;
    let on_torus = (k.point.w1().norm_sqr() - 0.5).abs() < 1e-12;
    checks.push(
        Check::at_most("grid sup of K(id) = L^2", grid_inputs.clone(), (k.k - lambda2).abs(), config.tol("identity_dilatation"))
            .with_note(format!("K = {}", k.k)),
    );
    checks.push(Check::exact("K(id) is attained on the torus", json!({"argmax": k.point.to_string()}), on_torus));

    let equator = RiemannSpherePoint::from_z(Complex64::new(1.0, 0.0));
    let kq = quotient_dilatation(&IdentityMap, MetricOnS2::Stretched(params), MetricOnS2::Round, &equator)?;
    checks.push(Check::at_most(
        "quotient dilatation of id at the equator = L^2",
        json!({"z": [1.0, 0.0]}),
        (kq - lambda2).abs(),
        config.tol("quotient_dilatation"),
    ));

    let rotation = flow_of(ScalarField::constant(1.0), config)?;
    let points = random_points(config, 5, 50);
    let mut flow_err: f64 = 0.0;
    let mut mu_err: f64 = 0.0;
    for s in [0.1, 0.5, 1.0] {
        let e = points
            .par_iter()
            .map(|q| {
                let g = rotation.point(q, s)?;
                let mu = beltrami(&rotation, &nu, q, s)?.norm();
                Ok((g.distance(&q.rotate(s)), (mu - nu.abs(q)?).abs()))
            })
            .collect::<Result<Vec<(f64, f64)>>>()?;
        flow_err = max_of(e.iter().map(|x| x.0).chain([flow_err]));
        mu_err = max_of(e.iter().map(|x| x.1).chain([mu_err]));
    }
    let rot_inputs = json!({"hamiltonian": "1", "s": [0.1, 0.5, 1.0], "points": points.len()});
    checks.push(Check::at_most("flow of u = 1 is (e^{is} w1, e^{is} w2)", rot_inputs.clone(), flow_err, config.tol("rotation_flow")));
    checks.push(Check::at_most("|mu| is preserved by the rotation flow", rot_inputs, mu_err, config.tol("rotation_mu")));

    // profile along a meridian for plotting
    let rows: Vec<Vec<f64>> = (0..=64)
        .map(|i| {
            let chi = PI / 2.0 * i as f64 / 64.0;
            let q = SpherePoint::from_torus_angles(chi, 0.0, 0.0);
            let m = nu.abs(&q)?;
            Ok(vec![chi, m, crate::cr::dilatation(m)?])
        })
        .collect::<Result<_>>()?;
    let data = json!({
        "sup_nu": sup_nu,
        "identity_dilatation": k.k,
        "argmax": k.point,
        "quotient_dilatation": kq,
    });
    Ok((checks, data, vec![("beltrami.csv".into(), csv_table(&["chi", "nu_abs", "dilatation"], rows))]))
}

fn generic_hamiltonian() -> ScalarField {
    let p = &(&Poly::var(W1) * &Poly::var(W1)) * &Poly::var(W2BAR);
    ScalarField::polynomial(p.real_part())
}

fn re_w1() -> ScalarField {
    ScalarField::polynomial(Poly::var(W1).real_part())
}

fn flow(config: &RunConfig) -> Result<Parts> {
    let u = generic_hamiltonian();
    let base = flow_of(u.clone(), config)?;
    let points = random_points(config, 6, 8);
    let mut checks = Vec::new();

    let field = hamiltonian_field(u.clone())?;
    let recovered = points
        .iter()
        .map(|q| {
            let v = field.at(q)?;
            Ok((frame_at(q).eta(&v.as_complex()) - u.value(q)?).norm())
        })
        .collect::<Result<Vec<f64>>>()?;
    checks.push(Check::at_most("<eta, V> recovers the Hamiltonian", json!({"hamiltonian": "Re(w1^2 w2bar)"}), max_of(recovered), config.tol("duality")));

    let spu = [16usize, 32, 64];
    let defects = spu
        .iter()
        .map(|&n| {
            let f = base.with_steps_per_unit(n)?;
            let d = points.iter().map(|q| contact_defect(&f, q, 1.0)).collect::<Result<Vec<f64>>>()?;
            Ok(max_of(d))
        })
        .collect::<Result<Vec<f64>>>()?;
    let orders: Vec<f64> = defects.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let order = orders.iter().copied().fold(f64::INFINITY, f64::min);
    checks.push(
        Check::at_least(
            "observed order of the contact defect under step halving",
            json!({"s": 1.0, "steps_per_unit": spu, "hamiltonian": "Re(w1^2 w2bar)"}),
            order,
            config.tol("contact_order_min"),
        )
        .with_note(format!("defects {defects:?}")),
    );

    let group = points
        .par_iter()
        .map(|q| {
            let a = base.point(&base.point(q, 0.2)?, 0.1)?;
            Ok(a.distance(&base.point(q, 0.3)?))
        })
        .collect::<Result<Vec<f64>>>()?;
    checks.push(Check::at_most(
        "g_0.1 o g_0.2 = g_0.3",
        json!({"steps_per_unit": config.steps_per_unit, "points": points.len()}),
        max_of(group),
        config.tol("group_law"),
    ));

    let rows = spu.iter().zip(&defects).map(|(n, d)| vec![*n as f64, *d]);
    let data = json!({"contact_defects": defects, "orders": orders});
    Ok((checks, data, vec![("contact_defect.csv".into(), csv_table(&["steps_per_unit", "defect"], rows))]))
}

/// Points with `χ` drawn from `range` and uniform angles.
fn band_points(config: &RunConfig, stream: u64, n: usize, range: std::ops::Range<f64>) -> Vec<SpherePoint> {
    let mut r = rng(config, stream);
    (0..n)
        .map(|_| {
            let chi = r.random_range(range.clone());
            SpherePoint::from_torus_angles(chi, r.random_range(0.0..TAU), r.random_range(0.0..TAU))
        })
        .collect()
}

fn variation(config: &RunConfig) -> Result<Parts> {
    let (params, nu) = family(config)?;
    let mut checks = Vec::new();
    // |θ − π/2| < w with θ = 2χ keeps ν away from zero
    let half = 0.8 * params.bump_width / 2.0;
    let inside = band_points(config, 7, 20, (std::f64::consts::FRAC_PI_4 - half)..(std::f64::consts::FRAC_PI_4 + half));
    let edge = (std::f64::consts::FRAC_PI_4 - params.bump_width / 2.0).max(0.06);
    let outside = band_points(config, 8, 10, 0.05..edge);

    let gen = generic_hamiltonian();
    let gen_flow = flow_of(gen.clone(), config)?;
    let lin_flow = flow_of(re_w1(), config)?;
    let h = 1e-2;

    let slopes = |flow: &FlowMap, u: &ScalarField| -> Result<Vec<(f64, f64)>> {
        inside
            .par_iter()
            .map(|q| Ok((first_variation(&nu, u, q)?.value, richardson_slope(flow, &nu, q, h)?)))
            .collect()
    };
    let lin = slopes(&lin_flow, &re_w1())?;
    checks.push(
        Check::at_most(
            "Re(w1): first variation and flow slope both vanish",
            json!({"points": inside.len(), "h": h}),
            max_of(lin.iter().map(|(a, s)| a.abs().max(s.abs()))),
            config.tol("first_variation_degenerate"),
        )
        .with_note("W0bar^2 annihilates Re(w1)"),
    );
    let gen_slopes = slopes(&gen_flow, &gen)?;
    let rel = max_of(gen_slopes.iter().map(|(a, s)| (s - a).abs() / a.abs()));
    checks.push(Check::at_most(
        "Re(w1^2 w2bar): first variation vs Richardson slope (relative)",
        json!({"points": inside.len(), "h": h}),
        rel,
        config.tol("first_variation_rel"),
    ));

    let abs_law = outside
        .par_iter()
        .map(|q| {
            let fv = first_variation(&nu, &gen, q)?;
            debug_assert_eq!(fv.kind, FirstOrder::AbsoluteValue);
            let slope = richardson_abs_slope(&gen_flow, &nu, q, 1e-3)?;
            Ok((fv.value, slope))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    checks.push(Check::at_most(
        "nu = 0: |mu| = |W0bar^2 u| |s| slope (relative)",
        json!({"points": outside.len(), "h": 1e-3, "hamiltonian": "Re(w1^2 w2bar)"}),
        max_of(abs_law.iter().map(|(a, s)| (s - a).abs() / a.abs())),
        config.tol("abs_law_rel"),
    ));

    // expansion error decays like s^2 at a point with nonzero first variation
    let q = inside[0];
    let fv = first_variation(&nu, &gen, &q)?.value;
    let n0 = nu.abs(&q)?;
    let ss = [1e-3, 2e-3, 5e-3, 1e-2];
    let errs = crate::variation::mu_abs_samples(&gen_flow, &nu, &q, &ss)?
        .into_iter()
        .zip(ss)
        .map(|(m, s)| (m - n0 - fv * s).abs())
        .collect::<Vec<f64>>();
    let logs: Vec<f64> = ss.iter().map(|s| s.ln()).collect();
    let fit = polynomial_fit(&logs, &errs.iter().map(|e| e.ln()).collect::<Vec<_>>(), 1)?;
    checks.push(Check::at_least(
        "log-log slope of the first-order expansion error",
        json!({"s": ss, "point": q.to_string()}),
        fit.coeffs[1],
        config.tol("expansion_slope_min"),
    ));

    let u = breaking_hamiltonian(config.lambda, Cutoff::default())?;
    let sphere = config.sphere_grid.sphere()?.points();
    let cond = sphere
        .par_iter()
        .map(|q| {
            let w = frame_derivatives(&u, &[&[FrameVector::W0Bar, FrameVector::W0Bar]], q)?[0];
            Ok((nu.value(q)?.conj() * w).im.abs())
        })
        .collect::<Result<Vec<f64>>>()?;
    checks.push(Check::at_most(
        "Im(conj(nu) W0bar^2 u) = 0 for the breaking Hamiltonian",
        json!({"grid": "sphere", "size": [config.sphere_grid.n, config.sphere_grid.m], "lambda": config.lambda}),
        max_of(cond),
        config.tol("first_condition"),
    ));
    let hh = torus_h(params.torus_nu_abs());
    let (_, d) = polar_system_rows(config.lambda, hh)?;
    let radial = (d[0] - (hh / 2.0 - 1.0)).abs().max((d[1] - FRAC_1_SQRT_2 * hh).abs());
    checks.push(
        Check::at_most(
            "radial derivatives at r = 1/sqrt(2) are H/2 - 1 and H/sqrt(2)",
            json!({"H": hh}),
            radial,
            config.tol("radial_derivatives"),
        )
        .with_note(format!("u_r = {}, u_rr = {}", d[0], d[1])),
    );

    let n = 32;
    let mean_breaking = torus_mean_first_variation(&nu, &u, n)?;
    checks.push(Check::at_most("torus mean of the first-order term, breaking u", json!({"n": n}), mean_breaking.abs(), config.tol("torus_mean_breaking")));
    let sin_theta = ScalarField::quotient(
        ScalarField::polynomial(Poly::var(W1).imag_part()),
        ScalarField::radial(RadialProfile::new("r", Series1::variable)),
    );
    let mean_sin = torus_mean_first_variation(&nu, &sin_theta, n)?;
    let torus = config.torus_grid.torus()?.points();
    let pointwise = max_of(
        torus
            .iter()
            .map(|q| {
                let w = frame_derivatives(&sin_theta, &[&[FrameVector::W0Bar, FrameVector::W0Bar]], q)?[0];
                Ok((nu.value(q)?.conj() * w).im.abs())
            })
            .collect::<Result<Vec<f64>>>()?,
    );
    checks.push(
        Check::at_most("torus mean of the first-order term, u = sin(arg w1)", json!({"n": n}), mean_sin.abs(), config.tol("torus_mean"))
            .with_note(format!("pointwise sup {pointwise:.3e}")),
    );

    // coefficients of ν_s against flow fits at the torus points
    let flow68 = flow_of(u.clone(), config)?;
    let mut a_gap: f64 = 0.0;
    let mut b_gap: f64 = 0.0;
    for q in &torus {
        let ns = nu_s_samples(&flow68, &nu, q, &config.s_grid)?;
        let re = polynomial_fit(&config.s_grid, &ns.iter().map(|z| z.re).collect::<Vec<_>>(), 3)?;
        let im = polynomial_fit(&config.s_grid, &ns.iter().map(|z| z.im).collect::<Vec<_>>(), 3)?;
        let a = coeff_a(&u, q)?;
        let b = coeff_b(&u, q)?;
        a_gap = a_gap.max((Complex64::new(re.coeffs[1], im.coeffs[1]) - a).norm() / a.norm());
        b_gap = b_gap.max((Complex64::new(re.coeffs[2], im.coeffs[2]) - b).norm() / b.norm());
    }
    let fit_inputs = json!({"grid": "torus", "s_grid": config.s_grid, "hamiltonian": "breaking"});
    checks.push(Check::at_most("coefficient a of nu_s vs flow fit (relative)", fit_inputs.clone(), a_gap, config.tol("first_variation_rel")));
    checks.push(Check::at_most("coefficient b of nu_s vs flow fit (relative)", fit_inputs, b_gap, config.tol("coeff_b_rel")));

    let rows = inside.iter().zip(&gen_slopes).map(|(q, (a, s))| {
        vec![q.w1().norm().acos(), q.w1().arg(), q.w2().arg(), nu.abs(q).unwrap_or(f64::NAN), *a, *s]
    });
    let data = json!({
        "generic": gen_slopes.iter().map(|(a, s)| json!({"analytic": a, "slope": s})).collect::<Vec<_>>(),
        "abs_law": abs_law.iter().map(|(a, s)| json!({"analytic": a, "slope": s})).collect::<Vec<_>>(),
        "expansion_errors": errs,
        "H": hh,
        "radial_derivatives": d,
        "torus_means": {"breaking": mean_breaking, "sin_theta": mean_sin},
    });
    Ok((
        checks,
        data,
        vec![("first_variation.csv".into(), csv_table(&["chi", "theta", "phi", "nu_abs", "analytic", "flow_slope"], rows))],
    ))
}

fn audit(config: &RunConfig) -> Result<Parts> {
    let (params, _) = family(config)?;
    let torus = config.torus_grid.torus()?.points();
    let sphere = config.sphere_grid.sphere()?.points();
    let sup_grid = config.sup_grid.sphere()?.points();
    let a = breaking_audit(params, &config.s_grid, &torus, &sphere, &sup_grid, flow_settings(config))?;
    let mut checks = vec![
        Check::at_most(
            "Im(conj(nu) W0bar^2 u) = 0 on the sphere grid",
            json!({"grid": "sphere", "size": [config.sphere_grid.n, config.sphere_grid.m]}),
            a.first_variation_residual,
            config.tol("first_condition"),
        ),
        Check::at_most(
            "second-order coefficient: analytic vs flow fit (relative)",
            json!({"grid": "torus", "points": torus.len(), "s_grid": config.s_grid, "fit_degree": crate::variation::FIT_DEGREE}),
            a.max_consistency_gap,
            config.tol("second_variation_rel"),
        ),
    ];
    let mean = |v: Vec<f64>| v.iter().sum::<f64>() / v.len() as f64;
    let fitted = mean(a.records.iter().map(|r| r.fd_fit.coeffs[2]).collect());
    checks.push(
        Check::reported("fitted s^2 coefficient of |mu| on the torus", json!({"points": torus.len()}), fitted)
            .with_note(format!("measured sign {}, reference sign {}", a.measured_sign, a.reference_sign)),
    );
    let bracket = mean(a.torus_brackets.clone());
    checks.push(
        Check::reported("torus bracket (1+|nu|^2)|W0bar^2 u|^2 - conj(nu) W0bar^2 u Lap u", json!({}), bracket)
            .with_note(format!("sign {}, reference negative", sign_word(bracket))),
    );
    let p = &a.printed;
    checks.push(Check::reported("torus system first row as printed (W0^2 u)", json!({}), p.system_first_row_w0));
    checks.push(Check::reported("torus system first row with W0bar^2 u", json!({}), p.system_first_row_w0bar));
    checks.push(Check::reported("torus system second row (min |.|)", json!({}), p.system_second_row));
    checks.push(Check::reported("torus system third row on the sphere grid", json!({}), p.system_third_row));
    for (k, v) in p.polar_rows.iter().enumerate() {
        checks.push(Check::reported(format!("polar system row {} at r = 1/sqrt(2)", k + 1), json!({}), *v));
    }
    for c in &a.sup_vs_nu {
        checks.push(
            Check::reported(format!("sup |mu| - |nu| at s = {}", c.s), json!({"grid": "sphere", "size": [config.sup_grid.n, config.sup_grid.m]}), c.sup_mu - c.nu_abs)
                .with_note(format!("sup |mu| = {}", c.sup_mu)),
        );
    }
    let s_max = config.s_grid.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    checks.push(Check::reported("equivariance defect of g_s", json!({"s": s_max, "angles": [0.7, 2.3]}), a.equivariance_defect));

    let rows = a.sup_vs_nu.iter().map(|c| vec![c.s, c.sup_mu]);
    let points = a.records.iter().enumerate().map(|(k, r)| {
        vec![k as f64, r.second_coeff.unwrap_or(f64::NAN), r.fd_fit.coeffs[2], r.consistency.unwrap_or(f64::NAN)]
    });
    let csv = vec![
        ("audit.csv".to_string(), csv_table(&["s", "sup_mu"], rows)),
        ("audit_points.csv".to_string(), csv_table(&["index", "analytic", "fitted", "gap"], points)),
    ];
    Ok((checks, serde_json::to_value(&a).expect("audit serializes"), csv))
}

fn search(config: &RunConfig) -> Result<Parts> {
    let (_, nu) = family(config)?;
    let grid = config.sup_grid.sphere()?.points();
    let settings = SearchSettings {
        max_evaluations: config.search_evaluations,
        ..SearchSettings::default()
    };
    let u = breaking_hamiltonian(config.lambda, Cutoff::default())?;
    let multiples = HamiltonianFamily::multiples("c * breaking", u);
    let r = hamiltonian_search(&multiples, &nu, config.search_s, &grid, flow_settings(config), settings)?;
    let inputs = json!({"family": r.family, "s": config.search_s, "grid": [config.sup_grid.n, config.sup_grid.m]});
    let monotone = r.trace.windows(2).all(|w| w[1].objective <= w[0].objective);
    let mut checks = vec![
        Check::exact("search never ends above c = 0", inputs.clone(), r.objective <= r.trace[0].objective)
            .with_note(format!("best c = {:?}, sup |mu| = {}", r.best, r.objective)),
        Check::exact("descent trace is non-increasing", inputs, monotone),
    ];
    let constants = hamiltonian_search(&HamiltonianFamily::constants(), &nu, config.search_s, &grid, flow_settings(config), settings)?;
    let sup_nu = max_of(grid.iter().map(|q| nu.abs(q)).collect::<Result<Vec<f64>>>()?);
    checks.push(Check::at_most(
        "constants: best sup |mu| = sup |nu|",
        json!({"family": "constants", "s": config.search_s}),
        (constants.objective - sup_nu).abs(),
        config.tol("search_constants"),
    ));
    let rows = r.trace.iter().enumerate().map(|(k, s)| vec![k as f64, s.params[0], s.objective]);
    let data = json!({"multiples": r, "constants": constants, "sup_nu": sup_nu});
    Ok((checks, data, vec![("search.csv".into(), csv_table(&["step", "c", "sup_mu"], rows))]))
}
