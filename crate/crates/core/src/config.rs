//! Run configuration: a flat `key = value` file whose keys double as
//! command-line overrides.
//!
//! ```text
//! # comment
//! lambda = 2
//! s_grid = -0.04,-0.02,0.02,0.04
//! sphere_grid = 64x64
//! tol.structure_equation = 1e-9
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Serialize;

use crate::dynamics::{DEFAULT_STEPS_PER_UNIT, MIN_STEPS_PER_UNIT};
use crate::error::{Error, Result};
use crate::grid::SampleGrid;
use crate::hopf::DEFAULT_LIFT_STEPS;

/// Smallest grid extent per axis accepted for sphere grids.
pub const MIN_GRID_AXIS: usize = 8;
/// Smallest number of torus points accepted.
pub const MIN_TORUS_POINTS: usize = 16;
/// Largest flow time accepted anywhere.
pub const S_MAX: f64 = 1.0;

/// Default tolerances, keyed by check.
pub const DEFAULT_TOLERANCES: &[(&str, f64)] = &[
    ("abs_law_rel", 1e-4),
    ("cap_phase", 1e-3),
    ("contact_order_min", 3.5),
    ("cover_match", 1e-6),
    ("duality", 1e-12),
    ("expansion_slope_min", 1.9),
    ("fiber_contraction", 1e-12),
    ("first_condition", 1e-9),
    ("first_variation_degenerate", 1e-8),
    ("first_variation_rel", 1e-4),
    ("group_law", 1e-8),
    ("identity_dilatation", 1e-6),
    ("invariance", 1e-10),
    ("legendrian", 1e-8),
    ("lift_equivariance", 1e-6),
    ("lift_phase", 1e-4),
    ("coeff_b_rel", 1e-2),
    ("path_independence", 1e-5),
    ("pushforward", 1e-12),
    ("quotient_dilatation", 1e-10),
    ("radial_derivatives", 1e-12),
    ("rotation_flow", 1e-10),
    ("rotation_mu", 1e-8),
    ("search_constants", 1e-8),
    ("second_variation_rel", 1e-2),
    ("structure_equation", 1e-9),
    ("sup_nu", 1e-10),
    ("torus_gradient", 1e-9),
    ("torus_mean", 1e-8),
    ("torus_mean_breaking", 1e-10),
];

/// A grid extent written `NxM`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GridSize {
    pub n: usize,
    pub m: usize,
}

impl GridSize {
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::Configuration(format!("grid size must look like 64x64, got {s:?}"));
        let (n, m) = s.trim().split_once(['x', 'X']).ok_or_else(bad)?;
        Ok(Self {
            n: n.trim().parse().map_err(|_| bad())?,
            m: m.trim().parse().map_err(|_| bad())?,
        })
    }

    pub fn sphere(&self) -> Result<SampleGrid> {
        SampleGrid::sphere(self.n, self.m)
    }

    pub fn torus(&self) -> Result<SampleGrid> {
        SampleGrid::torus(self.n, self.m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub lambda: f64,
    pub bump_width: f64,
    pub steps_per_unit: usize,
    pub lift_steps: usize,
    /// Steps per lift inside a lifted base map.
    pub lift_map_steps: usize,
    pub sphere_grid: GridSize,
    pub torus_grid: GridSize,
    /// Grid for suprema of `|μ|` in the audit and the search.
    pub sup_grid: GridSize,
    pub s_grid: Vec<f64>,
    pub search_s: f64,
    pub search_evaluations: usize,
    pub random_points: usize,
    pub seed: u64,
    pub tolerances: BTreeMap<String, f64>,
    #[serde(skip)]
    pub out: PathBuf,
    #[serde(skip)]
    pub json: bool,
    #[serde(skip)]
    pub csv: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            lambda: 2.0,
            bump_width: crate::cr::DEFAULT_BUMP_WIDTH,
            steps_per_unit: DEFAULT_STEPS_PER_UNIT,
            lift_steps: DEFAULT_LIFT_STEPS,
            lift_map_steps: 1000,
            sphere_grid: GridSize { n: 64, m: 64 },
            torus_grid: GridSize { n: 4, m: 4 },
            sup_grid: GridSize { n: 16, m: 16 },
            s_grid: crate::variation::default_s_grid(),
            search_s: 0.04,
            search_evaluations: 40,
            random_points: 1000,
            seed: 20240611,
            tolerances: DEFAULT_TOLERANCES.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            out: PathBuf::from("crlab-out"),
            json: false,
            csv: false,
        }
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.trim()
        .parse()
        .map_err(|_| Error::Configuration(format!("{key}: expected a number, got {v:?}")))
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.trim()
        .parse()
        .map_err(|_| Error::Configuration(format!("{key}: expected a non-negative integer, got {v:?}")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(Error::Configuration(format!("{key}: expected true or false, got {other:?}"))),
    }
}

/// Parses `a,b,c` into numbers.
pub fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').filter(|s| !s.trim().is_empty()).map(|s| parse_f64(key, s)).collect()
}

impl RunConfig {
    /// Defaults overridden by the entries of a `key = value` text.
    pub fn from_kv(text: &str) -> Result<Self> {
        let mut c = Self::default();
        c.apply_kv(text)?;
        Ok(c)
    }

    pub fn apply_kv(&mut self, text: &str) -> Result<()> {
        for (k, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Configuration(format!("line {}: expected key = value, got {line:?}", k + 1)))?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    /// Sets one key. Dashes and underscores are interchangeable.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.replace('-', "_");
        if let Some(name) = key.strip_prefix("tol.") {
            if !self.tolerances.contains_key(name) {
                return Err(Error::Configuration(format!("unknown tolerance {name:?}")));
            }
            self.tolerances.insert(name.to_string(), parse_f64(&key, value)?);
            return Ok(());
        }
        match key.as_str() {
            "lambda" => self.lambda = parse_f64(&key, value)?,
            "bump_width" => self.bump_width = parse_f64(&key, value)?,
            "steps_per_unit" => self.steps_per_unit = parse_usize(&key, value)?,
            "lift_steps" => self.lift_steps = parse_usize(&key, value)?,
            "lift_map_steps" => self.lift_map_steps = parse_usize(&key, value)?,
            "sphere_grid" | "grid" => self.sphere_grid = GridSize::parse(value)?,
            "torus_grid" => self.torus_grid = GridSize::parse(value)?,
            "sup_grid" => self.sup_grid = GridSize::parse(value)?,
            "s_grid" => self.s_grid = parse_list(&key, value)?,
            "search_s" => self.search_s = parse_f64(&key, value)?,
            "search_evaluations" => self.search_evaluations = parse_usize(&key, value)?,
            "random_points" => self.random_points = parse_usize(&key, value)?,
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| Error::Configuration(format!("seed: expected an integer, got {value:?}")))?
            }
            "out" => self.out = PathBuf::from(value),
            "json" => self.json = parse_bool(&key, value)?,
            "csv" => self.csv = parse_bool(&key, value)?,
            other => return Err(Error::Configuration(format!("unknown configuration key {other:?}"))),
        }
        Ok(())
    }

    pub fn tol(&self, name: &str) -> f64 {
        self.tolerances[name]
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Configuration(m));
        if !(self.lambda.is_finite() && self.lambda >= 1.0) {
            return fail(format!("lambda must be finite and >= 1, got {}", self.lambda));
        }
        crate::cr::InvariantFamilyParams::new(self.lambda, self.bump_width)?;
        if self.steps_per_unit < MIN_STEPS_PER_UNIT {
            return fail(format!("steps_per_unit must be at least {MIN_STEPS_PER_UNIT}"));
        }
        if self.lift_steps < 4 || self.lift_map_steps < 4 {
            return fail("lift step counts must be at least 4".into());
        }
        for (name, g) in [("sphere_grid", self.sphere_grid), ("sup_grid", self.sup_grid)] {
            if g.n < MIN_GRID_AXIS || g.m < MIN_GRID_AXIS {
                return fail(format!("{name} must have at least {MIN_GRID_AXIS} samples per axis"));
            }
        }
        if self.torus_grid.n * self.torus_grid.m < MIN_TORUS_POINTS || self.torus_grid.n < 2 || self.torus_grid.m < 2 {
            return fail(format!("torus_grid must have at least {MIN_TORUS_POINTS} points"));
        }
        if self.s_grid.len() < 5 {
            return fail("s_grid needs at least five values for a cubic fit".into());
        }
        for &s in self.s_grid.iter().chain([&self.search_s]) {
            if !(s.is_finite() && s != 0.0 && s.abs() <= S_MAX) {
                return fail(format!("flow times must be nonzero with |s| <= {S_MAX}, got {s}"));
            }
        }
        if self.random_points == 0 {
            return fail("random_points must be positive".into());
        }
        for (k, v) in &self.tolerances {
            if !(*v > 0.0 && v.is_finite()) {
                return fail(format!("tolerance {k} must be positive, got {v}"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_files() {
        let c = RunConfig::from_kv(
            "# test\nlambda = 3\ns_grid = -0.1, 0.1,0.2\n sphere-grid = 16x8\ntol.duality = 1e-10\ncsv = true\n",
        )
        .unwrap();
        assert_eq!(c.lambda, 3.0);
        assert_eq!(c.s_grid, vec![-0.1, 0.1, 0.2]);
        assert_eq!(c.sphere_grid, GridSize { n: 16, m: 8 });
        assert_eq!(c.tol("duality"), 1e-10);
        assert!(c.csv);
    }

    #[test]
    fn rejects_unknown_and_malformed_entries() {
        assert!(RunConfig::from_kv("nope = 1").is_err());
        assert!(RunConfig::from_kv("lambda").is_err());
        assert!(RunConfig::from_kv("lambda = two").is_err());
        assert!(RunConfig::from_kv("tol.nope = 1").is_err());
        assert!(RunConfig::from_kv("sphere_grid = 64").is_err());
    }

    #[test]
    fn validation() {
        assert!(RunConfig::default().validate().is_ok());
        let mut c = RunConfig::default();
        c.sphere_grid = GridSize { n: 4, m: 64 };
        assert!(c.validate().is_err());
        let mut c = RunConfig::default();
        c.s_grid = vec![0.1, 0.2, 0.3, 0.4, 2.0];
        assert!(c.validate().is_err());
        let mut c = RunConfig::default();
        c.set("tol.duality", "0").unwrap();
        assert!(c.validate().is_err());
    }
}
