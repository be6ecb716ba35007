use std::collections::BTreeMap;

use anyhow::{anyhow, bail, Result};
use harmap_core::{BoundaryMap, ConformalMetric, DiskGrid, SolverConfig};

/// What the process was asked to do; the config file is validated against
/// the preconditions of exactly the modules this subcommand touches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Solve,
    Diagnose,
    Rescale,
    Kernels,
}

/// Where the diagnosed map comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapSource {
    /// Run the solver on the configured metric and boundary.
    Solve,
    /// The closed-form fixture `w = z |z|^alpha`.
    Alpha,
}

/// A fully validated run: every numeric field has already been checked
/// against the module preconditions, so the run stage only reports
/// computation outcomes, never input problems.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub subcommand: Subcommand,
    pub metric: ConformalMetric,
    pub metric_kind: String,
    pub boundary: BoundaryMap,
    pub grid: DiskGrid,
    pub solver: SolverConfig,
    pub map_source: MapSource,
    pub alpha: f64,
    pub theta0: f64,
    pub sequence_count: usize,
    /// Optional portable-graymap dump of |w|, named relative to the output
    /// directory.
    pub raster: Option<String>,
}

impl RunConfig {
    /// True when this run feeds a boundary problem to the solver (directly
    /// or to produce the map under inspection).
    pub fn needs_solve(&self) -> bool {
        match self.subcommand {
            Subcommand::Solve | Subcommand::Rescale => true,
            Subcommand::Diagnose => self.map_source == MapSource::Solve,
            Subcommand::Kernels => false,
        }
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .map_err(|_| anyhow!("config key `{key}`: `{value}` is not a number"))
}

fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value
        .parse::<usize>()
        .map_err(|_| anyhow!("config key `{key}`: `{value}` is not a non-negative integer"))
}

/// Index of a boundary coefficient key like `boundary.a3`, or `None` for
/// keys outside that family.
fn coefficient_index(key: &str, family: &str) -> Option<usize> {
    let rest = key.strip_prefix(family)?;
    rest.parse::<usize>().ok().filter(|&n| n >= 1)
}

/// Parse and validate a flat `key = value` document. Lines starting with
/// `#` and blank lines are skipped; every key is namespaced by module and
/// unknown or repeated keys are rejected by name.
pub fn parse_config(subcommand: Subcommand, text: &str) -> Result<RunConfig> {
    let mut seen: BTreeMap<String, String> = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {}: expected `key = value`, got `{line}`", lineno + 1))?;
        let key = key.trim().to_owned();
        let value = value.trim().to_owned();
        if seen.insert(key.clone(), value).is_some() {
            bail!("duplicate config key `{key}`");
        }
    }

    let mut sin_coeffs: BTreeMap<usize, f64> = BTreeMap::new();
    let mut cos_coeffs: BTreeMap<usize, f64> = BTreeMap::new();
    let mut metric_kind = "euclidean".to_owned();
    let mut c = [1.0f64, 0.0, 0.0];
    let mut c_given = false;
    let mut nr = 64usize;
    let mut ntheta = 128usize;
    let mut solver = SolverConfig::default();
    let mut map_source = MapSource::Solve;
    let mut alpha = 1.0f64;
    let mut theta0 = 0.0f64;
    let mut sequence_count = 6usize;
    let mut raster = None;

    for (key, value) in &seen {
        match key.as_str() {
            "metric.kind" => metric_kind = value.clone(),
            "metric.c0" | "metric.c1" | "metric.c2" => {
                let slot = key.as_bytes()[key.len() - 1] - b'0';
                c[slot as usize] = parse_f64(key, value)?;
                c_given = true;
            }
            "grid.nr" => nr = parse_usize(key, value)?,
            "grid.ntheta" => ntheta = parse_usize(key, value)?,
            "solver.tol" => solver.tolerance = parse_f64(key, value)?,
            "solver.max_iterations" => solver.max_iterations = parse_usize(key, value)?,
            "solver.damping" => solver.damping = parse_f64(key, value)?,
            "map.kind" => {
                map_source = match value.as_str() {
                    "solve" => MapSource::Solve,
                    "alpha" => MapSource::Alpha,
                    other => bail!("config key `map.kind`: unknown map source `{other}` (expected solve or alpha)"),
                }
            }
            "map.alpha" => alpha = parse_f64(key, value)?,
            "rescale.theta0" => theta0 = parse_f64(key, value)?,
            "rescale.count" => sequence_count = parse_usize(key, value)?,
            "output.raster" => raster = Some(value.clone()),
            _ => {
                if let Some(n) = coefficient_index(key, "boundary.a") {
                    sin_coeffs.insert(n, parse_f64(key, value)?);
                } else if let Some(n) = coefficient_index(key, "boundary.b") {
                    cos_coeffs.insert(n, parse_f64(key, value)?);
                } else {
                    bail!("unknown config key `{key}`");
                }
            }
        }
    }

    let metric = match metric_kind.as_str() {
        "euclidean" => ConformalMetric::euclidean(),
        "spherical" => ConformalMetric::spherical(),
        "hyperbolic" => ConformalMetric::hyperbolic(),
        "radial" => ConformalMetric::radial(c[0], c[1], c[2])
            .map_err(|e| anyhow!("config keys `metric.c0..c2`: {e}"))?,
        other => bail!("config key `metric.kind`: unknown metric `{other}`"),
    };
    if c_given && metric_kind != "radial" {
        bail!("config keys `metric.c0..c2` only apply to metric.kind = radial, not `{metric_kind}`");
    }

    let dense = |coeffs: &BTreeMap<usize, f64>| -> Vec<f64> {
        let top = coeffs.keys().next_back().copied().unwrap_or(0);
        (1..=top).map(|n| coeffs.get(&n).copied().unwrap_or(0.0)).collect()
    };
    let boundary = BoundaryMap::new(dense(&sin_coeffs), dense(&cos_coeffs)).map_err(|e| {
        anyhow!("boundary coefficients fail the circle-homeomorphism check: {e}")
    })?;

    let grid = DiskGrid::new(nr, ntheta).map_err(|e| anyhow!("config keys `grid.*`: {e}"))?;
    solver
        .validate()
        .map_err(|e| anyhow!("config keys `solver.*`: {e}"))?;

    if !(alpha > 0.0 && alpha.is_finite()) {
        bail!("config key `map.alpha`: must be positive and finite, got {alpha}");
    }
    if !theta0.is_finite() {
        bail!("config key `rescale.theta0`: must be finite");
    }
    if sequence_count == 0 || sequence_count > 12 {
        bail!(
            "config key `rescale.count`: {sequence_count} is outside 1..=12; deeper members sit \
             within interpolation error of the rim"
        );
    }

    let config = RunConfig {
        subcommand,
        metric,
        metric_kind,
        boundary,
        grid,
        solver,
        map_source,
        alpha,
        theta0,
        sequence_count,
        raster,
    };

    if config.needs_solve() && !config.metric.is_approximately_analytic() {
        bail!(
            "config key `metric.kind`: the {} metric fails the approximate-analyticity gate \
             (sup |(log rho^2)_w| is unbounded on the disk), so the solver's contraction \
             estimate does not apply; choose a metric with a finite bound",
            config.metric_kind
        );
    }

    Ok(config)
}
