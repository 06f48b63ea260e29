//! Line-oriented `key=value` configuration files: episode scenarios,
//! benchmark suite configs and ablation configs. Unknown keys are
//! rejected so typos fail loudly.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::geom::Point;
use crate::sim::Params;
use crate::strategy::{ablation_variant, Strategy, ABLATION_VARIANTS};

/// One episode setup: map, start pose, termination threshold, strategy
/// and parameter overrides.
#[derive(Clone, Debug)]
pub struct Scenario {
    /// File stem, used as the map label in reports.
    pub name: String,
    pub map_path: PathBuf,
    pub start: Point,
    /// Fixed heading; None lets the seed draw one.
    pub start_heading: Option<f64>,
    pub coverage_threshold: f64,
    pub strategy: String,
    pub seed: u64,
    pub max_time: f64,
    pub params: Params,
}

fn kv_lines(text: &str) -> impl Iterator<Item = (usize, &str, &str)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            return None;
        }
        let (k, v) = line.split_once('=')?;
        Some((i + 1, k.trim(), v.trim()))
    })
}

fn parse_num<T: std::str::FromStr>(lineno: usize, key: &str, v: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>()
        .map_err(|e| Error::Config(format!("line {lineno}: {key}={v}: {e}")))
}

impl Scenario {
    /// Parse scenario text; `base_dir` anchors relative map paths; `name`
    /// labels the scenario in reports.
    pub fn parse(text: &str, base_dir: &Path, name: &str) -> Result<Scenario> {
        let mut map_path: Option<PathBuf> = None;
        let mut start: Option<Point> = None;
        let mut start_heading = None;
        let mut coverage_threshold = 0.99;
        let mut strategy = "dart".to_string();
        let mut seed = 0u64;
        let mut max_time = 1800.0;
        let mut params = Params::default();
        for (lineno, key, value) in kv_lines(text) {
            match key {
                "map" => {
                    let p = PathBuf::from(value);
                    map_path = Some(if p.is_absolute() {
                        p
                    } else {
                        base_dir.join(p)
                    });
                }
                "start" => {
                    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
                    if parts.len() != 2 && parts.len() != 3 {
                        return Err(Error::Config(format!(
                            "line {lineno}: start must be x,y or x,y,theta"
                        )));
                    }
                    start = Some(Point::new(
                        parse_num(lineno, "start.x", parts[0])?,
                        parse_num(lineno, "start.y", parts[1])?,
                    ));
                    if parts.len() == 3 {
                        start_heading = Some(parse_num(lineno, "start.theta", parts[2])?);
                    }
                }
                "coverage_threshold" => {
                    coverage_threshold = parse_num(lineno, key, value)?;
                }
                "strategy" => {
                    if Strategy::by_name(value).is_none() {
                        return Err(Error::Config(format!(
                            "line {lineno}: unknown strategy {value:?} (known: {})",
                            Strategy::known_names().join(", ")
                        )));
                    }
                    strategy = value.to_string();
                }
                "seed" => seed = parse_num(lineno, key, value)?,
                "max_time" => max_time = parse_num(lineno, key, value)?,
                "k" => params.k = parse_num(lineno, key, value)?,
                "corridor_w" => params.corridor_w = parse_num(lineno, key, value)?,
                "d_max" => params.d_max = parse_num(lineno, key, value)?,
                "tau" => params.tau = parse_num(lineno, key, value)?,
                "alpha" => params.alpha = parse_num(lineno, key, value)?,
                "d_region" => params.d_region = parse_num(lineno, key, value)?,
                "r_trail" => params.r_trail = parse_num(lineno, key, value)?,
                "r_edge" => params.r_edge = parse_num(lineno, key, value)?,
                "d_edge" => params.d_edge = parse_num(lineno, key, value)?,
                "trail_min_interval" => {
                    params.trail_min_interval = parse_num(lineno, key, value)?
                }
                "erosion_max" => params.erosion_max = parse_num(lineno, key, value)?,
                "w1" => params.w1 = parse_num(lineno, key, value)?,
                "w2" => params.w2 = parse_num(lineno, key, value)?,
                "k_omega" => params.k_omega = parse_num(lineno, key, value)?,
                "lookahead" => params.lookahead = parse_num(lineno, key, value)?,
                "dt_control" => params.dt_control = parse_num(lineno, key, value)?,
                "update_period" => params.update_period = parse_num(lineno, key, value)?,
                "scan_range" => params.scan_range = parse_num(lineno, key, value)?,
                "scan_beams" => params.scan_beams = parse_num(lineno, key, value)?,
                other => {
                    return Err(Error::Config(format!(
                        "line {lineno}: unknown scenario key {other:?}"
                    )))
                }
            }
        }
        let map_path =
            map_path.ok_or_else(|| Error::Config("scenario is missing map=".into()))?;
        let start = start.ok_or_else(|| Error::Config("scenario is missing start=".into()))?;
        params.validate()?;
        Ok(Scenario {
            name: name.to_string(),
            map_path,
            start,
            start_heading,
            coverage_threshold,
            strategy,
            seed,
            max_time,
            params,
        })
    }

    pub fn load(path: &Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading scenario {}", path.display()), e))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        let name = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("scenario");
        Scenario::parse(&text, base, name)
    }
}

/// Maps x strategies x trials sweep.
#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub scenarios: Vec<PathBuf>,
    pub strategies: Vec<String>,
    pub trials: usize,
    pub seed0: u64,
    /// Worker threads; None uses all logical cores.
    pub threads: Option<usize>,
}

impl SuiteConfig {
    pub fn parse(text: &str, base_dir: &Path) -> Result<SuiteConfig> {
        let mut scenarios = Vec::new();
        let mut strategies = Vec::new();
        let mut trials = 10usize;
        let mut seed0 = 1u64;
        let mut threads = None;
        for (lineno, key, value) in kv_lines(text) {
            match key {
                "scenario" => {
                    let p = PathBuf::from(value);
                    scenarios.push(if p.is_absolute() { p } else { base_dir.join(p) });
                }
                "strategy" => {
                    if Strategy::by_name(value).is_none() {
                        return Err(Error::Config(format!(
                            "line {lineno}: unknown strategy {value:?}"
                        )));
                    }
                    strategies.push(value.to_string());
                }
                "trials" => trials = parse_num(lineno, key, value)?,
                "seed0" => seed0 = parse_num(lineno, key, value)?,
                "threads" => threads = Some(parse_num(lineno, key, value)?),
                other => {
                    return Err(Error::Config(format!(
                        "line {lineno}: unknown suite key {other:?}"
                    )))
                }
            }
        }
        let cfg = SuiteConfig {
            scenarios,
            strategies,
            trials,
            seed0,
            threads,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<SuiteConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading suite config {}", path.display()), e))?;
        SuiteConfig::parse(&text, path.parent().unwrap_or_else(|| Path::new(".")))
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        if self.scenarios.is_empty() {
            return Err(Error::Config("suite needs at least one scenario=".into()));
        }
        if self.strategies.is_empty() {
            return Err(Error::Config("suite needs at least one strategy=".into()));
        }
        Ok(())
    }
}

/// Ablation sweep: fixed variant set over scenarios.
#[derive(Clone, Debug)]
pub struct AblationConfig {
    pub scenarios: Vec<PathBuf>,
    /// Variant tokens (combinations of the three stack components; the
    /// low graph is mandatory in each).
    pub variants: Vec<String>,
    pub trials: usize,
    pub seed0: u64,
    pub threads: Option<usize>,
}

impl AblationConfig {
    pub fn parse(text: &str, base_dir: &Path) -> Result<AblationConfig> {
        let mut scenarios = Vec::new();
        let mut variants: Vec<String> = Vec::new();
        let mut trials = 10usize;
        let mut seed0 = 1u64;
        let mut threads = None;
        for (lineno, key, value) in kv_lines(text) {
            match key {
                "scenario" => {
                    let p = PathBuf::from(value);
                    scenarios.push(if p.is_absolute() { p } else { base_dir.join(p) });
                }
                "variant" => {
                    if ablation_variant(value).is_none() {
                        return Err(Error::Config(format!(
                            "line {lineno}: unknown variant {value:?}; the low graph is \
                             mandatory (valid: {})",
                            ABLATION_VARIANTS.join(", ")
                        )));
                    }
                    variants.push(value.to_string());
                }
                "trials" => trials = parse_num(lineno, key, value)?,
                "seed0" => seed0 = parse_num(lineno, key, value)?,
                "threads" => threads = Some(parse_num(lineno, key, value)?),
                other => {
                    return Err(Error::Config(format!(
                        "line {lineno}: unknown ablation key {other:?}"
                    )))
                }
            }
        }
        if variants.is_empty() {
            variants = ABLATION_VARIANTS.iter().map(|s| s.to_string()).collect();
        }
        let cfg = AblationConfig {
            scenarios,
            variants,
            trials,
            seed0,
            threads,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<AblationConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading ablation config {}", path.display()), e))?;
        AblationConfig::parse(&text, path.parent().unwrap_or_else(|| Path::new(".")))
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        if self.scenarios.is_empty() {
            return Err(Error::Config("ablation needs at least one scenario=".into()));
        }
        if self.variants.is_empty() {
            return Err(Error::Config("ablation needs at least one variant".into()));
        }
        Ok(())
    }
}
