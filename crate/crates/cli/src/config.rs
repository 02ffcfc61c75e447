//! Flat `key = value` experiment configs. Repeated keys form lists.

use std::collections::BTreeMap;
use std::path::Path;

use lpspec::geometry::{parse_metric_spec, MetricKey};
use lpspec::region::{AlphaSqRange, ComplexPoint, SpectralParams};
use lpspec::{BoundaryProfile, GeometryError, ModelMetric};
use thiserror::Error;

use crate::svg::FigureKind;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("key {key:?}: {message}")]
    Key { key: String, message: String },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Arity {
    One,
    Many,
}

const KEYS: &[(&str, Arity)] = &[
    ("n", Arity::One),
    ("x1", Arity::One),
    ("c", Arity::One),
    ("alpha", Arity::One),
    ("compact_volume", Arity::One),
    ("metric_file", Arity::One),
    ("alpha0", Arity::One),
    ("alpha1", Arity::One),
    ("alpha_sq", Arity::Many),
    ("p", Arity::Many),
    ("figure", Arity::Many),
    ("x_range", Arity::One),
    ("y_range", Arity::One),
    ("resolution", Arity::One),
    ("slices", Arity::One),
    ("A", Arity::Many),
    ("epsilon", Arity::Many),
    ("L", Arity::Many),
    ("s", Arity::Many),
    ("c_pass", Arity::One),
    ("coupling", Arity::One),
    ("smoothness", Arity::One),
    ("torus_points", Arity::One),
    ("radius", Arity::Many),
    ("volume_step", Arity::One),
    ("sl_s", Arity::One),
    ("sl_t", Arity::One),
    ("sl_gamma", Arity::One),
    ("sl_epsilon", Arity::One),
    ("sl_step", Arity::One),
    ("u_max", Arity::Many),
    ("nodes_per_unit", Arity::One),
    ("ny", Arity::One),
    ("probe_z", Arity::Many),
    ("probe_p", Arity::One),
    ("probe_trials", Arity::One),
    ("seed", Arity::One),
];

/// Raw entries: key → `(line, value)` in file order.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, Vec<(usize, String)>>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries: BTreeMap<String, Vec<(usize, String)>> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (k, v) = content
                .split_once('=')
                .ok_or_else(|| ConfigError::Line { line, message: format!("expected key=value, got {content:?}") })?;
            let (k, v) = (k.trim(), v.trim());
            let arity = KEYS
                .iter()
                .find(|(name, _)| *name == k)
                .map(|e| e.1)
                .ok_or_else(|| ConfigError::Line { line, message: format!("unknown key {k:?}") })?;
            let slot = entries.entry(k.to_string()).or_default();
            if arity == Arity::One && !slot.is_empty() {
                return Err(ConfigError::Line { line, message: format!("duplicate key {k:?}") });
            }
            slot.push((line, v.to_string()));
        }
        Ok(Self { entries })
    }

    fn one(&self, key: &str) -> Option<&(usize, String)> {
        self.entries.get(key).and_then(|v| v.first())
    }

    fn many(&self, key: &str) -> &[(usize, String)] {
        self.entries.get(key).map_or(&[], Vec::as_slice)
    }

    fn real(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.one(key).map(|(line, v)| parse_real(*line, key, v)).transpose()
    }

    fn reals(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        self.many(key).iter().map(|(line, v)| parse_real(*line, key, v)).collect()
    }

    fn count(&self, key: &str) -> Result<Option<usize>, ConfigError> {
        self.one(key)
            .map(|(line, v)| {
                v.parse::<usize>().map_err(|_| ConfigError::Line {
                    line: *line,
                    message: format!("{key}: expected a non-negative integer, got {v:?}"),
                })
            })
            .transpose()
    }

    fn pair(&self, line: usize, key: &str, v: &str) -> Result<(f64, f64), ConfigError> {
        let (a, b) = v.split_once(',').ok_or_else(|| ConfigError::Line {
            line,
            message: format!("{key}: expected two comma-separated numbers, got {v:?}"),
        })?;
        Ok((parse_real(line, key, a.trim())?, parse_real(line, key, b.trim())?))
    }
}

fn parse_real(line: usize, key: &str, v: &str) -> Result<f64, ConfigError> {
    let bad = || ConfigError::Line { line, message: format!("{key}: not a number: {v:?}") };
    let value = match v.split_once('/') {
        Some((a, b)) => a.trim().parse::<f64>().map_err(|_| bad())? / b.trim().parse::<f64>().map_err(|_| bad())?,
        None => v.parse::<f64>().map_err(|_| bad())?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad())
    }
}

/// Settings of the discrete spectral-bottom run.
#[derive(Debug, Clone, PartialEq)]
pub struct BottomConfig {
    pub u_max: Vec<f64>,
    pub nodes_per_unit: f64,
    pub ny: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeConfig {
    pub points: Vec<ComplexPoint>,
    pub p: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SturmConfig {
    pub s: f64,
    pub t: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub step: f64,
}

/// A validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Absent for region-only configs that give `n`, `alpha0`, `alpha1`.
    pub metric: Option<ModelMetric>,
    pub params: SpectralParams,
    pub p: Vec<f64>,
    pub figures: Vec<FigureKind>,
    pub x_range: Option<(f64, f64)>,
    pub y_range: Option<(f64, f64)>,
    pub resolution: usize,
    pub slices: usize,
    pub a_values: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub depth: Vec<f64>,
    pub s_values: Vec<f64>,
    pub c_pass: f64,
    pub coupling: f64,
    pub smoothness: usize,
    pub torus_points: usize,
    pub radii: Vec<f64>,
    pub volume_step: f64,
    pub sturm: SturmConfig,
    pub bottom: BottomConfig,
    pub probe: ProbeConfig,
    pub seed: u64,
}

fn key_err(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Key { key: key.into(), message: message.into() }
}

fn check_p(raw: &RawConfig, values: &[f64], key: &str) -> Result<(), ConfigError> {
    for ((line, _), &p) in raw.many(key).iter().zip(values) {
        if !(1.0..=2.0).contains(&p) {
            return Err(ConfigError::Line {
                line: *line,
                message: "p must lie in [1,2]; use conjugateExponent for p>2".into(),
            });
        }
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io { path: path.display().to_string(), message: e.to_string() })?;
        Self::parse(&text, path.parent())
    }

    /// Parses and validates; `base` resolves a relative `metric_file`.
    pub fn parse(text: &str, base: Option<&Path>) -> Result<Self, ConfigError> {
        let raw = RawConfig::parse(text)?;
        let metric = Self::metric(&raw, base)?;
        let n = match &metric {
            Some(m) => m.n(),
            None => {
                let (line, v) = raw.one("n").ok_or_else(|| key_err("n", "required"))?;
                v.parse().ok().filter(|n: &u32| *n > 0).ok_or_else(|| ConfigError::Line {
                    line: *line,
                    message: format!("n: expected a positive integer, got {v:?}"),
                })?
            }
        };
        let from_metric = |f: fn(&BoundaryProfile) -> f64| metric.as_ref().map(|m| f(&m.profile));
        let alpha0 = raw
            .real("alpha0")?
            .or_else(|| from_metric(BoundaryProfile::alpha0))
            .ok_or_else(|| key_err("alpha0", "required when no alpha profile is given"))?;
        let alpha1 = raw
            .real("alpha1")?
            .or_else(|| from_metric(BoundaryProfile::alpha1))
            .ok_or_else(|| key_err("alpha1", "required when no alpha profile is given"))?;
        let mut intervals = Vec::new();
        for (line, v) in raw.many("alpha_sq") {
            let (lo, hi) = raw.pair(*line, "alpha_sq", v)?;
            intervals.push([lo, hi]);
        }
        let range = if intervals.is_empty() {
            AlphaSqRange::interval(alpha0 * alpha0, alpha1 * alpha1)
        } else {
            AlphaSqRange::new(intervals)
        }
        .map_err(|e| key_err("alpha_sq", e.to_string()))?;
        let params =
            SpectralParams::new(n, alpha0, alpha1, range).map_err(|e| key_err("alpha0/alpha1", e.to_string()))?;

        let mut p = raw.reals("p")?;
        check_p(&raw, &p, "p")?;
        if p.is_empty() {
            p = vec![1.0];
        }

        let figures = raw
            .many("figure")
            .iter()
            .map(|(line, v)| v.parse::<FigureKind>().map_err(|m| ConfigError::Line { line: *line, message: m }))
            .collect::<Result<Vec<_>, _>>()?;
        let range_of = |key: &str| -> Result<Option<(f64, f64)>, ConfigError> {
            match raw.one(key) {
                None => Ok(None),
                Some((line, v)) => {
                    let (a, b) = raw.pair(*line, key, v)?;
                    if b > a {
                        Ok(Some((a, b)))
                    } else {
                        Err(ConfigError::Line { line: *line, message: format!("{key}: empty range") })
                    }
                }
            }
        };
        let x_range = range_of("x_range")?;
        let y_range = range_of("y_range")?;

        let a_values = {
            let v = raw.reals("A")?;
            if v.is_empty() {
                vec![alpha1 * alpha1]
            } else {
                v
            }
        };
        let epsilon = {
            let v = raw.reals("epsilon")?;
            if v.iter().any(|e| *e <= 0.0) {
                return Err(key_err("epsilon", "must be positive"));
            }
            if v.is_empty() {
                vec![0.1]
            } else {
                v
            }
        };
        let depth = raw.reals("L")?;
        if depth.iter().any(|l| *l <= 2.0 * std::f64::consts::LN_2) {
            return Err(key_err("L", "must exceed log 4"));
        }
        let s_values = {
            let v = raw.reals("s")?;
            if v.is_empty() {
                vec![0.0]
            } else {
                v
            }
        };

        let radii = {
            let v = raw.reals("radius")?;
            if v.is_empty() {
                (1..=10).map(f64::from).collect()
            } else {
                v
            }
        };
        if radii.len() < 3 {
            return Err(key_err("radius", format!("need at least 3 radii, got {}", radii.len())));
        }
        if radii.windows(2).any(|w| w[1] <= w[0]) || radii[0] <= 0.0 {
            return Err(key_err("radius", "radii must be positive and strictly increasing"));
        }

        let sl_eps = raw.real("sl_epsilon")?.unwrap_or(0.1);
        let sturm = SturmConfig {
            s: raw.real("sl_s")?.unwrap_or(1.0),
            t: raw.real("sl_t")?.unwrap_or(2.0),
            gamma: raw.real("sl_gamma")?.unwrap_or(2.0 * (alpha1 + sl_eps)),
            epsilon: sl_eps,
            step: raw.real("sl_step")?.unwrap_or(1e-3),
        };

        let default_u = match n {
            1 => 40.0,
            2 => 20.0,
            _ => 10.0,
        };
        let mut u_max = raw.reals("u_max")?;
        if u_max.is_empty() {
            u_max = vec![0.5 * default_u, 0.75 * default_u, default_u];
        }
        if u_max.iter().any(|u| *u <= 0.0) {
            return Err(key_err("u_max", "must be positive"));
        }
        let bottom = BottomConfig {
            u_max,
            nodes_per_unit: raw.real("nodes_per_unit")?.unwrap_or(if n >= 4 { 8.0 } else { 10.0 }),
            ny: raw.count("ny")?.unwrap_or(8),
        };
        if bottom.ny < 8 {
            return Err(key_err("ny", "must be at least 8"));
        }

        let mut points = Vec::new();
        for (line, v) in raw.many("probe_z") {
            let (x, y) = raw.pair(*line, "probe_z", v)?;
            points.push(ComplexPoint::new(x, y));
        }
        let probe_p = raw.real("probe_p")?.unwrap_or(1.0);
        if !(1.0..=2.0).contains(&probe_p) {
            return Err(key_err("probe_p", "p must lie in [1,2]; use conjugateExponent for p>2"));
        }
        let probe = ProbeConfig { points, p: probe_p, trials: raw.count("probe_trials")?.unwrap_or(8).max(1) };

        let seed = match raw.one("seed") {
            None => 0,
            Some((line, v)) => v.parse().map_err(|_| ConfigError::Line {
                line: *line,
                message: format!("seed: expected an unsigned integer, got {v:?}"),
            })?,
        };
        let positive = |key: &str, v: f64| if v > 0.0 { Ok(v) } else { Err(key_err(key, "must be positive")) };

        Ok(Self {
            metric,
            params,
            p,
            figures,
            x_range,
            y_range,
            resolution: raw.count("resolution")?.unwrap_or(400).max(16),
            slices: raw.count("slices")?.unwrap_or(7).max(1),
            a_values,
            epsilon,
            depth,
            s_values,
            c_pass: positive("c_pass", raw.real("c_pass")?.unwrap_or(lpspec::quasimode::DEFAULT_PASS_SLACK))?,
            coupling: positive("coupling", raw.real("coupling")?.unwrap_or(lpspec::quasimode::DEFAULT_COUPLING))?,
            smoothness: raw.count("smoothness")?.unwrap_or(2),
            torus_points: raw.count("torus_points")?.unwrap_or(24),
            radii,
            volume_step: positive("volume_step", raw.real("volume_step")?.unwrap_or(0.05))?,
            sturm,
            bottom,
            probe,
            seed,
        })
    }

    /// The metric of quasimode, volume and bottom runs.
    pub fn require_metric(&self) -> Result<&ModelMetric, ConfigError> {
        self.metric.as_ref().ok_or_else(|| key_err("alpha", "a metric (alpha profile or metric_file) is required"))
    }

    fn metric(raw: &RawConfig, base: Option<&Path>) -> Result<Option<ModelMetric>, ConfigError> {
        if raw.one("alpha").is_none() && raw.one("metric_file").is_none() {
            for key in ["x1", "c", "compact_volume"] {
                if let Some((line, _)) = raw.one(key) {
                    return Err(ConfigError::Line { line: *line, message: format!("{key} requires an alpha profile") });
                }
            }
            return Ok(None);
        }
        let inline: Vec<(usize, String)> = MetricKey::ALL
            .iter()
            .filter_map(|k| raw.one(k.name()).map(|(line, v)| (*line, format!("{} = {}", k.name(), v))))
            .collect();
        let (text, origin) = match raw.one("metric_file") {
            Some((line, path)) => {
                if let Some((other, _)) = inline.first() {
                    return Err(ConfigError::Line {
                        line: *other,
                        message: "metric_file cannot be combined with inline metric keys".into(),
                    });
                }
                let full = base.map_or_else(|| Path::new(path).to_path_buf(), |b| b.join(path));
                let text = std::fs::read_to_string(&full)
                    .map_err(|e| ConfigError::Io { path: full.display().to_string(), message: e.to_string() })?;
                (text, Err(*line))
            }
            None => (inline.iter().map(|(_, t)| t.as_str()).collect::<Vec<_>>().join("\n"), Ok(inline.clone())),
        };
        parse_metric_spec(&text).map(Some).map_err(|e| {
            let at = match (&e, &origin) {
                // Inline keys: map the synthetic line back to the config line.
                (GeometryError::SpecFile { line, .. }, Ok(lines)) if *line >= 1 => lines[*line - 1].0,
                (_, Ok(lines)) => lines.first().map_or(0, |l| l.0),
                (_, Err(line)) => *line,
            };
            ConfigError::Line { line: at, message: format!("metric: {e}") }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "n = 1\nalpha = trig:1.5,0.5\n";

    #[test]
    fn lists_and_defaults() {
        let cfg = ExperimentConfig::parse(&format!("{BASE}p=1\np=3/2\nepsilon=0.2\nepsilon=0.1\n"), None).unwrap();
        assert_eq!(cfg.p, vec![1.0, 1.5]);
        assert_eq!(cfg.epsilon, vec![0.2, 0.1]);
        assert_eq!(cfg.a_values, vec![4.0]);
        assert!((cfg.params.alpha0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn region_only_config() {
        let cfg = ExperimentConfig::parse("n = 4\nalpha0 = 1\nalpha1 = 2\nfigure = l1-both\n", None).unwrap();
        assert!(cfg.metric.is_none());
        assert_eq!(cfg.params.n, 4);
        assert!(cfg.require_metric().is_err());
    }

    #[test]
    fn rejects_bad_input_with_lines() {
        let e = ExperimentConfig::parse(&format!("{BASE}p=3\n"), None).unwrap_err();
        assert_eq!(
            e,
            ConfigError::Line { line: 3, message: "p must lie in [1,2]; use conjugateExponent for p>2".into() }
        );
        let e = ExperimentConfig::parse(&format!("{BASE}bogus=1\n"), None).unwrap_err();
        assert!(matches!(e, ConfigError::Line { line: 3, .. }));
        assert!(ExperimentConfig::parse(&format!("{BASE}seed=1\nseed=2\n"), None).is_err());
        assert!(ExperimentConfig::parse(&format!("{BASE}radius=1\nradius=2\n"), None).is_err());
        assert!(ExperimentConfig::parse("alpha = constant:1\n", None).is_err());
        assert!(ExperimentConfig::parse("n = 4\nalpha0 = 1\n", None).is_err());
    }
}
