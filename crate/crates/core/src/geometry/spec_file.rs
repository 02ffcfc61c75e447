use std::str::FromStr;

use super::{AlphaSpec, BoundaryProfile, GeometryError, ModelMetric};

/// Keys accepted in a metric specification file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKey {
    N,
    X1,
    C,
    Alpha,
    CompactVolume,
}

impl MetricKey {
    pub const ALL: [MetricKey; 5] = [Self::N, Self::X1, Self::C, Self::Alpha, Self::CompactVolume];

    pub fn name(self) -> &'static str {
        match self {
            Self::N => "n",
            Self::X1 => "x1",
            Self::C => "c",
            Self::Alpha => "alpha",
            Self::CompactVolume => "compact_volume",
        }
    }
}

impl FromStr for MetricKey {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Self::ALL.into_iter().find(|k| k.name() == s).ok_or(())
    }
}

/// Parses `key = value` lines. `#` starts a comment. `n` and `alpha` are
/// required; `x1` defaults to 1, `c` and `compact_volume` to 0.
pub fn parse_metric_spec(text: &str) -> Result<ModelMetric, GeometryError> {
    let mut n: Option<u32> = None;
    let mut alpha: Option<AlphaSpec> = None;
    let mut x1 = 1.0;
    let mut c = 0.0;
    let mut compact_volume = 0.0;
    let mut seen = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let err = |message: String| GeometryError::SpecFile { line, message };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (k, v) = content.split_once('=').ok_or_else(|| err(format!("expected key=value, got {content:?}")))?;
        let (k, v) = (k.trim(), v.trim());
        let key: MetricKey = k.parse().map_err(|_| err(format!("unknown key {k:?}")))?;
        if seen.contains(&key) {
            return Err(err(format!("duplicate key {k:?}")));
        }
        seen.push(key);
        let real = |v: &str| v.parse::<f64>().map_err(|_| err(format!("{k}: not a number: {v:?}")));
        match key {
            MetricKey::N => n = Some(v.parse().map_err(|_| err(format!("n: not a positive integer: {v:?}")))?),
            MetricKey::X1 => x1 = real(v)?,
            MetricKey::C => c = real(v)?,
            MetricKey::CompactVolume => compact_volume = real(v)?,
            MetricKey::Alpha => alpha = Some(v.parse().map_err(|e: GeometryError| err(e.to_string()))?),
        }
    }
    let missing = |name: &str| GeometryError::SpecFile { line: 0, message: format!("missing required key {name:?}") };
    let n = n.ok_or_else(|| missing("n"))?;
    let alpha = alpha.ok_or_else(|| missing("alpha"))?;
    ModelMetric::new(BoundaryProfile::new(n, alpha)?, x1, c, compact_volume)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_file() {
        let m =
            parse_metric_spec("# collar\nn = 2\nx1=0.5\nc = 0.1\nalpha = trig:1.5,0.5\ncompact_volume=3\n").unwrap();
        assert_eq!(m.n(), 2);
        assert_eq!(m.x1, 0.5);
        assert_eq!(m.c, 0.1);
        assert_eq!(m.compact_volume, 3.0);
        assert!((m.profile.alpha1() - 2.5).abs() < 1e-10);
    }

    #[test]
    fn reports_line_numbers() {
        match parse_metric_spec("n=1\n\nfoo=2\n") {
            Err(GeometryError::SpecFile { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(parse_metric_spec("n=1\n").is_err());
        assert!(parse_metric_spec("n=1\nalpha=constant:1\nn=2").is_err());
        assert!(parse_metric_spec("n=1\nalpha=constant:-1").is_err());
    }
}
