//! Degradation chain syntax: `kind[:param=value][;kind...]`.
//!
//! A value may be a range `lo..hi`; each sample then draws its own value
//! uniformly from the range, rounded for whole-number parameters.

use std::collections::BTreeMap;

use ocrforge_core::degrade::{DegradationKind, DegradationSpec};
use ocrforge_core::{derive_seed, Rng};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamValue {
    Fixed(f64),
    Range(f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainStep {
    pub kind: DegradationKind,
    pub value: Option<ParamValue>,
}

fn number(s: &str, ctx: &str) -> Result<f64, CliError> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| CliError::Usage(format!("chain step {ctx:?}: {s:?} is not a number")))
}

fn check(kind: DegradationKind, v: f64) -> Result<(), CliError> {
    DegradationSpec::with_value(kind, v, 0).map(|_| ()).map_err(|e| CliError::Usage(e.to_string()))
}

pub fn parse_chain(text: &str) -> Result<Vec<ChainStep>, CliError> {
    let mut steps = Vec::new();
    for part in text.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let (name, params) = match part.split_once(':') {
            Some((n, p)) => (n.trim(), p.trim()),
            None => (part, ""),
        };
        let kind = DegradationKind::parse(name).map_err(|e| CliError::Usage(e.to_string()))?;
        let mut value = None;
        for kv in params.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, raw) =
                kv.split_once('=').ok_or_else(|| CliError::Usage(format!("chain step {part:?}: expected key=value")))?;
            if key.trim() != kind.param_name() {
                return Err(CliError::Usage(format!(
                    "chain step {part:?}: {kind} takes only {:?}, got {:?}",
                    kind.param_name(),
                    key.trim()
                )));
            }
            if value.is_some() {
                return Err(CliError::Usage(format!("chain step {part:?}: {key} given twice")));
            }
            let v = match raw.split_once("..") {
                Some((lo, hi)) => {
                    let (lo, hi) = (number(lo, part)?, number(hi, part)?);
                    if lo > hi {
                        return Err(CliError::Usage(format!("chain step {part:?}: empty range")));
                    }
                    check(kind, lo)?;
                    check(kind, hi)?;
                    if kind.is_integer() && lo.ceil() > hi.floor() {
                        return Err(CliError::Usage(format!("chain step {part:?}: range holds no whole number")));
                    }
                    ParamValue::Range(lo, hi)
                }
                None => {
                    let v = number(raw, part)?;
                    check(kind, v)?;
                    ParamValue::Fixed(v)
                }
            };
            value = Some(v);
        }
        steps.push(ChainStep { kind, value });
    }
    Ok(steps)
}

/// Concrete specs for one sample. Step `k` gets seed `derive_seed(sample_seed, 2 + k)`.
pub fn resolve_chain(steps: &[ChainStep], sample_seed: u64) -> Result<Vec<DegradationSpec>, CliError> {
    steps
        .iter()
        .enumerate()
        .map(|(k, step)| {
            let seed = derive_seed(sample_seed, 2 + k as u64);
            let mut params = BTreeMap::new();
            match step.value {
                None => {}
                Some(ParamValue::Fixed(v)) => {
                    params.insert(step.kind.param_name().to_string(), v);
                }
                Some(ParamValue::Range(lo, hi)) => {
                    let mut rng = Rng::new(derive_seed(seed, 1));
                    let v = if step.kind.is_integer() {
                        rng.range_i64(lo.ceil() as i64, hi.floor() as i64) as f64
                    } else {
                        rng.uniform(lo, hi)
                    };
                    params.insert(step.kind.param_name().to_string(), v);
                }
            }
            DegradationSpec::new(step.kind, params, seed).map_err(|e| CliError::Internal(e.to_string()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_steps() {
        let c = parse_chain("blur:sigma=2; rotate:angle=-10..10;block_compress").unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(c[0], ChainStep { kind: DegradationKind::Blur, value: Some(ParamValue::Fixed(2.0)) });
        assert_eq!(c[1].value, Some(ParamValue::Range(-10.0, 10.0)));
        assert_eq!(c[2].value, None);
        assert!(parse_chain("").unwrap().is_empty());
    }

    #[test]
    fn rejects_bad_steps() {
        for bad in ["sharpen", "blur:radius=2", "blur:sigma=99", "blur:sigma=x", "rotate:angle=5..1", "clutter:n=1.2..1.8", "blur:sigma=1,sigma=2"] {
            assert!(matches!(parse_chain(bad), Err(CliError::Usage(_))), "{bad}");
        }
    }

    #[test]
    fn resolution_is_seeded_and_in_range() {
        let c = parse_chain("rotate:angle=-10..10;clutter:n=2..5").unwrap();
        let a = resolve_chain(&c, 99).unwrap();
        assert_eq!(a, resolve_chain(&c, 99).unwrap());
        assert_eq!(a[0].seed, derive_seed(99, 2));
        assert_eq!(a[1].seed, derive_seed(99, 3));
        assert!((-10.0..=10.0).contains(&a[0].value()));
        let n = a[1].value();
        assert!(n.fract() == 0.0 && (2.0..=5.0).contains(&n));
    }
}
