//! Distribution strings such as `normal:mu=0,sigma=1`.

use std::fmt;
use std::str::FromStr;

use fisher_core::quadrature::Support;
use fisher_core::{Density, Exponential, Normal};

use crate::error::CliError;

/// Any family the command line can name.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnyModel {
    Normal(Normal),
    Exponential(Exponential),
}

macro_rules! delegate {
    ($self:ident, $m:ident => $e:expr) => {
        match $self {
            AnyModel::Normal($m) => $e,
            AnyModel::Exponential($m) => $e,
        }
    };
}

impl Density for AnyModel {
    fn family(&self) -> &'static str {
        delegate!(self, m => m.family())
    }

    fn parameter_labels(&self) -> &'static [&'static str] {
        delegate!(self, m => m.parameter_labels())
    }

    fn parameter_values(&self) -> Vec<f64> {
        delegate!(self, m => m.parameter_values())
    }

    fn with_params(&self, values: &[f64]) -> fisher_core::Result<Self> {
        Ok(match self {
            AnyModel::Normal(m) => AnyModel::Normal(m.with_params(values)?),
            AnyModel::Exponential(m) => AnyModel::Exponential(m.with_params(values)?),
        })
    }

    fn support(&self) -> Support {
        delegate!(self, m => m.support())
    }

    fn ln_pdf(&self, x: f64) -> f64 {
        delegate!(self, m => m.ln_pdf(x))
    }

    fn pdf(&self, x: f64) -> f64 {
        delegate!(self, m => m.pdf(x))
    }

    fn score_component(&self, x: f64, i: usize) -> f64 {
        delegate!(self, m => m.score_component(x, i))
    }

    fn dln_pdf_dx(&self, x: f64) -> f64 {
        delegate!(self, m => m.dln_pdf_dx(x))
    }

    fn mean(&self) -> f64 {
        delegate!(self, m => m.mean())
    }

    fn location_index(&self) -> Option<usize> {
        delegate!(self, m => m.location_index())
    }

    fn weighted_central_moment_exact(&self, order: u32, power: u32) -> Option<f64> {
        delegate!(self, m => m.weighted_central_moment_exact(order, power))
    }
}

impl AnyModel {
    /// Index of a parameter given by label (`mu`) or position (`0`).
    pub fn param_index(&self, name: &str) -> Result<usize, CliError> {
        let labels = self.parameter_labels();
        if let Some(i) = labels.iter().position(|l| *l == name) {
            return Ok(i);
        }
        match name.parse::<usize>() {
            Ok(i) if i < labels.len() => Ok(i),
            _ => Err(CliError::Usage(format!(
                "{} has no parameter '{name}' (expected one of: {})",
                self.family(),
                labels.join(", ")
            ))),
        }
    }
}

impl fmt::Display for AnyModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.family())?;
        let pairs: Vec<String> = self
            .parameter_labels()
            .iter()
            .zip(self.parameter_values())
            .map(|(l, v)| format!("{l}={v}"))
            .collect();
        write!(f, "{}", pairs.join(","))
    }
}

fn parse_pairs<'a>(family: &str, body: &'a str, allowed: &[&str]) -> Result<Vec<(&'a str, f64)>, CliError> {
    let mut out: Vec<(&str, f64)> = Vec::new();
    for item in body.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("expected key=value in '{item}'")))?;
        let key = key.trim();
        if !allowed.contains(&key) {
            return Err(CliError::Usage(format!(
                "{family} has no parameter '{key}' (expected one of: {})",
                allowed.join(", ")
            )));
        }
        if out.iter().any(|(k, _)| *k == key) {
            return Err(CliError::Usage(format!("parameter '{key}' given twice")));
        }
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("'{value}' is not a number (parameter '{key}')")))?;
        out.push((key, value));
    }
    Ok(out)
}

fn lookup(pairs: &[(&str, f64)], key: &str, default: f64) -> f64 {
    pairs.iter().find(|(k, _)| *k == key).map_or(default, |(_, v)| *v)
}

impl FromStr for AnyModel {
    type Err = CliError;

    /// `family[:key=value,...]`; omitted parameters take the standard values
    /// (`mu = 0`, `sigma = 1`, `rate = 1`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (family, body) = s.split_once(':').unwrap_or((s, ""));
        let family = family.trim().to_ascii_lowercase();
        let invalid = |e: fisher_core::Error| CliError::Usage(format!("{s}: {e}"));
        match family.as_str() {
            "normal" | "gaussian" => {
                let p = parse_pairs(&family, body, &["mu", "sigma"])?;
                Normal::new(lookup(&p, "mu", 0.0), lookup(&p, "sigma", 1.0))
                    .map(AnyModel::Normal)
                    .map_err(invalid)
            }
            "exponential" => {
                let p = parse_pairs(&family, body, &["rate"])?;
                Exponential::new(lookup(&p, "rate", 1.0))
                    .map(AnyModel::Exponential)
                    .map_err(invalid)
            }
            other => Err(CliError::Usage(format!(
                "unknown family '{other}' (expected normal or exponential)"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_and_partial_specs() {
        let m: AnyModel = "normal:mu=0.5,sigma=2".parse().unwrap();
        assert_eq!(m, AnyModel::Normal(Normal::new(0.5, 2.0).unwrap()));
        let m: AnyModel = "normal".parse().unwrap();
        assert_eq!(m, AnyModel::Normal(Normal::standard()));
        let m: AnyModel = "exponential:rate=2".parse().unwrap();
        assert_eq!(m.parameter_values(), vec![2.0]);
        assert_eq!(m.to_string(), "exponential:rate=2");
    }

    #[test]
    fn rejects_bad_specs() {
        for bad in [
            "cauchy:x0=0",
            "normal:mu=0,mu=1",
            "normal:sigma=-1",
            "normal:tau=1",
            "normal:mu",
            "normal:mu=abc",
        ] {
            assert!(matches!(bad.parse::<AnyModel>(), Err(CliError::Usage(_))), "{bad}");
        }
    }

    #[test]
    fn parameter_lookup() {
        let m: AnyModel = "normal".parse().unwrap();
        assert_eq!(m.param_index("sigma").unwrap(), 1);
        assert_eq!(m.param_index("0").unwrap(), 0);
        assert!(m.param_index("rate").is_err());
    }
}
