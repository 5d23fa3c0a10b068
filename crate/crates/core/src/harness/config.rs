//! Flat `key = value` experiment configs.
//!
//! Values are read through a [`Resolver`], which records every value it hands
//! out (including defaults) so the manifest can echo the complete effective
//! configuration. Keys nobody asked for are rejected at the end of resolution.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::interpolate::SampleMode;
use crate::kernels::{BoxDomain, KernelSpec};
use crate::policies::{FirstPoint, LcbVariant, PolicyKind};
use crate::search::SearchConfig;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected 'key = value'", lineno + 1))
            })?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                return Err(Error::Config(format!("line {}: empty key", lineno + 1)));
            }
            if entries.insert(k.to_string(), v.to_string()).is_some() {
                return Err(Error::Config(format!(
                    "line {}: duplicate key '{k}'",
                    lineno + 1
                )));
            }
        }
        Ok(Config { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Override or add a key (used for command-line flags).
    pub fn set(&mut self, key: &str, value: impl Display) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }
}

/// Hands out typed config values and remembers what it resolved.
#[derive(Debug)]
pub struct Resolver<'a> {
    config: &'a Config,
    used: BTreeSet<String>,
    resolved: BTreeMap<String, String>,
}

fn parse_as<T: FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.trim()
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse value '{raw}' for key '{key}'")))
}

fn join<T: Display>(items: &[T], sep: &str) -> String {
    items
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(sep)
}

impl<'a> Resolver<'a> {
    pub fn new(config: &'a Config) -> Self {
        Resolver {
            config,
            used: BTreeSet::new(),
            resolved: BTreeMap::new(),
        }
    }

    fn raw(&mut self, key: &str) -> Option<&'a str> {
        self.used.insert(key.to_string());
        self.config.get(key)
    }

    fn record(&mut self, key: &str, value: String) {
        self.resolved.insert(key.to_string(), value);
    }

    pub fn value<T: FromStr + Display>(&mut self, key: &str, default: T) -> Result<T> {
        let v = match self.raw(key) {
            Some(raw) => parse_as(key, raw)?,
            None => default,
        };
        self.record(key, v.to_string());
        Ok(v)
    }

    /// A comma-separated list.
    pub fn list<T: FromStr + Display + Clone>(
        &mut self,
        key: &str,
        default: &[T],
    ) -> Result<Vec<T>> {
        let v = match self.raw(key) {
            Some(raw) => raw
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| parse_as(key, s))
                .collect::<Result<Vec<T>>>()?,
            None => default.to_vec(),
        };
        self.record(key, join(&v, ","));
        Ok(v)
    }

    /// Rows separated by `;`, entries by `,`.
    pub fn matrix(&mut self, key: &str, default: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let v = match self.raw(key) {
            Some(raw) => raw
                .split(';')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|row| {
                    row.split(',')
                        .map(|s| parse_as(key, s))
                        .collect::<Result<Vec<f64>>>()
                })
                .collect::<Result<Vec<_>>>()?,
            None => default.to_vec(),
        };
        let text = v
            .iter()
            .map(|row| join(row, ","))
            .collect::<Vec<_>>()
            .join(";");
        self.record(key, text);
        Ok(v)
    }

    /// Kernel from `<prefix>.name` and its parameters.
    pub fn kernel(&mut self, prefix: &str, default: KernelSpec) -> Result<KernelSpec> {
        let name: String = self.value(&format!("{prefix}.name"), default.name().to_string())?;
        self.kernel_named(prefix, &name, Some(default))
    }

    /// Kernel `name` with parameters under `<prefix>.`; defaults come from
    /// `default` when it is the same kind of kernel.
    pub fn kernel_named(
        &mut self,
        prefix: &str,
        name: &str,
        default: Option<KernelSpec>,
    ) -> Result<KernelSpec> {
        match name {
            "se" => {
                let l0 = match default {
                    Some(KernelSpec::Se { lengthscale }) => lengthscale,
                    _ => 1.0,
                };
                let l = self.value(&format!("{prefix}.lengthscale"), l0)?;
                KernelSpec::se(l)
            }
            "matern" => {
                let (nu0, rho0, var0) = match default {
                    Some(KernelSpec::Matern { nu, rho, variance }) => (nu.value(), rho, variance),
                    _ => (2.5, 1.0, 1.0),
                };
                let nu = self.value(&format!("{prefix}.nu"), nu0)?;
                let rho = self.value(&format!("{prefix}.rho"), rho0)?;
                let var = self.value(&format!("{prefix}.variance"), var0)?;
                KernelSpec::matern(nu, rho, var)
            }
            "quadratic" => Ok(KernelSpec::quadratic()),
            other => Err(Error::Config(format!("unknown kernel '{other}'"))),
        }
    }

    /// `domain.dim`, `domain.lower`, `domain.upper`; a single bound is
    /// broadcast to every dimension.
    pub fn domain(&mut self, dim: usize, lower: f64, upper: f64) -> Result<BoxDomain> {
        let dim = self.value("domain.dim", dim)?;
        let mut broadcast = |key: &str, default: f64| -> Result<Vec<f64>> {
            let v = self.list(key, &[default])?;
            match v.len() {
                1 => Ok(vec![v[0]; dim]),
                n if n == dim => Ok(v),
                n => Err(Error::Config(format!(
                    "{key} has {n} entries, domain.dim is {dim}"
                ))),
            }
        };
        let lo = broadcast("domain.lower", lower)?;
        let hi = broadcast("domain.upper", upper)?;
        BoxDomain::new(lo, hi).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn search(&mut self, default: &SearchConfig, dim: usize) -> Result<SearchConfig> {
        let n = self.value("search.points_per_dim", default.resolution(dim))?;
        let polish = self.value("search.polish_iters", default.polish_iters)?;
        if n == 0 {
            return Err(Error::Config("search.points_per_dim must be >= 1".into()));
        }
        Ok(SearchConfig {
            points_per_dim: Some(n),
            polish_iters: polish,
        })
    }

    pub fn sample_mode(&mut self, default: SampleMode) -> Result<SampleMode> {
        let name: String = self.value("sampling.mode", default.name().to_string())?;
        name.parse()
    }

    /// `policy.first_point`: `center`, `acquisition`, or a comma-separated point.
    pub fn first_point(&mut self, default: &FirstPoint) -> Result<FirstPoint> {
        let text = match default {
            FirstPoint::Center => "center".to_string(),
            FirstPoint::Acquisition => "acquisition".to_string(),
            FirstPoint::Fixed(x) => join(x, ","),
        };
        let raw: String = self.value("policy.first_point", text)?;
        Ok(match raw.as_str() {
            "center" => FirstPoint::Center,
            "acquisition" => FirstPoint::Acquisition,
            pt => FirstPoint::Fixed(
                pt.split(',')
                    .map(|s| parse_as("policy.first_point", s))
                    .collect::<Result<Vec<f64>>>()?,
            ),
        })
    }

    /// A policy by name, with its parameters under `policy.`.
    pub fn policy_kind(&mut self, name: &str) -> Result<PolicyKind> {
        match name {
            "lcb" => {
                let beta = self.value("policy.beta", 1.0)?;
                let variant: String = self.value("policy.variant", "plain".to_string())?;
                let variant = match variant.as_str() {
                    "plain" => LcbVariant::Plain,
                    "certified" => LcbVariant::Certified,
                    other => return Err(Error::Config(format!("unknown lcb variant '{other}'"))),
                };
                Ok(PolicyKind::Lcb { beta, variant })
            }
            "ei" => Ok(PolicyKind::Ei),
            "grid" => {
                let n: usize = self.value("policy.grid_points", 0)?;
                Ok(PolicyKind::Grid {
                    points_per_dim: (n > 0).then_some(n),
                })
            }
            "two_phase" => Ok(PolicyKind::TwoPhase),
            other => Err(Error::Config(format!("unknown policy '{other}'"))),
        }
    }

    /// Fail on keys that were never read, then return everything resolved.
    pub fn finish(self) -> Result<BTreeMap<String, String>> {
        let unknown: Vec<&String> = self
            .config
            .entries
            .keys()
            .filter(|k| !self.used.contains(*k))
            .collect();
        if !unknown.is_empty() {
            return Err(Error::Config(format!("unknown keys: {unknown:?}")));
        }
        Ok(self.resolved)
    }
}
