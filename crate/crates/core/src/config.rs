//! Flat `key = value` run configuration.
//!
//! Lines starting with `#` are comments. Values are parsed lazily by typed
//! accessors, so each subcommand only needs the keys it reads; every error
//! names the key and, when it came from the file, its line.

use std::collections::BTreeMap;

use sha2::{Digest, Sha256};

use crate::cantor::certificate::FitParams;
use crate::curve::Domain;
use crate::dangerous::DEFAULT_SCAN_LIMIT;
use crate::error::ConfigError;
use crate::poly::Poly;
use crate::rational::{parse_q, Q};

const KEYS: &[&str] = &[
    "domain",
    "lipschitz",
    "weights",
    "R",
    "measure",
    "rho0",
    "center",
    "q_max",
    "escape_samples",
    "xi_samples",
    "frontier",
    "rules",
    "scan_limit",
    "oracle_x",
    "oracle_Q",
    "oracle_M0",
    "transfer_count",
    "transfer_seed",
    "transfer_bound",
    "probe_x",
    "probe_q_max",
    "output",
    "certificate",
    "fit_C0",
    "fit_eta0",
];

/// Keys that name files and so do not enter the config hash.
const PATH_KEYS: &[&str] = &["output", "certificate"];

pub const DEFAULT_RULES: &str = "measure,dangerous-window,lattice-escape";
pub const DEFAULT_FRONTIER: &str = "diverse:64";

fn indexed(key: &str, prefix: &str) -> bool {
    key.strip_prefix(prefix).is_some_and(|k| k.parse::<usize>().is_ok_and(|i| i >= 1))
}

fn known(key: &str) -> bool {
    KEYS.contains(&key) || indexed(key, "phi") || indexed(key, "theta")
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
    /// Source line of each key read from a file.
    lines: BTreeMap<String, usize>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        let mut cfg = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let t = raw.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let (k, v) = t
                .split_once('=')
                .ok_or_else(|| ConfigError::Syntax { line, message: format!("expected key = value, got {t:?}") })?;
            let (k, v) = (k.trim(), v.trim());
            if !known(k) {
                return Err(ConfigError::Syntax { line, message: format!("unknown key {k:?}") });
            }
            if cfg.values.contains_key(k) {
                return Err(ConfigError::Syntax { line, message: format!("duplicate key {k:?}") });
            }
            cfg.values.insert(k.to_string(), v.to_string());
            cfg.lines.insert(k.to_string(), line);
        }
        Ok(cfg)
    }

    /// Applies `key=value` overrides. Keys already set in the file keep
    /// their file value; the ignored overrides are returned for warning.
    pub fn apply_overrides(&mut self, sets: &[String]) -> Result<Vec<String>, ConfigError> {
        let mut ignored = Vec::new();
        for s in sets {
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| ConfigError::Field { key: s.clone(), message: "override must be key=value".into() })?;
            let (k, v) = (k.trim(), v.trim());
            if !known(k) {
                return Err(ConfigError::Field { key: k.into(), message: "unknown key".into() });
            }
            match self.values.get(k) {
                Some(old) if self.lines.contains_key(k) => {
                    if old != v {
                        ignored.push(format!("{k}: config value {old:?} kept over {v:?}"));
                    }
                }
                _ => {
                    self.values.insert(k.to_string(), v.to_string());
                }
            }
        }
        Ok(ignored)
    }

    pub fn set(&mut self, key: &str, value: &str) {
        self.values.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Sorted `key = value` lines of every hashed key.
    pub fn canonical(&self) -> String {
        self.values
            .iter()
            .filter(|(k, _)| !PATH_KEYS.contains(&k.as_str()))
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    /// SHA-256 of the canonical text, lowercase hex.
    pub fn hash(&self) -> String {
        Sha256::digest(self.canonical().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    fn field(&self, key: &str, message: impl std::fmt::Display) -> ConfigError {
        let message = match self.lines.get(key) {
            Some(l) => format!("line {l}: {message}"),
            None => message.to_string(),
        };
        ConfigError::Field { key: key.to_string(), message }
    }

    fn require(&self, key: &str) -> Result<&str, ConfigError> {
        self.get(key).ok_or_else(|| ConfigError::Missing(key.to_string()))
    }

    fn rational(&self, key: &str) -> Result<Option<Q>, ConfigError> {
        self.get(key).map(|v| parse_q(v).map_err(|e| self.field(key, e))).transpose()
    }

    fn rational_list(&self, key: &str) -> Result<Option<Vec<Q>>, ConfigError> {
        self.get(key).map(|v| v.split(',').map(|s| parse_q(s).map_err(|e| self.field(key, e))).collect()).transpose()
    }

    fn integer<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|e| self.field(key, e)),
        }
    }

    fn polys(&self, prefix: &str) -> Result<Vec<Poly>, ConfigError> {
        let mut out = Vec::new();
        for i in 1.. {
            let key = format!("{prefix}{i}");
            match self.get(&key) {
                Some(v) => out.push(Poly::parse(v).map_err(|e| self.field(&key, e))?),
                None => break,
            }
        }
        let extra =
            self.values.keys().find(|k| indexed(k, prefix) && k[prefix.len()..].parse::<usize>().unwrap() > out.len());
        if let Some(k) = extra {
            return Err(self.field(k, format!("{prefix} components must be numbered 1..n without gaps")));
        }
        if out.is_empty() {
            return Err(ConfigError::Missing(format!("{prefix}1")));
        }
        Ok(out)
    }

    /// `φ₁, …, φₙ` from `phi1 … phin`.
    pub fn curve(&self) -> Result<Vec<Poly>, ConfigError> {
        self.polys("phi")
    }

    pub fn shift(&self) -> Result<Vec<Poly>, ConfigError> {
        self.polys("theta")
    }

    pub fn domain(&self) -> Result<Domain, ConfigError> {
        let v = self.rational_list("domain")?.ok_or_else(|| ConfigError::Missing("domain".into()))?;
        if v.len() != 2 {
            return Err(self.field("domain", "expected two endpoints a,b"));
        }
        Domain::new(v[0].clone(), v[1].clone()).map_err(|e| self.field("domain", e))
    }

    pub fn lipschitz(&self) -> Result<Option<Vec<Q>>, ConfigError> {
        self.rational_list("lipschitz")
    }

    /// Entries pair with `phi1, phi2, …` by position, so they must already be
    /// non-increasing; reordering them would silently pair the wrong exponent.
    pub fn weights(&self) -> Result<Vec<Q>, ConfigError> {
        let w = self.rational_list("weights")?.ok_or_else(|| ConfigError::Missing("weights".into()))?;
        if w.windows(2).any(|p| p[0] < p[1]) {
            return Err(self.field("weights", "must be non-increasing, largest first"));
        }
        Ok(w)
    }

    pub fn r(&self) -> Result<u64, ConfigError> {
        let r: u64 = self.require("R")?.parse().map_err(|e| self.field("R", e))?;
        if r < 2 {
            return Err(self.field("R", "must be at least 2"));
        }
        Ok(r)
    }

    pub fn measure(&self) -> &str {
        self.get("measure").unwrap_or("lebesgue")
    }

    pub fn rho0(&self) -> Result<Q, ConfigError> {
        Ok(self.rational("rho0")?.unwrap_or_else(|| Q::from_integer(1.into())))
    }

    pub fn center(&self) -> Result<Option<Q>, ConfigError> {
        self.rational("center")
    }

    pub fn q_max(&self) -> Result<usize, ConfigError> {
        self.integer("q_max", 8)
    }

    pub fn escape_samples(&self) -> Result<usize, ConfigError> {
        self.integer("escape_samples", 9)
    }

    pub fn xi_samples(&self) -> Result<usize, ConfigError> {
        self.integer("xi_samples", 64)
    }

    pub fn frontier(&self) -> &str {
        self.get("frontier").unwrap_or(DEFAULT_FRONTIER)
    }

    pub fn rules(&self) -> &str {
        self.get("rules").unwrap_or(DEFAULT_RULES)
    }

    pub fn scan_limit(&self) -> Result<u64, ConfigError> {
        self.integer("scan_limit", DEFAULT_SCAN_LIMIT)
    }

    pub fn oracle_x(&self) -> Result<Q, ConfigError> {
        self.rational("oracle_x")?.ok_or_else(|| ConfigError::Missing("oracle_x".into()))
    }

    pub fn oracle_q(&self) -> Result<u64, ConfigError> {
        self.integer("oracle_Q", 100_000)
    }

    pub fn oracle_m0(&self) -> Result<u64, ConfigError> {
        self.integer("oracle_M0", 0)
    }

    pub fn transfer_count(&self) -> Result<usize, ConfigError> {
        self.integer("transfer_count", 500)
    }

    pub fn transfer_seed(&self) -> Result<u64, ConfigError> {
        self.integer("transfer_seed", 1)
    }

    pub fn transfer_bound(&self) -> Result<i64, ConfigError> {
        self.integer("transfer_bound", 6)
    }

    pub fn probe_x(&self) -> Result<Q, ConfigError> {
        self.rational("probe_x")?.ok_or_else(|| ConfigError::Missing("probe_x".into()))
    }

    pub fn probe_q_max(&self) -> Result<usize, ConfigError> {
        self.integer("probe_q_max", 8)
    }

    pub fn output(&self) -> Option<&str> {
        self.get("output")
    }

    pub fn certificate(&self) -> Option<&str> {
        self.get("certificate")
    }

    pub fn fit(&self) -> Result<Option<FitParams>, ConfigError> {
        match (self.rational("fit_C0")?, self.rational("fit_eta0")?) {
            (None, None) => Ok(None),
            (Some(c0), Some(eta0)) => Ok(Some(FitParams { c0, eta0 })),
            _ => Err(ConfigError::Missing("fit_C0 and fit_eta0 go together".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    const PARABOLA: &str = "# parabola\nphi1 = 0 1\nphi2 = 0 0 1\ndomain = -1,1\n\
        theta1 = 1/7\ntheta2 = 1/3 1/11\nweights = 1/2,1/2\nR = 32\nq_max = 6\n";

    #[test]
    fn parses_parabola() {
        let c = RunConfig::parse(PARABOLA).unwrap();
        assert_eq!(c.curve().unwrap(), vec![Poly::identity(), Poly::monomial(2)]);
        assert_eq!(c.shift().unwrap()[1], Poly::parse("1/3 1/11").unwrap());
        assert_eq!(c.weights().unwrap(), vec![q(1, 2), q(1, 2)]);
        assert_eq!(c.r().unwrap(), 32);
        assert_eq!(c.q_max().unwrap(), 6);
        assert_eq!(c.rho0().unwrap(), qi(1));
        assert_eq!(c.frontier(), DEFAULT_FRONTIER);
        assert!(c.fit().unwrap().is_none());
    }

    #[test]
    fn diagnostics_name_line_and_key() {
        match RunConfig::parse("R = 32\nwidth = 3\n") {
            Err(ConfigError::Syntax { line: 2, .. }) => {}
            e => panic!("{e:?}"),
        }
        let c = RunConfig::parse("R = many\n").unwrap();
        match c.r() {
            Err(ConfigError::Field { key, message }) => {
                assert_eq!(key, "R");
                assert!(message.starts_with("line 1"));
            }
            e => panic!("{e:?}"),
        }
        assert!(matches!(RunConfig::parse("phi1 = 0 1\nphi3 = 1\n").unwrap().curve(), Err(ConfigError::Field { .. })));
        assert!(matches!(RunConfig::parse("R = 3\nR = 4\n"), Err(ConfigError::Syntax { line: 2, .. })));
        let c = RunConfig::parse("weights = 1/4,3/4\n").unwrap();
        assert!(matches!(c.weights(), Err(ConfigError::Field { .. })));
    }

    #[test]
    fn file_wins_over_overrides() {
        let mut c = RunConfig::parse(PARABOLA).unwrap();
        let ignored = c.apply_overrides(&["q_max=9".into(), "frontier=beam:8".into(), "R=32".into()]).unwrap();
        assert_eq!(ignored.len(), 1);
        assert_eq!(c.q_max().unwrap(), 6);
        assert_eq!(c.frontier(), "beam:8");
    }

    #[test]
    fn hash_ignores_paths_and_layout() {
        let a = RunConfig::parse(PARABOLA).unwrap();
        let mut b = RunConfig::parse(&PARABOLA.lines().rev().collect::<Vec<_>>().join("\n")).unwrap();
        b.set("output", "/tmp/x.cert");
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
        let mut c = a.clone();
        c.set("q_max", "7");
        assert_ne!(a.hash(), c.hash());
    }
}
