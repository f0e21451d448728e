use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use ini::Ini;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Resource caps a campaign may not exceed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    pub max_paths: u64,
    pub min_dt: f64,
    pub max_quad_nodes: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Self { max_paths: 1_000_000, min_dt: 1e-5, max_quad_nodes: 200_000 }
    }
}

/// One verification campaign: what to run, against which tolerances, under
/// which budget.
///
/// INI layout:
///
/// ```text
/// [campaign]
/// id = warren-dyson
/// family = bm
/// seed = 7
/// threads = 4
/// out = results
///
/// [params]
/// paths = 20000
/// dt = 5e-4
///
/// [tolerances]
/// ks = 0.02
///
/// [budget]
/// max_paths = 1000000
/// min_dt = 1e-5
/// max_quad_nodes = 200000
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub id: String,
    pub family: String,
    pub seed: u64,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
    pub params: BTreeMap<String, String>,
    pub tolerances: BTreeMap<String, f64>,
    pub budget: Budget,
    pub out_dir: PathBuf,
}

fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse::<T>().map_err(|_| Error::Config(format!("cannot parse {key} = '{v}'")))
}

impl CampaignConfig {
    pub fn new(id: &str, family: &str) -> Self {
        Self {
            id: id.to_string(),
            family: family.to_string(),
            seed: 1,
            threads: None,
            params: BTreeMap::new(),
            tolerances: BTreeMap::new(),
            budget: Budget::default(),
            out_dir: PathBuf::from("."),
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn tolerance(mut self, key: &str, value: f64) -> Self {
        self.tolerances.insert(key.to_string(), value);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn from_ini_str(text: &str) -> Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| Error::Config(format!("config parse: {e}")))?;
        Self::from_ini(&ini)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let ini = Ini::load_from_file(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_ini(&ini)
    }

    fn from_ini(ini: &Ini) -> Result<Self> {
        let head = ini.section(Some("campaign")).ok_or_else(|| Error::Config("missing [campaign] section".into()))?;
        let id = head.get("id").ok_or_else(|| Error::Config("[campaign] needs an id".into()))?;
        let mut cfg = Self::new(id.trim(), head.get("family").unwrap_or("").trim());
        if let Some(s) = head.get("seed") {
            cfg.seed = parse("seed", s)?;
        }
        if let Some(s) = head.get("threads") {
            cfg.threads = Some(parse("threads", s)?);
        }
        if let Some(s) = head.get("out") {
            cfg.out_dir = PathBuf::from(s.trim());
        }
        if let Some(p) = ini.section(Some("params")) {
            for (k, v) in p.iter() {
                cfg.params.insert(k.to_string(), v.trim().to_string());
            }
        }
        if let Some(p) = ini.section(Some("tolerances")) {
            for (k, v) in p.iter() {
                cfg.tolerances.insert(k.to_string(), parse(k, v)?);
            }
        }
        if let Some(p) = ini.section(Some("budget")) {
            for (k, v) in p.iter() {
                match k {
                    "max_paths" => cfg.budget.max_paths = parse(k, v)?,
                    "min_dt" => cfg.budget.min_dt = parse(k, v)?,
                    "max_quad_nodes" => cfg.budget.max_quad_nodes = parse(k, v)?,
                    _ => return Err(Error::Config(format!("unknown budget key '{k}'"))),
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Every tolerance strictly positive and finite; budget caps sane.
    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::Config("empty campaign id".into()));
        }
        for (k, &v) in &self.tolerances {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("tolerance {k} = {v} must be positive and finite")));
            }
        }
        let b = &self.budget;
        if b.max_paths == 0 || !(b.min_dt > 0.0) || b.max_quad_nodes == 0 {
            return Err(Error::Config(format!("invalid budget {b:?}")));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        Ok(())
    }

    pub fn tol(&self, key: &str) -> Result<f64> {
        self.tolerances.get(key).copied().ok_or_else(|| Error::Config(format!("campaign {} has no tolerance '{key}'", self.id)))
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.params.get(key).map(String::as_str)
    }

    pub fn get_f64(&self, key: &str, default: f64) -> Result<f64> {
        self.params.get(key).map_or(Ok(default), |v| parse(key, v))
    }

    pub fn get_u64(&self, key: &str, default: u64) -> Result<u64> {
        self.params.get(key).map_or(Ok(default), |v| parse(key, v))
    }

    /// `paths` parameter checked against the budget.
    pub fn paths(&self, default: u64) -> Result<u64> {
        let n = self.get_u64("paths", default)?;
        self.charge_paths(n)?;
        Ok(n)
    }

    pub fn charge_paths(&self, n: u64) -> Result<()> {
        if n > self.budget.max_paths {
            return Err(Error::Budget(format!("{n} paths requested, cap is {}", self.budget.max_paths)));
        }
        Ok(())
    }

    /// `dt` parameter checked against the budget.
    pub fn dt(&self, default: f64) -> Result<f64> {
        let dt = self.get_f64("dt", default)?;
        self.charge_dt(dt)?;
        Ok(dt)
    }

    pub fn charge_dt(&self, dt: f64) -> Result<()> {
        if !(dt > 0.0) || dt < self.budget.min_dt {
            return Err(Error::Budget(format!("dt = {dt} is below the cap {}", self.budget.min_dt)));
        }
        Ok(())
    }

    pub fn charge_nodes(&self, nodes: usize) -> Result<()> {
        if nodes > self.budget.max_quad_nodes {
            return Err(Error::Budget(format!("{nodes} quadrature nodes requested, cap is {}", self.budget.max_quad_nodes)));
        }
        Ok(())
    }
}
