//! TOML scenario files. Powers are given in dBm here and converted to watts
//! on load; everything past this module is SI.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::circuit::CircuitParams;
use crate::error::{invalid, Error, Result};
use crate::scenario::{dbm_to_watt, default_geometry, watt_to_dbm, Positions, Scenario, Scheme, UpdateOrder};

/// On-disk form of a scenario, one key per field.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(rename = "Q")]
    pub q: Option<usize>,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    #[serde(rename = "M")]
    pub m: Option<usize>,
    #[serde(rename = "K")]
    pub k: Option<usize>,
    #[serde(rename = "D")]
    pub d: Option<usize>,
    pub fc: Option<f64>,
    #[serde(rename = "BW")]
    pub bw: Option<f64>,
    #[serde(rename = "P_dbm")]
    pub p_dbm: Option<f64>,
    pub sigma2_dbm: Option<f64>,
    pub alpha_bs_ue: Option<f64>,
    pub alpha_bs_ris: Option<f64>,
    pub alpha_ris_ue: Option<f64>,
    /// Side of the default deployment square in meters.
    pub width: Option<f64>,
    pub tau: Option<f64>,
    pub eps: Option<f64>,
    pub seed: Option<u64>,
    pub scheme: Option<Scheme>,
    pub t_max: Option<usize>,
    pub step_rho: Option<f64>,
    pub update_order: Option<UpdateOrder>,
    pub n_cp: Option<usize>,
    pub circuit: Option<CircuitParams>,
    pub positions: Option<Positions>,
}

const DEFAULT_WIDTH: f64 = 60.0;

fn required(v: Option<usize>, key: &'static str) -> Result<usize> {
    v.ok_or_else(|| invalid(key, "required key is missing"))
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Resolves defaults and converts to SI units.
    pub fn into_scenario(self) -> Result<Scenario> {
        let q = required(self.q, "Q")?;
        let n = required(self.n, "N")?;
        let m = required(self.m, "M")?;
        let k = required(self.k, "K")?;
        let d = required(self.d, "D")?;
        if !(1..=4).contains(&q) && self.positions.is_none() {
            return Err(invalid("positions", format!("must be given explicitly for Q = {q}")));
        }
        let positions = match self.positions {
            Some(p) => p,
            None => default_geometry(q, self.width.unwrap_or(DEFAULT_WIDTH))?,
        };
        let mut s = Scenario::desk(1, n.max(1), m.max(1), k.max(1), 1)?;
        s.q = q;
        s.n = n;
        s.m = m;
        s.k = k;
        s.d = d;
        s.positions = positions;
        let scheme = self.scheme.unwrap_or(s.scheme);
        s = s.with_scheme(scheme);
        macro_rules! set {
            ($field:ident, $src:expr) => {
                if let Some(v) = $src {
                    s.$field = v;
                }
            };
        }
        set!(fc, self.fc);
        set!(bw, self.bw);
        set!(power, self.p_dbm.map(dbm_to_watt));
        set!(sigma2, self.sigma2_dbm.map(dbm_to_watt));
        set!(alpha_bs_ue, self.alpha_bs_ue);
        set!(alpha_bs_ris, self.alpha_bs_ris);
        set!(alpha_ris_ue, self.alpha_ris_ue);
        set!(tau, self.tau);
        set!(eps, self.eps);
        set!(seed, self.seed);
        set!(t_max, self.t_max);
        set!(step_rho, self.step_rho);
        set!(update_order, self.update_order);
        set!(n_cp, self.n_cp);
        set!(circuit, self.circuit);
        s.validate()?;
        Ok(s)
    }

    /// Fully populated config describing `s`.
    pub fn from_scenario(s: &Scenario) -> Self {
        Self {
            q: Some(s.q),
            n: Some(s.n),
            m: Some(s.m),
            k: Some(s.k),
            d: Some(s.d),
            fc: Some(s.fc),
            bw: Some(s.bw),
            p_dbm: Some(watt_to_dbm(s.power)),
            sigma2_dbm: Some(watt_to_dbm(s.sigma2)),
            alpha_bs_ue: Some(s.alpha_bs_ue),
            alpha_bs_ris: Some(s.alpha_bs_ris),
            alpha_ris_ue: Some(s.alpha_ris_ue),
            width: None,
            tau: Some(s.tau),
            eps: Some(s.eps),
            seed: Some(s.seed),
            scheme: Some(s.scheme),
            t_max: Some(s.t_max),
            step_rho: Some(s.step_rho),
            update_order: Some(s.update_order),
            n_cp: Some(s.n_cp),
            circuit: Some(s.circuit),
            positions: Some(s.positions.clone()),
        }
    }
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    ScenarioConfig::parse(text)?.into_scenario()
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    parse_scenario(&std::fs::read_to_string(path)?)
}

/// Canonical TOML text with every key spelled out.
pub fn canonical_toml(s: &Scenario) -> Result<String> {
    toml::to_string(&ScenarioConfig::from_scenario(s)).map_err(|e| Error::Config(e.to_string()))
}

/// Writes the canonical config next to `output` as `<stem>.config.toml`.
pub fn write_canonical(s: &Scenario, output: &Path) -> Result<PathBuf> {
    let stem = output.file_stem().and_then(|x| x.to_str()).unwrap_or("run");
    let path = output.with_file_name(format!("{stem}.config.toml"));
    std::fs::write(&path, canonical_toml(s)?)?;
    Ok(path)
}
