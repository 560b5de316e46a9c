//! Experiment geometry, pathloss, OFDM grid and wideband channel synthesis.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::circuit::CircuitParams;
use crate::cmath::{CMat, CVec, C64, ZERO};
use crate::error::{invalid, Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub type Point = [f64; 3];

/// Which kind of surface each base station controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RisKind {
    /// Switch-routed surface, `S` is optimized over permutations.
    Bd,
    /// Conventional surface, `S = I`.
    Diag,
    /// Direct links only.
    None,
}

/// Whether users exchange pricing information.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pricing {
    Cooperative,
    ZeroPricing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Scheme {
    pub ris: RisKind,
    pub pricing: Pricing,
}

impl Scheme {
    pub const BD_COOP: Scheme = Scheme { ris: RisKind::Bd, pricing: Pricing::Cooperative };
    pub const BD_ZP: Scheme = Scheme { ris: RisKind::Bd, pricing: Pricing::ZeroPricing };
    pub const DIAG_COOP: Scheme = Scheme { ris: RisKind::Diag, pricing: Pricing::Cooperative };
    pub const DIAG_ZP: Scheme = Scheme { ris: RisKind::Diag, pricing: Pricing::ZeroPricing };
    pub const NORIS_COOP: Scheme = Scheme { ris: RisKind::None, pricing: Pricing::Cooperative };
    pub const NORIS_ZP: Scheme = Scheme { ris: RisKind::None, pricing: Pricing::ZeroPricing };

    pub const ALL: [Scheme; 6] = [
        Self::BD_COOP,
        Self::BD_ZP,
        Self::DIAG_COOP,
        Self::DIAG_ZP,
        Self::NORIS_COOP,
        Self::NORIS_ZP,
    ];

    pub fn cooperative(&self) -> bool {
        self.pricing == Pricing::Cooperative
    }

    /// Regularization weight used when the config does not set one.
    pub fn default_tau(&self) -> f64 {
        match self.pricing {
            Pricing::Cooperative => 1.85,
            Pricing::ZeroPricing => 1.25,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ris = match self.ris {
            RisKind::Bd => "bd",
            RisKind::Diag => "diag",
            RisKind::None => "noris",
        };
        let pricing = match self.pricing {
            Pricing::Cooperative => "coop",
            Pricing::ZeroPricing => "zp",
        };
        write!(f, "{ris}-{pricing}")
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|sch| sch.to_string() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| {
                invalid(
                    "scheme",
                    format!("unknown scheme `{s}` (expected one of bd-coop, bd-zp, diag-coop, diag-zp, noris-coop, noris-zp)"),
                )
            })
    }
}

impl Serialize for Scheme {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Scheme {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// How users are sequenced within one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UpdateOrder {
    /// Every user responds to the same previous iterate.
    #[default]
    Jacobi,
    /// Users update one after another, each seeing earlier updates.
    GaussSeidel,
}

/// Node coordinates in meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Positions {
    pub bs: Vec<Point>,
    pub ris: Vec<Point>,
    pub ue: Vec<Point>,
}

/// Full experiment configuration in SI units.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    /// Number of BS-RIS-UE triplets.
    pub q: usize,
    /// BS antennas.
    pub n: usize,
    /// RIS elements.
    pub m: usize,
    /// Subcarriers.
    pub k: usize,
    /// Delay taps.
    pub d: usize,
    /// Carrier frequency in Hz.
    pub fc: f64,
    /// Bandwidth in Hz.
    pub bw: f64,
    /// Per-BS power budget in W.
    pub power: f64,
    /// Noise power in W.
    pub sigma2: f64,
    pub alpha_bs_ue: f64,
    pub alpha_bs_ris: f64,
    pub alpha_ris_ue: f64,
    pub positions: Positions,
    pub circuit: CircuitParams,
    pub tau: f64,
    pub eps: f64,
    pub seed: u64,
    pub scheme: Scheme,
    /// Iteration cap.
    pub t_max: usize,
    /// Decay rate of the diminishing step size.
    pub step_rho: f64,
    pub update_order: UpdateOrder,
    /// Cyclic prefix length; recorded but not part of the rate model.
    pub n_cp: usize,
}

impl Scenario {
    /// Desk-scale defaults (3.5 GHz, 100 MHz, 30 dBm) with `Q` triplets.
    pub fn desk(q: usize, n: usize, m: usize, k: usize, d: usize) -> Result<Self> {
        let s = Self {
            q,
            n,
            m,
            k,
            d,
            fc: 3.5e9,
            bw: 100e6,
            power: dbm_to_watt(30.0),
            sigma2: dbm_to_watt(-90.0),
            alpha_bs_ue: 3.7,
            alpha_bs_ris: 2.6,
            alpha_ris_ue: 2.2,
            positions: default_geometry(q, 60.0)?,
            circuit: CircuitParams::default(),
            tau: Scheme::BD_COOP.default_tau(),
            eps: 1e-3,
            seed: 1,
            scheme: Scheme::BD_COOP,
            t_max: 500,
            step_rho: 3.0,
            update_order: UpdateOrder::Jacobi,
            n_cp: 16,
        };
        s.validate()?;
        Ok(s)
    }

    /// Same scenario with another scheme and that scheme's default `tau`.
    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self.tau = scheme.default_tau();
        self
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.fc
    }

    pub fn validate(&self) -> Result<()> {
        if self.q < 1 {
            return Err(invalid("Q", "must be >= 1"));
        }
        if self.n < 1 {
            return Err(invalid("N", "must be >= 1"));
        }
        if self.m < 1 {
            return Err(invalid("M", "must be >= 1"));
        }
        if self.d < 1 {
            return Err(invalid("D", "must be >= 1"));
        }
        if self.k < self.d {
            return Err(invalid("K", "must be >= D"));
        }
        for (key, v) in [
            ("fc", self.fc),
            ("BW", self.bw),
            ("P", self.power),
            ("sigma2", self.sigma2),
            ("tau", self.tau),
            ("eps", self.eps),
        ] {
            if !(v > 0.0) {
                return Err(invalid(key, format!("must be > 0, got {v}")));
            }
        }
        if !(self.step_rho >= 0.0) || !self.step_rho.is_finite() {
            return Err(invalid("step_rho", "must be finite and >= 0"));
        }
        if self.t_max < 1 {
            return Err(invalid("t_max", "must be >= 1"));
        }
        self.circuit.validate()?;
        let p = &self.positions;
        for (key, list) in [("positions.bs", &p.bs), ("positions.ris", &p.ris), ("positions.ue", &p.ue)] {
            if list.len() != self.q {
                return Err(invalid(key, format!("expected {} entries, got {}", self.q, list.len())));
            }
            if list.iter().flatten().any(|x| !x.is_finite()) {
                return Err(invalid(key, "coordinates must be finite"));
            }
        }
        let all: Vec<&Point> = p.bs.iter().chain(&p.ris).chain(&p.ue).collect();
        for (i, a) in all.iter().enumerate() {
            for b in &all[i + 1..] {
                if distance(a, b) <= 0.0 {
                    return Err(invalid("positions", "nodes must be at distinct locations"));
                }
            }
        }
        Ok(())
    }
}

pub fn dbm_to_watt(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watt_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

pub fn distance(a: &Point, b: &Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Center frequency of every subcarrier, `fc + (k - (K+1)/2) BW/K` for `k = 1..=K`.
pub fn subcarrier_frequencies(fc: f64, bw: f64, k: usize) -> Vec<f64> {
    let spacing = bw / k as f64;
    let mid = (k as f64 + 1.0) / 2.0;
    (1..=k).map(|i| fc + (i as f64 - mid) * spacing).collect()
}

/// Linear power gain `PL0 (d/d0)^-alpha` with `PL0 = (lambda/4 pi)^2`, `d0 = 1 m`.
pub fn pathloss(d: f64, alpha: f64, fc: f64) -> Result<f64> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::Domain(format!("distance must be > 0, got {d}")));
    }
    let lambda = SPEED_OF_LIGHT / fc;
    let pl0 = (lambda / (4.0 * PI)).powi(2);
    Ok(pl0 * d.powf(-alpha))
}

/// The four-cell layout: BSs on the corners of a `w`-wide square at 5 m,
/// UEs on `y = 60` at 1.5 m, surfaces at 3 m next to the UEs.
pub fn default_geometry(q: usize, w: f64) -> Result<Positions> {
    if !(1..=4).contains(&q) {
        return Err(Error::Geometry(format!("default layout supports Q in 1..=4, got {q}")));
    }
    let bs = [[0.0, 0.0, 5.0], [w, 0.0, 5.0], [0.0, w, 5.0], [w, w, 5.0]];
    let ue_x = [27.0, 33.0, 28.5, 31.5];
    let ris = [[27.75, 62.5, 3.0], [32.25, 62.5, 3.0], [27.75, 57.5, 3.0], [32.25, 57.5, 3.0]];
    Ok(Positions {
        bs: bs[..q].to_vec(),
        ris: ris[..q].to_vec(),
        ue: ue_x[..q].iter().map(|&x| [x, 60.0, 1.5]).collect(),
    })
}

/// Antenna positions of a ULA along x centered on `center`, spacing `lambda/2`.
pub fn ula_elements(center: &Point, n: usize, lambda: f64) -> Vec<Point> {
    let half = (n as f64 - 1.0) / 2.0;
    (0..n)
        .map(|i| [center[0] + (i as f64 - half) * lambda / 2.0, center[1], center[2]])
        .collect()
}

/// Element positions of a UPA on the xz-plane with `ceil(sqrt(M))` columns.
pub fn upa_elements(center: &Point, m: usize, lambda: f64) -> Vec<Point> {
    let cols = (m as f64).sqrt().ceil() as usize;
    let rows = m.div_ceil(cols);
    let (hc, hr) = ((cols as f64 - 1.0) / 2.0, (rows as f64 - 1.0) / 2.0);
    (0..m)
        .map(|i| {
            let (r, c) = (i / cols, i % cols);
            [
                center[0] + (c as f64 - hc) * lambda / 2.0,
                center[1],
                center[2] + (r as f64 - hr) * lambda / 2.0,
            ]
        })
        .collect()
}

/// Frequency-domain channels for every link and subcarrier.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    /// `h[j][q][k]`: direct BS_j -> UE_q, length N.
    pub h: Vec<Vec<Vec<CVec>>>,
    /// `big_h[q][k]`: BS_q -> RIS_q, M x N.
    pub big_h: Vec<Vec<CMat>>,
    /// `g[j][q][k]`: RIS_j -> UE_q, length M.
    pub g: Vec<Vec<Vec<CVec>>>,
}

impl ChannelSet {
    pub fn users(&self) -> usize {
        self.h.len()
    }

    pub fn subcarriers(&self) -> usize {
        self.big_h.first().map_or(0, Vec::len)
    }

    pub fn check_dims(&self, q: usize, n: usize, m: usize, k: usize) -> Result<()> {
        let bad = |what: &str| Err(Error::Dimension(format!("channel set: {what}")));
        if self.h.len() != q || self.g.len() != q || self.big_h.len() != q {
            return bad("user count");
        }
        for j in 0..q {
            if self.h[j].len() != q || self.g[j].len() != q || self.big_h[j].len() != k {
                return bad("link count");
            }
            for hk in &self.big_h[j] {
                if hk.rows() != m || hk.cols() != n {
                    return bad("BS-RIS matrix shape");
                }
            }
            for qq in 0..q {
                if self.h[j][qq].len() != k || self.g[j][qq].len() != k {
                    return bad("subcarrier count");
                }
                if self.h[j][qq].iter().any(|v| v.len() != n) {
                    return bad("direct channel length");
                }
                if self.g[j][qq].iter().any(|v| v.len() != m) {
                    return bad("RIS-UE channel length");
                }
            }
        }
        Ok(())
    }

    /// Zeroes every cross link (`j != q`), direct and reflected.
    pub fn without_cross_links(mut self) -> Self {
        for j in 0..self.h.len() {
            for q in 0..self.h.len() {
                if j != q {
                    self.h[j][q].iter_mut().flatten().for_each(|x| *x = ZERO);
                    self.g[j][q].iter_mut().flatten().for_each(|x| *x = ZERO);
                }
            }
        }
        self
    }
}

/// Draws `d` circularly symmetric Gaussian taps of variance `1/d` each.
pub fn draw_taps<R: Rng>(rng: &mut R, d: usize) -> CVec {
    let sd = (0.5 / d as f64).sqrt();
    (0..d)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re * sd, im * sd)
        })
        .collect()
}

/// Unitary `K`-point DFT of the zero-padded tap vector.
pub fn taps_to_frequency(taps: &[C64], k: usize) -> CVec {
    let norm = 1.0 / (k as f64).sqrt();
    (0..k)
        .map(|bin| {
            taps.iter().enumerate().fold(ZERO, |acc, (d, t)| {
                let ang = -2.0 * PI * (bin * d % k) as f64 / k as f64;
                acc + t * C64::from_polar(1.0, ang)
            }) * norm
        })
        .collect()
}

/// One scalar link: taps, DFT, then pathloss amplitude.
fn draw_link<R: Rng>(rng: &mut R, d: usize, k: usize, gain: f64) -> CVec {
    let amp = gain.sqrt();
    taps_to_frequency(&draw_taps(rng, d), k)
        .into_iter()
        .map(|x| x * amp)
        .collect()
}

/// Synthesizes all channels; draw order is direct links, BS-RIS links, then
/// RIS-UE links, each in `(j, q)` row-major order.
pub fn synthesize_channels(s: &Scenario) -> Result<ChannelSet> {
    s.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let lambda = s.wavelength();
    let pos = &s.positions;
    let bs_arrays: Vec<Vec<Point>> = pos.bs.iter().map(|c| ula_elements(c, s.n, lambda)).collect();
    let ris_arrays: Vec<Vec<Point>> = pos.ris.iter().map(|c| upa_elements(c, s.m, lambda)).collect();

    // Per-entry link responses, indexed [entry][k], then transposed to [k][entry].
    let mut h = vec![vec![Vec::new(); s.q]; s.q];
    for j in 0..s.q {
        for q in 0..s.q {
            let mut per_ant = Vec::with_capacity(s.n);
            for ant in &bs_arrays[j] {
                let pl = pathloss(distance(ant, &pos.ue[q]), s.alpha_bs_ue, s.fc)?;
                per_ant.push(draw_link(&mut rng, s.d, s.k, pl));
            }
            h[j][q] = (0..s.k).map(|k| per_ant.iter().map(|v| v[k]).collect()).collect();
        }
    }

    let mut big_h = Vec::with_capacity(s.q);
    for q in 0..s.q {
        let mut entries = Vec::with_capacity(s.m * s.n);
        for elem in &ris_arrays[q] {
            for ant in &bs_arrays[q] {
                let pl = pathloss(distance(ant, elem), s.alpha_bs_ris, s.fc)?;
                entries.push(draw_link(&mut rng, s.d, s.k, pl));
            }
        }
        big_h.push(
            (0..s.k)
                .map(|k| CMat::from_fn(s.m, s.n, |r, c| entries[r * s.n + c][k]))
                .collect(),
        );
    }

    let mut g = vec![vec![Vec::new(); s.q]; s.q];
    for j in 0..s.q {
        for q in 0..s.q {
            let mut per_elem = Vec::with_capacity(s.m);
            for elem in &ris_arrays[j] {
                let pl = pathloss(distance(elem, &pos.ue[q]), s.alpha_ris_ue, s.fc)?;
                per_elem.push(draw_link(&mut rng, s.d, s.k, pl));
            }
            g[j][q] = (0..s.k).map(|k| per_elem.iter().map(|v| v[k]).collect()).collect();
        }
    }

    Ok(ChannelSet { h, big_h, g })
}
