//! End-to-end channels through the surfaces, SINR and achievable rates.

use std::f64::consts::LN_2;

use crate::circuit::{self, CircuitParams};
use crate::cmath::{dot_h, stack_power, CVec, RMat, C64};
use crate::error::{Error, Result};
use crate::scenario::{subcarrier_frequencies, synthesize_channels, ChannelSet, RisKind, Scenario};

/// Channels plus everything needed to evaluate rates on them.
#[derive(Debug, Clone)]
pub struct Network {
    pub channels: ChannelSet,
    /// Subcarrier center frequencies in Hz.
    pub freqs: Vec<f64>,
    pub circuit: CircuitParams,
    /// Noise power in W.
    pub sigma2: f64,
    /// `RisKind::None` drops the reflected path from every composite channel.
    pub ris: RisKind,
}

impl Network {
    pub fn new(scenario: &Scenario, channels: ChannelSet) -> Result<Self> {
        channels.check_dims(scenario.q, scenario.n, scenario.m, scenario.k)?;
        Ok(Self {
            channels,
            freqs: subcarrier_frequencies(scenario.fc, scenario.bw, scenario.k),
            circuit: scenario.circuit,
            sigma2: scenario.sigma2,
            ris: scenario.scheme.ris,
        })
    }

    /// Synthesizes the scenario's channels and wraps them.
    pub fn from_scenario(scenario: &Scenario) -> Result<Self> {
        Self::new(scenario, synthesize_channels(scenario)?)
    }

    pub fn users(&self) -> usize {
        self.channels.users()
    }

    pub fn subcarriers(&self) -> usize {
        self.freqs.len()
    }

    pub fn antennas(&self) -> usize {
        self.channels.h[0][0][0].len()
    }

    pub fn elements(&self) -> usize {
        self.channels.g[0][0][0].len()
    }
}

/// One user's optimization variables plus the cached per-subcarrier reflections.
#[derive(Debug, Clone, PartialEq)]
pub struct UserState {
    /// `w[k]`, length N each.
    pub w: Vec<CVec>,
    /// Capacitances in F, length M.
    pub c: Vec<f64>,
    /// Switch matrix, M x M. A permutation matrix for every feasible iterate;
    /// gradient checks also evaluate relaxed (doubly stochastic) points.
    pub s: RMat,
    /// `phi[k][m] = reflection(f_k, c[m])`.
    pub phi: Vec<CVec>,
}

impl UserState {
    pub fn new(w: Vec<CVec>, c: Vec<f64>, s: RMat, freqs: &[f64], circuit: &CircuitParams) -> Result<Self> {
        let phi = reflections(freqs, &c, circuit)?;
        Ok(Self { w, c, s, phi })
    }

    /// Replaces the capacitances and refreshes the reflection cache.
    pub fn set_capacitance(&mut self, c: Vec<f64>, freqs: &[f64], circuit: &CircuitParams) -> Result<()> {
        self.phi = reflections(freqs, &c, circuit)?;
        self.c = c;
        Ok(())
    }

    pub fn power(&self) -> f64 {
        stack_power(&self.w)
    }

    /// Checks the power, box and permutation constraints.
    pub fn check_feasible(&self, power: f64, circuit: &CircuitParams) -> Result<()> {
        let p = self.power();
        if p > power + 1e-9 {
            return Err(Error::Numeric(format!("power {p} exceeds budget {power}")));
        }
        if let Some(c) = self.c.iter().find(|&&c| !circuit.contains(c)) {
            return Err(Error::Numeric(format!("capacitance {c} outside box")));
        }
        if !self.s.is_permutation() {
            return Err(Error::Numeric("switch matrix is not a permutation".into()));
        }
        Ok(())
    }
}

/// `phi[k][m]` for every subcarrier and element.
pub fn reflections(freqs: &[f64], c: &[f64], circuit: &CircuitParams) -> Result<Vec<CVec>> {
    freqs
        .iter()
        .map(|&f| c.iter().map(|&cm| circuit::reflection(f, cm, circuit)).collect())
        .collect()
}

/// Returns `f` with `f^H = h^H + g^H S diag(phi) H`.
pub fn composite_channel(
    h: &[C64],
    g: &[C64],
    s: &RMat,
    phi: &[C64],
    big_h: &crate::cmath::CMat,
) -> Result<CVec> {
    let m = g.len();
    if s.rows() != m || s.cols() != m || phi.len() != m || big_h.rows() != m || big_h.cols() != h.len() {
        return Err(Error::Dimension(format!(
            "composite channel: h {}, g {}, S {}x{}, phi {}, H {}x{}",
            h.len(),
            m,
            s.rows(),
            s.cols(),
            phi.len(),
            big_h.rows(),
            big_h.cols()
        )));
    }
    // f = h + H^H diag(phi)^H S^T g
    let z = s.mul_t_cvec(g);
    let y: CVec = z.iter().zip(phi).map(|(zm, p)| p.conj() * zm).collect();
    let refl = big_h.mul_h_vec(&y);
    Ok(h.iter().zip(refl).map(|(a, b)| a + b).collect())
}

/// Composite channels and received amplitudes for one set of iterates.
///
/// Built once per iterate; any change to `w`, `c` or `S` means building a
/// new snapshot.
#[derive(Debug, Clone)]
pub struct Snapshot {
    /// `f[j][q][k]`: BS_j -> UE_q through RIS_j.
    pub f: Vec<Vec<Vec<CVec>>>,
    /// `amp[j][q][k] = f[j][q][k]^H w_j[k]`.
    pub amp: Vec<Vec<Vec<C64>>>,
    /// Interference-plus-noise power `mui[q][k]`.
    pub mui: Vec<Vec<f64>>,
}

impl Snapshot {
    pub fn new(net: &Network, states: &[UserState]) -> Result<Self> {
        let q_n = net.users();
        let k_n = net.subcarriers();
        if states.len() != q_n {
            return Err(Error::Dimension(format!("{} states for {} users", states.len(), q_n)));
        }
        let ch = &net.channels;
        let mut f = Vec::with_capacity(q_n);
        let mut amp = Vec::with_capacity(q_n);
        for (j, sj) in states.iter().enumerate() {
            let mut fj = Vec::with_capacity(q_n);
            let mut aj = Vec::with_capacity(q_n);
            for q in 0..q_n {
                let mut fjq = Vec::with_capacity(k_n);
                let mut ajq = Vec::with_capacity(k_n);
                for k in 0..k_n {
                    let fk = match net.ris {
                        RisKind::None => ch.h[j][q][k].clone(),
                        _ => composite_channel(&ch.h[j][q][k], &ch.g[j][q][k], &sj.s, &sj.phi[k], &ch.big_h[j][k])?,
                    };
                    ajq.push(dot_h(&fk, &sj.w[k]));
                    fjq.push(fk);
                }
                fj.push(fjq);
                aj.push(ajq);
            }
            f.push(fj);
            amp.push(aj);
        }
        let mui = (0..q_n)
            .map(|q| {
                (0..k_n)
                    .map(|k| {
                        net.sigma2
                            + (0..q_n).filter(|&j| j != q).map(|j| amp[j][q][k].norm_sqr()).sum::<f64>()
                    })
                    .collect()
            })
            .collect();
        Ok(Self { f, amp, mui })
    }

    pub fn users(&self) -> usize {
        self.f.len()
    }

    pub fn subcarriers(&self) -> usize {
        self.mui.first().map_or(0, Vec::len)
    }

    pub fn mui(&self, q: usize, k: usize) -> f64 {
        self.mui[q][k]
    }

    pub fn signal(&self, q: usize, k: usize) -> f64 {
        self.amp[q][q][k].norm_sqr()
    }

    pub fn sinr(&self, q: usize, k: usize) -> f64 {
        self.signal(q, k) / self.mui(q, k)
    }

    /// `1 / ((1 + snr) MUI)`, the chain-rule weight of user `q`'s own rate.
    pub fn own_weight(&self, q: usize, k: usize) -> f64 {
        1.0 / (self.mui(q, k) + self.signal(q, k))
    }

    /// `snr / ((1 + snr) MUI)`, the weight of user `j`'s rate loss to interference.
    pub fn interference_weight(&self, j: usize, k: usize) -> f64 {
        let mui = self.mui(j, k);
        let sig = self.signal(j, k);
        sig / ((mui + sig) * mui)
    }

    /// `R_q` in bits/s/Hz summed over subcarriers, without the `1/K` factor.
    pub fn user_rate_raw(&self, q: usize) -> f64 {
        (0..self.subcarriers()).map(|k| (1.0 + self.sinr(q, k)).log2()).sum()
    }

    /// `sum_q R_q` without the `1/K` factor.
    pub fn sum_rate_raw(&self) -> f64 {
        (0..self.users()).map(|q| self.user_rate_raw(q)).sum()
    }

    /// Reported per-user rate, including `1/K`.
    pub fn user_rate(&self, q: usize) -> f64 {
        self.user_rate_raw(q) / self.subcarriers() as f64
    }

    /// Reported sum rate, including `1/K`.
    pub fn sum_rate(&self) -> f64 {
        self.sum_rate_raw() / self.subcarriers() as f64
    }
}

/// Interference-plus-noise power at UE `q` on subcarrier `k`.
pub fn mui_power(q: usize, k: usize, net: &Network, states: &[UserState]) -> Result<f64> {
    Ok(Snapshot::new(net, states)?.mui(q, k))
}

pub fn sinr(q: usize, k: usize, net: &Network, states: &[UserState]) -> Result<f64> {
    Ok(Snapshot::new(net, states)?.sinr(q, k))
}

/// Sum rate in bits/s/Hz including the `1/K` factor.
pub fn sum_rate(net: &Network, states: &[UserState]) -> Result<f64> {
    Ok(Snapshot::new(net, states)?.sum_rate())
}

/// `1 / ln 2`, the factor converting natural-log derivatives to bits.
pub(crate) const INV_LN2: f64 = 1.0 / LN_2;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmath::{CMat, ZERO};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rc(rng: &mut ChaCha8Rng) -> C64 {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    }

    fn rvec(rng: &mut ChaCha8Rng, n: usize) -> CVec {
        (0..n).map(|_| rc(rng)).collect()
    }

    fn rmat(rng: &mut ChaCha8Rng, r: usize, c: usize) -> CMat {
        CMat::from_fn(r, c, |_, _| rc(rng))
    }

    // Scalar triple loop: f_n^* = h_n^* + sum_{i,j} g_i^* S_ij phi_j H_jn
    fn composite_oracle(h: &[C64], g: &[C64], s: &RMat, phi: &[C64], big_h: &CMat) -> CVec {
        let m = g.len();
        (0..h.len())
            .map(|n| {
                let mut fh = h[n].conj();
                for i in 0..m {
                    for j in 0..m {
                        fh += g[i].conj() * s.get(i, j) * phi[j] * big_h.get(j, n);
                    }
                }
                fh.conj()
            })
            .collect()
    }

    #[test]
    fn composite_zero_phi_is_direct() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (h, g, big_h) = (rvec(&mut rng, 2), rvec(&mut rng, 4), rmat(&mut rng, 4, 2));
        let f = composite_channel(&h, &g, &RMat::identity(4), &[ZERO; 4], &big_h).unwrap();
        assert_eq!(f, h);
    }

    #[test]
    fn composite_matches_triple_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (h, g, phi, big_h) = (rvec(&mut rng, 2), rvec(&mut rng, 4), rvec(&mut rng, 4), rmat(&mut rng, 4, 2));
        for s in [RMat::identity(4), RMat::from_permutation(&[2, 0, 3, 1])] {
            let f = composite_channel(&h, &g, &s, &phi, &big_h).unwrap();
            let o = composite_oracle(&h, &g, &s, &phi, &big_h);
            for (a, b) in f.iter().zip(&o) {
                assert!((a - b).norm() < 1e-12);
            }
        }
        // diagonal cascade: f_n^* = h_n^* + sum_m g_m^* phi_m H_mn
        let f = composite_channel(&h, &g, &RMat::identity(4), &phi, &big_h).unwrap();
        for n in 0..2 {
            let mut fh = h[n].conj();
            for m in 0..4 {
                fh += g[m].conj() * phi[m] * big_h.get(m, n);
            }
            assert!((f[n] - fh.conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn composite_dimension_mismatch() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = composite_channel(&rvec(&mut rng, 2), &rvec(&mut rng, 3), &RMat::identity(4), &rvec(&mut rng, 4), &rmat(&mut rng, 4, 2));
        assert!(matches!(r, Err(Error::Dimension(_))));
    }

    #[test]
    fn permutation_relabeling_leaves_channel_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = 5;
        let (h, g, phi, big_h) = (rvec(&mut rng, 3), rvec(&mut rng, m), rvec(&mut rng, m), rmat(&mut rng, m, 3));
        let s = RMat::from_permutation(&[3, 1, 4, 0, 2]);
        let relabel = [2, 4, 0, 1, 3];
        // new index i holds old element relabel[i]
        let g2: CVec = relabel.iter().map(|&o| g[o]).collect();
        let phi2: CVec = relabel.iter().map(|&o| phi[o]).collect();
        let big_h2 = CMat::from_fn(m, 3, |r, c| big_h.get(relabel[r], c));
        let s2 = RMat::from_fn(m, m, |i, j| s.get(relabel[i], relabel[j]));
        let a = composite_channel(&h, &g, &s, &phi, &big_h).unwrap();
        let b = composite_channel(&h, &g2, &s2, &phi2, &big_h2).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-12);
        }
    }
}
