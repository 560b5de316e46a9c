//! Per-user precoder subproblem.
//!
//! The own-rate log term is replaced by a concave quadratic minorant that is
//! tight (value and gradient) at the current iterate, the other users' rates
//! are linearized through the pricing vector, and the resulting strongly
//! concave problem is solved in closed form up to the power multiplier,
//! which is found by bisection.
//!
//! Complex gradients follow one convention throughout: a gradient `g` of a
//! real function `R(w)` satisfies `dR = Re{g^H dw}`.

use crate::cmath::{dot_h, norm_sqr, stack_power, CVec, C64, ZERO};
use crate::error::{Error, Result};
use crate::linkalg::{Snapshot, INV_LN2};

/// Coefficients of the quadratic minorant `-a |f^H w|^2 + 2 Re{b^H w}` per subcarrier.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateCoeffs {
    pub a: Vec<f64>,
    pub b: Vec<CVec>,
    /// Own composite channel `f_qq,k` the minorant is built on.
    pub channel: Vec<CVec>,
}

/// Gradient of the other users' rates with respect to `w_q`, per subcarrier.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderPricing {
    pub pi: Vec<CVec>,
}

impl PrecoderPricing {
    pub fn zeros(k: usize, n: usize) -> Self {
        Self { pi: vec![vec![ZERO; n]; k] }
    }

    /// Stacked length-`KN` vector.
    pub fn stacked(&self) -> CVec {
        self.pi.iter().flatten().copied().collect()
    }
}

/// `sum_{j != q} grad_{w_q} R_j` at the snapshot.
pub fn precoder_pricing(q: usize, snap: &Snapshot) -> PrecoderPricing {
    let k_n = snap.subcarriers();
    let pi = (0..k_n)
        .map(|k| {
            let n = snap.f[q][q][k].len();
            let mut acc = vec![ZERO; n];
            for j in (0..snap.users()).filter(|&j| j != q) {
                // -(2/ln2) snr/((1+snr) MUI) f_qj (f_qj^H w_q)
                let scale = -2.0 * INV_LN2 * snap.interference_weight(j, k) * snap.amp[q][j][k];
                for (a, f) in acc.iter_mut().zip(&snap.f[q][j][k]) {
                    *a += f * scale;
                }
            }
            acc
        })
        .collect();
    PrecoderPricing { pi }
}

/// Minorant coefficients of user `q`'s log terms, built at the snapshot's `w_q`.
pub fn surrogate_coeffs(q: usize, snap: &Snapshot) -> SurrogateCoeffs {
    let k_n = snap.subcarriers();
    let mut a = Vec::with_capacity(k_n);
    let mut b = Vec::with_capacity(k_n);
    let mut channel = Vec::with_capacity(k_n);
    for k in 0..k_n {
        let mui = snap.mui(q, k);
        let d = snap.amp[q][q][k];
        let sig = d.norm_sqr();
        a.push(INV_LN2 * sig / ((mui + sig) * mui));
        let f = &snap.f[q][q][k];
        b.push(f.iter().map(|x| x * d * (INV_LN2 / mui)).collect());
        channel.push(f.clone());
    }
    SurrogateCoeffs { a, b, channel }
}

impl SurrogateCoeffs {
    /// Minorant value on subcarrier `k` at `w`.
    pub fn value(&self, k: usize, w: &[C64]) -> f64 {
        let d = dot_h(&self.channel[k], w);
        -self.a[k] * d.norm_sqr() + 2.0 * dot_h(&self.b[k], w).re
    }

    /// Gradient of the minorant on subcarrier `k` at `w`.
    pub fn gradient(&self, k: usize, w: &[C64]) -> CVec {
        let d = dot_h(&self.channel[k], w);
        self.channel[k]
            .iter()
            .zip(&self.b[k])
            .map(|(f, b)| -2.0 * self.a[k] * f * d + 2.0 * b)
            .collect()
    }
}

/// Closed-form solution and its multiplier.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderSolution {
    pub w: Vec<CVec>,
    /// Power-constraint Lagrange multiplier.
    pub lambda: f64,
}

/// Linear term `v = pi + 2 b + tau w_t` of the subproblem objective.
pub fn linear_term(coeffs: &SurrogateCoeffs, pricing: &PrecoderPricing, w_t: &[CVec], tau: f64) -> Vec<CVec> {
    (0..coeffs.a.len())
        .map(|k| {
            pricing.pi[k]
                .iter()
                .zip(&coeffs.b[k])
                .zip(&w_t[k])
                .map(|((p, b), w)| p + 2.0 * b + tau * w)
                .collect()
        })
        .collect()
}

/// `w(lambda) = 1/2 (F + (tau/2 + lambda) I)^{-1} v`, one rank-one block per subcarrier.
fn precoder_at(coeffs: &SurrogateCoeffs, v: &[CVec], shift: f64) -> Vec<CVec> {
    v.iter()
        .enumerate()
        .map(|(k, vk)| {
            let f = &coeffs.channel[k];
            let a = coeffs.a[k];
            // (mu I + a f f^H)^{-1} v = (v - a f (f^H v) / (mu + a |f|^2)) / mu
            let coef = a * dot_h(f, vk) / (shift + a * norm_sqr(f));
            vk.iter().zip(f).map(|(x, fi)| 0.5 * (x - fi * coef) / shift).collect()
        })
        .collect()
}

/// Maximizes `-w^H (F + tau/2 I) w + Re{v^H w}` subject to `sum_k |w_k|^2 <= power`.
pub fn solve_precoder(
    coeffs: &SurrogateCoeffs,
    pricing: &PrecoderPricing,
    w_t: &[CVec],
    tau: f64,
    power: f64,
) -> Result<PrecoderSolution> {
    if !(tau > 0.0) || !(power > 0.0) {
        return Err(Error::Domain(format!("need tau > 0 and P > 0, got {tau}, {power}")));
    }
    let v = linear_term(coeffs, pricing, w_t, tau);
    let half_tau = tau / 2.0;
    let w0 = precoder_at(coeffs, &v, half_tau);
    if stack_power(&w0) <= power {
        return Ok(PrecoderSolution { w: w0, lambda: 0.0 });
    }

    let power_at = |lambda: f64| stack_power(&precoder_at(coeffs, &v, half_tau + lambda));
    let mut hi = 1.0;
    while power_at(hi) >= power {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::Numeric("power multiplier bracket diverged".into()));
        }
    }
    let mut lo = 0.0;
    for _ in 0..400 {
        let p_hi = power_at(hi);
        if (power - p_hi) / power < 1e-12 || hi - lo <= 1e-15 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if power_at(mid) > power {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let w = precoder_at(coeffs, &v, half_tau + hi);
    assert!(stack_power(&w) <= power, "bisection left the feasible side");
    Ok(PrecoderSolution { w, lambda: hi })
}

/// Subproblem objective `J(w)` (constants dropped).
pub fn subproblem_objective(
    coeffs: &SurrogateCoeffs,
    pricing: &PrecoderPricing,
    w_t: &[CVec],
    tau: f64,
    w: &[CVec],
) -> f64 {
    let v = linear_term(coeffs, pricing, w_t, tau);
    (0..w.len())
        .map(|k| {
            let d = dot_h(&coeffs.channel[k], &w[k]);
            -coeffs.a[k] * d.norm_sqr() - tau / 2.0 * norm_sqr(&w[k]) + dot_h(&v[k], &w[k]).re
        })
        .sum()
}

/// Stationarity residual `|2 (F + (tau/2 + lambda) I) w - v|` and `|v|`.
pub fn kkt_residual(
    coeffs: &SurrogateCoeffs,
    pricing: &PrecoderPricing,
    w_t: &[CVec],
    tau: f64,
    sol: &PrecoderSolution,
) -> (f64, f64) {
    let v = linear_term(coeffs, pricing, w_t, tau);
    let shift = tau / 2.0 + sol.lambda;
    let mut res = 0.0;
    for k in 0..v.len() {
        let d = dot_h(&coeffs.channel[k], &sol.w[k]);
        for ((f, w), vv) in coeffs.channel[k].iter().zip(&sol.w[k]).zip(&v[k]) {
            let lhs = 2.0 * (coeffs.a[k] * f * d + w * shift);
            res += (lhs - vv).norm_sqr();
        }
    }
    let vnorm: f64 = v.iter().map(|x| norm_sqr(x)).sum();
    (res.sqrt(), vnorm.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rc(rng: &mut ChaCha8Rng, s: f64) -> C64 {
        C64::new(rng.random_range(-s..s), rng.random_range(-s..s))
    }

    fn random_instance(seed: u64, k: usize, n: usize) -> (SurrogateCoeffs, PrecoderPricing, Vec<CVec>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let channel: Vec<CVec> = (0..k).map(|_| (0..n).map(|_| rc(&mut rng, 1.0)).collect()).collect();
        let a = (0..k).map(|_| rng.random_range(0.0..3.0)).collect();
        let b = (0..k).map(|_| (0..n).map(|_| rc(&mut rng, 2.0)).collect()).collect();
        let pi = (0..k).map(|_| (0..n).map(|_| rc(&mut rng, 0.5)).collect()).collect();
        let w_t = (0..k).map(|_| (0..n).map(|_| rc(&mut rng, 0.3)).collect()).collect();
        (SurrogateCoeffs { a, b, channel }, PrecoderPricing { pi }, w_t)
    }

    #[test]
    fn regularizer_fixed_point() {
        let (mut coeffs, _, w_t) = random_instance(1, 3, 2);
        coeffs.a.iter_mut().for_each(|a| *a = 0.0);
        coeffs.b.iter_mut().flatten().for_each(|b| *b = ZERO);
        let pricing = PrecoderPricing::zeros(3, 2);
        let p = stack_power(&w_t);
        let sol = solve_precoder(&coeffs, &pricing, &w_t, 1.85, p * 1.01).unwrap();
        assert_eq!(sol.lambda, 0.0);
        for (a, b) in sol.w.iter().flatten().zip(w_t.iter().flatten()) {
            assert!((a - b).norm() < 1e-15);
        }
        // active constraint: pure shrink of w_t by tau / (tau + 2 lambda)
        let sol = solve_precoder(&coeffs, &pricing, &w_t, 1.85, p / 4.0).unwrap();
        let scale = 1.85 / (1.85 + 2.0 * sol.lambda);
        assert!((scale - 0.5).abs() < 1e-8);
        for (a, b) in sol.w.iter().flatten().zip(w_t.iter().flatten()) {
            assert!((a - b * scale).norm() < 1e-12);
        }
    }

    #[test]
    fn kkt_conditions_hold() {
        for seed in 0..50 {
            let (coeffs, pricing, w_t) = random_instance(seed, 4, 3);
            let power = 0.05 + 0.02 * seed as f64;
            let sol = solve_precoder(&coeffs, &pricing, &w_t, 1.85, power).unwrap();
            let p = stack_power(&sol.w);
            assert!(p <= power + 1e-9);
            let (res, vn) = kkt_residual(&coeffs, &pricing, &w_t, 1.85, &sol);
            assert!(res < 1e-8 * vn, "seed {seed}: {res} vs {vn}");
            assert!(sol.lambda * (power - p).abs() < 1e-8 * power);
            if sol.lambda > 0.0 {
                assert!((power - p).abs() / power < 1e-8);
            }
        }
    }

    #[test]
    fn minorant_is_tight_and_below() {
        // Minorant of log2(1 + |f^H w|^2 / mui) built at w_t.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 3;
        let f: CVec = (0..n).map(|_| rc(&mut rng, 1.0)).collect();
        let w_t: CVec = (0..n).map(|_| rc(&mut rng, 1.0)).collect();
        let mui = 0.7;
        let d = dot_h(&f, &w_t);
        let sig = d.norm_sqr();
        let coeffs = SurrogateCoeffs {
            a: vec![INV_LN2 * sig / ((mui + sig) * mui)],
            b: vec![f.iter().map(|x| x * d * (INV_LN2 / mui)).collect()],
            channel: vec![f.clone()],
        };
        let log_term = |w: &[C64]| (1.0 + dot_h(&f, w).norm_sqr() / mui).log2();
        // minorant differs from the log term by a constant fixed at w_t
        let offset = log_term(&w_t) - coeffs.value(0, &w_t);
        for _ in 0..100 {
            let w: CVec = w_t.iter().map(|x| x + rc(&mut rng, 0.5)).collect();
            assert!(coeffs.value(0, &w) + offset <= log_term(&w) + 1e-12);
        }
    }
}
