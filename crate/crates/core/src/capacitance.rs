//! Capacitance gradients and the box-projected capacitance update.
//!
//! With `u = H_qq w_q`, `z = S_q^T g` and `s = f^H w_q` the amplitude seen by
//! a receiver, the derivative of `|s|^2` with respect to `C_m` is
//! `2 Re{ d(phi_m^*)/dC_m * conj(u_m) z_m s }`. The product
//! `conj(u_m) z_m s` is exactly the m-th diagonal entry of
//! `A^H + C^T Phi B^T` with `A = u w^H h g^H S`, `B = S^T g g^H S` and
//! `C = u u^H`, so only the diagonal is ever formed.

use crate::circuit::{self, CircuitParams};
use crate::cmath::{CVec, C64};
use crate::error::Result;
use crate::linkalg::{Network, Snapshot, UserState, INV_LN2};

/// Own-rate gradient and pricing for one user's capacitances.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacitanceGrads {
    pub gamma: Vec<f64>,
    pub pi: Vec<f64>,
}

/// `d(phi_m^*)/dC_m` for every subcarrier and element of one user.
pub fn conj_grads(net: &Network, c: &[f64]) -> Result<Vec<CVec>> {
    net.freqs
        .iter()
        .map(|&f| c.iter().map(|&cm| circuit::reflection_conj_grad(f, cm, &net.circuit)).collect())
        .collect()
}

/// `vec_d(A^H + C^T Phi B^T)` for the link from BS_q (via RIS_q) to UE `rx`.
fn diag_term(net: &Network, snap: &Snapshot, state: &UserState, q: usize, rx: usize, k: usize) -> CVec {
    let ch = &net.channels;
    let u = ch.big_h[q][k].mul_vec(&state.w[k]);
    let z = state.s.mul_t_cvec(&ch.g[q][rx][k]);
    let s = snap.amp[q][rx][k];
    u.iter().zip(&z).map(|(um, zm)| um.conj() * zm * s).collect()
}

fn accumulate(out: &mut [f64], dphi: &[C64], diag: &[C64], scale: f64) {
    for ((o, d), v) in out.iter_mut().zip(dphi).zip(diag) {
        *o += scale * (d * v).re;
    }
}

/// Gradient of `R_q` with respect to `c_q`.
pub fn capacitance_grad_own(q: usize, net: &Network, snap: &Snapshot, states: &[UserState]) -> Result<Vec<f64>> {
    let state = &states[q];
    let dphi = conj_grads(net, &state.c)?;
    let mut gamma = vec![0.0; state.c.len()];
    for k in 0..net.subcarriers() {
        let diag = diag_term(net, snap, state, q, q, k);
        accumulate(&mut gamma, &dphi[k], &diag, 2.0 * INV_LN2 * snap.own_weight(q, k));
    }
    Ok(gamma)
}

/// Gradient of `sum_{j != q} R_j` with respect to `c_q`.
pub fn capacitance_pricing(q: usize, net: &Network, snap: &Snapshot, states: &[UserState]) -> Result<Vec<f64>> {
    let state = &states[q];
    let dphi = conj_grads(net, &state.c)?;
    let mut pi = vec![0.0; state.c.len()];
    for j in (0..net.users()).filter(|&j| j != q) {
        for k in 0..net.subcarriers() {
            let diag = diag_term(net, snap, state, q, j, k);
            accumulate(&mut pi, &dphi[k], &diag, -2.0 * INV_LN2 * snap.interference_weight(j, k));
        }
    }
    Ok(pi)
}

pub fn capacitance_grads(q: usize, net: &Network, snap: &Snapshot, states: &[UserState]) -> Result<CapacitanceGrads> {
    Ok(CapacitanceGrads {
        gamma: capacitance_grad_own(q, net, snap, states)?,
        pi: capacitance_pricing(q, net, snap, states)?,
    })
}

/// Maximizer of `-(tau/2)|c - c_t|^2 + (gamma + pi)^T (c - c_t)` over the box:
/// `clamp((tau c_t + gamma + pi) / tau)`.
pub fn update_capacitance(c_t: &[f64], gamma: &[f64], pi: &[f64], tau: f64, bounds: &CircuitParams) -> Vec<f64> {
    c_t.iter()
        .zip(gamma)
        .zip(pi)
        .map(|((c, g), p)| bounds.clamp((tau * c + g + p) / tau))
        .collect()
}

/// Objective of the capacitance subproblem at `c`.
pub fn subproblem_objective(c: &[f64], c_t: &[f64], gamma: &[f64], pi: &[f64], tau: f64) -> f64 {
    c.iter()
        .zip(c_t)
        .zip(gamma.iter().zip(pi))
        .map(|((c, ct), (g, p))| -0.5 * tau * (c - ct).powi(2) + (g + p) * (c - ct))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_point_without_gradient() {
        let b = CircuitParams::default();
        let c_t = vec![0.5e-12, 1.2e-12, 2.3e-12];
        let z = vec![0.0; 3];
        assert_eq!(update_capacitance(&c_t, &z, &z, 1.85, &b), c_t);
    }

    #[test]
    fn clamps_to_upper_bound() {
        let b = CircuitParams::default();
        let tau = 1.85;
        // beta / tau = 10 pF
        let c_t = vec![1e-12];
        let g = vec![tau * 9e-12];
        let out = update_capacitance(&c_t, &g, &[0.0], tau, &b);
        assert_eq!(out, vec![2.35e-12]);
        let out = update_capacitance(&c_t, &[-g[0]], &[0.0], tau, &b);
        assert_eq!(out, vec![0.47e-12]);
    }
}
