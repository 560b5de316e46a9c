//! Switch-matrix gradients and the assignment-based switch update.
//!
//! For a link with `u = H_q w_q`, cascade vector `g` and received amplitude
//! `s = f^H w_q`, the amplitude is linear in the real entries of `S`:
//! `ds / dS_ij = phi_j u_j conj(g_i)`. The transposed sum
//! `(F + K S^T G)^T` therefore collapses to the rank-one matrix
//! `conj(g) (phi o u)^T conj(s)`, which is what gets accumulated here.

use crate::cmath::{CMat, RMat, C64};
use crate::linkalg::{Network, Snapshot, UserState, INV_LN2};
use crate::lsap::{assignment_value, solve_lsap_max};

/// Real parts of the own-rate gradient and the pricing for one user's switch.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchGrads {
    pub gamma: RMat,
    pub pi: RMat,
}

#[allow(clippy::too_many_arguments)]
fn accumulate(out: &mut CMat, net: &Network, snap: &Snapshot, state: &UserState, q: usize, rx: usize, k: usize, scale: f64) {
    let ch = &net.channels;
    let u = ch.big_h[q][k].mul_vec(&state.w[k]);
    let g = &ch.g[q][rx][k];
    let s_conj = snap.amp[q][rx][k].conj() * scale;
    let e: Vec<C64> = state.phi[k].iter().zip(&u).map(|(p, u)| p * u).collect();
    let m = e.len();
    for i in 0..m {
        let gi = g[i].conj() * s_conj;
        for (j, ej) in e.iter().enumerate() {
            let cur = out.get(i, j);
            out.set(i, j, cur + gi * ej);
        }
    }
}

/// Complex gradient of `R_q` with respect to `S_q`; the real part is the
/// gradient over real matrices.
pub fn switch_grad_own(q: usize, net: &Network, snap: &Snapshot, states: &[UserState]) -> CMat {
    let m = net.elements();
    let mut out = CMat::zeros(m, m);
    for k in 0..net.subcarriers() {
        accumulate(&mut out, net, snap, &states[q], q, q, k, 2.0 * INV_LN2 * snap.own_weight(q, k));
    }
    out
}

/// Complex gradient of `sum_{j != q} R_j` with respect to `S_q`.
pub fn switch_pricing(q: usize, net: &Network, snap: &Snapshot, states: &[UserState]) -> CMat {
    let m = net.elements();
    let mut out = CMat::zeros(m, m);
    for j in (0..net.users()).filter(|&j| j != q) {
        for k in 0..net.subcarriers() {
            let w = -2.0 * INV_LN2 * snap.interference_weight(j, k);
            accumulate(&mut out, net, snap, &states[q], q, j, k, w);
        }
    }
    out
}

pub fn real_part(a: &CMat) -> RMat {
    RMat::from_fn(a.rows(), a.cols(), |i, j| a.get(i, j).re)
}

pub fn switch_grads(q: usize, net: &Network, snap: &Snapshot, states: &[UserState]) -> SwitchGrads {
    SwitchGrads {
        gamma: real_part(&switch_grad_own(q, net, snap, states)),
        pi: real_part(&switch_pricing(q, net, snap, states)),
    }
}

/// Relative slack under which `S_t` is kept when it ties the optimum.
const TIE_TOL: f64 = 1e-12;

/// Cost matrix `Gamma + Pi + tau S_t` of the switch subproblem.
pub fn switch_cost(gamma: &RMat, pi: &RMat, s_t: &RMat, tau: f64) -> RMat {
    RMat::from_fn(s_t.rows(), s_t.cols(), |i, j| gamma.get(i, j) + pi.get(i, j) + tau * s_t.get(i, j))
}

/// Best permutation for the linearized switch subproblem.
///
/// When the current permutation already attains the optimum (up to rounding)
/// it is returned unchanged, so exact ties never move the iterate.
pub fn update_switch(gamma: &RMat, pi: &RMat, s_t: &RMat, tau: f64) -> RMat {
    let cost = switch_cost(gamma, pi, s_t, tau);
    let perm = solve_lsap_max(&cost);
    if let Some(cur) = s_t.as_permutation() {
        let best = assignment_value(&cost, &perm);
        let here = assignment_value(&cost, &cur);
        let scale = cost.as_slice().iter().fold(0.0f64, |a, v| a.max(v.abs())) * cost.rows() as f64;
        if here >= best - TIE_TOL * scale.max(f64::MIN_POSITIVE) {
            return s_t.clone();
        }
    }
    RMat::from_permutation(&perm)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_keeps_current() {
        let s_t = RMat::from_permutation(&[2, 0, 3, 1]);
        let z = RMat::zeros(4, 4);
        assert_eq!(update_switch(&z, &z, &s_t, 1.85), s_t);
    }

    #[test]
    fn strong_gradient_moves_to_its_argmax() {
        let s_t = RMat::identity(3);
        let g = RMat::from_fn(3, 3, |i, j| if j == (i + 1) % 3 { 50.0 } else { 0.0 });
        let z = RMat::zeros(3, 3);
        let s = update_switch(&g, &z, &s_t, 1.0);
        assert_eq!(s.as_permutation(), Some(vec![1, 2, 0]));
    }
}
