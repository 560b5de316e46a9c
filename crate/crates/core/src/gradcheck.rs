//! Central finite-difference checks of every analytic gradient.

use crate::capacitance::{capacitance_grad_own, capacitance_pricing};
use crate::cmath::{CVec, RMat, C64};
use crate::engine::initialize;
use crate::error::Result;
use crate::linkalg::{Network, Snapshot, UserState};
use crate::precoder::{precoder_pricing, surrogate_coeffs};
use crate::scenario::{Scenario, Scheme};
use crate::switch::{switch_grad_own, switch_pricing};

/// Threshold on the worst relative error of every family.
pub const GRADCHECK_TOL: f64 = 1e-4;

pub const FAMILIES: [&str; 5] = [
    "precoder pricing",
    "surrogate first-order",
    "capacitance own",
    "capacitance pricing",
    "switch own+pricing",
];

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyResult {
    pub name: &'static str,
    pub worst: f64,
}

impl FamilyResult {
    pub fn passed(&self) -> bool {
        self.worst < GRADCHECK_TOL
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradcheckReport {
    pub families: Vec<FamilyResult>,
    pub seeds: Vec<u64>,
}

impl GradcheckReport {
    pub fn passed(&self) -> bool {
        self.families.iter().all(FamilyResult::passed)
    }
}

/// Gradcheck fixture: two triplets, two antennas, four elements, two subcarriers.
pub fn fixture(seed: u64) -> Result<Scenario> {
    let mut s = Scenario::desk(2, 2, 4, 2, 2)?.with_scheme(Scheme::BD_COOP);
    s.seed = seed;
    Ok(s)
}

/// `|a - b| / |b|` over the flattened vectors.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let scale: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    let alt: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    if scale > 0.0 {
        diff / scale
    } else if alt > 0.0 {
        diff / alt
    } else {
        0.0
    }
}

fn central(f: impl Fn(f64) -> f64, h: f64) -> f64 {
    (f(h) - f(-h)) / (2.0 * h)
}

fn flatten_c(v: &[CVec]) -> Vec<f64> {
    v.iter().flatten().flat_map(|z| [z.re, z.im]).collect()
}

fn others_rate(snap: &Snapshot, q: usize) -> f64 {
    (0..snap.users()).filter(|&j| j != q).map(|j| snap.user_rate_raw(j)).sum()
}

fn rate_with(net: &Network, states: &[UserState], metric: &impl Fn(&Snapshot) -> f64) -> f64 {
    metric(&Snapshot::new(net, states).expect("fixture dimensions are consistent"))
}

/// FD gradient of `metric` over the real and imaginary parts of `w_q`,
/// laid out as `[re, im]` pairs.
fn fd_precoder(net: &Network, states: &[UserState], q: usize, metric: impl Fn(&Snapshot) -> f64) -> Vec<f64> {
    let norm = states[q].power().sqrt();
    let h = 1e-6 * norm.max(1e-300);
    let mut out = Vec::new();
    for k in 0..states[q].w.len() {
        for i in 0..states[q].w[k].len() {
            for dir in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)] {
                out.push(central(
                    |d| {
                        let mut st = states.to_vec();
                        st[q].w[k][i] += dir * d;
                        rate_with(net, &st, &metric)
                    },
                    h,
                ));
            }
        }
    }
    out
}

fn fd_capacitance(net: &Network, states: &[UserState], q: usize, metric: impl Fn(&Snapshot) -> f64) -> Vec<f64> {
    (0..states[q].c.len())
        .map(|m| {
            let h = 1e-5 * states[q].c[m];
            central(
                |d| {
                    let mut st = states.to_vec();
                    let mut c = st[q].c.clone();
                    c[m] += d;
                    st[q].set_capacitance(c, &net.freqs, &net.circuit).expect("positive capacitance");
                    rate_with(net, &st, &metric)
                },
                h,
            )
        })
        .collect()
}

fn fd_switch(net: &Network, states: &[UserState], q: usize, metric: impl Fn(&Snapshot) -> f64) -> Vec<f64> {
    let m = states[q].s.rows();
    let mut out = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            out.push(central(
                |d| {
                    let mut st = states.to_vec();
                    let v = st[q].s.get(i, j);
                    st[q].s.set(i, j, v + d);
                    rate_with(net, &st, &metric)
                },
                1e-6,
            ));
        }
    }
    out
}

/// Interior point of the Birkhoff polytope next to a permutation.
fn relax(s: &RMat) -> RMat {
    let m = s.rows() as f64;
    RMat::from_fn(s.rows(), s.cols(), |i, j| 0.5 * s.get(i, j) + 0.5 / m)
}

fn re_parts(a: &crate::cmath::CMat) -> Vec<f64> {
    a.iter().map(|z| z.re).collect()
}

/// Worst relative error per family for one fixture seed.
pub fn check_seed(seed: u64, corrupt: bool) -> Result<[f64; 5]> {
    let s = fixture(seed)?;
    let net = Network::from_scenario(&s)?;
    let mut states = initialize(&s, &net)?;
    for st in &mut states {
        st.s = relax(&st.s);
    }
    let snap = Snapshot::new(&net, &states)?;
    let mut worst = [0.0f64; 5];
    for q in 0..s.q {
        let own = move |sn: &Snapshot| sn.user_rate_raw(q);
        let others = move |sn: &Snapshot| others_rate(sn, q);

        let mut pi = flatten_c(&precoder_pricing(q, &snap).pi);
        if corrupt {
            pi.iter_mut().for_each(|x| *x = -*x);
        }
        worst[0] = worst[0].max(relative_error(&pi, &fd_precoder(&net, &states, q, others)));

        let coeffs = surrogate_coeffs(q, &snap);
        let sur_grad: Vec<CVec> = (0..s.k).map(|k| coeffs.gradient(k, &states[q].w[k])).collect();
        let sur_grad = flatten_c(&sur_grad);
        worst[1] = worst[1].max(relative_error(&sur_grad, &fd_precoder(&net, &states, q, own)));
        // The minorant's own gradient formula, against FD of the minorant.
        let h = 1e-6 * states[q].power().sqrt();
        let mut fd_sur = Vec::new();
        for k in 0..s.k {
            for i in 0..s.n {
                for dir in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)] {
                    fd_sur.push(central(
                        |d| {
                            let mut w = states[q].w[k].clone();
                            w[i] += dir * d;
                            coeffs.value(k, &w)
                        },
                        h,
                    ));
                }
            }
        }
        worst[1] = worst[1].max(relative_error(&sur_grad, &fd_sur));

        let gamma = capacitance_grad_own(q, &net, &snap, &states)?;
        worst[2] = worst[2].max(relative_error(&gamma, &fd_capacitance(&net, &states, q, own)));
        let cpi = capacitance_pricing(q, &net, &snap, &states)?;
        worst[3] = worst[3].max(relative_error(&cpi, &fd_capacitance(&net, &states, q, others)));

        let sg = re_parts(&switch_grad_own(q, &net, &snap, &states));
        worst[4] = worst[4].max(relative_error(&sg, &fd_switch(&net, &states, q, own)));
        let sp = re_parts(&switch_pricing(q, &net, &snap, &states));
        worst[4] = worst[4].max(relative_error(&sp, &fd_switch(&net, &states, q, others)));
    }
    Ok(worst)
}

/// Runs all families over `seeds`; `corrupt` flips the sign of one analytic
/// gradient so callers can confirm that failures are reported.
pub fn run_gradcheck(seeds: &[u64], corrupt: bool) -> Result<GradcheckReport> {
    let mut worst = [0.0f64; 5];
    for &seed in seeds {
        let w = check_seed(seed, corrupt)?;
        for (a, b) in worst.iter_mut().zip(w) {
            *a = a.max(b);
        }
    }
    Ok(GradcheckReport {
        families: FAMILIES.iter().zip(worst).map(|(&name, worst)| FamilyResult { name, worst }).collect(),
        seeds: seeds.to_vec(),
    })
}
