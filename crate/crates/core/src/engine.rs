//! Distributed iteration loop: pricing exchange, per-user subproblem solves,
//! the smoothed update and the stop rule.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::capacitance::{capacitance_grad_own, capacitance_pricing, update_capacitance};
use crate::cmath::{norm_sqr, CVec, RMat, C64, ZERO};
use crate::error::{Error, Result};
use crate::linkalg::{composite_channel, Network, Snapshot, UserState};
use crate::precoder::{precoder_pricing, solve_precoder, surrogate_coeffs, PrecoderPricing};
use crate::scenario::{Pricing, RisKind, Scenario, UpdateOrder};
use crate::switch::{real_part, switch_grad_own, switch_pricing, update_switch};

/// What user `origin` receives from the others before solving its subproblems.
#[derive(Debug, Clone, PartialEq)]
pub struct PricingBundle {
    pub origin: usize,
    pub iteration: usize,
    /// Stacked `K N` precoder pricing.
    pub precoder: CVec,
    pub capacitance: Vec<f64>,
    pub switch: RMat,
}

impl PricingBundle {
    pub fn zeros(origin: usize, iteration: usize, k: usize, n: usize, m: usize) -> Self {
        Self {
            origin,
            iteration,
            precoder: vec![ZERO; k * n],
            capacitance: vec![0.0; m],
            switch: RMat::zeros(m, m),
        }
    }

    /// Number of scalars carried.
    pub fn elements(&self) -> usize {
        self.precoder.len() + self.capacitance.len() + self.switch.rows() * self.switch.cols()
    }

    fn precoder_blocks(&self, k: usize) -> PrecoderPricing {
        let n = self.precoder.len() / k.max(1);
        PrecoderPricing { pi: self.precoder.chunks(n.max(1)).map(<[C64]>::to_vec).collect() }
    }
}

/// In-process exchange with a per-iteration barrier and an element counter.
#[derive(Debug, Default, Clone)]
pub struct MessageBus {
    inbox: Vec<PricingBundle>,
    total: u64,
    per_iteration: Vec<u64>,
}

impl MessageBus {
    pub fn new() -> Self {
        Self::default()
    }

    /// Replaces the inbox with one iteration's bundles (ordered by origin).
    pub fn exchange(&mut self, mut bundles: Vec<PricingBundle>) {
        bundles.sort_by_key(|b| b.origin);
        let count: u64 = bundles.iter().map(|b| b.elements() as u64).sum();
        self.total += count;
        self.per_iteration.push(count);
        self.inbox = bundles;
    }

    pub fn bundle(&self, origin: usize) -> Option<&PricingBundle> {
        self.inbox.iter().find(|b| b.origin == origin)
    }

    pub fn total_elements(&self) -> u64 {
        self.total
    }

    pub fn per_iteration(&self) -> &[u64] {
        &self.per_iteration
    }
}

/// Scalars exchanged per iteration: `Q (K N + M (M + 1))`.
pub fn cooperation_overhead(q: usize, k: usize, n: usize, m: usize) -> u64 {
    (q * (k * n + m * (m + 1))) as u64
}

/// Next step size under `alpha_t = alpha_{t-1} / (1 + rho alpha_{t-1})`, `alpha_0 = 1`.
pub fn step_size(t: usize, prev_alpha: f64, rho: f64) -> f64 {
    if t == 0 {
        1.0
    } else {
        prev_alpha / (1.0 + rho * prev_alpha)
    }
}

/// Stream of the initialization RNG, kept apart from channel synthesis.
const INIT_STREAM: u64 = 1;

/// Random capacitances and permutation, MRT precoders at full power.
pub fn initialize(s: &Scenario, net: &Network) -> Result<Vec<UserState>> {
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    rng.set_stream(INIT_STREAM);
    let circuit = &net.circuit;
    let mut states = Vec::with_capacity(s.q);
    for q in 0..s.q {
        let c: Vec<f64> = (0..s.m).map(|_| rng.random_range(circuit.c_min..=circuit.c_max)).collect();
        let perm = random_permutation(&mut rng, s.m);
        let sw = match s.scheme.ris {
            RisKind::Bd => RMat::from_permutation(&perm),
            _ => RMat::identity(s.m),
        };
        let mut state = UserState::new(vec![vec![ZERO; s.n]; s.k], c, sw, &net.freqs, circuit)?;
        let ch = &net.channels;
        let scale = (s.power / s.k as f64).sqrt();
        for k in 0..s.k {
            let f = match net.ris {
                RisKind::None => ch.h[q][q][k].clone(),
                _ => composite_channel(&ch.h[q][q][k], &ch.g[q][q][k], &state.s, &state.phi[k], &ch.big_h[q][k])?,
            };
            let norm = norm_sqr(&f).sqrt();
            state.w[k] = if norm > 0.0 {
                f.iter().map(|x| x * (scale / norm)).collect()
            } else {
                vec![C64::new(scale / (s.n as f64).sqrt(), 0.0); s.n]
            };
        }
        states.push(state);
    }
    Ok(states)
}

/// Pricing user `q` receives, computed from the snapshot of iteration `t`.
fn pricing_for(q: usize, iteration: usize, s: &Scenario, net: &Network, snap: &Snapshot, states: &[UserState]) -> Result<PricingBundle> {
    let mut b = PricingBundle::zeros(q, iteration, s.k, s.n, s.m);
    if s.scheme.pricing == Pricing::ZeroPricing {
        return Ok(b);
    }
    b.precoder = precoder_pricing(q, snap).stacked();
    if net.ris != RisKind::None {
        b.capacitance = capacitance_pricing(q, net, snap, states)?;
    }
    if net.ris == RisKind::Bd {
        b.switch = real_part(&switch_pricing(q, net, snap, states));
    }
    Ok(b)
}

/// Solves user `q`'s subproblems and applies the smoothed update.
fn update_user(q: usize, s: &Scenario, net: &Network, snap: &Snapshot, states: &[UserState], bundle: &PricingBundle, alpha: f64) -> Result<UserState> {
    let cur = &states[q];
    let coeffs = surrogate_coeffs(q, snap);
    let sol = solve_precoder(&coeffs, &bundle.precoder_blocks(s.k), &cur.w, s.tau, s.power)?;
    let w: Vec<CVec> = cur
        .w
        .iter()
        .zip(&sol.w)
        .map(|(wt, wh)| wt.iter().zip(wh).map(|(a, b)| a + (b - a) * alpha).collect())
        .collect();
    let mut next = UserState { w, ..cur.clone() };
    if net.ris == RisKind::None {
        return Ok(next);
    }
    let gamma = capacitance_grad_own(q, net, snap, states)?;
    let c_hat = update_capacitance(&cur.c, &gamma, &bundle.capacitance, s.tau, &net.circuit);
    let c = cur
        .c
        .iter()
        .zip(&c_hat)
        .map(|(a, b)| net.circuit.clamp(a + (b - a) * alpha))
        .collect();
    next.set_capacitance(c, &net.freqs, &net.circuit)?;
    if net.ris == RisKind::Bd {
        let gamma = real_part(&switch_grad_own(q, net, snap, states));
        next.s = update_switch(&gamma, &bundle.switch, &cur.s, s.tau);
    }
    Ok(next)
}

/// Rates after one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// Sum rate including `1/K`.
    pub sum_rate: f64,
    pub user_rates: Vec<f64>,
    /// Step size applied to `w` and `c`.
    pub alpha: f64,
}

/// Everything a finished run reports.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub records: Vec<IterationRecord>,
    /// Sum rate at the initial point.
    pub initial_sum_rate: f64,
    pub converged: bool,
    pub wall_time: Duration,
    /// Scalars exchanged over the whole run.
    pub exchanged: u64,
}

impl RunTrace {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn sum_rates(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.sum_rate).collect()
    }

    pub fn final_sum_rate(&self) -> f64 {
        self.records.last().map_or(self.initial_sum_rate, |r| r.sum_rate)
    }
}

/// Iteration state for one scenario.
pub struct Engine {
    pub scenario: Scenario,
    pub net: Network,
    pub states: Vec<UserState>,
    pub bus: MessageBus,
    alpha: f64,
    iteration: usize,
    pool: Option<rayon::ThreadPool>,
}

impl Engine {
    /// Synthesizes channels and initializes all users.
    pub fn new(scenario: Scenario) -> Result<Self> {
        let net = Network::from_scenario(&scenario)?;
        Self::with_network(scenario, net)
    }

    pub fn with_network(scenario: Scenario, net: Network) -> Result<Self> {
        scenario.validate()?;
        let states = initialize(&scenario, &net)?;
        Ok(Self { scenario, net, states, bus: MessageBus::new(), alpha: 1.0, iteration: 0, pool: None })
    }

    /// Runs the per-user work of each iteration on `workers` threads.
    pub fn with_workers(mut self, workers: usize) -> Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        self.pool = Some(pool);
        Ok(self)
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn snapshot(&self) -> Result<Snapshot> {
        Snapshot::new(&self.net, &self.states)
    }

    fn per_user<T: Send>(&self, f: impl Fn(usize) -> Result<T> + Sync) -> Result<Vec<T>> {
        let q_n = self.scenario.q;
        match &self.pool {
            Some(pool) => pool.install(|| (0..q_n).into_par_iter().map(&f).collect()),
            None => (0..q_n).map(f).collect(),
        }
    }

    /// One pass over all users; returns the rates at the new iterate.
    pub fn iterate(&mut self) -> Result<IterationRecord> {
        let t = self.iteration + 1;
        let alpha = self.alpha;
        match self.scenario.update_order {
            UpdateOrder::Jacobi => {
                let snap = self.snapshot()?;
                let (s, net, states) = (&self.scenario, &self.net, &self.states);
                let bundles = self.per_user(|q| pricing_for(q, t, s, net, &snap, states))?;
                self.bus.exchange(bundles);
                let bus = &self.bus;
                let next = self.per_user(|q| {
                    let bundle = bus.bundle(q).expect("bundle for every user");
                    update_user(q, s, net, &snap, states, bundle, alpha)
                })?;
                self.states = next;
            }
            UpdateOrder::GaussSeidel => {
                let mut bundles = Vec::with_capacity(self.scenario.q);
                for q in 0..self.scenario.q {
                    let snap = self.snapshot()?;
                    let b = pricing_for(q, t, &self.scenario, &self.net, &snap, &self.states)?;
                    let next = update_user(q, &self.scenario, &self.net, &snap, &self.states, &b, alpha)?;
                    self.states[q] = next;
                    bundles.push(b);
                }
                self.bus.exchange(bundles);
            }
        }
        self.iteration = t;
        self.alpha = step_size(t, alpha, self.scenario.step_rho);
        let snap = self.snapshot()?;
        Ok(IterationRecord {
            sum_rate: snap.sum_rate(),
            user_rates: (0..self.scenario.q).map(|q| snap.user_rate(q)).collect(),
            alpha,
        })
    }

    /// Iterates until the relative sum-rate change drops to `eps` or `t_max` is hit.
    pub fn run(&mut self) -> Result<RunTrace> {
        let start = Instant::now();
        let initial = self.snapshot()?.sum_rate();
        let mut prev = initial;
        let mut records = Vec::new();
        let mut converged = false;
        while records.len() < self.scenario.t_max {
            let rec = self.iterate()?;
            let rate = rec.sum_rate;
            records.push(rec);
            if !rate.is_finite() {
                return Err(Error::Numeric(format!("sum rate became {rate}")));
            }
            if ((rate - prev) / rate).abs() <= self.scenario.eps {
                converged = true;
                break;
            }
            prev = rate;
        }
        Ok(RunTrace {
            records,
            initial_sum_rate: initial,
            converged,
            wall_time: start.elapsed(),
            exchanged: self.bus.total_elements(),
        })
    }
}

/// Builds an engine for the scenario and runs it to completion.
pub fn run(s: &Scenario) -> Result<RunTrace> {
    Engine::new(s.clone())?.run()
}

/// Draws a uniform random permutation of `0..m`.
pub fn random_permutation<R: Rng>(rng: &mut R, m: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..m).collect();
    perm.shuffle(rng);
    perm
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_size_sequence() {
        assert_eq!(step_size(0, 0.3, 0.01), 1.0);
        let mut a = 1.0;
        let mut sum = 0.0;
        for t in 1..=10_000 {
            let next = step_size(t, a, 0.01);
            assert!(next > 0.0 && next <= a);
            sum += a;
            a = next;
        }
        // alpha_t = 1 / (1 + rho t): partial sums grow like ln(t) / rho.
        assert!((a - 1.0 / (1.0 + 0.01 * 10_000.0)).abs() < 1e-12);
        assert!(sum > 300.0);
    }

    #[test]
    fn overhead_formula() {
        assert_eq!(cooperation_overhead(2, 64, 4, 100), 20_712);
        assert_eq!(cooperation_overhead(1, 8, 4, 16), 8 * 4 + 16 * 17);
        assert_eq!(cooperation_overhead(3, 2, 2, 0), 12);
    }

    #[test]
    fn bundle_size() {
        assert_eq!(PricingBundle::zeros(0, 1, 8, 4, 16).elements(), 32 + 16 + 256);
    }
}
