use bdris::engine::{initialize, run};
use bdris::linkalg::composite_channel;
use bdris::{cooperation_overhead, Engine, Network, RMat, Scenario, Scheme, Snapshot, UpdateOrder};

fn small(scheme: Scheme, seed: u64) -> Scenario {
    let mut s = Scenario::desk(2, 2, 4, 4, 2).unwrap().with_scheme(scheme);
    s.seed = seed;
    s
}

#[test]
fn initialization_is_feasible_at_full_power() {
    for scheme in Scheme::ALL {
        for seed in 1..=5 {
            let s = small(scheme, seed);
            let net = Network::from_scenario(&s).unwrap();
            let states = initialize(&s, &net).unwrap();
            for st in &states {
                st.check_feasible(s.power, &s.circuit).unwrap();
                assert!((st.power() - s.power).abs() <= 1e-9 * s.power);
            }
            assert_eq!(states, initialize(&s, &net).unwrap());
        }
    }
}

#[test]
fn initial_precoder_follows_own_channel() {
    let s = small(Scheme::BD_COOP, 3);
    let net = Network::from_scenario(&s).unwrap();
    let states = initialize(&s, &net).unwrap();
    let snap = Snapshot::new(&net, &states).unwrap();
    for q in 0..2 {
        for k in 0..s.k {
            let f = &snap.f[q][q][k];
            let fnorm = bdris::cmath::norm_sqr(f).sqrt();
            let amp = snap.amp[q][q][k];
            // MRT: |f^H w| = |f| |w| with |w|^2 = P / K
            assert!((amp.norm() - fnorm * (s.power / s.k as f64).sqrt()).abs() < 1e-9 * amp.norm());
            assert!(amp.im.abs() < 1e-9 * amp.norm());
        }
    }
}

#[test]
fn one_iteration_keeps_every_constraint() {
    for scheme in Scheme::ALL {
        let mut e = Engine::new(small(scheme, 4)).unwrap();
        e.iterate().unwrap();
        for st in &e.states {
            st.check_feasible(e.scenario.power, &e.scenario.circuit).unwrap();
        }
    }
}

#[test]
fn diagonal_scheme_keeps_identity() {
    let mut e = Engine::new(small(Scheme::DIAG_COOP, 2)).unwrap();
    for _ in 0..5 {
        e.iterate().unwrap();
    }
    assert!(e.states.iter().all(|st| st.s == RMat::identity(4)));
}

#[test]
fn no_ris_leaves_surface_untouched() {
    let mut e = Engine::new(small(Scheme::NORIS_COOP, 5)).unwrap();
    let before: Vec<_> = e.states.iter().map(|st| (st.c.clone(), st.s.clone())).collect();
    for _ in 0..3 {
        e.iterate().unwrap();
    }
    let snap = e.snapshot().unwrap();
    for (q, st) in e.states.iter().enumerate() {
        assert_eq!((st.c.clone(), st.s.clone()), before[q]);
        for j in 0..2 {
            assert_eq!(snap.f[q][j], e.net.channels.h[q][j]);
        }
    }
    // the same surface state does change the channel once reflections count
    let ch = &e.net.channels;
    let f = composite_channel(&ch.h[0][0][0], &ch.g[0][0][0], &e.states[0].s, &e.states[0].phi[0], &ch.big_h[0][0]).unwrap();
    assert_ne!(f, ch.h[0][0][0]);
}

#[test]
fn zero_pricing_exchanges_zero_bundles() {
    let mut e = Engine::new(small(Scheme::BD_ZP, 6)).unwrap();
    e.iterate().unwrap();
    for q in 0..2 {
        let b = e.bus.bundle(q).unwrap();
        assert_eq!(b.iteration, 1);
        assert!(b.precoder.iter().all(|x| x.norm() == 0.0));
        assert!(b.capacitance.iter().all(|&x| x == 0.0));
        assert!(b.switch.as_slice().iter().all(|&x| x == 0.0));
    }
    let mut coop = Engine::new(small(Scheme::BD_COOP, 6)).unwrap();
    coop.iterate().unwrap();
    assert!(coop.bus.bundle(0).unwrap().precoder.iter().any(|x| x.norm() > 0.0));
}

#[test]
fn bus_counts_match_overhead_formula() {
    for (q, n, m, k) in [(1, 1, 1, 1), (2, 2, 4, 4), (3, 3, 5, 2), (4, 2, 3, 6)] {
        let mut s = Scenario::desk(q, n, m, k, 1).unwrap();
        s.t_max = 3;
        s.eps = 1e-300;
        let mut e = Engine::new(s).unwrap();
        let trace = e.run().unwrap();
        let per = cooperation_overhead(q, k, n, m);
        assert!(e.bus.per_iteration().iter().all(|&c| c == per));
        assert_eq!(trace.exchanged, per * trace.iterations() as u64);
    }
}

#[test]
fn infinite_tolerance_stops_after_one_iteration() {
    let mut s = small(Scheme::BD_COOP, 1);
    s.eps = f64::INFINITY;
    let trace = run(&s).unwrap();
    assert_eq!(trace.iterations(), 1);
    assert!(trace.converged);
}

#[test]
fn iteration_cap_is_respected() {
    let mut s = small(Scheme::BD_COOP, 1);
    s.eps = 1e-300;
    s.t_max = 7;
    let trace = run(&s).unwrap();
    assert_eq!(trace.iterations(), 7);
    assert!(!trace.converged);
}

#[test]
fn worker_count_does_not_change_results() {
    let mut s = Scenario::desk(3, 2, 4, 4, 2).unwrap();
    s.seed = 11;
    s.eps = 1e-300;
    s.t_max = 8;
    let base = Engine::new(s.clone()).unwrap().run().unwrap();
    for workers in [1, 2, 4] {
        let t = Engine::new(s.clone()).unwrap().with_workers(workers).unwrap().run().unwrap();
        assert_eq!(t.records, base.records);
    }
}

#[test]
fn gauss_seidel_is_feasible_and_distinct() {
    let mut s = small(Scheme::BD_COOP, 8);
    s.eps = 1e-300;
    s.t_max = 4;
    let jacobi = run(&s).unwrap();
    s.update_order = UpdateOrder::GaussSeidel;
    let mut e = Engine::new(s).unwrap();
    let gs = e.run().unwrap();
    for st in &e.states {
        st.check_feasible(e.scenario.power, &e.scenario.circuit).unwrap();
    }
    assert_ne!(gs.sum_rates(), jacobi.sum_rates());
}

#[test]
fn step_sizes_in_trace_decrease() {
    let mut s = small(Scheme::BD_COOP, 2);
    s.eps = 1e-300;
    s.t_max = 6;
    let t = run(&s).unwrap();
    let a: Vec<f64> = t.records.iter().map(|r| r.alpha).collect();
    assert_eq!(a[0], 1.0);
    assert!(a.windows(2).all(|w| w[1] < w[0]));
}
