use bdris::engine::initialize;
use bdris::linkalg::{mui_power, sinr, sum_rate};
use bdris::scenario::{synthesize_channels, ChannelSet};
use bdris::{CMat, Network, RMat, RisKind, Scenario, Scheme, Snapshot, UserState, C64};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[test]
fn single_user_sees_only_noise() {
    let s = Scenario::desk(1, 2, 4, 4, 2).unwrap();
    let net = Network::from_scenario(&s).unwrap();
    let states = initialize(&s, &net).unwrap();
    for k in 0..4 {
        assert_eq!(mui_power(0, k, &net, &states).unwrap(), s.sigma2);
    }
}

/// One antenna, one element, one subcarrier, written out by hand.
#[test]
fn scalar_link_closed_form() {
    let mut s = Scenario::desk(1, 1, 1, 1, 1).unwrap();
    s.sigma2 = 0.5;
    let channels = ChannelSet {
        h: vec![vec![vec![vec![c(0.3, -0.1)]]]],
        big_h: vec![vec![CMat::from_fn(1, 1, |_, _| c(0.8, 0.4))]],
        g: vec![vec![vec![vec![c(-0.2, 0.6)]]]],
    };
    let net = Network::new(&s, channels).unwrap();
    let w = c(0.7, 0.2);
    let st = UserState::new(vec![vec![w]], vec![1.3e-12], RMat::identity(1), &net.freqs, &s.circuit).unwrap();
    let phi = st.phi[0][0];
    // f^H = h^H + g^H phi H
    let f_h = c(0.3, -0.1).conj() + c(-0.2, 0.6).conj() * phi * c(0.8, 0.4);
    let snr = (f_h * w).norm_sqr() / 0.5;
    let states = vec![st];
    assert!((sinr(0, 0, &net, &states).unwrap() - snr).abs() < 1e-14);
    assert!((sum_rate(&net, &states).unwrap() - (1.0 + snr).log2()).abs() < 1e-14);
}

#[test]
fn interference_adds_cross_amplitudes() {
    let s = Scenario::desk(3, 2, 3, 2, 1).unwrap();
    let net = Network::from_scenario(&s).unwrap();
    let states = initialize(&s, &net).unwrap();
    let snap = Snapshot::new(&net, &states).unwrap();
    for q in 0..3 {
        for k in 0..2 {
            let expect = s.sigma2
                + (0..3)
                    .filter(|&j| j != q)
                    .map(|j| bdris::cmath::dot_h(&snap.f[j][q][k], &states[j].w[k]).norm_sqr())
                    .sum::<f64>();
            assert!((snap.mui(q, k) - expect).abs() <= 1e-12 * expect);
        }
    }
}

#[test]
fn identity_switch_matches_diagonal_surface() {
    let s = Scenario::desk(2, 2, 4, 3, 2).unwrap();
    let bd = Network::from_scenario(&s).unwrap();
    let diag = Network::from_scenario(&s.clone().with_scheme(Scheme::DIAG_COOP)).unwrap();
    assert_eq!(diag.ris, RisKind::Diag);
    let mut states = initialize(&s, &bd).unwrap();
    for st in &mut states {
        st.s = RMat::identity(4);
    }
    assert_eq!(sum_rate(&bd, &states).unwrap(), sum_rate(&diag, &states).unwrap());
}

#[test]
fn rates_are_reported_per_subcarrier() {
    let s = Scenario::desk(2, 2, 4, 4, 2).unwrap();
    let net = Network::new(&s, synthesize_channels(&s).unwrap()).unwrap();
    let states = initialize(&s, &net).unwrap();
    let snap = Snapshot::new(&net, &states).unwrap();
    assert!((snap.sum_rate() * 4.0 - snap.sum_rate_raw()).abs() < 1e-12);
    let total: f64 = (0..2).map(|q| snap.user_rate(q)).sum();
    assert!((total - snap.sum_rate()).abs() < 1e-12);
}
