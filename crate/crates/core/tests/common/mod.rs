#![allow(dead_code)]

use std::path::PathBuf;

use crn_core::model::{Complex, Reaction};
use crn_core::parser::parse_network;
use crn_core::{Network, NetworkDocument};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

pub fn load(name: &str) -> NetworkDocument {
    let text = std::fs::read_to_string(data_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
    parse_network(&text).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn seed() -> u64 {
    std::env::var("CRN_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(20_240_601)
}

pub fn rng(stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed() ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

pub fn names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("X{i}")).collect()
}

fn random_complex(rng: &mut ChaCha8Rng, n: usize, max_order: u32) -> Vec<f64> {
    let mut v = vec![0.0; n];
    let order = rng.gen_range(0..=max_order);
    for _ in 0..order {
        v[rng.gen_range(0..n)] += 1.0;
    }
    v
}

/// A standard network with 2..=4 species and 1..=6 distinct reactions.
pub fn random_network(rng: &mut ChaCha8Rng) -> Network {
    let n = rng.gen_range(2..=4);
    let r = rng.gen_range(1..=6);
    let mut seen = Vec::new();
    let mut reactions = Vec::new();
    while reactions.len() < r {
        let a = random_complex(rng, n, 3);
        let b = random_complex(rng, n, 3);
        if a == b || seen.contains(&(a.clone(), b.clone())) {
            continue;
        }
        seen.push((a.clone(), b.clone()));
        let k = rng.gen_range(0.1..5.0);
        reactions.push(Reaction::new(Complex::from_dense(&a), Complex::from_dense(&b), k));
    }
    Network::new(names(n), reactions).expect("valid random network")
}

/// A network in which every reaction preserves the total molecule count,
/// so `x1 + ... + xn` is conserved.
pub fn random_conservative_network(rng: &mut ChaCha8Rng) -> Network {
    let n = rng.gen_range(2..=4);
    let r = rng.gen_range(1..=5);
    let mut seen = Vec::new();
    let mut reactions = Vec::new();
    while reactions.len() < r {
        let order = rng.gen_range(1..=2);
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        for _ in 0..order {
            a[rng.gen_range(0..n)] += 1.0;
            b[rng.gen_range(0..n)] += 1.0;
        }
        if a == b || seen.contains(&(a.clone(), b.clone())) {
            continue;
        }
        seen.push((a.clone(), b.clone()));
        let k = rng.gen_range(0.1..3.0);
        reactions.push(Reaction::new(Complex::from_dense(&a), Complex::from_dense(&b), k));
    }
    Network::new(names(n), reactions).expect("valid random network")
}

pub fn sup_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0_f64, |m, (u, v)| m.max((u - v).abs()))
}
