//! Fixture instances.

use std::fmt::Write;

use hhcr_core::Instance;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The four-customer toy: E1 (3,0) p=10, E2 (3,4) p=10, N1 (0,4) p=8,
/// N2 (6,0) p=5, depot at the origin, rejection cost 2.
pub fn t1() -> Instance {
    Instance::new(
        (0.0, 0.0),
        &[(3.0, 0.0, 10.0), (3.0, 4.0, 10.0)],
        &[(0.0, 4.0, 8.0), (6.0, 0.0, 5.0)],
        Some(2.0),
    )
    .expect("valid toy instance")
}

/// Euclidean instance with integer coordinates in `[0, 20]` and integer
/// payments in `[1, 20]`.
pub fn random_instance(seed: u64, n_existing: usize, n_new: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let point = |rng: &mut ChaCha8Rng| {
        (
            rng.gen_range(0..=20) as f64,
            rng.gen_range(0..=20) as f64,
            rng.gen_range(1..=20) as f64,
        )
    };
    let depot = point(&mut rng);
    let existing: Vec<_> = (0..n_existing).map(|_| point(&mut rng)).collect();
    let new: Vec<_> = (0..n_new).map(|_| point(&mut rng)).collect();
    Instance::new((depot.0, depot.1), &existing, &new, None).expect("valid random instance")
}

/// Text in the OP benchmark layout with `nodes` points: a letter-led
/// header, then `x y score` rows with the depot first and last.
pub fn chao_surrogate(seed: u64, nodes: usize) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::new();
    let _ = writeln!(out, "n {nodes}");
    let _ = writeln!(out, "m 1");
    let _ = writeln!(out, "tmax 40.0");
    let depot = (
        rng.gen_range(0..=250) as f64 / 10.0,
        rng.gen_range(0..=250) as f64 / 10.0,
    );
    let _ = writeln!(out, "{:.1}\t{:.1}\t0", depot.0, depot.1);
    for _ in 0..nodes.saturating_sub(2) {
        let x = rng.gen_range(0..=250) as f64 / 10.0;
        let y = rng.gen_range(0..=250) as f64 / 10.0;
        let s = 10 * rng.gen_range(1..=4);
        let _ = writeln!(out, "{x:.1}\t{y:.1}\t{s}");
    }
    let _ = writeln!(out, "{:.1}\t{:.1}\t0", depot.0, depot.1);
    out
}

/// Serialises an instance in the layout [`Instance::parse`] reads back
/// with `(n_existing, n_new)`.
pub fn instance_text(inst: &Instance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "n {}", inst.len() + 1);
    let _ = writeln!(out, "m 1");
    for n in inst.nodes() {
        let _ = writeln!(out, "{} {} {}", n.x, n.y, n.payment);
    }
    let d = &inst.nodes()[0];
    let _ = writeln!(out, "{} {} 0", d.x, d.y);
    out
}
