//! Fixtures shared by the benchmarks.

use kgtail::measure::{Atom, AtomicMeasure};

/// `{(2, -1) w.p. 1/3, (1/2, 1) w.p. 2/3}`, with `α = 1`.
pub fn positive_affine() -> AtomicMeasure {
    AtomicMeasure::new(
        vec![
            Atom::new(2.0, -1.0, 1.0 / 3.0),
            Atom::new(0.5, 1.0, 2.0 / 3.0),
        ],
        "positive affine",
    )
    .expect("valid measure")
}

/// An `n`-atom measure with `E log A < 0` and one expanding atom.
pub fn many_atoms(n: usize) -> AtomicMeasure {
    let atoms = (0..n)
        .map(|i| {
            let a = if i == 0 {
                3.0
            } else {
                0.2 + 0.6 * i as f64 / n as f64
            };
            Atom::new(a, (i as f64).sin(), 1.0 / n as f64)
        })
        .collect();
    AtomicMeasure::new(atoms, "many").expect("valid measure")
}

/// Pareto(1) sample by inversion of a fixed low-discrepancy sequence.
pub fn pareto_sample(n: usize) -> Vec<f64> {
    let phi = 0.618_033_988_749_894_9_f64;
    (1..=n)
        .map(|i| 1.0 / (1.0 - (i as f64 * phi).fract()))
        .collect()
}
