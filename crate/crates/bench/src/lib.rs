//! Shared fixtures for the criterion benches.

use symwalk::characters::CycleType;
use symwalk::spectra::{random_transposition_measure, uniform_class_measure};
use symwalk::ClassMeasure;

pub const PREC: usize = 128;

pub fn transpositions(n: usize) -> ClassMeasure {
    random_transposition_measure(n).expect("n >= 2")
}

pub fn k_cycles(k: usize, n: usize) -> ClassMeasure {
    uniform_class_measure(&CycleType::cycle(k, n).expect("k <= n")).expect("non-identity class")
}
