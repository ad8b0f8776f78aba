//! Fixtures shared by the kernel benchmarks in `benches/`.

use krammer_core::closure::{reduce_mod_p, select_reflections, GeneratorSet, PrimeFieldMatrix};
use krammer_core::krammer::tau;
use krammer_core::matrix::rat;
use krammer_core::{build_system, CoxeterSystem};

pub fn system(t: &str) -> CoxeterSystem {
    build_system(t.parse().expect("type")).expect("system")
}

/// Simple-reflection generators of `t` at integer `m`, reduced mod 19.
pub fn simple_generators(t: &str, m: i64) -> Vec<PrimeFieldMatrix> {
    let sys = system(t);
    select_reflections(&sys, GeneratorSet::Simple)
        .expect("selector")
        .into_iter()
        .map(|s| reduce_mod_p(&tau(&sys, s, &rat(m)), 19).expect("reduction"))
        .collect()
}
