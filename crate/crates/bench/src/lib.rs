//! Fixtures shared by the criterion benchmarks in `benches/`.

use curvreal::algebra::random_aco;
use curvreal::frame::{random_metric, MetricField};
use curvreal::realizer::initial_gamma;
use curvreal::{AlgebraicCurvatureOperator, ChristoffelField, Jet, Signature};

/// A dense jet: every monomial of degree `≤ cap` with coefficient `1/(1 + degree)`.
pub fn dense_jet(dim: usize, cap: u32) -> Jet {
    let mut terms = Vec::new();
    let mut e = vec![0u32; dim];
    loop {
        let d: u32 = e.iter().sum();
        if d <= cap {
            terms.push((e.clone(), curvreal::rational::ratio(1, 1 + d as i64)));
        }
        let Some(pos) = (0..dim).find(|&i| e[i] < cap) else { break };
        e[pos] += 1;
        e[..pos].iter_mut().for_each(|x| *x = 0);
    }
    Jet::from_exponents(dim, cap, terms).expect("exponents have the right length")
}

pub fn model(seed: u64, dim: usize, order: u32, curved: bool) -> (AlgebraicCurvatureOperator, MetricField) {
    let sig = Signature::new(1, dim - 1);
    let a = random_aco(seed, dim, 3).expect("dim ≥ 3");
    let g = if curved {
        random_metric(seed, sig, order + 1, &[2]).expect("positive degrees")
    } else {
        MetricField::flat(sig, order + 1)
    };
    (a, g)
}

pub fn starting_symbol(seed: u64, dim: usize, cap: u32) -> ChristoffelField {
    initial_gamma(&random_aco(seed, dim, 3).expect("dim ≥ 3"), cap)
}
