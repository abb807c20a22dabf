//! Random-point check of a subdivision: every sampled point of a cone lies
//! in some cell, and points interior to a cell lie in no other cell.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use troplog::moduli::CoordSign;
use troplog::rational::frac;
use troplog::subdivision::SubdividedComplex;
use troplog::Rational;

#[derive(Debug, Serialize)]
pub struct SampleCheck {
    pub seed: u64,
    pub points: usize,
    pub uncovered: usize,
    pub interior_overlaps: usize,
}

pub fn check(result: &SubdividedComplex, per_cone: usize, seed: u64) -> SampleCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = SampleCheck { seed, points: 0, uncovered: 0, interior_overlaps: 0 };
    for (mc, sub) in result.complex.cones.iter().zip(&result.subdivisions) {
        let cells: Vec<_> = sub
            .cells
            .iter()
            .map(|c| c.polyhedron(&sub.coords).expect("cells use the cone's coordinates"))
            .collect();
        for _ in 0..per_cone {
            let point: BTreeMap<String, Rational> = mc
                .cone
                .coords()
                .iter()
                .map(|c| {
                    let num = match c.sign {
                        CoordSign::Nonneg => rng.gen_range(0..=12),
                        CoordSign::Free => rng.gen_range(-12..=12),
                    };
                    (c.name.clone(), frac(num, rng.gen_range(1..=4)))
                })
                .collect();
            if !mc.cone.polyhedron().expect("cone polyhedron").contains(&point) {
                continue;
            }
            out.points += 1;
            let containing: Vec<usize> = (0..cells.len()).filter(|&k| cells[k].contains(&point)).collect();
            if containing.is_empty() {
                out.uncovered += 1;
            }
            let interior = containing.iter().any(|&k| {
                sub.cells[k].halfspaces.iter().all(|h| h.eval(&point).is_some_and(|v| v > Rational::from_integer(0.into())))
            });
            if interior && containing.len() > 1 {
                out.interior_overlaps += 1;
            }
        }
    }
    out
}
