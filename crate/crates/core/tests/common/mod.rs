//! Shared generators and independent oracles for the integration tests.
//!
//! Nothing here calls into the library's solvers: the balancing oracle is a
//! plain Gaussian elimination over the vertex equations, and the type oracle
//! works with split systems instead of trees.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use troplog::pl_function::ContactOrder;
use troplog::rational::int;
use troplog::tropical_curve::{Edge, Leg, Length, Tree, VertexId};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random concrete tree with `n` legs and between 1 and `n - 1` vertices.
/// Vertex ids are scattered and edge orientations random.
pub fn random_tree(rng: &mut impl Rng, n: usize) -> Tree {
    let k = rng.gen_range(1..n.max(2));
    let mut ids: Vec<u32> = (0..(4 * k as u32)).collect();
    ids.shuffle(rng);
    let ids: Vec<VertexId> = ids[..k].iter().map(|&i| VertexId(i)).collect();
    let mut edges = Vec::new();
    for i in 1..k {
        let parent = ids[rng.gen_range(0..i)];
        let ends = if rng.gen_bool(0.5) { [parent, ids[i]] } else { [ids[i], parent] };
        let length = Length::Concrete(BigRational::new(rng.gen_range(1..20).into(), rng.gen_range(1..4).into()));
        edges.push(Edge { ends, length });
    }
    edges.shuffle(rng);
    let legs = (1..=n as u32).map(|label| Leg { label, at: ids[rng.gen_range(0..k)] }).collect();
    Tree::new(ids, edges, legs).expect("generator builds valid trees")
}

pub fn random_zero_sum(rng: &mut impl Rng, n: usize, bound: i64) -> ContactOrder {
    let mut slopes: Vec<i64> = (0..n - 1).map(|_| rng.gen_range(-bound..=bound)).collect();
    slopes.push(-slopes.iter().sum::<i64>());
    ContactOrder::new(slopes)
}

/// Zero-sum and no proper nonempty subset sums to zero.
pub fn random_generic(rng: &mut impl Rng, n: usize) -> ContactOrder {
    loop {
        let sigma = random_zero_sum(rng, n, 9);
        if is_generic(sigma.slopes()) {
            return sigma;
        }
    }
}

pub fn is_generic(slopes: &[i64]) -> bool {
    let n = slopes.len();
    (1..(1u64 << n) - 1).all(|mask| {
        (0..n).filter(|i| mask >> i & 1 == 1).map(|i| slopes[i]).sum::<i64>() != 0
    })
}

/// Outcome of solving the balancing equations as a linear system.
#[derive(Debug, PartialEq)]
pub enum LinearOutcome {
    Unique(Vec<BigRational>),
    Inconsistent,
    Underdetermined,
}

/// Solves for edge slopes (oriented `ends[0] -> ends[1]`) such that at every
/// vertex the outgoing edge slopes plus the leg slopes vanish.
pub fn balancing_oracle(tree: &Tree, sigma: &[i64]) -> LinearOutcome {
    let vars = tree.edges().len();
    let mut rows: Vec<Vec<BigRational>> = tree
        .vertices()
        .iter()
        .map(|&v| {
            let mut row = vec![BigRational::zero(); vars + 1];
            for (i, e) in tree.edges().iter().enumerate() {
                if e.ends[0] == v {
                    row[i] += BigRational::one();
                }
                if e.ends[1] == v {
                    row[i] -= BigRational::one();
                }
            }
            let legs: i64 = tree.legs().iter().filter(|l| l.at == v).map(|l| sigma[l.label as usize - 1]).sum();
            row[vars] = int(-legs);
            row
        })
        .collect();

    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..vars {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else { continue };
        rows.swap(r, p);
        let lead = rows[r][col].clone();
        for x in rows[r].iter_mut() {
            *x /= lead.clone();
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][col].is_zero() {
                let f = rows[i][col].clone();
                for j in 0..=vars {
                    let d = &rows[r][j] * &f;
                    rows[i][j] -= d;
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    if rows[r..].iter().any(|row| !row[vars].is_zero()) {
        return LinearOutcome::Inconsistent;
    }
    if pivots.len() < vars {
        return LinearOutcome::Underdetermined;
    }
    LinearOutcome::Unique((0..vars).map(|i| rows[i][vars].clone()).collect())
}

/// A split `A | rest` of `{1..n}` recorded by the side `A` avoiding `n`.
pub type Split = BTreeSet<u32>;

/// All nontrivial splits of `{1..n}`.
pub fn all_splits(n: u32) -> Vec<Split> {
    (0u64..1 << (n - 1))
        .map(|mask| (1..n).filter(|i| mask >> (i - 1) & 1 == 1).collect::<Split>())
        .filter(|s| s.len() >= 2 && s.len() as u32 <= n - 2)
        .collect()
}

fn compatible(a: &Split, b: &Split) -> bool {
    a.is_disjoint(b) || a.is_subset(b) || b.is_subset(a)
}

/// Every pairwise compatible set of nontrivial splits, with at most `n - 3`
/// members. Each one is the split system of exactly one stable tree type.
pub fn compatible_systems(n: u32) -> Vec<BTreeSet<Split>> {
    let splits = all_splits(n);
    let mut out = Vec::new();
    let mut chosen: Vec<usize> = Vec::new();
    fn go(splits: &[Split], start: usize, chosen: &mut Vec<usize>, out: &mut Vec<BTreeSet<Split>>) {
        out.push(chosen.iter().map(|&i| splits[i].clone()).collect());
        for i in start..splits.len() {
            if chosen.iter().all(|&j| compatible(&splits[i], &splits[j])) {
                chosen.push(i);
                go(splits, i + 1, chosen, out);
                chosen.pop();
            }
        }
    }
    go(&splits, 0, &mut chosen, &mut out);
    out
}

/// The split system of a tree, read off edge by edge.
pub fn split_system(tree: &Tree) -> BTreeSet<Split> {
    let n = tree.num_legs() as u32;
    tree.edges()
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let side = component_without_edge(tree, i, e.ends[0]);
            let legs: Split = tree.legs().iter().filter(|l| side.contains(&l.at)).map(|l| l.label).collect();
            if legs.contains(&n) {
                (1..=n).filter(|x| !legs.contains(x)).collect()
            } else {
                legs
            }
        })
        .collect()
}

fn component_without_edge(tree: &Tree, skip: usize, start: VertexId) -> BTreeSet<VertexId> {
    let mut seen = BTreeSet::from([start]);
    let mut stack = vec![start];
    while let Some(v) = stack.pop() {
        for (i, w) in tree.incident(v) {
            if i != skip && seen.insert(w) {
                stack.push(w);
            }
        }
    }
    seen
}

pub fn double_factorial(k: i64) -> u64 {
    if k <= 1 {
        1
    } else {
        k as u64 * double_factorial(k - 2)
    }
}

pub fn concrete_lengths(tree: &Tree) -> Vec<BigRational> {
    tree.edges()
        .iter()
        .map(|e| match &e.length {
            Length::Concrete(q) => q.clone(),
            Length::Symbolic => panic!("symbolic length"),
        })
        .collect()
}

/// Vertex values obtained by walking out from `start` with the given edge
/// slopes (oriented `ends[0] -> ends[1]`) and lengths.
pub fn walk_values(
    tree: &Tree,
    lengths: &[BigRational],
    slopes: &[BigRational],
    start: VertexId,
    start_value: BigRational,
) -> BTreeMap<VertexId, BigRational> {
    let mut values = BTreeMap::from([(start, start_value)]);
    let mut stack = vec![start];
    while let Some(v) = stack.pop() {
        for (i, w) in tree.incident(v) {
            if values.contains_key(&w) {
                continue;
            }
            let slope = if tree.edges()[i].ends[0] == v { slopes[i].clone() } else { -slopes[i].clone() };
            let value = &values[&v] + slope * &lengths[i];
            values.insert(w, value);
            stack.push(w);
        }
    }
    values
}
