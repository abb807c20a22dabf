use std::collections::BTreeMap;

use super::{CombinatorialType, Edge, Leg, Length, Tree, VertexId};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TypeFilter {
    /// Every vertex has at least three special points.
    Stable,
    /// Every vertex has exactly three special points.
    Trivalent,
    /// No stability condition; trees with up to `max_vertices` vertices.
    Any { max_vertices: usize },
}

/// All isomorphism classes of trees with legs `1..=n` passing `filter`,
/// sorted by canonical key.
pub fn enumerate_tree_types(n: usize, filter: TypeFilter) -> Result<Vec<CombinatorialType>> {
    let found = match filter {
        TypeFilter::Stable | TypeFilter::Trivalent => {
            if n < 3 {
                return Err(Error::UnstableRange { n });
            }
            let mut all = stable_types(n);
            if filter == TypeFilter::Trivalent {
                all.retain(|_, t| t.is_trivalent());
            }
            all
        }
        TypeFilter::Any { max_vertices } => all_types(n, max_vertices),
    };
    Ok(found.into_values().collect())
}

fn insert(into: &mut BTreeMap<String, CombinatorialType>, tree: &Tree) {
    let ty = CombinatorialType::of(tree);
    into.entry(ty.key().to_string()).or_insert(ty);
}

// Every stable tree on n legs arises from one on n - 1 legs by placing leg n
// on a vertex, on a new vertex splitting an edge, or on a new vertex sprouted
// between a leg and its attachment vertex.
fn stable_types(n: usize) -> BTreeMap<String, CombinatorialType> {
    let mut level = BTreeMap::new();
    insert(&mut level, &Tree::star(3));
    for label in 4..=n as u32 {
        let mut next = BTreeMap::new();
        for ty in level.values() {
            let t = ty.tree();
            for &v in t.vertices() {
                let mut legs = t.legs().to_vec();
                legs.push(Leg { label, at: v });
                insert(&mut next, &Tree::from_parts(t.vertices().to_vec(), t.edges().to_vec(), legs));
            }
            for e in 0..t.edges().len() {
                let (split, mid) = t
                    .subdivide_edge(e, Length::Symbolic, Length::Symbolic)
                    .expect("edge index in range");
                let mut legs = split.legs().to_vec();
                legs.push(Leg { label, at: mid });
                insert(&mut next, &Tree::from_parts(split.vertices().to_vec(), split.edges().to_vec(), legs));
            }
            for old in 1..label {
                let (sprouted, new) = t.sprout_leg(old, Length::Symbolic).expect("leg exists");
                let mut legs = sprouted.legs().to_vec();
                legs.push(Leg { label, at: new });
                insert(&mut next, &Tree::from_parts(sprouted.vertices().to_vec(), sprouted.edges().to_vec(), legs));
            }
        }
        level = next;
    }
    level
}

fn prufer_tree(k: usize, seq: &[usize]) -> Vec<Edge> {
    let mut degree = vec![1usize; k];
    for &s in seq {
        degree[s] += 1;
    }
    let mut edges = Vec::with_capacity(k.saturating_sub(1));
    let mk = |a: usize, b: usize| Edge {
        ends: [VertexId(a as u32), VertexId(b as u32)],
        length: Length::Symbolic,
    };
    for &s in seq {
        let leaf = (0..k).find(|&v| degree[v] == 1).expect("a leaf exists");
        edges.push(mk(leaf, s));
        degree[leaf] -= 1;
        degree[s] -= 1;
    }
    let rest: Vec<usize> = (0..k).filter(|&v| degree[v] == 1).collect();
    if rest.len() == 2 {
        edges.push(mk(rest[0], rest[1]));
    }
    edges
}

fn odometer(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

// Brute force over labelled trees (Prüfer sequences) and leg placements.
fn all_types(n: usize, max_vertices: usize) -> BTreeMap<String, CombinatorialType> {
    let mut out = BTreeMap::new();
    for k in 1..=max_vertices {
        let vertices: Vec<VertexId> = (0..k as u32).map(VertexId).collect();
        let mut seq = vec![0usize; k.saturating_sub(2)];
        loop {
            let edges = prufer_tree(k, &seq);
            let mut at = vec![0usize; n];
            loop {
                let legs = at
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| Leg { label: i as u32 + 1, at: VertexId(v as u32) })
                    .collect();
                insert(&mut out, &Tree::from_parts(vertices.clone(), edges.clone(), legs));
                if !odometer(&mut at, k) {
                    break;
                }
            }
            if !odometer(&mut seq, k) {
                break;
            }
        }
    }
    out
}
