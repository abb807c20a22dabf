use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{Edge, Leg, Tree, VertexId};

/// Isomorphism class of a tree with labeled legs, carried by a canonical
/// representative whose lengths are all symbolic.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CombinatorialType {
    key: String,
    tree: Tree,
}

impl CombinatorialType {
    pub fn of(tree: &Tree) -> Self {
        let (layout, _) = canonical_layout(tree);
        Self { key: canonical_key(tree), tree: layout.symbolic() }
    }

    pub fn key(&self) -> &str {
        &self.key
    }

    pub fn tree(&self) -> &Tree {
        &self.tree
    }

    pub fn is_trivalent(&self) -> bool {
        self.tree.vertices().iter().all(|&v| self.tree.valence(v) == 3)
    }
}

impl PartialEq for CombinatorialType {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
    }
}

impl Eq for CombinatorialType {}

impl PartialOrd for CombinatorialType {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CombinatorialType {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key.cmp(&other.key)
    }
}

struct Rooted<'a> {
    tree: &'a Tree,
    adjacency: HashMap<VertexId, Vec<(usize, VertexId)>>,
    legs: HashMap<VertexId, Vec<u32>>,
}

impl<'a> Rooted<'a> {
    fn new(tree: &'a Tree) -> Self {
        let mut adjacency: HashMap<VertexId, Vec<(usize, VertexId)>> = HashMap::new();
        for (i, e) in tree.edges().iter().enumerate() {
            adjacency.entry(e.ends[0]).or_default().push((i, e.ends[1]));
            adjacency.entry(e.ends[1]).or_default().push((i, e.ends[0]));
        }
        let mut legs: HashMap<VertexId, Vec<u32>> = HashMap::new();
        for l in tree.legs() {
            legs.entry(l.at).or_default().push(l.label);
        }
        for labels in legs.values_mut() {
            labels.sort_unstable();
        }
        Self { tree, adjacency, legs }
    }

    fn children(&self, v: VertexId, parent: Option<VertexId>) -> Vec<(usize, VertexId)> {
        self.adjacency
            .get(&v)
            .map(|adj| adj.iter().copied().filter(|&(_, w)| Some(w) != parent).collect())
            .unwrap_or_default()
    }

    fn encode(&self, v: VertexId, parent: Option<VertexId>) -> String {
        let mut parts: Vec<String> = self
            .legs
            .get(&v)
            .map(|ls| ls.iter().map(u32::to_string).collect())
            .unwrap_or_default();
        let mut kids: Vec<String> =
            self.children(v, parent).into_iter().map(|(_, w)| self.encode(w, Some(v))).collect();
        kids.sort();
        parts.extend(kids);
        format!("({})", parts.join(","))
    }

    fn root(&self) -> Option<VertexId> {
        if let Some(leg) = self.tree.legs().iter().min_by_key(|l| l.label) {
            return Some(leg.at);
        }
        self.tree
            .vertices()
            .iter()
            .copied()
            .min_by_key(|&v| self.encode(v, None))
    }
}

/// Canonical string for the leg-labelled isomorphism class of `tree`.
///
/// The tree is rooted at the vertex carrying the smallest leg label (or, for
/// legless trees, at the vertex giving the smallest encoding), and encoded
/// as nested parentheses with leg labels first and child encodings sorted.
pub fn canonical_key(tree: &Tree) -> String {
    let rooted = Rooted::new(tree);
    match rooted.root() {
        Some(root) => rooted.encode(root, None),
        None => String::new(),
    }
}

/// Relabels `tree` into canonical layout: vertices numbered `0..` in
/// preorder of the canonical rooted traversal, edge `k` joining the parent
/// of vertex `k + 1` to it, legs sorted by label. Also returns, for every
/// original edge index, its index in the new layout.
pub fn canonical_layout(tree: &Tree) -> (Tree, Vec<usize>) {
    let rooted = Rooted::new(tree);
    let Some(root) = rooted.root() else {
        return (tree.clone(), Vec::new());
    };
    let mut order: Vec<VertexId> = Vec::new();
    let mut new_id: HashMap<VertexId, VertexId> = HashMap::new();
    let mut edges: Vec<Edge> = Vec::new();
    let mut edge_map = vec![usize::MAX; tree.edges().len()];

    let mut stack: Vec<(VertexId, Option<(usize, VertexId)>)> = vec![(root, None)];
    while let Some((v, via)) = stack.pop() {
        let id = VertexId(order.len() as u32);
        order.push(v);
        new_id.insert(v, id);
        if let Some((old_edge, parent)) = via {
            edge_map[old_edge] = edges.len();
            edges.push(Edge { ends: [new_id[&parent], id], length: tree.edges()[old_edge].length.clone() });
        }
        let parent = via.map(|(_, p)| p);
        let mut kids: Vec<(String, usize, VertexId)> = rooted
            .children(v, parent)
            .into_iter()
            .map(|(e, w)| (rooted.encode(w, Some(v)), e, w))
            .collect();
        kids.sort();
        for (_, e, w) in kids.into_iter().rev() {
            stack.push((w, Some((e, v))));
        }
    }

    let mut legs: Vec<Leg> =
        tree.legs().iter().map(|l| Leg { label: l.label, at: new_id[&l.at] }).collect();
    legs.sort_by_key(|l| l.label);
    let vertices = (0..order.len() as u32).map(VertexId).collect();
    (Tree::from_parts(vertices, edges, legs), edge_map)
}
