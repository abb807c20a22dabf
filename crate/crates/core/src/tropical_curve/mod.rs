//! Genus-0 tropical curves: finite metric trees with labeled infinite legs.
//!
//! A [`Tree`] doubles as a concrete metric curve (all lengths known) and as a
//! chart of a moduli cone (lengths symbolic, one named coordinate per edge).

mod canonical;
mod enumerate;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::affine::AffineExpr;
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

pub use canonical::{canonical_key, canonical_layout, CombinatorialType};
pub use enumerate::{enumerate_tree_types, TypeFilter};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub u32);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Length {
    Concrete(Rational),
    /// Named coordinate `l_e{k}`, see [`Tree::edge_coordinate`].
    Symbolic,
}

impl Serialize for Length {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Length::Concrete(q) => s.serialize_str(&rational::format(q)),
            Length::Symbolic => s.serialize_none(),
        }
    }
}

impl<'de> Deserialize<'de> for Length {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match Option::<String>::deserialize(d)? {
            None => Ok(Length::Symbolic),
            Some(s) => rational::parse(&s)
                .map(Length::Concrete)
                .map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub ends: [VertexId; 2],
    pub length: Length,
}

impl Edge {
    pub fn other(&self, v: VertexId) -> VertexId {
        if self.ends[0] == v {
            self.ends[1]
        } else {
            self.ends[0]
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Leg {
    pub label: u32,
    pub at: VertexId,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tree {
    vertices: Vec<VertexId>,
    edges: Vec<Edge>,
    legs: Vec<Leg>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    NoVertices,
    DuplicateVertex { vertex: VertexId },
    UnknownEndpoint { edge: usize, vertex: VertexId },
    Cycle { edge: usize },
    Disconnected { components: usize },
    NegativeLength { edge: usize },
    ZeroLength { edge: usize },
    DuplicateLeg { label: u32 },
    MissingLeg { label: u32 },
    LegLabelOutOfRange { label: u32 },
    LegAtUnknownVertex { label: u32, vertex: VertexId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoVertices => write!(f, "tree has no vertices"),
            Violation::DuplicateVertex { vertex } => write!(f, "vertex {vertex} listed twice"),
            Violation::UnknownEndpoint { edge, vertex } => {
                write!(f, "edge {edge} ends at unknown vertex {vertex}")
            }
            Violation::Cycle { edge } => write!(f, "edge {edge} closes a cycle"),
            Violation::Disconnected { components } => {
                write!(f, "graph has {components} connected components")
            }
            Violation::NegativeLength { edge } => write!(f, "edge {edge} has negative length"),
            Violation::ZeroLength { edge } => write!(f, "edge {edge} has length zero"),
            Violation::DuplicateLeg { label } => write!(f, "leg {label} appears twice"),
            Violation::MissingLeg { label } => write!(f, "leg {label} is missing"),
            Violation::LegLabelOutOfRange { label } => write!(f, "leg label {label} out of range"),
            Violation::LegAtUnknownVertex { label, vertex } => {
                write!(f, "leg {label} attached to unknown vertex {vertex}")
            }
        }
    }
}

/// Every invariant violation found in a tree; empty iff the tree is valid.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        let parts: Vec<String> = self.violations.iter().map(ToString::to_string).collect();
        write!(f, "{}", parts.join("; "))
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra] = rb;
        true
    }
}

impl Tree {
    /// Assembles a tree without checking invariants; see [`Tree::validate`].
    pub fn from_parts(vertices: Vec<VertexId>, edges: Vec<Edge>, legs: Vec<Leg>) -> Self {
        Self { vertices, edges, legs }
    }

    pub fn new(vertices: Vec<VertexId>, edges: Vec<Edge>, legs: Vec<Leg>) -> Result<Self> {
        let tree = Self::from_parts(vertices, edges, legs);
        let report = tree.validate();
        if report.is_valid() {
            Ok(tree)
        } else {
            Err(Error::InvalidTree(report))
        }
    }

    /// One vertex carrying legs `1..=n`.
    pub fn star(n: u32) -> Self {
        Self::from_parts(
            vec![VertexId(0)],
            Vec::new(),
            (1..=n).map(|label| Leg { label, at: VertexId(0) }).collect(),
        )
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn legs(&self) -> &[Leg] {
        &self.legs
    }

    pub fn num_legs(&self) -> usize {
        self.legs.len()
    }

    pub fn has_vertex(&self, v: VertexId) -> bool {
        self.vertices.contains(&v)
    }

    pub fn leg(&self, label: u32) -> Option<&Leg> {
        self.legs.iter().find(|l| l.label == label)
    }

    /// Incident edges of `v` as `(edge index, neighbor)`.
    pub fn incident(&self, v: VertexId) -> Vec<(usize, VertexId)> {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.ends.contains(&v))
            .map(|(i, e)| (i, e.other(v)))
            .collect()
    }

    pub fn legs_at(&self, v: VertexId) -> Vec<u32> {
        let mut labels: Vec<u32> =
            self.legs.iter().filter(|l| l.at == v).map(|l| l.label).collect();
        labels.sort_unstable();
        labels
    }

    /// Number of special points on the component: incident edges plus legs.
    pub fn valence(&self, v: VertexId) -> usize {
        self.incident(v).len() + self.legs.iter().filter(|l| l.at == v).count()
    }

    pub fn is_concrete(&self) -> bool {
        self.edges.iter().all(|e| matches!(e.length, Length::Concrete(_)))
    }

    pub fn edge_coordinate(index: usize) -> String {
        format!("l_e{}", index + 1)
    }

    pub fn edge_coordinates(&self) -> Vec<String> {
        (0..self.edges.len()).map(Self::edge_coordinate).collect()
    }

    /// Length of edge `index` as an affine expression (a constant when concrete).
    pub fn length_expr(&self, index: usize) -> AffineExpr {
        match &self.edges[index].length {
            Length::Concrete(q) => AffineExpr::constant(q.clone()),
            Length::Symbolic => AffineExpr::var(Self::edge_coordinate(index)),
        }
    }

    pub fn symbolic(&self) -> Tree {
        let mut t = self.clone();
        for e in &mut t.edges {
            e.length = Length::Symbolic;
        }
        t
    }

    pub fn with_lengths(&self, lengths: &[Rational]) -> Result<Tree> {
        if lengths.len() != self.edges.len() {
            return Err(Error::LengthMismatch { expected: self.edges.len(), found: lengths.len() });
        }
        let mut t = self.clone();
        for (e, q) in t.edges.iter_mut().zip(lengths) {
            e.length = Length::Concrete(q.clone());
        }
        Ok(t)
    }

    /// Evaluates symbolic lengths at a point of the cone chart.
    pub fn at_point(&self, point: &BTreeMap<String, Rational>) -> Result<Tree> {
        let lengths = (0..self.edges.len())
            .map(|i| {
                self.length_expr(i)
                    .eval(point)
                    .ok_or_else(|| Error::UndeclaredCoordinate(Self::edge_coordinate(i)))
            })
            .collect::<Result<Vec<_>>>()?;
        self.with_lengths(&lengths)
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        if self.vertices.is_empty() {
            violations.push(Violation::NoVertices);
        }
        let mut index: HashMap<VertexId, usize> = HashMap::new();
        for &v in &self.vertices {
            if index.insert(v, index.len()).is_some() {
                violations.push(Violation::DuplicateVertex { vertex: v });
            }
        }
        let mut uf = UnionFind((0..index.len()).collect());
        for (i, e) in self.edges.iter().enumerate() {
            let mut known = true;
            for &end in &e.ends {
                if !index.contains_key(&end) {
                    violations.push(Violation::UnknownEndpoint { edge: i, vertex: end });
                    known = false;
                }
            }
            if known && !uf.union(index[&e.ends[0]], index[&e.ends[1]]) {
                violations.push(Violation::Cycle { edge: i });
            }
            if let Length::Concrete(q) = &e.length {
                if q.is_negative() {
                    violations.push(Violation::NegativeLength { edge: i });
                } else if q.is_zero() {
                    violations.push(Violation::ZeroLength { edge: i });
                }
            }
        }
        let components: BTreeSet<usize> = (0..index.len()).map(|i| uf.find(i)).collect();
        if components.len() > 1 {
            violations.push(Violation::Disconnected { components: components.len() });
        }

        let n = self.legs.len() as u32;
        let mut seen = BTreeSet::new();
        for leg in &self.legs {
            if !seen.insert(leg.label) {
                violations.push(Violation::DuplicateLeg { label: leg.label });
            }
            if leg.label == 0 || leg.label > n {
                violations.push(Violation::LegLabelOutOfRange { label: leg.label });
            }
            if !index.contains_key(&leg.at) {
                violations.push(Violation::LegAtUnknownVertex { label: leg.label, vertex: leg.at });
            }
        }
        for label in 1..=n {
            if !seen.contains(&label) {
                violations.push(Violation::MissingLeg { label });
            }
        }
        ValidationReport { violations }
    }

    /// Removes edge `index` and merges its endpoints into `ends[0]`.
    pub fn contract_edge(&self, index: usize) -> Result<Tree> {
        let edge = self.edges.get(index).ok_or(Error::NoSuchEdge(index))?;
        self.contract_edge_keeping(index, edge.ends[0])
    }

    /// Like [`Tree::contract_edge`], naming the surviving endpoint.
    pub fn contract_edge_keeping(&self, index: usize, keep: VertexId) -> Result<Tree> {
        let edge = self.edges.get(index).ok_or(Error::NoSuchEdge(index))?;
        if !edge.ends.contains(&keep) {
            return Err(Error::NoSuchVertex(keep.0));
        }
        let gone = edge.other(keep);
        let relabel = |v: VertexId| if v == gone { keep } else { v };
        let vertices = self.vertices.iter().copied().filter(|&v| v != gone || gone == keep).collect();
        let edges = self
            .edges
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != index)
            .map(|(_, e)| Edge { ends: [relabel(e.ends[0]), relabel(e.ends[1])], length: e.length.clone() })
            .collect();
        let legs = self
            .legs
            .iter()
            .map(|l| Leg { label: l.label, at: relabel(l.at) })
            .collect();
        Ok(Tree::from_parts(vertices, edges, legs))
    }

    fn fresh_vertex(&self) -> VertexId {
        VertexId(self.vertices.iter().map(|v| v.0 + 1).max().unwrap_or(0))
    }

    /// Splits edge `index` by a new 2-valent vertex. The piece touching
    /// `ends[0]` keeps index `index`; the other piece is appended.
    pub fn subdivide_edge(&self, index: usize, first: Length, second: Length) -> Result<(Tree, VertexId)> {
        let edge = self.edges.get(index).ok_or(Error::NoSuchEdge(index))?.clone();
        let mid = self.fresh_vertex();
        let mut t = self.clone();
        t.vertices.push(mid);
        t.edges[index] = Edge { ends: [edge.ends[0], mid], length: first };
        t.edges.push(Edge { ends: [mid, edge.ends[1]], length: second });
        Ok((t, mid))
    }

    /// Hangs a new leafless vertex off `at` by an edge of the given length.
    pub fn attach_vertex(&self, at: VertexId, length: Length) -> Result<(Tree, VertexId)> {
        if !self.has_vertex(at) {
            return Err(Error::NoSuchVertex(at.0));
        }
        let new = self.fresh_vertex();
        let mut t = self.clone();
        t.vertices.push(new);
        t.edges.push(Edge { ends: [at, new], length });
        Ok((t, new))
    }

    /// Moves leg `label` onto a new vertex joined to its old attachment vertex.
    pub fn sprout_leg(&self, label: u32, length: Length) -> Result<(Tree, VertexId)> {
        let at = self.leg(label).ok_or(Error::NoSuchLeg(label))?.at;
        let (mut t, new) = self.attach_vertex(at, length)?;
        for leg in &mut t.legs {
            if leg.label == label {
                leg.at = new;
            }
        }
        Ok((t, new))
    }

    /// Removes the 2-valent legless vertex `v`, joining its two edges into
    /// one whose length is the sum. The joined edge takes the smaller index
    /// and runs from the far end of that edge to the far end of the other.
    pub(crate) fn smooth_vertex(&self, v: VertexId) -> Result<Tree> {
        let inc = self.incident(v);
        if inc.len() != 2 || !self.legs_at(v).is_empty() {
            return Err(Error::NoSuchVertex(v.0));
        }
        let (first, a) = inc[0].min(inc[1]);
        let (second, b) = inc[0].max(inc[1]);
        let length = match (&self.edges[first].length, &self.edges[second].length) {
            (Length::Concrete(x), Length::Concrete(y)) => Length::Concrete(x + y),
            _ => Length::Symbolic,
        };
        let mut t = self.clone();
        t.edges[first] = Edge { ends: [a, b], length };
        t.edges.remove(second);
        t.vertices.retain(|&w| w != v);
        Ok(t)
    }
}
