//! Integer-sloped piecewise-linear functions on tropical trees.
//!
//! Slopes are outgoing: traversing an edge `v -> w` of length `t` the function
//! grows by `slope(v -> w) * t`, and a leg's slope is measured towards
//! infinity, so leg slopes are exactly the contact orders.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::ops::Add;

use serde::{Deserialize, Serialize};

use crate::affine::AffineExpr;
use crate::error::{Error, Result};
use crate::rational::int;
use crate::tropical_curve::{Tree, VertexId};

/// Leg slopes indexed by leg label (entry `i` belongs to leg `i + 1`).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ContactOrder {
    slopes: Vec<i64>,
}

impl ContactOrder {
    pub fn new(slopes: Vec<i64>) -> Self {
        Self { slopes }
    }

    pub fn zero(n: usize) -> Self {
        Self { slopes: vec![0; n] }
    }

    pub fn n(&self) -> usize {
        self.slopes.len()
    }

    pub fn slopes(&self) -> &[i64] {
        &self.slopes
    }

    /// Slope on leg `label` (1-based).
    pub fn slope(&self, label: u32) -> Option<i64> {
        self.slopes.get((label as usize).checked_sub(1)?).copied()
    }

    pub fn sum(&self) -> i64 {
        self.slopes.iter().sum()
    }

    /// Whether this lies in the zero-sum subgroup.
    pub fn is_balanced_subgroup(&self) -> bool {
        self.sum() == 0
    }
}

impl Add for &ContactOrder {
    type Output = ContactOrder;
    fn add(self, rhs: &ContactOrder) -> ContactOrder {
        assert_eq!(self.n(), rhs.n(), "contact orders of different length");
        ContactOrder::new(self.slopes.iter().zip(&rhs.slopes).map(|(a, b)| a + b).collect())
    }
}

impl From<Vec<i64>> for ContactOrder {
    fn from(slopes: Vec<i64>) -> Self {
        Self::new(slopes)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Multidegree {
    degrees: BTreeMap<VertexId, i64>,
}

impl Multidegree {
    pub fn degree(&self, v: VertexId) -> i64 {
        self.degrees.get(&v).copied().unwrap_or(0)
    }

    pub fn degrees(&self) -> &BTreeMap<VertexId, i64> {
        &self.degrees
    }

    pub fn total(&self) -> i64 {
        self.degrees.values().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.degrees.values().all(|&d| d == 0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PLFunctionJson", into = "PLFunctionJson")]
pub struct PLFunction {
    tree: Tree,
    basepoint: VertexId,
    base_value: AffineExpr,
    /// Slope along `ends[0] -> ends[1]` of each edge.
    edge_slopes: Vec<i64>,
    leg_slopes: BTreeMap<u32, i64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct EdgeSlope {
    from: VertexId,
    to: VertexId,
    slope: i64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct PLFunctionJson {
    #[serde(flatten)]
    tree: Tree,
    basepoint: VertexId,
    base_value: AffineExpr,
    edge_slopes: Vec<EdgeSlope>,
    leg_slopes: BTreeMap<String, i64>,
}

impl From<PLFunction> for PLFunctionJson {
    fn from(f: PLFunction) -> Self {
        let edge_slopes = f
            .tree
            .edges()
            .iter()
            .zip(&f.edge_slopes)
            .map(|(e, &slope)| EdgeSlope { from: e.ends[0], to: e.ends[1], slope })
            .collect();
        let leg_slopes = f.leg_slopes.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        Self { tree: f.tree, basepoint: f.basepoint, base_value: f.base_value, edge_slopes, leg_slopes }
    }
}

impl TryFrom<PLFunctionJson> for PLFunction {
    type Error = Error;

    fn try_from(j: PLFunctionJson) -> Result<Self> {
        let mut edge_slopes = Vec::with_capacity(j.tree.edges().len());
        for (i, e) in j.tree.edges().iter().enumerate() {
            let mut slope = None;
            for s in &j.edge_slopes {
                let oriented = if [s.from, s.to] == e.ends {
                    s.slope
                } else if [s.to, s.from] == e.ends {
                    -s.slope
                } else {
                    continue;
                };
                match slope {
                    Some(prev) if prev != oriented => {
                        return Err(Error::InvalidFunction(format!(
                            "slopes on edge {i} are not antisymmetric"
                        )))
                    }
                    _ => slope = Some(oriented),
                }
            }
            edge_slopes.push(slope.ok_or_else(|| {
                Error::InvalidFunction(format!("edge {i} has no slope"))
            })?);
        }
        let leg_slopes = j
            .leg_slopes
            .into_iter()
            .map(|(k, v)| {
                k.parse::<u32>()
                    .map(|label| (label, v))
                    .map_err(|_| Error::InvalidFunction(format!("bad leg label `{k}`")))
            })
            .collect::<Result<_>>()?;
        PLFunction::new(j.tree, j.basepoint, j.base_value, edge_slopes, leg_slopes)
    }
}

impl PLFunction {
    pub fn new(
        tree: Tree,
        basepoint: VertexId,
        base_value: AffineExpr,
        edge_slopes: Vec<i64>,
        leg_slopes: BTreeMap<u32, i64>,
    ) -> Result<Self> {
        if !tree.has_vertex(basepoint) {
            return Err(Error::NoSuchVertex(basepoint.0));
        }
        if edge_slopes.len() != tree.edges().len() {
            return Err(Error::LengthMismatch { expected: tree.edges().len(), found: edge_slopes.len() });
        }
        for leg in tree.legs() {
            if !leg_slopes.contains_key(&leg.label) {
                return Err(Error::InvalidFunction(format!("leg {} has no slope", leg.label)));
            }
        }
        if let Some(extra) = leg_slopes.keys().find(|&&l| tree.leg(l).is_none()) {
            return Err(Error::NoSuchLeg(*extra));
        }
        Ok(Self { tree, basepoint, base_value, edge_slopes, leg_slopes })
    }

    /// The function with all slopes zero and value `value` everywhere.
    pub fn constant(tree: Tree, basepoint: VertexId, value: AffineExpr) -> Result<Self> {
        let legs = tree.legs().iter().map(|l| (l.label, 0)).collect();
        let edges = vec![0; tree.edges().len()];
        Self::new(tree, basepoint, value, edges, legs)
    }

    pub fn tree(&self) -> &Tree {
        &self.tree
    }

    pub fn basepoint(&self) -> VertexId {
        self.basepoint
    }

    pub fn base_value(&self) -> &AffineExpr {
        &self.base_value
    }

    /// Raw slopes, edge `i` oriented `ends[0] -> ends[1]`.
    pub fn edge_slopes(&self) -> &[i64] {
        &self.edge_slopes
    }

    pub fn leg_slopes(&self) -> &BTreeMap<u32, i64> {
        &self.leg_slopes
    }

    /// Slope of edge `index` leaving `from`.
    pub fn slope(&self, index: usize, from: VertexId) -> i64 {
        let s = self.edge_slopes[index];
        if self.tree.edges()[index].ends[0] == from {
            s
        } else {
            -s
        }
    }

    pub fn contact_order(&self) -> ContactOrder {
        ContactOrder::new(self.leg_slopes.values().copied().collect())
    }

    /// Values at all vertices, propagated from the basepoint.
    pub fn vertex_values(&self) -> BTreeMap<VertexId, AffineExpr> {
        let mut values = BTreeMap::new();
        values.insert(self.basepoint, self.base_value.clone());
        let mut queue = VecDeque::from([self.basepoint]);
        while let Some(v) = queue.pop_front() {
            for (e, w) in self.tree.incident(v) {
                if values.contains_key(&w) {
                    continue;
                }
                let step = self.tree.length_expr(e).scale(&int(self.slope(e, v)));
                let next = &values[&v] + &step;
                values.insert(w, next);
                queue.push_back(w);
            }
        }
        values
    }

    pub fn value_at(&self, v: VertexId) -> Result<AffineExpr> {
        self.vertex_values().remove(&v).ok_or(Error::NoSuchVertex(v.0))
    }

    /// Sum of outgoing slopes over edges and legs at each vertex.
    pub fn multidegree(&self) -> Multidegree {
        let mut degrees: BTreeMap<VertexId, i64> =
            self.tree.vertices().iter().map(|&v| (v, 0)).collect();
        for (e, &s) in self.tree.edges().iter().zip(&self.edge_slopes) {
            *degrees.entry(e.ends[0]).or_default() += s;
            *degrees.entry(e.ends[1]).or_default() -= s;
        }
        for leg in self.tree.legs() {
            *degrees.entry(leg.at).or_default() += self.leg_slopes[&leg.label];
        }
        Multidegree { degrees }
    }

    pub fn is_balanced(&self) -> bool {
        self.multidegree().is_zero()
    }

    /// Pointwise sum; both functions must live on the same tree and basepoint.
    pub fn checked_add(&self, other: &PLFunction) -> Result<PLFunction> {
        if self.tree != other.tree || self.basepoint != other.basepoint {
            return Err(Error::InvalidFunction("summands live on different trees".into()));
        }
        let edge_slopes = self.edge_slopes.iter().zip(&other.edge_slopes).map(|(a, b)| a + b).collect();
        let leg_slopes = self
            .leg_slopes
            .iter()
            .map(|(k, v)| (*k, v + other.leg_slopes[k]))
            .collect();
        PLFunction::new(
            self.tree.clone(),
            self.basepoint,
            &self.base_value + &other.base_value,
            edge_slopes,
            leg_slopes,
        )
    }

    /// Same function described from another basepoint.
    pub fn rebased(&self, basepoint: VertexId) -> Result<PLFunction> {
        let value = self.value_at(basepoint)?;
        Ok(PLFunction { basepoint, base_value: value, ..self.clone() })
    }

    pub(crate) fn into_parts(self) -> (Tree, VertexId, AffineExpr, Vec<i64>, BTreeMap<u32, i64>) {
        (self.tree, self.basepoint, self.base_value, self.edge_slopes, self.leg_slopes)
    }
}

/// The unique balanced function on `tree` with leg slopes `sigma` and value
/// `base_value` at `basepoint`.
///
/// The slope of an edge `v -> w` is the sum of `sigma` over the legs on the
/// `w` side of the edge, computed in one pass over the tree rooted at the
/// basepoint.
pub fn extend_from_leg_slopes(
    tree: &Tree,
    sigma: &ContactOrder,
    basepoint: VertexId,
    base_value: AffineExpr,
) -> Result<PLFunction> {
    if sigma.n() != tree.num_legs() {
        return Err(Error::LengthMismatch { expected: tree.num_legs(), found: sigma.n() });
    }
    let sum = sigma.sum();
    if sum != 0 {
        return Err(Error::NonZeroSum { sum });
    }
    if !tree.has_vertex(basepoint) {
        return Err(Error::NoSuchVertex(basepoint.0));
    }
    let mut leg_slopes = BTreeMap::new();
    let mut below: HashMap<VertexId, i64> = tree.vertices().iter().map(|&v| (v, 0)).collect();
    for leg in tree.legs() {
        let s = sigma.slope(leg.label).ok_or(Error::NoSuchLeg(leg.label))?;
        leg_slopes.insert(leg.label, s);
        *below.get_mut(&leg.at).ok_or(Error::NoSuchVertex(leg.at.0))? += s;
    }

    // Preorder from the basepoint, remembering the edge to the parent.
    let mut order: Vec<(VertexId, Option<(usize, VertexId)>)> = Vec::new();
    let mut seen = std::collections::HashSet::from([basepoint]);
    let mut stack = vec![(basepoint, None)];
    while let Some((v, via)) = stack.pop() {
        order.push((v, via));
        for (e, w) in tree.incident(v) {
            if seen.insert(w) {
                stack.push((w, Some((e, v))));
            }
        }
    }
    if order.len() != tree.vertices().len() {
        return Err(Error::InvalidTree(tree.validate()));
    }

    let mut edge_slopes = vec![0i64; tree.edges().len()];
    for &(v, via) in order.iter().rev() {
        if let Some((e, parent)) = via {
            let subtotal = below[&v];
            edge_slopes[e] = if tree.edges()[e].ends[0] == parent { subtotal } else { -subtotal };
            *below.get_mut(&parent).expect("parent is a vertex") += subtotal;
        }
    }
    PLFunction::new(tree.clone(), basepoint, base_value, edge_slopes, leg_slopes)
}
