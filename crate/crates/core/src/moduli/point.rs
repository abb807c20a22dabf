use serde::{Deserialize, Serialize};

use crate::affine::AffineExpr;
use crate::error::{Error, Result};
use crate::pl_function::{extend_from_leg_slopes, ContactOrder, PLFunction};
use crate::rational::Rational;
use crate::tropical_curve::{Tree, VertexId};

/// A concrete tropical map: a metric tree with one balanced function per
/// target direction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TropicalMapPoint {
    tree: Tree,
    functions: Vec<PLFunction>,
    contact: Vec<ContactOrder>,
}

impl TropicalMapPoint {
    pub fn new(tree: Tree, functions: Vec<PLFunction>) -> Result<Self> {
        let report = tree.validate();
        if !report.is_valid() {
            return Err(Error::InvalidTree(report));
        }
        if !tree.is_concrete() {
            return Err(Error::InvalidFunction("map points need concrete edge lengths".into()));
        }
        for f in &functions {
            if f.tree() != &tree {
                return Err(Error::InvalidFunction("function lives on a different tree".into()));
            }
            if !f.is_balanced() {
                return Err(Error::InvalidFunction("function is not balanced".into()));
            }
            if !f.base_value().is_constant() {
                return Err(Error::InvalidFunction("map points need concrete values".into()));
            }
        }
        let contact = functions.iter().map(PLFunction::contact_order).collect();
        Ok(Self { tree, functions, contact })
    }

    /// The map with contact orders `contact` and values `values` at `basepoint`.
    pub fn from_contact(
        tree: Tree,
        contact: &[ContactOrder],
        basepoint: VertexId,
        values: &[Rational],
    ) -> Result<Self> {
        if contact.len() != values.len() {
            return Err(Error::LengthMismatch { expected: contact.len(), found: values.len() });
        }
        let functions = contact
            .iter()
            .zip(values)
            .map(|(sigma, v)| extend_from_leg_slopes(&tree, sigma, basepoint, AffineExpr::constant(v.clone())))
            .collect::<Result<Vec<_>>>()?;
        Self::new(tree, functions)
    }

    pub fn tree(&self) -> &Tree {
        &self.tree
    }

    pub fn functions(&self) -> &[PLFunction] {
        &self.functions
    }

    pub fn contact(&self) -> &[ContactOrder] {
        &self.contact
    }

    pub fn target_dim(&self) -> usize {
        self.functions.len()
    }

    fn constant_near(&self, v: VertexId) -> bool {
        self.functions.iter().all(|f| {
            self.tree.incident(v).iter().all(|&(e, _)| f.slope(e, v) == 0)
                && self.tree.legs_at(v).iter().all(|l| f.leg_slopes()[l] == 0)
        })
    }

    /// Vertex with fewer than three special points near which every function is constant.
    fn unstable_vertex(&self) -> Option<VertexId> {
        self.tree.vertices().iter().copied().find(|&v| {
            let edges = self.tree.incident(v).len();
            self.tree.valence(v) < 3 && edges >= 1 && (edges == 1 || self.tree.legs_at(v).is_empty())
                && self.constant_near(v)
        })
    }

    fn remove_vertex(&self, v: VertexId) -> Result<TropicalMapPoint> {
        let inc = self.tree.incident(v);
        let keep = inc[0].1;
        let mut functions = Vec::with_capacity(self.functions.len());
        let tree = if inc.len() == 1 {
            let (e, _) = inc[0];
            let tree = self.tree.contract_edge_keeping(e, keep)?;
            for f in &self.functions {
                let f = if f.basepoint() == v { f.rebased(keep)? } else { f.clone() };
                let (_, base, value, mut slopes, legs) = f.into_parts();
                slopes.remove(e);
                functions.push(PLFunction::new(tree.clone(), base, value, slopes, legs)?);
            }
            tree
        } else {
            let (first, a) = inc[0].min(inc[1]);
            let (second, _) = inc[0].max(inc[1]);
            let tree = self.tree.smooth_vertex(v)?;
            for f in &self.functions {
                let through = f.slope(first, a);
                let f = if f.basepoint() == v { f.rebased(a)? } else { f.clone() };
                let (_, base, value, mut slopes, legs) = f.into_parts();
                slopes[first] = through;
                slopes.remove(second);
                functions.push(PLFunction::new(tree.clone(), base, value, slopes, legs)?);
            }
            tree
        };
        TropicalMapPoint::new(tree, functions)
    }
}

/// Symbolic value of `f` at the vertex carrying leg `leg`.
pub fn splitting_expr(f: &PLFunction, leg: u32) -> Result<AffineExpr> {
    let at = f.tree().leg(leg).ok_or(Error::NoSuchLeg(leg))?.at;
    f.value_at(at)
}

/// Value of a one-dimensional map at the attachment vertex of leg `leg`.
pub fn splitting_at_leg(p: &TropicalMapPoint, leg: u32) -> Result<Rational> {
    if p.target_dim() != 1 {
        return Err(Error::TargetDimension { expected: 1, found: p.target_dim() });
    }
    let value = splitting_expr(&p.functions[0], leg)?;
    debug_assert!(value.is_constant());
    Ok(value.constant_term().clone())
}

/// Contracts, one at a time, every vertex with fewer than three special
/// points on which the map is locally constant: legless leaves are removed,
/// 2-valent vertices with one leg are absorbed into their neighbour, and
/// 2-valent legless vertices are smoothed (their edge lengths add).
pub fn stabilize(p: &TropicalMapPoint) -> TropicalMapPoint {
    let mut current = p.clone();
    while let Some(v) = current.unstable_vertex() {
        current = current
            .remove_vertex(v)
            .expect("removing a locally constant unstable vertex keeps the point valid");
    }
    debug_assert!(current.functions.iter().all(|f| f.is_balanced()));
    current
}
