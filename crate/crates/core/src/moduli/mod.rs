//! Moduli cone complexes of genus-0 tropical curves and of tropical maps to
//! the tropicalized logarithmic torus (one free real coordinate per target
//! direction).
//!
//! Each cone is indexed by a stable combinatorial type. Its chart has one
//! nonnegative coordinate `l_e{k}` per internal edge and, for map moduli, a
//! free translation coordinate `c` (or `c1, ..., cm` for `m` target
//! directions) recording the value of the map at the vertex carrying leg 1.

mod point;
mod product;
mod self_map;

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::affine::AffineExpr;
use crate::error::{Error, Result};
use crate::pl_function::{extend_from_leg_slopes, ContactOrder, PLFunction};
use crate::subdivision::feasibility::{Constraint, Polyhedron};
use crate::tropical_curve::{
    canonical_key, canonical_layout, enumerate_tree_types, Tree, TypeFilter, VertexId,
};

pub use point::{splitting_at_leg, splitting_expr, stabilize, TropicalMapPoint};
pub use product::{
    product_decomposition, ConeCertificate, IsomorphismReport, SplittingWitness, WitnessOutcome,
    WitnessPoint,
};
pub use self_map::{classify_self_map, SelfMapNormalForm};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoordSign {
    Nonneg,
    Free,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Coordinate {
    pub name: String,
    pub sign: CoordSign,
}

impl Coordinate {
    pub fn nonneg(name: impl Into<String>) -> Self {
        Self { name: name.into(), sign: CoordSign::Nonneg }
    }

    pub fn free(name: impl Into<String>) -> Self {
        Self { name: name.into(), sign: CoordSign::Free }
    }
}

/// A rational polyhedral cone (possibly with lineality) in named coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cone {
    name: String,
    coords: Vec<Coordinate>,
    /// Functionals required to be `>= 0`.
    facets: Vec<AffineExpr>,
    dim: usize,
}

impl Cone {
    /// Cone cut out by the sign conditions on `coords` plus `extra` inequalities.
    pub fn new(name: impl Into<String>, coords: Vec<Coordinate>, extra: Vec<AffineExpr>) -> Result<Self> {
        let mut facets: Vec<AffineExpr> = coords
            .iter()
            .filter(|c| c.sign == CoordSign::Nonneg)
            .map(|c| AffineExpr::var(c.name.clone()))
            .collect();
        facets.extend(extra);
        let mut cone = Self { name: name.into(), coords, facets, dim: 0 };
        cone.dim = cone.polyhedron()?.dimension().unwrap_or(0);
        Ok(cone)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn coords(&self) -> &[Coordinate] {
        &self.coords
    }

    pub fn coord_names(&self) -> Vec<String> {
        self.coords.iter().map(|c| c.name.clone()).collect()
    }

    pub fn facets(&self) -> &[AffineExpr] {
        &self.facets
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn polyhedron(&self) -> Result<Polyhedron> {
        Polyhedron::new(
            self.coord_names(),
            self.facets.iter().cloned().map(Constraint::ge).collect(),
        )
    }
}

/// One cone of a moduli complex together with its universal family.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuliCone {
    pub type_key: String,
    /// Canonical representative with symbolic lengths.
    pub tree: Tree,
    #[serde(flatten)]
    pub cone: Cone,
    /// Universal map, one symbolic function per target direction (empty for curve moduli).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub maps: Vec<PLFunction>,
}

/// Inclusion of the cone `face` into `cone` as the facet `contracted = 0`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FaceMap {
    pub face: String,
    pub cone: String,
    pub contracted: String,
    /// `(coordinate of face, coordinate of cone)` pairs.
    pub coords: Vec<(String, String)>,
}

impl FaceMap {
    /// Renaming from the larger cone's coordinates to the face's.
    pub fn to_face(&self) -> BTreeMap<String, String> {
        self.coords.iter().map(|(f, c)| (c.clone(), f.clone())).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeComplex {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub contact: Vec<ContactOrder>,
    pub cones: Vec<ModuliCone>,
    pub face_maps: Vec<FaceMap>,
}

impl ConeComplex {
    pub fn empty(n: usize, contact: Vec<ContactOrder>) -> Self {
        Self { n, contact, cones: Vec::new(), face_maps: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.cones.is_empty()
    }

    pub fn cone(&self, key: &str) -> Option<&ModuliCone> {
        self.cones
            .binary_search_by(|c| c.type_key.as_str().cmp(key))
            .ok()
            .map(|i| &self.cones[i])
    }

    /// Cones that are not a proper face of another cone.
    pub fn maximal_cones(&self) -> Vec<&ModuliCone> {
        let faces: BTreeSet<&str> = self.face_maps.iter().map(|f| f.face.as_str()).collect();
        self.cones.iter().filter(|c| !faces.contains(c.type_key.as_str())).collect()
    }

    pub fn max_dim(&self) -> Option<usize> {
        self.cones.iter().map(|c| c.cone.dim()).max()
    }

    pub fn target_dim(&self) -> usize {
        self.contact.len()
    }
}

/// Names of the free translation coordinates for `m` target directions.
pub fn translation_coords(m: usize) -> Vec<String> {
    match m {
        0 => Vec::new(),
        1 => vec!["c".to_string()],
        _ => (1..=m).map(|j| format!("c{j}")).collect(),
    }
}

/// The cone complex of stable genus-0 tropical curves with `n` legs.
pub fn build_moduli_complex(n: usize) -> Result<ConeComplex> {
    if n < 3 {
        return Err(Error::UnstableRange { n });
    }
    build(n, &[])
}

/// The cone complex of stable tropical maps with contact order `sigma`.
pub fn build_map_moduli(n: usize, sigma: &ContactOrder) -> Result<ConeComplex> {
    build_map_moduli_multi(n, std::slice::from_ref(sigma))
}

/// Map moduli for a target with `contact.len()` directions, one contact order each.
///
/// For `n <= 1` there are no stable maps and the complex is empty; `n = 2`
/// is rejected with [`Error::TwoPointed`] (see [`classify_self_map`]).
pub fn build_map_moduli_multi(n: usize, contact: &[ContactOrder]) -> Result<ConeComplex> {
    for sigma in contact {
        if sigma.n() != n {
            return Err(Error::LengthMismatch { expected: n, found: sigma.n() });
        }
        if sigma.sum() != 0 {
            return Err(Error::NonZeroSum { sum: sigma.sum() });
        }
    }
    match n {
        0 | 1 => Ok(ConeComplex::empty(n, contact.to_vec())),
        2 => Err(Error::TwoPointed),
        _ => build(n, contact),
    }
}

fn build(n: usize, contact: &[ContactOrder]) -> Result<ConeComplex> {
    let types = enumerate_tree_types(n, TypeFilter::Stable)?;
    let translation = translation_coords(contact.len());
    let cones = types
        .par_iter()
        .map(|ty| {
            let tree = ty.tree().clone();
            let mut coords: Vec<Coordinate> =
                tree.edge_coordinates().into_iter().map(Coordinate::nonneg).collect();
            coords.extend(translation.iter().cloned().map(Coordinate::free));
            let maps = contact
                .iter()
                .zip(&translation)
                .map(|(sigma, c)| extend_from_leg_slopes(&tree, sigma, VertexId(0), AffineExpr::var(c.clone())))
                .collect::<Result<Vec<_>>>()?;
            Ok(ModuliCone {
                type_key: ty.key().to_string(),
                cone: Cone::new(ty.key(), coords, Vec::new())?,
                tree,
                maps,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut face_maps: Vec<FaceMap> = cones
        .par_iter()
        .flat_map_iter(|mc| face_maps_of(mc, &translation))
        .collect();
    face_maps.sort();
    let complex = ConeComplex { n, contact: contact.to_vec(), cones, face_maps };
    debug_assert!(complex.face_maps.iter().all(|f| complex.cone(&f.face).is_some()));
    Ok(complex)
}

fn face_maps_of(mc: &ModuliCone, translation: &[String]) -> Vec<FaceMap> {
    let tree = &mc.tree;
    let edges = tree.edges().len();
    (0..edges)
        .map(|e| {
            let contracted = tree.contract_edge(e).expect("edge index in range");
            let (_, edge_map) = canonical_layout(&contracted);
            let mut coords: Vec<(String, String)> = (0..edges)
                .filter(|&j| j != e)
                .map(|j| {
                    let shifted = if j < e { j } else { j - 1 };
                    (Tree::edge_coordinate(edge_map[shifted]), Tree::edge_coordinate(j))
                })
                .collect();
            coords.extend(translation.iter().map(|c| (c.clone(), c.clone())));
            coords.sort();
            FaceMap {
                face: canonical_key(&contracted),
                cone: mc.type_key.clone(),
                contracted: Tree::edge_coordinate(e),
                coords,
            }
        })
        .collect()
}
