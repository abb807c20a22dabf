//! Subdivisions of map-moduli cones pulled back from a complete fan.
//!
//! A point of a cone determines the image of every vertex of the curve in
//! the target; the cone is stratified by which fan cone's relative interior
//! each vertex image lies in. The closures of the full-dimensional strata are
//! the maximal cells.

pub mod fan;
pub mod feasibility;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::affine::AffineExpr;
use crate::error::{Error, Result};
use crate::moduli::{build_map_moduli_multi, Cone, ConeComplex};
use crate::pl_function::ContactOrder;
use crate::rational::{self, Rational};
use crate::tropical_curve::VertexId;
use fan::{validate_fan, Fan};
use feasibility::{Constraint, Polyhedron};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexAssignment {
    pub vertex: VertexId,
    /// Index into [`Fan::cones`].
    pub cone: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubdividedCell {
    pub parent: String,
    pub assignment: Vec<VertexAssignment>,
    /// Irredundant inequalities `>= 0` in the parent's coordinates.
    pub halfspaces: Vec<AffineExpr>,
    /// A point in the relative interior of the cell.
    #[serde(with = "rational::serde_point")]
    pub witness: BTreeMap<String, Rational>,
    pub dim: usize,
}

impl SubdividedCell {
    pub fn polyhedron(&self, coords: &[String]) -> Result<Polyhedron> {
        Polyhedron::new(coords.to_vec(), self.halfspaces.iter().cloned().map(Constraint::ge).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeSubdivision {
    pub parent: String,
    pub coords: Vec<String>,
    pub cells: Vec<SubdividedCell>,
    /// Number of nonempty strata of each dimension `0..=dim`.
    pub f_vector: Vec<usize>,
}

fn ensure_complete(fan: &Fan) -> Result<()> {
    let report = validate_fan(fan)?;
    let structural = report
        .violations
        .iter()
        .any(|v| !matches!(v, fan::FanViolation::NotComplete { .. }));
    if structural {
        return Err(Error::InvalidFan(report));
    }
    if !report.complete {
        return Err(Error::IncompleteFan);
    }
    Ok(())
}

/// Subdivides `parent` by the fan `fan`, given the image of each vertex as
/// functionals `(vertex, target coordinate) -> expression` in the parent's
/// coordinates.
pub fn subdivide_cone(
    parent: &Cone,
    vertex_functionals: &BTreeMap<(VertexId, usize), AffineExpr>,
    fan: &Fan,
) -> Result<ConeSubdivision> {
    ensure_complete(fan)?;
    subdivide_checked(parent, vertex_functionals, fan)
}

fn subdivide_checked(
    parent: &Cone,
    vertex_functionals: &BTreeMap<(VertexId, usize), AffineExpr>,
    fan: &Fan,
) -> Result<ConeSubdivision> {
    let m = fan.dim();
    let mut images: BTreeMap<VertexId, Vec<Option<AffineExpr>>> = BTreeMap::new();
    for ((v, j), e) in vertex_functionals {
        if *j >= m {
            return Err(Error::LengthMismatch { expected: m, found: j + 1 });
        }
        images.entry(*v).or_insert_with(|| vec![None; m])[*j] = Some(e.clone());
    }
    let images: Vec<(VertexId, Vec<AffineExpr>)> = images
        .into_iter()
        .map(|(v, exprs)| {
            let found = exprs.iter().filter(|e| e.is_some()).count();
            let exprs: Option<Vec<AffineExpr>> = exprs.into_iter().collect();
            exprs.map(|e| (v, e)).ok_or(Error::LengthMismatch { expected: m, found })
        })
        .collect::<Result<_>>()?;

    let base = parent.polyhedron()?;
    let mut search = Search {
        parent,
        fan,
        images: &images,
        f_vector: vec![0; parent.coords().len() + 1],
        cells: Vec::new(),
    };
    search.descend(&base, &mut Vec::new())?;
    let Search { f_vector, cells, .. } = search;
    let f_vector = f_vector[..=parent.dim()].to_vec();
    Ok(ConeSubdivision { parent: parent.name().to_string(), coords: parent.coord_names(), cells, f_vector })
}

struct Search<'a> {
    parent: &'a Cone,
    fan: &'a Fan,
    images: &'a [(VertexId, Vec<AffineExpr>)],
    f_vector: Vec<usize>,
    cells: Vec<SubdividedCell>,
}

impl Search<'_> {
    fn descend(&mut self, stratum: &Polyhedron, assignment: &mut Vec<VertexAssignment>) -> Result<()> {
        let depth = assignment.len();
        if depth == self.images.len() {
            return self.record(stratum, assignment);
        }
        let (vertex, image) = &self.images[depth];
        for (k, cone) in self.fan.cones().iter().enumerate() {
            let next = stratum.with(cone.relint_constraints(image));
            if next.is_empty() {
                continue;
            }
            assignment.push(VertexAssignment { vertex: *vertex, cone: k });
            self.descend(&next, assignment)?;
            assignment.pop();
        }
        Ok(())
    }

    fn record(&mut self, stratum: &Polyhedron, assignment: &[VertexAssignment]) -> Result<()> {
        let Some(dim) = stratum.dimension() else { return Ok(()) };
        self.f_vector[dim] += 1;
        if dim != self.parent.dim() {
            return Ok(());
        }
        let witness = stratum.feasibility().witness().cloned().expect("nonempty stratum");
        let mut halfspaces: Vec<AffineExpr> = Vec::new();
        for c in stratum.closure().without_redundancy().constraints() {
            let e = c.expr.normalized();
            match c.relation {
                feasibility::Relation::Eq => {
                    halfspaces.push(e.clone());
                    halfspaces.push(-e);
                }
                _ => halfspaces.push(e),
            }
        }
        halfspaces.dedup();
        self.cells.push(SubdividedCell {
            parent: self.parent.name().to_string(),
            assignment: assignment.to_vec(),
            halfspaces,
            witness,
            dim,
        });
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubdivisionStatistics {
    pub cells_per_cone: BTreeMap<String, usize>,
    pub f_vectors: BTreeMap<String, Vec<usize>>,
    pub total_cells: usize,
    /// Cells of the maximal cones, i.e. the maximal cells of the subdivided complex.
    pub total_maximal_cells: usize,
    pub face_consistent: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubdividedComplex {
    pub complex: ConeComplex,
    pub subdivisions: Vec<ConeSubdivision>,
    pub statistics: SubdivisionStatistics,
}

/// Vertex images of every cone of a map complex.
pub fn vertex_functionals(complex: &ConeComplex, key: &str) -> Option<BTreeMap<(VertexId, usize), AffineExpr>> {
    let mc = complex.cone(key)?;
    let mut out = BTreeMap::new();
    for (j, f) in mc.maps.iter().enumerate() {
        for (v, value) in f.vertex_values() {
            out.insert((v, j), value);
        }
    }
    Some(out)
}

/// Subdivides every cone of the map complex for contact orders `contact`
/// (one per target direction) by `fan`, and checks that the cells of each
/// cone restrict on each facet to the cells of the facet's own cone.
pub fn subdivide_map_moduli(n: usize, contact: &[ContactOrder], fan: &Fan) -> Result<SubdividedComplex> {
    if n < 3 {
        return Err(Error::UnstableRange { n });
    }
    if contact.len() != fan.dim() {
        return Err(Error::LengthMismatch { expected: fan.dim(), found: contact.len() });
    }
    ensure_complete(fan)?;
    let complex = build_map_moduli_multi(n, contact)?;
    let subdivisions = complex
        .cones
        .par_iter()
        .map(|mc| {
            let functionals = vertex_functionals(&complex, &mc.type_key).expect("cone exists");
            subdivide_checked(&mc.cone, &functionals, fan)
        })
        .collect::<Result<Vec<_>>>()?;

    let by_key: BTreeMap<&str, &ConeSubdivision> =
        subdivisions.iter().map(|s| (s.parent.as_str(), s)).collect();
    let face_consistent = complex
        .face_maps
        .par_iter()
        .map(|fm| restriction_matches(by_key[fm.cone.as_str()], by_key[fm.face.as_str()], fm))
        .collect::<Result<Vec<bool>>>()?
        .into_iter()
        .all(|ok| ok);

    let maximal: Vec<&str> = complex.maximal_cones().iter().map(|c| c.type_key.as_str()).collect();
    let statistics = SubdivisionStatistics {
        cells_per_cone: subdivisions.iter().map(|s| (s.parent.clone(), s.cells.len())).collect(),
        f_vectors: subdivisions.iter().map(|s| (s.parent.clone(), s.f_vector.clone())).collect(),
        total_cells: subdivisions.iter().map(|s| s.cells.len()).sum(),
        total_maximal_cells: maximal.iter().map(|k| by_key[k].cells.len()).sum(),
        face_consistent,
    };
    Ok(SubdividedComplex { complex, subdivisions, statistics })
}

/// Whether the cells of `big` cut down to `fm.contracted = 0` are exactly
/// the cells of `small`.
pub fn restriction_matches(
    big: &ConeSubdivision,
    small: &ConeSubdivision,
    fm: &crate::moduli::FaceMap,
) -> Result<bool> {
    let zero = BTreeMap::from([(fm.contracted.clone(), AffineExpr::zero())]);
    let rename = fm.to_face();
    let face_dim = small.f_vector.len() - 1;
    let mut pieces: Vec<Polyhedron> = Vec::new();
    for cell in &big.cells {
        let restricted = Polyhedron::new(
            small.coords.clone(),
            cell.halfspaces
                .iter()
                .map(|h| Constraint::ge(h.substitute_all(&zero).rename(&rename)))
                .collect(),
        )?;
        if restricted.dimension() == Some(face_dim) && !pieces.iter().any(|p| p.same_set(&restricted)) {
            pieces.push(restricted);
        }
    }
    let targets = small
        .cells
        .iter()
        .map(|c| c.polyhedron(&small.coords))
        .collect::<Result<Vec<_>>>()?;
    Ok(pieces.len() == targets.len()
        && targets.iter().all(|t| pieces.iter().any(|p| p.same_set(t))))
}
