//! Certificates for the product decomposition of map moduli: every cone
//! `(l.., c)` of the map complex is carried onto `(curve cone) x (line)` by
//! `(l.., c) ↦ (l.., value at leg i)`.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use super::point::{splitting_at_leg, splitting_expr, TropicalMapPoint};
use super::{build_map_moduli, build_moduli_complex, ConeComplex, FaceMap, ModuliCone};
use crate::affine::AffineExpr;
use crate::error::{Error, Result};
use crate::pl_function::ContactOrder;
use crate::rational::{self, Rational};
use crate::subdivision::feasibility::{determinant, Constraint, Polyhedron};
use crate::tropical_curve::VertexId;

/// Name of the line coordinate on the product side.
pub const LINE_COORD: &str = "s";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeCertificate {
    pub type_key: String,
    pub maximal: bool,
    /// Product coordinate ↦ expression in the map cone's coordinates.
    pub coordinate_map: Vec<(String, AffineExpr)>,
    #[serde(with = "rational::serde_str")]
    pub determinant: Rational,
    pub unimodular: bool,
    pub image_matches: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessPoint {
    pub type_key: String,
    #[serde(with = "rational::serde_point")]
    pub point: BTreeMap<String, Rational>,
    #[serde(with = "rational::serde_str")]
    pub value_at_leg: Rational,
    #[serde(with = "rational::serde_str")]
    pub value_at_other: Rational,
    /// Symbolic difference of the two splittings on the witness cone.
    pub difference: AffineExpr,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum WitnessOutcome {
    Found(WitnessPoint),
    /// The two splittings agree on every cone of the tropical complex.
    NoTropicalWitness,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplittingWitness {
    pub other_leg: u32,
    pub outcome: WitnessOutcome,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsomorphismReport {
    pub n: usize,
    pub sigma: ContactOrder,
    pub leg: u32,
    pub certified: bool,
    pub combinatorics_match: bool,
    pub face_maps_compatible: bool,
    pub cones_checked: usize,
    pub maximal_cones_checked: usize,
    pub face_maps_checked: usize,
    pub cones: Vec<ConeCertificate>,
    pub witnesses: Vec<SplittingWitness>,
}

pub fn product_decomposition(n: usize, sigma: &ContactOrder, leg: u32) -> Result<IsomorphismReport> {
    if n < 3 {
        return Err(Error::UnstableRange { n });
    }
    let maps = build_map_moduli(n, sigma)?;
    if leg == 0 || leg as usize > n {
        return Err(Error::NoSuchLeg(leg));
    }
    let curves = build_moduli_complex(n)?;

    let combinatorics_match = same_combinatorics(&maps, &curves);
    let maximal: BTreeSet<&str> = maps.maximal_cones().iter().map(|c| c.type_key.as_str()).collect();
    let cones = maps
        .cones
        .iter()
        .zip(&curves.cones)
        .map(|(m, c)| certify_cone(m, c, leg, maximal.contains(m.type_key.as_str())))
        .collect::<Result<Vec<_>>>()?;
    let face_maps_compatible = maps
        .face_maps
        .iter()
        .map(|fm| face_map_commutes(&maps, fm, leg))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .all(|ok| ok);

    let witnesses = (1..=n as u32)
        .filter(|&j| j != leg)
        .map(|j| {
            Ok(SplittingWitness { other_leg: j, outcome: find_witness(&maps, sigma, leg, j)? })
        })
        .collect::<Result<Vec<_>>>()?;

    let certified = combinatorics_match
        && face_maps_compatible
        && cones.iter().all(|c| c.unimodular && c.image_matches);
    Ok(IsomorphismReport {
        n,
        sigma: sigma.clone(),
        leg,
        certified,
        combinatorics_match,
        face_maps_compatible,
        cones_checked: cones.len(),
        maximal_cones_checked: cones.iter().filter(|c| c.maximal).count(),
        face_maps_checked: maps.face_maps.len(),
        cones,
        witnesses,
    })
}

fn same_combinatorics(maps: &ConeComplex, curves: &ConeComplex) -> bool {
    if maps.cones.len() != curves.cones.len() {
        return false;
    }
    let cones_ok = maps.cones.iter().zip(&curves.cones).all(|(m, c)| {
        let mut expected = c.cone.coords().to_vec();
        expected.push(super::Coordinate::free("c"));
        m.type_key == c.type_key && m.cone.coords() == expected.as_slice()
    });
    let lifted: Vec<FaceMap> = curves
        .face_maps
        .iter()
        .map(|f| {
            let mut f = f.clone();
            f.coords.push(("c".into(), "c".into()));
            f.coords.sort();
            f
        })
        .collect();
    cones_ok && lifted == maps.face_maps
}

fn certify_cone(map_cone: &ModuliCone, curve_cone: &ModuliCone, leg: u32, maximal: bool) -> Result<ConeCertificate> {
    let source = map_cone.cone.coord_names();
    let split = splitting_expr(&map_cone.maps[0], leg)?;
    let mut coordinate_map: Vec<(String, AffineExpr)> = curve_cone
        .cone
        .coord_names()
        .into_iter()
        .map(|l| (l.clone(), AffineExpr::var(l)))
        .collect();
    coordinate_map.push((LINE_COORD.to_string(), split));

    let matrix: Vec<Vec<Rational>> = coordinate_map
        .iter()
        .map(|(_, e)| source.iter().map(|x| e.coeff(x)).collect())
        .collect();
    let integral = matrix.iter().flatten().all(|q| q.is_integer());
    let det = if matrix.len() == source.len() { determinant(matrix) } else { Rational::from_integer(0.into()) };
    let unimodular = integral && det.abs().is_one();

    // Pull the product cone back along the coordinate map and compare.
    let substitution: BTreeMap<String, AffineExpr> = coordinate_map.iter().cloned().collect();
    let pulled = Polyhedron::new(
        source.clone(),
        curve_cone
            .cone
            .facets()
            .iter()
            .map(|f| Constraint::ge(f.substitute_all(&substitution)))
            .collect(),
    )?;
    let image_matches = pulled.same_set(&map_cone.cone.polyhedron()?);

    Ok(ConeCertificate {
        type_key: map_cone.type_key.clone(),
        maximal,
        coordinate_map,
        determinant: det,
        unimodular,
        image_matches,
    })
}

fn face_map_commutes(maps: &ConeComplex, fm: &FaceMap, leg: u32) -> Result<bool> {
    let (Some(big), Some(small)) = (maps.cone(&fm.cone), maps.cone(&fm.face)) else {
        return Ok(false);
    };
    let zero = BTreeMap::from([(fm.contracted.clone(), AffineExpr::zero())]);
    let restricted = splitting_expr(&big.maps[0], leg)?.substitute_all(&zero).rename(&fm.to_face());
    Ok(restricted == splitting_expr(&small.maps[0], leg)?)
}

fn find_witness(maps: &ConeComplex, sigma: &ContactOrder, leg: u32, other: u32) -> Result<WitnessOutcome> {
    let maximal = maps.maximal_cones();
    let rest = maps.cones.iter().filter(|c| !maximal.iter().any(|m| m.type_key == c.type_key));
    for mc in maximal.iter().copied().chain(rest) {
        let f = &mc.maps[0];
        let difference = splitting_expr(f, leg)? - splitting_expr(f, other)?;
        if difference.is_zero() {
            continue;
        }
        let mut point: BTreeMap<String, Rational> = mc
            .tree
            .edge_coordinates()
            .into_iter()
            .map(|l| (l, Rational::one()))
            .collect();
        point.insert("c".into(), rational::int(0));
        if difference.eval(&point).is_some_and(|d| d == rational::int(0)) {
            let (name, _) = difference.terms().next().expect("nonconstant difference");
            point.insert(name.to_string(), rational::int(2));
        }
        let concrete = TropicalMapPoint::from_contact(
            mc.tree.at_point(&point)?,
            std::slice::from_ref(sigma),
            VertexId(0),
            &[point["c"].clone()],
        )?;
        let value_at_leg = splitting_at_leg(&concrete, leg)?;
        let value_at_other = splitting_at_leg(&concrete, other)?;
        if value_at_leg != value_at_other {
            return Ok(WitnessOutcome::Found(WitnessPoint {
                type_key: mc.type_key.clone(),
                point,
                value_at_leg,
                value_at_other,
                difference,
            }));
        }
    }
    Ok(WitnessOutcome::NoTropicalWitness)
}
