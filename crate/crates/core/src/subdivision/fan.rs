//! Rational polyhedral fans given by generators, with halfspace
//! descriptions obtained by projecting `x = G λ, λ >= 0` onto `x`.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::feasibility::{Constraint, Polyhedron, Relation};
use crate::affine::AffineExpr;
use crate::error::{Error, Result};
use crate::rational::{int, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FanCone {
    gens: Vec<Vec<i64>>,
    /// Primitive integer normals `h` with `h · x >= 0` on the cone.
    #[serde(default, skip_deserializing)]
    halfspaces: Vec<Vec<i64>>,
}

fn ambient(m: usize) -> Vec<String> {
    (1..=m).map(|i| format!("x{i}")).collect()
}

fn dot(h: &[i64], x: &[i64]) -> i64 {
    h.iter().zip(x).map(|(a, b)| a * b).sum()
}

impl FanCone {
    pub fn new(dim: usize, gens: Vec<Vec<i64>>) -> Result<Self> {
        if let Some(g) = gens.iter().find(|g| g.len() != dim) {
            return Err(Error::LengthMismatch { expected: dim, found: g.len() });
        }
        let xs = ambient(dim);
        let lambdas: Vec<String> = (1..=gens.len()).map(|k| format!("lambda{k}")).collect();
        let mut constraints: Vec<Constraint> = (0..dim)
            .map(|i| {
                let combo = gens
                    .iter()
                    .zip(&lambdas)
                    .fold(AffineExpr::var(xs[i].clone()), |acc, (g, l)| acc - AffineExpr::term(l.clone(), int(g[i])));
                Constraint::eq(combo)
            })
            .collect();
        constraints.extend(lambdas.iter().map(|l| Constraint::ge(AffineExpr::var(l.clone()))));
        let coords: Vec<String> = xs.iter().chain(&lambdas).cloned().collect();
        let projected = Polyhedron::new(coords, constraints)?.project(&lambdas)?;

        let mut rows: Vec<AffineExpr> = Vec::new();
        for c in projected.constraints() {
            match c.relation {
                Relation::Eq => {
                    rows.push(c.expr.clone());
                    rows.push(-c.expr.clone());
                }
                _ => rows.push(c.expr.clone()),
            }
        }
        let irredundant = Polyhedron::new(xs.clone(), rows.into_iter().map(Constraint::ge).collect())?
            .without_redundancy();
        let mut halfspaces: Vec<Vec<i64>> = Vec::new();
        for c in irredundant.constraints() {
            let h = c.expr.normalized();
            let row = xs
                .iter()
                .map(|x| h.coeff(x).to_integer().to_i64())
                .collect::<Option<Vec<i64>>>()
                .ok_or_else(|| Error::Parse("fan normal does not fit in i64".into()))?;
            if !halfspaces.contains(&row) {
                halfspaces.push(row);
            }
        }
        halfspaces.sort();
        Ok(Self { gens, halfspaces })
    }

    pub fn gens(&self) -> &[Vec<i64>] {
        &self.gens
    }

    pub fn halfspaces(&self) -> &[Vec<i64>] {
        &self.halfspaces
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        self.halfspaces.iter().all(|h| dot(h, x) >= 0)
    }

    /// Whether `h` vanishes on the whole cone.
    fn is_implied_equality(&self, h: &[i64]) -> bool {
        self.gens.iter().all(|g| dot(h, g) == 0)
    }

    pub fn dimension(&self) -> usize {
        crate::subdivision::feasibility::rank(
            self.gens.iter().map(|g| g.iter().map(|&v| int(v)).collect()).collect(),
        )
    }

    pub fn same_cone(&self, other: &FanCone) -> bool {
        self.gens.iter().all(|g| other.contains(g)) && other.gens.iter().all(|g| self.contains(g))
    }

    /// Constraints placing the point `image` (one expression per ambient
    /// coordinate) in the relative interior of the cone.
    pub fn relint_constraints(&self, image: &[AffineExpr]) -> Vec<Constraint> {
        self.halfspaces
            .iter()
            .map(|h| {
                let expr = h
                    .iter()
                    .zip(image)
                    .fold(AffineExpr::zero(), |acc, (&a, e)| acc + e.scale(&int(a)));
                if self.is_implied_equality(h) {
                    Constraint::eq(expr)
                } else {
                    Constraint::gt(expr)
                }
            })
            .collect()
    }

    fn polyhedron(&self, dim: usize) -> Polyhedron {
        let xs = ambient(dim);
        let constraints = self
            .halfspaces
            .iter()
            .map(|h| {
                Constraint::ge(AffineExpr::from_parts(
                    xs.iter().cloned().zip(h.iter().map(|&a| int(a))),
                    Rational::zero(),
                ))
            })
            .collect();
        Polyhedron::new(xs, constraints).expect("ambient coordinates")
    }

    /// All faces, as generator subsets, deduplicated.
    pub fn faces(&self) -> Vec<Vec<Vec<i64>>> {
        let open: Vec<&Vec<i64>> =
            self.halfspaces.iter().filter(|h| !self.is_implied_equality(h)).collect();
        let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
        let cap = open.len().min(20);
        for mask in 0u32..(1u32 << cap) {
            let tight: Vec<usize> = (0..self.gens.len())
                .filter(|&k| {
                    (0..cap).all(|b| mask & (1 << b) == 0 || dot(open[b], &self.gens[k]) == 0)
                })
                .collect();
            seen.insert(tight);
        }
        seen.into_iter()
            .map(|idx| idx.into_iter().map(|k| self.gens[k].clone()).collect())
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Fan {
    dim: usize,
    #[serde(default = "yes")]
    complete: bool,
    cones: Vec<FanCone>,
}

fn yes() -> bool {
    true
}

#[derive(Deserialize)]
struct FanJson {
    dim: usize,
    #[serde(default = "yes")]
    complete: bool,
    cones: Vec<FanConeJson>,
}

#[derive(Deserialize)]
struct FanConeJson {
    gens: Vec<Vec<i64>>,
}

impl<'de> Deserialize<'de> for Fan {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = FanJson::deserialize(d)?;
        Fan::new(raw.dim, raw.cones.into_iter().map(|c| c.gens).collect(), raw.complete)
            .map_err(serde::de::Error::custom)
    }
}

impl Fan {
    /// `complete` is the claim checked by [`validate_fan`].
    pub fn new(dim: usize, cones: Vec<Vec<Vec<i64>>>, complete: bool) -> Result<Self> {
        let cones = cones.into_iter().map(|g| FanCone::new(dim, g)).collect::<Result<_>>()?;
        Ok(Self { dim, complete, cones })
    }

    /// `{<= 0}`, `{0}`, `{>= 0}` in the line.
    pub fn projective_line() -> Self {
        Self::new(1, vec![vec![vec![-1]], vec![], vec![vec![1]]], true).expect("valid fan")
    }

    /// The single cone equal to all of `R^m`, together with nothing else.
    pub fn whole_space(dim: usize) -> Self {
        let gens = (0..dim)
            .flat_map(|i| {
                [1, -1].into_iter().map(move |s| {
                    let mut v = vec![0; dim];
                    v[i] = s;
                    v
                })
            })
            .collect();
        Self::new(dim, vec![gens], true).expect("valid fan")
    }

    /// Product fan of `(P^1)^m`: all sign patterns in `{-, 0, +}^m`.
    pub fn product_of_lines(dim: usize) -> Self {
        let mut cones = vec![Vec::new()];
        for i in 0..dim {
            let mut next = Vec::new();
            for c in &cones {
                for s in [-1i64, 0, 1] {
                    let mut c: Vec<Vec<i64>> = c.clone();
                    if s != 0 {
                        let mut v = vec![0; dim];
                        v[i] = s;
                        c.push(v);
                    }
                    next.push(c);
                }
            }
            cones = next;
        }
        Self::new(dim, cones, true).expect("valid fan")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn claims_complete(&self) -> bool {
        self.complete
    }

    pub fn cones(&self) -> &[FanCone] {
        &self.cones
    }

    fn covers(&self, x: &[i64]) -> bool {
        self.cones.iter().any(|c| c.contains(x))
    }

    /// First uncovered direction, or `None` when the fan covers `R^dim`.
    fn uncovered_direction(&self) -> Result<Option<Vec<i64>>> {
        match self.dim {
            0 => Ok((self.cones.is_empty()).then(Vec::new)),
            1 => Ok([vec![1], vec![-1]].into_iter().find(|x| !self.covers(x))),
            2 => Ok(planar_test_directions(&self.cones).into_iter().find(|x| !self.covers(x))),
            m => Err(Error::UnsupportedDimension(m)),
        }
    }
}

fn half(v: &[i64]) -> u8 {
    if v[1] > 0 || (v[1] == 0 && v[0] > 0) {
        0
    } else {
        1
    }
}

fn cross(a: &[i64], b: &[i64]) -> i64 {
    a[0] * b[1] - a[1] * b[0]
}

fn angle_cmp(a: &[i64], b: &[i64]) -> Ordering {
    half(a).cmp(&half(b)).then_with(|| 0.cmp(&cross(a, b)))
}

// Coverage of the circle can only change at generator directions, so it is
// enough to test those and one direction inside each arc between them.
fn planar_test_directions(cones: &[FanCone]) -> Vec<Vec<i64>> {
    let mut dirs: Vec<Vec<i64>> = cones
        .iter()
        .flat_map(|c| c.gens.iter().cloned())
        .filter(|g| g.iter().any(|&v| v != 0))
        .collect();
    dirs.sort_by(|a, b| angle_cmp(a, b));
    dirs.dedup_by(|a, b| angle_cmp(a, b) == Ordering::Equal);
    if dirs.is_empty() {
        return vec![vec![1, 0]];
    }
    let mut tests = dirs.clone();
    for i in 0..dirs.len() {
        let u = &dirs[i];
        let w = &dirs[(i + 1) % dirs.len()];
        if dirs.len() > 1 && cross(u, w) > 0 {
            tests.push(vec![u[0] + w[0], u[1] + w[1]]);
        } else {
            tests.push(vec![-u[1], u[0]]);
        }
    }
    tests
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FanViolation {
    MissingFace { cone: usize, face: Vec<Vec<i64>> },
    BadIntersection { first: usize, second: usize },
    NotComplete { uncovered: Vec<i64> },
}

impl fmt::Display for FanViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FanViolation::MissingFace { cone, face } => {
                write!(f, "face {face:?} of cone {cone} is not in the fan")
            }
            FanViolation::BadIntersection { first, second } => {
                write!(f, "cones {first} and {second} do not meet in a common face")
            }
            FanViolation::NotComplete { uncovered } => {
                write!(f, "direction {uncovered:?} is not covered")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FanReport {
    pub violations: Vec<FanViolation>,
    pub complete: bool,
}

impl FanReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for FanReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        let parts: Vec<String> = self.violations.iter().map(ToString::to_string).collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// Smallest face of `cone` containing the polyhedron `inner`.
fn carrier_face(cone: &FanCone, dim: usize, inner: &Polyhedron) -> Polyhedron {
    let xs = ambient(dim);
    let tight: Vec<Constraint> = cone
        .halfspaces
        .iter()
        .map(|h| {
            AffineExpr::from_parts(xs.iter().cloned().zip(h.iter().map(|&a| int(a))), Rational::zero())
        })
        .filter(|e| inner.with([Constraint::gt(e.clone())]).is_empty())
        .map(Constraint::eq)
        .collect();
    cone.polyhedron(dim).with(tight)
}

/// Checks closure under faces, that cones meet in common faces, and
/// (when claimed, for `dim <= 2`) completeness.
pub fn validate_fan(fan: &Fan) -> Result<FanReport> {
    let mut violations = Vec::new();
    for (i, cone) in fan.cones.iter().enumerate() {
        for face in cone.faces() {
            let face_cone = FanCone::new(fan.dim, face.clone())?;
            if !fan.cones.iter().any(|c| c.same_cone(&face_cone)) {
                violations.push(FanViolation::MissingFace { cone: i, face });
            }
        }
    }
    for i in 0..fan.cones.len() {
        for j in i + 1..fan.cones.len() {
            let (a, b) = (&fan.cones[i], &fan.cones[j]);
            let meet = a.polyhedron(fan.dim).with(b.polyhedron(fan.dim).constraints().iter().cloned());
            let face_a = carrier_face(a, fan.dim, &meet);
            let face_b = carrier_face(b, fan.dim, &meet);
            if !face_a.is_subset_of(&b.polyhedron(fan.dim)) || !face_b.is_subset_of(&a.polyhedron(fan.dim)) {
                violations.push(FanViolation::BadIntersection { first: i, second: j });
            }
        }
    }
    let mut complete = false;
    if fan.complete {
        match fan.uncovered_direction()? {
            Some(uncovered) => violations.push(FanViolation::NotComplete { uncovered }),
            None => complete = true,
        }
    }
    Ok(FanReport { violations, complete })
}
