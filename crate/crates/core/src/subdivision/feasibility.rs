//! Exact rational feasibility by Fourier–Motzkin elimination.
//!
//! Equalities are removed first by Gaussian substitution; the remaining
//! inequalities (strict or not) are eliminated one variable at a time, with
//! each new row scaled to coprime integer coefficients and parallel rows
//! pruned to the tightest one. Witnesses are recovered by back-substitution.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::affine::AffineExpr;
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Ge,
    Gt,
    Eq,
}

/// `expr ⋈ 0` for `⋈` in `>=`, `>`, `=`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Constraint {
    pub expr: AffineExpr,
    pub relation: Relation,
}

impl Constraint {
    pub fn ge(expr: AffineExpr) -> Self {
        Self { expr, relation: Relation::Ge }
    }

    pub fn gt(expr: AffineExpr) -> Self {
        Self { expr, relation: Relation::Gt }
    }

    pub fn eq(expr: AffineExpr) -> Self {
        Self { expr, relation: Relation::Eq }
    }

    pub fn holds_at(&self, point: &BTreeMap<String, Rational>) -> Option<bool> {
        let v = self.expr.eval(point)?;
        Some(match self.relation {
            Relation::Ge => !v.is_negative(),
            Relation::Gt => v.is_positive(),
            Relation::Eq => v.is_zero(),
        })
    }

    /// The closure of the constraint's solution set.
    pub fn relaxed(&self) -> Self {
        match self.relation {
            Relation::Gt => Self::ge(self.expr.clone()),
            _ => self.clone(),
        }
    }

    /// True when the constraint mentions no variables and holds.
    pub fn is_trivially_true(&self) -> bool {
        self.expr.is_constant()
            && self.holds_at(&BTreeMap::new()).unwrap_or(false)
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.relation {
            Relation::Ge => ">=",
            Relation::Gt => ">",
            Relation::Eq => "=",
        };
        write!(f, "{} {op} 0", self.expr)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Feasibility {
    Feasible(BTreeMap<String, Rational>),
    Infeasible,
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }

    pub fn witness(&self) -> Option<&BTreeMap<String, Rational>> {
        match self {
            Feasibility::Feasible(p) => Some(p),
            Feasibility::Infeasible => None,
        }
    }
}

/// Decides whether some rational point satisfies all `constraints`.
pub fn check_feasible(coords: &[String], constraints: &[Constraint]) -> Result<Feasibility> {
    Ok(Polyhedron::new(coords.to_vec(), constraints.to_vec())?.feasibility())
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Row {
    coeffs: Vec<Rational>,
    constant: Rational,
    strict: bool,
}

impl Row {
    fn is_constant(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    fn constant_holds(&self) -> bool {
        if self.strict {
            self.constant.is_positive()
        } else {
            !self.constant.is_negative()
        }
    }

    /// `self + k * other`
    fn add_scaled(&self, k: &Rational, other: &Row) -> Row {
        Row {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + k * b).collect(),
            constant: &self.constant + k * &other.constant,
            strict: self.strict || other.strict,
        }
    }

    fn scaled(&self, k: &Rational) -> Row {
        Row {
            coeffs: self.coeffs.iter().map(|a| a * k).collect(),
            constant: &self.constant * k,
            strict: self.strict,
        }
    }

    fn normalized(&self) -> Row {
        let refs: Vec<&Rational> = self.coeffs.iter().collect();
        if refs.iter().all(|r| r.is_zero()) {
            return self.clone();
        }
        self.scaled(&rational::primitive_scale(&refs))
    }

    fn eval(&self, x: &[Rational]) -> Rational {
        self.coeffs.iter().zip(x).fold(self.constant.clone(), |acc, (a, v)| acc + a * v)
    }
}

/// Keeps the tightest row among parallel ones. Returns `false` if a constant
/// row is violated.
fn prune(rows: Vec<Row>) -> Option<Vec<Row>> {
    let mut best: HashMap<Vec<Rational>, (Rational, bool)> = HashMap::new();
    let mut order: Vec<Vec<Rational>> = Vec::new();
    for row in rows {
        if row.is_constant() {
            if !row.constant_holds() {
                return None;
            }
            continue;
        }
        let row = row.normalized();
        match best.get_mut(&row.coeffs) {
            Some((constant, strict)) => {
                if row.constant < *constant || (row.constant == *constant && row.strict) {
                    *constant = row.constant;
                    *strict = row.strict;
                }
            }
            None => {
                order.push(row.coeffs.clone());
                best.insert(row.coeffs, (row.constant, row.strict));
            }
        }
    }
    Some(
        order
            .into_iter()
            .map(|coeffs| {
                let (constant, strict) = best.remove(&coeffs).expect("recorded");
                Row { coeffs, constant, strict }
            })
            .collect(),
    )
}

/// Eliminates `var` from `rows` with `eq` (whose coefficient on `var` is nonzero).
fn substitute_out(rows: &mut [Row], var: usize, eq: &Row) {
    let pivot = &eq.coeffs[var];
    for row in rows.iter_mut() {
        if !row.coeffs[var].is_zero() {
            let k = -(&row.coeffs[var] / pivot);
            let strict = row.strict;
            *row = row.add_scaled(&k, eq);
            row.strict = strict;
        }
    }
}

struct Elimination {
    /// `(variable, equality row)` in pivot order.
    pivots: Vec<(usize, Row)>,
    /// `(variable, system before eliminating it)` in elimination order.
    stages: Vec<(usize, Vec<Row>)>,
    /// Rows left after elimination (over the kept variables).
    remaining_eqs: Vec<Row>,
    remaining: Vec<Row>,
}

/// Runs equality substitution and Fourier–Motzkin over the variables in
/// `eliminate`. `None` when a contradiction is found.
fn eliminate(
    mut eqs: Vec<Row>,
    ineqs: Vec<Row>,
    eliminate: &BTreeSet<usize>,
) -> Option<Elimination> {
    let mut ineqs = ineqs;
    let mut pivots = Vec::new();
    let mut remaining_eqs = Vec::new();
    let mut queue: std::collections::VecDeque<Row> = eqs.drain(..).collect();
    while let Some(eq) = queue.pop_front() {
        let pivot = eliminate.iter().copied().find(|&j| !eq.coeffs[j].is_zero());
        match pivot {
            Some(p) => {
                let mut rest: Vec<Row> = queue.drain(..).collect();
                substitute_out(&mut rest, p, &eq);
                queue.extend(rest);
                substitute_out(&mut ineqs, p, &eq);
                substitute_out(&mut remaining_eqs, p, &eq);
                pivots.push((p, eq));
            }
            None if eq.is_constant() => {
                if !eq.constant.is_zero() {
                    return None;
                }
            }
            None => remaining_eqs.push(eq),
        }
    }

    let pivoted: BTreeSet<usize> = pivots.iter().map(|(p, _)| *p).collect();
    let mut todo: BTreeSet<usize> = eliminate.difference(&pivoted).copied().collect();
    let mut rows = prune(ineqs)?;
    let mut stages = Vec::new();
    loop {
        // Variable with the cheapest pos x neg product among those still present.
        let candidate = todo
            .iter()
            .copied()
            .filter_map(|j| {
                let pos = rows.iter().filter(|r| r.coeffs[j].is_positive()).count();
                let neg = rows.iter().filter(|r| r.coeffs[j].is_negative()).count();
                (pos + neg > 0).then_some((pos * neg, j))
            })
            .min();
        let Some((_, var)) = candidate else { break };
        todo.remove(&var);
        let (mut pos, mut neg, mut next) = (Vec::new(), Vec::new(), Vec::new());
        for row in &rows {
            let c = &row.coeffs[var];
            if c.is_positive() {
                pos.push(row);
            } else if c.is_negative() {
                neg.push(row);
            } else {
                next.push(row.clone());
            }
        }
        for p in &pos {
            for n in &neg {
                // |n_var| * p + p_var * n cancels var.
                let a = p.coeffs[var].clone();
                let b = -n.coeffs[var].clone();
                let combined = p.scaled(&b).add_scaled(&a, n);
                next.push(combined);
            }
        }
        stages.push((var, rows));
        rows = prune(next)?;
    }
    Some(Elimination { pivots, stages, remaining_eqs, remaining: rows })
}

/// A value inside the (possibly half-open, possibly unbounded) interval,
/// preferring zero and then small integers.
fn pick_value(lower: Option<(Rational, bool)>, upper: Option<(Rational, bool)>) -> Rational {
    let ok = |x: &Rational| {
        lower.as_ref().is_none_or(|(l, strict)| if *strict { x > l } else { x >= l })
            && upper.as_ref().is_none_or(|(u, strict)| if *strict { x < u } else { x <= u })
    };
    let zero = Rational::zero();
    if ok(&zero) {
        return zero;
    }
    let mut candidates = Vec::new();
    if let Some((l, _)) = &lower {
        let c = l.floor() + Rational::one();
        candidates.push(l.ceil());
        candidates.push(c);
    }
    if let Some((u, _)) = &upper {
        candidates.push(u.floor());
        candidates.push(u.ceil() - Rational::one());
    }
    if let Some(best) = candidates.into_iter().filter(ok).min_by_key(|c| c.abs()) {
        return best;
    }
    match (lower, upper) {
        (Some((l, _)), Some((u, _))) => (l + u) / rational::int(2),
        (Some((l, _)), None) => l + Rational::one(),
        (None, Some((u, _))) => u - Rational::one(),
        (None, None) => zero,
    }
}

fn back_substitute(k: usize, elim: &Elimination, x: &mut [Rational]) {
    for (var, rows) in elim.stages.iter().rev() {
        let mut lower: Option<(Rational, bool)> = None;
        let mut upper: Option<(Rational, bool)> = None;
        for row in rows {
            let a = &row.coeffs[*var];
            if a.is_zero() {
                continue;
            }
            let mut rest = row.constant.clone();
            for j in 0..k {
                if j != *var {
                    rest += &row.coeffs[j] * &x[j];
                }
            }
            let bound = -rest / a;
            if a.is_positive() {
                let tighter = match &lower {
                    None => true,
                    Some((l, s)) => bound > *l || (bound == *l && row.strict && !s),
                };
                if tighter {
                    lower = Some((bound, row.strict));
                }
            } else {
                let tighter = match &upper {
                    None => true,
                    Some((u, s)) => bound < *u || (bound == *u && row.strict && !s),
                };
                if tighter {
                    upper = Some((bound, row.strict));
                }
            }
        }
        x[*var] = pick_value(lower, upper);
    }
    for (p, eq) in elim.pivots.iter().rev() {
        let mut rest = eq.constant.clone();
        for j in 0..k {
            if j != *p {
                rest += &eq.coeffs[j] * &x[j];
            }
        }
        x[*p] = -rest / &eq.coeffs[*p];
    }
}

/// A set `{x : every constraint holds}` over named coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Polyhedron {
    coords: Vec<String>,
    constraints: Vec<Constraint>,
}

impl Polyhedron {
    pub fn new(coords: Vec<String>, constraints: Vec<Constraint>) -> Result<Self> {
        let declared: BTreeSet<&str> = coords.iter().map(String::as_str).collect();
        for c in &constraints {
            if let Some(v) = c.expr.variables().into_iter().find(|v| !declared.contains(v)) {
                return Err(Error::UndeclaredCoordinate(v.to_string()));
            }
        }
        Ok(Self { coords, constraints })
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    fn index(&self) -> HashMap<&str, usize> {
        self.coords.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect()
    }

    fn rows(&self) -> (Vec<Row>, Vec<Row>) {
        let index = self.index();
        let k = self.coords.len();
        let mut eqs = Vec::new();
        let mut ineqs = Vec::new();
        for c in &self.constraints {
            let mut coeffs = vec![Rational::zero(); k];
            for (name, a) in c.expr.terms() {
                coeffs[index[name]] = a.clone();
            }
            let row = Row {
                coeffs,
                constant: c.expr.constant_term().clone(),
                strict: c.relation == Relation::Gt,
            };
            match c.relation {
                Relation::Eq => eqs.push(row),
                _ => ineqs.push(row),
            }
        }
        (eqs, ineqs)
    }

    fn row_to_expr(&self, row: &Row) -> AffineExpr {
        AffineExpr::from_parts(
            self.coords.iter().cloned().zip(row.coeffs.iter().cloned()),
            row.constant.clone(),
        )
    }

    pub fn feasibility(&self) -> Feasibility {
        let k = self.coords.len();
        let (eqs, ineqs) = self.rows();
        let all: BTreeSet<usize> = (0..k).collect();
        let Some(elim) = eliminate(eqs, ineqs, &all) else {
            return Feasibility::Infeasible;
        };
        if !elim.remaining.iter().all(Row::constant_holds) {
            return Feasibility::Infeasible;
        }
        let mut x = vec![Rational::zero(); k];
        back_substitute(k, &elim, &mut x);
        let (eqs, ineqs) = self.rows();
        debug_assert!(eqs.iter().all(|r| r.eval(&x).is_zero()));
        debug_assert!(ineqs.iter().all(|r| {
            let v = r.eval(&x);
            if r.strict { v.is_positive() } else { !v.is_negative() }
        }));
        Feasibility::Feasible(self.coords.iter().cloned().zip(x).collect())
    }

    pub fn is_empty(&self) -> bool {
        !self.feasibility().is_feasible()
    }

    pub fn contains(&self, point: &BTreeMap<String, Rational>) -> bool {
        self.constraints.iter().all(|c| c.holds_at(point).unwrap_or(false))
    }

    pub fn with(&self, extra: impl IntoIterator<Item = Constraint>) -> Polyhedron {
        let mut p = self.clone();
        p.constraints.extend(extra);
        p
    }

    /// Replaces strict inequalities by non-strict ones.
    pub fn closure(&self) -> Polyhedron {
        Polyhedron {
            coords: self.coords.clone(),
            constraints: self.constraints.iter().map(Constraint::relaxed).collect(),
        }
    }

    /// Indices of non-strict inequalities that hold with equality on the whole set.
    pub fn implied_equalities(&self) -> Vec<usize> {
        if self.is_empty() {
            return Vec::new();
        }
        let strict = Polyhedron {
            coords: self.coords.clone(),
            constraints: self
                .constraints
                .iter()
                .map(|c| match c.relation {
                    Relation::Ge => Constraint::gt(c.expr.clone()),
                    _ => c.clone(),
                })
                .collect(),
        };
        if !strict.is_empty() {
            return Vec::new();
        }
        (0..self.constraints.len())
            .filter(|&i| {
                let c = &self.constraints[i];
                c.relation == Relation::Ge && {
                    let mut p = self.clone();
                    p.constraints[i] = Constraint::gt(c.expr.clone());
                    p.is_empty()
                }
            })
            .collect()
    }

    /// Dimension of the affine hull; `None` for the empty set.
    pub fn dimension(&self) -> Option<usize> {
        if self.is_empty() {
            return None;
        }
        let implied: BTreeSet<usize> = self.implied_equalities().into_iter().collect();
        let index = self.index();
        let k = self.coords.len();
        let mut rows: Vec<Vec<Rational>> = Vec::new();
        for (i, c) in self.constraints.iter().enumerate() {
            if c.relation == Relation::Eq || implied.contains(&i) {
                let mut v = vec![Rational::zero(); k];
                for (name, a) in c.expr.terms() {
                    v[index[name]] = a.clone();
                }
                rows.push(v);
            }
        }
        Some(k - rank(rows))
    }

    /// `self ⊆ other`, both over the same coordinates.
    pub fn is_subset_of(&self, other: &Polyhedron) -> bool {
        if self.is_empty() {
            return true;
        }
        other.constraints.iter().all(|c| {
            let negations: Vec<Constraint> = match c.relation {
                Relation::Ge => vec![Constraint::gt(-c.expr.clone())],
                Relation::Gt => vec![Constraint::ge(-c.expr.clone())],
                Relation::Eq => vec![Constraint::gt(c.expr.clone()), Constraint::gt(-c.expr.clone())],
            };
            negations.into_iter().all(|n| self.with([n]).is_empty())
        })
    }

    pub fn same_set(&self, other: &Polyhedron) -> bool {
        if self.coords == other.coords && self.normal_form() == other.normal_form() {
            return true;
        }
        self.is_subset_of(other) && other.is_subset_of(self)
    }

    fn normal_form(&self) -> BTreeSet<(String, u8)> {
        self.constraints
            .iter()
            .filter(|c| !c.is_trivially_true())
            .map(|c| {
                let tag = match c.relation {
                    Relation::Ge => 0,
                    Relation::Gt => 1,
                    Relation::Eq => 2,
                };
                (c.expr.normalized().to_string(), tag)
            })
            .collect()
    }

    /// Drops inequalities implied by the others.
    pub fn without_redundancy(&self) -> Polyhedron {
        let mut kept: Vec<Constraint> = self
            .constraints
            .iter()
            .filter(|c| !c.is_trivially_true())
            .cloned()
            .collect();
        let mut i = 0;
        while i < kept.len() {
            if kept[i].relation == Relation::Eq {
                i += 1;
                continue;
            }
            let mut others = kept.clone();
            let c = others.remove(i);
            let rest = Polyhedron { coords: self.coords.clone(), constraints: others.clone() };
            let single = Polyhedron { coords: self.coords.clone(), constraints: vec![c] };
            if rest.is_subset_of(&single) {
                kept = others;
            } else {
                i += 1;
            }
        }
        Polyhedron { coords: self.coords.clone(), constraints: kept }
    }

    /// Projects away the coordinates in `drop`.
    pub fn project(&self, drop: &[String]) -> Result<Polyhedron> {
        let index = self.index();
        let mut elim_set = BTreeSet::new();
        for d in drop {
            elim_set.insert(*index.get(d.as_str()).ok_or_else(|| Error::UndeclaredCoordinate(d.clone()))?);
        }
        let kept: Vec<String> = self
            .coords
            .iter()
            .enumerate()
            .filter(|(i, _)| !elim_set.contains(i))
            .map(|(_, c)| c.clone())
            .collect();
        let (eqs, ineqs) = self.rows();
        let Some(elim) = eliminate(eqs, ineqs, &elim_set) else {
            // Empty projection.
            return Ok(Polyhedron { coords: kept, constraints: vec![Constraint::ge((-1).into())] });
        };
        let mut constraints: Vec<Constraint> = elim
            .remaining_eqs
            .iter()
            .map(|r| Constraint::eq(self.row_to_expr(&r.normalized())))
            .collect();
        for r in &elim.remaining {
            let expr = self.row_to_expr(r);
            constraints.push(if r.strict { Constraint::gt(expr) } else { Constraint::ge(expr) });
        }
        Polyhedron::new(kept, constraints)
    }
}

/// Rank of a rational matrix given by rows.
pub fn rank(mut rows: Vec<Vec<Rational>>) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, p);
        let pivot = rows[r][c].clone();
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let k = &rows[i][c] / &pivot;
                let pr = rows[r].clone();
                for (x, y) in rows[i].iter_mut().zip(&pr) {
                    *x -= &k * y;
                }
            }
        }
        r += 1;
    }
    r
}

/// Determinant of a square rational matrix.
pub fn determinant(mut m: Vec<Vec<Rational>>) -> Rational {
    let n = m.len();
    let mut det = Rational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !m[i][c].is_zero()) else {
            return Rational::zero();
        };
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        let pivot = m[c][c].clone();
        det *= &pivot;
        for i in c + 1..n {
            if !m[i][c].is_zero() {
                let k = &m[i][c] / &pivot;
                let pr = m[c].clone();
                for (x, y) in m[i].iter_mut().zip(&pr) {
                    *x -= &k * y;
                }
            }
        }
    }
    det
}
