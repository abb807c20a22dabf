//! Acceptance criteria, one line each. Runs as a plain binary so the lines
//! show up in `cargo test` output; exits nonzero if any criterion fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::Rng;

use common::{
    balancing_oracle, compatible_systems, double_factorial, random_generic, random_tree, random_zero_sum, rng,
    split_system, walk_values, LinearOutcome,
};
use troplog::affine::AffineExpr;
use troplog::moduli::{
    build_map_moduli, classify_self_map, product_decomposition, stabilize, CoordSign, SelfMapNormalForm,
    TropicalMapPoint, WitnessOutcome,
};
use troplog::pl_function::{extend_from_leg_slopes, ContactOrder, PLFunction};
use troplog::rational::{frac, int};
use troplog::subdivision::fan::Fan;
use troplog::subdivision::feasibility::Polyhedron;
use troplog::subdivision::subdivide_map_moduli;
use troplog::tropical_curve::{enumerate_tree_types, Length, Tree, TypeFilter, VertexId};
use troplog::Error;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_vertex(rng: &mut impl Rng, tree: &Tree) -> VertexId {
    tree.vertices()[rng.gen_range(0..tree.vertices().len())]
}

fn existence_uniqueness() -> Outcome {
    let mut rng = rng(1);
    let mut trees = 0;
    for _ in 0..600 {
        let n = rng.gen_range(3..=12);
        let tree = random_tree(&mut rng, n);
        let sigma = random_zero_sum(&mut rng, n, 6);
        let base = random_vertex(&mut rng, &tree);
        let f = extend_from_leg_slopes(&tree, &sigma, base, AffineExpr::var("c")).map_err(|e| e.to_string())?;
        let LinearOutcome::Unique(expected) = balancing_oracle(&tree, sigma.slopes()) else {
            return Err(format!("oracle found no unique solution for {sigma:?}"));
        };
        let got: Vec<BigRational> = f.edge_slopes().iter().map(|&s| int(s)).collect();
        ensure(got == expected, || format!("slopes {got:?} != oracle {expected:?}"))?;
        ensure(f.contact_order() == sigma, || "leg slopes differ from contact order".into())?;
        ensure(f.is_balanced(), || "extension not balanced".into())?;
        trees += 1;
    }
    let mut nonzero = 0;
    for _ in 0..150 {
        let n = rng.gen_range(3..=12);
        let tree = random_tree(&mut rng, n);
        let mut slopes = random_zero_sum(&mut rng, n, 6).slopes().to_vec();
        let k = rng.gen_range(0..n);
        slopes[k] += if rng.gen_bool(0.5) { rng.gen_range(1..5) } else { -rng.gen_range(1..5) };
        let sum: i64 = slopes.iter().sum();
        ensure(balancing_oracle(&tree, &slopes) == LinearOutcome::Inconsistent, || "oracle solved a nonzero sum".into())?;
        let err = extend_from_leg_slopes(&tree, &ContactOrder::new(slopes), tree.vertices()[0], AffineExpr::var("c"));
        ensure(err == Err(Error::NonZeroSum { sum }), || format!("expected NonZeroSum {sum}, got {err:?}"))?;
        nonzero += 1;
    }
    Ok(format!("{trees} trees match the linear-solver oracle; {nonzero} nonzero sums rejected"))
}

fn kernel_constancy() -> Outcome {
    let mut rng = rng(2);
    let c = AffineExpr::var("c");
    for _ in 0..250 {
        let n = rng.gen_range(3..=12);
        let tree = random_tree(&mut rng, n);
        let base = random_vertex(&mut rng, &tree);
        let f = extend_from_leg_slopes(&tree, &ContactOrder::zero(n), base, c.clone()).map_err(|e| e.to_string())?;
        let values = f.vertex_values();
        ensure(values.len() == tree.vertices().len() && values.values().all(|v| *v == c), || {
            format!("nonconstant kernel element: {values:?}")
        })?;
    }
    Ok("250 trees, every vertex value equals c".into())
}

fn independent_degrees(f: &PLFunction) -> BTreeMap<VertexId, i64> {
    let tree = f.tree();
    let mut deg: BTreeMap<VertexId, i64> = tree.vertices().iter().map(|&v| (v, 0)).collect();
    for (e, &s) in tree.edges().iter().zip(f.edge_slopes()) {
        *deg.get_mut(&e.ends[0]).unwrap() += s;
        *deg.get_mut(&e.ends[1]).unwrap() -= s;
    }
    for leg in tree.legs() {
        *deg.get_mut(&leg.at).unwrap() += f.leg_slopes()[&leg.label];
    }
    deg
}

fn balancing_multidegree() -> Outcome {
    let mut rng = rng(3);
    let (mut balanced, mut unbalanced) = (0, 0);
    for case in 0..1200 {
        let n = rng.gen_range(3..=9);
        let tree = random_tree(&mut rng, n);
        let base = tree.vertices()[0];
        let f = if case % 2 == 0 {
            let sigma = random_zero_sum(&mut rng, n, 4);
            let f = extend_from_leg_slopes(&tree, &sigma, base, AffineExpr::zero()).unwrap();
            if rng.gen_bool(0.5) {
                f
            } else {
                let mut legs = f.leg_slopes().clone();
                *legs.get_mut(&rng.gen_range(1..=n as u32)).unwrap() += 1;
                PLFunction::new(tree, base, AffineExpr::zero(), f.edge_slopes().to_vec(), legs).unwrap()
            }
        } else {
            let edges = (0..tree.edges().len()).map(|_| rng.gen_range(-3..=3)).collect();
            let legs = (1..=n as u32).map(|l| (l, rng.gen_range(-3..=3))).collect();
            PLFunction::new(tree, base, AffineExpr::zero(), edges, legs).unwrap()
        };
        let oracle = independent_degrees(&f);
        let vanishes = oracle.values().all(|&d| d == 0);
        ensure(f.multidegree().degrees() == &oracle, || "multidegree differs from direct sum".into())?;
        ensure(f.is_balanced() == vanishes, || format!("is_balanced disagrees on case {case}"))?;
        ensure(f.multidegree().total() == oracle.values().sum::<i64>(), || "total degree".into())?;
        if vanishes {
            balanced += 1;
        } else {
            unbalanced += 1;
        }
    }
    ensure(balanced >= 100 && unbalanced >= 100, || format!("skewed sample {balanced}/{unbalanced}"))?;
    Ok(format!("1200 cases agree ({balanced} balanced, {unbalanced} unbalanced)"))
}

fn enumeration_counts() -> Outcome {
    let mut counts = Vec::new();
    for n in 3..=7u32 {
        let types = enumerate_tree_types(n as usize, TypeFilter::Trivalent).map_err(|e| e.to_string())?;
        let expected = double_factorial(2 * n as i64 - 5);
        ensure(types.len() as u64 == expected, || format!("n={n}: {} types, expected {expected}", types.len()))?;
        let ours: BTreeSet<_> = types.iter().map(|t| split_system(t.tree())).collect();
        let oracle: BTreeSet<_> =
            compatible_systems(n).into_iter().filter(|s| s.len() == n as usize - 3).collect();
        ensure(ours == oracle, || format!("n={n}: split systems differ from exhaustive generator"))?;
        counts.push(types.len().to_string());
    }
    Ok(format!("trivalent counts {} match (2n-5)!! and the split-system generator", counts.join(", ")))
}

fn product_certificates() -> Outcome {
    let mut rng = rng(5);
    let mut runs = 0;
    for n in 3..=6 {
        for _ in 0..10 {
            let sigma = random_zero_sum(&mut rng, n, 5);
            let cx = build_map_moduli(n, &sigma).map_err(|e| e.to_string())?;
            for mc in cx.maximal_cones() {
                ensure(mc.cone.dim() == n - 2, || format!("n={n}: maximal cone {} has dim {}", mc.type_key, mc.cone.dim()))?;
            }
            for leg in 1..=n as u32 {
                let report = product_decomposition(n, &sigma, leg).map_err(|e| e.to_string())?;
                ensure(report.certified, || format!("n={n} {sigma:?} leg {leg} not certified"))?;
                runs += 1;
            }
        }
    }
    Ok(format!("{runs} (n, sigma, leg) certificates; maximal cones of dimension n-2"))
}

fn distinct_splittings() -> Outcome {
    let mut rng = rng(6);
    let mut pairs = 0;
    for n in 4..=6 {
        for _ in 0..3 {
            let sigma = random_generic(&mut rng, n);
            let cx = build_map_moduli(n, &sigma).map_err(|e| e.to_string())?;
            for leg in 1..=n as u32 {
                let report = product_decomposition(n, &sigma, leg).map_err(|e| e.to_string())?;
                ensure(report.witnesses.len() == n - 1, || "missing witnesses".into())?;
                for w in &report.witnesses {
                    let WitnessOutcome::Found(p) = &w.outcome else {
                        return Err(format!("n={n} {sigma:?}: no witness for legs {leg}, {}", w.other_leg));
                    };
                    let mc = cx.cone(&p.type_key).ok_or("witness on unknown cone")?;
                    let region = mc.cone.polyhedron().map_err(|e| e.to_string())?;
                    ensure(region.contains(&p.point), || "witness outside its cone".into())?;
                    let tree = mc.tree.at_point(&p.point).map_err(|e| e.to_string())?;
                    let LinearOutcome::Unique(slopes) = balancing_oracle(&tree, sigma.slopes()) else {
                        return Err("oracle failed on witness tree".into());
                    };
                    let at = |l: u32| tree.leg(l).unwrap().at;
                    let values =
                        walk_values(&tree, &common::concrete_lengths(&tree), &slopes, at(leg), p.value_at_leg.clone());
                    ensure(values[&at(w.other_leg)] == p.value_at_other, || "witness values inconsistent".into())?;
                    ensure(p.value_at_leg != p.value_at_other, || "witness splittings agree".into())?;
                    pairs += 1;
                }
            }
        }
    }
    Ok(format!("{pairs} ordered leg pairs separated by verified witness points"))
}

fn sample_point(rng: &mut impl Rng, coords: &[(String, CoordSign)]) -> BTreeMap<String, BigRational> {
    coords
        .iter()
        .map(|(name, sign)| {
            let num = match sign {
                CoordSign::Nonneg => rng.gen_range(0..=8),
                CoordSign::Free => rng.gen_range(-12..=12),
            };
            (name.clone(), frac(num, rng.gen_range(1..=3)))
        })
        .collect()
}

fn subdivision_soundness() -> Outcome {
    let mut rng = rng(7);
    let p1 = Fan::projective_line();
    let mut samples = 0;
    for n in 3..=5 {
        for _ in 0..3 {
            let sigma = random_zero_sum(&mut rng, n, 4);
            let sub = subdivide_map_moduli(n, std::slice::from_ref(&sigma), &p1).map_err(|e| e.to_string())?;
            ensure(sub.statistics.face_consistent, || format!("n={n} {sigma:?}: faces disagree"))?;
            for (mc, cones) in sub.complex.cones.iter().zip(&sub.subdivisions) {
                let coords: Vec<(String, CoordSign)> =
                    mc.cone.coords().iter().map(|c| (c.name.clone(), c.sign)).collect();
                let cells: Vec<Polyhedron> =
                    cones.cells.iter().map(|c| c.polyhedron(&cones.coords).unwrap()).collect();
                for (cell, poly) in cones.cells.iter().zip(&cells) {
                    ensure(poly.contains(&cell.witness), || "cell witness outside cell".into())?;
                }
                let LinearOutcome::Unique(slopes) = balancing_oracle(&mc.tree, sigma.slopes()) else {
                    return Err("oracle failed".into());
                };
                for _ in 0..1000 {
                    let point = sample_point(&mut rng, &coords);
                    let lengths: Vec<BigRational> =
                        (0..mc.tree.edges().len()).map(|i| point[&Tree::edge_coordinate(i)].clone()).collect();
                    let values = walk_values(&mc.tree, &lengths, &slopes, VertexId(0), point["c"].clone());
                    let containing: Vec<usize> = (0..cells.len()).filter(|&k| cells[k].contains(&point)).collect();
                    ensure(!containing.is_empty(), || format!("{point:?} in no cell of {}", mc.type_key))?;
                    for &k in &containing {
                        for a in &cones.cells[k].assignment {
                            let gens = p1.cones()[a.cone].gens();
                            let v = &values[&a.vertex];
                            let fits = match gens.first().map(|g| g[0]) {
                                None => v.is_zero(),
                                Some(s) => (v * int(s)) >= BigRational::zero(),
                            };
                            ensure(fits, || format!("vertex {:?} value {v} not in assigned cone", a.vertex))?;
                        }
                    }
                    let interior = containing.iter().any(|&k| {
                        cones.cells[k].halfspaces.iter().all(|h| h.eval(&point).unwrap().is_positive())
                    });
                    ensure(!interior || containing.len() == 1, || format!("interior point {point:?} in several cells"))?;
                    samples += 1;
                }
            }
        }
    }

    for n in 3..=5 {
        let sigma = random_zero_sum(&mut rng, n, 4);
        let sub = subdivide_map_moduli(n, std::slice::from_ref(&sigma), &Fan::whole_space(1)).map_err(|e| e.to_string())?;
        for (mc, s) in sub.complex.cones.iter().zip(&sub.subdivisions) {
            ensure(s.cells.len() == 1, || "trivial fan split a cone".into())?;
            let cell = s.cells[0].polyhedron(&s.coords).unwrap();
            ensure(cell.same_set(&mc.cone.polyhedron().unwrap()), || "trivial fan changed a cone".into())?;
        }
    }

    let three = subdivide_map_moduli(3, &[ContactOrder::new(vec![1, 1, -2])], &p1).map_err(|e| e.to_string())?;
    ensure(three.statistics.total_maximal_cells == 2, || "n=3 worked case".into())?;
    let four = subdivide_map_moduli(4, &[ContactOrder::new(vec![1, 1, 1, -3])], &p1).map_err(|e| e.to_string())?;
    let count = four.statistics.cells_per_cone["(1,2,(3,4))"];
    ensure(count == 3, || format!("n=4 worked case gave {count} cells"))?;
    Ok(format!("{samples} sampled points covered, interiors unique; trivial fan is the identity; worked cases give 2 and 3 cells"))
}

fn random_self_map(rng: &mut impl Rng) -> SelfMapNormalForm {
    let translation = if rng.gen_bool(0.5) {
        AffineExpr::constant(frac(rng.gen_range(-20..=20), rng.gen_range(1..=4)))
    } else {
        AffineExpr::term("a", int(rng.gen_range(-3..=3))) + AffineExpr::from(rng.gen_range(-5..=5))
    };
    classify_self_map(rng.gen_range(-5..=5), translation)
}

fn self_map_algebra() -> Outcome {
    let mut rng = rng(8);
    let id = SelfMapNormalForm::identity();
    ensure(id == classify_self_map(1, AffineExpr::zero()) && id.kernel_order == 1, || "identity record".into())?;
    for _ in 0..1200 {
        let (f, g, h) = (random_self_map(&mut rng), random_self_map(&mut rng), random_self_map(&mut rng));
        ensure(f.compose(&g).compose(&h) == f.compose(&g.compose(&h)), || format!("not associative: {f:?} {g:?} {h:?}"))?;
        let fg = f.compose(&g);
        ensure(fg.degree == f.degree * g.degree, || "degree not multiplicative".into())?;
        ensure(fg.kernel_order == fg.degree.unsigned_abs(), || "kernel order".into())?;
        ensure(f.compose(&id) == f && id.compose(&f) == f, || "identity not neutral".into())?;
        let t = AffineExpr::var("t");
        ensure(fg.apply(&t) == f.apply(&g.apply(&t)), || "composition differs from substitution".into())?;
    }
    Ok("1200 random triples: associative, multiplicative degree, |degree| kernel, (1,0) neutral".into())
}

fn incident_slopes(p: &TropicalMapPoint, v: VertexId) -> Vec<i64> {
    let tree = p.tree();
    p.functions()
        .iter()
        .flat_map(|f| {
            let edges = tree.incident(v).into_iter().map(|(i, _)| f.slope(i, v));
            let legs = tree.legs_at(v).into_iter().map(|l| f.leg_slopes()[&l]);
            edges.chain(legs).collect::<Vec<_>>()
        })
        .collect()
}

fn leg_values(p: &TropicalMapPoint) -> Vec<Vec<AffineExpr>> {
    p.functions()
        .iter()
        .map(|f| p.tree().legs().iter().map(|l| f.value_at(l.at).unwrap()).collect())
        .collect()
}

fn stabilization() -> Outcome {
    let mut rng = rng(9);
    let mut planted_unstable = 0;
    let mut kept_nonconstant = 0;
    for _ in 0..300 {
        let n = rng.gen_range(3..=8);
        let mut tree = random_tree(&mut rng, n);
        for _ in 0..rng.gen_range(1..=3) {
            let len = |rng: &mut rand_chacha::ChaCha8Rng| Length::Concrete(int(rng.gen_range(1..6)));
            if tree.edges().is_empty() || rng.gen_bool(0.4) {
                let at = random_vertex(&mut rng, &tree);
                tree = tree.attach_vertex(at, len(&mut rng)).unwrap().0;
            } else {
                let e = rng.gen_range(0..tree.edges().len());
                tree = tree.subdivide_edge(e, len(&mut rng), len(&mut rng)).unwrap().0;
            }
        }
        let m = rng.gen_range(1..=2);
        let contact: Vec<ContactOrder> = (0..m).map(|_| random_zero_sum(&mut rng, n, 2)).collect();
        let values: Vec<BigRational> = (0..m).map(|_| int(rng.gen_range(-5..=5))).collect();
        let base = random_vertex(&mut rng, &tree);
        let p = TropicalMapPoint::from_contact(tree.clone(), &contact, base, &values).map_err(|e| e.to_string())?;

        let unstable = |q: &TropicalMapPoint, v: VertexId| {
            q.tree().valence(v) < 3 && incident_slopes(q, v).iter().all(|&s| s == 0)
        };
        let nonconstant_two_valent: Vec<VertexId> = tree
            .vertices()
            .iter()
            .copied()
            .filter(|&v| tree.valence(v) == 2 && incident_slopes(&p, v).iter().any(|&s| s != 0))
            .collect();
        let had_unstable = tree.vertices().iter().any(|&v| unstable(&p, v));

        let s = stabilize(&p);
        ensure(stabilize(&s) == s, || "not idempotent".into())?;
        ensure(s.functions().iter().all(|f| f.is_balanced()), || "balancing lost".into())?;
        ensure(s.contact() == p.contact(), || "contact data changed".into())?;
        ensure(leg_values(&s) == leg_values(&p), || "values at legs changed".into())?;
        ensure(!s.tree().vertices().iter().any(|&v| unstable(&s, v)), || "unstable vertex left".into())?;
        ensure(s.tree().validate().is_valid(), || "invalid result tree".into())?;
        for v in &nonconstant_two_valent {
            ensure(s.tree().has_vertex(*v), || format!("contracted nonconstant 2-valent vertex {v:?}"))?;
        }
        if !had_unstable {
            ensure(s == p, || "stable point changed".into())?;
        } else {
            planted_unstable += 1;
        }
        kept_nonconstant += nonconstant_two_valent.len();
    }
    ensure(planted_unstable >= 200, || format!("only {planted_unstable} points had unstable vertices"))?;
    Ok(format!(
        "{planted_unstable} points with planted unstable vertices stabilized idempotently; {kept_nonconstant} nonconstant 2-valent vertices kept"
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("existence and uniqueness of balanced extensions", existence_uniqueness),
        ("kernel constancy", kernel_constancy),
        ("balancing iff zero multidegree", balancing_multidegree),
        ("trivalent enumeration counts", enumeration_counts),
        ("product decomposition certificates", product_certificates),
        ("distinct splittings", distinct_splittings),
        ("subdivision soundness", subdivision_soundness),
        ("self-map algebra", self_map_algebra),
        ("stabilization", stabilization),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail} [{secs:.1}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why} [{secs:.1}s]", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
