mod common;

use std::collections::BTreeMap;

use common::*;
use sparsefo::augment::{degeneracy_orient, functionalize, UndirectedGraph};
use sparsefo::compiler::{DeltaEq, Disjunct, Expr, Limits, NeqClause, PType, Term, Workspace};
use sparsefo::cost;
use sparsefo::counting::{split_inequality, Counter, Weights};
use sparsefo::engine::Engine;
use sparsefo::model::{BitSet, ColorOrigin, FuncOrigin, FunctionalGraph, RelationalStructure};
use sparsefo::Count;

const X: u32 = 0;
const Y: u32 = 1;

fn p3_functional() -> FunctionalGraph {
    let s = RelationalStructure::parse("node 1\nnode 2\nnode 3\nedge 1 2\nedge 2 3").unwrap();
    let ug = UndirectedGraph::from_structure(&s, "E").unwrap();
    functionalize(&degeneracy_orient(&ug))
}

fn brute(g: &FunctionalGraph, e: &Expr, weights: &Weights<u64>) -> u64 {
    let n = g.len() as u32;
    let k = weights.len();
    let mut total = 0;
    let mut env = vec![0u32; k];
    loop {
        if e.eval(g, &mut env.clone()) {
            total += env
                .iter()
                .enumerate()
                .map(|(i, &v)| weights[i].as_ref().map_or(1, |a| a[v as usize]))
                .product::<u64>();
        }
        let mut i = k;
        loop {
            if i == 0 {
                return total;
            }
            i -= 1;
            env[i] += 1;
            if env[i] < n {
                break;
            }
            env[i] = 0;
        }
    }
}

fn weighted(ws: &mut Workspace, e: &Expr, weights: &Weights<u64>) -> u64 {
    Counter::new(ws).weighted(e, weights).unwrap().unwrap()
}

/// Vertices 0..8; `f` maps `u` to `u / 2`, `g` maps `u` to `u / 4`, and
/// color `T` marks the vertices above 1.
fn halving() -> (FunctionalGraph, [u32; 2], u32) {
    let n = 8u32;
    let mut g = FunctionalGraph::new((0..n as u64).collect());
    let f = g.add_table("f", 0, FuncOrigin::Base, (0..n).map(|u| u / 2).collect());
    let h = g.add_table("g", 0, FuncOrigin::Base, (0..n).map(|u| u / 4).collect());
    let mut t = BitSet::new(n as usize);
    (2..n).for_each(|u| t.insert(u));
    let c = g.add_color("T", ColorOrigin::Base, t);
    (g, [f, h], c)
}

fn ptype(f: u32, h: u32) -> PType {
    PType {
        syms: vec![f, h],
        ranks: vec![1, 2],
        m: 2,
        links: BTreeMap::from([((1, 2), f)]),
    }
}

fn disjunct(color: u32, ptype: PType, eq: DeltaEq, neq: Vec<NeqClause>) -> Disjunct {
    Disjunct {
        psi1: Expr::Const(true),
        ptype,
        color,
        eq,
        neq,
    }
}

#[test]
fn dist2_and_example_b_counts() {
    let s = RelationalStructure::parse("node 1\nnode 2\nnode 3\nedge 1 2\nedge 2 3").unwrap();
    let mut e = Engine::new(&s, Limits::default()).unwrap();
    let q = e.parse("exists z. E(x,z) & E(z,y)").unwrap();
    assert_eq!(e.count(&q).unwrap(), Count::from(5u32));
    let mut e = Engine::new(&cycle(3), Limits::default()).unwrap();
    let q = e.parse("E(x,y) & E(y,z) & ~E(x,z) & x != z").unwrap();
    assert_eq!(e.count(&q).unwrap(), Count::from(0u32));
}

#[test]
fn unary_color_count_is_cardinality() {
    let mut r = rng(11);
    for _ in 0..5 {
        let s = with_color(&random_tree(15, &mut r), "B", &mut r);
        let want = s.relation("B").unwrap().tuples.len();
        let mut e = Engine::new(&s, Limits::default()).unwrap();
        let q = e.parse("B(x)").unwrap();
        assert_eq!(e.count(&q).unwrap(), Count::from(want));
    }
}

#[test]
fn color_alone_counts_its_members() {
    let (g, _, t) = halving();
    let mut ws = Workspace::new(g, Limits::default());
    let e = Expr::color(t, Term::var(X));
    assert_eq!(weighted(&mut ws, &e, &vec![None]), 6);
}

#[test]
fn weights_fold_through_a_y_equality() {
    let g = p3_functional();
    let f1 = g.signature().func_by_name("f_1").unwrap();
    let n = g.len();
    let mut ws = Workspace::new(g.clone(), Limits::default());
    let e = Expr::eq(Term::var(Y), Term::app(f1, X));
    let w: Weights<u64> = vec![Some(vec![2; n]), Some(vec![3; n])];
    let xs = (0..n as u32).filter(|&x| e.eval(&g, &mut vec![x, g.apply(f1, x)])).count() as u64;
    assert_eq!(weighted(&mut ws, &e, &w), 6 * xs);
    assert_eq!(brute(&g, &e, &w), 6 * xs);
}

#[test]
fn split_with_empty_equality_gives_y_equality() {
    let (g, [f, h], t) = halving();
    let mut ws = Workspace::new(g, Limits::default());
    let clause = NeqClause { sym: None, rank: 0, x: Term::app(f, X) };
    let d = disjunct(t, ptype(f, h), DeltaEq::None, vec![clause]);
    let (minus, plus) = split_inequality(&mut ws, &d).unwrap();
    assert!(minus.neq.is_empty());
    assert_eq!(plus.eq, DeltaEq::Y(Term::app(f, X)));
    assert!(plus.neq.is_empty());
    let w = vec![None, None];
    let (a, b, c) = (
        brute(ws.graph(), &d.to_expr(Y), &w),
        brute(ws.graph(), &minus.to_expr(Y), &w),
        brute(ws.graph(), &plus.to_expr(Y), &w),
    );
    assert_eq!(a + c, b);
}

#[test]
fn split_beside_a_y_equality_moves_into_psi1() {
    let (g, [f, h], t) = halving();
    let mut ws = Workspace::new(g, Limits::default());
    let clause = NeqClause { sym: Some(h), rank: 2, x: Term::app(f, X) };
    let d = disjunct(t, ptype(f, h), DeltaEq::Y(Term::app(f, X)), vec![clause]);
    let (minus, plus) = split_inequality(&mut ws, &d).unwrap();
    assert_eq!(plus.eq, DeltaEq::Y(Term::app(f, X)));
    assert!(plus.neq.is_empty() && minus.neq.is_empty());
    assert!(!plus.psi1.mentions(Y));
    assert!(plus.psi1.funcs().len() >= 2, "{:?}", plus.psi1);
    let w: Weights<u64> = vec![Some((1..=8).collect()), Some(vec![5; 8])];
    let whole = brute(ws.graph(), &d.to_expr(Y), &w);
    assert_eq!(whole + brute(ws.graph(), &plus.to_expr(Y), &w), brute(ws.graph(), &minus.to_expr(Y), &w));
    assert_eq!(weighted(&mut ws, &d.to_expr(Y), &w), whole);
}

#[test]
fn split_beside_an_f_equality_substitutes_y() {
    let (g, [f, h], t) = halving();
    let mut ws = Workspace::new(g, Limits::default());
    let clause = NeqClause { sym: None, rank: 0, x: Term::var(X) };
    let eq = DeltaEq::F { sym: h, rank: 2, x: Term::app(f, X) };
    let d = disjunct(t, ptype(f, h), eq, vec![clause]);
    let (minus, plus) = split_inequality(&mut ws, &d).unwrap();
    assert_eq!(plus.eq, DeltaEq::Y(Term::var(X)));
    let moved = Expr::eq(Term::app(h, X), Term::app(f, X));
    let parts = match &plus.psi1 {
        Expr::And(ps) => ps.clone(),
        other => vec![other.clone()],
    };
    assert!(parts.contains(&moved) || parts.contains(&Expr::eq(Term::app(f, X), Term::app(h, X))), "{:?}", plus.psi1);
    let w: Weights<u64> = vec![Some(vec![2; 8]), Some((0..8).collect())];
    let whole = brute(ws.graph(), &d.to_expr(Y), &w);
    assert_eq!(whole + brute(ws.graph(), &plus.to_expr(Y), &w), brute(ws.graph(), &minus.to_expr(Y), &w));
}

#[test]
fn one_inequality_matches_brute_force_on_small_graphs() {
    let mut r = rng(5);
    for n in [4usize, 6, 8, 10] {
        let s = random_bounded(n, 3, 3 * n, &mut r);
        let ug = UndirectedGraph::from_structure(&s, "E").unwrap();
        let g = functionalize(&degeneracy_orient(&ug));
        let Some(f1) = g.signature().func_by_name("f_1") else { continue };
        let mut all = BitSet::new(n);
        (0..n as u32).for_each(|u| all.insert(u));
        let mut g2 = g.clone();
        let c = g2.add_color("all", ColorOrigin::Base, all);
        let pt = PType {
            syms: vec![f1],
            ranks: vec![1],
            m: 1,
            links: BTreeMap::new(),
        };
        let clause = NeqClause { sym: None, rank: 0, x: Term::var(X) };
        let eq = DeltaEq::F { sym: f1, rank: 1, x: Term::app(f1, X) };
        let d = disjunct(c, pt, eq, vec![clause]);
        let w: Weights<u64> = vec![Some((1..=n as u64).collect()), Some(vec![2; n])];
        let mut ws = Workspace::new(g2.clone(), Limits::default());
        let want = brute(&g2, &d.to_expr(Y), &w);
        assert_eq!(weighted(&mut ws, &d.to_expr(Y), &w), want, "n = {n}");
    }
}

#[test]
fn audited_counts_agree_with_the_oracle() {
    let mut r = rng(8);
    for q in ["exists z. E(x,z) & E(z,y) & x != y", "E(x,y) & ~B(y)", "exists z. E(x,z) & B(z) & z != y"] {
        let s = with_color(&random_tree(9, &mut r), "B", &mut r);
        let mut e = Engine::new(&s, Limits::default()).unwrap();
        let query = e.parse(q).unwrap();
        let (n, audit) = e.count_audited(&query, 1_000_000).unwrap();
        let want = sparsefo::oracle::naive_count(&query, &s, 1_000_000).unwrap();
        assert_eq!(n, Count::from(want), "{q}");
        assert!(audit.ok(), "{:?}", audit.failures);
    }
}

#[test]
fn counting_steps_grow_linearly_on_grids() {
    let mut per = Vec::new();
    for side in [32usize, 100] {
        let s = grid(side, side);
        let mut e = Engine::new(&s, Limits::default()).unwrap();
        let q = e.parse("exists z. E(x,z) & E(z,y)").unwrap();
        let (c, steps) = cost::measure(|| e.count(&q).unwrap());
        assert!(c > Count::from(0u32));
        per.push(steps as f64 / (side * side) as f64);
    }
    let ratio = per[1] / per[0];
    assert!((0.8..=1.2).contains(&ratio), "steps per vertex {per:?}");
}
