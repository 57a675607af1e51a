mod common;

use common::*;
use sparsefo::augment::{degeneracy_orient, functionalize, UndirectedGraph};
use sparsefo::compiler::Limits;
use sparsefo::cost;
use sparsefo::engine::Engine;
use sparsefo::model::{adjacency_graph, FunctionalGraph, RelationalStructure};
use sparsefo::runtime::{eval_unary, AtomIndex, Program};

const DIST2: &str = "exists z. E(x,z) & E(z,y)";
const EXAMPLE_B: &str = "E(x,y) & E(y,z) & ~E(x,z) & x != z";

fn p3() -> RelationalStructure {
    RelationalStructure::parse("node 1\nnode 2\nnode 3\nedge 1 2\nedge 2 3").unwrap()
}

fn p3_functional() -> FunctionalGraph {
    let ug = UndirectedGraph::from_structure(&p3(), "E").unwrap();
    functionalize(&degeneracy_orient(&ug))
}

fn unary_ids(g: FunctionalGraph, q: &str) -> Vec<u64> {
    let mut e = Engine::functional(g, Limits::default());
    let q = e.parse(q).unwrap();
    let p = e.prepare(&q).unwrap();
    let vs = eval_unary(&p.program, &p.index, e.domain_len());
    e.ids(&vs)
}

#[test]
fn index_records_images_and_colors() {
    let g = p3_functional();
    let mut idx = AtomIndex::new();
    let f1 = g.signature().func_by_name("f_1").unwrap();
    let s = idx.func(&g, f1);
    assert_eq!(idx.table(s), &[1, 2, 2]);
    let single = FunctionalGraph::new(vec![7]);
    assert!(single.signature().funcs().is_empty());
    let d = RelationalStructure::parse("node 1\nnode 2\nrel E 2\nE 1 2").unwrap();
    let a = adjacency_graph(&d);
    let mut idx = AtomIndex::new();
    let c = idx.color(&a.graph, a.relation_color("E").unwrap());
    assert!(idx.has(c, 2));
    let images: Vec<u32> = a.components.iter().map(|&f| a.graph.apply(f, 2)).collect();
    assert_eq!(images, vec![0, 1]);
}

#[test]
fn unary_examples() {
    assert_eq!(unary_ids(p3_functional(), "f_1(x) != x"), vec![1, 2]);
    assert!(unary_ids(p3_functional(), "x != x").is_empty());
    let s = RelationalStructure::parse("node 1\nnode 2\nnode 3\nrel P 1\nP 3\nP 1").unwrap();
    let mut e = Engine::new(&s, Limits::default()).unwrap();
    let q = e.parse("P(x)").unwrap();
    let p = e.prepare(&q).unwrap();
    assert_eq!(e.ids(&eval_unary(&p.program, &p.index, e.domain_len())), vec![1, 3]);
}

#[test]
fn membership_examples() {
    let mut e = Engine::new(&p3(), Limits::default()).unwrap();
    let q = e.parse(DIST2).unwrap();
    let p = e.prepare(&q).unwrap();
    assert!(e.test(&p, &[1, 3]).unwrap());
    assert!(!e.test(&p, &[1, 2]).unwrap());
    assert!(e.test(&p, &[2, 2]).unwrap());
    assert!(matches!(e.test(&p, &[1]), Err(sparsefo::Error::TupleArity { .. })));
    assert!(matches!(e.test(&p, &[1, 999]), Err(sparsefo::Error::UnknownVertex(999))));
}

#[test]
fn model_check_examples() {
    let mut e = Engine::new(&p3(), Limits::default()).unwrap();
    let q = e.parse("exists x. exists y. exists z. E(x,z) & E(z,y)").unwrap();
    assert!(e.check(&q).unwrap());
    let edgeless = RelationalStructure::from_edges(4, &[]);
    let mut e = Engine::new(&edgeless, Limits::default()).unwrap();
    let q = e.parse("exists x. exists y. exists z. E(x,z) & E(z,y)").unwrap();
    assert!(!e.check(&q).unwrap());
    let mut e = Engine::new(&cycle(3), Limits::default()).unwrap();
    let q = e.parse(&format!("exists x. exists y. exists z. {EXAMPLE_B}")).unwrap();
    assert!(!e.check(&q).unwrap());
}

#[test]
fn membership_steps_do_not_depend_on_size() {
    let mut counts = Vec::new();
    for n in [100, 1000, 10000] {
        let mut e = Engine::new(&path(n), Limits::default()).unwrap();
        let q = e.parse(DIST2).unwrap();
        let p = e.prepare(&q).unwrap();
        let mut per = Vec::new();
        for t in [[0, 2], [5, 5], [3, 4], [n as u32 - 1, n as u32 - 3]] {
            let (_, s) = cost::measure(|| e.test_positions(&p, &t).unwrap());
            per.push(s);
        }
        counts.push(per);
    }
    assert_eq!(counts[0], counts[1]);
    assert_eq!(counts[1], counts[2]);
}

#[test]
fn program_steps_are_uniform_over_tuples() {
    let mut e = Engine::new(&grid(4, 4), Limits::default()).unwrap();
    let q = e.parse(EXAMPLE_B).unwrap();
    let p = e.prepare(&q).unwrap();
    let mut seen = std::collections::BTreeSet::new();
    for t in [[0, 1, 2], [5, 6, 9], [15, 14, 13], [3, 3, 3]] {
        let (_, s) = cost::measure(|| Program::test(&p.program, &p.index, &t));
        seen.insert(s);
    }
    assert_eq!(seen.len(), 1);
}

#[test]
fn unary_output_is_sorted_and_unique() {
    let mut r = rng(3);
    for _ in 0..10 {
        let s = with_color(&random_tree(12, &mut r), "B", &mut r);
        let mut e = Engine::new(&s, Limits::default()).unwrap();
        let q = e.parse("exists y. E(x,y) & B(y)").unwrap();
        let p = e.prepare(&q).unwrap();
        let vs = eval_unary(&p.program, &p.index, e.domain_len());
        assert!(vs.windows(2).all(|w| w[0] < w[1]));
    }
}
