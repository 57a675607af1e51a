mod common;

use std::collections::BTreeSet;

use common::*;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use sparsefo::compiler::{y_dnf, Expr, Limits, Term, Workspace};
use sparsefo::engine::Engine;
use sparsefo::enumeration::{linear_next, merge_lex, zeta, CandidateList, Key, ShortcutIndex};
use sparsefo::model::{BitSet, ColorOrigin, FuncOrigin, FunctionalGraph};
use sparsefo::oracle::{naive_count, naive_positions, DEFAULT_BUDGET};

const WIDTH: usize = 3;

fn random_graph(n: usize, r: &mut impl Rng) -> FunctionalGraph {
    let mut g = FunctionalGraph::new((0..n as u64).collect());
    for name in ["f", "g"] {
        let t = (0..n).map(|_| r.gen_range(0..n as u32)).collect();
        g.add_table(name, 0, FuncOrigin::Base, t);
    }
    for name in ["A", "B"] {
        let mut s = BitSet::new(n);
        (0..n as u32).filter(|_| r.gen_bool(0.5)).for_each(|u| s.insert(u));
        g.add_color(name, ColorOrigin::Base, s);
    }
    g
}

fn random_term(r: &mut impl Rng) -> Term {
    let v = r.gen_range(0..WIDTH as u32);
    match r.gen_range(0..3) {
        0 => Term::var(v),
        f => Term::app(f - 1, v),
    }
}

fn random_expr(depth: usize, r: &mut impl Rng) -> Expr {
    if depth == 0 || r.gen_bool(0.3) {
        return match r.gen_range(0..3) {
            0 => Expr::eq(random_term(r), random_term(r)),
            1 => Expr::neq(random_term(r), random_term(r)),
            _ => Expr::color(r.gen_range(0..2), random_term(r)),
        };
    }
    let parts: Vec<Expr> = (0..r.gen_range(2..4)).map(|_| random_expr(depth - 1, r)).collect();
    match r.gen_range(0..3) {
        0 => Expr::and(parts),
        1 => Expr::or(parts),
        _ => Expr::not(parts.into_iter().next().unwrap()),
    }
}

fn equivalent(g: &FunctionalGraph, a: &Expr, b: &Expr) -> bool {
    let n = g.len() as u32;
    (0..n.pow(WIDTH as u32)).all(|code| {
        let env: Vec<u32> = (0..WIDTH as u32).map(|i| code / n.pow(i) % n).collect();
        a.eval(g, &mut env.clone()) == b.eval(g, &mut env.clone())
    })
}

fn sorted_set(n: u32, r: &mut impl Rng) -> Vec<u32> {
    let mut v: Vec<u32> = (0..n).filter(|_| r.gen_bool(0.4)).collect();
    v.sort_unstable();
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pointers_agree_with_a_linear_scan(seed in any::<u64>(), gamma in 0usize..4, slots in 1usize..3) {
        let mut r = rng(seed);
        let n = 12;
        let members = sorted_set(n as u32, &mut r);
        let anchors: Vec<u32> = (0..n).map(|_| r.gen_range(0..3)).collect();
        let list = CandidateList::build(n, &members, |u| anchors[u as usize]);
        let tables: Vec<Vec<u32>> = (0..slots).map(|_| (0..n).map(|_| r.gen_range(0..5)).collect()).collect();
        let images: Vec<&[u32]> = tables.iter().map(Vec::as_slice).collect();
        let sc = ShortcutIndex::build(n, &members, &list, &images, gamma);
        for &u in &members {
            prop_assert!(sc.pointers(u).len() as u64 <= zeta(slots, gamma));
            let tail = list.list(anchors[u as usize]);
            for _ in 0..8 {
                let mut key: Key = (0..r.gen_range(0..=gamma))
                    .map(|_| (r.gen_range(0..slots) as u8, r.gen_range(0..5)))
                    .collect::<BTreeSet<_>>()
                    .into_iter()
                    .collect();
                key.truncate(gamma);
                prop_assert_eq!(sc.next(u, &key).unwrap(), linear_next(&tail, u, &images, &key));
            }
        }
    }

    #[test]
    fn merge_is_the_sorted_union(seed in any::<u64>(), k in 0usize..5) {
        let mut r = rng(seed);
        let streams: Vec<Vec<u32>> = (0..k).map(|_| sorted_set(30, &mut r)).collect();
        let want: Vec<u32> = streams.iter().flatten().copied().collect::<BTreeSet<_>>().into_iter().collect();
        let got: Vec<u32> = merge_lex(streams.into_iter().map(Vec::into_iter)).collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn y_dnf_preserves_meaning(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = random_graph(4, &mut r);
        let e = random_expr(3, &mut r);
        let y = r.gen_range(0..WIDTH as u32);
        let ds = y_dnf(&e, y, 4096).unwrap();
        let back = Expr::or(ds.iter().map(|d| d.to_expr()));
        prop_assert!(equivalent(&g, &e, &back), "{:?}", e);
        for d in &ds {
            prop_assert!(!d.x.mentions(y));
            prop_assert!(d.yloc.free_vars().iter().all(|&v| v == y));
        }
    }

    #[test]
    fn simplify_preserves_meaning(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = random_graph(4, &mut r);
        let e = random_expr(3, &mut r);
        let s = e.simplify();
        prop_assert!(equivalent(&g, &e, &s), "{:?} became {:?}", e, s);
        prop_assert!(s.size() <= e.size() || s.size() <= 1);
    }

    #[test]
    fn compress_unary_preserves_meaning(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = random_graph(4, &mut r);
        let e = random_expr(3, &mut r);
        let mut ws = Workspace::new(g, Limits::default());
        let c = ws.compress_unary(&e);
        prop_assert!(equivalent(ws.graph(), &e, &c), "{:?} became {:?}", e, c);
    }
}

const QUERIES: &[&str] = &[
    "exists z. E(x,z) & E(z,y)",
    "E(x,y) & ~B(y)",
    "exists z. E(x,z) & B(z) & z != y",
    "E(x,y) & E(y,z) & x != z",
    "forall z. ~E(x,z) | B(z)",
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn engine_agrees_with_the_oracle(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(3..9);
        let s = with_color(&random_bounded(n, 3, 2 * n, &mut r), "B", &mut r);
        let q = *QUERIES.choose(&mut r).unwrap();
        let mut e = Engine::new(&s, Limits::default()).unwrap();
        let query = e.parse(q).unwrap();
        let want = naive_positions(&query, &s, DEFAULT_BUDGET).unwrap();
        prop_assert_eq!(e.enumerate_all(&query).unwrap(), want, "{}", q);
        let count = naive_count(&query, &s, DEFAULT_BUDGET).unwrap();
        prop_assert_eq!(e.count(&query).unwrap(), sparsefo::Count::from(count), "{}", q);
    }
}
