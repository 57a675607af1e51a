mod common;

use sparsefo::compiler::{
    beta_p, compile_expr, compute_witness, eliminate, normalize, Atom, DeltaEq, Disjunct, Expr, Limits, NeqClause,
    PType, Term, Witness, Workspace,
};
use sparsefo::model::{BitSet, ColorOrigin, FuncOrigin, FunctionalGraph};

const X: u32 = 0;
const Y: u32 = 1;
const Z: u32 = 2;

/// Vertices 4 and 5 carry `f` and `g` images; `h` links the `f` image to
/// the `g` image. Color `T` marks 4 and 5.
fn fraternal() -> (FunctionalGraph, [u32; 3]) {
    let mut g = FunctionalGraph::new((1..=6).collect());
    let f = g.add_table("f", 0, FuncOrigin::Base, vec![0, 1, 2, 3, 0, 2]);
    let gg = g.add_table("g", 0, FuncOrigin::Base, vec![0, 1, 2, 3, 1, 3]);
    let h = g.add_table("h", 0, FuncOrigin::Base, vec![1, 1, 3, 3, 4, 5]);
    let mut t = BitSet::new(6);
    t.insert(4);
    t.insert(5);
    g.add_color("T", ColorOrigin::Base, t);
    (g, [f, gg, h])
}

fn pairs(n: u32) -> impl Iterator<Item = (u32, u32)> {
    (0..n).flat_map(move |a| (0..n).map(move |b| (a, b)))
}

fn equivalent(g: &FunctionalGraph, a: &Expr, b: &Expr, width: usize) -> bool {
    pairs(g.len() as u32).all(|(x, y)| {
        let mut env = vec![x, y];
        env.resize(width, 0);
        let mut env2 = env.clone();
        a.eval(g, &mut env) == b.eval(g, &mut env2)
    })
}

fn disjuncts(e: &Expr) -> Vec<&Expr> {
    match e {
        Expr::Or(parts) => parts.iter().collect(),
        other => vec![other],
    }
}

fn conjuncts(e: &Expr) -> Vec<&Expr> {
    match e {
        Expr::And(parts) => parts.iter().collect(),
        other => vec![other],
    }
}

#[test]
fn example_a6_shape() {
    let (g, [f, gg, h]) = fraternal();
    let t = g.signature().color_by_name("T").unwrap();
    let mut ws = Workspace::new(g, Limits::default());
    let body = Expr::and([
        Expr::color(t, Term::var(Z)),
        Expr::eq(Term::app(f, Z), Term::var(X)),
        Expr::eq(Term::app(gg, Z), Term::var(Y)),
    ]);
    let (out, _) = eliminate(&mut ws, &body, Z).unwrap();
    let ds = disjuncts(&out);
    assert_eq!(ds.len(), 1, "{out:?}");
    let parts = conjuncts(ds[0]);
    assert_eq!(parts.len(), 2, "{out:?}");
    assert!(parts.contains(&&Expr::eq(Term::app(h, X), Term::var(Y))));
    let p = parts
        .iter()
        .find_map(|e| match e {
            Expr::Atom(Atom::Color(c, t)) if *t == Term::var(X) => Some(*c),
            _ => None,
        })
        .expect("a color on x");
    let marked: Vec<u32> = ws.graph().color_set(p).iter().collect();
    assert_eq!(marked, vec![0, 2]);
    assert!(equivalent(ws.graph(), &out, &Expr::exists(Z, body), 3));
}

#[test]
fn two_equalities_keep_one_and_link_the_other() {
    let (g, [f, gg, h]) = fraternal();
    let t = g.signature().color_by_name("T").unwrap();
    let mut ws = Workspace::new(g, Limits::default());
    let body = Expr::and([
        Expr::color(t, Term::var(Z)),
        Expr::eq(Term::app(f, Z), Term::var(X)),
        Expr::eq(Term::app(gg, Z), Term::var(Y)),
    ]);
    let nf = normalize(&mut ws, &body, Z).unwrap();
    assert_eq!(nf.disjuncts.len(), 1);
    let d = &nf.disjuncts[0];
    assert!(!d.psi1.mentions(Z));
    assert_eq!(d.eq, DeltaEq::F { sym: f, rank: 1, x: Term::var(X) });
    assert!(conjuncts(&d.psi1).contains(&&Expr::eq(Term::app(h, X), Term::var(Y))));
    assert_eq!(d.ptype.link(1, 2), h);
}

#[test]
fn y_equality_is_substituted() {
    let (g, [f, gg, h]) = fraternal();
    let mut ws = Workspace::new(g, Limits::default());
    let body = Expr::and([
        Expr::eq(Term::var(Z), Term::app(f, X)),
        Expr::eq(Term::app(gg, Z), Term::app(h, Y)),
    ]);
    let nf = normalize(&mut ws, &body, Z).unwrap();
    assert!(!nf.disjuncts.is_empty());
    for d in &nf.disjuncts {
        assert_eq!(d.eq, DeltaEq::Y(Term::app(f, X)));
        assert!(d.neq.is_empty());
        assert!(!d.psi1.mentions(Z));
    }
    let (out, _) = eliminate(&mut ws, &body, Z).unwrap();
    assert!(equivalent(ws.graph(), &out, &Expr::exists(Z, body), 3));
}

#[test]
fn normal_form_shape_on_mixed_formulas() {
    let (g, [f, gg, h]) = fraternal();
    let mut ws = Workspace::new(g, Limits::default());
    let body = Expr::or([
        Expr::and([
            Expr::eq(Term::app(f, Z), Term::var(X)),
            Expr::neq(Term::app(gg, Z), Term::var(Y)),
            Expr::neq(Term::var(Z), Term::app(h, Y)),
        ]),
        Expr::and([Expr::neq(Term::var(Z), Term::var(X)), Expr::eq(Term::app(h, Z), Term::var(Y))]),
    ]);
    let nf = normalize(&mut ws, &body, Z).unwrap();
    for d in &nf.disjuncts {
        assert!(!d.psi1.mentions(Z));
        assert!(matches!(d.eq, DeltaEq::None | DeltaEq::Y(_) | DeltaEq::F { .. }));
        assert!(d.neq.iter().all(|c| c.x.var != Z));
        for f in d.psi1.funcs() {
            assert!((f as usize) < ws.graph().signature().func_count());
        }
    }
    let (out, _) = eliminate(&mut ws, &body, Z).unwrap();
    assert!(equivalent(ws.graph(), &out, &Expr::exists(Z, body), 3));
}

#[test]
fn beta_arithmetic() {
    assert_eq!(beta_p(2, 1), 7);
    assert_eq!(beta_p(1, 1), 3);
    assert_eq!(beta_p(3, 2), 25);
}

/// Vertices 0..9 all map to 10 under `f2` and to distinct 11..20 under `f1`.
fn shared_anchor(colored: bool) -> (FunctionalGraph, Disjunct) {
    let n = 21;
    let mut g = FunctionalGraph::new((0..n as u64).collect());
    let mut t1: Vec<u32> = (0..n as u32).collect();
    let mut t2 = t1.clone();
    for u in 0..10 {
        t1[u] = 11 + u as u32;
        t2[u] = 10;
    }
    let f1 = g.add_table("f1", 0, FuncOrigin::Base, t1);
    let f2 = g.add_table("f2", 0, FuncOrigin::Base, t2);
    let mut set = BitSet::new(n);
    if colored {
        (0..10).for_each(|u| set.insert(u));
    }
    let color = g.add_color("tau", ColorOrigin::Base, set);
    let ptype = PType {
        syms: vec![f1, f2],
        ranks: vec![1, 2],
        m: 2,
        links: Default::default(),
    };
    let clause = |x| NeqClause { sym: Some(f1), rank: 1, x: Term::var(x) };
    let d = Disjunct {
        psi1: Expr::Const(true),
        ptype,
        color,
        eq: DeltaEq::F { sym: f2, rank: 2, x: Term::var(X) },
        neq: vec![clause(X), clause(Y)],
    };
    (g, d)
}

#[test]
fn witness_keeps_beta_candidates() {
    let (g, d) = shared_anchor(true);
    match compute_witness(&g, &d) {
        Witness::Anchored(w) => {
            assert_eq!(w[10], vec![0, 1, 2]);
            assert!(w.iter().enumerate().all(|(v, l)| v == 10 || l.is_empty()));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn witness_of_empty_type_is_empty() {
    let (g, d) = shared_anchor(false);
    let w = compute_witness(&g, &d);
    assert_eq!(w.max_len(), 0);
}

#[test]
fn nested_applications_are_flattened() {
    let (g, [f, gg, h]) = fraternal();
    let mut ws = Workspace::new(g, Limits::default());
    let deep = Term::app(h, X).then(gg).then(f);
    let e = Expr::eq(deep.clone(), Term::var(Y));
    let s = ws.make_simple(&e).unwrap();
    let mut terms = Vec::new();
    s.visit_atoms(&mut |a| terms.extend(a.terms().into_iter().cloned()));
    assert!(terms.iter().all(Term::is_simple), "{s:?}");
    assert!(equivalent(ws.graph(), &s, &e, 2));
    let two = Expr::eq(Term::app(gg, X).then(f), Term::var(Y));
    let s2 = ws.make_simple(&two).unwrap();
    assert!(equivalent(ws.graph(), &s2, &two, 2));
}

#[test]
fn simple_formula_is_unchanged() {
    let (g, [f, gg, _]) = fraternal();
    let mut ws = Workspace::new(g, Limits::default());
    let e = Expr::and([Expr::eq(Term::app(f, X), Term::var(Y)), Expr::neq(Term::app(gg, Y), Term::var(X))]);
    assert_eq!(ws.make_simple(&e).unwrap(), e);
}

#[test]
fn quantifier_free_compile_has_no_stage() {
    let (g, [f, _, _]) = fraternal();
    let mut ws = Workspace::new(g, Limits::default());
    let e = Expr::eq(Term::app(f, X), Term::var(Y));
    let c = compile_expr(&mut ws, e.clone(), 2, vec!["x".into(), "y".into()]).unwrap();
    assert!(c.stages.is_empty());
    assert!(equivalent(ws.graph(), &c.formula, &e, 2));
}

#[test]
fn signature_level_never_decreases() {
    use sparsefo::engine::Engine;
    let s = common::grid(3, 3);
    let mut eng = Engine::new(&s, Limits::default()).unwrap();
    let q = eng.parse("exists z. exists w. E(x,z) & E(z,w) & E(w,y)").unwrap();
    let p = eng.prepare(&q).unwrap();
    let levels: Vec<usize> = p.compiled.stages.iter().map(|s| s.level).collect();
    assert_eq!(levels.len(), 2);
    assert!(levels.windows(2).all(|w| w[0] <= w[1]), "{levels:?}");
}
