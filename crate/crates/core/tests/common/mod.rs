#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparsefo::model::RelationalStructure;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn path(n: usize) -> RelationalStructure {
    let edges: Vec<_> = (1..n as u32).map(|i| (i - 1, i)).collect();
    RelationalStructure::from_edges(n, &edges)
}

pub fn cycle(n: usize) -> RelationalStructure {
    let mut edges: Vec<_> = (1..n as u32).map(|i| (i - 1, i)).collect();
    if n >= 3 {
        edges.push((n as u32 - 1, 0));
    }
    RelationalStructure::from_edges(n, &edges)
}

pub fn grid(w: usize, h: usize) -> RelationalStructure {
    let id = |x: usize, y: usize| (y * w + x) as u32;
    let mut edges = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if x + 1 < w {
                edges.push((id(x, y), id(x + 1, y)));
            }
            if y + 1 < h {
                edges.push((id(x, y), id(x, y + 1)));
            }
        }
    }
    RelationalStructure::from_edges(w * h, &edges)
}

pub fn random_tree(n: usize, r: &mut impl Rng) -> RelationalStructure {
    let edges: Vec<_> = (1..n as u32).map(|i| (r.gen_range(0..i), i)).collect();
    RelationalStructure::from_edges(n, &edges)
}

/// Random graph with maximum degree at most `d`.
pub fn random_bounded(n: usize, d: usize, tries: usize, r: &mut impl Rng) -> RelationalStructure {
    let mut deg = vec![0; n];
    let mut edges = std::collections::BTreeSet::new();
    if n >= 2 {
        for _ in 0..tries {
            let (a, b) = (r.gen_range(0..n), r.gen_range(0..n));
            if a != b && deg[a] < d && deg[b] < d && edges.insert((a.min(b) as u32, a.max(b) as u32)) {
                deg[a] += 1;
                deg[b] += 1;
            }
        }
    }
    RelationalStructure::from_edges(n, &edges.into_iter().collect::<Vec<_>>())
}

/// Random simple 3-regular graph on an even number of vertices.
pub fn random_cubic(n: usize, r: &mut impl Rng) -> RelationalStructure {
    assert!(n % 2 == 0 && n >= 4);
    loop {
        let mut stubs: Vec<u32> = (0..n as u32).flat_map(|v| [v, v, v]).collect();
        stubs.shuffle(r);
        let mut edges: Vec<(u32, u32)> = stubs
            .chunks(2)
            .map(|c| (c[0].min(c[1]), c[0].max(c[1])))
            .collect();
        edges.sort_unstable();
        let simple = edges.iter().all(|&(a, b)| a != b) && edges.windows(2).all(|w| w[0] != w[1]);
        if simple {
            return RelationalStructure::from_edges(n, &edges);
        }
        if let Some(g) = repair(&mut edges, r) {
            return RelationalStructure::from_edges(n, &g);
        }
    }
}

fn repair(edges: &mut [(u32, u32)], r: &mut impl Rng) -> Option<Vec<(u32, u32)>> {
    let bad = |e: &[(u32, u32)], i: usize| {
        let (a, b) = e[i];
        a == b || e.iter().enumerate().any(|(j, &f)| j != i && f == (a, b))
    };
    for _ in 0..100 * edges.len() {
        let Some(i) = (0..edges.len()).find(|&i| bad(edges, i)) else {
            let mut out = edges.to_vec();
            out.sort_unstable();
            return Some(out);
        };
        let j = r.gen_range(0..edges.len());
        let ((a, b), (c, d)) = (edges[i], edges[j]);
        let e1 = (a.min(c), a.max(c));
        let e2 = (b.min(d), b.max(d));
        if a != c && b != d && !edges.contains(&e1) && !edges.contains(&e2) {
            edges[i] = e1;
            edges[j] = e2;
        }
    }
    None
}

/// Adds a unary relation holding each element with probability one half.
pub fn with_color(s: &RelationalStructure, name: &str, r: &mut impl Rng) -> RelationalStructure {
    let mut s = s.clone();
    s.declare(name, 1).unwrap();
    for &id in s.ids().to_vec().iter() {
        if r.gen_bool(0.5) {
            s.add_tuple(name, &[id]).unwrap();
        }
    }
    s.finish();
    s
}

/// A structure with a ternary relation `T` and a directed relation `R`.
pub fn random_relational(n: usize, tuples: usize, r: &mut impl Rng) -> RelationalStructure {
    let mut s = RelationalStructure::new();
    for i in 0..n as u64 {
        s.add_node(i * 2 + 1).unwrap();
    }
    s.declare("T", 3).unwrap();
    s.declare("R", 2).unwrap();
    let ids = s.ids().to_vec();
    for _ in 0..tuples {
        let pick = |r: &mut dyn rand::RngCore| ids[r.gen_range(0..ids.len())];
        let t = [pick(r), pick(r), pick(r)];
        s.add_tuple("T", &t).unwrap();
        let e = [pick(r), pick(r)];
        s.add_tuple("R", &e).unwrap();
    }
    s.finish();
    s
}

/// The circular ladder on `n` vertices: two `n/2`-cycles joined by a
/// perfect matching. It is 3-regular.
pub fn prism(n: usize) -> RelationalStructure {
    assert!(n % 2 == 0 && n >= 6);
    let h = (n / 2) as u32;
    let mut edges = Vec::new();
    for i in 0..h {
        let j = (i + 1) % h;
        edges.push((i.min(j), i.max(j)));
        edges.push(((h + i).min(h + j), (h + i).max(h + j)));
        edges.push((i, h + i));
    }
    RelationalStructure::from_edges(n, &edges)
}
