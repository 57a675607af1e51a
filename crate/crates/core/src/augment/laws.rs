//! Checks that one augmentation step obeys its defining laws.

use std::collections::BTreeSet;

use crate::model::{FuncId, FunctionalGraph};

fn proper_preds(g: &FunctionalGraph, funcs: usize) -> Vec<BTreeSet<u32>> {
    g.vertices()
        .map(|v| {
            (0..funcs as FuncId)
                .map(|f| g.apply(f, v))
                .filter(|&b| b != v)
                .collect()
        })
        .collect()
}

/// Every composition of old symbols is a named symbol of `new`.
pub fn check_transitivity(old: &FunctionalGraph, new: &FunctionalGraph) -> Result<(), String> {
    let k = old.signature().func_count() as FuncId;
    for f in 0..k {
        for g in 0..k {
            let h = new
                .signature()
                .composition(f, g)
                .ok_or_else(|| format!("no symbol for composition ({f}, {g})"))?;
            for x in old.vertices() {
                let want = old.apply(f, old.apply(g, x));
                if new.apply(h, x) != want {
                    return Err(format!("composition ({f}, {g}) wrong at vertex {x}"));
                }
            }
        }
    }
    Ok(())
}

/// Any two distinct proper images of a vertex are joined by an arc of `new`.
pub fn check_fraternity(old: &FunctionalGraph, new: &FunctionalGraph) -> Result<(), String> {
    let p_old = proper_preds(old, old.signature().func_count());
    let p_new = proper_preds(new, new.signature().func_count());
    for (x, ps) in p_old.iter().enumerate() {
        for &a in ps {
            for &b in ps {
                if a < b && !p_new[a as usize].contains(&b) && !p_new[b as usize].contains(&a) {
                    return Err(format!("fraternal pair ({a}, {b}) below {x} not joined"));
                }
            }
        }
    }
    Ok(())
}

/// Restricting `new` to the old signature gives `old` back.
pub fn check_expansion(old: &FunctionalGraph, new: &FunctionalGraph) -> Result<(), String> {
    if old.ids() != new.ids() {
        return Err("vertex sets differ".into());
    }
    let (so, sn) = (old.signature(), new.signature());
    if sn.func_count() < so.func_count() || sn.colors().len() < so.colors().len() {
        return Err("symbols were removed".into());
    }
    for f in 0..so.func_count() as FuncId {
        if so.func(f).name != sn.func(f).name || old.table_of(f) != new.table_of(f) {
            return Err(format!("function {} changed", so.func(f).name));
        }
    }
    for c in 0..so.colors().len() as u32 {
        if so.color(c).name != sn.color(c).name || old.color_set(c) != new.color_set(c) {
            return Err(format!("color {} changed", so.color(c).name));
        }
    }
    Ok(())
}

/// Every arc of `new` is old, transitive through an old arc, or fraternal.
pub fn check_strictness(old: &FunctionalGraph, new: &FunctionalGraph) -> Result<(), String> {
    let p = proper_preds(old, old.signature().func_count());
    let mut allowed = p.clone();
    for (x, ps) in p.iter().enumerate() {
        for &c in ps {
            allowed[x].extend(p[c as usize].iter().copied().filter(|&b| b as usize != x));
        }
        for &a in ps {
            for &b in ps {
                if a != b {
                    allowed[a as usize].insert(b);
                }
            }
        }
    }
    let p_new = proper_preds(new, new.signature().func_count());
    for (x, ps) in p_new.iter().enumerate() {
        if let Some(b) = ps.iter().find(|b| !allowed[x].contains(b)) {
            return Err(format!("unexpected arc {b} -> {x}"));
        }
    }
    Ok(())
}

/// All four laws.
pub fn check_all(old: &FunctionalGraph, new: &FunctionalGraph) -> Result<(), String> {
    check_transitivity(old, new)?;
    check_fraternity(old, new)?;
    check_expansion(old, new)?;
    check_strictness(old, new)
}
