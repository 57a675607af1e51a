//! Elementary-step instrumentation.
//!
//! Every function-table lookup, color lookup and per-vertex loop iteration
//! bumps a thread-local counter. The counter makes the complexity claims of
//! the engine observable: preprocessing should grow linearly with the input
//! and the work between two enumerated answers should not depend on it.

use std::cell::Cell;

thread_local! {
    static STEPS: Cell<u64> = const { Cell::new(0) };
}

#[inline]
pub fn tick() {
    STEPS.with(|s| s.set(s.get() + 1));
}

#[inline]
pub fn add(n: u64) {
    STEPS.with(|s| s.set(s.get() + n));
}

/// Current value of the counter on this thread.
pub fn steps() -> u64 {
    STEPS.with(|s| s.get())
}

pub fn reset() {
    STEPS.with(|s| s.set(0));
}

/// Runs `f` and returns its result with the number of steps it took.
pub fn measure<T>(f: impl FnOnce() -> T) -> (T, u64) {
    let start = steps();
    let out = f();
    (out, steps() - start)
}
