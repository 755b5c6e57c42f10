//! Deterministic parallel reduction.
//!
//! Floating-point addition is not associative, so a naive parallel sum
//! yields a result that depends on the thread count and the scheduler.
//! Every integral in this crate instead goes through a *fixed-shape*
//! pairwise tree: ranges split at their midpoint down to leaves of
//! [`SEQ_CHUNK`] elements, which are summed sequentially. The tree shape
//! depends only on the range length, never on the number of workers, so
//! the result is bitwise reproducible across thread counts and runs.
//! Large ranges hand their two halves to `rayon::join`; small ones recurse
//! on one thread. Pairwise summation also keeps the rounding error at
//! `O(eps * log n)`, far better than a running sum.

use num_complex::Complex64;

/// Leaf size of the reduction tree. Below this, summation is a plain
/// sequential loop; the value balances call overhead against accuracy.
pub const SEQ_CHUNK: usize = 1024;

/// Ranges at least this long split their halves across threads.
const PAR_THRESHOLD: usize = 1 << 15;

/// Types the pairwise tree can accumulate.
pub trait Summable: Copy + Send + Sync + std::ops::Add<Output = Self> {
    const ZERO: Self;
}

impl Summable for f64 {
    const ZERO: f64 = 0.0;
}

impl Summable for Complex64 {
    const ZERO: Complex64 = Complex64::new(0.0, 0.0);
}

/// Internal wrapper so three-component sums ride the same tree in one pass.
#[derive(Clone, Copy)]
struct V3([f64; 3]);

impl std::ops::Add for V3 {
    type Output = V3;
    #[inline]
    fn add(self, rhs: V3) -> V3 {
        V3([
            self.0[0] + rhs.0[0],
            self.0[1] + rhs.0[1],
            self.0[2] + rhs.0[2],
        ])
    }
}

impl Summable for V3 {
    const ZERO: V3 = V3([0.0; 3]);
}

fn tree<T, F>(start: usize, len: usize, f: &F) -> T
where
    T: Summable,
    F: Fn(usize) -> T + Sync,
{
    if len <= SEQ_CHUNK {
        let mut acc = T::ZERO;
        for i in start..start + len {
            acc = acc + f(i);
        }
        return acc;
    }
    // The midpoint split is a pure function of `len`, which pins the tree
    // shape (and therefore the rounding) regardless of how the halves are
    // scheduled below.
    let half = len / 2;
    if len >= PAR_THRESHOLD {
        let (a, b) = rayon::join(|| tree(start, half, f), || tree(start + half, len - half, f));
        a + b
    } else {
        tree(start, half, f) + tree(start + half, len - half, f)
    }
}

/// Deterministic pairwise sum of `f(0) + f(1) + ... + f(len - 1)`.
pub fn sum<T, F>(len: usize, f: F) -> T
where
    T: Summable,
    F: Fn(usize) -> T + Sync,
{
    if len == 0 {
        return T::ZERO;
    }
    tree(0, len, &f)
}

/// Pairwise sum of a real slice.
pub fn sum_slice(v: &[f64]) -> f64 {
    sum(v.len(), |i| v[i])
}

/// Three simultaneous real sums sharing one pass over the data.
pub fn sum3<F>(len: usize, f: F) -> [f64; 3]
where
    F: Fn(usize) -> [f64; 3] + Sync,
{
    sum(len, |i| V3(f(i))).0
}
