//! Small numeric helpers shared across the crate.

use alloc::vec::Vec;

/// Compensated (Kahan–Neumaier) running sum.
///
/// Cumulative detunings are sums of user-supplied reals; long strings make
/// the naive sum lose the low bits that partial-fraction denominators
/// depend on.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if libm::fabs(self.sum) >= libm::fabs(x) {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated sum of a slice.
pub fn kahan_sum(xs: &[f64]) -> f64 {
    let mut acc = KahanSum::new();
    for &x in xs {
        acc.add(x);
    }
    acc.value()
}

/// SplitMix64 generator.
///
/// Deterministic across platforms and crate versions, which keeps seeded
/// verification draws and golden files reproducible.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [lo, hi).
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform magnitude in [lo, hi) with a random sign.
    pub fn signed_uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let mag = self.uniform(lo, hi);
        if self.next_u64() & 1 == 0 {
            mag
        } else {
            -mag
        }
    }

    pub fn pick(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

/// All distinct interleavings of two ordered sequences, preserving the
/// internal order of each. Sequences are passed as index lists; the result
/// enumerates merged lists. The count is `C(|a|+|b|, |a|)`.
pub fn interleavings<T: Copy>(a: &[T], b: &[T]) -> Vec<Vec<T>> {
    let mut out = Vec::new();
    let mut prefix = Vec::with_capacity(a.len() + b.len());
    interleave_rec(a, b, &mut prefix, &mut out);
    out
}

fn interleave_rec<T: Copy>(a: &[T], b: &[T], prefix: &mut Vec<T>, out: &mut Vec<Vec<T>>) {
    if a.is_empty() && b.is_empty() {
        out.push(prefix.clone());
        return;
    }
    if let Some((&head, rest)) = a.split_first() {
        prefix.push(head);
        interleave_rec(rest, b, prefix, out);
        prefix.pop();
    }
    if let Some((&head, rest)) = b.split_first() {
        prefix.push(head);
        interleave_rec(a, rest, prefix, out);
        prefix.pop();
    }
}

/// Binomial coefficient in f64 (bounds are reported, not iterated over).
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}
