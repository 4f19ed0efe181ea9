//! Small numeric building blocks shared across the crate: compensated
//! summation, closed-form power integrals and a seedable generator for
//! reproducible test fields.

/// Neumaier-compensated accumulator.
///
/// The rearrangement invariants are asserted at 1e-12 relative tolerance on
/// up to 1e5 terms, which plain summation does not reliably deliver.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated sum of an iterator of terms.
pub fn csum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut acc = CompensatedSum::new();
    for t in terms {
        acc.add(t);
    }
    acc.total()
}

/// Exact integral of `t^k` over `[lo, hi]`, `0 <= lo <= hi`.
///
/// Handles the logarithmic case `k == -1`. For `k < -1` the integrand is not
/// integrable at zero; callers keep `lo > 0` there.
pub fn power_integral(lo: f64, hi: f64, k: f64) -> f64 {
    debug_assert!(lo >= 0.0 && hi >= lo, "bad power integral bounds [{lo}, {hi}]");
    if hi == lo {
        return 0.0;
    }
    if k == 0.0 {
        return hi - lo;
    }
    if k == -1.0 {
        return (hi / lo).ln();
    }
    let e = k + 1.0;
    (hi.powf(e) - lo.powf(e)) / e
}

/// SplitMix64: tiny deterministic generator for seeded test data.
///
/// Identical sequences on every platform, which keeps reports and property
/// batteries byte-stable.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in `[lo, hi]`.
    pub fn range_usize(&mut self, lo: usize, hi: usize) -> usize {
        lo + (self.next_u64() % (hi - lo + 1) as u64) as usize
    }
}
