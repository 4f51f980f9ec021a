//! Log-factorials and compensated summation shared by the series and the
//! Fock-space constructions.

use std::sync::OnceLock;

/// Largest `n` for which `ln n!` is tabulated.
pub(crate) const LN_FACTORIAL_MAX: usize = 1 << 18;

static LN_FACTORIALS: OnceLock<Vec<f64>> = OnceLock::new();

fn table() -> &'static [f64] {
    LN_FACTORIALS.get_or_init(|| {
        let mut out = Vec::with_capacity(LN_FACTORIAL_MAX + 1);
        let mut acc = CompensatedSum::default();
        out.push(0.0);
        for k in 1..=LN_FACTORIAL_MAX {
            acc.add((k as f64).ln());
            out.push(acc.value());
        }
        out
    })
}

/// `ln n!`, accumulated with compensated summation.
#[cfg(test)]
pub(crate) fn ln_factorial(n: usize) -> f64 {
    assert!(n <= LN_FACTORIAL_MAX, "ln_factorial({n}) outside table");
    table()[n]
}

/// `ln C(n, k)`; `k > n` is a caller bug.
pub(crate) fn ln_binomial(n: usize, k: usize) -> f64 {
    debug_assert!(k <= n);
    let t = table();
    t[n] - t[k] - t[n - k]
}

/// `sqrt(C(n, k))` via the log-factorial table.
pub(crate) fn sqrt_binomial(n: usize, k: usize) -> f64 {
    (0.5 * ln_binomial(n, k)).exp()
}

/// Neumaier summation.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}
