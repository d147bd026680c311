//! Small floating-point accumulation helpers shared across modules.

/// Neumaier-compensated accumulator. Summation order stays fixed wherever
/// results must be independent of chunking or thread count.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

pub(crate) fn kahan_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = KahanSum::new();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

/// Compensated Horner evaluation (error-free transformations with FMA for
/// the product error). Roughly twice the working precision of plain Horner.
pub(crate) fn compensated_horner(coeffs: &[f64], x: f64) -> f64 {
    let Some((&last, rest)) = coeffs.split_last() else {
        return 0.0;
    };
    let mut s = last;
    let mut c = 0.0f64;
    for &a in rest.iter().rev() {
        let p = s * x;
        let product_err = s.mul_add(x, -p);
        let t = p + a;
        let bv = t - p;
        let sum_err = (p - (t - bv)) + (a - bv);
        s = t;
        c = c.mul_add(x, product_err + sum_err);
    }
    s + c
}
