//! Scalar numerics shared by the engines: log-gamma differences that stay
//! accurate for arguments near 10⁹, compensated summation, and Gauss–Legendre
//! nodes.

use std::f64::consts::PI;

const STIRLING_MIN: f64 = 10.0;

/// Asymptotic tail of the Stirling series, `lnΓ(x) - [(x-½)ln x - x + ½ln 2π]`.
fn stirling_tail(x: f64) -> f64 {
    let r = 1.0 / x;
    let r2 = r * r;
    r * (1.0 / 12.0
        + r2 * (-1.0 / 360.0
            + r2 * (1.0 / 1260.0
                + r2 * (-1.0 / 1680.0 + r2 * (1.0 / 1188.0 + r2 * (-691.0 / 360_360.0 + r2 / 156.0))))))
}

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0, "ln_gamma needs a positive argument");
    if x >= STIRLING_MIN {
        return (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + stirling_tail(x);
    }
    let mut shifted = x;
    let mut log_prod = 0.0;
    while shifted < STIRLING_MIN {
        log_prod += shifted.ln();
        shifted += 1.0;
    }
    ln_gamma(shifted) - log_prod
}

/// `lnΓ(x) - lnΓ(y)` without the cancellation of two ~x·ln x sized terms.
pub fn ln_gamma_diff(x: f64, y: f64) -> f64 {
    if x < y {
        return -ln_gamma_diff(y, x);
    }
    ln_gamma_shift(y, x - y)
}

/// `lnΓ(y + δ) - lnΓ(y)` for `δ >= 0`. Taking `δ` separately keeps it exact
/// when `y` is so large that `y + δ` is not representable.
pub fn ln_gamma_shift(y: f64, delta: f64) -> f64 {
    if y < STIRLING_MIN {
        if y + delta < STIRLING_MIN {
            return ln_gamma(y + delta) - ln_gamma(y);
        }
        // lnΓ(y) = lnΓ(y + s) - Σ ln(y + i); move y into the Stirling range.
        let mut shifted = y;
        let mut log_prod = 0.0;
        while shifted < STIRLING_MIN {
            log_prod += shifted.ln();
            shifted += 1.0;
        }
        return ln_gamma_shift(shifted, delta - (shifted - y)) + log_prod;
    }
    let x = y + delta;
    let log_ratio = (delta / y).ln_1p();
    delta * (y.ln() + log_ratio) + (y - 0.5) * log_ratio - delta + stirling_tail(x) - stirling_tail(y)
}

/// `ln(a! / (a-k)!)`, the log falling factorial.
pub fn ln_falling(a: f64, k: f64) -> f64 {
    ln_gamma_shift(a - k + 1.0, k)
}

/// `ln C(a, k)`.
pub fn ln_choose(a: f64, k: f64) -> f64 {
    ln_falling(a, k) - ln_gamma(k + 1.0)
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    correction: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.correction += (self.sum - t) + x;
        } else {
            self.correction += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.correction
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// `log Σ exp(xs)`, returning `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    let acc: CompensatedSum = xs.iter().map(|x| (x - max).exp()).collect();
    max + acc.value().ln()
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1, "quadrature order must be positive");
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule mapped to `[lo, hi]`.
pub fn gauss_legendre_on(order: usize, lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(order);
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    (
        x.iter().map(|t| mid + half * t).collect(),
        w.iter().map(|wi| wi * half).collect(),
    )
}
