//! Adaptive Gauss–Kronrod (7/15) quadrature.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Integrates `f` over `[a, b]` until the estimated error falls below
/// `max(abs_tol, rel_tol * |I|)`. The interval is pre-split into `pieces`
/// equal panels, which helps for oscillatory integrands.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    pieces: usize,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let pieces = pieces.max(1);
    let width = (b - a) / pieces as f64;
    let mut heap = BinaryHeap::with_capacity(2 * pieces);
    let mut total = 0.0;
    let mut err = 0.0;
    for i in 0..pieces {
        let lo = a + width * i as f64;
        let hi = if i + 1 == pieces { b } else { lo + width };
        let (v, e) = gk15(&f, lo, hi);
        total += v;
        err += e;
        heap.push(Panel { lo, hi, value: v, error: e });
    }

    const MAX_PANELS: usize = 50_000;
    loop {
        if !total.is_finite() || !err.is_finite() {
            return Err(Error::Divergent("integrand produced a non-finite value".into()));
        }
        if err <= abs_tol.max(rel_tol * total.abs()) {
            // Re-sum to shed the drift of the running updates.
            return Ok(heap.iter().map(|p| p.value).sum());
        }
        if heap.len() >= MAX_PANELS {
            return Err(Error::Numeric(format!(
                "quadrature did not converge: estimate {total:e}, error {err:e}"
            )));
        }
        let worst = heap.pop().expect("at least one panel");
        let mid = 0.5 * (worst.lo + worst.hi);
        let (v1, e1) = gk15(&f, worst.lo, mid);
        let (v2, e2) = gk15(&f, mid, worst.hi);
        total += v1 + v2 - worst.value;
        err += e1 + e2 - worst.error;
        heap.push(Panel { lo: worst.lo, hi: mid, value: v1, error: e1 });
        heap.push(Panel { lo: mid, hi: worst.hi, value: v2, error: e2 });
    }
}

struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error).is_eq()
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integrates `f` over `[0, ∞)` with the substitution `x = scale·t/(1−t)`.
pub fn integrate_half_line<F: Fn(f64) -> f64>(f: F, scale: f64, rel_tol: f64) -> Result<f64> {
    let g = |t: f64| {
        if t >= 1.0 {
            return 0.0;
        }
        let s = 1.0 - t;
        let fx = f(scale * t / s);
        if fx == 0.0 {
            0.0
        } else {
            fx * scale / (s * s)
        }
    };
    integrate(g, 0.0, 1.0, 8, rel_tol, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = integrate(|x| x * x * x - 2.0 * x, 0.0, 2.0, 1, 1e-14, 1e-13).unwrap();
        assert!((v - 0.0).abs() < 1e-13);
        let v = integrate(|x| x.powi(4), -1.0, 1.0, 1, 1e-14, 0.0).unwrap();
        assert!((v - 0.4).abs() < 1e-14);
    }

    #[test]
    fn oscillatory_cosine() {
        let v = integrate(|x| (40.0 * x).cos(), 0.0, 1.0, 16, 1e-12, 0.0).unwrap();
        assert!((v - (40.0f64).sin() / 40.0).abs() < 1e-12);
    }

    #[test]
    fn half_line_exponential() {
        let v = integrate_half_line(|x| (-x / 3.0).exp(), 3.0, 1e-12).unwrap();
        assert!((v - 3.0).abs() < 1e-10);
    }

    #[test]
    fn divergent_integrand_is_reported() {
        let r = integrate(|x| 1.0 / x, 0.0, 1.0, 1, 1e-10, 0.0);
        assert!(r.is_err());
    }
}
