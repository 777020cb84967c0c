//! Adaptive Gauss–Kronrod (7/15) quadrature.

use crate::scalar::Real;

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

#[derive(Debug, Clone, Copy)]
pub struct Quadrature<T> {
    pub value: T,
    pub error: T,
    pub converged: bool,
}

fn gk15<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> (T, T) {
    let half = (b - a) / T::lit(2.0);
    let mid = (a + b) / T::lit(2.0);
    let fc = f(mid);
    let mut kronrod = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for (j, &x) in XGK.iter().enumerate().take(7) {
        let dx = half * T::lit(x);
        let sum = f(mid - dx) + f(mid + dx);
        kronrod = kronrod + sum * T::lit(WGK[j]);
        // Gauss nodes sit at the odd Kronrod indices.
        if j % 2 == 1 {
            gauss = gauss + sum * T::lit(WG[j / 2]);
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Integrates `f` over `[a, b]` by interval bisection until the summed
/// Kronrod–Gauss error drops below `max(abs_tol, rel_tol·|I|)`.
pub fn integrate<T: Real, F: Fn(T) -> T>(
    f: F,
    a: T,
    b: T,
    abs_tol: T,
    rel_tol: T,
    max_intervals: usize,
) -> Quadrature<T> {
    let (v, e) = gk15(&f, a, b);
    let mut intervals = vec![(a, b, v, e)];
    loop {
        let value = intervals.iter().fold(T::zero(), |acc, iv| acc + iv.2);
        let error = intervals.iter().fold(T::zero(), |acc, iv| acc + iv.3);
        let target = abs_tol.max(rel_tol * value.abs());
        if error <= target || !error.is_finite() || intervals.len() >= max_intervals {
            return Quadrature {
                value,
                error,
                converged: error <= target,
            };
        }
        let (worst, _) = intervals
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |best, (i, iv)| {
                if iv.3 > best.1 {
                    (i, iv.3)
                } else {
                    best
                }
            });
        let (lo, hi, _, _) = intervals.swap_remove(worst);
        let m = (lo + hi) / T::lit(2.0);
        let (v1, e1) = gk15(&f, lo, m);
        let (v2, e2) = gk15(&f, m, hi);
        intervals.push((lo, m, v1, e1));
        intervals.push((m, hi, v2, e2));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let q = integrate(|x: f64| x * x * x - 2.0 * x, 0.0, 2.0, 1e-14, 1e-14, 10);
        assert!((q.value - 0.0).abs() < 1e-13);
        assert!(q.converged);
    }

    #[test]
    fn gaussian_tail() {
        let q = integrate(|x: f64| (-x * x).exp(), 0.0, 40.0, 1e-13, 1e-13, 500);
        assert!((q.value - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-12);
    }
}
