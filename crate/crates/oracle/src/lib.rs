//! Independent numerical oracles for the `hawkes-agg` test suites.
//!
//! Nothing in here shares code with the library under test: quadrature is a
//! plain adaptive Gauss–Kronrod rule, least squares goes through nalgebra's
//! SVD, and the KS helpers work on raw samples.

use nalgebra::{DMatrix, DVector};

// Gauss–Kronrod 7/15 nodes and weights on [-1, 1].
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
    0.209_482_141_084_728_8,
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
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, &x) in XGK.iter().enumerate().take(7) {
        let f1 = f(c - h * x);
        let f2 = f(c + h * x);
        kronrod += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

// Global adaptive refinement: always split the interval with the largest
// error estimate, up to a fixed subdivision budget.
fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let mut parts = vec![{
        let (v, e) = gk15(f, a, b);
        (a, b, v, e)
    }];
    for _ in 0..5000 {
        let total_err: f64 = parts.iter().map(|p| p.3).sum();
        let total_val: f64 = parts.iter().map(|p| p.2).sum();
        if total_err <= tol.max(1e-15 * total_val.abs()) {
            break;
        }
        let worst = (0..parts.len()).max_by(|&i, &j| parts[i].3.total_cmp(&parts[j].3)).unwrap();
        let (lo, hi, _, _) = parts[worst];
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let (v1, e1) = gk15(f, lo, mid);
        let (v2, e2) = gk15(f, mid, hi);
        parts[worst] = (lo, mid, v1, e1);
        parts.push((mid, hi, v2, e2));
    }
    parts.iter().map(|p| p.2).sum()
}

/// Adaptive Gauss–Kronrod integral of `f` over `[a, b]`.
///
/// `breaks` are points where `f` may be discontinuous; the interval is split
/// there before adapting. `tol` is an absolute error target.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64], tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    pts.push(a);
    pts.push(b);
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pts.dedup();
    let share = tol / (pts.len() as f64);
    pts.windows(2).map(|w| adapt(&f, w[0], w[1], share)).sum()
}

/// Kolmogorov–Smirnov distance between the empirical CDF of `samples` and `cdf`.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let fx = cdf(x);
            let lo = (fx - i as f64 / n).abs();
            let hi = ((i + 1) as f64 / n - fx).abs();
            lo.max(hi)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic one-sample KS critical value at level 0.01.
pub fn ks_critical_01(n: usize) -> f64 {
    1.627_6 / (n as f64).sqrt()
}

/// Least-squares solution of `x · design ≈ target`, where `design` is given
/// row-major as `rows × cols` and `target` has `cols` entries.
///
/// Solved by SVD of the transposed system; returns one coefficient per row.
pub fn least_squares_rows(design: &[Vec<f64>], target: &[f64]) -> Vec<f64> {
    let rows = design.len();
    let cols = target.len();
    let a = DMatrix::from_fn(cols, rows, |i, j| design[j][i]);
    let y = DVector::from_column_slice(target);
    let svd = a.svd(true, true);
    let x = svd.solve(&y, 1e-14).expect("svd solve");
    x.iter().copied().collect()
}

/// Brute-force minimizer of `f(x, y)` on a box by successive grid refinement.
pub fn grid_minimize_2d<F: Fn(f64, f64) -> f64>(
    f: F,
    mut x_range: (f64, f64),
    mut y_range: (f64, f64),
    points: usize,
    rounds: usize,
) -> (f64, f64) {
    let mut best = (x_range.0, y_range.0, f64::INFINITY);
    for _ in 0..rounds {
        let dx = (x_range.1 - x_range.0) / (points - 1) as f64;
        let dy = (y_range.1 - y_range.0) / (points - 1) as f64;
        for i in 0..points {
            for j in 0..points {
                let x = x_range.0 + dx * i as f64;
                let y = y_range.0 + dy * j as f64;
                let v = f(x, y);
                if v < best.2 {
                    best = (x, y, v);
                }
            }
        }
        x_range = (best.0 - 2.0 * dx, best.0 + 2.0 * dx);
        y_range = (best.1 - 2.0 * dy, best.1 + 2.0 * dy);
    }
    (best.0, best.1)
}

/// Linear-interpolation (type 7) sample quantile.
pub fn quantile_type7(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_smooth_and_discontinuous() {
        let v = integrate(|x| x.exp(), 0.0, 1.0, &[], 1e-13);
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-12);
        let step = integrate(|x| if x > 0.3 { 2.0 } else { 0.0 }, 0.0, 1.0, &[0.3], 1e-13);
        assert!((step - 1.4).abs() < 1e-12);
    }

    #[test]
    fn least_squares_exact_fit() {
        // y = 2·r0 + 3·r1
        let design = vec![vec![1.0, 2.0, 3.0, 4.0], vec![1.0, 1.0, 1.0, 1.0]];
        let target = [5.0, 7.0, 9.0, 11.0];
        let x = least_squares_rows(&design, &target);
        assert!((x[0] - 2.0).abs() < 1e-12 && (x[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn ks_of_uniform_grid() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        assert!(ks_distance(&xs, |x| x) <= 0.0005 + 1e-12);
    }
}
