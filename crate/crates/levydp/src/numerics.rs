//! Small numeric helpers: order-fixed reductions and quadrature nodes.

/// Sums a slice with a fixed pairwise tree.
///
/// The reduction order depends only on the slice length, never on thread
/// count or chunking, so repeated runs are bit-identical and rounding error
/// grows like O(log n) rather than O(n).
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BASE: usize = 32;
    if xs.len() <= BASE {
        let mut s = 0.0;
        for &x in xs {
            s += x;
        }
        return s;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Mean of a slice via the pairwise tree. Empty input returns NaN.
pub fn pairwise_mean(xs: &[f64]) -> f64 {
    pairwise_sum(xs) / xs.len() as f64
}

/// Sample mean and standard error of the mean, both via pairwise sums.
///
/// Returns `(mean, se)`; the standard error is 0 for fewer than two samples.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, 0.0);
    }
    let mean = pairwise_mean(xs);
    if n < 2 {
        return (mean, 0.0);
    }
    let sq: Vec<f64> = xs.iter().map(|&x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&sq) / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Unbiased sample variance via the pairwise tree.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let mean = pairwise_mean(xs);
    let sq: Vec<f64> = xs.iter().map(|&x| (x - mean) * (x - mean)).collect();
    pairwise_sum(&sq) / (n - 1) as f64
}

/// Nodes and weights of the 8-point Gauss-Legendre rule on [-1, 1].
pub const GAUSS8_NODES: [f64; 8] = [
    -0.960_289_856_497_536_2,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329_0,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_2,
];

/// Weights paired with [`GAUSS8_NODES`].
pub const GAUSS8_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362_0,
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];

/// Integrates `f` over [a, b] with the 8-point Gauss-Legendre rule.
pub fn gauss8<F: FnMut(f64) -> f64>(a: f64, b: f64, mut f: F) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut s = 0.0;
    for (x, w) in GAUSS8_NODES.iter().zip(GAUSS8_WEIGHTS.iter()) {
        s += w * f(mid + half * x);
    }
    s * half
}

/// Integrates `f` over [a, b] split into `panels` geometric panels.
///
/// Panel edges follow a geometric progression from `a` to `b` (both must be
/// positive with a < b), concentrating nodes near `a` where integrands with
/// power-law kernels vary fastest.
pub fn gauss8_geometric<F: FnMut(f64) -> f64>(a: f64, b: f64, panels: usize, mut f: F) -> f64 {
    debug_assert!(a > 0.0 && b > a && panels > 0);
    let ratio = (b / a).powf(1.0 / panels as f64);
    let mut s = 0.0;
    let mut lo = a;
    for i in 0..panels {
        let hi = if i + 1 == panels { b } else { lo * ratio };
        s += gauss8(lo, hi, &mut f);
        lo = hi;
    }
    s
}

/// Ordinary least squares slope of y against x.
///
/// Returns NaN when fewer than two distinct x values are given.
pub fn ols_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return f64::NAN;
    }
    let xm = pairwise_sum(&xs[..n]) / n as f64;
    let ym = pairwise_sum(&ys[..n]) / n as f64;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..n {
        let dx = xs[i] - xm;
        sxx += dx * dx;
        sxy += dx * (ys[i] - ym);
    }
    if sxx == 0.0 {
        f64::NAN
    } else {
        sxy / sxx
    }
}
