use std::sync::OnceLock;

use crate::scalar::Real;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * z * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(16))
}

/// 16-point Gauss–Legendre approximation of the integral of `f` over [a, b].
pub fn gl16_integrate<T: Real>(a: T, b: T, f: impl Fn(T) -> T) -> T {
    let (nodes, weights) = gl16();
    let half = (b - a) / T::c(2.0);
    let mid = (a + b) / T::c(2.0);
    let mut acc = T::zero();
    for (z, w) in nodes.iter().zip(weights) {
        acc += T::c(*w) * f(mid + half * T::c(*z));
    }
    acc * half
}

/// Composite 16-point rule on `pieces` equal subintervals.
pub fn gl16_composite<T: Real>(a: T, b: T, pieces: usize, f: impl Fn(T) -> T) -> T {
    let step = (b - a) / T::from_usize_lossy(pieces);
    (0..pieces)
        .map(|j| {
            let lo = a + step * T::from_usize_lossy(j);
            gl16_integrate(lo, lo + step, &f)
        })
        .sum()
}

/// Cumulative integral of nodal samples on a uniform grid, fourth order.
///
/// Each interval uses the cubic through the four nearest nodes.
pub fn cumulative_uniform<T: Real>(values: &[T], step: T) -> Vec<T> {
    let n = values.len();
    let mut out = vec![T::zero(); n];
    if n < 2 {
        return out;
    }
    if n < 4 {
        for j in 1..n {
            out[j] = out[j - 1] + step * (values[j - 1] + values[j]) / T::c(2.0);
        }
        return out;
    }
    let c24 = T::c(24.0);
    for j in 0..n - 1 {
        let inc = if j == 0 {
            // one-sided stencil on nodes 0..3
            step * (T::c(9.0) * values[0] + T::c(19.0) * values[1] - T::c(5.0) * values[2]
                + values[3])
                / c24
        } else if j == n - 2 {
            step * (T::c(9.0) * values[n - 1] + T::c(19.0) * values[n - 2]
                - T::c(5.0) * values[n - 3]
                + values[n - 4])
                / c24
        } else {
            step * (-values[j - 1] + T::c(13.0) * values[j] + T::c(13.0) * values[j + 1]
                - values[j + 2])
                / c24
        };
        out[j + 1] = out[j] + inc;
    }
    out
}
