use super::{PhiBasis, PhiKind, SlError};
use crate::scalar::{Field, Real};

/// Cells per side used by the least-squares fit.
pub const FIT_WINDOW: usize = 8;

/// Relative weighted residual above which the fitted function is flagged.
pub const FIT_RESIDUAL_TOL: f64 = 1e-3;

/// `(u_D+, u_N+, u_D-, u_N-)`: coefficients of `u` on the boundary profiles at `0+` and `0-`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryData<V> {
    pub ud_plus: V,
    pub un_plus: V,
    pub ud_minus: V,
    pub un_minus: V,
}

impl<V: Field> BoundaryData<V> {
    pub fn new(ud_plus: V, un_plus: V, ud_minus: V, un_minus: V) -> Self {
        Self { ud_plus, un_plus, ud_minus, un_minus }
    }

    pub fn as_array(&self) -> [V; 4] {
        [self.ud_plus, self.un_plus, self.ud_minus, self.un_minus]
    }

    /// Largest componentwise modulus of the difference.
    pub fn max_abs_diff(&self, other: &Self) -> V::Real {
        self.as_array()
            .iter()
            .zip(other.as_array())
            .map(|(a, b)| (*a - b).modulus())
            .fold(V::Real::zero(), |m, v| if v > m { v } else { m })
    }
}

use num_traits::Zero;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitMethod {
    LeastSquares,
    Richardson,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFit<V: Field> {
    pub data: BoundaryData<V>,
    /// Larger of the two per-side relative weighted residuals.
    pub residual: V::Real,
    pub method: FitMethod,
}

impl<V: Field> BoundaryFit<V> {
    /// False when the samples near 0 are not explained by the two boundary profiles.
    pub fn is_domain_function(&self) -> bool {
        self.residual <= V::Real::c(FIT_RESIDUAL_TOL)
    }

    pub fn warning(&self) -> Option<String> {
        (!self.is_domain_function()).then(|| {
            format!(
                "boundary fit residual {:.3e} exceeds {:.1e}; samples near 0 do not look like a domain function",
                self.residual.to_f64_lossy(),
                FIT_RESIDUAL_TOL
            )
        })
    }
}

/// Extracts boundary data from cell samples `(cells[i], weights[i], values[i])` that
/// straddle `x = 0`.
pub fn boundary_data<T: Real, V: Field<Real = T>>(
    alpha: T,
    cells: &[T],
    weights: &[T],
    values: &[V],
) -> Result<BoundaryFit<V>, SlError> {
    assert_eq!(cells.len(), values.len());
    assert_eq!(cells.len(), weights.len());
    let basis = PhiBasis::new(alpha)?;
    let (dp, np, rp, mp) = fit_side(&basis, cells, weights, values, true)?;
    let (dm, nm, rm, mm) = fit_side(&basis, cells, weights, values, false)?;
    let method = if mp == FitMethod::Richardson || mm == FitMethod::Richardson {
        FitMethod::Richardson
    } else {
        FitMethod::LeastSquares
    };
    Ok(BoundaryFit {
        data: BoundaryData::new(dp, np, dm, nm),
        residual: if rp > rm { rp } else { rm },
        method,
    })
}

fn fit_side<T: Real, V: Field<Real = T>>(
    basis: &PhiBasis<T>,
    cells: &[T],
    weights: &[T],
    values: &[V],
    plus: bool,
) -> Result<(V, V, T, FitMethod), SlError> {
    let mut idx: Vec<usize> = (0..cells.len())
        .filter(|&i| if plus { cells[i] > T::zero() } else { cells[i] < T::zero() })
        .collect();
    idx.sort_by(|&i, &j| cells[i].abs().partial_cmp(&cells[j].abs()).unwrap());
    if idx.len() < 2 {
        return Err(SlError::InsufficientData { found: idx.len() });
    }
    let (kd, kn) = if plus {
        (PhiKind::DirichletPlus, PhiKind::NeumannPlus)
    } else {
        (PhiKind::DirichletMinus, PhiKind::NeumannMinus)
    };
    let profile = |i: usize| (basis.value(kd, cells[i]), basis.value(kn, cells[i]));
    if idx.len() >= FIT_WINDOW {
        let window = &idx[..FIT_WINDOW];
        let (a, b, res) = weighted_least_squares(window, weights, values, profile);
        return Ok((a, b, res, FitMethod::LeastSquares));
    }
    // Too few cells for the window: combine two-point interpolants so that a
    // quadratic remainder cancels.
    let pair = |i: usize, j: usize| {
        let (di, ni) = profile(i);
        let (dj, nj) = profile(j);
        let det = di * nj - dj * ni;
        let a = (values[i].scale(nj) - values[j].scale(ni)).scale(T::one() / det);
        let b = (values[j].scale(di) - values[i].scale(dj)).scale(T::one() / det);
        (a, b)
    };
    let (a1, b1) = pair(idx[0], idx[1]);
    if idx.len() == 2 {
        return Ok((a1, b1, T::zero(), FitMethod::Richardson));
    }
    let (a2, b2) = pair(idx[0], idx[2]);
    let p = cells[idx[0]] * cells[idx[1]];
    let q = cells[idx[0]] * cells[idx[2]];
    let inv = T::one() / (q - p);
    let a = (a1.scale(q) - a2.scale(p)).scale(inv);
    let b = (b1.scale(q) - b2.scale(p)).scale(inv);
    let (d2, n2) = profile(idx[2]);
    let miss = (values[idx[2]] - a1.scale(d2) - b1.scale(n2)).modulus();
    let scale = values[idx[2]].modulus();
    let res = if scale > T::zero() { miss / scale } else { miss };
    Ok((a, b, res, FitMethod::Richardson))
}

/// Weighted fit `u ~ a d + b n` through a Gram–Schmidt step on `sqrt(w)`-scaled columns.
fn weighted_least_squares<T: Real, V: Field<Real = T>>(
    window: &[usize],
    weights: &[T],
    values: &[V],
    profile: impl Fn(usize) -> (T, T),
) -> (V, V, T) {
    let s: Vec<T> = window.iter().map(|&i| weights[i].sqrt()).collect();
    let c1: Vec<T> = window.iter().zip(&s).map(|(&i, &si)| si * profile(i).0).collect();
    let c2: Vec<T> = window.iter().zip(&s).map(|(&i, &si)| si * profile(i).1).collect();
    let y: Vec<V> = window.iter().zip(&s).map(|(&i, &si)| values[i].scale(si)).collect();
    let dot = |a: &[T], b: &[T]| a.iter().zip(b).map(|(x, y)| *x * *y).sum::<T>();
    let n1 = dot(&c1, &c1).sqrt();
    let q1: Vec<T> = c1.iter().map(|v| *v / n1).collect();
    let r12 = dot(&q1, &c2);
    let c2p: Vec<T> = c2.iter().zip(&q1).map(|(c, q)| *c - r12 * *q).collect();
    let n2 = dot(&c2p, &c2p).sqrt();
    let q2: Vec<T> = c2p.iter().map(|v| *v / n2).collect();
    let proj = |q: &[T]| y.iter().zip(q).map(|(yi, qi)| yi.scale(*qi)).sum::<V>();
    let b = proj(&q2).scale(T::one() / n2);
    let a = (proj(&q1) - b.scale(r12)).scale(T::one() / n1);
    let mut res2 = T::zero();
    let mut y2 = T::zero();
    for j in 0..window.len() {
        res2 += (y[j] - a.scale(c1[j]) - b.scale(c2[j])).norm_sqr();
        y2 += y[j].norm_sqr();
    }
    let res = if y2 > T::zero() { (res2 / y2).sqrt() } else { res2.sqrt() };
    (a, b, res)
}
