//! Radial mode operators `u'' - (a/x) u' - |x|^(2a) k^2 u` in Sturm–Liouville form
//! `(1/w)(-(p u')' + q u)` with `w = |x|^-a`, `p = -|x|^-a`, `q = -k^2 |x|^a`.

mod boundary;
mod classify;
mod extension;
mod phi;

pub use boundary::{boundary_data, BoundaryData, BoundaryFit, FIT_RESIDUAL_TOL, FIT_WINDOW};
pub use classify::{Classification, Endpoint, EndpointReport};
pub use extension::{Coupling, ExtensionSpec, Resolved};
pub use phi::{PhiBasis, PhiKind};

use thiserror::Error;

use crate::scalar::{abs_pow, Real};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SlError {
    #[error("unsupported parameter: {0}")]
    Unsupported(String),
    #[error("numeric square-integrability test disagrees with the analytic table at {endpoint} (alpha={alpha}, k={k})")]
    InternalConsistency { endpoint: Endpoint, alpha: f64, k: i64 },
    #[error("mixed coupling matrix must have determinant 1, got {det}")]
    NotSymplectic { det: f64 },
    #[error("phase {gamma} outside (-pi, pi]")]
    PhaseOutOfRange { gamma: f64 },
    #[error("non-finite value in field `{0}`")]
    NonFinite(&'static str),
    #[error("invalid extension field `{field}`: {message}")]
    Parse { field: String, message: String },
    #[error("need at least two cells on each side of x = 0, found {found}")]
    InsufficientData { found: usize },
}

/// Which half-line a function lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn sign<T: Real>(self) -> T {
        match self {
            Side::Plus => T::one(),
            Side::Minus => -T::one(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeOperator<T> {
    alpha: T,
    k: i64,
}

/// Builds the operator for Fourier mode `k`.
pub fn mode_operator<T: Real>(alpha: T, k: i64) -> ModeOperator<T> {
    ModeOperator { alpha, k }
}

impl<T: Real> ModeOperator<T> {
    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn k(&self) -> i64 {
        self.k
    }

    fn k2(&self) -> T {
        let k = T::from_i64(self.k).expect("mode index representable");
        k * k
    }

    pub fn w(&self, x: T) -> T {
        abs_pow(x, -self.alpha)
    }

    pub fn p(&self, x: T) -> T {
        -abs_pow(x, -self.alpha)
    }

    pub fn q(&self, x: T) -> T {
        -self.k2() * abs_pow(x, self.alpha)
    }

    /// Potential term `|x|^(2a) k^2` of the expanded operator.
    pub fn potential(&self, x: T) -> T {
        self.k2() * abs_pow(x, T::c(2.0) * self.alpha)
    }

    /// Expanded form, given `u`, `u'`, `u''` at `x`.
    pub fn apply(&self, x: T, u: T, du: T, d2u: T) -> T {
        d2u - self.alpha / x * du - self.potential(x) * u
    }

    /// Sturm–Liouville form, given `u`, `u'`, `u''` at `x`.
    pub fn apply_sturm_liouville(&self, x: T, u: T, du: T, d2u: T) -> T {
        let p = self.p(x);
        let dp = self.alpha * abs_pow(x, -self.alpha) / x;
        (-(dp * du + p * d2u) + self.q(x) * u) / self.w(x)
    }

    /// Lagrange bracket `u p v' - v p u'` at `x`; `u` and `v` return (value, derivative).
    pub fn lagrange_bracket(&self, u: impl Fn(T) -> (T, T), v: impl Fn(T) -> (T, T), x: T) -> T {
        let (u0, u1) = u(x);
        let (v0, v1) = v(x);
        let p = self.p(x);
        u0 * p * v1 - v0 * p * u1
    }

    /// Closed-form solutions of the homogeneous equation on one side.
    pub fn reference_solutions(&self, side: Side) -> ReferencePair<T> {
        ReferencePair { alpha: self.alpha, k: self.k, side }
    }
}

/// Two independent solutions of `A u = 0` on one half-line.
#[derive(Debug, Clone, Copy)]
pub struct ReferencePair<T> {
    alpha: T,
    k: i64,
    side: Side,
}

impl<T: Real> ReferencePair<T> {
    /// Value, first and second derivative of solution `which` (1 or 2) at `x`.
    pub fn eval(&self, which: u8, x: T) -> (T, T, T) {
        let s = self.side.sign::<T>();
        let y = x * s;
        let (f, df, d2f) = self.eval_positive(which, y);
        (f, s * df, d2f)
    }

    pub fn first(&self, x: T) -> (T, T, T) {
        self.eval(1, x)
    }

    pub fn second(&self, x: T) -> (T, T, T) {
        self.eval(2, x)
    }

    fn eval_positive(&self, which: u8, y: T) -> (T, T, T) {
        let a = self.alpha;
        let one = T::one();
        let k = T::from_i64(self.k).unwrap();
        let flat = a == -one;
        if self.k == 0 {
            if which == 1 {
                return (one, T::zero(), T::zero());
            }
            if flat {
                return (y.ln(), one / y, -one / (y * y));
            }
            let b = one + a;
            return (y.powf(b), b * y.powf(a), b * a * y.powf(a - one));
        }
        let sgn = if which == 1 { one } else { -one };
        if flat {
            let e = sgn * k;
            return (y.powf(e), e * y.powf(e - one), e * (e - one) * y.powf(e - T::c(2.0)));
        }
        let b = one + a;
        let u = (sgn * k * y.powf(b) / b).exp();
        let du = sgn * k * y.powf(a) * u;
        let d2u = (sgn * k * a * y.powf(a - one) + k * k * y.powf(T::c(2.0) * a)) * u;
        (u, du, d2u)
    }

    /// `ln(|u_which|^2 w)` at `|x| = y > 0`; finite where the plain value would overflow.
    pub(crate) fn log_weighted_square(&self, which: u8, y: T) -> T {
        let a = self.alpha;
        let one = T::one();
        let two = T::c(2.0);
        let lnw = -a * y.ln();
        let k = T::from_i64(self.k).unwrap();
        let sgn = if which == 1 { one } else { -one };
        let ln_u2 = if self.k == 0 {
            if which == 1 {
                T::zero()
            } else if a == -one {
                two * y.ln().abs().ln()
            } else {
                two * (one + a) * y.ln()
            }
        } else if a == -one {
            two * sgn * k * y.ln()
        } else {
            two * sgn * k * y.powf(one + a) / (one + a)
        };
        ln_u2 + lnw
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn operator_examples() {
        // u = x^2 at x = 1
        assert_abs_diff_eq!(mode_operator(0.0, 0).apply(1.0, 1.0, 2.0, 2.0), 2.0);
        assert_abs_diff_eq!(mode_operator(1.0, 0).apply(1.0, 1.0, 2.0, 2.0), 0.0);
        assert_abs_diff_eq!(mode_operator(-1.0, 2).apply(1.0, 1.0, 2.0, 2.0), 0.0);
    }

    #[test]
    fn bracket_examples() {
        let op = mode_operator(0.0, 0);
        let one = |_: f64| (1.0, 0.0);
        let id = |x: f64| (x, 1.0);
        assert_abs_diff_eq!(op.lagrange_bracket(one, id, 0.5), -1.0);
        assert_abs_diff_eq!(op.lagrange_bracket(id, id, 0.5), 0.0);
    }

    #[test]
    fn reference_values() {
        let r = mode_operator(-1.0, 0).reference_solutions(Side::Plus);
        assert_abs_diff_eq!(r.second(std::f64::consts::E).0, 1.0, epsilon = 1e-15);
        let r = mode_operator(0.0, 1).reference_solutions(Side::Plus);
        let (u, _, d2u) = r.first(0.8);
        assert_abs_diff_eq!(u, 0.8f64.exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(d2u - u, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn reference_residuals_vanish_on_log_grid() {
        for &a in &[-4.0, -3.0, -2.5, -1.0, -0.5, 0.0, 0.5, 0.99, 1.0, 2.0] {
            for k in 0..4 {
                let op = mode_operator(a, k);
                for side in [Side::Plus, Side::Minus] {
                    let pair = op.reference_solutions(side);
                    for j in 0..41 {
                        let y = 10f64.powf(-2.0 + 4.0 * j as f64 / 40.0);
                        let x = y * side.sign::<f64>();
                        for which in [1, 2] {
                            let (u, du, d2u) = pair.eval(which, x);
                            let scale = u.abs().max(du.abs() * y).max(d2u.abs() * y * y).max(1.0);
                            if !scale.is_finite() {
                                continue;
                            }
                            let res = op.apply(x, u, du, d2u) * y * y / scale;
                            assert!(res.abs() <= 1e-10, "a={a} k={k} x={x} which={which} res={res}");
                        }
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn forms_agree(a in -3.0f64..2.0, k in 0i64..4, x in 0.05f64..3.0, c in -2.0f64..2.0) {
            let op = mode_operator(a, k);
            for xs in [x, -x] {
                let u = (c * xs).sin() + xs * xs;
                let du = c * (c * xs).cos() + 2.0 * xs;
                let d2u = -c * c * (c * xs).sin() + 2.0;
                let lhs = op.apply(xs, u, du, d2u);
                let rhs = op.apply_sturm_liouville(xs, u, du, d2u);
                prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
            }
        }

        #[test]
        fn bracket_antisymmetric_and_bilinear(a in -2.5f64..0.9, x in 0.1f64..2.0,
            p in -3.0f64..3.0, q in -3.0f64..3.0, s in -2.0f64..2.0) {
            let op = mode_operator(a, 0);
            let u = move |t: f64| ((p * t).sin(), p * (p * t).cos());
            let v = move |t: f64| (t.exp() * q, t.exp() * q);
            let z = move |t: f64| (t * t + s, 2.0 * t);
            let uv = op.lagrange_bracket(u, v, x);
            let vu = op.lagrange_bracket(v, u, x);
            prop_assert!((uv + vu).abs() <= 1e-12 * (1.0 + uv.abs()));
            let sum = move |t: f64| { let (a0, a1) = v(t); let (b0, b1) = z(t); (a0 + s * b0, a1 + s * b1) };
            let lin = op.lagrange_bracket(u, sum, x);
            let parts = uv + s * op.lagrange_bracket(u, z, x);
            prop_assert!((lin - parts).abs() <= 1e-12 * (1.0 + lin.abs().max(parts.abs())));
        }
    }
}
