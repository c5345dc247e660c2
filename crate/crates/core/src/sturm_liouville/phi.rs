use super::SlError;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhiKind {
    DirichletPlus,
    NeumannPlus,
    DirichletMinus,
    NeumannMinus,
}

/// Profiles carrying the boundary values at the singularity.
///
/// On `0 < |x| <= 1` they are `1` and `x^(1+a)/(1+a)` (or `ln x`), cut off smoothly on
/// `[1, 2]`. The minus-side Neumann profile is normalized so that `|x|^-a u'` tends
/// to 1 at `0-`, like its plus-side twin at `0+`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiBasis<T> {
    alpha: T,
}

impl<T: Real> PhiBasis<T> {
    pub fn new(alpha: T) -> Result<Self, SlError> {
        if !(alpha > -T::c(3.0) && alpha < T::one()) {
            return Err(SlError::Unsupported(format!(
                "boundary profiles exist only for alpha in (-3, 1), got {alpha}"
            )));
        }
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    /// Singular profile without cutoff, for `y = |x| > 0`.
    pub fn neumann_inner(&self, y: T) -> T {
        let b = T::one() + self.alpha;
        if b == T::zero() {
            y.ln()
        } else {
            y.powf(b) / b
        }
    }

    fn neumann_inner_derivative(&self, y: T) -> T {
        y.powf(self.alpha)
    }

    /// Value and derivative of one basis function at `x`.
    pub fn eval(&self, kind: PhiKind, x: T) -> (T, T) {
        let zero = T::zero();
        let plus = matches!(kind, PhiKind::DirichletPlus | PhiKind::NeumannPlus);
        if (plus && x <= zero) || (!plus && x >= zero) {
            return (zero, zero);
        }
        let y = x.abs();
        let (c, dc) = cutoff(y);
        let (f, df) = match kind {
            PhiKind::DirichletPlus | PhiKind::DirichletMinus => (T::one(), zero),
            _ => (self.neumann_inner(y), self.neumann_inner_derivative(y)),
        };
        let value = f * c;
        let dy = df * c + f * dc;
        match kind {
            PhiKind::DirichletPlus | PhiKind::NeumannPlus => (value, dy),
            PhiKind::DirichletMinus => (value, -dy),
            // -f(-x): value flips, derivative does not
            PhiKind::NeumannMinus => (-value, dy),
        }
    }

    pub fn value(&self, kind: PhiKind, x: T) -> T {
        self.eval(kind, x).0
    }
}

/// `1` on `[0, 1]`, quintic smoothstep down to `0` on `[1, 2]`.
fn cutoff<T: Real>(y: T) -> (T, T) {
    let one = T::one();
    if y <= one {
        return (one, T::zero());
    }
    if y >= T::c(2.0) {
        return (T::zero(), T::zero());
    }
    let t = y - one;
    let t2 = t * t;
    let t3 = t2 * t;
    let s = one - (T::c(6.0) * t3 * t2 - T::c(15.0) * t2 * t2 + T::c(10.0) * t3);
    let ds = -T::c(30.0) * t2 * (one - t) * (one - t);
    (s, ds)
}

#[cfg(test)]
mod tests {
    use super::super::mode_operator;
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn examples() {
        let b = PhiBasis::new(0.3).unwrap();
        assert_eq!(b.value(PhiKind::DirichletPlus, 0.5), 1.0);
        let b = PhiBasis::new(-1.0).unwrap();
        assert_abs_diff_eq!(b.value(PhiKind::NeumannPlus, (-1f64).exp()), -1.0, epsilon = 1e-15);
        let b = PhiBasis::new(0.0).unwrap();
        assert_abs_diff_eq!(b.value(PhiKind::NeumannPlus, 0.25), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn rejects_outside_interval() {
        assert!(PhiBasis::new(1.0).is_err());
        assert!(PhiBasis::new(-3.0).is_err());
        assert!(PhiBasis::<f64>::new(-2.99).is_ok());
    }

    #[test]
    fn supports() {
        let b = PhiBasis::new(-0.5).unwrap();
        for kind in [PhiKind::DirichletPlus, PhiKind::NeumannPlus] {
            assert_eq!(b.eval(kind, -0.3), (0.0, 0.0));
            assert_eq!(b.eval(kind, 2.0), (0.0, 0.0));
        }
        for kind in [PhiKind::DirichletMinus, PhiKind::NeumannMinus] {
            assert_eq!(b.eval(kind, 0.3), (0.0, 0.0));
            assert_eq!(b.eval(kind, -2.5), (0.0, 0.0));
        }
        let (v, d) = b.eval(PhiKind::DirichletMinus, -1.5);
        let (vp, dp) = b.eval(PhiKind::DirichletPlus, 1.5);
        assert_eq!(v, vp);
        assert_eq!(d, -dp);
    }

    #[test]
    fn cutoff_is_c1_and_derivative_consistent() {
        let b = PhiBasis::new(0.2).unwrap();
        for kind in [PhiKind::DirichletPlus, PhiKind::NeumannPlus, PhiKind::DirichletMinus, PhiKind::NeumannMinus] {
            for &x in &[0.5, 1.2, 1.5, 1.9, -0.4, -1.3, -1.8] {
                let h = 1e-6;
                let fd = (b.value(kind, x + h) - b.value(kind, x - h)) / (2.0 * h);
                assert_abs_diff_eq!(fd, b.eval(kind, x).1, epsilon = 1e-7);
            }
        }
    }

    #[test]
    fn bracket_normalization() {
        for &a in &[-2.5, -1.0, 0.0, 0.5] {
            let b = PhiBasis::new(a).unwrap();
            let op = mode_operator(a, 0);
            for &x in &[1e-6, 1e-3, 0.5] {
                let dn = op.lagrange_bracket(|t| b.eval(PhiKind::DirichletPlus, t), |t| b.eval(PhiKind::NeumannPlus, t), x);
                let nd = op.lagrange_bracket(|t| b.eval(PhiKind::NeumannPlus, t), |t| b.eval(PhiKind::DirichletPlus, t), x);
                assert_abs_diff_eq!(dn, -1.0, epsilon = 1e-12);
                assert_abs_diff_eq!(nd, 1.0, epsilon = 1e-12);
                let dn_minus = op.lagrange_bracket(
                    |t| b.eval(PhiKind::DirichletMinus, t),
                    |t| b.eval(PhiKind::NeumannMinus, t),
                    -x,
                );
                assert_abs_diff_eq!(dn_minus, -1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn inner_profiles_solve_the_zero_mode() {
        for &a in &[-2.5, -1.0, 0.5] {
            let b = PhiBasis::new(a).unwrap();
            let op = mode_operator(a, 0);
            for &x in &[0.01f64, 0.3, 0.9, -0.2] {
                let h = 1e-5;
                let kind = if x > 0.0 { PhiKind::NeumannPlus } else { PhiKind::NeumannMinus };
                let (u, du) = b.eval(kind, x);
                let d2u = (b.eval(kind, x + h).1 - b.eval(kind, x - h).1) / (2.0 * h);
                let res = op.apply(x, u, du, d2u);
                assert!(res.abs() < 1e-4 * (1.0 + d2u.abs()), "a={a} x={x} res={res}");
            }
        }
    }
}
