use std::fmt;
use std::str::FromStr;

use num_complex::Complex;

use super::{BoundaryData, SlError};
use crate::scalar::{Field, Real};

/// Coupling constant of a decoupled boundary condition `u_N = c u_D`; infinity means `u_D = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coupling<T> {
    Finite(T),
    Infinite,
}

/// A self-adjoint realization at the singularity, by its boundary conditions on
/// `(u_D+, u_N+, u_D-, u_N-)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtensionSpec<T> {
    /// `u_N+ = c+ u_D+` and `u_N- = c- u_D-`.
    Disjoint { c_plus: Coupling<T>, c_minus: Coupling<T> },
    /// `(u_D-, u_N-) = e^(i gamma) K (u_D+, u_N+)` with `det K = 1`.
    Mixed { k: [[T; 2]; 2], gamma: T },
    Friedrichs,
    /// Reflecting on each side: zero flux at `0+` and `0-`, sides decoupled.
    Neumann,
    Bridging,
}

/// An extension after presets have been expanded for a given `alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Resolved<T> {
    Disjoint { c_plus: Coupling<T>, c_minus: Coupling<T> },
    Mixed { k: [[T; 2]; 2], gamma: T },
    ZeroFlux,
}

impl<T: Real> ExtensionSpec<T> {
    pub fn disjoint(c_plus: Coupling<T>, c_minus: Coupling<T>) -> Self {
        ExtensionSpec::Disjoint { c_plus, c_minus }
    }

    pub fn mixed(k: [[T; 2]; 2], gamma: T) -> Self {
        ExtensionSpec::Mixed { k, gamma }
    }

    pub fn is_friedrichs(&self) -> bool {
        matches!(self, ExtensionSpec::Friedrichs)
    }

    /// Whether the condition involves a phase and so needs complex states.
    pub fn needs_complex(&self) -> bool {
        matches!(self, ExtensionSpec::Mixed { gamma, .. } if *gamma != T::zero())
    }

    /// Checks `det K = 1`, the phase range and finiteness.
    pub fn validate(&self) -> Result<(), SlError> {
        match *self {
            ExtensionSpec::Disjoint { c_plus, c_minus } => {
                for c in [c_plus, c_minus] {
                    if let Coupling::Finite(v) = c {
                        if !v.is_finite() {
                            return Err(SlError::NonFinite("c"));
                        }
                    }
                }
                Ok(())
            }
            ExtensionSpec::Mixed { k, gamma } => {
                if k.iter().flatten().any(|v| !v.is_finite()) {
                    return Err(SlError::NonFinite("k"));
                }
                if !gamma.is_finite() {
                    return Err(SlError::NonFinite("gamma"));
                }
                if !(gamma > -T::PI() && gamma <= T::PI()) {
                    return Err(SlError::PhaseOutOfRange { gamma: gamma.to_f64_lossy() });
                }
                let det = k[0][0] * k[1][1] - k[0][1] * k[1][0];
                let scale = k.iter().flatten().fold(T::one(), |m, v| m.max(v.abs()));
                if (det - T::one()).abs() > T::c(1e-12) * scale * scale {
                    return Err(SlError::NotSymplectic { det: det.to_f64_lossy() });
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Expands presets: Friedrichs is `u_N = 0` for `alpha <= -1` and `u_D = 0` above;
    /// bridging is `K = I`.
    pub fn resolve(&self, alpha: T) -> Resolved<T> {
        match *self {
            ExtensionSpec::Friedrichs => {
                let c = if alpha <= -T::one() { Coupling::Finite(T::zero()) } else { Coupling::Infinite };
                Resolved::Disjoint { c_plus: c, c_minus: c }
            }
            ExtensionSpec::Bridging => Resolved::Mixed {
                k: [[T::one(), T::zero()], [T::zero(), T::one()]],
                gamma: T::zero(),
            },
            ExtensionSpec::Neumann => Resolved::ZeroFlux,
            ExtensionSpec::Disjoint { c_plus, c_minus } => Resolved::Disjoint { c_plus, c_minus },
            ExtensionSpec::Mixed { k, gamma } => Resolved::Mixed { k, gamma },
        }
    }

    /// Euclidean norm of the defect of the linear boundary conditions.
    pub fn residual<V: Field<Real = T>>(&self, alpha: T, bd: &BoundaryData<V>) -> T {
        let [dp, np, dm, nm] = bd.as_array().map(Field::to_complex);
        let side = |c: Coupling<T>, d: Complex<T>, n: Complex<T>| match c {
            Coupling::Finite(c) => (n - d * c).norm_sqr(),
            Coupling::Infinite => d.norm_sqr(),
        };
        match self.resolve(alpha) {
            Resolved::Disjoint { c_plus, c_minus } => (side(c_plus, dp, np) + side(c_minus, dm, nm)).sqrt(),
            Resolved::Mixed { k, gamma } => {
                let e = Complex::from_polar(T::one(), gamma);
                let rd = dm - e * (dp * k[0][0] + np * k[0][1]);
                let rn = nm - e * (dp * k[1][0] + np * k[1][1]);
                (rd.norm_sqr() + rn.norm_sqr()).sqrt()
            }
            Resolved::ZeroFlux => (np.norm_sqr() + nm.norm_sqr()).sqrt(),
        }
    }
}

impl<T: Real> fmt::Display for Coupling<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coupling::Finite(v) => write!(f, "{v}"),
            Coupling::Infinite => f.write_str("inf"),
        }
    }
}

impl<T: Real> fmt::Display for ExtensionSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtensionSpec::Friedrichs => f.write_str("friedrichs"),
            ExtensionSpec::Neumann => f.write_str("neumann"),
            ExtensionSpec::Bridging => f.write_str("bridging"),
            ExtensionSpec::Disjoint { c_plus, c_minus } => write!(f, "disjoint c+={c_plus} c-={c_minus}"),
            ExtensionSpec::Mixed { k, gamma } => write!(
                f,
                "mixed k11={} k12={} k21={} k22={} gamma={}",
                k[0][0], k[0][1], k[1][0], k[1][1], gamma
            ),
        }
    }
}

fn parse_error(field: &str, message: impl Into<String>) -> SlError {
    SlError::Parse { field: field.to_string(), message: message.into() }
}

fn parse_real<T: Real>(field: &str, raw: &str) -> Result<T, SlError> {
    let v: f64 = raw.parse().map_err(|_| parse_error(field, format!("`{raw}` is not a number")))?;
    if !v.is_finite() {
        return Err(parse_error(field, "must be finite"));
    }
    Ok(T::c(v))
}

fn parse_coupling<T: Real>(field: &str, raw: &str) -> Result<Coupling<T>, SlError> {
    match raw.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" | "+infinity" => Ok(Coupling::Infinite),
        _ => parse_real(field, raw).map(Coupling::Finite),
    }
}

impl<T: Real> FromStr for ExtensionSpec<T> {
    type Err = SlError;

    /// Parses `friedrichs`, `neumann`, `bridging`, `disjoint c+=<v> c-=<v>` or
    /// `mixed k11=<v> k12=<v> k21=<v> k22=<v> [gamma=<v>]`.
    fn from_str(s: &str) -> Result<Self, SlError> {
        let mut words = s.split_whitespace();
        let head = words.next().ok_or_else(|| parse_error("extension", "empty"))?;
        let pairs: Vec<(&str, &str)> = words
            .map(|w| w.split_once('=').ok_or_else(|| parse_error(w, "expected key=value")))
            .collect::<Result<_, _>>()?;
        let take = |key: &str| -> Option<&str> { pairs.iter().find(|(k, _)| *k == key).map(|(_, v)| *v) };
        let allow = |keys: &[&str]| -> Result<(), SlError> {
            for (k, _) in &pairs {
                if !keys.contains(k) {
                    return Err(parse_error(k, "unknown key"));
                }
            }
            Ok(())
        };
        let spec = match head.to_ascii_lowercase().as_str() {
            "friedrichs" | "neumann" | "bridging" => {
                allow(&[])?;
                match head.to_ascii_lowercase().as_str() {
                    "friedrichs" => ExtensionSpec::Friedrichs,
                    "neumann" => ExtensionSpec::Neumann,
                    _ => ExtensionSpec::Bridging,
                }
            }
            "disjoint" => {
                allow(&["c+", "c-"])?;
                let cp = take("c+").ok_or_else(|| parse_error("c+", "missing"))?;
                let cm = take("c-").ok_or_else(|| parse_error("c-", "missing"))?;
                ExtensionSpec::Disjoint { c_plus: parse_coupling("c+", cp)?, c_minus: parse_coupling("c-", cm)? }
            }
            "mixed" => {
                allow(&["k11", "k12", "k21", "k22", "gamma"])?;
                let mut k = [[T::zero(); 2]; 2];
                for (i, j, key) in [(0, 0, "k11"), (0, 1, "k12"), (1, 0, "k21"), (1, 1, "k22")] {
                    let raw = take(key).ok_or_else(|| parse_error(key, "missing"))?;
                    k[i][j] = parse_real(key, raw)?;
                }
                let gamma = match take("gamma") {
                    Some(raw) => parse_real("gamma", raw)?,
                    None => T::zero(),
                };
                let spec = ExtensionSpec::Mixed { k, gamma };
                spec.validate().map_err(|e| match e {
                    SlError::NotSymplectic { det } => parse_error("k", format!("determinant {det} is not 1")),
                    SlError::PhaseOutOfRange { gamma } => parse_error("gamma", format!("{gamma} outside (-pi, pi]")),
                    other => other,
                })?;
                spec
            }
            other => return Err(parse_error("extension", format!("unknown kind `{other}`"))),
        };
        Ok(spec)
    }
}
