use std::fmt;

use super::{ModeOperator, Side, SlError};
use crate::quadrature::gauss_legendre;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Endpoint {
    ZeroPlus,
    ZeroMinus,
    PlusInfinity,
    MinusInfinity,
}

impl Endpoint {
    pub const ALL: [Endpoint; 4] =
        [Endpoint::ZeroPlus, Endpoint::ZeroMinus, Endpoint::PlusInfinity, Endpoint::MinusInfinity];

    pub fn is_finite(self) -> bool {
        matches!(self, Endpoint::ZeroPlus | Endpoint::ZeroMinus)
    }

    fn side(self) -> Side {
        match self {
            Endpoint::ZeroPlus | Endpoint::PlusInfinity => Side::Plus,
            _ => Side::Minus,
        }
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Endpoint::ZeroPlus => "0+",
            Endpoint::ZeroMinus => "0-",
            Endpoint::PlusInfinity => "+inf",
            Endpoint::MinusInfinity => "-inf",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classification {
    LimitPoint,
    LimitCircle,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::LimitPoint => "limit-point",
            Classification::LimitCircle => "limit-circle",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EndpointReport {
    pub endpoint: Endpoint,
    pub classification: Classification,
    pub regular: bool,
}

impl<T: Real> ModeOperator<T> {
    /// Analytic classification of one endpoint.
    pub fn classify_analytic(&self, endpoint: Endpoint) -> EndpointReport {
        let a = self.alpha;
        let one = T::one();
        let classification = if endpoint.is_finite() && self.limit_circle_at_zero() {
            Classification::LimitCircle
        } else {
            Classification::LimitPoint
        };
        let regular = endpoint.is_finite() && a > -one && a < one;
        EndpointReport { endpoint, classification, regular }
    }

    /// Whether both finite endpoints are limit-circle.
    pub fn limit_circle_at_zero(&self) -> bool {
        let a = self.alpha;
        let one = T::one();
        if self.k == 0 {
            a > -T::c(3.0) && a < one
        } else {
            a > -one && a < one
        }
    }

    /// Classification checked against the numeric square-integrability test of the
    /// reference solutions.
    pub fn classify_endpoint(&self, endpoint: Endpoint) -> Result<EndpointReport, SlError> {
        let report = self.classify_analytic(endpoint);
        let numeric = self.classify_numeric(endpoint);
        if numeric != report.classification {
            return Err(SlError::InternalConsistency {
                endpoint,
                alpha: self.alpha.to_f64_lossy(),
                k: self.k,
            });
        }
        Ok(report)
    }

    /// Limit-circle iff both reference solutions are square-integrable near the endpoint.
    ///
    /// Integrals over successive decades approaching the endpoint must shrink
    /// geometrically for the tail to be finite. The scan starts on `[1e-6, 1e-2]`
    /// (or `[1e2, 1e6]`) and keeps going while the decay has not set in, since
    /// exponential factors can mask the power law on the first decades.
    pub fn classify_numeric(&self, endpoint: Endpoint) -> Classification {
        let op = ModeOperator { alpha: self.alpha.to_f64_lossy(), k: self.k };
        let pair = op.reference_solutions(endpoint.side());
        let toward = if endpoint.is_finite() { -1 } else { 1 };
        let shell = |which: u8, j: i32| {
            let (a, b) = (toward * j, toward * (j + 1));
            log_shell_integral(|y: f64| pair.log_weighted_square(which, y), a.min(b), a.max(b))
        };
        let both = [1u8, 2].iter().all(|&which| {
            let mut logs: Vec<f64> = (2..6).map(|j| shell(which, j)).collect();
            let mut j = 6;
            loop {
                let last = logs[logs.len() - 1] - logs[logs.len() - 2];
                if last.is_nan() || last >= f64::INFINITY {
                    return false;
                }
                if last < -1e-6 {
                    return true;
                }
                if j >= MAX_DECADES {
                    return false;
                }
                logs.push(shell(which, j));
                j += 1;
            }
        });
        if both {
            Classification::LimitCircle
        } else {
            Classification::LimitPoint
        }
    }

    /// `(n+, n-)`: the number of limit-circle endpoints, counted twice.
    pub fn deficiency_indices(&self) -> Result<(usize, usize), SlError> {
        let mut n = 0;
        for e in Endpoint::ALL {
            if self.classify_endpoint(e)?.classification == Classification::LimitCircle {
                n += 1;
            }
        }
        Ok((n, n))
    }
}

const MAX_DECADES: i32 = 120;

/// `ln` of the integral of `exp(log_f(y))` over `[10^lo, 10^hi]`, computed in `ln y`.
fn log_shell_integral(log_f: impl Fn(f64) -> f64, lo: i32, hi: i32) -> f64 {
    let (nodes, weights) = gauss_legendre(24);
    let ln10 = std::f64::consts::LN_10;
    let pieces = 8;
    let a = lo as f64 * ln10;
    let b = hi as f64 * ln10;
    let step = (b - a) / pieces as f64;
    let mut terms = Vec::with_capacity(pieces * nodes.len());
    for j in 0..pieces {
        let mid = a + step * (j as f64 + 0.5);
        for (z, w) in nodes.iter().zip(&weights) {
            let s = mid + 0.5 * step * z;
            let val = log_f(s.exp()) + s + (0.5 * step * w).ln();
            terms.push(val);
        }
    }
    let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}
