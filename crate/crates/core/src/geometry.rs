//! Metric, measure and curvature of the surface `dx^2 + |x|^(-2a) dtheta^2`.

use std::io::{self, Write};

use thiserror::Error;

use crate::quadrature::{cumulative_uniform, gl16_integrate};
use crate::scalar::{abs_pow, Real};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("quantity is singular at x = 0")]
    SingularPoint,
    #[error("segment {segment} crosses x = 0 with angular motion; cost is infinite for alpha >= 0")]
    InfiniteCost { segment: usize },
    #[error("unsupported parameter: {0}")]
    Unsupported(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("profile stops being a graph over the axis near t = {t}")]
    ProfileBreakdown { t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeGeometry<T> {
    alpha: T,
}

impl<T: Real> ConeGeometry<T> {
    pub fn new(alpha: T) -> Result<Self, GeometryError> {
        if !alpha.is_finite() {
            return Err(GeometryError::InvalidArgument("alpha must be finite".into()));
        }
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    /// Coefficient `|x|^(-2a)` of `dtheta^2`.
    pub fn angular_metric(&self, x: T) -> Result<T, GeometryError> {
        nonzero(x)?;
        Ok(abs_pow(x, -T::c(2.0) * self.alpha))
    }

    /// Riemannian density `|x|^(-a)` with respect to `dx dtheta`.
    pub fn volume_density(&self, x: T) -> Result<T, GeometryError> {
        nonzero(x)?;
        Ok(abs_pow(x, -self.alpha))
    }

    /// Gaussian curvature `-a(1+a)/x^2`.
    pub fn gaussian_curvature(&self, x: T) -> Result<T, GeometryError> {
        nonzero(x)?;
        Ok(-self.alpha * (T::one() + self.alpha) / (x * x))
    }

    /// Length of a polyline, each segment straight in the (x, theta) chart.
    pub fn path_length(&self, path: &Polyline<T>) -> Result<T, GeometryError> {
        let zero = T::zero();
        let mut total = zero;
        for (idx, pair) in path.vertices.windows(2).enumerate() {
            let (x0, t0) = pair[0];
            let (x1, t1) = pair[1];
            let dx = x1 - x0;
            let dth = shorter_arc(t1 - t0);
            let crosses = (x0 < zero && x1 > zero) || (x0 > zero && x1 < zero);
            let touches = x0 == zero || x1 == zero;
            if (crosses || touches) && dth != zero && self.alpha >= zero {
                return Err(GeometryError::InfiniteCost { segment: idx });
            }
            let a2 = -T::c(2.0) * self.alpha;
            let speed = |s: T| {
                let x = x0 + s * dx;
                let ang = if x == zero { zero } else { abs_pow(x, a2) };
                (dx * dx + ang * dth * dth).sqrt()
            };
            if crosses {
                let s_star = x0 / (x0 - x1);
                total += gl16_integrate(zero, s_star, speed) + gl16_integrate(s_star, T::one(), speed);
            } else {
                total += gl16_integrate(zero, T::one(), speed);
            }
        }
        Ok(total)
    }

    /// Distance from `(x, theta)` to the singular circle; realized by the radial path.
    pub fn distance_to_singularity(&self, x: T, _theta: T) -> T {
        x.abs()
    }

    /// Profile `r(t)` of an isometric surface of revolution, obtained by integrating
    /// `r' = (a^-2 r^(-2(1+1/a)) - 1)^(-1/2)` from the nonzero branch at `r(0) = 0`.
    pub fn revolution_profile(&self, t_max: T, steps: usize) -> Result<RevolutionProfile<T>, GeometryError> {
        let grid = self.profile_grid(t_max, steps)?;
        let a = self.alpha;
        if a == -T::one() {
            return Ok(RevolutionProfile { r_values: grid.clone(), x_values: grid.clone(), t_grid: grid });
        }
        let rhs = |r: T| profile_slope(a, r);
        let t_seed = T::c(1e-3) * t_max;
        let series = |t: T| t.powf(-a);
        let mut r_values = Vec::with_capacity(grid.len());
        let mut t_cur = t_seed;
        let mut r_cur = series(t_seed);
        let mut h = t_seed * T::c(1e-2);
        for &t in &grid {
            if t <= t_seed {
                r_values.push(series(t));
                continue;
            }
            while t_cur < t {
                let h_try = h.min(t - t_cur);
                let (r_new, err) = dormand_prince_step(&rhs, r_cur, h_try)
                    .ok_or(GeometryError::ProfileBreakdown { t: (t_cur + h_try).to_f64_lossy() })?;
                let scale = T::c(1e-14) + T::c(1e-12) * r_new.abs();
                let ratio = err / scale;
                if ratio <= T::one() {
                    t_cur += h_try;
                    r_cur = r_new;
                }
                let factor = if ratio == T::zero() {
                    T::c(5.0)
                } else {
                    (T::c(0.9) * ratio.powf(T::c(-0.2))).max(T::c(0.2)).min(T::c(5.0))
                };
                h = h_try * factor;
                if h < t_max * T::c(1e-16) {
                    return Err(GeometryError::ProfileBreakdown { t: t_cur.to_f64_lossy() });
                }
            }
            r_values.push(r_cur);
        }
        let arclength_density: Vec<T> = r_values
            .iter()
            .map(|&r| {
                let s = profile_slope(a, r).unwrap_or(T::infinity());
                (T::one() + s * s).sqrt()
            })
            .collect();
        let step = t_max / T::from_usize_lossy(steps);
        let x_values = cumulative_uniform(&arclength_density, step);
        Ok(RevolutionProfile { t_grid: grid, r_values, x_values })
    }

    /// The same profile from the fixed-point iteration `x = int_0^t sqrt(1 + r'^2)`,
    /// `r = x^(-a)`, written in terms of the arclength `x(t)`.
    pub fn revolution_profile_fixed_point(&self, t_max: T, steps: usize) -> Result<RevolutionProfile<T>, GeometryError> {
        let grid = self.profile_grid(t_max, steps)?;
        let a = self.alpha;
        if a == -T::one() {
            return Ok(RevolutionProfile { r_values: grid.clone(), x_values: grid.clone(), t_grid: grid });
        }
        let step = t_max / T::from_usize_lossy(steps);
        let mut x = grid.clone();
        for _ in 0..500 {
            let mut density = Vec::with_capacity(x.len());
            for (j, &xj) in x.iter().enumerate() {
                let g = -a * xj.powf(-a - T::one());
                if g >= T::one() {
                    return Err(GeometryError::ProfileBreakdown { t: grid[j].to_f64_lossy() });
                }
                density.push(T::one() / (T::one() - g * g).sqrt());
            }
            let next = cumulative_uniform(&density, step);
            let change = next.iter().zip(&x).map(|(p, q)| (*p - *q).abs()).fold(T::zero(), T::max);
            x = next;
            if change <= T::epsilon() * T::c(4.0) * t_max {
                break;
            }
        }
        let r_values = x.iter().map(|&xi| xi.powf(-a)).collect();
        Ok(RevolutionProfile { t_grid: grid, r_values, x_values: x })
    }

    fn profile_grid(&self, t_max: T, steps: usize) -> Result<Vec<T>, GeometryError> {
        if self.alpha > -T::one() {
            return Err(GeometryError::Unsupported(format!(
                "revolution profile needs alpha <= -1, got {}",
                self.alpha
            )));
        }
        if t_max <= T::zero() || !t_max.is_finite() {
            return Err(GeometryError::InvalidArgument("t_max must be positive".into()));
        }
        if steps < 4 {
            return Err(GeometryError::InvalidArgument("steps must be at least 4".into()));
        }
        let n = T::from_usize_lossy(steps);
        Ok((0..=steps).map(|j| t_max * T::from_usize_lossy(j) / n).collect())
    }
}

fn nonzero<T: Real>(x: T) -> Result<(), GeometryError> {
    if x == T::zero() {
        Err(GeometryError::SingularPoint)
    } else {
        Ok(())
    }
}

fn shorter_arc<T: Real>(d: T) -> T {
    let two_pi = T::TAU();
    let mut d = d % two_pi;
    if d > T::PI() {
        d -= two_pi;
    } else if d <= -T::PI() {
        d += two_pi;
    }
    d
}

fn profile_slope<T: Real>(a: T, r: T) -> Option<T> {
    if r <= T::zero() {
        return Some(T::zero());
    }
    let g = -a * r.powf(T::one() + T::one() / a);
    if g >= T::one() {
        return None;
    }
    Some(g / (T::one() - g * g).sqrt())
}

/// One Dormand–Prince 5(4) step of the autonomous scalar ODE `r' = f(r)`.
fn dormand_prince_step<T: Real>(f: &impl Fn(T) -> Option<T>, r: T, h: T) -> Option<(T, T)> {
    let c = T::c;
    let k1 = f(r)?;
    let k2 = f(r + h * c(1.0 / 5.0) * k1)?;
    let k3 = f(r + h * (c(3.0 / 40.0) * k1 + c(9.0 / 40.0) * k2))?;
    let k4 = f(r + h * (c(44.0 / 45.0) * k1 - c(56.0 / 15.0) * k2 + c(32.0 / 9.0) * k3))?;
    let k5 = f(r + h
        * (c(19372.0 / 6561.0) * k1 - c(25360.0 / 2187.0) * k2 + c(64448.0 / 6561.0) * k3
            - c(212.0 / 729.0) * k4))?;
    let k6 = f(r + h
        * (c(9017.0 / 3168.0) * k1 - c(355.0 / 33.0) * k2
            + c(46732.0 / 5247.0) * k3
            + c(49.0 / 176.0) * k4
            - c(5103.0 / 18656.0) * k5))?;
    let r5 = r + h
        * (c(35.0 / 384.0) * k1 + c(500.0 / 1113.0) * k3 + c(125.0 / 192.0) * k4
            - c(2187.0 / 6784.0) * k5
            + c(11.0 / 84.0) * k6);
    let k7 = f(r5)?;
    let r4 = r + h
        * (c(5179.0 / 57600.0) * k1 + c(7571.0 / 16695.0) * k3 + c(393.0 / 640.0) * k4
            - c(92097.0 / 339200.0) * k5
            + c(187.0 / 2100.0) * k6
            + c(1.0 / 40.0) * k7);
    Some((r5, (r5 - r4).abs()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polyline<T> {
    vertices: Vec<(T, T)>,
}

impl<T: Real> Polyline<T> {
    /// Builds a polyline from `(x, theta)` vertices; angles are reduced to [0, 2pi).
    pub fn new(vertices: Vec<(T, T)>) -> Result<Self, GeometryError> {
        if vertices.len() < 2 {
            return Err(GeometryError::InvalidArgument("a polyline needs at least two vertices".into()));
        }
        if vertices.iter().any(|(x, t)| !x.is_finite() || !t.is_finite()) {
            return Err(GeometryError::InvalidArgument("vertices must be finite".into()));
        }
        let two_pi = T::TAU();
        let vertices = vertices
            .into_iter()
            .map(|(x, t)| {
                let mut t = t % two_pi;
                if t < T::zero() {
                    t += two_pi;
                }
                (x, t)
            })
            .collect();
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[(T, T)] {
        &self.vertices
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RevolutionProfile<T> {
    pub t_grid: Vec<T>,
    pub r_values: Vec<T>,
    pub x_values: Vec<T>,
}

impl<T: Real> RevolutionProfile<T> {
    /// Writes the `t,r` table, one row per grid point.
    pub fn write_table(&self, mut out: impl Write) -> io::Result<()> {
        writeln!(out, "t,r")?;
        for (t, r) in self.t_grid.iter().zip(&self.r_values) {
            writeln!(out, "{t:.12e},{r:.12e}")?;
        }
        Ok(())
    }
}
