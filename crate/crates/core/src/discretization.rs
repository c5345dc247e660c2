//! Cell-centered finite volumes for the radial mode operators.
//!
//! Cells never straddle `x = 0`. Interior faces carry the flux `|x|^-a u'`, walls are
//! zero-flux unless a Dirichlet value is requested, and the two cells adjacent to the
//! singularity are coupled through the boundary values `(u_D, u_N)` of the chosen
//! extension. Fluxes are written so that `W A` is (Hermitian) symmetric, `W` being the
//! diagonal of cell weights.

use std::io::{self, Write};

use num_complex::Complex;
use num_traits::{Float, Zero};
use thiserror::Error;

use crate::linalg::{LinalgError, Tridiagonal};
use crate::scalar::{abs_pow, Field, Real};
use crate::sturm_liouville::{Coupling, ExtensionSpec, ModeOperator, Resolved, SlError};

/// Smallest admissible cell count.
pub const MIN_CELLS: usize = 16;

#[derive(Debug, Error)]
pub enum DiscretizationError {
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("extension `{spec}` is not applicable to mode k={k} at alpha={alpha}: {reason}")]
    NotApplicable { spec: String, alpha: f64, k: i64, reason: String },
    #[error("extension `{0}` has a nonzero phase and needs complex assembly")]
    ComplexRequired(String),
    #[error("extension `{0}` makes the interface elimination singular on this grid")]
    SingularCoupling(String),
    #[error(transparent)]
    Extension(#[from] SlError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Part of the line a grid covers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region<T> {
    /// `[-x_max, x_max]`, crossing the singularity.
    Full,
    /// `[-1, 1]` with walls at `|x| = 1`.
    InnerWalls,
    /// `[-x_max, -1]` and `[1, x_max]`, two uncoupled pieces.
    OuterRegion,
    /// `[lo, hi]` with `0 < lo < hi`; used for annulus problems.
    Interval { lo: T, hi: T },
}

impl<T: Real> std::fmt::Display for Region<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Region::Full => f.write_str("full"),
            Region::InnerWalls => f.write_str("inner"),
            Region::OuterRegion => f.write_str("outer"),
            Region::Interval { lo, hi } => write!(f, "interval[{lo},{hi}]"),
        }
    }
}

/// How a face conductance is computed from the coefficient `|x|^-a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FaceRule {
    /// `1 / ∫ |x|^a dx` between the adjacent centers: exact for the flux of the
    /// `k = 0` solutions, and consistent next to the singularity for every `a`.
    #[default]
    Harmonic,
    /// `|x_f|^-a / h` at the face midpoint.
    Midpoint,
}

/// Contiguous run of cells between two walls, all on one side of `0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece<T> {
    pub start: usize,
    pub len: usize,
    pub lo: T,
    pub hi: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid<T> {
    alpha: T,
    region: Region<T>,
    h: T,
    cells: Vec<T>,
    weights: Vec<T>,
    pieces: Vec<Piece<T>>,
    face_rule: FaceRule,
}

/// Uniform cell-centered grid; `x_max` is ignored for `InnerWalls` and `Interval`.
pub fn build_grid<T: Real>(
    alpha: T,
    region: Region<T>,
    n_cells: usize,
    x_max: T,
) -> Result<RadialGrid<T>, DiscretizationError> {
    if !alpha.is_finite() {
        return Err(DiscretizationError::InvalidGrid("alpha must be finite".into()));
    }
    if n_cells < MIN_CELLS {
        return Err(DiscretizationError::InvalidGrid(format!(
            "need at least {MIN_CELLS} cells, got {n_cells}"
        )));
    }
    let symmetric = !matches!(region, Region::Interval { .. });
    if symmetric && !n_cells.is_multiple_of(2) {
        return Err(DiscretizationError::InvalidGrid(format!(
            "symmetric regions need an even cell count, got {n_cells}"
        )));
    }
    let one = T::one();
    let half = n_cells / 2;
    let spans: Vec<(T, T, usize)> = match region {
        Region::Full => {
            if !(x_max > T::zero() && x_max.is_finite()) {
                return Err(DiscretizationError::InvalidRegion(format!(
                    "full region needs a finite x_max > 0, got {x_max}"
                )));
            }
            vec![(-x_max, T::zero(), half), (T::zero(), x_max, half)]
        }
        Region::InnerWalls => vec![(-one, T::zero(), half), (T::zero(), one, half)],
        Region::OuterRegion => {
            if !(x_max > one && x_max.is_finite()) {
                return Err(DiscretizationError::InvalidRegion(format!(
                    "outer region needs a finite x_max > 1, got {x_max}"
                )));
            }
            vec![(-x_max, -one, half), (one, x_max, half)]
        }
        Region::Interval { lo, hi } => {
            if !(lo > T::zero() && hi > lo && hi.is_finite()) {
                return Err(DiscretizationError::InvalidRegion(format!(
                    "interval needs 0 < lo < hi, got [{lo}, {hi}]"
                )));
            }
            vec![(lo, hi, n_cells)]
        }
    };
    let (a0, b0, l0) = spans[0];
    let h = (b0 - a0) / T::from_usize_lossy(l0);
    let mut cells = Vec::with_capacity(n_cells);
    let mut pieces = Vec::with_capacity(spans.len());
    for (lo, hi, len) in spans {
        let start = cells.len();
        let anchor_right = hi == T::zero();
        for j in 0..len {
            // measure from the end nearest the singularity so the innermost centers are exactly ±h/2
            let x = if anchor_right {
                hi - h * (T::from_usize_lossy(len - j) - T::c(0.5))
            } else {
                lo + h * (T::from_usize_lossy(j) + T::c(0.5))
            };
            cells.push(x);
        }
        pieces.push(Piece { start, len, lo, hi });
    }
    let weights: Vec<T> = cells.iter().map(|&x| abs_pow(x, -alpha) * h).collect();
    if weights.iter().any(|w| !(w.is_finite() && *w > T::zero())) {
        return Err(DiscretizationError::InvalidGrid("weights overflow for this alpha and range".into()));
    }
    Ok(RadialGrid { alpha, region, h, cells, weights, pieces, face_rule: FaceRule::default() })
}

impl<T: Real> RadialGrid<T> {
    pub fn with_face_rule(mut self, rule: FaceRule) -> Self {
        self.face_rule = rule;
        self
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn region(&self) -> Region<T> {
        self.region
    }

    pub fn spacing(&self) -> T {
        self.h
    }

    pub fn cells(&self) -> &[T] {
        &self.cells
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn pieces(&self) -> &[Piece<T>] {
        &self.pieces
    }

    pub fn face_rule(&self) -> FaceRule {
        self.face_rule
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Indices `(minus, plus)` of the cells at `-h/2` and `h/2`, if the grid reaches the singularity.
    pub fn interface(&self) -> Option<(usize, usize)> {
        match self.region {
            Region::Full | Region::InnerWalls => {
                let m = self.len() / 2;
                Some((m - 1, m))
            }
            _ => None,
        }
    }

    /// Inner product `Σ w_i u_i conj(v_i)`.
    pub fn inner<F: Field<Real = T>>(&self, u: &[F], v: &[F]) -> F {
        u.iter().zip(v).zip(&self.weights).map(|((a, b), w)| (*a * b.conj()).scale(*w)).sum()
    }

    /// Conductance of the face between cells `i` and `i + 1` (same piece).
    fn face_conductance(&self, i: usize) -> T {
        let (a, b) = (self.cells[i], self.cells[i + 1]);
        match self.face_rule {
            FaceRule::Harmonic => T::one() / pow_integral(self.alpha, a, b),
            FaceRule::Midpoint => abs_pow((a + b) * T::c(0.5), -self.alpha) / self.h,
        }
    }

    /// Conductance between a wall at `wall` and the adjacent cell center `x`.
    fn wall_conductance(&self, wall: T, x: T) -> T {
        let (a, b) = if wall < x { (wall, x) } else { (x, wall) };
        match self.face_rule {
            FaceRule::Harmonic => T::one() / pow_integral(self.alpha, a, b),
            FaceRule::Midpoint => abs_pow(wall, -self.alpha) / (self.h * T::c(0.5)),
        }
    }
}

/// `∫_a^b |x|^alpha dx` for `a < b` on the same side of `0`, without cancellation.
pub(crate) fn pow_integral<T: Real>(alpha: T, a: T, b: T) -> T {
    let (lo, hi) = if a > T::zero() { (a, b) } else { (-b, -a) };
    let rel = (hi - lo) / lo;
    let e = T::one() + alpha;
    if e == T::zero() {
        rel.ln_1p()
    } else {
        lo.powf(e) * (e * rel.ln_1p()).exp_m1() / e
    }
}

/// `φ_N⁺(y)` without cutoff: `y^(1+a)/(1+a)`, or `ln y` at `a = -1`.
fn neumann_profile<T: Real>(alpha: T, y: T) -> T {
    let e = T::one() + alpha;
    if e == T::zero() {
        y.ln()
    } else {
        y.powf(e) / e
    }
}

/// Linear maps from the innermost cell values `(u(-h/2), u(h/2))` to the discrete
/// boundary values at the singularity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceMap<F> {
    pub minus: usize,
    pub plus: usize,
    /// `φ_N⁺(h/2)`: traces are `u_D⁺ = u(h/2) - σ u_N⁺` and `u_D⁻ = u(-h/2) + σ u_N⁻`.
    pub sigma: F,
    /// Coefficients of `u_N⁺` on `(u(-h/2), u(h/2))`.
    pub n_plus: [F; 2],
    pub n_minus: [F; 2],
}

impl<F: Field> InterfaceMap<F> {
    /// `(u_N⁺, u_N⁻)`.
    pub fn fluxes(&self, u: &[F]) -> (F, F) {
        let (um, up) = (u[self.minus], u[self.plus]);
        (self.n_plus[0] * um + self.n_plus[1] * up, self.n_minus[0] * um + self.n_minus[1] * up)
    }

    /// `(u_D⁺, u_D⁻)`.
    pub fn traces(&self, u: &[F]) -> (F, F) {
        let (np, nm) = self.fluxes(u);
        (u[self.plus] - self.sigma * np, u[self.minus] + self.sigma * nm)
    }
}

/// Discrete mode operator `A ≈ Δ̂_k` under one extension.
#[derive(Debug, Clone)]
pub struct ModeMatrix<F: Field> {
    grid: RadialGrid<F::Real>,
    spec: ExtensionSpec<F::Real>,
    k: i64,
    matrix: Tridiagonal<F>,
    interface: Option<InterfaceMap<F>>,
    dirichlet_walls: bool,
}

/// Real assembly with zero-flux walls.
pub fn assemble_mode_matrix<T: Real>(
    op: &ModeOperator<T>,
    spec: &ExtensionSpec<T>,
    grid: &RadialGrid<T>,
) -> Result<ModeMatrix<T>, DiscretizationError> {
    assemble(op, spec, grid, [None, None]).map(|(m, _)| m)
}

/// Complex assembly; required when the mixed phase is nonzero.
pub fn assemble_complex_mode_matrix<T: Real>(
    op: &ModeOperator<T>,
    spec: &ExtensionSpec<T>,
    grid: &RadialGrid<T>,
) -> Result<ModeMatrix<Complex<T>>, DiscretizationError> {
    assemble(op, spec, grid, [None, None]).map(|(m, _)| m)
}

/// Assembly with Dirichlet values on the outermost walls (`[left, right]`, `None` meaning
/// zero flux). Returns `A` and the source `s` such that the discrete operator applied to
/// `u` with those wall values is `A u + s`.
pub fn assemble<F: Field>(
    op: &ModeOperator<F::Real>,
    spec: &ExtensionSpec<F::Real>,
    grid: &RadialGrid<F::Real>,
    dirichlet: [Option<F::Real>; 2],
) -> Result<(ModeMatrix<F>, Vec<F>), DiscretizationError> {
    let alpha = grid.alpha;
    check_applicable(op, spec, grid)?;
    if spec.needs_complex() && !F::IS_COMPLEX {
        return Err(DiscretizationError::ComplexRequired(spec.to_string()));
    }
    let n = grid.len();
    let mut s = Tridiagonal::<F>::zeros(n);
    let mut source = vec![F::zero(); n];
    let re = F::from_real;

    for piece in &grid.pieces {
        for i in piece.start..piece.start + piece.len - 1 {
            let g = re(grid.face_conductance(i));
            s.diag[i] -= g;
            s.diag[i + 1] -= g;
            s.sup[i] += g;
            s.sub[i + 1] += g;
        }
    }
    if op.k() != 0 {
        let k2 = F::Real::c((op.k() as f64).powi(2));
        for i in 0..n {
            s.diag[i] -= re(grid.h * k2 * abs_pow(grid.cells[i], alpha));
        }
    }
    let last = grid.pieces.len() - 1;
    let walls = [(0, grid.pieces[0].lo), (n - 1, grid.pieces[last].hi)];
    for (value, (cell, wall)) in dirichlet.iter().zip(walls) {
        if let Some(g) = value {
            let c = grid.wall_conductance(wall, grid.cells[cell]);
            s.diag[cell] -= re(c);
            source[cell] += re(c * *g);
        }
    }

    let interface = match grid.interface() {
        Some((m, p)) => {
            let map = interface_map::<F>(alpha, grid.h, spec, m, p)?;
            // cell balances: w₊(Au)₊ ∋ -u_N⁺ and w₋(Au)₋ ∋ +u_N⁻
            s.diag[p] -= map.n_plus[1];
            s.sub[p] -= map.n_plus[0];
            s.diag[m] += map.n_minus[0];
            s.sup[m] += map.n_minus[1];
            Some(map)
        }
        None => None,
    };

    for i in 0..n {
        let inv = grid.weights[i].recip();
        s.sub[i] = s.sub[i].scale(inv);
        s.diag[i] = s.diag[i].scale(inv);
        s.sup[i] = s.sup[i].scale(inv);
        source[i] = source[i].scale(inv);
    }
    s.sub[0] = F::zero();
    s.sup[n - 1] = F::zero();
    if s.diag.iter().chain(&s.sub).chain(&s.sup).any(|v| !v.norm_sqr().is_finite()) {
        return Err(DiscretizationError::InvalidGrid("non-finite matrix entry".into()));
    }
    let m = ModeMatrix {
        grid: grid.clone(),
        spec: *spec,
        k: op.k(),
        matrix: s,
        interface,
        dirichlet_walls: dirichlet.iter().any(Option::is_some),
    };
    Ok((m, source))
}

fn check_applicable<T: Real>(
    op: &ModeOperator<T>,
    spec: &ExtensionSpec<T>,
    grid: &RadialGrid<T>,
) -> Result<(), DiscretizationError> {
    spec.validate()?;
    if (op.alpha() - grid.alpha).abs() > T::zero() {
        return Err(DiscretizationError::InvalidGrid(format!(
            "grid built for alpha={} but operator has alpha={}",
            grid.alpha,
            op.alpha()
        )));
    }
    if !spec.is_friedrichs() && !op.limit_circle_at_zero() {
        return Err(DiscretizationError::NotApplicable {
            spec: spec.to_string(),
            alpha: op.alpha().to_f64_lossy(),
            k: op.k(),
            reason: "the mode is essentially self-adjoint near 0, only friedrichs applies".into(),
        });
    }
    Ok(())
}

fn interface_map<F: Field>(
    alpha: F::Real,
    h: F::Real,
    spec: &ExtensionSpec<F::Real>,
    m: usize,
    p: usize,
) -> Result<InterfaceMap<F>, DiscretizationError> {
    let zero = F::zero();
    let sigma = neumann_profile(alpha, h * F::Real::c(0.5));
    let singular = || DiscretizationError::SingularCoupling(spec.to_string());
    let tiny = F::Real::epsilon() * F::Real::c(16.0);
    let (n_plus, n_minus) = match spec.resolve(alpha) {
        Resolved::ZeroFlux => ([zero; 2], [zero; 2]),
        Resolved::Disjoint { c_plus, c_minus } => {
            // u_N = c u_D on each side, with u_D = u ∓ σ u_N
            let gain = |c: Coupling<F::Real>, sign: F::Real| -> Result<F::Real, DiscretizationError> {
                match c {
                    Coupling::Infinite => Ok(sign / sigma),
                    Coupling::Finite(c) => {
                        let den = F::Real::c(1.0) + sign * c * sigma;
                        if den.abs() <= tiny * (F::Real::c(1.0) + (c * sigma).abs()) {
                            return Err(singular());
                        }
                        Ok(c / den)
                    }
                }
            };
            let gp = gain(c_plus, F::Real::c(1.0))?;
            let gm = gain(c_minus, -F::Real::c(1.0))?;
            ([zero, F::from_real(gp)], [F::from_real(gm), zero])
        }
        Resolved::Mixed { k, gamma } => {
            let [[k11, k12], [k21, k22]] = k;
            let delta = sigma * (k11 + k22) - sigma * sigma * k21 - k12;
            let scale = sigma.abs() * (k11.abs() + k22.abs()) + sigma * sigma * k21.abs() + k12.abs();
            if delta.abs() <= tiny * scale {
                return Err(singular());
            }
            let e = Complex::from_polar(F::Real::c(1.0), gamma);
            let phase = F::from_complex(e).ok_or_else(|| DiscretizationError::ComplexRequired(spec.to_string()))?;
            let inv = F::from_real(delta.recip());
            (
                [-phase.conj() * inv, F::from_real((k11 - sigma * k21) / delta)],
                [-F::from_real((k22 - sigma * k21) / delta), phase * inv],
            )
        }
    };
    Ok(InterfaceMap { minus: m, plus: p, sigma: F::from_real(sigma), n_plus, n_minus })
}

impl<F: Field> ModeMatrix<F> {
    pub fn dim(&self) -> usize {
        self.matrix.len()
    }

    pub fn grid(&self) -> &RadialGrid<F::Real> {
        &self.grid
    }

    pub fn weights(&self) -> &[F::Real] {
        &self.grid.weights
    }

    pub fn spec(&self) -> &ExtensionSpec<F::Real> {
        &self.spec
    }

    pub fn k(&self) -> i64 {
        self.k
    }

    pub fn alpha(&self) -> F::Real {
        self.grid.alpha
    }

    pub fn matrix(&self) -> &Tridiagonal<F> {
        &self.matrix
    }

    pub fn interface(&self) -> Option<&InterfaceMap<F>> {
        self.interface.as_ref()
    }

    pub fn has_dirichlet_walls(&self) -> bool {
        self.dirichlet_walls
    }

    pub fn entry(&self, i: usize, j: usize) -> F {
        self.matrix.get(i, j)
    }

    pub fn apply(&self, u: &[F]) -> Vec<F> {
        self.matrix.apply(u)
    }

    /// `max |w_i A_ij|`, the scale of the symmetric form.
    pub fn norm(&self) -> F::Real {
        let w = &self.grid.weights;
        let mut best = F::Real::zero();
        for i in 0..self.dim() {
            for v in [self.matrix.sub[i], self.matrix.diag[i], self.matrix.sup[i]] {
                best = best.max(v.modulus() * w[i]);
            }
        }
        best
    }

    /// `max_ij |⟨A e_i, e_j⟩_w - ⟨e_i, A e_j⟩_w| = max_ij |w_j A_ji - conj(w_i A_ij)|`.
    pub fn weighted_symmetry_residual(&self) -> F::Real {
        let w = &self.grid.weights;
        let mut worst = F::Real::zero();
        for i in 0..self.dim() {
            worst = worst.max((self.matrix.diag[i].scale(w[i]) - self.matrix.diag[i].scale(w[i]).conj()).modulus());
            if i + 1 < self.dim() {
                let upper = self.matrix.sup[i].scale(w[i]);
                let lower = self.matrix.sub[i + 1].scale(w[i + 1]);
                worst = worst.max((lower - upper.conj()).modulus());
            }
        }
        worst
    }

    /// `-Re ⟨A u, u⟩_w`; nonnegative for Markovian extensions.
    pub fn energy(&self, u: &[F]) -> F::Real {
        -self.grid.inner(&self.apply(u), u).re()
    }

    /// Copy with `delta` added to entry `(i, j)` of `A`, inside the band. For checking the
    /// symmetry diagnostics.
    pub fn with_perturbed_entry(&self, i: usize, j: usize, delta: F) -> Self {
        let mut out = self.clone();
        match j as isize - i as isize {
            0 => out.matrix.diag[i] += delta,
            1 => out.matrix.sup[i] += delta,
            -1 => out.matrix.sub[i] += delta,
            _ => panic!("entry ({i}, {j}) is outside the tridiagonal band"),
        }
        out
    }

    /// Coordinate triplets `row col value weight` (value as `re im` when complex), zero-based.
    pub fn write_coo<W: Write>(&self, mut out: W) -> io::Result<()> {
        if F::IS_COMPLEX {
            writeln!(out, "# row col re im weight")?;
        } else {
            writeln!(out, "# row col value weight")?;
        }
        let n = self.dim();
        for i in 0..n {
            let w = self.grid.weights[i];
            let lo = i.saturating_sub(1);
            let hi = (i + 1).min(n - 1);
            for j in lo..=hi {
                let v = self.matrix.get(i, j);
                if v.norm_sqr().is_zero() {
                    continue;
                }
                if F::IS_COMPLEX {
                    writeln!(out, "{i} {j} {:.17e} {:.17e} {:.17e}", v.re(), v.im(), w)?;
                } else {
                    writeln!(out, "{i} {j} {:.17e} {:.17e}", v.re(), w)?;
                }
            }
        }
        Ok(())
    }
}

impl<T: Real> ModeMatrix<T> {
    /// Same operator with entries in another field (e.g. for complex states).
    pub fn lift<F: Field<Real = T>>(&self) -> ModeMatrix<F> {
        let map = |v: &Vec<T>| v.iter().map(|x| F::from_real(*x)).collect();
        ModeMatrix {
            grid: self.grid.clone(),
            spec: self.spec,
            k: self.k,
            matrix: Tridiagonal { sub: map(&self.matrix.sub), diag: map(&self.matrix.diag), sup: map(&self.matrix.sup) },
            interface: self.interface.map(|m| InterfaceMap {
                minus: m.minus,
                plus: m.plus,
                sigma: F::from_real(m.sigma),
                n_plus: m.n_plus.map(F::from_real),
                n_minus: m.n_minus.map(F::from_real),
            }),
            dirichlet_walls: self.dirichlet_walls,
        }
    }

    pub fn to_complex(&self) -> ModeMatrix<Complex<T>> {
        self.lift()
    }
}
