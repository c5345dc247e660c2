//! Heat and Schrödinger time stepping per Fourier mode, the θ transform, and observables.
//!
//! A surface function is `u(x, θ) = Σ_k u_k(x) e^{ikθ}`, so `∫ u dω = 2π Σ_i u_0(x_i) w_i`
//! and `‖u‖² = 2π Σ_k Σ_i |u_k(x_i)|² w_i`.

use std::collections::BTreeMap;
use std::io::{self, Write};

use num_complex::Complex;
use num_traits::{Float, FloatConst, Zero};
use rayon::prelude::*;
use rustfft::FftPlanner;
use thiserror::Error;

use crate::discretization::{assemble_mode_matrix, DiscretizationError, ModeMatrix, RadialGrid};
use crate::linalg::LinalgError;
use crate::scalar::{Field, Real};
use crate::sturm_liouville::{boundary_data, mode_operator, ExtensionSpec};

#[derive(Debug, Error)]
pub enum EvolutionError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{n_theta} angular samples cannot resolve modes up to |k| = {k_max} (need {})", 2 * k_max + 1)]
    Aliasing { n_theta: usize, k_max: usize },
    #[error("linear solve failed at step {step}: {source}")]
    Step { step: usize, source: LinalgError },
    #[error(transparent)]
    Discretization(#[from] DiscretizationError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    CrankNicolson,
    BackwardEuler,
}

impl std::str::FromStr for Scheme {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cn" | "crank-nicolson" | "cranknicolson" => Ok(Scheme::CrankNicolson),
            "be" | "backward-euler" | "backwardeuler" => Ok(Scheme::BackwardEuler),
            other => Err(format!("unknown scheme `{other}` (expected cn or be)")),
        }
    }
}

/// Radial profile of one Fourier mode at a given time.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeState<F: Field> {
    pub k: i64,
    pub values: Vec<F>,
    pub time: F::Real,
}

impl<F: Field> ModeState<F> {
    pub fn new(k: i64, values: Vec<F>) -> Self {
        Self { k, values, time: F::Real::zero() }
    }

    /// Samples `f` at the cell centers.
    pub fn from_fn(k: i64, grid: &RadialGrid<F::Real>, f: impl Fn(F::Real) -> F) -> Self {
        Self::new(k, grid.cells().iter().map(|&x| f(x)).collect())
    }

    fn check(&self, grid: &RadialGrid<F::Real>) -> Result<(), EvolutionError> {
        if self.values.len() != grid.len() {
            return Err(EvolutionError::InvalidArgument(format!(
                "state has {} values but the grid has {} cells",
                self.values.len(),
                grid.len()
            )));
        }
        if self.values.iter().any(|v| !v.norm_sqr().is_finite()) {
            return Err(EvolutionError::InvalidArgument("state has non-finite values".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables<T> {
    pub time: T,
    /// `∫ u dω`; zero unless `k = 0`.
    pub mass: T,
    pub l2_norm: T,
    /// `∫_{M±} u dω` for real states, `∫_{M±} |u|² dω` for complex ones.
    pub side_mass_plus: T,
    pub side_mass_minus: T,
    /// `∫ u_N± dθ`, so that `d mass/dt = flux⁻ - flux⁺` for the heat flow; zero unless `k = 0`.
    pub interface_flux_plus: T,
    pub interface_flux_minus: T,
}

impl<T: Real> Observables<T> {
    pub const CSV_HEADER: &'static str = "t,mass,l2,side_plus,side_minus,flux_plus,flux_minus";

    pub fn csv_row(&self) -> String {
        format!(
            "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
            self.time,
            self.mass,
            self.l2_norm,
            self.side_mass_plus,
            self.side_mass_minus,
            self.interface_flux_plus,
            self.interface_flux_minus
        )
    }
}

pub fn write_series_csv<T: Real, W: Write>(series: &[Observables<T>], mut out: W) -> io::Result<()> {
    writeln!(out, "{}", Observables::<T>::CSV_HEADER)?;
    for row in series {
        writeln!(out, "{}", row.csv_row())?;
    }
    Ok(())
}

fn sums<F: Field>(grid: &RadialGrid<F::Real>, values: &[F], complex: bool) -> (F::Real, F::Real, F::Real, F::Real) {
    let two_pi = F::Real::TAU();
    let (mut mass, mut l2, mut plus, mut minus) = (F::Real::zero(), F::Real::zero(), F::Real::zero(), F::Real::zero());
    for ((x, w), v) in grid.cells().iter().zip(grid.weights()).zip(values) {
        let s = if complex { v.norm_sqr() * *w } else { v.re() * *w };
        mass += v.re() * *w;
        l2 += v.norm_sqr() * *w;
        if *x > F::Real::zero() {
            plus += s;
        } else {
            minus += s;
        }
    }
    (two_pi * mass, (two_pi * l2).sqrt(), two_pi * plus, two_pi * minus)
}

fn observe<F: Field>(
    grid: &RadialGrid<F::Real>,
    state: &ModeState<F>,
    fluxes: Option<(F, F)>,
) -> Observables<F::Real> {
    let zero = F::Real::zero();
    let carries_mass = state.k == 0;
    let (mass, l2, mut plus, mut minus) = sums(grid, &state.values, F::IS_COMPLEX);
    if !F::IS_COMPLEX && !carries_mass {
        plus = zero;
        minus = zero;
    }
    let (fp, fm) = match fluxes {
        Some((p, m)) if carries_mass => (F::Real::TAU() * p.re(), F::Real::TAU() * m.re()),
        _ => (zero, zero),
    };
    Observables {
        time: state.time,
        mass: if carries_mass { mass } else { zero },
        l2_norm: l2,
        side_mass_plus: plus,
        side_mass_minus: minus,
        interface_flux_plus: fp,
        interface_flux_minus: fm,
    }
}

/// Observables of a mode state; interface fluxes come from a least-squares fit of the
/// state against the boundary profiles (NaN where no such fit exists for this `a`).
pub fn observables<F: Field>(state: &ModeState<F>, grid: &RadialGrid<F::Real>) -> Observables<F::Real> {
    let fluxes = grid.interface().map(|_| {
        match boundary_data(grid.alpha(), grid.cells(), grid.weights(), &state.values) {
            Ok(fit) => (fit.data.un_plus, fit.data.un_minus),
            Err(_) => (F::from_real(F::Real::nan()), F::from_real(F::Real::nan())),
        }
    });
    observe(grid, state, fluxes.or(Some((F::zero(), F::zero()))))
}

/// Observables using the interface fluxes implied by the assembled matrix.
pub fn matrix_observables<F: Field>(m: &ModeMatrix<F>, state: &ModeState<F>) -> Observables<F::Real> {
    let fluxes = m.interface().map(|map| map.fluxes(&state.values)).unwrap_or((F::zero(), F::zero()));
    observe(m.grid(), state, Some(fluxes))
}

#[derive(Debug, Clone)]
pub struct Run<F: Field> {
    pub state: ModeState<F>,
    /// One row for the initial state and one per step.
    pub series: Vec<Observables<F::Real>>,
}

/// Backward Euler steps taken before Crank–Nicolson in heat runs (Rannacher start-up), so
/// that stiff components of nonsmooth data are damped instead of oscillating.
pub const STARTUP_STEPS: usize = 2;

/// θ-scheme driver `(I - θ c A) u⁺ = (I + (1-θ) c A) u`, with `θ = 1` for the first
/// `startup` steps.
fn step_loop<F: Field>(
    m: &ModeMatrix<F>,
    state: &ModeState<F>,
    coef: F,
    theta: F::Real,
    startup: usize,
    dt: F::Real,
    steps: usize,
) -> Result<Run<F>, EvolutionError> {
    state.check(m.grid())?;
    let one = F::one();
    let explicit_weight = F::Real::c(1.0) - theta;
    let explicit = m.matrix().affine(one, coef.scale(explicit_weight));
    let lu = m.matrix().affine(one, -coef.scale(theta)).factor();
    let lu = lu.map_err(|source| EvolutionError::Step { step: startup.min(steps) + 1, source })?;
    let startup = if explicit_weight.is_zero() { 0 } else { startup.min(steps) };
    let lu_be = if startup > 0 {
        let f = m.matrix().affine(one, -coef).factor();
        Some(f.map_err(|source| EvolutionError::Step { step: 1, source })?)
    } else {
        None
    };
    let mut current = state.clone();
    let mut series = Vec::with_capacity(steps + 1);
    series.push(matrix_observables(m, &current));
    for step in 1..=steps {
        let (mut next, solver) = match &lu_be {
            Some(be) if step <= startup => (current.values.clone(), be),
            _ if explicit_weight.is_zero() => (current.values.clone(), &lu),
            _ => (explicit.apply(&current.values), &lu),
        };
        solver.solve_in_place(&mut next).map_err(|source| EvolutionError::Step { step, source })?;
        current.values = next;
        current.time = state.time + dt * F::Real::from_usize_lossy(step);
        series.push(matrix_observables(m, &current));
    }
    Ok(Run { state: current, series })
}

/// Heat flow `∂_t u = A u` with a real operator; the state may be real or complex.
pub fn evolve_heat<F: Field>(
    m: &ModeMatrix<F::Real>,
    state: &ModeState<F>,
    dt: F::Real,
    steps: usize,
    scheme: Scheme,
) -> Result<Run<F>, EvolutionError> {
    if !(dt > F::Real::zero() && dt.is_finite()) {
        return Err(EvolutionError::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    let theta = match scheme {
        Scheme::CrankNicolson => F::Real::c(0.5),
        Scheme::BackwardEuler => F::Real::c(1.0),
    };
    step_loop(&m.lift::<F>(), state, F::from_real(dt), theta, STARTUP_STEPS, dt, steps)
}

/// Schrödinger flow `i ∂_t ψ = -A ψ` by the Cayley transform; negative `dt` runs backwards.
pub fn evolve_schrodinger<T: Real>(
    m: &ModeMatrix<Complex<T>>,
    state: &ModeState<Complex<T>>,
    dt: T,
    steps: usize,
) -> Result<Run<Complex<T>>, EvolutionError> {
    if !(dt != T::zero() && dt.is_finite()) {
        return Err(EvolutionError::InvalidArgument(format!("dt must be nonzero and finite, got {dt}")));
    }
    step_loop(m, state, Complex::new(T::zero(), dt), T::c(0.5), 0, dt, steps)
}

/// All Fourier modes `|k| <= k_max` of a surface function on a radial grid.
#[derive(Debug, Clone)]
pub struct SurfaceState<T: Real> {
    pub grid: RadialGrid<T>,
    pub k_max: usize,
    pub n_theta: usize,
    pub modes: BTreeMap<i64, ModeState<Complex<T>>>,
    /// Whether the underlying function is real valued (heat) rather than a wave function.
    pub real_valued: bool,
}

/// Per-cell DFT in θ of samples `samples[i][j] = u(x_i, 2πj/n_θ)`.
pub fn fourier_decompose<T: Real>(
    samples: &[Vec<T>],
    grid: &RadialGrid<T>,
    k_max: usize,
) -> Result<SurfaceState<T>, EvolutionError> {
    let rows: Vec<Vec<Complex<T>>> =
        samples.iter().map(|r| r.iter().map(|v| Complex::new(*v, T::zero())).collect()).collect();
    let mut state = fourier_decompose_complex(&rows, grid, k_max)?;
    state.real_valued = true;
    Ok(state)
}

pub fn fourier_decompose_complex<T: Real>(
    samples: &[Vec<Complex<T>>],
    grid: &RadialGrid<T>,
    k_max: usize,
) -> Result<SurfaceState<T>, EvolutionError> {
    if samples.len() != grid.len() {
        return Err(EvolutionError::InvalidArgument(format!(
            "{} sample rows for {} cells",
            samples.len(),
            grid.len()
        )));
    }
    let n_theta = samples.first().map_or(0, Vec::len);
    if samples.iter().any(|r| r.len() != n_theta) {
        return Err(EvolutionError::InvalidArgument("ragged angular samples".into()));
    }
    if n_theta < 2 * k_max + 1 {
        return Err(EvolutionError::Aliasing { n_theta, k_max });
    }
    let fft = FftPlanner::<T>::new().plan_fft_forward(n_theta);
    let scale = T::from_usize_lossy(n_theta).recip();
    let k_max_i = k_max as i64;
    let mut modes: BTreeMap<i64, ModeState<Complex<T>>> =
        (-k_max_i..=k_max_i).map(|k| (k, ModeState::new(k, Vec::with_capacity(grid.len())))).collect();
    let mut buf = Vec::with_capacity(n_theta);
    for row in samples {
        buf.clear();
        buf.extend_from_slice(row);
        fft.process(&mut buf);
        for (k, mode) in modes.iter_mut() {
            let idx = k.rem_euclid(n_theta as i64) as usize;
            mode.values.push(buf[idx] * scale);
        }
    }
    Ok(SurfaceState { grid: grid.clone(), k_max, n_theta, modes, real_valued: false })
}

/// Values `u(x_i, θ_j)` on the angular grid the state was decomposed from.
pub fn fourier_reconstruct<T: Real>(state: &SurfaceState<T>) -> Vec<Vec<Complex<T>>> {
    let n = state.n_theta;
    let ifft = FftPlanner::<T>::new().plan_fft_inverse(n);
    let mut out = Vec::with_capacity(state.grid.len());
    for i in 0..state.grid.len() {
        let mut buf = vec![Complex::zero(); n];
        for (k, mode) in &state.modes {
            buf[k.rem_euclid(n as i64) as usize] += mode.values[i];
        }
        ifft.process(&mut buf);
        out.push(buf);
    }
    out
}

impl<T: Real> SurfaceState<T> {
    pub fn time(&self) -> T {
        self.modes.values().next().map_or(T::zero(), |m| m.time)
    }

    /// `2π Σ_k Σ_i |u_k(x_i)|² w_i`.
    pub fn norm_squared(&self) -> T {
        self.modes.values().map(|m| sums(&self.grid, &m.values, true).1.powi(2)).sum()
    }

    pub fn observables(&self) -> Observables<T> {
        surface_observables(self)
    }
}

fn surface_observables<T: Real>(s: &SurfaceState<T>) -> Observables<T> {
    let zero = T::zero();
    let mut out = Observables {
        time: s.time(),
        mass: zero,
        l2_norm: s.norm_squared().sqrt(),
        side_mass_plus: zero,
        side_mass_minus: zero,
        interface_flux_plus: zero,
        interface_flux_minus: zero,
    };
    if let Some(m0) = s.modes.get(&0) {
        let o = observables(m0, &s.grid);
        out.mass = o.mass;
        out.interface_flux_plus = o.interface_flux_plus;
        out.interface_flux_minus = o.interface_flux_minus;
    }
    if s.real_valued {
        if let Some(m0) = s.modes.get(&0) {
            let (_, _, p, m) = sums(&s.grid, &m0.values, false);
            out.side_mass_plus = p;
            out.side_mass_minus = m;
        }
    } else {
        for mode in s.modes.values() {
            let (_, _, p, m) = sums(&s.grid, &mode.values, true);
            out.side_mass_plus += p;
            out.side_mass_minus += m;
        }
    }
    out
}

/// Extension used for mode `k`: `spec` where the mode admits one, Friedrichs otherwise.
pub fn mode_extension<T: Real>(alpha: T, k: i64, spec: &ExtensionSpec<T>) -> ExtensionSpec<T> {
    if mode_operator(alpha, k).limit_circle_at_zero() {
        *spec
    } else {
        ExtensionSpec::Friedrichs
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Flow {
    Heat(Scheme),
    Schrodinger,
}

/// Evolves every mode independently (in parallel) and collects surface observables.
pub fn evolve_surface<T: Real>(
    state: &SurfaceState<T>,
    spec: &ExtensionSpec<T>,
    flow: Flow,
    dt: T,
    steps: usize,
) -> Result<(SurfaceState<T>, Vec<Observables<T>>), EvolutionError> {
    let alpha = state.grid.alpha();
    let runs: Vec<(i64, Run<Complex<T>>)> = state
        .modes
        .par_iter()
        .map(|(&k, mode)| {
            let ext = mode_extension(alpha, k, spec);
            let run = match flow {
                Flow::Heat(scheme) => {
                    if ext.needs_complex() {
                        return Err(EvolutionError::InvalidArgument(
                            "heat flow needs a real extension (zero phase)".into(),
                        ));
                    }
                    let m = assemble_mode_matrix(&mode_operator(alpha, k), &ext, &state.grid)?;
                    evolve_heat(&m, mode, dt, steps, scheme)?
                }
                Flow::Schrodinger => {
                    let m = crate::discretization::assemble_complex_mode_matrix(
                        &mode_operator(alpha, k),
                        &ext,
                        &state.grid,
                    )?;
                    evolve_schrodinger(&m, mode, dt, steps)?
                }
            };
            Ok((k, run))
        })
        .collect::<Result<_, EvolutionError>>()?;

    let real_valued = state.real_valued && matches!(flow, Flow::Heat(_));
    let mut series = Vec::with_capacity(steps + 1);
    for step in 0..=steps {
        let mut obs = Observables {
            time: T::zero(),
            mass: T::zero(),
            l2_norm: T::zero(),
            side_mass_plus: T::zero(),
            side_mass_minus: T::zero(),
            interface_flux_plus: T::zero(),
            interface_flux_minus: T::zero(),
        };
        let mut l2 = T::zero();
        let mut side = (T::zero(), T::zero());
        for (k, run) in &runs {
            let row = &run.series[step];
            obs.time = row.time;
            l2 += row.l2_norm.powi(2);
            if *k == 0 {
                obs.mass = row.mass;
                obs.interface_flux_plus = row.interface_flux_plus;
                obs.interface_flux_minus = row.interface_flux_minus;
            }
            if real_valued {
                if *k == 0 {
                    side = (row.side_mass_plus, row.side_mass_minus);
                }
            } else {
                side.0 += row.side_mass_plus;
                side.1 += row.side_mass_minus;
            }
        }
        obs.l2_norm = l2.sqrt();
        obs.side_mass_plus = side.0;
        obs.side_mass_minus = side.1;
        series.push(obs);
    }
    let modes = runs.into_iter().map(|(k, run)| (k, run.state)).collect();
    Ok((
        SurfaceState { grid: state.grid.clone(), k_max: state.k_max, n_theta: state.n_theta, modes, real_valued },
        series,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{assemble_complex_mode_matrix, build_grid, Region};
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    #[test]
    fn mass_of_constants() {
        let g = build_grid(0.0, Region::InnerWalls, 64, 1.0).unwrap();
        let o = observables(&ModeState::from_fn(0, &g, |_| 1.0f64), &g);
        assert!((o.mass - 2.0 * TAU).abs() < 1e-12);
        assert!((o.side_mass_plus + o.side_mass_minus - o.mass).abs() < 1e-12);
        let g = build_grid(-1.0, Region::InnerWalls, 64, 1.0).unwrap();
        let o = observables(&ModeState::from_fn(0, &g, |_| 1.0f64), &g);
        assert!((o.mass - TAU).abs() < 1e-12);
    }

    #[test]
    fn odd_state_side_masses() {
        let g = build_grid(0.3, Region::Full, 64, 2.0).unwrap();
        let o = observables(&ModeState::from_fn(0, &g, |x: f64| x.powi(3) - x), &g);
        assert!((o.side_mass_plus + o.side_mass_minus).abs() < 1e-13);
        assert!(o.side_mass_plus.abs() > 0.1);
    }

    #[test]
    fn constants_stay_put_under_bridging() {
        let g = build_grid(0.5, Region::InnerWalls, 256, 1.0).unwrap();
        let m = assemble_mode_matrix(&mode_operator(0.5, 0), &ExtensionSpec::Bridging, &g).unwrap();
        let run = evolve_heat(&m, &ModeState::from_fn(0, &g, |_| 1.0f64), 1e-3, 50, Scheme::CrankNicolson).unwrap();
        for pair in run.series.windows(2) {
            assert!((pair[1].mass - pair[0].mass).abs() <= 1e-12 * pair[0].mass);
        }
        assert!(run.state.values.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn gaussian_norm_decays_on_cylinder() {
        let g = build_grid(0.0, Region::Full, 512, 4.0).unwrap();
        let m = assemble_mode_matrix(&mode_operator(0.0, 0), &ExtensionSpec::Bridging, &g).unwrap();
        let u0 = ModeState::from_fn(0, &g, |x: f64| (-(x - 0.3).powi(2) * 8.0).exp());
        let run = evolve_heat(&m, &u0, 1e-3, 200, Scheme::CrankNicolson).unwrap();
        for pair in run.series.windows(2) {
            assert!(pair[1].l2_norm < pair[0].l2_norm);
        }
    }

    #[test]
    fn friedrichs_mass_balance() {
        let g = build_grid(0.5, Region::InnerWalls, 256, 1.0).unwrap();
        let m = assemble_mode_matrix(&mode_operator(0.5, 0), &ExtensionSpec::Friedrichs, &g).unwrap();
        let dt = 1e-3;
        for scheme in [Scheme::CrankNicolson, Scheme::BackwardEuler] {
            let run = evolve_heat(&m, &ModeState::from_fn(0, &g, |_| 1.0f64), dt, 40, scheme).unwrap();
            for (step, pair) in run.series.windows(2).enumerate() {
                let rate = (pair[1].mass - pair[0].mass) / dt;
                let (a, b) = (&pair[0], &pair[1]);
                let predicted = match scheme {
                    Scheme::CrankNicolson if step >= STARTUP_STEPS => {
                        0.5 * (a.interface_flux_minus - a.interface_flux_plus + b.interface_flux_minus
                            - b.interface_flux_plus)
                    }
                    _ => b.interface_flux_minus - b.interface_flux_plus,
                };
                assert!(rate < 0.0, "{scheme:?} {rate} at {}", b.time);
                assert!((rate - predicted).abs() < 1e-9 * predicted.abs(), "{scheme:?} {rate} {predicted}");
            }
        }
    }

    #[test]
    fn backward_euler_stays_in_unit_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (a, spec) in [
            (0.5, ExtensionSpec::Bridging),
            (-0.5, ExtensionSpec::Neumann),
            (-2.0, ExtensionSpec::Friedrichs),
            (0.2, ExtensionSpec::Friedrichs),
        ] {
            let g = build_grid(a, Region::InnerWalls, 128, 1.0).unwrap();
            let m = assemble_mode_matrix(&mode_operator(a, 0), &spec, &g).unwrap();
            let u0 = ModeState::new(0, (0..g.len()).map(|_| rng.gen_range(0.0..1.0)).collect());
            let run = evolve_heat(&m, &u0, 1e-3, 30, Scheme::BackwardEuler).unwrap();
            assert!(run.state.values.iter().all(|v| (-1e-14..=1.0 + 1e-14).contains(v)), "{a} {spec}");
        }
    }

    #[test]
    fn cayley_is_unitary_and_reversible() {
        let g = build_grid(-0.5, Region::Full, 256, 3.0).unwrap();
        let m = assemble_complex_mode_matrix(
            &mode_operator(-0.5, 0),
            &ExtensionSpec::mixed([[1.0, 0.5], [0.0, 1.0]], 0.7),
            &g,
        )
        .unwrap();
        let psi = ModeState::from_fn(0, &g, |x: f64| Complex64::from_polar((-(x + 1.0).powi(2) * 4.0).exp(), 3.0 * x));
        let fwd = evolve_schrodinger(&m, &psi, 1e-3, 100).unwrap();
        for pair in fwd.series.windows(2) {
            assert!((pair[1].l2_norm - pair[0].l2_norm).abs() < 1e-10);
        }
        let back = evolve_schrodinger(&m, &fwd.state, -1e-3, 100).unwrap();
        let err = back.state.values.iter().zip(&psi.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-8);
    }

    #[test]
    fn decompose_picks_single_modes() {
        let g = build_grid(0.0, Region::InnerWalls, 16, 1.0).unwrap();
        let n_theta = 15;
        let samples: Vec<Vec<f64>> = g
            .cells()
            .iter()
            .map(|x| (0..n_theta).map(|j| (1.0 + x * x) * (3.0 * TAU * j as f64 / n_theta as f64).cos()).collect())
            .collect();
        let s = fourier_decompose(&samples, &g, 7).unwrap();
        for (k, m) in &s.modes {
            let size = m.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
            if k.abs() == 3 {
                assert!(size > 0.4);
            } else {
                assert!(size < 1e-14, "mode {k}");
            }
        }
        let flat: Vec<Vec<f64>> = g.cells().iter().map(|_| vec![2.5; n_theta]).collect();
        let s = fourier_decompose(&flat, &g, 7).unwrap();
        assert!(s.modes.iter().all(|(k, m)| *k == 0 || m.values.iter().all(|v| v.norm() < 1e-14)));
    }

    #[test]
    fn round_trip_and_parseval() {
        let g = build_grid(0.4, Region::Full, 32, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let k_max = 6;
        let n_theta = 2 * k_max + 1;
        let samples: Vec<Vec<f64>> =
            g.cells().iter().map(|_| (0..n_theta).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let s = fourier_decompose(&samples, &g, k_max).unwrap();
        let back = fourier_reconstruct(&s);
        let mut direct = 0.0;
        for i in 0..g.len() {
            for j in 0..n_theta {
                assert!((back[i][j].re - samples[i][j]).abs() < 1e-12 && back[i][j].im.abs() < 1e-12);
                direct += samples[i][j].powi(2) * g.weights()[i] * TAU / n_theta as f64;
            }
        }
        assert!((direct - s.norm_squared()).abs() < 1e-10 * direct);
    }

    #[test]
    fn aliasing_rejected() {
        let g = build_grid(0.0, Region::InnerWalls, 16, 1.0).unwrap();
        let samples: Vec<Vec<f64>> = g.cells().iter().map(|_| vec![0.0; 8]).collect();
        assert!(matches!(fourier_decompose(&samples, &g, 4), Err(EvolutionError::Aliasing { .. })));
    }

    #[test]
    fn surface_evolution_matches_modes() {
        let a = 0.5;
        let g = build_grid(a, Region::InnerWalls, 64, 1.0).unwrap();
        let n_theta = 9;
        let samples: Vec<Vec<f64>> = g
            .cells()
            .iter()
            .map(|x| {
                (0..n_theta)
                    .map(|j| {
                        let t = TAU * j as f64 / n_theta as f64;
                        1.0 + x * t.cos() + 0.5 * (2.0 * t).sin() * x * x
                    })
                    .collect()
            })
            .collect();
        let s = fourier_decompose(&samples, &g, 4).unwrap();
        let (out, series) = evolve_surface(&s, &ExtensionSpec::Bridging, Flow::Heat(Scheme::CrankNicolson), 1e-3, 20).unwrap();
        assert_eq!(series.len(), 21);
        for k in [-2i64, 0, 1] {
            let m = assemble_mode_matrix(&mode_operator(a, k), &ExtensionSpec::Bridging, &g).unwrap();
            let run = evolve_heat(&m, &s.modes[&k], 1e-3, 20, Scheme::CrankNicolson).unwrap();
            assert_eq!(run.state.values, out.modes[&k].values);
        }
        let last = series.last().unwrap();
        assert!((last.side_mass_plus + last.side_mass_minus - last.mass).abs() < 1e-12 * last.mass.abs());
    }

    #[test]
    fn csv_rows() {
        let o = Observables { time: 0.5, mass: 1.0, l2_norm: 2.0, side_mass_plus: 0.5, side_mass_minus: 0.5, interface_flux_plus: 0.0, interface_flux_minus: -1.0 };
        let mut buf = Vec::new();
        write_series_csv(&[o], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), Observables::<f64>::CSV_HEADER);
        let row: Vec<f64> = lines.next().unwrap().split(',').map(|t| t.parse().unwrap()).collect();
        assert_eq!(row, vec![0.5, 1.0, 2.0, 0.5, 0.5, 0.0, -1.0]);
    }
}
