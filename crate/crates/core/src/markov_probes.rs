//! Stochastic completeness and recurrence near the singularity and near infinity.
//!
//! Energies here are those of radial (`k = 0`) profiles, `∫ |u'|² |x|^-a dx` over one side.

use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::discretization::{assemble, assemble_mode_matrix, build_grid, DiscretizationError, FaceRule, Region};
use crate::evolution::{evolve_heat, EvolutionError, ModeState, Scheme};
use crate::scalar::Real;
use crate::sturm_liouville::{mode_operator, ExtensionSpec};

#[derive(Debug, Error)]
pub enum ProbeError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Discretization(#[from] DiscretizationError),
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Location {
    At0,
    AtInfinity,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Location::At0 => "0",
            Location::AtInfinity => "inf",
        })
    }
}

impl std::str::FromStr for Location {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "0" | "at0" | "zero" => Ok(Location::At0),
            "inf" | "infinity" | "atinfinity" => Ok(Location::AtInfinity),
            other => Err(format!("unknown location `{other}` (expected 0 or inf)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Property {
    Recurrent,
    StochasticallyComplete,
    Explosive,
    /// The heat-content run fell between the thresholds; see the verdict's warning.
    Inconclusive,
}

impl Property {
    /// Recurrence implies stochastic completeness.
    pub fn is_stochastically_complete(self) -> bool {
        matches!(self, Property::Recurrent | Property::StochasticallyComplete)
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Property::Recurrent => "recurrent",
            Property::StochasticallyComplete => "stochastically-complete",
            Property::Explosive => "explosive",
            Property::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Evidence {
    /// Heat flow of the constant 1.
    MassLoss { relative_loss: f64, monotone: bool, curve: Vec<(f64, f64)> },
    /// Energies of the capacity test functions `u_n` and their decay exponent
    /// `log2(E(n) / E(2n))` at the largest `n`.
    EnergySequence { n: Vec<f64>, energies: Vec<f64>, decay_exponent: f64 },
    /// Energy of the constant 1, which lies in the form domain.
    ConstantEnergy { energy: f64 },
}

impl Evidence {
    /// Scalar summary used in reports.
    pub fn metric(&self) -> f64 {
        match self {
            Evidence::MassLoss { relative_loss, .. } => *relative_loss,
            Evidence::EnergySequence { energies, .. } => energies.last().copied().unwrap_or(f64::NAN),
            Evidence::ConstantEnergy { energy } => *energy,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Evidence::MassLoss { .. } => "relative-mass-loss",
            Evidence::EnergySequence { .. } => "sequence-energy",
            Evidence::ConstantEnergy { .. } => "constant-energy",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeVerdict {
    pub location: Location,
    pub property: Property,
    /// Deciding evidence first.
    pub evidence: Vec<Evidence>,
    pub warning: Option<String>,
}

/// Relative loss below which mass counts as conserved.
pub const CONSERVED_TOL: f64 = 1e-6;
/// Relative loss above which a monotone decrease counts as explosion.
pub const EXPLOSIVE_TOL: f64 = 1e-3;

/// `f_{r,R}`: 1 on `x <= r`, the `k = 0` harmonic interpolant on `(r, R]`, 0 beyond.
pub fn equilibrium_potential<T: Real>(alpha: T, r: T, big_r: T, x: T) -> T {
    if x <= r {
        return T::one();
    }
    if x > big_r {
        return T::zero();
    }
    let e = T::one() + alpha;
    if e == T::zero() {
        (big_r / x).ln() / (big_r / r).ln()
    } else {
        (big_r.powf(e) - x.powf(e)) / (big_r.powf(e) - r.powf(e))
    }
}

fn check_radii<T: Real>(r: T, big_r: T) -> Result<(), ProbeError> {
    if !(r > T::zero() && big_r > r && big_r.is_finite()) {
        return Err(ProbeError::InvalidArgument(format!("need 0 < r < R, got r={r}, R={big_r}")));
    }
    Ok(())
}

/// Energy of `f_{r,R}`: `(1+a)/(R^(1+a) - r^(1+a))`, or `1/ln(R/r)` at `a = -1`.
pub fn capacity_energy<T: Real>(alpha: T, r: T, big_r: T) -> Result<T, ProbeError> {
    check_radii(r, big_r)?;
    let e = T::one() + alpha;
    Ok(if e == T::zero() {
        (big_r / r).ln().recip()
    } else {
        // R^e - r^e = r^e expm1(e ln(R/r)), accurate when R/r is close to 1
        e / (r.powf(e) * (e * (big_r / r).ln()).exp_m1())
    })
}

/// `lim_{R→∞} capacity_energy(a, 1, R)`.
pub fn capacity_limit<T: Real>(alpha: T) -> T {
    let e = T::one() + alpha;
    if e < T::zero() {
        -e
    } else {
        T::zero()
    }
}

/// Radii `(r, R)` of the `n`-th capacity test function.
pub fn recurrence_radii<T: Real>(alpha: T, location: Location, n: u64) -> (T, T) {
    let nn = T::from_u64(n).expect("n representable");
    let log_case = alpha == -T::one();
    match (location, log_case) {
        (Location::AtInfinity, false) => (nn, nn * T::c(2.0)),
        (Location::AtInfinity, true) => (nn, nn * nn),
        (Location::At0, false) => ((T::c(2.0) * nn).recip(), nn.recip()),
        (Location::At0, true) => ((nn * nn).recip(), nn.recip()),
    }
}

/// Energy of the `n`-th test function of the recurrence criterion.
pub fn recurrence_sequence_energy<T: Real>(alpha: T, location: Location, n: u64) -> Result<T, ProbeError> {
    if n < 2 {
        return Err(ProbeError::InvalidArgument(format!("need n >= 2, got {n}")));
    }
    let (r, big_r) = recurrence_radii(alpha, location, n);
    capacity_energy(alpha, r, big_r)
}

/// The sequence `E(u_n)` for `n = 2, 4, …, 2^40`.
///
/// Each sequence is `c n^-(1+a)`, `c n^(1+a)` or `1/ln n`, so it tends to zero exactly when
/// its tail decreases.
pub fn energy_sequence(alpha: f64, location: Location) -> (Evidence, bool) {
    let n: Vec<u64> = (1..=40).map(|j| 1u64 << j).collect();
    let energies: Vec<f64> = n
        .iter()
        .map(|&k| recurrence_sequence_energy(alpha, location, k).expect("n >= 2"))
        .collect();
    let len = energies.len();
    let decay_exponent = (energies[len - 2] / energies[len - 1]).log2();
    let vanishing = decay_exponent > 0.0 && energies.windows(2).all(|p| p[1] < p[0]);
    let n = n.into_iter().map(|k| k as f64).collect();
    (Evidence::EnergySequence { n, energies, decay_exponent }, vanishing)
}

/// Largest error of the discrete solution of `Δ̂₀ f = 0`, `f(r) = 1`, `f(R) = 0` on `[r, R]`.
pub fn exit_probability_probe<T: Real>(alpha: T, r: T, big_r: T, n_cells: usize) -> Result<T, ProbeError> {
    exit_probability_probe_with(alpha, r, big_r, n_cells, FaceRule::default())
}

pub fn exit_probability_probe_with<T: Real>(
    alpha: T,
    r: T,
    big_r: T,
    n_cells: usize,
    rule: FaceRule,
) -> Result<T, ProbeError> {
    check_radii(r, big_r)?;
    let grid = build_grid(alpha, Region::Interval { lo: r, hi: big_r }, n_cells, big_r)?.with_face_rule(rule);
    let (m, source) =
        assemble::<T>(&mode_operator(alpha, 0), &ExtensionSpec::Friedrichs, &grid, [Some(T::one()), Some(T::zero())])?;
    let rhs: Vec<T> = source.iter().map(|s| -*s).collect();
    let f = m.matrix().solve(&rhs).map_err(DiscretizationError::from)?;
    Ok(grid
        .cells()
        .iter()
        .zip(&f)
        .map(|(&x, &v)| (v - equilibrium_potential(alpha, r, big_r, x)).abs())
        .fold(T::zero(), T::max))
}

/// Parameters of the heat-content runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeConfig {
    pub t_final: f64,
    pub dt: f64,
    pub n_cells: usize,
    /// Truncation radius for runs near infinity.
    pub x_max: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self { t_final: 1.0, dt: 1e-4, n_cells: 2048, x_max: 1e4 }
    }
}

fn mass_loss_run(alpha: f64, spec: &ExtensionSpec<f64>, region: Region<f64>, cfg: &ProbeConfig) -> Result<Evidence, ProbeError> {
    if !(cfg.dt > 0.0 && cfg.t_final > 0.0) {
        return Err(ProbeError::InvalidArgument("t_final and dt must be positive".into()));
    }
    let grid = build_grid(alpha, region, cfg.n_cells, cfg.x_max)?;
    let m = assemble_mode_matrix(&mode_operator(alpha, 0), spec, &grid)?;
    let steps = (cfg.t_final / cfg.dt).round().max(1.0) as usize;
    // backward Euler keeps the discrete semigroup positive and the mass curve monotone
    let run = evolve_heat(&m, &ModeState::from_fn(0, &grid, |_| 1.0), cfg.dt, steps, Scheme::BackwardEuler)?;
    let m0 = run.series[0].mass;
    let monotone = run.series.windows(2).all(|p| p[1].mass <= p[0].mass * (1.0 + 1e-13));
    let relative_loss = (m0 - run.series[steps].mass) / m0;
    let stride = (steps / 100).max(1);
    let curve = run.series.iter().step_by(stride).map(|o| (o.time, o.mass / m0)).collect();
    Ok(Evidence::MassLoss { relative_loss, monotone, curve })
}

fn classify_loss(evidence: &Evidence) -> (Property, Option<String>) {
    let Evidence::MassLoss { relative_loss, monotone, .. } = evidence else {
        unreachable!("classify_loss takes mass-loss evidence")
    };
    let loss = relative_loss.abs();
    if loss < CONSERVED_TOL {
        (Property::StochasticallyComplete, None)
    } else if *relative_loss > EXPLOSIVE_TOL && *monotone {
        (Property::Explosive, None)
    } else {
        let shape = if *monotone { "monotone" } else { "non-monotone" };
        (
            Property::Inconclusive,
            Some(format!(
                "relative mass loss {relative_loss:.3e} ({shape}) lies outside both thresholds \
                 ({CONSERVED_TOL:e} conserved, {EXPLOSIVE_TOL:e} explosive)"
            )),
        )
    }
}

/// Heat flow of the constant 1 with zero-flux walls: near 0 on `[-1, 1]`, near infinity
/// on `1 <= |x| <= x_max` (repeated with `2 x_max` to check the truncation).
pub fn heat_content_probe(
    alpha: f64,
    spec: &ExtensionSpec<f64>,
    location: Location,
    cfg: &ProbeConfig,
) -> Result<ProbeVerdict, ProbeError> {
    match location {
        Location::At0 => {
            let ev = mass_loss_run(alpha, spec, Region::InnerWalls, cfg)?;
            let (property, warning) = classify_loss(&ev);
            Ok(ProbeVerdict { location, property, evidence: vec![ev], warning })
        }
        Location::AtInfinity => {
            let ev = mass_loss_run(alpha, spec, Region::OuterRegion, cfg)?;
            let doubled = ProbeConfig { x_max: 2.0 * cfg.x_max, ..*cfg };
            let ev2 = mass_loss_run(alpha, spec, Region::OuterRegion, &doubled)?;
            let (property, mut warning) = classify_loss(&ev);
            let (property2, _) = classify_loss(&ev2);
            let property = if property == property2 {
                property
            } else {
                warning = Some(format!(
                    "verdict changes from {property} to {property2} when x_max doubles to {}",
                    doubled.x_max
                ));
                Property::Inconclusive
            };
            Ok(ProbeVerdict { location, property, evidence: vec![ev, ev2], warning })
        }
    }
}

/// Markovian extensions of the radial operator considered for a given `a`.
pub fn markovian_extensions(alpha: f64) -> Vec<ExtensionSpec<f64>> {
    if alpha > -1.0 && alpha < 1.0 {
        vec![ExtensionSpec::Friedrichs, ExtensionSpec::Neumann, ExtensionSpec::Bridging]
    } else {
        vec![ExtensionSpec::Friedrichs]
    }
}

/// Verdicts of one extension at both locations and overall.
#[derive(Debug, Clone, PartialEq)]
pub struct VerdictRow {
    pub extension: ExtensionSpec<f64>,
    pub at_zero: ProbeVerdict,
    pub at_infinity: ProbeVerdict,
}

impl VerdictRow {
    /// Conjunction over the two locations.
    pub fn global(&self) -> Property {
        let (a, b) = (self.at_zero.property, self.at_infinity.property);
        if a == Property::Explosive || b == Property::Explosive {
            Property::Explosive
        } else if a == Property::Inconclusive || b == Property::Inconclusive {
            Property::Inconclusive
        } else if a == Property::Recurrent && b == Property::Recurrent {
            Property::Recurrent
        } else {
            Property::StochasticallyComplete
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerdictTable {
    pub alpha: f64,
    pub rows: Vec<VerdictRow>,
}

impl VerdictTable {
    pub const CSV_HEADER: &'static str = "alpha,extension,location,property,evidence,metric";

    pub fn row(&self, spec: &ExtensionSpec<f64>) -> Option<&VerdictRow> {
        self.rows.iter().find(|r| r.extension == *spec)
    }

    /// Lines `alpha,extension,location,property,evidence,metric`, without header.
    pub fn csv_lines(&self) -> Vec<String> {
        let mut out = Vec::new();
        for row in &self.rows {
            for v in [&row.at_zero, &row.at_infinity] {
                let ev = &v.evidence[0];
                out.push(format!(
                    "{},{},{},{},{},{:.6e}",
                    self.alpha,
                    row.extension,
                    v.location,
                    v.property,
                    ev.label(),
                    ev.metric()
                ));
            }
            out.push(format!("{},{},global,{},,", self.alpha, row.extension, row.global()));
        }
        out
    }

    pub fn warnings(&self) -> Vec<String> {
        self.rows
            .iter()
            .flat_map(|r| [&r.at_zero, &r.at_infinity])
            .filter_map(|v| v.warning.clone())
            .collect()
    }
}

fn verdict_at_zero(alpha: f64, spec: &ExtensionSpec<f64>, cfg: &ProbeConfig) -> Result<ProbeVerdict, ProbeError> {
    let mut heat = heat_content_probe(alpha, spec, Location::At0, cfg)?;
    if heat.property != Property::StochasticallyComplete {
        return Ok(heat);
    }
    if !spec.is_friedrichs() {
        // the interface conditions let constants through: 1 is in the form domain with zero energy
        let grid = build_grid(alpha, Region::InnerWalls, cfg.n_cells, 1.0)?;
        let m = assemble_mode_matrix(&mode_operator(alpha, 0), spec, &grid)?;
        let ones = vec![1.0; grid.len()];
        let energy = m.energy(&ones) / m.norm();
        if energy.abs() < 1e-12 {
            heat.property = Property::Recurrent;
            heat.evidence.insert(0, Evidence::ConstantEnergy { energy });
            return Ok(heat);
        }
    }
    let (seq, vanishing) = energy_sequence(alpha, Location::At0);
    if vanishing {
        heat.property = Property::Recurrent;
        heat.evidence.insert(0, seq);
    } else {
        heat.evidence.push(seq);
    }
    Ok(heat)
}

fn verdict_at_infinity(alpha: f64, cfg: &ProbeConfig) -> Result<ProbeVerdict, ProbeError> {
    let (seq, vanishing) = energy_sequence(alpha, Location::AtInfinity);
    if vanishing {
        return Ok(ProbeVerdict { location: Location::AtInfinity, property: Property::Recurrent, evidence: vec![seq], warning: None });
    }
    // behaviour near infinity does not depend on the extension at 0
    let mut heat = heat_content_probe(alpha, &ExtensionSpec::Friedrichs, Location::AtInfinity, cfg)?;
    heat.evidence.push(seq);
    Ok(heat)
}

pub fn verdict_table(alpha: f64) -> Result<VerdictTable, ProbeError> {
    verdict_table_with(alpha, &ProbeConfig::default())
}

pub fn verdict_table_with(alpha: f64, cfg: &ProbeConfig) -> Result<VerdictTable, ProbeError> {
    let at_infinity = verdict_at_infinity(alpha, cfg)?;
    let rows = markovian_extensions(alpha)
        .par_iter()
        .map(|spec| {
            Ok(VerdictRow { extension: *spec, at_zero: verdict_at_zero(alpha, spec, cfg)?, at_infinity: at_infinity.clone() })
        })
        .collect::<Result<Vec<_>, ProbeError>>()?;
    Ok(VerdictTable { alpha, rows })
}

/// Tables for several `a`, computed in parallel and returned in ascending `a`.
pub fn verdict_sweep(alphas: &[f64], cfg: &ProbeConfig) -> Result<Vec<VerdictTable>, ProbeError> {
    let mut out = alphas.par_iter().map(|&a| verdict_table_with(a, cfg)).collect::<Result<Vec<_>, _>>()?;
    out.sort_by(|a, b| a.alpha.total_cmp(&b.alpha));
    Ok(out)
}
