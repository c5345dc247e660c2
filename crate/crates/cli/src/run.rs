use std::collections::BTreeMap;
use std::io;

use degenerate_surface::discretization::build_grid;
use degenerate_surface::evolution::{evolve_surface, Flow, ModeState, Observables, SurfaceState};
use degenerate_surface::geometry::{ConeGeometry, GeometryError};
use degenerate_surface::markov_probes::{verdict_table_with, Evidence, ProbeConfig};
use degenerate_surface::sturm_liouville::{mode_operator, Endpoint};
use degenerate_surface::Complex64;
use thiserror::Error;

use crate::config::{Command, ConfigError, ExperimentConfig, FlowKind};
use crate::report::Outputs;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Compute(String),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
}

impl From<csv::Error> for RunError {
    fn from(e: csv::Error) -> Self {
        RunError::Io(io::Error::other(e))
    }
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            _ => 1,
        }
    }
}

fn compute<E: std::fmt::Display>(context: &str) -> impl FnOnce(E) -> RunError + '_ {
    move |e| RunError::Compute(format!("{context}: {e}"))
}

fn sci(v: f64) -> String {
    format!("{v:.12e}")
}

/// Runs one experiment; on failure every file it wrote is removed again.
pub fn run(cfg: &ExperimentConfig) -> Result<Vec<std::path::PathBuf>, RunError> {
    let mut out = Outputs::new(&cfg.output)?;
    let result = match cfg.command {
        Command::Classify => classify(cfg, &mut out),
        Command::Evolve => evolve(cfg, &mut out),
        Command::Probe => probe(cfg, &mut out),
        Command::Geometry => geometry(cfg, &mut out),
    };
    match result {
        Ok(()) => Ok(out.files().to_vec()),
        Err(e) => {
            out.discard();
            Err(e)
        }
    }
}

fn classify(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<(), RunError> {
    let mut w = out.table("classify.csv", cfg)?.csv();
    w.write_record(["k", "zero_plus", "zero_minus", "plus_inf", "minus_inf", "regular_at_zero", "deficiency_plus", "deficiency_minus"])?;
    for k in cfg.k_min..=cfg.k_max {
        let op = mode_operator(cfg.alpha, k);
        let mut row = vec![k.to_string()];
        let mut regular = true;
        for e in [Endpoint::ZeroPlus, Endpoint::ZeroMinus, Endpoint::PlusInfinity, Endpoint::MinusInfinity] {
            let rep = op.classify_endpoint(e).map_err(compute("classification"))?;
            if e.is_finite() {
                regular &= rep.regular;
            }
            row.push(rep.classification.to_string());
        }
        let (np, nm) = op.deficiency_indices().map_err(compute("deficiency indices"))?;
        row.extend([regular.to_string(), np.to_string(), nm.to_string()]);
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn evolve(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<(), RunError> {
    let grid = build_grid(cfg.alpha, cfg.region.region(), cfg.n_cells, cfg.x_max).map_err(compute("grid"))?;
    let carrier = cfg.initial.mode();
    let modes: BTreeMap<i64, ModeState<Complex64>> = (cfg.k_min..=cfg.k_max)
        .map(|k| {
            let state = ModeState::from_fn(k, &grid, |x| {
                if k == carrier {
                    Complex64::new(cfg.initial.radial(x), 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            });
            (k, state)
        })
        .collect();
    let k_abs = cfg.k_min.abs().max(cfg.k_max.abs()) as usize;
    let state = SurfaceState {
        grid: grid.clone(),
        k_max: k_abs,
        n_theta: 2 * k_abs + 1,
        modes,
        real_valued: cfg.flow == FlowKind::Heat && carrier == 0,
    };
    let flow = match cfg.flow {
        FlowKind::Heat => Flow::Heat(cfg.scheme),
        FlowKind::Schrodinger => Flow::Schrodinger,
    };
    let (last, series) = evolve_surface(&state, &cfg.extension, flow, cfg.dt, cfg.steps()).map_err(compute("evolution"))?;

    let mut w = out.table("series.csv", cfg)?.csv();
    w.write_record(Observables::<f64>::CSV_HEADER.split(','))?;
    for o in &series {
        w.write_record(
            [o.time, o.mass, o.l2_norm, o.side_mass_plus, o.side_mass_minus, o.interface_flux_plus, o.interface_flux_minus]
                .map(sci),
        )?;
    }
    w.flush()?;
    out.gnuplot(
        "series.gp",
        "series.csv",
        "observables",
        "t",
        &[(1, 2, "mass"), (1, 3, "l2"), (1, 4, "side +"), (1, 5, "side -")],
    )?;

    let mut w = out.table("final_state.csv", cfg)?.csv();
    w.write_record(["x", "k", "re", "im"])?;
    for (k, mode) in &last.modes {
        for (x, v) in grid.cells().iter().zip(&mode.values) {
            w.write_record([sci(*x), k.to_string(), sci(v.re), sci(v.im)])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn probe(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<(), RunError> {
    let pc = ProbeConfig { t_final: cfg.t_final, dt: cfg.dt, n_cells: cfg.n_cells, x_max: cfg.x_max };
    let table = verdict_table_with(cfg.alpha, &pc).map_err(compute("probe"))?;

    let mut t = out.table("verdicts.csv", cfg)?;
    for warning in table.warnings() {
        eprintln!("warning: {warning}");
        t.comment(&format!("warning: {warning}"))?;
    }
    let mut w = t.csv();
    w.write_record(["alpha", "extension", "location", "property", "evidence", "metric"])?;
    let mut curves: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for row in &table.rows {
        for v in [&row.at_zero, &row.at_infinity] {
            let ev = &v.evidence[0];
            w.write_record([
                cfg.alpha.to_string(),
                row.extension.to_string(),
                v.location.to_string(),
                v.property.to_string(),
                ev.label().to_string(),
                sci(ev.metric()),
            ])?;
            for (i, ev) in v.evidence.iter().enumerate() {
                if let Evidence::MassLoss { curve, .. } = ev {
                    let name = format!("{} @{}{}", row.extension, v.location, if i > 0 { " (2 x_max)" } else { "" });
                    if !curves.iter().any(|(n, _)| *n == name) {
                        curves.push((name, curve.clone()));
                    }
                }
            }
        }
        w.write_record([cfg.alpha.to_string(), row.extension.to_string(), "global".into(), row.global().to_string(), String::new(), String::new()])?;
    }
    w.flush()?;

    if let Some((_, first)) = curves.first() {
        let mut w = out.table("mass_curves.csv", cfg)?.csv();
        let mut header = vec!["t".to_string()];
        header.extend(curves.iter().map(|(n, _)| n.clone()));
        w.write_record(&header)?;
        for (i, (time, _)) in first.iter().enumerate() {
            let mut rec = vec![sci(*time)];
            rec.extend(curves.iter().map(|(_, c)| c.get(i).map_or(String::new(), |p| sci(p.1))));
            w.write_record(&rec)?;
        }
        w.flush()?;
        let series: Vec<(usize, usize, &str)> =
            curves.iter().enumerate().map(|(j, (n, _))| (1, j + 2, n.as_str())).collect();
        out.gnuplot("mass_curves.gp", "mass_curves.csv", "relative mass of the constant state", "t", &series)?;
    }
    Ok(())
}

fn geometry(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<(), RunError> {
    let geom = ConeGeometry::new(cfg.alpha).map_err(compute("geometry"))?;
    let grid = build_grid(cfg.alpha, cfg.region.region(), cfg.n_cells, cfg.x_max).map_err(compute("grid"))?;
    let mut w = out.table("curvature.csv", cfg)?.csv();
    w.write_record(["x", "angular_metric", "volume_density", "gaussian_curvature"])?;
    for &x in grid.cells() {
        let g = geom.angular_metric(x).map_err(compute("angular metric"))?;
        let v = geom.volume_density(x).map_err(compute("volume density"))?;
        let k = geom.gaussian_curvature(x).map_err(compute("curvature"))?;
        w.write_record([sci(x), sci(g), sci(v), sci(k)])?;
    }
    w.flush()?;
    out.gnuplot("curvature.gp", "curvature.csv", "gaussian curvature", "x", &[(1, 4, "K(x)")])?;

    match geom.revolution_profile(cfg.profile_t_max, cfg.profile_steps) {
        Ok(p) => {
            let mut w = out.table("profile.csv", cfg)?.csv();
            w.write_record(["t", "r", "x"])?;
            for ((t, r), x) in p.t_grid.iter().zip(&p.r_values).zip(&p.x_values) {
                w.write_record([sci(*t), sci(*r), sci(*x)])?;
            }
            w.flush()?;
            out.gnuplot("profile.gp", "profile.csv", "profile of revolution", "x", &[(3, 2, "r(x)")])?;
        }
        // no embedding as a surface of revolution exists for alpha > -1
        Err(GeometryError::Unsupported(_)) => {}
        Err(e) => return Err(RunError::Compute(format!("revolution profile: {e}"))),
    }
    Ok(())
}
