#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use nhtopo::band::{bloch_angles, eigensystem, re_phi_yx, Axis, Band, ModelParams};
use nhtopo::dilation::pulses::{compile_pulses, write_hardware_program, write_program};
use nhtopo::dilation::{dilated_texture_series, DilationConfig, Integrator};
use nhtopo::dynamics::{texture_series, SeriesSource, Side, StateVec, TextureSeries};
use nhtopo::extraction::{fit_series, re_phi_from_fit, FitConfig, FitModel};
use nhtopo::pipeline::output::{to_csv, write_scan};
use nhtopo::pipeline::{phase_diagram, run_scan, Mode, PhaseDiagramConfig, ScenarioConfig};
use nhtopo::topology::{winding_report, KGrid};
use nhtopo::{Error, Result};

#[derive(Parser)]
#[command(name = "nhtopo", version, about = "Topological invariants of non-Hermitian two-band lattice models")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON scenario (or phase-diagram) config
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; stdout when absent
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// k-grid size for winding integrals
    #[arg(long, global = true)]
    grid: Option<usize>,
    #[arg(long, global = true, value_enum)]
    mode: Option<Mode>,
    /// Relative pulse-amplitude noise level
    #[arg(long, global = true)]
    noise: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    j0: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    j1: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    j2: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    delta: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    hz: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Right,
    Left,
}

#[derive(Subcommand)]
enum Command {
    /// Bloch field components at one k
    Field {
        #[arg(long, allow_hyphen_values = true)]
        k: f64,
    },
    /// Eigenvalues, eigenvectors, textures and azimuths at one k
    Eigs {
        #[arg(long, allow_hyphen_values = true)]
        k: f64,
    },
    /// w_+, w_-, w_t and nu_E on a dense grid
    Windings,
    /// Exact normalized texture series
    Evolve {
        #[arg(long, allow_hyphen_values = true)]
        k: f64,
        #[arg(long, default_value_t = 3.0)]
        horizon: f64,
        #[arg(long, default_value_t = 301)]
        samples: usize,
        #[arg(long, value_enum, default_value_t = SideArg::Right)]
        side: SideArg,
    },
    /// Ancilla-projected texture series from the dilated simulation, with the exact series
    Dilate {
        #[arg(long, allow_hyphen_values = true)]
        k: f64,
        #[arg(long)]
        eta0: Option<f64>,
        #[arg(long, default_value_t = 1000)]
        slices: usize,
        #[arg(long, default_value_t = 3.0)]
        horizon: f64,
        #[arg(long, value_enum, default_value_t = IntegratorArg::Trotter)]
        integrator: IntegratorArg,
    },
    /// Compiled pulse program
    Pulses {
        #[arg(long, allow_hyphen_values = true)]
        k: f64,
        #[arg(long)]
        eta0: Option<f64>,
        #[arg(long, default_value_t = 1000)]
        slices: usize,
        #[arg(long, default_value_t = 3.0)]
        horizon: f64,
        /// J coupling in Hz
        #[arg(long)]
        coupling: Option<f64>,
        /// Non-negative durations with phase-shifted sandwiches
        #[arg(long)]
        hardware: bool,
    },
    /// Fit a texture series CSV (columns t, sx, sy)
    Fit {
        #[arg(long)]
        input: PathBuf,
        /// k of the series, used to seed the fit from the model
        #[arg(long, allow_hyphen_values = true)]
        k: Option<f64>,
    },
    /// k-sweep per the scenario config
    Scan,
    /// Windings over a (J0, J2) grid
    PhaseDiagram,
}

#[derive(Clone, Copy, ValueEnum)]
enum IntegratorArg {
    Trotter,
    Exact,
}

impl From<IntegratorArg> for Integrator {
    fn from(a: IntegratorArg) -> Self {
        match a {
            IntegratorArg::Trotter => Integrator::Trotter,
            IntegratorArg::Exact => Integrator::Exact,
        }
    }
}

fn scenario(common: &Common) -> Result<ScenarioConfig> {
    let mut cfg = match &common.config {
        Some(p) => ScenarioConfig::load(p)?,
        None => ScenarioConfig::default(),
    };
    let m = &mut cfg.model;
    for (slot, v) in [(&mut m.j0, common.j0), (&mut m.j1, common.j1), (&mut m.j2, common.j2), (&mut m.delta, common.delta), (&mut m.hz, common.hz)] {
        if let Some(v) = v {
            *slot = v;
        }
    }
    if let Some(s) = common.seed {
        cfg.seed = Some(s);
    }
    if let Some(g) = common.grid {
        cfg.winding_grid = g;
    }
    if let Some(mode) = common.mode {
        cfg.mode = mode;
    }
    if let Some(n) = common.noise {
        cfg.noise.level = n;
        if n > 0.0 && common.mode.is_none() && common.config.is_none() {
            cfg.mode = Mode::Noisy;
        }
    }
    if let Some(dir) = &common.out {
        cfg.output.dir = Some(dir.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(out: Option<&Path>, name: &str, text: &str) -> Result<()> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let path = dir.join(name);
            std::fs::write(&path, text)?;
            eprintln!("wrote {}", path.display());
        }
        None => {
            use std::io::Write;
            match std::io::stdout().lock().write_all(text.as_bytes()) {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
                r => r?,
            }
        }
    }
    Ok(())
}

fn emit_json(out: Option<&Path>, name: &str, value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))? + "\n";
    emit(out, name, &text)
}

#[derive(serde::Serialize)]
struct SeriesRow {
    t: f64,
    sx: f64,
    sy: f64,
    sz: f64,
}

#[derive(serde::Serialize)]
struct ComparedRow {
    t: f64,
    sx: f64,
    sy: f64,
    sz: f64,
    sx_exact: f64,
    sy_exact: f64,
    sz_exact: f64,
}

fn series_rows(s: &TextureSeries) -> Vec<SeriesRow> {
    let sz = s.sz.clone().unwrap_or_else(|| vec![f64::NAN; s.len()]);
    (0..s.len()).map(|i| SeriesRow { t: s.times[i], sx: s.sx[i], sy: s.sy[i], sz: sz[i] }).collect()
}

fn read_series(path: &Path) -> Result<TextureSeries> {
    #[derive(serde::Deserialize)]
    struct Row {
        t: f64,
        sx: f64,
        sy: f64,
    }
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let rows: Vec<Row> = reader
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let series = TextureSeries {
        times: rows.iter().map(|r| r.t).collect(),
        sx: rows.iter().map(|r| r.sx).collect(),
        sy: rows.iter().map(|r| r.sy).collect(),
        sz: None,
        k: None,
        source: SeriesSource::Exact,
    };
    Ok(series)
}

fn run(cli: Cli) -> Result<()> {
    let common = &cli.common;
    let out = common.out.as_deref();
    match cli.command {
        Command::PhaseDiagram => {
            let mut cfg = match &common.config {
                Some(p) => {
                    let text = std::fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
                    serde_json::from_str::<PhaseDiagramConfig>(&text)?
                }
                None => PhaseDiagramConfig::default(),
            };
            if let Some(g) = common.grid {
                cfg.grid = g;
            }
            for (slot, v) in [(&mut cfg.j1, common.j1), (&mut cfg.delta, common.delta), (&mut cfg.hz, common.hz)] {
                if let Some(v) = v {
                    *slot = v;
                }
            }
            emit(out, "phase_diagram.csv", &to_csv(&phase_diagram(&cfg)?)?)
        }
        Command::Scan => {
            let cfg = scenario(common)?;
            let result = run_scan(&cfg)?;
            match &cfg.output.dir {
                Some(dir) => {
                    let (c, j) = write_scan(&result, dir)?;
                    eprintln!("wrote {} and {}", c.display(), j.display());
                }
                None => emit(None, "", &nhtopo::pipeline::output::scan_csv(&result.rows)?)?,
            }
            let s = &result.summary;
            eprintln!(
                "w_t = {:?}, nu_E = {:?}, failed k-points: {}",
                s.w_t.value,
                s.nu_e.value,
                s.failed.len()
            );
            if !s.failed.is_empty() {
                eprintln!("warning: {} k-points failed; see status column", s.failed.len());
            }
            Ok(())
        }
        cmd => {
            let cfg = scenario(common)?;
            let model: ModelParams = cfg.model;
            match cmd {
                Command::Field { k } => {
                    let h = model.field(k);
                    emit_json(out, "field.json", &json!({ "k": k, "hx": h.hx, "hy": h.hy, "hz": h.hz }))
                }
                Command::Eigs { k } => {
                    let h = model.field(k);
                    let es = eigensystem(&h)?;
                    let band = |b: Band| {
                        json!({
                            "energy": es.energy(b),
                            "right": [es.right(b)[0], es.right(b)[1]],
                            "left": [es.left(b)[0], es.left(b)[1]],
                            "texture": [es.texture(b, Axis::X), es.texture(b, Axis::Y), es.texture(b, Axis::Z)],
                            "azimuth": es.azimuth(b),
                        })
                    };
                    let angles = bloch_angles(&h).ok();
                    emit_json(
                        out,
                        "eigs.json",
                        &json!({
                            "k": k,
                            "plus": band(Band::Plus),
                            "minus": band(Band::Minus),
                            "re_phi_yx": re_phi_yx(&h).ok(),
                            "beta": angles.map(|a| a.beta),
                            "phi_yx": angles.map(|a| a.phi_yx),
                        }),
                    )
                }
                Command::Windings => {
                    let report = winding_report(&model, &KGrid::new(cfg.winding_grid)?)?;
                    emit_json(out, "windings.json", &serde_json::to_value(report).map_err(|e| Error::Io(e.to_string()))?)
                }
                Command::Evolve { k, horizon, samples, side } => {
                    if samples < 2 || !(horizon > 0.0) {
                        return Err(Error::Config("evolve needs horizon > 0 and at least 2 samples".into()));
                    }
                    let h = model.field(k);
                    let psi0 = cfg.psi0();
                    let times: Vec<f64> = (0..samples).map(|i| horizon * i as f64 / (samples - 1) as f64).collect();
                    let side = match side {
                        SideArg::Right => Side::Right,
                        SideArg::Left => Side::Left,
                    };
                    let state = StateVec::new(psi0, side)?;
                    let state = if side == Side::Left {
                        // same band weights on the left basis
                        let es = eigensystem(&h)?;
                        let c = es.coefficients(&psi0);
                        nhtopo::dynamics::InitialWeights::new(c[0], c[1]).state(&es, Side::Left)
                    } else {
                        state
                    };
                    emit(out, "evolve.csv", &to_csv(&series_rows(&texture_series(&h, &state, &times)?))?)
                }
                Command::Dilate { k, eta0, slices, horizon, integrator } => {
                    let h = model.field(k);
                    let dil = DilationConfig { eta0: eta0.or(cfg.eta0), horizon, slices, integrator: integrator.into() };
                    let schedule = dil.schedule(&h)?;
                    let psi0 = cfg.psi0();
                    let sim = dilated_texture_series(&schedule, &psi0, dil.integrator, 1)?;
                    let exact = texture_series(&h, &StateVec::new(psi0, Side::Right)?, &sim.times)?;
                    let (sz, ez) = (sim.sz.clone().unwrap(), exact.sz.clone().unwrap());
                    let rows: Vec<ComparedRow> = (0..sim.len())
                        .map(|i| ComparedRow {
                            t: sim.times[i],
                            sx: sim.sx[i],
                            sy: sim.sy[i],
                            sz: sz[i],
                            sx_exact: exact.sx[i],
                            sy_exact: exact.sy[i],
                            sz_exact: ez[i],
                        })
                        .collect();
                    eprintln!("eta0 = {}", schedule.eta0);
                    emit(out, "dilate.csv", &to_csv(&rows)?)
                }
                Command::Pulses { k, eta0, slices, horizon, coupling, hardware } => {
                    let h = model.field(k);
                    let dil = DilationConfig { eta0: eta0.or(cfg.eta0), horizon, slices, integrator: Integrator::Trotter };
                    let program = compile_pulses(&dil.schedule(&h)?, coupling.unwrap_or(cfg.coupling_hz))?;
                    let text = if hardware { write_hardware_program(&program) } else { write_program(&program) };
                    emit(out, "pulses.txt", &text)
                }
                Command::Fit { input, k } => {
                    let series = read_series(&input)?;
                    let nominal = match k {
                        Some(k) => Some(FitModel::from_field(&model.field(k), &cfg.psi0())?),
                        None => None,
                    };
                    let fit_cfg = FitConfig { restarts: cfg.restarts, seed: cfg.seed_or_default(), ..Default::default() };
                    let fit = fit_series(&series, &fit_cfg, nominal.as_ref())?;
                    let re_phi = re_phi_from_fit(&fit)?;
                    emit_json(
                        out,
                        "fit.json",
                        &json!({
                            "energy": fit.model.energy,
                            "textures": { "plus": fit.textures[0], "minus": fit.textures[1] },
                            "phi_pp": fit.phi_pp,
                            "phi_mm": fit.phi_mm,
                            "re_phi": re_phi.value,
                            "re_phi_period": re_phi.period,
                            "residual_rms": fit.residual_rms,
                            "restarts": fit.restarts,
                        }),
                    )
                }
                Command::Scan | Command::PhaseDiagram => unreachable!(),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}
