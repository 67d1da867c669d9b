mod args;
mod config;
mod output;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, Read};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{CommandFactory, Parser};
use cvqkd::dm::{dm_point, keyrate_dm, DmConfig, HolevoBound};
use cvqkd::entropy::{gaussian_mutual_info, ProtocolConfig};
use cvqkd::estimation::{estimate, qpsk_estimate, Dataset};
use cvqkd::finite_size::{keyrate_finite, FiniteSizeParams};
use cvqkd::fock::Constellation;
use cvqkd::gm::{
    channel_cm, holevo_gm_with, keyrate, keyrate_mdi_symmetric, transmittance, ChannelParams, FIBER_LOSS_DB_PER_KM,
};
use cvqkd::simulator::{simulate, Modulation, SimSpec};

use args::{
    BoundChoice, Cli, Command, DmArgs, EstimateArgs, FiniteSizeArgs, GmArgs, Grid, Keyrate, ModulationKind,
    SimulateArgs,
};
use config::ConfigError;
use output::{Cell, Table};

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Lib(#[from] cvqkd::Error),
    #[error("{0}")]
    Io(#[from] io::Error),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(e) if e.is_io() => 3,
            CliError::Io(_) | CliError::Config(ConfigError::Io { .. }) => 3,
            _ => 2,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// `(distance, T)` pairs; distance is `None` on a transmittance grid.
fn grid_points(grid: &Grid, default_d: (f64, f64, usize)) -> Result<Vec<(Option<f64>, f64)>> {
    if !grid.t.is_empty() {
        return Ok(grid.t.iter().map(|&t| (None, t)).collect());
    }
    let loss = grid.loss_db_per_km.unwrap_or(FIBER_LOSS_DB_PER_KM);
    let distances = if grid.distance.is_empty() {
        linspace(
            grid.d_min.unwrap_or(default_d.0),
            grid.d_max.unwrap_or(default_d.1),
            grid.points.unwrap_or(default_d.2),
        )
    } else {
        grid.distance.clone()
    };
    distances
        .into_iter()
        .map(|d| Ok((Some(d), transmittance(d, loss)?)))
        .collect()
}

fn opt_distance(d: Option<f64>) -> Cell {
    d.map_or(Cell::Missing, Cell::Float)
}

fn run_gm(a: &GmArgs) -> Result<Table> {
    let cfg = ProtocolConfig::new(
        a.protocol.detection,
        a.protocol.reconciliation,
        a.protocol.beta,
        a.v_mod,
    )?;
    let mut table = Table::new(vec![
        "distance_km",
        "t_ch",
        "mutual_info",
        "holevo",
        "key_rate",
        "abort",
    ]);
    for (d, t_ch) in grid_points(&a.grid, (0.0, 60.0, 61))? {
        let ch = ChannelParams::new(t_ch, a.xi_ch, a.eta, a.xi_el, a.trusted)?;
        let k = keyrate(&cfg, &ch)?;
        table.push(vec![
            opt_distance(d),
            t_ch.into(),
            k.mutual_info.into(),
            k.holevo.into(),
            k.key_rate.into(),
            k.abort.into(),
        ]);
    }
    Ok(table)
}

fn load_constellation(spec: &str, alpha: Option<f64>) -> Result<Constellation> {
    let builtin = |f: fn(f64) -> Constellation| Ok(f(alpha.unwrap_or(0.15)));
    match spec.to_ascii_lowercase().as_str() {
        "bpsk" => builtin(Constellation::bpsk),
        "qpsk" => builtin(Constellation::qpsk),
        "qpsk-diagonal" => builtin(Constellation::qpsk_diagonal),
        _ => {
            let c = Constellation::from_json(&std::fs::read_to_string(spec)?)?;
            Ok(match alpha {
                Some(a) if c.max_abs2() > 0.0 => c.scaled(a / c.max_abs2().sqrt()),
                _ => c,
            })
        }
    }
}

fn run_dm(a: &DmArgs) -> Result<Table> {
    let c = load_constellation(&a.constellation, a.alpha)?;
    let p = &a.protocol;
    let base = DmConfig {
        xi: a.xi,
        ..DmConfig::new(c, 1.0, p.detection, p.reconciliation, p.beta)?
    };
    let points: Vec<(Option<f64>, f64)> =
        if a.grid.t.is_empty() && a.grid.distance.is_empty() && a.grid.d_min.is_none() && a.grid.d_max.is_none() {
            let n = a.grid.points.unwrap_or(50);
            linspace(a.t_min.unwrap_or(1.0 / n as f64), a.t_max.unwrap_or(1.0), n)
                .into_iter()
                .map(|t| (None, t))
                .collect()
        } else {
            grid_points(&a.grid, (0.0, 60.0, 61))?
        };
    let mut columns = vec!["distance_km", "t", "mutual_info"];
    match a.bound {
        BoundChoice::Direct => columns.extend(["chi_direct", "k_direct"]),
        BoundChoice::Extremality => columns.extend(["chi_extremality", "k_extremality"]),
        BoundChoice::Both => columns.extend(["chi_direct", "chi_extremality", "k_direct", "k_extremality"]),
    }
    let mut table = Table::new(columns);
    for (d, t) in points {
        let cfg = base.with_t(t);
        let mut row = vec![opt_distance(d), t.into()];
        match a.bound {
            BoundChoice::Both => {
                let pt = dm_point(&cfg)?;
                row.extend(
                    [
                        pt.mutual_info,
                        pt.chi_direct,
                        pt.chi_extremality,
                        pt.k_direct,
                        pt.k_extremality,
                    ]
                    .map(Cell::from),
                );
            }
            single => {
                let bound = if single == BoundChoice::Direct {
                    HolevoBound::Direct
                } else {
                    HolevoBound::Extremality
                };
                let k = keyrate_dm(&cfg, bound)?;
                row.extend([k.mutual_info, k.holevo, k.key_rate].map(Cell::from));
            }
        }
        table.push(row);
    }
    Ok(table)
}

fn read_dataset(path: &Path) -> Result<Dataset> {
    if path == Path::new("-") {
        let mut buf = Vec::new();
        io::stdin().lock().read_to_end(&mut buf)?;
        Ok(Dataset::read_csv(buf.as_slice())?)
    } else {
        Ok(Dataset::read_csv(File::open(path)?)?)
    }
}

fn run_estimate(a: &EstimateArgs) -> Result<Table> {
    let data = read_dataset(&a.input)?;
    if let Some(alpha) = a.qpsk_alpha {
        let q = qpsk_estimate(&data, alpha, a.protocol.detection)?;
        let mut table = Table::new(vec!["t_hat", "xi_hat", "c_hat", "v_hat"]);
        table.push([q.t_hat, q.xi_hat, q.c_hat, q.v_hat].map(Cell::from).to_vec());
        return Ok(table);
    }
    let (x, y) = data.linear_model(a.x_scale);
    let est = estimate(&x, &y, a.epsilon_pe, a.quantile)?;
    let cfg = ProtocolConfig::new(
        a.protocol.detection,
        a.protocol.reconciliation,
        a.protocol.beta,
        est.v_a,
    )?;
    let (t_worst, xi_worst) = est.worst_channel(a.protocol.detection)?;
    let k = est.worst_case_keyrate(&cfg)?;
    let mut table = Table::new(vec![
        "t_hat",
        "sigma2_hat",
        "t_min",
        "sigma2_max",
        "epsilon_pe",
        "z",
        "m",
        "v_a",
        "t_worst",
        "xi_worst",
        "mutual_info",
        "holevo",
        "key_rate",
    ]);
    table.push(vec![
        est.t_hat.into(),
        est.sigma2_hat.into(),
        est.t_min.into(),
        est.sigma2_max.into(),
        est.epsilon_pe.into(),
        est.z.into(),
        est.m.into(),
        est.v_a.into(),
        t_worst.into(),
        xi_worst.into(),
        k.mutual_info.into(),
        k.holevo.into(),
        k.key_rate.into(),
    ]);
    Ok(table)
}

fn run_finite_size(a: &FiniteSizeArgs) -> Result<Table> {
    let (i, chi) = match (a.mutual_info, a.holevo, a.t, a.xi) {
        (Some(i), Some(chi), _, _) => (i, chi),
        (None, None, Some(t), Some(xi)) => {
            let cfg = ProtocolConfig::new(a.detection, cvqkd::Reconciliation::Reverse, a.beta, a.v_mod)?;
            let chi = holevo_gm_with(&channel_cm(cfg.v(), t, xi)?, a.detection, cfg.reconciliation)?;
            (gaussian_mutual_info(&cfg, t, xi)?, chi)
        }
        _ => {
            return Err(CliError::Usage(
                "give either --mutual-info and --holevo, or --t and --xi".into(),
            ))
        }
    };
    let mut table = Table::new(vec![
        "n_total",
        "m",
        "n",
        "mutual_info",
        "holevo",
        "delta",
        "k_eps",
        "epsilon",
        "abort",
    ]);
    for &n_total in &a.n_total {
        let fs = FiniteSizeParams {
            n_total,
            m: a.m,
            d: a.d,
            p_ec: a.p_ec,
            eps_bar: a.eps_bar,
            eps_h: a.eps_h,
            eps_cor: a.eps_cor,
            eps_pe: a.eps_pe,
        };
        let k = keyrate_finite(i, chi, &fs, a.beta)?;
        table.push(vec![
            n_total.into(),
            a.m.into(),
            fs.n().into(),
            i.into(),
            chi.into(),
            k.delta.into(),
            k.k_eps.into(),
            k.epsilon.into(),
            k.abort.into(),
        ]);
    }
    Ok(table)
}

fn run_simulate(a: &SimulateArgs) -> Result<Table> {
    let t = match (a.t, a.distance) {
        (Some(t), None) => t,
        (None, Some(d)) => transmittance(d, a.loss_db_per_km.unwrap_or(FIBER_LOSS_DB_PER_KM))?,
        (None, None) => return Err(CliError::Usage("give --t or --distance".into())),
        (Some(_), Some(_)) => return Err(CliError::Usage("--t and --distance are mutually exclusive".into())),
    };
    let modulation = match a.modulation {
        ModulationKind::Gaussian => Modulation::Gaussian { v_mod: a.v_mod },
        ModulationKind::Qpsk => Modulation::Qpsk { alpha: a.alpha },
    };
    let spec = SimSpec {
        rounds: a.rounds,
        modulation,
        t,
        xi: a.xi,
        detection: a.detection,
        seed: a.seed,
    };
    Ok(match simulate(&spec)? {
        Dataset::Scalar { x, y } => {
            let mut table = Table::new(vec!["x", "y"]);
            for (x, y) in x.into_iter().zip(y) {
                table.push(vec![x.into(), y.into()]);
            }
            table
        }
        Dataset::Quadratures { x, y } => {
            let mut table = Table::new(vec!["x_q", "x_p", "y_q", "y_p"]);
            for (x, y) in x.into_iter().zip(y) {
                table.push([x[0], x[1], y[0], y[1]].map(Cell::from).to_vec());
            }
            table
        }
    })
}

fn run(cli: &Cli) -> Result<()> {
    let table = match &cli.command {
        Command::Keyrate(Keyrate::Gm(a)) => run_gm(a)?,
        Command::Keyrate(Keyrate::Dm(a)) => run_dm(a)?,
        Command::Keyrate(Keyrate::Mdi(a)) => {
            let mut table = Table::new(vec!["xi", "key_rate"]);
            for &xi in &a.xi {
                table.push(vec![xi.into(), keyrate_mdi_symmetric(xi)?.into()]);
            }
            table
        }
        Command::Estimate(a) => run_estimate(a)?,
        Command::FiniteSize(a) => run_finite_size(a)?,
        Command::Simulate(a) => run_simulate(a)?,
    };
    table.emit(cli.output.as_deref(), cli.format)?;
    Ok(())
}

fn parse_args() -> Result<Cli> {
    let mut args: Vec<OsString> = std::env::args_os().collect();
    if let Some(path) = config::take_config_path(&mut args) {
        args = config::splice(args, &PathBuf::from(path), &Cli::command())?;
    }
    Cli::try_parse_from(args).map_err(|e| {
        // help and version are not failures
        if !e.use_stderr() {
            let _ = e.print();
            std::process::exit(0);
        }
        CliError::Usage(e.render().to_string())
    })
}

fn main() -> ExitCode {
    let outcome = parse_args().and_then(|cli| run(&cli));
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string();
            eprintln!("error: {}", msg.trim_start_matches("error: ").trim_end());
            ExitCode::from(e.exit_code())
        }
    }
}
