//! Command-line front end for `qdcavity-core`: configuration-driven sweeps
//! written as CSV tables with `.meta` sidecars.

pub mod config;
pub mod exec;
pub mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use qdcavity_core::spectra::{
    dressed_eigenvalues, faraday_rotation, linear_grid, nonsaturation_window, validate_grid, Cavity, SpectrumTable,
};

use config::{BranchName, CavityName, ConfigError, FileConfig, FrameName, MethodName, RunConfig, TopologyName, Units};
use output::{WindowRow, DRESSED_HEADER, GFR_HEADER, SPECTRUM_HEADER, WINDOW_HEADER};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_SOLVER: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "qdcavity",
    version,
    about = "Reflection and transmission spectra of a QD spin in a cavity"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reflection/transmission spectra over the detuning grid for each power,
    /// plus the hot/cold phase rotation when both cavities are requested.
    Spectrum(Common),
    /// Responses at a fixed detuning over the (increasing) power list.
    PowerSweep {
        #[command(flatten)]
        common: Common,
        /// Detuning in units of the total cavity decay rate.
        #[arg(long, allow_negative_numbers = true)]
        omega: Option<f64>,
    },
    /// Hot-cavity spectra, read for the QD inversion.
    Saturation(Common),
    /// Dressed-state eigenfrequencies, closed form next to diagonalization.
    Dressed {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        nmax: Option<usize>,
    },
    /// Width of the non-saturated region around the cavity resonance.
    Window {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_negative_numbers = true)]
        threshold: Option<f64>,
    },
}

/// Flags shared by every subcommand. Each one overrides the matching file key.
#[derive(Debug, Args, Default)]
pub struct Common {
    /// TOML run configuration.
    #[arg(short, long)]
    pub config: Option<PathBuf>,
    /// Exit with status 2 if any point fails.
    #[arg(long)]
    pub strict: bool,
    #[arg(long)]
    pub output: Option<String>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, value_enum)]
    pub units: Option<Units>,
    #[arg(long, value_enum)]
    pub topology: Option<TopologyName>,
    #[arg(long)]
    pub g: Option<f64>,
    #[arg(long)]
    pub side_ratio: Option<f64>,
    #[arg(long)]
    pub gamma_par: Option<f64>,
    #[arg(long)]
    pub gamma_star: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub powers: Option<Vec<f64>>,
    #[arg(long, allow_negative_numbers = true)]
    pub omega_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub omega_max: Option<f64>,
    #[arg(long)]
    pub omega_points: Option<usize>,
    #[arg(long, value_enum, value_delimiter = ',')]
    pub methods: Option<Vec<MethodName>>,
    #[arg(long, value_enum, value_delimiter = ',')]
    pub cavities: Option<Vec<CavityName>>,
    #[arg(long, value_enum)]
    pub branch_mode: Option<BranchName>,
    #[arg(long, value_enum)]
    pub frame: Option<FrameName>,
    #[arg(long)]
    pub cutoff_cap: Option<usize>,
    #[arg(long)]
    pub tolerance: Option<f64>,
}

fn set<T>(dst: &mut Option<T>, src: Option<T>) {
    if src.is_some() {
        *dst = src;
    }
}

impl Common {
    pub fn apply(&self, file: &mut FileConfig) {
        let (s, d, r) = (&mut file.system, &mut file.drive, &mut file.run);
        set(&mut s.units, self.units);
        set(&mut s.g, self.g);
        set(&mut s.side_ratio, self.side_ratio);
        set(&mut s.gamma_par, self.gamma_par);
        set(&mut s.gamma_star, self.gamma_star);
        set(&mut d.powers, self.powers.clone());
        set(&mut d.omega_min, self.omega_min);
        set(&mut d.omega_max, self.omega_max);
        set(&mut d.omega_points, self.omega_points);
        set(&mut r.topology, self.topology);
        set(&mut r.methods, self.methods.clone());
        set(&mut r.cavities, self.cavities.clone());
        set(&mut r.branch_mode, self.branch_mode);
        set(&mut r.frame, self.frame);
        set(&mut r.cutoff_cap, self.cutoff_cap);
        set(&mut r.tolerance, self.tolerance);
        set(&mut r.output, self.output.clone());
        set(&mut r.workers, self.workers);
    }
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Spectrum(c) | Command::Saturation(c) => c,
            Command::PowerSweep { common, .. } | Command::Dressed { common, .. } | Command::Window { common, .. } => {
                common
            }
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Command::Spectrum(_) => "spectrum",
            Command::PowerSweep { .. } => "power_sweep",
            Command::Saturation(_) => "saturation",
            Command::Dressed { .. } => "dressed",
            Command::Window { .. } => "window",
        }
    }

    /// File configuration with every flag applied, resolved and validated.
    pub fn resolve(&self) -> Result<RunConfig, ConfigError> {
        let common = self.common();
        let mut file = match &common.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        common.apply(&mut file);
        match self {
            Command::PowerSweep { omega, .. } => set(&mut file.drive.omega_detuning, *omega),
            Command::Dressed { nmax, .. } => set(&mut file.run.nmax, *nmax),
            Command::Window { threshold, .. } => set(&mut file.run.window_threshold, *threshold),
            _ => {}
        }
        file.resolve()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Solver(String),
}

impl RunError {
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) | RunError::Io { .. } => EXIT_CONFIG,
            RunError::Solver(_) => EXIT_SOLVER,
        }
    }
}

/// What a run wrote.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Summary {
    pub files: Vec<PathBuf>,
    pub rows: usize,
    pub failed: usize,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

struct Writer<'a> {
    config: &'a RunConfig,
    command: &'static str,
    files: Vec<PathBuf>,
    meta: Vec<(String, String)>,
}

impl<'a> Writer<'a> {
    fn new(config: &'a RunConfig, command: &'static str) -> Result<Self, RunError> {
        let parent = Path::new(&config.output).parent().filter(|p| !p.as_os_str().is_empty());
        if let Some(dir) = parent {
            std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        }
        let mut meta = vec![
            ("command".to_string(), command.to_string()),
            ("cli_version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
            ("core_version".to_string(), qdcavity_core::VERSION.to_string()),
        ];
        meta.extend(config.entries());
        Ok(Self {
            config,
            command,
            files: Vec::new(),
            meta,
        })
    }

    fn csv(&mut self, name: &str, header: &[&str], records: Vec<Vec<String>>) -> Result<usize, RunError> {
        let path = output::output_path(&self.config.output, name, "csv");
        let n = output::write_csv(&path, header, records).map_err(io_err(&path))?;
        self.meta.push((format!("csv.{name}"), path.display().to_string()));
        self.meta.push((format!("csv.{name}.rows"), n.to_string()));
        self.files.push(path);
        Ok(n)
    }

    fn finish(mut self, rows: usize, failed: usize, extra: Vec<(String, String)>) -> Result<Summary, RunError> {
        self.meta.push(("rows".to_string(), rows.to_string()));
        self.meta.push(("failed_rows".to_string(), failed.to_string()));
        self.meta.extend(extra);
        let path = output::output_path(&self.config.output, self.command, "meta");
        output::write_meta(&path, &self.meta).map_err(io_err(&path))?;
        self.files.push(path);
        Ok(Summary {
            files: self.files,
            rows,
            failed,
        })
    }
}

fn grid(config: &RunConfig) -> Result<Vec<f64>, RunError> {
    let grid = linear_grid(config.omega_min, config.omega_max, config.omega_points);
    validate_grid(&grid, "omega").map_err(|e| ConfigError::Invalid {
        key: "drive.omega_points".to_string(),
        reason: e.to_string(),
    })?;
    Ok(grid)
}

fn failures(table: &SpectrumTable) -> usize {
    table.rows.iter().filter(|r| r.result.is_err()).count()
}

fn write_table(w: &mut Writer, name: &str, table: &SpectrumTable) -> Result<(usize, usize), RunError> {
    let n = w.csv(
        name,
        &SPECTRUM_HEADER,
        table.rows.iter().map(output::spectrum_record).collect(),
    )?;
    Ok((n, failures(table)))
}

/// Run one subcommand against its resolved configuration.
pub fn execute(command: &Command, config: &RunConfig) -> Result<Summary, RunError> {
    let pool = exec::pool(config.workers).map_err(|e| ConfigError::Invalid {
        key: "run.workers".to_string(),
        reason: e.to_string(),
    })?;
    let p = &config.params;
    let mut w = Writer::new(config, command.name())?;
    match command {
        Command::Spectrum(_) => {
            let grid = grid(config)?;
            let table = exec::spectrum(
                &pool,
                p,
                &config.powers,
                &grid,
                &config.methods,
                &config.cavities,
                &config.options,
            );
            let (rows, failed) = write_table(&mut w, "spectrum", &table)?;
            if config.cavities.contains(&Cavity::Hot) && config.cavities.contains(&Cavity::Cold) {
                let gfr = faraday_rotation(&table).map_err(|e| RunError::Solver(e.to_string()))?;
                w.csv("gfr", &GFR_HEADER, gfr.iter().map(output::gfr_record).collect())?;
            }
            w.finish(rows, failed, output::point_diagnostics(&table.rows))
        }
        Command::Saturation(_) => {
            let grid = grid(config)?;
            let table = exec::spectrum(
                &pool,
                p,
                &config.powers,
                &grid,
                &config.methods,
                &[Cavity::Hot],
                &config.options,
            );
            let (rows, failed) = write_table(&mut w, "saturation", &table)?;
            w.finish(rows, failed, output::point_diagnostics(&table.rows))
        }
        Command::PowerSweep { .. } => {
            if config.powers.windows(2).any(|x| x[0] >= x[1]) {
                return Err(ConfigError::Invalid {
                    key: "drive.powers".to_string(),
                    reason: "must be strictly increasing for a power sweep".to_string(),
                }
                .into());
            }
            let table = exec::power_sweep(
                &pool,
                p,
                config.omega_detuning,
                &config.powers,
                &config.methods,
                &config.cavities,
                &config.options,
            );
            let (rows, failed) = write_table(&mut w, "power_sweep", &table)?;
            w.finish(rows, failed, output::point_diagnostics(&table.rows))
        }
        Command::Dressed { .. } => {
            let levels = dressed_eigenvalues(p, config.nmax).map_err(|e| ConfigError::Invalid {
                key: "system".to_string(),
                reason: e.to_string(),
            })?;
            let rows = w.csv(
                "dressed",
                &DRESSED_HEADER,
                levels.iter().map(output::dressed_record).collect(),
            )?;
            w.finish(rows, 0, Vec::new())
        }
        Command::Window { .. } => {
            let grid = grid(config)?;
            let table = exec::spectrum(
                &pool,
                p,
                &config.powers,
                &grid,
                &config.methods,
                &[Cavity::Hot],
                &config.options,
            );
            let mut windows = Vec::new();
            for &power in &config.powers {
                for &method in &config.methods {
                    let curve: Vec<_> = table.curve(power, method, Cavity::Hot).collect();
                    let window = match curve.iter().find_map(|r| r.result.as_ref().err()) {
                        Some(e) => Err(e.to_string()),
                        None => {
                            let s: Vec<f64> = curve.iter().filter_map(|r| r.values()).map(|v| v.sigma_z).collect();
                            Ok(nonsaturation_window(&grid, &s, config.window_threshold))
                        }
                    };
                    windows.push(WindowRow {
                        power_norm: power,
                        method,
                        threshold: config.window_threshold,
                        window,
                    });
                }
            }
            let rows = w.csv(
                "window",
                &WINDOW_HEADER,
                windows.iter().map(output::window_record).collect(),
            )?;
            let failed = windows.iter().filter(|x| x.window.is_err()).count();
            w.finish(rows, failed, output::point_diagnostics(&table.rows))
        }
    }
}

/// Parse arguments, run, and return the process exit status.
pub fn run_from_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let config = match cli.command.resolve() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return EXIT_CONFIG;
        }
    };
    match execute(&cli.command, &config) {
        Ok(summary) => {
            for f in &summary.files {
                println!("wrote {}", f.display());
            }
            println!("{} rows, {} failed", summary.rows, summary.failed);
            if summary.failed > 0 && cli.command.common().strict {
                eprintln!("error: {} failed rows under --strict", summary.failed);
                return EXIT_SOLVER;
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
