use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use soc_cavity::drift::ep::{drift_family, scan_exceptional_points};
use soc_cavity::io::{self, emit_plot_script, parse_config, ConfigDocument, JsonDocument, PlotKind, Table};
use soc_cavity::spectra::psd_map;
use soc_cavity::sweep::run_sweep;
use soc_cavity::topology::{berry_from_marker, chern_marker_from_psd, power_activation_curve, GapWindow};
use soc_cavity::{derive, DriftMatrix, Error};

#[derive(Parser)]
#[command(name = "soc-cavity", version, about = "Spectra, stability and topology of a driven spin-orbit-coupled cavity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Routh-Hurwitz certificate and eigenvalue check over the k grid.
    Stability(Common),
    /// Drift-matrix eigenvalues over the k grid.
    Eigen(Common),
    /// Output power spectral density over the (k, ω) grid.
    Psd(Gated),
    /// Chern marker map derived from the output spectrum.
    Chern(Gated),
    /// Berry curvature map derived from the Chern marker.
    Berry(Gated),
    /// Exceptional points of the drift spectrum along k.
    EpScan(Common),
    /// Peak marker in the gap window against drive power.
    PowerSweep(Common),
    /// Generic one- or two-axis parameter sweep.
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    /// Configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write JSON numbers as 17-digit strings.
    #[arg(long)]
    exact: bool,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    workers: Option<usize>,
    /// Write a gnuplot script next to the CSV output.
    #[arg(long)]
    emit_plot: bool,
}

#[derive(Args)]
struct Gated {
    #[command(flatten)]
    common: Common,
    /// Compute even when the steady state is not certified stable.
    #[arg(long)]
    allow_unstable: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

enum Failure {
    Config(String),
    Unstable(String),
    Numerical(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Unstable(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Unstable(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::MarginalSpectrum { .. }
            | Error::EigenFailure
            | Error::SingularResolvent { .. }
            | Error::SingularResponse { .. }
            | Error::TrackingAmbiguity { .. }
            | Error::ZeroFrequency
            | Error::BandDegeneracy { .. }
            | Error::NonConvergedEigen { .. }
            | Error::EmptyResult(_) => Failure::Numerical(msg),
            _ => Failure::Config(msg),
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

/// What a command produced, in both output shapes.
struct Product {
    table: Table,
    json: JsonDocument,
    plot: Option<PlotKind>,
}

fn load(path: &Path) -> std::result::Result<ConfigDocument, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

/// Fails with exit code 2 unless every k of the grid has a certified stable steady state.
fn require_stable(doc: &ConfigDocument) -> Outcome {
    let derived = derive(&doc.params);
    for k in doc.k_grid()? {
        match DriftMatrix::build(&derived, &doc.params, k).stability_report(doc.job.stability_tol) {
            Ok(r) if r.rh_stable => {}
            Ok(r) => {
                return Err(Failure::Unstable(format!(
                    "steady state is unstable at k = {k} (max Re λ = {:.6e}); pass --allow-unstable to compute anyway",
                    r.max_real_part
                )))
            }
            Err(Error::MarginalSpectrum { max_real_part, .. }) => {
                return Err(Failure::Unstable(format!(
                    "steady state is marginal at k = {k} (max Re λ = {max_real_part:.3e}); pass --allow-unstable to compute anyway"
                )))
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(())
}

fn stability(doc: &ConfigDocument, exact: bool) -> std::result::Result<Product, Failure> {
    let derived = derive(&doc.params);
    let ks = doc.k_grid()?;
    let reports: Vec<_> = ks
        .iter()
        .map(|&k| match DriftMatrix::build(&derived, &doc.params, k).stability_report(doc.job.stability_tol) {
            Ok(r) => Ok(Ok(r)),
            Err(e @ Error::MarginalSpectrum { .. }) => Ok(Err(e.to_string())),
            Err(e) => Err(e),
        })
        .collect::<soc_cavity::Result<_>>()?;
    Ok(Product {
        table: io::stability_table(&ks, &reports)?,
        json: io::stability_json(&ks, &reports, exact).meta("params", doc.params).meta("derived", derived),
        plot: Some(PlotKind::Stability),
    })
}

fn eigen(doc: &ConfigDocument, exact: bool) -> std::result::Result<Product, Failure> {
    let derived = derive(&doc.params);
    let ks = doc.k_grid()?;
    let spectra: Vec<_> = ks
        .iter()
        .map(|&k| DriftMatrix::build(&derived, &doc.params, k).eigen_spectrum())
        .collect::<soc_cavity::Result<_>>()?;
    Ok(Product {
        table: io::eigen_table(&ks, &spectra)?,
        json: io::eigen_json(&ks, &spectra, exact).meta("params", doc.params).meta("derived", derived),
        plot: Some(PlotKind::EigenPanels),
    })
}

fn spectral(doc: &ConfigDocument, exact: bool, what: &Command) -> std::result::Result<Product, Failure> {
    let map = psd_map(&doc.params, &doc.k_grid()?, &doc.omega_grid()?)?;
    if let Command::Psd(_) = what {
        return Ok(Product {
            table: io::spectral_table(&map, None)?,
            json: io::spectral_json(&map, None, exact),
            plot: Some(PlotKind::PsdHeatmap),
        });
    }
    let marker = chern_marker_from_psd(&map, &doc.params)?;
    if let Command::Berry(_) = what {
        let berry = berry_from_marker(&marker);
        return Ok(Product {
            table: io::berry_table(&berry, &marker)?,
            json: io::berry_json(&berry, &marker, exact).meta("params", doc.params).meta("derived", map.meta.derived),
            plot: Some(PlotKind::BerryHeatmap),
        });
    }
    Ok(Product {
        table: io::spectral_table(&map, Some(&marker))?,
        json: io::spectral_json(&map, Some(&marker), exact),
        plot: Some(PlotKind::MarkerOverlay),
    })
}

fn ep_scan(doc: &ConfigDocument, exact: bool) -> std::result::Result<Product, Failure> {
    let derived = derive(&doc.params);
    let eps = scan_exceptional_points(drift_family(&derived, &doc.params), &doc.k_grid()?, doc.job.ep_tolerance)?;
    Ok(Product {
        table: io::ep_table(&eps),
        json: io::ep_json(&eps, exact).meta("params", doc.params).meta("derived", derived),
        plot: None,
    })
}

fn power_sweep(doc: &ConfigDocument, exact: bool) -> std::result::Result<Product, Failure> {
    let j = &doc.job;
    let window = GapWindow::centered(doc.params.omega_z, j.window_scale, j.window_center);
    let curves = power_activation_curve(&doc.params, &j.k_points, &doc.power_grid()?, &doc.omega_grid()?, &window)?;
    Ok(Product {
        table: io::power_table(&curves)?,
        json: io::power_json(&curves, exact).meta("params", doc.params).meta("window", [window.lo, window.hi]),
        plot: Some(PlotKind::PowerCurves),
    })
}

fn sweep(doc: &ConfigDocument, exact: bool, workers: usize) -> std::result::Result<Product, Failure> {
    let rs = run_sweep(&doc.sweep_spec(), workers)?;
    Ok(Product { table: io::result_set_table(&rs)?, json: io::result_set_json(&rs, exact), plot: None })
}

fn write_product(product: Product, common: &Common) -> Outcome {
    let io_err = |e: std::io::Error| Failure::Config(e.to_string());
    if common.emit_plot {
        if common.format != Format::Csv {
            return Err(Failure::Config("--emit-plot needs --format csv".into()));
        }
        if common.out.is_none() {
            return Err(Failure::Config("--emit-plot needs --out".into()));
        }
        if product.plot.is_none() {
            return Err(Failure::Config("this command has no plot script".into()));
        }
    }
    match (common.format, &common.out) {
        (Format::Csv, Some(path)) => product.table.write(path)?,
        (Format::Csv, None) => product.table.write_to(std::io::stdout().lock())?,
        (Format::Json, Some(path)) => product.json.write(path)?,
        (Format::Json, None) => {
            let text = serde_json::to_string_pretty(&product.json.into_value()).map_err(Error::from)?;
            writeln!(std::io::stdout().lock(), "{text}").map_err(io_err)?;
        }
    }
    if let (true, Some(out), Some(kind)) = (common.emit_plot, &common.out, product.plot) {
        let csv_name = out.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        emit_plot_script(kind, &csv_name, product.table.rows.len(), &out.with_extension("gp"))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    let (common, allow_unstable) = match &cli.command {
        Command::Psd(g) | Command::Chern(g) | Command::Berry(g) => (&g.common, Some(g.allow_unstable)),
        Command::Stability(c) | Command::Eigen(c) | Command::EpScan(c) | Command::PowerSweep(c) | Command::Sweep(c) => {
            (c, None)
        }
    };
    let workers = match common.workers {
        Some(0) => return Err(Failure::Config("--workers must be at least 1".into())),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let doc = load(&common.config)?;
    if allow_unstable == Some(false) {
        require_stable(&doc)?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Failure::Config(e.to_string()))?;
    let exact = common.exact;
    let product = pool.install(|| match &cli.command {
        Command::Stability(_) => stability(&doc, exact),
        Command::Eigen(_) => eigen(&doc, exact),
        cmd @ (Command::Psd(_) | Command::Chern(_) | Command::Berry(_)) => spectral(&doc, exact, cmd),
        Command::EpScan(_) => ep_scan(&doc, exact),
        Command::PowerSweep(_) => power_sweep(&doc, exact),
        Command::Sweep(_) => sweep(&doc, exact, workers),
    })?;
    write_product(product, common)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
