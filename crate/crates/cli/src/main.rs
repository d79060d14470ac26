//! `jdm`: check, sample and analyse graphs with a prescribed joint-degree
//! matrix.
//!
//! Exit status is 0 on success, 1 when the input is well formed but the
//! request cannot be met (not graphical, empty stream, instance too large)
//! and 2 when an input file cannot be read or parsed.

use std::fs;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use jdm_core::assembler::{graph_batch, run_ensemble, EnsembleConfig};
use jdm_core::estimate::{clustering_by_degree, cycle_counts, log_weight_histogram, EnsembleEstimator, ObservableSeries};
use jdm_core::graphicality::check_jdm;
use jdm_core::io::{
    format_jdm, format_spectra, parse_edge_list, parse_jdm, parse_spectra, read_samples,
    write_sample, SpectraRecord,
};
use jdm_core::model::{degree_classes, extract_jdm, Jdm};
use jdm_core::oracle::{enumerate_realizations, DEFAULT_LIMIT_N};
use jdm_core::rng::{derive_stream, RngChooser, StreamDomain};
use jdm_core::spectra::sample_spectra_with;

#[derive(Parser, Debug)]
#[command(name = "jdm", version, about = "Sample simple graphs with a prescribed joint-degree matrix")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Test whether a JDM file is graphical and report its degree classes.
    Check { jdm: PathBuf },
    /// Draw a weighted ensemble and write one JSON record per graph.
    Sample {
        jdm: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
        samples_per_spectra: u64,
        /// Build graphs on spectra matrices written by `jdm spectra`
        /// instead of drawing new ones.
        #[arg(long)]
        spectra: Option<PathBuf>,
        /// Worker threads; all cores by default. Output does not depend on it.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Draw spectra matrices only, for a later `jdm sample --spectra`.
    Spectra {
        jdm: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Weighted and unweighted averages of an observable over a sample file.
    Estimate {
        samples: PathBuf,
        #[arg(long, value_enum, default_value_t = Observable::Clustering)]
        observable: Observable,
        #[arg(long, default_value_t = 5)]
        max_cycle_len: usize,
        /// Also write a histogram of the sample log-weights here.
        #[arg(long)]
        histogram: Option<PathBuf>,
        #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u64).range(1..))]
        bins: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Read an edge list and write its JDM.
    Extract {
        edges: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List every realization of a small JDM up to isomorphism.
    Enumerate {
        jdm: PathBuf,
        #[arg(long, default_value_t = DEFAULT_LIMIT_N)]
        limit_n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args, Debug)]
struct RunArgs {
    /// Master seed. Without it a seed is drawn and printed to stderr.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    n_spectra: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn seed(&self) -> u64 {
        self.seed.unwrap_or_else(|| {
            let s = rand::random();
            eprintln!("seed: {s}");
            s
        })
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Observable {
    /// Mean local clustering coefficient per degree.
    Clustering,
    /// Number of simple cycles per length, from 3 to --max-cycle-len.
    Cycles,
}

enum Failure {
    Domain(String),
    Input(String),
}

impl From<jdm_core::Error> for Failure {
    fn from(e: jdm_core::Error) -> Self {
        use jdm_core::Error as E;
        match e {
            E::Parse { .. } | E::Asymmetric { .. } | E::InvalidEdge { .. } => Failure::Input(e.to_string()),
            _ => Failure::Domain(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Domain(format!("write failed: {e}"))
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn read_input(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn with_context<T>(path: &Path, r: jdm_core::Result<T>) -> CliResult<T> {
    r.map_err(|e| match Failure::from(e) {
        Failure::Input(m) => Failure::Input(format!("{}: {m}", path.display())),
        d => d,
    })
}

fn load_jdm(path: &Path) -> CliResult<Jdm> {
    with_context(path, parse_jdm(&read_input(path)?))
}

fn output(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(fs::File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn require_graphical(j: &Jdm) -> CliResult<()> {
    check_jdm(j).map_err(|v| Failure::Domain(format!("not graphical: {v}")))
}

fn check(path: &Path) -> CliResult<()> {
    let j = load_jdm(path)?;
    let verdict = check_jdm(&j);
    let mut out = io::stdout().lock();
    match degree_classes(&j) {
        Ok(part) => {
            let sizes: Vec<String> = part
                .degrees_ascending()
                .iter()
                .map(|&a| format!("{a}:{}", part.class_size(a)))
                .collect();
            writeln!(out, "N {}", part.total_nodes())?;
            writeln!(out, "M {}", part.total_edges())?;
            writeln!(out, "class sizes {}", sizes.join(" "))?;
        }
        Err(e) => writeln!(out, "{e}")?,
    }
    match verdict {
        Ok(()) => {
            writeln!(out, "graphical")?;
            Ok(())
        }
        Err(v) => {
            writeln!(out, "not graphical: {v}")?;
            Err(Failure::Domain(String::new()))
        }
    }
}

fn sample(jdm: &Path, run: &RunArgs, per: u64, spectra: Option<&Path>, jobs: Option<usize>) -> CliResult<()> {
    let j = load_jdm(jdm)?;
    require_graphical(&j)?;
    let cfg = EnsembleConfig {
        seed: run.seed(),
        n_spectra: run.n_spectra,
        samples_per_spectra: per,
    };
    let mut out = output(run.out.as_deref())?;
    let mut emit = |batch: Vec<jdm_core::WeightedSample>| -> jdm_core::Result<()> {
        for s in &batch {
            write_sample(&mut out, s).map_err(|e| jdm_core::Error::Internal(format!("write failed: {e}")))?;
        }
        Ok(())
    };
    match spectra {
        None => run_ensemble(&j, &cfg, jobs, emit)?,
        Some(path) => {
            let part = degree_classes(&j)?;
            for rec in with_context(path, parse_spectra(&read_input(path)?))? {
                rec.matrix.check_consistency(&j, &part)?;
                emit(graph_batch(&j, &part, &cfg, rec.id, &rec.matrix, rec.log_weight)?)?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn spectra(jdm: &Path, run: &RunArgs) -> CliResult<()> {
    let j = load_jdm(jdm)?;
    require_graphical(&j)?;
    let part = degree_classes(&j)?;
    let seed = run.seed();
    let mut out = output(run.out.as_deref())?;
    for id in 0..run.n_spectra {
        let mut rng = derive_stream(seed, StreamDomain::Spectra, id);
        let s = sample_spectra_with(&j, &part, &mut RngChooser(&mut rng))?;
        let rec = SpectraRecord {
            id,
            log_weight: s.log_weight,
            matrix: s.matrix,
        };
        out.write_all(format_spectra(&rec).as_bytes())?;
    }
    out.flush()?;
    Ok(())
}

fn estimate(
    path: &Path,
    observable: Observable,
    max_cycle_len: usize,
    histogram: Option<&Path>,
    bins: usize,
    out: Option<&Path>,
) -> CliResult<()> {
    if observable == Observable::Cycles && !(3..=jdm_core::estimate::MAX_CYCLE_LEN).contains(&max_cycle_len) {
        return Err(Failure::Input(format!(
            "--max-cycle-len must lie in 3..={}",
            jdm_core::estimate::MAX_CYCLE_LEN
        )));
    }
    let file = fs::File::open(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let mut est = EnsembleEstimator::default();
    let mut weights = ObservableSeries::default();
    for s in read_samples(BufReader::new(file)) {
        let s = with_context(path, s)?;
        let values = match observable {
            Observable::Clustering => clustering_by_degree(&s.graph),
            Observable::Cycles => cycle_counts(&s.graph, max_cycle_len)?
                .into_iter()
                .map(|(l, c)| (l, c as f64))
                .collect(),
        };
        est.add(s.spectra_id, s.spectra_log_weight, s.log_weight, &values);
        weights.push(0.0, s.log_weight);
    }
    if weights.is_empty() {
        return Err(Failure::Domain(format!("{}: no samples", path.display())));
    }
    let estimates = est.estimates()?;
    let key = match observable {
        Observable::Clustering => "degree",
        Observable::Cycles => "length",
    };
    let mut w = output(out)?;
    let first = estimates.values().next().expect("non-empty");
    writeln!(w, "# samples {} spectra {}", first.samples, first.spectra)?;
    writeln!(
        w,
        "# {key} weighted unweighted product_weighted effective_sample_size spectra_effective_size"
    )?;
    for (k, e) in &estimates {
        writeln!(
            w,
            "{k} {} {} {} {:.3} {:.3}",
            e.weighted, e.unweighted, e.product_weighted, e.effective_sample_size, e.spectra_effective_size
        )?;
    }
    w.flush()?;
    if let Some(hpath) = histogram {
        let h = log_weight_histogram(&weights, bins)?;
        let mut hw = output(Some(hpath))?;
        writeln!(hw, "# log_weight mean {} variance {}", h.mean, h.variance)?;
        writeln!(hw, "# bin_start bin_end count")?;
        for (i, c) in h.counts.iter().enumerate() {
            let lo = h.min + i as f64 * h.bin_width();
            writeln!(hw, "{lo} {} {c}", lo + h.bin_width())?;
        }
        hw.flush()?;
    }
    Ok(())
}

fn extract(path: &Path, out: Option<&Path>) -> CliResult<()> {
    let g = with_context(path, parse_edge_list(&read_input(path)?))?;
    let mut w = output(out)?;
    w.write_all(format_jdm(&extract_jdm(&g)).as_bytes())?;
    w.flush()?;
    Ok(())
}

fn enumerate(path: &Path, limit_n: usize, out: Option<&Path>) -> CliResult<()> {
    let j = load_jdm(path)?;
    require_graphical(&j)?;
    let catalog = enumerate_realizations(&j, limit_n)?;
    let mut w = output(out)?;
    w.write_all(catalog.to_text().as_bytes())?;
    w.flush()?;
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    match &cli.command {
        Command::Check { jdm } => check(jdm),
        Command::Sample {
            jdm,
            run,
            samples_per_spectra,
            spectra,
            jobs,
        } => sample(jdm, run, *samples_per_spectra, spectra.as_deref(), *jobs),
        Command::Spectra { jdm, run } => spectra(jdm, run),
        Command::Estimate {
            samples,
            observable,
            max_cycle_len,
            histogram,
            bins,
            out,
        } => estimate(samples, *observable, *max_cycle_len, histogram.as_deref(), *bins as usize, out.as_deref()),
        Command::Extract { edges, out } => extract(edges, out.as_deref()),
        Command::Enumerate { jdm, limit_n, out } => enumerate(jdm, *limit_n, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Domain(m)) => {
            if !m.is_empty() {
                eprintln!("error: {m}");
            }
            ExitCode::from(1)
        }
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
