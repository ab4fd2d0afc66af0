mod config;
mod raw;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use szpm::metrics::{format_comparison, verify_with_params, write_comparison_csv, ComparisonRow};
use szpm::synth::{generate, Generator, SyntheticSpec};
use szpm::{
    bit_accounting, code_histogram, compress, decompress, CompressedArtifact, CompressionParams,
    ErrorBound, FloatArray, Predictor, SizeBreakdown,
};

use crate::config::{parse_configs, DEFAULT_CONFIGS};
use crate::raw::{read_raw, write_raw};

#[derive(Parser)]
#[command(name = "szpm", version, about = "Error-bounded lossy compression of raw f32 arrays")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compress a raw little-endian f32 file.
    Compress {
        input: PathBuf,
        output: PathBuf,
        #[command(flatten)]
        codec: CodecArgs,
        #[arg(long, value_enum, default_value_t = Report::Text)]
        report: Report,
    },
    /// Restore a raw f32 file from an artifact.
    Decompress { input: PathBuf, output: PathBuf },
    /// Print the size breakdown of an artifact.
    Inspect {
        input: PathBuf,
        /// Also write the quantization-code histogram as CSV.
        #[arg(long)]
        histogram: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Report::Text)]
        report: Report,
    },
    /// Check a decompressed file against the original; exits non-zero on violation.
    Verify {
        original: PathBuf,
        decompressed: PathBuf,
        #[command(flatten)]
        codec: CodecArgs,
        #[arg(long, value_enum, default_value_t = Report::Text)]
        report: Report,
    },
    /// Write a synthetic array.
    Gen {
        #[arg(value_enum)]
        kind: GenKind,
        output: PathBuf,
        #[arg(long, default_value_t = 1 << 20)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long)]
        pattern_len: Option<usize>,
        #[arg(long)]
        repeat_prob: Option<f64>,
        #[arg(long)]
        noise_sigma: Option<f64>,
        #[arg(long)]
        spread: Option<f64>,
    },
    /// Compress one file under several configurations and tabulate the results.
    Compare {
        input: PathBuf,
        /// Comma-separated list such as "sz(8),sz-pm(8)".
        #[arg(long, default_value = DEFAULT_CONFIGS)]
        configs: String,
        #[command(flatten)]
        codec: CodecArgs,
        #[arg(long, value_enum, default_value_t = Report::Text)]
        report: Report,
    },
}

#[derive(Args, Clone)]
struct CodecArgs {
    #[arg(long, default_value = "sz-pm", value_parser = parse_predictor)]
    predictor: Predictor,
    /// Error bound relative to the value range.
    #[arg(long, conflicts_with = "eb_abs")]
    eb_rel: Option<f64>,
    /// Absolute error bound.
    #[arg(long)]
    eb_abs: Option<f64>,
    #[arg(long, default_value_t = 511)]
    intervals: u32,
    /// Search buffer size.
    #[arg(long, default_value_t = 1024)]
    m: usize,
    /// Look-ahead / sort segment size.
    #[arg(long, default_value_t = 8)]
    n: usize,
    /// Lp exponent.
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    /// Match threshold (default: m / 2).
    #[arg(long)]
    theta: Option<f64>,
    /// Wrap the artifact body in LZ77.
    #[arg(long)]
    final_lz77: bool,
}

impl CodecArgs {
    fn params(&self) -> CompressionParams {
        let bound = match (self.eb_abs, self.eb_rel) {
            (Some(a), _) => ErrorBound::absolute(a),
            (None, Some(r)) => ErrorBound::relative(r),
            (None, None) => ErrorBound::relative(1e-4),
        };
        let mut p = CompressionParams::default()
            .with_predictor(self.predictor)
            .with_error_bound(bound)
            .with_intervals(self.intervals)
            .with_m(self.m)
            .with_n(self.n)
            .with_p(self.p)
            .with_final_lz77(self.final_lz77);
        if let Some(t) = self.theta {
            p = p.with_theta(t);
        }
        p
    }
}

fn parse_predictor(s: &str) -> Result<Predictor, String> {
    match s {
        "sz-lv" | "sz-sort" | "sz-pm" => s.parse().map_err(|e: szpm::SzError| e.to_string()),
        _ => Err("expected one of sz-lv, sz-sort, sz-pm".into()),
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Report {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Gaussian,
    Mixture,
    Planted,
}

fn load_array(path: &Path) -> Result<FloatArray> {
    Ok(FloatArray::new(read_raw(path)?).with_context(|| format!("in {}", path.display()))?)
}

fn load_artifact(path: &Path) -> Result<CompressedArtifact> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(CompressedArtifact::from_bytes(&bytes).with_context(|| format!("in {}", path.display()))?)
}

fn print_breakdown(label: &str, b: &SizeBreakdown, report: Report) -> Result<()> {
    match report {
        Report::Text => println!("{b}"),
        Report::Json => println!("{}", b.to_json()?),
        Report::Csv => {
            let row = ComparisonRow {
                label: label.to_string(),
                breakdown: b.clone(),
            };
            write_comparison_csv(&[row], std::io::stdout().lock())?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Compress {
            input,
            output,
            codec,
            report,
        } => {
            let data = load_array(&input)?;
            let artifact = compress(&data, &codec.params())?;
            std::fs::write(&output, artifact.to_bytes())
                .with_context(|| format!("writing {}", output.display()))?;
            print_breakdown(codec.predictor.name(), &bit_accounting(&artifact), report)?;
        }
        Command::Decompress { input, output } => {
            let artifact = load_artifact(&input)?;
            let values = decompress(&artifact)?;
            write_raw(&output, values.as_slice())?;
        }
        Command::Inspect {
            input,
            histogram,
            report,
        } => {
            let artifact = load_artifact(&input)?;
            if let Some(path) = histogram {
                let file = std::fs::File::create(&path)
                    .with_context(|| format!("creating {}", path.display()))?;
                code_histogram(&artifact)?.write_csv(std::io::BufWriter::new(file))?;
            }
            let label = artifact.params().predictor.name();
            print_breakdown(label, &bit_accounting(&artifact), report)?;
        }
        Command::Verify {
            original,
            decompressed,
            codec,
            report,
        } => {
            let orig = load_array(&original)?;
            let dec = read_raw(&decompressed)?;
            let r = verify_with_params(&orig, &dec, &codec.params())?;
            match report {
                Report::Json => println!("{}", serde_json::to_string_pretty(&r)?),
                Report::Csv => {
                    println!("pass,max_abs_error,max_error_index,violations,bound");
                    println!(
                        "{},{},{},{},{}",
                        r.pass,
                        r.max_abs_error,
                        r.max_error_index.map_or(String::new(), |i| i.to_string()),
                        r.violations,
                        r.bound
                    );
                }
                Report::Text => {
                    println!("{}", if r.pass { "pass" } else { "FAIL" });
                    println!("max abs error  {:e}", r.max_abs_error);
                    if let Some(i) = r.max_error_index {
                        println!("at index       {i}");
                    }
                    println!("bound          {:e}", r.bound);
                    if let Some(i) = r.first_violation {
                        println!("violations     {} (first at {i})", r.violations);
                    }
                }
            }
            if !r.pass {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Gen {
            kind,
            output,
            count,
            seed,
            mu,
            sigma,
            pattern_len,
            repeat_prob,
            noise_sigma,
            spread,
        } => {
            let generator = match kind {
                GenKind::Gaussian => Generator::Gaussian {
                    mu: mu.unwrap_or(0.0),
                    sigma: sigma.unwrap_or(100.0),
                },
                GenKind::Mixture => Generator::mixture(),
                GenKind::Planted => {
                    let Generator::PlantedPatterns {
                        pattern_len: l,
                        repeat_prob: r,
                        noise_sigma: s,
                        spread: w,
                    } = Generator::planted()
                    else {
                        unreachable!()
                    };
                    Generator::PlantedPatterns {
                        pattern_len: pattern_len.unwrap_or(l),
                        repeat_prob: repeat_prob.unwrap_or(r),
                        noise_sigma: noise_sigma.unwrap_or(s),
                        spread: spread.unwrap_or(w),
                    }
                }
            };
            let values = generate(&SyntheticSpec::new(count, generator, seed))?;
            write_raw(&output, &values)?;
            println!("wrote {count} values to {}", output.display());
        }
        Command::Compare {
            input,
            configs,
            codec,
            report,
        } => {
            let data = load_array(&input)?;
            let mut rows = Vec::new();
            let mut failures = Vec::new();
            for cfg in parse_configs(&configs)? {
                let mut args = codec.clone();
                args.predictor = cfg.predictor;
                if let Some(n) = cfg.n {
                    args.n = n;
                }
                match compress(&data, &args.params()) {
                    Ok(a) => rows.push(ComparisonRow {
                        label: cfg.label,
                        breakdown: bit_accounting(&a),
                    }),
                    Err(e) => failures.push((cfg.label, e.to_string())),
                }
            }
            match report {
                Report::Text => {
                    print!("{}", format_comparison(&rows));
                    for (label, e) in &failures {
                        println!("{label:<12} error: {e}");
                    }
                }
                Report::Csv => {
                    write_comparison_csv(&rows, std::io::stdout().lock())?;
                    for (label, e) in &failures {
                        eprintln!("{label}: {e}");
                    }
                }
                Report::Json => {
                    let errors: Vec<_> = failures
                        .iter()
                        .map(|(label, e)| json!({ "label": label, "error": e }))
                        .collect();
                    let out = json!({ "rows": rows, "errors": errors });
                    println!("{}", serde_json::to_string_pretty(&out)?);
                }
            }
            std::io::stdout().flush()?;
            if !failures.is_empty() {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
