use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;

use constrained_crb::analysis::config::{self, ScanConfig};
use constrained_crb::analysis::{error_curve, report, resolution, scatter};
use constrained_crb::error::{Error, Result};

#[derive(Parser)]
#[command(version, about = "Error bounds for constrained Poisson imaging problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON configuration of the command
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the seed of the configuration
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Split large parameter vectors into overlapping windows
    #[arg(long, global = true)]
    windowed: bool,
}

#[derive(Subcommand)]
enum Command {
    /// One-parameter bounds against Monte Carlo errors
    ErrorCurve,
    /// Two-parameter sampled estimates and half-mass ellipses
    #[command(name = "scatter-2d")]
    Scatter2d,
    /// Total variance against pixel width
    ResolutionScan,
    /// Information matrices at a single point
    FimReport,
    /// Half-mass ellipse of a 2x2 kernel
    Ellipse,
}

fn load_or<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    path.map_or_else(|| Ok(T::default()), config::load)
}

fn run(cli: &Cli) -> Result<Vec<PathBuf>> {
    let path = cli.config.as_deref();
    match cli.command {
        Command::ErrorCurve => {
            let mut cfg: config::ErrorCurveConfig = load_or(path)?;
            cfg.seed = cli.seed.unwrap_or(cfg.seed);
            error_curve::compute(&cfg)?.write(&cli.out)
        }
        Command::Scatter2d => {
            let mut cfg: config::Scatter2dConfig = load_or(path)?;
            cfg.seed = cli.seed.unwrap_or(cfg.seed);
            scatter::compute(&cfg)?.write(&cli.out)
        }
        Command::ResolutionScan => {
            let path = path.ok_or_else(|| Error::Config("resolution-scan needs --config".into()))?;
            let mut cfg: ScanConfig = config::load(path)?;
            cfg.seed = cli.seed.unwrap_or(cfg.seed);
            resolution::compute(&cfg, cli.windowed)?.write(&cli.out)
        }
        Command::FimReport => report::fim_report(&load_or(path)?)?.write(&cli.out),
        Command::Ellipse => report::write_ellipse(&report::ellipse(&load_or(path)?)?, &cli.out),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Some(k) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    }
    match run(&cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cli(args: &[&str]) -> Cli {
        Cli::parse_from(std::iter::once("constrained-crb").chain(args.iter().copied()))
    }

    fn write(dir: &Path, name: &str, text: &str) -> String {
        let p = dir.join(name);
        std::fs::write(&p, text).unwrap();
        p.display().to_string()
    }

    #[test]
    fn error_curve_is_byte_identical_on_rerun() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write(
            dir.path(),
            "c.json",
            r#"{"model": {"variant": "Uniform1", "params": {"N": 200, "eta": 0.7, "n": 2}},
                "grid": {"start": 0, "stop": 1, "points": 5}, "samples": 200}"#,
        );
        let out = dir.path().join("o").display().to_string();
        let args = ["error-curve", "--config", &cfg, "--out", &out, "--seed", "9"];
        run(&cli(&args)).unwrap();
        let csv = dir.path().join("o/error_curve.csv");
        let first = std::fs::read(&csv).unwrap();
        run(&cli(&args)).unwrap();
        assert_eq!(first, std::fs::read(&csv).unwrap());
        let svg = std::fs::read_to_string(dir.path().join("o/error_curve.svg")).unwrap();
        assert!(svg.contains("version=\"1.1\""));
        let json: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("o/error_curve.json")).unwrap()).unwrap();
        assert_eq!(json["seed"], 9);
    }

    #[test]
    fn every_verb_writes_its_files() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().display().to_string();
        let ell = write(dir.path(), "e.json", r#"{"kernel": [[2, 0], [0, 1]], "center": [0, 0]}"#);
        let scan = write(
            dir.path(),
            "s.json",
            r#"{"model": {"variant": "SlitArray", "params": {"N": 10000, "M": 3, "d": 0.5}},
                "grid": [0.5, 0.8], "object": [1, 0, 1]}"#,
        );
        let scatter = write(
            dir.path(),
            "p.json",
            r#"{"model": {"variant": "TwoPixel", "params": {"N": 1000, "eta": 0.7, "h0": 1, "h1": 0.8}},
                "cases": [{"theta": [0.5, 0.5], "N": 1000}], "samples": 5}"#,
        );
        let runs: [(&[&str], &[&str]); 5] = [
            (&["fim-report"], &["fim_report.json"]),
            (&["ellipse", "--config", &ell], &["ellipse.json", "ellipse.svg"]),
            (
                &["resolution-scan", "--config", &scan, "--windowed"],
                &["resolution_scan.csv", "resolution_scan.json", "resolution_scan.svg"],
            ),
            (&["scatter-2d", "--config", &scatter], &["scatter_2d.json", "scatter_2d_case0.csv", "scatter_2d_case0.svg"]),
            (&["ellipse"], &["ellipse.json"]),
        ];
        for (args, files) in runs {
            let mut a = args.to_vec();
            a.extend(["--out", &out]);
            let written = run(&cli(&a)).unwrap();
            for f in files {
                assert!(written.contains(&dir.path().join(f)), "{args:?} missing {f}");
            }
        }
        let csv = std::fs::read_to_string(dir.path().join("resolution_scan.csv")).unwrap();
        assert!(csv.starts_with("d/d_R,Δ²_std,Δ²_corr,Δ²_Var_mc,Δ²_MSE_mc\n"));
        assert!(csv.lines().nth(1).unwrap().contains(",inf,"));
    }

    #[test]
    fn bad_input_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().display().to_string();
        assert!(matches!(run(&cli(&["resolution-scan", "--out", &out])), Err(Error::Config(_))));
        let bad = write(dir.path(), "b.json", r#"{"kernel": [[1, 0], [0, 0]], "center": [0, 0]}"#);
        assert!(matches!(
            run(&cli(&["ellipse", "--config", &bad, "--out", &out])),
            Err(Error::SingularKernel { .. })
        ));
        let broken = write(dir.path(), "x.json", "{");
        assert!(matches!(run(&cli(&["fim-report", "--config", &broken])), Err(Error::Config(_))));
    }
}
