//! Command-line configuration: flag parsing and validation.

use std::path::PathBuf;

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Construct,
    Verify,
    Scan,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

/// Parsed run configuration. `alpha` is entered in turns (fractions of a full
/// revolution) so unimodularity is exact by construction.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub phi: String,
    pub alpha_turns: f64,
    pub nodes: usize,
    pub radial_schedule: Vec<f64>,
    pub format: OutputFormat,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub alpha_grid: usize,
    pub maxdeg: usize,
}

pub const USAGE: &str = "usage:
  clark construct --phi <catalog|file.json> --alpha <turns> [--nodes N] [--out DIR] [--format json|csv] [--seed S]
  clark verify    --phi <catalog|file.json> --alpha <turns> [--nodes N] [--alpha-grid M] [--out DIR] [--seed S]
  clark scan      --phi <catalog|file.json> --grid M [--maxdeg D] [--nodes N] [--out DIR] [--format json|csv] [--seed S]

catalog maps: coordinate, product, rational_example, halfsum
  --alpha      unimodular parameter as a fraction of a turn (0.25 means e^{i pi/2})
  --nodes      quadrature nodes per dimension, a power of two >= 64 (default 256)
  --radii      comma-separated radial schedule inside (0,1) for weak-* integration
  --alpha-grid parameter grid for the disintegration check (default 64)
  --grid       scan grid size, at most 256
  --maxdeg     top degree of the density scan (default 8, at most 16)
  --out        output directory (default CLARK_OUTPUT_DIR or '.')
  --seed       seed for the random evaluation panels (default 0)";

pub fn parse_args(args: &[String]) -> Result<RunConfig, String> {
    let mut iter = args.iter();
    let command = match iter.next().map(|s| s.as_str()) {
        Some("construct") => Command::Construct,
        Some("verify") => Command::Verify,
        Some("scan") => Command::Scan,
        Some("--help") | Some("-h") | Some("help") => return Err(String::new()),
        Some(other) => return Err(format!("unknown command: {other}")),
        None => return Err(String::from("missing command")),
    };

    let mut phi: Option<String> = None;
    let mut alpha_turns: Option<f64> = None;
    let mut nodes = 256usize;
    let mut radial_schedule: Vec<f64> = (4..=7).map(|j| 1.0 - 0.5f64.powi(j)).collect();
    let mut format = match command {
        Command::Scan => OutputFormat::Csv,
        _ => OutputFormat::Json,
    };
    let mut out_dir: Option<PathBuf> = None;
    let mut seed = 0u64;
    let mut alpha_grid = 64usize;
    let mut maxdeg = 8usize;
    let mut grid: Option<usize> = None;

    while let Some(flag) = iter.next() {
        let mut take = || -> Result<&String, String> {
            iter.next().ok_or_else(|| format!("flag {flag} needs a value"))
        };
        match flag.as_str() {
            "--phi" => phi = Some(take()?.clone()),
            "--alpha" => {
                alpha_turns = Some(
                    take()?
                        .parse()
                        .map_err(|_| String::from("--alpha expects a real number of turns"))?,
                )
            }
            "--nodes" => {
                nodes = take()?
                    .parse()
                    .map_err(|_| String::from("--nodes expects an integer"))?
            }
            "--radii" => {
                radial_schedule = take()?
                    .split(',')
                    .map(|tok| {
                        tok.trim()
                            .parse::<f64>()
                            .map_err(|_| format!("bad radius: {tok}"))
                    })
                    .collect::<Result<_, _>>()?
            }
            "--format" => {
                format = match take()?.as_str() {
                    "json" => OutputFormat::Json,
                    "csv" => OutputFormat::Csv,
                    other => return Err(format!("unknown format: {other}")),
                }
            }
            "--out" => out_dir = Some(PathBuf::from(take()?)),
            "--seed" => {
                seed = take()?
                    .parse()
                    .map_err(|_| String::from("--seed expects an integer"))?
            }
            "--alpha-grid" => {
                alpha_grid = take()?
                    .parse()
                    .map_err(|_| String::from("--alpha-grid expects an integer"))?
            }
            "--maxdeg" => {
                maxdeg = take()?
                    .parse()
                    .map_err(|_| String::from("--maxdeg expects an integer"))?
            }
            "--grid" => {
                grid = Some(
                    take()?
                        .parse()
                        .map_err(|_| String::from("--grid expects an integer"))?,
                )
            }
            other => return Err(format!("unknown flag: {other}")),
        }
    }

    let phi = phi.ok_or_else(|| String::from("--phi is required"))?;
    if !nodes.is_power_of_two() || nodes < 64 {
        return Err(String::from("--nodes must be a power of two, at least 64"));
    }
    if radial_schedule.is_empty()
        || radial_schedule.windows(2).any(|w| w[1] <= w[0])
        || radial_schedule.iter().any(|&r| r <= 0.0 || r >= 1.0)
    {
        return Err(String::from(
            "--radii must increase strictly inside (0, 1)",
        ));
    }
    if maxdeg > 16 {
        return Err(String::from("--maxdeg is capped at 16"));
    }
    let alpha_turns = match command {
        Command::Scan => alpha_turns.unwrap_or(0.0),
        _ => alpha_turns.ok_or_else(|| String::from("--alpha is required"))?,
    };
    let alpha_grid_final = match command {
        Command::Scan => {
            let g = grid.ok_or_else(|| String::from("--grid is required for scan"))?;
            if !(2..=256).contains(&g) {
                return Err(String::from("--grid must lie in 2..=256"));
            }
            g
        }
        _ => alpha_grid.max(64),
    };
    let out_dir = out_dir
        .or_else(|| std::env::var_os("CLARK_OUTPUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));

    Ok(RunConfig {
        command,
        phi,
        alpha_turns,
        nodes,
        radial_schedule,
        format,
        out_dir,
        seed,
        alpha_grid: alpha_grid_final,
        maxdeg,
    })
}
