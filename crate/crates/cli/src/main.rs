use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use planar_mobiles::bdfg::MapSampler;
use planar_mobiles::enumerate::{all_degrees, check_bijection};
use planar_mobiles::exec::ExecMode;
use planar_mobiles::experiment::{limit_estimate, run_quenched_experiment, QuenchedConfig};
use planar_mobiles::limit::LimitModel;
use planar_mobiles::mobile::Conditioning;
use planar_mobiles::rng::stream;
use planar_mobiles::weights::{classify, Status};
use planar_mobiles::{Error, RootKind, WeightModel, WeightSeq};
use serde_json::json;

#[derive(Parser, Debug)]
#[command(name = "pmaps", version, about = "Random planar maps through mobiles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SampleFormat {
    MapText,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TableFormat {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the admissibility system and report criticality.
    Solve {
        /// Weight sequence as inline JSON or a path to a JSON file.
        #[arg(long)]
        model: String,
        /// Override the vertex weight of a geometric model.
        #[arg(long)]
        t: Option<f64>,
    },
    /// Sample maps conditioned on their size.
    Sample {
        #[arg(long)]
        model: String,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long, default_value = "edges")]
        condition: Conditioning,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value = "map-text")]
        format: SampleFormat,
    },
    /// Estimate the law of a ball of the limiting map.
    LimitBall {
        #[arg(long)]
        model: String,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long, default_value = "vertex")]
        kind: RootKind,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1000)]
        count: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 10_000_000)]
        budget: u64,
        #[arg(long, value_enum, default_value = "csv")]
        format: TableFormat,
        #[arg(long)]
        sequential: bool,
    },
    /// Run a quenched convergence experiment from a JSON config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the mobile bijection on all maps with a few edges.
    Enumerate {
        #[arg(long)]
        edges: usize,
    },
}

fn load_model(spec: &str, t: Option<f64>) -> Result<WeightSeq, Error> {
    let text = if spec.trim_start().starts_with('{') {
        spec.to_string()
    } else {
        std::fs::read_to_string(spec).map_err(|e| Error::Io(format!("{spec}: {e}")))?
    };
    let mut seq = WeightSeq::from_json(&text)?;
    if let Some(t) = t {
        match &mut seq {
            WeightSeq::Geometric { t: old, .. } | WeightSeq::CriticalGeometric { t: old } => *old = t,
            WeightSeq::Finite { .. } => return Err(Error::InvalidConfig("--t needs a geometric model".into())),
        }
    }
    Ok(seq)
}

fn run(cmd: Command) -> Result<(), Error> {
    match cmd {
        Command::Solve { model, t } => {
            let seq = load_model(&model, t)?;
            let report = classify(&seq)?;
            match report.solution {
                Some(s) => {
                    println!("x={}", s.x);
                    println!("y={}", s.y);
                    let coarse = if s.status.is_critical() { "critical" } else { s.status.as_str() };
                    println!("status={coarse}");
                    println!("regular_critical={}", s.status == Status::RegularCritical);
                    println!("spectral_radius={}", s.spectral_radius);
                    println!("residual_bullet={:e}", s.residual_bullet);
                    println!("residual_diamond={:e}", s.residual_diamond);
                    println!("crit_residual={:e}", s.crit_residual);
                }
                None => println!("status={}", report.status.as_str()),
            }
        }
        Command::Sample { model, t, condition, n, count, seed, format } => {
            let seq = load_model(&model, t)?;
            let wm = WeightModel::new(&seq)?;
            let sampler = MapSampler::new(&wm, condition)?;
            for i in 0..count {
                let s = sampler.sample(n, &mut stream(seed, "sample", i as u64))?;
                match format {
                    SampleFormat::MapText => println!("{}", s.map),
                    SampleFormat::Json => println!(
                        "{}",
                        json!({
                            "index": i,
                            "vertices": s.map.vertex_count(),
                            "edges": s.map.edge_count(),
                            "faces": s.map.face_count(),
                            "map": s.map.to_string(),
                            "mobile": s.mobile.to_text(),
                        })
                    ),
                }
            }
        }
        Command::LimitBall { model, t, kind, k, count, seed, budget, format, sequential } => {
            let seq = load_model(&model, t)?;
            let wm = WeightModel::critical(&seq)?;
            let lm = LimitModel::new(&wm)?;
            let mode = if sequential { ExecMode::Sequential } else { ExecMode::Parallel };
            let est = limit_estimate(&lm, kind, k, count, seed, budget, mode)?;
            match format {
                TableFormat::Csv => {
                    println!("code,freq,se");
                    for (c, f) in &est.codes {
                        println!("{c},{},{}", f.freq, f.se);
                    }
                    if est.unresolved.freq > 0.0 {
                        println!("unresolved,{},{}", est.unresolved.freq, est.unresolved.se);
                    }
                }
                TableFormat::Json => {
                    println!("{}", serde_json::to_string(&est).map_err(|e| Error::Io(e.to_string()))?);
                }
            }
        }
        Command::Experiment { config, out } => {
            let text = std::fs::read_to_string(&config).map_err(|e| Error::Io(format!("{}: {e}", config.display())))?;
            let cfg: QuenchedConfig =
                serde_json::from_str(&text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
            cfg.validate()?;
            let report = run_quenched_experiment(&cfg)?;
            std::fs::create_dir_all(&out).map_err(|e| Error::Io(e.to_string()))?;
            let body = serde_json::to_string_pretty(&report).map_err(|e| Error::Io(e.to_string()))?;
            std::fs::write(out.join("report.json"), body).map_err(|e| Error::Io(e.to_string()))?;
            std::fs::write(out.join("summary.csv"), report.to_csv()).map_err(|e| Error::Io(e.to_string()))?;
            for c in &report.concentration {
                println!("n={} mean_top20_sd={} mean_l1={}", c.n, c.mean_top_sd(20), c.mean_l1);
            }
        }
        Command::Enumerate { edges } => {
            if edges == 0 || edges > 4 {
                return Err(Error::InvalidConfig("--edges must be between 1 and 4".into()));
            }
            let c = check_bijection(edges, &all_degrees())?;
            // each mobile rooted at type 1 encodes two maps, one per root orientation
            println!("mobiles: {}", c.encoded_maps);
            println!("labelled trees: {}", c.mobiles);
            println!("pointed rooted maps: {}", c.pointed_rooted_maps);
            if c.ok() {
                println!("bijection: OK");
            } else {
                println!("bijection: FAILED");
                return Err(Error::EmptyEvent("image of the mobiles differs from the enumerated maps".into()));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            if !e.use_stderr() {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprintln!("{}", json!({"error": "UsageError", "message": e.to_string().trim()}));
            return ExitCode::from(2);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", json!({"error": e.kind(), "message": e.to_string()}));
            ExitCode::from(1)
        }
    }
}
