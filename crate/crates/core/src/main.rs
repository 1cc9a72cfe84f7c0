//! Command-line surface for the deformation-space toolkit.
//!
//! Exit codes: 0 pass, 1 verification failure, 2 input error, 3 resource cap.

use clap::{Args, Parser, Subcommand};
use spinelab::config::{parse_factors, OutputFormat};
use spinelab::gog::{self, GogError};
use spinelab::io;
use spinelab::metrics::{self, SubgroupSpec};
use spinelab::spine::{self, Distance};
use spinelab::verify;
use spinelab::words::Word;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_OK: u8 = 0;
const EXIT_VERIFY: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_RESOURCE: u8 = 3;

#[derive(Parser)]
#[command(name = "spinelab", version, about = "deformation-space toolkit for free products of finite groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Factor spec: comma-separated C<k>/S<k> tokens, or a JSON file path.
    #[arg(long, default_value = "C2,C2,C2,C2")]
    factors: String,
    /// Spine exploration radius.
    #[arg(long, default_value_t = 6)]
    radius: u32,
    /// Maximum number of spine vertices to explore.
    #[arg(long, default_value_t = 200_000)]
    max_vertices: usize,
    /// Distance search cap.
    #[arg(long, default_value_t = 12)]
    cap: u32,
    /// RNG seed for sampled computations.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output format: json, dot or csv.
    #[arg(long, default_value = "json")]
    format: String,
    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// BFS ball of the spine around the basepoint (or a marking file).
    Explore {
        #[command(flatten)]
        common: Common,
        /// Optional marking JSON to start from.
        #[arg(long)]
        marking: Option<PathBuf>,
    },
    /// Exact spine distance between two markings.
    Distance {
        #[command(flatten)]
        common: Common,
        marking_a: PathBuf,
        marking_b: PathBuf,
    },
    /// Apply an automorphism file to a marking file.
    Act {
        #[command(flatten)]
        common: Common,
        auto: PathBuf,
        marking: PathBuf,
    },
    /// Retract a marking onto a pair subcomplex or the four-factor one.
    Retract {
        #[command(flatten)]
        common: Common,
        marking: PathBuf,
        /// Pair "i,j" (1-based) for the pair retraction.
        #[arg(long)]
        pair: Option<String>,
        /// Use the four-factor retraction (n = 4).
        #[arg(long)]
        m4: bool,
    },
    /// Distortion experiment for a named subgroup.
    Distortion {
        #[command(flatten)]
        common: Common,
        /// Subgroup selector: H12, N12-N34 or M12M34.
        #[arg(long)]
        subgroup: String,
        #[arg(long, default_value_t = 2)]
        max_len: usize,
    },
    /// Classification tags of a marking.
    Classify {
        #[command(flatten)]
        common: Common,
        marking: PathBuf,
    },
    /// Constructive path between two type-X markings.
    XyPath {
        #[command(flatten)]
        common: Common,
        marking_a: PathBuf,
        marking_b: PathBuf,
        /// Witness automorphism JSON carrying A to B.
        #[arg(long)]
        witness: PathBuf,
    },
    /// Recover the automorphism carrying the basepoint to a marking at
    /// spine distance 2.
    RecoverAuto {
        #[command(flatten)]
        common: Common,
        marking: PathBuf,
    },
    /// Replay the verification suites.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Suite name or "all".
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Bounded move search certifying a marking file (semi-decision).
    VerifyMarking {
        #[command(flatten)]
        common: Common,
        marking: PathBuf,
        #[arg(long, default_value_t = 8)]
        bound: u32,
    },
}

fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn emit(common: &Common, text: &str) -> Result<(), String> {
    match &common.out {
        Some(path) => std::fs::write(path, text).map_err(|e| e.to_string()),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    match s {
        "json" => Ok(OutputFormat::Json),
        "dot" => Ok(OutputFormat::Dot),
        "csv" => Ok(OutputFormat::Csv),
        other => Err(format!("unknown format {other:?}")),
    }
}

fn classify_exit(e: &GogError) -> u8 {
    match e {
        GogError::MaxEdgesReached => EXIT_RESOURCE,
        _ => EXIT_INPUT,
    }
}

fn run() -> Result<u8, (u8, String)> {
    let cli = Cli::parse();
    match cli.command {
        Command::Explore { common, marking } => {
            let sys = parse_factors(&common.factors).map_err(|e| (EXIT_INPUT, e.to_string()))?;
            let base = match &marking {
                Some(p) => {
                    let j: io::MarkingJson = read_json(p).map_err(|e| (EXIT_INPUT, e))?;
                    io::marking_from_json(&sys, &j).map_err(|e| (EXIT_INPUT, e.to_string()))?
                }
                None => gog::basepoint_star(&sys),
            };
            let ball = spine::explore(&sys, &base, common.radius, common.max_vertices)
                .map_err(|e| (classify_exit(&e), e.to_string()))?;
            let fmt = parse_format(&common.format).map_err(|e| (EXIT_INPUT, e))?;
            let text = match fmt {
                OutputFormat::Dot => io::spine_ball_to_dot(&sys, &ball),
                _ => serde_json::to_string_pretty(&io::spine_ball_to_json(&sys, &ball))
                    .map_err(|e| (EXIT_INPUT, e.to_string()))?,
            };
            emit(&common, &text).map_err(|e| (EXIT_INPUT, e))?;
            Ok(if ball.truncated { EXIT_RESOURCE } else { EXIT_OK })
        }
        Command::Distance {
            common,
            marking_a,
            marking_b,
        } => {
            let sys = parse_factors(&common.factors).map_err(|e| (EXIT_INPUT, e.to_string()))?;
            let a = io::marking_from_json(&sys, &read_json(&marking_a).map_err(|e| (EXIT_INPUT, e))?)
                .map_err(|e| (EXIT_INPUT, e.to_string()))?;
            let b = io::marking_from_json(&sys, &read_json(&marking_b).map_err(|e| (EXIT_INPUT, e))?)
                .map_err(|e| (EXIT_INPUT, e.to_string()))?;
            match spine::spine_distance(&sys, &a, &b, common.cap)
                .map_err(|e| (classify_exit(&e), e.to_string()))?
            {
                Distance::Exact(d) => {
                    emit(&common, &d.to_string()).map_err(|e| (EXIT_INPUT, e))?;
                    Ok(EXIT_OK)
                }
                Distance::AboveCap => {
                    emit(&common, "above-cap").map_err(|e| (EXIT_INPUT, e))?;
                    Ok(EXIT_RESOURCE)
                }
            }
        }
        Command::Act {
            common,
            auto,
            marking,
        } => {
            let sys = parse_factors(&common.factors).map_err(|e| (EXIT_INPUT, e.to_string()))?;
            let f = io::auto_from_json(&sys, &read_json(&auto).map_err(|e| (EXIT_INPUT, e))?)
                .map_err(|e| (EXIT_INPUT, e.to_string()))?;
            let x = io::marking_from_json(&sys, &read_json(&marking).map_err(|e| (EXIT_INPUT, e))?)
                .map_err(|e| (EXIT_INPUT, e.to_string()))?;
            let y = spinelab::autos::act_on_gog(&sys, &f, &x)
                .map_err(|e| (EXIT_INPUT, e.to_string()))?;
            let fmt = parse_format(&common.format).map_err(|e| (EXIT_INPUT, e))?;
            let text = match fmt {
                OutputFormat::Dot => io::marking_to_dot(&sys, &y),
                _ => serde_json::to_string_pretty(&io::marking_to_json(&y))
                    .map_err(|e| (EXIT_INPUT, e.to_string()))?,
            };
            emit(&common, &text).map_err(|e| (EXIT_INPUT, e))?;
            Ok(EXIT_OK)
        }
        Command::Retract {
            common,
            marking,
            pair,
            m4,
        } => {
            let sys = parse_factors(&common.factors).map_err(|e| (EXIT_INPUT, e.to_string()))?;
            let x = io::marking_from_json(&sys, &read_json(&marking).map_err(|e| (EXIT_INPUT, e))?)
                .map_err(|e| (EXIT_INPUT, e.to_string()))?;
            let r = if m4 {
                metrics::retract_m4(&sys, &x).map_err(|e| (EXIT_RESOURCE, e.to_string()))?
            } else {
                let pair = pair.ok_or((EXIT_INPUT, "need --pair i,j or --m4".to_string()))?;
                let parts: Vec<usize> = pair
                    .split(',')
                    .map(|s| s.trim().parse::<usize>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| (EXIT_INPUT, e.to_string()))?;
                if parts.len() != 2 || parts.contains(&0) {
                    return Err((EXIT_INPUT, "pair must be two 1-based indices".into()));
                }
                metrics::retract_pair(&sys, &x, parts[0] - 1, parts[1] - 1)
                    .map_err(|e| (EXIT_RESOURCE, e.to_string()))?
            };
            let mut j = serde_json::to_value(io::marking_to_json(&r.result))
                .map_err(|e| (EXIT_INPUT, e.to_string()))?;
            if r.tie_broken {
                j["tie_broken"] = serde_json::Value::Bool(true);
            }
            emit(&common, &serde_json::to_string_pretty(&j).unwrap())
                .map_err(|e| (EXIT_INPUT, e))?;
            Ok(EXIT_OK)
        }
        Command::Distortion {
            common,
            subgroup,
            max_len,
        } => {
            let sys = parse_factors(&common.factors).map_err(|e| (EXIT_INPUT, e.to_string()))?;
            let spec = subgroup_by_name(&sys, &subgroup).ok_or((
                EXIT_INPUT,
                format!("unknown subgroup {subgroup:?}; use H12, N12-N34 or M12M34"),
            ))?;
            let rows = metrics::distortion_report(&sys, &spec, max_len, common.cap)
                .map_err(|e| (EXIT_RESOURCE, e.to_string()))?;
            emit(&common, &io::distortion_csv(&rows)).map_err(|e| (EXIT_INPUT, e))?;
            Ok(EXIT_OK)
        }
        Command::Classify { common, marking } => {
            let sys = parse_factors(&common.factors).map_err(|e| (EXIT_INPUT, e.to_string()))?;
            let x = io::marking_from_json(&sys, &read_json(&marking).map_err(|e| (EXIT_INPUT, e))?)
                .map_err(|e| (EXIT_INPUT, e.to_string()))?;
            let tags: Vec<String> = spine::classify(&sys, &x).iter().map(|t| t.to_string()).collect();
            emit(&common, &serde_json::to_string(&tags).unwrap()).map_err(|e| (EXIT_INPUT, e))?;
            Ok(EXIT_OK)
        }
        Command::XyPath {
            common,
            marking_a,
            marking_b,
            witness,
        } => {
            let sys = parse_factors(&common.factors).map_err(|e| (EXIT_INPUT, e.to_string()))?;
            let a = io::marking_from_json(&sys, &read_json(&marking_a).map_err(|e| (EXIT_INPUT, e))?)
                .map_err(|e| (EXIT_INPUT, e.to_string()))?;
            let b = io::marking_from_json(&sys, &read_json(&marking_b).map_err(|e| (EXIT_INPUT, e))?)
                .map_err(|e| (EXIT_INPUT, e.to_string()))?;
            let w = io::auto_from_json(&sys, &read_json(&witness).map_err(|e| (EXIT_INPUT, e))?)
                .map_err(|e| (EXIT_INPUT, e.to_string()))?;
            let path = spine::xy_path(&sys, &a, &b, Some(&w))
                .map_err(|e| (EXIT_VERIFY, e.to_string()))?;
            let out: Vec<io::MarkingJson> =
                path.iter().map(|sv| io::marking_to_json(&sv.rep)).collect();
            emit(&common, &serde_json::to_string_pretty(&out).unwrap())
                .map_err(|e| (EXIT_INPUT, e))?;
            Ok(EXIT_OK)
        }
        Command::RecoverAuto { common, marking } => {
            let sys = parse_factors(&common.factors).map_err(|e| (EXIT_INPUT, e.to_string()))?;
            let x = io::marking_from_json(&sys, &read_json(&marking).map_err(|e| (EXIT_INPUT, e))?)
                .map_err(|e| (EXIT_INPUT, e.to_string()))?;
            let base = gog::basepoint_star(&sys);
            match spine::recover_automorphism(&sys, &base, &x)
                .map_err(|e| (EXIT_VERIFY, e.to_string()))?
            {
                Some(phi) => {
                    emit(&common, &serde_json::to_string_pretty(&io::auto_to_json(&phi)).unwrap())
                        .map_err(|e| (EXIT_INPUT, e))?;
                    Ok(EXIT_OK)
                }
                None => {
                    emit(&common, "null").map_err(|e| (EXIT_INPUT, e))?;
                    Ok(EXIT_VERIFY)
                }
            }
        }
        Command::Verify { common, suite } => {
            if suite != "all" && !verify::suite_names().contains(&suite.as_str()) {
                return Err((
                    EXIT_INPUT,
                    format!("unknown suite {suite:?}; known: {:?}", verify::suite_names()),
                ));
            }
            let results = verify::run_suite(&suite);
            let mut all_pass = true;
            let mut lines = Vec::new();
            for r in &results {
                all_pass &= r.passed;
                lines.push(r.line());
            }
            emit(&common, &lines.join("\n")).map_err(|e| (EXIT_INPUT, e))?;
            Ok(if all_pass { EXIT_OK } else { EXIT_VERIFY })
        }
        Command::VerifyMarking {
            common,
            marking,
            bound,
        } => {
            let sys = parse_factors(&common.factors).map_err(|e| (EXIT_INPUT, e.to_string()))?;
            let x = io::marking_from_json(&sys, &read_json(&marking).map_err(|e| (EXIT_INPUT, e))?)
                .map_err(|e| (EXIT_INPUT, e.to_string()))?;
            match verify::verify_marking(&sys, &x, bound)
                .map_err(|e| (EXIT_INPUT, e.to_string()))?
            {
                Some(d) => {
                    emit(&common, &format!("certified: distance {d} to the basepoint"))
                        .map_err(|e| (EXIT_INPUT, e))?;
                    Ok(EXIT_OK)
                }
                None => {
                    emit(&common, "inconclusive within bound").map_err(|e| (EXIT_INPUT, e))?;
                    Ok(EXIT_VERIFY)
                }
            }
        }
    }
}

fn subgroup_by_name(sys: &spinelab::groups::FactorSystem, name: &str) -> Option<SubgroupSpec> {
    // Fixed nontrivial elements: index 1 of each factor.
    let single = |i: usize, j: usize| {
        spinelab::autos::generator(sys, i, &Word::letter(j, 1)).expect("generator")
    };
    match name {
        "H12" => Some(SubgroupSpec {
            name: "H12".into(),
            generators: vec![single(2, 0), single(2, 1), single(3, 0), single(3, 1)],
        }),
        "N12-N34" => Some(SubgroupSpec {
            name: "N12-N34".into(),
            generators: vec![metrics::pair_twist(sys, 0, 1), metrics::pair_twist(sys, 2, 3)],
        }),
        "M12M34" => Some(SubgroupSpec {
            name: "M12M34".into(),
            generators: vec![
                single(0, 0),
                single(1, 0),
                single(0, 1),
                single(1, 1),
                single(2, 2),
                single(3, 2),
                single(2, 3),
                single(3, 3),
            ],
        }),
        _ => None,
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
