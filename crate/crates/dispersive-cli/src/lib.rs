//! Command-line front end for the dispersive-core derivation engine:
//! model-file parsing, report writers, and pipeline orchestration.

pub mod modelfile;
pub mod pipeline;
pub mod report;

use pipeline::{Command, Format, RunConfig};

pub const USAGE: &str = "\
dispersive: effective Hamiltonians for dispersive light-matter models

USAGE:
    dispersive <derive|diagrams|verify|bounds> [FLAGS]

FLAGS:
    --model PATH          model file (sections [levels] [modes] [couplings]
                          [continuum] [policy]; see README)
    --order N             perturbative order (default 1)
    --T x                 override the coarse-graining time
    --kappa x             override the resonance threshold
    --format text|json    output format (default text)
    --diagrams-dir PATH   also write one DOT file per diagram class
    --seed N              seed for randomized verification draws
    --out PATH            write the report to PATH instead of stdout
    --m M                 operator count for `bounds` without a model
    --verify              run the verification suite after `derive`

EXIT STATUS:
    0 success, 1 error, 2 verification failure beyond tolerance
";

/// Parse argv into a run configuration.
pub fn parse_args(args: &[String]) -> Result<RunConfig, String> {
    let mut cfg = RunConfig::default();
    let mut it = args.iter();
    let verb = it.next().ok_or_else(|| USAGE.to_string())?;
    cfg.command = match verb.as_str() {
        "derive" => Command::Derive,
        "diagrams" => Command::Diagrams,
        "verify" => Command::Verify,
        "bounds" => Command::Bounds,
        other => return Err(format!("unknown command {other:?}\n{USAGE}")),
    };
    while let Some(flag) = it.next() {
        let mut value = |name: &str| -> Result<&String, String> {
            it.next().ok_or_else(|| format!("{name} needs a value"))
        };
        match flag.as_str() {
            "--model" => cfg.model = Some(value("--model")?.into()),
            "--order" => {
                cfg.order = value("--order")?
                    .parse()
                    .map_err(|_| "--order must be an integer".to_string())?
            }
            "--T" => {
                cfg.t_override =
                    Some(value("--T")?.parse().map_err(|_| "--T must be a number".to_string())?)
            }
            "--kappa" => {
                cfg.kappa_override = Some(
                    value("--kappa")?
                        .parse()
                        .map_err(|_| "--kappa must be a number".to_string())?,
                )
            }
            "--format" => {
                cfg.format = match value("--format")?.as_str() {
                    "text" => Format::Text,
                    "json" => Format::Json,
                    other => return Err(format!("unknown format {other:?}")),
                }
            }
            "--diagrams-dir" => cfg.diagrams_dir = Some(value("--diagrams-dir")?.into()),
            "--seed" => {
                cfg.seed = value("--seed")?
                    .parse()
                    .map_err(|_| "--seed must be an integer".to_string())?
            }
            "--out" => cfg.out = Some(value("--out")?.into()),
            "--m" => {
                cfg.m_ops =
                    Some(value("--m")?.parse().map_err(|_| "--m must be an integer".to_string())?)
            }
            "--verify" => cfg.verify = true,
            other => return Err(format!("unknown flag {other:?}\n{USAGE}")),
        }
    }
    Ok(cfg)
}

/// Entry point used by the binary; returns the process exit code.
pub fn run(args: &[String]) -> i32 {
    match parse_args(args) {
        Ok(cfg) => pipeline::run_pipeline(&cfg),
        Err(message) => {
            eprintln!("{message}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_derive_flags() {
        let args: Vec<String> =
            ["derive", "--model", "m.txt", "--order", "2", "--format", "json"]
                .iter()
                .map(|s| s.to_string())
                .collect();
        let cfg = parse_args(&args).unwrap();
        assert_eq!(cfg.command, Command::Derive);
        assert_eq!(cfg.order, 2);
        assert_eq!(cfg.format, Format::Json);
    }

    #[test]
    fn unknown_flag_is_an_error() {
        let args: Vec<String> = ["derive", "--nope"].iter().map(|s| s.to_string()).collect();
        assert!(parse_args(&args).is_err());
    }
}
