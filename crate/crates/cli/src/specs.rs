//! Parsers for the compact `kind:args` specs accepted on the command line.

use std::path::PathBuf;

use cvteam::mmes::Bipartition;
use cvteam::util::parse_real;

/// Channel squeezing substituted for the resource squeezing by `--perfect-limit`.
pub const PERFECT_LIMIT_R: f64 = 20.0;

#[derive(Debug, Clone, PartialEq)]
pub enum ResourceSpec {
    Psi4 { r: f64, t: f64 },
    Tmss { r: f64 },
    GraphFile(PathBuf),
    Toeplitz(usize),
    Channels(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum InputSpec {
    Tmss { z: f64 },
    Ghz { k: usize, z: f64 },
    Vacuum { k: usize },
}

fn split_spec(s: &str) -> Result<(&str, Vec<&str>), String> {
    let (kind, args) = s
        .split_once(':')
        .ok_or_else(|| format!("expected KIND:ARGS, got {s:?}"))?;
    Ok((kind.trim(), args.split(',').map(str::trim).collect()))
}

fn reals(args: &[&str], expected: usize, what: &str) -> Result<Vec<f64>, String> {
    if args.len() != expected {
        return Err(format!("{what} takes {expected} argument(s), got {}", args.len()));
    }
    args.iter().map(|a| parse_real(a).map_err(|e| e.to_string())).collect()
}

fn count(arg: &str) -> Result<usize, String> {
    arg.parse().map_err(|_| format!("invalid mode count {arg:?}"))
}

pub fn parse_resource(s: &str) -> Result<ResourceSpec, String> {
    let (kind, args) = split_spec(s)?;
    match kind {
        "psi4" => {
            let v = reals(&args, 2, "psi4")?;
            Ok(ResourceSpec::Psi4 { r: v[0], t: v[1] })
        }
        "tmss" => Ok(ResourceSpec::Tmss {
            r: reals(&args, 1, "tmss")?[0],
        }),
        "graph" => Ok(ResourceSpec::GraphFile(PathBuf::from(s.split_once(':').unwrap().1))),
        "toeplitz" if args.len() == 1 => Ok(ResourceSpec::Toeplitz(count(args[0])?)),
        "channels" => Ok(ResourceSpec::Channels(reals(&args, args.len(), "channels")?)),
        _ => Err(format!(
            "unknown resource {s:?}; expected psi4:R,T | tmss:R | graph:PATH | toeplitz:N | channels:R1,R2,..."
        )),
    }
}

pub fn parse_input(s: &str) -> Result<InputSpec, String> {
    let (kind, args) = split_spec(s)?;
    match kind {
        "tmss" => Ok(InputSpec::Tmss {
            z: reals(&args, 1, "tmss")?[0],
        }),
        "ghz" if args.len() == 2 => Ok(InputSpec::Ghz {
            k: count(args[0])?,
            z: parse_real(args[1]).map_err(|e| e.to_string())?,
        }),
        "vacuum" if args.len() == 1 => Ok(InputSpec::Vacuum { k: count(args[0])? }),
        _ => Err(format!("unknown input {s:?}; expected tmss:Z | ghz:K,Z | vacuum:K")),
    }
}

/// 0-based modes of block `A`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block(pub Vec<usize>);

/// Comma-separated 1-based mode labels of block `A`.
pub fn parse_block(s: &str) -> Result<Block, String> {
    s.split(',')
        .map(|m| match m.trim().parse::<usize>() {
            Ok(0) | Err(_) => Err(format!("invalid mode label {m:?}; labels start at 1")),
            Ok(v) => Ok(v - 1),
        })
        .collect::<Result<_, _>>()
        .map(Block)
}

pub fn bipartition(n: usize, block: &[usize]) -> Result<Bipartition, String> {
    Bipartition::new(n, block).map_err(|e| e.to_string())
}

pub fn real(s: &str) -> Result<f64, String> {
    parse_real(s).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resources() {
        assert_eq!(
            parse_resource("psi4:1,1/3"),
            Ok(ResourceSpec::Psi4 { r: 1.0, t: 1.0 / 3.0 })
        );
        assert_eq!(parse_resource("toeplitz:6"), Ok(ResourceSpec::Toeplitz(6)));
        assert_eq!(
            parse_resource("channels:1,2.5"),
            Ok(ResourceSpec::Channels(vec![1.0, 2.5]))
        );
        assert_eq!(
            parse_resource("graph:a,b.adj"),
            Ok(ResourceSpec::GraphFile(PathBuf::from("a,b.adj")))
        );
        assert!(parse_resource("psi4:1").is_err());
        assert!(parse_resource("cluster:3").is_err());
    }

    #[test]
    fn inputs_and_blocks() {
        assert_eq!(parse_input("ghz:3,0.5"), Ok(InputSpec::Ghz { k: 3, z: 0.5 }));
        assert_eq!(parse_input("vacuum:1"), Ok(InputSpec::Vacuum { k: 1 }));
        assert!(parse_input("tmss").is_err());
        assert_eq!(parse_block("1, 2"), Ok(Block(vec![0, 1])));
        assert!(parse_block("0,1").is_err());
    }
}
