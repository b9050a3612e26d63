//! Declarative text formats for Bayesian networks and flowgraphs
//! (grammars documented in FORMATS.md).

use std::path::Path;

use sysrel::bn::{BayesNet, BnNode};
use sysrel::flowgraph::{Branch, Flowgraph, WaitingTime};

use crate::{CliError, CliResult};

/// Parses a network file: one `node <name> [<parent>...] : <p>...` line
/// per node. Probabilities are P(node = 1 | parents), listed over parent
/// configurations in binary order with the first-listed parent most
/// significant; a parentless node lists a single probability.
pub fn parse_bn(path: &Path) -> CliResult<BayesNet> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
    let mut names: Vec<String> = Vec::new();
    let mut specs: Vec<(usize, Vec<String>, Vec<f64>)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let loc = format!("{}:{}", path.display(), i + 1);
        let rest = line
            .strip_prefix("node ")
            .ok_or_else(|| CliError::Parse(format!("{loc}: expected `node ...`, got `{line}`")))?;
        let (head, probs) = rest
            .split_once(':')
            .ok_or_else(|| CliError::Parse(format!("{loc}: missing `:` before probabilities")))?;
        let mut words = head.split_whitespace().map(str::to_string);
        let name = words
            .next()
            .ok_or_else(|| CliError::Parse(format!("{loc}: missing node name")))?;
        let parents: Vec<String> = words.collect();
        let probs: Vec<f64> = probs
            .split_whitespace()
            .map(|s| {
                s.parse::<f64>().map_err(|_| {
                    CliError::Parse(format!("{loc}: `{s}` is not a probability"))
                })
            })
            .collect::<CliResult<_>>()?;
        names.push(name);
        specs.push((i + 1, parents, probs));
    }
    if names.is_empty() {
        return Err(CliError::Parse(format!("{}: no records", path.display())));
    }
    let mut nodes = Vec::new();
    for (name, (line, parents, probs)) in names.iter().zip(&specs) {
        let parent_idx: Vec<usize> = parents
            .iter()
            .map(|p| {
                names.iter().position(|n| n == p).ok_or_else(|| {
                    CliError::Validation(format!(
                        "{}:{line}: unknown parent `{p}` of node `{name}`",
                        path.display()
                    ))
                })
            })
            .collect::<CliResult<_>>()?;
        nodes.push(BnNode {
            name: name.clone(),
            parents: parent_idx,
            p_given_parents: probs.clone(),
        });
    }
    let net = BayesNet { nodes };
    net.validate()
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    Ok(net)
}

/// Parses a flowgraph file: a `states <n>` line followed by
/// `branch <from> <to> <p> <waiting-time> <params...>` lines with
/// waiting-time one of `exponential <rate>`, `gamma <shape> <rate>`,
/// `normal <mean> <sd>`, `constant <value>`.
pub fn parse_flowgraph(path: &Path) -> CliResult<Flowgraph> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
    let mut n_states: Option<usize> = None;
    let mut branches = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let loc = format!("{}:{}", path.display(), i + 1);
        let words: Vec<&str> = line.split_whitespace().collect();
        match words[0] {
            "states" => {
                if words.len() != 2 {
                    return Err(CliError::Parse(format!("{loc}: expected `states <n>`")));
                }
                n_states = Some(words[1].parse().map_err(|_| {
                    CliError::Parse(format!("{loc}: `{}` is not a state count", words[1]))
                })?);
            }
            "branch" => {
                if words.len() < 5 {
                    return Err(CliError::Parse(format!(
                        "{loc}: expected `branch <from> <to> <p> <waiting-time> ...`"
                    )));
                }
                let num = |s: &str| {
                    s.parse::<f64>().map_err(|_| {
                        CliError::Parse(format!("{loc}: `{s}` is not a number"))
                    })
                };
                let idx = |s: &str| {
                    s.parse::<usize>().map_err(|_| {
                        CliError::Parse(format!("{loc}: `{s}` is not a state index"))
                    })
                };
                let args: Vec<f64> = words[5..].iter().map(|s| num(s)).collect::<CliResult<_>>()?;
                let want = |n: usize| {
                    if args.len() == n {
                        Ok(())
                    } else {
                        Err(CliError::Parse(format!(
                            "{loc}: `{}` takes {n} parameter(s), got {}",
                            words[4],
                            args.len()
                        )))
                    }
                };
                let wt = match words[4] {
                    "exponential" => {
                        want(1)?;
                        WaitingTime::Exponential { rate: args[0] }
                    }
                    "gamma" => {
                        want(2)?;
                        WaitingTime::Gamma { shape: args[0], rate: args[1] }
                    }
                    "normal" => {
                        want(2)?;
                        WaitingTime::Normal { mean: args[0], sd: args[1] }
                    }
                    "constant" => {
                        want(1)?;
                        WaitingTime::Constant { value: args[0] }
                    }
                    other => {
                        return Err(CliError::Parse(format!(
                            "{loc}: unknown waiting time `{other}`"
                        )))
                    }
                };
                branches.push(Branch {
                    from: idx(words[1])?,
                    to: idx(words[2])?,
                    p: num(words[3])?,
                    wt,
                });
            }
            other => {
                return Err(CliError::Parse(format!(
                    "{loc}: expected `states` or `branch`, got `{other}`"
                )))
            }
        }
    }
    let n_states = n_states.ok_or_else(|| {
        CliError::Parse(format!("{}: missing `states` line", path.display()))
    })?;
    let fg = Flowgraph { n_states, branches };
    fg.validate()
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    Ok(fg)
}
