//! Extended DIMACS instance files.
//!
//! ```text
//! c k 4
//! c rho 0.5
//! p edge <n> <m>
//! e <u> <v>          1 <= u < v <= n
//! v <vertex> <colour>  precolouring, colour in 1..=k
//! ```
//!
//! Reserved comment keys are `k`, `rho`, `p`, `q`, `seed` and
//! `n_communities`; any other comment line is ignored. Vertices are 1-based
//! in files and 0-based in memory. Ground-truth communities go to a sidecar
//! file with one `<vertex> <community>` line per vertex.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::colouring::{Colour, Colouring, PartialColouring};
use crate::graph::Graph;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("header declares {declared} {what}, file has {found}")]
    InconsistentHeader {
        what: &'static str,
        declared: usize,
        found: usize,
    },
    #[error("line {line}: colour {colour} outside 1..={k}")]
    ColourOutOfRange {
        line: usize,
        colour: usize,
        k: usize,
    },
}

fn syntax(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        message: message.into(),
    }
}

/// Header metadata carried in reserved comment lines.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub k: Option<usize>,
    pub rho: Option<f64>,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub seed: Option<u64>,
    pub n_communities: Option<usize>,
}

/// A parsed instance file.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub graph: Graph,
    pub precolouring: PartialColouring,
    pub meta: InstanceMeta,
}

fn parse_field<T: FromStr>(line: usize, token: Option<&str>, what: &str) -> Result<T, ParseError> {
    let token = token.ok_or_else(|| syntax(line, format!("missing {what}")))?;
    token
        .parse()
        .map_err(|_| syntax(line, format!("invalid {what} `{token}`")))
}

pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    let mut meta = InstanceMeta::default();
    let mut header: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    let mut precolours: Vec<(usize, usize, usize)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let mut tokens = raw.split_whitespace();
        let Some(tag) = tokens.next() else { continue };
        match tag {
            "c" => {
                let key = tokens.next();
                let value = tokens.next();
                let reserved = matches!(
                    key,
                    Some("k" | "rho" | "p" | "q" | "seed" | "n_communities")
                );
                if !reserved || tokens.next().is_some() {
                    continue;
                }
                match key.unwrap() {
                    "k" => meta.k = Some(parse_field(line, value, "k")?),
                    "rho" => meta.rho = Some(parse_field(line, value, "rho")?),
                    "p" => meta.p = Some(parse_field(line, value, "p")?),
                    "q" => meta.q = Some(parse_field(line, value, "q")?),
                    "seed" => meta.seed = Some(parse_field(line, value, "seed")?),
                    _ => meta.n_communities = Some(parse_field(line, value, "n_communities")?),
                }
            }
            "p" => {
                if header.is_some() {
                    return Err(syntax(line, "second problem line"));
                }
                if !edges.is_empty() || !precolours.is_empty() {
                    return Err(syntax(line, "problem line after edge or vertex lines"));
                }
                match tokens.next() {
                    Some("edge") => {}
                    other => return Err(syntax(line, format!("expected `edge`, got {other:?}"))),
                }
                let n: usize = parse_field(line, tokens.next(), "vertex count")?;
                let m: usize = parse_field(line, tokens.next(), "edge count")?;
                if n == 0 {
                    return Err(syntax(line, "vertex count must be positive"));
                }
                header = Some((n, m));
            }
            "e" => {
                let (n, _) = header.ok_or_else(|| syntax(line, "edge before problem line"))?;
                let u: usize = parse_field(line, tokens.next(), "endpoint")?;
                let v: usize = parse_field(line, tokens.next(), "endpoint")?;
                if !(1..=n).contains(&u) || !(1..=n).contains(&v) {
                    return Err(syntax(line, format!("endpoint outside 1..={n}")));
                }
                if u == v {
                    return Err(syntax(line, "self-loop"));
                }
                edges.push((u - 1, v - 1));
            }
            "v" => {
                let (n, _) = header.ok_or_else(|| syntax(line, "vertex before problem line"))?;
                let v: usize = parse_field(line, tokens.next(), "vertex")?;
                let c: usize = parse_field(line, tokens.next(), "colour")?;
                if !(1..=n).contains(&v) {
                    return Err(syntax(line, format!("vertex outside 1..={n}")));
                }
                if c == 0 {
                    return Err(ParseError::ColourOutOfRange {
                        line,
                        colour: c,
                        k: meta.k.unwrap_or(0),
                    });
                }
                precolours.push((line, v - 1, c));
            }
            other => return Err(syntax(line, format!("unknown line type `{other}`"))),
        }
    }

    let (n, m) =
        header.ok_or_else(|| syntax(text.lines().count().max(1), "missing problem line"))?;
    if edges.len() != m {
        return Err(ParseError::InconsistentHeader {
            what: "edges",
            declared: m,
            found: edges.len(),
        });
    }

    let k = meta
        .k
        .unwrap_or_else(|| precolours.iter().map(|p| p.2).max().unwrap_or(1));
    let mut assign = vec![None; n];
    for &(line, v, c) in &precolours {
        if c > k {
            return Err(ParseError::ColourOutOfRange { line, colour: c, k });
        }
        let colour = Colour::from_label(c);
        match assign[v] {
            Some(prev) if Some(prev) != colour => {
                return Err(syntax(line, format!("vertex {} precoloured twice", v + 1)))
            }
            _ => assign[v] = colour,
        }
    }

    let graph = Graph::from_edges(n, edges).map_err(|e| syntax(0, e.to_string()))?;
    let precolouring =
        PartialColouring::new(k.max(1), assign).map_err(|e| syntax(0, e.to_string()))?;
    Ok(Instance {
        graph,
        precolouring,
        meta,
    })
}

/// Canonical serialisation: metadata in fixed key order, sorted edge lines,
/// sorted precolour lines.
pub fn write_instance(g: &Graph, pc: &PartialColouring, meta: &InstanceMeta) -> String {
    let mut out = String::with_capacity(16 * (g.m() + 8));
    if let Some(k) = meta.k {
        writeln!(out, "c k {k}").unwrap();
    }
    if let Some(rho) = meta.rho {
        writeln!(out, "c rho {rho}").unwrap();
    }
    if let Some(p) = meta.p {
        writeln!(out, "c p {p}").unwrap();
    }
    if let Some(q) = meta.q {
        writeln!(out, "c q {q}").unwrap();
    }
    if let Some(seed) = meta.seed {
        writeln!(out, "c seed {seed}").unwrap();
    }
    if let Some(nc) = meta.n_communities {
        writeln!(out, "c n_communities {nc}").unwrap();
    }
    writeln!(out, "p edge {} {}", g.n(), g.m()).unwrap();
    for (u, v) in g.edges() {
        writeln!(out, "e {} {}", u + 1, v + 1).unwrap();
    }
    for (v, c) in pc.precoloured() {
        writeln!(out, "v {} {}", v + 1, c.label()).unwrap();
    }
    out
}

/// Sidecar with one `<vertex> <community>` line per vertex, both 1-based.
pub fn write_ground_truth(communities: &Colouring) -> String {
    let mut out = String::with_capacity(8 * communities.n());
    for (v, c) in communities.as_slice().iter().enumerate() {
        writeln!(out, "{} {}", v + 1, c.label()).unwrap();
    }
    out
}

pub fn parse_ground_truth(text: &str, n: usize, k: usize) -> Result<Colouring, ParseError> {
    let mut labels = vec![0usize; n];
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let mut tokens = raw.split_whitespace();
        let Some(first) = tokens.next() else { continue };
        let v: usize = parse_field(line, Some(first), "vertex")?;
        let c: usize = parse_field(line, tokens.next(), "community")?;
        if !(1..=n).contains(&v) {
            return Err(syntax(line, format!("vertex outside 1..={n}")));
        }
        if !(1..=k).contains(&c) {
            return Err(ParseError::ColourOutOfRange { line, colour: c, k });
        }
        labels[v - 1] = c;
    }
    let covered = labels.iter().filter(|&&c| c != 0).count();
    if covered != n {
        return Err(ParseError::InconsistentHeader {
            what: "ground-truth vertices",
            declared: n,
            found: covered,
        });
    }
    Colouring::from_labels(k, &labels).map_err(|e| syntax(0, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_instance() {
        let inst = parse_instance("p edge 2 1\ne 1 2\nv 1 1\n").unwrap();
        assert_eq!(inst.graph.n(), 2);
        assert_eq!(inst.graph.m(), 1);
        assert_eq!(inst.precolouring.get(0), Colour::from_label(1));
        assert!(inst.precolouring.is_free(1));
    }

    #[test]
    fn edge_count_mismatch() {
        let err = parse_instance("p edge 3 3\ne 1 2\ne 2 3\n").unwrap_err();
        assert_eq!(
            err,
            ParseError::InconsistentHeader {
                what: "edges",
                declared: 3,
                found: 2
            }
        );
    }

    #[test]
    fn colour_above_k() {
        let err = parse_instance("c k 2\np edge 2 1\ne 1 2\nv 2 3\n").unwrap_err();
        assert_eq!(
            err,
            ParseError::ColourOutOfRange {
                line: 4,
                colour: 3,
                k: 2
            }
        );
    }

    #[test]
    fn syntax_errors_carry_line() {
        for (text, line) in [
            ("e 1 2\n", 1),
            ("p edge 2 1\np edge 2 1\n", 2),
            ("p edge 2 1\ne 1 x\n", 2),
            ("p edge 2 1\ne 1 3\n", 2),
            ("p edge 2 1\ne 2 2\n", 2),
            ("c rho abc\np edge 1 0\n", 1),
            ("p edge 2 0\nz\n", 2),
        ] {
            match parse_instance(text) {
                Err(ParseError::Syntax { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?} gave {other:?}"),
            }
        }
    }

    #[test]
    fn duplicate_edges_are_counted() {
        let inst = parse_instance("p edge 3 3\ne 1 2\ne 2 1\ne 2 3\n").unwrap();
        assert_eq!(inst.graph.m(), 2);
        assert_eq!(inst.graph.duplicate_edges(), 1);
    }

    #[test]
    fn triangle_output() {
        let g = Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let pc = PartialColouring::all_free(3, 2).unwrap();
        let text = write_instance(&g, &pc, &InstanceMeta::default());
        assert_eq!(text.lines().filter(|l| l.starts_with("p ")).count(), 1);
        assert_eq!(text.lines().filter(|l| l.starts_with("e ")).count(), 3);
        assert!(text.contains("p edge 3 3\n"));
        assert_eq!(text, write_instance(&g, &pc, &InstanceMeta::default()));
    }

    #[test]
    fn metadata_header_lines() {
        let g = Graph::from_edges(2, [(0, 1)]).unwrap();
        let pc = PartialColouring::all_free(2, 4).unwrap();
        let meta = InstanceMeta {
            k: Some(4),
            rho: Some(0.5),
            ..Default::default()
        };
        let text = write_instance(&g, &pc, &meta);
        assert!(text.lines().any(|l| l == "c k 4"));
        assert!(text.lines().any(|l| l == "c rho 0.5"));
        let back = parse_instance(&text).unwrap();
        assert_eq!(back.meta, meta);
        assert_eq!(back.precolouring.k(), 4);
    }

    #[test]
    fn free_comments_are_ignored() {
        let inst = parse_instance("c generated by hand\nc\np edge 1 0\n").unwrap();
        assert_eq!(inst.meta, InstanceMeta::default());
    }

    #[test]
    fn ground_truth_round_trip() {
        let gt = Colouring::from_labels(3, &[1, 3, 2, 2]).unwrap();
        let text = write_ground_truth(&gt);
        assert_eq!(text, "1 1\n2 3\n3 2\n4 2\n");
        assert_eq!(parse_ground_truth(&text, 4, 3).unwrap(), gt);
        assert!(parse_ground_truth("1 1\n", 2, 3).is_err());
    }
}
