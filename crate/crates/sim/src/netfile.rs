//! Plain-text network files.
//!
//! ```text
//! # comments and blank lines are ignored
//! n m alpha
//! u v            m directed links
//! w u v value    optional affectance entries
//! ```
//!
//! Without entry lines the hop-distance matrix with degradation distance
//! `alpha` is used. Otherwise unlisted entries are zero.

use std::fmt::Write as _;

use mmbcast_core::network::{hop_affectance_matrix, AffectanceMatrix};
use mmbcast_core::{Graph, Network, NodeId};

use crate::error::{Result, SimError};

fn fields<'a>(text: &'a str) -> impl Iterator<Item = (usize, Vec<&'a str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then(|| (i + 1, line.split_whitespace().collect()))
    })
}

fn number<T: std::str::FromStr>(line: usize, s: &str) -> Result<T> {
    s.parse().map_err(|_| SimError::NetFile {
        line,
        message: format!("expected a number, found `{s}`"),
    })
}

pub fn parse(text: &str) -> Result<Network> {
    let mut lines = fields(text);
    let (line, header) = lines.next().ok_or(SimError::NetFile {
        line: 0,
        message: "empty file".into(),
    })?;
    if header.len() != 3 {
        return Err(SimError::NetFile {
            line,
            message: "header must be `n m alpha`".into(),
        });
    }
    let n: usize = number(line, header[0])?;
    let m: usize = number(line, header[1])?;
    let alpha: u32 = number(line, header[2])?;

    let mut links = Vec::with_capacity(m);
    for _ in 0..m {
        let (line, f) = lines.next().ok_or(SimError::NetFile {
            line: 0,
            message: format!("expected {m} links"),
        })?;
        if f.len() != 2 {
            return Err(SimError::NetFile {
                line,
                message: "link lines are `u v`".into(),
            });
        }
        links.push((number::<usize>(line, f[0])?, number::<usize>(line, f[1])?));
    }
    let graph = Graph::new(n, links)?;

    let mut entries = Vec::new();
    for (line, f) in lines {
        if f.len() != 4 {
            return Err(SimError::NetFile {
                line,
                message: "entry lines are `w u v value`".into(),
            });
        }
        let w = NodeId(number(line, f[0])?);
        let (u, v) = (NodeId(number(line, f[1])?), NodeId(number(line, f[2])?));
        let value: f64 = number(line, f[3])?;
        if w.index() >= n {
            return Err(SimError::NetFile {
                line,
                message: format!("node {w} out of range"),
            });
        }
        let link = graph.link_id(u, v).ok_or_else(|| SimError::NetFile {
            line,
            message: format!("({u},{v}) is not a link"),
        })?;
        entries.push((w, link, value));
    }
    let matrix = if entries.is_empty() {
        hop_affectance_matrix(&graph, alpha)
    } else {
        let mut a = AffectanceMatrix::zeros(n, graph.link_count());
        for (w, l, value) in entries {
            a.set(w, l, value);
        }
        a
    };
    Ok(Network::new(graph, matrix, alpha)?)
}

/// Writes the network with every non-zero entry, so parsing it back yields
/// the same matrix.
pub fn render(net: &Network) -> String {
    let g = net.graph();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} {} {}",
        g.node_count(),
        g.link_count(),
        net.degradation_distance()
    );
    for &(u, v) in g.links() {
        let _ = writeln!(out, "{u} {v}");
    }
    for (w, l, value) in net.matrix().nonzero() {
        let (u, v) = g.link(l);
        let _ = writeln!(out, "{w} {u} {v} {value:?}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use mmbcast_core::topology::generate;
    use mmbcast_core::TopologyKind;

    #[test]
    fn hop_matrix_by_default() {
        let net = parse("# two nodes\n2 2 1\n0 1\n1 0\n").unwrap();
        assert_eq!(net.graph().link_count(), 2);
        assert_eq!(net.degradation_distance(), 1);
    }

    #[test]
    fn explicit_entries() {
        let net = parse("3 4 2\n0 1\n1 0\n1 2\n2 1\n2 0 1 0.25\n").unwrap();
        assert_eq!(
            net.affectance_on_link(&[NodeId(2)], NodeId(0), NodeId(1))
                .unwrap(),
            0.25
        );
        assert_eq!(
            net.affectance_on_link(&[NodeId(0)], NodeId(2), NodeId(1))
                .unwrap(),
            0.0
        );
    }

    #[test]
    fn round_trip() {
        let g = generate(TopologyKind::OverlapTrees, 12, 3).unwrap();
        let net = Network::with_hop_matrix(g, 2).unwrap();
        let text = render(&net);
        let back = parse(&text).unwrap();
        assert_eq!(back.graph(), net.graph());
        assert_eq!(back.matrix(), net.matrix());
        assert_eq!(render(&back), text);
    }

    #[test]
    fn reports_line_numbers() {
        match parse("2 2 1\n0 1\n1 x\n") {
            Err(SimError::NetFile { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse("2 2 1\n0 1\n").is_err());
        assert!(parse("2 2 1\n0 1\n1 0\n0 0 1 -1.0\n").is_err());
    }
}
