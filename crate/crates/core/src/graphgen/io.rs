//! Edge-list text format: header `N r seed`, then one `u v` line per edge,
//! 0-based, `u < v`, sorted.

use std::io::{BufRead, Write};

use super::RegularGraph;
use crate::error::{Error, Result};

pub fn write_edge_list<W: Write>(g: &RegularGraph, mut w: W) -> Result<()> {
    writeln!(w, "{} {} {}", g.n(), g.degree(), g.seed())?;
    for (u, v) in g.edges() {
        writeln!(w, "{u} {v}")?;
    }
    Ok(())
}

pub fn read_edge_list<R: BufRead>(r: R) -> Result<RegularGraph> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty edge list".into()))??;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 {
        return Err(Error::Parse(format!(
            "header must be `N r seed`, got `{header}`"
        )));
    }
    let parse = |s: &str| {
        s.parse::<u64>()
            .map_err(|e| Error::Parse(format!("`{s}`: {e}")))
    };
    let n = parse(fields[0])? as usize;
    let degree = parse(fields[1])? as usize;
    let seed = parse(fields[2])?;
    let mut edges = Vec::with_capacity(n * degree / 2);
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let (Some(u), Some(v), None) = (it.next(), it.next(), it.next()) else {
            return Err(Error::Parse(format!("line {}: expected `u v`", lineno + 2)));
        };
        let (u, v) = (parse(u)? as usize, parse(v)? as usize);
        if u >= v {
            return Err(Error::Parse(format!("line {}: need u < v", lineno + 2)));
        }
        edges.push((u, v));
    }
    if edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Parse("edges are not sorted".into()));
    }
    let g = RegularGraph::from_edges(n, degree, &edges, seed)?;
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphgen::{generate_simple, petersen};

    #[test]
    fn petersen_text() {
        let mut buf = Vec::new();
        write_edge_list(&petersen(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("10 3 0"));
        assert_eq!(lines.next(), Some("0 1"));
        assert_eq!(text.lines().count(), 16);
    }

    #[test]
    fn round_trip_preserves_graph_and_seed() {
        let g = generate_simple(50, 3, 99, 1000).unwrap();
        let mut buf = Vec::new();
        write_edge_list(&g, &mut buf).unwrap();
        let back = read_edge_list(&buf[..]).unwrap();
        assert_eq!(back.edges(), g.edges());
        assert_eq!(back.seed(), 99);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(read_edge_list(&b""[..]).is_err());
        assert!(read_edge_list(&b"4 3\n"[..]).is_err());
        assert!(read_edge_list(&b"4 3 0\n1 0\n"[..]).is_err());
    }
}
