//! graph6 encoding as produced by nauty's `geng`.
//!
//! Only the dense `graph6` format is supported; `sparse6` and `digraph6`
//! lines are rejected.

use thiserror::Error;

use crate::graph::Graph;

const HEADER: &str = ">>graph6<<";
const BIAS: u8 = 63;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Graph6Error {
    #[error("empty graph6 line")]
    Empty,
    #[error("sparse6/digraph6 input is not supported")]
    Unsupported,
    #[error("byte {byte:#04x} at offset {offset} is outside the graph6 range")]
    BadByte { offset: usize, byte: u8 },
    #[error("truncated order header")]
    TruncatedHeader,
    #[error("expected {expected} edge bytes for order {n}, found {found}")]
    BadLength { n: usize, expected: usize, found: usize },
}

fn edge_bytes(n: usize) -> usize {
    (n * n.saturating_sub(1) / 2).div_ceil(6)
}

/// Parses a single graph6 line (surrounding whitespace and an optional
/// `>>graph6<<` header are ignored).
pub fn parse_graph6(line: &str) -> Result<Graph, Graph6Error> {
    let line = line.trim();
    let line = line.strip_prefix(HEADER).unwrap_or(line);
    if line.is_empty() {
        return Err(Graph6Error::Empty);
    }
    if line.starts_with(':') || line.starts_with('&') {
        return Err(Graph6Error::Unsupported);
    }
    let bytes = line.as_bytes();
    for (offset, &byte) in bytes.iter().enumerate() {
        if !(BIAS..=126).contains(&byte) {
            return Err(Graph6Error::BadByte { offset, byte });
        }
    }
    let (n, body) = decode_order(bytes)?;
    let expected = edge_bytes(n);
    if body.len() != expected {
        return Err(Graph6Error::BadLength { n, expected, found: body.len() });
    }

    let mut edges = Vec::new();
    let mut k = 0usize;
    for v in 1..n {
        for u in 0..v {
            let byte = body[k / 6] - BIAS;
            if byte & (1 << (5 - k % 6)) != 0 {
                edges.push((u, v));
            }
            k += 1;
        }
    }
    Ok(Graph::from_edges(n, &edges).expect("decoded edges are in range and loop-free"))
}

fn decode_order(bytes: &[u8]) -> Result<(usize, &[u8]), Graph6Error> {
    let take = |range: std::ops::Range<usize>| -> Result<usize, Graph6Error> {
        let chunk = bytes.get(range).ok_or(Graph6Error::TruncatedHeader)?;
        Ok(chunk.iter().fold(0usize, |acc, &b| (acc << 6) | usize::from(b - BIAS)))
    };
    if bytes[0] != 126 {
        Ok((usize::from(bytes[0] - BIAS), &bytes[1..]))
    } else if bytes.get(1) != Some(&126) {
        Ok((take(1..4)?, &bytes[4..]))
    } else {
        Ok((take(2..8)?, &bytes[8..]))
    }
}

/// Encodes a graph as a graph6 line (without a trailing newline).
pub fn to_graph6(g: &Graph) -> String {
    let n = g.order();
    let mut out: Vec<u8> = Vec::with_capacity(8 + edge_bytes(n));
    if n < 63 {
        out.push(n as u8 + BIAS);
    } else if n <= 258_047 {
        out.push(126);
        out.extend((0..3).rev().map(|i| ((n >> (6 * i)) & 63) as u8 + BIAS));
    } else {
        out.extend([126, 126]);
        out.extend((0..6).rev().map(|i| ((n >> (6 * i)) & 63) as u8 + BIAS));
    }
    let mut acc = 0u8;
    let mut k = 0usize;
    for v in 1..n {
        for u in 0..v {
            acc = (acc << 1) | u8::from(g.has_edge(u, v));
            k += 1;
            if k % 6 == 0 {
                out.push(acc + BIAS);
                acc = 0;
            }
        }
    }
    if k % 6 != 0 {
        out.push((acc << (6 - k % 6)) + BIAS);
    }
    String::from_utf8(out).expect("graph6 bytes are ASCII")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_vertex_cases() {
        let k2 = parse_graph6("A_").unwrap();
        assert_eq!(k2.order(), 2);
        assert_eq!(k2.edges().collect::<Vec<_>>(), vec![(0, 1)]);
        assert_eq!(to_graph6(&Graph::empty(1)), "@");
        assert_eq!(to_graph6(&Graph::empty(2)), "A?");
        assert_eq!(to_graph6(&k2), "A_");
    }

    #[test]
    fn errors() {
        assert_eq!(parse_graph6(""), Err(Graph6Error::Empty));
        assert_eq!(parse_graph6("   \n"), Err(Graph6Error::Empty));
        assert_eq!(parse_graph6(":Fa@x^"), Err(Graph6Error::Unsupported));
        assert_eq!(parse_graph6("A"), Err(Graph6Error::BadLength { n: 2, expected: 1, found: 0 }));
        assert_eq!(parse_graph6("A__"), Err(Graph6Error::BadLength { n: 2, expected: 1, found: 2 }));
        assert!(matches!(parse_graph6("A\x01"), Err(Graph6Error::BadByte { offset: 1, .. })));
        assert_eq!(parse_graph6("~?"), Err(Graph6Error::TruncatedHeader));
    }

    #[test]
    fn accepts_header_and_newline() {
        let g = parse_graph6(">>graph6<<A_\r\n").unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn large_order_header() {
        let g = Graph::from_edges(70, &[(0, 69), (5, 6)]).unwrap();
        let text = to_graph6(&g);
        assert!(text.starts_with('~'));
        assert_eq!(parse_graph6(&text).unwrap(), g);
    }
}
