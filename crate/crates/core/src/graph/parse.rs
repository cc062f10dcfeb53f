use super::{Graph, GraphError};

/// Parses DIMACS `.col` text (`c` comments, one `p edge V E` line, `e u v`
/// edges with 1-based endpoints). Original IDs are the 1-based DIMACS labels.
pub fn parse_dimacs(text: &str) -> Result<Graph, GraphError> {
    let mut num_nodes: Option<usize> = None;
    let mut pairs = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        let mut tokens = trimmed.split_whitespace();
        match tokens.next() {
            None | Some("c") => continue,
            Some("p") => {
                if num_nodes.is_some() {
                    return Err(GraphError::DuplicateProblemLine { line });
                }
                let malformed = || GraphError::MalformedHeader {
                    line,
                    text: trimmed.to_string(),
                };
                let kind = tokens.next().ok_or_else(malformed)?;
                if kind != "edge" && kind != "col" {
                    return Err(malformed());
                }
                let nodes: usize = tokens.next().and_then(|t| t.parse().ok()).ok_or_else(malformed)?;
                // Declared edge count is informational; many files list each edge twice.
                let _edges: usize = tokens.next().and_then(|t| t.parse().ok()).ok_or_else(malformed)?;
                if tokens.next().is_some() || nodes == 0 {
                    return Err(malformed());
                }
                num_nodes = Some(nodes);
            }
            Some("e") => {
                let n = num_nodes.ok_or(GraphError::MissingProblemLine)?;
                let malformed = || GraphError::MalformedEdge {
                    line,
                    text: trimmed.to_string(),
                };
                let u = tokens.next().ok_or_else(malformed)?;
                let v = tokens.next().ok_or_else(malformed)?;
                if tokens.next().is_some() {
                    return Err(malformed());
                }
                let u = parse_id(u, line)?;
                let v = parse_id(v, line)?;
                for index in [u, v] {
                    if index == 0 || index > n as u64 {
                        return Err(GraphError::EdgeOutOfRange {
                            line,
                            index,
                            num_nodes: n,
                        });
                    }
                }
                if u == v {
                    return Err(GraphError::SelfLoop { line, node: u });
                }
                pairs.push((u, v));
            }
            Some(_) => {
                return Err(GraphError::MalformedEdge {
                    line,
                    text: trimmed.to_string(),
                })
            }
        }
    }

    if num_nodes.is_none() {
        return Err(GraphError::MissingProblemLine);
    }
    Graph::from_edges(pairs)
}

/// Parses a SNAP-style edge list: one whitespace-separated pair of
/// non-negative integer IDs per line, `#` comment lines, direction ignored.
/// Self-loops and duplicates are dropped.
pub fn parse_edge_list(text: &str) -> Result<Graph, GraphError> {
    let mut pairs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with('%') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let (Some(u), Some(v)) = (tokens.next(), tokens.next()) else {
            return Err(GraphError::MalformedEdge {
                line,
                text: trimmed.to_string(),
            });
        };
        pairs.push((parse_id(u, line)?, parse_id(v, line)?));
    }
    Graph::from_edges(pairs)
}

fn parse_id(token: &str, line: usize) -> Result<u64, GraphError> {
    token.parse().map_err(|_| GraphError::InvalidToken {
        line,
        token: token.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimacs_triangle() {
        let g = parse_dimacs("c tiny\np edge 3 3\ne 1 2\ne 2 3\ne 1 3\n").unwrap();
        assert_eq!(g.num_nodes(), 3);
        assert_eq!(g.num_edges(), 3);
        assert_eq!(g.original_ids(), &[1, 2, 3]);
    }

    #[test]
    fn dimacs_duplicate_collapsed() {
        let g = parse_dimacs("p edge 2 2\ne 1 2\ne 2 1\n").unwrap();
        assert_eq!(g.num_nodes(), 2);
        assert_eq!(g.num_edges(), 1);
    }

    #[test]
    fn dimacs_isolated_nodes_removed_and_remapped() {
        let g = parse_dimacs("p edge 5 2\ne 2 4\ne 4 5\n").unwrap();
        assert_eq!(g.num_nodes(), 3);
        assert_eq!(g.original_ids(), &[2, 4, 5]);
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn dimacs_errors_are_distinct() {
        assert!(matches!(parse_dimacs("e 1 2\n"), Err(GraphError::MissingProblemLine)));
        assert!(matches!(parse_dimacs("c only comments\n"), Err(GraphError::MissingProblemLine)));
        assert!(matches!(
            parse_dimacs("p edge three 3\n"),
            Err(GraphError::MalformedHeader { line: 1, .. })
        ));
        assert!(matches!(
            parse_dimacs("p graph 3 3\n"),
            Err(GraphError::MalformedHeader { .. })
        ));
        assert!(matches!(
            parse_dimacs("p edge 3 1\ne 1 4\n"),
            Err(GraphError::EdgeOutOfRange { line: 2, index: 4, num_nodes: 3 })
        ));
        assert!(matches!(
            parse_dimacs("p edge 3 1\ne 0 1\n"),
            Err(GraphError::EdgeOutOfRange { index: 0, .. })
        ));
        assert!(matches!(
            parse_dimacs("p edge 3 1\ne 2 2\n"),
            Err(GraphError::SelfLoop { line: 2, node: 2 })
        ));
        assert!(matches!(
            parse_dimacs("p edge 3 1\np edge 3 1\n"),
            Err(GraphError::DuplicateProblemLine { line: 2 })
        ));
        assert!(matches!(
            parse_dimacs("p edge 3 1\ne 1\n"),
            Err(GraphError::MalformedEdge { .. })
        ));
        assert!(matches!(parse_dimacs("p edge 3 0\n"), Err(GraphError::Empty)));
    }

    #[test]
    fn edge_list_drops_mirror_and_self_loop() {
        let g = parse_edge_list("0 1\n1 0\n2 2").unwrap();
        assert_eq!(g.num_nodes(), 2);
        assert_eq!(g.num_edges(), 1);
    }

    #[test]
    fn edge_list_compacts_ids() {
        let g = parse_edge_list("5 9\n9 7").unwrap();
        assert_eq!(g.num_nodes(), 3);
        assert_eq!(g.num_edges(), 2);
        assert_eq!(g.original_ids(), &[5, 7, 9]);
        assert_eq!(g.edges(), &[(0, 2), (1, 2)]);
    }

    #[test]
    fn edge_list_comments_and_tabs() {
        let g = parse_edge_list("# Directed graph\n# FromNodeId\tToNodeId\n0\t1\n1\t2\n").unwrap();
        assert_eq!(g.num_edges(), 2);
    }

    #[test]
    fn edge_list_errors() {
        assert!(matches!(
            parse_edge_list("0 1\n1 x\n"),
            Err(GraphError::InvalidToken { line: 2, .. })
        ));
        assert!(matches!(parse_edge_list("0 -1\n"), Err(GraphError::InvalidToken { .. })));
        assert!(matches!(parse_edge_list("# nothing\n"), Err(GraphError::Empty)));
        assert!(matches!(parse_edge_list("3 3\n"), Err(GraphError::Empty)));
        assert!(matches!(parse_edge_list("4\n"), Err(GraphError::MalformedEdge { .. })));
    }
}
