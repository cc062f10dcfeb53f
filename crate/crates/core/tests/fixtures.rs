use std::path::PathBuf;

use qudit_coloring::graph::generators;
use qudit_coloring::{load_graph, Graph};

fn fixture(name: &str) -> Graph {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name);
    load_graph(&path, None).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn benchmark_sizes() {
    let expected = [
        ("myciel3.col", 11, 20),
        ("myciel4.col", 23, 71),
        ("myciel5.col", 47, 236),
        ("myciel6.col", 95, 755),
        ("myciel7.col", 191, 2360),
        ("queen5_5.col", 25, 160),
        ("queen6_6.col", 36, 290),
        ("queen7_7.col", 49, 476),
        ("queen8_8.col", 64, 728),
        ("queen9_9.col", 81, 1056),
        ("queen8_12.col", 96, 1368),
        ("queen11_11.col", 121, 1980),
        ("queen13_13.col", 169, 3328),
    ];
    for (name, nodes, edges) in expected {
        let g = fixture(name);
        assert_eq!((g.num_nodes(), g.num_edges()), (nodes, edges), "{name}");
    }
}

#[test]
fn fixtures_match_generators() {
    for (rows, cols) in [(5, 5), (6, 6), (7, 7), (8, 8), (9, 9), (8, 12), (11, 11), (13, 13)] {
        let g = fixture(&format!("queen{rows}_{cols}.col"));
        assert_eq!(g, generators::queen(rows, cols), "queen{rows}_{cols}");
    }
    for k in 3..=7 {
        assert_eq!(fixture(&format!("myciel{k}.col")), generators::mycielski(k), "myciel{k}");
    }
}

#[test]
fn queen_fixed_node_is_central() {
    // Centre squares attack the most cells.
    let g = fixture("queen5_5.col");
    assert_eq!(g.max_degree(), 16);
    assert_eq!(g.original_id(g.j_max()), 13);
}
