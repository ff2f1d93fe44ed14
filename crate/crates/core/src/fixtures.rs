//! Named graphs shipped with the crate (`fixtures/*.graph`).

use crate::ams::{ams_graph, AmsParams, DEFAULT_VERTEX_BUDGET};
use crate::graph::Graph;

pub const NAMES: [&str; 4] = ["c6", "triangle", "k16-ams", "edgeless-4"];

/// `c6`: the 6-cycle, a (2,3) graph. `k16-ams`: the C=2, n=4 distance graph,
/// which is complete on 16 vertices.
pub fn fixture(name: &str) -> Option<Graph> {
    let g = match name {
        "c6" => Graph::cycle(6),
        "triangle" => Graph::cycle(3),
        "k16-ams" => {
            let params = AmsParams::new(2, 4, false).expect("valid parameters");
            return Some(ams_graph(&params, DEFAULT_VERTEX_BUDGET).expect("16 vertices"));
        }
        "edgeless-4" => Graph::edgeless(4),
        _ => return None,
    };
    Some(g.expect("fixture graphs are well formed"))
}
