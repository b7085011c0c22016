//! Graphviz rendering of a model's frame.

use std::fmt::Write;

use crate::model::{BtModel, Point};

/// One node per moment, one edge per covering pair of the precedence
/// relation, labelled with the indices of the histories running through it.
/// A highlighted point fills its moment and draws its history in bold.
pub fn to_dot(model: &BtModel, highlight: Option<Point>) -> String {
    let mut out = String::from("digraph bt {\n  rankdir=TB;\n  node [shape=ellipse];\n");
    for m in model.moments() {
        let name = model.moment_name(m);
        let style = match highlight {
            Some(p) if p.moment == m => {
                format!(
                    ", style=filled, fillcolor=gold, xlabel=\"{}\"",
                    model.point_ref(p)
                )
            }
            _ => String::new(),
        };
        writeln!(
            out,
            "  \"{}\" [label=\"{}\"{}];",
            escape(name),
            escape(name),
            style
        )
        .unwrap();
    }
    for (a, b) in model.precedence().covering_pairs() {
        let through: Vec<usize> = model
            .histories()
            .iter()
            .enumerate()
            .filter(|(_, h)| h.contains(a) && h.contains(b))
            .map(|(i, _)| i)
            .collect();
        let label = through
            .iter()
            .map(|i| format!("h{i}"))
            .collect::<Vec<_>>()
            .join(",");
        let bold = highlight.is_some_and(|p| through.contains(&p.history.0));
        writeln!(
            out,
            "  \"{}\" -> \"{}\" [label=\"{}\"{}];",
            escape(model.moment_name(a)),
            escape(model.moment_name(b)),
            label,
            if bold { ", penwidth=2.5" } else { "" }
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}
