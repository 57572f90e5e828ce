//! DOT export of a complex's dual graph: one node per facet, one edge per
//! pair of facets with a nonempty intersection, labeled by the colors of
//! the shared face.

use std::fmt::Write;

use crate::complex::ChromaticComplex;

pub fn export_dual_dot(complex: &ChromaticComplex) -> String {
    let mut out = String::new();
    writeln!(out, "graph dual {{").unwrap();
    writeln!(out, "    node [shape=circle];").unwrap();
    for (w, facet) in complex.facets().iter().enumerate() {
        let ids: Vec<&str> = facet.iter().map(|&v| complex.vertex(v).id.as_str()).collect();
        let mut label = format!("w{w}\\n{}", ids.join(","));
        if let Some(carrier) = complex.carrier() {
            write!(label, "\\nin{}", carrier[w]).unwrap();
        }
        writeln!(out, "    w{w} [label=\"{label}\"];").unwrap();
    }
    for w1 in 0..complex.facet_count() {
        for w2 in (w1 + 1)..complex.facet_count() {
            let (shared, colors) = complex
                .facet_intersection(w1, w2)
                .expect("facet indices in range");
            if shared.is_empty() {
                continue;
            }
            let label: Vec<&str> = colors.iter().map(|c| c.as_str()).collect();
            writeln!(out, "    w{w1} -- w{w2} [label=\"{}\"];", label.join("")).unwrap();
        }
    }
    writeln!(out, "}}").unwrap();
    out
}
