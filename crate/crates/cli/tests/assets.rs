//! The shipped example inputs must match the built-in presets.
//!
//! Run with `FLAGCALC_WRITE_ASSETS=1` to regenerate them.

use std::fs;
use std::path::PathBuf;

use flagcalc::algebra::FlagAlgebra;
use flagcalc::io;
use flagcalc::presets as p;
use flagcalc::rational::{int, ratio};
use flagcalc::verify::Certificate;
use serde_json::Value;

fn expected() -> Vec<(&'static str, Value)> {
    let g = p::graphs();
    let alg = FlagAlgebra::new(g.clone());
    let vertex = p::vertex_type(&g);
    let unit = alg.lift(&alg.unit(&vertex).unwrap(), 2).unwrap();
    let centered = alg
        .linear_combine(&[(int(1), &alg.from_flag(&p::rooted_edge(&g)).unwrap()), (ratio(-1, 2), &unit)])
        .unwrap();
    let edge = alg.from_flag(&p::edge(&g)).unwrap();
    let k3 = alg.from_flag(&p::k3(&g)).unwrap();
    vec![
        ("theories/graphs.json", io::theory_to_json(&g)),
        ("theories/triangle-free.json", io::theory_to_json(&p::triangle_free())),
        ("theories/digraphs.json", io::theory_to_json(&p::digraphs())),
        ("theories/3-graphs.json", io::theory_to_json(&p::hypergraphs3())),
        ("types/vertex.json", io::model_to_json(vertex.model())),
        ("types/edge.json", io::model_to_json(p::edge_type(&g).model())),
        ("flags/edge.json", io::flag_to_json(&p::edge(&g))),
        ("flags/non-edge.json", io::flag_to_json(&p::non_edge(&g))),
        ("flags/p3.json", io::flag_to_json(&p::p3(&g))),
        ("flags/k3.json", io::flag_to_json(&p::k3(&g))),
        ("flags/c4.json", io::flag_to_json(&p::c4(&g))),
        ("flags/rooted-edge.json", io::flag_to_json(&p::rooted_edge(&g))),
        ("flags/cherry-at-center.json", io::flag_to_json(&p::cherry_at_center(&g))),
        ("elements/edge.json", io::element_to_json(&g, &edge)),
        ("elements/k3.json", io::element_to_json(&g, &k3)),
        ("elements/centered-rooted-edge.json", io::element_to_json(&g, &centered)),
        ("kernels/p12.json", io::kernel_to_json(&p::kernel_half(&g))),
        ("kernels/p34.json", io::kernel_to_json(&p::kernel_three_quarters(&g))),
        ("kernels/two-type.json", io::kernel_to_json(&p::kernel_two_type(&g))),
        ("certificates/square.json", io::certificate_to_json(&g, &Certificate::square(&alg, &centered).unwrap())),
        ("certificates/bad.json", io::certificate_to_json(&g, &Certificate::negative_unit(&alg).unwrap())),
    ]
}

#[test]
fn assets_match_presets() {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("assets");
    let write = std::env::var_os("FLAGCALC_WRITE_ASSETS").is_some();
    for (name, value) in expected() {
        let path = root.join(name);
        let text = io::render(&value);
        if write {
            fs::create_dir_all(path.parent().unwrap()).unwrap();
            fs::write(&path, &text).unwrap();
        }
        let on_disk = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(on_disk, text, "{name} is stale");
    }
}
