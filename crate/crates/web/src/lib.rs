//! WebAssembly bindings for the static demo page in `www/`. Every export
//! takes plain JS numbers and returns a JSON string; errors come back as
//! `{"error": "..."}`.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use locograph::asymptotics::asymptotics_table;
use locograph::census::build_census;
use locograph::sampler::{sample_graph, SampleSpec, SampleReport};

/// Largest order the page accepts.
pub const MAX_N: u64 = 2000;

#[derive(Serialize)]
struct CensusView {
    d: usize,
    r: u64,
    gamma: Vec<u64>,
    first_nonzero: Option<u64>,
}

#[derive(Serialize)]
struct ComponentView {
    /// Half-open vertex range.
    vertices: [usize; 2],
    /// Fundamental-domain box of the torus, one side per axis.
    box_sides: Vec<i64>,
    /// Coset coordinates of each vertex in the box.
    coords: Vec<Vec<i64>>,
}

#[derive(Serialize)]
struct SampleView {
    n: u64,
    edges: Vec<[u32; 2]>,
    components: Vec<ComponentView>,
    report: SampleReport,
}

fn check_n(n: u64) -> locograph::Result<()> {
    if n == 0 || n > MAX_N {
        return Err(locograph::Error::InvalidParameter(format!("n must lie in 1..={MAX_N}, got {n}")));
    }
    Ok(())
}

fn to_json<T: Serialize>(r: locograph::Result<T>) -> String {
    match r {
        Ok(v) => serde_json::to_string(&v).unwrap_or_else(|e| error_json(&e.to_string())),
        Err(e) => error_json(&e.to_string()),
    }
}

fn error_json(msg: &str) -> String {
    serde_json::json!({ "error": msg }).to_string()
}

/// Census counts `gamma(1..=max_index)` as JSON.
#[wasm_bindgen]
pub fn census_gamma(d: usize, r: u32, max_index: u32) -> String {
    let (r, max_index) = (u64::from(r), u64::from(max_index));
    to_json(check_n(max_index).and_then(|_| {
        let t = build_census(d, r, max_index)?;
        Ok(CensusView { d, r, first_nonzero: t.first_nonzero(), gamma: t.gamma[1..].to_vec() })
    }))
}

/// One uniform sample with drawing coordinates, as JSON.
#[wasm_bindgen]
pub fn sample(d: usize, r: u32, n: u32, seed: u32) -> String {
    let (r, n, seed) = (u64::from(r), u64::from(n), u64::from(seed));
    to_json(check_n(n).and_then(|_| {
        let census = build_census(d, r, n)?;
        let (g, report) = sample_graph(&census, SampleSpec::new(d, r, n, seed))?;
        let mut components = Vec::new();
        for c in g.components() {
            let len = c.vertices.len();
            let start = c.vertices.first().map_or(0, |&v| v as usize);
            let (box_sides, coords) = match &c.provenance {
                Some(p) => {
                    let rep = &p.orbit.rep;
                    let sides = rep.diagonal();
                    (sides, (0..len).map(|v| rep.coset_unrank(v)).collect())
                }
                None => (vec![len as i64], (0..len as i64).map(|v| vec![v]).collect()),
            };
            components.push(ComponentView { vertices: [start, start + len], box_sides, coords });
        }
        Ok(SampleView { n, edges: g.edges().map(|(u, v)| [u, v]).collect(), components, report })
    }))
}

/// Exact log-counts against the saddle bound and leading term, as JSON rows.
#[wasm_bindgen]
pub fn count_vs_saddle(d: usize, r: u32, n_max: u32) -> String {
    let (r, n_max) = (u64::from(r), u64::from(n_max));
    to_json(check_n(n_max).and_then(|_| asymptotics_table(&build_census(d, r, n_max)?, n_max)))
}
