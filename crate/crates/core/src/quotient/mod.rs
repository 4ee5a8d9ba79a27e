//! Quotient graphs `L^d / L`, rooted balls, and the `r`-locally-`L^d` check.

mod edgelist;
mod iso;

use std::collections::{HashMap, VecDeque};
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::lattice::{min_distance, min_distance_at_least, orbit_of, OrbitClass, SublatticeHNF};

pub use edgelist::{parse_edge_list, provenance_jsonl, write_edge_list, EDGE_LIST_MAGIC};

/// Records that a component was built as `L^d / L` for a lattice in `orbit`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Provenance {
    pub d: usize,
    pub orbit: OrbitClass,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    /// Sorted vertex ids.
    pub vertices: Vec<u32>,
    pub provenance: Option<Provenance>,
}

/// Finite simple undirected graph with its connected components.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalGraph {
    adjacency: Vec<Vec<u32>>,
    components: Vec<Component>,
}

impl LocalGraph {
    /// Builds a graph from an edge list, rejecting loops and repeated edges.
    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u == v || u as usize >= n || v as usize >= n {
                return Err(Error::InvalidParameter(format!("bad edge ({u}, {v}) for n={n}")));
            }
            adjacency[u as usize].push(v);
            adjacency[v as usize].push(u);
        }
        for nb in &mut adjacency {
            nb.sort_unstable();
            if nb.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidParameter("repeated edge".into()));
            }
        }
        Ok(Self::from_adjacency(adjacency))
    }

    /// Sorted, symmetric, loop-free adjacency lists are assumed.
    fn from_adjacency(adjacency: Vec<Vec<u32>>) -> Self {
        let n = adjacency.len();
        let mut seen = vec![false; n];
        let mut components = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut vertices = vec![start as u32];
            let mut head = 0;
            while head < vertices.len() {
                let v = vertices[head] as usize;
                head += 1;
                for &w in &adjacency[v] {
                    if !std::mem::replace(&mut seen[w as usize], true) {
                        vertices.push(w);
                    }
                }
            }
            vertices.sort_unstable();
            components.push(Component { vertices, provenance: None });
        }
        Self { adjacency, components }
    }

    /// Graph with no vertices.
    pub fn empty() -> Self {
        Self { adjacency: Vec::new(), components: Vec::new() }
    }

    pub fn order(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn adjacency(&self) -> &[Vec<u32>] {
        &self.adjacency
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    /// Edges `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, nb)| nb.iter().filter(move |&&v| v as usize > u).map(move |&v| (u as u32, v)))
    }

    /// Disjoint union; vertices of `parts[k]` follow those of `parts[k-1]`, and
    /// component provenance is kept.
    pub fn disjoint_union(parts: impl IntoIterator<Item = LocalGraph>) -> Self {
        let mut adjacency = Vec::new();
        let mut components = Vec::new();
        for part in parts {
            let offset = adjacency.len() as u32;
            adjacency.extend(part.adjacency.into_iter().map(|nb| nb.into_iter().map(|w| w + offset).collect()));
            components.extend(part.components.into_iter().map(|c| Component {
                vertices: c.vertices.into_iter().map(|v| v + offset).collect(),
                provenance: c.provenance,
            }));
        }
        Self { adjacency, components }
    }

    fn bfs_distances(&self, root: usize, limit: u32) -> Vec<(u32, u32)> {
        let mut dist: HashMap<u32, u32> = HashMap::new();
        dist.insert(root as u32, 0);
        let mut order = vec![(root as u32, 0)];
        let mut queue = VecDeque::from([root as u32]);
        while let Some(v) = queue.pop_front() {
            let dv = dist[&v];
            if dv == limit {
                continue;
            }
            for &w in &self.adjacency[v as usize] {
                if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(w) {
                    e.insert(dv + 1);
                    order.push((w, dv + 1));
                    queue.push_back(w);
                }
            }
        }
        order
    }
}

/// `L^d / L` on the canonical coset representatives of `L`.
pub fn build_quotient(l: &SublatticeHNF) -> Result<LocalGraph> {
    if !min_distance_at_least(l, 3) {
        return Err(Error::QuotientNotSimple { min_distance: min_distance(l) });
    }
    let d = l.dim();
    let n = l.index() as usize;
    let mut adjacency = Vec::with_capacity(n);
    let mut y = vec![0i64; d];
    for rank in 0..n {
        let x = l.coset_unrank(rank);
        let mut nb = Vec::with_capacity(2 * d);
        for axis in 0..d {
            for step in [-1, 1] {
                y.copy_from_slice(&x);
                y[axis] += step;
                l.reduce(&mut y);
                nb.push(l.coset_rank(&y) as u32);
            }
        }
        nb.sort_unstable();
        debug_assert!(nb.windows(2).all(|w| w[0] < w[1]));
        adjacency.push(nb);
    }
    let mut g = LocalGraph::from_adjacency(adjacency);
    debug_assert_eq!(g.components.len(), 1);
    g.components[0].provenance = Some(Provenance { d, orbit: orbit_of(l) });
    Ok(g)
}

/// A ball `B_r(v, G)` as an induced subgraph; vertex 0 is the root and
/// vertices are in breadth-first order.
#[derive(Clone, Debug)]
pub struct RootedBall {
    pub graph: LocalGraph,
    pub root: usize,
    pub radius: u32,
    /// Distance of each vertex from the root.
    pub depth: Vec<u32>,
}

/// Induced subgraph on the vertices within distance `r` of `v`.
pub fn ball(g: &LocalGraph, v: usize, r: u32) -> RootedBall {
    let order = g.bfs_distances(v, r);
    let local: HashMap<u32, u32> = order.iter().enumerate().map(|(i, &(w, _))| (w, i as u32)).collect();
    let adjacency = order
        .iter()
        .map(|&(w, _)| {
            let mut nb: Vec<u32> =
                g.adjacency[w as usize].iter().filter_map(|x| local.get(x).copied()).collect();
            nb.sort_unstable();
            nb
        })
        .collect();
    RootedBall {
        graph: LocalGraph::from_adjacency(adjacency),
        root: 0,
        radius: r,
        depth: order.iter().map(|&(_, dist)| dist).collect(),
    }
}

fn depth_degree_colours(b: &RootedBall) -> Vec<u32> {
    // depth pins the root; degree inside the ball is an invariant too
    b.depth.iter().enumerate().map(|(v, &dep)| dep * 4096 + b.graph.degree(v) as u32).collect()
}

/// Whether a root-preserving isomorphism `a -> b` exists.
pub fn rooted_isomorphic(a: &RootedBall, b: &RootedBall) -> bool {
    if a.graph.order() != b.graph.order() || a.graph.edge_count() != b.graph.edge_count() {
        return false;
    }
    let ca = depth_degree_colours(a);
    let cb = depth_degree_colours(b);
    // depth is measured from each root, so root maps to root
    debug_assert!(a.root == 0 && b.root == 0);
    iso::find_isomorphism(&a.graph.adjacency, &b.graph.adjacency, &ca, &cb).is_some()
}

/// The radius-`r` ball of `L^d` around the origin.
pub fn lattice_ball(d: usize, r: u32) -> Arc<RootedBall> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, u32), Arc<RootedBall>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(b) = cache.lock().expect("cache poisoned").get(&(d, r)) {
        return b.clone();
    }
    let built = Arc::new(build_lattice_ball(d, r));
    cache.lock().expect("cache poisoned").entry((d, r)).or_insert(built).clone()
}

fn build_lattice_ball(d: usize, r: u32) -> RootedBall {
    fn points(d: usize, budget: i64, prefix: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if prefix.len() == d {
            out.push(prefix.clone());
            return;
        }
        for a in -budget..=budget {
            prefix.push(a);
            points(d, budget - a.abs(), prefix, out);
            prefix.pop();
        }
    }
    let mut pts = Vec::new();
    points(d, r as i64, &mut Vec::new(), &mut pts);
    let id: HashMap<Vec<i64>, u32> = pts.iter().enumerate().map(|(i, p)| (p.clone(), i as u32)).collect();
    let mut edges = Vec::new();
    for (i, p) in pts.iter().enumerate() {
        for axis in 0..d {
            let mut q = p.clone();
            q[axis] += 1;
            if let Some(&j) = id.get(&q) {
                edges.push((i as u32, j));
            }
        }
    }
    let g = LocalGraph::from_edges(pts.len(), &edges).expect("lattice ball is simple");
    let origin = id[&vec![0; d]] as usize;
    ball(&g, origin, r)
}

/// Vertices whose radius-`r` ball is not rooted-isomorphic to the lattice ball.
pub fn failing_vertices(g: &LocalGraph, d: usize, r: u32, limit: usize) -> Vec<usize> {
    let reference = lattice_ball(d, r);
    let mut out = Vec::new();
    for v in 0..g.order() {
        if !vertex_is_locally_lattice(g, v, &reference) {
            out.push(v);
            if out.len() == limit {
                break;
            }
        }
    }
    out
}

fn vertex_is_locally_lattice(g: &LocalGraph, v: usize, reference: &RootedBall) -> bool {
    g.degree(v) == reference.graph.degree(reference.root) && rooted_isomorphic(&ball(g, v, reference.radius), reference)
}

/// Whether every radius-`r` ball of `G` is rooted-isomorphic to that of `L^d`.
pub fn is_r_locally_lattice(g: &LocalGraph, d: usize, r: u32) -> bool {
    let reference = lattice_ball(d, r);
    (0..g.order()).all(|v| vertex_is_locally_lattice(g, v, &reference))
}

/// Checks the radius-`r` ball of a single vertex.
pub fn vertex_locally_lattice(g: &LocalGraph, v: usize, d: usize, r: u32) -> bool {
    vertex_is_locally_lattice(g, v, &lattice_ball(d, r))
}

/// Whether `G1` and `G2` are isomorphic.
pub fn graph_isomorphic(g1: &LocalGraph, g2: &LocalGraph) -> bool {
    if g1.order() != g2.order() || g1.edge_count() != g2.edge_count() {
        return false;
    }
    let c1: Vec<u32> = (0..g1.order()).map(|v| g1.degree(v) as u32).collect();
    let c2: Vec<u32> = (0..g2.order()).map(|v| g2.degree(v) as u32).collect();
    iso::find_isomorphism(&g1.adjacency, &g2.adjacency, &c1, &c2).is_some()
}

/// `sum log |H_i|` over components tagged as lattice quotients. Translations
/// act regularly on such a component, so this lower-bounds `log |Aut(G)|`.
pub fn aut_lower_bound_log(g: &LocalGraph) -> f64 {
    g.components
        .iter()
        .filter(|c| c.provenance.is_some())
        .map(|c| (c.vertices.len() as f64).ln())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{enumerate_hnf, hnf_canonicalize};

    fn cycle(n: u32) -> LocalGraph {
        build_quotient(&SublatticeHNF::scaled(1, n as i64)).unwrap()
    }

    fn torus(d: usize, m: i64) -> LocalGraph {
        build_quotient(&SublatticeHNF::scaled(d, m)).unwrap()
    }

    #[test]
    fn quotient_examples() {
        let c5 = cycle(5);
        assert_eq!((c5.order(), c5.edge_count()), (5, 5));
        assert!((0..5).all(|v| c5.degree(v) == 2));
        let t = torus(2, 3);
        assert_eq!((t.order(), t.edge_count()), (9, 18));
        assert!((0..9).all(|v| t.degree(v) == 4));
        let checker = SublatticeHNF::from_rows(&[vec![2, 1], vec![0, 1]]).unwrap();
        assert!(matches!(build_quotient(&checker), Err(Error::QuotientNotSimple { min_distance: 2 })));
    }

    #[test]
    fn quotients_are_regular_with_d_times_index_edges() {
        for n in 1..=40 {
            for l in enumerate_hnf(2, n) {
                if let Ok(g) = build_quotient(&l) {
                    assert_eq!(g.edge_count(), 2 * n as usize);
                    assert!((0..g.order()).all(|v| g.degree(v) == 4));
                    assert_eq!(g.components().len(), 1);
                }
            }
        }
    }

    #[test]
    fn ball_examples() {
        let t = torus(2, 8);
        let b0 = ball(&t, 3, 0);
        assert_eq!((b0.graph.order(), b0.graph.edge_count()), (1, 0));
        assert_eq!(ball(&t, 0, 1).graph.order(), 5);
        assert_eq!(ball(&t, 0, 2).graph.order(), 13);
        assert_eq!(lattice_ball(2, 1).graph.order(), 5);
        assert_eq!(lattice_ball(2, 2).graph.order(), 13);
        let b = ball(&cycle(8), 4, 2);
        assert_eq!((b.graph.order(), b.graph.edge_count()), (5, 4));
        assert_eq!(b.graph.degree(b.root), 2);
    }

    #[test]
    fn rooted_isomorphism_examples() {
        let t = torus(2, 3);
        let a = ball(&t, 0, 2);
        assert!(rooted_isomorphic(&a, &a));
        assert!((0..9).all(|v| rooted_isomorphic(&a, &ball(&t, v, 2))));
        assert!(!rooted_isomorphic(&ball(&cycle(5), 0, 2), &lattice_ball(1, 2)));
    }

    #[test]
    fn root_must_map_to_root() {
        // path a-b-c rooted at an end vs rooted at the middle
        let p = LocalGraph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(!rooted_isomorphic(&ball(&p, 0, 2), &ball(&p, 1, 2)));
        assert!(rooted_isomorphic(&ball(&p, 0, 2), &ball(&p, 2, 2)));
    }

    #[test]
    fn local_lattice_examples() {
        assert!(is_r_locally_lattice(&torus(2, 6), 2, 2));
        assert!(is_r_locally_lattice(&torus(3, 4), 3, 1));
        assert!(!is_r_locally_lattice(&cycle(5), 1, 2));
        assert!(is_r_locally_lattice(&cycle(6), 1, 2));
        assert!(!is_r_locally_lattice(&torus(2, 5), 2, 2));
    }

    #[test]
    fn local_check_matches_min_distance_for_small_d2_lattices() {
        for r in [2u32, 3] {
            for n in 1..=60 {
                for l in enumerate_hnf(2, n) {
                    let direct = build_quotient(&l).map(|g| is_r_locally_lattice(&g, 2, r)).unwrap_or(false);
                    assert_eq!(direct, min_distance(&l) >= 2 * r as u64 + 2, "{l:?} r={r}");
                }
            }
        }
    }

    #[test]
    fn covered_balls_have_lattice_size() {
        let l = hnf_canonicalize(&[vec![3, 3], vec![3, -3]]).unwrap();
        let g = build_quotient(&l).unwrap();
        for v in 0..g.order() {
            assert_eq!(ball(&g, v, 2).graph.order(), lattice_ball(2, 2).graph.order());
        }
    }

    #[test]
    fn graph_isomorphism_examples() {
        let t = torus(2, 3);
        assert!(graph_isomorphic(&t, &t));
        assert!(!graph_isomorphic(&cycle(9), &t));
        // same lattice, different basis presentation
        let a = build_quotient(&hnf_canonicalize(&[vec![3, 3], vec![3, -3]]).unwrap()).unwrap();
        let b = build_quotient(&hnf_canonicalize(&[vec![3, -3], vec![-3, -3]]).unwrap()).unwrap();
        assert!(graph_isomorphic(&a, &b));
        // torus C_6 x C_3 vs the index-18 diamond lattice
        let rect = build_quotient(&SublatticeHNF::from_rows(&[vec![6, 0], vec![0, 3]]).unwrap()).unwrap();
        assert!(!graph_isomorphic(&rect, &a));
        assert!(graph_isomorphic(&a, &a) && graph_isomorphic(&rect, &rect));
    }

    #[test]
    fn aut_bound_examples() {
        assert!((aut_lower_bound_log(&torus(2, 4)) - 16f64.ln()).abs() < 1e-12);
        let both = LocalGraph::disjoint_union([torus(2, 4), torus(2, 6)]);
        assert!((aut_lower_bound_log(&both) - (16f64.ln() + 36f64.ln())).abs() < 1e-12);
        let untagged = LocalGraph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(aut_lower_bound_log(&untagged), 0.0);
    }

    #[test]
    fn disjoint_union_offsets_components() {
        let g = LocalGraph::disjoint_union([cycle(4), cycle(5)]);
        assert_eq!(g.order(), 9);
        assert_eq!(g.components()[1].vertices, (4..9).collect::<Vec<u32>>());
        assert!(g.components().iter().all(|c| c.provenance.is_some()));
        assert!(is_r_locally_lattice(&g, 1, 1));
    }
}
