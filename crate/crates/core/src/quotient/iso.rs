//! Isomorphism search for small graphs: colour refinement run jointly on both
//! graphs, then individualisation of one vertex at a time with backtracking.

use std::collections::BTreeMap;

type Adj = [Vec<u32>];

/// Refines both colourings to the coarsest equitable partition they share.
/// Returns `false` when the colour histograms diverge (no isomorphism can
/// respect the colourings).
fn refine(g: &Adj, h: &Adj, cg: &mut [u32], ch: &mut [u32]) -> bool {
    let mut classes = count_classes(cg, ch);
    loop {
        let mut ids: BTreeMap<(u32, Vec<u32>), u32> = BTreeMap::new();
        let sig = |adj: &Adj, c: &[u32], v: usize| {
            let mut nb: Vec<u32> = adj[v].iter().map(|&w| c[w as usize]).collect();
            nb.sort_unstable();
            (c[v], nb)
        };
        let sg: Vec<_> = (0..g.len()).map(|v| sig(g, cg, v)).collect();
        let sh: Vec<_> = (0..h.len()).map(|v| sig(h, ch, v)).collect();
        for s in sg.iter().chain(sh.iter()) {
            ids.entry(s.clone()).or_insert(0);
        }
        for (i, id) in ids.values_mut().enumerate() {
            *id = i as u32;
        }
        for (v, s) in sg.into_iter().enumerate() {
            cg[v] = ids[&s];
        }
        for (v, s) in sh.into_iter().enumerate() {
            ch[v] = ids[&s];
        }
        if !same_histogram(cg, ch) {
            return false;
        }
        let now = ids.len();
        if now == classes {
            return true;
        }
        classes = now;
    }
}

fn count_classes(cg: &[u32], ch: &[u32]) -> usize {
    let mut all: Vec<u32> = cg.iter().chain(ch).copied().collect();
    all.sort_unstable();
    all.dedup();
    all.len()
}

fn same_histogram(cg: &[u32], ch: &[u32]) -> bool {
    let mut a = cg.to_vec();
    let mut b = ch.to_vec();
    a.sort_unstable();
    b.sort_unstable();
    a == b
}

fn is_isomorphism(g: &Adj, h: &Adj, map: &[u32]) -> bool {
    g.iter().enumerate().all(|(v, nbrs)| {
        let target = &h[map[v] as usize];
        nbrs.len() == target.len() && nbrs.iter().all(|&w| target.binary_search(&map[w as usize]).is_ok())
    })
}

fn search(g: &Adj, h: &Adj, cg: Vec<u32>, ch: Vec<u32>) -> Option<Vec<u32>> {
    // smallest colour whose class has more than one vertex
    let mut size: BTreeMap<u32, usize> = BTreeMap::new();
    for &c in &cg {
        *size.entry(c).or_default() += 1;
    }
    let Some((&target, _)) = size.iter().find(|(_, &s)| s > 1) else {
        let mut map = vec![0u32; g.len()];
        let mut where_h = BTreeMap::new();
        for (w, &c) in ch.iter().enumerate() {
            where_h.insert(c, w as u32);
        }
        for (v, c) in cg.iter().enumerate() {
            map[v] = where_h[c];
        }
        return is_isomorphism(g, h, &map).then_some(map);
    };
    let fresh = size.keys().next_back().copied().unwrap_or(0) + 1;
    let v = cg.iter().position(|&c| c == target).expect("class is non-empty");
    for w in (0..h.len()).filter(|&w| ch[w] == target) {
        let mut cg2 = cg.clone();
        let mut ch2 = ch.clone();
        cg2[v] = fresh;
        ch2[w] = fresh;
        if refine(g, h, &mut cg2, &mut ch2) {
            if let Some(map) = search(g, h, cg2, ch2) {
                return Some(map);
            }
        }
    }
    None
}

/// A colour-preserving isomorphism `g -> h`, if one exists. Neighbour lists
/// must be sorted.
pub(crate) fn find_isomorphism(g: &Adj, h: &Adj, init_g: &[u32], init_h: &[u32]) -> Option<Vec<u32>> {
    if g.len() != h.len() {
        return None;
    }
    let mut cg = init_g.to_vec();
    let mut ch = init_h.to_vec();
    if !same_histogram(&cg, &ch) || !refine(g, h, &mut cg, &mut ch) {
        return None;
    }
    search(g, h, cg, ch)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: u32) -> Vec<Vec<u32>> {
        (0..n)
            .map(|v| {
                let mut nb = vec![(v + 1) % n, (v + n - 1) % n];
                nb.sort_unstable();
                nb
            })
            .collect()
    }

    #[test]
    fn regular_graphs_need_individualisation() {
        // C_6 vs two triangles: both 2-regular on 6 vertices
        let c6 = cycle(6);
        let mut tri2 = cycle(3);
        tri2.extend(cycle(3).into_iter().map(|nb| nb.into_iter().map(|w| w + 3).collect()));
        let zeros = vec![0; 6];
        assert!(find_isomorphism(&c6, &tri2, &zeros, &zeros).is_none());
        let map = find_isomorphism(&c6, &c6, &zeros, &zeros).unwrap();
        assert!(is_isomorphism(&c6, &c6, &map));
    }

    #[test]
    fn relabelled_cycle_is_found() {
        let c7 = cycle(7);
        // relabel v -> 3v mod 7
        let mut relabelled = vec![Vec::new(); 7];
        for (v, nb) in c7.iter().enumerate() {
            relabelled[(3 * v) % 7] = nb.iter().map(|&w| (3 * w) % 7).collect();
            relabelled[(3 * v) % 7].sort_unstable();
        }
        let zeros = vec![0; 7];
        let map = find_isomorphism(&c7, &relabelled, &zeros, &zeros).unwrap();
        assert!(is_isomorphism(&c7, &relabelled, &map));
    }
}
