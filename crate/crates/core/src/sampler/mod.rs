//! Exact uniform sampling of multisets of weighted types, realized as
//! disjoint unions of lattice quotients.
//!
//! One uniform integer `U < N(n)` is drawn per sample and unranked: weight
//! classes are visited from `n` down to `1`, and at class `j` the
//! multiplicity `k` is the block of `U` among blocks of sizes
//! `C(γ(j)+k-1, k) · N_{<j}(m - jk)`; the quotient and remainder of `U` within
//! that block select the multiset of types and the rest of the sample.
//! `N_{<j}` is recovered from `N_{≤j}` in place by removing one factor
//! `1/(1 - z^j)` per type, so a whole batch shares one pass over the table.

mod limbs;

use std::cmp::Ordering;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::census::CensusTable;
use crate::error::{Error, Result};
use crate::quotient::{aut_lower_bound_log, build_quotient, vertex_locally_lattice, LocalGraph};
use limbs::{big_to_limbs, cmp_limbs, limbs_to_big, sub_limbs, LimbTable};

/// Samples drawn per pass over the table.
const CHUNK: u64 = 16384;

/// The per-sample generator: ChaCha8 keyed by `seed`, on stream `index`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform integer in `[0, bound)` by rejection on `bits(bound)` random bits.
fn uniform_below(rng: &mut impl RngCore, bound: &BigUint, width: usize) -> Vec<u64> {
    let bits = bound.bits() as usize;
    let nlimbs = bits.div_ceil(64);
    let bound_limbs = big_to_limbs(bound, width);
    loop {
        let mut x = vec![0u64; width];
        for limb in x.iter_mut().take(nlimbs) {
            *limb = rng.next_u64();
        }
        if !bits.is_multiple_of(64) {
            x[nlimbs - 1] &= (1u64 << (bits % 64)) - 1;
        }
        if cmp_limbs(&x, &bound_limbs) == Ordering::Less {
            return x;
        }
    }
}

/// A drawn multiset: `(weight, position among the γ(weight) types)`, by
/// descending weight.
pub type Parts = Vec<(u64, u64)>;

/// `N(0..=n)` for a weight sequence `γ`, ready to draw from.
#[derive(Clone, Debug)]
pub struct Sampler {
    gamma: Vec<u64>,
    n: usize,
    table: LimbTable,
    total: BigUint,
}

struct State {
    u: Vec<u64>,
    m: usize,
    parts: Parts,
    bound: Option<BigUint>,
}

impl Sampler {
    /// Errors with `EmptySupport` when `N(n) = 0`.
    pub fn new(gamma: &[u64], n: u64, what: &'static str) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("sampling needs n >= 1".into()));
        }
        let n_us = n as usize;
        let mut g = vec![0u64; n_us + 1];
        for (j, &x) in gamma.iter().enumerate().take(n_us + 1).skip(1) {
            g[j] = x;
        }
        let mut table = LimbTable::unit(n_us);
        for (j, &count) in g.iter().enumerate().skip(1) {
            for _ in 0..count {
                table.push_factor(j);
            }
        }
        let total = table.to_big(n_us);
        if total.is_zero() {
            return Err(Error::EmptySupport { what, n });
        }
        Ok(Self { gamma: g, n: n_us, table, total })
    }

    /// Size of the support.
    pub fn count(&self) -> &BigUint {
        &self.total
    }

    pub fn n(&self) -> u64 {
        self.n as u64
    }

    /// Draws samples `indices` under `seed`. With `audit`, also checks at
    /// every visited state that the block sizes sum to `N_{≤j}(m)`.
    pub fn draw(&self, seed: u64, indices: std::ops::Range<u64>, audit: bool) -> Result<Vec<Parts>> {
        let width = self.table.width();
        let mut states: Vec<State> = indices
            .map(|i| State {
                u: uniform_below(&mut sample_rng(seed, i), &self.total, width),
                m: self.n,
                parts: Vec::new(),
                bound: None,
            })
            .collect();
        let mut table = self.table.clone();
        for j in (1..=self.n).rev() {
            let g = self.gamma[j];
            if g == 0 {
                continue;
            }
            let Some(top) = states.iter().map(|s| s.m).max() else { break };
            if top < j {
                continue;
            }
            if audit {
                for s in &mut states {
                    s.bound = Some(table.to_big(s.m));
                }
            }
            for _ in 0..g {
                table.pop_factor(j, top);
            }
            let step = |s: &mut State| if s.m >= j { decide(&table, j, g, s) } else { Ok(()) };
            if states.len() >= 256 {
                states.par_iter_mut().try_for_each(step)?;
            } else {
                states.iter_mut().try_for_each(step)?;
            }
        }
        states
            .into_iter()
            .map(|s| match s.m {
                0 => Ok(s.parts),
                m => Err(Error::Internal(format!("sample ended with weight {m} unassigned"))),
            })
            .collect()
    }
}

fn decide(table: &LimbTable, j: usize, g: u64, s: &mut State) -> Result<()> {
    let overrun = || Error::Internal(format!("rank exceeds class {j} blocks"));
    if g == 1 && s.bound.is_none() {
        let mut k = 0;
        loop {
            let row = table.row(s.m - j * k);
            if cmp_limbs(&s.u, row) == Ordering::Less {
                break;
            }
            sub_limbs(&mut s.u, row);
            k += 1;
            if j * k > s.m {
                return Err(overrun());
            }
        }
        s.parts.extend(std::iter::repeat_n((j as u64, 0), k));
        s.m -= j * k;
        return Ok(());
    }
    let mut u = limbs_to_big(&s.u);
    let mut coef = BigUint::one();
    let mut k = 0usize;
    let (q, block) = loop {
        if j * k > s.m {
            return Err(overrun());
        }
        let rest = table.to_big(s.m - j * k);
        let w = &coef * &rest;
        if u < w {
            let (q, r) = u.div_rem(&rest);
            u = r;
            break (q, rest);
        }
        u -= w;
        k += 1;
        coef = coef * BigUint::from(g + k as u64 - 1) / BigUint::from(k as u64);
    };
    if let Some(bound) = s.bound.take() {
        // blocks before k were subtracted; add the chosen block and the rest
        let mut sum = BigUint::zero();
        let mut c = BigUint::one();
        for kk in 0..=s.m / j {
            if kk > 0 {
                c = c * BigUint::from(g + kk as u64 - 1) / BigUint::from(kk as u64);
            }
            sum += &c * table.to_big(s.m - j * kk);
        }
        if sum != bound {
            return Err(Error::Internal(format!("class {j} blocks sum to {sum}, expected {bound}")));
        }
    }
    debug_assert!(!block.is_zero());
    for pos in unrank_multiset(q, g, k) {
        s.parts.push((j as u64, pos));
    }
    s.m -= j * k;
    s.u = big_to_limbs(&u, s.u.len());
    Ok(())
}

/// The `q`-th size-`k` multiset over `0..g` (colex order of the matching
/// `k`-subsets of `0..g+k-1`), listed non-increasingly.
fn unrank_multiset(mut q: BigUint, g: u64, k: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(k);
    for i in (1..=k as u64).rev() {
        // largest c with C(c, i) <= q
        let mut c = i - 1;
        let mut cur = BigUint::zero();
        let mut next = BigUint::one();
        while next <= q {
            c += 1;
            cur = next.clone();
            next = next * BigUint::from(c + 1) / BigUint::from(c + 1 - i);
        }
        q -= cur;
        out.push(c - (i - 1));
    }
    debug_assert!(q.is_zero());
    debug_assert!(out.iter().all(|&x| x < g));
    out
}

/// A uniformly random partition of `n` with parts at least `min_part`,
/// non-increasing.
pub fn sample_restricted_partition(n: u64, min_part: u64, seed: u64) -> Result<Vec<u64>> {
    Ok(sample_partitions(n, min_part, seed, 0..1)?.pop().expect("one sample"))
}

/// Restricted partitions for sample `indices` under `seed`.
pub fn sample_partitions(n: u64, min_part: u64, seed: u64, indices: std::ops::Range<u64>) -> Result<Vec<Vec<u64>>> {
    if min_part == 0 {
        return Err(Error::InvalidParameter("min_part must be at least 1".into()));
    }
    let sampler = Sampler::new(&crate::counting::min_part_gamma(min_part, n), n, "partition")?;
    let mut out = Vec::with_capacity((indices.end - indices.start) as usize);
    let mut start = indices.start;
    while start < indices.end {
        let end = (start + CHUNK).min(indices.end);
        out.extend(sampler.draw(seed, start..end, false)?.into_iter().map(|p| p.into_iter().map(|(j, _)| j).collect()));
        start = end;
    }
    Ok(out)
}

/// Parameters of a census-model sample.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SampleSpec {
    pub d: usize,
    pub r: u64,
    pub n: u64,
    pub seed: u64,
    /// Radius of the local-limit check; `r + 1` when unset.
    pub radius: Option<u32>,
    /// Check block sums at every step.
    pub audit: bool,
}

impl SampleSpec {
    pub fn new(d: usize, r: u64, n: u64, seed: u64) -> Self {
        Self { d, r, n, seed, radius: None, audit: false }
    }

    pub fn radius(&self) -> u32 {
        self.radius.unwrap_or(self.r as u32 + 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct OrbitId {
    pub index: u64,
    /// Position in the census orbit list at `index`.
    pub position: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleReport {
    pub sample: u64,
    pub n: u64,
    /// Non-increasing.
    pub component_orders: Vec<u64>,
    pub largest: u64,
    pub orbit_ids: Vec<OrbitId>,
    pub aut_log_lower_bound: f64,
    pub radius: u32,
    /// Fraction of vertices whose radius ball matches that of `L^d`.
    pub local_limit_fraction: f64,
}

/// A census paired with the count table for one `n`.
pub struct CensusSampler<'a> {
    census: &'a CensusTable,
    spec: SampleSpec,
    sampler: Sampler,
}

impl<'a> CensusSampler<'a> {
    pub fn new(census: &'a CensusTable, spec: SampleSpec) -> Result<Self> {
        if spec.d != census.d || spec.r != census.r {
            return Err(Error::InvalidParameter(format!(
                "census is for d={}, r={}, sample asks d={}, r={}",
                census.d, census.r, spec.d, spec.r
            )));
        }
        if spec.n > census.max_index {
            return Err(Error::MissingCensus { have: census.max_index, need: spec.n });
        }
        let sampler = Sampler::new(&census.gamma, spec.n, "graph")?;
        Ok(Self { census, spec, sampler })
    }

    pub fn count(&self) -> &BigUint {
        self.sampler.count()
    }

    pub fn spec(&self) -> &SampleSpec {
        &self.spec
    }

    pub fn draw(&self, indices: std::ops::Range<u64>) -> Result<Vec<Parts>> {
        self.sampler.draw(self.spec.seed, indices, self.spec.audit)
    }

    /// Disjoint union of the quotients for `parts`, in order.
    pub fn realize(&self, parts: &Parts) -> Result<LocalGraph> {
        let graphs = parts
            .iter()
            .map(|&(j, pos)| build_quotient(&self.census.orbits_at(j)?[pos as usize].rep))
            .collect::<Result<Vec<_>>>()?;
        Ok(LocalGraph::disjoint_union(graphs))
    }

    pub fn report(&self, sample: u64, parts: &Parts, g: &LocalGraph) -> SampleReport {
        let radius = self.spec.radius();
        let mut matched = 0usize;
        for c in g.components() {
            if c.provenance.is_some() {
                // quotients are vertex-transitive
                if vertex_locally_lattice(g, c.vertices[0] as usize, self.spec.d, radius) {
                    matched += c.vertices.len();
                }
            } else {
                matched += c.vertices.iter().filter(|&&v| vertex_locally_lattice(g, v as usize, self.spec.d, radius)).count();
            }
        }
        let mut orders: Vec<u64> = parts.iter().map(|&(j, _)| j).collect();
        orders.sort_unstable_by(|a, b| b.cmp(a));
        SampleReport {
            sample,
            n: self.spec.n,
            largest: orders.first().copied().unwrap_or(0),
            component_orders: orders,
            orbit_ids: parts.iter().map(|&(index, position)| OrbitId { index, position }).collect(),
            aut_log_lower_bound: aut_lower_bound_log(g),
            radius,
            local_limit_fraction: if g.order() == 0 { 1.0 } else { matched as f64 / g.order() as f64 },
        }
    }

    /// Graphs and reports for `indices`, in order.
    pub fn sample_range(&self, indices: std::ops::Range<u64>) -> Result<Vec<(LocalGraph, SampleReport)>> {
        let start = indices.start;
        let parts = self.draw(indices)?;
        parts
            .par_iter()
            .enumerate()
            .map(|(i, p)| {
                let g = self.realize(p)?;
                let rep = self.report(start + i as u64, p, &g);
                Ok((g, rep))
            })
            .collect()
    }
}

/// One uniform sample (sample index 0 of `spec.seed`).
pub fn sample_graph(census: &CensusTable, spec: SampleSpec) -> Result<(LocalGraph, SampleReport)> {
    Ok(CensusSampler::new(census, spec)?.sample_range(0..1)?.pop().expect("one sample"))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Quantiles {
    pub min: u64,
    pub p10: u64,
    pub p50: u64,
    pub p90: u64,
    pub p99: u64,
    pub max: u64,
}

impl Quantiles {
    /// Nearest-rank quantiles; `None` for no data.
    pub fn of(mut xs: Vec<u64>) -> Option<Self> {
        if xs.is_empty() {
            return None;
        }
        xs.sort_unstable();
        let at = |q: f64| xs[((q * xs.len() as f64).ceil() as usize).clamp(1, xs.len()) - 1];
        Some(Self { min: xs[0], p10: at(0.1), p50: at(0.5), p90: at(0.9), p99: at(0.99), max: xs[xs.len() - 1] })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Aggregate {
    pub samples: u64,
    pub d: usize,
    pub r: u64,
    pub n: u64,
    pub seed: u64,
    pub radius: u32,
    pub largest: Option<Quantiles>,
    /// Fraction of samples whose largest component has order `<= n^{5/6}`.
    pub largest_below_n56: Option<f64>,
    pub mean_components: Option<f64>,
    pub mean_local_limit_fraction: Option<f64>,
    pub mean_aut_log_lower_bound: Option<f64>,
}

/// Draws `samples` reports, passing each to `emit` in sample order, and
/// aggregates them.
pub fn batch_experiment(
    census: &CensusTable,
    spec: SampleSpec,
    samples: u64,
    mut emit: impl FnMut(&SampleReport) -> Result<()>,
) -> Result<Aggregate> {
    let radius = spec.radius();
    let mut agg = Aggregate {
        samples,
        d: spec.d,
        r: spec.r,
        n: spec.n,
        seed: spec.seed,
        radius,
        largest: None,
        largest_below_n56: None,
        mean_components: None,
        mean_local_limit_fraction: None,
        mean_aut_log_lower_bound: None,
    };
    if samples == 0 {
        return Ok(agg);
    }
    let sampler = CensusSampler::new(census, spec)?;
    let cap = (sampler.spec.n as f64).powf(5.0 / 6.0);
    let mut largest = Vec::with_capacity(samples as usize);
    let (mut comps, mut local, mut aut, mut below) = (0.0, 0.0, 0.0, 0u64);
    let mut start = 0;
    while start < samples {
        let end = (start + CHUNK).min(samples);
        for (_, rep) in sampler.sample_range(start..end)? {
            emit(&rep)?;
            largest.push(rep.largest);
            below += u64::from(rep.largest as f64 <= cap);
            comps += rep.component_orders.len() as f64;
            local += rep.local_limit_fraction;
            aut += rep.aut_log_lower_bound;
        }
        start = end;
    }
    let k = samples as f64;
    agg.largest = Quantiles::of(largest);
    agg.largest_below_n56 = Some(below as f64 / k);
    agg.mean_components = Some(comps / k);
    agg.mean_local_limit_fraction = Some(local / k);
    agg.mean_aut_log_lower_bound = Some(aut / k);
    Ok(agg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::census::build_census;
    use crate::counting::{count_table, restricted_partition_count};
    use crate::quotient::is_r_locally_lattice;
    use std::collections::BTreeMap;

    #[test]
    fn multiset_unranking_is_a_bijection() {
        for (g, k) in [(1u64, 4usize), (3, 2), (4, 3), (5, 1), (2, 5)] {
            let total = num_integer::binomial(g + k as u64 - 1, k as u64);
            let mut seen = std::collections::BTreeSet::new();
            for q in 0..total {
                let ms = unrank_multiset(BigUint::from(q), g, k);
                assert_eq!(ms.len(), k);
                assert!(ms.windows(2).all(|w| w[0] >= w[1]));
                assert!(ms.iter().all(|&x| x < g));
                seen.insert(ms);
            }
            assert_eq!(seen.len() as u64, total);
        }
    }

    #[test]
    fn unique_cycle() {
        let census = build_census(1, 1, 10).unwrap();
        for seed in 0..5 {
            let (g, rep) = sample_graph(&census, SampleSpec::new(1, 1, 4, seed)).unwrap();
            assert_eq!((g.order(), g.edge_count()), (4, 4));
            assert_eq!(rep.component_orders, vec![4]);
        }
    }

    #[test]
    fn empty_support() {
        let census = build_census(2, 2, 20).unwrap();
        assert!(matches!(
            sample_graph(&census, SampleSpec::new(2, 2, 17, 0)),
            Err(Error::EmptySupport { what: "graph", n: 17 })
        ));
        assert!(matches!(sample_restricted_partition(3, 4, 0), Err(Error::EmptySupport { .. })));
        assert!(matches!(sample_graph(&census, SampleSpec::new(2, 2, 21, 0)), Err(Error::MissingCensus { .. })));
    }

    #[test]
    fn two_graphs_on_eight_vertices() {
        let census = build_census(1, 1, 8).unwrap();
        let s = CensusSampler::new(&census, SampleSpec::new(1, 1, 8, 11)).unwrap();
        let mut freq = BTreeMap::new();
        for p in s.draw(0..4000).unwrap() {
            *freq.entry(p).or_insert(0) += 1;
        }
        assert_eq!(freq.len(), 2);
        assert!(freq.values().all(|&c| (1800..=2200).contains(&c)), "{freq:?}");
    }

    #[test]
    fn partitions_of_ten() {
        assert_eq!(sample_restricted_partition(4, 4, 3).unwrap(), vec![4]);
        let mut freq = BTreeMap::new();
        for p in sample_partitions(10, 4, 5, 0..3000).unwrap() {
            *freq.entry(p).or_insert(0) += 1;
        }
        let keys: Vec<_> = freq.keys().cloned().collect();
        assert_eq!(keys, vec![vec![5, 5], vec![6, 4], vec![10]]);
        assert!(freq.values().all(|&c| (900..=1100).contains(&c)), "{freq:?}");
    }

    #[test]
    fn support_is_covered_and_audited() {
        // every partition of 24 into parts >= 4 shows up
        let census = build_census(1, 1, 24).unwrap();
        let mut spec = SampleSpec::new(1, 1, 24, 2);
        spec.audit = true;
        let s = CensusSampler::new(&census, spec).unwrap();
        let want = restricted_partition_count(24, 4).unwrap();
        assert_eq!(s.count(), &want);
        let seen: std::collections::BTreeSet<_> = s.draw(0..3000).unwrap().into_iter().collect();
        assert_eq!(BigUint::from(seen.len()), want);
    }

    #[test]
    fn census_samples_verify() {
        let census = build_census(2, 2, 80).unwrap();
        let mut spec = SampleSpec::new(2, 2, 72, 9);
        spec.audit = true;
        let s = CensusSampler::new(&census, spec).unwrap();
        assert_eq!(s.count(), &count_table(&census, 72).unwrap().b[72]);
        for (g, rep) in s.sample_range(0..40).unwrap() {
            assert_eq!(rep.component_orders.iter().sum::<u64>(), 72);
            assert_eq!(g.order(), 72);
            assert!(is_r_locally_lattice(&g, 2, 2));
        }
    }

    #[test]
    fn draws_are_reproducible_and_order_independent() {
        let census = build_census(2, 2, 60).unwrap();
        let s = CensusSampler::new(&census, SampleSpec::new(2, 2, 54, 77)).unwrap();
        let all = s.draw(0..30).unwrap();
        assert_eq!(all, s.draw(0..30).unwrap());
        assert_eq!(all[10..20], s.draw(10..20).unwrap()[..]);
    }

    #[test]
    fn batch_aggregates() {
        let census = build_census(1, 1, 40).unwrap();
        let spec = SampleSpec::new(1, 1, 40, 1);
        let empty = batch_experiment(&census, spec.clone(), 0, |_| Ok(())).unwrap();
        assert!(empty.largest.is_none() && empty.mean_local_limit_fraction.is_none());
        let mut lines = Vec::new();
        let a = batch_experiment(&census, spec.clone(), 50, |r| {
            lines.push(serde_json::to_string(r)?);
            Ok(())
        })
        .unwrap();
        let b = batch_experiment(&census, spec, 50, |_| Ok(())).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert_eq!(lines.len(), 50);
        // radius 2 needs cycles of length >= 6; parts 4 and 5 fail
        assert!(a.mean_local_limit_fraction.unwrap() < 1.0);
    }

    #[test]
    fn quantiles() {
        let q = Quantiles::of((1..=100).collect()).unwrap();
        assert_eq!((q.min, q.p10, q.p50, q.p90, q.p99, q.max), (1, 10, 50, 90, 99, 100));
        assert!(Quantiles::of(Vec::new()).is_none());
    }
}
