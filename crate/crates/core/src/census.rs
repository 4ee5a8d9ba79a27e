//! Census of connected `r`-locally-`L^d` graphs among quotients by
//! pure-translation subgroups, i.e. `B_d`-orbits of sublattices with minimum
//! distance at least `2r+2`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::c_constant;
use crate::error::{Error, Result};
use crate::lattice::{
    for_each_hnf, is_invariant, min_distance_at_least, sublattice_count, Hyperoctahedral, OrbitClass,
    SignedPermutation, SublatticeHNF, DEFAULT_MAX_DIM,
};

/// Indices per cache shard.
pub const SHARD_SIZE: u64 = 250;

/// Least radius for which the pure-translation census is asymptotically exact.
pub fn r_star(d: usize) -> u64 {
    match d {
        0 | 1 => 1,
        2 => 2,
        3..=7 => 3,
        _ => (d as u64 - 1).div_ceil(2),
    }
}

#[derive(Clone, Debug, Default)]
pub struct CensusOptions {
    /// Largest dimension accepted; defaults to [`DEFAULT_MAX_DIM`].
    pub max_dim: Option<usize>,
    /// Directory for per-shard `γ` files.
    pub cache_dir: Option<PathBuf>,
    /// Reuse shards already present in `cache_dir`.
    pub resume: bool,
}

impl CensusOptions {
    /// Options with `cache_dir` taken from `LOCOGRAPH_CACHE` when set.
    pub fn from_env() -> Self {
        Self { cache_dir: std::env::var_os("LOCOGRAPH_CACHE").map(PathBuf::from), ..Self::default() }
    }
}

/// `γ(1..=max_index)` plus lazily materialized orbit lists.
#[derive(Debug)]
pub struct CensusTable {
    pub d: usize,
    pub r: u64,
    pub max_index: u64,
    /// `gamma[n]` for `n` in `0..=max_index`; `gamma[0] = 0`.
    pub gamma: Vec<u64>,
    orbits: Vec<OnceLock<Vec<OrbitClass>>>,
}

impl Clone for CensusTable {
    fn clone(&self) -> Self {
        let orbits = self
            .orbits
            .iter()
            .map(|cell| {
                let out = OnceLock::new();
                if let Some(v) = cell.get() {
                    let _ = out.set(v.clone());
                }
                out
            })
            .collect();
        Self { d: self.d, r: self.r, max_index: self.max_index, gamma: self.gamma.clone(), orbits }
    }
}

impl CensusTable {
    fn new(d: usize, r: u64, gamma: Vec<u64>) -> Self {
        let max_index = gamma.len() as u64 - 1;
        let orbits = (0..gamma.len()).map(|_| OnceLock::new()).collect();
        Self { d, r, max_index, gamma, orbits }
    }

    /// Minimum distance required of census lattices.
    pub fn threshold(&self) -> u64 {
        2 * self.r + 2
    }

    /// The census orbits at index `n`, sorted by representative.
    pub fn orbits_at(&self, n: u64) -> Result<&[OrbitClass]> {
        if n > self.max_index {
            return Err(Error::MissingCensus { have: self.max_index, need: n });
        }
        let list = self.orbits[n as usize].get_or_init(|| census_orbits(self.d, n, self.threshold()));
        if list.len() as u64 != self.gamma[n as usize] {
            return Err(Error::Internal(format!(
                "census at index {n}: {} orbits re-enumerated, γ = {}",
                list.len(),
                self.gamma[n as usize]
            )));
        }
        Ok(list)
    }

    /// First index with `γ > 0`.
    pub fn first_nonzero(&self) -> Option<u64> {
        self.gamma.iter().position(|&g| g > 0).map(|n| n as u64)
    }
}

fn check_params(d: usize, r: u64, opts: &CensusOptions) -> Result<()> {
    let max_dim = opts.max_dim.unwrap_or(DEFAULT_MAX_DIM);
    if d == 0 || d > max_dim {
        return Err(Error::InvalidParameter(format!("d must lie in 1..={max_dim}, got {d}")));
    }
    if r == 0 {
        return Err(Error::InvalidParameter("r must be at least 1".into()));
    }
    if d >= 2 && r < r_star(d) {
        return Err(Error::RadiusBelowThreshold { d, r, r_star: r_star(d) });
    }
    Ok(())
}

/// Census over indices `1..=max_index` with default options.
pub fn build_census(d: usize, r: u64, max_index: u64) -> Result<CensusTable> {
    build_census_with(d, r, max_index, &CensusOptions::default())
}

pub fn build_census_with(d: usize, r: u64, max_index: u64, opts: &CensusOptions) -> Result<CensusTable> {
    check_params(d, r, opts)?;
    let t = 2 * r + 2;
    if d == 1 {
        let gamma = (0..=max_index).map(|n| u64::from(n >= t)).collect();
        return Ok(CensusTable::new(d, r, gamma));
    }
    let group = Hyperoctahedral::new(d);
    let mut gamma = vec![0u64];
    let mut start = 1;
    while start <= max_index {
        let end = (start + SHARD_SIZE - 1).min(max_index);
        let shard = match &opts.cache_dir {
            Some(dir) if opts.resume => read_shard(dir, d, r, start, end)?,
            _ => None,
        };
        let shard = match shard {
            Some(s) => s,
            None => {
                let s: Vec<u64> = (start..=end).into_par_iter().map(|n| count_census_orbits(&group, n, t)).collect();
                if let Some(dir) = &opts.cache_dir {
                    write_shard(dir, d, r, start, &s)?;
                }
                s
            }
        };
        gamma.extend(shard);
        start = end + 1;
    }
    Ok(CensusTable::new(d, r, gamma))
}

fn count_census_orbits(group: &Hyperoctahedral, n: u64, t: u64) -> u64 {
    let mut count = 0;
    for_each_hnf(group.dim(), n, |l| {
        if min_distance_at_least(l, t) && group.is_orbit_rep(l) {
            count += 1;
        }
    });
    count
}

fn census_orbits(d: usize, n: u64, t: u64) -> Vec<OrbitClass> {
    if n == 0 {
        return Vec::new();
    }
    if d == 1 {
        return if n >= t { vec![Hyperoctahedral::new(1).orbit_of(&SublatticeHNF::scaled(1, n as i64))] } else { Vec::new() };
    }
    let group = Hyperoctahedral::new(d);
    let mut out = Vec::new();
    for_each_hnf(d, n, |l| {
        if min_distance_at_least(l, t) && group.is_orbit_rep(l) {
            out.push(group.orbit_of(l));
        }
    });
    out.sort_by(|a, b| a.rep.cmp(&b.rep));
    out
}

#[derive(Serialize, Deserialize)]
struct Shard {
    d: usize,
    r: u64,
    start: u64,
    gamma: Vec<u64>,
}

fn shard_path(dir: &Path, d: usize, r: u64, start: u64) -> PathBuf {
    dir.join(format!("census-d{d}-r{r}-{start:08}.json"))
}

fn read_shard(dir: &Path, d: usize, r: u64, start: u64, end: u64) -> Result<Option<Vec<u64>>> {
    let path = shard_path(dir, d, r, start);
    let Ok(text) = fs::read_to_string(&path) else { return Ok(None) };
    let shard: Shard = serde_json::from_str(&text)?;
    // a shard written for a smaller max_index may be short; recompute then
    if shard.d != d || shard.r != r || shard.start != start || (shard.gamma.len() as u64) < end - start + 1 {
        return Ok(None);
    }
    Ok(Some(shard.gamma[..(end - start + 1) as usize].to_vec()))
}

fn write_shard(dir: &Path, d: usize, r: u64, start: u64, gamma: &[u64]) -> Result<()> {
    fs::create_dir_all(dir)?;
    let path = shard_path(dir, d, r, start);
    if let Some(existing) = read_shard(dir, d, r, start, start + gamma.len() as u64 - 1)? {
        if existing.len() >= gamma.len() {
            return Ok(());
        }
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, serde_json::to_vec(&Shard { d, r, start, gamma: gamma.to_vec() })?)?;
    fs::rename(tmp, path)?;
    Ok(())
}

#[derive(Serialize)]
struct CensusRecord<'a> {
    n: u64,
    gamma: u64,
    orbits: &'a [OrbitClass],
}

/// One `{"n","gamma","orbits"}` line per index `1..=max_index`.
pub fn write_census_jsonl(table: &CensusTable, out: &mut impl Write) -> Result<()> {
    for n in 1..=table.max_index {
        let orbits = table.orbits_at(n)?;
        serde_json::to_writer(&mut *out, &CensusRecord { n, gamma: table.gamma[n as usize], orbits })?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// `n,gamma` rows (header included).
pub fn write_gamma_csv(table: &CensusTable, out: &mut impl Write) -> Result<()> {
    writeln!(out, "n,gamma")?;
    for n in 1..=table.max_index {
        writeln!(out, "{n},{}", table.gamma[n as usize])?;
    }
    Ok(())
}

/// Total number of sublattices of index at most `x`.
pub fn total_lattices(d: usize, x: u64) -> u128 {
    (1..=x).map(|n| sublattice_count(d, n)).sum()
}

/// Number of sublattices of index at most `x` fixed by `σ`.
pub fn count_invariant_lattices(d: usize, sigma: &SignedPermutation, x: u64) -> u64 {
    assert_eq!(sigma.dim(), d, "dimension mismatch");
    (1..=x)
        .into_par_iter()
        .map(|n| {
            let mut c = 0;
            for_each_hnf(d, n, |l| c += u64::from(is_invariant(sigma, l)));
            c
        })
        .sum()
}

/// Number of sublattices of index at most `x` with minimum distance at most `r`.
pub fn count_small_distance_lattices(d: usize, r: u64, x: u64) -> u64 {
    if r == 0 {
        return 0;
    }
    (1..=x)
        .into_par_iter()
        .map(|n| {
            let mut c = 0;
            for_each_hnf(d, n, |l| c += u64::from(!min_distance_at_least(l, r + 1)));
            c
        })
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OrbitCountReport {
    pub x: u64,
    pub orbits: u64,
    pub predicted: f64,
    pub ratio: f64,
}

/// Exact number of `B_d`-orbits of sublattices with index `<= x`, against `c_d x^d`.
pub fn orbit_count_vs_cd(d: usize, x: u64) -> Result<OrbitCountReport> {
    if d < 2 {
        return Err(Error::InvalidParameter("orbit_count_vs_cd needs d >= 2".into()));
    }
    let group = Hyperoctahedral::new(d);
    let orbits: u64 = (1..=x)
        .into_par_iter()
        .map(|n| {
            let mut c = 0;
            for_each_hnf(d, n, |l| c += u64::from(group.is_orbit_rep(l)));
            c
        })
        .sum();
    let predicted = c_constant(d)? * (x as f64).powi(d as i32);
    Ok(OrbitCountReport { x, orbits, predicted, ratio: orbits as f64 / predicted })
}
