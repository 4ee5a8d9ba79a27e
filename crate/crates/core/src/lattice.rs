//! Finite-index sublattices of `Z^d` in Hermite normal form, and the action of
//! the hyperoctahedral group `B_d` (signed coordinate permutations) on them.
//!
//! A sublattice is stored by its upper-triangular basis: column `j` is a basis
//! vector, `cols[i][i] >= 1` and `0 <= cols[i][j] < cols[i][i]` for `j > i`.
//! This form is unique, so structural equality of [`SublatticeHNF`] values is
//! lattice equality, and the derived `Ord` is the row-major lexicographic
//! order used to pick orbit representatives.

use std::collections::BTreeSet;
use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest dimension accepted without an explicit override.
pub const DEFAULT_MAX_DIM: usize = 4;

/// Canonical (Hermite normal form) basis of a full-rank sublattice of `Z^d`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SublatticeHNF {
    d: usize,
    /// Row-major `d x d` entries.
    entries: Vec<i64>,
}

impl SublatticeHNF {
    /// `Z^d` itself.
    pub fn identity(d: usize) -> Self {
        Self::scaled(d, 1)
    }

    /// `m * Z^d`.
    pub fn scaled(d: usize, m: i64) -> Self {
        assert!(d >= 1 && m >= 1);
        let mut entries = vec![0; d * d];
        for i in 0..d {
            entries[i * d + i] = m;
        }
        Self { d, entries }
    }

    /// Builds a lattice from row-major matrix rows, checking the normal-form
    /// conditions.
    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let d = rows.len();
        if d == 0 || rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidParameter("HNF matrix must be square and non-empty".into()));
        }
        let entries: Vec<i64> = rows.iter().flatten().copied().collect();
        let hnf = Self { d, entries };
        for i in 0..d {
            let pivot = hnf.entry(i, i);
            if pivot < 1 {
                return Err(Error::InvalidParameter(format!("diagonal entry ({i},{i}) must be >= 1")));
            }
            for j in 0..d {
                let v = hnf.entry(i, j);
                if j < i && v != 0 {
                    return Err(Error::InvalidParameter(format!("entry ({i},{j}) below the diagonal must be 0")));
                }
                if j > i && !(0..pivot).contains(&v) {
                    return Err(Error::InvalidParameter(format!(
                        "entry ({i},{j}) must lie in [0, {pivot})"
                    )));
                }
            }
        }
        Ok(hnf)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> i64 {
        self.entries[i * self.d + j]
    }

    pub fn diagonal(&self) -> Vec<i64> {
        (0..self.d).map(|i| self.entry(i, i)).collect()
    }

    /// `|Z^d / L|`, the product of the diagonal.
    pub fn index(&self) -> u64 {
        (0..self.d).map(|i| self.entry(i, i) as u64).product()
    }

    pub fn column(&self, j: usize) -> Vec<i64> {
        (0..self.d).map(|i| self.entry(i, j)).collect()
    }

    pub fn columns(&self) -> Vec<Vec<i64>> {
        (0..self.d).map(|j| self.column(j)).collect()
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.entries.chunks(self.d).map(<[i64]>::to_vec).collect()
    }

    /// Exact membership test by back-substitution against the triangular basis.
    pub fn contains(&self, x: &[i64]) -> bool {
        assert_eq!(x.len(), self.d, "dimension mismatch");
        let mut x = x.to_vec();
        for i in (0..self.d).rev() {
            let pivot = self.entry(i, i);
            if x[i] % pivot != 0 {
                return false;
            }
            let lambda = x[i] / pivot;
            if lambda != 0 {
                for (k, xk) in x.iter_mut().enumerate().take(i + 1) {
                    *xk -= lambda * self.entry(k, i);
                }
            }
        }
        true
    }

    /// Reduces `x` in place to the canonical coset representative
    /// `0 <= x[i] < cols[i][i]`.
    pub fn reduce(&self, x: &mut [i64]) {
        for i in (0..self.d).rev() {
            let q = x[i].div_euclid(self.entry(i, i));
            if q != 0 {
                for (k, xk) in x.iter_mut().enumerate().take(i + 1) {
                    *xk -= q * self.entry(k, i);
                }
            }
        }
    }

    /// Mixed-radix rank of a reduced coset representative.
    pub fn coset_rank(&self, reduced: &[i64]) -> usize {
        let mut rank = 0usize;
        for i in 0..self.d {
            rank = rank * self.entry(i, i) as usize + reduced[i] as usize;
        }
        rank
    }

    /// Inverse of [`coset_rank`](Self::coset_rank).
    pub fn coset_unrank(&self, mut rank: usize) -> Vec<i64> {
        let mut x = vec![0; self.d];
        for i in (0..self.d).rev() {
            let c = self.entry(i, i) as usize;
            x[i] = (rank % c) as i64;
            rank /= c;
        }
        x
    }

    /// Visits nonzero-or-zero lattice points with L1 norm `<= budget`; stops
    /// early when `visit` returns `true`. Returns whether it stopped early.
    fn visit_ball(&self, budget: i64, visit: &mut impl FnMut(&[i64]) -> bool) -> bool {
        let mut x = vec![0i64; self.d];
        self.visit_level(self.d, 0, budget, &mut x, visit)
    }

    fn visit_level(
        &self,
        level: usize,
        used: i64,
        budget: i64,
        x: &mut [i64],
        visit: &mut impl FnMut(&[i64]) -> bool,
    ) -> bool {
        if level == 0 {
            return visit(x);
        }
        let i = level - 1;
        let c = self.entry(i, i);
        let rem = budget - used;
        let base = x[i];
        let lo = (-rem - base).div_euclid(c) + i64::from((-rem - base).rem_euclid(c) != 0);
        let hi = (rem - base).div_euclid(c);
        for lambda in lo..=hi {
            for k in 0..=i {
                x[k] += lambda * self.entry(k, i);
            }
            let stop = self.visit_level(i, used + x[i].abs(), budget, x, visit);
            for k in 0..=i {
                x[k] -= lambda * self.entry(k, i);
            }
            if stop {
                return true;
            }
        }
        false
    }

    /// Some nonzero lattice vector with L1 norm `<= bound`, if one exists.
    pub fn short_vector(&self, bound: u64) -> Option<Vec<i64>> {
        let mut found = None;
        self.visit_ball(bound as i64, &mut |x| {
            if x.iter().any(|&v| v != 0) {
                found = Some(x.to_vec());
                true
            } else {
                false
            }
        });
        found
    }
}

impl fmt::Debug for SublatticeHNF {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HNF{:?}", self.rows())
    }
}

impl Serialize for SublatticeHNF {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SublatticeHNF {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<i64>>::deserialize(de)?;
        SublatticeHNF::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

fn divisors(m: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut k = 1;
    while k * k <= m {
        if m.is_multiple_of(k) {
            small.push(k);
            if k * k != m {
                large.push(m / k);
            }
        }
        k += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// Ordered factorisations `c_0 * c_1 * ... * c_{d-1} = n`, lexicographic.
pub fn diagonal_compositions(d: usize, n: u64) -> Vec<Vec<u64>> {
    fn rec(d: usize, m: u64, prefix: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if prefix.len() + 1 == d {
            prefix.push(m);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for c in divisors(m) {
            prefix.push(c);
            rec(d, m / c, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(d, n, &mut Vec::with_capacity(d), &mut out);
    out
}

/// Number of index-`n` sublattices of `Z^d` from the divisor-composition
/// formula `sum_{c_1...c_d = n} c_1^{d-1} c_2^{d-2} ... c_{d-1}`.
pub fn sublattice_count(d: usize, n: u64) -> u128 {
    diagonal_compositions(d, n)
        .iter()
        .map(|c| {
            c.iter()
                .enumerate()
                .map(|(i, &ci)| (ci as u128).pow((d - 1 - i) as u32))
                .product::<u128>()
        })
        .sum()
}

/// Calls `visit` once for every index-`n` sublattice of `Z^d`, in lexicographic
/// order of (diagonal, off-diagonal residues). The reference passed to `visit`
/// is only valid for the duration of the call.
pub fn for_each_hnf(d: usize, n: u64, mut visit: impl FnMut(&SublatticeHNF)) {
    assert!(d >= 1 && n >= 1);
    let slots: Vec<(usize, usize)> = (0..d).flat_map(|i| (i + 1..d).map(move |j| (i, j))).collect();
    let mut hnf = SublatticeHNF { d, entries: vec![0; d * d] };
    for diag in diagonal_compositions(d, n) {
        for (i, &c) in diag.iter().enumerate() {
            hnf.entries[i * d + i] = c as i64;
        }
        for &(i, j) in &slots {
            hnf.entries[i * d + j] = 0;
        }
        loop {
            visit(&hnf);
            // odometer over off-diagonal slots, last slot fastest
            let mut carried = true;
            for &(i, j) in slots.iter().rev() {
                let e = &mut hnf.entries[i * d + j];
                *e += 1;
                if *e < diag[i] as i64 {
                    carried = false;
                    break;
                }
                *e = 0;
            }
            if carried {
                break;
            }
        }
    }
}

/// Every index-`n` sublattice of `Z^d`, each exactly once, in deterministic
/// lexicographic order.
pub fn enumerate_hnf(d: usize, n: u64) -> Vec<SublatticeHNF> {
    let mut out = Vec::with_capacity(sublattice_count(d, n) as usize);
    for_each_hnf(d, n, |l| out.push(l.clone()));
    out
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1i128, 0i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

/// Hermite normal form of the lattice spanned by `gens` (a list of `d` column
/// vectors of length `d`).
pub fn hnf_canonicalize(gens: &[Vec<i64>]) -> Result<SublatticeHNF> {
    let d = gens.len();
    if d == 0 || gens.iter().any(|g| g.len() != d) {
        return Err(Error::InvalidParameter("need d generator columns of length d".into()));
    }
    // m[i][j]: row i of column j
    let mut m: Vec<Vec<i128>> = (0..d).map(|i| (0..d).map(|j| gens[j][i] as i128).collect()).collect();

    for i in (0..d).rev() {
        for k in 0..i {
            let b = m[i][k];
            if b == 0 {
                continue;
            }
            let a = m[i][i];
            let (g, x, y) = ext_gcd(a, b);
            let (p, q) = (a / g, b / g);
            for row in m.iter_mut().take(i + 1) {
                let (ci, ck) = (row[i], row[k]);
                row[i] = x * ci + y * ck;
                row[k] = -q * ci + p * ck;
            }
        }
        if m[i][i] == 0 {
            return Err(Error::DegenerateLattice);
        }
        if m[i][i] < 0 {
            for row in m.iter_mut().take(i + 1) {
                row[i] = -row[i];
            }
        }
    }
    for i in (0..d).rev() {
        let pivot = m[i][i];
        for j in i + 1..d {
            let q = m[i][j].div_euclid(pivot);
            if q != 0 {
                for row in m.iter_mut().take(i + 1) {
                    row[j] -= q * row[i];
                }
            }
        }
    }
    let mut entries = Vec::with_capacity(d * d);
    for row in &m {
        for &v in row {
            entries.push(i64::try_from(v).map_err(|_| Error::Internal("HNF entry overflow".into()))?);
        }
    }
    Ok(SublatticeHNF { d, entries })
}

/// Element of `B_d`: `e_i -> signs[i] * e_{perm[i]}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignedPermutation {
    perm: Vec<usize>,
    signs: Vec<i8>,
}

impl SignedPermutation {
    pub fn new(perm: Vec<usize>, signs: Vec<i8>) -> Result<Self> {
        let d = perm.len();
        if signs.len() != d {
            return Err(Error::InvalidParameter("perm and signs differ in length".into()));
        }
        let mut seen = vec![false; d];
        for &p in &perm {
            if p >= d || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidParameter("perm is not a bijection".into()));
            }
        }
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidParameter("signs must be +1 or -1".into()));
        }
        Ok(Self { perm, signs })
    }

    pub fn identity(d: usize) -> Self {
        Self { perm: (0..d).collect(), signs: vec![1; d] }
    }

    pub fn negation(d: usize) -> Self {
        Self { perm: (0..d).collect(), signs: vec![-1; d] }
    }

    /// Exchanges coordinates `a` and `b`.
    pub fn swap(d: usize, a: usize, b: usize) -> Self {
        let mut perm: Vec<usize> = (0..d).collect();
        perm.swap(a, b);
        Self { perm, signs: vec![1; d] }
    }

    /// Negates coordinate `axis`.
    pub fn flip(d: usize, axis: usize) -> Self {
        let mut signs = vec![1; d];
        signs[axis] = -1;
        Self { perm: (0..d).collect(), signs }
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim());
        let perm = other.perm.iter().map(|&p| self.perm[p]).collect();
        let signs = (0..self.dim()).map(|i| other.signs[i] * self.signs[other.perm[i]]).collect();
        Self { perm, signs }
    }

    pub fn inverse(&self) -> Self {
        let d = self.dim();
        let mut perm = vec![0; d];
        let mut signs = vec![1; d];
        for i in 0..d {
            perm[self.perm[i]] = i;
            signs[self.perm[i]] = self.signs[i];
        }
        Self { perm, signs }
    }

    pub fn apply(&self, v: &[i64]) -> Vec<i64> {
        let mut out = vec![0; v.len()];
        for (i, &vi) in v.iter().enumerate() {
            out[self.perm[i]] = self.signs[i] as i64 * vi;
        }
        out
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.dim())
    }

    /// All `2^d d!` elements of `B_d`, in a fixed order.
    pub fn all(d: usize) -> Vec<Self> {
        let mut out = Vec::with_capacity(group_order(d) as usize);
        for perm in (0..d).permutations(d) {
            for mask in 0u32..(1 << d) {
                let signs = (0..d).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect();
                out.push(Self { perm: perm.clone(), signs });
            }
        }
        out
    }
}

/// `|B_d| = 2^d d!`.
pub fn group_order(d: usize) -> u64 {
    (1..=d as u64).product::<u64>() << d
}

/// `σ(L)` in canonical form.
pub fn apply_signed_perm(sigma: &SignedPermutation, l: &SublatticeHNF) -> SublatticeHNF {
    assert_eq!(sigma.dim(), l.dim(), "dimension mismatch");
    let images: Vec<Vec<i64>> = l.columns().iter().map(|c| sigma.apply(c)).collect();
    hnf_canonicalize(&images).expect("signed permutations preserve rank")
}

/// Whether `σ(L) = L`.
pub fn is_invariant(sigma: &SignedPermutation, l: &SublatticeHNF) -> bool {
    // σ(L) = L iff σ maps every basis vector back into L (indices agree).
    l.columns().iter().all(|c| l.contains(&sigma.apply(c)))
}

/// Exact membership of `x` in `L`.
pub fn is_member(x: &[i64], l: &SublatticeHNF) -> bool {
    l.contains(x)
}

/// Least L1 norm of a nonzero vector of `L`.
pub fn min_distance(l: &SublatticeHNF) -> u64 {
    // every basis column is a nonzero lattice vector
    let mut best: u64 = (0..l.dim())
        .map(|j| l.column(j).iter().map(|v| v.unsigned_abs()).sum::<u64>())
        .min()
        .expect("d >= 1");
    while best > 1 {
        match l.short_vector(best - 1) {
            Some(v) => best = v.iter().map(|x| x.unsigned_abs()).sum(),
            None => break,
        }
    }
    best
}

/// `min_distance(L) >= t`, visiting only lattice points of norm `< t`.
pub fn min_distance_at_least(l: &SublatticeHNF, t: u64) -> bool {
    t <= 1 || l.short_vector(t - 1).is_none()
}

/// A `B_d`-orbit of sublattices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OrbitClass {
    pub rep: SublatticeHNF,
    pub index: u64,
    pub min_distance: u64,
    pub orbit_size: u64,
    pub stabilizer_size: u64,
}

#[derive(Serialize, Deserialize)]
struct OrbitRecord {
    d: usize,
    index: u64,
    min_distance: u64,
    orbit_size: u64,
    rep: SublatticeHNF,
}

impl Serialize for OrbitClass {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        OrbitRecord {
            d: self.rep.dim(),
            index: self.index,
            min_distance: self.min_distance,
            orbit_size: self.orbit_size,
            rep: self.rep.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for OrbitClass {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let rec = OrbitRecord::deserialize(de)?;
        let order = group_order(rec.d);
        if rec.rep.dim() != rec.d || rec.rep.index() != rec.index || rec.orbit_size == 0 || !order.is_multiple_of(rec.orbit_size) {
            return Err(serde::de::Error::custom("inconsistent orbit record"));
        }
        Ok(OrbitClass {
            rep: rec.rep,
            index: rec.index,
            min_distance: rec.min_distance,
            orbit_size: rec.orbit_size,
            stabilizer_size: order / rec.orbit_size,
        })
    }
}

/// Cached list of the elements of `B_d`.
#[derive(Clone, Debug)]
pub struct Hyperoctahedral {
    d: usize,
    elements: Vec<SignedPermutation>,
}

impl Hyperoctahedral {
    pub fn new(d: usize) -> Self {
        Self { d, elements: SignedPermutation::all(d) }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn elements(&self) -> &[SignedPermutation] {
        &self.elements
    }

    pub fn orbit_images(&self, l: &SublatticeHNF) -> BTreeSet<SublatticeHNF> {
        self.elements.iter().map(|s| apply_signed_perm(s, l)).collect()
    }

    /// Whether `L` is the lexicographically least lattice of its orbit.
    pub fn is_orbit_rep(&self, l: &SublatticeHNF) -> bool {
        self.elements.iter().all(|s| apply_signed_perm(s, l) >= *l)
    }

    /// Orbit of `L`; the stored representative is the lexicographically least
    /// image.
    pub fn orbit_of(&self, l: &SublatticeHNF) -> OrbitClass {
        let images = self.orbit_images(l);
        let orbit_size = images.len() as u64;
        let rep = images.into_iter().next().expect("orbit is non-empty");
        OrbitClass {
            min_distance: min_distance(&rep),
            index: rep.index(),
            rep,
            orbit_size,
            stabilizer_size: self.elements.len() as u64 / orbit_size,
        }
    }
}

pub fn orbit_of(l: &SublatticeHNF) -> OrbitClass {
    Hyperoctahedral::new(l.dim()).orbit_of(l)
}
