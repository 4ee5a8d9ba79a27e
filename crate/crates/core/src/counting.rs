//! Exact counts `b(n)` of multisets of connected pieces: the Euler transform
//! of `γ`, by two independent routes.

use std::io::Write;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::census::CensusTable;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Method {
    #[serde(rename = "per-type DP")]
    PerType,
    #[serde(rename = "euler-recurrence")]
    Recurrence,
}

/// `b(0..=n_max)` with the `γ` it was computed from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BigCountTable {
    /// `gamma[j]` for `j` in `0..=n_max`; `gamma[0]` is ignored.
    pub gamma: Vec<u64>,
    pub b: Vec<BigUint>,
    pub method: Method,
}

impl BigCountTable {
    pub fn n_max(&self) -> u64 {
        self.b.len() as u64 - 1
    }

    pub fn b(&self, n: u64) -> &BigUint {
        &self.b[n as usize]
    }

    /// `B(n) = Σ_{k ≤ n} b(k)`, including `b(0) = 1`.
    pub fn cumulative(&self) -> Vec<BigUint> {
        let mut acc = BigUint::zero();
        self.b
            .iter()
            .map(|x| {
                acc += x;
                acc.clone()
            })
            .collect()
    }
}

fn padded(gamma: &[u64], n_max: u64) -> Vec<u64> {
    let mut g = vec![0; n_max as usize + 1];
    for (j, &x) in gamma.iter().enumerate().take(n_max as usize + 1).skip(1) {
        g[j] = x;
    }
    g
}

/// Folds in `(1 - z^j)^{-γ(j)}` one weight class at a time.
pub fn euler_transform_per_type(gamma: &[u64], n_max: u64) -> BigCountTable {
    let gamma = padded(gamma, n_max);
    let n = n_max as usize;
    let mut b = vec![BigUint::zero(); n + 1];
    b[0] = BigUint::from(1u32);
    for j in 1..=n {
        let g = gamma[j];
        if g == 0 {
            continue;
        }
        if g == 1 {
            for m in j..=n {
                let (lo, hi) = b.split_at_mut(m);
                hi[0] += &lo[m - j];
            }
            continue;
        }
        // multiset coefficients C(g+k-1, k) for k = 0..=n/j
        let mut coeff = vec![BigUint::from(1u32)];
        for k in 1..=n / j {
            let next = &coeff[k - 1] * BigUint::from(g + k as u64 - 1) / BigUint::from(k as u64);
            coeff.push(next);
        }
        // descending m keeps b[m - jk] at its pre-class value
        for m in (j..=n).rev() {
            let mut acc = BigUint::zero();
            for k in 1..=m / j {
                if !b[m - j * k].is_zero() {
                    acc += &coeff[k] * &b[m - j * k];
                }
            }
            b[m] += acc;
        }
    }
    BigCountTable { gamma, b, method: Method::PerType }
}

/// `n b(n) = Σ_{m=1}^{n} c(m) b(n-m)` with `c(m) = Σ_{j | m} j γ(j)`.
pub fn euler_transform_recurrence(gamma: &[u64], n_max: u64) -> Result<BigCountTable> {
    let gamma = padded(gamma, n_max);
    let n = n_max as usize;
    let mut c = vec![0u128; n + 1];
    for j in 1..=n {
        if gamma[j] > 0 {
            for m in (j..=n).step_by(j) {
                c[m] += j as u128 * gamma[j] as u128;
            }
        }
    }
    let mut b = vec![BigUint::zero(); n + 1];
    b[0] = BigUint::from(1u32);
    for k in 1..=n {
        let mut acc = BigUint::zero();
        for m in 1..=k {
            if c[m] != 0 && !b[k - m].is_zero() {
                acc += &b[k - m] * c[m];
            }
        }
        let (q, rem) = acc.div_rem(&BigUint::from(k as u64));
        if !rem.is_zero() {
            return Err(Error::Internal(format!("recurrence division inexact at n={k}")));
        }
        b[k] = q;
    }
    Ok(BigCountTable { gamma, b, method: Method::Recurrence })
}

/// Both routes over the census `γ`, checked against each other.
pub fn count_table(census: &CensusTable, n_max: u64) -> Result<BigCountTable> {
    if n_max > census.max_index {
        return Err(Error::MissingCensus { have: census.max_index, need: n_max });
    }
    let rec = euler_transform_recurrence(&census.gamma, n_max)?;
    let per = euler_transform_per_type(&census.gamma, n_max);
    if rec.b != per.b {
        let n = rec.b.iter().zip(&per.b).position(|(a, b)| a != b).unwrap_or(0);
        return Err(Error::Internal(format!("per-type and recurrence counts differ at n={n}")));
    }
    Ok(rec)
}

/// Number of unlabelled `n`-vertex graphs in the census model.
pub fn count_graphs(census: &CensusTable, n: u64) -> Result<BigUint> {
    Ok(count_table(census, n)?.b[n as usize].clone())
}

/// `γ(j) = [j ≥ min_part]` up to `n_max`.
pub fn min_part_gamma(min_part: u64, n_max: u64) -> Vec<u64> {
    (0..=n_max).map(|j| u64::from(j >= min_part && j > 0)).collect()
}

/// Partitions of `n` with every part at least `min_part`.
pub fn restricted_partition_count(n: u64, min_part: u64) -> Result<BigUint> {
    if min_part == 0 {
        return Err(Error::InvalidParameter("min_part must be at least 1".into()));
    }
    Ok(euler_transform_recurrence(&min_part_gamma(min_part, n), n)?.b[n as usize].clone())
}

/// Lexicographically greatest partition of `n` into `d`-th powers `m^d` with
/// `m > s`, listed non-increasingly; `None` when there is none.
pub fn find_power_partition(n: u64, d: u32, s: u64) -> Option<Vec<u64>> {
    let n_us = n as usize;
    let parts: Vec<usize> = (s + 1..)
        .map(|m| m.checked_pow(d))
        .take_while(|p| p.is_some_and(|p| p <= n))
        .map(|p| p.unwrap() as usize)
        .collect();
    // reach[k][m]: m is a sum of parts[0..=k]
    let mut reach: Vec<Vec<bool>> = Vec::with_capacity(parts.len());
    for (k, &p) in parts.iter().enumerate() {
        let mut row = match k {
            0 => {
                let mut r = vec![false; n_us + 1];
                r[0] = true;
                r
            }
            _ => reach[k - 1].clone(),
        };
        for m in p..=n_us {
            if row[m - p] {
                row[m] = true;
            }
        }
        reach.push(row);
    }
    if n == 0 {
        return Some(Vec::new());
    }
    let mut out = Vec::new();
    let mut rest = n_us;
    let mut top = parts.len();
    while rest > 0 {
        let k = (0..top).rev().find(|&k| parts[k] <= rest && reach[k][rest - parts[k]])?;
        out.push(parts[k] as u64);
        rest -= parts[k];
        top = k + 1;
    }
    Some(out)
}

/// Natural log of a big integer; `-inf` for zero.
pub fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    let shift = bits.saturating_sub(64);
    let top = (x >> shift).to_u64().expect("at most 64 bits remain");
    (top as f64).ln() + shift as f64 * std::f64::consts::LN_2
}

/// `x` with 15 significant digits.
pub fn fmt_sig15(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".into();
    }
    let mag = x.abs().log10().floor() as i32;
    let decimals = (14 - mag).max(0) as usize;
    format!("{x:.decimals$}")
}

/// `n,b,log_b` rows (header included).
pub fn write_counts_csv(table: &BigCountTable, out: &mut impl Write) -> Result<()> {
    writeln!(out, "n,b,log_b")?;
    for (n, b) in table.b.iter().enumerate() {
        writeln!(out, "{n},{b},{}", fmt_sig15(ln_big(b)))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::census::build_census;
    use proptest::prelude::*;

    fn brute_partitions(n: u64, min_part: u64, max_part: u64) -> u64 {
        if n == 0 {
            return 1;
        }
        (min_part..=max_part.min(n)).map(|p| brute_partitions(n - p, min_part, p)).sum()
    }

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn single_weight_one_type() {
        let gamma = [0, 1];
        for t in [euler_transform_per_type(&gamma, 20), euler_transform_recurrence(&gamma, 20).unwrap()] {
            assert!(t.b.iter().all(|x| *x == big(1)));
        }
    }

    #[test]
    fn partition_numbers() {
        let gamma = min_part_gamma(1, 100);
        let a = euler_transform_per_type(&gamma, 100);
        let b = euler_transform_recurrence(&gamma, 100).unwrap();
        assert_eq!(a.b, b.b);
        assert_eq!(a.b[5], big(7));
        assert_eq!(b.b[8], big(22));
        assert_eq!(a.b[100].to_string(), "190569292");
        for n in 0..=40 {
            assert_eq!(a.b[n as usize], big(brute_partitions(n, 1, n)), "p({n})");
        }
    }

    #[test]
    fn restricted_partitions() {
        assert_eq!(restricted_partition_count(5, 1).unwrap(), big(7));
        assert_eq!(restricted_partition_count(10, 4).unwrap(), big(3));
        for n in 1..30 {
            assert_eq!(restricted_partition_count(n, n).unwrap(), big(1));
            assert_eq!(restricted_partition_count(n, 3).unwrap(), big(brute_partitions(n, 3, n)));
        }
        assert!(restricted_partition_count(5, 0).is_err());
    }

    #[test]
    fn count_graph_examples() {
        let cycles = build_census(1, 1, 20).unwrap();
        assert_eq!(count_graphs(&cycles, 8).unwrap(), big(2));
        assert_eq!(count_graphs(&cycles, 3).unwrap(), big(0));
        assert_eq!(count_graphs(&cycles, 10).unwrap(), big(3));
        let square = build_census(2, 2, 40).unwrap();
        let t = count_table(&square, 40).unwrap();
        assert!(t.b[1..=17].iter().all(Zero::is_zero));
        assert_eq!(t.b[18], big(square.gamma[18]));
        assert!(matches!(count_graphs(&square, 41), Err(Error::MissingCensus { .. })));
    }

    #[test]
    fn cycles_match_restricted_partitions() {
        let r = 2;
        let census = build_census(1, r, 60).unwrap();
        let t = count_table(&census, 60).unwrap();
        for n in 0..=60 {
            assert_eq!(t.b[n as usize], restricted_partition_count(n, 2 * r + 2).unwrap());
        }
    }

    #[test]
    fn torus_step_monotonicity() {
        let census = build_census(2, 2, 120).unwrap();
        let t = count_table(&census, 120).unwrap();
        for n in 36..=120 {
            assert!(t.b[n] >= t.b[n - 36]);
        }
    }

    #[test]
    fn power_partitions() {
        assert_eq!(find_power_partition(9, 2, 2), Some(vec![9]));
        assert_eq!(find_power_partition(26, 2, 2), None);
        let p = find_power_partition(100, 2, 2).unwrap();
        assert_eq!(p.iter().sum::<u64>(), 100);
        assert_eq!(p, vec![100]);
        let p = find_power_partition(59, 2, 2).unwrap();
        assert_eq!(p, vec![25, 25, 9]);
        assert_eq!(find_power_partition(0, 3, 5), Some(vec![]));
        assert_eq!(find_power_partition(7, 2, 2), None);
    }

    #[test]
    fn power_partitions_witness_positive_counts() {
        let census = build_census(2, 2, 400).unwrap();
        let t = count_table(&census, 400).unwrap();
        for n in 0..=400u64 {
            if let Some(parts) = find_power_partition(n, 2, 5) {
                assert!(parts.windows(2).all(|w| w[0] >= w[1]));
                assert!(!t.b[n as usize].is_zero(), "n={n}");
            }
        }
    }

    #[test]
    fn logs_and_formatting() {
        assert_eq!(ln_big(&BigUint::zero()), f64::NEG_INFINITY);
        assert!((ln_big(&big(1000)) - 1000f64.ln()).abs() < 1e-12);
        let huge = BigUint::from(3u32).pow(500);
        assert!((ln_big(&huge) - 500.0 * 3f64.ln()).abs() < 1e-9);
        assert_eq!(fmt_sig15(19.06595450628173), "19.0659545062817");
        assert_eq!(fmt_sig15(0.0), "0");
        let mut out = Vec::new();
        write_counts_csv(&euler_transform_per_type(&[0, 1, 1], 3), &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "n,b,log_b\n0,1,0\n1,1,0\n2,2,0.693147180559945\n3,2,0.693147180559945\n");
    }

    proptest! {
        #[test]
        fn routes_agree_on_random_gamma(gamma in proptest::collection::vec(0u64..50, 1..60)) {
            let n_max = 80;
            let a = euler_transform_per_type(&gamma, n_max);
            let b = euler_transform_recurrence(&gamma, n_max).unwrap();
            prop_assert_eq!(a.b, b.b);
        }
    }
}
