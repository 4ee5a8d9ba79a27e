//! Growth constants and the saddle-point upper bound
//! `log B(n) <= h(s) + n s`, where `h(s) = -Σ_j γ(j) log(1 - e^{-sj})`.

use std::io::Write;

use serde::Serialize;
use statrs::function::gamma::gamma as gamma_fn;

use crate::census::CensusTable;
use crate::counting::{count_table, fmt_sig15, ln_big};
use crate::error::{Error, Result};

/// Bernoulli numbers `B_2, B_4, ..., B_20`.
const BERNOULLI: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

/// Riemann zeta for real `s > 1` by Euler–Maclaurin summation; the cut-off
/// grows until the last correction term is below `tol`.
pub fn zeta(s: f64, tol: f64) -> Result<f64> {
    if !(s > 1.0) || !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("zeta needs s > 1 and tol > 0, got s={s}, tol={tol}")));
    }
    let mut cut = 8usize;
    loop {
        let big_n = cut as f64;
        let mut sum: f64 = (1..cut).rev().map(|k| (k as f64).powf(-s)).sum();
        sum += big_n.powf(1.0 - s) / (s - 1.0) + 0.5 * big_n.powf(-s);
        // rising factorial s(s+1)...(s+2j-2) / (2j)! times N^{-s-2j+1}
        let mut factor = s * big_n.powf(-s - 1.0) / 2.0;
        let mut last = f64::INFINITY;
        for (i, b) in BERNOULLI.iter().enumerate() {
            let j = (i + 1) as f64;
            if i > 0 {
                factor *= (s + 2.0 * j - 3.0) * (s + 2.0 * j - 2.0) / ((2.0 * j - 1.0) * (2.0 * j)) / (big_n * big_n);
            }
            last = b * factor;
            sum += last;
            if last.abs() < tol * 1e-3 {
                break;
            }
        }
        if last.abs() < tol * 1e-3 || cut > 1 << 20 {
            return Ok(sum);
        }
        cut *= 2;
    }
}

fn zeta_prod(from: usize, to: usize) -> f64 {
    (from..=to).map(|i| zeta(i as f64, 1e-15).expect("i >= 2")).product()
}

/// `c_d = Π_{i=2}^{d} ζ(i) / (2^{d-1} d! d)`: number of `B_d`-orbits of
/// sublattices of index at most `x` is asymptotically `c_d x^d`.
pub fn c_constant(d: usize) -> Result<f64> {
    if d == 0 {
        return Err(Error::InvalidParameter("d must be at least 1".into()));
    }
    let fact: f64 = (1..=d).map(|i| i as f64).product();
    Ok(zeta_prod(2, d) / (2f64.powi(d as i32 - 1) * fact * d as f64))
}

/// `K_d = (d+1)/d · (Π_{i=2}^{d} ζ(i) / 2^{d-1})^{1/(d+1)}`.
pub fn k_constant(d: usize) -> Result<f64> {
    if d < 2 {
        return Err(Error::InvalidParameter("K_d is defined for d >= 2; use leading_term(1, 1, n) for d = 1".into()));
    }
    let df = d as f64;
    Ok((df + 1.0) / df * (zeta_prod(2, d) / 2f64.powi(d as i32 - 1)).powf(1.0 / (df + 1.0)))
}

/// `(1/u)(K u Γ(u+2) ζ(u+1))^{1/(u+1)} (u+1)^{u/(u+1)}`, the coefficient of
/// `n^{u/(u+1)}` in `log B(n)` when `Σ_{j ≤ x} γ(j) ~ K x^u`.
pub fn brigham_coefficient(k: f64, u: f64) -> Result<f64> {
    if !(k > 0.0) || !(u > 0.0) {
        return Err(Error::InvalidParameter(format!("need K > 0 and u > 0, got K={k}, u={u}")));
    }
    let z = zeta(u + 1.0, 1e-15)?;
    Ok((k * u * gamma_fn(u + 2.0) * z).powf(1.0 / (u + 1.0)) * (u + 1.0).powf(u / (u + 1.0)) / u)
}

/// `brigham_coefficient(K, u) · n^{u/(u+1)}`.
pub fn leading_term(k: f64, u: f64, n: f64) -> Result<f64> {
    let c = brigham_coefficient(k, u)?;
    Ok(if n == 0.0 { 0.0 } else { c * n.powf(u / (u + 1.0)) })
}

/// Coefficient of `n^{d/(d+1)}` for the pure-translation model, i.e.
/// `brigham_coefficient(c_d, d) = (d+1)/d · (Π_{i=2}^{d+1} ζ(i) / 2^{d-1})^{1/(d+1)}`.
pub fn census_growth_constant(d: usize) -> Result<f64> {
    brigham_coefficient(c_constant(d)?, d as f64)
}

/// Tail of `γ` beyond the exact horizon, as a density of `F(x) ≈ K x^u`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Tail {
    /// `γ(j) = 0` beyond the horizon.
    None,
    /// `γ(j) = K (j^u - (j-1)^u)` exactly.
    Exact { k: f64, u: f64 },
    /// `γ(j) <= factor · K (j^u - (j-1)^u)`, assumed.
    Inflated { k: f64, u: f64, factor: f64 },
}

impl Tail {
    fn density(&self, j: f64) -> f64 {
        match *self {
            Tail::None => 0.0,
            Tail::Exact { k, u } => k * (j.powf(u) - (j - 1.0).powf(u)),
            Tail::Inflated { k, u, factor } => factor * k * (j.powf(u) - (j - 1.0).powf(u)),
        }
    }

    fn exponent(&self) -> f64 {
        match *self {
            Tail::None => 0.0,
            Tail::Exact { u, .. } | Tail::Inflated { u, .. } => u,
        }
    }
}

/// Exact `γ(1..=J)` plus a tail model.
#[derive(Clone, Debug, Serialize)]
pub struct SaddleModel {
    /// `gamma[j]`, `gamma[0]` ignored.
    pub gamma: Vec<f64>,
    pub tail: Tail,
    /// Terms of the tail sum below this are dropped once their remainder is
    /// bounded.
    pub truncation_tol: f64,
}

/// `-log(1 - e^{-t})`.
fn neg_log1m_exp(t: f64) -> f64 {
    -(-(-t).exp_m1()).ln()
}

impl SaddleModel {
    pub fn new(gamma: &[u64], tail: Tail) -> Self {
        Self { gamma: gamma.iter().map(|&g| g as f64).collect(), tail, truncation_tol: 1e-14 }
    }

    /// `γ ≡ 1` up to `horizon` with the exact tail.
    pub fn partitions(horizon: usize) -> Self {
        let mut gamma = vec![1.0; horizon + 1];
        gamma[0] = 0.0;
        Self { gamma, tail: Tail::Exact { k: 1.0, u: 1.0 }, truncation_tol: 1e-14 }
    }

    /// A census `γ` extended by `1.5 c_d x^d`.
    pub fn census(gamma: &[u64], d: usize) -> Result<Self> {
        let tail = Tail::Inflated { k: c_constant(d)?, u: d as f64, factor: 1.5 };
        Ok(Self::new(gamma, tail))
    }

    pub fn horizon(&self) -> usize {
        self.gamma.len().saturating_sub(1)
    }

    /// The model for `B(n)`: `γ(j)` for `j > n` does not affect `b(0..=n)`, so
    /// it is dropped, and the tail only fills `(J, n]`.
    pub fn truncated(&self, n: usize) -> Self {
        let mut gamma: Vec<f64> = self.gamma.iter().copied().take(n + 1).collect();
        let horizon = gamma.len().max(1) - 1;
        if gamma.is_empty() {
            gamma.push(0.0);
        }
        for j in horizon + 1..=n {
            gamma.push(self.tail.density(j as f64));
        }
        Self { gamma, tail: Tail::None, truncation_tol: self.truncation_tol }
    }

    /// Whether `h(s) + n s >= log B(n)` is guaranteed (for `Inflated`, under
    /// the tail assumption).
    pub fn certified_for(&self, n: usize) -> bool {
        n <= self.horizon() || !matches!(self.tail, Tail::None)
    }

    /// Sums `w(j) f(sj)` over the tail, with `f` decreasing and
    /// `f(t) <= C e^{-t}` for large `t`; the dropped remainder is bounded by a
    /// geometric series and added.
    fn tail_sum(&self, s: f64, f: impl Fn(f64, f64) -> f64) -> f64 {
        if matches!(self.tail, Tail::None) {
            return 0.0;
        }
        let u = self.tail.exponent();
        let mut total = 0.0;
        let mut j = self.horizon() as f64 + 1.0;
        loop {
            let term = self.tail.density(j) * f(s * j, j);
            total += term;
            // consecutive terms shrink by at most q from here on
            let q = ((j + 1.0) / j).powf(u.max(1.0) + 1.0) * (-s).exp();
            if q < 1.0 && term <= self.truncation_tol * total.max(1.0) {
                return total + term * q / (1.0 - q);
            }
            j += 1.0;
        }
    }

    /// `h(s) = -Σ_j γ(j) log(1 - e^{-sj})`.
    pub fn h(&self, s: f64) -> f64 {
        let head: f64 = self.gamma.iter().enumerate().skip(1).map(|(j, &g)| g * neg_log1m_exp(s * j as f64)).sum();
        head + self.tail_sum(s, |t, _| neg_log1m_exp(t))
    }

    /// `h'(s) = -Σ_j j γ(j) / (e^{sj} - 1)`.
    pub fn h_prime(&self, s: f64) -> f64 {
        let head: f64 = self
            .gamma
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, &g)| g * j as f64 / (s * j as f64).exp_m1())
            .sum();
        -(head + self.tail_sum(s, |t, j| j / t.exp_m1()))
    }

    /// `φ(s) = Σ_j γ(j) e^{-sj}`.
    pub fn phi(&self, s: f64) -> f64 {
        let head: f64 = self.gamma.iter().enumerate().skip(1).map(|(j, &g)| g * (-s * j as f64).exp()).sum();
        head + self.tail_sum(s, |t, _| (-t).exp())
    }

    /// `Σ_{m ≥ 1} φ(ms)/m`, stopped once `φ(ms)` drops below the tolerance;
    /// the remainder is bounded using `φ(ms) <= φ(Ms) e^{-(m-M)s}`.
    pub fn h_series(&self, s: f64) -> f64 {
        let mut total = 0.0;
        let mut m = 1.0;
        loop {
            let p = self.phi(m * s);
            total += p / m;
            if p < self.truncation_tol {
                let q = (-s).exp();
                return total + p * q / ((1.0 - q) * (m + 1.0));
            }
            m += 1.0;
        }
    }
}

/// One point of the bisection.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PathPoint {
    pub s: f64,
    pub h_prime: f64,
    /// `h(s) + n s`.
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SaddleEstimate {
    pub n: u64,
    pub s_star: f64,
    pub log_b_upper: f64,
    pub certified: bool,
    pub path: Vec<PathPoint>,
}

/// Solves `h'(s) = -n` by bisection on the model truncated at `n` and returns
/// `h(s*) + n s*`.
pub fn saddle_estimate(model: &SaddleModel, n: u64) -> Result<SaddleEstimate> {
    if n == 0 {
        return Err(Error::InvalidParameter("saddle_estimate needs n >= 1".into()));
    }
    let local = model.truncated(n as usize);
    let target = -(n as f64);
    let tol = (1e-6 * n as f64).max(1.0);
    let mut path = Vec::new();
    let probe = |s: f64, path: &mut Vec<PathPoint>| {
        let hp = local.h_prime(s);
        path.push(PathPoint { s, h_prime: hp, bound: local.h(s) + n as f64 * s });
        hp
    };
    let (mut lo, mut hi) = (1.0, 1.0);
    let at_one = probe(1.0, &mut path);
    if at_one < target {
        while probe(hi, &mut path) < target {
            hi *= 2.0;
            if hi > 1e6 {
                return Err(Error::SaddleNotBracketed { n });
            }
        }
    } else {
        while probe(lo, &mut path) > target {
            lo /= 2.0;
            if lo < 1e-300 {
                return Err(Error::SaddleNotBracketed { n });
            }
        }
    }
    let mut best = path.last().copied().expect("probed at least once");
    for _ in 0..200 {
        if (best.h_prime - target).abs() <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let hp = probe(mid, &mut path);
        best = *path.last().expect("just pushed");
        if hp < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(SaddleEstimate {
        n,
        s_star: best.s,
        log_b_upper: best.bound,
        certified: model.certified_for(n as usize),
        path,
    })
}

/// One row of `asymptotics.csv`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymptoticsRow {
    pub n: u64,
    pub log_b_exact: f64,
    pub log_cum_exact: f64,
    pub saddle_upper: f64,
    pub leading_term: f64,
}

/// Exact log-counts against the saddle bound and leading term for orders from
/// the first nonzero census index up to `n_max`. For `d = 1` the model is
/// cycles of length at least `2r+2` with leading term `pi sqrt(2n/3)`; for
/// `d >= 2` it is the census model with leading term built from `c_d`.
pub fn asymptotics_table(census: &CensusTable, n_max: u64) -> Result<Vec<AsymptoticsRow>> {
    let d = census.d;
    let table = count_table(census, n_max)?;
    let cum = table.cumulative();
    let (model, k, u) = if d == 1 {
        (SaddleModel::new(&census.gamma, Tail::Exact { k: 1.0, u: 1.0 }), 1.0, 1.0)
    } else {
        (SaddleModel::census(&census.gamma, d)?, c_constant(d)?, d as f64)
    };
    let Some(first) = census.first_nonzero() else { return Ok(Vec::new()) };
    (first..=n_max)
        .map(|n| {
            let est = saddle_estimate(&model, n)?;
            Ok(AsymptoticsRow {
                n,
                log_b_exact: ln_big(&table.b[n as usize]),
                log_cum_exact: ln_big(&cum[n as usize]),
                saddle_upper: est.log_b_upper,
                leading_term: leading_term(k, u, n as f64)?,
            })
        })
        .collect()
}

pub fn write_asymptotics_csv(rows: &[AsymptoticsRow], out: &mut impl Write) -> Result<()> {
    writeln!(out, "n,log_b_exact,log_cum_exact,saddle_upper,leading_term,ratio_exact_leading,ratio_upper_cum")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.n,
            fmt_sig15(r.log_b_exact),
            fmt_sig15(r.log_cum_exact),
            fmt_sig15(r.saddle_upper),
            fmt_sig15(r.leading_term),
            fmt_sig15(r.log_b_exact / r.leading_term),
            fmt_sig15(r.saddle_upper / r.log_cum_exact),
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::census::build_census;
    use crate::counting::{count_table, euler_transform_recurrence, ln_big, min_part_gamma};
    use std::f64::consts::PI;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn zeta_values() {
        assert!(close(zeta(2.0, 1e-13).unwrap(), PI * PI / 6.0, 1e-12));
        assert!(close(zeta(4.0, 1e-13).unwrap(), PI.powi(4) / 90.0, 1e-12));
        assert!(close(zeta(3.0, 1e-11).unwrap(), 1.2020569031595942, 1e-10));
        assert!(close(zeta(1.5, 1e-10).unwrap(), 2.612375348685488, 1e-9));
        assert!(zeta(1.0, 1e-9).is_err());
        assert!(zeta(0.5, 1e-9).is_err());
    }

    #[test]
    fn constants() {
        let z2 = PI * PI / 6.0;
        let z3 = 1.2020569031595942;
        assert!(close(c_constant(2).unwrap(), z2 / 8.0, 1e-12));
        assert!(close(c_constant(2).unwrap(), 0.205617, 1e-6));
        assert!(close(k_constant(2).unwrap(), 1.5 * (z2 / 2.0).cbrt(), 1e-12));
        assert!(close(k_constant(2).unwrap(), 1.40539, 1e-5));
        assert!(close(k_constant(3).unwrap(), 4.0 / 3.0 * (z2 * z3 / 4.0).powf(0.25), 1e-12));
        assert!(k_constant(1).is_err());
        assert!(close(census_growth_constant(2).unwrap(), 1.5 * (z2 * z3 / 2.0).cbrt(), 1e-12));
    }

    #[test]
    fn leading_term_examples() {
        for n in [1.0, 10.0, 100.0, 12345.0] {
            let lt = leading_term(1.0, 1.0, n).unwrap();
            assert!(close(lt / (PI * (2.0 * n / 3.0).sqrt()), 1.0, 1e-12));
        }
        assert!(close(leading_term(1.0, 1.0, 100.0).unwrap(), 25.6510, 1e-4));
        let c2 = c_constant(2).unwrap();
        let want = census_growth_constant(2).unwrap() * 1000f64.powf(2.0 / 3.0);
        assert!(close(leading_term(c2, 2.0, 1000.0).unwrap(), want, 1e-9));
        assert_eq!(leading_term(1.0, 1.0, 0.0).unwrap(), 0.0);
        assert!(leading_term(0.0, 1.0, 5.0).is_err());
    }

    #[test]
    fn series_form_matches_direct_form() {
        let m = SaddleModel::partitions(500);
        for s in [0.01, 0.05, 0.3, 1.0, 2.5] {
            let (a, b) = (m.h(s), m.h_series(s));
            assert!(close(a, b, 1e-9 * a.abs().max(1.0)), "s={s}: {a} vs {b}");
        }
        let census = build_census(2, 2, 100).unwrap();
        let m = SaddleModel::census(&census.gamma, 2).unwrap();
        for s in [0.02, 0.1, 0.5] {
            let (a, b) = (m.h(s), m.h_series(s));
            assert!(close(a, b, 1e-9 * a.abs().max(1.0)), "s={s}: {a} vs {b}");
        }
    }

    #[test]
    fn h_near_zero_matches_claim() {
        let m = SaddleModel::partitions(0);
        for s in [1e-3, 3e-3, 1e-2] {
            let ratio = m.h(s) * s / (PI * PI / 6.0);
            assert!((0.8..=1.2).contains(&ratio), "s={s}: {ratio}");
        }
    }

    #[test]
    fn partitions_bound_holds() {
        let t = euler_transform_recurrence(&min_part_gamma(1, 1000), 1000).unwrap();
        let cum = t.cumulative();
        let model = SaddleModel::partitions(0);
        assert!(close(ln_big(&t.b[100]), 19.066, 1e-3));
        for n in [1u64, 2, 10, 100, 500, 1000] {
            let est = saddle_estimate(&model, n).unwrap();
            assert!(est.certified);
            let exact = ln_big(&cum[n as usize]);
            for p in &est.path {
                assert!(exact <= p.bound, "n={n} s={}", p.s);
            }
            assert!(exact <= est.log_b_upper);
        }
        let est = saddle_estimate(&model, 1000).unwrap();
        let gap = (est.log_b_upper - ln_big(&cum[1000])) / ln_big(&cum[1000]);
        assert!(gap <= 0.15, "{gap}");
    }

    #[test]
    fn h_prime_monotone_on_path() {
        let est = saddle_estimate(&SaddleModel::partitions(0), 300).unwrap();
        let mut pts = est.path.clone();
        pts.sort_by(|a, b| a.s.total_cmp(&b.s));
        assert!(pts.windows(2).all(|w| w[0].h_prime <= w[1].h_prime));
        assert!((est.path.last().unwrap().h_prime + 300.0).abs() <= 1.0);
    }

    #[test]
    fn census_bound_holds() {
        let census = build_census(2, 2, 200).unwrap();
        let t = count_table(&census, 200).unwrap();
        let cum = t.cumulative();
        let model = SaddleModel::census(&census.gamma, 2).unwrap();
        for n in (18..=200).step_by(7) {
            let est = saddle_estimate(&model, n).unwrap();
            assert!(est.certified);
            assert!(ln_big(&cum[n as usize]) <= est.log_b_upper, "n={n}");
        }
        assert!(matches!(saddle_estimate(&model, 17), Err(Error::SaddleNotBracketed { n: 17 })));
    }

    #[test]
    fn truncation_and_certification() {
        let m = SaddleModel::new(&[0, 1, 1, 1], Tail::None);
        assert!(m.certified_for(3));
        assert!(!m.certified_for(4));
        let t = m.truncated(6);
        assert_eq!(t.gamma.len(), 7);
        assert!(t.gamma[4..].iter().all(|&g| g == 0.0));
        let p = SaddleModel::partitions(2).truncated(5);
        assert_eq!(p.gamma, vec![0.0, 1.0, 1.0, 1.0, 1.0, 1.0]);
    }
}
