//! Contiguous partitions of `1..n`, their indicator-vector encoding, and the
//! Yao product-partition prior with an optional Beta hyperprior on the
//! change probability.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dglm::FilterResult;
use crate::error::{domain, Error, Result};
use crate::special::{ln_beta, ln_gamma};

/// Endpoints `0 = i_0 < i_1 < ... < i_b = n`; block `j` covers the
/// (1-based) observations `i_{j-1}+1 ..= i_j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Partition {
    endpoints: Vec<usize>,
}

impl Partition {
    pub fn new(n: usize, endpoints: Vec<usize>) -> Result<Self> {
        let p = Self::try_from(endpoints)?;
        if p.n() != n {
            return Err(Error::InvalidPartition(format!(
                "last endpoint is {} but n = {n}",
                p.n()
            )));
        }
        Ok(p)
    }

    pub fn single_block(n: usize) -> Self {
        Self { endpoints: vec![0, n] }
    }

    /// Every observation in its own block.
    pub fn all_breaks(n: usize) -> Self {
        Self {
            endpoints: (0..=n).collect(),
        }
    }

    pub fn n(&self) -> usize {
        *self.endpoints.last().expect("validated partition is non-empty")
    }

    pub fn num_blocks(&self) -> usize {
        self.endpoints.len() - 1
    }

    pub fn endpoints(&self) -> &[usize] {
        &self.endpoints
    }

    /// Zero-based half-open `(start, end)` ranges of each block.
    pub fn blocks(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.endpoints.windows(2).map(|w| (w[0], w[1]))
    }

    /// `starts[t]` is true when (zero-based) observation `t` opens a block.
    pub fn block_starts(&self) -> Vec<bool> {
        let mut starts = vec![false; self.n()];
        for &e in &self.endpoints[..self.endpoints.len() - 1] {
            starts[e] = true;
        }
        starts
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.endpoints).expect("integers serialise")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let endpoints: Vec<usize> =
            serde_json::from_str(s).map_err(|e| Error::InvalidPartition(format!("bad endpoint JSON: {e}")))?;
        Self::try_from(endpoints)
    }
}

impl TryFrom<Vec<usize>> for Partition {
    type Error = Error;

    fn try_from(endpoints: Vec<usize>) -> Result<Self> {
        if endpoints.len() < 2 {
            return Err(Error::InvalidPartition("need at least the endpoints 0 and n".into()));
        }
        if endpoints[0] != 0 {
            return Err(Error::InvalidPartition("first endpoint must be 0".into()));
        }
        if endpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidPartition("endpoints must be strictly increasing".into()));
        }
        Ok(Self { endpoints })
    }
}

impl From<Partition> for Vec<usize> {
    fn from(p: Partition) -> Self {
        p.endpoints
    }
}

/// Binary encoding of a partition: `u[r] = true` (written `1`) when
/// observations `r+1` and `r+2` (1-based) share a block, `false` (`0`) when a
/// change-point follows observation `r+1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IndicatorVector(Vec<bool>);

impl IndicatorVector {
    pub fn new(u: Vec<bool>) -> Self {
        Self(u)
    }

    /// All ones: a single block.
    pub fn all_ones(n: usize) -> Self {
        Self(vec![true; n.saturating_sub(1)])
    }

    pub fn all_zeros(n: usize) -> Self {
        Self(vec![false; n.saturating_sub(1)])
    }

    pub fn n(&self) -> usize {
        self.0.len() + 1
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [bool] {
        &mut self.0
    }

    /// Number of ones (positions without a change-point).
    pub fn ones(&self) -> usize {
        self.0.iter().filter(|&&v| v).count()
    }

    /// `b = 1 + (n - 1) - sum(u)`.
    pub fn num_blocks(&self) -> usize {
        1 + self.0.len() - self.ones()
    }

    /// Whether zero-based observation `t` opens a block.
    #[inline]
    pub fn starts_block(&self, t: usize) -> bool {
        t == 0 || !self.0[t - 1]
    }
}

impl fmt::Display for IndicatorVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &v in &self.0 {
            f.write_str(if v { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for IndicatorVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '1' => Ok(true),
                '0' => Ok(false),
                other => Err(Error::InvalidPartition(format!(
                    "indicator strings hold only 0/1, found {other:?}"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }
}

pub fn to_partition(u: &IndicatorVector) -> Partition {
    let n = u.n();
    let mut endpoints = vec![0];
    endpoints.extend(u.as_slice().iter().enumerate().filter(|(_, &v)| !v).map(|(r, _)| r + 1));
    endpoints.push(n);
    Partition { endpoints }
}

pub fn to_indicator(p: &Partition) -> IndicatorVector {
    let n = p.n();
    let mut u = vec![true; n - 1];
    for &e in &p.endpoints()[1..p.endpoints().len() - 1] {
        u[e - 1] = false;
    }
    IndicatorVector(u)
}

/// Which Beta parameter weights the change probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BetaOrientation {
    /// `Beta(first, second)` is placed on `pi`.
    ChangeFirst,
    /// `Beta(first, second)` is placed on `1 - pi`, so a large first
    /// parameter expresses few change-points.
    #[default]
    NoChangeFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CohesionPrior {
    FixedPi {
        pi: f64,
    },
    /// `pi ~ Beta(a_pi, b_pi)`, marginalised out.
    BetaPi {
        a_pi: f64,
        b_pi: f64,
    },
}

impl CohesionPrior {
    pub fn beta(first: f64, second: f64, orientation: BetaOrientation) -> Self {
        match orientation {
            BetaOrientation::ChangeFirst => CohesionPrior::BetaPi {
                a_pi: first,
                b_pi: second,
            },
            BetaOrientation::NoChangeFirst => CohesionPrior::BetaPi {
                a_pi: second,
                b_pi: first,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            CohesionPrior::FixedPi { pi } if pi > 0.0 && pi < 1.0 => Ok(()),
            CohesionPrior::FixedPi { pi } => domain(format!("pi must lie in (0, 1), got {pi}")),
            CohesionPrior::BetaPi { a_pi, b_pi } if a_pi > 0.0 && b_pi > 0.0 => Ok(()),
            CohesionPrior::BetaPi { a_pi, b_pi } => {
                domain(format!("Beta hyperparameters must be positive, got ({a_pi}, {b_pi})"))
            }
        }
    }

    /// Unnormalised log prior weight of any partition with `b` blocks.
    pub fn log_weight(&self, b: usize, n: usize) -> Result<f64> {
        match *self {
            CohesionPrior::FixedPi { pi } => log_prior_blocks_fixed_pi(b, n, pi),
            CohesionPrior::BetaPi { a_pi, b_pi } => log_marginal_prior_weight(b, n, a_pi, b_pi),
        }
    }

    /// Log prior odds of merging one change-point away: weight with `b - 1`
    /// blocks over weight with `b` blocks.
    pub fn log_merge_ratio(&self, b: usize, n: usize) -> Result<f64> {
        if b < 2 || b > n {
            return domain(format!("merge ratio needs 2 <= b <= n, got b = {b}, n = {n}"));
        }
        match *self {
            CohesionPrior::FixedPi { pi } => Ok((1.0 - pi).ln() - pi.ln()),
            CohesionPrior::BetaPi { a_pi, b_pi } => {
                let num = n as f64 + b_pi - b as f64;
                let den = b as f64 + a_pi - 2.0;
                if !(den > 0.0) || !(num > 0.0) {
                    return domain(format!("degenerate Beta factor ({num})/({den})"));
                }
                Ok(num.ln() - den.ln())
            }
        }
    }

    /// Prior mean of the number of change-points `B - 1`.
    pub fn expected_changepoints(&self, n: usize) -> f64 {
        let p = match *self {
            CohesionPrior::FixedPi { pi } => pi,
            CohesionPrior::BetaPi { a_pi, b_pi } => a_pi / (a_pi + b_pi),
        };
        (n as f64 - 1.0) * p
    }
}

fn check_pi(pi: f64) -> Result<()> {
    if pi > 0.0 && pi < 1.0 {
        Ok(())
    } else {
        domain(format!("pi must lie in (0, 1), got {pi}"))
    }
}

fn log_prior_blocks_fixed_pi(b: usize, n: usize, pi: f64) -> Result<f64> {
    check_pi(pi)?;
    if b == 0 || b > n {
        return domain(format!("block count {b} outside 1..={n}"));
    }
    Ok((b - 1) as f64 * pi.ln() + (n - b) as f64 * (1.0 - pi).ln())
}

/// `(b-1) log(pi) + (n-b) log(1-pi)`.
pub fn log_prior_partition_fixed_pi(p: &Partition, pi: f64) -> Result<f64> {
    log_prior_blocks_fixed_pi(p.num_blocks(), p.n(), pi)
}

/// Log Yao cohesion of the block covering 1-based observations `i+1..=j`.
pub fn log_cohesion(i: usize, j: usize, n: usize, pi: f64) -> Result<f64> {
    check_pi(pi)?;
    if i >= j || j > n {
        return domain(format!("invalid block ({i}, {j}] for n = {n}"));
    }
    let stay = (j - i - 1) as f64 * (1.0 - pi).ln();
    Ok(if j < n { pi.ln() + stay } else { stay })
}

/// `P(B = b) = C(n-1, b-1) pi^(b-1) (1-pi)^(n-b)`.
pub fn prior_block_count_pmf(b: usize, n: usize, pi: f64) -> Result<f64> {
    check_pi(pi)?;
    if b == 0 || b > n {
        return domain(format!("block count {b} outside 1..={n}"));
    }
    let k = (b - 1) as f64;
    let m = (n - 1) as f64;
    let ln_choose = ln_gamma(m + 1.0) - ln_gamma(k + 1.0) - ln_gamma(m - k + 1.0);
    Ok((ln_choose + log_prior_blocks_fixed_pi(b, n, pi)?).exp())
}

/// `P(B = b)` with `pi ~ Beta(a_pi, b_pi)` integrated out (Beta-binomial on `B - 1`).
pub fn prior_block_count_pmf_beta(b: usize, n: usize, a_pi: f64, b_pi: f64) -> Result<f64> {
    if b == 0 || b > n {
        return domain(format!("block count {b} outside 1..={n}"));
    }
    let k = (b - 1) as f64;
    let m = (n - 1) as f64;
    let ln_choose = ln_gamma(m + 1.0) - ln_gamma(k + 1.0) - ln_gamma(m - k + 1.0);
    Ok((ln_choose + log_marginal_prior_weight(b, n, a_pi, b_pi)? - ln_beta(a_pi, b_pi)).exp())
}

/// `log Beta(b + a_pi - 1, n + b_pi - b)`.
pub fn log_marginal_prior_weight(b: usize, n: usize, a_pi: f64, b_pi: f64) -> Result<f64> {
    let x = b as f64 + a_pi - 1.0;
    let y = n as f64 + b_pi - b as f64;
    if !(x > 0.0) || !(y > 0.0) {
        return domain(format!("Beta arguments ({x}, {y}) must be positive"));
    }
    Ok(ln_beta(x, y))
}

/// Unnormalised log posterior of a partition given its filter pass.
pub fn log_posterior_partition(p: &Partition, fr: &FilterResult, prior: &CohesionPrior) -> Result<f64> {
    Ok(fr.total_log_pred + prior.log_weight(p.num_blocks(), p.n())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn u(s: &str) -> IndicatorVector {
        s.parse().unwrap()
    }

    #[test]
    fn indicator_examples() {
        let p = to_partition(&u("1111"));
        assert_eq!(p.endpoints(), &[0, 5]);
        assert_eq!(p.num_blocks(), 1);
        let p = to_partition(&u("0000"));
        assert_eq!(p.endpoints(), &[0, 1, 2, 3, 4, 5]);
        assert_eq!(p.num_blocks(), 5);
        let p = to_partition(&u("1011"));
        assert_eq!(p.endpoints(), &[0, 2, 5]);
        assert_eq!(p.num_blocks(), 2);
        assert_eq!(to_indicator(&p).to_string(), "1011");
    }

    #[test]
    fn bijection_is_exhaustive_up_to_twelve() {
        for n in 1..=12usize {
            for mask in 0u32..(1 << (n - 1)) {
                let bits: Vec<bool> = (0..n - 1).map(|i| mask >> i & 1 == 1).collect();
                let iv = IndicatorVector::new(bits);
                let p = to_partition(&iv);
                assert_eq!(to_indicator(&p), iv);
                assert_eq!(p.num_blocks(), 1 + (n - 1) - iv.ones());
                assert_eq!(iv.num_blocks(), p.num_blocks());
                let starts = p.block_starts();
                assert!((0..n).all(|t| starts[t] == iv.starts_block(t)));
            }
        }
    }

    #[test]
    fn partition_validation() {
        assert!(Partition::new(5, vec![0, 2, 5]).is_ok());
        assert!(Partition::new(5, vec![0, 2, 4]).is_err());
        assert!(Partition::new(5, vec![1, 5]).is_err());
        assert!(Partition::new(5, vec![0, 3, 3, 5]).is_err());
        assert!(Partition::from_json("[0]").is_err());
        assert!(Partition::from_json("[0, 4, 9]").is_ok());
        assert!(Partition::from_json("{}").is_err());
        assert!("01x".parse::<IndicatorVector>().is_err());
    }

    #[test]
    fn partition_json_round_trip() {
        let p = Partition::new(9, vec![0, 4, 7, 9]).unwrap();
        assert_eq!(p.to_json(), "[0,4,7,9]");
        assert_eq!(Partition::from_json(&p.to_json()).unwrap(), p);
    }

    #[test]
    fn fixed_pi_examples() {
        let one = Partition::single_block(5);
        let all = Partition::all_breaks(5);
        assert_relative_eq!(log_prior_partition_fixed_pi(&one, 0.5).unwrap(), 4.0 * 0.5f64.ln());
        assert_relative_eq!(log_prior_partition_fixed_pi(&all, 0.5).unwrap(), 4.0 * 0.5f64.ln());
        assert!(log_prior_partition_fixed_pi(&one, 1.0).is_err());
        assert!(log_prior_partition_fixed_pi(&one, 0.0).is_err());
    }

    fn all_partitions(n: usize) -> impl Iterator<Item = Partition> {
        (0u32..(1 << (n - 1)))
            .map(move |mask| to_partition(&IndicatorVector::new((0..n - 1).map(|i| mask >> i & 1 == 1).collect())))
    }

    #[test]
    fn fixed_pi_prior_normalises_by_enumeration() {
        for n in 1..=10 {
            let total: f64 = all_partitions(n)
                .map(|p| log_prior_partition_fixed_pi(&p, 0.3).unwrap().exp())
                .sum();
            assert_relative_eq!(total, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn cohesion_product_identity() {
        for n in 1..=10 {
            for p in all_partitions(n) {
                let prod: f64 = p.blocks().map(|(i, j)| log_cohesion(i, j, n, 0.37).unwrap()).sum();
                assert_relative_eq!(prod, log_prior_partition_fixed_pi(&p, 0.37).unwrap(), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn block_count_pmf() {
        assert_relative_eq!(prior_block_count_pmf(1, 2, 0.5).unwrap(), 0.5);
        assert_relative_eq!(prior_block_count_pmf(2, 2, 0.5).unwrap(), 0.5);
        let total: f64 = (1..=100).map(|b| prior_block_count_pmf(b, 100, 0.37).unwrap()).sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-12);
        assert!(prior_block_count_pmf(0, 5, 0.5).is_err());
        assert!(prior_block_count_pmf(6, 5, 0.5).is_err());
    }

    #[test]
    fn uniform_beta_prior_expects_49_5_changepoints_for_n_100() {
        let prior = CohesionPrior::BetaPi { a_pi: 1.0, b_pi: 1.0 };
        assert_relative_eq!(prior.expected_changepoints(100), 49.5);
        // and the Beta-binomial pmf agrees
        let mean: f64 = (1..=100)
            .map(|b| (b - 1) as f64 * prior_block_count_pmf_beta(b, 100, 1.0, 1.0).unwrap())
            .sum();
        assert_relative_eq!(mean, 49.5, epsilon = 1e-9);
    }

    #[test]
    fn marginal_weight_examples() {
        assert_relative_eq!(
            log_marginal_prior_weight(2, 5, 1.0, 1.0).unwrap(),
            (1.0f64 / 20.0).ln(),
            epsilon = 1e-13
        );
        assert_relative_eq!(
            log_marginal_prior_weight(1, 5, 1.0, 1.0).unwrap(),
            (1.0f64 / 5.0).ln(),
            epsilon = 1e-13
        );
        assert!(log_marginal_prior_weight(1, 5, 0.0, 1.0).is_err());
        for &(a, bb) in &[(1.0, 1.0), (10.0, 1.0), (0.5, 3.0)] {
            for b in 2..=7usize {
                let prior = CohesionPrior::BetaPi { a_pi: a, b_pi: bb };
                let direct = log_marginal_prior_weight(b - 1, 7, a, bb).unwrap()
                    - log_marginal_prior_weight(b, 7, a, bb).unwrap();
                let expected = ((7.0 + bb - b as f64) / (b as f64 + a - 2.0)).ln();
                assert_relative_eq!(direct, expected, epsilon = 1e-12);
                assert_relative_eq!(prior.log_merge_ratio(b, 7).unwrap(), expected, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn orientation_swaps_parameters() {
        assert_eq!(
            CohesionPrior::beta(10.0, 1.0, BetaOrientation::NoChangeFirst),
            CohesionPrior::BetaPi { a_pi: 1.0, b_pi: 10.0 }
        );
        assert_eq!(
            CohesionPrior::beta(10.0, 1.0, BetaOrientation::ChangeFirst),
            CohesionPrior::BetaPi { a_pi: 10.0, b_pi: 1.0 }
        );
    }
}
