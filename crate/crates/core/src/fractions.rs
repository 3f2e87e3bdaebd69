//! Fraction theory behind the cut bounds: Farey adjacency, enclosing pairs,
//! the generated ratio set `Q*`, the Case-2 ratio chains for ratios outside
//! it, the prime-scaled ladders `Q_p^m`, and the bound formulas built on them.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ratio::Ratio;

/// `a < b` are adjacent when `b.num * a.den - a.num * b.den == 1`.
pub fn is_adjacent(a: &Ratio, b: &Ratio) -> Result<bool> {
    if a >= b {
        return Err(Error::NotIncreasing {
            lo: a.clone(),
            hi: b.clone(),
        });
    }
    Ok(b.numer() * a.denom() - a.numer() * b.denom() == BigInt::one())
}

/// The narrowest interval `(lo, hi)` around `a` whose endpoints have smaller
/// denominators than `a`, found by Stern–Brocot descent from `(0/1, 1/1)`.
///
/// `a` is always the mediant of the returned pair.
pub fn enclosing_adjacent_pair(a: &Ratio) -> Result<(Ratio, Ratio)> {
    if !a.is_unit() {
        return Err(Error::OutOfUnitRange(a.clone()));
    }
    if a.is_zero() || a.is_one() {
        return Err(Error::InvalidArgument(format!(
            "{a} has denominator 1 and no enclosing pair"
        )));
    }
    let (mut lo_n, mut lo_d) = (BigInt::zero(), BigInt::one());
    let (mut hi_n, mut hi_d) = (BigInt::one(), BigInt::one());
    loop {
        let m_n = &lo_n + &hi_n;
        let m_d = &lo_d + &hi_d;
        // compare a with m_n / m_d
        let lhs = a.numer() * &m_d;
        let rhs = &m_n * a.denom();
        match lhs.cmp(&rhs) {
            std::cmp::Ordering::Equal => {
                return Ok((Ratio::new(lo_n, lo_d)?, Ratio::new(hi_n, hi_d)?));
            }
            std::cmp::Ordering::Less => {
                hi_n = m_n;
                hi_d = m_d;
            }
            std::cmp::Ordering::Greater => {
                lo_n = m_n;
                lo_d = m_d;
            }
        }
    }
}

/// All reduced fractions in `[0, 1]` with denominator at most `max_den`, increasing.
pub fn farey_sequence(max_den: u64) -> Vec<Ratio> {
    assert!(max_den >= 1, "max_den must be positive");
    let n = max_den as i128;
    let mut out = vec![Ratio::zero()];
    let (mut a, mut b, mut c, mut d) = (0i128, 1i128, 1i128, n);
    while c <= n {
        let k = (n + b) / d;
        let (na, nb, nc, nd) = (c, d, k * c - a, k * d - b);
        a = na;
        b = nb;
        c = nc;
        d = nd;
        out.push(Ratio::frac(a as i64, b as i64));
    }
    out
}

/// Coefficient `2(k-1)/k` of the lower bound at `l/k`; zero at the endpoints.
pub fn thomae_coefficient(a: &Ratio) -> Ratio {
    let k = Ratio::int(a.denom().clone());
    Ratio::int(2) * (&k - Ratio::one()) / k
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Distinct prime factors in increasing order.
pub fn prime_factors(n: &BigInt) -> Vec<BigInt> {
    let mut n = n.abs();
    let mut out = Vec::new();
    let mut d = BigInt::from(2);
    while &d * &d <= n {
        if (&n % &d).is_zero() {
            out.push(d.clone());
            while (&n % &d).is_zero() {
                n /= &d;
            }
        }
        d += 1;
    }
    if n > BigInt::one() {
        out.push(n);
    }
    out
}

/// One application of the `Q*` generating rule: `to` is `from / prime`, or
/// its complement when `complement` is set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QStarStep {
    pub from: Ratio,
    pub to: Ratio,
    pub prime: u64,
    pub complement: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QStarWitness {
    /// `0/1` or `1/1`.
    pub root: Ratio,
    pub steps: Vec<QStarStep>,
}

impl QStarWitness {
    /// The ratios visited, root first.
    pub fn ratios(&self) -> Vec<Ratio> {
        std::iter::once(self.root.clone())
            .chain(self.steps.iter().map(|s| s.to.clone()))
            .collect()
    }
}

/// Memoized backward search for `Q*` membership.
///
/// A ratio `l/k` is generated either as `l/(k/p)` scaled down by a prime `p`
/// with `p ∤ l`, or as the complement of `(k-l)/(k/p)` scaled down by `p`.
/// Both predecessors have strictly smaller denominators, so the recursion is
/// finite. Primes are tried largest first so that the forward chain applies
/// them in increasing order.
#[derive(Default)]
pub struct QStar {
    memo: HashMap<Ratio, Option<(Ratio, QStarStep)>>,
}

impl QStar {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn contains(&mut self, a: &Ratio) -> bool {
        self.witness(a).is_some()
    }

    pub fn witness(&mut self, a: &Ratio) -> Option<QStarWitness> {
        if !a.is_unit() {
            return None;
        }
        if !self.search(a) {
            return None;
        }
        let mut steps = Vec::new();
        let mut cur = a.clone();
        while let Some(Some((parent, step))) = self.memo.get(&cur) {
            steps.push(step.clone());
            cur = parent.clone();
        }
        steps.reverse();
        Some(QStarWitness { root: cur, steps })
    }

    fn search(&mut self, a: &Ratio) -> bool {
        if a.is_zero() || a.is_one() {
            return true;
        }
        if let Some(v) = self.memo.get(a) {
            return v.is_some();
        }
        let l = a.numer().clone();
        let k = a.denom().clone();
        let mut found = None;
        'primes: for p in prime_factors(&k).into_iter().rev() {
            let kp = &k / &p;
            let p64 = p.to_u64().unwrap_or(u64::MAX);
            let candidates = [(l.clone(), false), (&k - &l, true)];
            for (num, complement) in candidates {
                if (&num % &p).is_zero() || num > kp || num.is_zero() {
                    continue;
                }
                let parent = Ratio::new(num, kp.clone()).expect("nonzero");
                if self.search(&parent) {
                    found = Some((
                        parent.clone(),
                        QStarStep {
                            from: parent,
                            to: a.clone(),
                            prime: p64,
                            complement,
                        },
                    ));
                    break 'primes;
                }
            }
        }
        let member = found.is_some();
        self.memo.insert(a.clone(), found);
        member
    }
}

/// Membership in `Q*` with the generating chain on success.
pub fn qstar_member(a: &Ratio) -> Option<QStarWitness> {
    QStar::new().witness(a)
}

/// The ratio chain used for ratios outside `Q*`: each step maps `l/k` to
/// `(k mod l)/k`, stopping at the first member of `Q*`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatioChain {
    /// Starts at the input ratio and ends inside `Q*`.
    pub ratios: Vec<Ratio>,
    /// `divisors[i]` satisfies `1 - ratios[i+1] = divisors[i] * ratios[i]`.
    pub divisors: Vec<u64>,
    pub c_alpha: Ratio,
}

impl RatioChain {
    pub fn last(&self) -> &Ratio {
        self.ratios.last().expect("chain is never empty")
    }
}

pub fn case2_chain(a: &Ratio) -> Result<RatioChain> {
    if !a.is_unit() || a.is_zero() || a.is_one() {
        return Err(Error::InvalidArgument(format!("{a} is not in (0, 1)")));
    }
    let mut oracle = QStar::new();
    if oracle.contains(a) {
        return Err(Error::AlreadyInQStar(a.clone()));
    }
    let mut ratios = vec![a.clone()];
    let mut divisors = Vec::new();
    loop {
        let prev = ratios.last().unwrap().clone();
        let (l, k) = (prev.numer().clone(), prev.denom().clone());
        let next = Ratio::new(k.mod_floor(&l), k.clone())?;
        let d = k.div_floor(&l);
        debug_assert_eq!(next.complement(), Ratio::int(d.clone()) * &prev);
        divisors.push(d.to_u64().ok_or_else(|| Error::InvalidArgument("divisor overflow".into()))?);
        let done = oracle.contains(&next);
        ratios.push(next);
        if done {
            break;
        }
    }
    let last_den = Ratio::int(ratios.last().unwrap().denom().clone());
    let product: BigInt = divisors.iter().map(|&d| BigInt::from(d)).product();
    let c_alpha = Ratio::int(2) / last_den / Ratio::int(product);
    Ok(RatioChain {
        ratios,
        divisors,
        c_alpha,
    })
}

fn small_den(a: &Ratio) -> Result<u64> {
    a.denom()
        .to_u64()
        .ok_or_else(|| Error::InvalidArgument(format!("denominator of {a} exceeds 64 bits")))
}

/// The number of cuts the lower-bound layout for `a` with `n` agents is
/// guaranteed to need: `2c(k-1) - 2 + (n - ck)` with `c = floor(n/k)`,
/// clamped at zero.
pub fn lower_bound_cuts(a: &Ratio, n: u64) -> Result<u64> {
    if !a.is_unit() || a.is_zero() || a.is_one() {
        return Err(Error::InvalidArgument(format!("{a} is not in (0, 1)")));
    }
    let k = small_den(a)? as i128;
    let n = n as i128;
    let c = n / k;
    let v = 2 * c * (k - 1) - 2 + (n - c * k);
    Ok(v.max(0) as u64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundTag {
    Qstar,
    NonQstar,
    IrrationalFallback,
}

impl std::fmt::Display for BoundTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BoundTag::Qstar => "qstar",
            BoundTag::NonQstar => "non_qstar",
            BoundTag::IrrationalFallback => "irrational_fallback",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpperBound {
    pub value: u64,
    pub tag: BoundTag,
    /// `c_alpha` of the Case-2 chain when the ratio is outside `Q*`.
    pub c_alpha: Option<Ratio>,
    /// The `2n` bound that holds for every ratio.
    pub fallback: u64,
}

pub fn upper_bound_cuts(a: &Ratio, n: u64) -> Result<UpperBound> {
    if !a.is_unit() {
        return Err(Error::OutOfUnitRange(a.clone()));
    }
    let nn = Ratio::int(n);
    let fallback = 2 * n;
    if qstar_member(a).is_some() {
        let value = (thomae_coefficient(a) * nn).floor();
        return Ok(UpperBound {
            value: value.to_u64().unwrap_or(u64::MAX),
            tag: BoundTag::Qstar,
            c_alpha: None,
            fallback,
        });
    }
    let chain = case2_chain(a)?;
    let value = ((Ratio::int(2) - &chain.c_alpha) * nn).floor();
    Ok(UpperBound {
        value: value.to_u64().unwrap_or(u64::MAX),
        tag: BoundTag::NonQstar,
        c_alpha: Some(chain.c_alpha),
        fallback,
    })
}

/// `ceil(p/2) / p`, the scaling factor of the `Q_p` ladder.
pub fn qp_factor(p: u64) -> Ratio {
    Ratio::frac(p.div_ceil(2) as i64, p as i64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QpRule {
    /// `r ↦ ceil(p/2)/p · r`
    Scale,
    /// `r ↦ 1 - ceil(p/2)/p · r`
    ComplementScale,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QpStep {
    pub from: Ratio,
    pub to: Ratio,
    pub rule: QpRule,
}

#[derive(Clone, Debug)]
pub struct QpSet {
    pub p: u64,
    /// Sorted members of each level `0..=m`.
    pub levels: Vec<Vec<Ratio>>,
    /// Where each non-root member first appeared.
    pub provenance: BTreeMap<Ratio, QpStep>,
}

impl QpSet {
    pub fn new(p: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(QpSet {
            p,
            levels: vec![vec![Ratio::zero(), Ratio::one()]],
            provenance: BTreeMap::new(),
        })
    }

    pub fn level(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn members(&self) -> &[Ratio] {
        self.levels.last().unwrap()
    }

    /// Apply both generating rules to every member of the top level.
    pub fn grow(&mut self) {
        let c = qp_factor(self.p);
        let top = self.members();
        let mut next: BTreeSet<Ratio> = top.iter().cloned().collect();
        let mut fresh = Vec::new();
        for r in top {
            let scaled = &c * r;
            let comp = scaled.complement();
            for (to, rule) in [(scaled, QpRule::Scale), (comp, QpRule::ComplementScale)] {
                if next.insert(to.clone()) {
                    fresh.push(QpStep {
                        from: r.clone(),
                        to,
                        rule,
                    });
                }
            }
        }
        for step in fresh {
            self.provenance.entry(step.to.clone()).or_insert(step);
        }
        self.levels.push(next.into_iter().collect());
    }

    /// Generation chain from a root (`0` or `1`) to `r`.
    pub fn chain_to(&self, r: &Ratio) -> Option<Vec<QpStep>> {
        if !self.members().contains(r) {
            return None;
        }
        let mut steps = Vec::new();
        let mut cur = r.clone();
        while let Some(step) = self.provenance.get(&cur) {
            steps.push(step.clone());
            cur = step.from.clone();
        }
        steps.reverse();
        Some(steps)
    }

    /// Nearest member of the top level; ties go to the smaller member.
    pub fn nearest(&self, a: &Ratio) -> Ratio {
        let members = self.members();
        let idx = members.partition_point(|m| m < a);
        let mut best = None::<&Ratio>;
        for cand in [idx.checked_sub(1), Some(idx)].into_iter().flatten() {
            if let Some(m) = members.get(cand) {
                best = match best {
                    Some(b) if (b - a).abs() <= (m - a).abs() => Some(b),
                    _ => Some(m),
                };
            }
        }
        best.expect("levels always contain 0 and 1").clone()
    }
}

pub fn qp_set(p: u64, m: usize) -> Result<QpSet> {
    let mut set = QpSet::new(p)?;
    for _ in 0..m {
        set.grow();
    }
    Ok(set)
}

/// Largest gap between consecutive members at each level.
pub fn hole_sizes(q: &QpSet) -> Vec<Ratio> {
    q.levels
        .iter()
        .map(|level| {
            level
                .windows(2)
                .map(|w| &w[1] - &w[0])
                .max()
                .unwrap_or_else(Ratio::zero)
        })
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QpApproximation {
    pub target: Ratio,
    pub ratio: Ratio,
    pub p: u64,
    /// Level at which the search stopped.
    pub level: usize,
    pub chain: Vec<QpStep>,
}

impl QpApproximation {
    pub fn error(&self) -> Ratio {
        (&self.target - &self.ratio).abs()
    }
}

/// Largest ladder the approximation search will build.
const MAX_QP_MEMBERS: usize = 2_000_000;

/// Smallest `m` with `(ceil(p/2)/p)^m <= accuracy`.
pub fn qp_level_for(p: u64, accuracy: &Ratio) -> usize {
    let c = qp_factor(p);
    let mut power = Ratio::one();
    let mut m = 0;
    while power > *accuracy {
        power = power * &c;
        m += 1;
    }
    m
}

/// The member of `Q_p^m` nearest to `a` (ties to the smaller), where `m` is
/// the smallest level whose hole bound `(ceil(p/2)/p)^m` is within
/// `accuracy`, together with its generation chain.
pub fn nearest_qp_ratio(a: &Ratio, p: u64, accuracy: &Ratio) -> Result<QpApproximation> {
    if !a.is_unit() {
        return Err(Error::OutOfUnitRange(a.clone()));
    }
    if !accuracy.is_positive() {
        return Err(Error::InvalidArgument("accuracy must be positive".into()));
    }
    let mut set = QpSet::new(p)?;
    let m = qp_level_for(p, accuracy);
    while set.level() < m {
        if set.members().len() > MAX_QP_MEMBERS {
            return Err(Error::InvalidArgument(format!(
                "accuracy {accuracy} needs more than {MAX_QP_MEMBERS} ladder members"
            )));
        }
        set.grow();
    }
    let best = set.nearest(a);
    let chain = set.chain_to(&best).expect("member");
    Ok(QpApproximation {
        target: a.clone(),
        ratio: best,
        p,
        level: m,
        chain,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Ratio {
        Ratio::frac(n, d)
    }

    #[test]
    fn adjacency_examples() {
        assert!(is_adjacent(&r(1, 3), &r(1, 2)).unwrap());
        assert!(is_adjacent(&r(0, 1), &r(1, 1)).unwrap());
        assert!(!is_adjacent(&r(1, 3), &r(3, 7)).unwrap());
        assert!(is_adjacent(&r(1, 2), &r(1, 3)).is_err());
        assert!(is_adjacent(&r(1, 2), &r(1, 2)).is_err());
    }

    #[test]
    fn enclosing_pair_examples() {
        assert_eq!(enclosing_adjacent_pair(&r(2, 5)).unwrap(), (r(1, 3), r(1, 2)));
        assert_eq!(enclosing_adjacent_pair(&r(1, 2)).unwrap(), (r(0, 1), r(1, 1)));
        assert_eq!(enclosing_adjacent_pair(&r(3, 7)).unwrap(), (r(2, 5), r(1, 2)));
        assert!(enclosing_adjacent_pair(&r(0, 1)).is_err());
        assert!(enclosing_adjacent_pair(&r(1, 1)).is_err());
    }

    #[test]
    fn farey_examples() {
        assert_eq!(farey_sequence(2), vec![r(0, 1), r(1, 2), r(1, 1)]);
        assert_eq!(
            farey_sequence(3),
            vec![r(0, 1), r(1, 3), r(1, 2), r(2, 3), r(1, 1)]
        );
        let f5 = farey_sequence(5);
        assert_eq!(f5.len(), 11);
        for w in f5.windows(2) {
            assert!(is_adjacent(&w[0], &w[1]).unwrap());
        }
    }

    #[test]
    fn qstar_examples() {
        assert!(qstar_member(&r(4, 9)).is_none());
        assert!(qstar_member(&r(2, 5)).is_none());
        let w = qstar_member(&r(1, 6)).unwrap();
        assert_eq!(w.ratios(), vec![r(1, 1), r(1, 2), r(1, 6)]);
        assert_eq!(w.steps[0].prime, 2);
        assert_eq!(w.steps[1].prime, 3);
        assert_eq!(qstar_member(&r(0, 1)).unwrap().steps.len(), 0);
        let w = qstar_member(&r(5, 6)).unwrap();
        assert!(w.steps.last().unwrap().complement);
    }

    #[test]
    fn case2_examples() {
        let c = case2_chain(&r(2, 5)).unwrap();
        assert_eq!(c.ratios, vec![r(2, 5), r(1, 5)]);
        assert_eq!(c.divisors, vec![2]);
        assert_eq!(c.c_alpha, r(1, 5));

        let c = case2_chain(&r(3, 7)).unwrap();
        assert_eq!(c.ratios, vec![r(3, 7), r(1, 7)]);
        assert_eq!(c.divisors, vec![2]);
        assert_eq!(c.c_alpha, r(1, 7));

        let c = case2_chain(&r(4, 9)).unwrap();
        assert!(qstar_member(c.last()).is_some());
        for w in c.ratios.windows(2) {
            assert!(w[1].numer() < w[0].numer());
        }
        assert!(matches!(case2_chain(&r(1, 6)), Err(Error::AlreadyInQStar(_))));
    }

    #[test]
    fn bound_examples() {
        assert_eq!(lower_bound_cuts(&r(2, 5), 5).unwrap(), 6);
        assert_eq!(lower_bound_cuts(&r(1, 2), 4).unwrap(), 2);
        assert_eq!(lower_bound_cuts(&r(1, 3), 7).unwrap(), 7);

        let u = upper_bound_cuts(&r(1, 2), 3).unwrap();
        assert_eq!((u.value, u.tag), (3, BoundTag::Qstar));
        assert_eq!(upper_bound_cuts(&r(1, 6), 2).unwrap().value, 3);
        let u = upper_bound_cuts(&r(2, 5), 10).unwrap();
        assert_eq!((u.value, u.tag, u.fallback), (18, BoundTag::NonQstar, 20));
    }

    #[test]
    fn qp_set_examples() {
        assert_eq!(qp_set(3, 0).unwrap().members(), &[r(0, 1), r(1, 1)]);
        assert_eq!(
            qp_set(3, 1).unwrap().members(),
            &[r(0, 1), r(1, 3), r(2, 3), r(1, 1)]
        );
        // ceil(2/2)/2 = 1/2 maps 1 to 1/2, so level one gains the midpoint.
        assert_eq!(qp_set(2, 1).unwrap().members(), &[r(0, 1), r(1, 2), r(1, 1)]);
        assert!(matches!(qp_set(4, 1), Err(Error::NotPrime(4))));
    }

    #[test]
    fn hole_size_examples() {
        let q = qp_set(3, 2).unwrap();
        let g = hole_sizes(&q);
        assert_eq!(g[0], r(1, 1));
        assert!(g[1] <= r(2, 3));
        // Q_3^2 = {0, 2/9, 1/3, 4/9, 5/9, 2/3, 7/9, 1}
        assert_eq!(
            q.members(),
            &[r(0, 1), r(2, 9), r(1, 3), r(4, 9), r(5, 9), r(2, 3), r(7, 9), r(1, 1)]
        );
        assert_eq!(g[2], r(2, 9));
    }

    #[test]
    fn nearest_examples() {
        let any = nearest_qp_ratio(&r(1, 2), 3, &r(1, 1)).unwrap();
        assert!(any.error() <= r(1, 1));
        let exact = nearest_qp_ratio(&r(1, 3), 3, &r(1, 100)).unwrap();
        assert_eq!(exact.ratio, r(1, 3));
        assert_eq!(exact.chain.len(), 1);
        let approx = nearest_qp_ratio(&r(47, 100), 3, &r(1, 16)).unwrap();
        assert!(approx.error() <= r(1, 16));
        assert_eq!(approx.level, 7);
        // replay the chain
        let c = qp_factor(3);
        let mut cur = if approx.chain.is_empty() {
            approx.ratio.clone()
        } else {
            approx.chain[0].from.clone()
        };
        for s in &approx.chain {
            assert_eq!(s.from, cur);
            cur = match s.rule {
                QpRule::Scale => &c * &cur,
                QpRule::ComplementScale => (&c * &cur).complement(),
            };
            assert_eq!(cur, s.to);
        }
        assert_eq!(cur, approx.ratio);
    }

    #[test]
    fn thomae_values() {
        assert_eq!(thomae_coefficient(&r(1, 3)), r(4, 3));
        assert_eq!(thomae_coefficient(&r(1, 2)), r(1, 1));
        assert_eq!(thomae_coefficient(&r(0, 1)), r(0, 1));
    }
}
