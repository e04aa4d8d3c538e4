//! Exact first-moment counts for tight homomorphisms into `C_7`.
//!
//! For a map `h` with class sizes `n_0..n_6`, every matching of a triple
//! that makes `h` a homomorphism has the same number `m_i` of edges between
//! classes `i - 1` and `i`, namely `n/2 - (n_{i+1} + n_{i+3} + n_{i+5})`.
//! The number of (map, triple) pairs for which the map is tight then
//! factors into a multinomial, matching-edge arrangements and, per class,
//! the number of ways three matchings can split it without leaving a vertex
//! pointing down in all three.
//!
//! Everything here is exact big-integer arithmetic.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::graph::PerfectMatching;

/// Largest `n` accepted by [`expected_tight_upper`].
pub const FORMULA_MAX_N: usize = 60;
/// Largest `n` accepted by [`brute_force_tight_sum`].
pub const BRUTE_FORCE_MAX_N: usize = 6;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormulaError {
    #[error("vertex count must be even (got {0})")]
    OddVertexCount(usize),
    #[error("n = {n} exceeds the enumeration budget of {limit}")]
    OverBudget { n: usize, limit: usize },
    #[error("composition needs exactly 7 class sizes: {0}")]
    BadComposition(String),
}

/// Class sizes `n_0..n_6` of a map into `C_7`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Composition {
    classes: [usize; 7],
}

/// Cut counts derived from a composition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutCounts {
    Feasible([usize; 7]),
    /// Some `m_i` is negative, so no matching triple fits these classes.
    Infeasible([i64; 7]),
}

impl Composition {
    pub fn new(classes: [usize; 7]) -> Self {
        Composition { classes }
    }

    pub fn classes(&self) -> &[usize; 7] {
        &self.classes
    }

    pub fn n(&self) -> usize {
        self.classes.iter().sum()
    }

    /// `m_i = n/2 - (n_{i+1} + n_{i+3} + n_{i+5})`, indices mod 7.
    pub fn cut_counts(&self) -> Result<CutCounts, FormulaError> {
        let n = self.n();
        if n % 2 == 1 {
            return Err(FormulaError::OddVertexCount(n));
        }
        let half = (n / 2) as i64;
        let c = |j: usize| self.classes[j % 7] as i64;
        let raw: [i64; 7] = std::array::from_fn(|i| half - (c(i + 1) + c(i + 3) + c(i + 5)));
        if raw.iter().all(|&m| m >= 0) {
            Ok(CutCounts::Feasible(raw.map(|m| m as usize)))
        } else {
            Ok(CutCounts::Infeasible(raw))
        }
    }
}

impl fmt::Display for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.classes.iter().map(|c| c.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

/// Parses `n0,n1,...,n6`.
impl FromStr for Composition {
    type Err = FormulaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts = s
            .split(',')
            .map(|p| p.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| FormulaError::BadComposition(format!("{:?}: {}", s, e)))?;
        let classes: [usize; 7] = parts
            .try_into()
            .map_err(|v: Vec<usize>| FormulaError::BadComposition(format!("got {} values", v.len())))?;
        Ok(Composition { classes })
    }
}

/// Memoized factorials and a Pascal triangle up to a fixed `n`.
pub struct Combinatorics {
    factorial: Vec<BigUint>,
    pascal: Vec<Vec<BigUint>>,
}

impl Combinatorics {
    pub fn new(max: usize) -> Self {
        let mut factorial = vec![BigUint::one()];
        for i in 1..=max {
            let next = &factorial[i - 1] * BigUint::from(i);
            factorial.push(next);
        }
        let mut pascal: Vec<Vec<BigUint>> = Vec::with_capacity(max + 1);
        for a in 0..=max {
            let mut row = vec![BigUint::one(); a + 1];
            for b in 1..a {
                row[b] = &pascal[a - 1][b - 1] + &pascal[a - 1][b];
            }
            pascal.push(row);
        }
        Combinatorics { factorial, pascal }
    }

    pub fn factorial(&self, a: usize) -> &BigUint {
        &self.factorial[a]
    }

    /// `C(a, b)`, zero when `b < 0` or `b > a`.
    pub fn binomial(&self, a: i64, b: i64) -> BigUint {
        if a < 0 || b < 0 || b > a {
            return BigUint::zero();
        }
        self.pascal[a as usize][b as usize].clone()
    }

    pub fn multinomial(&self, parts: &[usize]) -> BigUint {
        let n: usize = parts.iter().sum();
        let denom = parts
            .iter()
            .fold(BigUint::one(), |acc, &p| acc * &self.factorial[p]);
        &self.factorial[n] / denom
    }
}

/// Ways for three `m`-subsets of an `size`-set to have no common element.
fn split_count(comb: &Combinatorics, size: usize, m: usize) -> BigUint {
    let (s, m) = (size as i64, m as i64);
    let first = comb.binomial(s, m);
    if first.is_zero() {
        return first;
    }
    let inner = (0..=m).fold(BigUint::zero(), |acc, j| {
        acc + comb.binomial(m, j) * comb.binomial(s - m, m - j) * comb.binomial(s - j, m)
    });
    first * inner
}

fn pair_count_with(comb: &Combinatorics, c: &Composition) -> Result<BigUint, FormulaError> {
    let m = match c.cut_counts()? {
        CutCounts::Feasible(m) => m,
        CutCounts::Infeasible(_) => return Ok(BigUint::zero()),
    };
    let n = &c.classes;
    let mut total = comb.multinomial(n);
    for &mi in &m {
        total *= comb.factorial(mi).pow(3);
    }
    total *= comb.binomial(n[0] as i64, m[0] as i64).pow(3);
    for i in 1..7 {
        if total.is_zero() {
            break;
        }
        total *= split_count(comb, n[i], m[i]);
    }
    Ok(total)
}

/// Number of pairs `(h, T)` where `h` has class sizes `c` and is a tight
/// homomorphism from the union of the triple `T` into `C_7`.
pub fn tight_pair_count(c: &Composition) -> Result<BigUint, FormulaError> {
    let comb = Combinatorics::new(c.n());
    pair_count_with(&comb, c)
}

/// Compositions of `n` into 7 parts in lexicographic order, skipping any
/// prefix that already forces some `m_i < 0`.
pub fn feasible_compositions(n: usize) -> Result<Vec<Composition>, FormulaError> {
    if n % 2 == 1 {
        return Err(FormulaError::OddVertexCount(n));
    }
    let mut out = Vec::new();
    let mut classes = [0usize; 7];
    compose(n, 0, n, &mut classes, &mut out);
    Ok(out)
}

fn compose(n: usize, idx: usize, left: usize, classes: &mut [usize; 7], out: &mut Vec<Composition>) {
    if idx == 6 {
        classes[6] = left;
        if prefix_ok(n, classes, 7) {
            out.push(Composition { classes: *classes });
        }
        return;
    }
    for v in 0..=left {
        classes[idx] = v;
        if !prefix_ok(n, classes, idx + 1) {
            break;
        }
        compose(n, idx + 1, left - v, classes, out);
    }
    classes[idx] = 0;
}

/// Every partial sum `n_{i+1} + n_{i+3} + n_{i+5}` over assigned indices stays within `n/2`.
fn prefix_ok(n: usize, classes: &[usize; 7], assigned: usize) -> bool {
    (0..7).all(|i| {
        let s: usize = [i + 1, i + 3, i + 5]
            .iter()
            .map(|j| j % 7)
            .filter(|&j| j < assigned)
            .map(|j| classes[j])
            .sum();
        2 * s <= n
    })
}

/// Exact totals over all compositions of `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountReport {
    pub n: usize,
    /// Non-zero terms, in lexicographic order of composition.
    pub terms: Vec<(Composition, BigUint)>,
    pub total: BigUint,
    /// Number of ordered matching triples, `(n! / (2^{n/2} (n/2)!))^3`.
    pub triples: BigUint,
    pub expected: BigRational,
}

impl CountReport {
    pub fn expected_f64(&self) -> f64 {
        self.expected.to_f64().unwrap_or(f64::NAN)
    }
}

/// `(n-1)!!`, the number of perfect matchings on `n` vertices (1 for `n = 0`).
pub fn matching_count(n: usize) -> BigUint {
    (1..n).step_by(2).fold(BigUint::one(), |acc, k| acc * BigUint::from(k))
}

/// Expected number of tight homomorphisms into `C_7` of the union of three
/// uniform matchings on `n` vertices, as an exact rational.
pub fn expected_tight_upper(n: usize) -> Result<CountReport, FormulaError> {
    if n % 2 == 1 {
        return Err(FormulaError::OddVertexCount(n));
    }
    if n > FORMULA_MAX_N {
        return Err(FormulaError::OverBudget {
            n,
            limit: FORMULA_MAX_N,
        });
    }
    let comb = Combinatorics::new(n);
    let mut terms = Vec::new();
    let mut total = BigUint::zero();
    for c in feasible_compositions(n)? {
        let t = pair_count_with(&comb, &c)?;
        if !t.is_zero() {
            total += &t;
            terms.push((c, t));
        }
    }
    let triples = matching_count(n).pow(3);
    let expected = BigRational::new(BigInt::from(total.clone()), BigInt::from(triples.clone()));
    Ok(CountReport {
        n,
        terms,
        total,
        triples,
        expected,
    })
}

/// Ground truth by definition: over every map `h: V -> Z_7` and every
/// ordered triple of perfect matchings, count the pairs for which `h` is a
/// tight homomorphism of the union.
pub fn brute_force_tight_sum(n: usize) -> Result<BigUint, FormulaError> {
    if n % 2 == 1 {
        return Err(FormulaError::OddVertexCount(n));
    }
    if n > BRUTE_FORCE_MAX_N {
        return Err(FormulaError::OverBudget {
            n,
            limit: BRUTE_FORCE_MAX_N,
        });
    }
    if n == 0 {
        return Ok(BigUint::one());
    }
    let partners: Vec<Vec<usize>> = PerfectMatching::enumerate(n)
        .expect("n is even and positive")
        .iter()
        .map(|m| m.partners())
        .collect();
    let mut labels = vec![0usize; n];
    let mut total: u64 = 0;
    let mut usable: Vec<u32> = Vec::with_capacity(partners.len());
    for code in 0..7usize.pow(n as u32) {
        let mut rest = code;
        for l in labels.iter_mut() {
            *l = rest % 7;
            rest /= 7;
        }
        // vertices that need a neighbour one step up
        let need = (0..n).filter(|&v| labels[v] != 0).fold(0u32, |m, v| m | 1 << v);
        // for each matching that preserves every edge, the vertices it lifts
        usable.clear();
        for p in &partners {
            let mut up = 0u32;
            let mut ok = true;
            for v in 0..n {
                let (a, b) = (labels[v], labels[p[v]]);
                if b == (a + 1) % 7 {
                    up |= 1 << v;
                } else if a != (b + 1) % 7 {
                    ok = false;
                    break;
                }
            }
            if ok {
                usable.push(up);
            }
        }
        for &x in &usable {
            for &y in &usable {
                for &z in &usable {
                    if (x | y | z) & need == need {
                        total += 1;
                    }
                }
            }
        }
    }
    Ok(BigUint::from(total))
}
