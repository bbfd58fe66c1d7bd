//! Exact integer combinatorics for gl(d) and su(2) representations.
//!
//! Everything here is exact: counts are [`BigUint`], identities are checked in
//! [`BigRational`]. Spin labels are [`HalfInt`]s stored as doubled integers.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A non-negative or negative half-integer, stored as twice its value.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct HalfInt(i64);

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt(0);
    pub const HALF: HalfInt = HalfInt(1);
    pub const ONE: HalfInt = HalfInt(2);

    pub const fn from_twice(twice: i64) -> Self {
        HalfInt(twice)
    }

    pub const fn from_int(value: i64) -> Self {
        HalfInt(2 * value)
    }

    pub const fn twice(self) -> i64 {
        self.0
    }

    pub const fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn as_integer(self) -> Option<i64> {
        self.is_integer().then_some(self.0 / 2)
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub const fn abs(self) -> Self {
        HalfInt(self.0.abs())
    }

    /// `self, self - 1, ..., lo` (empty if `lo > self`).
    pub fn down_to(self, lo: HalfInt) -> impl Iterator<Item = HalfInt> {
        let hi = self.0;
        let lo = lo.0;
        (0..).map(move |i: i64| hi - 2 * i).take_while(move |&t| t >= lo).map(HalfInt)
    }

    /// `lo, lo + 1, ..., hi` (empty if `lo > hi`).
    pub fn up_to(lo: HalfInt, hi: HalfInt) -> impl Iterator<Item = HalfInt> {
        (0..).map(move |i: i64| lo.0 + 2 * i).take_while(move |&t| t <= hi.0).map(HalfInt)
    }

    /// Whether `self - other` is an integer.
    pub const fn same_parity(self, other: HalfInt) -> bool {
        (self.0 - other.0) % 2 == 0
    }
}

impl Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt(self.0 + rhs.0)
    }
}

impl Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: HalfInt) -> HalfInt {
        HalfInt(self.0 - rhs.0)
    }
}

impl Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt(-self.0)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl FromStr for HalfInt {
    type Err = Error;

    /// Accepts `"3/2"`, `"-1/2"`, `"4/2"`, `"2"`, `"1.5"`, `"2.0"`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("not a half-integer: {s:?}"));
        let t = s.trim();
        if let Some((num, den)) = t.split_once('/') {
            let num: i64 = num.trim().parse().map_err(|_| bad())?;
            let den: i64 = den.trim().parse().map_err(|_| bad())?;
            return match den {
                1 => num.checked_mul(2).map(HalfInt).ok_or_else(bad),
                2 => Ok(HalfInt(num)),
                _ => Err(bad()),
            };
        }
        if let Some((int, frac)) = t.split_once('.') {
            let negative = int.trim_start().starts_with('-');
            let whole: i64 = match int {
                "" | "-" | "+" => 0,
                _ => int.parse().map_err(|_| bad())?,
            };
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let trimmed = frac.trim_end_matches('0');
            let half = match trimmed {
                "" => 0,
                "5" => 1,
                _ => return Err(bad()),
            };
            let twice = whole.checked_mul(2).ok_or_else(bad)?;
            let twice = if negative { twice.checked_sub(half) } else { twice.checked_add(half) };
            return twice.map(HalfInt).ok_or_else(bad);
        }
        let v: i64 = t.parse().map_err(|_| bad())?;
        v.checked_mul(2).map(HalfInt).ok_or_else(bad)
    }
}

impl TryFrom<String> for HalfInt {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<HalfInt> for String {
    fn from(h: HalfInt) -> String {
        h.to_string()
    }
}

/// A highest weight of gl(d): `d` non-increasing non-negative integers.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    parts: Vec<u64>,
}

impl Partition {
    pub fn new(parts: Vec<u64>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidArgument("partition needs at least one part".into()));
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument(format!("partition parts must be non-increasing: {parts:?}")));
        }
        Ok(Partition { parts })
    }

    pub(crate) fn from_parts_unchecked(parts: Vec<u64>) -> Self {
        debug_assert!(!parts.is_empty() && parts.windows(2).all(|w| w[0] >= w[1]));
        Partition { parts }
    }

    pub fn zero(d: usize) -> Self {
        Partition { parts: vec![0; d.max(1)] }
    }

    /// `(k, k, ..., k)` of length `d`.
    pub fn rectangular(d: usize, k: u64) -> Self {
        Partition { parts: vec![k; d.max(1)] }
    }

    /// `(s, 0, ..., 0)` of length `d`, the symmetric power `Y_(s)`.
    pub fn symmetric(d: usize, s: u64) -> Self {
        let mut parts = vec![0; d.max(1)];
        parts[0] = s;
        Partition { parts }
    }

    pub fn parts(&self) -> &[u64] {
        &self.parts
    }

    /// Number of parts including zeros (the `d` of gl(d)).
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.iter().all(|&p| p == 0)
    }

    pub fn size(&self) -> u64 {
        self.parts.iter().sum()
    }

    /// Pads with zeros (or fails if that would drop a non-zero part) to length `d`.
    pub fn with_len(&self, d: usize) -> Option<Partition> {
        if d >= self.parts.len() {
            let mut parts = self.parts.clone();
            parts.resize(d, 0);
            Some(Partition { parts })
        } else if self.parts[d..].iter().all(|&p| p == 0) && d > 0 {
            Some(Partition { parts: self.parts[..d].to_vec() })
        } else {
            None
        }
    }

    /// Contains `other` as a Young diagram (both read with the same length).
    pub fn contains(&self, other: &Partition) -> bool {
        let n = self.parts.len().max(other.parts.len());
        (0..n).all(|i| self.parts.get(i).copied().unwrap_or(0) >= other.parts.get(i).copied().unwrap_or(0))
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

impl FromStr for Partition {
    type Err = Error;

    /// Accepts `"2,1,0"`, `"(2, 1, 0)"` or `"2 1 0"`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let t = t.strip_prefix('(').unwrap_or(t);
        let t = t.strip_suffix(')').unwrap_or(t);
        let parts = t
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|p| !p.is_empty())
            .map(|p| p.parse::<u64>().map_err(|_| Error::Parse(format!("bad partition part {p:?} in {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Partition::new(parts)
    }
}

/// A Gelfand-Tsetlin pattern: rows `l = d, ..., 1`, row `l` holding `l` entries
/// that interlace the row above.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GTPattern {
    // rows[l - 1] is row l
    rows: Vec<Vec<u64>>,
}

impl GTPattern {
    /// `rows` are given top row first (length `d`, then `d - 1`, ..., `1`).
    pub fn new(top_down: Vec<Vec<u64>>) -> Result<Self> {
        let d = top_down.len();
        if d == 0 {
            return Err(Error::InvalidArgument("empty GT pattern".into()));
        }
        let mut rows = top_down;
        rows.reverse();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != i + 1 {
                return Err(Error::InvalidArgument(format!(
                    "GT pattern row {} has {} entries",
                    i + 1,
                    row.len()
                )));
            }
        }
        let p = GTPattern { rows };
        if !p.interlaces() {
            return Err(Error::InvalidArgument("GT pattern rows do not interlace".into()));
        }
        Ok(p)
    }

    fn interlaces(&self) -> bool {
        (2..=self.d()).all(|l| {
            let up = &self.rows[l - 1];
            let down = &self.rows[l - 2];
            (0..l - 1).all(|k| up[k] >= down[k] && down[k] >= up[k + 1])
        })
    }

    pub fn d(&self) -> usize {
        self.rows.len()
    }

    /// Row `l` (1-based, `1 ≤ l ≤ d`).
    pub fn row(&self, l: usize) -> &[u64] {
        &self.rows[l - 1]
    }

    pub fn top(&self) -> &[u64] {
        &self.rows[self.d() - 1]
    }

    /// Entry `λ^l_k` (both 1-based).
    pub fn entry(&self, k: usize, l: usize) -> u64 {
        self.rows[l - 1][k - 1]
    }

    /// `r_l`, the sum of row `l`; `r_0 = 0`.
    pub fn row_sum(&self, l: usize) -> u64 {
        if l == 0 {
            0
        } else {
            self.rows[l - 1].iter().sum()
        }
    }

    /// The pattern with `λ^l_k` shifted by `delta`, if it is still a valid
    /// pattern with the same top row.
    pub fn shifted(&self, k: usize, l: usize, delta: i64) -> Option<GTPattern> {
        if l == 0 || l >= self.d() || k == 0 || k > l {
            return None;
        }
        let v = self.rows[l - 1][k - 1] as i64 + delta;
        if v < 0 {
            return None;
        }
        let v = v as u64;
        let up = &self.rows[l];
        if v > up[k - 1] || v < up[k] {
            return None;
        }
        if l >= 2 {
            let down = &self.rows[l - 2];
            if k < l && v < down[k - 1] {
                return None;
            }
            if k >= 2 && v > down[k - 2] {
                return None;
            }
        }
        let mut rows = self.rows.clone();
        rows[l - 1][k - 1] = v;
        Some(GTPattern { rows })
    }
}

impl fmt::Display for GTPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for l in (1..=self.d()).rev() {
            if l != self.d() {
                write!(f, "; ")?;
            }
            let row: Vec<String> = self.row(l).iter().map(u64::to_string).collect();
            write!(f, "{}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

/// Partitions of `n` into at most `k` parts, zero-padded to length `k`, in
/// decreasing lexicographic order: `partitions(4, 2) = [(4,0), (3,1), (2,2)]`.
pub fn partitions(n: u64, k: usize) -> Vec<Partition> {
    fn rec(rem: u64, max_part: u64, slots: usize, cur: &mut Vec<u64>, out: &mut Vec<Partition>) {
        if slots == 0 {
            if rem == 0 {
                out.push(Partition::from_parts_unchecked(cur.clone()));
            }
            return;
        }
        let hi = rem.min(max_part);
        let lo = rem.div_ceil(slots as u64);
        if lo > hi {
            return;
        }
        for part in (lo..=hi).rev() {
            cur.push(part);
            rec(rem - part, part, slots - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k == 0 {
        return out;
    }
    rec(n, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// All GT patterns with top row `lam`. The first pattern is the highest-weight
/// one (every row maximal); lower rows run through their entries in
/// decreasing order.
pub fn gt_patterns(lam: &Partition) -> Vec<GTPattern> {
    fn rec(rows_desc: &mut Vec<Vec<u64>>, out: &mut Vec<GTPattern>) {
        let above = rows_desc.last().expect("non-empty").clone();
        let l = above.len();
        if l == 1 {
            let mut rows = rows_desc.clone();
            rows.reverse();
            out.push(GTPattern { rows });
            return;
        }
        let mut row = vec![0u64; l - 1];
        fill(&above, 0, &mut row, rows_desc, out);
    }
    fn fill(
        above: &[u64],
        k: usize,
        row: &mut Vec<u64>,
        rows_desc: &mut Vec<Vec<u64>>,
        out: &mut Vec<GTPattern>,
    ) {
        if k == row.len() {
            rows_desc.push(row.clone());
            rec(rows_desc, out);
            rows_desc.pop();
            return;
        }
        for v in (above[k + 1]..=above[k]).rev() {
            row[k] = v;
            fill(above, k + 1, row, rows_desc, out);
        }
    }
    let mut out = Vec::new();
    rec(&mut vec![lam.parts().to_vec()], &mut out);
    out
}

/// Weyl dimension `∏_{i<j} (λ_i − λ_j + j − i)/(j − i)`.
pub fn weyl_dim(lam: &Partition) -> BigUint {
    let p = lam.parts();
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            num *= BigUint::from(p[i] - p[j] + (j - i) as u64);
            den *= BigUint::from((j - i) as u64);
        }
    }
    num / den
}

/// `λ_k + μ_{d+1−k} = λ_1 + μ_d` for every `k`.
pub fn is_dual(lam: &Partition, mu: &Partition) -> bool {
    let d = lam.len();
    if mu.len() != d {
        return false;
    }
    let (l, m) = (lam.parts(), mu.parts());
    let c = l[0] + m[d - 1];
    (0..d).all(|k| l[k] + m[d - 1 - k] == c)
}

/// The unique `μ` with `|μ| = total` dual to `lam`, if one exists.
pub fn dual_partition(lam: &Partition, total: u64) -> Option<Partition> {
    let d = lam.len() as u64;
    let l = lam.parts();
    // |μ| = d·c − |λ| with c = λ_1 + μ_d
    let x = total.checked_add(lam.size())?;
    if x % d != 0 {
        return None;
    }
    let c = x / d;
    if c < l[0] {
        return None;
    }
    let parts: Vec<u64> = (0..l.len()).map(|i| c - l[l.len() - 1 - i]).collect();
    Some(Partition::from_parts_unchecked(parts))
}

/// Pattern duality `λ^l_k + μ^l_{l+1−k} = c` for every row `l`, with the
/// constant `c = λ_1 + μ_d` taken from the top rows.
///
/// With a per-row constant the condition would be vacuous on row 1 and the
/// dual pattern would not be unique.
pub fn is_dual_gt(p1: &GTPattern, p2: &GTPattern) -> bool {
    let d = p1.d();
    if p2.d() != d {
        return false;
    }
    let c = p1.top()[0] + p2.top()[d - 1];
    (1..=d).all(|l| {
        let (a, b) = (p1.row(l), p2.row(l));
        (0..l).all(|k| a[k] + b[l - 1 - k] == c)
    })
}

/// The unique pattern of `GT(mu)` dual to `p`, if `mu` is dual to the top row.
pub fn dual_pattern(p: &GTPattern, mu: &Partition) -> Option<GTPattern> {
    let d = p.d();
    if mu.len() != d || !is_dual(&Partition::from_parts_unchecked(p.top().to_vec()), mu) {
        return None;
    }
    let c = p.top()[0] + mu.parts()[d - 1];
    let rows = (1..=d)
        .map(|l| {
            let r = p.row(l);
            (0..l).map(|k| c - r[l - 1 - k]).collect()
        })
        .collect();
    Some(GTPattern { rows })
}

/// Multiplicities `N(n, k)` of spin `k` in `V_(s)^{⊗n}`.
#[derive(Clone, Debug)]
pub struct Su2Multiplicities {
    s: HalfInt,
    n: u32,
    // indexed by twice k
    table: Vec<BigUint>,
}

impl Su2Multiplicities {
    pub fn new(n: u32, s: HalfInt) -> Self {
        assert!(s.twice() >= 0, "spin must be non-negative");
        let s2 = s.twice() as usize;
        let mut table = vec![BigUint::zero(); s2 + 1];
        table[s2] = BigUint::one();
        if n == 0 {
            return Su2Multiplicities { s, n, table: vec![BigUint::one()] };
        }
        for m in 2..=n as usize {
            let top = m * s2;
            let mut next = vec![BigUint::zero(); top + 1];
            for (k2, slot) in next.iter_mut().enumerate() {
                // V_(j') ⊗ V_(s) ⊃ V_(k)  ⇔  |k − s| ≤ j' ≤ k + s
                let lo = k2.abs_diff(s2);
                let hi = (k2 + s2).min(table.len() - 1);
                let mut acc = BigUint::zero();
                let mut j2 = lo;
                while j2 <= hi {
                    acc += &table[j2];
                    j2 += 2;
                }
                *slot = acc;
            }
            table = next;
        }
        Su2Multiplicities { s, n, table }
    }

    pub fn spin(&self) -> HalfInt {
        self.s
    }

    pub fn factors(&self) -> u32 {
        self.n
    }

    pub fn get(&self, k: HalfInt) -> BigUint {
        if k.twice() < 0 {
            return BigUint::zero();
        }
        self.table.get(k.twice() as usize).cloned().unwrap_or_default()
    }

    /// `(k, N(n, k))` for every `k` with non-zero multiplicity, ascending.
    pub fn nonzero(&self) -> impl Iterator<Item = (HalfInt, &BigUint)> {
        self.table
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k2, c)| (HalfInt::from_twice(k2 as i64), c))
    }

    /// Largest spin present, `n·s`.
    pub fn max_spin(&self) -> HalfInt {
        HalfInt::from_twice(self.table.len() as i64 - 1)
    }
}

/// Multiplicity `N(n, k)` of `V_(k)` in `V_(s)^{⊗n}`; zero outside `[0, ns]`.
pub fn mult_su2(n: u32, k: HalfInt, s: HalfInt) -> BigUint {
    Su2Multiplicities::new(n, s).get(k)
}

fn horizontal_strips(mu: &[u64], s: u64, bound: Option<&[u64]>) -> Vec<Vec<u64>> {
    fn rec(
        mu: &[u64],
        bound: Option<&[u64]>,
        i: usize,
        rem: u64,
        cur: &mut Vec<u64>,
        out: &mut Vec<Vec<u64>>,
    ) {
        if i == mu.len() {
            if rem == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let mut hi = mu[i] + rem;
        if i > 0 {
            hi = hi.min(mu[i - 1]);
        }
        if let Some(b) = bound {
            hi = hi.min(b[i]);
        }
        if hi < mu[i] {
            return;
        }
        for v in mu[i]..=hi {
            cur.push(v);
            rec(mu, bound, i + 1, rem - (v - mu[i]), cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(mu, bound, 0, s, &mut Vec::with_capacity(mu.len()), &mut out);
    out
}

/// Decomposition of `Y_(s)^{⊗k}` for gl(d): `λ ↦ N(λ)`, built by adding one
/// horizontal strip of size `s` per tensor factor.
pub fn symmetric_power_decomposition(s: u64, k: u32, d: usize) -> BTreeMap<Partition, BigUint> {
    pieri_iterate(s, k, d, None)
}

fn pieri_iterate(s: u64, k: u32, d: usize, bound: Option<&[u64]>) -> BTreeMap<Partition, BigUint> {
    let d = d.max(1);
    let mut cur: HashMap<Vec<u64>, BigUint> = HashMap::new();
    cur.insert(vec![0; d], BigUint::one());
    for _ in 0..k {
        let mut next: HashMap<Vec<u64>, BigUint> = HashMap::new();
        for (mu, c) in &cur {
            for nu in horizontal_strips(mu, s, bound) {
                *next.entry(nu).or_default() += c;
            }
        }
        cur = next;
    }
    cur.into_iter().map(|(p, c)| (Partition::from_parts_unchecked(p), c)).collect()
}

/// Multiplicity of `V_λ` in `Y_(s)^{⊗k}` (iterated Pieri rule). A size or
/// length mismatch yields zero.
pub fn mult_symmetric_power(s: u64, k: u32, d: usize, lam: &Partition) -> BigUint {
    let Some(lam) = lam.with_len(d) else {
        return BigUint::zero();
    };
    if lam.size() != s * k as u64 {
        return BigUint::zero();
    }
    let table = pieri_iterate(s, k, d, Some(lam.parts()));
    table.get(&lam).cloned().unwrap_or_default()
}

/// Littlewood-Richardson coefficient `N^ν_{λ,μ}`, by counting LR tableaux of
/// skew shape `ν/λ` and content `μ`.
pub fn mult_lr(lam: &Partition, mu: &Partition, nu: &Partition) -> BigUint {
    let d = lam.len().max(mu.len()).max(nu.len());
    let (Some(lam), Some(mu), Some(nu)) = (lam.with_len(d), mu.with_len(d), nu.with_len(d)) else {
        return BigUint::zero();
    };
    if lam.size() + mu.size() != nu.size() || !nu.contains(&lam) {
        return BigUint::zero();
    }
    // Cells in reading order: rows top to bottom, right to left.
    let mut cells = Vec::new();
    for r in 0..d {
        for c in (lam.parts()[r]..nu.parts()[r]).rev() {
            cells.push((r, c as usize));
        }
    }
    let content = mu.parts().iter().map(|&m| m as usize).collect::<Vec<_>>();
    let letters = content.iter().take_while(|&&m| m > 0).count();
    let width = nu.parts()[0] as usize;
    let mut grid = vec![vec![0usize; width]; d];
    let mut counts = vec![0usize; letters + 1];

    #[allow(clippy::too_many_arguments)]
    fn rec(
        idx: usize,
        cells: &[(usize, usize)],
        lam: &[u64],
        grid: &mut Vec<Vec<usize>>,
        counts: &mut Vec<usize>,
        content: &[usize],
        letters: usize,
        nu: &[u64],
    ) -> u64 {
        if idx == cells.len() {
            return 1;
        }
        let (r, c) = cells[idx];
        // Weakly increasing along rows: the cell to the right is already filled.
        let mut hi = letters;
        if (c + 1) < nu[r] as usize {
            hi = hi.min(grid[r][c + 1]);
        }
        // Strictly increasing down columns.
        let mut lo = 1;
        if r > 0 && (c as u64) >= lam[r - 1] && (c as u64) < nu[r - 1] {
            lo = lo.max(grid[r - 1][c] + 1);
        }
        let mut total = 0;
        for v in lo..=hi {
            if counts[v] + 1 > content[v - 1] {
                continue;
            }
            if v > 1 && counts[v] + 1 > counts[v - 1] {
                continue;
            }
            counts[v] += 1;
            grid[r][c] = v;
            total += rec(idx + 1, cells, lam, grid, counts, content, letters, nu);
            counts[v] -= 1;
        }
        grid[r][c] = 0;
        total
    }
    let n = rec(0, &cells, lam.parts(), &mut grid, &mut counts, &content, letters, nu.parts());
    BigUint::from(n)
}

/// Dimension of the SU(d)-invariant subspace of `Y_(s)^{⊗p} ⊗ Y_(s)^{⊗q}`:
/// `Σ_λ N(λ) N(λ_*)` over `λ ⊢ ps` with dual `λ_* ⊢ qs`.
pub fn d_inv_count(d: usize, s: u64, p: u32, q: u32) -> BigUint {
    if d == 0 || !((p + q) as u64 * s).is_multiple_of(d as u64) {
        return BigUint::zero();
    }
    let left = symmetric_power_decomposition(s, p, d);
    let right = symmetric_power_decomposition(s, q, d);
    dual_pairs(&left, &right, q as u64 * s).map(|(_, a, b)| a * b).sum()
}

/// `(λ, N(λ), N(λ_*))` for every `λ` in `left` whose dual of size
/// `dual_total` occurs in `right`.
pub fn dual_pairs<'a>(
    left: &'a BTreeMap<Partition, BigUint>,
    right: &'a BTreeMap<Partition, BigUint>,
    dual_total: u64,
) -> impl Iterator<Item = (&'a Partition, &'a BigUint, &'a BigUint)> + 'a {
    left.iter().filter_map(move |(lam, a)| {
        let mu = dual_partition(lam, dual_total)?;
        right.get(&mu).map(|b| (lam, a, b))
    })
}

/// `binomial(n, k)` exactly.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= BigUint::from(n - i);
        acc /= BigUint::from(i + 1);
    }
    acc
}

/// Both sides of `Σ_{k=0}^r (−1)^k C(r,k)/(k+t) = 1/(t·C(r+t,t))`.
#[derive(Clone, Debug, PartialEq)]
pub struct FIdentity {
    pub t: u64,
    pub r: u64,
    pub alternating: BigRational,
    pub closed_form: BigRational,
}

impl FIdentity {
    pub fn holds(&self) -> bool {
        self.alternating == self.closed_form
    }
}

pub fn f_identity(t: u64, r: u64) -> Result<FIdentity> {
    if t == 0 || r == 0 {
        return Err(Error::InvalidArgument(format!("F(t, r) needs positive t and r, got t={t}, r={r}")));
    }
    let mut alternating = BigRational::zero();
    for k in 0..=r {
        let term = BigRational::new(BigInt::from(binomial(r, k)), BigInt::from(k + t));
        if k % 2 == 0 {
            alternating += term;
        } else {
            alternating -= term;
        }
    }
    let closed_form = BigRational::new(BigInt::one(), BigInt::from(t) * BigInt::from(binomial(r + t, t)));
    Ok(FIdentity { t, r, alternating, closed_form })
}

/// Nearest partition of `total` to the real profile `profile · s`: each part is
/// floored, the remainder goes to the largest part, and the result is padded
/// with zeros to length `d`.
pub fn round_profile(profile: &[f64], s: u64, total: u64, d: usize) -> Result<Partition> {
    if profile.is_empty() || profile.len() > d {
        return Err(Error::InvalidArgument(format!("profile length {} must be in 1..={d}", profile.len())));
    }
    if profile.windows(2).any(|w| w[0] < w[1]) || profile.iter().any(|&x| !(x >= 0.0)) {
        return Err(Error::InvalidArgument("profile must be non-increasing and non-negative".into()));
    }
    let mut parts: Vec<u64> = profile.iter().map(|&x| (x * s as f64).floor() as u64).collect();
    let sum: u64 = parts.iter().sum();
    if sum > total {
        return Err(Error::InvalidArgument(format!("profile sums past {total} at s={s}")));
    }
    parts[0] += total - sum;
    parts.resize(d, 0);
    Partition::new(parts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn part(s: &str) -> Partition {
        s.parse().unwrap()
    }

    fn h(s: &str) -> HalfInt {
        s.parse().unwrap()
    }

    // Brute force: all length-k non-increasing tuples summing to n.
    fn brute_partitions(n: u64, k: usize) -> Vec<Vec<u64>> {
        let mut out = Vec::new();
        let total = (n + 1).pow(k as u32);
        for code in 0..total {
            let mut c = code;
            let mut v = Vec::with_capacity(k);
            for _ in 0..k {
                v.push(c % (n + 1));
                c /= n + 1;
            }
            if v.iter().sum::<u64>() == n && v.windows(2).all(|w| w[0] >= w[1]) {
                out.push(v);
            }
        }
        out.sort();
        out.reverse();
        out
    }

    #[test]
    fn halfint_parsing() {
        assert_eq!(h("3/2").twice(), 3);
        assert_eq!(h("-1/2").twice(), -1);
        assert_eq!(h("4/2").twice(), 4);
        assert_eq!(h("2").twice(), 4);
        assert_eq!(h("1.5").twice(), 3);
        assert_eq!(h("-1.5").twice(), -3);
        assert_eq!(h("-0.5").twice(), -1);
        assert_eq!(h("2.0").twice(), 4);
        assert_eq!(h(" 5/1 ").twice(), 10);
        for bad in ["", "1/3", "0.25", "x", "1.", ".", "1/0", "9223372036854775807"] {
            assert!(bad.parse::<HalfInt>().is_err(), "{bad:?} parsed");
        }
        assert_eq!(h("3/2").to_string(), "3/2");
        assert_eq!(h("-2").to_string(), "-2");
    }

    #[test]
    fn partition_enumeration() {
        let got: Vec<Vec<u64>> = partitions(4, 2).iter().map(|p| p.parts().to_vec()).collect();
        assert_eq!(got, vec![vec![4, 0], vec![3, 1], vec![2, 2]]);
        assert_eq!(partitions(0, 3), vec![Partition::zero(3)]);
        assert_eq!(partitions(6, 3).len(), 7);
        for n in 0..9 {
            for k in 1..5 {
                let got: Vec<Vec<u64>> = partitions(n, k).iter().map(|p| p.parts().to_vec()).collect();
                assert_eq!(got, brute_partitions(n, k), "n={n} k={k}");
            }
        }
    }

    #[test]
    fn gt_pattern_counts() {
        assert_eq!(gt_patterns(&part("1,0")).len(), 2);
        let triv = gt_patterns(&part("0,0,0"));
        assert_eq!(triv.len(), 1);
        assert!(triv[0].rows.iter().flatten().all(|&x| x == 0));
        assert_eq!(gt_patterns(&part("2,1,0")).len(), 8);
        // Highest-weight pattern first.
        let first = &gt_patterns(&part("5,3,2"))[0];
        assert_eq!(first.row(2), &[5, 3]);
        assert_eq!(first.row(1), &[5]);
    }

    #[test]
    fn gt_count_matches_weyl_dimension() {
        for d in 1..=5usize {
            for n in 0..=8u64 {
                for lam in partitions(n, d) {
                    let dim = weyl_dim(&lam);
                    if dim > BigUint::from(1000u32) {
                        continue;
                    }
                    assert_eq!(BigUint::from(gt_patterns(&lam).len()), dim, "{lam}");
                }
            }
        }
    }

    #[test]
    fn weyl_dimension_examples() {
        for d in 1..=5usize {
            for s in 0..7u64 {
                assert_eq!(weyl_dim(&Partition::symmetric(d, s)), binomial(s + d as u64 - 1, d as u64 - 1));
            }
        }
        assert_eq!(weyl_dim(&part("1,1,1")), BigUint::one());
        assert_eq!(weyl_dim(&part("2,1,0")), BigUint::from(8u32));
    }

    #[test]
    fn duality() {
        assert_eq!(dual_partition(&part("2,0"), 4), Some(part("3,1")));
        assert!(is_dual(&part("3,3,3"), &part("1,1,1")));
        assert!(is_dual(&part("1,0"), &part("2,1")));
        assert_eq!(dual_partition(&part("1,0"), 2), None);
        assert_eq!(dual_partition(&part("1,0"), 3), Some(part("2,1")));
        // involution
        for d in 1..=4usize {
            for n in 0..=6u64 {
                for lam in partitions(n, d) {
                    for total in 0..=12u64 {
                        if let Some(mu) = dual_partition(&lam, total) {
                            assert!(is_dual(&lam, &mu));
                            assert!(is_dual(&mu, &lam));
                            assert_eq!(mu.size(), total);
                            assert_eq!(dual_partition(&mu, lam.size()), Some(lam.clone()));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn gt_duality() {
        let zero = &gt_patterns(&part("0,0"))[0];
        assert!(is_dual_gt(zero, zero));
        let ps = gt_patterns(&part("1,0"));
        let up = ps.iter().find(|p| p.row(1) == [1]).unwrap();
        let down = ps.iter().find(|p| p.row(1) == [0]).unwrap();
        assert!(is_dual_gt(up, down));
        assert!(!is_dual_gt(up, up));
        let lam = part("2,1,0");
        let mu = dual_partition(&lam, 3).unwrap();
        let (a, b) = (gt_patterns(&lam), gt_patterns(&mu));
        for x in &a {
            let partners: Vec<_> = b.iter().filter(|y| is_dual_gt(x, y)).collect();
            assert_eq!(partners.len(), 1, "unique dual pattern for {x}");
            assert!(is_dual_gt(partners[0], x));
            assert_eq!(dual_pattern(x, &mu).as_ref(), Some(partners[0]));
        }
        assert_eq!(dual_pattern(&a[0], &part("1,1,0")), None);
    }

    fn highest_weight_count(n: u32, k: HalfInt, s: HalfInt) -> i128 {
        // #{states with M = k} − #{states with M = k + 1}
        let s2 = s.twice();
        let levels = (s2 + 1) as usize;
        let mut by_m: HashMap<i64, i128> = HashMap::new();
        by_m.insert(0, 1);
        for _ in 0..n {
            let mut next = HashMap::new();
            for (&m, &c) in &by_m {
                for i in 0..levels {
                    *next.entry(m + s2 - 2 * i as i64).or_insert(0) += c;
                }
            }
            by_m = next;
        }
        by_m.get(&k.twice()).copied().unwrap_or(0) - by_m.get(&(k.twice() + 2)).copied().unwrap_or(0)
    }

    #[test]
    fn su2_multiplicity_examples() {
        for s2 in 1..8 {
            let s = HalfInt::from_twice(s2);
            for k2 in (0..=2 * s2).step_by(2) {
                assert_eq!(mult_su2(2, HalfInt::from_twice(k2), s), BigUint::one());
            }
        }
        assert_eq!(mult_su2(4, HalfInt::ZERO, HalfInt::HALF), BigUint::from(2u32));
        assert_eq!(mult_su2(3, HalfInt::ZERO, HalfInt::ONE), BigUint::one());
        assert_eq!(mult_su2(3, h("7/2"), HalfInt::ONE), BigUint::zero());
    }

    #[test]
    fn su2_multiplicity_against_weight_counting() {
        for s2 in 1..=7i64 {
            let s = HalfInt::from_twice(s2);
            for n in 1..=12u32 {
                if ((s2 + 1) as u64).pow(n) > 4096 {
                    break;
                }
                let table = Su2Multiplicities::new(n, s);
                let mut dim = BigUint::zero();
                for k2 in 0..=(n as i64 * s2) {
                    let k = HalfInt::from_twice(k2);
                    let expect = highest_weight_count(n, k, s).max(0) as u64;
                    assert_eq!(table.get(k), BigUint::from(expect), "n={n} s={s} k={k}");
                    dim += BigUint::from((k2 + 1) as u64) * table.get(k);
                }
                assert_eq!(dim, BigUint::from((s2 + 1) as u64).pow(n));
            }
        }
    }

    #[test]
    fn symmetric_power_examples() {
        for d in 1..=4usize {
            for s in 0..4u64 {
                for lam in partitions(s, d) {
                    let expect = if lam == Partition::symmetric(d, s) { 1u32 } else { 0 };
                    assert_eq!(mult_symmetric_power(s, 1, d, &lam), BigUint::from(expect));
                }
            }
        }
        // d = 2 against the spin recursion with λ = (j + c, c) ↔ spin j/2 ... in
        // doubled units: spin label s/2, total spin (λ1 − λ2)/2.
        for s in 1..5u64 {
            for k in 1..6u32 {
                let table = Su2Multiplicities::new(k, HalfInt::from_twice(s as i64));
                for lam in partitions(s * k as u64, 2) {
                    let j = HalfInt::from_twice((lam.parts()[0] - lam.parts()[1]) as i64);
                    assert_eq!(mult_symmetric_power(s, k, 2, &lam), table.get(j), "{lam}");
                }
            }
        }
        assert_eq!(mult_symmetric_power(2, 2, 2, &part("3,0")), BigUint::zero());
    }

    #[test]
    fn symmetric_power_dimension_count() {
        for d in 1..=4usize {
            for s in 1..4u64 {
                for k in 1..5u32 {
                    let dec = symmetric_power_decomposition(s, k, d);
                    let total: BigUint = dec.iter().map(|(l, c)| weyl_dim(l) * c).sum();
                    assert_eq!(total, binomial(s + d as u64 - 1, d as u64 - 1).pow(k));
                    for (lam, c) in dec.iter().take(4) {
                        assert_eq!(&mult_symmetric_power(s, k, d, lam), c);
                    }
                }
            }
        }
    }

    #[test]
    fn littlewood_richardson() {
        let zero = Partition::zero(2);
        for n in 0..5u64 {
            for lam in partitions(n, 2) {
                for nu in partitions(n, 2) {
                    let expect = u32::from(lam == nu);
                    assert_eq!(mult_lr(&lam, &zero, &nu), BigUint::from(expect));
                }
            }
        }
        let box1 = part("1,0");
        assert_eq!(mult_lr(&box1, &box1, &part("2,0")), BigUint::one());
        assert_eq!(mult_lr(&box1, &box1, &part("1,1")), BigUint::one());
        // Classic: c^{(3,2,1)}_{(2,1),(2,1)} = 2.
        assert_eq!(mult_lr(&part("2,1,0"), &part("2,1,0"), &part("3,2,1")), BigUint::from(2u32));
        for d in 2..=3usize {
            for a in 0..4u64 {
                for b in 0..4u64 {
                    for lam in partitions(a, d) {
                        for mu in partitions(b, d) {
                            let total: BigUint = partitions(a + b, d)
                                .iter()
                                .map(|nu| mult_lr(&lam, &mu, nu) * weyl_dim(nu))
                                .sum();
                            assert_eq!(total, weyl_dim(&lam) * weyl_dim(&mu), "{lam} {mu}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn pieri_matches_generic_lr() {
        for d in 2..=3usize {
            for s in 1..3u64 {
                let mut prev = symmetric_power_decomposition(s, 1, d);
                for k in 2..4u32 {
                    let next = symmetric_power_decomposition(s, k, d);
                    let sym = Partition::symmetric(d, s);
                    for nu in partitions(s * k as u64, d) {
                        let via_lr: BigUint = prev.iter().map(|(lam, c)| c * mult_lr(lam, &sym, &nu)).sum();
                        assert_eq!(next.get(&nu).cloned().unwrap_or_default(), via_lr);
                    }
                    prev = next;
                }
            }
        }
    }

    #[test]
    fn invariant_dimension_examples() {
        assert_eq!(d_inv_count(3, 1, 1, 2), BigUint::one());
        assert_eq!(d_inv_count(2, 1, 2, 2), BigUint::from(2u32));
        assert_eq!(d_inv_count(3, 1, 1, 1), BigUint::zero());
        assert_eq!(d_inv_count(2, 1, 2, 3), BigUint::zero());
        // Split independence.
        for (d, s, n) in [(2usize, 1u64, 6u32), (2, 2, 5), (3, 1, 6), (3, 2, 3)] {
            let counts: Vec<_> = (1..n).map(|p| d_inv_count(d, s, p, n - p)).collect();
            assert!(counts.windows(2).all(|w| w[0] == w[1]), "{counts:?}");
        }
        // Catalan numbers for qubits.
        assert_eq!(d_inv_count(2, 1, 3, 3), BigUint::from(5u32));
    }

    #[test]
    fn f_identity_examples() {
        for r in 1..=20 {
            let f1 = f_identity(1, r).unwrap();
            assert!(f1.holds());
            assert_eq!(f1.closed_form, BigRational::new(1.into(), BigInt::from(r + 1)));
            let f2 = f_identity(2, r).unwrap();
            assert_eq!(f2.alternating, BigRational::new(1.into(), BigInt::from((r + 1) * (r + 2))));
        }
        // 1 − 4/4 + 6/5 − 4/6 + 1/7 = 1/105
        let f = f_identity(3, 4).unwrap();
        assert_eq!(f.alternating, BigRational::new(1.into(), 105.into()));
        assert!(f_identity(0, 3).is_err());
    }

    #[test]
    fn profile_rounding() {
        let p = round_profile(&[1.5, 0.5], 3, 6, 3).unwrap();
        assert_eq!(p.parts(), &[5, 1, 0]);
        let p = round_profile(&[1.25, 1.0, 0.75], 4, 12, 3).unwrap();
        assert_eq!(p.parts(), &[5, 4, 3]);
        assert!(round_profile(&[0.5, 1.5], 2, 4, 2).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn halfint_display_roundtrip(t in -10_000i64..10_000) {
                let h = HalfInt::from_twice(t);
                prop_assert_eq!(h.to_string().parse::<HalfInt>().unwrap(), h);
            }

            #[test]
            fn halfint_parse_total(text in "\\PC{0,12}|-?[0-9]{1,20}(/[0-9]{1,3}|\\.[0-9]{0,4})?") {
                if let Ok(h) = text.parse::<HalfInt>() {
                    prop_assert_eq!(h.to_string().parse::<HalfInt>().unwrap(), h);
                }
            }

            #[test]
            fn partition_parse_total(text in "\\PC{0,16}|\\(?[0-9]{1,3}([, ] ?[0-9]{1,3}){0,5}\\)?") {
                if let Ok(p) = text.parse::<Partition>() {
                    prop_assert!(p.parts().windows(2).all(|w| w[0] >= w[1]));
                    prop_assert_eq!(p.to_string().parse::<Partition>().unwrap(), p);
                }
            }

            #[test]
            fn f_identity_closed_form(t in 1u64..=20, r in 1u64..=20) {
                prop_assert!(f_identity(t, r).unwrap().holds());
            }

            #[test]
            fn dual_is_an_involution(parts in proptest::collection::vec(0u64..6, 1..5), extra in 0u64..8) {
                let mut parts = parts;
                parts.sort_unstable_by(|a, b| b.cmp(a));
                let lam = Partition::new(parts).unwrap();
                let d = lam.len() as u64;
                let total = d * (lam.parts()[0] + extra) - lam.size();
                let mu = dual_partition(&lam, total).unwrap();
                prop_assert_eq!(dual_partition(&mu, lam.size()), Some(lam));
            }
        }
    }
}
