//! Exact sumset inequalities over finite abelian groups.
//!
//! Subsets live in `Z_n` (tuples for powers of it) or, with modulus 0, in
//! the ambient integers. Every verdict here is an integer comparison:
//! fractional-power inequalities are raised to a common integer power
//! before comparing, so no rounding can flip an outcome.

use std::collections::{BTreeSet, HashSet};

use num_traits::Pow;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::scalar::rat_str;
use crate::sumset::Sign;
use crate::{Caps, Error, Int, Rat, Result};

/// Dense-representation threshold for subsets of `Z_n` and tuple spaces.
const DENSE_LIMIT: u128 = 1 << 20;

/// A finite subset of `(Z_n)^d`, or of `Z^d` when `n = 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupSubset {
    n: u64,
    d: usize,
    elems: Vec<Vec<i64>>,
}

impl GroupSubset {
    /// Elements are reduced mod `n` (when `n > 0`), sorted, deduplicated.
    pub fn new(n: u64, d: usize, elements: Vec<Vec<i64>>) -> Result<Self> {
        if n == 1 || n > i64::MAX as u64 {
            return Err(Error::InvalidParam(format!(
                "modulus {n} not 0 or >= 2 within i64 range"
            )));
        }
        if d == 0 {
            return Err(Error::InvalidParam("tuple dimension must be >= 1".into()));
        }
        let mut elems: Vec<Vec<i64>> = elements
            .into_iter()
            .map(|e| {
                if e.len() != d {
                    return Err(Error::InvalidParam(format!(
                        "element {e:?} is not a {d}-tuple"
                    )));
                }
                Ok(e.into_iter().map(|v| reduce(v, n)).collect())
            })
            .collect::<Result<_>>()?;
        elems.sort();
        elems.dedup();
        Ok(GroupSubset { n, d, elems })
    }

    pub fn from_ints(n: u64, items: &[i64]) -> Result<Self> {
        Self::new(n, 1, items.iter().map(|&v| vec![v]).collect())
    }

    /// All of `Z_n`.
    pub fn full(n: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParam("full group needs modulus >= 2".into()));
        }
        Self::from_ints(n, &(0..n as i64).collect::<Vec<_>>())
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn elements(&self) -> &[Vec<i64>] {
        &self.elems
    }

    /// Scalar values; dimension must be 1.
    pub fn ints(&self) -> Result<Vec<i64>> {
        if self.d != 1 {
            return Err(Error::Mismatch(format!("dimension {} is not 1", self.d)));
        }
        Ok(self.elems.iter().map(|e| e[0]).collect())
    }

    pub fn contains(&self, e: &[i64]) -> bool {
        if e.len() != self.d {
            return false;
        }
        let r: Vec<i64> = e.iter().map(|&v| reduce(v, self.n)).collect();
        self.elems.binary_search(&r).is_ok()
    }

    pub fn negate(&self) -> GroupSubset {
        let elems = self
            .elems
            .iter()
            .map(|e| e.iter().map(|&v| reduce(-v, self.n)).collect())
            .collect();
        GroupSubset::new(self.n, self.d, elems).expect("negation preserves validity")
    }
}

fn reduce(v: i64, n: u64) -> i64 {
    if n == 0 {
        v
    } else {
        v.rem_euclid(n as i64)
    }
}

fn add_reduced(a: i64, b: i64, n: u64) -> Result<i64> {
    a.checked_add(b)
        .map(|s| reduce(s, n))
        .ok_or_else(|| Error::InvalidParam("element sum overflows".into()))
}

fn check_same_group(a: &GroupSubset, b: &GroupSubset) -> Result<()> {
    if a.n != b.n || a.d != b.d {
        return Err(Error::Mismatch(format!(
            "ambient groups differ: (n={}, d={}) vs (n={}, d={})",
            a.n, a.d, b.n, b.d
        )));
    }
    Ok(())
}

/// Pointwise sum `{k + s}` in the common ambient group.
pub fn sum_sets(k: &GroupSubset, s: &GroupSubset, caps: &Caps) -> Result<GroupSubset> {
    check_same_group(k, s)?;
    let pairs = k.len() as u128 * s.len() as u128;
    if pairs > caps.max_enum as u128 {
        return Err(Error::cap("sumset enumeration", pairs, caps.max_enum as u128));
    }
    if k.d == 1 && k.n > 0 && (k.n as u128) <= DENSE_LIMIT {
        let n = k.n as usize;
        let mut hit = vec![false; n];
        for a in &k.elems {
            for b in &s.elems {
                hit[reduce(a[0] + b[0], k.n) as usize] = true;
            }
        }
        let elems = (0..n).filter(|&v| hit[v]).map(|v| vec![v as i64]).collect();
        return GroupSubset::new(k.n, 1, elems);
    }
    let mut out = BTreeSet::new();
    for a in &k.elems {
        for b in &s.elems {
            let e: Vec<i64> = a
                .iter()
                .zip(b)
                .map(|(&x, &y)| add_reduced(x, y, k.n))
                .collect::<Result<_>>()?;
            out.insert(e);
        }
    }
    GroupSubset::new(k.n, k.d, out.into_iter().collect())
}

/// `K + s_1 K + s_2 K + ...` with group negation for minus signs.
pub fn signed_sum_sets(k: &GroupSubset, signs: &[Sign], caps: &Caps) -> Result<GroupSubset> {
    if signs.len() < 2 || signs[0] != Sign::Plus {
        return Err(Error::InvalidParam(
            "need at least two signs, the first +".into(),
        ));
    }
    let neg = k.negate();
    let mut acc = k.clone();
    for s in &signs[1..] {
        let term = match s {
            Sign::Plus => k,
            Sign::Minus => &neg,
        };
        acc = sum_sets(&acc, term, caps)?;
    }
    Ok(acc)
}

/// Count (and optionally lexicographically smallest missing tuple) of
/// `{(a_0 - a_1, ..., a_0 - a_k)}` in `(Z_n)^k` for a scalar subset of
/// `Z_n`, `n > 0`. Tuples are encoded with the first coordinate most
/// significant so index order is lexicographic order.
fn diff_tuple_count_mod(
    a: &GroupSubset,
    k: u32,
    caps: &Caps,
    want_missing: bool,
) -> Result<(u128, Option<Vec<i64>>)> {
    let n = a.n;
    let full = (n as u128)
        .checked_pow(k)
        .ok_or_else(|| Error::InvalidParam("tuple space overflows".into()))?;
    let cost = (a.len() as u128)
        .checked_pow(k + 1)
        .ok_or_else(|| Error::InvalidParam("enumeration size overflows".into()))?;
    if cost > caps.max_enum as u128 {
        return Err(Error::cap("tuple enumeration", cost, caps.max_enum as u128));
    }
    if full > caps.max_grid_bits as u128 {
        return Err(Error::cap("tuple space", full, caps.max_grid_bits as u128));
    }
    let vals: Vec<i64> = a.ints()?;
    let strides: Vec<u128> = (0..k).map(|l| (n as u128).pow(k - 1 - l)).collect();

    let mut dense = if full <= DENSE_LIMIT {
        Some(vec![0u64; (full as usize).div_ceil(64)])
    } else {
        None
    };
    let mut sparse = if dense.is_none() {
        Some(HashSet::new())
    } else {
        None
    };
    let mut count: u128 = 0;
    let mut mark = |idx: u128, count: &mut u128| {
        if let Some(bits) = dense.as_deref_mut() {
            let (w, b) = ((idx / 64) as usize, idx % 64);
            if bits[w] >> b & 1 == 0 {
                bits[w] |= 1 << b;
                *count += 1;
            }
        } else if sparse.as_mut().unwrap().insert(idx) {
            *count += 1;
        }
    };

    'outer: for &a0 in &vals {
        let diffs: Vec<u128> = vals.iter().map(|&v| reduce(a0 - v, n) as u128).collect();
        let mut pos = vec![0usize; k as usize];
        loop {
            let idx: u128 = pos
                .iter()
                .zip(&strides)
                .map(|(&p, &st)| diffs[p] * st)
                .sum();
            mark(idx, &mut count);
            if count == full {
                break 'outer;
            }
            let mut l = 0;
            loop {
                pos[l] += 1;
                if pos[l] < diffs.len() {
                    break;
                }
                pos[l] = 0;
                l += 1;
                if l == k as usize {
                    continue 'outer;
                }
            }
        }
    }

    let missing = if want_missing && count < full {
        // Indices 0..=count cannot all be set, so this scan stays short.
        let is_set = |idx: u128| -> bool {
            if let Some(bits) = dense.as_deref() {
                bits[(idx / 64) as usize] >> (idx % 64) & 1 == 1
            } else {
                sparse.as_ref().unwrap().contains(&idx)
            }
        };
        let idx = (0..full).find(|&i| !is_set(i)).expect("count < full");
        Some(decode_tuple(idx, n, k))
    } else {
        None
    };
    Ok((count, missing))
}

fn decode_tuple(idx: u128, n: u64, k: u32) -> Vec<i64> {
    (0..k)
        .map(|l| {
            let stride = (n as u128).pow(k - 1 - l);
            ((idx / stride) % n as u128) as i64
        })
        .collect()
}

fn diff_tuple_count(a: &GroupSubset, k: u32, caps: &Caps) -> Result<u128> {
    if a.n > 0 && a.d == 1 {
        return Ok(diff_tuple_count_mod(a, k, caps, false)?.0);
    }
    Ok(diff_tuples(a, k, caps)?.len() as u128)
}

/// `{(a_0 - a_1, ..., a_0 - a_k)}` materialized as a subset of the
/// `k`-fold power of the ambient group (flattened to `d * k` coordinates).
pub fn diff_tuples(a: &GroupSubset, k: u32, caps: &Caps) -> Result<GroupSubset> {
    if k == 0 {
        return Err(Error::InvalidParam("tuple arity must be >= 1".into()));
    }
    let out_d = a.d * k as usize;
    if a.is_empty() {
        return GroupSubset::new(a.n, out_d, vec![]);
    }
    if a.n > 0 && a.d == 1 {
        let (count, _) = diff_tuple_count_mod(a, k, caps, false)?;
        if count > caps.max_enum as u128 {
            return Err(Error::cap("tuple set", count, caps.max_enum as u128));
        }
        // Re-enumerate into an ordered set; the bitset pass above bounded
        // the work, and tuple decoding wants sorted output anyway.
        let mut out = BTreeSet::new();
        let vals = a.ints()?;
        for &a0 in &vals {
            let diffs: Vec<i64> = vals.iter().map(|&v| reduce(a0 - v, a.n)).collect();
            let mut pos = vec![0usize; k as usize];
            loop {
                out.insert(pos.iter().map(|&p| diffs[p]).collect::<Vec<i64>>());
                let mut l = 0;
                loop {
                    pos[l] += 1;
                    if pos[l] < diffs.len() {
                        break;
                    }
                    pos[l] = 0;
                    l += 1;
                    if l == k as usize {
                        break;
                    }
                }
                if l == k as usize {
                    break;
                }
            }
        }
        return GroupSubset::new(a.n, out_d, out.into_iter().collect());
    }
    let cost = (a.len() as u128)
        .checked_pow(k + 1)
        .ok_or_else(|| Error::InvalidParam("enumeration size overflows".into()))?;
    if cost > caps.max_enum as u128 {
        return Err(Error::cap("tuple enumeration", cost, caps.max_enum as u128));
    }
    let mut out = BTreeSet::new();
    for a0 in &a.elems {
        let mut pos = vec![0usize; k as usize];
        loop {
            let mut tuple = Vec::with_capacity(out_d);
            for &p in &pos {
                for (x, y) in a0.iter().zip(&a.elems[p]) {
                    tuple.push(reduce(x - y, a.n));
                }
            }
            out.insert(tuple);
            let mut l = 0;
            loop {
                pos[l] += 1;
                if pos[l] < a.len() {
                    break;
                }
                pos[l] = 0;
                l += 1;
                if l == k as usize {
                    break;
                }
            }
            if l == k as usize {
                break;
            }
        }
    }
    GroupSubset::new(a.n, out_d, out.into_iter().collect())
}

/// Whether the difference tuples of `A` fill all of `(Z_n)^k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Eq42Report {
    pub n: u64,
    pub k: u32,
    /// `|A|^{k+1} >= n^k`, necessary for fullness.
    pub count_precondition: bool,
    pub tuple_count: u128,
    pub full_count: u128,
    pub holds: bool,
    /// Lexicographically smallest missing tuple when not full.
    pub witness: Option<Vec<i64>>,
}

pub fn eq42_holds(n: u64, a: &[i64], k: u32, caps: &Caps) -> Result<Eq42Report> {
    if n < 2 {
        return Err(Error::InvalidParam("modulus must be >= 2".into()));
    }
    if k == 0 {
        return Err(Error::InvalidParam("tuple arity must be >= 1".into()));
    }
    let a = GroupSubset::from_ints(n, a)?;
    if a.is_empty() {
        return Err(Error::InvalidParam("digit set must be nonempty".into()));
    }
    let full = (n as u128)
        .checked_pow(k)
        .ok_or_else(|| Error::InvalidParam("tuple space overflows".into()))?;
    let count_precondition = (a.len() as u128)
        .checked_pow(k + 1)
        .map(|c| c >= full)
        .unwrap_or(true);
    let (tuple_count, witness) = diff_tuple_count_mod(&a, k, caps, true)?;
    Ok(Eq42Report {
        n,
        k,
        count_precondition,
        tuple_count,
        full_count: full,
        holds: tuple_count == full,
        witness,
    })
}

/// One cross-multiplied inequality verdict; `lhs` and `rhs` are the exact
/// integer powers that were compared, in decimal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IneqReport {
    pub counts: Vec<(String, u128)>,
    pub power: u32,
    pub lhs: String,
    pub rhs: String,
    pub holds: bool,
}

fn powi(x: u128, e: u32) -> Int {
    Pow::pow(Int::from(x), e)
}

/// `|D_k| * |S| <= |K+S|^{k+1}`, the integer-power form of
/// `|D_k|^{1/(k+1)} |S|^{1/(k+1)} <= |K+S|`.
pub fn counts_tuple_inequality(dk: u128, s: u128, sum: u128, k: u32) -> IneqReport {
    let lhs = Int::from(dk) * Int::from(s);
    let rhs = powi(sum, k + 1);
    IneqReport {
        counts: vec![
            ("diff_tuples".into(), dk),
            ("s".into(), s),
            ("k_plus_s".into(), sum),
        ],
        power: k + 1,
        holds: lhs <= rhs,
        lhs: lhs.to_string(),
        rhs: rhs.to_string(),
    }
}

pub fn check_tuple_inequality(
    k_set: &GroupSubset,
    s_set: &GroupSubset,
    k: u32,
    caps: &Caps,
) -> Result<IneqReport> {
    check_same_group(k_set, s_set)?;
    if k_set.is_empty() || s_set.is_empty() {
        return Err(Error::InvalidParam("sets must be nonempty".into()));
    }
    if k == 0 {
        return Err(Error::InvalidParam("tuple arity must be >= 1".into()));
    }
    let dk = diff_tuple_count(k_set, k, caps)?;
    let sum = sum_sets(k_set, s_set, caps)?;
    Ok(counts_tuple_inequality(dk, s_set.len() as u128, sum.len() as u128, k))
}

/// `|K ± K ± ... ± K| * |S|^{k-1} <= |K+S|^k` with `k` signs, the
/// integer-power form of `|K ± ... ± K|^{1/k} |S|^{1-1/k} <= |K+S|`.
pub fn counts_plunnecke(signed: u128, s: u128, sum: u128, k: u32) -> IneqReport {
    let lhs = Int::from(signed) * powi(s, k - 1);
    let rhs = powi(sum, k);
    IneqReport {
        counts: vec![
            ("signed_sum".into(), signed),
            ("s".into(), s),
            ("k_plus_s".into(), sum),
        ],
        power: k,
        holds: lhs <= rhs,
        lhs: lhs.to_string(),
        rhs: rhs.to_string(),
    }
}

pub fn check_plunnecke(
    k_set: &GroupSubset,
    s_set: &GroupSubset,
    signs: &[Sign],
    caps: &Caps,
) -> Result<IneqReport> {
    check_same_group(k_set, s_set)?;
    if k_set.is_empty() || s_set.is_empty() {
        return Err(Error::InvalidParam("sets must be nonempty".into()));
    }
    let signed = signed_sum_sets(k_set, signs, caps)?;
    let sum = sum_sets(k_set, s_set, caps)?;
    Ok(counts_plunnecke(
        signed.len() as u128,
        s_set.len() as u128,
        sum.len() as u128,
        signs.len() as u32,
    ))
}

/// `n;K=...;S=...;k=...` with comma-separated scalar elements.
pub fn instance_string(n: u64, k_set: &GroupSubset, s_set: &GroupSubset, k: u32) -> String {
    let join = |g: &GroupSubset| {
        g.elems
            .iter()
            .map(|e| e[0].to_string())
            .collect::<Vec<_>>()
            .join(",")
    };
    format!("{n};K={};S={};k={k}", join(k_set), join(s_set))
}

/// One evaluation of the five-variable inequality
/// `|Q|^{1/5} |S|^{3/5} <= |K+S|` with
/// `Q = {(x_1+x_2+x_3, x_1+x_4+x_5) : x_i in K}`, in fifth-power form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Conj5Instance {
    pub q: u64,
    pub s: u64,
    pub sum: u64,
    /// `(|Q| * |S|^3) / |K+S|^5` as an exact rational.
    pub ratio_pow5: Rat,
    pub holds: bool,
}

pub fn conj5_instance(k_set: &GroupSubset, s_set: &GroupSubset) -> Result<Conj5Instance> {
    check_same_group(k_set, s_set)?;
    if k_set.n < 2 || k_set.d != 1 {
        return Err(Error::InvalidParam(
            "five-variable check needs scalar sets mod n >= 2".into(),
        ));
    }
    if k_set.is_empty() || s_set.is_empty() {
        return Err(Error::InvalidParam("sets must be nonempty".into()));
    }
    if k_set.n as u128 > DENSE_LIMIT {
        return Err(Error::InvalidParam("modulus too large for dense sweep".into()));
    }
    let n = k_set.n as usize;
    let kv = k_set.ints()?;
    let sv = s_set.ints()?;

    let mut s2 = vec![false; n];
    for &a in &kv {
        for &b in &kv {
            s2[reduce(a + b, k_set.n) as usize] = true;
        }
    }
    let s2v: Vec<usize> = (0..n).filter(|&v| s2[v]).collect();

    let mut q = vec![false; n * n];
    let mut q_count = 0u64;
    for &x1 in &kv {
        let x1 = x1 as usize;
        for &a in &s2v {
            let row = (x1 + a) % n * n;
            for &b in &s2v {
                let idx = row + (x1 + b) % n;
                if !q[idx] {
                    q[idx] = true;
                    q_count += 1;
                }
            }
        }
    }

    let mut ks = vec![false; n];
    let mut sum_count = 0u64;
    for &a in &kv {
        for &b in &sv {
            let idx = reduce(a + b, k_set.n) as usize;
            if !ks[idx] {
                ks[idx] = true;
                sum_count += 1;
            }
        }
    }

    let s_count = sv.len() as u64;
    let lhs = Int::from(q_count) * powi(s_count as u128, 3);
    let rhs = powi(sum_count as u128, 5);
    Ok(Conj5Instance {
        q: q_count,
        s: s_count,
        sum: sum_count,
        holds: lhs <= rhs,
        ratio_pow5: Rat::new(lhs, rhs),
    })
}

/// Seeded random sweep of the five-variable inequality. Report-only: any
/// violation is recorded verbatim, never asserted away. Trial `t` draws
/// from its own ChaCha stream, so the report is byte-identical for a fixed
/// seed at any thread count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Conj5Report {
    pub n_lo: u64,
    pub n_hi: u64,
    pub trials: u64,
    pub seed: u64,
    /// Largest `(|Q| * |S|^3) / |K+S|^5` seen, as `p/q`.
    pub max_ratio_pow5: String,
    /// Instance attaining the maximum (first trial on ties).
    pub argmax: String,
    pub violations: Vec<String>,
}

pub fn search_conjecture5(
    n_lo: u64,
    n_hi: u64,
    trials: u64,
    seed: u64,
    _caps: &Caps,
) -> Result<Conj5Report> {
    if n_lo < 2 || n_lo > n_hi || n_hi as u128 > DENSE_LIMIT {
        return Err(Error::InvalidParam(format!(
            "modulus range {n_lo}..={n_hi} invalid"
        )));
    }
    if trials == 0 {
        return Err(Error::InvalidParam("need at least one trial".into()));
    }
    let results: Vec<(Rat, String, bool)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t);
            let n = rng.gen_range(n_lo..=n_hi);
            let k_set = draw_subset(&mut rng, n);
            let s_set = draw_subset(&mut rng, n);
            let inst = conj5_instance(&k_set, &s_set).expect("drawn instance is valid");
            let label = instance_string(n, &k_set, &s_set, 5);
            (inst.ratio_pow5, label, inst.holds)
        })
        .collect();

    let (mut best, mut argmax) = (None::<&Rat>, "");
    let mut violations = Vec::new();
    for (ratio, label, holds) in &results {
        if best.map_or(true, |b| ratio > b) {
            best = Some(ratio);
            argmax = label;
        }
        if !holds {
            violations.push(label.clone());
        }
    }
    Ok(Conj5Report {
        n_lo,
        n_hi,
        trials,
        seed,
        max_ratio_pow5: rat_str(best.expect("trials >= 1")),
        argmax: argmax.to_string(),
        violations,
    })
}

fn draw_subset(rng: &mut ChaCha8Rng, n: u64) -> GroupSubset {
    let size = rng.gen_range(1..=n) as usize;
    let mut all: Vec<i64> = (0..n as i64).collect();
    let (picked, _) = all.partial_shuffle(rng, size);
    GroupSubset::from_ints(n, picked).expect("drawn elements are reduced")
}
