//! Equicontractive similarity systems and their attractor approximants.
//!
//! A system is a finite list of maps `x -> r*x + b_j` sharing one rational
//! ratio `r` in (0,1); the attractor is the unique compact `K` with
//! `K = U_j (r*K + b_j)`. Working top-down, `K_m = T^m(K_0)` for any seed
//! with `T(K_0)` inside `K_0` gives a decreasing exact outer approximation,
//! and every operation here (iteration, hulls, the various admissibility
//! thresholds) is rational arithmetic end to end.
//!
//! Orthogonal parts other than the identity are representable as a recorded
//! flag only; no operation accepts them.

use serde::{Deserialize, Serialize};

use crate::cellgrid::{CellSet, IntervalUnion, Mode};
use crate::scalar::{ceil_int, parse_rat, rat_str};
use crate::{Caps, Error, Int, Rat, Result};
use num_traits::{One, Signed, Zero};

/// Rotation/reflection component of a similarity. Only the identity is
/// supported by the operations in this crate; the enum exists so map records
/// can state the restriction explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrthogonalPart {
    Identity,
}

/// One contracting map `x -> r*x + b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Similarity {
    ratio: Rat,
    translation: Vec<Rat>,
    orthogonal: OrthogonalPart,
}

impl Similarity {
    pub fn new(ratio: Rat, translation: Vec<Rat>) -> Result<Self> {
        if ratio <= Rat::zero() || ratio >= Rat::one() {
            return Err(Error::InvalidParam(format!(
                "contraction ratio {} not in (0,1)",
                rat_str(&ratio)
            )));
        }
        if translation.is_empty() {
            return Err(Error::InvalidParam("empty translation vector".into()));
        }
        Ok(Similarity {
            ratio,
            translation,
            orthogonal: OrthogonalPart::Identity,
        })
    }

    pub fn d(&self) -> usize {
        self.translation.len()
    }

    pub fn ratio(&self) -> &Rat {
        &self.ratio
    }

    pub fn translation(&self) -> &[Rat] {
        &self.translation
    }

    pub fn apply(&self, x: &[Rat]) -> Vec<Rat> {
        x.iter()
            .zip(&self.translation)
            .map(|(xi, bi)| &self.ratio * xi + bi)
            .collect()
    }
}

/// Named families with dedicated constructors and verifier hypotheses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FamilyLabel {
    Generic,
    /// Two maps `ax` and `ax + (1-a)`; attractor lives in [0,1].
    HomogeneousCantor { a: Rat },
    /// Maps `(x + a)/n` for each digit `a`; attractor is the set of base-n
    /// expansions with digits restricted to the list.
    DigitCantor { n: u32, digits: Vec<u32> },
    /// Maps `rx + j` for `0 <= j <= J`.
    R2Family { j: u32, r: Rat },
}

/// Axis-aligned box with rational corners, one `(lo, hi)` pair per axis.
pub type BoxRegion = Vec<(Rat, Rat)>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IFSystem {
    d: usize,
    ratio: Rat,
    translations: Vec<Vec<Rat>>,
    label: FamilyLabel,
}

impl IFSystem {
    pub fn new(d: usize, ratio: Rat, translations: Vec<Vec<Rat>>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParam("dimension must be positive".into()));
        }
        if ratio <= Rat::zero() || ratio >= Rat::one() {
            return Err(Error::InvalidParam(format!(
                "contraction ratio {} not in (0,1)",
                rat_str(&ratio)
            )));
        }
        if translations.len() < 2 {
            return Err(Error::InvalidParam(
                "a system needs at least two maps".into(),
            ));
        }
        for b in &translations {
            if b.len() != d {
                return Err(Error::InvalidParam(format!(
                    "translation of length {} in a dimension-{d} system",
                    b.len()
                )));
            }
        }
        Ok(IFSystem {
            d,
            ratio,
            translations,
            label: FamilyLabel::Generic,
        })
    }

    /// `ax` and `ax + (1-a)` for rational `a` in (0, 1/2).
    pub fn homogeneous_cantor(a: Rat) -> Result<Self> {
        if a <= Rat::zero() || a >= Rat::new(Int::one(), Int::from(2)) {
            return Err(Error::InvalidParam(format!(
                "homogeneous parameter {} not in (0, 1/2)",
                rat_str(&a)
            )));
        }
        let one_minus = Rat::one() - &a;
        let mut sys = IFSystem::new(1, a.clone(), vec![vec![Rat::zero()], vec![one_minus]])?;
        sys.label = FamilyLabel::HomogeneousCantor { a };
        Ok(sys)
    }

    pub fn digit_cantor(n: u32, digits: &[u32]) -> Result<Self> {
        let ds = DigitSystem::new(n, digits)?;
        Ok(ds.ifs())
    }

    /// `rx + j` for `0 <= j <= J`. Structural validity only; the dimension
    /// bound for this family additionally needs [`check_r2_hypotheses`].
    pub fn r2_family(j: u32, r: Rat) -> Result<Self> {
        if j == 0 {
            return Err(Error::InvalidParam("need at least j = 1".into()));
        }
        let translations = (0..=j)
            .map(|v| vec![Rat::from_integer(Int::from(v))])
            .collect();
        let mut sys = IFSystem::new(1, r.clone(), translations)?;
        sys.label = FamilyLabel::R2Family { j, r };
        Ok(sys)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn ratio(&self) -> &Rat {
        &self.ratio
    }

    pub fn translations(&self) -> &[Vec<Rat>] {
        &self.translations
    }

    pub fn label(&self) -> &FamilyLabel {
        &self.label
    }

    pub fn maps(&self) -> Vec<Similarity> {
        self.translations
            .iter()
            .map(|b| Similarity {
                ratio: self.ratio.clone(),
                translation: b.clone(),
                orthogonal: OrthogonalPart::Identity,
            })
            .collect()
    }

    pub fn maps_count(&self) -> usize {
        self.translations.len()
    }

    /// Symmetric seed box `[-R, R]^d`, `R = max_j |b_j|_inf / (1 - r)`: the
    /// smallest symmetric box with `T(box)` inside itself.
    pub fn initial_set(&self) -> BoxRegion {
        let mut big = Rat::zero();
        for b in &self.translations {
            for c in b {
                let a = c.abs();
                if a > big {
                    big = a;
                }
            }
        }
        let r = big / (Rat::one() - &self.ratio);
        (0..self.d).map(|_| (-r.clone(), r.clone())).collect()
    }

    /// Componentwise attractor bounding box
    /// `[min_j b / (1-r), max_j b / (1-r)]`, tight on every axis.
    pub fn tight_hull(&self) -> BoxRegion {
        let denom = Rat::one() - &self.ratio;
        (0..self.d)
            .map(|i| {
                let mut lo = self.translations[0][i].clone();
                let mut hi = lo.clone();
                for b in &self.translations[1..] {
                    if b[i] < lo {
                        lo = b[i].clone();
                    }
                    if b[i] > hi {
                        hi = b[i].clone();
                    }
                }
                (lo / &denom, hi / &denom)
            })
            .collect()
    }

    /// Default seed for approximants: `[0,1]` for digit systems (so depth-m
    /// approximants are exactly the m-digit prefix intervals), the tight
    /// hull otherwise.
    pub fn canonical_k0(&self) -> BoxRegion {
        match &self.label {
            FamilyLabel::DigitCantor { .. } => vec![(Rat::zero(), Rat::one())],
            _ => self.tight_hull(),
        }
    }

    /// Checks `r*K_0 + b_j` inside `K_0` componentwise for every map, the
    /// condition making `T^m(K_0)` decrease to the attractor.
    pub fn validate_k0(&self, k0: &BoxRegion) -> Result<()> {
        if k0.len() != self.d {
            return Err(Error::InvalidParam(format!(
                "seed box has {} axes, system has {}",
                k0.len(),
                self.d
            )));
        }
        for (i, (lo, hi)) in k0.iter().enumerate() {
            if lo > hi {
                return Err(Error::InvalidParam("inverted seed box".into()));
            }
            for b in &self.translations {
                let new_lo = &self.ratio * lo + &b[i];
                let new_hi = &self.ratio * hi + &b[i];
                if new_lo < *lo || new_hi > *hi {
                    return Err(Error::InvalidParam(format!(
                        "seed box is not invariant: image [{}, {}] leaves [{}, {}] on axis {i}",
                        rat_str(&new_lo),
                        rat_str(&new_hi),
                        rat_str(lo),
                        rat_str(hi)
                    )));
                }
            }
        }
        Ok(())
    }

    /// One exact step `F -> U_j (r*F + b_j)` on an interval union, d = 1.
    pub fn iterate_intervals(
        &self,
        f: &IntervalUnion<Rat>,
        caps: &Caps,
    ) -> Result<IntervalUnion<Rat>> {
        self.expect_d1()?;
        let raw = f.len() as u128 * self.translations.len() as u128;
        if raw > caps.max_intervals as u128 {
            return Err(Error::cap("interval count", raw, caps.max_intervals as u128));
        }
        let mut pairs = Vec::with_capacity(raw as usize);
        for b in &self.translations {
            let t = &b[0];
            for (lo, hi) in f.intervals() {
                pairs.push((&self.ratio * lo + t, &self.ratio * hi + t));
            }
        }
        Ok(IntervalUnion::normalized(pairs))
    }

    /// `K_m = T^m(K_0)` as an exact interval union, d = 1. `k0 = None` uses
    /// the canonical seed; explicit seeds must be invariant.
    pub fn approximant_intervals(
        &self,
        k0: Option<&IntervalUnion<Rat>>,
        m: u32,
        caps: &Caps,
    ) -> Result<IntervalUnion<Rat>> {
        self.expect_d1()?;
        let mut cur = match k0 {
            Some(seed) => {
                let one_step = self.iterate_intervals(seed, caps)?;
                if !seed.covers(&one_step) {
                    return Err(Error::InvalidParam(
                        "seed is not invariant: its image leaves it".into(),
                    ));
                }
                seed.clone()
            }
            None => {
                let b = self.canonical_k0();
                IntervalUnion::interval(b[0].0.clone(), b[0].1.clone())?
            }
        };
        for _ in 0..m {
            cur = self.iterate_intervals(&cur, caps)?;
        }
        Ok(cur)
    }

    /// One exact step on a list of boxes (any dimension): images of boxes
    /// under every map, without merging.
    pub fn iterate_boxes(&self, boxes: &[BoxRegion], caps: &Caps) -> Result<Vec<BoxRegion>> {
        let raw = boxes.len() as u128 * self.translations.len() as u128;
        if raw > caps.max_intervals as u128 {
            return Err(Error::cap("box count", raw, caps.max_intervals as u128));
        }
        let mut out = Vec::with_capacity(raw as usize);
        for b in &self.translations {
            for bx in boxes {
                out.push(
                    bx.iter()
                        .zip(b)
                        .map(|((lo, hi), t)| (&self.ratio * lo + t, &self.ratio * hi + t))
                        .collect(),
                );
            }
        }
        Ok(out)
    }

    pub fn approximant_boxes(
        &self,
        k0: Option<&BoxRegion>,
        m: u32,
        caps: &Caps,
    ) -> Result<Vec<BoxRegion>> {
        let seed = match k0 {
            Some(b) => {
                self.validate_k0(b)?;
                b.clone()
            }
            None => self.canonical_k0(),
        };
        let mut cur = vec![seed];
        for _ in 0..m {
            cur = self.iterate_boxes(&cur, caps)?;
        }
        Ok(cur)
    }

    /// One step on an outer cell cover at fixed resolution: each occupied
    /// cell's closed box is mapped and re-covered, so the result is an outer
    /// cover of `T` of whatever the input covered.
    pub fn iterate_cells(&self, cs: &CellSet, caps: &Caps) -> Result<CellSet> {
        if cs.d() != self.d {
            return Err(Error::InvalidParam(format!(
                "cell set dimension {} differs from system dimension {}",
                cs.d(),
                self.d
            )));
        }
        if cs.mode() != Mode::Outer {
            return Err(Error::InvalidParam(
                "cell iteration is defined for outer covers".into(),
            ));
        }
        let side = Rat::new(Int::one(), crate::scalar::big_pow(cs.base(), cs.depth()));
        let mut boxes = Vec::new();
        for cell in cs.cells_vec() {
            let cell_box: BoxRegion = (0..self.d)
                .map(|i| {
                    let lo = Rat::from_integer(Int::from(cell[i])) * &side;
                    (lo.clone(), lo + &side)
                })
                .collect();
            for b in &self.translations {
                boxes.push(
                    cell_box
                        .iter()
                        .zip(b)
                        .map(|((lo, hi), t)| (&self.ratio * lo + t, &self.ratio * hi + t))
                        .collect::<BoxRegion>(),
                );
            }
            if boxes.len() as u128 > caps.max_cells as u128 {
                return Err(Error::cap(
                    "cell iteration",
                    boxes.len() as u128,
                    caps.max_cells as u128,
                ));
            }
        }
        CellSet::from_boxes(&boxes, cs.base(), cs.depth(), Mode::Outer, caps)
    }

    fn expect_d1(&self) -> Result<()> {
        if self.d != 1 {
            return Err(Error::InvalidParam(format!(
                "interval operations need d = 1, system has d = {}",
                self.d
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let label = match &self.label {
            FamilyLabel::Generic => LabelJson::Generic,
            FamilyLabel::HomogeneousCantor { a } => LabelJson::HomogeneousCantor {
                a: rat_str(a),
            },
            FamilyLabel::DigitCantor { n, digits } => LabelJson::DigitCantor {
                n: *n,
                digits: digits.clone(),
            },
            FamilyLabel::R2Family { j, r } => LabelJson::R2Family {
                j: *j,
                r: rat_str(r),
            },
        };
        let rec = IfsJson {
            d: self.d,
            r: rat_str(&self.ratio),
            b: self
                .translations
                .iter()
                .map(|v| v.iter().map(rat_str).collect())
                .collect(),
            label,
        };
        serde_json::to_string_pretty(&rec).expect("record serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let rec: IfsJson =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("system record: {e}")))?;
        let ratio = parse_rat(&rec.r)?;
        let translations = rec
            .b
            .iter()
            .map(|v| v.iter().map(|s| parse_rat(s)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let mut sys = IFSystem::new(rec.d, ratio, translations)?;
        sys.label = match rec.label {
            LabelJson::Generic => FamilyLabel::Generic,
            LabelJson::HomogeneousCantor { a } => FamilyLabel::HomogeneousCantor {
                a: parse_rat(&a)?,
            },
            LabelJson::DigitCantor { n, digits } => {
                DigitSystem::new(n, &digits)?;
                FamilyLabel::DigitCantor { n, digits }
            }
            LabelJson::R2Family { j, r } => FamilyLabel::R2Family {
                j,
                r: parse_rat(&r)?,
            },
        };
        Ok(sys)
    }
}

#[derive(Serialize, Deserialize)]
struct IfsJson {
    d: usize,
    r: String,
    b: Vec<Vec<String>>,
    label: LabelJson,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum LabelJson {
    Generic,
    HomogeneousCantor { a: String },
    DigitCantor { n: u32, digits: Vec<u32> },
    R2Family { j: u32, r: String },
}

/// Base-n digit restriction: the numbers whose expansion uses only the
/// listed digits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitSystem {
    n: u32,
    digits: Vec<u32>,
}

impl DigitSystem {
    pub fn new(n: u32, digits: &[u32]) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidParam(format!("digit base {n} < 3")));
        }
        if digits.is_empty() {
            return Err(Error::InvalidParam("empty digit set".into()));
        }
        let mut ds: Vec<u32> = digits.to_vec();
        ds.sort_unstable();
        ds.dedup();
        if ds.len() != digits.len() {
            return Err(Error::InvalidParam("repeated digit".into()));
        }
        if *ds.last().unwrap() >= n {
            return Err(Error::InvalidParam(format!(
                "digit {} out of range for base {n}",
                ds.last().unwrap()
            )));
        }
        Ok(DigitSystem { n, digits: ds })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    /// The system `x -> (x + a)/n` per digit `a`.
    pub fn ifs(&self) -> IFSystem {
        let n = Int::from(self.n);
        let translations = self
            .digits
            .iter()
            .map(|&a| vec![Rat::new(Int::from(a), n.clone())])
            .collect();
        let mut sys = IFSystem::new(1, Rat::new(Int::one(), n.clone()), translations)
            .expect("digit system parameters are structurally valid");
        sys.label = FamilyLabel::DigitCantor {
            n: self.n,
            digits: self.digits.clone(),
        };
        sys
    }

    /// The m-digit prefix intervals `sum a_j n^-j + [0, n^-m]`, an
    /// independent construction of the depth-m approximant.
    pub fn prefix_intervals(&self, m: u32, caps: &Caps) -> Result<IntervalUnion<Rat>> {
        let count = (self.digits.len() as u128)
            .checked_pow(m)
            .filter(|&c| c <= caps.max_intervals as u128)
            .ok_or_else(|| {
                Error::cap("prefix enumeration", u128::MAX, caps.max_intervals as u128)
            })?;
        let side = Rat::new(Int::one(), crate::scalar::big_pow(self.n, m));
        let mut pairs = Vec::with_capacity(count as usize);
        let mut stack = vec![(Rat::zero(), 0u32)];
        while let Some((x, depth)) = stack.pop() {
            if depth == m {
                pairs.push((x.clone(), x + &side));
                continue;
            }
            let scale = Rat::new(Int::one(), crate::scalar::big_pow(self.n, depth + 1));
            for &a in &self.digits {
                stack.push((&x + Rat::from_integer(Int::from(a)) * &scale, depth + 1));
            }
        }
        Ok(IntervalUnion::normalized(pairs))
    }
}

/// True iff the affine span of the translation points is all of R^d, i.e.
/// their convex hull has interior. Exact rational rank of `{b_j - b_0}`.
pub fn hull_has_interior(b_list: &[Vec<Rat>], d: usize) -> bool {
    if b_list.is_empty() || d == 0 {
        return false;
    }
    let mut rows: Vec<Vec<Rat>> = b_list[1..]
        .iter()
        .map(|b| b.iter().zip(&b_list[0]).map(|(x, y)| x - y).collect())
        .collect();
    let mut rank = 0;
    for col in 0..d {
        let Some(pivot) = (rank..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        let lead = rows[rank][col].clone();
        for i in rank + 1..rows.len() {
            if rows[i][col].is_zero() {
                continue;
            }
            let factor = &rows[i][col] / &lead;
            for c in col..d {
                let sub = &factor * &rows[rank][c];
                rows[i][c] -= sub;
            }
        }
        rank += 1;
        if rank == d {
            return true;
        }
    }
    false
}

/// Smallest positive integer `k` with `k + 1 >= d/r`.
pub fn min_k_thm1(d: u32, r: &Rat) -> Result<u64> {
    if d == 0 {
        return Err(Error::InvalidParam("dimension must be positive".into()));
    }
    if r <= &Rat::zero() || r >= &Rat::one() {
        return Err(Error::InvalidParam(format!(
            "ratio {} not in (0,1)",
            rat_str(r)
        )));
    }
    let need = Rat::from_integer(Int::from(d)) / r - Rat::one();
    let k = ceil_int(&need);
    let k: i64 = crate::scalar::big_to_i64(&k)?;
    Ok(k.max(1) as u64)
}

/// Smallest integer `k >= (1-a)/a` for `a` in (0, 1/2).
pub fn min_k_prop1(a: &Rat) -> Result<u64> {
    if a <= &Rat::zero() || a >= &Rat::new(Int::one(), Int::from(2)) {
        return Err(Error::InvalidParam(format!(
            "parameter {} not in (0, 1/2)",
            rat_str(a)
        )));
    }
    let need = (Rat::one() - a) / a;
    let k = crate::scalar::big_to_i64(&ceil_int(&need))?;
    Ok(k.max(1) as u64)
}

/// `J >= 3` and `2/(3J) <= r < 1/(J+1)`, decided exactly.
pub fn check_r2_hypotheses(j: u32, r: &Rat) -> bool {
    if j < 3 {
        return false;
    }
    let lo = Rat::new(Int::from(2), Int::from(3 * j as u64));
    let hi = Rat::new(Int::one(), Int::from(j as u64 + 1));
    &lo <= r && r < &hi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, rat_int};
    use proptest::prelude::*;

    fn middle_thirds() -> IFSystem {
        IFSystem::digit_cantor(3, &[0, 2]).unwrap()
    }

    #[test]
    fn builders_produce_expected_maps() {
        let c = middle_thirds();
        assert_eq!(c.ratio(), &rat(1, 3));
        assert_eq!(c.translations(), &[vec![rat_int(0)], vec![rat(2, 3)]]);

        let h = IFSystem::homogeneous_cantor(rat(1, 3)).unwrap();
        assert_eq!(h.ratio(), c.ratio());
        assert_eq!(h.translations(), c.translations());

        let r2 = IFSystem::r2_family(3, rat(9, 40)).unwrap();
        assert_eq!(r2.maps_count(), 4);
        assert_eq!(
            r2.translations(),
            &[vec![rat_int(0)], vec![rat_int(1)], vec![rat_int(2)], vec![rat_int(3)]]
        );
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(IFSystem::homogeneous_cantor(rat(1, 2)).is_err());
        assert!(IFSystem::homogeneous_cantor(rat(3, 5)).is_err());
        assert!(DigitSystem::new(2, &[0, 1]).is_err());
        assert!(DigitSystem::new(3, &[0, 3]).is_err());
        assert!(DigitSystem::new(3, &[]).is_err());
        assert!(Similarity::new(rat_int(1), vec![rat_int(0)]).is_err());
    }

    #[test]
    fn admissibility_thresholds() {
        assert_eq!(min_k_thm1(1, &rat(1, 3)).unwrap(), 2);
        assert_eq!(min_k_thm1(2, &rat(1, 2)).unwrap(), 3);
        assert_eq!(min_k_thm1(1, &rat(2, 5)).unwrap(), 2);
        assert_eq!(min_k_prop1(&rat(1, 3)).unwrap(), 2);
        assert_eq!(min_k_prop1(&rat(1, 4)).unwrap(), 3);
        assert_eq!(min_k_prop1(&rat(2, 5)).unwrap(), 2);
        assert!(min_k_prop1(&rat(1, 2)).is_err());
    }

    #[test]
    fn family_hypothesis_window() {
        assert!(check_r2_hypotheses(3, &rat(9, 40)));
        assert!(check_r2_hypotheses(3, &rat(2, 9)));
        assert!(!check_r2_hypotheses(3, &rat(1, 4)));
        assert!(!check_r2_hypotheses(2, &rat(1, 5)));
        assert!(check_r2_hypotheses(4, &rat(1, 6)));
    }

    #[test]
    fn span_rank_detects_interior() {
        let b1 = vec![vec![rat_int(0)], vec![rat(2, 3)]];
        assert!(hull_has_interior(&b1, 1));
        let collinear = vec![
            vec![rat_int(0), rat_int(0)],
            vec![rat_int(1), rat_int(0)],
            vec![rat_int(2), rat_int(0)],
        ];
        assert!(!hull_has_interior(&collinear, 2));
        let triangle = vec![
            vec![rat_int(0), rat_int(0)],
            vec![rat_int(1), rat_int(0)],
            vec![rat_int(0), rat_int(1)],
        ];
        assert!(hull_has_interior(&triangle, 2));
        assert!(!hull_has_interior(&[vec![rat_int(5)]], 1));
    }

    #[test]
    fn seed_boxes() {
        let c = middle_thirds();
        assert_eq!(c.initial_set(), vec![(rat_int(-1), rat_int(1))]);
        assert_eq!(c.canonical_k0(), vec![(rat_int(0), rat_int(1))]);

        let r2 = IFSystem::r2_family(3, rat(9, 40)).unwrap();
        assert_eq!(r2.initial_set(), vec![(rat(-120, 31), rat(120, 31))]);
        assert_eq!(r2.canonical_k0(), vec![(rat_int(0), rat(120, 31))]);

        c.validate_k0(&c.initial_set()).unwrap();
        c.validate_k0(&c.canonical_k0()).unwrap();
        assert!(c.validate_k0(&vec![(rat_int(0), rat(1, 2))]).is_err());
    }

    #[test]
    fn iteration_on_intervals() {
        let caps = Caps::default();
        let c = middle_thirds();
        let k0 = IntervalUnion::interval(rat_int(0), rat_int(1)).unwrap();
        let k1 = c.iterate_intervals(&k0, &caps).unwrap();
        assert_eq!(
            k1.intervals(),
            &[(rat_int(0), rat(1, 3)), (rat(2, 3), rat_int(1))]
        );
        let k2 = c.iterate_intervals(&k1, &caps).unwrap();
        assert_eq!(k2.len(), 4);
        for (lo, hi) in k2.intervals() {
            assert_eq!(hi - lo, rat(1, 9));
        }
        let mut cur = k0;
        for m in 0..=6 {
            assert_eq!(cur.measure(), rat(2, 3).pow(m), "measure at step {m}");
            cur = c.iterate_intervals(&cur, &caps).unwrap();
        }
    }

    #[test]
    fn approximants_nest_for_builtin_families() {
        let caps = Caps::default();
        let systems = vec![
            middle_thirds(),
            IFSystem::digit_cantor(3, &[0, 1]).unwrap(),
            IFSystem::digit_cantor(4, &[0, 3]).unwrap(),
            IFSystem::r2_family(3, rat(9, 40)).unwrap(),
            IFSystem::homogeneous_cantor(rat(1, 4)).unwrap(),
        ];
        for sys in systems {
            let mut prev = sys.approximant_intervals(None, 0, &caps).unwrap();
            for m in 1..=8 {
                let cur = sys.approximant_intervals(None, m, &caps).unwrap();
                assert!(prev.covers(&cur), "nesting fails at depth {m}");
                prev = cur;
            }
        }
    }

    #[test]
    fn digit_approximant_matches_prefix_enumeration() {
        let caps = Caps::default();
        for (n, digits) in [(3u32, vec![0u32, 1]), (3, vec![0, 2]), (4, vec![0, 2, 3])] {
            let ds = DigitSystem::new(n, &digits).unwrap();
            let sys = ds.ifs();
            for m in 0..=6 {
                let via_iteration = sys.approximant_intervals(None, m, &caps).unwrap();
                let via_prefixes = ds.prefix_intervals(m, &caps).unwrap();
                assert_eq!(via_iteration, via_prefixes, "n={n} digits={digits:?} m={m}");
            }
        }
    }

    #[test]
    fn interval_cap_is_reported() {
        let caps = Caps {
            max_intervals: 10,
            ..Caps::default()
        };
        let c = middle_thirds();
        let err = c.approximant_intervals(None, 12, &caps).unwrap_err();
        assert!(matches!(err, Error::ResourceCap { .. }));
    }

    #[test]
    fn cell_iteration_covers_one_step() {
        let caps = Caps::default();
        // Three maps of ratio 1/2 in the plane.
        let sys = IFSystem::new(
            2,
            rat(1, 2),
            vec![
                vec![rat_int(0), rat_int(0)],
                vec![rat(1, 2), rat_int(0)],
                vec![rat_int(0), rat(1, 2)],
            ],
        )
        .unwrap();
        let seed = CellSet::from_boxes(
            &[vec![(rat_int(0), rat_int(1)), (rat_int(0), rat_int(1))]],
            2,
            1,
            Mode::Outer,
            &caps,
        )
        .unwrap();
        assert_eq!(seed.len(), 4);
        let next = sys.iterate_cells(&seed, &caps).unwrap();
        let cells: Vec<[i64; 3]> = next.cells_vec();
        assert_eq!(cells, vec![[0, 0, 0], [0, 1, 0], [1, 0, 0]]);
    }

    #[test]
    fn json_round_trip() {
        for sys in [
            middle_thirds(),
            IFSystem::r2_family(3, rat(9, 40)).unwrap(),
            IFSystem::homogeneous_cantor(rat(2, 5)).unwrap(),
            IFSystem::new(1, rat(1, 4), vec![vec![rat_int(0)], vec![rat(3, 4)]]).unwrap(),
        ] {
            let text = sys.to_json();
            let back = IFSystem::from_json(&text).unwrap();
            assert_eq!(back, sys);
        }
    }

    proptest! {
        #[test]
        fn both_thresholds_agree_on_the_line(num in 1i64..50, den in 3i64..100) {
            prop_assume!(2 * num < den);
            let a = rat(num, den);
            prop_assert_eq!(
                min_k_prop1(&a).unwrap(),
                min_k_thm1(1, &a).unwrap()
            );
        }

        #[test]
        fn span_rank_invariant_under_translation_and_permutation(
            pts in proptest::collection::vec((-9i64..9, -9i64..9), 1..6),
            shift in (-9i64..9, -9i64..9),
            seed in 0u64..1000,
        ) {
            let b: Vec<Vec<Rat>> = pts
                .iter()
                .map(|&(x, y)| vec![rat_int(x), rat_int(y)])
                .collect();
            let base = hull_has_interior(&b, 2);
            let shifted: Vec<Vec<Rat>> = b
                .iter()
                .map(|v| vec![&v[0] + rat_int(shift.0), &v[1] + rat_int(shift.1)])
                .collect();
            prop_assert_eq!(hull_has_interior(&shifted, 2), base);
            let mut perm = b.clone();
            let n = perm.len();
            if n > 1 {
                let i = (seed as usize) % n;
                perm.swap(0, i);
            }
            prop_assert_eq!(hull_has_interior(&perm, 2), base);
        }

        #[test]
        fn symmetric_seed_is_always_invariant(
            rn in 1i64..9, rd in 2i64..12,
            bs in proptest::collection::vec(-20i64..20, 2..5),
        ) {
            prop_assume!(rn < rd);
            let sys = IFSystem::new(
                1,
                rat(rn, rd),
                bs.iter().map(|&b| vec![rat(b, 4)]).collect(),
            ).unwrap();
            sys.validate_k0(&sys.initial_set()).unwrap();
            sys.validate_k0(&sys.tight_hull()).unwrap();
        }
    }
}
