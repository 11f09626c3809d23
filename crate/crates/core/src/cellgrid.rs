//! Exact interval unions and grid cell sets.
//!
//! [`IntervalUnion`] is a normalized union of closed intervals over any
//! ordered exact scalar; all set predicates on it are decided by scalar
//! comparison alone. [`CellSet`] is a finite set of grid cells at a fixed
//! `base`/`depth` (cell side `base^-depth`), tagged as an outer cover or an
//! inner fill of whatever set it stands for. Dimension 1 is stored as a dense
//! bit row (the kernels operate on it word-parallel); dimensions 2 and 3 keep
//! a sorted coordinate list.
//!
//! Boundary rule for rasterization: a cell belongs to an outer cover when its
//! closed box meets the interval in more than a point (a degenerate interval
//! lands in its floor cell), and to an inner fill when its closed box is
//! contained in the interval. Containment tests elsewhere treat the
//! represented boxes as closed.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::bits::BitRow;
use crate::scalar::{big_pow, big_to_i64, parse_rat, rat_str, Coord};
use crate::{Error, Int, Rat, Result};

/// Normalized union of closed intervals `[lo, hi]`, `lo <= hi`, stored
/// sorted with overlapping or touching members merged.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalUnion<T: Coord = Rat> {
    ivs: Vec<(T, T)>,
}

impl<T: Coord> IntervalUnion<T> {
    pub fn empty() -> Self {
        IntervalUnion { ivs: Vec::new() }
    }

    /// Builds and normalizes; errors on any inverted pair.
    pub fn new(pairs: Vec<(T, T)>) -> Result<Self> {
        for (lo, hi) in &pairs {
            if lo > hi {
                return Err(Error::InvalidParam(format!(
                    "inverted interval [{lo:?}, {hi:?}]"
                )));
            }
        }
        Ok(Self::normalized(pairs))
    }

    pub fn interval(lo: T, hi: T) -> Result<Self> {
        Self::new(vec![(lo, hi)])
    }

    pub fn point(x: T) -> Self {
        IntervalUnion {
            ivs: vec![(x.clone(), x)],
        }
    }

    /// Sorts and merges; callers guarantee lo <= hi per pair.
    pub(crate) fn normalized(mut pairs: Vec<(T, T)>) -> Self {
        pairs.sort();
        let mut out: Vec<(T, T)> = Vec::with_capacity(pairs.len());
        for (lo, hi) in pairs {
            match out.last_mut() {
                Some(last) if lo <= last.1 => {
                    if hi > last.1 {
                        last.1 = hi;
                    }
                }
                _ => out.push((lo, hi)),
            }
        }
        IntervalUnion { ivs: out }
    }

    pub fn intervals(&self) -> &[(T, T)] {
        &self.ivs
    }

    pub fn len(&self) -> usize {
        self.ivs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ivs.is_empty()
    }

    /// Total length (degenerate members contribute zero).
    pub fn measure(&self) -> T {
        let mut acc = T::zero();
        for (lo, hi) in &self.ivs {
            acc = acc + (hi.clone() - lo.clone());
        }
        acc
    }

    pub fn min(&self) -> Option<&T> {
        self.ivs.first().map(|p| &p.0)
    }

    pub fn max(&self) -> Option<&T> {
        self.ivs.last().map(|p| &p.1)
    }

    /// Smallest closed interval containing the union, as a union.
    pub fn hull(&self) -> Self {
        match (self.min(), self.max()) {
            (Some(lo), Some(hi)) => IntervalUnion {
                ivs: vec![(lo.clone(), hi.clone())],
            },
            _ => Self::empty(),
        }
    }

    pub fn contains_point(&self, x: &T) -> bool {
        self.ivs
            .partition_point(|p| &p.0 <= x)
            .checked_sub(1)
            .map(|i| x <= &self.ivs[i].1)
            .unwrap_or(false)
    }

    /// Whether every point of `target` lies in `self`. Exact: a connected
    /// closed interval fits a normalized union only inside one component.
    pub fn covers(&self, target: &IntervalUnion<T>) -> bool {
        target.ivs.iter().all(|(lo, hi)| {
            self.ivs
                .partition_point(|p| &p.0 <= lo)
                .checked_sub(1)
                .map(|i| hi <= &self.ivs[i].1)
                .unwrap_or(false)
        })
    }

    pub fn translate(&self, t: &T) -> Self {
        IntervalUnion {
            ivs: self
                .ivs
                .iter()
                .map(|(lo, hi)| (lo.clone() + t.clone(), hi.clone() + t.clone()))
                .collect(),
        }
    }

    /// Pointwise scaling; a negative factor flips orientation, zero collapses
    /// to a point.
    pub fn scale(&self, f: &T) -> Self {
        let mut pairs: Vec<(T, T)> = self
            .ivs
            .iter()
            .map(|(lo, hi)| (lo.clone() * f.clone(), hi.clone() * f.clone()))
            .collect();
        if f < &T::zero() {
            pairs = pairs.into_iter().map(|(a, b)| (b, a)).collect();
        }
        Self::normalized(pairs)
    }

    /// Mirror through zero.
    pub fn reflect(&self) -> Self {
        Self::normalized(
            self.ivs
                .iter()
                .map(|(lo, hi)| (hi.clone().neg(), lo.clone().neg()))
                .collect(),
        )
    }
}

impl IntervalUnion<Rat> {
    /// One interval per line, endpoints as `p/q` separated by a space.
    /// Canonical reduced endpoints make the format round-trip byte-exact.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (lo, hi) in &self.ivs {
            let _ = writeln!(s, "{} {}", rat_str(lo), rat_str(hi));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (a, b) = match (parts.next(), parts.next(), parts.next()) {
                (Some(a), Some(b), None) => (a, b),
                _ => {
                    return Err(Error::Parse(format!(
                        "line {}: expected two rationals",
                        lineno + 1
                    )))
                }
            };
            pairs.push((parse_rat(a)?, parse_rat(b)?));
        }
        Self::new(pairs)
    }
}

/// Whether a cell set is an outer cover or an inner fill of the set it
/// approximates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Outer,
    Inner,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Outer => "outer",
            Mode::Inner => "inner",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "outer" => Ok(Mode::Outer),
            "inner" => Ok(Mode::Inner),
            other => Err(Error::Parse(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
enum Cells {
    /// Dense bit row over cell indices, d = 1.
    Row(BitRow),
    /// Sorted distinct coordinates, unused axes zero, d = 2 or 3.
    Sorted(Vec<[i64; 3]>),
}

/// Finite set of grid cells at one resolution. Cell `c` stands for the
/// closed box `c * base^-depth + [0, base^-depth]^d`.
#[derive(Debug, Clone)]
pub struct CellSet {
    d: usize,
    base: u32,
    depth: u32,
    mode: Mode,
    cells: Cells,
}

impl CellSet {
    pub fn from_cells(
        d: usize,
        base: u32,
        depth: u32,
        mode: Mode,
        mut coords: Vec<[i64; 3]>,
    ) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(Error::InvalidParam(format!("dimension {d} not in 1..=3")));
        }
        if base < 2 {
            return Err(Error::InvalidParam(format!("base {base} < 2")));
        }
        for c in &coords {
            if c[d..].iter().any(|&x| x != 0) {
                return Err(Error::InvalidParam(
                    "coordinate set beyond dimension".into(),
                ));
            }
        }
        coords.sort();
        coords.dedup();
        let cells = if d == 1 {
            Cells::Row(row_from_sorted(&coords))
        } else {
            Cells::Sorted(coords)
        };
        Ok(CellSet {
            d,
            base,
            depth,
            mode,
            cells,
        })
    }

    /// Rasterizes a union of closed intervals onto the depth grid, d = 1.
    pub fn from_intervals(iv: &IntervalUnion<Rat>, base: u32, depth: u32, mode: Mode) -> Result<Self> {
        if base < 2 {
            return Err(Error::InvalidParam(format!("base {base} < 2")));
        }
        let scale = Rat::from_integer(big_pow(base, depth));
        let mut runs: Vec<(i64, i64)> = Vec::new();
        for (lo, hi) in iv.intervals() {
            let lo = lo * &scale;
            let hi = hi * &scale;
            let (a, b) = match mode {
                Mode::Outer => {
                    if lo == hi {
                        let c = big_to_i64(&lo.floor().to_integer())?;
                        (c, c)
                    } else {
                        (
                            big_to_i64(&lo.floor().to_integer())?,
                            big_to_i64(&hi.ceil().to_integer())? - 1,
                        )
                    }
                }
                Mode::Inner => {
                    let a = big_to_i64(&lo.ceil().to_integer())?;
                    let b = big_to_i64(&hi.floor().to_integer())? - 1;
                    if a > b {
                        continue;
                    }
                    (a, b)
                }
            };
            runs.push((a, b));
        }
        runs.sort();
        let merged = merge_runs(runs);
        Ok(CellSet {
            d: 1,
            base,
            depth,
            mode,
            cells: Cells::Row(BitRow::from_runs(&merged)),
        })
    }

    /// Rasterizes a union of closed axis-aligned boxes (one `(lo, hi)` pair
    /// per axis). All boxes must share one dimension, 1 through 3.
    pub fn from_boxes(
        boxes: &[Vec<(Rat, Rat)>],
        base: u32,
        depth: u32,
        mode: Mode,
        caps: &crate::Caps,
    ) -> Result<Self> {
        let d = boxes.first().map(|b| b.len()).unwrap_or(1);
        if !(1..=3).contains(&d) {
            return Err(Error::InvalidParam(format!("dimension {d} not in 1..=3")));
        }
        if base < 2 {
            return Err(Error::InvalidParam(format!("base {base} < 2")));
        }
        let scale = Rat::from_integer(big_pow(base, depth));
        let mut coords: Vec<[i64; 3]> = Vec::new();
        'next_box: for bx in boxes {
            if bx.len() != d {
                return Err(Error::InvalidParam("boxes of mixed dimension".into()));
            }
            let mut ranges = [(0i64, 0i64); 3];
            for (i, (lo, hi)) in bx.iter().enumerate() {
                if lo > hi {
                    return Err(Error::InvalidParam("inverted box".into()));
                }
                let lo = lo * &scale;
                let hi = hi * &scale;
                ranges[i] = match mode {
                    Mode::Outer => {
                        if lo == hi {
                            let c = big_to_i64(&lo.floor().to_integer())?;
                            (c, c)
                        } else {
                            (
                                big_to_i64(&lo.floor().to_integer())?,
                                big_to_i64(&hi.ceil().to_integer())? - 1,
                            )
                        }
                    }
                    Mode::Inner => {
                        let a = big_to_i64(&lo.ceil().to_integer())?;
                        let b = big_to_i64(&hi.floor().to_integer())? - 1;
                        if a > b {
                            continue 'next_box;
                        }
                        (a, b)
                    }
                };
            }
            let count: u128 = (0..d)
                .map(|i| (ranges[i].1 - ranges[i].0 + 1) as u128)
                .product();
            if coords.len() as u128 + count > caps.max_cells as u128 {
                return Err(Error::cap(
                    "box rasterization",
                    coords.len() as u128 + count,
                    caps.max_cells as u128,
                ));
            }
            for x in ranges[0].0..=ranges[0].1 {
                if d == 1 {
                    coords.push([x, 0, 0]);
                    continue;
                }
                for y in ranges[1].0..=ranges[1].1 {
                    if d == 2 {
                        coords.push([x, y, 0]);
                        continue;
                    }
                    for z in ranges[2].0..=ranges[2].1 {
                        coords.push([x, y, z]);
                    }
                }
            }
        }
        CellSet::from_cells(d, base, depth, mode, coords)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn len(&self) -> usize {
        match &self.cells {
            Cells::Row(row) => row.count_ones() as usize,
            Cells::Sorted(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        match &self.cells {
            Cells::Row(row) => row.is_empty(),
            Cells::Sorted(v) => v.is_empty(),
        }
    }

    /// The dense row, d = 1 only.
    pub fn row(&self) -> Result<&BitRow> {
        match &self.cells {
            Cells::Row(row) => Ok(row),
            _ => Err(Error::Mismatch("dense row is only kept for d = 1".into())),
        }
    }

    pub fn cells_vec(&self) -> Vec<[i64; 3]> {
        match &self.cells {
            Cells::Row(row) => row
                .runs()
                .iter()
                .flat_map(|&(a, b)| (a..=b).map(|c| [c, 0, 0]))
                .collect(),
            Cells::Sorted(v) => v.clone(),
        }
    }

    pub fn contains_cell(&self, c: &[i64; 3]) -> bool {
        match &self.cells {
            Cells::Row(row) => row.get(c[0]),
            Cells::Sorted(v) => v.binary_search(c).is_ok(),
        }
    }

    /// Exact volume of the represented boxes: `len * base^(-depth * d)`.
    pub fn measure(&self) -> Rat {
        Rat::new(
            Int::from(self.len()),
            big_pow(self.base, self.depth * self.d as u32),
        )
    }

    /// Adds every cell within sup-distance `radius` (in cells).
    pub fn dilate(&self, radius: u32) -> Self {
        let r = radius as i64;
        let cells = match &self.cells {
            Cells::Row(row) => {
                let runs: Vec<(i64, i64)> =
                    row.runs().iter().map(|&(a, b)| (a - r, b + r)).collect();
                Cells::Row(BitRow::from_runs(&merge_runs(runs)))
            }
            Cells::Sorted(v) => {
                let mut out = BTreeSet::new();
                for c in v {
                    for dx in -r..=r {
                        for dy in -r..=r {
                            if self.d == 2 {
                                out.insert([c[0] + dx, c[1] + dy, 0]);
                            } else {
                                for dz in -r..=r {
                                    out.insert([c[0] + dx, c[1] + dy, c[2] + dz]);
                                }
                            }
                        }
                    }
                }
                Cells::Sorted(out.into_iter().collect())
            }
        };
        CellSet {
            cells,
            ..self.clone()
        }
    }

    /// Re-expresses the same boxes at a finer depth.
    pub fn refine(&self, new_depth: u32, caps: &crate::Caps) -> Result<Self> {
        if new_depth < self.depth {
            return Err(Error::InvalidParam(format!(
                "refine target depth {new_depth} is coarser than {}",
                self.depth
            )));
        }
        let f = checked_factor(self.base, new_depth - self.depth)?;
        let needed = (self.len() as u128).saturating_mul((f as u128).pow(self.d as u32));
        if needed > caps.max_cells as u128 {
            return Err(Error::cap("refine", needed, caps.max_cells as u128));
        }
        let cells = match &self.cells {
            Cells::Row(row) => {
                let runs: Vec<(i64, i64)> = row
                    .runs()
                    .iter()
                    .map(|&(a, b)| (a * f, (b + 1) * f - 1))
                    .collect();
                Cells::Row(BitRow::from_runs(&merge_runs(runs)))
            }
            Cells::Sorted(v) => {
                let mut out = Vec::with_capacity(needed as usize);
                for c in v {
                    for dx in 0..f {
                        for dy in 0..f {
                            if self.d == 2 {
                                out.push([c[0] * f + dx, c[1] * f + dy, 0]);
                            } else {
                                for dz in 0..f {
                                    out.push([c[0] * f + dx, c[1] * f + dy, c[2] * f + dz]);
                                }
                            }
                        }
                    }
                }
                out.sort();
                Cells::Sorted(out)
            }
        };
        Ok(CellSet {
            depth: new_depth,
            cells,
            ..self.clone()
        })
    }

    /// Number of depth-`m` cells met by the represented boxes. Exact at any
    /// `m`: finer depths multiply, coarser depths deduplicate parents.
    pub fn count_at_depth(&self, m: u32) -> u128 {
        if m >= self.depth {
            let f = (self.base as u128).pow((m - self.depth) * self.d as u32);
            self.len() as u128 * f
        } else {
            let f = (self.base as i64).pow(self.depth - m);
            match &self.cells {
                Cells::Row(row) => {
                    let runs: Vec<(i64, i64)> = row
                        .runs()
                        .iter()
                        .map(|&(a, b)| (a.div_euclid(f), b.div_euclid(f)))
                        .collect();
                    merge_runs(runs)
                        .iter()
                        .map(|&(a, b)| (b - a + 1) as u128)
                        .sum()
                }
                Cells::Sorted(v) => {
                    let mut parents: Vec<[i64; 3]> = v
                        .iter()
                        .map(|c| {
                            let mut p = [0i64; 3];
                            for i in 0..self.d {
                                p[i] = c[i].div_euclid(f);
                            }
                            p
                        })
                        .collect();
                    parents.sort();
                    parents.dedup();
                    parents.len() as u128
                }
            }
        }
    }

    /// Header `d base depth mode`, then one cell per line.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {} {} {}\n", self.d, self.base, self.depth, self.mode.as_str());
        for c in self.cells_vec() {
            for i in 0..self.d {
                if i > 0 {
                    s.push(' ');
                }
                let _ = write!(s, "{}", c[i]);
            }
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty cell set text".into()))?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 4 {
            return Err(Error::Parse("header must be `d base depth mode`".into()));
        }
        let d: usize = parts[0]
            .parse()
            .map_err(|_| Error::Parse("bad dimension".into()))?;
        let base: u32 = parts[1]
            .parse()
            .map_err(|_| Error::Parse("bad base".into()))?;
        let depth: u32 = parts[2]
            .parse()
            .map_err(|_| Error::Parse("bad depth".into()))?;
        let mode: Mode = parts[3].parse()?;
        let mut coords = Vec::new();
        for line in lines {
            let nums: Vec<i64> = line
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad cell {t:?}"))))
                .collect::<Result<_>>()?;
            if nums.len() != d {
                return Err(Error::Parse(format!(
                    "cell line has {} coordinates, expected {d}",
                    nums.len()
                )));
            }
            let mut c = [0i64; 3];
            c[..d].copy_from_slice(&nums);
            coords.push(c);
        }
        CellSet::from_cells(d, base, depth, mode, coords)
    }
}

fn row_from_sorted(coords: &[[i64; 3]]) -> BitRow {
    let mut runs: Vec<(i64, i64)> = Vec::new();
    for c in coords {
        match runs.last_mut() {
            Some(last) if last.1 + 1 == c[0] => last.1 = c[0],
            Some(last) if last.1 >= c[0] => {}
            _ => runs.push((c[0], c[0])),
        }
    }
    BitRow::from_runs(&runs)
}

pub(crate) fn merge_runs(mut runs: Vec<(i64, i64)>) -> Vec<(i64, i64)> {
    runs.sort();
    let mut out: Vec<(i64, i64)> = Vec::with_capacity(runs.len());
    for (a, b) in runs {
        match out.last_mut() {
            Some(last) if a <= last.1 + 1 => {
                if b > last.1 {
                    last.1 = b;
                }
            }
            _ => out.push((a, b)),
        }
    }
    out
}

fn checked_factor(base: u32, delta: u32) -> Result<i64> {
    let mut f: i64 = 1;
    for _ in 0..delta {
        f = f
            .checked_mul(base as i64)
            .ok_or_else(|| Error::InvalidParam("refinement factor overflows".into()))?;
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, rat_int};
    use crate::Caps;
    use proptest::prelude::*;

    fn iv(pairs: &[(i64, i64, i64, i64)]) -> IntervalUnion<Rat> {
        IntervalUnion::new(
            pairs
                .iter()
                .map(|&(a, b, c, d)| (rat(a, b), rat(c, d)))
                .collect(),
        )
        .unwrap()
    }

    fn cells1(set: &CellSet) -> Vec<i64> {
        set.cells_vec().iter().map(|c| c[0]).collect()
    }

    #[test]
    fn normalization_merges_touching_and_overlapping() {
        let u = iv(&[(2, 3, 1, 1), (0, 1, 1, 3), (1, 3, 2, 3)]);
        assert_eq!(u.intervals(), &[(rat_int(0), rat_int(1))]);
    }

    #[test]
    fn unit_interval_outer_cells_base3_depth1() {
        let u = iv(&[(0, 1, 1, 1)]);
        let cs = CellSet::from_intervals(&u, 3, 1, Mode::Outer).unwrap();
        assert_eq!(cells1(&cs), vec![0, 1, 2]);
    }

    #[test]
    fn half_interval_inner_cells_base2_depth1() {
        let u = iv(&[(0, 1, 1, 2)]);
        let cs = CellSet::from_intervals(&u, 2, 1, Mode::Inner).unwrap();
        assert_eq!(cells1(&cs), vec![0]);
    }

    #[test]
    fn depth2_outer_cells_of_first_cantor_stage() {
        let u = iv(&[(0, 1, 1, 3), (2, 3, 1, 1)]);
        let cs = CellSet::from_intervals(&u, 3, 2, Mode::Outer).unwrap();
        assert_eq!(cells1(&cs), vec![0, 1, 2, 6, 7, 8]);
        assert_eq!(cs.measure(), rat(6, 9));
    }

    #[test]
    fn point_set_occupies_one_cell_at_every_depth() {
        let u = IntervalUnion::point(rat_int(0));
        for m in 0..8 {
            let cs = CellSet::from_intervals(&u, 3, m, Mode::Outer).unwrap();
            assert_eq!(cs.len(), 1, "depth {m}");
            assert_eq!(cs.count_at_depth(m), 1);
        }
    }

    #[test]
    fn inner_cells_of_degenerate_interval_are_empty() {
        let u = IntervalUnion::point(rat(1, 2));
        let cs = CellSet::from_intervals(&u, 2, 3, Mode::Inner).unwrap();
        assert!(cs.is_empty());
        assert_eq!(cs.measure(), rat_int(0));
    }

    #[test]
    fn dilate_line_examples() {
        let cs = CellSet::from_cells(1, 3, 1, Mode::Outer, vec![[0, 0, 0]]).unwrap();
        assert_eq!(cells1(&cs.dilate(1)), vec![-1, 0, 1]);

        let sq = CellSet::from_cells(2, 3, 1, Mode::Outer, vec![[0, 0, 0]]).unwrap();
        assert_eq!(sq.dilate(1).len(), 9);

        let stage2 = CellSet::from_cells(
            1,
            3,
            2,
            Mode::Outer,
            vec![[0, 0, 0], [2, 0, 0], [6, 0, 0], [8, 0, 0]],
        )
        .unwrap();
        assert_eq!(stage2.dilate(1).len(), 10);
        assert_eq!(cells1(&stage2.dilate(1)), vec![-1, 0, 1, 2, 3, 5, 6, 7, 8, 9]);
    }

    #[test]
    fn refine_splits_cells_exactly() {
        let caps = Caps::default();
        let c0 = CellSet::from_cells(1, 2, 0, Mode::Outer, vec![[0, 0, 0]]).unwrap();
        assert_eq!(cells1(&c0.refine(1, &caps).unwrap()), vec![0, 1]);

        let c1 = CellSet::from_cells(1, 3, 1, Mode::Outer, vec![[1, 0, 0]]).unwrap();
        assert_eq!(cells1(&c1.refine(2, &caps).unwrap()), vec![3, 4, 5]);

        let sq = CellSet::from_cells(2, 2, 0, Mode::Inner, vec![[1, 1, 0]]).unwrap();
        let fine = sq.refine(2, &caps).unwrap();
        assert_eq!(fine.len(), 16);
        assert_eq!(fine.measure(), sq.measure());
    }

    #[test]
    fn refine_respects_cell_cap() {
        let caps = Caps {
            max_cells: 10,
            ..Caps::default()
        };
        let c = CellSet::from_cells(1, 10, 0, Mode::Outer, vec![[0, 0, 0], [1, 0, 0]]).unwrap();
        match c.refine(1, &caps) {
            Err(Error::ResourceCap { needed, cap, .. }) => {
                assert_eq!(needed, 20);
                assert_eq!(cap, 10);
            }
            other => panic!("expected cap error, got {other:?}"),
        }
    }

    #[test]
    fn covers_examples() {
        let whole = iv(&[(0, 1, 1, 1), (1, 1, 2, 1)]);
        let target = iv(&[(0, 1, 2, 1)]);
        assert!(whole.covers(&target));

        let gap = iv(&[(0, 1, 1, 3), (2, 3, 1, 1)]);
        assert!(!gap.covers(&iv(&[(0, 1, 1, 1)])));
        assert!(gap.covers(&iv(&[(0, 1, 1, 4)])));
        assert!(IntervalUnion::<Rat>::empty().covers(&IntervalUnion::empty()));
        assert!(!IntervalUnion::<Rat>::empty().covers(&target));
    }

    #[test]
    fn text_round_trip_is_byte_exact() {
        let u = iv(&[(0, 1, 1, 3), (2, 3, 1, 1), (-5, 2, -2, 1)]);
        let text = u.to_text();
        let back = IntervalUnion::from_text(&text).unwrap();
        assert_eq!(back, u);
        assert_eq!(back.to_text(), text);

        let cs = CellSet::from_intervals(&u, 4, 2, Mode::Outer).unwrap();
        let text = cs.to_text();
        let back = CellSet::from_text(&text).unwrap();
        assert_eq!(back.to_text(), text);
        assert_eq!(back.len(), cs.len());
    }

    #[test]
    fn count_at_depth_parent_merge() {
        // Cells 2 and 3 at depth 2 share the depth-1 parent 1.
        let cs = CellSet::from_cells(1, 2, 2, Mode::Outer, vec![[2, 0, 0], [3, 0, 0]]).unwrap();
        assert_eq!(cs.count_at_depth(1), 1);
        assert_eq!(cs.count_at_depth(2), 2);
        assert_eq!(cs.count_at_depth(3), 4);
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent_and_measure_stable(
            raw in proptest::collection::vec((-50i64..50, 0i64..20), 0..8)
        ) {
            let pairs: Vec<(Rat, Rat)> = raw
                .iter()
                .map(|&(a, l)| (rat(a, 4), rat(a + l, 4)))
                .collect();
            let u = IntervalUnion::new(pairs).unwrap();
            let again = IntervalUnion::new(u.intervals().to_vec()).unwrap();
            prop_assert_eq!(&again, &u);
            // Union measure never exceeds the raw total and is nonnegative.
            let raw_total: Rat = raw.iter().map(|&(_, l)| rat(l, 4)).fold(rat_int(0), |a, b| a + b);
            prop_assert!(u.measure() <= raw_total);
            prop_assert!(u.measure() >= rat_int(0));
        }

        #[test]
        fn outer_minus_inner_gap_is_bounded(
            raw in proptest::collection::vec((-20i64..20, 1i64..15), 1..6),
            depth in 0u32..6,
        ) {
            let pairs: Vec<(Rat, Rat)> = raw
                .iter()
                .map(|&(a, l)| (rat(a, 7), rat(a + l, 7)))
                .collect();
            let u = IntervalUnion::new(pairs).unwrap();
            let outer = CellSet::from_intervals(&u, 2, depth, Mode::Outer).unwrap();
            let inner = CellSet::from_intervals(&u, 2, depth, Mode::Inner).unwrap();
            let gap = outer.measure() - inner.measure();
            let bound = rat(2 * u.len() as i64, 1) * Rat::new(Int::from(1), big_pow(2, depth));
            prop_assert!(gap >= rat_int(0));
            prop_assert!(gap <= bound, "gap {} bound {}", gap, bound);
            // Outer covers the set, inner is covered by it: counts nest.
            prop_assert!(outer.len() >= inner.len());
        }

        #[test]
        fn dilate_zero_is_identity_and_radius_adds(
            cells in proptest::collection::btree_set(-40i64..40, 1..12),
            r1 in 0u32..3, r2 in 0u32..3,
        ) {
            let coords: Vec<[i64; 3]> = cells.iter().map(|&c| [c, 0, 0]).collect();
            let cs = CellSet::from_cells(1, 2, 1, Mode::Outer, coords).unwrap();
            prop_assert_eq!(cells1(&cs.dilate(0)), cells1(&cs));
            let split = cs.dilate(r1).dilate(r2);
            let once = cs.dilate(r1 + r2);
            prop_assert_eq!(cells1(&split), cells1(&once));
        }
    }
}
