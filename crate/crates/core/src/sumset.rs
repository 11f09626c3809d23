//! Minkowski sums, signed sums, and difference-vector grids.
//!
//! Interval-union sums are exact. Cell-set sums add the *cell index sets*
//! (so a single cell at index 0 is the additive identity); as a spatial
//! statement the index sum tracks the true sum of the represented boxes to
//! within one cell per axis, and [`cell_box_sum_fatten`] recovers the true
//! box sum exactly when that is what a proof needs.
//!
//! [`DiffVectorSet`] rasterizes `{(x_0 - x_1, ..., x_0 - x_k)}` over a 1-D
//! cell set: grid point `(i_1, ..., i_k)` is occupied iff some cell `p` and
//! all `p - i_l` are occupied in the source. The kernel resolves the last
//! axis word-parallel (a row is `M - A` for `M` the intersection of shifted
//! copies of `A`) and parallelizes over the leading axes; output is
//! write-once per row, so results are bit-identical at any thread count.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::bits::{BitGrid, BitRow};
use crate::cellgrid::{CellSet, IntervalUnion};
use crate::geometry::ConvexPolygon;
use crate::scalar::{big_pow, ceil_i64, floor_i64};
use crate::{Caps, Error, Int, Rat, Result};

/// Exact pairwise sum of two interval unions.
pub fn minkowski_sum(
    a: &IntervalUnion<Rat>,
    b: &IntervalUnion<Rat>,
    caps: &Caps,
) -> Result<IntervalUnion<Rat>> {
    let raw = a.len() as u128 * b.len() as u128;
    if raw > caps.max_intervals as u128 {
        return Err(Error::cap("interval sum", raw, caps.max_intervals as u128));
    }
    let mut pairs = Vec::with_capacity(raw as usize);
    for (alo, ahi) in a.intervals() {
        for (blo, bhi) in b.intervals() {
            pairs.push((alo + blo, ahi + bhi));
        }
    }
    Ok(IntervalUnion::normalized(pairs))
}

/// `K + ... + K` with `k` summands, exact.
pub fn kfold_sum(a: &IntervalUnion<Rat>, k: u32, caps: &Caps) -> Result<IntervalUnion<Rat>> {
    if k == 0 {
        return Err(Error::InvalidParam("k-fold sum needs k >= 1".into()));
    }
    let mut acc = a.clone();
    for _ in 1..k {
        acc = minkowski_sum(&acc, a, caps)?;
    }
    Ok(acc)
}

/// Term sign in an alternating sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// Parses a sign string such as `+-+`; at least two signs, leading `+`.
pub fn parse_signs(s: &str) -> Result<Vec<Sign>> {
    let signs: Vec<Sign> = s
        .chars()
        .map(|c| match c {
            '+' => Ok(Sign::Plus),
            '-' => Ok(Sign::Minus),
            other => Err(Error::Parse(format!("sign {other:?} is not + or -"))),
        })
        .collect::<Result<_>>()?;
    validate_signs(&signs)?;
    Ok(signs)
}

fn validate_signs(signs: &[Sign]) -> Result<()> {
    if signs.len() < 2 {
        return Err(Error::InvalidParam("need at least two signs".into()));
    }
    if signs[0] != Sign::Plus {
        return Err(Error::InvalidParam("first sign must be +".into()));
    }
    Ok(())
}

/// `K ± K ± ... ± K` following the sign list, exact.
pub fn signed_sum(
    a: &IntervalUnion<Rat>,
    signs: &[Sign],
    caps: &Caps,
) -> Result<IntervalUnion<Rat>> {
    validate_signs(signs)?;
    let neg = a.reflect();
    let mut acc = a.clone();
    for s in &signs[1..] {
        let term = match s {
            Sign::Plus => a,
            Sign::Minus => &neg,
        };
        acc = minkowski_sum(&acc, term, caps)?;
    }
    Ok(acc)
}

fn check_cell_compat(a: &CellSet, b: &CellSet) -> Result<()> {
    if a.d() != b.d() || a.base() != b.base() || a.depth() != b.depth() || a.mode() != b.mode() {
        return Err(Error::Mismatch(format!(
            "cell sets disagree: ({}, {}, {}, {:?}) vs ({}, {}, {}, {:?})",
            a.d(),
            a.base(),
            a.depth(),
            a.mode(),
            b.d(),
            b.base(),
            b.depth(),
            b.mode()
        )));
    }
    Ok(())
}

/// Sum of the cell index sets; same grid, same mode.
pub fn cell_minkowski_sum(a: &CellSet, b: &CellSet, caps: &Caps) -> Result<CellSet> {
    check_cell_compat(a, b)?;
    if a.d() == 1 {
        let (ra, rb) = (a.row()?, b.row()?);
        let row = row_index_sum(ra, rb, caps)?;
        let coords = row
            .runs()
            .iter()
            .flat_map(|&(x, y)| (x..=y).map(|c| [c, 0, 0]))
            .collect();
        return CellSet::from_cells(1, a.base(), a.depth(), a.mode(), coords);
    }
    let raw = a.len() as u128 * b.len() as u128;
    if raw > caps.max_enum as u128 {
        return Err(Error::cap("cell sum", raw, caps.max_enum as u128));
    }
    let mut out = BTreeSet::new();
    for ca in a.cells_vec() {
        for cb in b.cells_vec() {
            out.insert([ca[0] + cb[0], ca[1] + cb[1], ca[2] + cb[2]]);
        }
    }
    if out.len() as u128 > caps.max_cells as u128 {
        return Err(Error::cap("cell sum", out.len() as u128, caps.max_cells as u128));
    }
    CellSet::from_cells(a.d(), a.base(), a.depth(), a.mode(), out.into_iter().collect())
}

/// `A + B` on dense rows: for each run `[p, q]` of `a`, the whole translate
/// family `b + p ..= b + q` is one upward dilation. Dilations are cached per
/// distinct run length, which collapses the cost on equal-length fragments.
fn row_index_sum(a: &BitRow, b: &BitRow, caps: &Caps) -> Result<BitRow> {
    let (Some(amin), Some(bmin)) = (a.min_one(), b.min_one()) else {
        return Ok(BitRow::new(0, 0));
    };
    let (amax, bmax) = (a.max_one().unwrap(), b.max_one().unwrap());
    let span = (amax + bmax) - (amin + bmin) + 1;
    if span as u128 > caps.max_cells as u128 {
        return Err(Error::cap("cell sum span", span as u128, caps.max_cells as u128));
    }
    let mut acc = BitRow::new(amin + bmin, span as usize);
    let mut cache: BTreeMap<i64, BitRow> = BTreeMap::new();
    for (p, q) in a.runs() {
        let dil = cache
            .entry(q - p)
            .or_insert_with(|| b.dilate_up((q - p) as u64));
        acc.or_shifted(dil, p);
    }
    Ok(acc)
}

/// k-fold index sum of one cell set.
pub fn cell_kfold_sum(a: &CellSet, k: u32, caps: &Caps) -> Result<CellSet> {
    if k == 0 {
        return Err(Error::InvalidParam("k-fold sum needs k >= 1".into()));
    }
    let mut acc = a.clone();
    for _ in 1..k {
        acc = cell_minkowski_sum(&acc, a, caps)?;
    }
    Ok(acc)
}

/// Mirror through zero (cell `c` becomes `-c - 1`, the reflected box).
pub fn cell_reflect(a: &CellSet) -> CellSet {
    let coords: Vec<[i64; 3]> = a
        .cells_vec()
        .iter()
        .map(|c| {
            let mut v = [0i64; 3];
            for i in 0..a.d() {
                v[i] = -c[i] - 1;
            }
            v
        })
        .collect();
    CellSet::from_cells(a.d(), a.base(), a.depth(), a.mode(), coords)
        .expect("reflection preserves validity")
}

/// Signed index sum following the sign list.
pub fn cell_signed_sum(a: &CellSet, signs: &[Sign], caps: &Caps) -> Result<CellSet> {
    validate_signs(signs)?;
    let neg = cell_reflect(a);
    let mut acc = a.clone();
    for s in &signs[1..] {
        let term = match s {
            Sign::Plus => a,
            Sign::Minus => &neg,
        };
        acc = cell_minkowski_sum(&acc, term, caps)?;
    }
    Ok(acc)
}

/// Adds every cell `c + e` for `e` in `{0..=amount}^d`. Applied to a k-fold
/// index sum with `amount = k - 1`, the result is exactly the cell set of
/// the Minkowski sum of the represented closed boxes, so inner stays inner
/// and outer stays outer with no slack.
pub fn cell_fatten_up(a: &CellSet, amount: u32, caps: &Caps) -> Result<CellSet> {
    let r = amount as i64;
    if a.d() == 1 {
        let runs: Vec<(i64, i64)> = a.row()?.runs().iter().map(|&(x, y)| (x, y + r)).collect();
        let coords = crate::cellgrid::merge_runs(runs)
            .iter()
            .flat_map(|&(x, y)| (x..=y).map(|c| [c, 0, 0]))
            .collect();
        return CellSet::from_cells(1, a.base(), a.depth(), a.mode(), coords);
    }
    let raw = a.len() as u128 * ((r + 1) as u128).pow(a.d() as u32);
    if raw > caps.max_cells as u128 {
        return Err(Error::cap("cell fattening", raw, caps.max_cells as u128));
    }
    let mut out = BTreeSet::new();
    for c in a.cells_vec() {
        for dx in 0..=r {
            for dy in 0..=r {
                if a.d() == 2 {
                    out.insert([c[0] + dx, c[1] + dy, 0]);
                } else {
                    for dz in 0..=r {
                        out.insert([c[0] + dx, c[1] + dy, c[2] + dz]);
                    }
                }
            }
        }
    }
    CellSet::from_cells(a.d(), a.base(), a.depth(), a.mode(), out.into_iter().collect())
}

/// Rasterized difference-vector set `{(x_0 - x_1, ..., x_0 - x_k)}` of a
/// 1-D cell set, on the k-dimensional grid of the same step.
#[derive(Debug, Clone)]
pub struct DiffVectorSet {
    grid: BitGrid,
    base: u32,
    depth: u32,
}

impl DiffVectorSet {
    /// Occupancy kernel. Grid point `(i_1, ..., i_k)` is set iff the source
    /// has a cell `p` with every `p - i_l` also a cell.
    pub fn compute(cells: &CellSet, k: usize, caps: &Caps) -> Result<Self> {
        if cells.d() != 1 {
            return Err(Error::InvalidParam(
                "difference vectors are computed over 1-D cell sets".into(),
            ));
        }
        if !(1..=3).contains(&k) {
            return Err(Error::InvalidParam(format!("arity {k} not in 1..=3")));
        }
        let a = cells.row()?;
        let (Some(amin), Some(amax)) = (a.min_one(), a.max_one()) else {
            return Ok(DiffVectorSet {
                grid: BitGrid::new(k, 2, -1),
                base: cells.base(),
                depth: cells.depth(),
            });
        };
        let span = amax - amin;
        // Differences live in [-span, span]; one pad cell at the low side
        // keeps the closed-cover dilation inside the window.
        let side = 2 * span + 2;
        let origin = -span - 1;
        if side as u128 > caps.max_grid_side as u128 {
            return Err(Error::cap("grid side", side as u128, caps.max_grid_side as u128));
        }
        let bits = (side as u128).pow(k as u32);
        if bits > caps.max_grid_bits as u128 {
            return Err(Error::cap("grid bits", bits, caps.max_grid_bits as u128));
        }
        let mut grid = BitGrid::new(k, side as usize, origin);
        let runs_a = a.runs();
        let raw_lo = -span;
        let raw_len = (2 * span + 1) as usize;
        if k == 1 {
            let row = diff_row(a, &runs_a, raw_lo, raw_len);
            let (bits, row_words) = grid.rows_mut();
            BitGrid::store_row(&mut bits[..row_words], &row, origin, row_words);
        } else {
            let side_u = side as usize;
            let (bits, row_words) = grid.rows_mut();
            bits.par_chunks_mut(row_words)
                .enumerate()
                .for_each(|(idx, chunk)| {
                    let (i1, i2) = if k == 2 {
                        (origin + idx as i64, 0)
                    } else {
                        (
                            origin + (idx / side_u) as i64,
                            origin + (idx % side_u) as i64,
                        )
                    };
                    let mut m = a.and_shifted(a, i1);
                    if k == 3 {
                        if m.is_empty() {
                            return;
                        }
                        m = m.and_shifted(a, i2);
                    }
                    if m.is_empty() {
                        return;
                    }
                    let row = diff_row(&m, &runs_a, raw_lo, raw_len);
                    BitGrid::store_row(chunk, &row, origin, row_words);
                });
        }
        Ok(DiffVectorSet {
            grid,
            base: cells.base(),
            depth: cells.depth(),
        })
    }

    pub fn k(&self) -> usize {
        self.grid.k()
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn grid(&self) -> &BitGrid {
        &self.grid
    }

    pub fn occupied(&self, c: &[i64]) -> bool {
        self.grid.occupied(c)
    }

    /// Whether `c` lies in the closed-box cover: some occupied grid point in
    /// `c + {0,1}^k`. The cover's boxes are exactly the difference-vector
    /// set of the source's closed boxes.
    pub fn covered(&self, c: &[i64]) -> bool {
        let k = self.k();
        for mask in 0u32..(1 << k) {
            let mut v = [0i64; 3];
            for (i, slot) in v.iter_mut().enumerate().take(k) {
                *slot = c[i] + ((mask >> i) & 1) as i64;
            }
            if self.grid.occupied(&v[..k]) {
                return true;
            }
        }
        false
    }

    pub fn count(&self) -> u128 {
        self.grid.count_ones()
    }

    /// Cell count of the closed-box cover.
    pub fn dilated_count(&self) -> u128 {
        self.grid.dilated_count()
    }

    fn step_volume(&self) -> Rat {
        Rat::new(
            Int::one(),
            big_pow(self.base, self.depth * self.k() as u32),
        )
    }

    /// Volume of the occupied cells' boxes.
    pub fn measure_raw(&self) -> Rat {
        Rat::from_integer(Int::from(self.count())) * self.step_volume()
    }

    /// Exact volume of the difference-vector set of the source boxes.
    pub fn measure_cover(&self) -> Rat {
        Rat::from_integer(Int::from(self.dilated_count())) * self.step_volume()
    }

    /// Occupied coordinates on one axis, which for every axis equals the
    /// rasterized `K - K`.
    pub fn projection(&self, axis: usize) -> BitRow {
        self.grid.projection(axis)
    }

    /// Coordinates are in set units; scaling by the grid step is internal.
    /// Returns the first grid cell meeting the open interval that is missing
    /// from the closed-box cover, if any.
    pub fn contains_interval(&self, lo: &Rat, hi: &Rat) -> Result<Option<i64>> {
        if self.k() != 1 {
            return Err(Error::Mismatch(format!(
                "interval target needs arity 1, set has {}",
                self.k()
            )));
        }
        if lo > hi {
            return Err(Error::InvalidParam("inverted target interval".into()));
        }
        let scale = Rat::from_integer(big_pow(self.base, self.depth));
        let l = lo * &scale;
        let h = hi * &scale;
        let (a, b) = if l == h {
            let c = floor_i64(&l)?;
            (c, c)
        } else {
            (floor_i64(&l)?, ceil_i64(&h)? - 1)
        };
        for c in a..=b {
            if !self.covered(&[c]) {
                return Ok(Some(c));
            }
        }
        Ok(None)
    }

    /// Polygon target in set units, arity 2. Returns the first cell meeting
    /// the polygon that is missing from the closed-box cover.
    pub fn contains_polygon(
        &self,
        poly: &ConvexPolygon<Rat>,
        caps: &Caps,
    ) -> Result<Option<(i64, i64)>> {
        if self.k() != 2 {
            return Err(Error::Mismatch(format!(
                "polygon target needs arity 2, set has {}",
                self.k()
            )));
        }
        let scale = Rat::from_integer(big_pow(self.base, self.depth));
        let scaled = poly.scale(&scale);
        // Grid rows are indexed by the first coordinate, so walk the polygon
        // with its axes swapped and stream one row of cover bits at a time.
        let swapped = ConvexPolygon::from_points(
            scaled
                .verts()
                .iter()
                .map(|p| crate::geometry::point2(p.y.clone(), p.x.clone()))
                .collect(),
        );
        let origin = self.grid.origin();
        let side = self.grid.side() as i64;
        let words = self.grid.row_words();
        let mut cov = vec![0u64; words];
        for (i, j0, j1) in swapped.row_ranges(caps)? {
            cov.iter_mut().for_each(|w| *w = 0);
            for row_c in [i, i + 1] {
                if row_c < origin || row_c >= origin + side {
                    continue;
                }
                let slice = self.grid.row_slice((row_c - origin) as usize);
                for (dst, src) in cov.iter_mut().zip(slice) {
                    *dst |= *src;
                }
            }
            // Cell (i, j) is covered iff some occupied cell lies in
            // (i, j) + {0,1}^2, i.e. bit j or j + 1 of the OR of both rows.
            let bit = |j: i64| -> bool {
                let idx = j - origin;
                idx >= 0 && idx < side && cov[(idx as usize) >> 6] >> (idx as usize & 63) & 1 == 1
            };
            for j in j0..=j1 {
                if !(bit(j) || bit(j + 1)) {
                    return Ok(Some((i, j)));
                }
            }
        }
        Ok(None)
    }

    /// Run-length text: header `k base depth origin side`, then one line per
    /// nonempty row: leading coordinates, `:`, inclusive runs `a..b`.
    pub fn to_runs_text(&self) -> String {
        let mut s = format!(
            "{} {} {} {} {}\n",
            self.k(),
            self.base,
            self.depth,
            self.grid.origin(),
            self.grid.side()
        );
        for r in 0..self.grid.rows() {
            let slice = self.grid.row_slice(r);
            if slice.iter().all(|&w| w == 0) {
                continue;
            }
            let mut row = BitRow::new(self.grid.origin(), self.grid.side());
            for (w, &word) in slice.iter().enumerate() {
                let mut word = word;
                while word != 0 {
                    let b = word.trailing_zeros() as usize;
                    row.set(self.grid.origin() + (w * 64 + b) as i64);
                    word &= word - 1;
                }
            }
            for c in self.grid.row_coords(r) {
                let _ = write!(s, "{c} ");
            }
            s.push(':');
            for (a, b) in row.runs() {
                let _ = write!(s, " {a}..{b}");
            }
            s.push('\n');
        }
        s
    }

    /// Plain occupied-cell list for small instances.
    pub fn to_cells_text(&self, caps: &Caps) -> Result<String> {
        if self.count() > caps.max_enum as u128 {
            return Err(Error::cap("cell list", self.count(), caps.max_enum as u128));
        }
        let mut s = String::new();
        for c in self.grid.ones() {
            for (i, v) in c.iter().enumerate() {
                if i > 0 {
                    s.push(' ');
                }
                let _ = write!(s, "{v}");
            }
            s.push('\n');
        }
        Ok(s)
    }
}

/// `M - A` over the value runs of `A`: each run `[p, q]` contributes
/// `dilate(M, q - p) - q`, with dilations cached per distinct run length.
fn diff_row(m: &BitRow, runs_a: &[(i64, i64)], lo: i64, len: usize) -> BitRow {
    let mut acc = BitRow::new(lo, len);
    let mut cache: BTreeMap<i64, BitRow> = BTreeMap::new();
    for &(p, q) in runs_a {
        let dil = cache
            .entry(q - p)
            .or_insert_with(|| m.dilate_up((q - p) as u64));
        acc.or_shifted(dil, -q);
    }
    acc
}

use num_traits::One;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cellgrid::Mode;
    use crate::scalar::{rat, rat_int};
    use crate::IFSystem;
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

    fn unit() -> IntervalUnion<Rat> {
        iv(&[(0, 1, 1, 1)])
    }

    fn cells(base: u32, depth: u32, idx: &[i64]) -> CellSet {
        CellSet::from_cells(1, base, depth, Mode::Outer, idx.iter().map(|&c| [c, 0, 0]).collect())
            .unwrap()
    }

    #[test]
    fn interval_sum_examples() {
        let caps = Caps::default();
        let sum = minkowski_sum(&unit(), &unit(), &caps).unwrap();
        assert_eq!(sum.intervals(), &[(rat_int(0), rat_int(2))]);

        let stage = iv(&[(0, 1, 1, 3), (2, 3, 1, 1)]);
        let sum = minkowski_sum(&stage, &stage, &caps).unwrap();
        assert_eq!(sum.intervals(), &[(rat_int(0), rat_int(2))]);
    }

    #[test]
    fn kfold_and_admissibility_examples() {
        let caps = Caps::default();
        let thirds = IFSystem::digit_cantor(3, &[0, 2]).unwrap();
        for m in 0..=6 {
            let km = thirds.approximant_intervals(None, m, &caps).unwrap();
            assert_eq!(kfold_sum(&km, 1, &caps).unwrap(), km);
            let two = kfold_sum(&km, 2, &caps).unwrap();
            assert!(two.covers(&iv(&[(0, 1, 2, 1)])), "2-fold at depth {m}");
        }
        let quarters = IFSystem::digit_cantor(4, &[0, 3]).unwrap();
        for m in 0..=6 {
            let km = quarters.approximant_intervals(None, m, &caps).unwrap();
            let three = kfold_sum(&km, 3, &caps).unwrap();
            assert!(three.covers(&iv(&[(0, 1, 3, 1)])), "3-fold at depth {m}");
        }
    }

    #[test]
    fn signed_sum_examples() {
        let caps = Caps::default();
        let signs = parse_signs("+-").unwrap();
        let diff = signed_sum(&unit(), &signs, &caps).unwrap();
        assert_eq!(diff.intervals(), &[(rat_int(-1), rat_int(1))]);

        let thirds = IFSystem::digit_cantor(3, &[0, 2]).unwrap();
        let target = iv(&[(-1, 1, 1, 1)]);
        for m in 0..=8 {
            let km = thirds.approximant_intervals(None, m, &caps).unwrap();
            let diff = signed_sum(&km, &signs, &caps).unwrap();
            // The attractor's difference set is the full interval, and the
            // approximants stay inside [0,1], so equality is exact.
            assert_eq!(diff.hull(), target);
            assert!(diff.covers(&target), "difference at depth {m}");
        }
        assert!(parse_signs("-+").is_err());
        assert!(parse_signs("+").is_err());
        assert!(parse_signs("+*").is_err());
    }

    #[test]
    fn cell_sum_identity_and_modes() {
        let caps = Caps::default();
        let e = cells(3, 2, &[0, 2, 6, 8]);
        let zero = cells(3, 2, &[0]);
        let sum = cell_minkowski_sum(&zero, &e, &caps).unwrap();
        assert_eq!(sum.cells_vec(), e.cells_vec());

        let other = CellSet::from_cells(1, 3, 1, Mode::Outer, vec![[0, 0, 0]]).unwrap();
        assert!(cell_minkowski_sum(&e, &other, &caps).is_err());
    }

    #[test]
    fn cell_fatten_recovers_exact_box_sum() {
        let caps = Caps::default();
        // Boxes [0,1] and [2,3] at unit step: the 2-fold box sum is
        // [0,2] u [2,4] u [4,6] = [0,6], i.e. cells 0..5.
        let a = cells(2, 0, &[0, 2]);
        let idx = cell_kfold_sum(&a, 2, &caps).unwrap();
        assert_eq!(
            idx.cells_vec().iter().map(|c| c[0]).collect::<Vec<_>>(),
            vec![0, 2, 4]
        );
        let fat = cell_fatten_up(&idx, 1, &caps).unwrap();
        assert_eq!(
            fat.cells_vec().iter().map(|c| c[0]).collect::<Vec<_>>(),
            vec![0, 1, 2, 3, 4, 5]
        );
    }

    #[test]
    fn diff_vectors_small_oracle() {
        let caps = Caps::default();
        let a = cells(2, 1, &[0, 1]);
        let dv = DiffVectorSet::compute(&a, 2, &caps).unwrap();
        let mut got: Vec<(i64, i64)> = dv
            .grid()
            .ones()
            .iter()
            .map(|c| (c[0], c[1]))
            .collect();
        got.sort();
        let expected = vec![
            (-1, -1),
            (-1, 0),
            (0, -1),
            (0, 0),
            (0, 1),
            (1, 0),
            (1, 1),
        ];
        assert_eq!(got, expected);
    }

    fn brute_diff(idx: &[i64], k: usize) -> BTreeSet<Vec<i64>> {
        let mut out = BTreeSet::new();
        let mut tuple = vec![0usize; k + 1];
        loop {
            out.insert((1..=k).map(|l| idx[tuple[0]] - idx[tuple[l]]).collect());
            let mut pos = 0;
            loop {
                tuple[pos] += 1;
                if tuple[pos] < idx.len() {
                    break;
                }
                tuple[pos] = 0;
                pos += 1;
                if pos > k {
                    return out;
                }
            }
        }
    }

    #[test]
    fn kernel_matches_brute_force_and_projects_to_difference() {
        let caps = Caps::default();
        let sets: Vec<Vec<i64>> = vec![
            vec![0, 1],
            vec![0, 2, 3],
            vec![-3, 0, 4, 5],
            vec![0, 1, 2, 5, 9],
        ];
        for idx in &sets {
            let a = cells(2, 1, idx);
            for k in 1..=3usize {
                let dv = DiffVectorSet::compute(&a, k, &caps).unwrap();
                let got: BTreeSet<Vec<i64>> = dv.grid().ones().into_iter().collect();
                assert_eq!(got, brute_diff(idx, k), "idx={idx:?} k={k}");
                // Every axis projection is the rasterized K - K.
                let d1 = DiffVectorSet::compute(&a, 1, &caps).unwrap();
                let expect = d1.projection(0).runs();
                for axis in 0..k {
                    assert_eq!(dv.projection(axis).runs(), expect, "axis {axis}");
                }
            }
        }
    }

    #[test]
    fn dilated_count_matches_cover_oracle() {
        let caps = Caps::default();
        let idx = vec![0i64, 2, 3, 7];
        let a = cells(2, 1, &idx);
        for k in 1..=3usize {
            let dv = DiffVectorSet::compute(&a, k, &caps).unwrap();
            let mut cover: BTreeSet<Vec<i64>> = BTreeSet::new();
            for t in dv.grid().ones() {
                for mask in 0u32..(1 << k) {
                    let shifted: Vec<i64> = t
                        .iter()
                        .enumerate()
                        .map(|(i, &v)| v - ((mask >> i) & 1) as i64)
                        .collect();
                    cover.insert(shifted);
                }
            }
            assert_eq!(dv.dilated_count(), cover.len() as u128, "k={k}");
            for c in &cover {
                assert!(dv.covered(c));
            }
        }
    }

    #[test]
    fn interval_containment_in_difference_cover() {
        let caps = Caps::default();
        let thirds = IFSystem::digit_cantor(3, &[0, 2]).unwrap();
        let k3 = thirds.approximant_intervals(None, 3, &caps).unwrap();
        let raster = CellSet::from_intervals(&k3, 3, 3, Mode::Outer).unwrap();
        let dv = DiffVectorSet::compute(&raster, 1, &caps).unwrap();
        assert_eq!(dv.contains_interval(&rat_int(-1), &rat_int(1)).unwrap(), None);
        let miss = dv
            .contains_interval(&rat_int(-1), &rat(28, 27))
            .unwrap();
        assert_eq!(miss, Some(27));
    }

    #[test]
    fn polygon_containment_in_difference_cover() {
        use crate::geometry::point2;
        let caps = Caps::default();
        let a = cells(2, 1, &[0, 1]);
        let dv = DiffVectorSet::compute(&a, 2, &caps).unwrap();
        // In set units the grid step is 1/2; this square spans cells
        // [-1,0]^2, all inside the cover of the 7-point trace.
        let sq = ConvexPolygon::from_points(vec![
            point2(rat(-1, 2), rat(-1, 2)),
            point2(rat(1, 2), rat(-1, 2)),
            point2(rat(1, 2), rat(1, 2)),
            point2(rat(-1, 2), rat(1, 2)),
        ]);
        assert_eq!(dv.contains_polygon(&sq, &caps).unwrap(), None);
        let big = ConvexPolygon::from_points(vec![
            point2(rat_int(-2), rat_int(-2)),
            point2(rat_int(2), rat_int(-2)),
            point2(rat_int(2), rat_int(2)),
            point2(rat_int(-2), rat_int(2)),
        ]);
        assert!(dv.contains_polygon(&big, &caps).unwrap().is_some());
    }

    #[test]
    fn runs_text_export() {
        let caps = Caps::default();
        let a = cells(2, 1, &[0, 1]);
        let dv = DiffVectorSet::compute(&a, 2, &caps).unwrap();
        let text = dv.to_runs_text();
        assert!(text.starts_with("2 2 1 -2 4\n"));
        assert!(text.contains("-1 : -1..0"));
        assert!(text.contains("0 : -1..1"));
        assert!(text.contains("1 : 0..1"));
        let list = dv.to_cells_text(&caps).unwrap();
        assert_eq!(list.lines().count(), 7);
    }

    proptest! {
        #[test]
        fn interval_sum_commutes_and_associates(
            xs in proptest::collection::vec((-20i64..20, 0i64..8), 1..4),
            ys in proptest::collection::vec((-20i64..20, 0i64..8), 1..4),
            zs in proptest::collection::vec((-20i64..20, 0i64..8), 1..4),
        ) {
            let caps = Caps::default();
            let mk = |v: &Vec<(i64, i64)>| {
                IntervalUnion::new(
                    v.iter().map(|&(a, l)| (rat(a, 3), rat(a + l, 3))).collect(),
                ).unwrap()
            };
            let (a, b, c) = (mk(&xs), mk(&ys), mk(&zs));
            let ab = minkowski_sum(&a, &b, &caps).unwrap();
            let ba = minkowski_sum(&b, &a, &caps).unwrap();
            prop_assert_eq!(&ab, &ba);
            let ab_c = minkowski_sum(&ab, &c, &caps).unwrap();
            let bc = minkowski_sum(&b, &c, &caps).unwrap();
            let a_bc = minkowski_sum(&a, &bc, &caps).unwrap();
            prop_assert_eq!(&ab_c, &a_bc);
            // Sum measure dominates both summands' measures.
            prop_assert!(ab.measure() >= a.measure().max(b.measure()));
        }

        #[test]
        fn difference_contains_zero_and_is_symmetric(
            xs in proptest::collection::vec((-20i64..20, 0i64..8), 1..5),
        ) {
            let caps = Caps::default();
            let a = IntervalUnion::new(
                xs.iter().map(|&(p, l)| (rat(p, 5), rat(p + l, 5))).collect(),
            ).unwrap();
            let d = signed_sum(&a, &parse_signs("+-").unwrap(), &caps).unwrap();
            prop_assert!(d.contains_point(&rat_int(0)));
            prop_assert_eq!(d.reflect(), d.clone());
        }

        #[test]
        fn cell_sum_matches_pointwise_oracle(
            am in 1u64..4096, bm in 1u64..4096,
        ) {
            let caps = Caps::default();
            let unpack = |m: u64| -> Vec<i64> {
                (0..12).filter(|i| m >> i & 1 == 1).map(|i| i as i64 - 6).collect()
            };
            let (ai, bi) = (unpack(am), unpack(bm));
            prop_assume!(!ai.is_empty() && !bi.is_empty());
            let sum = cell_minkowski_sum(&cells(2, 1, &ai), &cells(2, 1, &bi), &caps).unwrap();
            let mut expect: Vec<i64> = ai
                .iter()
                .flat_map(|x| bi.iter().map(move |y| x + y))
                .collect();
            expect.sort();
            expect.dedup();
            let got: Vec<i64> = sum.cells_vec().iter().map(|c| c[0]).collect();
            prop_assert_eq!(got, expect);
        }

        #[test]
        fn kernel_permutation_symmetry(mask in 1u64..65536) {
            let caps = Caps::default();
            let idx: Vec<i64> = (0..16).filter(|i| mask >> i & 1 == 1).map(|i| i as i64).collect();
            let a = cells(2, 1, &idx);
            let dv = DiffVectorSet::compute(&a, 2, &caps).unwrap();
            for x in -17i64..17 {
                for y in -17i64..17 {
                    prop_assert_eq!(dv.occupied(&[x, y]), dv.occupied(&[y, x]));
                }
            }
        }
    }
}
