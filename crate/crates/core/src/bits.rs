//! Dense bit rows and grids over integer coordinates.
//!
//! A [`BitRow`] is a window of the integer line: bit `i` stands for the
//! integer `origin + i`. All set algebra used by the sumset kernels (shifted
//! AND/OR, run extraction, upward dilation) works word-parallel on `u64`
//! words. A [`BitGrid`] stacks rows into a k-dimensional occupancy grid,
//! k <= 3, with the same origin on every axis.

/// Word window of the shifted sequence `S[i] = B[i - t]` at word `w`.
/// Out-of-range bits of `B` read as zero.
fn shifted_word(words: &[u64], t: i64, w: usize) -> u64 {
    let start = (w as i64) * 64 - t;
    let q = start.div_euclid(64);
    let r = start.rem_euclid(64) as u32;
    let at = |q: i64| -> u64 {
        if q < 0 || q as usize >= words.len() {
            0
        } else {
            words[q as usize]
        }
    };
    if r == 0 {
        at(q)
    } else {
        (at(q) >> r) | (at(q + 1) << (64 - r))
    }
}

/// Fixed-width window of the integer line with dense occupancy bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitRow {
    origin: i64,
    nbits: usize,
    words: Vec<u64>,
}

impl BitRow {
    pub fn new(origin: i64, nbits: usize) -> Self {
        BitRow {
            origin,
            nbits,
            words: vec![0; nbits.div_ceil(64)],
        }
    }

    /// Builds a row spanning exactly the given inclusive value runs.
    pub fn from_runs(runs: &[(i64, i64)]) -> Self {
        if runs.is_empty() {
            return BitRow::new(0, 0);
        }
        let lo = runs.iter().map(|r| r.0).min().unwrap();
        let hi = runs.iter().map(|r| r.1).max().unwrap();
        let mut row = BitRow::new(lo, (hi - lo + 1) as usize);
        for &(a, b) in runs {
            row.set_range(a, b);
        }
        row
    }

    pub fn origin(&self) -> i64 {
        self.origin
    }

    pub fn nbits(&self) -> usize {
        self.nbits
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn get(&self, value: i64) -> bool {
        let i = value - self.origin;
        if i < 0 || i as usize >= self.nbits {
            return false;
        }
        let i = i as usize;
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, value: i64) {
        let i = value - self.origin;
        assert!(i >= 0 && (i as usize) < self.nbits, "bit out of window");
        let i = i as usize;
        self.words[i / 64] |= 1 << (i % 64);
    }

    /// Sets the inclusive value range `[a, b]`.
    pub fn set_range(&mut self, a: i64, b: i64) {
        debug_assert!(a <= b);
        let lo = (a - self.origin) as usize;
        let hi = (b - self.origin) as usize;
        assert!((a - self.origin) >= 0 && hi < self.nbits, "run out of window");
        let (wl, bl) = (lo / 64, lo % 64);
        let (wh, bh) = (hi / 64, hi % 64);
        if wl == wh {
            let mask = (u64::MAX << bl) & (u64::MAX >> (63 - bh));
            self.words[wl] |= mask;
        } else {
            self.words[wl] |= u64::MAX << bl;
            for w in wl + 1..wh {
                self.words[w] = u64::MAX;
            }
            self.words[wh] |= u64::MAX >> (63 - bh);
        }
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn min_one(&self) -> Option<i64> {
        for (w, &word) in self.words.iter().enumerate() {
            if word != 0 {
                return Some(self.origin + (w * 64 + word.trailing_zeros() as usize) as i64);
            }
        }
        None
    }

    pub fn max_one(&self) -> Option<i64> {
        for (w, &word) in self.words.iter().enumerate().rev() {
            if word != 0 {
                return Some(self.origin + (w * 64 + 63 - word.leading_zeros() as usize) as i64);
            }
        }
        None
    }

    /// Maximal inclusive runs of set bits, in value coordinates.
    pub fn runs(&self) -> Vec<(i64, i64)> {
        let mut out = Vec::new();
        let mut start: Option<i64> = None;
        for i in 0..self.nbits {
            let bit = self.words[i / 64] >> (i % 64) & 1 == 1;
            match (bit, start) {
                (true, None) => start = Some(self.origin + i as i64),
                (false, Some(s)) => {
                    out.push((s, self.origin + i as i64 - 1));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            out.push((s, self.origin + self.nbits as i64 - 1));
        }
        out
    }

    /// `self |= other + shift` (value-space translation of `other`).
    pub fn or_shifted(&mut self, other: &BitRow, shift: i64) {
        let t = shift + other.origin - self.origin;
        for w in 0..self.words.len() {
            self.words[w] |= shifted_word(&other.words, t, w);
        }
        self.mask_tail();
    }

    /// `a AND (b + shift)` laid out on `a`'s window.
    pub fn and_shifted(&self, b: &BitRow, shift: i64) -> BitRow {
        let t = shift + b.origin - self.origin;
        let mut out = BitRow::new(self.origin, self.nbits);
        for w in 0..self.words.len() {
            out.words[w] = self.words[w] & shifted_word(&b.words, t, w);
        }
        out
    }

    /// Whether `self AND (b + shift)` is nonempty, with early exit.
    pub fn intersects_shifted(&self, b: &BitRow, shift: i64) -> bool {
        let t = shift + b.origin - self.origin;
        for w in 0..self.words.len() {
            if self.words[w] & shifted_word(&b.words, t, w) != 0 {
                return true;
            }
        }
        false
    }

    /// Upward smear: the union of `self + s` for `s = 0..=len`, widened so
    /// nothing is lost at the high end. Doubling shifts, O(words * log len).
    pub fn dilate_up(&self, len: u64) -> BitRow {
        let mut out = BitRow::new(self.origin, self.nbits + len as usize);
        out.or_shifted(self, 0);
        let mut covered: u64 = 1;
        while covered < len + 1 {
            let sh = covered.min(len + 1 - covered);
            let snapshot = out.clone();
            out.or_shifted(&snapshot, sh as i64);
            covered += sh;
        }
        out
    }

    /// Mirror through zero: value v becomes -v.
    pub fn reflect(&self) -> BitRow {
        let mut out = BitRow::new(-(self.origin + self.nbits as i64 - 1), self.nbits);
        for (a, b) in self.runs() {
            out.set_range(-b, -a);
        }
        out
    }

    fn mask_tail(&mut self) {
        let extra = self.words.len() * 64 - self.nbits;
        if extra > 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= u64::MAX >> extra;
            }
        }
    }
}

/// Dense k-dimensional occupancy grid, 1 <= k <= 3, cubical window
/// `[origin, origin + side)` on every axis. Row-major over the leading
/// axes; the last axis is the bit direction.
#[derive(Debug, Clone)]
pub struct BitGrid {
    k: usize,
    side: usize,
    origin: i64,
    row_words: usize,
    bits: Vec<u64>,
}

impl BitGrid {
    pub fn new(k: usize, side: usize, origin: i64) -> Self {
        assert!((1..=3).contains(&k));
        let row_words = side.div_ceil(64);
        let rows = side.pow(k as u32 - 1);
        BitGrid {
            k,
            side,
            origin,
            row_words,
            bits: vec![0; rows * row_words],
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn origin(&self) -> i64 {
        self.origin
    }

    pub fn rows(&self) -> usize {
        self.side.pow(self.k as u32 - 1)
    }

    pub fn row_words(&self) -> usize {
        self.row_words
    }

    /// Leading-axis coordinates of a row index (length k-1).
    pub fn row_coords(&self, row: usize) -> Vec<i64> {
        match self.k {
            1 => vec![],
            2 => vec![self.origin + row as i64],
            _ => vec![
                self.origin + (row / self.side) as i64,
                self.origin + (row % self.side) as i64,
            ],
        }
    }

    pub fn row_index(&self, lead: &[i64]) -> Option<usize> {
        debug_assert_eq!(lead.len(), self.k - 1);
        let mut row = 0usize;
        for &c in lead {
            let i = c - self.origin;
            if i < 0 || i as usize >= self.side {
                return None;
            }
            row = row * self.side + i as usize;
        }
        Some(row)
    }

    pub fn row_slice(&self, row: usize) -> &[u64] {
        &self.bits[row * self.row_words..(row + 1) * self.row_words]
    }

    /// Copies a computed row (laid out at this grid's origin) into place.
    pub fn store_row(dst: &mut [u64], row: &BitRow, origin: i64, row_words: usize) {
        debug_assert_eq!(dst.len(), row_words);
        let t = row.origin - origin;
        for (w, slot) in dst.iter_mut().enumerate() {
            *slot = shifted_word(&row.words, t, w);
        }
    }

    /// Mutable whole-bit buffer in row order, for parallel fills.
    pub fn rows_mut(&mut self) -> (&mut [u64], usize) {
        (&mut self.bits, self.row_words)
    }

    pub fn occupied(&self, c: &[i64]) -> bool {
        debug_assert_eq!(c.len(), self.k);
        let row = match self.row_index(&c[..self.k - 1]) {
            Some(r) => r,
            None => return false,
        };
        let i = c[self.k - 1] - self.origin;
        if i < 0 || i as usize >= self.side {
            return false;
        }
        let i = i as usize;
        self.row_slice(row)[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn count_ones(&self) -> u128 {
        self.bits.iter().map(|w| w.count_ones() as u128).sum()
    }

    /// Count of the union of the grid with its translates by -1 along every
    /// subset of axes (the closed-box difference cover). The window must have
    /// a free margin at the low side, which the kernel allocates.
    pub fn dilated_count(&self) -> u128 {
        let or_rows = |a: &[u64], b: &[u64], out: &mut Vec<u64>| {
            out.clear();
            out.extend(a.iter().zip(b).map(|(x, y)| x | y));
        };
        // Within a row: bit i OR bit i+1 (translate by -1 on the last axis).
        let smear = |src: &[u64], out: &mut Vec<u64>| {
            out.clear();
            for w in 0..src.len() {
                let next = if w + 1 < src.len() { src[w + 1] } else { 0 };
                out.push(src[w] | (src[w] >> 1) | (next << 63));
            }
        };
        let rows = self.rows();
        let mut total: u128 = 0;
        let mut cur = Vec::new();
        let mut nxt = Vec::new();
        let mut tmp = Vec::new();
        match self.k {
            1 => {
                smear(self.row_slice(0), &mut cur);
                total = cur.iter().map(|w| w.count_ones() as u128).sum();
            }
            2 => {
                for r in 0..rows {
                    smear(self.row_slice(r), &mut cur);
                    if r + 1 < rows {
                        smear(self.row_slice(r + 1), &mut nxt);
                    } else {
                        nxt.clear();
                        nxt.resize(self.row_words, 0);
                    }
                    or_rows(&cur, &nxt, &mut tmp);
                    total += tmp.iter().map(|w| w.count_ones() as u128).sum::<u128>();
                }
            }
            _ => {
                // Axis order (a, b, last): union over row translates
                // (a, b), (a+1, b), (a, b+1), (a+1, b+1), then smear.
                let s = self.side;
                let mut merged = Vec::new();
                for a in 0..s {
                    for b in 0..s {
                        let mut acc = self.row_slice(a * s + b).to_vec();
                        let mut fold = |row: usize| {
                            for (x, y) in acc.iter_mut().zip(self.row_slice(row)) {
                                *x |= y;
                            }
                        };
                        if a + 1 < s {
                            fold((a + 1) * s + b);
                        }
                        if b + 1 < s {
                            fold(a * s + b + 1);
                        }
                        if a + 1 < s && b + 1 < s {
                            fold((a + 1) * s + b + 1);
                        }
                        smear(&acc, &mut merged);
                        total += merged.iter().map(|w| w.count_ones() as u128).sum::<u128>();
                    }
                }
            }
        }
        total
    }

    /// Projection onto one axis: occupied coordinates ignoring the others.
    pub fn projection(&self, axis: usize) -> BitRow {
        assert!(axis < self.k);
        let mut out = BitRow::new(self.origin, self.side);
        if axis == self.k - 1 {
            for r in 0..self.rows() {
                let slice = self.row_slice(r);
                for (w, &word) in slice.iter().enumerate() {
                    let mut word = word;
                    while word != 0 {
                        let b = word.trailing_zeros() as usize;
                        out.set(self.origin + (w * 64 + b) as i64);
                        word &= word - 1;
                    }
                }
            }
        } else {
            for r in 0..self.rows() {
                if self.row_slice(r).iter().any(|&w| w != 0) {
                    let c = self.row_coords(r)[axis];
                    out.set(c);
                }
            }
        }
        out
    }

    /// All occupied coordinates; intended for small grids.
    pub fn ones(&self) -> Vec<Vec<i64>> {
        let mut out = Vec::new();
        for r in 0..self.rows() {
            let lead = self.row_coords(r);
            let slice = self.row_slice(r);
            for (w, &word) in slice.iter().enumerate() {
                let mut word = word;
                while word != 0 {
                    let b = word.trailing_zeros() as usize;
                    let mut c = lead.clone();
                    c.push(self.origin + (w * 64 + b) as i64);
                    out.push(c);
                    word &= word - 1;
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive_and_shift(a: &BitRow, b: &BitRow, shift: i64) -> Vec<i64> {
        let mut v = Vec::new();
        for i in 0..a.nbits() {
            let val = a.origin() + i as i64;
            if a.get(val) && b.get(val - shift) {
                v.push(val);
            }
        }
        v
    }

    #[test]
    fn runs_round_trip() {
        let row = BitRow::from_runs(&[(-5, -3), (0, 0), (7, 20)]);
        assert_eq!(row.runs(), vec![(-5, -3), (0, 0), (7, 20)]);
        assert_eq!(row.count_ones(), 3 + 1 + 14);
        assert_eq!(row.min_one(), Some(-5));
        assert_eq!(row.max_one(), Some(20));
    }

    #[test]
    fn shifted_and_matches_naive() {
        let a = BitRow::from_runs(&[(0, 10), (20, 25)]);
        let b = BitRow::from_runs(&[(-4, 2), (8, 9)]);
        for shift in -30..30 {
            let fast: Vec<i64> = a
                .and_shifted(&b, shift)
                .runs()
                .iter()
                .flat_map(|&(x, y)| x..=y)
                .collect();
            assert_eq!(fast, naive_and_shift(&a, &b, shift), "shift {shift}");
            assert_eq!(
                a.intersects_shifted(&b, shift),
                !naive_and_shift(&a, &b, shift).is_empty()
            );
        }
    }

    #[test]
    fn dilate_up_covers_exact_window() {
        let row = BitRow::from_runs(&[(3, 3), (10, 11)]);
        for len in [0u64, 1, 2, 5, 13] {
            let d = row.dilate_up(len);
            let mut expect = vec![];
            for v in 0..40 {
                let hit = (0..=len as i64).any(|s| row.get(v - s));
                if hit {
                    expect.push(v);
                }
            }
            let got: Vec<i64> = d.runs().iter().flat_map(|&(x, y)| x..=y).collect();
            assert_eq!(got, expect, "len {len}");
        }
    }

    #[test]
    fn reflect_negates_values() {
        let row = BitRow::from_runs(&[(2, 4), (9, 9)]);
        let r = row.reflect();
        assert_eq!(r.runs(), vec![(-9, -9), (-4, -2)]);
        assert_eq!(r.reflect().runs(), row.runs());
    }

    #[test]
    fn grid_roundtrip_and_projection() {
        let mut g = BitGrid::new(2, 8, -3);
        let (bits, rw) = g.rows_mut();
        let row = BitRow::from_runs(&[(-2, -1), (3, 3)]);
        BitGrid::store_row(&mut bits[2 * rw..3 * rw], &row, -3, rw);
        assert!(g.occupied(&[-1, -2]));
        assert!(g.occupied(&[-1, 3]));
        assert!(!g.occupied(&[-1, 0]));
        assert_eq!(g.count_ones(), 3);
        assert_eq!(g.projection(0).runs(), vec![(-1, -1)]);
        assert_eq!(g.projection(1).runs(), vec![(-2, -1), (3, 3)]);
        let ones = g.ones();
        assert_eq!(ones, vec![vec![-1, -2], vec![-1, -1], vec![-1, 3]]);
    }

    #[test]
    fn dilated_count_matches_naive_union() {
        let mut g = BitGrid::new(2, 6, 0);
        {
            let (bits, rw) = g.rows_mut();
            let row = BitRow::from_runs(&[(1, 2), (4, 4)]);
            BitGrid::store_row(&mut bits[1 * rw..2 * rw], &row, 0, rw);
            let row2 = BitRow::from_runs(&[(5, 5)]);
            BitGrid::store_row(&mut bits[4 * rw..5 * rw], &row2, 0, rw);
        }
        let mut naive = std::collections::BTreeSet::new();
        for c in g.ones() {
            for da in [0i64, -1] {
                for db in [0i64, -1] {
                    naive.insert((c[0] + da, c[1] + db));
                }
            }
        }
        assert_eq!(g.dilated_count(), naive.len() as u128);
    }

    proptest! {
        #[test]
        fn or_shifted_matches_union(
            runs_a in proptest::collection::vec((-40i64..40, 0i64..6), 1..5),
            runs_b in proptest::collection::vec((-40i64..40, 0i64..6), 1..5),
            shift in -20i64..20,
        ) {
            let a = BitRow::from_runs(&runs_a.iter().map(|&(s, l)| (s, s + l)).collect::<Vec<_>>());
            let b = BitRow::from_runs(&runs_b.iter().map(|&(s, l)| (s, s + l)).collect::<Vec<_>>());
            let mut wide = BitRow::new(-80, 200);
            wide.or_shifted(&a, 0);
            wide.or_shifted(&b, shift);
            for v in -80..120 {
                let expect = a.get(v) || b.get(v - shift);
                prop_assert_eq!(wide.get(v), expect);
            }
        }
    }
}
