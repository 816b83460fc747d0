//! Uniform-grid bucketing for point clouds under metrics that dominate the
//! per-coordinate differences of a few "index coordinates".
//!
//! If `d(p, q) >= |p_i - q_i|` (circle difference for periodic coordinates)
//! for every index coordinate `i`, then every point within `d`-distance `ρ`
//! of a query lies in a cell at most `ceil(ρ / cell)` steps away along each
//! index axis.

use std::collections::HashMap;

use smallvec::SmallVec;

type Key = SmallVec<[i64; 6]>;

#[derive(Debug, Clone)]
pub(crate) struct GridIndex {
    periodic: Vec<bool>,
    /// Cells per unit period for periodic axes.
    per_period: Vec<i64>,
    cell: Vec<f64>,
    map: HashMap<Key, Vec<u32>>,
    lo: Vec<i64>,
    hi: Vec<i64>,
    len: usize,
}

impl GridIndex {
    pub(crate) fn new(periodic: Vec<bool>, cell: f64) -> GridIndex {
        assert!(cell > 0.0 && cell.is_finite());
        let per_period: Vec<i64> = periodic
            .iter()
            .map(|&p| if p { ((1.0 / cell).floor() as i64).max(1) } else { 0 })
            .collect();
        let cells = periodic
            .iter()
            .zip(&per_period)
            .map(|(&p, &m)| if p { 1.0 / m as f64 } else { cell })
            .collect();
        let dims = periodic.len();
        GridIndex {
            periodic,
            per_period,
            cell: cells,
            map: HashMap::new(),
            lo: vec![i64::MAX; dims],
            hi: vec![i64::MIN; dims],
            len: 0,
        }
    }

    #[cfg(test)]
    pub(crate) fn len(&self) -> usize {
        self.len
    }

    /// Smallest cell side; a lower bound for ring distances.
    fn min_cell(&self) -> f64 {
        self.cell.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn key(&self, q: &[f64]) -> Key {
        q.iter()
            .enumerate()
            .map(|(i, &v)| {
                let c = (v / self.cell[i]).floor() as i64;
                if self.periodic[i] {
                    c.rem_euclid(self.per_period[i])
                } else {
                    c
                }
            })
            .collect()
    }

    pub(crate) fn insert(&mut self, q: &[f64], id: u32) {
        debug_assert_eq!(q.len(), self.periodic.len());
        let k = self.key(q);
        for (i, &c) in k.iter().enumerate() {
            self.lo[i] = self.lo[i].min(c);
            self.hi[i] = self.hi[i].max(c);
        }
        self.map.entry(k).or_default().push(id);
        self.len += 1;
    }

    /// Cell offsets to visit along axis `i` for a half-width of `k` cells,
    /// or `None` when the whole (periodic) axis is covered.
    fn axis_range(&self, i: usize, k: i64) -> Option<(i64, i64)> {
        if self.periodic[i] && 2 * k + 1 >= self.per_period[i] {
            None
        } else {
            Some((-k, k))
        }
    }

    /// Calls `visit` for every id in cells whose Chebyshev offset from the
    /// query cell is in `[k_min, k_max]`. `visit` returns `false` to stop.
    fn visit_shell(&self, q: &[f64], k_min: i64, k_max: i64, visit: &mut impl FnMut(u32) -> bool) -> bool {
        let center = self.key(q);
        let dims = center.len();
        if dims == 0 {
            return true;
        }
        let ranges: Vec<(i64, i64, bool)> = (0..dims)
            .map(|i| match self.axis_range(i, k_max) {
                Some((a, b)) => (a, b, false),
                None => (0, self.per_period[i] - 1, true),
            })
            .collect();
        // (cell coordinate, Chebyshev offset contribution) for one axis offset
        let place = |i: usize, off: i64| -> (i64, i64) {
            if ranges[i].2 {
                let m = self.per_period[i];
                let d = (off - center[i]).rem_euclid(m);
                (off, d.min(m - d))
            } else {
                let c = center[i] + off;
                (if self.periodic[i] { c.rem_euclid(self.per_period[i]) } else { c }, off.abs())
            }
        };
        let mut off: Vec<i64> = ranges.iter().map(|r| r.0).collect();
        let mut key: Key = center.clone();
        loop {
            // the outer axes fix a line along axis 0
            let mut outer = 0;
            for i in 1..dims {
                let (c, d) = place(i, off[i]);
                key[i] = c;
                outer = outer.max(d);
            }
            let (lo, hi, full) = ranges[0];
            let mut a = lo;
            while a <= hi {
                let (c, d) = place(0, a);
                if outer.max(d) >= k_min {
                    key[0] = c;
                    if let Some(ids) = self.map.get(&key) {
                        for &id in ids {
                            if !visit(id) {
                                return false;
                            }
                        }
                    }
                    a += 1;
                } else if !full && a < 0 {
                    // skip the interior of the line
                    a = k_min.max(a + 1);
                } else {
                    a += 1;
                }
            }
            let mut i = 1;
            loop {
                if i >= dims {
                    return true;
                }
                off[i] += 1;
                if off[i] <= ranges[i].1 {
                    break;
                }
                off[i] = ranges[i].0;
                i += 1;
            }
        }
    }

    /// Visits every id that may lie within `radius` of `q`.
    pub(crate) fn for_each_candidate(&self, q: &[f64], radius: f64, mut visit: impl FnMut(u32) -> bool) {
        let k = self
            .cell
            .iter()
            .map(|c| (radius / c).ceil() as i64)
            .max()
            .unwrap_or(0)
            .max(0);
        let k = k.min(self.max_ring(q));
        if self.box_cells(k) > self.len as f64 {
            self.visit_all(&mut visit);
        } else {
            self.visit_shell(q, 0, k, &mut visit);
        }
    }

    /// Number of cells in the box of half-width `k`.
    fn box_cells(&self, k: i64) -> f64 {
        (0..self.periodic.len())
            .map(|i| match self.axis_range(i, k) {
                Some(_) => (2 * k + 1) as f64,
                None => self.per_period[i] as f64,
            })
            .product()
    }

    fn visit_all(&self, visit: &mut impl FnMut(u32) -> bool) {
        for ids in self.map.values() {
            for &id in ids {
                if !visit(id) {
                    return;
                }
            }
        }
    }

    /// Ring index beyond which no occupied cell exists.
    fn max_ring(&self, q: &[f64]) -> i64 {
        let c = self.key(q);
        let mut r = 0i64;
        for i in 0..c.len() {
            if self.lo[i] > self.hi[i] {
                return 0;
            }
            let d = if self.periodic[i] {
                self.per_period[i] / 2 + 1
            } else {
                (c[i] - self.lo[i]).abs().max((self.hi[i] - c[i]).abs())
            };
            r = r.max(d);
        }
        r
    }

    /// Nearest id under `dist`, or `None` when the index is empty.
    pub(crate) fn nearest(&self, q: &[f64], dist: impl FnMut(u32) -> f64) -> Option<(u32, f64)> {
        self.nearest_below(q, f64::INFINITY, dist)
    }

    /// Nearest id strictly closer than `cap`, if any.
    pub(crate) fn nearest_below(&self, q: &[f64], cap: f64, mut dist: impl FnMut(u32) -> f64) -> Option<(u32, f64)> {
        if self.len == 0 {
            return None;
        }
        let mut best: Option<(u32, f64)> = None;
        let limit = self.max_ring(q);
        let step = self.min_cell();
        let mut k = 0;
        loop {
            if self.box_cells(k) > 2.0 * self.len as f64 + 64.0 {
                // sparse occupancy: a linear scan is cheaper than more rings
                self.visit_all(&mut |id| {
                    let d = dist(id);
                    if best.map_or(true, |(bid, bd)| d < bd || (d == bd && id < bid)) {
                        best = Some((id, d));
                    }
                    true
                });
                return best.filter(|b| b.1 < cap);
            }
            self.visit_shell(q, k, k, &mut |id| {
                let d = dist(id);
                if best.map_or(true, |(bid, bd)| d < bd || (d == bd && id < bid)) {
                    best = Some((id, d));
                }
                true
            });
            if let Some((_, bd)) = best {
                // unvisited points differ by more than k cells in some axis
                if bd <= k as f64 * step {
                    return best.filter(|b| b.1 < cap);
                }
            }
            if k >= limit || k as f64 * step >= cap {
                return best.filter(|b| b.1 < cap);
            }
            k += 1;
        }
    }
}
