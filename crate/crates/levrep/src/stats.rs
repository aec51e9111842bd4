//! Counting estimators over ensembles of unfolded windows.
//!
//! Every estimator accumulates exact integer counts per member and merges
//! them by addition, so pooled results are bit-identical for any worker
//! count or member order; floating-point enters only in the final
//! normalization. The per-member `absorb` calls are pure; accumulators are
//! plain data and can be merged pairwise in any association.

use crate::spectra::UnfoldedWindow;
use crate::{Error, Result};

/// Consecutive differences of the window's levels. Gaps straddling a window
/// edge have only one endpoint inside and are never formed; fewer than two
/// levels produce an empty sequence.
pub fn nearest_spacings(window: &UnfoldedWindow) -> Vec<f64> {
    window.levels.windows(2).map(|p| p[1] - p[0]).collect()
}

/// Binned estimate of the spacing density p(s).
#[derive(Debug, Clone, PartialEq)]
pub struct SpacingHistogram {
    /// `n_bins + 1` strictly increasing edges covering `[0, s_max]`.
    pub bin_edges: Vec<f64>,
    /// Spacing count per bin.
    pub counts: Vec<u64>,
    /// All pooled spacings, including those beyond `s_max`; the density
    /// normalization uses this so that `sum(density * width)` equals the
    /// probability mass actually covered by the bins.
    pub total_spacings: u64,
    /// counts / (total_spacings * bin_width)
    pub density: Vec<f64>,
    /// Per-bin binomial standard error of the density. Across-member
    /// clustering is ignored (each member contributes ~window-width
    /// spacings), so treat this as a lower bound.
    pub stderr: Vec<f64>,
}

impl SpacingHistogram {
    pub fn bin_width(&self) -> f64 {
        self.bin_edges[1] - self.bin_edges[0]
    }

    /// Bin midpoints.
    pub fn mids(&self) -> Vec<f64> {
        self.bin_edges.windows(2).map(|e| 0.5 * (e[0] + e[1])).collect()
    }
}

/// Streaming accumulator behind [`spacing_histogram`].
#[derive(Debug, Clone)]
pub struct SpacingAccumulator {
    bin_width: f64,
    counts: Vec<u64>,
    total: u64,
}

impl SpacingAccumulator {
    pub fn new(bin_width: f64, s_max: f64) -> Result<Self> {
        if !(bin_width > 0.0) || !(s_max >= bin_width) {
            return Err(Error::Config(format!(
                "need bin_width > 0 and s_max >= bin_width; got {bin_width}, {s_max}"
            )));
        }
        let n_bins = (s_max / bin_width).round().max(1.0) as usize;
        Ok(Self {
            bin_width,
            counts: vec![0; n_bins],
            total: 0,
        })
    }

    pub fn absorb_spacing(&mut self, s: f64) {
        self.total += 1;
        let idx = (s / self.bin_width).floor();
        if idx >= 0.0 && (idx as usize) < self.counts.len() {
            self.counts[idx as usize] += 1;
        }
    }

    pub fn absorb_window(&mut self, window: &UnfoldedWindow) {
        for pair in window.levels.windows(2) {
            self.absorb_spacing(pair[1] - pair[0]);
        }
    }

    pub fn merge(&mut self, other: &Self) {
        debug_assert_eq!(self.counts.len(), other.counts.len());
        debug_assert_eq!(self.bin_width, other.bin_width);
        self.total += other.total;
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    pub fn finalize(&self) -> Result<SpacingHistogram> {
        if self.total == 0 {
            return Err(Error::Empty("no spacings to normalize"));
        }
        let n = self.total as f64;
        let w = self.bin_width;
        let mut density = Vec::with_capacity(self.counts.len());
        let mut stderr = Vec::with_capacity(self.counts.len());
        for &c in &self.counts {
            let p = c as f64 / n;
            density.push(p / w);
            stderr.push((p * (1.0 - p) / n).sqrt() / w);
        }
        let bin_edges = (0..=self.counts.len())
            .map(|i| i as f64 * w)
            .collect();
        Ok(SpacingHistogram {
            bin_edges,
            counts: self.counts.clone(),
            total_spacings: self.total,
            density,
            stderr,
        })
    }
}

/// Histogram of pooled spacings over `[0, s_max]`; spacings beyond `s_max`
/// enter the normalization but no bin. Empty input is an error.
pub fn spacing_histogram(spacings: &[f64], bin_width: f64, s_max: f64) -> Result<SpacingHistogram> {
    let mut acc = SpacingAccumulator::new(bin_width, s_max)?;
    for &s in spacings {
        acc.absorb_spacing(s);
    }
    acc.finalize()
}

/// Unbinned estimator of P(s) = (1/s) integral of p over [0, s]:
/// (fraction of spacings <= s) / s.
pub fn cumulative_p(spacings: &[f64], s: f64) -> Result<f64> {
    if spacings.is_empty() {
        return Err(Error::Empty("cumulative_p needs at least one spacing"));
    }
    if !(s > 0.0) {
        return Err(Error::Domain(format!("s must be > 0, got {s}")));
    }
    let below = spacings.iter().filter(|&&x| x <= s).count();
    Ok(below as f64 / spacings.len() as f64 / s)
}

/// Integer tally behind the unbinned P(s) estimator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CumulativeTally {
    pub below: u64,
    pub total: u64,
}

impl CumulativeTally {
    pub fn absorb_window(&mut self, s: f64, window: &UnfoldedWindow) {
        for pair in window.levels.windows(2) {
            self.total += 1;
            if pair[1] - pair[0] <= s {
                self.below += 1;
            }
        }
    }

    pub fn merge(&mut self, other: &Self) {
        self.below += other.below;
        self.total += other.total;
    }

    pub fn estimate(&self, s: f64) -> Result<f64> {
        if self.total == 0 {
            return Err(Error::Empty("cumulative_p needs at least one spacing"));
        }
        Ok(self.below as f64 / self.total as f64 / s)
    }

    /// Binomial standard error of [`Self::estimate`].
    pub fn stderr(&self, s: f64) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        let p = self.below as f64 / self.total as f64;
        (p * (1.0 - p) / self.total as f64).sqrt() / s
    }
}

/// Level number variance over a grid of interval widths.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceCurve {
    pub l_grid: Vec<f64>,
    pub sigma2: Vec<f64>,
    /// Normal-approximation standard error sigma2 * sqrt(2/(N-1)).
    pub stderr: Vec<f64>,
    pub member_count: u64,
}

/// Accumulates per-member counts in centered intervals `[eps - L/2, eps + L/2]`
/// as exact integer sums and sums of squares.
#[derive(Debug, Clone)]
pub struct VarianceAccumulator {
    l_grid: Vec<f64>,
    sum: Vec<u64>,
    sum_sq: Vec<u128>,
    members: u64,
}

impl VarianceAccumulator {
    /// Every interval must fit in the window: `L <= window_width`.
    pub fn new(l_grid: &[f64], window_width: f64) -> Result<Self> {
        if l_grid.is_empty() {
            return Err(Error::Config("empty L grid".into()));
        }
        for pair in l_grid.windows(2) {
            if !(pair[0] < pair[1]) {
                return Err(Error::Config("L grid must be strictly increasing".into()));
            }
        }
        if !(l_grid[0] > 0.0) {
            return Err(Error::Config("L grid must be positive".into()));
        }
        let l_max = *l_grid.last().unwrap();
        if l_max > window_width {
            return Err(Error::GridTooWide(format!(
                "interval width {l_max} exceeds window width {window_width}"
            )));
        }
        Ok(Self {
            l_grid: l_grid.to_vec(),
            sum: vec![0; l_grid.len()],
            sum_sq: vec![0; l_grid.len()],
            members: 0,
        })
    }

    pub fn absorb(&mut self, window: &UnfoldedWindow) {
        self.members += 1;
        let levels = &window.levels;
        for (i, &l) in self.l_grid.iter().enumerate() {
            let lo = window.center - l / 2.0;
            let hi = window.center + l / 2.0;
            let a = levels.partition_point(|&x| x < lo);
            let b = levels.partition_point(|&x| x <= hi);
            let c = (b - a) as u64;
            self.sum[i] += c;
            self.sum_sq[i] += u128::from(c) * u128::from(c);
        }
    }

    pub fn merge(&mut self, other: &Self) {
        debug_assert_eq!(self.l_grid, other.l_grid);
        self.members += other.members;
        for i in 0..self.sum.len() {
            self.sum[i] += other.sum[i];
            self.sum_sq[i] += other.sum_sq[i];
        }
    }

    pub fn finalize(&self) -> Result<VarianceCurve> {
        let n = self.members;
        if n < 2 {
            return Err(Error::Config(format!(
                "number variance needs at least 2 members, got {n}"
            )));
        }
        let mut sigma2 = Vec::with_capacity(self.l_grid.len());
        let mut stderr = Vec::with_capacity(self.l_grid.len());
        for i in 0..self.l_grid.len() {
            // Unbiased sample variance from exact integers:
            // (N * sum_sq - sum^2) / (N * (N - 1)).
            let num = u128::from(n) * self.sum_sq[i] - u128::from(self.sum[i]) * u128::from(self.sum[i]);
            let var = num as f64 / (n as f64 * (n as f64 - 1.0));
            sigma2.push(var);
            stderr.push(var * (2.0 / (n as f64 - 1.0)).sqrt());
        }
        Ok(VarianceCurve {
            l_grid: self.l_grid.clone(),
            sigma2,
            stderr,
            member_count: n,
        })
    }
}

/// Number variance of an ensemble of windows on the given interval grid.
pub fn number_variance(windows: &[UnfoldedWindow], l_grid: &[f64]) -> Result<VarianceCurve> {
    let first = windows.first().ok_or(Error::Empty("no windows"))?;
    let mut acc = VarianceAccumulator::new(l_grid, 2.0 * first.half_width)?;
    for w in windows {
        acc.absorb(w);
    }
    acc.finalize()
}

/// Ensemble estimate of the smooth repulsion kernel K(omega) = 1 - R2(omega).
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationEstimate {
    /// Bin centers (k + 1/2) * bin, k = 0, 1, ...; omega = 0 is excluded by
    /// construction (self-pairs are never formed).
    pub omega_grid: Vec<f64>,
    pub k_smooth: Vec<f64>,
    /// Member-level (cluster-robust) standard error per bin.
    pub stderr: Vec<f64>,
}

/// Pair-distance histogram with edge-corrected reference levels:
/// reference levels are restricted to the window core so that every
/// distance up to the grid reach stays inside the window.
///
/// Standard errors come from the member-level variation of the ratio
/// estimator R2 = pairs / (2 bin refs) — pairs sharing a level are
/// correlated, so a bare sqrt(count) would understate the error. All
/// member-level moments are integer sums, so merging stays exact.
#[derive(Debug, Clone)]
pub struct KernelAccumulator {
    bin: f64,
    reach: f64,
    pair_counts: Vec<u64>,
    pair_sq: Vec<u128>,
    pair_ref: Vec<u128>,
    ref_levels: u64,
    ref_sq: u128,
    members: u64,
    scratch: Vec<u32>,
}

impl KernelAccumulator {
    pub fn new(n_bins: usize, bin: f64, window_width: f64) -> Result<Self> {
        if n_bins == 0 || !(bin > 0.0) {
            return Err(Error::Config(format!(
                "need n_bins >= 1 and bin > 0; got {n_bins}, {bin}"
            )));
        }
        let reach = n_bins as f64 * bin;
        // max(omega_grid) + bin = (n_bins + 1/2) bin must fit in W/2
        if (n_bins as f64 + 0.5) * bin > window_width / 2.0 {
            return Err(Error::GridTooWide(format!(
                "omega grid reaches {} but the window half-width is {}",
                (n_bins as f64 + 0.5) * bin,
                window_width / 2.0
            )));
        }
        Ok(Self {
            bin,
            reach,
            pair_counts: vec![0; n_bins],
            pair_sq: vec![0; n_bins],
            pair_ref: vec![0; n_bins],
            ref_levels: 0,
            ref_sq: 0,
            members: 0,
            scratch: vec![0; n_bins],
        })
    }

    pub fn omega_grid(&self) -> Vec<f64> {
        (0..self.pair_counts.len())
            .map(|k| (k as f64 + 0.5) * self.bin)
            .collect()
    }

    pub fn absorb(&mut self, window: &UnfoldedWindow) {
        let levels = &window.levels;
        let core_lo = window.center - window.half_width + self.reach;
        let core_hi = window.center + window.half_width - self.reach;
        let i_lo = levels.partition_point(|&x| x < core_lo);
        let i_hi = levels.partition_point(|&x| x <= core_hi);
        self.scratch.fill(0);
        let refs = (i_hi - i_lo) as u64;
        for i in i_lo..i_hi {
            let x = levels[i];
            // both directions; |d| < reach guarantees the partner is in-window
            let mut j = i;
            while j > 0 {
                j -= 1;
                let d = x - levels[j];
                if d >= self.reach {
                    break;
                }
                self.scratch[(d / self.bin) as usize] += 1;
            }
            for j in i + 1..levels.len() {
                let d = levels[j] - x;
                if d >= self.reach {
                    break;
                }
                self.scratch[(d / self.bin) as usize] += 1;
            }
        }
        self.members += 1;
        self.ref_levels += refs;
        self.ref_sq += u128::from(refs) * u128::from(refs);
        for (k, &c) in self.scratch.iter().enumerate() {
            let c = u64::from(c);
            self.pair_counts[k] += c;
            self.pair_sq[k] += u128::from(c) * u128::from(c);
            self.pair_ref[k] += u128::from(c) * u128::from(refs);
        }
    }

    pub fn merge(&mut self, other: &Self) {
        debug_assert_eq!(self.pair_counts.len(), other.pair_counts.len());
        self.members += other.members;
        self.ref_levels += other.ref_levels;
        self.ref_sq += other.ref_sq;
        for k in 0..self.pair_counts.len() {
            self.pair_counts[k] += other.pair_counts[k];
            self.pair_sq[k] += other.pair_sq[k];
            self.pair_ref[k] += other.pair_ref[k];
        }
    }

    pub fn finalize(&self) -> Result<CorrelationEstimate> {
        if self.ref_levels == 0 {
            return Err(Error::Empty("no reference levels in the window core"));
        }
        let norm = 2.0 * self.ref_levels as f64 * self.bin;
        let mut k_smooth = Vec::with_capacity(self.pair_counts.len());
        let mut stderr = Vec::with_capacity(self.pair_counts.len());
        for k in 0..self.pair_counts.len() {
            let p = self.pair_counts[k] as f64;
            k_smooth.push(1.0 - p / norm);
            // member-level variance of the ratio estimator: with q = P/R,
            // sum_i (p_i - q r_i)^2 = sum p^2 - 2q sum(pr) + q^2 sum r^2,
            // every moment an exact integer.
            let q = p / self.ref_levels as f64;
            let ssq = self.pair_sq[k] as f64 - 2.0 * q * self.pair_ref[k] as f64
                + q * q * self.ref_sq as f64;
            stderr.push(ssq.max(0.0).sqrt() / norm);
        }
        Ok(CorrelationEstimate {
            omega_grid: self.omega_grid(),
            k_smooth,
            stderr,
        })
    }
}

/// Kernel estimate over an explicit grid of uniform bin centers
/// `(k + 1/2) * bin`; the grid is validated against that layout.
pub fn empirical_kernel(
    windows: &[UnfoldedWindow],
    omega_grid: &[f64],
    bin: f64,
) -> Result<CorrelationEstimate> {
    let first = windows.first().ok_or(Error::Empty("no windows"))?;
    for (k, &w) in omega_grid.iter().enumerate() {
        let want = (k as f64 + 0.5) * bin;
        if (w - want).abs() > 1e-9 * bin {
            return Err(Error::Config(format!(
                "omega grid must be uniform bin centers; entry {k} is {w}, expected {want}"
            )));
        }
    }
    let mut acc = KernelAccumulator::new(omega_grid.len(), bin, 2.0 * first.half_width)?;
    for w in windows {
        acc.absorb(w);
    }
    acc.finalize()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn window(levels: &[f64], center: f64, half: f64) -> UnfoldedWindow {
        UnfoldedWindow::new(7, center, half, levels.to_vec(), 0.0).unwrap()
    }

    #[test]
    fn spacings_are_consecutive_differences() {
        let w = window(&[5.0, 5.7, 6.1], 5.5, 1.0);
        let s = nearest_spacings(&w);
        assert_eq!(s.len(), 2);
        assert!((s[0] - 0.7).abs() < 1e-12);
        assert!((s[1] - 0.4).abs() < 1e-12);
        assert!(nearest_spacings(&window(&[5.0], 5.0, 1.0)).is_empty());
        assert!(nearest_spacings(&window(&[], 5.0, 1.0)).is_empty());
    }

    #[test]
    fn histogram_single_value() {
        // all spacings equal 1.0 with bins of width 0.5: only bin [1.0, 1.5)
        let h = spacing_histogram(&[1.0; 40], 0.5, 2.0).unwrap();
        assert_eq!(h.counts, vec![0, 0, 40, 0]);
        assert_eq!(h.total_spacings, 40);
        assert!((h.density[2] - 2.0).abs() < 1e-12); // 40/(40*0.5)
    }

    #[test]
    fn histogram_counts_out_of_range_in_total() {
        let h = spacing_histogram(&[0.1, 0.2, 9.0], 0.5, 1.0).unwrap();
        assert_eq!(h.total_spacings, 3);
        assert_eq!(h.counts.iter().sum::<u64>(), 2);
    }

    #[test]
    fn histogram_empty_is_error() {
        assert!(matches!(
            spacing_histogram(&[], 0.1, 1.0),
            Err(Error::Empty(_))
        ));
    }

    #[test]
    fn cumulative_p_basics() {
        // all spacings above s -> 0
        assert_eq!(cumulative_p(&[0.5, 1.0, 2.0], 0.1).unwrap(), 0.0);
        // half below s=0.5: (0.5)/0.5 = 1
        let v = cumulative_p(&[0.1, 0.2, 0.9, 1.5], 0.5).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        assert!(cumulative_p(&[], 0.1).is_err());
        assert!(cumulative_p(&[1.0], 0.0).is_err());
    }

    #[test]
    fn estimator_consistency_cumulative_vs_histogram() {
        // cumulative_p at s equals the bin-integrated histogram when the
        // bins align with s (bin_width = s/50).
        let spacings: Vec<f64> = (0..20_000)
            .map(|i| ((i as f64 + 0.5) / 20_000.0f64).ln() * -1.0)
            .collect();
        let s = 0.05;
        let h = spacing_histogram(&spacings, s / 50.0, s).unwrap();
        let integrated: u64 = h.counts.iter().sum();
        let via_hist = integrated as f64 / h.total_spacings as f64 / s;
        let direct = cumulative_p(&spacings, s).unwrap();
        assert!(
            (via_hist - direct).abs() <= 0.01 * direct,
            "{via_hist} vs {direct}"
        );
    }

    #[test]
    fn variance_zero_for_identical_members() {
        let grid = [1.0, 5.0, 20.0];
        let mut acc = VarianceAccumulator::new(&grid, 100.0).unwrap();
        let levels: Vec<f64> = (0..100).map(|i| 9950.5 + f64::from(i)).collect();
        for _ in 0..50 {
            acc.absorb(&window(&levels, 1e4, 50.0));
        }
        let curve = acc.finalize().unwrap();
        assert!(curve.sigma2.iter().all(|&v| v == 0.0));
        assert!(curve.stderr.iter().all(|&v| v == 0.0));
        assert_eq!(curve.member_count, 50);
    }

    #[test]
    fn variance_grid_must_fit_window() {
        assert!(matches!(
            VarianceAccumulator::new(&[120.0], 100.0),
            Err(Error::GridTooWide(_))
        ));
        assert!(VarianceAccumulator::new(&[], 100.0).is_err());
        let mut acc = VarianceAccumulator::new(&[1.0], 100.0).unwrap();
        acc.absorb(&window(&[1e4], 1e4, 50.0));
        assert!(acc.finalize().is_err(), "one member cannot give a variance");
    }

    #[test]
    fn variance_counts_exact_small_case() {
        let grid = [2.0, 4.0];
        let mut acc = VarianceAccumulator::new(&grid, 10.0).unwrap();
        acc.absorb(&window(&[9.0, 10.5, 11.4], 10.0, 5.0)); // counts 2, 3
        acc.absorb(&window(&[6.0, 13.9], 10.0, 5.0)); // counts 0, 0
        let c = acc.finalize().unwrap();
        // counts L=2: {2, 0} -> var 2; L=4: {3, 0} -> var 4.5
        assert!((c.sigma2[0] - 2.0).abs() < 1e-12);
        assert!((c.sigma2[1] - 4.5).abs() < 1e-12);
    }

    #[test]
    fn kernel_grid_validation() {
        let w = window(&[1e4], 1e4, 50.0);
        // well-formed centers whose reach exceeds the half-width
        assert!(matches!(
            empirical_kernel(&[w.clone()], &[25.0, 75.0], 50.0),
            Err(Error::GridTooWide(_))
        ));
        // malformed centers
        assert!(matches!(
            empirical_kernel(&[w], &[0.3, 1.5], 1.0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn kernel_counts_pairs_once_per_direction() {
        // three levels, reference restricted to the core
        let w = window(&[9_999.0, 10_000.0, 10_001.0], 1e4, 50.0);
        let mut acc = KernelAccumulator::new(10, 0.5, 100.0).unwrap();
        acc.absorb(&w);
        // all three levels are in the core (reach 5 < 50); distances:
        // 1.0 twice (both directions each) and 2.0 once each direction
        assert_eq!(acc.ref_levels, 3);
        let est = acc.finalize().unwrap();
        // bin [1.0, 1.5): 4 ordered pairs; bin [2.0, 2.5): 2 ordered pairs
        assert_eq!(est.omega_grid.len(), 10);
        let norm = 2.0 * 3.0 * 0.5;
        assert!((est.k_smooth[2] - (1.0 - 4.0 / norm)).abs() < 1e-12);
        assert!((est.k_smooth[4] - (1.0 - 2.0 / norm)).abs() < 1e-12);
    }

    #[test]
    fn merge_is_order_independent() {
        let w1 = window(&[9_980.0, 9_990.5, 10_003.0], 1e4, 50.0);
        let w2 = window(&[9_970.25, 10_000.125, 10_040.0], 1e4, 50.0);
        let w3 = window(&[10_010.0, 10_011.0], 1e4, 50.0);

        let grid = [1.0, 10.0, 80.0];
        let build = |ws: &[&UnfoldedWindow]| {
            let mut acc = VarianceAccumulator::new(&grid, 100.0).unwrap();
            for w in ws {
                acc.absorb(w);
            }
            acc
        };
        let mut a = build(&[&w1]);
        let b = build(&[&w2, &w3]);
        a.merge(&b);
        let ab = a.finalize().unwrap();
        let mut c = build(&[&w3, &w2]);
        let d = build(&[&w1]);
        c.merge(&d);
        let cd = c.finalize().unwrap();
        assert_eq!(ab, cd);
    }
}
