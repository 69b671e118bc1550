use crate::{Error, Result};

/// Uniform binning of `[lo, hi)` into `n` bins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinSpec {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl BinSpec {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::invalid("bins", format!("need finite lo < hi, got [{lo}, {hi})")));
        }
        if n == 0 {
            return Err(Error::invalid("bins", "need at least one bin"));
        }
        Ok(Self { lo, hi, n })
    }

    pub fn edge(&self, i: usize) -> f64 {
        if i == self.n {
            return self.hi;
        }
        self.lo + (self.hi - self.lo) * i as f64 / self.n as f64
    }

    pub fn width(&self, i: usize) -> f64 {
        self.edge(i + 1) - self.edge(i)
    }

    /// Bin holding `v`, or `None` outside `[lo, hi)`.
    pub fn index(&self, v: f64) -> Option<usize> {
        if !(v >= self.lo && v < self.hi) {
            return None;
        }
        let guess = ((v - self.lo) / (self.hi - self.lo) * self.n as f64) as usize;
        let mut i = guess.min(self.n - 1);
        // Rounding can put the guess one bin off near an edge.
        while i > 0 && v < self.edge(i) {
            i -= 1;
        }
        while i + 1 < self.n && v >= self.edge(i + 1) {
            i += 1;
        }
        Some(i)
    }
}

impl Default for BinSpec {
    /// 800 bins of width 0.01 on [-4, 4]; +-1 fall on bin edges.
    fn default() -> Self {
        Self {
            lo: -4.0,
            hi: 4.0,
            n: 800,
        }
    }
}

/// Tally of weak-velocity samples. Merging is associative and commutative,
/// so any split of the samples across workers gives the same histogram.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    spec: BinSpecKey,
    counts: Vec<u64>,
    underflow: u64,
    overflow: u64,
}

// `BinSpec` holds floats; keep the bit patterns so `Histogram` can be `Eq`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct BinSpecKey {
    lo: u64,
    hi: u64,
    n: usize,
}

impl From<BinSpec> for BinSpecKey {
    fn from(s: BinSpec) -> Self {
        Self {
            lo: s.lo.to_bits(),
            hi: s.hi.to_bits(),
            n: s.n,
        }
    }
}

impl Histogram {
    pub fn new(spec: BinSpec) -> Self {
        Self {
            spec: spec.into(),
            counts: vec![0; spec.n],
            underflow: 0,
            overflow: 0,
        }
    }

    pub fn spec(&self) -> BinSpec {
        BinSpec {
            lo: f64::from_bits(self.spec.lo),
            hi: f64::from_bits(self.spec.hi),
            n: self.spec.n,
        }
    }

    pub fn insert(&mut self, v: f64) {
        let spec = self.spec();
        match spec.index(v) {
            Some(i) => self.counts[i] += 1,
            None if v < spec.lo => self.underflow += 1,
            None => self.overflow += 1,
        }
    }

    pub fn merge(mut self, other: Histogram) -> Histogram {
        assert_eq!(self.spec, other.spec, "merging histograms with different binning");
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
        self.underflow += other.underflow;
        self.overflow += other.overflow;
        self
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn underflow(&self) -> u64 {
        self.underflow
    }

    pub fn overflow(&self) -> u64 {
        self.overflow
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.underflow + self.overflow
    }

    pub fn edges(&self) -> Vec<f64> {
        let spec = self.spec();
        (0..=spec.n).map(|i| spec.edge(i)).collect()
    }

    /// Probability density per bin; together with the tail masses it
    /// integrates to one.
    pub fn density(&self) -> Vec<f64> {
        let spec = self.spec();
        let n = self.total().max(1) as f64;
        self.counts
            .iter()
            .enumerate()
            .map(|(i, &c)| c as f64 / (n * spec.width(i)))
            .collect()
    }

    pub fn underflow_mass(&self) -> f64 {
        self.underflow as f64 / self.total().max(1) as f64
    }

    pub fn overflow_mass(&self) -> f64 {
        self.overflow as f64 / self.total().max(1) as f64
    }

    /// Fraction of samples in bins lying entirely outside `[a, b]`, tails
    /// included.
    pub fn mass_outside(&self, a: f64, b: f64) -> f64 {
        let spec = self.spec();
        let inside_count: u64 = self
            .counts
            .iter()
            .enumerate()
            .filter(|(i, _)| !(spec.edge(i + 1) <= a || spec.edge(*i) >= b))
            .map(|(_, &c)| c)
            .sum();
        let outside = self.total() - inside_count;
        outside as f64 / self.total().max(1) as f64
    }
}
