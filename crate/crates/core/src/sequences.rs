//! Eigenvalue sequences: model sequences, multiset merging and decay fits.

use std::cmp::Ordering;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Differences below this are treated as round-off.
pub const FLOOR: f64 = 1e-13;

/// Minimum number of usable points for a decay fit.
pub const MIN_FIT_POINTS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralValue {
    pub value: f64,
    /// Fourier mode that produced the value, when known.
    pub mode: Option<usize>,
    /// Boundary component or model id, when known.
    pub component: Option<usize>,
}

impl SpectralValue {
    pub fn new(value: f64) -> Self {
        Self {
            value,
            mode: None,
            component: None,
        }
    }

    pub fn tagged(value: f64, mode: Option<usize>, component: Option<usize>) -> Self {
        Self { value, mode, component }
    }
}

fn key_cmp(a: &SpectralValue, b: &SpectralValue) -> Ordering {
    a.value
        .total_cmp(&b.value)
        .then(a.mode.cmp(&b.mode))
        .then(a.component.cmp(&b.component))
}

/// Nondecreasing multiset of eigenvalues with provenance tags.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSequence {
    entries: Vec<SpectralValue>,
}

impl SpectrumSequence {
    /// Sorts by (value, mode, component); panics on non-finite values.
    pub fn new(mut entries: Vec<SpectralValue>) -> Self {
        assert!(
            entries.iter().all(|e| e.value.is_finite()),
            "spectrum values must be finite"
        );
        entries.sort_by(key_cmp);
        Self { entries }
    }

    pub fn from_values(values: &[f64]) -> Self {
        Self::new(values.iter().map(|&v| SpectralValue::new(v)).collect())
    }

    pub fn entries(&self) -> &[SpectralValue] {
        &self.entries
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.value).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<f64> {
        self.entries.get(index).map(|e| e.value)
    }

    pub fn truncated(&self, len: usize) -> Self {
        Self {
            entries: self.entries[..len.min(self.len())].to_vec(),
        }
    }

    /// Sets the component tag on every entry.
    pub fn with_component(mut self, id: usize) -> Self {
        for e in &mut self.entries {
            e.component = Some(id);
        }
        self
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.entries.windows(2).all(|w| w[0].value <= w[1].value)
    }
}

/// One boundary component's asymptotic data: α = 1/L and s_1, s_2, ….
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentModel {
    pub alpha: f64,
    pub s: Vec<f64>,
    pub multiplicity: usize,
}

impl ComponentModel {
    pub fn new(alpha: f64, s: Vec<f64>) -> Self {
        assert!(alpha > 0.0, "alpha must be positive");
        Self {
            alpha,
            s,
            multiplicity: 1,
        }
    }

    pub fn with_multiplicity(mut self, multiplicity: usize) -> Self {
        assert!(multiplicity >= 1);
        self.multiplicity = multiplicity;
        self
    }

    /// jα + Σ_{n ≤ N} s_n j^{−n}
    pub fn value(&self, j: usize, order: usize) -> f64 {
        let j = j as f64;
        let tail: f64 = self
            .s
            .iter()
            .take(order)
            .enumerate()
            .map(|(n, s)| s * j.powi(-(n as i32 + 1)))
            .sum();
        j * self.alpha + tail
    }
}

/// 0 once, then the pairs ξ_{2j−1} = ξ_{2j} = jα + Σ s_n j^{−n} for j ≤ j_max,
/// repeated `multiplicity` times.
pub fn build_model_sequence(c: &ComponentModel, order: usize, j_max: usize) -> SpectrumSequence {
    let mut entries = Vec::with_capacity(c.multiplicity * (2 * j_max + 1));
    for _ in 0..c.multiplicity {
        entries.push(SpectralValue::tagged(0.0, Some(0), None));
        for j in 1..=j_max {
            let v = c.value(j, order);
            entries.push(SpectralValue::tagged(v, Some(j), None));
            entries.push(SpectralValue::tagged(v, Some(j), None));
        }
    }
    SpectrumSequence::new(entries)
}

/// Sorted multiset union; ties break by input position.
pub fn merge(sequences: &[SpectrumSequence]) -> SpectrumSequence {
    let mut tagged: Vec<(usize, usize, SpectralValue)> = sequences
        .iter()
        .enumerate()
        .flat_map(|(src, s)| s.entries.iter().enumerate().map(move |(i, e)| (src, i, *e)))
        .collect();
    tagged.sort_by(|a, b| a.2.value.total_cmp(&b.2.value).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
    SpectrumSequence {
        entries: tagged.into_iter().map(|t| t.2).collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    /// Least-squares slope of log|a − b| against log index; None when floor-dominated.
    pub slope: Option<f64>,
    pub used: usize,
    /// Points dropped for falling below the floor.
    pub excluded: usize,
    pub floor_dominated: bool,
}

/// Log-log slope of |a_i − b_i| over the index window (indices ≥ 1).
pub fn decay_order(a: &SpectrumSequence, b: &SpectrumSequence, window: Range<usize>) -> Result<DecayFit> {
    if window.end > a.len() || window.end > b.len() {
        return Err(Error::Config(format!(
            "window {window:?} exceeds sequence lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    let start = window.start.max(1);
    let (x, d): (Vec<f64>, Vec<f64>) = (start..window.end)
        .map(|i| (i as f64, (a.entries[i].value - b.entries[i].value).abs()))
        .unzip();
    decay_slope(&x, &d)
}

/// Same fit on explicit abscissae and differences.
pub fn decay_slope(x: &[f64], diffs: &[f64]) -> Result<DecayFit> {
    assert_eq!(x.len(), diffs.len());
    if x.len() < MIN_FIT_POINTS {
        return Err(Error::WindowTooSmall {
            usable: x.len(),
            needed: MIN_FIT_POINTS,
        });
    }
    let points: Vec<(f64, f64)> = x
        .iter()
        .zip(diffs)
        .filter(|(_, d)| **d > FLOOR)
        .map(|(x, d)| (x.ln(), d.ln()))
        .collect();
    let excluded = x.len() - points.len();
    if points.len() < MIN_FIT_POINTS {
        return Ok(DecayFit {
            slope: None,
            used: points.len(),
            excluded,
            floor_dominated: true,
        });
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(DecayFit {
        slope: Some(sxy / sxx),
        used: points.len(),
        excluded,
        floor_dominated: false,
    })
}
