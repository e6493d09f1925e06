//! Inverse problem: boundary lengths, expansion coefficients and geometric
//! invariants from a merged eigenvalue sequence.
//!
//! Step 1 peels off arithmetic progressions by their limsup gap, Step 2
//! selects indices j where jα is isolated from every other progression,
//! Step 3 reads the coefficients off the order statistics of the rescaled
//! residuals there, and Step 4 repeats Step 3 for lengths that are integer
//! multiples of already processed ones after removing the known values.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::least_squares;
use crate::sequences::SpectrumSequence;

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_MIN_ENTRIES: usize = 400;
pub const DEFAULT_MIN_INDICES: usize = 30;
/// Two lengths closer than this (relative) are the same length.
pub const EQUAL_ALPHA_RTOL: f64 = 1e-6;
const MAX_COMPONENTS: usize = 16;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Assumption {
    #[default]
    None,
    /// γ = 0 and K ≡ 1.
    Sphere,
    /// K ≡ 0.
    Flat,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecoupleOptions {
    /// Number of coefficients s_1..s_N to extract.
    pub order: usize,
    pub min_entries: usize,
    /// Nested tail windows, as fractions of the spectral range.
    pub window_fractions: [f64; 3],
    /// Removal guard as a fraction of the smallest length α_1.
    pub guard_fraction: f64,
    /// Largest denominator checked for effectively rational ratios.
    pub q_max: u64,
    pub min_indices: usize,
    /// Coefficient fits use isolated indices in [fit_start·j_hi, j_hi].
    pub fit_start: f64,
    pub constant_potential: bool,
    pub assumption: Assumption,
}

impl Default for DecoupleOptions {
    fn default() -> Self {
        Self {
            order: 2,
            min_entries: DEFAULT_MIN_ENTRIES,
            window_fractions: [0.5, 0.375, 0.25],
            guard_fraction: 0.1,
            q_max: 12,
            min_indices: DEFAULT_MIN_INDICES,
            fit_start: 0.5,
            constant_potential: true,
            assumption: Assumption::None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveredLength {
    pub alpha: f64,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LengthDiagnostic {
    pub alpha: f64,
    /// Estimate from each nested tail window, largest window first.
    pub window_estimates: Vec<f64>,
    pub tolerance: f64,
    pub removed: usize,
    pub remaining_in_tail: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LengthRecovery {
    pub lengths: Vec<RecoveredLength>,
    pub guard: f64,
    pub diagnostics: Vec<LengthDiagnostic>,
}

impl LengthRecovery {
    /// ℓ, counting multiplicity.
    pub fn count(&self) -> usize {
        self.lengths.iter().map(|l| l.multiplicity).sum()
    }
}

fn sorted_values(s: &SpectrumSequence) -> Vec<f64> {
    let v = s.values();
    debug_assert!(v.windows(2).all(|w| w[0] <= w[1]));
    v
}

/// Index range of `values` inside [lo, hi].
fn range_of(values: &[f64], lo: f64, hi: f64) -> std::ops::Range<usize> {
    values.partition_point(|&v| v < lo)..values.partition_point(|&v| v <= hi)
}

struct AlphaFit {
    alpha: f64,
    /// c_1, c_2 of x_k ≈ kα + c_1/k + c_2/k²
    offsets: [f64; 2],
    /// max |(x − kα)k| over elements near the multiples
    scaled_spread: f64,
    max_residual: f64,
}

/// Least-squares α from x_k ≈ kα + c_1/k + c_2/k², one element per k: the
/// nearest to the current fitted position. Multiples whose guard interval
/// holds a single pair are used alone when there are enough of them, since a
/// coincident progression (a divisor or a multiple of α) crowds every other
/// slot. Median-based outlier rejection on top.
fn refine_alpha(values: &[f64], alpha0: f64, lo: f64, hi: f64, guard: f64) -> Result<AlphaFit> {
    let mut alpha = alpha0;
    let mut offsets = [0.0; 2];
    let mut max_residual = 0.0;
    for _ in 0..3 {
        let k_lo = (lo / alpha).ceil().max(1.0) as usize;
        let k_hi = (hi / alpha).floor() as usize;
        let mut clean: Vec<(f64, f64)> = Vec::new();
        let mut all: Vec<(f64, f64)> = Vec::new();
        for k in k_lo..=k_hi {
            let kf = k as f64;
            let centre = kf * alpha;
            let target = centre + offsets[0] / kf + offsets[1] / (kf * kf);
            let r = range_of(values, centre - guard, centre + guard);
            let crowded = r.len() > 2;
            if let Some(x) = values[r].iter().copied().min_by(|a, b| (a - target).abs().total_cmp(&(b - target).abs())) {
                all.push((kf, x));
                if !crowded {
                    clean.push((kf, x));
                }
            }
        }
        let mut pts = if clean.len() >= 20.max(all.len() / 4) { clean } else { all };
        for _ in 0..3 {
            if pts.len() < 10 {
                return Err(Error::InsufficientData(format!(
                    "only {} multiples of {alpha:.8} found in the tail window",
                    pts.len()
                )));
            }
            let rows: Vec<Vec<f64>> = pts.iter().map(|&(k, _)| vec![k, 1.0 / k, 1.0 / (k * k)]).collect();
            let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
            let fit = least_squares(&rows, &y)?;
            alpha = fit.coefficients[0];
            offsets = [fit.coefficients[1], fit.coefficients[2]];
            max_residual = fit.max_residual;
            let res: Vec<f64> = rows
                .iter()
                .zip(&y)
                .map(|(r, y)| (r.iter().zip(&fit.coefficients).map(|(a, c)| a * c).sum::<f64>() - y).abs())
                .collect();
            let mut sorted = res.clone();
            sorted.sort_by(f64::total_cmp);
            let cut = (6.0 * 1.4826 * sorted[sorted.len() / 2]).max(1e-12 * hi);
            let before = pts.len();
            pts = pts.into_iter().zip(&res).filter(|(_, r)| **r <= cut).map(|(p, _)| p).collect();
            if pts.len() == before {
                break;
            }
        }
    }
    let k_lo = (lo / alpha).ceil().max(1.0) as usize;
    let k_hi = (hi / alpha).floor() as usize;
    let mut scaled_spread: f64 = 0.0;
    for k in k_lo..=k_hi {
        let target = k as f64 * alpha;
        for &x in &values[range_of(values, target - guard, target + guard)] {
            scaled_spread = scaled_spread.max(((x - target) * k as f64).abs());
        }
    }
    Ok(AlphaFit {
        alpha,
        offsets,
        scaled_spread,
        max_residual,
    })
}

/// Fraction of multiples kα in [lo, top] with an element within η.
fn coverage(values: &[f64], alpha: f64, lo: f64, top: f64, eta: f64) -> f64 {
    let k_lo = (lo / alpha).ceil().max(1.0) as usize;
    let k_hi = (top / alpha).floor() as usize;
    if k_hi < k_lo {
        return 0.0;
    }
    let hits = (k_lo..=k_hi)
        .filter(|&k| {
            let t = k as f64 * alpha;
            !range_of(values, t - eta, t + eta).is_empty()
        })
        .count();
    hits as f64 / (k_hi - k_lo + 1) as f64
}

/// Window estimate of the limsup of the gaps. The largest gap g in [lo, top]
/// falls short of α_min whenever other progressions crowd every interval, so
/// it only seeds a scan of [0.98g, 1.25g]: the smallest α whose multiples are
/// almost all occupied is the progression, and least squares finishes it.
fn window_estimate(values: &[f64], lo: f64, top: f64, guard_fraction: f64) -> Result<f64> {
    let sub = &values[range_of(values, lo, top)];
    if sub.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "tail window [{lo:.3}, {top:.3}] holds {} values",
            sub.len()
        )));
    }
    let gap = sub.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    if gap <= 0.0 {
        return Err(Error::Degenerate("tail window has no positive gap".into()));
    }
    let eta = 0.05 * gap;
    let step = eta / (2.0 * top / (0.98 * gap));
    let mut best: Option<(f64, f64)> = None;
    let mut a = 0.98 * gap;
    while a <= 1.25 * gap {
        let c = coverage(values, a, lo, top, eta);
        if c >= 0.9 {
            if best.is_none_or(|(_, bc)| c > bc) {
                best = Some((a, c));
            }
        } else if best.is_some() {
            break;
        }
        a += step;
    }
    let (a, _) = best.ok_or_else(|| {
        Error::InsufficientData(format!(
            "no progression near the largest gap {gap:.6} in [{lo:.3}, {top:.3}]"
        ))
    })?;
    Ok(refine_alpha(values, a, lo, top, guard_fraction * a)?.alpha)
}

/// Removes, per multiple k, the two elements nearest to the fitted position
/// kα + c_1/k + c_2/k² within `guard` (the larger first on ties). Measuring
/// from kα alone lets a coincident progression with a smaller offset steal
/// the slot. Returns the number removed.
fn remove_multiples(values: &mut Vec<f64>, fit: &AlphaFit, guard: f64, top: f64) -> usize {
    let mut keep = vec![true; values.len()];
    let alpha = fit.alpha;
    let k_max = ((top + guard) / alpha).floor() as usize;
    for k in 1..=k_max {
        let kf = k as f64;
        let target = kf * alpha + fit.offsets[0] / kf + fit.offsets[1] / (kf * kf);
        let centre = kf * alpha;
        let mut cand: Vec<usize> = range_of(values, centre - guard, centre + guard).filter(|&i| keep[i]).collect();
        cand.sort_by(|&a, &b| {
            (values[a] - target)
                .abs()
                .total_cmp(&(values[b] - target).abs())
                .then(values[b].total_cmp(&values[a]))
        });
        for &i in cand.iter().take(2) {
            keep[i] = false;
        }
    }
    let before = values.len();
    let mut idx = 0;
    values.retain(|_| {
        idx += 1;
        keep[idx - 1]
    });
    before - values.len()
}

/// Step 1: the multiset M = {α_m} of inverse normalized lengths.
pub fn recover_lengths(s: &SpectrumSequence, opts: &DecoupleOptions) -> Result<LengthRecovery> {
    let values = sorted_values(s);
    if values.len() < opts.min_entries {
        return Err(Error::InsufficientData(format!(
            "{} eigenvalues given, at least {} required",
            values.len(),
            opts.min_entries
        )));
    }
    let top = *values.last().expect("non-empty");
    if top <= 0.0 {
        return Err(Error::Degenerate("spectrum has no positive values".into()));
    }
    let lows: Vec<f64> = opts.window_fractions.iter().map(|f| top * (1.0 - f)).collect();
    let initial_tail = range_of(&values, lows[0], top).len();
    let stop_below = 8usize.max((0.03 * initial_tail as f64).ceil() as usize);

    let mut alive = values;
    let mut found: Vec<f64> = Vec::new();
    let mut diagnostics = Vec::new();
    let mut guard: Option<f64> = None;
    loop {
        let tail = range_of(&alive, lows[0], top).len();
        if tail < stop_below {
            break;
        }
        if found.len() >= MAX_COMPONENTS {
            return Err(Error::InsufficientData(format!(
                "more than {MAX_COMPONENTS} lengths extracted; the tail does not exhaust"
            )));
        }
        let estimates = lows
            .iter()
            .map(|&lo| window_estimate(&alive, lo, top, opts.guard_fraction))
            .collect::<Result<Vec<f64>>>()?;
        let local_guard = guard.unwrap_or(estimates[0] * opts.guard_fraction);
        let fit = refine_alpha(&alive, estimates[0], lows[0], top, local_guard)?;
        let alpha = fit.alpha;
        let k_lo = (lows[2] / alpha).max(1.0);
        let tolerance = 3.0 * fit.scaled_spread / (k_lo * k_lo) + 3.0 * fit.max_residual / k_lo + 1e-9 * alpha;
        if estimates.iter().any(|e| (e - alpha).abs() > tolerance) {
            return Err(Error::InsufficientData(format!(
                "gap estimate does not stabilize: windows give {estimates:?}, refined {alpha}, tolerance {tolerance:e}"
            )));
        }
        let g = *guard.get_or_insert(alpha * opts.guard_fraction);
        let removed = remove_multiples(&mut alive, &fit, g, top);
        diagnostics.push(LengthDiagnostic {
            alpha,
            window_estimates: estimates,
            tolerance,
            removed,
            remaining_in_tail: range_of(&alive, lows[0], top).len(),
        });
        found.push(alpha);
    }
    if found.is_empty() {
        return Err(Error::InsufficientData("no arithmetic progression found in the tail".into()));
    }
    found.sort_by(f64::total_cmp);
    let mut lengths: Vec<RecoveredLength> = Vec::new();
    for a in found {
        match lengths.last_mut() {
            Some(l) if (a - l.alpha).abs() <= EQUAL_ALPHA_RTOL * l.alpha => {
                l.alpha = (l.alpha * l.multiplicity as f64 + a) / (l.multiplicity + 1) as f64;
                l.multiplicity += 1;
            }
            _ => lengths.push(RecoveredLength { alpha: a, multiplicity: 1 }),
        }
    }
    Ok(LengthRecovery {
        lengths,
        guard: guard.expect("set with the first length"),
        diagnostics,
    })
}

/// Some(r) when b = r·a for an integer r ≥ 1.
fn multiple_of(a: f64, b: f64) -> Option<u64> {
    let r = (b / a).round();
    (r >= 1.0 && (b - r * a).abs() <= EQUAL_ALPHA_RTOL * b).then_some(r as u64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NearRational {
    pub alpha: f64,
    pub other: f64,
    pub p: u64,
    pub q: u64,
    /// |q·other − p·alpha|
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonantSet {
    pub alpha: f64,
    pub delta: f64,
    pub j_max: usize,
    pub indices: Vec<usize>,
    pub near_rational: Vec<NearRational>,
}

/// Step 2: indices j ≤ j_max at which [jα_m − δ, jα_m + δ] contains no
/// multiple of any α_k that does not divide α_m.
pub fn select_resonant_indices(distinct: &[f64], m: usize, j_max: usize, q_max: u64) -> Result<ResonantSet> {
    let alpha = distinct[m];
    let alpha_min = distinct.iter().copied().fold(f64::INFINITY, f64::min);
    let alpha_max = distinct.iter().copied().fold(0.0, f64::max);
    let others: Vec<f64> = distinct
        .iter()
        .enumerate()
        .filter(|&(k, &a)| k != m && multiple_of(a, alpha).is_none())
        .map(|(_, &a)| a)
        .collect();
    let horizon = j_max as f64 * alpha + 1.0;
    let mut delta = f64::INFINITY;
    for &a in &others {
        let mut n = 1.0;
        while n * a <= horizon.max(a) {
            delta = delta.min(0.5 * (alpha - n * a).abs());
            n += 1.0;
        }
    }
    let delta = delta.min(alpha_min / 4.0);
    let indices: Vec<usize> = (1..=j_max)
        .filter(|&j| {
            let x = j as f64 * alpha;
            others.iter().all(|&a| {
                let n = (x / a).round().max(1.0);
                (x - n * a).abs() > delta
            })
        })
        .collect();
    if indices.is_empty() {
        let l = distinct.len() as f64;
        return Err(Error::HorizonTooSmall {
            alpha,
            detail: format!(
                "no isolated multiple up to j = {j_max}; needs q with q^(-1/{l}) < {:.3e}",
                delta / (2.0 * alpha_max)
            ),
        });
    }
    let mut near_rational = Vec::new();
    for &a in &others {
        if multiple_of(alpha, a).is_some() {
            continue;
        }
        for q in 1..=q_max {
            let p = (q as f64 * a / alpha).round();
            if p < 1.0 {
                continue;
            }
            let deviation = (q as f64 * a - p * alpha).abs();
            if deviation <= 1e-9 * q as f64 * a {
                break;
            }
            if deviation * (j_max as f64 / p) < delta {
                near_rational.push(NearRational {
                    alpha,
                    other: a,
                    p: p as u64,
                    q,
                    deviation,
                });
                break;
            }
        }
    }
    Ok(ResonantSet {
        alpha,
        delta,
        j_max,
        indices,
        near_rational,
    })
}

/// One recovered sequence ξ^{(k)}: α and s_1..s_N, repeated `multiplicity` times.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceEstimate {
    pub alpha: f64,
    pub multiplicity: usize,
    pub s: Vec<f64>,
    pub uncertainty: Vec<f64>,
}

impl SequenceEstimate {
    /// jα + Σ s_n j^{−n}
    pub fn value(&self, j: f64) -> f64 {
        j * self.alpha + self.s.iter().enumerate().map(|(n, s)| s * j.powi(-(n as i32 + 1))).sum::<f64>()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtractionDiagnostic {
    pub alpha: f64,
    pub delta: f64,
    pub resonant_indices: usize,
    /// Fit window [j_lo, j_hi].
    pub window: (usize, usize),
    pub used: usize,
    /// Indices skipped for holding an unexpected element count.
    pub skipped: usize,
    pub near_rational: Vec<NearRational>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extraction {
    pub sequences: Vec<SequenceEstimate>,
    pub diagnostics: Vec<ExtractionDiagnostic>,
}

/// Most decaying terms c_0 + c_1/j + … tried in the rank-wise limit fits.
const TAIL_TERMS: usize = 4;

/// Limit of y_j as j → ∞ from c_0 + c_1/j + … plus the growing terms j, …,
/// j^{lower} that absorb errors in the lower coefficients already subtracted.
/// The number of decaying terms is the smallest whose c_0 agrees with the fit
/// using one more term, within three standard errors; fewer terms keep noise
/// from being amplified, more terms remove truncation bias. Uncertainty: the
/// agreement bound (or the shift plus three standard errors when no two
/// consecutive fits agree), plus the error α_unc·j^{lower+2} carried by the
/// fixed α, pushed through the same fit.
fn tail_limit(j: &[f64], y: &[f64], lower: usize, alpha_unc: f64) -> Result<(f64, f64)> {
    let rows = |decaying: usize| -> Vec<Vec<f64>> {
        j.iter()
            .map(|&j| (-(lower as i32)..decaying as i32).map(|n| j.powi(-n)).collect())
            .collect()
    };
    let fits = (1..=TAIL_TERMS + 1)
        .map(|d| least_squares(&rows(d), y).map(|f| (f.coefficients[lower], f.std_errors[lower])))
        .collect::<Result<Vec<_>>>()?;
    let bound = |w: &[(f64, f64)]| 3.0 * (w[0].1 + w[1].1);
    let (d, c0, unc) = match fits.windows(2).position(|w| (w[0].0 - w[1].0).abs() <= bound(w)) {
        Some(i) => (i + 1, fits[i].0, bound(&fits[i..i + 2])),
        None => {
            let (c0, se) = fits[TAIL_TERMS - 1];
            (TAIL_TERMS, c0, (c0 - fits[TAIL_TERMS].0).abs() + 3.0 * se)
        }
    };
    let drift: Vec<f64> = j.iter().map(|&j| alpha_unc * j.powi(lower as i32 + 2)).collect();
    let carried = least_squares(&rows(d), &drift)?.coefficients[lower].abs();
    Ok((c0, unc + carried))
}

struct Class {
    s: Vec<f64>,
    unc: Vec<f64>,
    ranks: std::ops::Range<usize>,
}

fn eta(alpha: f64, s: &[f64], j: f64) -> f64 {
    j * alpha + s.iter().enumerate().map(|(n, s)| s * j.powi(-(n as i32 + 1))).sum::<f64>()
}

struct Window {
    j: Vec<f64>,
    /// Per index, the 2μ elements left after removing known values, sorted.
    elements: Vec<Vec<f64>>,
}

/// Splits each class by the limits of its rank-wise residuals at level T.
fn refine_classes(alpha: f64, alpha_unc: f64, window: &Window, classes: Vec<Class>, level: usize) -> Result<Vec<Class>> {
    let mut out = Vec::new();
    for class in classes {
        let limits = class
            .ranks
            .clone()
            .map(|rank| {
                let y: Vec<f64> = window
                    .j
                    .iter()
                    .zip(&window.elements)
                    .map(|(&j, el)| (el[rank] - eta(alpha, &class.s, j)) * j.powi(level as i32 + 1))
                    .collect();
                tail_limit(&window.j, &y, level, alpha_unc)
            })
            .collect::<Result<Vec<(f64, f64)>>>()?;
        let mut start = 0;
        for i in 0..limits.len() {
            let last = i + 1 == limits.len();
            let split = last || {
                let (a, ua) = limits[i];
                let (b, ub) = limits[i + 1];
                (b - a).abs() > (4.0 * (ua + ub)).max(1e-9 * (1.0 + a.abs()))
            };
            if !split {
                continue;
            }
            let group = &limits[start..=i];
            if group.len() % 2 != 0 {
                return Err(Error::Ambiguous {
                    alpha,
                    detail: format!(
                        "odd cluster of {} order statistics at coefficient s_{}",
                        group.len(),
                        level + 1
                    ),
                    scatter: limits.iter().map(|l| l.0).collect(),
                });
            }
            // the class value comes from the rank average, where the
            // order-statistic bias of noisy pairs cancels
            let base = class.ranks.start;
            let members = base + start..base + i + 1;
            let y: Vec<f64> = window
                .j
                .iter()
                .zip(&window.elements)
                .map(|(&j, el)| {
                    let x = el[members.clone()].iter().sum::<f64>() / members.len() as f64;
                    (x - eta(alpha, &class.s, j)) * j.powi(level as i32 + 1)
                })
                .collect();
            let (mean, unc) = tail_limit(&window.j, &y, level, alpha_unc)?;
            let mut s = class.s.clone();
            s.push(mean);
            let mut u = class.unc.clone();
            u.push(unc);
            out.push(Class { s, unc: u, ranks: members });
            start = i + 1;
        }
    }
    Ok(out)
}

/// Re-estimates α from the isolated windows: x_r(j) − jα_0 = j·dα + Σ_n c_{r,n} j^{−n}
/// with dα shared by every rank r. The rescaled residuals at level T carry
/// the error of α times j^{T+2}, so the Step 1 value is not accurate enough.
/// Ranks 2r and 2r + 1 are averaged first: the spectrum doubles, and the
/// average drops the order-statistic bias of noisy pairs. The number of terms
/// per pair is chosen as in `tail_limit`, starting at the expansion order.
fn joint_alpha(alpha0: f64, window: &Window, order: usize) -> Result<(f64, f64)> {
    let pairs: Vec<Vec<f64>> = window
        .elements
        .iter()
        .map(|el| el.chunks(2).map(|c| c.iter().sum::<f64>() / c.len() as f64).collect())
        .collect();
    let ranks = pairs.first().map_or(0, Vec::len);
    let fit = |terms: usize| {
        let width = 1 + terms * ranks;
        let mut rows = Vec::with_capacity(ranks * window.j.len());
        let mut y = Vec::with_capacity(rows.capacity());
        for (&j, el) in window.j.iter().zip(&pairs) {
            for (r, &x) in el.iter().enumerate() {
                let mut row = vec![0.0; width];
                row[0] = j;
                for n in 0..terms {
                    row[1 + r * terms + n] = j.powi(-(n as i32 + 1));
                }
                rows.push(row);
                y.push(x - j * alpha0);
            }
        }
        least_squares(&rows, &y).map(|f| (f.coefficients[0], f.std_errors[0]))
    };
    let lo = order.max(1);
    let fits = (lo..=lo + TAIL_TERMS).map(fit).collect::<Result<Vec<_>>>()?;
    let bound = |w: &[(f64, f64)]| 3.0 * (w[0].1 + w[1].1);
    Ok(match fits.windows(2).find(|w| (w[0].0 - w[1].0).abs() <= bound(w)) {
        Some(w) => (alpha0 + w[0].0, bound(w)),
        None => {
            let (d, se) = fits[TAIL_TERMS - 1];
            (alpha0 + d, (d - fits[TAIL_TERMS].0).abs() + 3.0 * se)
        }
    })
}

struct Known {
    alpha: f64,
    s: Vec<f64>,
    multiplicity: usize,
    ratio: f64,
}

fn extract_one(
    values: &[f64],
    distinct: &[f64],
    m: usize,
    mu: usize,
    known: &[Known],
    opts: &DecoupleOptions,
) -> Result<(Vec<SequenceEstimate>, ExtractionDiagnostic)> {
    let alpha = distinct[m];
    let top = *values.last().expect("non-empty");
    let j_max_guess = (top / alpha).floor() as usize;
    let first = select_resonant_indices(distinct, m, j_max_guess, opts.q_max)?;
    let j_max = ((top - first.delta) / alpha).floor().max(0.0) as usize;
    let set = select_resonant_indices(distinct, m, j_max, opts.q_max)?;
    let delta = set.delta;
    let j_hi = *set.indices.last().expect("non-empty");
    let j_lo = ((j_hi as f64 * opts.fit_start).ceil() as usize).max(1);
    let expected = 2 * mu + known.iter().map(|k| 2 * k.multiplicity).sum::<usize>();

    let mut window = Window {
        j: Vec::new(),
        elements: Vec::new(),
    };
    let mut in_window = 0;
    let mut skipped = 0;
    for &j in set.indices.iter().filter(|&&j| j >= j_lo) {
        in_window += 1;
        let jf = j as f64;
        let centre = jf * alpha;
        let mut el: Vec<f64> = values[range_of(values, centre - delta, centre + delta)].to_vec();
        if el.len() != expected {
            skipped += 1;
            continue;
        }
        for k in known {
            let p = eta(k.alpha, &k.s, k.ratio * jf);
            for _ in 0..2 * k.multiplicity {
                let (i, _) = el
                    .iter()
                    .enumerate()
                    .min_by(|a, b| (a.1 - p).abs().total_cmp(&(b.1 - p).abs()))
                    .expect("count checked");
                el.remove(i);
            }
        }
        window.j.push(jf);
        window.elements.push(el);
    }
    let diagnostic = ExtractionDiagnostic {
        alpha,
        delta,
        resonant_indices: set.indices.len(),
        window: (j_lo, j_hi),
        used: window.j.len(),
        skipped,
        near_rational: set.near_rational,
    };
    if in_window < opts.min_indices {
        return Err(Error::HorizonTooSmall {
            alpha,
            detail: format!(
                "{in_window} isolated indices in [{j_lo}, {j_hi}], need {}",
                opts.min_indices
            ),
        });
    }
    if window.j.len() < opts.min_indices {
        return Err(Error::Ambiguous {
            alpha,
            detail: format!(
                "{skipped} of {in_window} isolated indices do not hold {expected} values within δ = {delta:.4}"
            ),
            scatter: Vec::new(),
        });
    }
    let (alpha, alpha_unc) = joint_alpha(alpha, &window, opts.order)?;
    let mut classes = vec![Class {
        s: Vec::new(),
        unc: Vec::new(),
        ranks: 0..2 * mu,
    }];
    for level in 0..opts.order {
        classes = refine_classes(alpha, alpha_unc, &window, classes, level)?;
    }
    let sequences = classes
        .into_iter()
        .map(|c| SequenceEstimate {
            alpha,
            multiplicity: c.ranks.len() / 2,
            s: c.s,
            uncertainty: c.unc,
        })
        .collect();
    Ok((sequences, diagnostic))
}

/// Steps 2–4 for every recovered length, predecessors under ≺ first.
pub fn extract_coefficients(s: &SpectrumSequence, lengths: &[RecoveredLength], opts: &DecoupleOptions) -> Result<Extraction> {
    let values = sorted_values(s);
    if values.is_empty() {
        return Err(Error::InsufficientData("empty spectrum".into()));
    }
    let distinct: Vec<f64> = lengths.iter().map(|l| l.alpha).collect();
    // level = length of the longest ≺-chain below α
    let mut level = vec![0usize; distinct.len()];
    for m in 0..distinct.len() {
        for k in 0..m {
            if matches!(multiple_of(distinct[k], distinct[m]), Some(r) if r >= 2) {
                level[m] = level[m].max(level[k] + 1);
            }
        }
    }
    let max_level = level.iter().copied().max().unwrap_or(0);
    let mut done: Vec<Option<Vec<SequenceEstimate>>> = vec![None; distinct.len()];
    let mut diagnostics: Vec<Option<ExtractionDiagnostic>> = vec![None; distinct.len()];
    for lv in 0..=max_level {
        let batch: Vec<usize> = (0..distinct.len()).filter(|&m| level[m] == lv).collect();
        let results = batch
            .par_iter()
            .map(|&m| {
                let known: Vec<Known> = (0..distinct.len())
                    .filter_map(|k| {
                        let r = multiple_of(distinct[k], distinct[m]).filter(|&r| r >= 2)?;
                        Some((k, r))
                    })
                    .flat_map(|(k, r)| {
                        done[k].as_ref().expect("predecessor processed").iter().map(move |e| Known {
                            alpha: e.alpha,
                            s: e.s.clone(),
                            multiplicity: e.multiplicity,
                            ratio: r as f64,
                        })
                    })
                    .collect();
                extract_one(&values, &distinct, m, lengths[m].multiplicity, &known, opts)
            })
            .collect::<Vec<_>>();
        for (&m, r) in batch.iter().zip(results) {
            let (seqs, diag) = r?;
            done[m] = Some(seqs);
            diagnostics[m] = Some(diag);
        }
    }
    Ok(Extraction {
        sequences: done.into_iter().flatten().flatten().collect(),
        diagnostics: diagnostics.into_iter().flatten().collect(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flag {
    /// All s_1 vanish: λ = 0 and nothing beyond the perimeters is recoverable.
    NothingBeyondPerimeters,
    LambdaInconsistent,
    /// Two lengths whose ratio is rational at this horizon but not exactly.
    EffectivelyRational,
    /// Sequences that agree in α and every extracted s_n.
    UnresolvedMultiplicity,
    /// Invariant formulas need τ ≡ 1; only M and s_n are reported.
    NonConstantPotential,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentReport {
    pub alpha: f64,
    pub multiplicity: usize,
    pub perimeter: f64,
    pub s: Vec<f64>,
    pub s_uncertainty: Vec<f64>,
    pub lambda: Option<f64>,
    pub geodesic_total: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaEstimate {
    pub estimate: f64,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub consistent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub lengths: Vec<LengthDiagnostic>,
    pub guard: f64,
    pub extraction: Vec<ExtractionDiagnostic>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecoupleReport {
    pub schema_version: u32,
    /// M with multiplicities.
    pub lengths: Vec<RecoveredLength>,
    pub components: Vec<ComponentReport>,
    pub lambda: Option<LambdaEstimate>,
    /// 4πγ + ∫K
    pub euler_invariant: Option<f64>,
    pub area: Option<f64>,
    pub genus: Option<f64>,
    pub assumption: Assumption,
    pub flags: Vec<Flag>,
    pub diagnostics: Diagnostics,
}

impl DecoupleReport {
    /// ℓ, counting multiplicity.
    pub fn boundary_count(&self) -> usize {
        self.lengths.iter().map(|l| l.multiplicity).sum()
    }

    pub fn perimeters(&self) -> Vec<f64> {
        self.lengths
            .iter()
            .flat_map(|l| std::iter::repeat_n(2.0 * PI / l.alpha, l.multiplicity))
            .collect()
    }

    /// Per-boundary ∫k_g, repeated by multiplicity.
    pub fn geodesic_totals(&self) -> Option<Vec<f64>> {
        self.components
            .iter()
            .map(|c| c.geodesic_total.map(|g| std::iter::repeat_n(g, c.multiplicity)))
            .collect::<Option<Vec<_>>>()
            .map(|v| v.into_iter().flatten().collect())
    }

    pub fn has_flag(&self, flag: Flag) -> bool {
        self.flags.contains(&flag)
    }

    /// Human-readable summary.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "boundary components: {}", self.boundary_count());
        for l in &self.lengths {
            let _ = writeln!(
                out,
                "  alpha = {:.9}  perimeter = {:.9}  multiplicity = {}",
                l.alpha,
                2.0 * PI / l.alpha,
                l.multiplicity
            );
        }
        for c in &self.components {
            let s: Vec<String> = c
                .s
                .iter()
                .zip(&c.s_uncertainty)
                .map(|(s, u)| format!("{s:.6} ± {u:.1e}"))
                .collect();
            let _ = write!(out, "  component alpha = {:.6} (x{}): s = [{}]", c.alpha, c.multiplicity, s.join(", "));
            if let Some(g) = c.geodesic_total {
                let _ = write!(out, "  ∫k_g = {g:.6}");
            }
            out.push('\n');
        }
        match &self.lambda {
            Some(l) => {
                let _ = writeln!(
                    out,
                    "lambda = {:.6} (max deviation {:.2e}, {})",
                    l.estimate,
                    l.max_deviation,
                    if l.consistent { "consistent" } else { "inconsistent" }
                );
            }
            None => out.push_str("lambda: not recoverable\n"),
        }
        if let Some(e) = self.euler_invariant {
            let _ = writeln!(out, "4πγ + ∫K = {e:.6}");
        }
        if let Some(a) = self.area {
            let _ = writeln!(out, "area (sphere) = {a:.6}");
        }
        if let Some(g) = self.genus {
            let _ = writeln!(out, "genus (flat) = {g:.6}");
        }
        for f in &self.flags {
            let _ = writeln!(out, "flag: {}", serde_json::to_string(f).unwrap_or_default().trim_matches('"'));
        }
        out
    }
}

/// Invariant assembly from M and the extracted sequences.
pub fn recover_invariants(recovery: &LengthRecovery, extraction: &Extraction, opts: &DecoupleOptions) -> DecoupleReport {
    let mut flags = Vec::new();
    if extraction.diagnostics.iter().any(|d| !d.near_rational.is_empty()) {
        flags.push(Flag::EffectivelyRational);
    }
    if extraction.sequences.iter().any(|s| s.multiplicity > 1) {
        flags.push(Flag::UnresolvedMultiplicity);
    }
    let mut components: Vec<ComponentReport> = extraction
        .sequences
        .iter()
        .map(|e| ComponentReport {
            alpha: e.alpha,
            multiplicity: e.multiplicity,
            perimeter: 2.0 * PI / e.alpha,
            s: e.s.clone(),
            s_uncertainty: e.uncertainty.clone(),
            lambda: None,
            geodesic_total: None,
        })
        .collect();
    let ell: usize = recovery.count();
    let mut lambda = None;
    let mut euler_invariant = None;
    if !opts.constant_potential {
        flags.push(Flag::NonConstantPotential);
    } else if !components.is_empty() && components.iter().all(|c| !c.s.is_empty()) {
        let vanishing = components
            .iter()
            .all(|c| c.s[0].abs() <= (10.0 * c.s_uncertainty[0]).max(1e-9));
        if vanishing {
            flags.push(Flag::NothingBeyondPerimeters);
        } else {
            // s_1 = −λL/2 with L = 1/α
            for c in &mut components {
                c.lambda = Some(-2.0 * c.s[0] * c.alpha);
            }
            let weight: f64 = components.iter().map(|c| c.multiplicity as f64).sum();
            let estimate = components.iter().map(|c| c.lambda.unwrap() * c.multiplicity as f64).sum::<f64>() / weight;
            let max_deviation = components.iter().map(|c| (c.lambda.unwrap() - estimate).abs()).fold(0.0, f64::max);
            let tolerance = components
                .iter()
                .map(|c| 20.0 * c.alpha * c.s_uncertainty[0])
                .fold(1e-6 * (1.0 + estimate.abs()), f64::max);
            let consistent = max_deviation <= tolerance;
            if !consistent {
                flags.push(Flag::LambdaInconsistent);
            }
            lambda = Some(LambdaEstimate {
                estimate,
                max_deviation,
                tolerance,
                consistent,
            });
            if components.iter().all(|c| c.s.len() >= 2) {
                // s_2 = (λL/4π)∫k_g
                for c in &mut components {
                    c.geodesic_total = Some(4.0 * PI * c.s[1] * c.alpha / estimate);
                }
                let total: f64 = components
                    .iter()
                    .map(|c| c.geodesic_total.unwrap() * c.multiplicity as f64)
                    .sum();
                let chi_part = 2.0 * PI * (2.0 - ell as f64);
                let euler = chi_part - total;
                assert!(
                    (total + euler - chi_part).abs() <= 1e-9 * (1.0 + chi_part.abs() + total.abs()),
                    "Gauss–Bonnet identity violated"
                );
                euler_invariant = Some(euler);
            }
        }
    }
    let (area, genus) = match (opts.assumption, euler_invariant) {
        (Assumption::Sphere, Some(e)) => (Some(e), None),
        (Assumption::Flat, Some(e)) => (None, Some(e / (4.0 * PI))),
        _ => (None, None),
    };
    DecoupleReport {
        schema_version: SCHEMA_VERSION,
        lengths: recovery.lengths.clone(),
        components,
        lambda,
        euler_invariant,
        area,
        genus,
        assumption: opts.assumption,
        flags,
        diagnostics: Diagnostics {
            lengths: recovery.diagnostics.clone(),
            guard: recovery.guard,
            extraction: extraction.diagnostics.clone(),
        },
    }
}

/// Steps 1–4 and invariant assembly.
pub fn decouple(s: &SpectrumSequence, opts: &DecoupleOptions) -> Result<DecoupleReport> {
    if opts.order == 0 {
        return Err(Error::Config("expansion order must be at least 1".into()));
    }
    let recovery = recover_lengths(s, opts)?;
    let extraction = extract_coefficients(s, &recovery.lengths, opts)?;
    Ok(recover_invariants(&recovery, &extraction, opts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::{build_model_sequence, merge, ComponentModel};

    fn model(alpha: f64, s: &[f64], j_max: usize) -> SpectrumSequence {
        build_model_sequence(&ComponentModel::new(alpha, s.to_vec()), s.len(), j_max)
    }

    #[test]
    fn single_progression() {
        let s = model(1.0, &[-0.5, 0.5], 300);
        let r = recover_lengths(&s, &DecoupleOptions::default()).unwrap();
        assert_eq!(r.lengths.len(), 1);
        assert!((r.lengths[0].alpha - 1.0).abs() < 1e-9);
        assert_eq!(r.lengths[0].multiplicity, 1);
    }

    #[test]
    fn two_irrational_progressions() {
        let s = merge(&[model(1.0, &[-0.5, 0.5], 300), model(2f64.sqrt(), &[-0.3, -0.3], 220)]);
        let top = 300.0f64.min(220.0 * 2f64.sqrt());
        let s = SpectrumSequence::from_values(&s.values().into_iter().filter(|&v| v <= top).collect::<Vec<_>>());
        let r = recover_lengths(&s, &DecoupleOptions::default()).unwrap();
        assert_eq!(r.lengths.len(), 2, "{r:?}");
        assert!((r.lengths[1].alpha - 2f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn resonant_sets() {
        let one = select_resonant_indices(&[1.0], 0, 50, 12).unwrap();
        assert_eq!(one.indices, (1..=50).collect::<Vec<_>>());
        let div = select_resonant_indices(&[1.0, 2.0], 0, 50, 12).unwrap();
        assert!(div.indices.iter().all(|j| j % 2 == 1));
        assert_eq!(div.indices.len(), 25);
        // 2 sees 1 as a predecessor, nothing excluded
        assert_eq!(select_resonant_indices(&[1.0, 2.0], 1, 50, 12).unwrap().indices.len(), 50);
    }

    #[test]
    fn effectively_rational_pair_is_reported() {
        let set = select_resonant_indices(&[1.0, 1.5 + 1e-7], 0, 200, 12).unwrap();
        assert_eq!(set.near_rational.len(), 1);
        assert_eq!((set.near_rational[0].p, set.near_rational[0].q), (3, 2));
    }

    #[test]
    fn too_few_entries() {
        let s = model(1.0, &[], 50);
        assert!(matches!(
            recover_lengths(&s, &DecoupleOptions::default()),
            Err(Error::InsufficientData(_))
        ));
    }
}
