//! Separable oracles for DtN spectra: the disk and annulus with constant
//! potential (Bessel functions) and the disk with a radial potential (shooting).

use ode_solvers::{Dopri5, OutputType, System, Vector2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bessel::{bessel_i, bessel_j, bessel_k_all, bessel_y_all, ratio_i, ratio_j, Scaled};
use crate::error::{Error, Result};
use crate::sequences::{SpectralValue, SpectrumSequence};

/// Distance from a Dirichlet pencil value below which λ is rejected.
pub const DEFAULT_PENCIL_MARGIN: f64 = 1e-6;

/// Largest √|λ| accepted by the annulus solver (series evaluation limit).
pub const ANNULUS_MAX_SQRT_LAMBDA: f64 = 12.0;

/// Starting radius of the radial shooting.
pub const RADIAL_START: f64 = 1e-6;

/// Relative tolerance of the radial shooting.
pub const RADIAL_RTOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Geometry {
    DiskConstant,
    AnnulusConstant { inner_radius: f64 },
    /// τ(r) = Σ c_k r^k
    DiskRadial { tau: Vec<f64> },
}

fn mode_entries(n: usize, values: &[f64]) -> impl Iterator<Item = SpectralValue> + '_ {
    let copies = if n == 0 { 1 } else { 2 };
    values.iter().enumerate().flat_map(move |(component, &v)| {
        std::iter::repeat_n(SpectralValue::tagged(v, Some(n), Some(component)), copies)
    })
}

/// σ_n = √λ J_n′(√λ)/J_n(√λ) on the unit disk, n = 0 once, n ≥ 1 twice.
pub fn disk_constant_spectrum(lambda: f64, n_max: usize) -> Result<SpectrumSequence> {
    disk_constant_spectrum_with(lambda, n_max, DEFAULT_PENCIL_MARGIN)
}

pub fn disk_constant_spectrum_with(lambda: f64, n_max: usize, margin: f64) -> Result<SpectrumSequence> {
    if let Some(mode) = disk_pencil_mode(lambda, n_max, margin) {
        return Err(Error::Pencil { lambda, mode });
    }
    let entries: Vec<SpectralValue> = (0..=n_max)
        .into_par_iter()
        .map(|n| mode_entries(n, &[disk_mode(lambda, n)]).collect::<Vec<_>>())
        .flatten()
        .collect();
    Ok(SpectrumSequence::new(entries))
}

/// One disk eigenvalue; x J_n′/J_n = n − x J_{n+1}/J_n.
pub fn disk_mode(lambda: f64, n: usize) -> f64 {
    if lambda > 0.0 {
        let x = lambda.sqrt();
        n as f64 - x * ratio_j(n, x)
    } else if lambda < 0.0 {
        let x = (-lambda).sqrt();
        n as f64 + x * ratio_i(n, x)
    } else {
        n as f64
    }
}

fn disk_pencil_mode(lambda: f64, n_max: usize, margin: f64) -> Option<usize> {
    if lambda <= margin {
        return None;
    }
    (0..=n_max).find(|&n| {
        let sigma = disk_mode(lambda, n);
        // σ_n decreases in λ except across a pole at a Dirichlet value
        let jump = disk_mode(lambda + margin, n) > disk_mode((lambda - margin).max(0.0), n);
        jump || 2.0 * lambda / sigma.abs() < margin
    })
}

/// Basis function values (f(1), f′(1), f(R), f′(R)) normalized per column.
fn normalized_column(entries: [Scaled; 4]) -> [f64; 4] {
    let reference = entries
        .iter()
        .filter(|s| s.mantissa != 0.0)
        .map(|s| s.scale)
        .fold(f64::NEG_INFINITY, f64::max);
    entries.map(|s| if s.mantissa == 0.0 { 0.0 } else { s.relative_to(reference) })
}

fn scaled_from(v: f64) -> Scaled {
    Scaled::new(v, 0.0)
}

/// d/dr f(x r) = x f′(z) from f_n(z), f_{n+1}(z): f′ = (n/z) f_n + sign·f_{n+1}.
fn derivative(n: usize, z: f64, x: f64, fn_: Scaled, fn1: Scaled, sign: f64) -> Scaled {
    let m = fn_.mantissa * n as f64 / z + sign * fn1.relative_to(fn_.scale);
    Scaled::new(m * x, fn_.scale)
}

struct AnnulusBasis {
    columns: Vec<[[f64; 4]; 2]>,
}

fn annulus_basis(lambda: f64, radius: f64, n_max: usize) -> Result<AnnulusBasis> {
    let x = lambda.abs().sqrt();
    if x > ANNULUS_MAX_SQRT_LAMBDA {
        return Err(Error::Unsupported(format!(
            "annulus solver supports |lambda| <= {}, got {lambda}",
            ANNULUS_MAX_SQRT_LAMBDA * ANNULUS_MAX_SQRT_LAMBDA
        )));
    }
    let points = [1.0, radius];
    let columns = if lambda == 0.0 {
        (0..=n_max)
            .map(|n| {
                let nf = n as f64;
                if n == 0 {
                    let one = [scaled_from(1.0), scaled_from(0.0), scaled_from(1.0), scaled_from(0.0)];
                    let log = [scaled_from(0.0), scaled_from(1.0), scaled_from(radius.ln()), scaled_from(1.0 / radius)];
                    [normalized_column(one), normalized_column(log)]
                } else {
                    let lr = radius.ln();
                    let up = [
                        Scaled::new(1.0, 0.0),
                        Scaled::new(nf, 0.0),
                        Scaled::new(1.0, nf * lr),
                        Scaled::new(nf, (nf - 1.0) * lr),
                    ];
                    let down = [
                        Scaled::new(1.0, 0.0),
                        Scaled::new(-nf, 0.0),
                        Scaled::new(1.0, -nf * lr),
                        Scaled::new(-nf, -(nf + 1.0) * lr),
                    ];
                    [normalized_column(up), normalized_column(down)]
                }
            })
            .collect()
    } else {
        let oscillatory = lambda > 0.0;
        let singular: Vec<Vec<Scaled>> = points
            .iter()
            .map(|r| {
                if oscillatory {
                    bessel_y_all(n_max + 1, x * r)
                } else {
                    bessel_k_all(n_max + 1, x * r)
                }
            })
            .collect();
        (0..=n_max)
            .map(|n| {
                let mut regular = [Scaled::new(0.0, 0.0); 4];
                let mut irregular = [Scaled::new(0.0, 0.0); 4];
                for (i, r) in points.iter().enumerate() {
                    let z = x * r;
                    let (a, b) = if oscillatory {
                        (bessel_j(n, z), bessel_j(n + 1, z))
                    } else {
                        (bessel_i(n, z), bessel_i(n + 1, z))
                    };
                    let sign_regular = if oscillatory { -1.0 } else { 1.0 };
                    regular[2 * i] = a;
                    regular[2 * i + 1] = derivative(n, z, x, a, b, sign_regular);
                    let (c, d) = (singular[i][n], singular[i][n + 1]);
                    irregular[2 * i] = c;
                    irregular[2 * i + 1] = derivative(n, z, x, c, d, -1.0);
                }
                [normalized_column(regular), normalized_column(irregular)]
            })
            .collect()
    };
    Ok(AnnulusBasis { columns })
}

/// Determinant of the Dirichlet matrix of mode n, relative to its terms.
fn dirichlet_det(cols: &[[f64; 4]; 2]) -> (f64, f64) {
    let (f, g) = (cols[0], cols[1]);
    let a = f[0] * g[2] - g[0] * f[2];
    let size = (f[0] * g[2]).abs() + (g[0] * f[2]).abs();
    (a, size)
}

/// Roots of det(M − σN) = 0 with rows u′(1) = σu(1) and −u′(R) = σu(R).
fn annulus_mode(cols: &[[f64; 4]; 2], lambda: f64, mode: usize) -> Result<[f64; 2]> {
    let (f, g) = (cols[0], cols[1]);
    let (n11, n12, n21, n22) = (f[0], g[0], f[2], g[2]);
    let (m11, m12, m21, m22) = (f[1], g[1], -f[3], -g[3]);
    let (a, size) = dirichlet_det(cols);
    if a.abs() <= 1e-13 * size {
        return Err(Error::Pencil { lambda, mode });
    }
    let b = -(m11 * n22 + m22 * n11 - m12 * n21 - m21 * n12);
    let c = m11 * m22 - m12 * m21;
    let disc = (b * b - 4.0 * a * c).max(0.0);
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let (r1, r2) = if q == 0.0 { (0.0, 0.0) } else { (q / a, c / q) };
    Ok(if r1 <= r2 { [r1, r2] } else { [r2, r1] })
}

/// Flat annulus R < r < 1 with constant potential; two eigenvalues per mode
/// (tagged component 0 for the lower root and 1 for the upper).
pub fn annulus_constant_spectrum(lambda: f64, radius: f64, n_max: usize) -> Result<SpectrumSequence> {
    annulus_constant_spectrum_with(lambda, radius, n_max, DEFAULT_PENCIL_MARGIN)
}

pub fn annulus_constant_spectrum_with(lambda: f64, radius: f64, n_max: usize, margin: f64) -> Result<SpectrumSequence> {
    if !(radius > 0.0 && radius < 1.0) {
        return Err(Error::Config(format!("inner radius must lie in (0, 1), got {radius}")));
    }
    if let Some(mode) = annulus_pencil_mode(lambda, radius, n_max, margin)? {
        return Err(Error::Pencil { lambda, mode });
    }
    let basis = annulus_basis(lambda, radius, n_max)?;
    let per_mode: Vec<Vec<SpectralValue>> = basis
        .columns
        .par_iter()
        .enumerate()
        .map(|(n, cols)| annulus_mode(cols, lambda, n).map(|roots| mode_entries(n, &roots).collect()))
        .collect::<Result<_>>()?;
    Ok(SpectrumSequence::new(per_mode.into_iter().flatten().collect()))
}

fn annulus_pencil_mode(lambda: f64, radius: f64, n_max: usize, margin: f64) -> Result<Option<usize>> {
    // Dirichlet values of −Δ are positive
    if lambda <= margin {
        return Ok(None);
    }
    let lo = annulus_basis(lambda - margin, radius, n_max)?;
    let hi = annulus_basis(lambda + margin, radius, n_max)?;
    let mid = annulus_basis(lambda, radius, n_max)?;
    Ok((0..=n_max).find(|&n| {
        let (a_lo, _) = dirichlet_det(&lo.columns[n]);
        let (a_hi, _) = dirichlet_det(&hi.columns[n]);
        let (a, size) = dirichlet_det(&mid.columns[n]);
        a_lo.signum() != a_hi.signum() || a.abs() <= 1e-13 * size
    }))
}

fn eval_poly(coeffs: &[f64], r: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c)
}

/// v_ss + 2n v_s + λτ(e^s)e^{2s} v = 0 for u = r^n v, s = ln r,
/// integrated in q = s − ln r₀ ∈ [0, ln(1/r₀)].
struct RadialSystem<'a> {
    lambda: f64,
    tau: &'a [f64],
    n: f64,
    r0: f64,
}

impl System<f64, Vector2<f64>> for RadialSystem<'_> {
    fn system(&self, q: f64, y: &Vector2<f64>, dy: &mut Vector2<f64>) {
        let r = self.r0 * q.exp();
        dy[0] = y[1];
        dy[1] = -2.0 * self.n * y[1] - self.lambda * eval_poly(self.tau, r) * r * r * y[0];
    }
}

/// (v(1), v′(1)) of the regular solution with v(0) = 1.
fn shoot(lambda: f64, tau: &[f64], n: usize) -> Result<(f64, f64)> {
    let r0 = RADIAL_START;
    let tau0 = eval_poly(tau, 0.0);
    // leading Frobenius terms: v = 1 − λτ(0) r²/(4(n+1))
    let v0 = 1.0 - lambda * tau0 * r0 * r0 / (4.0 * (n as f64 + 1.0));
    let vs0 = -lambda * tau0 * r0 * r0 / (2.0 * (n as f64 + 1.0));
    let system = RadialSystem {
        lambda,
        tau,
        n: n as f64,
        r0,
    };
    let mut solver = Dopri5::from_param(
        system,
        0.0,
        -r0.ln(),
        1.0,
        Vector2::new(v0, vs0),
        RADIAL_RTOL,
        1e-14,
        0.9,
        0.04,
        0.2,
        10.0,
        1.0,
        0.0,
        1_000_000,
        u32::MAX,
        OutputType::Sparse,
    );
    solver
        .integrate()
        .map_err(|e| Error::Degenerate(format!("radial shooting failed for mode {n}: {e}")))?;
    let y = solver.y_out().last().copied().expect("integrator records the endpoint");
    Ok((y[0], y[1]))
}

/// One radial eigenvalue σ_n = u′(1)/u(1).
pub fn radial_mode(lambda: f64, tau: &[f64], n: usize) -> Result<f64> {
    if lambda == 0.0 {
        return Ok(n as f64);
    }
    let (v, vs) = shoot(lambda, tau, n)?;
    if v.abs() <= 1e-8 * vs.abs() {
        return Err(Error::Pencil { lambda, mode: n });
    }
    Ok(n as f64 + vs / v)
}

/// Unit disk with τ(r) = Σ c_k r^k by shooting.
pub fn disk_radial_spectrum(lambda: f64, tau: &[f64], n_max: usize) -> Result<SpectrumSequence> {
    disk_radial_spectrum_with(lambda, tau, n_max, DEFAULT_PENCIL_MARGIN)
}

pub fn disk_radial_spectrum_with(lambda: f64, tau: &[f64], n_max: usize, margin: f64) -> Result<SpectrumSequence> {
    if tau.is_empty() {
        return Err(Error::Config("radial profile needs at least one coefficient".into()));
    }
    if let Some(mode) = radial_pencil_mode(lambda, tau, n_max, margin)? {
        return Err(Error::Pencil { lambda, mode });
    }
    let per_mode: Vec<Vec<SpectralValue>> = (0..=n_max)
        .into_par_iter()
        .map(|n| radial_mode(lambda, tau, n).map(|s| mode_entries(n, &[s]).collect()))
        .collect::<Result<_>>()?;
    Ok(SpectrumSequence::new(per_mode.into_iter().flatten().collect()))
}

fn radial_pencil_mode(lambda: f64, tau: &[f64], n_max: usize, margin: f64) -> Result<Option<usize>> {
    if lambda == 0.0 {
        return Ok(None);
    }
    let found: Vec<Option<usize>> = (0..=n_max)
        .into_par_iter()
        .map(|n| -> Result<Option<usize>> {
            let (lo, _) = shoot(lambda - margin, tau, n)?;
            let (hi, _) = shoot(lambda + margin, tau, n)?;
            let (v, vs) = shoot(lambda, tau, n)?;
            let near = v.abs() <= 1e-8 * vs.abs();
            Ok((lo.signum() != hi.signum() || near).then_some(n))
        })
        .collect::<Result<_>>()?;
    Ok(found.into_iter().flatten().next())
}

/// True iff λ is at least `margin` away from every Dirichlet pencil value
/// detectable in modes 0..=n_max.
pub fn dirichlet_pencil_guard(lambda: f64, geometry: &Geometry, n_max: usize, margin: f64) -> bool {
    match geometry {
        Geometry::DiskConstant => disk_pencil_mode(lambda, n_max, margin).is_none(),
        Geometry::AnnulusConstant { inner_radius } => {
            matches!(annulus_pencil_mode(lambda, *inner_radius, n_max, margin), Ok(None))
        }
        Geometry::DiskRadial { tau } => matches!(radial_pencil_mode(lambda, tau, n_max, margin), Ok(None)),
    }
}

/// Forward spectrum for any supported geometry.
pub fn solve(lambda: f64, geometry: &Geometry, n_max: usize, margin: f64) -> Result<SpectrumSequence> {
    match geometry {
        Geometry::DiskConstant => disk_constant_spectrum_with(lambda, n_max, margin),
        Geometry::AnnulusConstant { inner_radius } => annulus_constant_spectrum_with(lambda, *inner_radius, n_max, margin),
        Geometry::DiskRadial { tau } => disk_radial_spectrum_with(lambda, tau, n_max, margin),
    }
}

/// The `count` smallest eigenvalues. Modes are added until every value
/// below the lowest eigenvalue of the first omitted mode is present.
pub fn leading_eigenvalues(lambda: f64, geometry: &Geometry, count: usize, margin: f64) -> Result<SpectrumSequence> {
    let mut n_max = count / 2 + 8;
    loop {
        let s = solve(lambda, geometry, n_max + 1, margin)?;
        let threshold = s
            .entries()
            .iter()
            .filter(|e| e.mode == Some(n_max + 1))
            .map(|e| e.value)
            .fold(f64::INFINITY, f64::min);
        let complete: Vec<SpectralValue> = s.entries().iter().copied().filter(|e| e.value < threshold).collect();
        if complete.len() >= count {
            return Ok(SpectrumSequence::new(complete).truncated(count));
        }
        if n_max > 100_000 {
            return Err(Error::Unsupported(format!("{count} eigenvalues need more than {n_max} modes")));
        }
        n_max *= 2;
    }
}
