//! Periodic vs quasi-periodic dynamics from the eigenphases of the step.
//!
//! Every eigenvalue of a unitary lies on the unit circle, `λ = e^{2πiθ}`. If
//! every `θ_j` equals a rational `p_j/q_j`, any state returns exactly after
//! `T = lcm(q_j)` steps. If some `θ_j` is irrational there is no exact
//! period, but the state returns arbitrarily close to its start.
//!
//! Floating point cannot prove irrationality. A phase counts as rational
//! when some `p/q` with `q ≤ q_max` lies within `eps` of it, so the
//! classification always depends on `(q_max, eps)`.

use nalgebra::linalg::SymmetricEigen;
use nalgebra::DMatrix;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WalkError};
use crate::evolution::{trajectory, GlobalUnitary, WalkerState};
use crate::C64;

pub const DEFAULT_Q_MAX: u64 = 10_000;
pub const DEFAULT_EPS: f64 = 1e-9;

/// Allowed deviation of `|λ|` from 1.
pub const UNIT_MODULUS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dynamics {
    Periodic,
    QuasiPeriodic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumAnalysis {
    /// Eigenvalues sorted by `arg_over_2pi`.
    pub eigenvalues: Vec<C64>,
    /// `arg(λ)/2π` normalized to `[0, 1)`.
    pub args_over_2pi: Vec<f64>,
    /// `(p, q)` in lowest terms with `0 ≤ p < q`, when found.
    pub rational: Vec<Option<(u64, u64)>>,
    pub classification: Option<Dynamics>,
    /// `lcm(q_j)`, present iff periodic.
    pub predicted_period: Option<u128>,
    /// Smallest `t` with `Uᵗ = e^{iφ} I` for some phase `φ`.
    pub period_up_to_phase: Option<u128>,
    pub q_max: u64,
    pub eps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Periods {
    pub full: u128,
    pub up_to_phase: u128,
}

/// One eigenvalue in the serialized spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenRecord {
    pub re: f64,
    pub im: f64,
    pub arg_over_2pi: f64,
    pub p: Option<u64>,
    pub q: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<EigenRecord>,
    pub classification: Option<Dynamics>,
    /// Decimal string; periods can exceed the exact range of JSON numbers.
    pub predicted_period: Option<String>,
    pub period_up_to_phase: Option<String>,
    pub q_max: u64,
    pub eps: f64,
    pub note: String,
}

/// Eigenvalues and normalized phases of `u`; rational fields left empty.
pub fn eigen_spectrum(u: &GlobalUnitary) -> Result<SpectrumAnalysis> {
    let raw = normal_eigenvalues(&u.to_dense(), 0)?;

    let mut pairs = Vec::with_capacity(raw.len());
    for &value in raw.iter() {
        let modulus = value.norm();
        if modulus.is_nan() || (modulus - 1.0).abs() > UNIT_MODULUS_TOL {
            return Err(WalkError::NotUnitModulus {
                value: format!("{value}"),
                modulus,
            });
        }
        pairs.push((normalized_phase(value), value));
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    Ok(SpectrumAnalysis {
        eigenvalues: pairs.iter().map(|p| p.1).collect(),
        args_over_2pi: pairs.iter().map(|p| p.0).collect(),
        rational: vec![None; pairs.len()],
        classification: None,
        predicted_period: None,
        period_up_to_phase: None,
        q_max: 0,
        eps: 0.0,
    })
}

/// Full pipeline: eigenphases, rational approximation, classification and
/// period prediction.
pub fn analyze(u: &GlobalUnitary, q_max: u64, eps: f64) -> Result<SpectrumAnalysis> {
    let mut spec = eigen_spectrum(u)?;
    spec.rational = spec
        .args_over_2pi
        .iter()
        .map(|&a| rationalize(a, q_max, eps))
        .collect();
    spec.q_max = q_max;
    spec.eps = eps;
    spec.classification = Some(classify(&spec, q_max, eps));
    if let Some(p) = predict_period(&spec)? {
        spec.predicted_period = Some(p.full);
        spec.period_up_to_phase = Some(p.up_to_phase);
    }
    Ok(spec)
}

/// Splitting angles for [`normal_eigenvalues`]; irrational-looking so that
/// exact collisions `θ_a + θ_b = 2α` are unlikely on structured spectra.
const SPLIT_ANGLES: [f64; 4] = [0.737_912_451, 2.093_485_117, 1.318_205_929, 2.871_331_046];

/// Hermitian eigenvalues closer than this are refined as one cluster.
const CLUSTER_GAP: f64 = 1e-6;

/// Eigenvalues of a normal matrix.
///
/// For an angle `α`, `H = (e^{−iα}M + e^{iα}M†)/2` is Hermitian with the same
/// eigenvectors as `M` and eigenvalues `cos(θ − α)`. Eigenvalues of `M` are
/// then Rayleigh quotients of those eigenvectors. Two phases with
/// `θ_a + θ_b ≈ 2α` collide in `H`; such clusters are compressed onto their
/// subspace and split again with the next angle. The Hermitian solver always
/// converges; nalgebra's complex Schur stalls on some walk unitaries
/// (`|G| = 5`, `δ = 0.85`).
fn normal_eigenvalues(m: &DMatrix<C64>, depth: usize) -> Result<Vec<C64>> {
    let k = m.nrows();
    if k == 1 {
        return Ok(vec![m[(0, 0)]]);
    }
    let mean = m.trace() / k as f64;
    let spread = m
        .iter()
        .enumerate()
        .map(|(i, &v)| if i % (k + 1) == 0 { v - mean } else { v })
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    if spread < 1e-10 {
        return Ok(vec![mean; k]);
    }
    let &alpha = SPLIT_ANGLES.get(depth).ok_or(WalkError::EigenFailure)?;
    let rot = C64::from_polar(1.0, -alpha);
    let h = (m * rot + m.adjoint() * rot.conj()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::try_new(h, f64::EPSILON, 0).ok_or(WalkError::EigenFailure)?;

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut out = Vec::with_capacity(k);
    let mut start = 0;
    while start < k {
        let mut end = start + 1;
        while end < k && eig.eigenvalues[order[end]] - eig.eigenvalues[order[end - 1]] < CLUSTER_GAP
        {
            end += 1;
        }
        let cols: Vec<_> = order[start..end]
            .iter()
            .map(|&i| eig.eigenvectors.column(i))
            .collect();
        let v = DMatrix::from_columns(&cols);
        let block = v.adjoint() * m * &v;
        if end - start == 1 {
            out.push(block[(0, 0)]);
        } else {
            out.extend(normal_eigenvalues(&block, depth + 1)?);
        }
        start = end;
    }
    Ok(out)
}

fn normalized_phase(z: C64) -> f64 {
    let theta = z.arg() / std::f64::consts::TAU;
    let theta = if theta < 0.0 { theta + 1.0 } else { theta };
    if theta >= 1.0 {
        0.0
    } else {
        theta
    }
}

/// Smallest-denominator `p/q` with `|x − p/q| ≤ eps` and `q ≤ q_max`.
///
/// Such a fraction is always a best rational approximation of `x`, so it
/// suffices to walk the convergents and intermediate fractions of the
/// continued fraction of `x` in order of increasing denominator. The result
/// is reduced modulo 1, so `1/1` is reported as `0/1`.
pub fn rationalize(x: f64, q_max: u64, eps: f64) -> Option<(u64, u64)> {
    if !x.is_finite() || q_max == 0 {
        return None;
    }
    let x = x.rem_euclid(1.0);
    let hit = |p: u64, q: u64| (x - p as f64 / q as f64).abs() <= eps;
    let reduce = |p: u64, q: u64| {
        let g = p.gcd(&q);
        let (p, q) = (p / g, q / g);
        (p % q, q)
    };

    if hit(0, 1) {
        return Some((0, 1));
    }
    if hit(1, 1) {
        return Some((0, 1));
    }

    // h/k of the two previous convergents; the a₀ = 0 term gives 0/1.
    let (mut h_prev, mut k_prev) = (1u64, 0u64);
    let (mut h, mut k) = (0u64, 1u64);
    let mut rest = x;
    for _ in 0..64 {
        if rest <= f64::EPSILON {
            break;
        }
        let r = 1.0 / rest;
        let a = r.floor();
        rest = r - a;
        let a = if a >= q_max as f64 {
            q_max
        } else {
            (a as u64).max(1)
        };
        // intermediate fractions, ending with the next convergent at m = a
        for m in 1..=a {
            let q = k_prev + m * k;
            if q > q_max {
                return None;
            }
            let p = h_prev + m * h;
            if hit(p, q) {
                return Some(reduce(p, q));
            }
        }
        (h_prev, h) = (h, h_prev + a * h);
        (k_prev, k) = (k, k_prev + a * k);
    }
    None
}

/// Classification under `(q_max, eps)`: periodic iff every eigenphase
/// rationalizes.
pub fn classify(spec: &SpectrumAnalysis, q_max: u64, eps: f64) -> Dynamics {
    let all = spec
        .args_over_2pi
        .iter()
        .all(|&a| rationalize(a, q_max, eps).is_some());
    if all {
        Dynamics::Periodic
    } else {
        Dynamics::QuasiPeriodic
    }
}

/// `T = lcm(q_j)` and the global-phase period
/// `lcm(denominator(θ_j − θ_1))`, from the rationalized phases.
///
/// Returns `Ok(None)` when some phase has no rational form.
pub fn predict_period(spec: &SpectrumAnalysis) -> Result<Option<Periods>> {
    let Some(fracs) = spec.rational.iter().copied().collect::<Option<Vec<_>>>() else {
        return Ok(None);
    };
    let Some(&(p0, q0)) = fracs.first() else {
        return Ok(None);
    };
    let mut full = 1u128;
    let mut up_to_phase = 1u128;
    for &(p, q) in &fracs {
        // p/q is already in lowest terms, so t_j = q_j.
        full = checked_lcm(full, q as u128)?;
        let num = (p as i128 * q0 as i128 - p0 as i128 * q as i128).unsigned_abs();
        let den = q as u128 * q0 as u128;
        let diff_den = den / num.gcd(&den);
        up_to_phase = checked_lcm(up_to_phase, diff_den)?;
    }
    Ok(Some(Periods { full, up_to_phase }))
}

fn checked_lcm(a: u128, b: u128) -> Result<u128> {
    (a / a.gcd(&b))
        .checked_mul(b)
        .ok_or(WalkError::PeriodOverflow)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Revival {
    pub t: usize,
    pub fidelity: f64,
}

/// First `t ≥ 1` with `|⟨s0|Uᵗ s0⟩| ≥ threshold`, searching up to `t_max`.
pub fn revival_time(
    u: &GlobalUnitary,
    s0: &WalkerState,
    threshold: f64,
    t_max: usize,
) -> Result<Option<Revival>> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(WalkError::InvalidArgument(format!(
            "fidelity threshold must lie in (0, 1], got {threshold}"
        )));
    }
    if t_max < 1 {
        return Err(WalkError::InvalidArgument(
            "t_max must be at least 1".into(),
        ));
    }
    Ok(trajectory(u, s0)?
        .enumerate()
        .skip(1)
        .take(t_max)
        .map(|(t, s)| Revival {
            t,
            fidelity: s0.fidelity(&s),
        })
        .find(|r| r.fidelity >= threshold))
}

impl SpectrumAnalysis {
    pub fn report(&self) -> SpectrumReport {
        let eigenvalues = self
            .eigenvalues
            .iter()
            .zip(&self.args_over_2pi)
            .zip(&self.rational)
            .map(|((z, &arg), r)| EigenRecord {
                re: z.re,
                im: z.im,
                arg_over_2pi: arg,
                p: r.map(|r| r.0),
                q: r.map(|r| r.1),
            })
            .collect();
        SpectrumReport {
            eigenvalues,
            classification: self.classification,
            predicted_period: self.predicted_period.map(|t| t.to_string()),
            period_up_to_phase: self.period_up_to_phase.map(|t| t.to_string()),
            q_max: self.q_max,
            eps: self.eps,
            note: format!(
                "classification is relative to rational detection with q <= {} and tolerance {:e}",
                self.q_max, self.eps
            ),
        }
    }
}
