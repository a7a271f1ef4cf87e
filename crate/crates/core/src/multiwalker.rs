//! Two indistinguishable walkers (photons) under the same linear step.
//!
//! Modes are the flat walker basis states. A single photon in mode `i`
//! transforms like the single-walker amplitude vector, `a_i† -> Σ_k U_{ki} a_k†`
//! (column `i` of `U`), so a product of two creation operators goes to a
//! bilinear combination of pairs and the two-photon coefficients evolve
//! linearly.
//!
//! Coefficients are stored over unordered pairs `{k, l}`, `k ≤ l`: `c_{kl}` is
//! the Fock amplitude of `|1_k 1_l⟩` for `k < l` and of `|2_k⟩` for `k = l`.

use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::error::{Result, WalkError};
use crate::evolution::{GlobalUnitary, WalkerState};
use crate::{C64, NORM_TOL};

/// Probability below which a post-selection outcome counts as impossible.
pub const ZERO_PROBABILITY: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct TwoWalkerState {
    n_modes: usize,
    coeffs: Vec<C64>,
}

/// Offset of the unordered pair `{k, l}` (0-based, `k ≤ l`) in upper-
/// triangular row order.
fn pair_offset(n: usize, k: usize, l: usize) -> usize {
    debug_assert!(k <= l && l < n);
    k * n - k * (k + 1) / 2 + l
}

fn pair_count(n: usize) -> usize {
    n * (n + 1) / 2
}

fn check_mode(mode: usize, n_modes: usize) -> Result<()> {
    if mode == 0 || mode > n_modes {
        return Err(WalkError::ModeOutOfRange { mode, n_modes });
    }
    Ok(())
}

impl TwoWalkerState {
    /// `a_i† a_j† |0⟩`, normalized; `i = j` gives `|2_i⟩`. Modes are 1-based.
    pub fn input(n_modes: usize, i: usize, j: usize) -> Result<Self> {
        check_mode(i, n_modes)?;
        check_mode(j, n_modes)?;
        let (k, l) = if i <= j {
            (i - 1, j - 1)
        } else {
            (j - 1, i - 1)
        };
        let mut coeffs = vec![C64::new(0.0, 0.0); pair_count(n_modes)];
        coeffs[pair_offset(n_modes, k, l)] = C64::new(1.0, 0.0);
        Ok(TwoWalkerState { n_modes, coeffs })
    }

    /// From coefficients in pair order (see [`TwoWalkerState::pairs`]).
    pub fn new(n_modes: usize, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() != pair_count(n_modes) {
            return Err(WalkError::DimensionMismatch {
                expected: pair_count(n_modes),
                found: coeffs.len(),
            });
        }
        let s = TwoWalkerState { n_modes, coeffs };
        let norm = s.norm();
        if norm.is_nan() || (norm - 1.0).abs() > NORM_TOL {
            return Err(WalkError::NotNormalized { norm });
        }
        Ok(s)
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn coefficients(&self) -> &[C64] {
        &self.coeffs
    }

    /// Unordered 1-based mode pairs in storage order.
    pub fn pairs(n_modes: usize) -> impl Iterator<Item = (usize, usize)> {
        (1..=n_modes).flat_map(move |k| (k..=n_modes).map(move |l| (k, l)))
    }

    /// Fock amplitude of the pair `{i, j}` (1-based, any order).
    pub fn amplitude(&self, i: usize, j: usize) -> Result<C64> {
        check_mode(i, self.n_modes)?;
        check_mode(j, self.n_modes)?;
        let (k, l) = if i <= j {
            (i - 1, j - 1)
        } else {
            (j - 1, i - 1)
        };
        Ok(self.coeffs[pair_offset(self.n_modes, k, l)])
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Probability of finding each mode occupied by `n` photons, `n ∈ {0,1,2}`.
    pub fn occupation_probabilities(&self, mode: usize) -> Result<[f64; 3]> {
        check_mode(mode, self.n_modes)?;
        let m = mode - 1;
        let mut p = [0.0; 3];
        for ((k, l), c) in Self::pairs(self.n_modes).zip(&self.coeffs) {
            let occ = [k - 1, l - 1].iter().filter(|&&x| x == m).count();
            p[occ] += c.norm_sqr();
        }
        Ok(p)
    }

    /// Symmetric `S` with `state = Σ_{i,j} S_ij a_i† a_j† |0⟩`.
    fn to_symmetric(&self) -> DMatrix<C64> {
        let n = self.n_modes;
        let sqrt2 = std::f64::consts::SQRT_2;
        let mut s = DMatrix::zeros(n, n);
        for k in 0..n {
            for l in k..n {
                let c = self.coeffs[pair_offset(n, k, l)];
                if k == l {
                    // (a†)²|0⟩ = √2 |2⟩
                    s[(k, k)] = c / sqrt2;
                } else {
                    s[(k, l)] = c / 2.0;
                    s[(l, k)] = c / 2.0;
                }
            }
        }
        s
    }

    fn from_symmetric(s: &DMatrix<C64>) -> Vec<C64> {
        let n = s.nrows();
        let sqrt2 = std::f64::consts::SQRT_2;
        let mut coeffs = Vec::with_capacity(pair_count(n));
        for k in 0..n {
            for l in k..n {
                coeffs.push(if k == l {
                    s[(k, k)] * sqrt2
                } else {
                    s[(k, l)] + s[(l, k)]
                });
            }
        }
        coeffs
    }
}

/// Applies the two-photon map to raw pair coefficients (no normalization
/// requirement). Linear in `coeffs`.
pub fn two_photon_map(u: &DMatrix<C64>, coeffs: &[C64]) -> Result<Vec<C64>> {
    let n = u.nrows();
    if coeffs.len() != pair_count(n) {
        return Err(WalkError::DimensionMismatch {
            expected: pair_count(n),
            found: coeffs.len(),
        });
    }
    let state = TwoWalkerState {
        n_modes: n,
        coeffs: coeffs.to_vec(),
    };
    let s = state.to_symmetric();
    let evolved = u * s * u.transpose();
    Ok(TwoWalkerState::from_symmetric(&evolved))
}

/// One step of two-photon evolution under `u`, `S' = U S Uᵀ` using the
/// sparse rows of `u`.
pub fn evolve_two(u: &GlobalUnitary, s: &TwoWalkerState) -> Result<TwoWalkerState> {
    let n = s.n_modes;
    if u.dim() != n {
        return Err(WalkError::DimensionMismatch {
            expected: u.dim(),
            found: n,
        });
    }
    let sym = s.to_symmetric();
    let mut us = DMatrix::<C64>::zeros(n, n);
    for r in 0..n {
        for (k, v) in u.row(r) {
            for c in 0..n {
                us[(r, c)] += v * sym[(k, c)];
            }
        }
    }
    let mut out = DMatrix::<C64>::zeros(n, n);
    for c in 0..n {
        let mut col = out.column_mut(c);
        for (k, v) in u.row(c) {
            col.axpy(v, &us.column(k), C64::new(1.0, 0.0));
        }
    }
    Ok(TwoWalkerState {
        n_modes: n,
        coeffs: TwoWalkerState::from_symmetric(&out),
    })
}

/// [`evolve_two`] with a precomputed dense matrix, for long series.
pub fn evolve_two_dense(u: &DMatrix<C64>, s: &TwoWalkerState) -> Result<TwoWalkerState> {
    if u.nrows() != s.n_modes {
        return Err(WalkError::DimensionMismatch {
            expected: u.nrows(),
            found: s.n_modes,
        });
    }
    Ok(TwoWalkerState {
        n_modes: s.n_modes,
        coeffs: two_photon_map(u, &s.coeffs)?,
    })
}

/// Two-photon states at `t = 0..=t_max`.
pub fn evolve_two_series(
    u: &GlobalUnitary,
    s0: &TwoWalkerState,
    t_max: usize,
) -> Result<Vec<TwoWalkerState>> {
    let mut out = Vec::with_capacity(t_max + 1);
    out.push(s0.clone());
    for _ in 0..t_max {
        let next = evolve_two(u, out.last().unwrap())?;
        out.push(next);
    }
    Ok(out)
}

/// Outcome of detecting exactly one photon in mode `m` after one step.
#[derive(Debug, Clone, PartialEq)]
pub struct PostSelection {
    pub mode: usize,
    pub probability: f64,
    /// Normalized state of the other photon; `None` for a zero-probability
    /// outcome.
    pub conditional_state: Option<WalkerState>,
    /// `M'_k = U_{mi}U_{kj} + U_{mj}U_{ki}` for every output mode `k`,
    /// including `k = m` (both photons in `m`).
    pub raw: Vec<C64>,
}

/// Evolves `a_i† a_j† |0⟩` by `u` and conditions on exactly one photon in
/// mode `m` (1-based modes).
///
/// The `k = m` component of the raw vector belongs to the doubly occupied
/// outcome `|2_m⟩`, which is not a single-photon detection, so it is left
/// out of the conditional state.
pub fn post_select(u: &GlobalUnitary, i: usize, j: usize, m: usize) -> Result<PostSelection> {
    let n = u.dim();
    for mode in [i, j, m] {
        check_mode(mode, n)?;
    }
    let (i0, j0, m0) = (i - 1, j - 1, m - 1);
    let raw: Vec<C64> = (0..n)
        .map(|k| u.entry(m0, i0) * u.entry(k, j0) + u.entry(m0, j0) * u.entry(k, i0))
        .collect();

    // Fock amplitude of |1_m 1_k⟩ is M'_k for distinct inputs; for i = j the
    // normalized input (a_i†)²/√2 scales it by 1/√2.
    let scale = if i == j {
        std::f64::consts::FRAC_1_SQRT_2
    } else {
        1.0
    };
    let conditional: Vec<C64> = raw
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            if k == m0 {
                C64::new(0.0, 0.0)
            } else {
                v * scale
            }
        })
        .collect();

    // The evolved state has unit Fock norm; dividing by it keeps the result
    // meaningful for inputs built from non-exact unitaries.
    let evolved = evolve_two(u, &TwoWalkerState::input(n, i, j)?)?;
    let total = evolved.norm().powi(2);
    let weight: f64 = conditional.iter().map(|c| c.norm_sqr()).sum();
    let probability = weight / total;

    let conditional_state = if probability < ZERO_PROBABILITY {
        None
    } else {
        let norm = weight.sqrt();
        Some(WalkerState::from_raw(
            conditional.into_iter().map(|c| c / norm).collect(),
        ))
    };
    Ok(PostSelection {
        mode: m,
        probability: if probability < ZERO_PROBABILITY {
            0.0
        } else {
            probability
        },
        conditional_state,
        raw,
    })
}

/// Probability that both photons leave in mode `m`.
pub fn bunching_probability(u: &GlobalUnitary, i: usize, j: usize, m: usize) -> Result<f64> {
    let evolved = evolve_two(u, &TwoWalkerState::input(u.dim(), i, j)?)?;
    Ok(evolved.amplitude(m, m)?.norm_sqr() / evolved.norm().powi(2))
}

/// Meyer-Wallach measure `1 − (1/N) Σ_i tr(ρ_i²)`, with `ρ_i` the reduced
/// state of mode `i` over occupations `{0, 1, 2}`, by explicit partial trace.
pub fn meyer_wallach_two(s: &TwoWalkerState) -> f64 {
    let n = s.n_modes;
    let mut purity_sum = 0.0;
    for mode in 0..n {
        // environment configuration (sorted remaining photons) -> amplitudes
        // indexed by this mode's occupation
        let mut blocks: HashMap<Vec<usize>, [C64; 3]> = HashMap::new();
        for ((k, l), &c) in TwoWalkerState::pairs(n).zip(&s.coeffs) {
            let photons = [k - 1, l - 1];
            let occ = photons.iter().filter(|&&p| p == mode).count();
            let rest: Vec<usize> = photons.iter().copied().filter(|&p| p != mode).collect();
            blocks.entry(rest).or_insert([C64::new(0.0, 0.0); 3])[occ] += c;
        }
        let mut rho = [[C64::new(0.0, 0.0); 3]; 3];
        for amps in blocks.values() {
            for a in 0..3 {
                for b in 0..3 {
                    rho[a][b] += amps[a] * amps[b].conj();
                }
            }
        }
        let purity: f64 = (0..3)
            .flat_map(|a| (0..3).map(move |b| (a, b)))
            .map(|(a, b)| (rho[a][b] * rho[b][a]).re)
            .sum();
        purity_sum += purity;
    }
    1.0 - purity_sum / n as f64
}
