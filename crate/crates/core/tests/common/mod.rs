//! Independent reference computations shared by the integration tests.
//!
//! Nothing here calls into the code paths it is used to check: walker
//! rewriting works on a map of basis terms, two-photon expansion multiplies
//! out creation-operator monomials, and the Meyer-Wallach oracle traces the
//! full 2^N occupation space.
#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use qwalk::coin::CoinAssignment;
use qwalk::graph::Graph;
use qwalk::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Printed two-position matrix, times 1/√2.
pub fn printed_4x4() -> DMatrix<C64> {
    #[rustfmt::skip]
    let rows = [
        1.0, 1.0, 0.0, 0.0,
        0.0, 0.0, 1.0, 1.0,
        1.0, -1.0, 0.0, 0.0,
        0.0, 0.0, 1.0, -1.0,
    ];
    DMatrix::from_row_slice(4, 4, &rows).map(|v: f64| c(v / 2f64.sqrt()))
}

/// Printed three-position matrix, times 1/√2 (the √2 entries become 1).
pub fn printed_9x9() -> DMatrix<C64> {
    let r2 = 2f64.sqrt();
    #[rustfmt::skip]
    let rows = [
        1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 0.0, 0.0, 0.0, r2,  0.0, 0.0,
        1.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 0.0, r2,  0.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0,
        0.0, 0.0, r2,  0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 1.0, 0.0, -1.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, -1.0,
    ];
    DMatrix::from_row_slice(9, 9, &rows).map(|v: f64| c(v / r2))
}

pub fn max_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn max_vec_diff(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Walker-operator rewriting: applies `w(x,c)† -> Σ_{j∈n_x} A^(x)_{c,j} w(j,x)†`
/// term by term. Only defined on physical terms.
pub fn rewrite_step(
    g: &Graph,
    coins: &CoinAssignment,
    state: &BTreeMap<(usize, usize), C64>,
) -> BTreeMap<(usize, usize), C64> {
    let mut out = BTreeMap::new();
    for (&(x, coin_value), &amp) in state {
        let row = g
            .in_coins(x)
            .iter()
            .position(|&cc| cc == coin_value)
            .expect("rewriting engine only handles physical terms");
        for (k, &j) in g.neighborhood(x).iter().enumerate() {
            *out.entry((j, x)).or_insert(C64::new(0.0, 0.0)) += amp * coins.coin(x).get(row, k);
        }
    }
    out
}

/// Dense vector in flat `(x-1)·d + c` order from a term map.
pub fn terms_to_vec(d: usize, terms: &BTreeMap<(usize, usize), C64>) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); d * d];
    for (&(x, cc), &a) in terms {
        v[(x - 1) * d + cc - 1] += a;
    }
    v
}

/// Explicit Meyer-Wallach for a single excitation: embeds the state in the
/// 2^N qubit occupation space and traces out all but one qubit.
pub fn meyer_wallach_partial_trace(amps: &[C64]) -> f64 {
    let n = amps.len();
    assert!(n <= 20);
    let mut full = vec![C64::new(0.0, 0.0); 1 << n];
    for (i, a) in amps.iter().enumerate() {
        full[1 << i] = *a;
    }
    let mut purity_sum = 0.0;
    for mode in 0..n {
        let bit = 1usize << mode;
        let mut rho = [[C64::new(0.0, 0.0); 2]; 2];
        for env in 0..(1usize << n) {
            if env & bit != 0 {
                continue;
            }
            for a in 0..2 {
                for b in 0..2 {
                    let ia = env | (a * bit);
                    let ib = env | (b * bit);
                    rho[a][b] += full[ia] * full[ib].conj();
                }
            }
        }
        let mut p = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                p += (rho[a][b] * rho[b][a]).re;
            }
        }
        purity_sum += p;
    }
    1.0 - purity_sum / n as f64
}

/// Smallest-q scan: first `q ≤ q_max` with `|x − round(xq)/q| ≤ eps`.
pub fn scan_rational(x: f64, q_max: u64, eps: f64) -> Option<(u64, u64)> {
    for q in 1..=q_max {
        let p = (x * q as f64).round();
        if (x - p / q as f64).abs() <= eps {
            let mut p = p as u64;
            let mut qq = q;
            let g = gcd(p, qq);
            p /= g;
            qq /= g;
            return Some((p % qq, qq));
        }
    }
    None
}

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Creation-operator polynomial over ordered monomials `a_p† a_q†`.
pub type Poly = BTreeMap<(usize, usize), C64>;

/// Expands `(Σ_p U_{p,i} a_p†)(Σ_q U_{q,j} a_q†)` into sorted monomials
/// (0-based modes).
pub fn expand_pair(u: &DMatrix<C64>, i: usize, j: usize) -> Poly {
    let n = u.nrows();
    let mut poly = Poly::new();
    for p in 0..n {
        for q in 0..n {
            let key = if p <= q { (p, q) } else { (q, p) };
            *poly.entry(key).or_insert(C64::new(0.0, 0.0)) += u[(p, i)] * u[(q, j)];
        }
    }
    poly
}

/// Fock amplitudes (pair order `k ≤ l`) of a polynomial acting on vacuum.
pub fn poly_to_fock(n: usize, poly: &Poly) -> Vec<C64> {
    let mut out = Vec::new();
    for k in 0..n {
        for l in k..n {
            let coeff = poly.get(&(k, l)).copied().unwrap_or(C64::new(0.0, 0.0));
            out.push(if k == l { coeff * 2f64.sqrt() } else { coeff });
        }
    }
    out
}

/// Brute-force two-photon evolution of Fock coefficients (pair order), by
/// rewriting each input monomial.
pub fn fock_evolve(u: &DMatrix<C64>, coeffs: &[C64]) -> Vec<C64> {
    let n = u.nrows();
    let mut total = Poly::new();
    let mut idx = 0;
    for k in 0..n {
        for l in k..n {
            let amp = coeffs[idx];
            idx += 1;
            if amp == C64::new(0.0, 0.0) {
                continue;
            }
            // |1_k 1_l> = a_k† a_l† |0>, |2_k> = (a_k†)²/√2 |0>
            let weight = if k == l { amp / 2f64.sqrt() } else { amp };
            for (key, v) in expand_pair(u, k, l) {
                *total.entry(key).or_insert(C64::new(0.0, 0.0)) += weight * v;
            }
        }
    }
    poly_to_fock(n, &total)
}

pub fn gaussian(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.random::<f64>().max(1e-300);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

pub fn random_complex(rng: &mut impl Rng) -> C64 {
    C64::new(gaussian(rng), gaussian(rng))
}

/// Haar-ish random unitary: QR of a complex Gaussian matrix with the
/// diagonal phases of R divided out.
pub fn random_unitary(n: usize, rng: &mut impl Rng) -> DMatrix<C64> {
    let z = DMatrix::from_fn(n, n, |_, _| random_complex(rng));
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn random_state(n: usize, rng: &mut impl Rng) -> Vec<C64> {
    let v: Vec<C64> = (0..n).map(|_| random_complex(rng)).collect();
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|a| a / norm).collect()
}
