//! Brute-force exact diagonalization of the TFIM on small chains (`L <= 14`).
//!
//! Basis states are bit strings in the `sz` product basis, bit `j` set meaning spin `j` down
//! (`sz_j = -1`). The Hamiltonian `-sum sx_j sx_{j+1} - g sum sz_j` commutes with the parity
//! `P = prod sz_j`, so each parity sector (`2^(L-1)` states) is solved separately: densely for
//! small sectors, by Lanczos with full reorthogonalization otherwise. The sector index of a
//! state `s` is `s >> 1`; bit 0 is fixed by the parity.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const MAX_SITES: usize = 14;
/// Sectors up to this dimension are diagonalized densely.
const DENSE_SECTOR_DIM: usize = 256;
/// Parity-sector ground energies closer than this are treated as a degenerate pair.
pub const DEGENERACY_GAP: f64 = 1e-10;
const RESIDUAL_TOL: f64 = 1e-12;
const MAX_KRYLOV: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Periodic,
    Open,
}

/// Ground state of one chain.
#[derive(Debug, Clone)]
pub struct EdSolution {
    pub l: usize,
    pub g: f64,
    pub boundary: Boundary,
    pub energy: f64,
    /// Amplitudes over all `2^L` basis states.
    pub amplitudes: Vec<f64>,
    /// The two parity sectors are degenerate and `amplitudes` is their symmetric
    /// combination with `<Mx> >= 0`.
    pub symmetrized: bool,
}

/// Periodic-chain ground state.
pub fn ground_state(l: usize, g: f64) -> Result<EdSolution> {
    ground_state_with(l, g, Boundary::Periodic)
}

pub fn ground_state_with(l: usize, g: f64, boundary: Boundary) -> Result<EdSolution> {
    if l > MAX_SITES {
        return Err(Error::DimensionTooLarge { l, max: MAX_SITES });
    }
    if l < 2 {
        return Err(Error::InvalidInput(format!("chain needs L >= 2, got {l}")));
    }
    if !(g >= 0.0) || !g.is_finite() {
        return Err(Error::InvalidInput(format!(
            "coupling must be >= 0, got {g}"
        )));
    }
    let even = Sector::new(l, g, boundary, 0);
    let odd = Sector::new(l, g, boundary, 1);
    let (e_even, v_even) = even.lowest()?;
    let (e_odd, v_odd) = odd.lowest()?;

    let symmetrized = (e_even - e_odd).abs() < DEGENERACY_GAP;
    let dim = 1usize << l;
    let mut amplitudes = vec![0.0; dim];
    let energy;
    if symmetrized {
        energy = e_even.min(e_odd);
        let full_even = even.embed(&v_even);
        let full_odd = odd.embed(&v_odd);
        // <Mx> of the symmetric combination is the even-odd cross term
        let cross = mx_expectation_between(l, &full_even, &full_odd);
        let sign = if cross < 0.0 { -1.0 } else { 1.0 };
        let norm = std::f64::consts::FRAC_1_SQRT_2;
        for (a, (e, o)) in amplitudes.iter_mut().zip(full_even.iter().zip(&full_odd)) {
            *a = norm * (e + sign * o);
        }
    } else if e_even < e_odd {
        energy = e_even;
        amplitudes = even.embed(&v_even);
    } else {
        energy = e_odd;
        amplitudes = odd.embed(&v_odd);
    }

    Ok(EdSolution {
        l,
        g,
        boundary,
        energy,
        amplitudes,
        symmetrized,
    })
}

fn bonds(l: usize, boundary: Boundary) -> Vec<(usize, usize)> {
    let n = match boundary {
        Boundary::Periodic => l,
        Boundary::Open => l - 1,
    };
    (0..n).map(|j| (j, (j + 1) % l)).collect()
}

/// `H v` in the full `2^L` space, matrix-free.
pub fn apply_hamiltonian(l: usize, g: f64, boundary: Boundary, v: &[f64]) -> Vec<f64> {
    let dim = 1usize << l;
    assert_eq!(v.len(), dim);
    let bonds = bonds(l, boundary);
    let mut out = vec![0.0; dim];
    for (s, o) in out.iter_mut().enumerate() {
        let down = s.count_ones() as f64;
        let mut acc = -g * (l as f64 - 2.0 * down) * v[s];
        for &(i, j) in &bonds {
            acc -= v[s ^ (1 << i) ^ (1 << j)];
        }
        *o = acc;
    }
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// One parity sector of the chain Hamiltonian.
struct Sector {
    l: usize,
    g: f64,
    parity: u32,
    bonds: Vec<(usize, usize)>,
}

impl Sector {
    fn new(l: usize, g: f64, boundary: Boundary, parity: u32) -> Self {
        Self {
            l,
            g,
            parity,
            bonds: bonds(l, boundary),
        }
    }

    fn dim(&self) -> usize {
        1 << (self.l - 1)
    }

    #[inline]
    fn state(&self, idx: usize) -> usize {
        (idx << 1) | (((idx.count_ones() + self.parity) & 1) as usize)
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        let lf = self.l as f64;
        for (idx, o) in out.iter_mut().enumerate() {
            let s = self.state(idx);
            let down = s.count_ones() as f64;
            let mut acc = -self.g * (lf - 2.0 * down) * v[idx];
            for &(i, j) in &self.bonds {
                acc -= v[(s ^ (1 << i) ^ (1 << j)) >> 1];
            }
            *o = acc;
        }
    }

    fn embed(&self, v: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; 1 << self.l];
        for (idx, &a) in v.iter().enumerate() {
            full[self.state(idx)] = a;
        }
        full
    }

    fn lowest(&self) -> Result<(f64, Vec<f64>)> {
        if self.dim() <= DENSE_SECTOR_DIM {
            Ok(self.lowest_dense())
        } else {
            self.lowest_lanczos()
        }
    }

    fn lowest_dense(&self) -> (f64, Vec<f64>) {
        let n = self.dim();
        let mut h = DMatrix::<f64>::zeros(n, n);
        let mut e = vec![0.0; n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            self.apply(&e, &mut col);
            e[j] = 0.0;
            for i in 0..n {
                h[(i, j)] = col[i];
            }
        }
        let eig = SymmetricEigen::new(h);
        let k = eig.eigenvalues.imin();
        let v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
        (eig.eigenvalues[k], fix_sign(v))
    }

    fn lowest_lanczos(&self) -> Result<(f64, Vec<f64>)> {
        let n = self.dim();
        let mut rng =
            ChaCha8Rng::seed_from_u64(0x5eed_0000 + self.l as u64 * 2 + self.parity as u64);
        let mut q: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        let qn = norm(&q);
        q.iter_mut().for_each(|x| *x /= qn);

        let mut basis: Vec<Vec<f64>> = vec![q];
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        let mut w = vec![0.0; n];
        let mut residual = f64::INFINITY;

        for k in 0..MAX_KRYLOV.min(n) {
            self.apply(&basis[k], &mut w);
            let alpha = dot(&w, &basis[k]);
            alphas.push(alpha);
            // full reorthogonalization, twice
            for _ in 0..2 {
                for b in &basis {
                    let c = dot(&w, b);
                    w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
                }
            }
            let beta = norm(&w);

            let converged_check = k % 8 == 7 || beta < 1e-13 || k + 1 == MAX_KRYLOV.min(n);
            if converged_check {
                let (theta, y) = tridiagonal_lowest(&alphas, &betas);
                residual = (beta * y[y.len() - 1]).abs();
                if residual < RESIDUAL_TOL || beta < 1e-13 {
                    let mut v = vec![0.0; n];
                    for (coef, b) in y.iter().zip(&basis) {
                        v.iter_mut().zip(b).for_each(|(x, bb)| *x += coef * bb);
                    }
                    let vn = norm(&v);
                    v.iter_mut().for_each(|x| *x /= vn);
                    return Ok((theta, fix_sign(v)));
                }
            }
            if k + 1 == MAX_KRYLOV.min(n) {
                break;
            }
            betas.push(beta);
            basis.push(w.iter().map(|x| x / beta).collect());
        }
        Err(Error::EigenNonConvergence { residual })
    }
}

/// Lowest eigenpair of the symmetric tridiagonal matrix `(alphas, betas)`.
fn tridiagonal_lowest(alphas: &[f64], betas: &[f64]) -> (f64, Vec<f64>) {
    let k = alphas.len();
    let mut t = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alphas[i];
        if i + 1 < k {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let j = eig.eigenvalues.imin();
    (
        eig.eigenvalues[j],
        eig.eigenvectors.column(j).iter().copied().collect(),
    )
}

/// Deterministic global sign: largest-magnitude amplitude positive.
fn fix_sign(mut v: Vec<f64>) -> Vec<f64> {
    let big = v
        .iter()
        .copied()
        .fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
    if big < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    v
}

/// `<a| Mx |b>` in the full space.
fn mx_expectation_between(l: usize, a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (s, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for i in 0..l {
            acc += x * b[s ^ (1 << i)];
        }
    }
    acc
}

/// `<sx_i sx_j>` for one site pair.
pub fn xx_pair(sol: &EdSolution, i: usize, j: usize) -> f64 {
    let mask = (1usize << i) ^ (1usize << j);
    if mask == 0 {
        return dot(&sol.amplitudes, &sol.amplitudes);
    }
    sol.amplitudes
        .iter()
        .enumerate()
        .map(|(s, &x)| x * sol.amplitudes[s ^ mask])
        .sum()
}

/// `<sx_0 sx_n>` averaged over all translations (valid pairs only for open chains).
pub fn ed_xx_correlator(sol: &EdSolution, n: usize) -> Result<f64> {
    let l = sol.l;
    let max_n = match sol.boundary {
        Boundary::Periodic => l / 2,
        Boundary::Open => l - 1,
    };
    if n < 1 || n > max_n {
        return Err(Error::InvalidInput(format!(
            "separation must lie in 1..={max_n}, got {n}"
        )));
    }
    let pairs: Vec<(usize, usize)> = match sol.boundary {
        Boundary::Periodic => (0..l).map(|i| (i, (i + n) % l)).collect(),
        Boundary::Open => (0..l - n).map(|i| (i, i + n)).collect(),
    };
    let total: f64 = pairs.iter().map(|&(i, j)| xx_pair(sol, i, j)).sum();
    Ok(total / pairs.len() as f64)
}

/// `(<Mx>, <Mx^2>)` evaluated exactly in the `2^L` space.
pub fn ed_mx_moments(sol: &EdSolution) -> (f64, f64) {
    let l = sol.l;
    let mean = mx_expectation_between(l, &sol.amplitudes, &sol.amplitudes);
    let mut second = l as f64 * dot(&sol.amplitudes, &sol.amplitudes);
    for i in 0..l {
        for j in 0..l {
            if i != j {
                second += xx_pair(sol, i, j);
            }
        }
    }
    (mean, second)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_limit() {
        assert!(matches!(
            ground_state(15, 1.0).unwrap_err(),
            Error::DimensionTooLarge { l: 15, .. }
        ));
        assert!(ground_state(1, 1.0).is_err());
    }

    #[test]
    fn classical_limit_energy_and_moments() {
        for l in [4usize, 6, 9, 12] {
            let sol = ground_state(l, 0.0).unwrap();
            assert!(
                (sol.energy + l as f64).abs() < 1e-10,
                "L={l}: {}",
                sol.energy
            );
            assert!(sol.symmetrized);
            let (m, m2) = ed_mx_moments(&sol);
            assert!((m - l as f64).abs() < 1e-8, "L={l}: <Mx>={m}");
            assert!((m2 - (l * l) as f64).abs() < 1e-8);
            for n in 1..=l / 2 {
                assert!((ed_xx_correlator(&sol, n).unwrap() - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn two_site_open_chain_closed_form() {
        for g in [0.0, 0.3, 1.0, 2.5] {
            let sol = ground_state_with(2, g, Boundary::Open).unwrap();
            let c = ed_xx_correlator(&sol, 1).unwrap();
            let want = 1.0 / (1.0 + 4.0 * g * g).sqrt();
            assert!((c - want).abs() < 1e-12, "g={g}: {c} vs {want}");
            assert!((sol.energy + (1.0 + 4.0 * g * g).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn polarized_limit() {
        let sol = ground_state(8, 1e6).unwrap();
        assert!(ed_xx_correlator(&sol, 1).unwrap().abs() < 1e-6);
        let (m, m2) = ed_mx_moments(&sol);
        assert!(m.abs() < 1e-6);
        // nearest-neighbour pairs leave 2 L C(1) ~ L / g on top of the local term
        assert!((m2 - 8.0 - 8.0 / 1e6).abs() < 1e-9);
    }

    #[test]
    fn lanczos_agrees_with_dense_path() {
        // L = 10 goes through Lanczos (sector dim 512); compare against a dense solve.
        let sol = ground_state(10, 0.8).unwrap();
        let sector = Sector::new(10, 0.8, Boundary::Periodic, 0);
        let (e_dense, _) = sector.lowest_dense();
        let (e_lanczos, _) = sector.lowest_lanczos().unwrap();
        assert!((e_dense - e_lanczos).abs() < 1e-10);
        assert!(sol.energy <= e_dense + 1e-10);
    }

    #[test]
    fn normalized_and_translation_invariant() {
        let sol = ground_state(11, 1.3).unwrap();
        assert!((norm(&sol.amplitudes) - 1.0).abs() < 1e-12);
        for n in 1..=3 {
            let first = xx_pair(&sol, 0, n);
            for i in 1..11 {
                assert!((xx_pair(&sol, i, (i + n) % 11) - first).abs() < 1e-10);
            }
            // reflection C(n) = C(L - n)
            assert!((xx_pair(&sol, 0, 11 - n) - first).abs() < 1e-10);
        }
    }

    #[test]
    fn separation_precondition() {
        let sol = ground_state(6, 1.0).unwrap();
        assert!(ed_xx_correlator(&sol, 0).is_err());
        assert!(ed_xx_correlator(&sol, 4).is_err());
    }
}
