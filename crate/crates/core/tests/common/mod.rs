//! Truncated two-mode Fock-space simulation used as an independent oracle.
//!
//! Mode 1 is the probe, mode 2 the conjugate. Amplitudes are stored as
//! `psi[m * dim + n]` for `|m⟩|n⟩`. Nothing here touches the covariance
//! formalism of the library.

#![allow(dead_code)]

use num_complex::Complex64;

pub const FOCK_DIM: usize = 30;

#[derive(Clone, Debug)]
pub struct FockState {
    pub dim: usize,
    pub psi: Vec<Complex64>,
}

impl FockState {
    /// Coherent state `|β⟩` on the probe, vacuum on the conjugate.
    pub fn coherent_probe(dim: usize, beta: Complex64) -> Self {
        let mut psi = vec![Complex64::new(0.0, 0.0); dim * dim];
        let mut c = Complex64::new((-0.5 * beta.norm_sqr()).exp(), 0.0);
        for m in 0..dim {
            psi[m * dim] = c;
            c = c * beta / ((m + 1) as f64).sqrt();
        }
        FockState { dim, psi }
    }

    pub fn vacuum(dim: usize) -> Self {
        Self::coherent_probe(dim, Complex64::new(0.0, 0.0))
    }

    fn idx(&self, m: usize, n: usize) -> usize {
        m * self.dim + n
    }

    /// `K ψ` with `K = a₁†a₂† − a₁a₂`; amplitude pushed past the cutoff is dropped.
    fn generator(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let d = self.dim;
        let mut out = vec![Complex64::new(0.0, 0.0); d * d];
        for m in 0..d {
            for n in 0..d {
                let c = psi[self.idx(m, n)];
                if c.norm_sqr() == 0.0 {
                    continue;
                }
                if m + 1 < d && n + 1 < d {
                    out[self.idx(m + 1, n + 1)] += c * (((m + 1) * (n + 1)) as f64).sqrt();
                }
                if m > 0 && n > 0 {
                    out[self.idx(m - 1, n - 1)] -= c * ((m * n) as f64).sqrt();
                }
            }
        }
        out
    }

    /// Applies `exp(r K)` by its Taylor series.
    pub fn two_mode_squeeze(&self, r: f64) -> Self {
        let mut total = self.psi.clone();
        let mut term = self.psi.clone();
        for k in 1..200 {
            term = self.generator(&term);
            let scale = r / k as f64;
            let mut norm = 0.0;
            for (t, acc) in term.iter_mut().zip(total.iter_mut()) {
                *t *= scale;
                *acc += *t;
                norm += t.norm_sqr();
            }
            if norm < 1e-34 {
                break;
            }
        }
        FockState {
            dim: self.dim,
            psi: total,
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.psi.iter().map(|c| c.norm_sqr()).sum()
    }

    fn lower(&self, mode: usize) -> Vec<Complex64> {
        let d = self.dim;
        let mut out = vec![Complex64::new(0.0, 0.0); d * d];
        for m in 0..d {
            for n in 0..d {
                let (k, src) = if mode == 0 { (m, (m + 1, n)) } else { (n, (m, n + 1)) };
                if src.0 < d && src.1 < d {
                    out[self.idx(m, n)] = self.psi[self.idx(src.0, src.1)] * ((k + 1) as f64).sqrt();
                }
            }
        }
        out
    }

    fn raise(&self, mode: usize) -> Vec<Complex64> {
        let d = self.dim;
        let mut out = vec![Complex64::new(0.0, 0.0); d * d];
        for m in 0..d {
            for n in 0..d {
                let (k, dst) = if mode == 0 { (m, (m + 1, n)) } else { (n, (m, n + 1)) };
                if dst.0 < d && dst.1 < d {
                    out[self.idx(dst.0, dst.1)] = self.psi[self.idx(m, n)] * ((k + 1) as f64).sqrt();
                }
            }
        }
        out
    }

    /// `R ψ` for the quadratures `(x₁, p₁, x₂, p₂)` with vacuum variance 1/2.
    fn quadrature_vectors(&self) -> [Vec<Complex64>; 4] {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let i = Complex64::new(0.0, 1.0);
        let mut out: [Vec<Complex64>; 4] = Default::default();
        for mode in 0..2 {
            let (lo, hi) = (self.lower(mode), self.raise(mode));
            out[2 * mode] = lo.iter().zip(&hi).map(|(a, b)| (a + b) * s).collect();
            out[2 * mode + 1] = lo.iter().zip(&hi).map(|(a, b)| (b - a) * i * s).collect();
        }
        out
    }

    fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
    }

    /// Means and symmetrized covariance of `(x₁, p₁, x₂, p₂)`.
    pub fn moments(&self) -> ([f64; 4], [[f64; 4]; 4]) {
        let r = self.quadrature_vectors();
        let mut mean = [0.0; 4];
        for k in 0..4 {
            mean[k] = Self::inner(&self.psi, &r[k]).re;
        }
        let mut cov = [[0.0; 4]; 4];
        for j in 0..4 {
            for k in 0..4 {
                // ½⟨{R_j, R_k}⟩ = Re⟨R_j ψ | R_k ψ⟩ for Hermitian R
                cov[j][k] = Self::inner(&r[j], &r[k]).re - mean[j] * mean[k];
            }
        }
        (mean, cov)
    }

    /// `(⟨n₁⟩, ⟨n₂⟩, Var n₁, Var n₂, Cov(n₁, n₂))` from the Fock populations.
    pub fn photon_moments(&self) -> [f64; 5] {
        let (mut n1, mut n2, mut n11, mut n22, mut n12) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for m in 0..self.dim {
            for n in 0..self.dim {
                let p = self.psi[self.idx(m, n)].norm_sqr();
                let (a, b) = (m as f64, n as f64);
                n1 += p * a;
                n2 += p * b;
                n11 += p * a * a;
                n22 += p * b * b;
                n12 += p * a * b;
            }
        }
        [n1, n2, n11 - n1 * n1, n22 - n2 * n2, n12 - n1 * n2]
    }

    /// Population beyond `cutoff` photons in either mode, as a truncation check.
    pub fn tail_weight(&self, cutoff: usize) -> f64 {
        let mut w = 0.0;
        for m in 0..self.dim {
            for n in 0..self.dim {
                if m >= cutoff || n >= cutoff {
                    w += self.psi[self.idx(m, n)].norm_sqr();
                }
            }
        }
        w
    }
}

/// Gaussian-side twin of [`FockState::coherent_probe`] followed by the squeezer.
pub fn gaussian_counterpart(r: f64, beta: Complex64) -> twinbeam::gaussian::GaussianState {
    use twinbeam::amplifier::{tms_symplectic, TwoModeSqueezerSpec};
    use twinbeam::gaussian::{apply_symplectic, displace, vacuum_state, ModeLabel};
    let (p, c) = (ModeLabel::probe(0), ModeLabel::conjugate(0));
    let vac = vacuum_state(vec![p.clone(), c.clone()]).unwrap();
    let seeded = displace(
        &vac,
        &p,
        std::f64::consts::SQRT_2 * beta.re,
        std::f64::consts::SQRT_2 * beta.im,
    )
    .unwrap();
    let op = tms_symplectic(&TwoModeSqueezerSpec::new(r.cosh().powi(2), p, c).unwrap());
    apply_symplectic(&seeded, &op).unwrap()
}

/// Largest deviation between oracle and Gaussian moments:
/// `(covariance and mean entries, photon statistics)`.
pub fn oracle_deviation(r: f64, beta: Complex64) -> (f64, f64) {
    use twinbeam::gaussian::{photon_stats, ModeLabel};
    let fock = FockState::coherent_probe(FOCK_DIM, beta).two_mode_squeeze(r);
    let (mean, cov) = fock.moments();
    let g = gaussian_counterpart(r, beta);

    let mut quad: f64 = 0.0;
    for (j, row) in cov.iter().enumerate() {
        quad = quad.max((mean[j] - g.mean()[j]).abs());
        for (k, v) in row.iter().enumerate() {
            quad = quad.max((v - g.cov()[(j, k)]).abs());
        }
    }

    let stats = photon_stats(&g, &[ModeLabel::probe(0), ModeLabel::conjugate(0)]).unwrap();
    let [n1, n2, v1, v2, c12] = fock.photon_moments();
    let photon = [
        n1 - stats.means[0],
        n2 - stats.means[1],
        v1 - stats.covariance[(0, 0)],
        v2 - stats.covariance[(1, 1)],
        c12 - stats.covariance[(0, 1)],
    ]
    .iter()
    .fold(0.0f64, |m, d| m.max(d.abs()));
    (quad, photon)
}
