//! Pseudo-spectral evaluation of the nonlinear terms of the scaled system.
//!
//! The scaled unknowns are un-scaled (`n⁺/α₁`, `u⁺/β₁`, `n⁻/α₄`, `u⁻/β₄`),
//! the physical terms are formed pointwise from spectral derivatives and the
//! pointwise closure, and the result is scaled back (`α₁F₁`, `β₁F₂`, `α₄F₃`,
//! `β₄F₄`). Inputs and outputs are dealiased.

use num_complex::Complex64;
use rayon::prelude::*;

use super::SpectralState;
use crate::closure::{closure_at, CouplingFunctions, Laws, LocalClosure, ModelCoefficients};
use crate::error::{Error, Result};
use crate::fields::{divergence, forward_many, inverse_many, partial, BoxGrid, Spectrum};

/// Smallest admissible un-scaled mass `R± = 1 + n±`.
pub const POSITIVITY_FLOOR: f64 = 1e-6;

/// Source of the explicit tendency in the integrating-factor scheme.
pub trait Nonlinearity: Sync {
    fn tendency(&self, s: &SpectralState) -> Result<SpectralState>;
}

/// `𝓕 ≡ 0`: the integrator then reproduces the exact linear flow.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroNonlinearity;

impl Nonlinearity for ZeroNonlinearity {
    fn tendency(&self, s: &SpectralState) -> Result<SpectralState> {
        Ok(SpectralState::zeros(s.grid, s.t))
    }
}

/// The full nonlinear terms for given physical laws.
#[derive(Debug, Clone, Copy)]
pub struct FullNonlinearity {
    pub laws: Laws,
    pub eq: LocalClosure,
    pub c: ModelCoefficients,
}

impl FullNonlinearity {
    pub fn new(laws: &Laws) -> Result<Self> {
        let (eq, c) = laws.linearize()?;
        Ok(Self { laws: *laws, eq, c })
    }
}

impl Nonlinearity for FullNonlinearity {
    fn tendency(&self, s: &SpectralState) -> Result<SpectralState> {
        nonlinear_rhs(s, &self.laws, &self.eq, &self.c)
    }
}

/// Physical-space data of one phase.
struct Phase {
    n: Vec<f64>,
    dn: [Vec<f64>; 3],
    u: [Vec<f64>; 3],
    /// `du[i][j] = ∂_j u_i`.
    du: [[Vec<f64>; 3]; 3],
    lap: [Vec<f64>; 3],
    graddiv: [Vec<f64>; 3],
}

const PHASE_SPECTRA: usize = 22;

fn phase_spectra(g: &BoxGrid, n: &Spectrum, u: [&Spectrum; 3], out: &mut Vec<Spectrum>) {
    out.push(n.clone());
    for a in 0..3 {
        out.push(partial(g, n, a));
    }
    for ui in u {
        out.push(ui.clone());
    }
    for ui in u {
        for j in 0..3 {
            out.push(partial(g, ui, j));
        }
    }
    for ui in u {
        out.push(
            ui.par_iter()
                .enumerate()
                .map(|(i, z)| z * -g.wave(i).r_odd.powi(2))
                .collect(),
        );
    }
    let div = divergence(g, &[u[0].clone(), u[1].clone(), u[2].clone()]);
    for a in 0..3 {
        out.push(partial(g, &div, a));
    }
}

fn take_phase(it: &mut impl Iterator<Item = Vec<f64>>) -> Phase {
    let mut next = || it.next().expect("phase component");
    let n = next();
    let dn = [next(), next(), next()];
    let u = [next(), next(), next()];
    let du = std::array::from_fn(|_| [next(), next(), next()]);
    let lap = [next(), next(), next()];
    let graddiv = [next(), next(), next()];
    Phase { n, dn, u, du, lap, graddiv }
}

fn scaled_spectrum(s: &Spectrum, f: f64, g: &BoxGrid) -> Spectrum {
    s.par_iter()
        .enumerate()
        .map(|(i, z)| if g.is_retained(i) { z * f } else { Complex64::new(0.0, 0.0) })
        .collect()
}

/// Pointwise closure on every grid point, warm-started along x-lines.
fn closures(g: &BoxGrid, rp: &[f64], rm: &[f64], laws: &Laws, eq: &LocalClosure) -> Result<Vec<LocalClosure>> {
    let n = g.n;
    let lines: Vec<Vec<LocalClosure>> = (0..g.len() / n)
        .into_par_iter()
        .map(|line| {
            let mut guess = eq.rho_plus;
            (line * n..(line + 1) * n)
                .map(|i| {
                    let lc = closure_at(rp[i], rm[i], &laws.phase, &laws.cap, Some(guess))?;
                    guess = lc.rho_plus;
                    Ok(lc)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(lines.into_iter().flatten().collect())
}

/// Physical momentum tendency of one phase, without the convective term's
/// partner: `−g ∂n_self − ḡ ∂n_other − (u·∇)u + viscous couplings`.
struct MomentumCoeffs {
    g_self: f64,
    g_other: f64,
    h: f64,
    k: f64,
    l: f64,
    mu: f64,
    lambda: f64,
}

fn momentum(
    i: usize,
    me: &Phase,
    other_dn: &[Vec<f64>; 3],
    plus_dn: &[Vec<f64>; 3],
    minus_dn: &[Vec<f64>; 3],
    m: &MomentumCoeffs,
) -> [f64; 3] {
    let dnp = [plus_dn[0][i], plus_dn[1][i], plus_dn[2][i]];
    let dnm = [minus_dn[0][i], minus_dn[1][i], minus_dn[2][i]];
    let dself = [me.dn[0][i], me.dn[1][i], me.dn[2][i]];
    let doth = [other_dn[0][i], other_dn[1][i], other_dn[2][i]];
    let u = [me.u[0][i], me.u[1][i], me.u[2][i]];
    let du = |a: usize, b: usize| me.du[a][b][i];
    let div = du(0, 0) + du(1, 1) + du(2, 2);
    // w_j = h ∂_j n⁺ + k ∂_j n⁻.
    let w: [f64; 3] = std::array::from_fn(|j| m.h * dnp[j] + m.k * dnm[j]);
    std::array::from_fn(|a| {
        let conv = u[0] * du(a, 0) + u[1] * du(a, 1) + u[2] * du(a, 2);
        let shear = (0..3).map(|j| w[j] * (du(a, j) + du(j, a))).sum::<f64>();
        -m.g_self * dself[a] - m.g_other * doth[a] - conv
            + m.mu * shear
            + m.lambda * w[a] * div
            + m.mu * m.l * me.lap[a][i]
            + (m.mu + m.lambda) * m.l * me.graddiv[a][i]
    })
}

/// The scaled nonlinear tendency `(𝓕₁, 𝓕₂, 𝓕₃, 𝓕₄)`.
pub fn nonlinear_rhs(
    s: &SpectralState,
    laws: &Laws,
    eq: &LocalClosure,
    c: &ModelCoefficients,
) -> Result<SpectralState> {
    let g = s.grid;
    let unscale = [1.0 / c.alpha1, 1.0 / c.beta1, 1.0 / c.alpha4, 1.0 / c.beta4];
    let phys: Vec<Spectrum> = (0..8)
        .map(|a| {
            let f = match a {
                0 => unscale[0],
                1..=3 => unscale[1],
                4 => unscale[2],
                _ => unscale[3],
            };
            scaled_spectrum(&s.comps[a], f, &g)
        })
        .collect();

    let mut spectra = Vec::with_capacity(2 * PHASE_SPECTRA);
    phase_spectra(&g, &phys[0], [&phys[1], &phys[2], &phys[3]], &mut spectra);
    phase_spectra(&g, &phys[4], [&phys[5], &phys[6], &phys[7]], &mut spectra);
    let refs: Vec<&[Complex64]> = spectra.iter().map(|v| v.as_slice()).collect();
    let mut it = inverse_many(&g, &refs).into_iter();
    let plus = take_phase(&mut it);
    let minus = take_phase(&mut it);
    drop(spectra);

    let rp: Vec<f64> = plus.n.iter().map(|n| 1.0 + n).collect();
    let rm: Vec<f64> = minus.n.iter().map(|n| 1.0 + n).collect();
    let min_p = rp.iter().copied().fold(f64::INFINITY, f64::min);
    let min_m = rm.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min_p > POSITIVITY_FLOOR && min_m > POSITIVITY_FLOOR) {
        return Err(Error::NonPositiveMass {
            r_plus: min_p,
            r_minus: min_m,
        });
    }
    let local = closures(&g, &rp, &rm, laws, eq)?;

    let v = &laws.visc;
    let rows: Vec<[f64; 6]> = (0..g.len())
        .into_par_iter()
        .map(|i| {
            let cf = CouplingFunctions::at(&local[i], eq, c);
            let mp = MomentumCoeffs {
                g_self: cf.g_plus,
                g_other: cf.gbar_plus,
                h: cf.h_plus,
                k: cf.k_plus,
                l: cf.l_plus,
                mu: v.mu_plus,
                lambda: v.lambda_plus,
            };
            let mm = MomentumCoeffs {
                g_self: cf.g_minus,
                g_other: cf.gbar_minus,
                h: cf.h_minus,
                k: cf.k_minus,
                l: cf.l_minus,
                mu: v.mu_minus,
                lambda: v.lambda_minus,
            };
            let fp = momentum(i, &plus, &minus.dn, &plus.dn, &minus.dn, &mp);
            let fm = momentum(i, &minus, &plus.dn, &plus.dn, &minus.dn, &mm);
            [fp[0], fp[1], fp[2], fm[0], fm[1], fm[2]]
        })
        .collect();

    // Products n·u and the momentum terms back to spectral space.
    let mut phys_fields: Vec<Vec<f64>> = Vec::with_capacity(12);
    for p in [&plus, &minus] {
        for a in 0..3 {
            phys_fields.push(p.n.iter().zip(&p.u[a]).map(|(n, u)| n * u).collect());
        }
    }
    for a in 0..6 {
        phys_fields.push(rows.iter().map(|r| r[a]).collect());
    }
    let refs: Vec<&[f64]> = phys_fields.iter().map(|v| v.as_slice()).collect();
    let mut spec = forward_many(&g, &refs).into_iter();
    let mut next = || spec.next().expect("twelve spectra");
    let flux_p = [next(), next(), next()];
    let flux_m = [next(), next(), next()];
    let mom: [Spectrum; 6] = std::array::from_fn(|_| next());

    let mut out = SpectralState::zeros(g, s.t);
    out.comps[0] = divergence(&g, &flux_p).into_iter().map(|z| -z * c.alpha1).collect();
    out.comps[4] = divergence(&g, &flux_m).into_iter().map(|z| -z * c.alpha4).collect();
    for a in 0..3 {
        out.comps[1 + a] = mom[a].iter().map(|z| z * c.beta1).collect();
        out.comps[5 + a] = mom[3 + a].iter().map(|z| z * c.beta4).collect();
    }
    out.dealias();
    Ok(out)
}
