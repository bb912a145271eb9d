//! Alloy-type random surface potentials.
//!
//! The potential is the lattice sum `V_ω(x, y) = Σ_ξ λ_ξ v(x - ξ, y)` over
//! `ξ ∈ Z^d`, with i.i.d. couplings `λ_ξ ∈ [0, E_0]`. Couplings are
//! counter-based: the value at a site is a pure hash of `(seed, ξ)` mapped
//! through the inverse distribution function. Enumeration order is
//! irrelevant and integer lattice translations act exactly by key
//! relabeling, which turns shift covariance into a bit-exact identity.
//!
//! Single-site potentials are separable, `v(x, y) = env(x) · g(y)`, with a
//! transverse envelope (power-law, stretched-Gaussian, or compact box) and
//! an optional longitudinal factor. Reduced potentials
//! `w_j(x) = ∫ v(x, y) ψ_j(y)² dy` then factor through the same envelope,
//! scaled by the quadrature weight `Σ_y g ψ_j² h`.

use crate::error::DisorderError;
use crate::grid::LatticeWindow;
use crate::hamiltonian::{ParallelSpectrum, ProjectedPotential};
use std::collections::BTreeMap;

/// Default tail tolerance for lattice-sum truncation, relative to `E_0`.
pub const DEFAULT_TAIL_TOL: f64 = 1e-6;

// ---------------------------------------------------------------------------
// Coupling laws and realizations
// ---------------------------------------------------------------------------

/// Distribution of a single coupling on `[0, E_0]`.
#[derive(Clone, Debug, PartialEq)]
pub enum LawKind {
    /// Uniform on [0, E_0].
    Uniform,
    /// F(E) = (E/E_0)^κ on [0, E_0].
    Power { kappa: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct CouplingLaw {
    pub kind: LawKind,
    pub e0: f64,
}

impl CouplingLaw {
    pub fn uniform(e0: f64) -> Self {
        assert!(e0 >= 0.0);
        CouplingLaw {
            kind: LawKind::Uniform,
            e0,
        }
    }

    pub fn power(kappa: f64, e0: f64) -> Self {
        assert!(kappa > 0.0 && e0 >= 0.0);
        CouplingLaw {
            kind: LawKind::Power { kappa },
            e0,
        }
    }

    /// Inverse distribution function on a uniform deviate in [0, 1).
    fn quantile(&self, u: f64) -> f64 {
        match self.kind {
            LawKind::Uniform => u * self.e0,
            LawKind::Power { kappa } => u.powf(1.0 / kappa) * self.e0,
        }
    }

    fn describe(&self) -> String {
        match self.kind {
            LawKind::Uniform => format!("uniform e0={}", self.e0),
            LawKind::Power { kappa } => format!("power kappa={} e0={}", kappa, self.e0),
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Pure site hash: a 64-bit word from (seed, ξ), independent of call order.
fn site_hash(seed: u64, site: &[i64]) -> u64 {
    let mut state = splitmix64(seed ^ 0x5851F42D4C957F2D);
    for &c in site {
        state = splitmix64(state ^ (c as u64).wrapping_mul(0xD6E8FEB86659FD93));
    }
    state
}

fn unit_deviate(word: u64) -> f64 {
    (word >> 11) as f64 / (1u64 << 53) as f64
}

/// How couplings are produced.
#[derive(Clone, Debug, PartialEq)]
enum CouplingSource {
    /// Counter-based: λ_ξ = F⁻¹(hash(seed, ξ + key_shift)).
    Hashed { seed: u64, key_shift: Vec<i64> },
    /// Every coupling equals the same constant (bound studies and tests).
    Constant(f64),
    /// Explicit values; sites absent from the map carry zero.
    Explicit(BTreeMap<Vec<i64>, f64>),
}

/// A disorder realization on a finite lattice box `window ⊕ halo`.
///
/// Values are never stored for the hashed source; they are regenerated from
/// `(seed, ξ)` on demand, so a realization is a small value object.
#[derive(Clone, Debug, PartialEq)]
pub struct DisorderRealization {
    law: CouplingLaw,
    lo: Vec<i64>,
    hi: Vec<i64>,
    halo: i64,
    source: CouplingSource,
}

/// Sample couplings on the integer lattice covering `window ⊕ halo`.
pub fn sample_couplings(
    law: &CouplingLaw,
    window: &LatticeWindow,
    halo: i64,
    seed: u64,
) -> DisorderRealization {
    assert!(halo >= 0);
    let d = window.dim();
    let mut lo = Vec::with_capacity(d);
    let mut hi = Vec::with_capacity(d);
    for axis in 0..d {
        let c = window.offset()[axis];
        let half = window.side() / 2.0;
        lo.push((c - half).ceil() as i64 - halo);
        hi.push((c + half).floor() as i64 + halo);
    }
    DisorderRealization {
        law: law.clone(),
        lo,
        hi,
        halo,
        source: CouplingSource::Hashed {
            seed,
            key_shift: vec![0; d],
        },
    }
}

impl DisorderRealization {
    /// Constant couplings λ ≡ value on the same lattice layout.
    pub fn constant(law: &CouplingLaw, window: &LatticeWindow, halo: i64, value: f64) -> Self {
        let mut r = sample_couplings(law, window, halo, 0);
        r.source = CouplingSource::Constant(value);
        r
    }

    /// Explicit couplings; sites not listed are zero.
    pub fn explicit(
        law: &CouplingLaw,
        window: &LatticeWindow,
        halo: i64,
        values: BTreeMap<Vec<i64>, f64>,
    ) -> Self {
        let mut r = sample_couplings(law, window, halo, 0);
        r.source = CouplingSource::Explicit(values);
        r
    }

    pub fn law(&self) -> &CouplingLaw {
        &self.law
    }

    pub fn halo(&self) -> i64 {
        self.halo
    }

    pub fn bounds(&self) -> (&[i64], &[i64]) {
        (&self.lo, &self.hi)
    }

    /// Coupling value at a lattice site (any site; the box only bounds which
    /// sites enter lattice sums).
    pub fn coupling(&self, site: &[i64]) -> f64 {
        match &self.source {
            CouplingSource::Hashed { seed, key_shift } => {
                let shifted: Vec<i64> = site.iter().zip(key_shift).map(|(s, k)| s + k).collect();
                self.law.quantile(unit_deviate(site_hash(*seed, &shifted)))
            }
            CouplingSource::Constant(v) => *v,
            CouplingSource::Explicit(map) => map.get(site).copied().unwrap_or(0.0),
        }
    }

    /// Realization with relabeled keys: coupling'(ξ) = coupling(ξ + eta).
    /// The lattice box moves along (by -eta), so a window translated by
    /// -eta sees exactly the original site set under the new labels.
    pub fn shifted(&self, eta: &[i64]) -> Self {
        let mut out = self.clone();
        for ((l, h), e) in out.lo.iter_mut().zip(out.hi.iter_mut()).zip(eta) {
            *l -= e;
            *h -= e;
        }
        match &mut out.source {
            CouplingSource::Hashed { key_shift, .. } => {
                for (k, e) in key_shift.iter_mut().zip(eta) {
                    *k += e;
                }
            }
            CouplingSource::Constant(_) => {}
            CouplingSource::Explicit(map) => {
                let shifted: BTreeMap<Vec<i64>, f64> = map
                    .iter()
                    .map(|(site, v)| {
                        let s: Vec<i64> = site.iter().zip(eta).map(|(x, e)| x - e).collect();
                        (s, *v)
                    })
                    .collect();
                *map = shifted;
            }
        }
        out
    }

    /// All lattice sites of the box, row-major.
    pub fn sites(&self) -> Vec<Vec<i64>> {
        let d = self.lo.len();
        let mut out = Vec::new();
        let mut cur = self.lo.clone();
        loop {
            out.push(cur.clone());
            let mut axis = d;
            loop {
                if axis == 0 {
                    return out;
                }
                axis -= 1;
                cur[axis] += 1;
                if cur[axis] <= self.hi[axis] {
                    break;
                }
                cur[axis] = self.lo[axis];
            }
        }
    }

    /// Key-value manifest; values are regenerated, never stored.
    pub fn manifest(&self) -> String {
        let source = match &self.source {
            CouplingSource::Hashed { seed, key_shift } => {
                format!("seed={seed} key_shift={key_shift:?}")
            }
            CouplingSource::Constant(v) => format!("constant={v}"),
            CouplingSource::Explicit(_) => "explicit".to_string(),
        };
        format!(
            "law: {}\nlattice_lo: {:?}\nlattice_hi: {:?}\nhalo: {}\nsource: {}\n",
            self.law.describe(),
            self.lo,
            self.hi,
            self.halo,
            source
        )
    }
}

// ---------------------------------------------------------------------------
// Single-site profiles
// ---------------------------------------------------------------------------

/// Transverse envelope of the single-site potential.
#[derive(Clone, Debug, PartialEq)]
pub enum EnvelopeKind {
    /// amplitude · (1 + |x|)^{-kappa}, kappa > d.
    PowerLaw { kappa: f64, amplitude: f64 },
    /// amplitude · exp(-c·|x|^beta), beta in (0, 2], c > 0.
    Gaussian { beta: f64, amplitude: f64, inv_scale: f64 },
    /// amplitude · 1_{|x|_∞ <= radius}.
    Compact { radius: f64, amplitude: f64 },
}

impl EnvelopeKind {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            EnvelopeKind::PowerLaw { kappa, amplitude } => {
                let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
                amplitude * (1.0 + r).powf(-kappa)
            }
            EnvelopeKind::Gaussian {
                beta,
                amplitude,
                inv_scale,
            } => {
                let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
                amplitude * (-inv_scale * r.powf(*beta)).exp()
            }
            EnvelopeKind::Compact { radius, amplitude } => {
                let r = x.iter().fold(0.0f64, |a, c| a.max(c.abs()));
                if r <= *radius {
                    *amplitude
                } else {
                    0.0
                }
            }
        }
    }

    /// Decreasing radial majorant at sup-norm distance `r` (used by the
    /// lattice tail bounds).
    fn radial_majorant(&self, r: f64) -> f64 {
        match self {
            EnvelopeKind::PowerLaw { kappa, amplitude } => {
                amplitude * (1.0 + r.max(0.0)).powf(-kappa)
            }
            EnvelopeKind::Gaussian {
                beta,
                amplitude,
                inv_scale,
            } => amplitude * (-inv_scale * r.max(0.0).powf(*beta)).exp(),
            EnvelopeKind::Compact { radius, amplitude } => {
                if r <= *radius {
                    *amplitude
                } else {
                    0.0
                }
            }
        }
    }
}

/// Longitudinal factor g(y) of the separable single-site potential.
#[derive(Clone, Debug, PartialEq)]
pub enum LongitudinalFactor {
    /// g ≡ 1 (the potential does not depend on y).
    Constant,
    /// g = 1_{|y| <= half_width}.
    Indicator { half_width: f64 },
    /// g = exp(-((y - center)/width)²).
    Gaussian { width: f64, center: f64 },
}

impl LongitudinalFactor {
    pub fn eval(&self, y: f64) -> f64 {
        match self {
            LongitudinalFactor::Constant => 1.0,
            LongitudinalFactor::Indicator { half_width } => {
                if y.abs() <= *half_width {
                    1.0
                } else {
                    0.0
                }
            }
            LongitudinalFactor::Gaussian { width, center } => {
                let t = (y - center) / width;
                (-t * t).exp()
            }
        }
    }

    pub fn sup(&self) -> f64 {
        1.0
    }
}

/// Separable single-site potential `v(x, y) = env(x) · g(y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SingleSiteProfile {
    pub envelope: EnvelopeKind,
    pub longitudinal: LongitudinalFactor,
}

impl SingleSiteProfile {
    pub fn new(envelope: EnvelopeKind, longitudinal: LongitudinalFactor) -> Self {
        SingleSiteProfile {
            envelope,
            longitudinal,
        }
    }

    pub fn eval(&self, x: &[f64], y: f64) -> f64 {
        self.envelope.eval(x) * self.longitudinal.eval(y)
    }

    pub fn envelope_at(&self, x: &[f64]) -> f64 {
        self.envelope.eval(x)
    }
}

// ---------------------------------------------------------------------------
// Lattice sums
// ---------------------------------------------------------------------------

/// Upper bound on the envelope sum over sup-norm shells `|ζ|_∞ > halo` in
/// dimension `d`.
pub fn tail_bound(envelope: &EnvelopeKind, d: usize, halo: i64) -> f64 {
    let mut total = 0.0;
    let mut k = halo + 1;
    loop {
        let shell = (2 * k + 1).pow(d as u32) - (2 * k - 1).pow(d as u32);
        let term = shell as f64 * envelope.radial_majorant(k as f64);
        total += term;
        if term < 1e-18 * total.max(1e-300) || k > halo + 10_000 {
            break;
        }
        // Power-law tails converge slowly; past a fixed number of shells,
        // close the remainder with an integral comparison.
        if let EnvelopeKind::PowerLaw { kappa, amplitude } = envelope {
            if k > halo + 64 {
                let df = d as f64;
                let c = 2.0 * df * 3.0f64.powf(df - 1.0) * amplitude;
                total += c * (k as f64).powf(df - kappa) / (kappa - df);
                break;
            }
        }
        k += 1;
    }
    total
}

/// Check that the halo keeps the neglected lattice tail below `tail_tol`
/// (per unit coupling).
pub fn check_halo(
    profile: &SingleSiteProfile,
    d: usize,
    halo: i64,
    tail_tol: f64,
) -> Result<(), DisorderError> {
    let tail = tail_bound(&profile.envelope, d, halo) * profile.longitudinal.sup();
    if tail > tail_tol {
        Err(DisorderError::HaloTooSmall {
            halo,
            tail,
            tol: tail_tol,
        })
    } else {
        Ok(())
    }
}

/// Smallest halo radius meeting the default tail tolerance.
pub fn default_halo(profile: &SingleSiteProfile, d: usize) -> i64 {
    let mut halo = 1;
    while check_halo(profile, d, halo, DEFAULT_TAIL_TOL).is_err() && halo < 10_000 {
        halo += 1;
    }
    halo
}

/// The full surface potential at a point: `Σ_ξ λ_ξ v(x - ξ, y)` over the
/// realization's lattice box.
pub fn evaluate_potential(
    real: &DisorderRealization,
    profile: &SingleSiteProfile,
    x: &[f64],
    y: f64,
    tail_tol: f64,
) -> Result<f64, DisorderError> {
    check_halo(profile, x.len(), real.halo(), tail_tol)?;
    let g = profile.longitudinal.eval(y);
    if g == 0.0 {
        return Ok(0.0);
    }
    Ok(g * envelope_lattice_sum(real, profile, x))
}

fn envelope_lattice_sum(real: &DisorderRealization, profile: &SingleSiteProfile, x: &[f64]) -> f64 {
    let d = x.len();
    let (lo, hi) = real.bounds();
    let mut acc = 0.0;
    let mut site = lo.to_vec();
    let mut diff = vec![0.0; d];
    loop {
        let lam = real.coupling(&site);
        if lam != 0.0 {
            for a in 0..d {
                diff[a] = x[a] - site[a] as f64;
            }
            acc += lam * profile.envelope.eval(&diff);
        }
        let mut axis = d;
        loop {
            if axis == 0 {
                return acc;
            }
            axis -= 1;
            site[axis] += 1;
            if site[axis] <= hi[axis] {
                break;
            }
            site[axis] = lo[axis];
        }
    }
}

/// Coupling-weighted envelope sum `A(x_g) = Σ_ξ λ_ξ env(x_g - ξ)` on every
/// interior point of the window. Reused by all reduced and projected fields.
pub fn coupling_field(
    real: &DisorderRealization,
    profile: &SingleSiteProfile,
    window: &LatticeWindow,
    tail_tol: f64,
) -> Result<Vec<f64>, DisorderError> {
    check_halo(profile, window.dim(), real.halo(), tail_tol)?;
    let n_g = window.interior_count();
    let mut out = Vec::with_capacity(n_g);
    for g in 0..n_g {
        let x = window.point(g);
        out.push(envelope_lattice_sum(real, profile, &x));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Reduced potentials
// ---------------------------------------------------------------------------

/// Reduced single-site potential `w_j(x) = ∫ v(x, y) ψ_j(y)² dy`, which for
/// separable `v` is the envelope scaled by the quadrature weight.
#[derive(Clone, Debug)]
pub struct ReducedSite {
    pub j: usize,
    pub envelope: EnvelopeKind,
    /// Σ_y g(y) ψ_j(y)² h
    pub weight: f64,
}

impl ReducedSite {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.weight * self.envelope.eval(x)
    }
}

/// Quadrature of the defining integral of `w_j` against the j-th bound
/// state (0-based index).
pub fn reduce_site(
    profile: &SingleSiteProfile,
    spectrum: &ParallelSpectrum,
    j: usize,
) -> ReducedSite {
    let weight = longitudinal_weight(profile, spectrum, j, j);
    ReducedSite {
        j,
        envelope: profile.envelope.clone(),
        weight,
    }
}

/// Longitudinal quadrature `Σ_y g(y) ψ_j(y) ψ_k(y) h`.
pub fn longitudinal_weight(
    profile: &SingleSiteProfile,
    spectrum: &ParallelSpectrum,
    j: usize,
    k: usize,
) -> f64 {
    let grid = spectrum
        .grid()
        .expect("reduced potentials need grid eigenvectors");
    let psi_j = spectrum.vector(j).expect("missing eigenvector");
    let psi_k = spectrum.vector(k).expect("missing eigenvector");
    let h = grid.h;
    let mut acc = 0.0;
    for i in 0..psi_j.len() {
        let y = grid.coord(i);
        acc += profile.longitudinal.eval(y) * psi_j[i] * psi_k[i] * h;
    }
    acc
}

/// Full longitudinal Gram matrix `G_jk` for the lowest `r` bound states,
/// row-major r×r.
pub fn longitudinal_gram(profile: &SingleSiteProfile, spectrum: &ParallelSpectrum) -> Vec<f64> {
    let r = spectrum.count();
    let mut g = vec![0.0; r * r];
    for j in 0..r {
        for k in 0..=j {
            let v = longitudinal_weight(profile, spectrum, j, k);
            g[j * r + k] = v;
            g[k * r + j] = v;
        }
    }
    g
}

/// Identity Gram matrix for injected spectra (potential independent of y).
pub fn identity_gram(r: usize) -> Vec<f64> {
    let mut g = vec![0.0; r * r];
    for j in 0..r {
        g[j * r + j] = 1.0;
    }
    g
}

/// Reduced random field `W_{j,ω}(x) = Σ_ξ λ_ξ w_j(x - ξ)` at one point.
pub fn reduced_field(
    real: &DisorderRealization,
    reduced: &ReducedSite,
    x: &[f64],
    tail_tol: f64,
) -> Result<f64, DisorderError> {
    let profile = SingleSiteProfile::new(reduced.envelope.clone(), LongitudinalFactor::Constant);
    check_halo(&profile, x.len(), real.halo(), tail_tol)?;
    Ok(reduced.weight * envelope_lattice_sum(real, &profile, x))
}

/// Projected potential for the assembled operator: blocks
/// `scale · A(x_g) · G` with `A` the coupling field and `G` the
/// longitudinal Gram matrix.
pub fn projected_potential(
    real: &DisorderRealization,
    profile: &SingleSiteProfile,
    spectrum: &ParallelSpectrum,
    window: &LatticeWindow,
    scale: f64,
    tail_tol: f64,
) -> Result<ProjectedPotential, DisorderError> {
    let field = coupling_field(real, profile, window, tail_tol)?;
    let gram = if spectrum.grid().is_some() {
        longitudinal_gram(profile, spectrum)
    } else {
        assert!(
            matches!(profile.longitudinal, LongitudinalFactor::Constant),
            "injected spectra only support y-independent potentials"
        );
        identity_gram(spectrum.count())
    };
    Ok(ProjectedPotential { field, gram, scale })
}

// ---------------------------------------------------------------------------
// Sup bound
// ---------------------------------------------------------------------------

/// The essential sup bound `M = E_0 · sup_x Σ_ζ v_sup(x - ζ)`, evaluated on
/// one unit cell of the periodized envelope plus the lattice tail. `M`
/// dominates every finite-lattice potential value, so the exact operator
/// inequalities may use it with zero slack.
pub fn sup_bound(profile: &SingleSiteProfile, law: &CouplingLaw, d: usize) -> f64 {
    let radius = sup_sum_radius(&profile.envelope, d);
    let per_axis = 8usize;
    let mut best: f64 = 0.0;
    let mut idx = vec![0usize; d];
    let mut x = vec![0.0; d];
    let mut diff = vec![0.0; d];
    loop {
        for a in 0..d {
            x[a] = idx[a] as f64 / per_axis as f64;
        }
        let mut acc = 0.0;
        let mut site = vec![-radius; d];
        'sites: loop {
            for a in 0..d {
                diff[a] = x[a] - site[a] as f64;
            }
            acc += profile.envelope.eval(&diff);
            let mut axis = d;
            loop {
                if axis == 0 {
                    break 'sites;
                }
                axis -= 1;
                site[axis] += 1;
                if site[axis] <= radius {
                    break;
                }
                site[axis] = -radius;
            }
        }
        best = best.max(acc);
        let mut axis = d;
        let mut done = false;
        loop {
            if axis == 0 {
                done = true;
                break;
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] <= per_axis {
                break;
            }
            idx[axis] = 0;
        }
        if done {
            break;
        }
    }
    law.e0 * profile.longitudinal.sup() * (best + tail_bound(&profile.envelope, d, radius - 1))
}

fn sup_sum_radius(envelope: &EnvelopeKind, d: usize) -> i64 {
    let mut r = 2;
    while tail_bound(envelope, d, r) > 1e-9 * envelope.radial_majorant(0.0).max(1e-12) && r < 512 {
        r += 1;
    }
    r + 1
}
