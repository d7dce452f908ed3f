//! Brute-force ground truth: nested-quadrature weights, truncated-Fock
//! Hamiltonians, dense spectra, and exact state propagation.
//!
//! Nothing in here reuses the partial-fraction algebra or the diagram
//! machinery; agreement between the two paths is what the verification
//! suites check.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};
use num_complex::Complex64 as C64;

use crate::algebra::TransitionString;
use crate::linalg::{hermitian_eigen, CMat, LinalgError};
use crate::model::InteractionModel;
use crate::util::KahanSum;
use crate::weights::Placement;

/// Default cap on dense dimensions.
pub const DIM_BUDGET: usize = 4096;

// ---------------------------------------------------------------------------
// Nested-quadrature weight evaluation
// ---------------------------------------------------------------------------

/// Midpoint-rule evaluation of the order-`n` nested time integral for one
/// placement, including the placement sign `(-1)^{N_L}`.
///
/// The nested integral is unrolled into iterated cumulative integrals
/// `C_l(τ) = ∫_0^τ e^{i(D_l - D_{l-1}) u} C_{l-1}(u) du` with
/// `v = (-i)^n e^{-i D_n t} C_n(t)`, each computed with the composite
/// midpoint rule on a shared lattice (half-cells at odd lattice points are
/// closed with a trapezoid patch, preserving the O(steps^-2) error).
pub fn quadrature_weight(
    deltas: &[f64],
    thetas: &[f64],
    placement: &Placement,
    t: f64,
    steps: usize,
) -> C64 {
    assert!(steps >= 64, "quadrature needs at least 64 steps");
    let n = deltas.len() - 1;
    let sign = placement.sign(n);
    // Regularized cumulative detunings along the application order.
    let mut cum: Vec<C64> = Vec::with_capacity(n + 1);
    let mut dsum = KahanSum::new();
    let mut tsum = 0.0;
    for &pos in &placement.application_order {
        dsum.add(deltas[pos]);
        tsum += thetas[pos];
        cum.push(C64::new(dsum.value(), -tsum));
    }
    if n == 0 {
        let d0 = cum[0];
        return sign * (C64::new(0.0, -1.0) * d0 * t).exp();
    }
    if t == 0.0 {
        return C64::new(0.0, 0.0);
    }

    let h = t / steps as f64;
    let npts = 2 * steps + 1; // lattice x_q = q h/2
    let mut prev: Vec<C64> = vec![C64::new(1.0, 0.0); npts]; // C_0 ≡ 1
    let mut cur: Vec<C64> = vec![C64::new(0.0, 0.0); npts];
    for l in 1..=n {
        let dd = cum[l] - cum[l - 1];
        // integrand F(x) = e^{i dd x} prev(x)
        let f = |q: usize, prev: &Vec<C64>| -> C64 {
            let x = 0.5 * h * q as f64;
            (C64::new(0.0, 1.0) * dd * x).exp() * prev[q]
        };
        cur[0] = C64::new(0.0, 0.0);
        for k in 0..steps {
            // node 2k -> node 2k+2 via the midpoint 2k+1
            let base = cur[2 * k];
            cur[2 * k + 1] = base + 0.25 * h * (f(2 * k, &prev) + f(2 * k + 1, &prev));
            cur[2 * k + 2] = base + h * f(2 * k + 1, &prev);
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    let c_n = prev[2 * steps];
    let mut pref = C64::new(sign, 0.0);
    for _ in 0..n {
        pref *= C64::new(0.0, -1.0);
    }
    pref * (C64::new(0.0, -1.0) * cum[n] * t).exp() * c_n
}

/// Step-doubled, Richardson-extrapolated quadrature: doubles `steps` until
/// two successive extrapolations agree to `tol` (absolute, relative to the
/// running magnitude).
pub fn quadrature_weight_converged(
    deltas: &[f64],
    thetas: &[f64],
    placement: &Placement,
    t: f64,
    tol: f64,
) -> C64 {
    let mut steps = 256usize;
    let mut raw_prev = quadrature_weight(deltas, thetas, placement, t, steps);
    let mut extrap_prev: Option<C64> = None;
    for _ in 0..14 {
        steps *= 2;
        let raw = quadrature_weight(deltas, thetas, placement, t, steps);
        let extrap = (raw * 4.0 - raw_prev) / 3.0;
        if let Some(prev) = extrap_prev {
            if (extrap - prev).norm() <= tol * extrap.norm().max(1e-3) {
                return extrap;
            }
        }
        extrap_prev = Some(extrap);
        raw_prev = raw;
    }
    extrap_prev.expect("at least one refinement")
}

/// Quadrature version of the total weight: the signed average over all
/// placements, times the coupling product.
pub fn quadrature_total_weight(
    model: &InteractionModel,
    s: &TransitionString,
    t: f64,
    tol: f64,
) -> C64 {
    let deltas = s.deltas(model);
    let thetas = s.thetas(model);
    let n = s.order();
    let mut acc = C64::new(0.0, 0.0);
    for placement in crate::weights::placements_of(n) {
        acc += quadrature_weight_converged(&deltas, &thetas, &placement, t, tol);
    }
    acc * s.coupling_product(model) / (n as f64 + 1.0)
}

// ---------------------------------------------------------------------------
// Truncated-Fock representation
// ---------------------------------------------------------------------------

/// Dense truncation: every mode keeps occupations `0..=n_max`.
///
/// Basis order: the matter level index varies slowest, then mode 0, then
/// mode 1, ... with each occupation counting up; i.e.
/// `index = ((level * (n0+1) + occ0) * (n1+1) + occ1) * ...`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FockTruncation {
    pub n_max: Vec<u32>,
}

impl FockTruncation {
    pub fn uniform(n_modes: usize, n_max: u32) -> Self {
        Self { n_max: vec![n_max; n_modes] }
    }

    /// Total dense dimension; saturates on overflow (which any budget
    /// check then rejects).
    pub fn dimension(&self, n_levels: usize) -> usize {
        self.n_max
            .iter()
            .fold(n_levels, |acc, &n| acc.saturating_mul(n as usize + 1))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OracleError {
    BudgetExceeded { dim: usize, budget: usize },
    TruncationTooSmall(String),
    Linalg(LinalgError),
    SectorNotClosed { dim: usize, budget: usize },
    NotNormalized,
}

impl core::fmt::Display for OracleError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            OracleError::BudgetExceeded { dim, budget } => {
                write!(f, "dense dimension {dim} exceeds budget {budget}")
            }
            OracleError::TruncationTooSmall(s) => write!(f, "truncation too small: {s}"),
            OracleError::Linalg(e) => write!(f, "linear algebra: {e}"),
            OracleError::SectorNotClosed { dim, budget } => {
                write!(f, "reachable sector grew past {budget} states (at {dim})")
            }
            OracleError::NotNormalized => write!(f, "state vector is not normalized"),
        }
    }
}

impl From<LinalgError> for OracleError {
    fn from(e: LinalgError) -> Self {
        OracleError::Linalg(e)
    }
}

fn decode(idx: usize, n_levels: usize, trunc: &FockTruncation) -> (usize, Vec<u32>) {
    let mut rem = idx;
    let mut occs = vec![0u32; trunc.n_max.len()];
    for m in (0..trunc.n_max.len()).rev() {
        let size = trunc.n_max[m] as usize + 1;
        occs[m] = (rem % size) as u32;
        rem /= size;
    }
    debug_assert!(rem < n_levels);
    (rem, occs)
}

fn encode(level: usize, occs: &[u32], trunc: &FockTruncation) -> usize {
    let mut idx = level;
    for (m, &occ) in occs.iter().enumerate() {
        idx = idx * (trunc.n_max[m] as usize + 1) + occ as usize;
    }
    idx
}

/// Dense matrix of `H_free + H_int` in the truncated Fock basis, with
/// standard `√n` ladder conventions.
pub fn fock_hamiltonian(
    model: &InteractionModel,
    trunc: &FockTruncation,
    budget: usize,
) -> Result<CMat, OracleError> {
    let n_levels = model.levels.len();
    let dim = trunc.dimension(n_levels);
    if dim > budget {
        return Err(OracleError::BudgetExceeded { dim, budget });
    }
    let mut h = CMat::zeros(dim, dim);
    let level_omega: Vec<f64> = model.levels.iter().map(|l| l.omega).collect();
    for idx in 0..dim {
        let (lvl, occs) = decode(idx, n_levels, trunc);
        let mut e = level_omega[lvl];
        for (m, &occ) in occs.iter().enumerate() {
            e += occ as f64 * model.modes[m].omega;
        }
        h[(idx, idx)] = C64::new(e, 0.0);
        // Interaction: each op maps |from, occ> to |to, occ ∓ 1 on its mode>.
        for op in &model.ops {
            let from = model.levels.iter().position(|l| l.id == op.from_level).unwrap();
            if from != lvl {
                continue;
            }
            let to = model.levels.iter().position(|l| l.id == op.to_level).unwrap();
            let m = op.mode;
            let occ = occs[m];
            let (occ_new, amp) = if op.dagger {
                if occ >= trunc.n_max[m] {
                    continue;
                }
                (occ + 1, libm::sqrt(occ as f64 + 1.0))
            } else {
                if occ == 0 {
                    continue;
                }
                (occ - 1, libm::sqrt(occ as f64))
            };
            let mut occs_new = occs.clone();
            occs_new[m] = occ_new;
            let jdx = encode(to, &occs_new, trunc);
            h[(jdx, idx)] += op.g * amp;
        }
    }
    debug_assert!(h.hermiticity_defect() < 1e-12);
    Ok(h)
}

/// Sorted eigenvalues of a Hermitian matrix; residuals are checked to
/// 1e-10 internally by the solver's convergence test.
pub fn dressed_spectrum(h: &CMat) -> Result<Vec<f64>, OracleError> {
    Ok(hermitian_eigen(h)?.values)
}

/// Exact propagation `ψ(t) = e^{-iHt} ψ0` by spectral decomposition.
pub struct Propagator {
    eigen: crate::linalg::HermitianEigen,
}

impl Propagator {
    pub fn new(h: &CMat) -> Result<Self, OracleError> {
        Ok(Self { eigen: hermitian_eigen(h)? })
    }

    pub fn apply(&self, psi0: &[C64], t: f64) -> Result<Vec<C64>, OracleError> {
        let n = psi0.len();
        let norm: f64 = psi0.iter().map(|z| z.norm_sqr()).sum();
        if libm::fabs(norm - 1.0) > 1e-8 {
            return Err(OracleError::NotNormalized);
        }
        // coeffs = V† ψ0, then ψ(t) = V diag(e^{-iλt}) coeffs
        let v = &self.eigen.vectors;
        let mut coeffs = vec![C64::new(0.0, 0.0); n];
        for k in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..n {
                acc += v[(i, k)].conj() * psi0[i];
            }
            coeffs[k] = acc;
        }
        let mut out = vec![C64::new(0.0, 0.0); n];
        for k in 0..n {
            let phase = (C64::new(0.0, -self.eigen.values[k] * t)).exp();
            let ck = coeffs[k] * phase;
            for i in 0..n {
                out[i] += v[(i, k)] * ck;
            }
        }
        Ok(out)
    }
}

/// One-call propagation with a norm-conservation check.
pub fn propagate(h: &CMat, psi0: &[C64], t: f64) -> Result<Vec<C64>, OracleError> {
    let prop = Propagator::new(h)?;
    let out = prop.apply(psi0, t)?;
    let norm: f64 = out.iter().map(|z| z.norm_sqr()).sum();
    if libm::fabs(norm - 1.0) > 1e-10 {
        return Err(OracleError::NotNormalized);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Reachable-sector representation (for many-mode models)
// ---------------------------------------------------------------------------

/// A basis state in the sparse sector representation: a matter level plus
/// the occupied modes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct SectorState {
    pub level: usize,
    /// Sorted (mode, occupation > 0) pairs.
    pub occ: Vec<(usize, u32)>,
}

impl SectorState {
    pub fn vacuum(level: usize) -> Self {
        Self { level, occ: Vec::new() }
    }

    pub fn with_photon(level: usize, mode: usize) -> Self {
        Self { level, occ: vec![(mode, 1)] }
    }

    fn occupation(&self, mode: usize) -> u32 {
        self.occ.iter().find(|(m, _)| *m == mode).map(|(_, n)| *n).unwrap_or(0)
    }

    fn with_occupation(&self, mode: usize, n: u32) -> Self {
        let mut occ: Vec<(usize, u32)> =
            self.occ.iter().copied().filter(|(m, _)| *m != mode).collect();
        if n > 0 {
            occ.push((mode, n));
        }
        occ.sort_unstable();
        Self { level: self.level, occ }
    }
}

/// The Hamiltonian restricted to the sector reachable from `seeds` under
/// repeated application of the couplings. If the closure stays within
/// `budget` states the restriction is exact (the sector is invariant).
pub struct SectorHamiltonian {
    pub basis: Vec<SectorState>,
    pub matrix: CMat,
}

impl SectorHamiltonian {
    pub fn index_of(&self, s: &SectorState) -> Option<usize> {
        self.basis.binary_search(s).ok()
    }
}

pub fn sector_hamiltonian(
    model: &InteractionModel,
    seeds: &[SectorState],
    budget: usize,
) -> Result<SectorHamiltonian, OracleError> {
    // Closure by BFS over coupling applications.
    let mut known: BTreeMap<SectorState, ()> = BTreeMap::new();
    let mut frontier: Vec<SectorState> = seeds.to_vec();
    for s in seeds {
        known.insert(s.clone(), ());
    }
    while let Some(s) = frontier.pop() {
        for op in &model.ops {
            if op.from_level != s.level {
                continue;
            }
            let occ = s.occupation(op.mode);
            let next = if op.dagger {
                let mut t = s.with_occupation(op.mode, occ + 1);
                t.level = op.to_level;
                t
            } else {
                if occ == 0 {
                    continue;
                }
                let mut t = s.with_occupation(op.mode, occ - 1);
                t.level = op.to_level;
                t
            };
            if !known.contains_key(&next) {
                known.insert(next.clone(), ());
                if known.len() > budget {
                    return Err(OracleError::SectorNotClosed { dim: known.len(), budget });
                }
                frontier.push(next);
            }
        }
    }
    let basis: Vec<SectorState> = known.into_keys().collect();
    let dim = basis.len();
    let mut h = CMat::zeros(dim, dim);
    for (idx, s) in basis.iter().enumerate() {
        let mut e = model.level(s.level).omega;
        for &(m, n) in &s.occ {
            e += n as f64 * model.modes[m].omega;
        }
        h[(idx, idx)] = C64::new(e, 0.0);
        for op in &model.ops {
            if op.from_level != s.level {
                continue;
            }
            let occ = s.occupation(op.mode);
            let (next, amp) = if op.dagger {
                let mut t = s.with_occupation(op.mode, occ + 1);
                t.level = op.to_level;
                (t, libm::sqrt(occ as f64 + 1.0))
            } else {
                if occ == 0 {
                    continue;
                }
                let mut t = s.with_occupation(op.mode, occ - 1);
                t.level = op.to_level;
                (t, libm::sqrt(occ as f64))
            };
            let jdx = basis.binary_search(&next).expect("closure contains image");
            h[(jdx, idx)] += op.g * amp;
        }
    }
    debug_assert!(h.hermiticity_defect() < 1e-12);
    Ok(SectorHamiltonian { basis, matrix: h })
}

// ---------------------------------------------------------------------------
// Eigenoperator check
// ---------------------------------------------------------------------------

/// Verify that a transition string evolves under free conjugation as
/// `e^{-iΔ_n t}` times itself: `e^{iH_free t} Ξ e^{-iH_free t}` is compared
/// entry by entry against the phase-multiplied matrix in a truncated Fock
/// basis. `H_free` is diagonal there, so the conjugation phases are exact.
pub fn liouvillian_eigencheck(
    model: &InteractionModel,
    s: &TransitionString,
    t: f64,
    trunc: &FockTruncation,
) -> Result<bool, OracleError> {
    let n_levels = model.levels.len();
    let dim = trunc.dimension(n_levels);
    if dim > DIM_BUDGET {
        return Err(OracleError::BudgetExceeded { dim, budget: DIM_BUDGET });
    }
    // Dense matrix of the string itself (applied rightmost-first).
    let mut op_mat = CMat::identity(dim);
    for &i in &s.ops {
        let op = &model.ops[i];
        let mut step = CMat::zeros(dim, dim);
        for idx in 0..dim {
            let (lvl, occs) = decode(idx, n_levels, trunc);
            let from = model.levels.iter().position(|l| l.id == op.from_level).unwrap();
            if lvl != from {
                continue;
            }
            let to = model.levels.iter().position(|l| l.id == op.to_level).unwrap();
            let m = op.mode;
            let occ = occs[m];
            let (occ_new, amp) = if op.dagger {
                if occ >= trunc.n_max[m] {
                    continue;
                }
                (occ + 1, libm::sqrt(occ as f64 + 1.0))
            } else {
                if occ == 0 {
                    continue;
                }
                (occ - 1, libm::sqrt(occ as f64))
            };
            let mut occs_new = occs.clone();
            occs_new[m] = occ_new;
            let jdx = encode(to, &occs_new, trunc);
            step[(jdx, idx)] += C64::new(amp, 0.0);
        }
        // op_mat <- step * op_mat
        let mut next = CMat::zeros(dim, dim);
        for i in 0..dim {
            for k in 0..dim {
                let sik = step[(i, k)];
                if sik.norm() == 0.0 {
                    continue;
                }
                for j in 0..dim {
                    let v = op_mat[(k, j)];
                    if v.norm() != 0.0 {
                        next[(i, j)] += sik * v;
                    }
                }
            }
        }
        op_mat = next;
    }
    let mut any_nonzero = false;
    let level_omega: Vec<f64> = model.levels.iter().map(|l| l.omega).collect();
    let energy = |idx: usize| -> f64 {
        let (lvl, occs) = decode(idx, n_levels, trunc);
        let mut e = level_omega[lvl];
        for (m, &occ) in occs.iter().enumerate() {
            e += occ as f64 * model.modes[m].omega;
        }
        e
    };
    let delta_n = s.final_detuning(model);
    let expected_phase = (C64::new(0.0, -delta_n * t)).exp();
    let mut worst = 0.0f64;
    for i in 0..dim {
        for j in 0..dim {
            let v = op_mat[(i, j)];
            if v.norm() < 1e-14 {
                continue;
            }
            any_nonzero = true;
            // e^{iH t} Ξ e^{-iH t} entry (i, j) picks up e^{i(E_i - E_j) t}.
            let conj_phase = (C64::new(0.0, (energy(i) - energy(j)) * t)).exp();
            worst = worst.max((conj_phase * v - expected_phase * v).norm());
        }
    }
    if !any_nonzero {
        return Err(OracleError::TruncationTooSmall(format!(
            "string {} vanishes at n_max {:?}",
            s.id(),
            trunc.n_max
        )));
    }
    Ok(worst < 1e-10)
}

// ---------------------------------------------------------------------------
// Spectral population series and frequency extraction
// ---------------------------------------------------------------------------

/// Overlap amplitudes `A_k = <target|v_k><v_k|ψ0>` so that the target
/// population is `|Σ_k A_k e^{-iλ_k t}|²` at any `t` in O(dim) time.
pub struct PopulationSeries {
    amps: Vec<C64>,
    energies: Vec<f64>,
}

impl PopulationSeries {
    pub fn new(h: &CMat, psi0: &[C64], target: &[C64]) -> Result<Self, OracleError> {
        let eigen = hermitian_eigen(h)?;
        let n = psi0.len();
        let mut amps = Vec::with_capacity(n);
        for k in 0..n {
            let mut proj0 = C64::new(0.0, 0.0);
            let mut projt = C64::new(0.0, 0.0);
            for i in 0..n {
                proj0 += eigen.vectors[(i, k)].conj() * psi0[i];
                projt += target[i].conj() * eigen.vectors[(i, k)];
            }
            amps.push(projt * proj0);
        }
        Ok(Self { amps, energies: eigen.values })
    }

    pub fn population(&self, t: f64) -> f64 {
        let mut acc = C64::new(0.0, 0.0);
        for (a, &e) in self.amps.iter().zip(self.energies.iter()) {
            acc += a * (C64::new(0.0, -e * t)).exp();
        }
        acc.norm_sqr()
    }
}

/// Least-squares fit of a population trace to `c0 + c1 cos ωt + s1 sin ωt`,
/// scanning ω around `guess` and refining the best residual parabolically.
/// Sampling spans several slow periods so faster components average out of
/// the fit.
pub fn fit_oscillation_frequency(series: &PopulationSeries, guess: f64) -> f64 {
    let periods = 6.0;
    let t_max = periods * core::f64::consts::TAU / guess;
    let n = 4096usize;
    let ts: Vec<f64> = (0..n).map(|i| t_max * (i as f64 + 0.5) / n as f64).collect();
    let ps: Vec<f64> = ts.iter().map(|&t| series.population(t)).collect();

    let residual = |omega: f64| -> f64 {
        // Normal equations for basis {1, cos ωt, sin ωt}.
        let mut m = [[0.0f64; 3]; 3];
        let mut rhs = [0.0f64; 3];
        for (&t, &p) in ts.iter().zip(ps.iter()) {
            let b = [1.0, libm::cos(omega * t), libm::sin(omega * t)];
            for r in 0..3 {
                for c in 0..3 {
                    m[r][c] += b[r] * b[c];
                }
                rhs[r] += b[r] * p;
            }
        }
        // Solve the 3x3 system by Gaussian elimination.
        let mut a = [
            [m[0][0], m[0][1], m[0][2], rhs[0]],
            [m[1][0], m[1][1], m[1][2], rhs[1]],
            [m[2][0], m[2][1], m[2][2], rhs[2]],
        ];
        for col in 0..3 {
            let mut piv = col;
            for r in (col + 1)..3 {
                if libm::fabs(a[r][col]) > libm::fabs(a[piv][col]) {
                    piv = r;
                }
            }
            a.swap(col, piv);
            let d = a[col][col];
            if libm::fabs(d) < 1e-300 {
                return f64::INFINITY;
            }
            for r in 0..3 {
                if r == col {
                    continue;
                }
                let f = a[r][col] / d;
                for c in col..4 {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
        let coef = [a[0][3] / a[0][0], a[1][3] / a[1][1], a[2][3] / a[2][2]];
        let mut res = 0.0;
        for (&t, &p) in ts.iter().zip(ps.iter()) {
            let fit = coef[0] + coef[1] * libm::cos(omega * t) + coef[2] * libm::sin(omega * t);
            res += (p - fit) * (p - fit);
        }
        res
    };

    // Coarse scan, then parabolic refinement on the residual.
    let mut best = guess;
    let mut best_res = residual(guess);
    for k in 0..121 {
        let omega = guess * (0.70 + 0.005 * k as f64);
        let r = residual(omega);
        if r < best_res {
            best_res = r;
            best = omega;
        }
    }
    let mut lo = best * 0.995;
    let mut hi = best * 1.005;
    for _ in 0..50 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if residual(m1) < residual(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    0.5 * (lo + hi)
}

// ---------------------------------------------------------------------------
// Effective-vs-exact comparisons
// ---------------------------------------------------------------------------

/// Observables for [`compare_effective_vs_exact`].
#[derive(Debug, Clone, PartialEq)]
pub enum Observable {
    /// Per-photon slope of the dressed two-level splitting, photons
    /// `0..=max_photons` (two levels, one mode).
    DispersiveShiftSlope { max_photons: u32 },
    /// Qubit-frequency renormalization at zero photons (two levels, one
    /// mode).
    QubitShift,
    /// Oscillation frequency of the `initial → target` population in the
    /// reachable sector; `guess` seeds the frequency fit.
    FlipFlop { initial: SectorState, target: SectorState, guess: f64 },
}

/// Outcome of one effective-vs-exact comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub observable: String,
    pub exact: f64,
    pub effective: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    /// Dispersive-regime expectation for the residual, `(g/δ)^(n+2)`.
    pub dispersive_scale: f64,
    /// Change of the exact value when the truncation is enlarged by 4
    /// quanta (truncation-adequacy probe; 0 for sector observables).
    pub truncation_shift: f64,
    pub truncation: Vec<u32>,
    pub params: String,
}

fn dressed_pair_energies(
    model: &InteractionModel,
    trunc: &FockTruncation,
) -> Result<(Vec<f64>, Vec<f64>), OracleError> {
    // Exact eigenvalues labelled by their dominant bare component:
    // returns (E[g, n], E[e, n]) for each photon number n.
    let h = fock_hamiltonian(model, trunc, DIM_BUDGET)?;
    let eig = hermitian_eigen(&h)?;
    let dim = h.n_rows;
    let n_ph = trunc.n_max[0] as usize + 1;
    let mut e_g = vec![f64::NAN; n_ph];
    let mut e_e = vec![f64::NAN; n_ph];
    for k in 0..dim {
        let mut best_i = 0;
        let mut best_w = 0.0;
        for i in 0..dim {
            let w = eig.vectors[(i, k)].norm_sqr();
            if w > best_w {
                best_w = w;
                best_i = i;
            }
        }
        let level = best_i / n_ph;
        let photons = best_i % n_ph;
        if level == 0 {
            e_g[photons] = eig.values[k];
        } else {
            e_e[photons] = eig.values[k];
        }
    }
    Ok((e_g, e_e))
}

/// Run the effective pipeline and the exact oracle side by side on the
/// requested observables.
pub fn compare_effective_vs_exact(
    model: &InteractionModel,
    policy: &crate::elimination::EliminationPolicy,
    order: usize,
    observables: &[Observable],
) -> Result<Vec<ComparisonReport>, OracleError> {
    use crate::elimination::{assemble_effective, effective_matrix, effective_sector_matrix};
    let h_eff = assemble_effective(model, order, policy)
        .map_err(|e| OracleError::TruncationTooSmall(format!("assembly failed: {e}")))?;
    let g_scale = model.ops.iter().map(|o| o.g.norm()).fold(0.0f64, f64::max);
    let delta_min = model
        .ops
        .iter()
        .map(|o| libm::fabs(model.detuning_of(o)))
        .filter(|d| *d > 0.0)
        .fold(f64::INFINITY, f64::min);
    let mut disp = 1.0f64;
    for _ in 0..(order + 2) {
        disp *= g_scale / delta_min;
    }
    let params = format!("g_max={g_scale:.3e}, delta_min={delta_min:.3e}, order={order}");

    let mut out = Vec::new();
    for obs in observables {
        match obs {
            Observable::DispersiveShiftSlope { max_photons } => {
                if model.levels.len() != 2 || model.modes.len() != 1 {
                    return Err(OracleError::TruncationTooSmall(
                        "dispersive-shift observable needs two levels and one mode".into(),
                    ));
                }
                let trunc = FockTruncation::uniform(model.modes.len(), max_photons + 8);
                let (e_g, e_e) = dressed_pair_energies(model, &trunc)?;
                let trunc_big = FockTruncation::uniform(model.modes.len(), max_photons + 12);
                let (e_g2, e_e2) = dressed_pair_energies(model, &trunc_big)?;
                // Mean per-photon slope of the splitting E(e,n) - E(g,n+1).
                let split = |eg: &[f64], ee: &[f64], n: usize| ee[n] - eg[n + 1];
                let mut exact_slope = 0.0;
                let mut exact_slope2 = 0.0;
                let count = (*max_photons as usize).max(1);
                for n in 0..count {
                    exact_slope += (split(&e_g, &e_e, n + 1) - split(&e_g, &e_e, n)) / count as f64;
                    exact_slope2 +=
                        (split(&e_g2, &e_e2, n + 1) - split(&e_g2, &e_e2, n)) / count as f64;
                }
                let m_eff = effective_matrix(model, &h_eff, &trunc, 0.0, true);
                let n_ph = trunc.n_max[0] as usize + 1;
                let idx = |level: usize, ph: usize| level * n_ph + ph;
                let eff_split = |n: usize| -> f64 {
                    m_eff[(idx(1, n), idx(1, n))].re - m_eff[(idx(0, n + 1), idx(0, n + 1))].re
                };
                let mut eff_slope = 0.0;
                for n in 0..count {
                    eff_slope += (eff_split(n + 1) - eff_split(n)) / count as f64;
                }
                let abs_err = libm::fabs(eff_slope - exact_slope);
                out.push(ComparisonReport {
                    observable: format!("dispersive shift slope (0..{max_photons} photons)"),
                    exact: exact_slope,
                    effective: eff_slope,
                    abs_err,
                    rel_err: abs_err / libm::fabs(exact_slope).max(1e-300),
                    dispersive_scale: disp,
                    truncation_shift: libm::fabs(exact_slope2 - exact_slope),
                    truncation: trunc.n_max.clone(),
                    params: params.clone(),
                });
            }
            Observable::QubitShift => {
                if model.levels.len() != 2 || model.modes.len() != 1 {
                    return Err(OracleError::TruncationTooSmall(
                        "qubit-shift observable needs two levels and one mode".into(),
                    ));
                }
                let trunc = FockTruncation::uniform(model.modes.len(), 24);
                let (e_g, e_e) = dressed_pair_energies(model, &trunc)?;
                let trunc_big = FockTruncation::uniform(model.modes.len(), 28);
                let (e_g2, e_e2) = dressed_pair_energies(model, &trunc_big)?;
                let bare = model.levels[1].omega - model.levels[0].omega;
                let exact = e_e[0] - e_g[0] - bare;
                let exact2 = e_e2[0] - e_g2[0] - bare;
                let m_eff = effective_matrix(model, &h_eff, &trunc, 0.0, true);
                let n_ph = trunc.n_max[0] as usize + 1;
                let eff = m_eff[(n_ph, n_ph)].re - m_eff[(0, 0)].re - bare;
                let abs_err = libm::fabs(eff - exact);
                out.push(ComparisonReport {
                    observable: "qubit frequency shift (0 photons)".into(),
                    exact,
                    effective: eff,
                    abs_err,
                    rel_err: abs_err / libm::fabs(exact).max(1e-300),
                    dispersive_scale: disp,
                    truncation_shift: libm::fabs(exact2 - exact),
                    truncation: trunc.n_max.clone(),
                    params: params.clone(),
                });
            }
            Observable::FlipFlop { initial, target, guess } => {
                let sec = sector_hamiltonian(model, core::slice::from_ref(initial), 100_000)?;
                let dim = sec.basis.len();
                let mut psi0 = vec![C64::new(0.0, 0.0); dim];
                let i0 = sec.index_of(initial).expect("seed in basis");
                psi0[i0] = C64::new(1.0, 0.0);
                let mut tgt = vec![C64::new(0.0, 0.0); dim];
                let it = sec
                    .index_of(target)
                    .ok_or_else(|| OracleError::TruncationTooSmall("target outside sector".into()))?;
                tgt[it] = C64::new(1.0, 0.0);
                let exact_series = PopulationSeries::new(&sec.matrix, &psi0, &tgt)?;
                let exact = fit_oscillation_frequency(&exact_series, *guess);
                let m_eff = effective_sector_matrix(model, &h_eff, &sec.basis, 0.0, true);
                let eff_series = PopulationSeries::new(&m_eff, &psi0, &tgt)?;
                let eff = fit_oscillation_frequency(&eff_series, *guess);
                let abs_err = libm::fabs(eff - exact);
                out.push(ComparisonReport {
                    observable: "flip-flop frequency".into(),
                    exact,
                    effective: eff,
                    abs_err,
                    rel_err: abs_err / libm::fabs(exact).max(1e-300),
                    dispersive_scale: disp,
                    truncation_shift: 0.0,
                    truncation: vec![],
                    params: params.clone(),
                });
            }
        }
    }
    Ok(out)
}
