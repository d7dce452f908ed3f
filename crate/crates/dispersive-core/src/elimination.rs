//! Time-averaged adiabatic elimination and effective-Hamiltonian assembly.
//!
//! The elimination prescription retains a weight component oscillating at Δ
//! over the coarse-graining window `T` iff `|Δ|·T < κ`; everything faster
//! averages out and is logged in the dropped-term ledger. Assembly runs
//! enumerate → weights (θ→0 limits with degeneracy handling) → normal
//! ordering → projection → canonical merge, over every order up to the
//! requested one.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};
use num_complex::Complex64 as C64;

use crate::algebra::{normal_order, NormalMonomial};
use crate::diagrams::{enumerate_order_n, DiagramError};
use crate::linalg::CMat;
use crate::model::{
    embed_qubits, validate_model, InteractionModel, ModelBuilder, ModelError,
};
use crate::oracle::{FockTruncation, SectorState};
use crate::weights::{degenerate_limit_weight, WeightError, WeightFunction, WeightTerm};

/// Knobs of the elimination prescription.
#[derive(Debug, Clone, PartialEq)]
pub struct EliminationPolicy {
    /// Coarse-graining time T > 0.
    pub t_window: f64,
    /// Resonance threshold: retain iff |Δ|·T < κ.
    pub kappa: f64,
    /// Absolute tolerance for coincident cumulative detunings.
    pub eps_deg: f64,
    /// Drop constant weight residues left on off-resonant strings.
    pub drop_renormalization: bool,
    /// Half-width of the principal-value exclusion window.
    pub pv_window: f64,
    /// Hard cap on the diagram-class count.
    pub class_cap: usize,
}

impl EliminationPolicy {
    /// Policy with scale-aware defaults: κ = 0.1, eps_deg = 1e-9·max|δ|,
    /// pv window = 1e-3·max|δ|.
    pub fn for_model(model: &InteractionModel, t_window: f64) -> Self {
        let scale = model.max_abs_detuning().max(1.0);
        Self {
            t_window,
            kappa: 0.1,
            eps_deg: 1e-9 * scale,
            drop_renormalization: true,
            pv_window: 1e-3 * scale,
            class_cap: 1_000_000,
        }
    }
}

/// Why a weight component was dropped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropReason {
    /// |Δ|·T ≥ κ.
    FastOscillation,
    /// Constant residue on an off-resonant string (accidental lower-order
    /// resonance), dropped per policy.
    Renormalization,
}

/// Ledger entry for a dropped weight component.
#[derive(Debug, Clone, PartialEq)]
pub struct DroppedRecord {
    pub source_class: String,
    pub string_id: String,
    pub order: usize,
    pub matter_to: usize,
    pub matter_from: usize,
    pub boson: NormalMonomial,
    pub term: WeightTerm,
    pub abs_osc_times_t: f64,
    pub reason: DropReason,
}

/// One retained contribution: matter element ⊗ normal-ordered boson
/// monomial, with a weight function and provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveTerm {
    pub matter_to: usize,
    pub matter_from: usize,
    pub boson: NormalMonomial,
    pub coeff: WeightFunction,
    pub order: usize,
    /// Diagram-class ids that contributed (sorted, deduplicated).
    pub sources: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    /// Resonance fraction of the continuum, when one is present.
    pub r_t: Option<f64>,
    pub warnings: Vec<String>,
    /// Identity-proportional part of the diagonal terms, per boson
    /// monomial: (monomial, mean diagonal weight). Reported, never removed.
    pub global_shift: Vec<(NormalMonomial, WeightFunction)>,
}

/// Assembled effective Hamiltonian: retained corrections of every order up
/// to `order`, the dropped-term ledger, and diagnostics. The free part
/// (level and mode energies) is implicit in the model; matrix builders add
/// it on request.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveHamiltonian {
    pub order: usize,
    pub terms: Vec<EffectiveTerm>,
    pub dropped: Vec<DroppedRecord>,
    pub diagnostics: Diagnostics,
}

impl EffectiveHamiltonian {
    /// Retained terms of one perturbative order.
    pub fn terms_of_order(&self, order: usize) -> impl Iterator<Item = &EffectiveTerm> {
        self.terms.iter().filter(move |t| t.order == order)
    }

    /// The weight of a specific matter element ⊗ monomial, if retained.
    pub fn coeff_of(
        &self,
        matter_to: usize,
        matter_from: usize,
        boson: &NormalMonomial,
    ) -> Option<&WeightFunction> {
        self.terms
            .iter()
            .find(|t| t.matter_to == matter_to && t.matter_from == matter_from && t.boson == *boson)
            .map(|t| &t.coeff)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AssembleError {
    Model(Vec<ModelError>),
    Diagram(DiagramError),
    Weight(WeightError),
}

impl core::fmt::Display for AssembleError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            AssembleError::Model(errs) => {
                write!(f, "invalid model:")?;
                for e in errs {
                    write!(f, " {e};")?;
                }
                Ok(())
            }
            AssembleError::Diagram(e) => write!(f, "enumeration: {e}"),
            AssembleError::Weight(e) => write!(f, "weights: {e}"),
        }
    }
}

impl From<DiagramError> for AssembleError {
    fn from(e: DiagramError) -> Self {
        AssembleError::Diagram(e)
    }
}

impl From<WeightError> for AssembleError {
    fn from(e: WeightError) -> Self {
        AssembleError::Weight(e)
    }
}

/// Split a weight function into the retained part and the dropped
/// components under the time-averaging map: a term survives iff
/// `|osc|·T < κ`. Decay factors are taken in the θ→0 limit first, so
/// retained terms come back with zero decay. Dropped components are
/// returned with their `|Δ|·T`.
pub fn project(
    wf: &WeightFunction,
    policy: &EliminationPolicy,
) -> (WeightFunction, Vec<(WeightTerm, f64)>) {
    let mut kept = WeightFunction::zero();
    let mut dropped = Vec::new();
    for term in &wf.terms {
        let mut limit = *term;
        limit.decay = 0.0;
        let speed = libm::fabs(limit.osc) * policy.t_window;
        if speed < policy.kappa {
            kept.push(limit);
        } else {
            dropped.push((limit, speed));
        }
    }
    (kept.normalized(), dropped)
}

/// Run the full derivation pipeline on a validated model.
///
/// Per-qubit models are embedded onto the register basis first. Orders
/// 0..=n are all enumerated; order 0 is the bare interaction itself, whose
/// fast components land in the ledger (the rotating-wave droppings).
pub fn assemble_effective(
    model: &InteractionModel,
    n: usize,
    policy: &EliminationPolicy,
) -> Result<EffectiveHamiltonian, AssembleError> {
    let embedded;
    let model = if model.qubits.is_some() {
        embedded = embed_qubits(model).map_err(|e| AssembleError::Model(vec![e]))?;
        &embedded
    } else {
        model
    };
    validate_model(model).map_err(AssembleError::Model)?;

    // Keyed by (order, matter_to, matter_from, boson monomial).
    type TermKey = (usize, usize, usize, NormalMonomial);
    let mut retained: BTreeMap<TermKey, (WeightFunction, Vec<String>)> = BTreeMap::new();
    let mut dropped: Vec<DroppedRecord> = Vec::new();
    let mut diagnostics = Diagnostics::default();
    let osc_scale = model.max_abs_detuning().max(1.0);

    for order in 0..=n {
        let classes = enumerate_order_n(model, order, policy.class_cap)?;
        for class in &classes {
            let class_id = class.id();
            for s in &class.members {
                let (wf, report) = degenerate_limit_weight(model, s, policy.eps_deg)?;
                if report.has_secular_terms {
                    let slow_secular = wf.terms.iter().any(|w| {
                        w.t_power >= 1 && libm::fabs(w.osc) * policy.t_window < policy.kappa
                    });
                    if slow_secular {
                        diagnostics.warnings.push(format!(
                            "string {} keeps a secular t^p term inside the resonance window",
                            s.id()
                        ));
                    }
                }
                let matter_to = s.to_level(model);
                let matter_from = s.from_level(model);
                let final_detuning = s.final_detuning(model);
                let string_off_resonant =
                    libm::fabs(final_detuning) * policy.t_window >= policy.kappa;
                let poly = normal_order(&s.boson_string(model));
                for (mono, contraction) in &poly.terms {
                    let scaled = wf.scaled(*contraction);
                    let (kept, cut) = project(&scaled, policy);
                    for (term, speed) in cut {
                        dropped.push(DroppedRecord {
                            source_class: class_id.clone(),
                            string_id: s.id(),
                            order,
                            matter_to,
                            matter_from,
                            boson: mono.clone(),
                            term,
                            abs_osc_times_t: speed,
                            reason: DropReason::FastOscillation,
                        });
                    }
                    let mut kept_final = WeightFunction::zero();
                    for term in &kept.terms {
                        let is_constant =
                            term.t_power == 0 && libm::fabs(term.osc) <= 1e-12 * osc_scale;
                        if is_constant && string_off_resonant && policy.drop_renormalization {
                            dropped.push(DroppedRecord {
                                source_class: class_id.clone(),
                                string_id: s.id(),
                                order,
                                matter_to,
                                matter_from,
                                boson: mono.clone(),
                                term: *term,
                                abs_osc_times_t: libm::fabs(term.osc) * policy.t_window,
                                reason: DropReason::Renormalization,
                            });
                        } else {
                            kept_final.push(*term);
                        }
                    }
                    let kept_final = kept_final.normalized();
                    if kept_final.terms.is_empty() {
                        continue;
                    }
                    let entry = retained
                        .entry((order, matter_to, matter_from, mono.clone()))
                        .or_insert_with(|| (WeightFunction::zero(), Vec::new()));
                    entry.0.add(&kept_final);
                    if !entry.1.contains(&class_id) {
                        entry.1.push(class_id.clone());
                    }
                }
            }
        }
    }

    let mut terms: Vec<EffectiveTerm> = Vec::new();
    for ((order, matter_to, matter_from, boson), (coeff, mut sources)) in retained {
        let coeff = coeff.normalized();
        if coeff.terms.is_empty() {
            continue;
        }
        sources.sort();
        terms.push(EffectiveTerm { matter_to, matter_from, boson, coeff, order, sources });
    }
    terms.sort_by(|a, b| {
        (a.order, a.matter_to, a.matter_from, &a.boson).cmp(&(
            b.order,
            b.matter_to,
            b.matter_from,
            &b.boson,
        ))
    });

    // Identity-proportional diagonal content, reported per boson monomial.
    let n_levels = model.levels.len() as f64;
    let mut by_mono: BTreeMap<NormalMonomial, WeightFunction> = BTreeMap::new();
    for t in &terms {
        if t.matter_to == t.matter_from {
            by_mono.entry(t.boson.clone()).or_default().add(&t.coeff);
        }
    }
    for (mono, mut sum) in by_mono {
        sum.scale(C64::new(1.0 / n_levels, 0.0));
        let sum = sum.normalized();
        if !sum.terms.is_empty() {
            diagnostics.global_shift.push((mono, sum));
        }
    }

    if model.modes.iter().any(|m| m.quad_weight.is_some()) {
        if let Ok(rt) = resonance_fraction(model, policy) {
            if !(rt < 0.1) {
                diagnostics
                    .warnings
                    .push(format!("continuum resonance fraction R_T = {rt:.3e} is not << 1"));
            }
            diagnostics.r_t = Some(rt);
        }
    }

    Ok(EffectiveHamiltonian { order: n, terms, dropped, diagnostics })
}

// ---------------------------------------------------------------------------
// Matrix realizations
// ---------------------------------------------------------------------------

fn apply_monomial_dense(
    mono: &NormalMonomial,
    occs: &[u32],
    n_max: &[u32],
) -> Option<(Vec<u32>, f64)> {
    let mut occs = occs.to_vec();
    let mut amp = 1.0f64;
    for &m in mono.annihilators.iter().rev() {
        if occs[m] == 0 {
            return None;
        }
        amp *= libm::sqrt(occs[m] as f64);
        occs[m] -= 1;
    }
    for &m in mono.creators.iter().rev() {
        if occs[m] >= n_max[m] {
            return None;
        }
        amp *= libm::sqrt(occs[m] as f64 + 1.0);
        occs[m] += 1;
    }
    Some((occs, amp))
}

/// Dense matrix of the effective Hamiltonian at time `t` in a truncated
/// Fock basis (same basis order as [`crate::oracle::fock_hamiltonian`]).
/// With `include_free` the bare level/mode energies are added.
pub fn effective_matrix(
    model: &InteractionModel,
    h_eff: &EffectiveHamiltonian,
    trunc: &FockTruncation,
    t: f64,
    include_free: bool,
) -> CMat {
    let n_levels = model.levels.len();
    let dim = trunc.dimension(n_levels);
    let mut h = CMat::zeros(dim, dim);
    let sizes: Vec<usize> = trunc.n_max.iter().map(|&n| n as usize + 1).collect();
    let decode = |idx: usize| -> (usize, Vec<u32>) {
        let mut rem = idx;
        let mut occs = vec![0u32; sizes.len()];
        for m in (0..sizes.len()).rev() {
            occs[m] = (rem % sizes[m]) as u32;
            rem /= sizes[m];
        }
        (rem, occs)
    };
    let encode = |level: usize, occs: &[u32]| -> usize {
        let mut idx = level;
        for (m, &occ) in occs.iter().enumerate() {
            idx = idx * sizes[m] + occ as usize;
        }
        idx
    };
    for idx in 0..dim {
        let (lvl, occs) = decode(idx);
        if include_free {
            let mut e = model.levels[lvl].omega;
            for (m, &occ) in occs.iter().enumerate() {
                e += occ as f64 * model.modes[m].omega;
            }
            h[(idx, idx)] += C64::new(e, 0.0);
        }
        for term in &h_eff.terms {
            let from = model.levels.iter().position(|l| l.id == term.matter_from).unwrap();
            if from != lvl {
                continue;
            }
            let to = model.levels.iter().position(|l| l.id == term.matter_to).unwrap();
            if let Some((occs_new, amp)) = apply_monomial_dense(&term.boson, &occs, &trunc.n_max) {
                let jdx = encode(to, &occs_new);
                h[(jdx, idx)] += term.coeff.eval(t) * amp;
            }
        }
    }
    h
}

/// Effective Hamiltonian restricted to an explicit sector basis (states
/// must be sorted); images that leave the basis are projected out.
pub fn effective_sector_matrix(
    model: &InteractionModel,
    h_eff: &EffectiveHamiltonian,
    basis: &[SectorState],
    t: f64,
    include_free: bool,
) -> CMat {
    let dim = basis.len();
    let mut h = CMat::zeros(dim, dim);
    for (idx, s) in basis.iter().enumerate() {
        if include_free {
            let mut e = model.level(s.level).omega;
            for &(m, nocc) in &s.occ {
                e += nocc as f64 * model.modes[m].omega;
            }
            h[(idx, idx)] += C64::new(e, 0.0);
        }
        for term in &h_eff.terms {
            if term.matter_from != s.level {
                continue;
            }
            let mut occ_map: BTreeMap<usize, u32> = s.occ.iter().copied().collect();
            let mut amp = 1.0f64;
            let mut dead = false;
            for &m in term.boson.annihilators.iter().rev() {
                let occ = occ_map.get(&m).copied().unwrap_or(0);
                if occ == 0 {
                    dead = true;
                    break;
                }
                amp *= libm::sqrt(occ as f64);
                if occ == 1 {
                    occ_map.remove(&m);
                } else {
                    occ_map.insert(m, occ - 1);
                }
            }
            if dead {
                continue;
            }
            for &m in term.boson.creators.iter().rev() {
                let occ = occ_map.get(&m).copied().unwrap_or(0);
                amp *= libm::sqrt(occ as f64 + 1.0);
                occ_map.insert(m, occ + 1);
            }
            let target = SectorState {
                level: term.matter_to,
                occ: occ_map.into_iter().collect(),
            };
            if let Ok(jdx) = basis.binary_search(&target) {
                h[(jdx, idx)] += term.coeff.eval(t) * amp;
            }
        }
    }
    h
}

/// σ_z-form coefficient of a boson monomial over a two-level pair:
/// `(c_excited - c_ground) / 2`.
pub fn sigma_z_coefficient(
    h_eff: &EffectiveHamiltonian,
    ground: usize,
    excited: usize,
    boson: &NormalMonomial,
) -> WeightFunction {
    let mut out = WeightFunction::zero();
    if let Some(ce) = h_eff.coeff_of(excited, excited, boson) {
        out.add(&ce.scaled(C64::new(0.5, 0.0)));
    }
    if let Some(cg) = h_eff.coeff_of(ground, ground, boson) {
        out.add(&cg.scaled(C64::new(-0.5, 0.0)));
    }
    out.normalized()
}

// ---------------------------------------------------------------------------
// Continuum discretization, principal values, resonance fraction
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub enum EnvelopeShape {
    Gaussian { amp: f64, center: f64, width: f64 },
    Flat { amp: f64 },
    /// Piecewise-linear table of (ω, g(ω)), sorted by ω.
    Table { points: Vec<(f64, f64)> },
}

/// A coupling envelope g(ω) on a compact support.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuumEnvelope {
    pub support: (f64, f64),
    pub shape: EnvelopeShape,
}

impl ContinuumEnvelope {
    pub fn eval(&self, omega: f64) -> f64 {
        if omega < self.support.0 || omega > self.support.1 {
            return 0.0;
        }
        match &self.shape {
            EnvelopeShape::Gaussian { amp, center, width } => {
                let x = (omega - center) / width;
                amp * libm::exp(-0.5 * x * x)
            }
            EnvelopeShape::Flat { amp } => *amp,
            EnvelopeShape::Table { points } => {
                if points.is_empty() {
                    return 0.0;
                }
                if omega <= points[0].0 {
                    return points[0].1;
                }
                for w in points.windows(2) {
                    if omega <= w[1].0 {
                        let f = (omega - w[0].0) / (w[1].0 - w[0].0);
                        return w[0].1 + f * (w[1].1 - w[0].1);
                    }
                }
                points.last().unwrap().1
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ContinuumError {
    EmptySupport,
    NonFiniteEnvelope(f64),
    NoSamples,
    PoleWindowUnresolved { spacing: f64, window: f64 },
    NoContinuum,
}

impl core::fmt::Display for ContinuumError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ContinuumError::EmptySupport => write!(f, "continuum support is empty"),
            ContinuumError::NonFiniteEnvelope(w) => {
                write!(f, "envelope is not finite at omega = {w}")
            }
            ContinuumError::NoSamples => write!(f, "sample count must be positive"),
            ContinuumError::PoleWindowUnresolved { spacing, window } => write!(
                f,
                "principal-value window {window} is below the grid spacing {spacing}"
            ),
            ContinuumError::NoContinuum => write!(f, "model has no continuum-sampled modes"),
        }
    }
}

/// One midpoint sample of a discretized continuum family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuumSample {
    pub omega: f64,
    pub quad_weight: f64,
    /// Rescaled coupling `g(ω_k) √(Δω)`, so discrete sums converge to the
    /// continuum integrals with standard ladder commutators.
    pub coupling: f64,
}

/// Midpoint-rule discretization of an envelope into `samples` bins.
pub fn discretize_continuum(
    env: &ContinuumEnvelope,
    samples: usize,
) -> Result<Vec<ContinuumSample>, ContinuumError> {
    let (lo, hi) = env.support;
    if !(hi > lo) {
        return Err(ContinuumError::EmptySupport);
    }
    if samples == 0 {
        return Err(ContinuumError::NoSamples);
    }
    let dw = (hi - lo) / samples as f64;
    let mut out = Vec::with_capacity(samples);
    for k in 0..samples {
        let omega = lo + (k as f64 + 0.5) * dw;
        let g = env.eval(omega);
        if !g.is_finite() {
            return Err(ContinuumError::NonFiniteEnvelope(omega));
        }
        out.push(ContinuumSample { omega, quad_weight: dw, coupling: g * libm::sqrt(dw) });
    }
    Ok(out)
}

/// Attach a discretized continuum family to a model under construction:
/// one coupling (plus partner) per sample, all on the `from → to`
/// transition with the given dagger orientation.
pub fn add_continuum_family(
    b: &mut ModelBuilder,
    sigma: &str,
    env: &ContinuumEnvelope,
    samples: usize,
    from: usize,
    to: usize,
    dagger: bool,
) -> Result<Vec<usize>, ContinuumError> {
    let samples = discretize_continuum(env, samples)?;
    let mut modes = Vec::with_capacity(samples.len());
    for s in &samples {
        let m = b.continuum_sample(sigma, s.omega, s.quad_weight);
        b.coupling(from, to, m, dagger, C64::new(s.coupling, 0.0));
        modes.push(m);
    }
    Ok(modes)
}

/// Principal-value parts of `∫ φ(ω)/(ω - pole) dω` over a sampled support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PvParts {
    /// Symmetric-window principal value.
    pub principal: C64,
    /// The Sokhotski–Plemelj arc `iπ φ(pole)` (zero when the pole lies
    /// outside the support); the `-i0⁺` boundary value is
    /// `principal + plemelj`.
    pub plemelj: C64,
    pub pole_inside: bool,
}

/// Midpoint quadrature of the principal value with a symmetric exclusion
/// window of half-width `pv_window` around the pole, plus a first-order
/// window correction `2W φ'(pole)`; the Plemelj term is reported
/// separately.
pub fn pv_integral<F: Fn(f64) -> C64>(
    phi: F,
    support: (f64, f64),
    pole: f64,
    samples: usize,
    pv_window: f64,
) -> Result<PvParts, ContinuumError> {
    let (lo, hi) = support;
    if !(hi > lo) {
        return Err(ContinuumError::EmptySupport);
    }
    if samples == 0 {
        return Err(ContinuumError::NoSamples);
    }
    let dw = (hi - lo) / samples as f64;
    let pole_inside = pole > lo && pole < hi;
    if pole_inside && pv_window < dw {
        return Err(ContinuumError::PoleWindowUnresolved { spacing: dw, window: pv_window });
    }
    let mut acc = C64::new(0.0, 0.0);
    for k in 0..samples {
        let omega = lo + (k as f64 + 0.5) * dw;
        if libm::fabs(omega - pole) <= pv_window {
            continue;
        }
        let val = phi(omega);
        if !val.re.is_finite() || !val.im.is_finite() {
            return Err(ContinuumError::NonFiniteEnvelope(omega));
        }
        acc += val / (omega - pole) * dw;
    }
    if pole_inside {
        // The excluded symmetric window contributes 2W φ'(pole) + O(W³).
        let h = 0.5 * pv_window;
        let dphi = (phi(pole + h) - phi(pole - h)) / (2.0 * h);
        acc += dphi * (2.0 * pv_window);
    }
    let plemelj = if pole_inside {
        C64::new(0.0, core::f64::consts::PI) * phi(pole)
    } else {
        C64::new(0.0, 0.0)
    };
    Ok(PvParts { principal: acc, plemelj, pole_inside })
}

/// Two-route evaluation of a mediated-coupling coefficient
/// `½ ∫ K(ω) [1/(δ(ω) - iθ) - 1/(-δ(ω) - iθ)] dω` with `δ(ω) = ω - pole`.
///
/// The regulated route sends θ → 0 by Richardson extrapolation; the
/// principal-value route uses the Sokhotski–Plemelj split, in which the two
/// arc terms cancel, leaving the bare principal value. Agreement of the two
/// routes, with a vanishing imaginary remainder on the regulated side, is
/// the numerical form of that cancellation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MediatedCoefficient {
    /// θ→0 limit of the regulated bracket `½(I₊ - I₋)`.
    pub regulated_limit: C64,
    /// Principal value of `∫ K(ω)/(ω - pole) dω`.
    pub principal_value: C64,
    /// |Im regulated| / |regulated| after cancellation.
    pub plemelj_residual: f64,
    /// Arc size of one bracket half, `Im ∫ K/(δ - iθ)` at the smallest θ;
    /// compare with π·K(pole) to see that the cancelling pieces were
    /// individually nonzero.
    pub single_arc: f64,
}

pub fn mediated_coefficient<F: Fn(f64) -> C64 + Copy>(
    kernel: F,
    support: (f64, f64),
    pole: f64,
    samples: usize,
    pv_window: f64,
) -> Result<MediatedCoefficient, ContinuumError> {
    let (lo, hi) = support;
    if !(hi > lo) {
        return Err(ContinuumError::EmptySupport);
    }
    if samples == 0 {
        return Err(ContinuumError::NoSamples);
    }
    let dw = (hi - lo) / samples as f64;
    // I₊(θ) = ∫ K/(δ - iθ), I₋(θ) = ∫ K/(-δ - iθ); each carries an arc
    // Im → ±..+πK(pole), the bracket ½(I₊ - I₋) does not.
    let halves_at = |theta: f64| -> (C64, C64) {
        let mut plus = C64::new(0.0, 0.0);
        let mut minus = C64::new(0.0, 0.0);
        for k in 0..samples {
            let omega = lo + (k as f64 + 0.5) * dw;
            let delta = omega - pole;
            let kval = kernel(omega) * dw;
            plus += kval / C64::new(delta, -theta);
            minus += kval / C64::new(-delta, -theta);
        }
        (plus, minus)
    };
    // θ stays well above the grid spacing so the discretized arcs are
    // resolved; the bracket is extrapolated quadratically to θ = 0.
    let theta0 = (24.0 * dw).max(1e-6 * (hi - lo));
    let bracket_at = |theta: f64| -> C64 {
        let (p, m) = halves_at(theta);
        (p - m) * 0.5
    };
    let v1 = bracket_at(theta0);
    let v2 = bracket_at(0.5 * theta0);
    let v3 = bracket_at(0.25 * theta0);
    let regulated_limit = (v3 * 8.0 - v2 * 6.0 + v1) / 3.0;
    let (p3, _) = halves_at(0.25 * theta0);
    let pv = pv_integral(kernel, support, pole, samples, pv_window)?;
    let plemelj_residual = regulated_limit.im.abs() / regulated_limit.norm().max(1e-300);
    Ok(MediatedCoefficient {
        regulated_limit,
        principal_value: pv.principal,
        plemelj_residual,
        single_arc: p3.im,
    })
}

/// Coupling-weighted fraction of the continuum inside the resonance
/// window: `Σ_res |g_k|² / Σ_offres |g_k|²` over operators on
/// continuum-sampled modes (`|g_k|² = |g(ω_k)|² Δω`).
pub fn resonance_fraction(
    model: &InteractionModel,
    policy: &EliminationPolicy,
) -> Result<f64, ContinuumError> {
    let mut res = 0.0f64;
    let mut off = 0.0f64;
    let mut any = false;
    for op in &model.ops {
        if model.modes[op.mode].kind != crate::model::ModeKind::ContinuumSample {
            continue;
        }
        any = true;
        let weight = op.g.norm_sqr();
        if libm::fabs(model.detuning_of(op)) * policy.t_window < policy.kappa {
            res += weight;
        } else {
            off += weight;
        }
    }
    if !any {
        return Err(ContinuumError::NoContinuum);
    }
    if off == 0.0 {
        return Ok(if res == 0.0 { 0.0 } else { f64::INFINITY });
    }
    Ok(res / off)
}
