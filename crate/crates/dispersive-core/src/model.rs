//! Light-matter interaction models: matter levels, bosonic modes, one-photon
//! coupling operators, validation, preset builders, and the qubit-register
//! embedding.
//!
//! Conventions (ħ = 1, dimensionless frequencies):
//! - a coupling operator `|to><from| ⊗ a(ω)` (absorption) or
//!   `|to><from| ⊗ a†(ω)` (emission) carries detuning
//!   `(-1)^c ω - (ω_to - ω_from)` with `c = 0` for absorption, `1` for
//!   emission;
//! - the operator list is closed under Hermitian conjugation, so the number
//!   of operators `M` is even.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64 as C64;

/// A matter level.
#[derive(Debug, Clone, PartialEq)]
pub struct MatterLevel {
    pub id: usize,
    pub name: String,
    pub omega: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeKind {
    Discrete,
    /// A quadrature sample of a frequency continuum; `quad_weight` is the
    /// bin width used when the sample was produced.
    ContinuumSample,
}

/// A bosonic mode, identified by its auxiliary tag and frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct BosonMode {
    pub sigma: String,
    pub omega: f64,
    pub kind: ModeKind,
    pub quad_weight: Option<f64>,
}

/// A one-photon coupling operator `g |to><from| ⊗ a(ω)` (or `a†(ω)`).
#[derive(Debug, Clone, PartialEq)]
pub struct ZerothOp {
    pub from_level: usize,
    pub to_level: usize,
    /// Index into `InteractionModel::modes`.
    pub mode: usize,
    pub dagger: bool,
    pub g: C64,
    /// Regulator θ > 0 attached to this operator's detuning.
    pub theta: f64,
}

/// Which register levels realize one qubit of a multi-qubit model.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitSpec {
    pub ground: usize,
    pub excited: usize,
    pub omega: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InteractionModel {
    pub levels: Vec<MatterLevel>,
    pub modes: Vec<BosonMode>,
    pub ops: Vec<ZerothOp>,
    /// Present when the model is declared per-qubit (e.g. the Tavis-Cummings
    /// and Dicke presets); such a model must be passed through
    /// [`embed_qubits`] before enumeration.
    pub qubits: Option<Vec<QubitSpec>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelError {
    DuplicateLevelId(usize),
    NonFiniteFrequency(String),
    DuplicateModeLabel(String),
    BadQuadWeight(String),
    DanglingLevel { op: usize, level: usize },
    DanglingMode { op: usize, mode: usize },
    DiagonalOp { op: usize },
    NonPositiveTheta { op: usize },
    MissingHermitianPartner { op: usize },
    UnknownPreset(String),
    MissingParameter(String),
    NotQubitForm,
}

impl core::fmt::Display for ModelError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ModelError::DuplicateLevelId(id) => write!(f, "duplicate level id {id}"),
            ModelError::NonFiniteFrequency(what) => write!(f, "non-finite frequency in {what}"),
            ModelError::DuplicateModeLabel(s) => write!(f, "duplicate mode label {s}"),
            ModelError::BadQuadWeight(s) => write!(f, "bad quadrature weight on mode {s}"),
            ModelError::DanglingLevel { op, level } => {
                write!(f, "coupling {op} references missing level {level}")
            }
            ModelError::DanglingMode { op, mode } => {
                write!(f, "coupling {op} references missing mode {mode}")
            }
            ModelError::DiagonalOp { op } => {
                write!(f, "coupling {op} is a diagonal zeroth-order operator (from = to)")
            }
            ModelError::NonPositiveTheta { op } => write!(f, "coupling {op} has theta <= 0"),
            ModelError::MissingHermitianPartner { op } => {
                write!(f, "coupling {op} has no Hermitian partner")
            }
            ModelError::UnknownPreset(s) => write!(f, "unknown preset {s}"),
            ModelError::MissingParameter(s) => write!(f, "missing parameter {s}"),
            ModelError::NotQubitForm => write!(f, "model is not declared in per-qubit form"),
        }
    }
}

impl InteractionModel {
    pub fn level(&self, id: usize) -> &MatterLevel {
        self.levels.iter().find(|l| l.id == id).expect("level id resolves")
    }

    pub fn mode(&self, idx: usize) -> &BosonMode {
        &self.modes[idx]
    }

    /// Number of coupling operators (even for a validated model).
    pub fn op_count(&self) -> usize {
        self.ops.len()
    }

    /// Detuning of operator `op`: `(-1)^c ω_mode - (ω_to - ω_from)`.
    pub fn detuning_of(&self, op: &ZerothOp) -> f64 {
        let omega_mode = self.modes[op.mode].omega;
        let photon = if op.dagger { -omega_mode } else { omega_mode };
        photon - (self.level(op.to_level).omega - self.level(op.from_level).omega)
    }

    /// Index of the Hermitian partner of `ops[idx]`, if present.
    pub fn dagger_partner(&self, idx: usize) -> Option<usize> {
        let op = &self.ops[idx];
        self.ops.iter().position(|p| {
            p.from_level == op.to_level
                && p.to_level == op.from_level
                && p.mode == op.mode
                && p.dagger != op.dagger
                && (p.g - op.g.conj()).norm() <= 1e-15 * (1.0 + op.g.norm())
        })
    }

    /// Largest |detuning| over all operators (0 if there are none).
    pub fn max_abs_detuning(&self) -> f64 {
        self.ops
            .iter()
            .map(|op| libm::fabs(self.detuning_of(op)))
            .fold(0.0, f64::max)
    }

    /// Rescale every coupling amplitude by `lambda` (regulators untouched).
    pub fn scale_couplings(&self, lambda: f64) -> InteractionModel {
        let mut m = self.clone();
        for op in &mut m.ops {
            op.g *= lambda;
        }
        m
    }
}

/// Default regulator scale: `1e-9 × max |δ|`, or `1e-9` if every detuning
/// vanishes. Individual regulators are staggered so cumulative sums stay
/// strictly increasing and pairwise distinct.
pub fn default_theta(model: &InteractionModel) -> f64 {
    let scale = model.max_abs_detuning();
    if scale > 0.0 {
        1e-9 * scale
    } else {
        1e-9
    }
}

/// Validate every type invariant; returns all violations, not just the first.
pub fn validate_model(model: &InteractionModel) -> Result<&InteractionModel, Vec<ModelError>> {
    let mut errors = Vec::new();
    let mut seen = BTreeMap::new();
    for l in &model.levels {
        if seen.insert(l.id, ()).is_some() {
            errors.push(ModelError::DuplicateLevelId(l.id));
        }
        if !l.omega.is_finite() {
            errors.push(ModelError::NonFiniteFrequency(format!("level {}", l.id)));
        }
    }
    let mut mode_labels = BTreeMap::new();
    for m in &model.modes {
        let key = (m.sigma.clone(), m.omega.to_bits());
        if mode_labels.insert(key, ()).is_some() {
            errors.push(ModelError::DuplicateModeLabel(format!("{}:{}", m.sigma, m.omega)));
        }
        if !m.omega.is_finite() || m.omega < 0.0 {
            errors.push(ModelError::NonFiniteFrequency(format!("mode {}", m.sigma)));
        }
        match (m.kind, m.quad_weight) {
            (ModeKind::ContinuumSample, Some(w)) if w > 0.0 => {}
            (ModeKind::ContinuumSample, _) => {
                errors.push(ModelError::BadQuadWeight(m.sigma.clone()))
            }
            (ModeKind::Discrete, None) => {}
            (ModeKind::Discrete, Some(_)) => errors.push(ModelError::BadQuadWeight(m.sigma.clone())),
        }
    }
    for (i, op) in model.ops.iter().enumerate() {
        for lvl in [op.from_level, op.to_level] {
            if !model.levels.iter().any(|l| l.id == lvl) {
                errors.push(ModelError::DanglingLevel { op: i, level: lvl });
            }
        }
        if op.mode >= model.modes.len() {
            errors.push(ModelError::DanglingMode { op: i, mode: op.mode });
        }
        if op.from_level == op.to_level {
            errors.push(ModelError::DiagonalOp { op: i });
        }
        if !(op.theta > 0.0) {
            errors.push(ModelError::NonPositiveTheta { op: i });
        }
    }
    // Hermitian closure needs resolvable references; only check when clean.
    if errors.is_empty() {
        for i in 0..model.ops.len() {
            if model.dagger_partner(i).is_none() {
                errors.push(ModelError::MissingHermitianPartner { op: i });
            }
        }
    }
    if errors.is_empty() {
        Ok(model)
    } else {
        Err(errors)
    }
}

/// Builder that adds a coupling together with its Hermitian partner.
pub struct ModelBuilder {
    levels: Vec<MatterLevel>,
    modes: Vec<BosonMode>,
    ops: Vec<ZerothOp>,
    qubits: Option<Vec<QubitSpec>>,
    theta_seed: f64,
}

impl ModelBuilder {
    pub fn new() -> Self {
        Self {
            levels: Vec::new(),
            modes: Vec::new(),
            ops: Vec::new(),
            qubits: None,
            theta_seed: 0.0,
        }
    }

    pub fn level(&mut self, name: &str, omega: f64) -> usize {
        let id = self.levels.len();
        self.levels.push(MatterLevel { id, name: name.to_string(), omega });
        id
    }

    pub fn discrete_mode(&mut self, sigma: &str, omega: f64) -> usize {
        self.modes.push(BosonMode {
            sigma: sigma.to_string(),
            omega,
            kind: ModeKind::Discrete,
            quad_weight: None,
        });
        self.modes.len() - 1
    }

    pub fn continuum_sample(&mut self, sigma: &str, omega: f64, quad_weight: f64) -> usize {
        self.modes.push(BosonMode {
            sigma: sigma.to_string(),
            omega,
            kind: ModeKind::ContinuumSample,
            quad_weight: Some(quad_weight),
        });
        self.modes.len() - 1
    }

    /// Add `g |to><from| ⊗ a(ω)` (`dagger = false`) or `⊗ a†(ω)` plus the
    /// Hermitian partner. `theta = 0` requests the model-scale default.
    pub fn coupling(&mut self, from: usize, to: usize, mode: usize, dagger: bool, g: C64) {
        // Staggered placeholder thetas; rescaled in `finish`.
        self.theta_seed += 1.0;
        let t1 = self.theta_seed;
        self.theta_seed += 1.0;
        let t2 = self.theta_seed;
        self.ops.push(ZerothOp { from_level: from, to_level: to, mode, dagger, g, theta: t1 });
        self.ops.push(ZerothOp {
            from_level: to,
            to_level: from,
            mode,
            dagger: !dagger,
            g: g.conj(),
            theta: t2,
        });
    }

    pub fn qubit_structure(&mut self, qubits: Vec<QubitSpec>) {
        self.qubits = Some(qubits);
    }

    pub fn finish(self) -> InteractionModel {
        let mut model = InteractionModel {
            levels: self.levels,
            modes: self.modes,
            ops: self.ops,
            qubits: self.qubits,
        };
        // Distinct regulators, all at the default scale: theta_k = θ0 (1 + k/M).
        let theta0 = default_theta(&model);
        let m = model.ops.len().max(1) as f64;
        for (k, op) in model.ops.iter_mut().enumerate() {
            op.theta = theta0 * (1.0 + k as f64 / m);
        }
        model
    }
}

impl Default for ModelBuilder {
    fn default() -> Self {
        Self::new()
    }
}

/// Preset parameter map (string keys, numeric values).
pub type Params = BTreeMap<String, f64>;

fn need(params: &Params, key: &str) -> Result<f64, ModelError> {
    params.get(key).copied().ok_or_else(|| ModelError::MissingParameter(key.to_string()))
}

fn get_or(params: &Params, key: &str, default: f64) -> f64 {
    params.get(key).copied().unwrap_or(default)
}

/// Build one of the worked-example models.
///
/// Recognized names and parameters:
/// - `jc`, `rabi`: `omega_e`, `omega_c`, `g`
/// - `tavis_cummings`, `dicke`: `n_qubits`, `omega_c`, then per-qubit
///   `omega_1..`, `g_1..` (or uniform `omega_q`, `g`)
/// - `three_level_xi` / `three_level_lambda` / `three_level_v`:
///   `omega_beta`, `omega_gamma`, `omega_i`, `omega_j`, `g_i`, `g_j`
///   (level α sits at zero; families i and j couple α↔β and β↔γ)
pub fn build_preset(name: &str, params: &Params) -> Result<InteractionModel, ModelError> {
    match name {
        "jc" | "rabi" => {
            let omega_e = need(params, "omega_e")?;
            let omega_c = need(params, "omega_c")?;
            let g = need(params, "g")?;
            let mut b = ModelBuilder::new();
            let g_lvl = b.level("g", 0.0);
            let e_lvl = b.level("e", omega_e);
            let c = b.discrete_mode("c", omega_c);
            // Co-rotating pair: |e><g| a + h.c.
            b.coupling(g_lvl, e_lvl, c, false, C64::new(g, 0.0));
            if name == "rabi" {
                // Counter-rotating pair: |g><e| a + h.c.
                b.coupling(e_lvl, g_lvl, c, false, C64::new(g, 0.0));
            }
            Ok(b.finish())
        }
        "tavis_cummings" | "dicke" => {
            let n = need(params, "n_qubits")? as usize;
            if n == 0 {
                return Err(ModelError::MissingParameter("n_qubits >= 1".to_string()));
            }
            let omega_c = need(params, "omega_c")?;
            let mut b = ModelBuilder::new();
            let c = b.discrete_mode("c", omega_c);
            let mut qubits = Vec::with_capacity(n);
            for l in 0..n {
                let omega_l = params
                    .get(&format!("omega_{}", l + 1))
                    .copied()
                    .unwrap_or(get_or(params, "omega_q", f64::NAN));
                if !omega_l.is_finite() {
                    return Err(ModelError::MissingParameter(format!("omega_{}", l + 1)));
                }
                let g_l = params
                    .get(&format!("g_{}", l + 1))
                    .copied()
                    .unwrap_or(get_or(params, "g", f64::NAN));
                if !g_l.is_finite() {
                    return Err(ModelError::MissingParameter(format!("g_{}", l + 1)));
                }
                let gnd = b.level(&format!("g{}", l + 1), -0.5 * omega_l);
                let exc = b.level(&format!("e{}", l + 1), 0.5 * omega_l);
                // sigma_+^l a + h.c.
                b.coupling(gnd, exc, c, false, C64::new(g_l, 0.0));
                if name == "dicke" {
                    // sigma_-^l a + h.c.
                    b.coupling(exc, gnd, c, false, C64::new(g_l, 0.0));
                }
                qubits.push(QubitSpec { ground: gnd, excited: exc, omega: omega_l });
            }
            b.qubit_structure(qubits);
            Ok(b.finish())
        }
        "three_level_xi" | "three_level_lambda" | "three_level_v" => {
            let omega_beta = need(params, "omega_beta")?;
            let omega_gamma = need(params, "omega_gamma")?;
            let omega_i = need(params, "omega_i")?;
            let omega_j = need(params, "omega_j")?;
            let g_i = need(params, "g_i")?;
            let g_j = need(params, "g_j")?;
            let mut b = ModelBuilder::new();
            let alpha = b.level("alpha", 0.0);
            let beta = b.level("beta", omega_beta);
            let gamma = b.level("gamma", omega_gamma);
            let mi = b.discrete_mode("i", omega_i);
            let mj = b.discrete_mode("j", omega_j);
            // Only α↔β and β↔γ are coupled; the co-rotating orientation of
            // each pair follows the level ordering of the configuration.
            match name {
                // Ξ ladder: α < β < γ. Absorb on both rungs.
                "three_level_xi" => {
                    b.coupling(alpha, beta, mi, false, C64::new(g_i, 0.0));
                    b.coupling(beta, gamma, mj, false, C64::new(g_j, 0.0));
                }
                // Λ: β on top. Absorb α→β, absorb γ→β.
                "three_level_lambda" => {
                    b.coupling(alpha, beta, mi, false, C64::new(g_i, 0.0));
                    b.coupling(gamma, beta, mj, false, C64::new(g_j, 0.0));
                }
                // V: β at the bottom. Both β→α and β→γ absorb.
                _ => {
                    b.coupling(beta, alpha, mi, false, C64::new(g_i, 0.0));
                    b.coupling(beta, gamma, mj, false, C64::new(g_j, 0.0));
                }
            }
            Ok(b.finish())
        }
        other => Err(ModelError::UnknownPreset(other.to_string())),
    }
}

/// Lift a per-qubit model onto the 2^N-level register basis.
///
/// Register level ids follow the dictionary `|1> = |g1 g2 ...>`,
/// `|2> = |g1 ... e_N>`, ... (qubit 1 is the most significant bit), shifted
/// to 0-based ids. Each local transition lifts to 2^(N-1) elementary
/// transitions, so a model with 2N per-qubit couplings (plus partners)
/// yields `2N · 2^N` elementary operators.
pub fn embed_qubits(model: &InteractionModel) -> Result<InteractionModel, ModelError> {
    let qubits = model.qubits.as_ref().ok_or(ModelError::NotQubitForm)?;
    let n = qubits.len();
    let dim = 1usize << n;
    let mut b = ModelBuilder::new();
    for mask in 0..dim {
        let mut omega = 0.0;
        let mut name = String::new();
        for (l, q) in qubits.iter().enumerate() {
            let excited = mask & (1 << (n - 1 - l)) != 0;
            omega += if excited { 0.5 * q.omega } else { -0.5 * q.omega };
            name.push(if excited { 'e' } else { 'g' });
        }
        b.level(&name, omega);
    }
    for m in &model.modes {
        match m.kind {
            ModeKind::Discrete => b.discrete_mode(&m.sigma, m.omega),
            ModeKind::ContinuumSample => {
                b.continuum_sample(&m.sigma, m.omega, m.quad_weight.unwrap_or(0.0))
            }
        };
    }
    // Lift each declared coupling pair once (skip the auto-added partners).
    let mut done = vec![false; model.ops.len()];
    for i in 0..model.ops.len() {
        if done[i] {
            continue;
        }
        if let Some(partner) = model.dagger_partner(i) {
            done[partner] = true;
        }
        done[i] = true;
        let op = &model.ops[i];
        let qubit_of = |lvl: usize| qubits.iter().position(|q| q.ground == lvl || q.excited == lvl);
        let (Some(qf), Some(qt)) = (qubit_of(op.from_level), qubit_of(op.to_level)) else {
            return Err(ModelError::NotQubitForm);
        };
        if qf != qt {
            return Err(ModelError::NotQubitForm);
        }
        let l = qf;
        let from_excited = qubits[l].excited == op.from_level;
        let to_excited = qubits[l].excited == op.to_level;
        for rest in 0..(dim >> 1) {
            // Insert the spectator bits around qubit l's position.
            let hi = rest >> (n - 1 - l);
            let lo = rest & ((1 << (n - 1 - l)) - 1);
            let place = |bit: bool| -> usize {
                (hi << (n - l)) | ((bit as usize) << (n - 1 - l)) | lo
            };
            b.coupling(place(from_excited), place(to_excited), op.mode, op.dagger, op.g);
        }
    }
    Ok(b.finish())
}
