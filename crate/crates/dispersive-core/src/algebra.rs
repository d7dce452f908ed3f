//! Operator calculus: bosonic normal ordering with contractions, transition
//! strings with cumulative detunings, and Hermitian conjugation.

use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};
use num_complex::Complex64 as C64;

use crate::model::InteractionModel;
use crate::util::KahanSum;

/// One bosonic factor `a(ω)` or `a†(ω)`; `mode` indexes the model's modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct BosonFactor {
    pub mode: usize,
    pub dagger: bool,
}

/// An ordered product of bosonic factors (leftmost factor first).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BosonString {
    pub factors: Vec<BosonFactor>,
}

impl BosonString {
    pub fn new(factors: Vec<BosonFactor>) -> Self {
        Self { factors }
    }
}

/// A normal-ordered monomial: creation modes (sorted) left of annihilation
/// modes (sorted). Different modes commute, so the two sorted multisets
/// identify the monomial.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct NormalMonomial {
    pub creators: Vec<usize>,
    pub annihilators: Vec<usize>,
}

impl NormalMonomial {
    pub fn total_rank(&self) -> usize {
        self.creators.len() + self.annihilators.len()
    }

    /// Net photon-number change (creations minus annihilations) per mode is
    /// sometimes useful for diagnostics; here only the identity test is
    /// needed.
    pub fn is_identity(&self) -> bool {
        self.creators.is_empty() && self.annihilators.is_empty()
    }
}

/// A finite sum of complex-weighted normal-ordered monomials.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NormalPolynomial {
    /// Sorted by monomial; no two terms share a monomial; no zero terms.
    pub terms: Vec<(NormalMonomial, C64)>,
}

impl NormalPolynomial {
    pub fn identity() -> Self {
        Self { terms: vec![(NormalMonomial::default(), C64::new(1.0, 0.0))] }
    }

    fn push(&mut self, mono: NormalMonomial, coeff: C64) {
        match self.terms.binary_search_by(|(m, _)| m.cmp(&mono)) {
            Ok(i) => self.terms[i].1 += coeff,
            Err(i) => self.terms.insert(i, (mono, coeff)),
        }
    }

    fn purge(&mut self) {
        self.terms.retain(|(_, c)| c.norm() > 0.0);
    }
}

/// Normal-order a product of bosonic factors under the canonical
/// commutation relations.
///
/// Factors on different `(σ, ω)` labels commute; reordering `a a†` on one
/// label produces the contraction constant 1. Continuum normalization is
/// carried entirely by the couplings (`discretize_continuum` folds the
/// quadrature weight into `g`), so samples contract like discrete modes and
/// the exact-diagonalization oracle can use standard ladder conventions.
pub fn normal_order(b: &BosonString) -> NormalPolynomial {
    let mut poly = NormalPolynomial::identity();
    for f in &b.factors {
        let mut next = NormalPolynomial::default();
        for (mono, coeff) in &poly.terms {
            if f.dagger {
                // Commute a†_m through the annihilator block:
                // :D A: a†_m = :D a†_m A: + (#m in A) :D (A \ m):
                let mut with = mono.clone();
                let pos = with.creators.binary_search(&f.mode).unwrap_or_else(|e| e);
                with.creators.insert(pos, f.mode);
                next.push(with, *coeff);
                let count = mono.annihilators.iter().filter(|&&m| m == f.mode).count();
                if count > 0 {
                    let mut contracted = mono.clone();
                    let pos = contracted
                        .annihilators
                        .iter()
                        .position(|&m| m == f.mode)
                        .expect("counted above");
                    contracted.annihilators.remove(pos);
                    next.push(contracted, coeff * count as f64);
                }
            } else {
                let mut with = mono.clone();
                let pos = with.annihilators.binary_search(&f.mode).unwrap_or_else(|e| e);
                with.annihilators.insert(pos, f.mode);
                next.push(with, *coeff);
            }
        }
        next.purge();
        poly = next;
    }
    poly
}

/// An ordered product of `n+1` coupling operators.
///
/// `ops[0]` acts first; written as an operator the product reads
/// `op[n] · ... · op[1] · op[0]` (right to left). Matter overlap must hold
/// between consecutive entries.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct TransitionString {
    pub ops: Vec<usize>,
}

impl TransitionString {
    pub fn order(&self) -> usize {
        self.ops.len() - 1
    }

    pub fn from_level(&self, model: &InteractionModel) -> usize {
        model.ops[self.ops[0]].from_level
    }

    pub fn to_level(&self, model: &InteractionModel) -> usize {
        model.ops[*self.ops.last().expect("nonempty")].to_level
    }

    /// Matter element returns to its starting level.
    pub fn closed_loop(&self, model: &InteractionModel) -> bool {
        self.from_level(model) == self.to_level(model)
    }

    /// Per-constituent detunings in process order.
    pub fn deltas(&self, model: &InteractionModel) -> Vec<f64> {
        self.ops.iter().map(|&i| model.detuning_of(&model.ops[i])).collect()
    }

    pub fn thetas(&self, model: &InteractionModel) -> Vec<f64> {
        self.ops.iter().map(|&i| model.ops[i].theta).collect()
    }

    /// Cumulative detunings Δ_0..Δ_n along the process order (compensated
    /// summation).
    pub fn cumulative_detunings(&self, model: &InteractionModel) -> Vec<f64> {
        let mut acc = KahanSum::new();
        self.deltas(model)
            .into_iter()
            .map(|d| {
                acc.add(d);
                acc.value()
            })
            .collect()
    }

    /// Cumulative regulators Θ_0..Θ_n (strictly increasing).
    pub fn cumulative_thetas(&self, model: &InteractionModel) -> Vec<f64> {
        let mut acc = 0.0;
        self.thetas(model)
            .into_iter()
            .map(|t| {
                acc += t;
                acc
            })
            .collect()
    }

    /// Final cumulative detuning Δ_n.
    pub fn final_detuning(&self, model: &InteractionModel) -> f64 {
        *self.cumulative_detunings(model).last().expect("nonempty")
    }

    /// Product of the constituent coupling amplitudes.
    pub fn coupling_product(&self, model: &InteractionModel) -> C64 {
        self.ops.iter().map(|&i| model.ops[i].g).product()
    }

    /// Bosonic factors in operator order (leftmost factor first, i.e. the
    /// last-applied operator's photon first).
    pub fn boson_string(&self, model: &InteractionModel) -> BosonString {
        BosonString::new(
            self.ops
                .iter()
                .rev()
                .map(|&i| BosonFactor { mode: model.ops[i].mode, dagger: model.ops[i].dagger })
                .collect(),
        )
    }

    /// Stable identifier, e.g. `x3.x0.x2` for op indices applied in process
    /// order 2, 0, 3.
    pub fn id(&self) -> String {
        let mut s = String::new();
        for (k, &i) in self.ops.iter().rev().enumerate() {
            if k > 0 {
                s.push('.');
            }
            s.push_str(&format!("x{i}"));
        }
        s
    }
}

/// Extend `s` by applying `op_next` (an index into `model.ops`) after it.
/// Returns `None` when the matter parts do not overlap.
pub fn compose(
    model: &InteractionModel,
    op_next: usize,
    s: &TransitionString,
) -> Option<TransitionString> {
    if model.ops[op_next].from_level != s.to_level(model) {
        return None;
    }
    let mut ops = s.ops.clone();
    ops.push(op_next);
    Some(TransitionString { ops })
}

/// Detuning of a single coupling operator (free-Liouvillian eigenvalue).
pub fn detuning_of(model: &InteractionModel, op_idx: usize) -> f64 {
    model.detuning_of(&model.ops[op_idx])
}

/// Eigenoperator check against the dense oracle: see
/// [`crate::oracle::liouvillian_eigencheck`].
pub use crate::oracle::liouvillian_eigencheck;

/// Hermitian conjugate of a string: constituents reversed and daggered.
///
/// Requires a validated model (every operator has its partner present).
pub fn hermitian_conjugate(model: &InteractionModel, s: &TransitionString) -> TransitionString {
    let ops = s
        .ops
        .iter()
        .rev()
        .map(|&i| model.dagger_partner(i).expect("validated model is closed under h.c."))
        .collect();
    TransitionString { ops }
}
