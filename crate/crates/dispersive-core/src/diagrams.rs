//! Enumeration of order-`n` transition strings and their grouping into
//! diagram classes.
//!
//! A class collects every nonzero string built from one multiset of
//! coupling operators, together with the strings of the conjugate multiset:
//! closed-loop strings related by cyclic rotation of the matter part,
//! Hermitian-conjugate partners, and the same-mode dagger-assignment
//! variants all land in a single class. Class counts are therefore bounded
//! by the multiset count C(M+n, n+1), with the tighter first- and
//! second-order bounds available from [`combinatorial_bound`].

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};

use crate::algebra::{compose, TransitionString};
use crate::elimination::EliminationPolicy;
use crate::model::InteractionModel;
use crate::util::binomial;

/// A group of order-`n` strings sharing one operator multiset (or its
/// conjugate).
#[derive(Debug, Clone, PartialEq)]
pub struct DiagramClass {
    /// Lexicographically smallest member; the class id derives from it.
    pub canonical: TransitionString,
    /// Every member string, sorted; includes Hermitian partners and
    /// same-mode multiplicity variants.
    pub members: Vec<TransitionString>,
    /// Members related to the canonical one by cyclic rotation of the
    /// matter string (nonempty only for closed loops).
    pub cyclic_members: Vec<TransitionString>,
    /// Whether the operator multiset is fixed by Hermitian conjugation.
    pub self_conjugate: bool,
    /// Whether the canonical member's matter path returns to its start.
    pub closed_loop: bool,
    /// Number of positions of the canonical string at which the model also
    /// contains the dagger-flipped operator on the same mode and matter
    /// pair; the member count from boson assignments is at most 2^m.
    pub multiplicity_m: u32,
}

impl DiagramClass {
    pub fn order(&self) -> usize {
        self.canonical.order()
    }

    /// Stable identifier: order plus the canonical string id.
    pub fn id(&self) -> String {
        format!("n{}:{}", self.order(), self.canonical.id())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DiagramError {
    BudgetExceeded { classes: usize, cap: usize },
}

impl core::fmt::Display for DiagramError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            DiagramError::BudgetExceeded { classes, cap } => {
                write!(f, "diagram enumeration exceeded the class budget: {classes} > {cap}")
            }
        }
    }
}

/// Upper bounds on the order-`n` combinatorics for `M` coupling operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundRecord {
    /// Distinct operator strings: `2(n+1) C(M+n, n+1)`.
    pub operators: f64,
    /// Diagram classes: `C(M+n, n+1)`.
    pub diagrams: f64,
    /// Tight first-order count `M/2 + C(M/2, 2)` (when n = 1).
    pub first_order_tight: Option<f64>,
    /// Tight second-order count `M(M²+2)/12` (when n = 2).
    pub second_order_tight: Option<f64>,
}

/// Combinatorial bounds; `m` must be even.
pub fn combinatorial_bound(m: u64, n: u64) -> BoundRecord {
    assert!(m % 2 == 0, "operator count is even by Hermitian closure");
    let diagrams = binomial(m + n, n + 1);
    BoundRecord {
        operators: 2.0 * (n as f64 + 1.0) * diagrams,
        diagrams,
        first_order_tight: (n == 1)
            .then(|| m as f64 / 2.0 + binomial(m / 2, 2)),
        second_order_tight: (n == 2)
            .then(|| (m as f64) * ((m * m + 2) as f64) / 12.0),
    }
}

/// Enumerate every nonzero order-`n` string of `model` and group it into
/// diagram classes. Classes come back sorted by canonical member.
pub fn enumerate_order_n(
    model: &InteractionModel,
    n: usize,
    class_cap: usize,
) -> Result<Vec<DiagramClass>, DiagramError> {
    // Out-edges keyed by the matter level an operator continues from.
    let mut out_edges: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, op) in model.ops.iter().enumerate() {
        out_edges.entry(op.from_level).or_default().push(i);
    }

    let mut strings: Vec<TransitionString> = Vec::new();
    let mut stack: Vec<TransitionString> =
        (0..model.ops.len()).map(|i| TransitionString { ops: vec![i] }).collect();
    while let Some(s) = stack.pop() {
        if s.order() == n {
            strings.push(s);
            continue;
        }
        if let Some(nexts) = out_edges.get(&s.to_level(model)) {
            for &i in nexts {
                if let Some(ext) = compose(model, i, &s) {
                    stack.push(ext);
                }
            }
        }
        // Guard against runaway growth before grouping.
        if strings.len() > class_cap.saturating_mul(2 * (n + 2)) {
            return Err(DiagramError::BudgetExceeded { classes: strings.len(), cap: class_cap });
        }
    }

    // Group by operator multiset, folded with the conjugate multiset.
    let partner: Vec<usize> = (0..model.ops.len())
        .map(|i| model.dagger_partner(i).expect("validated model"))
        .collect();
    let mut groups: BTreeMap<Vec<usize>, Vec<TransitionString>> = BTreeMap::new();
    for s in strings {
        let mut key: Vec<usize> = s.ops.clone();
        key.sort_unstable();
        let mut conj_key: Vec<usize> = s.ops.iter().map(|&i| partner[i]).collect();
        conj_key.sort_unstable();
        let folded = key.clone().min(conj_key);
        groups.entry(folded).or_default().push(s);
    }
    if groups.len() > class_cap {
        return Err(DiagramError::BudgetExceeded { classes: groups.len(), cap: class_cap });
    }

    let mut classes = Vec::with_capacity(groups.len());
    for (_key, mut members) in groups {
        members.sort();
        members.dedup();
        let canonical = members[0].clone();
        let closed_loop = canonical.closed_loop(model);
        let mut key: Vec<usize> = canonical.ops.clone();
        key.sort_unstable();
        let conj_key = {
            let mut c: Vec<usize> = canonical.ops.iter().map(|&i| partner[i]).collect();
            c.sort_unstable();
            c
        };
        let self_conjugate = key == conj_key;
        let cyclic_members = if closed_loop {
            let len = canonical.ops.len();
            let mut rots: Vec<TransitionString> = Vec::new();
            for r in 1..len {
                let mut ops = Vec::with_capacity(len);
                ops.extend_from_slice(&canonical.ops[r..]);
                ops.extend_from_slice(&canonical.ops[..r]);
                let rot = TransitionString { ops };
                if members.contains(&rot) && rot != canonical && !rots.contains(&rot) {
                    rots.push(rot);
                }
            }
            rots
        } else {
            Vec::new()
        };
        // Same-mode dagger-choice positions on the canonical string.
        let mut m_count = 0u32;
        for &i in &canonical.ops {
            let op = &model.ops[i];
            let flipped_exists = model.ops.iter().any(|p| {
                p.from_level == op.from_level
                    && p.to_level == op.to_level
                    && p.mode == op.mode
                    && p.dagger != op.dagger
            });
            if flipped_exists {
                m_count += 1;
            }
        }
        classes.push(DiagramClass {
            canonical,
            members,
            cyclic_members,
            self_conjugate,
            closed_loop,
            multiplicity_m: m_count,
        });
    }
    classes.sort_by(|a, b| a.canonical.cmp(&b.canonical));
    Ok(classes)
}

/// Resonance classification of a term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TermKind {
    Resonant,
    OffResonant,
    EnergyRenormalization,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TermClassification {
    pub kind: TermKind,
    pub final_detuning: f64,
    pub retained: bool,
}

/// Classify a diagram class by its final cumulative detuning against the
/// coarse-graining window: retained iff `|Δ_n|·T < κ`.
pub fn classify(
    model: &InteractionModel,
    d: &DiagramClass,
    policy: &EliminationPolicy,
) -> TermClassification {
    let final_detuning = d.canonical.final_detuning(model);
    let retained = libm::fabs(final_detuning) * policy.t_window < policy.kappa;
    let diagonal = d.canonical.closed_loop(model);
    let kind = if diagonal && retained {
        TermKind::EnergyRenormalization
    } else if retained {
        TermKind::Resonant
    } else {
        TermKind::OffResonant
    };
    TermClassification { kind, final_detuning, retained }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderFormat {
    Text,
    Dot,
}

/// Render a diagram class deterministically.
///
/// Text: one strand per constituent operator in process order, absorption
/// drawn below the matter axis and emission above, with the free-evolution
/// loop after each strand annotated by the cumulative detuning; repeated
/// strands carry a multiplicity mark. Dot: one digraph, nodes named by
/// level labels, one edge per strand with a `detuning` attribute carrying
/// the cumulative detuning.
pub fn render_diagram(model: &InteractionModel, d: &DiagramClass, format: RenderFormat) -> String {
    let s = &d.canonical;
    let cum = s.cumulative_detunings(model);
    match format {
        RenderFormat::Text => {
            let mut out = String::new();
            out.push_str(&format!(
                "class {} [order {}{}{}]\n",
                d.id(),
                d.order(),
                if d.closed_loop { ", closed loop" } else { "" },
                if d.self_conjugate { ", self-conjugate" } else { "" },
            ));
            let mut seen: BTreeMap<(usize, usize, usize, bool), u32> = BTreeMap::new();
            for (k, &i) in s.ops.iter().enumerate() {
                let op = &model.ops[i];
                let mode = model.mode(op.mode);
                let count = seen
                    .entry((op.from_level, op.to_level, op.mode, op.dagger))
                    .and_modify(|c| *c += 1)
                    .or_insert(1);
                // Repeated traversals of the same strand stack arrowheads.
                let arrow = if op.dagger {
                    format!("~~{} (emit {}:{:.6})", ">".repeat(*count as usize), mode.sigma, mode.omega)
                } else {
                    format!("--{} (absorb {}:{:.6})", ">".repeat(*count as usize), mode.sigma, mode.omega)
                };
                let side = if op.dagger { "above" } else { "below" };
                // A bare zeroth-order strand carries no free-evolution loop.
                let loop_label = if d.order() >= 1 {
                    format!("; loop Δ_{} = {:+.9}", k, cum[k])
                } else {
                    String::new()
                };
                out.push_str(&format!(
                    "  |{}> {} |{}>   [{}{}]\n",
                    model.level(op.from_level).name,
                    arrow,
                    model.level(op.to_level).name,
                    side,
                    loop_label,
                ));
            }
            out.push_str(&format!(
                "  members: {}, matter rotations: {}, 2^m bound: {}\n",
                d.members.len(),
                d.cyclic_members.len() + 1,
                1u64 << d.multiplicity_m,
            ));
            out
        }
        RenderFormat::Dot => {
            let mut out = String::new();
            out.push_str(&format!("digraph \"{}\" {{\n", d.id()));
            out.push_str("  rankdir=LR;\n");
            let mut levels: Vec<usize> = s.ops.iter().map(|&i| model.ops[i].from_level).collect();
            levels.push(s.to_level(model));
            levels.sort_unstable();
            levels.dedup();
            for l in levels {
                out.push_str(&format!("  \"{}\";\n", model.level(l).name));
            }
            for (k, &i) in s.ops.iter().enumerate() {
                let op = &model.ops[i];
                let mode = model.mode(op.mode);
                out.push_str(&format!(
                    "  \"{}\" -> \"{}\" [label=\"{}{}:{:.6}\" detuning=\"{:.12}\"];\n",
                    model.level(op.from_level).name,
                    model.level(op.to_level).name,
                    if op.dagger { "emit " } else { "absorb " },
                    mode.sigma,
                    mode.omega,
                    cum[k],
                ));
            }
            out.push_str("}\n");
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::hermitian_conjugate;
    use crate::model::{build_preset, Params};
    use alloc::string::ToString;

    fn params(kv: &[(&str, f64)]) -> Params {
        kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    fn jc() -> InteractionModel {
        build_preset("jc", &params(&[("omega_e", 1.0), ("omega_c", 0.8), ("g", 0.02)])).unwrap()
    }

    fn rabi() -> InteractionModel {
        build_preset("rabi", &params(&[("omega_e", 1.0), ("omega_c", 0.8), ("g", 0.02)])).unwrap()
    }

    #[test]
    fn jc_first_order_has_one_class() {
        let classes = enumerate_order_n(&jc(), 1, 1 << 20).unwrap();
        assert_eq!(classes.len(), 1);
        let c = &classes[0];
        assert!(c.closed_loop);
        assert!(c.self_conjugate);
        assert_eq!(c.members.len(), 2); // ξ†ξ and ξξ†
        assert_eq!(c.cyclic_members.len(), 1);
    }

    #[test]
    fn rabi_first_order_has_three_classes() {
        let classes = enumerate_order_n(&rabi(), 1, 1 << 20).unwrap();
        assert_eq!(classes.len(), 3);
        let closed = classes.iter().filter(|c| c.closed_loop).count();
        assert_eq!(closed, 3); // Stark, Bloch-Siegert, mixed (all loops here)
    }

    #[test]
    fn jc_second_order_is_the_three_photon_chain() {
        let classes = enumerate_order_n(&jc(), 2, 1 << 20).unwrap();
        assert_eq!(classes.len(), 1);
        let c = &classes[0];
        assert!(!c.closed_loop);
        assert_eq!(c.members.len(), 2); // chain and its conjugate
        assert!(c.cyclic_members.is_empty());
    }

    #[test]
    fn rabi_second_order_stays_within_tight_bound() {
        let classes = enumerate_order_n(&rabi(), 2, 1 << 20).unwrap();
        let bound = combinatorial_bound(4, 2);
        assert_eq!(bound.second_order_tight, Some(6.0));
        assert!(classes.len() as f64 <= 6.0);
        assert_eq!(classes.len(), 6);
    }

    #[test]
    fn bounds_match_displayed_values() {
        let b = combinatorial_bound(4, 1);
        assert_eq!(b.diagrams, 10.0);
        assert_eq!(b.operators, 40.0);
        assert_eq!(b.first_order_tight, Some(3.0));
        let b2 = combinatorial_bound(2, 1);
        assert_eq!(b2.first_order_tight, Some(1.0));
    }

    #[test]
    fn every_member_passes_compose_validity_and_is_unique() {
        for model in [jc(), rabi()] {
            for n in 0..=3 {
                let classes = enumerate_order_n(&model, n, 1 << 20).unwrap();
                let mut all: Vec<&TransitionString> = Vec::new();
                for c in &classes {
                    for s in &c.members {
                        // adjacent matter overlap
                        for w in s.ops.windows(2) {
                            assert_eq!(
                                model.ops[w[0]].to_level,
                                model.ops[w[1]].from_level
                            );
                        }
                        all.push(s);
                    }
                }
                let before = all.len();
                all.sort();
                all.dedup();
                assert_eq!(before, all.len(), "duplicate strings across classes");
                assert!(
                    (classes.len() as f64) <= combinatorial_bound(model.op_count() as u64, n as u64).diagrams
                );
            }
        }
    }

    #[test]
    fn hc_partners_map_members_bijectively() {
        for model in [jc(), rabi()] {
            let classes = enumerate_order_n(&model, 2, 1 << 20).unwrap();
            for c in &classes {
                for s in &c.members {
                    let hc = hermitian_conjugate(&model, s);
                    assert!(c.members.contains(&hc), "conjugate not in class");
                }
            }
        }
    }

    #[test]
    fn n_zero_classes_are_single_ops() {
        let classes = enumerate_order_n(&rabi(), 0, 1 << 20).unwrap();
        assert_eq!(classes.len(), 2); // {ξ1, ξ1†} and {ξ2, ξ2†}
        for c in &classes {
            assert_eq!(c.members.len(), 2);
        }
    }

    #[test]
    fn budget_error_fires() {
        let err = enumerate_order_n(&rabi(), 2, 2).unwrap_err();
        assert!(matches!(err, DiagramError::BudgetExceeded { .. }));
    }

    #[test]
    fn renderings_are_deterministic() {
        let model = jc();
        let classes = enumerate_order_n(&model, 1, 1 << 20).unwrap();
        let a = render_diagram(&model, &classes[0], RenderFormat::Text);
        let b = render_diagram(&model, &classes[0], RenderFormat::Text);
        assert_eq!(a, b);
        let dot = render_diagram(&model, &classes[0], RenderFormat::Dot);
        assert!(dot.contains("digraph"));
        assert!(dot.contains("detuning="));
    }

    #[test]
    fn repeated_strands_stack_arrowheads() {
        let model = jc();
        let classes = enumerate_order_n(&model, 2, 1 << 20).unwrap();
        let text = render_diagram(&model, &classes[0], RenderFormat::Text);
        // The three-photon chain traverses the absorption strand twice.
        assert!(text.contains("-->>"), "{text}");
    }

    #[test]
    fn zeroth_order_renders_without_a_loop() {
        let model = jc();
        let classes = enumerate_order_n(&model, 0, 1 << 20).unwrap();
        let text = render_diagram(&model, &classes[0], RenderFormat::Text);
        assert!(!text.contains("loop"), "{text}");
    }
}
