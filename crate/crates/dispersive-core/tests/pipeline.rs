//! Cross-module integration checks: partition of the ledger, total weights
//! against the quadrature oracle, relabeling invariance of the dense
//! oracle, excitation conservation, and the continuum Stark-kernel split.

use dispersive_core::algebra::{normal_order, NormalMonomial};
use dispersive_core::diagrams::{classify, enumerate_order_n, TermKind};
use dispersive_core::elimination::{
    add_continuum_family, assemble_effective, project, ContinuumEnvelope, EliminationPolicy,
    EnvelopeShape,
};
use dispersive_core::model::{build_preset, embed_qubits, InteractionModel, ModelBuilder, Params};
use dispersive_core::oracle::{
    dressed_spectrum, fock_hamiltonian, propagate, quadrature_total_weight, FockTruncation,
    DIM_BUDGET,
};
use dispersive_core::weights::{degenerate_limit_weight, total_weight_regulated};
use dispersive_core::C64;

fn params(kv: &[(&str, f64)]) -> Params {
    kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn jc() -> InteractionModel {
    build_preset("jc", &params(&[("omega_e", 1.0), ("omega_c", 0.8), ("g", 0.02)])).unwrap()
}

fn rabi() -> InteractionModel {
    build_preset("rabi", &params(&[("omega_e", 1.0), ("omega_c", 0.8), ("g", 0.02)])).unwrap()
}

/// Retained terms plus the dropped ledger reproduce the full pre-projection
/// content: per matter element and boson monomial, the evaluated sums agree
/// at arbitrary t (nothing lost, nothing double-counted).
#[test]
fn ledger_and_retained_terms_partition_exactly() {
    for (model, n) in [(jc(), 2usize), (rabi(), 1), (rabi(), 2)] {
        let policy = EliminationPolicy::for_model(&model, 1e3);
        let h = assemble_effective(&model, n, &policy).unwrap();
        type Key = (usize, usize, usize, NormalMonomial);
        let mut pre: std::collections::BTreeMap<Key, C64> = Default::default();
        let t_probe = 0.83;
        for order in 0..=n {
            let classes = enumerate_order_n(&model, order, policy.class_cap).unwrap();
            for c in &classes {
                for s in &c.members {
                    let (wf, _) = degenerate_limit_weight(&model, s, policy.eps_deg).unwrap();
                    // The limit pipeline zeroes decay before projecting.
                    let (kept, cut) = project(&wf, &policy);
                    let mut restored = kept;
                    for (term, _) in cut {
                        restored.push(term);
                    }
                    for (mono, coeff) in &normal_order(&s.boson_string(&model)).terms {
                        let key =
                            (order, s.to_level(&model), s.from_level(&model), mono.clone());
                        *pre.entry(key).or_insert(C64::new(0.0, 0.0)) +=
                            restored.eval(t_probe) * coeff;
                    }
                }
            }
        }
        let mut post: std::collections::BTreeMap<Key, C64> = Default::default();
        for term in &h.terms {
            let key = (term.order, term.matter_to, term.matter_from, term.boson.clone());
            *post.entry(key).or_insert(C64::new(0.0, 0.0)) += term.coeff.eval(t_probe);
        }
        for d in &h.dropped {
            let key = (d.order, d.matter_to, d.matter_from, d.boson.clone());
            let mut one = dispersive_core::weights::WeightFunction::zero();
            one.push(d.term);
            *post.entry(key).or_insert(C64::new(0.0, 0.0)) += one.eval(t_probe);
        }
        let scale: f64 = pre.values().map(|v| v.norm()).fold(1e-12, f64::max);
        for (key, want) in &pre {
            let got = post.get(key).copied().unwrap_or(C64::new(0.0, 0.0));
            assert!(
                (got - want).norm() < 1e-12 * scale,
                "partition mismatch at {key:?}: {got:?} vs {want:?}"
            );
        }
        for key in post.keys() {
            assert!(pre.contains_key(key), "term {key:?} appeared from nowhere");
        }
    }
}

/// Total weights (all placements averaged, couplings included) agree with
/// the summed quadrature oracle on every class of the worked models.
#[test]
fn total_weights_match_quadrature_oracle() {
    for (model, n_max) in [(jc(), 3usize), (rabi(), 2)] {
        for n in 1..=n_max {
            let classes = enumerate_order_n(&model, n, 1 << 20).unwrap();
            for c in &classes {
                let s = &c.canonical;
                let wf = total_weight_regulated(&model, s);
                let min_delta = s
                    .deltas(&model)
                    .iter()
                    .map(|d| d.abs())
                    .fold(f64::INFINITY, f64::min)
                    .max(0.05);
                let scale_ts = [0.4 / min_delta, 2.0 / min_delta, 10.0 / min_delta];
                let scale = scale_ts.iter().map(|&t| wf.eval(t).norm()).fold(0.0f64, f64::max);
                for &t in &scale_ts {
                    let q = quadrature_total_weight(&model, s, t, 1e-11);
                    let v = wf.eval(t);
                    // 1e-8 of the weight scale, floored at the quadrature's
                    // own f64 truncation floor for long integration windows.
                    let tol = (1e-8 * scale).max(5e-12);
                    assert!(
                        (q - v).norm() < tol,
                        "{} n={n} t={t}: {q:?} vs {v:?}",
                        c.id()
                    );
                }
            }
        }
    }
}

/// Relabeling modes and levels permutes nothing physical: the dense
/// spectra agree to machine precision.
#[test]
fn fock_spectra_invariant_under_relabeling() {
    let mut b = ModelBuilder::new();
    let a0 = b.level("a", 0.0);
    let b0 = b.level("b", 1.3);
    let c0 = b.level("c", 2.05);
    let m0 = b.discrete_mode("x", 1.1);
    let m1 = b.discrete_mode("y", 0.9);
    b.coupling(a0, b0, m0, false, C64::new(0.03, 0.0));
    b.coupling(b0, c0, m1, false, C64::new(0.02, 0.01));
    let model = b.finish();

    // Same physics with levels and modes declared in a different order.
    let mut b2 = ModelBuilder::new();
    let c1 = b2.level("c", 2.05);
    let a1 = b2.level("a", 0.0);
    let b1 = b2.level("b", 1.3);
    let m1b = b2.discrete_mode("y", 0.9);
    let m0b = b2.discrete_mode("x", 1.1);
    b2.coupling(b1, c1, m1b, false, C64::new(0.02, 0.01));
    b2.coupling(a1, b1, m0b, false, C64::new(0.03, 0.0));
    let relabeled = b2.finish();

    let trunc = FockTruncation::uniform(2, 3);
    let h1 = fock_hamiltonian(&model, &trunc, DIM_BUDGET).unwrap();
    let h2 = fock_hamiltonian(&relabeled, &trunc, DIM_BUDGET).unwrap();
    let e1 = dressed_spectrum(&h1).unwrap();
    let e2 = dressed_spectrum(&h2).unwrap();
    for (x, y) in e1.iter().zip(e2.iter()) {
        assert!((x - y).abs() < 1e-11, "{x} vs {y}");
    }
}

/// The excitation number commutes with a co-rotating Hamiltonian, so exact
/// propagation conserves it.
#[test]
fn propagation_conserves_excitation_for_rwa_models() {
    let qform = build_preset(
        "tavis_cummings",
        &params(&[("n_qubits", 2.0), ("omega_c", 0.7), ("omega_q", 1.0), ("g", 0.02)]),
    )
    .unwrap();
    let model = embed_qubits(&qform).unwrap();
    let trunc = FockTruncation::uniform(1, 3);
    let h = fock_hamiltonian(&model, &trunc, DIM_BUDGET).unwrap();
    let dim = h.n_rows;
    let n_ph = 4usize;
    // Matter excitation of register level: popcount of its bit pattern.
    let excitation = |idx: usize| -> u32 {
        let level = idx / n_ph;
        let photons = (idx % n_ph) as u32;
        (level as u32).count_ones() + photons
    };
    let mut psi0 = vec![C64::new(0.0, 0.0); dim];
    // |eg, 1 photon>: two excitations total.
    psi0[2 * n_ph + 1] = C64::new(1.0, 0.0);
    let n0: f64 = psi0.iter().enumerate().map(|(i, z)| excitation(i) as f64 * z.norm_sqr()).sum();
    for &t in &[3.0, 47.0] {
        let psi = propagate(&h, &psi0, t).unwrap();
        let n_t: f64 = psi.iter().enumerate().map(|(i, z)| excitation(i) as f64 * z.norm_sqr()).sum();
        assert!((n_t - n0).abs() < 1e-10, "excitation drifted: {n_t} vs {n0}");
    }
}

/// Three-level system on a coarse continuum: the diagonal (Stark) content
/// splits into same-frequency renormalization plus cross-frequency
/// photon-exchange terms whose coefficients follow the
/// g(ω)g(ω') [1/δ(ω) + 1/δ(ω')]/2 kernel.
#[test]
fn continuum_stark_kernel_splits_into_same_and_cross_frequency_parts() {
    let mut b = ModelBuilder::new();
    let alpha = b.level("alpha", 0.0);
    let beta = b.level("beta", 6.0);
    let _gamma = b.level("gamma", 1.0);
    let env = ContinuumEnvelope {
        support: (4.6, 5.4),
        shape: EnvelopeShape::Gaussian { amp: 0.04, center: 5.0, width: 0.2 },
    };
    let modes = add_continuum_family(&mut b, "i", &env, 6, alpha, beta, false).unwrap();
    let model = b.finish();
    // Small T retains neighbor-frequency beats: grid spacing is 0.8/6 and
    // the retention window is kappa/T = 0.5.
    let policy = EliminationPolicy {
        t_window: 0.2,
        kappa: 0.1,
        eps_deg: 1e-9,
        drop_renormalization: true,
        pv_window: 1e-3,
        class_cap: 1 << 20,
    };
    let h = assemble_effective(&model, 1, &policy).unwrap();
    let g_of = |m: usize| model.ops.iter().find(|o| o.mode == m && !o.dagger).unwrap().g.re;
    let delta_of = |m: usize| model.modes[m].omega - 6.0;
    // Same-frequency renormalization on |alpha><alpha|: the second-order
    // shift per photon is g²/δ(ω) (δ = ω - ω_β < 0 here).
    let same = NormalMonomial { creators: vec![modes[2]], annihilators: vec![modes[2]] };
    let c_same = h.coeff_of(alpha, alpha, &same).expect("same-frequency Stark").eval(0.0);
    let expect_same = g_of(modes[2]) * g_of(modes[2]) / delta_of(modes[2]);
    assert!((c_same.re - expect_same).abs() < 1e-14 * expect_same.abs());
    // Cross-frequency interaction a†(ω')a(ω), ω ≠ ω', with the
    // g(ω)g(ω')[1/δ(ω) + 1/δ(ω')]/2 kernel.
    let cross = NormalMonomial { creators: vec![modes[3]], annihilators: vec![modes[2]] };
    let wf = h.coeff_of(alpha, alpha, &cross).expect("cross-frequency Stark");
    let expect_cross = 0.5
        * g_of(modes[2])
        * g_of(modes[3])
        * (1.0 / delta_of(modes[2]) + 1.0 / delta_of(modes[3]));
    let beat = model.modes[modes[2]].omega - model.modes[modes[3]].omega;
    assert_eq!(wf.terms.len(), 1);
    assert!((wf.terms[0].osc - beat).abs() < 1e-12);
    assert!(
        (wf.terms[0].amp - C64::new(expect_cross, 0.0)).norm() < 1e-14 * expect_cross.abs(),
        "{:?} vs {expect_cross}",
        wf.terms[0].amp
    );
}

/// A two-photon-resonant Raman pair classifies as resonant and retained
/// even though its matter element is off-diagonal.
#[test]
fn lambda_raman_pair_is_resonant() {
    let model = build_preset(
        "three_level_lambda",
        &params(&[
            ("omega_beta", 6.0),
            ("omega_gamma", 1.0),
            ("omega_i", 5.0),
            ("omega_j", 4.0), // ω_i - ω_j = ω_γ: two-photon resonance
            ("g_i", 0.03),
            ("g_j", 0.03),
        ]),
    )
    .unwrap();
    let policy = EliminationPolicy::for_model(&model, 1e3);
    let classes = enumerate_order_n(&model, 1, 1 << 20).unwrap();
    let raman = classes
        .iter()
        .find(|c| !c.closed_loop)
        .expect("mediated class present");
    let cl = classify(&model, raman, &policy);
    assert!(cl.final_detuning.abs() < 1e-12);
    assert!(cl.retained);
    assert_eq!(cl.kind, TermKind::Resonant);
}

/// classify() sorts the worked JC/Rabi classes the way the examples state:
/// loops with vanishing cumulative detuning are retained renormalization,
/// the mixed class is dropped as off-resonant.
#[test]
fn classification_of_first_order_classes() {
    let model = rabi();
    let policy = EliminationPolicy::for_model(&model, 1e3);
    let classes = enumerate_order_n(&model, 1, 1 << 20).unwrap();
    let mut kinds: Vec<(f64, TermKind, bool)> = classes
        .iter()
        .map(|c| {
            let cl = classify(&model, c, &policy);
            (cl.final_detuning.abs(), cl.kind, cl.retained)
        })
        .collect();
    kinds.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Stark and Bloch-Siegert loops: zero final detuning, retained.
    assert_eq!(kinds[0], (0.0, TermKind::EnergyRenormalization, true));
    assert_eq!(kinds[1], (0.0, TermKind::EnergyRenormalization, true));
    // Mixed class: |Δ| = 2ω_c, dropped.
    assert!((kinds[2].0 - 1.6).abs() < 1e-12);
    assert_eq!(kinds[2].1, TermKind::OffResonant);
    assert!(!kinds[2].2);
}

/// Third order runs through the same code path: the assembly stays
/// Hermitian and the coefficients scale as λ⁴.
#[test]
fn third_order_assembly_is_hermitian_and_scales() {
    let model = jc();
    let policy = EliminationPolicy::for_model(&model, 1e3);
    let h = assemble_effective(&model, 3, &policy).unwrap();
    assert!(h.terms_of_order(3).count() > 0, "three-photon-window terms expected");
    let trunc = FockTruncation::uniform(1, 5);
    for &t in &[0.0, 0.61] {
        let m = dispersive_core::elimination::effective_matrix(&model, &h, &trunc, t, true);
        assert!(m.hermiticity_defect() < 1e-12);
    }
    let scaled = assemble_effective(&model.scale_couplings(2.0), 3, &policy).unwrap();
    for (a, b) in h.terms_of_order(3).zip(scaled.terms_of_order(3)) {
        let want = a.coeff.eval(0.4) * 16.0; // λ^{n+1} = 2⁴
        let got = b.coeff.eval(0.4);
        assert!((got - want).norm() < 1e-12 * want.norm().max(1e-300));
    }
}

/// Unnormalized input states are rejected by the propagator.
#[test]
fn propagate_rejects_unnormalized_states() {
    let model = jc();
    let trunc = FockTruncation::uniform(1, 2);
    let h = fock_hamiltonian(&model, &trunc, DIM_BUDGET).unwrap();
    let psi0 = vec![C64::new(0.7, 0.0); h.n_rows];
    assert!(propagate(&h, &psi0, 1.0).is_err());
}

/// Counter-rotating terms shift the qubit-exchange coupling from g²/δ̄ to
/// g²(1/δ̄ - 1/Σ̄): the extra pathway runs through the doubly-excited
/// one-photon state. Cross-checked against dense diagonalization of the
/// full model.
#[test]
fn dicke_exchange_includes_counter_rotating_pathway() {
    let (g, omega_q, omega_c) = (0.02f64, 1.0, 0.7);
    let (delta, sigma) = (omega_q - omega_c, omega_q + omega_c);
    let qform = build_preset(
        "dicke",
        &params(&[("n_qubits", 2.0), ("omega_c", omega_c), ("omega_q", omega_q), ("g", g)]),
    )
    .unwrap();
    let model = embed_qubits(&qform).unwrap();
    let policy = EliminationPolicy::for_model(&model, 1e3);
    let h = assemble_effective(&model, 1, &policy).unwrap();
    let unit = NormalMonomial::default();
    let j_eff = h.coeff_of(1, 2, &unit).expect("exchange term").eval(0.0);
    let expect = g * g * (1.0 / delta - 1.0 / sigma);
    assert!(
        (j_eff - C64::new(expect, 0.0)).norm() < 1e-15,
        "J_eff {j_eff:?} vs g²(1/δ - 1/Σ) = {expect}"
    );

    // Oracle: splitting of the two dressed states dominated by |eg,0> and
    // |ge,0> equals 2|J_eff| up to higher dispersive orders.
    let trunc = FockTruncation::uniform(1, 8);
    let hmat = fock_hamiltonian(&model, &trunc, DIM_BUDGET).unwrap();
    let eig = dispersive_core::linalg::hermitian_eigen(&hmat).unwrap();
    let n_ph = 9usize;
    let mut split_states = Vec::new();
    for k in 0..hmat.n_rows {
        let mut bi = 0;
        let mut bw = 0.0;
        for i in 0..hmat.n_rows {
            let w = eig.vectors[(i, k)].norm_sqr();
            if w > bw {
                bw = w;
                bi = i;
            }
        }
        if bi == n_ph || bi == 2 * n_ph {
            split_states.push(eig.values[k]);
        }
    }
    assert_eq!(split_states.len(), 2);
    let exact_split = (split_states[1] - split_states[0]).abs();
    let rel = (exact_split - 2.0 * expect.abs()).abs() / (2.0 * expect.abs());
    assert!(rel < 0.03, "Dicke exchange splitting {exact_split} vs {} (rel {rel})", 2.0 * expect);
}

/// Near ω_c = ω_e/3 the counter-rotating pathway makes the three-photon
/// chain resonant at second order: the retained |e><g| a³ coefficient is
/// the averaged placement sum at cumulative detunings
/// (ω_c-ω_e, 2ω_c, 3ω_c-ω_e).
#[test]
fn rabi_three_photon_resonance_term() {
    let (omega_e, omega_c, g) = (1.0f64, 0.336, 0.02);
    let model = build_preset(
        "rabi",
        &params(&[("omega_e", omega_e), ("omega_c", omega_c), ("g", g)]),
    )
    .unwrap();
    // |3ω_c - ω_e| T = 0.04 < κ retains the chain; |ω_c - ω_e| T = 3.3
    // drops every one- and two-photon component.
    let policy = EliminationPolicy {
        t_window: 5.0,
        kappa: 0.1,
        eps_deg: 1e-9,
        drop_renormalization: true,
        pv_window: 1e-3,
        class_cap: 1 << 20,
    };
    let h = assemble_effective(&model, 2, &policy).unwrap();
    let triple = NormalMonomial { creators: vec![], annihilators: vec![0, 0, 0] };
    let wf = h.coeff_of(1, 0, &triple).expect("three-photon term retained");
    assert_eq!(wf.terms.len(), 1);
    let delta3 = 3.0 * omega_c - omega_e;
    assert!((wf.terms[0].osc - delta3).abs() < 1e-12);
    // Hand-combined placement sum over detunings (δ, Σ, δ) with
    // δ = ω_c - ω_e, Σ = ω_c + ω_e, divided by the n+1 = 3 average.
    let (d, s) = (omega_c - omega_e, omega_c + omega_e);
    let v2 = 1.0 / (d * (d + s)) + 1.0 / (d * (d + s)) - 1.0 / (d * d);
    let expect = g * g * g * v2 / 3.0;
    assert!(
        (wf.terms[0].amp - C64::new(expect, 0.0)).norm() < 1e-12 * expect.abs(),
        "{:?} vs {expect}",
        wf.terms[0].amp
    );
    // Its Hermitian partner is retained too.
    let triple_dag = NormalMonomial { creators: vec![0, 0, 0], annihilators: vec![] };
    let back = h.coeff_of(0, 1, &triple_dag).expect("conjugate retained");
    assert!((back.eval(0.7) - wf.eval(0.7).conj()).norm() < 1e-15);
}

/// Structural Hermiticity: every retained term has a conjugate-transpose
/// partner with the conjugated weight.
#[test]
fn retained_terms_pair_into_conjugates() {
    for (model, n) in [(rabi(), 2usize), (tc_model(), 1)] {
        let policy = EliminationPolicy::for_model(&model, 1e3);
        let h = assemble_effective(&model, n, &policy).unwrap();
        for term in &h.terms {
            let conj_boson = NormalMonomial {
                creators: term.boson.annihilators.clone(),
                annihilators: term.boson.creators.clone(),
            };
            let partner = h
                .terms
                .iter()
                .find(|p| {
                    p.order == term.order
                        && p.matter_to == term.matter_from
                        && p.matter_from == term.matter_to
                        && p.boson == conj_boson
                })
                .unwrap_or_else(|| panic!("no conjugate partner for {term:?}"));
            for &t in &[0.0, 0.9] {
                assert!(
                    (partner.coeff.eval(t) - term.coeff.eval(t).conj()).norm()
                        < 1e-13 * term.coeff.eval(t).norm().max(1e-6)
                );
            }
        }
    }
}

fn tc_model() -> InteractionModel {
    let qform = build_preset(
        "tavis_cummings",
        &params(&[("n_qubits", 2.0), ("omega_c", 0.7), ("omega_q", 1.0), ("g", 0.02)]),
    )
    .unwrap();
    embed_qubits(&qform).unwrap()
}

/// The per-qubit to register embedding preserves the free spectrum.
#[test]
fn embedding_preserves_free_spectrum() {
    let qform = build_preset(
        "dicke",
        &params(&[("n_qubits", 3.0), ("omega_c", 0.9), ("omega_1", 1.0), ("omega_2", 1.2), ("omega_3", 0.8), ("g", 0.01)]),
    )
    .unwrap();
    let embedded = embed_qubits(&qform).unwrap();
    assert_eq!(embedded.levels.len(), 8);
    assert_eq!(embedded.op_count(), 2 * 3 * 8); // 2N·2^N
    let mut got: Vec<f64> = embedded.levels.iter().map(|l| l.omega).collect();
    got.sort_by(f64::total_cmp);
    let mut want = Vec::new();
    for s1 in [-0.5f64, 0.5] {
        for s2 in [-0.6f64, 0.6] {
            for s3 in [-0.4f64, 0.4] {
                want.push(s1 + s2 + s3);
            }
        }
    }
    want.sort_by(f64::total_cmp);
    for (a, b) in got.iter().zip(want.iter()) {
        assert!((a - b).abs() < 1e-12);
    }
}
