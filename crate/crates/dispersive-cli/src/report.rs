//! Text and JSON renderings of pipeline outputs. All writers are
//! deterministic: fixed field order, stable term ordering from the core
//! types, shortest-roundtrip float formatting.

use std::fmt::Write as _;

use dispersive_core::elimination::{DropReason, EffectiveHamiltonian, EliminationPolicy};
use dispersive_core::model::InteractionModel;
use dispersive_core::oracle::ComparisonReport;
use dispersive_core::weights::WeightFunction;

fn json_f64(x: f64) -> String {
    if x.is_finite() {
        let s = format!("{x}");
        // Ensure valid JSON (no bare "inf"/"NaN" can reach here).
        s
    } else {
        "null".to_string()
    }
}

fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out
}

fn weight_terms_json(wf: &WeightFunction) -> String {
    let mut out = String::from("[");
    for (k, t) in wf.terms.iter().enumerate() {
        if k > 0 {
            out.push(',');
        }
        let _ = write!(
            out,
            "{{\"amp_re\":{},\"amp_im\":{},\"t_power\":{},\"osc\":{},\"decay\":{}}}",
            json_f64(t.amp.re),
            json_f64(t.amp.im),
            t.t_power,
            json_f64(t.osc),
            json_f64(t.decay)
        );
    }
    out.push(']');
    out
}

fn boson_json(model: &InteractionModel, mono: &dispersive_core::algebra::NormalMonomial) -> String {
    let mut out = String::from("[");
    let mut first = true;
    for &m in &mono.creators {
        if !first {
            out.push(',');
        }
        first = false;
        let mode = model.mode(m);
        let _ = write!(
            out,
            "{{\"op\":\"create\",\"sigma\":\"{}\",\"omega\":{}}}",
            json_escape(&mode.sigma),
            json_f64(mode.omega)
        );
    }
    for &m in &mono.annihilators {
        if !first {
            out.push(',');
        }
        first = false;
        let mode = model.mode(m);
        let _ = write!(
            out,
            "{{\"op\":\"annihilate\",\"sigma\":\"{}\",\"omega\":{}}}",
            json_escape(&mode.sigma),
            json_f64(mode.omega)
        );
    }
    out.push(']');
    out
}

/// JSON document mirroring the effective-Hamiltonian fields.
pub fn effective_json(
    model: &InteractionModel,
    policy: &EliminationPolicy,
    h: &EffectiveHamiltonian,
) -> String {
    let mut out = String::new();
    out.push_str("{\n");
    let _ = writeln!(out, "  \"order\": {},", h.order);
    let _ = writeln!(
        out,
        "  \"policy\": {{\"T\": {}, \"kappa\": {}, \"eps_deg\": {}, \"pv_window\": {}, \"drop_renormalization\": {}}},",
        json_f64(policy.t_window),
        json_f64(policy.kappa),
        json_f64(policy.eps_deg),
        json_f64(policy.pv_window),
        policy.drop_renormalization
    );
    out.push_str("  \"terms\": [\n");
    for (k, t) in h.terms.iter().enumerate() {
        let sources = t
            .sources
            .iter()
            .map(|s| format!("\"{}\"", json_escape(s)))
            .collect::<Vec<_>>()
            .join(",");
        let _ = write!(
            out,
            "    {{\"matter\": {{\"to\": \"{}\", \"from\": \"{}\"}}, \"order\": {}, \"boson_string\": {}, \"coeff_terms\": {}, \"source_diagram_id\": \"{}\", \"source_diagram_ids\": [{}]}}",
            json_escape(&model.level(t.matter_to).name),
            json_escape(&model.level(t.matter_from).name),
            t.order,
            boson_json(model, &t.boson),
            weight_terms_json(&t.coeff),
            json_escape(t.sources.first().map(String::as_str).unwrap_or("")),
            sources
        );
        out.push_str(if k + 1 < h.terms.len() { ",\n" } else { "\n" });
    }
    out.push_str("  ],\n");
    out.push_str("  \"dropped\": [\n");
    for (k, d) in h.dropped.iter().enumerate() {
        let reason = match d.reason {
            DropReason::FastOscillation => "fast_oscillation",
            DropReason::Renormalization => "renormalization",
        };
        let _ = write!(
            out,
            "    {{\"source_diagram_id\": \"{}\", \"string\": \"{}\", \"order\": {}, \"matter\": {{\"to\": \"{}\", \"from\": \"{}\"}}, \"osc\": {}, \"abs_osc_T\": {}, \"reason\": \"{}\"}}",
            json_escape(&d.source_class),
            json_escape(&d.string_id),
            d.order,
            json_escape(&model.level(d.matter_to).name),
            json_escape(&model.level(d.matter_from).name),
            json_f64(d.term.osc),
            json_f64(d.abs_osc_times_t),
            reason
        );
        out.push_str(if k + 1 < h.dropped.len() { ",\n" } else { "\n" });
    }
    out.push_str("  ],\n");
    let r_t = match h.diagnostics.r_t {
        Some(x) if x.is_finite() => json_f64(x),
        Some(_) => "\"infinite\"".to_string(),
        None => "null".to_string(),
    };
    let warnings = h
        .diagnostics
        .warnings
        .iter()
        .map(|w| format!("\"{}\"", json_escape(w)))
        .collect::<Vec<_>>()
        .join(",");
    let mut shifts = String::from("[");
    for (k, (mono, wf)) in h.diagnostics.global_shift.iter().enumerate() {
        if k > 0 {
            shifts.push(',');
        }
        let _ = write!(
            shifts,
            "{{\"boson_string\": {}, \"coeff_terms\": {}}}",
            boson_json(model, mono),
            weight_terms_json(wf)
        );
    }
    shifts.push(']');
    let _ = writeln!(
        out,
        "  \"diagnostics\": {{\"r_t\": {r_t}, \"warnings\": [{warnings}], \"global_shift\": {shifts}}}"
    );
    out.push_str("}\n");
    out
}

fn weight_text(wf: &WeightFunction) -> String {
    dispersive_core::weights::format_weight(wf)
}

/// Human-readable report.
pub fn effective_text(
    model: &InteractionModel,
    policy: &EliminationPolicy,
    h: &EffectiveHamiltonian,
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "effective Hamiltonian correction up to order {}", h.order);
    let _ = writeln!(
        out,
        "policy: T = {}, kappa = {}, eps_deg = {:.3e}, drop_renormalization = {}",
        policy.t_window, policy.kappa, policy.eps_deg, policy.drop_renormalization
    );
    let _ = writeln!(out, "retained terms: {}", h.terms.len());
    for t in &h.terms {
        let mut boson = String::new();
        for &m in &t.boson.creators {
            let mode = model.mode(m);
            let _ = write!(boson, " adag({}:{:.6})", mode.sigma, mode.omega);
        }
        for &m in &t.boson.annihilators {
            let mode = model.mode(m);
            let _ = write!(boson, " a({}:{:.6})", mode.sigma, mode.omega);
        }
        if boson.is_empty() {
            boson = " 1".into();
        }
        let _ = writeln!(
            out,
            "  [n={}] |{}><{}| ⊗{}  :  {}   (from {})",
            t.order,
            model.level(t.matter_to).name,
            model.level(t.matter_from).name,
            boson,
            weight_text(&t.coeff),
            t.sources.join(", ")
        );
    }
    let _ = writeln!(out, "dropped components: {}", h.dropped.len());
    for d in &h.dropped {
        let reason = match d.reason {
            DropReason::FastOscillation => "fast",
            DropReason::Renormalization => "renorm",
        };
        let _ = writeln!(
            out,
            "  [n={}] {} |{}><{}|  osc {:+.6e}  |Δ|T = {:.3e}  ({})",
            d.order,
            d.string_id,
            model.level(d.matter_to).name,
            model.level(d.matter_from).name,
            d.term.osc,
            d.abs_osc_times_t,
            reason
        );
    }
    if let Some(rt) = h.diagnostics.r_t {
        let _ = writeln!(out, "continuum resonance fraction R_T = {rt:.6e}");
    }
    for w in &h.diagnostics.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    out
}

/// Verification report (text).
pub fn comparisons_text(reports: &[ComparisonReport]) -> String {
    let mut out = String::new();
    for r in reports {
        let _ = writeln!(
            out,
            "{}: exact = {:.9e}, effective = {:.9e}, abs err = {:.3e}, rel err = {:.3e}, dispersive scale = {:.3e}",
            r.observable, r.exact, r.effective, r.abs_err, r.rel_err, r.dispersive_scale
        );
    }
    out
}

/// Verification report (JSON).
pub fn comparisons_json(reports: &[ComparisonReport]) -> String {
    let mut out = String::from("[\n");
    for (k, r) in reports.iter().enumerate() {
        let _ = write!(
            out,
            "  {{\"observable\": \"{}\", \"exact\": {}, \"effective\": {}, \"abs_err\": {}, \"rel_err\": {}, \"dispersive_scale\": {}, \"truncation_shift\": {}, \"params\": \"{}\"}}",
            json_escape(&r.observable),
            json_f64(r.exact),
            json_f64(r.effective),
            json_f64(r.abs_err),
            json_f64(r.rel_err),
            json_f64(r.dispersive_scale),
            json_f64(r.truncation_shift),
            json_escape(&r.params)
        );
        out.push_str(if k + 1 < reports.len() { ",\n" } else { "\n" });
    }
    out.push_str("]\n");
    out
}
