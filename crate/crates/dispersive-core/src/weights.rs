//! Time-dependent weights of transition strings.
//!
//! An order-`n` string has, for each choice of perturbed constituent and
//! each admissible interleaving of the remaining operators, a closed-form
//! weight: a partial-fraction sum of complex exponentials over the
//! cumulative detunings accumulated along the application order. The total
//! weight averages the `2^n` placement-interleavings over the `n+1`
//! perturbed-vertex choices, with a sign `(-1)^{N_L}` counting operators
//! applied on the left.
//!
//! Regulators θ > 0 keep the partial fractions nonsingular; the θ → 0 limit
//! is taken analytically, with coincident cumulative detunings handled by
//! the residue-derivative (double-pole) formula, which produces `t·e^{-iΔt}`
//! terms alongside the plain exponentials.

use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};
use num_complex::Complex64 as C64;

use crate::algebra::TransitionString;
use crate::model::InteractionModel;
use crate::util::{interleavings, KahanSum};

/// One term `amp · t^p · e^{-i osc t} · e^{-decay t}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightTerm {
    pub amp: C64,
    pub t_power: u32,
    pub osc: f64,
    pub decay: f64,
}

/// A finite sum of complex-exponential terms.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WeightFunction {
    pub terms: Vec<WeightTerm>,
}

/// Relative tolerance for merging equal oscillation frequencies.
const MERGE_EPS: f64 = 1e-12;

impl WeightFunction {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(amp: C64) -> Self {
        Self { terms: vec![WeightTerm { amp, t_power: 0, osc: 0.0, decay: 0.0 }] }
    }

    pub fn eval(&self, t: f64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for w in &self.terms {
            let phase = C64::new(-w.decay * t, -w.osc * t).exp();
            let mut poly = 1.0;
            for _ in 0..w.t_power {
                poly *= t;
            }
            acc += w.amp * poly * phase;
        }
        acc
    }

    pub fn push(&mut self, term: WeightTerm) {
        self.terms.push(term);
    }

    pub fn add(&mut self, other: &WeightFunction) {
        self.terms.extend_from_slice(&other.terms);
    }

    pub fn scale(&mut self, c: C64) {
        for w in &mut self.terms {
            w.amp *= c;
        }
    }

    pub fn scaled(&self, c: C64) -> WeightFunction {
        let mut out = self.clone();
        out.scale(c);
        out
    }

    /// Term-by-term complex conjugate (of the evaluated function at real t):
    /// amplitudes conjugated, oscillations negated, decay unchanged.
    pub fn conj(&self) -> WeightFunction {
        let mut out = self.clone();
        for w in &mut out.terms {
            w.amp = w.amp.conj();
            w.osc = -w.osc;
        }
        out.normalize();
        out
    }

    /// Merge terms with equal `(t_power, osc, decay)` and drop negligible
    /// amplitudes. Oscillation frequencies within `MERGE_EPS` of the term
    /// scale are identified.
    pub fn normalize(&mut self) {
        let scale = self
            .terms
            .iter()
            .map(|w| libm::fabs(w.osc).max(libm::fabs(w.decay)))
            .fold(0.0f64, f64::max)
            .max(1.0);
        let amp_scale = self.terms.iter().map(|w| w.amp.norm()).fold(0.0f64, f64::max);
        self.terms.sort_by(|a, b| {
            a.t_power
                .cmp(&b.t_power)
                .then(a.osc.total_cmp(&b.osc))
                .then(a.decay.total_cmp(&b.decay))
        });
        let mut merged: Vec<WeightTerm> = Vec::with_capacity(self.terms.len());
        for w in &self.terms {
            if let Some(last) = merged.last_mut() {
                if last.t_power == w.t_power
                    && libm::fabs(last.osc - w.osc) <= MERGE_EPS * scale
                    && libm::fabs(last.decay - w.decay) <= MERGE_EPS * scale
                {
                    last.amp += w.amp;
                    continue;
                }
            }
            merged.push(*w);
        }
        merged.retain(|w| w.amp.norm() > 1e-14 * amp_scale);
        self.terms = merged;
    }

    pub fn normalized(mut self) -> Self {
        self.normalize();
        self
    }
}

/// A perturbed-vertex choice plus one admissible interleaving.
///
/// `application_order[k]` is the string position (0..=n, process order)
/// applied at perturbative step k; entry 0 is the perturbed operator
/// itself. Positions above the perturbed index act on the left (ordered
/// right-to-left, i.e. ascending), positions below act on the right
/// (ordered left-to-right, i.e. descending); the two sides interleave
/// freely.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placement {
    pub perturbed_index: usize,
    pub application_order: Vec<usize>,
}

impl Placement {
    /// Number of operators applied on the left of the perturbed one.
    pub fn n_left(&self, n: usize) -> usize {
        n - self.perturbed_index
    }

    pub fn sign(&self, n: usize) -> f64 {
        if self.n_left(n) % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// The process-order (canonical) placement: perturbed index 0.
    pub fn canonical(n: usize) -> Placement {
        Placement { perturbed_index: 0, application_order: (0..=n).collect() }
    }
}

/// All `2^n` placement-interleavings of an order-`n` string; the count for
/// perturbed index `p` is `C(n, p)`.
pub fn placements_of(n: usize) -> Vec<Placement> {
    let mut out = Vec::new();
    for p in 0..=n {
        let left: Vec<usize> = ((p + 1)..=n).collect();
        let right: Vec<usize> = (0..p).rev().collect();
        for merged in interleavings(&left, &right) {
            let mut application_order = Vec::with_capacity(n + 1);
            application_order.push(p);
            application_order.extend(merged);
            out.push(Placement { perturbed_index: p, application_order });
        }
    }
    out
}

/// Regularized cumulative detunings `D_l = Δ_l - iΘ_l` along an application
/// order, built from per-constituent `(δ, θ)` in process order.
fn cumulative_along(
    deltas: &[f64],
    thetas: &[f64],
    placement: &Placement,
) -> (Vec<f64>, Vec<f64>) {
    let mut dsum = KahanSum::new();
    let mut tsum = 0.0;
    let mut cum_d = Vec::with_capacity(placement.application_order.len());
    let mut cum_t = Vec::with_capacity(placement.application_order.len());
    for &pos in &placement.application_order {
        dsum.add(deltas[pos]);
        tsum += thetas[pos];
        cum_d.push(dsum.value());
        cum_t.push(tsum);
    }
    (cum_d, cum_t)
}

/// Closed-form weight of one placement at finite regulators:
/// `(-1)^{N_L} Σ_l e^{-iΔ_l t} e^{-Θ_l t} Π_{k≠l} 1/(Δ_l-Δ_k+i(Θ_k-Θ_l))`.
///
/// Strictly positive, pairwise-distinct regulator sums guarantee the
/// denominators are nonsingular.
pub fn canonical_weight_regulated(
    deltas: &[f64],
    thetas: &[f64],
    placement: &Placement,
) -> WeightFunction {
    let n = deltas.len() - 1;
    let (cum_d, cum_t) = cumulative_along(deltas, thetas, placement);
    let sign = placement.sign(n);
    let mut wf = WeightFunction::zero();
    for l in 0..=n {
        let mut amp = C64::new(sign, 0.0);
        for k in 0..=n {
            if k == l {
                continue;
            }
            let den = C64::new(cum_d[l] - cum_d[k], cum_t[k] - cum_t[l]);
            amp /= den;
        }
        wf.push(WeightTerm { amp, t_power: 0, osc: cum_d[l], decay: cum_t[l] });
    }
    wf.normalized()
}

/// Weight of `s` evaluated along `placement`, keeping
/// the model's finite regulators (no coupling amplitudes).
pub fn canonical_weight(
    model: &InteractionModel,
    s: &TransitionString,
    placement: &Placement,
) -> WeightFunction {
    canonical_weight_regulated(&s.deltas(model), &s.thetas(model), placement)
}

/// Why a θ→0 limit could not be produced in closed form.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightError {
    /// Three or more cumulative detunings coincide; the treated cases stop
    /// at pairwise coincidence.
    HigherOrderPole { placement: Vec<usize>, values: Vec<f64> },
}

impl core::fmt::Display for WeightError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            WeightError::HigherOrderPole { placement, values } => write!(
                f,
                "unresolvable higher-order pole: cumulative detunings {values:?} coincide \
                 beyond pairwise along application order {placement:?}"
            ),
        }
    }
}

/// θ→0 limit of one placement's weight.
///
/// Simple (non-coincident) cumulative detunings give the plain partial
/// fractions; a coincident pair {a, b} at value Λ contributes
/// `-i·t·e^{-iΛt}·Π' 1/(Λ-Δ_k)` and `-(Π'Σ') e^{-iΛt}` where the primed
/// product/sum run over the remaining cumulative detunings.
pub fn canonical_weight_limit(
    deltas: &[f64],
    placement: &Placement,
    eps_deg: f64,
) -> Result<WeightFunction, WeightError> {
    let n = deltas.len() - 1;
    let zero_thetas = vec![0.0; deltas.len()];
    let (cum_d, _) = cumulative_along(deltas, &zero_thetas, placement);
    let sign = placement.sign(n);

    // Group coincident cumulative detunings.
    let mut order: Vec<usize> = (0..=n).collect();
    order.sort_by(|&i, &j| cum_d[i].total_cmp(&cum_d[j]));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &idx in &order {
        if let Some(last) = groups.last_mut() {
            let head = *last.last().expect("nonempty group");
            if libm::fabs(cum_d[idx] - cum_d[head]) <= eps_deg {
                last.push(idx);
                continue;
            }
        }
        groups.push(vec![idx]);
    }
    if let Some(bad) = groups.iter().find(|g| g.len() > 2) {
        return Err(WeightError::HigherOrderPole {
            placement: placement.application_order.clone(),
            values: bad.iter().map(|&i| cum_d[i]).collect(),
        });
    }

    // Group-midpoint value per index.
    let mut value = cum_d.clone();
    for g in &groups {
        if g.len() == 2 {
            let mid = 0.5 * (cum_d[g[0]] + cum_d[g[1]]);
            value[g[0]] = mid;
            value[g[1]] = mid;
        }
    }

    let mut wf = WeightFunction::zero();
    for g in &groups {
        if g.len() == 1 {
            let l = g[0];
            let mut amp = C64::new(sign, 0.0);
            for k in 0..=n {
                if k == l {
                    continue;
                }
                amp /= C64::new(value[l] - value[k], 0.0);
            }
            wf.push(WeightTerm { amp, t_power: 0, osc: value[l], decay: 0.0 });
        } else {
            let lam = value[g[0]];
            let mut prod = C64::new(1.0, 0.0);
            let mut sum = C64::new(0.0, 0.0);
            for k in 0..=n {
                if g.contains(&k) {
                    continue;
                }
                let inv = C64::new(1.0 / (lam - value[k]), 0.0);
                prod *= inv;
                sum += inv;
            }
            wf.push(WeightTerm {
                amp: C64::new(0.0, -sign) * prod,
                t_power: 1,
                osc: lam,
                decay: 0.0,
            });
            wf.push(WeightTerm {
                amp: C64::new(-sign, 0.0) * prod * sum,
                t_power: 0,
                osc: lam,
                decay: 0.0,
            });
        }
    }
    Ok(wf.normalized())
}

/// Total weight W_n of a string: the 1/(n+1) average, over all 2^n
/// placement-interleavings, of the signed θ→0 weights, multiplied by the
/// constituent coupling amplitudes.
pub fn total_weight(
    model: &InteractionModel,
    s: &TransitionString,
    eps_deg: f64,
) -> Result<WeightFunction, WeightError> {
    let n = s.order();
    let deltas = s.deltas(model);
    let mut wf = WeightFunction::zero();
    for placement in placements_of(n) {
        wf.add(&canonical_weight_limit(&deltas, &placement, eps_deg)?);
    }
    wf.scale(s.coupling_product(model) / (n as f64 + 1.0));
    Ok(wf.normalized())
}

/// Total weight at the model's finite regulators (same averaging).
pub fn total_weight_regulated(model: &InteractionModel, s: &TransitionString) -> WeightFunction {
    let n = s.order();
    let deltas = s.deltas(model);
    let thetas = s.thetas(model);
    let mut wf = WeightFunction::zero();
    for placement in placements_of(n) {
        wf.add(&canonical_weight_regulated(&deltas, &thetas, &placement));
    }
    wf.scale(s.coupling_product(model) / (n as f64 + 1.0));
    wf.normalized()
}

/// Weight of the reverse (Hermitian-conjugate) process, computed through
/// the conjugated string's own placement sum. Equals `total_weight(s)`
/// conjugated term by term.
pub fn reverse_weight(
    model: &InteractionModel,
    s: &TransitionString,
    eps_deg: f64,
) -> Result<WeightFunction, WeightError> {
    let hc = crate::algebra::hermitian_conjugate(model, s);
    total_weight(model, &hc, eps_deg)
}

/// Flags attached to a degenerate θ→0 limit.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DegeneracyReport {
    /// Pairs of coincident cumulative detuning values encountered, one
    /// entry per placement that was degenerate.
    pub coincident_values: Vec<f64>,
    /// Constant (non-oscillating) weight terms produced on a string whose
    /// final detuning is nonzero: energy-renormalization residue.
    pub renormalization_amp: C64,
    /// Secular `t^p` (p ≥ 1) terms present in the limit.
    pub has_secular_terms: bool,
}

/// Degeneracy-aware total weight plus renormalization flags.
///
/// The weight itself equals [`total_weight`]; the report records the
/// coincidences, the constant residue left on an off-resonant string, and
/// whether secular `t·e^{-iΔt}` terms appeared.
pub fn degenerate_limit_weight(
    model: &InteractionModel,
    s: &TransitionString,
    eps_deg: f64,
) -> Result<(WeightFunction, DegeneracyReport), WeightError> {
    let n = s.order();
    let deltas = s.deltas(model);
    let mut wf = WeightFunction::zero();
    let mut report = DegeneracyReport::default();
    for placement in placements_of(n) {
        let zero_thetas = vec![0.0; deltas.len()];
        let (cum_d, _) = cumulative_along(&deltas, &zero_thetas, &placement);
        let mut sorted = cum_d.clone();
        sorted.sort_by(f64::total_cmp);
        for w in sorted.windows(2) {
            if libm::fabs(w[1] - w[0]) <= eps_deg {
                report.coincident_values.push(0.5 * (w[0] + w[1]));
            }
        }
        wf.add(&canonical_weight_limit(&deltas, &placement, eps_deg)?);
    }
    wf.scale(s.coupling_product(model) / (n as f64 + 1.0));
    let wf = wf.normalized();
    let final_detuning = s.final_detuning(model);
    let osc_scale = deltas.iter().fold(0.0f64, |m, d| m.max(libm::fabs(*d))).max(1.0);
    for term in &wf.terms {
        if term.t_power >= 1 {
            report.has_secular_terms = true;
        }
        if term.t_power == 0
            && libm::fabs(term.osc) <= eps_deg.max(1e-12 * osc_scale)
            && libm::fabs(final_detuning) > eps_deg.max(1e-12 * osc_scale)
        {
            report.renormalization_amp += term.amp;
        }
    }
    Ok((wf, report))
}

/// Human-readable rendering of a weight, for reports.
pub fn format_weight(wf: &WeightFunction) -> String {
    if wf.terms.is_empty() {
        return "0".into();
    }
    let mut out = String::new();
    for (k, w) in wf.terms.iter().enumerate() {
        if k > 0 {
            out.push_str(" + ");
        }
        out.push_str(&format!("({:+.6e}{:+.6e}i)", w.amp.re, w.amp.im));
        if w.t_power > 0 {
            out.push_str(&format!("*t^{}", w.t_power));
        }
        if w.osc != 0.0 {
            out.push_str(&format!("*exp(-i*{:.6e}*t)", w.osc));
        }
        if w.decay != 0.0 {
            out.push_str(&format!("*exp(-{:.6e}*t)", w.decay));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn placement_count_is_two_to_the_n() {
        for n in 0..=4 {
            let ps = placements_of(n);
            assert_eq!(ps.len(), 1 << n);
            // C(n, p) interleavings per perturbed index.
            for p in 0..=n {
                let count = ps.iter().filter(|pl| pl.perturbed_index == p).count();
                assert_eq!(count, crate::util::binomial(n as u64, p as u64) as usize);
            }
        }
    }

    #[test]
    fn first_order_weight_matches_half_sum_form() {
        // V1(t) = 1/2 [ e^{-iδi t}/δj - e^{-iδj t}/δi
        //              + e^{-i(δi+δj)t}(1/δi - 1/δj) ]
        let (di, dj) = (-0.2f64, 1.8f64);
        let deltas = [di, dj];
        let mut wf = WeightFunction::zero();
        for p in placements_of(1) {
            wf.add(&canonical_weight_limit(&deltas, &p, 1e-12).unwrap());
        }
        wf.scale(C64::new(0.5, 0.0));
        let wf = wf.normalized();
        for &t in &[0.0, 0.3, 1.0, 5.0] {
            let phase = |x: f64| C64::new(0.0, -x * t).exp();
            let expect = (phase(di) / dj - phase(dj) / di
                + phase(di + dj) * (1.0 / di - 1.0 / dj))
                * 0.5;
            assert!(approx(wf.eval(t), expect, 1e-14), "t={t}");
        }
    }

    #[test]
    fn weights_vanish_at_t_zero_for_positive_order() {
        let deltas = [0.37, -1.21, 2.05];
        for p in placements_of(2) {
            let wf = canonical_weight_limit(&deltas, &p, 1e-12).unwrap();
            assert!(wf.eval(0.0).norm() < 1e-12);
        }
        let thetas = [1e-5, 2e-5, 3e-5];
        for p in placements_of(2) {
            let wf = canonical_weight_regulated(&deltas, &thetas, &p);
            assert!(wf.eval(0.0).norm() < 1e-12);
        }
    }

    #[test]
    fn second_order_placement_sum_closed_form() {
        // The sum over the four placement-interleavings (without the 1/3
        // average) collapses to a six-exponential closed form; combining
        // the partial fractions by hand gives the reference below.
        let (di, dj, dk) = (0.9f64, 0.55, -1.3);
        let deltas = [di, dj, dk];
        let mut sum = WeightFunction::zero();
        for p in placements_of(2) {
            sum.add(&canonical_weight_limit(&deltas, &p, 1e-12).unwrap());
        }
        let sum = sum.normalized();
        for &t in &[0.25, 1.0, 3.7] {
            let ph = |x: f64| C64::new(0.0, -x * t).exp();
            let expect = ph(di) / (dj * (dj + dk))
                + ph(dk) / (dj * (di + dj))
                - ph(dj) / (di * dk)
                + ph(di + dj) / dk * (1.0 / di - 1.0 / dj)
                + ph(dk + dj) / di * (1.0 / dk - 1.0 / dj)
                + ph(di + dj + dk)
                    * (1.0 / (dk * (dj + dk)) + 1.0 / (di * (di + dj)) - 1.0 / (di * dk));
            assert!(approx(sum.eval(t), expect, 1e-12), "t={t}: {:?} vs {:?}", sum.eval(t), expect);
        }
    }

    #[test]
    fn degenerate_pair_limit_is_finite_and_matches_theta_extrapolation() {
        // δj = -δk makes the canonical placement's cumulative detunings
        // coincide (Δ0 = Δ2).
        let (di, dj) = (0.9f64, 0.55);
        let deltas = [di, dj, -dj];
        let canon = Placement::canonical(2);
        let lim = canonical_weight_limit(&deltas, &canon, 1e-9).unwrap();
        for &t in &[0.4, 1.3, 6.0] {
            // Three-point Richardson in the regulator scale (quadratic fit).
            let eval_at = |s: f64| {
                let thetas = [s, 1.7 * s, 2.9 * s];
                canonical_weight_regulated(&deltas, &thetas, &canon).eval(t)
            };
            let v1 = eval_at(1e-5);
            let v2 = eval_at(5e-6);
            let v3 = eval_at(2.5e-6);
            let extrap = (v3 * 8.0 - v2 * 6.0 + v1) / 3.0;
            let tol = 1e-9 * lim.eval(t).norm().max(1.0);
            assert!(
                approx(lim.eval(t), extrap, tol),
                "t={t}: {:?} vs {:?}",
                lim.eval(t),
                extrap
            );
        }
        // The slow (Δ1-oscillation, t^0) component carries -1/(δj δk) = 1/δj².
        let slow = lim
            .terms
            .iter()
            .find(|w| w.t_power == 0 && libm::fabs(w.osc - (di + dj)) < 1e-9)
            .expect("slow component present");
        assert!(approx(slow.amp, C64::new(1.0 / (dj * dj), 0.0), 1e-12));
    }

    #[test]
    fn triple_coincidence_is_rejected() {
        // Application-order cumulative detunings 1, 1, 1 (δ = 1, 0, 0) hit a
        // genuine third-order pole.
        let deltas = [1.0f64, 0.0, 0.0];
        let canon = Placement::canonical(2);
        let err = canonical_weight_limit(&deltas, &canon, 1e-9).unwrap_err();
        assert!(matches!(err, WeightError::HigherOrderPole { .. }));
    }

    #[test]
    fn self_conjugate_loop_weight_is_real() {
        // The absorb-emit loop at opposite detunings sums placements into
        // (e^{iδt} + e^{-iδt} - 2)/(2δ): real at every t.
        let deltas = [-0.2f64, 0.2];
        let mut wf = WeightFunction::zero();
        for p in placements_of(1) {
            wf.add(&canonical_weight_limit(&deltas, &p, 1e-12).unwrap());
        }
        let wf = wf.scaled(C64::new(0.5, 0.0)).normalized();
        for &t in &[0.3, 1.9, 12.0] {
            assert!(wf.eval(t).im.abs() < 1e-14);
            let expect = (libm::cos(0.2 * t) - 1.0) / 0.2;
            assert!((wf.eval(t).re - expect).abs() < 1e-13);
        }
    }

    #[test]
    fn order_zero_weight_is_the_bare_free_phase() {
        // A single operator keeps its coupling and a unit-amplitude
        // oscillation at its own detuning.
        use crate::model::ModelBuilder;
        let mut b = ModelBuilder::new();
        let g = b.level("g", 0.0);
        let e = b.level("e", 1.0);
        let c = b.discrete_mode("c", 0.8);
        b.coupling(g, e, c, false, C64::new(0.02, 0.0));
        let model = b.finish();
        let s = crate::algebra::TransitionString { ops: vec![0] };
        let wf = total_weight(&model, &s, 1e-12).unwrap();
        assert_eq!(wf.terms.len(), 1);
        assert!((wf.terms[0].amp - C64::new(0.02, 0.0)).norm() < 1e-15);
        assert!((wf.terms[0].osc - (-0.2)).abs() < 1e-15);
        assert_eq!(wf.terms[0].t_power, 0);
    }

    #[test]
    fn conj_matches_pointwise_conjugation() {
        let deltas = [0.9, 0.55, -1.3];
        let thetas = [1e-6, 2e-6, 3e-6];
        for p in placements_of(2) {
            let wf = canonical_weight_regulated(&deltas, &thetas, &p);
            let cj = wf.conj();
            for &t in &[0.1, 2.0] {
                assert!(approx(cj.eval(t), wf.eval(t).conj(), 1e-13));
            }
        }
    }
}
