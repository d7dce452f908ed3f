//! Orchestration of the CLI verbs: derive, diagrams, verify, bounds.

use std::path::{Path, PathBuf};

use dispersive_core::diagrams::{combinatorial_bound, enumerate_order_n, render_diagram, RenderFormat};
use dispersive_core::elimination::{assemble_effective, effective_matrix, EliminationPolicy};
use dispersive_core::model::InteractionModel;
use dispersive_core::oracle::{
    compare_effective_vs_exact, quadrature_weight_converged, FockTruncation, Observable,
};
use dispersive_core::util::SplitMix64;
use dispersive_core::weights::{canonical_weight_regulated, placements_of};

use crate::modelfile::parse_model_file;
use crate::report;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Derive,
    Diagrams,
    Verify,
    Bounds,
}

/// Parsed command line.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub model: Option<PathBuf>,
    pub order: usize,
    pub t_override: Option<f64>,
    pub kappa_override: Option<f64>,
    pub format: Format,
    pub diagrams_dir: Option<PathBuf>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub m_ops: Option<u64>,
    pub verify: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: Command::Derive,
            model: None,
            order: 1,
            t_override: None,
            kappa_override: None,
            format: Format::Text,
            diagrams_dir: None,
            seed: 20_250_101,
            out: None,
            m_ops: None,
            verify: false,
        }
    }
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), String> {
    match out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn load(cfg: &RunConfig) -> Result<(InteractionModel, EliminationPolicy), String> {
    let path = cfg.model.as_ref().ok_or("--model PATH is required")?;
    let (model, mut policy) = parse_model_file(path).map_err(|e| e.to_string())?;
    if let Some(t) = cfg.t_override {
        if !(t > 0.0) {
            return Err("--T must be > 0".into());
        }
        policy.t_window = t;
    }
    if let Some(k) = cfg.kappa_override {
        if !(k > 0.0) {
            return Err("--kappa must be > 0".into());
        }
        policy.kappa = k;
    }
    Ok((model, policy))
}

fn write_diagrams(
    model: &InteractionModel,
    order: usize,
    policy: &EliminationPolicy,
    dir: &Path,
) -> Result<usize, String> {
    std::fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
    let classes =
        enumerate_order_n(model, order, policy.class_cap).map_err(|e| e.to_string())?;
    for class in &classes {
        let name = class.id().replace([':', '.'], "_");
        let path = dir.join(format!("{name}.dot"));
        std::fs::write(&path, render_diagram(model, class, RenderFormat::Dot))
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    Ok(classes.len())
}

/// Randomized weight-formula-vs-quadrature check; returns the worst
/// relative error observed.
pub fn weight_oracle_check(seed: u64, draws: usize) -> f64 {
    let mut rng = SplitMix64::new(seed);
    let mut worst = 0.0f64;
    for n in 1..=2usize {
        for _ in 0..draws {
            let deltas: Vec<f64> = (0..=n).map(|_| rng.signed_uniform(0.1, 5.0)).collect();
            let thetas: Vec<f64> = (0..=n).map(|_| rng.uniform(1e-6, 1e-3)).collect();
            for placement in placements_of(n) {
                let wf = canonical_weight_regulated(&deltas, &thetas, &placement);
                for &t in &[0.1, 1.0, 10.0] {
                    let q = quadrature_weight_converged(&deltas, &thetas, &placement, t, 1e-10);
                    let c = wf.eval(t);
                    let rel = (q - c).norm() / c.norm().max(1e-6);
                    worst = worst.max(rel);
                }
            }
        }
    }
    worst
}

fn run_verify(
    model: &InteractionModel,
    policy: &EliminationPolicy,
    cfg: &RunConfig,
) -> Result<(String, bool), String> {
    let mut out = String::new();
    let mut ok = true;

    let worst = weight_oracle_check(cfg.seed, 6);
    out.push_str(&format!(
        "weight formula vs nested quadrature (seed {}): worst rel err {:.3e} (tol 1e-8)\n",
        cfg.seed, worst
    ));
    if worst > 1e-8 {
        ok = false;
    }

    let h_eff = assemble_effective(model, cfg.order, policy).map_err(|e| e.to_string())?;
    let n_levels = model.levels.len();
    let n_modes = model.modes.len();
    // Hermiticity in a small dense truncation, when representable.
    let n_max = 3u32;
    let trunc = FockTruncation::uniform(n_modes, n_max);
    let dim = trunc.dimension(n_levels);
    if dim <= 4096 {
        let mut defect = 0.0f64;
        for &t in &[0.0, 0.37, 1.9] {
            let m = effective_matrix(model, &h_eff, &trunc, t, true);
            defect = defect.max(m.hermiticity_defect());
        }
        out.push_str(&format!(
            "effective-Hamiltonian Hermiticity defect (n_max {n_max}): {defect:.3e} (tol 1e-12)\n"
        ));
        if defect > 1e-12 {
            ok = false;
        }
    } else {
        out.push_str("hermiticity matrix check skipped: dense dimension above budget\n");
    }

    if n_levels == 2 && n_modes == 1 {
        let reports = compare_effective_vs_exact(
            model,
            policy,
            cfg.order,
            &[Observable::QubitShift, Observable::DispersiveShiftSlope { max_photons: 4 }],
        )
        .map_err(|e| e.to_string())?;
        out.push_str(&report::comparisons_text(&reports));
        let g_max = model.ops.iter().map(|o| o.g.norm()).fold(0.0f64, f64::max);
        let d_min = model
            .ops
            .iter()
            .map(|o| model.detuning_of(o).abs())
            .filter(|d| *d > 0.0)
            .fold(f64::INFINITY, f64::min);
        let gate = (10.0 * (g_max / d_min) * (g_max / d_min)).max(1e-9);
        if reports[0].rel_err > gate {
            out.push_str(&format!(
                "qubit-shift disagreement {:.3e} exceeds dispersive gate {:.3e}\n",
                reports[0].rel_err, gate
            ));
            ok = false;
        }
    }
    Ok((out, ok))
}

/// Execute the configured verb; returns the process exit code
/// (0 success, 1 error, 2 verification failure beyond tolerance).
pub fn run_pipeline(cfg: &RunConfig) -> i32 {
    match run_inner(cfg) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            1
        }
    }
}

fn run_inner(cfg: &RunConfig) -> Result<i32, String> {
    match cfg.command {
        Command::Bounds => {
            let (m, actual) = match (&cfg.model, cfg.m_ops) {
                (Some(_), _) => {
                    let (model, policy) = load(cfg)?;
                    let classes = enumerate_order_n(&model, cfg.order, policy.class_cap)
                        .map_err(|e| e.to_string())?;
                    (model.op_count() as u64, Some(classes.len()))
                }
                (None, Some(m)) => (m, None),
                (None, None) => return Err("bounds needs --model PATH or --m M".into()),
            };
            let b = combinatorial_bound(m, cfg.order as u64);
            let mut out = String::new();
            out.push_str(&format!("M = {m}, order n = {}\n", cfg.order));
            out.push_str(&format!("operator strings <= {}\n", b.operators));
            out.push_str(&format!("diagram classes  <= {}\n", b.diagrams));
            if let Some(t) = b.first_order_tight {
                out.push_str(&format!("tight first-order count: {t}\n"));
            }
            if let Some(t) = b.second_order_tight {
                out.push_str(&format!("tight second-order count: {t}\n"));
            }
            if let Some(actual) = actual {
                out.push_str(&format!("actual classes enumerated: {actual}\n"));
            }
            emit(&cfg.out, &out)?;
            Ok(0)
        }
        Command::Diagrams => {
            let (model, policy) = load(cfg)?;
            if let Some(dir) = &cfg.diagrams_dir {
                let count = write_diagrams(&model, cfg.order, &policy, dir)?;
                println!("wrote {count} diagram files to {}", dir.display());
                return Ok(0);
            }
            let classes = enumerate_order_n(&model, cfg.order, policy.class_cap)
                .map_err(|e| e.to_string())?;
            let mut out = String::new();
            for class in &classes {
                let fmt = match cfg.format {
                    Format::Text => RenderFormat::Text,
                    Format::Json => RenderFormat::Dot,
                };
                out.push_str(&render_diagram(&model, class, fmt));
                out.push('\n');
            }
            emit(&cfg.out, &out)?;
            Ok(0)
        }
        Command::Derive => {
            if cfg.order < 1 {
                return Err("--order must be >= 1".into());
            }
            let (model, policy) = load(cfg)?;
            let h_eff = assemble_effective(&model, cfg.order, &policy).map_err(|e| e.to_string())?;
            let body = match cfg.format {
                Format::Json => report::effective_json(&model, &policy, &h_eff),
                Format::Text => report::effective_text(&model, &policy, &h_eff),
            };
            emit(&cfg.out, &body)?;
            if let Some(dir) = &cfg.diagrams_dir {
                write_diagrams(&model, cfg.order, &policy, dir)?;
            }
            if cfg.verify {
                let (vout, ok) = run_verify(&model, &policy, cfg)?;
                eprint!("{vout}");
                if !ok {
                    return Ok(2);
                }
            }
            Ok(0)
        }
        Command::Verify => {
            let (model, policy) = load(cfg)?;
            let (vout, ok) = run_verify(&model, &policy, cfg)?;
            emit(&cfg.out, &vout)?;
            Ok(if ok { 0 } else { 2 })
        }
    }
}
