//! Line-based model files.
//!
//! Sections `[levels]`, `[modes]`, `[couplings]`, `[continuum]`, `[policy]`;
//! `#` starts a comment; fields are whitespace-separated. See the README
//! for the full schema. Every coupling line declares one operator; its
//! Hermitian partner is added automatically.

use std::collections::BTreeMap;

use dispersive_core::elimination::{
    add_continuum_family, ContinuumEnvelope, EliminationPolicy, EnvelopeShape,
};
use dispersive_core::model::{validate_model, InteractionModel, ModelBuilder};
use dispersive_core::C64;

#[derive(Debug)]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ParseError {}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError { line, message: message.into() }
}

fn parse_f64(line: usize, field: &str, s: &str) -> Result<f64, ParseError> {
    s.parse::<f64>().map_err(|_| err(line, format!("{field}: not a number: {s:?}")))
}

/// Policy overrides collected from the `[policy]` section.
#[derive(Debug, Default, Clone)]
pub struct PolicyOverrides {
    pub t_window: Option<f64>,
    pub kappa: Option<f64>,
    pub eps_deg: Option<f64>,
    pub pv_window: Option<f64>,
    pub drop_renormalization: Option<bool>,
    pub class_cap: Option<usize>,
}

impl PolicyOverrides {
    pub fn apply(&self, mut policy: EliminationPolicy) -> EliminationPolicy {
        if let Some(t) = self.t_window {
            policy.t_window = t;
        }
        if let Some(k) = self.kappa {
            policy.kappa = k;
        }
        if let Some(e) = self.eps_deg {
            policy.eps_deg = e;
        }
        if let Some(p) = self.pv_window {
            policy.pv_window = p;
        }
        if let Some(d) = self.drop_renormalization {
            policy.drop_renormalization = d;
        }
        if let Some(c) = self.class_cap {
            policy.class_cap = c;
        }
        policy
    }
}

/// Parse model text into a validated model plus its elimination policy.
///
/// The default coarse-graining time is `1e3 / max|δ|`-scaled only through
/// the explicit `[policy] T`; absent that, `T = 1000`.
pub fn parse_model_text(
    text: &str,
) -> Result<(InteractionModel, EliminationPolicy), ParseError> {
    #[derive(PartialEq, Clone, Copy)]
    enum Section {
        None,
        Levels,
        Modes,
        Couplings,
        Continuum,
        Policy,
    }
    let mut section = Section::None;
    let mut builder = ModelBuilder::new();
    let mut level_ids: BTreeMap<String, usize> = BTreeMap::new();
    let mut mode_ids: BTreeMap<(String, u64), usize> = BTreeMap::new();
    let mut overrides = PolicyOverrides::default();
    // Continuum lines are applied after discrete modes so level names are
    // all known; they also need the builder, so process in order instead.
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            section = match name {
                "levels" => Section::Levels,
                "modes" => Section::Modes,
                "couplings" => Section::Couplings,
                "continuum" => Section::Continuum,
                "policy" => Section::Policy,
                other => return Err(err(line, format!("unknown section [{other}]"))),
            };
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        match section {
            Section::None => return Err(err(line, "content before any [section]")),
            Section::Levels => {
                // name omega
                if fields.len() != 2 {
                    return Err(err(line, "levels: expected `name omega`"));
                }
                if level_ids.contains_key(fields[0]) {
                    return Err(err(line, format!("duplicate level name {:?}", fields[0])));
                }
                let omega = parse_f64(line, "level omega", fields[1])?;
                let id = builder.level(fields[0], omega);
                level_ids.insert(fields[0].to_string(), id);
            }
            Section::Modes => {
                // sigma omega
                if fields.len() != 2 {
                    return Err(err(line, "modes: expected `sigma omega`"));
                }
                let omega = parse_f64(line, "mode omega", fields[1])?;
                let key = (fields[0].to_string(), omega.to_bits());
                if mode_ids.contains_key(&key) {
                    return Err(err(line, format!("duplicate mode {} {}", fields[0], fields[1])));
                }
                let idx = builder.discrete_mode(fields[0], omega);
                mode_ids.insert(key, idx);
            }
            Section::Couplings => {
                // from to sigma omega absorb|emit g_re [g_im]
                if fields.len() != 6 && fields.len() != 7 {
                    return Err(err(
                        line,
                        "couplings: expected `from to sigma omega absorb|emit g_re [g_im]`",
                    ));
                }
                let from = *level_ids
                    .get(fields[0])
                    .ok_or_else(|| err(line, format!("unknown level {:?}", fields[0])))?;
                let to = *level_ids
                    .get(fields[1])
                    .ok_or_else(|| err(line, format!("unknown level {:?}", fields[1])))?;
                let omega = parse_f64(line, "coupling omega", fields[3])?;
                let mode = *mode_ids
                    .get(&(fields[2].to_string(), omega.to_bits()))
                    .ok_or_else(|| err(line, format!("unknown mode {} {}", fields[2], fields[3])))?;
                let dagger = match fields[4] {
                    "absorb" => false,
                    "emit" => true,
                    other => return Err(err(line, format!("expected absorb|emit, got {other:?}"))),
                };
                let g_re = parse_f64(line, "g_re", fields[5])?;
                let g_im =
                    if fields.len() == 7 { parse_f64(line, "g_im", fields[6])? } else { 0.0 };
                builder.coupling(from, to, mode, dagger, C64::new(g_re, g_im));
            }
            Section::Continuum => {
                // sigma from to absorb|emit gaussian amp center width lo hi samples
                // sigma from to absorb|emit flat amp lo hi samples
                if fields.len() < 5 {
                    return Err(err(line, "continuum: too few fields"));
                }
                let sigma = fields[0];
                let from = *level_ids
                    .get(fields[1])
                    .ok_or_else(|| err(line, format!("unknown level {:?}", fields[1])))?;
                let to = *level_ids
                    .get(fields[2])
                    .ok_or_else(|| err(line, format!("unknown level {:?}", fields[2])))?;
                let dagger = match fields[3] {
                    "absorb" => false,
                    "emit" => true,
                    other => return Err(err(line, format!("expected absorb|emit, got {other:?}"))),
                };
                let (shape, rest) = match fields[4] {
                    "gaussian" => {
                        if fields.len() != 11 {
                            return Err(err(
                                line,
                                "continuum gaussian: expected `sigma from to orient gaussian amp center width lo hi samples`",
                            ));
                        }
                        (
                            EnvelopeShape::Gaussian {
                                amp: parse_f64(line, "amp", fields[5])?,
                                center: parse_f64(line, "center", fields[6])?,
                                width: parse_f64(line, "width", fields[7])?,
                            },
                            &fields[8..],
                        )
                    }
                    "flat" => {
                        if fields.len() != 9 {
                            return Err(err(
                                line,
                                "continuum flat: expected `sigma from to orient flat amp lo hi samples`",
                            ));
                        }
                        (
                            EnvelopeShape::Flat { amp: parse_f64(line, "amp", fields[5])? },
                            &fields[6..],
                        )
                    }
                    other => return Err(err(line, format!("unknown envelope shape {other:?}"))),
                };
                let lo = parse_f64(line, "support lo", rest[0])?;
                let hi = parse_f64(line, "support hi", rest[1])?;
                let samples: usize = rest[2]
                    .parse()
                    .map_err(|_| err(line, format!("samples: not an integer: {:?}", rest[2])))?;
                let env = ContinuumEnvelope { support: (lo, hi), shape };
                add_continuum_family(&mut builder, sigma, &env, samples, from, to, dagger)
                    .map_err(|e| err(line, format!("continuum: {e}")))?;
            }
            Section::Policy => {
                if fields.len() != 2 {
                    return Err(err(line, "policy: expected `key value`"));
                }
                match fields[0] {
                    "T" => {
                        let t = parse_f64(line, "policy.T", fields[1])?;
                        if !(t > 0.0) {
                            return Err(err(line, "policy.T must be > 0"));
                        }
                        overrides.t_window = Some(t);
                    }
                    "kappa" => {
                        let k = parse_f64(line, "policy.kappa", fields[1])?;
                        if !(k > 0.0) {
                            return Err(err(line, "policy.kappa must be > 0"));
                        }
                        overrides.kappa = Some(k);
                    }
                    "eps_deg" => overrides.eps_deg = Some(parse_f64(line, "policy.eps_deg", fields[1])?),
                    "pv_window" => {
                        let w = parse_f64(line, "policy.pv_window", fields[1])?;
                        if !(w > 0.0) {
                            return Err(err(line, "policy.pv_window must be > 0"));
                        }
                        overrides.pv_window = Some(w);
                    }
                    "drop_renormalization" => {
                        overrides.drop_renormalization = Some(match fields[1] {
                            "0" | "false" => false,
                            "1" | "true" => true,
                            other => {
                                return Err(err(
                                    line,
                                    format!("policy.drop_renormalization: expected 0/1, got {other:?}"),
                                ))
                            }
                        })
                    }
                    "class_cap" => {
                        overrides.class_cap = Some(fields[1].parse().map_err(|_| {
                            err(line, format!("policy.class_cap: not an integer: {:?}", fields[1]))
                        })?)
                    }
                    other => return Err(err(line, format!("unknown policy key {other:?}"))),
                }
            }
        }
    }
    let model = builder.finish();
    if let Err(errors) = validate_model(&model) {
        let mut message = String::from("model validation failed:");
        for e in &errors {
            message.push_str(&format!(" {e};"));
        }
        return Err(err(0, message));
    }
    let policy = overrides.apply(EliminationPolicy::for_model(
        &model,
        overrides.t_window.unwrap_or(1000.0),
    ));
    Ok((model, policy))
}

/// Read and parse a model file.
pub fn parse_model_file(
    path: &std::path::Path,
) -> Result<(InteractionModel, EliminationPolicy), ParseError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| err(0, format!("cannot read {}: {e}", path.display())))?;
    parse_model_text(&text)
}
