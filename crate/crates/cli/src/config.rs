//! Experiment configuration: JSON schema (versioned with `schema: 1`),
//! model descriptors, check parameters, and the built-in presets.
//!
//! A config carries a mandatory seed (no wall-clock defaults), an output
//! format, and either a single `model` + `checks` pair or a list of
//! `suites`, each with its own model and checks. Unknown check names are
//! rejected at parse time by the tagged enum.

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use qpoincare_core::algebra::DensityState;
use qpoincare_core::matcore::{CMat, HermitianMatrix, C64};
use qpoincare_core::models::{self, Model};
use qpoincare_core::qms::{gksl_generator, JumpTerm, SymmetryTag};
use qpoincare_core::sampling;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub schema: u32,
    pub seed: u64,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub model: Option<ModelDescriptor>,
    #[serde(default)]
    pub checks: Option<Vec<CheckSpec>>,
    #[serde(default)]
    pub suites: Option<Vec<SuiteSpec>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteSpec {
    pub model: ModelDescriptor,
    pub checks: Vec<CheckSpec>,
}

#[derive(Clone, Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub format: OutputFormat,
    /// Stream destination; the --out flag overrides it.
    #[serde(default)]
    pub path: Option<String>,
}

#[derive(Clone, Copy, Debug, Deserialize, Default, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

/// Validated configuration: a list of (model, checks) suites.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub output: OutputFormat,
    pub out_path: Option<String>,
    pub suites: Vec<SuiteSpec>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawConfig = serde_json::from_str(text).context("config parse error")?;
        if raw.schema != 1 {
            bail!("unsupported config schema {} (expected 1)", raw.schema);
        }
        let suites = match (raw.model, raw.checks, raw.suites) {
            (Some(model), Some(checks), None) => vec![SuiteSpec { model, checks }],
            (None, None, Some(suites)) if !suites.is_empty() => suites,
            _ => bail!("config needs either model+checks or a non-empty suites list"),
        };
        Ok(ExperimentConfig {
            seed: raw.seed,
            output: raw.output.format,
            out_path: raw.output.path,
            suites,
        })
    }
}

/// Matrix as nested row-major re/im arrays.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn to_mat(&self) -> Result<CMat> {
        let d = self.re.len();
        if d == 0 || self.im.len() != d {
            bail!("matrix arrays must be square and matching");
        }
        let mut m = CMat::zeros(d);
        for i in 0..d {
            if self.re[i].len() != d || self.im[i].len() != d {
                bail!("matrix row {i} has wrong length");
            }
            for j in 0..d {
                m[(i, j)] = C64::new(self.re[i][j], self.im[i][j]);
            }
        }
        Ok(m)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpJson {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
    pub weight: f64,
}

/// Model descriptors mirrored in JSON with a kind discriminator.
#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelDescriptor {
    BirthDeath {
        n: usize,
        beta: f64,
    },
    Rademacher {
        n: usize,
        d: usize,
        coeff_seed: u64,
        #[serde(default)]
        self_adjoint: bool,
    },
    Depolarizing {
        d: usize,
    },
    RandomGnsDb {
        dim: usize,
        k: usize,
        seed: u64,
    },
    KmsOnly {
        dim: usize,
        seed: u64,
    },
    /// Inline generator serialization: jump matrices, weights, state and
    /// declared symmetry tags.
    Custom {
        dim: usize,
        jumps: Vec<JumpJson>,
        state: MatrixJson,
        #[serde(default)]
        tags: Vec<String>,
    },
}

impl ModelDescriptor {
    pub fn build(&self) -> Result<Model> {
        let model = match self {
            ModelDescriptor::BirthDeath { n, beta } => models::birth_death(*n, *beta)?,
            ModelDescriptor::Rademacher {
                n,
                d,
                coeff_seed,
                self_adjoint,
            } => {
                let mut rng =
                    sampling::stream(*coeff_seed, if *self_adjoint { 0xc0fe } else { 0xc0ff });
                let coeffs: Vec<CMat> = (0..*n)
                    .map(|_| {
                        if *self_adjoint {
                            sampling::random_self_adjoint(&mut rng, *d)
                        } else {
                            sampling::random_matrix(&mut rng, *d)
                        }
                    })
                    .collect();
                models::rademacher(*n, *d, &coeffs)?
            }
            ModelDescriptor::Depolarizing { d } => models::depolarizing(*d)?,
            ModelDescriptor::RandomGnsDb { dim, k, seed } => {
                let state = models::seeded_state(*dim, *seed)?;
                models::random_gns_db(&state, *k, *seed)?
            }
            ModelDescriptor::KmsOnly { dim, seed } => models::kms_only(*dim, *seed)?,
            ModelDescriptor::Custom {
                dim,
                jumps,
                state,
                tags,
            } => {
                let state = DensityState::new(HermitianMatrix::new(state.to_mat()?)?)?;
                let mut terms = Vec::with_capacity(jumps.len());
                for j in jumps {
                    terms.push(JumpTerm::new(
                        MatrixJson {
                            re: j.re.clone(),
                            im: j.im.clone(),
                        }
                        .to_mat()?,
                        j.weight,
                    )?);
                }
                let tag = if tags.iter().any(|t| t == "gns_db") {
                    SymmetryTag::GnsDb(state.clone())
                } else if tags.iter().any(|t| t == "kms_db") {
                    SymmetryTag::KmsDb(state.clone())
                } else if tags.iter().any(|t| t == "tau_symmetric") {
                    SymmetryTag::TauSymmetric
                } else {
                    SymmetryTag::None
                };
                let gen = gksl_generator(terms, *dim)?.with_tag(tag);
                models::custom(format!("custom(d={dim})"), gen, state)?
            }
        };
        Ok(model)
    }
}

fn default_tol() -> f64 {
    1e-9
}

/// Check specifications; the `name` tag is the check identifier.
#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum CheckSpec {
    Pi {
        mode: PiModeSpec,
        p_grid: Vec<f64>,
        samples: u64,
        #[serde(default)]
        allow_intermediate: bool,
    },
    Klein {
        p_grid: Vec<f64>,
        pairs: u64,
        dims: Vec<usize>,
    },
    ConvexChain {
        p_grid: Vec<f64>,
        samples: u64,
    },
    Khintchine {
        p_grid: Vec<f64>,
        tuples: u64,
        n: usize,
        d: usize,
    },
    Concentration {
        p_stars: Vec<f64>,
        #[serde(default)]
        chebyshev_ps: Vec<f64>,
        #[serde(default)]
        extra_random: u64,
    },
    Diameter {
        samples: usize,
    },
    Talagrand {},
    CompositeGap {
        other: ModelDescriptor,
    },
    Regularize {
        eps_grid: Vec<f64>,
        #[serde(default = "default_monotone_samples")]
        monotone_samples: u64,
    },
    GapExact {
        #[serde(default)]
        expected: Option<f64>,
    },
    DetailedBalance {
        which: BalanceKind,
        #[serde(default = "default_tol")]
        threshold: f64,
    },
    EtaIndependence {
        p: f64,
        samples: u64,
        #[serde(default = "default_tol")]
        threshold: f64,
    },
    GfIdentification {
        p: f64,
        samples: u64,
        eta_grid: Vec<f64>,
        #[serde(default = "default_tol")]
        threshold: f64,
    },
    ExtremizePi {
        p: f64,
        mode: PiModeSpec,
        budget: usize,
        restarts: usize,
    },
    ExtremizeTalagrand {
        budget: usize,
    },
}

fn default_monotone_samples() -> u64 {
    20
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum PiModeSpec {
    TracialSa,
    HaagerupSa,
    HaagerupGeneral,
    LipInfinity,
}

impl PiModeSpec {
    pub fn to_core(self) -> qpoincare_core::inequalities::PiMode {
        use qpoincare_core::inequalities::PiMode;
        match self {
            PiModeSpec::TracialSa => PiMode::TracialSa,
            PiModeSpec::HaagerupSa => PiMode::HaagerupSa,
            PiModeSpec::HaagerupGeneral => PiMode::HaagerupGeneral,
            PiModeSpec::LipInfinity => PiMode::LipInfinity,
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum BalanceKind {
    Tau,
    Gns,
    Kms,
}

/// Built-in presets with documented parameters.
pub fn preset(name: &str) -> Result<&'static str> {
    match name {
        "paper-examples" => Ok(PAPER_EXAMPLES),
        "gap-laws" => Ok(GAP_LAWS),
        "concentration-sweep" => Ok(CONCENTRATION_SWEEP),
        "talagrand-sweep" => Ok(TALAGRAND_SWEEP),
        other => bail!("unknown preset '{other}'"),
    }
}

const PAPER_EXAMPLES: &str = r#"{
  "schema": 1,
  "seed": 20260810,
  "output": {"format": "json"},
  "suites": [
    {
      "model": {"kind": "depolarizing", "d": 4},
      "checks": [
        {"name": "gap_exact", "expected": 1.0},
        {"name": "pi", "mode": "tracial_sa", "p_grid": [2, 3, 4, 6], "samples": 50},
        {"name": "convex_chain", "p_grid": [3, 4, 6], "samples": 50}
      ]
    },
    {
      "model": {"kind": "birth_death", "n": 8, "beta": 1.0},
      "checks": [
        {"name": "detailed_balance", "which": "gns", "threshold": 1e-10},
        {"name": "pi", "mode": "haagerup_sa", "p_grid": [2, 3, 4, 6], "samples": 50},
        {"name": "pi", "mode": "haagerup_general", "p_grid": [2, 3, 4, 6], "samples": 50},
        {"name": "pi", "mode": "lip_infinity", "p_grid": [2, 3, 4, 6], "samples": 50},
        {"name": "concentration", "p_stars": [3, 4, 6], "chebyshev_ps": [3, 4, 6]},
        {"name": "diameter", "samples": 50},
        {"name": "talagrand"}
      ]
    },
    {
      "model": {"kind": "rademacher", "n": 3, "d": 2, "coeff_seed": 909, "self_adjoint": true},
      "checks": [
        {"name": "gap_exact", "expected": 1.0},
        {"name": "pi", "mode": "tracial_sa", "p_grid": [2, 3, 4, 6], "samples": 50},
        {"name": "khintchine", "p_grid": [2, 4, 6], "tuples": 50, "n": 3, "d": 2},
        {"name": "concentration", "p_stars": [3, 4, 6], "chebyshev_ps": [3, 4, 6]}
      ]
    }
  ]
}"#;

const GAP_LAWS: &str = r#"{
  "schema": 1,
  "seed": 31415,
  "output": {"format": "json"},
  "suites": [
    {
      "model": {"kind": "depolarizing", "d": 2},
      "checks": [
        {"name": "composite_gap", "other": {"kind": "depolarizing", "d": 2}},
        {"name": "composite_gap", "other": {"kind": "birth_death", "n": 2, "beta": 1.0}},
        {"name": "composite_gap", "other": {"kind": "birth_death", "n": 3, "beta": 0.5}}
      ]
    },
    {
      "model": {"kind": "birth_death", "n": 2, "beta": 1.0},
      "checks": [
        {"name": "composite_gap", "other": {"kind": "depolarizing", "d": 2}},
        {"name": "composite_gap", "other": {"kind": "birth_death", "n": 2, "beta": 1.0}},
        {"name": "composite_gap", "other": {"kind": "birth_death", "n": 3, "beta": 0.5}}
      ]
    },
    {
      "model": {"kind": "birth_death", "n": 3, "beta": 0.5},
      "checks": [
        {"name": "composite_gap", "other": {"kind": "depolarizing", "d": 2}},
        {"name": "composite_gap", "other": {"kind": "birth_death", "n": 2, "beta": 1.0}},
        {"name": "composite_gap", "other": {"kind": "birth_death", "n": 3, "beta": 0.5}}
      ]
    },
    {
      "model": {"kind": "depolarizing", "d": 4},
      "checks": [{"name": "regularize", "eps_grid": [1.0, 0.1, 0.01]}]
    },
    {
      "model": {"kind": "birth_death", "n": 4, "beta": 1.0},
      "checks": [{"name": "regularize", "eps_grid": [1.0, 0.1, 0.01]}]
    }
  ]
}"#;

const CONCENTRATION_SWEEP: &str = r#"{
  "schema": 1,
  "seed": 27182,
  "output": {"format": "json"},
  "suites": [
    {
      "model": {"kind": "birth_death", "n": 8, "beta": 1.0},
      "checks": [
        {"name": "concentration", "p_stars": [3, 4, 5, 6, 8, 10, 12],
         "chebyshev_ps": [3, 4, 6], "extra_random": 5}
      ]
    },
    {
      "model": {"kind": "rademacher", "n": 3, "d": 2, "coeff_seed": 909, "self_adjoint": true},
      "checks": [
        {"name": "concentration", "p_stars": [3, 4, 5, 6, 8, 10, 12],
         "chebyshev_ps": [3, 4, 6], "extra_random": 5}
      ]
    }
  ]
}"#;

const TALAGRAND_SWEEP: &str = r#"{
  "schema": 1,
  "seed": 16180,
  "output": {"format": "json"},
  "suites": [
    {"model": {"kind": "birth_death", "n": 4, "beta": 0.5},
     "checks": [{"name": "talagrand"}, {"name": "extremize_talagrand", "budget": 25}]},
    {"model": {"kind": "birth_death", "n": 8, "beta": 0.5},
     "checks": [{"name": "talagrand"}, {"name": "extremize_talagrand", "budget": 25}]},
    {"model": {"kind": "birth_death", "n": 12, "beta": 0.5},
     "checks": [{"name": "talagrand"}, {"name": "extremize_talagrand", "budget": 25}]},
    {"model": {"kind": "birth_death", "n": 16, "beta": 0.5},
     "checks": [{"name": "talagrand"}, {"name": "extremize_talagrand", "budget": 25}]},
    {"model": {"kind": "birth_death", "n": 20, "beta": 0.5},
     "checks": [{"name": "talagrand"}, {"name": "extremize_talagrand", "budget": 25}]},
    {"model": {"kind": "birth_death", "n": 4, "beta": 1.0},
     "checks": [{"name": "talagrand"}, {"name": "extremize_talagrand", "budget": 25}]},
    {"model": {"kind": "birth_death", "n": 8, "beta": 1.0},
     "checks": [{"name": "talagrand"}, {"name": "extremize_talagrand", "budget": 25}]},
    {"model": {"kind": "birth_death", "n": 12, "beta": 1.0},
     "checks": [{"name": "talagrand"}, {"name": "extremize_talagrand", "budget": 25}]},
    {"model": {"kind": "birth_death", "n": 16, "beta": 1.0},
     "checks": [{"name": "talagrand"}, {"name": "extremize_talagrand", "budget": 25}]},
    {"model": {"kind": "birth_death", "n": 20, "beta": 1.0},
     "checks": [{"name": "talagrand"}, {"name": "extremize_talagrand", "budget": 25}]}
  ]
}"#;
