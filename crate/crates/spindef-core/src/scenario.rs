//! Scenario descriptions: which frame, metric, perturbation, and matter
//! field the check suite runs over, plus how chart points are sampled.
//!
//! Scenarios are declared in JSON (see [`ScenarioSpec`]) or taken from the
//! builtin set. A scenario is either orthonormal — the frame metric has the
//! constant canonical components and the full spin sector is available — or
//! coordinate-gauge, where the metric varies and spin-sector checks run on
//! an orthonormal companion frame with the perturbation pulled back onto it.

use serde::{Deserialize, Serialize};

use crate::deformation::Perturbation;
use crate::dirac_matter::{plane_wave, PhysicalConstants};
use crate::error::{Error, Result};
use crate::expr::{parse, Expr};
use crate::field::{ChartPoint, ComplexField, MatrixField, ScalarField, SpinorField};
use crate::frame_geometry::FrameField;
use crate::linalg::DIM;
use crate::rng::SplitMix64;
use crate::spin_algebra::constants;
use crate::tolerances::EPS_LADDER;

/// Frame declaration: the holonomic chart frame or sixteen coefficient
/// expressions `e_i^mu` in row-major order (row `i` = frame leg).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FrameSpec {
    Coordinate,
    Expressions { coefficients: [[String; 4]; 4] },
}

/// Metric declaration: constant canonical components over an orthonormal
/// frame, or sixteen component expressions `g_{ij}` in the declared frame.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MetricSpec {
    OrthonormalConstant,
    CoordinateExpressions { components: [[String; 4]; 4] },
}

/// Perturbation declaration: symmetric component expressions with the
/// deformation size and an optional ladder of sizes for convergence fits.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSpec {
    pub components: [[String; 4]; 4],
    pub eps: f64,
    #[serde(default)]
    pub eps_ladder: Option<Vec<f64>>,
}

/// Matter field declaration: a plane-wave solution (flat orthonormal
/// scenarios only) or four complex components given as expression pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SpinorSpec {
    PlaneWave { momentum: [f64; 3], branch: usize },
    Expressions { re: [String; 4], im: [String; 4] },
}

/// Unit system declaration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsSpec {
    pub units: UnitsSpec,
    #[serde(default)]
    pub mass: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnitsSpec {
    Cgs,
    Natural,
}

/// Chart sampling: explicit points or a seeded uniform draw over the
/// domain box.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SamplingSpec {
    Points { points: Vec<[f64; 4]> },
    Random { count: usize, seed: u64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub lo: [f64; 4],
    pub hi: [f64; 4],
}

/// Serializable scenario description.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub domain: DomainSpec,
    pub frame: FrameSpec,
    pub metric: MetricSpec,
    /// Orthonormal companion frame coefficients for coordinate-gauge
    /// scenarios; spin-sector checks run in its gauge.
    #[serde(default)]
    pub companion_frame: Option<[[String; 4]; 4]>,
    #[serde(default)]
    pub perturbation: Option<PerturbationSpec>,
    #[serde(default)]
    pub spinor: Option<SpinorSpec>,
    pub constants: ConstantsSpec,
    pub sampling: SamplingSpec,
}

/// A scenario compiled into evaluable fields.
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub domain_lo: [f64; 4],
    pub domain_hi: [f64; 4],
    pub frame: FrameField,
    /// True when the frame is the holonomic chart frame, whose commutation
    /// coefficients must vanish.
    pub holonomic: bool,
    /// Metric components in the gauge of `frame`.
    pub metric: MatrixField,
    /// True when the metric is the constant canonical one, making the full
    /// spin sector available in the frame itself.
    pub orthonormal: bool,
    /// Orthonormal companion frame for coordinate-gauge scenarios.
    pub companion: Option<FrameField>,
    pub perturbation: Option<Perturbation>,
    pub eps_ladder: Vec<f64>,
    pub spinor: Option<SpinorField>,
    /// True when the spinor is a plane-wave solution, enabling the
    /// on-shell checks.
    pub spinor_on_shell: bool,
    pub physical: PhysicalConstants,
    pub sampling: SamplingSpec,
}

fn parse_grid(entries: &[[String; 4]; 4], what: &str) -> Result<[[Expr; 4]; 4]> {
    let mut out: Vec<Expr> = Vec::with_capacity(16);
    for (i, row) in entries.iter().enumerate() {
        for (j, src) in row.iter().enumerate() {
            out.push(
                parse(src)
                    .map_err(|e| Error::invalid(format!("{what} entry ({i},{j}) {src:?}: {e}")))?,
            );
        }
    }
    let mut it = out.into_iter();
    Ok(std::array::from_fn(|_| {
        std::array::from_fn(|_| it.next().expect("sixteen entries"))
    }))
}

fn matrix_field_from_exprs(exprs: &[[Expr; 4]; 4]) -> MatrixField {
    MatrixField::from_fn(|i, j| ScalarField::from_expr(&exprs[i][j]))
}

impl Scenario {
    /// Compiles a spec, validating expressions and cross-field constraints.
    pub fn from_spec(spec: &ScenarioSpec) -> Result<Scenario> {
        for mu in 0..DIM {
            if !(spec.domain.lo[mu] < spec.domain.hi[mu]) {
                return Err(Error::invalid(format!(
                    "domain must satisfy lo < hi in coordinate {mu}"
                )));
            }
        }

        let holonomic = matches!(spec.frame, FrameSpec::Coordinate);
        let frame = match &spec.frame {
            FrameSpec::Coordinate => FrameField::coordinate(),
            FrameSpec::Expressions { coefficients } => {
                FrameField::from_exprs(&parse_grid(coefficients, "frame")?, &spec.name)
            }
        };

        let (metric, orthonormal) = match &spec.metric {
            MetricSpec::OrthonormalConstant => (MatrixField::constant(constants().metric), true),
            MetricSpec::CoordinateExpressions { components } => (
                matrix_field_from_exprs(&parse_grid(components, "metric")?),
                false,
            ),
        };

        let companion = match &spec.companion_frame {
            Some(coeffs) => Some(FrameField::from_exprs(
                &parse_grid(coeffs, "companion frame")?,
                format!("{}-companion", spec.name),
            )),
            None => None,
        };
        if !orthonormal && companion.is_none() {
            return Err(Error::invalid(
                "coordinate-gauge scenarios need a companion frame for the spin sector",
            ));
        }

        let physical = match spec.constants.units {
            UnitsSpec::Cgs => PhysicalConstants::cgs_electron(),
            UnitsSpec::Natural => PhysicalConstants::natural(),
        };
        let physical = match spec.constants.mass {
            Some(m) if m > 0.0 => physical.with_mass(m),
            Some(_) => return Err(Error::invalid("mass must be positive")),
            None => physical,
        };

        let (perturbation, eps_ladder) = match &spec.perturbation {
            Some(ps) => {
                if !(ps.eps > 0.0) {
                    return Err(Error::invalid("perturbation eps must be positive"));
                }
                let h = matrix_field_from_exprs(&parse_grid(&ps.components, "perturbation")?);
                let ladder = match &ps.eps_ladder {
                    Some(l) if l.iter().all(|&e| e > 0.0) && l.len() >= 2 => l.clone(),
                    Some(_) => {
                        return Err(Error::invalid(
                            "eps ladder needs at least two positive sizes",
                        ))
                    }
                    None => EPS_LADDER.to_vec(),
                };
                (Some(Perturbation::new(h, ps.eps)), ladder)
            }
            None => (None, EPS_LADDER.to_vec()),
        };

        if spec.spinor.is_some() && !orthonormal {
            return Err(Error::invalid("matter fields need an orthonormal scenario"));
        }
        let (spinor, spinor_on_shell) = match &spec.spinor {
            Some(SpinorSpec::PlaneWave { momentum, branch }) => {
                (Some(plane_wave(*momentum, &physical, *branch)?), true)
            }
            Some(SpinorSpec::Expressions { re, im }) => {
                let mut comps: Vec<ComplexField> = Vec::with_capacity(4);
                for a in 0..DIM {
                    let re_e = parse(&re[a])
                        .map_err(|e| Error::invalid(format!("spinor re[{a}] {:?}: {e}", re[a])))?;
                    let im_e = parse(&im[a])
                        .map_err(|e| Error::invalid(format!("spinor im[{a}] {:?}: {e}", im[a])))?;
                    comps.push(ComplexField::from_parts(
                        &ScalarField::from_expr(&re_e),
                        &ScalarField::from_expr(&im_e),
                    ));
                }
                let mut it = comps.into_iter();
                (
                    Some(SpinorField::from_fn(|_| {
                        it.next().expect("four components")
                    })),
                    false,
                )
            }
            None => (None, false),
        };

        match &spec.sampling {
            SamplingSpec::Points { points } if points.is_empty() => {
                return Err(Error::invalid("sampling needs at least one point"));
            }
            SamplingSpec::Random { count, .. } if *count == 0 => {
                return Err(Error::invalid("sampling needs at least one point"));
            }
            _ => {}
        }

        Ok(Scenario {
            name: spec.name.clone(),
            description: spec.description.clone(),
            domain_lo: spec.domain.lo,
            domain_hi: spec.domain.hi,
            frame,
            holonomic,
            metric,
            orthonormal,
            companion,
            perturbation,
            eps_ladder,
            spinor,
            spinor_on_shell,
            physical,
            sampling: spec.sampling.clone(),
        })
    }

    /// Parses and compiles a JSON spec.
    pub fn from_json(src: &str) -> Result<Scenario> {
        let spec: ScenarioSpec =
            serde_json::from_str(src).map_err(|e| Error::invalid(format!("scenario JSON: {e}")))?;
        Scenario::from_spec(&spec)
    }

    pub fn builtin_names() -> [&'static str; 3] {
        ["flat-holonomic", "exp-scale-frame", "conformal-coordinate"]
    }

    /// One of the builtin scenarios by name.
    pub fn builtin(name: &str) -> Result<Scenario> {
        let spec = match name {
            "flat-holonomic" => builtin_flat_holonomic(),
            "exp-scale-frame" => builtin_exp_scale_frame(),
            "conformal-coordinate" => builtin_conformal_coordinate(),
            other => {
                return Err(Error::invalid(format!(
                    "unknown scenario {other:?}; builtins are {:?}",
                    Scenario::builtin_names()
                )))
            }
        };
        Scenario::from_spec(&spec)
    }

    /// The builtin spec by name, for serialization and examples.
    pub fn builtin_spec(name: &str) -> Result<ScenarioSpec> {
        match name {
            "flat-holonomic" => Ok(builtin_flat_holonomic()),
            "exp-scale-frame" => Ok(builtin_exp_scale_frame()),
            "conformal-coordinate" => Ok(builtin_conformal_coordinate()),
            other => Err(Error::invalid(format!(
                "unknown scenario {other:?}; builtins are {:?}",
                Scenario::builtin_names()
            ))),
        }
    }

    /// Deterministic chart points of the scenario's sampling plan.
    pub fn sample_points(&self) -> Vec<ChartPoint> {
        match &self.sampling {
            SamplingSpec::Points { points } => points.clone(),
            SamplingSpec::Random { count, seed } => {
                let mut rng = SplitMix64::new(*seed);
                (0..*count)
                    .map(|_| {
                        std::array::from_fn(|mu| {
                            rng.uniform(self.domain_lo[mu], self.domain_hi[mu])
                        })
                    })
                    .collect()
            }
        }
    }

    /// Seed of the sampling plan (0 for explicit point lists).
    pub fn seed(&self) -> u64 {
        match &self.sampling {
            SamplingSpec::Points { .. } => 0,
            SamplingSpec::Random { seed, .. } => *seed,
        }
    }
}

fn grid(entries: [[&str; 4]; 4]) -> [[String; 4]; 4] {
    entries.map(|row| row.map(str::to_owned))
}

fn diagonal_grid(diag: [&str; 4]) -> [[String; 4]; 4] {
    let mut out = grid([["0"; 4]; 4]);
    for (i, d) in diag.into_iter().enumerate() {
        out[i][i] = d.to_owned();
    }
    out
}

fn builtin_perturbation() -> PerturbationSpec {
    PerturbationSpec {
        components: grid([
            [
                "0.2*sin(x1)+0.1",
                "0.1*cos(x2)",
                "0.05*sin(x0+x3)",
                "0.08*cos(x1)",
            ],
            [
                "0.1*cos(x2)",
                "0.15*cos(x0)",
                "0.07*sin(x2)",
                "0.04*sin(x3)",
            ],
            [
                "0.05*sin(x0+x3)",
                "0.07*sin(x2)",
                "0.12*sin(x0)+0.05",
                "0.06*cos(x0+x1)",
            ],
            [
                "0.08*cos(x1)",
                "0.04*sin(x3)",
                "0.06*cos(x0+x1)",
                "0.1*cos(x2)+0.02",
            ],
        ]),
        eps: 1e-3,
        eps_ladder: None,
    }
}

fn exp_scale_coefficients() -> [[String; 4]; 4] {
    diagonal_grid(["1", "exp(-x0)", "exp(-x0)", "exp(-x0)"])
}

fn builtin_flat_holonomic() -> ScenarioSpec {
    ScenarioSpec {
        name: "flat-holonomic".to_owned(),
        description: "Holonomic chart frame with the constant canonical metric and a \
                      plane-wave matter field at electron scale in CGS units."
            .to_owned(),
        domain: DomainSpec {
            lo: [-1.0; 4],
            hi: [1.0; 4],
        },
        frame: FrameSpec::Coordinate,
        metric: MetricSpec::OrthonormalConstant,
        companion_frame: None,
        perturbation: Some(builtin_perturbation()),
        spinor: Some(SpinorSpec::PlaneWave {
            momentum: [1.2e-17, -0.8e-17, 0.5e-17],
            branch: 0,
        }),
        constants: ConstantsSpec {
            units: UnitsSpec::Cgs,
            mass: None,
        },
        sampling: SamplingSpec::Random { count: 8, seed: 11 },
    }
}

fn builtin_exp_scale_frame() -> ScenarioSpec {
    ScenarioSpec {
        name: "exp-scale-frame".to_owned(),
        description: "Orthonormal frame with exponentially scaled spatial legs, an \
                      expression matter field, and geometrized units."
            .to_owned(),
        domain: DomainSpec {
            lo: [-0.8; 4],
            hi: [0.8; 4],
        },
        frame: FrameSpec::Expressions {
            coefficients: exp_scale_coefficients(),
        },
        metric: MetricSpec::OrthonormalConstant,
        companion_frame: None,
        perturbation: Some(builtin_perturbation()),
        spinor: Some(SpinorSpec::Expressions {
            re: [
                "0.8*cos(x1)".to_owned(),
                "0.5*sin(x2)".to_owned(),
                "0.3+0.2*sin(x3)".to_owned(),
                "0.4*cos(x3)".to_owned(),
            ],
            im: [
                "0.2*sin(x0)".to_owned(),
                "0.6*cos(x0)".to_owned(),
                "0.5*cos(x2)".to_owned(),
                "0.1*sin(x1)".to_owned(),
            ],
        }),
        constants: ConstantsSpec {
            units: UnitsSpec::Natural,
            mass: None,
        },
        sampling: SamplingSpec::Random {
            count: 20,
            seed: 42,
        },
    }
}

fn builtin_conformal_coordinate() -> ScenarioSpec {
    ScenarioSpec {
        name: "conformal-coordinate".to_owned(),
        description: "Holonomic chart frame with a time-scaled spatial metric; the \
                      exponentially scaled frame serves as the orthonormal companion."
            .to_owned(),
        domain: DomainSpec {
            lo: [-0.8; 4],
            hi: [0.8; 4],
        },
        frame: FrameSpec::Coordinate,
        metric: MetricSpec::CoordinateExpressions {
            components: diagonal_grid(["1", "-exp(2*x0)", "-exp(2*x0)", "-exp(2*x0)"]),
        },
        companion_frame: Some(exp_scale_coefficients()),
        perturbation: Some(builtin_perturbation()),
        spinor: None,
        constants: ConstantsSpec {
            units: UnitsSpec::Natural,
            mass: None,
        },
        sampling: SamplingSpec::Random { count: 12, seed: 7 },
    }
}
