//! Resolves the `[problem]` section into an oracle, input law and thresholds.

use std::time::Duration;

use krigrisk::bench::BuiltinProblem;
use krigrisk::mc::InputModel;
use krigrisk::Oracle;

use crate::config::{input_model, ProblemConfig};
use crate::error::CliError;
use crate::external::CommandOracle;

#[derive(Debug, Clone)]
enum Source {
    Builtin(BuiltinProblem),
    Command { argv: Vec<String>, timeout: Duration },
}

/// Validated problem; the oracle is only started by [`Problem::oracle`].
#[derive(Debug, Clone)]
pub struct Problem {
    source: Source,
    pub model: InputModel,
    pub thresholds: Vec<f64>,
    pub responses: usize,
}

impl Problem {
    pub fn resolve(cfg: &ProblemConfig) -> Result<Self, CliError> {
        let p = match (&cfg.builtin, &cfg.command) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config("give either problem.builtin or problem.command".into()))
            }
            (None, None) => return Err(CliError::Config("no problem defined".into())),
            (Some(name), None) => {
                let b = BuiltinProblem::from_name(name)
                    .ok_or_else(|| CliError::Config(format!("unknown built-in problem {name:?}")))?;
                let model = match &cfg.inputs {
                    Some(specs) => input_model(specs)?,
                    None => b.model(),
                };
                Problem {
                    source: Source::Builtin(b),
                    model,
                    thresholds: cfg.thresholds.clone().unwrap_or_else(|| b.thresholds()),
                    responses: b.responses(),
                }
            }
            (None, Some(argv)) => {
                if argv.is_empty() {
                    return Err(CliError::Config("problem.command is empty".into()));
                }
                if !(cfg.timeout_secs > 0.0 && cfg.timeout_secs.is_finite()) {
                    return Err(CliError::Config("problem.timeout_secs must be positive".into()));
                }
                let specs = cfg
                    .inputs
                    .as_ref()
                    .ok_or_else(|| CliError::Config("problem.inputs is required for a command".into()))?;
                let thresholds = cfg
                    .thresholds
                    .clone()
                    .ok_or_else(|| CliError::Config("problem.thresholds is required for a command".into()))?;
                Problem {
                    source: Source::Command {
                        argv: argv.clone(),
                        timeout: Duration::from_secs_f64(cfg.timeout_secs),
                    },
                    model: input_model(specs)?,
                    responses: cfg.responses.unwrap_or(thresholds.len()),
                    thresholds,
                }
            }
        };
        if p.responses == 0 {
            return Err(CliError::Config("at least one response is required".into()));
        }
        if p.thresholds.len() != p.responses {
            return Err(CliError::Config(format!(
                "{} thresholds for {} responses",
                p.thresholds.len(),
                p.responses
            )));
        }
        if p.thresholds.iter().any(|t| !t.is_finite()) {
            return Err(CliError::Config("thresholds must be finite".into()));
        }
        if let Source::Builtin(b) = p.source {
            if p.model.dim() != b.dim() {
                return Err(CliError::Config(format!(
                    "{} inputs given, {} expects {}",
                    p.model.dim(),
                    b.name(),
                    b.dim()
                )));
            }
        }
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    pub fn oracle(&self) -> Result<Box<dyn Oracle + Send>, CliError> {
        Ok(match &self.source {
            Source::Builtin(b) => b.oracle(),
            Source::Command { argv, timeout } => {
                Box::new(CommandOracle::spawn(argv, self.dim(), self.responses, *timeout)?)
            }
        })
    }
}
