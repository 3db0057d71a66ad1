use serde::Serialize;
use serde_json::Value;

use seqnorm::{Rational, Result};

/// Global flags every command sees.
pub struct Ctx {
    pub seed: u64,
    pub recheck: bool,
}

/// Counts of witnesses re-evaluated under `--recheck`.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Recheck {
    pub witnesses: usize,
    pub mismatches: usize,
}

impl Recheck {
    /// Re-evaluates one witness when rechecking is on.
    pub fn check(&mut self, ctx: &Ctx, reported: &Rational, eval: impl FnOnce() -> Result<Rational>) -> Result<()> {
        if ctx.recheck {
            self.witnesses += 1;
            match eval() {
                Ok(v) if v == *reported => {}
                Ok(_) | Err(seqnorm::Error::Witness(_)) => self.mismatches += 1,
                Err(e) => return Err(e),
            }
        }
        Ok(())
    }
}

/// What a command hands back before the shared envelope is added.
pub struct Outcome {
    pub inputs: Value,
    pub result: Value,
    /// `None` for plain evaluations, otherwise whether every instance held.
    pub passed: Option<bool>,
    pub recheck: Recheck,
}

impl Outcome {
    pub fn new(inputs: Value, result: impl Serialize) -> Self {
        Outcome { inputs, result: to_value(result), passed: None, recheck: Recheck::default() }
    }

    pub fn passed(mut self, passed: bool) -> Self {
        self.passed = Some(passed);
        self
    }

    pub fn rechecked(mut self, recheck: Recheck) -> Self {
        self.recheck = recheck;
        self
    }

    pub fn ok(&self) -> bool {
        self.passed != Some(false) && self.recheck.mismatches == 0
    }
}

pub fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

#[derive(Serialize)]
pub struct Report {
    pub command: Vec<String>,
    pub inputs: Value,
    pub result: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub passed: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recheck: Option<Recheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u128>,
}
