use std::path::PathBuf;

use clap::{Args, Subcommand};
use serde_json::json;

use seqnorm::implicit::{eq1_report, growth_sequence, x_seminorm, XSpaceSpec};
use seqnorm::roots::default_width;
use seqnorm::spaces::SpaceSpec;
use seqnorm::tree::{branch_denominators, branch_weights, bush_seminorm, code_to_branch, eq23_threshold, node_threshold};
use seqnorm::{Error, Result};

use crate::input;
use crate::report::{to_value, Ctx, Outcome, Recheck};

#[derive(Args)]
pub struct NormArgs {
    #[arg(long)]
    spec: PathBuf,
    /// `[[i, "p/q"], …]`, `{"entries": …}`, or `@file`.
    #[arg(long)]
    vec: String,
}

pub fn norm(a: &NormArgs, ctx: &Ctx) -> Result<Outcome> {
    let spec = input::read_spec(&a.spec)?;
    let x = input::seq_vector(&a.vec)?;
    let eval = spec.evaluate(&x)?;
    let mut rc = Recheck::default();
    if let (Some(w), Some(v)) = (&eval.witness, eval.value.exact_value()) {
        rc.check(ctx, v, || spec.recheck(&x, w))?;
    }
    let result = json!({
        "value": eval.value.exact_value(),
        "enclosure": eval.value,
        "witness": eval.witness,
    });
    Ok(Outcome::new(json!({"spec": spec, "vector": x}), result).rechecked(rc))
}

#[derive(Subcommand)]
pub enum SeminormCmd {
    /// `‖x‖_i = sup_{E_1 < … < E_{n_i}} Σ ‖E_j x‖` in X.
    X {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        vec: String,
        #[arg(long)]
        i: u64,
    },
    /// `‖x‖_{k,bush}` for a tree vector.
    Bush {
        /// Keyed by `[level, index]` or by tree basis position.
        #[arg(long)]
        vec: String,
        /// `[[s, t], …]` with nodes `[level, index]`.
        #[arg(long)]
        bush: String,
        #[arg(long, default_value_t = 0)]
        k: usize,
    },
}

fn x_spec(spec: SpaceSpec) -> Result<XSpaceSpec> {
    match spec {
        SpaceSpec::SpaceX { n, theta } => Ok(XSpaceSpec { n, theta }),
        _ => Err(Error::Invalid("expected a space_x spec".into())),
    }
}

pub fn seminorm(c: &SeminormCmd, ctx: &Ctx) -> Result<Outcome> {
    let mut rc = Recheck::default();
    match c {
        SeminormCmd::X { spec, vec, i } => {
            let spec = x_spec(input::read_spec(spec)?)?;
            let x = input::seq_vector(vec)?;
            let r = x_seminorm(&spec, &x, *i)?;
            rc.check(ctx, &r.value, || r.witness.evaluate(&spec, &x))?;
            Ok(Outcome::new(json!({"spec": spec, "vector": x, "i": i}), r).rechecked(rc))
        }
        SeminormCmd::Bush { vec, bush, k } => {
            let x = input::tree_vector_arg(vec)?;
            let bush = input::bush(bush)?;
            let (value, witness) = bush_seminorm(&x, *k, &bush)?;
            rc.check(ctx, &value, || witness.evaluate(&x, *k, &bush))?;
            let result = json!({"value": value, "witness": witness});
            Ok(Outcome::new(json!({"vector": x, "bush": bush, "k": k}), result).rechecked(rc))
        }
    }
}

#[derive(Subcommand)]
pub enum TreeCmd {
    /// The weights `w^(b')_1 … w^(b')_m`.
    Weights {
        /// `[2,3,2]` or `{"entries": […], "terminated": false}`.
        #[arg(long)]
        code: String,
        #[arg(long)]
        m: usize,
    },
    /// Branch nodes of a code down to a level.
    Branch {
        #[arg(long)]
        code: String,
        #[arg(long)]
        depth: u32,
    },
    /// Thresholds after which the first `m` weights are fixed.
    Threshold {
        #[arg(long)]
        code: String,
        #[arg(long)]
        m: usize,
    },
    /// Whether node pairs form a bush, or the first violated condition.
    Bush {
        #[arg(long)]
        bush: String,
    },
}

pub fn tree(c: &TreeCmd, _ctx: &Ctx) -> Result<Outcome> {
    match c {
        TreeCmd::Weights { code, m } => {
            let code = input::code(code)?;
            let result = json!({
                "weights": branch_weights(&code, *m)?,
                "denominators": branch_denominators(&code, *m)?,
            });
            Ok(Outcome::new(json!({"code": code, "m": m}), result))
        }
        TreeCmd::Branch { code, depth } => {
            let code = input::code(code)?;
            Ok(Outcome::new(json!({"code": code, "depth": depth}), code_to_branch(&code, *depth)?))
        }
        TreeCmd::Threshold { code, m } => {
            let code = input::code(code)?;
            let result = json!({"positions": eq23_threshold(&code, *m)?, "level": node_threshold(&code, *m)?});
            Ok(Outcome::new(json!({"code": code, "m": m}), result))
        }
        TreeCmd::Bush { bush } => {
            let bush = input::bush(bush)?;
            let violation = bush.check().err();
            Ok(Outcome::new(to_value(&bush), json!({"is_bush": violation.is_none(), "violation": violation})))
        }
    }
}

#[derive(Subcommand)]
pub enum Eq1Cmd {
    /// `(n_1 + … + n_k)^{-1/p} Σ_{i≤k} n_i 3^{-i}` for each prefix.
    Report {
        #[arg(long)]
        n: String,
        #[arg(long)]
        p: String,
    },
    /// The inductive choice of `n_1 < n_2 < …` with `p_k = 1 + 1/k`.
    Sequence {
        #[arg(long)]
        k: usize,
    },
}

pub fn eq1(c: &Eq1Cmd) -> Result<Outcome> {
    match c {
        Eq1Cmd::Report { n, p } => {
            let n = input::integers(n)?;
            let p = input::rational(p)?;
            let values = eq1_report(&n, &p, &default_width())?;
            Ok(Outcome::new(json!({"n": n, "p": p}), values))
        }
        Eq1Cmd::Sequence { k } => Ok(Outcome::new(json!({"k": k}), growth_sequence(*k, &default_width())?)),
    }
}
