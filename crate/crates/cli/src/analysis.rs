use std::path::PathBuf;

use clap::{Args, Subcommand};
use serde_json::json;

use seqnorm::classical::LpExponent;
use seqnorm::spreading::{basis_distance, domination_constant, growth_report, krivine_block_search, sm_estimate, Grid, DEFAULT_WINDOW};
use seqnorm::Result;

use crate::input;
use crate::report::{Ctx, Outcome};

#[derive(Subcommand)]
pub enum SmCmd {
    /// `‖Σ a_i e_{shift + gap·i}‖` over the given shifts and gaps.
    Estimate {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        a: String,
        #[arg(long, default_value = "[8,16,32,64]")]
        shifts: String,
        #[arg(long, default_value = "[1,2,3]")]
        gaps: String,
        #[arg(long, default_value_t = DEFAULT_WINDOW)]
        window: usize,
    },
    /// `g(n) = ‖Σ_{i≤n} x̃_i‖` for `n ≤ N`.
    Growth {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long = "N")]
        n: usize,
        /// Optional `λ_1 … λ_N` for the ratios `g(n)/λ_n`.
        #[arg(long)]
        lambda: Option<String>,
        #[arg(long, default_value_t = DEFAULT_WINDOW)]
        window: usize,
    },
}

pub fn sm(c: &SmCmd) -> Result<Outcome> {
    match c {
        SmCmd::Estimate { spec, a, shifts, gaps, window } => {
            let spec = input::read_spec(spec)?;
            let a = input::rationals(a)?;
            let (shifts, gaps) = (input::integers(shifts)?, input::integers(gaps)?);
            let r = sm_estimate(spec.oracle()?.as_ref(), &a, &shifts, &gaps, *window)?;
            Ok(Outcome::new(json!({"spec": spec, "window": window}), r))
        }
        SmCmd::Growth { spec, n, lambda, window } => {
            let spec = input::read_spec(spec)?;
            let lambda = lambda.as_deref().map(|l| input::lambda(l, *n)).transpose()?;
            let rows = growth_report(spec.oracle()?.as_ref(), *n, lambda.as_deref(), *window)?;
            Ok(Outcome::new(json!({"spec": spec, "N": n, "lambda": lambda, "window": window}), rows))
        }
    }
}

#[derive(Args)]
pub struct GridArgs {
    /// Seeded random sample points on top of units and sign vectors.
    #[arg(long, default_value_t = 200)]
    random: usize,
    /// Skip the `±1` sign vectors.
    #[arg(long)]
    no_signs: bool,
}

impl GridArgs {
    fn grid(&self, ctx: &Ctx) -> Grid {
        Grid { units: true, signs: !self.no_signs, random: self.random, seed: ctx.seed, extra: Vec::new() }
    }
}

#[derive(Args)]
pub struct PairArgs {
    /// The dominating norm.
    #[arg(long)]
    a: PathBuf,
    /// The dominated norm.
    #[arg(long)]
    b: PathBuf,
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    grid: GridArgs,
}

pub fn dominate(p: &PairArgs, ctx: &Ctx) -> Result<Outcome> {
    let (a, b) = (input::read_spec(&p.a)?, input::read_spec(&p.b)?);
    let grid = p.grid.grid(ctx);
    let r = domination_constant(a.oracle()?.as_ref(), b.oracle()?.as_ref(), p.n, &grid)?;
    Ok(Outcome::new(json!({"a": a, "b": b, "n": p.n, "grid": grid}), r))
}

pub fn dbasis(p: &PairArgs, ctx: &Ctx) -> Result<Outcome> {
    let (a, b) = (input::read_spec(&p.a)?, input::read_spec(&p.b)?);
    let grid = p.grid.grid(ctx);
    let r = basis_distance(a.oracle()?.as_ref(), b.oracle()?.as_ref(), p.n, &grid)?;
    Ok(Outcome::new(json!({"a": a, "b": b, "n": p.n, "grid": grid}), r))
}

#[derive(Args)]
pub struct KrivineArgs {
    #[arg(long)]
    spec: PathBuf,
    /// Target exponent, a rational or `inf`.
    #[arg(long, default_value = "1")]
    p: String,
    #[arg(long, default_value_t = 4)]
    n: usize,
    #[arg(long, default_value_t = 4)]
    m_max: usize,
    /// Maximum number of block candidates evaluated.
    #[arg(long, default_value_t = 200)]
    budget: usize,
    #[command(flatten)]
    grid: GridArgs,
}

pub fn krivine(k: &KrivineArgs, ctx: &Ctx) -> Result<Outcome> {
    let spec = input::read_spec(&k.spec)?;
    let p: LpExponent = k.p.parse()?;
    let grid = k.grid.grid(ctx);
    let r = krivine_block_search(&spec.oracle()?, &p, k.n, k.m_max, k.budget, &grid)?;
    let inputs = json!({"spec": spec, "p": k.p, "n": k.n, "m_max": k.m_max, "budget": k.budget, "grid": grid});
    Ok(Outcome::new(inputs, r))
}
