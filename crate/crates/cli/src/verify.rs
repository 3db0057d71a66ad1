use std::path::PathBuf;

use clap::{Args, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use seqnorm::implicit::{block_average_check, ladder_sum, random_normalized_blocks, x_norm, XSpaceSpec};
use seqnorm::operators::{apply_t, build_kriv_vectors, host_norm, random_double_vector, sandwich_bounds, GeneratorSpec, ModelSpace};
use seqnorm::spaces::SpaceSpec;
use seqnorm::tree::{eq22_builder, eq24_check, chain_split};
use seqnorm::{Error, Rational, Result, SeqVector};

use crate::input;
use crate::report::{Ctx, Outcome, Recheck};

#[derive(Subcommand)]
pub enum VerifyCmd {
    /// Block averages: `‖(1/N) Σ x_s‖_i ≤ 1 + min(1, 2n_i/N)`.
    Eq3a {
        #[arg(long)]
        spec: PathBuf,
        /// Block counts, e.g. `[4,8,16]`.
        #[arg(long = "N", default_value = "[4,8,16]")]
        n: String,
        #[arg(long, default_value = "[1,2,3]")]
        levels: String,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 2)]
        block_len: u64,
    },
    /// `‖x‖ ≥ Σ_{i≤k} θ_i ‖x‖_i` for random `x` supported in `[k, ∞)`.
    LowerBound {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 5)]
        kmax: u64,
        #[arg(long, default_value_t = 5)]
        width: u64,
    },
    /// `Σ_{i≤k} θ_i ‖[k,∞)x‖_i > 24/25` for a supplied vector.
    Ladder {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        vec: String,
        #[arg(long)]
        k: u64,
    },
    /// `Σ_{K1<i≤K2} θ_i ‖[K2,∞)w‖_i > 2/5` for a supplied vector.
    LayerMass {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        vec: String,
        #[arg(long)]
        k1: u64,
        #[arg(long)]
        k2: u64,
    },
    /// `‖Σ e_{t_k}‖ ≤ Σ_{k≤m} w_k + 1` for branch nodes below the threshold.
    Eq24 {
        #[arg(long)]
        code: String,
        #[arg(long)]
        m: usize,
        /// Explicit node levels, otherwise the `m` levels below the threshold.
        #[arg(long)]
        levels: Option<String>,
    },
    /// Slowly growing weights: `Σ_{n≤k} w_n / λ_k ≤ 1/k` at `k = n_1`.
    Eq22 {
        /// `linear` for `λ_k = k`, or an explicit list.
        #[arg(long, default_value = "linear")]
        lambda: String,
        #[arg(long, default_value_t = 1000)]
        horizon: usize,
        #[arg(long, default_value_t = 20)]
        kmax: usize,
    },
    /// `max_ℓ ‖A^ℓ‖_ℓ ≤ ‖A‖ ≤ Σ_ℓ ‖A^ℓ‖_{ℓ+1}` on random double vectors.
    Sandwich34 {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
    },
    /// `‖TA‖ ≤ ‖A‖` on random double vectors.
    Contraction {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
    },
    /// Splitting an optimal chain of a tree vector after `K` pairs.
    Split {
        #[arg(long)]
        vec: String,
        #[arg(long)]
        k: usize,
    },
    /// `sup_n (1/9) δ_n ‖a‖_{ℓ_1(𝓖_n)} ≤ ‖y + Σ a_j y_j‖` for unit-block generators.
    Kriv(KrivArgs),
}

#[derive(Args)]
pub struct KrivArgs {
    #[arg(long)]
    host: PathBuf,
    #[arg(long)]
    delta: String,
    #[arg(long = "M")]
    m: String,
    #[arg(long)]
    a: String,
    #[arg(long, default_value_t = 1)]
    block_len: u64,
}

fn x_spec(path: &PathBuf) -> Result<XSpaceSpec> {
    match input::read_spec(path)? {
        SpaceSpec::SpaceX { n, theta } => Ok(XSpaceSpec { n, theta }),
        _ => Err(Error::Invalid("expected a space_x spec".into())),
    }
}

/// Tracks violations and the tightest instance across many trials.
#[derive(Default)]
struct Tally {
    instances: usize,
    violations: usize,
    min_margin: Option<Rational>,
    tightest: Value,
}

impl Tally {
    fn record(&mut self, margin: Rational, holds: bool, detail: impl FnOnce() -> Value) {
        self.instances += 1;
        if !holds {
            self.violations += 1;
        }
        if self.min_margin.as_ref().is_none_or(|m| margin < *m) {
            self.min_margin = Some(margin);
            self.tightest = detail();
        }
    }

    fn outcome(self, inputs: Value, rc: Recheck) -> Outcome {
        let passed = self.violations == 0;
        let result = json!({
            "instances": self.instances,
            "violations": self.violations,
            "min_margin": self.min_margin,
            "tightest": self.tightest,
        });
        Outcome::new(inputs, result).passed(passed).rechecked(rc)
    }
}

pub fn run(c: &VerifyCmd, ctx: &Ctx) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mut rc = Recheck::default();
    match c {
        VerifyCmd::Eq3a { spec, n, levels, trials, block_len } => {
            let spec = x_spec(spec)?;
            let counts = input::integers(n)?;
            let levels = input::integers(levels)?;
            let mut tally = Tally::default();
            for &i in &levels {
                for &count in &counts {
                    for trial in 0..*trials {
                        let blocks = random_normalized_blocks(&spec, &mut rng, count as usize, 1, *block_len)?;
                        let r = block_average_check(&spec, &blocks, i)?;
                        let avg = blocks.iter().fold(SeqVector::zero(), |acc, b| acc.add(b)).scale(&Rational::from(count).recip());
                        rc.check(ctx, &r.value, || r.witness.evaluate(&spec, &avg))?;
                        let margin = &r.bound - &r.value;
                        tally.record(margin, r.holds, || json!({"i": i, "N": count, "trial": trial, "value": r.value, "bound": r.bound}));
                    }
                }
            }
            let inputs = json!({"spec": spec, "N": counts, "levels": levels, "trials": trials, "block_len": block_len});
            Ok(tally.outcome(inputs, rc))
        }
        VerifyCmd::LowerBound { spec, trials, kmax, width } => {
            let spec = x_spec(spec)?;
            let mut tally = Tally::default();
            for trial in 0..*trials {
                let k = rng.gen_range(1..=*kmax);
                let len = rng.gen_range(1..=*width);
                let x = SeqVector::from_pairs((k..k + len).map(|i| (i, Rational::new(rng.gen_range(-4i64..=4), rng.gen_range(1i64..=3)))));
                let norm = x_norm(&spec, &x)?;
                rc.check(ctx, &norm.value, || norm.witness.evaluate(&spec, &x))?;
                let lower = ladder_sum(&spec, &x, k, 1, k)?;
                let margin = &norm.value - &lower;
                tally.record(margin, lower <= norm.value, || json!({"trial": trial, "k": k, "x": x, "norm": norm.value, "lower": lower}));
            }
            Ok(tally.outcome(json!({"spec": spec, "trials": trials, "kmax": kmax, "width": width}), rc))
        }
        VerifyCmd::Ladder { spec, vec, k } => {
            let spec = x_spec(spec)?;
            let x = input::seq_vector(vec)?;
            let value = ladder_sum(&spec, &x, *k, 1, *k)?;
            threshold_outcome(json!({"spec": spec, "vector": x, "k": k}), value, Rational::new(24, 25))
        }
        VerifyCmd::LayerMass { spec, vec, k1, k2 } => {
            if k2 <= k1 {
                return Err(Error::Invalid("need K2 > K1".into()));
            }
            let spec = x_spec(spec)?;
            let x = input::seq_vector(vec)?;
            let value = ladder_sum(&spec, &x, *k2, k1 + 1, *k2)?;
            threshold_outcome(json!({"spec": spec, "vector": x, "k1": k1, "k2": k2}), value, Rational::new(2, 5))
        }
        VerifyCmd::Eq24 { code, m, levels } => {
            let code = input::code(code)?;
            let levels: Option<Vec<u32>> = levels
                .as_deref()
                .map(|l| input::integers(l).map(|v| v.into_iter().map(|x| x as u32).collect()))
                .transpose()?;
            let r = eq24_check(&code, *m, levels.as_deref())?;
            let x = seqnorm::tree::TreeVector::from_pairs(r.nodes.iter().map(|&t| (t, Rational::one())));
            rc.check(ctx, &r.norm, || r.witness.evaluate(&x))?;
            let holds = r.holds;
            Ok(Outcome::new(json!({"code": code, "m": m, "levels": levels}), r).passed(holds).rechecked(rc))
        }
        VerifyCmd::Eq22 { lambda, horizon, kmax } => {
            let lambda = input::lambda(lambda, *horizon)?;
            let table = eq22_builder(&lambda, *kmax)?;
            let n1 = table.ns[0] as usize;
            let rows: Vec<Value> = table
                .ratios
                .iter()
                .map(|(k, r)| json!({"k": k, "ratio": r, "within_1_over_k": *r <= Rational::new(1, *k as i64)}))
                .collect();
            let at_n1 = table.ratios.iter().find(|(k, _)| *k == n1).map(|(_, r)| r.clone());
            let passed = at_n1.as_ref().is_some_and(|r| *r <= Rational::new(1, n1 as i64));
            let result = json!({"ns": table.ns, "code": table.code, "rows": rows, "n1": n1, "ratio_at_n1": at_n1});
            Ok(Outcome::new(json!({"horizon": lambda.len(), "kmax": kmax}), result).passed(passed))
        }
        VerifyCmd::Sandwich34 { model, trials } => {
            let space = input::read_model(model)?;
            let mut tally = Tally::default();
            for trial in 0..*trials {
                let a = random_double_vector(&mut rng, space.rows(), 8, 6);
                let (host, wit) = host_norm(&space, &a)?;
                if let Some(w) = &wit {
                    rc.check(ctx, &host, || w.evaluate(&space, &a))?;
                }
                let (lower, upper) = sandwich_bounds(&space, &a)?;
                let holds = lower <= host && host <= upper;
                let margin = (&host - &lower).min(&upper - &host);
                tally.record(margin, holds, || json!({"trial": trial, "a": a, "lower": lower, "host": host, "upper": upper}));
            }
            Ok(tally.outcome(json!({"model": space, "trials": trials}), rc))
        }
        VerifyCmd::Contraction { model, trials } => {
            let space = input::read_model(model)?;
            let mut tally = Tally::default();
            for trial in 0..*trials {
                let a = random_double_vector(&mut rng, space.rows(), 8, 6);
                let before = host_checked(&space, &a, ctx, &mut rc)?;
                let ta = apply_t(&a);
                let after = host_checked(&space, &ta, ctx, &mut rc)?;
                let margin = &before - &after;
                tally.record(margin, after <= before, || json!({"trial": trial, "a": a, "norm": before, "norm_ta": after}));
            }
            Ok(tally.outcome(json!({"model": space, "trials": trials}), rc))
        }
        VerifyCmd::Split { vec, k } => {
            let x = input::tree_vector_arg(vec)?;
            let r = chain_split(&x, *k)?;
            let passed = !r.hypothesis || r.holds;
            Ok(Outcome::new(json!({"vector": x, "k": k}), r).passed(passed))
        }
        VerifyCmd::Kriv(args) => {
            let host = input::read_spec(&args.host)?.oracle()?;
            let delta = input::rationals(&args.delta)?;
            let m = input::integers(&args.m)?;
            let a = input::rationals(&args.a)?;
            let gens = GeneratorSpec::unit_blocks(delta.len(), a.len(), args.block_len);
            let r = build_kriv_vectors(host.as_ref(), &delta, &m, &gens, &a, &SeqVector::zero())?;
            let holds = r.holds;
            let inputs = json!({"host": host.describe(), "delta": delta, "M": m, "a": a, "block_len": args.block_len});
            Ok(Outcome::new(inputs, r).passed(holds))
        }
    }
}

fn host_checked(space: &ModelSpace, a: &seqnorm::operators::DoubleVector, ctx: &Ctx, rc: &mut Recheck) -> Result<Rational> {
    let (value, wit) = host_norm(space, a)?;
    if let Some(w) = &wit {
        rc.check(ctx, &value, || w.evaluate(space, a))?;
    }
    Ok(value)
}

fn threshold_outcome(inputs: Value, value: Rational, threshold: Rational) -> Result<Outcome> {
    let holds = value > threshold;
    let margin = &value - &threshold;
    Ok(Outcome::new(inputs, json!({"value": value, "threshold": threshold, "margin": margin})).passed(holds))
}
