use std::path::PathBuf;

use clap::Subcommand;
use serde_json::json;

use seqnorm::operators::{apply_poly, check_layer_monotone, fit_upper_family, host_norm, noncompact_certificate};
use seqnorm::spaces::SpaceSpec;
use seqnorm::{Error, Result};

use crate::input;
use crate::report::{Ctx, Outcome, Recheck};

#[derive(Subcommand)]
pub enum OpCmd {
    /// Whether the levels of a layered model are certified monotone.
    Monotone {
        #[arg(long)]
        model: PathBuf,
    },
    /// Host norm of a double vector `[[ℓ, j, "p/q"], …]`.
    Host {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        vec: String,
    },
    /// `p(T) A`.
    Apply {
        /// Coefficients `[c_0, c_1, …]`.
        #[arg(long)]
        poly: String,
        #[arg(long)]
        vec: String,
    },
    /// Separation of the images `(p(T) - λ) w^n_j`, `j ≤ J`.
    Certify {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        poly: String,
        #[arg(long, default_value = "0")]
        lambda: String,
        #[arg(long)]
        level: u32,
        #[arg(long = "J", default_value_t = 16)]
        j: u64,
    },
    /// Greedy increasing `M` with `N(a) ≤ sup_n δ_n ‖a‖_{ℓ_1(𝓖_n)}` on samples.
    Fit {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        delta: String,
        /// Coefficient lists `[[a_1, …], …]`.
        #[arg(long)]
        samples: String,
        #[arg(long, default_value_t = 64)]
        cap: u64,
    },
}

pub fn run(c: &OpCmd, ctx: &Ctx) -> Result<Outcome> {
    match c {
        OpCmd::Monotone { model } => {
            let spec = input::read_spec(model)?;
            let fam = match &spec {
                SpaceSpec::LayeredModel { levels } => seqnorm::classical::LayeredFamily::new(levels.clone())?,
                _ => return Err(Error::Invalid("expected a layered_model spec".into())),
            };
            let cert = check_layer_monotone(&fam)?;
            let monotone = cert.monotone;
            Ok(Outcome::new(json!({"model": spec}), cert).passed(monotone))
        }
        OpCmd::Host { model, vec } => {
            let space = input::read_model(model)?;
            let a = input::double_vector(vec)?;
            let (value, witness) = host_norm(&space, &a)?;
            let mut rc = Recheck::default();
            if let Some(w) = &witness {
                rc.check(ctx, &value, || w.evaluate(&space, &a))?;
            }
            Ok(Outcome::new(json!({"model": space, "vector": a}), json!({"value": value, "witness": witness})).rechecked(rc))
        }
        OpCmd::Apply { poly, vec } => {
            let p = input::polynomial(poly)?;
            let a = input::double_vector(vec)?;
            Ok(Outcome::new(json!({"poly": p, "vector": a}), apply_poly(&p, &a)))
        }
        OpCmd::Certify { model, poly, lambda, level, j } => {
            let space = input::read_model(model)?;
            let p = input::polynomial(poly)?;
            let lambda = input::rational(lambda)?;
            let r = noncompact_certificate(&space, &p, &lambda, *level, *j)?;
            let separated = r.separated;
            let inputs = json!({"model": space, "poly": p, "lambda": lambda, "level": level, "J": j});
            Ok(Outcome::new(inputs, r).passed(separated))
        }
        OpCmd::Fit { spec, delta, samples, cap } => {
            let spec = input::read_spec(spec)?;
            let delta = input::rationals(delta)?;
            let samples: Vec<Vec<seqnorm::Rational>> = serde_json::from_str(&input::text_arg(samples)?)
                .map_err(|e| Error::Parse(format!("samples: {e}")))?;
            let r = fit_upper_family(spec.oracle()?.as_ref(), &samples, &delta, *cap)?;
            let fitted = r.fitted;
            Ok(Outcome::new(json!({"spec": spec, "delta": delta, "samples": samples.len(), "cap": cap}), r).passed(fitted))
        }
    }
}
