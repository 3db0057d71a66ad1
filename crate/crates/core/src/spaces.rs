//! JSON space specifications and a single evaluation entry point for them.
//!
//! A spec names one of the built-in norms and its parameters, e.g.
//! `{"kind": "lorentz", "w": {"kind": "harmonic"}}` or
//! `{"kind": "space_x", "n": {"kind": "explicit", "values": [4, 8], "tail": "geometric"}}`.
//! Vectors for `space_y` are indexed in tree basis order (see [`basis_node`]).

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::classical::{lorentz_norm, lp_norm, schreier_lorentz_norm, LayeredFamily, LpExponent, SchreierVariant, SchreierWitness, WeightSeq};
use crate::error::{Error, Result};
use crate::implicit::{t_dw1_norm, x_norm, AdmissibilitySeq, Pairing, TSpec, TWitness, Theta, XSpaceSpec, XWitness, T_SUPPORT_CAP};
use crate::operators::ModelSpace;
use crate::rational::Rational;
use crate::roots::{default_width, Enclosure};
use crate::spreading::{basis_node, combine_upper, max_combine, ImplicitLorentz, Lorentz, Lp, Oracle, SchreierLorentz, SpaceX, TreeBasis};
use crate::tree::{y_norm, TreeVector, YWitness};
use crate::vector::SeqVector;

fn harmonic() -> WeightSeq {
    WeightSeq::Harmonic
}

fn t_cap() -> usize {
    T_SUPPORT_CAP
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceSpec {
    /// `p` is a rational string or `"inf"`.
    Lp {
        p: String,
        #[serde(default)]
        width: Option<Rational>,
    },
    Lorentz {
        #[serde(default = "harmonic")]
        w: WeightSeq,
    },
    SchreierLorentz {
        #[serde(default = "harmonic")]
        w: WeightSeq,
        #[serde(default)]
        variant: SchreierVariant,
    },
    #[serde(rename = "t_dw1")]
    TDw1 {
        #[serde(default = "harmonic")]
        w: WeightSeq,
        #[serde(default)]
        pairing: Pairing,
        #[serde(default = "t_cap")]
        cap: usize,
    },
    SpaceX {
        n: AdmissibilitySeq,
        #[serde(default)]
        theta: Theta,
    },
    SpaceY {},
    LayeredModel {
        levels: Vec<crate::classical::Layer>,
    },
    CombineUpper {
        children: Vec<SpaceSpec>,
        c: Vec<Rational>,
    },
    MaxCombine {
        children: Vec<SpaceSpec>,
    },
}

/// How a reported value was attained.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceWitness {
    Schreier(SchreierWitness),
    X(XWitness),
    T(TWitness),
    Y(YWitness),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Evaluation {
    pub value: Enclosure,
    pub witness: Option<SpaceWitness>,
}

impl SpaceSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let spec: SpaceSpec = serde_json::from_str(text).map_err(|e| Error::Parse(format!("space spec: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SpaceSpec::Lp { p, width } => {
                if let LpExponent::Finite(p) = p.parse::<LpExponent>()? {
                    if p < Rational::one() {
                        return Err(Error::invalid("ℓ_p needs p ≥ 1"));
                    }
                }
                if width.as_ref().is_some_and(|w| !w.is_positive()) {
                    return Err(Error::invalid("width must be positive"));
                }
                Ok(())
            }
            SpaceSpec::Lorentz { w } | SpaceSpec::SchreierLorentz { w, .. } | SpaceSpec::TDw1 { w, .. } => w.validate(),
            SpaceSpec::SpaceX { n, theta } => XSpaceSpec { n: n.clone(), theta: theta.clone() }.validate(),
            SpaceSpec::SpaceY {} => Ok(()),
            SpaceSpec::LayeredModel { levels } => LayeredFamily::new(levels.clone()).map(|_| ()),
            SpaceSpec::CombineUpper { children, c } => {
                children.iter().try_for_each(SpaceSpec::validate)?;
                if children.len() != c.len() || c.iter().any(|ci| !ci.is_positive()) {
                    return Err(Error::invalid("combine_upper needs one positive constant per child"));
                }
                Ok(())
            }
            SpaceSpec::MaxCombine { children } => {
                if children.is_empty() {
                    return Err(Error::invalid("max_combine needs at least one child"));
                }
                children.iter().try_for_each(SpaceSpec::validate)
            }
        }
    }

    fn lp_exponent(&self) -> Result<LpExponent> {
        match self {
            SpaceSpec::Lp { p, .. } => p.parse(),
            _ => Err(Error::invalid("not an ℓ_p spec")),
        }
    }

    fn x_spec(n: &AdmissibilitySeq, theta: &Theta) -> XSpaceSpec {
        XSpaceSpec { n: n.clone(), theta: theta.clone() }
    }

    /// The model space of a `layered_model` spec.
    pub fn model(&self) -> Result<ModelSpace> {
        match self {
            SpaceSpec::LayeredModel { levels } => ModelSpace::new(LayeredFamily::new(levels.clone())?),
            _ => Err(Error::invalid("expected a layered_model spec")),
        }
    }

    /// The spec as a norm oracle on sequences.
    pub fn oracle(&self) -> Result<Oracle> {
        self.validate()?;
        Ok(match self {
            SpaceSpec::Lp { width, .. } => {
                let mut lp = Lp::new(self.lp_exponent()?);
                if let Some(w) = width {
                    lp.width = w.clone();
                }
                Arc::new(lp)
            }
            SpaceSpec::Lorentz { w } => Arc::new(Lorentz { w: w.clone() }),
            SpaceSpec::SchreierLorentz { w, variant } => Arc::new(SchreierLorentz { w: w.clone(), variant: *variant }),
            SpaceSpec::TDw1 { w, pairing, .. } => Arc::new(ImplicitLorentz { spec: TSpec { w: w.clone(), pairing: *pairing } }),
            SpaceSpec::SpaceX { n, theta } => Arc::new(SpaceX { spec: Self::x_spec(n, theta) }),
            SpaceSpec::SpaceY {} => Arc::new(TreeBasis),
            SpaceSpec::LayeredModel { .. } => {
                return Err(Error::invalid("layered_model norms act on double-indexed vectors; use the op commands"))
            }
            SpaceSpec::CombineUpper { children, c } => {
                let kids = children.iter().map(SpaceSpec::oracle).collect::<Result<_>>()?;
                Arc::new(combine_upper(kids, c.clone())?)
            }
            SpaceSpec::MaxCombine { children } => {
                let kids = children.iter().map(SpaceSpec::oracle).collect::<Result<_>>()?;
                Arc::new(max_combine(kids)?)
            }
        })
    }

    /// Evaluates the norm of `x`, with a witness for supremum-defined norms.
    pub fn evaluate(&self, x: &SeqVector) -> Result<Evaluation> {
        self.validate()?;
        x.validate_positive()?;
        let exact = |value, witness| Ok(Evaluation { value: Enclosure::exact(value), witness: Some(witness) });
        match self {
            SpaceSpec::Lp { width, .. } => {
                let width = width.clone().unwrap_or_else(default_width);
                Ok(Evaluation { value: lp_norm(x, &self.lp_exponent()?, &width)?, witness: None })
            }
            SpaceSpec::Lorentz { w } => Ok(Evaluation { value: Enclosure::exact(lorentz_norm(w, x)), witness: None }),
            SpaceSpec::SchreierLorentz { w, variant } => {
                let (value, wit) = schreier_lorentz_norm(w, x, *variant);
                exact(value, SpaceWitness::Schreier(wit))
            }
            SpaceSpec::TDw1 { w, pairing, cap } => {
                let r = t_dw1_norm(&TSpec { w: w.clone(), pairing: *pairing }, x, *cap)?;
                exact(r.value, SpaceWitness::T(r.witness))
            }
            SpaceSpec::SpaceX { n, theta } => {
                let r = x_norm(&Self::x_spec(n, theta), x)?;
                exact(r.value, SpaceWitness::X(r.witness))
            }
            SpaceSpec::SpaceY {} => {
                let r = y_norm(&tree_vector(x)?)?;
                exact(r.value, SpaceWitness::Y(r.witness))
            }
            SpaceSpec::LayeredModel { .. } | SpaceSpec::CombineUpper { .. } | SpaceSpec::MaxCombine { .. } => {
                Ok(Evaluation { value: self.oracle()?.norm(x)?, witness: None })
            }
        }
    }

    /// Re-evaluates a witness produced by [`SpaceSpec::evaluate`] for the same `x`.
    pub fn recheck(&self, x: &SeqVector, witness: &SpaceWitness) -> Result<Rational> {
        match (self, witness) {
            (SpaceSpec::SchreierLorentz { w, variant }, SpaceWitness::Schreier(wit)) => wit.evaluate(w, x, *variant),
            (SpaceSpec::TDw1 { w, pairing, .. }, SpaceWitness::T(wit)) => wit.evaluate(&TSpec { w: w.clone(), pairing: *pairing }, x),
            (SpaceSpec::SpaceX { n, theta }, SpaceWitness::X(wit)) => wit.evaluate(&Self::x_spec(n, theta), x),
            (SpaceSpec::SpaceY {}, SpaceWitness::Y(wit)) => wit.evaluate(&tree_vector(x)?),
            _ => Err(Error::witness("witness kind does not match the space")),
        }
    }
}

/// Reads a sequence vector in tree basis order as a vector on the tree.
pub fn tree_vector(x: &SeqVector) -> Result<TreeVector> {
    let mut out = TreeVector::zero();
    for (&i, v) in x.iter() {
        out.set(basis_node(i)?, v.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use crate::vector::parse_seq_vector;

    #[test]
    fn examples() {
        let x = SpaceSpec::parse(r#"{"kind":"space_x","n":{"kind":"explicit","values":[4,8],"tail":"geometric"}}"#).unwrap();
        let v = parse_seq_vector("[[1,1],[2,1],[3,1],[4,1]]").unwrap();
        let e = x.evaluate(&v).unwrap();
        assert_eq!(e.value, Enclosure::exact(q(4, 3)));
        assert_eq!(x.recheck(&v, e.witness.as_ref().unwrap()).unwrap(), q(4, 3));

        let lorentz = SpaceSpec::parse(r#"{"kind":"lorentz"}"#).unwrap();
        assert_eq!(lorentz.evaluate(&parse_seq_vector("[[7,1]]").unwrap()).unwrap().value, Enclosure::exact(q(1, 1)));

        let l2 = SpaceSpec::parse(r#"{"kind":"lp","p":"2"}"#).unwrap();
        let r = l2.evaluate(&parse_seq_vector("[[1,3],[2,4]]").unwrap()).unwrap();
        assert!(r.value.contains(&q(5, 1)));

        let y = SpaceSpec::parse(r#"{"kind":"space_y"}"#).unwrap();
        let v = parse_seq_vector("[[1,1],[2,1],[4,1],[8,1]]").unwrap();
        let e = y.evaluate(&v).unwrap();
        assert_eq!(e.value, Enclosure::exact(q(7, 3)));
        assert_eq!(y.recheck(&v, e.witness.as_ref().unwrap()).unwrap(), q(7, 3));
        assert!(lorentz.recheck(&v, e.witness.as_ref().unwrap()).is_err());
    }

    #[test]
    fn composites_and_errors() {
        let both = SpaceSpec::parse(
            r#"{"kind":"max_combine","children":[{"kind":"lp","p":"inf"},{"kind":"schreier_lorentz"}]}"#,
        )
        .unwrap();
        let v = parse_seq_vector("[[2,1],[3,1]]").unwrap();
        assert_eq!(both.evaluate(&v).unwrap().value, Enclosure::exact(q(3, 2)));
        let upper = SpaceSpec::parse(r#"{"kind":"combine_upper","children":[{"kind":"lorentz"}],"c":["16"]}"#).unwrap();
        assert_eq!(upper.evaluate(&v).unwrap().value, Enclosure::exact(q(3, 2)));

        assert!(SpaceSpec::parse(r#"{"kind":"combine_upper","children":[{"kind":"lorentz"}],"c":[]}"#).is_err());
        assert!(SpaceSpec::parse(r#"{"kind":"lp","p":"1/2"}"#).is_err());
        assert!(SpaceSpec::parse(r#"{"kind":"hilbert"}"#).is_err());
        assert!(SpaceSpec::parse(r#"{"kind":"lorentz","w":{"kind":"explicit","values":["1/2"],"tail":"harmonic-from-last"}}"#).is_err());

        let model = SpaceSpec::parse(r#"{"kind":"layered_model","levels":[{"delta":["1"],"M":[2]}]}"#).unwrap();
        assert!(model.oracle().is_err());
        assert!(model.model().unwrap().monotone);
        assert!(SpaceSpec::parse(r#"{"kind":"layered_model","levels":[{"delta":["1"],"M":[2,1]}]}"#).is_err());
    }

    #[test]
    fn round_trip() {
        let t = SpaceSpec::parse(r#"{"kind":"t_dw1"}"#).unwrap();
        let text = serde_json::to_string(&t).unwrap();
        assert_eq!(SpaceSpec::parse(&text).unwrap(), t);
        let v = parse_seq_vector("[[2,1],[3,1]]").unwrap();
        let e = t.evaluate(&v).unwrap();
        assert_eq!(e.value, Enclosure::exact(q(3, 2)));
        assert_eq!(t.recheck(&v, e.witness.as_ref().unwrap()).unwrap(), q(3, 2));
    }
}
