use std::fs;
use std::path::Path;

use seqnorm::operators::{DoubleVector, ModelSpace, Polynomial};
use seqnorm::spaces::{tree_vector, SpaceSpec};
use seqnorm::tree::{Bush, BranchCode, TreeNode, TreeVector};
use seqnorm::vector::parse_seq_vector;
use seqnorm::{Error, Rational, Result, SeqVector};

fn parse_err(what: &str, e: impl std::fmt::Display) -> Error {
    Error::Parse(format!("{what}: {e}"))
}

/// Inline JSON, or `@path` to read it from a file.
pub fn text_arg(arg: &str) -> Result<String> {
    match arg.strip_prefix('@') {
        Some(path) => fs::read_to_string(path).map_err(|e| parse_err(path, e)),
        None => Ok(arg.to_string()),
    }
}

pub fn read_spec(path: &Path) -> Result<SpaceSpec> {
    let text = fs::read_to_string(path).map_err(|e| parse_err(&path.display().to_string(), e))?;
    SpaceSpec::parse(&text)
}

pub fn read_model(path: &Path) -> Result<ModelSpace> {
    read_spec(path)?.model()
}

pub fn seq_vector(arg: &str) -> Result<SeqVector> {
    parse_seq_vector(&text_arg(arg)?)
}

/// Tree vectors come either keyed by `[level, index]` or by basis position.
pub fn tree_vector_arg(arg: &str) -> Result<TreeVector> {
    let text = text_arg(arg)?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| parse_err("tree vector", e))?;
    let entries = match &value {
        serde_json::Value::Object(map) => map.get("entries").cloned().unwrap_or(serde_json::Value::Null),
        other => other.clone(),
    };
    let by_node = entries.as_array().and_then(|a| a.first()).and_then(|e| e.get(0)).is_some_and(|k| k.is_array());
    if by_node {
        let pairs: Vec<(TreeNode, Rational)> = serde_json::from_value(entries).map_err(|e| parse_err("tree vector", e))?;
        Ok(TreeVector::from_pairs(pairs))
    } else {
        tree_vector(&parse_seq_vector(&text)?)
    }
}

pub fn double_vector(arg: &str) -> Result<DoubleVector> {
    let text = text_arg(arg)?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| parse_err("double vector", e))?;
    if value.is_array() {
        let entries: Vec<(u32, u64, Rational)> = serde_json::from_value(value).map_err(|e| parse_err("double vector", e))?;
        DoubleVector::from_entries(entries)
    } else {
        serde_json::from_value(value).map_err(|e| parse_err("double vector", e))
    }
}

pub fn rationals(arg: &str) -> Result<Vec<Rational>> {
    serde_json::from_str(&text_arg(arg)?).map_err(|e| parse_err("rational list", e))
}

pub fn integers(arg: &str) -> Result<Vec<u64>> {
    serde_json::from_str(&text_arg(arg)?).map_err(|e| parse_err("integer list", e))
}

pub fn rational(arg: &str) -> Result<Rational> {
    arg.parse()
}

pub fn polynomial(arg: &str) -> Result<Polynomial> {
    let text = text_arg(arg)?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| parse_err("polynomial", e))?;
    if value.is_array() {
        Ok(Polynomial::new(serde_json::from_value(value).map_err(|e| parse_err("polynomial", e))?))
    } else {
        serde_json::from_value(value).map_err(|e| parse_err("polynomial", e))
    }
}

pub fn code(arg: &str) -> Result<BranchCode> {
    BranchCode::parse(&text_arg(arg)?)
}

/// A bush as `[[s, t], …]` with nodes written `[level, index]`.
pub fn bush(arg: &str) -> Result<Bush> {
    let pairs: Vec<(TreeNode, TreeNode)> = serde_json::from_str(&text_arg(arg)?).map_err(|e| parse_err("bush", e))?;
    Ok(Bush::new(pairs))
}

/// `λ_k = k` for the keyword `linear`, otherwise an explicit list.
pub fn lambda(arg: &str, horizon: usize) -> Result<Vec<Rational>> {
    if arg == "linear" {
        Ok((1..=horizon).map(Rational::from).collect())
    } else {
        rationals(arg)
    }
}
