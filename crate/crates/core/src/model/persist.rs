//! Plain-text model files.
//!
//! ```text
//! latefusion-regressor 1
//! input_dim 12
//! output_dim 2
//! hidden 32 16
//! activation relu
//! seed 1234
//! input_means <input_dim values>
//! input_stds <input_dim values>
//! output_means <output_dim values>
//! output_stds <output_dim values>
//! layer 0 12 32
//! weights <n_out·n_in values, row-major by output unit>
//! biases <n_out values>
//! layer 1 32 16
//! ...
//! ```
//!
//! Values are space-separated decimals in the shortest form that parses
//! back to the same `f64`, so `load(save(m)) == m` bit for bit. `hidden` may
//! be followed by nothing for a single linear layer.

use std::fmt::Write as _;
use std::path::Path;

use super::{Activation, NormStats, Regressor, RegressorSpec};
use crate::error::{Error, Result};

pub const FORMAT_MAGIC: &str = "latefusion-regressor";
pub const FORMAT_VERSION: u32 = 1;

fn push_values(out: &mut String, key: &str, values: &[f64]) {
    out.push_str(key);
    for v in values {
        write!(out, " {v}").expect("writing to a String cannot fail");
    }
    out.push('\n');
}

impl Regressor {
    pub fn to_text(&self) -> String {
        let spec = &self.spec;
        let mut out = String::new();
        let _ = writeln!(out, "{FORMAT_MAGIC} {FORMAT_VERSION}");
        let _ = writeln!(out, "input_dim {}", spec.input_dim);
        let _ = writeln!(out, "output_dim {}", spec.output_dim);
        out.push_str("hidden");
        for h in &spec.hidden_layers {
            let _ = write!(out, " {h}");
        }
        out.push('\n');
        let _ = writeln!(out, "activation {}", spec.activation.name());
        let _ = writeln!(out, "seed {}", spec.seed);
        push_values(&mut out, "input_means", &self.input_stats.means);
        push_values(&mut out, "input_stds", &self.input_stats.stds);
        push_values(&mut out, "output_means", &self.output_stats.means);
        push_values(&mut out, "output_stds", &self.output_stats.stds);
        let mut offset = 0;
        for (l, (n_in, n_out)) in spec.layer_shapes().into_iter().enumerate() {
            let _ = writeln!(out, "layer {l} {n_in} {n_out}");
            push_values(&mut out, "weights", &self.params[offset..offset + n_in * n_out]);
            offset += n_in * n_out;
            push_values(&mut out, "biases", &self.params[offset..offset + n_out]);
            offset += n_out;
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let mut next = |key: &str| -> Result<Vec<&str>> {
            let line = lines
                .next()
                .ok_or_else(|| bad(format!("missing `{key}` line")))?;
            let mut parts = line.split_whitespace();
            match parts.next() {
                Some(k) if k == key => Ok(parts.collect()),
                other => Err(bad(format!("expected `{key}`, found {other:?}"))),
            }
        };

        let version = next(FORMAT_MAGIC)?;
        if version != [FORMAT_VERSION.to_string().as_str()] {
            return Err(bad(format!("unsupported version {version:?}")));
        }
        let input_dim = one_usize(&next("input_dim")?)?;
        let output_dim = one_usize(&next("output_dim")?)?;
        let hidden_layers = next("hidden")?
            .iter()
            .map(|s| parse_usize(s))
            .collect::<Result<Vec<_>>>()?;
        let act = next("activation")?;
        let activation = match act.as_slice() {
            [name] => Activation::from_name(name)
                .ok_or_else(|| bad(format!("unknown activation `{name}`")))?,
            _ => return Err(bad("activation needs one value".into())),
        };
        let seed = match next("seed")?.as_slice() {
            [s] => s.parse::<u64>().map_err(|_| bad(format!("bad seed `{s}`")))?,
            _ => return Err(bad("seed needs one value".into())),
        };
        let spec = RegressorSpec {
            input_dim,
            output_dim,
            hidden_layers,
            activation,
            seed,
        };
        spec.validate()?;

        let input_stats = NormStats::new(
            floats(&next("input_means")?, input_dim)?,
            floats(&next("input_stds")?, input_dim)?,
        )?;
        let output_stats = NormStats::new(
            floats(&next("output_means")?, output_dim)?,
            floats(&next("output_stds")?, output_dim)?,
        )?;

        let mut params = Vec::with_capacity(spec.param_count());
        for (l, (n_in, n_out)) in spec.layer_shapes().into_iter().enumerate() {
            let header = next("layer")?;
            let expected = [l.to_string(), n_in.to_string(), n_out.to_string()];
            if header != expected.iter().map(String::as_str).collect::<Vec<_>>() {
                return Err(bad(format!(
                    "layer header {header:?} does not match expected {expected:?}"
                )));
            }
            params.extend(floats(&next("weights")?, n_in * n_out)?);
            params.extend(floats(&next("biases")?, n_out)?);
        }
        if lines.next().is_some() {
            return Err(bad("trailing content after last layer".into()));
        }
        Regressor::from_parts(spec, input_stats, output_stats, params)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::io::write_atomic(path.as_ref(), self.to_text().as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text).map_err(|e| e.context(path.display().to_string()))
    }
}

fn bad(msg: String) -> Error {
    Error::ModelFormat(msg)
}

fn parse_usize(s: &str) -> Result<usize> {
    s.parse().map_err(|_| bad(format!("bad integer `{s}`")))
}

fn one_usize(parts: &[&str]) -> Result<usize> {
    match parts {
        [s] => parse_usize(s),
        _ => Err(bad(format!("expected one integer, got {parts:?}"))),
    }
}

fn floats(parts: &[&str], expected: usize) -> Result<Vec<f64>> {
    if parts.len() != expected {
        return Err(bad(format!(
            "expected {expected} values, found {}",
            parts.len()
        )));
    }
    parts
        .iter()
        .map(|s| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(format!("bad value `{s}`")))
        })
        .collect()
}
