//! Text checkpoint format for [`PolicyNetwork`].
//!
//! ```text
//! nrl-policy 1
//! alpha 1e-2
//! layers 4 64 2
//! <one line per weight row, space separated, layer by layer>
//! ```
//!
//! Values are written in shortest round-trip exponent form, so reading a
//! checkpoint back reproduces every weight bit for bit.

use std::fmt::Write as _;

use super::PolicyNetwork;
use crate::error::{Error, Result};
use crate::numerics::Matrix;

pub const CHECKPOINT_MAGIC: &str = "nrl-policy";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Largest accepted layer width and parameter count. Keeps hostile headers
/// from triggering huge allocations.
const MAX_LAYER_WIDTH: usize = 1 << 16;
const MAX_PARAMETERS: usize = 1 << 24;

pub fn write_checkpoint(net: &PolicyNetwork) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{CHECKPOINT_MAGIC} {CHECKPOINT_VERSION}");
    let _ = writeln!(out, "alpha {:e}", net.alpha());
    let sizes: Vec<String> = net.layer_sizes().iter().map(|s| s.to_string()).collect();
    let _ = writeln!(out, "layers {}", sizes.join(" "));
    for w in net.weights() {
        for i in 0..w.rows() {
            let row: Vec<String> = w.row(i).iter().map(|x| format!("{x:e}")).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
    }
    out
}

pub fn read_checkpoint(text: &str) -> Result<PolicyNetwork> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let mut next = |what: &str| {
        lines
            .next()
            .ok_or_else(|| Error::parse(0, format!("unexpected end of input, expected {what}")))
    };

    let (n, header) = next("header")?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some(CHECKPOINT_MAGIC) {
        return Err(Error::parse(n, "not a policy checkpoint"));
    }
    let version: u32 = parts
        .next()
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::parse(n, "missing version"))?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::parse(n, format!("unsupported version {version}")));
    }

    let (n, alpha_line) = next("alpha")?;
    let alpha = match alpha_line.split_whitespace().collect::<Vec<_>>()[..] {
        ["alpha", v] => parse_finite(v, n)?,
        _ => return Err(Error::parse(n, "expected `alpha <value>`")),
    };

    let (n, layers_line) = next("layers")?;
    let mut tokens = layers_line.split_whitespace();
    if tokens.next() != Some("layers") {
        return Err(Error::parse(n, "expected `layers <sizes>`"));
    }
    let sizes = tokens
        .map(|t| match t.parse::<usize>() {
            Ok(s) if (1..=MAX_LAYER_WIDTH).contains(&s) => Ok(s),
            _ => Err(Error::parse(n, format!("bad layer size `{t}`"))),
        })
        .collect::<Result<Vec<_>>>()?;
    if sizes.len() < 2 {
        return Err(Error::parse(n, "need at least two layer sizes"));
    }
    let params: usize = sizes.windows(2).map(|w| w[0] * w[1]).sum();
    if params > MAX_PARAMETERS {
        return Err(Error::parse(n, "parameter count too large"));
    }

    let mut weights = Vec::with_capacity(sizes.len() - 1);
    for w in sizes.windows(2) {
        let (cols, rows) = (w[0], w[1]);
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let (n, row) = next("weight row")?;
            let before = data.len();
            for tok in row.split_whitespace() {
                data.push(parse_finite(tok, n)?);
            }
            if data.len() - before != cols {
                return Err(Error::parse(
                    n,
                    format!("expected {cols} values, found {}", data.len() - before),
                ));
            }
        }
        weights.push(Matrix::from_vec(rows, cols, data));
    }
    if let Some((n, extra)) = lines.find(|(_, l)| !l.is_empty()) {
        return Err(Error::parse(n, format!("trailing content `{extra}`")));
    }
    PolicyNetwork::from_weights(weights, alpha)
}

fn parse_finite(tok: &str, line: usize) -> Result<f64> {
    match tok.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::parse(line, format!("bad number `{tok}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::RandomSource;
    use proptest::prelude::*;

    #[test]
    fn rejects_wrong_magic_and_version() {
        assert!(read_checkpoint("something 1\nalpha 1e-2\nlayers 1 1\n0\n").is_err());
        assert!(read_checkpoint("nrl-policy 2\nalpha 1e-2\nlayers 1 1\n0\n").is_err());
    }

    #[test]
    fn rejects_truncated_and_trailing() {
        let net = PolicyNetwork::zeros(&[2, 3], 0.01).unwrap();
        let text = write_checkpoint(&net);
        let truncated: String = text.lines().take(4).map(|l| format!("{l}\n")).collect();
        assert!(read_checkpoint(&truncated).is_err());
        assert!(read_checkpoint(&format!("{text}1 2\n")).is_err());
    }

    #[test]
    fn rejects_non_finite_weights() {
        let text = "nrl-policy 1\nalpha 1e-2\nlayers 1 1\nNaN\n";
        assert!(read_checkpoint(text).is_err());
    }

    #[test]
    fn rejects_oversized_headers() {
        let text = "nrl-policy 1\nalpha 1e-2\nlayers 65536 65536\n";
        assert!(read_checkpoint(text).is_err());
    }

    proptest! {
        #[test]
        fn write_then_read_is_identity(
            sizes in prop::collection::vec(1usize..6, 2..5),
            seed in any::<u64>(),
            alpha in 1e-4f64..0.5,
        ) {
            let net = PolicyNetwork::new(&sizes, alpha, &mut RandomSource::new(seed)).unwrap();
            let back = read_checkpoint(&write_checkpoint(&net)).unwrap();
            prop_assert_eq!(back, net);
        }
    }
}
