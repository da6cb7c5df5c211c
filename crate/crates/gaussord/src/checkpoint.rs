//! Encoder checkpoint files.
//!
//! Text layout, one token group per line:
//!
//! ```text
//! gaussord-encoder 1
//! dims <n> <input_dim> <hidden_dim> <out_dim>
//! block w <rows> <cols>
//! <cols values>          (repeated <rows> times)
//! block b 1 <hidden_dim>
//! ...
//! ```
//!
//! Blocks appear in the order `w b w_mu b_mu w_sigma b_sigma codes`, each
//! row-major with shape `(fan_in, fan_out)`; `codes` is `n × input_dim`.
//! Values use 17 significant digits, so save/load is lossless.

use std::fmt::Write as _;
use std::path::Path;

use gaussord_core::EncoderParams;

use crate::error::{Error, Result};
use crate::formats::{fmt_f64, write_file};

const MAGIC: &str = "gaussord-encoder 1";

fn block_shapes(p: &EncoderParams) -> [(&'static str, usize, usize); 7] {
    [
        ("w", p.input_dim, p.hidden_dim),
        ("b", 1, p.hidden_dim),
        ("w_mu", p.hidden_dim, p.out_dim),
        ("b_mu", 1, p.out_dim),
        ("w_sigma", p.hidden_dim, p.out_dim),
        ("b_sigma", 1, p.out_dim),
        ("codes", p.n, p.input_dim),
    ]
}

pub fn format_checkpoint(p: &EncoderParams) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "dims {} {} {} {}", p.n, p.input_dim, p.hidden_dim, p.out_dim);
    let data: [&[f64]; 7] = [&p.w, &p.b, &p.w_mu, &p.b_mu, &p.w_sigma, &p.b_sigma, &p.codes];
    for ((name, rows, cols), values) in block_shapes(p).into_iter().zip(data) {
        let _ = writeln!(out, "block {name} {rows} {cols}");
        for row in values.chunks(cols.max(1)) {
            let line: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
    }
    out
}

pub fn parse_checkpoint(text: &str, source: &str) -> Result<EncoderParams> {
    let mut lines = text.lines().enumerate().map(|(n, l)| (n + 1, l.trim()));
    let mut next = |what: &str| {
        lines
            .next()
            .ok_or_else(|| Error::Data(format!("{source}: truncated checkpoint (expected {what})")))
    };
    let (line, magic) = next("header")?;
    if magic != MAGIC {
        return Err(Error::parse(source, line, "not a gaussord encoder checkpoint"));
    }
    let (line, dims) = next("dims")?;
    let nums: Vec<usize> = dims
        .strip_prefix("dims ")
        .ok_or_else(|| Error::parse(source, line, "expected `dims n input hidden out`"))?
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::parse(source, line, "bad dimension")))
        .collect::<Result<_>>()?;
    let [n, input_dim, hidden_dim, out_dim] = nums[..] else {
        return Err(Error::parse(source, line, "expected four dimensions"));
    };
    let mut p = EncoderParams {
        n,
        input_dim,
        hidden_dim,
        out_dim,
        w: Vec::new(),
        b: Vec::new(),
        w_mu: Vec::new(),
        b_mu: Vec::new(),
        w_sigma: Vec::new(),
        b_sigma: Vec::new(),
        codes: Vec::new(),
    };
    let shapes = block_shapes(&p);
    let mut blocks: Vec<Vec<f64>> = Vec::with_capacity(7);
    for (name, rows, cols) in shapes {
        let (line, head) = next("block header")?;
        if head != format!("block {name} {rows} {cols}") {
            return Err(Error::parse(source, line, &format!("expected `block {name} {rows} {cols}`")));
        }
        let mut values = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let (line, row) = next("block row")?;
            let before = values.len();
            for tok in row.split_whitespace() {
                values.push(tok.parse::<f64>().map_err(|_| Error::parse(source, line, "bad number"))?);
            }
            if values.len() - before != cols {
                return Err(Error::parse(source, line, &format!("expected {cols} values")));
            }
        }
        blocks.push(values);
    }
    let mut it = blocks.into_iter();
    for slot in [
        &mut p.w,
        &mut p.b,
        &mut p.w_mu,
        &mut p.b_mu,
        &mut p.w_sigma,
        &mut p.b_sigma,
        &mut p.codes,
    ] {
        *slot = it.next().unwrap_or_default();
    }
    p.validate()?;
    Ok(p)
}

pub fn save_checkpoint(path: &Path, p: &EncoderParams) -> Result<()> {
    write_file(path, &format_checkpoint(p))
}

pub fn load_checkpoint(path: &Path) -> Result<EncoderParams> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_checkpoint(&text, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let mut p = EncoderParams::init(4, 2, 5, 3, 17).unwrap();
        p.b[1] = -1.0 / 3.0;
        p.b_sigma[0] = f64::MIN_POSITIVE;
        let back = parse_checkpoint(&format_checkpoint(&p), "ckpt").unwrap();
        assert_eq!(back, p);
        for (a, b) in back.codes.iter().zip(&p.codes) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn rejects_corrupt_files() {
        let p = EncoderParams::init(3, 2, 2, 2, 1).unwrap();
        let text = format_checkpoint(&p);
        assert!(parse_checkpoint("nonsense\n", "c").is_err());
        let truncated: String = text.lines().take(5).map(|l| format!("{l}\n")).collect();
        assert!(parse_checkpoint(&truncated, "c").is_err());
        let bad = text.replacen("block b 1 2", "block b 1 3", 1);
        assert!(parse_checkpoint(&bad, "c").is_err());
    }
}
