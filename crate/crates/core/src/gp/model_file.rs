//! Plain-text serialization of a fitted posterior.
//!
//! ```text
//! krigrisk-model 1
//! family matern52
//! variance 1.0e0
//! isotropic false
//! lengthscales 3.0e-1 2.0e0
//! trend 1.5e-1
//! jitter 1.0e-8
//! dimension 2
//! observations 3
//! x1 x2 y
//! ...
//! ```
//!
//! Floats are written with 17 significant digits so a reloaded model
//! reproduces predictions bit for bit.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::gp::kernel::{KernelFamily, KernelSpec};
use crate::gp::posterior::{Design, Jitter, KrigingPosterior, Trend};
use crate::points::Points;

const MAGIC: &str = "krigrisk-model";
const VERSION: u32 = 1;

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_model(post: &KrigingPosterior) -> String {
    let k = post.kernel();
    let d = post.design();
    let mut s = String::new();
    let _ = writeln!(s, "{MAGIC} {VERSION}");
    let _ = writeln!(s, "family {}", k.family);
    let _ = writeln!(s, "variance {}", fmt_f64(k.variance));
    let _ = writeln!(s, "isotropic {}", k.isotropic);
    let ls: Vec<String> = k.lengthscales.iter().map(|v| fmt_f64(*v)).collect();
    let _ = writeln!(s, "lengthscales {}", ls.join(" "));
    let _ = writeln!(s, "trend {}", fmt_f64(post.trend()));
    let _ = writeln!(s, "jitter {}", fmt_f64(post.jitter()));
    let _ = writeln!(s, "dimension {}", d.dim());
    let _ = writeln!(s, "observations {}", d.len());
    for (x, y) in d.points().rows().zip(d.responses()) {
        let mut row: Vec<String> = x.iter().map(|v| fmt_f64(*v)).collect();
        row.push(fmt_f64(*y));
        let _ = writeln!(s, "{}", row.join(" "));
    }
    s
}

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn parse_f64(tok: &str) -> Result<f64> {
    tok.parse::<f64>()
        .map_err(|_| parse_err(format!("not a number: {tok:?}")))
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next_nonblank(&mut self) -> Result<(usize, &'a str)> {
        for (i, line) in self.inner.by_ref() {
            let t = line.trim();
            if !t.is_empty() {
                return Ok((i + 1, t));
            }
        }
        Err(parse_err("unexpected end of model file"))
    }

    fn field(&mut self, key: &str) -> Result<(usize, &'a str)> {
        let (no, line) = self.next_nonblank()?;
        match line.split_once(char::is_whitespace) {
            Some((k, rest)) if k == key => Ok((no, rest.trim())),
            _ => Err(parse_err(format!("line {no}: expected `{key} ...`"))),
        }
    }
}

pub fn read_model(text: &str) -> Result<KrigingPosterior> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
    };
    let (_, version) = lines.field(MAGIC)?;
    if version != VERSION.to_string() {
        return Err(parse_err(format!("unsupported model version {version}")));
    }
    let (no, fam) = lines.field("family")?;
    let family = KernelFamily::from_name(fam)
        .ok_or_else(|| parse_err(format!("line {no}: unknown kernel family {fam:?}")))?;
    let variance = parse_f64(lines.field("variance")?.1)?;
    let (no, iso) = lines.field("isotropic")?;
    let isotropic = iso
        .parse::<bool>()
        .map_err(|_| parse_err(format!("line {no}: expected true or false")))?;
    let lengthscales = lines
        .field("lengthscales")?
        .1
        .split_whitespace()
        .map(parse_f64)
        .collect::<Result<Vec<_>>>()?;
    let trend = parse_f64(lines.field("trend")?.1)?;
    let jitter = parse_f64(lines.field("jitter")?.1)?;
    let (no, dim) = lines.field("dimension")?;
    let dim: usize = dim
        .parse()
        .map_err(|_| parse_err(format!("line {no}: bad dimension")))?;
    let (no, n) = lines.field("observations")?;
    let n: usize = n
        .parse()
        .map_err(|_| parse_err(format!("line {no}: bad observation count")))?;
    if dim == 0 {
        return Err(parse_err("dimension must be positive"));
    }

    let mut points = Points::with_capacity(dim, n);
    let mut responses = Vec::with_capacity(n);
    for _ in 0..n {
        let (no, line) = lines.next_nonblank()?;
        let vals = line
            .split_whitespace()
            .map(parse_f64)
            .collect::<Result<Vec<_>>>()?;
        if vals.len() != dim + 1 {
            return Err(parse_err(format!(
                "line {no}: expected {} values, found {}",
                dim + 1,
                vals.len()
            )));
        }
        points.push(&vals[..dim])?;
        responses.push(vals[dim]);
    }
    if let Ok((no, _)) = lines.next_nonblank() {
        return Err(parse_err(format!("line {no}: trailing content")));
    }

    let kernel = KernelSpec::new(family, variance, lengthscales, isotropic)?;
    KrigingPosterior::condition_with(
        Design::new(points, responses)?,
        kernel,
        Trend::Fixed(trend),
        Jitter::Exact(jitter),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> KrigingPosterior {
        let pts = Points::from_rows(&[vec![0.1, 0.2], vec![0.7, -0.3], vec![-0.4, 0.9]]).unwrap();
        let k = KernelSpec::new(KernelFamily::Matern32, 1.7, vec![0.45, 1.3], false).unwrap();
        KrigingPosterior::condition(Design::new(pts, vec![0.3, -1.1, 2.0]).unwrap(), k, Trend::Gls)
            .unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        let post = model();
        let text = write_model(&post);
        let back = read_model(&text).unwrap();
        assert_eq!(back.kernel(), post.kernel());
        assert_eq!(back.trend(), post.trend());
        for x in [[0.0, 0.0], [0.5, 0.5], [-1.0, 2.0]] {
            assert_eq!(back.predict(&x).unwrap(), post.predict(&x).unwrap());
        }
        assert_eq!(write_model(&back), text);
    }

    #[test]
    fn rejects_malformed_files() {
        let text = write_model(&model());
        assert!(read_model(&text.replace("matern32", "cubic")).is_err());
        assert!(read_model(&text.replace("observations 3", "observations 4")).is_err());
        assert!(read_model(&text.replace("krigrisk-model 1", "krigrisk-model 9")).is_err());
        let extra = format!("{text}1 2 3\n");
        assert!(read_model(&extra).is_err());
    }
}
