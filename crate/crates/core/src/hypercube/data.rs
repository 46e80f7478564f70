use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::bits::{decode_into, BitVector};
use super::dist::Marginal;
use super::ltf::{sign, CubeFunction, LinearThresholdFunction};
use crate::error::check_dim;
use crate::par;
use crate::rng::SeedStream;
use crate::stats::ENUMERATION_CAP;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LabeledSample {
    pub x: BitVector,
    pub y: i8,
}

impl LabeledSample {
    pub fn new(x: BitVector, y: i8) -> Result<Self> {
        if y != 1 && y != -1 {
            return Err(Error::config(format!("label {y} is not in {{-1, +1}}")));
        }
        Ok(Self { x, y })
    }
}

/// Label corruption applied on top of the planted halfspace.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LabelNoise {
    #[default]
    None,
    /// Random classification noise: each label flipped independently with probability `eta`.
    Rcn { eta: f64 },
    /// Every point with `|<w,x> - theta| < width` gets the wrong label.
    Boundary { width: f64 },
}

impl LabelNoise {
    pub fn validate(&self) -> Result<()> {
        match *self {
            LabelNoise::None => Ok(()),
            LabelNoise::Rcn { eta } if (0.0..0.5).contains(&eta) => Ok(()),
            LabelNoise::Rcn { eta } => {
                Err(Error::config(format!("noise rate eta = {eta} must lie in [0, 1/2)")))
            }
            LabelNoise::Boundary { width } if width >= 0.0 && width.is_finite() => Ok(()),
            LabelNoise::Boundary { width } => {
                Err(Error::config(format!("boundary width {width} must be finite and >= 0")))
            }
        }
    }

    /// Probability that the label at a point with margin `m` is flipped.
    pub fn flip_prob(&self, margin: f64) -> f64 {
        match *self {
            LabelNoise::None => 0.0,
            LabelNoise::Rcn { eta } => eta,
            LabelNoise::Boundary { width } => {
                if margin.abs() < width {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantedDataConfig {
    pub n: usize,
    pub marginal: Marginal,
    pub planted: LinearThresholdFunction,
    #[serde(default)]
    pub label_noise: LabelNoise,
}

impl PlantedDataConfig {
    pub fn validate(&self) -> Result<()> {
        self.marginal.validate()?;
        check_dim(self.n, self.marginal.dim())?;
        check_dim(self.n, self.planted.dim())?;
        self.label_noise.validate()
    }

    /// Probability that `y != planted(x)` at `x`.
    pub fn flip_prob(&self, x: &[i8]) -> f64 {
        self.label_noise.flip_prob(self.planted.margin(x))
    }
}

pub fn generate_dataset(cfg: &PlantedDataConfig, count: usize, seed: u64) -> Result<Vec<LabeledSample>> {
    cfg.validate()?;
    let seeds = SeedStream::new(seed);
    let chunks = par::map_chunks(count, par::CHUNK, |ci, r| {
        let mut rng = seeds.rng(ci as u64);
        let mut buf = vec![1i8; cfg.n];
        r.map(|_| {
            cfg.marginal.sample_into(&mut rng, &mut buf);
            let clean = cfg.planted.eval_raw(&buf);
            let u: f64 = rng.random();
            let y = if u < cfg.flip_prob(&buf) { -clean } else { clean };
            LabeledSample { x: BitVector::from_raw(buf.clone()), y }
        })
        .collect::<Vec<_>>()
    });
    Ok(chunks.into_iter().flatten().collect())
}

/// Exact `P[sign(h(x)) != y]` under the planted distribution.
pub fn population_error(h: &dyn CubeFunction, cfg: &PlantedDataConfig) -> Result<f64> {
    cfg.validate()?;
    check_dim(cfg.n, h.dim())?;
    if cfg.n > ENUMERATION_CAP {
        return Err(Error::EnumerationCap { n: cfg.n, cap: ENUMERATION_CAP });
    }
    let table = cfg.marginal.table();
    Ok(par::sum_chunks(table.len(), par::CHUNK, |_, r| {
        let mut buf = vec![1i8; cfg.n];
        let mut acc = 0.0;
        for idx in r {
            decode_into(idx as u64, &mut buf);
            let q = cfg.flip_prob(&buf);
            let agree = sign(h.eval(&buf)) == cfg.planted.eval_raw(&buf);
            acc += table[idx] * if agree { q } else { 1.0 - q };
        }
        acc
    }))
}

pub fn write_dataset<W: Write>(mut w: W, data: &[LabeledSample]) -> Result<()> {
    let mut line = String::new();
    for s in data {
        line.clear();
        for b in s.x.iter() {
            line.push_str(if b > 0 { "1 " } else { "-1 " });
        }
        line.push_str("; ");
        line.push_str(if s.y > 0 { "1" } else { "-1" });
        line.push('\n');
        w.write_all(line.as_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn parse_bit(tok: &str, line: usize) -> Result<i8> {
    match tok {
        "1" | "+1" => Ok(1),
        "-1" => Ok(-1),
        _ => Err(Error::Parse { line, message: format!("`{tok}` is not +1 or -1") }),
    }
}

/// Reads the line format `x_1 ... x_n ; y`. Blank lines and `#` comments are skipped.
pub fn read_dataset<R: Read>(r: R) -> Result<Vec<LabeledSample>> {
    let mut out = Vec::new();
    let mut dim = None;
    for (i, line) in BufReader::new(r).lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let body = line.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let (xs, y) = body
            .split_once(';')
            .ok_or_else(|| Error::Parse { line: lineno, message: "missing `;` separator".into() })?;
        let bits = xs
            .split_whitespace()
            .map(|t| parse_bit(t, lineno))
            .collect::<Result<Vec<_>>>()?;
        let y = parse_bit(y.trim(), lineno)?;
        match dim {
            None => dim = Some(bits.len()),
            Some(d) if d != bits.len() => {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("expected {d} coordinates, found {}", bits.len()),
                })
            }
            _ => {}
        }
        out.push(LabeledSample { x: BitVector::from_raw(bits), y });
    }
    Ok(out)
}

pub fn write_dataset_file(path: impl AsRef<Path>, data: &[LabeledSample]) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_dataset(std::io::BufWriter::new(f), data)
}

pub fn read_dataset_file(path: impl AsRef<Path>) -> Result<Vec<LabeledSample>> {
    read_dataset(std::fs::File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypercube::dist::ProductDistribution;

    fn cfg(noise: LabelNoise) -> PlantedDataConfig {
        PlantedDataConfig {
            n: 7,
            marginal: Marginal::uniform(7),
            planted: LinearThresholdFunction::majority(7),
            label_noise: noise,
        }
    }

    #[test]
    fn noiseless_labels_follow_planted() {
        let c = cfg(LabelNoise::None);
        for s in generate_dataset(&c, 2000, 4).unwrap() {
            assert_eq!(s.y, c.planted.eval_raw(s.x.as_slice()));
        }
    }

    #[test]
    fn rcn_rate_validation() {
        assert!(generate_dataset(&cfg(LabelNoise::Rcn { eta: 0.5 }), 10, 0).is_err());
        assert!(generate_dataset(&cfg(LabelNoise::Rcn { eta: -0.1 }), 10, 0).is_err());
    }

    #[test]
    fn rcn_disagreement_concentrates() {
        let c = cfg(LabelNoise::Rcn { eta: 0.1 });
        let count = 100_000;
        let data = generate_dataset(&c, count, 8).unwrap();
        let flips = data.iter().filter(|s| s.y != c.planted.eval_raw(s.x.as_slice())).count();
        let rate = flips as f64 / count as f64;
        let sd = (0.1f64 * 0.9 / count as f64).sqrt();
        assert!((rate - 0.1).abs() < 3.0 * sd, "{rate}");
    }

    #[test]
    fn boundary_noise_flips_the_band() {
        let c = cfg(LabelNoise::Boundary { width: 1.5 });
        for s in generate_dataset(&c, 500, 2).unwrap() {
            let m = c.planted.margin(s.x.as_slice());
            let clean = c.planted.eval_raw(s.x.as_slice());
            assert_eq!(s.y == clean, m.abs() >= 1.5);
        }
    }

    #[test]
    fn population_error_of_planted_is_noise_rate() {
        let c = cfg(LabelNoise::Rcn { eta: 0.15 });
        let e = population_error(&c.planted, &c).unwrap();
        assert!((e - 0.15).abs() < 1e-12);
        let mut neg = c.clone();
        neg.marginal = ProductDistribution::new(vec![0.2; 7]).unwrap().into();
        let flipped = LinearThresholdFunction::new(vec![-1.0; 7], 0.0).unwrap();
        // sign(0) never occurs for odd n, so the negated rule is always wrong on clean labels
        assert!((population_error(&flipped, &neg).unwrap() - 0.85).abs() < 1e-12);
    }

    #[test]
    fn file_round_trip_and_errors() {
        let data = generate_dataset(&cfg(LabelNoise::Rcn { eta: 0.2 }), 50, 3).unwrap();
        let mut buf = Vec::new();
        write_dataset(&mut buf, &data).unwrap();
        let text = format!("# header\n\n{}", String::from_utf8(buf).unwrap());
        assert_eq!(read_dataset(text.as_bytes()).unwrap(), data);
        assert!(matches!(read_dataset("1 -1 1\n".as_bytes()), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(read_dataset("1 1 ; 1\n1 ; 1\n".as_bytes()), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(read_dataset("1 2 ; 1\n".as_bytes()), Err(Error::Parse { .. })));
    }
}
