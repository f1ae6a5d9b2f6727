//! Synthetic data: labeled point clouds, dissimilarity oracles on them and
//! the simulation of (noisy) triplet answers.

mod oracle;
mod sampler;

pub use oracle::{euclidean_oracle, mst_path_oracle, Dissimilarity, DissimilarityMatrix};
pub use sampler::{comparison_at, comparison_index, sample_size, sample_triplets, total_comparisons, SamplerConfig};

use std::io::{BufRead, Write};

use rand_distr::{Distribution, Normal};
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng;

/// Labeled points in `R^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub points: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
}

impl Dataset {
    pub fn new(points: Vec<Vec<f64>>, labels: Vec<usize>) -> Result<Self> {
        if points.len() != labels.len() {
            return Err(Error::LengthMismatch {
                left: points.len(),
                right: labels.len(),
            });
        }
        if let Some(first) = points.first() {
            let m = first.len();
            if let Some(bad) = points.iter().find(|p| p.len() != m) {
                return Err(Error::DimensionMismatch {
                    left: m,
                    right: bad.len(),
                });
            }
        }
        Ok(Dataset { points, labels })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }

    /// Number of classes, i.e. one more than the largest label.
    pub fn classes(&self) -> usize {
        self.labels.iter().max().map_or(0, |&l| l + 1)
    }

    /// Writes the `n,m,L` header followed by one `x1,...,xm,label` line per
    /// point. Coordinates use the shortest representation that round-trips.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{},{},{}", self.len(), self.dim(), self.classes())?;
        for (p, l) in self.points.iter().zip(&self.labels) {
            for x in p {
                write!(w, "{x},")?;
            }
            writeln!(w, "{l}")?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        let header = loop {
            match lines.next() {
                Some((_, line)) => {
                    let line = line?;
                    if !line.trim().is_empty() && !line.trim_start().starts_with('#') {
                        break line;
                    }
                }
                None => return Err(Error::EmptyInput),
            }
        };
        let head: Vec<usize> = header
            .split(',')
            .map(|f| f.trim().parse())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| parse_err(1, "header must be n,m,L"))?;
        let [n, m, classes] = head[..] else {
            return Err(parse_err(1, "header must be n,m,L"));
        };
        let mut points = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        for (i, line) in lines {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = t.split(',').collect();
            if fields.len() != m + 1 {
                return Err(parse_err(i + 1, &format!("expected {} fields", m + 1)));
            }
            let coords = fields[..m]
                .iter()
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| parse_err(i + 1, "bad coordinate"))?;
            let label: usize = fields[m].trim().parse().map_err(|_| parse_err(i + 1, "bad label"))?;
            if label >= classes {
                return Err(parse_err(i + 1, "label outside 0..L"));
            }
            points.push(coords);
            labels.push(label);
        }
        if points.len() != n {
            return Err(Error::LengthMismatch {
                left: n,
                right: points.len(),
            });
        }
        Dataset::new(points, labels)
    }
}

fn parse_err(line: usize, reason: &str) -> Error {
    Error::Parse {
        line,
        reason: reason.to_string(),
    }
}

/// Isotropic Gaussian mixture with equal weights.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureConfig {
    pub n: usize,
    pub means: Vec<Vec<f64>>,
    pub stddev: f64,
}

impl Default for MixtureConfig {
    /// Three well separated blobs in the plane: centers on an equilateral
    /// triangle with side 5, unit standard deviation.
    fn default() -> Self {
        MixtureConfig {
            n: 300,
            means: vec![vec![0.0, 0.0], vec![5.0, 0.0], vec![2.5, 4.33]],
            stddev: 1.0,
        }
    }
}

/// Draws `cfg.n` points; each point picks its component uniformly at random
/// and its label is the component index.
pub fn gaussian_mixture(cfg: &MixtureConfig, seed: u64) -> Result<Dataset> {
    if cfg.means.is_empty() {
        return Err(Error::InvalidParameter("mixture needs at least one mean".into()));
    }
    let dim = cfg.means[0].len();
    if cfg.means.iter().any(|m| m.len() != dim) {
        return Err(Error::InvalidParameter("mixture means differ in dimension".into()));
    }
    if !(cfg.stddev >= 0.0 && cfg.stddev.is_finite()) {
        return Err(Error::InvalidParameter(format!("stddev {} must be >= 0", cfg.stddev)));
    }
    let normal = Normal::new(0.0, cfg.stddev).expect("validated stddev");
    let mut rng = rng::seeded(seed);
    let mut points = Vec::with_capacity(cfg.n);
    let mut labels = Vec::with_capacity(cfg.n);
    for _ in 0..cfg.n {
        let c = rng.random_range(0..cfg.means.len());
        let p = cfg.means[c].iter().map(|&mu| mu + normal.sample(&mut rng)).collect();
        points.push(p);
        labels.push(c);
    }
    Dataset::new(points, labels)
}
