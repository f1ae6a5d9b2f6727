//! Clustering quality and the repeated-run experiment driver.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::{triplet_kernel, KernelSpec};
use crate::methods::{kernel_kmeans, KMeansConfig};
use crate::rng;
use crate::synth::{euclidean_oracle, gaussian_mixture, mst_path_oracle, sample_triplets, MixtureConfig, SamplerConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PurityScore {
    pub value: f64,
    /// Number of distinct clusters in the assignment.
    pub k: usize,
    pub n: usize,
}

/// Share of objects that belong to the majority class of their cluster.
pub fn purity(assignment: &[usize], labels: &[usize]) -> Result<PurityScore> {
    if assignment.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: assignment.len(),
            right: labels.len(),
        });
    }
    if assignment.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut table: BTreeMap<usize, BTreeMap<usize, usize>> = BTreeMap::new();
    for (&c, &l) in assignment.iter().zip(labels) {
        *table.entry(c).or_default().entry(l).or_default() += 1;
    }
    let hits: usize = table.values().map(|row| row.values().copied().max().unwrap_or(0)).sum();
    Ok(PurityScore {
        value: hits as f64 / assignment.len() as f64,
        k: table.len(),
        n: assignment.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleKind {
    Euclidean,
    MstPath,
}

impl OracleKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "euclidean" => Ok(OracleKind::Euclidean),
            "mst" => Ok(OracleKind::MstPath),
            other => Err(Error::InvalidParameter(format!("unknown oracle {other:?}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            OracleKind::Euclidean => "euclidean",
            OracleKind::MstPath => "mst",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub mixture: MixtureConfig,
    pub oracle: OracleKind,
    pub fractions: Vec<f64>,
    pub errprobs: Vec<f64>,
    pub repeats: usize,
    pub kernels: Vec<KernelSpec>,
    pub weighted: bool,
    pub dominance_fix: bool,
    /// `k`, restarts and iteration cap; the seed is replaced per run.
    pub kmeans: KMeansConfig,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            mixture: MixtureConfig::default(),
            oracle: OracleKind::Euclidean,
            fractions: vec![0.1],
            errprobs: vec![0.0],
            repeats: 20,
            kernels: vec![KernelSpec::K1, KernelSpec::K2, KernelSpec::K3 { mu1: 1.0, mu2: 1.0 }],
            weighted: false,
            dominance_fix: true,
            kmeans: KMeansConfig::default(),
            seed: 0,
        }
    }
}

/// Aggregate over all repeats of one `(fraction, errprob, kernel)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub fraction: f64,
    pub errprob: f64,
    pub kernel: KernelSpec,
    pub purities: Vec<f64>,
    /// Wall-clock seconds spent building each kernel (features, Gram and
    /// dominance fix).
    pub seconds: Vec<f64>,
}

impl CellResult {
    pub fn mean_purity(&self) -> f64 {
        mean(&self.purities)
    }

    pub fn std_purity(&self) -> f64 {
        let m = self.mean_purity();
        (self.purities.iter().map(|p| (p - m) * (p - m)).sum::<f64>() / self.purities.len() as f64).sqrt()
    }

    pub fn mean_seconds(&self) -> f64 {
        mean(&self.seconds)
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub cells: Vec<CellResult>,
}

impl ExperimentResult {
    pub fn cell(&self, fraction: f64, errprob: f64, kernel: &str) -> Option<&CellResult> {
        self.cells
            .iter()
            .find(|c| c.fraction == fraction && c.errprob == errprob && c.kernel.name() == kernel)
    }

    /// Headered CSV, one row per cell. Contains no timings, so identical
    /// configurations give identical bytes.
    pub fn write_results<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "kernel,oracle,n,fraction,errprob,repeats,mean_purity,std_purity")?;
        for c in &self.cells {
            writeln!(
                w,
                "{},{},{},{},{},{},{:.6},{:.6}",
                c.kernel.name(),
                self.config.oracle.name(),
                self.config.mixture.n,
                c.fraction,
                c.errprob,
                c.purities.len(),
                c.mean_purity(),
                c.std_purity()
            )?;
        }
        Ok(())
    }

    /// Headered CSV of mean kernel construction time per cell.
    pub fn write_timings<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "kernel,oracle,n,fraction,errprob,repeats,mean_kernel_seconds")?;
        for c in &self.cells {
            writeln!(
                w,
                "{},{},{},{},{},{},{:.6}",
                c.kernel.name(),
                self.config.oracle.name(),
                self.config.mixture.n,
                c.fraction,
                c.errprob,
                c.seconds.len(),
                c.mean_seconds()
            )?;
        }
        Ok(())
    }
}

struct RunOutcome {
    purity: f64,
    seconds: f64,
}

/// Runs the clustering protocol for every cell of the grid.
///
/// Run `r` draws its point cloud, its comparison subset and its k-means
/// seeds from streams keyed by `(seed, r)` only. All cells of one run
/// therefore share the same points and the same comparisons, and differ only
/// in how many comparisons are kept and which answers are flipped.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    if cfg.repeats == 0 || cfg.fractions.is_empty() || cfg.errprobs.is_empty() || cfg.kernels.is_empty() {
        return Err(Error::InvalidParameter("experiment grid is empty".into()));
    }
    let cells: Vec<(f64, f64)> = cfg
        .fractions
        .iter()
        .flat_map(|&f| cfg.errprobs.iter().map(move |&e| (f, e)))
        .collect();

    let runs: Vec<Vec<RunOutcome>> = (0..cfg.repeats)
        .into_par_iter()
        .map(|r| run_once(cfg, &cells, r as u64))
        .collect::<Result<_>>()?;

    let mut out = Vec::new();
    for (ci, &(fraction, errprob)) in cells.iter().enumerate() {
        for (ki, &kernel) in cfg.kernels.iter().enumerate() {
            let slot = ci * cfg.kernels.len() + ki;
            out.push(CellResult {
                fraction,
                errprob,
                kernel,
                purities: runs.iter().map(|run| run[slot].purity).collect(),
                seconds: runs.iter().map(|run| run[slot].seconds).collect(),
            });
        }
    }
    Ok(ExperimentResult {
        config: cfg.clone(),
        cells: out,
    })
}

fn run_once(cfg: &ExperimentConfig, cells: &[(f64, f64)], run: u64) -> Result<Vec<RunOutcome>> {
    let data = gaussian_mixture(&cfg.mixture, rng::derive(cfg.seed, &[run, 0]))?;
    let oracle = match cfg.oracle {
        OracleKind::Euclidean => euclidean_oracle(&data),
        OracleKind::MstPath => mst_path_oracle(&data)?,
    };
    let kmeans = KMeansConfig {
        seed: rng::derive(cfg.seed, &[run, 2]),
        ..cfg.kmeans
    };
    let mut out = Vec::with_capacity(cells.len() * cfg.kernels.len());
    for &(fraction, errprob) in cells {
        let sampler = SamplerConfig {
            fraction,
            errprob,
            seed: rng::derive(cfg.seed, &[run, 1]),
        };
        let store = sample_triplets(&oracle, &sampler)?;
        for &spec in &cfg.kernels {
            let start = Instant::now();
            let kernel = triplet_kernel(&store, spec, cfg.weighted, cfg.dominance_fix)?;
            let seconds = start.elapsed().as_secs_f64();
            let clustering = kernel_kmeans(&kernel, &kmeans)?;
            out.push(RunOutcome {
                purity: purity(&clustering.assignment, &data.labels)?.value,
                seconds,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn purity_examples() {
        assert_eq!(purity(&[2, 2, 0, 0, 1], &[0, 0, 1, 1, 2]).unwrap().value, 1.0);
        let labels: Vec<usize> = (0..100).map(|i| if i < 50 { 0 } else if i < 80 { 1 } else { 2 }).collect();
        let one = purity(&[0; 100], &labels).unwrap();
        assert_eq!((one.value, one.k), (0.5, 1));
        let p = purity(&[0, 0, 1, 1, 1, 1], &[0, 0, 0, 1, 1, 1]).unwrap();
        assert!((p.value - 5.0 / 6.0).abs() < 1e-15);
        assert_eq!(purity(&[0, 1], &[0]), Err(Error::LengthMismatch { left: 2, right: 1 }));
        assert_eq!(purity(&[], &[]), Err(Error::EmptyInput));
    }

    proptest! {
        #[test]
        fn purity_bounds_and_relabeling(
            pairs in prop::collection::vec((0usize..5, 0usize..4), 1..60),
            shift in 1usize..7,
        ) {
            let (a, l): (Vec<usize>, Vec<usize>) = pairs.into_iter().unzip();
            let p = purity(&a, &l).unwrap();
            prop_assert!(p.value <= 1.0);
            prop_assert!(p.value >= p.k as f64 / p.n as f64);
            let a2: Vec<usize> = a.iter().map(|c| (c + shift) * 3).collect();
            let l2: Vec<usize> = l.iter().map(|c| 10 - c).collect();
            prop_assert_eq!(purity(&a2, &l2).unwrap().value, p.value);
        }
    }

    #[test]
    fn single_cell_grid() {
        let cfg = ExperimentConfig {
            mixture: MixtureConfig { n: 24, ..Default::default() },
            repeats: 1,
            fractions: vec![0.5],
            kernels: vec![KernelSpec::K1],
            kmeans: KMeansConfig { restarts: 3, ..Default::default() },
            ..Default::default()
        };
        let res = run_experiment(&cfg).unwrap();
        assert_eq!(res.cells.len(), 1);
        assert_eq!(res.cells[0].purities.len(), 1);
        let mut buf = Vec::new();
        res.write_results(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.lines().nth(1).unwrap().starts_with("k1,euclidean,24,0.5,0,1,"));
        assert_eq!(run_experiment(&cfg).unwrap().cells[0].purities, res.cells[0].purities);
    }

    #[test]
    fn errprob_one_mirrors_errprob_zero() {
        let cfg = ExperimentConfig {
            mixture: MixtureConfig { n: 30, ..Default::default() },
            repeats: 2,
            fractions: vec![1.0],
            errprobs: vec![0.0, 1.0],
            kernels: vec![KernelSpec::K1, KernelSpec::K2],
            kmeans: KMeansConfig { restarts: 3, ..Default::default() },
            ..Default::default()
        };
        let res = run_experiment(&cfg).unwrap();
        for k in ["k1", "k2"] {
            assert_eq!(res.cell(1.0, 0.0, k).unwrap().purities, res.cell(1.0, 1.0, k).unwrap().purities);
        }
    }
}
