use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;

use clap::{Arg, ArgAction, ArgMatches, Command};

use triplet_kernels::eval::{purity, run_experiment, ExperimentConfig, OracleKind};
use triplet_kernels::kendall::tau_gram;
use triplet_kernels::kernels::KernelSpec;
use triplet_kernels::methods::{complete_linkage, kernel_kmeans, kernel_pca, KMeansConfig};
use triplet_kernels::synth::{
    euclidean_oracle, gaussian_mixture, mst_path_oracle, sample_triplets, Dataset, DissimilarityMatrix, MixtureConfig,
    SamplerConfig,
};
use triplet_kernels::{
    build_phi_k1, build_phi_k2, combine, gram, reduce_diagonal_dominance, Error, KernelMatrix, Result, TripletStore,
};

const MEANS: &str = "0:0;5:0;2.5:4.33";

/// `(key, default, help)`. An empty default means "not set".
type KeySpec = (&'static str, &'static str, &'static str);

const GEN_KEYS: &[KeySpec] = &[
    ("n", "300", "number of points"),
    ("means", MEANS, "mixture means, `x:y` separated by `;`"),
    ("stddev", "1", "standard deviation of every component"),
    ("oracle", "euclidean", "dissimilarity: euclidean or mst"),
    ("fraction", "0.1", "share of all comparisons to answer"),
    ("errprob", "0", "probability of flipping an answer"),
    ("seed", "0", "random seed"),
    ("dataset_out", "dataset.csv", "where to write the points"),
    ("triplets_out", "triplets.csv", "where to write the triplets"),
];

const KERNEL_KEYS: &[KeySpec] = &[
    ("triplets", "", "triplet file (a,b,c per line)"),
    ("n", "auto", "number of objects, or auto for largest index + 1"),
    ("kernel", "k1", "k1, k2, k3, or tau (exact, needs dataset)"),
    ("mu1", "1", "weight of k1 in k3"),
    ("mu2", "1", "weight of k2 in k3"),
    ("weighted", "false", "use vote balances instead of signs"),
    ("majority", "false", "resolve contradicting answers by majority first"),
    ("dominance_fix", "false", "subtract the smallest eigenvalue from the diagonal"),
    ("dataset", "", "dataset file, only for kernel=tau"),
    ("oracle", "euclidean", "dissimilarity for kernel=tau"),
    ("out", "kernel.csv", "where to write the kernel matrix"),
    ("features_out", "", "optional sparse feature dump"),
];

const CLUSTER_KEYS: &[KeySpec] = &[
    ("kernel", "kernel.csv", "kernel matrix file"),
    ("k", "3", "number of clusters"),
    ("restarts", "10", "random restarts"),
    ("max_iter", "100", "iteration cap per restart"),
    ("seed", "0", "random seed"),
    ("labels", "", "optional dataset file; purity is reported in the sidecar"),
    ("out", "clusters.csv", "where to write the assignment"),
];

const PCA_KEYS: &[KeySpec] = &[
    ("kernel", "kernel.csv", "kernel matrix file"),
    ("p", "2", "number of components"),
    ("out", "pca.csv", "where to write the projection"),
];

const LINKAGE_KEYS: &[KeySpec] = &[
    ("kernel", "kernel.csv", "kernel matrix file"),
    ("out", "dendrogram.csv", "where to write the merges"),
];

const EXPERIMENT_KEYS: &[KeySpec] = &[
    ("n", "300", "number of points per run"),
    ("means", MEANS, "mixture means, `x:y` separated by `;`"),
    ("stddev", "1", "standard deviation of every component"),
    ("oracle", "euclidean", "dissimilarity: euclidean or mst"),
    ("fractions", "0.1", "comma-separated triplet fractions"),
    ("errprobs", "0", "comma-separated error probabilities"),
    ("repeats", "20", "runs per cell"),
    ("kernels", "k1,k2,k3", "comma-separated kernels"),
    ("mu1", "1", "weight of k1 in k3"),
    ("mu2", "1", "weight of k2 in k3"),
    ("weighted", "false", "use vote balances instead of signs"),
    ("dominance_fix", "true", "subtract the smallest eigenvalue from the diagonal"),
    ("k", "3", "number of clusters"),
    ("restarts", "10", "k-means restarts"),
    ("max_iter", "100", "k-means iteration cap"),
    ("seed", "0", "random seed"),
    ("out", "results.csv", "purity table"),
    ("timings_out", "timings.csv", "kernel construction times"),
];

const COMMANDS: &[(&str, &str, &[KeySpec])] = &[
    ("gen", "Sample a Gaussian mixture and answer a random share of its triplet comparisons", GEN_KEYS),
    ("kernel", "Build a kernel matrix from a triplet file", KERNEL_KEYS),
    ("cluster", "Kernel k-means on a kernel matrix", CLUSTER_KEYS),
    ("pca", "Kernel PCA on a kernel matrix", PCA_KEYS),
    ("linkage", "Complete-linkage clustering on a kernel matrix", LINKAGE_KEYS),
    ("experiment", "Repeated clustering runs over a grid of fractions and error probabilities", EXPERIMENT_KEYS),
];

fn cli() -> Command {
    let mut cmd = Command::new("triplet-kernels")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Kernels and kernel methods from similarity triplets")
        .subcommand_required(true);
    for &(name, about, keys) in COMMANDS {
        let mut sub = Command::new(name).about(about).arg(
            Arg::new("config")
                .long("config")
                .value_name("FILE")
                .help("flat key=value file; flags override it"),
        );
        for &(key, default, help) in keys {
            let help = if default.is_empty() {
                help.to_string()
            } else {
                format!("{help} [default: {default}]")
            };
            let mut arg = Arg::new(key)
                .long(key.replace('_', "-"))
                .value_name("VALUE")
                .action(ArgAction::Set)
                .help(help);
            if default == "true" || default == "false" {
                arg = arg.num_args(0..=1).default_missing_value("true");
            }
            sub = sub.arg(arg);
        }
        cmd = cmd.subcommand(sub);
    }
    cmd
}

/// Resolved settings for one command: defaults, then the config file, then
/// flags.
struct Settings {
    values: BTreeMap<String, String>,
    explicit: BTreeSet<String>,
}

impl Settings {
    fn resolve(keys: &[KeySpec], m: &ArgMatches) -> Result<Self> {
        let mut values: BTreeMap<String, String> =
            keys.iter().map(|&(k, d, _)| (k.to_string(), d.to_string())).collect();
        let mut explicit = BTreeSet::new();
        if let Some(path) = m.get_one::<String>("config") {
            for (key, value) in read_config(path)? {
                if !values.contains_key(&key) {
                    return Err(Error::InvalidParameter(format!("unknown key {key:?} in {path}")));
                }
                explicit.insert(key.clone());
                values.insert(key, value);
            }
        }
        for &(key, _, _) in keys {
            if let Some(v) = m.get_one::<String>(key) {
                explicit.insert(key.to_string());
                values.insert(key.to_string(), v.clone());
            }
        }
        Ok(Settings { values, explicit })
    }

    fn raw(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or("")
    }

    fn required(&self, key: &str) -> Result<&str> {
        match self.raw(key) {
            "" => Err(Error::InvalidParameter(format!("missing required key {key}"))),
            v => Ok(v),
        }
    }

    fn optional(&self, key: &str) -> Option<&str> {
        Some(self.raw(key)).filter(|v| !v.is_empty())
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let v = self.raw(key);
        v.trim()
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("{key} = {v:?} cannot be parsed")))
    }

    fn flag(&self, key: &str) -> Result<bool> {
        match self.raw(key).trim() {
            "true" | "1" | "yes" => Ok(true),
            "false" | "0" | "no" => Ok(false),
            v => Err(Error::InvalidParameter(format!("{key} = {v:?} is not a boolean"))),
        }
    }

    fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Vec<T>> {
        self.raw(key)
            .split(',')
            .map(|v| {
                v.trim()
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("{key}: cannot parse {v:?}")))
            })
            .collect()
    }

    fn mixture(&self) -> Result<MixtureConfig> {
        Ok(MixtureConfig {
            n: self.parse("n")?,
            means: parse_means(self.raw("means"))?,
            stddev: self.parse("stddev")?,
        })
    }

    /// Writes every resolved key plus `extra` to `<out>.meta`, sorted.
    fn write_sidecar(&self, out: &str, extra: &[(String, String)]) -> Result<()> {
        let mut all = self.values.clone();
        for (k, v) in extra {
            all.insert(k.clone(), v.clone());
        }
        let mut w = create(&format!("{out}.meta"))?;
        for (k, v) in &all {
            writeln!(w, "{k}={v}")?;
        }
        w.flush()?;
        Ok(())
    }
}

fn read_config(path: &str) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{path}: {e}")))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: i + 1,
            reason: "expected key=value".into(),
        })?;
        out.push((k.trim().replace('-', "_"), v.trim().to_string()));
    }
    Ok(out)
}

fn parse_means(s: &str) -> Result<Vec<Vec<f64>>> {
    s.split(';')
        .map(|m| {
            m.split(':')
                .map(|x| {
                    x.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::InvalidParameter(format!("bad mean coordinate {x:?}")))
                })
                .collect()
        })
        .collect()
}

fn open(path: &str) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::Io(format!("{path}: {e}")))
}

fn create(path: &str) -> Result<BufWriter<File>> {
    if let Some(dir) = Path::new(path).parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io(format!("{path}: {e}")))
}

fn save(path: &str, write: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let mut w = create(path)?;
    write(&mut w)?;
    w.flush()?;
    Ok(())
}

fn oracle_for(kind: OracleKind, data: &Dataset) -> Result<DissimilarityMatrix> {
    match kind {
        OracleKind::Euclidean => Ok(euclidean_oracle(data)),
        OracleKind::MstPath => mst_path_oracle(data),
    }
}

fn pair(k: &str, v: impl ToString) -> (String, String) {
    (k.to_string(), v.to_string())
}

fn cmd_gen(s: &Settings) -> Result<()> {
    let seed: u64 = s.parse("seed")?;
    let data = gaussian_mixture(&s.mixture()?, seed)?;
    let oracle = oracle_for(OracleKind::parse(s.raw("oracle"))?, &data)?;
    let store = sample_triplets(
        &oracle,
        &SamplerConfig {
            fraction: s.parse("fraction")?,
            errprob: s.parse("errprob")?,
            seed: triplet_kernels::rng::derive(seed, &[1]),
        },
    )?;
    let dataset_out = s.required("dataset_out")?;
    let triplets_out = s.required("triplets_out")?;
    save(dataset_out, |w| data.write_to(w))?;
    save(triplets_out, |w| store.write_to(w))?;
    let extra = [pair("triplet_count", store.len())];
    s.write_sidecar(dataset_out, &extra)?;
    s.write_sidecar(triplets_out, &extra)
}

fn cmd_kernel(s: &Settings) -> Result<()> {
    let name = s.raw("kernel").trim();
    if name != "k3" {
        if let Some(k) = ["mu1", "mu2"].into_iter().find(|k| s.explicit.contains(*k)) {
            return Err(Error::InvalidParameter(format!("{k} only applies to kernel=k3")));
        }
    }
    let weighted = s.flag("weighted")?;
    let out = s.required("out")?;
    let mut extra = Vec::new();

    let kernel = if name == "tau" {
        let data = Dataset::read_from(open(s.required("dataset")?)?)?;
        tau_gram(&oracle_for(OracleKind::parse(s.raw("oracle"))?, &data)?)?
    } else {
        let spec = KernelSpec::parse(name, s.parse("mu1")?, s.parse("mu2")?)?;
        let n = match s.raw("n").trim() {
            "auto" => None,
            _ => Some(s.parse("n")?),
        };
        let mut store = TripletStore::read_from(open(s.required("triplets")?)?, n)?;
        if s.flag("majority")? {
            store = store.resolve_majority();
        }
        extra.push(pair("objects", store.n()));
        extra.push(pair("triplet_count", store.len()));
        let phi1 = match spec {
            KernelSpec::K2 => None,
            _ => Some(build_phi_k1(&store, weighted)?),
        };
        let phi2 = match spec {
            KernelSpec::K1 => None,
            _ => Some(build_phi_k2(&store, weighted)?),
        };
        if let Some(path) = s.optional("features_out") {
            save(path, |w| {
                for phi in phi1.iter().chain(&phi2) {
                    phi.write_to(&mut *w)?;
                }
                Ok(())
            })?;
        }
        match (spec, phi1, phi2) {
            (KernelSpec::K3 { mu1, mu2 }, Some(p1), Some(p2)) => combine(&gram(&p1), &gram(&p2), mu1, mu2)?,
            (_, Some(p1), None) => gram(&p1),
            (_, None, Some(p2)) => gram(&p2),
            _ => unreachable!("every kernel spec builds at least one map"),
        }
    };
    let kernel = if s.flag("dominance_fix")? {
        reduce_diagonal_dominance(&kernel)?
    } else {
        kernel
    };
    save(out, |w| kernel.write_to(w))?;
    extra.extend(kernel.provenance.to_pairs());
    s.write_sidecar(out, &extra)
}

fn load_kernel(s: &Settings) -> Result<KernelMatrix> {
    let kernel = KernelMatrix::read_from(open(s.required("kernel")?)?)?;
    kernel.check_symmetric()?;
    Ok(kernel)
}

fn cmd_cluster(s: &Settings) -> Result<()> {
    let kernel = load_kernel(s)?;
    let res = kernel_kmeans(
        &kernel,
        &KMeansConfig {
            k: s.parse("k")?,
            restarts: s.parse("restarts")?,
            max_iter: s.parse("max_iter")?,
            seed: s.parse("seed")?,
        },
    )?;
    let mut extra = vec![
        pair("objective", format!("{:.16e}", res.objective)),
        pair("iterations", res.iterations),
    ];
    if let Some(path) = s.optional("labels") {
        let data = Dataset::read_from(open(path)?)?;
        let p = purity(&res.assignment, &data.labels)?;
        extra.push(pair("purity", format!("{:.16e}", p.value)));
    }
    let out = s.required("out")?;
    save(out, |w| res.write_to(w))?;
    s.write_sidecar(out, &extra)
}

fn cmd_pca(s: &Settings) -> Result<()> {
    let kernel = load_kernel(s)?;
    let proj = kernel_pca(&kernel, s.parse("p")?)?;
    let out = s.required("out")?;
    save(out, |w| proj.write_to(w))?;
    let eig: Vec<String> = proj.eigenvalues.iter().map(|l| format!("{l:.16e}")).collect();
    s.write_sidecar(out, &[pair("eigenvalues", eig.join(","))])
}

fn cmd_linkage(s: &Settings) -> Result<()> {
    let kernel = load_kernel(s)?;
    let dendrogram = complete_linkage(&kernel)?;
    let out = s.required("out")?;
    save(out, |w| dendrogram.write_to(w))?;
    s.write_sidecar(out, &[pair("merges", dendrogram.merges.len())])
}

fn cmd_experiment(s: &Settings) -> Result<()> {
    let (mu1, mu2) = (s.parse("mu1")?, s.parse("mu2")?);
    let kernels = s
        .raw("kernels")
        .split(',')
        .map(|k| KernelSpec::parse(k, mu1, mu2))
        .collect::<Result<Vec<_>>>()?;
    let cfg = ExperimentConfig {
        mixture: s.mixture()?,
        oracle: OracleKind::parse(s.raw("oracle"))?,
        fractions: s.list("fractions")?,
        errprobs: s.list("errprobs")?,
        repeats: s.parse("repeats")?,
        kernels,
        weighted: s.flag("weighted")?,
        dominance_fix: s.flag("dominance_fix")?,
        kmeans: KMeansConfig {
            k: s.parse("k")?,
            restarts: s.parse("restarts")?,
            max_iter: s.parse("max_iter")?,
            seed: 0,
        },
        seed: s.parse("seed")?,
    };
    let res = run_experiment(&cfg)?;
    let out = s.required("out")?;
    save(out, |w| res.write_results(w))?;
    save(s.required("timings_out")?, |w| res.write_timings(w))?;
    s.write_sidecar(out, &[])
}

fn run(m: &ArgMatches) -> Result<()> {
    let (name, sub) = m.subcommand().expect("subcommand is required");
    let &(_, _, keys) = COMMANDS.iter().find(|c| c.0 == name).expect("known subcommand");
    let s = Settings::resolve(keys, sub)?;
    match name {
        "gen" => cmd_gen(&s),
        "kernel" => cmd_kernel(&s),
        "cluster" => cmd_cluster(&s),
        "pca" => cmd_pca(&s),
        "linkage" => cmd_linkage(&s),
        "experiment" => cmd_experiment(&s),
        _ => unreachable!(),
    }
}

fn main() -> ExitCode {
    let matches = match cli().try_get_matches() {
        Ok(m) => m,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("error kind=Usage message={first:?}");
            return ExitCode::from(2);
        }
    };
    match run(&matches) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error kind={} message={:?}", e.kind(), e.to_string());
            ExitCode::FAILURE
        }
    }
}
