//! Config parsing, parallel trial sweeps and the CSV artifacts.
//!
//! Config files are `key = value` lines; `#` starts a comment. Recognized keys:
//! `n_grid` (comma separated, strictly increasing), `alpha`, `beta`, `a1`,
//! `a2`, `gamma`, `delta`, `eta_margin`, `eps_c`, `trials`, `scheme`, `seed`,
//! plus `eta` (fixed traffic-cell exponent), `w` and `output_dir`.

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use log::warn;
use rayon::prelude::*;

use crate::analysis::{fit_loglog, fit_scaling, theoretical_bounds, BoundSet, Scaling, ScalingFit};
use crate::error::{Error, Result};
use crate::metrics::{outage_fraction, OutageCause, SimResult};
use crate::model::NetworkConfig;
use crate::num::Real;
use crate::sim::{PreparedSize, Scheme, SchemeParams};

/// Environment variable that overrides the worker count.
pub const WORKERS_ENV: &str = "D2DSIM_WORKERS";

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec<F: Real> {
    pub n_grid: Vec<u64>,
    /// Template; `n` is replaced by each grid value.
    pub config: NetworkConfig<F>,
    pub params: SchemeParams<F>,
    pub trials: u64,
    pub output_dir: PathBuf,
}

impl<F: Real> ExperimentSpec<F> {
    pub fn parse(text: &str) -> Result<Self> {
        let mut seen: HashMap<String, (usize, String)> = HashMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body.split_once('=').ok_or_else(|| Error::Parse {
                line,
                message: format!("expected key = value, got {body:?}"),
            })?;
            let key = key.trim().to_ascii_lowercase();
            if !KEYS.contains(&key.as_str()) {
                return Err(Error::Parse {
                    line,
                    message: format!("unknown key {key:?}"),
                });
            }
            if let Some((first, _)) = seen.get(&key) {
                return Err(Error::Parse {
                    line,
                    message: format!("duplicate key {key:?} (first set on line {first})"),
                });
            }
            seen.insert(key, (line, value.trim().to_string()));
        }

        let req = |key: &str| {
            seen.get(key)
                .ok_or_else(|| Error::InvalidConfig(format!("missing required key {key:?}")))
        };
        let n_grid = {
            let (line, v) = req("n_grid")?;
            let grid = v
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(|s| parse_value::<u64>(*line, "n_grid", s))
                .collect::<Result<Vec<_>>>()?;
            if grid.is_empty() {
                return Err(Error::Parse {
                    line: *line,
                    message: "n_grid is empty".into(),
                });
            }
            if grid.windows(2).any(|w| w[0] >= w[1]) || grid[0] == 0 {
                return Err(Error::Parse {
                    line: *line,
                    message: "n_grid must be positive and strictly increasing".into(),
                });
            }
            grid
        };
        let real = |key: &str| -> Result<F> {
            let (line, v) = req(key)?;
            parse_value::<f64>(*line, key, v).map(F::lit)
        };
        let opt_real = |key: &str, default: f64| -> Result<F> {
            match seen.get(key) {
                Some((line, v)) => parse_value::<f64>(*line, key, v).map(F::lit),
                None => Ok(F::lit(default)),
            }
        };
        let mut config = NetworkConfig::new(n_grid[0], real("alpha")?, real("beta")?, real("a1")?, real("a2")?);
        config.delta = opt_real("delta", 1.0)?;
        config.eta_margin = opt_real("eta_margin", 0.05)?;
        config.w = opt_real("w", 1.0)?;
        config.seed = match seen.get("seed") {
            Some((line, v)) => parse_value(*line, "seed", v)?,
            None => 0,
        };
        let trials = match seen.get("trials") {
            Some((line, v)) => parse_value(*line, "trials", v)?,
            None => 1,
        };
        if trials == 0 {
            let line = seen["trials"].0;
            return Err(Error::Parse {
                line,
                message: "trials must be at least 1".into(),
            });
        }
        let scheme = match seen.get("scheme") {
            Some((line, v)) => v.parse::<Scheme>().map_err(|e| Error::Parse {
                line: *line,
                message: e.to_string(),
            })?,
            None => Scheme::Multihop,
        };
        let eta = match seen.get("eta") {
            Some((line, v)) => Some(F::lit(parse_value::<f64>(*line, "eta", v)?)),
            None => None,
        };
        let params = SchemeParams {
            scheme,
            gamma: opt_real("gamma", 0.0)?,
            eps_c: opt_real("eps_c", 0.1)?,
            eta,
        };
        let output_dir = seen
            .get("output_dir")
            .map(|(_, v)| PathBuf::from(v))
            .unwrap_or_else(|| PathBuf::from("out"));
        let spec = ExperimentSpec {
            n_grid,
            config,
            params,
            trials,
            output_dir,
        };
        spec.prepare()?;
        Ok(spec)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let mut text = String::new();
        File::open(path)
            .and_then(|mut f| f.read_to_string(&mut text))
            .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Per-`n` setup; surfaces every scheme precondition before any trial runs.
    pub fn prepare(&self) -> Result<Vec<PreparedSize<F>>> {
        self.n_grid
            .iter()
            .map(|&n| PreparedSize::new(self.config.with_n(n), self.params))
            .collect()
    }

    pub fn bounds(&self) -> Result<BoundSet<F>> {
        theoretical_bounds(&self.config, Some(self.params.gamma))
    }

    /// Achievable exponent the fitted slope is compared against.
    pub fn reference_slope(&self) -> Result<Option<F>> {
        let b = self.bounds()?;
        Ok(match self.params.scheme {
            Scheme::Multihop | Scheme::CentralizedGlobal => b.multihop_achievable.exponent(),
            Scheme::SingleHop => b.singlehop_achievable.exponent(),
            Scheme::MultihopImproved => b.improved,
        })
    }
}

const KEYS: [&str; 15] = [
    "n_grid",
    "alpha",
    "beta",
    "a1",
    "a2",
    "gamma",
    "delta",
    "eta_margin",
    "eps_c",
    "trials",
    "scheme",
    "seed",
    "eta",
    "w",
    "output_dir",
];

fn parse_value<T: FromStr>(line: usize, key: &str, v: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    v.trim().parse().map_err(|e: T::Err| Error::Parse {
        line,
        message: format!("{key}: cannot parse {v:?}: {e}"),
    })
}

/// Worker count from [`WORKERS_ENV`], if set to a positive integer.
pub fn workers_from_env() -> Result<Option<usize>> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(k) if k > 0 => Ok(Some(k)),
            _ => Err(Error::InvalidConfig(format!(
                "{WORKERS_ENV} must be a positive integer (got {v:?})"
            ))),
        },
        Err(_) => Ok(None),
    }
}

/// Results of a sweep, sorted by `(n, trial)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput<F: Real> {
    pub scheme: Scheme,
    pub seed: u64,
    pub results: Vec<SimResult<F>>,
    pub runtime_ms: Vec<f64>,
    pub reference_slope: Option<F>,
}

/// Runs every `(n, trial)` of `spec` on a pool of `workers` threads
/// (rayon's default when `None`).
pub fn run_experiment<F: Real>(spec: &ExperimentSpec<F>, workers: Option<usize>) -> Result<ExperimentOutput<F>> {
    let prepared = spec.prepare()?;
    let jobs: Vec<(usize, u64)> = (0..prepared.len())
        .flat_map(|k| (0..spec.trials).map(move |t| (k, t)))
        .collect();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        builder = builder.num_threads(w);
    }
    let pool = builder.build().map_err(|e| Error::Io(format!("worker pool: {e}")))?;
    let timed: Vec<(SimResult<F>, f64)> = pool.install(|| {
        jobs.par_iter()
            .map(|&(k, t)| {
                let start = Instant::now();
                let r = prepared[k].run_trial(t)?;
                Ok((r, start.elapsed().as_secs_f64() * 1e3))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let (mut results, mut runtime_ms): (Vec<_>, Vec<_>) = timed.into_iter().unzip();
    // already in (n, trial) order; keep the contract explicit
    let mut order: Vec<usize> = (0..results.len()).collect();
    order.sort_by_key(|&i| (results[i].n, results[i].trial));
    results = order.iter().map(|&i| results[i]).collect();
    runtime_ms = order.iter().map(|&i| runtime_ms[i]).collect();
    Ok(ExperimentOutput {
        scheme: spec.params.scheme,
        seed: spec.config.seed,
        results,
        runtime_ms,
        reference_slope: spec.reference_slope()?,
    })
}

/// One row of `results.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow<F: Real> {
    pub scheme: Scheme,
    pub seed: u64,
    pub result: SimResult<F>,
    pub reference_slope: Option<F>,
}

const RESULT_HEADER: [&str; 12] = [
    "n",
    "trial",
    "scheme",
    "seed",
    "t_n",
    "aggregate",
    "l_max",
    "outage_cause",
    "max_sources",
    "unserved",
    "served_rate",
    "ref_slope",
];

fn opt<F: Real>(x: Option<F>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

impl<F: Real> ExperimentOutput<F> {
    pub fn rows(&self) -> impl Iterator<Item = ResultRow<F>> + '_ {
        self.results.iter().map(|r| ResultRow {
            scheme: self.scheme,
            seed: self.seed,
            result: *r,
            reference_slope: self.reference_slope,
        })
    }

    /// Writes `results.csv`, `timings.csv`, `summary.csv` and `fit.csv`
    /// into `dir`.
    pub fn write_all(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let rows: Vec<_> = self.rows().collect();
        write_results(&rows, BufWriter::new(File::create(dir.join("results.csv"))?))?;
        let mut w = csv::Writer::from_writer(BufWriter::new(File::create(dir.join("timings.csv"))?));
        w.write_record(["n", "trial", "runtime_ms"])?;
        for (r, ms) in self.results.iter().zip(&self.runtime_ms) {
            w.write_record([r.n.to_string(), r.trial.to_string(), format!("{ms:.3}")])?;
        }
        w.flush()?;
        write_summary(&rows, BufWriter::new(File::create(dir.join("summary.csv"))?))?;
        write_fit(&rows, BufWriter::new(File::create(dir.join("fit.csv"))?))?;
        Ok(())
    }
}

pub fn write_results<F: Real, W: Write>(rows: &[ResultRow<F>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RESULT_HEADER)?;
    for row in rows {
        let r = &row.result;
        w.write_record([
            r.n.to_string(),
            r.trial.to_string(),
            row.scheme.to_string(),
            row.seed.to_string(),
            r.throughput.to_string(),
            r.aggregate.to_string(),
            r.l_max.to_string(),
            r.outage.to_string(),
            r.max_sources_per_node.to_string(),
            r.unserved_count.to_string(),
            r.served_rate.to_string(),
            opt(row.reference_slope),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_results<F: Real, R: Read>(input: R) -> Result<Vec<ResultRow<F>>> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers()?.clone();
    if header.iter().ne(RESULT_HEADER) {
        return Err(Error::Parse {
            line: 1,
            message: format!("unexpected results header {:?}", header.iter().collect::<Vec<_>>()),
        });
    }
    let mut rows = Vec::new();
    for (k, rec) in rd.records().enumerate() {
        let rec = rec?;
        let line = k + 2;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let real = |i: usize| parse_value::<f64>(line, RESULT_HEADER[i], field(i)).map(F::lit);
        let outage = OutageCause::parse(field(7)).ok_or_else(|| Error::Parse {
            line,
            message: format!("unknown outage cause {:?}", field(7)),
        })?;
        let scheme = field(2).parse::<Scheme>().map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        rows.push(ResultRow {
            scheme,
            seed: parse_value(line, "seed", field(3))?,
            result: SimResult {
                n: parse_value(line, "n", field(0))?,
                trial: parse_value(line, "trial", field(1))?,
                throughput: real(4)?,
                aggregate: real(5)?,
                l_max: parse_value(line, "l_max", field(6))?,
                outage,
                max_sources_per_node: parse_value(line, "max_sources", field(8))?,
                unserved_count: parse_value(line, "unserved", field(9))?,
                served_rate: real(10)?,
            },
            reference_slope: if field(11).is_empty() { None } else { Some(real(11)?) },
        });
    }
    Ok(rows)
}

fn by_scheme<F: Real>(rows: &[ResultRow<F>]) -> BTreeMap<&'static str, (Option<F>, Vec<SimResult<F>>)> {
    let mut map: BTreeMap<&'static str, (Option<F>, Vec<SimResult<F>>)> = BTreeMap::new();
    for row in rows {
        let e = map
            .entry(row.scheme.as_str())
            .or_insert((row.reference_slope, Vec::new()));
        e.1.push(row.result);
    }
    map
}

fn by_n<F: Real>(results: &[SimResult<F>]) -> BTreeMap<u64, Vec<SimResult<F>>> {
    let mut map: BTreeMap<u64, Vec<SimResult<F>>> = BTreeMap::new();
    for r in results {
        map.entry(r.n).or_default().push(*r);
    }
    map
}

fn mean<F: Real>(xs: impl Iterator<Item = F>) -> Option<F> {
    let (sum, k) = xs.fold((F::zero(), 0u64), |(s, k), x| (s + x, k + 1));
    (k > 0).then(|| sum / F::count(k))
}

/// Per-`(scheme, n)` outage rates and mean throughputs.
pub fn write_summary<F: Real, W: Write>(rows: &[ResultRow<F>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "scheme",
        "n",
        "trials",
        "cache_miss_rate",
        "relay_void_rate",
        "mean_t_n",
        "mean_served_rate",
    ])?;
    for (scheme, (_, results)) in by_scheme(rows) {
        for (n, rs) in by_n(&results) {
            let (miss, void) = outage_fraction(&rs);
            let ok = mean(rs.iter().filter(|r| !r.is_outage()).map(|r| r.throughput));
            let served = mean(rs.iter().map(|r| r.served_rate));
            w.write_record([
                scheme.to_string(),
                n.to_string(),
                rs.len().to_string(),
                miss.to_string(),
                void.to_string(),
                opt(ok),
                opt(served),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Log-log slope of the mean served rate over all trials, outage or not.
pub fn served_rate_fit<F: Real>(results: &[SimResult<F>]) -> Result<ScalingFit<F>> {
    let points: Vec<(u64, F)> = by_n(results)
        .into_iter()
        .filter_map(|(n, rs)| mean(rs.iter().map(|r| r.served_rate)).map(|m| (n, m)))
        .collect();
    fit_loglog(&points)
}

/// One row per scheme comparing the fitted slope with its reference exponent.
pub fn write_fit<F: Real, W: Write>(rows: &[ResultRow<F>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "scheme",
        "points",
        "slope",
        "slope_stderr",
        "intercept",
        "r_squared",
        "ref_slope",
        "served_rate_slope",
        "note",
    ])?;
    for (scheme, (reference, results)) in by_scheme(rows) {
        let served = served_rate_fit(&results).ok().map(|f| f.slope);
        let record = match fit_scaling(&results) {
            Ok(f) => [
                scheme.to_string(),
                f.points.len().to_string(),
                f.slope.to_string(),
                f.slope_stderr.to_string(),
                f.intercept.to_string(),
                f.r_squared.to_string(),
                opt(reference),
                opt(served),
                String::new(),
            ],
            Err(e) => [
                scheme.to_string(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                opt(reference),
                opt(served),
                e.to_string(),
            ],
        };
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Exponents rounded to 1e-9 so that e.g. `-(0.8 - 0.2) / 2` prints as `-0.3`.
fn exponent_cell<F: Real>(e: F) -> String {
    ((e.as_f64() * 1e9).round() / 1e9 + 0.0).to_string()
}

fn scaling_cell<F: Real>(s: Scaling<F>) -> String {
    match s {
        Scaling::Zero => "zero".into(),
        Scaling::Power(e) => exponent_cell(e),
        Scaling::InverseLog => "inverse-log".into(),
    }
}

/// `regime,multihop_ach,multihop_conv,singlehop_ach,singlehop_conv,improved`.
pub fn write_bounds<F: Real, W: Write>(b: &BoundSet<F>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "regime",
        "multihop_ach",
        "multihop_conv",
        "singlehop_ach",
        "singlehop_conv",
        "improved",
    ])?;
    w.write_record([
        b.regime.to_string(),
        scaling_cell(b.multihop_achievable),
        scaling_cell(b.multihop_converse),
        scaling_cell(b.singlehop_achievable),
        scaling_cell(b.singlehop_converse),
        b.improved.map(exponent_cell).unwrap_or_default(),
    ])?;
    w.flush()?;
    Ok(())
}

/// Scheme name, reference slope and `(ln n, ln mean T_n)` points.
type Series<F> = (&'static str, Option<F>, Vec<(F, F)>);

/// Writes `<scheme>.dat` (`ln n`, `ln mean T_n` over outage-free trials) for
/// every scheme plus `bounds.dat` with each scheme's reference slope drawn
/// through its first point. Returns the written paths.
pub fn emit_plot_data<F: Real>(rows: &[ResultRow<F>], dir: &Path) -> Result<Vec<PathBuf>> {
    if rows.is_empty() {
        return Err(Error::InvalidConfig("no results to plot".into()));
    }
    let mut series: Vec<Series<F>> = Vec::new();
    for (scheme, (reference, results)) in by_scheme(rows) {
        let mut pts = Vec::new();
        for (n, rs) in by_n(&results) {
            match mean(rs.iter().filter(|r| !r.is_outage()).map(|r| r.throughput)) {
                Some(t) => pts.push((F::count(n).ln(), t.ln())),
                None => warn!("{scheme}: every trial at n = {n} is in outage; point skipped"),
            }
        }
        series.push((scheme, reference, pts));
    }
    fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    for (scheme, _, pts) in &series {
        let path = dir.join(format!("{scheme}.dat"));
        let mut f = BufWriter::new(File::create(&path)?);
        writeln!(f, "# {scheme}: ln(n) ln(mean T_n over outage-free trials)")?;
        for (x, y) in pts {
            writeln!(f, "{x} {y}")?;
        }
        f.flush()?;
        paths.push(path);
    }
    let path = dir.join("bounds.dat");
    let mut f = BufWriter::new(File::create(&path)?);
    let cols: Vec<&str> = series.iter().map(|(s, _, _)| *s).collect();
    writeln!(
        f,
        "# reference slopes through each scheme's first point; columns: ln(n) {}",
        cols.join(" ")
    )?;
    let mut xs: Vec<F> = series.iter().flat_map(|(_, _, p)| p.iter().map(|(x, _)| *x)).collect();
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite ln n"));
    xs.dedup();
    for x in xs {
        let mut line = x.to_string();
        for (_, reference, pts) in &series {
            let cell = match (reference, pts.first()) {
                (Some(e), Some((x0, y0))) => (*y0 + *e * (x - *x0)).to_string(),
                _ => "nan".into(),
            };
            line.push(' ');
            line.push_str(&cell);
        }
        writeln!(f, "{line}")?;
    }
    f.flush()?;
    paths.push(path);
    Ok(paths)
}
