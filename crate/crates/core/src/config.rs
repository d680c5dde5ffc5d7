//! Run configurations: a flat `key = value` text format plus header-free CSV
//! files for matrices.
//!
//! ```text
//! # projected gradient on the bundled lasso
//! problem = desk_lasso
//! method = pg
//! iterations = 500
//! trace_csv = pg.csv
//! report_json = pg.json
//! ```
//!
//! Blank lines and lines starting with `#` or `;` are ignored. Matrices are
//! written inline as `1,2;3,4` (rows separated by `;`) or loaded from a CSV
//! file through the `<name>_csv` key, resolved relative to the config file.
//! Unknown keys, repeated keys and keys that do not apply to the chosen
//! problem are rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;

use crate::aggregation::{DelayKind, DelaySchedule, SelectionPolicy};
use crate::problems::{self, ProblemSpec};
use crate::solver::{default_x0, named_method, GuardPolicy, MethodTag, SolverConfig, DEFAULT_GUARD_FACTOR};
use crate::stepsizes::StepPolicy;
use crate::{Error, Point, Result};

/// Environment variable overriding the configured seed.
pub const SEED_ENV: &str = "RNG_SEED";

const RUN_KEYS: &[&str] = &[
    "problem",
    "method",
    "selection",
    "tau",
    "delay_kind",
    "seed",
    "step_mode",
    "alpha_manual",
    "iterations",
    "x0",
    "x0_csv",
    "box_lower",
    "box_upper",
    "guard_factor",
    "certificate",
    "trace_csv",
    "report_json",
];

/// Problem parameters; matrices may also be given through `<name>_csv`.
#[derive(Debug, Clone, PartialEq)]
pub enum ProblemConfig {
    Lasso { a: DMatrix<f64>, b: Point, lambda: f64, radius: f64 },
    Poisson { a: DMatrix<f64>, counts: Point, beta: f64, mu_l1: f64 },
    Quartic { e: DMatrix<f64>, a: DMatrix<f64>, c: DMatrix<f64>, b: Point, d: Point },
    DualCs { a: DMatrix<f64>, b: Point, alpha: f64, mu: f64 },
    HolderToy { epsilon: f64 },
    DeskLasso,
    DeskQuartic,
    DeskPoisson { beta: f64, mu_l1: f64 },
    DeskDualCs,
}

impl ProblemConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ProblemConfig::Lasso { .. } => "lasso",
            ProblemConfig::Poisson { .. } => "poisson",
            ProblemConfig::Quartic { .. } => "quartic",
            ProblemConfig::DualCs { .. } => "dual_cs",
            ProblemConfig::HolderToy { .. } => "holder_toy",
            ProblemConfig::DeskLasso => "desk_lasso",
            ProblemConfig::DeskQuartic => "desk_quartic",
            ProblemConfig::DeskPoisson { .. } => "desk_poisson",
            ProblemConfig::DeskDualCs => "desk_dual_cs",
        }
    }

    pub fn build(&self) -> Result<ProblemSpec> {
        match self {
            ProblemConfig::Lasso { a, b, lambda, radius } => problems::make_lasso(a, b, *lambda, *radius),
            ProblemConfig::Poisson { a, counts, beta, mu_l1 } => {
                let rows: Vec<Point> = a.row_iter().map(|r| r.transpose()).collect();
                problems::make_poisson_elastic_net(&rows, counts.as_slice(), *beta, *mu_l1)
            }
            ProblemConfig::Quartic { e, a, c, b, d } => problems::make_quartic_problem(e, a, c, b, d),
            ProblemConfig::DualCs { a, b, alpha, mu } => problems::make_dual_cs(a, b, *alpha, *mu),
            ProblemConfig::HolderToy { epsilon } => problems::make_holder_toy(*epsilon),
            ProblemConfig::DeskLasso => problems::desk_lasso(),
            ProblemConfig::DeskQuartic => problems::desk_quartic(),
            ProblemConfig::DeskPoisson { beta, mu_l1 } => problems::desk_poisson(*beta, *mu_l1),
            ProblemConfig::DeskDualCs => problems::desk_dual_cs(),
        }
    }
}

/// Which certificate `run` reports besides the descent check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificateChoice {
    /// Linear for `step_mode = linear`, Hölderian for `piag_holder`,
    /// sublinear otherwise.
    Auto,
    Sublinear,
    Linear,
    Holder,
    DescentOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    pub method: Option<MethodTag>,
    pub selection: Option<SelectionPolicy>,
    pub tau: usize,
    pub delay_kind: Option<String>,
    pub seed: u64,
    pub step: StepPolicy,
    pub iterations: usize,
    pub x0: Option<Point>,
    pub box_bounds: Option<(f64, f64)>,
    pub guard_factor: f64,
    pub certificate: CertificateChoice,
    pub trace_csv: PathBuf,
    pub report_json: PathBuf,
}

struct Entry {
    line: usize,
    value: String,
    used: bool,
}

struct Entries {
    map: BTreeMap<String, Entry>,
    base: PathBuf,
}

fn config_err(line: usize, message: impl Into<String>) -> Error {
    Error::Config { line, message: message.into() }
}

impl Entries {
    fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.trim();
            if content.is_empty() || content.starts_with('#') || content.starts_with(';') {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| config_err(line, format!("expected `key = value`, got `{content}`")))?;
            let key = key.trim();
            if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(config_err(line, format!("invalid key `{key}`")));
            }
            let entry = Entry { line, value: value.trim().to_string(), used: false };
            if let Some(prev) = map.insert(key.to_string(), entry) {
                return Err(config_err(line, format!("`{key}` repeats line {}", prev.line)));
            }
        }
        Ok(Self { map, base: base.to_path_buf() })
    }

    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.map.get_mut(key).map(|e| {
            e.used = true;
            (e.line, e.value.clone())
        })
    }

    fn required(&mut self, key: &str) -> Result<(usize, String)> {
        self.take(key).ok_or_else(|| config_err(0, format!("missing key `{key}`")))
    }

    fn number<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse()
                .map(Some)
                .map_err(|_| config_err(line, format!("`{key}`: cannot parse `{v}`"))),
        }
    }

    fn float_or(&mut self, key: &str, default: f64) -> Result<f64> {
        Ok(self.number(key)?.unwrap_or(default))
    }

    fn required_float(&mut self, key: &str) -> Result<f64> {
        self.number(key)?.ok_or_else(|| config_err(0, format!("missing key `{key}`")))
    }

    /// A matrix given inline under `key` or as a CSV file under `key_csv`.
    fn matrix(&mut self, key: &str) -> Result<Option<DMatrix<f64>>> {
        let csv_key = format!("{key}_csv");
        match (self.take(key), self.take(&csv_key)) {
            (Some(_), Some((line, _))) => {
                Err(config_err(line, format!("both `{key}` and `{csv_key}` given")))
            }
            (Some((line, v)), None) => {
                parse_inline_matrix(&v).map(Some).map_err(|e| config_err(line, e.to_string()))
            }
            (None, Some((line, v))) => {
                let path = self.base.join(&v);
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| config_err(line, format!("{}: {e}", path.display())))?;
                parse_csv_matrix(&text).map(Some).map_err(|e| config_err(line, e.to_string()))
            }
            (None, None) => Ok(None),
        }
    }

    fn required_matrix(&mut self, key: &str) -> Result<DMatrix<f64>> {
        self.matrix(key)?
            .ok_or_else(|| config_err(0, format!("missing key `{key}` (or `{key}_csv`)")))
    }

    /// A vector: a single row or a single column.
    fn vector(&mut self, key: &str) -> Result<Option<Point>> {
        let line = self.map.get(key).or(self.map.get(&format!("{key}_csv"))).map_or(0, |e| e.line);
        match self.matrix(key)? {
            None => Ok(None),
            Some(m) if m.nrows() == 1 => Ok(Some(m.row(0).transpose())),
            Some(m) if m.ncols() == 1 => Ok(Some(m.column(0).into_owned())),
            Some(m) => Err(config_err(
                line,
                format!("`{key}` must be a vector, got {}x{}", m.nrows(), m.ncols()),
            )),
        }
    }

    fn required_vector(&mut self, key: &str) -> Result<Point> {
        self.vector(key)?
            .ok_or_else(|| config_err(0, format!("missing key `{key}` (or `{key}_csv`)")))
    }

    fn path(&mut self, key: &str, default: String) -> PathBuf {
        let name = self.take(key).map_or(default, |(_, v)| v);
        self.base.join(name)
    }

    fn reject_unused(&self) -> Result<()> {
        match self.map.iter().find(|(_, e)| !e.used) {
            Some((key, e)) => Err(config_err(e.line, format!("unknown or unused key `{key}`"))),
            None => Ok(()),
        }
    }
}

fn parse_float(s: &str) -> Result<f64> {
    let t = s.trim();
    t.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::InvalidData(format!("`{t}` is not a finite number")))
}

fn rows_to_matrix(rows: Vec<Vec<f64>>) -> Result<DMatrix<f64>> {
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || ncols == 0 {
        return Err(Error::InvalidData("empty matrix".into()));
    }
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != ncols) {
        return Err(Error::InvalidData(format!(
            "row {} has {} entries, expected {ncols}",
            i + 1,
            r.len()
        )));
    }
    let data: Vec<f64> = rows.into_iter().flatten().collect();
    Ok(DMatrix::from_row_slice(data.len() / ncols, ncols, &data))
}

/// `1,2;3,4` → the 2×2 matrix with rows (1,2) and (3,4).
pub fn parse_inline_matrix(s: &str) -> Result<DMatrix<f64>> {
    let rows = s
        .split(';')
        .map(|row| row.split(',').map(parse_float).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    rows_to_matrix(rows)
}

/// Dense, row-major, header-free CSV.
pub fn parse_csv_matrix(text: &str) -> Result<DMatrix<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Csv(e.to_string()))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        rows.push(record.iter().map(parse_float).collect::<Result<Vec<_>>>()?);
    }
    rows_to_matrix(rows)
}

/// `full_aggregate`, `iap_cyclic`, `iap_fixed:<i>` or `custom:<sets>` where
/// kept sets are separated by `;`, indices by `,` and `-` is the empty set.
pub fn parse_selection(s: &str) -> Result<SelectionPolicy> {
    let bad = |why: &str| Error::InvalidData(format!("selection `{s}`: {why}"));
    match s.split_once(':') {
        None => match s {
            "full_aggregate" => Ok(SelectionPolicy::FullAggregate),
            "iap_cyclic" => Ok(SelectionPolicy::IapCyclic),
            _ => Err(bad("unknown policy")),
        },
        Some(("iap_fixed", i)) => i
            .trim()
            .parse()
            .map(|index| SelectionPolicy::IapFixed { index })
            .map_err(|_| bad("index must be a nonnegative integer")),
        Some(("custom", sets)) => {
            let kept = sets
                .split(';')
                .map(|set| {
                    let set = set.trim();
                    if set == "-" {
                        return Ok(Vec::new());
                    }
                    set.split(',')
                        .map(|i| i.trim().parse::<usize>().map_err(|_| bad("bad index")))
                        .collect()
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(SelectionPolicy::Custom { kept })
        }
        Some(_) => Err(bad("unknown policy")),
    }
}

fn parse_problem(e: &mut Entries) -> Result<ProblemConfig> {
    let (line, name) = e.required("problem")?;
    let problem = match name.as_str() {
        "lasso" => ProblemConfig::Lasso {
            a: e.required_matrix("A")?,
            b: e.required_vector("b")?,
            lambda: e.required_float("lambda")?,
            radius: e.required_float("radius")?,
        },
        "poisson" => ProblemConfig::Poisson {
            a: e.required_matrix("A")?,
            counts: e.required_vector("counts")?,
            beta: e.float_or("beta", 0.0)?,
            mu_l1: e.float_or("mu_l1", 0.0)?,
        },
        "quartic" => {
            let em = e.required_matrix("E")?;
            let c = e.required_matrix("C")?;
            let a = e.matrix("A")?.unwrap_or_else(|| DMatrix::zeros(1, em.ncols()));
            let b = e.vector("b")?.unwrap_or_else(|| Point::zeros(a.nrows()));
            let d = e.vector("d")?.unwrap_or_else(|| Point::zeros(c.nrows()));
            ProblemConfig::Quartic { e: em, a, c, b, d }
        }
        "dual_cs" => ProblemConfig::DualCs {
            a: e.required_matrix("A")?,
            b: e.required_vector("b")?,
            alpha: e.required_float("alpha_cs")?,
            mu: e.required_float("mu_cs")?,
        },
        "holder_toy" => ProblemConfig::HolderToy { epsilon: e.float_or("epsilon", 0.0)? },
        "desk_lasso" => ProblemConfig::DeskLasso,
        "desk_quartic" => ProblemConfig::DeskQuartic,
        "desk_poisson" => ProblemConfig::DeskPoisson {
            beta: e.float_or("beta", 0.0)?,
            mu_l1: e.float_or("mu_l1", 0.0)?,
        },
        "desk_dual_cs" => ProblemConfig::DeskDualCs,
        other => return Err(config_err(line, format!("unknown problem `{other}`"))),
    };
    Ok(problem)
}

fn parse_step(e: &mut Entries) -> Result<StepPolicy> {
    let mode = e.take("step_mode");
    let alpha: Option<f64> = e.number("alpha_manual")?;
    let line = mode.as_ref().map_or(0, |m| m.0);
    let step = match mode.as_ref().map_or("sublinear", |m| m.1.as_str()) {
        "sublinear" => StepPolicy::Sublinear,
        "linear" => StepPolicy::Linear,
        "piag_holder" => StepPolicy::PiagHolder,
        "manual" => {
            let alpha = alpha.ok_or_else(|| config_err(line, "step_mode = manual needs alpha_manual"))?;
            return Ok(StepPolicy::Manual { alpha });
        }
        other => return Err(config_err(line, format!("unknown step_mode `{other}`"))),
    };
    if alpha.is_some() {
        return Err(config_err(line, "alpha_manual is only used with step_mode = manual"));
    }
    Ok(step)
}

impl RunConfig {
    /// Parses `text`; relative paths resolve against `base` and output paths
    /// default to `<stem>.trace.csv` and `<stem>.report.json`.
    pub fn parse(text: &str, base: &Path, stem: &str) -> Result<Self> {
        let mut e = Entries::parse(text, base)?;
        if let Some((key, entry)) = e
            .map
            .iter()
            .find(|(k, _)| !RUN_KEYS.contains(&k.as_str()) && !problem_key(k))
        {
            return Err(config_err(entry.line, format!("unknown key `{key}`")));
        }
        let problem = parse_problem(&mut e)?;
        let method = match e.take("method") {
            Some((line, v)) => Some(v.parse::<MethodTag>().map_err(|err| config_err(line, err.to_string()))?),
            None => None,
        };
        let selection = match e.take("selection") {
            Some((line, v)) => {
                if method.is_some() {
                    return Err(config_err(line, "`selection` conflicts with `method`"));
                }
                Some(parse_selection(&v).map_err(|err| config_err(line, err.to_string()))?)
            }
            None => None,
        };
        let tau = e.number("tau")?.unwrap_or(0);
        let delay_kind = match e.take("delay_kind") {
            Some((line, v)) if !["zero", "constant", "cyclic", "uniform_random"].contains(&v.as_str()) => {
                return Err(config_err(line, format!("unknown delay_kind `{v}`")));
            }
            other => other.map(|(_, v)| v),
        };
        let seed = e.number("seed")?.unwrap_or(0);
        let step = parse_step(&mut e)?;
        let iterations = e
            .number("iterations")?
            .ok_or_else(|| config_err(0, "missing key `iterations`"))?;
        let x0 = e.vector("x0")?;
        let box_bounds = match (e.number("box_lower")?, e.number("box_upper")?) {
            (Some(l), Some(u)) => Some((l, u)),
            (None, None) => None,
            _ => return Err(config_err(0, "box_lower and box_upper go together")),
        };
        let guard_factor = e.float_or("guard_factor", DEFAULT_GUARD_FACTOR)?;
        let certificate = match e.take("certificate") {
            None => CertificateChoice::Auto,
            Some((line, v)) => match v.as_str() {
                "auto" => CertificateChoice::Auto,
                "sublinear" => CertificateChoice::Sublinear,
                "linear" => CertificateChoice::Linear,
                "holder" => CertificateChoice::Holder,
                "descent" => CertificateChoice::DescentOnly,
                other => return Err(config_err(line, format!("unknown certificate `{other}`"))),
            },
        };
        let trace_csv = e.path("trace_csv", format!("{stem}.trace.csv"));
        let report_json = e.path("report_json", format!("{stem}.report.json"));
        e.reject_unused()?;
        Ok(Self {
            problem,
            method,
            selection,
            tau,
            delay_kind,
            seed,
            step,
            iterations,
            x0,
            box_bounds,
            guard_factor,
            certificate,
            trace_csv,
            report_json,
        })
    }

    /// Reads and parses a config file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(0, format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("run");
        Self::parse(&text, base, stem)
    }

    /// The seed after applying the `RNG_SEED` override.
    pub fn effective_seed(&self) -> Result<u64> {
        match std::env::var(SEED_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| config_err(0, format!("{SEED_ENV} = `{v}` is not an unsigned integer"))),
            Err(_) => Ok(self.seed),
        }
    }

    pub fn delay_schedule(&self, seed: u64) -> Result<DelaySchedule> {
        let kind = match self.delay_kind.as_deref() {
            None if self.tau == 0 => DelayKind::Zero,
            None | Some("constant") => DelayKind::Constant { c: self.tau },
            Some("zero") => DelayKind::Zero,
            Some("cyclic") => DelayKind::Cyclic,
            Some("uniform_random") => DelayKind::UniformRandom { seed },
            Some(other) => return Err(config_err(0, format!("unknown delay_kind `{other}`"))),
        };
        let schedule = DelaySchedule { kind, bound: self.tau };
        schedule.validate()?;
        Ok(schedule)
    }

    /// The problem with the configured kernel box applied.
    pub fn build_problem(&self) -> Result<ProblemSpec> {
        let mut problem = self.problem.build()?;
        if let Some((l, u)) = self.box_bounds {
            problem.kernel = problem.kernel.clone().with_box(l, u)?;
        }
        Ok(problem)
    }

    pub fn solver_config(&self) -> Result<SolverConfig> {
        let problem = self.build_problem()?;
        let seed = self.effective_seed()?;
        let mut cfg = match self.method {
            Some(tag) => named_method(tag, problem, self.tau, self.iterations)?,
            None => {
                let mut cfg = SolverConfig::new(problem, self.iterations);
                if let Some(sel) = &self.selection {
                    cfg.selection = sel.clone();
                }
                cfg
            }
        };
        let forced_zero = matches!(self.method, Some(MethodTag::Pg | MethodTag::Nolips));
        if forced_zero && self.tau != 0 {
            return Err(config_err(0, format!("method {} runs without delays (tau = 0)", self.method.unwrap())));
        }
        cfg.delays = self.delay_schedule(seed)?;
        cfg.step = self.step;
        cfg.x0 = self.x0.clone().unwrap_or_else(|| default_x0(&cfg.problem));
        cfg.guard_factor = self.guard_factor;
        cfg.guard_policy = GuardPolicy::Record;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn problem_key(key: &str) -> bool {
    const PROBLEM_KEYS: &[&str] = &[
        "A", "b", "E", "C", "d", "counts", "lambda", "radius", "beta", "mu_l1", "alpha_cs", "mu_cs",
        "epsilon",
    ];
    PROBLEM_KEYS.contains(&key)
        || key.strip_suffix("_csv").is_some_and(|k| PROBLEM_KEYS.contains(&k))
}
