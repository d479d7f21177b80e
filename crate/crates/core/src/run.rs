//! Run configuration, time-series assembly and table output for the CLI.
//!
//! Tables are written as CSV (`# key=value` metadata, a header row, then
//! data rows, LF line endings) or as JSON with the same columns. Floating
//! values carry 17 significant digits in CSV.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{collapse_detuned, collapse_resonant, revival_detuned, revival_resonant, RevivalMode};
use crate::envelope::linspace;
use crate::error::{Error, Result};
use crate::exact::{
    inversion_exact, static_part, ModelParams, PhotonDistribution, TimeUnit, DEFAULT_TAIL_TOLERANCE, MAX_ALPHA_SQUARED,
};
use crate::hankel::{inversion_contour, PathOptions};
use crate::lambert::BranchIndex;
use crate::saddle::{
    crossing_times, inversion_saddle, revival_times, trace_trajectory, trajectory_label, Policy, SaddleSet,
};

/// Stored inversion values must lie in this closed interval.
pub const VALUE_BOUND: f64 = 1.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Contour,
    Saddle,
    Collapse,
    Revival,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Contour => "contour",
            Method::Saddle => "saddle",
            Method::Collapse => "collapse",
            Method::Revival => "revival",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Time-independent offset added to the non-exact curves when `ν > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum StaticPartMode {
    /// The exact static sum.
    #[default]
    Exact,
    /// The large-amplitude estimate `−ν`.
    MinusNu,
    None,
}

impl StaticPartMode {
    pub fn name(self) -> &'static str {
        match self {
            StaticPartMode::Exact => "exact",
            StaticPartMode::MinusNu => "minus-nu",
            StaticPartMode::None => "none",
        }
    }
}

/// Everything a subcommand needs. Deserializes from TOML with every field
/// optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunConfig {
    pub alpha: f64,
    pub nu: f64,
    pub methods: Vec<Method>,
    pub branches: Vec<i32>,
    pub t_start: f64,
    pub t_stop: f64,
    pub t_count: usize,
    pub unit: TimeUnit,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
    pub policy: Policy,
    pub static_part: StaticPartMode,
    pub revival_mode: RevivalMode,
    /// Adds one column per saddle trajectory.
    pub per_branch: bool,
    /// Largest revival index listed by `times`.
    pub n_max: u32,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            alpha: 5.0,
            nu: 0.0,
            methods: vec![Method::Exact],
            branches: vec![0, 1, 2, 3],
            t_start: 0.0,
            t_stop: 40.0,
            t_count: 401,
            unit: TimeUnit::LambdaT,
            format: OutputFormat::Csv,
            out: None,
            policy: Policy::Sum,
            static_part: StaticPartMode::Exact,
            revival_mode: RevivalMode::Full,
            per_branch: false,
            n_max: 5,
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.alpha > 0.0 && self.alpha.is_finite() && self.alpha * self.alpha <= MAX_ALPHA_SQUARED) {
            return bad(format!("alpha must be in (0, {}], got {}", MAX_ALPHA_SQUARED.sqrt(), self.alpha));
        }
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return bad(format!("nu must be finite and >= 0, got {}", self.nu));
        }
        if self.methods.is_empty() {
            return bad("at least one method is required".into());
        }
        if self.t_count < 2 {
            return bad(format!("t-count must be >= 2, got {}", self.t_count));
        }
        if !(self.t_start.is_finite() && self.t_stop.is_finite() && self.t_start < self.t_stop) {
            return bad(format!("need t-start < t-stop, got {} and {}", self.t_start, self.t_stop));
        }
        if self.t_start < 0.0 {
            return bad(format!("t-start must be >= 0, got {}", self.t_start));
        }
        let needs_branches = self.methods.iter().any(|m| matches!(m, Method::Saddle | Method::Revival));
        if needs_branches && self.branches.is_empty() {
            return bad("saddle and revival need at least one branch".into());
        }
        if self.methods.contains(&Method::Revival) && self.revival_indices().is_empty() {
            return bad("revival needs a branch with |k| >= 1".into());
        }
        Ok(())
    }

    pub fn params(&self) -> Result<ModelParams> {
        Ok(ModelParams::from_nu(self.alpha, self.nu)?.with_time_unit(self.unit))
    }

    /// Distinct trajectory labels, ascending.
    pub fn trajectory_labels(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self.branches.iter().map(|&k| trajectory_label(BranchIndex::new(k)).0).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    fn revival_indices(&self) -> Vec<u32> {
        self.trajectory_labels().into_iter().filter(|&n| n >= 1).collect()
    }

    fn distinct_methods(&self) -> Vec<Method> {
        let mut seen = Vec::new();
        for &m in &self.methods {
            if !seen.contains(&m) {
                seen.push(m);
            }
        }
        seen
    }

    /// `(grid in the configured unit, grid in λt)`.
    pub fn time_grid(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let params = self.params()?;
        let grid = linspace(self.t_start, self.t_stop, self.t_count);
        let lt = grid.iter().map(|&v| params.to_lambda_t(v, self.unit)).collect();
        Ok((grid, lt))
    }

    fn static_offset(&self) -> Result<f64> {
        if self.nu == 0.0 {
            return Ok(0.0);
        }
        let params = self.params()?;
        Ok(match self.static_part {
            StaticPartMode::Exact => static_part(self.alpha, params.mu())?,
            StaticPartMode::MinusNu => -self.nu,
            StaticPartMode::None => 0.0,
        })
    }

    fn metadata(&self, command: &str) -> Vec<(String, String)> {
        let join = |v: Vec<String>| v.join(";");
        let mut m = vec![
            ("program".to_string(), format!("jcsum {}", env!("CARGO_PKG_VERSION"))),
            ("command".to_string(), command.to_string()),
            ("alpha".to_string(), self.alpha.to_string()),
            ("nu".to_string(), self.nu.to_string()),
            ("mu".to_string(), (self.nu * self.alpha * self.alpha).to_string()),
            ("unit".to_string(), self.unit.name().to_string()),
        ];
        if command != "times" {
            m.push(("t_start".into(), self.t_start.to_string()));
            m.push(("t_stop".into(), self.t_stop.to_string()));
            m.push(("t_count".into(), self.t_count.to_string()));
        }
        if command == "inversion" {
            m.push(("methods".into(), join(self.distinct_methods().iter().map(|m| m.name().to_string()).collect())));
            m.push(("policy".into(), format!("{:?}", self.policy).to_lowercase()));
            m.push(("static_part".into(), self.static_part.name().into()));
            m.push(("revival_mode".into(), format!("{:?}", self.revival_mode).to_lowercase()));
        }
        if command != "times" {
            m.push(("branches".into(), join(self.branches.iter().map(|k| k.to_string()).collect())));
        } else {
            m.push(("n_max".into(), self.n_max.to_string()));
        }
        m
    }
}

/// One named column of values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Column {
    pub name: String,
    pub values: Vec<f64>,
    /// Constant static offset included in `values`; excluded from the bound.
    #[serde(skip)]
    pub offset: f64,
}

/// Inversion time series: the time grid plus one column per method (and
/// optionally per saddle trajectory). All values, less their column's static
/// offset, lie in `[−1.1, 1.1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InversionSeries {
    unit: TimeUnit,
    times: Vec<f64>,
    lambda_t: Vec<f64>,
    columns: Vec<Column>,
}

impl InversionSeries {
    pub fn new(unit: TimeUnit, times: Vec<f64>, lambda_t: Vec<f64>, columns: Vec<Column>) -> Result<Self> {
        if times.len() != lambda_t.len() || columns.iter().any(|c| c.values.len() != times.len()) {
            return Err(Error::InvalidParameter("column lengths differ from the time grid".into()));
        }
        for c in &columns {
            if let Some((i, v)) = c.values.iter().enumerate().find(|(_, v)| !((*v - c.offset).abs() <= VALUE_BOUND)) {
                return Err(Error::Domain(format!(
                    "{} = {v} at t = {} is outside [-{VALUE_BOUND}, {VALUE_BOUND}] + {}",
                    c.name, times[i], c.offset
                )));
            }
        }
        Ok(Self { unit, times, lambda_t, columns })
    }

    pub fn unit(&self) -> TimeUnit {
        self.unit
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn lambda_t(&self) -> &[f64] {
        &self.lambda_t
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().find(|c| c.name == name).map(|c| c.values.as_slice())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Evaluates every requested method on the configured grid.
pub fn compute_inversion(cfg: &RunConfig) -> Result<InversionSeries> {
    cfg.validate()?;
    let params = cfg.params()?;
    let (grid, lt) = cfg.time_grid()?;
    let methods = cfg.distinct_methods();
    let labels = cfg.trajectory_labels();
    let branches: Vec<BranchIndex> = labels.iter().map(|&n| BranchIndex::new(n as i32)).collect();
    let offset = cfg.static_offset()?;

    let dist = if methods.contains(&Method::Exact) {
        Some(PhotonDistribution::poisson(cfg.alpha, DEFAULT_TAIL_TOLERANCE)?)
    } else {
        None
    };
    let saddles = if methods.contains(&Method::Saddle) {
        let tau_max = params.tau(*lt.last().expect("grid has >= 2 points"));
        Some(SaddleSet::trace(cfg.nu, &branches, tau_max)?)
    } else {
        None
    };
    let revivals = cfg.revival_indices();
    let opts = PathOptions::default();

    let mut names: Vec<String> = methods.iter().map(|m| m.name().to_string()).collect();
    let per_branch = cfg.per_branch && saddles.is_some();
    if per_branch {
        names.extend(labels.iter().map(|n| format!("saddle_branch_{n}")));
    }

    let row = |t: f64| -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(names.len());
        let mut branch_values = Vec::new();
        for &m in &methods {
            let v = match m {
                Method::Exact => inversion_exact(dist.as_ref().expect("loaded"), &params, t)?,
                Method::Contour => inversion_contour(&params, t, &opts)?.value + offset,
                Method::Saddle => {
                    let s = inversion_saddle(&params, t, saddles.as_ref().expect("traced"), &branches, cfg.policy)?;
                    branch_values = s.contributions.iter().map(|c| c.value).collect();
                    s.total + offset
                }
                Method::Collapse => {
                    if cfg.nu == 0.0 {
                        collapse_resonant(cfg.alpha, t)
                    } else {
                        collapse_detuned(cfg.alpha, cfg.nu, t) + offset
                    }
                }
                Method::Revival => {
                    let mut acc = offset;
                    for &n in &revivals {
                        acc += if cfg.nu == 0.0 {
                            revival_resonant(cfg.alpha, n, t, cfg.revival_mode)?
                        } else {
                            revival_detuned(cfg.alpha, cfg.nu, n, t)?
                        };
                    }
                    acc
                }
            };
            out.push(v);
        }
        if per_branch {
            out.extend(branch_values);
        }
        Ok(out)
    };

    let rows: Vec<Vec<f64>> = lt.par_iter().map(|&t| row(t)).collect::<Result<_>>()?;
    let columns = names
        .into_iter()
        .enumerate()
        .map(|(j, name)| {
            let shifted = j < methods.len() && methods[j] != Method::Exact && cfg.nu > 0.0;
            Column { name, values: rows.iter().map(|r| r[j]).collect(), offset: if shifted { offset } else { 0.0 } }
        })
        .collect();
    InversionSeries::new(cfg.unit, grid, lt, columns)
}

/// A cell of an output table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(i64),
    Num(f64),
}

/// Rendered-agnostic table: metadata, header and rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub metadata: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

/// 17 significant digits in scientific notation.
pub fn format_number(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(s, "# {k}={v}");
        }
        s.push_str(&self.header.join(","));
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Int(i) => i.to_string(),
                    Cell::Num(x) => format_number(*x),
                })
                .collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    /// `{"metadata": {...}, "columns": [{"name": .., "values": [..]}, ..]}`.
    pub fn to_json(&self) -> String {
        use serde_json::{json, Map, Value};
        let meta: Map<String, Value> =
            self.metadata.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
        let columns: Vec<Value> = self
            .header
            .iter()
            .enumerate()
            .map(|(j, name)| {
                let values: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|r| match r[j] {
                        Cell::Int(i) => json!(i),
                        Cell::Num(x) => serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number),
                    })
                    .collect();
                json!({ "name": name, "values": values })
            })
            .collect();
        let mut s =
            serde_json::to_string_pretty(&json!({ "metadata": meta, "columns": columns })).expect("table serializes");
        s.push('\n');
        s
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json(),
        }
    }
}

/// Table behind `inversion`: time in the configured unit, then one column per
/// method.
pub fn inversion_table(cfg: &RunConfig) -> Result<Table> {
    let series = compute_inversion(cfg)?;
    let mut header = vec![format!("t[{}]", cfg.unit.name())];
    header.extend(series.columns().iter().map(|c| c.name.clone()));
    let rows = (0..series.len())
        .map(|i| {
            let mut r = vec![Cell::Num(series.times()[i])];
            r.extend(series.columns().iter().map(|c| Cell::Num(c.values[i])));
            r
        })
        .collect();
    Ok(Table { metadata: cfg.metadata("inversion"), header, rows })
}

/// Table behind `trajectory`: `(branch, τ, Re F, Im F, Re φ, Im φ)` for each
/// requested branch on the grid `τ = (λt/|α|)²`, skipping `τ = 0`.
pub fn trajectory_table(cfg: &RunConfig) -> Result<Table> {
    cfg.validate()?;
    if cfg.branches.is_empty() {
        return Err(Error::Config("trajectory needs at least one branch".into()));
    }
    let params = cfg.params()?;
    let (_, lt) = cfg.time_grid()?;
    let taus: Vec<f64> = lt.iter().map(|&t| params.tau(t)).filter(|&tau| tau > 0.0).collect();
    if taus.is_empty() {
        return Err(Error::Config("time grid has no positive points".into()));
    }
    let mut seen = Vec::new();
    let branches: Vec<i32> = cfg
        .branches
        .iter()
        .copied()
        .filter(|k| {
            if seen.contains(k) {
                false
            } else {
                seen.push(*k);
                true
            }
        })
        .collect();
    let per_branch: Vec<Vec<Vec<Cell>>> = branches
        .par_iter()
        .map(|&k| -> Result<Vec<Vec<Cell>>> {
            let traj = trace_trajectory(BranchIndex::new(k), cfg.nu, &taus)?;
            Ok(traj
                .samples()
                .iter()
                .map(|x| {
                    vec![
                        Cell::Int(k as i64),
                        Cell::Num(x.tau),
                        Cell::Num(x.f.re),
                        Cell::Num(x.f.im),
                        Cell::Num(x.phi.re),
                        Cell::Num(x.phi.im),
                    ]
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let header = ["branch", "tau", "re_f", "im_f", "re_phi", "im_phi"].map(String::from).to_vec();
    Ok(Table { metadata: cfg.metadata("trajectory"), header, rows: per_branch.into_iter().flatten().collect() })
}

/// Table behind `times`: revival centres, and at resonance the trajectory
/// crossing times (closed form and refined), all in the configured unit.
/// The collapse width is reported in the metadata.
pub fn times_table(cfg: &RunConfig) -> Result<Table> {
    let params = cfg.params()?;
    let unit = cfg.unit;
    let conv = |t: f64| params.from_lambda_t(t, unit);
    let revivals = revival_times(cfg.alpha, cfg.nu, cfg.n_max);
    let crossings = if cfg.nu == 0.0 { Some(crossing_times(cfg.alpha, cfg.n_max)?) } else { None };
    let mut header = vec!["n".to_string(), "revival".to_string()];
    if crossings.is_some() {
        header.push("crossing_formula".into());
        header.push("crossing_refined".into());
    }
    let rows = (0..cfg.n_max as usize)
        .map(|i| {
            let mut r = vec![Cell::Int(i as i64 + 1), Cell::Num(conv(revivals[i]))];
            if let Some(c) = &crossings {
                r.push(Cell::Num(conv(c[i].formula)));
                r.push(Cell::Num(conv(c[i].refined)));
            }
            r
        })
        .collect();
    let mut metadata = cfg.metadata("times");
    metadata.push(("collapse_width".into(), format_number(conv((1.0 + cfg.nu).sqrt()))));
    Ok(Table { metadata, header, rows })
}

fn emit(cfg: &RunConfig, table: &Table) -> Result<String> {
    let text = table.render(cfg.format);
    if let Some(path) = &cfg.out {
        std::fs::write(path, &text).map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(text)
}

/// Computes the inversion table and writes it to `cfg.out` when set.
/// Returns the rendered text.
pub fn cmd_inversion(cfg: &RunConfig) -> Result<String> {
    emit(cfg, &inversion_table(cfg)?)
}

pub fn cmd_trajectory(cfg: &RunConfig) -> Result<String> {
    emit(cfg, &trajectory_table(cfg)?)
}

pub fn cmd_times(cfg: &RunConfig) -> Result<String> {
    emit(cfg, &times_table(cfg)?)
}
