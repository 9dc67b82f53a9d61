//! Scenario files: a TOML description of the system, contour, coupling and
//! weights, validated completely before anything is computed.

use std::path::{Path, PathBuf};

use ccilc::{
    closed_loop, BlockSchedule, CouplingMode, IlcConfig, IlcError, InputCoupling, LtvStateSpace,
    NoiseConfig, Signal, SolverKind, WeightSchedule, WeightSegment, WeightSet,
};
use nalgebra::DMatrix;
use serde::Deserialize;
use toml::{Spanned, Value};

use crate::error::{CliError, CliResult};
use crate::shapes::{self, Profile};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    #[serde(default = "default_iterations")]
    iterations: usize,
    #[serde(default)]
    solver: Option<SolverName>,
    output_dir: Option<PathBuf>,
    #[serde(default)]
    seed: u64,
    size_cap: Option<usize>,
    dense_margin_limit: Option<usize>,
    #[serde(default)]
    strict_convergence: bool,
    trajectory_iterations: Option<Vec<usize>>,
    noise: Option<RawNoise>,
    system: RawSystem,
    contour: RawContour,
    #[serde(default)]
    coupling: RawCoupling,
    weights: RawWeights,
}

fn default_iterations() -> usize {
    10
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum SolverName {
    Lqt,
    Lifted,
}

impl From<SolverName> for SolverKind {
    fn from(s: SolverName) -> Self {
        match s {
            SolverName::Lqt => SolverKind::Lqt,
            SolverName::Lifted => SolverKind::Lifted,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNoise {
    std_dev: f64,
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    plant: Option<Spanned<RawStateSpace>>,
    controller: Option<Spanned<RawStateSpace>>,
    process_sensitivity: Option<Spanned<RawStateSpace>>,
    sensitivity: Option<Spanned<RawStateSpace>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStateSpace {
    /// `true` forbids per-sample sequences; `false` stores one matrix per
    /// sample. Inferred from the matrices when absent.
    lti: Option<bool>,
    a: Spanned<Value>,
    b: Spanned<Value>,
    c: Spanned<Value>,
    d: Spanned<Value>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
enum ContourKind {
    Line,
    Arc,
    RoundedRectangle,
    Csv,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawContour {
    kind: ContourKind,
    samples: Option<usize>,
    #[serde(default)]
    dwell: usize,
    #[serde(default)]
    profile: Option<ProfileName>,
    start: Option<[f64; 2]>,
    end: Option<[f64; 2]>,
    center: Option<[f64; 2]>,
    radius: Option<f64>,
    start_angle: Option<f64>,
    end_angle: Option<f64>,
    width: Option<f64>,
    height: Option<f64>,
    corner_radius: Option<f64>,
    path: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ProfileName {
    Constant,
    Smooth,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCoupling {
    #[serde(default)]
    mode: Option<ModeName>,
    #[serde(default)]
    input: Option<InputName>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ModeName {
    Identity,
    AxesLinear,
    LinearRotation,
    Exact,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
enum InputName {
    Same,
    Identity,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWeights {
    error: Option<Spanned<Value>>,
    input: Option<Spanned<Value>>,
    input_change: Option<Spanned<Value>>,
    table: Option<Vec<RawWeightSet>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWeightSet {
    error: Spanned<Value>,
    input: Spanned<Value>,
    input_change: Spanned<Value>,
}

/// A validated scenario, ready to run.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub source: PathBuf,
    pub config: IlcConfig,
    pub output_dir: PathBuf,
    /// Iterations whose trajectories are written; `None` means first and last.
    pub trajectory_iterations: Option<Vec<usize>>,
    pub seed: u64,
    noise_seed: Option<u64>,
}

impl Scenario {
    pub fn load(path: &Path) -> CliResult<Scenario> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(path, None, format!("cannot read scenario file: {e}")))?;
        Self::parse(&text, path)
    }

    /// Parses scenario text; relative paths resolve against `path`'s directory.
    pub fn parse(text: &str, path: &Path) -> CliResult<Scenario> {
        let ctx = Ctx { text, path };
        let raw: RawScenario = toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| ctx.line_of(s.start));
            CliError::config(path, line, e.message().trim().to_string())
        })?;
        ctx.build(raw)
    }

    /// Applies a seed override; the noise seed follows unless set explicitly.
    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        if let Some(noise) = self.config.noise.as_mut() {
            noise.seed = self.noise_seed.unwrap_or(seed);
        }
    }

    pub fn trajectory_iterations(&self) -> Vec<usize> {
        let k = self.config.iterations;
        let mut list = self
            .trajectory_iterations
            .clone()
            .unwrap_or_else(|| vec![0, k]);
        list.retain(|j| *j <= k);
        list.sort_unstable();
        list.dedup();
        list
    }

    /// Copy with the contour resampled to `samples` points and LTI systems
    /// re-horizoned; used by the benchmark.
    pub fn with_horizon(&self, text: &str, samples: usize) -> CliResult<Scenario> {
        let mut doc: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| CliError::config(&self.source, None, e.to_string()))?;
        let contour = doc
            .get_mut("contour")
            .and_then(Value::as_table_mut)
            .ok_or_else(|| CliError::config(&self.source, None, "missing [contour]"))?;
        // keep the dwell fraction of the original sampling
        let dwell = contour
            .get("dwell")
            .and_then(Value::as_integer)
            .unwrap_or(0) as usize;
        let dwell = (dwell * samples + self.config.horizon() / 2) / self.config.horizon().max(1);
        let dwell = dwell.min(samples.saturating_sub(3) / 2);
        contour.insert("samples".into(), Value::Integer(samples as i64));
        contour.insert("dwell".into(), Value::Integer(dwell as i64));
        let text = toml::to_string(&doc).expect("serializable table");
        Scenario::parse(&text, &self.source)
    }
}

struct Ctx<'a> {
    text: &'a str,
    path: &'a Path,
}

fn matrix_from_rows(rows: &[Value], what: &str) -> Result<DMatrix<f64>, String> {
    let mut data = Vec::new();
    let mut cols = None;
    for (i, row) in rows.iter().enumerate() {
        let row = row
            .as_array()
            .ok_or_else(|| format!("{what}: row {i} is not an array"))?;
        if *cols.get_or_insert(row.len()) != row.len() {
            return Err(format!(
                "{what}: row {i} has {} entries, expected {}",
                row.len(),
                cols.unwrap()
            ));
        }
        for v in row {
            data.push(number(v).ok_or_else(|| format!("{what}: row {i} holds a non-number"))?);
        }
    }
    let cols = cols.unwrap_or(0);
    Ok(DMatrix::from_row_slice(rows.len(), cols, &data))
}

fn number(v: &Value) -> Option<f64> {
    match v {
        Value::Float(f) => Some(*f),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

/// Either one matrix or a sequence of per-sample matrices.
enum MatrixSeq {
    Single(DMatrix<f64>),
    Sequence(Vec<DMatrix<f64>>),
}

fn is_matrix_sequence(rows: &[Value]) -> bool {
    rows.first()
        .and_then(Value::as_array)
        .and_then(|r| r.first())
        .is_some_and(|v| v.is_array())
}

impl<'a> Ctx<'a> {
    fn line_of(&self, offset: usize) -> usize {
        self.text[..offset.min(self.text.len())]
            .matches('\n')
            .count()
            + 1
    }

    fn err<T>(&self, span: Option<std::ops::Range<usize>>, msg: impl Into<String>) -> CliResult<T> {
        Err(CliError::config(
            self.path,
            span.map(|s| self.line_of(s.start)),
            msg.into(),
        ))
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.path.parent().unwrap_or(Path::new(".")).join(p)
        }
    }

    fn matrix_seq(&self, v: &Spanned<Value>, what: &str) -> CliResult<MatrixSeq> {
        let span = Some(v.span());
        let rows = match v.get_ref() {
            Value::Array(rows) => rows,
            _ => return self.err(span, format!("{what} must be an array of rows")),
        };
        let parsed = if is_matrix_sequence(rows) {
            rows.iter()
                .enumerate()
                .map(|(k, m)| match m.as_array() {
                    Some(r) => matrix_from_rows(r, &format!("{what}[{k}]")),
                    None => Err(format!("{what}[{k}] is not a matrix")),
                })
                .collect::<Result<Vec<_>, _>>()
                .map(MatrixSeq::Sequence)
        } else {
            matrix_from_rows(rows, what).map(MatrixSeq::Single)
        };
        parsed.or_else(|m| self.err(span, m))
    }

    fn state_space(
        &self,
        raw: &Spanned<RawStateSpace>,
        what: &str,
        n: usize,
    ) -> CliResult<LtvStateSpace> {
        let span = Some(raw.span());
        let r = raw.get_ref();
        let mats = [
            self.matrix_seq(&r.a, &format!("{what}.a"))?,
            self.matrix_seq(&r.b, &format!("{what}.b"))?,
            self.matrix_seq(&r.c, &format!("{what}.c"))?,
            self.matrix_seq(&r.d, &format!("{what}.d"))?,
        ];
        // n_x = 0 systems write a, b and c as empty arrays; fix their shapes
        // from the feedthrough.
        let d_shape = match &mats[3] {
            MatrixSeq::Single(d) => d.shape(),
            MatrixSeq::Sequence(ds) => ds.first().map_or((0, 0), |d| d.shape()),
        };
        let fix = |m: DMatrix<f64>, shape: (usize, usize)| {
            if m.is_empty() {
                DMatrix::zeros(shape.0, shape.1)
            } else {
                m
            }
        };
        let is_empty_single = |m: &MatrixSeq| matches!(m, MatrixSeq::Single(x) if x.is_empty());
        let all_single = mats.iter().all(|m| matches!(m, MatrixSeq::Single(_)));
        if r.lti == Some(true) && !all_single {
            return self.err(
                span,
                format!("{what}: lti = true but a matrix sequence was given"),
            );
        }
        let result = if all_single && r.lti != Some(false) {
            let [a, b, c, d] = mats.map(|m| match m {
                MatrixSeq::Single(x) => x,
                MatrixSeq::Sequence(_) => unreachable!(),
            });
            let n_x = a.nrows();
            let b = fix(b, (n_x, d_shape.1));
            let c = fix(c, (d_shape.0, n_x));
            LtvStateSpace::lti(a, b, c, d, n)
        } else {
            let empty_a = is_empty_single(&mats[0]);
            let mut seqs = Vec::with_capacity(4);
            for (m, name) in mats.into_iter().zip(["a", "b", "c", "d"]) {
                match m {
                    MatrixSeq::Sequence(v) if v.len() != n => {
                        return self.err(
                            span,
                            format!(
                                "{what}.{name} has {} matrices but the horizon is {n}",
                                v.len()
                            ),
                        );
                    }
                    MatrixSeq::Sequence(v) => seqs.push(v),
                    MatrixSeq::Single(x) => seqs.push(vec![x; n]),
                }
            }
            let d = seqs.pop().unwrap();
            let mut c = seqs.pop().unwrap();
            let mut b = seqs.pop().unwrap();
            let a = seqs.pop().unwrap();
            if empty_a {
                b = b.into_iter().map(|m| fix(m, (0, d_shape.1))).collect();
                c = c.into_iter().map(|m| fix(m, (d_shape.0, 0))).collect();
            }
            LtvStateSpace::ltv(a, b, c, d)
        };
        result.or_else(|e| self.err(span, format!("{what}: {e}")))
    }

    fn block_schedule(&self, v: &Spanned<Value>, what: &str, n: usize) -> CliResult<BlockSchedule> {
        let span = Some(v.span());
        let bad = |m: String| self.err::<BlockSchedule>(span.clone(), m);
        let block = |val: &Value, name: &str| -> Result<DMatrix<f64>, String> {
            match val {
                Value::Array(rows) => matrix_from_rows(rows, name),
                Value::Table(t) if t.len() == 1 && t.contains_key("diag") => {
                    let diag = t["diag"]
                        .as_array()
                        .ok_or_else(|| format!("{name}.diag must be an array"))?
                        .iter()
                        .map(|x| number(x).ok_or_else(|| format!("{name}.diag holds a non-number")))
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag)))
                }
                _ => Err(format!("{name} must be a matrix or {{ diag = [...] }}")),
            }
        };
        let (default, segments) = match v.get_ref() {
            Value::Table(t) if t.contains_key("default") => {
                if let Some(k) = t.keys().find(|k| *k != "default" && *k != "segments") {
                    return bad(format!("{what}: unknown key `{k}`"));
                }
                let default = match block(&t["default"], &format!("{what}.default")) {
                    Ok(m) => m,
                    Err(m) => return bad(m),
                };
                let mut segments = Vec::new();
                if let Some(list) = t.get("segments") {
                    let Some(list) = list.as_array() else {
                        return bad(format!("{what}.segments must be an array of tables"));
                    };
                    for (i, seg) in list.iter().enumerate() {
                        let name = format!("{what}.segments[{i}]");
                        let Some(seg) = seg.as_table() else {
                            return bad(format!("{name} must be a table"));
                        };
                        let index = |key: &str| {
                            seg.get(key)
                                .and_then(Value::as_integer)
                                .filter(|v| *v >= 0)
                                .map(|v| v as usize)
                                .ok_or_else(|| {
                                    format!("{name}.{key} must be a non-negative integer")
                                })
                        };
                        let parsed = (|| {
                            Ok::<_, String>(WeightSegment {
                                start: index("start")?,
                                end: index("end")?,
                                block: block(
                                    seg.get("block")
                                        .ok_or_else(|| format!("{name}.block missing"))?,
                                    &format!("{name}.block"),
                                )?,
                            })
                        })();
                        match parsed {
                            Ok(s) => segments.push(s),
                            Err(m) => return bad(m),
                        }
                    }
                }
                (default, segments)
            }
            other => match block(other, what) {
                Ok(m) => (m, Vec::new()),
                Err(m) => return bad(m),
            },
        };
        if let Some(s) = segments.iter().find(|s| s.end > n) {
            return bad(format!(
                "{what}: segment [{}, {}) runs past the horizon N = {n}",
                s.start, s.end
            ));
        }
        BlockSchedule::new(default, segments).or_else(|e| bad(format!("{what}: {e}")))
    }

    fn weight_set(
        &self,
        error: &Spanned<Value>,
        input: &Spanned<Value>,
        input_change: &Spanned<Value>,
        prefix: &str,
        n: usize,
    ) -> CliResult<WeightSet> {
        let set = WeightSet::new(
            self.block_schedule(error, &format!("{prefix}error"), n)?,
            self.block_schedule(input, &format!("{prefix}input"), n)?,
            self.block_schedule(input_change, &format!("{prefix}input_change"), n)?,
        );
        set.or_else(|e| self.err(Some(input.span()), e.to_string()))
    }

    fn weights(&self, raw: &RawWeights, n: usize) -> CliResult<WeightSchedule> {
        match (&raw.table, &raw.error, &raw.input, &raw.input_change) {
            (Some(table), None, None, None) => {
                if table.is_empty() {
                    return self.err(None, "weights.table is empty");
                }
                let sets = table
                    .iter()
                    .enumerate()
                    .map(|(j, t)| {
                        self.weight_set(
                            &t.error,
                            &t.input,
                            &t.input_change,
                            &format!("weights.table[{j}]."),
                            n,
                        )
                    })
                    .collect::<CliResult<Vec<_>>>()?;
                WeightSchedule::per_iteration(sets)
                    .map_err(|e| CliError::config(self.path, None, e.to_string()))
            }
            (None, Some(e), Some(f), Some(df)) => Ok(WeightSchedule::fixed(
                self.weight_set(e, f, df, "weights.", n)?,
            )),
            (Some(_), ..) => self.err(
                None,
                "weights: give either `table` or error/input/input_change, not both",
            ),
            _ => self.err(
                None,
                "weights: error, input and input_change are all required",
            ),
        }
    }

    fn contour(&self, raw: &RawContour) -> CliResult<Signal> {
        let need = |v: Option<f64>, key: &str| {
            v.ok_or_else(|| {
                CliError::config(
                    self.path,
                    None,
                    format!("contour.{key} is required for this kind"),
                )
            })
        };
        let need_pt = |v: Option<[f64; 2]>, key: &str| {
            v.ok_or_else(|| {
                CliError::config(
                    self.path,
                    None,
                    format!("contour.{key} is required for this kind"),
                )
            })
        };
        if let ContourKind::Csv = raw.kind {
            let rel = raw.path.as_ref().ok_or_else(|| {
                CliError::config(self.path, None, "contour.path is required for kind csv")
            })?;
            return read_contour_csv(&self.resolve(rel));
        }
        let path = match raw.kind {
            ContourKind::Line => {
                shapes::line(need_pt(raw.start, "start")?, need_pt(raw.end, "end")?)
            }
            ContourKind::Arc => shapes::arc(
                need_pt(raw.center, "center")?,
                need(raw.radius, "radius")?,
                need(raw.start_angle, "start_angle")?,
                need(raw.end_angle, "end_angle")?,
            ),
            ContourKind::RoundedRectangle => {
                let (w, h) = (need(raw.width, "width")?, need(raw.height, "height")?);
                let r = raw.corner_radius.unwrap_or(0.0);
                if !(w > 0.0 && h > 0.0 && r >= 0.0 && 2.0 * r <= w.min(h)) {
                    return self.err(None, "contour: need width, height > 0 and 0 <= corner_radius <= min(width, height)/2");
                }
                shapes::rounded_rectangle(raw.center.unwrap_or([0.0, 0.0]), w, h, r)
            }
            ContourKind::Csv => unreachable!(),
        };
        let samples = raw
            .samples
            .ok_or_else(|| CliError::config(self.path, None, "contour.samples is required"))?;
        let profile = match raw.profile {
            Some(ProfileName::Smooth) => Profile::Smooth,
            _ => Profile::Constant,
        };
        shapes::sample(&path, samples, raw.dwell, profile)
            .map_err(|m| CliError::config(self.path, None, format!("contour: {m}")))
    }

    fn build(&self, raw: RawScenario) -> CliResult<Scenario> {
        let reference = self.contour(&raw.contour)?;
        let n = reference.len();
        let sys = &raw.system;
        let (j, s) = match (&sys.plant, &sys.controller, &sys.process_sensitivity) {
            (Some(p), Some(c), None) => {
                if sys.sensitivity.is_some() {
                    return self.err(
                        Some(p.span()),
                        "system: sensitivity is derived from plant and controller; remove it",
                    );
                }
                let plant = self.state_space(p, "system.plant", n)?;
                let controller = self.state_space(c, "system.controller", n)?;
                closed_loop(&plant, &controller)
                    .or_else(|e| self.err(Some(p.span()), format!("system: {e}")))?
            }
            (None, None, Some(jr)) => {
                let j = self.state_space(jr, "system.process_sensitivity", n)?;
                let s = match &sys.sensitivity {
                    Some(sr) => self.state_space(sr, "system.sensitivity", n)?,
                    None => LtvStateSpace::gain(DMatrix::identity(j.n_o(), j.n_o()), n)
                        .map_err(CliError::from)?,
                };
                (j, s)
            }
            _ => {
                return self.err(
                    None,
                    "system: give either plant and controller, or process_sensitivity",
                )
            }
        };
        if j.n_o() != reference.width() {
            return self.err(
                None,
                format!(
                    "system has {} outputs but the contour has {} channels",
                    j.n_o(),
                    reference.width()
                ),
            );
        }
        let weights = self.weights(&raw.weights, n)?;

        let mut config = IlcConfig::new(j, s, reference, weights);
        config.iterations = raw.iterations;
        config.solver = raw.solver.map(Into::into).unwrap_or_default();
        config.strict_convergence = raw.strict_convergence;
        config.coupling = match raw.coupling.mode {
            None | Some(ModeName::Identity) => CouplingMode::Identity,
            Some(ModeName::AxesLinear) => CouplingMode::AxesLinear,
            Some(ModeName::LinearRotation) => CouplingMode::LinearRotation,
            Some(ModeName::Exact) => CouplingMode::ExactRotation,
        };
        config.input_coupling = match raw.coupling.input {
            Some(InputName::Identity) => InputCoupling::Identity,
            _ => InputCoupling::SameAsError,
        };
        if let Some(cap) = raw.size_cap {
            config.size_cap = cap;
        }
        if let Some(limit) = raw.dense_margin_limit {
            config.dense_margin_limit = limit;
        }
        let noise_seed = raw.noise.as_ref().and_then(|n| n.seed);
        config.noise = raw.noise.as_ref().map(|nz| NoiseConfig {
            std_dev: nz.std_dev,
            seed: nz.seed.unwrap_or(raw.seed),
        });
        config.validate().map_err(|e| match e {
            IlcError::Invalid(m) | IlcError::Contour(m) => CliError::config(self.path, None, m),
            other => CliError::config(self.path, None, other.to_string()),
        })?;
        // weight shapes against the coupling, checked before any iteration runs
        let y0 = config.reference.clone();
        if let Err(e) = ccilc::iteration_weights(&config, &y0, 0) {
            return self.err(None, format!("weights: {e}"));
        }

        let name = self
            .path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "scenario".into());
        let output_dir = match &raw.output_dir {
            Some(p) => self.resolve(p),
            None => PathBuf::from(format!("{name}_out")),
        };
        Ok(Scenario {
            name,
            source: self.path.to_path_buf(),
            config,
            output_dir,
            trajectory_iterations: raw.trajectory_iterations,
            seed: raw.seed,
            noise_seed,
        })
    }
}

/// Reads a reference with columns `k,y1,y2`.
pub fn read_contour_csv(path: &Path) -> CliResult<Signal> {
    let mut rdr = csv::Reader::from_path(path)
        .map_err(|e| CliError::config(path, None, format!("cannot open contour file: {e}")))?;
    let headers = rdr
        .headers()
        .map_err(|e| CliError::config(path, Some(1), e.to_string()))?
        .clone();
    if headers.iter().collect::<Vec<_>>() != ["k", "y1", "y2"] {
        return Err(CliError::config(path, Some(1), "expected header k,y1,y2"));
    }
    let mut data = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| CliError::config(path, Some(line), e.to_string()))?;
        let field = |c: usize| -> CliResult<f64> {
            rec.get(c)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .filter(|v| v.is_finite())
                .ok_or_else(|| {
                    CliError::config(
                        path,
                        Some(line),
                        format!("column {c} is not a finite number"),
                    )
                })
        };
        if field(0)? != i as f64 {
            return Err(CliError::config(
                path,
                Some(line),
                format!("expected k = {i}"),
            ));
        }
        data.push(field(1)?);
        data.push(field(2)?);
    }
    Signal::from_stacked(2, data).map_err(|e| CliError::config(path, None, e.to_string()))
}
