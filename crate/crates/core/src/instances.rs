//! Problem instances: TSPLIB-subset and BPPlib-style parsing, coordinate to
//! matrix conversion, and benchmark directories with optimum sidecars.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// File name of the optimum sidecar inside a benchmark directory.
pub const SIDECAR_FILE: &str = "optima.txt";

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unsupported edge weight type `{0}`")]
    UnsupportedWeightType(String),
    #[error("unsupported edge weight format `{0}`")]
    UnsupportedWeightFormat(String),
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("item {index} has size {size} which exceeds capacity {capacity}")]
    InfeasibleItem { index: usize, size: f64, capacity: f64 },
    #[error("header announces {expected} items but {found} sizes follow")]
    CountMismatch { expected: usize, found: usize },
    #[error("at least two points are required, got {0}")]
    TooFewPoints(usize),
    #[error("coordinate {0} is not finite")]
    NonFiniteCoordinate(usize),
    #[error("benchmark directory {0} contains no instances")]
    EmptyDirectory(PathBuf),
    #[error("duplicate instance name `{0}`")]
    DuplicateName(String),
    #[error("sidecar references unknown instance `{0}`")]
    UnknownSidecarEntry(String),
    #[error("benchmark mixes TSP and BPP instances")]
    MixedProblems,
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: Box<InstanceError>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Distance rounding applied when converting coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Rounding {
    /// TSPLIB `nint`: `floor(d + 0.5)`.
    #[default]
    NearestInteger,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Tsp,
    Bpp,
}

impl std::fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ProblemKind::Tsp => f.write_str("tsp"),
            ProblemKind::Bpp => f.write_str("bpp"),
        }
    }
}

impl std::str::FromStr for ProblemKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tsp" => Ok(ProblemKind::Tsp),
            "bpp" => Ok(ProblemKind::Bpp),
            other => Err(format!("unknown problem `{other}` (expected tsp or bpp)")),
        }
    }
}

/// Symmetric TSP instance over a complete graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TspInstance {
    pub name: String,
    pub matrix: Vec<Vec<f64>>,
    pub known_optimal: Option<f64>,
}

impl TspInstance {
    /// Builds an instance after checking square shape, zero diagonal,
    /// symmetry and finite non-negative entries.
    pub fn new(name: impl Into<String>, matrix: Vec<Vec<f64>>) -> Result<Self, InstanceError> {
        validate_matrix(&matrix)?;
        Ok(Self {
            name: name.into(),
            matrix,
            known_optimal: None,
        })
    }

    pub fn from_coords(
        name: impl Into<String>,
        coords: &[(f64, f64)],
        rounding: Rounding,
    ) -> Result<Self, InstanceError> {
        Self::new(name, coords_to_matrix(coords, rounding)?)
    }

    pub fn n(&self) -> usize {
        self.matrix.len()
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.matrix[i][j]
    }
}

fn validate_matrix(matrix: &[Vec<f64>]) -> Result<(), InstanceError> {
    let n = matrix.len();
    if n == 0 {
        return Err(InstanceError::Invalid("empty distance matrix".into()));
    }
    for (i, row) in matrix.iter().enumerate() {
        if row.len() != n {
            return Err(InstanceError::Invalid(format!(
                "row {i} has {} entries, expected {n}",
                row.len()
            )));
        }
        for (j, &w) in row.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(InstanceError::Invalid(format!(
                    "entry ({i},{j}) = {w} is not a finite non-negative distance"
                )));
            }
        }
        if row[i] != 0.0 {
            return Err(InstanceError::Invalid(format!("diagonal entry {i} is non-zero")));
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if matrix[i][j] != matrix[j][i] {
                return Err(InstanceError::Invalid(format!(
                    "matrix is asymmetric at ({i},{j})"
                )));
            }
        }
    }
    Ok(())
}

/// Offline bin packing instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BppInstance {
    pub name: String,
    pub sizes: Vec<f64>,
    pub capacity: f64,
    pub known_optimal: Option<u64>,
}

impl BppInstance {
    pub fn new(
        name: impl Into<String>,
        sizes: Vec<f64>,
        capacity: f64,
    ) -> Result<Self, InstanceError> {
        if !(capacity.is_finite() && capacity > 0.0) {
            return Err(InstanceError::Invalid(format!(
                "capacity {capacity} must be a positive number"
            )));
        }
        if sizes.is_empty() {
            return Err(InstanceError::Invalid("instance has no items".into()));
        }
        for (index, &size) in sizes.iter().enumerate() {
            if !(size.is_finite() && size > 0.0) {
                return Err(InstanceError::Invalid(format!(
                    "item {index} has non-positive size {size}"
                )));
            }
            if size > capacity {
                return Err(InstanceError::InfeasibleItem {
                    index,
                    size,
                    capacity,
                });
            }
        }
        Ok(Self {
            name: name.into(),
            sizes,
            capacity,
            known_optimal: None,
        })
    }

    pub fn n(&self) -> usize {
        self.sizes.len()
    }

    /// `ceil(sum(sizes) / capacity)`, the volume lower bound on bins.
    pub fn volume_bound(&self) -> usize {
        let total: f64 = self.sizes.iter().sum();
        let ratio = total / self.capacity;
        // absorb float noise such as 2.0000000000000004
        let bound = (ratio - 1e-9).ceil();
        (bound.max(1.0)) as usize
    }
}

/// Either kind of instance; benchmark sets are homogeneous.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Instance {
    Tsp(TspInstance),
    Bpp(BppInstance),
}

impl Instance {
    pub fn name(&self) -> &str {
        match self {
            Instance::Tsp(t) => &t.name,
            Instance::Bpp(b) => &b.name,
        }
    }

    pub fn kind(&self) -> ProblemKind {
        match self {
            Instance::Tsp(_) => ProblemKind::Tsp,
            Instance::Bpp(_) => ProblemKind::Bpp,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            Instance::Tsp(t) => t.n(),
            Instance::Bpp(b) => b.n(),
        }
    }

    pub fn known_optimal(&self) -> Option<f64> {
        match self {
            Instance::Tsp(t) => t.known_optimal,
            Instance::Bpp(b) => b.known_optimal.map(|k| k as f64),
        }
    }

    fn set_known_optimal(&mut self, value: f64, line: usize) -> Result<(), InstanceError> {
        if !(value.is_finite() && value > 0.0) {
            return Err(InstanceError::Parse {
                line,
                msg: format!("optimum {value} must be positive"),
            });
        }
        match self {
            Instance::Tsp(t) => t.known_optimal = Some(value),
            Instance::Bpp(b) => {
                if value.fract() != 0.0 {
                    return Err(InstanceError::Parse {
                        line,
                        msg: format!("bin-count optimum {value} is not an integer"),
                    });
                }
                b.known_optimal = Some(value as u64);
            }
        }
        Ok(())
    }

    /// The instance document sent to candidate programs on stdin.
    pub fn to_protocol_json(&self) -> String {
        match self {
            Instance::Tsp(t) => serde_json::json!({
                "type": "tsp",
                "n": t.n(),
                "matrix": t.matrix,
            })
            .to_string(),
            Instance::Bpp(b) => serde_json::json!({
                "type": "bpp",
                "n": b.n(),
                "capacity": b.capacity,
                "sizes": b.sizes,
            })
            .to_string(),
        }
    }
}

/// Euclidean distance matrix over 2-D points.
pub fn coords_to_matrix(
    coords: &[(f64, f64)],
    rounding: Rounding,
) -> Result<Vec<Vec<f64>>, InstanceError> {
    if coords.len() < 2 {
        return Err(InstanceError::TooFewPoints(coords.len()));
    }
    if let Some(i) = coords.iter().position(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(InstanceError::NonFiniteCoordinate(i));
    }
    let n = coords.len();
    let mut matrix = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let (dx, dy) = (coords[i].0 - coords[j].0, coords[i].1 - coords[j].1);
            let d = (dx * dx + dy * dy).sqrt();
            let d = match rounding {
                Rounding::NearestInteger => (d + 0.5).floor(),
                Rounding::Exact => d,
            };
            matrix[i][j] = d;
            matrix[j][i] = d;
        }
    }
    Ok(matrix)
}

/// Parses the supported TSPLIB subset with TSPLIB rounding for `EUC_2D`.
pub fn parse_tsplib(text: &str) -> Result<TspInstance, InstanceError> {
    parse_tsplib_with(text, Rounding::NearestInteger)
}

#[derive(PartialEq)]
enum Section {
    Header,
    Coords,
    Weights,
}

pub fn parse_tsplib_with(text: &str, rounding: Rounding) -> Result<TspInstance, InstanceError> {
    let mut name: Option<String> = None;
    let mut dimension: Option<usize> = None;
    let mut weight_type: Option<String> = None;
    let mut weight_format: Option<String> = None;
    let mut coords: Vec<(f64, f64)> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    let mut section = Section::Header;
    let mut last_line = 0;

    let need_dim = |dimension: Option<usize>, line: usize| {
        dimension.ok_or(InstanceError::Parse {
            line,
            msg: "section starts before DIMENSION".into(),
        })
    };

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed == "EOF" {
            break;
        }
        if trimmed == "NODE_COORD_SECTION" {
            need_dim(dimension, line)?;
            section = Section::Coords;
            continue;
        }
        if trimmed == "EDGE_WEIGHT_SECTION" {
            need_dim(dimension, line)?;
            section = Section::Weights;
            continue;
        }
        let starts_numeric = trimmed
            .chars()
            .next()
            .is_some_and(|c| c.is_ascii_digit() || c == '-' || c == '+' || c == '.');
        if section != Section::Header && starts_numeric {
            let numbers = trimmed
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>().map_err(|_| InstanceError::Parse {
                        line,
                        msg: format!("expected a number, found `{tok}`"),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            match section {
                Section::Coords => {
                    if numbers.len() != 3 {
                        return Err(InstanceError::Parse {
                            line,
                            msg: format!("coordinate line needs 3 fields, found {}", numbers.len()),
                        });
                    }
                    let n = need_dim(dimension, line)?;
                    if coords.len() >= n {
                        return Err(InstanceError::Parse {
                            line,
                            msg: format!("more than DIMENSION={n} coordinates"),
                        });
                    }
                    coords.push((numbers[1], numbers[2]));
                }
                Section::Weights => {
                    let n = need_dim(dimension, line)?;
                    weights.extend(numbers);
                    if weights.len() > n * n {
                        return Err(InstanceError::Parse {
                            line,
                            msg: format!("more than {} edge weights for DIMENSION={n}", n * n),
                        });
                    }
                }
                Section::Header => unreachable!(),
            }
            continue;
        }

        // keyword line; any keyword ends a data section
        section = Section::Header;
        let (key, value) = match trimmed.split_once(':') {
            Some((k, v)) => (k.trim(), v.trim()),
            None => {
                return Err(InstanceError::Parse {
                    line,
                    msg: format!("malformed line `{trimmed}`"),
                })
            }
        };
        match key {
            "NAME" => name = Some(value.to_string()),
            "TYPE" => {
                if value != "TSP" {
                    return Err(InstanceError::Parse {
                        line,
                        msg: format!("unsupported problem TYPE `{value}`"),
                    });
                }
            }
            "COMMENT" | "DISPLAY_DATA_TYPE" => {}
            "DIMENSION" => {
                let n: usize = value.parse().map_err(|_| InstanceError::Parse {
                    line,
                    msg: format!("invalid DIMENSION `{value}`"),
                })?;
                if n == 0 {
                    return Err(InstanceError::Parse {
                        line,
                        msg: "DIMENSION must be positive".into(),
                    });
                }
                dimension = Some(n);
            }
            "EDGE_WEIGHT_TYPE" => match value {
                "EUC_2D" | "EXPLICIT" => weight_type = Some(value.to_string()),
                other => return Err(InstanceError::UnsupportedWeightType(other.to_string())),
            },
            "EDGE_WEIGHT_FORMAT" => match value {
                "FULL_MATRIX" => weight_format = Some(value.to_string()),
                other => return Err(InstanceError::UnsupportedWeightFormat(other.to_string())),
            },
            other => {
                return Err(InstanceError::Parse {
                    line,
                    msg: format!("unsupported keyword `{other}`"),
                })
            }
        }
    }

    let n = dimension.ok_or(InstanceError::Parse {
        line: last_line,
        msg: "missing DIMENSION".into(),
    })?;
    let name = name.unwrap_or_default();
    let matrix = match weight_type.as_deref() {
        Some("EUC_2D") => {
            if coords.len() != n {
                return Err(InstanceError::Parse {
                    line: last_line,
                    msg: format!("DIMENSION={n} but {} coordinates given", coords.len()),
                });
            }
            if n == 1 {
                vec![vec![0.0]]
            } else {
                coords_to_matrix(&coords, rounding)?
            }
        }
        Some("EXPLICIT") => {
            if weight_format.is_none() {
                return Err(InstanceError::Parse {
                    line: last_line,
                    msg: "EXPLICIT weights require EDGE_WEIGHT_FORMAT".into(),
                });
            }
            if weights.len() != n * n {
                return Err(InstanceError::Parse {
                    line: last_line,
                    msg: format!("DIMENSION={n} needs {} weights, found {}", n * n, weights.len()),
                });
            }
            weights.chunks(n).map(<[f64]>::to_vec).collect()
        }
        _ => {
            return Err(InstanceError::Parse {
                line: last_line,
                msg: "missing EDGE_WEIGHT_TYPE".into(),
            })
        }
    };
    TspInstance::new(name, matrix)
}

/// Canonical writer: `EXPLICIT` / `FULL_MATRIX`, shortest round-trip numbers.
pub fn write_tsplib(instance: &TspInstance) -> String {
    let n = instance.n();
    let mut out = String::new();
    let _ = writeln!(out, "NAME : {}", instance.name);
    out.push_str("TYPE : TSP\n");
    let _ = writeln!(out, "DIMENSION : {n}");
    out.push_str("EDGE_WEIGHT_TYPE : EXPLICIT\nEDGE_WEIGHT_FORMAT : FULL_MATRIX\nEDGE_WEIGHT_SECTION\n");
    for row in &instance.matrix {
        let line: Vec<String> = row.iter().map(|w| format!("{w:?}")).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out.push_str("EOF\n");
    out
}

/// Parses `n`, capacity, then `n` sizes (whitespace separated).
pub fn parse_bpp(name: &str, text: &str) -> Result<BppInstance, InstanceError> {
    let mut tokens = text.lines().enumerate().flat_map(|(idx, line)| {
        line.split_whitespace().map(move |tok| (idx + 1, tok))
    });
    let mut next_number = |what: &str| -> Result<(usize, f64), InstanceError> {
        let (line, tok) = tokens.next().ok_or(InstanceError::Parse {
            line: 0,
            msg: format!("missing {what}"),
        })?;
        tok.parse::<f64>()
            .map(|v| (line, v))
            .map_err(|_| InstanceError::Parse {
                line,
                msg: format!("expected {what}, found `{tok}`"),
            })
    };
    let (line, count) = next_number("item count")?;
    if count.fract() != 0.0 || count < 1.0 {
        return Err(InstanceError::Parse {
            line,
            msg: format!("item count `{count}` must be a positive integer"),
        });
    }
    let count = count as usize;
    let (_, capacity) = next_number("capacity")?;
    let mut sizes = Vec::with_capacity(count);
    loop {
        match next_number("item size") {
            Ok((_, s)) => sizes.push(s),
            Err(InstanceError::Parse { line: 0, .. }) => break,
            Err(e) => return Err(e),
        }
    }
    if sizes.len() != count {
        return Err(InstanceError::CountMismatch {
            expected: count,
            found: sizes.len(),
        });
    }
    BppInstance::new(name, sizes, capacity)
}

pub fn write_bpp(instance: &BppInstance) -> String {
    let mut out = format!("{}\n{:?}\n", instance.n(), instance.capacity);
    for s in &instance.sizes {
        let _ = writeln!(out, "{s:?}");
    }
    out
}

/// Parses `name value` records; blank lines and `#` comments are skipped.
pub fn parse_sidecar(text: &str) -> Result<Vec<(String, f64, usize)>, InstanceError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut parts = trimmed.split_whitespace();
        let (Some(name), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(InstanceError::Parse {
                line,
                msg: format!("expected `name value`, found `{trimmed}`"),
            });
        };
        let value: f64 = value.parse().map_err(|_| InstanceError::Parse {
            line,
            msg: format!("invalid optimum `{value}`"),
        })?;
        out.push((name.to_string(), value, line));
    }
    Ok(out)
}

/// Homogeneous, name-sorted collection of instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSet {
    pub kind: ProblemKind,
    pub instances: Vec<Instance>,
    pub source: PathBuf,
}

impl InstanceSet {
    pub fn new(instances: Vec<Instance>, source: PathBuf) -> Result<Self, InstanceError> {
        let first = instances
            .first()
            .ok_or_else(|| InstanceError::EmptyDirectory(source.clone()))?;
        let kind = first.kind();
        if instances.iter().any(|i| i.kind() != kind) {
            return Err(InstanceError::MixedProblems);
        }
        let mut seen = BTreeSet::new();
        for inst in &instances {
            if !seen.insert(inst.name().to_string()) {
                return Err(InstanceError::DuplicateName(inst.name().to_string()));
            }
        }
        let mut instances = instances;
        instances.sort_by(|a, b| a.name().cmp(b.name()));
        Ok(Self {
            kind,
            instances,
            source,
        })
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Instance> {
        self.instances.iter()
    }

    pub fn all_optima_known(&self) -> bool {
        self.instances.iter().all(|i| i.known_optimal().is_some())
    }

    /// Display name of the dataset: the last component of its source path.
    pub fn dataset_name(&self) -> String {
        self.source
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| self.source.display().to_string())
    }
}

/// Reads a single instance file, dispatching on extension (`.tsp` / `.bpp`).
pub fn load_instance_file(path: &Path) -> Result<Instance, InstanceError> {
    let wrap = |e: InstanceError| InstanceError::File {
        path: path.to_path_buf(),
        source: Box::new(e),
    };
    let text = fs::read_to_string(path)?;
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    match path.extension().and_then(|e| e.to_str()) {
        Some("tsp") => {
            let mut tsp = parse_tsplib(&text).map_err(wrap)?;
            if tsp.name.is_empty() {
                tsp.name = stem;
            }
            Ok(Instance::Tsp(tsp))
        }
        Some("bpp") => Ok(Instance::Bpp(parse_bpp(&stem, &text).map_err(wrap)?)),
        _ => Err(wrap(InstanceError::Invalid(
            "unknown instance extension (expected .tsp or .bpp)".into(),
        ))),
    }
}

pub fn is_instance_file(path: &Path) -> bool {
    path.is_file()
        && matches!(
            path.extension().and_then(|e| e.to_str()),
            Some("tsp") | Some("bpp")
        )
}

/// Loads every `.tsp`/`.bpp` file in `dir` and applies the optional
/// `optima.txt` sidecar.
pub fn load_benchmark(dir: &Path) -> Result<InstanceSet, InstanceError> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| is_instance_file(p))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(InstanceError::EmptyDirectory(dir.to_path_buf()));
    }
    let instances = paths
        .iter()
        .map(|p| load_instance_file(p))
        .collect::<Result<Vec<_>, _>>()?;
    let mut set = InstanceSet::new(instances, dir.to_path_buf())?;

    let sidecar = dir.join(SIDECAR_FILE);
    if sidecar.is_file() {
        let text = fs::read_to_string(&sidecar)?;
        let records = parse_sidecar(&text).map_err(|e| InstanceError::File {
            path: sidecar.clone(),
            source: Box::new(e),
        })?;
        let index: BTreeMap<String, usize> = set
            .instances
            .iter()
            .enumerate()
            .map(|(i, inst)| (inst.name().to_string(), i))
            .collect();
        for (name, value, line) in records {
            let &i = index
                .get(&name)
                .ok_or_else(|| InstanceError::UnknownSidecarEntry(name.clone()))?;
            set.instances[i].set_known_optimal(value, line)?;
        }
    }
    Ok(set)
}

/// Renders a sidecar for every instance with a known optimum.
pub fn write_sidecar(set: &InstanceSet) -> String {
    let mut out = String::new();
    for inst in &set.instances {
        if let Some(v) = inst.known_optimal() {
            let _ = writeln!(out, "{} {v}", inst.name());
        }
    }
    out
}

/// Uniform random Euclidean instance on `[0, side)^2`.
pub fn random_euclidean<R: rand::Rng>(
    name: impl Into<String>,
    n: usize,
    side: f64,
    rounding: Rounding,
    rng: &mut R,
) -> TspInstance {
    let coords: Vec<(f64, f64)> = (0..n)
        .map(|_| (rng.gen_range(0.0..side), rng.gen_range(0.0..side)))
        .collect();
    if n < 2 {
        return TspInstance::new(name, vec![vec![0.0; n]; n]).expect("trivial matrix");
    }
    TspInstance::from_coords(name, &coords, rounding).expect("random coordinates are finite")
}

/// Uniform random integer-sized BPP instance.
pub fn random_bpp<R: rand::Rng>(
    name: impl Into<String>,
    n: usize,
    capacity: u32,
    rng: &mut R,
) -> BppInstance {
    let sizes = (0..n)
        .map(|_| f64::from(rng.gen_range(1..=capacity)))
        .collect();
    BppInstance::new(name, sizes, f64::from(capacity)).expect("sizes within capacity")
}
