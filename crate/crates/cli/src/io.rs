//! File formats: checkpoints, JSON artifacts and CSV tables.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sqrbm_core::datasets::{format_bitstring, DatasetKind, TargetDistribution};
use sqrbm_core::model::{
    upper_index, upper_len, Family, Laterals, ModelSpec, OperatorSet, Parameters, Pauli,
};
use sqrbm_core::trainer::{ModelKind, SweepRow, VarianceRow};

use crate::CliError;

/// JSON number, or a string sentinel (`"inf"`, `"-inf"`, `"nan"`) for non-finite values.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

/// CSV cell for a float: shortest round-trip decimal, `inf`/`-inf`/`NaN` otherwise.
pub fn cell(x: f64) -> String {
    format!("{x}")
}

/// Wall-clock facts kept apart from the deterministic body of every artifact.
pub fn meta(started: Instant) -> Value {
    let unix = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0);
    json!({ "unix_time_s": unix, "wall_time_s": started.elapsed().as_secs_f64() })
}

/// Common envelope: version, command, resolved config, body fields, then `meta`.
pub fn artifact(command: &str, config: &impl Serialize, body: Value, started: Instant) -> Value {
    let mut out = serde_json::Map::new();
    out.insert("version".into(), json!(sqrbm_core::VERSION));
    out.insert("command".into(), json!(command));
    out.insert(
        "config".into(),
        serde_json::to_value(config).unwrap_or(Value::Null),
    );
    if let Value::Object(fields) = body {
        out.extend(fields);
    }
    out.insert("meta".into(), meta(started));
    Value::Object(out)
}

pub fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
    text.push('\n');
    write_file(path, text.as_bytes())
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))?;
    }
    std::fs::write(path, bytes)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

/// Removes the `meta` block, leaving the part of an artifact that must be reproducible.
pub fn strip_meta(mut value: Value) -> Value {
    if let Value::Object(map) = &mut value {
        map.remove("meta");
    }
    value
}

/// Model checkpoint. Matrices are nested row lists; laterals are full `n × n` / `m × m`
/// matrices with zeros on and below the diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub family: String,
    pub n: usize,
    pub m: usize,
    pub pauli_set: Vec<String>,
    pub a: Vec<f64>,
    pub b: BTreeMap<String, Vec<f64>>,
    pub w: BTreeMap<String, Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lateral_v: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lateral_h: Option<BTreeMap<String, Vec<Vec<f64>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<Value>,
}

fn unpack(packed: &[f64], k: usize) -> Vec<Vec<f64>> {
    (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    if i < j {
                        packed[upper_index(i, j, k)]
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}

fn pack(field: &str, full: &[Vec<f64>], k: usize) -> Result<Vec<f64>, CliError> {
    let bad = || {
        CliError::Usage(format!(
            "`{field}` must be a {k}×{k} strictly upper-triangular matrix"
        ))
    };
    if full.len() != k || full.iter().any(|r| r.len() != k) {
        return Err(bad());
    }
    let mut out = vec![0.0; upper_len(k)];
    for (i, row) in full.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            if i < j {
                out[upper_index(i, j, k)] = x;
            } else if x != 0.0 {
                return Err(bad());
            }
        }
    }
    Ok(out)
}

impl Checkpoint {
    pub fn new(spec: &ModelSpec, params: &Parameters) -> Self {
        let (n, m) = (spec.n(), spec.m());
        let key = |p: Pauli| p.symbol().to_string();
        let b = params
            .channels
            .iter()
            .map(|c| (key(c.op), c.bias.clone()))
            .collect();
        let w = params
            .channels
            .iter()
            .map(|c| {
                (
                    key(c.op),
                    c.weights.chunks(m).map(<[f64]>::to_vec).collect(),
                )
            })
            .collect();
        let (lateral_v, lateral_h) = match &params.laterals {
            Some(lat) => (
                Some(unpack(&lat.visible, n)),
                Some(
                    spec.hidden_ops()
                        .pairs()
                        .zip(&lat.hidden)
                        .map(|((p, q), block)| (format!("{p}{q}"), unpack(block, m)))
                        .collect(),
                ),
            ),
            None => (None, None),
        };
        Self {
            family: spec.family().name().to_string(),
            n,
            m,
            pauli_set: spec.hidden_ops().iter().map(key).collect(),
            a: params.visible.clone(),
            b,
            w,
            lateral_v,
            lateral_h,
            version: None,
            config: None,
        }
    }

    pub fn to_model(&self) -> Result<(ModelSpec, Parameters), CliError> {
        let usage = |e: sqrbm_core::Error| CliError::Usage(format!("invalid checkpoint: {e}"));
        let family = Family::from_name(&self.family)
            .ok_or_else(|| CliError::Usage(format!("unknown family `{}`", self.family)))?;
        let ops = OperatorSet::parse(&self.pauli_set.concat()).map_err(usage)?;
        let spec = ModelSpec::new(family, self.n, self.m, ops).map_err(usage)?;
        let mut params = Parameters::zeros(&spec);
        params.visible.clone_from(&self.a);
        let keys: Vec<String> = ops.iter().map(|p| p.symbol().to_string()).collect();
        let b_keys: Vec<&String> = self.b.keys().collect();
        let w_keys: Vec<&String> = self.w.keys().collect();
        for (name, map_keys) in [("b", b_keys), ("w", w_keys)] {
            if !map_keys.into_iter().eq(keys.iter()) {
                return Err(CliError::Usage(format!(
                    "checkpoint `{name}` keys must be exactly {}",
                    keys.join(",")
                )));
            }
        }
        for (channel, k) in params.channels.iter_mut().zip(&keys) {
            channel.bias.clone_from(&self.b[k]);
            let rows = &self.w[k];
            if rows.len() != self.n || rows.iter().any(|r| r.len() != self.m) {
                return Err(CliError::Usage(format!(
                    "`w.{k}` must be {}×{}",
                    self.n, self.m
                )));
            }
            channel.weights = rows.concat();
        }
        params.laterals = match (&self.lateral_v, &self.lateral_h, family) {
            (Some(v), Some(h), Family::SqBm) => {
                let mut hidden = Vec::new();
                for (p, q) in ops.pairs() {
                    let name = format!("{p}{q}");
                    let block = h
                        .get(&name)
                        .ok_or_else(|| CliError::Usage(format!("missing `lateral_h.{name}`")))?;
                    hidden.push(pack(&format!("lateral_h.{name}"), block, self.m)?);
                }
                if h.len() != hidden.len() {
                    return Err(CliError::Usage("unexpected `lateral_h` keys".into()));
                }
                Some(Laterals {
                    visible: pack("lateral_v", v, self.n)?,
                    hidden,
                })
            }
            (None, None, Family::SqBm) => {
                return Err(CliError::Usage(
                    "sqBM checkpoint needs lateral_v and lateral_h".into(),
                ))
            }
            (None, None, _) => None,
            _ => {
                return Err(CliError::Usage(
                    "lateral couplings are only valid for sqBM checkpoints".into(),
                ))
            }
        };
        params.validate(&spec).map_err(usage)?;
        Ok((spec, params))
    }
}

/// `{"n": …, "support": {"0011": 0.25, …}}` with bitstrings written `v_1` first.
pub fn target_json(q: &TargetDistribution) -> Value {
    let support: serde_json::Map<String, Value> = q
        .iter()
        .map(|(v, p)| (format_bitstring(v, q.n()), json!(p)))
        .collect();
    json!({ "n": q.n(), "support": support })
}

pub const SWEEP_HEADER: [&str; 9] = [
    "dataset",
    "n",
    "m",
    "model",
    "seed",
    "param_count",
    "final_kl",
    "final_tvd",
    "iters",
];

fn comment_lines(config: &Value) -> String {
    format!(
        "# sqrbm {}\n# config: {}\n",
        sqrbm_core::VERSION,
        serde_json::to_string(config).unwrap_or_default()
    )
}

/// Sweep table with a two-line `#` comment header carrying version and resolved config.
pub fn write_sweep_csv(path: &Path, rows: &[SweepRow], config: &Value) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Runtime(e.to_string());
    w.write_record(SWEEP_HEADER).map_err(err)?;
    for r in rows {
        w.write_record([
            r.dataset.name().to_string(),
            r.n.to_string(),
            r.m.to_string(),
            r.model.name().to_string(),
            r.seed.to_string(),
            r.param_count.to_string(),
            cell(r.final_kl),
            cell(r.final_tvd),
            r.iters.to_string(),
        ])
        .map_err(err)?;
    }
    let body = w
        .into_inner()
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let mut bytes = comment_lines(config).into_bytes();
    bytes.extend(body);
    write_file(path, &bytes)
}

pub fn read_sweep_csv(path: &Path) -> Result<Vec<SweepRow>, CliError> {
    let bad = |msg: String| CliError::Runtime(format!("{}: {msg}", path.display()));
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| bad(e.to_string()))?;
    let header = r.headers().map_err(|e| bad(e.to_string()))?.clone();
    if !header.iter().eq(SWEEP_HEADER) {
        return Err(bad("not a sweep table".into()));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let f = |k: usize| rec.get(k).unwrap_or_default();
        let int = |k: usize| {
            f(k).parse::<u64>()
                .map_err(|e| bad(format!("column {k}: {e}")))
        };
        let float = |k: usize| {
            f(k).parse::<f64>()
                .map_err(|e| bad(format!("column {k}: {e}")))
        };
        rows.push(SweepRow {
            dataset: DatasetKind::from_name(f(0))
                .ok_or_else(|| bad(format!("dataset `{}`", f(0))))?,
            n: int(1)? as usize,
            m: int(2)? as usize,
            model: ModelKind::from_name(f(3)).ok_or_else(|| bad(format!("model `{}`", f(3))))?,
            seed: int(4)?,
            param_count: int(5)? as usize,
            final_kl: float(6)?,
            final_tvd: float(7)?,
            iters: int(8)? as usize,
        });
    }
    Ok(rows)
}

pub const GRADVAR_HEADER: [&str; 10] = [
    "model", "n", "m", "param", "var_x", "se_x", "var_y", "se_y", "var_z", "se_z",
];

/// Wide gradient-variance table: one row per (model, n, m, parameter family); channels
/// absent from a model are left empty.
pub fn write_gradvar_csv(
    path: &Path,
    rows: &[VarianceRow],
    config: &Value,
) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Runtime(e.to_string());
    w.write_record(GRADVAR_HEADER).map_err(err)?;
    for r in rows {
        let mut rec = vec![
            r.model.name().to_string(),
            r.n.to_string(),
            r.m.to_string(),
            r.family.name().to_string(),
        ];
        for stat in &r.channels {
            match stat {
                Some(s) => rec.extend([cell(s.variance), cell(s.std_error)]),
                None => rec.extend([String::new(), String::new()]),
            }
        }
        w.write_record(&rec).map_err(err)?;
    }
    let body = w
        .into_inner()
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let mut bytes = comment_lines(config).into_bytes();
    bytes.extend(body);
    write_file(path, &bytes)
}

/// Writes `text` to `path`, or to stdout when `path` is `-`.
pub fn emit(path: &Path, text: &str) -> Result<(), CliError> {
    if path.as_os_str() == "-" {
        let mut out = std::io::stdout().lock();
        out.write_all(text.as_bytes())
            .map_err(|e| CliError::Runtime(e.to_string()))
    } else {
        write_file(path, text.as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use sqrbm_core::model::init_uniform;

    #[test]
    fn checkpoint_round_trips_bit_identically() {
        for spec in [
            ModelSpec::rbm(3, 2).unwrap(),
            ModelSpec::sq_rbm(2, 3, OperatorSet::XYZ).unwrap(),
            ModelSpec::sq_bm(3, 2, OperatorSet::XZ).unwrap(),
        ] {
            for seed in 0..20 {
                let params = init_uniform(&spec, seed, -5.0, 5.0).unwrap();
                let text = serde_json::to_string(&Checkpoint::new(&spec, &params)).unwrap();
                let back: Checkpoint = serde_json::from_str(&text).unwrap();
                let (spec2, params2) = back.to_model().unwrap();
                assert_eq!(spec2, spec);
                let a = params.flatten(&spec).unwrap();
                let b = params2.flatten(&spec).unwrap();
                assert!(a
                    .iter()
                    .zip(b.iter())
                    .all(|(x, y)| x.to_bits() == y.to_bits()));
            }
        }
    }

    #[test]
    fn checkpoint_layout() {
        let spec = ModelSpec::rbm(2, 1).unwrap();
        let params = Parameters::unflatten(&spec, &[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let v = serde_json::to_value(Checkpoint::new(&spec, &params)).unwrap();
        assert_eq!(
            v,
            json!({"family": "RBM", "n": 2, "m": 1, "pauli_set": ["Z"],
                   "a": [1.0, 2.0], "b": {"Z": [3.0]}, "w": {"Z": [[4.0], [5.0]]}})
        );
    }

    #[test]
    fn checkpoint_rejects_malformed() {
        let spec = ModelSpec::sq_bm(2, 2, OperatorSet::XZ).unwrap();
        let good = Checkpoint::new(&spec, &Parameters::zeros(&spec));
        let mut bad = good.clone();
        bad.lateral_v.as_mut().unwrap()[1][0] = 1.0;
        assert!(bad.to_model().is_err());
        let mut bad = good.clone();
        bad.b.remove("X");
        assert!(bad.to_model().is_err());
        let mut bad = good.clone();
        bad.w.get_mut("Z").unwrap()[0].push(0.0);
        assert!(bad.to_model().is_err());
        let mut bad = good;
        bad.lateral_h = None;
        assert!(bad.to_model().is_err());
    }

    #[test]
    fn sweep_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let rows = vec![SweepRow {
            dataset: DatasetKind::Parity,
            n: 4,
            m: 2,
            model: ModelKind::SqRbmXyz,
            seed: 3,
            param_count: 34,
            final_kl: 0.1 + 0.2,
            final_tvd: f64::INFINITY,
            iters: 17,
        }];
        write_sweep_csv(&path, &rows, &json!({"k": 1})).unwrap();
        assert_eq!(read_sweep_csv(&path).unwrap(), rows);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# sqrbm "));
    }

    #[test]
    fn non_finite_numbers() {
        assert_eq!(num(f64::INFINITY), json!("inf"));
        assert_eq!(num(1.5), json!(1.5));
        assert_eq!(strip_meta(json!({"a": 1, "meta": {}})), json!({"a": 1}));
    }
}
