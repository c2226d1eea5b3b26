//! File formats: JSON input schemas, CSV and JSON emitters at full double
//! precision, and atomic file writes.
//!
//! Every float is printed with 17 significant digits so that equal inputs
//! produce byte-identical artifacts and parsing the text recovers the exact
//! bits. Non-finite values are written as the strings `inf`, `-inf`, `nan`
//! in both CSV cells and JSON (where they appear as JSON strings).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Deserialize;
use serde_json::Value;

use crate::equilibration::{EnsembleNetwork, EquilibrationHistory};
use crate::error::{Error, Result};
use crate::game::PayoffMatrix;
use crate::info::JointDistribution;
use crate::lax::FrequencyMatrix;
use crate::quantum::{von_neumann_entropy, DensityOperator};
use crate::replicator::Trajectory;
use crate::thermo::CanonicalEnsemble;

/// Full-precision text for one float: scientific notation with 17
/// significant digits, or a non-finite sentinel.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x:.16e}")
    }
}

/// JSON value for one float: a number when finite, else the sentinel string.
pub fn json_float(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(serde_json::Number::from_f64(x).expect("finite float"))
    } else {
        Value::String(format_float(x))
    }
}

/// Pretty-prints a JSON value with two-space indentation, floats at full
/// precision, and a trailing newline. Object keys render in sorted order.
pub fn to_json_string(value: &Value) -> String {
    let mut out = String::new();
    render_json(value, 0, &mut out);
    out.push('\n');
    out
}

fn render_json(value: &Value, indent: usize, out: &mut String) {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                let _ = write!(out, "{i}");
            } else if let Some(u) = n.as_u64() {
                let _ = write!(out, "{u}");
            } else {
                let _ = write!(out, "{:.16e}", n.as_f64().expect("numeric value"));
            }
        }
        Value::String(s) => {
            out.push_str(&serde_json::to_string(s).expect("string escapes"));
        }
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                out.push_str(if i == 0 { "\n" } else { ",\n" });
                out.push_str(&"  ".repeat(indent + 1));
                render_json(item, indent + 1, out);
            }
            out.push('\n');
            out.push_str(&"  ".repeat(indent));
            out.push(']');
        }
        Value::Object(fields) => {
            if fields.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push('{');
            for (i, (key, item)) in fields.iter().enumerate() {
                out.push_str(if i == 0 { "\n" } else { ",\n" });
                out.push_str(&"  ".repeat(indent + 1));
                out.push_str(&serde_json::to_string(key).expect("string escapes"));
                out.push_str(": ");
                render_json(item, indent + 1, out);
            }
            out.push('\n');
            out.push_str(&"  ".repeat(indent));
            out.push('}');
        }
    }
}

/// Writes via a sibling temp file plus rename, so readers never observe a
/// partially written artifact.
pub fn atomic_write(path: &Path, contents: &str) -> Result<()> {
    let describe = |err: std::io::Error| {
        Error::InvalidArgument(format!("writing {}: {err}", path.display()))
    };
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    fs::write(&tmp, contents).map_err(describe)?;
    fs::rename(&tmp, path).map_err(describe)
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|err| Error::InvalidArgument(format!("reading {}: {err}", path.display())))
}

fn parse_json<'a, T: Deserialize<'a>>(text: &'a str, path: &Path) -> Result<T> {
    serde_json::from_str(text)
        .map_err(|err| Error::InvalidArgument(format!("parsing {}: {err}", path.display())))
}

/// Payoff matrix plus optional strategy labels, as read from a game file.
#[derive(Debug, Clone)]
pub struct GameInput {
    pub payoff: PayoffMatrix,
    pub labels: Option<Vec<String>>,
}

#[derive(Deserialize)]
struct GameFile {
    n: usize,
    payoff: Vec<Vec<f64>>,
    labels: Option<Vec<String>>,
}

/// Reads `{ "n": ..., "payoff": [[...]], "labels": [...]? }`.
pub fn read_game(path: &Path) -> Result<GameInput> {
    let text = read_to_string(path)?;
    let file: GameFile = parse_json(&text, path)?;
    if file.payoff.len() != file.n {
        return Err(Error::InvalidArgument(format!(
            "{}: payoff has {} rows but n = {}",
            path.display(),
            file.payoff.len(),
            file.n
        )));
    }
    if let Some(labels) = &file.labels {
        if labels.len() != file.n {
            return Err(Error::InvalidArgument(format!(
                "{}: {} labels for {} strategies",
                path.display(),
                labels.len(),
                file.n
            )));
        }
    }
    Ok(GameInput { payoff: PayoffMatrix::new(file.payoff)?, labels: file.labels })
}

#[derive(Deserialize)]
struct JointFile {
    rows: usize,
    cols: usize,
    probs: Vec<Vec<f64>>,
}

/// Reads `{ "rows": m, "cols": n, "probs": [[...], ...] }`.
pub fn read_joint(path: &Path) -> Result<JointDistribution> {
    let text = read_to_string(path)?;
    let file: JointFile = parse_json(&text, path)?;
    if file.probs.len() != file.rows || file.probs.iter().any(|row| row.len() != file.cols) {
        return Err(Error::InvalidArgument(format!(
            "{}: probs shape does not match rows = {}, cols = {}",
            path.display(),
            file.rows,
            file.cols
        )));
    }
    JointDistribution::new(file.probs)
}

#[derive(Deserialize)]
struct EnsembleFile {
    energies: Vec<f64>,
    beta: f64,
}

/// Reads `{ "energies": [...], "beta": ... }`.
pub fn read_ensemble(path: &Path) -> Result<CanonicalEnsemble> {
    let text = read_to_string(path)?;
    let file: EnsembleFile = parse_json(&text, path)?;
    CanonicalEnsemble::new(file.energies, file.beta)
}

/// Node ids may be JSON strings or integers; both become strings.
#[derive(Deserialize)]
#[serde(untagged)]
enum NodeId {
    Int(i64),
    Text(String),
}

impl NodeId {
    fn into_string(self) -> String {
        match self {
            NodeId::Int(i) => i.to_string(),
            NodeId::Text(s) => s,
        }
    }
}

#[derive(Deserialize)]
struct ScenarioNode {
    id: NodeId,
    energies: Vec<f64>,
    beta: f64,
}

#[derive(Deserialize)]
struct ScenarioFile {
    nodes: Vec<ScenarioNode>,
    edges: Vec<(NodeId, NodeId)>,
    kappa: f64,
    merge_tol: f64,
    dt: f64,
    t_end: f64,
}

/// An equilibration scenario: the network plus its own time grid.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub network: EnsembleNetwork,
    pub dt: f64,
    pub t_end: f64,
}

/// Reads `{ "nodes": [{"id", "energies", "beta"}], "edges": [[id,id]],
/// "kappa", "merge_tol", "dt", "t_end" }`.
pub fn read_scenario(path: &Path) -> Result<Scenario> {
    let text = read_to_string(path)?;
    let file: ScenarioFile = parse_json(&text, path)?;
    let mut members = Vec::with_capacity(file.nodes.len());
    for node in file.nodes {
        members.push((node.id.into_string(), CanonicalEnsemble::new(node.energies, node.beta)?));
    }
    let edges: Vec<(String, String)> = file
        .edges
        .into_iter()
        .map(|(a, b)| (a.into_string(), b.into_string()))
        .collect();
    let network = EnsembleNetwork::new(members, &edges, file.kappa, file.merge_tol)?;
    Ok(Scenario { network, dt: file.dt, t_end: file.t_end })
}

fn push_row(out: &mut String, cells: impl IntoIterator<Item = String>) {
    let mut first = true;
    for cell in cells {
        if !first {
            out.push(',');
        }
        out.push_str(&cell);
        first = false;
    }
    out.push('\n');
}

/// CSV `t,x_1,...,x_n,H`. Entropies are multiplied by `entropy_scale`
/// (1 for nats, 1/ln 2 for bits).
pub fn trajectory_csv(traj: &Trajectory, entropy_scale: f64) -> String {
    let n = traj.states.first().map_or(0, |x| x.len());
    let mut out = String::new();
    push_row(
        &mut out,
        std::iter::once("t".to_string())
            .chain((1..=n).map(|i| format!("x_{i}")))
            .chain(std::iter::once("H".to_string())),
    );
    for ((t, x), h) in traj.times.iter().zip(&traj.states).zip(&traj.entropies) {
        push_row(
            &mut out,
            std::iter::once(format_float(*t))
                .chain(x.probs().iter().map(|&p| format_float(p)))
                .chain(std::iter::once(format_float(h * entropy_scale))),
        );
    }
    out
}

/// CSV `t,x_11,x_12,...,x_nn`, row-major.
pub fn matrix_trajectory_csv(samples: &[(f64, FrequencyMatrix)]) -> String {
    let n = samples.first().map_or(0, |(_, x)| x.n());
    let mut out = String::new();
    push_row(
        &mut out,
        std::iter::once("t".to_string()).chain(
            (1..=n).flat_map(|i| (1..=n).map(move |j| format!("x_{i}{j}"))),
        ),
    );
    for (t, x) in samples {
        push_row(
            &mut out,
            std::iter::once(format_float(*t)).chain(
                (0..n).flat_map(|i| (0..n).map(move |j| format_float(x.entry(i, j)))),
            ),
        );
    }
    out
}

/// CSV `t,lambda_1,...,lambda_n` with eigenvalues ascending.
pub fn matrix_eigenvalue_csv(samples: &[(f64, FrequencyMatrix)]) -> String {
    let n = samples.first().map_or(0, |(_, x)| x.n());
    let mut out = String::new();
    push_row(
        &mut out,
        std::iter::once("t".to_string()).chain((1..=n).map(|i| format!("lambda_{i}"))),
    );
    for (t, x) in samples {
        push_row(
            &mut out,
            std::iter::once(format_float(*t))
                .chain(x.eigenvalues().into_iter().map(format_float)),
        );
    }
    out
}

/// CSV `t,re_11,im_11,re_12,im_12,...`, row-major.
pub fn density_trajectory_csv(samples: &[(f64, DensityOperator)]) -> String {
    let n = samples.first().map_or(0, |(_, rho)| rho.n());
    let mut out = String::new();
    push_row(
        &mut out,
        std::iter::once("t".to_string()).chain((1..=n).flat_map(|i| {
            (1..=n).flat_map(move |j| [format!("re_{i}{j}"), format!("im_{i}{j}")])
        })),
    );
    for (t, rho) in samples {
        push_row(
            &mut out,
            std::iter::once(format_float(*t)).chain((0..n).flat_map(|i| {
                (0..n).flat_map(move |j| {
                    let z = rho.entry(i, j);
                    [format_float(z.re), format_float(z.im)]
                })
            })),
        );
    }
    out
}

/// CSV `t,lambda_1,...,lambda_n,S`: the spectrum (ascending) and the
/// eigenbasis entropy, scaled by `entropy_scale`.
pub fn density_spectrum_csv(
    samples: &[(f64, DensityOperator)],
    entropy_scale: f64,
) -> Result<String> {
    let n = samples.first().map_or(0, |(_, rho)| rho.n());
    let mut out = String::new();
    push_row(
        &mut out,
        std::iter::once("t".to_string())
            .chain((1..=n).map(|i| format!("lambda_{i}")))
            .chain(std::iter::once("S".to_string())),
    );
    for (t, rho) in samples {
        let s = von_neumann_entropy(rho)?;
        push_row(
            &mut out,
            std::iter::once(format_float(*t))
                .chain(rho.eigenvalues().into_iter().map(format_float))
                .chain(std::iter::once(format_float(s * entropy_scale))),
        );
    }
    Ok(out)
}

/// CSV `t,block_count,total_energy,tau_<id>,...`.
pub fn history_csv(history: &EquilibrationHistory) -> String {
    let mut out = String::new();
    push_row(
        &mut out,
        ["t".to_string(), "block_count".to_string(), "total_energy".to_string()]
            .into_iter()
            .chain(history.node_ids.iter().map(|id| format!("tau_{id}"))),
    );
    for (((t, count), energy), taus) in history
        .times
        .iter()
        .zip(&history.block_counts)
        .zip(&history.total_energy)
        .zip(&history.temperatures)
    {
        push_row(
            &mut out,
            [format_float(*t), count.to_string(), format_float(*energy)]
                .into_iter()
                .chain(taus.iter().map(|&tau| format_float(tau))),
        );
    }
    out
}
