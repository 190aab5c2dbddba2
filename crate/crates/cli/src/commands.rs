use std::fmt;
use std::path::Path;
use std::time::Instant;

use gram_expect::expected::all_paths;
use gram_expect::models::Model;
use gram_expect::monte_carlo::{format_f64, stddev_trend_with, KindSelection};
use gram_expect::oracles::{char_poly_coeffs_of_gram, det_bareiss, gram};
use gram_expect::scalar::{format_rational, to_decimal};
use gram_expect::{
    char_coeffs, egf_expand_det, egf_expand_perm, expected_det_recursion, expected_det_sequence_from_char,
    expected_perm_from_char, expected_perm_recursion, simulate, traces_by_power, Error, ExactMatrix, ExactScalar,
    ExpectedSequence, Kind, MultinomialCountModel, OracleLimits, SimulationConfig, SimulationReport,
};
use clap::ValueEnum;
use serde_json::{json, Value};

use crate::args::{Cli, Command, Common, KindArg, OracleName, OutputFormat, PathArg};
use crate::manifest::RunManifest;
use crate::render;

#[derive(Debug)]
pub enum Failure {
    /// Independent computation paths disagreed.
    Mismatch(String),
    /// Bad arguments or unreadable input.
    Usage(String),
    /// A resource guard refused the work.
    Guard(String),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Mismatch(m) => write!(f, "verification mismatch: {m}"),
            Failure::Usage(m) | Failure::Guard(m) => f.write_str(m),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::GuardExceeded(_) => Failure::Guard(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

type Outcome = Result<String, Failure>;

/// The spelling a value enum has on the command line.
fn value_name(v: &impl ValueEnum) -> String {
    v.to_possible_value().map(|p| p.get_name().to_string()).unwrap_or_default()
}

pub fn run(cli: &Cli) -> Result<(), Failure> {
    let started = Instant::now();
    let common = &cli.common;
    let (name, config, output) = match &cli.command {
        Command::Moments => {
            let model = load_model(common)?;
            ("moments", json!({ "model": model }), moments(common, &model)?)
        }
        Command::Model => {
            let model = load_model(common)?;
            ("model", json!({ "model": model }), serde_json::to_string(&model).expect("model serializes") + "\n")
        }
        Command::Traces { n } => {
            let model = load_model(common)?;
            ("traces", json!({ "model": model, "n": n }), traces(common, &model, *n)?)
        }
        Command::Expect { n, kind, path } => {
            let model = load_model(common)?;
            let config = json!({
                "model": model,
                "n": n,
                "kind": value_name(kind),
                "path": value_name(path),
                "decimals": common.decimals,
            });
            ("expect", config, expect(common, &model, *n, *kind, *path)?)
        }
        Command::Oracle {
            name,
            matrix,
            ones,
            identity,
            n,
            kind,
            max_index,
        } => {
            let config = json!({
                "oracle": value_name(name),
                "matrix": matrix,
                "ones": ones,
                "identity": identity,
                "n": n,
                "kind": value_name(kind),
                "max_index": max_index,
                "guard_ops": common.guard_ops,
            });
            let out = oracle(common, *name, matrix.as_deref(), *ones, *identity, *n, *kind, *max_index)?;
            ("oracle", config, out)
        }
        Command::Simulate {
            n,
            reps,
            max_index,
            kind,
            exact_limit,
            csv_dir,
        } => {
            let model = load_model(common)?;
            let config = json!({
                "model": model,
                "n": n,
                "reps": reps,
                "max_index": max_index,
                "kind": value_name(kind),
                "exact_limit": exact_limit,
                "seed": common.seed,
                "guard_ops": common.guard_ops,
            });
            let mut sim = SimulationConfig::new(model, *n, *reps, *max_index, selection(*kind), common.seed);
            sim.exact_limit = *exact_limit;
            sim.limits = limits(common);
            sim.threads = common.threads;
            let report = simulate(&sim)?;
            if let Some(dir) = csv_dir {
                write_samples(dir, &report)?;
            }
            ("simulate", config, render_report(common, &report))
        }
        Command::Trend { n_list, reps, index, kind } => {
            let model = load_model(common)?;
            let kind = match kind {
                KindArg::Det => Kind::Determinant,
                KindArg::Perm => Kind::Permanent,
                KindArg::Both => return Err(Failure::Usage("trend takes --kind det or --kind perm".into())),
            };
            let config = json!({
                "model": model,
                "n_list": n_list,
                "reps": reps,
                "index": index,
                "kind": kind.label(),
                "seed": common.seed,
            });
            let trend = stddev_trend_with(&model, n_list, *reps, *index, kind, common.seed, common.threads)?;
            ("trend", config, render_trend(common, kind, *index, &trend))
        }
    };
    print!("{output}");
    RunManifest::new(name, config, common.seed, started.elapsed(), &output)
        .emit(common.manifest.as_deref())
        .map_err(|e| Failure::Usage(format!("cannot write manifest: {e}")))
}

fn load_model(common: &Common) -> Result<Model, Failure> {
    if common.paper {
        return Ok(Model::Multinomial(MultinomialCountModel::reference()));
    }
    let Some(path) = &common.model else {
        return Err(Failure::Usage("a model is required: pass --model FILE or --paper".into()));
    };
    let text = read(path)?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn limits(common: &Common) -> OracleLimits {
    let mut limits = OracleLimits::default();
    if let Some(ops) = common.guard_ops {
        limits.perm_poly_max_ops = ops;
        limits.brute_force_max_tuples = ops;
    }
    limits
}

fn selection(kind: KindArg) -> KindSelection {
    match kind {
        KindArg::Det => KindSelection::Det,
        KindArg::Perm => KindSelection::Perm,
        KindArg::Both => KindSelection::Both,
    }
}

fn matrix_output(common: &Common, m: &ExactMatrix) -> String {
    let rows = render::rational_rows(&m.to_rows());
    match common.output {
        OutputFormat::Json => serde_json::to_string(m).expect("matrix serializes") + "\n",
        OutputFormat::Csv => rows.iter().map(|r| r.join(",") + "\n").collect(),
        OutputFormat::Table => {
            let header: Vec<String> = (1..=m.cols()).map(|j| format!("[{j}]")).collect();
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            render::table(&header, &rows)
        }
    }
}

fn moments(common: &Common, model: &Model) -> Outcome {
    Ok(matrix_output(common, model.moment_matrix().matrix()))
}

fn traces(common: &Common, model: &Model, n: usize) -> Outcome {
    if n == 0 {
        return Err(Failure::Usage("traces needs n >= 1".into()));
    }
    let t = traces_by_power(&model.moment_matrix(), n);
    let rows: Vec<Vec<String>> = t
        .values()
        .iter()
        .enumerate()
        .map(|(k, v)| vec![(k + 1).to_string(), format_rational(v), to_decimal(v, common.decimals)])
        .collect();
    Ok(match common.output {
        OutputFormat::Json => serde_json::to_string(&t).expect("traces serialize") + "\n",
        OutputFormat::Csv => render::csv(&["n", "t_n", "decimal"], &rows),
        OutputFormat::Table => render::table(&["n", "t_n", "decimal"], &rows),
    })
}

/// First index at which any path differs from the first, if any.
pub(crate) fn first_disagreement(paths: &[ExpectedSequence]) -> Option<String> {
    let reference = paths.first()?;
    for other in &paths[1..] {
        for (n, (a, b)) in reference.values.iter().zip(&other.values).enumerate() {
            if a != b {
                return Some(format!(
                    "{} index {n}: {} = {}, {} = {}",
                    reference.kind.label(),
                    reference.path,
                    format_rational(a),
                    other.path,
                    format_rational(b)
                ));
            }
        }
        if reference.values.len() != other.values.len() {
            return Some(format!("{} paths have different lengths", reference.kind.label()));
        }
    }
    None
}

fn expect(common: &Common, model: &Model, n: usize, kind: KindArg, path: PathArg) -> Outcome {
    let m = model.moment_matrix();
    let kinds: &[Kind] = match kind {
        KindArg::Det => &[Kind::Determinant],
        KindArg::Perm => &[Kind::Permanent],
        KindArg::Both => &[Kind::Determinant, Kind::Permanent],
    };
    let traces = traces_by_power(&m, n.max(1));
    let coeffs = char_coeffs(&m);
    let mut sequences = Vec::new();
    for &k in kinds {
        let seq = match (path, k) {
            (PathArg::All, _) => {
                let paths = all_paths(&m, k, n)?;
                if let Some(diff) = first_disagreement(&paths) {
                    return Err(Failure::Mismatch(diff));
                }
                let [recursion, _, _] = paths;
                recursion
            }
            (PathArg::Recursion, Kind::Determinant) => expected_det_recursion(&traces, n)?,
            (PathArg::Recursion, Kind::Permanent) => expected_perm_recursion(&traces, n)?,
            (PathArg::Char, Kind::Determinant) => expected_det_sequence_from_char(&coeffs, n),
            (PathArg::Char, Kind::Permanent) => expected_perm_from_char(&coeffs, n)?,
            (PathArg::Egf, Kind::Determinant) => egf_expand_det(&traces, n)?,
            (PathArg::Egf, Kind::Permanent) => egf_expand_perm(&traces, n)?,
        };
        sequences.push(seq);
    }
    let places = common.decimals;
    Ok(match common.output {
        OutputFormat::Json => {
            let mut obj = serde_json::Map::new();
            obj.insert("n".into(), json!(n));
            obj.insert("decimals".into(), json!(places));
            if path == PathArg::All {
                obj.insert("paths_agree".into(), json!(true));
            }
            for seq in &sequences {
                let values: Vec<Value> = seq
                    .values
                    .iter()
                    .enumerate()
                    .map(|(i, v)| json!({"n": i, "exact": format_rational(v), "decimal": to_decimal(v, places)}))
                    .collect();
                let path_label = if path == PathArg::All { "all".to_string() } else { seq.path.to_string() };
                obj.insert(seq.kind.label().into(), json!({"path": path_label, "values": values}));
            }
            serde_json::to_string(&Value::Object(obj)).expect("json") + "\n"
        }
        OutputFormat::Csv | OutputFormat::Table => {
            let mut header = vec!["n".to_string()];
            for seq in &sequences {
                let sym = if seq.kind == Kind::Determinant { "a_n" } else { "p_n" };
                header.push(sym.to_string());
                header.push(format!("{sym} decimal"));
            }
            let rows: Vec<Vec<String>> = (0..=n)
                .map(|i| {
                    let mut row = vec![i.to_string()];
                    for seq in &sequences {
                        row.push(format_rational(&seq.values[i]));
                        row.push(to_decimal(&seq.values[i], places));
                    }
                    row
                })
                .collect();
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            if common.output == OutputFormat::Csv {
                render::csv(&header, &rows)
            } else {
                render::table(&header, &rows)
            }
        }
    })
}

fn oracle_matrix(matrix: Option<&Path>, ones: Option<usize>, identity: Option<usize>) -> Result<ExactMatrix, Failure> {
    match (matrix, ones, identity) {
        (Some(path), _, _) => {
            let text = read(path)?;
            serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
        }
        (None, Some(n), _) => Ok(ExactMatrix::filled(n, n, ExactScalar::from_integer(1.into()))),
        (None, None, Some(n)) => Ok(ExactMatrix::identity(n)),
        _ => Err(Failure::Usage("oracle needs --matrix FILE, --ones N or --identity N".into())),
    }
}

#[allow(clippy::too_many_arguments)]
fn oracle(
    common: &Common,
    name: OracleName,
    matrix: Option<&Path>,
    ones: Option<usize>,
    identity: Option<usize>,
    n: usize,
    kind: KindArg,
    max_index: Option<usize>,
) -> Outcome {
    let limits = limits(common);
    let label = value_name(&name);
    let scalar = |v: ExactScalar| -> String {
        match common.output {
            OutputFormat::Json => json!({"oracle": label, "value": format_rational(&v)}).to_string() + "\n",
            _ => format_rational(&v) + "\n",
        }
    };
    let list = |vs: Vec<ExactScalar>| -> String {
        let strings: Vec<String> = vs.iter().map(format_rational).collect();
        match common.output {
            OutputFormat::Json => json!({"oracle": label, "values": strings}).to_string() + "\n",
            OutputFormat::Csv => strings.join(",") + "\n",
            OutputFormat::Table => strings.join("\n") + "\n",
        }
    };
    if name == OracleName::BruteForce {
        let model = load_model(common)?;
        let dist = model
            .as_atoms()
            .ok_or_else(|| Failure::Usage("brute-force needs an atoms model".into()))?;
        let kinds: &[Kind] = match kind {
            KindArg::Det => &[Kind::Determinant],
            KindArg::Perm => &[Kind::Permanent],
            KindArg::Both => &[Kind::Determinant, Kind::Permanent],
        };
        let values = kinds
            .iter()
            .map(|&k| limits.brute_force_expectation(dist, n, k))
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(if values.len() == 1 {
            scalar(values.into_iter().next().expect("one value"))
        } else {
            list(values)
        });
    }
    let m = oracle_matrix(matrix, ones, identity)?;
    Ok(match name {
        OracleName::Gram => matrix_output(common, &gram(&m)),
        OracleName::DetExpansion => scalar(limits.det_expansion(&m)?),
        OracleName::PermExpansion => scalar(limits.perm_expansion(&m)?),
        OracleName::Ryser => scalar(limits.perm_ryser(&m)?),
        OracleName::Bareiss => scalar(det_bareiss(&m)?),
        OracleName::CharPoly => list(char_poly_coeffs_of_gram(&m)?),
        OracleName::PermPoly => list(limits.permanental_poly_coeffs(&m, max_index.unwrap_or(m.rows()))?),
        OracleName::BruteForce => unreachable!("handled above"),
    })
}

fn write_samples(dir: &Path, report: &SimulationReport) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::Usage(format!("{}: {e}", dir.display())))?;
    for kind in &report.results {
        let path = dir.join(format!("{}_samples.csv", kind.kind.label()));
        std::fs::write(&path, kind.samples_csv()).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn render_report(common: &Common, report: &SimulationReport) -> String {
    let header = ["kind", "i", "normalized_mean", "normalized_std_dev", "exact", "z_score", "exact_zeros"];
    let rows: Vec<Vec<String>> = report
        .results
        .iter()
        .flat_map(|k| {
            k.stats.iter().map(move |s| {
                vec![
                    k.kind.label().to_string(),
                    s.i.to_string(),
                    format_f64(s.normalized_mean),
                    format_f64(s.normalized_std_dev),
                    format_rational(&s.exact_value),
                    s.z_score.map_or_else(String::new, format_f64),
                    s.exact_zero_replicates.map_or_else(String::new, |z| z.to_string()),
                ]
            })
        })
        .collect();
    match common.output {
        OutputFormat::Json => serde_json::to_string(report).expect("report serializes") + "\n",
        OutputFormat::Csv => render::csv(&header, &rows),
        OutputFormat::Table => render::table(&header, &rows),
    }
}

fn render_trend(common: &Common, kind: Kind, index: usize, trend: &[(usize, f64)]) -> String {
    let rows: Vec<Vec<String>> = trend.iter().map(|(n, sd)| vec![n.to_string(), format_f64(*sd)]).collect();
    match common.output {
        OutputFormat::Json => {
            let points: Vec<String> = trend
                .iter()
                .map(|(n, sd)| format!(r#"{{"n":{n},"normalized_std_dev":{}}}"#, format_f64(*sd)))
                .collect();
            format!(
                r#"{{"kind":"{}","i":{index},"seed":{},"trend":[{}]}}"#,
                kind.label(),
                common.seed,
                points.join(",")
            ) + "\n"
        }
        OutputFormat::Csv => render::csv(&["n", "normalized_std_dev"], &rows),
        OutputFormat::Table => render::table(&["n", "normalized_std_dev"], &rows),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use gram_expect::PathKind;

    #[test]
    fn disagreement_is_reported() {
        let one = ExactScalar::from_integer(1.into());
        let two = ExactScalar::from_integer(2.into());
        let a = ExpectedSequence { kind: Kind::Permanent, path: PathKind::Recursion, values: vec![one.clone(), one.clone()] };
        let b = ExpectedSequence { kind: Kind::Permanent, path: PathKind::Egf, values: vec![one.clone(), two] };
        let msg = first_disagreement(&[a.clone(), b]).unwrap();
        assert!(msg.contains("index 1"), "{msg}");
        assert!(first_disagreement(&[a.clone(), a]).is_none());
    }
}
