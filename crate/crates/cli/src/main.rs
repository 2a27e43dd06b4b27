//! Command-line front end for the enumerator, transform, bound, feasibility
//! and construction routines.
//!
//! Every command reads plain files and writes plain files or stdout. Exit
//! codes separate the three outcomes scripts care about: 0 when the requested
//! computation succeeds, 2 when it succeeds but the mathematical verdict is
//! negative (infeasible program, violated bound, forbidden or unverified
//! state, reproduction mismatch), 1 when the program itself fails.

use std::error::Error;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, Subcommand};
use num_bigint::BigUint;
use serde_json::{json, Value};

use qweight_core::ame::{
    ame_scan, ame_shadow_profile, ame_verify, grid_construct, grid_to_state, scan_to_csv,
    CellStatus, HeatmapCell,
};
use qweight_core::bounds::{
    hamming_check, hamming_max_k, max_correctable_t, pure_singleton_check, pure_singleton_max_k,
    scott_check, singleton_check, singleton_max_k, BoundVerdict, BoundWitness, CodeParams,
};
use qweight_core::data::{bundled_state, expected_table};
use qweight_core::enumerators::{enumerate_state, EnumeratorProfile, Family, StateEnumerators};
use qweight_core::hilbert::MixedState;
use qweight_core::lp::{build_lp, code_feasible, tableau_text, LpVerdict};
use qweight_core::multiset::{DimensionMultiset, DimensionSpec};
use qweight_core::rational::{rat, rational_to_string, SnapConfig};
use qweight_core::transforms::{
    a_from_a_unitary, a_from_unitary_kernel, a_unitary_from_a, b_from_a, b_kernel,
    b_unitary_from_a_unitary, s_from_a, shadow_from_a_unitary, shadow_from_unitary_kernel,
    shadow_kernel, unitary_from_a_kernel,
};

type CliResult<T> = Result<T, Box<dyn Error>>;

const EXIT_OK: i32 = 0;
const EXIT_VERDICT_NO: i32 = 2;

#[derive(Parser)]
#[command(
    name = "qweight",
    version,
    about = "Weight enumerators, duality transforms, code bounds and entangled-state searches over mixed local dimensions"
)]
struct Cli {
    /// Cap the number of worker threads used by parallel scans
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute enumerator profiles of a state, one JSON file per family
    Enumerate {
        /// State JSON file ({"dims": [...], "terms": [...]})
        state: PathBuf,
        /// Families to emit: any of A, B, A', B', S, calligraphic
        #[arg(long, value_delimiter = ',')]
        families: Vec<String>,
        /// Directory receiving <state-stem>.<family>.json files
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Map a profile file into another family, or dump a kernel matrix
    Transform {
        /// Profile JSON file produced by `enumerate`
        profile: Option<PathBuf>,
        /// Target family reachable by an exact kernel from the input family
        #[arg(long)]
        into: Option<String>,
        /// Dump a kernel matrix instead: b, shadow, unitary-from-a,
        /// a-from-unitary or shadow-from-unitary
        #[arg(long)]
        kernel: Option<String>,
        /// Dimension list for --kernel, e.g. 2,3,3
        #[arg(long)]
        dims: Option<String>,
        /// Output file (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the packing, Singleton and nested-trace bounds
    Bounds {
        /// Local dimensions, e.g. 2,2,5
        #[arg(long)]
        dims: String,
        /// Code distance measured in error dimension
        #[arg(long)]
        distance: u64,
        /// Code size K to test; without it the implied maxima are printed
        #[arg(long)]
        k: Option<String>,
        /// Apply the pure-code versions where they differ
        #[arg(long)]
        pure: bool,
    },
    /// Decide exact feasibility of the enumerator program for a code
    Lp {
        /// Local dimensions, e.g. 2,2,5
        #[arg(long)]
        dims: String,
        /// Code size K
        #[arg(long, conflicts_with = "sweep_k")]
        k: Option<String>,
        /// Code distance measured in error dimension
        #[arg(long)]
        distance: u64,
        /// Add the pure-code equalities
        #[arg(long)]
        pure: bool,
        /// Print the constraint tableau instead of solving
        #[arg(long)]
        emit_lp: bool,
        /// Report one feasibility verdict per K from 1 up to this value
        #[arg(long)]
        sweep_k: Option<u64>,
        /// Output file for the verdict JSON (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scans, constructions and verification of maximally entangled states
    Ame {
        #[command(subcommand)]
        action: AmeCommand,
    },
    /// Rebuild a bundled table, figure or worked example and diff it
    Reproduce {
        /// Target id, e.g. tab:AME234, fig:heatmap23, ex:scott, or "all"
        target: String,
        /// Directory receiving the regenerated artifacts
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

#[derive(Subcommand)]
enum AmeCommand {
    /// Classify every split of two local dimensions by shadow positivity
    Scan {
        /// The two local dimensions, small first, e.g. 2,3
        #[arg(long)]
        dims: String,
        /// Largest total party count to scan
        #[arg(long, default_value_t = 13)]
        max_parties: u32,
        /// CSV output file (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search for a tripartite construction grid and emit the state
    Construct {
        /// The three local dimensions, e.g. 2,3,4
        #[arg(long = "d")]
        d: String,
        /// State JSON output file (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the grid itself as JSON
        #[arg(long)]
        grid_out: Option<PathBuf>,
    },
    /// Check a state for maximal mixedness across every small subsystem
    Verify {
        /// State JSON file
        state: PathBuf,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { EXIT_OK };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(err) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: could not configure {n} worker threads: {err}");
            std::process::exit(1);
        }
    }
    match run(cli.command) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(1);
        }
    }
}

fn run(command: Command) -> CliResult<i32> {
    match command {
        Command::Enumerate { state, families, out_dir } => enumerate(&state, &families, &out_dir),
        Command::Transform { profile, into, kernel, dims, out } => {
            transform(profile.as_deref(), into.as_deref(), kernel.as_deref(), dims.as_deref(), out.as_deref())
        }
        Command::Bounds { dims, distance, k, pure } => bounds(&dims, distance, k.as_deref(), pure),
        Command::Lp { dims, k, distance, pure, emit_lp, sweep_k, out } => {
            lp(&dims, k.as_deref(), distance, pure, emit_lp, sweep_k, out.as_deref())
        }
        Command::Ame { action } => match action {
            AmeCommand::Scan { dims, max_parties, out } => scan(&dims, max_parties, out.as_deref()),
            AmeCommand::Construct { d, out, grid_out } => {
                construct(&d, out.as_deref(), grid_out.as_deref())
            }
            AmeCommand::Verify { state } => verify(&state),
        },
        Command::Reproduce { target, out_dir } => reproduce(&target, &out_dir),
    }
}

fn snap_config() -> CliResult<SnapConfig> {
    match std::env::var("QWEIGHT_MAX_DENOM") {
        Ok(raw) => {
            let max_denom: u64 = raw
                .parse()
                .map_err(|_| format!("QWEIGHT_MAX_DENOM is not a positive integer: {raw:?}"))?;
            Ok(SnapConfig::with_max_denom(max_denom))
        }
        Err(_) => Ok(SnapConfig::default()),
    }
}

fn parse_dims(raw: &str) -> CliResult<Vec<u32>> {
    raw.split(',')
        .map(|part| {
            part.trim()
                .parse::<u32>()
                .map_err(|_| format!("bad dimension {part:?} in {raw:?}").into())
        })
        .collect()
}

fn parse_spec(raw: &str) -> CliResult<DimensionSpec> {
    Ok(DimensionSpec::new(parse_dims(raw)?)?)
}

fn parse_k(raw: &str) -> CliResult<BigUint> {
    BigUint::from_str(raw.trim()).map_err(|_| format!("bad code size K: {raw:?}").into())
}

fn load_state(path: &Path) -> CliResult<MixedState> {
    let text = fs::read_to_string(path)
        .map_err(|err| format!("cannot read {}: {err}", path.display()))?;
    Ok(MixedState::from_json_str(&text)?)
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let terminated =
        if text.ends_with('\n') { text.to_string() } else { format!("{text}\n") };
    fs::write(path, terminated).map_err(|err| format!("cannot write {}: {err}", path.display()))?;
    Ok(())
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => write_text(path, text),
        None => {
            if text.ends_with('\n') {
                print!("{text}");
            } else {
                println!("{text}");
            }
            Ok(())
        }
    }
}

fn enumerate(state_path: &Path, families: &[String], out_dir: &Path) -> CliResult<i32> {
    let state = load_state(state_path)?;
    let cfg = snap_config()?;
    let enums = enumerate_state(&state, &cfg)?;
    let wanted: Vec<String> = if families.is_empty() {
        vec!["A".into(), "B".into(), "A'".into(), "B'".into(), "S".into(), "calligraphic".into()]
    } else {
        families.to_vec()
    };
    let stem = state_path
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or("state path has no usable file stem")?
        .to_string();
    for token in wanted {
        let (tag, value) = family_output(&enums, &token)?;
        let path = out_dir.join(format!("{stem}.{tag}.json"));
        write_text(&path, &serde_json::to_string_pretty(&value)?)?;
        println!("wrote {}", path.display());
    }
    Ok(EXIT_OK)
}

fn family_output(enums: &StateEnumerators, token: &str) -> CliResult<(&'static str, Value)> {
    if token.trim().eq_ignore_ascii_case("calligraphic") {
        return Ok(("calligraphic", enums.calligraphic.to_json_value()));
    }
    let (tag, profile) = match Family::parse(token)? {
        Family::A => ("a", &enums.a),
        Family::B => ("b", &enums.b),
        Family::APrime => ("a_prime", &enums.a_prime),
        Family::BPrime => ("b_prime", &enums.b_prime),
        Family::Shadow => ("shadow", &enums.shadow),
    };
    Ok((tag, profile.to_json_value()))
}

fn transform(
    profile: Option<&Path>,
    into: Option<&str>,
    kernel: Option<&str>,
    dims: Option<&str>,
    out: Option<&Path>,
) -> CliResult<i32> {
    match (profile, kernel) {
        (None, Some(name)) => {
            let raw = dims.ok_or("--kernel needs --dims")?;
            let total = parse_spec(raw)?.multiset();
            let matrix = match name {
                "b" => b_kernel(&total)?,
                "shadow" => shadow_kernel(&total)?,
                "unitary-from-a" => unitary_from_a_kernel(&total)?,
                "a-from-unitary" => a_from_unitary_kernel(&total)?,
                "shadow-from-unitary" => shadow_from_unitary_kernel(&total)?,
                other => return Err(format!("unknown kernel {other:?}").into()),
            };
            emit(out, &matrix.to_csv())?;
            Ok(EXIT_OK)
        }
        (Some(path), None) => {
            let target = Family::parse(into.ok_or("--into is required with a profile file")?)?;
            let text = fs::read_to_string(path)
                .map_err(|err| format!("cannot read {}: {err}", path.display()))?;
            let input = EnumeratorProfile::from_json_value(&serde_json::from_str::<Value>(&text)?)?;
            let output = match (input.family(), target) {
                (Family::A, Family::B) => b_from_a(&input)?,
                (Family::A, Family::Shadow) => s_from_a(&input)?,
                (Family::A, Family::APrime) => a_unitary_from_a(&input)?,
                (Family::APrime, Family::A) => a_from_a_unitary(&input)?,
                (Family::APrime, Family::Shadow) => shadow_from_a_unitary(&input)?,
                (Family::APrime, Family::BPrime) => b_unitary_from_a_unitary(&input)?,
                (from, to) => {
                    return Err(format!(
                        "no exact kernel from family {} to family {}",
                        from.as_str(),
                        to.as_str()
                    )
                    .into())
                }
            };
            emit(out, &serde_json::to_string_pretty(&output.to_json_value())?)?;
            Ok(EXIT_OK)
        }
        _ => Err("pass either a profile file with --into, or --kernel with --dims".into()),
    }
}

fn scott_summary(spec: &DimensionSpec) -> CliResult<(Value, bool)> {
    let verdicts = scott_check(spec)?;
    let failures: Vec<Value> =
        verdicts.iter().filter(|v| !v.holds).map(BoundVerdict::to_json_value).collect();
    let holds = failures.is_empty();
    let summary = json!({
        "bound": "scott",
        "holds": holds,
        "pairs_checked": verdicts.len(),
        "failures": failures,
    });
    Ok((summary, holds))
}

fn bounds(dims: &str, distance: u64, k: Option<&str>, pure: bool) -> CliResult<i32> {
    let spec = parse_spec(dims)?;
    let mut all_hold = true;
    match k {
        Some(raw) => {
            let params = CodeParams::new(spec.clone(), parse_k(raw)?, distance, pure)?;
            let mut verdicts = vec![hamming_check(&params)?, singleton_check(&params)?];
            if pure {
                verdicts.push(pure_singleton_check(&params)?);
            }
            for verdict in verdicts {
                all_hold &= verdict.holds;
                println!("{}", verdict.to_json_value());
            }
        }
        None => {
            let t = max_correctable_t(distance)?;
            let hamming = hamming_max_k(&spec, t)?;
            println!(
                "{}",
                json!({"bound": "hamming", "distance": distance, "max_k": hamming.to_string()})
            );
            let (singleton, witness) = singleton_max_k(&spec, distance)?;
            println!(
                "{}",
                json!({
                    "bound": "singleton",
                    "distance": distance,
                    "max_k": singleton.to_string(),
                    "witness": witness.to_json_value(),
                })
            );
            if pure {
                let (pure_max, witness) = pure_singleton_max_k(&spec, distance)?;
                println!(
                    "{}",
                    json!({
                        "bound": "singleton_pure",
                        "distance": distance,
                        "max_k": pure_max.to_string(),
                        "witness": witness.to_json_value(),
                    })
                );
            }
        }
    }
    let (summary, scott_holds) = scott_summary(&spec)?;
    println!("{summary}");
    all_hold &= scott_holds;
    Ok(if all_hold { EXIT_OK } else { EXIT_VERDICT_NO })
}

fn lp(
    dims: &str,
    k: Option<&str>,
    distance: u64,
    pure: bool,
    emit_lp: bool,
    sweep_k: Option<u64>,
    out: Option<&Path>,
) -> CliResult<i32> {
    let spec = parse_spec(dims)?;
    if let Some(max_k) = sweep_k {
        let mut lines = String::new();
        for size in 1..=max_k {
            let params = CodeParams::new(spec.clone(), BigUint::from(size), distance, pure)?;
            let feasible = code_feasible(&params)?.is_feasible();
            lines.push_str(&format!("{}\n", json!({"k": size.to_string(), "feasible": feasible})));
        }
        emit(out, &lines)?;
        return Ok(EXIT_OK);
    }
    let raw_k = k.ok_or("pass --k K, or --sweep-k MAX for a feasibility sweep")?;
    let params = CodeParams::new(spec, parse_k(raw_k)?, distance, pure)?;
    let problem = build_lp(&params)?;
    if emit_lp {
        emit(out, &tableau_text(&problem))?;
        return Ok(EXIT_OK);
    }
    let (value, code) = match code_feasible(&params)? {
        LpVerdict::Feasible { point } => {
            let assignment: Value = problem
                .var_names
                .iter()
                .zip(point.iter())
                .map(|(name, x)| (name.clone(), Value::String(rational_to_string(x))))
                .collect::<serde_json::Map<String, Value>>()
                .into();
            (json!({"feasible": true, "point": assignment}), EXIT_OK)
        }
        LpVerdict::Infeasible { certificate } => (
            json!({"feasible": false, "witness": certificate.to_json_value(&problem)}),
            EXIT_VERDICT_NO,
        ),
    };
    emit(out, &serde_json::to_string_pretty(&value)?)?;
    Ok(code)
}

fn scan(dims: &str, max_parties: u32, out: Option<&Path>) -> CliResult<i32> {
    let parsed = parse_dims(dims)?;
    if parsed.len() != 2 {
        return Err(format!("scan needs exactly two dimensions, got {dims:?}").into());
    }
    let cells = ame_scan(parsed[0], parsed[1], max_parties)?;
    let csv = scan_to_csv(&cells);
    emit(out, &csv)?;
    if let Some(path) = out {
        let forbidden = cells.iter().filter(|c| c.status == CellStatus::Forbidden).count();
        println!("wrote {} cells ({forbidden} forbidden) to {}", cells.len(), path.display());
    }
    Ok(EXIT_OK)
}

fn construct(d: &str, out: Option<&Path>, grid_out: Option<&Path>) -> CliResult<i32> {
    let parsed = parse_dims(d)?;
    if parsed.len() != 3 {
        return Err(format!("construct needs exactly three dimensions, got {d:?}").into());
    }
    let (d1, d2, d3) = (parsed[0], parsed[1], parsed[2]);
    let Some(grid) = grid_construct(d1, d2, d3)? else {
        println!("no grid construction found for ({d1}, {d2}, {d3})");
        return Ok(EXIT_VERDICT_NO);
    };
    if let Some(path) = grid_out {
        write_text(path, &serde_json::to_string_pretty(&grid.to_json_value())?)?;
        println!("wrote grid to {}", path.display());
    }
    let state = grid_to_state(&grid)?;
    emit(out, &state.to_json_string())?;
    if let Some(path) = out {
        println!("wrote state with {} nonzero amplitudes to {}", grid.d1 as usize * grid.d2 as usize, path.display());
    }
    Ok(EXIT_OK)
}

fn verify(state_path: &Path) -> CliResult<i32> {
    let state = load_state(state_path)?;
    let report = ame_verify(&state)?;
    let failing: Vec<Value> = report
        .failing_subsets
        .iter()
        .map(|s| Value::from(s.sites().to_vec()))
        .collect();
    println!(
        "{}",
        json!({
            "is_ame": report.is_ame,
            "subsets_checked": report.checked,
            "max_deviation": report.max_deviation,
            "failing_subsets": failing,
        })
    );
    Ok(if report.is_ame { EXIT_OK } else { EXIT_VERDICT_NO })
}

const REPRODUCE_TARGETS: [&str; 12] = [
    "tab:AME223",
    "tab:AME233",
    "tab:AME234",
    "tab:AME334",
    "tab:AME344",
    "tab:AME2333",
    "fig:heatmap23",
    "fig:heatmap34",
    "ex:hamming",
    "ex:singleton",
    "ex:scott",
    "ex:shadow_empty",
];

fn reproduce(target: &str, out_dir: &Path) -> CliResult<i32> {
    fs::create_dir_all(out_dir)?;
    let targets: Vec<&str> = if target == "all" {
        REPRODUCE_TARGETS.to_vec()
    } else {
        vec![target]
    };
    let mut clean = true;
    for id in targets {
        let ok = reproduce_one(id, out_dir)?;
        println!("reproduce {id}: {}", if ok { "OK" } else { "MISMATCH" });
        clean &= ok;
    }
    Ok(if clean { EXIT_OK } else { EXIT_VERDICT_NO })
}

fn reproduce_one(id: &str, out_dir: &Path) -> CliResult<bool> {
    match id {
        "tab:AME223" => reproduce_table("ame223", id, out_dir),
        "tab:AME233" => reproduce_table("ame233", id, out_dir),
        "tab:AME234" => reproduce_table("ame234", id, out_dir),
        "tab:AME334" => reproduce_table("ame334", id, out_dir),
        "tab:AME344" => reproduce_table("ame344", id, out_dir),
        "tab:AME2333" => reproduce_table("ame2333", id, out_dir),
        "fig:heatmap23" => reproduce_heatmap(2, 3, 8, id, out_dir),
        "fig:heatmap34" => reproduce_heatmap(3, 4, 12, id, out_dir),
        "ex:hamming" => reproduce_hamming(out_dir),
        "ex:singleton" => reproduce_singleton(out_dir),
        "ex:scott" => reproduce_scott(out_dir),
        "ex:shadow_empty" => reproduce_shadow_empty(out_dir),
        other => Err(format!(
            "unknown reproduce target {other:?}; known targets: {} or all",
            REPRODUCE_TARGETS.join(", ")
        )
        .into()),
    }
}

fn artifact_path(out_dir: &Path, id: &str, extension: &str) -> PathBuf {
    out_dir.join(format!("{}.{extension}", id.replace(':', "_")))
}

fn reproduce_table(name: &str, id: &str, out_dir: &Path) -> CliResult<bool> {
    let state = bundled_state(name)?;
    let expected = expected_table(name)?;
    let enums = enumerate_state(&state, &snap_config()?)?;
    let spec = state.spec().clone();

    let mut csv = String::from("multiset,a,b,s,a_prime,b_prime,cal_a,cal_b\n");
    for (w, a) in enums.a.rows() {
        let sample = enums
            .calligraphic
            .subsets()
            .into_iter()
            .find(|s| s.multiset(&spec) == w)
            .expect("every multiset comes from some subset");
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            w.to_elements_string(),
            rational_to_string(&a),
            rational_to_string(enums.b.value(&w)?),
            rational_to_string(enums.shadow.value(&w)?),
            rational_to_string(enums.a_prime.value(&w)?),
            rational_to_string(enums.b_prime.value(&w)?),
            rational_to_string(enums.calligraphic.a_prime(&sample)),
            rational_to_string(enums.calligraphic.b_prime(&sample)),
        ));
    }
    write_text(&artifact_path(out_dir, id, "csv"), &csv)?;

    let mut ok = true;
    for row in &expected {
        let w = &row.multiset;
        ok &= enums.a.value(w)? == &row.a
            && enums.b.value(w)? == &row.b
            && enums.shadow.value(w)? == &row.shadow
            && enums.a_prime.value(w)? == &row.a_prime
            && enums.b_prime.value(w)? == &row.b_prime;
    }
    for subset in enums.calligraphic.subsets() {
        let w = subset.multiset(&spec);
        let row = expected
            .iter()
            .find(|r| r.multiset == w)
            .ok_or("bundled table is missing a multiset")?;
        ok &= enums.calligraphic.a_prime(&subset) == &row.cal_a
            && enums.calligraphic.b_prime(&subset) == &row.cal_b;
    }
    Ok(ok)
}

fn cell_at<'c>(cells: &'c [HeatmapCell], n_small: u32, n_large: u32) -> Option<&'c HeatmapCell> {
    cells.iter().find(|c| c.n_small == n_small && c.n_large == n_large)
}

fn reproduce_heatmap(
    d_small: u32,
    d_large: u32,
    wall: u32,
    id: &str,
    out_dir: &Path,
) -> CliResult<bool> {
    let cells = ame_scan(d_small, d_large, 13)?;
    write_text(&artifact_path(out_dir, id, "csv"), &scan_to_csv(&cells))?;
    let wall_cells: Vec<&HeatmapCell> =
        cells.iter().filter(|c| c.n_small + c.n_large == wall).collect();
    let mut ok = wall_cells.len() == wall as usize + 1
        && wall_cells.iter().all(|c| c.status == CellStatus::Forbidden);
    ok &= cell_at(&cells, 2, 0).is_some_and(|c| c.status == CellStatus::KnownExists);
    if d_small == 2 {
        ok &= cell_at(&cells, 3, 1).is_some_and(|c| c.status == CellStatus::Forbidden);
    }
    Ok(ok)
}

fn reproduce_hamming(out_dir: &Path) -> CliResult<bool> {
    let mut ok = true;
    let mut sweep = Vec::new();
    for d in 5..=12u32 {
        let spec = DimensionSpec::new(vec![2, 2, d])?;
        let max_k = hamming_max_k(&spec, 2)?;
        ok &= max_k == BigUint::from(4 * u64::from(d) / 7);
        sweep.push(json!({"dims": [2, 2, d], "max_k": max_k.to_string()}));
    }
    let value = json!({
        "bound": "hamming",
        "correctable_dimension": 2,
        "sweep": sweep,
    });
    write_text(&artifact_path(out_dir, "ex:hamming", "json"), &serde_json::to_string_pretty(&value)?)?;
    Ok(ok)
}

fn reproduce_singleton(out_dir: &Path) -> CliResult<bool> {
    let spec = DimensionSpec::new(vec![2, 2, 5])?;
    let (max_k, witness) = singleton_max_k(&spec, 5)?;
    let (pure_max, pure_witness) = pure_singleton_max_k(&spec, 5)?;
    let ok = max_k == BigUint::from(5u32) && pure_max == BigUint::from(1u32);
    let value = json!({
        "dims": [2, 2, 5],
        "distance": 5,
        "max_k": max_k.to_string(),
        "witness": witness.to_json_value(),
        "pure_max_k": pure_max.to_string(),
        "pure_witness": pure_witness.to_json_value(),
    });
    write_text(&artifact_path(out_dir, "ex:singleton", "json"), &serde_json::to_string_pretty(&value)?)?;
    Ok(ok)
}

fn reproduce_scott(out_dir: &Path) -> CliResult<bool> {
    let mut dims = vec![2u32; 7];
    dims.push(3);
    let spec = DimensionSpec::new(dims)?;
    let verdicts = scott_check(&spec)?;
    let failures: Vec<&BoundVerdict> = verdicts.iter().filter(|v| !v.holds).collect();
    let wanted = BoundWitness::NestedPair {
        inner: DimensionMultiset::from_elements(&[2, 2, 2, 2, 2]),
        outer: DimensionMultiset::from_elements(&[2, 2, 2, 2, 2, 2]),
    };
    let ok = failures
        .iter()
        .any(|v| v.witness == wanted && v.lhs == rat(29, 3) && v.rhs == rat(10, 1));
    let value = json!({
        "dims": [2, 2, 2, 2, 2, 2, 2, 3],
        "failures": failures.iter().map(|v| v.to_json_value()).collect::<Vec<_>>(),
    });
    write_text(&artifact_path(out_dir, "ex:scott", "json"), &serde_json::to_string_pretty(&value)?)?;
    Ok(ok)
}

fn reproduce_shadow_empty(out_dir: &Path) -> CliResult<bool> {
    let spec = DimensionSpec::new(vec![2, 2, 2, 3])?;
    let shadow = ame_shadow_profile(&spec);
    let empty = shadow.value(&DimensionMultiset::empty())?.clone();
    println!("shadow coefficient at the empty multiset for dims [2,2,2,3]: {empty}");
    let ok = empty == rat(-1, 6);
    write_text(
        &artifact_path(out_dir, "ex:shadow_empty", "json"),
        &serde_json::to_string_pretty(&json!({
            "dims": [2, 2, 2, 3],
            "shadow_empty": rational_to_string(&empty),
        }))?,
    )?;
    Ok(ok)
}
