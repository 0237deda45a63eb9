//! The subcommands. Each validates its inputs, writes its outputs into the
//! `--out` directory and finishes with a manifest.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use emoblog::analysis::{
    assortativity, build_series, circumplex_map, degree_distributions, power_spectrum_segmented, KnnPoint,
    PartitionDegrees,
};
use emoblog::communities::{
    extract_communities, laplacian_spectrum, project, ClusterOptions, CommonsRule, NodeFilter, Solver, SpectrumOptions,
};
use emoblog::event_log::{self, read_edges_file, read_log_file, write_pairs};
use emoblog::infer::{
    extract_arrival_series, infer_delay_distribution, infer_g_distribution, infer_lifetime_distribution, infer_mu,
    EmpiricalLog,
};
use emoblog::sim::config::parse_key_values;
use emoblog::sim::{run, SimConfig};
use emoblog::{CommentEvent, Partition};

use crate::error::{CliError, CliResult};
use crate::manifest::RunManifest;
use crate::{AnalyzeArgs, CircumplexArgs, CommunitiesArgs, InferArgs, InferWhat, SimulateArgs, SolverArg};

fn create_out(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::new(crate::error::Category::Io, format!("{}: {e}", dir.display())))
}

fn writer(dir: &Path, file: &str) -> CliResult<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(file))?))
}

/// Builds the configuration from the optional file plus command-line flags.
/// A flag that disagrees with a value set in the file is a conflict.
pub fn resolve_config(args: &SimulateArgs) -> CliResult<SimConfig> {
    let mut cfg = SimConfig::default();
    let mut file_pairs = BTreeMap::new();
    if let Some(path) = &args.config {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        file_pairs = parse_key_values(&text, path)?;
        cfg.apply(&file_pairs, path.parent().unwrap_or(Path::new(".")))?;
    }
    let mut flags = BTreeMap::new();
    if let Some(seed) = args.seed {
        flags.insert("seed".to_string(), seed.to_string());
    }
    if let Some(steps) = args.steps {
        flags.insert("steps".to_string(), steps.to_string());
    }
    if let Some(d) = &args.driving {
        flags.insert("driving".to_string(), d.trim().to_string());
    }
    for (key, value) in &flags {
        if let Some(from_file) = file_pairs.get(key) {
            if from_file != value {
                return Err(CliError::config(format!(
                    "config key conflict: {key} is {from_file:?} in the config file but {value:?} on the command line"
                )));
            }
        }
    }
    cfg.apply(&flags, Path::new("."))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn simulate(args: &SimulateArgs) -> CliResult {
    let cfg = resolve_config(args)?;
    create_out(&args.out)?;
    let mut manifest = RunManifest::new("simulate");
    manifest.seed = Some(cfg.seed);
    manifest.config = cfg.to_key_values().into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    if let Some(path) = &args.config {
        manifest.input("config", path)?;
    }
    let out = run(cfg.clone())?;
    let dir = &args.out;
    event_log::write_events_file(&dir.join("events.csv"), &out.events)?;
    event_log::write_edges_file(&dir.join("edges.csv"), &out.network.graph)?;
    out.series.write_csv(writer(dir, "series.csv")?)?;
    let mut w = writer(dir, "config.txt")?;
    for (k, v) in cfg.to_key_values() {
        writeln!(w, "{k} = {v}")?;
    }
    w.flush()?;
    manifest.result("steps_run", out.steps_run);
    manifest.result("events", out.events.len());
    manifest.result("agents", out.network.graph.n_agents());
    manifest.result("posts", out.network.graph.n_posts());
    for f in ["events.csv", "edges.csv", "series.csv", "config.txt"] {
        manifest.output(dir, f)?;
    }
    manifest.write(dir)?;
    Ok(())
}

pub fn infer(args: &InferArgs) -> CliResult {
    let log = EmpiricalLog::new(read_log_file(&args.log)?)?;
    create_out(&args.out)?;
    let dir = &args.out;
    let mut manifest = RunManifest::new("infer");
    manifest.input("log", &args.log)?;
    let file = match args.what {
        InferWhat::Delay => {
            infer_delay_distribution(&log)?.write_csv(writer(dir, "delay.csv")?)?;
            "delay.csv"
        }
        InferWhat::Lifetime => {
            infer_lifetime_distribution(&log)?.write_csv(writer(dir, "lifetime.csv")?)?;
            "lifetime.csv"
        }
        InferWhat::G => {
            infer_g_distribution(&log)?.write_csv(writer(dir, "g.csv")?)?;
            "g.csv"
        }
        InferWhat::Mu => {
            let mu = infer_mu(&log, args.t0)?;
            manifest.config.push(("t0".into(), args.t0.to_string()));
            manifest.result("mu", mu);
            write_pairs(writer(dir, "mu.csv")?, ("t0", "mu"), [(args.t0, mu)])?;
            "mu.csv"
        }
        InferWhat::Arrivals => {
            let series = extract_arrival_series(&log, args.bin_width)?;
            manifest.config.push(("bin_width".into(), args.bin_width.to_string()));
            write_pairs(writer(dir, "arrivals.csv")?, ("t", "count"), series.iter().enumerate())?;
            "arrivals.csv"
        }
    };
    manifest.output(dir, file)?;
    manifest.write(dir)?;
    Ok(())
}

fn parse_range(s: &str) -> CliResult<(f64, f64)> {
    let (lo, hi) = s
        .split_once(',')
        .ok_or_else(|| CliError::config(format!("fit range must be lo,hi, got {s:?}")))?;
    let parse = |x: &str| {
        x.trim()
            .parse::<f64>()
            .map_err(|e| CliError::config(format!("fit range {s:?}: {e}")))
    };
    let (lo, hi) = (parse(lo)?, parse(hi)?);
    if !(lo > 0.0 && hi > lo) {
        return Err(CliError::config(format!("fit range needs 0 < lo < hi, got {s:?}")));
    }
    Ok((lo, hi))
}

fn load_events(path: &Path) -> CliResult<Vec<CommentEvent>> {
    Ok(read_log_file(path)?.iter().map(|r| r.to_event()).collect())
}

/// Reads an assignment CSV `(node, community)` into a per-node lookup.
fn load_assignment(path: &Path) -> CliResult<(Vec<Option<usize>>, usize)> {
    let pairs = event_log::read_pairs_file(path)?;
    let mut labels = Vec::new();
    let mut k = 0;
    for (i, (node, c)) in pairs.into_iter().enumerate() {
        if node < 0.0 || node.fract() != 0.0 || c < 0.0 || c.fract() != 0.0 {
            return Err(CliError::new(
                crate::error::Category::Input,
                format!("{}:{}: node and community must be nonnegative integers", path.display(), i + 2),
            ));
        }
        let (node, c) = (node as usize, c as usize);
        if labels.len() <= node {
            labels.resize(node + 1, None);
        }
        labels[node] = Some(c);
        k = k.max(c + 1);
    }
    Ok((labels, k))
}

fn write_circumplex(dir: &Path, file: &str, events: &[&CommentEvent], grid: usize) -> CliResult<u64> {
    let actions: Vec<(f64, f64)> = events.iter().map(|e| (e.arousal, e.valence)).collect();
    let map = circumplex_map(&actions, grid)?;
    map.write_csv(writer(dir, file)?)?;
    Ok(map.total)
}

/// Writes one circumplex map per community (or one for all events) and
/// returns the file names.
fn circumplex_outputs(
    dir: &Path,
    events: &[CommentEvent],
    communities: Option<&Path>,
    grid: usize,
) -> CliResult<Vec<String>> {
    let comments: Vec<&CommentEvent> = events.iter().filter(|e| e.kind == emoblog::EventKind::Comment).collect();
    let mut files = Vec::new();
    match communities {
        None => {
            write_circumplex(dir, "circumplex_all.csv", &comments, grid)?;
            files.push("circumplex_all.csv".to_string());
        }
        Some(path) => {
            let (labels, k) = load_assignment(path)?;
            for c in 0..k {
                let members: Vec<&CommentEvent> = comments
                    .iter()
                    .copied()
                    .filter(|e| labels.get(e.agent.index()).copied().flatten() == Some(c))
                    .collect();
                if members.is_empty() {
                    continue;
                }
                let name = format!("circumplex_community_{c}.csv");
                write_circumplex(dir, &name, &members, grid)?;
                files.push(name);
            }
        }
    }
    Ok(files)
}

fn write_knn(dir: &Path, file: &str, curve: &[KnnPoint]) -> CliResult {
    let mut w = writer(dir, file)?;
    writeln!(w, "k,knn,nodes")?;
    for p in curve {
        writeln!(w, "{},{},{}", p.k, p.knn, p.nodes)?;
    }
    w.flush()?;
    Ok(())
}

fn write_degrees(dir: &Path, d: &PartitionDegrees, files: &mut Vec<String>, fits: &mut Vec<String>) -> CliResult {
    let side = d.side.as_str();
    let name = format!("degrees_{side}.csv");
    let mut w = writer(dir, &name)?;
    writeln!(w, "degree,count,probability")?;
    for (&k, &c) in &d.histogram.counts {
        writeln!(w, "{k},{c},{}", c as f64 / d.histogram.nodes as f64)?;
    }
    w.flush()?;
    files.push(name);
    let name = format!("degrees_{side}_binned.csv");
    let mut w = writer(dir, &name)?;
    writeln!(w, "lo,hi,center,mass,density")?;
    for b in &d.bins {
        writeln!(w, "{},{},{},{},{}", b.lo, b.hi, b.center, b.mass, b.density)?;
    }
    w.flush()?;
    files.push(name);
    match &d.fits {
        Some(f) => {
            let c = &f.cutoff_power_law;
            fits.push(format!("{side},cutoff_power_law,{},{},{},,{}", c.c, c.tau, c.x0, c.rss));
            let q = &f.q_exponential;
            fits.push(format!("{side},q_exponential,{},,{},{},{}", q.c, q.x0, q.q, q.rss));
            let e = &f.exponential;
            fits.push(format!("{side},exponential,{},,{},,{}", e.c, e.x0, e.rss));
            let p = &f.power_law;
            fits.push(format!("{side},power_law,{},{},,,{}", p.c, p.tau, p.rss));
        }
        None => fits.push(format!(
            "{side},refused,,,,,{}",
            d.fit_error.as_deref().unwrap_or("fit refused").replace(',', ";")
        )),
    }
    Ok(())
}

pub fn analyze(args: &AnalyzeArgs) -> CliResult {
    let events = load_events(&args.log)?;
    let (lo, hi) = parse_range(&args.fit_range)?;
    create_out(&args.out)?;
    let dir = &args.out;
    let mut manifest = RunManifest::new("analyze");
    manifest.input("log", &args.log)?;
    manifest.config.push(("fit_range".into(), format!("{lo},{hi}")));
    manifest.config.push(("log_bin".into(), args.log_bin.to_string()));
    manifest.config.push(("segments".into(), args.segments.to_string()));
    manifest.config.push(("from_bin".into(), args.from_bin.to_string()));
    let mut outputs = vec!["series.csv".to_string()];
    let series = build_series(&events, emoblog::analysis::series::bins_spanned(&events));
    series.write_csv(writer(dir, "series.csv")?)?;

    for name in &args.spectrum {
        let values = series
            .by_name(name)
            .ok_or_else(|| CliError::config(format!("unknown series {name:?}")))?;
        let tail = values.get(args.from_bin..).unwrap_or(&[]);
        let x: Vec<f64> = tail.iter().map(|&v| v as f64).collect();
        let spectrum = power_spectrum_segmented(&x, args.segments, args.log_bin)?;
        let fit = spectrum.fit(lo, hi)?;
        manifest.result(&format!("phi.{name}"), fit.phi);
        manifest.result(&format!("phi_stderr.{name}"), fit.stderr);
        let file = format!("spectrum_{name}.csv");
        let mut w = writer(dir, &file)?;
        writeln!(w, "freq,power,bin_count,phi,stderr")?;
        for b in &spectrum.binned {
            writeln!(w, "{},{},{},{},{}", b.freq, b.power, b.count, fit.phi, fit.stderr)?;
        }
        w.flush()?;
        outputs.push(file);
        let file = format!("periodogram_{name}.csv");
        write_pairs(writer(dir, &file)?, ("freq", "power"), spectrum.freqs.iter().zip(&spectrum.power))?;
        outputs.push(file);
    }

    if args.degrees || args.assortativity {
        let edges = args
            .edges
            .as_ref()
            .ok_or_else(|| CliError::config("--degrees and --assortativity need --edges"))?;
        manifest.input("edges", edges)?;
        let graph = read_edges_file(edges)?;
        if args.degrees {
            let (agents, posts) = degree_distributions(&graph, emoblog::analysis::degrees::DEFAULT_DEGREE_BIN_FACTOR)?;
            let mut fits = Vec::new();
            write_degrees(dir, &agents, &mut outputs, &mut fits)?;
            write_degrees(dir, &posts, &mut outputs, &mut fits)?;
            let mut w = writer(dir, "degree_fits.csv")?;
            writeln!(w, "partition,family,c,tau,x0,q,rss")?;
            for line in fits {
                writeln!(w, "{line}")?;
            }
            w.flush()?;
            outputs.push("degree_fits.csv".into());
        }
        if args.assortativity {
            let (agents, posts) = assortativity(&graph);
            write_knn(dir, "knn_agents.csv", &agents)?;
            write_knn(dir, "knn_posts.csv", &posts)?;
            outputs.push("knn_agents.csv".into());
            outputs.push("knn_posts.csv".into());
        }
    }

    if let Some(spec) = &args.circumplex {
        let community_file = if spec == "all" { None } else { Some(PathBuf::from(spec)) };
        if let Some(path) = &community_file {
            manifest.input("communities", path)?;
            let (labels, k) = load_assignment(path)?;
            let split = emoblog::communities::community_series(&labels, k, &events, series.len());
            for (c, s) in split.communities.iter().enumerate() {
                let file = format!("series_community_{c}.csv");
                s.write_csv(writer(dir, &file)?)?;
                outputs.push(file);
            }
            split.other.write_csv(writer(dir, "series_other.csv")?)?;
            outputs.push("series_other.csv".into());
        }
        manifest.config.push(("grid".into(), args.grid.to_string()));
        outputs.extend(circumplex_outputs(dir, &events, community_file.as_deref(), args.grid)?);
    }

    for f in &outputs {
        manifest.output(dir, f)?;
    }
    manifest.write(dir)?;
    Ok(())
}

pub fn communities(args: &CommunitiesArgs) -> CliResult {
    let side: Partition = args.partition.parse()?;
    let rule: CommonsRule = args.commons.parse()?;
    if args.kmax < 3 {
        return Err(CliError::config("--kmax must be at least 3"));
    }
    let graph = read_edges_file(&args.edges)?;
    create_out(&args.out)?;
    let dir = &args.out;
    let mut manifest = RunManifest::new("communities");
    manifest.input("edges", &args.edges)?;
    for (k, v) in [
        ("partition", side.as_str().to_string()),
        ("min_degree", args.min_degree.to_string()),
        ("min_strength", args.min_strength.to_string()),
        ("commons", rule.as_str().to_string()),
        ("kmax", args.kmax.to_string()),
        ("dense_limit", args.dense_limit.to_string()),
        ("solver", format!("{:?}", args.solver).to_lowercase()),
    ] {
        manifest.config.push((k.to_string(), v));
    }
    manifest.seed = Some(args.seed);

    let filter = NodeFilter {
        min_degree: args.min_degree,
        min_strength: args.min_strength,
    };
    let pg = project(&graph, side, filter, rule)?;
    let solver = match args.solver {
        SolverArg::Auto => Solver::Auto,
        SolverArg::Dense => Solver::Dense,
        SolverArg::Lanczos => Solver::Lanczos,
    };
    let spectrum = laplacian_spectrum(
        &pg,
        &SpectrumOptions {
            k_max: args.kmax,
            dense_limit: args.dense_limit,
            solver,
            ..SpectrumOptions::default()
        },
    )?;
    let found = extract_communities(
        &spectrum,
        &ClusterOptions {
            seed: args.seed,
            ..ClusterOptions::default()
        },
    )?;
    manifest.result("nodes", pg.len());
    manifest.result("communities", found.k);
    manifest.result("zero_eigenvalues", found.zero_eigenvalues);
    manifest.result(
        "sizes",
        found.sizes.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" "),
    );
    if let Some(d) = &found.diagnostic {
        eprintln!("note: {d}");
        manifest.result("diagnostic", d);
    }

    write_pairs(writer(dir, "eigenvalues.csv")?, ("index", "eigenvalue"), spectrum.values.iter().enumerate())?;
    let mut w = writer(dir, "eigenvectors.csv")?;
    let cols: Vec<usize> = (1..spectrum.len().min(4)).collect();
    let names: Vec<String> = cols.iter().map(|c| format!("v{c}")).collect();
    writeln!(w, "node,{}", names.join(","))?;
    for (i, &node) in pg.nodes.iter().enumerate() {
        let vals: Vec<String> = cols.iter().map(|&c| spectrum.vectors[(i, c)].to_string()).collect();
        writeln!(w, "{node},{}", vals.join(","))?;
    }
    w.flush()?;
    write_pairs(writer(dir, "assignment.csv")?, ("node", "community"), pg.nodes.iter().zip(&found.labels))?;
    for f in ["eigenvalues.csv", "eigenvectors.csv", "assignment.csv"] {
        manifest.output(dir, f)?;
    }
    manifest.write(dir)?;
    Ok(())
}

pub fn circumplex(args: &CircumplexArgs) -> CliResult {
    let events = load_events(&args.log)?;
    create_out(&args.out)?;
    let dir = &args.out;
    let mut manifest = RunManifest::new("circumplex");
    manifest.input("log", &args.log)?;
    if let Some(path) = &args.communities {
        manifest.input("communities", path)?;
    }
    manifest.config.push(("grid".into(), args.grid.to_string()));
    for f in circumplex_outputs(dir, &events, args.communities.as_deref(), args.grid)? {
        manifest.output(dir, &f)?;
    }
    manifest.write(dir)?;
    Ok(())
}
