//! Command-line front door: read or generate a mesh, then partition,
//! classify, reorder, lay out DoFs, and analyze — every stage a thin
//! wrapper over the library, every output a file or the output stream.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use plexmesh::{
    bench_cell_loop, bench_facet_loop, build_sparsity, cell_node_map, compact_class_permutation,
    create_section, distribute, facet_maps, global_numbering, lagrange_dof_layout,
    mark_entity_classes, metrics, native_ordering, partition, rcm_ordering, read_gmsh_file,
    reference_tet, shuffled_ordering, unit_square_mesh, write_portrait, EntityClass, LocalMesh,
    MeshGeometry, Plex, Point, PointSf, Section,
};

#[derive(Parser)]
#[command(
    name = "plexmesh",
    version,
    about = "Unstructured-mesh management: topology, partitioning, reordering, DoF layout"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Where the mesh comes from: exactly one of a generator spec or a file.
#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct Source {
    /// Generate a mesh: square:NxM or tet:reference
    #[arg(long, value_name = "SPEC")]
    gen: Option<String>,
    /// Read a Gmsh MSH 2.2 ASCII file
    #[arg(long, value_name = "PATH")]
    mesh: Option<PathBuf>,
}

impl Source {
    fn describe(&self) -> String {
        match (&self.gen, &self.mesh) {
            (Some(spec), _) => spec.clone(),
            (None, Some(path)) => path.display().to_string(),
            (None, None) => unreachable!("clap enforces one mesh source"),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum OrderKind {
    /// Generator order (cells by ascending id)
    Native,
    /// Reverse Cuthill-McKee over the shared-vertex cell graph
    Rcm,
    /// Seeded random shuffle
    Shuffle,
}

impl OrderKind {
    fn name(self) -> &'static str {
        match self {
            OrderKind::Native => "native",
            OrderKind::Rcm => "rcm",
            OrderKind::Shuffle => "shuffle",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print a mesh summary (strata sizes, Euler characteristic) as JSON
    Info {
        #[command(flatten)]
        source: Source,
        /// Write to a file instead of the output stream
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Assign cells to parts and write the owner map as CSV
    Partition {
        #[command(flatten)]
        source: Source,
        /// Number of parts
        #[arg(long, default_value_t = 1)]
        parts: usize,
        /// Write to a file instead of the output stream
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Distribute with a one-cell overlap and report per-rank entity-class
    /// counts as JSON
    Classes {
        #[command(flatten)]
        source: Source,
        /// Number of parts
        #[arg(long, default_value_t = 1)]
        parts: usize,
        /// Write to a file instead of the output stream
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute a class-segmented renumbering per rank and write it as CSV
    Reorder {
        #[command(flatten)]
        source: Source,
        /// Number of parts
        #[arg(long, default_value_t = 1)]
        parts: usize,
        /// Cell traversal order seeding the renumbering
        #[arg(long, value_enum, default_value_t = OrderKind::Native)]
        order: OrderKind,
        /// Seed for the shuffle order
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Write to a file instead of the output stream
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the operator sparsity pattern, write its portrait image, and
    /// print metrics JSON
    Sparsity {
        #[command(flatten)]
        source: Source,
        /// Number of parts (1 → PBM portrait; >1 → PGM with rank
        /// boundaries)
        #[arg(long, default_value_t = 1)]
        parts: usize,
        /// Cell traversal order seeding the renumbering
        #[arg(long, value_enum, default_value_t = OrderKind::Native)]
        order: OrderKind,
        /// Seed for the shuffle order
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Lagrange polynomial degree (1-3)
        #[arg(long, default_value_t = 1)]
        degree: usize,
        /// Portrait image path
        #[arg(long)]
        out: PathBuf,
    },
    /// Time gather/scatter loops under one or more orderings and print a
    /// timings JSON report
    Bench {
        #[command(flatten)]
        source: Source,
        /// Comma-separated orderings to compare (native, rcm, shuffle)
        #[arg(long, default_value = "native,rcm")]
        order: String,
        /// Seed for the shuffle order
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Lagrange polynomial degree (1-3)
        #[arg(long, default_value_t = 1)]
        degree: usize,
        /// Timed sweeps per loop
        #[arg(long, default_value_t = 100)]
        repeats: usize,
        /// Write to a file instead of the output stream
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Usage errors exit 2; data errors exit 1.
enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Data(msg) => write!(f, "{msg}"),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Wraps a library error with the stage that failed, as a data error.
fn stage(name: &'static str) -> impl Fn(plexmesh::MeshError) -> CliError {
    move |e| CliError::Data(format!("{name}: {e}"))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code: u8 = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("plexmesh: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Info { source, out } => cmd_info(&source, out.as_ref()),
        Command::Partition { source, parts, out } => cmd_partition(&source, parts, out.as_ref()),
        Command::Classes { source, parts, out } => cmd_classes(&source, parts, out.as_ref()),
        Command::Reorder {
            source,
            parts,
            order,
            seed,
            out,
        } => cmd_reorder(&source, parts, order, seed, out.as_ref()),
        Command::Sparsity {
            source,
            parts,
            order,
            seed,
            degree,
            out,
        } => cmd_sparsity(&source, parts, order, seed, degree, &out),
        Command::Bench {
            source,
            order,
            seed,
            degree,
            repeats,
            out,
        } => cmd_bench(&source, &order, seed, degree, repeats, out.as_ref()),
    }
}

fn parse_generator(spec: &str) -> CliResult<MeshGeometry> {
    if spec == "tet:reference" {
        return Ok(reference_tet());
    }
    if let Some(dims) = spec.strip_prefix("square:") {
        let (nx, ny) = dims.split_once('x').ok_or_else(|| {
            CliError::Usage(format!("generator '{spec}' must look like square:NxM"))
        })?;
        let parse = |s: &str| {
            s.parse::<usize>()
                .ok()
                .filter(|&n| n >= 1)
                .ok_or_else(|| {
                    CliError::Usage(format!(
                        "generator '{spec}' needs positive integer dimensions"
                    ))
                })
        };
        return unit_square_mesh(parse(nx)?, parse(ny)?).map_err(stage("generating mesh"));
    }
    Err(CliError::Usage(format!(
        "unknown generator '{spec}' (expected square:NxM or tet:reference)"
    )))
}

fn load_mesh(source: &Source) -> CliResult<MeshGeometry> {
    match (&source.gen, &source.mesh) {
        (Some(spec), _) => parse_generator(spec),
        (None, Some(path)) => read_gmsh_file(path).map_err(stage("reading mesh file")),
        (None, None) => unreachable!("clap enforces one mesh source"),
    }
}

fn check_parts(parts: usize) -> CliResult<usize> {
    if parts == 0 {
        Err(CliError::Usage("--parts must be at least 1".into()))
    } else {
        Ok(parts)
    }
}

fn check_degree(degree: usize) -> CliResult<usize> {
    if (1..=3).contains(&degree) {
        Ok(degree)
    } else {
        Err(CliError::Usage("--degree must be 1, 2, or 3".into()))
    }
}

/// Partition, distribute with a one-cell overlap, and mark entity classes.
fn distributed_ranks(mesh: &MeshGeometry, parts: usize) -> CliResult<Vec<(LocalMesh, PointSf)>> {
    let part = partition(mesh, parts).map_err(stage("partitioning"))?;
    let mut ranks = distribute(mesh, &part, 1).map_err(stage("distributing"))?;
    for (local, sf) in &mut ranks {
        mark_entity_classes(local, sf).map_err(stage("marking entity classes"))?;
    }
    Ok(ranks)
}

fn cell_order(plex: &Plex, kind: OrderKind, seed: u64) -> CliResult<Vec<Point>> {
    match kind {
        OrderKind::Native => native_ordering(plex),
        OrderKind::Rcm => rcm_ordering(plex),
        OrderKind::Shuffle => shuffled_ordering(plex, seed),
    }
    .map_err(stage("ordering cells"))
}

fn emit(out: Option<&PathBuf>, bytes: &[u8]) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, bytes)
            .map_err(|e| CliError::Data(format!("writing {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(bytes)
                .and_then(|()| stdout.flush())
                .map_err(|e| CliError::Data(format!("writing output: {e}")))
        }
    }
}

fn emit_json(out: Option<&PathBuf>, value: &serde_json::Value) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("JSON serialization");
    text.push('\n');
    emit(out, text.as_bytes())
}

fn cmd_info(source: &Source, out: Option<&PathBuf>) -> CliResult<()> {
    let mesh = load_mesh(source)?;
    let plex = &mesh.plex;
    let look = stage("inspecting mesh");
    let dim = plex.max_depth();
    let cells = plex.height_stratum_points(0).map_err(&look)?.len() as i64;
    let facets = plex.height_stratum_points(1).map_err(&look)?.len() as i64;
    let edges = plex.depth_stratum_points(1).map_err(&look)?.len() as i64;
    let vertices = plex.depth_stratum_points(0).map_err(&look)?.len() as i64;
    let euler = if dim == 2 {
        vertices - edges + cells
    } else {
        vertices - edges + facets - cells
    };
    emit_json(
        out,
        &json!({
            "source": source.describe(),
            "dim": dim,
            "chart": plex.chart_size(),
            "cells": cells,
            "facets": facets,
            "edges": edges,
            "vertices": vertices,
            "euler_characteristic": euler,
        }),
    )
}

fn cmd_partition(source: &Source, parts: usize, out: Option<&PathBuf>) -> CliResult<()> {
    let parts = check_parts(parts)?;
    let mesh = load_mesh(source)?;
    let part = partition(&mesh, parts).map_err(stage("partitioning"))?;
    emit(out, part.to_csv(mesh.plex.cells()).as_bytes())
}

fn cmd_classes(source: &Source, parts: usize, out: Option<&PathBuf>) -> CliResult<()> {
    let parts = check_parts(parts)?;
    let mesh = load_mesh(source)?;
    let ranks = distributed_ranks(&mesh, parts)?;
    let per_rank: Vec<serde_json::Value> = ranks
        .iter()
        .map(|(local, sf)| {
            let count = |class: EntityClass| {
                local.classes.iter().filter(|&&c| c == class).count()
            };
            json!({
                "rank": local.rank,
                "chart": local.chart_size(),
                "core": count(EntityClass::Core),
                "non_core": count(EntityClass::NonCore),
                "halo": count(EntityClass::Halo),
                "owned_cells": local.owned_cells().len(),
                "shared_points": sf.leaves.len(),
            })
        })
        .collect();
    emit_json(
        out,
        &json!({
            "source": source.describe(),
            "parts": parts,
            "ranks": per_rank,
        }),
    )
}

fn cmd_reorder(
    source: &Source,
    parts: usize,
    order: OrderKind,
    seed: u64,
    out: Option<&PathBuf>,
) -> CliResult<()> {
    let parts = check_parts(parts)?;
    let mesh = load_mesh(source)?;
    let ranks = distributed_ranks(&mesh, parts)?;
    let mut text = String::new();
    for (local, _) in &ranks {
        let cells = cell_order(local.plex(), order, seed)?;
        let perm =
            compact_class_permutation(local, &cells).map_err(stage("building permutation"))?;
        text.push_str(&format!("# rank {}\n", local.rank));
        text.push_str(&perm.to_csv());
    }
    emit(out, text.as_bytes())
}

/// Per-rank layout products shared by `sparsity` and `bench`.
struct RankLayout {
    section: Section,
    map: plexmesh::CellMap,
}

fn rank_layout(
    local: &LocalMesh,
    order: OrderKind,
    seed: u64,
    layout: &plexmesh::DofLayout,
) -> CliResult<RankLayout> {
    let cells = cell_order(local.plex(), order, seed)?;
    let perm = compact_class_permutation(local, &cells).map_err(stage("building permutation"))?;
    let section = create_section(local, &perm, layout).map_err(stage("building section"))?;
    let map = cell_node_map(local, &section, layout).map_err(stage("building cell map"))?;
    Ok(RankLayout { section, map })
}

fn owned_dof_count(local: &LocalMesh, section: &Section) -> usize {
    (0..local.chart_size())
        .filter(|&p| local.owned[p])
        .map(|p| section.dof_count[p])
        .sum()
}

fn cmd_sparsity(
    source: &Source,
    parts: usize,
    order: OrderKind,
    seed: u64,
    degree: usize,
    out: &PathBuf,
) -> CliResult<()> {
    let parts = check_parts(parts)?;
    let degree = check_degree(degree)?;
    let mesh = load_mesh(source)?;
    let layout = lagrange_dof_layout(mesh.cell_dimension(), degree)
        .map_err(stage("building DoF layout"))?;
    let ranks = distributed_ranks(&mesh, parts)?;
    let mut locals = Vec::new();
    let mut sfs = Vec::new();
    let mut sections = Vec::new();
    let mut maps = Vec::new();
    for (local, sf) in ranks {
        let rl = rank_layout(&local, order, seed, &layout)?;
        sections.push(rl.section);
        maps.push(rl.map);
        locals.push(local);
        sfs.push(sf);
    }
    let gnum = global_numbering(&locals, &sfs, &sections).map_err(stage("numbering DoFs"))?;
    let owned_sizes: Vec<usize> = locals
        .iter()
        .zip(&sections)
        .map(|(local, section)| owned_dof_count(local, section))
        .collect();
    let n: usize = owned_sizes.iter().sum();
    let pattern = build_sparsity(&maps, &gnum, n).map_err(stage("building sparsity"))?;
    let report = metrics(&pattern);

    let file = File::create(out)
        .map_err(|e| CliError::Data(format!("creating {}: {e}", out.display())))?;
    let mut sink = BufWriter::new(file);
    if parts == 1 {
        write_portrait(&pattern, &mut sink, None)
    } else {
        let mut bounds = Vec::with_capacity(parts - 1);
        let mut acc = 0usize;
        for &size in &owned_sizes[..parts - 1] {
            acc += size;
            bounds.push(acc);
        }
        write_portrait(&pattern, &mut sink, Some(&bounds))
    }
    .map_err(stage("writing portrait"))?;

    let json = serde_json::to_value(&report).expect("JSON serialization");
    emit_json(None, &json)
}

fn cmd_bench(
    source: &Source,
    order: &str,
    seed: u64,
    degree: usize,
    repeats: usize,
    out: Option<&PathBuf>,
) -> CliResult<()> {
    let degree = check_degree(degree)?;
    if repeats < 1 {
        return Err(CliError::Usage("--repeats must be at least 1".into()));
    }
    let variants: Vec<OrderKind> = order
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|name| match name {
            "native" => Ok(OrderKind::Native),
            "rcm" => Ok(OrderKind::Rcm),
            "shuffle" => Ok(OrderKind::Shuffle),
            other => Err(CliError::Usage(format!(
                "unknown ordering '{other}' (expected native, rcm, or shuffle)"
            ))),
        })
        .collect::<CliResult<_>>()?;
    if variants.is_empty() {
        return Err(CliError::Usage("--order names no orderings".into()));
    }

    let mesh = load_mesh(source)?;
    let layout = lagrange_dof_layout(mesh.cell_dimension(), degree)
        .map_err(stage("building DoF layout"))?;
    let mut ranks = distributed_ranks(&mesh, 1)?;
    let (local, _sf) = ranks.remove(0);

    let mut checksums: BTreeMap<String, f64> = BTreeMap::new();
    let mut timings: BTreeMap<String, f64> = BTreeMap::new();
    let mut dofs = 0usize;
    let mut cells = 0usize;
    for &kind in &variants {
        let rl = rank_layout(&local, kind, seed, &layout)?;
        dofs = rl.section.total_size;
        cells = rl.map.num_cells();
        let data = vec![1.0; rl.section.total_size];
        let (result, secs) =
            bench_cell_loop(&rl.map, &data, repeats).map_err(stage("cell loop"))?;
        checksums.insert(format!("cell_{}", kind.name()), result.iter().sum());
        timings.insert(format!("cell_{}", kind.name()), secs);
        let facets = facet_maps(&local, &rl.section).map_err(stage("building facet maps"))?;
        if !facets.interior.is_empty() {
            let (result, secs) = bench_facet_loop(&facets, &rl.map, &data, repeats)
                .map_err(stage("facet loop"))?;
            checksums.insert(format!("facet_{}", kind.name()), result.iter().sum());
            timings.insert(format!("facet_{}", kind.name()), secs);
        }
    }

    let names: Vec<&str> = variants.iter().map(|k| k.name()).collect();
    emit_json(
        out,
        &json!({
            "source": source.describe(),
            "degree": degree,
            "repeats": repeats,
            "cells": cells,
            "dofs": dofs,
            "variants": names,
            "checksums": checksums,
            "timings": timings,
        }),
    )
}
