use std::fs;

use lcgrid::corpus;
use lcgrid::{AxisSpec, GridSpec};

use crate::error::{io_err, CliError, Result};
use crate::{format, CorpusArgs};

/// Per-dimension defaults: window half-width and nodes per axis.
pub const DEFAULT_HALF: [f64; 3] = [10.0, 6.0, 4.0];
pub const DEFAULT_NODES: [usize; 3] = [513, 97, 33];

/// Symmetric cube grid from flags, falling back to the given defaults and
/// honoring the node-cap environment override.
pub fn cube_spec(
    dim: usize,
    half: Option<f64>,
    nodes: Option<usize>,
    def_half: f64,
    def_nodes: usize,
) -> Result<GridSpec> {
    if !(1..=3).contains(&dim) {
        return Err(CliError::Usage(format!("dim must be 1..=3, got {dim}")));
    }
    let ax = AxisSpec::new(-half.unwrap_or(def_half), half.unwrap_or(def_half), nodes.unwrap_or(def_nodes))
        .map_err(CliError::Engine)?;
    GridSpec::with_cap(vec![ax; dim], crate::grid_cap()?).map_err(CliError::Engine)
}

pub fn run(args: CorpusArgs) -> Result<()> {
    if !(1..=3).contains(&args.dim) {
        return Err(CliError::Usage(format!("dim must be 1..=3, got {}", args.dim)));
    }
    let spec = cube_spec(
        args.dim,
        args.half,
        args.nodes,
        DEFAULT_HALF[args.dim - 1],
        DEFAULT_NODES[args.dim - 1],
    )?;
    let entries = corpus::generate(&spec, args.family, args.count, args.seed)?;
    fs::create_dir_all(&args.out_dir).map_err(|e| io_err(&args.out_dir, e))?;
    for e in &entries {
        let path = args.out_dir.join(format!("entry-{:03}-{}.lcg", e.index, e.family.name()));
        format::write_logconcave(&path, &e.f)?;
        let mass = e.f.integrate()?;
        println!("wrote {} ({}, mass {mass})", path.display(), e.family.name());
    }
    Ok(())
}
