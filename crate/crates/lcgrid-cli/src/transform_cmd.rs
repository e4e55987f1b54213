use lcgrid::legendre::{conjugate_profile, polar_density};
use lcgrid::steiner::{asplund_product, homothety, steiner_symmetrize};
use lcgrid::{AxisSpec, ConjugatePlan, GridSpec, Hyperplane};

use crate::error::{CliError, Result};
use crate::{format, Op, TransformArgs};

/// Target grid for conjugate/polar: flags if given, otherwise the source
/// window itself (self-dual is the right default for the corpus scales).
fn target_spec(src: &GridSpec, half: Option<f64>, nodes: Option<usize>) -> Result<GridSpec> {
    let axes: Vec<AxisSpec> = src
        .axes()
        .iter()
        .map(|ax| {
            let h = half.unwrap_or_else(|| 0.5 * (ax.hi - ax.lo));
            let mid = half.map_or(0.5 * (ax.lo + ax.hi), |_| 0.0);
            AxisSpec::new(mid - h, mid + h, nodes.unwrap_or(ax.count))
        })
        .collect::<lcgrid::Result<_>>()
        .map_err(CliError::Engine)?;
    GridSpec::with_cap(axes, crate::grid_cap()?).map_err(CliError::Engine)
}

pub fn run(args: TransformArgs) -> Result<()> {
    let cap = crate::grid_cap()?;
    let input = format::read(&args.input, cap)?;
    let dim = input.spec().dim();

    match args.op {
        Op::Conjugate => {
            let phi = input.into_convex(&args.input)?;
            let target = target_spec(phi.spec(), args.dual_half, args.dual_nodes)?;
            let plan = ConjugatePlan::legendre(phi.spec().clone(), target)?;
            let (psi, diag) = conjugate_profile(&phi, &plan)?;
            format::write_convex(&args.output, &psi)?;
            println!(
                "conjugate: {} -> {} finite nodes, {} boundary maximizers",
                phi.finite_count(),
                psi.finite_count(),
                diag.boundary_hits
            );
        }
        Op::Polar => {
            let f = input.into_logconcave(&args.input)?;
            let z = args.z.unwrap_or_else(|| vec![0.0; dim]);
            if z.len() != dim {
                return Err(CliError::Usage(format!(
                    "--z needs {dim} coordinates, got {}",
                    z.len()
                )));
            }
            let target = target_spec(f.spec(), args.dual_half, args.dual_nodes)?;
            let before = f.integrate()?;
            let (polar, _) = polar_density(&f, target, &z)?;
            let after = polar.integrate()?;
            format::write_logconcave(&args.output, &polar)?;
            println!("polar: mass {before} -> {after}");
        }
        Op::Steiner => {
            let f = input.into_logconcave(&args.input)?;
            let before = f.integrate()?;
            let out = steiner_symmetrize(&f, &Hyperplane::new(args.axis, args.offset))?;
            let after = out.integrate()?;
            format::write_logconcave(&args.output, &out)?;
            println!("steiner: mass {before} -> {after}");
        }
        Op::Asplund => {
            let f = input.into_logconcave(&args.input)?;
            let path = args
                .with
                .ok_or_else(|| CliError::Usage(String::from("--op asplund needs --with <file>")))?;
            let g = format::read(&path, cap)?.into_logconcave(&path)?;
            let mf = f.integrate()?;
            let mg = g.integrate()?;
            let out = asplund_product(&f, &g)?;
            let after = out.integrate()?;
            format::write_logconcave(&args.output, &out)?;
            println!("asplund: masses {mf}, {mg} -> {after}");
        }
        Op::Homothety => {
            let f = input.into_logconcave(&args.input)?;
            let lambda = args
                .lambda
                .ok_or_else(|| CliError::Usage(String::from("--op homothety needs --lambda")))?;
            let before = f.integrate()?;
            let out = homothety(&f, lambda)?;
            let after = out.integrate()?;
            format::write_logconcave(&args.output, &out)?;
            println!("homothety: mass {before} -> {after}");
        }
    }
    Ok(())
}
