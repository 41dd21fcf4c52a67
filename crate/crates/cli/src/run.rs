use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use extreme_chains::diagnostics::{
    chi_estimate, conditional_forward_sim, convergence_table, figure1, write_chi_csv, write_convergence_csv,
    write_envelope_csv, write_forward_paths_csv, Figure1Chain,
};
use extreme_chains::kernels::make_kernel;
use extreme_chains::norming::{limit_law, make_norming, write_remainder_csv, NormingScheme};
use extreme_chains::tailchain::{
    hidden_arch, hidden_asym_logistic, hidden_ht_mixture, hidden_rootzen_smith, simulate_negdep_tail_chain,
    write_hidden_paths_csv, write_tail_paths_csv, HtMixtureChain, MixtureComponent,
};
use extreme_chains::{Kernel, Limit};

use crate::config::{ComponentParams, Experiment, HiddenParams};
use crate::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputEntry {
    pub file: String,
    /// Data rows, excluding the header line.
    pub rows: usize,
}

/// Record of a completed run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config: Experiment,
    pub outputs: Vec<OutputEntry>,
    pub package: String,
    pub version: String,
    pub workers: usize,
    pub wall_time_secs: f64,
    #[serde(default)]
    pub warnings: Vec<String>,
}

struct Sink<'a> {
    dir: &'a Path,
    outputs: Vec<OutputEntry>,
    warnings: Vec<String>,
}

impl Sink<'_> {
    fn csv(
        &mut self,
        name: &str,
        write: impl FnOnce(&mut Vec<u8>) -> extreme_chains::Result<()>,
    ) -> Result<(), CliError> {
        let mut buf = Vec::new();
        write(&mut buf)?;
        let lines = buf.iter().filter(|&&b| b == b'\n').count();
        fs::write(self.dir.join(name), &buf)?;
        self.outputs.push(OutputEntry { file: name.into(), rows: lines.saturating_sub(1) });
        Ok(())
    }
}

fn kernel(p: &extreme_chains::kernels::KernelParams, seed: u64) -> Result<Kernel, CliError> {
    Ok(make_kernel(p, seed)?)
}

fn component(p: &ComponentParams) -> Result<MixtureComponent<f64>, CliError> {
    let law: Limit = limit_law(&p.innovation)?;
    if law.has_atoms() {
        return Err(CliError::Config("mixture innovations must not have atoms".into()));
    }
    Ok(MixtureComponent { alpha: p.alpha, beta: p.beta, innovation: law.continuous })
}

/// Runs one experiment, writing its CSV artifacts and the manifest into `out`.
pub fn run_experiment(config: &Experiment, out: &Path) -> Result<Manifest, CliError> {
    let start = Instant::now();
    fs::create_dir_all(out)?;
    let mut sink = Sink { dir: out, outputs: Vec::new(), warnings: Vec::new() };
    let seed = config.seed();
    match config {
        Experiment::Simulate { kernel: kp, init, horizon, n, changepoint, .. } => {
            let k = kernel(kp, seed)?;
            let paths = conditional_forward_sim(&k, &k.margin(), *init, *horizon, *n, seed)?;
            sink.csv("paths.csv", |w| write_forward_paths_csv(&paths, *changepoint, w))?;
        }
        Experiment::Converge { kernel: kp, scheme, limit, t, v_grid, n, remainder_points, .. } => {
            let k = kernel(kp, seed)?;
            let s = make_norming(scheme)?;
            let law = limit_law(limit)?;
            let table = convergence_table(&k, &s, &law, *t, v_grid, *n, seed)?;
            sink.csv("convergence.csv", |w| write_convergence_csv(&[table], w))?;
            if let Some(points) = remainder_points {
                let mut rows = Vec::new();
                for &v in v_grid {
                    match s.remainder_grid(*t, v, *points) {
                        Ok(r) => rows.extend(r),
                        // the compact can leave the support at moderate v
                        Err(e @ extreme_chains::Error::Domain { .. }) => {
                            sink.warnings.push(format!("remainders skipped at v = {v}: {e}"));
                        }
                        Err(e) => return Err(e.into()),
                    }
                }
                sink.csv("remainders.csv", |w| write_remainder_csv(&rows, w))?;
            }
        }
        Experiment::Figure1 { x0, horizon, n, chains, .. } => {
            let chains = chains.clone().unwrap_or_else(|| Figure1Chain::ALL.to_vec());
            for c in chains {
                let fig = figure1(c, *x0, *horizon, *n, seed)?;
                let envs: Vec<_> = std::iter::once(fig.actual).chain(fig.tailchain).collect();
                for e in &envs {
                    if let Some(msg) = &e.warning {
                        sink.warnings.push(format!("{} {}: {msg}", c.label(), e.source.label()));
                    }
                }
                sink.csv(&format!("figure1_{}.csv", c.label()), |w| write_envelope_csv(&envs, w))?;
            }
        }
        Experiment::Hidden { chain, horizon, n, .. } => {
            let (horizon, n) = (*horizon, *n);
            let paths = match chain {
                HiddenParams::AsymmetricLogistic { phi1, phi2, nu } => {
                    hidden_asym_logistic(*phi1, *phi2, *nu, horizon, n, seed)?
                }
                HiddenParams::HtMixture { lambda, first, second } => {
                    let chain = HtMixtureChain { lambda: *lambda, first: component(first)?, second: component(second)? };
                    hidden_ht_mixture(&chain, horizon, n, seed)?
                }
                HiddenParams::RootzenSmith => hidden_rootzen_smith(horizon, n, seed)?,
                HiddenParams::Arch { theta0, theta1 } => hidden_arch(*theta0, *theta1, horizon, n, seed)?,
            };
            sink.csv("hidden_paths.csv", |w| write_hidden_paths_csv(&paths, w))?;
        }
        Experiment::Negdep { scheme, k_minus, k_plus, horizon, n, .. } => {
            let s = make_norming::<f64>(scheme)?;
            if !matches!(s, NormingScheme::NegativeHt { .. } | NormingScheme::AlternatingGaussian { .. }) {
                return Err(CliError::Config(format!("scheme {} is not sign-alternating", s.id())));
            }
            let (km, kp) = (limit_law(k_minus)?, limit_law(k_plus)?);
            let paths = simulate_negdep_tail_chain(&s.update_functions(), &km, &kp, *horizon, *n, seed)?;
            sink.csv("tail_paths.csv", |w| write_tail_paths_csv(&paths, w))?;
        }
        Experiment::Chi { kernel: kp, t, u_grid, n, .. } => {
            let k = kernel(kp, seed)?;
            let rows = chi_estimate(&k, &k.margin(), *t, u_grid, *n, seed)?;
            for r in rows.iter().filter(|r| r.flagged) {
                sink.warnings.push(format!("u = {}: only {} exceedances", r.u, r.n_exceed));
            }
            sink.csv("chi.csv", |w| write_chi_csv(&rows, w))?;
        }
    }
    let manifest = Manifest {
        config: config.clone(),
        outputs: sink.outputs,
        package: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        workers: rayon::current_num_threads(),
        wall_time_secs: start.elapsed().as_secs_f64(),
        warnings: sink.warnings,
    };
    emit_manifest(&manifest, out)?;
    Ok(manifest)
}

/// Writes the manifest as pretty-printed JSON.
pub fn emit_manifest(manifest: &Manifest, out: &Path) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(manifest).map_err(|e| CliError::Io(e.to_string()))?;
    fs::write(out.join(MANIFEST_FILE), text + "\n")?;
    Ok(())
}
