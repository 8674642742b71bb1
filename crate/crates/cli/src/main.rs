//! `addcomb`: command-line workbench for desk-scale additive combinatorics.

use std::path::PathBuf;
use std::sync::OnceLock;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use num::complex::Complex64;

use addcomb_cli::report::{build_digest, RunConfig};
use addcomb_cli::suites::registry;
use addcomb_cli::run_suite;
use addcomb_core::fourier::{inverse, large_sieve_check, transform, Spectrum};
use addcomb_core::freiman::{dense_model_f2, is_freiman_hom, is_freiman_quadratic};
use addcomb_core::gowers::{gowers_norm_fast, gowers_norm_naive};
use addcomb_core::io::{
    read_json, write_json, DenseFnFile, FamilyFile, MapFile, PhaseFile, QuadPolyFile, SetFile,
    ThetaFile, ZMapFile,
};
use addcomb_core::lift::{end_to_end_f2, extract_affine_f2, lift_f2, lift_z, PsiMode};
use addcomb_core::nil::correlate;
use addcomb_core::progression::{
    bohr_enumerate, bohr_to_gap, gap_elements, sublevel_progression, AffineRZMap, BohrSet,
};
use addcomb_core::quadratic::{mixed_derivative_split, rank_line_recover};
use addcomb_core::sumset::is_k_approximate;

fn long_version() -> &'static str {
    static V: OnceLock<String> = OnceLock::new();
    V.get_or_init(|| format!("{} (build {})", env!("CARGO_PKG_VERSION"), build_digest()))
}

#[derive(Parser)]
#[command(name = "addcomb", about = "desk-scale additive combinatorics workbench")]
#[command(version = env!("CARGO_PKG_VERSION"), long_version = long_version())]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Naive,
    Fast,
}

#[derive(Clone, Copy, ValueEnum)]
enum Ambient {
    F2,
    Z,
}

#[derive(Subcommand)]
enum Cmd {
    /// Fourier transform of a dense function (E_x averaging).
    Fft {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Apply the inverse transform instead.
        #[arg(long)]
        invert: bool,
    },
    /// Large sieve inequality check against delta-separated points.
    SieveCheck {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        thetas: PathBuf,
    },
    /// Gowers U^k norm of a dense function.
    Gowers {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        k: u8,
        #[arg(long, value_enum, default_value = "fast")]
        method: Method,
    },
    /// Freiman homomorphism (order 2) or Freiman-quadratic (order 3) check.
    FreimanCheck {
        #[arg(long)]
        map: PathBuf,
        #[arg(long, default_value = "2")]
        order: u8,
    },
    /// Dense model of a subset of F_2^N.
    DenseModel {
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// K-approximate-group certification.
    ApproxGroup {
        #[arg(long)]
        set: PathBuf,
        #[arg(long = "K")]
        k: f64,
    },
    /// Bohr set enumeration, optionally converted to a progression.
    Bohr {
        #[arg(long = "M")]
        modulus: u64,
        /// Comma-separated frequencies.
        #[arg(long)]
        freqs: String,
        /// Comma-separated radii in (0, 1/2).
        #[arg(long)]
        radii: String,
        #[arg(long)]
        to_gap: bool,
    },
    /// Sublevel-set progression inside an integer box.
    Sublevel {
        /// Box sides, e.g. 200x50.
        #[arg(long = "box")]
        box_sides: String,
        /// Comma-separated coefficients of the affine map.
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        eps: f64,
        /// Comma-separated coordinates of the vanishing point x*.
        #[arg(long)]
        vanish: String,
        /// Constant term; defaults to the value that makes eta(x*) = 0.
        #[arg(long)]
        beta: Option<f64>,
    },
    /// Mixed-derivative split of a quadratic polynomial on F_2^(n+N).
    QuadSplit {
        #[arg(long)]
        psi: PathBuf,
        #[arg(long)]
        n: u32,
        #[arg(long = "N")]
        big_n: u32,
    },
    /// Rank recovery for a linearly varying family of low-rank forms.
    RankLine {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        r: u32,
        #[arg(long)]
        min_frac: Option<f64>,
    },
    /// U^3 lift of a partial map (F_2 or integer ambient).
    Lift {
        #[arg(long)]
        map: PathBuf,
        #[arg(long, value_enum)]
        ambient: Ambient,
        #[arg(long)]
        verify: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Extraction of an affine map from a quadratic correlate.
    Extract {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        psi: Option<PathBuf>,
        /// Exhaustive quadratic search instead of a supplied correlate.
        #[arg(long)]
        search: bool,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long, default_value = "3.0")]
        c_exponent: f64,
    },
    /// Evaluate a bracket phase polynomial over a range.
    Bracket {
        #[arg(long)]
        phase: PathBuf,
        #[arg(long)]
        range: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Correlation of a dense function on Z/NZ with a bracket phase.
    Correlate {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        phase: PathBuf,
    },
    /// Run a named experiment suite and emit a JSONL report.
    Run {
        #[arg(long)]
        suite: String,
        #[arg(long, default_value = "0")]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        instances: Option<usize>,
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Worker threads; 0 uses the rayon default.
        #[arg(long, default_value = "0")]
        threads: usize,
        #[arg(long, default_value = "1e-9")]
        tolerance: f64,
    },
    /// List registered suites.
    Suites,
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<T>()
                .map_err(|e| anyhow::anyhow!("bad {what} entry '{t}': {e}"))
        })
        .collect()
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Fft { input, out, invert } => {
            let file = read_json::<DenseFnFile>(&input)?;
            let result = if invert {
                // interpret the input values as spectrum coefficients
                file.group.validate()?;
                let coeffs = file
                    .values
                    .iter()
                    .map(|&[re, im]| Complex64::new(re, im))
                    .collect();
                let spec = Spectrum::from_coefficients(file.group, coeffs)?;
                DenseFnFile::from_fn(&inverse(&spec)?)
            } else {
                let spec = transform(&file.into_fn()?)?;
                DenseFnFile {
                    group: spec.group().clone(),
                    values: spec.coefficients().iter().map(|z| [z.re, z.im]).collect(),
                }
            };
            write_json(&out, &result)?;
            eprintln!("wrote {} to {}", if invert { "function" } else { "spectrum" }, out.display());
            Ok(())
        }
        Cmd::SieveCheck { input, thetas } => {
            let f = read_json::<DenseFnFile>(&input)?;
            let t = read_json::<ThetaFile>(&thetas)?;
            let values: Vec<Complex64> = f
                .values
                .iter()
                .map(|&[re, im]| Complex64::new(re, im))
                .collect();
            let rep = large_sieve_check(&values, &t.thetas, t.delta)?;
            print_json(&rep)
        }
        Cmd::Gowers { input, k, method } => {
            let f = read_json::<DenseFnFile>(&input)?.into_fn()?;
            let t0 = Instant::now();
            let (norm, name) = match method {
                Method::Naive => (gowers_norm_naive(&f, k)?, "naive"),
                Method::Fast => (gowers_norm_fast(&f, k)?, "fast"),
            };
            let runtime_ms = t0.elapsed().as_secs_f64() * 1e3;
            print_json(&serde_json::json!({
                "norm": norm,
                "k": k,
                "method": name,
                "runtime_ms": runtime_ms,
            }))
        }
        Cmd::FreimanCheck { map, order } => {
            let phi = read_json::<MapFile>(&map)?.into_map()?;
            match order {
                2 => print_json(&is_freiman_hom(&phi)?),
                3 => print_json(&is_freiman_quadratic(&phi)?),
                _ => bail!("order must be 2 or 3"),
            }
        }
        Cmd::DenseModel { set, out } => {
            let a = read_json::<SetFile>(&set)?.into_set()?;
            let model = dense_model_f2(&a)?;
            let payload = serde_json::json!({
                "ambient_dim": model.ambient_dim,
                "model_dim": model.model_dim,
                "projection_rows": model.projection.rows,
                "model_set": SetFile::from_set(&model.model_set),
            });
            match out {
                Some(p) => {
                    write_json(&p, &payload)?;
                    eprintln!("wrote dense model to {}", p.display());
                }
                None => print_json(&payload)?,
            }
            Ok(())
        }
        Cmd::ApproxGroup { set, k } => {
            let a = read_json::<SetFile>(&set)?.into_set()?;
            print_json(&is_k_approximate(&a, k)?)
        }
        Cmd::Bohr {
            modulus,
            freqs,
            radii,
            to_gap,
        } => {
            let freqs: Vec<u64> = parse_list(&freqs, "frequency")?;
            let radii: Vec<f64> = parse_list(&radii, "radius")?;
            let b = BohrSet::new(modulus, freqs, radii)?;
            if to_gap {
                let gap = bohr_to_gap(&b)?;
                let e = gap_elements(&gap)?;
                print_json(&serde_json::json!({
                    "gap": gap,
                    "size": e.elements.len(),
                    "proper": e.proper,
                }))
            } else {
                let s = bohr_enumerate(&b)?;
                print_json(&SetFile::from_set(&s))
            }
        }
        Cmd::Sublevel {
            box_sides,
            alpha,
            eps,
            vanish,
            beta,
        } => {
            let sides: Vec<u64> = box_sides
                .split(['x', 'X'])
                .map(|t| t.trim().parse().context("bad box side"))
                .collect::<Result<_>>()?;
            let alphas: Vec<f64> = parse_list(&alpha, "alpha")?;
            let x_star: Vec<i64> = parse_list(&vanish, "vanish coordinate")?;
            let beta = beta.unwrap_or_else(|| {
                let mut acc = 0.0;
                for (&a, &x) in alphas.iter().zip(&x_star) {
                    acc += a * x as f64;
                }
                -acc
            });
            let eta = AffineRZMap { alphas, beta };
            let rep = sublevel_progression(&sides, &eta, eps, &x_star)?;
            print_json(&rep)
        }
        Cmd::QuadSplit { psi, n, big_n } => {
            let poly = read_json::<QuadPolyFile>(&psi)?.into_poly()?;
            let split = mixed_derivative_split(&poly, n, big_n)?;
            print_json(&serde_json::json!({
                "cross_rows": split.cross.rows,
                "restriction_y": QuadPolyFile::from_poly(&split.restriction_y),
                "restriction_x": QuadPolyFile::from_poly(&split.restriction_x),
            }))
        }
        Cmd::RankLine {
            family,
            set,
            r,
            min_frac,
        } => {
            let fam = read_json::<FamilyFile>(&family)?.into_family()?;
            let a = read_json::<SetFile>(&set)?.into_set()?;
            print_json(&rank_line_recover(&fam, &a, r, min_frac)?)
        }
        Cmd::Lift {
            map,
            ambient,
            verify,
            out,
        } => {
            let instance = match ambient {
                Ambient::F2 => {
                    let phi = read_json::<MapFile>(&map)?.into_map()?;
                    lift_f2(&phi, verify)?
                }
                Ambient::Z => {
                    let z = read_json::<ZMapFile>(&map)?;
                    let pairs: Vec<(u64, u64)> =
                        z.pairs.iter().map(|&[a, b]| (a, b)).collect();
                    lift_z(z.range_n, z.modulus_m, &pairs, verify)?
                }
            };
            let payload = serde_json::json!({
                "sigma": instance.sigma,
                "meta": instance.meta,
                "verification": instance.verification,
                "lifted": DenseFnFile::from_fn(&instance.lifted),
            });
            match out {
                Some(p) => {
                    write_json(&p, &payload)?;
                    eprintln!("wrote lift to {}", p.display());
                }
                None => print_json(&payload)?,
            }
            Ok(())
        }
        Cmd::Extract {
            map,
            psi,
            search,
            tau,
            c_exponent,
        } => {
            let phi = read_json::<MapFile>(&map)?.into_map()?;
            match (psi, search) {
                (Some(path), false) => {
                    let poly = read_json::<QuadPolyFile>(&path)?.into_poly()?;
                    let sigma = phi.len() as f64 / phi.domain().cardinality() as f64;
                    let tau = tau.unwrap_or_else(|| sigma.powf(c_exponent).min(1.0));
                    print_json(&extract_affine_f2(&phi, &poly, tau)?)
                }
                (None, true) => {
                    let rep = end_to_end_f2(&phi, PsiMode::Search, tau, c_exponent)?;
                    print_json(&serde_json::json!({
                        "correlation": rep.correlation,
                        "sigma": rep.sigma,
                        "psi": QuadPolyFile::from_poly(&rep.psi),
                        "extraction": rep.extraction,
                    }))
                }
                _ => bail!("pass exactly one of --psi <file> or --search"),
            }
        }
        Cmd::Bracket { phase, range, out } => {
            let p = read_json::<PhaseFile>(&phase)?.into_phase();
            let values: Vec<[f64; 2]> = (0..range)
                .map(|n| {
                    let z = p.eval(n as i64);
                    [z.re, z.im]
                })
                .collect();
            let payload = serde_json::json!({ "range": range, "values": values });
            match out {
                Some(path) => {
                    write_json(&path, &payload)?;
                    eprintln!("wrote sequence to {}", path.display());
                }
                None => print_json(&payload)?,
            }
            Ok(())
        }
        Cmd::Correlate { f, phase } => {
            let dense = read_json::<DenseFnFile>(&f)?.into_fn()?;
            let p = read_json::<PhaseFile>(&phase)?.into_phase();
            let value = correlate(&dense, &|n| p.eval(n as i64))?;
            print_json(&serde_json::json!({
                "re": value.re,
                "im": value.im,
                "magnitude": value.norm(),
            }))
        }
        Cmd::Run {
            suite,
            seed,
            out,
            instances,
            csv,
            threads,
            tolerance,
        } => {
            let cfg = RunConfig {
                suite: suite.clone(),
                seed,
                instances,
                tolerance,
                threads,
            };
            let t0 = Instant::now();
            let report = run_suite(&cfg)?;
            let elapsed = t0.elapsed().as_secs_f64();
            let jsonl = report.to_jsonl();
            if let Some(path) = &out {
                std::fs::write(path, &jsonl)
                    .with_context(|| format!("writing {}", path.display()))?;
            } else {
                print!("{jsonl}");
            }
            if let Some(path) = &csv {
                let keys = addcomb_cli::ratio_keys_of(&suite)?;
                std::fs::write(path, report.to_csv(keys))
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            eprintln!(
                "suite {suite}: {}/{} passed in {elapsed:.2}s (build {})",
                report.summary.passed,
                report.summary.instances,
                report.summary.build,
            );
            if report.all_pass() {
                Ok(())
            } else {
                std::process::exit(1);
            }
        }
        Cmd::Suites => {
            for s in registry() {
                println!(
                    "{:16} {:5} instances  {}",
                    s.name(),
                    s.default_instances(),
                    s.description()
                );
            }
            Ok(())
        }
    }
}
