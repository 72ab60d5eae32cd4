use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use hqc_rmrs::dfr::{self, dfr_report, END_TO_END_PRECISION_BITS};
use hqc_rmrs::error_model::{
    default_tail_masses, error_model_report, profile_p_star, FractionJson,
};
use hqc_rmrs::hqc::file_params;
use hqc_rmrs::params::{self, published_gain, HqcParams};
use hqc_rmrs::rng::{stream, Domain};
use hqc_rmrs::sim::{output, Experiment, NoiseChannel, TrialPlan};
use hqc_rmrs::{
    Ciphertext, ExactProb, Hqc, InnerBound, Log2Value, PublicKey, RsCode, SecretKey, MESSAGE_BYTES,
};

use crate::args::{Analysis, ChannelArg, Cli, Command, Format, GlobalArgs, SetArgs, Simulation};
use crate::Failure;

type Outcome = Result<(), Failure>;

pub fn run(cli: Cli) -> Outcome {
    let g = &cli.global;
    match cli.command {
        Command::Params { list, set } => params_cmd(g, list, &set),
        Command::Keygen { set, pk, sk } => keygen(g, &set, &pk, &sk),
        Command::Encrypt { pk, message } => encrypt(g, &pk, &message),
        Command::Decrypt { sk, ciphertext } => decrypt(g, &sk, &ciphertext),
        Command::Analyze { what } => {
            if g.format != Format::Json {
                return Err(Failure::new("invalid-argument", "analyze writes JSON only"));
            }
            analyze(g, what)
        }
        Command::Simulate { what } => simulate(g, what),
    }
}

/// Writes `value` as JSON to `--out` or stdout, then prints `summary`.
fn emit_json(g: &GlobalArgs, value: &impl Serialize, summary: &str) -> Outcome {
    let text = serde_json::to_string_pretty(value)?;
    match &g.out {
        Some(path) => {
            fs::write(path, text + "\n")?;
            println!("{summary}");
        }
        None => {
            write_stdout(format!("{text}\n").as_bytes())?;
            eprintln!("{summary}");
        }
    }
    Ok(())
}

/// Writes to stdout; a closed pipe downstream is not an error.
fn write_stdout(bytes: &[u8]) -> Outcome {
    match std::io::stdout().lock().write_all(bytes) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn required_out(g: &GlobalArgs, what: &str) -> Result<PathBuf, Failure> {
    g.out
        .clone()
        .ok_or_else(|| Failure::new("invalid-argument", format!("{what} needs --out")))
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::new("io", format!("{}: {e}", path.display())))
}

/// One row of the published parameter table.
#[derive(Serialize)]
struct ParamsRow {
    instance: String,
    security: u32,
    w: usize,
    w_e: usize,
    w_r: usize,
    reed_muller: String,
    reed_solomon: String,
    n: usize,
    dfr: String,
    gain: String,
}

impl ParamsRow {
    fn new(p: &HqcParams) -> Self {
        let s = p.summary();
        let triple = |t: [usize; 3]| format!("[{}, {}, {}]", t[0], t[1], t[2]);
        Self {
            instance: s.name.to_uppercase(),
            security: s.security_bits,
            w: s.w,
            w_e: s.w_e,
            w_r: s.w_r,
            reed_muller: triple(s.reed_muller),
            reed_solomon: triple(s.reed_solomon),
            n: s.n,
            dfr: format!("< 2^{}", s.dfr_target_log2),
            gain: published_gain(&p.name).unwrap_or("-").to_string(),
        }
    }
}

fn params_cmd(g: &GlobalArgs, list: bool, set: &SetArgs) -> Outcome {
    if !list {
        if g.format == Format::Csv {
            return Err(Failure::new("invalid-argument", "CSV output needs --list"));
        }
        let p = set.params()?;
        return emit_json(
            g,
            &p.summary(),
            &format!("{}: n = {}, N = {}", p.name, p.n, p.code_length()),
        );
    }
    let rows: Vec<ParamsRow> = params::all_schemes().iter().map(ParamsRow::new).collect();
    let summary = format!("{} parameter sets", rows.len());
    match g.format {
        Format::Json => emit_json(g, &rows, &summary),
        Format::Csv => {
            let mut buf = Vec::new();
            {
                let mut w = csv::Writer::from_writer(&mut buf);
                for r in &rows {
                    w.serialize(r)?;
                }
                w.flush()?;
            }
            match &g.out {
                Some(path) => {
                    fs::write(path, &buf)?;
                    println!("{summary}");
                }
                None => write_stdout(&buf)?,
            }
            Ok(())
        }
    }
}

fn fresh_seed(g: &GlobalArgs) -> u64 {
    g.seed.unwrap_or_else(rand::random)
}

fn keygen(g: &GlobalArgs, set: &str, pk_path: &Path, sk_path: &Path) -> Outcome {
    let params = params::scheme(set)?;
    let hqc = Hqc::new(params.clone());
    let keys = hqc.keygen_seeded(fresh_seed(g));
    let pk = keys.pk.to_bytes(&params);
    let sk = keys.sk.to_bytes(&params);
    fs::write(pk_path, &pk)?;
    fs::write(sk_path, &sk)?;
    println!(
        "keygen {}: public key {} ({} bytes), secret key {} ({} bytes)",
        params.name,
        pk_path.display(),
        pk.len(),
        sk_path.display(),
        sk.len()
    );
    Ok(())
}

fn encrypt(g: &GlobalArgs, pk_path: &Path, message_path: &Path) -> Outcome {
    let out = required_out(g, "encrypt")?;
    let pk_bytes = read(pk_path)?;
    let params = file_params(&pk_bytes)?;
    let pk = PublicKey::from_bytes(&pk_bytes, &params)?;
    let raw = read(message_path)?;
    let message: [u8; MESSAGE_BYTES] = raw.as_slice().try_into().map_err(|_| {
        Failure::new(
            "malformed-data",
            format!(
                "message must be exactly {MESSAGE_BYTES} bytes, got {}",
                raw.len()
            ),
        )
    })?;
    let hqc = Hqc::new(params.clone());
    let ct = hqc.encrypt(
        &pk,
        &message,
        &mut stream(fresh_seed(g), Domain::Encryption, 0),
    )?;
    let bytes = ct.to_bytes(&params);
    fs::write(&out, &bytes)?;
    println!(
        "encrypt {}: ciphertext {} ({} bytes)",
        params.name,
        out.display(),
        bytes.len()
    );
    Ok(())
}

fn decrypt(g: &GlobalArgs, sk_path: &Path, ct_path: &Path) -> Outcome {
    let out = required_out(g, "decrypt")?;
    let sk_bytes = read(sk_path)?;
    let params = file_params(&sk_bytes)?;
    let sk = SecretKey::from_bytes(&sk_bytes, &params)?;
    let ct = Ciphertext::from_bytes(&read(ct_path)?, &params)?;
    let hqc = Hqc::new(params.clone());
    let message = hqc.decrypt(
        &sk,
        &ct,
        &mut stream(g.seed.unwrap_or(0), Domain::Decoding, 0),
    )?;
    fs::write(&out, message)?;
    println!(
        "decrypt {}: message {} ({} bytes)",
        params.name,
        out.display(),
        message.len()
    );
    Ok(())
}

#[derive(Serialize)]
struct RmBoundReport {
    set: String,
    p: FractionJson,
    d_i: usize,
    simple_log2: Log2Value,
    improved_log2: Log2Value,
    simple_rounded: String,
    improved_rounded: String,
}

#[derive(Serialize)]
struct ConcatPoint {
    n_e: usize,
    delta_e: usize,
    dfr_log2: Log2Value,
    dfr_log2_rounded: String,
}

#[derive(Serialize)]
struct ConcatBoundReport {
    set: String,
    bound: InnerBound,
    p_i_log2: Log2Value,
    points: Vec<ConcatPoint>,
}

fn parse_p(text: &str) -> Result<ExactProb, Failure> {
    Ok(ExactProb::parse_probability(text)?)
}

fn analyze(g: &GlobalArgs, what: Analysis) -> Outcome {
    match what {
        Analysis::Pstar { set } => {
            let profile = set.profile()?;
            let report = error_model_report(&profile, &default_tail_masses())?;
            let summary = format!("{}: p* = {:.6}", set.set, report.p_star.value);
            emit_json(g, &report, &summary)
        }
        Analysis::RmBound { set, p } => {
            let params = set.params()?;
            let d_i = params.inner.min_distance();
            let (p, simple, improved) = match p {
                Some(text) => {
                    let p = parse_p(&text)?;
                    let s = dfr::rm_dfr_simple(&p, d_i as u64)?;
                    let i = dfr::rm_dfr_improved(&p, d_i as u64)?;
                    (p, s, i)
                }
                None => {
                    // p* has a huge denominator; use the enclosing evaluation
                    let s = dfr::end_to_end_dfr(&params, InnerBound::Simple)?;
                    let i = dfr::end_to_end_dfr(&params, InnerBound::Improved)?;
                    (s.p_star, s.p_i, i.p_i)
                }
            };
            let (sl, il) = (simple.log2(), improved.log2());
            let summary = format!(
                "{}: d_i = {d_i}, simple {}, improved {}",
                params.name,
                sl.round_decimal(2),
                il.round_decimal(2)
            );
            let report = RmBoundReport {
                set: params.name.clone(),
                p: FractionJson::from(&p),
                d_i,
                simple_rounded: sl.round_decimal(2),
                improved_rounded: il.round_decimal(2),
                simple_log2: sl,
                improved_log2: il,
            };
            emit_json(g, &report, &summary)
        }
        Analysis::ConcatBound {
            set,
            bound,
            p_i,
            p,
            sweep,
        } => {
            let params = set.params()?;
            let bound = InnerBound::from(bound);
            let p_i = match (p_i, p) {
                (Some(text), _) => ExactProb::parse(&text)?,
                (None, Some(text)) => {
                    dfr::rm_dfr(&parse_p(&text)?, params.inner.min_distance() as u64, bound)?
                        .round_up(END_TO_END_PRECISION_BITS)
                }
                (None, None) => dfr::end_to_end_dfr(&params, bound)?.p_i,
            };
            let lengths = sweep.map_or_else(|| vec![params.outer.length()], |s| s.values());
            let mut points = Vec::with_capacity(lengths.len());
            for n_e in lengths {
                let delta_e = RsCode::with_length(n_e)?.correction_capacity();
                let v = dfr::concat_dfr(n_e as u64, delta_e as u64, &p_i)?.log2();
                points.push(ConcatPoint {
                    n_e,
                    delta_e,
                    dfr_log2_rounded: v.round_decimal(2),
                    dfr_log2: v,
                });
            }
            let summary = match points.as_slice() {
                [one] => format!(
                    "{}: n_e = {}, log2 DFR = {}",
                    params.name, one.n_e, one.dfr_log2_rounded
                ),
                many => format!("{}: {} outer lengths", params.name, many.len()),
            };
            let report = ConcatBoundReport {
                set: params.name.clone(),
                bound,
                p_i_log2: p_i.log2(),
                points,
            };
            emit_json(g, &report, &summary)
        }
        Analysis::EndToEnd { set, bound } => {
            let params = set.params()?;
            let report = dfr_report(&params, bound.into(), 2)?;
            let summary = format!(
                "{}: log2 DFR = {} (target {}, {})",
                params.name,
                report.dfr_log2_rounded,
                report.target_log2,
                if report.meets_target {
                    "met"
                } else {
                    "not met"
                }
            );
            emit_json(g, &report, &summary)
        }
    }
}

fn simulate(g: &GlobalArgs, what: Simulation) -> Outcome {
    let seed = g.seed.unwrap_or(1);
    let (experiment, trials) = match what {
        Simulation::Weights { set, trials } => (
            Experiment::Weights {
                set: set.set.clone(),
                profile: set.profile()?,
            },
            trials,
        ),
        Simulation::Restricted {
            set,
            trials,
            support_len,
        } => (
            Experiment::Restricted {
                set: set.set.clone(),
                profile: set.profile()?,
                support_len,
            },
            trials,
        ),
        Simulation::RmDfr { set, trials, p } => {
            let params = set.params()?;
            let p = match p {
                Some(p) => p,
                None => profile_p_star(&params.error_profile())?.to_f64(),
            };
            (
                Experiment::RmDfr {
                    p,
                    multiplicity: params.inner.multiplicity(),
                },
                trials,
            )
        }
        Simulation::ConcatDfr {
            set,
            trials,
            channel,
            p,
            sweep,
        } => {
            let params = set.params()?;
            let channel = match channel {
                ChannelArg::Hqc => NoiseChannel::Hqc,
                ChannelArg::Bsc => NoiseChannel::Bsc {
                    p: match p {
                        Some(p) => p,
                        None => profile_p_star(&params.error_profile())?.to_f64(),
                    },
                },
            };
            (
                Experiment::ConcatDfr {
                    params,
                    channel,
                    outer_lengths: sweep.values(),
                },
                trials,
            )
        }
    };
    let plan = TrialPlan::new(experiment, trials, seed).with_workers(g.workers);
    plan.validate()?;
    let report = hqc_rmrs::simulate(&plan)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if g.strict && !report.warnings.is_empty() {
        return Err(Failure::new(
            "insufficient-trials",
            report.warnings.join("; "),
        ));
    }
    let summary = report.summary();
    match g.format {
        Format::Json => emit_json(g, &report, &summary),
        Format::Csv => {
            let dir = required_out(g, "CSV output")?;
            fs::create_dir_all(&dir)?;
            for name in output::csv_files(&report) {
                let file = fs::File::create(dir.join(name))?;
                output::write_csv(name, std::io::BufWriter::new(file), &report)?;
            }
            println!("{summary}");
            Ok(())
        }
    }
}
