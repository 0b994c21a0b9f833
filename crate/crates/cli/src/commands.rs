use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rateless_recon::channel::{channel_snr, db_to_linear, linear_to_db, va_for_snr, ChannelParams};
use rateless_recon::keyrate::{
    finite_size_key_rate, maximize_log_scale, optimal_va, skr_vs_distance, KeyRateInputs, PeModel, VaMode,
    VA_RANGE, VA_REL_TOLERANCE,
};
use rateless_recon::multidim::LlrScaling;
use rateless_recon::raptor::{bp_decode, DecoderConfig, DegreeDistribution, Precode, RaptorBlockPlan};
use rateless_recon::rng::{StreamKey, StreamTag};
use rateless_recon::session::{
    block_data, measure_efficiency_with, replay, run_block, BatchPolicy, DistributionPolicy, RestartPolicy,
    SessionConfig, SessionMode, SessionOutcome, SessionStatus, SessionTranscript, ThresholdTable, SUPPORTED_SNR_DB,
};
use rateless_recon::Real;
use rayon::prelude::*;

use crate::config::{Config, CONFIG_VERSION};
use crate::{CliError, Command, Profile, VERSION};

/// CSV text plus one diagnostic per row that could not be produced.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub csv: String,
    pub failures: Vec<String>,
}

pub const EFFICIENCY_COLUMNS: &str = "snr_db,distribution,blocks,fer,mean_n,rate,beta,wall_ms";
pub const OPTIMAL_VA_COLUMNS: &str = "distance_km,va_opt,snr_db,k_asymptotic";
pub const SKR_COLUMNS: &str = "distance_km,va_mode,N,beta,k_bits_per_pulse,k_bits_per_sec";
pub const BENCH_COLUMNS: &str = "snr_db,n_symbols,iters,decode_ms,throughput_bits_per_sec";
pub const REPLAY_COLUMNS: &str = "block,snr_db,distribution,status,n_used,decode_attempts,llr_crc64,identical";

/// Name of the envelope row in efficiency output.
pub const ENVELOPE: &str = "dd_adaptive";

pub fn execute(cmd: Command, cfg: &mut Config) -> Result<Report, CliError> {
    let version = cfg.get::<u32>("config_version", Some(CONFIG_VERSION))?;
    if version != CONFIG_VERSION {
        return Err(CliError::Usage(format!("config_version {version} unsupported (expected {CONFIG_VERSION})")));
    }
    let profile = cfg.get::<Profile>("profile", Some(Profile::Desk))?;
    let seed = cfg.get::<u64>("seed", None)?;
    let (columns, body) = match cmd {
        Command::Efficiency => (EFFICIENCY_COLUMNS, efficiency(cfg, profile, seed)?),
        Command::OptimalVa => (OPTIMAL_VA_COLUMNS, optimal_va_cmd(cfg)?),
        Command::Skr => (SKR_COLUMNS, skr(cfg)?),
        Command::DecodeBench => (BENCH_COLUMNS, decode_bench(cfg, profile, seed)?),
        Command::Replay => (REPLAY_COLUMNS, replay_cmd(cfg, seed)?),
    };
    let mut csv = format!("# rrecon {VERSION} {}\n", cmd.name());
    let _ = writeln!(csv, "# rerun with: rrecon {} --config <this file>", cmd.name());
    for (k, v) in cfg.echo() {
        let _ = writeln!(csv, "#% {k} = {v}");
    }
    csv.push_str(columns);
    csv.push('\n');
    for row in &body.rows {
        csv.push_str(row);
        csv.push('\n');
    }
    Ok(Report { csv, failures: body.failures })
}

/// Rows in final order, before the header is attached. The config must be
/// fully read before rows are computed so that a usage error never costs a
/// simulation.
#[derive(Default)]
struct Body {
    rows: Vec<String>,
    failures: Vec<String>,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Precision {
    F32,
    F64,
}

fn precision(cfg: &mut Config) -> Result<Precision, CliError> {
    cfg.get_with(
        "precision",
        Some(Precision::F64),
        |s| match s {
            "f64" => Ok(Precision::F64),
            "f32" => Ok(Precision::F32),
            _ => Err("expected f32 or f64".into()),
        },
        |p| if *p == Precision::F32 { "f32".into() } else { "f64".into() },
    )
}

fn snr_grid(cfg: &mut Config, default: Vec<f64>) -> Result<Vec<f64>, CliError> {
    let grid = cfg.grid("snr_db", default)?;
    let (lo, hi) = SUPPORTED_SNR_DB;
    if let Some(bad) = grid.iter().find(|&&g| !(lo..=hi).contains(&g)) {
        return Err(usage(format!("snr_db {bad} outside [{lo}, {hi}] dB")));
    }
    Ok(grid)
}

fn precode(cfg: &mut Config) -> Result<Arc<Precode>, CliError> {
    let k = cfg.get::<usize>("k", Some(9900))?;
    let k_prime = cfg.get::<usize>("k_prime", Some(10000))?;
    let weight = cfg.get::<usize>("column_weight", Some(3))?;
    let seed = cfg.get::<u64>("precode_seed", Some(1))?;
    Ok(Arc::new(Precode::peg(k, k_prime, weight, seed)?))
}

fn distribution_policy(name: &str) -> Result<DistributionPolicy, String> {
    if name == "adaptive" {
        return Ok(DistributionPolicy::Adaptive(ThresholdTable::calibrated()));
    }
    let which = name
        .strip_prefix("omega")
        .and_then(|n| n.parse::<usize>().ok())
        .ok_or_else(|| format!("unknown distribution `{name}` (omega1..omega4 or adaptive)"))?;
    DistributionPolicy::omega(which).map_err(|e| e.to_string())
}

/// Session settings shared by efficiency, decode-bench and replay.
fn session_config(cfg: &mut Config, seed: u64, with_feedback: bool) -> Result<SessionConfig, CliError> {
    let precode = precode(cfg)?;
    let mut s = SessionConfig::new(precode);
    s.master_seed = seed;
    s.d = cfg.get("d", Some(s.d))?;
    s.decoder.max_iters = cfg.get("max_iters", Some(s.decoder.max_iters))?;
    s.llr_scaling = cfg.get_with(
        "llr_scaling",
        Some(LlrScaling::NormAware),
        |v| match v {
            "norm_aware" => Ok(LlrScaling::NormAware),
            "matched" => Ok(LlrScaling::Matched),
            "nominal" => Ok(LlrScaling::Nominal),
            _ => Err("expected norm_aware, matched or nominal".into()),
        },
        |v| {
            match v {
                LlrScaling::Matched => "matched",
                LlrScaling::Nominal => "nominal",
                _ => "norm_aware",
            }
            .into()
        },
    )?;
    if !with_feedback {
        return Ok(s);
    }
    s.beta_min = cfg.get("beta_min", Some(s.beta_min))?;
    s.batch = cfg.get_with(
        "batch",
        Some(BatchPolicy::Auto),
        |v| match v {
            "auto" => Ok(BatchPolicy::Auto),
            n => n.parse().map(BatchPolicy::Fixed).map_err(|_| "expected auto or a symbol count".to_string()),
        },
        |v| match v {
            BatchPolicy::Auto => "auto".into(),
            BatchPolicy::Fixed(n) => n.to_string(),
        },
    )?;
    s.check_width = cfg.get("check_width", Some(s.check_width))?;
    s.restart = cfg.get_with(
        "restart",
        Some(RestartPolicy::Warm),
        |v| match v {
            "warm" => Ok(RestartPolicy::Warm),
            "cold" => Ok(RestartPolicy::Cold),
            _ => Err("expected warm or cold".into()),
        },
        |v| if *v == RestartPolicy::Cold { "cold".into() } else { "warm".into() },
    )?;
    s.start_efficiency = cfg.get("start_efficiency", Some(s.start_efficiency))?;
    // `0` keeps the feedback loop; a value in (0, 1] decodes once at that efficiency
    let single = cfg.get::<f64>("single_shot_beta", Some(0.0))?;
    if single != 0.0 {
        s.mode = SessionMode::SingleShot(single);
    }
    s.validate()?;
    Ok(s)
}

fn efficiency(cfg: &mut Config, profile: Profile, seed: u64) -> Result<Body, CliError> {
    let (grid, blocks) = match profile {
        Profile::Desk => ("-12:0:2", 20),
        Profile::Paper => ("-20:0:2", 40),
    };
    let grid = snr_grid(cfg, crate::config::parse_grid(grid).expect("static grid"))?;
    let blocks = cfg.get::<usize>("blocks", Some(blocks))?;
    if blocks == 0 {
        return Err(usage("blocks must be >= 1"));
    }
    let names = cfg.list("distributions", &["omega1", "omega2", "omega3", "omega4"])?;
    let policies = names.iter().map(|n| distribution_policy(n).map_err(usage)).collect::<Result<Vec<_>, _>>()?;
    let prec = precision(cfg)?;
    let base = session_config(cfg, seed, true)?;
    let archive = cfg.path("archive")?;
    let echo: Vec<(String, String)> = cfg.echo().to_vec();
    cfg.finish()?;
    if let Some(dir) = &archive {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }

    let mut body = Body::default();
    for &db in &grid {
        let snr = db_to_linear(db);
        let mut best: Option<(f64, String)> = None;
        for (name, policy) in names.iter().zip(&policies) {
            let scfg = SessionConfig { distribution: policy.clone(), ..base.clone() };
            let t0 = Instant::now();
            let sink = |block: u64, out: &record::Outcome| -> rateless_recon::Result<()> {
                match &archive {
                    Some(dir) => record::archive(dir, &echo, db, name, block, out),
                    None => Ok(()),
                }
            };
            let rep = match prec {
                Precision::F64 => measure_efficiency_with::<f64, _>(snr, &scfg, blocks, |b, o| sink(b, &o.into())),
                Precision::F32 => measure_efficiency_with::<f32, _>(snr, &scfg, blocks, |b, o| sink(b, &o.into())),
            };
            let wall = t0.elapsed().as_secs_f64() * 1e3;
            match rep {
                Ok(r) => {
                    let label = if name == "adaptive" { format!("adaptive:{}", r.distribution) } else { name.clone() };
                    let fields = format!("{},{},{},{},{}", r.blocks, r.fer, opt(r.mean_n), opt(r.rate), opt(r.beta));
                    if let Some(b) = r.beta {
                        if best.as_ref().map_or(true, |(bb, _)| b > *bb) {
                            best = Some((b, fields.clone()));
                        }
                    }
                    body.rows.push(format!("{db},{label},{fields},{wall:.1}"));
                }
                Err(e) => body.failures.push(format!("snr_db={db} distribution={name}: {e}")),
            }
        }
        let fields = best.map(|(_, f)| f).unwrap_or_else(|| format!("{blocks},1,,,"));
        body.rows.push(format!("{db},{ENVELOPE},{fields},0.0"));
    }
    Ok(body)
}

/// Session outcomes made precision independent for archiving.
mod record {
    use super::*;

    pub struct Outcome {
        pub status: SessionStatus,
        pub transcript: SessionTranscript,
    }

    impl<F: Real> From<&SessionOutcome<F>> for Outcome {
        fn from(o: &SessionOutcome<F>) -> Self {
            Self { status: o.status, transcript: o.transcript.clone() }
        }
    }

    pub fn file_stem(snr_db: f64, distribution: &str, block: u64) -> String {
        format!("snr{snr_db}_{distribution}_b{block}")
    }

    /// Writes `<stem>.rrtx` and a `<stem>.conf` that `rrecon replay` accepts.
    pub fn archive(
        dir: &Path,
        echo: &[(String, String)],
        snr_db: f64,
        distribution: &str,
        block: u64,
        out: &Outcome,
    ) -> rateless_recon::Result<()> {
        let stem = file_stem(snr_db, distribution, block);
        let io = |e: std::io::Error| rateless_recon::Error::Transcript(format!("archive {stem}: {e}"));
        std::fs::write(dir.join(format!("{stem}.rrtx")), out.transcript.to_bytes()).map_err(io)?;
        let mut conf = format!("# replay config for block {block}, status {:?}\n", out.status);
        for (k, v) in echo {
            if !matches!(k.as_str(), "snr_db" | "blocks" | "distributions" | "archive" | "profile") {
                let _ = writeln!(conf, "{k} = {v}");
            }
        }
        let _ = writeln!(conf, "snr_db = {snr_db}\ndistribution = {distribution}\nblock = {block}");
        let _ = writeln!(conf, "transcript = {stem}.rrtx");
        std::fs::write(dir.join(format!("{stem}.conf")), conf).map_err(io)
    }
}

fn replay_cmd(cfg: &mut Config, seed: u64) -> Result<Body, CliError> {
    let db = cfg.get::<f64>("snr_db", None)?;
    if !(SUPPORTED_SNR_DB.0..=SUPPORTED_SNR_DB.1).contains(&db) {
        return Err(usage(format!("snr_db {db} outside the supported range")));
    }
    let name = cfg.get::<String>("distribution", None)?;
    let policy = distribution_policy(&name).map_err(usage)?;
    let block = cfg.get::<u64>("block", None)?;
    let prec = precision(cfg)?;
    let base = session_config(cfg, seed, true)?;
    let path: PathBuf = cfg.path("transcript")?.ok_or_else(|| usage("missing required key `transcript`"))?;
    cfg.finish()?;
    let bytes = std::fs::read(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let transcript = SessionTranscript::from_bytes(&bytes)?;
    let scfg = SessionConfig { distribution: policy, block, ..base };
    let snr = db_to_linear(db);
    let (status, n_used, attempts, crc, identical) = match prec {
        Precision::F64 => replay_check::<f64>(&transcript, snr, &scfg)?,
        Precision::F32 => replay_check::<f32>(&transcript, snr, &scfg)?,
    };
    let mut body = Body::default();
    body.rows.push(format!(
        "{block},{db},{name},{},{n_used},{attempts},{crc:016x},{identical}",
        if status == SessionStatus::Success { "success" } else { "abandoned" }
    ));
    if !identical {
        body.failures.push(format!("block {block}: replay differs from a fresh run of the same session"));
    }
    Ok(body)
}

/// Replays the transcript on regenerated data and compares it against a
/// fresh session with the same seeds.
fn replay_check<F: Real>(
    transcript: &SessionTranscript,
    snr: f64,
    cfg: &SessionConfig,
) -> Result<(SessionStatus, usize, usize, u64, bool), CliError> {
    let pair = block_data::<F>(snr, cfg, cfg.block)?;
    let rep = replay(transcript, &pair.x, snr, cfg)?;
    let fresh = run_block::<F>(snr, &SessionConfig { record_llrs: true, ..cfg.clone() }, cfg.block)?;
    let bits = |v: &[F]| v.iter().flat_map(|x| x.to_f64_lossy().to_bits().to_le_bytes()).collect::<Vec<u8>>();
    let replayed = bits(&rep.llrs);
    let identical = fresh.transcript == *transcript
        && fresh.status == rep.status
        && fresh.u == rep.u
        && fresh.n_used == rep.n_used
        && fresh.decode_attempts == rep.decode_attempts
        && fresh.llrs.as_deref().map(bits).as_deref() == Some(&replayed[..]);
    let crc = crc::Crc::<u64>::new(&crc::CRC_64_ECMA_182).checksum(&replayed);
    Ok((rep.status, rep.n_used, rep.decode_attempts, crc, identical))
}

fn channel_template(cfg: &mut Config) -> Result<ChannelParams, CliError> {
    let mut p = ChannelParams::reference(1.0, 0.0);
    p.alpha_db_per_km = cfg.get("alpha_db_per_km", Some(p.alpha_db_per_km))?;
    p.xi = cfg.get("xi", Some(p.xi))?;
    p.eta = cfg.get("eta", Some(p.eta))?;
    p.vel = cfg.get("vel", Some(p.vel))?;
    p.validate()?;
    Ok(p)
}

fn optimal_va_cmd(cfg: &mut Config) -> Result<Body, CliError> {
    let grid = cfg.grid("distance_km", crate::config::parse_grid("10:150:5").expect("static grid"))?;
    let beta = cfg.get::<f64>("beta", Some(0.956))?;
    let template = channel_template(cfg)?;
    cfg.finish()?;
    let rows: Vec<Result<String, String>> = grid
        .par_iter()
        .map(|&l| {
            let p = template.with_distance(l);
            let best = optimal_va(&p, beta).map_err(|e| format!("distance_km={l}: {e}"))?;
            let snr = channel_snr(&p.with_va(best.va)).map_err(|e| format!("distance_km={l}: {e}"))?;
            Ok(format!("{l},{},{},{}", best.va, linear_to_db(snr), best.key_rate))
        })
        .collect();
    Ok(split(rows))
}

fn split(rows: Vec<Result<String, String>>) -> Body {
    let mut body = Body::default();
    for r in rows {
        match r {
            Ok(row) => body.rows.push(row),
            Err(e) => body.failures.push(e),
        }
    }
    body
}

/// Efficiency as a function of SNR, linear in dB between `(snr_db, beta)`
/// knots and constant beyond the ends.
#[derive(Debug, Clone)]
struct Envelope(Vec<(f64, f64)>);

impl Envelope {
    fn parse(s: &str) -> Result<Self, String> {
        let mut knots = s
            .split(',')
            .map(|p| {
                let (a, b) = p.split_once(':').ok_or("knots are snr_db:beta")?;
                let a = a.trim().parse::<f64>().map_err(|e| e.to_string())?;
                let b = b.trim().parse::<f64>().map_err(|e| e.to_string())?;
                if !(b > 0.0 && b <= 1.0) {
                    return Err(format!("beta {b} outside (0, 1]"));
                }
                Ok((a, b))
            })
            .collect::<Result<Vec<_>, String>>()?;
        knots.sort_by(|x, y| x.0.total_cmp(&y.0));
        if knots.is_empty() {
            return Err("empty envelope".into());
        }
        Ok(Self(knots))
    }

    fn show(&self) -> String {
        self.0.iter().map(|(a, b)| format!("{a}:{b}")).collect::<Vec<_>>().join(",")
    }

    fn at(&self, snr_db: f64) -> f64 {
        let k = &self.0;
        let i = k.partition_point(|p| p.0 <= snr_db);
        if i == 0 {
            return k[0].1;
        }
        if i == k.len() {
            return k[i - 1].1;
        }
        let ((x0, y0), (x1, y1)) = (k[i - 1], k[i]);
        y0 + (y1 - y0) * (snr_db - x0) / (x1 - x0)
    }
}

#[derive(Debug, Clone, Copy)]
enum Beta {
    Const(f64),
    Envelope,
}

fn skr(cfg: &mut Config) -> Result<Body, CliError> {
    let grid = cfg.grid("distance_km", crate::config::parse_grid("10:150:2").expect("static grid"))?;
    let modes = cfg.list("va_mode", &["optimal", "fixed", "target_snr"])?;
    let va_fixed = cfg.get::<f64>("va", Some(4.0))?;
    // linear, not dB
    let target = cfg.get::<f64>("target_snr", Some(0.075))?;
    let modes = modes
        .iter()
        .map(|m| match m.as_str() {
            "optimal" => Ok(VaMode::Optimal),
            "fixed" => Ok(VaMode::Fixed(va_fixed)),
            "target_snr" if target > 0.0 => Ok(VaMode::TargetSnr(target)),
            "target_snr" => Err(usage("target_snr must be > 0")),
            other => Err(usage(format!("unknown va_mode `{other}`"))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let n_list = cfg.grid("n_total", vec![1e12])?;
    let betas = cfg.list("beta", &["0.956"])?;
    let betas = betas
        .iter()
        .map(|b| match b.as_str() {
            "envelope" => Ok(Beta::Envelope),
            v => v
                .parse::<f64>()
                .ok()
                .filter(|x| *x > 0.0 && *x <= 1.0)
                .map(Beta::Const)
                .ok_or_else(|| usage(format!("beta `{v}` is neither a value in (0, 1] nor `envelope`"))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let envelope = if betas.iter().any(|b| matches!(b, Beta::Envelope)) {
        Some(cfg.get_with("beta_envelope", None, Envelope::parse, Envelope::show)?)
    } else {
        None
    };
    let ratio = cfg.get::<f64>("n_ratio", Some(1.0))?;
    let params = channel_template(cfg)?;
    let mut template = KeyRateInputs::new(params, 0.95, 1.0);
    template.eps_pe = cfg.get("eps_pe", Some(template.eps_pe))?;
    template.eps_bar = cfg.get("eps_bar", Some(template.eps_bar))?;
    template.eps_pa = cfg.get("eps_pa", Some(template.eps_pa))?;
    template.rep_rate = cfg.get("rep_rate", Some(template.rep_rate))?;
    template.pe_model = cfg.get_with(
        "pe_model",
        Some(PeModel::WorstCase),
        |v| match v {
            "worst_case" => Ok(PeModel::WorstCase),
            "exact" => Ok(PeModel::Exact),
            _ => Err("expected worst_case or exact".into()),
        },
        |m| if *m == PeModel::Exact { "exact".into() } else { "worst_case".into() },
    )?;
    cfg.finish()?;
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(usage("n_ratio must lie in (0, 1]"));
    }

    let mut jobs = Vec::new();
    for &mode in &modes {
        for &n in &n_list {
            for &beta in &betas {
                jobs.push((mode, n, beta));
            }
        }
    }
    let rows: Vec<Vec<Result<String, String>>> = jobs
        .par_iter()
        .map(|&(mode, n, beta)| {
            let inputs = KeyRateInputs { n_total: n, n_key: n * ratio, ..template };
            let tag = |l: f64| format!("distance_km={l} va_mode={} N={n}", mode.label());
            match beta {
                Beta::Const(b) => match skr_vs_distance(&grid, &KeyRateInputs { beta: b, ..inputs }, mode) {
                    Ok(points) => points
                        .iter()
                        .map(|p| {
                            Ok(format!(
                                "{},{},{n},{b},{},{}",
                                p.distance_km,
                                mode.label(),
                                p.report.k_finite,
                                p.report.k_rate
                            ))
                        })
                        .collect(),
                    // fall back to per-point evaluation to name the failing rows
                    Err(_) => grid
                        .iter()
                        .map(|&l| {
                            skr_vs_distance(&[l], &KeyRateInputs { beta: b, ..inputs }, mode)
                                .map(|p| {
                                    let r = p[0].report;
                                    format!("{l},{},{n},{b},{},{}", mode.label(), r.k_finite, r.k_rate)
                                })
                                .map_err(|e| format!("{}: {e}", tag(l)))
                        })
                        .collect(),
                },
                Beta::Envelope => {
                    let env = envelope.as_ref().expect("parsed above");
                    grid.iter()
                        .map(|&l| {
                            envelope_point(&inputs, l, mode, env)
                                .map(|(b, k, rate)| format!("{l},{},{n},{b},{k},{rate}", mode.label()))
                                .map_err(|e| format!("{}: {e}", tag(l)))
                        })
                        .collect()
                }
            }
        })
        .collect();
    Ok(split(rows.into_iter().flatten().collect()))
}

/// Key rate with beta read off the envelope at the SNR of the chosen `V_A`.
/// In optimal mode `V_A` is searched with beta varying along with it.
fn envelope_point(
    inputs: &KeyRateInputs,
    distance_km: f64,
    mode: VaMode,
    env: &Envelope,
) -> rateless_recon::Result<(f64, f64, f64)> {
    let params = inputs.params.with_distance(distance_km);
    let at = |va: f64| -> rateless_recon::Result<(f64, f64, f64)> {
        let p = params.with_va(va);
        let beta = env.at(linear_to_db(channel_snr(&p)?));
        let r = finite_size_key_rate(&KeyRateInputs { params: p, beta, ..*inputs })?;
        Ok((beta, r.k_finite, r.k_rate))
    };
    let va = match mode {
        VaMode::Fixed(va) => va,
        VaMode::TargetSnr(snr) => va_for_snr(&params, snr),
        VaMode::Optimal => {
            maximize_log_scale(
                |va| at(va).map(|r| r.1).unwrap_or(f64::NEG_INFINITY),
                VA_RANGE.0,
                VA_RANGE.1,
                VA_REL_TOLERANCE,
            )
            .0
        }
    };
    at(va)
}

fn decode_bench(cfg: &mut Config, profile: Profile, seed: u64) -> Result<Body, CliError> {
    let grid = match profile {
        Profile::Desk => "-12:0:4",
        Profile::Paper => "-20:0:4",
    };
    let grid = snr_grid(cfg, crate::config::parse_grid(grid).expect("static grid"))?;
    let betas = cfg.grid("bench_beta", vec![0.9, 0.8, 0.7])?;
    if let Some(b) = betas.iter().find(|b| !(**b > 0.0 && **b < 1.0)) {
        return Err(usage(format!("bench_beta {b} outside (0, 1)")));
    }
    let early_exit = cfg.get::<bool>("early_exit", Some(true))?;
    let name = cfg.get::<String>("distribution", Some("adaptive".into()))?;
    let policy = distribution_policy(&name).map_err(usage)?;
    let prec = precision(cfg)?;
    let base = session_config(cfg, seed, false)?;
    cfg.finish()?;
    let decoder = DecoderConfig { max_iters: base.decoder.max_iters, early_exit };
    let mut body = Body::default();
    // sequential on purpose: rows are timings
    for &db in &grid {
        for &beta in &betas {
            let scfg = SessionConfig {
                distribution: policy.clone(),
                mode: SessionMode::SingleShot(beta),
                beta_min: beta / 1.01,
                record_llrs: true,
                ..base.clone()
            };
            let row = match prec {
                Precision::F64 => bench_row::<f64>(db, &scfg, decoder),
                Precision::F32 => bench_row::<f32>(db, &scfg, decoder),
            };
            match row {
                Ok(r) => body.rows.push(r),
                Err(e) => body.failures.push(format!("snr_db={db} bench_beta={beta}: {e}")),
            }
        }
    }
    Ok(body)
}

/// Times the decoder alone on Alice's LLRs of one single-shot session.
fn bench_row<F: Real>(db: f64, cfg: &SessionConfig, decoder: DecoderConfig) -> rateless_recon::Result<String> {
    let snr = db_to_linear(db);
    let out = run_block::<F>(snr, cfg, cfg.block)?;
    let llrs = out.llrs.as_deref().unwrap_or_default();
    let n = llrs.len();
    let dist: Arc<DegreeDistribution> = rateless_recon::session::select_distribution(snr, &cfg.distribution)?;
    let graph_seed = StreamKey::new(cfg.master_seed, cfg.block, StreamTag::LtGraph).derive_u64();
    let mut plan = RaptorBlockPlan::seeded(graph_seed, dist, cfg.precode.k_prime());
    plan.ensure(n)?;
    let t0 = Instant::now();
    let dec = bp_decode(llrs, &plan, &cfg.precode, decoder)?;
    let secs = t0.elapsed().as_secs_f64();
    let ok = dec.u_hat.as_deref() == Some(&out.bob_u[..]);
    let throughput = if ok { cfg.k() as f64 / secs.max(1e-9) } else { 0.0 };
    Ok(format!("{db},{n},{},{:.3},{throughput:.0}", dec.iters_used, secs * 1e3))
}
