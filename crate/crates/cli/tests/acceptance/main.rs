//! Acceptance run. Prints one `PASS`/`FAIL`/`SKIP` line per criterion and
//! exits with status 1 if any criterion fails.
//!
//! `RRECON_PROFILE=paper` (or `-- --profile paper`) enables the multi-hour
//! extended efficiency point; `RRECON_CRITERIA=1,6,7` runs a subset.

#[path = "../../../core/tests/support/mod.rs"]
mod support;

use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use rand_distr::StandardNormal;
use rateless_recon::channel::{biawgn_sample, channel_snr, db_to_linear, linear_to_db, ChannelParams};
use rateless_recon::keyrate::*;
use rateless_recon::multidim::*;
use rateless_recon::raptor::*;
use rateless_recon::rng::{StreamKey, StreamTag};
use rateless_recon::session::*;

enum Verdict {
    Pass,
    Fail,
    Skip,
}

struct Check {
    verdict: Verdict,
    detail: String,
}

fn judge(ok: bool, detail: String) -> Check {
    Check { verdict: if ok { Verdict::Pass } else { Verdict::Fail }, detail }
}

fn skip(detail: &str) -> Check {
    Check { verdict: Verdict::Skip, detail: detail.into() }
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let paper = std::env::var("RRECON_PROFILE").is_ok_and(|v| v == "paper")
        || args.windows(2).any(|w| w[0] == "--profile" && w[1] == "paper")
        || args.iter().any(|a| a == "--profile=paper");
    let only: Option<Vec<usize>> = std::env::var("RRECON_CRITERIA")
        .ok()
        .map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect());

    let criteria: [(&str, Box<dyn Fn() -> Check>); 10] = [
        ("codec oracle", Box::new(codec_oracle)),
        ("mapping contract", Box::new(mapping_contract)),
        ("uniformity", Box::new(uniformity)),
        ("desk-scale efficiency", Box::new(desk_efficiency)),
        ("extended-profile efficiency", Box::new(move || if paper { extended_efficiency() } else { skip("needs --profile paper") })),
        ("formula fidelity", Box::new(formula_fidelity)),
        ("key-rate reproduction", Box::new(key_rate_reproduction)),
        ("optimal-V_A properties", Box::new(optimal_va_properties)),
        ("determinism and replay", Box::new(determinism_and_replay)),
        ("Holevo cross-check", Box::new(holevo_cross_check)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = i + 1;
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let t0 = Instant::now();
        let c = run();
        let tag = match c.verdict {
            Verdict::Pass => "PASS",
            Verdict::Fail => {
                failed += 1;
                "FAIL"
            }
            Verdict::Skip => "SKIP",
        };
        println!("criterion {id:>2} {tag} {name} ({:.1} s): {}", t0.elapsed().as_secs_f64(), c.detail);
    }
    println!("{failed} criterion(s) failed");
    std::process::exit(i32::from(failed > 0));
}

fn codec_oracle() -> Check {
    let t0 = Instant::now();
    let precode = Precode::identity(4);
    let sets: Vec<Vec<u32>> = vec![vec![0], vec![1], vec![2], vec![3], vec![0], vec![0, 1], vec![1, 2], vec![2, 3]];
    let plan = RaptorBlockPlan::fixed(4, sets.clone()).unwrap();
    let cfg = DecoderConfig { max_iters: 8, early_exit: false };
    let mut rng = StreamKey::new(0xACC1, 0, StreamTag::Aux).rng();
    let mut mismatches = 0;
    for trial in 0..1000u64 {
        let u: Vec<u8> = (0..4).map(|_| rng.gen::<u8>() & 1).collect();
        let bits = lt_encode(&u, &mut plan.clone(), 0, sets.len()).unwrap();
        let y: Vec<f64> = biawgn_sample(&bits, 1.0, StreamKey::new(0xACC1, trial, StreamTag::BiawgnNoise)).unwrap();
        let llrs = channel_llr(&y, 1.0);
        let (map_bits, _) = support::bitwise_map(4, &sets, &llrs);
        let mut dec = RaptorDecoder::<f64>::new(&precode);
        dec.push_symbols(&llrs, plan.index_sets()).unwrap();
        dec.run(cfg);
        mismatches += usize::from(dec.hard_decisions() != &map_bits[..]);
    }
    let secs = t0.elapsed().as_secs_f64();
    judge(mismatches == 0 && secs < 10.0, format!("{mismatches} mismatches in 1000 trials, {secs:.2} s"))
}

fn mapping_contract() -> Check {
    let t0 = Instant::now();
    let (mut worst_map, mut worst_orth, mut roundtrip_failures) = (0.0f64, 0.0f64, 0usize);
    for d in SUPPORTED_DIMS {
        let basis = AlgebraBasis::<f64>::new(d).unwrap();
        let mut rng = StreamKey::new(0xACC2, d as u64, StreamTag::Aux).rng();
        let mut transcript = SessionTranscript::new();
        let mut published = Vec::new();
        for _ in 0..10_000 {
            let raw: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            let y = normalize(&raw).unwrap();
            let b: Vec<u8> = (0..d).map(|_| rng.gen::<u8>() & 1).collect();
            let c = to_spherical::<f64>(&b).unwrap();
            let m = make_mapping(&y, &c, &basis).unwrap();
            let my = m.apply(y.coords()).unwrap();
            worst_map = worst_map.max(my.iter().zip(c.coords()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt());
            let a = m.matrix();
            for i in 0..d {
                for j in 0..d {
                    let dot: f64 = (0..d).map(|r| a[r * d + i] * a[r * d + j]).sum();
                    worst_orth = worst_orth.max((dot - f64::from(u8::from(i == j))).abs());
                }
            }
            roundtrip_failures += usize::from(c.bits() != b || to_spherical::<f64>(&c.bits()).unwrap() != c);
            published.push(m);
        }
        // coefficients travel through the transcript encoding
        transcript.push(Message::Mappings {
            first_chunk: 0,
            coefficients: published.iter().flat_map(|m| m.coefficients().to_vec()).collect(),
        });
        let back = SessionTranscript::from_bytes(&transcript.to_bytes()).unwrap();
        let Message::Mappings { coefficients: values, .. } = &back.messages()[0] else { unreachable!() };
        for (m, chunk) in published.iter().zip(values.chunks_exact(d)) {
            let rebuilt = MappingFunction::from_coefficients(chunk.to_vec(), &basis).unwrap();
            roundtrip_failures += usize::from(&rebuilt != m);
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    judge(
        worst_map < 1e-10 && worst_orth < 1e-10 && roundtrip_failures == 0 && secs < 5.0,
        format!(
            "max |My'-c'| {worst_map:.1e}, max |M^T M - I| {worst_orth:.1e}, {roundtrip_failures} round-trip failures, {secs:.2} s"
        ),
    )
}

fn uniformity() -> Check {
    let p = Precode::reference(1).unwrap();
    let mut worst = (1.0f64, String::new());
    for which in 1..=4 {
        let mut rng = StreamKey::new(0xACC3, which as u64, StreamTag::Message).rng();
        let u: Vec<u8> = (0..p.k()).map(|_| rng.gen::<u8>() & 1).collect();
        let v = p.encode(&u).unwrap();
        let mut plan =
            RaptorBlockPlan::seeded(0xACC3 + which as u64, Arc::new(DegreeDistribution::omega(which).unwrap()), p.k_prime());
        let bits = lt_encode(&v, &mut plan, 0, 100_000).unwrap();
        let ones = bits.iter().filter(|&&b| b == 1).count() as u64;
        let p_bits = support::chi_square_p_value(support::pearson_uniform(&[100_000 - ones, ones]), 1.0);
        let mut bytes = vec![0u64; 256];
        for w in bits.chunks_exact(8) {
            bytes[w.iter().fold(0usize, |a, &b| (a << 1) | b as usize)] += 1;
        }
        let p_bytes = support::chi_square_p_value(support::pearson_uniform(&bytes), 255.0);
        for (label, pv) in [("bits", p_bits), ("bytes", p_bytes)] {
            if pv < worst.0 {
                worst = (pv, format!("omega{which} {label}"));
            }
        }
    }
    judge(worst.0 > 1e-3, format!("smallest p-value {:.3} ({}) over omega1..4", worst.0, worst.1))
}

fn efficiency_point(db: f64, which: usize, blocks: usize, seed: u64) -> EfficiencyReport {
    let mut cfg = SessionConfig::new(Arc::new(Precode::reference(1).unwrap()));
    cfg.distribution = DistributionPolicy::omega(which).unwrap();
    cfg.master_seed = seed;
    measure_efficiency_db::<f64>(db, &cfg, blocks).unwrap()
}

fn desk_efficiency() -> Check {
    let t0 = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for (db, which, fer_max) in [(0.0, 4, Some(0.2)), (-4.0, 4, None), (-12.0, 2, None)] {
        let r = efficiency_point(db, which, 20, 0xACC4);
        let beta = r.beta.unwrap_or(0.0);
        ok &= beta >= 0.90 && fer_max.map_or(true, |m| r.fer <= m);
        parts.push(format!("{db} dB omega{which}: beta {beta:.4} fer {:.2}", r.fer));
    }
    let mins = t0.elapsed().as_secs_f64() / 60.0;
    ok &= mins <= 30.0;
    judge(ok, format!("{} ({mins:.1} min)", parts.join("; ")))
}

fn extended_efficiency() -> Check {
    let r = efficiency_point(-20.0, 1, 20, 0xACC5);
    let beta = r.beta.unwrap_or(0.0);
    judge(beta >= 0.95, format!("-20 dB omega1, 20 blocks: beta {beta:.4} fer {:.2}", r.fer))
}

fn formula_fidelity() -> Check {
    // independent evaluations: natural-log forms rather than log2
    let c = |g: f64| 0.5 * g.ln_1p() / std::f64::consts::LN_2;
    let close = |a: f64, b: f64| (a - b).abs() < 1e-9;
    let mut fails = Vec::new();
    let mut expect = |name: &str, got: f64, want: f64| {
        if !close(got, want) {
            fails.push(format!("{name}: {got} vs {want}"));
        }
    };
    expect("capacity(0)", capacity(0.0f64).unwrap(), 0.0);
    expect("capacity(1)", capacity(1.0).unwrap(), 0.5);
    expect("capacity(0.01)", capacity(0.01).unwrap(), c(0.01));
    expect("realized_rate(9900, 20625)", realized_rate(9900, 20625.0).unwrap(), 0.48);
    expect("realized_rate(k, k)", realized_rate(9900, 9900.0).unwrap(), 1.0);
    expect("realized_rate(9900, 1407400)", realized_rate(9900, 1_407_400.0).unwrap(), 9900.0 / 1_407_400.0);
    expect("efficiency(0.48, 1)", efficiency(0.48, 1.0).unwrap(), 0.96);
    expect("efficiency(C, g)", efficiency(c(0.3), 0.3).unwrap(), 1.0);
    expect("efficiency(0.007034, 0.01)", efficiency(0.007034, 0.01).unwrap(), 0.007034 / c(0.01));
    expect("n_val(1, 0.5)", n_val(1.0, 0.5, 9900, 1).unwrap() as f64, 39600.0);
    expect("n_val(1, 0.99)", n_val(1.0, 0.99, 9900, 1).unwrap() as f64, 20000.0);
    expect("n_val(0.01, 0.95)", n_val(0.01, 0.95, 9900, 1).unwrap() as f64, (9900.0 / (0.95 * c(0.01))).floor());
    // the approximate figures quoted next to the examples, reported only
    let quoted = format!(
        "quoted approximations: C(0.01) {:.8} vs 0.0071775, n_val {:.0} vs 1451900, efficiency {:.4} vs 0.980",
        c(0.01),
        9900.0 / (0.95 * c(0.01)),
        0.007034 / c(0.01)
    );
    let detail = if fails.is_empty() { format!("12 exact values within 1e-9; {quoted}") } else { fails.join("; ") };
    judge(fails.is_empty(), detail)
}

fn reference(l: f64) -> ChannelParams<f64> {
    ChannelParams::reference(1.0, l)
}

fn optimal_finite(l: f64, beta: f64, n: f64) -> KeyRateReport<f64> {
    let inputs = KeyRateInputs::new(reference(l), beta, n);
    let o = optimal_va_finite(&inputs).unwrap();
    finite_size_key_rate(&KeyRateInputs { params: inputs.params.with_va(o.va), ..inputs }).unwrap()
}

fn key_rate_reproduction() -> Check {
    let r32 = optimal_finite(32.0, 0.956, 1e12).k_rate;
    let r130 = optimal_finite(130.0, 0.98, 1e12).k_rate;
    let k132 = optimal_finite(132.0, 0.98, 1e12).k_finite;
    // distance at which the optimal variance puts the link at -20 dB
    let snr_at = |l: f64| {
        let p = reference(l);
        linear_to_db(channel_snr(&p.with_va(optimal_va(&p, 0.98).unwrap().va)).unwrap())
    };
    let (mut lo, mut hi) = (60.0, 160.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if snr_at(mid) > -20.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let l20 = 0.5 * (lo + hi);
    assert!(hi - lo < 1e-6 && lo > 60.0 && hi < 160.0, "no -20 dB crossing in 60..160 km");
    let k_short = optimal_finite(l20, 0.98, 1e10).k_finite;
    let ok = (r32 / 3.0e5 - 1.0).abs() <= 0.25
        && (r130 / 2.5e3 - 1.0).abs() <= 0.30
        && k_short <= 0.0
        && (k132 / 5e-4 - 1.0).abs() <= 0.30;
    judge(
        ok,
        format!(
            "32 km {:.0} kbit/s; 130 km {:.2} kbit/s; N=1e10 at -20 dB ({l20:.2} km) K {k_short:.2e}; 132 km K {k132:.2e}",
            r32 / 1e3,
            r130 / 1e3
        ),
    )
}

fn optimal_va_properties() -> Check {
    let beta = 0.956;
    let grid: Vec<f64> = (1..=13).map(|i| 10.0 * i as f64).collect();
    let (mut dominance, mut worst_grid) = (true, 0.0f64);
    for &l in &grid {
        let p = reference(l);
        let o = optimal_va(&p, beta).unwrap();
        for f in [0.95, 1.05] {
            dominance &= asymptotic_key_rate(&p.with_va(o.va * f), beta).unwrap() <= o.key_rate;
        }
        let (a, b) = (0.01f64.ln(), 100f64.ln());
        let brute = (0..1000)
            .map(|i| (a + (b - a) * i as f64 / 999.0).exp())
            .map(|va| (va, asymptotic_key_rate(&p.with_va(va), beta).unwrap()))
            .fold((0.0, f64::NEG_INFINITY), |x, y| if y.1 > x.1 { y } else { x });
        worst_grid = worst_grid.max((brute.0 - o.va).abs() / o.va);
    }
    let va = |l: f64| optimal_va(&reference(l), beta).unwrap().va;
    let plateau = (va(60.0) - va(100.0)).abs() / va(60.0);
    judge(
        dominance && plateau < 0.10 && worst_grid < 0.005,
        format!(
            "+-5% dominance {}; V_A* {:.3} at 60 km, {:.3} at 100 km (change {:.1}%); grid agreement {:.2}%",
            if dominance { "holds" } else { "violated" },
            va(60.0),
            va(100.0),
            100.0 * plateau,
            100.0 * worst_grid
        ),
    )
}

fn determinism_and_replay() -> Check {
    let mut cfg = SessionConfig::new(Arc::new(Precode::reference(1).unwrap()));
    cfg.master_seed = 0xACC9;
    cfg.record_llrs = true;
    let snr = db_to_linear(-2.0);
    let mut mismatched = 0;
    let sessions = 4;
    for block in 0..sessions {
        let bcfg = SessionConfig { block, ..cfg.clone() };
        let pair = block_data::<f64>(snr, &bcfg, block).unwrap();
        let live = run_reconciliation(&pair.x, &pair.y, snr, &bcfg).unwrap();
        let stored = SessionTranscript::from_bytes(&live.transcript.to_bytes()).unwrap();
        let rep = replay(&stored, &pair.x, snr, &bcfg).unwrap();
        let same_llrs = live.llrs.as_ref().is_some_and(|l| {
            l.len() == rep.llrs.len() && l.iter().zip(&rep.llrs).all(|(a, b)| a.to_bits() == b.to_bits())
        });
        let same = same_llrs
            && rep.status == live.status
            && rep.u == live.u
            && rep.n_used == live.n_used
            && rep.decode_attempts == live.decode_attempts;
        mismatched += usize::from(!same);
    }
    let csv = csv_reproduction();
    judge(
        mismatched == 0 && csv.is_ok(),
        format!(
            "{mismatched} of {sessions} replays differ; CSV reruns: {}",
            csv.unwrap_or_else(|e| format!("differ ({e})"))
        ),
    )
}

/// Runs each subcommand twice, the second time from the first CSV's echoed
/// header with another worker count, and compares outside timing columns.
fn csv_reproduction() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let small = ["--set", "k=990", "--set", "k_prime=1000"];
    let runs: [(&str, Vec<&str>, &[&str]); 4] = [
        ("efficiency", vec!["--set", "snr_db=-6:0:3", "--set", "blocks=4", "--set", "distributions=omega2,omega4,adaptive"], &["wall_ms"]),
        ("optimal-va", vec![], &[]),
        ("skr", vec!["--set", "n_total=1e10,1e12"], &[]),
        ("decode-bench", vec!["--set", "snr_db=-8,0"], &["decode_ms", "throughput_bits_per_sec"]),
    ];
    for (cmd, extra, timing) in runs {
        let first = dir.path().join(format!("{cmd}.csv"));
        let mut args = vec![cmd, "--seed", "77", "--workers", "1", "--out", first.to_str().unwrap()];
        if cmd == "efficiency" || cmd == "decode-bench" {
            args.extend(small);
        }
        args.extend(extra);
        run_cli(&args)?;
        let second = dir.path().join(format!("{cmd}-rerun.csv"));
        run_cli(&[cmd, "--config", first.to_str().unwrap(), "--workers", "3", "--out", second.to_str().unwrap()])?;
        let read = |p: &std::path::Path| std::fs::read_to_string(p).map_err(|e| e.to_string());
        if strip(&read(&first)?, timing) != strip(&read(&second)?, timing) {
            return Err(format!("{cmd} output changed"));
        }
    }
    Ok("byte-identical outside timing columns for all four subcommands".into())
}

fn run_cli(args: &[&str]) -> Result<(), String> {
    let o = Command::new(env!("CARGO_BIN_EXE_rrecon"))
        .args(args)
        .env_remove("RRECON_WORKERS")
        .output()
        .map_err(|e| e.to_string())?;
    if o.status.success() {
        Ok(())
    } else {
        Err(format!("rrecon {}: {}", args[0], String::from_utf8_lossy(&o.stderr).trim()))
    }
}

fn strip(csv: &str, timing: &[&str]) -> String {
    let mut header: Vec<&str> = Vec::new();
    csv.lines()
        .map(|line| {
            if line.starts_with('#') {
                return line.to_string();
            }
            let cols: Vec<&str> = line.split(',').collect();
            if header.is_empty() {
                header = cols.clone();
            }
            cols.iter().zip(&header).filter(|(_, h)| !timing.contains(h)).map(|(c, _)| *c).collect::<Vec<_>>().join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn holevo_cross_check() -> Check {
    let grid = [
        (1.0, 5.0, 0.01, 0.6, 0.015),
        (4.0, 25.0, 0.01, 0.6, 0.015),
        (7.0, 32.0, 0.01, 0.6, 0.015),
        (4.5, 60.0, 0.02, 0.5, 0.05),
        (10.0, 80.0, 0.005, 0.7, 0.01),
        (4.1, 100.0, 0.01, 0.6, 0.015),
        (20.0, 10.0, 0.03, 0.9, 0.1),
        (0.5, 130.0, 0.01, 0.6, 0.015),
        (60.0, 45.0, 0.0, 0.8, 0.0),
        (2.0, 0.0, 0.05, 0.3, 0.2),
    ];
    let worst = grid
        .iter()
        .map(|&(va, l, xi, eta, vel)| {
            let p = ChannelParams { va, distance_km: l, alpha_db_per_km: 0.2, xi, eta, vel };
            (holevo_bound(&p).unwrap() - support::holevo_oracle(va, p.transmittance(), xi, eta, vel)).abs()
        })
        .fold(0.0f64, f64::max);
    judge(worst < 1e-6, format!("max deviation {worst:.2e} bits/pulse over 10 points"))
}
