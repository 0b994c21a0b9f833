use std::sync::Arc;

use rateless_recon::channel::{channel_key, db_to_linear, simulate_gaussian_pair};
use rateless_recon::keyrate::capacity;
use rateless_recon::raptor::{check_code, Precode};
use rateless_recon::session::*;
use rateless_recon::Error;

fn small_config(seed: u64) -> SessionConfig {
    let mut cfg = SessionConfig::new(Arc::new(Precode::peg(990, 1000, 3, 3).unwrap()));
    cfg.master_seed = seed;
    cfg
}

fn reference_config() -> SessionConfig {
    SessionConfig::new(Arc::new(Precode::reference(1).unwrap()))
}

#[test]
fn noiseless_surrogate_succeeds_first_time() {
    let mut cfg = reference_config();
    cfg.distribution = DistributionPolicy::omega(4).unwrap();
    cfg.initial_symbols = Some(12_000);
    // high enough for confident LLRs, low enough that n_val exceeds k'
    let snr = 3.0;
    let pair = simulate_gaussian_pair::<f64>(20_000, snr, channel_key(1, 0)).unwrap();
    let out = run_reconciliation(&pair.y, &pair.y, snr, &cfg).unwrap();
    assert_eq!(out.status, SessionStatus::Success);
    assert_eq!(out.decode_attempts, 1);
    assert_eq!(out.n_used, 12_000);
    assert_eq!(out.u.as_deref(), Some(&out.bob_u[..]));
    let tag = out.transcript.messages().iter().find_map(|m| match m {
        Message::CheckCode { tag } => Some(*tag),
        _ => None,
    });
    assert_eq!(tag, Some(check_code(&out.bob_u, 64).unwrap()));
}

#[test]
fn unreachable_beta_min_abandons() {
    let mut cfg = reference_config();
    cfg.distribution = DistributionPolicy::omega(4).unwrap();
    cfg.beta_min = 0.999;
    let budget = n_val(1.0, 0.999, 9900, 8).unwrap();
    let pair = simulate_gaussian_pair::<f64>(budget, 1.0, channel_key(2, 0)).unwrap();
    let out = run_reconciliation(&pair.x, &pair.y, 1.0, &cfg).unwrap();
    assert_eq!(out.status, SessionStatus::Abandoned);
    assert!(out.n_used <= budget && out.n_used % 8 == 0);
    assert!(out.u.is_none() && out.efficiency.is_none());
    assert!(matches!(out.transcript.messages().last(), Some(Message::Abandon { .. })));
}

#[test]
fn success_implies_identical_keys_and_accounting() {
    let snr = db_to_linear(-2.0);
    let cfg = small_config(5);
    for block in 0..6 {
        let budget = n_val(snr, cfg.beta_min, cfg.k(), cfg.d).unwrap();
        let pair = simulate_gaussian_pair::<f64>(budget, snr, channel_key(5, block)).unwrap();
        let out = run_reconciliation(&pair.x, &pair.y, snr, &SessionConfig { block, ..cfg.clone() }).unwrap();
        assert!(out.n_used <= budget && out.n_used % cfg.d == 0);
        if out.is_success() {
            assert_eq!(out.u.as_ref().unwrap(), &out.bob_u);
            let beta = out.efficiency.unwrap();
            assert!(beta <= 1.0);
            let k_back = beta * capacity(snr).unwrap() * out.n_used as f64;
            assert!((k_back - cfg.k() as f64).abs() < 1e-6);
        }
    }
}

#[test]
fn replay_reproduces_alice_exactly() {
    let snr = db_to_linear(-3.0);
    let mut cfg = small_config(9);
    cfg.record_llrs = true;
    let budget = n_val(snr, cfg.beta_min, cfg.k(), cfg.d).unwrap();
    let pair = simulate_gaussian_pair::<f64>(budget, snr, channel_key(9, 0)).unwrap();
    let out = run_reconciliation(&pair.x, &pair.y, snr, &cfg).unwrap();
    let archived = SessionTranscript::from_bytes(&out.transcript.to_bytes()).unwrap();
    assert_eq!(archived, out.transcript);

    let re = replay(&archived, &pair.x, snr, &cfg).unwrap();
    let llrs = out.llrs.unwrap();
    assert_eq!(re.llrs.len(), llrs.len());
    assert!(re.llrs.iter().zip(&llrs).all(|(a, b)| a.to_bits() == b.to_bits()));
    assert_eq!(re.status, out.status);
    assert_eq!(re.u, out.u);
    assert_eq!(re.n_used, out.n_used);
    assert_eq!(re.decode_attempts, out.decode_attempts);

    // Alice's messages are checked against her recomputation
    let mut forged = SessionTranscript::new();
    for m in archived.messages() {
        forged.push(match m {
            Message::Request { total_symbols } => Message::Request { total_symbols: total_symbols + 8 },
            other => other.clone(),
        });
    }
    assert!(matches!(replay(&forged, &pair.x, snr, &cfg), Err(Error::Transcript(_))));
}

#[test]
fn transcript_discloses_no_key_material() {
    let snr = db_to_linear(-3.0);
    let cfg = small_config(10);
    let budget = n_val(snr, cfg.beta_min, cfg.k(), cfg.d).unwrap();
    let pair = simulate_gaussian_pair::<f64>(budget, snr, channel_key(10, 0)).unwrap();
    let out = run_reconciliation(&pair.x, &pair.y, snr, &cfg).unwrap();
    for m in out.transcript.messages() {
        match m {
            Message::Header { .. } | Message::CheckCode { .. } => {}
            Message::Request { total_symbols } => assert_eq!(total_symbols % 8, 0),
            Message::Mappings { coefficients, .. } => {
                for a in coefficients.chunks(8) {
                    let n: f64 = a.iter().map(|v| v * v).sum();
                    assert!((n - 1.0).abs() < 1e-12);
                }
            }
            Message::Stop { .. } | Message::Abandon { .. } => {}
        }
    }
}

#[test]
fn short_data_is_an_error() {
    let cfg = small_config(1);
    let snr = db_to_linear(-3.0);
    let pair = simulate_gaussian_pair::<f64>(800, snr, channel_key(1, 0)).unwrap();
    assert!(matches!(run_reconciliation(&pair.x, &pair.y, snr, &cfg), Err(Error::DataExhausted { .. })));
    assert!(matches!(run_reconciliation(&pair.x[..8], &pair.y[..16], snr, &cfg), Err(Error::LengthMismatch { .. })));
    assert!(run_reconciliation(&pair.x[..7], &pair.y[..7], snr, &cfg).is_err());
    let bad = SessionConfig { beta_min: 1.0, ..cfg.clone() };
    assert!(run_reconciliation(&pair.x, &pair.y, snr, &bad).is_err());
}

#[test]
fn adaptive_policy_rejects_out_of_range_snr() {
    let cfg = small_config(1);
    let snr = db_to_linear(3.0);
    let pair = simulate_gaussian_pair::<f64>(4096, snr, channel_key(1, 0)).unwrap();
    assert!(matches!(run_reconciliation(&pair.x, &pair.y, snr, &cfg), Err(Error::UnsupportedSnr { .. })));
}

#[test]
fn single_shot_uses_one_decode() {
    let snr = db_to_linear(-2.0);
    let mut cfg = small_config(12);
    cfg.mode = SessionMode::SingleShot(0.6);
    cfg.beta_min = 0.5;
    let pair = simulate_gaussian_pair::<f64>(20_000, snr, channel_key(12, 0)).unwrap();
    let out = run_reconciliation(&pair.x, &pair.y, snr, &cfg).unwrap();
    assert_eq!(out.decode_attempts, 1);
    assert_eq!(out.n_used, initial_request(snr, &cfg).unwrap());
    assert!(out.is_success());
    let requests = out.transcript.messages().iter().filter(|m| matches!(m, Message::Request { .. })).count();
    assert_eq!(requests, 1);
}

#[test]
fn efficiency_is_independent_of_thread_count() {
    let cfg = small_config(21);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| measure_efficiency_db::<f64>(-4.0, &cfg, 6).unwrap())
    };
    let (a, b) = (run(1), run(3));
    assert_eq!(a, b);
    assert_eq!(a.per_block.iter().map(|b| b.block).collect::<Vec<_>>(), (0..6).collect::<Vec<_>>());
    assert!(a.beta.unwrap() <= 1.0);
}

#[test]
fn mean_symbols_do_not_grow_with_snr() {
    let cfg = small_config(31);
    let mut prev = f64::INFINITY;
    for db in [-8.0, -6.0, -4.0, -2.0, 0.0] {
        let r = measure_efficiency_db::<f64>(db, &cfg, 8).unwrap();
        let n = r.mean_n.expect("some block succeeds");
        // 5% Monte Carlo slack
        assert!(n <= prev * 1.05, "{db} dB: {n} after {prev}");
        prev = n;
    }
}

#[test]
fn runs_in_single_precision() {
    let snr = db_to_linear(-3.0);
    let cfg = small_config(40);
    let budget = n_val(snr, cfg.beta_min, cfg.k(), cfg.d).unwrap();
    let pair = simulate_gaussian_pair::<f32>(budget, snr as f32, channel_key(40, 0)).unwrap();
    let out = run_reconciliation(&pair.x, &pair.y, snr, &cfg).unwrap();
    assert!(out.is_success());
    assert_eq!(out.u.unwrap(), out.bob_u);
}
