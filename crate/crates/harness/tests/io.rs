use surfns::checkpoint::{decode, encode, load_checkpoint, CheckpointError};
use surfns::config::{CheckKind, Config};
use surfns::output::{read_records, records_to_string};
use surfns::runner::{build_model, execute, initial_state, integrate, RunOptions};
use surfns::scenarios::run_scenario;
use surfns::HarnessError;

const BASE: &str = "
name = restart
spectral.degree = 6
forcing.tag = f4-
forcing.point = 0, 0, 1
init.kind = random
init.norm_k = 0.5
init.norm_nk = 0.5
time.dt = 1e-3
time.stride = 5
seed = 13
";

fn config(extra: &str) -> Config {
    Config::parse(&format!("{BASE}{extra}")).unwrap()
}

#[test]
fn restart_from_checkpoint_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let first = config("time.t_end = 0.05\n");
    execute(&first, &RunOptions { threads: None, out_dir: Some(dir.path().into()) }).unwrap();

    let ckpt = dir.path().join("restart.ckpt");
    let head: String = BASE.lines().filter(|l| !l.starts_with("init.")).map(|l| format!("{l}\n")).collect();
    let resumed_cfg = Config::parse(&format!(
        "{head}init.kind = checkpoint\ninit.path = {}\ntime.t_end = 0.06\n",
        ckpt.display()
    ))
    .unwrap();
    let model = build_model(&resumed_cfg).unwrap();
    let resumed = integrate(&resumed_cfg, &model, initial_state(&resumed_cfg, 0).unwrap()).unwrap();
    assert_eq!(resumed.final_state.step, 60);

    let straight_cfg = config("time.t_end = 0.06\n");
    let straight = integrate(&straight_cfg, &model, initial_state(&straight_cfg, straight_cfg.seed).unwrap()).unwrap();
    let a: Vec<u64> = resumed.final_state.state.coeffs.iter().map(|x| x.to_bits()).collect();
    let b: Vec<u64> = straight.final_state.state.coeffs.iter().map(|x| x.to_bits()).collect();
    assert_eq!(a, b);
    assert_eq!(resumed.final_state.state.time.to_bits(), straight.final_state.state.time.to_bits());
    assert_eq!(
        resumed.final_state.ledger_residual().to_bits(),
        straight.final_state.ledger_residual().to_bits()
    );
}

#[test]
fn adaptive_stepping_reaches_t_end() {
    let cfg = config("time.t_end = 0.1\ntime.cfl = 0.002\n");
    let exec = execute(&cfg, &RunOptions::default()).unwrap();
    let last = exec.output.records.last().unwrap();
    assert!((last.t - 0.1).abs() < 1e-12);
    assert!(exec.output.final_state.step > 100, "CFL bound never engaged");
    assert!(last.energy_residual.abs() < 1e-6);
}

#[test]
fn checkpoint_corruption_is_detected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("time.t_end = 0.01\n");
    execute(&cfg, &RunOptions { threads: None, out_dir: Some(dir.path().into()) }).unwrap();
    let bytes = std::fs::read(dir.path().join("restart.ckpt")).unwrap();
    let ck = decode(&bytes).unwrap();
    assert_eq!(encode(&ck), bytes);

    for cut in [bytes.len() - 1, bytes.len() / 2, 20] {
        assert!(matches!(decode(&bytes[..cut]), Err(CheckpointError::Corrupt(_))), "cut at {cut}");
    }
    let mut flipped = bytes.clone();
    flipped[60] ^= 0x01;
    assert!(matches!(decode(&flipped), Err(CheckpointError::Corrupt(_))));
    let mut version = bytes.clone();
    version[4] = 9;
    assert!(matches!(decode(&version), Err(CheckpointError::Version { found: 9 })));
    assert!(matches!(decode(b"ABCD0000"), Err(CheckpointError::BadMagic)));
    assert!(matches!(
        load_checkpoint(&dir.path().join("absent.ckpt")),
        Err(CheckpointError::Io(_))
    ));
}

#[test]
fn csv_output_round_trips_exactly() {
    let cfg = config("time.t_end = 0.02\n");
    let exec = execute(&cfg, &RunOptions::default()).unwrap();
    let text = records_to_string(&exec.output.records);
    assert_eq!(read_records(&text).unwrap(), exec.output.records);
    let header = text.lines().next().unwrap();
    assert_eq!(
        header,
        "t,norm_u,norm_uK,norm_uNK,energy,dissipation,work,energy_residual,lambda,alpha_1,alpha_2,alpha_3"
    );
}

#[test]
fn config_errors_name_the_key_and_line() {
    let cases = [
        ("name = a\nname = b\n", "name", "duplicate"),
        ("name = a\nspectral.degree = zero\n", "spectral.degree", ""),
        ("name = a\nforcing.tag = f9\n", "forcing.tag", ""),
        ("name = a\ncheck.lambda_affine = 1\n", "check.lambda_affine", "pair.gaps"),
        ("name = a\ncheck.ensemble_constant = 1\n", "check.ensemble_constant", "ensemble.members"),
        ("name = a\nensemble.members = 1\n", "ensemble.members", ""),
        ("name = a\nnu.formula = linear_x3\nnu.base = 1\nnu.slope = 2\n", "nu", ""),
        ("name = a\njust some words\n", "", "line 2"),
        ("name = a\ntime.cfl = 0\n", "time.cfl", "positive"),
    ];
    for (text, key, fragment) in cases {
        let err = Config::parse(text).expect_err(text).to_string();
        assert!(err.contains(key), "{text:?}: {err}");
        assert!(err.contains(fragment), "{text:?}: {err}");
    }
}

#[test]
fn canonical_text_is_order_independent() {
    let a = Config::parse("name = x\ntime.dt = 1e-3\nseed = 4\n").unwrap();
    let b = Config::parse("# comment\nseed = 4\n\ntime.dt = 1e-3\nname = x\n").unwrap();
    assert_eq!(a.canonical_text(), b.canonical_text());
    let mut c = b.clone();
    c.set_seed(5);
    assert_ne!(a.canonical_text(), c.canonical_text());
}

#[test]
fn every_check_kind_has_a_unique_name() {
    let mut names: Vec<_> = CheckKind::ALL.iter().map(|k| k.name()).collect();
    for n in &names {
        assert_eq!(CheckKind::from_name(n).map(|k| k.name()), Some(*n));
    }
    names.sort();
    names.dedup();
    assert_eq!(names.len(), CheckKind::ALL.len());
}

#[test]
fn run_scenario_accepts_names_and_paths() {
    let report = run_scenario("constant_killing_growth", &RunOptions::default()).unwrap();
    assert!(report.passed, "{}", report.summary());
    assert_eq!(report.exit_code(), 0);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.cfg");
    std::fs::write(&path, format!("{BASE}time.t_end = 0.01\ncheck.uk_nonincreasing = 1e-10\n")).unwrap();
    let report = run_scenario(path.to_str().unwrap(), &RunOptions::default()).unwrap();
    assert!(report.passed);
    assert!(matches!(
        run_scenario("missing_scenario", &RunOptions::default()),
        Err(HarnessError::UnknownScenario(_))
    ));
}
