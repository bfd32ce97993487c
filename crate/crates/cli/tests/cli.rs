use std::process::{Command, Output};

fn pimsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pimsim")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn config_errors_exit_nonzero() {
    let out = pimsim(&["simulate", "--snr-db-step", "0"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("snr_db_step"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "m = 3\n").unwrap();
    let out = pimsim(&["simulate", "--config", bad.to_str().unwrap()]);
    assert!(!out.status.success());

    let missing = dir.path().join("nope.toml");
    let out = pimsim(&["theory", "--config", missing.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.toml"));
}

#[test]
fn flags_override_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "m = 8\nsnr_db_start = 0.0\nsnr_db_stop = 10.0\n").unwrap();
    let out = pimsim(&["theory", "--config", cfg.to_str().unwrap(), "--m", "16", "--snr-db-start", "-5"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("# config.m = 16"));
    assert!(text.lines().any(|l| l.starts_with("-5,")));
}

#[test]
fn bench_and_simulate_write_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sm.csv");
    let status = pimsim(&[
        "bench", "--scheme", "sm", "--nt", "4", "--modulation", "qam", "--m", "16", "--snr-db-stop", "10",
        "--max-bits", "20000", "--out", out.to_str().unwrap(),
    ]);
    assert!(status.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("# config.scheme = \"sm\""));
    assert!(text.contains("snr_db,ber,bit_errors,bits,abep"));

    assert!(!pimsim(&["bench", "--scheme", "gpim"]).status.success());

    let noiseless = pimsim(&["simulate", "--scheme", "gpim", "--noiseless", "--max-bits", "2000", "--snr-db-stop", "5"]);
    let text = stdout(&noiseless);
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.split(',').nth(1) == Some("0")));
}

#[test]
fn pulses_subcommands() {
    let dump = stdout(&pimsim(&["pulses", "dump"]));
    let lines: Vec<&str> = dump.lines().collect();
    assert_eq!(lines[0], "t,psi0,psi1,psi2,psi3");
    assert_eq!(lines.len(), 1 + 127);
    let center: Vec<f64> = lines[64].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(center[0], 0.0);
    assert!((center[1] - 2f64.powf(0.25)).abs() < 1e-12);

    let spectra = stdout(&pimsim(&["pulses", "spectrum", "--fft-size", "1024"]));
    assert!(spectra.contains("freq_hz,psi0_db,psi1_db,psi2_db,psi3_db,srrc_db"));
    assert_eq!(spectra.lines().filter(|l| !l.starts_with('#')).count(), 1 + 1025);
}

#[test]
fn modem_map_prints_the_frame() {
    let text = stdout(&pimsim(&["modem", "map", "--bits", "0100", "--k", "2", "--m", "2"]));
    assert!(text.contains("pulses = [0, 2]"));
    assert!(!pimsim(&["modem", "map", "--bits", "01x0"]).status.success());
    assert!(!pimsim(&["modem", "map", "--bits", "010"]).status.success());
}
