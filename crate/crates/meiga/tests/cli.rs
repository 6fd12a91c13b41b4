use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use meiga::eventlog::{read_log, write_log_to, Entry};
use meiga::trace::{read_trace, write_trace, TraceReader};
use meiga_core::{Buttons, HidReport, PhysSample, PipelineConfig, Vec3};
use proptest::prelude::*;

fn meiga(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_meiga"))
        .args(args)
        .env_remove("MEIGA_CONFIG")
        .output()
        .expect("binary runs")
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SHORT_SCENARIO: &str =
    "seed = 3\nduration_s = 1.5\n[[blink]]\nstart_s = 0.3\nduration_s = 0.3\n";

#[test]
fn gen_then_replay_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("s.toml");
    let trace = dir.path().join("t.csv");
    let labels = dir.path().join("labels.log");
    let cfg = dir.path().join("default.cfg");
    let log = dir.path().join("e.log");
    std::fs::write(&spec, SHORT_SCENARIO).unwrap();
    std::fs::write(
        &cfg,
        meiga::config_file::render_config(&PipelineConfig::default()),
    )
    .unwrap();

    let out = meiga(&[
        "gen",
        s(&spec),
        "--seed",
        "9",
        "--out",
        s(&trace),
        "--labels",
        s(&labels),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let out = meiga(&["replay", s(&trace), "--config", s(&cfg), "--out", s(&log)]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let got = meiga::eventlog::events(&read_log(&log).unwrap());
    let clicks: Vec<_> = got.iter().filter(|e| e.kind.is_button()).collect();
    let want = meiga::eventlog::events(&read_log(&labels).unwrap());
    assert_eq!(clicks.len(), 1);
    assert_eq!(clicks[0].kind, want[0].kind);

    let out = meiga(&["report", s(&log)]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("left_click: 1"), "{text}");
    assert!(text.contains("click_latency_ms: mean 0.000"), "{text}");
}

#[test]
fn config_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "A = 2\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_meiga"))
        .args([
            "replay",
            s(&data("reference_trace.csv")),
            "--out",
            s(&dir.path().join("e.log")),
        ])
        .env("MEIGA_CONFIG", &bad)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("A must be in (0,1]"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("e.log");

    let out = meiga(&["replay", "/nonexistent/t.csv", "--out", s(&log)]);
    assert_eq!(out.status.code(), Some(2));

    let out = meiga(&[
        "replay",
        s(&data("reference_trace.csv")),
        "--out",
        s(&log),
        "--bogus",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));

    assert_eq!(meiga(&["--help"]).status.code(), Some(0));

    let short = dir.path().join("short.csv");
    std::fs::write(
        &short,
        "t_us,ax_g,ay_g,az_g,gx_dps,gy_dps,gz_dps,ir_norm\n0,0,0,1,0,0,0,0.5\n1000,0,0,1,0,0\n",
    )
    .unwrap();
    let out = meiga(&["replay", s(&short), "--out", s(&log)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains(":3:"));

    let overlap = dir.path().join("o.toml");
    std::fs::write(
        &overlap,
        "duration_s = 3.0\n[[blink]]\nstart_s = 0.5\nduration_s = 0.5\n[[blink]]\nstart_s = 0.7\nduration_s = 0.2\n",
    )
    .unwrap();
    let out = meiga(&["gen", s(&overlap), "--out", s(&dir.path().join("t.csv"))]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn raw_traces_replay_like_physical_ones() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("s.toml");
    let raw = dir.path().join("raw.csv");
    let log = dir.path().join("e.log");
    std::fs::write(&spec, SHORT_SCENARIO).unwrap();
    assert!(meiga(&["gen", s(&spec), "--raw", "--out", s(&raw)])
        .status
        .success());
    let head = std::fs::read_to_string(&raw).unwrap();
    assert!(head.starts_with("t_us,ax,ay,az,gx,gy,gz,ir\n"));
    assert!(meiga(&["replay", s(&raw), "--raw", "--out", s(&log)])
        .status
        .success());
    let clicks: Vec<_> = meiga::eventlog::events(&read_log(&log).unwrap())
        .into_iter()
        .filter(|e| e.kind.is_button())
        .collect();
    assert_eq!(clicks.len(), 1);
    // a raw trace is not a physical one
    assert_eq!(
        meiga(&["replay", s(&raw), "--out", s(&log)]).status.code(),
        Some(1)
    );
}

#[test]
fn selftest_prints_counts() {
    let out = meiga(&["selftest"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(
        text.contains("blink_agreement") && text.contains("10/10 ok"),
        "{text}"
    );
}

#[test]
fn report_payload_hex() {
    let r = HidReport {
        buttons: Buttons::LEFT,
        dx: 5,
        dy: 0,
        wheel: 0,
    };
    let mut buf = Vec::new();
    write_log_to(&mut buf, &[Entry::Report { t_us: 1, report: r }]).unwrap();
    assert!(String::from_utf8(buf)
        .unwrap()
        .contains("\"payload\":\"01 05 00 00\""));
}

fn sig9(v: f64) -> f64 {
    format!("{v:.8e}").parse().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn trace_round_trip(seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut t = 0u64;
        let samples: Vec<PhysSample> = (0..1000)
            .map(|_| {
                t += rng.gen_range(1..5000);
                let mut v = || rng.gen_range(-1e3..1e3) * 10f64.powi(rng.gen_range(-6..2));
                PhysSample { t_us: t, accel: Vec3::new(v(), v(), v()), gyro: Vec3::new(v(), v(), v()), ir: v() }
            })
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_trace(&path, &samples).unwrap();
        let back = read_trace(&path).unwrap();
        prop_assert_eq!(back.len(), samples.len());
        for (a, b) in samples.iter().zip(&back) {
            prop_assert_eq!(a.t_us, b.t_us);
            for (x, y) in a.accel.as_array().into_iter().chain(a.gyro.as_array()).chain([a.ir])
                .zip(b.accel.as_array().into_iter().chain(b.gyro.as_array()).chain([b.ir]))
            {
                prop_assert_eq!(sig9(x), y);
                prop_assert!((x - y).abs() <= 5e-9 * x.abs());
            }
        }
        // a second write of what was read is byte-identical
        let again = dir.path().join("u.csv");
        write_trace(&again, &back).unwrap();
        prop_assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&again).unwrap());
        let streamed: Vec<PhysSample> = TraceReader::phys(std::fs::File::open(&path).unwrap(), "t")
            .unwrap()
            .collect::<Result<_, _>>()
            .unwrap();
        prop_assert_eq!(streamed, back);
    }
}
