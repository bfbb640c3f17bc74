use std::path::Path;
use std::process::{Command, Output};

use optbench::experiments;
use optbench::{ConfigFile, Experiment, Overrides, Preset, Settings};

fn optbench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_optbench")).args(args).output().expect("spawn optbench")
}

fn settings(exp: Experiment, config: &str, o: Overrides) -> Settings {
    Settings::resolve(exp, ConfigFile::parse(config).unwrap(), o).unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

fn header(dir: &Path, name: &str) -> String {
    read(dir, name).lines().next().unwrap().to_string()
}

type GoldenCase<'a> = (&'a str, &'a [&'a str], &'a [(&'a str, &'a str)]);

#[test]
fn golden_headers() {
    let tmp = tempfile::tempdir().unwrap();
    let cases: &[GoldenCase] = &[
        (
            "verify-conditions",
            &["--n", "20", "--trials", "3"],
            &[
                ("conditions.csv", "trial,i,H0,H1,H2,bound0,bound1,bound2,violated"),
                ("conditions_max.csv", "i,max_margin0,max_margin1,max_margin2"),
            ],
        ),
        (
            "delta-ratio",
            &["--n", "20", "--trials", "3"],
            &[("ratio.csv", "trial,n,delta,expected_delta,ratio"), ("ratio_envelope.csv", "k,min,mean,max")],
        ),
        (
            "histograms",
            &["--n", "100", "--trials", "50"],
            &[
                ("histogram.csv", "quantity,i,bin_left,bin_right,count"),
                ("histogram_summary.csv", "quantity,i,mean,stderr,min,max,bins"),
            ],
        ),
        (
            "matfac",
            &["--n", "20", "--trials", "2", "--preset", "desk"],
            &[
                ("trace.csv", "algo,seed,iter,grad_evals,f,grad_norm_y,grad_norm_xbar"),
                ("trace_mean.csv", "algo,iter,grad_evals,mean_f,min_f,max_f"),
            ],
        ),
        (
            "smooth-rate",
            &["--n", "50", "--trials", "4"],
            &[
                ("smooth_rate.csv", "k,mean_min_grad_sq,stderr,bound,holds"),
                ("trace.csv", "algo,seed,iter,grad_evals,f,grad_norm_y,grad_norm_xbar"),
            ],
        ),
        ("run", &["--n", "10"], &[("trace.csv", "algo,seed,iter,grad_evals,f,grad_norm_y,grad_norm_xbar")]),
    ];
    for (exp, flags, files) in cases {
        let dir = tmp.path().join(exp);
        let mut args = vec![*exp, "--out-dir", dir.to_str().unwrap()];
        args.extend_from_slice(flags);
        let out = optbench(&args);
        assert!(out.status.success(), "{exp}: {}", String::from_utf8_lossy(&out.stderr));
        for (file, want) in *files {
            assert_eq!(header(&dir, file), *want, "{exp}/{file}");
        }
        assert_eq!(header(&dir, "summary.csv"), "key,value");
        for (file, _) in *files {
            let text = read(&dir, file);
            assert!(!text.contains('\r'));
            assert!(text.ends_with('\n'));
        }
    }
}

#[test]
fn identical_config_gives_identical_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.toml");
    std::fs::write(&cfg, "n = 200\ntrials = 4\nseed = 9\npreset = \"desk\"\n").unwrap();
    for exp in ["matfac", "delta-ratio", "verify-conditions"] {
        let a = tmp.path().join(format!("{exp}-a"));
        let b = tmp.path().join(format!("{exp}-b"));
        for dir in [&a, &b] {
            let out = optbench(&[exp, "--config", cfg.to_str().unwrap(), "--out-dir", dir.to_str().unwrap()]);
            assert!(out.status.success());
        }
        for entry in std::fs::read_dir(&a).unwrap() {
            let name = entry.unwrap().file_name();
            assert_eq!(std::fs::read(a.join(&name)).unwrap(), std::fs::read(b.join(&name)).unwrap(), "{exp}");
        }
    }
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("o");
    let od = out_dir.to_str().unwrap();

    let bad_key = tmp.path().join("bad_key.toml");
    std::fs::write(&bad_key, "n = 5\nlearning_rate = 0.1\n").unwrap();
    let out = optbench(&["run", "--config", bad_key.to_str().unwrap(), "--out-dir", od]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("learning_rate"));

    let bad_opt = tmp.path().join("bad_opt.toml");
    std::fs::write(&bad_opt, "optimizer = \"adam\"\n").unwrap();
    let out = optbench(&["run", "--config", bad_opt.to_str().unwrap(), "--out-dir", od]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("optimizer") && err.contains("adam"), "{err}");

    let diverge = tmp.path().join("diverge.toml");
    std::fs::write(&diverge, "optimizer = \"gd\"\ngamma = 1e200\nn = 10\n").unwrap();
    let out = optbench(&["run", "--config", diverge.to_str().unwrap(), "--out-dir", od]);
    assert_eq!(out.status.code(), Some(3));

    let out = optbench(&["run", "--config", tmp.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));

    let blocker = tmp.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let out = optbench(&["run", "--n", "5", "--out-dir", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));

    let out = optbench(&["smooth-rate", "--n", "5", "--out-dir", od, "--preset", "large"]);
    assert_eq!(out.status.code(), Some(2));
    let out = optbench(&["delta-ratio", "--trials", "1", "--out-dir", od]);
    assert_eq!(out.status.code(), Some(2));

    let mf = tmp.path().join("mf.toml");
    std::fs::write(&mf, "problem = \"matfac\"\nd = 6\nr = 2\n").unwrap();
    let out = optbench(&["smooth-rate", "--config", mf.to_str().unwrap(), "--out-dir", od]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn single_jump_conditions() {
    let s = settings(Experiment::VerifyConditions, "", Overrides { n: Some(1), trials: Some(1), ..Default::default() });
    let out = experiments::verify_conditions(&s).unwrap();
    let t = out.table("conditions.csv").unwrap();
    let rows = t.records();
    assert_eq!(rows.len(), 1);
    let v: Vec<f64> = rows[0][2..8].iter().map(|x| x.parse().unwrap()).collect();
    assert_eq!([v[0] - v[3], v[1] - v[4], v[2] - v[5]], [0.0, -4.0, 0.0]);
    assert_eq!(rows[0][8], "false");
}

#[test]
fn single_jump_ratios_are_one() {
    let s = settings(Experiment::DeltaRatio, "", Overrides { n: Some(1), trials: Some(10), ..Default::default() });
    let out = experiments::delta_ratio(&s).unwrap();
    let t = out.table("ratio.csv").unwrap();
    assert!(t.column_f64("ratio").iter().all(|&r| r == 1.0));
}

#[test]
fn ratio_column_is_consistent() {
    let s = settings(Experiment::DeltaRatio, "", Overrides { n: Some(300), trials: Some(20), ..Default::default() });
    let out = experiments::delta_ratio(&s).unwrap();
    let t = out.table("ratio.csv").unwrap();
    let (d, e, r) = (t.column_f64("delta"), t.column_f64("expected_delta"), t.column_f64("ratio"));
    for k in 0..d.len() {
        assert!((d[k] / e[k] - r[k]).abs() <= 1e-15 * r[k]);
    }
    let env = out.table("ratio_envelope.csv").unwrap();
    assert_eq!(env.len(), 300);
    assert!((env.column_f64("mean")[0] - 1.0).abs() <= 1e-14);
}

#[test]
fn histogram_defaults() {
    let s = settings(Experiment::Histograms, "", Overrides::default());
    let out = experiments::histograms(&s).unwrap();
    let t = out.table("histogram.csv").unwrap();
    let rows = t.records();
    for kind in ["H0", "H1", "H2"] {
        for i in ["2", "10", "100"] {
            let bins: Vec<&Vec<String>> = rows.iter().filter(|r| r[0] == kind && r[1] == i).collect();
            let total: u64 = bins.iter().map(|r| r[4].parse::<u64>().unwrap()).sum();
            assert_eq!(total, 10_000, "{kind} i={i}");
            if i == "100" {
                assert!(bins.len() >= 20, "{kind}: {} bins", bins.len());
            }
        }
    }
    let stats = out.table("histogram_summary.csv").unwrap().records();
    let h0_2 = stats.iter().find(|r| r[0] == "H0" && r[1] == "2").unwrap();
    let (mean, se): (f64, f64) = (h0_2[2].parse().unwrap(), h0_2[3].parse().unwrap());
    assert!(mean.abs() <= 4.0 * se);
}

#[test]
fn matfac_traces() {
    let s = settings(
        Experiment::Matfac,
        "",
        Overrides { n: Some(100), trials: Some(3), preset: Some(Preset::Desk), ..Default::default() },
    );
    let out = experiments::matfac(&s).unwrap();
    let t = out.table("trace.csv").unwrap();
    assert_eq!(t.len(), 2 * 3 * 100);
    assert!(t.column_f64("f").iter().all(|&f| f > 0.0));
    assert_eq!(out.summary.get("gd_monotone"), Some("true"));
    assert_eq!(out.summary.get("d"), Some("60"));
    assert_eq!(out.summary.get("r"), Some("15"));
}

#[test]
fn run_trace_accounting() {
    let s = settings(Experiment::Run, "eval_schedule = \"every\"", Overrides { n: Some(10), ..Default::default() });
    let out = experiments::run(&s).unwrap();
    let t = out.table("trace.csv").unwrap();
    assert_eq!(t.len(), 10);
    let evals = t.column_f64("grad_evals");
    assert_eq!(evals.last().copied(), out.summary.get_f64("grad_evals"));
    assert_eq!(out.summary.get("grad_evals"), Some("20"));

    for opt in ["gd", "nce", "restarted-nm"] {
        let s = settings(
            Experiment::Run,
            &format!("optimizer = \"{opt}\""),
            Overrides { n: Some(25), ..Default::default() },
        );
        let out = experiments::run(&s).unwrap();
        let t = out.table("trace.csv").unwrap();
        assert_eq!(t.column_f64("grad_evals").last().copied(), out.summary.get_f64("grad_evals"), "{opt}");
        assert_eq!(t.records()[0][0], opt);
    }
}

#[test]
fn smooth_rate_first_point() {
    let s = settings(Experiment::SmoothRate, "", Overrides { n: Some(50), trials: Some(5), ..Default::default() });
    let out = experiments::smooth_rate(&s).unwrap();
    let t = out.table("smooth_rate.csv").unwrap();
    let rows = t.records();
    assert_eq!(rows[0][0], "1");
    // at k = 1 the minimum is |grad f(x0)|^2 = |x0|^2 = 10 and the bound is 4 f(x0) / gamma = 20
    assert!((rows[0][1].parse::<f64>().unwrap() - 10.0).abs() <= 1e-13);
    assert_eq!(rows[0][3].parse::<f64>().unwrap(), 20.0);
    let gamma_too_big = ConfigFile::parse("gamma = 2.0").unwrap();
    let s = Settings::resolve(Experiment::SmoothRate, gamma_too_big, Overrides::default()).unwrap();
    assert!(matches!(experiments::smooth_rate(&s), Err(optbench::CliError::Config(_))));
}
