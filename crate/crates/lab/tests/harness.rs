use std::fs;
use std::path::Path;
use std::process::Command;

use holderlab::io::{read_path_binary, read_path_csv, write_path_binary, write_path_csv};
use holderlab::report::REPORT_CSV_HEADER;
use holderlab::{emit_report, parse_report, run_experiment, Band, Experiment, ExperimentConfig, Format, Overrides};
use holderlab_core::fbm::sample_path;

/// A configuration small enough to run every experiment in a test.
fn small(e: Experiment) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(e, 7);
    match e {
        Experiment::SelfaffineCert => c.n = 5,
        Experiment::FbmLocaltime => {
            c.n = 8;
            c.compare_n = 6;
            c.resolution = 10;
            c.paths = 8;
        }
        Experiment::RestrictionDim => {
            c.resolution = 12;
            c.window = [4.0, 10.0];
            c.paths = 6;
        }
        Experiment::MolchanTail => {
            c.n = 10;
            c.paths = 200;
        }
        Experiment::GreedyWalk => {
            c.n = 10;
            c.paths = 2000;
            c.samples = 40;
            c.cap = 1 << 10;
            c.window = [4.0, 256.0];
        }
        Experiment::EnergyScaling => {
            c.n = 8;
            c.samples = 40;
        }
        Experiment::VariationOracle => {
            c.n = 8;
            c.paths = 20;
        }
    }
    c
}

fn schema(e: Experiment) -> &'static [(&'static str, &'static str)] {
    match e {
        Experiment::SelfaffineCert => &[("selfaffine-cert", "n,ell,max_count,bound,ratio,witness_q,literal_max")],
        Experiment::FbmLocaltime => {
            &[("fbm-localtime", "path,n,class_a_ratio,class_a_member,class_s_ratio,class_s_member")]
        }
        Experiment::RestrictionDim => {
            &[("restriction-dim", "path,slope,stderr"), ("restriction-dim-profile", "path,n,count")]
        }
        Experiment::MolchanTail => &[("molchan-tail", "x,below,probability")],
        Experiment::GreedyWalk => &[("greedy-walk", "n,survivors,probability"), ("greedy-walk-counts", "n,mean_count,stderr")],
        Experiment::EnergyScaling => &[("energy-scaling", "n,mean_energy,stderr,mean_mu_energy,max_rel_error")],
        Experiment::VariationOracle => &[("variation-oracle", "instance,points,beta,dp,exhaustive,rel_diff")],
    }
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn outputs_match_schema_and_ignore_thread_count() {
    for e in Experiment::ALL {
        let one = tempfile::tempdir().unwrap();
        let many = tempfile::tempdir().unwrap();
        let mut cfg = small(e);
        cfg.threads = Some(1);
        cfg.out = Some(one.path().to_path_buf());
        let a = run_experiment(&cfg).unwrap();
        cfg.threads = Some(4);
        cfg.out = Some(many.path().to_path_buf());
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(emit_report(&a, Format::Csv).unwrap(), emit_report(&b, Format::Csv).unwrap(), "{e}");
        assert_eq!(a.tables.len(), schema(e).len(), "{e}");
        for (name, header) in schema(e) {
            let file = format!("{name}.csv");
            let csv = read(one.path(), &file);
            assert_eq!(csv, read(many.path(), &file), "{e}/{name}");
            assert_eq!(csv.lines().next(), Some(*header), "{e}/{name}");
            assert!(csv.lines().count() > 1, "{e}/{name} is empty");
            let width = header.split(',').count();
            assert!(csv.lines().all(|l| l.split(',').count() == width), "{e}/{name}");
        }
        assert!(one.path().join(format!("{e}.json")).exists());
    }
}

#[test]
fn json_report_round_trips() {
    for e in Experiment::ALL {
        let r = run_experiment(&small(e)).unwrap();
        let json = emit_report(&r, Format::Json).unwrap();
        let back = parse_report(&json).unwrap();
        assert_eq!(emit_report(&back, Format::Json).unwrap(), json, "{e}");
        assert_eq!(back.aggregate, r.aggregate);
    }
}

#[test]
fn report_csv_lists_every_statistic() {
    let r = run_experiment(&small(Experiment::GreedyWalk)).unwrap();
    let csv = String::from_utf8(emit_report(&r, Format::Csv).unwrap()).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(REPORT_CSV_HEADER));
    let names: Vec<&str> = lines.map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(names, r.aggregate.keys().map(String::as_str).collect::<Vec<_>>());
}

#[test]
fn seeds_change_results() {
    let a = run_experiment(&small(Experiment::MolchanTail)).unwrap();
    let mut cfg = small(Experiment::MolchanTail);
    cfg.seed = 8;
    let b = run_experiment(&cfg).unwrap();
    assert_ne!(a.tables, b.tables);
}

#[test]
fn bands_from_config_file_override_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    fs::write(&path, r#"{"experiment":"variation-oracle","seed":3,"n":6,"bands":{"max_rel_diff":{"min":1.0}}}"#)
        .unwrap();
    let file = Overrides::from_file(&path).unwrap();
    let cfg = ExperimentConfig::resolve(Experiment::VariationOracle, &file, &Overrides::default()).unwrap();
    assert_eq!(cfg.seed, 3);
    assert_eq!(cfg.bands["max_rel_diff"], Band::at_least(1.0));
    assert!(!run_experiment(&cfg).unwrap().pass);
    assert!(ExperimentConfig::resolve(Experiment::MolchanTail, &file, &Overrides::default()).is_err());
}

#[test]
fn path_files_round_trip() {
    let p = sample_path(6, 0.4, 11).unwrap();
    let mut csv = Vec::new();
    write_path_csv(&p, &mut csv).unwrap();
    let back = read_path_csv(csv.as_slice()).unwrap();
    assert!(back.iter().zip(&p.values).all(|(a, b)| a.to_bits() == b.to_bits()));
    assert_eq!(back.len(), p.values.len());

    let mut bin = Vec::new();
    write_path_binary(&p.values, &mut bin).unwrap();
    assert_eq!(bin.len(), 8 * (p.values.len() + 1));
    assert_eq!(read_path_binary(bin.as_slice()).unwrap(), p.values);
    bin.push(0);
    assert!(read_path_binary(bin.as_slice()).is_err());
    assert!(read_path_csv("x,y\n".as_bytes()).is_err());
}

fn lab(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_lab")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

#[test]
fn cli_exit_codes() {
    let (code, stdout) = lab(&["selfaffine-cert", "--k", "2", "--m", "3", "--n", "6", "--seed", "1"]);
    assert_eq!(code, 0);
    assert!(stdout.starts_with(REPORT_CSV_HEADER));
    assert_eq!(lab(&["selfaffine-cert", "--n", "6"]).0, 2);
    assert_eq!(lab(&["no-such-experiment", "--seed", "1"]).0, 2);
    assert_eq!(lab(&["molchan-tail", "--seed", "1", "--alpha", "1.5"]).0, 2);

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("strict.json");
    fs::write(&cfg, r#"{"bands":{"max_rel_diff":{"min":1.0}}}"#).unwrap();
    let (code, _) = lab(&["variation-oracle", "--seed", "1", "--n", "6", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 1);

    let out = dir.path().join("run");
    let (code, _) = lab(&["variation-oracle", "--seed", "1", "--n", "6", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.join("variation-oracle.csv").exists() && out.join("variation-oracle.json").exists());
}

#[test]
fn zero_set_dimension_example() {
    let (code, stdout) =
        lab(&["restriction-dim", "--alpha", "0.5", "--set", "zero", "--paths", "50", "--n", "14", "--seed", "1"]);
    assert_eq!(code, 0, "{stdout}");
    let slope: f64 = stdout
        .lines()
        .find(|l| l.starts_with("mean_slope,"))
        .and_then(|l| l.split(',').nth(1))
        .unwrap()
        .parse()
        .unwrap();
    assert!((0.4..=0.6).contains(&slope), "{slope}");
}
