use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn adarl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adarl"))
        .args(args)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

const SMALL_ADAQL: &str = "[experiment]\nepisodes = 150\nreps = 2\n[env]\ntype = \"oil\"\n[agent]\ntype = \"adaql\"\nbonus_scale = 0.01\n";

#[test]
fn one_episode_one_record() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "r.toml",
        "[experiment]\nhorizon = 1\nepisodes = 1\nreps = 1\n[env]\ntype = \"ambulance\"\n[agent]\ntype = \"random\"\n",
    );
    let out_dir = tmp.path().join("out");
    let out = adarl(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read_to_string(out_dir.join("metrics.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "algo,env,rep,episode,ep_reward,cum_reward,step_time_ns,nodes"
    );
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("random,ambulance-beta-k1-a0.25,0,1,"));
}

#[test]
fn invalid_configs_exit_with_2() {
    let tmp = TempDir::new().unwrap();
    let bad = [
        "[experiment]\nreps = 0\n[env]\ntype = \"oil\"\n[agent]\ntype = \"adaql\"\n",
        "[env]\ntype = \"oil\"\ncolour = 3\n[agent]\ntype = \"adaql\"\n",
        "[env]\ntype = \"volcano\"\n[agent]\ntype = \"adaql\"\n",
        "[env]\ntype = \"oil\"\n[agent]\ntype = \"eps_ql\"\nepsilon = 0.0\n",
        "[env]\ntype = \"oil\"\n[agent]\ntype = \"adaql\"\ndelta = 1.5\n",
        "not toml at all = = =",
    ];
    for (i, body) in bad.iter().enumerate() {
        let cfg = write_config(tmp.path(), &format!("bad{i}.toml"), body);
        let out = adarl(&[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            tmp.path().to_str().unwrap(),
        ]);
        assert_eq!(
            out.status.code(),
            Some(2),
            "case {i}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let cfg = write_config(tmp.path(), "ok.toml", SMALL_ADAQL);
    let out = adarl(&[
        "tune",
        "--config",
        cfg.to_str().unwrap(),
        "--grid",
        "0.1,abc",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn filesystem_failures_exit_with_3() {
    let tmp = TempDir::new().unwrap();
    let missing = tmp.path().join("nope.toml");
    let out = adarl(&["run", "--config", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));

    let cfg = write_config(tmp.path(), "ok.toml", SMALL_ADAQL);
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let under_file = blocker.join("out");
    let out = adarl(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        under_file.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let out = adarl(&["report", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "mb.toml",
        "[experiment]\nepisodes = 120\nreps = 3\nbase_seed = 17\n[env]\ntype = \"oil\"\ntransition = \"coupled\"\n[agent]\ntype = \"adamb\"\nbonus_scale = 0.05\n",
    );
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let dir = tmp.path().join(run);
        let out = adarl(&[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(&dir)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (
                    e.file_name().to_string_lossy().into_owned(),
                    fs::read(e.path()).unwrap(),
                )
            })
            .collect();
        files.sort();
        outputs.push(files);
    }
    assert_eq!(outputs[0].len(), 4);
    assert_eq!(outputs[0], outputs[1]);

    let seeded = tmp.path().join("c");
    adarl(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "18",
        "--out",
        seeded.to_str().unwrap(),
    ]);
    assert_ne!(
        fs::read(seeded.join("metrics.csv")).unwrap(),
        outputs[0][0].1
    );
}

#[test]
fn tune_single_value_and_split_suppression() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "t.toml", SMALL_ADAQL);
    let tsv = tmp.path().join("single.tsv");
    let out = adarl(&[
        "tune",
        "--config",
        cfg.to_str().unwrap(),
        "--grid",
        "0.3",
        "--reps",
        "2",
        "--out",
        tsv.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("best bonus_scale = 0.3"));
    let table = fs::read_to_string(&tsv).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next(), Some("bonus_scale\tmean\tstderr"));
    assert_eq!(lines.count(), 1);

    let cfg = write_config(
        tmp.path(),
        "split.toml",
        "[experiment]\nepisodes = 400\n[env]\ntype = \"oil\"\n[agent]\ntype = \"adaql\"\nbonus_scale = 0.001\n\
         [tune]\nparam = \"split_scale\"\ngrid = [10.0, 0.1]\nreps = 3\n",
    );
    let out = adarl(&[
        "tune",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        tmp.path().join("s.tsv").to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(
        stdout(&out).contains("best split_scale = 0.1"),
        "{}",
        stdout(&out)
    );
}

#[test]
fn report_pairs_adaptive_with_uniform() {
    let tmp = TempDir::new().unwrap();
    let mut metrics = Vec::new();
    for agent in ["adaql", "eps_ql"] {
        let cfg = write_config(
            tmp.path(),
            &format!("{agent}.toml"),
            &format!("[experiment]\nepisodes = 200\nreps = 3\n[env]\ntype = \"oil\"\n[agent]\ntype = \"{agent}\"\nbonus_scale = 0.01\n"),
        );
        let dir = tmp.path().join(agent);
        assert!(adarl(&[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            dir.to_str().unwrap()
        ])
        .status
        .success());
        metrics.push(dir.join("metrics.csv").to_string_lossy().into_owned());
    }
    let out = adarl(&["report", &metrics[0], &metrics[1]]);
    assert!(out.status.success());
    let text = stdout(&out);
    let rows: Vec<Vec<&str>> = text.lines().map(|l| l.split('\t').collect()).collect();
    assert_eq!(
        rows[0].join(","),
        "env,algo,reps,final_cum_reward,stderr,step_time_ns,nodes,size_ratio"
    );
    let adaql = rows.iter().find(|r| r[1] == "adaql").unwrap();
    let eps = rows.iter().find(|r| r[1] == "eps_ql").unwrap();
    assert_eq!(adaql[2], "3");
    let ratio: f64 = adaql[7].parse().unwrap();
    let want = adaql[6].parse::<f64>().unwrap() / eps[6].parse::<f64>().unwrap();
    assert!((ratio - want).abs() < 1e-4, "{ratio} vs {want}");
}

#[test]
fn oracle_writes_tables() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "o.toml",
        "[experiment]\nhorizon = 2\n[env]\ntype = \"ambulance\"\nalpha = 1.0\n[agent]\ntype = \"stable\"\n",
    );
    let bin = tmp.path().join("dp.bin");
    let out = adarl(&[
        "oracle",
        "--config",
        cfg.to_str().unwrap(),
        "--resolution",
        "16",
        "--out",
        bin.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    // staying put is optimal at alpha = 1; the grid only loses the half-cell offset of the start
    let value: f64 = stdout(&out)
        .lines()
        .next()
        .unwrap()
        .trim_start_matches("V*_1(start) = ")
        .parse()
        .unwrap();
    assert!((2.0 - 2.0 / 16.0..=2.0).contains(&value), "{value}");
    let bytes = fs::read(&bin).unwrap();
    let header: Vec<u32> = bytes[..16]
        .chunks(4)
        .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    assert_eq!(header, vec![2, 16, 1, 1]);
    assert_eq!(bytes.len(), 16 + 8 * 2 * (16 + 16 * 16));
}
