//! End-to-end checks of the command-line surface.

use std::fs;
use std::path::PathBuf;

use rbcd_cli::cli_main;

fn tmpdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("rbcd-cli-{name}-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn rbcd(args: &[&str]) -> i32 {
    cli_main(std::iter::once("rbcd").chain(args.iter().copied()))
}

#[test]
fn run_ct_discrepancy_writes_artifacts() {
    let dir = tmpdir("run-ct");
    let out = dir.join("ct");
    let code = rbcd(&[
        "run",
        "--problem", "ct",
        "--n", "16",
        "--angles", "12",
        "--noise", "0.01",
        "--noise-seed", "3",
        "--blocks", "4",
        "--mu", "0.18",
        "--tau", "1.1",
        "--stop", "dp",
        "--seed", "7",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(out.join("errors.csv").exists());
    assert!(out.join("meta.json").exists());
    assert!(out.join("recon.f64").exists());
    assert!(out.join("recon.pgm").exists());
    let csv = fs::read_to_string(out.join("errors.csv")).unwrap();
    assert!(csv.starts_with("k,residual,rel_sq_error\n"));
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("meta.json")).unwrap()).unwrap();
    assert_eq!(meta["stop_reason"], "discrepancy");
    assert_eq!(meta["rays_per_angle"], 23); // round(sqrt(2) * 16)
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn run_from_spec_file_reproduces_flag_run() {
    let dir = tmpdir("run-spec");
    let out1 = dir.join("a");
    let out2 = dir.join("b");
    let code = rbcd(&[
        "run",
        "--problem", "synthetic-dense",
        "--blocks", "3",
        "--block-dim", "5",
        "--data-dim", "12",
        "--problem-seed", "2",
        "--noise", "0.02",
        "--mu", "1.0",
        "--k-max", "200",
        "--seed", "11",
        "--out", out1.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    // Extract the spec from meta.json and re-run it through --spec.
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out1.join("meta.json")).unwrap()).unwrap();
    let spec_path = dir.join("spec.json");
    fs::write(&spec_path, format!("{:#}\n", meta["spec"])).unwrap();
    let code = rbcd(&[
        "run",
        "--spec", spec_path.to_str().unwrap(),
        "--out", out2.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert_eq!(
        fs::read(out1.join("errors.csv")).unwrap(),
        fs::read(out2.join("errors.csv")).unwrap()
    );
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn config_errors_exit_2() {
    // mu outside (0, 2).
    assert_eq!(
        rbcd(&["run", "--problem", "ct", "--n", "8", "--angles", "4", "--blocks", "2", "--mu", "2.5"]),
        2
    );
    // Block count not dividing the pixel count.
    assert_eq!(
        rbcd(&["run", "--problem", "ct", "--n", "8", "--angles", "4", "--blocks", "3", "--mu", "0.5"]),
        2
    );
    // Unknown flag is a usage error.
    assert_eq!(rbcd(&["run", "--no-such-flag"]), 2);
    // Missing step size.
    assert_eq!(rbcd(&["run", "--problem", "ct", "--n", "8", "--angles", "4", "--blocks", "2"]), 2);
}

#[test]
fn divergence_exits_3() {
    let dir = tmpdir("diverge");
    let code = rbcd(&[
        "run",
        "--problem", "synthetic-dense",
        "--blocks", "2",
        "--block-dim", "4",
        "--data-dim", "8",
        "--gamma", "1e280",
        "--k-max", "500",
        "--out", dir.join("x").to_str().unwrap(),
    ]);
    assert_eq!(code, 3);
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn metrics_on_identical_images() {
    let dir = tmpdir("metrics");
    let out = dir.join("p");
    assert_eq!(
        rbcd(&["make-phantom", "--n", "32", "--out", out.to_str().unwrap()]),
        0
    );
    let pgm = out.with_extension("pgm");
    // Identical inputs: psnr = inf sentinel, ssim = 1, rel_err = 0. The
    // process-level contract prints JSON; here we only check the exit code
    // and that the files loaded, then verify values through the library.
    assert_eq!(
        rbcd(&["metrics", "--ref", pgm.to_str().unwrap(), "--test", pgm.to_str().unwrap()]),
        0
    );
    let (img, maxval) = rbcd::io::read_pgm(&pgm).unwrap();
    assert_eq!(maxval, 255);
    assert!(rbcd::metrics::psnr(&img, &img, 255.0).unwrap().is_infinite());
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn sweep_blocks_writes_summary() {
    let dir = tmpdir("sweep");
    let code = rbcd(&[
        "sweep-blocks",
        "--problem", "ct",
        "--n", "16",
        "--angles", "24",
        "--mu", "1.99",
        "--target", "0.05",
        "--runs", "3",
        "--bs", "1,2,4",
        "--out", dir.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let csv = fs::read_to_string(dir.join("summary.csv")).unwrap();
    assert!(csv.starts_with("b,mean_iters,mean_seconds\n"));
    assert_eq!(csv.lines().count(), 4);
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn mc_writes_aggregates() {
    let dir = tmpdir("mc");
    let code = rbcd(&[
        "mc",
        "--problem", "synthetic-dense",
        "--blocks", "2",
        "--block-dim", "4",
        "--data-dim", "10",
        "--problem-seed", "1",
        "--mu", "1.0",
        "--k-max", "50",
        "--record-every", "1",
        "--runs", "5",
        "--master-seed", "3",
        "--out", dir.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let csv = fs::read_to_string(dir.join("mc.csv")).unwrap();
    assert!(csv.starts_with("k,mean_rel_sq_error,std,count\n"));
    assert_eq!(csv.lines().count(), 52); // header + k = 0..=50
    assert!(dir.join("mc-meta.json").exists());
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn make_video_writes_frames() {
    let dir = tmpdir("video");
    let out = dir.join("v");
    let code = rbcd(&[
        "make-video",
        "--frames", "4",
        "--rows", "16",
        "--cols", "16",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    for i in 0..4 {
        assert!(out.join(format!("frame_{i:03}.pgm")).exists());
    }
    let (dims, data) = rbcd::io::read_raw_f64(&out.join("video.f64")).unwrap();
    assert_eq!(dims, vec![4, 16, 16]);
    assert_eq!(data.len(), 4 * 256);
    fs::remove_dir_all(&dir).ok();
}
