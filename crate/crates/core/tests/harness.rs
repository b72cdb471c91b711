use std::path::Path;

use singint::harness::{self, ExperimentConfig, VERSION};

fn config(text: &str) -> ExperimentConfig {
    ExperimentConfig::parse(text, "inline", Path::new(".")).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

const SWEEP: &str = "\
[curve]
kind = segment
start = -1,0
end = 1,0
nodes = 201
[operator]
meshes = 128,256,512
[sweep]
p = 2
lambda = 0.25,0.75
";

#[test]
fn sweep_separates_the_strip_on_small_meshes() {
    let report = harness::run_boundary_sweep(&config(SWEEP)).unwrap();
    let rows = rows(&report.csv);
    assert_eq!(rows.len(), 2);
    assert_eq!(&rows[0][..6], ["2", "0.25", "true", "true", "finite", "bounded"]);
    assert_eq!(&rows[1][..6], ["2", "0.75", "false", "false", "diverging", "blowup"]);
    assert_eq!(rows[0].len(), 9);
}

#[test]
fn headers_carry_version_hash_and_grid() {
    let cfg = config(SWEEP);
    let report = harness::run_apcheck(&cfg).unwrap();
    let text = report.render();
    assert!(text.starts_with(&format!("# singint {VERSION} apcheck\n")));
    assert!(text.contains(&format!("sha256={}", cfg.hash)));
    assert!(text.lines().any(|l| l.starts_with("# grid t_random=16 r_per_octave=3")));
    assert!(text.lines().any(|l| l.starts_with("# per_scale_maxima ")));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let cfg = config(SWEEP).with_seed(5);
    for run in [harness::run_apcheck, harness::run_hdcheck, harness::run_norm, harness::run_stability_probe] {
        assert_eq!(run(&cfg).unwrap().render(), run(&cfg).unwrap().render());
    }
}

#[test]
fn indices_agree_on_a_composite_weight() {
    let cfg = config(
        "[curve]\nkind = circle\ncenter = 0,0\nradius = 1\nnodes = 256\n\
         [weight]\nfactor anchor=1,0 kind=power gamma=0.3\n\
         factor anchor=-1,0 kind=oscillating gamma=-0.2 amp=0.1 freq=1\n",
    );
    let report = harness::run_indices(&cfg).unwrap();
    assert!(!report.nonconvergence);
    let rows = rows(&report.csv);
    assert_eq!(rows.len(), 2);
    for row in rows {
        assert_eq!(row[7], "true", "{row:?}");
        assert_eq!(row[8], "true", "{row:?}");
    }
}

#[test]
fn stability_reports_the_affine_closure() {
    let cfg = config(
        "[curve]\nkind = segment\nstart = -1,0\nend = 1,0\nnodes = 201\n\
         [exponent]\nconstant 2\n[weight]\nfactor anchor=0,0 kind=power gamma=0.25\n\
         [stability]\nepsilon = -0.5,0,1.5\n",
    );
    let report = harness::run_stability_probe(&cfg).unwrap();
    assert!(report.header.iter().any(|h| h == "eps0 1.0000000000e0"), "{:?}", report.header);
    let rows = rows(&report.csv);
    assert_eq!(rows[0][3], "finite");
    assert_eq!(rows[1][3], "finite");
    assert_eq!(rows[2][3], "diverging");
}

#[test]
fn norm_of_a_constant_function() {
    let cfg = config(
        "[curve]\nkind = segment\nstart = 0,0\nend = 1,0\nnodes = 11\n[exponent]\nconstant 3\n\
         [function]\nkind = constant\nvalue = 2\n",
    );
    let report = harness::run_norm(&cfg).unwrap();
    assert!(report.csv.contains("norm,2.0000000000e0\n"), "{}", report.csv);
}

#[test]
fn carleson_study_of_the_spiral() {
    let cfg = config("[curve]\nkind = spiral\nalpha = 2\nresolution = 256\n");
    let report = harness::run_carleson(&cfg).unwrap();
    assert!(report.csv.lines().last().unwrap().starts_with("verdict,stable,"), "{}", report.csv);
    let cfg = config("[curve]\nkind = spiral\nalpha = 1.5\nresolution = 256\n");
    let report = harness::run_carleson(&cfg).unwrap();
    assert!(report.csv.lines().last().unwrap().starts_with("verdict,diverging,"), "{}", report.csv);
}

#[test]
fn file_curves_and_table_weights_resolve_relative_paths() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("square.txt"), "closed 1\n0 0\n1 0\n1 1\n0 1\n").unwrap();
    // x^0.4 sampled on a log grid
    let table: String = (0..=12).map(|k| format!("{:e} {:e}\n", 10f64.powi(-k), 10f64.powi(-k).powf(0.4))).collect();
    std::fs::write(dir.path().join("rho.txt"), table).unwrap();
    let path = dir.path().join("run.cfg");
    std::fs::write(&path, "[curve]\nkind = file\npath = square.txt\n[weight]\nfactor anchor=0,0 kind=table file=rho.txt\n")
        .unwrap();
    let cfg = ExperimentConfig::load(&path).unwrap();
    let curve = cfg.build_curve().unwrap();
    assert!(curve.is_closed());
    assert!((curve.length() - 4.0).abs() < 1e-15);
    let w = cfg.build_weight(&curve).unwrap();
    let v = w.evaluate(num_complex::Complex64::new(0.01, 0.0)).unwrap();
    assert!((v - 0.01f64.powf(0.4)).abs() < 1e-12, "{v}");
}
