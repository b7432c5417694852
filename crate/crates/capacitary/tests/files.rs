use capacitary::choquet::{write_profile_tsv, write_tsv};
use capacitary::lattice::{GridFunction, LeafSet, RootCube};
use capacitary::verify::{run_check, write_summary_csv, CheckConfig, CheckReport};

#[test]
fn grid_function_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let root = RootCube::new(2, 3, 2.0, &[-1.0, 0.5]).unwrap();
    let f = GridFunction::from_fn(&root, |x| x[0] * 3.0 - x[1]).unwrap();
    for name in ["f.txt", "f.bin"] {
        let p = dir.path().join(name);
        f.write(&p).unwrap();
        assert_eq!(GridFunction::read(&p).unwrap(), f, "{name}");
    }
}

#[test]
fn leaf_set_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let root = RootCube::unit(1, 5).unwrap();
    let e = LeafSet::from_leaves(&root, [0, 3, 17, 31]).unwrap();
    for name in ["e.set", "e.f64"] {
        let p = dir.path().join(name);
        e.write(&p).unwrap();
        assert_eq!(LeafSet::read(&p).unwrap(), e, "{name}");
    }
}

#[test]
fn tsv_has_comment_header() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("a.tsv");
    write_tsv(&p, &["x", "y", "z"], &[vec![1.0, 2.0, 3.0]]).unwrap();
    let text = std::fs::read_to_string(&p).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with('#'));
    assert_eq!(lines.next().unwrap().split('\t').count(), 3);
    let q = dir.path().join("b.tsv");
    write_profile_tsv(&q, &[(0.0, 1.0), (1.0, 0.5)]).unwrap();
    let text = std::fs::read_to_string(&q).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 2);
}

#[test]
fn reports_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = CheckConfig::quick();
    cfg.depth = 4;
    let r = run_check("choquet_axioms", &cfg).unwrap();
    let path = r.write(dir.path()).unwrap();
    assert!(path.starts_with(dir.path().join("reports").join("choquet_axioms")));
    let back: CheckReport = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(back, r);
    assert!(dir.path().join("plots").join("choquet_axioms_holder.tsv").exists());
    let csv_path = dir.path().join("summary.csv");
    write_summary_csv(std::slice::from_ref(&r), &csv_path).unwrap();
    let mut rd = csv::Reader::from_path(&csv_path).unwrap();
    let headers = rd.headers().unwrap().clone();
    assert_eq!(&headers[0], "check_id");
    assert_eq!(rd.records().count(), r.claims.len());
}
