mod support;

use std::fs;
use std::path::Path;

use cdsolve::Problem;
use cdsolve_cli::{load_problem, load_spec, parse_spec, LoadError};
use support::*;

fn parse(text: &str) -> Result<Problem<f64>, LoadError> {
    parse_spec(text, Path::new("inline.toml"), &fixtures_dir()).map(|s| s.problem)
}

fn names(atoms: &[cdsolve::AtomRef<f64>]) -> Vec<String> {
    atoms.iter().map(|a| a.name().to_string()).collect()
}

fn assert_same(a: &Problem<f64>, b: &Problem<f64>) {
    assert_eq!(a.n(), b.n());
    assert_eq!(a.blocks(), b.blocks());
    for (s, t) in [(a.f(), b.f()), (a.h(), b.h())] {
        assert_eq!(names(&s.atoms), names(&t.atoms));
        assert_eq!(s.weights, t.weights);
        assert_eq!(s.matrix, t.matrix);
        assert_eq!(s.offset, t.offset);
        assert_eq!(s.blocks, t.blocks);
    }
    assert_eq!(names(a.g_atoms()), names(b.g_atoms()));
    assert_eq!(a.cg(), b.cg());
    assert_eq!(a.bg(), b.bg());
    assert_eq!(a.dg(), b.dg());
    assert_eq!(a.q(), b.q());
    assert_eq!(a.x_init(), b.x_init());
}

#[test]
fn lasso_file_equals_programmatic_construction() {
    let dir = fixtures_dir().join("lasso");
    let a = read_mtx(&dir.join("A.mtx"));
    let b = read_vec(&dir.join("b.csv"));
    let spec: toml::Table = fs::read_to_string(dir.join("problem.toml")).unwrap().parse().unwrap();
    let lambda = spec["g"]["weights"].as_float().unwrap();
    let (m, n) = (a.len(), a[0].len());
    let expected = Problem::builder(n)
        .f(vec!["square"; m])
        .af(a)
        .bf(b)
        .cf(vec![0.5; m])
        .g(vec!["abs"; n])
        .cg(vec![lambda; n])
        .build()
        .unwrap();
    assert_same(&load_problem(&dir.join("problem.toml")).unwrap(), &expected);
}

#[test]
fn unknown_atom_names_the_nearest_match() {
    let err = parse("[problem]\nn = 2\n[g]\natoms = \"sqare\"\n").unwrap_err();
    match &err {
        LoadError::UnknownAtom { key, .. } => assert_eq!(key, "g.atoms"),
        e => panic!("{e:?}"),
    }
    assert!(err.to_string().contains("did you mean `square`"), "{err}");
    let err = parse("[problem]\nn = 2\n[g]\natoms = [\"abs\", \"nonnneg\"]\n").unwrap_err();
    assert!(matches!(&err, LoadError::UnknownAtom { key, .. } if key == "g.atoms[1]"), "{err:?}");
    assert!(err.to_string().contains("`nonneg`"), "{err}");
}

#[test]
fn linear_program_structure() {
    let dir = fixtures_dir().join("lp");
    let p = load_problem(&dir.join("problem.toml")).unwrap();
    let a = read_csv(&dir.join("A.csv"));
    let c = read_vec(&dir.join("c.csv"));
    assert_eq!(names(&p.f().atoms), ["linear"]);
    assert_eq!(p.f().matrix.to_dense(), vec![c]);
    assert!(p.f().offset.iter().all(|v| *v == 0.0));
    assert_eq!(names(p.g_atoms()), vec!["nonneg"; 4]);
    assert_eq!(names(&p.h().atoms), vec!["nonpos"; 3]);
    assert_eq!(p.h().matrix.to_dense(), a);
    assert_eq!(p.h().offset, read_vec(&dir.join("b.csv")));
    assert!(p.q().is_none());
}

#[test]
fn describe_matches_raw_files() {
    let dir = fixtures_dir().join("tv_l1");
    let a = read_mtx(&dir.join("A.mtx"));
    let d = read_mtx(&dir.join("D.mtx"));
    let nnz = |m: &[Vec<f64>]| m.iter().flatten().filter(|v| **v != 0.0).count();
    let p = load_problem(&dir.join("problem.toml")).unwrap();
    let text = cdsolve_cli::describe(&p);
    let field = |k: &str| {
        text.lines()
            .find_map(|l| l.strip_prefix(&format!("{k}: ")))
            .unwrap_or_else(|| panic!("{k} missing in\n{text}"))
            .split_whitespace()
            .next()
            .unwrap()
            .parse::<usize>()
            .unwrap()
    };
    assert_eq!(field("N"), a[0].len());
    assert_eq!(field("I"), a[0].len());
    assert_eq!(field("J"), a.len());
    assert_eq!(field("rows h"), d.len());
    assert_eq!(field("nnz Af"), nnz(&a));
    assert_eq!(field("nnz Ah"), nnz(&d));
    // every structural nonzero of D sits in a distinct (row, block) pair
    assert_eq!(field("duplication size"), nnz(&d));
    let spec: toml::Table = fs::read_to_string(dir.join("problem.toml")).unwrap().parse().unwrap();
    assert_eq!(field("L"), spec["h"]["blocks"].as_array().unwrap().len() - 1);
}

#[test]
fn missing_file_is_reported_with_its_key() {
    let err = parse("[problem]\nn = 2\n[f]\natoms = \"square\"\nmatrix = \"nowhere.mtx\"\n").unwrap_err();
    match &err {
        LoadError::MissingFile { path, key } => {
            assert!(path.ends_with("nowhere.mtx"));
            assert_eq!(key, "f.matrix");
        }
        e => panic!("{e:?}"),
    }
    let err = load_problem(Path::new("/definitely/not/here.toml")).unwrap_err();
    assert!(matches!(err, LoadError::MissingFile { .. }));
}

#[test]
fn dimension_mismatches_name_the_offending_key() {
    // lasso data has 10 columns
    let err = parse("[problem]\nn = 11\n[f]\natoms = \"square\"\nmatrix = \"lasso/A.mtx\"\n").unwrap_err();
    assert!(matches!(&err, LoadError::Dimension { key, .. } if key == "f.matrix"), "{err:?}");
    assert!(err.to_string().contains("10 columns, expected N = 11"), "{err}");
    let err = parse("[problem]\nn = 10\n[f]\natoms = \"square\"\nmatrix = \"lasso/A.mtx\"\noffset = [1.0, 2.0]\n").unwrap_err();
    assert!(matches!(&err, LoadError::Dimension { key, .. } if key == "f.offset"), "{err:?}");
    let err = parse("[problem]\nn = 10\n[f]\natoms = \"square\"\nmatrix = \"lasso/A.mtx\"\nrows = 3\n").unwrap_err();
    assert!(matches!(&err, LoadError::Dimension { key, .. } if key == "f.matrix"), "{err:?}");
    let err = parse("[problem]\nn = 3\n[g]\natoms = [\"abs\", \"abs\"]\n").unwrap_err();
    assert!(matches!(&err, LoadError::Dimension { key, .. } if key == "g.atoms"), "{err:?}");
    let err = parse("[problem]\nn = 3\nx_init = [1.0]\n").unwrap_err();
    assert!(matches!(&err, LoadError::Dimension { key, .. } if key == "problem.x_init"), "{err:?}");
    let err = parse("[problem]\nn = 4\nblocks = [0, 2, 4]\n[g]\natoms = \"abs\"\nscale = [1.0, 2.0, 3.0]\n").unwrap_err();
    assert!(matches!(&err, LoadError::Dimension { key, .. } if key == "g.scale"), "{err:?}");
    let err = parse("[problem]\nn = 2\n[q]\nmatrix = { identity = 3 }\n").unwrap_err();
    assert!(matches!(&err, LoadError::Dimension { key, .. } if key == "q.matrix"), "{err:?}");
}

#[test]
fn schema_violations_carry_a_location() {
    for text in [
        "[problem]\nn = 2\nbogus = 1\n",
        "[problem]\nm = 2\n",
        "[problem]\nn = \"two\"\n",
        "[problem]\nn = 2\n[options]\ntoll = 1e-3\n",
        "[problem]\nn = 2\n[options]\nalgorithm = \"newton\"\n",
        "[problem]\nn = 2\n[f]\natoms = \"square\"\nmatrix = { file = \"a.mtx\", colour = 1 }\n",
    ] {
        let err = parse(text).unwrap_err();
        assert!(matches!(err, LoadError::Schema { .. }), "{text}: {err:?}");
        assert!(err.to_string().contains("line"), "{err}");
    }
    let err = parse("[problem]\nn = 2\n[f]\natoms = \"square\"\nmatrix = { dense = [[1.0, 0.0]], identity = 2 }\n")
        .unwrap_err();
    assert!(matches!(err, LoadError::Schema { .. }), "{err:?}");
    let err = parse("[problem]\nn = 2\ny_init = 0.0\n").unwrap_err();
    assert!(matches!(err, LoadError::Schema { .. }), "{err:?}");
}

#[test]
fn options_section_is_read() {
    let s = parse_spec(
        "[problem]\nn = 1\n[g]\natoms = \"abs\"\n[options]\nalgorithm = \"smartcd\"\ntol = 1e-4\nmax_time = 2.5\nsampling = \"kink_half\"\nrestart = { fixed_period = 7 }\n",
        Path::new("x.toml"),
        Path::new("."),
    )
    .unwrap();
    assert_eq!(s.options.algorithm, cdsolve::Algorithm::Smartcd);
    assert_eq!(s.options.tol, 1e-4);
    assert_eq!(s.options.max_time, Some(std::time::Duration::from_secs_f64(2.5)));
    assert_eq!(s.options.sampling, cdsolve::SamplingKind::KinkHalf);
    assert_eq!(s.options.restart, cdsolve::RestartPolicy::FixedPeriod(7));
    assert_eq!(s.options.max_iter, cdsolve::SolverOptions::default().max_iter);
    let s = parse_spec("[problem]\nn = 1\n[options]\nrestart = { doubling = 5 }\n", Path::new("x.toml"), Path::new("."))
        .unwrap();
    assert_eq!(s.options.restart, cdsolve::RestartPolicy::Doubling(Some(5)));
}

fn write(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

#[test]
fn libsvm_label_handling() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    write(d, "d.svm", "# comment\n+1 1:2 3:-1\n-1 2:4 # trailing\n\n+1 qid:3 3:0.5\n");
    write(d, "z.svm", "2 0:1.5 2:1\n");
    let load = |m: &str| {
        let text = format!("[problem]\nn = 3\n[f]\natoms = \"square\"\nmatrix = {m}\n");
        write(d, "p.toml", &text);
        load_problem(&d.join("p.toml"))
    };
    let p = load("\"d.svm\"").unwrap();
    assert_eq!(p.f().matrix.to_dense(), vec![vec![2.0, 0.0, -1.0], vec![0.0, 4.0, 0.0], vec![0.0, 0.0, 0.5]]);
    assert_eq!(p.f().offset, vec![1.0, -1.0, 1.0]);
    let p = load("{ file = \"d.svm\", labels = \"neg_scale_rows\" }").unwrap();
    assert_eq!(p.f().matrix.to_dense(), vec![vec![-2.0, 0.0, 1.0], vec![0.0, 4.0, 0.0], vec![0.0, 0.0, -0.5]]);
    assert_eq!(p.f().offset, vec![0.0; 3]);
    let p = load("{ file = \"z.svm\", format = \"libsvm\", zero_based = true }").unwrap();
    assert_eq!(p.f().matrix.to_dense(), vec![vec![1.5, 0.0, 1.0]]);
    let err = load("\"z.svm\"").unwrap_err();
    assert!(matches!(&err, LoadError::Parse { line: Some(1), .. }), "{err:?}");
    // transposed: 3 samples become 3 columns, features become rows
    let p = load("{ file = \"d.svm\", transpose = true, labels = \"scale_rows\", cols = 4 }").unwrap();
    assert_eq!(p.f().dim(), 4);
    assert_eq!(p.f().matrix.to_dense()[0], vec![2.0, 0.0, 0.0]);
    assert_eq!(p.f().matrix.to_dense()[3], vec![0.0; 3]);
    let err = load("{ file = \"d.svm\", transpose = true, labels = \"offset\" }").unwrap_err();
    assert!(matches!(err, LoadError::Schema { .. }), "{err:?}");
    write(d, "bad.svm", "1 1:2\n1 2:x\n");
    let err = load("\"bad.svm\"").unwrap_err();
    assert!(err.to_string().contains("bad.svm:2"), "{err}");
}

#[test]
fn matrix_market_and_csv_inputs() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    write(d, "s.mtx", "%%MatrixMarket matrix coordinate real symmetric\n% lower part\n2 2 3\n1 1 2.0\n2 1 -1.0\n2 2 2.0\n");
    write(d, "a.csv", "# two rows\n1, 2\n3,4\n");
    write(d, "ragged.csv", "1,2\n3\n");
    write(d, "b.txt", "5\n6\n");
    let run = |text: &str| {
        write(d, "p.toml", text);
        load_problem(&d.join("p.toml"))
    };
    let p = run("[problem]\nn = 2\n[q]\nmatrix = \"s.mtx\"\n").unwrap();
    assert_eq!(p.q().unwrap().to_dense(), vec![vec![2.0, -1.0], vec![-1.0, 2.0]]);
    let p = run("[problem]\nn = 2\n[f]\natoms = \"square\"\nmatrix = [\"a.csv\", { dense = [[0.5, 0.0]] }, { identity = 2, scale = 3.0 }]\noffset = \"b.txt\"\n");
    assert!(matches!(p, Err(LoadError::Dimension { .. })));
    let p = run("[problem]\nn = 2\n[f]\natoms = \"square\"\nmatrix = [\"a.csv\", { dense = [[0.5, 0.0]] }, { identity = 2, scale = 3.0 }]\n").unwrap();
    assert_eq!(
        p.f().matrix.to_dense(),
        vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![0.5, 0.0], vec![3.0, 0.0], vec![0.0, 3.0]]
    );
    let p = run("[problem]\nn = 2\n[h]\natoms = \"eq\"\nmatrix = \"a.csv\"\noffset = \"b.txt\"\n").unwrap();
    assert_eq!(p.h().offset, vec![5.0, 6.0]);
    let err = run("[problem]\nn = 2\n[f]\natoms = \"square\"\nmatrix = \"ragged.csv\"\n").unwrap_err();
    assert!(matches!(err, LoadError::Parse { .. }), "{err:?}");
    let err = run("[problem]\nn = 2\n[f]\natoms = \"square\"\nmatrix = \"b.txt\"\n").unwrap_err();
    assert!(err.to_string().contains("cannot infer the format"), "{err}");
}

#[test]
fn stacked_label_offsets_are_zero_filled() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    write(d, "d.svm", "3 1:1\n-2 2:1\n");
    write(
        d,
        "p.toml",
        "[problem]\nn = 2\n[f]\natoms = \"square\"\nmatrix = [{ dense = [[1.0, 1.0]] }, \"d.svm\"]\n",
    );
    let p = load_problem(&d.join("p.toml")).unwrap();
    assert_eq!(p.f().offset, vec![0.0, 3.0, -2.0]);
}

#[test]
fn separable_scale_per_block_or_per_coordinate() {
    let p = parse("[problem]\nn = 4\nblocks = [0, 2, 4]\n[g]\natoms = \"norm2\"\nscale = [2.0, 3.0]\noffset = 1.0\n").unwrap();
    assert_eq!(p.dg(), &[2.0, 3.0]);
    assert_eq!(p.bg(), &[1.0; 4]);
    let p = parse("[problem]\nn = 4\nblocks = [0, 2, 4]\n[g]\natoms = \"norm2\"\nscale = [2.0, 2.0, 3.0, 3.0]\n").unwrap();
    assert_eq!(p.dg(), &[2.0, 3.0]);
    let err = parse("[problem]\nn = 4\nblocks = [0, 2, 4]\n[g]\natoms = \"norm2\"\nscale = [2.0, 1.0, 3.0, 3.0]\n");
    assert!(matches!(err, Err(LoadError::Model(_))), "{err:?}");
}

#[test]
fn every_fixture_loads() {
    for name in FIXTURES {
        let s = load_spec(&spec_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(s.options.tol > 0.0);
    }
}
