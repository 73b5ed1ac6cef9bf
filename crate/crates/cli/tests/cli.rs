use std::path::{Path, PathBuf};
use std::process::Command;

use binopt::pricing::price;
use binopt::{ExerciseStyle, ModelParams, NodeId, OptionSpec};
use binopt_cli::output::{HedgeDocument, LatticeDocument};
use tempfile::TempDir;

const MODEL: &str = "s0 = 1\nu = 2\nd = \"1/2\"\nr = \"1/2\"\nperiods = 3\n";
const AMERICAN_CALL: &str = "kind = \"call\"\nstyle = \"american\"\nstrike = \"5/2\"\n";

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn binopt(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_binopt"))
        .args(args)
        .output()
        .unwrap();
    Run {
        code: out.status.code().expect("exited normally"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn field(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(' ')))
        .unwrap_or_else(|| panic!("no `{key}` in\n{text}"))
        .parse()
        .unwrap()
}

#[test]
fn price_golden_american_call() {
    let dir = TempDir::new().unwrap();
    let (m, o) = (
        write(&dir, "m.toml", MODEL),
        write(&dir, "o.toml", AMERICAN_CALL),
    );
    let run = binopt(&["price", "--model", s(&m), "--option", s(&o)]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let doc = LatticeDocument::from_table(&run.stdout).unwrap();
    assert!((doc.root_price - 352.0 / 729.0).abs() < 1e-12);
    let values = doc.values().unwrap();
    assert!((values[NodeId::new(2, 2)] - 22.0 / 9.0).abs() < 1e-12);
}

#[test]
fn zero_custom_payoff_prices_to_zero() {
    let dir = TempDir::new().unwrap();
    let m = write(
        &dir,
        "m.toml",
        "s0 = 1\nu = 2\nd = 0.5\nr = 0.5\nperiods = 1\n",
    );
    let o = write(
        &dir,
        "o.toml",
        "kind = \"custom\"\nstyle = \"european\"\n\
         [[payoff]]\ntime = 1\nup_count = 1\nvalue = 0\n\
         [[payoff]]\ntime = 1\nup_count = 0\nvalue = 0\n",
    );
    let run = binopt(&[
        "price",
        "--model",
        s(&m),
        "--option",
        s(&o),
        "--format",
        "structured",
    ]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert_eq!(
        LatticeDocument::from_json(&run.stdout).unwrap().root_price,
        0.0
    );
}

#[test]
fn arbitrage_model_exits_3_with_witness() {
    let dir = TempDir::new().unwrap();
    let m = write(
        &dir,
        "m.toml",
        "s0 = 1\nu = 1.2\nd = 0.9\nr = 0.5\nperiods = 2\n",
    );
    let o = write(&dir, "o.toml", AMERICAN_CALL);
    for cmd in ["price", "hedge", "oracle"] {
        let run = binopt(&[cmd, "--model", s(&m), "--option", s(&o)]);
        assert_eq!(run.code, 3, "{cmd}: {}", run.stderr);
        assert!(
            run.stderr.contains("a = -1 shares, b = 1 in the bank"),
            "{}",
            run.stderr
        );
        assert!(
            run.stderr.contains("u = 1.2 is not above 1+r = 1.5"),
            "{}",
            run.stderr
        );
    }
    let run = binopt(&["optimize", "--model", s(&m), "--v0", "1", "--p", "0.5"]);
    assert_eq!(run.code, 3);
}

#[test]
fn parse_errors_exit_2_naming_file_and_field() {
    let dir = TempDir::new().unwrap();
    let bad = write(
        &dir,
        "bad.toml",
        "s0 = 1\nu = 2\nd = \"1/x\"\nr = 0\nperiods = 1\n",
    );
    let o = write(&dir, "o.toml", AMERICAN_CALL);
    let run = binopt(&["price", "--model", s(&bad), "--option", s(&o)]);
    assert_eq!(run.code, 2);
    assert!(
        run.stderr.contains("bad.toml") && run.stderr.contains("`d`"),
        "{}",
        run.stderr
    );

    let m = write(&dir, "m.toml", MODEL);
    let bad_opt = write(&dir, "opt.toml", "kind = \"call\"\nstyle = \"american\"\n");
    let run = binopt(&["price", "--model", s(&m), "--option", s(&bad_opt)]);
    assert_eq!(run.code, 2);
    assert!(
        run.stderr.contains("opt.toml") && run.stderr.contains("strike"),
        "{}",
        run.stderr
    );

    let missing = dir.path().join("absent.toml");
    assert_eq!(
        binopt(&["price", "--model", s(&missing), "--option", s(&o)]).code,
        2
    );
    assert_eq!(binopt(&["price", "--model", s(&m)]).code, 2);
}

#[test]
fn hedge_one_period_call() {
    let dir = TempDir::new().unwrap();
    let m = write(
        &dir,
        "m.toml",
        "s0 = 1\nu = 2\nd = 0.5\nr = 0.5\nperiods = 1\n",
    );
    let o = write(
        &dir,
        "o.toml",
        "kind = \"call\"\nstyle = \"european\"\nstrike = \"2/3\"\n",
    );
    let run = binopt(&[
        "hedge",
        "--model",
        s(&m),
        "--option",
        s(&o),
        "--format",
        "structured",
    ]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let doc = HedgeDocument::from_json(&run.stdout).unwrap();
    let root = &doc.nodes[0];
    assert!((root.shares.unwrap() - 8.0 / 9.0).abs() < 1e-12);
    assert!((root.bank.unwrap() + 8.0 / 27.0).abs() < 1e-12);
    assert!(doc.nodes[1].shares.is_none());
    assert_eq!(doc.replay.as_ref().unwrap().paths, 2);
}

#[test]
fn hedge_riskless_payoff_holds_no_shares() {
    let dir = TempDir::new().unwrap();
    let m = write(
        &dir,
        "m.toml",
        "s0 = 1\nu = 2\nd = 0.5\nr = 0.5\nperiods = 2\n",
    );
    let o = write(
        &dir,
        "o.toml",
        "kind = \"custom\"\nstyle = \"european\"\n\
         [[payoff]]\ntime = 2\nup_count = 2\nvalue = 3\n\
         [[payoff]]\ntime = 2\nup_count = 1\nvalue = 3\n\
         [[payoff]]\ntime = 2\nup_count = 0\nvalue = 3\n",
    );
    let run = binopt(&["hedge", "--model", s(&m), "--option", s(&o)]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let doc = HedgeDocument::from_table(&run.stdout).unwrap();
    for row in doc.nodes.iter().filter(|r| r.time < 2) {
        assert!(row.shares.unwrap().abs() < 1e-12, "{row:?}");
    }
}

#[test]
fn hedge_american_put_replay() {
    let dir = TempDir::new().unwrap();
    let m = write(
        &dir,
        "m.toml",
        "s0 = 1\nu = 2\nd = 0.5\nr = 0.5\nperiods = 2\n",
    );
    let o = write(
        &dir,
        "o.toml",
        "kind = \"put\"\nstyle = \"american\"\nstrike = \"5/2\"\n",
    );
    let run = binopt(&["hedge", "--model", s(&m), "--option", s(&o)]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let replay = HedgeDocument::from_table(&run.stdout)
        .unwrap()
        .replay
        .unwrap();
    assert_eq!(replay.paths, 4);
    assert!(replay.worst_shortfall >= -1e-10);
}

#[test]
fn advise_paths() {
    let dir = TempDir::new().unwrap();
    let (m, o) = (
        write(&dir, "m.toml", MODEL),
        write(&dir, "o.toml", AMERICAN_CALL),
    );
    let advise = |path: &str| {
        binopt(&[
            "advise",
            "--model",
            s(&m),
            "--option",
            s(&o),
            "--path",
            path,
        ])
    };

    let run = advise("u,u");
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert!(run.stdout.contains("recommendation exercise"));
    assert_eq!(field(&run.stdout, "intrinsic"), 1.5);

    assert!(advise("d,d").stdout.contains("recommendation hold"));
    let root = advise("");
    assert!(
        root.stdout.contains("recommendation hold"),
        "{}",
        root.stdout
    );
    assert_eq!(field(&root.stdout, "intrinsic"), 0.0);

    let bad = advise("u,x");
    assert_eq!(bad.code, 2);
    assert!(bad.stderr.contains("'x'"), "{}", bad.stderr);
    assert_eq!(advise("u,u,u,u").code, 2);

    let euro = write(
        &dir,
        "e.toml",
        "kind = \"call\"\nstyle = \"european\"\nstrike = 1\n",
    );
    assert_eq!(
        binopt(&[
            "advise",
            "--model",
            s(&m),
            "--option",
            s(&euro),
            "--path",
            "u"
        ])
        .code,
        2
    );
}

#[test]
fn check_command() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "m.toml", MODEL);
    let run = binopt(&[
        "check",
        "--model",
        s(&m),
        "--strike",
        "5/2",
        "--periods",
        "2",
    ]);
    assert_eq!(run.code, 0, "{}{}", run.stdout, run.stderr);
    assert_eq!(
        run.stdout.lines().filter(|l| l.contains(" PASS ")).count(),
        5
    );

    let run = binopt(&[
        "check",
        "--model",
        s(&m),
        "--strike",
        "5/2",
        "--inject-fault",
        "1e-3",
    ]);
    assert_eq!(run.code, 4);
    assert!(
        run.stderr.contains("european-parity") && run.stderr.contains("(0, 0)"),
        "{}",
        run.stderr
    );

    let neg = write(
        &dir,
        "neg.toml",
        "s0 = 1\nu = 1.5\nd = 0.5\nr = -0.1\nperiods = 2\n",
    );
    let run = binopt(&["check", "--model", s(&neg), "--strike", "1"]);
    assert_eq!(run.code, 2);
    assert!(
        run.stderr.contains("non-negative interest rate"),
        "{}",
        run.stderr
    );

    let run = binopt(&[
        "check",
        "--model",
        s(&m),
        "--strike",
        "5/2",
        "--format",
        "structured",
    ]);
    let reports: serde_json::Value = serde_json::from_str(&run.stdout).unwrap();
    assert_eq!(reports.as_array().unwrap().len(), 5);
}

#[test]
fn optimize_examples() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "m.toml", MODEL);
    let opt = |v0: &str, p: &str| binopt(&["optimize", "--model", s(&m), "--v0", v0, "--p", p]);

    let run = opt("1", "0.8");
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert!((field(&run.stdout, "shares") - 1.5).abs() < 1e-12);
    assert!((field(&run.stdout, "bank") + 0.5).abs() < 1e-12);
    assert!((field(&run.stdout, "objective") - 1.8).abs() < 1e-12);
    assert!(run.stdout.contains("binding_constraint down"));

    let run = opt("1", "2/3");
    assert_eq!(field(&run.stdout, "shares"), 0.0);
    assert!((field(&run.stdout, "objective") - 1.5).abs() < 1e-12);

    let run = opt("0", "0.8");
    assert_eq!(
        (
            field(&run.stdout, "shares"),
            field(&run.stdout, "bank"),
            field(&run.stdout, "objective")
        ),
        (0.0, 0.0, 0.0)
    );

    assert_eq!(opt("1", "1.5").code, 2);
    assert_eq!(opt("-1", "0.5").code, 2);
    assert_eq!(opt("1", "abc").code, 2);
}

#[test]
fn oracle_command_passes_on_golden_model() {
    let dir = TempDir::new().unwrap();
    let (m, o) = (
        write(&dir, "m.toml", MODEL),
        write(&dir, "o.toml", AMERICAN_CALL),
    );
    let run = binopt(&["oracle", "--model", s(&m), "--option", s(&o)]);
    assert_eq!(run.code, 0, "{}{}", run.stdout, run.stderr);
    assert_eq!(
        run.stdout.lines().filter(|l| l.contains(" PASS ")).count(),
        4
    );

    let deep = write(
        &dir,
        "deep.toml",
        "s0 = 1\nu = 2\nd = 0.5\nr = 0.5\nperiods = 6\n",
    );
    let run = binopt(&[
        "oracle",
        "--model",
        s(&deep),
        "--option",
        s(&o),
        "--format",
        "structured",
    ]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert!(run.stdout.contains("skipped"));
}

#[test]
fn price_with_fair_value_and_tree() {
    let dir = TempDir::new().unwrap();
    let m = write(
        &dir,
        "m.toml",
        "s0 = 1\nu = 2\nd = 0.5\nr = 0.5\nperiods = 2\n",
    );
    let o = write(
        &dir,
        "o.toml",
        "kind = \"put\"\nstyle = \"american\"\nstrike = \"5/2\"\n",
    );
    let run = binopt(&["price", "--model", s(&m), "--option", s(&o), "--p", "1/2"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let doc = LatticeDocument::from_table(&run.stdout).unwrap();
    let fv = doc.fair_value.unwrap();
    assert!((fv.fair_value - 1.5).abs() < 1e-12);

    let run = binopt(&[
        "price",
        "--model",
        s(&m),
        "--option",
        s(&o),
        "--format",
        "tree",
    ]);
    assert_eq!(run.code, 0);
    assert!(run.stdout.starts_with("root price 1.5"), "{}", run.stdout);
    assert_eq!(
        binopt(&["price", "--model", s(&m), "--option", s(&o), "--p", "1"]).code,
        2
    );
}

#[test]
fn output_is_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let (m, o) = (
        write(&dir, "m.toml", MODEL),
        write(&dir, "o.toml", AMERICAN_CALL),
    );
    for format in ["table", "structured", "tree"] {
        let args = [
            "price",
            "--model",
            s(&m),
            "--option",
            s(&o),
            "--format",
            format,
        ];
        assert_eq!(binopt(&args).stdout, binopt(&args).stdout);
    }
}

#[test]
fn table_and_json_round_trip() {
    let params = ModelParams::new(1.3, 1.37, 0.71, 0.03, 9).unwrap();
    for style in [ExerciseStyle::European, ExerciseStyle::American] {
        let spec = OptionSpec::put(style, 1.17, 9).unwrap();
        let lattice = price(&params, &spec).unwrap();
        let doc = LatticeDocument::new(&params, &lattice);
        for back in [
            LatticeDocument::from_table(&doc.to_table()).unwrap(),
            LatticeDocument::from_json(&doc.to_json()).unwrap(),
        ] {
            assert_eq!(back, doc);
            let values = back.values().unwrap();
            for (node, v) in lattice.values.iter() {
                assert!((values[node] - v).abs() <= 1e-12);
            }
        }
    }
}
