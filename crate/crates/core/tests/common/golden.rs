//! Golden examples and regressions; each returns a detail line on success.

use std::cell::Cell;
use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use hexsolve::cli::{run, RunOptions};
use hexsolve::extsources::{builtins, Assignment, ExternalSource, Registry, Truth};
use hexsolve::learning::{
    learn_io_nogood, minimize_by_linearity, minimize_by_monotonicity, minimize_by_partial_oracle, IoNogoodContext,
    Literal, Nogood, Polarity,
};
use hexsolve::pipeline::{run_text, Options};
use hexsolve::syntax::{Atom, Term};

pub type Check = Result<String, String>;

pub const SCC: &str = "start(1). scc(X) :- start(X). scc(Y) :- scc(X), &edge[X](Y)<finitedomain 0>.";
pub const DIFF: &str = "p(a). p(b). q(b). r(X) :- &diff[p,q](X).";

fn within_a_second(started: Instant) -> Result<(), String> {
    let t = started.elapsed();
    if t < Duration::from_secs(1) {
        Ok(())
    } else {
        Err(format!("took {t:?}"))
    }
}

fn extension(text: &str, pred: &str) -> Result<Vec<Vec<String>>, String> {
    let out = run_text(text, &Registry::with_builtins(), &Options::default()).map_err(|e| e.to_string())?;
    Ok(out
        .answer_sets
        .iter()
        .map(|a| a.extension(pred).map(|x| x.args[0].to_string()).collect())
        .collect())
}

pub fn scc() -> Check {
    let t = Instant::now();
    let ext = extension(SCC, "scc")?;
    within_a_second(t)?;
    if ext != vec![vec!["1", "2", "3"]] {
        return Err(format!("scc extensions {ext:?}"));
    }
    Ok("one answer set, scc = {1,2,3}".into())
}

pub fn diff() -> Check {
    let t = Instant::now();
    let ext = extension(DIFF, "r")?;
    within_a_second(t)?;
    if ext != vec![vec!["a"]] {
        return Err(format!("r extensions {ext:?}"));
    }
    Ok("one answer set, r = {a}".into())
}

fn atom(p: &str, c: &str) -> Atom {
    Atom::new(p, vec![Term::sym(c)])
}

fn nogood(lits: &[(bool, &str, &str)]) -> Nogood {
    lits.iter()
        .map(|&(t, p, c)| {
            if t {
                Literal::t(atom(p, c))
            } else {
                Literal::f(atom(p, c))
            }
        })
        .collect()
}

/// The assignment {T p(a), T p(b), F q(a), T q(b)} for `&diff[p,q]`.
pub fn example5() -> Check {
    let t = Instant::now();
    let source = builtins::diff();
    let props = source.properties().clone();
    let assignment: Assignment = [
        (atom("p", "a"), Truth::True),
        (atom("p", "b"), Truth::True),
        (atom("q", "a"), Truth::False),
        (atom("q", "b"), Truth::True),
    ]
    .into_iter()
    .collect();
    let input_atoms: BTreeSet<Atom> = assignment.iter().map(|(a, _)| a.clone()).collect();
    let inputs = vec![Term::sym("p"), Term::sym("q")];
    let ctx = |c: &str, polarity| IoNogoodContext {
        source: &source,
        properties: &props,
        inputs: &inputs,
        input_atoms: &input_atoms,
        assignment: &assignment,
        tuple: vec![Term::sym(c)],
        replacement: atom("e_diff_pq", c),
        polarity,
        oracle_calls: Cell::new(0),
    };
    let expect = |what: &str, got: &Nogood, want: Nogood| -> Result<(), String> {
        if *got == want {
            Ok(())
        } else {
            Err(format!("{what}: got {got}, want {want}"))
        }
    };
    let ca = ctx("a", Polarity::OutputTrue);
    let cb = ctx("b", Polarity::OutputFalse);
    let na = learn_io_nogood(&ca);
    let nb = learn_io_nogood(&cb);
    let base = [(true, "p", "a"), (true, "p", "b"), (false, "q", "a"), (true, "q", "b")];
    let with = |l| nogood(&base.iter().copied().chain([l]).collect::<Vec<_>>());
    expect("learned a", &na, with((false, "e_diff_pq", "a")))?;
    expect("learned b", &nb, with((true, "e_diff_pq", "b")))?;
    let la = minimize_by_linearity(&na, &ca, &props).map_err(|e| e.to_string())?;
    expect(
        "linearity a",
        &la,
        nogood(&[(true, "p", "a"), (false, "q", "a"), (false, "e_diff_pq", "a")]),
    )?;
    let lb = minimize_by_linearity(&nb, &cb, &props).map_err(|e| e.to_string())?;
    expect(
        "linearity b",
        &lb,
        nogood(&[(true, "p", "b"), (true, "q", "b"), (true, "e_diff_pq", "b")]),
    )?;
    let mb = minimize_by_monotonicity(&lb, &cb, &props);
    expect(
        "monotonicity b",
        &mb,
        nogood(&[(true, "q", "b"), (true, "e_diff_pq", "b")]),
    )?;
    let pb = minimize_by_partial_oracle(&nb, &cb).map_err(|e| e.to_string())?;
    expect(
        "partial oracle b",
        &pb,
        nogood(&[(true, "q", "b"), (true, "e_diff_pq", "b")]),
    )?;
    within_a_second(t)?;
    Ok(format!("learned {na} and {nb}; reduced to {la} and {mb}"))
}

pub fn salary_csv() -> Check {
    let t = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let input = dir.path().join("salary.csv");
    std::fs::write(&input, "joe,smith,2000\nsue,johnson,2200\n").map_err(|e| e.to_string())?;
    let facts = hexsolve::csvio::csv_ingest("emp", &input).map_err(|e| e.to_string())?;
    let got: Vec<String> = facts.iter().map(ToString::to_string).collect();
    let want = ["emp(1,\"joe\",\"smith\",2000)", "emp(2,\"sue\",\"johnson\",2200)"];
    if got != want {
        return Err(format!("ingested {got:?}"));
    }
    // and through the command line, back out as CSV
    let output = dir.path().join("out.csv");
    let opts = RunOptions {
        csv_inputs: vec![("emp".into(), input)],
        csv_outputs: vec![("emp".into(), output.clone())],
        ..RunOptions::default()
    };
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(&opts, &mut out, &mut err);
    if code != 0 {
        return Err(format!("exit {code}: {}", String::from_utf8_lossy(&err)));
    }
    let written = std::fs::read_to_string(&output).map_err(|e| e.to_string())?;
    if written != "1,joe,smith,2000\n2,sue,johnson,2200\n" {
        return Err(format!("wrote {written:?}"));
    }
    within_a_second(t)?;
    Ok(got.join(" "))
}

pub fn flp_regressions() -> Check {
    for text in ["p :- &id[p]().", "a :- b. b :- a."] {
        let out = run_text(text, &Registry::with_builtins(), &Options::default()).map_err(|e| e.to_string())?;
        let sets: Vec<String> = out.answer_sets.iter().map(ToString::to_string).collect();
        if sets != ["{}"] {
            return Err(format!("{text} gave {sets:?}"));
        }
    }
    Ok("both yield exactly {}".into())
}
