//! SMT-LIB v2 emission (QF_UFBV, one uninterpreted function from cell
//! indices to rectangle indices) and process-based external solver
//! integration with model decoding.

use super::ColoringAssignment;
use crate::error::{Error, Result};
use crate::matrix::BinaryMatrix;
use std::fmt::Write as _;
use std::io::Write as _;
use std::process::Command;

fn bits_for(x: usize) -> u32 {
    let x = x.max(2);
    usize::BITS - (x - 1).leading_zeros()
}

/// An SMT-LIB script deciding "at most `bound` rectangles", supporting the
/// bound-narrowing step: each narrowing appends `f(e) != bound-1` for every
/// 1-cell, which is how the search space shrinks without re-encoding. (The
/// internal backend has no persistent formula; narrowing there is simply a
/// fresh decision at the smaller bound.)
#[derive(Clone, Debug)]
pub struct SmtEncoding {
    cell_count: usize,
    domain_width: u32,
    range_width: u32,
    bound: usize,
    base: String,
}

impl SmtEncoding {
    pub fn new(matrix: &BinaryMatrix, bound: usize) -> Self {
        assert!(bound >= 1, "bound must be at least 1");
        let cells = matrix.one_cells();
        let domain_width = bits_for(cells.len());
        let range_width = bits_for(bound);
        let mut base = String::new();
        base.push_str("(set-option :produce-models true)\n");
        base.push_str("(set-logic QF_UFBV)\n");
        let _ = writeln!(
            base,
            "(declare-fun f ((_ BitVec {domain_width})) (_ BitVec {range_width}))"
        );
        let app = |k: usize| format!("(f (_ bv{k} {domain_width}))");
        for k in 0..cells.len() {
            let _ = writeln!(
                base,
                "(assert (bvule {} (_ bv{} {range_width})))",
                app(k),
                bound - 1
            );
        }
        // both orderings of each pair: the closure condition references the
        // cross cell (i, j'), which is not symmetric under swapping
        for (p, &(i, _)) in cells.iter().enumerate() {
            for (q, &(_, j2)) in cells.iter().enumerate() {
                if p == q {
                    continue;
                }
                let cross = (i, j2);
                if cross == cells[p] || cross == cells[q] {
                    continue; // same row or column: the condition is vacuous
                }
                if matrix.get(cross.0, cross.1) {
                    let cross_id = cells
                        .iter()
                        .position(|&c| c == cross)
                        .expect("cross is a 1-cell");
                    let _ = writeln!(
                        base,
                        "(assert (=> (= {} {}) (= {} {})))",
                        app(p),
                        app(q),
                        app(p),
                        app(cross_id)
                    );
                } else {
                    let _ = writeln!(base, "(assert (distinct {} {}))", app(p), app(q));
                }
            }
        }
        SmtEncoding {
            cell_count: cells.len(),
            domain_width,
            range_width,
            bound,
            base,
        }
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn cell_count(&self) -> usize {
        self.cell_count
    }

    /// Excludes the current highest rectangle index, lowering the bound by
    /// one.
    pub fn narrow(&mut self) -> usize {
        assert!(self.bound > 1, "cannot narrow below one rectangle");
        self.bound -= 1;
        for k in 0..self.cell_count {
            let _ = writeln!(
                self.base,
                "(assert (distinct (f (_ bv{k} {})) (_ bv{} {})))",
                self.domain_width, self.bound, self.range_width
            );
        }
        self.bound
    }

    /// The full script, ending with check-sat and get-model. Byte-stable
    /// for a fixed construction history.
    pub fn script(&self) -> String {
        let mut s = self.base.clone();
        s.push_str("(check-sat)\n(get-model)\n");
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExternalOutcome {
    Sat(ColoringAssignment),
    Unsat,
    Unknown,
}

/// Runs an external SMT-LIB solver on the encoding. `cmd` is split on
/// whitespace (program plus fixed arguments); the script path is appended.
/// Expects `sat`/`unsat`/`unknown` on the first line and, for sat, a
/// get-model response containing a `define-fun` for `f` built from ite
/// chains over the domain sort.
pub fn run_external(cmd: &str, encoding: &SmtEncoding) -> Result<ExternalOutcome> {
    let mut parts = cmd.split_whitespace();
    let program = parts
        .next()
        .ok_or_else(|| Error::SolverFailure("empty solver command".into()))?;
    let mut file = tempfile::Builder::new()
        .prefix("bitrect-")
        .suffix(".smt2")
        .tempfile()?;
    file.write_all(encoding.script().as_bytes())?;
    file.flush()?;
    let output = Command::new(program)
        .args(parts)
        .arg(file.path())
        .output()
        .map_err(|e| Error::SolverFailure(format!("failed to launch {program}: {e}")))?;
    let stdout = String::from_utf8_lossy(&output.stdout);
    let mut lines = stdout.lines().map(str::trim).filter(|l| !l.is_empty());
    match lines.next() {
        Some("unsat") => Ok(ExternalOutcome::Unsat),
        Some("unknown") => Ok(ExternalOutcome::Unknown),
        Some("sat") => {
            let rest: String = stdout
                .splitn(2, "sat")
                .nth(1)
                .unwrap_or_default()
                .to_string();
            let colors = decode_model(&rest, encoding.cell_count)?;
            Ok(ExternalOutcome::Sat(ColoringAssignment { colors }))
        }
        first => Err(Error::SolverFailure(format!(
            "unexpected solver output {:?} (stderr: {})",
            first,
            String::from_utf8_lossy(&output.stderr).trim()
        ))),
    }
}

/// Extracts the interpretation of `f` from a get-model response and applies
/// it to every cell index.
pub fn decode_model(model_text: &str, cell_count: usize) -> Result<Vec<usize>> {
    let sexps = parse_sexps(model_text)?;
    let (param, body) = find_define_fun(&sexps, "f").ok_or_else(|| {
        Error::SolverFailure("model does not define the cell-coloring function".into())
    })?;
    let mut colors = Vec::with_capacity(cell_count);
    for k in 0..cell_count {
        let mut env = vec![(param.to_string(), Val::Bv(k as u64))];
        match eval(body, &mut env)? {
            Val::Bv(v) => colors.push(v as usize),
            Val::Bool(_) => {
                return Err(Error::SolverFailure(
                    "model function returned a boolean".into(),
                ))
            }
        }
    }
    Ok(colors)
}

#[derive(Clone, Debug, PartialEq)]
enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

fn parse_sexps(text: &str) -> Result<Vec<Sexp>> {
    let mut stack: Vec<Vec<Sexp>> = vec![Vec::new()];
    let mut atom = String::new();
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            ';' => {
                for c in chars.by_ref() {
                    if c == '\n' {
                        break;
                    }
                }
            }
            '(' => {
                flush_atom(&mut atom, &mut stack);
                stack.push(Vec::new());
            }
            ')' => {
                flush_atom(&mut atom, &mut stack);
                let done = stack
                    .pop()
                    .ok_or_else(|| Error::SolverFailure("unbalanced model parens".into()))?;
                stack
                    .last_mut()
                    .ok_or_else(|| Error::SolverFailure("unbalanced model parens".into()))?
                    .push(Sexp::List(done));
            }
            c if c.is_whitespace() => flush_atom(&mut atom, &mut stack),
            c => atom.push(c),
        }
    }
    flush_atom(&mut atom, &mut stack);
    if stack.len() != 1 {
        return Err(Error::SolverFailure("unbalanced model parens".into()));
    }
    Ok(stack.pop().unwrap())
}

fn flush_atom(atom: &mut String, stack: &mut [Vec<Sexp>]) {
    if !atom.is_empty() {
        stack
            .last_mut()
            .expect("stack never empty")
            .push(Sexp::Atom(std::mem::take(atom)));
    }
}

/// Finds `(define-fun <name> ((<param> <sort>)) <sort> <body>)` anywhere in
/// the response (solvers differ on whether it sits inside a `(model ...)`
/// wrapper).
fn find_define_fun<'a>(sexps: &'a [Sexp], name: &str) -> Option<(&'a str, &'a Sexp)> {
    for sexp in sexps {
        if let Sexp::List(items) = sexp {
            if items.len() >= 5
                && items[0] == Sexp::Atom("define-fun".into())
                && items[1] == Sexp::Atom(name.into())
            {
                if let Sexp::List(params) = &items[2] {
                    if let Some(Sexp::List(first)) = params.first() {
                        if let Some(Sexp::Atom(param)) = first.first() {
                            return Some((param, &items[4]));
                        }
                    }
                }
            }
            if let Some(found) = find_define_fun(items, name) {
                return Some(found);
            }
        }
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Val {
    Bv(u64),
    Bool(bool),
}

fn eval(expr: &Sexp, env: &mut Vec<(String, Val)>) -> Result<Val> {
    match expr {
        Sexp::Atom(a) => eval_atom(a, env),
        Sexp::List(items) => {
            let head = match items.first() {
                Some(Sexp::Atom(h)) => h.as_str(),
                Some(Sexp::List(_)) | None => {
                    return Err(Error::SolverFailure(format!(
                        "unsupported model term {expr:?}"
                    )))
                }
            };
            match head {
                "_" => eval_indexed_literal(items),
                "ite" if items.len() == 4 => {
                    let cond = expect_bool(eval(&items[1], env)?)?;
                    eval(if cond { &items[2] } else { &items[3] }, env)
                }
                "=" if items.len() == 3 => {
                    let a = eval(&items[1], env)?;
                    let b = eval(&items[2], env)?;
                    Ok(Val::Bool(a == b))
                }
                "not" if items.len() == 2 => {
                    Ok(Val::Bool(!expect_bool(eval(&items[1], env)?)?))
                }
                "and" | "or" => {
                    let mut acc = head == "and";
                    for item in &items[1..] {
                        let v = expect_bool(eval(item, env)?)?;
                        acc = if head == "and" { acc && v } else { acc || v };
                    }
                    Ok(Val::Bool(acc))
                }
                "let" if items.len() == 3 => {
                    let bindings = match &items[1] {
                        Sexp::List(b) => b,
                        _ => {
                            return Err(Error::SolverFailure("malformed let in model".into()))
                        }
                    };
                    let depth = env.len();
                    for binding in bindings {
                        if let Sexp::List(pair) = binding {
                            if let (Some(Sexp::Atom(name)), Some(value)) =
                                (pair.first(), pair.get(1))
                            {
                                let v = eval(value, env)?;
                                env.push((name.clone(), v));
                                continue;
                            }
                        }
                        return Err(Error::SolverFailure("malformed let in model".into()));
                    }
                    let result = eval(&items[2], env);
                    env.truncate(depth);
                    result
                }
                _ => Err(Error::SolverFailure(format!(
                    "unsupported model operator {head:?}"
                ))),
            }
        }
    }
}

fn expect_bool(v: Val) -> Result<bool> {
    match v {
        Val::Bool(b) => Ok(b),
        Val::Bv(_) => Err(Error::SolverFailure(
            "expected a boolean in model term".into(),
        )),
    }
}

fn eval_atom(atom: &str, env: &[(String, Val)]) -> Result<Val> {
    if atom == "true" {
        return Ok(Val::Bool(true));
    }
    if atom == "false" {
        return Ok(Val::Bool(false));
    }
    if let Some(bits) = atom.strip_prefix("#b") {
        let v = u64::from_str_radix(bits, 2)
            .map_err(|_| Error::SolverFailure(format!("bad bitvector literal {atom}")))?;
        return Ok(Val::Bv(v));
    }
    if let Some(hex) = atom.strip_prefix("#x") {
        let v = u64::from_str_radix(hex, 16)
            .map_err(|_| Error::SolverFailure(format!("bad bitvector literal {atom}")))?;
        return Ok(Val::Bv(v));
    }
    for (name, value) in env.iter().rev() {
        if name == atom {
            return Ok(*value);
        }
    }
    Err(Error::SolverFailure(format!(
        "unbound symbol {atom:?} in model"
    )))
}

fn eval_indexed_literal(items: &[Sexp]) -> Result<Val> {
    // (_ bvN width)
    if items.len() == 3 {
        if let Sexp::Atom(middle) = &items[1] {
            if let Some(num) = middle.strip_prefix("bv") {
                let v = num.parse::<u64>().map_err(|_| {
                    Error::SolverFailure(format!("bad bitvector literal {middle}"))
                })?;
                return Ok(Val::Bv(v));
            }
        }
    }
    Err(Error::SolverFailure("unsupported indexed literal".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::fixtures;

    #[test]
    fn singleton_script_has_no_pair_constraints() {
        let m = BinaryMatrix::from_rows(&[&[1]]);
        let script = SmtEncoding::new(&m, 1).script();
        assert_eq!(script.matches("(assert").count(), 1);
        assert!(script.contains("(assert (bvule (f (_ bv0 1)) (_ bv0 1)))"));
        assert!(script.ends_with("(check-sat)\n(get-model)\n"));
        assert!(!script.contains("distinct"));
    }

    #[test]
    fn encoding_is_byte_stable() {
        let m = fixtures::fooling_gap();
        assert_eq!(encode_smt2(&m, 3), encode_smt2(&m, 3));
    }

    fn encode_smt2(m: &BinaryMatrix, b: usize) -> String {
        SmtEncoding::new(m, b).script()
    }

    #[test]
    fn fooling_gap_widths_and_ranges() {
        // 7 cells -> 3 domain bits; bound 3 -> 2 range bits
        let m = fixtures::fooling_gap();
        let script = encode_smt2(&m, 3);
        assert!(script.contains("(declare-fun f ((_ BitVec 3)) (_ BitVec 2))"));
        assert_eq!(script.matches("bvule").count(), 7);
    }

    #[test]
    fn narrow_appends_exclusions() {
        let m = fixtures::fooling_gap();
        let mut enc = SmtEncoding::new(&m, 3);
        let before = enc.script();
        assert_eq!(enc.narrow(), 2);
        let after = enc.script();
        assert!(after.starts_with(before.trim_end_matches("(check-sat)\n(get-model)\n")));
        assert_eq!(
            after.matches("(assert (distinct (f (_ bv0 3)) (_ bv2 2)))").count(),
            1
        );
    }

    #[test]
    fn decode_ite_chain_model() {
        let model = r#"
        (
          (define-fun f ((x!0 (_ BitVec 2))) (_ BitVec 2)
            (ite (= x!0 #b00) #b00
            (ite (= x!0 #b01) #b01
              #b10)))
        )
        "#;
        assert_eq!(decode_model(model, 3).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn decode_constant_model() {
        let model = "((define-fun f ((a (_ BitVec 1))) (_ BitVec 1) #b0))";
        assert_eq!(decode_model(model, 2).unwrap(), vec![0, 0]);
    }

    #[test]
    fn decode_model_wrapper_and_let() {
        let model = r#"
        (model
          (define-fun f ((x!0 (_ BitVec 1))) (_ BitVec 2)
            (let ((c (= x!0 (_ bv1 1)))) (ite c (_ bv2 2) #b01)))
        )
        "#;
        assert_eq!(decode_model(model, 2).unwrap(), vec![1, 2]);
    }

    #[test]
    fn decode_missing_function_is_error() {
        assert!(decode_model("(model)", 1).is_err());
    }
}
