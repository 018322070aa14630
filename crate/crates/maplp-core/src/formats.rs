//! Text formats: the native model document (lossless, exact rationals) and
//! the UAI MARKOV reader.
//!
//! Native documents are line-oriented; `#` starts a comment. A document is
//! a `model <n> <L>` header, optional `meta <key> <value>` lines, one or
//! more factor blocks (`factor <sites...>` followed by `L^k` values),
//! and optional trailing sections: `marginals <prob|delta>` with `table`
//! blocks, and `assignment <labels...>`. Values may be integers, decimals,
//! or rationals `p/q`; all three parse exactly. Canonical serialization
//! orders scopes lexicographically and emits little-endian tables, so
//! `parse(serialize(d)) == d`.
//!
//! UAI MARKOV tables list the *last* scope variable fastest; parsing
//! re-indexes into the native convention (first sorted site fastest).
//! Tables are read as costs verbatim; any probability-to-cost transform is
//! the caller's business.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::decode::MarginalKind;
use crate::hypersites::Hypersite;
use crate::model::{FactorTable, Model, ModelError};
use crate::scalar::{Rat, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: {source}")]
    BadModel {
        line: usize,
        #[source]
        source: ModelError,
    },
}

fn syntax(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Syntax { line, msg: msg.into() }
}

/// Per-scope marginal tables as stored in a document.
pub type MarginalTables = Vec<(Hypersite, Vec<Rat>)>;

/// A parsed native document: the model plus optional attachments.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub meta: Vec<(String, String)>,
    pub model: Model<Rat>,
    pub marginals: Option<(MarginalKind, MarginalTables)>,
    pub assignment: Option<Vec<usize>>,
}

impl Document {
    pub fn bare(model: Model<Rat>) -> Self {
        Self { meta: Vec::new(), model, marginals: None, assignment: None }
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

/// Exact parse of an integer, decimal, scientific, or `p/q` literal.
pub fn parse_number(token: &str) -> Option<Rat> {
    if let Some((num, den)) = token.split_once('/') {
        let n: BigInt = num.parse().ok()?;
        let d: BigInt = den.parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rat::new(n, d));
    }
    let (mantissa, exp) = match token.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().ok()?),
        None => (token, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let negative = int_part.starts_with('-');
    let digits: String =
        format!("{}{}", int_part.trim_start_matches(['+', '-']), frac_part);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let mut value = Rat::from_integer(digits.parse::<BigInt>().ok()?);
    if negative {
        value = -value;
    }
    let shift = exp - frac_part.len() as i32;
    let ten = Rat::from_integer(BigInt::from(10));
    let scale = num_traits::pow::pow(ten, shift.unsigned_abs() as usize);
    Some(if shift >= 0 { value * scale } else { value / scale })
}

/// Renders a rational losslessly, preferring the shortest of integer,
/// decimal, or `p/q` form.
pub fn render_number(v: &Rat) -> String {
    let denom = v.denom();
    if denom.is_one() {
        return v.numer().to_string();
    }
    // Exact decimal form exists iff the denominator is 2^a * 5^b.
    let (mut a, mut b) = (0u32, 0u32);
    let mut rest = denom.clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    while (&rest % &two).is_zero() {
        rest /= &two;
        a += 1;
    }
    while (&rest % &five).is_zero() {
        rest /= &five;
        b += 1;
    }
    let digits = a.max(b);
    if rest.is_one() && digits <= 12 {
        let scaled = (v
            * num_traits::pow::pow(Rat::from_integer(BigInt::from(10)), digits as usize))
        .numer()
        .clone();
        let sign = if scaled.is_negative() { "-" } else { "" };
        let s = scaled.abs().to_string();
        let s = format!("{:0>width$}", s, width = digits as usize + 1);
        let (int_part, frac_part) = s.split_at(s.len() - digits as usize);
        return format!("{sign}{int_part}.{frac_part}");
    }
    format!("{}/{}", v.numer(), v.denom())
}

/// Line-and-token cursor over a native document.
struct Lines<'a> {
    tokens: Vec<(usize, Vec<&'a str>)>,
    pos: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let tokens = text
            .lines()
            .enumerate()
            .map(|(i, line)| {
                let body = line.split('#').next().unwrap_or("");
                (i + 1, body.split_whitespace().collect::<Vec<_>>())
            })
            .filter(|(_, t)| !t.is_empty())
            .collect();
        Self { tokens, pos: 0 }
    }

    fn peek(&self) -> Option<&(usize, Vec<&'a str>)> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<&(usize, Vec<&'a str>)> {
        let item = self.tokens.get(self.pos);
        if item.is_some() {
            self.pos += 1;
        }
        item
    }

    fn last_line(&self) -> usize {
        self.tokens.last().map(|(l, _)| *l).unwrap_or(0)
    }
}

fn parse_usize(tok: &str, line: usize, what: &str) -> Result<usize, FormatError> {
    tok.parse().map_err(|_| syntax(line, format!("expected {what}, got `{tok}`")))
}

/// Reads `count` numeric values starting on the cursor's next lines.
fn read_values(lines: &mut Lines, count: usize, what: &str) -> Result<Vec<Rat>, FormatError> {
    let mut values = Vec::with_capacity(count);
    while values.len() < count {
        let Some((line, toks)) = lines.peek().cloned() else {
            return Err(syntax(
                lines.last_line(),
                format!("unexpected end of file: {what} needs {count} values, got {}", values.len()),
            ));
        };
        if toks.first().is_some_and(|t| {
            matches!(*t, "factor" | "table" | "marginals" | "assignment" | "meta" | "model")
        }) {
            return Err(syntax(line, format!("{what} needs {count} values, got {}", values.len())));
        }
        lines.next();
        for tok in toks {
            if values.len() == count {
                return Err(syntax(line, format!("{what} has more than {count} values")));
            }
            values
                .push(parse_number(tok).ok_or_else(|| syntax(line, format!("bad number `{tok}`")))?);
        }
    }
    Ok(values)
}

fn parse_scope(toks: &[&str], line: usize, num_sites: usize) -> Result<Hypersite, FormatError> {
    let sites = toks
        .iter()
        .map(|t| parse_usize(t, line, "site index"))
        .collect::<Result<Vec<_>, _>>()?;
    if sites.iter().any(|&s| s == 0 || s > num_sites) {
        return Err(syntax(line, format!("site index out of range 1..={num_sites}")));
    }
    Hypersite::new(sites).map_err(|e| syntax(line, format!("bad scope: {e}")))
}

pub fn parse_native(text: &str) -> Result<Document, FormatError> {
    let mut lines = Lines::new(text);
    let (hline, htoks) = lines.next().ok_or_else(|| syntax(1, "empty document"))?.clone();
    if htoks[0] != "model" || htoks.len() != 3 {
        return Err(syntax(hline, "expected header `model <sites> <labels>`"));
    }
    let num_sites = parse_usize(htoks[1], hline, "site count")?;
    let num_labels = parse_usize(htoks[2], hline, "label count")?;

    let mut meta = Vec::new();
    let mut factors: Vec<FactorTable<Rat>> = Vec::new();
    let mut marginals: Option<(MarginalKind, MarginalTables)> = None;
    let mut assignment: Option<Vec<usize>> = None;
    let mut model_line = hline;

    while let Some((line, toks)) = lines.peek().cloned() {
        match toks[0] {
            "meta" => {
                lines.next();
                if toks.len() < 2 {
                    return Err(syntax(line, "meta needs a key"));
                }
                meta.push((toks[1].to_string(), toks[2..].join(" ")));
            }
            "factor" => {
                lines.next();
                let scope = parse_scope(&toks[1..], line, num_sites)?;
                let count = crate::model::table_len(num_labels, scope.len())
                    .map_err(|e| syntax(line, e.to_string()))?;
                let values = read_values(&mut lines, count, "factor table")?;
                factors.push(
                    FactorTable::new(scope, values)
                        .map_err(|e| FormatError::BadModel { line, source: e })?,
                );
                model_line = line;
            }
            "marginals" => {
                lines.next();
                let kind = match toks.get(1) {
                    Some(&"prob") => MarginalKind::Probability,
                    Some(&"delta") => MarginalKind::Delta,
                    _ => {
                        return Err(syntax(line, "expected `marginals prob` or `marginals delta`"))
                    }
                };
                let mut tables = Vec::new();
                while let Some((tline, ttoks)) = lines.peek().cloned() {
                    if ttoks[0] != "table" {
                        break;
                    }
                    lines.next();
                    let scope = parse_scope(&ttoks[1..], tline, num_sites)?;
                    let count = crate::model::table_len(num_labels, scope.len())
                        .map_err(|e| syntax(tline, e.to_string()))?;
                    let values = read_values(&mut lines, count, "marginal table")?;
                    tables.push((scope, values));
                }
                if tables.is_empty() {
                    return Err(syntax(line, "marginals section has no tables"));
                }
                marginals = Some((kind, tables));
            }
            "assignment" => {
                lines.next();
                if toks.len() != num_sites + 1 {
                    return Err(syntax(line, format!("assignment needs {num_sites} labels")));
                }
                let labels = toks[1..]
                    .iter()
                    .map(|t| parse_usize(t, line, "label"))
                    .collect::<Result<Vec<_>, _>>()?;
                if labels.iter().any(|&l| l >= num_labels) {
                    return Err(syntax(line, format!("label out of range 0..{num_labels}")));
                }
                assignment = Some(labels);
            }
            other => return Err(syntax(line, format!("unexpected directive `{other}`"))),
        }
    }

    let model = Model::new(num_sites, num_labels, factors)
        .map_err(|e| FormatError::BadModel { line: model_line, source: e })?;
    Ok(Document { meta, model, marginals, assignment })
}

pub fn serialize_native(doc: &Document) -> String {
    let mut out = String::new();
    out.push_str(&format!("model {} {}\n", doc.model.num_sites(), doc.model.num_labels()));
    for (k, v) in &doc.meta {
        out.push_str(&format!("meta {k} {v}\n"));
    }
    for factor in doc.model.factors() {
        out.push_str("factor");
        for s in factor.scope().sites() {
            out.push_str(&format!(" {s}"));
        }
        out.push('\n');
        out.push_str(&render_row(factor.values()));
    }
    if let Some((kind, tables)) = &doc.marginals {
        out.push_str(&render_marginals_section(*kind, tables));
    }
    if let Some(labels) = &doc.assignment {
        out.push_str("assignment");
        for l in labels {
            out.push_str(&format!(" {l}"));
        }
        out.push('\n');
    }
    out
}

/// The `marginals`-section text on its own, as written by
/// [`serialize_native`]; the CLI also prints it directly after value lines.
pub fn render_marginals_section(kind: MarginalKind, tables: &[(Hypersite, Vec<Rat>)]) -> String {
    let mut out = String::new();
    out.push_str(match kind {
        MarginalKind::Probability => "marginals prob\n",
        MarginalKind::Delta => "marginals delta\n",
    });
    for (scope, values) in tables {
        out.push_str("table");
        for s in scope.sites() {
            out.push_str(&format!(" {s}"));
        }
        out.push('\n');
        out.push_str(&render_row(values));
    }
    out
}

fn render_row(values: &[Rat]) -> String {
    let mut line = values.iter().map(render_number).collect::<Vec<_>>().join(" ");
    line.push('\n');
    line
}

/// UAI MARKOV reader. Scopes may list variables in any order; tables are
/// re-indexed from last-variable-fastest to the native convention. All
/// variables must share one cardinality.
pub fn parse_uai(text: &str) -> Result<Model<Rat>, FormatError> {
    let mut toks: Vec<(usize, &str)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        for t in line.split_whitespace() {
            toks.push((i + 1, t));
        }
    }
    let mut pos = 0usize;
    let last_line = toks.last().map(|(l, _)| *l).unwrap_or(1);
    let mut take = |what: &str| -> Result<(usize, &str), FormatError> {
        let item = toks.get(pos).copied();
        pos += 1;
        item.ok_or_else(|| syntax(last_line, format!("unexpected end of file, expected {what}")))
    };

    let (mline, magic) = take("preamble `MARKOV`")?;
    if !magic.eq_ignore_ascii_case("MARKOV") {
        return Err(syntax(mline, format!("expected preamble `MARKOV`, got `{magic}`")));
    }
    let (nline, ntok) = take("variable count")?;
    let num_sites = parse_usize(ntok, nline, "variable count")?;
    if num_sites == 0 {
        return Err(syntax(nline, "variable count must be positive"));
    }
    let mut num_labels = None;
    for i in 0..num_sites {
        let (cline, ctok) = take("variable cardinality")?;
        let card = parse_usize(ctok, cline, "cardinality")?;
        match num_labels {
            None => num_labels = Some(card),
            Some(l) if l != card => {
                return Err(syntax(
                    cline,
                    format!("mixed cardinalities unsupported: variable {i} has {card}, expected {l}"),
                ));
            }
            _ => {}
        }
    }
    let num_labels = num_labels.unwrap();
    if num_labels < 2 {
        return Err(syntax(nline, format!("label count must be at least 2, got {num_labels}")));
    }

    let (fline, ftok) = take("factor count")?;
    let num_factors = parse_usize(ftok, fline, "factor count")?;
    if num_factors == 0 {
        return Err(syntax(fline, "factor count must be positive"));
    }
    let mut scopes: Vec<(usize, Vec<usize>)> = Vec::with_capacity(num_factors);
    for f in 0..num_factors {
        let (aline, atok) = take("factor arity")?;
        let arity = parse_usize(atok, aline, "factor arity")?;
        if arity == 0 {
            return Err(syntax(aline, format!("factor {f} has arity 0")));
        }
        let mut vars = Vec::with_capacity(arity);
        for _ in 0..arity {
            let (vline, vtok) = take("variable index")?;
            let v = parse_usize(vtok, vline, "variable index")?;
            if v >= num_sites {
                return Err(syntax(vline, format!("variable index {v} out of range 0..{num_sites}")));
            }
            if vars.contains(&(v + 1)) {
                return Err(syntax(vline, format!("factor {f} repeats variable {v}")));
            }
            vars.push(v + 1);
        }
        scopes.push((aline, vars));
    }

    let mut factors = Vec::with_capacity(num_factors);
    for (f, (sline, listed)) in scopes.iter().enumerate() {
        let (cline, ctok) = take("table entry count")?;
        let count = parse_usize(ctok, cline, "table entry count")?;
        let expected = crate::model::table_len(num_labels, listed.len())
            .map_err(|e| syntax(cline, e.to_string()))?;
        if count != expected {
            return Err(syntax(
                cline,
                format!("factor {f}: table declares {count} entries, scope needs {expected}"),
            ));
        }
        let mut uai_values = Vec::with_capacity(count);
        for k in 0..count {
            let (vline, vtok) = take("table entry").map_err(|_| {
                syntax(last_line, format!("factor {f}: table truncated at entry {k} of {count}"))
            })?;
            let v = parse_number(vtok)
                .ok_or_else(|| syntax(vline, format!("factor {f}: bad table entry `{vtok}`")))?;
            uai_values.push(v);
        }
        let scope = Hypersite::from_unsorted(listed.clone())
            .map_err(|e| syntax(*sline, e.to_string()))?;
        // UAI order: last listed variable fastest. Walk every UAI index,
        // recover per-variable labels, re-encode in sorted-scope order.
        let arity = listed.len();
        let mut values = vec![<Rat as Scalar>::zero(); count];
        for (uai_idx, v) in uai_values.into_iter().enumerate() {
            let mut rem = uai_idx;
            let mut labels_by_listed = vec![0usize; arity];
            for j in (0..arity).rev() {
                labels_by_listed[j] = rem % num_labels;
                rem /= num_labels;
            }
            let cfg: Vec<usize> = scope
                .sites()
                .iter()
                .map(|site| {
                    let j = listed.iter().position(|l| l == site).unwrap();
                    labels_by_listed[j]
                })
                .collect();
            values[crate::model::encode_config(&cfg, num_labels)] = v;
        }
        factors.push(
            FactorTable::new(scope, values)
                .map_err(|e| FormatError::BadModel { line: *sline, source: e })?,
        );
    }
    if let Some((l, t)) = toks.get(pos) {
        return Err(syntax(*l, format!("trailing content `{t}` after factor tables")));
    }
    Model::new(num_sites, num_labels, factors)
        .map_err(|e| FormatError::BadModel { line: fline, source: e })
}

/// Stable 64-bit FNV-1a fingerprint of a text blob; used to tag
/// certificates with the instance they describe.
pub fn fingerprint(text: &str) -> String {
    let mut hash: u64 = 0xcbf29ce484222325;
    for b in text.bytes() {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    format!("{hash:016x}")
}

/// Fingerprint of a model's canonical serialization.
pub fn model_fingerprint(model: &Model<Rat>) -> String {
    fingerprint(&serialize_native(&Document::bare(model.clone())))
}

/// Rebuilds a parsed model with another scalar type.
pub fn model_to_scalar<T: Scalar>(m: &Model<Rat>) -> Model<T> {
    let factors = m
        .factors()
        .iter()
        .map(|f| {
            FactorTable::new(f.scope().clone(), f.values().iter().map(T::from_rat).collect())
                .expect("table shape preserved")
        })
        .collect();
    Model::new(m.num_sites(), m.num_labels(), factors).expect("model shape preserved")
}

/// Display adapter for assignments in CLI output: space-separated labels.
pub struct AssignmentDisplay<'a>(pub &'a [usize]);

impl fmt::Display for AssignmentDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Assignment;

    fn m1_text() -> &'static str {
        "model 3 2\nfactor 1 2\n0 1 1 0\nfactor 2 3\n0 1 1 0\n"
    }

    #[test]
    fn native_round_trip_is_identity() {
        let doc = parse_native(m1_text()).unwrap();
        let text = serialize_native(&doc);
        assert_eq!(text, m1_text());
        assert_eq!(parse_native(&text).unwrap(), doc);
    }

    #[test]
    fn rationals_survive_round_trip() {
        let text = "model 2 2\nfactor 1 2\n1/3 -2/7 0.25 3\n";
        let doc = parse_native(text).unwrap();
        let third = Rat::new(BigInt::from(1), BigInt::from(3));
        assert_eq!(doc.model.factors()[0].values()[0], third);
        let rendered = serialize_native(&doc);
        assert_eq!(parse_native(&rendered).unwrap(), doc);
        assert!(rendered.contains("1/3"));
        assert!(rendered.contains("0.25"));
    }

    #[test]
    fn sections_round_trip() {
        let text = "model 2 2\nmeta kind test\nfactor 1 2\n0 1 1 0\nmarginals delta\ntable 1 2\n0.5 -0.5 0 0\nassignment 0 1\n";
        let doc = parse_native(text).unwrap();
        assert_eq!(doc.meta_value("kind"), Some("test"));
        assert!(matches!(doc.marginals, Some((MarginalKind::Delta, _))));
        assert_eq!(doc.assignment, Some(vec![0, 1]));
        assert_eq!(serialize_native(&doc), text);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases: Vec<(&str, usize)> = vec![
            ("", 1),
            ("model 2\n", 1),
            ("model 2 2\nfactor 1 5\n0 1 1 0\n", 2),
            ("model 2 2\nfactor 1 2\n0 1 x 0\n", 3),
            ("model 2 2\nfactor 1 2\n0 1\nassignment 0 0\n", 4),
            ("model 2 2\nfactor 1 2\n0 1 1 0\nassignment 0 2\n", 4),
            ("model 2 2\nfactor 1 2\n0 1 1 0\nwhatever\n", 4),
        ];
        for (text, line) in cases {
            match parse_native(text) {
                Err(FormatError::Syntax { line: l, .. })
                | Err(FormatError::BadModel { line: l, .. }) => {
                    assert_eq!(l, line, "for input {text:?}");
                }
                Ok(_) => panic!("expected error for {text:?}"),
            }
        }
    }

    #[test]
    fn uai_minimal_single_variable() {
        let text = "MARKOV\n1\n2\n1\n1 0\n2\n0.5 3\n";
        let m = parse_uai(text).unwrap();
        assert_eq!(m.num_sites(), 1);
        assert_eq!(m.num_labels(), 2);
        assert_eq!(m.factors()[0].values()[1], Rat::from_int(3));
    }

    #[test]
    fn uai_reindexes_tables() {
        // Scope listed as (0, 1), entries 10 20 30 40 in UAI order
        // (x0,x1) = 00, 01, 10, 11. Native order is 00, 10, 01, 11.
        let text = "MARKOV\n2\n2 2\n1\n2 0 1\n4\n10 20 30 40\n";
        let m = parse_uai(text).unwrap();
        let expected: Vec<Rat> = [10, 30, 20, 40].iter().map(|&v| Rat::from_int(v)).collect();
        assert_eq!(m.factors()[0].values(), expected.as_slice());
    }

    #[test]
    fn uai_handles_permuted_scope_lists() {
        // Scope listed as (1, 0): the UAI index varies x0 fastest, so the
        // layout already matches the native one for the sorted scope.
        let text = "MARKOV\n2\n2 2\n1\n2 1 0\n4\n10 20 30 40\n";
        let m = parse_uai(text).unwrap();
        let expected: Vec<Rat> = [10, 20, 30, 40].iter().map(|&v| Rat::from_int(v)).collect();
        assert_eq!(m.factors()[0].values(), expected.as_slice());
    }

    #[test]
    fn uai_round_trip_preserves_evaluation() {
        let text = "MARKOV\n3\n2 2 2\n2\n2 0 1\n2 2 1\n4\n0 1 1 0\n4\n1 2 3 4\n";
        let m = parse_uai(text).unwrap();
        let doc = Document::bare(m.clone());
        let re = parse_native(&serialize_native(&doc)).unwrap().model;
        for idx in 0..8 {
            let x = Assignment::new(crate::model::decode_config(idx, 2, 3));
            assert_eq!(m.evaluate(&x).unwrap(), re.evaluate(&x).unwrap());
        }
    }

    #[test]
    fn uai_rejects_malformed_documents() {
        let cases: Vec<(&str, usize)> = vec![
            ("BAYES\n1\n2\n1\n1 0\n2\n1 2\n", 1),           // wrong preamble
            ("MARKOV\n2\n2 3\n1\n2 0 1\n4\n1 2 3 4\n", 3),  // mixed cardinality
            ("MARKOV\n2\n2 2\n1\n2 0 5\n4\n1 2 3 4\n", 5),  // variable out of range
            ("MARKOV\n2\n2 2\n1\n2 0 0\n4\n1 2 3 4\n", 5),  // repeated variable
            ("MARKOV\n2\n2 2\n1\n2 0 1\n3\n1 2 3\n", 6),    // wrong entry count
            ("MARKOV\n2\n2 2\n1\n2 0 1\n4\n1 2 3\n", 7),    // truncated table
            ("MARKOV\n2\n2 2\n1\n2 0 1\n4\n1 2 3 zz\n", 7), // non-numeric entry
        ];
        for (text, line) in cases {
            match parse_uai(text) {
                Err(FormatError::Syntax { line: l, .. })
                | Err(FormatError::BadModel { line: l, .. }) => {
                    assert_eq!(l, line, "for input {text:?}");
                }
                Ok(_) => panic!("expected error for {text:?}"),
            }
        }
    }

    #[test]
    fn uai_sums_duplicate_scopes() {
        let text = "MARKOV\n2\n2 2\n2\n2 0 1\n2 0 1\n4\n1 1 1 1\n4\n2 2 2 2\n";
        let m = parse_uai(text).unwrap();
        assert_eq!(m.factors().len(), 1);
        assert_eq!(m.factors()[0].values()[0], Rat::from_int(3));
    }

    #[test]
    fn number_rendering_is_lossless() {
        let samples = ["0", "-7", "1/3", "-22/7", "0.125", "3.14", "1e-3", "2.5e2"];
        for s in samples {
            let v = parse_number(s).unwrap();
            let rendered = render_number(&v);
            assert_eq!(parse_number(&rendered).unwrap(), v, "{s} -> {rendered}");
        }
    }
}
