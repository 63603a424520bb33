//! Line-oriented input DSLs for algebras and boxes.
//!
//! Algebra files:
//!
//! ```text
//! algebra name
//! field QQ            # or: field Fp 32003
//! vertices 1 < 2 < 3
//! arrow alpha: 2 -> 1
//! relation beta*alpha + -1*delta*gamma
//! ```
//!
//! Box files add `dashed v: 1 --> 2` and `diff a = v` lines; grouplikes are
//! implicit, one per vertex. Paths compose right-to-left, `#` starts a
//! comment, unknown directives are rejected.

use crate::error::{QhError, Result};
use crate::presentation::{Arrow, PathExpr, Quiver};
use crate::scalar::{FieldCfg, Scalar};

/// Parsed algebra source prior to basis construction.
#[derive(Clone, Debug)]
pub struct AlgebraSource {
    pub name: String,
    pub field: Option<FieldCfg>,
    pub quiver: Quiver,
    pub relations: Vec<PathExpr>,
}

/// One letter of a differential word: a solid arrow or a dashed generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenRef {
    Solid(usize),
    Dashed(usize),
}

/// A linear combination of composable words in solid and dashed generators,
/// letters in application order.
pub type DiffExpr = Vec<(Scalar, Vec<GenRef>)>;

/// Parsed box input: solid part, dashed generators, differential data.
#[derive(Clone, Debug)]
pub struct BoxSpec {
    pub name: String,
    pub field: Option<FieldCfg>,
    pub quiver: Quiver,
    pub relations: Vec<PathExpr>,
    /// (name, src, tgt) per dashed generator
    pub dashed: Vec<Arrow>,
    /// differential of each solid arrow: words with exactly one dashed letter
    pub diff_solid: Vec<DiffExpr>,
    /// differential of each dashed generator: words with exactly two dashed letters
    pub diff_dashed: Vec<DiffExpr>,
}

fn err(line: usize, col: usize, msg: impl Into<String>) -> QhError {
    QhError::Parse { line, col, msg: msg.into() }
}

struct Raw<'a> {
    lineno: usize,
    directive: &'a str,
    rest: &'a str,
    rest_col: usize,
}

fn raw_lines(text: &str) -> Vec<Raw<'_>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let body = match line.find('#') {
            Some(p) => &line[..p],
            None => line,
        };
        let trimmed = body.trim();
        if trimmed.is_empty() {
            continue;
        }
        let (directive, rest) = match trimmed.split_once(char::is_whitespace) {
            Some((d, r)) => (d, r.trim()),
            None => (trimmed, ""),
        };
        let rest_col = line.find(rest).unwrap_or(0) + 1;
        out.push(Raw { lineno: i + 1, directive, rest, rest_col });
    }
    out
}

fn parse_field(rest: &str, lineno: usize) -> Result<FieldCfg> {
    let mut it = rest.split_whitespace();
    match it.next() {
        Some("QQ") => Ok(FieldCfg::Q),
        Some("Fp") => {
            let p: u64 = it
                .next()
                .ok_or_else(|| err(lineno, 1, "Fp needs a prime"))?
                .parse()
                .map_err(|_| err(lineno, 1, "invalid prime"))?;
            if p < 2 || (2..p).take_while(|d| d * d <= p).any(|d| p % d == 0) {
                return Err(err(lineno, 1, format!("{p} is not prime")));
            }
            Ok(FieldCfg::Fp(p))
        }
        _ => Err(err(lineno, 1, "field must be QQ or Fp <p>")),
    }
}

/// Parse a linear combination `c1*p1 + c2*p2 - p3` of paths; each path is
/// `a*b*c` read right-to-left. Returns terms with arrow-index sequences in
/// application order.
fn parse_path_combination(
    rest: &str,
    quiver: &Quiver,
    field: FieldCfg,
    lineno: usize,
    col: usize,
) -> Result<Vec<(Scalar, Vec<usize>)>> {
    // split on top-level + and - (no parentheses in this grammar)
    let mut terms: Vec<(i64, String)> = Vec::new();
    let mut sign = 1i64;
    let mut cur = String::new();
    for ch in rest.chars() {
        match ch {
            '+' => {
                if !cur.trim().is_empty() {
                    terms.push((sign, cur.trim().to_string()));
                }
                sign = 1;
                cur.clear();
            }
            '-' => {
                if !cur.trim().is_empty() {
                    terms.push((sign, cur.trim().to_string()));
                    sign = 1;
                }
                sign *= -1;
                cur.clear();
            }
            _ => cur.push(ch),
        }
    }
    if !cur.trim().is_empty() {
        terms.push((sign, cur.trim().to_string()));
    }
    if terms.is_empty() {
        return Err(err(lineno, col, "empty expression"));
    }

    let mut out = Vec::new();
    for (sgn, term) in terms {
        let factors: Vec<&str> = term.split('*').map(str::trim).collect();
        let mut coeff = field.from_i64(sgn);
        let mut arrows_rl = Vec::new();
        for f in factors {
            if f.is_empty() {
                return Err(err(lineno, col, "empty factor in path"));
            }
            if let Some(ai) = quiver.arrow_index(f) {
                arrows_rl.push(ai);
            } else if let Ok(n) = f.parse::<i64>() {
                coeff = &coeff * &field.from_i64(n);
            } else if let Some((num, den)) = f.split_once('/') {
                let n: i64 = num.trim().parse().map_err(|_| {
                    err(lineno, col, format!("unknown factor `{f}`"))
                })?;
                let d: i64 = den.trim().parse().map_err(|_| {
                    err(lineno, col, format!("unknown factor `{f}`"))
                })?;
                coeff = &coeff * &field.from_ratio(n, d);
            } else {
                return Err(err(lineno, col, format!("unknown arrow `{f}`")));
            }
        }
        if arrows_rl.is_empty() {
            return Err(err(lineno, col, "term contains no path"));
        }
        arrows_rl.reverse(); // written right-to-left, stored in application order
        out.push((coeff, arrows_rl));
    }
    Ok(out)
}

fn term_endpoints(quiver: &Quiver, path: &[usize], lineno: usize) -> Result<(usize, usize)> {
    let src = quiver.arrows[path[0]].src;
    let mut at = src;
    for &a in path {
        if quiver.arrows[a].src != at {
            return Err(err(lineno, 1, "path factors are not composable"));
        }
        at = quiver.arrows[a].tgt;
    }
    Ok((src, at))
}

fn combination_to_expr(
    quiver: &Quiver,
    terms: Vec<(Scalar, Vec<usize>)>,
    lineno: usize,
) -> Result<PathExpr> {
    let (src, tgt) = term_endpoints(quiver, &terms[0].1, lineno)?;
    for (_, p) in &terms[1..] {
        if term_endpoints(quiver, p, lineno)? != (src, tgt) {
            return Err(err(lineno, 1, "relation mixes non-parallel paths"));
        }
    }
    Ok(PathExpr { src, tgt, terms })
}

struct HeaderState {
    name: Option<String>,
    field: Option<FieldCfg>,
    vertices: Vec<String>,
    arrows: Vec<Arrow>,
}

fn parse_common<'a>(
    raw: &Raw<'a>,
    st: &mut HeaderState,
) -> Result<bool> {
    let lineno = raw.lineno;
    match raw.directive {
        "algebra" | "box" => {
            if raw.rest.is_empty() {
                return Err(err(lineno, 1, "missing name"));
            }
            st.name = Some(raw.rest.to_string());
            Ok(true)
        }
        "field" => {
            st.field = Some(parse_field(raw.rest, lineno)?);
            Ok(true)
        }
        "vertices" => {
            for label in raw.rest.split('<').map(str::trim) {
                if label.is_empty() {
                    return Err(err(lineno, raw.rest_col, "empty vertex label"));
                }
                if st.vertices.iter().any(|v| v == label) {
                    return Err(err(lineno, raw.rest_col, format!("duplicate vertex `{label}`")));
                }
                st.vertices.push(label.to_string());
            }
            Ok(true)
        }
        "arrow" => {
            let (name, spec) = raw
                .rest
                .split_once(':')
                .ok_or_else(|| err(lineno, raw.rest_col, "expected `arrow name: src -> tgt`"))?;
            let (s, t) = spec
                .split_once("->")
                .ok_or_else(|| err(lineno, raw.rest_col, "expected `src -> tgt`"))?;
            let name = name.trim().to_string();
            if name.is_empty() {
                return Err(err(lineno, raw.rest_col, "empty arrow name"));
            }
            if st.arrows.iter().any(|a| a.name == name) {
                return Err(err(lineno, raw.rest_col, format!("duplicate arrow `{name}`")));
            }
            let src = lookup_vertex(&st.vertices, s.trim(), lineno)?;
            let tgt = lookup_vertex(&st.vertices, t.trim(), lineno)?;
            st.arrows.push(Arrow { name, src, tgt });
            Ok(true)
        }
        _ => Ok(false),
    }
}

fn lookup_vertex(vertices: &[String], label: &str, lineno: usize) -> Result<usize> {
    vertices
        .iter()
        .position(|v| v == label)
        .ok_or_else(|| err(lineno, 1, format!("unknown vertex `{label}`")))
}

/// Parse an algebra file.
pub fn parse_algebra(text: &str) -> Result<AlgebraSource> {
    let mut st = HeaderState { name: None, field: None, vertices: vec![], arrows: vec![] };
    let mut relation_lines = Vec::new();
    for raw in raw_lines(text) {
        if parse_common(&raw, &mut st)? {
            continue;
        }
        match raw.directive {
            "relation" => relation_lines.push((raw.lineno, raw.rest_col, raw.rest.to_string())),
            other => {
                return Err(err(raw.lineno, 1, format!("unknown directive `{other}`")));
            }
        }
    }
    let quiver = Quiver { vertices: st.vertices, arrows: st.arrows };
    if quiver.vertices.is_empty() {
        return Err(err(0, 0, "no vertices declared"));
    }
    let field = st.field;
    let f = field.unwrap_or(FieldCfg::Q);
    let mut relations = Vec::new();
    for (lineno, col, rest) in relation_lines {
        let terms = parse_path_combination(&rest, &quiver, f, lineno, col)?;
        relations.push(combination_to_expr(&quiver, terms, lineno)?);
    }
    Ok(AlgebraSource {
        name: st.name.unwrap_or_else(|| "unnamed".into()),
        field,
        quiver,
        relations,
    })
}

/// Parse a box file: solid part plus dashed generators and differentials.
pub fn parse_box(text: &str) -> Result<BoxSpec> {
    let mut st = HeaderState { name: None, field: None, vertices: vec![], arrows: vec![] };
    let mut relation_lines = Vec::new();
    let mut dashed: Vec<Arrow> = Vec::new();
    let mut diff_lines = Vec::new();
    for raw in raw_lines(text) {
        if parse_common(&raw, &mut st)? {
            continue;
        }
        match raw.directive {
            "relation" => relation_lines.push((raw.lineno, raw.rest_col, raw.rest.to_string())),
            "dashed" => {
                let (name, spec) = raw.rest.split_once(':').ok_or_else(|| {
                    err(raw.lineno, raw.rest_col, "expected `dashed name: src --> tgt`")
                })?;
                let (s, t) = spec.split_once("-->").ok_or_else(|| {
                    err(raw.lineno, raw.rest_col, "expected `src --> tgt`")
                })?;
                let name = name.trim().to_string();
                if dashed.iter().any(|d| d.name == name)
                    || st.arrows.iter().any(|a| a.name == name)
                {
                    return Err(err(raw.lineno, raw.rest_col, format!("duplicate generator `{name}`")));
                }
                let src = lookup_vertex(&st.vertices, s.trim(), raw.lineno)?;
                let tgt = lookup_vertex(&st.vertices, t.trim(), raw.lineno)?;
                dashed.push(Arrow { name, src, tgt });
            }
            "diff" => diff_lines.push((raw.lineno, raw.rest_col, raw.rest.to_string())),
            other => {
                return Err(err(raw.lineno, 1, format!("unknown directive `{other}`")));
            }
        }
    }
    let quiver = Quiver { vertices: st.vertices, arrows: st.arrows };
    if quiver.vertices.is_empty() {
        return Err(err(0, 0, "no vertices declared"));
    }
    let field = st.field;
    let f = field.unwrap_or(FieldCfg::Q);
    let mut relations = Vec::new();
    for (lineno, col, rest) in relation_lines {
        let terms = parse_path_combination(&rest, &quiver, f, lineno, col)?;
        relations.push(combination_to_expr(&quiver, terms, lineno)?);
    }

    let mut diff_solid: Vec<DiffExpr> = vec![Vec::new(); quiver.arrows.len()];
    let mut diff_dashed: Vec<DiffExpr> = vec![Vec::new(); dashed.len()];
    for (lineno, col, rest) in diff_lines {
        let (gen, expr) = rest
            .split_once('=')
            .ok_or_else(|| err(lineno, col, "expected `diff gen = expr`"))?;
        let gen = gen.trim();
        let expr = expr.trim();
        let words = parse_diff_expr(expr, &quiver, &dashed, f, lineno, col)?;
        if let Some(ai) = quiver.arrow_index(gen) {
            check_diff_shape(&quiver, &dashed, &words, &quiver.arrows[ai], 1, lineno)?;
            diff_solid[ai] = words;
        } else if let Some(di) = dashed.iter().position(|d| d.name == gen) {
            check_diff_shape(&quiver, &dashed, &words, &dashed[di].clone(), 2, lineno)?;
            diff_dashed[di] = words;
        } else {
            return Err(err(lineno, col, format!("diff of unknown generator `{gen}`")));
        }
    }

    Ok(BoxSpec {
        name: st.name.unwrap_or_else(|| "unnamed".into()),
        field,
        quiver,
        relations,
        dashed,
        diff_solid,
        diff_dashed,
    })
}

fn parse_diff_expr(
    expr: &str,
    quiver: &Quiver,
    dashed: &[Arrow],
    field: FieldCfg,
    lineno: usize,
    col: usize,
) -> Result<DiffExpr> {
    if expr == "0" {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    let mut sign = 1i64;
    let mut cur = String::new();
    let mut terms: Vec<(i64, String)> = Vec::new();
    for ch in expr.chars() {
        match ch {
            '+' => {
                if !cur.trim().is_empty() {
                    terms.push((sign, cur.trim().to_string()));
                }
                sign = 1;
                cur.clear();
            }
            '-' => {
                if !cur.trim().is_empty() {
                    terms.push((sign, cur.trim().to_string()));
                    sign = 1;
                }
                sign *= -1;
                cur.clear();
            }
            _ => cur.push(ch),
        }
    }
    if !cur.trim().is_empty() {
        terms.push((sign, cur.trim().to_string()));
    }
    for (sgn, term) in terms {
        let mut coeff = field.from_i64(sgn);
        let mut word_rl = Vec::new();
        for f in term.split('*').map(str::trim) {
            if let Some(ai) = quiver.arrow_index(f) {
                word_rl.push(GenRef::Solid(ai));
            } else if let Some(di) = dashed.iter().position(|d| d.name == f) {
                word_rl.push(GenRef::Dashed(di));
            } else if let Ok(n) = f.parse::<i64>() {
                coeff = &coeff * &field.from_i64(n);
            } else {
                return Err(err(lineno, col, format!("unknown generator `{f}`")));
            }
        }
        if word_rl.is_empty() {
            return Err(err(lineno, col, "empty differential word"));
        }
        word_rl.reverse();
        out.push((coeff, word_rl));
    }
    Ok(out)
}

fn gen_endpoints(quiver: &Quiver, dashed: &[Arrow], g: GenRef) -> (usize, usize) {
    match g {
        GenRef::Solid(a) => (quiver.arrows[a].src, quiver.arrows[a].tgt),
        GenRef::Dashed(d) => (dashed[d].src, dashed[d].tgt),
    }
}

/// A differential word must be composable, parallel to the generator it
/// differentiates, and contain exactly `dashed_count` dashed letters.
fn check_diff_shape(
    quiver: &Quiver,
    dashed: &[Arrow],
    words: &DiffExpr,
    of: &Arrow,
    dashed_count: usize,
    lineno: usize,
) -> Result<()> {
    for (_, word) in words {
        let mut at = gen_endpoints(quiver, dashed, word[0]).0;
        if at != of.src {
            return Err(err(lineno, 1, "differential not parallel to its generator"));
        }
        let mut count = 0;
        for &g in word {
            let (s, t) = gen_endpoints(quiver, dashed, g);
            if s != at {
                return Err(err(lineno, 1, "differential word is not composable"));
            }
            at = t;
            if matches!(g, GenRef::Dashed(_)) {
                count += 1;
            }
        }
        if at != of.tgt {
            return Err(err(lineno, 1, "differential not parallel to its generator"));
        }
        if count != dashed_count {
            return Err(err(
                lineno,
                1,
                format!("differential word must contain exactly {dashed_count} dashed letter(s)"),
            ));
        }
    }
    Ok(())
}

fn print_terms<F: Fn(usize) -> String>(
    terms: &[(Scalar, Vec<usize>)],
    name_of: F,
) -> String {
    terms
        .iter()
        .map(|(c, p)| {
            let path = p.iter().rev().map(|&a| name_of(a)).collect::<Vec<_>>().join("*");
            if c.is_one() {
                path
            } else {
                format!("{c}*{path}")
            }
        })
        .collect::<Vec<_>>()
        .join(" + ")
}

/// Render an algebra source back to DSL text (parse . print = id).
pub fn print_algebra(src: &AlgebraSource) -> String {
    let mut out = String::new();
    out.push_str(&format!("algebra {}\n", src.name));
    if let Some(f) = src.field {
        out.push_str(&format!("field {f}\n"));
    }
    out.push_str(&format!("vertices {}\n", src.quiver.vertices.join(" < ")));
    for a in &src.quiver.arrows {
        out.push_str(&format!(
            "arrow {}: {} -> {}\n",
            a.name, src.quiver.vertices[a.src], src.quiver.vertices[a.tgt]
        ));
    }
    for r in &src.relations {
        out.push_str(&format!(
            "relation {}\n",
            print_terms(&r.terms, |a| src.quiver.arrows[a].name.clone())
        ));
    }
    out
}

/// Render a box spec back to DSL text (parse . print = id).
pub fn print_box(spec: &BoxSpec) -> String {
    let mut out = String::new();
    out.push_str(&format!("box {}\n", spec.name));
    if let Some(f) = spec.field {
        out.push_str(&format!("field {f}\n"));
    }
    out.push_str(&format!("vertices {}\n", spec.quiver.vertices.join(" < ")));
    for a in &spec.quiver.arrows {
        out.push_str(&format!(
            "arrow {}: {} -> {}\n",
            a.name, spec.quiver.vertices[a.src], spec.quiver.vertices[a.tgt]
        ));
    }
    for r in &spec.relations {
        out.push_str(&format!(
            "relation {}\n",
            print_terms(&r.terms, |a| spec.quiver.arrows[a].name.clone())
        ));
    }
    for d in &spec.dashed {
        out.push_str(&format!(
            "dashed {}: {} --> {}\n",
            d.name, spec.quiver.vertices[d.src], spec.quiver.vertices[d.tgt]
        ));
    }
    let gen_name = |g: GenRef| match g {
        GenRef::Solid(a) => spec.quiver.arrows[a].name.clone(),
        GenRef::Dashed(d) => spec.dashed[d].name.clone(),
    };
    let print_diff = |name: &str, e: &DiffExpr, out: &mut String| {
        let body = if e.is_empty() {
            "0".to_string()
        } else {
            e.iter()
                .map(|(c, w)| {
                    let word = w.iter().rev().map(|&g| gen_name(g)).collect::<Vec<_>>().join("*");
                    if c.is_one() {
                        word
                    } else {
                        format!("{c}*{word}")
                    }
                })
                .collect::<Vec<_>>()
                .join(" + ")
        };
        out.push_str(&format!("diff {name} = {body}\n"));
    };
    for (ai, e) in spec.diff_solid.iter().enumerate() {
        print_diff(&spec.quiver.arrows[ai].name, e, &mut out);
    }
    for (di, e) in spec.diff_dashed.iter().enumerate() {
        print_diff(&spec.dashed[di].name, e, &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const A1: &str = "\
algebra a1
field QQ
vertices 1 < 2
arrow alpha: 2 -> 1
arrow beta: 1 -> 2
relation beta*alpha
";

    #[test]
    fn parses_a1() {
        let src = parse_algebra(A1).unwrap();
        assert_eq!(src.quiver.vertices, vec!["1", "2"]);
        assert_eq!(src.quiver.arrows.len(), 2);
        assert_eq!(src.relations.len(), 1);
        // beta*alpha: alpha applied first
        assert_eq!(src.relations[0].terms[0].1, vec![0, 1]);
        assert_eq!((src.relations[0].src, src.relations[0].tgt), (1, 1));
    }

    #[test]
    fn no_arrows_is_semisimple_presentation() {
        let src = parse_algebra("algebra s\nvertices 1 < 2 < 3\n").unwrap();
        assert!(src.quiver.arrows.is_empty());
        assert!(src.relations.is_empty());
    }

    #[test]
    fn non_parallel_relation_rejected() {
        let text = "\
algebra bad
vertices 1 < 2
arrow a: 1 -> 2
arrow b: 2 -> 1
relation a*b + b*a
";
        assert!(parse_algebra(text).is_err());
    }

    #[test]
    fn unknown_directive_rejected() {
        assert!(parse_algebra("algebra x\nvertices 1\nfrobnicate yes\n").is_err());
    }

    #[test]
    fn dangling_arrow_reference() {
        let e = parse_algebra("algebra x\nvertices 1 < 2\nrelation a*a\n").unwrap_err();
        match e {
            QhError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other}"),
        }
    }

    const A2: &str = "\
box a2
field QQ
vertices 1 < 2
arrow a: 1 -> 2
dashed v: 1 --> 2
diff a = v
diff v = 0
";

    #[test]
    fn parses_a2_box() {
        let spec = parse_box(A2).unwrap();
        assert_eq!(spec.quiver.arrows.len(), 1);
        assert_eq!(spec.dashed.len(), 1);
        assert_eq!(spec.diff_solid[0], vec![(FieldCfg::Q.one(), vec![GenRef::Dashed(0)])]);
        assert!(spec.diff_dashed[0].is_empty());
    }

    #[test]
    fn zero_differential_box() {
        let text = "\
box b
vertices 1 < 2
arrow a: 1 -> 2
dashed v: 1 --> 2
";
        let spec = parse_box(text).unwrap();
        assert!(spec.diff_solid[0].is_empty());
    }

    #[test]
    fn diff_of_unknown_generator() {
        let text = "\
box b
vertices 1 < 2
arrow a: 1 -> 2
dashed v: 1 --> 2
diff v = w
";
        assert!(parse_box(text).is_err());
    }

    #[test]
    fn diff_shape_enforced() {
        // differential of a solid arrow must contain exactly one dashed letter
        let text = "\
box b
vertices 1 < 2
arrow a: 1 -> 2
dashed v: 1 --> 2
diff a = a
";
        assert!(parse_box(text).is_err());
    }

    #[test]
    fn algebra_roundtrip() {
        let src = parse_algebra(A1).unwrap();
        let printed = print_algebra(&src);
        let again = parse_algebra(&printed).unwrap();
        assert_eq!(src.quiver, again.quiver);
        assert_eq!(src.relations, again.relations);
        assert_eq!(src.name, again.name);
    }

    #[test]
    fn box_roundtrip() {
        let spec = parse_box(A2).unwrap();
        let printed = print_box(&spec);
        let again = parse_box(&printed).unwrap();
        assert_eq!(spec.quiver, again.quiver);
        assert_eq!(spec.dashed, again.dashed);
        assert_eq!(spec.diff_solid, again.diff_solid);
        assert_eq!(spec.diff_dashed, again.diff_dashed);
    }

    #[test]
    fn coefficients_parse() {
        let text = "\
algebra c
vertices 1 < 2 < 3
arrow a: 1 -> 2
arrow b: 2 -> 3
arrow c: 1 -> 3
arrow d: 1 -> 3
relation b*a - 2*c + 1/2*d
";
        let src = parse_algebra(text).unwrap();
        let t = &src.relations[0].terms;
        assert_eq!(t.len(), 3);
        assert_eq!(t[1].0, FieldCfg::Q.from_i64(-2));
        assert_eq!(t[2].0, FieldCfg::Q.from_ratio(1, 2));
    }
}
