//! Moves top-level script code into a synthetic function so that per-method
//! metrics see it.
//!
//! Function and class definitions and import statements stay at module
//! level, unless a class body, decorator, default or annotation reads a
//! name that moved code binds. Every other top-level statement moves, in
//! order, into
//! `wrapped_artificially()`, declared after the kept definitions and called
//! once at the end of the module. Names the moved code binds are declared
//! `global` when kept code could observe them, so module scoping is preserved.

use std::collections::BTreeSet;

use rustpython_parser::ast::{self, Ranged};
use rustpython_parser::Tok;

use crate::source::{self, LineIndex, SpannedTok, SyntaxError};

pub const WRAPPER_NAME: &str = "wrapped_artificially";

const INDENT: &str = "    ";

/// Builtins whose behaviour depends on the scope they run in.
const SCOPE_INTROSPECTION: &[&str] = &["globals", "locals", "vars", "eval", "exec"];

fn is_kept(stmt: &ast::Stmt) -> bool {
    matches!(
        stmt,
        ast::Stmt::FunctionDef(_)
            | ast::Stmt::AsyncFunctionDef(_)
            | ast::Stmt::ClassDef(_)
            | ast::Stmt::Import(_)
            | ast::Stmt::ImportFrom(_)
    )
}

fn is_wrapper_call(stmt: &ast::Stmt) -> bool {
    let ast::Stmt::Expr(e) = stmt else {
        return false;
    };
    let ast::Expr::Call(call) = e.value.as_ref() else {
        return false;
    };
    call.args.is_empty()
        && call.keywords.is_empty()
        && matches!(call.func.as_ref(), ast::Expr::Name(n) if n.id.as_str() == WRAPPER_NAME)
}

fn defines_wrapper(stmt: &ast::Stmt) -> bool {
    matches!(stmt, ast::Stmt::FunctionDef(f) if f.name.as_str() == WRAPPER_NAME)
}

fn decorator_start(stmt: &ast::Stmt) -> Option<usize> {
    let decorators = match stmt {
        ast::Stmt::FunctionDef(f) => &f.decorator_list,
        ast::Stmt::AsyncFunctionDef(f) => &f.decorator_list,
        ast::Stmt::ClassDef(c) => &c.decorator_list,
        _ => return None,
    };
    decorators
        .iter()
        .map(|d| source::offset(d.range().start()))
        .min()
}

struct Segment {
    text: String,
    first_line: usize,
    kept: bool,
}

/// Wraps top-level code; returns the source unchanged when there is nothing
/// to wrap or it is already wrapped.
pub fn wrap_top_level(src: &str) -> Result<String, SyntaxError> {
    let suite = source::parse_module(src)?;
    let moved_count = suite.iter().filter(|s| !is_kept(s)).count();
    if moved_count == 0 {
        return Ok(src.to_string());
    }
    let already = moved_count == 1
        && suite.iter().any(defines_wrapper)
        && suite.iter().filter(|s| !is_kept(s)).all(is_wrapper_call);
    if already {
        return Ok(src.to_string());
    }

    let tokens = source::tokens(src)?;
    let moved = moved_statements(&suite, &tokens);
    let index = LineIndex::new(src);
    let continuation: BTreeSet<usize> = source::string_continuation_lines(src)?.into_iter().collect();

    // (start offset of the statement's first line incl. decorators, end offset)
    let bounds: Vec<(usize, usize)> = suite
        .iter()
        .map(|s| {
            let start = source::offset(s.range().start());
            let start = decorator_start(s).map_or(start, |d| {
                index.line_start(index.line_of(d))
            });
            (start, source::offset(s.range().end()))
        })
        .collect();

    let mut segments = Vec::with_capacity(suite.len());
    for i in 0..suite.len() {
        let (start, end) = bounds[i];
        let start_line = index.line_of(start);
        let seg_start = if i == 0 {
            0
        } else {
            let prev_end_line = index.last_line_of(bounds[i - 1].0, bounds[i - 1].1);
            if prev_end_line == start_line {
                start
            } else {
                index.line_start(prev_end_line + 1)
            }
        };
        let end_line = index.last_line_of(start, end);
        let seg_end = match bounds.get(i + 1) {
            Some(&(next_start, _)) if index.line_of(next_start) == end_line => end,
            Some(_) => {
                if end_line < index.line_count() {
                    index.line_start(end_line + 1)
                } else {
                    src.len()
                }
            }
            None => src.len(),
        };
        let mut text = src[seg_start..seg_end].to_string();
        if !text.ends_with('\n') {
            text.push('\n');
        }
        segments.push(Segment {
            text,
            first_line: index.line_of(seg_start),
            kept: !moved[i],
        });
    }

    let globals = globals_needed(&tokens, &suite, &moved, &bounds);

    let mut kept = String::new();
    let mut body = String::new();
    for (seg, stmt) in segments.iter().zip(&suite) {
        if seg.kept {
            kept.push_str(&seg.text);
        } else if !matches!(stmt, ast::Stmt::Global(_)) {
            // A module-level `global` is a no-op and would be illegal after
            // a use inside the wrapper.
            body.push_str(&indent_segment(seg, &continuation));
        }
    }

    let mut out = String::new();
    let kept = kept.trim_end().trim_start_matches('\n');
    if !kept.is_empty() {
        out.push_str(kept);
        out.push_str("\n\n\n");
    }
    out.push_str(&format!("def {WRAPPER_NAME}():\n"));
    if !globals.is_empty() {
        let names: Vec<&str> = globals.iter().map(String::as_str).collect();
        out.push_str(&format!("{INDENT}global {}\n", names.join(", ")));
    }
    let body = body.trim_end();
    let body = body.trim_start_matches('\n');
    if body.trim().is_empty() {
        out.push_str(INDENT);
        out.push_str("pass");
    } else {
        out.push_str(body);
    }
    out.push_str(&format!("\n\n\n{WRAPPER_NAME}()\n"));

    source::parse_module(&out)?;
    Ok(out)
}

fn indent_segment(seg: &Segment, continuation: &BTreeSet<usize>) -> String {
    let mut out = String::with_capacity(seg.text.len() + 64);
    for (i, line) in seg.text.split_inclusive('\n').enumerate() {
        let number = seg.first_line + i;
        if !continuation.contains(&number) && !line.trim().is_empty() {
            out.push_str(INDENT);
        }
        if line.trim().is_empty() && !continuation.contains(&number) {
            out.push('\n');
        } else {
            out.push_str(line);
        }
    }
    out
}

fn names_in(tokens: &[SpannedTok], ranges: &[(usize, usize)]) -> BTreeSet<String> {
    tokens
        .iter()
        .filter(|t| ranges.iter().any(|&(a, b)| a <= t.start && t.start < b))
        .filter_map(|t| match &t.tok {
            Tok::Name { name } => Some(name.clone()),
            _ => None,
        })
        .collect()
}

fn span(e: &ast::Expr) -> (usize, usize) {
    (source::offset(e.range().start()), source::offset(e.range().end()))
}

fn function_header_exprs<'a>(
    decorators: &'a [ast::Expr],
    args: &'a ast::Arguments,
    returns: Option<&'a ast::Expr>,
) -> Vec<&'a ast::Expr> {
    let mut out: Vec<&ast::Expr> = decorators.iter().collect();
    let with_defaults = args.posonlyargs.iter().chain(&args.args).chain(&args.kwonlyargs);
    for a in with_defaults {
        out.extend(a.default.as_deref());
        out.extend(a.def.annotation.as_deref());
    }
    for a in args.vararg.iter().chain(&args.kwarg) {
        out.extend(a.annotation.as_deref());
    }
    out.extend(returns);
    out
}

/// Source ranges evaluated when a kept statement runs: decorators, defaults
/// and annotations of a function, the whole statement for a class.
fn definition_time_ranges(stmt: &ast::Stmt) -> Vec<(usize, usize)> {
    match stmt {
        ast::Stmt::FunctionDef(f) => function_header_exprs(&f.decorator_list, &f.args, f.returns.as_deref())
            .into_iter()
            .map(span)
            .collect(),
        ast::Stmt::AsyncFunctionDef(f) => function_header_exprs(&f.decorator_list, &f.args, f.returns.as_deref())
            .into_iter()
            .map(span)
            .collect(),
        ast::Stmt::ClassDef(c) => {
            let start = c.decorator_list.iter().map(|d| span(d).0).min();
            let start = start.unwrap_or(source::offset(c.range.start()));
            vec![(start.min(source::offset(c.range.start())), source::offset(c.range.end()))]
        }
        _ => Vec::new(),
    }
}

/// Decides which top-level statements move into the wrapper. Definitions
/// and imports stay at module level unless code that runs at definition
/// time reads a name bound by moved code; hoisting those would change what
/// they see.
fn moved_statements(suite: &[ast::Stmt], tokens: &[SpannedTok]) -> Vec<bool> {
    let mut moved: Vec<bool> = suite.iter().map(|s| !is_kept(s)).collect();
    let eager: Vec<BTreeSet<String>> = suite
        .iter()
        .map(|s| names_in(tokens, &definition_time_ranges(s)))
        .collect();
    loop {
        let mut bound = BTreeSet::new();
        for (s, _) in suite.iter().zip(&moved).filter(|(_, &m)| m) {
            bind_stmt(s, &mut bound);
        }
        let mut changed = false;
        for i in 0..suite.len() {
            if !moved[i] && !eager[i].is_disjoint(&bound) {
                moved[i] = true;
                changed = true;
            }
        }
        if !changed {
            return moved;
        }
    }
}

/// Names bound by moved code that must stay module globals.
fn globals_needed(
    tokens: &[SpannedTok],
    suite: &[ast::Stmt],
    moved: &[bool],
    bounds: &[(usize, usize)],
) -> BTreeSet<String> {
    let mut bound = BTreeSet::new();
    for (stmt, _) in suite.iter().zip(moved).filter(|(_, &m)| m) {
        bind_stmt(stmt, &mut bound);
    }

    let in_moved = |offset: usize| {
        moved
            .iter()
            .zip(bounds)
            .any(|(&m, &(a, b))| m && a <= offset && offset < b)
    };

    let mut referenced = BTreeSet::new();
    let mut introspects = false;
    let mut in_global_stmt = false;
    for (i, t) in tokens.iter().enumerate() {
        let moved = in_moved(t.start);
        match &t.tok {
            Tok::Global => in_global_stmt = true,
            Tok::Newline | Tok::Semi => in_global_stmt = false,
            Tok::Name { name } => {
                if !moved || in_global_stmt {
                    referenced.insert(name.clone());
                }
                if moved {
                    if SCOPE_INTROSPECTION.contains(&name.as_str()) {
                        introspects = true;
                    }
                    if matches!(tokens.get(i + 1).map(|n| &n.tok), Some(Tok::ColonEqual)) {
                        bound.insert(name.clone());
                    }
                }
            }
            _ => {}
        }
    }

    if introspects {
        return bound;
    }
    bound.intersection(&referenced).cloned().collect()
}

fn bind_target(expr: &ast::Expr, out: &mut BTreeSet<String>) {
    match expr {
        ast::Expr::Name(n) => {
            out.insert(n.id.to_string());
        }
        ast::Expr::Tuple(t) => t.elts.iter().for_each(|e| bind_target(e, out)),
        ast::Expr::List(l) => l.elts.iter().for_each(|e| bind_target(e, out)),
        ast::Expr::Starred(s) => bind_target(&s.value, out),
        _ => {}
    }
}

fn bind_pattern(pattern: &ast::Pattern, out: &mut BTreeSet<String>) {
    match pattern {
        ast::Pattern::MatchAs(p) => {
            if let Some(n) = &p.name {
                out.insert(n.to_string());
            }
            if let Some(inner) = &p.pattern {
                bind_pattern(inner, out);
            }
        }
        ast::Pattern::MatchStar(p) => {
            if let Some(n) = &p.name {
                out.insert(n.to_string());
            }
        }
        ast::Pattern::MatchMapping(p) => {
            p.patterns.iter().for_each(|q| bind_pattern(q, out));
            if let Some(n) = &p.rest {
                out.insert(n.to_string());
            }
        }
        ast::Pattern::MatchSequence(p) => p.patterns.iter().for_each(|q| bind_pattern(q, out)),
        ast::Pattern::MatchClass(p) => {
            p.patterns.iter().for_each(|q| bind_pattern(q, out));
            p.kwd_patterns.iter().for_each(|q| bind_pattern(q, out));
        }
        ast::Pattern::MatchOr(p) => p.patterns.iter().for_each(|q| bind_pattern(q, out)),
        ast::Pattern::MatchValue(_) | ast::Pattern::MatchSingleton(_) => {}
    }
}

fn bind_body(body: &[ast::Stmt], out: &mut BTreeSet<String>) {
    body.iter().for_each(|s| bind_stmt(s, out));
}

/// Collects names a statement binds in the scope it executes in. Function
/// and class bodies are separate scopes and are not entered.
fn bind_stmt(stmt: &ast::Stmt, out: &mut BTreeSet<String>) {
    use ast::Stmt::*;
    match stmt {
        FunctionDef(f) => {
            out.insert(f.name.to_string());
        }
        AsyncFunctionDef(f) => {
            out.insert(f.name.to_string());
        }
        ClassDef(c) => {
            out.insert(c.name.to_string());
        }
        Assign(a) => a.targets.iter().for_each(|t| bind_target(t, out)),
        AugAssign(a) => bind_target(&a.target, out),
        AnnAssign(a) => bind_target(&a.target, out),
        TypeAlias(a) => bind_target(&a.name, out),
        Delete(d) => d.targets.iter().for_each(|t| bind_target(t, out)),
        For(f) => {
            bind_target(&f.target, out);
            bind_body(&f.body, out);
            bind_body(&f.orelse, out);
        }
        AsyncFor(f) => {
            bind_target(&f.target, out);
            bind_body(&f.body, out);
            bind_body(&f.orelse, out);
        }
        While(w) => {
            bind_body(&w.body, out);
            bind_body(&w.orelse, out);
        }
        If(i) => {
            bind_body(&i.body, out);
            bind_body(&i.orelse, out);
        }
        With(w) => {
            for item in &w.items {
                if let Some(v) = &item.optional_vars {
                    bind_target(v, out);
                }
            }
            bind_body(&w.body, out);
        }
        AsyncWith(w) => {
            for item in &w.items {
                if let Some(v) = &item.optional_vars {
                    bind_target(v, out);
                }
            }
            bind_body(&w.body, out);
        }
        Match(m) => {
            for case in &m.cases {
                bind_pattern(&case.pattern, out);
                bind_body(&case.body, out);
            }
        }
        Try(t) => {
            bind_body(&t.body, out);
            for ast::ExceptHandler::ExceptHandler(h) in &t.handlers {
                if let Some(n) = &h.name {
                    out.insert(n.to_string());
                }
                bind_body(&h.body, out);
            }
            bind_body(&t.orelse, out);
            bind_body(&t.finalbody, out);
        }
        TryStar(t) => {
            bind_body(&t.body, out);
            for ast::ExceptHandler::ExceptHandler(h) in &t.handlers {
                if let Some(n) = &h.name {
                    out.insert(n.to_string());
                }
                bind_body(&h.body, out);
            }
            bind_body(&t.orelse, out);
            bind_body(&t.finalbody, out);
        }
        Import(i) => {
            for alias in &i.names {
                let name = match &alias.asname {
                    Some(a) => a.to_string(),
                    None => alias.name.split('.').next().unwrap_or_default().to_string(),
                };
                out.insert(name);
            }
        }
        ImportFrom(i) => {
            for alias in &i.names {
                if alias.name.as_str() != "*" {
                    out.insert(alias.asname.as_ref().unwrap_or(&alias.name).to_string());
                }
            }
        }
        Return(_) | Raise(_) | Assert(_) | Global(_) | Nonlocal(_) | Expr(_) | Pass(_)
        | Break(_) | Continue(_) => {}
    }
}
