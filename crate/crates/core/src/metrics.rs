//! Per-method code metrics: lines of code and cyclomatic complexity.
//!
//! Every function definition (methods, nested functions and the synthetic
//! `wrapped_artificially` wrapper included) is its own method. Lines and
//! decision points of a nested function belong to it alone, never to the
//! function that encloses it.
//!
//! Complexity is `1 +` the number of decision points, where a decision
//! point is: each `if`/`elif`, `for`, `while`, `except` handler, boolean
//! operator occurrence, conditional expression, comprehension `if` clause,
//! `assert`, and each `case` arm after the first. `else`, `finally`, `with`
//! and the `match` subject add nothing.
//!
//! Lines of code count non-blank, non-comment physical lines from the `def`
//! line to the end of the body, docstrings included, decorators excluded.

use rustpython_ast::Visitor;
use rustpython_parser::ast::{self, text_size::TextRange, Ranged};
use serde::{Deserialize, Serialize};

use crate::corpus::wrap_top_level;
use crate::source::{self, classify_lines, LineIndex, LineKind, SyntaxError};

/// One function definition located in a file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodSpan {
    pub name: String,
    /// Enclosing class/function names followed by `name`.
    pub nesting: Vec<String>,
    pub start_line: usize,
    pub end_line: usize,
    /// Physical lines `start_line..=end_line`, verbatim.
    pub body_lines: Vec<String>,
    /// Code lines attributed to this method (nested functions removed).
    owned_code_lines: Vec<usize>,
    decision_points: usize,
}

impl MethodSpan {
    pub fn qualified_name(&self) -> String {
        self.nesting.join(".")
    }

    /// Line numbers counted by [`method_loc`].
    pub fn owned_code_lines(&self) -> &[usize] {
        &self.owned_code_lines
    }
}

/// Metric bundle for one file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub per_method_loc: Vec<usize>,
    pub per_method_cc: Vec<usize>,
    pub avg_loc_per_method: f64,
    pub max_cc: usize,
    pub method_count: usize,
}

impl MetricReport {
    fn from_spans(spans: &[MethodSpan]) -> Self {
        let per_method_loc: Vec<usize> = spans.iter().map(method_loc).collect();
        let per_method_cc: Vec<usize> = spans.iter().map(cyclomatic_complexity).collect();
        let method_count = spans.len();
        let avg_loc_per_method = if method_count == 0 {
            0.0
        } else {
            per_method_loc.iter().sum::<usize>() as f64 / method_count as f64
        };
        Self {
            max_cc: per_method_cc.iter().copied().max().unwrap_or(0),
            per_method_loc,
            per_method_cc,
            avg_loc_per_method,
            method_count,
        }
    }
}

struct RawSpan {
    name: String,
    nesting: Vec<String>,
    start_line: usize,
    end_line: usize,
    /// First decorator line, or `start_line` when undecorated.
    outer_start_line: usize,
    decision_points: usize,
}

struct Walker<'a> {
    index: &'a LineIndex,
    spans: Vec<RawSpan>,
    frames: Vec<usize>,
    path: Vec<String>,
}

impl Walker<'_> {
    fn bump(&mut self, n: usize) {
        if let Some(&top) = self.frames.last() {
            self.spans[top].decision_points += n;
        }
    }

    fn line_range(&self, range: TextRange) -> (usize, usize) {
        let start = source::offset(range.start());
        let end = source::offset(range.end());
        (self.index.line_of(start), self.index.last_line_of(start, end))
    }

    #[allow(clippy::too_many_arguments)]
    fn enter_function(
        &mut self,
        name: String,
        range: TextRange,
        decorators: Vec<ast::Expr>,
        args: ast::Arguments,
        returns: Option<Box<ast::Expr>>,
        body: Vec<ast::Stmt>,
    ) {
        let (start_line, end_line) = self.line_range(range);
        let outer_start_line = decorators
            .iter()
            .map(|d| self.index.line_of(source::offset(d.range().start())))
            .min()
            .unwrap_or(start_line)
            .min(start_line);
        // Decorators, defaults and annotations evaluate in the enclosing scope.
        for d in decorators {
            self.visit_expr(d);
        }
        self.visit_arguments(args);
        if let Some(r) = returns {
            self.visit_expr(*r);
        }
        self.path.push(name.clone());
        self.spans.push(RawSpan {
            name,
            nesting: self.path.clone(),
            start_line,
            end_line,
            outer_start_line,
            decision_points: 0,
        });
        self.frames.push(self.spans.len() - 1);
        for stmt in body {
            self.visit_stmt(stmt);
        }
        self.frames.pop();
        self.path.pop();
    }
}

impl Visitor for Walker<'_> {
    fn visit_stmt_function_def(&mut self, node: ast::StmtFunctionDef) {
        self.enter_function(
            node.name.to_string(),
            node.range,
            node.decorator_list,
            *node.args,
            node.returns,
            node.body,
        );
    }

    fn visit_stmt_async_function_def(&mut self, node: ast::StmtAsyncFunctionDef) {
        self.enter_function(
            node.name.to_string(),
            node.range,
            node.decorator_list,
            *node.args,
            node.returns,
            node.body,
        );
    }

    fn visit_stmt_class_def(&mut self, node: ast::StmtClassDef) {
        for d in node.decorator_list {
            self.visit_expr(d);
        }
        for b in node.bases {
            self.visit_expr(b);
        }
        for k in node.keywords {
            self.visit_keyword(k);
        }
        self.path.push(node.name.to_string());
        for stmt in node.body {
            self.visit_stmt(stmt);
        }
        self.path.pop();
    }

    fn visit_stmt_if(&mut self, node: ast::StmtIf) {
        self.bump(1);
        self.generic_visit_stmt_if(node);
    }

    fn visit_stmt_for(&mut self, node: ast::StmtFor) {
        self.bump(1);
        self.generic_visit_stmt_for(node);
    }

    fn visit_stmt_async_for(&mut self, node: ast::StmtAsyncFor) {
        self.bump(1);
        self.generic_visit_stmt_async_for(node);
    }

    fn visit_stmt_while(&mut self, node: ast::StmtWhile) {
        self.bump(1);
        self.generic_visit_stmt_while(node);
    }

    fn visit_stmt_assert(&mut self, node: ast::StmtAssert) {
        self.bump(1);
        self.generic_visit_stmt_assert(node);
    }

    fn visit_stmt_match(&mut self, node: ast::StmtMatch) {
        self.bump(node.cases.len().saturating_sub(1));
        self.generic_visit_stmt_match(node);
    }

    fn visit_excepthandler_except_handler(&mut self, node: ast::ExceptHandlerExceptHandler) {
        self.bump(1);
        self.generic_visit_excepthandler_except_handler(node);
    }

    fn visit_expr_bool_op(&mut self, node: ast::ExprBoolOp) {
        self.bump(node.values.len().saturating_sub(1));
        self.generic_visit_expr_bool_op(node);
    }

    fn visit_expr_if_exp(&mut self, node: ast::ExprIfExp) {
        self.bump(1);
        self.generic_visit_expr_if_exp(node);
    }

    // The generated visitor stops at `Arguments`; defaults and annotations
    // can still hold decision points.
    fn visit_arguments(&mut self, node: ast::Arguments) {
        let with_defaults = node
            .posonlyargs
            .into_iter()
            .chain(node.args)
            .chain(node.kwonlyargs);
        for a in with_defaults {
            self.visit_arg(a.def);
            if let Some(d) = a.default {
                self.visit_expr(*d);
            }
        }
        for a in node.vararg.into_iter().chain(node.kwarg) {
            self.visit_arg(*a);
        }
    }

    fn visit_arg(&mut self, node: ast::Arg) {
        if let Some(ann) = node.annotation {
            self.visit_expr(*ann);
        }
    }

    fn visit_comprehension(&mut self, node: ast::Comprehension) {
        self.bump(node.ifs.len());
        self.generic_visit_comprehension(node);
    }
}

/// Locates every function definition in `source`, in source order.
pub fn parse_methods(source: &str) -> Result<Vec<MethodSpan>, SyntaxError> {
    let suite = source::parse_module(source)?;
    let kinds = classify_lines(source)?;
    let index = LineIndex::new(source);
    let mut walker = Walker {
        index: &index,
        spans: Vec::new(),
        frames: Vec::new(),
        path: Vec::new(),
    };
    for stmt in suite {
        walker.visit_stmt(stmt);
    }
    let raw = walker.spans;
    let lines: Vec<&str> = source.split('\n').collect();

    let spans = raw
        .iter()
        .map(|span| {
            let nested: Vec<(usize, usize)> = raw
                .iter()
                .filter(|o| o.start_line > span.start_line && o.end_line <= span.end_line)
                .map(|o| (o.outer_start_line, o.end_line))
                .collect();
            let owned_code_lines = (span.start_line..=span.end_line)
                .filter(|&l| kinds[l - 1] == LineKind::Code)
                .filter(|&l| !nested.iter().any(|&(a, b)| a <= l && l <= b))
                .collect();
            MethodSpan {
                name: span.name.clone(),
                nesting: span.nesting.clone(),
                start_line: span.start_line,
                end_line: span.end_line,
                body_lines: lines[span.start_line - 1..span.end_line]
                    .iter()
                    .map(|s| s.trim_end_matches('\r').to_string())
                    .collect(),
                owned_code_lines,
                decision_points: span.decision_points,
            }
        })
        .collect();
    Ok(spans)
}

/// Non-blank, non-comment lines of the method, signature included and
/// nested functions excluded.
pub fn method_loc(span: &MethodSpan) -> usize {
    span.owned_code_lines.len()
}

pub fn cyclomatic_complexity(span: &MethodSpan) -> usize {
    1 + span.decision_points
}

/// Metrics for a whole file. A file with no function definitions is
/// wrapped first so its top-level logic is measured as one method.
pub fn file_metrics(source: &str) -> Result<MetricReport, SyntaxError> {
    let spans = parse_methods(source)?;
    if !spans.is_empty() {
        return Ok(MetricReport::from_spans(&spans));
    }
    let wrapped = wrap_top_level(source)?;
    Ok(MetricReport::from_spans(&parse_methods(&wrapped)?))
}
