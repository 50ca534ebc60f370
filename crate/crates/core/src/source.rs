//! Shared helpers over Python source text: parsing, offset-to-line mapping,
//! physical line classification and layout-free token streams.

use rustpython_parser::ast::{self, text_size::TextSize};
use rustpython_parser::{lexer, Mode, Parse, Tok};
use serde::{Deserialize, Serialize};

/// A syntax error located at a 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[error("syntax error at line {line}, column {column}: {message}")]
pub struct SyntaxError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

/// Maps byte offsets to 1-based line numbers.
#[derive(Debug, Clone)]
pub struct LineIndex {
    starts: Vec<usize>,
}

impl LineIndex {
    pub fn new(text: &str) -> Self {
        let mut starts = vec![0];
        starts.extend(text.match_indices('\n').map(|(i, _)| i + 1));
        Self { starts }
    }

    pub fn line_of(&self, offset: usize) -> usize {
        match self.starts.binary_search(&offset) {
            Ok(i) => i + 1,
            Err(i) => i,
        }
    }

    pub fn column_of(&self, offset: usize) -> usize {
        let line = self.line_of(offset);
        offset - self.starts[line - 1] + 1
    }

    /// Byte offset of the first character of `line` (1-based).
    pub fn line_start(&self, line: usize) -> usize {
        self.starts[line - 1]
    }

    /// Line containing the last byte of a half-open range ending at `end`.
    pub fn last_line_of(&self, start: usize, end: usize) -> usize {
        if end > start {
            self.line_of(end - 1)
        } else {
            self.line_of(start)
        }
    }

    pub fn line_count(&self) -> usize {
        self.starts.len()
    }
}

pub(crate) fn offset(size: TextSize) -> usize {
    u32::from(size) as usize
}

/// Parses a module, mapping parser failures to a located [`SyntaxError`].
pub fn parse_module(source: &str) -> Result<ast::Suite, SyntaxError> {
    ast::Suite::parse(source, "<candidate>").map_err(|err| {
        let index = LineIndex::new(source);
        let at = offset(err.offset).min(source.len());
        SyntaxError {
            line: index.line_of(at),
            column: index.column_of(at),
            message: err.error.to_string(),
        }
    })
}

/// True when `source` parses as a Python module.
pub fn parses(source: &str) -> bool {
    parse_module(source).is_ok()
}

/// Classification of one physical line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LineKind {
    Code,
    Blank,
    /// Comment-only, or otherwise carrying no token.
    Comment,
}

/// Token with its byte range.
pub(crate) struct SpannedTok {
    pub tok: Tok,
    pub start: usize,
    pub end: usize,
}

pub(crate) fn tokens(source: &str) -> Result<Vec<SpannedTok>, SyntaxError> {
    let mut out = Vec::new();
    for item in lexer::lex(source, Mode::Module) {
        match item {
            Ok((tok, range)) => out.push(SpannedTok {
                tok,
                start: offset(range.start()),
                end: offset(range.end()),
            }),
            Err(err) => {
                let index = LineIndex::new(source);
                let at = offset(err.location).min(source.len());
                return Err(SyntaxError {
                    line: index.line_of(at),
                    column: index.column_of(at),
                    message: err.error.to_string(),
                });
            }
        }
    }
    Ok(out)
}

fn is_layout(tok: &Tok) -> bool {
    matches!(
        tok,
        Tok::Newline | Tok::Indent | Tok::Dedent | Tok::EndOfFile
    )
}

/// Classifies every physical line of `source` (index 0 is line 1).
///
/// A line is code when it is non-blank and some non-layout token covers it.
/// Lines inside a multi-line string count as code unless blank.
pub fn classify_lines(source: &str) -> Result<Vec<LineKind>, SyntaxError> {
    let index = LineIndex::new(source);
    let lines: Vec<&str> = source.split('\n').collect();
    let mut covered = vec![false; index.line_count()];
    for t in tokens(source)? {
        if is_layout(&t.tok) {
            continue;
        }
        let first = index.line_of(t.start);
        let last = index.last_line_of(t.start, t.end);
        for flag in &mut covered[first - 1..last] {
            *flag = true;
        }
    }
    Ok(lines
        .iter()
        .zip(covered)
        .map(|(text, covered)| {
            if text.trim().is_empty() {
                LineKind::Blank
            } else if covered {
                LineKind::Code
            } else {
                LineKind::Comment
            }
        })
        .collect())
}

/// Non-blank, non-comment physical line count of a whole file.
pub fn count_code_lines(source: &str) -> Result<usize, SyntaxError> {
    Ok(classify_lines(source)?
        .into_iter()
        .filter(|k| *k == LineKind::Code)
        .count())
}

/// Token stream with comments and all layout whitespace removed.
///
/// Logical line breaks and block structure survive as `Newline`, `Indent`
/// and `Dedent` markers, so only indentation width, blank lines, comments
/// and inter-token spacing are ignored.
pub fn normalized_tokens(source: &str) -> Result<Vec<Tok>, SyntaxError> {
    Ok(tokens(source)?.into_iter().map(|t| t.tok).collect())
}

/// 1-based lines that begin inside a multi-line string literal. Re-indenting
/// such a line would change the string's value.
pub(crate) fn string_continuation_lines(source: &str) -> Result<Vec<usize>, SyntaxError> {
    let index = LineIndex::new(source);
    let mut lines = Vec::new();
    for t in tokens(source)? {
        if matches!(t.tok, Tok::String { .. }) {
            let first = index.line_of(t.start);
            let last = index.last_line_of(t.start, t.end);
            lines.extend(first + 1..=last);
        }
    }
    Ok(lines)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_index_maps_offsets() {
        let idx = LineIndex::new("ab\ncd\n\nx");
        assert_eq!(idx.line_of(0), 1);
        assert_eq!(idx.line_of(2), 1);
        assert_eq!(idx.line_of(3), 2);
        assert_eq!(idx.line_of(6), 3);
        assert_eq!(idx.line_of(7), 4);
        assert_eq!(idx.column_of(4), 2);
    }

    #[test]
    fn classifies_blank_comment_and_code() {
        let src = "x = 1\n\n# note\ny = '''a\n\nb'''\n";
        let kinds = classify_lines(src).unwrap();
        use LineKind::*;
        assert_eq!(kinds, vec![Code, Blank, Comment, Code, Blank, Code, Blank]);
        assert_eq!(count_code_lines(src).unwrap(), 3);
    }

    #[test]
    fn syntax_error_is_located() {
        let err = parse_module("x = 1\ndef f(:\n    pass\n").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.column >= 1);
    }

    #[test]
    fn normalized_tokens_ignore_layout() {
        let a = normalized_tokens("if x:\n    y = 1  # c\n").unwrap();
        let b = normalized_tokens("if x :\n\n  y=1\n").unwrap();
        assert_eq!(a, b);
        let c = normalized_tokens("if x:\n    z = 1\n").unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn finds_string_continuation_lines() {
        let src = "s = '''a\nb\nc'''\nt = 1\n";
        assert_eq!(string_continuation_lines(src).unwrap(), vec![2, 3]);
    }
}
