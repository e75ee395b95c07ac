//! Source locations, diagnostics and checker errors.

use std::fmt;

/// Half-open source region, 1-based line and column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Span {
    pub line: u32,
    pub col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

impl Span {
    pub fn new(line: u32, col: u32, end_line: u32, end_col: u32) -> Self {
        Span {
            line,
            col,
            end_line,
            end_col,
        }
    }

    pub fn merge(self, other: Span) -> Span {
        let (line, col) = if (self.line, self.col) <= (other.line, other.col) {
            (self.line, self.col)
        } else {
            (other.line, other.col)
        };
        let (end_line, end_col) =
            if (self.end_line, self.end_col) >= (other.end_line, other.end_col) {
                (self.end_line, self.end_col)
            } else {
                (other.end_line, other.end_col)
            };
        Span {
            line,
            col,
            end_line,
            end_col,
        }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == self.end_line {
            write!(f, "line {}, {}-{}", self.line, self.col, self.end_col)
        } else {
            write!(
                f,
                "line {}:{} - {}:{}",
                self.line, self.col, self.end_line, self.end_col
            )
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub span: Span,
    pub severity: Severity,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{}: {}: {}", kind, self.span, self.message)
    }
}

/// Errors raised by the checker and the type operators.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TypeError {
    #[error("{span}: expression of non-functional type cannot be applied")]
    NotAFunction { span: Span },
    #[error("{span}: argument type {arg} is not accepted by the function domain {dom}")]
    ArgumentOutsideDomain {
        span: Span,
        arg: String,
        dom: String,
    },
    #[error("{span}: projection applied to an expression of non-product type")]
    NotAProduct { span: Span },
    #[error("{span}: record operation applied to an expression of non-record type")]
    NotARecord { span: Span },
    #[error("{span}: field `{label}` may be missing")]
    MissingField { span: Span, label: String },
    #[error("{span}: body does not satisfy the declared arrow {arrow}: inferred {got}")]
    AnnotationViolation {
        span: Span,
        arrow: String,
        got: String,
    },
    #[error("{span}: no valid arrow could be established for this function")]
    NoValidArrow { span: Span },
    #[error("{span}: unbound variable `{name}`")]
    UnboundVariable { span: Span, name: String },
    #[error("{span}: tested type discriminates between function types; only tests at the granularity of `Empty -> Any` are allowed (use --allow-arrow-tests to override)")]
    ArrowTest { span: Span },
    #[error("recursive type `{name}` has a cycle that crosses no type constructor")]
    ContractivityViolation { name: String },
    #[error("a summand has {count} positive arrows; the subset exploration is capped at {cap}")]
    ArrowSummandTooLarge { count: usize, cap: usize },
    #[error("{span}: syntax error: {message}")]
    Syntax { span: Span, message: String },
}

impl TypeError {
    pub fn span(&self) -> Option<Span> {
        match self {
            TypeError::NotAFunction { span }
            | TypeError::ArgumentOutsideDomain { span, .. }
            | TypeError::NotAProduct { span }
            | TypeError::NotARecord { span }
            | TypeError::MissingField { span, .. }
            | TypeError::AnnotationViolation { span, .. }
            | TypeError::NoValidArrow { span }
            | TypeError::UnboundVariable { span, .. }
            | TypeError::ArrowTest { span }
            | TypeError::Syntax { span, .. } => Some(*span),
            TypeError::ContractivityViolation { .. } | TypeError::ArrowSummandTooLarge { .. } => {
                None
            }
        }
    }
}
