//! The two task-output grammars and the task instruction templates.
//!
//! Reaction sequences, one block per reaction:
//!
//! ```text
//! sequence  = [ reaction { [","] reaction } ] ;
//! reaction  = "[Rxn/st]" reactant condition product "[Rxn/ed]" ;
//! reactant  = "[Rct/st]" objects "[Rct/ed]" ;      (* at least one object *)
//! condition = "[Cnd/st]" [ objects ] "[Cnd/ed]" ;
//! product   = "[Prd/st]" objects "[Prd/ed]" ;      (* at least one object *)
//! objects   = object { [","] object } ;
//! object    = "[" bin "," bin "," bin "," bin "," class "," id "]" ;
//! class     = "[Str]" | "[Txt]" ;
//! bin       = digit { digit } ;                     (* value 0..=999 *)
//! ```
//!
//! Condition interpretations, one item per word:
//!
//! ```text
//! conditions = [ item { "," item } ] ;
//! item       = "'" text "'" role ;
//! role       = "[Agt]" | "[Svt]" | "[Tem]" | "[Time]" | "[Yld]" ;
//! ```
//!
//! Whitespace between tokens is ignored. The canonical form written by the
//! emitters has no whitespace, no optional commas, and three-digit bins.

mod condition;
mod instruction;
mod reaction;
mod token;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub use condition::{emit_condition_sequence, parse_condition_sequence};
pub use instruction::{build_instruction, Task};
pub use reaction::{emit_reaction_sequence, parse_reaction_sequence, ParsedSequence};
pub use token::{tokenize, Lexer, Spanned, Token, TokenSequence};

use crate::validate::Violation;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedChar(char),
    UnknownTag(String),
    UnterminatedQuote,
    CoordinateOutOfRange,
    IdOutOfRange,
    UnexpectedToken { expected: &'static str, found: String },
    /// A start/end marker appeared where a different marker was required.
    Unbalanced { expected: &'static str, found: String },
    UnexpectedEnd { expected: &'static str },
    EmptyReactants,
    EmptyProducts,
    InvalidGeometry,
    ConflictingObject { id: u32 },
    TrailingInput,
    MissingRole,
    UnknownRole(String),
    InvalidWord(String),
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::UnexpectedChar(c) => write!(f, "unexpected character {c:?}"),
            Self::UnknownTag(t) => write!(f, "unknown token [{t}]"),
            Self::UnterminatedQuote => write!(f, "unterminated quote"),
            Self::CoordinateOutOfRange => write!(f, "coordinate outside 0..=999"),
            Self::IdOutOfRange => write!(f, "object id does not fit in 32 bits"),
            Self::UnexpectedToken { expected, found } => {
                write!(f, "expected {expected}, found {found}")
            }
            Self::Unbalanced { expected, found } => {
                write!(f, "unbalanced markers: expected {expected}, found {found}")
            }
            Self::UnexpectedEnd { expected } => write!(f, "unexpected end of input, expected {expected}"),
            Self::EmptyReactants => write!(f, "reactant block must contain at least one object"),
            Self::EmptyProducts => write!(f, "product block must contain at least one object"),
            Self::InvalidGeometry => write!(f, "box needs x_min < x_max and y_min < y_max"),
            Self::ConflictingObject { id } => {
                write!(f, "object id {id} reused with different box or class")
            }
            Self::TrailingInput => write!(f, "trailing input after last item"),
            Self::MissingRole => write!(f, "text literal is not followed by a role token"),
            Self::UnknownRole(r) => write!(f, "unknown role token [{r}]"),
            Self::InvalidWord(w) => {
                write!(f, "word {w:?} is empty or contains whitespace")
            }
        }
    }
}

/// Parse failure with the byte offset it was detected at.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("at byte {offset}: {kind}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EmitError {
    #[error("annotation is invalid: {} violation(s)", .0.len())]
    InvalidAnnotation(Vec<Violation>),
    #[error("condition word {index} ({text:?}) is empty, has whitespace, or contains a quote")]
    InvalidWord { index: usize, text: String },
}
