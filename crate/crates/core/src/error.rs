use thiserror::Error;

/// Sections of the compressed container, used to pinpoint corruption.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Section {
    Header,
    Lz77,
    Table,
    Codes,
    Predmd,
    Offsets,
    Means,
    Unpredictable,
}

impl std::fmt::Display for Section {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Section::Header => "header",
            Section::Lz77 => "lz77 wrapper",
            Section::Table => "huffman table",
            Section::Codes => "quantization codes",
            Section::Predmd => "predmd bits",
            Section::Offsets => "offsets",
            Section::Means => "means",
            Section::Unpredictable => "unpredictable values",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum SzError {
    #[error("empty input")]
    EmptyInput,

    #[error("non-finite input at index {index}")]
    NonFinite { index: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("symbol {0} is not in the huffman table")]
    UnknownSymbol(u16),

    #[error("pattern-match prediction requested for an unmatched sequence")]
    Unmatched,

    #[error("corrupt stream in {section}: {reason}")]
    Corrupt { section: Section, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl SzError {
    pub(crate) fn corrupt(section: Section, reason: impl Into<String>) -> Self {
        SzError::Corrupt {
            section,
            reason: reason.into(),
        }
    }

    pub(crate) fn invalid(reason: impl Into<String>) -> Self {
        SzError::InvalidParams(reason.into())
    }
}

pub type Result<T> = std::result::Result<T, SzError>;
