//! Minimal RFC 4180 reader and writer.
//!
//! The reader reports unbalanced quotes with the row they started on and
//! tracks 1-based row numbers (the header is row 1), which the ingest and
//! rule loaders use in their error messages.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CsvError {
    #[error("unbalanced quote starting in row {row}")]
    UnbalancedQuote { row: usize },
    #[error("unexpected character after closing quote in row {row}")]
    StrayQuote { row: usize },
}

impl CsvError {
    pub fn row(&self) -> usize {
        match self {
            CsvError::UnbalancedQuote { row } | CsvError::StrayQuote { row } => *row,
        }
    }
}

/// A parsed row and its 1-based position in the file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub number: usize,
    pub cells: Vec<String>,
}

fn is_empty_line(cells: &[String], saw_quote: bool) -> bool {
    !saw_quote && cells.len() == 1 && cells[0].is_empty()
}

/// Parse CSV text into rows. A leading BOM is stripped, CRLF and lone CR
/// line endings are normalized to LF (also inside quoted cells), and
/// completely empty lines are skipped.
pub fn parse(text: &str) -> Result<Vec<Row>, CsvError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut rows = Vec::new();
    let mut cells = Vec::new();
    let mut cell = String::new();
    let mut row = 1;
    let mut in_quotes = false;
    let mut quote_row = 0;
    let mut after_quote = false;
    let mut saw_quote = false;
    let mut chars = text.chars().peekable();

    while let Some(c) = chars.next() {
        if in_quotes {
            match c {
                '"' if chars.peek() == Some(&'"') => {
                    chars.next();
                    cell.push('"');
                }
                '"' => {
                    in_quotes = false;
                    after_quote = true;
                }
                '\r' => {
                    if chars.peek() == Some(&'\n') {
                        chars.next();
                    }
                    cell.push('\n');
                }
                c => cell.push(c),
            }
            continue;
        }
        match c {
            ',' => {
                cells.push(std::mem::take(&mut cell));
                after_quote = false;
            }
            '\r' | '\n' => {
                if c == '\r' && chars.peek() == Some(&'\n') {
                    chars.next();
                }
                cells.push(std::mem::take(&mut cell));
                if !is_empty_line(&cells, saw_quote) {
                    rows.push(Row {
                        number: row,
                        cells: std::mem::take(&mut cells),
                    });
                    row += 1;
                }
                cells.clear();
                after_quote = false;
                saw_quote = false;
            }
            '"' if cell.is_empty() && !after_quote => {
                in_quotes = true;
                saw_quote = true;
                quote_row = row;
            }
            _ if after_quote => return Err(CsvError::StrayQuote { row }),
            c => cell.push(c),
        }
    }
    if in_quotes {
        return Err(CsvError::UnbalancedQuote { row: quote_row });
    }
    if !cell.is_empty() || !cells.is_empty() || after_quote {
        cells.push(cell);
        if !is_empty_line(&cells, saw_quote) {
            rows.push(Row { number: row, cells });
        }
    }
    Ok(rows)
}

/// Append one cell, quoting only when it contains a comma, quote, CR or LF.
pub fn write_cell(out: &mut String, cell: &str) {
    if cell.contains([',', '"', '\r', '\n']) {
        out.push('"');
        for c in cell.chars() {
            if c == '"' {
                out.push('"');
            }
            out.push(c);
        }
        out.push('"');
    } else {
        out.push_str(cell);
    }
}

/// Append one record terminated by CRLF.
pub fn write_row<S: AsRef<str>>(out: &mut String, cells: &[S]) {
    for (i, cell) in cells.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        write_cell(out, cell.as_ref());
    }
    out.push_str("\r\n");
}
