//! Polygon vertex lists: one vertex per line as `re,im` or `re im`, `#` starts
//! a comment. Inline lists separate vertices with `;`.

use std::path::Path;

use crate::error::CliError;

fn parse_vertex(text: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = text.split(|c: char| c == ',' || c.is_whitespace()).filter(|p| !p.is_empty()).collect();
    if parts.len() != 2 {
        return Err(format!("expected two numbers, found {}", parts.len()));
    }
    let mut out = [0.0f64; 2];
    for (slot, part) in out.iter_mut().zip(&parts) {
        *slot = part.parse().map_err(|_| format!("cannot parse {part:?} as a number"))?;
        if !slot.is_finite() {
            return Err(format!("{part:?} is not finite"));
        }
    }
    Ok(out)
}

pub fn parse_polygon_text(text: &str) -> Result<Vec<[f64; 2]>, CliError> {
    let mut vertices = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let v = parse_vertex(content).map_err(|e| CliError::input(format!("line {}: {e}", i + 1)))?;
        vertices.push(v);
    }
    Ok(vertices)
}

pub fn read_polygon_file(path: &Path) -> Result<Vec<[f64; 2]>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    parse_polygon_text(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

pub fn parse_inline(list: &str) -> Result<Vec<[f64; 2]>, CliError> {
    list.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .enumerate()
        .map(|(i, v)| parse_vertex(v).map_err(|e| CliError::input(format!("vertex {}: {e}", i + 1))))
        .collect()
}
