//! Plain-text map format.
//!
//! ```text
//! W H RES
//! <H rows of W glyphs: '#' occupied, '.' free, '?' unknown; first row is the top (largest y)>
//! entity LABEL X Y SALIENCE
//! ```
//!
//! The grid origin is the map frame origin. Parsing is strict: ragged rows,
//! unknown glyphs, stray lines and out-of-bounds entities are errors.

use std::fmt::Write as _;

use thiserror::Error;

use super::{Cell, OccupancyGrid, Salience, SemanticEntity};
use crate::geometry::{Pose2D, Vec2};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            column,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapFile {
    pub grid: OccupancyGrid,
    pub entities: Vec<SemanticEntity>,
}

fn glyph(c: char) -> Option<Cell> {
    match c {
        '#' => Some(Cell::Occupied),
        '.' => Some(Cell::Free),
        '?' => Some(Cell::Unknown),
        _ => None,
    }
}

fn glyph_of(cell: Cell) -> char {
    match cell {
        Cell::Occupied => '#',
        Cell::Free => '.',
        Cell::Unknown => '?',
    }
}

pub fn parse_map(text: &str) -> Result<MapFile, ParseError> {
    let body = text.strip_suffix('\n').unwrap_or(text);
    let lines: Vec<&str> = body.split('\n').collect();
    let header = lines[0];
    let fields: Vec<&str> = header.split(' ').collect();
    if fields.len() != 3 {
        return Err(ParseError::new(1, 1, "header must be `W H RES`"));
    }
    let width: usize = fields[0]
        .parse()
        .map_err(|_| ParseError::new(1, 1, format!("bad width `{}`", fields[0])))?;
    let height: usize = fields[1]
        .parse()
        .map_err(|_| ParseError::new(1, fields[0].len() + 2, format!("bad height `{}`", fields[1])))?;
    let res_col = fields[0].len() + fields[1].len() + 3;
    let resolution: f64 = fields[2]
        .parse()
        .map_err(|_| ParseError::new(1, res_col, format!("bad resolution `{}`", fields[2])))?;
    if width == 0 || height == 0 {
        return Err(ParseError::new(1, 1, "map dimensions must be positive"));
    }
    if !(resolution > 0.0) || !resolution.is_finite() {
        return Err(ParseError::new(1, res_col, "resolution must be positive"));
    }
    if lines.len() < height + 1 {
        return Err(ParseError::new(
            lines.len() + 1,
            1,
            format!("expected {height} grid rows, found {}", lines.len() - 1),
        ));
    }

    let mut grid = OccupancyGrid::new(width, height, resolution, Pose2D::identity(), Cell::Free)
        .map_err(|e| ParseError::new(1, 1, e.to_string()))?;
    for (r, row) in lines[1..=height].iter().enumerate() {
        let line_no = r + 2;
        let iy = (height - 1 - r) as i64;
        let mut count = 0;
        for (c, ch) in row.chars().enumerate() {
            if c >= width {
                return Err(ParseError::new(line_no, width + 1, format!("row longer than {width} cells")));
            }
            let cell = glyph(ch).ok_or_else(|| ParseError::new(line_no, c + 1, format!("unknown glyph `{ch}`")))?;
            grid.set(c as i64, iy, cell);
            count += 1;
        }
        if count < width {
            return Err(ParseError::new(line_no, count + 1, format!("row shorter than {width} cells")));
        }
    }

    let mut entities = Vec::new();
    let extent = Vec2::new(width as f64 * resolution, height as f64 * resolution);
    for (k, line) in lines[height + 1..].iter().enumerate() {
        let line_no = height + 2 + k;
        let parts: Vec<&str> = line.split(' ').collect();
        if parts.len() != 5 || parts[0] != "entity" {
            return Err(ParseError::new(line_no, 1, "expected `entity LABEL X Y SALIENCE`"));
        }
        let col = |i: usize| parts[..i].iter().map(|p| p.len() + 1).sum::<usize>() + 1;
        if parts[1].is_empty() {
            return Err(ParseError::new(line_no, col(1), "empty label"));
        }
        let x: f64 = parts[2]
            .parse()
            .map_err(|_| ParseError::new(line_no, col(2), format!("bad x `{}`", parts[2])))?;
        let y: f64 = parts[3]
            .parse()
            .map_err(|_| ParseError::new(line_no, col(3), format!("bad y `{}`", parts[3])))?;
        let salience = match parts[4] {
            "static" => Salience::Static,
            "hazard" => Salience::Hazard,
            other => return Err(ParseError::new(line_no, col(4), format!("unknown salience `{other}`"))),
        };
        if !(x >= 0.0 && x <= extent.x && y >= 0.0 && y <= extent.y) {
            return Err(ParseError::new(line_no, col(2), format!("entity at ({x}, {y}) is outside the map")));
        }
        entities.push(SemanticEntity {
            label: parts[1].to_string(),
            position: Vec2::new(x, y),
            salience,
        });
    }
    Ok(MapFile { grid, entities })
}

/// Inverse of [`parse_map`] for canonical files.
pub fn serialize_map(grid: &OccupancyGrid, entities: &[SemanticEntity]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {} {}", grid.width(), grid.height(), grid.resolution());
    for iy in (0..grid.height() as i64).rev() {
        for ix in 0..grid.width() as i64 {
            out.push(glyph_of(grid.get(ix, iy)));
        }
        out.push('\n');
    }
    for e in entities {
        let _ = writeln!(
            out,
            "entity {} {} {} {}",
            e.label,
            e.position.x,
            e.position.y,
            e.salience.as_str()
        );
    }
    out
}
