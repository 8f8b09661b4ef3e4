//! Netpbm grayscale (P2 ASCII / P5 binary) maps.
//!
//! One pixel is one cell. Image row 0 is the top of the picture, i.e. the
//! max-y row of the grid. On import a pixel (scaled to 0..=255) of 205 or
//! more is FREE and anything else is OCCUPIED; unknown gray is not a
//! ground-truth state.

use std::io::Write;
use std::path::Path;

use super::{CellIndex, CellState, GridGeometry, GroundTruthGrid, OccupancyGrid};
use crate::error::{Error, Result};

const FREE_MIN: u32 = 205;

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            offset: self.pos,
            message: message.into(),
        }
    }

    /// Skips whitespace and `#` comments.
    fn skip_space(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u32> {
        self.skip_space();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err(format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Parse {
                offset: start,
                message: format!("{what} out of range"),
            })
    }
}

/// Parses PGM bytes into a ground-truth grid at `resolution_m` per pixel.
pub fn parse_pgm(bytes: &[u8], resolution_m: f64) -> Result<GroundTruthGrid> {
    let mut cur = Cursor { bytes, pos: 0 };
    let binary = match bytes.get(..2) {
        Some(b"P2") => false,
        Some(b"P5") => true,
        _ => return Err(cur.err("missing P2/P5 magic")),
    };
    cur.pos = 2;
    let width = cur.number("width")? as usize;
    let height = cur.number("height")? as usize;
    let maxval = cur.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(cur.err("zero image dimension"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(cur.err(format!("maxval {maxval} outside 1..=65535")));
    }
    let geometry = GridGeometry::from_cells(width, height, resolution_m)?;

    let n = width * height;
    let mut pixels = Vec::with_capacity(n);
    if binary {
        // exactly one whitespace byte separates the header from the raster
        if !cur.bytes.get(cur.pos).is_some_and(u8::is_ascii_whitespace) {
            return Err(cur.err("expected whitespace before raster"));
        }
        cur.pos += 1;
        let wide = maxval > 255;
        let bpp = if wide { 2 } else { 1 };
        let raster = &bytes[cur.pos..];
        if raster.len() < n * bpp {
            cur.pos = bytes.len();
            return Err(cur.err(format!(
                "raster truncated: {} of {} bytes",
                raster.len(),
                n * bpp
            )));
        }
        for i in 0..n {
            let v = if wide {
                u16::from_be_bytes([raster[2 * i], raster[2 * i + 1]]) as u32
            } else {
                raster[i] as u32
            };
            pixels.push(v);
        }
    } else {
        for _ in 0..n {
            pixels.push(cur.number("pixel")?);
        }
    }
    if let Some((i, _)) = pixels.iter().enumerate().find(|(_, &v)| v > maxval) {
        return Err(Error::Parse {
            offset: cur.pos,
            message: format!("pixel {i} exceeds maxval {maxval}"),
        });
    }

    let mut states = vec![CellState::Occupied; n];
    for (i, &v) in pixels.iter().enumerate() {
        let scaled = (v as u64 * 255 + maxval as u64 / 2) / maxval as u64;
        let (img_row, col) = (i / width, i % width);
        let row = height - 1 - img_row;
        if scaled as u32 >= FREE_MIN {
            states[geometry.index(CellIndex::new(col, row))] = CellState::Free;
        }
    }
    GroundTruthGrid::from_states(geometry, states)
}

pub fn read_pgm(path: impl AsRef<Path>, resolution_m: f64) -> Result<GroundTruthGrid> {
    parse_pgm(&std::fs::read(path)?, resolution_m)
}

fn write_raster(
    out: &mut impl Write,
    width: usize,
    height: usize,
    binary: bool,
    pixel: impl Fn(CellIndex) -> u8,
) -> Result<()> {
    write!(out, "{}\n{} {}\n255\n", if binary { "P5" } else { "P2" }, width, height)?;
    for img_row in 0..height {
        let row = height - 1 - img_row;
        let line: Vec<u8> = (0..width).map(|col| pixel(CellIndex::new(col, row))).collect();
        if binary {
            out.write_all(&line)?;
        } else {
            let text: Vec<String> = line.iter().map(u8::to_string).collect();
            writeln!(out, "{}", text.join(" "))?;
        }
    }
    Ok(())
}

/// Writes FREE as 255 and OCCUPIED as 0.
pub fn write_pgm(truth: &GroundTruthGrid, out: &mut impl Write, binary: bool) -> Result<()> {
    write_raster(out, truth.width(), truth.height(), binary, |c| {
        if truth.is_occupied(c) {
            0
        } else {
            255
        }
    })
}

/// Writes the belief map as gray levels `255·(1 - p)`.
pub fn write_belief_pgm(grid: &OccupancyGrid, out: &mut impl Write, binary: bool) -> Result<()> {
    write_raster(out, grid.width(), grid.height(), binary, |c| {
        let p = grid.probability(c).expect("in-bounds cell");
        (255.0 * (1.0 - p)).round() as u8
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_pixel_ascii() {
        let g = parse_pgm(b"P2\n2 1\n255\n255 0\n", 0.2).unwrap();
        assert_eq!(g.state(CellIndex::new(0, 0)).unwrap(), CellState::Free);
        assert_eq!(g.state(CellIndex::new(1, 0)).unwrap(), CellState::Occupied);
    }

    #[test]
    fn thresholds() {
        let g = parse_pgm(b"P2 4 1 255 205 204 51 50", 1.0).unwrap();
        let s: Vec<_> = (0..4).map(|c| g.state(CellIndex::new(c, 0)).unwrap()).collect();
        assert_eq!(
            s,
            [CellState::Free, CellState::Occupied, CellState::Occupied, CellState::Occupied]
        );
    }

    #[test]
    fn binary_matches_ascii() {
        let ascii = parse_pgm(b"P2\n# comment\n3 2\n255\n255 0 128\n0 255 255\n", 0.5).unwrap();
        let mut bin = b"P5\n3 2\n255\n".to_vec();
        bin.extend_from_slice(&[255, 0, 128, 0, 255, 255]);
        let binary = parse_pgm(&bin, 0.5).unwrap();
        assert_eq!(ascii, binary);
        // image row 0 is the top: grid row 1
        assert_eq!(ascii.state(CellIndex::new(0, 1)).unwrap(), CellState::Free);
        assert_eq!(ascii.state(CellIndex::new(0, 0)).unwrap(), CellState::Occupied);
    }

    #[test]
    fn malformed_inputs_report_offsets() {
        match parse_pgm(b"P3\n1 1\n255\n0", 1.0) {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 0),
            other => panic!("{other:?}"),
        }
        match parse_pgm(b"P2\n2 1\n255\n255", 1.0) {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 14), // end of input
            other => panic!("{other:?}"),
        }
        assert!(parse_pgm(b"P5\n2 2\n255\n\x00", 1.0).is_err());
        assert!(parse_pgm(b"P2\n1 1\n100\n101", 1.0).is_err());
    }

    #[test]
    fn wide_maxval_scales() {
        let mut bin = b"P5 2 1 65535\n".to_vec();
        bin.extend_from_slice(&[0xff, 0xff, 0x00, 0x10]);
        let g = parse_pgm(&bin, 1.0).unwrap();
        assert_eq!(g.state(CellIndex::new(0, 0)).unwrap(), CellState::Free);
        assert_eq!(g.state(CellIndex::new(1, 0)).unwrap(), CellState::Occupied);
    }
}
