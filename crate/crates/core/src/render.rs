//! Heatmap images of tables and factorizations.
//!
//! Each matrix entry becomes a `cell_px` square. Exact values 1, 1/2, 1/4
//! and 0 get fixed colors; anything else is gray with level
//! `round(255 * (1 - v))`. Measurement blocks are separated by 1-pixel blue
//! lines.

use std::fmt::Write as _;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factorization::OntFactorization;
use crate::matrix::RatMatrix;
use crate::rational::Rational;
use crate::table::DataTable;

pub const BLACK: [u8; 3] = [0, 0, 0];
pub const GREEN: [u8; 3] = [0, 160, 0];
pub const RED: [u8; 3] = [200, 0, 0];
pub const WHITE: [u8; 3] = [255, 255, 255];
pub const SEPARATOR: [u8; 3] = [0, 0, 255];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImageFormat {
    #[default]
    Ppm,
    Svg,
}

pub fn color_of(v: &Rational) -> [u8; 3] {
    if v.is_one() {
        return BLACK;
    }
    if v.is_zero() {
        return WHITE;
    }
    if *v == Rational::new(1, 2) {
        return GREEN;
    }
    if *v == Rational::new(1, 4) {
        return RED;
    }
    let level = (Rational::from_integer(255) * (Rational::one() - v))
        .round()
        .to_i64()
        .unwrap_or(0)
        .clamp(0, 255) as u8;
    [level, level, level]
}

enum Band<'a> {
    Cells(&'a [Rational]),
    Line,
}

struct Raster {
    width: usize,
    height: usize,
    pixels: Vec<[u8; 3]>,
}

fn rasterize(bands: &[Band<'_>], cols: usize, cell_px: usize) -> Raster {
    let width = cols * cell_px;
    let mut pixels = Vec::new();
    for band in bands {
        match band {
            Band::Cells(values) => {
                let row: Vec<[u8; 3]> = values
                    .iter()
                    .flat_map(|v| std::iter::repeat_n(color_of(v), cell_px))
                    .collect();
                for _ in 0..cell_px {
                    pixels.extend_from_slice(&row);
                }
            }
            Band::Line => pixels.extend(std::iter::repeat_n(SEPARATOR, width)),
        }
    }
    Raster {
        width,
        height: if width == 0 { 0 } else { pixels.len() / width },
        pixels,
    }
}

fn encode(raster: &Raster, bands: &[Band<'_>], cell_px: usize, format: ImageFormat) -> Vec<u8> {
    match format {
        ImageFormat::Ppm => {
            let mut out = format!("P6\n{} {}\n255\n", raster.width, raster.height).into_bytes();
            out.extend(raster.pixels.iter().flatten());
            out
        }
        ImageFormat::Svg => {
            let (w, h) = (raster.width, raster.height);
            let mut out = format!(
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" shape-rendering=\"crispEdges\">\n"
            );
            let mut y = 0;
            for band in bands {
                match band {
                    Band::Cells(values) => {
                        for (c, v) in values.iter().enumerate() {
                            let [r, g, b] = color_of(v);
                            let _ = writeln!(
                                out,
                                "<rect x=\"{}\" y=\"{y}\" width=\"{cell_px}\" height=\"{cell_px}\" fill=\"rgb({r},{g},{b})\"/>",
                                c * cell_px
                            );
                        }
                        y += cell_px;
                    }
                    Band::Line => {
                        let [r, g, b] = SEPARATOR;
                        let _ = writeln!(out, "<rect x=\"0\" y=\"{y}\" width=\"{w}\" height=\"1\" fill=\"rgb({r},{g},{b})\"/>");
                        y += 1;
                    }
                }
            }
            out.push_str("</svg>\n");
            out.into_bytes()
        }
    }
}

fn check_cell(cell_px: usize) -> Result<()> {
    if cell_px == 0 {
        return Err(Error::structural("cell size must be at least 1 pixel"));
    }
    Ok(())
}

fn blocks<'a>(mm: &'a RatMatrix, d: usize, bands: &mut Vec<Band<'a>>) {
    for r in 0..mm.rows() {
        if r > 0 && d > 0 && r % d == 0 {
            bands.push(Band::Line);
        }
        bands.push(Band::Cells(mm.row(r)));
    }
}

/// `s * cell_px` wide, `dm * cell_px + (m - 1)` high.
pub fn render_table(table: &DataTable, cell_px: usize, format: ImageFormat) -> Result<Vec<u8>> {
    check_cell(cell_px)?;
    let mut bands = Vec::new();
    blocks(table.matrix(), table.d(), &mut bands);
    let raster = rasterize(&bands, table.s(), cell_px);
    Ok(encode(&raster, &bands, cell_px, format))
}

/// `P` transposed on top (one band per preparation), a separator line, then
/// `M` below with its ontic columns aligned to those of `P`. Measurement
/// blocks of `M` are separated when `d` is given.
///
/// `Ω * cell_px` wide, `(s + dm) * cell_px + 1 + (m - 1)` high.
pub fn render_factorization(
    f: &OntFactorization,
    d: Option<usize>,
    cell_px: usize,
    format: ImageFormat,
) -> Result<Vec<u8>> {
    check_cell(cell_px)?;
    if let Some(d) = d {
        if d == 0 || !f.m().rows().is_multiple_of(d) {
            return Err(Error::structural(format!(
                "M has {} rows, not a multiple of d = {d}",
                f.m().rows()
            )));
        }
    }
    let pt: Vec<Vec<Rational>> = (0..f.p().cols()).map(|k| f.p().column(k)).collect();
    let mut bands: Vec<Band<'_>> = pt.iter().map(|row| Band::Cells(row)).collect();
    bands.push(Band::Line);
    blocks(f.m(), d.unwrap_or(0), &mut bands);
    let raster = rasterize(&bands, f.omega(), cell_px);
    Ok(encode(&raster, &bands, cell_px, format))
}
