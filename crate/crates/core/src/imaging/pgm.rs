//! Plain-text portable graymap (P2) reading and writing.

use std::path::Path;

use crate::error::{Error, Result};

/// Gray values as read from a P2 file, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub max_value: u32,
    pub pixels: Vec<u32>,
}

impl GrayImage {
    /// Gray values rescaled to `[0, 1]`.
    pub fn normalized(&self) -> Vec<f64> {
        let max = self.max_value as f64;
        self.pixels.iter().map(|&v| v as f64 / max).collect()
    }
}

struct Token<'a> {
    text: &'a str,
    line: usize,
    column: usize,
}

fn tokenize(text: &str) -> Vec<Token<'_>> {
    let mut tokens = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let content = line.split('#').next().unwrap_or("");
        let mut start = None;
        for (i, ch) in content.char_indices().chain(std::iter::once((content.len(), ' '))) {
            match (ch.is_whitespace(), start) {
                (false, None) => start = Some(i),
                (true, Some(s)) => {
                    tokens.push(Token {
                        text: &content[s..i],
                        line: line_no + 1,
                        column: s + 1,
                    });
                    start = None;
                }
                _ => {}
            }
        }
    }
    tokens
}

pub fn parse_pgm(text: &str, source: &str) -> Result<GrayImage> {
    let err = |line: usize, column: usize, message: String| Error::Parse {
        path: source.to_string(),
        line,
        column,
        message,
    };
    let tokens = tokenize(text);
    let mut it = tokens.iter();
    let (last_line, last_col) = tokens.last().map_or((1, 1), |t| (t.line, t.column + t.text.len()));

    match it.next() {
        Some(t) if t.text == "P2" => {}
        Some(t) => {
            return Err(err(
                t.line,
                t.column,
                format!("expected magic `P2`, found `{}`", t.text),
            ))
        }
        None => return Err(err(1, 1, "empty file, expected magic `P2`".into())),
    }

    let mut header = |what: &str| -> Result<(u64, usize, usize)> {
        let t = it
            .next()
            .ok_or_else(|| err(last_line, last_col, format!("unexpected end of file, expected {what}")))?;
        let v = t
            .text
            .parse::<u64>()
            .map_err(|_| err(t.line, t.column, format!("expected {what}, found `{}`", t.text)))?;
        Ok((v, t.line, t.column))
    };
    let (width, wl, wc) = header("width")?;
    let (height, hl, hc) = header("height")?;
    let (max_value, ml, mc) = header("maximum gray value")?;
    if width == 0 {
        return Err(err(wl, wc, "width must be at least 1".into()));
    }
    if height == 0 {
        return Err(err(hl, hc, "height must be at least 1".into()));
    }
    if max_value == 0 || max_value > u32::MAX as u64 {
        return Err(err(ml, mc, format!("maximum gray value {max_value} out of range")));
    }
    let count = (width as usize)
        .checked_mul(height as usize)
        .ok_or_else(|| err(hl, hc, "image dimensions overflow".into()))?;

    let mut pixels = Vec::with_capacity(count.min(1 << 20));
    for k in 0..count {
        let t = it.next().ok_or_else(|| {
            err(
                last_line,
                last_col,
                format!("unexpected end of file after {k} of {count} pixels"),
            )
        })?;
        let v = t
            .text
            .parse::<u64>()
            .map_err(|_| err(t.line, t.column, format!("expected gray value, found `{}`", t.text)))?;
        if v > max_value {
            return Err(err(
                t.line,
                t.column,
                format!("gray value {v} exceeds maximum {max_value}"),
            ));
        }
        pixels.push(v as u32);
    }
    if let Some(t) = it.next() {
        return Err(err(
            t.line,
            t.column,
            format!("trailing data `{}` after pixel values", t.text),
        ));
    }
    Ok(GrayImage {
        width: width as usize,
        height: height as usize,
        max_value: max_value as u32,
        pixels,
    })
}

pub fn read_pgm(path: &Path) -> Result<GrayImage> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_pgm(&text, &path.display().to_string())
}

pub fn encode_pgm(image: &GrayImage) -> String {
    let mut out = format!("P2\n{} {}\n{}\n", image.width, image.height, image.max_value);
    for row in image.pixels.chunks(image.width) {
        let line: Vec<String> = row.iter().map(u32::to_string).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

/// Scales nonnegative intensities to 16-bit gray, `round(65535·I/I_max)`.
/// An all-zero image stays black.
pub fn intensity_image(width: usize, height: usize, intensity: &[f64]) -> GrayImage {
    assert_eq!(intensity.len(), width * height);
    let max = intensity.iter().copied().fold(0.0_f64, f64::max);
    let pixels = intensity
        .iter()
        .map(|&i| {
            if max > 0.0 {
                (65535.0 * i.max(0.0) / max).round() as u32
            } else {
                0
            }
        })
        .collect();
    GrayImage {
        width,
        height,
        max_value: 65535,
        pixels,
    }
}

pub fn write_pgm(path: &Path, image: &GrayImage) -> Result<()> {
    std::fs::write(path, encode_pgm(image)).map_err(|e| Error::io(path, e))
}
