//! Built-in binary masks: the "N T" image, a "T", and a cat face.
//!
//! Templates are 16x16 and scaled to the target grid by nearest neighbor,
//! except [`letter_t`] which is drawn at a fixed size of 17 pixels.

use super::{Mask, PixelGrid};
use crate::error::{Error, Result};

const TEMPLATE: usize = 16;

#[rustfmt::skip]
const NT: [&str; TEMPLATE] = [
    "................",
    "................",
    "................",
    "................",
    ".#...#.#######..",
    ".##..#....#.....",
    ".##..#....#.....",
    ".#.#.#....#.....",
    ".#.#.#....#.....",
    ".#..##....#.....",
    ".#..##....#.....",
    ".#...#....#.....",
    "................",
    "................",
    "................",
    "................",
];

/// Template columns below this belong to the N.
const NT_SPLIT: usize = 7;

#[rustfmt::skip]
const CAT: [&str; TEMPLATE] = [
    "................",
    "..#.........#...",
    "..##.......##...",
    "..#.#.....#.#...",
    "..#..#####..#...",
    ".#...........#..",
    ".#..##...##..#..",
    ".#..##...##..#..",
    ".#...........#..",
    ".#.....#.....#..",
    ".#...#.#.#...#..",
    "..#...#.#...#...",
    "...#.......#....",
    "....#######.....",
    "................",
    "................",
];

fn from_template(grid: PixelGrid, rows: &[&str; TEMPLATE], keep: impl Fn(usize, usize) -> bool) -> Mask {
    let transmission = (0..grid.pixel_count())
        .map(|k| {
            let (r, c) = grid.coords(k);
            let tr = r * TEMPLATE / grid.height;
            let tc = c * TEMPLATE / grid.width;
            let lit = rows[tr].as_bytes()[tc] == b'#' && keep(tr, tc);
            if lit {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    Mask::new(grid, transmission).expect("template values are 0 or 1")
}

pub fn uniform(grid: PixelGrid) -> Mask {
    Mask::new(grid, vec![1.0; grid.pixel_count()]).expect("uniform transmission")
}

/// The letters "N T" side by side.
pub fn letters_nt(grid: PixelGrid) -> Mask {
    from_template(grid, &NT, |_, _| true)
}

/// Only the N of [`letters_nt`].
pub fn letter_n_of_nt(grid: PixelGrid) -> Mask {
    from_template(grid, &NT, |_, c| c < NT_SPLIT)
}

/// Only the T of [`letters_nt`].
pub fn letter_t_of_nt(grid: PixelGrid) -> Mask {
    from_template(grid, &NT, |_, c| c >= NT_SPLIT)
}

pub fn cat_face(grid: PixelGrid) -> Mask {
    from_template(grid, &CAT, |_, _| true)
}

/// A centered "T" of 17 lit pixels: a 9-pixel bar over an 8-pixel stem.
pub fn letter_t(grid: PixelGrid) -> Result<Mask> {
    if grid.width < 9 || grid.height < 9 {
        return Err(Error::validation(format!(
            "the T glyph needs at least a 9x9 grid, got {}x{}",
            grid.width, grid.height
        )));
    }
    let top = (grid.height - 9) / 2;
    let left = (grid.width - 9) / 2;
    let mut transmission = vec![0.0; grid.pixel_count()];
    for c in left..left + 9 {
        transmission[grid.index(top, c)] = 1.0;
    }
    for r in top + 1..top + 9 {
        transmission[grid.index(r, left + 4)] = 1.0;
    }
    Mask::new(grid, transmission)
}
