//! Glyph sources. The built-in face is an 8x16 monospace bitmap: the public
//! domain 8x8 `font8x8` shapes with every row doubled, covering printable
//! ASCII and Latin-1. Anything else draws as a hollow box.

use font8x8::legacy::{BASIC_LEGACY, LATIN_LEGACY};

use crate::geometry::AlphaMask;

/// A rendered glyph at some integer scale. `bitmap` is `advance` wide (or
/// empty) and `ascent + descent` tall, top-aligned on the line box.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Glyph {
    pub bitmap: AlphaMask,
    pub advance: u32,
    pub ascent: u32,
    pub descent: u32,
}

/// Anything that can turn a codepoint into a coverage bitmap. Implementations
/// must be deterministic and give every codepoint a positive advance.
pub trait GlyphSource: Sync {
    fn glyph(&self, ch: char, scale: u32) -> Glyph;

    /// Height of a line box at `scale`.
    fn line_height(&self, scale: u32) -> u32;

    fn advance(&self, ch: char, scale: u32) -> u32 {
        self.glyph(ch, scale).advance
    }

    /// Total advance of `text` at `scale`.
    fn text_width(&self, text: &str, scale: u32) -> u32 {
        text.chars().map(|c| self.advance(c, scale)).sum()
    }
}

const CELL_W: u32 = 8;
const CELL_H: u32 = 16;

#[derive(Debug, Clone, Copy, Default)]
pub struct BuiltinFont;

impl BuiltinFont {
    /// The 8 source rows of a covered codepoint (bit 0 is the leftmost pixel).
    fn rows(ch: char) -> Option<[u8; 8]> {
        let cp = ch as u32;
        match cp {
            0x20..=0x7E => Some(BASIC_LEGACY[cp as usize]),
            0xA0..=0xFF => Some(LATIN_LEGACY[(cp - 0xA0) as usize]),
            _ => None,
        }
    }

    pub fn covers(ch: char) -> bool {
        Self::rows(ch).is_some()
    }
}

impl GlyphSource for BuiltinFont {
    fn glyph(&self, ch: char, scale: u32) -> Glyph {
        let s = scale.max(1);
        let (w, h) = (CELL_W * s, CELL_H * s);
        let mut bitmap = AlphaMask::new(w, h);
        match Self::rows(ch) {
            Some(rows) => {
                for (r, bits) in rows.iter().enumerate() {
                    for c in 0..8u32 {
                        if bits & (1 << c) == 0 {
                            continue;
                        }
                        // each source row covers two cell rows
                        let (x0, y0) = (c * s, r as u32 * 2 * s);
                        for y in y0..y0 + 2 * s {
                            for x in x0..x0 + s {
                                bitmap.set(x, y, 255);
                            }
                        }
                    }
                }
            }
            None => {
                // Hollow box in cell units: columns 1..=6, rows 2..=13.
                for cy in 2..=13u32 {
                    for cx in 1..=6u32 {
                        if cy == 2 || cy == 13 || cx == 1 || cx == 6 {
                            for y in cy * s..(cy + 1) * s {
                                for x in cx * s..(cx + 1) * s {
                                    bitmap.set(x, y, 255);
                                }
                            }
                        }
                    }
                }
            }
        }
        Glyph { bitmap, advance: w, ascent: 13 * s, descent: 3 * s }
    }

    fn line_height(&self, scale: u32) -> u32 {
        CELL_H * scale.max(1)
    }

    fn advance(&self, _ch: char, scale: u32) -> u32 {
        CELL_W * scale.max(1)
    }

    fn text_width(&self, text: &str, scale: u32) -> u32 {
        CELL_W * scale.max(1) * text.chars().count() as u32
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn space_has_advance_but_no_ink() {
        let g = BuiltinFont.glyph(' ', 2);
        assert_eq!(g.advance, 16);
        assert_eq!(g.bitmap.count_nonzero(), 0);
    }

    #[test]
    fn scaling_is_nearest_neighbor() {
        let g1 = BuiltinFont.glyph('A', 1);
        let g3 = BuiltinFont.glyph('A', 3);
        assert_eq!(g3.bitmap.count_nonzero(), 9 * g1.bitmap.count_nonzero());
        for y in 0..48 {
            for x in 0..24 {
                assert_eq!(g3.bitmap.get(x, y), g1.bitmap.get(x / 3, y / 3));
            }
        }
    }

    #[test]
    fn latin1_is_covered_and_cjk_is_boxed() {
        assert!(BuiltinFont::covers('é'));
        assert!(!BuiltinFont::covers('漢'));
        let b = BuiltinFont.glyph('漢', 1);
        assert_eq!(b.advance, 8);
        // perimeter of a 6x12 box
        assert_eq!(b.bitmap.count_nonzero(), 2 * 6 + 2 * 10);
        assert_ne!(BuiltinFont.glyph('é', 1), BuiltinFont.glyph('e', 1));
    }

    #[test]
    fn glyphs_are_deterministic() {
        assert_eq!(BuiltinFont.glyph('q', 2), BuiltinFont.glyph('q', 2));
    }
}
