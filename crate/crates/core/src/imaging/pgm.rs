//! Binary PGM (`P5`) codec.
//!
//! Levels up to 255 take one byte, larger maxvals two big-endian bytes.
//! Comments (`#` to end of line) are accepted anywhere whitespace is.

use std::fs;
use std::path::Path;

use super::ImageRaster;
use crate::error::{Error, Result};

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn skip_space_and_comments(&mut self) {
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

    /// Next decimal token and its offset.
    fn number(&mut self, what: &str) -> Result<(usize, u64)> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(match self.bytes.get(self.pos) {
                None => Error::format(self.pos, format!("unexpected end of header, expected {what}")),
                Some(_) => Error::format(self.pos, format!("expected {what}")),
            });
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse::<u64>().ok())
            .map(|v| (start, v))
            .ok_or_else(|| Error::format(start, format!("{what} is too large")))
    }
}

/// Parses a binary PGM image.
pub fn decode(bytes: &[u8]) -> Result<ImageRaster> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(Error::format(0, "missing P5 magic number"));
    }
    let mut cur = Cursor { bytes, pos: 2 };
    if !cur.bytes.get(2).is_some_and(|b| b.is_ascii_whitespace() || *b == b'#') {
        return Err(Error::format(2, "expected whitespace after magic number"));
    }
    let (width_at, width) = cur.number("width")?;
    let (_, height) = cur.number("height")?;
    let (maxval_at, maxval) = cur.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::format(width_at, format!("image size {width}x{height} is empty")));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::format(maxval_at, format!("maxval {maxval} outside 1..=65535")));
    }
    match cur.bytes.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        Some(_) => return Err(Error::format(cur.pos, "expected a single whitespace byte after maxval")),
        None => return Err(Error::format(cur.pos, "unexpected end of header")),
    }
    let count = usize::try_from(width * height).map_err(|_| Error::format(width_at, "image too large"))?;
    let bpp = if maxval > 255 { 2 } else { 1 };
    let data_at = cur.pos;
    let needed = count
        .checked_mul(bpp)
        .ok_or_else(|| Error::format(width_at, "image too large"))?;
    let payload = bytes
        .get(data_at..data_at + needed)
        .ok_or_else(|| Error::format(bytes.len(), format!("truncated payload: {needed} bytes expected after offset {data_at}")))?;
    let mut pixels = Vec::with_capacity(count);
    for (i, chunk) in payload.chunks_exact(bpp).enumerate() {
        let v = if bpp == 2 {
            u16::from_be_bytes([chunk[0], chunk[1]])
        } else {
            chunk[0] as u16
        };
        if v as u64 > maxval {
            return Err(Error::format(data_at + i * bpp, format!("level {v} exceeds maxval {maxval}")));
        }
        pixels.push(v);
    }
    ImageRaster::new(width as usize, height as usize, maxval as u16, pixels)
}

/// Serializes as `P5\n<w> <h>\n<maxval>\n` followed by the payload.
pub fn encode(raster: &ImageRaster) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n{}\n", raster.width(), raster.height(), raster.maxval()).into_bytes();
    if raster.maxval() > 255 {
        for p in raster.pixels() {
            out.extend_from_slice(&p.to_be_bytes());
        }
    } else {
        out.extend(raster.pixels().iter().map(|&p| p as u8));
    }
    out
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<ImageRaster> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    decode(&bytes)
}

pub fn write_pgm(raster: &ImageRaster, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode(raster)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_image_bytes() {
        let r = ImageRaster::new(1, 1, 255, vec![0]).unwrap();
        assert_eq!(encode(&r), b"P5\n1 1\n255\n\0".to_vec());
    }

    #[test]
    fn sixteen_bit_is_big_endian() {
        let r = ImageRaster::new(2, 1, 65535, vec![0x0102, 0xfffe]).unwrap();
        let bytes = encode(&r);
        assert_eq!(&bytes[bytes.len() - 4..], &[1, 2, 0xff, 0xfe]);
        assert_eq!(decode(&bytes).unwrap(), r);
    }

    #[test]
    fn comments_between_tokens() {
        let bytes = b"P5\n# c\n2 # c\n1\n# c\n255\n\x07\x09";
        let r = decode(bytes).unwrap();
        assert_eq!((r.width(), r.height(), r.maxval()), (2, 1, 255));
        assert_eq!(r.pixels(), &[7, 9]);
    }

    #[test]
    fn malformed_inputs_report_offsets() {
        let err = |b: &[u8]| match decode(b) {
            Err(Error::Format { offset, .. }) => offset,
            other => panic!("expected a format error, got {other:?}"),
        };
        assert_eq!(err(b"P6\n1 1\n255\n\0"), 0);
        assert_eq!(err(b"P5\n1 x\n255\n\0"), 5);
        assert_eq!(err(b"P5\n1 1\n70000\n\0\0"), 7);
        assert_eq!(err(b"P5\n1 1\n0\n\0"), 7);
        assert_eq!(err(b"P5\n2 2\n255\n\0\0\0"), 14);
        assert_eq!(err(b"P5\n1 1\n100\n\xc8"), 11);
        assert_eq!(err(b"P5\n0 1\n255\n"), 3);
    }

    #[test]
    fn missing_file_is_an_io_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(read_pgm(dir.path().join("none.pgm")), Err(Error::Io { .. })));
    }
}
