//! Image and map files.
//!
//! Binary PGM/PPM (P5/P6) is read and written natively and is the
//! canonical format; PNG goes through the `image` crate. Display maps are
//! min-max normalized; raw dumps keep absolute values.

use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::GroundTruth;
use crate::image::RgbImage;
use crate::models::Provenance;
use crate::plane::{min_max, normalize_min_max};

fn decode_err(path: &Path, msg: impl std::fmt::Display) -> Error {
    Error::Decode(format!("{}: {msg}", path.display()))
}

struct PnmHeader {
    magic: [u8; 2],
    width: usize,
    height: usize,
    maxval: u32,
    data_start: usize,
}

fn parse_pnm_header(bytes: &[u8]) -> std::result::Result<PnmHeader, String> {
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err("not a PNM file".into());
    }
    let magic = [bytes[0], bytes[1]];
    if magic[1] != b'5' && magic[1] != b'6' {
        return Err(format!("unsupported PNM variant P{}", magic[1] as char));
    }
    let mut pos = 2;
    let mut fields = [0u32; 3];
    for field in &mut fields {
        // whitespace and comments
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(|b| b.is_ascii_digit()) {
            pos += 1;
        }
        if start == pos {
            return Err("truncated header".into());
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .unwrap()
            .parse()
            .map_err(|_| "header value out of range".to_string())?;
    }
    // exactly one whitespace byte before the raster
    if !bytes.get(pos).is_some_and(|b| b.is_ascii_whitespace()) {
        return Err("missing separator after header".into());
    }
    let [width, height, maxval] = fields;
    if width == 0 || height == 0 {
        return Err("empty image".into());
    }
    if maxval == 0 || maxval > 65535 {
        return Err(format!("maxval {maxval} outside 1..=65535"));
    }
    Ok(PnmHeader {
        magic,
        width: width as usize,
        height: height as usize,
        maxval,
        data_start: pos + 1,
    })
}

/// Decodes a binary PGM (gray, replicated to three channels) or PPM.
pub fn decode_pnm(bytes: &[u8]) -> std::result::Result<RgbImage, String> {
    let hdr = parse_pnm_header(bytes)?;
    let channels = if hdr.magic[1] == b'6' { 3 } else { 1 };
    let sample_bytes = if hdr.maxval > 255 { 2 } else { 1 };
    let need = hdr.width * hdr.height * channels * sample_bytes;
    let data = &bytes[hdr.data_start..];
    if data.len() < need {
        return Err(format!("raster truncated: {} of {need} bytes", data.len()));
    }
    let max = hdr.maxval as f64;
    let sample = |i: usize| -> f64 {
        let v = if sample_bytes == 2 {
            u16::from_be_bytes([data[2 * i], data[2 * i + 1]]) as u32
        } else {
            data[i] as u32
        };
        (v.min(hdr.maxval)) as f64 / max
    };
    let (h, w) = (hdr.height, hdr.width);
    let plane =
        |ch: usize| Array2::from_shape_fn((h, w), |(r, c)| sample((r * w + c) * channels + ch.min(channels - 1)));
    RgbImage::new(plane(0), plane(1), plane(2)).map_err(|e| e.to_string())
}

fn quantize(v: f64, max: f64) -> u32 {
    (v.clamp(0.0, 1.0) * max).round() as u32
}

/// 8-bit binary PPM.
pub fn encode_ppm(img: &RgbImage) -> Vec<u8> {
    let (h, w) = img.dim();
    let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
    out.reserve(h * w * 3);
    for r in 0..h {
        for c in 0..w {
            for v in img.get(r, c) {
                out.push(quantize(v, 255.0) as u8);
            }
        }
    }
    out
}

/// Binary PGM of a plane already scaled to [0, 1], 8 or 16 bits.
pub fn encode_pgm(plane: &Array2<f64>, sixteen_bit: bool) -> Vec<u8> {
    let (h, w) = plane.dim();
    let max = if sixteen_bit { 65535 } else { 255 };
    let mut out = format!("P5\n{w} {h}\n{max}\n").into_bytes();
    for &v in plane.iter() {
        let q = quantize(v, max as f64);
        if sixteen_bit {
            out.extend_from_slice(&(q as u16).to_be_bytes());
        } else {
            out.push(q as u8);
        }
    }
    out
}

fn is_png(bytes: &[u8]) -> bool {
    bytes.starts_with(&[0x89, b'P', b'N', b'G'])
}

/// Loads a PGM, PPM or PNG image, detected from the file contents.
pub fn load_image(path: &Path) -> Result<RgbImage> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if is_png(&bytes) {
        let decoded = image::load_from_memory_with_format(&bytes, image::ImageFormat::Png)
            .map_err(|e| decode_err(path, e))?
            .to_rgb8();
        let (w, h) = decoded.dimensions();
        return RgbImage::from_rgb8(h as usize, w as usize, decoded.as_raw());
    }
    decode_pnm(&bytes).map_err(|e| decode_err(path, e))
}

/// Loads a binary mask: pixels whose intensity exceeds one half are
/// positive.
pub fn load_mask(path: &Path) -> Result<GroundTruth> {
    let img = load_image(path)?;
    GroundTruth::region(img.intensity().mapv(|v| v > 0.5))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn extension(path: &Path) -> String {
    path.extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase()
}

/// Writes an RGB image as PPM, or PNG when the extension says so.
pub fn save_image(path: &Path, img: &RgbImage) -> Result<()> {
    if extension(path) == "png" {
        let (h, w) = img.dim();
        let buf = image::RgbImage::from_raw(w as u32, h as u32, img.to_rgb8()).expect("buffer matches dimensions");
        let mut bytes = Vec::new();
        buf.write_to(&mut std::io::Cursor::new(&mut bytes), image::ImageFormat::Png)
            .map_err(|e| decode_err(path, e))?;
        return write_bytes(path, &bytes);
    }
    write_bytes(path, &encode_ppm(img))
}

/// Writes a binary mask as an 8-bit PGM/PNG (0 or 255).
pub fn save_mask(path: &Path, mask: &Array2<bool>) -> Result<()> {
    let plane = mask.mapv(|m| if m { 1.0 } else { 0.0 });
    save_gray(path, &plane, false)
}

fn save_gray(path: &Path, plane: &Array2<f64>, sixteen_bit: bool) -> Result<()> {
    if extension(path) == "png" {
        let (h, w) = plane.dim();
        let mut bytes = Vec::new();
        let cursor = &mut std::io::Cursor::new(&mut bytes);
        let res = if sixteen_bit {
            let raw: Vec<u16> = plane.iter().map(|&v| quantize(v, 65535.0) as u16).collect();
            image::ImageBuffer::<image::Luma<u16>, _>::from_raw(w as u32, h as u32, raw)
                .expect("buffer matches dimensions")
                .write_to(cursor, image::ImageFormat::Png)
        } else {
            let raw: Vec<u8> = plane.iter().map(|&v| quantize(v, 255.0) as u8).collect();
            image::GrayImage::from_raw(w as u32, h as u32, raw)
                .expect("buffer matches dimensions")
                .write_to(cursor, image::ImageFormat::Png)
        };
        res.map_err(|e| decode_err(path, e))?;
        return write_bytes(path, &bytes);
    }
    write_bytes(path, &encode_pgm(plane, sixteen_bit))
}

/// Min-max normalized display map (PGM unless the extension is `.png`).
pub fn save_map(path: &Path, map: &Array2<f64>, sixteen_bit: bool) -> Result<()> {
    save_gray(path, &normalize_min_max(map), sixteen_bit)
}

/// Sidecar describing a raw map dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawMapInfo {
    pub height: usize,
    pub width: usize,
    pub min: f64,
    pub max: f64,
    pub provenance: Provenance,
}

/// Little-endian f64 row-major dump plus its sidecar.
pub fn encode_raw_map(map: &Array2<f64>, provenance: &Provenance) -> (Vec<u8>, RawMapInfo) {
    let mut bytes = Vec::with_capacity(map.len() * 8);
    for &v in map.iter() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    let (min, max) = min_max(map);
    let (height, width) = map.dim();
    (
        bytes,
        RawMapInfo {
            height,
            width,
            min,
            max,
            provenance: provenance.clone(),
        },
    )
}

pub fn decode_raw_map(bytes: &[u8], height: usize, width: usize) -> Result<Array2<f64>> {
    if bytes.len() != height * width * 8 {
        return Err(Error::Decode(format!(
            "raw map has {} bytes, expected {} for {width}x{height}",
            bytes.len(),
            height * width * 8
        )));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(Array2::from_shape_vec((height, width), values).expect("length checked"))
}

/// Writes `stem.f64` and `stem.json`.
pub fn save_raw_map(stem: &Path, map: &Array2<f64>, provenance: &Provenance) -> Result<()> {
    let (bytes, info) = encode_raw_map(map, provenance);
    write_bytes(&stem.with_extension("f64"), &bytes)?;
    crate::report::write_json(&stem.with_extension("json"), &info)
}

pub fn load_raw_map(stem: &Path) -> Result<(Array2<f64>, RawMapInfo)> {
    let json = stem.with_extension("json");
    let text = fs::read_to_string(&json).map_err(|e| Error::io(&json, e))?;
    let info: RawMapInfo = serde_json::from_str(&text).map_err(|e| Error::Json { path: json, source: e })?;
    let bin = stem.with_extension("f64");
    let bytes = fs::read(&bin).map_err(|e| Error::io(&bin, e))?;
    Ok((decode_raw_map(&bytes, info.height, info.width)?, info))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    write_bytes(path, text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gradient() -> RgbImage {
        RgbImage::from_rgb8(3, 4, &(0..36).map(|i| (i * 7) as u8).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn ppm_roundtrip_is_bit_exact() {
        let img = gradient();
        let bytes = encode_ppm(&img);
        assert!(bytes.starts_with(b"P6\n4 3\n255\n"));
        let back = decode_pnm(&bytes).unwrap();
        assert_eq!(back, img);
        assert_eq!(encode_ppm(&back), bytes);
    }

    #[test]
    fn pgm_with_comments_and_16_bit() {
        let mut bytes = b"P5\n# made by hand\n2 1\n# another\n65535\n".to_vec();
        bytes.extend_from_slice(&[0, 0, 0xff, 0xff]);
        let img = decode_pnm(&bytes).unwrap();
        assert_eq!(img.get(0, 0), [0.0; 3]);
        assert_eq!(img.get(0, 1), [1.0; 3]);
        let plane = Array2::from_shape_vec((1, 2), vec![0.0, 1.0]).unwrap();
        assert_eq!(decode_pnm(&encode_pgm(&plane, true)).unwrap(), img);
    }

    #[test]
    fn rejects_bad_pnm() {
        assert!(decode_pnm(b"P3\n1 1\n255\n0 0 0").is_err());
        assert!(decode_pnm(b"P5\n2 2\n255\n\x00").is_err());
        assert!(decode_pnm(b"P5\n2 2\n0\n\x00\x00\x00\x00").is_err());
        assert!(decode_pnm(b"P6\n2").is_err());
        assert!(decode_pnm(b"GIF89a").is_err());
    }

    #[test]
    fn files_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let img = gradient();
        for name in ["a.ppm", "a.png"] {
            let p = dir.path().join(name);
            save_image(&p, &img).unwrap();
            assert_eq!(load_image(&p).unwrap(), img, "{name}");
        }
        let map = Array2::from_shape_fn((5, 6), |(r, c)| (r * 6 + c) as f64 * 0.37 + 2.0);
        for name in ["m.pgm", "m.png"] {
            let p = dir.path().join(name);
            save_map(&p, &map, false).unwrap();
            let back = load_image(&p).unwrap().intensity();
            assert_eq!(back[[0, 0]], 0.0);
            assert_eq!(back[[4, 5]], 1.0);
        }
        let mask = Array2::from_shape_fn((5, 6), |(r, c)| r > c);
        let p = dir.path().join("gt.pgm");
        save_mask(&p, &mask).unwrap();
        assert_eq!(load_mask(&p).unwrap(), GroundTruth::Region(mask));
        assert!(matches!(
            load_image(&dir.path().join("missing.ppm")),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn raw_dump_keeps_values() {
        let dir = tempfile::tempdir().unwrap();
        let map = Array2::from_shape_fn((3, 5), |(r, c)| (r as f64 - 1.0) * 1e-7 + c as f64 * 1e5);
        let prov = Provenance {
            model: "hft".into(),
            scale: Some(3),
            post_sigma: 6.4,
        };
        let stem = dir.path().join("map");
        save_raw_map(&stem, &map, &prov).unwrap();
        let (back, info) = load_raw_map(&stem).unwrap();
        assert_eq!(back, map);
        assert_eq!(info.provenance, prov);
        assert_eq!((info.height, info.width), (3, 5));
        // the sidecar is a report: nine significant digits
        assert!((info.max / map[[2, 4]] - 1.0).abs() < 1e-8);
    }
}
