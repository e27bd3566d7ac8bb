//! Decoded frame images named `frame_%06d.png` or `frame_%06d.ppm`.

use std::fs;
use std::path::{Path, PathBuf};

use image::RgbImage;

use crate::error::{Error, Result};

fn frame_number(name: &str) -> Option<usize> {
    let stem = name
        .strip_suffix(".png")
        .or_else(|| name.strip_suffix(".ppm"))?
        .strip_prefix("frame_")?;
    (stem.len() == 6 && stem.bytes().all(|b| b.is_ascii_digit()))
        .then(|| stem.parse().ok())
        .flatten()
}

/// Frame files of `dir` in frame order. Numbering must start at 0 with no gaps.
pub fn list_frames(dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut frames = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let name = entry.file_name();
        if let Some(n) = name.to_str().and_then(frame_number) {
            frames.push((n, entry.path()));
        }
    }
    frames.sort();
    for (expected, (found, path)) in frames.iter().enumerate() {
        if *found != expected {
            return Err(Error::format(
                path,
                if *found < expected {
                    format!("frame {found} present twice")
                } else {
                    format!("expected frame {expected}")
                },
            ));
        }
    }
    if frames.is_empty() {
        return Err(Error::format(dir, "no frame_NNNNNN.png or .ppm files"));
    }
    Ok(frames.into_iter().map(|(_, p)| p).collect())
}

pub fn load_frame(path: impl AsRef<Path>) -> Result<RgbImage> {
    let path = path.as_ref();
    let img = image::open(path).map_err(|e| Error::Image(format!("{}: {e}", path.display())))?;
    Ok(img.to_rgb8())
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::Rgb;

    #[test]
    fn parses_names() {
        assert_eq!(frame_number("frame_000012.png"), Some(12));
        assert_eq!(frame_number("frame_000000.ppm"), Some(0));
        assert_eq!(frame_number("frame_12.png"), None);
        assert_eq!(frame_number("frame_000001.jpg"), None);
        assert_eq!(frame_number("img_000001.png"), None);
    }

    #[test]
    fn lists_and_loads_both_formats() {
        let dir = tempfile::tempdir().unwrap();
        let img = RgbImage::from_pixel(4, 3, Rgb([1, 2, 3]));
        img.save(dir.path().join("frame_000000.png")).unwrap();
        img.save(dir.path().join("frame_000001.ppm")).unwrap();
        fs::write(dir.path().join("notes.txt"), "x").unwrap();
        let frames = list_frames(dir.path()).unwrap();
        assert_eq!(frames.len(), 2);
        for f in frames {
            assert_eq!(load_frame(f).unwrap(), img);
        }
    }

    #[test]
    fn rejects_gaps_and_duplicates() {
        let dir = tempfile::tempdir().unwrap();
        let img = RgbImage::new(2, 2);
        img.save(dir.path().join("frame_000000.png")).unwrap();
        img.save(dir.path().join("frame_000002.png")).unwrap();
        assert!(list_frames(dir.path()).is_err());
        img.save(dir.path().join("frame_000001.png")).unwrap();
        img.save(dir.path().join("frame_000001.ppm")).unwrap();
        assert!(list_frames(dir.path()).is_err());
        assert!(list_frames(dir.path().join("missing")).is_err());
        assert!(list_frames(tempfile::tempdir().unwrap().path()).is_err());
    }
}
