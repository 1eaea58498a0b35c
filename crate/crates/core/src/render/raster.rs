use std::sync::{Arc, OnceLock};

use resvg::tiny_skia::{Pixmap, Transform};
use resvg::usvg::{self, fontdb};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RasterError {
    #[error("malformed svg: {0}")]
    Svg(String),
    #[error("invalid raster scale {0}")]
    Scale(f64),
    #[error("raster size {0}x{1} is out of range")]
    Size(u32, u32),
    #[error("png encoding failed: {0}")]
    Encode(String),
}

const FALLBACK_FAMILY: &str = "DejaVu Sans";

fn fonts() -> Arc<fontdb::Database> {
    static DB: OnceLock<Arc<fontdb::Database>> = OnceLock::new();
    DB.get_or_init(|| {
        let mut db = fontdb::Database::new();
        db.load_system_fonts();
        let has_fallback = db.faces().any(|f| f.families.iter().any(|(name, _)| name == FALLBACK_FAMILY));
        if has_fallback {
            db.set_sans_serif_family(FALLBACK_FAMILY);
        }
        Arc::new(db)
    })
    .clone()
}

/// Rasterizes SVG text to PNG at `scale` device pixels per SVG pixel.
/// The image is `ceil(width * scale)` by `ceil(height * scale)`.
pub fn rasterize(svg_text: &str, scale: f64) -> Result<Vec<u8>, RasterError> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(RasterError::Scale(scale));
    }
    let opt = usvg::Options { fontdb: fonts(), ..usvg::Options::default() };
    let tree = usvg::Tree::from_str(svg_text, &opt).map_err(|e| RasterError::Svg(e.to_string()))?;
    let size = tree.size();
    let w = (f64::from(size.width()) * scale).ceil();
    let h = (f64::from(size.height()) * scale).ceil();
    let (w, h) = (w as u32, h as u32);
    let mut pixmap = Pixmap::new(w, h).ok_or(RasterError::Size(w, h))?;
    let s = scale as f32;
    resvg::render(&tree, Transform::from_scale(s, s), &mut pixmap.as_mut());
    pixmap.encode_png().map_err(|e| RasterError::Encode(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn malformed_svg_is_rejected() {
        assert!(matches!(rasterize("<svg", 1.0), Err(RasterError::Svg(_))));
        assert!(matches!(rasterize("<svg/>", 0.0), Err(RasterError::Scale(_))));
    }
}
