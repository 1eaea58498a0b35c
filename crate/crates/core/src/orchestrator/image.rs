use std::path::Path;
use std::sync::Arc;

use base64::Engine;
use thiserror::Error;

/// A raster diagram as sent to the model: PNG or JPEG bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputDiagram {
    pub mime: &'static str,
    pub bytes: Arc<Vec<u8>>,
    pub width: u32,
    pub height: u32,
}

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("not a PNG or JPEG image")]
    UnsupportedFormat,
    #[error("image does not decode: {0}")]
    Decode(String),
}

impl InputDiagram {
    /// Accepts PNG or JPEG bytes that fully decode.
    pub fn from_bytes(bytes: Vec<u8>) -> Result<InputDiagram, ImageError> {
        let format = image::guess_format(&bytes).map_err(|_| ImageError::UnsupportedFormat)?;
        let mime = match format {
            image::ImageFormat::Png => "image/png",
            image::ImageFormat::Jpeg => "image/jpeg",
            _ => return Err(ImageError::UnsupportedFormat),
        };
        let decoded = image::load_from_memory_with_format(&bytes, format).map_err(|e| ImageError::Decode(e.to_string()))?;
        Ok(InputDiagram { mime, width: decoded.width(), height: decoded.height(), bytes: Arc::new(bytes) })
    }

    pub fn load(path: &Path) -> Result<InputDiagram, ImageError> {
        let bytes = std::fs::read(path).map_err(|source| ImageError::Io { path: path.display().to_string(), source })?;
        InputDiagram::from_bytes(bytes)
    }

    pub fn data_uri(&self) -> String {
        format!("data:{};base64,{}", self.mime, base64::engine::general_purpose::STANDARD.encode(self.bytes.as_slice()))
    }
}
