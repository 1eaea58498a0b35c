//! Layered settings: `dwt.toml` < `DWT_*` environment < command-line flags.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use dwt_core::complexity::Thresholds;
use dwt_core::orchestrator::API_KEY_ENV;
use dwt_core::render::RenderOptions;
use serde::Deserialize;

pub const CONFIG_FILE: &str = "dwt.toml";
pub const CONFIG_ENV: &str = "DWT_CONFIG";
pub const DEFAULT_BASE_URL: &str = "https://api.openai.com/v1";

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenderLayer {
    pub scale: Option<f64>,
    pub padding: Option<f64>,
    pub font_family: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdLayer {
    pub medium: Option<f64>,
    pub hard: Option<f64>,
}

/// One source of settings. Unset keys defer to lower layers.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Layer {
    pub model: Option<String>,
    pub base_url: Option<String>,
    /// Name of the environment variable holding the API key.
    pub api_key_env: Option<String>,
    pub t_refine: Option<usize>,
    pub retries: Option<usize>,
    pub trace_dir: Option<PathBuf>,
    pub fallback_skeleton: Option<bool>,
    pub reattach_image: Option<bool>,
    #[serde(default)]
    pub render: RenderLayer,
    #[serde(default)]
    pub thresholds: ThresholdLayer,
}

macro_rules! overlay {
    ($low:expr, $high:expr; $($field:ident),*) => {
        $( if $high.$field.is_some() { $low.$field = $high.$field; } )*
    };
}

impl Layer {
    /// Keys set in `high` replace those in `self`.
    pub fn overlay(mut self, high: Layer) -> Layer {
        overlay!(self, high; model, base_url, api_key_env, t_refine, retries, trace_dir, fallback_skeleton, reattach_image);
        overlay!(self.render, high.render; scale, padding, font_family);
        overlay!(self.thresholds, high.thresholds; medium, hard);
        self
    }

    pub fn from_toml(text: &str) -> Result<Layer, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn load(path: &Path) -> Result<Layer, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        Layer::from_toml(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    /// Reads `DWT_MODEL`, `DWT_BASE_URL`, `DWT_API_KEY_ENV`, `DWT_T_REFINE`,
    /// `DWT_RETRIES`, `DWT_TRACE_DIR`, `DWT_SCALE`, `DWT_THRESHOLD_MEDIUM`
    /// and `DWT_THRESHOLD_HARD` through `var`.
    pub fn from_env(var: impl Fn(&str) -> Option<String>) -> Result<Layer, String> {
        let get = |name: &str| var(name).filter(|v| !v.trim().is_empty());
        fn parse<T: FromStr>(name: &str, value: Option<String>) -> Result<Option<T>, String>
        where
            T::Err: std::fmt::Display,
        {
            value.map(|v| v.trim().parse().map_err(|e| format!("{name}={v:?}: {e}"))).transpose()
        }
        Ok(Layer {
            model: get("DWT_MODEL"),
            base_url: get("DWT_BASE_URL"),
            api_key_env: get("DWT_API_KEY_ENV"),
            t_refine: parse("DWT_T_REFINE", get("DWT_T_REFINE"))?,
            retries: parse("DWT_RETRIES", get("DWT_RETRIES"))?,
            trace_dir: get("DWT_TRACE_DIR").map(PathBuf::from),
            fallback_skeleton: None,
            reattach_image: None,
            render: RenderLayer { scale: parse("DWT_SCALE", get("DWT_SCALE"))?, padding: None, font_family: None },
            thresholds: ThresholdLayer {
                medium: parse("DWT_THRESHOLD_MEDIUM", get("DWT_THRESHOLD_MEDIUM"))?,
                hard: parse("DWT_THRESHOLD_HARD", get("DWT_THRESHOLD_HARD"))?,
            },
        })
    }
}

/// Fully resolved settings.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub model: Option<String>,
    pub base_url: String,
    pub api_key_env: String,
    pub t_refine: usize,
    pub retries: usize,
    pub trace_dir: Option<PathBuf>,
    pub fallback_skeleton: bool,
    pub reattach_image: bool,
    pub render: RenderOptions,
    pub thresholds: Thresholds,
}

impl Config {
    pub fn resolve(layer: Layer) -> Result<Config, String> {
        let defaults = dwt_core::orchestrator::PipelineConfig::default();
        let mut render = RenderOptions::default();
        if let Some(s) = layer.render.scale {
            render.scale = s;
        }
        if let Some(p) = layer.render.padding {
            render.padding = p;
        }
        if let Some(f) = layer.render.font_family {
            render.font.family = f;
        }
        if !(render.scale.is_finite() && render.scale > 0.0) {
            return Err(format!("render scale must be positive, got {}", render.scale));
        }
        let base = Thresholds::default();
        let thresholds =
            Thresholds { medium: layer.thresholds.medium.unwrap_or(base.medium), hard: layer.thresholds.hard.unwrap_or(base.hard) };
        if thresholds.medium > thresholds.hard {
            return Err(format!("threshold medium ({}) exceeds hard ({})", thresholds.medium, thresholds.hard));
        }
        Ok(Config {
            model: layer.model,
            base_url: layer.base_url.unwrap_or_else(|| DEFAULT_BASE_URL.to_string()),
            api_key_env: layer.api_key_env.unwrap_or_else(|| API_KEY_ENV.to_string()),
            t_refine: layer.t_refine.unwrap_or(defaults.t_refine),
            retries: layer.retries.unwrap_or(defaults.retries),
            trace_dir: layer.trace_dir,
            fallback_skeleton: layer.fallback_skeleton.unwrap_or(false),
            reattach_image: layer.reattach_image.unwrap_or(false),
            render,
            thresholds,
        })
    }

    /// An explicit path must exist; the implicit `./dwt.toml` is optional.
    pub fn file_layer(explicit: Option<&Path>, env_path: Option<PathBuf>) -> Result<Layer, String> {
        match explicit.map(Path::to_path_buf).or(env_path) {
            Some(path) => Layer::load(&path),
            None if Path::new(CONFIG_FILE).is_file() => Layer::load(Path::new(CONFIG_FILE)),
            None => Ok(Layer::default()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env<'a>(pairs: &'a [(&'a str, &'a str)]) -> impl Fn(&str) -> Option<String> + 'a {
        move |k| pairs.iter().find(|(n, _)| *n == k).map(|(_, v)| v.to_string())
    }

    #[test]
    fn precedence_is_file_then_env_then_flags() {
        let file = Layer::from_toml("model = \"file-model\"\nt_refine = 5\nretries = 1\n[render]\nscale = 2.0\n").unwrap();
        let env = Layer::from_env(env(&[("DWT_MODEL", "env-model"), ("DWT_T_REFINE", "4")])).unwrap();
        let flags = Layer { t_refine: Some(2), ..Layer::default() };
        let cfg = Config::resolve(file.overlay(env).overlay(flags)).unwrap();
        assert_eq!(cfg.model.as_deref(), Some("env-model"));
        assert_eq!(cfg.t_refine, 2);
        assert_eq!(cfg.retries, 1);
        assert_eq!(cfg.render.scale, 2.0);
        assert_eq!(cfg.api_key_env, API_KEY_ENV);
    }

    #[test]
    fn defaults_without_layers() {
        let cfg = Config::resolve(Layer::default()).unwrap();
        assert_eq!((cfg.t_refine, cfg.base_url.as_str()), (3, DEFAULT_BASE_URL));
        assert_eq!(cfg.thresholds, Thresholds::default());
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(Layer::from_toml("modle = \"x\"").is_err());
        assert!(Layer::from_env(env(&[("DWT_T_REFINE", "three")])).unwrap_err().contains("DWT_T_REFINE"));
        let bad = Layer { thresholds: ThresholdLayer { medium: Some(4.0), hard: Some(3.0) }, ..Layer::default() };
        assert!(Config::resolve(bad).is_err());
        let zero = Layer { render: RenderLayer { scale: Some(0.0), ..RenderLayer::default() }, ..Layer::default() };
        assert!(Config::resolve(zero).is_err());
    }

    #[test]
    fn blank_env_values_are_unset() {
        assert_eq!(Layer::from_env(env(&[("DWT_MODEL", "  ")])).unwrap(), Layer::default());
    }
}
