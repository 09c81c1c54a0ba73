use std::path::Path;

use crate::error::ConvertError;

/// A shell-free command template. The template string is split on
/// whitespace *before* placeholder substitution, so substituted paths
/// may contain spaces without any quoting or escaping rules.
#[derive(Debug, Clone, PartialEq, Eq)]
struct CommandTemplate {
    tokens: Vec<String>,
}

impl CommandTemplate {
    fn parse(template: &str, required: &[&str]) -> Result<Self, ConvertError> {
        let tokens: Vec<String> = template.split_whitespace().map(str::to_string).collect();
        if tokens.is_empty() {
            return Err(ConvertError::BadTemplate("empty command".to_string()));
        }
        for placeholder in required {
            if !tokens.iter().any(|t| t.contains(placeholder)) {
                return Err(ConvertError::BadTemplate(format!(
                    "missing required placeholder {placeholder}"
                )));
            }
        }
        Ok(CommandTemplate { tokens })
    }

    /// Substitute `(placeholder, value)` pairs in every token.
    fn render(&self, substitutions: &[(&str, &str)]) -> Vec<String> {
        self.tokens
            .iter()
            .map(|token| {
                let mut out = token.clone();
                for (placeholder, value) in substitutions {
                    out = out.replace(placeholder, value);
                }
                out
            })
            .collect()
    }
}

/// Encoder command: consumes a text file listing one image path per
/// line and writes an mp4. Placeholders: `{input_list}`, `{output}`,
/// and optionally `{fps}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncoderCommand {
    template: CommandTemplate,
}

impl EncoderCommand {
    pub fn parse(template: &str) -> Result<Self, ConvertError> {
        Ok(EncoderCommand {
            template: CommandTemplate::parse(template, &["{input_list}", "{output}"])?,
        })
    }

    /// Program and arguments with placeholders filled in.
    pub fn render(&self, input_list: &Path, fps: u32, output: &Path) -> Vec<String> {
        self.template.render(&[
            ("{input_list}", &input_list.to_string_lossy()),
            ("{fps}", &fps.to_string()),
            ("{output}", &output.to_string_lossy()),
        ])
    }
}

/// Decoder command: consumes an mp4 and writes one image file per
/// frame into a directory. Placeholders: `{input}`, `{output_dir}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecoderCommand {
    template: CommandTemplate,
}

impl DecoderCommand {
    pub fn parse(template: &str) -> Result<Self, ConvertError> {
        Ok(DecoderCommand {
            template: CommandTemplate::parse(template, &["{input}", "{output_dir}"])?,
        })
    }

    pub fn render(&self, input: &Path, output_dir: &Path) -> Vec<String> {
        self.template.render(&[
            ("{input}", &input.to_string_lossy()),
            ("{output_dir}", &output_dir.to_string_lossy()),
        ])
    }
}
