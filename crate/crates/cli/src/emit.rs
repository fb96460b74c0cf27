use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::config::Format;
use crate::error::CliError;
use crate::report::Report;

/// Shortest round-trip form, as in the JSON output.
fn number(x: f64) -> String {
    if x.is_finite() {
        serde_json::to_string(&x).expect("finite float serializes")
    } else {
        "NaN".to_string()
    }
}

pub fn render_csv(report: &Report) -> String {
    let mut out = String::from("name,value,ci95,samples\n");
    for e in &report.estimates {
        out.push_str(&format!("{},{},{},{}\n", e.name, number(e.value), number(e.ci95), e.samples));
    }
    out
}

pub fn render(report: &Report, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => Ok(report.payload_json()),
        Format::Csv => Ok(render_csv(report)),
        Format::Svg => report.figure.clone().ok_or_else(|| {
            CliError::precondition("output.format", format!("{} produces no figure", report.command.name()))
        }),
    }
}

/// Writes the report to `path`: rendered to a sibling temp file, flushed,
/// then renamed over the destination.
pub fn emit(report: &Report, format: Format, path: &Path) -> Result<(), CliError> {
    let body = render(report, format)?;
    let io = |source| CliError::Io { path: path.to_path_buf(), source };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = path.file_name().ok_or_else(|| CliError::precondition("output.path", "has no file name"))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let write = || -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(body.as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    };
    write().map_err(|e| {
        let _ = fs::remove_file(&tmp);
        io(e)
    })
}
