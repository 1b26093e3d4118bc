use std::sync::OnceLock;

use regex::Regex;
use thiserror::Error;

/// One file extracted from a model response.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedFile {
    pub path: String,
    pub contents: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("response contains no fenced code block with a file marker")]
    NoBlocks,
    #[error("response names `{0}` more than once")]
    DuplicatePath(String),
    #[error("invalid file path `{path}`: {reason}")]
    InvalidPath { path: String, reason: String },
}

fn markers() -> &'static [Regex; 3] {
    static RE: OnceLock<[Regex; 3]> = OnceLock::new();
    RE.get_or_init(|| {
        [
            Regex::new(r"^\s*//\s*file:\s*(.*?)\s*$").unwrap(),
            Regex::new(r"^\s*/\*\s*file:\s*(.*?)\s*\*/\s*$").unwrap(),
            Regex::new(r"^\s*#\s*file:\s*(.*?)\s*$").unwrap(),
        ]
    })
}

fn marker_path(line: &str) -> Option<&str> {
    markers().iter().find_map(|re| re.captures(line).and_then(|c| c.get(1)).map(|m| m.as_str()))
}

/// Checks a project-relative path and returns its normal form: forward
/// slashes, no `.` or empty segments. Absolute paths, drive letters,
/// backslashes, `..`, colons and control characters are rejected.
pub fn normalize_path(raw: &str) -> Result<String, ParseError> {
    let bad = |reason: &str| Err(ParseError::InvalidPath { path: raw.to_string(), reason: reason.into() });
    let p = raw.trim();
    if p.is_empty() {
        return bad("empty path");
    }
    if p.chars().any(char::is_control) {
        return bad("control character");
    }
    if p.starts_with('/') || p.starts_with('\\') {
        return bad("absolute path");
    }
    if p.contains('\\') {
        return bad("backslash separator");
    }
    if p.contains(':') {
        return bad("drive letter or colon");
    }
    if p.starts_with('~') {
        return bad("home-relative path");
    }
    let mut parts = Vec::new();
    for seg in p.split('/') {
        match seg {
            "" | "." => {}
            ".." => return bad("parent-directory segment"),
            s if s.trim() != s || s.ends_with('.') => return bad("segment with surrounding spaces or trailing dot"),
            s => parts.push(s),
        }
    }
    if parts.is_empty() {
        return bad("no file name");
    }
    Ok(parts.join("/"))
}

/// Extracts files from fenced blocks whose first line is a path marker
/// (`// file: p`, `/* file: p */` or `# file: p`). Blocks without a marker
/// and text outside blocks are ignored. Line endings become LF.
pub fn parse_llm_response(text: &str) -> Result<Vec<ParsedFile>, ParseError> {
    let text = text.replace("\r\n", "\n");
    let mut files: Vec<ParsedFile> = Vec::new();
    let mut lines = text.lines();
    while let Some(line) = lines.next() {
        let trimmed = line.trim_start();
        if !trimmed.starts_with("```") {
            continue;
        }
        let fence_len = trimmed.chars().take_while(|&c| c == '`').count();
        let mut body = Vec::new();
        let mut closed = false;
        for inner in lines.by_ref() {
            let t = inner.trim();
            if t.len() >= fence_len && t.chars().all(|c| c == '`') {
                closed = true;
                break;
            }
            body.push(inner);
        }
        if !closed {
            break;
        }
        let Some(raw) = body.first().and_then(|first| marker_path(first)) else { continue };
        let path = normalize_path(raw)?;
        if files.iter().any(|f| f.path == path) {
            return Err(ParseError::DuplicatePath(path));
        }
        let mut contents = body[1..].join("\n");
        contents.push('\n');
        files.push(ParsedFile { path, contents });
    }
    if files.is_empty() {
        return Err(ParseError::NoBlocks);
    }
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_block() {
        let f = parse_llm_response("Here:\n```tsx\n// file: src/components/MapView.tsx\nexport default 1;\n```\nbye")
            .unwrap();
        assert_eq!(
            f,
            vec![ParsedFile { path: "src/components/MapView.tsx".into(), contents: "export default 1;\n".into() }]
        );
    }

    #[test]
    fn prose_only_fails() {
        assert_eq!(parse_llm_response("no code here"), Err(ParseError::NoBlocks));
        assert_eq!(parse_llm_response("```\nconst x = 1;\n```"), Err(ParseError::NoBlocks));
    }

    #[test]
    fn two_blocks_in_order_with_all_marker_styles() {
        let text = "```css\n/* file: src/styles/a.css */\nbody{}\n```\n```sh\n# file: scripts/x.sh\necho\n```\n";
        let f = parse_llm_response(text).unwrap();
        assert_eq!(f.iter().map(|f| f.path.as_str()).collect::<Vec<_>>(), ["src/styles/a.css", "scripts/x.sh"]);
    }

    #[test]
    fn duplicate_path_fails() {
        let text = "```\n// file: a.ts\n1\n```\n```\n// file: ./a.ts\n2\n```";
        assert_eq!(parse_llm_response(text), Err(ParseError::DuplicatePath("a.ts".into())));
    }

    #[test]
    fn unclosed_block_is_ignored() {
        assert_eq!(parse_llm_response("```\n// file: a.ts\n1\n"), Err(ParseError::NoBlocks));
    }

    #[test]
    fn crlf_is_normalized() {
        let f = parse_llm_response("```\r\n// file: a.ts\r\nx\r\ny\r\n```\r\n").unwrap();
        assert_eq!(f[0].contents, "x\ny\n");
    }

    #[test]
    fn escaping_paths_rejected() {
        for p in [
            "../x",
            "a/../../x",
            "/etc/passwd",
            "\\\\srv\\x",
            "C:/x",
            "c:x",
            "a\\b",
            "~/x",
            "a/\0b",
            "",
            "./.",
            "a/.. /b",
            "x./y",
        ] {
            assert!(normalize_path(p).is_err(), "{p:?}");
        }
        assert_eq!(normalize_path("./src//hooks/./useX.ts").unwrap(), "src/hooks/useX.ts");
    }
}
