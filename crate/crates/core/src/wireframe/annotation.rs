//! Line-oriented `@key: value` annotation grammar.
//!
//! ```text
//! @component: <token>
//! @data: <free text>
//! @event: <name> -> <free text>
//! @depends: <id>[, <id>...]
//! @page: <id>
//! @<other-key>: <text>
//! ```
//!
//! Keys are case-insensitive and may appear once, except `@event`, which may
//! repeat with distinct event names. Lines without a leading `@` are kept in
//! the `note` attribute; text with no keys at all becomes an `unknown`
//! annotation holding the text under `raw`.

use std::collections::BTreeSet;

use thiserror::Error;

use super::model::{Annotation, ComponentKind, EventBinding};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnnotationError {
    #[error("duplicate annotation key `@{key}`")]
    DuplicateKey { key: String },
    #[error("malformed event line `{line}`: expected `@event: <name> -> <action>`")]
    MalformedEvent { line: String },
}

pub fn parse_annotation(raw: &str) -> Result<Annotation, AnnotationError> {
    let mut ann = Annotation::of_kind(ComponentKind::Unknown(ComponentKind::UNKNOWN.into()));
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut event_names: BTreeSet<String> = BTreeSet::new();
    let mut notes: Vec<&str> = Vec::new();
    let mut any_key = false;

    for line in raw.lines().map(str::trim).filter(|l| !l.is_empty()) {
        let Some(body) = line.strip_prefix('@') else {
            notes.push(line);
            continue;
        };
        any_key = true;
        let (key, value) = match body.split_once(':') {
            Some((k, v)) => (k.trim().to_lowercase(), v.trim()),
            None => (body.trim().to_lowercase(), ""),
        };

        if key == "event" {
            let ev = parse_event(value).ok_or_else(|| AnnotationError::MalformedEvent { line: line.to_string() })?;
            if !event_names.insert(ev.name.clone()) {
                return Err(AnnotationError::DuplicateKey { key: format!("event {}", ev.name) });
            }
            ann.events.push(ev);
            continue;
        }
        if !seen.insert(key.clone()) {
            return Err(AnnotationError::DuplicateKey { key });
        }
        match key.as_str() {
            "component" => ann.component_kind = ComponentKind::parse(value),
            "data" => ann.data_binding = Some(value.to_string()),
            "depends" => {
                ann.depends_on = value.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()
            }
            "page" => ann.page_ref = Some(value.to_string()),
            _ => {
                ann.attributes.insert(key, value.to_string());
            }
        }
    }

    if !any_key {
        ann.attributes.insert("raw".into(), raw.trim().to_string());
    } else if !notes.is_empty() {
        ann.attributes.insert("note".into(), notes.join("\n"));
    }
    Ok(ann)
}

fn parse_event(value: &str) -> Option<EventBinding> {
    let (name, action) = value.split_once("->")?;
    let name = name.trim();
    let action = action.trim();
    if name.is_empty() || action.is_empty() || name.chars().any(char::is_whitespace) {
        return None;
    }
    Some(EventBinding { name: name.to_string(), action: action.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn webmap_with_data_and_event() {
        let a = parse_annotation(
            "@component: webmap\n@data: site locations shapefile\n@event: click -> show station popup",
        )
        .unwrap();
        assert_eq!(a.component_kind, ComponentKind::Webmap);
        assert_eq!(a.data_binding.as_deref(), Some("site locations shapefile"));
        assert_eq!(a.events, vec![EventBinding { name: "click".into(), action: "show station popup".into() }]);
        assert!(a.attributes.is_empty());
    }

    #[test]
    fn minimal_component() {
        let a = parse_annotation("@component: date-selector").unwrap();
        assert_eq!(a.component_kind, ComponentKind::DateSelector);
        assert!(a.events.is_empty());
    }

    #[test]
    fn key_free_text_falls_back_to_unknown() {
        let a = parse_annotation("just a note").unwrap();
        assert_eq!(a.component_kind.as_str(), "unknown");
        assert_eq!(a.attributes.get("raw").map(String::as_str), Some("just a note"));
    }

    #[test]
    fn keys_are_case_insensitive_and_unknown_keys_kept() {
        let a = parse_annotation("@Component: Bar Chart\n@TITLE: Flow\n@depends: a, b ,\n@page: dash").unwrap();
        assert_eq!(a.component_kind, ComponentKind::BarChart);
        assert_eq!(a.attributes.get("title").map(String::as_str), Some("Flow"));
        assert_eq!(a.depends_on, vec!["a", "b"]);
        assert_eq!(a.page_ref.as_deref(), Some("dash"));
    }

    #[test]
    fn duplicate_key_is_rejected() {
        let err = parse_annotation("@data: a\n@DATA: b").unwrap_err();
        assert_eq!(err, AnnotationError::DuplicateKey { key: "data".into() });
    }

    #[test]
    fn repeated_event_names_are_rejected() {
        assert!(parse_annotation("@event: click -> a\n@event: hover -> b").is_ok());
        assert!(matches!(
            parse_annotation("@event: click -> a\n@event: click -> b"),
            Err(AnnotationError::DuplicateKey { .. })
        ));
    }

    #[test]
    fn malformed_events() {
        for bad in ["@event: click", "@event: -> x", "@event: click ->", "@event: on click -> x"] {
            let err = parse_annotation(bad).unwrap_err();
            assert_eq!(err, AnnotationError::MalformedEvent { line: bad.into() }, "{bad}");
        }
    }

    #[test]
    fn unknown_component_token_is_preserved() {
        let a = parse_annotation("@component: layer switcher").unwrap();
        assert!(!a.component_kind.is_known());
        assert_eq!(a.component_kind.as_str(), "layer-switcher");
    }

    proptest! {
        #[test]
        fn total_on_key_free_text(s in "[^@\r]*") {
            let a = parse_annotation(&s).unwrap();
            prop_assert_eq!(a.component_kind.as_str(), "unknown");
        }

        #[test]
        fn errors_only_on_duplicates_or_bad_events(
            keys in proptest::collection::vec(
                prop_oneof![Just("component"), Just("data"), Just("page"), Just("x-note"), Just("event")],
                0..6),
            good_event in any::<bool>(),
        ) {
            let mut text = String::new();
            for (i, k) in keys.iter().enumerate() {
                if *k == "event" {
                    if good_event { text.push_str(&format!("@event: e{i} -> act\n")); }
                    else { text.push_str("@event: no arrow\n"); }
                } else {
                    text.push_str(&format!("@{k}: v{i}\n"));
                }
            }
            let plain: Vec<_> = keys.iter().filter(|k| **k != "event").collect();
            let dup = plain.len() != plain.iter().collect::<std::collections::BTreeSet<_>>().len();
            let bad_event = !good_event && keys.contains(&"event");
            let r = parse_annotation(&text);
            prop_assert_eq!(r.is_err(), dup || bad_event);
        }
    }
}
