//! Minimal converter for the OAEI instance-matching benchmark files
//! (person and restaurant sets) into the tab-separated triple format.
//!
//! This is not a general RDF parser: it handles exactly the node/predicate
//! shape those files use. Node elements carry `rdf:about`; child elements
//! with `rdf:resource` become relationship facts, children with text become
//! property facts. Entity ids are the full URIs.

use std::fs;
use std::io::Write;
use std::path::Path;

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use crate::error::{Result, SigmaError};

#[derive(Debug, Default, PartialEq)]
pub struct RdfTriples {
    pub rel: Vec<(String, String, String)>,
    pub prop: Vec<(String, String, String)>,
}

fn parse_err(msg: String) -> SigmaError {
    SigmaError::Parse {
        path: "<xml>".into(),
        line: 0,
        msg,
    }
}

fn attr_by_local(e: &BytesStart, local: &str) -> Result<Option<String>> {
    for attr in e.attributes() {
        let attr = attr.map_err(|e| parse_err(format!("bad attribute: {e}")))?;
        if attr.key.local_name().into_inner() == local {
            let value = attr
                .normalized_value(quick_xml::XmlVersion::Implicit1_0)
                .map_err(|e| parse_err(format!("bad attribute value: {e}")))?;
            return Ok(Some(value.into_owned()));
        }
    }
    Ok(None)
}

fn local_name(e: &BytesStart) -> String {
    e.local_name().into_inner().to_string()
}

/// Resolves a general reference (`&amp;`-style) to its text.
fn resolve_ref(r: &quick_xml::events::BytesRef) -> Result<String> {
    if let Some(c) = r
        .resolve_char_ref()
        .map_err(|e| parse_err(format!("bad character reference: {e}")))?
    {
        return Ok(c.to_string());
    }
    let resolved = match r.as_ref() {
        "lt" => "<",
        "gt" => ">",
        "amp" => "&",
        "apos" => "'",
        "quot" => "\"",
        other => return Err(parse_err(format!("unknown entity reference &{other};"))),
    };
    Ok(resolved.to_string())
}

/// TSV fields cannot contain tabs or newlines.
fn clean_literal(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

enum Frame {
    /// An element describing an entity (has rdf:about), or a container.
    Node(Option<String>),
    /// A predicate element under a subject; collects text content.
    Pred {
        subject: String,
        name: String,
        text: String,
        emitted_rel: bool,
    },
}

/// Parses an OAEI instance file into relationship and property facts.
pub fn parse_instance_rdf(xml: &str) -> Result<RdfTriples> {
    let mut reader = Reader::from_str(xml);
    let mut out = RdfTriples::default();
    let mut stack: Vec<Frame> = Vec::new();

    let handle_open = |e: &BytesStart,
                       stack: &mut Vec<Frame>,
                       out: &mut RdfTriples|
     -> Result<Frame> {
        let about = attr_by_local(e, "about")?;
        if let Some(about) = about {
            // A nested entity under a predicate is a relationship target.
            if let Some(Frame::Pred {
                subject,
                name,
                emitted_rel,
                ..
            }) = stack.last_mut()
            {
                out.rel.push((subject.clone(), name.clone(), about.clone()));
                *emitted_rel = true;
            }
            return Ok(Frame::Node(Some(about)));
        }
        let subject = stack.iter().rev().find_map(|f| match f {
            Frame::Node(Some(s)) => Some(s.clone()),
            _ => None,
        });
        let Some(subject) = subject else {
            // rdf:RDF or another container above any subject.
            return Ok(Frame::Node(None));
        };
        let name = local_name(e);
        let mut emitted_rel = false;
        if let Some(resource) = attr_by_local(e, "resource")? {
            if name == "type" {
                out.prop.push((subject.clone(), "rdf_type".into(), resource));
            } else {
                out.rel.push((subject.clone(), name.clone(), resource));
            }
            emitted_rel = true;
        }
        Ok(Frame::Pred {
            subject,
            name,
            text: String::new(),
            emitted_rel,
        })
    };

    loop {
        match reader
            .read_event()
            .map_err(|e| parse_err(format!("xml error at {}: {e}", reader.buffer_position())))?
        {
            Event::Start(e) => {
                let frame = handle_open(&e, &mut stack, &mut out)?;
                stack.push(frame);
            }
            Event::Empty(e) => {
                handle_open(&e, &mut stack, &mut out)?;
            }
            Event::Text(t) => {
                if let Some(Frame::Pred { text, .. }) = stack.last_mut() {
                    text.push_str(&t.xml10_content());
                }
            }
            Event::GeneralRef(r) => {
                if let Some(Frame::Pred { text, .. }) = stack.last_mut() {
                    text.push_str(&resolve_ref(&r)?);
                }
            }
            Event::End(_) => {
                if let Some(Frame::Pred {
                    subject,
                    name,
                    text,
                    emitted_rel,
                }) = stack.pop()
                {
                    let value = clean_literal(&text);
                    if !emitted_rel && !value.is_empty() {
                        out.prop.push((subject, name, value));
                    }
                }
            }
            Event::Eof => break,
            _ => {}
        }
    }
    Ok(out)
}

/// Parses an OAEI reference alignment (`Cell` elements with `entity1` and
/// `entity2` resources) into ground-truth pairs.
pub fn parse_reference_alignment(xml: &str) -> Result<Vec<(String, String)>> {
    let mut reader = Reader::from_str(xml);
    let mut pairs = Vec::new();
    let mut current: (Option<String>, Option<String>) = (None, None);

    let handle = |e: &BytesStart,
                      current: &mut (Option<String>, Option<String>),
                      pairs: &mut Vec<(String, String)>|
     -> Result<()> {
        match e.local_name().into_inner() {
            "Cell" => *current = (None, None),
            "entity1" => current.0 = attr_by_local(e, "resource")?,
            "entity2" => current.1 = attr_by_local(e, "resource")?,
            _ => {}
        }
        if let (Some(a), Some(b)) = (&current.0, &current.1) {
            pairs.push((a.clone(), b.clone()));
            *current = (None, None);
        }
        Ok(())
    };

    loop {
        match reader
            .read_event()
            .map_err(|e| parse_err(format!("xml error at {}: {e}", reader.buffer_position())))?
        {
            Event::Start(e) => handle(&e, &mut current, &mut pairs)?,
            Event::Empty(e) => handle(&e, &mut current, &mut pairs)?,
            Event::Eof => break,
            _ => {}
        }
    }
    Ok(pairs)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| SigmaError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_triples(path: &Path, triples: &[(String, String, String)]) -> Result<()> {
    let io_err = |source| SigmaError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut f = fs::File::create(path).map_err(io_err)?;
    for (a, b, c) in triples {
        writeln!(f, "{a}\t{b}\t{c}").map_err(io_err)?;
    }
    Ok(())
}

/// Converts one benchmark (two instance files plus the reference alignment)
/// into `kb1.rel.tsv`, `kb1.prop.tsv`, `kb2.rel.tsv`, `kb2.prop.tsv`, and
/// `gt.tsv` under `out_dir`.
pub fn convert_benchmark(
    kb1_rdf: &Path,
    kb2_rdf: &Path,
    refalign: &Path,
    out_dir: &Path,
) -> Result<()> {
    let t1 = parse_instance_rdf(&read(kb1_rdf)?)?;
    let t2 = parse_instance_rdf(&read(kb2_rdf)?)?;
    let gt = parse_reference_alignment(&read(refalign)?)?;

    fs::create_dir_all(out_dir).map_err(|source| SigmaError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    write_triples(&out_dir.join("kb1.rel.tsv"), &t1.rel)?;
    write_triples(&out_dir.join("kb1.prop.tsv"), &t1.prop)?;
    write_triples(&out_dir.join("kb2.rel.tsv"), &t2.rel)?;
    write_triples(&out_dir.join("kb2.prop.tsv"), &t2.prop)?;

    let gt_path = out_dir.join("gt.tsv");
    let text: String = gt.iter().map(|(a, b)| format!("{a}\t{b}\n")).collect();
    fs::write(&gt_path, text).map_err(|source| SigmaError::Io {
        path: gt_path,
        source,
    })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const INSTANCE: &str = r#"<?xml version="1.0"?>
<rdf:RDF xmlns:rdf="http://www.w3.org/1999/02/22-rdf-syntax-ns#"
         xmlns="http://example.org/onto1.owl#">
  <rdf:Description rdf:about="http://example.org/p1-Person100">
    <rdf:type rdf:resource="http://example.org/onto1.owl#Person"/>
    <surname>smith</surname>
    <given_name>john &amp; co</given_name>
    <has_address rdf:resource="http://example.org/p1-Address100"/>
  </rdf:Description>
  <rdf:Description rdf:about="http://example.org/p1-Address100">
    <street>main   road</street>
    <house_number>12</house_number>
  </rdf:Description>
</rdf:RDF>
"#;

    #[test]
    fn instance_facts_extracted() {
        let t = parse_instance_rdf(INSTANCE).unwrap();
        assert_eq!(
            t.rel,
            vec![(
                "http://example.org/p1-Person100".to_string(),
                "has_address".to_string(),
                "http://example.org/p1-Address100".to_string()
            )]
        );
        assert_eq!(t.prop.len(), 5);
        assert!(t.prop.contains(&(
            "http://example.org/p1-Person100".into(),
            "surname".into(),
            "smith".into()
        )));
        // XML entities unescaped, internal whitespace normalized
        assert!(t.prop.contains(&(
            "http://example.org/p1-Person100".into(),
            "given_name".into(),
            "john & co".into()
        )));
        assert!(t.prop.contains(&(
            "http://example.org/p1-Address100".into(),
            "street".into(),
            "main road".into()
        )));
        assert!(t.prop.contains(&(
            "http://example.org/p1-Person100".into(),
            "rdf_type".into(),
            "http://example.org/onto1.owl#Person".into()
        )));
    }

    #[test]
    fn nested_node_becomes_relationship() {
        let xml = r#"<rdf:RDF xmlns:rdf="http://www.w3.org/1999/02/22-rdf-syntax-ns#">
  <rdf:Description rdf:about="urn:r1">
    <has_address>
      <rdf:Description rdf:about="urn:a1">
        <city>napa</city>
      </rdf:Description>
    </has_address>
  </rdf:Description>
</rdf:RDF>"#;
        let t = parse_instance_rdf(xml).unwrap();
        assert_eq!(
            t.rel,
            vec![("urn:r1".into(), "has_address".into(), "urn:a1".into())]
        );
        assert_eq!(t.prop, vec![("urn:a1".into(), "city".into(), "napa".into())]);
    }

    #[test]
    fn reference_alignment_pairs() {
        let xml = r#"<?xml version="1.0"?>
<rdf:RDF xmlns:rdf="http://www.w3.org/1999/02/22-rdf-syntax-ns#"
         xmlns="http://knowledgeweb.semanticweb.org/heterogeneity/alignment#">
  <Alignment>
    <map><Cell>
      <entity1 rdf:resource="urn:kb1:e1"/>
      <entity2 rdf:resource="urn:kb2:e7"/>
      <relation>=</relation><measure>1.0</measure>
    </Cell></map>
    <map><Cell>
      <entity1 rdf:resource="urn:kb1:e2"/>
      <entity2 rdf:resource="urn:kb2:e9"/>
      <relation>=</relation><measure>1.0</measure>
    </Cell></map>
  </Alignment>
</rdf:RDF>"#;
        let pairs = parse_reference_alignment(xml).unwrap();
        assert_eq!(
            pairs,
            vec![
                ("urn:kb1:e1".into(), "urn:kb2:e7".into()),
                ("urn:kb1:e2".into(), "urn:kb2:e9".into()),
            ]
        );
    }

    #[test]
    fn convert_writes_all_files() {
        let dir = tempfile::tempdir().unwrap();
        let p = |name: &str, content: &str| {
            let path = dir.path().join(name);
            fs::write(&path, content).unwrap();
            path
        };
        let kb1 = p("kb1.rdf", INSTANCE);
        let kb2 = p("kb2.rdf", INSTANCE);
        let gt = p(
            "ref.rdf",
            r#"<rdf:RDF xmlns:rdf="http://www.w3.org/1999/02/22-rdf-syntax-ns#">
<Cell><entity1 rdf:resource="urn:a"/><entity2 rdf:resource="urn:b"/></Cell>
</rdf:RDF>"#,
        );
        let out = dir.path().join("out");
        convert_benchmark(&kb1, &kb2, &gt, &out).unwrap();
        for name in ["kb1.rel.tsv", "kb1.prop.tsv", "kb2.rel.tsv", "kb2.prop.tsv", "gt.tsv"] {
            assert!(out.join(name).exists(), "{name} missing");
        }
        let gt_text = fs::read_to_string(out.join("gt.tsv")).unwrap();
        assert_eq!(gt_text, "urn:a\turn:b\n");
    }
}
