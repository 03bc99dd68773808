//! Parsing of triple files, the relation/property mapping file, ground
//! truth, and prediction files, plus knowledge-base construction.
//!
//! File formats (UTF-8, LF, tab-separated; `#` starts a comment line):
//!   relationship facts  `<entity_id>\t<relation>\t<entity_id>`
//!   property facts      `<entity_id>\t<property>\t<literal>`
//!   mapping             `rel\t<r1>\t<r2>`
//!                       `prop\t<p1>\t<p2>\t<year|exact|string>`
//!                       `label\t<p1>\t<p2>`
//!                       `param\t<name>\t<value>`
//!   ground truth        `<kb1_entity_id>\t<kb2_entity_id>`
//!   matched pairs       `<kb1_id>\t<kb2_id>\t<score>\t<iteration>`

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::config::{
    AlignmentConfig, NeighborWeightMode, PropertyPair, SeedMode, SimKind, Smoothing,
};
use crate::error::{Result, SigmaError};
use crate::kb::{KnowledgeBase, Literal, Matching};

/// Which side of the alignment a KB file belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

fn read_lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let content = fs::read_to_string(path).map_err(|source| SigmaError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(content
        .lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l.to_string()))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .collect())
}

/// Parses a triple file: one tab-separated triple per non-comment line.
pub fn parse_triples(path: &Path) -> Result<Vec<(String, String, String)>> {
    let mut out = Vec::new();
    for (line, text) in read_lines(path)? {
        let fields: Vec<&str> = text.split('\t').collect();
        if fields.len() != 3 {
            return Err(SigmaError::Parse {
                path: path.to_path_buf(),
                line,
                msg: format!("expected 3 fields, found {}", fields.len()),
            });
        }
        out.push((
            fields[0].to_string(),
            fields[1].to_string(),
            fields[2].to_string(),
        ));
    }
    Ok(out)
}

/// Loads the mapping file. Relation pairs are closed under inversion when
/// resolved; parameters missing from the file keep their standard defaults.
pub fn load_alignment_config(path: &Path) -> Result<AlignmentConfig> {
    let mut config = AlignmentConfig::default();
    for (line, text) in read_lines(path)? {
        let fields: Vec<&str> = text.split('\t').collect();
        let err = |msg: String| SigmaError::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        };
        match fields[0] {
            "rel" if fields.len() == 3 => {
                config
                    .matched_relations
                    .push((fields[1].to_string(), fields[2].to_string()));
            }
            "prop" if fields.len() == 4 => {
                config.matched_properties.push(PropertyPair {
                    left: fields[1].to_string(),
                    right: fields[2].to_string(),
                    kind: SimKind::parse(fields[3])?,
                });
            }
            "label" if fields.len() == 3 => {
                config.label_properties = Some((fields[1].to_string(), fields[2].to_string()));
            }
            "param" if fields.len() == 3 => {
                apply_param(&mut config, fields[1], fields[2])
                    .map_err(|e| err(e.to_string()))?;
            }
            kind => {
                return Err(err(format!(
                    "unrecognized or malformed line kind {kind:?} with {} fields",
                    fields.len()
                )));
            }
        }
    }
    config.validate()?;
    Ok(config)
}

pub fn apply_param(config: &mut AlignmentConfig, name: &str, value: &str) -> Result<()> {
    let parse_f64 = |v: &str| {
        v.parse::<f64>()
            .map_err(|_| SigmaError::Config(format!("parameter {name}: invalid number {v:?}")))
    };
    match name {
        "alpha" => config.alpha = parse_f64(value)?,
        "beta" => config.beta = parse_f64(value)?,
        "threshold" | "stop_threshold" => config.stop_threshold = parse_f64(value)?,
        "s0_threshold" => config.s0_threshold = parse_f64(value)?,
        "smoothing" => {
            config.smoothing = if value == "auto" {
                Smoothing::Auto
            } else {
                Smoothing::Fixed(parse_f64(value)?)
            }
        }
        "neighbor_weight" => {
            config.neighbor_weight_mode = match value {
                "uniform" => NeighborWeightMode::Uniform,
                "inverse" => NeighborWeightMode::Inverse,
                other => {
                    return Err(SigmaError::Config(format!(
                        "neighbor_weight must be uniform|inverse, got {other:?}"
                    )))
                }
            }
        }
        "seed_mode" => {
            config.seed_mode = match value {
                "exact" | "exact_string" => SeedMode::ExactString,
                "file" => SeedMode::File,
                "none" => SeedMode::None,
                other => {
                    return Err(SigmaError::Config(format!(
                        "seed_mode must be exact|file|none, got {other:?}"
                    )))
                }
            }
        }
        other => {
            return Err(SigmaError::Config(format!("unknown parameter {other:?}")));
        }
    }
    Ok(())
}

/// Builds a KB from in-memory triples, keeping only facts whose relation or
/// property participates in the mapping. The designated label property
/// feeds the entity labels; entities are distinguished from literals by
/// which fact list they appear in.
pub fn build_kb(
    rel_triples: &[(String, String, String)],
    prop_triples: &[(String, String, String)],
    side: Side,
    config: &AlignmentConfig,
) -> Result<KnowledgeBase> {
    let pick = |pair: (&String, &String)| match side {
        Side::Left => pair.0.clone(),
        Side::Right => pair.1.clone(),
    };
    let mut kb = KnowledgeBase::new();

    let matched_rels: HashSet<String> = config
        .matched_relations
        .iter()
        .map(|(a, b)| pick((a, b)))
        .collect();
    for name in &matched_rels {
        kb.declare_relation(name);
    }
    let matched_props: HashSet<String> = config
        .matched_properties
        .iter()
        .map(|p| pick((&p.left, &p.right)))
        .collect();
    let label_prop = config
        .label_properties
        .as_ref()
        .map(|(a, b)| pick((a, b)));
    if let Some(lp) = &label_prop {
        kb.set_label_property(lp);
    }

    for (e, p, value) in prop_triples {
        let is_label = label_prop.as_deref() == Some(p.as_str());
        let is_matched = matched_props.contains(p);
        if !is_label && !is_matched {
            continue;
        }
        let eid = kb.intern_entity(e);
        if is_label {
            kb.set_label(eid, value);
        }
        if is_matched {
            let pid = kb.declare_property(p);
            kb.add_prop_fact(eid, pid, Literal::parse(value));
        }
    }

    for (e, r, e2) in rel_triples {
        let Some(rid) = kb.relation(r) else { continue };
        let a = kb.intern_entity(e);
        let b = kb.intern_entity(e2);
        kb.add_rel_fact(a, rid, b)?;
    }

    kb.finalize();
    Ok(kb)
}

/// Loads one KB from its relationship-facts and property-facts files.
pub fn load_kb(
    rel_path: &Path,
    prop_path: &Path,
    side: Side,
    config: &AlignmentConfig,
) -> Result<KnowledgeBase> {
    let rel = parse_triples(rel_path)?;
    let prop = parse_triples(prop_path)?;
    build_kb(&rel, &prop, side, config)
}

/// Mapping entries that resolve in neither KB; surfaced as warnings.
pub fn unresolved_mapping_warnings(
    config: &AlignmentConfig,
    kb1: &KnowledgeBase,
    kb2: &KnowledgeBase,
) -> Vec<String> {
    let mut warnings = Vec::new();
    for (r1, r2) in &config.matched_relations {
        if kb1.relation(r1).is_none_or(|r| {
            !kb1.rel_facts().any(|f| f.1 == r || f.1 == r.inverse())
        }) && kb2.relation(r2).is_none_or(|r| {
            !kb2.rel_facts().any(|f| f.1 == r || f.1 == r.inverse())
        }) {
            warnings.push(format!(
                "matched relation pair ({r1}, {r2}) has no facts in either KB"
            ));
        }
    }
    warnings
}

/// Ground-truth pairs `<kb1_id>\t<kb2_id>` by surface id.
pub fn load_ground_truth(path: &Path) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (line, text) in read_lines(path)? {
        let fields: Vec<&str> = text.split('\t').collect();
        if fields.len() != 2 {
            return Err(SigmaError::Parse {
                path: path.to_path_buf(),
                line,
                msg: format!("expected 2 fields, found {}", fields.len()),
            });
        }
        out.push((fields[0].to_string(), fields[1].to_string()));
    }
    Ok(out)
}

/// A row of a matched-pairs prediction file.
#[derive(Debug, Clone)]
pub struct Prediction {
    pub left: String,
    pub right: String,
    pub score: f64,
    pub iteration: usize,
}

pub fn load_predictions(path: &Path) -> Result<Vec<Prediction>> {
    let mut out = Vec::new();
    for (line, text) in read_lines(path)? {
        let fields: Vec<&str> = text.split('\t').collect();
        let err = |msg: String| SigmaError::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        };
        if fields.len() != 4 {
            return Err(err(format!("expected 4 fields, found {}", fields.len())));
        }
        out.push(Prediction {
            left: fields[0].to_string(),
            right: fields[1].to_string(),
            score: fields[2]
                .parse()
                .map_err(|_| err(format!("invalid score {:?}", fields[2])))?,
            iteration: fields[3]
                .parse()
                .map_err(|_| err(format!("invalid iteration {:?}", fields[3])))?,
        });
    }
    Ok(out)
}

/// Writes the matched-pairs file: `<kb1_id>\t<kb2_id>\t<score:%.6f>\t<iteration>`.
pub fn write_matched_pairs(
    path: &Path,
    matching: &Matching,
    kb1: &KnowledgeBase,
    kb2: &KnowledgeBase,
) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|source| SigmaError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    for t in matching.trace() {
        writeln!(
            f,
            "{}\t{}\t{:.6}\t{}",
            kb1.surface_id(t.left),
            kb2.surface_id(t.right),
            t.score,
            t.iteration
        )
        .map_err(|source| SigmaError::Io {
            path: path.to_path_buf(),
            source,
        })?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn temp_file(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn parse_triples_basic() {
        let f = temp_file("a1\tactedIn\tm1\n# comment\n\nb1\tdirected\tm2\n");
        let triples = parse_triples(f.path()).unwrap();
        assert_eq!(
            triples,
            vec![
                ("a1".into(), "actedIn".into(), "m1".into()),
                ("b1".into(), "directed".into(), "m2".into())
            ]
        );
    }

    #[test]
    fn parse_triples_wrong_field_count() {
        let f = temp_file("a1\tactedIn\tm1\na1\tactedIn\n");
        let err = parse_triples(f.path()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains(":2:"), "missing line number in {msg}");
        assert!(msg.contains("expected 3 fields"));
    }

    #[test]
    fn load_config_defaults_and_pairs() {
        let f = temp_file(
            "rel\tactedIn\tactedIn\nprop\twasCreatedOnDate\thasProductionYear\tyear\nlabel\thasLabel\thasLabel\n",
        );
        let config = load_alignment_config(f.path()).unwrap();
        assert_eq!(config.matched_relations.len(), 1);
        assert_eq!(config.matched_properties.len(), 1);
        assert_eq!(config.matched_properties[0].kind, SimKind::Year);
        assert!((config.alpha - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(config.beta, 0.25);
    }

    #[test]
    fn load_config_params_and_errors() {
        let f = temp_file("param\talpha\t0.5\nparam\tsmoothing\tauto\nparam\tneighbor_weight\tinverse\n");
        let config = load_alignment_config(f.path()).unwrap();
        assert_eq!(config.alpha, 0.5);
        assert_eq!(config.smoothing, Smoothing::Auto);
        assert_eq!(config.neighbor_weight_mode, NeighborWeightMode::Inverse);

        let bad = temp_file("prop\ta\tb\tfuzzy\n");
        assert!(load_alignment_config(bad.path()).is_err());
    }

    #[test]
    fn build_kb_routes_facts() {
        let config = AlignmentConfig {
            matched_relations: vec![("actedIn".into(), "actedIn".into())],
            matched_properties: vec![PropertyPair {
                left: "year".into(),
                right: "year".into(),
                kind: SimKind::Year,
            }],
            label_properties: Some(("label".into(), "name".into())),
            ..Default::default()
        };
        let rel = vec![("a1".into(), "actedIn".into(), "m1".into()),
                       ("a1".into(), "ignored".into(), "m2".into())];
        let prop = vec![
            ("a1".into(), "label".into(), "John Smith".into()),
            ("m1".into(), "year".into(), "1999".into()),
            ("m1".into(), "other".into(), "zzz".into()),
        ];
        let kb = build_kb(&rel, &prop, Side::Left, &config).unwrap();
        let a1 = kb.entity("a1").unwrap();
        let m1 = kb.entity("m1").unwrap();
        assert_eq!(kb.label(a1), Some("John Smith"));
        assert_eq!(kb.prop_facts_of(m1), &[(kb.property("year").unwrap(), Literal::Int(1999))]);
        // "ignored" relation and "other" property dropped; m2 never interned
        assert!(kb.entity("m2").is_none());
        assert_eq!(kb.adjacency(a1).len(), 1);
    }
}
