//! Canonical JSON serialization, content digests, and document codecs.
//!
//! Every document this crate emits is canonical: object keys sorted, pretty
//! printed with two-space indent, shortest round-trip float formatting, and
//! a trailing newline. Equal data serializes to equal bytes, so reports can
//! be compared and checked into golden files directly. A document's
//! `digest` field is the SHA-256 of its canonical form without that field.

use crate::characterization::CubeCandidateCert;
use crate::cubes::{Cube, CubeLevel, CubeParams, CubeSystem};
use crate::nets::{AdaptedInfo, Center, DyadicPointSystem, Level, NetParams, Side};
use crate::order::ParentOrder;
use crate::set::SubsetMask;
use serde_json::{json, Map, Value};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("schema error: {0}")]
pub struct SchemaError(pub String);

/// Canonical text form of a JSON value. `serde_json` maps are sorted, so
/// equal values always produce identical bytes.
pub fn to_canonical_string(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON values serialize");
    s.push('\n');
    s
}

pub fn digest_hex(text: &str) -> String {
    use sha2::{Digest, Sha256};
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Stamps a top-level `digest` field into a document and returns the
/// canonical text. The digest covers the canonical form without the field.
pub fn finalize_document(mut value: Value) -> String {
    let digest = digest_hex(&to_canonical_string(&value));
    value
        .as_object_mut()
        .expect("documents are JSON objects")
        .insert("digest".to_owned(), Value::String(digest));
    to_canonical_string(&value)
}

/// Checks a document's `digest` field; `None` when the field is absent.
pub fn verify_document_digest(value: &Value) -> Option<bool> {
    let obj = value.as_object()?;
    let stored = obj.get("digest")?.as_str()?;
    let mut stripped = obj.clone();
    stripped.remove("digest");
    Some(digest_hex(&to_canonical_string(&Value::Object(stripped))) == stored)
}

/// Member lists of a cube system are elided from JSON once their total size
/// passes this bound; elided documents record counts only and cannot be
/// loaded back for verification.
pub const MEMBER_ELISION_THRESHOLD: usize = 100_000;

pub fn cube_system_to_json(sys: &CubeSystem) -> Value {
    cube_system_to_json_with_threshold(sys, MEMBER_ELISION_THRESHOLD)
}

pub fn cube_system_to_json_with_threshold(sys: &CubeSystem, threshold: usize) -> Value {
    let total: usize = sys
        .levels
        .iter()
        .flat_map(|l| l.cubes.iter().map(|c| c.members.count()))
        .sum();
    let elided = total > threshold;
    let levels: Vec<Value> = sys
        .levels
        .iter()
        .map(|level| {
            let cubes: Vec<Value> = level
                .cubes
                .iter()
                .enumerate()
                .map(|(alpha, cube)| {
                    let mut obj = Map::new();
                    obj.insert("alpha".into(), json!(alpha));
                    obj.insert("center".into(), json!(cube.center));
                    if elided {
                        obj.insert("member_count".into(), json!(cube.members.count()));
                    } else {
                        obj.insert("members".into(), serde_json::to_value(&cube.members).unwrap());
                        if cube.closed != cube.members {
                            obj.insert("closed".into(), serde_json::to_value(&cube.closed).unwrap());
                        }
                        if cube.open != cube.members {
                            obj.insert("open".into(), serde_json::to_value(&cube.open).unwrap());
                        }
                    }
                    Value::Object(obj)
                })
                .collect();
            json!({"k": level.k, "cubes": cubes})
        })
        .collect();
    json!({
        "params": serde_json::to_value(sys.params).unwrap(),
        "elided": elided,
        "levels": levels,
    })
}

fn as_object<'a>(v: &'a Value, what: &str) -> Result<&'a Map<String, Value>, SchemaError> {
    v.as_object().ok_or_else(|| SchemaError(format!("{what} must be an object")))
}

fn get<'a>(m: &'a Map<String, Value>, key: &str, what: &str) -> Result<&'a Value, SchemaError> {
    m.get(key).ok_or_else(|| SchemaError(format!("{what} is missing the key \"{key}\"")))
}

fn as_f64(v: &Value, what: &str) -> Result<f64, SchemaError> {
    v.as_f64().ok_or_else(|| SchemaError(format!("{what} must be a number")))
}

fn as_i32(v: &Value, what: &str) -> Result<i32, SchemaError> {
    v.as_i64()
        .and_then(|x| i32::try_from(x).ok())
        .ok_or_else(|| SchemaError(format!("{what} must be an integer")))
}

fn as_usize(v: &Value, what: &str) -> Result<usize, SchemaError> {
    v.as_u64()
        .and_then(|x| usize::try_from(x).ok())
        .ok_or_else(|| SchemaError(format!("{what} must be a nonnegative integer")))
}

fn as_array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>, SchemaError> {
    v.as_array().ok_or_else(|| SchemaError(format!("{what} must be an array")))
}

pub fn mask_from_json(v: &Value, n: usize, what: &str) -> Result<SubsetMask, SchemaError> {
    let indices: Vec<usize> = as_array(v, what)?
        .iter()
        .map(|x| as_usize(x, &format!("entries of {what}")))
        .collect::<Result<_, _>>()?;
    SubsetMask::from_indices(n, &indices).map_err(|e| SchemaError(format!("{what}: {e}")))
}

fn side_from_json(v: &Value) -> Result<Side, SchemaError> {
    match v.as_str() {
        Some("E") => Ok(Side::Subset),
        Some("complement") => Ok(Side::Complement),
        Some("unconstrained") => Ok(Side::Unconstrained),
        _ => Err(SchemaError(format!("unknown center side {v}"))),
    }
}

pub fn point_system_from_json(v: &Value, n: usize) -> Result<DyadicPointSystem, SchemaError> {
    let root = as_object(v, "the point system")?;
    let p = as_object(get(root, "params", "the point system")?, "params")?;
    let params = NetParams {
        delta: as_f64(get(p, "delta", "params")?, "delta")?,
        separation: as_f64(get(p, "c0", "params")?, "c0")?,
        cover: as_f64(get(p, "C0", "params")?, "C0")?,
        k_min: as_i32(get(p, "k_min", "params")?, "k_min")?,
        k_max: as_i32(get(p, "k_max", "params")?, "k_max")?,
    };
    let mut levels = Vec::new();
    for (i, lv) in as_array(get(root, "levels", "the point system")?, "levels")?.iter().enumerate() {
        let lo = as_object(lv, "a level")?;
        let k = as_i32(get(lo, "k", "a level")?, "k")?;
        if k != params.k_min + i as i32 {
            return Err(SchemaError(format!("levels must run consecutively from k_min, found k={k}")));
        }
        let mut centers = Vec::new();
        for c in as_array(get(lo, "centers", "a level")?, "centers")? {
            let co = as_object(c, "a center")?;
            let point = as_usize(get(co, "point", "a center")?, "point")?;
            if point >= n {
                return Err(SchemaError(format!("center point {point} is out of range for {n} points")));
            }
            centers.push(Center { point, side: side_from_json(get(co, "side", "a center")?)? });
        }
        levels.push(Level { k, centers });
    }
    if levels.len() as i32 != params.k_max - params.k_min + 1 {
        return Err(SchemaError("level count does not match the k range".into()));
    }
    let adapted = match get(root, "adapted", "the point system")? {
        Value::Null => None,
        v => {
            let ao = as_object(v, "adapted")?;
            Some(AdaptedInfo {
                m: as_i32(get(ao, "m", "adapted")?, "m")?,
                alpha0: as_usize(get(ao, "alpha0", "adapted")?, "alpha0")?,
                subset: mask_from_json(get(ao, "subset", "adapted")?, n, "adapted subset")?,
            })
        }
    };
    Ok(DyadicPointSystem { params, levels, adapted })
}

pub fn parent_order_from_json(v: &Value, level_sizes: &[usize]) -> Result<ParentOrder, SchemaError> {
    let root = as_object(v, "the parent order")?;
    let k_min = as_i32(get(root, "k_min", "the parent order")?, "k_min")?;
    let k_max = as_i32(get(root, "k_max", "the parent order")?, "k_max")?;
    let span = (k_max - k_min).max(0) as usize;
    if level_sizes.len() != span + 1 {
        return Err(SchemaError("level sizes do not match the order's k range".into()));
    }
    let mut parents: Vec<Vec<Option<usize>>> =
        level_sizes[1..].iter().map(|&s| vec![None; s]).collect();
    for e in as_array(get(root, "edges", "the parent order")?, "edges")? {
        let eo = as_object(e, "an edge")?;
        let child = as_array(get(eo, "child", "an edge")?, "child")?;
        let parent = as_array(get(eo, "parent", "an edge")?, "parent")?;
        if child.len() != 2 || parent.len() != 2 {
            return Err(SchemaError("edge endpoints must be [level, index] pairs".into()));
        }
        let (ck, cb) = (as_i32(&child[0], "child level")?, as_usize(&child[1], "child index")?);
        let (pk, pa) = (as_i32(&parent[0], "parent level")?, as_usize(&parent[1], "parent index")?);
        if pk != ck - 1 || ck <= k_min || ck > k_max {
            return Err(SchemaError(format!("edge ({ck},{cb}) -> ({pk},{pa}) links wrong levels")));
        }
        let row = &mut parents[(ck - 1 - k_min) as usize];
        let slot = row
            .get_mut(cb)
            .ok_or_else(|| SchemaError(format!("child index {cb} is out of range at level {ck}")))?;
        if slot.replace(pa).is_some() {
            return Err(SchemaError(format!("child ({ck},{cb}) has two parents")));
        }
    }
    let parents: Vec<Vec<usize>> = parents
        .into_iter()
        .enumerate()
        .map(|(i, row)| {
            row.into_iter()
                .enumerate()
                .map(|(beta, slot)| {
                    slot.ok_or_else(|| {
                        SchemaError(format!(
                            "child ({},{beta}) has no parent edge",
                            k_min + i as i32 + 1
                        ))
                    })
                })
                .collect::<Result<_, _>>()
        })
        .collect::<Result<_, _>>()?;
    Ok(ParentOrder::from_parent_rows(k_min, k_max, parents, level_sizes))
}

pub fn cube_system_from_json(v: &Value, n: usize) -> Result<CubeSystem, SchemaError> {
    let root = as_object(v, "the cube system")?;
    if get(root, "elided", "the cube system")?.as_bool() == Some(true) {
        return Err(SchemaError(
            "member lists were elided from this document; it cannot be loaded back".into(),
        ));
    }
    let p = as_object(get(root, "params", "the cube system")?, "params")?;
    let params = CubeParams {
        delta: as_f64(get(p, "delta", "params")?, "delta")?,
        inner: as_f64(get(p, "c1", "params")?, "c1")?,
        outer: as_f64(get(p, "C1", "params")?, "C1")?,
    };
    let mut levels = Vec::new();
    for lv in as_array(get(root, "levels", "the cube system")?, "levels")? {
        let lo = as_object(lv, "a level")?;
        let k = as_i32(get(lo, "k", "a level")?, "k")?;
        let mut cubes = Vec::new();
        for (i, cv) in as_array(get(lo, "cubes", "a level")?, "cubes")?.iter().enumerate() {
            let co = as_object(cv, "a cube")?;
            if as_usize(get(co, "alpha", "a cube")?, "alpha")? != i {
                return Err(SchemaError(format!("cube indices of level {k} must be consecutive")));
            }
            let center = as_usize(get(co, "center", "a cube")?, "center")?;
            if center >= n {
                return Err(SchemaError(format!("cube center {center} is out of range for {n} points")));
            }
            let members = mask_from_json(get(co, "members", "a cube")?, n, "cube members")?;
            let closed = match co.get("closed") {
                Some(v) => mask_from_json(v, n, "cube closure")?,
                None => members.clone(),
            };
            let open = match co.get("open") {
                Some(v) => mask_from_json(v, n, "cube interior")?,
                None => members.clone(),
            };
            cubes.push(Cube { center, members, closed, open });
        }
        let mut point_cube = vec![usize::MAX; n];
        for (alpha, cube) in cubes.iter().enumerate() {
            for x in cube.members.iter() {
                if point_cube[x] == usize::MAX {
                    point_cube[x] = alpha;
                }
            }
        }
        levels.push(CubeLevel { k, cubes, point_cube });
    }
    if levels.is_empty() {
        return Err(SchemaError("a cube system needs at least one level".into()));
    }
    for (i, w) in levels.windows(2).enumerate() {
        if w[1].k != w[0].k + 1 {
            return Err(SchemaError(format!(
                "cube levels must be consecutive, found {} after {} at position {i}",
                w[1].k, w[0].k
            )));
        }
    }
    Ok(CubeSystem { params, levels })
}

/// Document written by a system build: the point system, its parent order,
/// and the cubes, all addressed to a space of `n` points.
pub fn system_document(
    n: usize,
    points: &DyadicPointSystem,
    order: &ParentOrder,
    cubes: &CubeSystem,
) -> Value {
    json!({
        "kind": "dyadic-cube-system",
        "n": n,
        "points": serde_json::to_value(points).unwrap(),
        "order": serde_json::to_value(order).unwrap(),
        "cubes": cube_system_to_json(cubes),
    })
}

/// Document form of a candidate certificate.
pub fn certificate_to_json(cert: &CubeCandidateCert) -> Value {
    json!({
        "kind": "cube-candidate-certificate",
        "n": cert.n,
        "subset": serde_json::to_value(&cert.subset).unwrap(),
        "params": serde_json::to_value(cert.params).unwrap(),
        "constraints": serde_json::to_value(cert.constraints).unwrap(),
        "plumpness": {
            "subset": serde_json::to_value(&cert.subset_plump).unwrap(),
            "complement": serde_json::to_value(&cert.complement_plump).unwrap(),
        },
        "points": serde_json::to_value(&cert.points).unwrap(),
        "order": serde_json::to_value(&cert.order).unwrap(),
        "cubes": cert.cubes.as_ref().map(cube_system_to_json).unwrap_or(Value::Null),
        "capped_level_m": serde_json::to_value(&cert.capped).unwrap(),
        "cube": cert
            .cube
            .map(|(k, alpha)| json!({"k": k, "alpha": alpha}))
            .unwrap_or(Value::Null),
        "match": serde_json::to_value(cert.matching).unwrap(),
        "accepted": cert.accepted,
        "rejection": serde_json::to_value(&cert.rejection).unwrap(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characterization::certify_cube_candidate;
    use crate::cubes::build_cube_system;
    use crate::nets::build_adapted_points;
    use crate::order::build_order;
    use crate::plumpness::DPlumpParams;
    use crate::testutil::{grid, range_mask};

    fn grid16_parts() -> (DyadicPointSystem, ParentOrder, CubeSystem) {
        let s = grid(16);
        let e = range_mask(16, 0..8);
        let ladder = DPlumpParams { delta: 1.0 / 16.0, m: 0, inner: 6.0, outer: 8.0 };
        let points = build_adapted_points(&s, &e, &ladder, None, None).unwrap();
        let order = build_order(&s, &points).unwrap();
        let cubes = build_cube_system(&s, &points, &order).unwrap();
        (points, order, cubes)
    }

    #[test]
    fn canonical_strings_sort_keys_and_end_with_newline() {
        let a = json!({"zebra": 1, "apple": [1.5, 2], "mid": {"y": true, "x": null}});
        let s = to_canonical_string(&a);
        assert!(s.ends_with('\n'));
        let apple = s.find("apple").unwrap();
        let mid = s.find("mid").unwrap();
        let zebra = s.find("zebra").unwrap();
        assert!(apple < mid && mid < zebra);
        let inner_x = s.find("\"x\"").unwrap();
        let inner_y = s.find("\"y\"").unwrap();
        assert!(inner_x < inner_y);
    }

    #[test]
    fn digest_matches_reference_value() {
        assert_eq!(
            digest_hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn finalized_documents_verify() {
        let doc = json!({"kind": "test", "payload": [1, 2, 3]});
        let text = finalize_document(doc);
        let parsed: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(verify_document_digest(&parsed), Some(true));

        let mut tampered = parsed.clone();
        tampered["payload"][0] = json!(9);
        assert_eq!(verify_document_digest(&tampered), Some(false));
        assert_eq!(verify_document_digest(&json!({"kind": "test"})), None);
    }

    #[test]
    fn point_system_round_trips() {
        let (points, _, _) = grid16_parts();
        let v = serde_json::to_value(&points).unwrap();
        let back = point_system_from_json(&v, 16).unwrap();
        assert_eq!(back, points);
    }

    #[test]
    fn parent_order_round_trips() {
        let (points, order, _) = grid16_parts();
        let sizes: Vec<usize> = points.levels.iter().map(|l| l.centers.len()).collect();
        let v = serde_json::to_value(&order).unwrap();
        let back = parent_order_from_json(&v, &sizes).unwrap();
        assert_eq!(back, order);
    }

    #[test]
    fn cube_system_round_trips() {
        let (_, _, cubes) = grid16_parts();
        let v = cube_system_to_json(&cubes);
        assert_eq!(v["elided"], json!(false));
        assert_eq!(v["levels"][0]["cubes"][0]["members"], json!([0, 1, 2, 3, 4, 5, 6, 7]));
        assert!(v["levels"][0]["cubes"][0].get("closed").is_none());
        let back = cube_system_from_json(&v, 16).unwrap();
        assert_eq!(back, cubes);
    }

    #[test]
    fn elided_systems_cannot_be_loaded_back() {
        let (_, _, cubes) = grid16_parts();
        let v = cube_system_to_json_with_threshold(&cubes, 0);
        assert_eq!(v["elided"], json!(true));
        assert_eq!(v["levels"][0]["cubes"][0]["member_count"], json!(8));
        assert!(v["levels"][0]["cubes"][0].get("members").is_none());
        assert!(cube_system_from_json(&v, 16).is_err());
    }

    #[test]
    fn malformed_orders_are_rejected() {
        let (points, order, _) = grid16_parts();
        let sizes: Vec<usize> = points.levels.iter().map(|l| l.centers.len()).collect();
        let mut v = serde_json::to_value(&order).unwrap();
        let edges = v["edges"].as_array_mut().unwrap();
        let dup = edges[0].clone();
        edges.push(dup);
        assert!(parent_order_from_json(&v, &sizes).is_err());

        let mut v = serde_json::to_value(&order).unwrap();
        v["edges"].as_array_mut().unwrap().pop();
        assert!(parent_order_from_json(&v, &sizes).is_err());
    }

    #[test]
    fn system_documents_finalize_deterministically() {
        let (points, order, cubes) = grid16_parts();
        let a = finalize_document(system_document(16, &points, &order, &cubes));
        let b = finalize_document(system_document(16, &points, &order, &cubes));
        assert_eq!(a, b);
        let parsed: Value = serde_json::from_str(&a).unwrap();
        assert_eq!(verify_document_digest(&parsed), Some(true));
        assert_eq!(parsed["kind"], json!("dyadic-cube-system"));
    }

    #[test]
    fn certificate_document_shape() {
        let s = grid(16);
        let e = range_mask(16, 0..8);
        let ladder = DPlumpParams { delta: 1.0 / 16.0, m: 0, inner: 6.0, outer: 8.0 };
        let cert = certify_cube_candidate(&s, &e, &ladder, None).unwrap();
        let v = certificate_to_json(&cert);
        assert_eq!(v["accepted"], json!(true));
        assert_eq!(v["rejection"], Value::Null);
        assert_eq!(v["cube"], json!({"k": 0, "alpha": 0}));
        assert_eq!(v["match"]["equality"], json!(true));
        assert_eq!(v["plumpness"]["subset"]["certified"], json!(true));
        assert_eq!(v["subset"], json!([0, 1, 2, 3, 4, 5, 6, 7]));
    }
}
