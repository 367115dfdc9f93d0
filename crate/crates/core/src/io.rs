//! Canonical JSON documents: sorted keys, reduced fractions as strings,
//! compact output. Byte equality of encodings is structural equality.

use std::collections::BTreeMap;

use serde_json::{json, Map, Value};

use crate::arc::{Arc, EndpointRef, Hand, ProjectiveArcFamily, Region, Side, SurfaceSig, WeightedArcFamily};
use crate::cacti::{Cactus, Lobe};
use crate::chain::{Affine, Cell, CellwiseFamily, DomainFactor, ParamDomain};
use crate::circle::ExtClass;
use crate::error::{Error, Result};
use crate::loops::{CircleConfiguration, Identification};
use crate::rational::{format_q, parse_q, Q};
use crate::twisted::TwistedElement;

pub const VERSION: &str = "arcop/1";

pub trait Document: Sized {
    fn to_value(&self) -> Value;
    fn from_value(v: &At) -> Result<Self>;
}

pub fn encode<T: Document>(x: &T) -> String {
    serde_json::to_string(&x.to_value()).expect("values always serialize")
}

pub fn decode<T: Document>(text: &str) -> Result<T> {
    let v: Value =
        serde_json::from_str(text).map_err(|e| Error::Decode { path: "$".into(), message: e.to_string() })?;
    T::from_value(&At::root(&v))
}

/// A JSON value with its path from the document root.
pub struct At<'a> {
    v: &'a Value,
    path: String,
}

impl<'a> At<'a> {
    pub fn root(v: &'a Value) -> Self {
        At { v, path: "$".into() }
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Decode { path: self.path.clone(), message: message.into() })
    }

    fn field(&self, key: &str) -> Result<At<'a>> {
        match self.v.get(key) {
            Some(v) => Ok(At { v, path: format!("{}.{key}", self.path) }),
            None if self.v.is_object() => self.err(format!("missing field {key:?}")),
            None => self.err("expected an object"),
        }
    }

    fn items(&self) -> Result<Vec<At<'a>>> {
        match self.v.as_array() {
            Some(a) => Ok(a.iter().enumerate().map(|(k, v)| At { v, path: format!("{}[{k}]", self.path) }).collect()),
            None => self.err("expected an array"),
        }
    }

    fn str(&self) -> Result<&'a str> {
        self.v.as_str().map_or_else(|| self.err("expected a string"), Ok)
    }

    fn int(&self) -> Result<i64> {
        self.v.as_i64().map_or_else(|| self.err("expected an integer"), Ok)
    }

    fn usize(&self) -> Result<usize> {
        self.v.as_u64().and_then(|x| usize::try_from(x).ok()).map_or_else(|| self.err("expected a nonnegative integer"), Ok)
    }

    fn u32(&self) -> Result<u32> {
        self.v.as_u64().and_then(|x| u32::try_from(x).ok()).map_or_else(|| self.err("expected a nonnegative integer"), Ok)
    }

    fn bool(&self) -> Result<bool> {
        self.v.as_bool().map_or_else(|| self.err("expected a boolean"), Ok)
    }

    fn q(&self) -> Result<Q> {
        parse_q(self.str()?).or_else(|m| self.err(m))
    }

    fn qs(&self) -> Result<Vec<Q>> {
        self.items()?.iter().map(At::q).collect()
    }

    fn check_version(&self) -> Result<()> {
        let v = self.field("version")?;
        if v.str()? != VERSION {
            return v.err(format!("unsupported version, expected {VERSION:?}"));
        }
        Ok(())
    }
}

fn qv(x: &Q) -> Value {
    Value::String(format_q(x))
}

fn qsv(xs: &[Q]) -> Value {
    Value::Array(xs.iter().map(qv).collect())
}

fn side_token(s: &Side) -> String {
    s.to_string()
}

fn parse_side(at: &At) -> Result<Side> {
    let t = at.str()?;
    let bad = || at.err::<Side>(format!("bad side token {t:?}"));
    if let Some(rest) = t.strip_prefix('a') {
        let (num, hand) = match rest.strip_suffix('L') {
            Some(n) => (n, Hand::Left),
            None => match rest.strip_suffix('R') {
                Some(n) => (n, Hand::Right),
                None => return bad(),
            },
        };
        return num.parse().map_or_else(|_| bad(), |arc| Ok(Side::Arc { arc, hand }));
    }
    if let Some(rest) = t.strip_prefix('b') {
        if let Some((b, g)) = rest.split_once('g') {
            if let (Ok(boundary), Ok(gap)) = (b.parse(), g.parse()) {
                return Ok(Side::Segment { boundary, gap });
            }
        }
    }
    bad()
}

fn family_value(f: &WeightedArcFamily) -> Value {
    let c = &f.comb;
    json!({
        "version": VERSION,
        "surface": {"genus": c.sig.genus, "punctures": c.sig.punctures, "boundaries": c.sig.boundaries},
        "endpoints": c.counts,
        "arcs": c.arcs.iter().zip(&f.weights).map(|(a, w)| json!({
            "ends": a.ends.iter().map(|e| json!([e.boundary, e.slot])).collect::<Vec<_>>(),
            "weight": qv(w),
        })).collect::<Vec<_>>(),
        "regions": c.regions.iter().map(|r| json!({
            "genus": r.genus,
            "punctures": r.punctures,
            "cycles": r.cycles.iter().map(|cy| cy.iter().map(side_token).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    })
}

fn family_from(at: &At) -> Result<WeightedArcFamily> {
    at.check_version()?;
    let s = at.field("surface")?;
    let sig = SurfaceSig::new(s.field("genus")?.u32()?, s.field("punctures")?.u32()?, s.field("boundaries")?.usize()?);
    let ep = at.field("endpoints")?;
    let counts: Vec<usize> = ep.items()?.iter().map(At::usize).collect::<Result<_>>()?;
    if counts.len() != sig.boundaries {
        return ep.err(format!("{} entries for {} boundaries", counts.len(), sig.boundaries));
    }
    let mut arcs = Vec::new();
    let mut weights = Vec::new();
    for a in at.field("arcs")?.items()? {
        let ends = a.field("ends")?;
        let items = ends.items()?;
        if items.len() != 2 {
            return ends.err("an arc has two ends");
        }
        let mut refs = Vec::new();
        for e in &items {
            let pair = e.items()?;
            if pair.len() != 2 {
                return e.err("an end is [boundary, slot]");
            }
            refs.push(EndpointRef::new(pair[0].usize()?, pair[1].usize()?));
        }
        arcs.push(Arc::new(refs[0], refs[1]));
        weights.push(a.field("weight")?.q()?);
    }
    let mut regions = Vec::new();
    for r in at.field("regions")?.items()? {
        let cycles = r
            .field("cycles")?
            .items()?
            .iter()
            .map(|c| c.items()?.iter().map(parse_side).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        regions.push(Region { genus: r.field("genus")?.u32()?, punctures: r.field("punctures")?.u32()?, cycles });
    }
    let f = WeightedArcFamily::from_parts(sig, counts, arcs, weights, regions);
    if let Err(v) = f.validate() {
        let msgs: Vec<String> = v.iter().map(ToString::to_string).collect();
        return at.err(format!("invalid family: {}", msgs.join("; ")));
    }
    Ok(f)
}

impl Document for WeightedArcFamily {
    fn to_value(&self) -> Value {
        family_value(&self.canonical())
    }

    fn from_value(at: &At) -> Result<Self> {
        family_from(at)
    }
}

impl Document for ProjectiveArcFamily {
    fn to_value(&self) -> Value {
        family_value(self.weighted())
    }

    fn from_value(at: &At) -> Result<Self> {
        Ok(family_from(at)?.projective())
    }
}

impl Document for Cactus {
    fn to_value(&self) -> Value {
        let junctions: Map<String, Value> =
            self.junctions.iter().map(|(p, ls)| (p.to_string(), json!(ls))).collect();
        json!({
            "version": VERSION,
            "lobes": self.lobes.iter().map(|l| json!({
                "circumference": qv(&l.circumference),
                "points": l.points.iter().map(|(x, p)| json!([qv(x), p])).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "junctions": junctions,
            "global_zero": [self.global_zero.0, qv(&self.global_zero.1)],
        })
    }

    fn from_value(at: &At) -> Result<Self> {
        at.check_version()?;
        let mut lobes = Vec::new();
        for l in at.field("lobes")?.items()? {
            let mut points = Vec::new();
            for p in l.field("points")?.items()? {
                let pair = p.items()?;
                if pair.len() != 2 {
                    return p.err("a point is [position, id]");
                }
                points.push((pair[0].q()?, pair[1].usize()?));
            }
            lobes.push(Lobe { circumference: l.field("circumference")?.q()?, points });
        }
        let j = at.field("junctions")?;
        let Some(obj) = j.v.as_object() else { return j.err("expected an object") };
        let mut junctions = BTreeMap::new();
        for (k, v) in obj {
            let here = At { v, path: format!("{}.{k}", j.path) };
            let id: usize = k.parse().or_else(|_| here.err("point ids are integers"))?;
            junctions.insert(id, here.items()?.iter().map(At::usize).collect::<Result<_>>()?);
        }
        let gz = at.field("global_zero")?;
        let pair = gz.items()?;
        if pair.len() != 2 {
            return gz.err("the global zero is [lobe, position]");
        }
        let c = Cactus { lobes, junctions, global_zero: (pair[0].usize()?, pair[1].q()?) };
        c.validate().or_else(|e| at.err(e.to_string()))?;
        Ok(c)
    }
}

impl Document for CircleConfiguration {
    fn to_value(&self) -> Value {
        json!({
            "version": VERSION,
            "circumferences": qsv(&self.circumferences),
            "identifications": self.identifications.iter().map(|i| json!({
                "a": i.a, "a_start": qv(&i.a_start), "b": i.b, "b_start": qv(&i.b_start),
                "length": qv(&i.length), "aligned": i.aligned,
            })).collect::<Vec<_>>(),
        })
    }

    fn from_value(at: &At) -> Result<Self> {
        at.check_version()?;
        let circ = at.field("circumferences")?.qs()?;
        let mut ids = Vec::new();
        for i in at.field("identifications")?.items()? {
            ids.push(Identification {
                a: i.field("a")?.usize()?,
                a_start: i.field("a_start")?.q()?,
                b: i.field("b")?.usize()?,
                b_start: i.field("b_start")?.q()?,
                length: i.field("length")?.q()?,
                aligned: i.field("aligned")?.bool()?,
            });
        }
        let k = CircleConfiguration::normalized(circ, ids);
        k.validate().or_else(|e| at.err(e.to_string()))?;
        Ok(k)
    }
}

fn affine_value(a: &Affine) -> Value {
    json!({"constant": qv(&a.constant), "coeffs": qsv(&a.coeffs)})
}

fn affine_from(at: &At, dim: usize) -> Result<Affine> {
    let coeffs = at.field("coeffs")?.qs()?;
    if coeffs.len() != dim {
        return at.err(format!("{} coefficients in a domain of dimension {dim}", coeffs.len()));
    }
    Ok(Affine { constant: at.field("constant")?.q()?, coeffs })
}

fn cellwise_value(f: &CellwiseFamily) -> Value {
    match f {
        CellwiseFamily::Cells { domain, cells } => json!({
            "kind": "cells",
            "domain": domain.factors.iter().map(|d| match d {
                DomainFactor::Interval => "interval",
                DomainFactor::Triangle => "triangle",
            }).collect::<Vec<_>>(),
            "cells": cells.iter().map(|c| json!({
                "bounds": c.bounds.iter().map(affine_value).collect::<Vec<_>>(),
                "family": family_value(&WeightedArcFamily {
                    comb: c.comb.clone(),
                    weights: vec![Q::from_integer(1.into()); c.comb.arcs.len()],
                }),
                "weights": c.weights.iter().map(affine_value).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        }),
        CellwiseFamily::Composite { outer, slot, inner } => json!({
            "kind": "composite", "outer": cellwise_value(outer), "slot": slot, "inner": cellwise_value(inner),
        }),
        CellwiseFamily::Relabeled { family, sigma } => json!({
            "kind": "relabeled", "family": cellwise_value(family), "sigma": sigma,
        }),
    }
}

fn cellwise_from(at: &At) -> Result<CellwiseFamily> {
    let kind = at.field("kind")?;
    match kind.str()? {
        "cells" => {
            let factors = at
                .field("domain")?
                .items()?
                .iter()
                .map(|d| match d.str()? {
                    "interval" => Ok(DomainFactor::Interval),
                    "triangle" => Ok(DomainFactor::Triangle),
                    other => d.err(format!("unknown factor {other:?}")),
                })
                .collect::<Result<Vec<_>>>()?;
            let domain = ParamDomain { factors };
            let dim = domain.dim();
            let mut cells = Vec::new();
            for c in at.field("cells")?.items()? {
                let fam = family_from(&c.field("family")?)?;
                let w = c.field("weights")?;
                let weights = w.items()?.iter().map(|a| affine_from(a, dim)).collect::<Result<Vec<_>>>()?;
                if weights.len() != fam.comb.arcs.len() {
                    return w.err("one weight per arc");
                }
                let bounds =
                    c.field("bounds")?.items()?.iter().map(|a| affine_from(a, dim)).collect::<Result<Vec<_>>>()?;
                cells.push(Cell { bounds, comb: fam.comb, weights });
            }
            if cells.is_empty() {
                return at.err("a family needs at least one cell");
            }
            Ok(CellwiseFamily::Cells { domain, cells })
        }
        "composite" => Ok(CellwiseFamily::Composite {
            outer: Box::new(cellwise_from(&at.field("outer")?)?),
            slot: at.field("slot")?.usize()?,
            inner: Box::new(cellwise_from(&at.field("inner")?)?),
        }),
        "relabeled" => Ok(CellwiseFamily::Relabeled {
            family: Box::new(cellwise_from(&at.field("family")?)?),
            sigma: at.field("sigma")?.items()?.iter().map(At::usize).collect::<Result<_>>()?,
        }),
        other => kind.err(format!("unknown kind {other:?}")),
    }
}

impl Document for CellwiseFamily {
    fn to_value(&self) -> Value {
        let mut v = cellwise_value(self);
        v["version"] = json!(VERSION);
        v
    }

    fn from_value(at: &At) -> Result<Self> {
        at.check_version()?;
        cellwise_from(at)
    }
}

impl Document for TwistedElement {
    fn to_value(&self) -> Value {
        json!({"version": VERSION, "family": family_value(self.fam.weighted()), "angles": qsv(&self.angles)})
    }

    fn from_value(at: &At) -> Result<Self> {
        at.check_version()?;
        let fam = family_from(&at.field("family")?)?.projective();
        let a = at.field("angles")?;
        let angles = a.qs()?;
        if angles.iter().any(|x| *x < Q::from_integer(0.into()) || *x >= Q::from_integer(1.into())) {
            return a.err("angles lie in [0, 1)");
        }
        TwistedElement::new(fam, angles).or_else(|e| at.err(e.to_string()))
    }
}

impl Document for ExtClass {
    fn to_value(&self) -> Value {
        json!({
            "version": VERSION,
            "length": self.len,
            "terms": self.monomials().into_iter().map(|(c, b)| json!({"coefficient": c, "bits": b})).collect::<Vec<_>>(),
        })
    }

    fn from_value(at: &At) -> Result<Self> {
        at.check_version()?;
        let len = at.field("length")?.usize()?;
        let mut out = ExtClass::zero(len);
        for t in at.field("terms")?.items()? {
            let b = t.field("bits")?;
            let bits: Vec<i64> = b.items()?.iter().map(At::int).collect::<Result<_>>()?;
            if bits.len() != len || bits.iter().any(|x| *x != 0 && *x != 1) {
                return b.err(format!("expected {len} bits"));
            }
            let c = t.field("coefficient")?.int()?;
            if c == 0 {
                return t.err("zero coefficients are not stored");
            }
            let idx: Vec<usize> = bits.iter().enumerate().filter(|(_, x)| **x == 1).map(|(k, _)| k).collect();
            if out.terms.contains_key(&idx) {
                return t.err("repeated monomial");
            }
            out.add_term(idx, c);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arc::{dot, unit};
    use crate::cacti::{frame, random_cactus};
    use crate::chain::{bv_square, make_generator, Generator};
    use crate::loops::loop_of;
    use crate::random::{random_family, rng, Bounds};
    use crate::rational::{q, qi};

    fn round_trip<T: Document + PartialEq + std::fmt::Debug>(x: &T) {
        let text = encode(x);
        let back: T = decode(&text).unwrap();
        assert_eq!(&back, x);
        assert_eq!(encode(&back), text);
    }

    #[test]
    fn unit_round_trips_byte_identically() {
        let u = unit(qi(1));
        let text = encode(&u);
        assert_eq!(encode(&decode::<WeightedArcFamily>(&text).unwrap()), text);
        assert!(text.contains("\"weight\":\"1\""));
    }

    #[test]
    fn unreduced_weight_rejected() {
        let text = encode(&unit(qi(1))).replace("\"weight\":\"1\"", "\"weight\":\"2/4\"");
        match decode::<WeightedArcFamily>(&text) {
            Err(Error::Decode { path, .. }) => assert_eq!(path, "$.arcs[0].weight"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_regions_named() {
        let mut v: Value = serde_json::from_str(&encode(&dot(qi(1), qi(1)))).unwrap();
        v.as_object_mut().unwrap().remove("regions");
        match decode::<WeightedArcFamily>(&v.to_string()) {
            Err(Error::Decode { path, message }) => {
                assert_eq!(path, "$");
                assert!(message.contains("regions"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn invalid_family_rejected() {
        let text = encode(&unit(qi(1))).replace("\"weight\":\"1\"", "\"weight\":\"-1\"");
        assert!(matches!(decode::<WeightedArcFamily>(&text), Err(Error::Decode { .. })));
    }

    #[test]
    fn everything_round_trips() {
        for seed in 0..40 {
            round_trip(&random_family(seed, &Bounds { max_genus: 1, max_punctures: 1, ..Bounds::planar(3, 5) }).unwrap());
        }
        let mut r = rng(1);
        for _ in 0..20 {
            let c = random_cactus(&mut r, 3, false);
            round_trip(&c);
            round_trip(&loop_of(&frame(&c).unwrap()).unwrap());
            round_trip(&frame(&c).unwrap().projective());
        }
        round_trip(&make_generator(Generator::Star));
        round_trip(&bv_square());
        round_trip(&crate::chain::compose_families(&make_generator(Generator::Star), 1, &make_generator(Generator::Delta)).unwrap().relabel(&[0, 2, 1]));
        round_trip(&TwistedElement::new(unit(qi(1)).projective(), vec![q(1, 4), qi(0)]).unwrap());
        round_trip(&ExtClass::basis(&[1, 0, 0]).plus(&ExtClass::basis(&[0, 0, 1]).scaled(-3)));
    }
}
