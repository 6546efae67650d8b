//! JSON file formats. Every writer emits pretty JSON with a trailing newline,
//! so write → read → write is byte-identical.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::additive::{GroupElem, GroupSet};
use crate::error::{Error, Result};
use crate::exact::Exact;
use crate::game::{StrategyTable, StrategyTriple};
use crate::vectors::{BitVec, QuatVec};
use crate::z4::{CrossFn, CrossTriple};

/// `⌈n/8⌉` little-endian bytes as lowercase hex.
pub fn hex_encode(n: usize, bits: u32) -> String {
    let bytes = n.div_ceil(8).max(1);
    (0..bytes).map(|i| format!("{:02x}", (bits >> (8 * i)) & 0xff)).collect()
}

pub fn hex_decode(n: usize, s: &str) -> Result<u32> {
    let bytes = n.div_ceil(8).max(1);
    if s.len() != 2 * bytes || !s.is_ascii() {
        return Err(Error::invalid(format!("hex entry {s:?} should have {bytes} bytes for n = {n}")));
    }
    let mut v = 0u32;
    for i in 0..bytes {
        let b = u8::from_str_radix(&s[2 * i..2 * i + 2], 16)
            .map_err(|_| Error::invalid(format!("bad hex entry {s:?}")))?;
        v |= u32::from(b) << (8 * i);
    }
    if n < 32 && v >> n != 0 {
        return Err(Error::invalid(format!("hex entry {s:?} exceeds {n} bits")));
    }
    Ok(v)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyFile {
    pub n: usize,
    pub f: Vec<String>,
    pub g: Vec<String>,
    pub h: Vec<String>,
}

impl StrategyFile {
    pub fn from_triple(st: &StrategyTriple) -> Self {
        let n = st.dim();
        let enc = |t: &StrategyTable| t.raw().iter().map(|&v| hex_encode(n, v)).collect();
        StrategyFile { n, f: enc(&st.f), g: enc(&st.g), h: enc(&st.h) }
    }

    pub fn to_triple(&self) -> Result<StrategyTriple> {
        let n = self.n;
        let dec = |col: &[String]| -> Result<StrategyTable> {
            let table = col.iter().map(|s| hex_decode(n, s)).collect::<Result<Vec<_>>>()?;
            StrategyTable::new(n, table)
        };
        StrategyTriple::new(dec(&self.f)?, dec(&self.g)?, dec(&self.h)?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossFnFile {
    pub n: usize,
    pub table: Vec<String>,
}

impl CrossFnFile {
    pub fn from_fn(f: &CrossFn) -> Self {
        CrossFnFile { n: f.dim(), table: f.table().iter().map(|v| v.to_base4()).collect() }
    }

    pub fn to_fn(&self) -> Result<CrossFn> {
        let table = self
            .table
            .iter()
            .map(|s| {
                let v = QuatVec::from_base4(s)?;
                if v.dim() != self.n {
                    return Err(Error::DimensionMismatch { expected: self.n, found: v.dim() });
                }
                Ok(v)
            })
            .collect::<Result<Vec<_>>>()?;
        CrossFn::new(self.n, table)
    }
}

/// Three cross-functions in one file, each in the CrossFn table layout.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossTripleFile {
    pub n: usize,
    pub f: Vec<String>,
    pub g: Vec<String>,
    pub h: Vec<String>,
}

impl CrossTripleFile {
    pub fn from_triple(ct: &CrossTriple) -> Self {
        let enc = |f: &CrossFn| CrossFnFile::from_fn(f).table;
        CrossTripleFile { n: ct.dim(), f: enc(&ct.f), g: enc(&ct.g), h: enc(&ct.h) }
    }

    pub fn to_triple(&self) -> Result<CrossTriple> {
        let dec = |t: &[String]| CrossFnFile { n: self.n, table: t.to_vec() }.to_fn();
        CrossTriple::new(dec(&self.f)?, dec(&self.g)?, dec(&self.h)?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSetFile {
    pub n: usize,
    pub elements: Vec<(String, String)>,
}

impl GroupSetFile {
    pub fn from_set(set: &GroupSet) -> Self {
        let n = set.dim();
        GroupSetFile {
            n,
            elements: set
                .elems()
                .into_iter()
                .map(|e| (hex_encode(n, e.u.bits()), e.w.to_base4()))
                .collect(),
        }
    }

    pub fn to_set(&self) -> Result<GroupSet> {
        let n = self.n;
        let elems = self
            .elements
            .iter()
            .map(|(u, w)| GroupElem::new(BitVec::new(n, hex_decode(n, u)?)?, QuatVec::from_base4(w)?))
            .collect::<Result<Vec<_>>>()?;
        GroupSet::from_elems(n, elems)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoldenValue {
    pub n: usize,
    pub value_num: serde_json::Number,
    pub value_den: serde_json::Number,
}

impl GoldenValue {
    pub fn new(n: usize, value: &Exact) -> Self {
        let num = |s: String| s.parse::<serde_json::Number>().expect("integer literal");
        GoldenValue { n, value_num: num(value.numer().to_string()), value_den: num(value.denom().to_string()) }
    }

    pub fn value(&self) -> Result<Exact> {
        let parse = |x: &serde_json::Number| {
            x.to_string()
                .parse::<num_bigint::BigInt>()
                .map_err(|_| Error::invalid(format!("golden value entry {x} is not an integer")))
        };
        let den = parse(&self.value_den)?;
        if den == num_bigint::BigInt::from(0) {
            return Err(Error::invalid("golden value has zero denominator"));
        }
        Ok(Exact(num_rational::BigRational::new(parse(&self.value_num)?, den)))
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::invalid(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::invalid(format!("malformed JSON: {e}")))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))?;
    from_json(&text)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_json(value)?)
        .map_err(|e| Error::invalid(format!("cannot write {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{make_strategy, StrategyFamily};
    use crate::z4::to_cross_triple;

    #[test]
    fn hex_is_little_endian_bytes() {
        assert_eq!(hex_encode(12, 0xabc), "bc0a");
        assert_eq!(hex_encode(1, 1), "01");
        assert_eq!(hex_decode(12, "bc0a").unwrap(), 0xabc);
        assert!(hex_decode(4, "1f").is_err());
        assert!(hex_decode(12, "bc").is_err());
        assert!(hex_decode(8, "zz").is_err());
    }

    #[test]
    fn strategy_file_round_trips_bytewise() {
        let st = make_strategy(&StrategyFamily::Random(3), 3).unwrap();
        let text = to_json(&StrategyFile::from_triple(&st)).unwrap();
        let back: StrategyFile = from_json(&text).unwrap();
        assert_eq!(back.to_triple().unwrap(), st);
        assert_eq!(to_json(&back).unwrap(), text);
    }

    #[test]
    fn constant_one_strategy_file() {
        let st = make_strategy(&StrategyFamily::Constant(true), 1).unwrap();
        let text = serde_json::to_string(&StrategyFile::from_triple(&st)).unwrap();
        assert_eq!(text, r#"{"n":1,"f":["01","01"],"g":["01","01"],"h":["01","01"]}"#);
    }

    #[test]
    fn cross_files_round_trip() {
        let ct = to_cross_triple(&make_strategy(&StrategyFamily::Random(5), 4).unwrap());
        let text = to_json(&CrossTripleFile::from_triple(&ct)).unwrap();
        let back: CrossTripleFile = from_json(&text).unwrap();
        assert_eq!(back.to_triple().unwrap(), ct);
        assert_eq!(to_json(&back).unwrap(), text);

        let one = to_json(&CrossFnFile::from_fn(&ct.f)).unwrap();
        assert_eq!(to_json(&from_json::<CrossFnFile>(&one).unwrap()).unwrap(), one);
        let bad = CrossFnFile { n: 2, table: vec!["1".into(); 4] };
        assert!(bad.to_fn().is_err());
    }

    #[test]
    fn group_set_file_round_trips() {
        let f = CrossFn::random(3, 8).unwrap();
        let set = crate::extract::graph_of(&f);
        let text = to_json(&GroupSetFile::from_set(&set)).unwrap();
        let back: GroupSetFile = from_json(&text).unwrap();
        assert_eq!(back.to_set().unwrap(), set);
        assert_eq!(to_json(&back).unwrap(), text);
    }

    #[test]
    fn golden_value_is_exact() {
        let v = Exact::new(9, 16);
        let g = GoldenValue::new(2, &v);
        let text = serde_json::to_string(&g).unwrap();
        assert_eq!(text, r#"{"n":2,"value_num":9,"value_den":16}"#);
        assert_eq!(from_json::<GoldenValue>(&text).unwrap().value().unwrap(), v);
        assert!(from_json::<GoldenValue>(r#"{"n":2,"value_num":1,"value_den":0}"#).unwrap().value().is_err());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(from_json::<CrossFnFile>(r#"{"n":1,"table":["0","1"],"x":1}"#).is_err());
    }
}
