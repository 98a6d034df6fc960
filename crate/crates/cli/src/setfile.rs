//! Matrix-set files.
//!
//! A set file is a JSON object with exactly the fields `n` and `matrices`;
//! each matrix has a `name` and `n` rows of `n` entries. Entries are JSON
//! numbers or strings holding a decimal (`"0.25"`) or a quotient of decimals
//! (`"10/3"`). Negative, non-finite and ragged data is rejected with the
//! line and column of the offending value.

use std::fmt;

use serde::de::{self, DeserializeSeed, Deserializer, IgnoredAny, MapAccess, SeqAccess, Visitor};
use serde::{Deserialize, Serialize};

use maxjsr::{MatrixSet, MaxMatrix};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SetFile {
    pub n: usize,
    pub matrices: Vec<NamedRows>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedRows {
    pub name: String,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, thiserror::Error)]
pub enum ParseError {
    #[error("{0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Set(#[from] maxjsr::Error),
}

impl SetFile {
    pub fn parse(text: &str) -> Result<SetFile, ParseError> {
        // The dimension is read first so that ragged rows can be reported
        // where they occur, whatever the field order.
        #[derive(Deserialize)]
        struct Header {
            n: usize,
        }
        let Header { n } = serde_json::from_str(text)?;
        let mut de = serde_json::Deserializer::from_str(text);
        let file = FileSeed { n }.deserialize(&mut de)?;
        de.end()?;
        Ok(file)
    }

    pub fn to_set(&self) -> Result<MatrixSet, ParseError> {
        let members = self
            .matrices
            .iter()
            .map(|m| Ok((m.name.clone(), MaxMatrix::from_rows(&m.rows)?)))
            .collect::<Result<Vec<_>, maxjsr::Error>>()?;
        Ok(MatrixSet::new(members)?)
    }

    pub fn from_set(psi: &MatrixSet) -> SetFile {
        SetFile {
            n: psi.n(),
            matrices: psi
                .members()
                .iter()
                .map(|(name, a)| NamedRows { name: name.clone(), rows: a.to_rows() })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("set files always serialise")
    }
}

impl<'de> Deserialize<'de> for SetFile {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let value = serde_json::Value::deserialize(d)?;
        SetFile::parse(&value.to_string()).map_err(de::Error::custom)
    }
}

/// Parses one entry: a finite nonnegative number, possibly written as `p/q`.
pub fn parse_entry(s: &str) -> Result<f64, String> {
    let number = |t: &str| -> Result<f64, String> {
        let t = t.trim();
        let ok = !t.is_empty() && t.chars().all(|c| c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '+' | '-'));
        match t.parse::<f64>() {
            Ok(v) if ok && v.is_finite() => Ok(v),
            _ => Err(format!("{t:?} is not a finite decimal number")),
        }
    };
    let v = match s.split_once('/') {
        Some((p, q)) => {
            let (p, q) = (number(p)?, number(q)?);
            if q == 0.0 {
                return Err(format!("{s:?} divides by zero"));
            }
            p / q
        }
        None => number(s)?,
    };
    check_entry(v)
}

fn check_entry(v: f64) -> Result<f64, String> {
    if !v.is_finite() {
        Err(format!("entry {v} is not finite"))
    } else if v < 0.0 {
        Err(format!("entry {v} is negative"))
    } else {
        Ok(v + 0.0)
    }
}

struct Entry(f64);

impl<'de> Deserialize<'de> for Entry {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Entry;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a nonnegative number or a string such as \"10/3\"")
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Entry, E> {
                Ok(Entry(v as f64))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Entry, E> {
                check_entry(v as f64).map(Entry).map_err(E::custom)
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Entry, E> {
                check_entry(v).map(Entry).map_err(E::custom)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Entry, E> {
                parse_entry(v).map(Entry).map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

struct FileSeed {
    n: usize,
}

impl<'de> DeserializeSeed<'de> for FileSeed {
    type Value = SetFile;

    fn deserialize<D: Deserializer<'de>>(self, d: D) -> Result<SetFile, D::Error> {
        d.deserialize_struct("SetFile", &["n", "matrices"], self)
    }
}

impl<'de> Visitor<'de> for FileSeed {
    type Value = SetFile;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("an object with fields `n` and `matrices`")
    }

    fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<SetFile, A::Error> {
        let mut n = None;
        let mut matrices = None;
        while let Some(key) = map.next_key::<String>()? {
            match key.as_str() {
                "n" if n.is_none() => {
                    let v: usize = map.next_value()?;
                    if v == 0 {
                        return Err(de::Error::custom("dimension n must be at least 1"));
                    }
                    n = Some(v);
                }
                "matrices" if matrices.is_none() => matrices = Some(map.next_value_seed(MatricesSeed { n: self.n })?),
                "n" | "matrices" => return Err(de::Error::custom(format_args!("duplicate field `{key}`"))),
                other => {
                    map.next_value::<IgnoredAny>()?;
                    return Err(de::Error::unknown_field(other, &["n", "matrices"]));
                }
            }
        }
        let n = n.ok_or_else(|| de::Error::missing_field("n"))?;
        let matrices: Vec<NamedRows> = matrices.ok_or_else(|| de::Error::missing_field("matrices"))?;
        if matrices.is_empty() {
            return Err(de::Error::custom("`matrices` must contain at least one matrix"));
        }
        Ok(SetFile { n, matrices })
    }
}

struct MatricesSeed {
    n: usize,
}

impl<'de> DeserializeSeed<'de> for MatricesSeed {
    type Value = Vec<NamedRows>;

    fn deserialize<D: Deserializer<'de>>(self, d: D) -> Result<Self::Value, D::Error> {
        d.deserialize_seq(self)
    }
}

impl<'de> Visitor<'de> for MatricesSeed {
    type Value = Vec<NamedRows>;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a list of matrices")
    }

    fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Self::Value, A::Error> {
        let mut out = Vec::new();
        while let Some(m) = seq.next_element_seed(MatrixSeed { n: self.n })? {
            out.push(m);
        }
        Ok(out)
    }
}

struct MatrixSeed {
    n: usize,
}

impl<'de> DeserializeSeed<'de> for MatrixSeed {
    type Value = NamedRows;

    fn deserialize<D: Deserializer<'de>>(self, d: D) -> Result<NamedRows, D::Error> {
        d.deserialize_struct("Matrix", &["name", "rows"], self)
    }
}

impl<'de> Visitor<'de> for MatrixSeed {
    type Value = NamedRows;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("an object with fields `name` and `rows`")
    }

    fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<NamedRows, A::Error> {
        let mut name = None;
        let mut rows = None;
        while let Some(key) = map.next_key::<String>()? {
            match key.as_str() {
                "name" if name.is_none() => name = Some(map.next_value::<String>()?),
                "rows" if rows.is_none() => rows = Some(map.next_value_seed(RowsSeed { n: self.n })?),
                "name" | "rows" => return Err(de::Error::custom(format_args!("duplicate field `{key}`"))),
                other => {
                    map.next_value::<IgnoredAny>()?;
                    return Err(de::Error::unknown_field(other, &["name", "rows"]));
                }
            }
        }
        Ok(NamedRows {
            name: name.ok_or_else(|| de::Error::missing_field("name"))?,
            rows: rows.ok_or_else(|| de::Error::missing_field("rows"))?,
        })
    }
}

struct RowsSeed {
    n: usize,
}

impl<'de> DeserializeSeed<'de> for RowsSeed {
    type Value = Vec<Vec<f64>>;

    fn deserialize<D: Deserializer<'de>>(self, d: D) -> Result<Self::Value, D::Error> {
        d.deserialize_seq(self)
    }
}

impl<'de> Visitor<'de> for RowsSeed {
    type Value = Vec<Vec<f64>>;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "{} rows", self.n)
    }

    fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Self::Value, A::Error> {
        let mut rows = Vec::with_capacity(self.n);
        while let Some(row) = seq.next_element_seed(RowSeed { n: self.n })? {
            if rows.len() == self.n {
                return Err(de::Error::custom(format_args!("more than n = {} rows", self.n)));
            }
            rows.push(row);
        }
        if rows.len() != self.n {
            return Err(de::Error::custom(format_args!("expected n = {} rows, found {}", self.n, rows.len())));
        }
        Ok(rows)
    }
}

struct RowSeed {
    n: usize,
}

impl<'de> DeserializeSeed<'de> for RowSeed {
    type Value = Vec<f64>;

    fn deserialize<D: Deserializer<'de>>(self, d: D) -> Result<Self::Value, D::Error> {
        d.deserialize_seq(self)
    }
}

impl<'de> Visitor<'de> for RowSeed {
    type Value = Vec<f64>;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "a row of {} entries", self.n)
    }

    fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Self::Value, A::Error> {
        let mut row = Vec::with_capacity(self.n);
        while let Some(Entry(v)) = seq.next_element()? {
            if row.len() == self.n {
                return Err(de::Error::custom(format_args!("row has more than n = {} entries", self.n)));
            }
            row.push(v);
        }
        if row.len() != self.n {
            return Err(de::Error::custom(format_args!("row has {} entries, expected n = {}", row.len(), self.n)));
        }
        Ok(row)
    }
}
