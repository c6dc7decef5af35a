//! JSON file formats for generators and bases.
//!
//! Generator grids are stored as integers; complex amplitudes as `[re, im]`
//! pairs in shortest round-trip form, so reading back reproduces every bit.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chargroup::Decomposition;
use crate::error::{Error, Result};
use crate::exact::{to_complex, zeilinger_defect, ExponentMatrix, Tolerance};
use crate::meb::{BipartiteState, MebBasis, Provenance};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorKind {
    Character,
    Dft,
    Hadamard,
    Custom,
}

impl GeneratorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Character => "character",
            Self::Dft => "dft",
            Self::Hadamard => "hadamard",
            Self::Custom => "custom",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorProvenance {
    pub kind: GeneratorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<Decomposition>,
}

impl GeneratorProvenance {
    pub fn label(&self) -> String {
        match &self.decomposition {
            Some(dec) => format!("{} {}", self.kind.as_str(), dec),
            None => self.kind.as_str().to_string(),
        }
    }
}

/// On-disk generator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorFile {
    pub d: usize,
    pub base: u32,
    pub entries: Vec<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<GeneratorProvenance>,
}

impl GeneratorFile {
    pub fn from_matrix(e: &ExponentMatrix, provenance: Option<GeneratorProvenance>) -> Self {
        Self {
            d: e.dim(),
            base: e.order(),
            entries: e.rows().map(|r| r.iter().map(|&x| x as i64).collect()).collect(),
            provenance,
        }
    }

    /// Shape and range checks; every message names the offending field.
    pub fn to_matrix(&self) -> std::result::Result<ExponentMatrix, String> {
        if self.d == 0 {
            return Err("d: must be at least 1".into());
        }
        if self.base == 0 {
            return Err("base: must be at least 1".into());
        }
        if self.entries.len() != self.d {
            return Err(format!("entries: {} rows, expected d = {}", self.entries.len(), self.d));
        }
        for (r, row) in self.entries.iter().enumerate() {
            if row.len() != self.d {
                return Err(format!("entries[{r}]: row has {} entries, expected {}", row.len(), self.d));
            }
            if let Some((c, x)) = row.iter().enumerate().find(|(_, &x)| x < 0 || x >= self.base as i64) {
                return Err(format!("entries[{r}][{c}]: {x} is not reduced mod base {}", self.base));
            }
        }
        if let Some(dec) = self.provenance.as_ref().and_then(|p| p.decomposition.as_ref()) {
            if dec.dim() != self.d {
                return Err(format!("provenance.decomposition: {dec} has product {}, expected {}", dec.dim(), self.d));
            }
        }
        ExponentMatrix::from_rows(self.base, &self.entries).map_err(|e| e.to_string())
    }
}

/// A validated generator read from disk.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoadedGenerator {
    pub matrix: ExponentMatrix,
    pub provenance: Option<GeneratorProvenance>,
}

fn parse_err(path: &Path, msg: impl Into<String>) -> Error {
    Error::Parse { path: path.to_path_buf(), msg: msg.into() }
}

fn validation_err(path: &Path, msg: impl Into<String>) -> Error {
    Error::Validation { path: path.to_path_buf(), msg: msg.into() }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

/// Parses generator JSON; `path` only labels errors.
pub fn parse_generator(text: &str, path: &Path, verify: Option<Tolerance>) -> Result<LoadedGenerator> {
    let file: GeneratorFile = serde_json::from_str(text).map_err(|e| parse_err(path, e.to_string()))?;
    let matrix = file.to_matrix().map_err(|m| parse_err(path, m))?;
    if let Some(tol) = verify {
        if let Some(why) = zeilinger_defect(&to_complex(&matrix), tol)? {
            return Err(validation_err(path, format!("not a Zeilinger matrix: {why}")));
        }
    }
    Ok(LoadedGenerator { matrix, provenance: file.provenance })
}

/// Reads a generator; the Zeilinger property is enforced when `verify` is set.
pub fn read_generator(path: impl AsRef<Path>, verify: Option<Tolerance>) -> Result<LoadedGenerator> {
    let path = path.as_ref();
    parse_generator(&read_text(path)?, path, verify)
}

fn json<T: Serialize + ?Sized>(value: &T) -> String {
    serde_json::to_string(value).expect("plain data serializes")
}

fn push_rows<'a>(out: &mut String, indent: &str, rows: impl ExactSizeIterator<Item = String> + 'a) {
    let n = rows.len();
    out.push_str("[\n");
    for (i, row) in rows.enumerate() {
        out.push_str(indent);
        out.push_str("  ");
        out.push_str(&row);
        out.push_str(if i + 1 < n { ",\n" } else { "\n" });
    }
    out.push_str(indent);
    out.push(']');
}

fn generator_json(file: &GeneratorFile, indent: &str) -> String {
    let mut s = format!("{{\n{indent}  \"d\": {},\n{indent}  \"base\": {},\n{indent}  \"entries\": ", file.d, file.base);
    push_rows(&mut s, &format!("{indent}  "), file.entries.iter().map(json));
    if let Some(p) = &file.provenance {
        s.push_str(&format!(",\n{indent}  \"provenance\": {}", json(p)));
    }
    s.push_str(&format!("\n{indent}}}"));
    s
}

/// Generator JSON with one grid row per line.
pub fn generator_to_string(e: &ExponentMatrix, provenance: Option<&GeneratorProvenance>) -> String {
    let mut s = generator_json(&GeneratorFile::from_matrix(e, provenance.cloned()), "");
    s.push('\n');
    s
}

pub fn write_generator(e: &ExponentMatrix, provenance: Option<&GeneratorProvenance>, path: impl AsRef<Path>) -> Result<()> {
    write_text(path.as_ref(), &generator_to_string(e, provenance))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateRecord {
    pub j: usize,
    pub k: usize,
    pub amplitudes: Vec<[f64; 2]>,
}

/// On-disk basis: all `d²` states, optionally with their generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisFile {
    pub d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorFile>,
    pub states: Vec<StateRecord>,
}

impl BasisFile {
    pub fn from_basis(basis: &MebBasis, provenance: Option<GeneratorProvenance>) -> Self {
        let d = basis.dim();
        let states = (0..d * d)
            .map(|idx| StateRecord {
                j: idx / d,
                k: idx % d,
                amplitudes: basis.states()[idx].amplitudes().iter().map(|z| [z.re, z.im]).collect(),
            })
            .collect();
        Self {
            d,
            generator: basis.provenance().generator.as_ref().map(|g| GeneratorFile::from_matrix(g, provenance)),
            states,
        }
    }
}

/// Basis JSON with one state per line.
pub fn basis_to_string(basis: &MebBasis, provenance: Option<&GeneratorProvenance>) -> String {
    let file = BasisFile::from_basis(basis, provenance.cloned());
    let mut s = format!("{{\n  \"d\": {},\n", file.d);
    if let Some(g) = &file.generator {
        s.push_str(&format!("  \"generator\": {},\n", generator_json(g, "  ")));
    }
    s.push_str("  \"states\": ");
    push_rows(&mut s, "  ", file.states.iter().map(json));
    s.push_str("\n}\n");
    s
}

pub fn write_basis(basis: &MebBasis, provenance: Option<&GeneratorProvenance>, path: impl AsRef<Path>) -> Result<()> {
    write_text(path.as_ref(), &basis_to_string(basis, provenance))
}

/// Parses basis JSON. States must be normalized; orthogonality and
/// entanglement are left to verification.
pub fn parse_basis(text: &str, path: &Path, tol: Tolerance) -> Result<MebBasis> {
    let file: BasisFile = serde_json::from_str(text).map_err(|e| parse_err(path, e.to_string()))?;
    let d = file.d;
    if d == 0 {
        return Err(parse_err(path, "d: must be at least 1"));
    }
    if file.states.len() != d * d {
        return Err(parse_err(path, format!("states: {} records, expected {}", file.states.len(), d * d)));
    }
    let mut slots: Vec<Option<BipartiteState>> = vec![None; d * d];
    for (i, rec) in file.states.iter().enumerate() {
        if rec.j >= d || rec.k >= d {
            return Err(parse_err(path, format!("states[{i}]: index ({}, {}) out of range", rec.j, rec.k)));
        }
        if rec.amplitudes.len() != d * d {
            return Err(parse_err(
                path,
                format!("states[{i}].amplitudes: {} entries, expected {}", rec.amplitudes.len(), d * d),
            ));
        }
        let amps = rec.amplitudes.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        let state = BipartiteState::new(d, amps, tol)
            .map_err(|e| validation_err(path, format!("states[{i}]: {}", strip_path(&e))))?;
        let slot = &mut slots[rec.j * d + rec.k];
        if slot.is_some() {
            return Err(parse_err(path, format!("states[{i}]: duplicate index ({}, {})", rec.j, rec.k)));
        }
        *slot = Some(state);
    }
    let states = slots.into_iter().map(|s| s.expect("all d² indices present")).collect();
    let (generator, label) = match &file.generator {
        Some(g) => {
            let m = g.to_matrix().map_err(|m| parse_err(path, format!("generator.{m}")))?;
            let label = g.provenance.as_ref().map_or_else(|| "file".to_string(), GeneratorProvenance::label);
            (Some(m), label)
        }
        None => (None, "file".to_string()),
    };
    MebBasis::from_states(d, states, Provenance { label, generator })
        .map_err(|e| validation_err(path, e.to_string()))
}

pub fn read_basis(path: impl AsRef<Path>, tol: Tolerance) -> Result<MebBasis> {
    let path = path.as_ref();
    parse_basis(&read_text(path)?, path, tol)
}

fn strip_path(e: &Error) -> String {
    match e {
        Error::Validation { msg, .. } | Error::Parse { msg, .. } => msg.clone(),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chargroup::{dft_generator, zeilinger_generator};
    use crate::meb::generate_meb;

    fn tmp() -> tempfile::TempDir {
        tempfile::tempdir().unwrap()
    }

    #[test]
    fn generator_round_trip() {
        let dir = tmp();
        let path = dir.path().join("dft4.json");
        let e = dft_generator(4).unwrap();
        write_generator(&e, None, &path).unwrap();
        let back = read_generator(&path, Some(Tolerance::default())).unwrap();
        assert_eq!(back.matrix, e);
        assert_eq!(back.provenance, None);

        let dec: Decomposition = "2x3".parse().unwrap();
        let prov = GeneratorProvenance { kind: GeneratorKind::Character, decomposition: Some(dec.clone()) };
        let g = zeilinger_generator(&dec);
        write_generator(&g, Some(&prov), &path).unwrap();
        let back = read_generator(&path, Some(Tolerance::default())).unwrap();
        assert_eq!(back.matrix, g);
        assert_eq!(back.provenance, Some(prov));
    }

    #[test]
    fn parse_errors_name_the_field() {
        let p = Path::new("x.json");
        let text = r#"{"d":4,"base":4,"entries":[[0,0,0,0],[0,1,2,3],[0,2,0],[0,3,2,1]]}"#;
        let err = parse_generator(text, p, None).unwrap_err();
        assert!(matches!(&err, Error::Parse { msg, .. } if msg.contains("entries[2]")), "{err}");

        let err = parse_generator("{\"d\":2,\n\"base\":2,\n\"entries\":[[0,0],[0,x]]}", p, None).unwrap_err();
        assert!(matches!(&err, Error::Parse { msg, .. } if msg.contains("line 3")), "{err}");

        let err = parse_generator(r#"{"d":2,"base":2,"entries":[[0,0],[0,2]]}"#, p, None).unwrap_err();
        assert!(matches!(&err, Error::Parse { msg, .. } if msg.contains("entries[1][1]")), "{err}");

        let err = parse_generator(r#"{"d":2,"base":2,"entries":[[0,0],[0,1]],"extra":1}"#, p, None).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }

    #[test]
    fn validation_rejects_non_unitary() {
        let p = Path::new("bad.json");
        let text = r#"{"d":2,"base":2,"entries":[[0,0],[0,0]]}"#;
        let err = parse_generator(text, p, Some(Tolerance::default())).unwrap_err();
        assert!(matches!(&err, Error::Validation { msg, .. } if msg.contains("unitarity")), "{err}");
        assert!(parse_generator(text, p, None).is_ok());
    }

    #[test]
    fn unwritable_path_is_an_io_error() {
        let dir = tmp();
        let path = dir.path().join("missing").join("g.json");
        let err = write_generator(&dft_generator(2).unwrap(), None, &path).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn basis_round_trip_is_bit_exact() {
        let dir = tmp();
        let path = dir.path().join("basis.json");
        let g = zeilinger_generator(&"3".parse().unwrap());
        let basis = generate_meb(&g).unwrap();
        let prov = GeneratorProvenance { kind: GeneratorKind::Dft, decomposition: None };
        write_basis(&basis, Some(&prov), &path).unwrap();
        let back = read_basis(&path, Tolerance::default()).unwrap();
        assert_eq!(back.states(), basis.states());
        assert_eq!(back.provenance().generator.as_ref(), Some(&g));
        assert_eq!(back.provenance().label, "dft");
    }

    #[test]
    fn written_text_is_valid_json() {
        let dec: Decomposition = "2x2".parse().unwrap();
        let prov = GeneratorProvenance { kind: GeneratorKind::Character, decomposition: Some(dec.clone()) };
        let g = zeilinger_generator(&dec);
        let text = generator_to_string(&g, Some(&prov));
        assert!(text.contains("    [0,0,0,0],\n"));
        let parsed: GeneratorFile = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed, GeneratorFile::from_matrix(&g, Some(prov.clone())));
        let basis = generate_meb(&g).unwrap();
        let parsed: BasisFile = serde_json::from_str(&basis_to_string(&basis, Some(&prov))).unwrap();
        assert_eq!(parsed, BasisFile::from_basis(&basis, Some(prov)));
    }

    #[test]
    fn basis_parse_errors() {
        let p = Path::new("b.json");
        let err = parse_basis(r#"{"d":2,"states":[]}"#, p, Tolerance::default()).unwrap_err();
        assert!(matches!(&err, Error::Parse { msg, .. } if msg.contains("states")));
        let basis = generate_meb(&dft_generator(2).unwrap()).unwrap();
        let mut file = BasisFile::from_basis(&basis, None);
        file.states[1].amplitudes[0] = [5.0, 0.0];
        let err = parse_basis(&serde_json::to_string(&file).unwrap(), p, Tolerance::default()).unwrap_err();
        assert!(matches!(&err, Error::Validation { msg, .. } if msg.contains("states[1]")), "{err}");
        let mut file = BasisFile::from_basis(&basis, None);
        file.states[1].k = 0;
        let err = parse_basis(&serde_json::to_string(&file).unwrap(), p, Tolerance::default()).unwrap_err();
        assert!(matches!(&err, Error::Parse { msg, .. } if msg.contains("duplicate")), "{err}");
    }
}
