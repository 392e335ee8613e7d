//! Closed-form generation of broadband (B), narrowband (N) and nested
//! passband N(B) / B(N) phase sequences, plus reference sequences and the
//! JSON interchange format.
//!
//! Formulas (1-based indices k = 1..N_b, j = 1..N_n, phases in units of π):
//!
//! ```text
//!   β_k = (N_b + 1 − 2⌊(k+1)/2⌋)·⌊k/2⌋ / N_b
//!   ν_j = (−1)^j·⌊j/2⌋·2 / N_n
//!   N(B):  φ_{N_b(j−1)+k} = ν_j + β_k
//!   B(N):  φ_{N_n(k−1)+j} = ν_j + β_k       (k odd)
//!                         = ν_{N_n+1−j} + β_k (k even, inner list reversed)
//! ```
//!
//! Nested outputs are canonicalized into [0, 2π); the plain narrowband list
//! keeps its signed values (canonicalization is a separate step).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase::Phase;
use crate::su2::{compose_sequence, PulseArea, Su2Propagator};

/// Family a phase list belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SequenceKind {
    Single,
    Broadband,
    Narrowband,
    #[serde(rename = "NestedNB")]
    NestedNb,
    #[serde(rename = "NestedBN")]
    NestedBn,
    Reference,
    Numerical,
}

impl SequenceKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SequenceKind::Single => "Single",
            SequenceKind::Broadband => "Broadband",
            SequenceKind::Narrowband => "Narrowband",
            SequenceKind::NestedNb => "NestedNB",
            SequenceKind::NestedBn => "NestedBN",
            SequenceKind::Reference => "Reference",
            SequenceKind::Numerical => "Numerical",
        }
    }
}

impl std::fmt::Display for SequenceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An ordered composite-pulse phase list (chronological order: first pulse
/// first) with provenance metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseList {
    pub label: String,
    pub kind: SequenceKind,
    #[serde(rename = "N_b", skip_serializing_if = "Option::is_none", default)]
    pub n_b: Option<u32>,
    #[serde(rename = "N_n", skip_serializing_if = "Option::is_none", default)]
    pub n_n: Option<u32>,
    pub phases: Vec<Phase>,
}

impl PhaseList {
    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn phases(&self) -> &[Phase] {
        &self.phases
    }

    pub fn radians(&self) -> Vec<f64> {
        self.phases.iter().map(|p| p.radians()).collect()
    }

    /// Every phase folded into [0, 2π) by exact arithmetic.
    pub fn canonicalized(&self) -> PhaseList {
        PhaseList {
            phases: self.phases.iter().map(|p| p.canonicalized()).collect(),
            ..self.clone()
        }
    }

    /// Composed propagator of the whole train at the given per-pulse area.
    pub fn propagator(&self, area: PulseArea) -> Result<Su2Propagator> {
        compose_sequence(area, &self.phases)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("phase list serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<PhaseList> {
        let list: PhaseList =
            serde_json::from_str(text).map_err(|e| Error::SequenceFile(e.to_string()))?;
        if list.phases.is_empty() {
            return Err(Error::SequenceFile("empty phase list".into()));
        }
        Ok(list)
    }
}

fn check_odd(n: u32) -> Result<()> {
    if n == 0 || n.is_multiple_of(2) {
        Err(Error::InvalidPulseCount(n as i64))
    } else {
        Ok(())
    }
}

/// The single-pulse "sequence" {0}.
pub fn single_pulse() -> PhaseList {
    PhaseList {
        label: "single".into(),
        kind: SequenceKind::Single,
        n_b: None,
        n_n: None,
        phases: vec![Phase::zero()],
    }
}

fn beta(n_b: u32, k: u32) -> Phase {
    let nb = n_b as i64;
    let k = k as i64;
    let num = (nb + 1 - 2 * ((k + 1) / 2)) * (k / 2);
    Phase::new(num, nb).expect("n_b > 0")
}

fn nu(n_n: u32, j: u32) -> Phase {
    let nn = n_n as i64;
    let j = j as i64;
    let sign = if j % 2 == 0 { 1 } else { -1 };
    Phase::new(sign * (j / 2) * 2, nn).expect("n_n > 0")
}

/// Broadband phases β_k for an odd pulse count; e.g. B₃ = {0, 2/3, 0}π.
pub fn broadband_phases(n_b: u32) -> Result<PhaseList> {
    check_odd(n_b)?;
    Ok(PhaseList {
        label: format!("B{n_b}"),
        kind: SequenceKind::Broadband,
        n_b: Some(n_b),
        n_n: None,
        phases: (1..=n_b).map(|k| beta(n_b, k)).collect(),
    })
}

/// Narrowband phases ν_j for an odd pulse count, signed form;
/// e.g. N₃ = {0, 2/3, −2/3}π. Canonicalize separately if needed.
pub fn narrowband_phases(n_n: u32) -> Result<PhaseList> {
    check_odd(n_n)?;
    Ok(PhaseList {
        label: format!("N{n_n}"),
        kind: SequenceKind::Narrowband,
        n_b: None,
        n_n: Some(n_n),
        phases: (1..=n_n).map(|j| nu(n_n, j)).collect(),
    })
}

/// Passband N(B): the broadband sequence nested into each narrowband pulse,
/// φ_{N_b(j−1)+k} = ν_j + β_k, canonicalized into [0, 2π).
pub fn nest_nb(n_n: u32, n_b: u32) -> Result<PhaseList> {
    check_odd(n_n)?;
    check_odd(n_b)?;
    let mut phases = Vec::with_capacity((n_n * n_b) as usize);
    for j in 1..=n_n {
        for k in 1..=n_b {
            phases.push((nu(n_n, j) + beta(n_b, k)).canonicalized());
        }
    }
    Ok(PhaseList {
        label: format!("N{n_n}(B{n_b})"),
        kind: SequenceKind::NestedNb,
        n_b: Some(n_b),
        n_n: Some(n_n),
        phases,
    })
}

/// Passband B(N): the narrowband sequence nested into each broadband pulse,
/// alternating the inner list with its reverse on even outer pulses,
/// canonicalized into [0, 2π).
pub fn nest_bn(n_b: u32, n_n: u32) -> Result<PhaseList> {
    check_odd(n_b)?;
    check_odd(n_n)?;
    let mut phases = Vec::with_capacity((n_n * n_b) as usize);
    for k in 1..=n_b {
        for j in 1..=n_n {
            let inner = if k % 2 == 1 {
                nu(n_n, j)
            } else {
                nu(n_n, n_n + 1 - j)
            };
            phases.push((inner + beta(n_b, k)).canonicalized());
        }
    }
    Ok(PhaseList {
        label: format!("B{n_b}(N{n_n})"),
        kind: SequenceKind::NestedBn,
        n_b: Some(n_b),
        n_n: Some(n_n),
        phases,
    })
}

/// The 9-pulse PB₂(π) reference sequence of Wimperis:
/// {0, 1/2, 1/2, 11/8, 11/8, 11/8, 11/8, 1/2, 1/2}π.
pub fn wimperis_pb2() -> PhaseList {
    let ph = |n, d| Phase::new(n, d).expect("static denominators");
    PhaseList {
        label: "PB2(pi)".into(),
        kind: SequenceKind::Reference,
        n_b: None,
        n_n: None,
        phases: vec![
            ph(0, 1),
            ph(1, 2),
            ph(1, 2),
            ph(11, 8),
            ph(11, 8),
            ph(11, 8),
            ph(11, 8),
            ph(1, 2),
            ph(1, 2),
        ],
    }
}

/// Free-function form of [`PhaseList::canonicalized`].
pub fn canonicalize(ph: &PhaseList) -> PhaseList {
    ph.canonicalized()
}

/// Parse a sequence selector: `single`, `B{n}`, `N{n}`, `N{n}(B{m})`,
/// `B{n}(N{m})`, or `wimperis-pb2` (case-insensitive).
pub fn parse_selector(s: &str) -> Result<PhaseList> {
    let t = s.trim();
    let lower = t.to_ascii_lowercase();
    if lower == "single" || lower == "1" {
        return Ok(single_pulse());
    }
    if lower == "wimperis-pb2" || lower == "pb2" {
        return Ok(wimperis_pb2());
    }
    let unknown = || Error::UnknownSelector(s.to_string());
    let parse_count = |txt: &str| -> Result<u32> {
        let n: u32 = txt.parse().map_err(|_| unknown())?;
        check_odd(n)?;
        Ok(n)
    };
    let bytes = lower.as_bytes();
    if bytes.is_empty() {
        return Err(unknown());
    }
    let outer = bytes[0];
    if outer != b'n' && outer != b'b' {
        return Err(unknown());
    }
    let rest = &lower[1..];
    if let Some(open) = rest.find('(') {
        if !rest.ends_with(')') {
            return Err(unknown());
        }
        let outer_n = parse_count(&rest[..open])?;
        let inner = &rest[open + 1..rest.len() - 1];
        if inner.is_empty() {
            return Err(unknown());
        }
        let inner_kind = inner.as_bytes()[0];
        let inner_n = parse_count(&inner[1..])?;
        match (outer, inner_kind) {
            (b'n', b'b') => nest_nb(outer_n, inner_n),
            (b'b', b'n') => nest_bn(outer_n, inner_n),
            _ => Err(unknown()),
        }
    } else {
        let n = parse_count(rest)?;
        match outer {
            // canonical form for interchange; narrowband_phases itself keeps
            // the signed values
            b'n' => Ok(narrowband_phases(n)?.canonicalized()),
            b'b' => broadband_phases(n),
            _ => Err(unknown()),
        }
    }
}
