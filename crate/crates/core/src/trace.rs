//! Recorded waveforms and their CSV form.

use std::fmt::Write as _;

use crate::error::AnalysisError;

/// Every recorded column, in CSV order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Signal {
    Ea,
    Eb,
    Ec,
    VRect,
    GateQ1,
    IL1,
    IL2,
    VC1,
    VC2,
    VZetaOut,
    VSwQ1,
    VDiode,
    VInvRaw,
    IInvRaw,
    IInvDc,
    VSwS1,
    VLoad,
    ILoad,
    /// Mean power over the preceding recording interval.
    PIn,
    POut,
    PSrc,
    /// 1 if any step in the preceding interval ran in DCM.
    Dcm,
}

pub const SIGNAL_COUNT: usize = 22;

impl Signal {
    pub const ALL: [Signal; SIGNAL_COUNT] = [
        Signal::Ea,
        Signal::Eb,
        Signal::Ec,
        Signal::VRect,
        Signal::GateQ1,
        Signal::IL1,
        Signal::IL2,
        Signal::VC1,
        Signal::VC2,
        Signal::VZetaOut,
        Signal::VSwQ1,
        Signal::VDiode,
        Signal::VInvRaw,
        Signal::IInvRaw,
        Signal::IInvDc,
        Signal::VSwS1,
        Signal::VLoad,
        Signal::ILoad,
        Signal::PIn,
        Signal::POut,
        Signal::PSrc,
        Signal::Dcm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Signal::Ea => "ea",
            Signal::Eb => "eb",
            Signal::Ec => "ec",
            Signal::VRect => "v_rect",
            Signal::GateQ1 => "gate_q1",
            Signal::IL1 => "iL1",
            Signal::IL2 => "iL2",
            Signal::VC1 => "vC1",
            Signal::VC2 => "vC2",
            Signal::VZetaOut => "v_zeta_out",
            Signal::VSwQ1 => "v_sw_q1",
            Signal::VDiode => "v_diode",
            Signal::VInvRaw => "v_inv_raw",
            Signal::IInvRaw => "i_inv_raw",
            Signal::IInvDc => "i_inv_dc",
            Signal::VSwS1 => "v_sw_s1",
            Signal::VLoad => "v_load",
            Signal::ILoad => "i_load",
            Signal::PIn => "p_in",
            Signal::POut => "p_out",
            Signal::PSrc => "p_src",
            Signal::Dcm => "dcm",
        }
    }

    pub fn unit(self) -> Option<&'static str> {
        match self {
            Signal::GateQ1 | Signal::Dcm => None,
            Signal::IL1 | Signal::IL2 | Signal::IInvRaw | Signal::IInvDc | Signal::ILoad => Some("A"),
            Signal::PIn | Signal::POut | Signal::PSrc => Some("W"),
            _ => Some("V"),
        }
    }

    /// Unit-annotated CSV header, e.g. `v_load_V`.
    pub fn header(self) -> String {
        match self.unit() {
            Some(u) => format!("{}_{}", self.name(), u),
            None => self.name().to_string(),
        }
    }

    pub fn from_header(h: &str) -> Option<Signal> {
        Signal::ALL.into_iter().find(|s| s.header() == h || s.name() == h)
    }
}

/// Decimated time series of every signal, uniformly spaced.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WaveformTrace {
    pub t: Vec<f64>,
    columns: Vec<Vec<f64>>,
}

impl WaveformTrace {
    pub fn with_capacity(n: usize) -> Self {
        Self {
            t: Vec::with_capacity(n),
            columns: (0..SIGNAL_COUNT).map(|_| Vec::with_capacity(n)).collect(),
        }
    }

    pub fn push(&mut self, t: f64, row: &[f64; SIGNAL_COUNT]) {
        if self.columns.is_empty() {
            self.columns = vec![Vec::new(); SIGNAL_COUNT];
        }
        self.t.push(t);
        for (col, v) in self.columns.iter_mut().zip(row) {
            col.push(*v);
        }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn get(&self, s: Signal) -> &[f64] {
        self.columns.get(s as usize).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Sample spacing, derived from the first and last sample.
    pub fn spacing(&self) -> f64 {
        match self.t.len() {
            0 | 1 => 0.0,
            n => (self.t[n - 1] - self.t[0]) / (n - 1) as f64,
        }
    }

    pub fn duration(&self) -> f64 {
        match (self.t.first(), self.t.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }

    /// CSV with `t_s` first and shortest round-trip float formatting.
    pub fn to_csv(&self) -> String {
        self.to_csv_columns(&Signal::ALL)
    }

    pub fn to_csv_columns(&self, signals: &[Signal]) -> String {
        let mut out = String::with_capacity(self.len() * (signals.len() + 1) * 12);
        out.push_str("t_s");
        for s in signals {
            out.push(',');
            out.push_str(&s.header());
        }
        out.push('\n');
        for (i, t) in self.t.iter().enumerate() {
            let _ = write!(out, "{t}");
            for s in signals {
                let _ = write!(out, ",{}", self.get(*s)[i]);
            }
            out.push('\n');
        }
        out
    }

    /// Parse a trace CSV. Missing signal columns are zero-filled; unknown
    /// columns are an error.
    pub fn from_csv(text: &str) -> Result<Self, AnalysisError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| AnalysisError::Malformed("empty file".into()))?;
        let names: Vec<&str> = header.split(',').map(str::trim).collect();
        if names.first() != Some(&"t_s") {
            return Err(AnalysisError::Malformed("first column must be t_s".into()));
        }
        let map: Vec<Signal> = names[1..]
            .iter()
            .map(|h| Signal::from_header(h).ok_or_else(|| AnalysisError::MissingColumn((*h).to_string())))
            .collect::<Result<_, _>>()?;

        let mut trace = WaveformTrace::with_capacity(0);
        for (lineno, line) in lines.enumerate() {
            let values: Vec<f64> = line
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| AnalysisError::Malformed(format!("line {}: {e}", lineno + 2)))?;
            if values.len() != names.len() {
                return Err(AnalysisError::Malformed(format!(
                    "line {}: expected {} fields, found {}",
                    lineno + 2,
                    names.len(),
                    values.len()
                )));
            }
            let mut row = [0.0; SIGNAL_COUNT];
            for (sig, v) in map.iter().zip(&values[1..]) {
                row[*sig as usize] = *v;
            }
            trace.push(values[0], &row);
        }
        Ok(trace)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn headers_carry_units() {
        assert_eq!(Signal::VLoad.header(), "v_load_V");
        assert_eq!(Signal::IL1.header(), "iL1_A");
        assert_eq!(Signal::GateQ1.header(), "gate_q1");
        assert_eq!(Signal::from_header("p_in_W"), Some(Signal::PIn));
        assert_eq!(Signal::ALL.len(), SIGNAL_COUNT);
        for (i, s) in Signal::ALL.iter().enumerate() {
            assert_eq!(*s as usize, i);
        }
    }

    #[test]
    fn rejects_unknown_column() {
        let err = WaveformTrace::from_csv("t_s,bogus\n0,1\n").unwrap_err();
        assert_eq!(err, AnalysisError::MissingColumn("bogus".into()));
        assert!(WaveformTrace::from_csv("t_s,v_load_V\n0\n").is_err());
    }

    proptest! {
        #[test]
        fn csv_round_trip(rows in prop::collection::vec(prop::array::uniform22(-1e6f64..1e6), 1..20)) {
            let mut tr = WaveformTrace::with_capacity(rows.len());
            for (i, r) in rows.iter().enumerate() {
                tr.push(i as f64 * 1e-6, r);
            }
            let back = WaveformTrace::from_csv(&tr.to_csv()).unwrap();
            prop_assert_eq!(back, tr);
        }
    }
}
