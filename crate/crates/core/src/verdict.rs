//! Verdicts and their JSON form.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::criteria::{FilterReport, Rule};
use crate::oracle::ConstellationWitness;
use crate::partition::CandidateDatum;
use crate::reduction::{ReductionChain, Theorem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Realizable,
    Exceptional,
    Unknown,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Realizable => "realizable",
            Status::Exceptional => "exceptional",
            Status::Unknown => "unknown",
        })
    }
}

/// Resource limit that left a datum undecided.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Limit {
    DegreeLimit,
    Budget,
}

impl fmt::Display for Limit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Limit::DegreeLimit => "degree-limit",
            Limit::Budget => "budget",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Rh,
    BaseCase,
    Filter(Rule),
    Reduction(Theorem),
    Oracle,
    SongXu,
    Limit(Limit),
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Rh => f.write_str("rh"),
            Method::BaseCase => f.write_str("base-case"),
            Method::Filter(rule) => write!(f, "filter:{rule}"),
            Method::Reduction(thm) => write!(f, "reduction:{thm}"),
            Method::Oracle => f.write_str("oracle"),
            Method::SongXu => f.write_str("songxu"),
            Method::Limit(limit) => write!(f, "limit:{limit}"),
        }
    }
}

impl Serialize for Method {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Certificate {
    Witness(ConstellationWitness),
    Chain(ReductionChain),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Stats {
    pub nodes: u64,
    pub cache_hits: u64,
    pub millis: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub status: Status,
    pub method: Method,
    pub certificate: Option<Certificate>,
    pub reasons: Vec<FilterReport>,
    pub stats: Stats,
}

impl Verdict {
    pub fn new(status: Status, method: Method) -> Self {
        Verdict { status, method, certificate: None, reasons: Vec::new(), stats: Stats::default() }
    }

    pub fn realizable(method: Method, certificate: Certificate) -> Self {
        Verdict { certificate: Some(certificate), ..Verdict::new(Status::Realizable, method) }
    }

    pub fn exceptional(method: Method) -> Self {
        Verdict::new(Status::Exceptional, method)
    }

    pub fn unknown(limit: Limit) -> Self {
        Verdict::new(Status::Unknown, Method::Limit(limit))
    }

    pub fn limit(&self) -> Option<Limit> {
        match self.method {
            Method::Limit(l) => Some(l),
            _ => None,
        }
    }

    /// JSON verdict object for `datum`, with `input` echoed verbatim.
    pub fn to_record<'a>(&'a self, input: &'a str, datum: &'a CandidateDatum) -> VerdictRecord<'a> {
        VerdictRecord {
            input,
            degree: datum.degree(),
            partitions: datum.partitions().iter().map(|p| p.parts()).collect(),
            status: self.status,
            method: self.method,
            reasons: &self.reasons,
            certificate: self.certificate.as_ref(),
            stats: self.stats,
        }
    }
}

#[derive(Serialize)]
pub struct VerdictRecord<'a> {
    pub input: &'a str,
    pub degree: u64,
    pub partitions: Vec<&'a [u64]>,
    pub status: Status,
    pub method: Method,
    pub reasons: &'a [FilterReport],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<&'a Certificate>,
    pub stats: Stats,
}
