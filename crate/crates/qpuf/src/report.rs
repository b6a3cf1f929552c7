//! CSV report rows. Column order is part of the file format.

use qpuf_core::polarcode::ConstructionReport;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstructionRow {
    pub q: usize,
    pub d: f64,
    pub n_s: usize,
    pub n_f: usize,
    pub h_att: f64,
    pub h_att_printed: f64,
    pub h_secret: f64,
    pub with_helper_data: bool,
    pub alpha: u8,
    pub trials: u64,
}

impl ConstructionRow {
    pub fn new(r: &ConstructionReport, alpha: u8, trials: u64) -> Self {
        ConstructionRow {
            q: r.q,
            d: r.d,
            n_s: r.n_s,
            n_f: r.n_f,
            h_att: r.h_att,
            h_att_printed: r.h_att_printed,
            h_secret: r.h_secret,
            with_helper_data: r.with_helper_data,
            alpha,
            trials,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FerRow {
    pub decoder: String,
    pub q: usize,
    pub with_helper_data: bool,
    pub temperature: f64,
    pub trials: u64,
    pub frame_errors: u64,
    pub fer: f64,
    pub n_s: usize,
    pub n_f: usize,
    pub h_att: f64,
    pub h_att_printed: f64,
    pub h_secret: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaRow {
    pub q: usize,
    pub with_helper_data: bool,
    pub alpha: u8,
    pub d: f64,
    pub n_s: usize,
    pub n_f: usize,
    pub h_att: f64,
    pub h_secret: f64,
}

pub fn to_csv<T: Serialize>(rows: &[T]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory write")
}
