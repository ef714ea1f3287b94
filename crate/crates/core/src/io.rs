//! File formats: JSON for coefficients, symbols and reports, CSV for
//! grid functions and report tables, and gnuplot-ready data files for
//! probe statistics.
//!
//! Numbers are written with Rust's shortest-round-trip `f64` formatting,
//! so every emitted file re-parses to exactly the value written.  Parse
//! errors name the offending record.

use crate::error::{Error, Result};
use crate::fourier::{FourierCoefficients, GridFunction};
use crate::grid::QuadratureGrid;
use crate::group::{GroupId, IrrepLabel};
use crate::halfint::HalfInt;
use crate::linalg::{zeros, CMat};
use crate::multiplier::MultiplierReport;
use crate::probe::ProbeResult;
use crate::symbols::{FullSymbol, InvariantSymbol, Symbol};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

#[derive(Serialize, Deserialize)]
struct MatrixRecord {
    label: IrrepLabel,
    matrix_re: Vec<Vec<f64>>,
    matrix_im: Vec<Vec<f64>>,
}

impl MatrixRecord {
    fn from_matrix(label: &IrrepLabel, m: &CMat) -> Self {
        let (rows, cols) = (m.nrows(), m.ncols());
        let mut re = vec![vec![0.0; cols]; rows];
        let mut im = vec![vec![0.0; cols]; rows];
        for i in 0..rows {
            for j in 0..cols {
                re[i][j] = m[(i, j)].re;
                im[i][j] = m[(i, j)].im;
            }
        }
        MatrixRecord {
            label: label.clone(),
            matrix_re: re,
            matrix_im: im,
        }
    }

    fn to_matrix(&self, index: usize) -> Result<CMat> {
        let d = self.label.dim();
        let shape_ok = |m: &Vec<Vec<f64>>| m.len() == d && m.iter().all(|row| row.len() == d);
        if !shape_ok(&self.matrix_re) || !shape_ok(&self.matrix_im) {
            return Err(Error::Parse(format!(
                "entry {index} (label {}): matrix shape does not match the {d}x{d} irrep",
                self.label
            )));
        }
        let mut m = zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] = Complex64::new(self.matrix_re[i][j], self.matrix_im[i][j]);
            }
        }
        Ok(m)
    }
}

fn records_to_map(records: &[MatrixRecord], group: GroupId) -> Result<BTreeMap<IrrepLabel, CMat>> {
    let mut map = BTreeMap::new();
    for (i, rec) in records.iter().enumerate() {
        rec.label
            .validate(group)
            .map_err(|e| Error::Parse(format!("entry {i}: {e}")))?;
        let m = rec.to_matrix(i)?;
        if map.insert(rec.label.clone(), m).is_some() {
            return Err(Error::Parse(format!(
                "entry {i}: duplicate label {}",
                rec.label
            )));
        }
    }
    Ok(map)
}

#[derive(Serialize, Deserialize)]
struct CoefficientsFile {
    group: GroupId,
    support_limit: HalfInt,
    entries: Vec<MatrixRecord>,
}

pub fn coefficients_to_json(c: &FourierCoefficients) -> Result<String> {
    let file = CoefficientsFile {
        group: c.group(),
        support_limit: c.support_limit(),
        entries: c
            .iter()
            .map(|(label, m)| MatrixRecord::from_matrix(label, m))
            .collect(),
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

pub fn coefficients_from_json(s: &str) -> Result<FourierCoefficients> {
    let file: CoefficientsFile = serde_json::from_str(s)?;
    let mut c = FourierCoefficients::zero(file.group, file.support_limit);
    for (label, m) in records_to_map(&file.entries, file.group)? {
        let name = label.to_string();
        c.insert(label, m)
            .map_err(|e| Error::Parse(format!("label {name}: {e}")))?;
    }
    Ok(c)
}

#[derive(Serialize, Deserialize)]
struct InvariantPayload {
    support_limit: HalfInt,
    trusted_limit: HalfInt,
    exact_support: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    declared_order: Option<f64>,
    entries: Vec<MatrixRecord>,
}

impl InvariantPayload {
    fn of(s: &InvariantSymbol) -> Self {
        InvariantPayload {
            support_limit: s.support_limit(),
            trusted_limit: s.trusted_limit(),
            exact_support: s.exact_support(),
            declared_order: s.declared_order(),
            entries: s
                .iter()
                .map(|(label, m)| MatrixRecord::from_matrix(label, m))
                .collect(),
        }
    }

    fn build(&self, group: GroupId) -> Result<InvariantSymbol> {
        if self.trusted_limit > self.support_limit {
            return Err(Error::Parse(format!(
                "trusted limit {} exceeds support limit {}",
                self.trusted_limit, self.support_limit
            )));
        }
        let entries = records_to_map(&self.entries, group)?;
        let mut s = InvariantSymbol::from_entries(group, self.support_limit, entries, self.exact_support)?;
        if let Some(order) = self.declared_order {
            s = s.with_declared_order(order);
        }
        s.set_trusted_limit(self.trusted_limit);
        Ok(s)
    }
}

#[derive(Serialize, Deserialize)]
struct SlicePayload {
    node_index: usize,
    #[serde(flatten)]
    payload: InvariantPayload,
}

#[derive(Serialize, Deserialize)]
struct SymbolFile {
    kind: String,
    group: GroupId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    invariant: Option<InvariantPayload>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grid_band: Option<HalfInt>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    slices: Option<Vec<SlicePayload>>,
}

pub fn symbol_to_json(symbol: &Symbol) -> Result<String> {
    let file = match symbol {
        Symbol::Invariant(s) => SymbolFile {
            kind: "invariant".into(),
            group: s.group(),
            invariant: Some(InvariantPayload::of(s)),
            grid_band: None,
            slices: None,
        },
        Symbol::Full(s) => SymbolFile {
            kind: "full".into(),
            group: s.group(),
            invariant: None,
            grid_band: Some(s.grid().band_limit()),
            slices: Some(
                (0..s.node_count())
                    .map(|node| SlicePayload {
                        node_index: node,
                        payload: InvariantPayload::of(s.slice(node)),
                    })
                    .collect(),
            ),
        },
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

pub fn symbol_from_json(s: &str) -> Result<Symbol> {
    let file: SymbolFile = serde_json::from_str(s)?;
    match file.kind.as_str() {
        "invariant" => {
            let payload = file
                .invariant
                .ok_or_else(|| Error::Parse("invariant symbol file without entries".into()))?;
            Ok(Symbol::Invariant(payload.build(file.group)?))
        }
        "full" => {
            let band = file
                .grid_band
                .ok_or_else(|| Error::Parse("full symbol file without grid_band".into()))?;
            let slices = file
                .slices
                .ok_or_else(|| Error::Parse("full symbol file without slices".into()))?;
            let grid = QuadratureGrid::get(file.group, band)?;
            if slices.len() != grid.node_count() {
                return Err(Error::Parse(format!(
                    "{} slices for a grid with {} nodes",
                    slices.len(),
                    grid.node_count()
                )));
            }
            let mut built = vec![None; slices.len()];
            for slice in &slices {
                if slice.node_index >= built.len() {
                    return Err(Error::Parse(format!(
                        "slice node_index {} out of range 0..{}",
                        slice.node_index,
                        built.len()
                    )));
                }
                if built[slice.node_index].is_some() {
                    return Err(Error::Parse(format!(
                        "duplicate slice at node_index {}",
                        slice.node_index
                    )));
                }
                built[slice.node_index] = Some(slice.payload.build(file.group)?);
            }
            let slices: Vec<InvariantSymbol> = built
                .into_iter()
                .enumerate()
                .map(|(i, s)| s.ok_or_else(|| Error::Parse(format!("missing slice at node_index {i}"))))
                .collect::<Result<_>>()?;
            Ok(Symbol::Full(FullSymbol::new(grid, slices)?))
        }
        other => Err(Error::Parse(format!("unknown symbol kind `{other}`"))),
    }
}

/// RFC-4180 style quoting for fields containing commas or quotes.
fn csv_escape(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

fn csv_split(line: &str) -> Vec<String> {
    let mut fields = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    let mut chars = line.chars().peekable();
    while let Some(c) = chars.next() {
        if quoted {
            if c == '"' {
                if chars.peek() == Some(&'"') {
                    chars.next();
                    cur.push('"');
                } else {
                    quoted = false;
                }
            } else {
                cur.push(c);
            }
        } else if c == '"' {
            quoted = true;
        } else if c == ',' {
            fields.push(std::mem::take(&mut cur));
        } else {
            cur.push(c);
        }
    }
    fields.push(cur);
    fields
}

fn half_decimal(h: HalfInt) -> String {
    format!("{}", h.twice() as f64 / 2.0)
}

pub fn grid_function_to_csv(f: &GridFunction) -> String {
    let mut out = String::from("node_index,re,im\n");
    for (i, v) in f.values().iter().enumerate() {
        out.push_str(&format!("{i},{},{}\n", v.re, v.im));
    }
    out
}

pub fn grid_function_from_csv(s: &str, grid: Arc<QuadratureGrid>) -> Result<GridFunction> {
    let mut values = Vec::new();
    for (lineno, line) in s.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (lineno == 0 && line.starts_with("node_index")) {
            continue;
        }
        let fields = csv_split(line);
        if fields.len() != 3 {
            return Err(Error::Parse(format!(
                "line {}: expected node_index,re,im, found {} fields",
                lineno + 1,
                fields.len()
            )));
        }
        let idx: usize = fields[0]
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("line {}: bad node index `{}`", lineno + 1, fields[0])))?;
        if idx != values.len() {
            return Err(Error::Parse(format!(
                "line {}: node index {idx} out of order (expected {})",
                lineno + 1,
                values.len()
            )));
        }
        let re: f64 = fields[1]
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("line {}: bad value `{}`", lineno + 1, fields[1])))?;
        let im: f64 = fields[2]
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("line {}: bad value `{}`", lineno + 1, fields[2])))?;
        values.push(Complex64::new(re, im));
    }
    GridFunction::from_values(grid, values)
}

pub fn report_to_json(report: &MultiplierReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(report)?)
}

pub fn report_from_json(s: &str) -> Result<MultiplierReport> {
    Ok(serde_json::from_str(s)?)
}

/// One row per condition; the verdict and caveats live in the JSON report.
pub fn report_to_csv(report: &MultiplierReport) -> String {
    let mut out = String::from(
        "condition,weight_exponent,constant,half_cutoff_constant,instability,argmax_label,argmax_node\n",
    );
    for c in &report.conditions {
        let label = c
            .argmax_label
            .as_ref()
            .map(|l| l.to_string())
            .unwrap_or_default();
        let node = c.argmax_node.map(|n| n.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            csv_escape(&c.id),
            c.weight_exponent,
            c.constant,
            c.half_cutoff_constant,
            c.instability,
            csv_escape(&label),
            node
        ));
    }
    out
}

/// Numeric columns of a report CSV, keyed by condition id, for
/// round-trip checks.
pub fn report_csv_rows(s: &str) -> Result<Vec<(String, f64, f64, f64)>> {
    let mut rows = Vec::new();
    for (lineno, line) in s.lines().enumerate() {
        if line.is_empty() || lineno == 0 {
            continue;
        }
        let fields = csv_split(line);
        if fields.len() != 7 {
            return Err(Error::Parse(format!(
                "line {}: expected 7 fields, found {}",
                lineno + 1,
                fields.len()
            )));
        }
        let num = |i: usize| -> Result<f64> {
            fields[i]
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad number `{}`", lineno + 1, fields[i])))
        };
        rows.push((fields[0].clone(), num(2)?, num(3)?, num(4)?));
    }
    Ok(rows)
}

pub fn probe_to_json(result: &ProbeResult) -> Result<String> {
    Ok(serde_json::to_string_pretty(result)?)
}

pub fn probe_from_json(s: &str) -> Result<ProbeResult> {
    Ok(serde_json::from_str(s)?)
}

pub fn probe_to_csv(result: &ProbeResult) -> String {
    let mut out = String::from("band_limit,statistic\n");
    for (b, s) in result.band_limits.iter().zip(&result.statistics) {
        out.push_str(&format!("{},{}\n", half_decimal(*b), s));
    }
    out
}

pub fn probe_csv_rows(s: &str) -> Result<Vec<(f64, f64)>> {
    let mut rows = Vec::new();
    for (lineno, line) in s.lines().enumerate() {
        if line.is_empty() || lineno == 0 {
            continue;
        }
        let fields = csv_split(line);
        if fields.len() != 2 {
            return Err(Error::Parse(format!(
                "line {}: expected band_limit,statistic",
                lineno + 1
            )));
        }
        let band: f64 = fields[0]
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("line {}: bad band limit `{}`", lineno + 1, fields[0])))?;
        let stat: f64 = fields[1]
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("line {}: bad statistic `{}`", lineno + 1, fields[1])))?;
        rows.push((band, stat));
    }
    Ok(rows)
}

/// Two columns, comment header; plot with `plot "file" using 1:2`.
pub fn probe_to_gnuplot(result: &ProbeResult) -> String {
    let mut out = format!(
        "# {} group={} p={} trials={} seed={} method={}\n# band_limit statistic\n",
        result.kind, result.group, result.p, result.trials, result.seed, result.method
    );
    for (b, s) in result.band_limits.iter().zip(&result.statistics) {
        out.push_str(&format!("{} {}\n", half_decimal(*b), s));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiplier::check_hm;
    use crate::probe::opnorm_lower_bound;
    use crate::symbols::spectral_multiplier;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn coefficients_round_trip_exactly() {
        for group in [GroupId::Su2, GroupId::Torus(2)] {
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            let c = FourierCoefficients::random(group, HalfInt::from_int(2), &mut rng).unwrap();
            let json = coefficients_to_json(&c).unwrap();
            let back = coefficients_from_json(&json).unwrap();
            assert_eq!(back.group(), group);
            assert_eq!(back.support_limit(), c.support_limit());
            for (label, m) in c.iter() {
                let b = back.entry_or_zero(label);
                assert_eq!(m, &b, "label {label}");
            }
        }
    }

    #[test]
    fn malformed_records_are_named() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c = FourierCoefficients::random(GroupId::Torus(1), HalfInt::from_int(1), &mut rng).unwrap();
        let json = coefficients_to_json(&c).unwrap();
        // Break the first matrix: wrong row count.
        let broken = json.replacen("\"matrix_re\": [", "\"matrix_re\": [[1.0, 2.0],", 1);
        match coefficients_from_json(&broken) {
            Err(Error::Parse(msg)) => assert!(msg.contains("entry 0"), "{msg}"),
            other => panic!("expected a parse error, got {other:?}"),
        }
    }

    #[test]
    fn symbols_round_trip_with_their_bookkeeping() {
        let sigma = spectral_multiplier(GroupId::Su2, HalfInt::from_int(3), |l| {
            Complex64::new(1.0 / l.weight(), -0.25)
        })
        .unwrap()
        .with_declared_order(-1.0);
        let json = symbol_to_json(&Symbol::Invariant(sigma.clone())).unwrap();
        let back = match symbol_from_json(&json).unwrap() {
            Symbol::Invariant(s) => s,
            _ => panic!("kind changed"),
        };
        assert_eq!(back.support_limit(), sigma.support_limit());
        assert_eq!(back.trusted_limit(), sigma.trusted_limit());
        assert_eq!(back.declared_order(), Some(-1.0));
        assert_eq!(back.exact_support(), sigma.exact_support());
        for (label, m) in sigma.iter() {
            assert_eq!(back.entry(label).unwrap(), m);
        }
    }

    #[test]
    fn full_symbols_round_trip_slice_by_slice() {
        let grid = QuadratureGrid::get(GroupId::Torus(1), HalfInt::from_int(2)).unwrap();
        let slices: Vec<InvariantSymbol> = (0..grid.node_count())
            .map(|node| {
                spectral_multiplier(GroupId::Torus(1), HalfInt::from_int(2), |l| {
                    Complex64::new(node as f64 + 1.0, l.lambda_sq())
                })
                .unwrap()
            })
            .collect();
        let full = FullSymbol::new(Arc::clone(&grid), slices).unwrap();
        let json = symbol_to_json(&Symbol::Full(full.clone())).unwrap();
        let back = match symbol_from_json(&json).unwrap() {
            Symbol::Full(s) => s,
            _ => panic!("kind changed"),
        };
        assert_eq!(back.node_count(), full.node_count());
        for node in 0..full.node_count() {
            for (label, m) in full.slice(node).iter() {
                assert_eq!(back.slice(node).entry(label).unwrap(), m);
            }
        }
    }

    #[test]
    fn grid_functions_round_trip_through_csv() {
        let grid = QuadratureGrid::get(GroupId::Torus(2), HalfInt::from_int(2)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let c = FourierCoefficients::random(GroupId::Torus(2), HalfInt::from_int(2), &mut rng).unwrap();
        let f = crate::fourier::inverse(&c, &grid).unwrap();
        let csv = grid_function_to_csv(&f);
        let back = grid_function_from_csv(&csv, Arc::clone(&grid)).unwrap();
        assert_eq!(f.values(), back.values());
        // Wrong grid size is refused.
        let small = QuadratureGrid::get(GroupId::Torus(2), HalfInt::from_int(1)).unwrap();
        assert!(grid_function_from_csv(&csv, small).is_err());
    }

    #[test]
    fn reports_round_trip_and_escape_commas() {
        // Dense out to cutoff + difference order, as the checker requires.
        let sigma = spectral_multiplier(GroupId::Torus(2), HalfInt::from_int(6), |_| {
            Complex64::new(1.0, 0.0)
        })
        .unwrap();
        let report = check_hm(&sigma, HalfInt::from_int(4), None).unwrap();
        let json = report_to_json(&report).unwrap();
        let back = report_from_json(&json).unwrap();
        assert_eq!(back.verdict, report.verdict);
        assert_eq!(back.conditions.len(), report.conditions.len());
        for (a, b) in report.conditions.iter().zip(&back.conditions) {
            assert_eq!(a.id, b.id);
            assert_eq!(a.constant.to_bits(), b.constant.to_bits());
        }
        let csv = report_to_csv(&report);
        let rows = report_csv_rows(&csv).unwrap();
        assert_eq!(rows.len(), report.conditions.len());
        for (row, c) in rows.iter().zip(&report.conditions) {
            assert_eq!(row.0, c.id);
            assert_eq!(row.1.to_bits(), c.constant.to_bits());
            assert_eq!(row.2.to_bits(), c.half_cutoff_constant.to_bits());
        }
        // Torus difference ids contain commas and must be quoted.
        assert!(report.conditions.iter().any(|c| c.id.contains(',')));
    }

    #[test]
    fn probe_files_round_trip() {
        let sigma = spectral_multiplier(GroupId::Torus(1), HalfInt::from_int(3), |l| {
            Complex64::new(1.0 / l.weight(), 0.0)
        })
        .unwrap();
        let bands = [HalfInt::from_int(1), HalfInt::from_int(2), HalfInt::from_int(3)];
        let res = opnorm_lower_bound(&sigma, 2.0, &bands, 3, 17).unwrap();
        let back = probe_from_json(&probe_to_json(&res).unwrap()).unwrap();
        assert_eq!(back.statistics.len(), res.statistics.len());
        for (a, b) in res.statistics.iter().zip(&back.statistics) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(back.trend.map(f64::to_bits), res.trend.map(f64::to_bits));
        let rows = probe_csv_rows(&probe_to_csv(&res)).unwrap();
        for ((band, stat), (b, s)) in rows.iter().zip(res.band_limits.iter().zip(&res.statistics)) {
            assert_eq!(*band, b.twice() as f64 / 2.0);
            assert_eq!(stat.to_bits(), s.to_bits());
        }
        let plot = probe_to_gnuplot(&res);
        assert!(plot.starts_with('#'));
        assert_eq!(plot.lines().count(), 2 + res.band_limits.len());
    }

    #[test]
    fn csv_quoting_survives_embedded_quotes_and_commas() {
        let weird = "dx^(1,0) D[\"odd\"]";
        let escaped = csv_escape(weird);
        let line = format!("{escaped},1.0");
        let fields = csv_split(&line);
        assert_eq!(fields[0], weird);
        assert_eq!(fields[1], "1.0");
    }
}
