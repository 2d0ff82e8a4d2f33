//! CSV output. Floats use 12 significant digits; flagged cells stay empty.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::drift::ep::EpCandidate;
use crate::drift::StabilityReport;
use crate::error::{Error, Result};
use crate::spectra::SpectralMap;
use crate::sweep::ResultSet;
use crate::topology::{BerryMap, ChernMarkerMap, PowerCurve};
use crate::C64;

/// A header plus rows of already formatted cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// `{:.11e}`, or an empty cell for non-finite values.
pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else {
        String::new()
    }
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_to<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let f = BufWriter::new(File::create(path)?);
        self.write_to(f)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
        let header = r.headers()?.iter().map(String::from).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(String::from).collect()))
            .collect::<std::result::Result<_, _>>()?;
        Ok(Self { header, rows })
    }
}

/// `k_index,k,omega_index,omega,S_up,S_dn,S_out,flag`, plus `C,Omega_B` when a marker map is given.
pub fn spectral_table(map: &SpectralMap, marker: Option<&ChernMarkerMap>) -> Result<Table> {
    if map.values.is_empty() {
        return Err(Error::EmptyResult("spectral map".into()));
    }
    let mut header = vec!["k_index", "k", "omega_index", "omega", "S_up", "S_dn", "S_out", "flag"];
    if marker.is_some() {
        header.extend(["C", "Omega_B"]);
    }
    let mut t = Table::new(header);
    let nw = map.omega_grid.len();
    for (n, p) in map.values.iter().enumerate() {
        let (ik, iw) = (n / nw, n % nw);
        let flag = marker.map(|m| m.flags[n]).filter(|f| !f.is_ok()).unwrap_or(p.flag);
        let mut row = vec![
            ik.to_string(),
            fmt_float(map.k_grid[ik]),
            iw.to_string(),
            fmt_float(map.omega_grid[iw]),
            fmt_float(p.s_up),
            fmt_float(p.s_dn),
            fmt_float(p.s_out),
            flag.as_str().to_string(),
        ];
        if let Some(m) = marker {
            let c = m.values[n];
            row.push(fmt_float(c));
            row.push(fmt_float(2.0 * std::f64::consts::PI * c));
        }
        t.push(row);
    }
    Ok(t)
}

/// `k_index,k,omega_index,omega,Omega_B,flag` for a marker-derived Berry map.
pub fn berry_table(berry: &BerryMap, marker: &ChernMarkerMap) -> Result<Table> {
    if berry.values.is_empty() {
        return Err(Error::EmptyResult("berry map".into()));
    }
    let mut t = Table::new(["k_index", "k", "omega_index", "omega", "Omega_B", "flag"]);
    let nv = berry.grid_v.len();
    for (n, &b) in berry.values.iter().enumerate() {
        let (i, j) = (n / nv, n % nv);
        t.push(vec![
            i.to_string(),
            fmt_float(berry.grid_u[i]),
            j.to_string(),
            fmt_float(berry.grid_v[j]),
            fmt_float(b),
            marker.flags[n].as_str().to_string(),
        ]);
    }
    Ok(t)
}

/// Axis columns, then one column per output, then `flag,reason`.
pub fn result_set_table(rs: &ResultSet) -> Result<Table> {
    if rs.records.is_empty() {
        return Err(Error::EmptyResult("result set".into()));
    }
    let mut header = vec![format!("{}_index", rs.spec.axis1.name), rs.spec.axis1.name.to_string()];
    if let Some(a) = &rs.spec.axis2 {
        header.push(format!("{}_index", a.name));
        header.push(a.name.to_string());
    }
    header.extend(rs.columns.iter().cloned());
    header.push("flag".into());
    header.push("reason".into());
    let mut t = Table::new(header);
    for r in &rs.records {
        let mut row = vec![r.index.0.to_string(), fmt_float(r.axis_values.0)];
        if rs.spec.axis2.is_some() {
            row.push(r.index.1.to_string());
            row.push(fmt_float(r.axis_values.1.unwrap_or(f64::NAN)));
        }
        row.extend(r.values.iter().map(|&v| fmt_float(v)));
        row.push(r.flag.as_str().into());
        row.push(r.reason.clone().unwrap_or_default());
        t.push(row);
    }
    Ok(t)
}

/// One row per momentum with the six eigenvalues as `re_i,im_i` pairs.
pub fn eigen_table(ks: &[f64], spectra: &[Vec<C64>]) -> Result<Table> {
    if ks.is_empty() {
        return Err(Error::EmptyResult("eigenvalue scan".into()));
    }
    let mut header = vec!["k_index".to_string(), "k".to_string()];
    for i in 0..6 {
        header.push(format!("re_lambda_{i}"));
        header.push(format!("im_lambda_{i}"));
    }
    let mut t = Table::new(header);
    for (i, (k, eig)) in ks.iter().zip(spectra).enumerate() {
        let mut row = vec![i.to_string(), fmt_float(*k)];
        for z in eig {
            row.push(fmt_float(z.re));
            row.push(fmt_float(z.im));
        }
        t.push(row);
    }
    Ok(t)
}

/// Stability certificate per momentum.
pub fn stability_table(ks: &[f64], reports: &[std::result::Result<StabilityReport, String>]) -> Result<Table> {
    if ks.is_empty() {
        return Err(Error::EmptyResult("stability scan".into()));
    }
    let mut header: Vec<String> = vec!["k_index".into(), "k".into()];
    header.extend((1..=6).map(|j| format!("a{j}")));
    header.extend((1..=6).map(|j| format!("hurwitz_{j}")));
    header.extend(["rh_stable", "eigen_stable", "max_re_lambda", "margin", "flag"].map(String::from));
    let mut t = Table::new(header);
    for (i, (k, rep)) in ks.iter().zip(reports).enumerate() {
        let mut row = vec![i.to_string(), fmt_float(*k)];
        match rep {
            Ok(r) => {
                row.extend(r.coefficients.a[1..].iter().map(|&a| fmt_float(a)));
                row.extend(r.hurwitz_minors.iter().map(|&d| fmt_float(d)));
                row.push(r.rh_stable.to_string());
                row.push(r.eigen_stable.to_string());
                row.push(fmt_float(r.max_real_part));
                row.push(fmt_float(r.margin));
                row.push("OK".into());
            }
            Err(_) => {
                row.extend(std::iter::repeat_n(String::new(), 16));
                row.push("MARGINAL".into());
            }
        }
        t.push(row);
    }
    Ok(t)
}

pub fn ep_table(eps: &[EpCandidate]) -> Table {
    let mut t = Table::new([
        "k_at",
        "re_lambda_1",
        "im_lambda_1",
        "re_lambda_2",
        "im_lambda_2",
        "residual",
        "re_gap_before",
        "re_gap_after",
        "im_gap_before",
        "im_gap_after",
    ]);
    for e in eps {
        t.push(
            [
                e.k_at,
                e.lambda_pair[0].re,
                e.lambda_pair[0].im,
                e.lambda_pair[1].re,
                e.lambda_pair[1].im,
                e.residual,
                e.re_gap_before,
                e.re_gap_after,
                e.im_gap_before,
                e.im_gap_after,
            ]
            .map(fmt_float)
            .to_vec(),
        );
    }
    t
}

/// Long format: `k,P,C_peak,omega_at_peak`.
pub fn power_table(curves: &[PowerCurve]) -> Result<Table> {
    if curves.is_empty() {
        return Err(Error::EmptyResult("power sweep".into()));
    }
    let mut t = Table::new(["k", "P", "C_peak", "omega_at_peak"]);
    for c in curves {
        for s in &c.samples {
            t.push(vec![fmt_float(c.k), fmt_float(s.power), fmt_float(s.marker_peak), fmt_float(s.omega_at_peak)]);
        }
    }
    Ok(t)
}

pub fn write_csv(table: &Table, path: &Path) -> Result<()> {
    table.write(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::psd_map;
    use crate::PhysicalParams;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_float(1.0), "1.00000000000e0");
        assert_eq!(fmt_float(-0.000123456789012345), "-1.23456789012e-4");
        assert_eq!(fmt_float(f64::NAN), "");
    }

    #[test]
    fn one_cell_map_is_two_lines() {
        let m = psd_map(&PhysicalParams::default(), &[0.0], &[1.0]).unwrap();
        let s = spectral_table(&m, None).unwrap().to_string().unwrap();
        assert_eq!(s.lines().count(), 2);
        assert!(s.ends_with('\n'));
        assert!(!s.contains('\r'));
        assert!(s.starts_with("k_index,k,omega_index,omega,S_up,S_dn,S_out,flag\n"));
    }

    #[test]
    fn singular_cells_are_empty() {
        let p = PhysicalParams { kappa: 1.0, kappa_ext: 1.0, bare_detuning: 0.5, ..Default::default() };
        let m = psd_map(&p, &[0.0], &[0.0]).unwrap();
        let s = spectral_table(&m, None).unwrap().to_string().unwrap();
        assert_eq!(s.lines().nth(1).unwrap(), "0,0.00000000000e0,0,0.00000000000e0,,,,SINGULAR_R");
    }

    #[test]
    fn rewrite_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let m = psd_map(&PhysicalParams::gain_dominated(), &[-1.0, 0.5], &[-2.0, 0.3, 1.0]).unwrap();
        let a = dir.path().join("a.csv");
        let b = dir.path().join("b.csv");
        spectral_table(&m, None).unwrap().write(&a).unwrap();
        Table::read(&a).unwrap().write(&b).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }

    #[test]
    fn empty_inputs_refused() {
        assert!(matches!(power_table(&[]), Err(Error::EmptyResult(_))));
        assert!(matches!(eigen_table(&[], &[]), Err(Error::EmptyResult(_))));
    }
}
