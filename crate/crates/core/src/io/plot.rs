//! gnuplot scripts that render written CSV files.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Which figure to draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// S_out(k, ω) heatmap.
    PsdHeatmap,
    /// Marker heatmap with the S_out ridge overlaid as contours.
    MarkerOverlay,
    /// Ω_B(k, ω) heatmap.
    BerryHeatmap,
    /// Re λ and Im λ against k in two panels.
    EigenPanels,
    /// Peak marker against drive power, one curve per k.
    PowerCurves,
    /// Stability margin against k.
    Stability,
}

/// Writes a self-contained script that reads `csv_name` relative to its own location.
///
/// `rows` is the number of data records; zero refuses to write anything.
pub fn emit_plot_script(kind: PlotKind, csv_name: &str, rows: usize, path: &Path) -> Result<()> {
    if rows == 0 {
        return Err(Error::EmptyResult("nothing to plot".into()));
    }
    std::fs::write(path, plot_script(kind, csv_name))?;
    Ok(())
}

pub fn plot_script(kind: PlotKind, csv: &str) -> String {
    let stem = csv.strip_suffix(".csv").unwrap_or(csv);
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set terminal pngcairo size 1200,800\n");
    let _ = writeln!(s, "set output '{stem}.png'");
    match kind {
        PlotKind::PsdHeatmap => {
            s.push_str("set xlabel 'k (k_x units)'\nset ylabel 'omega (Ω units)'\n");
            s.push_str("set cblabel 'S_out'\nset view map\nset palette rgb 33,13,10\n");
            let _ = writeln!(s, "plot '{csv}' using 2:4:7 skip 1 with image notitle");
        }
        PlotKind::MarkerOverlay => {
            s.push_str("set xlabel 'k (k_x units)'\nset ylabel 'omega (Ω units)'\n");
            s.push_str("set cblabel 'C'\nset view map\nset palette defined (-1 'blue', 0 'white', 1 'red')\n");
            let _ = writeln!(
                s,
                "plot '{csv}' using 2:4:9 skip 1 with image notitle, \\\n     '{csv}' using 2:4:7 skip 1 with points pt 0 lc rgb 'black' notitle"
            );
        }
        PlotKind::BerryHeatmap => {
            s.push_str("set xlabel 'k (k_x units)'\nset ylabel 'omega (Ω units)'\n");
            s.push_str("set cblabel 'Omega_B'\nset view map\nset palette defined (-1 'blue', 0 'white', 1 'red')\n");
            let _ = writeln!(s, "plot '{csv}' using 2:4:5 skip 1 with image notitle");
        }
        PlotKind::EigenPanels => {
            s.push_str("set multiplot layout 1,2\nset xlabel 'k (k_x units)'\n");
            s.push_str("set ylabel 'Re λ (Ω units)'\n");
            let _ = writeln!(s, "plot for [i=0:5] '{csv}' using 2:(column(3+2*i)) skip 1 with lines title sprintf('λ_%d', i)");
            s.push_str("set ylabel 'Im λ (Ω units)'\n");
            let _ = writeln!(s, "plot for [i=0:5] '{csv}' using 2:(column(4+2*i)) skip 1 with lines title sprintf('λ_%d', i)");
            s.push_str("unset multiplot\n");
        }
        PlotKind::PowerCurves => {
            s.push_str("set xlabel 'P (pump units)'\nset ylabel 'C at peak'\nset logscale x\n");
            let _ = writeln!(s, "stats '{csv}' using 1 skip 1 nooutput");
            let _ = writeln!(
                s,
                "plot '{csv}' using 2:3:1 skip 1 with linespoints lc variable title 'k'"
            );
        }
        PlotKind::Stability => {
            s.push_str("set xlabel 'k (k_x units)'\nset ylabel 'max Re λ (Ω units)'\n");
            let _ = writeln!(s, "plot '{csv}' using 2:17 skip 1 with lines notitle, 0 with lines dt 2 notitle");
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heatmap_labels() {
        let s = plot_script(PlotKind::PsdHeatmap, "map.csv");
        assert!(s.contains("k (k_x units)"));
        assert!(s.contains("omega (Ω units)"));
        assert!(s.contains("'map.csv'"));
        assert_eq!(s, plot_script(PlotKind::PsdHeatmap, "map.csv"));
    }

    #[test]
    fn eigen_script_has_two_panels() {
        let s = plot_script(PlotKind::EigenPanels, "eig.csv");
        assert!(s.contains("layout 1,2"));
        assert_eq!(s.matches("plot for").count(), 2);
    }

    #[test]
    fn empty_result_writes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.gp");
        assert!(emit_plot_script(PlotKind::PsdHeatmap, "x.csv", 0, &path).is_err());
        assert!(!path.exists());
    }
}
