//! Grid classifications as CSV plot data.

use std::io::Write;
use std::path::Path;

use rough_ideal::analysis::{Classified, LimitSetEstimate};

use crate::report::Report;

pub const HEADER: [&str; 4] = ["candidate", "classification", "master_density_upper", "certificate_id"];

fn record(c: &Classified) -> [String; 4] {
    [
        c.candidate.to_string(),
        c.classification.as_str().to_string(),
        c.master_density_upper.map(|d| d.to_string()).unwrap_or_default(),
        c.certificate_id.clone(),
    ]
}

pub fn write_estimate<W: Write>(est: &LimitSetEstimate, w: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(HEADER)?;
    for c in &est.entries {
        out.write_record(record(c))?;
    }
    out.flush()?;
    Ok(())
}

/// One row per grid point of `est`.
pub fn emit_grid_csv(est: &LimitSetEstimate, path: &Path) -> csv::Result<()> {
    write_estimate(est, std::fs::File::create(path)?)
}

/// Every estimate in a report, with a leading column naming the analysis
/// index it came from.
pub fn write_report<W: Write>(report: &Report, w: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["analysis"];
    header.extend(HEADER);
    out.write_record(&header)?;
    for e in &report.entries {
        if let Some(est) = &e.estimate {
            for c in &est.entries {
                let [a, b, cc, d] = record(c);
                out.write_record([e.index.to_string(), a, b, cc, d])?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rough_ideal::analysis::{estimate_rough_limit_set, EstimateKind, Grid, Settings};
    use rough_ideal::{fixtures, Ideal, Space};

    fn lines(est: &LimitSetEstimate) -> Vec<String> {
        let mut buf = Vec::new();
        write_estimate(est, &mut buf).unwrap();
        String::from_utf8(buf).unwrap().lines().map(str::to_string).collect()
    }

    #[test]
    fn alternating_estimate_has_thirteen_rows() {
        let space = Space::shifted(1.0).unwrap();
        let grid = Grid::new(-1.0, 2.0, 0.25).unwrap().points();
        let est = estimate_rough_limit_set(
            &fixtures::alternating(0.0, 1.0),
            &space,
            &grid,
            1.0,
            Ideal::Fin,
            &Settings::default(),
        )
        .unwrap();
        let l = lines(&est);
        assert_eq!(l.len(), 14);
        assert_eq!(l[0], HEADER.join(","));
        assert!(l[5].starts_with("0,accepted,0,"), "{}", l[5]);
    }

    #[test]
    fn empty_grid_is_header_only() {
        let est = LimitSetEstimate::from_classes(EstimateKind::RoughLimit, 1.0, vec![1.0], []);
        assert_eq!(lines(&est), vec![HEADER.join(",")]);
    }

    #[test]
    fn unknown_rows_are_flagged() {
        use rough_ideal::{Piece, PiecewiseSequence, PointRule, SetDescriptor};
        // Squares congruent to 2 mod 3 do not exist, but finiteness of that
        // intersection is beyond the structural prover, so Fin stays Unknown.
        let odd = SetDescriptor::power_image(2)
            .unwrap()
            .intersect(SetDescriptor::ap(2, 3).unwrap());
        let seq = PiecewiseSequence::new(vec![
            Piece::new(odd.clone(), PointRule::constant(5.0).unwrap()),
            Piece::new(odd.complement(), PointRule::constant(0.0).unwrap()),
        ])
        .unwrap();
        let space = Space::shifted(1.0).unwrap();
        let est = estimate_rough_limit_set(&seq, &space, &[0.0, 0.25], 0.5, Ideal::Fin, &Settings::default()).unwrap();
        let l = lines(&est);
        assert_eq!(l.len(), 3);
        assert!(l[1..].iter().all(|r| r.contains(",unknown,")), "{l:?}");
    }

    #[test]
    fn unwritable_path_is_an_error() {
        let est = LimitSetEstimate::from_classes(EstimateKind::RoughLimit, 0.0, vec![1.0], []);
        assert!(emit_grid_csv(&est, Path::new("/nonexistent-dir/grid.csv")).is_err());
    }
}
