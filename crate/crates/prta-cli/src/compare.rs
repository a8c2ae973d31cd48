//! Pairwise method comparison: per task set, the (wcdfp ratio, time ratio)
//! point of a contender against a baseline, plus counts per quadrant around
//! the (1, 1) reference.

use prta_core::analysis::Method;
use serde::Serialize;

use crate::table::{HarnessError, ResultTable};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioPoint {
    pub taskset_id: String,
    pub target: u32,
    /// contender wcdfp / baseline wcdfp
    pub wcdfp_ratio: f64,
    /// contender wall time / baseline wall time
    pub time_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlaggedRatio {
    pub taskset_id: String,
    pub target: u32,
    pub reason: String,
}

/// Counts around (1, 1); the value axis splits at wcdfp ratio 1, the time
/// axis at time ratio 1, with the boundary counted on the ≥ side.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct QuadrantCounts {
    pub tighter_faster: usize,
    pub tighter_slower: usize,
    pub looser_faster: usize,
    pub looser_slower: usize,
}

impl QuadrantCounts {
    pub fn total(&self) -> usize {
        self.tighter_faster + self.tighter_slower + self.looser_faster + self.looser_slower
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareSummary {
    pub baseline: Method,
    pub contender: Method,
    pub points: Vec<RatioPoint>,
    /// Task sets whose ratio is undefined (zero denominator); reported, not
    /// dropped.
    pub flagged: Vec<FlaggedRatio>,
    pub quadrants: QuadrantCounts,
}

/// Ratio points for every (task set, target) pair in the table. Both methods
/// must be present for every pair.
pub fn compare_ratios(
    table: &ResultTable,
    baseline: Method,
    contender: Method,
) -> Result<CompareSummary, HarnessError> {
    let mut keys: Vec<(&str, u32)> = table
        .rows
        .iter()
        .filter(|r| r.method == baseline || r.method == contender)
        .map(|r| (r.taskset_id.as_str(), r.target))
        .collect();
    keys.sort_unstable();
    keys.dedup();

    let mut points = Vec::new();
    let mut flagged = Vec::new();
    let mut quadrants = QuadrantCounts::default();

    for (id, target) in keys {
        let missing = |m: Method| HarnessError::MissingMethodRows {
            taskset_id: id.to_string(),
            target,
            missing: m,
        };
        let base = table
            .find(id, target, baseline)
            .ok_or_else(|| missing(baseline))?;
        let cont = table
            .find(id, target, contender)
            .ok_or_else(|| missing(contender))?;

        if base.wcdfp == 0.0 || base.wall_time_s == 0.0 {
            flagged.push(FlaggedRatio {
                taskset_id: id.to_string(),
                target,
                reason: if base.wcdfp == 0.0 {
                    format!("baseline {} wcdfp is zero", baseline)
                } else {
                    format!("baseline {} wall time is zero", baseline)
                },
            });
            continue;
        }

        let point = RatioPoint {
            taskset_id: id.to_string(),
            target,
            wcdfp_ratio: cont.wcdfp / base.wcdfp,
            time_ratio: cont.wall_time_s / base.wall_time_s,
        };
        match (point.wcdfp_ratio < 1.0, point.time_ratio < 1.0) {
            (true, true) => quadrants.tighter_faster += 1,
            (true, false) => quadrants.tighter_slower += 1,
            (false, true) => quadrants.looser_faster += 1,
            (false, false) => quadrants.looser_slower += 1,
        }
        points.push(point);
    }

    Ok(CompareSummary {
        baseline,
        contender,
        points,
        flagged,
        quadrants,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::ResultRow;

    fn row(id: &str, method: Method, wcdfp: f64, wall: f64) -> ResultRow {
        ResultRow {
            taskset_id: id.into(),
            n: 10,
            utilization: 0.65,
            target: 0,
            method,
            wcdfp,
            wall_time_s: wall,
            merge_operand_sum: 0,
            lost_mass: 0.0,
            mc_halfwidth: None,
        }
    }

    #[test]
    fn identical_methods_land_on_the_reference_point() {
        let mut table = ResultTable::default();
        for i in 0..4 {
            table
                .rows
                .push(row(&format!("s{i}"), Method::AcImp, 1e-5, 0.25));
        }
        let summary = compare_ratios(&table, Method::AcImp, Method::AcImp).unwrap();
        assert_eq!(summary.points.len(), 4);
        assert!(summary
            .points
            .iter()
            .all(|p| p.wcdfp_ratio == 1.0 && p.time_ratio == 1.0));
        assert_eq!(summary.quadrants.looser_slower, 4);
        assert_eq!(summary.quadrants.total(), 4);
    }

    #[test]
    fn constructed_slowdown_is_reported_on_axis() {
        let mut table = ResultTable::default();
        for i in 0..3 {
            let id = format!("s{i}");
            table.rows.push(row(&id, Method::AcOrig, 1e-4, 0.4));
            table.rows.push(row(&id, Method::AcImp, 1e-4, 0.2));
        }
        let summary = compare_ratios(&table, Method::AcImp, Method::AcOrig).unwrap();
        for p in &summary.points {
            assert_eq!(p.wcdfp_ratio, 1.0);
            assert_eq!(p.time_ratio, 2.0);
        }
        assert_eq!(summary.quadrants.looser_slower, 3);
    }

    #[test]
    fn zero_baseline_is_flagged_not_dropped() {
        let mut table = ResultTable::default();
        table.rows.push(row("a", Method::AcImp, 0.0, 0.5));
        table.rows.push(row("a", Method::Be, 1e-3, 0.1));
        table.rows.push(row("b", Method::AcImp, 1e-6, 0.5));
        table.rows.push(row("b", Method::Be, 1e-3, 0.1));
        let summary = compare_ratios(&table, Method::AcImp, Method::Be).unwrap();
        assert_eq!(summary.points.len(), 1);
        assert_eq!(summary.flagged.len(), 1);
        assert_eq!(summary.flagged[0].taskset_id, "a");
        assert_eq!(summary.quadrants.total(), 1);
    }

    #[test]
    fn missing_method_rows_error() {
        let mut table = ResultTable::default();
        table.rows.push(row("a", Method::AcImp, 1e-5, 0.5));
        table.rows.push(row("a", Method::Sc, 1e-5, 2.0));
        table.rows.push(row("b", Method::AcImp, 1e-5, 0.5));
        let err = compare_ratios(&table, Method::AcImp, Method::Sc).unwrap_err();
        assert!(matches!(err, HarnessError::MissingMethodRows { .. }));
    }
}
