use crate::error::{Error, Result};

use super::{FrontierPoint, RatePair, RegionFrontier, RegionKind, SearchMetadata};

/// Number of directions sampled in `[0, pi/2]` by [`region_distance`].
pub const DISTANCE_ANGLES: usize = 1801;

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Upper-right chain of the down-closed hull of `points`, from the vertex of
/// largest `r1` to the vertex of largest `rc`. Each vertex keeps the index of
/// the input point it came from.
pub(crate) fn upper_chain(points: &[RatePair]) -> Vec<(RatePair, usize)> {
    let mut pts: Vec<((f64, f64), usize)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| ((p.rc.max(0.0), p.r1.max(0.0)), i))
        .collect();
    pts.sort_by(|a, b| a.0 .0.total_cmp(&b.0 .0).then(a.0 .1.total_cmp(&b.0 .1)).then(a.1.cmp(&b.1)));
    pts.dedup_by(|b, a| a.0 == b.0);
    let mut hull: Vec<((f64, f64), usize)> = Vec::new();
    for p in pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2].0, hull[hull.len() - 1].0, p.0) >= -1e-15 {
            hull.pop();
        }
        hull.push(p);
    }
    // the chain climbs until the highest vertex; keep only the part after it
    let top = hull
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .0 .1.total_cmp(&b.1 .0 .1).then(a.1 .0 .0.total_cmp(&b.1 .0 .0)))
        .map_or(0, |(i, _)| i);
    hull.drain(..top);
    hull.into_iter().map(|((rc, r1), i)| (RatePair { rc, r1 }, i)).collect()
}

/// Convex, down-closed hull of a set of achievable rate pairs.
pub fn convexify(points: &[RatePair]) -> Result<RegionFrontier> {
    if points.is_empty() {
        return Err(Error::Usage("cannot convexify an empty point set".into()));
    }
    if points.iter().any(|p| !p.rc.is_finite() || !p.r1.is_finite()) {
        return Err(Error::Validation("rate pairs must be finite".into()));
    }
    let chain = upper_chain(points);
    let hull_changed = chain.windows(2).any(|w| {
        let mid = RatePair { rc: 0.5 * (w[0].0.rc + w[1].0.rc), r1: 0.5 * (w[0].0.r1 + w[1].0.r1) };
        !points.iter().any(|p| mid.rc <= p.rc + 1e-12 && mid.r1 <= p.r1 + 1e-12)
    });
    Ok(RegionFrontier {
        channel_id: String::new(),
        points: chain.into_iter().map(|(rate, _)| FrontierPoint { rate, factors: None, bounds: None }).collect(),
        metadata: SearchMetadata { kind: RegionKind::Points, hull_changed, candidates: points.len(), ..Default::default() },
    })
}

/// Hausdorff distance between two convex down-closed regions, through their
/// support functions on the nonnegative quadrant.
pub fn region_distance(a: &RegionFrontier, b: &RegionFrontier) -> Result<f64> {
    if a.channel_id != b.channel_id {
        return Err(Error::Usage(format!(
            "frontiers belong to different channels (`{}` vs `{}`)",
            a.channel_id, b.channel_id
        )));
    }
    let mut worst: f64 = 0.0;
    for k in 0..DISTANCE_ANGLES {
        let theta = std::f64::consts::FRAC_PI_2 * k as f64 / (DISTANCE_ANGLES - 1) as f64;
        let (c, s) = (theta.cos(), theta.sin());
        worst = worst.max((a.support(c, s) - b.support(c, s)).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn rp(rc: f64, r1: f64) -> RatePair {
        RatePair { rc, r1 }
    }

    #[test]
    fn two_corners_span_the_segment() {
        let f = convexify(&[rp(0.0, 1.0), rp(1.0, 0.0)]).unwrap();
        assert_eq!(f.points.len(), 2);
        assert_abs_diff_eq!(f.r1_at(0.5).unwrap(), 0.5, epsilon = 1e-15);
        assert!(f.contains(rp(0.5, 0.5), 1e-12));
        assert!(!f.contains(rp(0.6, 0.6), 1e-12));
        assert!(f.metadata.hull_changed);
    }

    #[test]
    fn interior_points_are_dropped() {
        let f = convexify(&[rp(0.0, 1.0), rp(0.2, 0.2), rp(1.0, 0.0), rp(0.5, 0.5), rp(0.3, 0.9)]).unwrap();
        let pts: Vec<_> = f.points.iter().map(|p| (p.rate.rc, p.rate.r1)).collect();
        assert_eq!(pts, vec![(0.0, 1.0), (0.3, 0.9), (1.0, 0.0)]);
    }

    #[test]
    fn single_point_and_empty() {
        let f = convexify(&[rp(0.4, 0.3)]).unwrap();
        assert_eq!(f.points.len(), 1);
        assert!(!f.metadata.hull_changed);
        assert!(f.contains(rp(0.4, 0.0), 0.0) && f.contains(rp(0.0, 0.3), 0.0));
        assert!(matches!(convexify(&[]), Err(Error::Usage(_))));
    }

    #[test]
    fn collinear_top_edge_is_merged() {
        // one distribution's region: corners (0.3, 0.5) and (0.8, 0)
        let f = convexify(&[rp(0.3, 0.5), rp(0.8, 0.0)]).unwrap();
        assert!(f.metadata.hull_changed);
        let f = convexify(&[rp(0.3, 0.5), rp(0.8, 0.0), rp(0.0, 0.5)]).unwrap();
        assert_eq!(f.points.len(), 2);
    }

    #[test]
    fn distance_between_nested_squares() {
        let a = convexify(&[rp(1.0, 1.0)]).unwrap();
        let b = convexify(&[rp(0.9, 1.0)]).unwrap();
        assert_abs_diff_eq!(region_distance(&a, &b).unwrap(), 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(region_distance(&a, &a).unwrap(), 0.0, epsilon = 0.0);
        let mut c = b.clone();
        c.channel_id = "other".into();
        assert!(matches!(region_distance(&a, &c), Err(Error::Usage(_))));
    }
}
