//! Discrete curvature of boundary polylines and level-set extraction.

use std::collections::HashMap;

use crate::geometry::ambient::{BaseMetric, Vec2};
use crate::geometry::DomainMesh;

/// Geodesic curvature at `cur` of the polyline `prev → cur → next` with
/// respect to the σ-unit normal `eta`, from a nonuniform three-point fit.
/// The flag is false when the triple is degenerate (collinear in the chart
/// or very uneven), in which case the value is still returned.
pub fn polyline_curvature(
    metric: &BaseMetric,
    prev: Vec2,
    cur: Vec2,
    next: Vec2,
    eta: Vec2,
) -> (f64, bool) {
    let a = metric.norm(0.5 * (prev + cur), cur - prev);
    let b = metric.norm(0.5 * (cur + next), next - cur);
    if !(a > 0.0 && b > 0.0) {
        return (0.0, false);
    }
    let d1 = prev * (-b / (a * (a + b))) + cur * ((b - a) / (a * b)) + next * (a / (b * (a + b)));
    let d2 = (prev / (a * (a + b)) - cur / (a * b) + next / (b * (a + b))) * 2.0;
    let gamma = metric.christoffel(cur);
    let acc = d2 + Vec2::new(d1.dot(&(gamma[0] * d1)), d1.dot(&(gamma[1] * d1)));
    let sigma = metric.tensor(cur);
    let speed2 = d1.dot(&(sigma * d1));
    let kappa = acc.dot(&(sigma * eta)) / speed2;
    let cross = (cur - prev).perp(&(next - cur)).abs();
    let chart_scale = (cur - prev).norm() * (next - cur).norm();
    let collinear = cross <= 1e-10 * chart_scale;
    let uneven = a.max(b) > 4.0 * a.min(b);
    (kappa, !(collinear || uneven))
}

/// One connected piece of a level set, as a chart polyline.
#[derive(Clone, Debug)]
pub struct LevelCurve {
    pub points: Vec<Vec2>,
    pub closed: bool,
}

/// Extracts `{values = level}` by marching triangles; crossing points are
/// linear interpolations along edges.
pub fn level_curves(mesh: &DomainMesh, values: &[f64], level: f64) -> Vec<LevelCurve> {
    type Key = (usize, usize);
    let key = |a: usize, b: usize| (a.min(b), a.max(b));
    let mut points: HashMap<Key, Vec2> = HashMap::new();
    let mut links: HashMap<Key, Vec<Key>> = HashMap::new();
    let above = |v: usize| values[v] >= level;
    for tri in mesh.triangles() {
        let mut crossing = Vec::with_capacity(2);
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            if above(a) != above(b) {
                let kk = key(a, b);
                let s = (level - values[a]) / (values[b] - values[a]);
                let p = mesh.vertices()[a] * (1.0 - s) + mesh.vertices()[b] * s;
                points.entry(kk).or_insert(p);
                crossing.push(kk);
            }
        }
        if crossing.len() == 2 {
            links.entry(crossing[0]).or_default().push(crossing[1]);
            links.entry(crossing[1]).or_default().push(crossing[0]);
        }
    }
    let mut keys: Vec<Key> = links.keys().copied().collect();
    keys.sort_unstable();
    let mut used: HashMap<Key, bool> = keys.iter().map(|&k| (k, false)).collect();
    let mut out = Vec::new();
    // Open curves start at endpoints of degree one.
    let mut starts: Vec<Key> = keys.iter().copied().filter(|k| links[k].len() == 1).collect();
    starts.extend(keys.iter().copied().filter(|k| links[k].len() != 1));
    for start in starts {
        if used[&start] {
            continue;
        }
        let mut chain = vec![start];
        used.insert(start, true);
        let mut cur = start;
        loop {
            let next = links[&cur].iter().copied().find(|k| !used[k]);
            match next {
                Some(n) => {
                    used.insert(n, true);
                    chain.push(n);
                    cur = n;
                }
                None => break,
            }
        }
        let closed = chain.len() > 2 && links[&cur].contains(&start);
        out.push(LevelCurve {
            points: chain.iter().map(|k| points[k]).collect(),
            closed,
        });
    }
    out
}
