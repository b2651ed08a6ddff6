//! Small hand-built graphs with known loop measures and tree counts, used
//! as oracles throughout the test suites and by the CLI demos.

use crate::geometry::Point;
use crate::graph::PlanarGraph;

/// Two interior vertices a=0, b=1 with q(a,b)=q(a,d1)=q(b,a)=q(b,d2)=1/2.
///
/// det(I - Q) = 3/4, so the total loop mass is log(4/3); the class of
/// (a,b,a) has mass 1/4 and the length-2j class has mass (1/4)^j / j.
pub fn g_ab() -> PlanarGraph {
    PlanarGraph::from_parts(
        vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(-1.0, 0.0),
            Point::new(2.0, 0.0),
        ],
        vec![false, false, true, true],
        &[(0, 1, 1.0), (0, 2, 1.0), (1, 0, 1.0), (1, 3, 1.0)],
        1.0,
    )
    .unwrap()
}

/// Path graph a=0 <-> b=1 <-> c=2 where a and c also step to the boundary.
/// Four vertices total in the interior closure of g_ab plus one extra.
pub fn g_abc() -> PlanarGraph {
    PlanarGraph::from_parts(
        vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(-1.0, 0.0),
            Point::new(3.0, 0.0),
        ],
        vec![false, false, false, true, true],
        &[
            (0, 1, 1.0),
            (0, 3, 1.0),
            (1, 0, 1.0),
            (1, 2, 1.0),
            (2, 1, 1.0),
            (2, 4, 1.0),
        ],
        1.0,
    )
    .unwrap()
}

/// n-by-m interior grid at unit mesh with wired boundary: every lattice edge
/// leaving the grid ends in its own absorbing boundary vertex, so interior
/// vertices all have out-degree 4.
pub fn wired_grid(n: usize, m: usize) -> PlanarGraph {
    let mut positions: Vec<Point> = Vec::new();
    let mut boundary: Vec<bool> = Vec::new();
    let mut edges: Vec<(u32, u32, f64)> = Vec::new();
    let idx = |x: usize, y: usize| (y * n + x) as u32;
    for y in 0..m {
        for x in 0..n {
            positions.push(Point::new(x as f64, y as f64));
            boundary.push(false);
        }
    }
    let mut add_boundary = |positions: &mut Vec<Point>, boundary: &mut Vec<bool>, p: Point| -> u32 {
        positions.push(p);
        boundary.push(true);
        (positions.len() - 1) as u32
    };
    for y in 0..m {
        for x in 0..n {
            let src = idx(x, y);
            let neighbors = [
                (x as i64 + 1, y as i64),
                (x as i64 - 1, y as i64),
                (x as i64, y as i64 + 1),
                (x as i64, y as i64 - 1),
            ];
            for (nx, ny) in neighbors {
                if nx >= 0 && ny >= 0 && (nx as usize) < n && (ny as usize) < m {
                    edges.push((src, idx(nx as usize, ny as usize), 1.0));
                } else {
                    let b = add_boundary(
                        &mut positions,
                        &mut boundary,
                        Point::new(nx as f64, ny as f64),
                    );
                    edges.push((src, b, 1.0));
                }
            }
        }
    }
    PlanarGraph::from_parts(positions, boundary, &edges, 1.0).unwrap()
}

/// Single interior vertex forced to step to the boundary.
pub fn forced_exit() -> PlanarGraph {
    PlanarGraph::from_parts(
        vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)],
        vec![false, true],
        &[(0, 1, 1.0)],
        1.0,
    )
    .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wired_grid_shape() {
        let g = wired_grid(2, 2);
        assert_eq!(g.interior_count(), 4);
        assert_eq!(g.boundary_count(), 8);
        for v in g.interior_vertices() {
            assert_eq!(g.out_degree(v), 4);
        }
    }

    #[test]
    fn g_ab_is_row_stochastic() {
        let g = g_ab();
        for v in g.interior_vertices() {
            let s: f64 = g.out_iter(v).map(|(t, _)| g.transition_probability(v, t).unwrap()).sum();
            assert!((s - 1.0).abs() < 1e-15);
        }
    }
}
