// scratch probe
use loopsoup::brownian::*;
use loopsoup::domain::Domain;
use loopsoup::geometry::Point;
use loopsoup::stats::stream_rng;

fn main() {
    let f = LoopFunctional::TouchesAll(vec![(Point::new(0.0, 0.0), 0.2)]);
    for res in [256usize, 512, 1024] {
        let s = BlsSampler::new(Domain::unit_disk(), 0.3, 1e-3, res).unwrap();
        let m = bls_functional(&s, &f, 4_000, &mut stream_rng(900, res as u64)).unwrap();
        println!("res {res}: mean {:.4} se {:.4}", m.mean, m.se);
    }
    // lifetime tail probe
    for t in [0.1f64, 0.05, 0.02] {
        let mut rng = stream_rng(901, 0);
        let mut c = 0;
        for _ in 0..4000 {
            let b = sample_bridge_loop(Point::new(0.0,0.0), t, 64, &mut rng).unwrap();
            if b.poly.diameter() >= 0.5 { c += 1; }
        }
        println!("t {t}: P(diam>=0.5) = {}", c as f64 / 4000.0);
    }
}
