use sqg_lab::field::{ScalarField, VectorField};
use sqg_lab::grid::TorusGrid;
use sqg_lab::transport::*;

fn main() {
    let g = TorusGrid::new(64).unwrap();
    let c = std::f64::consts::PI;
    let w = |r: f64| (-2.0f64 * r * r).exp();
    let vx = ScalarField::from_fn(g, move |x, y| {
        let (dx, dy) = (x - c, y - c);
        -dy * w((dx * dx + dy * dy).sqrt())
    });
    let vy = ScalarField::from_fn(g, move |x, y| {
        let (dx, dy) = (x - c, y - c);
        dx * w((dx * dx + dy * dy).sqrt())
    });
    let v = sqg_lab::sqg::helmholtz(&VectorField::new(vx, vy));
    let u = TimeSampledVelocity::constant(g, v, -1.0, 1.0);
    let f = ScalarField::from_fn(g, move |x, y| (-(x - c).powi(2) - (y - c).powi(2)).exp());
    let t1 = 0.2;
    let sol = |dt: f64| advect(&f, &u, 0.0, t1, Scheme::SpectralRk4, dt, None).unwrap();
    let s1 = sol(0.05);
    let s2 = sol(0.025);
    let s3 = sol(0.00625);
    println!("self diff (0.05 vs 0.00625): {:.3e}", s1.sub(&s3).linf());
    println!("self diff (0.025 vs 0.00625): {:.3e}", s2.sub(&s3).linf());
    // oracle
    let exact = move |x: [f64; 2], t: f64| -> [f64; 2] {
        let (dx, dy) = (x[0] - c, x[1] - c);
        let r = (dx * dx + dy * dy).sqrt();
        let ang = w(r) * t;
        [c + ang.cos() * dx - ang.sin() * dy, c + ang.sin() * dx + ang.cos() * dy]
    };
    let n = g.n();
    let mut vals = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let dep = exact(g.node(i, j), -t1);
            vals[g.idx(i, j)] = (-(dep[0] - c).powi(2) - (dep[1] - c).powi(2)).exp();
        }
    }
    let oracle = ScalarField::from_values(g, vals);
    println!("oracle diff fine   : {:.3e}", s3.sub(&oracle).linf());
}
