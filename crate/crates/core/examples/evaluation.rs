//! Optimal one-to-one matching and the MODA / MODP / precision / recall
//! report, including a frame bad enough to drive MODA negative.
//!
//! Run with `cargo run --example evaluation`.

use mvaug::{compute_metrics, match_detections, Point2};

fn main() -> mvaug::Result<()> {
    let truth = [Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(3.0, 3.0), Point2::new(6.0, 1.0)];
    let found = [Point2::new(0.4, 0.0), Point2::new(0.6, 0.0), Point2::new(3.0, 3.1), Point2::new(9.0, 9.0), Point2::new(9.0, 0.0)];

    // Greedy nearest-first would pair 0.6 with truth 0 and strand 0.4.
    let m = match_detections(&found, &truth, 0.5)?;
    for p in &m.pairs {
        println!("detection {} <-> truth {} at {:.2} m", p.det, p.gt, p.distance);
    }
    println!("{}\n", compute_metrics(std::slice::from_ref(&m), 0.5)?);

    let noisy: Vec<Point2> = (0..9).map(|i| Point2::new(20.0 + i as f64, 0.0)).collect();
    let bad = match_detections(&noisy, &truth, 0.5)?;
    let r = compute_metrics(&[m, bad], 0.5)?;
    println!("two frames, the second all misses: MODA {:.3}", r.moda);
    let worst = compute_metrics(&[match_detections(&noisy, &truth[..2], 0.5)?], 0.5)?;
    println!("nine false alarms against two people: MODA {:.1}", worst.moda);
    Ok(())
}
