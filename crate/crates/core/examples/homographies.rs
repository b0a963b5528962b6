//! Homography algebra, pinhole calibration, and the ground grid.
//!
//! Run with `cargo run --example homographies`.

use mvaug::geometry::rodrigues_to_rotation;
use mvaug::synth::look_at_extrinsics;
use mvaug::{CameraCalibration, GroundGrid, Homography, Point2};

fn main() -> mvaug::Result<()> {
    // Homographies map output coordinates to source coordinates.
    let shift = Homography::translation(4.0, -2.0);
    let zoom = Homography::scaling(2.0, 2.0)?;
    let both = shift.compose(&zoom); // zoom first, then shift
    let p = Point2::new(1.0, 1.0);
    println!("shift∘zoom maps {p:?} to {:?}", both.apply_point(p)?);
    println!("and the inverse brings it back: {:?}", both.invert()?.apply_point(both.apply_point(p)?)?);

    // Calibration files may store the rotation as an axis-angle vector.
    let quarter_turn = rodrigues_to_rotation([0.0, 0.0, std::f64::consts::FRAC_PI_2]);
    println!("quarter turn about z: {:?}", quarter_turn.map(|row| row.map(|v| (v * 1e9).round() / 1e9)));

    // A camera 10 m up at the edge of the area, looking at its middle.
    let k = [[800.0, 0.0, 479.5], [0.0, 800.0, 267.5], [0.0, 0.0, 1.0]];
    let (r, t) = look_at_extrinsics([18.0, -10.0, 10.0], [18.0, 8.0, 0.0], [0.0, 0.0, 1.0])?;
    let cam = CameraCalibration::new(k, r, t)?;
    println!("camera center {:?}", cam.center().map(|v| (v * 1e9).round() / 1e9));

    // T_grid sends a grid cell straight to a pixel.
    let grid = GroundGrid::wildtrack();
    let t = grid.projection_for(&cam)?;
    for cell in [Point2::new(90.0, 40.0), Point2::new(60.0, 10.0), Point2::new(120.0, 70.0)] {
        let world = grid.grid_to_ground(cell);
        match t.apply_point(cell) {
            Ok(px) => println!("cell ({:>5.1}, {:>4.1}) = world ({:>5.2}, {:>5.2}) m -> pixel ({:>7.1}, {:>6.1})", cell.x, cell.y, world.x, world.y, px.x, px.y),
            Err(e) => println!("cell {cell:?}: {e}"),
        }
    }
    println!("grid {}x{} cells of {} m", grid.cols, grid.rows, grid.cell_size);
    Ok(())
}
