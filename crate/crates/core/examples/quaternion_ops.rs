//! Compound quaternion operators, composition order and Euler conversions.

use saa::math::{dcm_to_quat, quat_oplus, quat_plus, rotation_angle, Euler, Quaternion, Vec3};

fn main() -> saa::Result<()> {
    let a = Quaternion::from_rotation_vector(&Vec3::new(0.3, -0.2, 0.9));
    let b = Quaternion::from_rotation_vector(&Vec3::new(-0.5, 0.4, 0.1));

    // the two compound matrices commute
    let comm = quat_plus(&a) * quat_oplus(&b) - quat_oplus(&b) * quat_plus(&a);
    println!("|[a+, b(+)]| = {:.2e}", comm.amax());

    // mul(a, b) applies a first, then b
    let ab = a.mul(&b);
    println!(
        "angle(dcm(a b), dcm(b) dcm(a)) = {:.2e} rad",
        rotation_angle(&ab.dcm(), &(b.dcm() * a.dcm()))
    );

    let e = Euler::new(30f64.to_radians(), 2f64.to_radians(), -1f64.to_radians());
    let q = dcm_to_quat(&e.to_dcm())?;
    let back = Euler::from_dcm(&q.dcm());
    println!(
        "yaw/pitch/roll round trip: {:.6} {:.6} {:.6} deg",
        back.yaw.to_degrees(),
        back.pitch.to_degrees(),
        back.roll.to_degrees()
    );
    println!("rotation vector of a: {:?}", a.to_rotation_vector().as_slice());
    Ok(())
}
