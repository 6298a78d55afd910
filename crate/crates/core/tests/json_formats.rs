//! Byte-stable JSON for constraints and schedules.

use agesched::{gd, AoiConstraints, ConstraintsFile, CyclicSchedule, Error};

#[test]
fn schedule_json_is_byte_stable() {
    let d = AoiConstraints::new([2, 4, 4]).unwrap();
    let s = gd(&d).unwrap();
    let text = s.to_json();
    assert_eq!(
        text,
        r#"{"cycle_length":4,"grid":[["0",null,"0",null],["1","2",null,null]],"num_channels":2}"#
    );
    assert_eq!(CyclicSchedule::from_json(&text).unwrap(), s);
}

#[test]
fn idle_cells_are_null() {
    let s =
        CyclicSchedule::from_json(r#"{"cycle_length":3,"grid":[["4",null,"4"]],"num_channels":1}"#)
            .unwrap();
    assert_eq!(s.get(0, 1), None);
    assert_eq!(s.get(0, 2), Some(4));
    assert_eq!(
        s.to_json(),
        r#"{"cycle_length":3,"grid":[["4",null,"4"]],"num_channels":1}"#
    );
}

#[test]
fn malformed_schedules_are_rejected() {
    for bad in [
        r#"{"cycle_length":2,"grid":[["0"]],"num_channels":1}"#,
        r#"{"cycle_length":1,"grid":[["0"]],"num_channels":2}"#,
        r#"{"cycle_length":1,"grid":[["x"]],"num_channels":1}"#,
        r#"{"cycle_length":1,"grid":[["0"]],"num_channels":1,"extra":0}"#,
    ] {
        assert!(
            matches!(
                CyclicSchedule::from_json(bad),
                Err(Error::InvalidParameters(_))
            ),
            "{bad}"
        );
    }
}

#[test]
fn constraints_json_keeps_caller_order() {
    let file = ConstraintsFile::from_json(r#"{"d":[6,3,5],"id":"x"}"#).unwrap();
    let d = file.constraints().unwrap();
    assert_eq!(d.deadlines(), &[3, 5, 6]);
    assert_eq!(d.ids(), &[1, 2, 0]);
    assert_eq!(
        ConstraintsFile::new("x", &d).to_json(),
        r#"{"d":[6,3,5],"id":"x"}"#
    );
    assert!(ConstraintsFile::from_json(r#"{"d":[2,0]}"#)
        .unwrap()
        .constraints()
        .is_err());
    assert!(ConstraintsFile::from_json(r#"{"d":[]}"#)
        .unwrap()
        .constraints()
        .is_err());
}
