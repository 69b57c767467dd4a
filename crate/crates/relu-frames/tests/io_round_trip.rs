use relu_frames::bias::{self, PbeOptions};
use relu_frames::{io, polytope, shapes, Bias, BiasEstimate, Error};

#[test]
fn frames_and_biases_survive_files() {
    let dir = std::env::temp_dir().join(format!("relu-frames-io-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let f = shapes::icosahedron();
    let path = dir.join("frame.csv");
    io::write_frame(&path, &f).unwrap();
    assert_eq!(io::read_frame(&path).unwrap().to_rows(), f.to_rows());
    let b = Bias::new(vec![-0.25, f64::INFINITY, 1e-17, -3.0]);
    let path = dir.join("bias.csv");
    io::write_bias(&path, &b).unwrap();
    assert_eq!(io::read_bias(&path).unwrap(), b);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn bias_json_with_infinities() {
    let b = io::parse_bias(r#"[-0.5, "inf", "-inf", 2]"#).unwrap();
    assert_eq!(b.values(), &[-0.5, f64::INFINITY, f64::NEG_INFINITY, 2.0]);
    let back: Bias = serde_json::from_str(&serde_json::to_string(&b).unwrap()).unwrap();
    assert_eq!(back, b);
}

#[test]
fn estimates_serialize_losslessly() {
    let t = shapes::tetrahedron();
    let fs = polytope::enumerate_facets(&t).unwrap();
    let est = bias::pbe_sphere(
        &t,
        &fs,
        &PbeOptions {
            cap_samples: 100,
            ..Default::default()
        },
    )
    .unwrap();
    let back: BiasEstimate = serde_json::from_str(&serde_json::to_string(&est).unwrap()).unwrap();
    assert_eq!(back, est);
}

#[test]
fn parse_errors_name_the_line() {
    match io::parse_frame("1,0\n# note\n0,x\n") {
        Err(Error::Parse { line: Some(3), .. }) => {}
        other => panic!("{other:?}"),
    }
    assert!(matches!(
        io::parse_frame("1,0\n0,1,2\n"),
        Err(Error::Parse { line: Some(2), .. })
    ));
}
