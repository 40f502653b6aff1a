use enfnet_web::{consensus_demo, detect_demo, estimate_demo};

#[test]
fn exports_are_deterministic_json() {
    let runs = || {
        [
            estimate_demo(5, "audio", 40.0, 20.0),
            detect_demo(5, "video", 90.0, 20.0, 30.0, 60.0),
            consensus_demo(5, 7, 2, "random", 30),
        ]
    };
    let (a, b) = (runs(), runs());
    assert_eq!(a, b);
    for doc in &a {
        let v: serde_json::Value = serde_json::from_str(doc).unwrap();
        assert!(v.get("error").is_none(), "{doc}");
    }
}
