fn main() {
    let spec = ricci_forge::WeightedWarpedSpec::new(
        1, 1,
        ricci_forge::Profile::cosine(0.05, 1.5),
        ricci_forge::Profile::sine(0.05, 1.5),
        ricci_forge::Profile::constant(0.0, 0.05, 1.5),
        ricci_forge::QValue::Finite(3.0),
    ).unwrap();
    let json = serde_json::to_string(&spec).unwrap();
    println!("{}", &json[..300.min(json.len())]);
    let back: Result<ricci_forge::WeightedWarpedSpec, _> = serde_json::from_str(&json);
    println!("{:?}", back.err());
}
