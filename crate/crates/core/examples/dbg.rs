use loopdec::decomp::*;

fn main() {
    let input = TorsionInput::new(2, vec![(3, 1), (3, 1)], vec![]).unwrap();
    let r = loop_m_decomposition(&input, 20).unwrap();
    for c in &r.certificate {
        println!("{} [{}] pass={} mismatch={:?}", c.route, c.field, c.pass, c.mismatch);
    }
    println!("W = {}", r.complement.value);
}
