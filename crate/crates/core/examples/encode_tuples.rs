//! Encodes one tuple into the 87 network inputs and decodes each set bit.

use rulenet::datagen::{Class, Tuple};
use rulenet::encoder::EncodingScheme;

fn main() {
    let scheme = EncodingScheme::default_scheme();
    let t = Tuple {
        salary: 64_000.0,
        commission: 0.0,
        age: 45.0,
        elevel: 2.0,
        car: 11.0,
        zipcode: 4.0,
        hvalue: 350_000.0,
        hyears: 12.0,
        loan: 180_000.0,
        label: Class::A,
    };
    let encoded = scheme.encode(&t).expect("tuple within the attribute domains");
    println!("{} inputs plus bias I{}", scheme.bit_count(), scheme.bias_index() + 1);

    for a in &scheme.attributes {
        let bits: String = encoded.bits[a.range()].iter().map(|b| char::from(b'0' + b)).collect();
        let span = format!("I{}..I{}", a.start + 1, a.range().end);
        println!("{:<10} {:<8} {}", a.attribute.to_string(), span, bits);
    }

    println!("\nset bits as predicates:");
    for a in &scheme.attributes {
        for i in a.range().filter(|&i| encoded.bits[i] == 1) {
            let p = scheme.decode_bit_condition(i, true).expect("decodable bit");
            println!("  I{:<2} {}", i + 1, p);
        }
    }
}
